"""Command-line experiment runner.

    diskapprox check --config configs/z3_zbar.json --out out/

Subcommands run single stages or the whole ``study`` pipeline and write
``summary.json`` plus plot-ready CSV files.  Exit status is 0 when no stage
failed, 1 when a check failed and 2 for an invalid configuration.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import math
import os
import sys
import tempfile
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np

from . import approx, condition, geometry
from .config import Config, ConfigError, bipoly_to_json, load_config
from .symbolic import BiPoly, homogeneous_parts, is_complex_symmetric, odd_part

log = logging.getLogger("diskapprox")

EXIT_OK, EXIT_FAIL, EXIT_CONFIG = 0, 1, 2

# only these stages rest on certified bounds; everything else is sampled evidence
CERTIFIED_STAGES = frozenset({"check", "margin", "combine"})
STAGES = ("check", "margin", "verify", "combine", "separate", "kallin", "residual", "approx")
STUDY_ORDER = ("check", "margin", "combine", "verify", "separate", "residual", "kallin", "approx")


@dataclass
class Stage:
    name: str
    ok: bool | None
    details: dict = field(default_factory=dict)
    message: str = ""

    @property
    def certified(self) -> bool:
        return self.name in CERTIFIED_STAGES

    @property
    def verdict(self) -> str:
        if self.ok is None:
            return "skipped"
        if not self.ok:
            return "fail"
        return "pass" if self.certified else "evidence"

    def to_json(self) -> dict:
        return {"stage": self.name, "verdict": self.verdict, "certified": self.certified,
                "message": self.message, "details": self.details}


def fmt(x: float) -> str:
    return format(float(x), ".17g")


def _json_safe(obj: Any):
    if isinstance(obj, dict):
        return {str(k): _json_safe(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_json_safe(v) for v in obj]
    if isinstance(obj, complex):
        return {"re": obj.real, "im": obj.imag}
    if isinstance(obj, (np.floating, float)):
        x = float(obj)
        return x if math.isfinite(x) else ("inf" if x > 0 else "-inf" if x < 0 else "nan")
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def write_atomic(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_csv(path: Path, header: list[str], rows) -> None:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([fmt(v) if isinstance(v, (float, np.floating)) else v for v in row])
    write_atomic(path, buf.getvalue())


class Runner:
    """Holds the configuration and the intermediate results shared between stages."""

    def __init__(self, cfg: Config, out: Path):
        self.cfg = cfg
        self.out = out
        self.spec = cfg.spec
        self.files: dict[str, str] = {}
        self._verdict = None
        self._certificate: BiPoly | None = None
        self._combined: BiPoly | None = None

    # shared pieces
    @property
    def verdict(self):
        if self._verdict is None and self.spec.g is not None:
            self._verdict = condition.classify(self.spec.g, self.cfg.margin_samples)
        return self._verdict

    @property
    def certificate(self) -> BiPoly | None:
        """User-supplied polynomial if given, else the two-term certificate at the chosen pivot."""
        if self._certificate is None:
            if self.cfg.certificate is not None:
                self._certificate = self.cfg.certificate
            elif self.verdict is not None and self.verdict.pivot is not None and self.verdict.passes:
                self._certificate = condition.build_certificate(self.spec.g, self.verdict.pivot).p
        return self._certificate

    @property
    def probe_polynomial(self) -> BiPoly | None:
        """The sum of both certificates once their combination succeeded, else the certificate."""
        return self._combined if self._combined is not None else self.certificate

    def _needs_g(self, name: str) -> Stage | None:
        if self.spec.g is None:
            return Stage(name, None, message="no symbol g in configuration")
        return None

    # stages
    def check(self) -> Stage:
        if (s := self._needs_g("check")) is not None:
            return s
        g = self.spec.g
        try:
            v = self.verdict
        except condition.ConditionError as exc:
            return Stage("check", False, message=str(exc))
        details = {
            "pivot": v.pivot, "passes_A": v.passes_A, "passes_B": v.passes_B,
            "passes_C": v.passes_C, "margin_A": v.margin_A, "margin_B": v.margin_B,
            "margin_C": v.margin_C, "c": {str(n): c for n, c in v.c.items()},
        }
        if not v.passes:
            zeros = condition.zeros_on_circle(g, self.cfg.margin_samples, self.cfg.zero_tol)
            details["zeros_of_g_on_circle"] = zeros
            return Stage("check", False, details, "no sufficient condition applies")
        cert = condition.build_certificate(g, v.pivot)
        details["certificate"] = bipoly_to_json(cert.p)
        details["alpha"] = cert.alpha
        details["certificate_degree"] = cert.s_degree
        return Stage("check", True, details, f"condition {v.strongest} holds at pivot l={v.pivot}")

    def _trace(self, p: BiPoly):
        return condition.margin_trace(p, self.spec.g, self.cfg.margin_samples)

    def margin(self) -> Stage:
        if (s := self._needs_g("margin")) is not None:
            return s
        p = self.certificate
        if p is None:
            return Stage("margin", None, message="no certificate available")
        p = odd_part(p)
        parts = homogeneous_parts(p)
        if len(parts) != 1:
            return Stage("margin", False, message="certificate is not homogeneous")
        sym, dev = is_complex_symmetric(p)
        t0 = self._trace(p)
        f1 = self._trace(self.cfg.second_certificate).values if self.cfg.second_certificate else None
        rows = [(th, v, f1[i] if f1 is not None else "") for i, (th, v) in enumerate(zip(t0.thetas, t0.values))]
        path = self.out / "margin_trace.csv"
        write_csv(path, ["theta", "f0", "f1"], rows)
        self.files["margin_trace"] = str(path)
        flag, cmin = condition.check_strict_positivity(t0)
        details = {"certificate": bipoly_to_json(p), "complex_symmetric": sym, "symmetry_deviation": dev,
                   "sample_min": float(t0.values.min()), "lipschitz_bound": t0.lipschitz_bound,
                   "certified_min": cmin}
        ok = flag and sym
        msg = "margin strictly positive on the circle" if ok else "margin not certified positive"
        return Stage("margin", ok, details, msg)

    def combine(self) -> Stage:
        if (s := self._needs_g("combine")) is not None:
            return s
        if self.certificate is None or self.cfg.second_certificate is None:
            return Stage("combine", None, message="needs certificate and second_certificate")
        t0 = self._trace(odd_part(self.certificate))
        t1 = self._trace(odd_part(self.cfg.second_certificate))
        try:
            res = condition.combine_certificates(t0, t1, self.cfg.zero_tol, self.cfg.cap)
        except condition.ConditionError as exc:
            return Stage("combine", False, message=str(exc))
        self._combined = odd_part(self.certificate) + odd_part(self.cfg.second_certificate)
        details = {"delta": res.delta, "U": res.U, "epsilon": res.epsilon, "lambda0": res.lambda0,
                   "verified_floor": res.verified_floor, "strict": res.strict}
        return Stage("combine", True, details, "f0 + lambda f1 >= lambda delta on the samples")

    def verify(self) -> Stage:
        if (s := self._needs_g("verify")) is not None:
            return s
        p = self.certificate
        if p is None:
            return Stage("verify", None, message="no certificate available")
        p = self.probe_polynomial
        z_power = 3 if self.cfg.perturbation_class == "o(z2g)" else 1
        rep = condition.verify_polynomial_condition(p, self.spec.g, self.cfg.verify_radii,
                                                    self.cfg.verify_angles, z_power=z_power)
        details = {"polynomial": bipoly_to_json(odd_part(p)), "radii": rep.radii, "min_plus": rep.min_plus, "max_minus": rep.max_minus,
                   "normalized_plus": rep.normalized_plus, "normalized_minus": rep.normalized_minus,
                   "perturbation_class": self.cfg.perturbation_class,
                   "order": rep.order, "n_violations": rep.n_violations,
                   "violations": [{"z": v.z, "R": v.R, "branch": v.branch, "value": v.value}
                                  for v in rep.violations[:10]],
                   "safe_radius": rep.safe_radius}
        msg = "all sampled signs correct" if rep.ok else f"{rep.n_violations} sign violations"
        return Stage("verify", rep.ok, details, msg)

    def separate(self) -> Stage:
        pts = geometry.sample_disk(self.spec.radius, self.cfg.n_r, self.cfg.n_theta)
        rep = geometry.separation_check(self.spec, pts, self.cfg.separation_tol)
        details = {"order": rep.order, "min_normalized_gap": rep.min_normalized_gap,
                   "violations": rep.violations[:10]}
        return Stage("separate", rep.ok, details, rep.message)

    def residual(self) -> Stage:
        if (s := self._needs_g("residual")) is not None:
            return s
        if not self.spec.has_w:
            return Stage("residual", None, message="direct generator: no sheets to transform")
        r = self.spec.radius
        radii = self.cfg.residual_radii or [r, r / 2, r / 4]
        try:
            table = geometry.residual_trace(self.spec, radii, newton_tol=self.cfg.newton_tol)
        except (geometry.InversionError, geometry.GeometryError) as exc:
            return Stage("residual", False, message=str(exc))
        path = self.out / "residuals.csv"
        write_csv(path, ["r", "ratio1", "ratio2"], table.rows())
        self.files["residuals"] = str(path)
        shrinking = table.shrinking()
        small_ok = geometry.check_smallness(self.spec, radii)
        details = {"radii": radii, "ratio1": table.ratio1, "ratio2": table.ratio2,
                   "noise_floor": table.noise_floor,
                   "h_class": self.spec.h_class, "h_smallness_plausible": small_ok}
        ok = shrinking and small_ok
        msg = "residual ratios shrink with the radius" if ok else "residual ratios do not shrink"
        return Stage("residual", ok, details, msg)

    def kallin(self) -> Stage:
        if not self.spec.has_w:
            return Stage("kallin", None, message="direct generator: no sheets to probe")
        r = self.cfg.kallin_radius or min(self.spec.radius, 0.05)
        pts = geometry.sample_disk(r, self.cfg.n_r, self.cfg.n_theta)
        D1, D2, D3, D4 = geometry.four_disks(self.spec, pts)
        product = BiPoly({(1, 1): 1.0})
        sheets = geometry.kallin_probe(product, np.vstack([D1, D2]), np.vstack([D3, D4]),
                                       phi=-math.pi / 2, tol=self.cfg.sign_tol, order=2)
        details: dict = {"radius": r,
                         "product_probe": {"ok": sheets.ok, "min_set1": sheets.min_set1,
                                           "max_set2": sheets.max_set2,
                                           "n_violations": len(sheets.violations),
                                           "spurious_zeros": sheets.zeros[:10]}}
        ok = sheets.ok
        p = self.probe_polynomial
        if p is not None and self.spec.g is not None:
            try:
                E1, E2 = geometry.transformed_sheets(self.spec, pts, self.cfg.newton_tol)
            except geometry.InversionError as exc:
                return Stage("kallin", False, details, str(exc))
            cert = geometry.kallin_probe(odd_part(p), E1, E2, tol=self.cfg.sign_tol)
            details["certificate_probe"] = {"ok": cert.ok, "min_set1": cert.min_set1,
                                            "max_set2": cert.max_set2,
                                            "n_violations": len(cert.violations),
                                            "spurious_zeros": cert.zeros[:10]}
            ok = ok and cert.ok
        return Stage("kallin", ok, details, "sign probes consistent" if ok else "sign probe violated")

    def approx(self, max_degree: int | None = None) -> Stage:
        degrees = list(self.cfg.degrees)
        if max_degree is not None:
            degrees = [d for d in degrees if d <= max_degree] or [max_degree]
        targets = {t.name: t.func for t in self.cfg.targets}
        study = approx.convergence_study(self.spec.second_generator, self.spec.radius, targets,
                                         degrees, self.cfg.n_r, self.cfg.n_theta, self.cfg.ridge,
                                         self.cfg.lawson_iters)
        path = self.out / "convergence.csv"
        write_csv(path, ["target", "N", "sup_residual"], study.rows)
        self.files["convergence"] = str(path)
        table = study.table()
        ratios = {name: (sups[-1] / sups[0] if sups[0] > 0 else 0.0) for name, sups in table.items()}
        details = {"degrees": degrees, "table": table, "monotone": study.monotone,
                   "ratio_last_first": ratios}
        # numerical (non-)convergence is never a proof either way
        return Stage("approx", True, details, "convergence table written")


def run(subcommand: str, config_path: str, out: str | None = None, seed: int | None = None,
        max_degree: int | None = None) -> int:
    try:
        cfg = load_config(config_path)
    except ConfigError as exc:
        print(f"invalid configuration: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    outdir = Path(out or cfg.output)
    runner = Runner(cfg, outdir)
    names = STUDY_ORDER if subcommand == "study" else (subcommand,)
    stages = []
    for name in names:
        method = getattr(runner, name)
        stage = method(max_degree) if name == "approx" else method()
        stages.append(stage)
        print(f"[{stage.verdict:>8}] {name}: {stage.message}")
        if name == "check" and stage.verdict == "pass":
            print("  certificate: " + repr(BiPoly({(t['j'], t['k']): complex(t['re'], t['im'])
                                                    for t in stage.details['certificate']})))
        if name == "check" and "zeros_of_g_on_circle" in stage.details:
            zs = ", ".join(f"{t:.6f}" for t in stage.details["zeros_of_g_on_circle"])
            print(f"  zeros of g on the unit circle (theta): {zs or 'none'}")
    failed = any(s.verdict == "fail" for s in stages)
    summary = {
        "config": cfg.name,
        "subcommand": subcommand,
        "seed": seed,
        "certificate": bipoly_to_json(runner.certificate) if runner.certificate is not None else None,
        "stages": [s.to_json() for s in stages],
        "files": runner.files,
        "exit_code": EXIT_FAIL if failed else EXIT_OK,
    }
    write_atomic(outdir / "summary.json", json.dumps(_json_safe(summary), indent=2, sort_keys=True) + "\n")
    return EXIT_FAIL if failed else EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="diskapprox", description=__doc__.splitlines()[0])
    parser.add_argument("subcommand", choices=STAGES + ("study",))
    parser.add_argument("--config", required=True, help="JSON configuration file")
    parser.add_argument("--out", default=None, help="output directory (default: config 'output')")
    parser.add_argument("--seed", type=int, default=None, help="seed echoed into the report")
    parser.add_argument("--max-degree", type=int, default=None, help="cap on the degree budget N")
    parser.add_argument("-v", "--verbose", action="store_true")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    return run(args.subcommand, args.config, args.out, args.seed, args.max_degree)


if __name__ == "__main__":
    sys.exit(main())
