"""Sufficient conditions for the polynomial condition and their certificates.

For an even homogeneous symbol ``g(z) = sum a[k] conj(z)**k z**(2m - k)`` and a
pivot ``l <= m`` the coefficient tests are

* A: ``|a[l]| > sum_{n != l} |a[n]|``
* B: ``sum_{n >= 1} |c[n]| < 1`` with ``c[n] = a[l+n]/a[l] + conj(a[l-n])/conj(a[l])``
* C: ``Re(1 + sum c[n] w**n) > 0`` on ``|w| = 1``

each weaker than the previous.  Any of them yields the two-term certificate
``conj(alpha) zeta1**D + alpha zeta2**D`` with ``D = 2m - 2l + 1`` and
``alpha = i |a[l]| / a[l]``.

Positivity on the circle is certified from finitely many samples: a
trigonometric polynomial ``sum C[n] e^{i n theta}`` is Lipschitz with constant
``sum |n| |C[n]|`` and every angle lies within ``pi / M`` of one of ``M``
uniform samples.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .symbolic import (
    BiPoly,
    HomogeneousSymbol,
    d_zeta2,
    eval_bipoly,
    homogeneous_parts,
    is_complex_symmetric,
    multiply_fourier,
    odd_part,
    trig_coefficients_on_circle,
)

DEFAULT_SAMPLES = 4096
ZERO_TOL = 1e-9
LAMBDA_CAP = 1.0
# R(z) = c * z * g(z); |z g| = o(g)
PERTURBATIONS = (0.0, 0.1, -0.1, 0.1j, -0.1j)


class ConditionError(ValueError):
    """Input outside the hypotheses of a coefficient test or combination."""


@dataclass(frozen=True)
class CoefficientVerdict:
    pivot: int | None
    passes_A: bool
    passes_B: bool
    passes_C: bool
    margin_A: float
    margin_B: float
    margin_C: float
    c: dict[int, complex] = field(default_factory=dict)

    @property
    def passes(self) -> bool:
        return self.passes_C

    @property
    def strongest(self) -> str | None:
        """Name of the strongest condition that holds at the pivot."""
        for name, ok in (("A", self.passes_A), ("B", self.passes_B), ("C", self.passes_C)):
            if ok:
                return name
        return None


@dataclass(frozen=True)
class Certificate:
    p: BiPoly
    s_degree: int
    alpha: complex
    pivot: int


@dataclass(frozen=True)
class MarginTrace:
    """Samples of ``Im(dp/dzeta2(z, conj z) * g(z))`` at uniform angles on the circle."""

    thetas: np.ndarray
    values: np.ndarray
    lipschitz_bound: float
    fourier: dict[int, complex] = field(default_factory=dict)

    def __post_init__(self):
        if len(self.thetas) != len(self.values):
            raise ValueError("thetas and values differ in length")
        if self.lipschitz_bound < 0:
            raise ValueError("lipschitz_bound must be non-negative")

    @property
    def f0(self) -> np.ndarray:
        return self.values

    @property
    def step(self) -> float:
        """Largest distance from any angle to its nearest sample."""
        return math.pi / len(self.thetas)


@dataclass(frozen=True)
class CombineResult:
    delta: float
    U: list[tuple[float, float]]
    epsilon: float
    lambda0: float
    verified_floor: float
    strict: bool = False


def _even_degree_m(g: HomogeneousSymbol) -> int:
    if g.degree % 2:
        raise ConditionError("coefficient conditions need a symbol of even degree 2m")
    return g.degree // 2


def derived_sequence(g: HomogeneousSymbol, l: int) -> dict[int, complex]:
    """``c[n] = a[l+n]/a[l] + conj(a[l-n])/conj(a[l])`` over the finite support, ``n >= 1``."""
    al = g.coefficient(l)
    if al == 0:
        raise ConditionError("pivot coefficient vanishes")
    out: dict[int, complex] = {}
    for k, a in g:
        if k > l:
            out[k - l] = out.get(k - l, 0j) + a / al
        elif k < l:
            out[l - k] = out.get(l - k, 0j) + a.conjugate() / al.conjugate()
    out = {n: c for n, c in sorted(out.items()) if c != 0}
    if not all(math.isfinite(abs(c)) for c in out.values()):
        raise ConditionError(f"pivot coefficient a[{l}] too small: derived sequence overflows")
    return out


def _margin_A(g: HomogeneousSymbol, l: int) -> float:
    al = abs(g.coefficient(l))
    return al - sum(abs(a) for k, a in g if k != l)


def _phi_real_min(c: dict[int, complex], M: int) -> float:
    w = np.exp(2j * np.pi * np.arange(M) / M)
    phi = np.ones(M, dtype=complex)
    for n, cn in c.items():
        phi += cn * w ** n
    return float(phi.real.min())


def _verdict_at(g: HomogeneousSymbol, l: int, M: int) -> CoefficientVerdict:
    c = derived_sequence(g, l)
    margin_A = _margin_A(g, l)
    margin_B = 1.0 - sum(abs(v) for v in c.values())
    sampled = _phi_real_min(c, M)
    lip = sum(n * abs(v) for n, v in c.items())
    # 1 - sum|c| is itself a lower bound for Re Phi, so B always implies C
    margin_C = max(sampled - math.pi / M * lip, margin_B)
    return CoefficientVerdict(
        pivot=l,
        passes_A=margin_A > 0,
        passes_B=margin_B > 0,
        passes_C=margin_C > 0,
        margin_A=margin_A,
        margin_B=margin_B,
        margin_C=margin_C,
        c=c,
    )


def _no_pivot(g: HomogeneousSymbol) -> CoefficientVerdict:
    total = -g.coefficient_sum()
    return CoefficientVerdict(None, False, False, False, total, total, total, {})


def _pivots(g: HomogeneousSymbol) -> list[int]:
    """Indices ``l <= m`` whose derived sequence is representable."""
    m = _even_degree_m(g)
    out = []
    for k, _ in g:
        if k > m:
            continue
        try:
            derived_sequence(g, k)
        except ConditionError:
            continue
        out.append(k)
    return out


def _check_samples(M: int) -> None:
    if M < 64:
        raise ValueError(f"need at least 64 circle samples, got {M}")


def check_condition_A(g: HomogeneousSymbol, M: int = DEFAULT_SAMPLES) -> CoefficientVerdict:
    """Best pivot for the dominant-coefficient test (max ``margin_A``, ties to smallest l)."""
    pivots = _pivots(g)
    if not pivots:
        return _no_pivot(g)
    best = max(pivots, key=lambda l: (_margin_A(g, l), -l))
    return _verdict_at(g, best, M)


def check_condition_B(g: HomogeneousSymbol, l: int, M: int = DEFAULT_SAMPLES) -> CoefficientVerdict:
    m = _even_degree_m(g)
    if l > m:
        raise ConditionError(f"pivot {l} exceeds m = {m}")
    return _verdict_at(g, l, M)


def check_condition_C(g: HomogeneousSymbol, l: int, M: int = DEFAULT_SAMPLES) -> CoefficientVerdict:
    _check_samples(M)
    m = _even_degree_m(g)
    if l > m:
        raise ConditionError(f"pivot {l} exceeds m = {m}")
    return _verdict_at(g, l, M)


def classify(g: HomogeneousSymbol, M: int = DEFAULT_SAMPLES) -> CoefficientVerdict:
    """Pick the pivot for which the strongest condition holds with the largest margin.

    Conditions are tried in the order A, B, C; within one condition the margin
    is maximised and ties go to the smallest pivot.
    """
    _check_samples(M)
    pivots = _pivots(g)
    if not pivots:
        return _no_pivot(g)
    verdicts = [_verdict_at(g, l, M) for l in pivots]
    for flag, margin in (("passes_A", "margin_A"), ("passes_B", "margin_B"), ("passes_C", "margin_C")):
        ok = [v for v in verdicts if getattr(v, flag)]
        if ok:
            return max(ok, key=lambda v: (getattr(v, margin), -v.pivot))
    return max(verdicts, key=lambda v: (v.margin_C, -v.pivot))


def build_certificate(g: HomogeneousSymbol, l: int) -> Certificate:
    m = _even_degree_m(g)
    if l > m:
        raise ConditionError(f"pivot {l} exceeds m = {m}")
    al = g.coefficient(l)
    if al == 0:
        raise ConditionError("pivot coefficient vanishes")
    alpha = 1j * abs(al) / al
    D = 2 * m - 2 * l + 1
    p = BiPoly({(D, 0): alpha.conjugate(), (0, D): alpha})
    return Certificate(p=p, s_degree=D, alpha=alpha, pivot=l)


def margin_fourier(p: BiPoly, g: HomogeneousSymbol) -> dict[int, complex]:
    """Fourier coefficients of ``dp/dzeta2(e^{it}, e^{-it}) * g(e^{it})``."""
    return multiply_fourier(trig_coefficients_on_circle(d_zeta2(p)), g.circle_coefficients())


def margin_trace(p: BiPoly, g, M: int = DEFAULT_SAMPLES) -> MarginTrace:
    """Sample ``f0(theta) = Im(dp/dzeta2(z, conj z) g(z))`` at ``theta_j = 2 pi j / M``."""
    parts = homogeneous_parts(p)
    if len(parts) != 1 or parts[0][0] % 2 == 0:
        raise ConditionError("margin trace needs an odd homogeneous polynomial")
    thetas = 2 * np.pi * np.arange(M) / M
    z = np.exp(1j * thetas)
    if isinstance(g, HomogeneousSymbol):
        fourier = margin_fourier(p, g)
        lip = float(sum(abs(n) * abs(c) for n, c in fourier.items()))
    else:
        fourier, lip = {}, math.inf
    values = np.imag(eval_bipoly(d_zeta2(p), z, np.conj(z)) * g(z))
    return MarginTrace(thetas=thetas, values=np.asarray(values, dtype=float),
                       lipschitz_bound=lip, fourier=fourier)


def check_strict_positivity(trace: MarginTrace) -> tuple[bool, float]:
    """``(flag, certified_min)`` with ``certified_min = min(samples) - (pi/M) * Lipschitz``."""
    if len(trace.values) == 0:
        return False, 0.0
    lo = float(np.min(trace.values))
    certified = lo - trace.step * trace.lipschitz_bound
    return certified > 0, certified


def zeros_on_circle(g, M: int = DEFAULT_SAMPLES, zero_tol: float = ZERO_TOL) -> list[float]:
    """Angles in ``[0, 2 pi)`` where ``|g|`` has a local minimum below ``zero_tol``."""
    from scipy.optimize import minimize_scalar

    thetas = 2 * np.pi * np.arange(M) / M
    mag = np.abs(g(np.exp(1j * thetas)))
    h = 2 * np.pi / M
    found: list[float] = []
    for i in range(M):
        if mag[i] <= mag[i - 1] and mag[i] <= mag[(i + 1) % M]:
            if mag[i] <= zero_tol:
                t = thetas[i]
            else:
                res = minimize_scalar(lambda t: abs(g(complex(np.exp(1j * t)))),
                                      bounds=(thetas[i] - h, thetas[i] + h),
                                      method="bounded", options={"xatol": 1e-14})
                if res.fun > zero_tol:
                    continue
                t = float(res.x)
            t = t % (2 * np.pi)
            if not any(abs(t - s) < h or abs(abs(t - s) - 2 * np.pi) < h for s in found):
                found.append(t)
    return sorted(found)


@dataclass
class Violation:
    z: complex
    R: complex
    branch: str
    value: float


@dataclass
class ConditionReport:
    """Sampled evidence for the sign conditions of the polynomial condition."""

    radii: list[float]
    min_plus: dict[float, float]
    max_minus: dict[float, float]
    normalized_plus: dict[float, float]
    normalized_minus: dict[float, float]
    violations: list[Violation]
    order: int
    n_violations: int = 0

    @property
    def ok(self) -> bool:
        return not self.violations

    @property
    def safe_radius(self) -> float | None:
        """Largest sampled radius with no violations (not a claimed supremum)."""
        bad = {v_r for v_r in self.radii
               if any(abs(abs(v.z) - v_r) <= 1e-12 * v_r for v in self.violations)}
        good = [r for r in self.radii if r not in bad]
        return max(good) if good else None


def verify_polynomial_condition(p: BiPoly, g, radii, M: int = 256,
                                perturbations=PERTURBATIONS, z_power: int = 1,
                                max_violations: int = 50) -> ConditionReport:
    """Sample ``Im p(z, conj z + g + R) > 0`` and ``Im p(z, conj z - g + R) < 0``.

    ``R(z) = c * z**z_power * g(z)`` for each ``c`` in ``perturbations``;
    ``z_power = 1`` gives perturbations of class ``o(g)``, ``z_power = 3`` the
    class ``o(z**2 g)`` needed when the first margin has zeros.  Only the odd
    part of ``p`` is used.  The result is sampled evidence, not a proof.
    """
    p = odd_part(p)
    thetas = 2 * np.pi * np.arange(M) / M
    deg_g = getattr(g, "degree", 2)
    order = max(p.min_degree, 1) - 1 + deg_g
    min_plus, max_minus, norm_plus, norm_minus = {}, {}, {}, {}
    violations: list[Violation] = []
    n_violations = 0
    for r in radii:
        z = r * np.exp(1j * thetas)
        gz = np.asarray(g(z), dtype=complex)
        lo, hi = math.inf, -math.inf
        for c in perturbations:
            R = c * z ** z_power * gz
            plus = np.imag(eval_bipoly(p, z, np.conj(z) + gz + R))
            minus = np.imag(eval_bipoly(p, z, np.conj(z) - gz + R))
            lo = min(lo, float(plus.min()))
            hi = max(hi, float(minus.max()))
            for branch, vals, bad in (("plus", plus, plus <= 0), ("minus", minus, minus >= 0)):
                idx = np.flatnonzero(bad)
                n_violations += len(idx)
                for i in idx[: max(0, max_violations - len(violations))]:
                    violations.append(Violation(complex(z[i]), complex(R[i]), branch, float(vals[i])))
        min_plus[r], max_minus[r] = lo, hi
        norm_plus[r], norm_minus[r] = lo / r ** order, hi / r ** order
    return ConditionReport(list(radii), min_plus, max_minus, norm_plus, norm_minus,
                           violations, order, n_violations)


def _intervals(mask: np.ndarray, thetas: np.ndarray) -> list[tuple[float, float]]:
    """Contiguous circular runs of ``mask`` as ``(start, end)`` angle pairs."""
    M = len(mask)
    if mask.all():
        return [(0.0, 2 * math.pi)]
    if not mask.any():
        return []
    start = int(np.flatnonzero(~mask)[0]) + 1
    out = []
    run = None
    for step in range(M):
        i = (start + step) % M
        if mask[i]:
            if run is None:
                run = [i, i]
            else:
                run[1] = i
        elif run is not None:
            out.append(run)
            run = None
    if run is not None:
        out.append(run)
    result = []
    for a, b in out:
        ta, tb = float(thetas[a]), float(thetas[b])
        if tb < ta:
            tb += 2 * math.pi
        result.append((ta, tb))
    return result


def combine_certificates(f0: MarginTrace, f1: MarginTrace, zero_tol: float = ZERO_TOL,
                         cap: float = LAMBDA_CAP) -> CombineResult:
    """Find ``lambda0, delta`` with ``f0 + lambda f1 >= lambda delta`` on the samples.

    ``f0`` may vanish on a set ``N``; ``f1`` must be positive there.  ``delta``
    is half the minimum of ``f1`` on ``N``, ``U`` the largest sublevel set of
    ``f0`` on which ``f1 >= delta``, ``epsilon`` the minimum of ``f0`` outside
    ``U`` and ``lambda0 = min(epsilon / (2 max|f1|), epsilon / (2 delta), cap)``.
    """
    a = np.asarray(f0.values, dtype=float)
    b = np.asarray(f1.values, dtype=float)
    if a.shape != b.shape or not np.array_equal(f0.thetas, f1.thetas):
        raise ConditionError("traces are sampled at different angles")
    if cap <= 0:
        raise ValueError("cap must be positive")
    if np.any(a < -zero_tol):
        raise ConditionError("first margin not nonnegative")
    in_N = a <= zero_tol
    norm1 = float(np.max(np.abs(b))) if len(b) else 0.0

    if not in_N.any():
        # strict regime: f0 alone is positive
        eps = float(a.min())
        delta = eps
        below = b < delta
        lam_safe = float(np.min(a[below] / (delta - b[below]))) if below.any() else math.inf
        lam = min(cap, lam_safe)
        floor = float(np.min(a + lam * b - lam * delta))
        result = CombineResult(delta, [], eps, lam, floor, strict=True)
    else:
        if np.any(b[in_N] <= 0):
            raise ConditionError("second certificate not positive on the zero set")
        delta = 0.5 * float(b[in_N].min())
        order = np.argsort(a, kind="stable")
        tau = math.inf
        for i in order:
            if b[i] < delta:
                tau = float(a[i])
                break
        in_U = a < tau
        eps = float(a[~in_U].min()) if (~in_U).any() else math.inf
        lam = cap
        if math.isfinite(eps):
            lam = min(lam, eps / (2 * delta))
            if norm1 > 0:
                lam = min(lam, eps / (2 * norm1))
        floor = float(np.min(a + lam * b - lam * delta))
        result = CombineResult(delta, _intervals(in_U, f0.thetas), eps, lam, floor)
    if not result.lambda0 > 0:
        raise ConditionError(f"no admissible lambda (lambda0 = {result.lambda0})")
    if result.verified_floor < -1e-12:
        raise ConditionError(f"combined margin floor {result.verified_floor:.3e} is negative")
    return result


def symbol_from_certificate(p: BiPoly) -> HomogeneousSymbol:
    """The symbol ``g(z) = i * conj(dp/dzeta2(z, conj z))``; its margin against ``p`` is ``|dp/dzeta2|**2``."""
    parts = homogeneous_parts(p)
    if len(parts) != 1 or parts[0][0] % 2 == 0:
        raise ConditionError("not an odd homogeneous polynomial")
    if parts[0][0] < 3:
        raise ConditionError("a linear certificate gives a symbol of degree 1, below the minimum of 2")
    flag, dev = is_complex_symmetric(p)
    if not flag:
        raise ConditionError(f"polynomial is not complex-symmetric (deviation {dev:g})")
    dp = d_zeta2(p)
    terms = {j: 1j * c.conjugate() for (j, _k), c in dp}
    return HomogeneousSymbol(parts[0][0] - 1, terms)
