import json

import pytest

from conftest import CONFIGS
from diskapprox.config import ConfigError, load_config, parse_config
from diskapprox.symbolic import BiPoly, HomogeneousSymbol


def base():
    return {"generator": {"g": {"degree": 4, "terms": [{"k": 1, "re": 1}]}}, "radius": 0.1}


def test_minimal():
    cfg = parse_config(base())
    assert cfg.spec.g == HomogeneousSymbol(4, {1: 1})
    assert cfg.degrees == [2, 4, 6, 8]
    assert cfg.n_r == 12 and cfg.n_theta == 48
    assert cfg.perturbation_class == "o(g)"


@pytest.mark.parametrize("path", sorted(CONFIGS.glob("*.json")), ids=lambda p: p.stem)
def test_shipped_configs_parse(path):
    cfg = load_config(path)
    assert cfg.name == path.stem


def test_certificate_and_negative_k():
    raw = base()
    raw["generator"]["g"] = {"degree": 2, "terms": [{"k": -1, "re": 0.5}]}
    raw["certificate"] = [{"j": 5, "k": 0, "im": -1}, {"j": 0, "k": 5, "im": 1}]
    cfg = parse_config(raw)
    assert cfg.certificate == BiPoly({(5, 0): -1j, (0, 5): 1j})
    assert cfg.spec.g.coefficient(-1) == 0.5


@pytest.mark.parametrize("mutate, where", [
    (lambda r: r.pop("radius"), "$.radius"),
    (lambda r: r.update(radius="big"), "$.radius"),
    (lambda r: r["generator"]["g"]["terms"][0].update(re="x"), "$.generator.g.terms[0].re"),
    (lambda r: r["generator"]["g"]["terms"][0].pop("k"), "$.generator.g.terms[0].k"),
    (lambda r: r["generator"]["g"].update(degree=1), "$.generator.g.degree"),
    (lambda r: r["generator"].update(F=[{"j": 2, "k": 0, "re": 1}]), "$.generator"),
    (lambda r: r["generator"].update(F=[{"j": -1, "k": 0, "re": 1}]), "$.generator.F[0].j"),
    (lambda r: r.update(degrees=[4, 2]), "$.degrees"),
    (lambda r: r.update(sampling={"margin_samples": 8}), "$.sampling.margin_samples"),
    (lambda r: r.update(tolerances={"zero_tol": -1}), "$.tolerances.zero_tol"),
    (lambda r: r.update(perturbation_class="o(1)"), "$.perturbation_class"),
    (lambda r: r.update(targets=[{"name": "t"}]), "$.targets[0]"),
    (lambda r: r.update(cap=0), "$.cap"),
])
def test_field_diagnostics(mutate, where):
    raw = base()
    mutate(raw)
    with pytest.raises(ConfigError) as info:
        parse_config(raw)
    assert info.value.path == where


def test_json_syntax_error(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text('{"radius": 0.1,\n  "generator": }')
    with pytest.raises(ConfigError) as info:
        load_config(path)
    assert ":2:" in str(info.value)


def test_missing_file(tmp_path):
    with pytest.raises(ConfigError):
        load_config(tmp_path / "nope.json")


def test_round_trip_targets(tmp_path):
    raw = base()
    raw["targets"] = [{"name": "abs", "abs_power": 2}]
    path = tmp_path / "c.json"
    path.write_text(json.dumps(raw))
    cfg = load_config(path)
    assert cfg.targets[0].func(0.5) == pytest.approx(0.25)
