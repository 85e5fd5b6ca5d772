import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from diskapprox.geometry import (
    GeneratorSpec,
    GeometryError,
    InversionError,
    apply_G,
    check_smallness,
    four_disks,
    invert_G,
    inversion_radius,
    kallin_probe,
    residual_trace,
    residuals,
    rewrite_even_perturbation,
    sample_disk,
    second_sheet,
    separation_check,
    smallness_ratios,
    transform_generators,
    transformed_sheets,
)
from diskapprox.symbolic import BiPoly, HomogeneousSymbol, MixedPoly, eval_bipoly

Z1 = BiPoly.monomial(1, 0)
Z2 = BiPoly.monomial(0, 1)
I_ABS2 = HomogeneousSymbol(2, {1: 1j})


def random_ball(rng, n, r):
    z1 = rng.normal(size=n) + 1j * rng.normal(size=n)
    z2 = rng.normal(size=n) + 1j * rng.normal(size=n)
    norm = np.sqrt(np.abs(z1) ** 2 + np.abs(z2) ** 2)
    scale = r * rng.uniform(size=n) / norm
    return z1 * scale, z2 * scale


class TestSpec:
    def test_validation(self):
        with pytest.raises(GeometryError):
            GeneratorSpec(0.0)
        with pytest.raises(GeometryError):
            GeneratorSpec(0.1, F=Z1 ** 2 * Z2 ** 2)
        with pytest.raises(GeometryError):
            GeneratorSpec(0.1, F=Z1)
        with pytest.raises(GeometryError):
            GeneratorSpec(0.1, h_class="o(1)")

    def test_w(self):
        spec = GeneratorSpec(0.1, F=Z1 ** 3, g=I_ABS2)
        z = 0.03 - 0.02j
        assert abs(spec.w(z) - (z.conjugate() + z ** 3 + 1j * abs(z) ** 2)) < 1e-16
        assert abs(spec.second_generator(z) - spec.w(z) ** 2) < 1e-16

    def test_direct(self):
        spec = GeneratorSpec(0.1, direct=MixedPoly({(0, 2): 1, (3, 0): 1}))
        assert not spec.has_w
        with pytest.raises(GeometryError):
            spec.w(0.1)
        assert spec.separation_order() == 3


def test_sample_disk():
    pts = sample_disk(0.1, 12, 48)
    assert pts.shape == (1 + 12 * 48,)
    assert pts[0] == 0
    assert np.max(np.abs(pts)) == pytest.approx(0.1)
    assert np.array_equal(pts, sample_disk(0.1, 12, 48))


class TestNewton:
    def test_round_trip(self, rng):
        F = 0.3 * Z1 ** 2 * Z2 + 0.4 * Z2 ** 3 + 0.3j * Z1 * Z2 ** 4
        assert inversion_radius(F) > 0.05
        w1, w2 = random_ball(rng, 1000, 0.05)
        z1, z2 = apply_G(F, w1, w2)
        back = invert_G(F, z1, z2)
        assert np.max(np.abs(back - w2)) <= 1e-10

    @given(st.floats(0, 2 * np.pi), st.floats(0, 0.05), st.floats(0, 2 * np.pi), st.floats(0, 0.05))
    def test_round_trip_property(self, a, r1, b, r2):
        F = Z1 ** 2 * Z2 + Z2 ** 3
        w1, w2 = r1 * np.exp(1j * a), r2 * np.exp(1j * b)
        z1, z2 = apply_G(F, w1, w2)
        assert abs(invert_G(F, z1, z2) - w2) <= 1e-10

    def test_fast_convergence(self):
        _, its = invert_G(Z2 ** 3, 0.0, 0.05, full_output=True)
        assert its <= 5

    def test_zero_F(self):
        assert invert_G(BiPoly(), 0.1, 0.2) == 0.2
        assert inversion_radius(BiPoly()) == math.inf

    def test_failure(self):
        with pytest.raises(InversionError):
            invert_G(Z2 ** 3, 0.0, 10.0 + 10j, max_iter=3)

    def test_radius_bounds(self):
        F = Z2 ** 3
        rho = inversion_radius(F)
        # 3 (2 rho)^2 = 1/2 is the binding constraint
        assert rho == pytest.approx(math.sqrt(1 / 24), rel=1e-12)


class TestSheets:
    @given(st.floats(0, 2 * np.pi), st.floats(0.001, 0.1))
    def test_second_sheet_identity(self, theta, r):
        spec = GeneratorSpec(0.1, F=Z1 ** 2 * Z2 + 0.5j * Z2 ** 3, g=HomogeneousSymbol(4, {1: 1, 3: 0.5j}),
                             h=MixedPoly({(2, 1): 0.3, (1, 2): 0.2j}))
        z = r * np.exp(1j * theta)
        D1, D2, D3, D4 = four_disks(spec, np.array([z]))
        assert abs(second_sheet(spec, -z) - D2[0, 1]) <= 1e-13
        # D4 = (z, -w(z)) is the point reflection of D3 = (-z, w(z))
        assert np.array_equal(D4[0], -D3[0])
        assert np.array_equal(D2[0], -D1[0])

    def test_exact_inverse(self):
        spec = GeneratorSpec(0.1, F=Z1 ** 3, g=I_ABS2)
        z = sample_disk(0.1, 8, 64)[1:]
        R1, R2 = residuals(spec, z)
        assert np.max(np.abs(R1)) <= 1e-13
        assert np.max(np.abs(R2)) <= 1e-13

    def test_residual_decay(self):
        spec = GeneratorSpec(0.1, F=Z1 ** 2 * Z2 + Z2 ** 3, g=I_ABS2)
        table = residual_trace(spec, [0.1, 0.05, 0.025])
        for a, b in zip(table.ratio1, table.ratio1[1:]):
            assert b <= 0.6 * a
        assert table.shrinking()

    def test_residual_needs_g(self):
        with pytest.raises(GeometryError):
            residual_trace(GeneratorSpec(0.1, F=Z2 ** 3), [0.1])


class TestSeparation:
    def test_conj_z_fails(self):
        spec = GeneratorSpec(0.1)
        rep = separation_check(spec, sample_disk(0.1, 4, 16))
        assert not rep.ok

    def test_positive_cases(self):
        pts = sample_disk(0.1, 6, 24)
        assert separation_check(GeneratorSpec(0.1, g=I_ABS2), pts).ok
        direct = GeneratorSpec(0.1, direct=MixedPoly({(0, 2): 1, (3, 0): 1}))
        rep = separation_check(direct, pts)
        assert rep.ok and rep.order == 3

    def test_radius_independent(self):
        spec = GeneratorSpec(0.1, g=I_ABS2)
        a = separation_check(spec, sample_disk(0.1, 4, 16)).min_normalized_gap
        b = separation_check(spec, sample_disk(0.001, 4, 16)).min_normalized_gap
        assert b == pytest.approx(a, rel=1e-2)


class TestKallin:
    def setup_method(self):
        self.spec = GeneratorSpec(0.05, g=I_ABS2)
        self.pts = sample_disk(0.05, 12, 48)

    def test_product_probe(self):
        D1, D2, D3, D4 = four_disks(self.spec, self.pts)
        rep = kallin_probe(Z1 * Z2, np.vstack([D1, D2]), np.vstack([D3, D4]), phi=-math.pi / 2,
                           order=2)
        assert rep.ok
        assert rep.min_set1 > 0 > rep.max_set2

    def test_certificate_probe(self):
        E1, E2 = transformed_sheets(self.spec, self.pts)
        rep = kallin_probe(Z1 + Z2, E1, E2)
        assert rep.ok

    def test_wrong_direction(self):
        D1, D2, D3, D4 = four_disks(self.spec, self.pts)
        rep = kallin_probe(Z1 * Z2, np.vstack([D1, D2]), np.vstack([D3, D4]), phi=0.0)
        assert not rep.ok

    def test_spurious_zero(self):
        rep = kallin_probe(Z1, np.array([[0.0, 0.1]]), np.array([[0.1j, 0.0]]), zero_tol=1e-12)
        assert rep.zeros


class TestTransforms:
    def test_transform_generators(self):
        w = lambda z: np.conj(z) + 1j * np.abs(z) ** 2
        V = transform_generators(w, Z2 ** 3)
        z = 0.04 + 0.01j
        assert abs(V(z) - (w(z) + w(z) ** 3) ** 2) < 1e-16
        with pytest.raises(GeometryError):
            transform_generators(w, Z2 ** 2)

    def test_rewrite(self):
        assert rewrite_even_perturbation(BiPoly()) == BiPoly()
        assert rewrite_even_perturbation(Z1) == 2 * Z1 + Z1 * Z1
        G = Z1 + Z2
        H = rewrite_even_perturbation(G)
        assert H == 2 * Z1 + 2 * Z2 + (Z1 + Z2) ** 2
        with pytest.raises(GeometryError):
            rewrite_even_perturbation(G + BiPoly({(0, 0): 1}))

    def test_rewrite_pointwise(self, rng):
        G = 0.5 * Z1 + 0.2j * Z2 ** 2
        H = rewrite_even_perturbation(G)
        for _ in range(100):
            z, w = 0.1 * (rng.normal(size=2) @ [1, 1j]), 0.1 * (rng.normal(size=2) @ [1, 1j])
            lhs = (w + w * eval_bipoly(G, z * z, w * w)) ** 2
            rhs = w * w * (1 + eval_bipoly(H, z * z, w * w))
            assert abs(lhs - rhs) <= 1e-15


class TestSmallness:
    def test_declared_class(self):
        spec = GeneratorSpec(0.1, g=I_ABS2, h=MixedPoly({(2, 1): 1}))
        assert check_smallness(spec)
        tight = GeneratorSpec(0.1, g=I_ABS2, h=MixedPoly({(2, 1): 1}), h_class="o(z2g)")
        assert not check_smallness(tight)
        r = smallness_ratios(spec, [0.1, 0.05])
        assert r[1] == pytest.approx(r[0] / 2)
