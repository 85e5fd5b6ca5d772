"""Disk samples, the four preimage sheets and the biholomorphic change of coordinates.

The second generator is ``w(z) = conj(z) + F(z, conj z) + g(z) + h(z)`` with
``F`` odd of order at least three, ``g`` an even homogeneous symbol and ``h`` a
smaller perturbation; alternatively a GeneratorSpec carries the squared generator
``v(z)`` directly.  ``G(w1, w2) = (w1, w2 + F(w1, w2))`` is inverted pointwise
by Newton iteration in the second coordinate.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.optimize import brentq

from .symbolic import (
    BiPoly,
    HomogeneousSymbol,
    MixedPoly,
    d_zeta2,
    eval_bipoly,
    is_odd,
)

SMALLNESS_CLASSES = ("o(g)", "o(z2g)")


class GeometryError(ValueError):
    pass


class InversionError(RuntimeError):
    """Newton inversion of ``G`` did not converge."""


@dataclass(frozen=True)
class GeneratorSpec:
    radius: float
    F: BiPoly = field(default_factory=BiPoly)
    g: HomogeneousSymbol | None = None
    h: MixedPoly | HomogeneousSymbol | None = None
    h_class: str = "o(g)"
    direct: MixedPoly | None = None

    def __post_init__(self):
        if not self.radius > 0:
            raise GeometryError(f"radius must be positive, got {self.radius!r}")
        if not self.F.is_zero():
            if not is_odd(self.F):
                raise GeometryError("F must be odd")
            if self.F.min_degree < 3:
                raise GeometryError("F must vanish to order >= 3 at the origin")
        if self.h_class not in SMALLNESS_CLASSES:
            raise GeometryError(f"h class must be one of {SMALLNESS_CLASSES}, got {self.h_class!r}")

    @property
    def has_w(self) -> bool:
        return self.direct is None

    def f(self, z):
        return eval_bipoly(self.F, z, np.conj(z))

    def g_value(self, z):
        if self.g is None:
            return np.zeros_like(np.asarray(z, dtype=complex)) if np.ndim(z) else 0j
        return self.g(z)

    def h_value(self, z):
        if self.h is None:
            return np.zeros_like(np.asarray(z, dtype=complex)) if np.ndim(z) else 0j
        return self.h(z)

    def w(self, z):
        if self.direct is not None:
            raise GeometryError("generator given only in squared form (direct v)")
        return np.conj(z) + self.f(z) + self.g_value(z) + self.h_value(z)

    def second_generator(self, z):
        """``w(z)**2``, or the direct generator ``v(z)``."""
        if self.direct is not None:
            return self.direct(z)
        return self.w(z) ** 2

    def separation_order(self) -> int:
        """Exponent ``kappa`` with ``|V(z) - V(-z)| ~ |z|**kappa``.

        For ``V = w**2`` the difference factors as ``(w(z) - w(-z)) (w(z) + w(-z))``;
        the first factor is ``~ 2 conj(z)`` and the second is twice the even part
        of ``w``.  For a direct ``v`` it is twice the odd part.
        """
        if self.direct is not None:
            return max(self.direct.odd_part().min_degree, 0)
        degs = []
        if self.g is not None and len(self.g):
            degs.append(self.g.degree)
        if isinstance(self.h, HomogeneousSymbol) and len(self.h) and self.h.degree % 2 == 0:
            degs.append(self.h.degree)
        elif isinstance(self.h, MixedPoly) and not self.h.even_part().is_zero():
            degs.append(self.h.even_part().min_degree)
        return 1 + (min(degs) if degs else 0)


def sample_disk(r: float, n_r: int, n_theta: int) -> np.ndarray:
    """Origin followed by ``(j / n_r) r e^{2 pi i k / n_theta}``, ``j = 1..n_r``, ``k = 0..n_theta-1``."""
    if n_r < 1 or n_theta < 1:
        raise ValueError("n_r and n_theta must be >= 1")
    radii = r * np.arange(1, n_r + 1) / n_r
    angles = np.exp(2j * np.pi * np.arange(n_theta) / n_theta)
    return np.concatenate([[0j], (radii[:, None] * angles[None, :]).ravel()])


def four_disks(spec: GeneratorSpec, points) -> tuple[np.ndarray, ...]:
    """Sheets ``D1..D4`` over ``points`` as ``(n, 2)`` complex arrays."""
    z = np.asarray(points, dtype=complex)
    w = spec.w(z)
    D1 = np.stack([z, w], axis=1)
    D2 = np.stack([-z, -w], axis=1)
    D3 = np.stack([-z, w], axis=1)
    D4 = np.stack([z, -w], axis=1)
    return D1, D2, D3, D4


def second_sheet(spec: GeneratorSpec, z):
    """``D2`` in the form ``(z, conj z + f(z) - g(z) - h(-z))``; equals ``(z, -w(-z))`` for odd f, even g."""
    z = np.asarray(z, dtype=complex)
    return np.conj(z) + spec.f(z) - spec.g_value(z) - spec.h_value(-z)


@dataclass
class SeparationReport:
    order: int
    min_normalized_gap: float
    violations: list[complex]
    tol: float

    @property
    def ok(self) -> bool:
        return not self.violations

    @property
    def message(self) -> str:
        if self.ok:
            return f"separation holds (min normalized gap {self.min_normalized_gap:.3e})"
        return f"separation numerically violated at z = {self.violations[0]!r}"


def separation_check(spec: GeneratorSpec, points, tol: float = 1e-8) -> SeparationReport:
    """Check ``V(z) != V(-z)`` off the origin, the gap normalized by ``|z|**kappa``."""
    z = np.asarray(points, dtype=complex)
    z = z[z != 0]
    kappa = spec.separation_order()
    gap = np.abs(spec.second_generator(z) - spec.second_generator(-z)) / np.abs(z) ** kappa
    bad = z[gap < tol]
    return SeparationReport(kappa, float(gap.min()) if len(gap) else math.inf, list(bad), tol)


def apply_G(F: BiPoly, w1, w2):
    return w1, w2 + eval_bipoly(F, w1, w2)


def inversion_radius(F: BiPoly) -> float:
    """Radius ``rho`` on which ``w -> z2 - F(z1, w)`` is a 1/2-contraction of ``|w| <= 2 rho``.

    Both bounds come from coefficient sums: on ``|z1| <= rho, |w| <= 2 rho``
    ``|dF/dw| <= sum k |c| rho**j (2 rho)**(k-1) <= 1/2`` and
    ``|F| <= sum |c| rho**j (2 rho)**k <= rho``, so for ``|z1|, |z2| <= rho`` the
    unique preimage lies in that ball.
    """
    if F.is_zero():
        return math.inf

    def excess(rho: float) -> float:
        lip = sum(k * abs(c) * rho ** j * (2 * rho) ** (k - 1) for (j, k), c in F if k > 0)
        size = sum(abs(c) * rho ** j * (2 * rho) ** k for (j, k), c in F) / rho
        return max(lip - 0.5, size - 1.0)

    hi = 1.0
    while excess(hi) < 0:
        hi *= 2.0
        if hi > 1e12:
            return math.inf
    lo = hi / 2.0
    while excess(lo) >= 0:
        lo /= 2.0
        if lo < 1e-300:
            return 0.0
    return brentq(excess, lo, hi, xtol=1e-15 * hi)


def invert_G(F: BiPoly, z1, z2, tol: float = 1e-14, max_iter: int = 50,
             full_output: bool = False):
    """Solve ``w + F(z1, w) = z2`` by Newton iteration seeded at ``w = z2``.

    Convergence means ``|w + F(z1, w) - z2| <= tol * (1 + |z2|)`` or a Newton
    step below rounding level.  Raises :class:`InversionError` otherwise.
    """
    scalar = np.ndim(z1) == 0 and np.ndim(z2) == 0
    z1a = np.atleast_1d(np.asarray(z1, dtype=complex))
    z2a = np.atleast_1d(np.asarray(z2, dtype=complex))
    z1a, z2a = np.broadcast_arrays(z1a, z2a)
    w = z2a.copy()
    if F.is_zero():
        return (w[0] if scalar else w, 0) if full_output else (w[0] if scalar else w)
    dF = d_zeta2(F)
    scale = 1.0 + np.abs(z2a)
    active = np.ones(w.shape, dtype=bool)
    iterations = 0
    for iterations in range(1, max_iter + 1):
        res = w[active] + eval_bipoly(F, z1a[active], w[active]) - z2a[active]
        done = np.abs(res) <= tol * scale[active]
        jac = 1.0 + eval_bipoly(dF, z1a[active], w[active])
        step = np.where(done, 0j, res / jac)
        w_act = w[active] - step
        small = np.abs(step) <= 4 * np.finfo(float).eps * np.maximum(np.abs(w_act), 1e-300)
        w[active] = w_act
        idx = np.flatnonzero(active)
        active[idx[done | small]] = False
        if not active.any():
            break
    if active.any() or not np.all(np.isfinite(w)):
        bad = np.flatnonzero(active | ~np.isfinite(w))[0]
        raise InversionError(
            f"point outside biholomorphy region: no convergence at ({z1a[bad]!r}, {z2a[bad]!r})")
    out = w[0] if scalar else w
    return (out, iterations) if full_output else out


@dataclass
class ResidualTable:
    radii: list[float]
    ratio1: list[float]
    ratio2: list[float]
    # ratios below this are indistinguishable from rounding in w - conj(z) - g
    noise_floor: list[float] = field(default_factory=list)

    def shrinking(self) -> bool:
        """Ratios non-increasing as the radius decreases, up to the rounding floor."""
        order = sorted(range(len(self.radii)), key=lambda i: -self.radii[i])
        for ratios in (self.ratio1, self.ratio2):
            seq = [(ratios[i], self.noise_floor[i] if self.noise_floor else 0.0) for i in order]
            for (a, _), (b, floor) in zip(seq, seq[1:]):
                if b > a and b > floor:
                    return False
        return True

    def rows(self):
        return list(zip(self.radii, self.ratio1, self.ratio2))


def residuals(spec: GeneratorSpec, z, newton_tol: float = 1e-14):
    """``(R1, R2)`` at ``z``: second coordinates of ``H(D1)``, ``H(D2)`` minus ``conj z +- g(z)``."""
    z = np.asarray(z, dtype=complex)
    gz = spec.g_value(z)
    e1 = invert_G(spec.F, z, spec.w(z), tol=newton_tol)
    e2 = invert_G(spec.F, z, -spec.w(-z), tol=newton_tol)
    return e1 - np.conj(z) - gz, e2 - np.conj(z) + gz


def residual_trace(spec: GeneratorSpec, radii, n_theta: int = 256,
                   newton_tol: float = 1e-14) -> ResidualTable:
    """Per radius, ``max |R1| / |g|`` and ``max |R2| / |g|`` over a circle of samples."""
    if spec.g is None or not len(spec.g):
        raise GeometryError("residual trace needs a nonzero symbol g")
    thetas = 2 * np.pi * np.arange(n_theta) / n_theta
    r1s, r2s, floors = [], [], []
    eps = np.finfo(float).eps
    for r in radii:
        z = r * np.exp(1j * thetas)
        gz = np.abs(spec.g_value(z))
        if np.any(gz == 0):
            raise GeometryError(f"g vanishes on the circle of radius {r}")
        R1, R2 = residuals(spec, z, newton_tol)
        r1s.append(float(np.max(np.abs(R1) / gz)))
        r2s.append(float(np.max(np.abs(R2) / gz)))
        floors.append(float(64 * eps * np.max((np.abs(z) + np.abs(spec.w(z))) / gz)))
    return ResidualTable(list(radii), r1s, r2s, floors)


def transformed_sheets(spec: GeneratorSpec, points, newton_tol: float = 1e-14):
    """``E1 = H(D1)`` and ``E2 = H(D2)`` over ``points`` as ``(n, 2)`` arrays."""
    z = np.asarray(points, dtype=complex)
    e1 = invert_G(spec.F, z, spec.w(z), tol=newton_tol)
    e2 = invert_G(spec.F, z, -spec.w(-z), tol=newton_tol)
    return np.stack([z, e1], axis=1), np.stack([z, e2], axis=1)


@dataclass
class KallinReport:
    min_set1: float
    max_set2: float
    violations: list[tuple[str, complex, complex, float]]
    zeros: list[tuple[complex, complex]]

    @property
    def ok(self) -> bool:
        return not self.violations and not self.zeros


def kallin_probe(p: BiPoly, set1, set2, phi: float = 0.0, tol: float = 0.0,
                 order: int | None = None, zero_tol: float = 0.0,
                 origin_tol: float = 0.0) -> KallinReport:
    """Sign probe for a Kallin separation by ``p``.

    Checks ``Im(e^{-i phi} p) > tol * |zeta|**order`` on ``set1`` and
    ``< -tol * |zeta|**order`` on ``set2``, i.e. that ``p`` maps the two sets
    into opposite open half-planes bounded by the line through 0 in the
    direction ``e^{i phi}``.  Origin points are skipped for the signs; any
    other point with ``|p| <= zero_tol * |zeta|**order`` is reported as a
    spurious zero.
    """
    rot = np.exp(-1j * phi)
    violations = []
    zeros = []
    extremes = []
    for name, pts, sign in (("set1", set1, 1.0), ("set2", set2, -1.0)):
        pts = np.asarray(pts, dtype=complex).reshape(-1, 2)
        norm = np.max(np.abs(pts), axis=1)
        keep = norm > origin_tol
        pts, norm = pts[keep], norm[keep]
        scale = norm ** order if order is not None else np.ones_like(norm)
        val = eval_bipoly(p, pts[:, 0], pts[:, 1])
        s = sign * np.imag(rot * val)
        extremes.append(float(s.min()) * sign if len(s) else math.nan)
        for i in np.flatnonzero(s <= tol * scale):
            violations.append((name, complex(pts[i, 0]), complex(pts[i, 1]), float(s[i] * sign)))
        for i in np.flatnonzero(np.abs(val) <= zero_tol * scale):
            zeros.append((complex(pts[i, 0]), complex(pts[i, 1])))
    return KallinReport(extremes[0], extremes[1], violations, zeros)


def transform_generators(w: Callable, F: BiPoly) -> Callable:
    """The squared generator ``z -> (w(z) + F(z, w(z)))**2``."""
    if not F.is_zero() and (not is_odd(F) or F.min_degree < 3):
        raise GeometryError("F must be odd and vanish to order >= 3")

    def transformed(z):
        wz = w(z)
        return (wz + eval_bipoly(F, z, wz)) ** 2

    return transformed


def rewrite_even_perturbation(G: BiPoly) -> BiPoly:
    """``H = 2 G + G**2``, so ``(w + w G(z^2, w^2))**2 = w^2 (1 + H(z^2, w^2))``."""
    if G.coefficient(0, 0) != 0:
        raise GeometryError("G(0, 0) must vanish")
    return 2 * G + G * G


def smallness_ratios(spec: GeneratorSpec, radii, n_theta: int = 256) -> list[float]:
    """``max |h| / |g|`` (or ``/ |z^2 g|``) on circles of the given radii."""
    if spec.h is None or spec.g is None:
        return [0.0 for _ in radii]
    thetas = 2 * np.pi * np.arange(n_theta) / n_theta
    out = []
    for r in radii:
        z = r * np.exp(1j * thetas)
        denom = np.abs(spec.g_value(z))
        if spec.h_class == "o(z2g)":
            denom = denom * np.abs(z) ** 2
        out.append(float(np.max(np.abs(spec.h_value(z)) / denom)))
    return out


def check_smallness(spec: GeneratorSpec, radii=None, n_theta: int = 256) -> bool:
    """The declared smallness class is plausible if the ratio decreases as the radius shrinks."""
    if spec.h is None:
        return True
    if radii is None:
        radii = [spec.radius, spec.radius / 2, spec.radius / 4]
    ratios = smallness_ratios(spec, sorted(radii, reverse=True), n_theta)
    return all(b < a for a, b in zip(ratios, ratios[1:])) or all(r == 0 for r in ratios)
