"""Least-squares fits by polynomials in the two generators ``z**2`` and ``v(z)``.

A degree budget ``N`` admits the monomials ``(z**2)**j * v**k`` with
``j + k <= N``, ordered by ``j + k`` and then by decreasing ``j``.  Columns are
scaled to unit max-magnitude on the training points before the Hermitian
normal system is formed and Cholesky-factorised.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Mapping, Sequence

import numpy as np
from scipy.linalg import LinAlgError, cho_factor, cho_solve

from .geometry import sample_disk

log = logging.getLogger(__name__)

DEFAULT_RIDGE = 1e-12
TRAIN_GRID = (12, 48)


class RankDeficientError(np.linalg.LinAlgError):
    pass


def exponents(N: int) -> list[tuple[int, int]]:
    if N < 0:
        raise ValueError("degree budget must be >= 0")
    return [(j, t - j) for t in range(N + 1) for j in range(t, -1, -1)]


@dataclass(frozen=True)
class Basis:
    N: int
    second: Callable
    points: np.ndarray
    exps: list[tuple[int, int]]
    scales: np.ndarray
    columns: np.ndarray

    def design(self, points) -> np.ndarray:
        """Scaled basis columns evaluated at new points."""
        return _raw_columns(self.second, np.asarray(points, dtype=complex), self.exps) / self.scales


def _raw_columns(second: Callable, z: np.ndarray, exps) -> np.ndarray:
    z2 = z ** 2
    v = np.asarray(second(z), dtype=complex)
    return np.stack([z2 ** j * v ** k for j, k in exps], axis=1)


def build_basis(second: Callable, points, N: int, equilibrate: bool = True) -> Basis:
    z = np.asarray(points, dtype=complex)
    exps = exponents(N)
    raw = _raw_columns(second, z, exps)
    if equilibrate:
        scales = np.max(np.abs(raw), axis=0)
        scales[scales == 0] = 1.0
    else:
        scales = np.ones(raw.shape[1])
    return Basis(N, second, z, exps, scales, raw / scales)


@dataclass
class FitReport:
    degree: int
    train_l2: float
    train_sup: float
    validation_sup: float | None
    condition: float
    coefficients: np.ndarray
    basis: Basis = field(repr=False)
    target: Callable = field(repr=False)
    warning: str | None = None

    def predict(self, points) -> np.ndarray:
        return self.basis.design(points) @ self.coefficients


def _solve(A: np.ndarray, b: np.ndarray, ridge: float, weights=None) -> tuple[np.ndarray, float]:
    if weights is not None:
        sw = np.sqrt(weights)
        A = A * sw[:, None]
        b = b * sw
    normal = A.conj().T @ A
    normal = normal + ridge * np.eye(normal.shape[0])
    try:
        factor = cho_factor(normal, lower=True, check_finite=True)
    except LinAlgError as exc:
        raise RankDeficientError(
            "basis numerically rank-deficient; increase ridge or reduce N") from exc
    diag = np.abs(np.diag(factor[0])) ** 2
    cond = float(diag.max() / diag.min()) if diag.min() > 0 else math.inf
    return cho_solve(factor, A.conj().T @ b), cond


def least_squares_fit(basis: Basis, target: Callable, ridge: float = DEFAULT_RIDGE,
                      validation=None) -> FitReport:
    """Minimise ``sum |residual|**2 + ridge * sum |coef|**2`` on the training points."""
    A = basis.columns
    if A.shape[0] < A.shape[1]:
        raise ValueError(f"{A.shape[0]} training points for {A.shape[1]} columns")
    b = np.asarray(target(basis.points), dtype=complex)
    coef, cond = _solve(A, b, ridge)
    res = b - A @ coef
    fit = FitReport(basis.N, float(np.linalg.norm(res)), float(np.max(np.abs(res))),
                    None, cond, coef, basis, target)
    if validation is not None:
        fit.validation_sup = sup_residual(fit, validation)
    return fit


def sup_residual(fit: FitReport, points) -> float:
    z = np.asarray(points, dtype=complex)
    return float(np.max(np.abs(fit.target(z) - fit.predict(z))))


def lawson_refine(basis: Basis, target: Callable, iters: int = 10,
                  ridge: float = DEFAULT_RIDGE, validation=None) -> FitReport:
    """Iteratively reweighted least squares towards the discrete minimax fit.

    Weights start uniform (so one iteration is the plain fit) and are multiplied
    by the previous absolute residuals, then renormalised.  The fit with the
    smallest training sup residual is returned.
    """
    if iters < 1:
        raise ValueError("iters must be >= 1")
    A = basis.columns
    b = np.asarray(target(basis.points), dtype=complex)
    n = len(b)
    weights = np.full(n, 1.0 / n)
    best = None
    warning = None
    for it in range(iters):
        coef, cond = _solve(A, b, ridge, weights)
        res = b - A @ coef
        sup = float(np.max(np.abs(res)))
        if best is None or sup < best.train_sup:
            best = FitReport(basis.N, float(np.linalg.norm(res)), sup, None, cond, coef,
                             basis, target)
        weights = weights * np.abs(res)
        total = weights.sum()
        if not np.isfinite(total) or total <= 1e-300 * n:
            warning = f"weight collapse after {it + 1} iterations"
            log.warning(warning)
            break
        weights = weights / total
    best.warning = warning
    if validation is not None:
        best.validation_sup = sup_residual(best, validation)
    return best


@dataclass
class StudyResult:
    rows: list[tuple[str, int, float]]
    monotone: dict[str, bool]

    def table(self) -> dict[str, list[float]]:
        out: dict[str, list[float]] = {}
        for name, _N, sup in self.rows:
            out.setdefault(name, []).append(sup)
        return out


def grids(radius: float, n_r: int = TRAIN_GRID[0], n_theta: int = TRAIN_GRID[1]):
    """Training grid and a validation grid of twice the radial and angular density."""
    train = sample_disk(radius, n_r, n_theta)
    valid = sample_disk(radius, 2 * n_r, 2 * n_theta)
    return train, valid


def convergence_study(second: Callable, radius: float, targets: Mapping[str, Callable],
                      degrees: Sequence[int], n_r: int = TRAIN_GRID[0],
                      n_theta: int = TRAIN_GRID[1], ridge: float = DEFAULT_RIDGE,
                      lawson_iters: int = 0, slack: float = 1e-12) -> StudyResult:
    """Validation sup residual of each target for each degree budget."""
    degrees = list(degrees)
    if any(b <= a for a, b in zip(degrees, degrees[1:])):
        raise ValueError("degrees must be strictly increasing")
    train, valid = grids(radius, n_r, n_theta)
    rows = []
    for name, target in targets.items():
        for N in degrees:
            basis = build_basis(second, train, N)
            if lawson_iters:
                fit = lawson_refine(basis, target, lawson_iters, ridge, valid)
            else:
                fit = least_squares_fit(basis, target, ridge, valid)
            rows.append((name, N, fit.validation_sup))
    result = StudyResult(rows, {})
    for name, sups in result.table().items():
        result.monotone[name] = all(b <= a + slack for a, b in zip(sups, sups[1:]))
    return result
