"""Singular complexity: pairwise sinc^2 sums over singular-value differences.

Sums run over *ordered* pairs (i, j) with sigma_i != sigma_j, so each unordered
pair is counted twice.  This is the convention fixed by the early-time law
C(t) ~ (1 - 1/L) t^2.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateSpectrumError, InvalidArgumentError, ResolutionError
from .form_factor import TimeGrid, per_realization_ff

PAIR_TOL = 1e-12


@dataclass
class ComplexityCurve:
    grid: TimeGrid
    values: np.ndarray
    beta: float
    n_realizations: int
    metadata: dict = field(default_factory=dict)

    @property
    def t(self) -> np.ndarray:
        return self.grid.points


def _levels(s) -> np.ndarray:
    return np.asarray(getattr(s, "values", s), dtype=float)


def _pairs(levels: np.ndarray, beta: float, pair_tol: float):
    """Differences and Boltzmann weights of ordered non-degenerate pairs (i < j half only)."""
    iu, ju = np.triu_indices(len(levels), k=1)
    diff = levels[ju] - levels[iu]
    scale = np.max(np.abs(levels), initial=0.0)
    keep = np.abs(diff) > pair_tol * scale
    weight = np.exp(-beta * (levels[iu] + levels[ju]))[keep] if beta else np.ones(int(keep.sum()))
    return diff[keep], weight


def _prefactor(levels: np.ndarray, beta: float) -> float:
    # 1 / (Z_2sigma(beta) L) with Z_2sigma(beta) = sum_n exp(-2 beta sigma_n); equals 1/L^2 at beta = 0
    return 1.0 / (np.sum(np.exp(-2.0 * beta * levels)) * len(levels))


def complexity_single(levels, t, beta: float = 0.0, pair_tol: float = PAIR_TOL, chunk: int = 32) -> np.ndarray:
    levels = _levels(levels)
    t = np.asarray(t, dtype=float)
    diff, weight = _pairs(levels, beta, pair_tol)
    half = 0.5 * diff
    out = np.empty(len(t))
    for start in range(0, len(t), chunk):
        tt = t[start:start + chunk, None]
        term = (np.sin(tt * half) / half) ** 2
        out[start:start + chunk] = 2.0 * (term @ weight)
    return out * _prefactor(levels, beta)


def singular_complexity(spectra, grid: TimeGrid, beta: float = 0.0, pair_tol: float = PAIR_TOL,
                        metadata=None) -> ComplexityCurve:
    if beta < 0:
        raise InvalidArgumentError("beta must be >= 0")
    spectra = list(spectra)
    if not spectra:
        raise InvalidArgumentError("empty ensemble")
    rows = np.array([complexity_single(s, grid.points, beta, pair_tol) for s in spectra])
    values = np.array([math.fsum(col) for col in rows.T]) / len(spectra)
    return ComplexityCurve(grid, values, float(beta), len(spectra), dict(metadata or {}))


def complexity_plateau(spectrum, pair_tol: float = PAIR_TOL) -> float:
    """Long-time average (2 / L^2) sum_{i != j} 1 / (sigma_i - sigma_j)^2 over ordered pairs."""
    levels = _levels(spectrum)
    diff, _ = _pairs(levels, 0.0, pair_tol)
    if len(diff) == 0:
        raise DegenerateSpectrumError("need at least two distinct singular values")
    return 2.0 * 2.0 * math.fsum(1.0 / diff**2) / len(levels) ** 2


def ensemble_plateau(spectra, pair_tol: float = PAIR_TOL) -> float:
    """Mean plateau over realizations; fully degenerate ones (e.g. H = 0 at tiny p) are skipped."""
    vals = []
    for s in spectra:
        try:
            vals.append(complexity_plateau(s, pair_tol))
        except DegenerateSpectrumError:
            continue
    if not vals:
        raise DegenerateSpectrumError("every realization in the ensemble is degenerate")
    return math.fsum(vals) / len(vals)


def second_derivative(levels, t, h: float, beta: float = 0.0, pair_tol: float = PAIR_TOL) -> np.ndarray:
    """Central difference (C(t+h) - 2C(t) + C(t-h)) / h^2."""
    c0 = complexity_single(levels, t, beta, pair_tol)
    cp = complexity_single(levels, t + h, beta, pair_tol)
    cm = complexity_single(levels, t - h, beta, pair_tol)
    return (cp - 2.0 * c0 + cm) / h**2


def verify_derivative_identity(spectrum, grid: TimeGrid, pair_tol: float = PAIR_TOL,
                               convergence_tol: float = 1e-2) -> float:
    """Max residual of d^2C/dt^2 = 2 sigmaFF(t) - 2/L at beta = 0 over interior grid points.

    The step is the grid spacing; two Richardson-combined step halvings give the
    derivative.  The residual is relative to max |2 sigmaFF - 2/L| on the grid.
    If the Richardson correction itself is larger than ``convergence_tol`` of
    that scale the step is too coarse and ResolutionError is raised.
    """
    levels = _levels(spectrum)
    t = grid.points
    h = float(np.min(np.diff(t)))
    interior = t[1:-1]
    d1 = second_derivative(levels, interior, h, 0.0, pair_tol)
    d2 = second_derivative(levels, interior, h / 2, 0.0, pair_tol)
    d4 = second_derivative(levels, interior, h / 4, 0.0, pair_tol)
    # error ~ h^2: combine (h, h/2) and (h/2, h/4), then once more for h^4 terms
    r1 = (4.0 * d2 - d1) / 3.0
    r2 = (4.0 * d4 - d2) / 3.0
    richardson = (16.0 * r2 - r1) / 15.0

    L = len(levels)
    target = 2.0 * per_realization_ff(levels, interior, 0.0) - 2.0 / L
    scale = max(np.max(np.abs(target)), np.finfo(float).tiny)
    if np.max(np.abs(d2 - richardson)) > convergence_tol * scale:
        raise ResolutionError(f"step {h:g} too coarse: finite differences have not converged")
    return float(np.max(np.abs(richardson - target)) / scale)
