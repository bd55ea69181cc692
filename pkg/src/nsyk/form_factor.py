"""Singular form factor, ramp fitting and Thouless-time extraction."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from math import comb

import numpy as np
from scipy.optimize import least_squares

from .errors import (FitFailureError, InsufficientDataError, InvalidArgumentError,
                     NoRampError, NoThoulessTimeError)

ALPHA_REFERENCE = 3.27  # filter width used at N = 26
ALPHA_REFERENCE_N = 26
SMOOTH_WINDOW = 7


@dataclass(frozen=True)
class TimeGrid:
    points: np.ndarray
    spacing: str = "log"

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        if pts.ndim != 1 or len(pts) < 2:
            raise InvalidArgumentError("time grid needs at least two points")
        if np.any(np.diff(pts) <= 0):
            raise InvalidArgumentError("time grid must be strictly increasing")
        if pts[0] < 0:
            raise InvalidArgumentError("time grid must be non-negative")
        object.__setattr__(self, "points", pts)

    @property
    def t_min(self) -> float:
        return float(self.points[0])

    @property
    def t_max(self) -> float:
        return float(self.points[-1])

    @property
    def count(self) -> int:
        return len(self.points)

    def __len__(self):
        return len(self.points)


def log_grid(t_min: float = 1e-2, t_max: float = 1e6, count: int = 400) -> TimeGrid:
    if count < 50:
        raise InvalidArgumentError("log grids need at least 50 points")
    if not 0 < t_min < t_max:
        raise InvalidArgumentError("need 0 < t_min < t_max")
    return TimeGrid(np.geomspace(t_min, t_max, count), "log")


def linear_grid(t_min: float, t_max: float, count: int) -> TimeGrid:
    return TimeGrid(np.linspace(t_min, t_max, count), "linear")


def mean_square_singular_value(N: int) -> float:
    """Ensemble mean of sigma^2 for the model normalization: 3 C(N,4) / (4 N^3), independent of p."""
    return 0.75 * comb(N, 4) / N**3


def default_alpha(N: int) -> float:
    """Filter width 3.27 at N = 26, scaled as 1 / <sigma^2> to other N."""
    return ALPHA_REFERENCE * mean_square_singular_value(ALPHA_REFERENCE_N) / mean_square_singular_value(N)


@dataclass
class FormFactorCurve:
    grid: TimeGrid
    values: np.ndarray
    alpha: float
    n_realizations: int
    metadata: dict = field(default_factory=dict)

    @property
    def t(self) -> np.ndarray:
        return self.grid.points


def _levels(s) -> np.ndarray:
    return np.asarray(getattr(s, "values", s), dtype=float)


def filtered_partition(levels: np.ndarray, t: np.ndarray, alpha: float, chunk: int = 64) -> np.ndarray:
    """Y(alpha, t) = sum_n exp(-alpha s_n^2) exp(-i s_n t) at every t."""
    w = np.exp(-alpha * levels**2)
    out = np.empty(len(t), dtype=complex)
    for start in range(0, len(t), chunk):
        tt = t[start:start + chunk]
        out[start:start + chunk] = np.exp(-1j * np.outer(tt, levels)) @ w
    return out


def per_realization_ff(levels, t, alpha: float) -> np.ndarray:
    levels = _levels(levels)
    y = filtered_partition(levels, t, alpha)
    norm = np.sum(np.exp(-alpha * levels**2))
    return np.abs(y) ** 2 / norm**2


def sigma_ff(spectra, grid: TimeGrid, alpha: float = 0.0, metadata=None) -> FormFactorCurve:
    """Ensemble average of |Y(alpha, t)|^2 / |Y(alpha, 0)|^2.

    alpha = 0 gives the unfiltered (1/L^2) <|sum_n exp(-i s_n t)|^2>.  Levels may
    be signed (eigenvalues), which gives the ordinary spectral form factor.
    """
    spectra = [_levels(s) for s in spectra]
    if not spectra:
        raise InvalidArgumentError("empty ensemble")
    if alpha < 0:
        raise InvalidArgumentError("alpha must be >= 0")
    dims = {len(s) for s in spectra}
    if len(dims) != 1:
        raise InvalidArgumentError(f"spectra have different dimensions {sorted(dims)}")
    rows = np.array([per_realization_ff(s, grid.points, alpha) for s in spectra])
    values = np.array([math.fsum(col) for col in rows.T]) / len(spectra)
    return FormFactorCurve(grid, values, float(alpha), len(spectra), dict(metadata or {}))


def smooth_geometric(values: np.ndarray, window: int = SMOOTH_WINDOW) -> np.ndarray:
    """Moving geometric mean; the window shrinks at the ends."""
    logs = np.log(np.maximum(values, np.finfo(float).tiny))
    half = window // 2
    csum = np.concatenate([[0.0], np.cumsum(logs)])
    idx = np.arange(len(values))
    lo = np.maximum(idx - half, 0)
    hi = np.minimum(idx + half + 1, len(values))
    return np.exp((csum[hi] - csum[lo]) / (hi - lo))


@dataclass
class RampFit:
    slope: float
    t_lo: float
    t_hi: float
    t_dip: float
    t_plateau: float
    plateau: float

    def __call__(self, t):
        return self.slope * np.asarray(t)

    @property
    def decades(self) -> float:
        return math.log10(self.t_hi / self.t_lo)


def fit_ramp(curve: FormFactorCurve, min_depth: float = 3.0, plateau_fraction: float = 0.9,
             tail_fraction: float = 0.1, min_points: int = 5) -> RampFit:
    """Through-origin linear fit of the ramp on [3 t_dip, t_plateau / 3].

    The dip is the minimum of the smoothed curve, the plateau level is the mean
    of the last ``tail_fraction`` of the grid, and t_plateau is the first time
    after the dip where the smoothed curve reaches ``plateau_fraction`` of that
    level.  A dip shallower than plateau / ``min_depth`` or a window with fewer
    than ``min_points`` grid points means there is no ramp.
    """
    t = curve.t
    v = np.asarray(curve.values)
    sm = smooth_geometric(v)
    n_tail = max(1, int(round(tail_fraction * len(v))))
    plateau = float(np.mean(v[-n_tail:]))
    i_dip = int(np.argmin(sm[:len(v) - n_tail]))
    if sm[i_dip] * min_depth > plateau:
        raise NoRampError(f"dip {sm[i_dip]:.3g} is not below plateau {plateau:.3g} / {min_depth}")
    reached = np.flatnonzero(sm[i_dip:] >= plateau_fraction * plateau)
    if len(reached) == 0:
        raise NoRampError("curve never reaches its plateau")
    t_dip = t[i_dip]
    t_plat = t[i_dip + reached[0]]
    lo, hi = 3.0 * t_dip, t_plat / 3.0
    window = (t >= lo) & (t <= hi)
    if window.sum() < min_points:
        raise NoRampError(f"ramp window [{lo:.3g}, {hi:.3g}] is too narrow")
    tw, vw = t[window], v[window]
    slope = float(np.dot(tw, vw) / np.dot(tw, tw))
    return RampFit(slope, float(tw[0]), float(tw[-1]), float(t_dip), float(t_plat), plateau)


def fractional_error(curve: FormFactorCurve, ramp: RampFit) -> np.ndarray:
    r = ramp(curve.t)
    return np.abs(curve.values - r) / r


def thouless_time(curve: FormFactorCurve, ramp: RampFit, threshold: float = 0.20, hold: int = 5) -> float:
    """Earliest post-dip grid time where the fractional error to the ramp is <= threshold
    and stays so for the next ``hold`` grid points."""
    eps = fractional_error(curve, ramp)
    i_dip = int(np.argmin(smooth_geometric(np.asarray(curve.values))))
    ok = eps <= threshold
    for i in range(i_dip + 1, len(eps) - hold):
        if ok[i:i + hold + 1].all():
            return float(curve.t[i])
    raise NoThoulessTimeError(f"fractional error never settles below {threshold}")


@dataclass
class ThoulessFit:
    t_th_per_p: list
    a: float
    b: float
    c: float
    threshold: float = 0.20
    residual_rms: float = 0.0

    def __call__(self, p):
        return self.a / np.asarray(p, dtype=float) ** self.b + self.c


def fit_thouless_scaling(points, threshold: float = 0.20) -> ThoulessFit:
    """Fit t_Th = a / p^b + c by least squares on log residuals (a, b > 0, c >= 0)."""
    pts = sorted((float(p), float(t)) for p, t in points)
    if len(pts) < 4:
        raise InsufficientDataError("need at least 4 (p, t_Th) points")
    p = np.array([x[0] for x in pts])
    t = np.array([x[1] for x in pts])
    if p.max() / p.min() < 10 * (1 - 1e-9):
        raise InsufficientDataError("p values must span at least one decade")
    if np.any(t <= 0) or np.any(p <= 0):
        raise InvalidArgumentError("p and t_Th must be positive")

    slope, intercept = np.polyfit(np.log(p), np.log(t), 1)
    x0 = [math.exp(intercept), max(-slope, 1e-3), 0.0]

    def resid(x):
        return np.log(x[0] / p ** x[1] + x[2]) - np.log(t)

    res = least_squares(resid, x0, bounds=([1e-300, 1e-9, 0.0], [np.inf, np.inf, np.inf]),
                        xtol=1e-15, ftol=1e-15, gtol=1e-15, max_nfev=10000)
    rms = float(np.sqrt(np.mean(res.fun**2)))
    if not res.success or not np.all(np.isfinite(res.x)):
        raise FitFailureError(f"Thouless scaling fit did not converge: {res.message}", residual=rms)
    a, b, c = map(float, res.x)
    return ThoulessFit(list(zip(p.tolist(), t.tolist())), a, b, c, threshold, rms)
