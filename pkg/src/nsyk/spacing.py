"""Short-range singular-value statistics: spacing ratios and spacing histograms."""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateSpectrumError, InsufficientDataError, InvalidArgumentError

DEFAULT_TRIM = 0.10
DEFAULT_DEGENERACY_TOL = 1e-8
DEGENERATE_WARN_FRACTION = 0.40


@dataclass
class SpacingStats:
    r_values: np.ndarray = field(repr=False)
    mean_r: float
    std_error: float
    n_spacings: int  # retained levels - 2; includes excluded 0/0 ratios
    edge_trim: float
    degeneracy_tolerance: float
    n_excluded: int = 0
    degenerate_fraction: float = 0.0


@dataclass
class SpacingHistogram:
    bin_edges: np.ndarray
    densities: np.ndarray
    n_spacings: int = 0

    @property
    def centers(self) -> np.ndarray:
        return 0.5 * (self.bin_edges[1:] + self.bin_edges[:-1])


def _values(s) -> np.ndarray:
    return np.sort(np.asarray(getattr(s, "values", s), dtype=float))


def trim_edges(levels: np.ndarray, edge_trim: float) -> np.ndarray:
    if not 0.0 <= edge_trim < 0.5:
        raise InvalidArgumentError(f"edge_trim must lie in [0, 0.5), got {edge_trim}")
    k = int(math.floor(edge_trim * len(levels)))
    return levels[k:len(levels) - k]


def collapse_degenerate(levels: np.ndarray, rel_tol: float) -> np.ndarray:
    """Merge runs of levels closer than ``rel_tol`` times the mean spacing."""
    if len(levels) < 2:
        return levels
    gaps = np.diff(levels)
    mean_gap = (levels[-1] - levels[0]) / (len(levels) - 1)
    keep = np.concatenate([[True], gaps > rel_tol * mean_gap])
    return levels[keep]


def spacing_ratios(s, edge_trim: float = DEFAULT_TRIM,
                   degeneracy_tolerance: float = DEFAULT_DEGENERACY_TOL,
                   collapse: bool = False) -> SpacingStats:
    """min/max ratios of consecutive spacings of the trimmed spectrum.

    Ratios with both spacings zero are counted in ``n_excluded`` and dropped;
    a single zero spacing gives r = 0 and is kept.
    """
    levels = trim_edges(_values(s), edge_trim)
    if collapse:
        levels = collapse_degenerate(levels, degeneracy_tolerance)
    if len(levels) < 4:
        raise InsufficientDataError(f"need >= 4 retained levels, have {len(levels)}")
    gaps = np.diff(levels)
    if not np.any(gaps > 0):
        raise DegenerateSpectrumError("all spacings are zero")

    mean_gap = gaps.mean()
    degenerate_fraction = float(np.mean(gaps <= degeneracy_tolerance * mean_gap))
    if degenerate_fraction > DEGENERATE_WARN_FRACTION and not collapse:
        warnings.warn(
            f"{degenerate_fraction:.0%} of spacings are degenerate; consider collapse=True",
            RuntimeWarning,
            stacklevel=2,
        )

    lo = np.minimum(gaps[:-1], gaps[1:])
    hi = np.maximum(gaps[:-1], gaps[1:])
    valid = hi > 0
    r = lo[valid] / hi[valid]
    if len(r) == 0:
        raise DegenerateSpectrumError("no spacing pair with a non-zero spacing")
    mean = math.fsum(r) / len(r)
    se = float(np.std(r, ddof=1) / np.sqrt(len(r))) if len(r) > 1 else 0.0
    return SpacingStats(
        r_values=r,
        mean_r=mean,
        std_error=se,
        n_spacings=len(levels) - 2,
        edge_trim=edge_trim,
        degeneracy_tolerance=degeneracy_tolerance,
        n_excluded=int(np.sum(~valid)),
        degenerate_fraction=degenerate_fraction,
    )


def ensemble_mean_r(stats) -> tuple:
    """Pooled mean of all ratios; standard error from the realization means."""
    stats = list(stats)
    if not stats:
        raise InvalidArgumentError("empty ensemble")
    total = math.fsum(math.fsum(st.r_values) for st in stats)
    count = sum(len(st.r_values) for st in stats)
    mean = total / count
    if len(stats) == 1:
        return mean, stats[0].std_error
    means = np.array([st.mean_r for st in stats])
    mu = math.fsum(means) / len(means)
    var = math.fsum((means - mu) ** 2) / (len(means) - 1)
    return mean, math.sqrt(var / len(means))


def unit_spacings(s, edge_trim: float = DEFAULT_TRIM, collapse: bool = False,
                  degeneracy_tolerance: float = DEFAULT_DEGENERACY_TOL) -> np.ndarray:
    """Bulk spacings of one spectrum rescaled to unit mean."""
    levels = trim_edges(_values(s), edge_trim)
    if collapse:
        levels = collapse_degenerate(levels, degeneracy_tolerance)
    if len(levels) < 4:
        raise InsufficientDataError(f"need >= 4 retained levels, have {len(levels)}")
    gaps = np.diff(levels)
    mean_gap = gaps.mean()
    if mean_gap <= 0:
        raise DegenerateSpectrumError("all spacings are zero")
    return gaps / mean_gap


def spacing_histogram(ensemble, bins=None, edge_trim: float = DEFAULT_TRIM,
                      collapse: bool = False,
                      degeneracy_tolerance: float = DEFAULT_DEGENERACY_TOL) -> SpacingHistogram:
    """Density of pooled unit-mean spacings, normalized by the total spacing count.

    ``bins`` is an edge array, a bin count over [0, max spacing], or None for
    width-0.1 bins covering all data.
    """
    pooled = np.concatenate([
        unit_spacings(s, edge_trim, collapse, degeneracy_tolerance) for s in ensemble
    ])
    top = float(pooled.max())
    if bins is None:
        edges = np.arange(0.0, top + 0.1, 0.1)
        if edges[-1] <= top:
            edges = np.append(edges, edges[-1] + 0.1)
    elif np.isscalar(bins):
        edges = np.linspace(0.0, top * (1 + 1e-12) if top > 0 else 1.0, int(bins) + 1)
    else:
        edges = np.asarray(bins, dtype=float)
    counts, edges = np.histogram(pooled, bins=edges)
    # normalized by all spacings, so bins that miss part of the data still estimate the density
    dens = counts / (len(pooled) * np.diff(edges))
    return SpacingHistogram(edges, dens, len(pooled))
