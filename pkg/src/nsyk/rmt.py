"""Sampled Gaussian reference ensembles (GOE, GUE, GSE) and a Poisson surrogate."""
from __future__ import annotations

import enum

import numpy as np

from .errors import InvalidArgumentError
from .spacing import DEFAULT_TRIM, SpacingHistogram, ensemble_mean_r, spacing_histogram, spacing_ratios


class EnsembleClass(enum.Enum):
    GOE = "GOE"
    GUE = "GUE"
    GSE = "GSE"
    POISSON = "Poisson"

    @property
    def reference_r(self) -> float:
        return REFERENCE_R[self]

    @classmethod
    def parse(cls, tag) -> "EnsembleClass":
        if isinstance(tag, cls):
            return tag
        for member in cls:
            if member.value.lower() == str(tag).lower():
                return member
        raise InvalidArgumentError(f"unknown ensemble class {tag!r}")


# Large-dimension values; Poisson is 2 ln 2 - 1.
REFERENCE_R = {
    EnsembleClass.GOE: 0.5307,
    EnsembleClass.GUE: 0.5996,
    EnsembleClass.GSE: 0.6744,
    EnsembleClass.POISSON: 0.3863,
}


def sample_gaussian_matrix(cls, dim: int, rng: np.random.Generator) -> np.ndarray:
    """One Hermitian matrix of the given class, scaled to semicircle radius 2.

    GSE matrices are quaternion self-dual, ``[[A, B], [-B*, A*]]`` with A
    Hermitian and B antisymmetric, so every eigenvalue is a Kramers pair.
    The Poisson class is a diagonal matrix with i.i.d. uniform entries.
    """
    cls = EnsembleClass.parse(cls)
    if dim < 4:
        raise InvalidArgumentError(f"dim must be >= 4, got {dim}")
    if cls is EnsembleClass.GOE:
        a = rng.standard_normal((dim, dim))
        return (a + a.T) / np.sqrt(2.0 * dim)
    if cls is EnsembleClass.GUE:
        a = (rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))) / np.sqrt(2.0)
        return (a + a.conj().T) / np.sqrt(2.0 * dim)
    if cls is EnsembleClass.GSE:
        if dim % 2:
            raise InvalidArgumentError(f"GSE needs an even dimension, got {dim}")
        n = dim // 2
        x = (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) / np.sqrt(2.0)
        y = (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) / np.sqrt(2.0)
        a = (x + x.conj().T) / np.sqrt(2.0 * dim)
        b = (y - y.T) / np.sqrt(2.0 * dim)
        return np.block([[a, b], [-b.conj(), a.conj()]])
    return np.diag(rng.uniform(-2.0, 2.0, dim))


def _streams(seed: int, n: int):
    return [np.random.default_rng(s) for s in np.random.SeedSequence(seed).spawn(n)]


def sample_spectra(cls, dim: int, n_samples: int, seed: int = 0) -> list:
    """Eigenvalue spectra, with GSE Kramers pairs collapsed to one level each."""
    cls = EnsembleClass.parse(cls)
    spectra = []
    for rng in _streams(seed, n_samples):
        ev = np.linalg.eigvalsh(sample_gaussian_matrix(cls, dim, rng))
        spectra.append(ev[::2] if cls is EnsembleClass.GSE else ev)
    return spectra


def reference_mean_r(cls, dim: int = 512, n_samples: int = 200, seed: int = 0,
                     edge_trim: float = DEFAULT_TRIM) -> tuple:
    stats = [spacing_ratios(ev, edge_trim) for ev in sample_spectra(cls, dim, n_samples, seed)]
    return ensemble_mean_r(stats)


def reference_spacing_curve(cls, dim: int = 512, n_samples: int = 200, seed: int = 0,
                            bins=None, edge_trim: float = DEFAULT_TRIM) -> SpacingHistogram:
    return spacing_histogram(sample_spectra(cls, dim, n_samples, seed), bins=bins, edge_trim=edge_trim)
