"""Singular spectra by SVD and by Hermitization, and sign recovery for Hermitian input."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Union

import numpy as np

from .couplings import ModelConfig
from .errors import InvalidArgumentError, NonHermitianInputError

Sector = Union[int, str]


@dataclass(frozen=True)
class SingularSpectrum:
    values: np.ndarray
    source_config: Optional[ModelConfig] = None
    sector: Sector = "full"

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=float)
        if vals.ndim != 1:
            raise InvalidArgumentError("spectrum must be one-dimensional")
        if np.any(vals < 0):
            raise InvalidArgumentError("singular values must be non-negative")
        object.__setattr__(self, "values", np.sort(vals))

    def __len__(self):
        return len(self.values)


@dataclass(frozen=True)
class SVDFactors:
    """H = U diag(s) V^dagger with singular values in ascending order."""

    U: np.ndarray = field(repr=False)
    s: np.ndarray
    V: np.ndarray = field(repr=False)
    matrix: Optional[np.ndarray] = field(default=None, repr=False)

    def reconstruct(self) -> np.ndarray:
        return (self.U * self.s) @ self.V.conj().T


@dataclass(frozen=True)
class SignedSpectrum:
    values: np.ndarray  # signed, ascending


def _check_square(H) -> np.ndarray:
    H = np.asarray(H)
    if H.ndim != 2 or H.shape[0] != H.shape[1]:
        raise InvalidArgumentError(f"expected a square matrix, got shape {H.shape}")
    return H


def singular_values(H, config: Optional[ModelConfig] = None, sector: Sector = "full") -> SingularSpectrum:
    H = _check_square(H)
    s = np.linalg.svd(H, compute_uv=False)
    return SingularSpectrum(s[::-1], config, sector)


def svd_factors(H) -> SVDFactors:
    H = _check_square(H)
    U, s, Vh = np.linalg.svd(H)
    # ascending order to match SingularSpectrum
    return SVDFactors(U[:, ::-1], s[::-1], Vh.conj().T[:, ::-1], H)


def hermitize(H) -> np.ndarray:
    """The 2L x 2L block matrix [[0, H], [H^dagger, 0]]; its spectrum is {+-sigma_n}."""
    H = _check_square(H)
    L = H.shape[0]
    out = np.zeros((2 * L, 2 * L), dtype=np.result_type(H.dtype, complex))
    out[:L, L:] = H
    out[L:, :L] = H.conj().T
    return out


def singular_values_hermitized(H) -> SingularSpectrum:
    """Cross-check route: the L largest eigenvalues of the Hermitized matrix."""
    H = _check_square(H)
    ev = np.linalg.eigvalsh(hermitize(H))
    return SingularSpectrum(np.clip(ev[H.shape[0]:], 0.0, None))


def sign_align(f: SVDFactors, tol: float = 1e-10, overlap_threshold: float = 0.99,
               cluster_tol: float = 1e-8) -> SignedSpectrum:
    """Recover the eigenvalues of a Hermitian matrix from its SVD.

    With H v_n = sigma_n u_n, Hermitian H has u_n = +-v_n and the sign is that of
    the eigenvalue.  Inside a cluster of (numerically) degenerate singular values
    the vectors may mix, so the signs are read off the eigenvalues of the
    involution U_c^dagger V_c instead.  Zero singular values get sign +1.
    """
    H = f.matrix if f.matrix is not None else f.reconstruct()
    norm = np.max(np.abs(H), initial=0.0)
    if np.max(np.abs(H - H.conj().T), initial=0.0) > tol * max(norm, np.finfo(float).tiny):
        raise NonHermitianInputError("sign alignment requires a Hermitian matrix")

    s = f.s
    smax = s[-1] if len(s) else 0.0
    signs = np.ones(len(s))
    boundaries = np.flatnonzero(np.diff(s) > cluster_tol * smax) + 1
    for block in np.split(np.arange(len(s)), boundaries):
        if smax == 0 or s[block[-1]] <= cluster_tol * smax:
            continue  # zero singular values
        overlap = f.U[:, block].conj().T @ f.V[:, block]
        if len(block) == 1:
            ov = overlap[0, 0]
            if abs(ov) < overlap_threshold:
                raise NonHermitianInputError(f"singular vectors not parallel (|<u|v>| = {abs(ov):.3g})")
            signs[block] = np.sign(ov.real)
        else:
            ev = np.linalg.eigvalsh(0.5 * (overlap + overlap.conj().T))
            if np.min(np.abs(ev)) < overlap_threshold:
                raise NonHermitianInputError("degenerate singular subspaces are not aligned")
            signs[block] = np.sign(ev)
    return SignedSpectrum(np.sort(signs * s))
