"""Majorana operators on 2^(N/2)-dimensional Hilbert space and fermion parity.

Operators are kept in a symbolic Pauli form ``i**phase * X^x Z^z`` (bitmasks
over the N/2 sites) and only expanded into dense matrices on request.  Site 0
is the most significant bit of a basis index, so the dense matrices coincide
with the usual ``kron(site_0, site_1, ...)`` ordering.

Normalization follows ``{psi_a, psi_b} = delta_ab``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property, reduce

import numpy as np

from .errors import InvalidArgumentError, SymmetryViolationError

_I2 = np.eye(2, dtype=complex)
_X = np.array([[0, 1], [1, 0]], dtype=complex)
_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
_Z = np.array([[1, 0], [0, -1]], dtype=complex)

_IPOW = np.array([1, 1j, -1, -1j])


def popcount(a):
    """Number of set bits, elementwise for integer arrays."""
    a = np.asarray(a, dtype=np.uint64)
    count = np.zeros(a.shape, dtype=np.int64)
    while np.any(a):
        count += (a & np.uint64(1)).astype(np.int64)
        a = a >> np.uint64(1)
    return count


@dataclass(frozen=True)
class PauliString:
    """``i**phase * scale * X^x Z^z`` acting on ``n_sites`` qubits."""

    x: int
    z: int
    phase: int = 0
    scale: float = 1.0

    def __matmul__(self, other: "PauliString") -> "PauliString":
        sign = 2 * (bin(self.z & other.x).count("1") % 2)
        return PauliString(
            self.x ^ other.x,
            self.z ^ other.z,
            (self.phase + other.phase + sign) % 4,
            self.scale * other.scale,
        )

    @property
    def coefficient(self) -> complex:
        return _IPOW[self.phase] * self.scale

    def to_dense(self, n_sites: int) -> np.ndarray:
        dim = 1 << n_sites
        cols = np.arange(dim, dtype=np.int64)
        rows = cols ^ self.x
        signs = 1.0 - 2.0 * (popcount(cols & self.z) % 2)
        mat = np.zeros((dim, dim), dtype=complex)
        mat[rows, cols] = self.coefficient * signs
        return mat


@dataclass(frozen=True)
class MajoranaSet:
    n_majoranas: int
    paulis: tuple = field(repr=False)

    @property
    def n_sites(self) -> int:
        return self.n_majoranas // 2

    @property
    def dimension(self) -> int:
        return 1 << self.n_sites

    @cached_property
    def operators(self) -> list:
        """Dense L x L matrices psi_1..psi_N built as explicit tensor-product chains."""
        return [_dense_majorana(a, self.n_sites) for a in range(self.n_majoranas)]

    def monomial(self, indices) -> PauliString:
        """Symbolic product psi_{i1} psi_{i2} ... for 1-based indices."""
        for a in indices:
            if not 1 <= a <= self.n_majoranas:
                raise InvalidArgumentError(f"Majorana index {a} outside 1..{self.n_majoranas}")
        return reduce(lambda acc, a: acc @ self.paulis[a - 1], indices, PauliString(0, 0))


def _dense_majorana(a: int, n_sites: int) -> np.ndarray:
    site = a // 2
    factors = [_Z] * site + [_X if a % 2 == 0 else _Y] + [_I2] * (n_sites - site - 1)
    return reduce(np.kron, factors) / np.sqrt(2.0)


def build_majoranas(n: int) -> MajoranaSet:
    """Jordan-Wigner chain of ``n`` Majoranas (``n`` even, ``n >= 2``).

    psi_{2k+1} = Z..Z X_k / sqrt(2) and psi_{2k+2} = Z..Z Y_k / sqrt(2).
    """
    if not isinstance(n, (int, np.integer)) or n < 2 or n % 2:
        raise InvalidArgumentError(f"number of Majoranas must be even and >= 2, got {n!r}")
    n_sites = n // 2
    paulis = []
    for a in range(n):
        site = a // 2
        bit = 1 << (n_sites - 1 - site)
        string = sum(1 << (n_sites - 1 - j) for j in range(site))
        if a % 2 == 0:
            paulis.append(PauliString(bit, string, 0, 2**-0.5))
        else:
            # Y = i X Z
            paulis.append(PauliString(bit, string | bit, 1, 2**-0.5))
    return MajoranaSet(int(n), tuple(paulis))


@dataclass(frozen=True)
class ParityOperator:
    matrix: np.ndarray = field(repr=False)
    diagonal: np.ndarray = field(repr=False)

    @property
    def sector_dims(self) -> tuple:
        return (int(np.sum(self.diagonal > 0)), int(np.sum(self.diagonal < 0)))


def parity_operator(ms: MajoranaSet) -> ParityOperator:
    """Fermion parity, proportional to psi_1 psi_2 ... psi_N.

    The product equals ``c * Z^{all}`` for a scalar c; dividing c out gives the
    Hermitian involution that is +1 on the empty state.
    """
    product = ms.monomial(range(1, ms.n_majoranas + 1))
    assert product.x == 0 and product.z == ms.dimension - 1
    diag = 1.0 - 2.0 * (popcount(np.arange(ms.dimension)) % 2)
    return ParityOperator(np.diag(diag).astype(complex), diag)


def sector_indices(n_sites: int, sign: int) -> np.ndarray:
    """Computational basis states of the given parity, ascending."""
    if sign not in (1, -1):
        raise InvalidArgumentError(f"sector sign must be +1 or -1, got {sign!r}")
    states = np.arange(1 << n_sites)
    odd = popcount(states) % 2
    return states[odd == (0 if sign == 1 else 1)]


def project_to_sector(H: np.ndarray, P: ParityOperator, sign: int, tol: float = 1e-10) -> np.ndarray:
    """Block of ``H`` on the parity eigenspace with eigenvalue ``sign``."""
    if sign not in (1, -1):
        raise InvalidArgumentError(f"sector sign must be +1 or -1, got {sign!r}")
    H = np.asarray(H)
    scale = np.max(np.abs(H)) if H.size else 0.0
    comm = H @ P.matrix - P.matrix @ H
    if np.max(np.abs(comm), initial=0.0) > tol * max(scale, np.finfo(float).tiny):
        raise SymmetryViolationError("operator does not commute with parity")
    idx = np.flatnonzero(P.diagonal == sign)
    return H[np.ix_(idx, idx)]
