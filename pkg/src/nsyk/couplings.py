"""Disorder realizations of the sparse non-Hermitian SYK couplings."""
from __future__ import annotations

import io
from dataclasses import dataclass, field
from functools import lru_cache
from itertools import combinations
from math import comb

import numpy as np

from .errors import InvalidArgumentError
from .majorana import MajoranaSet, build_majoranas, popcount, sector_indices

MODES = ("non-hermitian", "hermitian", "anti-hermitian")


@dataclass(frozen=True)
class ModelConfig:
    N: int
    p: float = 1.0
    mode: str = "non-hermitian"
    master_seed: int = 0
    realization_index: int = 0

    def __post_init__(self):
        if self.N < 4 or self.N % 2:
            raise InvalidArgumentError(f"N must be even and >= 4, got {self.N}")
        if not 0.0 < self.p <= 1.0:
            raise InvalidArgumentError(f"sparsity p must lie in (0, 1], got {self.p}")
        if self.mode not in MODES:
            raise InvalidArgumentError(f"unknown mode {self.mode!r}; expected one of {MODES}")
        if not 0 <= self.master_seed < 2**64:
            raise InvalidArgumentError("master_seed must be an unsigned 64-bit integer")
        if self.realization_index < 0:
            raise InvalidArgumentError("realization_index must be >= 0")

    @property
    def coupling_variance(self) -> float:
        return 6.0 / (self.p * self.N**3)

    def replace(self, **changes) -> "ModelConfig":
        values = {f: getattr(self, f) for f in self.__dataclass_fields__}
        values.update(changes)
        return ModelConfig(**values)


@dataclass(frozen=True)
class CouplingRealization:
    config: ModelConfig
    indices: np.ndarray = field(repr=False)  # (n_terms, 4), 1-based, rows strictly increasing
    J: np.ndarray = field(repr=False)
    M: np.ndarray = field(repr=False)

    def __len__(self):
        return len(self.J)

    @property
    def entries(self):
        return [(*map(int, idx), float(j), float(m)) for idx, j, m in zip(self.indices, self.J, self.M)]

    def to_text(self) -> str:
        """Flat audit format: one header line, then ``a b c d J M`` per entry."""
        c = self.config
        buf = io.StringIO()
        buf.write(f"# N={c.N} p={c.p!r} mode={c.mode} seed={c.master_seed} index={c.realization_index}\n")
        for (a, b, cc, d), j, m in zip(self.indices, self.J, self.M):
            buf.write(f"{a} {b} {cc} {d} {float(j)!r} {float(m)!r}\n")
        return buf.getvalue()

    @classmethod
    def from_text(cls, text: str) -> "CouplingRealization":
        lines = text.strip().splitlines()
        header = dict(tok.split("=", 1) for tok in lines[0].lstrip("#").split())
        config = ModelConfig(
            N=int(header["N"]),
            p=float(header["p"]),
            mode=header["mode"],
            master_seed=int(header["seed"]),
            realization_index=int(header["index"]),
        )
        rows = [ln.split() for ln in lines[1:] if ln.strip()]
        indices = np.array([[int(v) for v in r[:4]] for r in rows], dtype=np.int64).reshape(-1, 4)
        J = np.array([float(r[4]) for r in rows])
        M = np.array([float(r[5]) for r in rows])
        return cls(config, indices, J, M)


@lru_cache(maxsize=None)
def all_tuples(N: int) -> np.ndarray:
    """All 1-based index tuples a < b < c < d, lexicographic order."""
    return np.array(list(combinations(range(1, N + 1), 4)), dtype=np.int64).reshape(-1, 4)


def realization_rng(master_seed: int, realization_index: int) -> np.random.Generator:
    """Independent stream per realization, derived from the master seed by a spawn key."""
    seq = np.random.SeedSequence(entropy=master_seed, spawn_key=(realization_index,))
    return np.random.Generator(np.random.PCG64(seq))


def sample_couplings(config: ModelConfig) -> CouplingRealization:
    """Bernoulli(p) inclusion per tuple, shared by J and M; Gaussian couplings of variance 6/(pN^3).

    Uniforms and both normal arrays are drawn for every tuple regardless of p, so
    the same (seed, index) at different p gives nested realizations.
    """
    tuples = all_tuples(config.N)
    n = len(tuples)
    rng = realization_rng(config.master_seed, config.realization_index)
    u = rng.random(n)
    zj = rng.standard_normal(n)
    zm = rng.standard_normal(n)
    keep = u < config.p
    std = np.sqrt(config.coupling_variance)
    J = zj[keep] * std
    M = zm[keep] * std
    if config.mode == "hermitian":
        M = np.zeros_like(M)
    elif config.mode == "anti-hermitian":
        J = np.zeros_like(J)
    return CouplingRealization(config, tuples[keep].copy(), J, M)


class _SectorTables:
    """Precomputed sign tables for fast assembly of 4-body Hamiltonians on one sector.

    Each monomial psi_a psi_b psi_c psi_d is ``coef * X^x Z^z``; on basis state j it
    maps |j> to sign(z, j) |j ^ x>.  Terms are grouped by their flip mask x.
    """

    def __init__(self, N: int, sector):
        ms = build_majoranas(N)
        tuples = all_tuples(N)
        xs = np.empty(len(tuples), dtype=np.int64)
        zs = np.empty(len(tuples), dtype=np.int64)
        coefs = np.empty(len(tuples), dtype=complex)
        for t, tup in enumerate(tuples):
            ps = ms.monomial(tup)
            xs[t], zs[t], coefs[t] = ps.x, ps.z, ps.coefficient
        if sector == "full":
            states = np.arange(ms.dimension)
        else:
            states = sector_indices(ms.n_sites, sector)
        position = np.full(ms.dimension, -1, dtype=np.int64)
        position[states] = np.arange(len(states))

        order = np.argsort(xs, kind="stable")
        self.order = order
        self.coefs = coefs[order]
        xs_sorted = xs[order]
        # signs[t, k]: sign picked up by column state states[k] under term t
        self.signs = 1.0 - 2.0 * (popcount(zs[order][:, None] & states[None, :]) % 2)
        bounds = np.flatnonzero(np.diff(xs_sorted)) + 1
        starts = np.concatenate([[0], bounds])
        stops = np.concatenate([bounds, [len(xs_sorted)]])
        self.groups = []
        for s, e in zip(starts, stops):
            rows = position[states ^ xs_sorted[s]]
            self.groups.append((s, e, rows))
        self.dim = len(states)


@lru_cache(maxsize=8)
def _tables(N: int, sector) -> _SectorTables:
    return _SectorTables(N, sector)


def assemble_hamiltonian(c: CouplingRealization, ms: MajoranaSet, sector=None) -> np.ndarray:
    """Dense H = sum (J + iM) psi_a psi_b psi_c psi_d.

    With ``sector`` = +1 or -1 only the parity block is built (same result as
    assembling the full matrix and projecting, without forming it).
    """
    N = ms.n_majoranas
    if len(c) and (c.indices.min() < 1 or c.indices.max() > N):
        raise InvalidArgumentError(f"coupling index outside 1..{N}")
    if c.config.N != N:
        raise InvalidArgumentError(f"realization has N={c.config.N}, Majorana set has N={N}")
    tab = _tables(N, "full" if sector is None else sector)

    full = np.zeros(len(all_tuples(N)), dtype=complex)
    full[_tuple_rank(c.indices, N)] = c.J + 1j * c.M
    weights = full[tab.order] * tab.coefs

    H = np.zeros((tab.dim, tab.dim), dtype=complex)
    cols = np.arange(tab.dim)
    for s, e, rows in tab.groups:
        w = weights[s:e]
        if not np.any(w):
            continue
        vals = w.real @ tab.signs[s:e] + 1j * (w.imag @ tab.signs[s:e])
        H[rows, cols] += vals
    return H


def _tuple_rank(indices: np.ndarray, N: int) -> np.ndarray:
    """Lexicographic rank of 1-based 4-tuples among all C(N, 4) tuples."""
    if len(indices) == 0:
        return np.zeros(0, dtype=np.int64)
    ranks = np.zeros(len(indices), dtype=np.int64)
    prev = np.zeros(len(indices), dtype=np.int64)
    for pos in range(4):
        cur = indices[:, pos]
        for v in range(1, N + 1):
            # tuples whose entry at pos is v' with prev < v' < cur
            mask = (v > prev) & (v < cur)
            if np.any(mask):
                ranks[mask] += comb(N - v, 3 - pos)
        prev = cur
    return ranks
