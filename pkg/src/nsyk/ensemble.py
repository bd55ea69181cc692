"""Seeded ensemble execution, persistence, sparsity scans and critical-sparsity fits."""
from __future__ import annotations

import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from math import comb
from pathlib import Path

import numpy as np
from threadpoolctl import threadpool_limits

from . import __version__
from .couplings import ModelConfig, assemble_hamiltonian, sample_couplings
from .errors import (CorruptionError, DegenerateSpectrumError, InsufficientDataError,
                     InvalidArgumentError, NoThoulessTimeError, NSYKError, ScanRangeError)
from .form_factor import (default_alpha, fit_ramp, fit_thouless_scaling, log_grid, sigma_ff,
                          thouless_time)
from .io import content_hash, read_header, read_record, write_json, write_record
from .majorana import build_majoranas
from .spacing import DEFAULT_TRIM, ensemble_mean_r, spacing_ratios
from .spectral import SingularSpectrum, singular_values

log = logging.getLogger(__name__)

K_REFERENCE = 1.68
PCRIT_FRACTION = 0.99
COLLAPSE_TOL = 1e-8


def expected_pcrit(N: int, k: float = K_REFERENCE) -> float:
    return k * N / comb(N, 4)


def default_p_grid(N: int, per_decade: int = 12, floor_factor: float = 0.3) -> np.ndarray:
    """Log-spaced from 1 down to ``floor_factor`` * 24 k / N^3, descending."""
    p_min = floor_factor * 24 * K_REFERENCE / N**3
    n = int(math.ceil(per_decade * math.log10(1.0 / p_min))) + 1
    return np.logspace(0.0, math.log10(p_min), n)


def compute_spectrum(config: ModelConfig, sector=1) -> SingularSpectrum:
    """sample -> assemble (parity block) -> singular values, for one realization."""
    ms = build_majoranas(config.N)
    H = assemble_hamiltonian(sample_couplings(config), ms, sector=None if sector == "full" else sector)
    return singular_values(H, config, sector)


def _compute_single_threaded(args):
    config, sector = args
    with threadpool_limits(limits=1):
        return compute_spectrum(config, sector)


def compute_spectra(configs, sector=1, threads: int = 1) -> list:
    """Spectra for many realizations. BLAS is pinned to one thread per item so the
    result does not depend on ``threads``."""
    items = [(c, sector) for c in configs]
    if threads <= 1:
        return [_compute_single_threaded(it) for it in items]
    with ProcessPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(_compute_single_threaded, items, chunksize=4))


def ensemble_configs(N: int, p: float, n_realizations: int, mode: str = "non-hermitian",
                     master_seed: int = 0, first_index: int = 0) -> list:
    return [ModelConfig(N, p, mode, master_seed, i) for i in range(first_index, first_index + n_realizations)]


# ---------------------------------------------------------------------------
# Manifest-driven persisted runs


@dataclass
class RunManifest:
    N: list
    p: list
    n_realizations: int
    mode: str = "non-hermitian"
    master_seed: int = 0
    sector: object = 1
    alpha: float | None = None
    edge_trim: float = DEFAULT_TRIM
    grid: dict = field(default_factory=lambda: {"t_min": 1e-2, "t_max": 1e6, "count": 400})
    artifact_version: str = __version__
    content_hash: str | None = None

    def __post_init__(self):
        self.N = [int(n) for n in np.atleast_1d(self.N)]
        self.p = [float(p) for p in np.atleast_1d(self.p)]
        if self.n_realizations < 1:
            raise InvalidArgumentError("n_realizations must be >= 1")
        for n in self.N:
            for p in self.p:
                ModelConfig(n, p, self.mode, self.master_seed)  # validates
        if self.sector not in (1, -1, "full"):
            raise InvalidArgumentError(f"sector must be 1, -1 or 'full', got {self.sector!r}")

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "RunManifest":
        known = set(cls.__dataclass_fields__)
        unknown = set(d) - known
        if unknown:
            raise InvalidArgumentError(f"unknown manifest keys: {sorted(unknown)}")
        return cls(**d)

    def work_items(self) -> list:
        return [ModelConfig(n, p, self.mode, self.master_seed, i)
                for n in self.N for p in self.p for i in range(self.n_realizations)]


def record_path(root, config: ModelConfig, sector=1) -> Path:
    return (Path(root) / f"N{config.N}" / f"p{config.p:.6g}" / f"s{sector}"
            / f"r{config.realization_index:06d}.bin")


def _validate_existing(path: Path, config: ModelConfig, sector) -> bool:
    """True if a valid record exists; CorruptionError if one exists but does not match."""
    if not path.exists():
        return False
    h = read_header(path.read_bytes())
    expected = dict(N=config.N, p=config.p, mode=config.mode, sector=sector,
                    master_seed=config.master_seed, realization_index=config.realization_index)
    for key, value in expected.items():
        if h[key] != value:
            raise CorruptionError(f"{path}: header field {key}={h[key]!r}, expected {value!r}")
    return True


def _run_item(args):
    config, sector, path = args
    spectrum = _compute_single_threaded((config, sector))
    write_record(path, spectrum)
    return str(path)


class RunError(NSYKError):
    def __init__(self, message, completed, missing):
        super().__init__(message)
        self.completed = completed
        self.missing = missing


def run_ensemble(manifest: RunManifest, out_dir, threads: int = 1, resume: bool = True) -> dict:
    """Compute and persist every (N, p, realization) spectrum of the manifest.

    Existing records are validated and skipped when ``resume`` is set.  Returns
    the manifest dictionary written to ``out_dir/manifest.json``, including a
    content hash of all records.
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    todo, paths = [], []
    for cfg in manifest.work_items():
        path = record_path(out_dir, cfg, manifest.sector)
        paths.append(path)
        if resume and _validate_existing(path, cfg, manifest.sector):
            continue
        todo.append((cfg, manifest.sector, path))
    log.info("run: %d work items, %d to compute", len(paths), len(todo))

    try:
        if threads <= 1:
            for item in todo:
                _run_item(item)
        else:
            with ProcessPoolExecutor(max_workers=threads) as pool:
                list(pool.map(_run_item, todo, chunksize=1))
    except OSError as exc:
        done = [p for p in paths if p.exists()]
        raise RunError(f"I/O failure after {len(done)} of {len(paths)} records: {exc}",
                       completed=len(done), missing=len(paths) - len(done)) from exc

    manifest.content_hash = content_hash(paths, out_dir)
    data = manifest.to_dict()
    write_json(out_dir / "manifest.json", data)
    return data


def load_spectra(root, N: int, p: float, n_realizations: int, mode: str = "non-hermitian",
                 master_seed: int = 0, sector=1) -> list:
    out = []
    for cfg in ensemble_configs(N, p, n_realizations, mode, master_seed):
        path = record_path(root, cfg, sector)
        if not _validate_existing(path, cfg, sector):
            raise FileNotFoundError(f"missing spectrum record {path}")
        out.append(read_record(path))
    return out


# ---------------------------------------------------------------------------
# Spacing-ratio aggregation and sparsity scans


@dataclass
class EnsembleR:
    mean: float
    std_error: float
    n_used: int
    n_rejected: int


def ensemble_r(spectra, edge_trim: float = DEFAULT_TRIM, collapse: bool = True,
               degeneracy_tolerance: float = COLLAPSE_TOL) -> EnsembleR:
    """Mean spacing ratio over an ensemble; fully degenerate realizations are rejected and counted."""
    stats, rejected = [], 0
    for s in spectra:
        try:
            stats.append(spacing_ratios(s, edge_trim, degeneracy_tolerance, collapse=collapse))
        except (DegenerateSpectrumError, InsufficientDataError):
            rejected += 1
    if not stats:
        raise DegenerateSpectrumError("every realization in the ensemble is degenerate")
    mean, se = ensemble_mean_r(stats)
    return EnsembleR(mean, se, len(stats), rejected)


@dataclass
class SparsityScanResult:
    N: int
    p_grid: np.ndarray
    r_sigma: np.ndarray
    r_error: np.ndarray
    n_rejected: np.ndarray
    r_dense: float
    p_crit: float
    k: float
    n_realizations: int = 0
    metadata: dict = field(default_factory=dict)


def find_pcrit(p_grid, r_values, r_dense: float, fraction: float = PCRIT_FRACTION) -> float:
    """First downward crossing of fraction * r_dense, by linear interpolation in p.

    ``p_grid`` must be sorted descending.
    """
    p = np.asarray(p_grid, dtype=float)
    r = np.asarray(r_values, dtype=float)
    thr = fraction * r_dense
    for i in range(len(p) - 1):
        if r[i] >= thr > r[i + 1]:
            w = (r[i] - thr) / (r[i] - r[i + 1])
            return float(p[i] + w * (p[i + 1] - p[i]))
    raise ScanRangeError(f"<r_sigma> never drops below {thr:.4f} within the p grid")


def scan_sparsity(N: int, p_grid=None, n_realizations: int = 200, mode: str = "non-hermitian",
                  master_seed: int = 0, sector=1, edge_trim: float = DEFAULT_TRIM,
                  collapse: bool = True, threads: int = 1, store=None) -> SparsityScanResult:
    """<r_sigma>(p) over a descending p grid containing 1, and the critical sparsity.

    If ``store`` is a directory of persisted records they are read from there
    instead of being recomputed.
    """
    p_grid = np.sort(np.asarray(default_p_grid(N) if p_grid is None else p_grid, dtype=float))[::-1]
    if not np.isclose(p_grid[0], 1.0):
        raise InvalidArgumentError("p grid must include p = 1")
    p_grid[0] = 1.0
    r, err, rej = [], [], []
    for p in p_grid:
        if store is not None:
            spectra = load_spectra(store, N, p, n_realizations, mode, master_seed, sector)
        else:
            spectra = compute_spectra(ensemble_configs(N, p, n_realizations, mode, master_seed), sector, threads)
        er = ensemble_r(spectra, edge_trim, collapse)
        r.append(er.mean)
        err.append(er.std_error)
        rej.append(er.n_rejected)
        log.info("N=%d p=%.4g <r>=%.4f +- %.4f", N, p, er.mean, er.std_error)
    r_dense = r[0]
    p_crit = find_pcrit(p_grid, r, r_dense)
    return SparsityScanResult(
        N=N, p_grid=p_grid, r_sigma=np.array(r), r_error=np.array(err), n_rejected=np.array(rej),
        r_dense=r_dense, p_crit=p_crit, k=p_crit * comb(N, 4) / N, n_realizations=n_realizations,
        metadata=dict(N=N, mode=mode, seed=master_seed, sector=sector, trim=edge_trim,
                      collapse=collapse, tolerance=COLLAPSE_TOL, n_realizations=n_realizations),
    )


@dataclass
class PcritFit:
    k: float
    residuals: np.ndarray
    relative_rms: float
    poor_fit: bool


def fit_pcrit_scaling(points, poor_fit_threshold: float = 0.1) -> PcritFit:
    """Least squares for the constant k in p_crit * C(N, 4) / N = k.

    ``relative_rms`` is the RMS of the residuals divided by k; above
    ``poor_fit_threshold`` the data do not follow the 1/N^3 law.
    """
    pts = list(points)
    if len({int(n) for n, _ in pts}) < 3:
        raise InsufficientDataError("need p_crit at >= 3 distinct N")
    y = np.array([pc * comb(int(n), 4) / int(n) for n, pc in pts])
    k = math.fsum(y) / len(y)
    resid = y - k
    rel = float(np.sqrt(np.mean(resid**2)) / k)
    return PcritFit(float(k), resid, rel, rel > poor_fit_threshold)


# ---------------------------------------------------------------------------
# Form-factor sweeps


@dataclass
class ThoulessSweep:
    N: int
    curves: dict  # p -> FormFactorCurve
    ramp: object  # RampFit of the dense (p = 1) curve
    t_th: dict  # p -> Thouless time (absent where none was found)
    fit: object = None  # ThoulessFit, when enough points


def form_factor_ensemble(N: int, p: float, n_realizations: int, grid=None, alpha=None,
                         mode: str = "non-hermitian", master_seed: int = 0, sector=1,
                         threads: int = 1, store=None):
    grid = log_grid() if grid is None else grid
    alpha = default_alpha(N) if alpha is None else alpha
    if store is not None:
        spectra = load_spectra(store, N, p, n_realizations, mode, master_seed, sector)
    else:
        spectra = compute_spectra(ensemble_configs(N, p, n_realizations, mode, master_seed), sector, threads)
    meta = dict(N=N, p=p, mode=mode, seed=master_seed, sector=sector, alpha_rule="3.27 * <s^2>_26 / <s^2>_N")
    return sigma_ff(spectra, grid, alpha, metadata=meta)


def thouless_sweep(N: int, p_values, n_realizations: int, grid=None, alpha=None,
                   threshold: float = 0.20, mode: str = "non-hermitian", master_seed: int = 0,
                   sector=1, threads: int = 1, store=None) -> ThoulessSweep:
    """Thouless time per p against the ramp fitted on the dense curve, plus the a/p^b + c fit."""
    p_values = sorted({1.0, *map(float, p_values)}, reverse=True)
    curves = {p: form_factor_ensemble(N, p, n_realizations, grid, alpha, mode, master_seed, sector,
                                      threads, store) for p in p_values}
    ramp = fit_ramp(curves[1.0])
    t_th = {}
    for p, curve in curves.items():
        try:
            t_th[p] = thouless_time(curve, ramp, threshold)
        except NoThoulessTimeError:
            log.warning("N=%d p=%g: no Thouless time", N, p)
    fit = None
    if len(t_th) >= 4 and max(t_th) / min(t_th) >= 10:
        fit = fit_thouless_scaling(t_th.items(), threshold)
    return ThoulessSweep(N, curves, ramp, t_th, fit)
