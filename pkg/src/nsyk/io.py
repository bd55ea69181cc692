"""Persistence: binary spectrum records, CSV exports with metadata, JSON manifests."""
from __future__ import annotations

import csv
import hashlib
import json
import os
import struct
from pathlib import Path

import numpy as np

from .couplings import MODES, ModelConfig
from .errors import CorruptionError
from .spectral import SingularSpectrum

MAGIC = b"NSYK"
VERSION = 1
# magic, version, N, p, mode, sector, seed, index, length
_HEADER = struct.Struct("<4sHHdBbQQQ")
_SECTOR_CODES = {1: 1, -1: -1, "full": 0}
_SECTOR_FROM_CODE = {v: k for k, v in _SECTOR_CODES.items()}


def encode_record(spectrum: SingularSpectrum) -> bytes:
    cfg = spectrum.source_config
    if cfg is None:
        raise ValueError("spectrum has no source config to record")
    header = _HEADER.pack(MAGIC, VERSION, cfg.N, cfg.p, MODES.index(cfg.mode),
                          _SECTOR_CODES[spectrum.sector], cfg.master_seed, cfg.realization_index,
                          len(spectrum.values))
    return header + np.asarray(spectrum.values, dtype="<f8").tobytes()


def read_header(data: bytes) -> dict:
    if len(data) < _HEADER.size:
        raise CorruptionError("record shorter than its header")
    magic, version, N, p, mode, sector, seed, index, length = _HEADER.unpack_from(data)
    if magic != MAGIC or version != VERSION:
        raise CorruptionError(f"bad magic/version {magic!r}/{version}")
    if len(data) != _HEADER.size + 8 * length:
        raise CorruptionError(f"record holds {(len(data) - _HEADER.size) / 8:g} values, header says {length}")
    return dict(N=N, p=p, mode=MODES[mode], sector=_SECTOR_FROM_CODE[sector],
                master_seed=seed, realization_index=index, length=length)


def decode_record(data: bytes) -> SingularSpectrum:
    h = read_header(data)
    cfg = ModelConfig(h["N"], h["p"], h["mode"], h["master_seed"], h["realization_index"])
    values = np.frombuffer(data, dtype="<f8", offset=_HEADER.size, count=h["length"])
    return SingularSpectrum(values.copy(), cfg, h["sector"])


def write_record(path, spectrum: SingularSpectrum) -> None:
    """Write atomically (temp file + rename) so an interrupted run never leaves half a record."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_suffix(path.suffix + ".tmp")
    with open(tmp, "wb") as fh:
        fh.write(encode_record(spectrum))
    os.replace(tmp, path)


def read_record(path) -> SingularSpectrum:
    return decode_record(Path(path).read_bytes())


def write_csv(path, columns: dict, metadata: dict | None = None) -> None:
    """CSV with ``# key: value`` metadata lines above the column header."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    names = list(columns)
    arrays = [np.asarray(columns[n]) for n in names]
    with open(path, "w", newline="") as fh:
        for key, value in (metadata or {}).items():
            fh.write(f"# {key}: {json.dumps(value)}\n")
        writer = csv.writer(fh)
        writer.writerow(names)
        for row in zip(*arrays):
            writer.writerow([repr(float(v)) if isinstance(v, (float, np.floating)) else v for v in row])


def read_csv(path) -> tuple:
    """Returns ({column: float array}, metadata)."""
    metadata, lines = {}, []
    with open(path) as fh:
        for line in fh:
            if line.startswith("#"):
                key, _, value = line[1:].partition(":")
                metadata[key.strip()] = json.loads(value)
            elif line.strip():
                lines.append(line)
    rows = list(csv.reader(lines))
    names = rows[0]
    data = np.array(rows[1:], dtype=float).reshape(-1, len(names))
    return {n: data[:, i] for i, n in enumerate(names)}, metadata


def write_json(path, obj) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n")


def content_hash(paths, root) -> str:
    """sha256 over (relative path, bytes) of every file, in sorted path order."""
    root = Path(root)
    digest = hashlib.sha256()
    for p in sorted(Path(p) for p in paths):
        digest.update(str(p.relative_to(root)).encode())
        digest.update(b"\0")
        digest.update(p.read_bytes())
    return digest.hexdigest()


# ---------------------------------------------------------------------------
# Exports of analysis objects


def export_spectrum_csv(path, spectrum: SingularSpectrum) -> None:
    cfg = spectrum.source_config
    meta = {"sector": spectrum.sector}
    if cfg is not None:
        meta.update(N=cfg.N, p=cfg.p, mode=cfg.mode, seed=cfg.master_seed, index=cfg.realization_index)
    write_csv(path, {"sigma": spectrum.values}, meta)


def export_spacing_stats(path, stats, metadata: dict) -> None:
    write_csv(path, {"r": np.concatenate([s.r_values for s in stats])}, metadata)


def export_histogram(path, hist, metadata: dict) -> None:
    write_csv(path, {"bin_lo": hist.bin_edges[:-1], "bin_hi": hist.bin_edges[1:], "density": hist.densities},
              metadata)


def export_curve(path, t, values, metadata: dict, value_name: str = "value") -> None:
    """Curve CSV plus a JSON manifest next to it (same stem, .json)."""
    path = Path(path)
    write_csv(path, {"t": t, value_name: values}, metadata)
    write_json(path.with_suffix(".json"), metadata)
