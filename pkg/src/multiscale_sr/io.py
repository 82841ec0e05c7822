"""File formats: CSV signals, 16-bit PGM with a linear-scale sidecar, JSON manifests.

PGM stores ``round((v - offset) * maxval / span)`` and the sidecar
``<name>.pgm.json`` holds ``offset`` and ``span`` so values can be mapped back.
"""

from __future__ import annotations

import hashlib
import json
import re
import time
from pathlib import Path
from typing import Iterable

import numpy as np

from .signals import GridSignal, MeasurementSet

MANIFEST_VERSION = "1.0.0"
MAXVAL = 65535


class FormatError(ValueError):
    pass


# --- CSV --------------------------------------------------------------------

def write_csv(path, signal) -> None:
    values = signal.values if isinstance(signal, GridSignal) else np.asarray(signal, dtype=float)
    with open(path, "w") as fh:
        if values.ndim == 1:
            fh.writelines(f"{v!r}\n" for v in values.tolist())
        else:
            for row in values.tolist():
                fh.write(",".join(repr(v) for v in row) + "\n")


def read_csv(path) -> GridSignal:
    rows = []
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            rows.append([float(tok) for tok in line.split(",")])
    if not rows:
        raise FormatError(f"{path}: empty CSV")
    widths = {len(r) for r in rows}
    if len(widths) != 1:
        raise FormatError(f"{path}: ragged CSV rows")
    arr = np.array(rows)
    return GridSignal(arr[:, 0] if arr.shape[1] == 1 else arr)


# --- PGM --------------------------------------------------------------------

def write_pgm(path, signal, binary: bool = False) -> None:
    """Write a 2-D signal as 16-bit PGM plus a JSON scale sidecar."""
    values = signal.values if isinstance(signal, GridSignal) else np.asarray(signal, dtype=float)
    if values.ndim == 1:
        values = values[None, :]
    offset = float(values.min())
    span = float(values.max() - offset)
    if span > 0:
        stored = np.rint((values - offset) * MAXVAL / span).astype(np.uint16)
    else:
        stored = np.zeros(values.shape, dtype=np.uint16)
    rows, cols = stored.shape
    path = Path(path)
    with open(path, "wb") as fh:
        fh.write(f"{'P5' if binary else 'P2'}\n{cols} {rows}\n{MAXVAL}\n".encode())
        if binary:
            fh.write(stored.astype(">u2").tobytes())
        else:
            for row in stored:
                fh.write((" ".join(map(str, row.tolist())) + "\n").encode())
    sidecar = {"offset": offset, "span": span, "maxval": MAXVAL}
    Path(str(path) + ".json").write_text(json.dumps(sidecar, indent=2) + "\n")


def _pgm_tokens(data: bytes, count: int) -> tuple[list[bytes], int]:
    """First ``count`` header tokens (comments skipped) and the offset after them."""
    tokens, pos = [], 0
    while len(tokens) < count:
        m = re.compile(rb"\s*(#[^\n]*\n\s*)*(\S+)").match(data, pos)
        if not m:
            raise FormatError("truncated PGM header")
        tokens.append(m.group(2))
        pos = m.end()
    return tokens, pos


def read_pgm(path, raw: bool = False) -> GridSignal:
    """Read P2/P5; values are rescaled with the sidecar when present."""
    path = Path(path)
    data = path.read_bytes()
    (magic, w, h, maxval), pos = _pgm_tokens(data, 4)
    cols, rows, maxval = int(w), int(h), int(maxval)
    if magic == b"P5":
        pos += 1  # single whitespace byte after maxval
        dtype = ">u2" if maxval > 255 else "u1"
        stored = np.frombuffer(data, dtype=dtype, count=rows * cols, offset=pos)
    elif magic == b"P2":
        stored = np.array(data[pos:].split(), dtype=np.int64)
        if stored.size < rows * cols:
            raise FormatError(f"{path}: expected {rows * cols} samples, got {stored.size}")
        stored = stored[: rows * cols]
    else:
        raise FormatError(f"{path}: unsupported PGM magic {magic!r}")
    stored = stored.reshape(rows, cols).astype(float)
    sidecar = Path(str(path) + ".json")
    if raw or not sidecar.exists():
        return GridSignal(stored / maxval)
    meta = json.loads(sidecar.read_text())
    return GridSignal(meta["offset"] + stored * meta["span"] / meta["maxval"])


# --- dispatch ---------------------------------------------------------------

def write_signal(path, signal, binary: bool = False) -> None:
    path = Path(path)
    if path.suffix.lower() in (".pgm", ".pnm"):
        write_pgm(path, signal, binary=binary)
    else:
        write_csv(path, signal)


def read_signal(path) -> GridSignal:
    path = Path(path)
    if path.suffix.lower() in (".pgm", ".pnm"):
        return read_pgm(path)
    return read_csv(path)


# --- manifests --------------------------------------------------------------

def sha256_file(path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def _payload_entries(base: Path, paths: Iterable) -> list[dict]:
    entries = []
    for p in paths:
        p = Path(p)
        entries.append({"path": p.name if p.parent == base else str(p), "sha256": sha256_file(p)})
    return entries


def write_manifest(path, kind: str, payload: Iterable, meta: dict | None = None,
                   argv: list[str] | None = None, seed: int | None = None) -> dict:
    path = Path(path)
    manifest = {
        "version": MANIFEST_VERSION,
        "kind": kind,
        "payload": _payload_entries(path.parent, payload),
        "meta": meta or {},
        "provenance": {
            "command": argv or [],
            "seed": seed,
            "timestamp": time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime()),
        },
    }
    path.write_text(json.dumps(manifest, indent=2) + "\n")
    return manifest


def read_manifest(path, kind: str | None = None) -> dict:
    """Load a manifest, checking its version, kind and payload checksums."""
    path = Path(path)
    try:
        manifest = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise FormatError(f"{path}: not valid JSON ({exc})") from exc
    version = str(manifest.get("version", ""))
    if version.split(".")[0] != MANIFEST_VERSION.split(".")[0]:
        raise FormatError(f"{path}: unsupported manifest version {version!r}")
    if kind is not None and manifest.get("kind") != kind:
        raise FormatError(f"{path}: expected a {kind} manifest, got {manifest.get('kind')!r}")
    for entry in manifest["payload"]:
        p = Path(entry["path"])
        if not p.is_absolute():
            p = path.parent / p
        entry["resolved"] = str(p)
        if sha256_file(p) != entry["sha256"]:
            raise FormatError(f"{p}: checksum mismatch")
    return manifest


def save_measurements(directory, ms: MeasurementSet, fmt: str = "csv", binary: bool = False,
                      argv=None, seed=None, name: str = "measurements") -> Path:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    paths = []
    for k, z in zip(ms.scales, ms.data):
        p = directory / f"{name}_k{k}.{fmt}"
        write_signal(p, z, binary=binary)
        paths.append(p)
    meta = {
        "scales": list(ms.scales),
        "mode": ms.mode.value,
        "normalization": ms.normalization.value,
        "sigma": ms.sigma,
        "source_shape": list(ms.source_shape),
        **ms.meta,
    }
    out = directory / f"{name}.json"
    write_manifest(out, "measurement-set", paths, meta, argv, seed)
    return out


def load_measurements(path) -> MeasurementSet:
    manifest = read_manifest(path, "measurement-set")
    meta = dict(manifest["meta"])
    data = [read_signal(e["resolved"]) for e in manifest["payload"]]
    extra = {k: v for k, v in meta.items()
             if k not in ("scales", "mode", "normalization", "sigma", "source_shape")}
    return MeasurementSet(tuple(meta["scales"]), meta["mode"], meta["normalization"], tuple(data),
                          tuple(meta["source_shape"]), meta.get("sigma", 0.0), extra)


def load_target(path) -> GridSignal:
    """Signal from a target manifest or directly from a CSV/PGM file."""
    path = Path(path)
    if path.suffix == ".json":
        manifest = read_manifest(path, "target")
        return read_signal(manifest["payload"][0]["resolved"])
    return read_signal(path)
