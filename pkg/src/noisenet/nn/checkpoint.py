"""Binary checkpoint container: bit-exact round-trips for deterministic inference.

Layout:

    magic "OSNT" | format version u32 LE | header length u32 LE
    | UTF-8 JSON header | float64 LE parameter blob | CRC32 of blob, u32 LE

The header carries the network config, a parameter manifest (name, shape,
offset in float64 elements), the duration statistics, and the model
version. The blob holds trainable parameters, batchnorm running
statistics, and optionally the Adam moments, in manifest order.
"""

from __future__ import annotations

import dataclasses
import json
import zlib
from pathlib import Path

import numpy as np

from ..errors import CorruptCheckpoint, VersionUnsupported
from ..preprocess import DurationStats
from .adam import AdamState
from .network import INFER, PARAM_NAMES, STAT_NAMES, Network, NetworkConfig

MAGIC = b"OSNT"
FORMAT_VERSION = 1


def _manifest_arrays(net: Network, adam_state: AdamState | None):
    arrays = [(name, net.params[name]) for name in PARAM_NAMES]
    arrays += [(name, net.stats[name]) for name in STAT_NAMES]
    if adam_state is not None:
        arrays += [(f"adam_m.{name}", adam_state.m[name]) for name in PARAM_NAMES]
        arrays += [(f"adam_v.{name}", adam_state.v[name]) for name in PARAM_NAMES]
    return arrays


def save_checkpoint(net: Network, adam_state: AdamState | None, path) -> None:
    """Write the network (and optionally optimizer state) to ``path``."""
    arrays = _manifest_arrays(net, adam_state)
    manifest = []
    offset = 0
    chunks = []
    for name, arr in arrays:
        arr = np.ascontiguousarray(arr, dtype=np.float64)
        manifest.append({"name": name, "shape": list(arr.shape), "offset": offset})
        offset += arr.size
        chunks.append(arr.reshape(-1))
    blob = np.concatenate(chunks) if chunks else np.empty(0)
    blob_bytes = blob.astype("<f8").tobytes()
    header = {
        "config": dataclasses.asdict(net.config),
        "manifest": manifest,
        "duration_stats": dataclasses.asdict(net.duration_stats)
        if net.duration_stats is not None
        else None,
        "model_version": net.version,
        "adam_t": adam_state.t if adam_state is not None else None,
    }
    header_bytes = json.dumps(header, sort_keys=True).encode("utf-8")
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(FORMAT_VERSION.to_bytes(4, "little"))
        fh.write(len(header_bytes).to_bytes(4, "little"))
        fh.write(header_bytes)
        fh.write(blob_bytes)
        fh.write(zlib.crc32(blob_bytes).to_bytes(4, "little"))


def _read_exact(fh, n: int, what: str) -> bytes:
    data = fh.read(n)
    if len(data) != n:
        raise CorruptCheckpoint(f"truncated checkpoint while reading {what}")
    return data


def load_checkpoint_full(path) -> tuple[Network, AdamState | None]:
    """Read a checkpoint back; returns the network and any saved Adam state."""
    with open(path, "rb") as fh:
        magic = _read_exact(fh, 4, "magic")
        if magic != MAGIC:
            raise CorruptCheckpoint(f"bad magic {magic!r}")
        version = int.from_bytes(_read_exact(fh, 4, "format version"), "little")
        if version != FORMAT_VERSION:
            raise VersionUnsupported(f"checkpoint format version {version} not supported")
        header_len = int.from_bytes(_read_exact(fh, 4, "header length"), "little")
        try:
            header = json.loads(_read_exact(fh, header_len, "header"))
        except json.JSONDecodeError as exc:
            raise CorruptCheckpoint(f"unreadable header: {exc}") from exc
        manifest = header["manifest"]
        total = sum(int(np.prod(entry["shape"])) for entry in manifest)
        blob_bytes = _read_exact(fh, total * 8, "parameter blob")
        stored_crc = int.from_bytes(_read_exact(fh, 4, "checksum"), "little")
    if zlib.crc32(blob_bytes) != stored_crc:
        raise CorruptCheckpoint("parameter blob failed its checksum")

    blob = np.frombuffer(blob_bytes, dtype="<f8")
    arrays: dict[str, np.ndarray] = {}
    for entry in manifest:
        size = int(np.prod(entry["shape"]))
        start = entry["offset"]
        arrays[entry["name"]] = (
            blob[start : start + size].reshape(entry["shape"]).astype(np.float64)
        )

    config = NetworkConfig(**header["config"])
    missing = [n for n in PARAM_NAMES + STAT_NAMES if n not in arrays]
    if missing:
        raise CorruptCheckpoint(f"manifest missing arrays: {missing}")
    stats_dict = header.get("duration_stats")
    duration_stats = DurationStats(**stats_dict) if stats_dict is not None else None
    net = Network(
        config=config,
        params={name: arrays[name] for name in PARAM_NAMES},
        stats={name: arrays[name] for name in STAT_NAMES},
        duration_stats=duration_stats,
        version=header["model_version"],
        mode=INFER,
    )
    adam = None
    if header.get("adam_t") is not None:
        adam = AdamState(
            m={name: arrays[f"adam_m.{name}"] for name in PARAM_NAMES},
            v={name: arrays[f"adam_v.{name}"] for name in PARAM_NAMES},
            t=int(header["adam_t"]),
        )
    return net, adam


def load_checkpoint(path) -> Network:
    return load_checkpoint_full(path)[0]
