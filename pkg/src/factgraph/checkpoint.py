"""Versioned binary checkpoints.

Layout: 4-byte magic, uint32 version, uint64 header length, JSON header,
then raw little-endian float64 tensor data. The header carries the full
config and a per-tensor manifest (name, shape, offset, count), so shape
mismatches are detected before any data is interpreted. Serialization is
canonical (sorted keys, no whitespace), making checkpoints byte-stable
under identical runs.
"""

from __future__ import annotations

import json
import struct

import numpy as np

from .config import TrainConfig, config_from_dict, config_to_dict
from .errors import DimensionError, ParseError
from .model import ModelParams

MAGIC = b"FGCP"
VERSION = 1


def save_checkpoint(path: str, params: ModelParams, config: TrainConfig) -> None:
    tensors = params.named()
    manifest = []
    offset = 0
    blobs = []
    for name, t in tensors:
        arr = np.ascontiguousarray(t.data, dtype="<f8")
        manifest.append({"name": name, "shape": list(t.data.shape),
                         "offset": offset, "count": int(arr.size)})
        blobs.append(arr.tobytes())
        offset += arr.size
    header = {"config": config_to_dict(config),
              "embed_dim": params.embed_dim,
              "tensors": manifest}
    header_bytes = json.dumps(header, sort_keys=True,
                              separators=(",", ":")).encode("utf-8")
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<I", VERSION))
        fh.write(struct.pack("<Q", len(header_bytes)))
        fh.write(header_bytes)
        for blob in blobs:
            fh.write(blob)


def load_checkpoint(path: str) -> tuple[TrainConfig, int, dict[str, np.ndarray]]:
    """Returns (config, embed_dim, arrays-by-name); validates the manifest."""
    with open(path, "rb") as fh:
        raw = fh.read()
    if raw[:4] != MAGIC:
        raise ParseError(f"{path}: not a checkpoint file (bad magic)")
    (version,) = struct.unpack_from("<I", raw, 4)
    if version != VERSION:
        raise ParseError(f"{path}: unsupported checkpoint version {version}")
    (header_len,) = struct.unpack_from("<Q", raw, 8)
    header_start = 16
    data_start = header_start + header_len
    try:
        header = json.loads(raw[header_start:data_start].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise ParseError(f"{path}: corrupt checkpoint header: {exc}") from None
    config = config_from_dict(header["config"])
    arrays: dict[str, np.ndarray] = {}
    data = raw[data_start:]
    for entry in header["tensors"]:
        start = entry["offset"] * 8
        stop = start + entry["count"] * 8
        if stop > len(data):
            raise ParseError(f"{path}: truncated tensor data for {entry['name']!r}")
        arr = np.frombuffer(data[start:stop], dtype="<f8").astype(np.float64)
        arrays[entry["name"]] = arr.reshape(entry["shape"])
    return config, int(header["embed_dim"]), arrays


def restore_model_params(config: TrainConfig, embed_dim: int,
                         arrays: dict[str, np.ndarray]) -> ModelParams:
    """Rebuild ModelParams from a loaded checkpoint, verifying every shape."""
    params = ModelParams.init(config, embed_dim, np.random.default_rng(0))
    expected = {name for name, _ in params.named()}
    extra = set(arrays) - expected
    if extra:
        raise DimensionError(
            f"checkpoint contains tensors the config does not declare: "
            f"{sorted(extra)}")
    params.restore(arrays)  # raises DimensionError naming any shape mismatch
    return params
