"""Flat named-tensor container.

Layout: the 4-byte magic ``NTC1``, an unsigned little-endian 64-bit header length,
a UTF-8 JSON manifest, then the concatenated tensor payloads. The manifest lists every
tensor as ``{"name", "shape", "dtype", "offset", "nbytes"}`` (offsets relative to the
payload start) plus a free-form ``metadata`` object. Payloads are little-endian.
"""
import json
import struct
from pathlib import Path
from typing import Any, Dict, Mapping, Tuple

import numpy as np
import torch

from .exceptions import ConfigurationError

MAGIC = b"NTC1"
_DTYPES = {
    "float32": "<f4",
    "float64": "<f8",
    "int64": "<i8",
    "int32": "<i4",
    "uint8": "u1",
    "bool": "u1",
}


def _as_numpy(value: Any) -> np.ndarray:
    if isinstance(value, torch.Tensor):
        value = value.detach().cpu().numpy()
    array = np.asarray(value)
    if array.dtype == np.bool_:
        return array
    if array.dtype.name not in _DTYPES:
        raise ConfigurationError(f"Unsupported tensor dtype {array.dtype}")
    return array


def save_tensors(path: str | Path, tensors: Mapping[str, Any], metadata: Dict[str, Any] | None = None) -> None:
    entries = []
    payload = bytearray()
    for name in sorted(tensors):
        array = _as_numpy(tensors[name])
        dtype_name = array.dtype.name
        raw = np.ascontiguousarray(array.astype(_DTYPES[dtype_name])).tobytes()
        entries.append({
            "name": name,
            "shape": list(array.shape),
            "dtype": dtype_name,
            "offset": len(payload),
            "nbytes": len(raw),
        })
        payload.extend(raw)
    header = json.dumps({"tensors": entries, "metadata": metadata or {}}, sort_keys=True).encode("utf-8")
    path = Path(path)
    tmp = path.with_suffix(path.suffix + ".tmp")
    with open(tmp, "wb") as handle:
        handle.write(MAGIC)
        handle.write(struct.pack("<Q", len(header)))
        handle.write(header)
        handle.write(bytes(payload))
    tmp.replace(path)


def load_tensors(path: str | Path) -> Tuple[Dict[str, np.ndarray], Dict[str, Any]]:
    path = Path(path)
    if not path.is_file():
        raise ConfigurationError(f"Tensor container not found: {path}")
    data = path.read_bytes()
    if data[:4] != MAGIC:
        raise ConfigurationError(f"{path} is not a named-tensor container")
    (header_len,) = struct.unpack("<Q", data[4:12])
    manifest = json.loads(data[12:12 + header_len].decode("utf-8"))
    base = 12 + header_len
    tensors: Dict[str, np.ndarray] = {}
    for entry in manifest["tensors"]:
        start = base + entry["offset"]
        chunk = data[start:start + entry["nbytes"]]
        array = np.frombuffer(chunk, dtype=_DTYPES[entry["dtype"]]).reshape(entry["shape"])
        if entry["dtype"] == "bool":
            array = array.astype(np.bool_)
        else:
            array = array.astype(entry["dtype"])
        tensors[entry["name"]] = array
    return tensors, manifest.get("metadata", {})
