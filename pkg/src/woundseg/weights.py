"""Single-file weight archive: JSON manifest + raw little-endian tensors.

Layout: 4-byte magic ``WSA1``, 8-byte little-endian header length, UTF-8
JSON header, then the concatenated tensor payload. The header's ``meta``
block records variant, build seed, and training provenance; ``tensors``
maps each state-dict entry to dtype, shape, byte offset and length.
Loading validates the whole archive against the target network before any
weight is touched, so a failed load never leaves a partially-updated net.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np
import torch

from .errors import WeightArchiveError

MAGIC = b"WSA1"

_DTYPES = {
    torch.float32: "<f4",
    torch.float64: "<f8",
    torch.float16: "<f2",
    torch.int64: "<i8",
    torch.int32: "<i4",
    torch.uint8: "|u1",
    torch.bool: "|b1",
}
_TORCH_DTYPES = {v: k for k, v in _DTYPES.items()}


def save_weights(network: torch.nn.Module, path: Path | str,
                 provenance: dict | None = None) -> Path:
    """Serialize all parameters and buffers of `network` to one archive."""
    path = Path(path)
    state = network.state_dict()
    entries = []
    chunks = []
    offset = 0
    for name, tensor in state.items():
        if tensor.dtype not in _DTYPES:
            raise WeightArchiveError(f"unsupported dtype {tensor.dtype} for {name}")
        dtype = _DTYPES[tensor.dtype]
        array = tensor.detach().cpu().contiguous().numpy().astype(dtype, copy=False)
        raw = array.tobytes()
        entries.append({
            "name": name,
            "dtype": dtype,
            "shape": list(tensor.shape),
            "offset": offset,
            "nbytes": len(raw),
        })
        chunks.append(raw)
        offset += len(raw)
    header = {
        "meta": {
            "variant": getattr(network, "variant", None),
            "seed": getattr(network, "seed", None),
            "provenance": provenance or {},
        },
        "tensors": entries,
    }
    header_bytes = json.dumps(header).encode("utf-8")
    tmp = path.with_suffix(path.suffix + ".tmp")
    with open(tmp, "wb") as f:
        f.write(MAGIC)
        f.write(len(header_bytes).to_bytes(8, "little"))
        f.write(header_bytes)
        for raw in chunks:
            f.write(raw)
    tmp.replace(path)
    return path


def read_archive(path: Path | str) -> tuple[dict, bytes]:
    """Parse and integrity-check an archive; returns (header, payload)."""
    data = Path(path).read_bytes()
    if len(data) < 12 or data[:4] != MAGIC:
        raise WeightArchiveError(f"{path}: not a weight archive (bad magic)")
    header_len = int.from_bytes(data[4:12], "little")
    if len(data) < 12 + header_len:
        raise WeightArchiveError(f"{path}: truncated archive header")
    try:
        header = json.loads(data[12 : 12 + header_len].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise WeightArchiveError(f"{path}: corrupt archive header: {exc}") from exc
    payload = data[12 + header_len :]
    expected = sum(e["nbytes"] for e in header["tensors"])
    if len(payload) != expected:
        raise WeightArchiveError(
            f"{path}: truncated archive payload "
            f"({len(payload)} bytes, manifest expects {expected})"
        )
    return header, payload


def read_archive_meta(path: Path | str) -> dict:
    header, _ = read_archive(path)
    return header["meta"]


def load_weights(network: torch.nn.Module, path: Path | str) -> dict:
    """Load an archive into `network`; returns the archive's meta block.

    Every tensor name, shape and dtype is checked against the network's
    state dict first; a mismatch raises naming the first offending tensor
    and nothing is mutated.
    """
    header, payload = read_archive(path)
    state = network.state_dict()
    archive_entries = {e["name"]: e for e in header["tensors"]}

    for name in sorted(set(state) | set(archive_entries)):
        if name not in archive_entries:
            raise WeightArchiveError(
                f"{path}: archive is missing tensor {name!r} "
                f"(archive variant: {header['meta'].get('variant')})"
            )
        if name not in state:
            raise WeightArchiveError(
                f"{path}: archive has unexpected tensor {name!r} "
                f"(archive variant: {header['meta'].get('variant')})"
            )
        entry = archive_entries[name]
        if list(state[name].shape) != entry["shape"]:
            raise WeightArchiveError(
                f"{path}: shape mismatch for {name!r}: "
                f"network {list(state[name].shape)} vs archive {entry['shape']}"
            )
        if entry["dtype"] not in _TORCH_DTYPES:
            raise WeightArchiveError(f"{path}: unknown dtype {entry['dtype']} for {name!r}")
        if _TORCH_DTYPES[entry["dtype"]] != state[name].dtype:
            raise WeightArchiveError(
                f"{path}: dtype mismatch for {name!r}: "
                f"network {state[name].dtype} vs archive {entry['dtype']}"
            )

    new_state = {}
    for name, entry in archive_entries.items():
        raw = payload[entry["offset"] : entry["offset"] + entry["nbytes"]]
        array = np.frombuffer(raw, dtype=entry["dtype"]).reshape(entry["shape"])
        new_state[name] = torch.from_numpy(array.copy())
    network.load_state_dict(new_state)
    return header["meta"]
