"""Run-length codec for binary masks on the stream protocol.

A mask is flattened row-major and encoded as 16-bit little-endian run
lengths that alternate between 0-pixels and 1-pixels, always starting
with a 0-run (which may have length zero). Runs longer than 65535 are
split with zero-length runs of the opposite value.
"""

from __future__ import annotations

import numpy as np

MAX_RUN = 0xFFFF


def encode_mask(mask: np.ndarray) -> bytes:
    flat = np.asarray(mask).ravel().astype(np.uint8)
    if flat.size == 0:
        return np.asarray([0], dtype="<u2").tobytes()
    change = np.flatnonzero(np.diff(flat)) + 1
    boundaries = np.concatenate([[0], change, [flat.size]])
    lengths = np.diff(boundaries)
    runs: list[int] = []
    if flat[0] == 1:
        runs.append(0)  # zero-length leading 0-run keeps the alternation
    for run in lengths:
        run = int(run)
        while run > MAX_RUN:
            runs += [MAX_RUN, 0]
            run -= MAX_RUN
        runs.append(run)
    return np.asarray(runs, dtype="<u2").tobytes()


def decode_mask(data: bytes, shape: tuple[int, int]) -> np.ndarray:
    """Inverse of encode_mask; raises if runs do not cover `shape` exactly."""
    runs = np.frombuffer(data, dtype="<u2")
    total = int(runs.sum())
    expected = shape[0] * shape[1]
    if total != expected:
        raise ValueError(f"RLE runs sum to {total}, expected {expected}")
    flat = np.zeros(expected, dtype=np.uint8)
    pos = 0
    value = 0
    for run in runs:
        if value:
            flat[pos : pos + run] = 1
        pos += int(run)
        value ^= 1
    return flat.reshape(shape)
