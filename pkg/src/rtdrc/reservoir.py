"""Reservoir forward pass: voltage frames through the diode array.

The diode model is memoryless, so the reservoir state of a frame is the
flattened per-pulse current vector (row-major: diode-major, pulse-minor)
with a trailing bias entry of 1.0. Stacking states for k frames gives
the k x j state matrix consumed by the readout, j = n*m + 1.
"""

from __future__ import annotations

import csv

import numpy as np

from .device import DeviceParams, total_current

# Sanity bound on drive amplitude; frames beyond this are rejected.
V_SUPPORTED = 10.0

# Rows per block when evaluating large batches; keeps peak memory flat
# without affecting results (each row lands in its pre-assigned slot).
_BLOCK_ROWS = 4096


def _check_frame(frame) -> np.ndarray:
    arr = np.asarray(frame, dtype=np.float64)
    if arr.ndim != 2 or arr.size == 0:
        raise ValueError(f"voltage frame must be a non-empty 2-D array, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError("voltage frame contains non-finite entries")
    peak = np.abs(arr).max()
    if peak > V_SUPPORTED:
        raise ValueError(f"frame peak {peak} V exceeds supported range +/-{V_SUPPORTED} V")
    return arr


def forward(frame, params: DeviceParams) -> np.ndarray:
    """Evaluate one frame: currents for every pulse, plus the bias entry."""
    arr = _check_frame(frame)
    currents = np.asarray(total_current(arr, params))
    return np.concatenate([currents.ravel(order="C"), [1.0]])


def forward_batch(frames, params: DeviceParams) -> np.ndarray:
    """Evaluate a batch of same-shaped frames into a k x (n*m + 1) matrix.

    Row order follows input order and each row equals forward() on that
    frame; an empty batch or mixed shapes raise ValueError.
    """
    frames = list(frames)
    if not frames:
        raise ValueError("forward_batch requires at least one frame")
    first = _check_frame(frames[0])
    shape = first.shape
    out = np.empty((len(frames), first.size + 1), dtype=np.float64)
    out[:, -1] = 1.0
    stack = np.empty((len(frames),) + shape, dtype=np.float64)
    stack[0] = first
    for i, frame in enumerate(frames[1:], start=1):
        arr = _check_frame(frame)
        if arr.shape != shape:
            raise ValueError(f"frame {i} has shape {arr.shape}, expected {shape}")
        stack[i] = arr
    for lo in range(0, len(frames), _BLOCK_ROWS):
        hi = min(lo + _BLOCK_ROWS, len(frames))
        block = np.asarray(total_current(stack[lo:hi], params))
        out[lo:hi, :-1] = block.reshape(hi - lo, -1)
    return out


def states_to_csv(states, path) -> None:
    """Write a state matrix as CSV with header f0..f{j-1}."""
    states = np.asarray(states, dtype=np.float64)
    if states.ndim != 2:
        raise ValueError("state matrix must be 2-D")
    with open(path, "w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow([f"f{i}" for i in range(states.shape[1])])
        for row in states:
            writer.writerow([repr(float(x)) for x in row])


def states_from_csv(path) -> np.ndarray:
    """Read back a state matrix written by states_to_csv."""
    with open(path, newline="") as f:
        reader = csv.reader(f)
        header = next(reader)
        if header != [f"f{i}" for i in range(len(header))]:
            raise ValueError(f"unexpected state CSV header in {path}")
        rows = [[float(x) for x in row] for row in reader]
    return np.asarray(rows, dtype=np.float64).reshape(len(rows), len(header))
