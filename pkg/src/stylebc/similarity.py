"""Trajectory dissimilarity and exponential relabeling weights.

State sequences are padded to a common length by repeating their last
state, compared as flattened euclidean distances, and row-normalized by
each reference trajectory's own maximum.  The resulting matrix is
asymmetric by construction; consumers always use it with an ordered
(data, style) role.  Weights are exp(-beta * nu).
"""

from __future__ import annotations

import struct
from dataclasses import dataclass

import numpy as np

from .types import Dataset, Trajectory

CACHE_MAGIC = b"SWRNU1"


def pad_states(traj, L: int) -> np.ndarray:
    """States of traj extended to length L by repeating the last state."""
    states = traj.states if isinstance(traj, Trajectory) else np.asarray(traj, dtype=np.float64)
    n = len(states)
    if L < n:
        raise ValueError("pad shorter than trajectory")
    if L == n:
        return np.array(states, dtype=np.float64)
    tail = np.repeat(states[-1][None, :], L - n, axis=0)
    return np.concatenate([states, tail], axis=0)


def raw_distance(a: np.ndarray, b: np.ndarray) -> float:
    """Euclidean norm of the stacked per-timestep state differences."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise ValueError("length mismatch")
    return float(np.linalg.norm((a - b).ravel()))


@dataclass(frozen=True)
class DissimilarityMatrix:
    nu: np.ndarray  # (n, n), row-normalized, diagonal 0
    pad_length: int  # common padded state-sequence length

    def __post_init__(self):
        nu = np.asarray(self.nu, dtype=np.float64)
        if nu.ndim != 2 or nu.shape[0] != nu.shape[1]:
            raise ValueError("nu must be square")
        if not np.all(np.isfinite(nu)):
            raise ValueError("non-finite dissimilarity")
        if np.any(np.diag(nu) != 0.0):
            raise ValueError("diagonal must be exactly 0")
        if nu.min() < 0.0 or nu.max() > 1.0:
            raise ValueError("entries must lie in [0, 1]")
        n = nu.shape[0]
        if n >= 2:
            off = nu + np.diag(np.full(n, -np.inf))
            if np.any(np.abs(off.max(axis=1) - 1.0) > 1e-12):
                raise ValueError("each row's off-diagonal max must be 1")
        nu = nu.copy()
        nu.flags.writeable = False
        object.__setattr__(self, "nu", nu)

    def __len__(self) -> int:
        return self.nu.shape[0]


def dissimilarity_matrix(dataset: Dataset) -> DissimilarityMatrix:
    n = len(dataset)
    if n < 2:
        raise ValueError("need at least 2 trajectories")
    L = max(len(t.states) for t in dataset)
    flat = np.stack([pad_states(t, L).ravel() for t in dataset])
    raw = np.empty((n, n), dtype=np.float64)
    block = max(1, int(2**22 // max(flat.shape[1], 1)))  # ~32 MB per block
    for lo in range(0, n, block):
        hi = min(lo + block, n)
        diff = flat[lo:hi, None, :] - flat[None, :, :]
        raw[lo:hi] = np.sqrt(np.einsum("ijk,ijk->ij", diff, diff))
    np.fill_diagonal(raw, 0.0)
    row_max = raw.max(axis=1)
    if np.any(row_max == 0.0):
        raise ValueError("degenerate dataset: identical trajectories")
    nu = raw / row_max[:, None]
    np.fill_diagonal(nu, 0.0)
    return DissimilarityMatrix(nu=nu, pad_length=L)


def indicator_dissimilarity(n: int) -> DissimilarityMatrix:
    """nu(i,j) = 1(i != j); with large beta this is the per-trajectory limit."""
    nu = 1.0 - np.eye(n)
    return DissimilarityMatrix(nu=nu, pad_length=0)


def weight(nu_ij, beta: float):
    """exp(-beta * nu); beta=0 gives weight 1 everywhere."""
    if beta < 0:
        raise ValueError("beta must be >= 0")
    return np.exp(-beta * np.asarray(nu_ij, dtype=np.float64))


def save_matrix(path, mat: DissimilarityMatrix):
    with open(path, "wb") as fh:
        fh.write(CACHE_MAGIC)
        fh.write(struct.pack("<QQ", len(mat), mat.pad_length))
        fh.write(np.ascontiguousarray(mat.nu).tobytes())


def load_matrix(path) -> DissimilarityMatrix:
    with open(path, "rb") as fh:
        magic = fh.read(len(CACHE_MAGIC))
        if magic != CACHE_MAGIC:
            raise ValueError(f"not a dissimilarity cache: bad magic {magic!r}")
        n, pad_length = struct.unpack("<QQ", fh.read(16))
        data = np.frombuffer(fh.read(8 * n * n), dtype="<f8")
        if data.size != n * n:
            raise ValueError("truncated dissimilarity cache")
    return DissimilarityMatrix(nu=data.reshape(n, n), pad_length=int(pad_length))
