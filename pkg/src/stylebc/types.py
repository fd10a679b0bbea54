"""Shared domain types: trajectories, datasets, behavior labels, seeded RNG streams.

Conventions used across the package:

* a state is a float64 array ``[x, y]`` in maze units; stacked sequences have
  shape ``(T, 2)``
* an action is a float64 array ``[dx, dy]``; the simulator clamps each
  component to ``[-1, 1]``
* checkpoint index 0 is reserved for the goal; a behavior label is the
  concatenation of checkpoint indices in first-visit order
"""
from __future__ import annotations

import hashlib
from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

FAIL_LABEL = "FAIL"
GOAL_INDEX = 0


def as_points(seq) -> np.ndarray:
    """Coerce a sequence of [x, y] pairs to a read-only (N, 2) float64 array."""
    arr = np.ascontiguousarray(np.asarray(seq, dtype=np.float64))
    if arr.ndim != 2 or arr.shape[1] != 2:
        raise ValueError(f"expected (N, 2) point array, got shape {arr.shape}")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class Trajectory:
    """One episode: states (T+1, 2), actions (T, 2), visited checkpoints, outcome."""

    id: int
    states: np.ndarray
    actions: np.ndarray
    checkpoints: tuple[int, ...]
    success: bool

    def __post_init__(self):
        object.__setattr__(self, "states", as_points(self.states))
        object.__setattr__(self, "actions", as_points(self.actions))
        object.__setattr__(self, "checkpoints", tuple(int(c) for c in self.checkpoints))
        if len(self.states) != len(self.actions) + 1:
            raise ValueError(
                f"trajectory {self.id}: {len(self.states)} states vs "
                f"{len(self.actions)} actions (want T+1 vs T)"
            )
        if len(self.states) < 2:
            raise ValueError(f"trajectory {self.id}: needs at least 2 states")
        if not np.isfinite(self.states).all() or not np.isfinite(self.actions).all():
            raise ValueError(f"trajectory {self.id}: non-finite values")
        ends_at_goal = bool(self.checkpoints) and self.checkpoints[-1] == GOAL_INDEX
        if ends_at_goal != self.success:
            raise ValueError(
                f"trajectory {self.id}: success={self.success} but checkpoints "
                f"{'end' if ends_at_goal else 'do not end'} with the goal"
            )

    @property
    def length(self) -> int:
        """Number of transitions (actions)."""
        return len(self.actions)


def behavior_from_checkpoints(checkpoints: Sequence[int]) -> str:
    """Behavior label for a visit sequence; FAIL when the goal was never reached.

    Indices 0-9 concatenate to a digit string ("6410"); any index >= 10 forces
    a dash-delimited rendering so labels stay unambiguous.
    """
    cps = [int(c) for c in checkpoints]
    if not cps or cps[-1] != GOAL_INDEX:
        return FAIL_LABEL
    if any(c >= 10 for c in cps):
        return "-".join(str(c) for c in cps)
    return "".join(str(c) for c in cps)


def behavior_of(traj: Trajectory) -> str:
    """Behavior label of a trajectory (depends only on its checkpoint sequence)."""
    return behavior_from_checkpoints(traj.checkpoints)


def histogram(behaviors: Sequence[str]) -> dict[str, float]:
    """Normalized frequency of each behavior label.

    Returns a dict sorted by label whose values sum to 1. Raises on an empty
    sample since an empty histogram has no normalization.
    """
    if len(behaviors) == 0:
        raise ValueError("empty sample")
    counts = Counter(behaviors)
    n = len(behaviors)
    return {label: counts[label] / n for label in sorted(counts)}


@dataclass
class Dataset:
    """Ordered trajectory collection with ids 0..n-1 plus generation metadata."""

    trajectories: list[Trajectory]
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        for want, traj in enumerate(self.trajectories):
            if traj.id != want:
                raise ValueError(f"trajectory ids must be contiguous from 0, got {traj.id} at {want}")

    def __len__(self) -> int:
        return len(self.trajectories)

    def __iter__(self):
        return iter(self.trajectories)

    def __getitem__(self, i: int) -> Trajectory:
        return self.trajectories[i]

    def behaviors(self) -> list[str]:
        return [behavior_of(t) for t in self.trajectories]

    def behavior_histogram(self) -> dict[str, float]:
        return histogram(self.behaviors())

    def lengths(self) -> np.ndarray:
        return np.array([t.length for t in self.trajectories], dtype=np.int64)


@dataclass(frozen=True)
class RngStream:
    """Named, seeded randomness source, reproducible across runs and platforms.

    The (seed, name) pair is hashed into the generator's seed material, so
    equal pairs always replay the same draw sequence and derived streams are
    statistically independent of their parent.
    """

    seed: int
    name: str = "root"

    def derive(self, suffix: str | int) -> "RngStream":
        return RngStream(self.seed, f"{self.name}/{suffix}")

    def generator(self) -> np.random.Generator:
        digest = hashlib.sha256(f"{self.seed}:{self.name}".encode()).digest()
        entropy = int.from_bytes(digest[:16], "little")
        return np.random.Generator(np.random.PCG64(np.random.SeedSequence(entropy)))
