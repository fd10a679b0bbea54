"""Dataset file format: JSON Lines with a header line.

Line 1 is ``{"format": "stylebc-dataset", "version": 1, "meta": {...}}``;
every following line is one trajectory object. Floats are written with
Python's repr (shortest round-trip), so save/load is bit-exact.
"""
from __future__ import annotations

import json
import os
from pathlib import Path

from .types import Dataset, Trajectory

FORMAT_NAME = "stylebc-dataset"
FORMAT_VERSION = 1


def trajectory_to_obj(traj: Trajectory) -> dict:
    return {
        "id": traj.id,
        "states": [[float(x), float(y)] for x, y in traj.states],
        "actions": [[float(dx), float(dy)] for dx, dy in traj.actions],
        "checkpoints": list(traj.checkpoints),
        "success": traj.success,
    }


def trajectory_from_obj(obj: dict) -> Trajectory:
    return Trajectory(
        id=int(obj["id"]),
        states=obj["states"],
        actions=obj["actions"],
        checkpoints=tuple(obj["checkpoints"]),
        success=bool(obj["success"]),
    )


def _header_line(meta: dict) -> str:
    header = {"format": FORMAT_NAME, "version": FORMAT_VERSION, "meta": meta}
    return json.dumps(header, sort_keys=True, separators=(",", ":"))


def save_dataset(dataset: Dataset, path: str | Path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(_header_line(dataset.meta) + "\n")
        for traj in dataset:
            fh.write(json.dumps(trajectory_to_obj(traj), separators=(",", ":")) + "\n")


def load_dataset(path: str | Path) -> Dataset:
    with open(path, encoding="utf-8") as fh:
        first = fh.readline()
        if not first:
            raise ValueError(f"{path}: empty dataset file")
        header = json.loads(first)
        if header.get("format") != FORMAT_NAME:
            raise ValueError(f"{path}: not a {FORMAT_NAME} file")
        if header.get("version") != FORMAT_VERSION:
            raise ValueError(f"{path}: unsupported version {header.get('version')}")
        trajectories = [trajectory_from_obj(json.loads(line)) for line in fh if line.strip()]
    return Dataset(trajectories=trajectories, meta=header.get("meta", {}))


def append_trajectory(path: str | Path, traj: Trajectory, meta: dict | None = None) -> int:
    """Append one trajectory, creating the file (with header) if needed.

    The trajectory is re-id'd to the next free index so ids stay contiguous.
    Returns the assigned id.
    """
    path = Path(path)
    if not path.exists() or path.stat().st_size == 0:
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(_header_line(meta or {}) + "\n")
        next_id = 0
    else:
        with open(path, encoding="utf-8") as fh:
            header = json.loads(fh.readline())
            if header.get("format") != FORMAT_NAME:
                raise ValueError(f"{path}: not a {FORMAT_NAME} file")
            next_id = sum(1 for line in fh if line.strip())
    reindexed = Trajectory(
        id=next_id,
        states=traj.states,
        actions=traj.actions,
        checkpoints=traj.checkpoints,
        success=traj.success,
    )
    with open(path, "a", encoding="utf-8") as fh:
        fh.write(json.dumps(trajectory_to_obj(reindexed), separators=(",", ":")) + "\n")
    return next_id
