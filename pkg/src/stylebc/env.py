"""Point-mass navigation over cell-grid mazes.

Dynamics: velocity command a in [-1,1]^2, displacement = step_size * a
(plus optional Gaussian noise), resolved axis-separately against wall
cells with clip-and-slide.  Doors and the goal are detected by radius
around their cell centers; the goal is checkpoint 0 and ends the
episode.  All stochastic variants draw from generators handed in by the
caller, so episodes are pure functions of (policy, style, seed).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .maze import MazeSpec
from .types import RngStream, Trajectory

STEP_SIZE = 0.25
CONTACT_EPS = 1e-4

INIT_MODES = ("fixed", "pseudo_random", "fully_random")

# named robustness variants used by the evaluation harness and CLI
VARIANTS = ("deterministic", "pseudo-r-init", "r-init", "noise-transi", "sticky")


@dataclass(frozen=True)
class EnvConfig:
    init_mode: str = "fixed"
    pseudo_radius: float = 1.0
    transition_noise_sigma: float = 0.0
    sticky_walls: bool = False
    stick_steps: int = 3
    max_steps: int = 300
    checkpoint_radius: float = 0.5
    goal_radius: float = 0.5
    seed: int = 0

    def __post_init__(self):
        if self.init_mode not in INIT_MODES:
            raise ValueError(f"unknown init_mode {self.init_mode!r}")
        if self.max_steps < 1:
            raise ValueError("max_steps must be >= 1")
        if self.checkpoint_radius <= 0 or self.goal_radius <= 0:
            raise ValueError("radii must be > 0")
        if self.pseudo_radius < 0 or self.transition_noise_sigma < 0:
            raise ValueError("pseudo_radius and noise sigma must be >= 0")
        if self.stick_steps < 0:
            raise ValueError("stick_steps must be >= 0")


def variant_config(name: str, seed: int = 0, **overrides) -> EnvConfig:
    """EnvConfig for a named robustness variant."""
    base = {
        "deterministic": {},
        "pseudo-r-init": {"init_mode": "pseudo_random"},
        "r-init": {"init_mode": "fully_random"},
        "noise-transi": {"transition_noise_sigma": 0.05},
        "sticky": {"sticky_walls": True},
    }
    if name not in base:
        raise KeyError(f"unknown env variant {name!r}")
    kw = dict(base[name])
    kw.update(overrides)
    return EnvConfig(seed=seed, **kw)


@dataclass
class EnvState:
    position: np.ndarray
    visited: list[int] = field(default_factory=list)
    steps: int = 0
    done: bool = False
    stuck_remaining: int = 0


def clamp_action(action) -> np.ndarray:
    a = np.asarray(action, dtype=np.float64).reshape(2)
    if not np.all(np.isfinite(a)):
        raise ValueError("non-finite action")
    return np.clip(a, -1.0, 1.0)


def _blocked_at(maze: MazeSpec, r: np.ndarray, c: np.ndarray) -> np.ndarray:
    """Vectorized wall lookup; out-of-bounds counts as wall."""
    out = np.ones(r.shape, dtype=bool)
    ok = (r >= 0) & (r < maze.height) & (c >= 0) & (c < maze.width)
    out[ok] = maze.blocked[r[ok], c[ok]]
    return out


def _walk_axis(maze, coord, disp, other_cell, axis, eps):
    """Move coord by disp along one axis, clipping at the first wall face.

    other_cell holds the fixed perpendicular cell index per lane.  Cells
    follow floor(): a point exactly on a face belongs to the right/lower
    cell.  Returns (new_coord, contact).
    """
    coord = coord.copy()
    cell = np.floor(coord).astype(np.int64)
    target = coord + disp
    contact = np.zeros(coord.shape, dtype=bool)

    def blocked(next_cell):
        if axis == 0:  # moving along x: rows fixed
            return _blocked_at(maze, other_cell, next_cell)
        return _blocked_at(maze, next_cell, other_cell)

    right = disp > 0
    cap = int(np.ceil(np.abs(disp).max())) + 2 if coord.size else 0
    for _ in range(cap):
        if not right.any():
            break
        face = cell + 1.0
        inside = right & (target < face)
        coord[inside] = target[inside]
        right &= ~inside
        if not right.any():
            break
        hit = right & blocked(cell + 1)
        coord[hit] = face[hit] - eps
        contact |= hit
        right &= ~hit
        cell[right] += 1

    left = disp < 0
    for _ in range(cap):
        if not left.any():
            break
        face = cell.astype(np.float64)
        # strictly inside, or landing exactly on the current cell's left
        # face (floor keeps it in this cell)
        inside = left & (target >= face)
        coord[inside] = target[inside]
        left &= ~inside
        if not left.any():
            break
        hit = left & blocked(cell - 1)
        coord[hit] = face[hit] + eps
        contact |= hit
        left &= ~hit
        cell[left] -= 1
    return coord, contact


def move_positions(maze: MazeSpec, pos: np.ndarray, disp: np.ndarray,
                   eps: float = CONTACT_EPS):
    """Axis-separated clip-and-slide for a (B, 2) batch of positions."""
    pos = np.asarray(pos, dtype=np.float64)
    disp = np.asarray(disp, dtype=np.float64)
    rows = np.floor(pos[:, 1]).astype(np.int64)
    x, cx = _walk_axis(maze, pos[:, 0], disp[:, 0], rows, 0, eps)
    cols = np.floor(x).astype(np.int64)
    y, cy = _walk_axis(maze, pos[:, 1], disp[:, 1], cols, 1, eps)
    return np.stack([x, y], axis=1), cx | cy


def _as_generator(rng) -> np.random.Generator:
    if isinstance(rng, RngStream):
        return rng.generator()
    return rng


class Env:
    """One maze plus one EnvConfig; episode state lives in EnvState."""

    def __init__(self, maze: MazeSpec, cfg: EnvConfig | None = None):
        self.maze = maze
        self.cfg = cfg if cfg is not None else EnvConfig()
        doors = sorted(maze.doors.items())
        self._door_idx = np.array([k for k, _ in doors], dtype=np.int64)
        self._door_pos = (np.stack([maze.cell_center(c) for _, c in doors])
                          if doors else np.zeros((0, 2)))
        self._goal_pos = maze.cell_center(maze.goal)
        self._free = maze.free_cells()

    def reset(self, rng) -> EnvState:
        gen = _as_generator(rng)
        cfg = self.cfg
        start = self.maze.cell_center(self.maze.start)
        if cfg.init_mode == "fixed":
            pos = start
        elif cfg.init_mode == "pseudo_random":
            pos = self._sample_disc(gen, start, cfg.pseudo_radius)
        else:
            r, c = self._free[gen.integers(len(self._free))]
            pos = np.array([c, r], dtype=np.float64) + gen.random(2)
        return EnvState(position=np.array(pos, dtype=np.float64))

    def _sample_disc(self, gen, center, radius):
        for _ in range(1000):
            rr = radius * np.sqrt(gen.random())
            theta = 2.0 * np.pi * gen.random()
            pos = center + rr * np.array([np.cos(theta), np.sin(theta)])
            r, c = self.maze.cell_of(pos)
            if not self.maze.blocked[r, c]:
                return pos
        raise RuntimeError("could not sample a free initial position")

    def step(self, state: EnvState, action, rng=None) -> EnvState:
        if state.done:
            raise RuntimeError("step after done")
        cfg = self.cfg
        a = clamp_action(action)
        if state.stuck_remaining > 0:
            state.stuck_remaining -= 1
        else:
            disp = STEP_SIZE * a
            if cfg.transition_noise_sigma > 0:
                gen = _as_generator(rng)
                disp = disp + gen.normal(0.0, cfg.transition_noise_sigma, 2)
            new_pos, contact = move_positions(
                self.maze, state.position[None, :], disp[None, :])
            state.position = new_pos[0]
            if contact[0] and cfg.sticky_walls:
                state.stuck_remaining = cfg.stick_steps
        self._detect(state)
        state.steps += 1
        if state.steps >= cfg.max_steps:
            state.done = True
        return state

    def _detect(self, state: EnvState):
        cfg = self.cfg
        if len(self._door_idx):
            d = np.linalg.norm(self._door_pos - state.position, axis=1)
            for k in self._door_idx[d <= cfg.checkpoint_radius]:
                if int(k) not in state.visited:
                    state.visited.append(int(k))
        if np.linalg.norm(self._goal_pos - state.position) <= cfg.goal_radius:
            if 0 not in state.visited:
                state.visited.append(0)
            state.done = True

    def rollout(self, policy, z, rng: RngStream, traj_id: int = 0) -> Trajectory:
        """Run one full episode; policy.act(position, z, gen) -> action."""
        env_gen = rng.derive("env").generator()
        policy_gen = rng.derive("policy").generator()
        state = self.reset(env_gen)
        states = [state.position.copy()]
        actions = []
        while not state.done:
            a = clamp_action(policy.act(state.position, z, policy_gen))
            self.step(state, a, env_gen)
            actions.append(a)
            states.append(state.position.copy())
        success = bool(state.visited) and state.visited[-1] == 0
        return Trajectory(id=traj_id, states=np.asarray(states),
                          actions=np.asarray(actions),
                          checkpoints=tuple(state.visited), success=success)
