"""Rollout evaluation: behavior histograms, success, density, control.

Generation batches the policy forward across all still-active episodes
while keeping one derived RNG stream per episode.  Episode logic (draw
order, collision, detection) matches Env.rollout exactly; generate()
with n_rollouts=1 reproduces it bit-for-bit.  Larger batches go through
different BLAS kernels whose rounding differs at the last ulp, so
evaluation results are reproducible per call signature rather than
across batch sizes.  Histograms compare by L1 over the union of
supports.  The conditional grid density follows the weighted double sum
over dataset states; at beta=0 its total mass is exactly 1.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .env import STEP_SIZE, Env, EnvConfig, clamp_action, move_positions
from .maze import MazeSpec
from .neural import Model
from .similarity import DissimilarityMatrix
from .types import Dataset, RngStream, Trajectory, behavior_of, histogram


@dataclass(frozen=True)
class EvalConfig:
    n_rollouts: int = 500
    seeds: tuple[int, ...] = (0, 1, 2, 3, 4)
    env: EnvConfig = field(default_factory=EnvConfig)
    greedy: bool = True

    def __post_init__(self):
        if self.n_rollouts < 1:
            raise ValueError("n_rollouts must be >= 1")
        if not self.seeds:
            raise ValueError("need at least one seed")


# ---- style sources ----------------------------------------------------

class ZeroStyle:
    """BC conditioning: a fixed all-zero style vector."""

    def __init__(self, d_z: int):
        self.d_z = d_z

    def sample(self, gen):
        return -1, np.zeros(self.d_z)


class FixedStyle:
    """Dirac source on one codebook row."""

    def __init__(self, model: Model, index: int):
        if not 0 <= index < model.arch.n_styles:
            raise IndexError(f"style index {index} out of range")
        self.index = int(index)
        self._z = model.codebook[index].copy()

    def sample(self, gen):
        return self.index, self._z


class UniformCodebook:
    """The generation mixture: uniform over all codebook rows."""

    def __init__(self, model: Model, indices=None):
        n = model.arch.n_styles
        self.indices = (np.arange(n) if indices is None
                        else np.asarray(indices, dtype=np.int64))
        if len(self.indices) == 0:
            raise ValueError("empty style support")
        self._table = model.codebook[self.indices].copy()

    def sample(self, gen):
        k = int(gen.integers(len(self.indices)))
        return int(self.indices[k]), self._table[k]


def style_source_for(algorithm: str, model: Model):
    if algorithm == "bc":
        return ZeroStyle(model.arch.d_z)
    return UniformCodebook(model)


# ---- batched generation ----------------------------------------------

class _Lane:
    __slots__ = ("position", "visited", "steps", "done", "stuck",
                 "states", "actions", "env_gen", "policy_gen", "z",
                 "style_index")

    def __init__(self, position, env_gen, policy_gen, z, style_index):
        self.position = position
        self.visited: list[int] = []
        self.steps = 0
        self.done = False
        self.stuck = 0
        self.states = [position.copy()]
        self.actions: list[np.ndarray] = []
        self.env_gen = env_gen
        self.policy_gen = policy_gen
        self.z = z
        self.style_index = style_index


def generate(model: Model, maze: MazeSpec, env_cfg: EnvConfig,
             style_source, n_rollouts: int, seed: int,
             greedy: bool = True) -> list[Trajectory]:
    """n_rollouts episodes in lockstep; one derived stream per episode."""
    env = Env(maze, env_cfg)
    root = RngStream(seed, "eval")
    lanes = []
    for e in range(n_rollouts):
        ep = root.derive(f"ep:{e}")
        style_idx, z = style_source.sample(ep.derive("style").generator())
        env_gen = ep.derive("env").generator()
        state = env.reset(env_gen)
        lanes.append(_Lane(state.position, env_gen,
                           ep.derive("policy").generator(), z, style_idx))
    doors = sorted(maze.doors.items())
    door_idx = np.array([k for k, _ in doors], dtype=np.int64)
    door_pos = (np.stack([maze.cell_center(c) for _, c in doors])
                if doors else np.zeros((0, 2)))
    goal_pos = maze.cell_center(maze.goal)
    sigma = env_cfg.transition_noise_sigma

    active = [ln for ln in lanes]
    while active:
        S = np.stack([ln.position for ln in active])
        Z = np.stack([ln.z for ln in active])
        mean, log_std = model.forward(S, Z)
        if greedy:
            A = mean
        else:
            std = np.exp(log_std)
            eps = np.stack([ln.policy_gen.normal(0.0, 1.0, 2)
                            for ln in active])
            A = mean + std * eps
        A = np.clip(A, -1.0, 1.0)
        disp = STEP_SIZE * A
        moving = np.array([ln.stuck == 0 for ln in active])
        if sigma > 0:
            for b, ln in enumerate(active):
                if moving[b]:
                    disp[b] += ln.env_gen.normal(0.0, sigma, 2)
        disp[~moving] = 0.0
        new_pos, contact = move_positions(maze, S, disp)
        dd = (np.linalg.norm(new_pos[:, None, :] - door_pos[None, :, :],
                             axis=2) if len(door_idx) else
              np.zeros((len(active), 0)))
        door_hit = dd <= env_cfg.checkpoint_radius
        goal_hit = np.linalg.norm(new_pos - goal_pos, axis=1) <= env_cfg.goal_radius

        still = []
        for b, ln in enumerate(active):
            if ln.stuck > 0:
                ln.stuck -= 1
            else:
                ln.position = new_pos[b]
                if contact[b] and env_cfg.sticky_walls:
                    ln.stuck = env_cfg.stick_steps
            for k in door_idx[door_hit[b]]:
                if int(k) not in ln.visited:
                    ln.visited.append(int(k))
            if goal_hit[b]:
                if 0 not in ln.visited:
                    ln.visited.append(0)
                ln.done = True
            ln.steps += 1
            if ln.steps >= env_cfg.max_steps:
                ln.done = True
            ln.actions.append(A[b])
            ln.states.append(ln.position.copy())
            if not ln.done:
                still.append(ln)
        active = still

    out = []
    for e, ln in enumerate(lanes):
        success = bool(ln.visited) and ln.visited[-1] == 0
        out.append(Trajectory(id=e, states=np.asarray(ln.states),
                              actions=np.asarray(ln.actions),
                              checkpoints=tuple(ln.visited),
                              success=success))
    return out


def style_indices_used(model: Model, maze, env_cfg, style_source,
                       n_rollouts, seed) -> list[int]:
    """The style index each episode of generate() would draw."""
    root = RngStream(seed, "eval")
    out = []
    for e in range(n_rollouts):
        ep = root.derive(f"ep:{e}")
        idx, _ = style_source.sample(ep.derive("style").generator())
        out.append(idx)
    return out


# ---- metrics -----------------------------------------------------------

def l1_distance(h_ref: dict, h_gen: dict) -> float:
    """Sum of |h_ref(b) - h_gen(b)| over the union of supports."""
    # sorted so the sum order is independent of argument order and of the
    # process hash seed; keeps the distance exactly symmetric and repeatable
    keys = sorted(set(h_ref) | set(h_gen))
    return float(sum(abs(h_ref.get(k, 0.0) - h_gen.get(k, 0.0)) for k in keys))


def success_rate(trajs) -> float:
    trajs = list(trajs)
    if not trajs:
        raise ValueError("empty sample")
    return sum(1 for t in trajs if t.success) / len(trajs)


def behavior_histogram(trajs) -> dict:
    return histogram([behavior_of(t) for t in trajs])


def evaluate(model: Model, dataset: Dataset, maze: MazeSpec,
             cfg: EvalConfig, algorithm: str, details: bool = False):
    """Per-seed histogram L1 against the dataset plus success rate.

    With details=True also returns the reference histogram, the per-seed
    generated histograms and the generated trajectories themselves.
    """
    ref = dataset.behavior_histogram()
    source = style_source_for(algorithm, model)
    per_l1 = []
    per_sr = []
    per_hist = []
    per_trajs = []
    for seed in cfg.seeds:
        trajs = generate(model, maze, cfg.env, source, cfg.n_rollouts,
                         seed, greedy=cfg.greedy)
        h = behavior_histogram(trajs)
        per_l1.append(l1_distance(ref, h))
        per_sr.append(success_rate(trajs))
        per_hist.append(h)
        per_trajs.append(trajs)
    metrics = {
        "algorithm": algorithm,
        "n_rollouts": cfg.n_rollouts,
        "seeds": list(cfg.seeds),
        "l1": {"mean": float(np.mean(per_l1)), "std": float(np.std(per_l1)),
               "per_seed": [float(v) for v in per_l1]},
        "success_rate": {"mean": float(np.mean(per_sr)),
                         "std": float(np.std(per_sr)),
                         "per_seed": [float(v) for v in per_sr]},
    }
    if not details:
        return metrics
    return metrics, {"reference_hist": ref, "per_seed_hists": per_hist,
                     "trajectories": per_trajs}


# ---- conditional grid density ------------------------------------------

@dataclass(frozen=True)
class DensityGrid:
    resolution: int
    masses: np.ndarray  # (res, res), row = y bin, col = x bin
    extent: tuple[float, float]  # (width, height) of the covered box

    @property
    def total_mass(self) -> float:
        return float(self.masses.sum())


def density(dataset: Dataset, nu: DissimilarityMatrix, beta: float,
            ref: int, maze: MazeSpec, resolution: int = 64) -> DensityGrid:
    """Weighted state-visitation mass per grid cell, conditioned on ref."""
    if not 0 <= ref < len(dataset):
        raise IndexError("reference trajectory out of range")
    w_row = np.exp(-beta * nu.nu[ref])
    W, H = float(maze.width), float(maze.height)
    masses = np.zeros((resolution, resolution))
    n = len(dataset)
    for j, traj in enumerate(dataset):
        states = traj.states
        ix = np.minimum((states[:, 0] / W * resolution).astype(np.int64),
                        resolution - 1)
        iy = np.minimum((states[:, 1] / H * resolution).astype(np.int64),
                        resolution - 1)
        np.add.at(masses, (iy, ix), w_row[j] / (n * len(states)))
    return DensityGrid(resolution=resolution, masses=masses, extent=(W, H))


def visitation(trajs, maze: MazeSpec, resolution: int = 64) -> DensityGrid:
    """Unweighted state-visitation mass of a trajectory sample."""
    trajs = list(trajs)
    if not trajs:
        raise ValueError("empty sample")
    W, H = float(maze.width), float(maze.height)
    masses = np.zeros((resolution, resolution))
    n = len(trajs)
    for traj in trajs:
        states = np.asarray(traj.states)
        ix = np.minimum((states[:, 0] / W * resolution).astype(np.int64),
                        resolution - 1)
        iy = np.minimum((states[:, 1] / H * resolution).astype(np.int64),
                        resolution - 1)
        np.add.at(masses, (iy, ix), 1.0 / (n * len(states)))
    return DensityGrid(resolution=resolution, masses=masses, extent=(W, H))


# ---- property-conditioned control ---------------------------------------

_METRICS = {
    "length": lambda t: t.length,
    "behavior": lambda t: behavior_of(t),
}


def register_metric(name: str, fn):
    _METRICS[name] = fn


def metric_names() -> list[str]:
    return sorted(_METRICS)


@dataclass(frozen=True)
class Property:
    metric: str
    m_min: object
    m_max: object

    def __post_init__(self):
        if self.metric not in _METRICS:
            raise KeyError(f"unknown metric {self.metric!r}")
        if self.m_min > self.m_max:
            raise ValueError("m_min must be <= m_max")

    def satisfied(self, traj: Trajectory) -> bool:
        v = _METRICS[self.metric](traj)
        return self.m_min <= v <= self.m_max


def conditioned_styles(dataset: Dataset, model: Model,
                       prop: Property) -> UniformCodebook:
    """Uniform style source over trajectories satisfying the property."""
    idx = [t.id for t in dataset if prop.satisfied(t)]
    if not idx:
        raise ValueError("property unsatisfiable on dataset")
    return UniformCodebook(model, indices=idx)


def control_report(model: Model, dataset: Dataset, prop: Property,
                   maze: MazeSpec, cfg: EvalConfig) -> dict:
    """Free vs property-conditioned generation, per seed."""
    restricted = [t for t in dataset if prop.satisfied(t)]
    if not restricted:
        raise ValueError("property unsatisfiable on dataset")
    full_hist = dataset.behavior_histogram()
    restricted_hist = histogram([behavior_of(t) for t in restricted])
    free_src = UniformCodebook(model)
    cond_src = conditioned_styles(dataset, model, prop)
    seeds_out = []
    for seed in cfg.seeds:
        free = generate(model, maze, cfg.env, free_src, cfg.n_rollouts,
                        seed, greedy=cfg.greedy)
        controlled = generate(model, maze, cfg.env, cond_src,
                              cfg.n_rollouts, seed, greedy=cfg.greedy)
        seeds_out.append({
            "seed": seed,
            "free_hist": behavior_histogram(free),
            "controlled_hist": behavior_histogram(controlled),
            "free_l1": l1_distance(restricted_hist, behavior_histogram(free)),
            "controlled_l1": l1_distance(restricted_hist,
                                         behavior_histogram(controlled)),
            "controlled_lengths": [t.length for t in controlled],
        })
    return {
        "property": {"metric": prop.metric, "min": prop.m_min,
                     "max": prop.m_max},
        "full_train_hist": full_hist,
        "restricted_train_hist": restricted_hist,
        "n_restricted": len(restricted),
        "per_seed": seeds_out,
    }
