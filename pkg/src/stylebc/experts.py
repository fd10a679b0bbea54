"""Scripted waypoint-following experts and demonstration synthesis.

A Route names the door sequence (ending at goal 0), a cruise speed and
an action jitter.  The expert plans a cell path through the doors with
sequential breadth-first searches that never revisit a cell used by an
earlier segment, then follows the path centers with saturated
proportional control.  Datasets are synthesized by rolling routes out
with per-trajectory derived RNG streams, so a recipe plus seed pins the
file bit-for-bit.
"""

from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass, field
from importlib import resources

import numpy as np

from .env import STEP_SIZE, Env, EnvConfig
from .maze import MazeSpec, load_bundled
from .types import Dataset, RngStream, Trajectory, behavior_from_checkpoints, behavior_of

# distance to a path center at which the expert starts steering for the
# next one; small enough to stay inside corridor cells when cutting corners
ADVANCE_RADIUS = 0.2


@dataclass(frozen=True)
class Route:
    waypoints: tuple[int, ...]  # door indices, last entry 0 (goal)
    speed_scale: float = 1.0
    noise_sigma: float = 0.0

    def __post_init__(self):
        wp = tuple(int(w) for w in self.waypoints)
        object.__setattr__(self, "waypoints", wp)
        if not wp or wp[-1] != 0:
            raise ValueError("route must end at goal checkpoint 0")
        if any(w == 0 for w in wp[:-1]):
            raise ValueError("goal may only appear last")
        if len(set(wp)) != len(wp):
            raise ValueError("repeated waypoint")
        if not 0 < self.speed_scale <= 1:
            raise ValueError("speed_scale must be in (0, 1]")
        if self.noise_sigma < 0:
            raise ValueError("noise_sigma must be >= 0")

    @property
    def label(self) -> str:
        return behavior_from_checkpoints(self.waypoints)


def _bfs(maze: MazeSpec, src, dst, banned) -> list | None:
    """Shortest cell path src..dst avoiding banned cells; fixed tie-break."""
    if src == dst:
        return [src]
    parent = {src: None}
    queue = deque([src])
    while queue:
        r, c = queue.popleft()
        for nxt in ((r - 1, c), (r + 1, c), (r, c - 1), (r, c + 1)):
            if nxt in parent or nxt in banned or maze.is_blocked_cell(*nxt):
                continue
            parent[nxt] = (r, c)
            if nxt == dst:
                path = [nxt]
                while path[-1] != src:
                    path.append(parent[path[-1]])
                return path[::-1]
            queue.append(nxt)
    return None


def plan_route(maze: MazeSpec, waypoints) -> list[tuple[int, int]]:
    """Cell path start -> doors -> goal; segments never revisit a cell.

    The no-revisit rule makes every planned route a forward route (no
    backtracking through already-traversed corridor), and fails loudly
    when a waypoint order would force one.
    """
    targets = []
    for w in waypoints:
        if w == 0:
            targets.append(maze.goal)
        elif w in maze.doors:
            targets.append(maze.doors[w])
        else:
            raise ValueError(f"route uses unknown door {w}")
    path = [maze.start]
    banned: set = set()
    for tgt in targets:
        banned.update(path[:-1])
        seg = _bfs(maze, path[-1], tgt, banned)
        if seg is None:
            label = behavior_from_checkpoints(tuple(waypoints))
            raise ValueError(f"route failed: {label}: no forward path")
        path.extend(seg[1:])
    return path


class ExpertPolicy:
    """Follows a planned cell path; fresh instance per episode."""

    def __init__(self, maze: MazeSpec, route: Route, path=None):
        self.route = route
        if path is None:
            path = plan_route(maze, route.waypoints)
        self._targets = np.stack([maze.cell_center(c) for c in path[1:]])
        self._cursor = 0

    def act(self, position, z, gen) -> np.ndarray:
        last = len(self._targets) - 1
        while (self._cursor < last and
               np.linalg.norm(self._targets[self._cursor] - position)
               <= ADVANCE_RADIUS):
            self._cursor += 1
        needed = (self._targets[self._cursor] - position) / STEP_SIZE
        norm = np.linalg.norm(needed)
        if norm > 1.0:
            needed = needed / norm
        a = self.route.speed_scale * needed
        if self.route.noise_sigma > 0:
            a = a + gen.normal(0.0, self.route.noise_sigma, 2)
        return np.clip(a, -1.0, 1.0)


@dataclass(frozen=True)
class DatasetRecipe:
    routes: tuple[tuple[Route, int], ...]
    maze_name: str = "medium_maze"
    env: EnvConfig = field(default_factory=EnvConfig)
    seed: int = 0

    def __post_init__(self):
        routes = tuple((r, int(n)) for r, n in self.routes)
        object.__setattr__(self, "routes", routes)
        if not routes or any(n < 1 for _, n in routes):
            raise ValueError("every route needs count >= 1")

    @property
    def size(self) -> int:
        return sum(n for _, n in self.routes)


def recipe_from_obj(obj: dict) -> DatasetRecipe:
    env = EnvConfig(**obj.get("env", {}))
    routes = tuple(
        (Route(waypoints=tuple(r["waypoints"]),
               speed_scale=float(r.get("speed_scale", 1.0)),
               noise_sigma=float(r.get("noise_sigma", 0.0))),
         int(r["count"]))
        for r in obj["routes"])
    return DatasetRecipe(routes=routes,
                         maze_name=obj.get("maze", "medium_maze"),
                         env=env, seed=int(obj.get("seed", 0)))


def load_recipe(path) -> DatasetRecipe:
    with open(path, encoding="utf-8") as fh:
        return recipe_from_obj(json.load(fh))


def bundled_recipe_names() -> list[str]:
    root = resources.files("stylebc").joinpath("recipes")
    return sorted(p.name[:-5] for p in root.iterdir() if p.name.endswith(".json"))


def bundled_recipe(name: str) -> DatasetRecipe:
    path = resources.files("stylebc").joinpath("recipes").joinpath(f"{name}.json")
    try:
        text = path.read_text(encoding="utf-8")
    except FileNotFoundError:
        raise KeyError(f"no bundled recipe named {name!r}") from None
    return recipe_from_obj(json.loads(text))


def generate_dataset(recipe: DatasetRecipe, maze: MazeSpec | None = None) -> Dataset:
    """Roll every route out `count` times; labels are verified, not assumed."""
    if maze is None:
        maze = load_bundled(recipe.maze_name)
    env = Env(maze, recipe.env)
    plans = [plan_route(maze, route.waypoints) for route, _ in recipe.routes]
    root = RngStream(recipe.seed, "expert-data")
    trajs: list[Trajectory] = []
    labels = []
    idx = 0
    for (route, count), path in zip(recipe.routes, plans):
        labels.append(route.label)
        for _ in range(count):
            policy = ExpertPolicy(maze, route, path=path)
            traj = env.rollout(policy, None, root.derive(f"traj:{idx}"),
                               traj_id=idx)
            if not traj.success:
                raise RuntimeError(f"route failed: {route.label}: missed goal")
            got = behavior_of(traj)
            if got != route.label:
                raise RuntimeError(
                    f"route failed: {route.label}: rolled out as {got}")
            trajs.append(traj)
            idx += 1
    meta = {
        "maze": recipe.maze_name,
        "seed": recipe.seed,
        "env": {
            "init_mode": recipe.env.init_mode,
            "transition_noise_sigma": recipe.env.transition_noise_sigma,
            "sticky_walls": recipe.env.sticky_walls,
            "max_steps": recipe.env.max_steps,
        },
        "ground_truth_K": len(set(labels)),
    }
    return Dataset(trajectories=trajs, meta=meta)
