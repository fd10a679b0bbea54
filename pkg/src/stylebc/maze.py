"""Cell-grid mazes parsed from a small text format.

Grammar, one character per cell: ``#`` wall, ``.`` free, ``S`` start,
``G`` goal, digits ``1``-``9`` checkpoints (doors).  Lines must form a
rectangle.  ``G`` is required; ``S`` is optional and defaults to the
goal cell.  Continuous coordinates are ``[x, y]`` with ``x`` along
columns and ``y`` along rows, so cell ``(r, c)`` spans
``[c, c+1] x [r, r+1]`` and has center ``(c + 0.5, r + 0.5)``.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from importlib import resources

import numpy as np

WALL = "#"
FREE = "."
START = "S"
GOAL = "G"


class MazeParseError(ValueError):
    """Raised for malformed maze text; message carries line/column."""


def _err(line: int, col: int, msg: str) -> MazeParseError:
    # 1-based positions, like compiler diagnostics
    return MazeParseError(f"line {line}, column {col}: {msg}")


@dataclass(frozen=True)
class MazeSpec:
    """A validated maze: wall grid, door cells, goal and start cells."""

    blocked: np.ndarray  # (H, W) bool, True = wall
    doors: dict[int, tuple[int, int]]
    goal: tuple[int, int]
    start: tuple[int, int] = field(default=None)  # type: ignore[assignment]

    def __post_init__(self):
        blocked = np.asarray(self.blocked, dtype=bool)
        if blocked.ndim != 2 or blocked.size == 0:
            raise ValueError("blocked grid must be a non-empty 2d array")
        blocked = blocked.copy()
        blocked.flags.writeable = False
        object.__setattr__(self, "blocked", blocked)
        if self.start is None:
            object.__setattr__(self, "start", self.goal)
        object.__setattr__(self, "doors", dict(self.doors))
        for k, cell in self.doors.items():
            if not 1 <= int(k) <= 9:
                raise ValueError(f"door index {k} outside 1-9")
            if self._blocked_at(cell):
                raise ValueError(f"door {k} on wall cell {cell}")
        if self._blocked_at(self.goal):
            raise ValueError(f"goal on wall cell {self.goal}")
        if self._blocked_at(self.start):
            raise ValueError(f"start on wall cell {self.start}")
        if not self._reachable(self.start, self.goal):
            raise ValueError("unreachable goal")

    def _blocked_at(self, cell: tuple[int, int]) -> bool:
        r, c = cell
        if not (0 <= r < self.height and 0 <= c < self.width):
            return True
        return bool(self.blocked[r, c])

    def _reachable(self, src: tuple[int, int], dst: tuple[int, int]) -> bool:
        seen = {src}
        queue = deque([src])
        while queue:
            r, c = queue.popleft()
            if (r, c) == dst:
                return True
            for nr, nc in ((r - 1, c), (r + 1, c), (r, c - 1), (r, c + 1)):
                if (nr, nc) not in seen and not self._blocked_at((nr, nc)):
                    seen.add((nr, nc))
                    queue.append((nr, nc))
        return False

    @property
    def height(self) -> int:
        return self.blocked.shape[0]

    @property
    def width(self) -> int:
        return self.blocked.shape[1]

    def is_blocked_cell(self, r: int, c: int) -> bool:
        """Out-of-bounds counts as wall."""
        return self._blocked_at((r, c))

    def cell_center(self, cell: tuple[int, int]) -> np.ndarray:
        r, c = cell
        return np.array([c + 0.5, r + 0.5], dtype=np.float64)

    def cell_of(self, point) -> tuple[int, int]:
        x, y = float(point[0]), float(point[1])
        c = min(max(int(np.floor(x)), 0), self.width - 1)
        r = min(max(int(np.floor(y)), 0), self.height - 1)
        return r, c

    def checkpoint_centers(self) -> dict[int, np.ndarray]:
        """Centers of all checkpoint cells; index 0 is the goal."""
        out = {0: self.cell_center(self.goal)}
        for k, cell in self.doors.items():
            out[int(k)] = self.cell_center(cell)
        return out

    def free_cells(self) -> list[tuple[int, int]]:
        rs, cs = np.nonzero(~self.blocked)
        return [(int(r), int(c)) for r, c in zip(rs, cs)]

    def render(self) -> str:
        rows = []
        for r in range(self.height):
            chars = []
            for c in range(self.width):
                chars.append(WALL if self.blocked[r, c] else FREE)
            rows.append(chars)
        for k, (r, c) in self.doors.items():
            rows[r][c] = str(k)
        gr, gc = self.goal
        rows[gr][gc] = GOAL
        sr, sc = self.start
        if (sr, sc) != (gr, gc):
            rows[sr][sc] = START
        return "\n".join("".join(row) for row in rows)


def parse_maze(text: str) -> MazeSpec:
    lines = text.split("\n")
    while lines and lines[-1] == "":
        lines.pop()
    if not lines:
        raise MazeParseError("empty maze text")
    width = len(lines[0])
    blocked = np.zeros((len(lines), width), dtype=bool)
    doors: dict[int, tuple[int, int]] = {}
    goal = None
    start = None
    for r, line in enumerate(lines):
        if len(line) != width:
            raise _err(r + 1, len(line) + 1,
                       f"expected {width} columns, got {len(line)}")
        for c, ch in enumerate(line):
            if ch == WALL:
                blocked[r, c] = True
            elif ch == FREE:
                pass
            elif ch == GOAL:
                if goal is not None:
                    raise _err(r + 1, c + 1, "duplicate goal")
                goal = (r, c)
            elif ch == START:
                if start is not None:
                    raise _err(r + 1, c + 1, "duplicate start")
                start = (r, c)
            elif ch.isdigit() and ch != "0":
                k = int(ch)
                if k in doors:
                    raise _err(r + 1, c + 1, f"duplicate door {k}")
                doors[k] = (r, c)
            else:
                raise _err(r + 1, c + 1, f"unknown cell character {ch!r}")
    if goal is None:
        raise MazeParseError("maze has no goal cell")
    return MazeSpec(blocked=blocked, doors=doors, goal=goal, start=start)


def load_maze(path) -> MazeSpec:
    with open(path, encoding="utf-8") as fh:
        return parse_maze(fh.read())


def bundled_maze_names() -> list[str]:
    root = resources.files("stylebc").joinpath("mazes")
    return sorted(p.name[:-4] for p in root.iterdir() if p.name.endswith(".txt"))


def load_bundled(name: str) -> MazeSpec:
    path = resources.files("stylebc").joinpath("mazes").joinpath(f"{name}.txt")
    try:
        text = path.read_text(encoding="utf-8")
    except FileNotFoundError:
        raise KeyError(f"no bundled maze named {name!r}") from None
    return parse_maze(text)
