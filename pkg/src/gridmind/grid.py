"""Core gridworld model: cells, actions, movement rules, and the solution path.

A grid is an axis-aligned rectangle of cells. Some cells are walls, some are
pits, the rest are free. Moving into a wall or out of bounds leaves the agent
where it is; moving into a pit loses the episode; moving onto the goal wins.
Environments produced by :mod:`gridmind.generate` have exactly one simple
path from start to goal over the free cells.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from enum import Enum
import json

Position = tuple[int, int]


class Action(Enum):
    """A cardinal move. Enum order is the canonical order used everywhere."""

    UP = "up"
    DOWN = "down"
    LEFT = "left"
    RIGHT = "right"

    @property
    def delta(self) -> Position:
        return _DELTAS[self]

    @property
    def inverse(self) -> "Action":
        return _INVERSES[self]

    def apply(self, pos: Position) -> Position:
        dx, dy = _DELTAS[self]
        return (pos[0] + dx, pos[1] + dy)

    @classmethod
    def from_word(cls, word: str) -> "Action":
        """Map 'up'/'down'/'left'/'right' to an Action. Raises KeyError otherwise."""
        return _BY_WORD[word]


ACTIONS: tuple[Action, ...] = (Action.UP, Action.DOWN, Action.LEFT, Action.RIGHT)

_DELTAS: dict[Action, Position] = {
    Action.UP: (0, 1),
    Action.DOWN: (0, -1),
    Action.LEFT: (-1, 0),
    Action.RIGHT: (1, 0),
}

_INVERSES: dict[Action, Action] = {
    Action.UP: Action.DOWN,
    Action.DOWN: Action.UP,
    Action.LEFT: Action.RIGHT,
    Action.RIGHT: Action.LEFT,
}

_BY_WORD: dict[str, Action] = {a.value: a for a in ACTIONS}

GLOBAL_MAX_COORD = 19


@dataclass(frozen=True)
class GridSpec:
    """Complete description of one environment.

    ``walls`` and ``pits`` are disjoint sets of in-bounds cells; ``start`` and
    ``goal`` are distinct free cells. ``seed`` records the stream that
    generated this environment (None for hand-built ones).
    """

    min_x: int
    min_y: int
    size_x: int
    size_y: int
    start: Position
    goal: Position
    walls: frozenset[Position] = field(default_factory=frozenset)
    pits: frozenset[Position] = field(default_factory=frozenset)
    seed: int | None = None

    @property
    def max_x(self) -> int:
        return self.min_x + self.size_x - 1

    @property
    def max_y(self) -> int:
        return self.min_y + self.size_y - 1

    def in_bounds(self, pos: Position) -> bool:
        return self.min_x <= pos[0] <= self.max_x and self.min_y <= pos[1] <= self.max_y

    def is_free(self, pos: Position) -> bool:
        """In bounds and neither wall nor pit. The goal is a free cell."""
        return self.in_bounds(pos) and pos not in self.walls and pos not in self.pits

    def free_cells(self) -> list[Position]:
        """All free cells in lexicographic order."""
        return [
            (x, y)
            for x in range(self.min_x, self.max_x + 1)
            for y in range(self.min_y, self.max_y + 1)
            if (x, y) not in self.walls and (x, y) not in self.pits
        ]

    def validate(self, max_coord: int = GLOBAL_MAX_COORD) -> None:
        """Raise ValueError on any structural violation."""
        if self.size_x < 2 or self.size_y < 2:
            raise ValueError(f"sizes must be at least 2, got {self.size_x}x{self.size_y}")
        if self.min_x < 0 or self.min_y < 0 or self.max_x > max_coord or self.max_y > max_coord:
            raise ValueError(
                f"grid [{self.min_x},{self.max_x}]x[{self.min_y},{self.max_y}] "
                f"exceeds [0,{max_coord}]^2"
            )
        if self.start == self.goal:
            raise ValueError("start and goal must be distinct")
        for name, cell in (("start", self.start), ("goal", self.goal)):
            if not self.in_bounds(cell):
                raise ValueError(f"{name} {cell} is out of bounds")
            if cell in self.walls or cell in self.pits:
                raise ValueError(f"{name} {cell} lies on an obstacle")
        if self.walls & self.pits:
            raise ValueError(f"walls and pits overlap: {sorted(self.walls & self.pits)}")
        for kind, cells in (("wall", self.walls), ("pit", self.pits)):
            for cell in cells:
                if not self.in_bounds(cell):
                    raise ValueError(f"{kind} {cell} is out of bounds")

    def to_json_dict(self) -> dict:
        """Canonical JSON form: fixed key order, obstacle lists sorted."""
        return {
            "min_x": self.min_x,
            "min_y": self.min_y,
            "size_x": self.size_x,
            "size_y": self.size_y,
            "start": list(self.start),
            "goal": list(self.goal),
            "walls": [list(c) for c in sorted(self.walls)],
            "pits": [list(c) for c in sorted(self.pits)],
            "seed": self.seed,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict(), separators=(",", ":"))

    @classmethod
    def from_json_dict(cls, d: dict) -> "GridSpec":
        return cls(
            min_x=d["min_x"],
            min_y=d["min_y"],
            size_x=d["size_x"],
            size_y=d["size_y"],
            start=tuple(d["start"]),
            goal=tuple(d["goal"]),
            walls=frozenset(tuple(c) for c in d["walls"]),
            pits=frozenset(tuple(c) for c in d["pits"]),
            seed=d.get("seed"),
        )

    @classmethod
    def from_json(cls, text: str) -> "GridSpec":
        return cls.from_json_dict(json.loads(text))


def translate(spec: GridSpec, dx: int, dy: int) -> GridSpec:
    """The same environment shifted by (dx, dy)."""

    def mv(p: Position) -> Position:
        return (p[0] + dx, p[1] + dy)

    return replace(
        spec,
        min_x=spec.min_x + dx,
        min_y=spec.min_y + dy,
        start=mv(spec.start),
        goal=mv(spec.goal),
        walls=frozenset(mv(c) for c in spec.walls),
        pits=frozenset(mv(c) for c in spec.pits),
    )


class MoveKind(Enum):
    MOVED = "moved"
    BLOCKED_WALL = "blocked_wall"
    BLOCKED_BOUNDS = "blocked_bounds"
    PIT = "pit"
    REACHED_GOAL = "reached_goal"


@dataclass(frozen=True)
class TransitionResult:
    """Outcome of one attempted move.

    ``dest`` is the entered cell for MOVED, PIT and REACHED_GOAL; None for the
    blocked kinds, which leave the agent in place.
    """

    kind: MoveKind
    dest: Position | None = None

    @property
    def terminal(self) -> bool:
        return self.kind in (MoveKind.PIT, MoveKind.REACHED_GOAL)

    @property
    def blocked(self) -> bool:
        return self.kind in (MoveKind.BLOCKED_WALL, MoveKind.BLOCKED_BOUNDS)


Trajectory = list[tuple[Action, Position]]


def _require_standable(spec: GridSpec, pos: Position) -> None:
    if not spec.in_bounds(pos):
        raise ValueError(f"position {pos} is out of bounds")
    if pos in spec.walls:
        raise ValueError(f"position {pos} is a wall")
    if pos in spec.pits:
        raise ValueError(f"position {pos} is a pit")


def transition(spec: GridSpec, pos: Position, action: Action) -> TransitionResult:
    """Attempt one move from a free cell."""
    _require_standable(spec, pos)
    dest = action.apply(pos)
    if not spec.in_bounds(dest):
        return TransitionResult(MoveKind.BLOCKED_BOUNDS)
    if dest in spec.walls:
        return TransitionResult(MoveKind.BLOCKED_WALL)
    if dest in spec.pits:
        return TransitionResult(MoveKind.PIT, dest)
    if dest == spec.goal:
        return TransitionResult(MoveKind.REACHED_GOAL, dest)
    return TransitionResult(MoveKind.MOVED, dest)


def valid_actions(spec: GridSpec, pos: Position) -> list[tuple[Action, Position]]:
    """Moves that enter a free cell (goal included), in canonical action order."""
    _require_standable(spec, pos)
    out = []
    for action in ACTIONS:
        dest = action.apply(pos)
        if spec.is_free(dest):
            out.append((action, dest))
    return out


def optimal_path(spec: GridSpec) -> Trajectory:
    """The shortest start-to-goal trajectory as (action, state) pairs.

    BFS with canonical action order, so the result is deterministic. On the
    generated environments the free cells form a tree, making this the unique
    simple path. Raises ValueError when the goal is unreachable.
    """
    spec_start = spec.start
    if spec_start == spec.goal:
        return []
    parents: dict[Position, tuple[Position, Action]] = {spec_start: None}  # type: ignore[dict-item]
    frontier = [spec_start]
    while frontier and spec.goal not in parents:
        nxt: list[Position] = []
        for pos in frontier:
            for action in ACTIONS:
                dest = action.apply(pos)
                if spec.is_free(dest) and dest not in parents:
                    parents[dest] = (pos, action)
                    nxt.append(dest)
        frontier = nxt
    if spec.goal not in parents:
        raise ValueError("goal is unreachable from start")
    path: Trajectory = []
    cur = spec.goal
    while cur != spec_start:
        prev, action = parents[cur]
        path.append((action, cur))
        cur = prev
    path.reverse()
    return path


def path_states(spec: GridSpec, path: Trajectory) -> list[Position]:
    """Start state followed by every state the trajectory enters."""
    return [spec.start] + [state for _, state in path]


def count_simple_paths(spec: GridSpec, limit: int | None = 2) -> int:
    """Number of simple start-to-goal paths over free cells.

    Walks every simple path with an explicit stack; stops early once ``limit``
    paths are found (pass None to count exhaustively).
    """
    if spec.start == spec.goal:
        return 1
    count = 0
    on_path = {spec.start}
    # stack of (position, iterator over remaining neighbors)
    stack = [(spec.start, iter(_free_neighbors(spec, spec.start)))]
    while stack:
        pos, it = stack[-1]
        dest = next(it, None)
        if dest is None:
            stack.pop()
            on_path.discard(pos)
            continue
        if dest in on_path:
            continue
        if dest == spec.goal:
            count += 1
            if limit is not None and count >= limit:
                return count
            continue
        on_path.add(dest)
        stack.append((dest, iter(_free_neighbors(spec, dest))))
    return count


def _free_neighbors(spec: GridSpec, pos: Position) -> list[Position]:
    return [a.apply(pos) for a in ACTIONS if spec.is_free(a.apply(pos))]
