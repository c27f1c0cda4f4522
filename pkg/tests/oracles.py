"""Independent reference implementations used to cross-check the package.

Everything here is written from the movement rules alone, on purpose in a
different style from the library (recursion, local arithmetic, no shared
helpers), so agreement between the two is meaningful.
"""

from __future__ import annotations

import heapq
import math

# word -> coordinate delta, in the documented up/down/left/right order
DELTAS = {"up": (0, 1), "down": (0, -1), "left": (-1, 0), "right": (1, 0)}


def _standable(spec, pos) -> bool:
    x, y = pos
    if not (spec.min_x <= x <= spec.min_x + spec.size_x - 1):
        return False
    if not (spec.min_y <= y <= spec.min_y + spec.size_y - 1):
        return False
    return pos not in spec.walls and pos not in spec.pits


def enumerate_simple_paths(spec, cap: int | None = None) -> list[list[str]]:
    """Every simple start-to-goal path as a list of move words."""
    paths: list[list[str]] = []

    def walk(pos, seen, moves):
        if cap is not None and len(paths) >= cap:
            return
        if pos == spec.goal:
            paths.append(list(moves))
            return
        for word, (dx, dy) in DELTAS.items():
            nxt = (pos[0] + dx, pos[1] + dy)
            if nxt in seen or not _standable(spec, nxt):
                continue
            seen.add(nxt)
            moves.append(word)
            walk(nxt, seen, moves)
            moves.pop()
            seen.remove(nxt)

    walk(spec.start, {spec.start}, [])
    return paths


def shortest_path_length(spec) -> int | None:
    """Dijkstra over free cells with unit weights; None when unreachable."""
    dist = {spec.start: 0}
    queue = [(0, spec.start)]
    while queue:
        d, pos = heapq.heappop(queue)
        if pos == spec.goal:
            return d
        if d > dist.get(pos, math.inf):
            continue
        for dx, dy in DELTAS.values():
            nxt = (pos[0] + dx, pos[1] + dy)
            if _standable(spec, nxt) and d + 1 < dist.get(nxt, math.inf):
                dist[nxt] = d + 1
                heapq.heappush(queue, (d + 1, nxt))
    return None


def choice_count(spec, pos) -> int:
    """Number of moves from pos that land on a standable cell."""
    n = 0
    for dx, dy in DELTAS.values():
        if _standable(spec, (pos[0] + dx, pos[1] + dy)):
            n += 1
    return n


def independent_complexity(spec) -> float:
    """Sum of ln(choices) along the unique path, goal excluded.

    Requires the environment to have exactly one simple path.
    """
    paths = enumerate_simple_paths(spec, cap=2)
    assert len(paths) == 1, f"expected a unique path, found {len(paths)}"
    total = 0.0
    pos = spec.start
    for word in paths[0]:
        total += math.log(choice_count(spec, pos))
        dx, dy = DELTAS[word]
        pos = (pos[0] + dx, pos[1] + dy)
    return total


def is_tree(spec) -> bool:
    """True when the free cells form a single connected acyclic component."""
    free = set()
    for x in range(spec.min_x, spec.min_x + spec.size_x):
        for y in range(spec.min_y, spec.min_y + spec.size_y):
            if _standable(spec, (x, y)):
                free.add((x, y))
    if not free:
        return False
    edges = 0
    for x, y in free:
        if (x + 1, y) in free:
            edges += 1
        if (x, y + 1) in free:
            edges += 1
    if edges != len(free) - 1:
        return False
    seen = {next(iter(free))}
    stack = list(seen)
    while stack:
        x, y = stack.pop()
        for dx, dy in DELTAS.values():
            nxt = (x + dx, y + dy)
            if nxt in free and nxt not in seen:
                seen.add(nxt)
                stack.append(nxt)
    return seen == free
