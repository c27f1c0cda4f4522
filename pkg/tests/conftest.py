from __future__ import annotations

from pathlib import Path

import pytest

from gridmind import GridSpec

GOLDEN_DIR = Path(__file__).parent / "golden"


def load_golden(name: str) -> str:
    """Fixture files store newlines as literal backslash-n escapes."""
    return (GOLDEN_DIR / name).read_text().rstrip("\n").replace("\\n", "\n")


def example_env() -> GridSpec:
    """Small 4x3 environment with a unique 5-move solution.

    One pit at (3, 0), walls at (1, 1) and (2, 2); the only path from (0, 0)
    to (3, 2) is right, right, up, right, up.
    """
    return GridSpec(
        min_x=0,
        min_y=0,
        size_x=4,
        size_y=3,
        start=(0, 0),
        goal=(3, 2),
        walls=frozenset({(1, 1), (2, 2)}),
        pits=frozenset({(3, 0)}),
    )


@pytest.fixture
def ref_env() -> GridSpec:
    return example_env()
