"""Defender platforms, kernel code similarity and exploit success odds."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from enum import IntEnum
from pathlib import Path
from typing import Iterable

import numpy as np


class Platform(IntEnum):
    CENTOS = 0
    FEDORA = 1
    DEBIAN = 2
    GENTOO = 3
    FREEBSD = 4

    @property
    def label(self) -> str:
        return PLATFORM_NAMES[self]

    @classmethod
    def parse(cls, value: str | int) -> "Platform":
        """Accept an index, a display name or an enum name (case-insensitive)."""
        if isinstance(value, (int, np.integer)):
            return cls(int(value))
        key = str(value).strip().lower()
        for p in cls:
            if key in (p.name.lower(), PLATFORM_NAMES[p].lower()):
                return p
        raise ValueError(f"unknown platform {value!r}")


PLATFORM_NAMES = ("CentOS", "Fedora", "Debian", "Gentoo", "FreeBSD")
N_PLATFORMS = len(PLATFORM_NAMES)

# MOSS scores over kernel code and standard drivers, rows/cols in Platform order.
TABLE1_SIMILARITY = np.array(
    [
        [1.0000, 0.6645, 0.8067, 0.6973, 0.0368],
        [0.6645, 1.0000, 0.5928, 0.8658, 0.0324],
        [0.8067, 0.5928, 1.0000, 0.6202, 0.0385],
        [0.6973, 0.8658, 0.6202, 1.0000, 0.0330],
        [0.0368, 0.0324, 0.0385, 0.0330, 1.0000],
    ]
)
TABLE1_SIMILARITY.setflags(write=False)


class SimilarityError(ValueError):
    pass


def validate_similarity(matrix) -> np.ndarray:
    """Return a read-only float copy of ``matrix`` or raise SimilarityError."""
    m = np.array(matrix, dtype=float)
    if m.shape != (N_PLATFORMS, N_PLATFORMS):
        raise SimilarityError(f"similarity matrix must be 5x5, got shape {m.shape}")
    if not np.all(np.isfinite(m)) or m.min() < 0.0 or m.max() > 1.0:
        raise SimilarityError("similarity entries must lie in [0, 1]")
    if not np.array_equal(m, m.T):
        raise SimilarityError("similarity matrix must be symmetric")
    if not np.all(np.diag(m) == 1.0):
        raise SimilarityError("similarity matrix must have a unit diagonal")
    m.setflags(write=False)
    return m


def load_similarity(path: str | Path) -> np.ndarray:
    """Load a 5x5 JSON array override of the Table 1 scores."""
    with open(path) as fh:
        data = json.load(fh)
    return validate_similarity(data)


def similarity(a: Platform | int, b: Platform | int, matrix: np.ndarray = TABLE1_SIMILARITY) -> float:
    return float(matrix[int(a), int(b)])


def success_probability(developed: Iterable[bool], active: int, matrix: np.ndarray = TABLE1_SIMILARITY) -> float:
    """Chance that at least one developed exploit compromises ``active``.

    The targeted exploit always works; every other developed exploit is an
    independent attempt that lands with the platforms' similarity score.
    """
    developed = list(developed)
    if developed[active]:
        return 1.0
    miss = 1.0
    for e in range(N_PLATFORMS):
        if developed[e] and e != active:
            miss *= 1.0 - matrix[e, active]
    return 1.0 - miss


@dataclass
class ExploitPortfolio:
    """Per-game investment ledger of one attacker.

    ``cost`` is fixed for the game; ``invested`` and ``wasted`` only grow.
    """

    cost: tuple[int, ...]
    invested: list[int] = field(default_factory=lambda: [0] * N_PLATFORMS)
    wasted: list[int] = field(default_factory=lambda: [0] * N_PLATFORMS)

    def __post_init__(self):
        self.cost = tuple(int(c) for c in self.cost)
        if len(self.cost) != N_PLATFORMS or min(self.cost) < 1:
            raise ValueError(f"need 5 positive exploit costs, got {self.cost}")

    @property
    def developed(self) -> tuple[bool, ...]:
        return tuple(self.invested[p] - self.wasted[p] >= self.cost[p] for p in range(N_PLATFORMS))

    def invest(self, target: int) -> None:
        """Put one resource unit into the exploit for ``target``.

        A completed exploit is usable in the match it completes; any unit
        put into an already developed exploit is counted as wasted.
        """
        if self.developed[target]:
            self.wasted[target] += 1
        self.invested[target] += 1


def combined_success_probability(
    portfolio: ExploitPortfolio, active: int, matrix: np.ndarray = TABLE1_SIMILARITY
) -> float:
    return success_probability(portfolio.developed, active, matrix)
