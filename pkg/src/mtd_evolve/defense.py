"""Non-adaptive platform migration schedules."""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .platforms import N_PLATFORMS, Platform


class DefenseKind(str, Enum):
    RANDOM = "random"
    DIVERSITY = "diversity"


DEFAULT_ROTATION = (Platform.FEDORA, Platform.DEBIAN, Platform.FREEBSD)


@dataclass(frozen=True)
class DefensePolicy:
    kind: DefenseKind = DefenseKind.RANDOM
    rotation: tuple[Platform, ...] = DEFAULT_ROTATION
    offset: int = 0

    def __post_init__(self):
        object.__setattr__(self, "kind", DefenseKind(self.kind))
        object.__setattr__(self, "rotation", tuple(Platform.parse(p) for p in self.rotation))
        if not self.rotation:
            raise ValueError("diversity rotation must not be empty")
        if self.offset < 0:
            raise ValueError("rotation offset must be non-negative")

    @classmethod
    def random(cls) -> "DefensePolicy":
        return cls(DefenseKind.RANDOM)

    @classmethod
    def diversity(cls, rotation=DEFAULT_ROTATION, offset: int = 0) -> "DefensePolicy":
        return cls(DefenseKind.DIVERSITY, tuple(rotation), offset)

    def to_dict(self) -> dict:
        return {
            "kind": self.kind.value,
            "rotation": [p.label for p in self.rotation],
            "offset": self.offset,
        }


def pick_successor(u: float, previous: int | None) -> int:
    """Map a uniform draw in [0, 1) to the next randomised platform.

    Uniform over all five on the first match, otherwise over the four
    platforms that differ from ``previous``.
    """
    if previous is None or previous < 0:
        return min(int(u * N_PLATFORMS), N_PLATFORMS - 1)
    k = min(int(u * (N_PLATFORMS - 1)), N_PLATFORMS - 2)
    return k + 1 if k >= previous else k


def randomization_next(rng: np.random.Generator, previous: int | None = None) -> Platform:
    return Platform(pick_successor(rng.random(), previous))


def diversity_next(match_index: int, policy: DefensePolicy = DefensePolicy.diversity()) -> Platform:
    return policy.rotation[(match_index + policy.offset) % len(policy.rotation)]


def schedule(policy: DefensePolicy, uniforms) -> list[Platform]:
    """Activation sequence for one game, one uniform draw consumed per match.

    The diversity rotation ignores the draws; keeping the draw count fixed
    lets both policies share the same per-game random layout.
    """
    out: list[Platform] = []
    previous = None
    for j, u in enumerate(uniforms):
        if policy.kind is DefenseKind.DIVERSITY:
            p = diversity_next(j, policy)
        else:
            p = Platform(pick_successor(u, previous))
        out.append(p)
        previous = p
    return out
