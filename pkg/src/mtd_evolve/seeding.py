"""Counter-based random streams.

Every stream is keyed by ``(master seed, run, purpose, generation, agent)``
through ``numpy.random.SeedSequence`` spawn keys, so any single game, cost
table or breeding step can be regenerated without replaying its run.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

INIT = 0
COSTS = 1
GAME = 2
BREED = 3


def stream(seed: int, run: int, purpose: int, generation: int = 0, agent: int = 0) -> np.random.Generator:
    ss = np.random.SeedSequence(int(seed), spawn_key=(int(run), purpose, int(generation), int(agent)))
    return np.random.Generator(np.random.PCG64(ss))


@dataclass(frozen=True)
class RunSeeds:
    seed: int
    run: int = 0

    def init(self) -> np.random.Generator:
        return stream(self.seed, self.run, INIT)

    def costs(self, generation: int) -> np.random.Generator:
        return stream(self.seed, self.run, COSTS, generation)

    def game(self, generation: int, agent: int) -> np.random.Generator:
        return stream(self.seed, self.run, GAME, generation, agent)

    def breed(self, generation: int) -> np.random.Generator:
        return stream(self.seed, self.run, BREED, generation)
