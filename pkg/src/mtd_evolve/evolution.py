"""Generational GA over attacker genomes.

Each generation: evaluate every genome in its own game, copy the elites,
then fill the rest with roulette-selected pairs that are crossed over and
mutated.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernel
from .defense import DefensePolicy
from .fsm import GENOME_BITS, decode_arrays, random_genomes
from .game import ConfigError, GameConfig, game_uniforms, policy_arrays, sample_exploit_costs
from .platforms import N_PLATFORMS, TABLE1_SIMILARITY
from .seeding import RunSeeds


@dataclass(frozen=True)
class GaConfig:
    population: int = 30
    generations: int = 100
    elite_count: int = 2
    mutation_rate: float = 0.005
    crossover_probability: float = 1.0

    def __post_init__(self):
        if self.population < 1 or self.generations < 1:
            raise ConfigError("population and generations must be >= 1")
        if self.elite_count < 0 or self.elite_count >= self.population:
            raise ConfigError(f"elite_count must be in [0, population), got {self.elite_count}")
        if (self.population - self.elite_count) % 2:
            raise ConfigError("population - elite_count must be even (offspring come in pairs)")
        if not 0.0 <= self.mutation_rate <= 1.0:
            raise ConfigError("mutation_rate must lie in [0, 1]")
        if not 0.0 <= self.crossover_probability <= 1.0:
            raise ConfigError("crossover_probability must lie in [0, 1]")


@dataclass
class GenerationStats:
    generation: int
    fitness: np.ndarray
    fittest_index: int
    fittest_fitness: int
    fittest_investment: np.ndarray
    population_investment: np.ndarray
    costs: np.ndarray
    fittest_genome: np.ndarray
    fittest_rewards: np.ndarray

    def __eq__(self, other):
        if not isinstance(other, GenerationStats):
            return NotImplemented
        return all(
            np.array_equal(getattr(self, k), getattr(other, k)) for k in self.__dataclass_fields__
        )


def fittest_index(fitness) -> int:
    """Highest fitness; ties go to the lowest index."""
    return int(np.argmax(fitness))


def evaluate_generation(
    population: np.ndarray,
    policy: DefensePolicy,
    game_config: GameConfig,
    seeds: RunSeeds,
    generation: int = 0,
    similarity: np.ndarray = TABLE1_SIMILARITY,
    costs=None,
) -> tuple[np.ndarray, GenerationStats]:
    """Play one game per genome against a shared, freshly sampled cost table."""
    if costs is None:
        costs = sample_exploit_costs(seeds.costs(generation), game_config.gamma_mean, game_config.gamma_var)
    costs = np.asarray(costs, dtype=np.int64)
    n = len(population)
    m = game_config.matches
    uniforms = np.empty((n, m, 2))
    for a in range(n):
        uniforms[a] = game_uniforms(seeds.game(generation, a), m)
    initial, actions, transitions = decode_arrays(population)
    diversity, rotation, offset = policy_arrays(policy)
    targets, _, _, reward = _kernel.play_games(
        initial, actions, transitions, costs, np.asarray(similarity, dtype=np.float64),
        uniforms, diversity, rotation, offset, game_config.persistence,
    )
    fitness = reward.sum(axis=1, dtype=np.int64)
    investment = np.stack([np.bincount(t, minlength=N_PLATFORMS) for t in targets.astype(np.int64)])
    best = fittest_index(fitness)
    stats = GenerationStats(
        generation=generation,
        fitness=fitness,
        fittest_index=best,
        fittest_fitness=int(fitness[best]),
        fittest_investment=investment[best],
        population_investment=investment.mean(axis=0),
        costs=costs,
        fittest_genome=np.array(population[best], dtype=np.uint8),
        fittest_rewards=reward[best].astype(np.int8),
    )
    return fitness, stats


def select_parent(rng: np.random.Generator, fitnesses) -> int:
    """Roulette-wheel pick; uniform when every fitness is zero."""
    f = np.asarray(fitnesses, dtype=float)
    if f.size == 0:
        raise ValueError("cannot select from an empty population")
    if np.any(f < 0):
        raise ValueError("fitness values must be non-negative")
    total = f.sum()
    if total <= 0:
        return int(rng.integers(f.size))
    idx = int(np.searchsorted(np.cumsum(f), rng.random() * total, side="right"))
    if idx >= f.size:
        idx = int(np.flatnonzero(f)[-1])
    return idx


def crossover_at(parent1: np.ndarray, parent2: np.ndarray, point: int) -> tuple[np.ndarray, np.ndarray]:
    """Swap tails after the first ``point`` bits."""
    if len(parent1) != len(parent2):
        raise ValueError("parents differ in length")
    child1 = np.concatenate([parent1[:point], parent2[point:]])
    child2 = np.concatenate([parent2[:point], parent1[point:]])
    return child1, child2


def crossover(
    rng: np.random.Generator, parent1: np.ndarray, parent2: np.ndarray, probability: float = 1.0
) -> tuple[np.ndarray, np.ndarray]:
    if len(parent1) != len(parent2):
        raise ValueError("parents differ in length")
    apply = rng.random() < probability
    point = int(rng.integers(1, len(parent1) + 1))
    if not apply:
        return parent1.copy(), parent2.copy()
    return crossover_at(parent1, parent2, point)


def mutate(rng: np.random.Generator, chromosome: np.ndarray, rate: float) -> np.ndarray:
    flips = rng.random(len(chromosome)) < rate
    return np.bitwise_xor(chromosome, flips.astype(chromosome.dtype))


def elite_indices(fitnesses, count: int) -> np.ndarray:
    return np.argsort(-np.asarray(fitnesses), kind="stable")[:count]


def next_generation(rng: np.random.Generator, population: np.ndarray, fitnesses, config: GaConfig) -> np.ndarray:
    n = len(population)
    out = np.empty_like(population)
    elites = elite_indices(fitnesses, config.elite_count)
    out[: len(elites)] = population[elites]
    k = len(elites)
    while k < n:
        a = population[select_parent(rng, fitnesses)]
        b = population[select_parent(rng, fitnesses)]
        c1, c2 = crossover(rng, a, b, config.crossover_probability)
        out[k] = mutate(rng, c1, config.mutation_rate)
        if k + 1 < n:
            out[k + 1] = mutate(rng, c2, config.mutation_rate)
        k += 2
    return out


def initial_population(seeds: RunSeeds, size: int) -> np.ndarray:
    return random_genomes(seeds.init(), size)


def evolve_run(
    ga_config: GaConfig,
    game_config: GameConfig,
    policy: DefensePolicy,
    seed: int,
    run: int = 0,
    similarity: np.ndarray = TABLE1_SIMILARITY,
) -> list[GenerationStats]:
    seeds = RunSeeds(seed, run)
    population = initial_population(seeds, ga_config.population)
    history = []
    for g in range(ga_config.generations):
        fitness, stats = evaluate_generation(population, policy, game_config, seeds, g, similarity)
        history.append(stats)
        population = next_generation(seeds.breed(g), population, fitness, ga_config)
        assert population.shape == (ga_config.population, GENOME_BITS)
    return history
