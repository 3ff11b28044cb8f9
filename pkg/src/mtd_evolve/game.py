"""One attacker-defender game: M matches of invest, activate, attack, reward.

Each game consumes a fixed block of ``matches x 2`` uniforms from its
generator (defender draw, attack draw) so that a game can be replayed in
isolation and the compiled and stepwise engines see identical randomness.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field

import numpy as np

from . import _kernel
from .defense import DefenseKind, DefensePolicy, pick_successor, diversity_next
from .fsm import StrategyMachine, action_target, observation_index, transition
from .platforms import (
    N_PLATFORMS,
    PLATFORM_NAMES,
    TABLE1_SIMILARITY,
    ExploitPortfolio,
    combined_success_probability,
)


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class GameConfig:
    matches: int = 100
    persistence: int = 3
    gamma_mean: float = 25.0
    gamma_var: float = 10.0

    def __post_init__(self):
        if int(self.matches) < 1:
            raise ConfigError(f"matches must be >= 1, got {self.matches}")
        if int(self.persistence) < 1:
            raise ConfigError(f"persistence must be >= 1, got {self.persistence}")
        if not (self.gamma_mean > 0 and self.gamma_var > 0):
            raise ConfigError("gamma mean and variance must be positive")

    @property
    def gamma_shape(self) -> float:
        return self.gamma_mean**2 / self.gamma_var

    @property
    def gamma_scale(self) -> float:
        return self.gamma_var / self.gamma_mean


def gamma_parameters(mean: float, var: float) -> tuple[float, float]:
    """Moment-matched (shape, scale)."""
    if not (mean > 0 and var > 0):
        raise ConfigError("gamma mean and variance must be positive")
    return mean**2 / var, var / mean


def sample_exploit_costs(rng: np.random.Generator, mean: float = 25.0, var: float = 10.0, size: int = N_PLATFORMS) -> np.ndarray:
    """Integer investment rounds needed per exploit: rounded Gamma draws, at least 1."""
    shape, scale = gamma_parameters(mean, var)
    draws = rng.gamma(shape, scale, size=size)
    return np.maximum(np.rint(draws), 1).astype(np.int64)


def invest(portfolio: ExploitPortfolio, target: int) -> ExploitPortfolio:
    portfolio.invest(target)
    return portfolio


def _resolve(u: float, portfolio: ExploitPortfolio, active: int, similarity: np.ndarray) -> bool:
    return u < combined_success_probability(portfolio, active, similarity)


def resolve_match(
    rng: np.random.Generator, portfolio: ExploitPortfolio, active: int, similarity: np.ndarray = TABLE1_SIMILARITY
) -> bool:
    """Attack ``active`` with every developed exploit; consumes one draw."""
    return _resolve(rng.random(), portfolio, active, similarity)


def persistence_reward(run_length: int, threshold: int = 3) -> int:
    return 1 if run_length >= threshold else 0


def rewards_from_successes(successes, threshold: int = 3) -> list[int]:
    rewards = []
    run = 0
    for s in successes:
        run = run + 1 if s else 0
        rewards.append(persistence_reward(run, threshold))
    return rewards


@dataclass(frozen=True)
class MatchRecord:
    match_index: int
    invested_platform: int
    active_platform: int
    success: bool
    run_length: int
    reward: int


@dataclass
class GameResult:
    fitness: int
    log: list[MatchRecord]
    investment: tuple[int, ...]
    wasted: int
    costs: tuple[int, ...] = field(default=())

    def to_json(self) -> str:
        data = asdict(self)
        data["platforms"] = list(PLATFORM_NAMES)
        return json.dumps(data, indent=1)


def fitness(result: GameResult) -> int:
    return sum(r.reward for r in result.log)


def game_uniforms(rng: np.random.Generator, matches: int) -> np.ndarray:
    return rng.random((matches, 2))


def _result_from_arrays(targets, active, success, reward, costs) -> GameResult:
    log = []
    run = 0
    for j in range(len(targets)):
        run = run + 1 if success[j] else 0
        log.append(MatchRecord(j, int(targets[j]), int(active[j]), bool(success[j]), run, int(reward[j])))
    investment = np.bincount(np.asarray(targets, dtype=np.int64), minlength=N_PLATFORMS)
    wasted = int(np.maximum(investment - np.asarray(costs), 0).sum())
    return GameResult(
        fitness=int(np.sum(reward)),
        log=log,
        investment=tuple(int(x) for x in investment),
        wasted=wasted,
        costs=tuple(int(c) for c in costs),
    )


def policy_arrays(policy: DefensePolicy) -> tuple[bool, np.ndarray, int]:
    rotation = np.array([int(p) for p in policy.rotation], dtype=np.int64)
    return policy.kind is DefenseKind.DIVERSITY, rotation, int(policy.offset)


def play_game(
    machine: StrategyMachine,
    policy: DefensePolicy,
    costs,
    config: GameConfig,
    rng: np.random.Generator,
    similarity: np.ndarray = TABLE1_SIMILARITY,
) -> GameResult:
    costs = np.asarray(costs, dtype=np.int64)
    u = game_uniforms(rng, config.matches)
    diversity, rotation, offset = policy_arrays(policy)
    targets, active, success, reward = _kernel.play_games(
        np.array([machine.initial_state], dtype=np.int64),
        np.array([machine.actions], dtype=np.int64),
        np.array([machine.transitions], dtype=np.int64),
        costs,
        np.asarray(similarity, dtype=np.float64),
        u[None, :, :],
        diversity,
        rotation,
        offset,
        config.persistence,
    )
    return _result_from_arrays(targets[0], active[0], success[0], reward[0], costs)


def play_game_stepwise(
    machine: StrategyMachine,
    policy: DefensePolicy,
    costs,
    config: GameConfig,
    rng: np.random.Generator,
    similarity: np.ndarray = TABLE1_SIMILARITY,
) -> GameResult:
    """Plain-Python twin of ``play_game`` built from the per-match operations."""
    portfolio = ExploitPortfolio(tuple(costs))
    state = machine.initial_state
    previous = None
    run = 0
    log = []
    for j in range(config.matches):
        u_defender, u_attack = rng.random(), rng.random()
        target = action_target(machine, state)
        invest(portfolio, target)
        if policy.kind is DefenseKind.DIVERSITY:
            active = int(diversity_next(j, policy))
        else:
            active = pick_successor(u_defender, previous)
        success = _resolve(u_attack, portfolio, active, similarity)
        run = run + 1 if success else 0
        log.append(MatchRecord(j, target, active, success, run, persistence_reward(run, config.persistence)))
        state = transition(machine, state, observation_index(active, success))
        previous = active
    return GameResult(
        fitness=sum(r.reward for r in log),
        log=log,
        investment=tuple(portfolio.invested),
        wasted=sum(portfolio.wasted),
        costs=tuple(int(c) for c in costs),
    )


def max_fitness(config: GameConfig) -> int:
    return max(0, config.matches - config.persistence + 1)
