import itertools
import json

import numpy as np
import pytest
from hypothesis import given, strategies as st

from conftest import cycling_machine
from mtd_evolve.defense import DefensePolicy, schedule
from mtd_evolve.fsm import StrategyMachine, decode, random_genomes
from mtd_evolve.game import (
    ConfigError,
    GameConfig,
    fitness,
    gamma_parameters,
    invest,
    max_fitness,
    persistence_reward,
    play_game,
    play_game_stepwise,
    resolve_match,
    rewards_from_successes,
    sample_exploit_costs,
)
from mtd_evolve.platforms import ExploitPortfolio, Platform

ONES = (1, 1, 1, 1, 1)


def run_length_oracle(successes, threshold=3):
    """Reward via maximal runs: a run of length L pays max(0, L - threshold + 1)."""
    return sum(max(0, len(list(g)) - threshold + 1) for ok, g in itertools.groupby(successes) if ok)


def test_gamma_parameters():
    shape, scale = gamma_parameters(25, 10)
    assert shape == pytest.approx(62.5) and scale == pytest.approx(0.4)
    with pytest.raises(ConfigError):
        gamma_parameters(0, 10)
    with pytest.raises(ConfigError):
        gamma_parameters(25, -1)


def test_cost_moments():
    costs = sample_exploit_costs(np.random.default_rng(21), 25, 10, size=100_000)
    assert costs.dtype.kind == "i" and costs.min() >= 1
    assert costs.mean() == pytest.approx(25, abs=0.5)
    assert costs.var() == pytest.approx(10, abs=1)


def test_costs_clamped_to_one():
    costs = sample_exploit_costs(np.random.default_rng(22), 0.2, 0.01, size=1000)
    assert costs.min() == 1


def test_invest_threshold_crossing():
    p = ExploitPortfolio(cost=(25,) * 5)
    for _ in range(24):
        invest(p, Platform.GENTOO)
    invest(p, Platform.GENTOO)
    assert p.invested[Platform.GENTOO] == 25 and p.developed[Platform.GENTOO]
    invest(p, Platform.GENTOO)
    assert p.wasted[Platform.GENTOO] == 1


def test_resolve_deterministic_cases():
    rng = np.random.default_rng(23)
    p = ExploitPortfolio(cost=ONES)
    assert not any(resolve_match(rng, p, a) for a in range(5) for _ in range(200))
    invest(p, Platform.DEBIAN)
    assert all(resolve_match(rng, p, Platform.DEBIAN) for _ in range(1000))


def test_resolve_cross_platform_rate():
    rng = np.random.default_rng(24)
    p = invest(ExploitPortfolio(cost=ONES), Platform.GENTOO)
    rate = np.mean([resolve_match(rng, p, Platform.FEDORA) for _ in range(100_000)])
    assert rate == pytest.approx(0.8658, abs=0.01)


@pytest.mark.parametrize("run, expected", [(0, 0), (2, 0), (3, 1), (7, 1)])
def test_persistence_reward(run, expected):
    assert persistence_reward(run, 3) == expected


def test_worked_reward_sequence():
    pattern = [True, True, True, True, False, True, True, True]
    assert rewards_from_successes(pattern, 3) == [0, 0, 1, 1, 0, 0, 0, 1]
    assert sum(rewards_from_successes(pattern, 3)) == 3 == run_length_oracle(pattern)


@given(st.lists(st.booleans(), max_size=150), st.integers(1, 6))
def test_reward_matches_run_length_oracle(successes, threshold):
    assert sum(rewards_from_successes(successes, threshold)) == run_length_oracle(successes, threshold)


def test_all_success_and_all_failure():
    assert sum(rewards_from_successes([True] * 100, 3)) == 98
    assert sum(rewards_from_successes([False] * 100, 3)) == 0


@pytest.mark.parametrize("matches", [3, 10, 100])
def test_cycling_machine_beats_diversity(matches):
    cfg = GameConfig(matches=matches)
    result = play_game(cycling_machine(), DefensePolicy.diversity(), ONES, cfg, np.random.default_rng(0))
    assert all(r.success for r in result.log)
    assert [r.run_length for r in result.log] == list(range(1, matches + 1))
    assert result.fitness == matches - 2 == fitness(result)
    assert sum(result.investment) == matches


def test_unaffordable_exploits():
    rng = np.random.default_rng(25)
    cfg = GameConfig(matches=50)
    for g in random_genomes(rng, 20):
        res = play_game(decode(g), DefensePolicy.random(), (999,) * 5, cfg, rng)
        assert res.fitness == 0 and not any(r.success for r in res.log)


def _random_setup(seed):
    rng = np.random.default_rng(seed)
    machine = decode(random_genomes(rng, 1)[0])
    costs = rng.integers(1, 12, 5)
    policy = DefensePolicy.random() if seed % 2 else DefensePolicy.diversity()
    return machine, policy, costs


@pytest.mark.parametrize("seed", range(40))
def test_compiled_and_stepwise_engines_agree(seed):
    machine, policy, costs = _random_setup(seed)
    cfg = GameConfig(matches=60)
    fast = play_game(machine, policy, costs, cfg, np.random.default_rng(seed))
    slow = play_game_stepwise(machine, policy, costs, cfg, np.random.default_rng(seed))
    assert fast == slow


@pytest.mark.parametrize("seed", range(20))
def test_game_invariants(seed):
    machine, policy, costs = _random_setup(seed)
    cfg = GameConfig(matches=80, persistence=3)
    res = play_game(machine, policy, costs, cfg, np.random.default_rng(seed + 100))
    assert 0 <= res.fitness <= max_fitness(cfg)
    assert res.fitness == fitness(res) == run_length_oracle([r.success for r in res.log])
    assert sum(res.investment) == cfg.matches
    assert res.wasted == sum(max(0, i - c) for i, c in zip(res.investment, costs))
    prev = 0
    for r in res.log:
        assert r.run_length == (prev + 1 if r.success else 0)
        assert r.reward == (1 if r.run_length >= 3 else 0)
        prev = r.run_length


def test_replay_is_bit_identical():
    machine, policy, costs = _random_setup(3)
    cfg = GameConfig()
    a = play_game(machine, policy, costs, cfg, np.random.default_rng(99))
    b = play_game(machine, policy, costs, cfg, np.random.default_rng(99))
    assert a == b and a.to_json() == b.to_json()


def test_defender_sequence_matches_schedule():
    machine, _, costs = _random_setup(5)
    cfg = GameConfig(matches=70)
    rng = np.random.default_rng(31)
    u = np.random.default_rng(31).random((70, 2))
    res = play_game(machine, DefensePolicy.random(), costs, cfg, rng)
    assert [r.active_platform for r in res.log] == [int(p) for p in schedule(DefensePolicy.random(), u[:, 0])]


@pytest.mark.parametrize("seed", range(15))
def test_identity_similarity_success_iff_targeted(seed):
    # with no cross-platform effect, success is exactly "targeted exploit developed"
    machine, policy, costs = _random_setup(seed)
    res = play_game(machine, policy, costs, GameConfig(matches=60), np.random.default_rng(seed), np.eye(5))
    invested = np.zeros(5, int)
    for r in res.log:
        invested[r.invested_platform] += 1
        assert r.success == (invested[r.active_platform] >= costs[r.active_platform])


def test_trace_json():
    res = play_game(cycling_machine(), DefensePolicy.diversity(), ONES, GameConfig(matches=5), np.random.default_rng(0))
    data = json.loads(res.to_json())
    assert data["fitness"] == 3 and len(data["log"]) == 5
    assert data["log"][0] == {
        "match_index": 0, "invested_platform": 1, "active_platform": 1,
        "success": True, "run_length": 1, "reward": 0,
    }


def test_game_config_validation():
    with pytest.raises(ConfigError):
        GameConfig(matches=0)
    with pytest.raises(ConfigError):
        GameConfig(persistence=0)
    with pytest.raises(ConfigError):
        GameConfig(gamma_var=0)


def test_machine_actions_drive_investment():
    # always FreeBSD (raw code 4) against diversity: one success in three once developed
    m = StrategyMachine.from_arrays(0, [4] * 16, [[0] * 10 for _ in range(16)])
    res = play_game(m, DefensePolicy.diversity(), (3, 3, 3, 3, 3), GameConfig(matches=30), np.random.default_rng(2), np.eye(5))
    assert res.investment == (0, 0, 0, 0, 30)
    assert res.fitness == 0
    # third investment lands on match 2, the first FreeBSD activation
    assert [r.success for r in res.log][:9] == [False, False, True] * 3
