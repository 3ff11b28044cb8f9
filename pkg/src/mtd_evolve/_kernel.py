"""Compiled match loop shared by single games and whole generations.

Mirrors ``game.play_game_stepwise`` operation for operation (same draw
layout, same float arithmetic order) so the two agree bit for bit.
"""

import numpy as np
from numba import njit

N_PLATFORMS = 5


@njit(cache=True)
def _successor(u, previous):
    if previous < 0:
        return min(int(u * N_PLATFORMS), N_PLATFORMS - 1)
    k = min(int(u * (N_PLATFORMS - 1)), N_PLATFORMS - 2)
    if k >= previous:
        return k + 1
    return k


@njit(cache=True)
def _success_probability(developed, active, sim):
    if developed[active]:
        return 1.0
    miss = 1.0
    for e in range(N_PLATFORMS):
        if developed[e] and e != active:
            miss *= 1.0 - sim[e, active]
    return 1.0 - miss


@njit(cache=True)
def play_games(initial, actions, transitions, costs, sim, uniforms, diversity, rotation, offset, threshold):
    """Play one game per agent.

    uniforms has shape (n_agents, matches, 2): column 0 drives the defender,
    column 1 the attack resolution. Returns int8 arrays (n_agents, matches)
    of invested platform, active platform, success flag and reward.
    """
    n_agents = uniforms.shape[0]
    matches = uniforms.shape[1]
    targets = np.zeros((n_agents, matches), np.int8)
    active_out = np.zeros((n_agents, matches), np.int8)
    success_out = np.zeros((n_agents, matches), np.int8)
    reward_out = np.zeros((n_agents, matches), np.int8)
    invested = np.zeros(N_PLATFORMS, np.int64)
    developed = np.zeros(N_PLATFORMS, np.bool_)
    n_rot = rotation.shape[0]
    for a in range(n_agents):
        invested[:] = 0
        developed[:] = False
        state = initial[a]
        previous = -1
        run = 0
        for j in range(matches):
            target = actions[a, state] % N_PLATFORMS
            invested[target] += 1
            if not developed[target] and invested[target] >= costs[target]:
                developed[target] = True
            if diversity:
                active = rotation[(j + offset) % n_rot]
            else:
                active = _successor(uniforms[a, j, 0], previous)
            p = _success_probability(developed, active, sim)
            success = uniforms[a, j, 1] < p
            if success:
                run += 1
            else:
                run = 0
            targets[a, j] = target
            active_out[a, j] = active
            success_out[a, j] = success
            reward_out[a, j] = 1 if run >= threshold else 0
            state = transitions[a, state, 2 * active + (1 if success else 0)]
            previous = active
    return targets, active_out, success_out, reward_out
