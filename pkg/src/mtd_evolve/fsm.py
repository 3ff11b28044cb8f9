"""Attacker strategies as 16-state dual-observation finite state machines.

Genome layout (692 bits, every group most-significant bit first)::

    [0, 4)      initial state
    then, for each state s = 0..15, a 43-bit block:
        3 bits  raw action code (investment target, mod 5)
        10 x 4  transition targets, one per observation index 0..9

The observation index packs the platform the defender activated and whether
the attack landed: ``2 * platform + success``.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Mapping

import numpy as np

from .platforms import N_PLATFORMS, PLATFORM_NAMES

N_STATES = 16
N_OBSERVATIONS = 2 * N_PLATFORMS
STATE_BITS = 4
ACTION_BITS = 3
BLOCK_BITS = ACTION_BITS + N_OBSERVATIONS * STATE_BITS
GENOME_BITS = STATE_BITS + N_STATES * BLOCK_BITS

assert GENOME_BITS == 692

_W4 = np.array([8, 4, 2, 1], dtype=np.int64)
_W3 = np.array([4, 2, 1], dtype=np.int64)


class MalformedGenomeError(ValueError):
    pass


class InvalidMachineError(ValueError):
    pass


@dataclass(frozen=True)
class StrategyMachine:
    initial_state: int
    actions: tuple[int, ...]
    transitions: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        if not 0 <= self.initial_state < N_STATES:
            raise InvalidMachineError(f"initial state {self.initial_state} outside 0..15")
        if len(self.actions) != N_STATES or any(not 0 <= a < 8 for a in self.actions):
            raise InvalidMachineError("need 16 action codes in 0..7")
        if len(self.transitions) != N_STATES or any(
            len(row) != N_OBSERVATIONS or any(not 0 <= t < N_STATES for t in row) for row in self.transitions
        ):
            raise InvalidMachineError("transition table must be 16x10 with targets in 0..15")

    @classmethod
    def from_arrays(cls, initial_state, actions, transitions) -> "StrategyMachine":
        return cls(
            int(initial_state),
            tuple(int(a) for a in actions),
            tuple(tuple(int(t) for t in row) for row in transitions),
        )

    def to_dict(self) -> dict:
        return {
            "initial_state": self.initial_state,
            "actions": list(self.actions),
            "transitions": [list(row) for row in self.transitions],
        }

    @classmethod
    def from_dict(cls, data: Mapping) -> "StrategyMachine":
        return cls.from_arrays(data["initial_state"], data["actions"], data["transitions"])


def _as_bits(chromosome) -> np.ndarray:
    bits = np.asarray(chromosome)
    if bits.ndim != 1 or bits.shape[0] != GENOME_BITS:
        raise MalformedGenomeError(f"genome must hold {GENOME_BITS} bits, got shape {bits.shape}")
    if not np.all((bits == 0) | (bits == 1)):
        raise MalformedGenomeError("genome bits must be 0 or 1")
    return bits.astype(np.int64)


def decode_arrays(population: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Vectorised decode of an (N, 692) bit array.

    Returns ``(initial (N,), actions (N, 16), transitions (N, 16, 10))``.
    """
    pop = np.asarray(population, dtype=np.int64)
    if pop.ndim != 2 or pop.shape[1] != GENOME_BITS:
        raise MalformedGenomeError(f"population must be (N, {GENOME_BITS}), got {pop.shape}")
    initial = pop[:, :STATE_BITS] @ _W4
    blocks = pop[:, STATE_BITS:].reshape(len(pop), N_STATES, BLOCK_BITS)
    actions = blocks[:, :, :ACTION_BITS] @ _W3
    transitions = blocks[:, :, ACTION_BITS:].reshape(len(pop), N_STATES, N_OBSERVATIONS, STATE_BITS) @ _W4
    return initial, actions, transitions


def decode(chromosome) -> StrategyMachine:
    bits = _as_bits(chromosome)
    initial, actions, transitions = decode_arrays(bits[None, :])
    return StrategyMachine.from_arrays(initial[0], actions[0], transitions[0])


def _field(value: int, width: int) -> list[int]:
    return [(value >> (width - 1 - i)) & 1 for i in range(width)]


def encode(machine: StrategyMachine) -> np.ndarray:
    bits = _field(machine.initial_state, STATE_BITS)
    for s in range(N_STATES):
        bits += _field(machine.actions[s], ACTION_BITS)
        for target in machine.transitions[s]:
            bits += _field(target, STATE_BITS)
    return np.array(bits, dtype=np.uint8)


def observation_index(platform: int, success: bool) -> int:
    return 2 * int(platform) + (1 if success else 0)


def describe_observation(obs: int) -> str:
    return f"{PLATFORM_NAMES[obs // 2]}/{'S' if obs % 2 else 'F'}"


def _check_state(state: int) -> None:
    if not 0 <= state < N_STATES:
        raise InvalidMachineError(f"state {state} outside 0..15")


def action_target(machine: StrategyMachine, state: int) -> int:
    """Platform the machine invests in while in ``state`` (codes 5-7 wrap mod 5)."""
    _check_state(state)
    return machine.actions[state] % N_PLATFORMS


def transition(machine: StrategyMachine, state: int, obs: int) -> int:
    _check_state(state)
    if not 0 <= obs < N_OBSERVATIONS:
        raise InvalidMachineError(f"observation {obs} outside 0..9")
    return machine.transitions[state][obs]


def reachable_states(machine: StrategyMachine) -> set[int]:
    seen = {machine.initial_state}
    queue = deque(seen)
    while queue:
        s = queue.popleft()
        for t in machine.transitions[s]:
            if t not in seen:
                seen.add(t)
                queue.append(t)
    return seen


def export_graph(machine: StrategyMachine, annotations: Mapping[int, str] | None = None, name: str = "strategy") -> str:
    """Render the reachable part of ``machine`` as Graphviz DOT text.

    Nodes carry the invested platform as label and an ``indegree`` attribute
    (transitions arriving from reachable states); node width scales with it.
    ``annotations`` maps state index to extra label text.
    """
    annotations = annotations or {}
    states = sorted(reachable_states(machine))
    indegree = {s: 0 for s in states}
    for s in states:
        for t in machine.transitions[s]:
            indegree[t] += 1
    max_in = max(indegree.values())

    lines = [f'digraph "{name}" {{', "  node [shape=ellipse];"]
    for s in states:
        label = PLATFORM_NAMES[action_target(machine, s)]
        if s in annotations:
            label += "\\n" + str(annotations[s]).replace('"', r"\"")
        shape = "doublecircle" if s == machine.initial_state else "ellipse"
        width = 0.75 + 1.25 * indegree[s] / max_in
        lines.append(
            f'  s{s} [label="{label}", shape={shape}, indegree={indegree[s]}, width={width:.3f}];'
        )
    for s in states:
        for obs, t in enumerate(machine.transitions[s]):
            lines.append(f'  s{s} -> s{t} [label="{describe_observation(obs)}"];')
    lines.append("}")
    return "\n".join(lines) + "\n"


def random_genomes(rng: np.random.Generator, n: int) -> np.ndarray:
    return rng.integers(0, 2, size=(n, GENOME_BITS), dtype=np.uint8)
