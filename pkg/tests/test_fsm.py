import numpy as np
import pydot
import pytest
from hypothesis import given, strategies as st

from mtd_evolve.fsm import (
    GENOME_BITS,
    InvalidMachineError,
    MalformedGenomeError,
    StrategyMachine,
    action_target,
    decode,
    encode,
    export_graph,
    observation_index,
    reachable_states,
    transition,
)
from mtd_evolve.platforms import Platform


def machine(initial=0, actions=None, transitions=None):
    return StrategyMachine.from_arrays(initial, actions or [0] * 16, transitions or [[0] * 10 for _ in range(16)])


def random_machine(rng):
    return StrategyMachine.from_arrays(
        rng.integers(16), rng.integers(0, 8, 16), rng.integers(0, 16, (16, 10))
    )


def test_layout_size():
    assert GENOME_BITS == 4 + 16 * (3 + 10 * 4) == 692


def test_zero_genome():
    m = decode(np.zeros(GENOME_BITS, dtype=np.uint8))
    assert m.initial_state == 0
    assert set(m.actions) == {0}
    assert {t for row in m.transitions for t in row} == {0}
    assert encode(machine()).tolist() == [0] * GENOME_BITS


def test_initial_state_bits_msb_first():
    bits = np.zeros(GENOME_BITS, dtype=np.uint8)
    bits[:4] = [0, 1, 0, 1]
    m = decode(bits)
    assert m.initial_state == 5
    assert m == machine(initial=5)


def test_last_transition_occupies_last_bits():
    table = [[0] * 10 for _ in range(16)]
    table[15][9] = 15
    g = encode(machine(transitions=table))
    assert g[-4:].tolist() == [1, 1, 1, 1]
    assert g[:-4].sum() == 0


def test_action_bits_position():
    # state 3's action field starts at 4 + 3*43
    actions = [0] * 16
    actions[3] = 0b101
    g = encode(machine(actions=actions))
    assert g[4 + 3 * 43: 4 + 3 * 43 + 3].tolist() == [1, 0, 1]
    assert g.sum() == 2


def test_all_ones_decodes():
    m = decode(np.ones(GENOME_BITS, dtype=np.uint8))
    assert m.initial_state == 15 and set(m.actions) == {7}


def test_round_trip_random_genomes():
    rng = np.random.default_rng(1)
    genomes = rng.integers(0, 2, (10_000, GENOME_BITS), dtype=np.uint8)
    for g in genomes:
        assert np.array_equal(encode(decode(g)), g)


def test_round_trip_random_machines():
    rng = np.random.default_rng(2)
    for _ in range(10_000):
        m = random_machine(rng)
        assert decode(encode(m)) == m


@pytest.mark.parametrize("length", [0, 691, 693])
def test_malformed_genome(length):
    with pytest.raises(MalformedGenomeError):
        decode(np.zeros(length, dtype=np.uint8))


def test_non_binary_genome():
    g = np.zeros(GENOME_BITS, dtype=np.uint8)
    g[10] = 2
    with pytest.raises(MalformedGenomeError):
        decode(g)


def test_invalid_machine_fields():
    with pytest.raises(InvalidMachineError):
        machine(initial=16)
    with pytest.raises(InvalidMachineError):
        machine(actions=[8] + [0] * 15)
    table = [[0] * 10 for _ in range(16)]
    table[2][2] = 16
    with pytest.raises(InvalidMachineError):
        machine(transitions=table)


@pytest.mark.parametrize(
    "platform, success, expected",
    [(Platform.CENTOS, False, 0), (Platform.CENTOS, True, 1), (Platform.FREEBSD, True, 9), (Platform.DEBIAN, False, 4)],
)
def test_observation_index(platform, success, expected):
    assert observation_index(platform, success) == expected


@pytest.mark.parametrize("code, expected", [(2, Platform.DEBIAN), (7, Platform.DEBIAN), (4, Platform.FREEBSD), (5, Platform.CENTOS), (6, Platform.FEDORA)])
def test_action_target(code, expected):
    actions = [0] * 16
    actions[9] = code
    assert action_target(machine(actions=actions), 9) == expected


def test_action_target_covers_every_code():
    for code in range(8):
        assert action_target(machine(actions=[code] * 16), 0) in range(5)
    with pytest.raises(InvalidMachineError):
        action_target(machine(), 16)


def test_transition_lookup():
    table = [[0] * 10 for _ in range(16)]
    table[3][7] = 12
    m = machine(transitions=table)
    assert transition(m, 3, 7) == 12
    assert transition(machine(), 5, 9) == 0
    with pytest.raises(InvalidMachineError):
        transition(m, 3, 10)


def self_loop(initial=6):
    return machine(initial=initial, transitions=[[s] * 10 for s in range(16)])


@given(st.lists(st.integers(0, 9), max_size=50))
def test_self_loop_never_moves(observations):
    m = self_loop()
    state = m.initial_state
    for obs in observations:
        state = transition(m, state, obs)
    assert state == m.initial_state


def test_reachable_states():
    assert reachable_states(self_loop(3)) == {3}
    ring = machine(transitions=[[(s + 1) % 16] * 10 for s in range(16)])
    assert reachable_states(ring) == set(range(16))


def test_reachable_bound_random():
    rng = np.random.default_rng(3)
    for _ in range(200):
        m = random_machine(rng)
        r = reachable_states(m)
        assert m.initial_state in r and len(r) <= 16


def test_json_dump_round_trip():
    rng = np.random.default_rng(4)
    m = random_machine(rng)
    assert StrategyMachine.from_dict(m.to_dict()) == m


def _parse_dot(text):
    graphs = pydot.graph_from_dot_data(text)
    assert graphs and len(graphs) == 1
    return graphs[0]


def test_dot_self_loop():
    g = _parse_dot(export_graph(self_loop(2)))
    nodes = [n for n in g.get_nodes() if n.get_name() not in ("node", "edge", "graph")]
    assert len(nodes) == 1
    assert len(g.get_edges()) == 10
    assert nodes[0].get("indegree") == "10"


def test_dot_parses_for_random_machines():
    rng = np.random.default_rng(5)
    for _ in range(100):
        m = random_machine(rng)
        g = _parse_dot(export_graph(m, annotations={m.initial_state: 'start "here"'}))
        nodes = [n for n in g.get_nodes() if n.get_name() not in ("node", "edge", "graph")]
        assert len(nodes) == len(reachable_states(m))
        assert len(g.get_edges()) == 10 * len(nodes)
        # in-degree attribute agrees with the parsed edge list
        counts = {}
        for e in g.get_edges():
            counts[e.get_destination()] = counts.get(e.get_destination(), 0) + 1
        for n in nodes:
            assert int(n.get("indegree")) == counts.get(n.get_name(), 0)


def test_dot_labels_name_platforms():
    actions = [4] * 16
    text = export_graph(machine(actions=actions))
    assert 'label="FreeBSD"' in text
    assert 'label="CentOS/F"' in text and 'label="FreeBSD/S"' in text
