"""Node classification, chain covers, sequences, and latency schedules."""

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from polarkit.codes import CodeSpec, construct_frozen_set
from polarkit.tree import (
    NodeId,
    NodeType,
    SourceType,
    classify,
    identify_sr_cover,
    node_census,
    repetition_sequences,
    schedule_time_steps,
    semi_parallel_cycles,
    sr_time_steps,
)


def _spec(bits):
    d = np.array(bits, dtype=np.uint8)
    n = int(np.log2(d.size))
    return CodeSpec(n=n, K=int(d.sum()), d=d)


def test_classify_basics():
    u8 = np.uint8
    assert classify(np.array([0, 0], u8)) is NodeType.RATE0
    assert classify(np.array([1, 1], u8)) is NodeType.RATE1
    assert classify(np.array([0, 0, 0, 1], u8)) is NodeType.REP
    assert classify(np.array([0, 1, 1, 1], u8)) is NodeType.SPC
    assert classify(np.array([1, 0], u8)) is NodeType.RATEC
    assert classify(np.array([0, 1, 0, 1], u8)) is NodeType.RATEC
    # Width-2 single-bit node satisfies both patterns; REP wins.
    assert classify(np.array([0, 1], u8)) is NodeType.REP


def test_nodeid_children():
    assert NodeId(3, 2).children() == (NodeId(2, 3), NodeId(2, 4))
    assert NodeId(1, 1).children() == (NodeId(0, 1), NodeId(0, 2))


def test_sequences_frozen_sets():
    assert repetition_sequences((1, 1)).tolist() == [
        [0, 0, 0, 0],
        [1, 1, 0, 0],
        [1, 0, 1, 0],
        [0, 1, 1, 0],
    ]
    assert repetition_sequences((1,)).tolist() == [[0, 0], [1, 0]]
    assert repetition_sequences(()).tolist() == [[0]]
    assert repetition_sequences((0, 0)).tolist() == [[0, 0, 0, 0]]


@given(st.lists(st.integers(0, 1), min_size=0, max_size=6))
def test_sequences_form_a_group(v):
    v = tuple(v)
    seqs = repetition_sequences(v)
    assert seqs.shape == (1 << sum(v), 1 << len(v))
    assert not seqs[0].any()
    # Last lane is always zero and XOR of two rows is again a row.
    assert not seqs[:, -1].any()
    rows = {r.tobytes() for r in seqs}
    assert len(rows) == seqs.shape[0]
    idx = np.random.default_rng(len(v)).integers(0, seqs.shape[0], size=(8, 2))
    for a, b in idx:
        assert (seqs[a] ^ seqs[b]).tobytes() in rows


# One pattern per structure the chain walk must recognize.  Expected
# tuples are (chain bits, source kind, source level).
CHAIN_CASES = [
    ("rep", [0] * 7 + [1], (0, 0, 0), "Rate-1", 0),
    ("spc", [0] + [1] * 7, (), "EG-PC", 3),
    ("rate1", [1] * 8, (), "Rate-1", 3),
    ("zero-then-rate1", [0] * 4 + [1] * 4, (0,), "Rate-1", 2),
    ("zero-then-spc", [0, 0, 0, 0, 0, 1, 1, 1], (0,), "EG-PC", 2),
    ("double-zero-rep", [0] * 14 + [1, 1], (0, 0, 0), "Rate-1", 1),
    ("double-zero-spc", [0] * 13 + [1, 1, 1], (0, 0), "EG-PC", 2),
    ("parity-prefix-2", [0, 0] + [1] * 6, (), "EG-PC", 3),
    ("rep-prefix-4", [0, 0, 0, 1] + [1] * 12, (), "EG-PC", 4),
    ("mixed-chain", [0] * 11 + [1, 0, 1, 1, 1], (0, 1), "EG-PC", 2),
    ("parity-prefix-4", [0, 0, 0, 0] + [1] * 12, (), "EG-PC", 4),
    ("chain-into-ratec", [0] * 12 + [1, 0, 1, 1], (0, 0), "Rate-C", 2),
    ("rep-then-spc", [0, 0, 0, 1, 0, 1, 1, 1], (1,), "EG-PC", 2),
    ("zero-rep-spc", [0] * 8 + [0, 0, 0, 1, 0, 1, 1, 1], (0, 1), "EG-PC", 2),
    ("two-zeros-rate1", [0] * 12 + [1] * 4, (0, 0), "Rate-1", 2),
    ("rep-rep-spc", [0] * 7 + [1] + [0, 0, 0, 1] + [0, 1, 1, 1], (1, 1), "EG-PC", 2),
    ("deep-chain", [0, 0, 0, 0, 0, 1, 0, 1], (0, 1, 0), "Rate-1", 0),
    ("rep-then-rate1", [0, 0, 0, 1] + [1] * 4, (1,), "Rate-1", 2),
]


@pytest.mark.parametrize("name,bits,v,snt,r", CHAIN_CASES, ids=[c[0] for c in CHAIN_CASES])
def test_cover_chain_walk(name, bits, v, snt, r):
    cover = identify_sr_cover(_spec(bits))
    assert len(cover) == 1
    desc = cover[0]
    assert desc.owner == NodeId(int(np.log2(len(bits))), 1)
    assert desc.v == v
    assert desc.snt.value == snt
    assert desc.r == r
    assert desc.num_sequences == 1 << sum(v)
    assert desc.source_width == 1 << r


def test_cover_rate0_subtree():
    # All-zero segments only appear below structureless parents; the right
    # half here is one.
    cover = identify_sr_cover(_spec([1, 0, 1, 1, 0, 0, 0, 0]))
    owners = {desc.owner: desc for desc in cover}
    assert NodeId(2, 2) in owners
    desc = owners[NodeId(2, 2)]
    assert desc.snt is SourceType.RATE0
    assert desc.v == ()


def test_cover_partitions_leaves():
    rng = np.random.default_rng(42)
    for _ in range(200):
        n = int(rng.integers(3, 8))
        N = 1 << n
        K = int(rng.integers(1, N + 1))
        d = np.zeros(N, dtype=np.uint8)
        d[rng.choice(N, size=K, replace=False)] = 1
        cover = identify_sr_cover(CodeSpec(n, K, d))
        seen = np.zeros(N, dtype=bool)
        for desc in cover:
            w = 1 << desc.owner.j
            lo = (desc.owner.i - 1) * w
            assert not seen[lo : lo + w].any()
            seen[lo : lo + w] = True
        assert seen.all()


def test_general_count_is_cover_count_minus_one():
    rng = np.random.default_rng(9)
    for _ in range(100):
        n = int(rng.integers(4, 7))
        N = 1 << n
        K = int(rng.integers(1, N + 1))
        d = np.zeros(N, dtype=np.uint8)
        d[rng.choice(N, size=K, replace=False)] = 1
        census = node_census(CodeSpec(n, K, d))
        assert census.general_total == census.sr_total - 1


def test_census_frozen_example():
    census = node_census(_spec([1, 0, 1, 1, 0, 0, 0, 1]))
    assert census.sr_total == 4
    assert census.general_total == 3
    assert census.by_num_sequences == {1: 4}
    assert census.sr_levels == {0: 2, 1: 1, 2: 1}


@pytest.mark.parametrize(
    "bits,steps",
    [
        ([0, 0, 0, 1], 1),
        ([0] * 12 + [1, 0, 1, 1], 7),
        ([0, 0, 0, 1] + [1] * 12, 2),
        ([0, 0, 0, 1, 0, 1, 1, 1], 2),
        ([0] * 7 + [1] + [0, 0, 0, 1] + [0, 1, 1, 1], 2),
        ([1] * 8, 0),
    ],
)
def test_sr_time_steps_frozen(bits, steps):
    desc = identify_sr_cover(_spec(bits))[0]
    assert sr_time_steps(desc) == steps


def test_sc_schedule_is_2n_minus_2():
    for n in range(1, 7):
        spec = CodeSpec(n, 1 << n, np.ones(1 << n, dtype=np.uint8))
        rep = schedule_time_steps(spec, None, "sc")
        assert rep.time_steps == 2 * (1 << n) - 2


def test_srfsc_schedule_frozen_example():
    spec = _spec([1, 0, 1, 1, 0, 0, 0, 1])
    cover = identify_sr_cover(spec)
    rep = schedule_time_steps(spec, cover, "srfsc", pe=2)
    assert rep.time_steps == 7
    assert rep.time_steps == sum(c for _, _, c in rep.per_node)
    assert rep.cycles == 9
    assert semi_parallel_cycles(spec, cover, 2) == 9
    assert semi_parallel_cycles(spec, cover, 1) == 16
    kinds = [k for _, k, _ in rep.per_node]
    assert kinds.count("general") == 3


def test_srfsc_never_slower_than_sc():
    rng = np.random.default_rng(4)
    for _ in range(50):
        n = int(rng.integers(3, 8))
        N = 1 << n
        K = int(rng.integers(1, N + 1))
        d = np.zeros(N, dtype=np.uint8)
        d[rng.choice(N, size=K, replace=False)] = 1
        spec = CodeSpec(n, K, d)
        cover = identify_sr_cover(spec)
        fast = schedule_time_steps(spec, cover, "srfsc").time_steps
        assert fast <= 2 * N - 2


def test_cycles_equal_steps_with_enough_lanes():
    spec = construct_frozen_set(6, 32, 0.9)
    cover = identify_sr_cover(spec)
    for mode, cov in (("sc", None), ("srfsc", cover)):
        rep = schedule_time_steps(spec, cov, mode, pe=32)
        assert rep.cycles == rep.time_steps


def test_semi_parallel_overhead_per_cover():
    spec = construct_frozen_set(5, 16, 0.9)
    cover = identify_sr_cover(spec)
    base = semi_parallel_cycles(spec, cover, 4)
    assert semi_parallel_cycles(spec, cover, 4, overhead=3) == base + 3 * len(cover)


def test_schedule_validation():
    spec = construct_frozen_set(4, 8, 0.9)
    with pytest.raises(ValueError):
        schedule_time_steps(spec, None, "bogus")
    with pytest.raises(ValueError):
        schedule_time_steps(spec, [], "srfsc")
    with pytest.raises(ValueError):
        semi_parallel_cycles(spec, identify_sr_cover(spec), 3)
