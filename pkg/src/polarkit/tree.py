"""Decoding-tree analysis: node taxonomy, subtree cover, latency models.

The decoder tree for a length-2^n code has the root at level n and leaves
at level 0; node (j, i) uses 1-based i and covers the input-bit segment
d[(i-1)*2^j : i*2^j].  A subtree whose descendants are all Rate-0 or REP
nodes, except the rightmost chain ending in a "source" node at level r,
can be decoded in one shot from precomputed repetition sequences.  This
module finds a partition of the tree into maximal such subtrees (the
cover) and prices both latency models against it.

Time-step model: one step per parallel arithmetic batch, bit operations
free.  Cycle model: batches of width 2^(j-1) split across P processing
elements.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import NamedTuple

import numpy as np

from .codes import CodeSpec

__all__ = [
    "NodeType",
    "SourceType",
    "NodeId",
    "SrDescriptor",
    "LatencyReport",
    "Census",
    "classify",
    "repetition_sequences",
    "identify_sr_cover",
    "cover_index",
    "sr_time_steps",
    "schedule_time_steps",
    "semi_parallel_cycles",
    "node_census",
]


class NodeType(Enum):
    RATE0 = "Rate-0"
    RATE1 = "Rate-1"
    REP = "REP"
    SPC = "SPC"
    RATEC = "Rate-C"


class SourceType(Enum):
    RATE0 = "Rate-0"
    RATE1 = "Rate-1"
    EGPC = "EG-PC"
    RATEC = "Rate-C"


class NodeId(NamedTuple):
    j: int
    i: int

    def children(self) -> tuple["NodeId", "NodeId"]:
        return NodeId(self.j - 1, 2 * self.i - 1), NodeId(self.j - 1, 2 * self.i)


def classify(d_segment: np.ndarray) -> NodeType:
    """Pattern-match a frozen-flag segment.

    Length-2 (0,1) matches both the all-frozen-but-last and the
    all-info-but-first patterns; it is reported as REP.
    """
    d = np.asarray(d_segment)
    size = d.size
    if size < 1 or size & (size - 1):
        raise ValueError("segment length must be a power of two")
    ones = int(d.sum())
    if ones == 0:
        return NodeType.RATE0
    if ones == size:
        return NodeType.RATE1
    if size >= 2 and ones == 1 and d[-1] == 1:
        return NodeType.REP
    if size >= 2 and ones == size - 1 and d[0] == 0:
        return NodeType.SPC
    return NodeType.RATEC


def repetition_sequences(v: tuple[int, ...]) -> np.ndarray:
    """All length-2^|v| XOR patterns generated by the REP entries of v.

    v lists the left-sibling kinds along the rightmost chain from the
    subtree root down (0 = Rate-0, 1 = REP).  Each REP sibling
    contributes one free bit; enumeration order makes the bit of the
    deepest REP sibling toggle fastest.  Row l is the Kronecker-style
    XOR combination, deepest factor leftmost, so every row ends in 0.
    """
    depth = len(v)
    free_positions = [depth - 1 - idx for idx, bit in enumerate(v) if bit == 1]
    # free_positions[k] = distance of the k-th REP sibling from the source,
    # ascending, matching counter bit k.
    free_positions.sort()
    count = 1 << len(free_positions)
    out = np.zeros((count, 1 << depth), dtype=np.uint8)
    for l in range(count):
        eta = np.zeros(depth, dtype=np.uint8)
        for bit_idx, pos in enumerate(free_positions):
            eta[pos] = (l >> bit_idx) & 1
        acc = np.zeros(1, dtype=np.uint8)
        for pos in range(depth):
            factor = np.array([eta[pos], 0], dtype=np.uint8)
            acc = (acc[:, None] ^ factor[None, :]).ravel()
        out[l] = acc
    out.setflags(write=False)
    return out


@dataclass(frozen=True, eq=False)
class SrDescriptor:
    """One cover subtree: owner node, chain vector, source node layout."""

    owner: NodeId
    v: tuple[int, ...]
    snt: SourceType
    r: int
    sequences: np.ndarray
    source_d: np.ndarray
    egpc_prefix_len: int = 0
    egpc_leftmost_rep: bool = False

    def __post_init__(self):
        self.sequences.setflags(write=False)
        self.source_d.setflags(write=False)

    @property
    def E(self) -> int:
        return self.owner.i * (1 << (self.owner.j - self.r))

    @property
    def width(self) -> int:
        return 1 << self.owner.j

    @property
    def source_width(self) -> int:
        return 1 << self.r

    @property
    def block_len(self) -> int:
        return 1 << (self.owner.j - self.r)

    @property
    def num_sequences(self) -> int:
        return self.sequences.shape[0]

    @property
    def egpc_block_len(self) -> int:
        if self.snt is not SourceType.EGPC:
            raise ValueError("egpc_block_len is defined for EG-PC sources only")
        return self.source_width // self.egpc_prefix_len


def _egpc_structure(d: np.ndarray) -> tuple[int, bool] | None:
    """Prefix length and kind if d is a shared-parity block pattern.

    Requires length >= 4, a power-of-two prefix no longer than a quarter
    of the segment (an all-zero prefix, or an all-zero-then-1 REP
    prefix), and an all-ones tail.  The all-zero prefix is preferred
    when both readings apply; it yields the even-parity decoder.
    """
    size = d.size
    if size < 4 or d[0] != 0:
        return None
    ones = np.flatnonzero(d)
    if ones.size == 0:
        return None
    first_one = int(ones[0])
    quarter = size // 4
    p = first_one
    if p >= 1 and p <= quarter and (p & (p - 1)) == 0 and d[p:].all():
        return p, False
    q = first_one + 1
    if q >= 2 and q <= quarter and (q & (q - 1)) == 0 and d[q:].all():
        return q, True
    return None


def _walk_chain(j: int, d: np.ndarray):
    """Follow the rightmost chain from a level-j node as far as the
    left siblings stay Rate-0 or REP; type the node where it stops.

    Returns (v, snt, r, source_d, prefix_len, leftmost_rep).  A stop
    with snt=Rate-C and empty v means no such subtree is rooted here.
    """
    v: list[int] = []
    level = j
    seg = d
    while True:
        t = classify(seg)
        if t is NodeType.RATE0:
            return v, SourceType.RATE0, level, seg, 0, False
        if t is NodeType.RATE1:
            return v, SourceType.RATE1, level, seg, 0, False
        egpc = _egpc_structure(seg)
        if egpc is not None:
            return v, SourceType.EGPC, level, seg, egpc[0], egpc[1]
        if level >= 1:
            half = seg.size // 2
            left = seg[:half]
            lt = classify(left)
            if lt is NodeType.RATE0 or lt is NodeType.REP:
                v.append(0 if lt is NodeType.RATE0 else 1)
                level -= 1
                seg = seg[half:]
                continue
        return v, SourceType.RATEC, level, seg, 0, False


def identify_sr_cover(spec: CodeSpec) -> list[SrDescriptor]:
    """Partition the leaves into maximal one-shot subtrees.

    Walks from the root; a node roots a cover subtree unless its chain
    walk stops immediately on a structureless segment, in which case
    both children are explored.  Descriptors come out in left-to-right
    (decoding) order.
    """
    out: list[SrDescriptor] = []

    def visit(node: NodeId, seg: np.ndarray) -> None:
        v, snt, r, source_d, prefix_len, leftmost_rep = _walk_chain(node.j, seg)
        if snt is SourceType.RATEC and not v:
            left, right = node.children()
            half = seg.size // 2
            visit(left, seg[:half])
            visit(right, seg[half:])
            return
        out.append(
            SrDescriptor(
                owner=node,
                v=tuple(v),
                snt=snt,
                r=r,
                sequences=repetition_sequences(tuple(v)),
                source_d=np.array(source_d, dtype=np.uint8),
                egpc_prefix_len=prefix_len,
                egpc_leftmost_rep=leftmost_rep,
            )
        )

    visit(NodeId(spec.n, 1), spec.d)
    return out


def cover_index(cover) -> dict[NodeId, SrDescriptor]:
    if isinstance(cover, dict):
        return cover
    return {desc.owner: desc for desc in cover}


def sr_time_steps(desc: SrDescriptor) -> int:
    """Time steps to decode one cover subtree.

    Soft-input preparation costs one step when the chain is nonempty;
    the source decode costs nothing (Rate-0/Rate-1), one or two steps
    (shared-parity, two when the parity itself must be estimated), or a
    full SC pass (Rate-C); candidate selection costs two steps, one of
    which overlaps the following g computation.
    """
    t1 = 1 if desc.v else 0
    if desc.snt is SourceType.RATEC:
        t2 = (1 << (desc.r + 1)) - 2
    elif desc.snt is SourceType.EGPC:
        t2 = 2 if desc.egpc_leftmost_rep else 1
    else:
        t2 = 0
    t3 = 2 if desc.num_sequences > 1 else 0
    return t1 + max(t2, t3 - 1)


@dataclass(frozen=True)
class LatencyReport:
    time_steps: int
    cycles: int
    per_node: tuple[tuple[NodeId, str, int], ...] = field(repr=False, default=())


def _batch_cycles(j: int, pe: int) -> int:
    # batches at a level-j node span 2^(j-1) lanes
    width = 1 << (j - 1) if j >= 1 else 1
    return -(-width // pe)


def _iter_schedule(spec: CodeSpec, cover, mode: str):
    """Yield (NodeId, kind, steps) in decoding order for a static schedule."""
    if mode not in ("sc", "srfsc"):
        raise ValueError("mode must be 'sc' or 'srfsc'")
    cov = cover_index(cover) if mode == "srfsc" else {}

    def visit(node: NodeId):
        desc = cov.get(node)
        if desc is not None:
            yield node, desc.snt.value, sr_time_steps(desc)
            return
        if node.j == 0:
            if mode == "srfsc":
                raise ValueError("cover does not partition the leaves")
            return
        yield node, "general", 2
        left, right = node.children()
        yield from visit(left)
        yield from visit(right)

    yield from visit(NodeId(spec.n, 1))


def schedule_time_steps(spec: CodeSpec, cover, mode: str, pe: int = 64) -> LatencyReport:
    """Static latency of a full decode under the given schedule."""
    entries = []
    steps = 0
    cycles = 0
    for node, kind, cost in _iter_schedule(spec, cover, mode):
        entries.append((node, kind, cost))
        steps += cost
        cycles += cost * _batch_cycles(node.j, pe)
    return LatencyReport(time_steps=steps, cycles=cycles, per_node=tuple(entries))


def semi_parallel_cycles(
    spec: CodeSpec,
    cover,
    pe: int,
    overhead: int = 0,
    mode: str = "srfsc",
) -> int:
    """Clock cycles with at most `pe` processing elements.

    Every scheduled step at a level-j node turns into ceil(2^(j-1)/pe)
    cycles; `overhead` adds a flat pipeline-register charge per cover
    subtree.
    """
    if pe < 1 or pe & (pe - 1):
        raise ValueError("pe must be a power of two >= 1")
    total = 0
    for node, kind, cost in _iter_schedule(spec, cover, mode):
        total += cost * _batch_cycles(node.j, pe)
        if kind != "general":
            total += overhead
    return total


@dataclass(frozen=True)
class Census:
    sr_total: int
    general_total: int
    by_num_sequences: dict[int, int]
    sr_levels: dict[int, int]


def node_census(spec: CodeSpec, cover=None) -> Census:
    """Counts of cover subtrees (grouped by path count and by level) and
    of the plain internal nodes above them."""
    if cover is None:
        cover = identify_sr_cover(spec)
    by_seq: dict[int, int] = {}
    by_level: dict[int, int] = {}
    for desc in cover:
        by_seq[desc.num_sequences] = by_seq.get(desc.num_sequences, 0) + 1
        by_level[desc.owner.j] = by_level.get(desc.owner.j, 0) + 1
    general = sum(
        1 for _node, kind, _cost in _iter_schedule(spec, cover, "srfsc") if kind == "general"
    )
    return Census(
        sr_total=len(cover),
        general_total=general,
        by_num_sequences=dict(sorted(by_seq.items())),
        sr_levels=dict(sorted(by_level.items())),
    )
