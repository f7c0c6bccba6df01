"""Threshold-aided fast decoding and the two-attempt CRC controller.

Structureless internal nodes whose offline LLR mean clears the
eligibility bound carry a precomputed threshold T.  When every input
LLR magnitude at such a node strictly exceeds T, the whole subtree is
skipped and its output taken by elementwise hard decision at zero
cost; otherwise decoding proceeds normally and the failed test costs
nothing.  Structureless means anything outside the one-shot cover
machinery: the walker's own internal nodes, and the interior of a
mixed-rate source segment, which falls back to plain bit-by-bit
decoding and is tested lane by lane on each candidate path.  Cover
subtrees themselves and their closed-form sources never take part.

The two-attempt controller reruns the plain fast decoder from scratch
when the first attempt fails its CRC after at least one skipped
subtree; with no skips the first attempt already matches the plain
decoder, so a rerun could not change the answer.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .codes import CodeSpec, bitrev_permutation, crc_check
from .gaussian import TaConfig
from .sc import f_op, g_op, hard_decisions
from .srfsc import decode_sr, decode_srfsc, source_llrs, tree_beta_to_u
from .tree import NodeId, SourceType, SrDescriptor, cover_index

__all__ = [
    "TaOutcome",
    "MultistageOutcome",
    "try_hard_decide",
    "decode_ta_srfsc",
    "bler_upper_bound",
    "decode_multistage",
]


@dataclass
class TaOutcome:
    u_hat: np.ndarray
    hard_decided: tuple[NodeId, ...]
    comparisons: int
    time_steps: int
    cycles: int
    frozen_violations: int
    crc_pass: bool | None

    @property
    def hard_decided_count(self) -> int:
        return len(self.hard_decided)


def try_hard_decide(node_llr: np.ndarray, threshold: float) -> np.ndarray | None:
    """Elementwise hard decision when every |llr| strictly exceeds the
    threshold; None otherwise."""
    if threshold < 0:
        raise ValueError("threshold must be nonnegative")
    node_llr = np.asarray(node_llr, dtype=np.float64)
    if np.all(np.abs(node_llr) > threshold):
        return hard_decisions(node_llr)
    return None


def _info_crc_ok(spec: CodeSpec, u_hat: np.ndarray) -> bool | None:
    if spec.crc is None:
        return None
    return crc_check(u_hat[spec.info_positions], spec.crc)


def _source_sc_ta(
    alpha: np.ndarray,
    d_segment: np.ndarray,
    node: NodeId,
    ta: TaConfig,
    counters: list[int],
    decided: list[NodeId],
    seen: set[NodeId],
    mode: str,
) -> tuple[np.ndarray, int]:
    """Bit-by-bit source decode with per-node skips; returns (beta, steps)."""
    if node.j == 0:
        if d_segment[0] == 0:
            return np.zeros(1, dtype=np.uint8), 0
        return hard_decisions(alpha), 0
    threshold = ta.thresholds.get(node)
    if threshold is not None:
        counters[0] += 1
        beta = try_hard_decide(alpha, threshold)
        if beta is not None:
            if node not in seen:
                seen.add(node)
                decided.append(node)
            return beta, 0
    half = alpha.size // 2
    even = alpha[0::2]
    odd = alpha[1::2]
    left, right = node.children()
    beta_l, steps_l = _source_sc_ta(
        f_op(even, odd, mode), d_segment[:half], left, ta, counters, decided, seen, mode
    )
    beta_r, steps_r = _source_sc_ta(
        g_op(even, odd, beta_l), d_segment[half:], right, ta, counters, decided, seen, mode
    )
    beta = np.empty(alpha.size, dtype=np.uint8)
    beta[0::2] = beta_l ^ beta_r
    beta[1::2] = beta_r
    return beta, 2 + steps_l + steps_r


def _decode_sr_ta(
    node_llr: np.ndarray,
    desc: SrDescriptor,
    ta: TaConfig,
    counters: list[int],
    decided: list[NodeId],
    seen: set[NodeId],
    mode: str,
) -> tuple[np.ndarray, int]:
    """decode_sr with skip-aware decoding of a mixed-rate source.

    Candidate selection overlaps the first bit-by-bit stages and losing
    paths are dropped as soon as it concludes, so the stage latency is
    the retained path's schedule; with no skips every path takes the
    full schedule and the result matches decode_sr exactly.
    """
    alphas = source_llrs(node_llr, desc)
    count = desc.num_sequences
    src = NodeId(desc.r, desc.E)
    betas = np.empty((count, desc.source_width), dtype=np.uint8)
    lanes = []
    for l in range(count):
        betas[l], lane = _source_sc_ta(
            alphas[l], desc.source_d, src, ta, counters, decided, seen, mode
        )
        lanes.append(lane)
    metrics = (alphas * (1.0 - 2.0 * betas)).sum(axis=1)
    best = int(np.argmax(metrics))
    beta = (betas[best][:, None] ^ desc.sequences[best][None, :]).ravel()
    t1 = 1 if desc.v else 0
    t3 = 2 if count > 1 else 0
    return beta, t1 + max(lanes[best], t3 - 1)


def decode_ta_srfsc(
    spec: CodeSpec,
    cover,
    ta: TaConfig,
    llr: np.ndarray,
    mode: str = "minsum",
    pe: int = 64,
    overhead: int = 0,
) -> TaOutcome:
    """Fast decode with hard-decision skips at thresholded plain nodes."""
    llr = np.asarray(llr, dtype=np.float64)
    if llr.size != spec.N:
        raise ValueError(f"expected {spec.N} LLR values, got {llr.size}")
    cov = cover_index(cover)
    u_hat = np.zeros(spec.N, dtype=np.uint8)
    totals = [0, 0]  # steps, cycles
    decided: list[NodeId] = []
    seen: set[NodeId] = set()
    counters = [0, 0]  # comparisons, frozen violations

    def emit_u(node: NodeId, beta: np.ndarray) -> None:
        base = (node.i - 1) << node.j
        seg = tree_beta_to_u(beta, node.j)
        u_hat[base:base + (1 << node.j)] = seg
        counters[1] += int(seg[spec.d[base:base + (1 << node.j)] == 0].sum())

    def visit(node: NodeId, alpha: np.ndarray) -> np.ndarray:
        desc = cov.get(node)
        if desc is not None:
            if desc.snt is SourceType.RATEC:
                beta, steps = _decode_sr_ta(alpha, desc, ta, counters, decided, seen, mode)
            else:
                beta, steps = decode_sr(alpha, desc, mode)
            width = 1 << (node.j - 1) if node.j >= 1 else 1
            totals[0] += steps
            totals[1] += steps * (-(-width // pe)) + overhead
            emit_u(node, beta)
            return beta
        if node.j == 0:
            raise ValueError("cover does not partition the leaves")
        threshold = ta.thresholds.get(node)
        if threshold is not None:
            counters[0] += 1
            decided_beta = try_hard_decide(alpha, threshold)
            if decided_beta is not None:
                seen.add(node)
                decided.append(node)
                emit_u(node, decided_beta)
                return decided_beta
        width = 1 << (node.j - 1)
        totals[0] += 2
        totals[1] += 2 * (-(-width // pe))
        even = alpha[0::2]
        odd = alpha[1::2]
        left, right = node.children()
        beta_l = visit(left, f_op(even, odd, mode))
        beta_r = visit(right, g_op(even, odd, beta_l))
        beta = np.empty(alpha.size, dtype=np.uint8)
        beta[0::2] = beta_l ^ beta_r
        beta[1::2] = beta_r
        return beta

    visit(NodeId(spec.n, 1), llr[bitrev_permutation(spec.n)])
    return TaOutcome(
        u_hat=u_hat,
        hard_decided=tuple(decided),
        comparisons=counters[0],
        time_steps=totals[0],
        cycles=totals[1],
        frozen_violations=counters[1],
        crc_pass=_info_crc_ok(spec, u_hat),
    )


def bler_upper_bound(epsilon: float, bler_srfsc: float) -> float:
    """Approximate ceiling on the thresholded decoder's block error rate."""
    if not 0.0 <= epsilon <= 1.0 or not 0.0 <= bler_srfsc <= 1.0:
        raise ValueError("inputs must lie in [0, 1]")
    return 1.0 - epsilon * (1.0 - bler_srfsc)


@dataclass
class MultistageOutcome:
    u_hat: np.ndarray
    attempts: int
    time_steps: int
    cycles: int
    crc_pass: bool
    first: TaOutcome


def decode_multistage(
    spec: CodeSpec,
    cover,
    ta: TaConfig,
    llr: np.ndarray,
    mode: str = "minsum",
    pe: int = 64,
    overhead: int = 0,
) -> MultistageOutcome:
    """Thresholded attempt, then a from-scratch plain rerun on CRC
    failure with at least one skipped subtree; latencies add."""
    if spec.crc is None:
        raise ValueError("multistage decoding requires a CRC")
    first = decode_ta_srfsc(spec, cover, ta, llr, mode=mode, pe=pe, overhead=overhead)
    if first.crc_pass or not first.hard_decided:
        return MultistageOutcome(
            u_hat=first.u_hat,
            attempts=1,
            time_steps=first.time_steps,
            cycles=first.cycles,
            crc_pass=bool(first.crc_pass),
            first=first,
        )
    u_hat, report = decode_srfsc(spec, cover, llr, mode=mode, pe=pe, overhead=overhead)
    return MultistageOutcome(
        u_hat=u_hat,
        attempts=2,
        time_steps=first.time_steps + report.time_steps,
        cycles=first.cycles + report.cycles,
        crc_pass=bool(_info_crc_ok(spec, u_hat)),
        first=first,
    )
