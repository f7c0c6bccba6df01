"""One-shot decoding of cover subtrees and the fast tree walker.

A cover subtree collapses to its source segment: every repetition
sequence spawns one candidate path, the source is decoded per path from
sign-combined LLR blocks, and the best path wins by correlation metric.
The tree walker runs the plain SC schedule between cover subtrees.

All hard outputs are in tree lane order; input-bit segments are
recovered at each cover subtree by undoing the lane permutation and
applying the self-inverse transform.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .codes import CodeSpec, bitrev_permutation, polar_transform
from .sc import f_op, g_op, hard_decisions, sc_node
from .tree import (
    LatencyReport,
    NodeId,
    SourceType,
    SrDescriptor,
    cover_index,
    sr_time_steps,
)

__all__ = [
    "PathState",
    "source_llrs",
    "egpc_parity",
    "wagner_decode",
    "decode_source",
    "select_path",
    "decode_sr",
    "tree_beta_to_u",
    "count_frozen_violations",
    "decode_srfsc",
]


def source_llrs(node_llr: np.ndarray, desc: SrDescriptor) -> np.ndarray:
    """Per-path source LLRs, shape (num_sequences, source_width).

    Path l, source lane k:  sum over the k-th length-2^(j-r) block of
    the node LLRs, each term signed by the corresponding sequence bit.
    """
    node_llr = np.asarray(node_llr, dtype=np.float64)
    if node_llr.size != desc.width:
        raise ValueError(f"expected {desc.width} LLR values, got {node_llr.size}")
    blocks = node_llr.reshape(desc.source_width, desc.block_len)
    signs = 1.0 - 2.0 * desc.sequences.astype(np.float64)
    return signs @ blocks.T


def _block_aggregate(blocks: np.ndarray, mode: str) -> np.ndarray:
    # check-node chain over the last axis
    if mode == "minsum":
        sign = np.where((blocks < 0).sum(axis=-1) % 2 == 1, -1.0, 1.0)
        return sign * np.abs(blocks).min(axis=-1)
    if mode == "exact":
        prod = np.tanh(blocks / 2.0).prod(axis=-1)
        prod = np.clip(prod, -1.0 + 1e-12, 1.0 - 1e-12)
        return 2.0 * np.arctanh(prod)
    raise ValueError(f"unknown arithmetic mode: {mode!r}")


def egpc_parity(path_llr: np.ndarray, desc: SrDescriptor, mode: str = "minsum") -> int:
    """Shared parity of all check blocks: fixed 0 for an all-zero
    prefix, otherwise decided from the summed block aggregates."""
    if desc.snt is not SourceType.EGPC:
        raise ValueError("parity is defined for EG-PC sources only")
    if not desc.egpc_leftmost_rep:
        return 0
    blocks = np.asarray(path_llr, dtype=np.float64).reshape(
        desc.egpc_prefix_len, desc.egpc_block_len
    )
    return int(_block_aggregate(blocks, mode).sum() < 0)


def wagner_decode(llr: np.ndarray, z: int) -> np.ndarray:
    """Hard decisions, then flip the weakest bit if the parity is off.

    Ties on |llr| resolve to the lowest index.
    """
    llr = np.asarray(llr, dtype=np.float64)
    if llr.size == 0:
        raise ValueError("empty LLR vector")
    bits = hard_decisions(llr)
    if int(bits.sum()) % 2 != z:
        bits[int(np.argmin(np.abs(llr)))] ^= 1
    return bits


def decode_source(path_llr: np.ndarray, desc: SrDescriptor, mode: str = "minsum") -> np.ndarray:
    """Hard output of the source segment for one path."""
    path_llr = np.asarray(path_llr, dtype=np.float64)
    if desc.snt is SourceType.RATE0:
        return np.zeros(desc.source_width, dtype=np.uint8)
    if desc.snt is SourceType.RATE1:
        return hard_decisions(path_llr)
    if desc.snt is SourceType.EGPC:
        z = egpc_parity(path_llr, desc, mode)
        blocks = path_llr.reshape(desc.egpc_prefix_len, desc.egpc_block_len)
        out = np.empty_like(blocks, dtype=np.uint8)
        for b in range(blocks.shape[0]):
            out[b] = wagner_decode(blocks[b], z)
        return out.ravel()
    return sc_node(path_llr, desc.source_d, mode)


@dataclass
class PathState:
    path_llr: np.ndarray
    path_beta: np.ndarray
    metric: float


def select_path(paths: list[PathState]) -> int:
    """0-based index of the highest metric; ties go to the lowest index."""
    if not paths:
        raise ValueError("no paths to select from")
    metrics = np.array([p.metric for p in paths])
    return int(np.argmax(metrics))


def decode_sr(node_llr: np.ndarray, desc: SrDescriptor, mode: str = "minsum") -> tuple[np.ndarray, int]:
    """Decode one cover subtree; returns (hard output, time steps).

    Every path decodes its source independently; the winner maximizes
    sum((-1)^beta * llr) over the source lanes, which equals the same
    correlation over the full subtree output.
    """
    alphas = source_llrs(node_llr, desc)
    count = desc.num_sequences
    betas = np.empty((count, desc.source_width), dtype=np.uint8)
    if desc.snt is SourceType.RATE0:
        betas[:] = 0
    elif desc.snt is SourceType.RATE1:
        betas[:] = alphas < 0
    else:
        for l in range(count):
            betas[l] = decode_source(alphas[l], desc, mode)
    metrics = (alphas * (1.0 - 2.0 * betas)).sum(axis=1)
    best = int(np.argmax(metrics))
    beta = (betas[best][:, None] ^ desc.sequences[best][None, :]).ravel()
    return beta, sr_time_steps(desc)


def tree_beta_to_u(beta: np.ndarray, j: int) -> np.ndarray:
    """Input bits of a level-j subtree from its lane-ordered hard output."""
    return polar_transform(np.asarray(beta, dtype=np.uint8)[bitrev_permutation(j)])


def count_frozen_violations(spec: CodeSpec, u_hat: np.ndarray) -> int:
    """Nonzero decisions at frozen positions (diagnostic; not corrected)."""
    return int(np.asarray(u_hat)[spec.d == 0].sum())


def decode_srfsc(
    spec: CodeSpec,
    cover,
    llr: np.ndarray,
    mode: str = "minsum",
    pe: int = 64,
    overhead: int = 0,
    breakdown: bool = False,
) -> tuple[np.ndarray, LatencyReport]:
    """SC schedule with cover subtrees decoded in one shot."""
    llr = np.asarray(llr, dtype=np.float64)
    if llr.size != spec.N:
        raise ValueError(f"expected {spec.N} LLR values, got {llr.size}")
    cov = cover_index(cover)
    u_hat = np.zeros(spec.N, dtype=np.uint8)
    entries: list = []
    totals = [0, 0]  # steps, cycles

    def visit(node: NodeId, alpha: np.ndarray) -> np.ndarray:
        desc = cov.get(node)
        if desc is not None:
            beta, steps = decode_sr(alpha, desc, mode)
            width = 1 << (node.j - 1) if node.j >= 1 else 1
            totals[0] += steps
            totals[1] += steps * (-(-width // pe)) + overhead
            if breakdown:
                entries.append((node, desc.snt.value, steps))
            base = (node.i - 1) << node.j
            u_hat[base:base + (1 << node.j)] = tree_beta_to_u(beta, node.j)
            return beta
        if node.j == 0:
            raise ValueError("cover does not partition the leaves")
        width = 1 << (node.j - 1)
        totals[0] += 2
        totals[1] += 2 * (-(-width // pe))
        if breakdown:
            entries.append((node, "general", 2))
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
    report = LatencyReport(time_steps=totals[0], cycles=totals[1], per_node=tuple(entries))
    return u_hat, report
