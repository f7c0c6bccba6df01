"""Successive-cancellation decoding over the LLR domain.

The recursion works on a buffer whose lanes pair up adjacent entries:
the left child sees f(a[2k], a[2k+1]), the right child sees
g(a[2k], a[2k+1], left_bit[k]), and hard outputs interleave back as
beta[2k] = L^R, beta[2k+1] = R.  Channel LLRs enter the root through
the bit-reversal permutation so that leaf k is input bit u[k] of the
natural-order transform used by the encoder.

Used directly as the baseline decoder and as the fallback arithmetic
for structureless source segments in the fast decoder.
"""

from __future__ import annotations

import numpy as np

from .codes import CodeSpec, bitrev_permutation
from .tree import LatencyReport, NodeId

__all__ = ["f_op", "g_op", "hard_decisions", "decode_sc"]


def f_op(x, y, mode: str = "minsum"):
    """Check-node LLR combine; sign(0) counts as +1."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if mode == "minsum":
        sx = np.where(x < 0, -1.0, 1.0)
        sy = np.where(y < 0, -1.0, 1.0)
        return sx * sy * np.minimum(np.abs(x), np.abs(y))
    if mode == "exact":
        prod = np.tanh(x / 2.0) * np.tanh(y / 2.0)
        prod = np.clip(prod, -1.0 + 1e-12, 1.0 - 1e-12)
        return 2.0 * np.arctanh(prod)
    raise ValueError(f"unknown arithmetic mode: {mode!r}")


def g_op(x, y, u):
    """Variable-node combine (-1)^u * x + y."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    u = np.asarray(u)
    return np.where(u == 0, x, -x) + y


def hard_decisions(llr) -> np.ndarray:
    """0 for llr >= 0, else 1."""
    return (np.asarray(llr) < 0).astype(np.uint8)


def sc_node(alpha: np.ndarray, d_segment: np.ndarray, mode: str = "minsum",
            out_u: np.ndarray | None = None, base: int = 0) -> np.ndarray:
    """Decode one subtree, returning its hard output in tree layout.

    When out_u is given, leaf decisions land in out_u[base:base+len].
    alpha must already be in the subtree's internal lane order.
    """
    size = alpha.size
    if size == 1:
        if d_segment[0] == 0:
            bit = np.zeros(1, dtype=np.uint8)
        else:
            bit = hard_decisions(alpha)
        if out_u is not None:
            out_u[base] = bit[0]
        return bit
    half = size // 2
    even = alpha[0::2]
    odd = alpha[1::2]
    beta_l = sc_node(f_op(even, odd, mode), d_segment[:half], mode, out_u, base)
    beta_r = sc_node(g_op(even, odd, beta_l), d_segment[half:], mode, out_u, base + half)
    beta = np.empty(size, dtype=np.uint8)
    beta[0::2] = beta_l ^ beta_r
    beta[1::2] = beta_r
    return beta


def decode_sc(spec: CodeSpec, llr: np.ndarray, mode: str = "minsum",
              pe: int = 64, breakdown: bool = False) -> tuple[np.ndarray, LatencyReport]:
    """Full-tree decode; 2N-2 time steps, two per internal node.

    The per-node breakdown is built only on request; the totals come
    from the level histogram (2^(n-j) nodes of width 2^(j-1) each).
    """
    llr = np.asarray(llr, dtype=np.float64)
    if llr.size != spec.N:
        raise ValueError(f"expected {spec.N} LLR values, got {llr.size}")
    u_hat = np.zeros(spec.N, dtype=np.uint8)
    alpha_root = llr[bitrev_permutation(spec.n)]
    sc_node(alpha_root, spec.d, mode, u_hat, 0)

    steps = 2 * spec.N - 2
    cycles = 0
    for j in range(1, spec.n + 1):
        width = 1 << (j - 1)
        cycles += (1 << (spec.n - j)) * 2 * (-(-width // pe))

    entries: tuple = ()
    if breakdown:
        collected = []

        def account(j: int, i: int):
            if j == 0:
                return
            collected.append((NodeId(j, i), "general", 2))
            account(j - 1, 2 * i - 1)
            account(j - 1, 2 * i)

        account(spec.n, 1)
        entries = tuple(collected)
    report = LatencyReport(time_steps=steps, cycles=cycles, per_node=entries)
    return u_hat, report
