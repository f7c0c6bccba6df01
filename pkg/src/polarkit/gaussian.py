"""Gaussian approximation of density evolution, and threshold tables.

Under BPSK on an AWGN channel with all-zero input, every LLR in the
decoding tree is modelled as Gaussian with variance twice its mean.  The
mean at the root is 2/sigma^2 and propagates to the children of a node
through

    left  child mean: phi_inv(1 - (1 - phi(m))^2)
    right child mean: 2*m

where phi(m) = 1 - E[tanh(U/2)] for U ~ N(m, 2m).  phi decreases from 1
toward 0 as m grows (phi(0) is pinned to 0 so that phi_inv(0) = 0; the
recursion never evaluates it, since all interior means are positive).

The threshold machinery sizes a hard-decision band: a node with mean m
gets threshold T = |c*sqrt(2m) - m|, and only nodes whose mean clears
`eligibility_bound` participate.  The constant c is picked on a 0.1 grid
from the target per-node confidence.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import integrate
from scipy import special

__all__ = [
    "phi",
    "phi_inv",
    "q",
    "q_inv",
    "GaussianTable",
    "compute_means",
    "min_c",
    "eligibility_bound",
    "threshold",
    "TaConfig",
    "build_ta_config",
]

_QUAD_OPTS = dict(epsabs=1e-13, epsrel=1e-11, limit=300)


def phi(x: float) -> float:
    """Gaussian-weighted tanh statistic used by the mean recursion.

    Evaluated by adaptive quadrature over a +-10 standard deviation
    window of the Gaussian kernel N(x, 2x).  Strictly decreasing on
    (0, inf) with phi(0+) -> 1; the isolated value phi(0) = 0.
    """
    if x < 0:
        raise ValueError("phi requires x >= 0")
    if x == 0.0:
        return 0.0
    sd = math.sqrt(2.0 * x)
    lo, hi = x - 10.0 * sd, x + 10.0 * sd
    val, _ = integrate.quad(
        lambda u: math.tanh(0.5 * u) * math.exp(-((u - x) ** 2) / (4.0 * x)),
        lo,
        hi,
        **_QUAD_OPTS,
    )
    # The exact value lies in (0, 1); quadrature noise outside that range
    # is unphysical and would break downstream bisections.
    return min(max(1.0 - val / math.sqrt(4.0 * math.pi * x), 0.0), 1.0)


def phi_inv(p: float, hi: float | None = None) -> float:
    """Inverse of phi by bracketed bisection on the decreasing branch.

    phi_inv(0) = 0 by the same pinning as phi(0).  `hi` optionally
    supplies a known upper bracket (for the mean recursion the parent
    mean works, since the left-child target never exceeds it).
    """
    if not 0.0 <= p < 1.0:
        raise ValueError("phi_inv requires 0 <= p < 1")
    if p == 0.0:
        return 0.0
    if hi is None:
        hi = 1.0
        while phi(hi) > p:
            hi *= 2.0
            if hi > 1e9:
                raise ValueError("failed to bracket phi_inv")
    lo = 0.0
    while hi - lo > 1e-12 * max(1.0, hi):
        mid = 0.5 * (lo + hi)
        if mid in (lo, hi):
            break
        if phi(mid) > p:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def q(x: float) -> float:
    """Upper tail of the standard normal, via the complementary error
    function."""
    return 0.5 * special.erfc(x / math.sqrt(2.0))


def q_inv(p: float) -> float:
    """Inverse tail probability by bisection, to |q(result)-p| <= 1e-12*p."""
    if not 0.0 < p < 1.0:
        raise ValueError("q_inv requires 0 < p < 1")
    lo, hi = -40.0, 40.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        val = q(mid)
        if abs(val - p) <= 1e-12 * p:
            return mid
        if val > p:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


@dataclass(frozen=True)
class GaussianTable:
    """Per-node LLR means for a full decoding tree.

    levels[j] holds the means at tree level j (leaves at j=0, root at
    j=n), indexed by node position i-1.
    """

    n: int
    sigma: float
    levels: tuple[np.ndarray, ...]

    def mean(self, j: int, i: int) -> float:
        return float(self.levels[j][i - 1])

    @property
    def leaf_means(self) -> np.ndarray:
        return self.levels[0]


@lru_cache(maxsize=16)
def compute_means(n: int, sigma: float) -> GaussianTable:
    """Propagate the root mean 2/sigma^2 down to all 2^(n+1)-1 nodes.

    Right children double the parent mean exactly; left children go
    through the phi recursion (one bisection per interior node).  Cached:
    tables are reused heavily when sweeping thresholds.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if sigma <= 0:
        raise ValueError("sigma must be positive")
    levels: list[np.ndarray] = [np.array([2.0 / (sigma * sigma)])]
    for _ in range(n):
        parent = levels[0]
        child = np.empty(2 * parent.size)
        for k, m in enumerate(parent):
            pm = phi(m)
            p = pm * (2.0 - pm)  # = 1 - (1 - pm)^2, without cancellation
            if m == 0.0 or p >= 1.0:
                # p rounds to 1 once phi(m) saturates; the child mean is
                # below double resolution and 0 is the only faithful value.
                child[2 * k] = 0.0
            elif p < 1e-12:
                # phi(m) is below quadrature resolution (m around 100 or
                # more).  There phi ~ K x^{-1/2} e^{-x/4}, so solving
                # phi(left) = 2 phi(m) gives left = m - 4 ln 2 up to O(1/m).
                child[2 * k] = m - 4.0 * math.log(2.0)
            else:
                child[2 * k] = phi_inv(p, hi=m)
            child[2 * k + 1] = 2.0 * m
        levels.insert(0, child)
    for arr in levels:
        arr.setflags(write=False)
    return GaussianTable(n=n, sigma=sigma, levels=tuple(levels))


def min_c(epsilon: float, n: int, grid: float = 0.1) -> float:
    """Smallest c on the grid with q(c) <= 1 - epsilon^(1/2^n)."""
    if not 0.0 < epsilon < 1.0:
        raise ValueError("epsilon must be in (0, 1)")
    target = 1.0 - epsilon ** (1.0 / (1 << n))
    k = 1
    while True:
        c = round(k * grid, 10)
        if q(c) <= target:
            return c
        k += 1
        if c > 100.0:
            raise ValueError("no grid point satisfies the confidence target")


def eligibility_bound(epsilon: float, c: float, n: int) -> float:
    """Smallest node mean allowed to attempt a hard decision.

    Equals (c - q_inv(q(c)/(epsilon^(-1/2^n) - 1)))^2 / 2.
    """
    denom = epsilon ** (-1.0 / (1 << n)) - 1.0
    ratio = q(c) / denom
    return 0.5 * (c - q_inv(ratio)) ** 2


def threshold(m: float, c: float) -> float:
    """Hard-decision band half-width for a node of mean m: |c*sqrt(2m) - m|."""
    if m < 0:
        raise ValueError("mean must be nonnegative")
    return abs(c * math.sqrt(2.0 * m) - m)


@dataclass(frozen=True)
class TaConfig:
    """Threshold-aided decoding configuration for one (code, sigma) pair."""

    epsilon: float
    c: float
    m_bound: float
    thresholds: dict[tuple[int, int], float]

    def eligible_by_level(self) -> dict[int, int]:
        out: dict[int, int] = {}
        for (j, _i) in self.thresholds:
            out[j] = out.get(j, 0) + 1
        return out


def build_ta_config(table: GaussianTable, epsilon: float, c: float | None = None) -> TaConfig:
    """Thresholds for every node whose mean clears the eligibility bound."""
    if c is None:
        c = min_c(epsilon, table.n)
    bound = eligibility_bound(epsilon, c, table.n)
    thresholds: dict[tuple[int, int], float] = {}
    for j, arr in enumerate(table.levels):
        for k, m in enumerate(arr):
            if m >= bound:
                thresholds[(j, k + 1)] = threshold(m, c)
    return TaConfig(epsilon=epsilon, c=c, m_bound=bound, thresholds=thresholds)
