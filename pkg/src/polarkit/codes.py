"""Code construction, encoding and CRC handling for polar codes.

Bits are numpy uint8 arrays.  The code is defined by the natural-order
transform x = u * F2^{(x)n} (no position permutation between the message
domain and the channel domain).  Frozen positions carry zeros.  When a CRC
is configured its bits count toward K, i.e. the code rate is K/N with the
CRC inside.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

__all__ = [
    "CrcSpec",
    "CodeSpec",
    "Frame",
    "CRC_POLYNOMIALS",
    "crc_spec",
    "crc_compute",
    "crc_check",
    "polar_transform",
    "bitrev_permutation",
    "construct_frozen_set",
    "encode",
    "channel_llr",
    "bits_to_hex",
    "hex_to_bits",
    "load_frozen_json",
    "save_frozen_json",
]


# Generator polynomials, most significant coefficient first.
CRC_POLYNOMIALS = {
    6: (1, 1, 0, 0, 0, 0, 1),                          # D^6 + D^5 + 1
    11: (1, 1, 1, 0, 0, 0, 1, 0, 0, 0, 0, 1),          # D^11 + D^10 + D^9 + D^5 + 1
    16: (1, 0, 0, 0, 1, 0, 0, 0, 0, 0, 0, 1, 0, 0, 0, 0, 1),  # D^16 + D^12 + D^5 + 1
}


@dataclass(frozen=True)
class CrcSpec:
    """CRC configuration: remainder length and generator polynomial bits."""

    length: int
    polynomial: tuple[int, ...]

    def __post_init__(self):
        if self.length < 1:
            raise ValueError("crc length must be positive")
        if len(self.polynomial) != self.length + 1:
            raise ValueError("polynomial must have length+1 coefficients")
        if self.polynomial[0] != 1 or self.polynomial[-1] != 1:
            raise ValueError("polynomial must have leading and trailing 1")


def crc_spec(length: int) -> CrcSpec:
    """Return the built-in CRC of the given length (6, 11 or 16)."""
    if length not in CRC_POLYNOMIALS:
        raise ValueError(f"no built-in CRC of length {length}")
    return CrcSpec(length, CRC_POLYNOMIALS[length])


@dataclass
class CodeSpec:
    """A polar code: block size exponent, dimension, frozen pattern, CRC.

    d is the length-N 0/1 vector with d[k] = 1 on the K non-frozen
    positions.  design_sigma is the noise level the frozen set was built
    for; it is recorded so analyses can be reproduced.
    """

    n: int
    K: int
    d: np.ndarray
    crc: CrcSpec | None = None
    design_sigma: float = 1.0

    def __post_init__(self):
        self.d = np.asarray(self.d, dtype=np.uint8)
        if self.n < 1:
            raise ValueError("n must be >= 1")
        if self.d.shape != (self.N,):
            raise ValueError("d must have length 2**n")
        if not np.all((self.d == 0) | (self.d == 1)):
            raise ValueError("d must be a 0/1 vector")
        if int(self.d.sum()) != self.K:
            raise ValueError("d must have exactly K ones")
        if not 0 < self.K <= self.N:
            raise ValueError("K must be in 1..N")
        if self.crc is not None and self.crc.length >= self.K:
            raise ValueError("crc length must be smaller than K")
        if self.design_sigma <= 0:
            raise ValueError("design_sigma must be positive")

    @property
    def N(self) -> int:
        return 1 << self.n

    @property
    def rate(self) -> float:
        return self.K / self.N

    @property
    def info_length(self) -> int:
        """Number of payload bits per frame (K minus CRC bits)."""
        return self.K - (self.crc.length if self.crc else 0)

    @property
    def info_positions(self) -> np.ndarray:
        """0-based non-frozen positions in ascending order."""
        return np.flatnonzero(self.d == 1)


@dataclass
class Frame:
    """One transmitted frame: message vector, codeword, channel LLRs."""

    u: np.ndarray
    x: np.ndarray
    llr: np.ndarray | None = None


def crc_compute(bits: np.ndarray, crc: CrcSpec) -> np.ndarray:
    """Remainder of bits * D^length modulo the generator polynomial.

    Plain polynomial long division: zero initial state, no reflection,
    no final xor.
    """
    bits = np.asarray(bits, dtype=np.uint8)
    L = crc.length
    poly = np.array(crc.polynomial, dtype=np.uint8)
    work = np.concatenate([bits, np.zeros(L, dtype=np.uint8)])
    for i in range(bits.size):
        if work[i]:
            work[i : i + L + 1] ^= poly
    return work[-L:]


def crc_check(bits_with_crc: np.ndarray, crc: CrcSpec) -> bool:
    """True when the trailing crc.length bits match the recomputed CRC."""
    bits_with_crc = np.asarray(bits_with_crc, dtype=np.uint8)
    if bits_with_crc.size <= crc.length:
        raise ValueError("need more bits than the CRC length")
    payload = bits_with_crc[: -crc.length]
    rem = crc_compute(payload, crc)
    return bool(np.array_equal(rem, bits_with_crc[-crc.length :]))


def polar_transform(u: np.ndarray) -> np.ndarray:
    """Apply the natural-order transform F2^{(x)n} over GF(2).

    Self-inverse: applying it twice returns the input.
    """
    u = np.asarray(u, dtype=np.uint8)
    N = u.size
    if N & (N - 1) or N == 0:
        raise ValueError("length must be a power of two")
    x = u.copy()
    step = 1
    while step < N:
        x = x.reshape(-1, 2 * step)
        x[:, :step] ^= x[:, step:]
        x = x.reshape(-1)
        step *= 2
    return x


@lru_cache(maxsize=32)
def bitrev_permutation(n: int) -> np.ndarray:
    """Index permutation that reverses the n-bit binary digits."""
    N = 1 << n
    perm = np.zeros(N, dtype=np.int64)
    for i in range(N):
        r = 0
        v = i
        for _ in range(n):
            r = (r << 1) | (v & 1)
            v >>= 1
        perm[i] = r
    return perm


def construct_frozen_set(
    n: int,
    K: int,
    design_sigma: float,
    override: np.ndarray | None = None,
    crc: CrcSpec | None = None,
) -> CodeSpec:
    """Build a CodeSpec, ranking positions by Gaussian-approximation means.

    The K most reliable message positions become non-frozen, ties broken
    toward the higher index.  `override` bypasses the construction with an
    externally supplied 0/1 flag vector (length N, weight K).
    """
    N = 1 << n
    if not 0 < K <= N:
        raise ValueError("K must be in 1..N")
    if override is not None:
        d = np.asarray(override, dtype=np.uint8)
        if d.shape != (N,):
            raise ValueError("override must have length N")
        if int(d.sum()) != K:
            raise ValueError("override must have weight K")
        return CodeSpec(n=n, K=K, d=d, crc=crc, design_sigma=design_sigma)

    from .gaussian import compute_means

    means = compute_means(n, design_sigma).leaf_means
    # Sort descending by mean, ties toward the higher position.
    order = sorted(range(N), key=lambda k: (means[k], k), reverse=True)
    d = np.zeros(N, dtype=np.uint8)
    d[order[:K]] = 1
    return CodeSpec(n=n, K=K, d=d, crc=crc, design_sigma=design_sigma)


def encode(spec: CodeSpec, info_bits: np.ndarray) -> Frame:
    """Map payload bits to a frame: append CRC, place into the non-frozen
    positions in ascending order, transform."""
    info_bits = np.asarray(info_bits, dtype=np.uint8)
    if info_bits.shape != (spec.info_length,):
        raise ValueError(f"expected {spec.info_length} payload bits")
    if spec.crc is not None:
        bits = np.concatenate([info_bits, crc_compute(info_bits, spec.crc)])
    else:
        bits = info_bits
    u = np.zeros(spec.N, dtype=np.uint8)
    u[spec.info_positions] = bits
    return Frame(u=u, x=polar_transform(u))


def channel_llr(y: np.ndarray, sigma: float) -> np.ndarray:
    """LLR of a BPSK symbol observed in Gaussian noise: 2*y/sigma^2."""
    if sigma <= 0:
        raise ValueError("sigma must be positive")
    return 2.0 * np.asarray(y, dtype=np.float64) / (sigma * sigma)


def bits_to_hex(bits: np.ndarray) -> str:
    """Pack bits (first bit most significant) into a hex string."""
    bits = np.asarray(bits, dtype=np.uint8)
    if bits.size == 0:
        return ""
    pad = (-bits.size) % 4
    padded = np.concatenate([np.zeros(pad, dtype=np.uint8), bits])
    val = int("".join("1" if b else "0" for b in padded), 2)
    return format(val, f"0{padded.size // 4}x")


def hex_to_bits(s: str, length: int) -> np.ndarray:
    """Inverse of bits_to_hex for a known bit length."""
    if length == 0:
        return np.zeros(0, dtype=np.uint8)
    val = int(s, 16)
    if val >> length:
        raise ValueError("hex value does not fit in the requested length")
    return np.array([(val >> (length - 1 - i)) & 1 for i in range(length)], dtype=np.uint8)


def save_frozen_json(spec: CodeSpec, path: str) -> None:
    """Write the frozen set as {"N": N, "frozen": [1-based indices]};
    the file appears atomically."""
    frozen = (np.flatnonzero(spec.d == 0) + 1).tolist()
    tmp = f"{path}.tmp"
    with open(tmp, "w") as fh:
        json.dump({"N": spec.N, "frozen": frozen}, fh)
        fh.write("\n")
    os.replace(tmp, path)


def load_frozen_json(path: str) -> tuple[int, np.ndarray]:
    """Read a frozen-set file; returns (N, d flag vector)."""
    with open(path) as fh:
        obj = json.load(fh)
    N = int(obj["N"])
    if N < 2 or N & (N - 1):
        raise ValueError("N must be a power of two >= 2")
    d = np.ones(N, dtype=np.uint8)
    for idx in obj["frozen"]:
        if not 1 <= idx <= N:
            raise ValueError(f"frozen index {idx} out of range")
        d[idx - 1] = 0
    return N, d
