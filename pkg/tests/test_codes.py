"""Encoder, CRC, transform, and construction unit tests."""

import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from polarkit.codes import (
    CRC_POLYNOMIALS,
    CodeSpec,
    bitrev_permutation,
    bits_to_hex,
    channel_llr,
    construct_frozen_set,
    crc_check,
    crc_compute,
    crc_spec,
    encode,
    hex_to_bits,
    load_frozen_json,
    polar_transform,
    save_frozen_json,
)
from polarkit.gaussian import compute_means


# Independent CRC oracle: shift-register long division on an int.
def _crc_register(bits, poly_bits):
    L = len(poly_bits) - 1
    poly = 0
    for b in poly_bits:
        poly = (poly << 1) | b
    mask = (1 << (L + 1)) - 1
    reg = 0
    for b in list(bits) + [0] * L:
        reg = ((reg << 1) | int(b)) & mask
        if reg >> L:
            reg ^= poly
    return [(reg >> (L - 1 - i)) & 1 for i in range(L)]


@pytest.mark.parametrize("length", [6, 11, 16])
def test_crc_matches_register_oracle(length):
    spec = crc_spec(length)
    rng = np.random.default_rng(101 + length)
    for _ in range(50):
        bits = rng.integers(0, 2, size=int(rng.integers(1, 40))).astype(np.uint8)
        got = crc_compute(bits, spec).tolist()
        assert got == _crc_register(bits, CRC_POLYNOMIALS[length])


def test_crc16_of_single_one_bit():
    # Remainder of D^16 mod the degree-16 generator, worked out by hand
    # with the register oracle above.
    got = crc_compute(np.array([1], dtype=np.uint8), crc_spec(16))
    assert got.tolist() == [0, 0, 0, 1, 0, 0, 0, 0, 0, 0, 1, 0, 0, 0, 0, 1]


def test_crc6_known_vector():
    got = crc_compute(np.array([1, 0, 1], dtype=np.uint8), crc_spec(6))
    assert got.tolist() == [0, 0, 0, 1, 1, 0]


def test_crc_check_roundtrip_and_tamper():
    spec = crc_spec(11)
    rng = np.random.default_rng(7)
    payload = rng.integers(0, 2, size=30).astype(np.uint8)
    word = np.concatenate([payload, crc_compute(payload, spec)])
    assert crc_check(word, spec)
    for k in (0, 17, len(word) - 1):
        bad = word.copy()
        bad[k] ^= 1
        assert not crc_check(bad, spec)


def test_crc_spec_rejects_unknown_length():
    with pytest.raises(ValueError):
        crc_spec(8)


def test_polar_transform_matches_kron_matrix():
    f2 = np.array([[1, 0], [1, 1]], dtype=np.uint8)
    rng = np.random.default_rng(3)
    for n in range(1, 6):
        mat = np.array([[1]], dtype=np.uint8)
        for _ in range(n):
            mat = np.kron(mat, f2)
        u = rng.integers(0, 2, size=1 << n).astype(np.uint8)
        assert np.array_equal(polar_transform(u), (u @ mat) % 2)


@given(st.integers(1, 6), st.integers(0, 2**20))
def test_polar_transform_is_involution(n, seed):
    rng = np.random.default_rng(seed)
    u = rng.integers(0, 2, size=1 << n).astype(np.uint8)
    assert np.array_equal(polar_transform(polar_transform(u)), u)


@given(st.integers(1, 5), st.integers(0, 2**20))
def test_polar_transform_is_linear(n, seed):
    rng = np.random.default_rng(seed)
    a = rng.integers(0, 2, size=1 << n).astype(np.uint8)
    b = rng.integers(0, 2, size=1 << n).astype(np.uint8)
    assert np.array_equal(polar_transform(a ^ b), polar_transform(a) ^ polar_transform(b))


def test_polar_transform_rejects_bad_length():
    with pytest.raises(ValueError):
        polar_transform(np.zeros(6, dtype=np.uint8))


def test_bitrev_permutation():
    assert bitrev_permutation(3).tolist() == [0, 4, 2, 6, 1, 5, 3, 7]
    for n in range(1, 8):
        p = bitrev_permutation(n)
        assert np.array_equal(p[p], np.arange(1 << n))


def test_construction_ranks_by_leaf_mean():
    spec = construct_frozen_set(2, 2, 1.0)
    assert spec.d.tolist() == [0, 0, 1, 1]
    assert construct_frozen_set(2, 1, 1.0).d.tolist() == [0, 0, 0, 1]
    # General consistency: the chosen K positions carry the K largest means,
    # ties broken toward the higher index.
    for n, K in [(3, 4), (5, 11), (6, 40)]:
        spec = construct_frozen_set(n, K, 0.9)
        means = compute_means(n, 0.9).leaf_means
        order = sorted(range(1 << n), key=lambda k: (means[k], k), reverse=True)
        assert sorted(order[:K]) == np.flatnonzero(spec.d).tolist()


def test_construction_override_validation():
    d = np.zeros(8, dtype=np.uint8)
    d[[5, 6, 7]] = 1
    spec = construct_frozen_set(3, 3, 1.0, override=d)
    assert np.array_equal(spec.d, d)
    with pytest.raises(ValueError):
        construct_frozen_set(3, 2, 1.0, override=d)
    with pytest.raises(ValueError):
        construct_frozen_set(4, 3, 1.0, override=d)
    with pytest.raises(ValueError):
        construct_frozen_set(3, 0, 1.0)


def test_codespec_validation():
    with pytest.raises(ValueError):
        CodeSpec(2, 3, np.array([0, 0, 1, 1], dtype=np.uint8))
    with pytest.raises(ValueError):
        CodeSpec(2, 2, np.array([0, 2, 1, 1], dtype=np.uint8))
    with pytest.raises(ValueError):
        CodeSpec(2, 2, np.array([0, 0, 1, 1], dtype=np.uint8), design_sigma=0.0)
    spec = CodeSpec(3, 4, np.array([0, 0, 0, 1, 0, 1, 1, 1], dtype=np.uint8))
    assert spec.N == 8 and spec.rate == 0.5
    assert spec.info_positions.tolist() == [3, 5, 6, 7]


def test_encode_places_bits_and_freezes_zeros():
    spec = construct_frozen_set(4, 7, 1.0)
    rng = np.random.default_rng(11)
    payload = rng.integers(0, 2, size=7).astype(np.uint8)
    frame = encode(spec, payload)
    assert np.array_equal(frame.u[spec.info_positions], payload)
    assert not frame.u[spec.d == 0].any()
    assert np.array_equal(frame.x, polar_transform(frame.u))


def test_encode_appends_crc_that_checks():
    spec = construct_frozen_set(5, 16, 1.0, crc=crc_spec(6))
    assert spec.info_length == 10
    payload = np.ones(10, dtype=np.uint8)
    frame = encode(spec, payload)
    word = frame.u[spec.info_positions]
    assert np.array_equal(word[:10], payload)
    assert crc_check(word, spec.crc)
    with pytest.raises(ValueError):
        encode(spec, np.ones(16, dtype=np.uint8))


def test_encode_full_rate_identity():
    spec = CodeSpec(3, 8, np.ones(8, dtype=np.uint8))
    u = np.array([1, 0, 1, 1, 0, 0, 1, 0], dtype=np.uint8)
    frame = encode(spec, u)
    assert np.array_equal(frame.u, u)
    assert np.array_equal(polar_transform(frame.x), u)


@given(st.integers(1, 64), st.integers(0, 2**20))
def test_hex_roundtrip(length, seed):
    rng = np.random.default_rng(seed)
    bits = rng.integers(0, 2, size=length).astype(np.uint8)
    assert np.array_equal(hex_to_bits(bits_to_hex(bits), length), bits)


def test_frozen_json_roundtrip(tmp_path):
    spec = construct_frozen_set(5, 12, 0.8)
    path = tmp_path / "frozen.json"
    save_frozen_json(spec, str(path))
    N, d = load_frozen_json(str(path))
    assert N == 32
    assert np.array_equal(d, spec.d)
    raw = json.loads(path.read_text())
    assert raw["N"] == 32
    assert len(raw["frozen"]) == 20


def test_channel_llr_scale():
    y = np.array([0.5, -1.0, 2.0])
    np.testing.assert_allclose(channel_llr(y, 0.5), 2.0 * y / 0.25)
    with pytest.raises(ValueError):
        channel_llr(y, 0.0)
