import random

import pytest

from rv32sim.bits import (
    BitVec,
    cla_add,
    extract_field,
    full_add,
    mask,
    ripple_add,
    sign_extend,
    to_signed,
    zero_extend,
)


def test_bitvec_validation():
    with pytest.raises(ValueError):
        BitVec(0, 0)
    with pytest.raises(ValueError):
        BitVec(33, 0)
    with pytest.raises(ValueError):
        BitVec(8, 256)
    with pytest.raises(ValueError):
        BitVec(8, -1)
    assert BitVec(8, 255).msb == 1
    assert BitVec(8, 127).msb == 0


@pytest.mark.parametrize("a,b,cin,expected", [
    (0, 0, 0, (0, 0)),
    (1, 1, 0, (0, 1)),
    (1, 1, 1, (1, 1)),
    (1, 0, 0, (1, 0)),
    (0, 1, 1, (0, 1)),
])
def test_full_add_cases(a, b, cin, expected):
    assert full_add(a, b, cin) == expected


def test_full_add_truth_table():
    for a in (0, 1):
        for b in (0, 1):
            for cin in (0, 1):
                s, cout = full_add(a, b, cin)
                assert 2 * cout + s == a + b + cin


def test_ripple_add_examples():
    assert ripple_add(BitVec(8, 0xFF), BitVec(8, 0x01), 0) == (BitVec(8, 0x00), 1)
    assert ripple_add(BitVec(8, 0x05), BitVec(8, 0x03), 0) == (BitVec(8, 0x08), 0)


def test_cla_add_examples():
    assert cla_add(BitVec(8, 0x0F), BitVec(8, 0x01), 0) == (BitVec(8, 0x10), 0)
    assert cla_add(BitVec(8, 0x80), BitVec(8, 0x80), 0) == (BitVec(8, 0x00), 1)


def test_adders_width_mismatch():
    with pytest.raises(ValueError):
        ripple_add(BitVec(8, 1), BitVec(9, 1))
    with pytest.raises(ValueError):
        cla_add(BitVec(8, 1), BitVec(9, 1))


def test_adders_exhaustive_widths_1_to_8():
    # both adders == plain integer addition, all inputs, all small widths
    for width in range(1, 9):
        m = mask(width)
        for a in range(m + 1):
            av = BitVec(width, a)
            for b in range(m + 1):
                bv = BitVec(width, b)
                for cin in (0, 1):
                    total = a + b + cin
                    expected = (BitVec(width, total & m), total >> width)
                    assert ripple_add(av, bv, cin) == expected
                    assert cla_add(av, bv, cin) == expected


@pytest.mark.parametrize("width", [16, 32])
def test_adders_randomized_wide(width):
    rng = random.Random(0x5EED + width)
    m = mask(width)
    for _ in range(100_000):
        a = rng.randrange(m + 1)
        b = rng.randrange(m + 1)
        cin = rng.randrange(2)
        total = a + b + cin
        expected = (BitVec(width, total & m), total >> width)
        assert cla_add(BitVec(width, a), BitVec(width, b), cin) == expected
    # the slower ripple chain gets a smaller slice at these widths
    for _ in range(10_000):
        a = rng.randrange(m + 1)
        b = rng.randrange(m + 1)
        cin = rng.randrange(2)
        total = a + b + cin
        assert ripple_add(BitVec(width, a), BitVec(width, b), cin) == \
            (BitVec(width, total & m), total >> width)


def test_sign_extend_examples():
    assert sign_extend(BitVec(8, 0xFF), 32) == BitVec(32, 0xFFFFFFFF)
    assert sign_extend(BitVec(8, 0x7F), 32) == BitVec(32, 0x0000007F)
    assert sign_extend(BitVec(12, 0x800), 32) == BitVec(32, 0xFFFFF800)


def test_zero_extend_examples():
    assert zero_extend(BitVec(8, 0xFF), 32) == BitVec(32, 0x000000FF)
    assert zero_extend(BitVec(8, 0x00), 32) == BitVec(32, 0x00000000)
    assert zero_extend(BitVec(12, 0xABC), 32) == BitVec(32, 0x00000ABC)


def test_extension_narrowing_rejected():
    with pytest.raises(ValueError):
        sign_extend(BitVec(16, 0), 8)
    with pytest.raises(ValueError):
        zero_extend(BitVec(16, 0), 8)


def test_extension_properties():
    rng = random.Random(7)
    for _ in range(2_000):
        width = rng.randrange(1, 32)
        to_width = rng.randrange(width, 33)
        v = BitVec(width, rng.randrange(mask(width) + 1))
        s = sign_extend(v, to_width)
        z = zero_extend(v, to_width)
        # truncating back recovers the original; zero_extend keeps low bits
        assert s.value & mask(width) == v.value
        assert z.value == v.value
        assert to_signed(s.value, to_width) == to_signed(v.value, width)


def test_extract_field_examples():
    assert extract_field(0x00500093, 6, 0) == BitVec(7, 0x13)
    assert extract_field(0xFFFFFFFF, 31, 31) == BitVec(1, 1)
    assert extract_field(0x00000000, 31, 0) == BitVec(32, 0)


def test_extract_field_full_width_identity():
    rng = random.Random(11)
    for _ in range(2_000):
        w = rng.randrange(1 << 32)
        assert extract_field(w, 31, 0) == BitVec(32, w)


def test_extract_field_bad_indices():
    with pytest.raises(ValueError):
        extract_field(0, 3, 5)
    with pytest.raises(ValueError):
        extract_field(0, 32, 0)
