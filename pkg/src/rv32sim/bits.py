"""Bit-level arithmetic primitives: adders, width extension, field slicing.

Everything here is pure and operates on fixed-width BitVec values or plain
ints; the rest of the simulator is built on (and cross-checked against)
these primitives.
"""

from dataclasses import dataclass

WORD_BITS = 32
WORD_MASK = (1 << WORD_BITS) - 1


def mask(width: int) -> int:
    return (1 << width) - 1


def to_signed(value: int, width: int = WORD_BITS) -> int:
    """Reinterpret the low `width` bits of `value` as two's complement."""
    value &= mask(width)
    if value & (1 << (width - 1)):
        return value - (1 << width)
    return value


@dataclass(frozen=True)
class BitVec:
    """An unsigned value pinned to a fixed width of 1..32 bits."""

    width: int
    value: int

    def __post_init__(self):
        if not 1 <= self.width <= WORD_BITS:
            raise ValueError(f"width must be in 1..{WORD_BITS}, got {self.width}")
        if not 0 <= self.value <= mask(self.width):
            raise ValueError(f"value 0x{self.value:x} does not fit in {self.width} bits")

    @property
    def msb(self) -> int:
        return (self.value >> (self.width - 1)) & 1


def full_add(a: int, b: int, cin: int) -> tuple[int, int]:
    """Single-bit full adder; inputs must be 0 or 1. Returns (sum, carry_out)."""
    s = a ^ b ^ cin
    cout = (a & b) | (a & cin) | (b & cin)
    return s, cout


def ripple_add(a: BitVec, b: BitVec, cin: int = 0) -> tuple[BitVec, int]:
    """Add by chaining full adders from bit 0 upward. Returns (sum, carry_out)."""
    if a.width != b.width:
        raise ValueError(f"width mismatch: {a.width} != {b.width}")
    total = 0
    carry = cin
    for i in range(a.width):
        bit, carry = full_add((a.value >> i) & 1, (b.value >> i) & 1, carry)
        total |= bit << i
    return BitVec(a.width, total), carry


def cla_add(a: BitVec, b: BitVec, cin: int = 0) -> tuple[BitVec, int]:
    """Carry-lookahead addition: carries come from prefix-combined
    generate/propagate terms rather than a sequential carry chain.

    Bit-identical to ripple_add, including the carry out.
    """
    if a.width != b.width:
        raise ValueError(f"width mismatch: {a.width} != {b.width}")
    w = a.width
    p0 = a.value ^ b.value
    g = a.value & b.value
    p = p0
    # After the prefix passes, bit i of g/p holds generate/propagate
    # for the whole span i..0.
    shift = 1
    while shift < w:
        g |= p & (g << shift)
        p &= (p << shift) | mask(shift)
        shift <<= 1
    carries = g | (p if cin else 0)  # bit i = carry out of bit i
    carry_in = ((carries << 1) | cin) & mask(w)
    return BitVec(w, (p0 ^ carry_in) & mask(w)), (carries >> (w - 1)) & 1


def sign_extend(v: BitVec, to_width: int) -> BitVec:
    """Widen by replicating the most significant bit."""
    if to_width < v.width:
        raise ValueError(f"cannot narrow {v.width} bits to {to_width}")
    if v.msb:
        return BitVec(to_width, v.value | (mask(to_width) ^ mask(v.width)))
    return BitVec(to_width, v.value)


def zero_extend(v: BitVec, to_width: int) -> BitVec:
    """Widen by filling the new high bits with zeros."""
    if to_width < v.width:
        raise ValueError(f"cannot narrow {v.width} bits to {to_width}")
    return BitVec(to_width, v.value)


def extract_field(w: int, hi: int, lo: int) -> BitVec:
    """Slice bits hi..lo (inclusive) out of a 32-bit word."""
    if not 0 <= lo <= hi < WORD_BITS:
        raise ValueError(f"bad field indices hi={hi}, lo={lo}")
    if not 0 <= w <= WORD_MASK:
        raise ValueError(f"not a 32-bit word: 0x{w:x}")
    return BitVec(hi - lo + 1, (w >> lo) & mask(hi - lo + 1))
