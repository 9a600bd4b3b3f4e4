"""Output stage: binary-to-BCD conversion (shift-and-add-3) and ASCII
seven-segment rendering of the display latch.
"""

from dataclasses import dataclass

from .bits import BitVec, WORD_MASK

# Per-nibble SWAR constants, wide enough for 12 BCD digits.
_ADD3_LO = 0x333333333333
_ADD3_HI = 0x888888888888
_NIBBLE_LSB = 0x111111111111


class DigitRange(ValueError):
    pass


@dataclass(frozen=True)
class BcdDigits:
    """Decimal digits, most significant first; a lone 0 for value zero."""

    digits: tuple[int, ...]
    source_width: int


@dataclass(frozen=True)
class SevenSegPattern:
    a: bool
    b: bool
    c: bool
    d: bool
    e: bool
    f: bool
    g: bool


_DIGIT_SEGMENTS = {
    0: "abcdef",
    1: "bc",
    2: "abdeg",
    3: "abcdg",
    4: "bcfg",
    5: "acdfg",
    6: "acdefg",
    7: "abc",
    8: "abcdefg",
    9: "abcdfg",
}


def _all_nibbles_le9(x: int) -> bool:
    # nibble >= 10 exactly when bit3 is set together with bit2 or bit1
    return not ((x >> 3) & ((x >> 2) | (x >> 1)) & _NIBBLE_LSB)


def double_dabble(v: BitVec) -> BcdDigits:
    """Shift-and-add-3: one shift per input bit, adding 3 to every BCD
    nibble that is 5 or more before each shift."""
    bcd = 0
    for i in range(v.width - 1, -1, -1):
        over = (bcd + _ADD3_LO) & _ADD3_HI  # flags nibbles >= 5
        bcd += (over >> 3) * 3
        bcd = (bcd << 1) | ((v.value >> i) & 1)
        assert _all_nibbles_le9(bcd), "BCD nibble exceeded 9 mid-conversion"
    digits = []
    while bcd:
        digits.append(bcd & 0xF)
        bcd >>= 4
    if not digits:
        digits.append(0)
    return BcdDigits(tuple(reversed(digits)), v.width)


def seven_seg_encode(d: int) -> SevenSegPattern:
    """Canonical segment pattern for one decimal digit."""
    if not isinstance(d, int) or not 0 <= d <= 9:
        raise DigitRange(f"not a decimal digit: {d!r}")
    on = _DIGIT_SEGMENTS[d]
    return SevenSegPattern(*(s in on for s in "abcdefg"))


def _cell(p: SevenSegPattern) -> tuple[str, str, str]:
    return (
        " _ " if p.a else "   ",
        ("|" if p.f else " ") + ("_" if p.g else " ") + ("|" if p.b else " "),
        ("|" if p.e else " ") + ("_" if p.d else " ") + ("|" if p.c else " "),
    )


def render_output(latch: int, digit_count: int = 4) -> str:
    """ASCII seven-segment rendering of the latch value, three rows per
    digit. The low `digit_count` decimal digits are shown, zero-padded on
    the left and truncated on the left when the value is wider."""
    if digit_count < 1:
        raise ValueError(f"digit_count must be >= 1, got {digit_count}")
    digits = list(double_dabble(BitVec(32, latch & WORD_MASK)).digits)
    if len(digits) < digit_count:
        digits = [0] * (digit_count - len(digits)) + digits
    else:
        digits = digits[len(digits) - digit_count:]
    cells = [_cell(seven_seg_encode(d)) for d in digits]
    rows = [" ".join(cell[r] for cell in cells).rstrip() for r in range(3)]
    return "\n".join(rows)
