"""Memory-image serialization.

Two formats: Logisim-compatible `v2.0 raw` text (lowercase hex words
without leading zeros, 8 tokens per line, runs of 4 or more identical
words collapsed to `N*value`), and flat little-endian binary.
"""

import re
from dataclasses import dataclass, field

from .bits import WORD_MASK

HEADER = "v2.0 raw"

_HEX_TOKEN = re.compile(r"^[0-9a-fA-F]+$")
_RUN_TOKEN = re.compile(r"^([0-9]+)\*([0-9a-fA-F]+)$")


class ImageError(Exception):
    pass


class BadHeader(ImageError):
    pass


class BadToken(ImageError):
    def __init__(self, message: str, line: int):
        super().__init__(f"line {line}: {message}")
        self.line = line


class Overflow(ImageError):
    def __init__(self, message: str, line: int = 0):
        super().__init__(f"line {line}: {message}" if line else message)
        self.line = line


@dataclass
class MemImage:
    """A dense run of 32-bit words starting at a word-aligned origin."""

    origin: int = 0
    words: list[int] = field(default_factory=list)

    def __post_init__(self):
        if self.origin % 4:
            raise ValueError(f"origin 0x{self.origin:x} is not word-aligned")


def write_v2raw(img: MemImage) -> str:
    """Canonical v2.0 raw text: header, then 8 tokens per line."""
    tokens = []
    words = img.words
    i = 0
    while i < len(words):
        j = i
        while j < len(words) and words[j] == words[i]:
            j += 1
        n = j - i
        if n >= 4:
            tokens.append(f"{n}*{words[i]:x}")
        else:
            tokens.extend([f"{words[i]:x}"] * n)
        i = j
    lines = [HEADER]
    for k in range(0, len(tokens), 8):
        lines.append(" ".join(tokens[k:k + 8]))
    return "\n".join(lines) + "\n"


def read_v2raw(text: str) -> MemImage:
    """Parse v2.0 raw text (plain hex tokens and `N*value` runs)."""
    lines = text.splitlines()
    if not lines or lines[0].strip() != HEADER:
        raise BadHeader(f"expected '{HEADER}' header line")
    words: list[int] = []
    for line_no, line in enumerate(lines[1:], start=2):
        for tok in line.split():
            run = _RUN_TOKEN.match(tok)
            if run:
                count, hexval = int(run.group(1)), run.group(2)
                if count == 0:
                    raise BadToken(f"zero-length run {tok!r}", line_no)
            elif _HEX_TOKEN.match(tok):
                count, hexval = 1, tok
            else:
                raise BadToken(f"bad token {tok!r}", line_no)
            value = int(hexval, 16)
            if value > WORD_MASK:
                raise Overflow(f"word 0x{hexval} exceeds 32 bits", line_no)
            words.extend([value] * count)
    return MemImage(0, words)


def write_bin(img: MemImage) -> bytes:
    """Flat little-endian binary, one 32-bit word after another."""
    return b"".join(w.to_bytes(4, "little") for w in img.words)


def read_bin(data: bytes) -> MemImage:
    if len(data) % 4:
        raise ImageError(f"binary image length {len(data)} is not a multiple of 4")
    words = [int.from_bytes(data[i:i + 4], "little") for i in range(0, len(data), 4)]
    return MemImage(0, words)
