"""Stateful datapath components: register file, instruction and data
memories, and next-PC selection.

The data memory owns the display latch: a word-wide store to
`display_addr` captures the stored value in `output_latch` (in addition to
the normal store when the address is inside the backing array). When
`display_addr` is configured outside the backing array, only word-wide
accesses to it are legal and reads return the latch.
"""

from .bits import BitVec, WORD_MASK, sign_extend
from .control import BranchKind, ControlSignals, MemWidth, PcSrc
from .alu import AluResult
from .image import MemImage


class DatapathTrap(Exception):
    """Base for architectural traps raised by datapath components."""


class FetchOutOfRange(DatapathTrap):
    pass


class MisalignedAccess(DatapathTrap):
    pass


class AccessOutOfRange(DatapathTrap):
    pass


class MisalignedTarget(DatapathTrap):
    pass


class RegisterFile:
    """32 x 32-bit registers; x0 reads as zero and ignores writes."""

    __slots__ = ("regs",)

    def __init__(self):
        self.regs = [0] * 32

    def read(self, a1: int, a2: int) -> tuple[int, int]:
        if not (0 <= a1 <= 31 and 0 <= a2 <= 31):
            raise ValueError(f"register index out of range: {a1}, {a2}")
        return self.regs[a1], self.regs[a2]

    def write(self, a3: int, wd: int, we: bool = True) -> None:
        if not 0 <= a3 <= 31:
            raise ValueError(f"register index out of range: {a3}")
        if we and a3 != 0:
            self.regs[a3] = wd & WORD_MASK

    def copy(self) -> "RegisterFile":
        rf = RegisterFile()
        rf.regs = list(self.regs)
        return rf


class InstructionMemory:
    """Read-only word array starting at `base`; fixed size, zero-filled."""

    __slots__ = ("words", "base")

    def __init__(self, words, base: int = 0):
        if base % 4:
            raise ValueError(f"base 0x{base:x} is not word-aligned")
        self.words = tuple(w & WORD_MASK for w in words)
        self.base = base

    @classmethod
    def from_image(cls, img: MemImage, size_bytes: int = 4096, base: int = 0) -> "InstructionMemory":
        if size_bytes % 4:
            raise ValueError("size_bytes must be a multiple of 4")
        capacity = size_bytes // 4
        offset = (img.origin - base) // 4
        if img.origin % 4 or offset < 0 or offset + len(img.words) > capacity:
            raise ValueError(
                f"image ({len(img.words)} words at 0x{img.origin:x}) does not fit "
                f"in {size_bytes} bytes at base 0x{base:x}")
        words = [0] * capacity
        words[offset:offset + len(img.words)] = img.words
        return cls(words, base)

    def fetch(self, pc: int) -> int:
        off = pc - self.base
        if pc % 4 or off < 0 or off >= 4 * len(self.words):
            raise FetchOutOfRange(f"fetch at 0x{pc:08x} outside instruction memory")
        return self.words[off >> 2]


class DataMemory:
    """Byte-addressed little-endian memory with an MMIO display latch."""

    __slots__ = ("data", "size_bytes", "display_addr", "output_latch")

    def __init__(self, size_bytes: int = 4096, display_addr: int = 0xFFC):
        if size_bytes <= 0 or size_bytes & (size_bytes - 1):
            raise ValueError(f"size_bytes must be a power of two, got {size_bytes}")
        if display_addr % 4:
            raise ValueError(f"display_addr 0x{display_addr:x} is not word-aligned")
        self.data = bytearray(size_bytes)
        self.size_bytes = size_bytes
        self.display_addr = display_addr
        self.output_latch = 0

    def load_image(self, img: MemImage) -> None:
        start = img.origin
        end = start + 4 * len(img.words)
        if end > self.size_bytes:
            raise ValueError(
                f"image ({len(img.words)} words at 0x{img.origin:x}) does not fit "
                f"in {self.size_bytes} bytes")
        for i, w in enumerate(img.words):
            self.data[start + 4 * i:start + 4 * i + 4] = w.to_bytes(4, "little")

    def access(
        self,
        addr: int,
        wd: int = 0,
        width: MemWidth = MemWidth.WORD,
        unsigned: bool = False,
        read: bool = False,
        write: bool = False,
    ) -> int:
        """One memory port operation; returns the (extended) read value.

        Reads sign- or zero-extend sub-word data; writes store the low
        `width` bytes of wd. Raises MisalignedAccess/AccessOutOfRange.
        """
        if read and write:
            raise ValueError("read and write are mutually exclusive")
        nbytes = width.nbytes
        if addr % nbytes:
            raise MisalignedAccess(f"{nbytes}-byte access at 0x{addr:08x}")
        in_backing = 0 <= addr and addr + nbytes <= self.size_bytes
        at_display = addr == self.display_addr and width is MemWidth.WORD
        if not in_backing and not at_display:
            raise AccessOutOfRange(f"{nbytes}-byte access at 0x{addr:08x}")
        value = 0
        if write:
            if in_backing:
                self.data[addr:addr + nbytes] = (wd & ((1 << (8 * nbytes)) - 1)).to_bytes(nbytes, "little")
            if at_display:
                self.output_latch = wd & WORD_MASK
        elif read:
            if in_backing:
                raw = int.from_bytes(self.data[addr:addr + nbytes], "little")
                if width is MemWidth.WORD or unsigned:
                    value = raw
                else:
                    value = sign_extend(BitVec(8 * nbytes, raw), 32).value
            else:
                value = self.output_latch
        return value

    def dump(self, words_per_line: int = 8) -> str:
        """Hex dump, `addr: word ...` with `words_per_line` words per line."""
        lines = []
        for start in range(0, self.size_bytes, 4 * words_per_line):
            ws = [
                f"{int.from_bytes(self.data[a:a + 4], 'little'):08x}"
                for a in range(start, min(start + 4 * words_per_line, self.size_bytes), 4)
            ]
            lines.append(f"{start:08x}: " + " ".join(ws))
        return "\n".join(lines) + "\n"

    def copy(self) -> "DataMemory":
        dm = DataMemory.__new__(DataMemory)
        dm.data = bytearray(self.data)
        dm.size_bytes = self.size_bytes
        dm.display_addr = self.display_addr
        dm.output_latch = self.output_latch
        return dm


_BRANCH_TAKEN = {
    BranchKind.BEQ: lambda r: r.eq,
    BranchKind.BNE: lambda r: not r.eq,
    BranchKind.BLT: lambda r: r.lt_signed,
    BranchKind.BGE: lambda r: not r.lt_signed,
    BranchKind.BLTU: lambda r: r.lt_unsigned,
    BranchKind.BGEU: lambda r: not r.lt_unsigned,
}


def pc_next(pc: int, sig: ControlSignals, alu: AluResult, imm: int, rs1val: int) -> int:
    """Select the next pc; raises MisalignedTarget on a non-word target."""
    if sig.pc_src is PcSrc.PLUS4:
        target = (pc + 4) & WORD_MASK
    elif sig.pc_src is PcSrc.BRANCH_TARGET:
        if _BRANCH_TAKEN[sig.branch_kind](alu):
            target = (pc + imm) & WORD_MASK
        else:
            target = (pc + 4) & WORD_MASK
    elif sig.pc_src is PcSrc.JUMP_TARGET:
        target = (pc + imm) & WORD_MASK
    else:  # JALR_TARGET: drop bit 0 of rs1 + imm
        target = (rs1val + imm) & WORD_MASK & ~1
    if target % 4:
        raise MisalignedTarget(f"jump/branch target 0x{target:08x} is not word-aligned")
    return target
