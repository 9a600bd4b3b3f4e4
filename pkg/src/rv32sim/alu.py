"""The arithmetic-logic unit: ten 32-bit operations plus comparison flags.

The comparison flags (eq / lt_signed / lt_unsigned) are combinational
outputs of the two operands and are populated on every call, whatever the
selected operation; branches consume them.
"""

import enum
from dataclasses import dataclass

from .bits import WORD_MASK, to_signed


class AluOp(enum.Enum):
    ADD = enum.auto()
    SUB = enum.auto()
    SLL = enum.auto()
    SRL = enum.auto()
    SRA = enum.auto()
    AND = enum.auto()
    OR = enum.auto()
    XOR = enum.auto()
    SLT = enum.auto()
    SLTU = enum.auto()


@dataclass(frozen=True)
class AluResult:
    value: int
    eq: bool
    lt_signed: bool
    lt_unsigned: bool


def alu_exec(op: AluOp, a: int, b: int) -> AluResult:
    """Apply `op` to two 32-bit words. Total: never raises on word inputs."""
    a &= WORD_MASK
    b &= WORD_MASK
    sa = to_signed(a)
    sb = to_signed(b)
    shamt = b & 31  # shifts never look at bits 5..31 of b
    if op is AluOp.ADD:
        value = (a + b) & WORD_MASK
    elif op is AluOp.SUB:
        value = (a - b) & WORD_MASK
    elif op is AluOp.SLL:
        value = (a << shamt) & WORD_MASK
    elif op is AluOp.SRL:
        value = a >> shamt
    elif op is AluOp.SRA:
        value = (sa >> shamt) & WORD_MASK
    elif op is AluOp.AND:
        value = a & b
    elif op is AluOp.OR:
        value = a | b
    elif op is AluOp.XOR:
        value = a ^ b
    elif op is AluOp.SLT:
        value = int(sa < sb)
    elif op is AluOp.SLTU:
        value = int(a < b)
    else:
        raise ValueError(f"unknown ALU op: {op!r}")
    return AluResult(value, a == b, sa < sb, a < b)
