"""Instruction definitions and binary encode/decode for the RV32I base set.

All 40 base mnemonics are supported. FENCE decodes like a plain I-type word
(its ordering fields ride in the immediate) and ECALL/EBREAK are the two
legal SYSTEM encodings. Reserved bits are checked during decode, so
decode/encode form a bijection: every 32-bit word either round-trips
exactly or raises IllegalInstruction.
"""

import enum
from dataclasses import dataclass
from functools import lru_cache

from .bits import BitVec, WORD_MASK, extract_field, sign_extend, to_signed


class IllegalInstruction(ValueError):
    """The word matches no supported encoding."""


class EncodeError(ValueError):
    """The instruction's fields cannot be represented in its format."""


class ImmediateRange(EncodeError):
    """Immediate outside the format's representable range."""


class FieldRange(EncodeError):
    """Register index out of range, or a field the format does not use is set."""


class Format(enum.Enum):
    R = enum.auto()
    I = enum.auto()
    S = enum.auto()
    B = enum.auto()
    U = enum.auto()
    J = enum.auto()


class Mnemonic(str, enum.Enum):
    ADD = "add"
    ADDI = "addi"
    SUB = "sub"
    SLL = "sll"
    SLLI = "slli"
    SRL = "srl"
    SRLI = "srli"
    SRA = "sra"
    SRAI = "srai"
    AND = "and"
    ANDI = "andi"
    OR = "or"
    ORI = "ori"
    XOR = "xor"
    XORI = "xori"
    SLT = "slt"
    SLTI = "slti"
    SLTU = "sltu"
    SLTIU = "sltiu"
    LUI = "lui"
    AUIPC = "auipc"
    BEQ = "beq"
    BNE = "bne"
    BLT = "blt"
    BLTU = "bltu"
    BGE = "bge"
    BGEU = "bgeu"
    JAL = "jal"
    JALR = "jalr"
    LB = "lb"
    LBU = "lbu"
    LH = "lh"
    LHU = "lhu"
    LW = "lw"
    SB = "sb"
    SH = "sh"
    SW = "sw"
    FENCE = "fence"
    ECALL = "ecall"
    EBREAK = "ebreak"


@dataclass(frozen=True)
class Instruction:
    """A decoded instruction.

    Fields the format does not use are zero. `imm` holds the full 32-bit
    two's-complement pattern (sign extension already applied); for the
    shift-immediates it is the 5-bit shift amount, for U-type the low 12
    bits are zero, and for B/J bit 0 is zero.
    """

    mnemonic: Mnemonic
    rd: int = 0
    rs1: int = 0
    rs2: int = 0
    imm: int = 0

    @property
    def imm_signed(self) -> int:
        return to_signed(self.imm)


@dataclass(frozen=True)
class _Enc:
    fmt: Format
    opcode: int
    funct3: int | None = None
    funct7: int | None = None


_OPC_LOAD = 0b0000011
_OPC_MISC_MEM = 0b0001111
_OPC_OP_IMM = 0b0010011
_OPC_AUIPC = 0b0010111
_OPC_STORE = 0b0100011
_OPC_OP = 0b0110011
_OPC_LUI = 0b0110111
_OPC_BRANCH = 0b1100011
_OPC_JALR = 0b1100111
_OPC_JAL = 0b1101111
_OPC_SYSTEM = 0b1110011

ENCODINGS: dict[Mnemonic, _Enc] = {
    Mnemonic.ADD: _Enc(Format.R, _OPC_OP, 0b000, 0b0000000),
    Mnemonic.SUB: _Enc(Format.R, _OPC_OP, 0b000, 0b0100000),
    Mnemonic.SLL: _Enc(Format.R, _OPC_OP, 0b001, 0b0000000),
    Mnemonic.SLT: _Enc(Format.R, _OPC_OP, 0b010, 0b0000000),
    Mnemonic.SLTU: _Enc(Format.R, _OPC_OP, 0b011, 0b0000000),
    Mnemonic.XOR: _Enc(Format.R, _OPC_OP, 0b100, 0b0000000),
    Mnemonic.SRL: _Enc(Format.R, _OPC_OP, 0b101, 0b0000000),
    Mnemonic.SRA: _Enc(Format.R, _OPC_OP, 0b101, 0b0100000),
    Mnemonic.OR: _Enc(Format.R, _OPC_OP, 0b110, 0b0000000),
    Mnemonic.AND: _Enc(Format.R, _OPC_OP, 0b111, 0b0000000),
    Mnemonic.ADDI: _Enc(Format.I, _OPC_OP_IMM, 0b000),
    Mnemonic.SLTI: _Enc(Format.I, _OPC_OP_IMM, 0b010),
    Mnemonic.SLTIU: _Enc(Format.I, _OPC_OP_IMM, 0b011),
    Mnemonic.XORI: _Enc(Format.I, _OPC_OP_IMM, 0b100),
    Mnemonic.ORI: _Enc(Format.I, _OPC_OP_IMM, 0b110),
    Mnemonic.ANDI: _Enc(Format.I, _OPC_OP_IMM, 0b111),
    Mnemonic.SLLI: _Enc(Format.I, _OPC_OP_IMM, 0b001, 0b0000000),
    Mnemonic.SRLI: _Enc(Format.I, _OPC_OP_IMM, 0b101, 0b0000000),
    Mnemonic.SRAI: _Enc(Format.I, _OPC_OP_IMM, 0b101, 0b0100000),
    Mnemonic.LB: _Enc(Format.I, _OPC_LOAD, 0b000),
    Mnemonic.LH: _Enc(Format.I, _OPC_LOAD, 0b001),
    Mnemonic.LW: _Enc(Format.I, _OPC_LOAD, 0b010),
    Mnemonic.LBU: _Enc(Format.I, _OPC_LOAD, 0b100),
    Mnemonic.LHU: _Enc(Format.I, _OPC_LOAD, 0b101),
    Mnemonic.JALR: _Enc(Format.I, _OPC_JALR, 0b000),
    Mnemonic.FENCE: _Enc(Format.I, _OPC_MISC_MEM, 0b000),
    Mnemonic.ECALL: _Enc(Format.I, _OPC_SYSTEM, 0b000),
    Mnemonic.EBREAK: _Enc(Format.I, _OPC_SYSTEM, 0b000),
    Mnemonic.SB: _Enc(Format.S, _OPC_STORE, 0b000),
    Mnemonic.SH: _Enc(Format.S, _OPC_STORE, 0b001),
    Mnemonic.SW: _Enc(Format.S, _OPC_STORE, 0b010),
    Mnemonic.BEQ: _Enc(Format.B, _OPC_BRANCH, 0b000),
    Mnemonic.BNE: _Enc(Format.B, _OPC_BRANCH, 0b001),
    Mnemonic.BLT: _Enc(Format.B, _OPC_BRANCH, 0b100),
    Mnemonic.BGE: _Enc(Format.B, _OPC_BRANCH, 0b101),
    Mnemonic.BLTU: _Enc(Format.B, _OPC_BRANCH, 0b110),
    Mnemonic.BGEU: _Enc(Format.B, _OPC_BRANCH, 0b111),
    Mnemonic.LUI: _Enc(Format.U, _OPC_LUI),
    Mnemonic.AUIPC: _Enc(Format.U, _OPC_AUIPC),
    Mnemonic.JAL: _Enc(Format.J, _OPC_JAL),
}

SHIFT_IMMEDIATES = frozenset({Mnemonic.SLLI, Mnemonic.SRLI, Mnemonic.SRAI})

_BRANCH_BY_F3 = {e.funct3: m for m, e in ENCODINGS.items() if e.opcode == _OPC_BRANCH}
_LOAD_BY_F3 = {e.funct3: m for m, e in ENCODINGS.items() if e.opcode == _OPC_LOAD}
_STORE_BY_F3 = {e.funct3: m for m, e in ENCODINGS.items() if e.opcode == _OPC_STORE}
_OP_BY_F3_F7 = {(e.funct3, e.funct7): m for m, e in ENCODINGS.items() if e.opcode == _OPC_OP}
_OP_IMM_BY_F3 = {
    e.funct3: m
    for m, e in ENCODINGS.items()
    if e.opcode == _OPC_OP_IMM and m not in SHIFT_IMMEDIATES
}


def format_of(m: Mnemonic) -> Format:
    return ENCODINGS[m].fmt


def _imm_i(w: int) -> int:
    return sign_extend(extract_field(w, 31, 20), 32).value


def _imm_s(w: int) -> int:
    v = (extract_field(w, 31, 25).value << 5) | extract_field(w, 11, 7).value
    return sign_extend(BitVec(12, v), 32).value


def _imm_b(w: int) -> int:
    v = (
        (extract_field(w, 31, 31).value << 12)
        | (extract_field(w, 7, 7).value << 11)
        | (extract_field(w, 30, 25).value << 5)
        | (extract_field(w, 11, 8).value << 1)
    )
    return sign_extend(BitVec(13, v), 32).value


def _imm_j(w: int) -> int:
    v = (
        (extract_field(w, 31, 31).value << 20)
        | (extract_field(w, 19, 12).value << 12)
        | (extract_field(w, 20, 20).value << 11)
        | (extract_field(w, 30, 21).value << 1)
    )
    return sign_extend(BitVec(21, v), 32).value


@lru_cache(maxsize=65536)
def decode(w: int) -> Instruction:
    """Decode a 32-bit word, raising IllegalInstruction if no encoding matches."""
    if not 0 <= w <= WORD_MASK:
        raise ValueError(f"not a 32-bit word: {w!r}")
    opcode = w & 0x7F
    rd = extract_field(w, 11, 7).value
    funct3 = extract_field(w, 14, 12).value
    rs1 = extract_field(w, 19, 15).value
    rs2 = extract_field(w, 24, 20).value
    funct7 = extract_field(w, 31, 25).value

    if opcode == _OPC_LUI:
        return Instruction(Mnemonic.LUI, rd=rd, imm=w & 0xFFFFF000)
    if opcode == _OPC_AUIPC:
        return Instruction(Mnemonic.AUIPC, rd=rd, imm=w & 0xFFFFF000)
    if opcode == _OPC_JAL:
        return Instruction(Mnemonic.JAL, rd=rd, imm=_imm_j(w))
    if opcode == _OPC_JALR:
        if funct3 != 0:
            raise IllegalInstruction(f"bad jalr funct3 in 0x{w:08x}")
        return Instruction(Mnemonic.JALR, rd=rd, rs1=rs1, imm=_imm_i(w))
    if opcode == _OPC_BRANCH:
        m = _BRANCH_BY_F3.get(funct3)
        if m is None:
            raise IllegalInstruction(f"bad branch funct3 in 0x{w:08x}")
        return Instruction(m, rs1=rs1, rs2=rs2, imm=_imm_b(w))
    if opcode == _OPC_LOAD:
        m = _LOAD_BY_F3.get(funct3)
        if m is None:
            raise IllegalInstruction(f"bad load funct3 in 0x{w:08x}")
        return Instruction(m, rd=rd, rs1=rs1, imm=_imm_i(w))
    if opcode == _OPC_STORE:
        m = _STORE_BY_F3.get(funct3)
        if m is None:
            raise IllegalInstruction(f"bad store funct3 in 0x{w:08x}")
        return Instruction(m, rs1=rs1, rs2=rs2, imm=_imm_s(w))
    if opcode == _OPC_OP_IMM:
        if funct3 == 0b001:
            if funct7 != 0b0000000:
                raise IllegalInstruction(f"bad slli funct7 in 0x{w:08x}")
            return Instruction(Mnemonic.SLLI, rd=rd, rs1=rs1, imm=rs2)
        if funct3 == 0b101:
            if funct7 == 0b0000000:
                return Instruction(Mnemonic.SRLI, rd=rd, rs1=rs1, imm=rs2)
            if funct7 == 0b0100000:
                return Instruction(Mnemonic.SRAI, rd=rd, rs1=rs1, imm=rs2)
            raise IllegalInstruction(f"bad shift funct7 in 0x{w:08x}")
        return Instruction(_OP_IMM_BY_F3[funct3], rd=rd, rs1=rs1, imm=_imm_i(w))
    if opcode == _OPC_OP:
        m = _OP_BY_F3_F7.get((funct3, funct7))
        if m is None:
            raise IllegalInstruction(f"bad funct3/funct7 in 0x{w:08x}")
        return Instruction(m, rd=rd, rs1=rs1, rs2=rs2)
    if opcode == _OPC_MISC_MEM:
        if funct3 != 0:
            raise IllegalInstruction(f"unsupported fence variant 0x{w:08x}")
        return Instruction(Mnemonic.FENCE, rd=rd, rs1=rs1, imm=_imm_i(w))
    if opcode == _OPC_SYSTEM:
        if funct3 != 0 or rd != 0 or rs1 != 0:
            raise IllegalInstruction(f"unsupported system word 0x{w:08x}")
        imm12 = extract_field(w, 31, 20).value
        if imm12 == 0:
            return Instruction(Mnemonic.ECALL)
        if imm12 == 1:
            return Instruction(Mnemonic.EBREAK, imm=1)
        raise IllegalInstruction(f"unsupported system word 0x{w:08x}")
    raise IllegalInstruction(f"unknown opcode in 0x{w:08x}")


def _check_reg(name: str, idx: int) -> None:
    if not 0 <= idx <= 31:
        raise FieldRange(f"{name} index {idx} not in 0..31")


def _check_unused(inst: Instruction, fmt: Format) -> None:
    if fmt in (Format.S, Format.B) and inst.rd != 0:
        raise FieldRange(f"{fmt.name}-type does not use rd")
    if fmt is Format.I and inst.rs2 != 0:
        raise FieldRange("I-type does not use rs2")
    if fmt in (Format.U, Format.J) and (inst.rs1 or inst.rs2):
        raise FieldRange(f"{fmt.name}-type does not use rs1/rs2")


def _check_signed_range(imm: int, bits: int, what: str) -> int:
    si = to_signed(imm)
    lo, hi = -(1 << (bits - 1)), (1 << (bits - 1)) - 1
    if not lo <= si <= hi:
        raise ImmediateRange(f"{what} {si} not in {lo}..{hi}")
    return si


def encode(inst: Instruction) -> int:
    """Encode to the unique 32-bit word; decode(encode(inst)) == inst."""
    enc = ENCODINGS[inst.mnemonic]
    _check_reg("rd", inst.rd)
    _check_reg("rs1", inst.rs1)
    _check_reg("rs2", inst.rs2)
    _check_unused(inst, enc.fmt)
    opc, f3 = enc.opcode, enc.funct3

    if enc.fmt is Format.R:
        if inst.imm != 0:
            raise ImmediateRange("R-type takes no immediate")
        return (enc.funct7 << 25) | (inst.rs2 << 20) | (inst.rs1 << 15) | (f3 << 12) | (inst.rd << 7) | opc

    if enc.fmt is Format.I:
        if inst.mnemonic in SHIFT_IMMEDIATES:
            if not 0 <= inst.imm <= 31:
                raise ImmediateRange(f"shift amount {inst.imm} not in 0..31")
            imm12 = (enc.funct7 << 5) | inst.imm
        elif inst.mnemonic in (Mnemonic.ECALL, Mnemonic.EBREAK):
            expected = 1 if inst.mnemonic is Mnemonic.EBREAK else 0
            if inst.imm != expected:
                raise ImmediateRange(f"{inst.mnemonic.value} immediate must be {expected}")
            if inst.rd or inst.rs1:
                raise FieldRange(f"{inst.mnemonic.value} does not use rd/rs1")
            imm12 = inst.imm
        else:
            _check_signed_range(inst.imm, 12, "immediate")
            imm12 = inst.imm & 0xFFF
        return (imm12 << 20) | (inst.rs1 << 15) | (f3 << 12) | (inst.rd << 7) | opc

    if enc.fmt is Format.S:
        _check_signed_range(inst.imm, 12, "store offset")
        imm = inst.imm & 0xFFF
        return ((imm >> 5) << 25) | (inst.rs2 << 20) | (inst.rs1 << 15) | (f3 << 12) | ((imm & 0x1F) << 7) | opc

    if enc.fmt is Format.B:
        if inst.imm & 1:
            raise ImmediateRange("branch offset must be even")
        _check_signed_range(inst.imm, 13, "branch offset")
        imm = inst.imm & 0x1FFF
        return (
            ((imm >> 12) << 31)
            | (((imm >> 5) & 0x3F) << 25)
            | (inst.rs2 << 20)
            | (inst.rs1 << 15)
            | (f3 << 12)
            | (((imm >> 1) & 0xF) << 8)
            | (((imm >> 11) & 1) << 7)
            | opc
        )

    if enc.fmt is Format.U:
        if inst.imm & 0xFFF:
            raise ImmediateRange("upper immediate must have zero low 12 bits")
        return (inst.imm & 0xFFFFF000) | (inst.rd << 7) | opc

    # J
    if inst.imm & 1:
        raise ImmediateRange("jump offset must be even")
    _check_signed_range(inst.imm, 21, "jump offset")
    imm = inst.imm & 0x1FFFFF
    return (
        ((imm >> 20) << 31)
        | (((imm >> 1) & 0x3FF) << 21)
        | (((imm >> 11) & 1) << 20)
        | (((imm >> 12) & 0xFF) << 12)
        | (inst.rd << 7)
        | opc
    )
