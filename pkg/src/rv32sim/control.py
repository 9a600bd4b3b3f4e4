"""Control signal generation: one static signal bundle per mnemonic.

The bundle combines the semantic enables (register write, memory read and
write, output, halt) with the mux selectors a single-cycle datapath needs
(ALU operand sources, write-back source, next-PC source, access width).
The full table can be emitted as CSV for inspection via the CLI.
"""

import csv
import enum
import io
from dataclasses import dataclass, fields

from .alu import AluOp
from .isa import Instruction, Mnemonic, format_of


class AluSrcA(enum.Enum):
    REG = enum.auto()
    PC = enum.auto()
    ZERO = enum.auto()


class AluSrcB(enum.Enum):
    REG = enum.auto()
    IMM = enum.auto()


class BranchKind(enum.Enum):
    NONE = enum.auto()
    BEQ = enum.auto()
    BNE = enum.auto()
    BLT = enum.auto()
    BLTU = enum.auto()
    BGE = enum.auto()
    BGEU = enum.auto()
    JAL = enum.auto()
    JALR = enum.auto()


class PcSrc(enum.Enum):
    PLUS4 = enum.auto()
    BRANCH_TARGET = enum.auto()
    JUMP_TARGET = enum.auto()
    JALR_TARGET = enum.auto()


class WbSrc(enum.Enum):
    ALU = enum.auto()
    MEM = enum.auto()
    PC_PLUS_4 = enum.auto()
    IMM_U = enum.auto()


class MemWidth(enum.Enum):
    BYTE = 1
    HALF = 2
    WORD = 4

    @property
    def nbytes(self) -> int:
        return self.value


@dataclass(frozen=True)
class ControlSignals:
    reg_write: bool = False
    mem_read: bool = False
    mem_write: bool = False
    mem_to_reg: bool = False
    alu_src_a: AluSrcA = AluSrcA.REG
    alu_src_b: AluSrcB = AluSrcB.REG
    alu_op: AluOp = AluOp.ADD
    branch_kind: BranchKind = BranchKind.NONE
    pc_src: PcSrc = PcSrc.PLUS4
    wb_src: WbSrc = WbSrc.ALU
    mem_width: MemWidth = MemWidth.WORD
    mem_unsigned: bool = False
    output_enable: bool = False  # instruction can drive the display latch
    halt: bool = False


def _r(op: AluOp) -> ControlSignals:
    return ControlSignals(reg_write=True, alu_op=op)


def _i(op: AluOp) -> ControlSignals:
    return ControlSignals(reg_write=True, alu_src_b=AluSrcB.IMM, alu_op=op)


def _load(width: MemWidth, unsigned: bool = False) -> ControlSignals:
    return ControlSignals(
        reg_write=True,
        mem_read=True,
        mem_to_reg=True,
        alu_src_b=AluSrcB.IMM,
        wb_src=WbSrc.MEM,
        mem_width=width,
        mem_unsigned=unsigned,
    )


def _store(width: MemWidth, output_enable: bool = False) -> ControlSignals:
    return ControlSignals(
        mem_write=True,
        alu_src_b=AluSrcB.IMM,
        mem_width=width,
        output_enable=output_enable,
    )


def _branch(kind: BranchKind) -> ControlSignals:
    return ControlSignals(alu_op=AluOp.SUB, branch_kind=kind, pc_src=PcSrc.BRANCH_TARGET)


CONTROL_TABLE: dict[Mnemonic, ControlSignals] = {
    Mnemonic.ADD: _r(AluOp.ADD),
    Mnemonic.SUB: _r(AluOp.SUB),
    Mnemonic.SLL: _r(AluOp.SLL),
    Mnemonic.SRL: _r(AluOp.SRL),
    Mnemonic.SRA: _r(AluOp.SRA),
    Mnemonic.AND: _r(AluOp.AND),
    Mnemonic.OR: _r(AluOp.OR),
    Mnemonic.XOR: _r(AluOp.XOR),
    Mnemonic.SLT: _r(AluOp.SLT),
    Mnemonic.SLTU: _r(AluOp.SLTU),
    Mnemonic.ADDI: _i(AluOp.ADD),
    Mnemonic.SLLI: _i(AluOp.SLL),
    Mnemonic.SRLI: _i(AluOp.SRL),
    Mnemonic.SRAI: _i(AluOp.SRA),
    Mnemonic.ANDI: _i(AluOp.AND),
    Mnemonic.ORI: _i(AluOp.OR),
    Mnemonic.XORI: _i(AluOp.XOR),
    Mnemonic.SLTI: _i(AluOp.SLT),
    Mnemonic.SLTIU: _i(AluOp.SLTU),
    # lui ignores the ALU result (a=0 route) and writes the immediate back
    # directly; auipc adds the immediate to the pc through the ALU.
    Mnemonic.LUI: ControlSignals(
        reg_write=True, alu_src_a=AluSrcA.ZERO, alu_src_b=AluSrcB.IMM, wb_src=WbSrc.IMM_U
    ),
    Mnemonic.AUIPC: ControlSignals(reg_write=True, alu_src_a=AluSrcA.PC, alu_src_b=AluSrcB.IMM),
    Mnemonic.BEQ: _branch(BranchKind.BEQ),
    Mnemonic.BNE: _branch(BranchKind.BNE),
    Mnemonic.BLT: _branch(BranchKind.BLT),
    Mnemonic.BLTU: _branch(BranchKind.BLTU),
    Mnemonic.BGE: _branch(BranchKind.BGE),
    Mnemonic.BGEU: _branch(BranchKind.BGEU),
    Mnemonic.JAL: ControlSignals(
        reg_write=True, branch_kind=BranchKind.JAL, pc_src=PcSrc.JUMP_TARGET, wb_src=WbSrc.PC_PLUS_4
    ),
    Mnemonic.JALR: ControlSignals(
        reg_write=True,
        alu_src_b=AluSrcB.IMM,
        branch_kind=BranchKind.JALR,
        pc_src=PcSrc.JALR_TARGET,
        wb_src=WbSrc.PC_PLUS_4,
    ),
    Mnemonic.LB: _load(MemWidth.BYTE),
    Mnemonic.LBU: _load(MemWidth.BYTE, unsigned=True),
    Mnemonic.LH: _load(MemWidth.HALF),
    Mnemonic.LHU: _load(MemWidth.HALF, unsigned=True),
    Mnemonic.LW: _load(MemWidth.WORD),
    Mnemonic.SB: _store(MemWidth.BYTE),
    Mnemonic.SH: _store(MemWidth.HALF),
    Mnemonic.SW: _store(MemWidth.WORD, output_enable=True),
    Mnemonic.FENCE: ControlSignals(),  # all-inactive: fence is a no-op here
    Mnemonic.ECALL: ControlSignals(halt=True),
    Mnemonic.EBREAK: ControlSignals(halt=True),
}


def generate_signals(inst: Instruction) -> ControlSignals:
    """Look up the signal bundle for a decoded instruction."""
    return CONTROL_TABLE[inst.mnemonic]


def control_table_csv() -> str:
    """The whole control table as CSV, one row per mnemonic."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    names = [f.name for f in fields(ControlSignals)]
    writer.writerow(["mnemonic", "format"] + names)
    for m in Mnemonic:
        sig = CONTROL_TABLE[m]
        row = [m.value, format_of(m).name]
        for name in names:
            v = getattr(sig, name)
            row.append(int(v) if isinstance(v, bool) else v.name)
        writer.writerow(row)
    return buf.getvalue()
