"""Shared test helpers.

`oracle_encode` is an independent instruction encoder: its opcode/funct
tables and bit packing are written out from scratch so it shares nothing
with rv32sim.isa. The generators below produce random legal instructions,
machine states, and structured programs for differential fuzzing.
"""

import random

from rv32sim.core import MachineState
from rv32sim.datapath import DataMemory, InstructionMemory
from rv32sim.image import MemImage
from rv32sim.isa import Format, Instruction, Mnemonic, encode, format_of

# ---------------------------------------------------------------------------
# independent field-packing oracle

_ORACLE = {
    # name: (kind, opcode, funct3, funct7)
    "add": ("r", 0b0110011, 0, 0x00),
    "sub": ("r", 0b0110011, 0, 0x20),
    "sll": ("r", 0b0110011, 1, 0x00),
    "slt": ("r", 0b0110011, 2, 0x00),
    "sltu": ("r", 0b0110011, 3, 0x00),
    "xor": ("r", 0b0110011, 4, 0x00),
    "srl": ("r", 0b0110011, 5, 0x00),
    "sra": ("r", 0b0110011, 5, 0x20),
    "or": ("r", 0b0110011, 6, 0x00),
    "and": ("r", 0b0110011, 7, 0x00),
    "addi": ("i", 0b0010011, 0, None),
    "slti": ("i", 0b0010011, 2, None),
    "sltiu": ("i", 0b0010011, 3, None),
    "xori": ("i", 0b0010011, 4, None),
    "ori": ("i", 0b0010011, 6, None),
    "andi": ("i", 0b0010011, 7, None),
    "slli": ("shift", 0b0010011, 1, 0x00),
    "srli": ("shift", 0b0010011, 5, 0x00),
    "srai": ("shift", 0b0010011, 5, 0x20),
    "lb": ("i", 0b0000011, 0, None),
    "lh": ("i", 0b0000011, 1, None),
    "lw": ("i", 0b0000011, 2, None),
    "lbu": ("i", 0b0000011, 4, None),
    "lhu": ("i", 0b0000011, 5, None),
    "jalr": ("i", 0b1100111, 0, None),
    "fence": ("i", 0b0001111, 0, None),
    "ecall": ("i", 0b1110011, 0, None),
    "ebreak": ("i", 0b1110011, 0, None),
    "sb": ("s", 0b0100011, 0, None),
    "sh": ("s", 0b0100011, 1, None),
    "sw": ("s", 0b0100011, 2, None),
    "beq": ("b", 0b1100011, 0, None),
    "bne": ("b", 0b1100011, 1, None),
    "blt": ("b", 0b1100011, 4, None),
    "bge": ("b", 0b1100011, 5, None),
    "bltu": ("b", 0b1100011, 6, None),
    "bgeu": ("b", 0b1100011, 7, None),
    "lui": ("u", 0b0110111, None, None),
    "auipc": ("u", 0b0010111, None, None),
    "jal": ("j", 0b1101111, None, None),
}


def oracle_encode(name, rd=0, rs1=0, rs2=0, imm=0):
    """Pack instruction fields bit by bit, straight from the format tables."""
    kind, opcode, f3, f7 = _ORACLE[name]
    if kind == "r":
        return (f7 << 25) | (rs2 << 20) | (rs1 << 15) | (f3 << 12) | (rd << 7) | opcode
    if kind == "shift":
        return (f7 << 25) | (imm << 20) | (rs1 << 15) | (f3 << 12) | (rd << 7) | opcode
    if kind == "i":
        return ((imm & 0xFFF) << 20) | (rs1 << 15) | (f3 << 12) | (rd << 7) | opcode
    if kind == "s":
        lo, hi = imm & 0x1F, (imm >> 5) & 0x7F
        return (hi << 25) | (rs2 << 20) | (rs1 << 15) | (f3 << 12) | (lo << 7) | opcode
    if kind == "b":
        b12 = (imm >> 12) & 1
        b11 = (imm >> 11) & 1
        b10_5 = (imm >> 5) & 0x3F
        b4_1 = (imm >> 1) & 0xF
        return (b12 << 31) | (b10_5 << 25) | (rs2 << 20) | (rs1 << 15) | (f3 << 12) \
            | (b4_1 << 8) | (b11 << 7) | opcode
    if kind == "u":
        return (imm & 0xFFFFF000) | (rd << 7) | opcode
    # j
    b20 = (imm >> 20) & 1
    b19_12 = (imm >> 12) & 0xFF
    b11 = (imm >> 11) & 1
    b10_1 = (imm >> 1) & 0x3FF
    return (b20 << 31) | (b10_1 << 21) | (b11 << 20) | (b19_12 << 12) | (rd << 7) | opcode


# ---------------------------------------------------------------------------
# random legal instructions

MASK32 = 0xFFFFFFFF

SHIFT_IMMS = (Mnemonic.SLLI, Mnemonic.SRLI, Mnemonic.SRAI)
LOADS = (Mnemonic.LB, Mnemonic.LBU, Mnemonic.LH, Mnemonic.LHU, Mnemonic.LW)
STORES = (Mnemonic.SB, Mnemonic.SH, Mnemonic.SW)
BRANCHES = (Mnemonic.BEQ, Mnemonic.BNE, Mnemonic.BLT, Mnemonic.BGE,
            Mnemonic.BLTU, Mnemonic.BGEU)
WIDTH_OF = {Mnemonic.LB: 1, Mnemonic.LBU: 1, Mnemonic.LH: 2, Mnemonic.LHU: 2,
            Mnemonic.LW: 4, Mnemonic.SB: 1, Mnemonic.SH: 2, Mnemonic.SW: 4}


def random_instruction(rng: random.Random, mnemonic: Mnemonic | None = None) -> Instruction:
    """A uniformly random legal instruction (fields within format ranges)."""
    m = mnemonic if mnemonic is not None else rng.choice(list(Mnemonic))
    fmt = format_of(m)
    rd = rng.randrange(32)
    rs1 = rng.randrange(32)
    rs2 = rng.randrange(32)
    if m is Mnemonic.ECALL:
        return Instruction(m)
    if m is Mnemonic.EBREAK:
        return Instruction(m, imm=1)
    if fmt is Format.R:
        return Instruction(m, rd=rd, rs1=rs1, rs2=rs2)
    if fmt is Format.I:
        if m in SHIFT_IMMS:
            return Instruction(m, rd=rd, rs1=rs1, imm=rng.randrange(32))
        return Instruction(m, rd=rd, rs1=rs1, imm=rng.randrange(-2048, 2048) & MASK32)
    if fmt is Format.S:
        return Instruction(m, rs1=rs1, rs2=rs2, imm=rng.randrange(-2048, 2048) & MASK32)
    if fmt is Format.B:
        return Instruction(m, rs1=rs1, rs2=rs2, imm=(rng.randrange(-2048, 2048) * 2) & MASK32)
    if fmt is Format.U:
        return Instruction(m, rd=rd, imm=rng.randrange(1 << 20) << 12)
    return Instruction(m, rd=rd, imm=(rng.randrange(-(1 << 19), 1 << 19) * 2) & MASK32)


def state_for(insts, regs=None, dmem_bytes=None, dmem_size=4096, imem_size=4096,
              pc=0) -> MachineState:
    """Machine with `insts` (Instruction or raw word) at address 0."""
    words = [w if isinstance(w, int) else encode(w) for w in insts]
    imem = InstructionMemory.from_image(MemImage(0, words), size_bytes=imem_size)
    dmem = DataMemory(dmem_size)
    if dmem_bytes is not None:
        dmem.data[:len(dmem_bytes)] = dmem_bytes
    state = MachineState(imem, dmem, pc=pc)
    if regs is not None:
        for i, v in enumerate(regs):
            if i:
                state.rf.regs[i] = v & MASK32
    return state


def random_single_step_state(rng: random.Random, mnemonic=None) -> MachineState:
    """One random instruction at pc=0 over randomized registers/memory.

    Half the states keep register values small so memory addresses tend to
    land inside data memory; the rest are fully wild.
    """
    inst = random_instruction(rng, mnemonic)
    tame = rng.random() < 0.5
    if tame:
        regs = [0] + [rng.randrange(0, 2048) for _ in range(31)]
    else:
        regs = [0] + [rng.randrange(1 << 32) for _ in range(31)]
    state = state_for([inst], regs=regs)
    state.dmem.data[:] = rng.randbytes(len(state.dmem.data))
    return state


def random_program(rng: random.Random, max_len: int = 256) -> list[Instruction]:
    """A structured random program: plausible data addresses, branch and
    jump targets inside the program, ecall as the final instruction."""
    n = rng.randrange(8, max_len - 4)
    base = rng.randrange(0, 512) * 4  # x1: data pointer kept in range
    prologue = [
        Instruction(Mnemonic.ADDI, rd=1, rs1=0, imm=base),
        Instruction(Mnemonic.AUIPC, rd=31, imm=0),  # x31 = 4: jalr anchor
    ]
    body: list[Instruction] = []
    total = len(prologue) + n + 1  # + final ecall
    for i in range(n):
        here = len(prologue) + i
        kind = rng.random()
        rd = rng.choice([r for r in range(32) if r not in (1, 31)])
        rs1 = rng.randrange(32)
        rs2 = rng.randrange(32)
        if kind < 0.45:
            body.append(random_instruction(rng, rng.choice([
                Mnemonic.ADD, Mnemonic.SUB, Mnemonic.ADDI, Mnemonic.AND, Mnemonic.OR,
                Mnemonic.XOR, Mnemonic.XORI, Mnemonic.SLL, Mnemonic.SRL, Mnemonic.SRA,
                Mnemonic.SLLI, Mnemonic.SRLI, Mnemonic.SRAI, Mnemonic.SLT, Mnemonic.SLTU,
                Mnemonic.SLTI, Mnemonic.SLTIU, Mnemonic.ANDI, Mnemonic.ORI,
                Mnemonic.LUI, Mnemonic.AUIPC, Mnemonic.FENCE,
            ])))
            last = body[-1]
            if last.rd in (1, 31):
                body[-1] = Instruction(last.mnemonic, rd=rd, rs1=last.rs1,
                                       rs2=last.rs2, imm=last.imm)
        elif kind < 0.7:
            m = rng.choice(LOADS + STORES)
            width = WIDTH_OF[m]
            offset = rng.randrange(0, 1024 // width) * width
            if m in LOADS:
                body.append(Instruction(m, rd=rd, rs1=1, imm=offset))
            else:
                body.append(Instruction(m, rs1=1, rs2=rs2, imm=offset))
        elif kind < 0.92:
            m = rng.choice(BRANCHES)
            target = rng.randrange(total)
            imm = (target - here) * 4
            body.append(Instruction(m, rs1=rs1, rs2=rs2, imm=imm & MASK32))
        elif kind < 0.97:
            target = rng.randrange(total)
            imm = (target - here) * 4
            body.append(Instruction(Mnemonic.JAL, rd=rd, imm=imm & MASK32))
        else:
            # x31 anchors to address 4; jump somewhere inside the program
            target = rng.randrange(total)
            body.append(Instruction(Mnemonic.JALR, rd=rd, rs1=31, imm=(target * 4 - 4) & MASK32))
    return prologue + body + [Instruction(Mnemonic.ECALL)]
