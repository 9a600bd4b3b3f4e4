"""The CPU step engines.

Two independent implementations of the same one-instruction contract:

* `step_structural` wires the datapath components together exactly as the
  hardware does — fetch, decode, control signals, register read, ALU,
  memory port, write-back, next-PC select.
* `step_functional` interprets instruction semantics directly, sharing
  nothing with the structural path beyond the decode tables. It exists as
  a differential oracle; `run_lockstep` drives both and reports the first
  divergence.

A step either completes, halts cleanly (ecall/ebreak, state otherwise
untouched), or faults (pc kept at the faulting instruction, no
architectural side effects). Every attempted step counts one cycle.
"""

import enum
from dataclasses import dataclass

from .alu import alu_exec
from .asm import disassemble
from .control import AluSrcA, AluSrcB, MemWidth, PcSrc, WbSrc, generate_signals, ControlSignals
from .datapath import (
    AccessOutOfRange,
    DataMemory,
    FetchOutOfRange,
    InstructionMemory,
    MisalignedAccess,
    MisalignedTarget,
    RegisterFile,
    pc_next,
)
from .isa import IllegalInstruction, Mnemonic, decode

WORD_MASK = 0xFFFFFFFF


class TrapKind(enum.Enum):
    ECALL = enum.auto()
    EBREAK = enum.auto()
    ILLEGAL_INSTRUCTION = enum.auto()
    MISALIGNED_ACCESS = enum.auto()
    MISALIGNED_TARGET = enum.auto()
    ACCESS_OUT_OF_RANGE = enum.auto()
    FETCH_OUT_OF_RANGE = enum.auto()


_TRAP_OF_EXC = {
    FetchOutOfRange: TrapKind.FETCH_OUT_OF_RANGE,
    MisalignedAccess: TrapKind.MISALIGNED_ACCESS,
    AccessOutOfRange: TrapKind.ACCESS_OUT_OF_RANGE,
    MisalignedTarget: TrapKind.MISALIGNED_TARGET,
}


class StatusKind(enum.Enum):
    RUNNING = enum.auto()
    HALTED = enum.auto()
    FAULT = enum.auto()


@dataclass(frozen=True)
class Status:
    kind: StatusKind
    trap: TrapKind | None = None

    def __str__(self):
        if self.kind is StatusKind.RUNNING:
            return "RUNNING"
        return f"{self.kind.name}({self.trap.name})"


RUNNING = Status(StatusKind.RUNNING)


class MachineState:
    """Complete architectural state of one simulated CPU."""

    __slots__ = ("pc", "rf", "imem", "dmem", "status", "cycle_count")

    def __init__(self, imem: InstructionMemory, dmem: DataMemory | None = None, pc: int = 0):
        if pc % 4:
            raise ValueError(f"pc 0x{pc:x} is not word-aligned")
        self.pc = pc & WORD_MASK
        self.rf = RegisterFile()
        self.imem = imem
        self.dmem = dmem if dmem is not None else DataMemory()
        self.status = RUNNING
        self.cycle_count = 0

    def clone(self) -> "MachineState":
        # imem is immutable and safely shared
        st = MachineState.__new__(MachineState)
        st.pc = self.pc
        st.rf = self.rf.copy()
        st.imem = self.imem
        st.dmem = self.dmem.copy()
        st.status = self.status
        st.cycle_count = self.cycle_count
        return st

    def snapshot(self):
        """Hashable view of everything observable, for state comparison."""
        return (
            self.pc,
            tuple(self.rf.regs),
            bytes(self.dmem.data),
            self.dmem.output_latch,
            self.status,
            self.cycle_count,
        )


@dataclass
class TraceRecord:
    """What one structural step did; `line()` is the stable text form."""

    cycle: int
    pc: int
    raw: int | None = None
    disasm: str = "-"
    signals: ControlSignals | None = None
    reg_write: tuple[int, int] | None = None       # (index, value)
    mem_write: tuple[int, MemWidth, int] | None = None  # (addr, width, value)
    mem_read: tuple[int, MemWidth, int] | None = None
    status_after: Status = RUNNING

    def line(self) -> str:
        raw = f"{self.raw:08x}" if self.raw is not None else "-" * 8
        tokens = []
        if self.reg_write is not None:
            tokens.append(f"x{self.reg_write[0]}={self.reg_write[1]:08x}")
        if self.mem_write is not None:
            tokens.append(f"mem[{self.mem_write[0]:08x}]={self.mem_write[2]:08x}")
        if self.mem_read is not None:
            tokens.append(f"mem[{self.mem_read[0]:08x}]->{self.mem_read[2]:08x}")
        if self.status_after.kind is not StatusKind.RUNNING:
            tokens.append(str(self.status_after))
        return "\t".join(
            [str(self.cycle), f"{self.pc:08x}", raw, self.disasm, " ".join(tokens) or "-"])


def _fault(state: MachineState, kind: TrapKind) -> None:
    state.status = Status(StatusKind.FAULT, kind)
    state.cycle_count += 1


def step_structural(state: MachineState, record: TraceRecord | None = None) -> None:
    """Advance one instruction through the component-wired datapath."""
    if state.status.kind is not StatusKind.RUNNING:
        return
    pc = state.pc
    try:
        raw = state.imem.fetch(pc)
    except FetchOutOfRange:
        _fault(state, TrapKind.FETCH_OUT_OF_RANGE)
        return
    if record is not None:
        record.raw = raw
        record.disasm = disassemble(raw, pc)
    try:
        inst = decode(raw)
    except IllegalInstruction:
        _fault(state, TrapKind.ILLEGAL_INSTRUCTION)
        return
    sig = generate_signals(inst)
    if record is not None:
        record.signals = sig
    if sig.halt:
        trap = TrapKind.ECALL if inst.mnemonic is Mnemonic.ECALL else TrapKind.EBREAK
        state.status = Status(StatusKind.HALTED, trap)
        state.cycle_count += 1
        return

    rd1, rd2 = state.rf.read(inst.rs1, inst.rs2)
    if sig.alu_src_a is AluSrcA.REG:
        a = rd1
    elif sig.alu_src_a is AluSrcA.PC:
        a = pc
    else:
        a = 0
    b = rd2 if sig.alu_src_b is AluSrcB.REG else inst.imm
    alu = alu_exec(sig.alu_op, a, b)

    mem_value = 0
    try:
        if sig.mem_read:
            mem_value = state.dmem.access(
                alu.value, width=sig.mem_width, unsigned=sig.mem_unsigned, read=True)
            if record is not None:
                record.mem_read = (alu.value, sig.mem_width, mem_value)
        elif sig.mem_write:
            state.dmem.access(alu.value, wd=rd2, width=sig.mem_width, write=True)
            if record is not None:
                record.mem_write = (alu.value, sig.mem_width, rd2)
        next_pc = pc_next(pc, sig, alu, inst.imm, rd1)
    except (MisalignedAccess, AccessOutOfRange, MisalignedTarget) as exc:
        if record is not None:
            record.mem_read = record.mem_write = None
        _fault(state, _TRAP_OF_EXC[type(exc)])
        return

    if sig.reg_write:
        if sig.wb_src is WbSrc.ALU:
            wb = alu.value
        elif sig.wb_src is WbSrc.MEM:
            wb = mem_value
        elif sig.wb_src is WbSrc.PC_PLUS_4:
            wb = (pc + 4) & WORD_MASK
        else:  # IMM_U
            wb = inst.imm
        state.rf.write(inst.rd, wb, we=True)
        if record is not None and inst.rd != 0:
            record.reg_write = (inst.rd, wb & WORD_MASK)

    state.pc = next_pc
    state.cycle_count += 1


def trace_step(state: MachineState) -> TraceRecord:
    """Record what the next structural step does, then advance."""
    if state.status.kind is not StatusKind.RUNNING:
        raise ValueError("cannot trace: machine is not RUNNING")
    record = TraceRecord(cycle=state.cycle_count, pc=state.pc)
    step_structural(state, record)
    record.status_after = state.status
    return record


def step_functional(state: MachineState) -> None:
    """Reference interpreter: same observable contract as step_structural,
    implemented straight from instruction semantics with no control
    signals and no datapath helpers."""
    if state.status.kind is not StatusKind.RUNNING:
        return
    pc = state.pc
    imem = state.imem

    off = pc - imem.base
    if pc % 4 or off < 0 or off >= 4 * len(imem.words):
        _fault(state, TrapKind.FETCH_OUT_OF_RANGE)
        return
    raw = imem.words[off >> 2]
    try:
        inst = decode(raw)
    except IllegalInstruction:
        _fault(state, TrapKind.ILLEGAL_INSTRUCTION)
        return

    m = inst.mnemonic
    regs = state.rf.regs
    v1 = regs[inst.rs1]
    v2 = regs[inst.rs2]
    imm = inst.imm

    def sgn(v):
        return v - 0x100000000 if v & 0x80000000 else v

    next_pc = (pc + 4) & WORD_MASK
    rd_value = None

    if m is Mnemonic.ADD:
        rd_value = (v1 + v2) & WORD_MASK
    elif m is Mnemonic.ADDI:
        rd_value = (v1 + imm) & WORD_MASK
    elif m is Mnemonic.SUB:
        rd_value = (v1 - v2) & WORD_MASK
    elif m is Mnemonic.AND:
        rd_value = v1 & v2
    elif m is Mnemonic.ANDI:
        rd_value = v1 & imm
    elif m is Mnemonic.OR:
        rd_value = v1 | v2
    elif m is Mnemonic.ORI:
        rd_value = v1 | imm
    elif m is Mnemonic.XOR:
        rd_value = v1 ^ v2
    elif m is Mnemonic.XORI:
        rd_value = v1 ^ imm
    elif m is Mnemonic.SLL:
        rd_value = (v1 << (v2 & 31)) & WORD_MASK
    elif m is Mnemonic.SLLI:
        rd_value = (v1 << imm) & WORD_MASK
    elif m is Mnemonic.SRL:
        rd_value = v1 >> (v2 & 31)
    elif m is Mnemonic.SRLI:
        rd_value = v1 >> imm
    elif m is Mnemonic.SRA:
        rd_value = (sgn(v1) >> (v2 & 31)) & WORD_MASK
    elif m is Mnemonic.SRAI:
        rd_value = (sgn(v1) >> imm) & WORD_MASK
    elif m is Mnemonic.SLT:
        rd_value = int(sgn(v1) < sgn(v2))
    elif m is Mnemonic.SLTI:
        rd_value = int(sgn(v1) < sgn(imm))
    elif m is Mnemonic.SLTU:
        rd_value = int(v1 < v2)
    elif m is Mnemonic.SLTIU:
        rd_value = int(v1 < imm)
    elif m is Mnemonic.LUI:
        rd_value = imm
    elif m is Mnemonic.AUIPC:
        rd_value = (pc + imm) & WORD_MASK
    elif m in (Mnemonic.BEQ, Mnemonic.BNE, Mnemonic.BLT, Mnemonic.BGE,
               Mnemonic.BLTU, Mnemonic.BGEU):
        if m is Mnemonic.BEQ:
            taken = v1 == v2
        elif m is Mnemonic.BNE:
            taken = v1 != v2
        elif m is Mnemonic.BLT:
            taken = sgn(v1) < sgn(v2)
        elif m is Mnemonic.BGE:
            taken = sgn(v1) >= sgn(v2)
        elif m is Mnemonic.BLTU:
            taken = v1 < v2
        else:
            taken = v1 >= v2
        if taken:
            next_pc = (pc + imm) & WORD_MASK
            if next_pc % 4:
                _fault(state, TrapKind.MISALIGNED_TARGET)
                return
    elif m is Mnemonic.JAL:
        next_pc = (pc + imm) & WORD_MASK
        if next_pc % 4:
            _fault(state, TrapKind.MISALIGNED_TARGET)
            return
        rd_value = (pc + 4) & WORD_MASK
    elif m is Mnemonic.JALR:
        next_pc = (v1 + imm) & WORD_MASK & ~1
        if next_pc % 4:
            _fault(state, TrapKind.MISALIGNED_TARGET)
            return
        rd_value = (pc + 4) & WORD_MASK
    elif m in (Mnemonic.LB, Mnemonic.LBU, Mnemonic.LH, Mnemonic.LHU, Mnemonic.LW):
        nbytes = {Mnemonic.LB: 1, Mnemonic.LBU: 1, Mnemonic.LH: 2,
                  Mnemonic.LHU: 2, Mnemonic.LW: 4}[m]
        addr = (v1 + imm) & WORD_MASK
        dmem = state.dmem
        if addr % nbytes:
            _fault(state, TrapKind.MISALIGNED_ACCESS)
            return
        if addr + nbytes <= dmem.size_bytes:
            signed = m in (Mnemonic.LB, Mnemonic.LH)
            rd_value = int.from_bytes(
                dmem.data[addr:addr + nbytes], "little", signed=signed) & WORD_MASK
        elif addr == dmem.display_addr and nbytes == 4:
            rd_value = dmem.output_latch
        else:
            _fault(state, TrapKind.ACCESS_OUT_OF_RANGE)
            return
    elif m in (Mnemonic.SB, Mnemonic.SH, Mnemonic.SW):
        nbytes = {Mnemonic.SB: 1, Mnemonic.SH: 2, Mnemonic.SW: 4}[m]
        addr = (v1 + imm) & WORD_MASK
        dmem = state.dmem
        if addr % nbytes:
            _fault(state, TrapKind.MISALIGNED_ACCESS)
            return
        in_backing = addr + nbytes <= dmem.size_bytes
        at_display = addr == dmem.display_addr and nbytes == 4
        if not in_backing and not at_display:
            _fault(state, TrapKind.ACCESS_OUT_OF_RANGE)
            return
        if in_backing:
            dmem.data[addr:addr + nbytes] = (v2 & ((1 << (8 * nbytes)) - 1)).to_bytes(
                nbytes, "little")
        if at_display:
            dmem.output_latch = v2
    elif m is Mnemonic.FENCE:
        pass  # no-op
    else:  # ecall / ebreak
        trap = TrapKind.ECALL if m is Mnemonic.ECALL else TrapKind.EBREAK
        state.status = Status(StatusKind.HALTED, trap)
        state.cycle_count += 1
        return

    if rd_value is not None and inst.rd != 0:
        regs[inst.rd] = rd_value
    state.pc = next_pc
    state.cycle_count += 1


class StopReason(enum.Enum):
    HALTED = enum.auto()
    FAULT = enum.auto()
    BUDGET_EXHAUSTED = enum.auto()


def stop_reason(state: MachineState) -> StopReason:
    """How a run over this state ended (BUDGET_EXHAUSTED if still running)."""
    if state.status.kind is StatusKind.HALTED:
        return StopReason.HALTED
    if state.status.kind is StatusKind.FAULT:
        return StopReason.FAULT
    return StopReason.BUDGET_EXHAUSTED


def run(state: MachineState, max_cycles: int = 1_000_000, step=step_structural) -> StopReason:
    """Step until the machine stops or `max_cycles` steps have happened."""
    for _ in range(max_cycles):
        if state.status.kind is not StatusKind.RUNNING:
            break
        step(state)
    return stop_reason(state)


def diff_states(a: MachineState, b: MachineState) -> str | None:
    """Describe the first observable difference between two states."""
    if a.pc != b.pc:
        return f"pc: {a.pc:08x} != {b.pc:08x}"
    if a.status != b.status:
        return f"status: {a.status} != {b.status}"
    if a.cycle_count != b.cycle_count:
        return f"cycle_count: {a.cycle_count} != {b.cycle_count}"
    for i in range(32):
        if a.rf.regs[i] != b.rf.regs[i]:
            return f"x{i}: {a.rf.regs[i]:08x} != {b.rf.regs[i]:08x}"
    if a.dmem.output_latch != b.dmem.output_latch:
        return f"output_latch: {a.dmem.output_latch:08x} != {b.dmem.output_latch:08x}"
    if a.dmem.data != b.dmem.data:
        for i, (x, y) in enumerate(zip(a.dmem.data, b.dmem.data)):
            if x != y:
                return f"dmem[{i:08x}]: {x:02x} != {y:02x}"
    return None


@dataclass
class LockstepResult:
    structural: MachineState
    functional: MachineState
    stop: StopReason
    divergence: str | None = None
    divergence_cycle: int | None = None


def run_lockstep(initial: MachineState, max_cycles: int = 1_000_000) -> LockstepResult:
    """Run both engines from a shared initial state, comparing after every
    step; stops at the first divergence."""
    a = initial.clone()
    b = initial.clone()
    for _ in range(max_cycles):
        if a.status.kind is not StatusKind.RUNNING:
            break
        step_structural(a)
        step_functional(b)
        delta = diff_states(a, b)
        if delta is not None:
            return LockstepResult(a, b, stop_reason(a), delta, a.cycle_count)
    return LockstepResult(a, b, stop_reason(a))
