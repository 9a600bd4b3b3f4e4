"""Single-cycle RV32I simulator toolkit.

A structural datapath engine and an independent functional interpreter
verified against each other, a two-pass assembler/disassembler,
Logisim-compatible memory-image I/O, and a binary-to-BCD seven-segment
display pipeline.
"""

from .asm import assemble, disassemble
from .core import (
    LockstepResult,
    MachineState,
    StatusKind,
    StopReason,
    TrapKind,
    run,
    run_lockstep,
    step_functional,
    step_structural,
    trace_step,
)
from .datapath import DataMemory, InstructionMemory, RegisterFile
from .image import MemImage, read_bin, read_v2raw, write_bin, write_v2raw
from .isa import Format, Instruction, Mnemonic, decode, encode, format_of

__version__ = "0.1.0"

__all__ = [
    "assemble",
    "disassemble",
    "LockstepResult",
    "MachineState",
    "StatusKind",
    "StopReason",
    "TrapKind",
    "run",
    "run_lockstep",
    "step_functional",
    "step_structural",
    "trace_step",
    "DataMemory",
    "InstructionMemory",
    "RegisterFile",
    "MemImage",
    "read_bin",
    "read_v2raw",
    "write_bin",
    "write_v2raw",
    "Format",
    "Instruction",
    "Mnemonic",
    "decode",
    "encode",
    "format_of",
    "__version__",
]
