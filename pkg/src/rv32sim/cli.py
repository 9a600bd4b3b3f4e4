"""Command-line front end.

Subcommands: `asm` (assemble to an image file), `run` (execute to
halt/fault/budget and report), `step` (trace N cycles), `disasm` (listing),
`controls` (emit the control table as CSV).

Exit codes: 0 ok, 1 user-input error, 2 I/O error, 3 engine divergence,
4 cycle budget exhausted.
"""

import argparse
import sys
from dataclasses import dataclass

from . import asm, image
from .control import control_table_csv
from .core import (
    MachineState,
    StatusKind,
    StopReason,
    run,
    run_lockstep,
    step_functional,
    step_structural,
    stop_reason,
    trace_step,
)
from .datapath import DataMemory, InstructionMemory
from .display import render_output

EXIT_OK = 0
EXIT_USER = 1
EXIT_IO = 2
EXIT_DIVERGENCE = 3
EXIT_BUDGET = 4


class _Parser(argparse.ArgumentParser):
    # bad usage is a user-input error (exit 1), not an I/O error
    def error(self, message):
        self.print_usage(sys.stderr)
        raise SystemExit(self.exit_code_on_error(message))

    def exit_code_on_error(self, message):
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        return EXIT_USER


@dataclass
class RunConfig:
    imem_image: str
    dmem_image: str | None = None
    max_cycles: int = 1_000_000
    engine: str = "structural"
    trace: bool = False
    imem_size: int = 4096
    dmem_size: int = 4096
    display_addr: int = 0xFFC
    digit_count: int = 4

    def validate(self) -> None:
        for name, size in (("imem-size", self.imem_size), ("dmem-size", self.dmem_size)):
            if size <= 0 or size & (size - 1):
                raise ValueError(f"--{name} must be a power of two, got {size}")
        if self.display_addr % 4:
            raise ValueError(f"--display-addr 0x{self.display_addr:x} is not word-aligned")
        if self.digit_count < 1:
            raise ValueError(f"--digits must be >= 1, got {self.digit_count}")
        if self.max_cycles < 1:
            raise ValueError(f"--max-cycles must be >= 1, got {self.max_cycles}")


def _read_image(path: str) -> image.MemImage:
    with open(path, "rb") as fh:
        data = fh.read()
    if data.startswith(image.HEADER.encode()):
        return image.read_v2raw(data.decode("utf-8"))
    return image.read_bin(data)


def _build_machine(cfg: RunConfig) -> MachineState:
    imem = InstructionMemory.from_image(_read_image(cfg.imem_image), size_bytes=cfg.imem_size)
    dmem = DataMemory(cfg.dmem_size, cfg.display_addr)
    if cfg.dmem_image:
        dmem.load_image(_read_image(cfg.dmem_image))
    return MachineState(imem, dmem)


def _print_report(state: MachineState, stop: StopReason, digit_count: int) -> None:
    if stop is StopReason.BUDGET_EXHAUSTED:
        print("status CYCLE_BUDGET_EXHAUSTED")
    else:
        print(f"status {state.status}")
    print(f"cycles {state.cycle_count}")
    regs = state.rf.regs
    for row in range(0, 32, 4):
        print(" ".join(f"x{i:02}={regs[i]:08x}" for i in range(row, row + 4)))
    print(f"latch {state.dmem.output_latch:08x}")
    print(render_output(state.dmem.output_latch, digit_count))


def _config_from(args) -> RunConfig:
    cfg = RunConfig(
        imem_image=args.image,
        dmem_image=args.dmem_image,
        max_cycles=args.max_cycles,
        engine=getattr(args, "engine", "structural"),
        trace=getattr(args, "trace", False),
        imem_size=args.imem_size,
        dmem_size=args.dmem_size,
        display_addr=args.display_addr,
        digit_count=args.digits,
    )
    cfg.validate()
    return cfg


def cmd_asm(args) -> int:
    try:
        with open(args.input, "r", encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    try:
        img = asm.assemble(text, origin=args.origin)
    except asm.AsmError as exc:
        print(f"{args.input}:{exc.line}:{exc.column}: error: {exc.message}", file=sys.stderr)
        return EXIT_USER
    try:
        if args.format == "bin":
            with open(args.output, "wb") as fh:
                fh.write(image.write_bin(img))
        else:
            with open(args.output, "w", encoding="utf-8") as fh:
                fh.write(image.write_v2raw(img))
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    return EXIT_OK


def cmd_run(args) -> int:
    try:
        cfg = _config_from(args)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USER
    try:
        state = _build_machine(cfg)
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (image.ImageError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USER

    if cfg.engine == "differential":
        result = run_lockstep(state, cfg.max_cycles)
        if result.divergence is not None:
            print(f"DIVERGENCE at cycle {result.divergence_cycle}: {result.divergence}")
            _print_report(result.structural, result.stop, cfg.digit_count)
            return EXIT_DIVERGENCE
        final, stop = result.structural, result.stop
    elif cfg.trace:
        final = state
        for _ in range(cfg.max_cycles):
            if final.status.kind is not StatusKind.RUNNING:
                break
            print(trace_step(final).line())
        stop = stop_reason(final)
    else:
        step = step_functional if cfg.engine == "functional" else step_structural
        final = state
        stop = run(final, cfg.max_cycles, step=step)

    _print_report(final, stop, cfg.digit_count)
    if args.dump_dmem:
        sys.stdout.write(final.dmem.dump())
    return EXIT_BUDGET if stop is StopReason.BUDGET_EXHAUSTED else EXIT_OK


def cmd_step(args) -> int:
    try:
        cfg = _config_from(args)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USER
    try:
        state = _build_machine(cfg)
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (image.ImageError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USER
    for _ in range(args.count):
        if state.status.kind is not StatusKind.RUNNING:
            break
        print(trace_step(state).line())
    return EXIT_OK


def cmd_disasm(args) -> int:
    try:
        img = _read_image(args.image)
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except image.ImageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USER
    for i, w in enumerate(img.words):
        addr = img.origin + 4 * i
        print(f"{addr:08x}: {w:08x}  {asm.disassemble(w, addr)}")
    return EXIT_OK


def cmd_controls(args) -> int:
    text = control_table_csv()
    if args.output and args.output != "-":
        try:
            with open(args.output, "w", encoding="utf-8") as fh:
                fh.write(text)
        except OSError as exc:
            print(f"error: {exc}", file=sys.stderr)
            return EXIT_IO
    else:
        sys.stdout.write(text)
    return EXIT_OK


def _add_machine_options(p) -> None:
    p.add_argument("--dmem-image", help="preload data memory from an image file")
    p.add_argument("--max-cycles", type=int, default=1_000_000)
    p.add_argument("--imem-size", type=int, default=4096, help="instruction memory bytes (power of two)")
    p.add_argument("--dmem-size", type=int, default=4096, help="data memory bytes (power of two)")
    p.add_argument("--display-addr", type=lambda s: int(s, 0), default=0xFFC,
                   help="word address of the display latch")
    p.add_argument("--digits", type=int, default=4, help="seven-segment digit count")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="rv32sim", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("asm", help="assemble a source file to a memory image")
    p.add_argument("input")
    p.add_argument("-o", "--output", required=True)
    p.add_argument("--format", choices=("v2raw", "bin"), default="v2raw")
    p.add_argument("--origin", type=lambda s: int(s, 0), default=0)
    p.set_defaults(func=cmd_asm)

    p = sub.add_parser("run", help="run an image to halt/fault/budget and report")
    p.add_argument("image")
    p.add_argument("--engine", choices=("structural", "functional", "differential"),
                   default="structural")
    p.add_argument("--trace", action="store_true", help="print one trace line per cycle")
    p.add_argument("--dump-dmem", action="store_true", help="hex-dump data memory after the run")
    _add_machine_options(p)
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("step", help="execute N cycles, printing a trace line each")
    p.add_argument("image")
    p.add_argument("-n", "--count", type=int, default=1)
    _add_machine_options(p)
    p.set_defaults(func=cmd_step)

    p = sub.add_parser("disasm", help="disassemble a memory image")
    p.add_argument("image")
    p.set_defaults(func=cmd_disasm)

    p = sub.add_parser("controls", help="emit the per-mnemonic control table")
    p.add_argument("--table", action="store_true", required=True,
                   help="write the table as CSV")
    p.add_argument("-o", "--output", default="-")
    p.set_defaults(func=cmd_controls)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_USER
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
