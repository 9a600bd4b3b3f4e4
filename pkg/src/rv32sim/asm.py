"""Two-pass assembler and disassembler for the supported RV32I subset.

Syntax
------
* one instruction per line, optional leading `label:`
* `#` and `//` start comments
* registers are x0..x31 only
* loads/stores use `imm(rs1)`; jalr is the three-operand form `jalr rd, rs1, imm`
* branch and jal targets are a label, a pc-relative `.+N` / `.-N`, or a
  bare integer taken as a pc-relative byte offset
* `lui`/`auipc` take the 20-bit upper-immediate field value (0..0xfffff)
* directives: `.org ADDR` (forward only, word-aligned) and `.word V, ...`
* `nop` is the only pseudo-instruction (addi x0, x0, 0)

Pass 1 assigns addresses and collects labels, pass 2 encodes.
"""

import re
from dataclasses import dataclass, field

from . import isa
from .bits import to_signed
from .image import MemImage
from .isa import Format, Instruction, Mnemonic


class AsmError(Exception):
    """An assembly diagnostic carrying a source position (1-based)."""

    def __init__(self, message: str, line: int = 0, column: int = 0):
        super().__init__(f"line {line}, col {column}: {message}")
        self.message = message
        self.line = line
        self.column = column


class UnknownMnemonic(AsmError):
    pass


class UndefinedLabel(AsmError):
    pass


class DuplicateLabel(AsmError):
    pass


class ImmediateRange(AsmError):
    pass


class BranchOutOfRange(AsmError):
    pass


_MNEMONICS = {m.value: m for m in Mnemonic}

_LABEL_RE = re.compile(r"^\s*([A-Za-z_][A-Za-z0-9_]*)\s*:")
_REG_RE = re.compile(r"^x([0-9]+)$")
_MEM_RE = re.compile(r"^(\S+?)\s*\(\s*(x[0-9]+)\s*\)$")
_REL_RE = re.compile(r"^\.\s*([+-])\s*(\S+)$")
_DEC_RE = re.compile(r"^[+-]?[0-9]+$")


@dataclass
class SourceLine:
    """One parsed statement: label and/or mnemonic/directive with operands."""

    number: int
    label: str | None = None
    mnemonic: str | None = None
    operands: list[str] = field(default_factory=list)
    columns: list[int] = field(default_factory=list)  # 1-based column per operand
    mnemonic_column: int = 0
    address: int = 0


def _strip_comment(text: str) -> str:
    for marker in ("#", "//"):
        pos = text.find(marker)
        if pos >= 0:
            text = text[:pos]
    return text


def parse_line(text: str, number: int) -> SourceLine:
    """Split one source line into label, mnemonic and operand tokens."""
    line = SourceLine(number)
    body = _strip_comment(text)
    m = _LABEL_RE.match(body)
    offset = 0
    if m:
        line.label = m.group(1)
        offset = m.end()
        body = body[m.end():]
    stripped = body.strip()
    if not stripped:
        return line
    mstart = offset + body.index(stripped[0])
    parts = stripped.split(None, 1)
    line.mnemonic = parts[0].lower()
    line.mnemonic_column = mstart + 1
    if len(parts) > 1:
        rest = parts[1]
        rest_start = mstart + stripped.index(rest, len(parts[0]))
        pos = 0
        for chunk in rest.split(","):
            operand = chunk.strip()
            if not operand:
                raise AsmError("empty operand", number, rest_start + pos + 1)
            line.operands.append(operand)
            line.columns.append(rest_start + pos + chunk.index(operand) + 1)
            pos += len(chunk) + 1
    return line


def parse_program(text: str) -> list[SourceLine]:
    lines = []
    for number, raw in enumerate(text.splitlines(), start=1):
        line = parse_line(raw, number)
        if line.label or line.mnemonic:
            lines.append(line)
    return lines


def _parse_int(token: str, line: int, column: int) -> int:
    tok = token.strip()
    try:
        if _DEC_RE.match(tok):
            return int(tok, 10)
        return int(tok, 0)
    except ValueError:
        raise AsmError(f"bad integer {token!r}", line, column) from None


def _parse_reg(token: str, line: int, column: int) -> int:
    m = _REG_RE.match(token)
    if not m or int(m.group(1)) > 31:
        raise AsmError(f"bad register {token!r} (expected x0..x31)", line, column)
    return int(m.group(1))


def _to_pattern(value: int, line: int, column: int) -> int:
    """32-bit two's-complement pattern for a parsed immediate."""
    if not -0x80000000 <= value <= 0xFFFFFFFF:
        raise ImmediateRange(f"immediate {value} exceeds 32 bits", line, column)
    return value & 0xFFFFFFFF


def _words_for(line: SourceLine) -> int:
    """Number of words this statement will emit (0 for .org)."""
    if line.mnemonic == ".word":
        if not line.operands:
            raise AsmError(".word needs at least one value", line.number, line.mnemonic_column)
        return len(line.operands)
    if line.mnemonic == ".org":
        return 0
    return 1


class _Target:
    """A branch/jump operand: label or pc-relative offset."""

    def __init__(self, token: str, line: int, column: int):
        self.token = token
        self.line = line
        self.column = column

    def offset(self, here: int, symbols: dict[str, int]) -> int:
        tok = self.token
        rel = _REL_RE.match(tok)
        if rel:
            return (1 if rel.group(1) == "+" else -1) * _parse_int(rel.group(2), self.line, self.column)
        if _DEC_RE.match(tok) or tok.lower().startswith(("0x", "-0x", "+0x")):
            return _parse_int(tok, self.line, self.column)
        if tok not in symbols:
            raise UndefinedLabel(f"undefined label {tok!r}", self.line, self.column)
        return symbols[tok] - here


def _build_instruction(line: SourceLine, symbols: dict[str, int]) -> Instruction:
    name = line.mnemonic
    if name == "nop":
        if line.operands:
            raise AsmError("nop takes no operands", line.number, line.mnemonic_column)
        return Instruction(Mnemonic.ADDI)
    mnemonic = _MNEMONICS.get(name)
    if mnemonic is None:
        raise UnknownMnemonic(f"unknown mnemonic {name!r}", line.number, line.mnemonic_column)
    fmt = isa.format_of(mnemonic)
    ops, cols, ln = line.operands, line.columns, line.number

    def need(n: int):
        if len(ops) != n:
            raise AsmError(
                f"{name} expects {n} operand{'s' if n != 1 else ''}, got {len(ops)}",
                ln, line.mnemonic_column)

    if mnemonic in (Mnemonic.ECALL, Mnemonic.EBREAK, Mnemonic.FENCE):
        need(0)
        if mnemonic is Mnemonic.FENCE:
            return Instruction(mnemonic, imm=0x0FF)  # full-fence ordering bits
        return Instruction(mnemonic, imm=1 if mnemonic is Mnemonic.EBREAK else 0)

    if fmt is Format.R:
        need(3)
        return Instruction(
            mnemonic,
            rd=_parse_reg(ops[0], ln, cols[0]),
            rs1=_parse_reg(ops[1], ln, cols[1]),
            rs2=_parse_reg(ops[2], ln, cols[2]),
        )

    if fmt is Format.I:
        if mnemonic in (Mnemonic.LB, Mnemonic.LBU, Mnemonic.LH, Mnemonic.LHU, Mnemonic.LW):
            need(2)
            mem = _MEM_RE.match(ops[1])
            if not mem:
                raise AsmError(f"expected imm(rs1), got {ops[1]!r}", ln, cols[1])
            return Instruction(
                mnemonic,
                rd=_parse_reg(ops[0], ln, cols[0]),
                rs1=_parse_reg(mem.group(2), ln, cols[1]),
                imm=_to_pattern(_parse_int(mem.group(1), ln, cols[1]), ln, cols[1]),
            )
        need(3)
        imm = _parse_int(ops[2], ln, cols[2])
        if mnemonic in isa.SHIFT_IMMEDIATES:
            if not 0 <= imm <= 31:
                raise ImmediateRange(f"shift amount {imm} not in 0..31", ln, cols[2])
            return Instruction(mnemonic, rd=_parse_reg(ops[0], ln, cols[0]),
                               rs1=_parse_reg(ops[1], ln, cols[1]), imm=imm)
        return Instruction(
            mnemonic,
            rd=_parse_reg(ops[0], ln, cols[0]),
            rs1=_parse_reg(ops[1], ln, cols[1]),
            imm=_to_pattern(imm, ln, cols[2]),
        )

    if fmt is Format.S:
        need(2)
        mem = _MEM_RE.match(ops[1])
        if not mem:
            raise AsmError(f"expected imm(rs1), got {ops[1]!r}", ln, cols[1])
        return Instruction(
            mnemonic,
            rs2=_parse_reg(ops[0], ln, cols[0]),
            rs1=_parse_reg(mem.group(2), ln, cols[1]),
            imm=_to_pattern(_parse_int(mem.group(1), ln, cols[1]), ln, cols[1]),
        )

    if fmt is Format.B:
        need(3)
        off = _Target(ops[2], ln, cols[2]).offset(line.address, symbols)
        if off % 2:
            raise BranchOutOfRange(f"branch offset {off} is odd", ln, cols[2])
        if not -4096 <= off <= 4094:
            raise BranchOutOfRange(f"branch offset {off} not in -4096..4094", ln, cols[2])
        return Instruction(
            mnemonic,
            rs1=_parse_reg(ops[0], ln, cols[0]),
            rs2=_parse_reg(ops[1], ln, cols[1]),
            imm=off & 0xFFFFFFFF,
        )

    if fmt is Format.U:
        need(2)
        hi = _parse_int(ops[1], ln, cols[1])
        if not 0 <= hi <= 0xFFFFF:
            raise ImmediateRange(f"upper immediate {hi} not in 0..0xfffff", ln, cols[1])
        return Instruction(mnemonic, rd=_parse_reg(ops[0], ln, cols[0]), imm=hi << 12)

    # J (jal)
    need(2)
    off = _Target(ops[1], ln, cols[1]).offset(line.address, symbols)
    if off % 2:
        raise BranchOutOfRange(f"jump offset {off} is odd", ln, cols[1])
    if not -1048576 <= off <= 1048574:
        raise BranchOutOfRange(f"jump offset {off} not in -1048576..1048574", ln, cols[1])
    return Instruction(mnemonic, rd=_parse_reg(ops[0], ln, cols[0]), imm=off & 0xFFFFFFFF)


def assemble(text: str, origin: int = 0) -> MemImage:
    """Assemble source text into a memory image starting at `origin`."""
    if origin % 4:
        raise ValueError(f"origin 0x{origin:x} is not word-aligned")
    lines = parse_program(text)

    # pass 1: addresses and labels
    symbols: dict[str, int] = {}
    location = origin
    for line in lines:
        if line.label is not None:
            if line.label in symbols:
                raise DuplicateLabel(f"duplicate label {line.label!r}", line.number, 1)
            symbols[line.label] = location
        if line.mnemonic is None:
            continue
        if line.mnemonic == ".org":
            if len(line.operands) != 1:
                raise AsmError(".org expects one address", line.number, line.mnemonic_column)
            addr = _parse_int(line.operands[0], line.number, line.columns[0])
            if addr % 4:
                raise AsmError(f".org 0x{addr:x} is not word-aligned", line.number, line.columns[0])
            if addr < location:
                raise AsmError(f".org 0x{addr:x} is behind 0x{location:x}", line.number, line.columns[0])
            location = addr
            if line.label is not None:
                symbols[line.label] = location
            continue
        line.address = location
        location += 4 * _words_for(line)

    # pass 2: encode
    words = [0] * ((location - origin) // 4)
    for line in lines:
        if line.mnemonic is None or line.mnemonic == ".org":
            continue
        index = (line.address - origin) // 4
        if line.mnemonic == ".word":
            for k, op in enumerate(line.operands):
                value = _parse_int(op, line.number, line.columns[k])
                if not -0x80000000 <= value <= 0xFFFFFFFF:
                    raise ImmediateRange(f".word value {op} exceeds 32 bits",
                                         line.number, line.columns[k])
                words[index + k] = value & 0xFFFFFFFF
            continue
        inst = _build_instruction(line, symbols)
        try:
            words[index] = isa.encode(inst)
        except isa.EncodeError as exc:
            kind = ImmediateRange if isinstance(exc, isa.ImmediateRange) else AsmError
            raise kind(str(exc), line.number, line.mnemonic_column) from None
    return MemImage(origin, words)


def disassemble(w: int, pc: int = 0) -> str:
    """Canonical text for one word; illegal words render as `.word 0x...`.

    Branch and jump offsets come out pc-relative (`.+N`), so the text is
    position-independent and `pc` is accepted only for interface symmetry
    with the encoders.
    """
    try:
        inst = isa.decode(w)
    except isa.IllegalInstruction:
        return f".word 0x{w:08x}"
    m = inst.mnemonic
    fmt = isa.format_of(m)
    if m is Mnemonic.FENCE:
        if inst.rd == 0 and inst.rs1 == 0 and inst.imm == 0x0FF:
            return "fence"
        return f".word 0x{w:08x}"  # non-canonical ordering bits
    if m in (Mnemonic.ECALL, Mnemonic.EBREAK):
        return m.value
    if fmt is Format.R:
        return f"{m.value} x{inst.rd}, x{inst.rs1}, x{inst.rs2}"
    if fmt is Format.I:
        if m in (Mnemonic.LB, Mnemonic.LBU, Mnemonic.LH, Mnemonic.LHU, Mnemonic.LW):
            return f"{m.value} x{inst.rd}, {inst.imm_signed}(x{inst.rs1})"
        if m in isa.SHIFT_IMMEDIATES:
            return f"{m.value} x{inst.rd}, x{inst.rs1}, {inst.imm}"
        return f"{m.value} x{inst.rd}, x{inst.rs1}, {inst.imm_signed}"
    if fmt is Format.S:
        return f"{m.value} x{inst.rs2}, {inst.imm_signed}(x{inst.rs1})"
    if fmt is Format.B:
        return f"{m.value} x{inst.rs1}, x{inst.rs2}, .{inst.imm_signed:+d}"
    if fmt is Format.U:
        return f"{m.value} x{inst.rd}, 0x{inst.imm >> 12:x}"
    return f"{m.value} x{inst.rd}, .{inst.imm_signed:+d}"  # jal


def disassemble_image(img: MemImage) -> str:
    """One assembly line per word; reassembles to the same words."""
    return "\n".join(disassemble(w, img.origin + 4 * i) for i, w in enumerate(img.words)) + "\n"
