"""Reader and writer for the four-file ASCII circuit description.

A bundle directory holds::

    qconfig.txt     width and named registers
    qinput.txt      decimal value of each input register
    qoperators.txt  operator matrices
    qopseq.txt      the operation sequence

Every file starts with ``<name> format version 1``. Whitespace around
punctuation is free, lines starting with ``comment:`` are skipped, and any
keyword may be shortened to a prefix of at least four characters.
"""

from __future__ import annotations

import re
import warnings
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import ParseError, RangeError
from .model import (
    MAX_ARITY,
    MAX_WIDTH,
    UNITARY_TOL,
    BasisState,
    Circuit,
    Operation,
    OperatorMatrix,
    Register,
    check_unitary,
)

QCONFIG = "qconfig.txt"
QINPUT = "qinput.txt"
QOPERATORS = "qoperators.txt"
QOPSEQ = "qopseq.txt"
FILENAMES = (QCONFIG, QINPUT, QOPERATORS, QOPSEQ)
FORMAT_VERSION = "1"
SIG_DIGITS = 10

ARITY_WORDS = ("unary", "binary", "ternary", "quaternary")


class ParseWarning(UserWarning):
    pass


@dataclass(frozen=True)
class CircuitBundle:
    circuit: Circuit
    input: BasisState
    source_paths: tuple | None = None

    def __post_init__(self):
        if self.input.width != self.circuit.width:
            raise RangeError(f"input width {self.input.width} != circuit width {self.circuit.width}")

    def __eq__(self, other):
        if not isinstance(other, CircuitBundle):
            return NotImplemented
        return self.circuit == other.circuit and self.input == other.input

    __hash__ = None


# ----------------------------------------------------------------------
# lexical helpers


def _kw(token: str, keyword: str) -> bool:
    return len(token) >= min(4, len(keyword)) and keyword.startswith(token)


_NUM = r"(?:\d+(?:\.\d*)?|\.\d+)(?:[eE][+-]?\d+)?"
_COMPLEX = re.compile(
    rf"\(\s*([+-]?)\s*({_NUM})\s*([+-])\s*i\s*\*\s*([+-]?)\s*({_NUM})\s*\)"
)
_VERSION = re.compile(r"^(\S+)\s+([A-Za-z]+)\s+([A-Za-z]+)\s+(\S+)$")
_KEYVAL = re.compile(r"^([A-Za-z_]\w*)\s*:\s*(.*)$")
_BLOCK = re.compile(r"^([A-Za-z]+)\s*#\s*:?\s*(\d+)\s*:?\s*(.*)$")
_BITARRAY = re.compile(r"^([A-Za-z]+)\s+([A-Za-z]+)\s*:\s*([A-Za-z_]\w*)\s*\[\s*(\d+)\s*\]\s*@\s*(\d+)$")
_BITREF = re.compile(r"^([A-Za-z_]\w*)\s*\[\s*(\d+)\s*\]$")
_OPLINE = re.compile(
    r"^([A-Za-z]+)\s*#\s*(\d+)\s*:\s*([A-Za-z]+)\s+([A-Za-z]+)\s+([A-Za-z]+)\s+(\S+)\s+([A-Za-z]+)\s+([A-Za-z]+)\s+(.+)$"
)


class _Lines:
    """Significant lines of one file, with 1-based line numbers."""

    def __init__(self, text: str, filename: str):
        self.filename = filename
        try:
            text.encode("ascii")
        except UnicodeEncodeError as exc:
            raise ParseError(f"non-ASCII character at offset {exc.start}", filename) from None
        self.items = []
        for n, raw in enumerate(text.splitlines(), start=1):
            line = raw.strip()
            if not line:
                continue
            m = re.match(r"([A-Za-z]+)\s*:", line)
            if m and _kw(m.group(1), "comment"):
                continue
            self.items.append((n, line))
        self.pos = 0
        self.last_line = len(text.splitlines())

    def next(self, what: str):
        if self.pos >= len(self.items):
            raise ParseError(f"unexpected end of file, expected {what}", self.filename, self.last_line)
        item = self.items[self.pos]
        self.pos += 1
        return item

    def peek(self):
        return self.items[self.pos] if self.pos < len(self.items) else None

    def done(self):
        return self.pos >= len(self.items)

    def error(self, msg, line):
        return ParseError(msg, self.filename, line)


def _version(lines: _Lines, expected: str):
    n, line = lines.next("format version line")
    m = _VERSION.match(line)
    if not m or m.group(1) != expected or not _kw(m.group(2), "format") or not _kw(m.group(3), "version"):
        raise lines.error(f"expected '{expected} format version {FORMAT_VERSION}', got {line!r}", n)
    if m.group(4) != FORMAT_VERSION:
        raise lines.error(f"unsupported format version {m.group(4)!r} (only {FORMAT_VERSION} is supported)", n)


def _count(lines: _Lines, keyword: str) -> int:
    n, line = lines.next(f"'{keyword}: N'")
    m = _KEYVAL.match(line)
    if not m or not _kw(m.group(1), keyword) or not re.fullmatch(r"\d+", m.group(2).strip()):
        raise lines.error(f"expected '{keyword}: N', got {line!r}", n)
    return int(m.group(2))


def parse_complex_row(text: str) -> list:
    """Parse a run of ``(RE + i*IM)`` literals; separators may be absent."""
    out = []
    pos = 0
    text = text.strip()
    while pos < len(text):
        m = _COMPLEX.match(text, pos)
        if not m:
            raise ValueError(f"bad complex literal at {text[pos:pos + 24]!r}")
        re_sign, re_mag, op, im_sign, im_mag = m.groups()
        re_v = float(re_mag) * (-1.0 if re_sign == "-" else 1.0)
        im_v = float(im_mag) * (-1.0 if im_sign == "-" else 1.0) * (-1.0 if op == "-" else 1.0)
        out.append(complex(re_v, im_v))
        pos = m.end()
        while pos < len(text) and text[pos] in " \t,":
            pos += 1
    return out


# ----------------------------------------------------------------------
# parsers


def parse_qconfig(text: str, filename: str = QCONFIG):
    lines = _Lines(text, filename)
    _version(lines, QCONFIG)
    n, line = lines.next("'bits: N'")
    m = _KEYVAL.match(line)
    if not m or not _kw(m.group(1), "bits") or not re.fullmatch(r"\d+", m.group(2).strip()):
        raise lines.error(f"expected 'bits: N', got {line!r}", n)
    width = int(m.group(2))
    if not 1 <= width <= MAX_WIDTH:
        raise lines.error(f"width {width} outside 1..{MAX_WIDTH}", n)
    registers = []
    used = 0
    while not lines.done():
        n, line = lines.next("register")
        m = _BITARRAY.match(line)
        if not m or not _kw(m.group(1), "named") or not _kw(m.group(2), "bitarray"):
            raise lines.error(f"expected 'named bitarray: NAME[W] @ OFFSET', got {line!r}", n)
        name, w, off = m.group(3), int(m.group(4)), int(m.group(5))
        if any(r.name == name for r in registers):
            raise lines.error(f"duplicate register {name!r}", n)
        if w < 1 or off + w > width:
            raise lines.error(f"register {name}[{w}] @ {off} exceeds the {width}-bit width", n)
        mask = ((1 << w) - 1) << off
        if used & mask:
            raise lines.error(f"register {name!r} overlaps an earlier register", n)
        used |= mask
        registers.append(Register(name, w, off))
    return width, registers


def parse_qinput(text: str, registers, width: int, filename: str = QINPUT) -> BasisState:
    lines = _Lines(text, filename)
    _version(lines, QINPUT)
    by_name = {r.name: r for r in registers}
    seen = set()
    bits = 0
    while not lines.done():
        n, line = lines.next("register assignment")
        m = _KEYVAL.match(line)
        if not m or not re.fullmatch(r"\d+", m.group(2).strip()):
            raise lines.error(f"expected 'NAME: DECIMAL', got {line!r}", n)
        name, value = m.group(1), int(m.group(2))
        reg = by_name.get(name)
        if reg is None:
            raise lines.error(f"unknown register {name!r}", n)
        if name in seen:
            raise lines.error(f"register {name!r} assigned twice", n)
        if value >= 1 << reg.width:
            raise lines.error(f"value {value} does not fit register {name}[{reg.width}]", n)
        seen.add(name)
        bits |= value << reg.offset
    return BasisState(bits, width)


def parse_qoperators(text: str, filename: str = QOPERATORS) -> list:
    lines = _Lines(text, filename)
    _version(lines, QOPERATORS)
    count = _count(lines, "operators")
    operators = []
    for k in range(count):
        n0, line = lines.next(f"'operator #: {k}'")
        m = _BLOCK.match(line)
        if not m or not _kw(m.group(1), "operator") or m.group(3):
            raise lines.error(f"expected 'operator #: {k}', got {line!r}", n0)
        if int(m.group(2)) != k:
            warnings.warn(f"{filename}:{n0}: operator number {m.group(2)} where {k} expected", ParseWarning, stacklevel=2)
        n, line = lines.next("'name: NAME'")
        m = _KEYVAL.match(line)
        if not m or not _kw(m.group(1), "name") or not re.fullmatch(r"\S+", m.group(2).strip()):
            raise lines.error(f"expected 'name: NAME', got {line!r}", n)
        name = m.group(2).strip()
        if any(op.name == name for op in operators):
            raise lines.error(f"duplicate operator name {name!r}", n)
        n, line = lines.next("'size: M bits'")
        m = _KEYVAL.match(line)
        sm = re.fullmatch(r"(\d+)\s*([A-Za-z]+)", m.group(2).strip()) if m else None
        if not m or not _kw(m.group(1), "size") or not sm or not _kw(sm.group(2), "bits"):
            raise lines.error(f"expected 'size: M bits', got {line!r}", n)
        arity = int(sm.group(1))
        if not 1 <= arity <= MAX_ARITY:
            raise lines.error(f"operator {name!r}: size {arity} bits outside 1..{MAX_ARITY}", n)
        n, line = lines.next("'matrix:'")
        m = _KEYVAL.match(line)
        if not m or not _kw(m.group(1), "matrix") or m.group(2).strip():
            raise lines.error(f"expected 'matrix:', got {line!r}", n)
        dim = 1 << arity
        rows = []
        for r in range(dim):
            n, line = lines.next(f"matrix row {r} of operator {name!r}")
            try:
                row = parse_complex_row(line)
            except ValueError as exc:
                raise lines.error(f"operator {name!r}: {exc}", n) from None
            if len(row) != dim:
                raise lines.error(
                    f"operator {name!r}: declared size {arity} bits needs {dim} entries per row, row {r} has {len(row)}", n
                )
            rows.append(row)
        nxt = lines.peek()
        if nxt is not None and _COMPLEX.match(nxt[1]):
            raise lines.error(f"operator {name!r}: more than {dim} matrix rows for a {arity}-bit operator", nxt[0])
        a = np.array(rows, dtype=np.complex128)
        if not check_unitary(a, UNITARY_TOL):
            raise lines.error(f"operator {name!r} is not unitary within {UNITARY_TOL}", n0)
        operators.append(OperatorMatrix(name, arity, a))
    if not lines.done():
        n, line = lines.next("")
        raise lines.error(f"content after the declared {count} operators: {line!r}", n)
    return operators


def parse_qopseq(text: str, registers, operators, filename: str = QOPSEQ) -> list:
    lines = _Lines(text, filename)
    _version(lines, QOPSEQ)
    count = _count(lines, "operations")
    regs = {r.name: r for r in registers}
    table = {op.name: op for op in operators}
    ops = []
    for k in range(count):
        n, line = lines.next(f"operation #{k}")
        m = _OPLINE.match(line)
        if (
            not m
            or not _kw(m.group(1), "operation")
            or not _kw(m.group(3), "apply")
            or not _kw(m.group(5), "operator")
            or not _kw(m.group(7), "to")
            or not _kw(m.group(8), "bits")
        ):
            raise lines.error(f"expected 'operation #{k}: apply ARITY operator NAME to bits ...', got {line!r}", n)
        if int(m.group(2)) != k:
            warnings.warn(f"{filename}:{n}: operation number {m.group(2)} where {k} expected", ParseWarning, stacklevel=2)
        word = m.group(4)
        arity_word = next((i + 1 for i, w in enumerate(ARITY_WORDS) if _kw(word, w)), None)
        if arity_word is None:
            raise lines.error(f"unknown arity word {word!r}", n)
        op = table.get(m.group(6))
        if op is None:
            raise lines.error(f"unknown operator {m.group(6)!r}", n)
        if arity_word != op.arity_bits:
            raise lines.error(
                f"arity mismatch: {word!r} given but operator {op.name!r} acts on {op.arity_bits} bit(s)", n
            )
        operands = []
        for ref in m.group(9).split(","):
            rm = _BITREF.match(ref.strip())
            if not rm:
                raise lines.error(f"bad bit reference {ref.strip()!r}", n)
            reg = regs.get(rm.group(1))
            if reg is None:
                raise lines.error(f"unknown register {rm.group(1)!r}", n)
            idx = int(rm.group(2))
            if idx >= reg.width:
                raise lines.error(f"bit {reg.name}[{idx}] out of range for {reg.name}[{reg.width}]", n)
            operands.append(reg.offset + idx)
        if len(operands) != op.arity_bits:
            raise lines.error(f"operator {op.name!r} takes {op.arity_bits} bit(s), {len(operands)} given", n)
        if len(set(operands)) != len(operands):
            raise lines.error("operand bits are not distinct", n)
        ops.append(Operation(op, tuple(operands)))
    if not lines.done():
        n, line = lines.next("")
        raise lines.error(f"content after the declared {count} operations: {line!r}", n)
    return ops


def parse_bundle(texts: dict, source_paths=None) -> CircuitBundle:
    """Parse the four files given as ``{filename: text}``."""
    width, registers = parse_qconfig(texts[QCONFIG])
    inp = parse_qinput(texts[QINPUT], registers, width)
    operators = parse_qoperators(texts[QOPERATORS])
    ops = parse_qopseq(texts[QOPSEQ], registers, operators)
    circuit = Circuit(width, tuple(registers), tuple(operators), tuple(ops))
    return CircuitBundle(circuit, inp, source_paths)


def load_bundle(directory=None, paths: dict | None = None) -> CircuitBundle:
    """Read a bundle from ``directory`` or from explicit per-file ``paths``."""
    resolved = {}
    for name in FILENAMES:
        if paths and name in paths:
            resolved[name] = Path(paths[name])
        elif directory is not None:
            resolved[name] = Path(directory) / name
        else:
            raise ValueError(f"no path given for {name}")
    texts = {}
    for name, p in resolved.items():
        try:
            texts[name] = p.read_bytes().decode("ascii")
        except UnicodeDecodeError:
            raise ParseError("file is not 7-bit ASCII", str(p)) from None
    return parse_bundle(texts, tuple(str(resolved[n]) for n in FILENAMES))


# ----------------------------------------------------------------------
# serializer


def format_real(x: float) -> str:
    s = f"{x:.{SIG_DIGITS}g}"
    return "0" if s == "-0" else s


def format_complex(z: complex) -> str:
    return f"({format_real(z.real)} + i*{format_real(z.imag)})"


def file_precision(a) -> np.ndarray:
    """Round entries to what the file format stores, so write/read is lossless."""
    a = np.asarray(a, dtype=np.complex128)
    rnd = np.vectorize(lambda x: float(f"{x:.{SIG_DIGITS}g}"))
    return rnd(a.real) + 1j * rnd(a.imag)


def _bit_ref(circuit: Circuit, q: int) -> str:
    for r in circuit.registers:
        if r.offset <= q < r.offset + r.width:
            return f"{r.name}[{q - r.offset}]"
    raise ValueError(f"bit {q} belongs to no register and cannot be written to {QOPSEQ}")


def serialize_bundle(bundle: CircuitBundle) -> dict:
    """Render the four files; returns ``{filename: text}`` with LF line endings."""
    c = bundle.circuit
    cfg = [f"{QCONFIG} format version {FORMAT_VERSION}", f"bits: {c.width}"]
    cfg += [f"named bitarray: {r.name}[{r.width}] @ {r.offset}" for r in c.registers]

    inp = [f"{QINPUT} format version {FORMAT_VERSION}"]
    covered = 0
    for r in c.registers:
        covered |= ((1 << r.width) - 1) << r.offset
        inp.append(f"{r.name}: {c.register_value(bundle.input, r.name)}")
    if bundle.input.bits & ~covered:
        raise ValueError("input sets bits outside every register; not representable in qinput.txt")

    opf = [f"{QOPERATORS} format version {FORMAT_VERSION}", f"operators: {len(c.operators)}"]
    for k, m in enumerate(c.operators):
        opf += [f"operator #: {k}", f"name: {m.name}", f"size: {m.arity_bits} bits", "matrix:"]
        opf += [" ".join(format_complex(z) for z in row) for row in m.entries]

    seq = [f"{QOPSEQ} format version {FORMAT_VERSION}", f"operations: {len(c.ops)}"]
    for k, op in enumerate(c.ops):
        word = ARITY_WORDS[op.operator.arity_bits - 1]
        refs = ", ".join(_bit_ref(c, q) for q in op.operands)
        seq.append(f"operation #{k}: apply {word} operator {op.operator.name} to bits {refs}")

    return {name: "\n".join(body) + "\n" for name, body in zip(FILENAMES, (cfg, inp, opf, seq))}


def write_bundle(bundle: CircuitBundle, directory) -> list:
    d = Path(directory)
    d.mkdir(parents=True, exist_ok=True)
    written = []
    for name, text in serialize_bundle(bundle).items():
        p = d / name
        p.write_bytes(text.encode("ascii"))
        written.append(p)
    return written
