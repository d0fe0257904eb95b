"""Domain types: basis states, operator matrices, operations and circuits.

Amplitudes are plain Python ``complex`` values (two IEEE doubles); arrays of
them use ``numpy.complex128``. Basis states are ``int`` bit patterns at the
kernel level and :class:`BasisState` at the API boundary.

Operand order convention: the first-listed operand of an operation is the
most significant bit of the operator's local matrix index, so for a
controlled gate listed as ``(control, target)`` the row/column index is
``control * 2 + target``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Sequence, Union

import numpy as np

from .errors import RangeError

MAX_WIDTH = 64
MAX_ARITY = 4
UNITARY_TOL = 1e-9
TRIVIAL_TOL = 1e-12

INV_SQRT2 = 1.0 / math.sqrt(2.0)


@dataclass(frozen=True)
class BasisState:
    """A computational-basis label: ``width`` bits packed into ``bits``.

    Bit 0 is the least significant; :meth:`__str__` renders the most
    significant bit leftmost.
    """

    bits: int
    width: int

    def __post_init__(self):
        if not 1 <= self.width <= MAX_WIDTH:
            raise RangeError(f"state width {self.width} outside 1..{MAX_WIDTH}")
        if not 0 <= self.bits < (1 << self.width):
            raise RangeError(f"bit pattern {self.bits:#x} does not fit in {self.width} bits")

    @classmethod
    def from_string(cls, text: str) -> "BasisState":
        text = text.strip()
        if not text or set(text) - {"0", "1"}:
            raise RangeError(f"bad basis-state literal {text!r}: expected only 0/1 characters")
        return cls(int(text, 2), len(text))

    def bit(self, pos: int) -> int:
        if not 0 <= pos < self.width:
            raise RangeError(f"bit {pos} out of range for width {self.width}")
        return (self.bits >> pos) & 1

    def __int__(self):
        return self.bits

    def __index__(self):
        return self.bits

    def __str__(self):
        return format(self.bits, f"0{self.width}b")


StateLike = Union[BasisState, int]


def _as_bits(state: StateLike) -> int:
    return state.bits if isinstance(state, BasisState) else int(state)


def check_unitary(m, tol: float = UNITARY_TOL) -> bool:
    """True iff ``max |M M^dagger - I| <= tol``. Accepts an array or an OperatorMatrix."""
    a = np.asarray(m.entries if isinstance(m, OperatorMatrix) else m, dtype=np.complex128)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        return False
    err = a @ a.conj().T - np.eye(a.shape[0])
    return bool(np.max(np.abs(err)) <= tol)


@dataclass(frozen=True, eq=False)
class OperatorMatrix:
    """A named unitary on ``arity_bits`` bits, stored row-major as complex128.

    ``trivial`` is true when every off-diagonal entry is (numerically) zero;
    such gates give each basis state a single predecessor.
    """

    name: str
    arity_bits: int
    entries: np.ndarray
    trivial: bool = field(init=False)

    def __post_init__(self):
        if not 1 <= self.arity_bits <= MAX_ARITY:
            raise RangeError(f"operator {self.name!r}: arity {self.arity_bits} outside 1..{MAX_ARITY}")
        dim = 1 << self.arity_bits
        a = np.array(self.entries, dtype=np.complex128)
        if a.shape != (dim, dim):
            raise RangeError(
                f"operator {self.name!r}: {self.arity_bits}-bit gate needs a {dim}x{dim} matrix, got shape {a.shape}"
            )
        if not np.all(np.isfinite(a)):
            raise ValueError(f"operator {self.name!r} has non-finite entries")
        if not check_unitary(a):
            raise ValueError(f"operator {self.name!r} is not unitary within {UNITARY_TOL}")
        a.setflags(write=False)
        off = a - np.diag(np.diag(a))
        object.__setattr__(self, "entries", a)
        object.__setattr__(self, "trivial", bool(np.all(np.abs(off) <= TRIVIAL_TOL)))

    @property
    def dim(self) -> int:
        return 1 << self.arity_bits

    def __eq__(self, other):
        if not isinstance(other, OperatorMatrix):
            return NotImplemented
        return (
            self.name == other.name
            and self.arity_bits == other.arity_bits
            and bool(np.max(np.abs(self.entries - other.entries)) <= TRIVIAL_TOL)
        )

    def __hash__(self):
        return hash((self.name, self.arity_bits))

    def __repr__(self):
        return f"OperatorMatrix({self.name!r}, arity_bits={self.arity_bits}, trivial={self.trivial})"


def hadamard() -> OperatorMatrix:
    return OperatorMatrix("H", 1, INV_SQRT2 * np.array([[1, 1], [1, -1]], dtype=np.complex128))


def controlled_phase(k: float, name: str | None = None) -> OperatorMatrix:
    """Phase rotation by ``k`` degrees applied when both operand bits are 1."""
    rad = math.pi * k / 180.0
    phase = complex(math.cos(rad), math.sin(rad))
    # exact values at quarter turns keep serialized files and traces free of 1e-17 noise
    q = k / 90.0
    if q == int(q):
        phase = (1, 1j, -1, -1j)[int(q) % 4]
    m = np.eye(4, dtype=np.complex128)
    m[3, 3] = phase
    return OperatorMatrix(name if name is not None else f"phi({k:g})", 2, m)


@dataclass(frozen=True)
class Operation:
    """An operator applied to an ordered tuple of global bit positions."""

    operator: OperatorMatrix
    operands: tuple

    def __post_init__(self):
        ops = tuple(int(q) for q in self.operands)
        object.__setattr__(self, "operands", ops)
        if len(ops) != self.operator.arity_bits:
            raise RangeError(
                f"operator {self.operator.name!r} takes {self.operator.arity_bits} operand(s), got {len(ops)}"
            )
        if len(set(ops)) != len(ops):
            raise RangeError(f"operands {ops} are not distinct")
        if any(q < 0 or q >= MAX_WIDTH for q in ops):
            raise RangeError(f"operands {ops} out of range")


@dataclass(frozen=True)
class Register:
    name: str
    width: int
    offset: int

    def bit(self, idx: int) -> int:
        if not 0 <= idx < self.width:
            raise RangeError(f"{self.name}[{idx}] out of range for {self.name}[{self.width}]")
        return self.offset + idx


def check_operands(operands: Sequence[int], width: int) -> None:
    for q in operands:
        if not 0 <= q < width:
            raise RangeError(f"operand bit {q} out of range for width {width}")


def local_index_bits(bits: int, operands: Sequence[int]) -> int:
    idx = 0
    for q in operands:
        idx = (idx << 1) | ((bits >> q) & 1)
    return idx


def with_local_index_bits(bits: int, operands: Sequence[int], idx: int) -> int:
    m = len(operands)
    for j, q in enumerate(operands):
        b = (idx >> (m - 1 - j)) & 1
        bits = (bits & ~(1 << q)) | (b << q)
    return bits


def local_index(state: BasisState, operands: Sequence[int]) -> int:
    """Read the operand bits of ``state`` as an integer, first operand most significant."""
    check_operands(operands, state.width)
    return local_index_bits(state.bits, operands)


def with_local_index(state: BasisState, operands: Sequence[int], idx: int) -> BasisState:
    """Return ``state`` with its operand bits overwritten by ``idx`` (inverse of :func:`local_index`)."""
    check_operands(operands, state.width)
    if not 0 <= idx < (1 << len(operands)):
        raise RangeError(f"local index {idx} out of range for {len(operands)} operand bit(s)")
    return BasisState(with_local_index_bits(state.bits, operands, idx), state.width)


class CompiledCircuit:
    """Flat array view of a circuit for the hot kernels.

    ``mats[k]`` holds operation k's matrix row-major in the first ``dims[k]**2``
    slots, so a stack record can address an entry (row, column) with the single
    integer ``row * dims[k] + column``.
    """

    def __init__(self, circuit: "Circuit"):
        t = len(circuit.ops)
        self.n_ops = t
        self.mats = np.zeros((max(t, 1), (1 << MAX_ARITY) ** 2), dtype=np.complex128)
        self.dims = np.zeros(max(t, 1), dtype=np.int64)
        self.arity = np.zeros(max(t, 1), dtype=np.int64)
        self.operands = np.zeros((max(t, 1), MAX_ARITY), dtype=np.int64)
        self.trivial = np.zeros(max(t, 1), dtype=np.bool_)
        # python-native copies for the interpreted recursive kernel
        self.py_ops = []
        for k, op in enumerate(circuit.ops):
            m = op.operator
            d = m.dim
            self.mats[k, : d * d] = m.entries.ravel()
            self.dims[k] = d
            self.arity[k] = m.arity_bits
            self.operands[k, : m.arity_bits] = op.operands
            self.trivial[k] = m.trivial
            rows = [[complex(x) for x in row] for row in m.entries]
            self.py_ops.append((op.operands, d, m.trivial, rows))
        for a in (self.mats, self.dims, self.arity, self.operands, self.trivial):
            a.setflags(write=False)


@dataclass(frozen=True)
class Circuit:
    width: int
    registers: tuple = ()
    operators: tuple = ()
    ops: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "registers", tuple(self.registers))
        object.__setattr__(self, "operators", tuple(self.operators))
        object.__setattr__(self, "ops", tuple(self.ops))
        if not 1 <= self.width <= MAX_WIDTH:
            raise RangeError(f"circuit width {self.width} outside 1..{MAX_WIDTH}")
        seen = set()
        used = 0
        for r in self.registers:
            if r.name in seen:
                raise RangeError(f"duplicate register {r.name!r}")
            seen.add(r.name)
            if r.width < 1 or r.offset < 0 or r.offset + r.width > self.width:
                raise RangeError(f"register {r.name}[{r.width}] @ {r.offset} exceeds width {self.width}")
            mask = ((1 << r.width) - 1) << r.offset
            if used & mask:
                raise RangeError(f"register {r.name!r} overlaps another register")
            used |= mask
        names = [m.name for m in self.operators]
        if len(set(names)) != len(names):
            raise RangeError("duplicate operator names in operator table")
        for k, op in enumerate(self.ops):
            if op.operator not in self.operators:
                raise RangeError(f"operation #{k}: operator {op.operator.name!r} not in operator table")
            check_operands(op.operands, self.width)

    @property
    def n_ops(self) -> int:
        return len(self.ops)

    @property
    def nontrivial_count(self) -> int:
        return sum(1 for op in self.ops if not op.operator.trivial)

    def register(self, name: str) -> Register:
        for r in self.registers:
            if r.name == name:
                return r
        raise KeyError(name)

    def operator(self, name: str) -> OperatorMatrix:
        for m in self.operators:
            if m.name == name:
                return m
        raise KeyError(name)

    def register_value(self, state: StateLike, name: str) -> int:
        r = self.register(name)
        return (_as_bits(state) >> r.offset) & ((1 << r.width) - 1)

    @cached_property
    def compiled(self) -> CompiledCircuit:
        return CompiledCircuit(self)
