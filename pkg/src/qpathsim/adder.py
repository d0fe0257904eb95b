"""Draper QFT in-place adders, ``a := (a + b) mod 2**n``.

Layout: register ``a`` at bits 0..n-1, ``b`` at bits n..2n-1, no ancillas.
The circuit is a QFT on ``a`` (without the final bit-reversal swaps),
controlled phase kicks from ``b`` into ``a``, and the inverse QFT; each stage
has n(n+1)/2 gates.

After the QFT, bit a[i] carries the phase 2*pi*(a mod 2^(i+1)) / 2^(i+1), so
adding b_j * 2^j rotates a[i] by 180 / 2^(i-j) degrees for every j <= i
(pairs with j > i would add whole turns and are omitted).
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import RangeError
from .model import BasisState, Circuit, Operation, OperatorMatrix, Register, controlled_phase, hadamard
from .qfile import CircuitBundle, file_precision

MAX_N = 32


@dataclass(frozen=True)
class AdderSpec:
    n: int
    a_value: int = 0
    b_value: int = 0

    def __post_init__(self):
        if not 1 <= self.n <= MAX_N:
            raise RangeError(f"adder operand width n={self.n} outside 1..{MAX_N}")
        for label, v in (("a", self.a_value), ("b", self.b_value)):
            if not 0 <= v < (1 << self.n):
                raise RangeError(f"{label}={v} does not fit in {self.n} bits")

    @property
    def width(self) -> int:
        return 2 * self.n

    @property
    def n_ops(self) -> int:
        return 3 * self.n * (self.n + 1) // 2


def operator_name(angle_degrees: float) -> str:
    """``cPi``, ``cPiOver2``, ``cPiOver4``, ... with an ``inv_`` prefix for negative angles."""
    if angle_degrees == 0:
        raise RangeError("angle 0 has no operator name")
    mag = abs(angle_degrees)
    ratio = 180.0 / mag
    d = round(ratio)
    if d < 1 or ratio != d or d & (d - 1):
        raise RangeError(f"angle {angle_degrees} is not of the form +-180/2^d")
    base = "cPi" if d == 1 else f"cPiOver{d}"
    if angle_degrees < 0:
        if d == 1:
            return base  # a half-turn is its own inverse
        return "inv_" + base
    return base


def _phase_op(angle: float) -> OperatorMatrix:
    m = controlled_phase(angle)
    return OperatorMatrix(operator_name(angle), 2, file_precision(m.entries))


def gen_draper(spec: AdderSpec) -> CircuitBundle:
    """Build the adder circuit and its classical input as a bundle.

    Matrix entries are rounded to file precision up front, so the generated
    bundle and the bundle read back from its serialized files are identical.
    """
    n = spec.n
    a = Register("a", n, 0)
    b = Register("b", n, n)

    h = OperatorMatrix("H", 1, file_precision(hadamard().entries))
    table = {"H": h}

    def phase(angle):
        name = operator_name(angle)
        if name not in table:
            table[name] = _phase_op(angle if name != "cPi" else 180.0)
        return table[name]

    qft = []
    for i in range(n - 1, -1, -1):
        qft.append((h, (a.bit(i),)))
        for l in range(i - 1, -1, -1):
            qft.append((phase(180.0 / 2 ** (i - l)), (a.bit(i), a.bit(l))))

    add = []
    for i in range(n - 1, -1, -1):
        for j in range(i, -1, -1):
            add.append((phase(180.0 / 2 ** (i - j)), (a.bit(i), b.bit(j))))

    inv = []
    for m, operands in reversed(qft):
        if m is h:
            inv.append((h, operands))
        else:
            angle = 180.0 / 2 ** (_depth(m.name))
            inv.append((phase(-angle), operands))

    ordered = [table["H"]]
    ordered += [table[k] for k in sorted((k for k in table if k.startswith("cPiOver")), key=_depth)]
    ordered += [table[k] for k in ("cPi",) if k in table]
    ordered += [table[k] for k in sorted((k for k in table if k.startswith("inv_")), key=_depth)]

    ops = tuple(Operation(m, ops_) for m, ops_ in qft + add + inv)
    circuit = Circuit(2 * n, (a, b), tuple(ordered), ops)
    state = BasisState(spec.a_value | (spec.b_value << n), 2 * n)
    return CircuitBundle(circuit, state)


def _depth(name: str) -> int:
    """log2 of the divisor in ``cPiOver<2^d>`` names; 0 for ``cPi``."""
    base = name[4:] if name.startswith("inv_") else name
    if base == "cPi":
        return 0
    return int(base[len("cPiOver"):]).bit_length() - 1


def expected_sum_state(spec: AdderSpec) -> BasisState:
    total = (spec.a_value + spec.b_value) % (1 << spec.n)
    return BasisState(total | (spec.b_value << spec.n), 2 * spec.n)
