"""Dense state-vector reference simulator.

This is the correctness instrument the path-sum engine is checked against,
and the producer of hybrid-mode prefix snapshots. It trades memory for
simplicity on purpose.
"""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass

import numpy as np

from .errors import CapacityError, RangeError
from .model import Circuit, Operation, StateLike, _as_bits, with_local_index_bits

DEFAULT_DENSE_BUDGET = 1 << 30  # bytes; 2^26 amplitudes
EXHAUSTIVE_MAX_WIDTH = 5
EXHAUSTIVE_MAX_OPS = 12


@dataclass
class DenseState:
    amplitudes: np.ndarray
    width: int

    def amplitude(self, state: StateLike) -> complex:
        return complex(self.amplitudes[_as_bits(state)])

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))


def init_dense(input_state: StateLike, width: int | None = None, max_bytes: int = DEFAULT_DENSE_BUDGET) -> DenseState:
    if width is None:
        width = input_state.width
    need = (1 << width) * 16
    if need > max_bytes:
        raise CapacityError(
            f"dense state for {width} bits needs 2^{width} x 16 = {need} bytes, over the {max_bytes}-byte budget"
        )
    psi = np.zeros(1 << width, dtype=np.complex128)
    psi[_as_bits(input_state)] = 1.0
    return DenseState(psi, width)


def apply_op(dense: DenseState, op: Operation) -> DenseState:
    """Multiply every operand-bit subvector by the operator matrix.

    Bit q of the flat index is axis ``width-1-q`` of the (2,)*width view; the
    operand axes are moved to the front in operand order so the first operand
    becomes the most significant bit of the local index.
    """
    w = dense.width
    for q in op.operands:
        if not 0 <= q < w:
            raise RangeError(f"operand bit {q} out of range for width {w}")
    m = op.operator.arity_bits
    axes = [w - 1 - q for q in op.operands]
    front = list(range(m))
    t = np.moveaxis(dense.amplitudes.reshape((2,) * w), axes, front)
    shape = t.shape
    t = (op.operator.entries @ t.reshape(1 << m, -1)).reshape(shape)
    out = np.moveaxis(t, front, axes).reshape(-1)
    return DenseState(np.ascontiguousarray(out), w)


def simulate_circuit(circuit: Circuit, input_state: StateLike, upto_pc: int | None = None,
                     max_bytes: int = DEFAULT_DENSE_BUDGET) -> DenseState:
    if upto_pc is None:
        upto_pc = circuit.n_ops
    if not 0 <= upto_pc <= circuit.n_ops:
        raise RangeError(f"upto_pc {upto_pc} outside 0..{circuit.n_ops}")
    dense = init_dense(input_state, circuit.width, max_bytes)
    for op in circuit.ops[:upto_pc]:
        dense = apply_op(dense, op)
    return dense


def simulate_dense(bundle, upto_pc: int | None = None, max_bytes: int = DEFAULT_DENSE_BUDGET) -> DenseState:
    return simulate_circuit(bundle.circuit, bundle.input, upto_pc, max_bytes)


def dense_history(circuit: Circuit, input_state: StateLike, max_bytes: int = DEFAULT_DENSE_BUDGET) -> list:
    """Dense states after 0, 1, ..., t operations."""
    dense = init_dense(input_state, circuit.width, max_bytes)
    out = [dense]
    for op in circuit.ops:
        dense = apply_op(dense, op)
        out.append(dense)
    return out


def born_distribution(dense: DenseState) -> np.ndarray:
    return np.abs(dense.amplitudes) ** 2


def exhaustive_trajectory_distribution(bundle) -> np.ndarray:
    """Exact final-state distribution of the single-state stochastic walk.

    Every trajectory is followed with its exact probability: at a nontrivial
    gate the walker at x moves to neighbour y with probability
    |psi'(y)|^2 / sum over the neighbourhood of |psi'|^2, where psi' is the
    post-gate wavefunction; trivial gates keep x. Paths meeting at the same
    (pc, state) are merged, which sums exactly the same path products.
    """
    circuit = bundle.circuit
    if circuit.width > EXHAUSTIVE_MAX_WIDTH or circuit.n_ops > EXHAUSTIVE_MAX_OPS:
        raise RangeError(
            f"exhaustive enumeration limited to width <= {EXHAUSTIVE_MAX_WIDTH} and <= {EXHAUSTIVE_MAX_OPS} ops"
        )
    history = dense_history(circuit, bundle.input)
    dist = {_as_bits(bundle.input): 1.0}
    for pc, op in enumerate(circuit.ops):
        if op.operator.trivial:
            continue
        post = history[pc + 1].amplitudes
        nxt = defaultdict(float)
        for x, p in dist.items():
            nbrs = [with_local_index_bits(x, op.operands, i) for i in range(op.operator.dim)]
            weights = [abs(post[y]) ** 2 for y in nbrs]
            total = sum(weights)
            if total == 0.0:
                continue
            for y, wy in zip(nbrs, weights):
                if wy > 0.0:
                    nxt[y] += p * wy / total
        dist = nxt
    out = np.zeros(1 << circuit.width)
    for x, p in dist.items():
        out[x] = p
    return out
