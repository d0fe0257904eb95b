"""Amplitude evaluation by summing over predecessor basis states.

``calc_amp(state, pc)`` is the amplitude of ``state`` after the first ``pc``
operations. It is built from the amplitudes of the predecessors of ``state``
under operation ``pc - 1``, recursively, down to the input state (or to a
dense snapshot in hybrid mode). Memory is one stack level per operation
instead of one amplitude per basis state.
"""

from __future__ import annotations

import sys
from collections import OrderedDict
from dataclasses import asdict, dataclass, fields

import numpy as np

from . import kernels
from .errors import CapacityError, RangeError
from .model import (
    BasisState,
    Circuit,
    OperatorMatrix,
    Operation,
    StateLike,
    _as_bits,
    check_operands,
    local_index_bits,
    with_local_index_bits,
)

DEFAULT_CACHE_CAPACITY = 1 << 20
MAX_RECURSIVE_OPS = 10_000
MODES = ("recursive", "iterative")


@dataclass
class Metrics:
    """Deterministic work counters.

    ``calc_amp_calls`` counts amplitude evaluations actually performed (cache
    hits are not evaluations); ``matrix_mults`` counts complex multiplications
    by gate-matrix entries; ``max_depth`` is the deepest level below the root
    reached; ``peak_stack_entries`` is the most simultaneously open levels.
    """

    calc_amp_calls: int = 0
    max_depth: int = 0
    matrix_mults: int = 0
    cache_hits: int = 0
    cache_misses: int = 0
    peak_stack_entries: int = 0

    def reset(self):
        for f in fields(self):
            setattr(self, f.name, 0)

    def as_dict(self):
        return asdict(self)


class AmpCache:
    """Bounded map ``(pc, state bits) -> amplitude`` with LRU eviction."""

    def __init__(self, capacity: int):
        if capacity < 0:
            raise RangeError("cache capacity must be >= 0")
        self.capacity = capacity
        self._data: OrderedDict = OrderedDict()
        self.hits = 0
        self.misses = 0

    def get(self, key):
        try:
            value = self._data[key]
        except KeyError:
            self.misses += 1
            return None
        self._data.move_to_end(key)
        self.hits += 1
        return value

    def put(self, key, value):
        if self.capacity == 0:
            return
        data = self._data
        data[key] = value
        data.move_to_end(key)
        while len(data) > self.capacity:
            data.popitem(last=False)

    def clear(self):
        self._data.clear()
        self.hits = 0
        self.misses = 0

    def __len__(self):
        return len(self._data)

    def __contains__(self, key):
        return key in self._data


def neighbors(state: StateLike, op: Operation) -> list:
    """The 2^m states differing from ``state`` only on ``op``'s operand bits, in local-index order."""
    bits = _as_bits(state)
    if isinstance(state, BasisState):
        check_operands(op.operands, state.width)
        return [BasisState(with_local_index_bits(bits, op.operands, i), state.width) for i in range(op.operator.dim)]
    return [with_local_index_bits(bits, op.operands, i) for i in range(op.operator.dim)]


def step_amplitudes(amps, m: OperatorMatrix) -> np.ndarray:
    a = np.asarray(amps, dtype=np.complex128)
    if a.shape != (m.dim,):
        raise RangeError(f"amplitude vector of length {a.shape} does not match {m.dim}x{m.dim} operator {m.name!r}")
    return m.entries @ a


class PathSumEngine:
    """Evaluates amplitudes of one circuit started from one classical input.

    Parameters
    ----------
    mode:
        ``"recursive"`` (host call stack) or ``"iterative"`` (explicit stack).
    cache_capacity:
        LRU amplitude cache size in entries; 0 disables caching.
    hybrid_prefix, mem_budget:
        At most one may be given. ``hybrid_prefix=p`` simulates the first ``p``
        operations densely and stops the recursion at that snapshot
        (requests for pc < p recurse all the way to the input instead);
        ``mem_budget`` (bytes) picks the largest prefix whose snapshot fits.

    An engine is not thread-safe while evaluating (the cache and counters
    mutate); use one engine per thread.
    """

    def __init__(self, circuit: Circuit, input_state: StateLike, *, mode="iterative",
                 cache_capacity=DEFAULT_CACHE_CAPACITY, hybrid_prefix=None, mem_budget=None):
        if mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}, got {mode!r}")
        if hybrid_prefix is not None and mem_budget is not None:
            raise ValueError("hybrid_prefix and mem_budget are mutually exclusive")
        bits = _as_bits(input_state)
        if isinstance(input_state, BasisState) and input_state.width != circuit.width:
            raise RangeError(f"input width {input_state.width} != circuit width {circuit.width}")
        if not 0 <= bits < (1 << circuit.width):
            raise RangeError("input state does not fit the circuit width")
        self.circuit = circuit
        self.input_bits = bits
        self.mode = mode
        self.metrics = Metrics()
        self.cache = AmpCache(cache_capacity) if cache_capacity else None
        self._c = circuit.compiled
        self._acc_stack, self._entry_stack = kernels.make_stacks(circuit.n_ops)
        self._counters = np.zeros(kernels.N_COUNTERS, dtype=np.int64)

        self.base_pc = 0
        self.snapshot = None
        if mem_budget is not None:
            need = (1 << circuit.width) * 16
            if need > mem_budget:
                raise CapacityError(
                    f"hybrid snapshot needs 2^{circuit.width} x 16 = {need} bytes, budget is {mem_budget} bytes"
                )
            hybrid_prefix = circuit.n_ops
        if hybrid_prefix is not None:
            from .oracle import simulate_circuit

            if not 0 <= hybrid_prefix <= circuit.n_ops:
                raise RangeError(f"hybrid prefix {hybrid_prefix} outside 0..{circuit.n_ops}")
            budget = {} if mem_budget is None else {"max_bytes": mem_budget}
            dense = simulate_circuit(circuit, bits, hybrid_prefix, **budget)
            self.base_pc = hybrid_prefix
            self.snapshot = dense.amplitudes
        self._kbits_input = kernels.to_kernel_bits(bits)
        self._k_snapshot = self.snapshot if self.snapshot is not None else np.zeros(1, dtype=np.complex128)

    # ------------------------------------------------------------------

    def reset_metrics(self):
        self.metrics.reset()
        if self.cache is not None:
            self.cache.hits = self.cache.misses = 0

    def clear_cache(self):
        if self.cache is not None:
            self.cache.clear()

    def _check(self, state: StateLike, pc: int) -> int:
        bits = _as_bits(state)
        if isinstance(state, BasisState) and state.width != self.circuit.width:
            raise RangeError(f"state width {state.width} != circuit width {self.circuit.width}")
        if not 0 <= bits < (1 << self.circuit.width):
            raise RangeError("state does not fit the circuit width")
        if not 0 <= pc <= self.circuit.n_ops:
            raise RangeError(f"pc {pc} outside 0..{self.circuit.n_ops}")
        # below the snapshot, fall back to the plain sum rooted at the input
        self._use_snap = self.snapshot is not None and pc >= self.base_pc
        self._base = self.base_pc if self._use_snap else 0
        return bits

    def _base_value(self, bits):
        if self._use_snap:
            return complex(self.snapshot[bits])
        return 1 + 0j if bits == self.input_bits else 0j

    def amplitude(self, state: StateLike, pc: int) -> complex:
        """Evaluate with the kernel selected by ``mode``."""
        if self.mode == "recursive":
            return self.calc_amp(state, pc)
        return self.calc_amp_iterative(state, pc)

    # ------------------------------------------------------------------
    # recursive kernel

    def calc_amp(self, state: StateLike, pc: int) -> complex:
        bits = self._check(state, pc)
        if self.circuit.n_ops > MAX_RECURSIVE_OPS:
            raise RangeError(
                f"recursive kernel refuses circuits over {MAX_RECURSIVE_OPS} operations; use the iterative kernel"
            )
        old = sys.getrecursionlimit()
        need = pc - self._base + 200
        if need > old:
            sys.setrecursionlimit(need)
        try:
            return self._recurse(bits, pc, pc)
        finally:
            if need > old:
                sys.setrecursionlimit(old)

    def _recurse(self, bits, pc, root_pc):
        m = self.metrics
        depth = root_pc - pc
        if depth > m.max_depth:
            m.max_depth = depth
        if pc == self._base:
            m.calc_amp_calls += 1
            return self._base_value(bits)
        cache = self.cache
        if cache is not None:
            hit = cache.get((pc, bits))
            if hit is not None:
                m.cache_hits += 1
                return hit
            m.cache_misses += 1
        m.calc_amp_calls += 1
        if depth + 1 > m.peak_stack_entries:
            m.peak_stack_entries = depth + 1
        operands, d, triv, rows = self._c.py_ops[pc - 1]
        row = local_index_bits(bits, operands)
        if triv:
            amp = rows[row][row] * self._recurse(bits, pc - 1, root_pc)
            m.matrix_mults += 1
        else:
            coeffs = rows[row]
            amp = 0j
            for col in range(d):
                pred = with_local_index_bits(bits, operands, col)
                amp = amp + coeffs[col] * self._recurse(pred, pc - 1, root_pc)
            m.matrix_mults += d
        if cache is not None:
            cache.put((pc, bits), amp)
        return amp

    # ------------------------------------------------------------------
    # iterative kernel

    def calc_amp_iterative(self, state: StateLike, pc: int) -> complex:
        bits = self._check(state, pc)
        if self.cache is not None:
            return self._iterate_cached(bits, pc)
        c = self._c
        counters = self._counters
        counters[:] = 0
        value = kernels.amp_iterative(
            kernels.to_kernel_bits(bits), pc, self._base, self._kbits_input,
            self._use_snap, self._k_snapshot,
            c.mats, c.dims, c.arity, c.operands, c.trivial,
            self._acc_stack, self._entry_stack, counters,
        )
        m = self.metrics
        m.calc_amp_calls += int(counters[kernels.C_CALLS])
        m.matrix_mults += int(counters[kernels.C_MULTS])
        m.max_depth = max(m.max_depth, int(counters[kernels.C_MAX_DEPTH]))
        m.peak_stack_entries = max(m.peak_stack_entries, int(counters[kernels.C_PEAK_STACK]))
        return complex(value)

    def _iterate_cached(self, bits, pc):
        # Same traversal as kernels.amp_iterative, plus cache lookups on entry
        # and stores on completion of every non-base node.
        m = self.metrics
        cache = self.cache
        py_ops = self._c.py_ops
        base = self._base
        acc_stack = []
        entry_stack = []
        root_pc = pc
        cur = bits
        value = 0j
        descending = True
        while True:
            if descending:
                if root_pc - pc > m.max_depth:
                    m.max_depth = root_pc - pc
                descending = False
                if pc == base:
                    m.calc_amp_calls += 1
                    value = self._base_value(cur)
                else:
                    hit = cache.get((pc, cur))
                    if hit is not None:
                        m.cache_hits += 1
                        value = hit
                    else:
                        m.cache_misses += 1
                        m.calc_amp_calls += 1
                        operands, d, triv, rows = py_ops[pc - 1]
                        row = local_index_bits(cur, operands)
                        if triv:
                            entry_stack.append(row * d + row)
                        else:
                            entry_stack.append(row * d)
                            cur = with_local_index_bits(cur, operands, 0)
                        acc_stack.append(0j)
                        if len(acc_stack) > m.peak_stack_entries:
                            m.peak_stack_entries = len(acc_stack)
                        pc -= 1
                        descending = True
                        continue
            if not acc_stack:
                break
            operands, d, triv, rows = py_ops[pc]
            e = entry_stack[-1]
            row, col = divmod(e, d)
            m.matrix_mults += 1
            if triv:
                value = rows[row][col] * value
                acc_stack.pop()
                entry_stack.pop()
                pc += 1
                cache.put((pc, cur), value)
                continue
            acc = acc_stack[-1] + rows[row][col] * value
            if col + 1 < d:
                acc_stack[-1] = acc
                entry_stack[-1] = e + 1
                cur = with_local_index_bits(cur, operands, col + 1)
                descending = True
            else:
                cur = with_local_index_bits(cur, operands, row)
                value = acc
                acc_stack.pop()
                entry_stack.pop()
                pc += 1
                cache.put((pc, cur), value)
        return value


def calc_amp(engine: PathSumEngine, state: StateLike, pc: int) -> complex:
    return engine.calc_amp(state, pc)


def calc_amp_iterative(engine: PathSumEngine, state: StateLike, pc: int) -> complex:
    return engine.calc_amp_iterative(state, pc)
