"""Hot numeric kernels (numba-compiled when available).

Bit patterns are carried as signed int64 inside these kernels so that 64-bit
states survive numba's integer typing; :func:`to_kernel_bits` does the
conversion.
"""

import numpy as np

from ._jit import HAVE_NUMBA, maybe_njit

# One stack record per tree level: the running amplitude sum and the flat
# matrix-entry index ``row * dim + column`` (row = the node's own local index,
# column = the predecessor currently being expanded).
STACK_RECORD = np.dtype([("acc", np.complex128), ("entry", np.int64)])
STACK_RECORD_BYTES = STACK_RECORD.itemsize

# counters layout shared with pathsum.Metrics
C_CALLS, C_MAX_DEPTH, C_MULTS, C_PEAK_STACK = 0, 1, 2, 3
N_COUNTERS = 4

_SIGN = 1 << 63
_WRAP = 1 << 64


def to_kernel_bits(bits):
    bits = int(bits)
    return bits - _WRAP if bits >= _SIGN else bits


@maybe_njit
def local_index_k(bits, operands, m):
    idx = 0
    for j in range(m):
        idx = (idx << 1) | ((bits >> operands[j]) & 1)
    return idx


@maybe_njit
def with_local_index_k(bits, operands, m, idx):
    for j in range(m):
        q = operands[j]
        b = (idx >> (m - 1 - j)) & 1
        one = np.int64(1) << q
        bits = (bits & ~one) | (b * one)
    return bits


@maybe_njit
def amp_iterative(state, pc, base_pc, input_bits, use_snapshot, snapshot,
                  mats, dims, arity, operands, trivial,
                  acc_stack, entry_stack, counters):
    """Amplitude of ``state`` after ``pc`` operations, depth-first with an explicit stack.

    The only per-level storage is one record in (``acc_stack``, ``entry_stack``);
    the current basis state lives in a single register and is patched on the
    way down and restored on the way up. Predecessors are summed in ascending
    local-index order, matching the recursive kernel bit for bit.
    """
    calls = 0
    max_depth = 0
    mults = 0
    peak = 0
    root_pc = pc
    cur = state
    top = 0
    value = 0j
    descending = True
    while True:
        if descending:
            calls += 1
            if root_pc - pc > max_depth:
                max_depth = root_pc - pc
            if pc == base_pc:
                if use_snapshot:
                    value = snapshot[cur]
                elif cur == input_bits:
                    value = 1.0 + 0j
                else:
                    value = 0j
                descending = False
            else:
                k = pc - 1
                d = dims[k]
                m = arity[k]
                row = local_index_k(cur, operands[k], m)
                if trivial[k]:
                    entry_stack[top] = row * d + row
                else:
                    entry_stack[top] = row * d
                    cur = with_local_index_k(cur, operands[k], m, 0)
                acc_stack[top] = 0j
                top += 1
                if top > peak:
                    peak = top
                pc = k
                continue
        if top == 0:
            break
        k = pc
        e = entry_stack[top - 1]
        if trivial[k]:
            value = mats[k, e] * value
            mults += 1
            top -= 1
            pc += 1
            continue
        d = dims[k]
        row = e // d
        col = e - row * d
        acc = acc_stack[top - 1] + mats[k, e] * value
        mults += 1
        if col + 1 < d:
            acc_stack[top - 1] = acc
            entry_stack[top - 1] = e + 1
            cur = with_local_index_k(cur, operands[k], arity[k], col + 1)
            descending = True
        else:
            cur = with_local_index_k(cur, operands[k], arity[k], row)
            value = acc
            top -= 1
            pc += 1
    counters[C_CALLS] += calls
    if max_depth > counters[C_MAX_DEPTH]:
        counters[C_MAX_DEPTH] = max_depth
    counters[C_MULTS] += mults
    if peak > counters[C_PEAK_STACK]:
        counters[C_PEAK_STACK] = peak
    return value


def make_stacks(n_ops):
    n = max(int(n_ops), 1)
    return np.zeros(n, dtype=np.complex128), np.zeros(n, dtype=np.int64)


__all__ = [
    "HAVE_NUMBA",
    "STACK_RECORD",
    "STACK_RECORD_BYTES",
    "amp_iterative",
    "local_index_k",
    "make_stacks",
    "to_kernel_bits",
    "with_local_index_k",
]
