"""Time the compiled path-sum kernel against its pure-Python twin.

    python3 benchmarks/bench_kernels.py [--min 3] [--max 6] [--repeat 3]

For each 2xn adder it evaluates the final amplitude of the sum state with
the cache off, once through ``kernels.amp_iterative`` (numba, if available)
and once through ``amp_iterative.py_func``, checks that both return the same
bits, and prints the best-of-N wall times.
"""

import argparse
import time

import numpy as np

from qpathsim import kernels
from qpathsim._jit import HAVE_NUMBA
from qpathsim.adder import AdderSpec, expected_sum_state, gen_draper


def evaluate(fn, circuit, bits, input_bits):
    c = circuit.compiled
    acc, entry = kernels.make_stacks(c.n_ops)
    counters = np.zeros(kernels.N_COUNTERS, dtype=np.int64)
    v = fn(
        kernels.to_kernel_bits(bits), c.n_ops, 0, kernels.to_kernel_bits(input_bits), False,
        np.zeros(1, dtype=np.complex128), c.mats, c.dims, c.arity, c.operands, c.trivial,
        acc, entry, counters,
    )
    return complex(v), int(counters[kernels.C_CALLS])


def best_of(repeat, fn, *args):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best, out


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--min", type=int, default=3)
    p.add_argument("--max", type=int, default=6)
    p.add_argument("--repeat", type=int, default=3)
    args = p.parse_args(argv)

    print(f"numba kernel active: {HAVE_NUMBA}")
    print(f"{'n':>3} {'ops':>5} {'calls':>10} {'compiled_s':>12} {'python_s':>12} {'speedup':>9}")
    for n in range(args.min, args.max + 1):
        spec = AdderSpec(n, 1, 1)
        b = gen_draper(spec)
        target = expected_sum_state(spec).bits
        evaluate(kernels.amp_iterative, b.circuit, target, b.input.bits)  # warm up / compile
        tj, (vj, calls) = best_of(args.repeat, evaluate, kernels.amp_iterative, b.circuit, target, b.input.bits)
        tp, (vp, _) = best_of(args.repeat, evaluate, kernels.amp_iterative.py_func, b.circuit, target, b.input.bits)
        assert vj == vp, (n, vj, vp)
        print(f"{n:>3} {b.circuit.n_ops:>5} {calls:>10} {tj:>12.6f} {tp:>12.6f} {tp / tj:>9.1f}x")


if __name__ == "__main__":
    main()
