"""Command-line driver.

Subcommands: ``run``, ``amp``, ``oracle``, ``gen``, ``bench``.

Exit codes: 0 ok, 1 bad arguments / out-of-range request, 2 input file
parse error, 3 numerical degeneracy, 4 dense capacity exceeded.
"""

from __future__ import annotations

import argparse
import csv
import sys
import time
from pathlib import Path

from . import __version__
from .adder import AdderSpec, gen_draper
from .bohm import Rng, run
from .errors import CapacityError, NumericalDegeneracyError, ParseError, RangeError
from .model import BasisState
from .oracle import DEFAULT_DENSE_BUDGET, born_distribution, simulate_dense
from .pathsum import DEFAULT_CACHE_CAPACITY, PathSumEngine
from .qfile import FILENAMES, load_bundle, write_bundle

EXIT_OK, EXIT_USAGE, EXIT_PARSE, EXIT_NUMERIC, EXIT_CAPACITY = 0, 1, 2, 3, 4

BANNER = (
    f"Welcome to qpathsim {__version__}, a space-efficient path-sum quantum circuit simulator.",
    "(Python console version)",
    "",
    "",
)

METRICS_SCHEMA = "# qpathsim metrics v1"
METRICS_COLUMNS = (
    "width", "ops", "nontrivial_ops", "calc_amp_calls", "max_depth", "matrix_mults",
    "cache_hits", "cache_misses", "peak_stack_entries", "wall_time_s",
)
BENCH_SCHEMA = "# qpathsim bench v1"
BENCH_COLUMNS = ("n", "cache_capacity") + METRICS_COLUMNS + ("call_ratio",)


# components below this are rounding residue of unit-norm arithmetic
DISPLAY_FLOOR = 1e-9


def format_number(x: float) -> str:
    """At most 6 significant digits, integral values without a decimal point."""
    if abs(x) < DISPLAY_FLOOR:
        return "0"
    s = f"{x:.6g}"
    return "0" if s == "-0" else s


def format_amp(z: complex) -> str:
    return f"({format_number(z.real)} + i*{format_number(z.imag)})"


def format_state(state: BasisState) -> str:
    return f"{state.width - 1}->{state}<-0 ({state.width} bits)"


def metrics_row(engine: PathSumEngine, wall: float) -> dict:
    c = engine.circuit
    m = engine.metrics
    return {
        "width": c.width,
        "ops": c.n_ops,
        "nontrivial_ops": c.nontrivial_count,
        "calc_amp_calls": m.calc_amp_calls,
        "max_depth": m.max_depth,
        "matrix_mults": m.matrix_mults,
        "cache_hits": m.cache_hits,
        "cache_misses": m.cache_misses,
        "peak_stack_entries": m.peak_stack_entries,
        "wall_time_s": f"{wall:.6f}",
    }


def write_csv(path_or_stream, schema, columns, rows):
    own = not hasattr(path_or_stream, "write")
    f = open(path_or_stream, "w", newline="") if own else path_or_stream
    try:
        f.write(schema + "\n")
        w = csv.DictWriter(f, fieldnames=columns, lineterminator="\n")
        w.writeheader()
        w.writerows(rows)
    finally:
        if own:
            f.close()


# ----------------------------------------------------------------------


def _bundle(args):
    paths = {name: getattr(args, name.split(".")[0]) for name in FILENAMES if getattr(args, name.split(".")[0], None)}
    if args.dir is None and len(paths) < 4:
        raise RangeError("give --dir or all four of --qconfig/--qinput/--qoperators/--qopseq")
    return load_bundle(args.dir, paths)


def _engine(bundle, args):
    return PathSumEngine(
        bundle.circuit, bundle.input,
        mode=args.mode,
        cache_capacity=args.cache_cap,
        hybrid_prefix=args.hybrid_prefix,
        mem_budget=args.mem_budget,
    )


def cmd_run(args, out) -> int:
    bundle = _bundle(args)
    engine = _engine(bundle, args)
    t0 = time.perf_counter()
    result = run(engine, Rng(args.seed), trace=args.trace)
    wall = time.perf_counter() - t0
    for line in BANNER:
        print(line, file=out)
    print(f"SEQCSim::run(): Initial state is {format_state(bundle.input)} ==> {format_amp(1 + 0j)}.", file=out)
    if result.trace is not None:
        for rec in result.trace:
            print(f"SEQCSim::Bohm_step_forwards(): (tPC={rec.pc})", file=out)
            print(f"The new current state is {format_state(rec.state)} ==> {format_amp(rec.amp)}.", file=out)
    else:
        print(f"SEQCSim::run(): Final state is {format_state(result.state)} ==> {format_amp(result.amp)}.", file=out)
    t = bundle.circuit.n_ops
    print(f"SEQCSim::done(): The PC value {t} is >= the number of operations {t}.", file=out)
    print("We are done!", file=out)
    if args.metrics:
        write_csv(args.metrics, METRICS_SCHEMA, METRICS_COLUMNS, [metrics_row(engine, wall)])
    return EXIT_OK


def cmd_amp(args, out) -> int:
    bundle = _bundle(args)
    if args.state is None:
        raise RangeError("--state is required")
    state = BasisState.from_string(args.state)
    if state.width != bundle.circuit.width:
        raise RangeError(f"state literal has {state.width} bits, circuit has {bundle.circuit.width}")
    pc = bundle.circuit.n_ops if args.pc is None else args.pc
    engine = _engine(bundle, args)
    t0 = time.perf_counter()
    amp = engine.amplitude(state, pc)
    wall = time.perf_counter() - t0
    print(format_amp(amp), file=out)
    row = [metrics_row(engine, wall)]
    write_csv(out, METRICS_SCHEMA, METRICS_COLUMNS, row)
    if args.metrics:
        write_csv(args.metrics, METRICS_SCHEMA, METRICS_COLUMNS, row)
    return EXIT_OK


def cmd_oracle(args, out) -> int:
    bundle = _bundle(args)
    budget = args.mem_budget if args.mem_budget is not None else DEFAULT_DENSE_BUDGET
    dense = simulate_dense(bundle, args.pc, max_bytes=budget)
    probs = born_distribution(dense)
    keep = [(float(p), x) for x, p in enumerate(probs) if p > 1e-12]
    keep.sort(key=lambda px: (-px[0], px[1]))
    w = bundle.circuit.width
    for p, x in keep:
        print(f"{BasisState(x, w)}  {format_number(p)}  {format_amp(complex(dense.amplitudes[x]))}", file=out)
    return EXIT_OK


def cmd_gen(args, out) -> int:
    if args.kind != "adder":
        raise RangeError(f"unknown generator {args.kind!r}")
    if args.bits is None or args.out is None:
        raise RangeError("gen adder needs --bits and --out")
    bundle = gen_draper(AdderSpec(args.bits, args.a, args.b))
    for p in write_bundle(bundle, args.out):
        print(p, file=out)
    return EXIT_OK


def bench_rows(min_n: int, max_n: int, seed: int = 0, a: int = 1, b: int = 1,
               cache_settings=(0, DEFAULT_CACHE_CAPACITY)) -> list:
    """One seeded iterative-kernel trajectory per (n, cache setting)."""
    if min_n > max_n:
        raise RangeError("--min must not exceed --max")
    rows = []
    prev = {}
    for n in range(min_n, max_n + 1):
        mask = (1 << n) - 1
        bundle = gen_draper(AdderSpec(n, a & mask, b & mask))
        for cap in cache_settings:
            engine = PathSumEngine(bundle.circuit, bundle.input, mode="iterative", cache_capacity=cap)
            t0 = time.perf_counter()
            run(engine, Rng(seed), trace=False)
            wall = time.perf_counter() - t0
            row = {"n": n, "cache_capacity": cap, **metrics_row(engine, wall)}
            calls = engine.metrics.calc_amp_calls
            row["call_ratio"] = f"{calls / prev[cap]:.4f}" if cap in prev and prev[cap] else ""
            prev[cap] = calls
            rows.append(row)
    return rows


def cmd_bench(args, out) -> int:
    rows = bench_rows(args.min, args.max, args.seed, args.a, args.b)
    if args.out:
        write_csv(args.out, BENCH_SCHEMA, BENCH_COLUMNS, rows)
    else:
        write_csv(out, BENCH_SCHEMA, BENCH_COLUMNS, rows)
    ratios = [r for r in rows if r["cache_capacity"] == 0 and r["call_ratio"]]
    for r in ratios:
        print(f"# 2x{r['n']} / 2x{r['n'] - 1} cache-off calc_amp_calls ratio: {r['call_ratio']}", file=out)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="qpathsim", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"qpathsim {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    def bundle_args(sp):
        sp.add_argument("--dir", help="directory holding the four q*.txt files")
        for name in FILENAMES:
            stem = name.split(".")[0]
            sp.add_argument(f"--{stem}", dest=stem, help=f"explicit path to {name}")

    def engine_args(sp):
        sp.add_argument("--mode", choices=("recursive", "iterative"), default="iterative")
        sp.add_argument("--cache-cap", type=int, default=DEFAULT_CACHE_CAPACITY, help="LRU entries, 0 = off")
        hy = sp.add_mutually_exclusive_group()
        hy.add_argument("--hybrid-prefix", type=int, default=None, help="dense-simulate the first P ops")
        hy.add_argument("--mem-budget", type=int, default=None, help="dense snapshot budget in bytes")
        sp.add_argument("--metrics", help="write one metrics CSV row here")

    sp = sub.add_parser("run", help="walk one trajectory and print its trace")
    bundle_args(sp)
    engine_args(sp)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--trace", action=argparse.BooleanOptionalAction, default=True)
    sp.set_defaults(func=cmd_run)

    sp = sub.add_parser("amp", help="amplitude of one basis state after PC ops")
    bundle_args(sp)
    engine_args(sp)
    sp.add_argument("--state", help="bit string, most significant bit first")
    sp.add_argument("--pc", type=int, default=None)
    sp.set_defaults(func=cmd_amp)

    sp = sub.add_parser("oracle", help="dense state-vector simulation")
    bundle_args(sp)
    sp.add_argument("--pc", type=int, default=None)
    sp.add_argument("--mem-budget", type=int, default=None, help="dense budget in bytes")
    sp.set_defaults(func=cmd_oracle)

    sp = sub.add_parser("gen", help="write a generated circuit bundle")
    sp.add_argument("kind", choices=("adder",))
    sp.add_argument("--bits", type=int, help="operand width n")
    sp.add_argument("--a", type=int, default=0)
    sp.add_argument("--b", type=int, default=0)
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_gen)

    sp = sub.add_parser("bench", help="counter-based scaling sweep over adder sizes")
    sp.add_argument("--min", type=int, default=2)
    sp.add_argument("--max", type=int, default=6)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--a", type=int, default=1)
    sp.add_argument("--b", type=int, default=1)
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_bench)
    return p


def main(argv=None, out=None, err=None) -> int:
    out = out if out is not None else sys.stdout
    err = err if err is not None else sys.stderr
    args = build_parser().parse_args(argv)
    try:
        return args.func(args, out)
    except ParseError as exc:
        print(f"parse error: {exc}", file=err)
        return EXIT_PARSE
    except NumericalDegeneracyError as exc:
        print(f"numerical error: {exc}", file=err)
        return EXIT_NUMERIC
    except CapacityError as exc:
        print(f"capacity error: {exc}", file=err)
        return EXIT_CAPACITY
    except (RangeError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=err)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
