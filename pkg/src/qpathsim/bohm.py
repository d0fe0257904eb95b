"""Single-trajectory stochastic evolution of a classical basis state.

The walker holds one basis state and its amplitude. At each nontrivial gate
it computes the post-gate amplitudes of its whole neighbourhood (pre-gate
amplitudes come from the path-sum engine, except its own which it carries),
and jumps to a neighbour with probability proportional to the squared
magnitude. Because gates act block-diagonally on neighbourhoods and preserve
each block's norm, the walker's final distribution is exactly the Born
distribution of the full final wavefunction.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple, Sequence

import numpy as np

from .errors import NumericalDegeneracyError, RangeError
from .model import BasisState, local_index_bits, with_local_index_bits
from .pathsum import PathSumEngine, step_amplitudes

_MASK64 = (1 << 64) - 1
DEGENERACY_THRESHOLD = 1e-18


def splitmix64(x: int) -> int:
    z = (x + 0x9E3779B97F4A7C15) & _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


class Rng:
    """xorshift64* (Vigna 2016) seeded through splitmix64.

    Pure integer arithmetic, so a seed produces the same stream on every
    platform. ``split()`` derives an independent child generator.
    """

    __slots__ = ("state",)

    def __init__(self, seed: int = 0):
        s = splitmix64(int(seed) & _MASK64)
        self.state = s if s else 0x9E3779B97F4A7C15

    def next_u64(self) -> int:
        x = self.state
        x ^= x >> 12
        x ^= (x << 25) & _MASK64
        x ^= x >> 27
        self.state = x
        return (x * 0x2545F4914F6CDD1D) & _MASK64

    def uniform(self) -> float:
        """Uniform double in [0, 1) with 53 random bits."""
        return (self.next_u64() >> 11) * (1.0 / (1 << 53))

    def split(self) -> "Rng":
        return Rng(self.next_u64())


def sample_index(probs: Sequence[float], u: float) -> int:
    """Smallest i whose cumulative probability exceeds ``u``."""
    if len(probs) == 0:
        raise RangeError("cannot sample from an empty distribution")
    cum = 0.0
    last = -1
    for i, p in enumerate(probs):
        if p > 0.0:
            cum += p
            last = i
            if cum > u:
                return i
    # u landed in the rounding gap above the final cumulative sum
    if last < 0:
        raise RangeError("distribution has no positive entries")
    return last


class TraceRecord(NamedTuple):
    pc: int
    state: BasisState
    amp: complex


@dataclass
class TrajectoryState:
    cur_bits: int
    cur_amp: complex
    pc: int
    rng: Rng
    width: int
    trace: list | None = field(default_factory=list)

    @property
    def cur_state(self) -> BasisState:
        return BasisState(self.cur_bits, self.width)


class RunResult(NamedTuple):
    state: BasisState
    amp: complex
    trace: list | None


def transition(engine: PathSumEngine, bits: int, cur_amp: complex, pc: int):
    """Neighbours of ``bits`` under operation ``pc``, their post-gate amplitudes, and jump probabilities."""
    op = engine.circuit.ops[pc]
    m = op.operator
    row = local_index_bits(bits, op.operands)
    nbrs = [with_local_index_bits(bits, op.operands, i) for i in range(m.dim)]
    pre = [cur_amp if i == row else engine.amplitude(y, pc) for i, y in enumerate(nbrs)]
    post = step_amplitudes(pre, m)
    weights = post.real ** 2 + post.imag ** 2
    total = float(weights.sum())
    if total < DEGENERACY_THRESHOLD:
        raise NumericalDegeneracyError(
            f"operation #{pc} ({m.name}): neighbourhood norm^2 {total:.3g} below {DEGENERACY_THRESHOLD}"
        )
    return nbrs, post, weights / total


def start(engine: PathSumEngine, rng: Rng, trace: bool = True) -> TrajectoryState:
    return TrajectoryState(engine.input_bits, 1 + 0j, 0, rng, engine.circuit.width, [] if trace else None)


def step_forward(traj: TrajectoryState, engine: PathSumEngine) -> TrajectoryState:
    """Advance ``traj`` across operation ``traj.pc`` (in place) and return it."""
    t = engine.circuit.n_ops
    if not 0 <= traj.pc < t:
        raise RangeError(f"pc {traj.pc} is not before the end of the {t}-operation circuit")
    op = engine.circuit.ops[traj.pc]
    if op.operator.trivial:
        row = local_index_bits(traj.cur_bits, op.operands)
        traj.cur_amp = engine.circuit.compiled.py_ops[traj.pc][3][row][row] * traj.cur_amp
    else:
        nbrs, post, probs = transition(engine, traj.cur_bits, traj.cur_amp, traj.pc)
        i = sample_index(probs, traj.rng.uniform())
        traj.cur_bits = nbrs[i]
        traj.cur_amp = complex(post[i])
    traj.pc += 1
    if traj.trace is not None:
        traj.trace.append(TraceRecord(traj.pc - 1, traj.cur_state, traj.cur_amp))
    return traj


def run(engine: PathSumEngine, rng: Rng, trace: bool = True, reset: bool = True) -> RunResult:
    """Walk one trajectory from the input state through the whole circuit.

    With ``reset`` (the default) the engine's cache and counters start empty,
    so metrics and results depend only on (seed, circuit).
    """
    if reset:
        engine.clear_cache()
        engine.reset_metrics()
    traj = start(engine, rng, trace)
    while traj.pc < engine.circuit.n_ops:
        step_forward(traj, engine)
    return RunResult(traj.cur_state, traj.cur_amp, traj.trace)


def final_distribution_exact(engine: PathSumEngine) -> np.ndarray:
    """Exact final-state distribution of this module's walk, by full enumeration.

    Uses :func:`transition` itself (so path-sum amplitudes), merging paths that
    meet at the same (pc, state). Exponential in width; meant for small circuits.
    """
    circuit = engine.circuit
    frontier = {engine.input_bits: (1.0, 1 + 0j)}
    for pc, op in enumerate(circuit.ops):
        nxt: dict = {}
        for x, (p, amp) in frontier.items():
            if op.operator.trivial:
                row = local_index_bits(x, op.operands)
                moves = [(x, 1.0, complex(op.operator.entries[row, row]) * amp)]
            else:
                nbrs, post, probs = transition(engine, x, amp, pc)
                moves = [(y, float(q), complex(a)) for y, q, a in zip(nbrs, probs, post) if q > 0.0]
            for y, q, a in moves:
                old = nxt.get(y)
                nxt[y] = (q * p + (old[0] if old else 0.0), a)
        frontier = nxt
    out = np.zeros(1 << circuit.width)
    for x, (p, _) in frontier.items():
        out[x] += p
    return out
