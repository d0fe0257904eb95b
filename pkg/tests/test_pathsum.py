import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import random_circuit
from qpathsim.errors import CapacityError, RangeError
from qpathsim.model import BasisState, Circuit, Operation, controlled_phase, hadamard, with_local_index_bits
from qpathsim.oracle import dense_history
from qpathsim.pathsum import AmpCache, PathSumEngine, neighbors, step_amplitudes

ENGINE_VARIANTS = [
    ("recursive", 0),
    ("recursive", 1 << 20),
    ("iterative", 0),
    ("iterative", 1 << 20),
]


def _engine(bundle, mode, cap, **kw):
    return PathSumEngine(bundle.circuit, bundle.input, mode=mode, cache_capacity=cap, **kw)


def _phase_chain(t, width=3):
    ops = []
    table = []
    for k in range(t):
        m = controlled_phase(7.0 * (k + 1), name=f"p{k}")
        table.append(m)
        ops.append(Operation(m, (k % width, (k + 1) % width)))
    return Circuit(width, (), tuple(table), tuple(ops))


# ---------------------------------------------------------------- helpers


def test_neighbors_examples():
    s = BasisState.from_string("00010001")
    h_op = Operation(hadamard(), (3,))
    assert [str(x) for x in neighbors(s, h_op)] == ["00010001", "00011001"]
    phi_op = Operation(controlled_phase(45), (5, 2))
    nb = neighbors(s, phi_op)
    assert [str(x) for x in nb] == ["00010001", "00010101", "00110001", "00110101"]
    assert s in nb
    assert neighbors(0b101, Operation(hadamard(), (1,))) == [0b101, 0b111]


def test_step_amplitudes_examples():
    np.testing.assert_allclose(step_amplitudes([1, 0], hadamard()), [0.7071067812, 0.7071067812], atol=1e-10)
    np.testing.assert_allclose(step_amplitudes([0, 0, 0, 1], controlled_phase(90)), [0, 0, 0, 1j], atol=0)
    with pytest.raises(RangeError):
        step_amplitudes([1, 0, 0], hadamard())


@given(st.lists(st.floats(-1, 1), min_size=4, max_size=4))
def test_step_amplitudes_preserves_norm(v):
    x = np.array(v[:2]) + 1j * np.array(v[2:])
    if np.linalg.norm(x) < 1e-3:
        return
    x = x / np.linalg.norm(x)
    assert abs(np.linalg.norm(step_amplitudes(x, hadamard())) - 1) <= 1e-12


# ---------------------------------------------------------------- calc_amp examples


@pytest.mark.parametrize("mode, cap", ENGINE_VARIANTS)
def test_calc_amp_reference_values(adder4, mode, cap):
    e = _engine(adder4, mode, cap)
    assert e.amplitude(BasisState.from_string("00010001"), 0) == 1 + 0j
    assert e.amplitude(BasisState.from_string("00011001"), 0) == 0
    a1 = e.amplitude(BasisState.from_string("00011001"), 1)
    assert a1 == pytest.approx(0.707107, abs=5e-7) and a1.imag == 0
    assert abs(e.amplitude(BasisState.from_string("00010010"), 30) - 1) <= 1e-9


def test_calc_amp_errors(adder4):
    e = _engine(adder4, "iterative", 0)
    with pytest.raises(RangeError):
        e.calc_amp(0, 31)
    with pytest.raises(RangeError):
        e.calc_amp_iterative(0, -1)
    with pytest.raises(RangeError):
        e.calc_amp(BasisState(0, 4), 3)
    with pytest.raises(ValueError):
        PathSumEngine(adder4.circuit, adder4.input, mode="sideways")


# ---------------------------------------------------------------- oracle equivalence

# deep random circuits are exponential without memoisation, so they run cached
CORPUS = [
    (s, w, t, cap)
    for s, (w, t, cap) in enumerate([(3, 12, 0), (4, 13, 0), (5, 11, 0), (6, 10, 0), (4, 24, 1 << 16), (2, 40, 1 << 16)])
]


@pytest.mark.parametrize("seed, width, n_ops, cap", CORPUS)
@pytest.mark.parametrize("mode", ["recursive", "iterative"])
def test_matches_dense_oracle_random(seed, width, n_ops, cap, mode):
    b = random_circuit(seed, width, n_ops)
    history = dense_history(b.circuit, b.input)
    e = _engine(b, mode, cap)
    for pc in range(n_ops + 1):
        psi = history[pc].amplitudes
        got = np.array([e.amplitude(x, pc) for x in range(1 << width)])
        assert np.max(np.abs(got - psi)) <= 1e-9


def test_matches_dense_oracle_width8_phase_heavy():
    b = random_circuit(77, 8, 40, kinds=("phi", "phi", "phi", "phi", "phi", "H"))
    history = dense_history(b.circuit, b.input)
    e = _engine(b, "iterative", 0)
    for pc in range(0, 41, 5):
        got = np.array([e.amplitude(x, pc) for x in range(256)])
        assert np.max(np.abs(got - history[pc].amplitudes)) <= 1e-9


@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_matches_dense_oracle_adders(adder_bundles, n):
    b = adder_bundles(n, 1 % (1 << n), (1 << n) - 1)
    history = dense_history(b.circuit, b.input)
    e = _engine(b, "iterative", 1 << 20)
    for pc in range(b.circuit.n_ops + 1):
        got = np.array([e.amplitude(x, pc) for x in range(1 << b.circuit.width)])
        assert np.max(np.abs(got - history[pc].amplitudes)) <= 1e-9


@pytest.mark.parametrize("seed", range(4))
def test_neighbourhood_norm_conservation(seed):
    b = random_circuit(300 + seed, 5, 10)
    e = _engine(b, "iterative", 0)
    rng = np.random.default_rng(seed)
    for pc, op in enumerate(b.circuit.ops):
        x = int(rng.integers(32))
        pre = [e.amplitude(y, pc) for y in neighbors(x, op)]
        post = step_amplitudes(pre, op.operator)
        assert abs(np.linalg.norm(pre) - np.linalg.norm(post)) <= 1e-12
        direct = [e.amplitude(y, pc + 1) for y in neighbors(x, op)]
        np.testing.assert_allclose(post, direct, atol=1e-12)


# ---------------------------------------------------------------- counters


@pytest.mark.parametrize("mode, cap", ENGINE_VARIANTS)
def test_trivial_chain_is_linear(mode, cap):
    c = _phase_chain(50)
    e = PathSumEngine(c, 0b111, mode=mode, cache_capacity=cap)
    e.amplitude(0b111, 50)
    assert e.metrics.calc_amp_calls == 51
    assert e.metrics.max_depth == 50


@pytest.mark.parametrize("seed", range(6))
def test_branching_bound(seed):
    b = random_circuit(400 + seed, 5, 14, kinds=("H", "phi", "phi"))
    t = b.circuit.n_ops
    h = b.circuit.nontrivial_count
    e = _engine(b, "recursive", 0)
    for x in range(32):
        e.reset_metrics()
        e.amplitude(x, t)
        assert e.metrics.calc_amp_calls <= (t + 1) * 2**h
        assert e.metrics.max_depth <= t


def test_peak_stack_bounded_by_ops(adder4):
    e = _engine(adder4, "iterative", 0)
    for x in (0b00010010, 0b00011001, 0):
        e.amplitude(x, 30)
    assert e.metrics.peak_stack_entries <= 30
    assert e.metrics.max_depth == 30


def reachable_nodes(circuit, state, pc):
    """Every (pc, state) the recursion must visit, by breadth-first expansion."""
    seen = set()
    frontier = {state}
    for level in range(pc, 0, -1):
        seen |= {(level, s) for s in frontier}
        op = circuit.ops[level - 1]
        nxt = set()
        for s in frontier:
            if op.operator.trivial:
                nxt.add(s)
            else:
                nxt |= {with_local_index_bits(s, op.operands, i) for i in range(op.operator.dim)}
        frontier = nxt
    return seen, frontier


@pytest.mark.parametrize("mode", ["recursive", "iterative"])
def test_full_cache_computes_each_node_once(adder_bundles, mode):
    b = adder_bundles(3, 5, 6)
    t = b.circuit.n_ops
    cap = (1 << b.circuit.width) * (t + 1)
    e = _engine(b, mode, cap)
    target = 0b110011
    got = e.amplitude(target, t)
    inner, leaves = reachable_nodes(b.circuit, target, t)
    assert e.metrics.calc_amp_calls <= len(inner) + (1 << b.circuit.width)
    assert e.metrics.cache_misses == len(inner)
    assert len(e.cache) == len(inner)
    ref = _engine(b, mode, 0).amplitude(target, t)
    assert abs(got - ref) <= 1e-12


@pytest.mark.parametrize("cap", [1, 2, 7, 64, 1000])
@pytest.mark.parametrize("mode", ["recursive", "iterative"])
def test_cache_soundness_any_capacity(adder_bundles, mode, cap):
    b = adder_bundles(3, 2, 3)
    plain = _engine(b, mode, 0)
    cached = _engine(b, mode, cap)
    for x in range(0, 64, 3):
        for pc in (5, 12, 18):
            assert abs(cached.amplitude(x, pc) - plain.amplitude(x, pc)) <= 1e-12
    assert len(cached.cache) <= cap
    assert cached.metrics.cache_hits + cached.metrics.cache_misses == cached.cache.hits + cached.cache.misses


def test_amp_cache_lru():
    c = AmpCache(2)
    c.put("a", 1)
    c.put("b", 2)
    assert c.get("a") == 1
    c.put("c", 3)
    assert "b" not in c and "a" in c and "c" in c
    assert c.get("b") is None
    assert (c.hits, c.misses) == (1, 1)
    z = AmpCache(0)
    z.put("a", 1)
    assert len(z) == 0
    with pytest.raises(RangeError):
        AmpCache(-1)


# ---------------------------------------------------------------- kernels agree


def test_iterative_equals_recursive_bitwise_random():
    rng = np.random.default_rng(2024)
    checked = 0
    for seed in range(10):
        b = random_circuit(500 + seed, 6, 14)
        rec = _engine(b, "recursive", 0)
        it = _engine(b, "iterative", 0)
        itc = _engine(b, "iterative", 256)
        for _ in range(100):
            x = int(rng.integers(64))
            pc = int(rng.integers(b.circuit.n_ops + 1))
            r = rec.calc_amp(x, pc)
            assert it.calc_amp_iterative(x, pc) == r
            assert itc.calc_amp_iterative(x, pc) == r
            checked += 1
    assert checked == 1000


def test_recursive_and_iterative_counters_agree(adder4):
    for cap in (0, 100):
        rec = _engine(adder4, "recursive", cap)
        it = _engine(adder4, "iterative", cap)
        for x in (0b00010010, 0b10101010):
            rec.amplitude(x, 30)
            it.amplitude(x, 30)
        assert rec.metrics == it.metrics


# ---------------------------------------------------------------- hybrid


@pytest.mark.parametrize("p", [0, 1, 7, 18])
def test_hybrid_matches_plain(adder_bundles, p):
    b = adder_bundles(3, 3, 5)
    plain = _engine(b, "iterative", 0)
    for mode in ("recursive", "iterative"):
        hy = _engine(b, mode, 0, hybrid_prefix=p)
        for x in range(64):
            assert abs(hy.amplitude(x, 18) - plain.amplitude(x, 18)) <= 1e-9
        for pc in range(p):
            for x in (0, 0b001011, 0b101101):
                assert abs(hy.amplitude(x, pc) - plain.amplitude(x, pc)) <= 1e-12


def test_hybrid_budget(adder_bundles):
    b = adder_bundles(3, 1, 1)
    e = _engine(b, "iterative", 0, mem_budget=64 * 16)
    assert e.base_pc == 18
    e.reset_metrics()
    assert abs(e.amplitude(0b001010, 18) - 1) <= 1e-9
    assert e.metrics.calc_amp_calls == 1
    with pytest.raises(CapacityError, match="1024 bytes"):
        _engine(b, "iterative", 0, mem_budget=64 * 16 - 1)
    with pytest.raises(ValueError):
        _engine(b, "iterative", 0, mem_budget=10**6, hybrid_prefix=3)
    with pytest.raises(RangeError):
        _engine(b, "iterative", 0, hybrid_prefix=19)


# ---------------------------------------------------------------- depth


def test_recursive_refuses_huge_circuits():
    c = _phase_chain(10_001, width=2)
    e = PathSumEngine(c, 0b11, mode="recursive", cache_capacity=0)
    with pytest.raises(RangeError, match="iterative"):
        e.calc_amp(0, 1)
    assert e.calc_amp_iterative(0b11, 10_001) == pytest.approx(
        np.prod([m.entries[3, 3] for m in c.operators]), abs=1e-9
    )


def test_deep_recursion_beyond_default_limit():
    c = _phase_chain(3000, width=2)
    e = PathSumEngine(c, 0b11, mode="recursive", cache_capacity=0)
    ref = PathSumEngine(c, 0b11, mode="iterative", cache_capacity=0)
    assert e.calc_amp(0b11, 3000) == ref.calc_amp_iterative(0b11, 3000)
    assert e.metrics.calc_amp_calls == 3001
