from pathlib import Path

import numpy as np
import pytest

from qpathsim.adder import AdderSpec, gen_draper
from qpathsim.model import BasisState, Circuit, Operation, OperatorMatrix, controlled_phase, hadamard
from qpathsim.qfile import CircuitBundle

GOLDEN = Path(__file__).parent / "golden"


def random_unitary(rng, dim):
    z = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    q, r = np.linalg.qr(z)
    return q * (np.diag(r) / np.abs(np.diag(r)))


def random_circuit(seed, width, n_ops, kinds=("H", "phi", "u1", "u2")):
    """Random circuit over H, controlled phases and dense random 1- and 2-bit unitaries."""
    rng = np.random.default_rng(seed)
    h = hadamard()
    table = [h]
    ops = []
    for k in range(n_ops):
        kind = kinds[rng.integers(len(kinds))]
        if kind in ("phi", "u2") and width < 2:
            kind = "H"
        if kind == "H":
            m = h
        elif kind == "phi":
            m = controlled_phase(float(rng.uniform(-180, 180)), name=f"phi{k}")
        elif kind == "u1":
            m = OperatorMatrix(f"u1_{k}", 1, random_unitary(rng, 2))
        else:
            m = OperatorMatrix(f"u2_{k}", 2, random_unitary(rng, 4))
        if m is not h:
            table.append(m)
        operands = tuple(int(q) for q in rng.choice(width, size=m.arity_bits, replace=False))
        ops.append(Operation(m, operands))
    inp = BasisState(int(rng.integers(1 << width)), width)
    return CircuitBundle(Circuit(width, (), tuple(table), tuple(ops)), inp)


@pytest.fixture(scope="session")
def adder4():
    return gen_draper(AdderSpec(4, 1, 1))


@pytest.fixture(scope="session")
def adder_bundles():
    cache = {}

    def get(n, a=1, b=1):
        key = (n, a, b)
        if key not in cache:
            cache[key] = gen_draper(AdderSpec(n, a, b))
        return cache[key]

    return get
