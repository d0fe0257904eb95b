"""Space-efficient quantum circuit simulation by predecessor path sums."""

__version__ = "0.1.0"

from .errors import CapacityError, NumericalDegeneracyError, ParseError, RangeError, SimError
from .model import (
    BasisState,
    Circuit,
    Operation,
    OperatorMatrix,
    Register,
    check_unitary,
    controlled_phase,
    hadamard,
    local_index,
    with_local_index,
)
from .pathsum import AmpCache, Metrics, PathSumEngine, calc_amp, calc_amp_iterative, neighbors, step_amplitudes
from .bohm import Rng, TrajectoryState, run, sample_index, step_forward
from .oracle import (
    DenseState,
    apply_op,
    born_distribution,
    exhaustive_trajectory_distribution,
    init_dense,
    simulate_circuit,
    simulate_dense,
)
from .qfile import CircuitBundle, load_bundle, parse_bundle, serialize_bundle, write_bundle
from .adder import AdderSpec, gen_draper, operator_name

__all__ = [name for name in dir() if not name.startswith("_")]
