"""Block-diagonal RWA solver for qudits coupled to single-mode resonators."""

__version__ = "0.1.0"

from .model import (
    Explicit,
    QuditSpec,
    ResonatorSpec,
    SpecError,
    SystemSpec,
    TransmonParams,
    Uniform,
    load_device,
    make_qubit,
    make_system,
    make_transmon_qutrit,
    spec_from_dict,
    validate,
)
from .sectors import BasisState, Sector, enumerate_sector, excitation_number, sector_dimensions
from .assembly import assemble_sector, assemble_truncated_full, block_diagonality_check
from .eigen import ConvergenceError, EigenDecomposition, jacobi_eigh, spectrum
from .analytic import JCParams, jc_ground, jc_strip, rwa_second_order, tc_one_excitation
from .evolution import build_propagator, evolve, expectation, make_state
