"""Reachable sets and autonomy of switched systems with a decision lag."""

from .errors import ContractError, InadmissibleDecisionError
from .grid import Grid4D, build_grid, upwind_gradients
from .hamiltonian import (
    NumericalHamiltonian,
    cfl_timestep,
    dissipation_constants,
    exact_hamiltonian,
    llf_flux,
)
from .model import BallSet, BoxSet, HybridModel, LevelSetFn, TabulatedSet, VehicleModel
from .reachability import Autonomy, autonomy, min_value_maps, reachable_mask
from .solver import SchemeConfig, SolveResult, Solver, initialize, interior_update, run, switch_row_update

__version__ = "0.1.0"
