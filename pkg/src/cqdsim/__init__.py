"""Monte Carlo model of electron spin flip in the Frisch-Segre two-stage Stern-Gerlach experiment."""

__version__ = "0.1.0"

from .collapse import CollapsedState, FlipConvention, FlipStatistics, branch, flip_fraction
from .config import EXPERIMENT_CURRENTS, ConfigError, RunConfig
from .experiment import ExperimentDataset, SweepResult, r_squared, run_sweep
from .majorana_ode import FlightSolution, OdeParams, integrate
from .model import DerivedParams, PhysicalConstants, derive
from .sampling import Distribution, NuclearOrientation

__all__ = [
    "CollapsedState",
    "ConfigError",
    "DerivedParams",
    "Distribution",
    "ExperimentDataset",
    "FlightSolution",
    "FlipConvention",
    "FlipStatistics",
    "NuclearOrientation",
    "OdeParams",
    "EXPERIMENT_CURRENTS",
    "PhysicalConstants",
    "RunConfig",
    "SweepResult",
    "branch",
    "derive",
    "flip_fraction",
    "integrate",
    "r_squared",
    "run_sweep",
]
