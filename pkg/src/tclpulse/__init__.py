"""Second-order time-convolutionless dynamics of a qubit under flip sequences.

A qubit couples to an Ohmic boson bath through a dephasing channel and a
decay channel.  Instantaneous X and Z flips are handled in the toggling
frame, where they turn into sign patterns in the time kernels of the
decay and dephasing rates.
"""
from .evolve import PLUS, PLUS_I, PositivityWarning, QubitState, Trajectory, convergence_check, evolve, observables
from .model import (PhysicalParams, PulseSchedule, SegmentDecomposition, SpectralDensity, counters,
                    decompose, make_bb, make_bp, params_from_tau, signs, thermal_weight)
from .quadrature import QuadratureError, QuadratureSpec
from .rates import (RateEngine, RateSet, eta11, gamma10_im, gamma10_re, gamma11, kernel_decay,
                    kernel_dephasing, kernel_population, rate_set, segment_cos, segment_exp)

__version__ = "0.1.0"

__all__ = [
    "PhysicalParams", "PulseSchedule", "SegmentDecomposition", "SpectralDensity", "counters",
    "decompose", "make_bb", "make_bp", "params_from_tau", "signs", "thermal_weight",
    "QuadratureError", "QuadratureSpec", "RateEngine", "RateSet", "eta11", "gamma10_im",
    "gamma10_re", "gamma11", "kernel_decay", "kernel_dephasing", "kernel_population",
    "rate_set", "segment_cos", "segment_exp", "PLUS", "PLUS_I", "PositivityWarning",
    "QubitState", "Trajectory", "convergence_check", "evolve", "observables",
]
