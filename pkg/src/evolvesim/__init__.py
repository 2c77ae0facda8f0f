"""Simulation of halfspace learning by mutation and performance-based
selection over finite distributions, plus a correlational-query Fourier lab.
"""

from .domain import (
    BoundedLinearRep,
    FiniteDistribution,
    Halfspace,
    clip_p1,
    majority_halfspace,
    margin,
    scaled_hypercube_uniform,
    zero_rep,
)
from .driver import (
    EvolutionParams,
    Trajectory,
    derive_params,
    evolve,
    loss_schedule_evolve,
    monotonicity_check,
)
from .kernels import backend_name
from .losses import (
    Loss,
    convex_combination,
    linear_loss,
    lperf_empirical,
    lperf_true,
    power_loss,
    unscaled_quadratic,
    verify_well_behaved,
)
from .mutation import NeighborhoodSpec, alpha_schedule, theoretical_alpha
from .selection import SelectionOutcome, SelectionParams, classify, sel_nb

__version__ = "0.1.0"
