"""Spectra of spiral waves on large disks in exponentially weighted spaces."""

from .kinetics import BarkleyParams, ReactionModel, barkley_model, build_model, jacobian
from .discretize import IntervalGrid, PolarGrid, SparseOperator, assemble_system_operator
from .wavetrain import WaveTrain, solve_wavetrain, wavetrain_for_frequency
from .spatial import (
    BlochFamily,
    SpatialSpectrum,
    WeightPlan,
    absolute_spectrum,
    select_weight,
    spatial_spectrum,
    spectral_gap,
)
from .spiral import (
    SpiralSolution,
    condition_map,
    linearization,
    pseudospectrum_field,
    solve_spiral,
    spiral_spectrum,
)

__version__ = "0.1.0"
