"""Quantum time-of-arrival distributions and Wigner's minimum time-energy uncertainty states."""
from .arrival import ArrivalSeries, arrival_general, figure2_run, kijowski_free
from .propagate import EvolutionParams, Potential, current_density, evolve_free, evolve_potential
from .qgrid import Grid, PhysicalConstants, WaveFunction, expectation, make_grid, to_momentum
from .states import GaussianSpec, crossing_amplitude, gaussian
from .wigner import (
    EtaProfile,
    MinUncertaintyState,
    energy_amplitude,
    epsilon_squared,
    minimize_uncertainty,
    tau_from_eta,
    tau_squared,
    wigner_curve,
)

__version__ = "0.1.0"
