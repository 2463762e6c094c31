"""Tight-binding Dirac operator with Bernoulli disorder: transfer matrices,
Lyapunov exponents, exact wavepacket dynamics and localization experiments."""

__version__ = "0.1.0"

from .lattice import (LatticeConfig, SpinorState, HermitianOperator, apply_d, apply_d_star,
                      build_dirac, build_schrodinger, velocity_operator)
from .disorder import DisorderSpec, PotentialRealization, sample_potential
from .transfer import (CriticalEnergySet, LyapunovEstimate, critical_energies,
                       lyapunov_exponent, propagate_transfer, spectral_radius, transfer_matrix)
from .dynamics import (EvolutionPlan, MomentSeries, diagonalize, evolve_state, moment_series,
                       second_moment, time_averaged_moment, mean_position_and_velocity)
from .analysis import (ExperimentReport, GrowthFit, fit_growth_exponent,
                       delocalization_experiment, localization_experiment, mass_gap_experiment,
                       nrl_experiment, zitterbewegung_experiment, eigenfunction_decay)
