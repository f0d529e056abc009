"""Few-photon Bose-Einstein condensation in a dye-filled microcavity.

Library layout:
    core        cavity/dye configuration, mode ladder, thermalisation ratio
    equilibrium Bose-Einstein populations, fits, condensation criteria
    noneq       driven-dissipative multimode rate model and sweeps
    microlaser  single-mode threshold model and fits
    coherence   first-order coherence g1 and coherence times
    numerics    root finding, ODE integration, Newton, least squares
    cli         `pbec` command-line front end
"""

from .constants import CONSTANTS, PhysicalConstants
from .core import (CavityConfig, DyeModel, ModeGroup, ModeLadder, ResolvedMode,
                   build_mode_ladder, derive_trap_frequency,
                   kennard_stepanov_ratio, load_dye_spectra, reference_dye,
                   resolved_mode_list, save_dye_spectra, thermalisation_ratio)
from .equilibrium import (BeFitResult, Criterion, CriterionConfig,
                          EquilibriumParams, Phase, PhaseLabel, be_population,
                          classify_condensation, critical_number_2dho, fit_be,
                          level_populations, solve_mu, total_population)
from .microlaser import (MicrolaserFitResult, MicrolaserParams, fit_microlaser,
                         microlaser_curve, microlaser_n)
from .coherence import (CoherenceFit, CoherenceSeries, Interferogram,
                        coherence_time_single_mode, collapse_time,
                        fit_exponential_coherence, g1_thermal,
                        is_high_n_discrepancy_region, schawlow_townes_tau,
                        simulate_interferogram)
from .noneq import (NoneqParams, OverlapMatrix, PhaseMapResult, PumpConfig,
                    SimState, SpatialGrid, SweepResult, build_overlaps,
                    evolve, make_noneq_params, make_spatial_grid,
                    mode_intensity_profiles, rate_derivatives,
                    single_mode_params, steady_state, sweep_cutoff, sweep_pump)
from .numerics import (LsqResult, OdeResult, SolverConfig, find_root,
                       integrate_ode, least_squares, lm_fit, newton_solve)

__version__ = "0.1.0"
