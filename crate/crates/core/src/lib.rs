//! Equilibrium statistical mechanics of an ideal Bose gas in anisotropic
//! three-dimensional harmonic traps.
//!
//! Natural units `k_B = ħ = 1` throughout: frequencies and temperatures
//! share the same unit.

// Domain guards are written `!(x > 0.0)` on purpose so that NaN is rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod error;
pub mod occupation;
pub mod solver;
pub mod special;
pub mod temperatures;
pub mod trap;

pub use error::{Error, Result};
pub use occupation::{
    cutoffs_with_depth, default_cutoffs, occupations_asymptotic, occupations_enumerated, occupations_exact, EnumeratedOccupation,
    OccupationSplit, ThermoPoint,
};
pub use special::{SeriesControl, Zetas, ZETA2, ZETA3};
pub use trap::{build_trap, IsotropicSplit, Regime, SplitRule, TrapGeometry, DEFAULT_COMMENSURABILITY_TOL};
pub use solver::{
    correlation_proxy, scaling_params, solve_equilibrium, solve_phi, sweep, Equilibrium, GridSpacing,
    SweepMetadata, SweepRecord, SweepTable, TempGrid,
};
pub use temperatures::{
    anisotropy_scan, bulk_temps, bulk_temps_raw, crossover_t1, crossover_t2, crossover_t3, delta_T_correction,
    interaction_shift, multistep_flags, phase_point, temperature_set, AnisotropyRow, BulkTemps, Condition,
    Crossover, CrossoverMode, MultistepReport, PhaseLabel, PhasePoint, T2dNorm, TempOptions, TemperatureSet,
};
pub use analysis::{
    collapse_export, fd_convergence_order, fraction_peak, ladder_residuals, ladder_total, n_lambda,
    stage_temperatures, CollapseCurve, CollapseDataset, LadderReport, LadderResiduals, LadderTotal,
    StageTemperatures,
};
