//! Almost-dominance coefficients for Lorenz, inverse stochastic and
//! stochastic dominance, with bootstrap confidence intervals and a Monte
//! Carlo harness.
//!
//! The usual flow: build two [`EmpiricalDistribution`]s, pick a
//! [`DominanceFamily`], call [`coefficient`] for the point estimate and
//! [`bootstrap_ci`] for an interval.

pub mod calculus;
pub mod coefficients;
pub mod covariance;
pub mod empirical;
pub mod error;
pub mod inference;
pub mod rng;
pub mod simulation;

pub use calculus::{area_ratio, integrate, integrate_down, integrate_up, negative_area, positive_area};
pub use calculus::{Direction, GridFunction, GridSpec, DEFAULT_GRID_POINTS};
pub use coefficients::{
    base_curve, coefficient, phi_curve, rank_measures, CoefficientEstimate, DominanceFamily,
    FamilyKind, PreferenceFunction, RankMeasures,
};
pub use empirical::{
    joint_ecdf, EmpiricalDistribution, PairedSample, Sample, SamplingScheme, TwoSampleData,
};
pub use error::{Error, Result};
pub use covariance::{
    isd_kernel, kernel, lorenz_kernel, sd_kernel, sigma_curve, sigma_hat, CovKernel,
};
pub use inference::{
    bootstrap_ci, contact_sets, derivative, select_tuning, BootstrapResult, ContactSets,
    InferenceConfig, TuningReport,
};
pub use simulation::{
    monte_carlo, population_coefficient, preset, sample_data, sample_dgp, DiscreteLaw, Dgp,
    DoublePareto, MonteCarloReport, MonteCarloStudy, Preset,
};
