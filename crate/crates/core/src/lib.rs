//! Variable-dispersion beta regression for fuzzy ratings data.
//!
//! Bounded ratings are modeled as beta fuzzy numbers ỹ = (mode m, precision
//! s) whose membership is a rescaled beta kernel. The regression links a
//! mean submodel (logit) and a precision submodel (log) to covariates; the
//! `em` module estimates the coefficients from fuzzy observations by an EM
//! scheme whose E-step filters the latent sufficient statistics through the
//! conditional beta law, while `model` provides the crisp-data maximum
//! likelihood fit used both standalone and as the defuzzify-then-fit
//! baseline. `inference` adds standard errors, residuals, pseudo-R², and
//! likelihood-ratio tests; `sim` is a reproducible Monte Carlo harness
//! comparing the estimators; `numerics` holds the supporting special
//! functions, quadrature, and root solving.

pub mod em;
pub mod error;
pub mod fuzzy;
pub mod inference;
pub mod model;
pub mod numerics;
pub mod sim;

// Vectors and matrices in the public API are nalgebra types; re-export the
// crate so downstreams build against the same version.
pub use nalgebra;

pub use em::{
    conditional_beta_params, e_step, expected_log_1my, expected_log_y, fit_fuzzy_em,
    fuzzy_log_likelihood, m_step, q_function, q_score, EStepVariant, EmConfig, EmIteration,
    EtaNuConvention, FilteredData, FitResult, FuzzyDataset,
};
pub use error::{Error, Result};
pub use fuzzy::{
    clamp_mode, trapezoid_to_beta, AlphaCut, BetaFuzzyNumber, TrapezoidalFuzzyNumber, MODE_CLAMP,
};
pub use inference::{
    aic, chi_square_sf, empirical_information, likelihood_ratio_test, pseudo_r2, quartiles,
    residuals, standard_errors, InformationMatrix, LrtResult,
};
pub use model::{
    apply_links, beta_log_density, crisp_log_likelihood, crisp_score, fit_crisp_ml, Coefficients,
    CrispFit, DesignPair, LinkedParams,
};
pub use numerics::{
    adaptive_quadrature, damped_newton_root, damped_newton_root_with_jacobian, digamma, log_beta,
    log_gamma, regularized_gamma_q, SolverConfig,
};
pub use sim::{
    fuzzify, generate_crisp_outcomes, generate_design, replication_dataset, replication_rng,
    run_monte_carlo, Block, BlockStat, CoefficientStat, Estimator, EstimatorReport,
    GammaConvention, OverallStat, SimConfig, SimulationReport,
};
