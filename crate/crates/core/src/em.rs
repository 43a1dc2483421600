//! Fuzzy EM estimation: conditional filtering of fuzzy observations,
//! Q-function and its score, M-step root solving, the EM driver, and the
//! observed-data fuzzy log-likelihood.
//!
//! Each response is a beta fuzzy number ỹ_i = (m_i, s_i). Conditional on the
//! fuzzy observation, the latent crisp response is again beta distributed
//! with parameters (η_i, ν_i); the E-step replaces the sufficient statistics
//! (ln y, ln(1−y)) by their conditional expectations, and the M-step solves
//! the resulting complete-data score equations.

use nalgebra::DVector;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fuzzy::BetaFuzzyNumber;
use crate::inference::{
    aic, empirical_information, pseudo_r2, residuals, standard_errors,
};
use crate::model::{
    apply_links, fit_crisp_ml, initial_coefficients, loglik_given_stats, score_given_stats,
    Coefficients, DesignPair,
};
use crate::numerics::{damped_newton_root, digamma_raw, log_beta_raw, SolverConfig};

/// Fuzzy regression data: per-row fuzzy responses plus the design pair.
#[derive(Clone, Debug)]
pub struct FuzzyDataset {
    modes: DVector<f64>,
    spreads: DVector<f64>,
    design: DesignPair,
}

impl FuzzyDataset {
    /// Validates that every (mode, spread) pair is an admissible beta fuzzy
    /// number and that lengths match the design.
    pub fn new(modes: Vec<f64>, spreads: Vec<f64>, design: DesignPair) -> Result<Self> {
        if modes.len() != design.n() || spreads.len() != design.n() {
            return Err(Error::data(format!(
                "dataset lengths (modes {}, spreads {}) do not match design rows {}",
                modes.len(),
                spreads.len(),
                design.n()
            )));
        }
        for (i, (&m, &s)) in modes.iter().zip(spreads.iter()).enumerate() {
            BetaFuzzyNumber::new(m, s)
                .map_err(|e| Error::data(format!("row {i}: {e}")))?;
        }
        Ok(FuzzyDataset {
            modes: DVector::from_vec(modes),
            spreads: DVector::from_vec(spreads),
            design,
        })
    }

    pub fn n(&self) -> usize {
        self.design.n()
    }

    pub fn modes(&self) -> &DVector<f64> {
        &self.modes
    }

    pub fn spreads(&self) -> &DVector<f64> {
        &self.spreads
    }

    pub fn design(&self) -> &DesignPair {
        &self.design
    }

    pub fn fuzzy_number(&self, i: usize) -> BetaFuzzyNumber {
        BetaFuzzyNumber::new(self.modes[i], self.spreads[i])
            .expect("validated at construction")
    }

    /// Centroid-defuzzified responses (1 + m_i s_i)/(2 + s_i), all interior.
    pub fn centroid_defuzzified(&self) -> DVector<f64> {
        DVector::from_iterator(
            self.n(),
            (0..self.n()).map(|i| self.fuzzy_number(i).centroid()),
        )
    }

    /// Same fuzzy responses over intercept-only designs, for null-model fits.
    pub fn null_dataset(&self) -> FuzzyDataset {
        FuzzyDataset {
            modes: self.modes.clone(),
            spreads: self.spreads.clone(),
            design: self.design.intercept_only(),
        }
    }
}

/// Conditional expectations of the latent sufficient statistics.
#[derive(Clone, Debug, PartialEq)]
pub struct FilteredData {
    /// E[ln Y | ỹ] per row.
    pub y1_star: DVector<f64>,
    /// E[ln (1−Y) | ỹ] per row.
    pub y2_star: DVector<f64>,
}

impl FilteredData {
    pub fn new(y1_star: DVector<f64>, y2_star: DVector<f64>) -> Result<Self> {
        if y1_star.len() != y2_star.len() {
            return Err(Error::data("filtered vectors must have equal length"));
        }
        if y1_star
            .iter()
            .chain(y2_star.iter())
            .any(|&v| !(v.is_finite() && v < 0.0))
        {
            return Err(Error::data(
                "filtered statistics must be finite and strictly negative",
            ));
        }
        Ok(FilteredData { y1_star, y2_star })
    }

    /// The crisp statistics (ln y, ln(1−y)); with these, the Q-function is
    /// exactly the crisp log-likelihood.
    pub fn from_crisp(y: &DVector<f64>) -> Result<Self> {
        for (i, &yi) in y.iter().enumerate() {
            if !(yi > 0.0 && yi < 1.0) {
                return Err(Error::data(format!(
                    "row {i}: crisp response must lie strictly inside (0,1), got {yi}"
                )));
            }
        }
        FilteredData::new(y.map(f64::ln), y.map(|v| (1.0 - v).ln()))
    }

    pub fn len(&self) -> usize {
        self.y1_star.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y1_star.is_empty()
    }
}

/// How the conditional beta parameters combine model and fuzzy exponents.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum EtaNuConvention {
    /// η = μφ + s·m + 1, ν = φ(1−μ) + s(1−m) + 1. Not the exact conditional
    /// law: the extra unit in each parameter biases the filtered statistics,
    /// so EM ascent of the observed-data likelihood is not guaranteed and
    /// fits can abort on the log-likelihood dip check.
    Offset,
    /// η = μφ + s·m, ν = φ(1−μ) + s(1−m): the exponents obtained by
    /// multiplying the membership kernel into the beta density directly.
    /// This is the exact conditional beta law and the default.
    Direct,
}

/// How E[ln Y | ỹ] is evaluated under the conditional beta law.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum EStepVariant {
    /// Second-order expansion ln(η/(η+ν)) − ν/(2η(1+η+ν)) (the default).
    Taylor,
    /// The exact beta expectation ψ(η) − ψ(η+ν).
    ExactDigamma,
}

impl std::fmt::Display for EtaNuConvention {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            EtaNuConvention::Offset => "offset",
            EtaNuConvention::Direct => "direct",
        })
    }
}

impl std::str::FromStr for EtaNuConvention {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "offset" => Ok(EtaNuConvention::Offset),
            "direct" => Ok(EtaNuConvention::Direct),
            other => Err(Error::data(format!(
                "unknown eta/nu convention {other:?}; expected offset or direct"
            ))),
        }
    }
}

impl std::fmt::Display for EStepVariant {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            EStepVariant::Taylor => "taylor",
            EStepVariant::ExactDigamma => "exact-digamma",
        })
    }
}

impl std::str::FromStr for EStepVariant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "taylor" => Ok(EStepVariant::Taylor),
            "exact-digamma" => Ok(EStepVariant::ExactDigamma),
            other => Err(Error::data(format!(
                "unknown E-step variant {other:?}; expected taylor or exact-digamma"
            ))),
        }
    }
}

/// Tuning for [`fit_fuzzy_em`].
#[derive(Clone, Debug, Serialize)]
pub struct EmConfig {
    pub max_em_iterations: usize,
    /// Stop when |Δ loglik| / max(1, |loglik|) falls below this…
    pub loglik_tolerance: f64,
    /// …and the largest coefficient change falls below this.
    pub param_tolerance: f64,
    pub estep_variant: EStepVariant,
    pub eta_nu_convention: EtaNuConvention,
    pub solver: SolverConfig,
    /// Fit an intercept-only model alongside to attach the pseudo-R².
    pub compute_pseudo_r2: bool,
}

impl Default for EmConfig {
    fn default() -> Self {
        EmConfig {
            max_em_iterations: 500,
            loglik_tolerance: 1e-8,
            param_tolerance: 1e-6,
            estep_variant: EStepVariant::Taylor,
            eta_nu_convention: EtaNuConvention::Direct,
            solver: SolverConfig::default(),
            compute_pseudo_r2: true,
        }
    }
}

impl EmConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_em_iterations == 0 {
            return Err(Error::domain("max_em_iterations must be positive"));
        }
        if !(self.loglik_tolerance > 0.0) || !(self.param_tolerance > 0.0) {
            return Err(Error::domain("EM tolerances must be positive"));
        }
        self.solver.validate()
    }
}

/// Parameters (η, ν) of the conditional beta law of Y given the fuzzy
/// observation (m, s) at linked parameters (μ, φ).
pub fn conditional_beta_params(
    mu: f64,
    phi: f64,
    m: f64,
    s: f64,
    convention: EtaNuConvention,
) -> Result<(f64, f64)> {
    if !(mu > 0.0 && mu < 1.0) || !(phi > 0.0) {
        return Err(Error::domain(format!(
            "conditional_beta_params requires 0 < mu < 1 and phi > 0, got ({mu}, {phi})"
        )));
    }
    if !(m > 0.0 && m < 1.0) || !(s >= 0.0) {
        return Err(Error::domain(format!(
            "conditional_beta_params requires 0 < m < 1 and s ≥ 0, got ({m}, {s})"
        )));
    }
    let offset = match convention {
        EtaNuConvention::Offset => 1.0,
        EtaNuConvention::Direct => 0.0,
    };
    let eta = mu * phi + s * m + offset;
    let nu = phi * (1.0 - mu) + s * (1.0 - m) + offset;
    Ok((eta, nu))
}

/// E[ln Y] for Y ~ Beta(η, ν); always strictly negative.
pub fn expected_log_y(eta: f64, nu: f64, variant: EStepVariant) -> Result<f64> {
    if !(eta > 0.0 && eta.is_finite()) || !(nu > 0.0 && nu.is_finite()) {
        return Err(Error::domain(format!(
            "expected_log_y requires positive finite (eta, nu), got ({eta}, {nu})"
        )));
    }
    Ok(match variant {
        EStepVariant::Taylor => {
            (eta / (eta + nu)).ln() - nu / (2.0 * eta * (1.0 + eta + nu))
        }
        EStepVariant::ExactDigamma => digamma_raw(eta) - digamma_raw(eta + nu),
    })
}

/// E[ln (1−Y)] for Y ~ Beta(η, ν): the reflection of [`expected_log_y`].
pub fn expected_log_1my(eta: f64, nu: f64, variant: EStepVariant) -> Result<f64> {
    expected_log_y(nu, eta, variant)
}

/// E-step: per-row conditional beta parameters at the current coefficients,
/// then the two conditional expectations.
pub fn e_step(coef: &Coefficients, data: &FuzzyDataset, cfg: &EmConfig) -> Result<FilteredData> {
    let linked = apply_links(data.design(), coef)?;
    let n = data.n();
    let mut y1 = DVector::zeros(n);
    let mut y2 = DVector::zeros(n);
    for i in 0..n {
        let (eta, nu) = conditional_beta_params(
            linked.mu[i],
            linked.phi[i],
            data.modes()[i],
            data.spreads()[i],
            cfg.eta_nu_convention,
        )
        .map_err(|e| Error::domain(format!("row {i}: {e}")))?;
        y1[i] = expected_log_y(eta, nu, cfg.estep_variant)
            .map_err(|e| Error::domain(format!("row {i}: {e}")))?;
        y2[i] = expected_log_1my(eta, nu, cfg.estep_variant)
            .map_err(|e| Error::domain(format!("row {i}: {e}")))?;
    }
    FilteredData::new(y1, y2)
}

/// Expected complete-data log-likelihood: the crisp log-likelihood with the
/// sufficient statistics replaced by their filtered versions. All Γ terms
/// are retained, so with crisp statistics this equals the crisp
/// log-likelihood exactly.
pub fn q_function(coef: &Coefficients, filtered: &FilteredData, design: &DesignPair) -> Result<f64> {
    check_filtered_dims(coef, filtered, design)?;
    Ok(loglik_given_stats(coef, &filtered.y1_star, &filtered.y2_star, design))
}

/// Analytic gradient of [`q_function`] in stacked (β, γ) order.
pub fn q_score(
    coef: &Coefficients,
    filtered: &FilteredData,
    design: &DesignPair,
) -> Result<DVector<f64>> {
    check_filtered_dims(coef, filtered, design)?;
    Ok(score_given_stats(coef, &filtered.y1_star, &filtered.y2_star, design))
}

fn check_filtered_dims(
    coef: &Coefficients,
    filtered: &FilteredData,
    design: &DesignPair,
) -> Result<()> {
    apply_links(design, coef)?;
    if filtered.len() != design.n() {
        return Err(Error::data(format!(
            "filtered data length {} does not match design rows {}",
            filtered.len(),
            design.n()
        )));
    }
    Ok(())
}

/// M-step: root of the Q-function score, warm-started at `coef_init`.
pub fn m_step(
    filtered: &FilteredData,
    design: &DesignPair,
    coef_init: &Coefficients,
    cfg: &EmConfig,
) -> Result<Coefficients> {
    check_filtered_dims(coef_init, filtered, design)?;
    let j = design.n_beta();
    let h = design.n_gamma();
    let score_fn = |theta: &DVector<f64>| {
        let coef = Coefficients::from_concat(theta, j, h);
        score_given_stats(&coef, &filtered.y1_star, &filtered.y2_star, design)
    };
    let (root, _) =
        damped_newton_root(score_fn, &coef_init.concat(), &cfg.solver).map_err(|e| match e {
            Error::Solver {
                reason,
                iterations,
                trace,
            } => Error::Solver {
                reason: format!("M-step failed: {reason}"),
                iterations,
                trace,
            },
            other => other,
        })?;
    Ok(Coefficients::from_concat(&root, j, h))
}

/// Observed-data fuzzy log-likelihood: the closed form of Σ_i ln ∫ ξ_i·f_i,
///
/// Σ_i [ln B(μφ + s·m, φ(1−μ) + s(1−m)) − ln B(μφ, φ−μφ) − ln C_i].
///
/// The integrand exponents come from multiplying membership kernel and beta
/// density, so the value does not depend on the η/ν convention.
pub fn fuzzy_log_likelihood(coef: &Coefficients, data: &FuzzyDataset) -> Result<f64> {
    let linked = apply_links(data.design(), coef)?;
    let mut total = 0.0;
    for i in 0..data.n() {
        let mu = linked.mu[i];
        let phi = linked.phi[i];
        let m = data.modes()[i];
        let s = data.spreads()[i];
        let p = mu * phi;
        let q = phi - p;
        let log_c = data.fuzzy_number(i).log_normalization_constant();
        total += log_beta_raw(p + s * m, q + s * (1.0 - m)) - log_beta_raw(p, q) - log_c;
    }
    Ok(total)
}

/// One EM iteration record.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EmIteration {
    /// Observed-data fuzzy log-likelihood after the M-step.
    pub loglik: f64,
    /// ∞-norm of the coefficient update.
    pub max_param_change: f64,
}

/// A completed fuzzy EM fit with attached inference outputs.
#[derive(Clone, Debug)]
pub struct FitResult {
    pub coefficients: Coefficients,
    pub std_errors: DVector<f64>,
    pub loglik_fuzzy: f64,
    pub aic: f64,
    /// Present when the config requested it and the index was computable.
    pub pseudo_r2: Option<f64>,
    pub residuals: DVector<f64>,
    pub em_trace: Vec<EmIteration>,
    pub converged: bool,
}

/// Base slack for single-iteration log-likelihood decreases, covering
/// floating-point evaluation noise and imperfect M-step maximization. Under
/// the exact-digamma E-step this is the whole tolerance: exact EM cannot
/// decrease the likelihood. Under the Taylor E-step the computable
/// [`dip_allowance`] bound is added on top.
const MAX_LOGLIK_DIP: f64 = 1e-6;

/// Rigorous bound on how far one EM update can lower the observed-data
/// log-likelihood when the E-step approximates the conditional expectations.
///
/// The minorization argument gives l(θ_new) − l(θ_old) ≥ Q(θ_new|θ_old) −
/// Q(θ_old|θ_old) with exact expectations. When the M-step instead ascends a
/// surrogate built from approximate expectations, the inequality degrades by
/// the surrogate mismatch at the two iterates:
///
///   dip ≤ Σ_i |e1_i|·|p_i(θ_new) − p_i(θ_old)| + |e2_i|·|q_i(θ_new) − q_i(θ_old)|
///
/// where e_{1,2} are the per-row Taylor-vs-exact E-step errors at θ_old and
/// p = μφ, q = φ − μφ. The bound vanishes for the exact variant and at
/// convergence (no parameter movement), so it stays a sharp tripwire for
/// genuine ascent failures.
fn dip_allowance(
    coef_old: &Coefficients,
    coef_new: &Coefficients,
    data: &FuzzyDataset,
    cfg: &EmConfig,
) -> Result<f64> {
    if cfg.estep_variant == EStepVariant::ExactDigamma {
        return Ok(0.0);
    }
    let old = apply_links(data.design(), coef_old)?;
    let new = apply_links(data.design(), coef_new)?;
    let mut total = 0.0;
    for i in 0..data.n() {
        let (eta, nu) = conditional_beta_params(
            old.mu[i],
            old.phi[i],
            data.modes()[i],
            data.spreads()[i],
            cfg.eta_nu_convention,
        )?;
        let e1 = expected_log_y(eta, nu, EStepVariant::Taylor)?
            - expected_log_y(eta, nu, EStepVariant::ExactDigamma)?;
        let e2 = expected_log_1my(eta, nu, EStepVariant::Taylor)?
            - expected_log_1my(eta, nu, EStepVariant::ExactDigamma)?;
        let p_old = old.mu[i] * old.phi[i];
        let p_new = new.mu[i] * new.phi[i];
        let q_old = old.phi[i] - p_old;
        let q_new = new.phi[i] - p_new;
        total += e1.abs() * (p_new - p_old).abs() + e2.abs() * (q_new - q_old).abs();
    }
    Ok(total)
}

/// Fuzzy EM driver: alternates [`e_step`] and [`m_step`] from a crisp-ML
/// initialization on centroid-defuzzified responses, then attaches standard
/// errors, residuals, AIC, and (optionally) the pseudo-R².
///
/// Non-convergence within the iteration cap is not an error: the result
/// carries `converged = false` and the best iterate seen. M-step solver
/// failures are errors.
pub fn fit_fuzzy_em(data: &FuzzyDataset, cfg: &EmConfig) -> Result<FitResult> {
    cfg.validate()?;
    let design = data.design();
    design.check_full_rank()?;
    if design.n() <= design.n_params() {
        return Err(Error::data(format!(
            "need more observations ({}) than parameters ({})",
            design.n(),
            design.n_params()
        )));
    }

    let defuzzified = data.centroid_defuzzified();
    let mut coef = match fit_crisp_ml(&defuzzified, design, &cfg.solver) {
        Ok(fit) => fit.coefficients,
        Err(e) => {
            log::warn!("crisp initialization failed ({e}); starting from OLS values");
            initial_coefficients(&defuzzified, design)
        }
    };

    let mut loglik = fuzzy_log_likelihood(&coef, data)?;
    let mut best = (coef.clone(), loglik);
    let mut trace = Vec::new();
    let mut converged = false;

    for iteration in 1..=cfg.max_em_iterations {
        let filtered = e_step(&coef, data, cfg)?;
        let updated = m_step(&filtered, design, &coef, cfg)?;
        let new_loglik = fuzzy_log_likelihood(&updated, data)?;
        let max_param_change = updated.max_abs_difference(&coef);
        trace.push(EmIteration {
            loglik: new_loglik,
            max_param_change,
        });

        let dip = loglik - new_loglik;
        if dip > MAX_LOGLIK_DIP {
            let allowance = dip_allowance(&coef, &updated, data, cfg)?;
            if dip > allowance + MAX_LOGLIK_DIP {
                return Err(Error::Solver {
                    reason: format!(
                        "fuzzy log-likelihood decreased by {dip:.3e} at EM iteration \
                         {iteration}, beyond the E-step approximation allowance {allowance:.3e}"
                    ),
                    iterations: iteration,
                    trace: trace.iter().map(|t| t.loglik).collect(),
                });
            }
        }
        if dip > 0.0 {
            log::debug!(
                "tolerated log-likelihood dip {dip:.3e} at EM iteration {iteration}"
            );
        }

        let rel_change = (new_loglik - loglik).abs() / loglik.abs().max(1.0);
        coef = updated;
        loglik = new_loglik;
        if loglik > best.1 {
            best = (coef.clone(), loglik);
        }
        if rel_change <= cfg.loglik_tolerance && max_param_change <= cfg.param_tolerance {
            converged = true;
            break;
        }
    }
    if !converged {
        log::warn!(
            "EM did not converge within {} iterations; returning best iterate",
            cfg.max_em_iterations
        );
    }

    let (coefficients, loglik_fuzzy) = best;
    let filtered_hat = e_step(&coefficients, data, cfg)?;
    let info = empirical_information(&coefficients, &filtered_hat, design)?;
    let std_errors = standard_errors(&info)?;
    let residuals = residuals(&coefficients, data)?;
    let aic = aic(loglik_fuzzy, design.n_params());

    let pseudo = if cfg.compute_pseudo_r2 {
        compute_pseudo_r2(data, cfg, loglik_fuzzy)
    } else {
        None
    };

    Ok(FitResult {
        coefficients,
        std_errors,
        loglik_fuzzy,
        aic,
        pseudo_r2: pseudo,
        residuals,
        em_trace: trace,
        converged,
    })
}

fn compute_pseudo_r2(data: &FuzzyDataset, cfg: &EmConfig, loglik_full: f64) -> Option<f64> {
    let design = data.design();
    let loglik_null = if design.n_params() == 2 {
        loglik_full
    } else {
        let mut null_cfg = cfg.clone();
        null_cfg.compute_pseudo_r2 = false;
        match fit_fuzzy_em(&data.null_dataset(), &null_cfg) {
            Ok(null_fit) => {
                if !null_fit.converged {
                    log::warn!("null-model fit for pseudo-R² did not converge");
                }
                null_fit.loglik_fuzzy
            }
            Err(e) => {
                log::warn!("null-model fit for pseudo-R² failed: {e}");
                return None;
            }
        }
    };
    match pseudo_r2(loglik_full, loglik_null, data.n()) {
        Ok(v) => Some(v),
        Err(e) => {
            log::warn!("pseudo-R² not computable: {e}");
            None
        }
    }
}
