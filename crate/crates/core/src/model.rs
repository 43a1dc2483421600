//! Variable-dispersion beta regression on crisp responses: density, link
//! functions, log-likelihood, analytic score, and direct ML fitting.
//!
//! The mean submodel uses the logit link, the precision submodel the log
//! link: μ_i = logit⁻¹(x_i·β), φ_i = exp(z_i·γ). The response density is
//! Beta(μφ, φ−μφ), so E[y] = μ and Var[y] = μ(1−μ)/(1+φ).
//!
//! The same sufficient-statistic form of the log-likelihood and score serves
//! double duty: with (ln y, ln(1−y)) it is the crisp model, with conditional
//! expectations of those statistics it is the EM Q-function.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::inference::{standard_errors, InformationMatrix};
use crate::numerics::{
    damped_newton_root, digamma_raw, log_beta_raw, SolverConfig,
};

/// Saturation bound for the logit-scale linear predictor; keeps μ strictly
/// inside (0,1) in f64 while leaving 1−μ representable.
const LOGIT_BOUND: f64 = 30.0;
/// Saturation bound for the log-scale linear predictor of φ.
const LOG_PHI_BOUND: f64 = 300.0;

/// Design matrices for the two submodels; both carry an intercept column.
#[derive(Clone, Debug, PartialEq)]
pub struct DesignPair {
    x: DMatrix<f64>,
    z: DMatrix<f64>,
}

impl DesignPair {
    /// `x` is n×J for the mean part, `z` is n×H for the precision part.
    /// Both must be finite, share the row count, and start with an
    /// all-ones intercept column. Column rank is checked at fit time.
    pub fn new(x: DMatrix<f64>, z: DMatrix<f64>) -> Result<Self> {
        if x.nrows() != z.nrows() {
            return Err(Error::data(format!(
                "design row counts differ: {} vs {}",
                x.nrows(),
                z.nrows()
            )));
        }
        if x.nrows() == 0 || x.ncols() == 0 || z.ncols() == 0 {
            return Err(Error::data("designs must be non-empty"));
        }
        for (name, mat) in [("x", &x), ("z", &z)] {
            if mat.iter().any(|v| !v.is_finite()) {
                return Err(Error::data(format!("design {name} contains non-finite entries")));
            }
            if mat.column(0).iter().any(|&v| v != 1.0) {
                return Err(Error::data(format!(
                    "design {name} must carry an all-ones intercept column first"
                )));
            }
        }
        Ok(DesignPair { x, z })
    }

    /// Build intercept-plus-covariates designs from covariate columns.
    pub fn with_intercept(n: usize, x_covariates: &[Vec<f64>], z_covariates: &[Vec<f64>]) -> Result<Self> {
        let build = |covs: &[Vec<f64>]| -> Result<DMatrix<f64>> {
            for c in covs {
                if c.len() != n {
                    return Err(Error::data(format!(
                        "covariate length {} does not match n = {n}",
                        c.len()
                    )));
                }
            }
            let mut m = DMatrix::zeros(n, covs.len() + 1);
            for i in 0..n {
                m[(i, 0)] = 1.0;
                for (j, c) in covs.iter().enumerate() {
                    m[(i, j + 1)] = c[i];
                }
            }
            Ok(m)
        };
        DesignPair::new(build(x_covariates)?, build(z_covariates)?)
    }

    /// Intercept-only pair with the same row count, for null-model fits.
    pub fn intercept_only(&self) -> DesignPair {
        let n = self.n();
        DesignPair {
            x: DMatrix::from_element(n, 1, 1.0),
            z: DMatrix::from_element(n, 1, 1.0),
        }
    }

    pub fn x(&self) -> &DMatrix<f64> {
        &self.x
    }

    pub fn z(&self) -> &DMatrix<f64> {
        &self.z
    }

    pub fn n(&self) -> usize {
        self.x.nrows()
    }

    pub fn n_beta(&self) -> usize {
        self.x.ncols()
    }

    pub fn n_gamma(&self) -> usize {
        self.z.ncols()
    }

    pub fn n_params(&self) -> usize {
        self.n_beta() + self.n_gamma()
    }

    /// Full-column-rank check on both matrices (singular values above a
    /// scaled threshold), required before fitting.
    pub fn check_full_rank(&self) -> Result<()> {
        for (name, mat) in [("x", &self.x), ("z", &self.z)] {
            if mat.nrows() < mat.ncols() {
                return Err(Error::data(format!(
                    "design {name} has more columns than rows"
                )));
            }
            let svd = mat.clone().svd(false, false);
            let max_sv = svd.singular_values.iter().cloned().fold(0.0f64, f64::max);
            let tol = max_sv * 1e-10 * mat.ncols() as f64;
            let rank = svd.singular_values.iter().filter(|&&s| s > tol).count();
            if rank < mat.ncols() {
                return Err(Error::data(format!(
                    "design {name} is rank deficient (rank {rank} < {} columns)",
                    mat.ncols()
                )));
            }
        }
        Ok(())
    }
}

/// Regression coefficients for the two submodels.
#[derive(Clone, Debug, PartialEq)]
pub struct Coefficients {
    pub beta: DVector<f64>,
    pub gamma: DVector<f64>,
}

impl Coefficients {
    pub fn new(beta: Vec<f64>, gamma: Vec<f64>) -> Result<Self> {
        if beta.iter().chain(gamma.iter()).any(|v| !v.is_finite()) {
            return Err(Error::domain("coefficients must be finite"));
        }
        if beta.is_empty() || gamma.is_empty() {
            return Err(Error::domain("coefficient vectors must be non-empty"));
        }
        Ok(Coefficients {
            beta: DVector::from_vec(beta),
            gamma: DVector::from_vec(gamma),
        })
    }

    pub fn zeros(j: usize, h: usize) -> Self {
        Coefficients {
            beta: DVector::zeros(j),
            gamma: DVector::zeros(h),
        }
    }

    pub fn len(&self) -> usize {
        self.beta.len() + self.gamma.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Stack into a single (β, γ) vector, the solver's coordinate order.
    pub fn concat(&self) -> DVector<f64> {
        let mut v = DVector::zeros(self.len());
        v.rows_mut(0, self.beta.len()).copy_from(&self.beta);
        v.rows_mut(self.beta.len(), self.gamma.len())
            .copy_from(&self.gamma);
        v
    }

    pub fn from_concat(v: &DVector<f64>, j: usize, h: usize) -> Self {
        Coefficients {
            beta: v.rows(0, j).into_owned(),
            gamma: v.rows(j, h).into_owned(),
        }
    }

    /// Largest absolute coordinate-wise difference.
    pub fn max_abs_difference(&self, other: &Coefficients) -> f64 {
        let a = self.concat();
        let b = other.concat();
        (a - b).iter().fold(0.0f64, |acc, x| acc.max(x.abs()))
    }
}

/// Linked per-observation parameters μ ∈ (0,1) and φ > 0.
#[derive(Clone, Debug, PartialEq)]
pub struct LinkedParams {
    pub mu: DVector<f64>,
    pub phi: DVector<f64>,
}

#[inline]
fn inverse_logit(t: f64) -> f64 {
    let t = t.clamp(-LOGIT_BOUND, LOGIT_BOUND);
    1.0 / (1.0 + (-t).exp())
}

/// μ = logit⁻¹(Xβ), φ = exp(Zγ), with saturated linear predictors so the
/// output is finite and interior for any finite coefficients.
pub fn apply_links(design: &DesignPair, coef: &Coefficients) -> Result<LinkedParams> {
    check_dims(design, coef)?;
    Ok(apply_links_raw(design, coef))
}

fn check_dims(design: &DesignPair, coef: &Coefficients) -> Result<()> {
    if coef.beta.len() != design.n_beta() || coef.gamma.len() != design.n_gamma() {
        return Err(Error::domain(format!(
            "coefficient shapes ({}, {}) do not match design ({}, {})",
            coef.beta.len(),
            coef.gamma.len(),
            design.n_beta(),
            design.n_gamma()
        )));
    }
    Ok(())
}

pub(crate) fn apply_links_raw(design: &DesignPair, coef: &Coefficients) -> LinkedParams {
    let eta_mu = design.x() * &coef.beta;
    let eta_phi = design.z() * &coef.gamma;
    LinkedParams {
        mu: eta_mu.map(inverse_logit),
        phi: eta_phi.map(|t| t.clamp(-LOG_PHI_BOUND, LOG_PHI_BOUND).exp()),
    }
}

/// Log density of Beta(μφ, φ−μφ) at y ∈ (0,1).
pub fn beta_log_density(y: f64, mu: f64, phi: f64) -> Result<f64> {
    if !(y > 0.0 && y < 1.0) {
        return Err(Error::domain(format!(
            "beta_log_density requires y strictly inside (0,1), got {y}"
        )));
    }
    if !(mu > 0.0 && mu < 1.0) || !(phi > 0.0) {
        return Err(Error::domain(format!(
            "beta_log_density requires 0 < mu < 1 and phi > 0, got ({mu}, {phi})"
        )));
    }
    let p = mu * phi;
    let q = phi - p;
    Ok((p - 1.0) * y.ln() + (q - 1.0) * (1.0 - y).ln() - log_beta_raw(p, q))
}

/// Log-likelihood in sufficient-statistic form: `t1`/`t2` are either the
/// crisp statistics (ln y, ln(1−y)) or their conditional expectations.
pub(crate) fn loglik_given_stats(
    coef: &Coefficients,
    t1: &DVector<f64>,
    t2: &DVector<f64>,
    design: &DesignPair,
) -> f64 {
    let linked = apply_links_raw(design, coef);
    let mut total = 0.0;
    for i in 0..design.n() {
        let p = linked.mu[i] * linked.phi[i];
        let q = linked.phi[i] - p;
        total += (p - 1.0) * t1[i] + (q - 1.0) * t2[i] - log_beta_raw(p, q);
    }
    total
}

/// Per-row contributions to the (β, γ) score in sufficient-statistic form.
///
/// Row i of the result is U_i; the full score is the column sum. The mean
/// part carries the logit chain factor μ(1−μ), the precision part the log
/// chain factor φ.
pub(crate) fn score_rows_given_stats(
    coef: &Coefficients,
    t1: &DVector<f64>,
    t2: &DVector<f64>,
    design: &DesignPair,
) -> DMatrix<f64> {
    let linked = apply_links_raw(design, coef);
    let n = design.n();
    let j = design.n_beta();
    let h = design.n_gamma();
    let mut rows = DMatrix::zeros(n, j + h);
    for i in 0..n {
        let mu = linked.mu[i];
        let phi = linked.phi[i];
        let p = mu * phi;
        let q = phi - p;
        let psi_p = digamma_raw(p);
        let psi_q = digamma_raw(q);
        let psi_phi = digamma_raw(phi);
        // ∂ℓ_i/∂μ scaled by the logit chain factor:
        let mean_part = phi * (t1[i] - t2[i] - psi_p + psi_q) * mu * (1.0 - mu);
        // ∂ℓ_i/∂φ scaled by the log chain factor:
        let precision_part = phi
            * (psi_phi - mu * psi_p - (1.0 - mu) * psi_q + mu * t1[i] + (1.0 - mu) * t2[i]);
        for c in 0..j {
            rows[(i, c)] = mean_part * design.x()[(i, c)];
        }
        for c in 0..h {
            rows[(i, j + c)] = precision_part * design.z()[(i, c)];
        }
    }
    rows
}

pub(crate) fn score_given_stats(
    coef: &Coefficients,
    t1: &DVector<f64>,
    t2: &DVector<f64>,
    design: &DesignPair,
) -> DVector<f64> {
    let rows = score_rows_given_stats(coef, t1, t2, design);
    let mut score = DVector::zeros(rows.ncols());
    for i in 0..rows.nrows() {
        for c in 0..rows.ncols() {
            score[c] += rows[(i, c)];
        }
    }
    score
}

fn crisp_stats(y: &DVector<f64>, design: &DesignPair) -> Result<(DVector<f64>, DVector<f64>)> {
    if y.len() != design.n() {
        return Err(Error::data(format!(
            "response length {} does not match design rows {}",
            y.len(),
            design.n()
        )));
    }
    for (i, &yi) in y.iter().enumerate() {
        if !(yi > 0.0 && yi < 1.0) {
            return Err(Error::data(format!(
                "response row {i} must lie strictly inside (0,1), got {yi}"
            )));
        }
    }
    Ok((y.map(f64::ln), y.map(|v| (1.0 - v).ln())))
}

/// Crisp log-likelihood: Σ_i log Beta-density(y_i; μ_i, φ_i).
pub fn crisp_log_likelihood(
    coef: &Coefficients,
    y: &DVector<f64>,
    design: &DesignPair,
) -> Result<f64> {
    check_dims(design, coef)?;
    let (t1, t2) = crisp_stats(y, design)?;
    Ok(loglik_given_stats(coef, &t1, &t2, design))
}

/// Analytic gradient of [`crisp_log_likelihood`] in stacked (β, γ) order.
pub fn crisp_score(
    coef: &Coefficients,
    y: &DVector<f64>,
    design: &DesignPair,
) -> Result<DVector<f64>> {
    check_dims(design, coef)?;
    let (t1, t2) = crisp_stats(y, design)?;
    Ok(score_given_stats(coef, &t1, &t2, design))
}

/// Result of a direct crisp ML fit.
#[derive(Clone, Debug)]
pub struct CrispFit {
    pub coefficients: Coefficients,
    pub loglik: f64,
    pub aic: f64,
    pub std_errors: DVector<f64>,
    /// Residual ∞-norms of the Newton iterations.
    pub solver_trace: Vec<f64>,
}

/// OLS-based starting point: β from least squares of logit(y) on X, γ
/// intercept from a moment-matched precision, other γ entries zero.
pub(crate) fn initial_coefficients(y: &DVector<f64>, design: &DesignPair) -> Coefficients {
    let n = design.n();
    let j = design.n_beta();
    let v = y.map(|yi| (yi / (1.0 - yi)).ln());
    let x = design.x();
    let xtx = x.transpose() * x;
    let xtv = x.transpose() * &v;
    let beta = xtx
        .clone()
        .cholesky()
        .map(|c| c.solve(&xtv))
        .or_else(|| xtx.lu().solve(&xtv))
        .unwrap_or_else(|| DVector::zeros(j));
    let fitted = x * &beta;
    let dof = n.saturating_sub(j).max(1) as f64;
    let sigma2 = (&v - &fitted).norm_squared() / dof;
    // Delta method: Var(logit y) ≈ Var(y)/(μ(1−μ))², so
    // φ_i ≈ 1/(σ² μ_i(1−μ_i)) − 1; average and clamp to a sane floor.
    let mut phi_acc = 0.0;
    for i in 0..n {
        let mu = inverse_logit(fitted[i]);
        let scale = (mu * (1.0 - mu)).max(1e-6);
        phi_acc += 1.0 / (sigma2.max(1e-12) * scale) - 1.0;
    }
    let phi_hat = (phi_acc / n as f64).max(1.05);
    let mut gamma = DVector::zeros(design.n_gamma());
    gamma[0] = if phi_hat.is_finite() { phi_hat.ln() } else { 10f64.ln() };
    Coefficients {
        beta,
        gamma,
    }
}

/// Maximum-likelihood fit of the crisp model by solving the score system
/// with damped Newton from the OLS starting point.
pub fn fit_crisp_ml(
    y: &DVector<f64>,
    design: &DesignPair,
    solver: &SolverConfig,
) -> Result<CrispFit> {
    design.check_full_rank()?;
    if design.n() <= design.n_params() {
        return Err(Error::data(format!(
            "need more observations ({}) than parameters ({})",
            design.n(),
            design.n_params()
        )));
    }
    let (t1, t2) = crisp_stats(y, design)?;
    let j = design.n_beta();
    let h = design.n_gamma();
    let init = initial_coefficients(y, design);
    let score_fn = |theta: &DVector<f64>| {
        let coef = Coefficients::from_concat(theta, j, h);
        score_given_stats(&coef, &t1, &t2, design)
    };
    let (root, trace) = damped_newton_root(score_fn, &init.concat(), solver).map_err(|e| {
        match e {
            Error::Solver {
                reason,
                iterations,
                trace,
            } => Error::Solver {
                reason: format!(
                    "crisp ML did not converge ({reason}); \
                     near-separated or near-degenerate responses can cause this"
                ),
                iterations,
                trace,
            },
            other => other,
        }
    })?;
    let coefficients = Coefficients::from_concat(&root, j, h);
    let loglik = loglik_given_stats(&coefficients, &t1, &t2, design);
    let rows = score_rows_given_stats(&coefficients, &t1, &t2, design);
    let info = InformationMatrix::from_score_rows(&rows);
    let std_errors = standard_errors(&info)?;
    let aic = 2.0 * (j + h) as f64 - 2.0 * loglik;
    Ok(CrispFit {
        coefficients,
        loglik,
        aic,
        std_errors,
        solver_trace: trace,
    })
}
