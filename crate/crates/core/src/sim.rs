//! Monte Carlo harness for the estimator-recovery study: data generation
//! (design, crisp outcomes, fuzzification) and replication-parallel
//! comparison of the fuzzy-EM estimator against defuzzify-then-ML baselines.

use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rand_distr::{Beta as BetaDist, Distribution, Gamma as GammaDist};
use rayon::prelude::*;
use serde::Serialize;
use std::fmt;

use crate::em::{fit_fuzzy_em, EmConfig, FuzzyDataset};
use crate::error::{Error, Result};
use crate::model::{apply_links, fit_crisp_ml, Coefficients, DesignPair};

/// True mean-part coefficients for the 2- and 4-column designs.
pub const TRUE_BETA_2: [f64; 2] = [-0.5, -0.81];
pub const TRUE_BETA_4: [f64; 4] = [-0.5, -0.81, 0.7, 1.15];
/// True precision-part coefficients for the 1- and 3-column designs.
pub const TRUE_GAMMA_1: [f64; 1] = [4.8];
pub const TRUE_GAMMA_3: [f64; 3] = [4.8, -1.5, 1.03];

/// Reading of the two spread-generation parameters.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum GammaConvention {
    /// Second parameter is a rate: mean = shape/rate (the default; with
    /// (1.025, 0.001) the mean spread is ≈ 1025, mild fuzziness).
    ShapeRate,
    /// Second parameter is a scale: mean = shape·scale.
    ShapeScale,
}

impl fmt::Display for GammaConvention {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            GammaConvention::ShapeRate => "shape-rate",
            GammaConvention::ShapeScale => "shape-scale",
        })
    }
}

impl std::str::FromStr for GammaConvention {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "shape-rate" => Ok(GammaConvention::ShapeRate),
            "shape-scale" => Ok(GammaConvention::ShapeScale),
            other => Err(Error::data(format!(
                "unknown gamma convention {other:?}; expected shape-rate or shape-scale"
            ))),
        }
    }
}

/// Which estimators a Monte Carlo run compares.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Estimator {
    /// Fuzzy EM on the (mode, spread) data.
    FuzzyEm,
    /// Centroid-defuzzify, then crisp ML.
    MlCentroid,
    /// First-maximum-defuzzify (the mode), then crisp ML.
    MlMode,
}

impl Estimator {
    pub const ALL: [Estimator; 3] = [Estimator::FuzzyEm, Estimator::MlCentroid, Estimator::MlMode];

    pub fn name(&self) -> &'static str {
        match self {
            Estimator::FuzzyEm => "fuzzy-em",
            Estimator::MlCentroid => "ml-centroid",
            Estimator::MlMode => "ml-mode",
        }
    }
}

impl fmt::Display for Estimator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Estimator {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "fuzzy-em" => Ok(Estimator::FuzzyEm),
            "ml-centroid" => Ok(Estimator::MlCentroid),
            "ml-mode" => Ok(Estimator::MlMode),
            other => Err(Error::data(format!(
                "unknown estimator {other:?}; expected fuzzy-em, ml-centroid, or ml-mode"
            ))),
        }
    }
}

/// One Monte Carlo cell: sample size, design widths, replication count,
/// true coefficients, and spread-generation settings.
#[derive(Clone, Debug, Serialize)]
pub struct SimConfig {
    pub n: usize,
    pub j: usize,
    pub h: usize,
    pub b: usize,
    pub seed: u64,
    pub true_beta: Vec<f64>,
    pub true_gamma: Vec<f64>,
    pub gamma_shape: f64,
    /// Rate by default; reinterpreted as scale under
    /// [`GammaConvention::ShapeScale`].
    pub gamma_rate: f64,
    pub gamma_convention: GammaConvention,
    pub estimators: Vec<Estimator>,
    #[serde(skip)]
    pub em: EmConfig,
}

impl SimConfig {
    /// Cell with the built-in true coefficient vectors for the given design
    /// widths (j ∈ {2,4}, h ∈ {1,3}) and default spread generation.
    pub fn standard(n: usize, j: usize, h: usize, b: usize, seed: u64) -> Result<Self> {
        let true_beta = match j {
            2 => TRUE_BETA_2.to_vec(),
            4 => TRUE_BETA_4.to_vec(),
            other => {
                return Err(Error::data(format!(
                    "no built-in true β for J = {other}; supply coefficients explicitly"
                )))
            }
        };
        let true_gamma = match h {
            1 => TRUE_GAMMA_1.to_vec(),
            3 => TRUE_GAMMA_3.to_vec(),
            other => {
                return Err(Error::data(format!(
                    "no built-in true γ for H = {other}; supply coefficients explicitly"
                )))
            }
        };
        let cfg = SimConfig {
            n,
            j,
            h,
            b,
            seed,
            true_beta,
            true_gamma,
            gamma_shape: 1.025,
            gamma_rate: 0.001,
            gamma_convention: GammaConvention::ShapeRate,
            estimators: Estimator::ALL.to_vec(),
            em: EmConfig::default(),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.b == 0 {
            return Err(Error::data("replication count must be ≥ 1"));
        }
        if self.true_beta.len() != self.j || self.true_gamma.len() != self.h {
            return Err(Error::data(format!(
                "true coefficient lengths ({}, {}) must match design widths ({}, {})",
                self.true_beta.len(),
                self.true_gamma.len(),
                self.j,
                self.h
            )));
        }
        if self.j == 0 || self.h == 0 || self.n <= self.j + self.h {
            return Err(Error::data(
                "need n > J + H with at least intercepts in both parts",
            ));
        }
        if !(self.gamma_shape > 0.0) || !(self.gamma_rate > 0.0) {
            return Err(Error::data("spread-generation parameters must be positive"));
        }
        if self.estimators.is_empty() {
            return Err(Error::data("at least one estimator must be selected"));
        }
        self.em.validate()?;
        Coefficients::new(self.true_beta.clone(), self.true_gamma.clone())?;
        Ok(())
    }

    fn truth(&self) -> Coefficients {
        Coefficients::new(self.true_beta.clone(), self.true_gamma.clone())
            .expect("validated")
    }
}

/// Independent, reproducible RNG stream for one replication.
pub fn replication_rng(seed: u64, rep: usize) -> ChaCha12Rng {
    // SplitMix64 finalizer decorrelates consecutive replication indices.
    let mut z = seed ^ (rep as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    ChaCha12Rng::seed_from_u64(z ^ (z >> 31))
}

/// Design pair with intercepts and Unif(1,5) covariate columns.
pub fn generate_design(n: usize, j: usize, h: usize, rng: &mut impl Rng) -> Result<DesignPair> {
    if j == 0 || h == 0 || n == 0 {
        return Err(Error::data("design dimensions must be positive"));
    }
    let mut draw = |count: usize| -> Vec<Vec<f64>> {
        (0..count)
            .map(|_| (0..n).map(|_| rng.gen_range(1.0..5.0)).collect())
            .collect()
    };
    let xc = draw(j - 1);
    let zc = draw(h - 1);
    DesignPair::with_intercept(n, &xc, &zc)
}

/// Independent draws y_i ~ Beta(μ_iφ_i, φ_i − μ_iφ_i), redrawn in the rare
/// case a draw lands exactly on the boundary in floating point.
pub fn generate_crisp_outcomes(
    mu: &DVector<f64>,
    phi: &DVector<f64>,
    rng: &mut impl Rng,
) -> Result<DVector<f64>> {
    if mu.len() != phi.len() {
        return Err(Error::data("mu and phi lengths differ"));
    }
    let mut y = DVector::zeros(mu.len());
    for i in 0..mu.len() {
        let p = mu[i] * phi[i];
        let q = phi[i] - p;
        if !(p > 0.0 && q > 0.0) {
            return Err(Error::domain(format!(
                "row {i}: invalid beta shapes ({p}, {q})"
            )));
        }
        let dist = BetaDist::new(p, q)
            .map_err(|e| Error::domain(format!("row {i}: {e}")))?;
        let mut attempts = 0;
        y[i] = loop {
            let draw = dist.sample(rng);
            if draw > 0.0 && draw < 1.0 {
                break draw;
            }
            attempts += 1;
            if attempts > 1000 {
                return Err(Error::domain(format!(
                    "row {i}: beta draws with shapes ({p}, {q}) keep underflowing to the boundary"
                )));
            }
        };
    }
    Ok(y)
}

/// Two-step fuzzification: draw a spread s_i from the gamma law, then a mode
/// m_i ~ Beta(y_i s_i, s_i(1−y_i)), so E[m_i | y_i, s_i] = y_i. Degenerate
/// pairs (s_i ≤ 1e-8 or m_i at the floating-point boundary) are resampled.
pub fn fuzzify(
    y: &DVector<f64>,
    rng: &mut impl Rng,
    gamma_shape: f64,
    gamma_rate: f64,
    convention: GammaConvention,
) -> Result<(DVector<f64>, DVector<f64>)> {
    let scale = match convention {
        GammaConvention::ShapeRate => 1.0 / gamma_rate,
        GammaConvention::ShapeScale => gamma_rate,
    };
    let spread_dist = GammaDist::new(gamma_shape, scale)
        .map_err(|e| Error::domain(format!("invalid spread-generation parameters: {e}")))?;
    let n = y.len();
    let mut modes = DVector::zeros(n);
    let mut spreads = DVector::zeros(n);
    let mut resampled = 0usize;
    for i in 0..n {
        let yi = y[i];
        if !(yi > 0.0 && yi < 1.0) {
            return Err(Error::data(format!(
                "row {i}: crisp outcome must be interior, got {yi}"
            )));
        }
        let mut attempts = 0;
        let (m, s) = loop {
            let s = spread_dist.sample(rng);
            if s > 1e-8 {
                if let Ok(mode_dist) = BetaDist::new(yi * s, s * (1.0 - yi)) {
                    let m = mode_dist.sample(rng);
                    if m > 0.0 && m < 1.0 {
                        break (m, s);
                    }
                }
            }
            resampled += 1;
            attempts += 1;
            if attempts > 10_000 {
                return Err(Error::domain(format!(
                    "row {i}: could not draw a non-degenerate fuzzy pair for y = {yi}"
                )));
            }
        };
        modes[i] = m;
        spreads[i] = s;
    }
    if resampled > 0 {
        log::debug!("fuzzify resampled {resampled} degenerate (mode, spread) pairs");
    }
    Ok((modes, spreads))
}

/// The complete generated dataset of one replication: design, then crisp
/// outcomes at the true coefficients, then fuzzification — all from that
/// replication's own RNG stream, so any single replication can be rebuilt
/// without running the others.
pub fn replication_dataset(cfg: &SimConfig, rep: usize) -> Result<FuzzyDataset> {
    let mut rng = replication_rng(cfg.seed, rep);
    let design = generate_design(cfg.n, cfg.j, cfg.h, &mut rng)?;
    let linked = apply_links(&design, &cfg.truth())?;
    let y = generate_crisp_outcomes(&linked.mu, &linked.phi, &mut rng)?;
    let (modes, spreads) = fuzzify(
        &y,
        &mut rng,
        cfg.gamma_shape,
        cfg.gamma_rate,
        cfg.gamma_convention,
    )?;
    FuzzyDataset::new(
        modes.iter().cloned().collect(),
        spreads.iter().cloned().collect(),
        design,
    )
}

/// Coefficient block of a summary row.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Block {
    Beta,
    Gamma,
}

impl fmt::Display for Block {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Block::Beta => "beta",
            Block::Gamma => "gamma",
        })
    }
}

/// Bias/RMSE for one coefficient, averaged over successful replications.
#[derive(Clone, Debug, Serialize)]
pub struct CoefficientStat {
    pub name: String,
    pub bias: f64,
    pub rmse: f64,
}

/// Block-level summary: bias and RMSE averaged over the block's
/// coefficients; r = (positive errors)/(negative errors) and
/// p = % positive, counted over every coefficient × replication.
#[derive(Clone, Debug, Serialize)]
pub struct BlockStat {
    pub block: Block,
    pub bias: f64,
    pub rmse: f64,
    pub r: f64,
    pub p: f64,
}

/// Same measures over all coefficients of an estimator.
#[derive(Clone, Debug, Serialize)]
pub struct OverallStat {
    pub bias: f64,
    pub rmse: f64,
    pub r: f64,
    pub p: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct EstimatorReport {
    pub estimator: Estimator,
    pub failures: usize,
    /// Fuzzy-EM fits that hit the iteration cap (still included).
    pub non_converged: usize,
    pub replications_used: usize,
    pub coefficients: Vec<CoefficientStat>,
    pub blocks: Vec<BlockStat>,
    pub overall: OverallStat,
}

#[derive(Clone, Debug, Serialize)]
pub struct SimulationReport {
    pub n: usize,
    pub j: usize,
    pub h: usize,
    pub b: usize,
    pub seed: u64,
    pub estimators: Vec<EstimatorReport>,
}

enum EstimatorOutcome {
    Success { errors: DVector<f64>, converged: bool },
    Failure(String),
}

fn run_estimator(
    estimator: Estimator,
    data: &FuzzyDataset,
    truth: &DVector<f64>,
    em: &EmConfig,
) -> EstimatorOutcome {
    let result: Result<(DVector<f64>, bool)> = match estimator {
        Estimator::FuzzyEm => {
            fit_fuzzy_em(data, em).map(|fit| (fit.coefficients.concat(), fit.converged))
        }
        Estimator::MlCentroid => {
            fit_crisp_ml(&data.centroid_defuzzified(), data.design(), &em.solver)
                .map(|fit| (fit.coefficients.concat(), true))
        }
        Estimator::MlMode => fit_crisp_ml(&data.modes().clone(), data.design(), &em.solver)
            .map(|fit| (fit.coefficients.concat(), true)),
    };
    match result {
        Ok((estimate, converged)) => EstimatorOutcome::Success {
            errors: estimate - truth,
            converged,
        },
        Err(e) => EstimatorOutcome::Failure(e.to_string()),
    }
}

fn summarize(
    estimator: Estimator,
    outcomes: &[&EstimatorOutcome],
    j: usize,
    h: usize,
) -> Result<EstimatorReport> {
    let k = j + h;
    let mut sum = vec![0.0f64; k];
    let mut sum_sq = vec![0.0f64; k];
    let mut pos = vec![0usize; k];
    let mut neg = vec![0usize; k];
    let mut used = 0usize;
    let mut failures = 0usize;
    let mut non_converged = 0usize;
    for outcome in outcomes {
        match outcome {
            EstimatorOutcome::Success { errors, converged } => {
                used += 1;
                if !converged {
                    non_converged += 1;
                }
                for c in 0..k {
                    let e = errors[c];
                    sum[c] += e;
                    sum_sq[c] += e * e;
                    if e >= 0.0 {
                        if e == 0.0 {
                            log::debug!("exactly-zero estimation error counted as positive");
                        }
                        pos[c] += 1;
                    } else {
                        neg[c] += 1;
                    }
                }
            }
            EstimatorOutcome::Failure(reason) => {
                failures += 1;
                log::debug!("{estimator} replication failed: {reason}");
            }
        }
    }
    if used == 0 {
        return Err(Error::data(format!(
            "all {failures} replications failed for estimator {estimator}"
        )));
    }
    let denom = used as f64;
    let coefficient_name = |c: usize| {
        if c < j {
            format!("beta[{c}]")
        } else {
            format!("gamma[{}]", c - j)
        }
    };
    let coefficients: Vec<CoefficientStat> = (0..k)
        .map(|c| CoefficientStat {
            name: coefficient_name(c),
            bias: sum[c] / denom,
            rmse: (sum_sq[c] / denom).sqrt(),
        })
        .collect();
    let make_stat = |range: std::ops::Range<usize>| {
        let width = range.len() as f64;
        let bias = range.clone().map(|c| coefficients[c].bias).sum::<f64>() / width;
        let rmse = range.clone().map(|c| coefficients[c].rmse).sum::<f64>() / width;
        let pos_total: usize = range.clone().map(|c| pos[c]).sum();
        let neg_total: usize = range.map(|c| neg[c]).sum();
        let r = if neg_total == 0 {
            log::warn!("no negative estimation errors for {estimator}; ratio r is infinite");
            f64::INFINITY
        } else {
            pos_total as f64 / neg_total as f64
        };
        let p = 100.0 * pos_total as f64 / (pos_total + neg_total) as f64;
        (bias, rmse, r, p)
    };
    let (b_bias, b_rmse, b_r, b_p) = make_stat(0..j);
    let (g_bias, g_rmse, g_r, g_p) = make_stat(j..k);
    let (o_bias, o_rmse, o_r, o_p) = make_stat(0..k);
    Ok(EstimatorReport {
        estimator,
        failures,
        non_converged,
        replications_used: used,
        coefficients,
        blocks: vec![
            BlockStat {
                block: Block::Beta,
                bias: b_bias,
                rmse: b_rmse,
                r: b_r,
                p: b_p,
            },
            BlockStat {
                block: Block::Gamma,
                bias: g_bias,
                rmse: g_rmse,
                r: g_r,
                p: g_p,
            },
        ],
        overall: OverallStat {
            bias: o_bias,
            rmse: o_rmse,
            r: o_r,
            p: o_p,
        },
    })
}

/// Run one Monte Carlo cell. Replications execute in parallel on their own
/// RNG streams; aggregation walks them in replication order, so reports are
/// bit-identical across reruns and thread counts.
pub fn run_monte_carlo(cfg: &SimConfig) -> Result<SimulationReport> {
    cfg.validate()?;
    let truth = cfg.truth().concat();
    let mut em = cfg.em.clone();
    em.compute_pseudo_r2 = false;
    let per_rep: Vec<Result<Vec<EstimatorOutcome>>> = (0..cfg.b)
        .into_par_iter()
        .map(|rep| {
            let data = match replication_dataset(cfg, rep) {
                Ok(d) => d,
                // Data generation failing is a property of the cell, not of
                // one estimator; surface it instead of skewing comparisons.
                Err(e) => {
                    return Err(Error::data(format!(
                        "replication {rep}: data generation failed: {e}"
                    )))
                }
            };
            Ok(cfg
                .estimators
                .iter()
                .map(|&est| run_estimator(est, &data, &truth, &em))
                .collect())
        })
        .collect();
    let mut outcomes: Vec<Vec<EstimatorOutcome>> = Vec::with_capacity(cfg.b);
    for rep in per_rep {
        outcomes.push(rep?);
    }
    let estimators = cfg
        .estimators
        .iter()
        .enumerate()
        .map(|(idx, &est)| {
            let column: Vec<&EstimatorOutcome> =
                outcomes.iter().map(|row| &row[idx]).collect();
            summarize(est, &column, cfg.j, cfg.h)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SimulationReport {
        n: cfg.n,
        j: cfg.j,
        h: cfg.h,
        b: cfg.b,
        seed: cfg.seed,
        estimators,
    })
}
