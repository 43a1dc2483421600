//! Post-fit inference and diagnostics: empirical information, standard
//! errors, standardized residuals, pseudo-R², likelihood-ratio tests, AIC.

use nalgebra::{DMatrix, DVector};

use crate::em::{FilteredData, FuzzyDataset};
use crate::error::{Error, Result};
use crate::model::{apply_links, score_rows_given_stats, Coefficients, DesignPair};
use crate::numerics::regularized_gamma_q;

/// Empirical observed information Σ_i U_i U_iᵀ built from per-row scores.
#[derive(Clone, Debug)]
pub struct InformationMatrix {
    matrix: DMatrix<f64>,
}

impl InformationMatrix {
    /// `rows` holds one per-observation score U_i per row; the information
    /// matrix is UᵀU, symmetrized against product round-off.
    pub fn from_score_rows(rows: &DMatrix<f64>) -> Self {
        let mut m = rows.transpose() * rows;
        for r in 0..m.nrows() {
            for c in 0..r {
                let avg = 0.5 * (m[(r, c)] + m[(c, r)]);
                m[(r, c)] = avg;
                m[(c, r)] = avg;
            }
        }
        InformationMatrix { matrix: m }
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }
}

/// Empirical information at `coef`, with the filtered statistics treated as
/// data: the outer-product sum of the per-row Q-function scores.
pub fn empirical_information(
    coef: &Coefficients,
    filtered: &FilteredData,
    design: &DesignPair,
) -> Result<InformationMatrix> {
    if filtered.len() != design.n() {
        return Err(Error::data(format!(
            "filtered data length {} does not match design rows {}",
            filtered.len(),
            design.n()
        )));
    }
    apply_links(design, coef)?;
    let rows = score_rows_given_stats(coef, &filtered.y1_star, &filtered.y2_star, design);
    Ok(InformationMatrix::from_score_rows(&rows))
}

/// Square roots of the diagonal of the inverse information. A singular
/// matrix gets one ridge-regularized retry (with a warning) before failing.
pub fn standard_errors(info: &InformationMatrix) -> Result<DVector<f64>> {
    let k = info.dim();
    let inverse = match info.matrix.clone().cholesky() {
        Some(chol) => chol.inverse(),
        None => {
            let max_diag = (0..k).fold(0.0f64, |a, i| a.max(info.matrix[(i, i)].abs()));
            let ridge = 1e-10 * max_diag.max(1.0);
            log::warn!(
                "information matrix not positive definite; retrying with ridge {ridge:e}"
            );
            let ridged = &info.matrix + DMatrix::identity(k, k) * ridge;
            ridged
                .cholesky()
                .ok_or_else(|| {
                    Error::Inference(
                        "information matrix numerically singular even after ridge".into(),
                    )
                })?
                .inverse()
        }
    };
    let mut ses = DVector::zeros(k);
    for i in 0..k {
        let v = inverse[(i, i)];
        if !(v.is_finite() && v >= 0.0) {
            return Err(Error::Inference(format!(
                "negative or non-finite variance estimate at coordinate {i}: {v}"
            )));
        }
        ses[i] = v.sqrt();
    }
    Ok(ses)
}

/// Standardized residuals r_i = (m_i − μ̂_i)(1 − ξ_i(μ̂_i)) / Var̂(y_i) with
/// Var̂(y_i) = μ̂_i(1−μ̂_i)/(1+φ̂_i). Zero both when the fitted mean equals
/// the observed mode and when it carries full membership.
pub fn residuals(coef: &Coefficients, data: &FuzzyDataset) -> Result<DVector<f64>> {
    let linked = apply_links(data.design(), coef)?;
    let n = data.n();
    let mut r = DVector::zeros(n);
    for i in 0..n {
        let mu = linked.mu[i];
        let phi = linked.phi[i];
        let xi = data.fuzzy_number(i).membership(mu);
        let variance = mu * (1.0 - mu) / (1.0 + phi);
        r[i] = (data.modes()[i] - mu) * (1.0 - xi) / variance;
    }
    Ok(r)
}

/// First quartile, median, third quartile by linear interpolation of order
/// statistics (the common "type 7" convention).
pub fn quartiles(values: &[f64]) -> Result<(f64, f64, f64)> {
    if values.is_empty() {
        return Err(Error::data("quartiles of an empty sample are undefined"));
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::data("quartiles require finite values"));
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let at = |p: f64| -> f64 {
        let h = (sorted.len() - 1) as f64 * p;
        let lo = h.floor() as usize;
        let hi = h.ceil() as usize;
        sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
    };
    Ok((at(0.25), at(0.5), at(0.75)))
}

/// Likelihood-ratio-based pseudo-R²: with ω = 2(l₁ − l₀) and λ = l₀/n,
/// returns −ω(1−λ) / ((ω+n)λ), clamped into [0,1] with a warning when the
/// raw value falls outside.
pub fn pseudo_r2(loglik_full: f64, loglik_null: f64, n: usize) -> Result<f64> {
    if n == 0 {
        return Err(Error::data("pseudo-R² requires a nonempty sample"));
    }
    let n = n as f64;
    let lambda = loglik_null / n;
    if lambda == 0.0 {
        return Err(Error::Inference(
            "pseudo-R² undefined: null log-likelihood is exactly zero".into(),
        ));
    }
    let omega = 2.0 * (loglik_full - loglik_null);
    let raw = -omega * (1.0 - lambda) / ((omega + n) * lambda);
    if !raw.is_finite() {
        return Err(Error::Inference(format!(
            "pseudo-R² ill-defined for loglik_full={loglik_full}, loglik_null={loglik_null}, n={n}"
        )));
    }
    if !(0.0..=1.0).contains(&raw) {
        log::warn!("pseudo-R² {raw:.6} outside [0,1]; clamping");
    }
    Ok(raw.clamp(0.0, 1.0))
}

/// Result of a likelihood-ratio test between nested fits.
#[derive(Clone, Debug, PartialEq)]
pub struct LrtResult {
    /// 2·(l_full − l_null), floored at zero.
    pub statistic: f64,
    /// Difference in parameter counts.
    pub df: usize,
    /// Chi-square upper-tail probability of the statistic.
    pub p_value: f64,
}

/// Upper tail P(X > x) for X ~ chi-square with `df` degrees of freedom.
pub fn chi_square_sf(x: f64, df: usize) -> Result<f64> {
    if df == 0 {
        return Err(Error::domain("chi-square requires df ≥ 1"));
    }
    if !(x >= 0.0) {
        return Err(Error::domain(format!(
            "chi-square tail requires x ≥ 0, got {x}"
        )));
    }
    regularized_gamma_q(df as f64 / 2.0, x / 2.0)
}

/// Likelihood-ratio test of a full model against a nested null. Nestedness
/// of the actual column sets is the caller's contract; parameter counts are
/// checked here. A negative 2Δl (possible under incomplete convergence) is
/// floored at zero and logged.
pub fn likelihood_ratio_test(
    loglik_full: f64,
    n_params_full: usize,
    loglik_null: f64,
    n_params_null: usize,
) -> Result<LrtResult> {
    if n_params_full <= n_params_null {
        return Err(Error::data(format!(
            "models are not nested: full has {n_params_full} parameters, null has {n_params_null}"
        )));
    }
    let df = n_params_full - n_params_null;
    let raw = 2.0 * (loglik_full - loglik_null);
    if raw < 0.0 {
        log::warn!(
            "negative LR statistic {raw:.3e} floored at 0; check convergence of the nested fits"
        );
    }
    let statistic = raw.max(0.0);
    let p_value = chi_square_sf(statistic, df)?;
    Ok(LrtResult {
        statistic,
        df,
        p_value,
    })
}

/// Akaike information criterion, 2k − 2·loglik.
pub fn aic(loglik: f64, n_params: usize) -> f64 {
    2.0 * n_params as f64 - 2.0 * loglik
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::em::FuzzyDataset;
    use nalgebra::dmatrix;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha12Rng;

    #[test]
    fn information_from_single_row() {
        let rows = DMatrix::from_row_slice(1, 2, &[1.0, 2.0]);
        let info = InformationMatrix::from_score_rows(&rows);
        assert_eq!(info.matrix(), &dmatrix![1.0, 2.0; 2.0, 4.0]);
    }

    #[test]
    fn information_symmetric_and_permutation_invariant() {
        let mut rng = ChaCha12Rng::seed_from_u64(2);
        let rows = DMatrix::from_fn(9, 3, |_, _| rng.gen_range(-2.0..2.0));
        let info = InformationMatrix::from_score_rows(&rows);
        for r in 0..3 {
            for c in 0..3 {
                assert_eq!(info.matrix()[(r, c)], info.matrix()[(c, r)]);
            }
        }
        let perm: Vec<usize> = vec![4, 0, 7, 2, 8, 1, 5, 3, 6];
        let shuffled = DMatrix::from_fn(9, 3, |r, c| rows[(perm[r], c)]);
        let info2 = InformationMatrix::from_score_rows(&shuffled);
        assert!((info.matrix() - info2.matrix()).abs().max() < 1e-12);
    }

    #[test]
    fn standard_error_values() {
        let eye = InformationMatrix {
            matrix: DMatrix::identity(3, 3),
        };
        let ses = standard_errors(&eye).unwrap();
        assert!(ses.iter().all(|&s| (s - 1.0).abs() < 1e-14));

        let diag = InformationMatrix {
            matrix: DMatrix::from_diagonal(&DVector::from_vec(vec![4.0, 25.0])),
        };
        let ses = standard_errors(&diag).unwrap();
        assert!((ses[0] - 0.5).abs() < 1e-14);
        assert!((ses[1] - 0.2).abs() < 1e-14);
    }

    #[test]
    fn standard_errors_reject_indefinite_matrix() {
        let bad = InformationMatrix {
            matrix: dmatrix![-1.0, 0.0; 0.0, 1.0],
        };
        assert!(matches!(
            standard_errors(&bad),
            Err(Error::Inference(_))
        ));
    }

    fn one_row_dataset(m: f64, s: f64) -> FuzzyDataset {
        let design = DesignPair::with_intercept(1, &[], &[]).unwrap();
        FuzzyDataset::new(vec![m], vec![s], design).unwrap()
    }

    #[test]
    fn residual_zero_cases() {
        // Fitted mean equals the mode: first factor vanishes.
        let data = one_row_dataset(0.5, 7.0);
        let coef = Coefficients::new(vec![0.0], vec![1.0]).unwrap();
        let r = residuals(&coef, &data).unwrap();
        assert_eq!(r[0], 0.0);

        // s = 0 means full membership everywhere: second factor vanishes.
        let data = one_row_dataset(0.8, 0.0);
        let r = residuals(&coef, &data).unwrap();
        assert_eq!(r[0], 0.0);
    }

    #[test]
    fn residual_hand_value() {
        // m=0.7, μ̂=0.5, s large (ξ(0.5)≈0), φ̂=3 → 0.2/(0.25/4) = 3.2.
        let data = one_row_dataset(0.7, 500.0);
        let coef = Coefficients::new(vec![0.0], vec![3f64.ln()]).unwrap();
        let r = residuals(&coef, &data).unwrap();
        assert!((r[0] - 3.2).abs() < 1e-9, "got {}", r[0]);
    }

    #[test]
    fn residual_sign_matches_mode_minus_mean() {
        let mut rng = ChaCha12Rng::seed_from_u64(17);
        let n = 30;
        let design = DesignPair::with_intercept(n, &[], &[]).unwrap();
        let modes: Vec<f64> = (0..n).map(|_| rng.gen_range(0.05..0.95)).collect();
        let spreads: Vec<f64> = (0..n).map(|_| rng.gen_range(0.5..50.0)).collect();
        let data = FuzzyDataset::new(modes.clone(), spreads, design).unwrap();
        let coef = Coefficients::new(vec![0.3], vec![1.0]).unwrap();
        let mu = 1.0 / (1.0 + (-0.3f64).exp());
        let r = residuals(&coef, &data).unwrap();
        for i in 0..n {
            if (modes[i] - mu).abs() > 1e-12 {
                assert_eq!(r[i].signum(), (modes[i] - mu).signum(), "row {i}");
            }
        }
    }

    #[test]
    fn quartile_values() {
        let (q1, med, q3) = quartiles(&[1.0, 2.0, 3.0, 4.0, 5.0]).unwrap();
        assert_eq!((q1, med, q3), (2.0, 3.0, 4.0));
        let (q1, med, q3) = quartiles(&[4.0, 1.0, 3.0, 2.0]).unwrap();
        assert!((q1 - 1.75).abs() < 1e-14);
        assert!((med - 2.5).abs() < 1e-14);
        assert!((q3 - 3.25).abs() < 1e-14);
        assert!(quartiles(&[]).is_err());
    }

    #[test]
    fn pseudo_r2_values() {
        assert_eq!(pseudo_r2(12.5, 12.5, 40).unwrap(), 0.0);
        // Literal transcription oracle on random admissible inputs.
        let mut rng = ChaCha12Rng::seed_from_u64(4);
        for _ in 0..50 {
            let l0 = rng.gen_range(1.0..80.0);
            let l1 = l0 + rng.gen_range(0.0..40.0);
            let n = rng.gen_range(10..500usize);
            let omega = 2.0 * (l1 - l0);
            let lambda = l0 / n as f64;
            let oracle = (-omega * (1.0 - lambda) / ((omega + n as f64) * lambda))
                .clamp(0.0, 1.0);
            let got = pseudo_r2(l1, l0, n).unwrap();
            assert!((got - oracle).abs() < 1e-13);
        }
    }

    #[test]
    fn pseudo_r2_clamps_and_rejects_zero_null() {
        // ω < 0 with λ < 0 makes the raw value negative → clamp to 0.
        assert_eq!(pseudo_r2(-60.0, -50.0, 100).unwrap(), 0.0);
        assert!(matches!(
            pseudo_r2(5.0, 0.0, 100),
            Err(Error::Inference(_))
        ));
        assert!(pseudo_r2(5.0, 5.0, 0).is_err());
    }

    #[test]
    fn lrt_reference_value() {
        // Δl = 2.5005, df = 1: statistic 5.001, p ≈ 0.0253.
        let res = likelihood_ratio_test(2.5005, 2, 0.0, 1).unwrap();
        assert!((res.statistic - 5.001).abs() < 1e-12);
        assert_eq!(res.df, 1);
        // Frozen chi-square tail: Q(1/2, 5.001/2).
        assert!((res.p_value - 0.02533267808747375).abs() < 1e-12);
        assert!((res.p_value - 0.0253).abs() < 5e-4);
    }

    #[test]
    fn lrt_edge_cases() {
        let zero = likelihood_ratio_test(7.0, 3, 7.0, 1).unwrap();
        assert_eq!(zero.statistic, 0.0);
        assert_eq!(zero.df, 2);
        assert_eq!(zero.p_value, 1.0);

        // Slightly negative Δl floors at zero.
        let floored = likelihood_ratio_test(6.9999, 2, 7.0, 1).unwrap();
        assert_eq!(floored.statistic, 0.0);
        assert_eq!(floored.p_value, 1.0);

        assert!(likelihood_ratio_test(7.0, 2, 6.0, 2).is_err());
        assert!(likelihood_ratio_test(7.0, 1, 6.0, 2).is_err());
    }

    #[test]
    fn chi_square_tail_df2_closed_form() {
        // For df = 2 the tail is exactly exp(−x/2).
        let p = chi_square_sf(5.991, 2).unwrap();
        assert!((p - (-5.991f64 / 2.0).exp()).abs() < 1e-13);
        assert!((p - 0.05).abs() < 5e-5);
        assert!(chi_square_sf(-1.0, 2).is_err());
        assert!(chi_square_sf(1.0, 0).is_err());
    }

    #[test]
    fn aic_values() {
        assert_eq!(aic(0.0, 3), 6.0);
        assert!((aic(88.69, 7) - -163.38).abs() < 1e-10);
        assert!(aic(10.0, 4) > aic(11.0, 4));
    }
}
