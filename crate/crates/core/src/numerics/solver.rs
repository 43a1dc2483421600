//! Damped Newton root finder for small square systems.
//!
//! The M-step score system is square ((J+H) equations in (J+H) unknowns), so
//! Newton with step halving is the natural method. The Jacobian is either
//! supplied analytically or approximated by central finite differences; a
//! Levenberg-style ridge retry handles (near-)singular Jacobians.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{Error, Result};

/// Tolerances and limits for [`damped_newton_root`].
#[derive(Clone, Debug, Serialize)]
pub struct SolverConfig {
    pub max_iterations: usize,
    /// Declare stagnation when an accepted step is shorter than this (∞-norm).
    pub step_tolerance: f64,
    /// Success when ‖F(x)‖∞ falls at or below this.
    pub residual_tolerance: f64,
    /// Multiplicative step-halving factor, in (0,1).
    pub damping_factor: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            max_iterations: 200,
            step_tolerance: 1e-10,
            residual_tolerance: 1e-8,
            damping_factor: 0.5,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_iterations == 0 {
            return Err(Error::domain("max_iterations must be positive"));
        }
        if !(self.step_tolerance > 0.0) || !(self.residual_tolerance > 0.0) {
            return Err(Error::domain("solver tolerances must be positive"));
        }
        if !(self.damping_factor > 0.0 && self.damping_factor < 1.0) {
            return Err(Error::domain("damping_factor must lie in (0,1)"));
        }
        Ok(())
    }
}

/// Root of F with ‖F(x)‖∞ ≤ `cfg.residual_tolerance`, with the residual-norm
/// history of accepted iterates. Uses a central finite-difference Jacobian.
pub fn damped_newton_root<F>(
    f: F,
    x0: &DVector<f64>,
    cfg: &SolverConfig,
) -> Result<(DVector<f64>, Vec<f64>)>
where
    F: Fn(&DVector<f64>) -> DVector<f64>,
{
    newton_impl(&f, None, x0, cfg)
}

/// Same as [`damped_newton_root`] with a caller-supplied Jacobian.
pub fn damped_newton_root_with_jacobian<F, J>(
    f: F,
    jacobian: J,
    x0: &DVector<f64>,
    cfg: &SolverConfig,
) -> Result<(DVector<f64>, Vec<f64>)>
where
    F: Fn(&DVector<f64>) -> DVector<f64>,
    J: Fn(&DVector<f64>) -> DMatrix<f64>,
{
    newton_impl(&f, Some(&jacobian), x0, cfg)
}

fn inf_norm(v: &DVector<f64>) -> f64 {
    v.iter().fold(0.0f64, |acc, x| acc.max(x.abs()))
}

/// Cap on the ∞-norm of a single Newton step. Score equations with clamped
/// link functions go flat far from the optimum; an uncapped step from a
/// near-flat region can overshoot onto a plateau where the finite-difference
/// Jacobian vanishes and no direction can recover.
const MAX_STEP_INF: f64 = 10.0;

fn finite_difference_jacobian(
    f: &dyn Fn(&DVector<f64>) -> DVector<f64>,
    x: &DVector<f64>,
    n_out: usize,
) -> DMatrix<f64> {
    let n = x.len();
    let mut jac = DMatrix::zeros(n_out, n);
    // Central differences with h ~ cbrt(eps) · scale balance truncation
    // against cancellation.
    let base = f64::EPSILON.cbrt();
    for j in 0..n {
        let h = base * (1.0 + x[j].abs());
        let mut xp = x.clone();
        let mut xm = x.clone();
        xp[j] += h;
        xm[j] -= h;
        let fp = f(&xp);
        let fm = f(&xm);
        for i in 0..n_out {
            jac[(i, j)] = (fp[i] - fm[i]) / (2.0 * h);
        }
    }
    jac
}

/// Solve J d = −r, falling back to a ridge-regularized normal-equation solve
/// when the plain LU factorization fails or produces a non-finite direction.
fn solve_direction(jac: &DMatrix<f64>, residual: &DVector<f64>) -> Option<DVector<f64>> {
    let rhs = -residual;
    if let Some(d) = jac.clone().lu().solve(&rhs) {
        if d.iter().all(|v| v.is_finite()) {
            return Some(d);
        }
    }
    // Levenberg-style ridge on the normal equations; JᵀJ + λI is SPD for
    // λ > 0, so this always yields a descent-flavored direction.
    let jt = jac.transpose();
    let jtj = &jt * jac;
    let jtr = &jt * &rhs;
    let scale = jtj.diagonal().iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let mut lambda = 1e-10 * scale.max(1e-30);
    for _ in 0..12 {
        let mut ridged = jtj.clone();
        for i in 0..ridged.nrows() {
            ridged[(i, i)] += lambda;
        }
        if let Some(d) = ridged.lu().solve(&jtr) {
            if d.iter().all(|v| v.is_finite()) {
                return Some(d);
            }
        }
        lambda *= 100.0;
    }
    None
}

fn newton_impl(
    f: &dyn Fn(&DVector<f64>) -> DVector<f64>,
    jacobian: Option<&dyn Fn(&DVector<f64>) -> DMatrix<f64>>,
    x0: &DVector<f64>,
    cfg: &SolverConfig,
) -> Result<(DVector<f64>, Vec<f64>)> {
    cfg.validate()?;
    if x0.iter().any(|v| !v.is_finite()) {
        return Err(Error::domain("initial point must be finite"));
    }
    let mut x = x0.clone();
    let mut residual = f(&x);
    if residual.iter().any(|v| !v.is_finite()) {
        return Err(Error::domain(
            "residual function returned non-finite values at the initial point",
        ));
    }
    let n_out = residual.len();
    let mut norm = inf_norm(&residual);
    let mut trace = vec![norm];

    for iter in 0..cfg.max_iterations {
        if norm <= cfg.residual_tolerance {
            return Ok((x, trace));
        }
        let jac = match jacobian {
            Some(j) => j(&x),
            None => finite_difference_jacobian(f, &x, n_out),
        };
        let Some(mut direction) = solve_direction(&jac, &residual) else {
            return Err(Error::Solver {
                reason: "singular Jacobian (ridge retry failed)".to_string(),
                iterations: iter,
                trace,
            });
        };
        let direction_norm = inf_norm(&direction);
        if direction_norm > MAX_STEP_INF {
            direction *= MAX_STEP_INF / direction_norm;
        }

        // Step halving: accept the first damped step that strictly reduces
        // the residual norm and stays finite. The full step is always tried:
        // near convergence the exact Newton correction is legitimately
        // shorter than step_tolerance and refusing it would strand the
        // iterate just above the residual tolerance.
        let capped_norm = direction_norm.min(MAX_STEP_INF);
        let mut t = 1.0;
        let mut accepted = None;
        loop {
            let candidate = &x + &direction * t;
            let r = f(&candidate);
            if r.iter().all(|v| v.is_finite()) {
                let n = inf_norm(&r);
                if n < norm {
                    accepted = Some((candidate, r, n, t));
                    break;
                }
            }
            t *= cfg.damping_factor;
            if t * capped_norm <= cfg.step_tolerance {
                break;
            }
        }
        match accepted {
            Some((cx, cr, cn, t)) => {
                let step = t * inf_norm(&direction);
                x = cx;
                residual = cr;
                norm = cn;
                trace.push(norm);
                if norm <= cfg.residual_tolerance {
                    return Ok((x, trace));
                }
                if step <= cfg.step_tolerance {
                    return Err(Error::Solver {
                        reason: format!(
                            "stagnated: step {step:e} below tolerance with residual {norm:e}"
                        ),
                        iterations: iter + 1,
                        trace,
                    });
                }
            }
            None => {
                return Err(Error::Solver {
                    reason: format!(
                        "line search could not reduce the residual below {norm:e}"
                    ),
                    iterations: iter + 1,
                    trace,
                });
            }
        }
    }
    if norm <= cfg.residual_tolerance {
        return Ok((x, trace));
    }
    Err(Error::Solver {
        reason: format!("no convergence within {} iterations", cfg.max_iterations),
        iterations: cfg.max_iterations,
        trace,
    })
}
