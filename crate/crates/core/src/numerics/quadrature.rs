//! One-dimensional adaptive Simpson quadrature.
//!
//! Evaluation is endpoint-open: sample abscissae are nudged strictly inside
//! (lo, hi), so integrands with integrable endpoint singularities (beta
//! kernels with shape < 1) stay finite.

use crate::error::{Error, Result};

/// Maximum recursion depth per segment.
const MAX_DEPTH: u32 = 60;
/// Total subdivision budget across the whole call. Endpoint-singular beta
/// kernels at tight tolerances need ~10⁶ subdivisions; only such integrands
/// ever approach the cap.
const MAX_SUBDIVISIONS: usize = 1 << 24;

struct Ctx<'a> {
    f: &'a dyn Fn(f64) -> f64,
    lo: f64,
    hi: f64,
    nudge: f64,
    budget: usize,
    /// Sum of per-leaf error estimates |delta|/15 over accepted leaves.
    err_sum: f64,
    nonfinite: bool,
}

impl Ctx<'_> {
    fn eval(&mut self, x: f64) -> f64 {
        let x = x.clamp(self.lo + self.nudge, self.hi - self.nudge);
        let v = (self.f)(x);
        if !v.is_finite() {
            self.nonfinite = true;
        }
        v
    }
}

fn simpson(h: f64, fa: f64, fm: f64, fb: f64) -> f64 {
    h / 6.0 * (fa + 4.0 * fm + fb)
}

#[allow(clippy::too_many_arguments)]
fn recurse(
    ctx: &mut Ctx,
    a: f64,
    fa: f64,
    b: f64,
    fb: f64,
    fm: f64,
    whole: f64,
    eps: f64,
    depth: u32,
) -> f64 {
    // A non-finite sample already condemns the whole call to a domain error;
    // stop expanding the tree instead of propagating NaNs to full depth.
    if ctx.nonfinite {
        return 0.0;
    }
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = ctx.eval(lm);
    let frm = ctx.eval(rm);
    let left = simpson(m - a, fa, flm, fm);
    let right = simpson(b - m, fm, frm, fb);
    let delta = left + right - whole;
    // The factor 15 comes from the O(h⁴) error ratio of nested Simpson rules.
    // Leaves accepted because depth or budget ran out still contribute their
    // |delta|/15 to the accumulated error estimate, so the caller-facing
    // accuracy check stays honest.
    if delta.abs() <= 15.0 * eps || depth == 0 || ctx.budget == 0 {
        ctx.err_sum += delta.abs() / 15.0;
        return left + right + delta / 15.0;
    }
    ctx.budget -= 1;
    let half_eps = 0.5 * eps;
    recurse(ctx, a, fa, m, fm, flm, left, half_eps, depth - 1)
        + recurse(ctx, m, fm, b, fb, frm, right, half_eps, depth - 1)
}

/// Adaptive estimate of ∫ f over (lo, hi) with target absolute error `tol`.
///
/// Returns an accuracy error carrying the best estimate when the subdivision
/// budget runs out, and a domain error if the integrand produces a
/// non-finite value at an interior sample point.
pub fn adaptive_quadrature<F>(f: F, lo: f64, hi: f64, tol: f64) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    if !lo.is_finite() || !hi.is_finite() || !(lo < hi) {
        return Err(Error::domain(format!(
            "adaptive_quadrature requires finite lo < hi, got ({lo}, {hi})"
        )));
    }
    if !(tol > 0.0) {
        return Err(Error::domain(format!(
            "adaptive_quadrature requires tol > 0, got {tol}"
        )));
    }
    let mut ctx = Ctx {
        f: &f,
        lo,
        hi,
        nudge: (hi - lo) * 1e-14,
        budget: MAX_SUBDIVISIONS,
        err_sum: 0.0,
        nonfinite: false,
    };
    let fa = ctx.eval(lo);
    let fb = ctx.eval(hi);
    let m = 0.5 * (lo + hi);
    let fm = ctx.eval(m);
    let whole = simpson(hi - lo, fa, fm, fb);
    let estimate = recurse(&mut ctx, lo, fa, hi, fb, fm, whole, tol, MAX_DEPTH);
    if ctx.nonfinite {
        return Err(Error::domain(
            "integrand returned a non-finite value inside the interval".to_string(),
        ));
    }
    if ctx.err_sum > tol {
        return Err(Error::Accuracy {
            estimate,
            requested: tol,
            achieved: ctx.err_sum,
        });
    }
    Ok(estimate)
}
