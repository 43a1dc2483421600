//! Beta and trapezoidal fuzzy numbers on the unit interval: membership
//! evaluation, normalization, α-cuts, defuzzification, and shape conversion.
//!
//! A beta fuzzy number is parameterized by its mode `m ∈ (0,1)` and precision
//! `s ≥ 0`; its membership is the beta kernel y^(a−1)(1−y)^(b−1) with
//! a = 1 + m·s and b = 1 + s·(1−m), rescaled by the constant C so the value
//! at the mode is exactly 1. All kernel arithmetic happens in log space so
//! large precisions cannot overflow.

use crate::error::{Error, Result};
use crate::numerics::{adaptive_quadrature, log_beta_raw};

/// Clamp bound applied to out-of-range modes read from data files.
pub const MODE_CLAMP: f64 = 1e-6;

/// Clamp an observed mode into [MODE_CLAMP, 1 − MODE_CLAMP].
///
/// Returns the possibly-adjusted value and whether clamping occurred; callers
/// ingesting files count and report the adjustments (or reject instead).
pub fn clamp_mode(m: f64) -> (f64, bool) {
    if m < MODE_CLAMP {
        (MODE_CLAMP, true)
    } else if m > 1.0 - MODE_CLAMP {
        (1.0 - MODE_CLAMP, true)
    } else {
        (m, false)
    }
}

/// A normal, unimodal fuzzy subset of (0,1) with beta-kernel membership.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BetaFuzzyNumber {
    m: f64,
    s: f64,
}

/// The crisp set {y : membership(y) ≥ alpha}.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AlphaCut {
    pub lower: f64,
    pub upper: f64,
    pub alpha: f64,
}

impl BetaFuzzyNumber {
    /// `m` must lie strictly inside (0,1); `s` must be nonnegative and
    /// finite. `s = 0` is the fully-uncertain boundary case where the
    /// membership is identically 1 (C := 1 by continuity).
    pub fn new(m: f64, s: f64) -> Result<Self> {
        if !m.is_finite() || !(m > 0.0 && m < 1.0) {
            return Err(Error::domain(format!(
                "fuzzy mode must lie in (0,1), got {m}"
            )));
        }
        if !s.is_finite() || s < 0.0 {
            return Err(Error::domain(format!(
                "fuzzy precision must be finite and ≥ 0, got {s}"
            )));
        }
        Ok(BetaFuzzyNumber { m, s })
    }

    pub fn mode(&self) -> f64 {
        self.m
    }

    pub fn precision(&self) -> f64 {
        self.s
    }

    /// Beta-kernel shape parameters (a, b) = (1 + m·s, 1 + s·(1−m)).
    pub fn shape_parameters(&self) -> (f64, f64) {
        (1.0 + self.m * self.s, 1.0 + self.s * (1.0 - self.m))
    }

    /// ln C where C = m^(m·s) · (1−m)^(s·(1−m)) rescales the kernel to peak
    /// at exactly 1. At s = 0 this is 0 (C = 1) by continuity.
    pub fn log_normalization_constant(&self) -> f64 {
        self.m * self.s * self.m.ln() + self.s * (1.0 - self.m) * (1.0 - self.m).ln()
    }

    /// The normalization constant C.
    pub fn normalization_constant(&self) -> f64 {
        self.log_normalization_constant().exp()
    }

    /// ln membership; −∞ at the endpoints (for s > 0), 0 at the mode.
    pub fn log_membership(&self, y: f64) -> f64 {
        if self.s == 0.0 {
            return 0.0;
        }
        if y <= 0.0 || y >= 1.0 {
            return f64::NEG_INFINITY;
        }
        self.m * self.s * (y / self.m).ln()
            + self.s * (1.0 - self.m) * ((1.0 - y) / (1.0 - self.m)).ln()
    }

    /// Membership degree in [0,1]; 0 outside the closed unit interval.
    pub fn membership(&self, y: f64) -> f64 {
        if !(0.0..=1.0).contains(&y) {
            return 0.0;
        }
        if y == self.m {
            return 1.0;
        }
        self.log_membership(y).exp()
    }

    /// The α-cut, solved by bisection on the log-membership over the logit
    /// scale.
    ///
    /// At α = 1 the cut degenerates to {m}; at s = 0 the membership is
    /// identically 1 so every cut is the whole interval [0,1].
    pub fn alpha_cut(&self, alpha: f64) -> Result<AlphaCut> {
        if !alpha.is_finite() || !(alpha > 0.0 && alpha <= 1.0) {
            return Err(Error::domain(format!(
                "alpha level must lie in (0,1], got {alpha}"
            )));
        }
        if self.s == 0.0 {
            return Ok(AlphaCut {
                lower: 0.0,
                upper: 1.0,
                alpha,
            });
        }
        if alpha == 1.0 {
            return Ok(AlphaCut {
                lower: self.m,
                upper: self.m,
                alpha,
            });
        }
        let target = alpha.ln();
        let lower = self.bisect_membership(0.0, self.m, target);
        let upper = self.bisect_membership(1.0, self.m, target);
        Ok(AlphaCut {
            lower,
            upper,
            alpha,
        })
    }

    /// Find y between `outer` (an endpoint) and the mode with log-membership
    /// = target. Log-membership is monotone between an endpoint and the mode,
    /// going from −∞ to 0, so the root is bracketed by construction.
    ///
    /// The search runs on the logit scale: when m·s or s·(1−m) is small the
    /// cut bound can sit within e.g. 1e-80 of the endpoint — far below any
    /// absolute resolution in y — while its logit stays O(100). The outward
    /// march below always terminates because the sigmoid saturates to an
    /// exact endpoint (membership −∞) once |t| exceeds ~745.
    fn bisect_membership(&self, outer: f64, inner: f64, target: f64) -> f64 {
        let logit = |y: f64| (y / (1.0 - y)).ln();
        let sigmoid = |t: f64| 1.0 / (1.0 + (-t).exp());
        let value = |t: f64| self.log_membership(sigmoid(t));
        let direction = if outer < inner { -1.0 } else { 1.0 };
        let mut hi = logit(inner); // membership above target
        let mut step = 1.0;
        let mut lo = hi + direction * step; // membership below target
        while value(lo) >= target {
            step *= 2.0;
            lo = hi + direction * step;
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if (hi - lo).abs() <= 1e-12 * (1.0 + mid.abs()) {
                break;
            }
            if value(mid) >= target {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        sigmoid(0.5 * (lo + hi))
    }

    /// Area under the membership curve: ∫ ξ = B(a,b)/C in closed form.
    pub fn membership_area(&self) -> f64 {
        let (a, b) = self.shape_parameters();
        (log_beta_raw(a, b) - self.log_normalization_constant()).exp()
    }

    /// Centroid defuzzifier ∫yξ/∫ξ = (1 + m·s)/(2 + s), the mean of the
    /// Beta(a,b) shape. Always inside (0,1).
    pub fn centroid(&self) -> f64 {
        (1.0 + self.m * self.s) / (2.0 + self.s)
    }

    /// Literal unnormalized centroid ∫ y·ξ(y) dy = B(a+1,b)/C, kept for
    /// fidelity experiments; unlike [`centroid`](Self::centroid) it shrinks
    /// toward 0 as the membership area does.
    pub fn centroid_unnormalized(&self) -> f64 {
        let (a, b) = self.shape_parameters();
        (log_beta_raw(a + 1.0, b) - self.log_normalization_constant()).exp()
    }

    /// First-maximum defuzzifier: the argmax of a normal unimodal
    /// membership, i.e. the mode itself.
    pub fn first_maximum(&self) -> f64 {
        self.m
    }
}

/// Piecewise-linear trapezoidal fuzzy number with support [a,d] ⊆ [0,1] and
/// core [b,c].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TrapezoidalFuzzyNumber {
    a: f64,
    b: f64,
    c: f64,
    d: f64,
}

impl TrapezoidalFuzzyNumber {
    pub fn new(a: f64, b: f64, c: f64, d: f64) -> Result<Self> {
        for (name, v) in [("a", a), ("b", b), ("c", c), ("d", d)] {
            if !v.is_finite() || !(0.0..=1.0).contains(&v) {
                return Err(Error::domain(format!(
                    "trapezoid abscissa {name} must lie in [0,1], got {v}"
                )));
            }
        }
        if !(a < b && b <= c && c < d) {
            return Err(Error::domain(format!(
                "trapezoid abscissae must satisfy a < b ≤ c < d, got ({a}, {b}, {c}, {d})"
            )));
        }
        Ok(TrapezoidalFuzzyNumber { a, b, c, d })
    }

    pub fn abscissae(&self) -> (f64, f64, f64, f64) {
        (self.a, self.b, self.c, self.d)
    }

    pub fn membership(&self, y: f64) -> f64 {
        if y <= self.a || y >= self.d {
            0.0
        } else if y < self.b {
            (y - self.a) / (self.b - self.a)
        } else if y <= self.c {
            1.0
        } else {
            (self.d - y) / (self.d - self.c)
        }
    }

    /// Area under the membership: ((d−a) + (c−b)) / 2.
    pub fn membership_area(&self) -> f64 {
        0.5 * ((self.d - self.a) + (self.c - self.b))
    }

    pub fn core_midpoint(&self) -> f64 {
        0.5 * (self.b + self.c)
    }
}

/// Largest precision the conversion search will consider.
const CONVERSION_MAX_PRECISION: f64 = 1e12;
/// Target accuracy for the matched membership area.
const CONVERSION_TOLERANCE: f64 = 1e-10;

/// Convert a trapezoid to the beta fuzzy number with the same membership
/// area.
///
/// The mode is pinned at the core midpoint; the beta-side area is then a
/// continuous, strictly decreasing function of s (1 at s = 0, → 0 as
/// s → ∞), so a single bisection on s drives the area discrepancy δ to zero
/// and the smallest matching s is automatically the unique one.
pub fn trapezoid_to_beta(tz: &TrapezoidalFuzzyNumber) -> Result<BetaFuzzyNumber> {
    let target = tz.membership_area();
    if target <= 1e-12 {
        return Err(Error::Conversion(format!(
            "trapezoid membership area {target:e} is too small to match"
        )));
    }
    if target >= 1.0 {
        return Err(Error::Conversion(format!(
            "trapezoid membership area {target} is not matchable by a beta shape"
        )));
    }
    let m = tz.core_midpoint();
    let area = |s: f64| -> f64 {
        if s == 0.0 {
            return 1.0;
        }
        let a = 1.0 + m * s;
        let b = 1.0 + s * (1.0 - m);
        let log_c = m * s * m.ln() + s * (1.0 - m) * (1.0 - m).ln();
        (log_beta_raw(a, b) - log_c).exp()
    };

    // Expand the bracket until the area drops below the target.
    let mut hi = 1.0;
    while area(hi) > target {
        hi *= 2.0;
        if hi > CONVERSION_MAX_PRECISION {
            return Err(Error::Conversion(format!(
                "no precision below {CONVERSION_MAX_PRECISION:e} matches area {target}"
            )));
        }
    }
    let mut lo = 0.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let delta = area(mid) - target;
        if delta.abs() <= CONVERSION_TOLERANCE || (hi - lo) <= f64::EPSILON * hi.max(1.0) {
            return BetaFuzzyNumber::new(m, mid);
        }
        if delta > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    BetaFuzzyNumber::new(m, 0.5 * (lo + hi))
}

/// Quadrature cross-check used by tests: ∫ξ computed numerically.
#[doc(hidden)]
pub fn membership_area_by_quadrature(fuzzy: &BetaFuzzyNumber, tol: f64) -> Result<f64> {
    adaptive_quadrature(|y| fuzzy.membership(y), 0.0, 1.0, tol)
}
