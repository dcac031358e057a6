//! Frank copula ground truth: CDF, first-order partials, conditional
//! sampler and the pointwise asymptotic variance of the estimator.
//!
//! With `a = expm1(-θu)`, `b = expm1(-θv)`, `c = expm1(-θ)` the Frank CDF is
//! `-(1/θ) log1p(a b / c)`. Expressions are written in these factors and the
//! ratio `b / c ∈ [0, 1]`, which keeps small `|θ|` accurate and large `|θ|`
//! free of overflow. For `θ > 0` the quantity `1 + a b / c` can cancel down
//! to ~`e^{−θ/2}`; there the code switches to sums of positive terms.

use crate::error::{Error, Result};
use crate::estimator::CopulaGrid;

/// Below this `|θ|` the Frank family is replaced by the independence copula.
pub const INDEPENDENCE_THRESHOLD: f64 = 1e-8;

/// Largest `|θ|` the conditional sampler accepts; beyond it `e^{|θ|}`
/// overflows.
pub const MAX_SAMPLER_THETA: f64 = 700.0;

/// Lower Fréchet–Hoeffding bound `max(u + v - 1, 0)`.
pub fn frechet_lower(u: f64, v: f64) -> f64 {
    (u + v - 1.0).max(0.0)
}

/// Upper Fréchet–Hoeffding bound `min(u, v)`.
pub fn frechet_upper(u: f64, v: f64) -> f64 {
    u.min(v)
}

/// Frank copula with dependence parameter `theta`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrankCopula {
    theta: f64,
}

impl FrankCopula {
    pub fn new(theta: f64) -> Result<Self> {
        if !theta.is_finite() {
            return Err(Error::Domain(format!(
                "Frank parameter must be finite, got {theta}"
            )));
        }
        Ok(Self { theta })
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn is_independence(&self) -> bool {
        self.theta.abs() < INDEPENDENCE_THRESHOLD
    }

    /// `C_θ(u, v)`. Arguments are clamped to `[0, 1]`.
    pub fn cdf(&self, u: f64, v: f64) -> f64 {
        let (u, v) = (u.clamp(0.0, 1.0), v.clamp(0.0, 1.0));
        if u == 0.0 || v == 0.0 {
            return 0.0;
        }
        if u == 1.0 {
            return v;
        }
        if v == 1.0 {
            return u;
        }
        if self.is_independence() {
            return u * v;
        }
        let t = self.theta;
        let a = (-t * u).exp_m1();
        let rb = (-t * v).exp_m1() / (-t).exp_m1();
        let x = a * rb;
        let c = if x > -0.5 {
            -x.ln_1p() / t
        } else {
            // θ > 0 and 1 + x tiny: 1 + x = den / (1 − e^{−θ}) with den a sum
            // of positive terms.
            -(self.positive_denominator(u, v).ln() - (-(-t).exp()).ln_1p()) / t
        };
        c.clamp(frechet_lower(u, v), frechet_upper(u, v))
    }

    /// `(∂C/∂u, ∂C/∂v)` at `(u, v)`, each in `[0, 1]`.
    ///
    /// Boundary points take their one-sided limits, e.g. `C_u(u, 1) = 1`,
    /// `C_u(u, 0) = 0`.
    pub fn partials(&self, u: f64, v: f64) -> (f64, f64) {
        let (u, v) = (u.clamp(0.0, 1.0), v.clamp(0.0, 1.0));
        if self.is_independence() {
            return (v, u);
        }
        (self.partial_first(u, v), self.partial_first(v, u))
    }

    /// For `θ > 0`, `e^{−θ(u+v)} − e^{−θu} − e^{−θv} + e^{−θ}` up to sign,
    /// written as `p (1 − e^{−θ(1−u)}) + q (1 − p)` with `p = e^{−θu}`,
    /// `q = e^{−θv}`; both terms are nonnegative.
    fn positive_denominator(&self, u: f64, v: f64) -> f64 {
        let t = self.theta;
        let p = (-t * u).exp();
        let q = (-t * v).exp();
        -p * (-t * (1.0 - u)).exp_m1() - q * (-t * u).exp_m1()
    }

    /// `∂C/∂u`.
    fn partial_first(&self, u: f64, v: f64) -> f64 {
        if v == 0.0 {
            return 0.0;
        }
        if v == 1.0 {
            return 1.0;
        }
        let t = self.theta;
        let d = if t > 0.0 {
            let p = (-t * u).exp();
            -p * (-t * v).exp_m1() / self.positive_denominator(u, v)
        } else {
            // (1 + a) r / (1 + a r) with a = e^{−θu} − 1 ≥ 0, r = b / c ≥ 0.
            let a = (-t * u).exp_m1();
            let r = (-t * v).exp_m1() / (-t).exp_m1();
            let d = (1.0 + a) * r / (1.0 + a * r);
            // (1 + a) overflows only for θ ≪ 0 and u near 1, where the
            // ratio tends to 1.
            if d.is_finite() {
                d
            } else {
                1.0
            }
        };
        d.clamp(0.0, 1.0)
    }

    /// Inverse of the conditional CDF `w ↦ v` with `C_u(u, v) = w`, the
    /// conditional-sampling step for `V | U = u`.
    ///
    /// `v = -(1/θ) log1p(w c / (1 + a (1 - w)))`.
    pub fn conditional_sample(&self, u: f64, w: f64) -> Result<f64> {
        if self.theta.abs() > MAX_SAMPLER_THETA {
            return Err(Error::Domain(format!(
                "Frank sampler supports |theta| <= {MAX_SAMPLER_THETA}, got {}",
                self.theta
            )));
        }
        if !(0.0..=1.0).contains(&u) || !(0.0..=1.0).contains(&w) {
            return Err(Error::Domain(format!(
                "conditional sample needs u, w in [0, 1], got ({u}, {w})"
            )));
        }
        if self.is_independence() {
            return Ok(w);
        }
        let t = self.theta;
        let a = (-t * u).exp_m1();
        let c = (-t).exp_m1();
        let x = w * c / (1.0 + a * (1.0 - w));
        let v = if x > -0.5 {
            -x.ln_1p() / t
        } else {
            // θ > 0: e^{−θv} = (p (1 − w) + w e^{−θ}) / (p + w (1 − p)),
            // every term positive.
            let p = (-t * u).exp();
            let q = (p * (1.0 - w) + w * (-t).exp()) / (p - w * a);
            -q.ln() / t
        };
        Ok(v.clamp(0.0, 1.0))
    }

    /// Pointwise asymptotic variance of `√n (Ĉ(u, v) − C(u, v))`.
    ///
    /// Variance of the linearisation
    /// `1{U≤u,V≤v} − C_u 1{U≤u} − C_v 1{V≤v}`:
    ///
    /// `C(1−C) − 2(1−u) C C_u − 2(1−v) C C_v + u(1−u) C_u² + v(1−v) C_v²
    ///  + 2 C_u C_v (C − uv)`.
    ///
    /// Zero on the boundary of the unit square.
    pub fn sigma2(&self, u: f64, v: f64) -> f64 {
        if u <= 0.0 || v <= 0.0 || u >= 1.0 || v >= 1.0 {
            return 0.0;
        }
        let c = self.cdf(u, v);
        let (cu, cv) = self.partials(u, v);
        let s = c * (1.0 - c) - 2.0 * (1.0 - u) * c * cu - 2.0 * (1.0 - v) * c * cv
            + u * (1.0 - u) * cu * cu
            + v * (1.0 - v) * cv * cv
            + 2.0 * cu * cv * (c - u * v);
        // The exact variance is nonnegative; clip rounding noise only.
        if s < 0.0 && s > -1e-14 {
            0.0
        } else {
            s
        }
    }
}

/// `σ²(u, v)` tabulated on a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct VarianceField {
    grid: CopulaGrid,
}

impl VarianceField {
    pub fn evaluate(copula: &FrankCopula, u_knots: &[f64], v_knots: &[f64]) -> Self {
        Self {
            grid: CopulaGrid::from_fn(u_knots, v_knots, |u, v| copula.sigma2(u, v)),
        }
    }

    /// Wraps externally computed variances (e.g. a plug-in estimate).
    pub fn from_grid(grid: CopulaGrid) -> Self {
        Self { grid }
    }

    pub fn grid(&self) -> &CopulaGrid {
        &self.grid
    }
}

/// The Frank-specific `α + β` expansion as printed alongside the general
/// variance formula. Kept for cross-checking; it differs from
/// [`FrankCopula::sigma2`] in the sign of two terms.
pub fn printed_frank_sigma2(theta: f64, u: f64, v: f64) -> f64 {
    let (eu, ev, e1) = ((-theta * u).exp(), (-theta * v).exp(), (-theta).exp());
    let euv = (-theta * (u + v)).exp();
    let den = euv - eu - ev + e1;
    let c = FrankCopula { theta }.cdf(u, v);
    let alpha = c
        * (1.0 - c
            - (2.0 * (1.0 - u) * eu * (ev - 1.0) + 2.0 * (1.0 - v) * ev * (eu - 1.0)) / den)
        + c * (2.0 * euv * (eu - 1.0) * (ev - 1.0) / (den * den));
    let beta = (u * (1.0 - u) * eu * eu * (ev - 1.0).powi(2)
        + v * (1.0 - v) * ev * ev * (eu - 1.0).powi(2))
        / (den * den)
        + 2.0 * u * v * euv * (eu - 1.0) * (ev - 1.0) / (den * den);
    alpha + beta
}

/// The general variance formula exactly as printed, with the
/// `−(1−v) C_v` sign inside the braces and a `−2uv C_u C_v` cross term.
pub fn printed_general_sigma2(copula: &FrankCopula, u: f64, v: f64) -> f64 {
    let c = copula.cdf(u, v);
    let (cu, cv) = copula.partials(u, v);
    c * (1.0 - c - 2.0 * ((1.0 - u) * cu - (1.0 - v) * cv + cu * cv))
        + u * (1.0 - u) * cu * cu
        + v * (1.0 - v) * cv * cv
        - 2.0 * u * v * cu * cv
}
