//! Simultaneous confidence bands around a copula estimate.
//!
//! The LIL band has constant half-width `(1 + ε) A / R_n` with
//! `R_n = sqrt(n / (2 log log n))`; `ε = 0` gives the plain band and `±ε`
//! its widened and narrowed companions. The normal baseline uses the
//! pointwise half-width `z · sqrt(σ²(u, v) / n)`.

use std::fmt;
use std::str::FromStr;

use crate::copula::VarianceField;
use crate::error::{Error, Result};
use crate::estimator::CopulaGrid;
use crate::specfun::normal_quantile;

/// Smallest sample size the band constructors accept; from here on
/// `log log n >= 1`.
pub const MIN_BAND_N: usize = 16;

pub const DEFAULT_A: f64 = 0.5;
pub const DEFAULT_CONFIDENCE: f64 = 0.99;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum BandMethod {
    Lil,
    Normal,
}

impl fmt::Display for BandMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BandMethod::Lil => "LIL",
            BandMethod::Normal => "NORMAL",
        })
    }
}

impl FromStr for BandMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "lil" => Ok(BandMethod::Lil),
            "normal" => Ok(BandMethod::Normal),
            other => Err(Error::Config(format!(
                "unknown band method '{other}' (expected lil or normal)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BandSpec {
    pub method: BandMethod,
    /// LIL constant `A(c)`.
    pub a: f64,
    /// Margin factor; the LIL half-width is scaled by `1 + epsilon`.
    pub epsilon: f64,
    /// Nominal pointwise level of the normal band.
    pub confidence: f64,
    /// Truncate both surfaces to `[0, 1]`.
    pub clamp: bool,
}

impl BandSpec {
    pub fn lil() -> Self {
        Self {
            method: BandMethod::Lil,
            a: DEFAULT_A,
            epsilon: 0.0,
            confidence: DEFAULT_CONFIDENCE,
            clamp: true,
        }
    }

    pub fn normal() -> Self {
        Self {
            method: BandMethod::Normal,
            ..Self::lil()
        }
    }

    pub fn with_a(mut self, a: f64) -> Self {
        self.a = a;
        self
    }

    pub fn with_epsilon(mut self, epsilon: f64) -> Self {
        self.epsilon = epsilon;
        self
    }

    pub fn with_confidence(mut self, confidence: f64) -> Self {
        self.confidence = confidence;
        self
    }

    pub fn with_clamp(mut self, clamp: bool) -> Self {
        self.clamp = clamp;
        self
    }

    pub fn validate(&self) -> Result<()> {
        match self.method {
            BandMethod::Lil => {
                if !(self.a > 0.0) {
                    return Err(Error::Config(format!("A must be positive, got {}", self.a)));
                }
                if !(self.epsilon > -1.0 && self.epsilon < 1.0) {
                    return Err(Error::Config(format!(
                        "epsilon must lie in (-1, 1), got {}",
                        self.epsilon
                    )));
                }
            }
            BandMethod::Normal => {
                if !(self.confidence > 0.0 && self.confidence < 1.0) {
                    return Err(Error::Config(format!(
                        "confidence must lie in (0, 1), got {}",
                        self.confidence
                    )));
                }
            }
        }
        Ok(())
    }

    /// Two-sided normal quantile `z_{1 − (1 − confidence) / 2}`.
    pub fn z_quantile(&self) -> Result<f64> {
        normal_quantile(1.0 - (1.0 - self.confidence) / 2.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BandMetadata {
    pub method: BandMethod,
    pub n: usize,
    pub bandwidth: Option<f64>,
    pub half_width_min: f64,
    pub half_width_max: f64,
    pub half_width_mean: f64,
}

/// Lower and upper surfaces around a center estimate.
#[derive(Debug, Clone, PartialEq)]
pub struct BandSurfaces {
    pub lower: CopulaGrid,
    pub center: CopulaGrid,
    pub upper: CopulaGrid,
    pub metadata: BandMetadata,
}

impl BandSurfaces {
    pub fn with_bandwidth(mut self, h: f64) -> Self {
        self.metadata.bandwidth = Some(h);
        self
    }
}

/// `R_n = sqrt(n / (2 log log n))`, defined here for `n ≥ 16`.
pub fn rn(n: usize) -> Result<f64> {
    if n < MIN_BAND_N {
        return Err(Error::Domain(format!(
            "R_n = sqrt(n / (2 log log n)) needs n >= {MIN_BAND_N} (log log n must be positive), got n = {n}"
        )));
    }
    let nf = n as f64;
    Ok((nf / (2.0 * nf.ln().ln())).sqrt())
}

/// `(1 + ε) A / R_n`.
pub fn lil_half_width(n: usize, spec: &BandSpec) -> Result<f64> {
    Ok((1.0 + spec.epsilon) * spec.a / rn(n)?)
}

fn assemble(
    center: &CopulaGrid,
    n: usize,
    method: BandMethod,
    clamp: bool,
    half_widths: impl Iterator<Item = f64>,
) -> BandSurfaces {
    let len = center.values().len();
    let mut lower = Vec::with_capacity(len);
    let mut upper = Vec::with_capacity(len);
    let (mut lo_w, mut hi_w, mut sum_w) = (f64::INFINITY, 0.0_f64, 0.0);
    for (&c, w) in center.values().iter().zip(half_widths) {
        lo_w = lo_w.min(w);
        hi_w = hi_w.max(w);
        sum_w += w;
        let (l, u) = (c - w, c + w);
        if clamp {
            lower.push(l.max(0.0));
            upper.push(u.min(1.0));
        } else {
            lower.push(l);
            upper.push(u);
        }
    }
    let with = |values| {
        CopulaGrid::new(center.u_knots().to_vec(), center.v_knots().to_vec(), values)
            .expect("knots copied from a valid grid")
    };
    BandSurfaces {
        lower: with(lower),
        center: center.clone(),
        upper: with(upper),
        metadata: BandMetadata {
            method,
            n,
            bandwidth: None,
            half_width_min: lo_w,
            half_width_max: hi_w,
            half_width_mean: sum_w / len as f64,
        },
    }
}

/// LIL band `center ± (1 + ε) A / R_n`.
pub fn lil_bands(center: &CopulaGrid, n: usize, spec: &BandSpec) -> Result<BandSurfaces> {
    if spec.method != BandMethod::Lil {
        return Err(Error::InvalidInput("lil_bands called with a NORMAL spec".into()));
    }
    spec.validate()?;
    let w = lil_half_width(n, spec)?;
    Ok(assemble(
        center,
        n,
        BandMethod::Lil,
        spec.clamp,
        std::iter::repeat(w),
    ))
}

/// Pointwise normal band `center ± z sqrt(σ² / n)`.
pub fn normal_bands(
    center: &CopulaGrid,
    n: usize,
    sigma2: &VarianceField,
    spec: &BandSpec,
) -> Result<BandSurfaces> {
    if spec.method != BandMethod::Normal {
        return Err(Error::InvalidInput("normal_bands called with a LIL spec".into()));
    }
    spec.validate()?;
    let field = sigma2.grid();
    if !field.same_knots(center) {
        return Err(Error::InvalidInput(
            "variance field and estimate use different grids".into(),
        ));
    }
    if let Some((u, v, s)) = field.iter().find(|&(_, _, s)| s < 0.0 || s.is_nan()) {
        return Err(Error::Numeric(format!(
            "negative asymptotic variance {s} at ({u}, {v})"
        )));
    }
    let z = spec.z_quantile()?;
    let nf = n as f64;
    Ok(assemble(
        center,
        n,
        BandMethod::Normal,
        spec.clamp,
        field.values().iter().map(|&s| z * (s / nf).sqrt()),
    ))
}

/// Simultaneous coverage: `lower ≤ truth ≤ upper` at every knot.
pub fn covers(bands: &BandSurfaces, truth: &CopulaGrid) -> Result<bool> {
    if !bands.lower.same_knots(truth) {
        return Err(Error::InvalidInput(
            "band and truth grids do not match".into(),
        ));
    }
    Ok(bands
        .lower
        .values()
        .iter()
        .zip(bands.upper.values())
        .zip(truth.values())
        .all(|((&l, &u), &c)| l <= c && c <= u))
}
