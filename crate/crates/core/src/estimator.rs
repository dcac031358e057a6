//! Transformation kernel copula estimator
//!
//! ```text
//! Ĉ(u, v) = (1/n) Σ K((φ⁻¹(u) − φ⁻¹(Û_i)) / h) · K((φ⁻¹(v) − φ⁻¹(V̂_i)) / h)
//! ```
//!
//! with pseudo-observations `Û_i = rank(X_i) / (n + 1)`, a transformation
//! `φ` (Probit by default) and an integrated kernel `K` (Epanechnikov by
//! default).

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::specfun::{Epanechnikov, Probit, SmoothingKernel, Transformation};

/// Raw bivariate observations on arbitrary margins.
#[derive(Debug, Clone, PartialEq)]
pub struct PairedSample {
    xs: Vec<f64>,
    ys: Vec<f64>,
}

impl PairedSample {
    pub fn new(xs: Vec<f64>, ys: Vec<f64>) -> Result<Self> {
        if xs.len() != ys.len() {
            return Err(Error::InvalidInput(format!(
                "sample columns differ in length ({} vs {})",
                xs.len(),
                ys.len()
            )));
        }
        if xs.len() < 2 {
            return Err(Error::InvalidInput(format!(
                "need at least 2 observations, got {}",
                xs.len()
            )));
        }
        if let Some(i) = xs.iter().chain(&ys).position(|x| !x.is_finite()) {
            let (col, row) = if i < xs.len() { ("x", i) } else { ("y", i - xs.len()) };
            return Err(Error::InvalidInput(format!(
                "non-finite value in column {col} at observation {}",
                row + 1
            )));
        }
        Ok(Self { xs, ys })
    }

    pub fn len(&self) -> usize {
        self.xs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.xs.is_empty()
    }

    pub fn xs(&self) -> &[f64] {
        &self.xs
    }

    pub fn ys(&self) -> &[f64] {
        &self.ys
    }
}

/// Rank-transformed sample `(Û_i, V̂_i)`, every value strictly inside (0, 1).
#[derive(Debug, Clone, PartialEq)]
pub struct PseudoSample {
    us: Vec<f64>,
    vs: Vec<f64>,
}

impl PseudoSample {
    /// Wraps already rank-transformed coordinates.
    pub fn new(us: Vec<f64>, vs: Vec<f64>) -> Result<Self> {
        if us.len() != vs.len() || us.is_empty() {
            return Err(Error::InvalidInput(format!(
                "pseudo-sample columns must be nonempty and equal length ({} vs {})",
                us.len(),
                vs.len()
            )));
        }
        if us.iter().chain(&vs).any(|&p| !(p > 0.0 && p < 1.0)) {
            return Err(Error::InvalidInput(
                "pseudo-observations must lie strictly inside (0, 1)".into(),
            ));
        }
        Ok(Self { us, vs })
    }

    pub fn len(&self) -> usize {
        self.us.len()
    }

    pub fn is_empty(&self) -> bool {
        self.us.is_empty()
    }

    pub fn us(&self) -> &[f64] {
        &self.us
    }

    pub fn vs(&self) -> &[f64] {
        &self.vs
    }
}

/// 1-based ranks with ties replaced by their average rank.
pub fn mid_ranks(values: &[f64]) -> Vec<f64> {
    let n = values.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; n];
    let mut start = 0;
    while start < n {
        let mut end = start + 1;
        while end < n && values[order[end]] == values[order[start]] {
            end += 1;
        }
        // positions start..end hold ranks start+1..=end
        let avg = (start + 1 + end) as f64 / 2.0;
        for &idx in &order[start..end] {
            ranks[idx] = avg;
        }
        start = end;
    }
    ranks
}

/// `Û_i = rank(X_i) / (n + 1)`, `V̂_i = rank(Y_i) / (n + 1)`.
pub fn make_pseudo_sample(sample: &PairedSample) -> PseudoSample {
    let denom = sample.len() as f64 + 1.0;
    let to_pseudo = |col: &[f64]| -> Vec<f64> {
        mid_ranks(col).into_iter().map(|r| r / denom).collect()
    };
    PseudoSample {
        us: to_pseudo(sample.xs()),
        vs: to_pseudo(sample.ys()),
    }
}

/// Values of a copula-like surface on a rectangular grid, stored with the
/// `u` index varying slowest.
#[derive(Debug, Clone, PartialEq)]
pub struct CopulaGrid {
    u_knots: Vec<f64>,
    v_knots: Vec<f64>,
    values: Vec<f64>,
}

impl CopulaGrid {
    pub fn new(u_knots: Vec<f64>, v_knots: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if values.len() != u_knots.len() * v_knots.len() {
            return Err(Error::InvalidInput(format!(
                "grid of {}x{} knots cannot hold {} values",
                u_knots.len(),
                v_knots.len(),
                values.len()
            )));
        }
        validate_knots(&u_knots)?;
        validate_knots(&v_knots)?;
        Ok(Self {
            u_knots,
            v_knots,
            values,
        })
    }

    /// Tabulates `f` over the knot product.
    pub fn from_fn(u_knots: &[f64], v_knots: &[f64], f: impl Fn(f64, f64) -> f64) -> Self {
        let values = u_knots
            .iter()
            .flat_map(|&u| v_knots.iter().map(move |&v| (u, v)))
            .map(|(u, v)| f(u, v))
            .collect();
        Self {
            u_knots: u_knots.to_vec(),
            v_knots: v_knots.to_vec(),
            values,
        }
    }

    pub fn u_knots(&self) -> &[f64] {
        &self.u_knots
    }

    pub fn v_knots(&self) -> &[f64] {
        &self.v_knots
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.v_knots.len() + j]
    }

    /// `(u, v, value)` triples in storage order.
    pub fn iter(&self) -> impl Iterator<Item = (f64, f64, f64)> + '_ {
        let nv = self.v_knots.len();
        self.values
            .iter()
            .enumerate()
            .map(move |(k, &val)| (self.u_knots[k / nv], self.v_knots[k % nv], val))
    }

    pub fn same_knots(&self, other: &CopulaGrid) -> bool {
        self.u_knots == other.u_knots && self.v_knots == other.v_knots
    }

    /// Pointwise map to a new grid on the same knots.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self {
            u_knots: self.u_knots.clone(),
            v_knots: self.v_knots.clone(),
            values: self.values.iter().map(|&x| f(x)).collect(),
        }
    }

    /// `max |self − other|` over the grid.
    pub fn sup_distance(&self, other: &CopulaGrid) -> Result<f64> {
        if !self.same_knots(other) {
            return Err(Error::InvalidInput("grids have different knots".into()));
        }
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max))
    }
}

fn validate_knots(knots: &[f64]) -> Result<()> {
    if knots.is_empty() {
        return Err(Error::InvalidInput("grid needs at least one knot".into()));
    }
    if knots.iter().any(|k| !(0.0..=1.0).contains(k)) {
        return Err(Error::InvalidInput("grid knots must lie in [0, 1]".into()));
    }
    if knots.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::InvalidInput("grid knots must be sorted".into()));
    }
    Ok(())
}

/// Knot layout along each axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GridSpec {
    pub resolution: usize,
    pub include_boundary: bool,
}

impl GridSpec {
    /// `{i / (m + 1) : i = 1..=m}`.
    pub fn interior(resolution: usize) -> Self {
        Self {
            resolution,
            include_boundary: false,
        }
    }

    /// `{i / (m − 1) : i = 0..m}`, both endpoints included.
    pub fn with_boundary(resolution: usize) -> Self {
        Self {
            resolution,
            include_boundary: true,
        }
    }

    pub fn knots(&self) -> Vec<f64> {
        let m = self.resolution;
        if self.include_boundary {
            if m < 2 {
                return vec![0.0, 1.0];
            }
            (0..m).map(|i| i as f64 / (m - 1) as f64).collect()
        } else {
            (1..=m).map(|i| i as f64 / (m + 1) as f64).collect()
        }
    }
}

impl Default for GridSpec {
    fn default() -> Self {
        Self::interior(33)
    }
}

/// A bandwidth together with the admissible window `[c log n / n, b_n]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BandwidthSpec {
    pub h: f64,
    pub c: f64,
    pub b_n: f64,
    pub n: usize,
}

impl BandwidthSpec {
    pub fn new(h: f64, n: usize, c: f64, b_n: f64) -> Result<Self> {
        if !(h > 0.0 && h.is_finite()) {
            return Err(Error::Domain(format!("bandwidth must be positive, got {h}")));
        }
        if !(c > 0.0) || !(b_n > 0.0) {
            return Err(Error::Domain("window constants must be positive".into()));
        }
        Ok(Self { h, c, b_n, n })
    }

    pub fn lower_window(&self) -> f64 {
        let n = self.n as f64;
        self.c * n.ln() / n
    }

    /// Whether `c log n / n ≤ h ≤ b_n < 1`.
    pub fn in_window(&self) -> bool {
        self.lower_window() <= self.h && self.h <= self.b_n && self.b_n < 1.0
    }
}

/// `h = 1 / log n` with window constants `c = 1`, `b_n = n^{-1/4}`.
pub fn default_bandwidth(n: usize) -> Result<BandwidthSpec> {
    if n < 3 {
        return Err(Error::Domain(format!(
            "default bandwidth needs n >= 3 so that log log n is defined, got {n}"
        )));
    }
    let nf = n as f64;
    BandwidthSpec::new(1.0 / nf.ln(), n, 1.0, nf.powf(-0.25))
}

/// How the Monte Carlo engine picks `h` for a sample of size `n`.
#[derive(Clone)]
pub enum BandwidthRule {
    /// `1 / log n`
    InverseLog,
    Fixed(f64),
    /// `n^exponent`
    Power(f64),
    Custom(Arc<dyn Fn(usize) -> f64 + Send + Sync>),
}

impl BandwidthRule {
    pub fn bandwidth(&self, n: usize) -> f64 {
        match self {
            BandwidthRule::InverseLog => 1.0 / (n as f64).ln(),
            BandwidthRule::Fixed(h) => *h,
            BandwidthRule::Power(e) => (n as f64).powf(*e),
            BandwidthRule::Custom(f) => f(n),
        }
    }
}

impl fmt::Debug for BandwidthRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for BandwidthRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BandwidthRule::InverseLog => write!(f, "inverse-log"),
            BandwidthRule::Fixed(h) => write!(f, "fixed:{h}"),
            BandwidthRule::Power(e) => write!(f, "power:{e}"),
            BandwidthRule::Custom(_) => write!(f, "custom"),
        }
    }
}

impl std::str::FromStr for BandwidthRule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let parse = |x: &str| {
            x.parse::<f64>()
                .map_err(|_| Error::Config(format!("bad bandwidth number '{x}'")))
        };
        let rule = match s.split_once(':') {
            None if s == "inverse-log" => BandwidthRule::InverseLog,
            None => BandwidthRule::Fixed(parse(s)?),
            Some(("fixed", x)) => BandwidthRule::Fixed(parse(x)?),
            Some(("power", x)) => BandwidthRule::Power(parse(x)?),
            _ => {
                return Err(Error::Config(format!(
                    "bandwidth must be 'inverse-log', 'fixed:<h>', 'power:<e>' or a number, got '{s}'"
                )))
            }
        };
        if let BandwidthRule::Fixed(h) = rule {
            if !(h > 0.0 && h.is_finite()) {
                return Err(Error::Config(format!("bandwidth must be positive, got {h}")));
            }
        }
        Ok(rule)
    }
}

/// Estimator bound to one sample, with `φ⁻¹` of every pseudo-observation
/// computed once.
#[derive(Debug, Clone)]
pub struct KernelCopulaEstimator<T = Probit, K = Epanechnikov> {
    transformation: T,
    kernel: K,
    tx: Vec<f64>,
    ty: Vec<f64>,
}

impl KernelCopulaEstimator<Probit, Epanechnikov> {
    pub fn probit(pseudo: &PseudoSample) -> Self {
        Self::new(pseudo, Probit, Epanechnikov)
    }
}

impl<T: Transformation, K: SmoothingKernel> KernelCopulaEstimator<T, K> {
    pub fn new(pseudo: &PseudoSample, transformation: T, kernel: K) -> Self {
        let tx = pseudo.us().iter().map(|&u| transformation.inverse(u)).collect();
        let ty = pseudo.vs().iter().map(|&v| transformation.inverse(v)).collect();
        Self {
            transformation,
            kernel,
            tx,
            ty,
        }
    }

    /// Builds from coordinates already mapped through `φ⁻¹`.
    pub fn from_transformed(tx: Vec<f64>, ty: Vec<f64>, transformation: T, kernel: K) -> Self {
        assert_eq!(tx.len(), ty.len(), "transformed columns differ in length");
        assert!(!tx.is_empty(), "empty sample");
        Self {
            transformation,
            kernel,
            tx,
            ty,
        }
    }

    pub fn len(&self) -> usize {
        self.tx.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tx.is_empty()
    }

    fn check(h: f64, u: f64, v: f64) -> Result<()> {
        if !(h > 0.0) {
            return Err(Error::Domain(format!("bandwidth must be positive, got {h}")));
        }
        if !(0.0..=1.0).contains(&u) || !(0.0..=1.0).contains(&v) {
            return Err(Error::Domain(format!(
                "evaluation point ({u}, {v}) is outside [0, 1]^2"
            )));
        }
        Ok(())
    }

    /// `Ĉ(u, v)` at bandwidth `h`.
    pub fn point(&self, h: f64, u: f64, v: f64) -> Result<f64> {
        Self::check(h, u, v)?;
        let qu = self.transformation.inverse(u);
        let qv = self.transformation.inverse(v);
        let sum: f64 = self
            .tx
            .iter()
            .zip(&self.ty)
            .map(|(&x, &y)| self.kernel.cdf((qu - x) / h) * self.kernel.cdf((qv - y) / h))
            .sum();
        Ok(sum / self.len() as f64)
    }

    /// Per-knot kernel factors `K((φ⁻¹(knot) − t_i) / h)`, one row per knot.
    fn factor_table(&self, h: f64, knots: &[f64], coords: &[f64]) -> Vec<f64> {
        let mut table = Vec::with_capacity(knots.len() * coords.len());
        for &k in knots {
            let q = self.transformation.inverse(k);
            table.extend(coords.iter().map(|&t| self.kernel.cdf((q - t) / h)));
        }
        table
    }

    /// `Ĉ` over the knot product. The product kernel separates, so the
    /// factors are tabulated once per axis and combined by a dot product per
    /// grid cell, summing in the same order as [`Self::point`].
    pub fn grid(&self, h: f64, u_knots: &[f64], v_knots: &[f64]) -> Result<CopulaGrid> {
        validate_knots(u_knots)?;
        validate_knots(v_knots)?;
        Self::check(h, u_knots[0], v_knots[0])?;
        let n = self.len();
        let fu = self.factor_table(h, u_knots, &self.tx);
        let fv = self.factor_table(h, v_knots, &self.ty);
        let nf = n as f64;
        let mut values = Vec::with_capacity(u_knots.len() * v_knots.len());
        for row_u in fu.chunks_exact(n) {
            for row_v in fv.chunks_exact(n) {
                let s: f64 = row_u.iter().zip(row_v).map(|(a, b)| a * b).sum();
                values.push(s / nf);
            }
        }
        Ok(CopulaGrid {
            u_knots: u_knots.to_vec(),
            v_knots: v_knots.to_vec(),
            values,
        })
    }
}

/// Single-point evaluation with an explicit transformation and kernel.
pub fn estimate_point<T: Transformation, K: SmoothingKernel>(
    pseudo: &PseudoSample,
    h: f64,
    u: f64,
    v: f64,
    transformation: T,
    kernel: K,
) -> Result<f64> {
    KernelCopulaEstimator::new(pseudo, transformation, kernel).point(h, u, v)
}

/// Grid evaluation with an explicit transformation and kernel.
pub fn estimate_grid<T: Transformation, K: SmoothingKernel>(
    pseudo: &PseudoSample,
    h: f64,
    u_knots: &[f64],
    v_knots: &[f64],
    transformation: T,
    kernel: K,
) -> Result<CopulaGrid> {
    KernelCopulaEstimator::new(pseudo, transformation, kernel).grid(h, u_knots, v_knots)
}
