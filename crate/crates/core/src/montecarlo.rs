//! Replication engine for the coverage experiment and the deviation checks.
//!
//! Replicate `r` of cell `(θ_i, n_j)` draws its uniforms from a ChaCha8
//! stream keyed by the master seed with stream id
//! `θ_i << 48 | n_j << 32 | r`, so every replicate is reproducible on its
//! own and results do not depend on how work is spread over threads.

use rand::distributions::Open01;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::bands::{covers, lil_bands, normal_bands, rn, BandMethod, BandSpec, MIN_BAND_N};
use crate::copula::{FrankCopula, VarianceField, MAX_SAMPLER_THETA};
use crate::error::{Error, Result};
use crate::estimator::{mid_ranks, BandwidthRule, CopulaGrid, GridSpec, KernelCopulaEstimator};
use crate::specfun::{Epanechnikov, Probit, Transformation};

/// Replications in the published coverage table.
pub const PAPER_REPLICATIONS: usize = 1000;
pub const PAPER_THETAS: [f64; 3] = [-2.0, 1.0, 10.0];
pub const PAPER_NS: [usize; 3] = [50, 100, 500];

/// Bound on `A(c)` used by the deviation check.
pub const LIL_BOUND: f64 = 3.0;

#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub thetas: Vec<f64>,
    pub ns: Vec<usize>,
    pub replications: usize,
    pub grid: GridSpec,
    pub bandwidth: BandwidthRule,
    pub bands: Vec<BandSpec>,
    pub seed: u64,
}

impl Default for ExperimentConfig {
    /// The published coverage experiment: both band methods, three Frank
    /// parameters, three sample sizes, 1000 replications.
    fn default() -> Self {
        Self {
            thetas: PAPER_THETAS.to_vec(),
            ns: PAPER_NS.to_vec(),
            replications: PAPER_REPLICATIONS,
            grid: GridSpec::default(),
            bandwidth: BandwidthRule::InverseLog,
            bands: vec![BandSpec::lil(), BandSpec::normal()],
            seed: 20_100_101,
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.replications == 0 {
            return Err(Error::Config("B must be at least 1".into()));
        }
        if self.replications > u32::MAX as usize {
            return Err(Error::Config("B must fit in 32 bits".into()));
        }
        if self.thetas.is_empty() || self.ns.is_empty() {
            return Err(Error::Config("thetas and ns must be nonempty".into()));
        }
        if self.thetas.len() > 1 << 16 || self.ns.len() > 1 << 16 {
            return Err(Error::Config("at most 65536 thetas and ns".into()));
        }
        if let Some(t) = self
            .thetas
            .iter()
            .find(|t| !t.is_finite() || t.abs() > MAX_SAMPLER_THETA)
        {
            return Err(Error::Config(format!(
                "theta {t} outside the supported range |theta| <= {MAX_SAMPLER_THETA}"
            )));
        }
        if let Some(n) = self.ns.iter().find(|&&n| n < MIN_BAND_N) {
            return Err(Error::Config(format!(
                "sample size {n} is below {MIN_BAND_N}; R_n needs log log n > 0"
            )));
        }
        if self.grid.resolution < 2 {
            return Err(Error::Config("grid resolution must be at least 2".into()));
        }
        for &n in &self.ns {
            let h = self.bandwidth.bandwidth(n);
            if !(h > 0.0 && h.is_finite()) {
                return Err(Error::Config(format!(
                    "bandwidth rule {} gives h = {h} at n = {n}",
                    self.bandwidth
                )));
            }
        }
        for spec in &self.bands {
            spec.validate()?;
        }
        Ok(())
    }
}

/// Runs `f` on a dedicated pool of `workers` threads.
pub fn with_workers<T: Send>(workers: usize, f: impl FnOnce() -> T + Send) -> Result<T> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| Error::Config(format!("cannot start {workers} worker threads: {e}")))?;
    Ok(pool.install(f))
}

/// The random stream of replicate `replicate` in cell `(theta_index, n_index)`.
pub fn replicate_rng(seed: u64, theta_index: usize, n_index: usize, replicate: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let stream = ((theta_index as u64) << 48) | ((n_index as u64) << 32) | replicate as u64;
    rng.set_stream(stream);
    rng
}

/// `n` pairs from the Frank copula by conditional sampling: `U` uniform,
/// then `V = C_u(U, ·)⁻¹(W)` with `W` uniform.
pub fn sample_frank<R: Rng>(
    copula: &FrankCopula,
    n: usize,
    rng: &mut R,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let mut us = Vec::with_capacity(n);
    let mut vs = Vec::with_capacity(n);
    for _ in 0..n {
        let u: f64 = rng.sample(Open01);
        let w: f64 = rng.sample(Open01);
        us.push(u);
        vs.push(copula.conditional_sample(u, w)?);
    }
    Ok((us, vs))
}

/// `φ⁻¹(k / (n + 1))` for `k = 1..=n`; the transformed pseudo-observations
/// of any tie-free sample of size `n` are a permutation of this table.
#[derive(Debug, Clone)]
pub struct RankQuantiles {
    n: usize,
    table: Vec<f64>,
}

impl RankQuantiles {
    pub fn new(n: usize) -> Self {
        let denom = n as f64 + 1.0;
        let table = (1..=n).map(|k| Probit.inverse(k as f64 / denom)).collect();
        Self { n, table }
    }

    fn transform(&self, values: &[f64]) -> Vec<f64> {
        debug_assert_eq!(values.len(), self.n);
        let denom = self.n as f64 + 1.0;
        mid_ranks(values)
            .into_iter()
            .map(|r| {
                if r.fract() == 0.0 {
                    self.table[r as usize - 1]
                } else {
                    Probit.inverse(r / denom)
                }
            })
            .collect()
    }

    /// Probit kernel estimator for the raw sample `(xs, ys)`.
    pub fn estimator(&self, xs: &[f64], ys: &[f64]) -> KernelCopulaEstimator<Probit, Epanechnikov> {
        KernelCopulaEstimator::from_transformed(
            self.transform(xs),
            self.transform(ys),
            Probit,
            Epanechnikov,
        )
    }
}

/// Everything shared by the replicates of one `(θ, n)` cell.
struct Cell {
    theta_index: usize,
    n_index: usize,
    copula: FrankCopula,
    n: usize,
    h: f64,
    knots: Vec<f64>,
    quantiles: RankQuantiles,
}

impl Cell {
    fn new(config: &ExperimentConfig, theta_index: usize, n_index: usize) -> Result<Self> {
        let n = config.ns[n_index];
        Ok(Self {
            theta_index,
            n_index,
            copula: FrankCopula::new(config.thetas[theta_index])?,
            n,
            h: config.bandwidth.bandwidth(n),
            knots: config.grid.knots(),
            quantiles: RankQuantiles::new(n),
        })
    }

    fn truth(&self) -> CopulaGrid {
        CopulaGrid::from_fn(&self.knots, &self.knots, |u, v| self.copula.cdf(u, v))
    }

    fn estimate(&self, seed: u64, replicate: usize) -> Result<CopulaGrid> {
        let mut rng = replicate_rng(seed, self.theta_index, self.n_index, replicate);
        let (xs, ys) = sample_frank(&self.copula, self.n, &mut rng)?;
        self.quantiles
            .estimator(&xs, &ys)
            .grid(self.h, &self.knots, &self.knots)
    }
}

fn cells(config: &ExperimentConfig) -> impl Iterator<Item = (usize, usize)> + '_ {
    (0..config.thetas.len()).flat_map(move |t| (0..config.ns.len()).map(move |j| (t, j)))
}

#[derive(Debug, Clone, PartialEq)]
pub struct CoverageRow {
    pub method: BandMethod,
    pub spec: BandSpec,
    pub theta: f64,
    pub n: usize,
    pub bandwidth: f64,
    pub covered: usize,
    pub replications: usize,
    pub seed: u64,
}

impl CoverageRow {
    pub fn coverage(&self) -> f64 {
        self.covered as f64 / self.replications as f64
    }

    /// Binomial standard error `sqrt(p (1 − p) / B)`.
    pub fn mc_stderr(&self) -> f64 {
        let p = self.coverage();
        (p * (1.0 - p) / self.replications as f64).sqrt()
    }
}

/// Coverage frequencies ordered by band spec, then θ, then n.
#[derive(Debug, Clone, PartialEq)]
pub struct CoverageReport {
    pub rows: Vec<CoverageRow>,
}

impl CoverageReport {
    pub fn find(&self, method: BandMethod, theta: f64, n: usize) -> Option<&CoverageRow> {
        self.rows
            .iter()
            .find(|r| r.method == method && r.theta == theta && r.n == n)
    }
}

/// Simultaneous coverage of every configured band in every `(θ, n)` cell.
///
/// All bands of one replicate are built around the same estimate.
pub fn run_coverage(config: &ExperimentConfig) -> Result<CoverageReport> {
    config.validate()?;
    if config.bands.is_empty() {
        return Err(Error::Config("no band methods requested".into()));
    }
    let mut counts = vec![vec![vec![0usize; config.ns.len()]; config.thetas.len()]; config.bands.len()];
    for (ti, ni) in cells(config) {
        let cell = Cell::new(config, ti, ni)?;
        let truth = cell.truth();
        let variance = config
            .bands
            .iter()
            .any(|b| b.method == BandMethod::Normal)
            .then(|| VarianceField::evaluate(&cell.copula, &cell.knots, &cell.knots));
        let verdicts = (0..config.replications)
            .into_par_iter()
            .map(|r| {
                let center = cell.estimate(config.seed, r)?;
                config
                    .bands
                    .iter()
                    .map(|spec| {
                        let bands = match spec.method {
                            BandMethod::Lil => lil_bands(&center, cell.n, spec)?,
                            BandMethod::Normal => normal_bands(
                                &center,
                                cell.n,
                                variance.as_ref().expect("variance field computed"),
                                spec,
                            )?,
                        };
                        covers(&bands, &truth)
                    })
                    .collect::<Result<Vec<bool>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        for v in &verdicts {
            for (b, &hit) in v.iter().enumerate() {
                counts[b][ti][ni] += hit as usize;
            }
        }
    }
    let mut rows = Vec::new();
    for (b, spec) in config.bands.iter().enumerate() {
        for (ti, &theta) in config.thetas.iter().enumerate() {
            for (ni, &n) in config.ns.iter().enumerate() {
                rows.push(CoverageRow {
                    method: spec.method,
                    spec: *spec,
                    theta,
                    n,
                    bandwidth: config.bandwidth.bandwidth(n),
                    covered: counts[b][ti][ni],
                    replications: config.replications,
                    seed: config.seed,
                });
            }
        }
    }
    Ok(CoverageReport { rows })
}

/// Deviation statistics of one `(θ, n)` cell.
#[derive(Debug, Clone, PartialEq)]
pub struct DeviationRow {
    pub theta: f64,
    pub n: usize,
    pub bandwidth: f64,
    pub replications: usize,
    /// `R_n sup |Ĉ_r − Ê|` per replicate, where `Ê` is the replicate mean.
    pub lil_stats: Vec<f64>,
    /// `R_n sup |Ê − C|`.
    pub bias_stat: f64,
    /// `R_n max_k sd_k / sqrt(B)`, the Monte Carlo noise level of
    /// `bias_stat`.
    pub bias_mc_error: f64,
}

impl DeviationRow {
    pub fn lil_max(&self) -> f64 {
        self.lil_stats.iter().copied().fold(0.0, f64::max)
    }

    pub fn lil_mean(&self) -> f64 {
        self.lil_stats.iter().sum::<f64>() / self.lil_stats.len() as f64
    }

    /// Nearest-rank empirical quantile of the LIL statistic.
    pub fn lil_quantile(&self, q: f64) -> f64 {
        let mut s = self.lil_stats.clone();
        s.sort_by(f64::total_cmp);
        let rank = ((q * s.len() as f64).ceil() as usize).clamp(1, s.len());
        s[rank - 1]
    }

    /// Share of replicates whose LIL statistic is at most `bound`.
    pub fn fraction_within(&self, bound: f64) -> f64 {
        self.lil_stats.iter().filter(|&&x| x <= bound).count() as f64
            / self.lil_stats.len() as f64
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DeviationReport {
    pub rows: Vec<DeviationRow>,
}

/// Both deviation statistics for every `(θ, n)` cell, with `EĈ` replaced by
/// the mean surface over the replicates.
pub fn deviation_report(config: &ExperimentConfig) -> Result<DeviationReport> {
    config.validate()?;
    let mut rows = Vec::new();
    for (ti, ni) in cells(config) {
        let cell = Cell::new(config, ti, ni)?;
        let truth = cell.truth();
        let estimates = (0..config.replications)
            .into_par_iter()
            .map(|r| cell.estimate(config.seed, r))
            .collect::<Result<Vec<_>>>()?;
        let b = estimates.len() as f64;
        let len = truth.values().len();
        let mut mean = vec![0.0; len];
        for g in &estimates {
            for (m, x) in mean.iter_mut().zip(g.values()) {
                *m += x;
            }
        }
        mean.iter_mut().for_each(|m| *m /= b);
        let mut var = vec![0.0; len];
        for g in &estimates {
            for ((s, x), m) in var.iter_mut().zip(g.values()).zip(&mean) {
                *s += (x - m) * (x - m);
            }
        }
        let r_n = rn(cell.n)?;
        let lil_stats = estimates
            .iter()
            .map(|g| {
                r_n * g
                    .values()
                    .iter()
                    .zip(&mean)
                    .map(|(x, m)| (x - m).abs())
                    .fold(0.0, f64::max)
            })
            .collect();
        let bias_stat = r_n
            * mean
                .iter()
                .zip(truth.values())
                .map(|(m, c)| (m - c).abs())
                .fold(0.0, f64::max);
        let max_sd = var
            .iter()
            .map(|s| (s / (b - 1.0).max(1.0)).sqrt())
            .fold(0.0, f64::max);
        rows.push(DeviationRow {
            theta: cell.copula.theta(),
            n: cell.n,
            bandwidth: cell.h,
            replications: config.replications,
            lil_stats,
            bias_stat,
            bias_mc_error: r_n * max_sd / b.sqrt(),
        });
    }
    Ok(DeviationReport { rows })
}

/// Deviation of the estimate from its (replicate-mean) expectation. Needs
/// `B >= 100` for a usable mean surface.
pub fn run_lil_check(config: &ExperimentConfig) -> Result<DeviationReport> {
    if config.replications < 100 {
        return Err(Error::Config(format!(
            "the LIL check needs B >= 100, got {}",
            config.replications
        )));
    }
    deviation_report(config)
}

/// Bias of the estimator. Needs `B >= 1000` so that the mean surface is
/// accurate well below the bias itself.
pub fn run_bias_check(config: &ExperimentConfig) -> Result<DeviationReport> {
    if config.replications < 1000 {
        return Err(Error::Config(format!(
            "the bias check needs B >= 1000, got {}",
            config.replications
        )));
    }
    deviation_report(config)
}
