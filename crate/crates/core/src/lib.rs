//! Probit transformation kernel estimation of bivariate copulas with
//! law-of-the-iterated-logarithm simultaneous confidence bands, plus a
//! Monte Carlo harness measuring their coverage against pointwise normal
//! bands on Frank copula data.

pub mod bands;
pub mod cli;
pub mod copula;
pub mod error;
pub mod estimator;
pub mod montecarlo;
pub mod specfun;

pub use bands::{covers, lil_bands, normal_bands, rn, BandMethod, BandSpec, BandSurfaces};
pub use copula::{FrankCopula, VarianceField};
pub use error::{Error, Result};
pub use estimator::{
    default_bandwidth, estimate_grid, estimate_point, make_pseudo_sample, BandwidthRule,
    BandwidthSpec, CopulaGrid, GridSpec, KernelCopulaEstimator, PairedSample, PseudoSample,
};
pub use specfun::{epanechnikov_cdf, normal_cdf, normal_quantile, Epanechnikov, Probit};
