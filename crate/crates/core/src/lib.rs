//! The Spherical-Dirichlet distribution (SDD): the image of a Dirichlet
//! vector under the coordinatewise square root, living on the positive
//! orthant of the unit hypersphere.
//!
//! - [`specfun`]: log-gamma, digamma and gamma ratios.
//! - [`distribution`]: density, normalizing constant, moments, covariance, mode.
//! - [`sampling`]: seedable Gamma/Dirichlet/SDD variates.
//! - [`optim`]: projected L-BFGS with box constraints.
//! - [`estimation`]: method of moments and maximum likelihood.
//! - [`oracle`]: quadrature and grid-search checks for `p = 2, 3`.

pub mod distribution;
pub mod error;
pub mod estimation;
pub mod optim;
pub mod oracle;
pub mod sampling;
pub mod specfun;

pub use distribution::{
    AlphaVector, CovarianceMatrix, MomentSummary, SpherePoint, SphericalDirichlet,
};
pub use error::{Result, SddError};
pub use estimation::{
    fit_mle, fit_mom, FitOptions, FitResult, Method, MomCoordinate, SampleMatrix,
};
pub use sampling::RandomSource;
