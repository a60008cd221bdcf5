//! The Spherical-Dirichlet distribution on the positive orthant of the unit
//! hypersphere.
//!
//! A Dirichlet vector `z` on the simplex maps to the orthant through
//! `x_i = sqrt(z_i)`. With the induced surface measure the density is
//!
//! ```text
//! f(x; α) = 2^(p-1) Γ(α₀) / Π Γ(α_i) · Π x_i^(2α_i - 1),   Σ x_i² = 1
//! ```
//!
//! Every gamma-function expression here is evaluated as a difference of
//! logarithms, so `α₀` may be arbitrarily large.

use std::f64::consts::{LN_2, PI};

use nalgebra::DMatrix;

use crate::error::{Result, SddError};
use crate::specfun::{ln_gamma_half_ratio_pos, ln_gamma_pos};

/// Tolerance on `|Σ x_i² - 1|` when accepting a point.
pub const UNIT_NORM_TOL: f64 = 1e-10;

/// Concentration parameters `α ∈ (0, ∞)^p`, `p >= 2`, with their cached sum.
#[derive(Debug, Clone, PartialEq)]
pub struct AlphaVector {
    alpha: Vec<f64>,
    alpha0: f64,
}

impl AlphaVector {
    pub fn new(alpha: Vec<f64>) -> Result<Self> {
        if alpha.len() < 2 {
            return Err(SddError::TooFewComponents(alpha.len()));
        }
        if let Some((index, &value)) = alpha
            .iter()
            .enumerate()
            .find(|(_, a)| !(a.is_finite() && **a > 0.0))
        {
            return Err(SddError::InvalidAlpha { index, value });
        }
        let alpha0 = alpha.iter().sum();
        Ok(Self { alpha, alpha0 })
    }

    pub fn symmetric(value: f64, p: usize) -> Result<Self> {
        Self::new(vec![value; p])
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.alpha
    }

    pub fn alpha0(&self) -> f64 {
        self.alpha0
    }

    pub fn dim(&self) -> usize {
        self.alpha.len()
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.alpha
    }
}

impl std::ops::Index<usize> for AlphaVector {
    type Output = f64;

    fn index(&self, i: usize) -> &f64 {
        &self.alpha[i]
    }
}

/// A point on the positive orthant of the unit sphere.
#[derive(Debug, Clone, PartialEq)]
pub struct SpherePoint {
    x: Vec<f64>,
}

impl SpherePoint {
    /// Accepts `x` as-is. Fails on negative coordinates or when the squared
    /// norm is off by more than [`UNIT_NORM_TOL`]; nothing is renormalized.
    pub fn new(x: Vec<f64>) -> Result<Self> {
        check_orthant(&x)?;
        let deviation = (x.iter().map(|v| v * v).sum::<f64>() - 1.0).abs();
        if !(deviation <= UNIT_NORM_TOL) {
            return Err(SddError::NotUnitNorm { deviation });
        }
        Ok(Self { x })
    }

    /// Scales a nonnegative, nonzero vector onto the unit sphere.
    pub fn normalized(mut x: Vec<f64>) -> Result<Self> {
        check_orthant(&x)?;
        let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm == 0.0 {
            return Err(SddError::NotUnitNorm { deviation: 1.0 });
        }
        x.iter_mut().for_each(|v| *v /= norm);
        Ok(Self { x })
    }

    pub fn coords(&self) -> &[f64] {
        &self.x
    }

    pub fn dim(&self) -> usize {
        self.x.len()
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.x
    }
}

fn check_orthant(x: &[f64]) -> Result<()> {
    match x
        .iter()
        .enumerate()
        .find(|(_, v)| !(v.is_finite() && **v >= 0.0))
    {
        Some((index, &value)) => Err(SddError::NegativeCoordinate { index, value }),
        None => Ok(()),
    }
}

/// Closed-form first and second moments.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentSummary {
    /// `E(x_i) = μ_i / μ₀`
    pub mean: Vec<f64>,
    /// `E(x_i²) = α_i / α₀`
    pub second_raw: Vec<f64>,
    /// `μ_i = Γ(α_i + ½) / Γ(α_i)`
    pub mu: Vec<f64>,
    /// `μ₀ = Γ(α₀ + ½) / Γ(α₀)`
    pub mu0: f64,
    /// Mean resultant length `‖μ‖ / μ₀`.
    pub c: f64,
    /// `μ / ‖μ‖`
    pub mean_direction: SpherePoint,
}

/// Dense symmetric `p × p` covariance matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct CovarianceMatrix {
    pub sigma: DMatrix<f64>,
}

impl CovarianceMatrix {
    pub fn dim(&self) -> usize {
        self.sigma.nrows()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.sigma[(i, j)]
    }

    pub fn trace(&self) -> f64 {
        self.sigma.trace()
    }

    pub fn max_abs(&self) -> f64 {
        self.sigma.amax()
    }

    /// Diagnostic only; the sign is not asserted anywhere.
    pub fn smallest_eigenvalue(&self) -> f64 {
        self.sigma
            .clone()
            .symmetric_eigenvalues()
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min)
    }

    pub fn max_abs_diff(&self, other: &CovarianceMatrix) -> f64 {
        (&self.sigma - &other.sigma).amax()
    }
}

/// `SDD(α)` with the log normalizing constant precomputed.
#[derive(Debug, Clone, PartialEq)]
pub struct SphericalDirichlet {
    alpha: AlphaVector,
    ln_norm: f64,
}

impl SphericalDirichlet {
    pub fn new(alpha: AlphaVector) -> Self {
        let ln_norm = log_normalizer(&alpha);
        Self { alpha, ln_norm }
    }

    pub fn from_vec(alpha: Vec<f64>) -> Result<Self> {
        Ok(Self::new(AlphaVector::new(alpha)?))
    }

    pub fn alpha(&self) -> &AlphaVector {
        &self.alpha
    }

    pub fn dim(&self) -> usize {
        self.alpha.dim()
    }

    /// `ln(2^(p-1) Γ(α₀) / Π Γ(α_i))`
    pub fn log_normalizer(&self) -> f64 {
        self.ln_norm
    }

    /// True when every `α_i = ½`, the uniform distribution on the orthant.
    pub fn is_uniform(&self) -> bool {
        self.alpha.as_slice().iter().all(|&a| a == 0.5)
    }

    pub fn log_density(&self, point: &SpherePoint) -> Result<f64> {
        if point.dim() != self.dim() {
            return Err(SddError::DimensionMismatch {
                expected: self.dim(),
                found: point.dim(),
            });
        }
        self.log_density_coords(point.coords())
    }

    pub fn density(&self, point: &SpherePoint) -> Result<f64> {
        Ok(self.log_density(point)?.exp())
    }

    /// Log density at raw coordinates assumed to lie on the sphere. Only
    /// the length and the zero-coordinate cases are checked.
    pub fn log_density_coords(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.dim() {
            return Err(SddError::DimensionMismatch {
                expected: self.dim(),
                found: x.len(),
            });
        }
        let mut acc = self.ln_norm;
        for (i, (&xi, &ai)) in x.iter().zip(self.alpha.as_slice()).enumerate() {
            let exponent = 2.0 * ai - 1.0;
            if xi == 0.0 {
                if exponent > 0.0 {
                    return Ok(f64::NEG_INFINITY);
                } else if exponent < 0.0 {
                    return Err(SddError::InfiniteDensity {
                        index: i,
                        alpha: ai,
                    });
                }
                continue;
            }
            acc += exponent * xi.ln();
        }
        Ok(acc)
    }

    pub fn moments(&self) -> MomentSummary {
        let alpha = self.alpha.as_slice();
        let alpha0 = self.alpha.alpha0();
        let ln_mu0 = ln_gamma_half_ratio_pos(alpha0);
        let ln_mu: Vec<f64> = alpha.iter().map(|&a| ln_gamma_half_ratio_pos(a)).collect();
        let mu: Vec<f64> = ln_mu.iter().map(|l| l.exp()).collect();
        let mean: Vec<f64> = ln_mu.iter().map(|l| (l - ln_mu0).exp()).collect();
        let second_raw = alpha.iter().map(|a| a / alpha0).collect();
        let mu_norm = mu.iter().map(|m| m * m).sum::<f64>().sqrt();
        let direction = mu.iter().map(|m| m / mu_norm).collect();
        MomentSummary {
            mean,
            second_raw,
            mu0: ln_mu0.exp(),
            c: (mu_norm.ln() - ln_mu0).exp(),
            mu,
            mean_direction: SpherePoint { x: direction },
        }
    }

    /// Entrywise form:
    /// `Cov(x_i, x_j) = δ_ij (α_i/α₀ - μ_i²/μ₀²) + (1 - δ_ij)(1/α₀ - 1/μ₀²) μ_i μ_j`.
    pub fn covariance(&self) -> CovarianceMatrix {
        let m = self.moments();
        let alpha = self.alpha.as_slice();
        let alpha0 = self.alpha.alpha0();
        let off = 1.0 / alpha0 - 1.0 / (m.mu0 * m.mu0);
        let sigma = DMatrix::from_fn(self.dim(), self.dim(), |i, j| {
            if i == j {
                alpha[i] / alpha0 - m.mean[i] * m.mean[i]
            } else {
                off * (m.mu[i] * m.mu[j])
            }
        });
        CovarianceMatrix { sigma }
    }

    /// `Σ = diag(α - μ²)/α₀ - (1/μ₀² - 1/α₀) μ μᵀ`
    pub fn covariance_outer_form(&self) -> CovarianceMatrix {
        let m = self.moments();
        let alpha = self.alpha.as_slice();
        let alpha0 = self.alpha.alpha0();
        let mu = nalgebra::DVector::from_column_slice(&m.mu);
        let diag = DMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
            self.dim(),
            alpha.iter().zip(&m.mu).map(|(a, u)| (a - u * u) / alpha0),
        ));
        let coef = 1.0 / (m.mu0 * m.mu0) - 1.0 / alpha0;
        CovarianceMatrix {
            sigma: diag - (&mu * mu.transpose()) * coef,
        }
    }

    /// `Σ = diag(α)/α₀ - (C² μ₀² / α₀) diag(μ̄ μ̄ᵀ) - C² (1 - μ₀²/α₀) μ̄ μ̄ᵀ`
    pub fn covariance_resultant_form(&self) -> CovarianceMatrix {
        let m = self.moments();
        let alpha0 = self.alpha.alpha0();
        let dir = nalgebra::DVector::from_column_slice(m.mean_direction.coords());
        let outer = &dir * dir.transpose();
        let c2 = m.c * m.c;
        let mu0_sq = m.mu0 * m.mu0;
        let diag_alpha = DMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
            self.dim(),
            self.alpha.as_slice().iter().map(|a| a / alpha0),
        ));
        let diag_outer = DMatrix::from_diagonal(&outer.diagonal());
        CovarianceMatrix {
            sigma: diag_alpha
                - diag_outer * (c2 * mu0_sq / alpha0)
                - outer * (c2 * (1.0 - mu0_sq / alpha0)),
        }
    }

    /// `x_i = sqrt((2α_i - 1) / (2α₀ - p))`, defined when every `α_i > ½`.
    pub fn mode(&self) -> Result<SpherePoint> {
        let alpha = self.alpha.as_slice();
        if let Some((index, &alpha)) = alpha.iter().enumerate().find(|(_, a)| **a <= 0.5) {
            return Err(SddError::ModeUndefined { index, alpha });
        }
        let denom = 2.0 * self.alpha.alpha0() - self.dim() as f64;
        let x = alpha
            .iter()
            .map(|a| ((2.0 * a - 1.0) / denom).sqrt())
            .collect();
        Ok(SpherePoint { x })
    }
}

/// `ln(2^(p-1) Γ(α₀) / Π Γ(α_i))`
pub fn log_normalizer(alpha: &AlphaVector) -> f64 {
    let p = alpha.dim() as f64;
    (p - 1.0) * LN_2 + ln_gamma_pos(alpha.alpha0())
        - alpha
            .as_slice()
            .iter()
            .map(|&a| ln_gamma_pos(a))
            .sum::<f64>()
}

/// Log of the uniform density `2^(p-1) Γ(p/2) / π^(p/2)`, the reciprocal of
/// the orthant surface area.
pub fn ln_uniform_density(p: usize) -> f64 {
    let p = p as f64;
    (p - 1.0) * LN_2 + ln_gamma_pos(p / 2.0) - 0.5 * p * PI.ln()
}
