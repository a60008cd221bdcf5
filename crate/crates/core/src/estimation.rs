//! Estimating `α` from a sample of orthant points.
//!
//! Two estimators are provided. The method of moments matches the first
//! moment of one coordinate and the second moments of the others; maximum
//! likelihood minimizes the negative log-likelihood with the projected
//! L-BFGS of [`crate::optim`]. The likelihood depends on the data only
//! through `S_k = Σ_i ln x_ik`.

use crate::distribution::{AlphaVector, SpherePoint, UNIT_NORM_TOL};
use crate::error::{Result, SddError};
use crate::optim::{minimize, BoxSpec, OptimOptions, Termination};
use crate::specfun::{digamma_pos, ln_gamma_half_ratio_pos, ln_gamma_pos};

/// `n` orthant points with cached sufficient statistics and moments.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleMatrix {
    data: Vec<f64>,
    p: usize,
    suffstats: Vec<f64>,
    moments1: Vec<f64>,
    moments2: Vec<f64>,
}

impl SampleMatrix {
    /// Row-major `n × p` data. Every row must be a valid [`SpherePoint`].
    pub fn from_flat(data: Vec<f64>, p: usize) -> Result<Self> {
        if p == 0 || data.is_empty() {
            return Err(SddError::EmptySample);
        }
        if !data.len().is_multiple_of(p) {
            return Err(SddError::DimensionMismatch {
                expected: p,
                found: data.len() % p,
            });
        }
        for (row, x) in data.chunks_exact(p).enumerate() {
            if let Some((j, v)) = x
                .iter()
                .enumerate()
                .find(|(_, v)| !(v.is_finite() && **v >= 0.0))
            {
                return Err(SddError::InvalidRow {
                    row,
                    reason: format!("coordinate {j} = {v} is negative or not finite"),
                });
            }
            let deviation = (x.iter().map(|v| v * v).sum::<f64>() - 1.0).abs();
            if deviation > UNIT_NORM_TOL {
                return Err(SddError::InvalidRow {
                    row,
                    reason: format!("not unit norm (|sum x^2 - 1| = {deviation:e})"),
                });
            }
        }

        let n = (data.len() / p) as f64;
        let mut suffstats = vec![0.0; p];
        let mut moments1 = vec![0.0; p];
        let mut moments2 = vec![0.0; p];
        for x in data.chunks_exact(p) {
            for j in 0..p {
                suffstats[j] += x[j].ln();
                moments1[j] += x[j];
                moments2[j] += x[j] * x[j];
            }
        }
        moments1.iter_mut().for_each(|m| *m /= n);
        moments2.iter_mut().for_each(|m| *m /= n);
        Ok(Self {
            data,
            p,
            suffstats,
            moments1,
            moments2,
        })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let p = rows.first().map(Vec::len).ok_or(SddError::EmptySample)?;
        let mut data = Vec::with_capacity(rows.len() * p);
        for (row, x) in rows.iter().enumerate() {
            if x.len() != p {
                return Err(SddError::InvalidRow {
                    row,
                    reason: format!("expected {p} columns, found {}", x.len()),
                });
            }
            data.extend_from_slice(x);
        }
        Self::from_flat(data, p)
    }

    pub fn from_points(points: &[SpherePoint]) -> Result<Self> {
        let rows: Vec<Vec<f64>> = points.iter().map(|pt| pt.coords().to_vec()).collect();
        Self::from_rows(&rows)
    }

    pub fn n(&self) -> usize {
        self.data.len() / self.p
    }

    pub fn dim(&self) -> usize {
        self.p
    }

    pub fn rows(&self) -> std::slice::ChunksExact<'_, f64> {
        self.data.chunks_exact(self.p)
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.p..(i + 1) * self.p]
    }

    pub fn column(&self, j: usize) -> impl Iterator<Item = f64> + '_ {
        self.data.iter().skip(j).step_by(self.p).copied()
    }

    /// `S_k = Σ_i ln x_ik`; `-∞` for a column containing a zero.
    pub fn suffstats(&self) -> &[f64] {
        &self.suffstats
    }

    /// `x̄₁ⱼ = (1/n) Σ_i x_ij`
    pub fn moments1(&self) -> &[f64] {
        &self.moments1
    }

    /// `x̄₂ⱼ = (1/n) Σ_i x_ij²`
    pub fn moments2(&self) -> &[f64] {
        &self.moments2
    }

    pub fn has_zero(&self) -> bool {
        self.suffstats.iter().any(|s| !s.is_finite())
    }

    fn check_suffstats(&self) -> Result<()> {
        match self.suffstats.iter().position(|s| !s.is_finite()) {
            Some(column) => Err(SddError::NonFiniteSuffStats { column }),
            None => Ok(()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Mom,
    Mle,
}

impl Method {
    pub fn as_str(&self) -> &'static str {
        match self {
            Method::Mom => "mom",
            Method::Mle => "mle",
        }
    }
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitResult {
    pub alpha_hat: AlphaVector,
    pub method: Method,
    /// Optimizer iterations (MLE) or outer `α₀` update cycles (MOM).
    pub iterations: usize,
    pub converged: bool,
    /// MLE: projected-gradient infinity norm of the per-observation NLL.
    /// MOM: last relative change `|Δα₀| / α₀`.
    pub final_criterion: f64,
    pub termination: &'static str,
    /// `100 ‖α̂ - α‖ / ‖α‖` when the true `α` is known.
    pub norm_error_vs_truth: Option<f64>,
    pub warnings: Vec<String>,
}

impl FitResult {
    pub fn with_truth(mut self, truth: &AlphaVector) -> Result<Self> {
        self.norm_error_vs_truth = Some(norm_error_pct(&self.alpha_hat, truth)?);
        Ok(self)
    }
}

/// Which coordinate carries the first-moment equation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MomCoordinate {
    /// Coordinate 1, as in the classical formulation.
    #[default]
    First,
    /// The coordinate with the largest sample mean.
    LargestMean,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitOptions {
    /// Lower bound `ε` on every `α_k` during MLE.
    pub epsilon: f64,
    /// MLE step tolerance and MOM relative `α₀` tolerance.
    pub delta: f64,
    pub gtol: f64,
    pub max_iter: usize,
    pub mom_max_iter: usize,
    pub memory: usize,
    pub mom_coordinate: MomCoordinate,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self {
            epsilon: 1e-6,
            delta: 1e-8,
            gtol: 1e-8,
            max_iter: 500,
            mom_max_iter: 100_000,
            memory: 10,
            mom_coordinate: MomCoordinate::First,
        }
    }
}

fn check_dim(params: &AlphaVector, data: &SampleMatrix) -> Result<()> {
    if params.dim() != data.dim() {
        return Err(SddError::DimensionMismatch {
            expected: data.dim(),
            found: params.dim(),
        });
    }
    Ok(())
}

/// `-log L(α) = -n ln c(α) - Σ_k (2α_k - 1) S_k` where `c` is the
/// normalizing constant.
pub fn neg_log_likelihood(params: &AlphaVector, data: &SampleMatrix) -> Result<f64> {
    check_dim(params, data)?;
    data.check_suffstats()?;
    Ok(nll_raw(params.as_slice(), data))
}

/// `∂/∂α_k (-log L) = n [ψ(α_k) - ψ(α₀)] - 2 S_k`
pub fn nll_gradient(params: &AlphaVector, data: &SampleMatrix) -> Result<Vec<f64>> {
    check_dim(params, data)?;
    data.check_suffstats()?;
    let mut grad = vec![0.0; data.dim()];
    nll_gradient_raw(params.as_slice(), data, &mut grad);
    Ok(grad)
}

/// `ψ(α_k) - ψ(α₀) - (2/n) S_k`, zero at an interior MLE.
pub fn stationarity_residual(params: &AlphaVector, data: &SampleMatrix) -> Result<Vec<f64>> {
    let n = data.n() as f64;
    Ok(nll_gradient(params, data)?
        .into_iter()
        .map(|g| g / n)
        .collect())
}

fn nll_raw(alpha: &[f64], data: &SampleMatrix) -> f64 {
    let n = data.n() as f64;
    let p = alpha.len() as f64;
    let ln_norm = (p - 1.0) * std::f64::consts::LN_2 + ln_gamma_pos(alpha.iter().sum())
        - alpha.iter().map(|&a| ln_gamma_pos(a)).sum::<f64>();
    let data_term: f64 = alpha
        .iter()
        .zip(data.suffstats())
        .map(|(a, s)| (2.0 * a - 1.0) * s)
        .sum();
    -(n * ln_norm + data_term)
}

fn nll_gradient_raw(alpha: &[f64], data: &SampleMatrix, grad: &mut [f64]) {
    let n = data.n() as f64;
    let psi0 = digamma_pos(alpha.iter().sum());
    for ((g, &a), s) in grad.iter_mut().zip(alpha).zip(data.suffstats()) {
        *g = n * (digamma_pos(a) - psi0) - 2.0 * s;
    }
}

/// Maximum likelihood by projected L-BFGS on `-log L / n` over
/// `α_k >= ε`, started from `start` or `(1, …, 1)`.
///
/// If the default start does not converge, the fit is retried from the
/// method-of-moments estimate and the better of the two is kept.
pub fn fit_mle(
    data: &SampleMatrix,
    start: Option<&AlphaVector>,
    options: &FitOptions,
) -> Result<FitResult> {
    data.check_suffstats()?;
    let p = data.dim();
    if let Some(s) = start {
        check_dim(s, data)?;
    }
    let mut warnings = Vec::new();
    if data.n() < p {
        warnings.push(format!(
            "only {} observations for {p} parameters; the estimate may be unreliable",
            data.n()
        ));
    }

    let bounds = BoxSpec::lower_bounded(p, options.epsilon)?;
    let optim_options = OptimOptions {
        memory: options.memory,
        gtol: options.gtol,
        step_tol: options.delta,
        max_iter: options.max_iter,
        ..OptimOptions::default()
    };
    let inv_n = 1.0 / data.n() as f64;
    let objective = |alpha: &[f64], grad: &mut [f64]| {
        nll_gradient_raw(alpha, data, grad);
        grad.iter_mut().for_each(|g| *g *= inv_n);
        nll_raw(alpha, data) * inv_n
    };

    let clamp_start =
        |alpha: &[f64]| -> Vec<f64> { alpha.iter().map(|a| a.max(options.epsilon)).collect() };
    let initial = match start {
        Some(s) => clamp_start(s.as_slice()),
        None => vec![1.0; p],
    };
    let mut report = minimize(objective, &initial, &bounds, &optim_options)?;
    let mut total_iterations = report.iterations;

    if !report.converged && start.is_none() {
        if let Ok(mom) = fit_mom(data, options) {
            let retry = minimize(
                objective,
                &clamp_start(mom.alpha_hat.as_slice()),
                &bounds,
                &optim_options,
            )?;
            total_iterations += retry.iterations;
            warnings.push(format!(
                "default start stopped with {}; restarted from the moment estimate",
                report.termination_reason
            ));
            if retry.converged || retry.objective_value < report.objective_value {
                report = retry;
            }
        }
    }
    if report.termination_reason == Termination::LineSearchFailed {
        warnings.push("line search failed; returning the best iterate".into());
    }
    for (k, &a) in report.minimizer.iter().enumerate() {
        if a <= options.epsilon {
            warnings.push(format!(
                "alpha[{k}] is at the lower bound {}; column {k} may be degenerate",
                options.epsilon
            ));
        }
    }

    Ok(FitResult {
        alpha_hat: AlphaVector::new(report.minimizer)?,
        method: Method::Mle,
        iterations: total_iterations,
        converged: report.converged,
        final_criterion: report.gradient_inf_norm,
        termination: report.termination_reason.as_str(),
        norm_error_vs_truth: None,
        warnings,
    })
}

/// Method of moments on the sample's empirical moments.
pub fn fit_mom(data: &SampleMatrix, options: &FitOptions) -> Result<FitResult> {
    let coordinate = match options.mom_coordinate {
        MomCoordinate::First => 0,
        MomCoordinate::LargestMean => {
            data.moments1()
                .iter()
                .enumerate()
                .fold((0, f64::NEG_INFINITY), |best, (j, &m)| {
                    if m > best.1 {
                        (j, m)
                    } else {
                        best
                    }
                })
                .0
        }
    };
    mom_from_moments(
        coordinate,
        data.moments1()[coordinate],
        data.moments2(),
        options,
    )
}

/// Solves
///
/// ```text
/// Γ(α_c + ½)/Γ(α_c) · Γ(α₀)/Γ(α₀ + ½) = first_moment
/// α_j / α₀ = second_moments[j]            (j ≠ c)
/// ```
///
/// by fixed-point iteration on `α₀`: set `α_j = α₀ x̄₂ⱼ`, solve the first
/// equation for `α_c` by bisection, update `α₀ = α_c + Σ α_j`, and stop when
/// `|Δα₀| < δ α₀`. The iteration starts from `α = (1, …, 1)`.
pub fn mom_from_moments(
    coordinate: usize,
    first_moment: f64,
    second_moments: &[f64],
    options: &FitOptions,
) -> Result<FitResult> {
    let p = second_moments.len();
    if p < 2 {
        return Err(SddError::TooFewComponents(p));
    }
    if coordinate >= p {
        return Err(SddError::InvalidArgument(format!(
            "moment coordinate {coordinate} out of range for dimension {p}"
        )));
    }
    if !(first_moment > 0.0 && first_moment < 1.0) {
        return Err(SddError::MomentOutOfRange {
            name: "first moment",
            value: first_moment,
        });
    }
    if let Some(&value) = second_moments.iter().find(|m| !(**m > 0.0 && **m < 1.0)) {
        return Err(SddError::MomentOutOfRange {
            name: "second moment",
            value,
        });
    }

    let ln_first = first_moment.ln();
    let rest_share: f64 = second_moments
        .iter()
        .enumerate()
        .filter(|(j, _)| *j != coordinate)
        .map(|(_, m)| m)
        .sum();

    let mut alpha0 = p as f64;
    let mut alpha_c = 1.0;
    let mut iterations = 0;
    let mut change = f64::INFINITY;
    while iterations < options.mom_max_iter {
        iterations += 1;
        let target = ln_first + ln_gamma_half_ratio_pos(alpha0);
        alpha_c = solve_half_ratio(target)?;
        let next = alpha_c + alpha0 * rest_share;
        change = (next - alpha0).abs() / next;
        alpha0 = next;
        if change < options.delta {
            break;
        }
    }
    let converged = change < options.delta;

    let alpha: Vec<f64> = second_moments
        .iter()
        .enumerate()
        .map(|(j, m)| if j == coordinate { alpha_c } else { alpha0 * m })
        .collect();
    let mut warnings = Vec::new();
    if !converged {
        warnings.push(format!(
            "moment iteration stopped after {iterations} cycles (relative change {change:e})"
        ));
    }
    Ok(FitResult {
        alpha_hat: AlphaVector::new(alpha)?,
        method: Method::Mom,
        iterations,
        converged,
        final_criterion: change,
        termination: if converged { "step_tol" } else { "max_iter" },
        norm_error_vs_truth: None,
        warnings,
    })
}

const BRACKET_LO: f64 = 1e-6;
const BRACKET_HI: f64 = 1e6;
const BRACKET_GROWTH: f64 = 1e3;
const BRACKET_LIMIT_LO: f64 = 1e-300;
const BRACKET_LIMIT_HI: f64 = 1e300;

/// Finds `a` with `ln(Γ(a + ½)/Γ(a)) = target` by bisection on `ln a`.
/// The left side is strictly increasing in `a`.
fn solve_half_ratio(target: f64) -> Result<f64> {
    let h = |ln_a: f64| ln_gamma_half_ratio_pos(ln_a.exp()) - target;
    let (mut lo, mut hi) = (BRACKET_LO.ln(), BRACKET_HI.ln());
    while h(lo) > 0.0 {
        if lo.exp() <= BRACKET_LIMIT_LO {
            return Err(SddError::BracketFailure {
                lower: lo.exp(),
                upper: hi.exp(),
            });
        }
        lo -= BRACKET_GROWTH.ln();
    }
    while h(hi) < 0.0 {
        if hi.exp() >= BRACKET_LIMIT_HI {
            return Err(SddError::BracketFailure {
                lower: lo.exp(),
                upper: hi.exp(),
            });
        }
        hi += BRACKET_GROWTH.ln();
    }
    loop {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if h(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok((0.5 * (lo + hi)).exp())
}

/// `100 ‖estimate - truth‖₂ / ‖truth‖₂`
pub fn norm_error_pct(estimate: &AlphaVector, truth: &AlphaVector) -> Result<f64> {
    if estimate.dim() != truth.dim() {
        return Err(SddError::DimensionMismatch {
            expected: truth.dim(),
            found: estimate.dim(),
        });
    }
    let diff: f64 = estimate
        .as_slice()
        .iter()
        .zip(truth.as_slice())
        .map(|(e, t)| (e - t).powi(2))
        .sum();
    let norm: f64 = truth.as_slice().iter().map(|t| t * t).sum();
    Ok(100.0 * (diff / norm).sqrt())
}
