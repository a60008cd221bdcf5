//! Projected limited-memory BFGS for box-constrained minimization.
//!
//! Each iteration builds the quasi-Newton direction with the two-loop
//! recursion on the free variables (coordinates pinned at a bound with the
//! gradient pushing outward are frozen), projects trial points onto the box
//! and backtracks until the Armijo condition holds.

use std::collections::VecDeque;

use crate::error::{Result, SddError};

const ARMIJO_C1: f64 = 1e-4;
const BACKTRACK: f64 = 0.5;
const CURVATURE_EPS: f64 = 1e-12;

/// Per-coordinate bounds `lower[i] < upper[i]`; `upper` may be `+∞`.
#[derive(Debug, Clone, PartialEq)]
pub struct BoxSpec {
    lower: Vec<f64>,
    upper: Vec<f64>,
}

impl BoxSpec {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        if lower.len() != upper.len() {
            return Err(SddError::DimensionMismatch {
                expected: lower.len(),
                found: upper.len(),
            });
        }
        for (index, (&l, &u)) in lower.iter().zip(&upper).enumerate() {
            if !(l < u) || l.is_nan() || u.is_nan() {
                return Err(SddError::InvalidBox {
                    index,
                    lower: l,
                    upper: u,
                });
            }
        }
        Ok(Self { lower, upper })
    }

    /// `[lower, lower] × … × [upper, upper]` in `dim` coordinates.
    pub fn uniform(dim: usize, lower: f64, upper: f64) -> Result<Self> {
        Self::new(vec![lower; dim], vec![upper; dim])
    }

    /// `x_i >= lower` with no upper bound.
    pub fn lower_bounded(dim: usize, lower: f64) -> Result<Self> {
        Self::uniform(dim, lower, f64::INFINITY)
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.iter()
            .zip(self.lower.iter().zip(&self.upper))
            .all(|(v, (l, u))| *v >= *l && *v <= *u)
    }

    pub fn project(&self, x: &mut [f64]) {
        for (v, (l, u)) in x.iter_mut().zip(self.lower.iter().zip(&self.upper)) {
            *v = v.clamp(*l, *u);
        }
    }

    /// `‖P(x - g) - x‖∞`, zero exactly at a KKT point.
    pub fn projected_gradient_norm(&self, x: &[f64], g: &[f64]) -> f64 {
        x.iter()
            .zip(g)
            .zip(self.lower.iter().zip(&self.upper))
            .map(|((xi, gi), (l, u))| ((xi - gi).clamp(*l, *u) - xi).abs())
            .fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptimOptions {
    /// Number of stored curvature pairs; 0 gives scaled steepest descent.
    pub memory: usize,
    pub gtol: f64,
    /// Stop when an accepted step is shorter than this (Euclidean norm).
    pub step_tol: f64,
    pub max_iter: usize,
    pub max_backtracks: usize,
}

impl Default for OptimOptions {
    fn default() -> Self {
        Self {
            memory: 10,
            gtol: 1e-8,
            step_tol: 1e-8,
            max_iter: 500,
            max_backtracks: 40,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Termination {
    GradientTol,
    StepTol,
    MaxIter,
    /// No Armijo point within the backtrack budget, even after dropping the
    /// curvature memory. The best iterate so far is returned.
    LineSearchFailed,
}

impl Termination {
    pub fn as_str(&self) -> &'static str {
        match self {
            Termination::GradientTol => "gradient_tol",
            Termination::StepTol => "step_tol",
            Termination::MaxIter => "max_iter",
            Termination::LineSearchFailed => "line_search_failed",
        }
    }
}

impl std::fmt::Display for Termination {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptimReport {
    pub minimizer: Vec<f64>,
    pub objective_value: f64,
    /// Projected-gradient infinity norm at the minimizer.
    pub gradient_inf_norm: f64,
    pub iterations: usize,
    pub evaluations: usize,
    pub converged: bool,
    pub termination_reason: Termination,
}

struct CurvaturePair {
    s: Vec<f64>,
    y: Vec<f64>,
    rho: f64,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Minimizes `objective` over `bounds` from `start`.
///
/// `objective(x, grad)` returns `f(x)` and writes `∇f(x)` into `grad`.
pub fn minimize<F>(
    objective: F,
    start: &[f64],
    bounds: &BoxSpec,
    options: &OptimOptions,
) -> Result<OptimReport>
where
    F: Fn(&[f64], &mut [f64]) -> f64,
{
    let n = start.len();
    if bounds.dim() != n {
        return Err(SddError::DimensionMismatch {
            expected: bounds.dim(),
            found: n,
        });
    }
    if let Some(index) = start
        .iter()
        .enumerate()
        .position(|(i, v)| !(*v >= bounds.lower[i] && *v <= bounds.upper[i]))
    {
        return Err(SddError::StartOutsideBox { index });
    }

    let mut x = start.to_vec();
    let mut g = vec![0.0; n];
    let mut f = objective(&x, &mut g);
    let mut evaluations = 1;
    if !f.is_finite() || g.iter().any(|v| !v.is_finite()) {
        return Err(SddError::NonFinite {
            context: "start point",
        });
    }

    let mut history: VecDeque<CurvaturePair> = VecDeque::with_capacity(options.memory);
    let mut gamma: Option<f64> = None;
    let mut iterations = 0;
    let mut x_trial = vec![0.0; n];
    let mut g_trial = vec![0.0; n];
    let mut direction = vec![0.0; n];

    let finish = |x: Vec<f64>, f, pg, iterations, evaluations, reason| OptimReport {
        minimizer: x,
        objective_value: f,
        gradient_inf_norm: pg,
        iterations,
        evaluations,
        converged: matches!(reason, Termination::GradientTol | Termination::StepTol),
        termination_reason: reason,
    };

    loop {
        let pg = bounds.projected_gradient_norm(&x, &g);
        if pg <= options.gtol {
            return Ok(finish(
                x,
                f,
                pg,
                iterations,
                evaluations,
                Termination::GradientTol,
            ));
        }
        if iterations >= options.max_iter {
            return Ok(finish(
                x,
                f,
                pg,
                iterations,
                evaluations,
                Termination::MaxIter,
            ));
        }

        let free: Vec<bool> = (0..n)
            .map(|i| {
                !((x[i] <= bounds.lower[i] && g[i] > 0.0)
                    || (x[i] >= bounds.upper[i] && g[i] < 0.0))
            })
            .collect();

        let mut accepted = false;
        let mut f_accepted = f;
        // First attempt uses the stored curvature; on failure retry once
        // as steepest descent.
        for attempt in 0..2 {
            let use_memory = attempt == 0 && !history.is_empty();
            compute_direction(&g, &free, &history, gamma, use_memory, &mut direction);
            let mut slope = dot(&g, &direction);
            if !(slope < 0.0) {
                history.clear();
                compute_direction(&g, &free, &history, gamma, false, &mut direction);
                slope = dot(&g, &direction);
                if !(slope < 0.0) {
                    break;
                }
            }

            let mut t = if gamma.is_none() && history.is_empty() {
                // Unit-length first step when no curvature scale is known.
                (1.0 / norm2(&direction)).min(1.0)
            } else {
                1.0
            };
            for _ in 0..=options.max_backtracks {
                for i in 0..n {
                    x_trial[i] = x[i] + t * direction[i];
                }
                bounds.project(&mut x_trial);
                let decrease: f64 = (0..n).map(|i| g[i] * (x_trial[i] - x[i])).sum();
                let f_trial = objective(&x_trial, &mut g_trial);
                evaluations += 1;
                if f_trial.is_finite()
                    && g_trial.iter().all(|v| v.is_finite())
                    && f_trial <= f + ARMIJO_C1 * decrease
                {
                    accepted = true;
                    f_accepted = f_trial;
                    break;
                }
                t *= BACKTRACK;
            }
            if accepted {
                break;
            }
            history.clear();
            if !use_memory {
                break;
            }
        }

        if !accepted {
            let pg = bounds.projected_gradient_norm(&x, &g);
            return Ok(finish(
                x,
                f,
                pg,
                iterations,
                evaluations,
                Termination::LineSearchFailed,
            ));
        }

        let s: Vec<f64> = x_trial.iter().zip(&x).map(|(a, b)| a - b).collect();
        let y: Vec<f64> = g_trial.iter().zip(&g).map(|(a, b)| a - b).collect();
        let sy = dot(&s, &y);
        let step_norm = norm2(&s);
        if sy > CURVATURE_EPS * step_norm * norm2(&y) {
            gamma = Some(sy / dot(&y, &y));
            if options.memory > 0 {
                if history.len() == options.memory {
                    history.pop_front();
                }
                history.push_back(CurvaturePair {
                    s,
                    y,
                    rho: 1.0 / sy,
                });
            }
        }

        x.copy_from_slice(&x_trial);
        g.copy_from_slice(&g_trial);
        f = f_accepted;
        iterations += 1;

        let pg = bounds.projected_gradient_norm(&x, &g);
        if pg <= options.gtol {
            return Ok(finish(
                x,
                f,
                pg,
                iterations,
                evaluations,
                Termination::GradientTol,
            ));
        }
        if step_norm < options.step_tol {
            return Ok(finish(
                x,
                f,
                pg,
                iterations,
                evaluations,
                Termination::StepTol,
            ));
        }
    }
}

/// `d = -H q` restricted to free coordinates, with `H` from the two-loop
/// recursion (or `γ I` / `I` without memory).
fn compute_direction(
    g: &[f64],
    free: &[bool],
    history: &VecDeque<CurvaturePair>,
    gamma: Option<f64>,
    use_memory: bool,
    out: &mut [f64],
) {
    for i in 0..g.len() {
        out[i] = if free[i] { g[i] } else { 0.0 };
    }
    if use_memory && !history.is_empty() {
        let mut alphas = vec![0.0; history.len()];
        for (k, pair) in history.iter().enumerate().rev() {
            let a = pair.rho * dot(&pair.s, out);
            alphas[k] = a;
            out.iter_mut().zip(&pair.y).for_each(|(q, y)| *q -= a * y);
        }
        let scale = gamma.unwrap_or(1.0);
        out.iter_mut().for_each(|q| *q *= scale);
        for (k, pair) in history.iter().enumerate() {
            let b = pair.rho * dot(&pair.y, out);
            out.iter_mut()
                .zip(&pair.s)
                .for_each(|(r, s)| *r += (alphas[k] - b) * s);
        }
    } else if let Some(scale) = gamma {
        out.iter_mut().for_each(|q| *q *= scale);
    }
    for i in 0..out.len() {
        out[i] = if free[i] { -out[i] } else { 0.0 };
    }
}
