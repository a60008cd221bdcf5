//! Brute-force checks for the closed forms: tensor-product Gauss–Legendre
//! quadrature over the orthant for `p = 2, 3` and a grid search for the
//! mode.
//!
//! Parametrizations and surface elements:
//!
//! ```text
//! p = 2:  x = (cos θ, sin θ),                         dω = dθ
//! p = 3:  x = (sin θ cos φ, sin θ sin φ, cos θ),      dω = sin θ dθ dφ
//! ```
//!
//! with `θ, φ ∈ (0, π/2)`. Each angle is reached through the polynomial
//! map `s(u) = 35u⁴ - 84u⁵ + 70u⁶ - 20u⁷` on `u ∈ (0, 1)`, whose derivative
//! `140 u³ (1-u)³` vanishes to third order at both ends. That flattens the
//! `x_i^(2α_i - 1)` endpoint singularities so plain Gauss–Legendre in `u`
//! converges fast, and because `s'` is a polynomial the rule still
//! integrates constants exactly. Nodes are interior, so no endpoint is ever
//! evaluated.

use std::f64::consts::FRAC_PI_2;

use crate::distribution::{SpherePoint, SphericalDirichlet};
use crate::error::{Result, SddError};

pub const DEFAULT_RESOLUTION_2D: usize = 2000;
pub const DEFAULT_RESOLUTION_3D: usize = 300;

/// Gauss–Legendre nodes and weights on `[-1, 1]`, by Newton iteration on
/// the three-term Legendre recurrence.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        // Tricomi initial guess for the i-th largest root.
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() <= 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, x);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let nf = n as f64;
    let dp = nf * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

fn smooth_map(u: f64) -> f64 {
    u.powi(4) * (35.0 + u * (-84.0 + u * (70.0 - 20.0 * u)))
}

/// Nodes of a smoothed 1-D rule on `(0, π/2)`.
#[derive(Debug, Clone, Copy)]
struct AngleNode {
    angle: f64,
    sin: f64,
    /// `cos(angle)`, taken as the sine of the complementary angle so that
    /// nodes next to `π/2` keep full relative precision.
    cos: f64,
    weight: f64,
}

fn angle_rule(resolution: usize) -> Vec<AngleNode> {
    let (t, w) = gauss_legendre(resolution);
    t.iter()
        .zip(&w)
        .map(|(&t, &w)| {
            let u = 0.5 * (1.0 + t);
            let v = 0.5 * (1.0 - t);
            // s(u) + s(1 - u) = 1
            let angle = FRAC_PI_2 * smooth_map(u);
            let complement = FRAC_PI_2 * smooth_map(v);
            let ds = 140.0 * (u * v).powi(3);
            AngleNode {
                angle,
                sin: angle.sin(),
                cos: complement.sin(),
                weight: FRAC_PI_2 * ds * 0.5 * w,
            }
        })
        .collect()
}

/// Deterministic integration grid over the positive orthant, `p ∈ {2, 3}`.
#[derive(Debug, Clone)]
pub struct QuadratureGrid {
    dim: usize,
    resolution: usize,
    /// Row-major node coordinates on the sphere.
    points: Vec<f64>,
    /// Surface-measure weight per node.
    weights: Vec<f64>,
    theta: Vec<f64>,
    phi: Vec<f64>,
}

impl QuadratureGrid {
    pub fn new(dim: usize, resolution: usize) -> Result<Self> {
        if resolution < 2 {
            return Err(SddError::InvalidArgument(format!(
                "grid resolution must be at least 2, got {resolution}"
            )));
        }
        let rule = angle_rule(resolution);
        let theta: Vec<f64> = rule.iter().map(|a| a.angle).collect();
        match dim {
            2 => {
                let points = rule.iter().flat_map(|a| [a.cos, a.sin]).collect();
                Ok(Self {
                    dim,
                    resolution,
                    points,
                    weights: rule.iter().map(|a| a.weight).collect(),
                    theta,
                    phi: Vec::new(),
                })
            }
            3 => {
                let phi = theta.clone();
                let mut points = Vec::with_capacity(3 * resolution * resolution);
                let mut weights = Vec::with_capacity(resolution * resolution);
                for t in &rule {
                    for f in &rule {
                        points.extend_from_slice(&[t.sin * f.cos, t.sin * f.sin, t.cos]);
                        weights.push(t.sin * t.weight * f.weight);
                    }
                }
                Ok(Self {
                    dim,
                    resolution,
                    points,
                    weights,
                    theta,
                    phi,
                })
            }
            _ => Err(SddError::InvalidArgument(format!(
                "quadrature grids exist only for p = 2 or 3, got {dim}"
            ))),
        }
    }

    /// Grid with the default resolution for `dim`.
    pub fn for_dim(dim: usize) -> Result<Self> {
        match dim {
            2 => Self::new(2, DEFAULT_RESOLUTION_2D),
            _ => Self::new(dim, DEFAULT_RESOLUTION_3D),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn resolution(&self) -> usize {
        self.resolution
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn nodes(&self) -> impl Iterator<Item = (&[f64], f64)> {
        self.points
            .chunks_exact(self.dim)
            .zip(self.weights.iter().copied())
    }

    /// Sum of weights; the orthant area `π/2` for both `p = 2` and `p = 3`.
    pub fn area(&self) -> f64 {
        pairwise_sum(&self.weights)
    }

    /// `∫ g(x) dω` over the orthant.
    pub fn integrate<G>(&self, mut g: G) -> Result<f64>
    where
        G: FnMut(&[f64]) -> Result<f64>,
    {
        let mut terms = Vec::with_capacity(self.len());
        for (x, w) in self.nodes() {
            terms.push(w * g(x)?);
        }
        Ok(pairwise_sum(&terms))
    }
}

fn pairwise_sum(values: &[f64]) -> f64 {
    if values.len() <= 32 {
        values.iter().sum()
    } else {
        let mid = values.len() / 2;
        pairwise_sum(&values[..mid]) + pairwise_sum(&values[mid..])
    }
}

fn check_grid(dist: &SphericalDirichlet, grid: &QuadratureGrid) -> Result<()> {
    if dist.dim() != grid.dim() {
        return Err(SddError::DimensionMismatch {
            expected: grid.dim(),
            found: dist.dim(),
        });
    }
    Ok(())
}

/// `∫ f(x; α) dω`, which should be 1.
pub fn integrate_density(dist: &SphericalDirichlet, grid: &QuadratureGrid) -> Result<f64> {
    integrate_moment(dist, grid, &vec![0; dist.dim()])
}

/// `E(Π x_i^k_i)` by quadrature.
pub fn integrate_moment(
    dist: &SphericalDirichlet,
    grid: &QuadratureGrid,
    exponents: &[u32],
) -> Result<f64> {
    check_grid(dist, grid)?;
    if exponents.len() != dist.dim() {
        return Err(SddError::DimensionMismatch {
            expected: dist.dim(),
            found: exponents.len(),
        });
    }
    grid.integrate(|x| {
        let ln_f = dist.log_density_coords(x)?;
        let ln_m: f64 = x
            .iter()
            .zip(exponents)
            .filter(|(_, k)| **k > 0)
            .map(|(xi, k)| *k as f64 * xi.ln())
            .sum();
        Ok((ln_f + ln_m).exp())
    })
}

/// Location of the density maximum: the best grid angle(s), refined by
/// ternary search between the neighbouring nodes.
///
/// In these coordinates the log density is a sum of concave functions of
/// one angle each (`ln sin`, `ln cos` with positive weights when every
/// `α_i > ½`), so each 1-D search is unimodal and the two angles separate.
pub fn grid_argmax(dist: &SphericalDirichlet, grid: &QuadratureGrid) -> Result<SpherePoint> {
    check_grid(dist, grid)?;
    if let Some((index, &alpha)) = dist
        .alpha()
        .as_slice()
        .iter()
        .enumerate()
        .find(|(_, a)| **a <= 0.5)
    {
        return Err(SddError::ModeUndefined { index, alpha });
    }
    let ln_f = |x: &[f64]| dist.log_density_coords(x).unwrap_or(f64::NEG_INFINITY);

    match grid.dim() {
        2 => {
            let at = |t: f64| ln_f(&[t.cos(), t.sin()]);
            let k = argmax_index(&grid.theta, at);
            let (lo, hi) = neighbours(&grid.theta, k);
            let t = ternary_max(at, lo, hi);
            SpherePoint::new(vec![t.cos(), t.sin()])
        }
        _ => {
            let at = |t: f64, f: f64| {
                let (st, ct) = t.sin_cos();
                let (sf, cf) = f.sin_cos();
                ln_f(&[st * cf, st * sf, ct])
            };
            let mut best = (0, 0, f64::NEG_INFINITY);
            for (i, &t) in grid.theta.iter().enumerate() {
                for (j, &f) in grid.phi.iter().enumerate() {
                    let v = at(t, f);
                    if v > best.2 {
                        best = (i, j, v);
                    }
                }
            }
            let (t_lo, t_hi) = neighbours(&grid.theta, best.0);
            let (f_lo, f_hi) = neighbours(&grid.phi, best.1);
            let mut f = grid.phi[best.1];
            let mut t = grid.theta[best.0];
            for _ in 0..2 {
                t = ternary_max(|t| at(t, f), t_lo, t_hi);
                f = ternary_max(|f| at(t, f), f_lo, f_hi);
            }
            let (st, ct) = t.sin_cos();
            let (sf, cf) = f.sin_cos();
            SpherePoint::new(vec![st * cf, st * sf, ct])
        }
    }
}

fn argmax_index<F: Fn(f64) -> f64>(nodes: &[f64], f: F) -> usize {
    nodes
        .iter()
        .enumerate()
        .map(|(i, &t)| (i, f(t)))
        .fold((0, f64::NEG_INFINITY), |best, (i, v)| {
            if v > best.1 {
                (i, v)
            } else {
                best
            }
        })
        .0
}

fn neighbours(nodes: &[f64], k: usize) -> (f64, f64) {
    let lo = if k == 0 { 0.0 } else { nodes[k - 1] };
    let hi = if k + 1 == nodes.len() {
        FRAC_PI_2
    } else {
        nodes[k + 1]
    };
    (lo, hi)
}

fn ternary_max<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64) -> f64 {
    while hi - lo > 1e-13 {
        let m1 = lo + (hi - lo) / 3.0;
        let m2 = hi - (hi - lo) / 3.0;
        if f(m1) < f(m2) {
            lo = m1;
        } else {
            hi = m2;
        }
    }
    0.5 * (lo + hi)
}
