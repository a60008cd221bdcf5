//! Random variates: Gamma by Marsaglia–Tsang, Dirichlet by Gamma
//! normalization, and SDD points by the coordinatewise square root.
//!
//! The generator is xoshiro256++ seeded through SplitMix64, both fully
//! specified algorithms, so a seed reproduces the same stream in any
//! language. Uniforms take the top 53 bits of each output; normals use the
//! Marsaglia polar method.

use rand_core::{RngCore, SeedableRng};
use rand_xoshiro::Xoshiro256PlusPlus;

use crate::distribution::SphericalDirichlet;
use crate::error::{Result, SddError};
use crate::estimation::SampleMatrix;

/// Seedable pseudorandom source. Identical seeds give identical streams.
#[derive(Debug, Clone)]
pub struct RandomSource {
    seed: u64,
    rng: Xoshiro256PlusPlus,
    spare_normal: Option<f64>,
}

impl RandomSource {
    pub fn new(seed: u64) -> Self {
        Self {
            seed,
            rng: Xoshiro256PlusPlus::seed_from_u64(seed),
            spare_normal: None,
        }
    }

    /// Independent stream `index` of a seed schedule, used for one worker.
    pub fn for_stream(seed: u64, index: u64) -> Self {
        Self::new(seed.wrapping_add(index))
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    /// Uniform on the open interval (0, 1).
    pub fn uniform(&mut self) -> f64 {
        ((self.next_u64() >> 11) as f64 + 0.5) * (1.0 / (1u64 << 53) as f64)
    }

    pub fn standard_normal(&mut self) -> f64 {
        if let Some(z) = self.spare_normal.take() {
            return z;
        }
        loop {
            let u = 2.0 * self.uniform() - 1.0;
            let v = 2.0 * self.uniform() - 1.0;
            let s = u * u + v * v;
            if s < 1.0 && s > 0.0 {
                let scale = (-2.0 * s.ln() / s).sqrt();
                self.spare_normal = Some(v * scale);
                return u * scale;
            }
        }
    }
}

/// One draw from `Gamma(shape, 1)`.
pub fn sample_gamma(shape: f64, source: &mut RandomSource) -> Result<f64> {
    check_shape(shape)?;
    Ok(ln_gamma_variate(shape, source).exp())
}

fn check_shape(shape: f64) -> Result<()> {
    if shape > 0.0 && shape.is_finite() {
        Ok(())
    } else {
        Err(SddError::Domain {
            function: "sample_gamma",
            arg: shape,
        })
    }
}

/// Log of a `Gamma(shape, 1)` draw. Working in logs keeps tiny-shape draws
/// from underflowing before normalization.
fn ln_gamma_variate(shape: f64, source: &mut RandomSource) -> f64 {
    if shape < 1.0 {
        // Gamma(a) = Gamma(a + 1) · U^(1/a)
        let boosted = marsaglia_tsang(shape + 1.0, source).ln();
        return boosted + source.uniform().ln() / shape;
    }
    marsaglia_tsang(shape, source).ln()
}

/// Requires `shape >= 1`.
fn marsaglia_tsang(shape: f64, source: &mut RandomSource) -> f64 {
    let d = shape - 1.0 / 3.0;
    let c = 1.0 / (9.0 * d).sqrt();
    loop {
        let x = source.standard_normal();
        let t = 1.0 + c * x;
        if t <= 0.0 {
            continue;
        }
        let v = t * t * t;
        let u = source.uniform();
        let x2 = x * x;
        if u < 1.0 - 0.0331 * x2 * x2 {
            return d * v;
        }
        if u.ln() < 0.5 * x2 + d * (1.0 - v + v.ln()) {
            return d * v;
        }
    }
}

/// Writes one SDD draw into `out`: `z = g / Σg` with `g_i ~ Gamma(α_i)`,
/// then `x_i = sqrt(z_i)`.
pub fn sample_point_into(dist: &SphericalDirichlet, source: &mut RandomSource, out: &mut [f64]) {
    let alpha = dist.alpha().as_slice();
    debug_assert_eq!(out.len(), alpha.len());
    for (slot, &a) in out.iter_mut().zip(alpha) {
        *slot = ln_gamma_variate(a, source);
    }
    let max = out.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let total: f64 = out.iter().map(|l| (l - max).exp()).sum();
    let ln_total = max + total.ln();
    for slot in out.iter_mut() {
        *slot = (0.5 * (*slot - ln_total)).exp();
    }
}

/// `n` independent SDD draws from a single stream.
pub fn sample_sdd(
    dist: &SphericalDirichlet,
    n: usize,
    source: &mut RandomSource,
) -> Result<SampleMatrix> {
    if n == 0 {
        return Err(SddError::InvalidArgument(
            "sample size must be at least 1".into(),
        ));
    }
    let p = dist.dim();
    let mut data = vec![0.0; n * p];
    for row in data.chunks_exact_mut(p) {
        sample_point_into(dist, source, row);
    }
    SampleMatrix::from_flat(data, p)
}

/// `n` draws split across `workers` threads. Worker `k` owns stream
/// `RandomSource::for_stream(seed, k)` and produces a contiguous block of
/// rows, so the output depends only on `(seed, n, workers)`.
pub fn sample_sdd_parallel(
    dist: &SphericalDirichlet,
    n: usize,
    seed: u64,
    workers: usize,
) -> Result<SampleMatrix> {
    if n == 0 {
        return Err(SddError::InvalidArgument(
            "sample size must be at least 1".into(),
        ));
    }
    let workers = workers.clamp(1, n);
    let p = dist.dim();
    let rows_per = n.div_ceil(workers);
    let mut data = vec![0.0; n * p];
    std::thread::scope(|scope| {
        for (k, block) in data.chunks_mut(rows_per * p).enumerate() {
            scope.spawn(move || {
                let mut source = RandomSource::for_stream(seed, k as u64);
                for row in block.chunks_exact_mut(p) {
                    sample_point_into(dist, &mut source, row);
                }
            });
        }
    });
    SampleMatrix::from_flat(data, p)
}
