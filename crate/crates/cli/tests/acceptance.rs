//! End-to-end acceptance checks. Runs as a plain binary and prints one
//! PASS/FAIL line per criterion; exits non-zero if any criterion fails.

use std::f64::consts::PI;
use std::path::Path;
use std::time::Instant;

use sdd_cli::commands::{run_table1, TABLE1_SCENARIOS};
use sdd_cli::ingest::{load_sample, IngestOptions, Transform, DEFAULT_SHIFT};
use sdd_core::estimation::{mom_from_moments, neg_log_likelihood, nll_gradient, norm_error_pct};
use sdd_core::optim::{minimize, BoxSpec, OptimOptions};
use sdd_core::oracle::{grid_argmax, integrate_density, integrate_moment, QuadratureGrid};
use sdd_core::sampling::{sample_sdd, sample_sdd_parallel};
use sdd_core::{
    fit_mle, fit_mom, AlphaVector, FitOptions, RandomSource, SpherePoint, SphericalDirichlet,
};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn uniform_in(src: &mut RandomSource, lo: f64, hi: f64) -> f64 {
    lo + (hi - lo) * src.uniform()
}

/// 10 random α for p = 2 and 10 for p = 3, α_i ∈ [0.6, 20], then α = ½·1
/// for both dimensions.
fn oracle_alphas() -> Vec<Vec<f64>> {
    let mut src = RandomSource::new(2024);
    let mut out = Vec::new();
    for k in 0..20 {
        let p = if k < 10 { 2 } else { 3 };
        out.push((0..p).map(|_| uniform_in(&mut src, 0.6, 20.0)).collect());
    }
    out.push(vec![0.5; 2]);
    out.push(vec![0.5; 3]);
    out
}

fn normalization() -> Outcome {
    let start = Instant::now();
    let g2 = QuadratureGrid::for_dim(2).unwrap();
    let g3 = QuadratureGrid::for_dim(3).unwrap();
    let mut worst = [0.0f64; 2];
    for alpha in oracle_alphas() {
        let dist = SphericalDirichlet::from_vec(alpha.clone()).unwrap();
        let grid = if alpha.len() == 2 { &g2 } else { &g3 };
        let err = (integrate_density(&dist, grid).unwrap() - 1.0).abs();
        let slot = &mut worst[alpha.len() - 2];
        *slot = slot.max(err);
    }
    let secs = start.elapsed().as_secs_f64();
    check(
        worst[0] <= 1e-8 && worst[1] <= 1e-6 && secs < 10.0,
        format!(
            "max |I-1|: p=2 {:.2e}, p=3 {:.2e}; {secs:.2}s",
            worst[0], worst[1]
        ),
    )
}

fn moment_identities() -> Outcome {
    let g2 = QuadratureGrid::for_dim(2).unwrap();
    let g3 = QuadratureGrid::for_dim(3).unwrap();
    let mut worst = 0.0f64;
    for alpha in oracle_alphas() {
        let p = alpha.len();
        let dist = SphericalDirichlet::from_vec(alpha.clone()).unwrap();
        let grid = if p == 2 { &g2 } else { &g3 };
        let m = dist.moments();
        let a0: f64 = alpha.iter().sum();
        for i in 0..p {
            let mut k = vec![0u32; p];
            k[i] = 1;
            worst = worst.max((integrate_moment(&dist, grid, &k).unwrap() - m.mu[i] / m.mu0).abs());
            k[i] = 2;
            worst = worst.max((integrate_moment(&dist, grid, &k).unwrap() - alpha[i] / a0).abs());
            for j in i + 1..p {
                let mut k = vec![0u32; p];
                k[i] = 1;
                k[j] = 1;
                let closed = m.mu[i] * m.mu[j] / a0;
                worst = worst.max((integrate_moment(&dist, grid, &k).unwrap() - closed).abs());
            }
        }
    }
    check(worst <= 1e-6, format!("max moment error {worst:.2e}"))
}

fn covariance_forms() -> Outcome {
    let mut src = RandomSource::new(77);
    let mut worst_form = 0.0f64;
    let mut worst_trace = 0.0f64;
    for _ in 0..50 {
        let p = 2 + (src.next_u64() % 8) as usize;
        let alpha: Vec<f64> = (0..p).map(|_| uniform_in(&mut src, 0.1, 50.0)).collect();
        let dist = SphericalDirichlet::from_vec(alpha).unwrap();
        let a = dist.covariance();
        let b = dist.covariance_outer_form();
        let c = dist.covariance_resultant_form();
        worst_form = worst_form
            .max(a.max_abs_diff(&b))
            .max(a.max_abs_diff(&c))
            .max(b.max_abs_diff(&c));
        let cc = dist.moments().c;
        for s in [&a, &b, &c] {
            worst_trace = worst_trace.max((s.trace() - (1.0 - cc * cc)).abs());
        }
    }
    check(
        worst_form <= 1e-12 && worst_trace <= 1e-12,
        format!("max form difference {worst_form:.2e}, max trace error {worst_trace:.2e}"),
    )
}

fn mode() -> Outcome {
    let mut src = RandomSource::new(99);
    let g2 = QuadratureGrid::for_dim(2).unwrap();
    let g3 = QuadratureGrid::for_dim(3).unwrap();
    let mut worst = 0.0f64;
    for k in 0..10 {
        let p = if k % 2 == 0 { 2 } else { 3 };
        let alpha: Vec<f64> = (0..p).map(|_| uniform_in(&mut src, 0.6, 20.0)).collect();
        let dist = SphericalDirichlet::from_vec(alpha).unwrap();
        let closed = dist.mode().unwrap();
        let found = grid_argmax(&dist, if p == 2 { &g2 } else { &g3 }).unwrap();
        for (a, b) in closed.coords().iter().zip(found.coords()) {
            worst = worst.max((a - b).abs());
        }
    }
    let mut worst_sym = 0.0f64;
    for p in 2..=12 {
        for a in [0.75, 2.0, 37.5] {
            let dist = SphericalDirichlet::new(AlphaVector::symmetric(a, p).unwrap());
            let m = dist.mode().unwrap();
            let target = (p as f64).sqrt().recip();
            for x in m.coords() {
                worst_sym = worst_sym.max((x - target).abs());
            }
        }
    }
    check(
        worst <= 1e-4 && worst_sym <= 1e-12,
        format!("closed form vs grid argmax {worst:.2e}; symmetric vs 1/sqrt(p) {worst_sym:.2e}"),
    )
}

fn limits() -> Outcome {
    let mut worst_cov = 0.0f64;
    let mut worst_mean = 0.0f64;
    for p in [2, 3, 5, 9] {
        let dist = SphericalDirichlet::new(AlphaVector::symmetric(1e6, p).unwrap());
        worst_cov = worst_cov.max(dist.covariance().max_abs());
        let target = (p as f64).sqrt().recip();
        for e in dist.moments().mean {
            worst_mean = worst_mean.max((e - target).abs());
        }
    }

    // 2^(p-1) Γ(p/2) / π^(p/2) written out for p = 2..5.
    let constants = [
        (2, 2.0 / PI),
        (3, 2.0 / PI),
        (4, 8.0 / (PI * PI)),
        (5, 12.0 / (PI * PI)),
    ];
    let mut src = RandomSource::new(5);
    let mut worst_uniform = 0.0f64;
    for (p, c) in constants {
        let dist = SphericalDirichlet::new(AlphaVector::symmetric(0.5, p).unwrap());
        for _ in 0..100 {
            let x: Vec<f64> = (0..p).map(|_| src.standard_normal().abs()).collect();
            let point = SpherePoint::normalized(x).unwrap();
            worst_uniform = worst_uniform.max((dist.density(&point).unwrap() / c - 1.0).abs());
        }
    }
    check(
        worst_cov < 1e-5 && worst_mean < 1e-6 && worst_uniform <= 1e-12,
        format!(
            "alpha=1e6: max|cov| {worst_cov:.2e}, max|E(x)-1/sqrt(p)| {worst_mean:.2e}; uniform density rel. error {worst_uniform:.2e}"
        ),
    )
}

fn gradient() -> Outcome {
    let mut src = RandomSource::new(4242);
    let mut worst = 0.0f64;
    for _ in 0..50 {
        let p = 2 + (src.next_u64() % 5) as usize;
        let truth: Vec<f64> = (0..p).map(|_| uniform_in(&mut src, 0.3, 10.0)).collect();
        let dist = SphericalDirichlet::from_vec(truth).unwrap();
        let n = 20 + (src.next_u64() % 200) as usize;
        let data = sample_sdd(&dist, n, &mut src).unwrap();
        let at: Vec<f64> = (0..p).map(|_| uniform_in(&mut src, 0.3, 10.0)).collect();
        let g = nll_gradient(&AlphaVector::new(at.clone()).unwrap(), &data).unwrap();
        let scale = g.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        for k in 0..p {
            let h = 1e-5 * at[k].max(1.0);
            let mut up = at.clone();
            let mut down = at.clone();
            up[k] += h;
            down[k] -= h;
            let fd = (neg_log_likelihood(&AlphaVector::new(up).unwrap(), &data).unwrap()
                - neg_log_likelihood(&AlphaVector::new(down).unwrap(), &data).unwrap())
                / (2.0 * h);
            worst = worst.max((g[k] - fd).abs() / scale);
        }
    }
    check(
        worst <= 1e-6,
        format!("max relative gradient error {worst:.2e} over 50 instances"),
    )
}

fn estimator_recovery() -> Outcome {
    let start = Instant::now();
    let results = run_table1(42, 10_000, &FitOptions::default()).map_err(|e| e.to_string())?;
    let secs = start.elapsed().as_secs_f64();
    let mut ok = secs < 60.0;
    let mut parts = Vec::new();
    for s in &results {
        let mom = s.mom.norm_error_vs_truth.unwrap();
        let mle = s.mle.norm_error_vs_truth.unwrap();
        ok &= s.mom.converged
            && s.mle.converged
            && mom <= 5.0
            && mle <= 5.0
            && s.mle.iterations <= 100;
        parts.push(format!("{mom:.2}/{mle:.2}% ({} it)", s.mle.iterations));
    }
    check(
        ok,
        format!(
            "MOM/MLE error, MLE iterations: {}; {secs:.2}s",
            parts.join(", ")
        ),
    )
}

fn mom_exactness() -> Outcome {
    let options = FitOptions {
        delta: 1e-14,
        ..FitOptions::default()
    };
    let cases: [&[f64]; 8] = [
        &[2.0, 2.0],
        &[0.7, 6.5],
        &[2.0, 2.0, 10.0],
        &[5.0, 15.0, 2.0],
        &[0.5, 0.5, 2.0, 3.0, 1.25],
        &[1.0, 4.0, 0.8, 9.0, 2.0],
        &[1.28, 0.9, 0.7, 0.6, 0.55, 0.5, 0.5, 0.45, 0.4],
        &[3.0, 1.0, 2.0, 8.0, 0.6, 5.0, 1.5, 2.5, 4.0],
    ];
    let mut worst = 0.0f64;
    for alpha in cases {
        let dist = SphericalDirichlet::from_vec(alpha.to_vec()).unwrap();
        let m = dist.moments();
        let fit =
            mom_from_moments(0, m.mean[0], &m.second_raw, &options).map_err(|e| e.to_string())?;
        if !fit.converged {
            return Err(format!("MOM did not converge for {alpha:?}"));
        }
        for (a, b) in fit.alpha_hat.as_slice().iter().zip(alpha) {
            worst = worst.max((a - b).abs());
        }
    }
    check(
        worst <= 1e-8,
        format!("max |alpha_hat - alpha| {worst:.2e} for p in 2,3,5,9"),
    )
}

fn mom_mle_agreement() -> Outcome {
    let options = FitOptions::default();
    let mut ok = true;
    let mut parts = Vec::new();
    for (k, alpha) in TABLE1_SCENARIOS.iter().enumerate() {
        let dist = SphericalDirichlet::from_vec(alpha.to_vec()).unwrap();
        let data = sample_sdd_parallel(&dist, 100_000, 1000 + k as u64, 4).unwrap();
        let mom = fit_mom(&data, &options).map_err(|e| e.to_string())?;
        let mle = fit_mle(&data, None, &options).map_err(|e| e.to_string())?;
        let d = norm_error_pct(&mom.alpha_hat, &mle.alpha_hat).unwrap();
        ok &= mom.converged && mle.converged && d <= 2.0;
        parts.push(format!("{d:.3}%"));
    }

    let fixture = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data/term_frequencies.csv");
    let ingest = IngestOptions {
        transform: Transform::LogShift(DEFAULT_SHIFT),
        renormalize: false,
    };
    let sample = load_sample(&fixture, &ingest).map_err(|e| e.to_string())?;
    for fit in [fit_mom(&sample, &options), fit_mle(&sample, None, &options)] {
        let fit = fit.map_err(|e| e.to_string())?;
        let a = fit.alpha_hat.as_slice();
        let fixture_ok =
            fit.converged && a.iter().all(|v| *v > 0.0) && a[1..].iter().all(|v| *v < a[0]);
        ok &= fixture_ok;
        parts.push(format!(
            "fixture {} {}",
            fit.method,
            if fixture_ok { "ok" } else { "bad" }
        ));
    }
    check(ok, format!("n=1e5 MOM-MLE distance: {}", parts.join(", ")))
}

fn sampler_statistics() -> Outcome {
    let dist = SphericalDirichlet::from_vec(vec![2.0, 2.0, 2.0]).unwrap();
    let n = 1_000_000;
    let data = sample_sdd_parallel(&dist, n, 31337, 8).unwrap();
    let nf = n as f64;
    let p = 3;
    let mean = data.moments1().to_vec();

    let mut worst_second = 0.0f64;
    for i in 0..p {
        let (s, ss) = data
            .column(i)
            .fold((0.0, 0.0), |(s, ss), x| (s + x * x, ss + x.powi(4)));
        let m = s / nf;
        let se = ((ss / nf - m * m) / nf).sqrt();
        worst_second = worst_second.max((m - 1.0 / 3.0).abs() / se);
    }

    let sigma = dist.covariance();
    let mut worst_cov = 0.0f64;
    for i in 0..p {
        for j in i..p {
            let (s, ss) = data.rows().fold((0.0, 0.0), |(s, ss), x| {
                let t = (x[i] - mean[i]) * (x[j] - mean[j]);
                (s + t, ss + t * t)
            });
            let c = s / nf;
            let se = ((ss / nf - c * c) / nf).sqrt();
            worst_cov = worst_cov.max((c - sigma.get(i, j)).abs() / se);
        }
    }
    check(
        worst_second <= 4.0 && worst_cov <= 5.0,
        format!("second moments within {worst_second:.2} SE, covariance within {worst_cov:.2} SE"),
    )
}

fn optimizer_suite() -> Outcome {
    let bounds = BoxSpec::uniform(1, 0.0, 10.0).unwrap();
    let mut parts = Vec::new();
    let mut ok = true;
    for memory in [10, 0] {
        let options = OptimOptions {
            memory,
            ..OptimOptions::default()
        };
        let interior = minimize(
            |x: &[f64], g: &mut [f64]| {
                g[0] = 2.0 * (x[0] - 3.0);
                (x[0] - 3.0).powi(2)
            },
            &[0.0],
            &bounds,
            &options,
        )
        .map_err(|e| e.to_string())?;
        let active = minimize(
            |x: &[f64], g: &mut [f64]| {
                g[0] = 2.0 * (x[0] + 5.0);
                (x[0] + 5.0).powi(2)
            },
            &[4.0],
            &bounds,
            &options,
        )
        .map_err(|e| e.to_string())?;
        ok &= interior.converged && (interior.minimizer[0] - 3.0).abs() <= 1e-8;
        ok &= active.converged && active.minimizer[0] == 0.0;
        parts.push(format!(
            "m={memory}: {:.10}, {}",
            interior.minimizer[0], active.minimizer[0]
        ));
    }

    let square = BoxSpec::uniform(2, -2.0, 2.0).unwrap();
    let rosen = minimize(
        |x: &[f64], g: &mut [f64]| {
            let (a, b) = (1.0 - x[0], x[1] - x[0] * x[0]);
            g[0] = -2.0 * a - 400.0 * x[0] * b;
            g[1] = 200.0 * b;
            a * a + 100.0 * b * b
        },
        &[-1.2, 1.0],
        &square,
        &OptimOptions::default(),
    )
    .map_err(|e| e.to_string())?;
    let dist = (rosen.minimizer[0] - 1.0)
        .abs()
        .max((rosen.minimizer[1] - 1.0).abs());
    ok &= rosen.converged && dist <= 1e-5;
    parts.push(format!(
        "Rosenbrock |x-(1,1)| {dist:.1e} in {} it",
        rosen.iterations
    ));
    check(ok, parts.join("; "))
}

fn main() {
    let criteria: [Criterion; 11] = [
        ("normalization", normalization),
        ("moment identities", moment_identities),
        ("covariance three-form equivalence", covariance_forms),
        ("mode", mode),
        ("limits", limits),
        ("gradient correctness", gradient),
        ("estimator recovery (four scenarios)", estimator_recovery),
        ("MOM exactness oracle", mom_exactness),
        ("MOM-MLE agreement", mom_mle_agreement),
        ("sampler statistics", sampler_statistics),
        ("optimizer unit suite", optimizer_suite),
    ];
    let mut failures = 0;
    for (name, run) in criteria {
        let start = Instant::now();
        let outcome = std::panic::catch_unwind(run).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS  {name}: {detail} [{secs:.2}s]"),
            Err(detail) => {
                failures += 1;
                println!("FAIL  {name}: {detail} [{secs:.2}s]");
            }
        }
    }
    println!(
        "acceptance: {} passed, {failures} failed",
        criteria.len() - failures
    );
    if failures > 0 {
        std::process::exit(1);
    }
}
