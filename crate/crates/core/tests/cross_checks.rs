use sdd_core::oracle::{integrate_moment, QuadratureGrid};
use sdd_core::sampling::sample_sdd_parallel;
use sdd_core::{fit_mle, fit_mom, FitOptions, SphericalDirichlet};

fn within_se(sample: &[f64], target: f64, k: f64) -> bool {
    let n = sample.len() as f64;
    let mean = sample.iter().sum::<f64>() / n;
    let var = sample.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean - target).abs() <= k * (var / n).sqrt()
}

#[test]
fn monte_carlo_matches_quadrature_in_three_dimensions() {
    let dist = SphericalDirichlet::from_vec(vec![0.8, 3.0, 6.5]).unwrap();
    let grid = QuadratureGrid::for_dim(3).unwrap();
    let data = sample_sdd_parallel(&dist, 1_000_000, 8, 4).unwrap();
    for (i, j) in [(0, 0), (1, 1), (0, 2), (1, 2)] {
        let mut k = [0u32; 3];
        k[i] += 1;
        k[j] += 1;
        let exact = integrate_moment(&dist, &grid, &k).unwrap();
        let draws: Vec<f64> = data.rows().map(|x| x[i] * x[j]).collect();
        assert!(within_se(&draws, exact, 4.0), "E(x{i} x{j})");
    }
}

#[test]
fn monte_carlo_matches_closed_form_moments_in_higher_dimension() {
    let alpha = vec![0.6, 1.0, 2.5, 4.0, 7.0, 0.9, 3.3];
    let dist = SphericalDirichlet::from_vec(alpha.clone()).unwrap();
    let m = dist.moments();
    let data = sample_sdd_parallel(&dist, 400_000, 21, 4).unwrap();
    let a0: f64 = alpha.iter().sum();
    for (i, a) in alpha.iter().enumerate() {
        let col: Vec<f64> = data.column(i).collect();
        assert!(within_se(&col, m.mu[i] / m.mu0, 4.0), "E(x{i})");
        let sq: Vec<f64> = col.iter().map(|v| v * v).collect();
        assert!(within_se(&sq, a / a0, 4.0), "E(x{i}^2)");
    }
    let cross: Vec<f64> = data.rows().map(|x| x[2] * x[4]).collect();
    assert!(within_se(&cross, m.mu[2] * m.mu[4] / a0, 4.0));
}

#[test]
fn estimators_recover_alpha_in_nine_dimensions() {
    let alpha = vec![1.3, 0.7, 0.6, 0.55, 0.5, 0.5, 0.45, 0.42, 0.4];
    let dist = SphericalDirichlet::from_vec(alpha.clone()).unwrap();
    let data = sample_sdd_parallel(&dist, 50_000, 3, 2).unwrap();
    let truth = dist.alpha().clone();
    let options = FitOptions::default();
    let mom = fit_mom(&data, &options)
        .unwrap()
        .with_truth(&truth)
        .unwrap();
    let mle = fit_mle(&data, None, &options)
        .unwrap()
        .with_truth(&truth)
        .unwrap();
    assert!(mom.converged && mle.converged);
    assert!(mom.norm_error_vs_truth.unwrap() < 3.0, "{mom:?}");
    assert!(mle.norm_error_vs_truth.unwrap() < 2.0, "{mle:?}");
    assert!(mle.iterations <= 100);
}
