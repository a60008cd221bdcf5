use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use sdd_core::estimation::norm_error_pct;
use sdd_core::sampling::sample_sdd;
use sdd_core::{
    fit_mle, fit_mom, AlphaVector, FitOptions, FitResult, MomCoordinate, RandomSource,
    SampleMatrix, SddError, SphericalDirichlet,
};

use crate::args::{
    DensityGridArgs, DescribeArgs, FitArgs, MethodArg, MomCoordinateArg, ReproduceArgs,
    SimulateArgs, Tolerances, TransformArg,
};
use crate::error::CliError;
use crate::ingest::{self, IngestOptions, Transform};
use crate::report::{format_f64, Report};

/// Covariance entries below this size flag the distribution as nearly
/// degenerate (concentrated at a point).
pub const DEGENERATE_COVARIANCE: f64 = 1e-6;

pub const TABLE1_SCENARIOS: [&[f64]; 4] = [
    &[2.0, 2.0, 2.0],
    &[5.0, 15.0, 2.0],
    &[0.5, 0.5, 2.0],
    &[2.0, 2.0, 10.0],
];

pub fn parse_alpha(values: &[f64]) -> Result<SphericalDirichlet, CliError> {
    SphericalDirichlet::from_vec(values.to_vec()).map_err(CliError::usage)
}

impl Tolerances {
    pub fn to_options(&self) -> Result<FitOptions, CliError> {
        for (name, v) in [
            ("epsilon", self.epsilon),
            ("delta", self.delta),
            ("gtol", self.gtol),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(CliError::Usage(format!(
                    "--{name} must be positive, got {v}"
                )));
            }
        }
        if self.max_iter == 0 || self.mom_max_iter == 0 {
            return Err(CliError::Usage("iteration caps must be at least 1".into()));
        }
        Ok(FitOptions {
            epsilon: self.epsilon,
            delta: self.delta,
            gtol: self.gtol,
            max_iter: self.max_iter,
            mom_max_iter: self.mom_max_iter,
            memory: self.memory,
            mom_coordinate: match self.mom_coordinate {
                MomCoordinateArg::First => MomCoordinate::First,
                MomCoordinateArg::LargestMean => MomCoordinate::LargestMean,
            },
        })
    }
}

fn create(path: &Path) -> Result<BufWriter<File>, CliError> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| CliError::io(path, e))
}

fn with_output<F>(path: Option<&Path>, out: &mut dyn Write, body: F) -> Result<(), CliError>
where
    F: FnOnce(&mut dyn Write) -> std::io::Result<()>,
{
    match path {
        Some(path) => {
            let mut file = create(path)?;
            body(&mut file)
                .and_then(|_| file.flush())
                .map_err(|e| CliError::io(path, e))
        }
        None => body(out).map_err(|e| CliError::io("<stdout>", e)),
    }
}

fn write_json(report: &Report, path: Option<&Path>) -> Result<(), CliError> {
    if let Some(path) = path {
        let mut file = create(path)?;
        report
            .write_json(&mut file)
            .and_then(|_| file.flush())
            .map_err(|e| CliError::io(path, e))?;
    }
    Ok(())
}

pub fn write_sample_csv(sample: &SampleMatrix, out: &mut dyn Write) -> std::io::Result<()> {
    let header: Vec<String> = (1..=sample.dim()).map(|j| format!("x{j}")).collect();
    writeln!(out, "{}", header.join(","))?;
    let mut line = String::new();
    for row in sample.rows() {
        line.clear();
        for (j, v) in row.iter().enumerate() {
            if j > 0 {
                line.push(',');
            }
            line.push_str(&format_f64(*v));
        }
        writeln!(out, "{line}")?;
    }
    Ok(())
}

pub fn simulate(args: &SimulateArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let dist = parse_alpha(&args.alpha)?;
    let n = usize::try_from(args.n).map_err(CliError::usage)?;
    let mut source = RandomSource::new(args.seed);
    let sample = sample_sdd(&dist, n, &mut source).map_err(CliError::usage)?;
    with_output(args.output.as_deref(), out, |w| {
        write_sample_csv(&sample, w)
    })
}

pub fn describe_report(dist: &SphericalDirichlet) -> Report {
    let alpha = dist.alpha();
    let p = dist.dim();
    let m = dist.moments();
    let sigma = dist.covariance();
    let mut r = Report::new();
    r.push("p", p);
    r.push("alpha", alpha.as_slice());
    r.push("alpha0", alpha.alpha0());
    r.push("log_normalizer", dist.log_normalizer());
    r.push("uniform", dist.is_uniform());
    if dist.is_uniform() {
        r.push("uniform_density", dist.log_normalizer().exp());
    }
    r.push("near_degenerate", sigma.max_abs() < DEGENERATE_COVARIANCE);
    r.push("mean", m.mean.clone());
    r.push("second_moments", m.second_raw.clone());
    r.push("mu", m.mu.clone());
    r.push("mu0", m.mu0);
    r.push("resultant_length", m.c);
    r.push("mean_direction", m.mean_direction.coords());
    r.push("mean_resultant_variance", 1.0 - m.c * m.c);
    match dist.mode() {
        Ok(mode) => r.push("mode", mode.coords()),
        Err(SddError::ModeUndefined { index, alpha }) => r.push(
            "mode",
            format!("undefined (alpha{} = {alpha} <= 0.5)", index + 1),
        ),
        Err(e) => r.push("mode", format!("undefined ({e})")),
    }
    for i in 0..p {
        let row: Vec<f64> = (0..p).map(|j| sigma.get(i, j)).collect();
        r.push(format!("covariance.{}", i + 1), row);
    }
    r.push("covariance_trace", sigma.trace());
    r.push("covariance_min_eigenvalue", sigma.smallest_eigenvalue());
    r
}

pub fn describe(args: &DescribeArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let dist = parse_alpha(&args.alpha)?;
    let report = describe_report(&dist);
    report
        .write_text(out)
        .map_err(|e| CliError::io("<stdout>", e))?;
    write_json(&report, args.json.as_deref())
}

fn push_fit(r: &mut Report, fit: &FitResult) {
    let prefix = fit.method.as_str();
    r.push(format!("{prefix}.alpha_hat"), fit.alpha_hat.as_slice());
    r.push(format!("{prefix}.iterations"), fit.iterations);
    r.push(format!("{prefix}.converged"), fit.converged);
    r.push(format!("{prefix}.termination"), fit.termination);
    r.push(format!("{prefix}.final_criterion"), fit.final_criterion);
    if let Some(err) = fit.norm_error_vs_truth {
        r.push(format!("{prefix}.norm_error_pct"), err);
    }
    for (k, w) in fit.warnings.iter().enumerate() {
        r.push(format!("{prefix}.warning.{}", k + 1), w.as_str());
    }
}

/// Fits in method order (MOM, then MLE); each is also returned.
pub fn fit_sample(
    sample: &SampleMatrix,
    method: MethodArg,
    truth: Option<&AlphaVector>,
    options: &FitOptions,
) -> Result<Vec<FitResult>, SddError> {
    let mut fits = Vec::new();
    if matches!(method, MethodArg::Mom | MethodArg::Both) {
        fits.push(fit_mom(sample, options)?);
    }
    if matches!(method, MethodArg::Mle | MethodArg::Both) {
        fits.push(fit_mle(sample, None, options)?);
    }
    if let Some(t) = truth {
        fits = fits
            .into_iter()
            .map(|f| f.with_truth(t))
            .collect::<Result<_, _>>()?;
    }
    Ok(fits)
}

pub fn fit(args: &FitArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let options = args.tolerances.to_options()?;
    let transform = match args.transform {
        TransformArg::None => Transform::None,
        TransformArg::LogShift => Transform::LogShift(args.shift),
    };
    let ingest_options = IngestOptions {
        transform,
        renormalize: args.renormalize,
    };
    let truth = match &args.truth {
        Some(t) => Some(AlphaVector::new(t.clone()).map_err(CliError::usage)?),
        None => None,
    };

    let file = File::open(&args.input).map_err(|e| CliError::io(&args.input, e))?;
    let table = ingest::read_table(std::io::BufReader::new(file))?;
    let header = table.header.clone();
    let sample = ingest::sample_from_table(table, &ingest_options)?;
    if let Some(t) = &truth {
        if t.dim() != sample.dim() {
            return Err(CliError::Usage(format!(
                "--truth has {} values but the data has {} columns",
                t.dim(),
                sample.dim()
            )));
        }
    }
    if sample.has_zero() {
        return Err(CliError::data(SddError::NonFiniteSuffStats {
            column: sample
                .suffstats()
                .iter()
                .position(|s| !s.is_finite())
                .unwrap_or(0),
        }));
    }

    let fits =
        fit_sample(&sample, args.method, truth.as_ref(), &options).map_err(CliError::data)?;

    let mut r = Report::new();
    r.push("n", sample.n());
    r.push("p", sample.dim());
    if let Some(h) = header {
        r.push("columns", h.join(","));
    }
    r.push(
        "transform",
        match transform {
            Transform::None => "none".to_string(),
            Transform::LogShift(c) => format!("log-shift({c})"),
        },
    );
    for f in &fits {
        push_fit(&mut r, f);
    }
    if let [mom, mle] = fits.as_slice() {
        if let Ok(d) = norm_error_pct(&mom.alpha_hat, &mle.alpha_hat) {
            r.push("mom_mle_distance_pct", d);
        }
    }
    r.write_text(out).map_err(|e| CliError::io("<stdout>", e))?;
    write_json(&r, args.json.as_deref())?;

    let failed: Vec<&str> = fits
        .iter()
        .filter(|f| !f.converged)
        .map(|f| f.method.as_str())
        .collect();
    if failed.is_empty() {
        Ok(())
    } else {
        Err(CliError::Convergence(format!(
            "fit did not converge: {}",
            failed.join(", ")
        )))
    }
}

/// Midpoints of `resolution` equal cells on `(0, π/2)` as `(angle, sin, cos)`.
fn midpoint_angles(resolution: usize) -> Vec<(f64, f64, f64)> {
    let h = std::f64::consts::FRAC_PI_2 / resolution as f64;
    (0..resolution)
        .map(|k| {
            let angle = (k as f64 + 0.5) * h;
            let complement = (resolution as f64 - k as f64 - 0.5) * h;
            (angle, angle.sin(), complement.sin())
        })
        .collect()
}

/// Rows of `(θ[, φ], x_1..x_p, density)` with the same parametrization as
/// the quadrature oracle.
pub fn density_grid_rows(
    dist: &SphericalDirichlet,
    resolution: usize,
) -> Result<Vec<Vec<f64>>, CliError> {
    let angles = midpoint_angles(resolution);
    let mut rows = Vec::new();
    let mut push = |prefix: &[f64], x: [f64; 3], p: usize| -> Result<(), CliError> {
        let density = dist
            .log_density_coords(&x[..p])
            .map_err(CliError::usage)?
            .exp();
        let mut row = prefix.to_vec();
        row.extend_from_slice(&x[..p]);
        row.push(density);
        rows.push(row);
        Ok(())
    };
    match dist.dim() {
        2 => {
            for &(t, st, ct) in &angles {
                push(&[t], [ct, st, 0.0], 2)?;
            }
        }
        3 => {
            for &(t, st, ct) in &angles {
                for &(f, sf, cf) in &angles {
                    push(&[t, f], [st * cf, st * sf, ct], 3)?;
                }
            }
        }
        p => {
            return Err(CliError::Usage(format!(
                "density grids are available for p = 2 or 3, got {p}"
            )))
        }
    }
    Ok(rows)
}

pub fn density_grid(args: &DensityGridArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let dist = parse_alpha(&args.alpha)?;
    let resolution = usize::try_from(args.resolution).map_err(CliError::usage)?;
    let rows = density_grid_rows(&dist, resolution)?;
    let p = dist.dim();
    let mut header: Vec<String> = if p == 2 {
        vec!["theta".into()]
    } else {
        vec!["theta".into(), "phi".into()]
    };
    header.extend((1..=p).map(|j| format!("x{j}")));
    header.push("density".into());
    with_output(args.output.as_deref(), out, |w| {
        writeln!(w, "{}", header.join(","))?;
        for row in &rows {
            let cells: Vec<String> = row.iter().map(|v| format_f64(*v)).collect();
            writeln!(w, "{}", cells.join(","))?;
        }
        Ok(())
    })
}

#[derive(Debug, Clone)]
pub struct ScenarioResult {
    pub truth: AlphaVector,
    pub mom: FitResult,
    pub mle: FitResult,
}

/// Scenario `k` draws `n` points from `RandomSource::for_stream(seed, k)` and
/// fits both estimators. Scenarios run on separate threads; results come
/// back in scenario order.
pub fn run_table1(
    seed: u64,
    n: usize,
    options: &FitOptions,
) -> Result<Vec<ScenarioResult>, SddError> {
    std::thread::scope(|scope| {
        let handles: Vec<_> = TABLE1_SCENARIOS
            .iter()
            .enumerate()
            .map(|(k, alpha)| {
                scope.spawn(move || -> Result<ScenarioResult, SddError> {
                    let truth = AlphaVector::new(alpha.to_vec())?;
                    let dist = SphericalDirichlet::new(truth.clone());
                    let mut source = RandomSource::for_stream(seed, k as u64);
                    let sample = sample_sdd(&dist, n, &mut source)?;
                    let mom = fit_mom(&sample, options)?.with_truth(&truth)?;
                    let mle = fit_mle(&sample, None, options)?.with_truth(&truth)?;
                    Ok(ScenarioResult { truth, mom, mle })
                })
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("scenario thread panicked"))
            .collect()
    })
}

fn fmt_vec(v: &[f64], digits: usize) -> String {
    v.iter()
        .map(|x| format!("{x:.digits$}"))
        .collect::<Vec<_>>()
        .join(", ")
}

pub fn reproduce_table1(args: &ReproduceArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let options = args.tolerances.to_options()?;
    let n = usize::try_from(args.n).map_err(CliError::usage)?;
    let results = run_table1(args.seed, n, &options).map_err(CliError::data)?;

    let mut report = Report::new();
    report.push("seed", args.seed);
    report.push("n", n);
    let mut text = String::new();
    text.push_str(&format!("seed {}  n {}\n", args.seed, n));
    text.push_str(&format!(
        "{:<18} {:<6} {:<30} {:>6} {:>10} {:>8}\n",
        "alpha", "method", "estimate", "iter", "converged", "error%"
    ));
    let mut problems = Vec::new();
    let mut mle_not_worse = 0;
    for (k, s) in results.iter().enumerate() {
        for fit in [&s.mom, &s.mle] {
            let err = fit.norm_error_vs_truth.unwrap_or(f64::NAN);
            text.push_str(&format!(
                "{:<18} {:<6} {:<30} {:>6} {:>10} {:>8.2}\n",
                format!("({})", fmt_vec(s.truth.as_slice(), 1)),
                fit.method.as_str().to_uppercase(),
                format!("({})", fmt_vec(fit.alpha_hat.as_slice(), 4)),
                fit.iterations,
                fit.converged,
                err
            ));
            let key = format!("scenario{}.{}", k + 1, fit.method.as_str());
            report.push(format!("{key}.alpha_hat"), fit.alpha_hat.as_slice());
            report.push(format!("{key}.iterations"), fit.iterations);
            report.push(format!("{key}.converged"), fit.converged);
            report.push(format!("{key}.norm_error_pct"), err);
            if !fit.converged {
                problems.push(format!(
                    "scenario {} {}: not converged ({}, criterion {:e})",
                    k + 1,
                    fit.method,
                    fit.termination,
                    fit.final_criterion
                ));
            }
            if !(err <= args.max_error) {
                problems.push(format!(
                    "scenario {} {}: error {err:.3}% exceeds {}%",
                    k + 1,
                    fit.method,
                    args.max_error
                ));
            }
        }
        report.push(format!("scenario{}.alpha", k + 1), s.truth.as_slice());
        if s.mle.norm_error_vs_truth <= s.mom.norm_error_vs_truth {
            mle_not_worse += 1;
        }
    }
    text.push_str(&format!(
        "MLE error <= MOM error in {mle_not_worse} of {} scenarios\n",
        results.len()
    ));
    report.push("mle_not_worse_count", mle_not_worse as usize);
    report.push("passed", problems.is_empty());

    out.write_all(text.as_bytes())
        .map_err(|e| CliError::io("<stdout>", e))?;
    write_json(&report, args.json.as_deref())?;
    if problems.is_empty() {
        Ok(())
    } else {
        Err(CliError::Convergence(problems.join("; ")))
    }
}
