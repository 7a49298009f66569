//! Simulation, estimation, theory and replication drivers behind the CLI.
//!
//! Replication `r` always uses seed `base_seed + r`, and results are keyed
//! by replication index, so output files are identical for any worker
//! count.

use std::f64::consts::PI;
use std::fs;
use std::path::{Path, PathBuf};

use log::{info, warn};
use rayon::prelude::*;

use crate::config::{EstimatorKind, ExperimentConfig};
use crate::error::{Error, Result};
use crate::estimators::{dcca, dfa, hxa, sample_ccf, FluctuationSeries, ScalingFit};
use crate::models::{
    ccf_truncation_bound, cross_spectrum, theoretical_ccf, theoretical_exponents,
    BivariateSeries, ExponentReport, ModelSpec, Simulator, TheoreticalCcf,
};
use crate::output::{fmt_num, Table};
use crate::report::{join, lag_scatter, CcfComparison, SCATTER_POINT_CAP};

/// Names of the scalar estimates, in output column order.
pub const ESTIMATE_NAMES: [&str; 4] = ["dfa_x", "dfa_y", "dcca", "hxa"];

fn in_pool<T: Send>(workers: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T> {
    match workers {
        None => Ok(f()),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| Error::Config(format!("workers: {e}")))?;
            Ok(pool.install(f))
        }
    }
}

fn prepare_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir)?;
    Ok(())
}

/// Fluctuation functions and fits for one bivariate sample.
#[derive(Debug)]
pub struct SeriesEstimates {
    /// One entry per requested estimate, in [`ESTIMATE_NAMES`] order.
    pub fits: Vec<(&'static str, Result<(FluctuationSeries, ScalingFit)>)>,
}

impl SeriesEstimates {
    pub fn exponent(&self, name: &str) -> Option<f64> {
        self.fits
            .iter()
            .find(|(n, _)| *n == name)
            .and_then(|(_, r)| r.as_ref().ok())
            .map(|(_, fit)| fit.exponent)
    }
}

fn fitted(series: Result<FluctuationSeries>) -> Result<(FluctuationSeries, ScalingFit)> {
    let s = series?;
    let fit = s.hurst()?;
    Ok((s, fit))
}

/// Runs the configured DFA/DCCA/HXA estimators on one sample.
pub fn estimate_series(cfg: &ExperimentConfig, x: &[f64], y: &[f64]) -> SeriesEstimates {
    let len = x.len();
    let mut fits = Vec::new();
    if cfg.has(EstimatorKind::Dfa) {
        let r = cfg.dfa.range(len);
        fits.push(("dfa_x", fitted(dfa(x, &r, cfg.dfa.order))));
        fits.push(("dfa_y", fitted(dfa(y, &r, cfg.dfa.order))));
    }
    if cfg.has(EstimatorKind::Dcca) {
        let r = cfg.dcca.range(len);
        fits.push(("dcca", fitted(dcca(x, y, &r, cfg.dcca.order))));
    }
    if cfg.has(EstimatorKind::Hxa) {
        fits.push(("hxa", fitted(hxa(x, y, cfg.hxa.tau_min, cfg.hxa.tau_max))));
    }
    SeriesEstimates { fits }
}

fn write_series(path: &Path, series: &BivariateSeries) -> Result<()> {
    let mut t = Table::create(path, &["t", "x", "y"])?;
    for (i, (x, y)) in series.x.iter().zip(&series.y).enumerate() {
        t.row([i.to_string(), fmt_num(*x), fmt_num(*y)])?;
    }
    t.finish()
}

pub fn series_file_name(rep: usize, seed: u64) -> String {
    format!("series_{rep:04}_seed{seed}.csv")
}

/// Writes one `t,x,y` file per replication and returns their paths.
pub fn run_simulate(cfg: &ExperimentConfig) -> Result<Vec<PathBuf>> {
    let model = cfg.validate()?;
    prepare_dir(&cfg.output_dir)?;
    let sim = Simulator::new(&model, cfg.len, cfg.truncation())?;
    in_pool(cfg.workers, || {
        (0..cfg.replications)
            .into_par_iter()
            .map(|rep| {
                let seed = cfg.base_seed + rep as u64;
                let series = sim.simulate(seed)?;
                let path = cfg.output_dir.join(series_file_name(rep, seed));
                write_series(&path, &series)?;
                Ok(path)
            })
            .collect()
    })?
}

#[derive(Debug, Clone)]
pub struct ReplicationResult {
    pub rep: usize,
    pub seed: u64,
    /// `(name, estimate or error message)` in [`ESTIMATE_NAMES`] order.
    pub estimates: Vec<(&'static str, std::result::Result<f64, String>)>,
    pub ccf: Option<std::result::Result<Vec<f64>, String>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub name: &'static str,
    pub theoretical: f64,
    pub mean: f64,
    pub sd: f64,
    pub min: f64,
    pub max: f64,
    pub n_ok: usize,
    pub n_failed: usize,
}

#[derive(Debug, Clone)]
pub struct ExperimentReport {
    pub theory: ExponentReport,
    pub replications: Vec<ReplicationResult>,
    pub summary: Vec<SummaryRow>,
    /// Replication-averaged sample CCF against theory, when requested.
    pub ccf: Option<CcfComparison>,
}

impl ExperimentReport {
    pub fn row(&self, name: &str) -> Option<&SummaryRow> {
        self.summary.iter().find(|r| r.name == name)
    }
}

fn summarize(
    name: &'static str,
    theoretical: f64,
    reps: &[ReplicationResult],
) -> Result<SummaryRow> {
    let mut ok = Vec::new();
    let mut first_err = None;
    for r in reps {
        if let Some((_, v)) = r.estimates.iter().find(|(n, _)| *n == name) {
            match v {
                Ok(h) => ok.push(*h),
                Err(e) => {
                    first_err.get_or_insert_with(|| e.clone());
                }
            }
        }
    }
    let n_failed = reps.len() - ok.len();
    if ok.is_empty() {
        return Err(Error::InsufficientData(format!(
            "{name} failed in every replication: {}",
            first_err.unwrap_or_default()
        )));
    }
    if n_failed > 0 {
        warn!("{name}: {n_failed} of {} replications failed", reps.len());
    }
    let n = ok.len() as f64;
    let mean = ok.iter().sum::<f64>() / n;
    let sd = if ok.len() > 1 {
        (ok.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
    } else {
        0.0
    };
    Ok(SummaryRow {
        name,
        theoretical,
        mean,
        sd,
        min: ok.iter().copied().fold(f64::INFINITY, f64::min),
        max: ok.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        n_ok: ok.len(),
        n_failed,
    })
}

/// Replicated simulation plus estimation, with aggregate statistics
/// printed against the theoretical exponents.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    let model = cfg.validate()?;
    let report = run_experiment_in_memory(cfg, &model)?;
    prepare_dir(&cfg.output_dir)?;
    write_experiment(cfg, &report)?;
    Ok(report)
}

/// [`run_experiment`] without touching the filesystem.
pub fn run_experiment_in_memory(cfg: &ExperimentConfig, model: &ModelSpec) -> Result<ExperimentReport> {
    cfg.validate_run(cfg.len)?;
    let truncation = cfg.truncation();
    let theory = theoretical_exponents(model, truncation)?;
    let sim = Simulator::new(model, cfg.len, truncation)?;
    let want_ccf = cfg.has(EstimatorKind::Ccf);
    info!(
        "running {} replications of T = {} (M = {truncation})",
        cfg.replications, cfg.len
    );

    let replications: Vec<ReplicationResult> = in_pool(cfg.workers, || {
        (0..cfg.replications)
            .into_par_iter()
            .map(|rep| {
                let seed = cfg.base_seed + rep as u64;
                let series = match sim.simulate(seed) {
                    Ok(s) => s,
                    Err(e) => {
                        let msg = e.to_string();
                        return ReplicationResult {
                            rep,
                            seed,
                            estimates: ESTIMATE_NAMES.iter().map(|n| (*n, Err(msg.clone()))).collect(),
                            ccf: want_ccf.then_some(Err(msg)),
                        };
                    }
                };
                let est = estimate_series(cfg, &series.x, &series.y);
                let estimates = est
                    .fits
                    .into_iter()
                    .map(|(n, r)| (n, r.map(|(_, f)| f.exponent).map_err(|e| e.to_string())))
                    .collect();
                let ccf = want_ccf.then(|| {
                    sample_ccf(&series.x, &series.y, cfg.ccf.max_lag)
                        .map(|c| c.values)
                        .map_err(|e| e.to_string())
                });
                ReplicationResult {
                    rep,
                    seed,
                    estimates,
                    ccf,
                }
            })
            .collect()
    })?;

    let mut summary = Vec::new();
    for name in ESTIMATE_NAMES {
        let requested = replications
            .first()
            .is_some_and(|r| r.estimates.iter().any(|(n, _)| *n == name));
        if !requested {
            continue;
        }
        let theoretical = match name {
            "dfa_x" => theory.h_x,
            "dfa_y" => theory.h_y,
            _ => theory.h_xy,
        };
        summary.push(summarize(name, theoretical, &replications)?);
    }

    let ccf = if want_ccf {
        let ok: Vec<&Vec<f64>> = replications
            .iter()
            .filter_map(|r| r.ccf.as_ref().and_then(|c| c.as_ref().ok()))
            .collect();
        if ok.is_empty() {
            return Err(Error::InsufficientData("ccf failed in every replication".into()));
        }
        let width = 2 * cfg.ccf.max_lag + 1;
        let mut mean = vec![0.0; width];
        for c in &ok {
            mean.iter_mut().zip(c.iter()).for_each(|(m, v)| *m += v);
        }
        mean.iter_mut().for_each(|m| *m /= ok.len() as f64);
        let th = theoretical_ccf(model, cfg.ccf.max_lag, cfg.ccf_truncation)?;
        let threshold = 3.0 / ((ok.len() * cfg.len) as f64).sqrt()
            + ccf_truncation_bound(model, cfg.ccf_truncation)?;
        Some(join(&th.lags, &mean, &th.values, threshold))
    } else {
        None
    };

    Ok(ExperimentReport {
        theory,
        replications,
        summary,
        ccf,
    })
}

fn write_experiment(cfg: &ExperimentConfig, report: &ExperimentReport) -> Result<()> {
    let dir = &cfg.output_dir;
    let names: Vec<&str> = report.summary.iter().map(|r| r.name).collect();

    let mut header = vec!["rep", "seed"];
    header.extend(&names);
    header.push("errors");
    let mut t = Table::create(&dir.join("estimates.csv"), &header)?;
    for r in &report.replications {
        let mut row = vec![r.rep.to_string(), r.seed.to_string()];
        let mut errors = Vec::new();
        for name in &names {
            match r.estimates.iter().find(|(n, _)| n == name).map(|(_, v)| v) {
                Some(Ok(h)) => row.push(fmt_num(*h)),
                Some(Err(e)) => {
                    row.push(String::new());
                    errors.push(format!("{name}: {e}"));
                }
                None => row.push(String::new()),
            }
        }
        if let Some(Err(e)) = &r.ccf {
            errors.push(format!("ccf: {e}"));
        }
        row.push(errors.join("; "));
        t.row(row)?;
    }
    t.finish()?;

    let mut t = Table::create(
        &dir.join("summary.csv"),
        &["estimator", "theoretical", "mean", "sd", "min", "max", "n_ok", "n_failed"],
    )?;
    for s in &report.summary {
        t.row([
            s.name.to_string(),
            fmt_num(s.theoretical),
            fmt_num(s.mean),
            fmt_num(s.sd),
            fmt_num(s.min),
            fmt_num(s.max),
            s.n_ok.to_string(),
            s.n_failed.to_string(),
        ])?;
    }
    t.finish()?;

    if let Some(c) = &report.ccf {
        write_comparison(&dir.join("ccf_comparison.csv"), c)?;
    }
    Ok(())
}

fn write_comparison(path: &Path, c: &CcfComparison) -> Result<()> {
    let mut t = Table::create(path, &["lag", "sample", "theory", "abs_diff", "flagged"])?;
    for r in &c.rows {
        t.row([
            r.lag.to_string(),
            fmt_num(r.sample),
            fmt_num(r.theory),
            fmt_num(r.abs_diff),
            r.flagged.to_string(),
        ])?;
    }
    t.finish()
}

/// Human-readable aggregate table.
pub fn format_summary(report: &ExperimentReport) -> String {
    let mut out = format!(
        "theoretical: H_x = {:.4}, H_y = {:.4}, H_xy = {:.4}\n",
        report.theory.h_x, report.theory.h_y, report.theory.h_xy
    );
    out.push_str(&format!(
        "{:<8} {:>8} {:>8} {:>8} {:>8} {:>8} {:>6} {:>6}\n",
        "estim", "theory", "mean", "sd", "min", "max", "ok", "fail"
    ));
    for s in &report.summary {
        out.push_str(&format!(
            "{:<8} {:>8.4} {:>8.4} {:>8.4} {:>8.4} {:>8.4} {:>6} {:>6}\n",
            s.name, s.theoretical, s.mean, s.sd, s.min, s.max, s.n_ok, s.n_failed
        ));
    }
    out
}

#[derive(Debug, Clone)]
pub struct TheoryOutput {
    pub exponents: ExponentReport,
    pub ccf: TheoreticalCcf,
    /// `(λ, f_xy(λ))`, or the reason no spectrum was produced.
    pub spectrum: std::result::Result<Vec<(f64, num_complex::Complex64)>, String>,
}

/// Log-spaced frequencies from 1e-4 to π.
pub fn spectrum_grid(points: usize) -> Vec<f64> {
    let (lo, hi) = (1e-4f64.ln(), PI.ln());
    (0..points)
        .map(|i| (lo + (hi - lo) * i as f64 / (points - 1) as f64).exp())
        .map(|l| l.min(PI))
        .collect()
}

pub fn run_theory(cfg: &ExperimentConfig) -> Result<TheoryOutput> {
    let model = cfg.validate()?;
    let exponents = theoretical_exponents(&model, cfg.truncation())?;
    let ccf = theoretical_ccf(&model, cfg.ccf.max_lag, cfg.ccf_truncation)?;
    let spectrum = if model.is_all_fractional() {
        spectrum_grid(200)
            .into_iter()
            .map(|l| cross_spectrum(&model, l).map(|f| (l, f)))
            .collect::<Result<Vec<_>>>()
            .map_err(|e| e.to_string())
    } else {
        Err(Error::UnsupportedComponent(
            "cross spectrum has a closed form only for four fractional components".into(),
        )
        .to_string())
    };

    let dir = &cfg.output_dir;
    prepare_dir(dir)?;
    let mut t = Table::create(&dir.join("exponents.csv"), &["quantity", "value"])?;
    let e = &exponents;
    t.row(["H_x".to_string(), fmt_num(e.h_x)])?;
    t.row(["H_y".to_string(), fmt_num(e.h_y)])?;
    t.row(["H_xy".to_string(), fmt_num(e.h_xy)])?;
    t.row(["sigma_x".to_string(), fmt_num(e.sigma_x)])?;
    t.row(["sigma_y".to_string(), fmt_num(e.sigma_y)])?;
    let pair = e
        .dominating_pair
        .map_or_else(|| "none".to_string(), |(i, j)| format!("{i}-{j}"));
    t.row(["dominating_pair".to_string(), pair])?;
    t.finish()?;

    let mut t = Table::create(&dir.join("ccf_theory.csv"), &["lag", "rho"])?;
    for (lag, v) in ccf.lags.iter().zip(&ccf.values) {
        t.row([lag.to_string(), fmt_num(*v)])?;
    }
    t.finish()?;

    match &spectrum {
        Ok(points) => {
            let mut t = Table::create(&dir.join("spectrum.csv"), &["lambda", "re", "im", "abs"])?;
            for (l, f) in points {
                t.row([fmt_num(*l), fmt_num(f.re), fmt_num(f.im), fmt_num(f.norm())])?;
            }
            t.finish()?;
        }
        Err(reason) => warn!("spectrum not written: {reason}"),
    }

    Ok(TheoryOutput {
        exponents,
        ccf,
        spectrum,
    })
}

/// Reads a delimited file with `x` and `y` columns (any other columns,
/// such as `t`, are ignored).
pub fn read_series(path: &Path) -> Result<BivariateSeries> {
    let mut rdr = csv::Reader::from_path(path)?;
    let headers = rdr.headers()?.clone();
    let col = |name: &str| {
        headers
            .iter()
            .position(|h| h.trim() == name)
            .ok_or_else(|| Error::Config(format!("{}: missing `{name}` column", path.display())))
    };
    let (ix, iy) = (col("x")?, col("y")?);
    let mut x = Vec::new();
    let mut y = Vec::new();
    for (line, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let parse = |i: usize, name: &str| -> Result<f64> {
            rec.get(i)
                .and_then(|s| s.trim().parse::<f64>().ok())
                .ok_or_else(|| {
                    Error::Config(format!(
                        "{}: row {}: bad `{name}` value",
                        path.display(),
                        line + 2
                    ))
                })
        };
        x.push(parse(ix, "x")?);
        y.push(parse(iy, "y")?);
    }
    BivariateSeries::new(x, y, 0)
}

#[derive(Debug)]
pub struct EstimateOutput {
    pub estimates: SeriesEstimates,
    pub files: Vec<PathBuf>,
}

/// Estimators on a series read from `input`; writes fluctuation tables,
/// fits, the sample CCF and lagged scatter data.
pub fn run_estimate(cfg: &ExperimentConfig, input: &Path) -> Result<EstimateOutput> {
    let series = read_series(input)?;
    cfg.validate_run(series.len())?;
    let dir = &cfg.output_dir;
    prepare_dir(dir)?;
    let estimates = estimate_series(cfg, &series.x, &series.y);
    let mut files = Vec::new();

    let fits_path = dir.join("fits.csv");
    let mut fits = Table::create(
        &fits_path,
        &["estimator", "H", "intercept", "stderr", "n_points", "scale_min", "scale_max", "error"],
    )?;
    let mut any_ok = estimates.fits.is_empty();
    for (name, r) in &estimates.fits {
        match r {
            Ok((series, fit)) => {
                any_ok = true;
                let path = dir.join(format!("fluctuation_{name}.csv"));
                let mut t = Table::create(&path, &["scale", "value"])?;
                for (s, v) in series.scales.iter().zip(&series.values) {
                    t.row([s.to_string(), fmt_num(*v)])?;
                }
                t.finish()?;
                files.push(path);
                fits.row([
                    name.to_string(),
                    fmt_num(fit.exponent),
                    fmt_num(fit.intercept),
                    fmt_num(fit.stderr),
                    fit.n_points.to_string(),
                    fmt_num(fit.range.0),
                    fmt_num(fit.range.1),
                    String::new(),
                ])?;
            }
            Err(e) => {
                let empty = String::new;
                fits.row([
                    name.to_string(),
                    empty(),
                    empty(),
                    empty(),
                    empty(),
                    empty(),
                    empty(),
                    e.to_string(),
                ])?;
            }
        }
    }
    fits.finish()?;
    files.push(fits_path);

    if cfg.has(EstimatorKind::Ccf) {
        let ccf = sample_ccf(&series.x, &series.y, cfg.ccf.max_lag)?;
        let path = dir.join("ccf.csv");
        let mut t = Table::create(&path, &["lag", "rho"])?;
        for (l, v) in ccf.lags.iter().zip(&ccf.values) {
            t.row([l.to_string(), fmt_num(*v)])?;
        }
        t.finish()?;
        files.push(path);

        let fits_path = dir.join("scatter_fits.csv");
        let mut sf = Table::create(&fits_path, &["lag", "slope", "intercept", "slope_stderr", "n_pairs"])?;
        for &lag in &cfg.ccf.scatter_lags {
            let sc = lag_scatter(&series, lag)?;
            sf.row([
                lag.to_string(),
                fmt_num(sc.ls_slope),
                fmt_num(sc.ls_intercept),
                fmt_num(sc.slope_stderr),
                sc.pairs.len().to_string(),
            ])?;
            let path = dir.join(format!("scatter_lag{lag}.csv"));
            let mut t = Table::create(&path, &["x_lead", "y"])?;
            for (a, b) in sc.thinned(SCATTER_POINT_CAP) {
                t.row([fmt_num(a), fmt_num(b)])?;
            }
            t.finish()?;
            files.push(path);
        }
        sf.finish()?;
        files.push(fits_path);
        any_ok = true;
    }

    if !any_ok {
        return Err(Error::InsufficientData("every estimator failed".into()));
    }
    Ok(EstimateOutput { estimates, files })
}
