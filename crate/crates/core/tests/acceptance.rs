//! Acceptance gate. Prints one PASS/FAIL line per criterion and exits
//! non-zero when any criterion fails.

use std::f64::consts::PI;
use std::fs;
use std::path::Path;
use std::process::{Command, ExitCode};
use std::time::Instant;

use mcarfima::config::ExperimentConfig;
use mcarfima::estimators::{dcca, dfa, powerlaw_fit, sample_ccf, ScaleRange};
use mcarfima::fir::{causal_filter_with, ma_weights, ConvolutionMethod};
use mcarfima::harness::{run_experiment_in_memory, ExperimentReport};
use mcarfima::innovations::{sample, CovarianceSpec};
use mcarfima::models::{cross_spectrum, theoretical_ccf, ModelSpec, Simulator};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use statrs::function::gamma::ln_gamma;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn in_band(v: f64, lo: f64, hi: f64) -> bool {
    (lo..=hi).contains(&v)
}

fn replicated(preset: &str, max_lag: usize) -> (ExperimentReport, f64) {
    let mut cfg = ExperimentConfig::for_preset(preset);
    cfg.len = 10_000;
    cfg.replications = 100;
    cfg.dcca.s_min = 10;
    cfg.dcca.s_max = Some(2000);
    cfg.dcca.step = 10;
    cfg.dfa = cfg.dcca.clone();
    cfg.hxa.tau_min = 1;
    cfg.hxa.tau_max = 100;
    cfg.ccf.max_lag = max_lag;
    // theory for the process actually simulated (filters cut at M)
    cfg.ccf_truncation = cfg.truncation();
    let model = cfg.validate().expect("preset config");
    let start = Instant::now();
    let report = run_experiment_in_memory(&cfg, &model).expect("experiment");
    (report, start.elapsed().as_secs_f64())
}

fn mean_of(report: &ExperimentReport, name: &str) -> f64 {
    report.row(name).map_or(f64::NAN, |r| r.mean)
}

fn weights_criterion() -> Outcome {
    let start = Instant::now();
    let mut worst_rel = 0.0f64;
    let mut worst_slope = 0.0f64;
    for d in [0.1, 0.3, 0.4, 0.45] {
        let w = ma_weights(d, 10_000).unwrap();
        for n in 1..=1000usize {
            let exact = (ln_gamma(n as f64 + d) - ln_gamma(n as f64 + 1.0) - ln_gamma(d)).exp();
            worst_rel = worst_rel.max((w.get(n) - exact).abs() / exact);
        }
        let ns: Vec<f64> = (1000..=10_000).step_by(100).map(|n| n as f64).collect();
        let vs: Vec<f64> = ns.iter().map(|&n| w.get(n as usize)).collect();
        let slope = powerlaw_fit(&ns, &vs).unwrap().exponent;
        worst_slope = worst_slope.max((slope - (d - 1.0)).abs());
    }
    let secs = start.elapsed().as_secs_f64();
    outcome(
        worst_rel < 1e-10 && worst_slope <= 0.01 && secs < 1.0,
        format!("max rel err {worst_rel:.2e}, max |slope - (d-1)| {worst_slope:.4}, {secs:.3} s"),
    )
}

fn model1_exponents(report: &ExperimentReport, secs: f64) -> Outcome {
    let (dcca_h, hxa_h) = (mean_of(report, "dcca"), mean_of(report, "hxa"));
    let (hx, hy) = (mean_of(report, "dfa_x"), mean_of(report, "dfa_y"));
    outcome(
        in_band(dcca_h, 0.70, 0.90)
            && in_band(hxa_h, 0.70, 0.90)
            && in_band(hx, 0.80, 0.95)
            && in_band(hy, 0.80, 0.95)
            && secs < 300.0,
        format!("DCCA {dcca_h:.4}, HXA {hxa_h:.4}, DFA x {hx:.4}, DFA y {hy:.4}, {secs:.1} s"),
    )
}

fn short_range_exponents(reports: &[(&str, ExperimentReport)]) -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    for (name, r) in reports {
        let (d, h) = (mean_of(r, "dcca"), mean_of(r, "hxa"));
        let (hx, hy) = (mean_of(r, "dfa_x"), mean_of(r, "dfa_y"));
        pass &= in_band(d, 0.40, 0.60)
            && in_band(h, 0.40, 0.60)
            && in_band(hx, 0.80, 0.95)
            && in_band(hy, 0.80, 0.95);
        parts.push(format!(
            "{name}: DCCA {d:.4}, HXA {h:.4}, DFA x {hx:.4}, DFA y {hy:.4}"
        ));
    }
    outcome(pass, parts.join("; "))
}

fn model3_ccf_structure() -> Outcome {
    let (len, truncation) = (1_000_000, 1_000_000);
    let model = ModelSpec::model3();
    let series = Simulator::new(&model, len, truncation)
        .unwrap()
        .simulate(42)
        .unwrap();
    let ccf = sample_ccf(&series.x, &series.y, 100).unwrap();
    let theory = theoretical_ccf(&model, 0, truncation).unwrap().at(0).unwrap();
    let rho0 = ccf.at(0).unwrap();
    let band = 3.0 / (len as f64).sqrt();
    let inside = (1..=100).filter(|&k| ccf.at(k).unwrap().abs() < band).count();
    let max_off = (1..=100).map(|k| ccf.at(k).unwrap().abs()).fold(0.0, f64::max);
    outcome(
        (rho0 - theory).abs() <= 0.01 && inside >= 95,
        format!(
            "rho(0) {rho0:.4} vs {theory:.4}; {inside}/100 lags below {band:.4} (max |rho| {max_off:.4})"
        ),
    )
}

fn model1_ccf_agreement(report: &ExperimentReport) -> Outcome {
    let Some(c) = &report.ccf else {
        return outcome(false, "no ccf in report".into());
    };
    let worst = (0..=20)
        .map(|k| {
            let r = c.row(k).unwrap();
            (k, (r.sample - r.theory).abs())
        })
        .fold((0, 0.0f64), |a, b| if b.1 > a.1 { b } else { a });
    outcome(
        worst.1 < 0.01,
        format!("max |mean rho - theory| {:.4} at lag {}", worst.1, worst.0),
    )
}

fn ccf_asymptote() -> Outcome {
    let ccf = theoretical_ccf(&ModelSpec::model1(), 1000, 100_000).unwrap();
    let lags: Vec<f64> = (100..=1000).map(|k| k as f64).collect();
    let vals: Vec<f64> = (100..=1000).map(|k| ccf.at(k).unwrap()).collect();
    let slope = powerlaw_fit(&lags, &vals).unwrap().exponent;
    outcome((slope + 0.4).abs() <= 0.05, format!("slope {slope:.4}"))
}

/// `Σ_{n<N} a_n(d) e^{i s λ n}` for `s = ±1`.
fn truncated_series(d: f64, lambda: f64, sign: f64, terms: usize) -> Complex64 {
    let w = ma_weights(d, terms - 1).unwrap();
    w.weights()
        .iter()
        .enumerate()
        .map(|(n, a)| Complex64::from_polar(*a, sign * lambda * n as f64))
        .sum()
}

fn spectrum_consistency() -> Outcome {
    let model = ModelSpec::model1();
    let comps = model.components();
    let terms = 1_000_000;
    let mut worst_rel = 0.0f64;
    for lambda in [PI / 4.0, PI / 2.0, PI] {
        // the rectangular double sum factors into two single sums
        let mut direct = Complex64::new(0.0, 0.0);
        for i in 0..2 {
            for j in 2..4 {
                let c = comps[i].weight * comps[j].weight * model.covariance.covariance(i, j);
                if c == 0.0 {
                    continue;
                }
                direct += c
                    * truncated_series(comps[i].kind.memory(), lambda, 1.0, terms)
                    * truncated_series(comps[j].kind.memory(), lambda, -1.0, terms);
            }
        }
        direct /= 2.0 * PI;
        let closed = cross_spectrum(&model, lambda).unwrap();
        worst_rel = worst_rel.max((closed - direct).norm() / direct.norm());
    }
    let grid: Vec<f64> = (0..=40).map(|i| 10f64.powf(-4.0 + 2.0 * i as f64 / 40.0)).collect();
    let mags: Vec<f64> = grid
        .iter()
        .map(|&l| cross_spectrum(&model, l).unwrap().norm())
        .collect();
    let slope = powerlaw_fit(&grid, &mags).unwrap().exponent;
    outcome(
        worst_rel < 1e-3 && (slope + 0.6).abs() <= 0.02,
        format!("max rel diff {worst_rel:.2e}, low-frequency slope {slope:.4}"),
    )
}

fn run_cli(dir: &Path, args: &[&str]) -> bool {
    Command::new(env!("CARGO_BIN_EXE_mcarfima"))
        .args(args)
        .arg("--out")
        .arg(dir)
        .status()
        .is_ok_and(|s| s.success())
}

fn dir_contents(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<(String, Vec<u8>)> = fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let p = e.unwrap().path();
            (p.file_name().unwrap().to_string_lossy().into_owned(), fs::read(&p).unwrap())
        })
        .collect();
    files.sort();
    files
}

fn structural_invariants() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(8);

    let mut dcca_mismatch = 0;
    for case in 0..20u64 {
        let len = rng.random_range(200..3000);
        let z = sample(&CovarianceSpec::identity(), len, 100 + case).unwrap().streams[0].clone();
        let range = ScaleRange::new(4, len / 4, rng.random_range(1..6));
        let order = rng.random_range(1..3);
        let a = dcca(&z, &z, &range, order).unwrap();
        let b = dfa(&z, &range, order).unwrap();
        if a.values != b.values || a.scales != b.scales {
            dcca_mismatch += 1;
        }
    }

    let mut worst = 0.0f64;
    for case in 0..100u64 {
        let len = rng.random_range(1..3000);
        let trunc = rng.random_range(1..3000);
        let d = rng.random_range(0.0..0.49);
        let w = ma_weights(d, trunc).unwrap();
        let u = sample(&CovarianceSpec::identity(), len + trunc, 500 + case).unwrap().streams[0].clone();
        let fast = causal_filter_with(&u, &w, len, ConvolutionMethod::Fft).unwrap();
        let slow = causal_filter_with(&u, &w, len, ConvolutionMethod::Direct).unwrap();
        let diff = fast.iter().zip(&slow).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        worst = worst.max(diff);
    }

    let tmp = tempfile::tempdir().unwrap();
    let runs = [
        vec!["simulate", "--model", "model1", "--reps", "2", "--T", "2000", "--seed", "7"],
        vec!["experiment", "--model", "model2", "--reps", "3", "--T", "2000", "--seed", "7"],
        vec!["theory", "--model", "model1"],
    ];
    let mut identical = true;
    for (i, args) in runs.iter().enumerate() {
        let a = tmp.path().join(format!("run{i}a"));
        let b = tmp.path().join(format!("run{i}b"));
        identical &= run_cli(&a, args) && run_cli(&b, args) && dir_contents(&a) == dir_contents(&b);
    }

    outcome(
        dcca_mismatch == 0 && worst < 1e-8 && identical,
        format!(
            "dcca(z,z) != dfa(z) in {dcca_mismatch}/20, fast vs direct max diff {worst:.2e}, CLI reruns identical: {identical}"
        ),
    )
}

fn main() -> ExitCode {
    let mut results: Vec<(&str, Outcome)> = Vec::new();
    results.push(("1 weight correctness", weights_criterion()));

    let (m1, secs) = replicated("model1", 20);
    results.push(("2 model1 exponent recovery", model1_exponents(&m1, secs)));

    let (m2, _) = replicated("model2", 20);
    let (m3, _) = replicated("model3", 20);
    results.push((
        "3 short-range cross-correlation",
        short_range_exponents(&[("model2", m2), ("model3", m3)]),
    ));

    results.push(("4 model3 ccf structure", model3_ccf_structure()));
    results.push(("5 model1 ccf theory vs simulation", model1_ccf_agreement(&m1)));
    results.push(("6 theoretical ccf asymptote", ccf_asymptote()));
    results.push(("7 spectrum consistency", spectrum_consistency()));
    results.push(("8 structural invariants", structural_invariants()));

    let mut failed = 0;
    for (name, o) in &results {
        println!("{} criterion {name}: {}", if o.pass { "PASS" } else { "FAIL" }, o.detail);
        failed += usize::from(!o.pass);
    }
    println!("{} of {} criteria passed", results.len() - failed, results.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
