//! Acceptance suite. Prints one line per criterion and exits nonzero if any
//! criterion fails.
//!
//!     cargo test --release --test acceptance

use casekin::frailty::{kendall_tau, latent_pairs, oracle_pipeline_error};
use casekin::kernel::{local_linear_fit, triweight, FitOptions, GroupDesign, LocalFitAccumulators};
use casekin::km::{km_estimate, KmInput};
use casekin::marginal::bounds_violations;
use casekin::rng::{derive_seed, stream_rng};
use casekin::*;
use rand::Rng;
use rayon::prelude::*;
use std::time::Instant;

const REFERENCE_S: [f64; 3] = [0.9, 0.75, 0.5];

struct Report {
    failed: Vec<u32>,
}

impl Report {
    fn line(&mut self, id: u32, ok: bool, name: &str, detail: String) {
        println!("[{}] {id:>2} {name}: {detail}", if ok { "PASS" } else { "FAIL" });
        if !ok {
            self.failed.push(id);
        }
    }
}

// 1. oracle

fn oracle_errors() -> Vec<(f64, f64)> {
    let model = Scenario::high_event_rate(FrailtyKind::Gamma, 0.5).model(1, 1).unwrap();
    let e1 = oracle_pipeline_error(&model, 101, 200, 200).unwrap().max_abs_error;
    let e4 = oracle_pipeline_error(&model, 404, 800, 200).unwrap().max_abs_error;
    vec![(e1, e4)]
}

// 2. identity chain

fn identity_residuals() -> Vec<f64> {
    [FrailtyKind::Gamma, FrailtyKind::PositiveStable]
        .iter()
        .map(|&kind| {
            let nu = calibrate_nu(kind, 0.5, 4.6, 0.01, 0.6, 110.0).unwrap();
            let m = FrailtyModel::new(kind, 0.5, WeibullBaseline::standard(nu), 110.0).unwrap();
            let mut worst = 0.0f64;
            for i in 1..=100 {
                let t = 1.1 * i as f64;
                let lam = m.marginal_hazard(t);
                for j in 1..=100 {
                    let u = 1.1 * j as f64;
                    let r = lam * (m.s0(u, t) - m.s1(u, t)) + m.s0(u, t) * m.lambda0_star(u, t);
                    worst = worst.max(r.abs());
                }
            }
            worst
        })
        .collect()
}

// 3. kernel and KM

fn kernel_errors() -> f64 {
    let mut worst = (kernel_moment(0, 1.0) - 1.0)
        .abs()
        .max(kernel_moment(1, 1.0).abs())
        .max((kernel_moment(2, 1.0) - 1.0 / 9.0).abs());
    for k in 0..=1000 {
        let u = k as f64 / 1000.0;
        worst = worst.max((triweight(u) - triweight(-u)).abs());
    }
    worst.max(triweight(1.0).abs()).max(triweight(1.5).abs())
}

fn redistribute(obs: &[Observation], t: f64) -> f64 {
    let mut sorted = obs.to_vec();
    sorted.sort_by(|a, b| a.time.total_cmp(&b.time).then(b.event.cmp(&a.event)));
    let n = sorted.len();
    let mut mass = vec![1.0 / n as f64; n];
    for i in 0..n {
        if !sorted[i].event && i + 1 < n {
            let share = mass[i] / (n - i - 1) as f64;
            for m in &mut mass[i + 1..] {
                *m += share;
            }
            mass[i] = 0.0;
        }
    }
    1.0 - sorted
        .iter()
        .zip(&mass)
        .filter(|(o, _)| o.event && o.time <= t)
        .map(|(_, m)| m)
        .sum::<f64>()
}

fn km_exhaustive() -> (usize, f64) {
    let times = [1.0, 2.0, 3.0];
    let probes = [0.0, 0.5, 1.0, 1.5, 2.0, 2.5, 3.0, 4.0];
    let (mut cases, mut worst) = (0usize, 0.0f64);
    for n in 1..=6u32 {
        for mut code in 0..6usize.pow(n) {
            let obs: Vec<Observation> = (0..n)
                .map(|_| {
                    let c = code % 6;
                    code /= 6;
                    Observation::new(times[c / 2], c % 2 == 1)
                })
                .collect();
            let km = km_estimate(&KmInput::events(obs.clone())).unwrap();
            for &t in &probes {
                worst = worst.max((km.eval(t) - redistribute(&obs, t)).abs());
            }
            cases += 1;
        }
    }
    (cases, worst)
}

// 4. affine exactness

fn affine_worst(configs: usize) -> (usize, f64) {
    let mut rng = stream_rng(404, 0);
    let v = 1.0;
    let (mut done, mut worst) = (0usize, 0.0f64);
    while done < configs {
        let alpha = rng.random_range(0.2..0.8);
        let beta = rng.random_range(1.5..6.0) * if rng.random::<bool>() { -1.0 } else { 1.0 };
        let s: f64 = rng.random_range(0.0..1.0);
        let n = rng.random_range(5..25);
        let counts: Vec<(u32, u32)> = (0..n)
            .map(|_| {
                let y = rng.random_range(1..6u32);
                (rng.random_range(0..6u32).min(y), y)
            })
            .collect();
        if counts.iter().all(|&(k, _)| k == 0) {
            continue;
        }
        let mut fams = Vec::new();
        let mut pos = Vec::new();
        for (i, &(k, y)) in counts.iter().enumerate() {
            let rels = (0..y)
                .map(|j| if j < k { Observation::event(v) } else { Observation::censored(v + 0.5) })
                .collect();
            fams.push(FamilyRecord::new(format!("c{i:03}"), Observation::censored(50.0), rels));
            pos.push((format!("c{i:03}"), s + (k as f64 / y as f64 - alpha) / beta));
        }
        fams.push(FamilyRecord::new("k", Observation::event(40.0), vec![]));
        pos.push(("k".into(), 0.0));
        let ds = Dataset::from_families(fams).unwrap();
        let positions: Vec<f64> = ds
            .families()
            .iter()
            .map(|f| pos.iter().find(|(id, _)| *id == f.family_id).unwrap().1)
            .collect();
        let design = GroupDesign::new(&ds, Group::Control, &positions);
        if LocalFitAccumulators::compute(&design, s, 1.0, v).weighted_sse <= 1e-6 {
            continue;
        }
        let fit = local_linear_fit(&design, s, 1.0, &FitOptions::default());
        worst = worst
            .max((fit.d_lambda_star[0] - beta).abs())
            .max((fit.d_lambda[0] - alpha).abs());
        done += 1;
    }
    (done, worst)
}

// 5-7, 9. Monte Carlo

#[derive(Debug, Clone, PartialEq)]
struct Rep {
    h: f64,
    s_tilde: Vec<f64>,
    at_ages: [f64; 3],
    naive: [f64; 3],
    band: Option<(Vec<f64>, Vec<f64>)>,
    covered: [bool; 3],
    ci_error: Option<String>,
    violations: usize,
}

fn run_rep(model: &FrailtyModel, ages: &[f64; 3], n1: usize, r: u64, with_ci: bool) -> Rep {
    let study = simulate_dataset(&SimConfig::new(model.clone(), n1, 1, 1, derive_seed(1000 + n1 as u64, r))).unwrap();
    let ds = &study.dataset;
    let ecfg = EstimatorConfig::default();
    let bw = BandwidthConfig {
        seed: derive_seed(7, r),
        ..BandwidthConfig::default()
    };
    let sel = select_bandwidth(ds, &bw, &ecfg).unwrap();
    let est = estimate_marginal(ds, sel.h, &ecfg).unwrap();
    let mut violations = sel.bounds_violations + bounds_violations(&est);
    let at_ages = ages.map(|a| est.s_tilde_at(a));
    let naive = ages.map(|a| est.t_grid.interpolate(&est.km_naive, a));
    let (mut band, mut covered, mut ci_error) = (None, [false; 3], None);
    if with_ci {
        let cfg = CiConfig {
            b_outer: 100,
            seed: derive_seed(8, r),
            ..CiConfig::default()
        };
        match percentile_ci(ds, sel.h, &cfg, &ecfg) {
            Ok(ci) => {
                violations += ci.bounds_violations;
                for k in 0..3 {
                    let lo = ci.t_grid.interpolate(&ci.lower, ages[k]);
                    let hi = ci.t_grid.interpolate(&ci.upper, ages[k]);
                    covered[k] = lo <= REFERENCE_S[k] && REFERENCE_S[k] <= hi;
                }
                band = Some((ci.lower, ci.upper));
            }
            Err(e) => ci_error = Some(e.to_string()),
        }
    }
    Rep {
        h: sel.h,
        s_tilde: est.s_tilde,
        at_ages,
        naive,
        band,
        covered,
        ci_error,
        violations,
    }
}

fn monte_carlo(n1: usize, reps: u64, with_ci: bool) -> Vec<Rep> {
    let model = Scenario::high_event_rate(FrailtyKind::Gamma, 0.5).model(1, 2024).unwrap();
    let ages = REFERENCE_S.map(|p| model.age_at_survival(p));
    (0..reps).into_par_iter().map(|r| run_rep(&model, &ages, n1, r, with_ci)).collect()
}

fn mean(v: impl Iterator<Item = f64>) -> f64 {
    let (s, n) = v.fold((0.0, 0usize), |(s, n), x| (s + x, n + 1));
    s / n as f64
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

// 8. simulator calibration

fn calibration() -> (Vec<f64>, Vec<f64>) {
    let taus = [(FrailtyKind::Gamma, 0.5), (FrailtyKind::PositiveStable, 0.5)]
        .iter()
        .map(|&(kind, tau)| {
            let nu = calibrate_nu(kind, tau, 4.6, 0.01, 0.6, 110.0).unwrap();
            let m = FrailtyModel::new(kind, tau, WeibullBaseline::standard(nu), 110.0).unwrap();
            kendall_tau(&latent_pairs(&m, 100_000, 31)) - tau
        })
        .collect();
    let fractions = [
        Scenario::high_event_rate(FrailtyKind::Gamma, 0.5),
        Scenario::low_event_rate(FrailtyKind::Gamma, 0.5),
    ]
    .iter()
    .map(|sc| {
        let m = sc.model(1, 5).unwrap();
        let ds = simulate_dataset(&SimConfig::new(m, 2000, 1, 1, 77)).unwrap().dataset;
        let rels: Vec<&Observation> = ds.families().iter().flat_map(|f| &f.relatives).collect();
        rels.iter().filter(|o| !o.event).count() as f64 / rels.len() as f64
    })
    .collect();
    (taus, fractions)
}

#[derive(Debug)]
struct Outputs {
    oracle: Vec<(f64, f64)>,
    identity: Vec<f64>,
    kernel: f64,
    km: (usize, f64),
    affine: (usize, f64),
    main: Vec<Rep>,
    large: Vec<Rep>,
    calibration: (Vec<f64>, Vec<f64>),
}

fn run_all() -> Outputs {
    Outputs {
        oracle: oracle_errors(),
        identity: identity_residuals(),
        kernel: kernel_errors(),
        km: km_exhaustive(),
        affine: affine_worst(200),
        main: monte_carlo(500, 200, true),
        large: monte_carlo(2000, 50, false),
        calibration: calibration(),
    }
}

fn main() {
    casekin::io::configure_threads_from_env();
    let started = Instant::now();
    let out = run_all();
    let mut rep = Report { failed: vec![] };

    let (e1, e4) = out.oracle[0];
    rep.line(1, e1 < 1e-3 && e4 < 1e-4, "oracle pipeline", format!("max |dLambda| {e1:.2e} (default grids), {e4:.2e} (4x grids)"));

    let id = out.identity.iter().cloned().fold(0.0, f64::max);
    rep.line(2, id < 1e-12, "identity chain", format!("gamma {:.1e}, stable {:.1e} on 100x100 lattice", out.identity[0], out.identity[1]));

    let (cases, km) = out.km;
    rep.line(
        3,
        out.kernel < 1e-14 && km < 1e-12,
        "kernel and KM exactness",
        format!("kernel moments/symmetry {:.1e}; KM vs redistribution on {cases} samples {km:.1e}", out.kernel),
    );

    let (n_aff, aff) = out.affine;
    rep.line(4, n_aff == 200 && aff < 1e-10, "local-linear affine exactness", format!("{n_aff} configurations, worst {aff:.1e}"));

    let main = &out.main;
    let abs_err: Vec<f64> = (0..3).map(|k| mean(main.iter().map(|r| (r.at_ages[k] - REFERENCE_S[k]).abs()))).collect();
    let bias: Vec<f64> = (0..3).map(|k| mean(main.iter().map(|r| r.at_ages[k] - REFERENCE_S[k]))).collect();
    let naive_bias: Vec<f64> = (0..3).map(|k| mean(main.iter().map(|r| r.naive[k] - REFERENCE_S[k]))).collect();
    let ok5 = abs_err.iter().all(|&e| e <= 0.03) && bias[2].abs() <= naive_bias[2].abs();
    rep.line(
        5,
        ok5,
        "bias, n1=500, 200 reps",
        format!(
            "mean |S~-S| {:.4}/{:.4}/{:.4} (<= 0.03); mean bias {:+.4}/{:+.4}/{:+.4}; naive KM bias {:+.4}/{:+.4}/{:+.4}",
            abs_err[0], abs_err[1], abs_err[2], bias[0], bias[1], bias[2], naive_bias[0], naive_bias[1], naive_bias[2]
        ),
    );

    let med = |reps: &[Rep], k: usize| median(reps.iter().map(|r| (r.at_ages[k] - REFERENCE_S[k]).abs()).collect());
    let small: Vec<f64> = (0..3).map(|k| med(&main[..50], k)).collect();
    let large: Vec<f64> = (0..3).map(|k| med(&out.large, k)).collect();
    rep.line(
        6,
        (0..3).all(|k| large[k] < small[k]),
        "consistency trend",
        format!(
            "median |S~-S| n1=500 {:.4}/{:.4}/{:.4}, n1=2000 {:.4}/{:.4}/{:.4}",
            small[0], small[1], small[2], large[0], large[1], large[2]
        ),
    );

    let coverage: Vec<f64> = (0..3).map(|k| mean(main.iter().map(|r| r.covered[k] as u8 as f64))).collect();
    let ci_failures = main.iter().filter(|r| r.ci_error.is_some()).count();
    rep.line(
        7,
        coverage.iter().all(|c| (0.88..=0.99).contains(c)),
        "coverage, B_outer=100",
        format!(
            "{:.3}/{:.3}/{:.3} (in [0.88, 0.99]); {ci_failures} failed bands counted as misses",
            coverage[0], coverage[1], coverage[2]
        ),
    );

    let (taus, fr) = &out.calibration;
    rep.line(
        8,
        taus.iter().all(|d| d.abs() <= 0.02) && (fr[0] - 0.6).abs() <= 0.05 && (fr[1] - 0.9).abs() <= 0.05,
        "simulator calibration",
        format!(
            "Kendall tau error gamma {:+.4}, stable {:+.4}; censoring {:.3} (0.60) / {:.3} (0.90)",
            taus[0], taus[1], fr[0], fr[1]
        ),
    );

    let violations: usize = main.iter().chain(&out.large).map(|r| r.violations).sum();
    rep.line(9, violations == 0, "bounds invariant", format!("{violations} violations over estimates and bootstrap replicates"));

    let again = run_all();
    // Debug output of f64 round-trips, so equal text means equal bits
    let same = format!("{again:?}") == format!("{out:?}");
    rep.line(10, same, "determinism", "suites 1-8 rerun with identical seeds".to_string());

    let hs: Vec<f64> = main.iter().map(|r| r.h).collect();
    println!(
        "median selected h {:.2}; {} band errors; elapsed {:.0?}",
        median(hs),
        ci_failures,
        started.elapsed()
    );
    if !rep.failed.is_empty() {
        println!("failed criteria: {:?}", rep.failed);
        std::process::exit(1);
    }
}
