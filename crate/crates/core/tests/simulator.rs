use casekin::frailty::{kendall_tau, latent_pairs, positive_stable, simulate_dataset};
use casekin::km::{km_estimate, KmInput};
use casekin::rng::stream_rng;
use casekin::{FrailtyKind, FrailtyModel, Group, Observation, Scenario, SimConfig, WeibullBaseline};

fn model(kind: FrailtyKind, tau: f64) -> FrailtyModel {
    let nu = casekin::calibrate_nu(kind, tau, 4.6, 0.01, 0.6, 110.0).unwrap();
    FrailtyModel::new(kind, tau, WeibullBaseline::standard(nu), 110.0).unwrap()
}

#[test]
fn positive_stable_laplace_transform() {
    let mut rng = stream_rng(5, 0);
    let draws: Vec<f64> = (0..100_000).map(|_| positive_stable(0.5, &mut rng)).collect();
    for s in [0.5f64, 1.0, 2.0] {
        let lt = draws.iter().map(|w| (-s * w).exp()).sum::<f64>() / draws.len() as f64;
        assert!((lt - (-s.sqrt()).exp()).abs() < 0.01, "s={s}: {lt}");
    }
}

#[test]
fn gamma_frailty_moments() {
    let m = model(FrailtyKind::Gamma, 1.0 / 3.0);
    let mut rng = stream_rng(6, 0);
    let n = 200_000;
    let draws: Vec<f64> = (0..n).map(|_| m.draw_frailty(&mut rng)).collect();
    let mean = draws.iter().sum::<f64>() / n as f64;
    let var = draws.iter().map(|w| (w - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    assert!((mean - 1.0).abs() < 0.01, "mean {mean}");
    assert!((var - m.theta()).abs() < 0.02, "var {var} theta {}", m.theta());
}

#[test]
fn latent_kendall_tau_matches_target() {
    for (kind, tau) in [(FrailtyKind::Gamma, 0.5), (FrailtyKind::PositiveStable, 1.0 / 3.0)] {
        let m = model(kind, tau);
        let est = kendall_tau(&latent_pairs(&m, 20_000, 9));
        assert!((est - tau).abs() < 0.02, "{kind:?}: {est}");
    }
}

#[test]
fn censoring_free_km_matches_closed_form() {
    for kind in [FrailtyKind::Gamma, FrailtyKind::PositiveStable] {
        let m = model(kind, 0.5);
        let mut rng = stream_rng(12, 0);
        let obs: Vec<Observation> = (0..100_000)
            .map(|_| {
                let w = m.draw_frailty(&mut rng);
                let t = m.draw_failure(w, &mut rng);
                if t <= 110.0 {
                    Observation::event(t)
                } else {
                    Observation::censored(110.0)
                }
            })
            .collect();
        let km = km_estimate(&KmInput::events(obs)).unwrap();
        let sup = (0..=220)
            .map(|k| {
                let t = 0.5 * k as f64;
                (km.eval(t) - m.marginal_survival(t)).abs()
            })
            .fold(0.0, f64::max);
        assert!(sup < 0.01, "{kind:?}: {sup}");
    }
}

#[test]
fn control_martingale_has_mean_zero() {
    let m = Scenario::high_event_rate(FrailtyKind::Gamma, 0.5).model(1, 4).unwrap();
    let study = simulate_dataset(&SimConfig::new(m, 10_000, 1, 1, 21)).unwrap();
    let p = |v: f64, x: f64| (v / 30.0).cos() + x / 110.0;
    let terms: Vec<f64> = study
        .dataset
        .in_group(Group::Control)
        .flat_map(|f| {
            let x = f.proband.time;
            f.relatives.iter().map(move |r| {
                let jump = if r.event { p(r.time, x) } else { 0.0 };
                // Simpson quadrature of P(v, x) λ0(v|x) over [0, X_R]
                let n = 400;
                let step = r.time / n as f64;
                let mut acc = 0.0;
                for k in 0..=n {
                    let v = k as f64 * step;
                    let c = if k == 0 || k == n {
                        1.0
                    } else if k % 2 == 1 {
                        4.0
                    } else {
                        2.0
                    };
                    acc += c * p(v, x) * m.conditional_hazard0(v, x);
                }
                jump - acc * step / 3.0
            })
        })
        .collect();
    let n = terms.len() as f64;
    let mean = terms.iter().sum::<f64>() / n;
    let sd = (terms.iter().map(|t| (t - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt();
    assert!(mean.abs() < 3.0 * sd / n.sqrt(), "mean {mean} se {}", sd / n.sqrt());
}

#[test]
fn sampled_counts_and_status() {
    let m = Scenario::low_event_rate(FrailtyKind::PositiveStable, 1.0 / 3.0).model(2, 8).unwrap();
    let study = simulate_dataset(&SimConfig::new(m, 300, 2, 4, 3)).unwrap();
    let ds = &study.dataset;
    assert_eq!((ds.n1(), ds.n0(), ds.n_relatives()), (300, 600, 3600));
    assert!(ds.in_group(Group::Case).all(|f| f.proband.event));
    assert!(ds
        .families()
        .iter()
        .flat_map(|f| std::iter::once(&f.proband).chain(&f.relatives))
        .all(|o| o.time <= 110.0 && o.time >= m.censoring_lower.unwrap().min(o.time)));
    assert_eq!(study.truth_grid.len(), study.true_survival.len());
}

#[test]
fn identity_chain_on_closed_forms() {
    for kind in [FrailtyKind::Gamma, FrailtyKind::PositiveStable] {
        let m = model(kind, 0.5);
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
        assert!(worst < 1e-12, "{kind:?}: {worst}");
    }
}

#[test]
fn joint_survival_is_consistent_with_conditionals() {
    let m = model(FrailtyKind::PositiveStable, 0.5);
    for (t, u) in [(40.0, 70.0), (80.0, 30.0), (100.0, 100.0)] {
        let joint = m.joint_survival(t, u);
        assert!((joint - m.marginal_survival(t) * m.s0(u, t)).abs() < 1e-12);
        // S1(u|t) = -∂t joint / f(t), by central differences
        let e = 1e-4;
        let d = (m.joint_survival(t - e, u) - m.joint_survival(t + e, u)) / (2.0 * e);
        let f = m.marginal_hazard(t) * m.marginal_survival(t);
        assert!((d / f - m.s1(u, t)).abs() < 1e-6);
    }
}
