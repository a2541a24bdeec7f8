//! Shared-frailty family simulator and closed-form oracle quantities.
//!
//! Given a family frailty `W`, members fail independently with hazard
//! `W λ0(t)`, `λ0(t) = ν (μ t)^{p-1}`. Two frailty laws are supported: mean-one
//! gamma with variance `θ = 2τ/(1−τ)` and positive stable with index
//! `α = 1 − τ`, `τ` being Kendall's tau between two members.

use rand::Rng;
use rand_distr::{Distribution, Exp1, Gamma};

use crate::error::{Error, Result};
use crate::marginal::marginal_from_surfaces;
use crate::rng::{derive_seed, stream_rng};
use crate::surfaces::{ConditionalSurfaces, SurfaceDiagnostics, SurfaceMatrix, TimeTransform};
use crate::types::{Dataset, FamilyRecord, Grid, Observation};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FrailtyKind {
    Gamma,
    PositiveStable,
}

impl FrailtyKind {
    pub fn name(self) -> &'static str {
        match self {
            FrailtyKind::Gamma => "gamma",
            FrailtyKind::PositiveStable => "pstable",
        }
    }
}

impl std::str::FromStr for FrailtyKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gamma" => Ok(FrailtyKind::Gamma),
            "pstable" | "positive-stable" | "stable" => Ok(FrailtyKind::PositiveStable),
            other => Err(Error::InvalidConfig(format!("unknown frailty `{other}`"))),
        }
    }
}

/// `λ0(t) = ν (μ t)^{p-1}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeibullBaseline {
    pub shape: f64,
    pub scale: f64,
    pub level: f64,
}

impl WeibullBaseline {
    /// Shape 4.6 and scale 0.01 with the given level.
    pub fn standard(level: f64) -> Self {
        Self {
            shape: 4.6,
            scale: 0.01,
            level,
        }
    }

    pub fn hazard(&self, t: f64) -> f64 {
        self.level * (self.scale * t).powf(self.shape - 1.0)
    }

    pub fn cumulative(&self, t: f64) -> f64 {
        self.level * (self.scale * t).powf(self.shape) / (self.scale * self.shape)
    }

    pub fn inverse_cumulative(&self, x: f64) -> f64 {
        (x * self.scale * self.shape / self.level).powf(1.0 / self.shape) / self.scale
    }
}

/// Frailty law, dependence, conditional baseline and censoring window.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrailtyModel {
    pub kind: FrailtyKind,
    pub kendall_tau: f64,
    pub baseline: WeibullBaseline,
    pub end_of_study: f64,
    /// Interim censoring ages are uniform on `[lower, end_of_study]`; `None`
    /// means only administrative censoring at the end of study.
    pub censoring_lower: Option<f64>,
}

impl FrailtyModel {
    pub fn new(kind: FrailtyKind, kendall_tau: f64, baseline: WeibullBaseline, end_of_study: f64) -> Result<Self> {
        if !(kendall_tau > 0.0 && kendall_tau < 1.0) {
            return Err(Error::InvalidConfig(format!("Kendall tau must lie in (0,1), got {kendall_tau}")));
        }
        if !(baseline.shape > 0.0 && baseline.scale > 0.0 && baseline.level > 0.0) {
            return Err(Error::InvalidConfig("baseline parameters must be positive".into()));
        }
        if !(end_of_study > 0.0) {
            return Err(Error::InvalidConfig("end of study must be positive".into()));
        }
        Ok(Self {
            kind,
            kendall_tau,
            baseline,
            end_of_study,
            censoring_lower: None,
        })
    }

    pub fn with_censoring_lower(mut self, lower: Option<f64>) -> Self {
        self.censoring_lower = lower;
        self
    }

    /// Gamma frailty variance.
    pub fn theta(&self) -> f64 {
        2.0 * self.kendall_tau / (1.0 - self.kendall_tau)
    }

    /// Positive-stable index.
    pub fn alpha(&self) -> f64 {
        1.0 - self.kendall_tau
    }

    pub fn draw_frailty<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self.kind {
            FrailtyKind::Gamma => {
                let theta = self.theta();
                Gamma::new(1.0 / theta, theta).expect("valid gamma parameters").sample(rng)
            }
            FrailtyKind::PositiveStable => positive_stable(self.alpha(), rng),
        }
    }

    /// Marginal survival as a function of the conditional cumulative hazard.
    fn survival_of(&self, cum: f64) -> f64 {
        match self.kind {
            FrailtyKind::Gamma => {
                let theta = self.theta();
                (1.0 + theta * cum).powf(-1.0 / theta)
            }
            FrailtyKind::PositiveStable => (-cum.powf(self.alpha())).exp(),
        }
    }

    pub fn marginal_survival(&self, t: f64) -> f64 {
        self.survival_of(self.baseline.cumulative(t))
    }

    pub fn marginal_cumulative_hazard(&self, t: f64) -> f64 {
        let cum = self.baseline.cumulative(t);
        match self.kind {
            FrailtyKind::Gamma => {
                let theta = self.theta();
                (theta * cum).ln_1p() / theta
            }
            FrailtyKind::PositiveStable => cum.powf(self.alpha()),
        }
    }

    /// Age `t` with `S(t) = p`.
    pub fn age_at_survival(&self, p: f64) -> f64 {
        let lam = -p.ln();
        let cum = match self.kind {
            FrailtyKind::Gamma => {
                let theta = self.theta();
                (theta * lam).exp_m1() / theta
            }
            FrailtyKind::PositiveStable => lam.powf(1.0 / self.alpha()),
        };
        self.baseline.inverse_cumulative(cum)
    }

    pub fn marginal_hazard(&self, t: f64) -> f64 {
        let cum = self.baseline.cumulative(t);
        let h = self.baseline.hazard(t);
        match self.kind {
            FrailtyKind::Gamma => h / (1.0 + self.theta() * cum),
            FrailtyKind::PositiveStable => {
                if h == 0.0 {
                    0.0
                } else {
                    self.alpha() * h * cum.powf(self.alpha() - 1.0)
                }
            }
        }
    }

    /// `pr(T_P > t, T_R > u)`.
    pub fn joint_survival(&self, t: f64, u: f64) -> f64 {
        self.survival_of(self.baseline.cumulative(t) + self.baseline.cumulative(u))
    }

    /// `S0(u|t) = pr(T_R > u | T_P > t)`.
    pub fn s0(&self, u: f64, t: f64) -> f64 {
        (-self.lambda0(u, t)).exp()
    }

    /// `Λ0(u|t) = −log S0(u|t)`.
    pub fn lambda0(&self, u: f64, t: f64) -> f64 {
        let ht = self.baseline.cumulative(t);
        let hu = self.baseline.cumulative(u);
        match self.kind {
            FrailtyKind::Gamma => {
                let theta = self.theta();
                ((1.0 + theta * (ht + hu)).ln() - (1.0 + theta * ht).ln()) / theta
            }
            FrailtyKind::PositiveStable => {
                let a = self.alpha();
                (ht + hu).powf(a) - ht.powf(a)
            }
        }
    }

    /// `S1(u|t) = pr(T_R > u | T_P = t)`.
    pub fn s1(&self, u: f64, t: f64) -> f64 {
        match self.kind {
            FrailtyKind::Gamma => self.s0(u, t).powf(1.0 + self.theta()),
            FrailtyKind::PositiveStable => {
                let ht = self.baseline.cumulative(t);
                let hu = self.baseline.cumulative(u);
                if hu == 0.0 {
                    return 1.0;
                }
                if ht == 0.0 {
                    return 0.0;
                }
                self.s0(u, t) * ((ht + hu) / ht).powf(self.alpha() - 1.0)
            }
        }
    }

    /// `Λ*_0(u|t) = ∂Λ0(u|t)/∂t`.
    pub fn lambda0_star(&self, u: f64, t: f64) -> f64 {
        let ht = self.baseline.cumulative(t);
        let hu = self.baseline.cumulative(u);
        let h = self.baseline.hazard(t);
        if h == 0.0 {
            return 0.0;
        }
        match self.kind {
            FrailtyKind::Gamma => {
                let theta = self.theta();
                h * (1.0 / (1.0 + theta * (ht + hu)) - 1.0 / (1.0 + theta * ht))
            }
            FrailtyKind::PositiveStable => {
                let a = self.alpha();
                a * h * ((ht + hu).powf(a - 1.0) - ht.powf(a - 1.0))
            }
        }
    }

    /// `∂Λ1(u|t)/∂t` with `Λ1 = −log S1`.
    pub fn lambda1_star(&self, u: f64, t: f64) -> f64 {
        match self.kind {
            FrailtyKind::Gamma => (1.0 + self.theta()) * self.lambda0_star(u, t),
            FrailtyKind::PositiveStable => {
                let ht = self.baseline.cumulative(t);
                let hu = self.baseline.cumulative(u);
                let h = self.baseline.hazard(t);
                if h == 0.0 {
                    return 0.0;
                }
                self.lambda0_star(u, t) - (self.alpha() - 1.0) * h * (1.0 / (ht + hu) - 1.0 / ht)
            }
        }
    }

    /// `∂Λ0(u|t)/∂u`, the hazard at `u` of a relative of a proband known to
    /// survive past `t`.
    pub fn conditional_hazard0(&self, u: f64, t: f64) -> f64 {
        let ht = self.baseline.cumulative(t);
        let hu = self.baseline.cumulative(u);
        let h = self.baseline.hazard(u);
        match self.kind {
            FrailtyKind::Gamma => h / (1.0 + self.theta() * (ht + hu)),
            FrailtyKind::PositiveStable => {
                if h == 0.0 {
                    0.0
                } else {
                    self.alpha() * h * (ht + hu).powf(self.alpha() - 1.0)
                }
            }
        }
    }

    /// Latent failure time of one member given the family frailty.
    pub fn draw_failure<R: Rng + ?Sized>(&self, frailty: f64, rng: &mut R) -> f64 {
        let e: f64 = Exp1.sample(rng);
        self.baseline.inverse_cumulative(e / frailty)
    }

    /// Censoring age (interim or administrative).
    pub fn draw_censoring<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self.censoring_lower {
            Some(lo) if lo < self.end_of_study => lo + (self.end_of_study - lo) * rng.random::<f64>(),
            _ => self.end_of_study,
        }
    }

    fn observe<R: Rng + ?Sized>(&self, frailty: f64, rng: &mut R) -> Observation {
        let t = self.draw_failure(frailty, rng);
        let c = self.draw_censoring(rng);
        if t <= c {
            Observation::event(t)
        } else {
            Observation::censored(c)
        }
    }
}

/// Kanter's representation of a positive stable variate with Laplace
/// transform `exp(−s^α)`.
pub fn positive_stable<R: Rng + ?Sized>(alpha: f64, rng: &mut R) -> f64 {
    if alpha >= 1.0 {
        return 1.0;
    }
    let u = std::f64::consts::PI * (1.0 - rng.random::<f64>());
    let e: f64 = Exp1.sample(rng);
    let a = (alpha * u).sin().powf(alpha / (1.0 - alpha)) * ((1.0 - alpha) * u).sin()
        / u.sin().powf(1.0 / (1.0 - alpha));
    (a / e).powf((1.0 - alpha) / alpha)
}

/// Finds `ν` such that the marginal end-of-study event probability equals
/// `target`, by bisection on `log ν`.
pub fn calibrate_nu(
    kind: FrailtyKind,
    kendall_tau: f64,
    shape: f64,
    scale: f64,
    target: f64,
    end_of_study: f64,
) -> Result<f64> {
    if !(target > 0.0 && target < 1.0) {
        return Err(Error::NoRoot(format!("event rate {target} is not in (0,1)")));
    }
    let rate = |nu: f64| -> Result<f64> {
        let model = FrailtyModel::new(kind, kendall_tau, WeibullBaseline { shape, scale, level: nu }, end_of_study)?;
        Ok(1.0 - model.marginal_survival(end_of_study))
    };
    let (mut lo, mut hi) = (-60.0f64, 60.0f64);
    if rate(lo.exp())? > target || rate(hi.exp())? < target {
        return Err(Error::NoRoot(format!("event rate {target} unreachable")));
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let r = rate(mid.exp())?;
        if (r - target).abs() < 1e-12 {
            return Ok(mid.exp());
        }
        if r < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok((0.5 * (lo + hi)).exp())
}

/// Expected share of censored relatives in a case-control sample drawn from
/// `model`, computed over a fixed set of frailty draws with Simpson
/// quadrature over the censoring window.
pub fn expected_censoring_fraction(model: &FrailtyModel, frailties: &[f64], controls_per_case: usize) -> f64 {
    let end = model.end_of_study;
    let observed = |w: f64| -> f64 {
        match model.censoring_lower {
            Some(lo) if end - lo > 1e-12 => {
                const N: usize = 64;
                let step = (end - lo) / N as f64;
                let mut acc = 0.0;
                for k in 0..=N {
                    let c = lo + step * k as f64;
                    let f = -(-w * model.baseline.cumulative(c)).exp_m1();
                    let coef = if k == 0 || k == N {
                        1.0
                    } else if k % 2 == 1 {
                        4.0
                    } else {
                        2.0
                    };
                    acc += coef * f;
                }
                acc * step / 3.0 / (end - lo)
            }
            _ => -(-w * model.baseline.cumulative(end)).exp_m1(),
        }
    };
    let (mut e_pi, mut e_pi2) = (0.0, 0.0);
    for &w in frailties {
        let p = observed(w);
        e_pi += p;
        e_pi2 += p * p;
    }
    let m = frailties.len() as f64;
    e_pi /= m;
    e_pi2 /= m;
    let case_rate = e_pi2 / e_pi;
    let control_rate = (e_pi - e_pi2) / (1.0 - e_pi);
    let a = controls_per_case as f64;
    1.0 - (case_rate + a * control_rate) / (1.0 + a)
}

/// Lower end of the uniform interim-censoring window that gives the requested
/// share of censored relatives in the case-control sample.
pub fn calibrate_censoring(model: &FrailtyModel, target: f64, controls_per_case: usize, seed: u64) -> Result<f64> {
    const DRAWS: usize = 20_000;
    let mut rng = stream_rng(derive_seed(seed, 0xC3_5503), 0);
    let frailties: Vec<f64> = (0..DRAWS).map(|_| model.draw_frailty(&mut rng)).collect();
    let fraction = |lo: f64| expected_censoring_fraction(&model.with_censoring_lower(Some(lo)), &frailties, controls_per_case);
    let end = model.end_of_study;
    let (mut lo, mut hi) = (0.0, end);
    let (f_lo, f_hi) = (fraction(lo), fraction(hi));
    if !(target <= f_lo && target >= f_hi) {
        return Err(Error::NoRoot(format!(
            "censoring fraction {target} outside achievable range [{f_hi:.3}, {f_lo:.3}]"
        )));
    }
    // fraction decreases as the window starts later
    while hi - lo > 1e-6 {
        let mid = 0.5 * (lo + hi);
        if fraction(mid) > target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Named design points of the simulation study.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Scenario {
    pub kind: FrailtyKind,
    pub kendall_tau: f64,
    /// Marginal event probability by the end of study.
    pub event_rate: f64,
    /// Target share of censored relatives, `None` for no interim censoring.
    pub censoring_fraction: Option<f64>,
    pub end_of_study: f64,
}

impl Scenario {
    /// 60% event rate with about 60% of relatives censored.
    pub fn high_event_rate(kind: FrailtyKind, kendall_tau: f64) -> Self {
        Self {
            kind,
            kendall_tau,
            event_rate: 0.60,
            censoring_fraction: Some(0.60),
            end_of_study: 110.0,
        }
    }

    /// 15% event rate with about 90% of relatives censored.
    pub fn low_event_rate(kind: FrailtyKind, kendall_tau: f64) -> Self {
        Self {
            kind,
            kendall_tau,
            event_rate: 0.15,
            censoring_fraction: Some(0.90),
            end_of_study: 110.0,
        }
    }

    /// Calibrates `ν` and the censoring window for `controls_per_case`.
    pub fn model(&self, controls_per_case: usize, seed: u64) -> Result<FrailtyModel> {
        let nu = calibrate_nu(self.kind, self.kendall_tau, 4.6, 0.01, self.event_rate, self.end_of_study)?;
        let model = FrailtyModel::new(self.kind, self.kendall_tau, WeibullBaseline::standard(nu), self.end_of_study)?;
        match self.censoring_fraction {
            None => Ok(model),
            Some(target) => {
                let lower = calibrate_censoring(&model, target, controls_per_case, seed)?;
                Ok(model.with_censoring_lower(Some(lower)))
            }
        }
    }
}

/// Case-control sampling design.
#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub model: FrailtyModel,
    pub n1: usize,
    pub controls_per_case: usize,
    pub relatives: usize,
    pub seed: u64,
    /// Maximum number of population families generated before giving up.
    pub max_families: usize,
}

impl SimConfig {
    pub fn new(model: FrailtyModel, n1: usize, controls_per_case: usize, relatives: usize, seed: u64) -> Self {
        Self {
            model,
            n1,
            controls_per_case,
            relatives,
            seed,
            max_families: 50_000_000,
        }
    }
}

/// A simulated sample plus the model's marginal survival on `[0, end]`.
#[derive(Debug, Clone, PartialEq)]
pub struct SimulatedStudy {
    pub dataset: Dataset,
    pub truth_grid: Grid,
    pub true_survival: Vec<f64>,
}

/// Generates population families one stream per family and keeps the first
/// `n1` with a proband event (cases) and the first `a·n1` without (controls).
pub fn simulate_dataset(cfg: &SimConfig) -> Result<SimulatedStudy> {
    if cfg.n1 == 0 || cfg.controls_per_case == 0 || cfg.relatives == 0 {
        return Err(Error::InvalidConfig("n1, controls per case and relatives must be at least 1".into()));
    }
    let model = &cfg.model;
    let n0 = cfg.n1 * cfg.controls_per_case;
    let mut cases = Vec::with_capacity(cfg.n1);
    let mut controls = Vec::with_capacity(n0);
    let mut index = 0u64;
    while cases.len() < cfg.n1 || controls.len() < n0 {
        if index as usize >= cfg.max_families {
            let pool = if cases.len() < cfg.n1 { "case" } else { "control" };
            return Err(Error::PoolExhausted {
                pool,
                budget: cfg.max_families,
            });
        }
        let mut rng = stream_rng(cfg.seed, index);
        index += 1;
        let w = model.draw_frailty(&mut rng);
        let proband = model.observe(w, &mut rng);
        let wanted = if proband.event {
            cases.len() < cfg.n1
        } else {
            controls.len() < n0
        };
        if !wanted {
            continue;
        }
        let relatives: Vec<Observation> = (0..cfg.relatives).map(|_| model.observe(w, &mut rng)).collect();
        if proband.event {
            let id = format!("case{:07}", cases.len() + 1);
            cases.push(FamilyRecord::new(id, proband, relatives));
        } else {
            let id = format!("ctrl{:07}", controls.len() + 1);
            controls.push(FamilyRecord::new(id, proband, relatives));
        }
    }
    cases.extend(controls);
    let dataset = Dataset::from_families(cases)?;
    let truth_grid = Grid::uniform(0.0, model.end_of_study, 1101)?;
    let true_survival = truth_grid.points().iter().map(|&t| model.marginal_survival(t)).collect();
    Ok(SimulatedStudy {
        dataset,
        truth_grid,
        true_survival,
    })
}

/// Latent (uncensored) failure times of a proband and one relative for `n`
/// population families.
pub fn latent_pairs(model: &FrailtyModel, n: usize, seed: u64) -> Vec<(f64, f64)> {
    (0..n as u64)
        .map(|i| {
            let mut rng = stream_rng(seed, i);
            let w = model.draw_frailty(&mut rng);
            (model.draw_failure(w, &mut rng), model.draw_failure(w, &mut rng))
        })
        .collect()
}

/// Kendall's tau of tie-free paired samples in `O(n log n)` (Knight's method).
pub fn kendall_tau(pairs: &[(f64, f64)]) -> f64 {
    let n = pairs.len();
    if n < 2 {
        return f64::NAN;
    }
    let mut sorted = pairs.to_vec();
    sorted.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut ys: Vec<f64> = sorted.iter().map(|p| p.1).collect();
    let mut buf = vec![0.0; n];
    let discordant = count_inversions(&mut ys, &mut buf);
    let total = n as f64 * (n as f64 - 1.0) / 2.0;
    1.0 - 2.0 * discordant as f64 / total
}

fn count_inversions(v: &mut [f64], buf: &mut [f64]) -> u64 {
    let n = v.len();
    if n < 2 {
        return 0;
    }
    let mid = n / 2;
    let mut count = {
        let (left, right) = v.split_at_mut(mid);
        let (bl, br) = buf.split_at_mut(mid);
        count_inversions(left, bl) + count_inversions(right, br)
    };
    let (mut i, mut j, mut k) = (0, mid, 0);
    while i < mid && j < n {
        if v[i] <= v[j] {
            buf[k] = v[i];
            i += 1;
        } else {
            buf[k] = v[j];
            count += (mid - i) as u64;
            j += 1;
        }
        k += 1;
    }
    buf[k..k + mid - i].copy_from_slice(&v[i..mid]);
    k += mid - i;
    buf[k..k + n - j].copy_from_slice(&v[j..n]);
    v.copy_from_slice(&buf[..n]);
    count
}

/// Exact surfaces of `model` on the lattice, with `s` mapped to age through
/// `transform`. `Λ*_q` is differentiated with respect to the transformed
/// position.
pub fn oracle_surfaces(model: &FrailtyModel, s_grid: &Grid, u_grid: &Grid, transform: &TimeTransform) -> ConditionalSurfaces {
    let floor = match model.kind {
        FrailtyKind::Gamma => 0.0,
        FrailtyKind::PositiveStable => 1e-6 * model.end_of_study,
    };
    let mut rows: [Vec<Vec<f64>>; 6] = Default::default();
    for &s in s_grid.points() {
        let t = transform.inverse(s).max(floor);
        let slope = transform.inverse_slope(s);
        let mut r: [Vec<f64>; 6] = Default::default();
        for &u in u_grid.points() {
            let s0 = model.s0(u, t);
            let s1 = model.s1(u, t);
            r[0].push(s0);
            r[1].push(s1);
            r[2].push(-s0.ln());
            r[3].push(-s1.ln());
            r[4].push(model.lambda0_star(u, t) * slope);
            r[5].push(model.lambda1_star(u, t) * slope);
        }
        for (acc, row) in rows.iter_mut().zip(r) {
            acc.push(row);
        }
    }
    let [s0, s1, lam0, lam1, lam0_star, lam1_star] = rows.map(SurfaceMatrix::from_rows);
    ConditionalSurfaces {
        s_grid: s_grid.clone(),
        u_grid: u_grid.clone(),
        s0,
        s1,
        lam0,
        lam1,
        lam0_star,
        lam1_star,
        transform: transform.clone(),
        bandwidth: None,
        diagnostics: SurfaceDiagnostics::default(),
    }
}

/// Outcome of running the marginal pipeline on exact surfaces.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleReport {
    pub max_abs_error: f64,
    pub worst_t: f64,
    pub t_grid: Grid,
    pub lambda_hat: Vec<f64>,
    pub lambda_true: Vec<f64>,
}

/// Feeds exact surfaces through the ψ → λ → Λ pipeline on `[0, end]` and
/// compares with the closed-form marginal cumulative hazard.
pub fn oracle_pipeline_error(model: &FrailtyModel, s_points: usize, u_points: usize, t_points: usize) -> Result<OracleReport> {
    let end = model.end_of_study;
    let transform = TimeTransform::linear(end)?;
    let s_grid = Grid::uniform(0.0, 1.0, s_points)?;
    let u_grid = Grid::uniform(0.0, end, u_points)?;
    let t_grid = Grid::uniform(0.0, end, t_points)?;
    let surf = oracle_surfaces(model, &s_grid, &u_grid, &transform);
    let curve = marginal_from_surfaces(&surf, &t_grid, 0.0)?;
    let lambda_true: Vec<f64> = t_grid.points().iter().map(|&t| model.marginal_cumulative_hazard(t)).collect();
    let (mut worst, mut worst_t) = (0.0f64, 0.0);
    for ((a, b), &t) in curve.lambda_hat.iter().zip(&lambda_true).zip(t_grid.points()) {
        let e = (a - b).abs();
        if e > worst {
            worst = e;
            worst_t = t;
        }
    }
    Ok(OracleReport {
        max_abs_error: worst,
        worst_t,
        t_grid,
        lambda_hat: curve.lambda_hat,
        lambda_true,
    })
}
