//! Bootstrap bandwidth selection and percentile-bootstrap confidence bands.
//!
//! Selection resamples relatives' histories from the conditional surfaces fit
//! at a pilot bandwidth (probands kept fixed), re-estimates at each candidate
//! `h`, and scores the candidate by the integrated squared bias against the
//! original-data estimate plus the bootstrap variance.

use rand::Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::km::km_censoring;
use crate::marginal::{bounds_violations, EstimatorConfig, Estimator, MarginalEstimate};
use crate::rng::{derive_seed, stream_rng};
use crate::surfaces::ConditionalSurfaces;
use crate::types::{Dataset, FamilyRecord, Grid, Group, Observation, StepSurvival};

#[derive(Debug, Clone, PartialEq)]
pub struct BandwidthConfig {
    pub stage1_grid: Vec<f64>,
    pub stage2_offsets: Vec<f64>,
    pub b_inner: usize,
    pub pilot_h: f64,
    pub seed: u64,
}

impl Default for BandwidthConfig {
    fn default() -> Self {
        Self {
            stage1_grid: (1..=10).map(|k| k as f64 / 10.0).collect(),
            stage2_offsets: vec![-0.05, 0.0, 0.05],
            b_inner: 30,
            pilot_h: 0.5,
            seed: 0,
        }
    }
}

impl BandwidthConfig {
    pub fn validate(&self) -> Result<()> {
        if self.b_inner < 2 {
            return Err(Error::InvalidConfig("b_inner must be at least 2".into()));
        }
        let ok = |h: f64| h > 0.0 && h <= 1.0;
        if self.stage1_grid.is_empty() || !self.stage1_grid.iter().copied().all(ok) || !ok(self.pilot_h) {
            return Err(Error::InvalidConfig("bandwidths must lie in (0, 1]".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CiConfig {
    pub b_outer: usize,
    pub level: f64,
    pub seed: u64,
    /// Re-run bandwidth selection inside every replication.
    pub reselect: Option<BandwidthConfig>,
}

impl Default for CiConfig {
    fn default() -> Self {
        Self {
            b_outer: 100,
            level: 0.95,
            seed: 0,
            reselect: None,
        }
    }
}

impl CiConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.level > 0.0 && self.level < 1.0) {
            return Err(Error::InvalidConfig(format!("level must lie in (0,1), got {}", self.level)));
        }
        if self.b_outer < 20 {
            return Err(Error::InvalidConfig("b_outer must be at least 20".into()));
        }
        Ok(())
    }
}

/// Draws a synthetic copy of `ds`: probands unchanged, each relative's event
/// time drawn from `Ŝ_{Q_i}(·|x̃_i)` and censoring time from `censor_km`.
pub fn bootstrap_dataset(ds: &Dataset, surf: &ConditionalSurfaces, censor_km: &StepSurvival, seed: u64) -> Dataset {
    let horizon = surf.u_grid.hi();
    let u = surf.u_grid.points();
    let families = ds
        .families()
        .iter()
        .enumerate()
        .map(|(i, fam)| {
            let mut rng = stream_rng(seed, i as u64);
            let group = fam.group();
            let lam = surf.cumulative_hazard_at(group, surf.transform.forward(fam.proband.time));
            let relatives = (0..fam.relatives.len())
                .map(|_| {
                    let target = -(1.0 - rng.random::<f64>()).ln();
                    let k = lam.partition_point(|&l| l < target);
                    let event = u.get(k).copied();
                    let censor = censor_km.inverse(rng.random::<f64>());
                    match (event, censor) {
                        (Some(t), Some(c)) if t <= c => Observation::event(t),
                        (Some(_), Some(c)) | (None, Some(c)) => Observation::censored(c),
                        (Some(t), None) => Observation::event(t),
                        (None, None) => Observation::censored(horizon),
                    }
                })
                .collect();
            FamilyRecord::new(fam.family_id.clone(), fam.proband, relatives)
        })
        .collect();
    Dataset::from_families(families).expect("probands unchanged")
}

/// IMSE score of one candidate bandwidth.
#[derive(Debug, Clone, PartialEq)]
pub struct ImseResult {
    pub h: f64,
    pub imse: f64,
    pub t_grid: Grid,
    /// `Ŝ(t; h)` on the original data, before the bounds modification.
    pub reference: Vec<f64>,
    /// Successful replication curves, ordered by replication index.
    pub replicates: Vec<Vec<f64>>,
    pub failed: usize,
    pub bounds_violations: usize,
}

/// `∫ (S̄ − Ŝ)² + V dt` from stored curves; returns `(imse, mean, variance)`.
pub fn imse_from_curves(t_grid: &Grid, reference: &[f64], replicates: &[Vec<f64>]) -> (f64, Vec<f64>, Vec<f64>) {
    let b = replicates.len() as f64;
    let n = reference.len();
    let mut mean = vec![0.0; n];
    for rep in replicates {
        for (m, x) in mean.iter_mut().zip(rep) {
            *m += x;
        }
    }
    mean.iter_mut().for_each(|m| *m /= b);
    let mut var = vec![0.0; n];
    for rep in replicates {
        for ((v, x), m) in var.iter_mut().zip(rep).zip(&mean) {
            *v += (x - m) * (x - m);
        }
    }
    var.iter_mut().for_each(|v| *v /= b - 1.0);
    let mse: Vec<f64> = reference
        .iter()
        .zip(&mean)
        .zip(&var)
        .map(|((r, m), v)| (m - r) * (m - r) + v)
        .collect();
    (t_grid.trapezoid(&mse), mean, var)
}

/// The original dataset and its pilot-bandwidth bootstrap replicates, prepared
/// for scoring many candidate bandwidths with common random numbers.
pub struct ImseEvaluator {
    original: Estimator,
    replicates: Vec<Estimator>,
    b_inner: usize,
}

impl ImseEvaluator {
    pub fn new(ds: &Dataset, cfg: &BandwidthConfig, est_cfg: &EstimatorConfig) -> Result<Self> {
        cfg.validate()?;
        let original = Estimator::new(ds, est_cfg)?;
        let pilot = original.surfaces(cfg.pilot_h)?;
        let censor = km_censoring(ds)?;
        let rep_cfg = EstimatorConfig {
            t_grid: Some(original.t_grid().clone()),
            ..est_cfg.clone()
        };
        let replicates: Vec<Estimator> = (0..cfg.b_inner as u64)
            .into_par_iter()
            .filter_map(|b| {
                let boot = bootstrap_dataset(ds, &pilot, &censor, derive_seed(cfg.seed, b));
                Estimator::new(&boot, &rep_cfg).ok()
            })
            .collect();
        Ok(Self {
            original,
            replicates,
            b_inner: cfg.b_inner,
        })
    }

    pub fn evaluate(&self, h: f64) -> Result<ImseResult> {
        let reference = self.original.estimate(h)?;
        let estimates: Vec<Option<MarginalEstimate>> =
            self.replicates.par_iter().map(|e| e.estimate(h).ok()).collect();
        let good: Vec<MarginalEstimate> = estimates.into_iter().flatten().collect();
        let failed = self.b_inner - good.len();
        if good.len() < 2 || 2 * good.len() < self.b_inner {
            return Err(Error::SelectionFailed(format!(
                "only {} of {} replications succeeded at h={h}",
                good.len(),
                self.b_inner
            )));
        }
        let violations = bounds_violations(&reference) + good.iter().map(bounds_violations).sum::<usize>();
        let replicates: Vec<Vec<f64>> = good.into_iter().map(|e| e.s_hat).collect();
        let t_grid = reference.t_grid.clone();
        let (imse, _, _) = imse_from_curves(&t_grid, &reference.s_hat, &replicates);
        Ok(ImseResult {
            h,
            imse,
            t_grid,
            reference: reference.s_hat,
            replicates,
            failed,
            bounds_violations: violations,
        })
    }
}

/// Bootstrap IMSE estimate at a single bandwidth `h`.
pub fn imse_est(ds: &Dataset, h: f64, cfg: &BandwidthConfig, est_cfg: &EstimatorConfig) -> Result<ImseResult> {
    ImseEvaluator::new(ds, cfg, est_cfg)?.evaluate(h)
}

#[derive(Debug, Clone, PartialEq)]
pub struct CandidateScore {
    pub h: f64,
    pub imse: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BandwidthSelection {
    pub h: f64,
    pub h1: f64,
    pub stage1: Vec<CandidateScore>,
    pub stage2: Vec<CandidateScore>,
    pub bounds_violations: usize,
}

fn tidy(h: f64) -> f64 {
    (h * 1e9).round() / 1e9
}

fn argmin(scores: &[CandidateScore]) -> Option<f64> {
    let mut best: Option<(f64, f64)> = None;
    for c in scores {
        if let Some(v) = c.imse {
            match best {
                Some((_, bv)) if v >= bv => {}
                _ => best = Some((c.h, v)),
            }
        }
    }
    best.map(|(h, _)| h)
}

/// Two-stage grid search over any scoring function. Ties go to the smaller
/// bandwidth.
pub fn select_two_stage<F>(cfg: &BandwidthConfig, mut score: F) -> Result<BandwidthSelection>
where
    F: FnMut(f64) -> Option<f64>,
{
    let mut cache: Vec<CandidateScore> = Vec::new();
    let mut lookup = |h: f64, cache: &mut Vec<CandidateScore>| -> CandidateScore {
        if let Some(c) = cache.iter().find(|c| c.h == h) {
            return c.clone();
        }
        let c = CandidateScore { h, imse: score(h) };
        cache.push(c.clone());
        c
    };

    let mut stage1_grid: Vec<f64> = cfg.stage1_grid.iter().map(|&h| tidy(h)).collect();
    stage1_grid.sort_by(f64::total_cmp);
    stage1_grid.dedup();
    let stage1: Vec<CandidateScore> = stage1_grid.iter().map(|&h| lookup(h, &mut cache)).collect();
    let h1 = argmin(&stage1).ok_or_else(|| Error::SelectionFailed("every stage-1 candidate failed".into()))?;

    let mut stage2_grid: Vec<f64> = cfg
        .stage2_offsets
        .iter()
        .map(|&d| tidy((h1 + d).min(1.0)))
        .filter(|&h| h > 0.0)
        .collect();
    stage2_grid.sort_by(f64::total_cmp);
    stage2_grid.dedup();
    let stage2: Vec<CandidateScore> = stage2_grid.iter().map(|&h| lookup(h, &mut cache)).collect();
    let h = argmin(&stage2).unwrap_or(h1);
    Ok(BandwidthSelection {
        h,
        h1,
        stage1,
        stage2,
        bounds_violations: 0,
    })
}

/// Bootstrap IMSE bandwidth selection over the two-stage grid.
pub fn select_bandwidth(ds: &Dataset, cfg: &BandwidthConfig, est_cfg: &EstimatorConfig) -> Result<BandwidthSelection> {
    let evaluator = ImseEvaluator::new(ds, cfg, est_cfg)?;
    let mut violations = 0;
    let mut selection = select_two_stage(cfg, |h| match evaluator.evaluate(h) {
        Ok(r) => {
            violations += r.bounds_violations;
            Some(r.imse)
        }
        Err(_) => None,
    })?;
    selection.bounds_violations = violations;
    Ok(selection)
}

/// Type-7 sample quantile of sorted data.
pub fn quantile_type7(sorted: &[f64], p: f64) -> f64 {
    let n = sorted.len();
    if n == 1 {
        return sorted[0];
    }
    let pos = (n - 1) as f64 * p.clamp(0.0, 1.0);
    let lo = pos.floor() as usize;
    let frac = pos - lo as f64;
    if lo + 1 >= n {
        sorted[n - 1]
    } else {
        sorted[lo] + frac * (sorted[lo + 1] - sorted[lo])
    }
}

/// Pointwise percentile-bootstrap band.
#[derive(Debug, Clone, PartialEq)]
pub struct CiBands {
    pub t_grid: Grid,
    pub estimate: Vec<f64>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub level: f64,
    pub succeeded: usize,
    pub attempted: usize,
    pub bounds_violations: usize,
}

/// Resamples families with replacement within the case and control strata.
pub fn resample_families(ds: &Dataset, seed: u64, replicate: u64) -> Result<Dataset> {
    let mut rng = stream_rng(seed, replicate);
    let by_group = |g: Group| ds.families().iter().filter(move |f| f.group() == g).collect::<Vec<_>>();
    let mut families = Vec::with_capacity(ds.len());
    let mut k = 0usize;
    for g in Group::BOTH {
        let pool = by_group(g);
        for _ in 0..pool.len() {
            let fam = pool[rng.random_range(0..pool.len())];
            families.push(FamilyRecord::new(format!("{}#{k}", fam.family_id), fam.proband, fam.relatives.clone()));
            k += 1;
        }
    }
    Dataset::from_families(families)
}

/// Percentile-bootstrap confidence band for `S̃` at bandwidth `h`.
pub fn percentile_ci(
    ds: &Dataset,
    h: f64,
    cfg: &CiConfig,
    est_cfg: &EstimatorConfig,
) -> Result<CiBands> {
    cfg.validate()?;
    let point = Estimator::new(ds, est_cfg)?.estimate(h)?;
    let rep_cfg = EstimatorConfig {
        t_grid: Some(point.t_grid.clone()),
        ..est_cfg.clone()
    };
    let outcomes: Vec<Option<MarginalEstimate>> = (0..cfg.b_outer as u64)
        .into_par_iter()
        .map(|b| {
            let sample = resample_families(ds, cfg.seed, b).ok()?;
            let h_b = match &cfg.reselect {
                Some(bw) => {
                    let bw = BandwidthConfig {
                        seed: derive_seed(bw.seed, b),
                        ..bw.clone()
                    };
                    select_bandwidth(&sample, &bw, &rep_cfg).ok()?.h
                }
                None => h,
            };
            Estimator::new(&sample, &rep_cfg).and_then(|e| e.estimate(h_b)).ok()
        })
        .collect();
    let good: Vec<MarginalEstimate> = outcomes.into_iter().flatten().collect();
    if 5 * good.len() < 4 * cfg.b_outer {
        return Err(Error::CiFailed {
            succeeded: good.len(),
            attempted: cfg.b_outer,
        });
    }
    let violations = bounds_violations(&point) + good.iter().map(bounds_violations).sum::<usize>();
    let alpha = (1.0 - cfg.level) / 2.0;
    let n_t = point.t_grid.len();
    let mut lower = Vec::with_capacity(n_t);
    let mut upper = Vec::with_capacity(n_t);
    let mut column = Vec::with_capacity(good.len());
    for j in 0..n_t {
        column.clear();
        column.extend(good.iter().map(|e| e.s_tilde[j]));
        column.sort_by(f64::total_cmp);
        lower.push(quantile_type7(&column, alpha));
        upper.push(quantile_type7(&column, 1.0 - alpha));
    }
    Ok(CiBands {
        t_grid: point.t_grid.clone(),
        estimate: point.s_tilde,
        lower,
        upper,
        level: cfg.level,
        succeeded: good.len(),
        attempted: cfg.b_outer,
        bounds_violations: violations,
    })
}
