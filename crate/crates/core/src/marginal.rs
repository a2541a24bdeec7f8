//! From conditional surfaces to the marginal survival curve.
//!
//! With `ψ(u,s) = (S0−S1)S0 / ∫(S0−S1)²`, the marginal hazard on the
//! transformed scale is `λ(s) = −∫ ψ(u,s) Λ*_0(u|s) du`; its running integral
//! is the cumulative hazard, mapped back to age through the proband-time
//! transform. The result is clamped between the case- and control-relatives'
//! Kaplan-Meier curves.

use crate::error::{Error, Result};
use crate::kernel::FitOptions;
use crate::km::{km_all_relatives, km_relatives};
use crate::surfaces::{default_grids, ConditionalSurfaces, SurfaceBuilder, SurfaceDiagnostics};
use crate::types::{Dataset, Grid, Group, StepSurvival};

/// Grid sizes, degeneracy floors and the output age grid.
#[derive(Debug, Clone, PartialEq)]
pub struct EstimatorConfig {
    pub s_points: usize,
    pub u_points: usize,
    pub t_points: usize,
    pub fit: FitOptions,
    /// Floor on `∫(S0−S1)² dv`.
    pub eps_den: f64,
    /// Fixed output grid; defaults to `t_points` points on `[0, τ0]`.
    pub t_grid: Option<Grid>,
}

impl Default for EstimatorConfig {
    fn default() -> Self {
        Self {
            s_points: 101,
            u_points: 200,
            t_points: 200,
            fit: FitOptions::default(),
            eps_den: 1e-8,
            t_grid: None,
        }
    }
}

/// `ψ̂(·, s)` on the `u` grid at row `s_index`.
pub fn psi_hat(surf: &ConditionalSurfaces, s_index: usize, eps_den: f64) -> Result<Vec<f64>> {
    let s0 = surf.s0.row(s_index);
    let s1 = surf.s1.row(s_index);
    let diff: Vec<f64> = s0.iter().zip(s1).map(|(a, b)| a - b).collect();
    let sq: Vec<f64> = diff.iter().map(|d| d * d).collect();
    let denominator = surf.u_grid.trapezoid(&sq);
    if !(denominator >= eps_den) {
        return Err(Error::DegenerateDependence {
            s: surf.s_grid.points()[s_index],
            denominator,
        });
    }
    Ok(diff.iter().zip(s0).map(|(d, a)| d * a / denominator).collect())
}

/// `λ̂(s)` at row `s_index`, on the transformed proband scale.
pub fn hazard_hat(surf: &ConditionalSurfaces, s_index: usize, eps_den: f64) -> Result<f64> {
    hazard_and_denominator(surf, s_index, eps_den).map(|(h, _)| h)
}

fn hazard_and_denominator(surf: &ConditionalSurfaces, s_index: usize, eps_den: f64) -> Result<(f64, f64)> {
    let psi = psi_hat(surf, s_index, eps_den)?;
    let star = surf.lam0_star.row(s_index);
    let integrand: Vec<f64> = psi.iter().zip(star).map(|(p, l)| p * l).collect();
    let s0 = surf.s0.row(s_index);
    let s1 = surf.s1.row(s_index);
    let sq: Vec<f64> = s0.iter().zip(s1).map(|(a, b)| (a - b) * (a - b)).collect();
    Ok((-surf.u_grid.trapezoid(&integrand), surf.u_grid.trapezoid(&sq)))
}

/// Marginal cumulative hazard implied by a set of surfaces, before bounds.
#[derive(Debug, Clone, PartialEq)]
pub struct MarginalCurve {
    pub t_grid: Grid,
    /// Nondecreasing `Λ̂(t)`, floored at 0.
    pub lambda_hat: Vec<f64>,
    pub s_hat: Vec<f64>,
    /// Raw `λ̂(s)` on the surfaces' `s` grid (may be negative).
    pub hazard: Vec<f64>,
    pub psi_denominator_min: f64,
}

pub fn marginal_from_surfaces(surf: &ConditionalSurfaces, t_grid: &Grid, eps_den: f64) -> Result<MarginalCurve> {
    let n_s = surf.s_grid.len();
    let mut hazard = Vec::with_capacity(n_s);
    let mut den_min = f64::INFINITY;
    for i in 0..n_s {
        let (lam, den) = hazard_and_denominator(surf, i, eps_den)?;
        hazard.push(lam);
        den_min = den_min.min(den);
    }
    let raw = surf.s_grid.cumulative_trapezoid(&hazard);
    let mut running = 0.0f64;
    let cumulative: Vec<f64> = raw
        .iter()
        .map(|&x| {
            running = running.max(x);
            running
        })
        .collect();
    let lambda_hat: Vec<f64> = t_grid
        .points()
        .iter()
        .map(|&t| {
            let s = surf.transform.forward(t);
            surf.s_grid.interpolate(&cumulative, s).max(0.0)
        })
        .collect();
    let s_hat = lambda_hat.iter().map(|l| (-l).exp()).collect();
    Ok(MarginalCurve {
        t_grid: t_grid.clone(),
        lambda_hat,
        s_hat,
        hazard,
        psi_denominator_min: den_min,
    })
}

/// Result of clamping an estimate between the relatives' KM curves.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundedCurve {
    pub values: Vec<f64>,
    pub active_fraction: f64,
    /// Grid points where the case curve lies above the control curve.
    pub crossed: usize,
}

/// Replaces `Ŝ(t)` by the case-relatives KM where it falls below it and by the
/// control-relatives KM where it rises above it. Where the two KM curves
/// cross, the midpoint of the two is used.
pub fn apply_km_bounds(s_hat: &[f64], t_grid: &Grid, km_case: &StepSurvival, km_control: &StepSurvival) -> BoundedCurve {
    let mut active = 0usize;
    let mut crossed = 0usize;
    let values: Vec<f64> = s_hat
        .iter()
        .zip(t_grid.points())
        .map(|(&s, &t)| {
            let lo = km_case.eval(t);
            let hi = km_control.eval(t);
            if lo > hi {
                crossed += 1;
                active += 1;
                0.5 * (lo + hi)
            } else if s <= lo {
                if s < lo {
                    active += 1;
                }
                lo
            } else if s >= hi {
                if s > hi {
                    active += 1;
                }
                hi
            } else {
                s
            }
        })
        .collect();
    BoundedCurve {
        values,
        active_fraction: active as f64 / s_hat.len().max(1) as f64,
        crossed,
    }
}

/// Full output of one estimation run.
#[derive(Debug, Clone, PartialEq)]
pub struct MarginalEstimate {
    pub t_grid: Grid,
    pub bandwidth: f64,
    pub lambda_hat: Vec<f64>,
    pub s_hat: Vec<f64>,
    /// Bounds-modified estimate.
    pub s_tilde: Vec<f64>,
    pub km_case: Vec<f64>,
    pub km_control: Vec<f64>,
    /// Naive KM of all relatives, for comparison.
    pub km_naive: Vec<f64>,
    pub hazard: Vec<f64>,
    pub psi_denominator_min: f64,
    pub bounds_active_fraction: f64,
    pub bounds_crossed: usize,
    pub surface_diagnostics: SurfaceDiagnostics,
}

impl MarginalEstimate {
    /// Linear interpolation of `S̃` at age `t`.
    pub fn s_tilde_at(&self, t: f64) -> f64 {
        self.t_grid.interpolate(&self.s_tilde, t)
    }

    pub fn s_hat_at(&self, t: f64) -> f64 {
        self.t_grid.interpolate(&self.s_hat, t)
    }
}

/// A dataset prepared for repeated estimation at different bandwidths.
#[derive(Debug, Clone)]
pub struct Estimator {
    builder: SurfaceBuilder,
    km_case: StepSurvival,
    km_control: StepSurvival,
    km_naive: StepSurvival,
    s_grid: Grid,
    u_grid: Grid,
    t_grid: Grid,
    config: EstimatorConfig,
}

impl Estimator {
    pub fn new(ds: &Dataset, config: &EstimatorConfig) -> Result<Self> {
        let builder = SurfaceBuilder::new(ds)?;
        let (s_grid, u_grid) = default_grids(ds, config.s_points, config.u_points)?;
        let t_grid = match &config.t_grid {
            Some(g) => g.clone(),
            None => Grid::uniform(0.0, ds.tau0(), config.t_points)?,
        };
        Ok(Self {
            builder,
            km_case: km_relatives(ds, Group::Case)?,
            km_control: km_relatives(ds, Group::Control)?,
            km_naive: km_all_relatives(ds)?,
            s_grid,
            u_grid,
            t_grid,
            config: config.clone(),
        })
    }

    pub fn t_grid(&self) -> &Grid {
        &self.t_grid
    }

    pub fn builder(&self) -> &SurfaceBuilder {
        &self.builder
    }

    pub fn surfaces(&self, h: f64) -> Result<ConditionalSurfaces> {
        self.builder.build(h, &self.s_grid, &self.u_grid, &self.config.fit)
    }

    pub fn estimate(&self, h: f64) -> Result<MarginalEstimate> {
        let surf = self.surfaces(h)?;
        let curve = marginal_from_surfaces(&surf, &self.t_grid, self.config.eps_den)?;
        let bounded = apply_km_bounds(&curve.s_hat, &self.t_grid, &self.km_case, &self.km_control);
        let eval = |km: &StepSurvival| self.t_grid.points().iter().map(|&t| km.eval(t)).collect::<Vec<_>>();
        Ok(MarginalEstimate {
            t_grid: self.t_grid.clone(),
            bandwidth: h,
            lambda_hat: curve.lambda_hat,
            s_hat: curve.s_hat,
            s_tilde: bounded.values,
            km_case: eval(&self.km_case),
            km_control: eval(&self.km_control),
            km_naive: eval(&self.km_naive),
            hazard: curve.hazard,
            psi_denominator_min: curve.psi_denominator_min,
            bounds_active_fraction: bounded.active_fraction,
            bounds_crossed: bounded.crossed,
            surface_diagnostics: surf.diagnostics,
        })
    }
}

/// Grid points where `S̃` leaves `[km_case, km_control]` although the two
/// bounds are ordered there.
pub fn bounds_violations(est: &MarginalEstimate) -> usize {
    est.s_tilde
        .iter()
        .zip(est.km_case.iter().zip(&est.km_control))
        .filter(|(&s, (&lo, &hi))| lo <= hi && (s < lo - 1e-12 || s > hi + 1e-12))
        .count()
}

/// One-shot estimate of the marginal survival curve at bandwidth `h`.
pub fn estimate_marginal(ds: &Dataset, h: f64, config: &EstimatorConfig) -> Result<MarginalEstimate> {
    Estimator::new(ds, config)?.estimate(h)
}
