//! Proband-time transformation and grid-valued conditional survival surfaces.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::kernel::{local_linear_fit, FitOptions, GroupDesign};
use crate::types::{Dataset, Grid, Group};

/// Monotone piecewise-linear map of proband time onto `[0, 1]`, built from the
/// weighted empirical CDF of proband times (each proband weighted by its
/// number of relatives, at least 1).
#[derive(Debug, Clone, PartialEq)]
pub struct TimeTransform {
    knots: Vec<f64>,
    weights: Vec<f64>,
    // interpolation nodes: (time, level), both strictly increasing
    times: Vec<f64>,
    levels: Vec<f64>,
}

impl TimeTransform {
    pub fn fit(ds: &Dataset) -> Result<Self> {
        let mut pairs: Vec<(f64, f64)> = ds
            .families()
            .iter()
            .map(|f| (f.proband.time, f.relatives.len().max(1) as f64))
            .collect();
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut knots: Vec<f64> = Vec::new();
        let mut weights: Vec<f64> = Vec::new();
        for (t, w) in pairs {
            if knots.last() == Some(&t) {
                *weights.last_mut().unwrap() += w;
            } else {
                knots.push(t);
                weights.push(w);
            }
        }
        if knots.len() < 2 {
            return Err(Error::DegenerateTimes);
        }
        let total: f64 = weights.iter().sum();
        let mut times = Vec::with_capacity(knots.len() + 1);
        let mut levels = Vec::with_capacity(knots.len() + 1);
        if knots[0] > 0.0 {
            times.push(0.0);
            levels.push(0.0);
        }
        let mut acc = 0.0;
        for (&t, &w) in knots.iter().zip(&weights) {
            acc += w;
            times.push(t);
            levels.push(acc / total);
        }
        *levels.last_mut().unwrap() = 1.0;
        Ok(Self {
            knots,
            weights,
            times,
            levels,
        })
    }

    /// The map `t ↦ t / t_max` on `[0, t_max]`.
    pub fn linear(t_max: f64) -> Result<Self> {
        if !(t_max > 0.0) || !t_max.is_finite() {
            return Err(Error::DegenerateTimes);
        }
        Ok(Self {
            knots: vec![0.0, t_max],
            weights: vec![0.0, 1.0],
            times: vec![0.0, t_max],
            levels: vec![0.0, 1.0],
        })
    }

    pub fn knots(&self) -> &[f64] {
        &self.knots
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn max_time(&self) -> f64 {
        *self.times.last().unwrap()
    }

    pub fn forward(&self, t: f64) -> f64 {
        interp(&self.times, &self.levels, t).clamp(0.0, 1.0)
    }

    pub fn inverse(&self, level: f64) -> f64 {
        interp(&self.levels, &self.times, level)
    }

    /// `d t / d level` of the inverse map at `level` (right derivative, left at 1).
    pub fn inverse_slope(&self, level: f64) -> f64 {
        let n = self.levels.len();
        let i = self.levels.partition_point(|&v| v <= level).clamp(1, n - 1);
        (self.times[i] - self.times[i - 1]) / (self.levels[i] - self.levels[i - 1])
    }
}

fn interp(xs: &[f64], ys: &[f64], x: f64) -> f64 {
    let n = xs.len();
    if x <= xs[0] {
        return ys[0];
    }
    if x >= xs[n - 1] {
        return ys[n - 1];
    }
    let i = xs.partition_point(|&v| v <= x);
    let w = (x - xs[i - 1]) / (xs[i] - xs[i - 1]);
    ys[i - 1] + w * (ys[i] - ys[i - 1])
}

/// Row-major matrix with one row per `s` grid point and one column per `u`.
#[derive(Debug, Clone, PartialEq)]
pub struct SurfaceMatrix {
    n_cols: usize,
    data: Vec<f64>,
}

impl SurfaceMatrix {
    pub fn from_rows(rows: Vec<Vec<f64>>) -> Self {
        let n_cols = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(rows.len() * n_cols);
        for r in rows {
            assert_eq!(r.len(), n_cols);
            data.extend(r);
        }
        Self { n_cols, data }
    }

    pub fn n_rows(&self) -> usize {
        if self.n_cols == 0 {
            0
        } else {
            self.data.len() / self.n_cols
        }
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n_cols..(i + 1) * self.n_cols]
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n_cols + j]
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self {
            n_cols: self.n_cols,
            data: self.data.iter().map(|&x| f(x)).collect(),
        }
    }

    pub fn values(&self) -> &[f64] {
        &self.data
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct SurfaceDiagnostics {
    /// Distinct event times per stratum (indexed by `Group::index`).
    pub event_times: [usize; 2],
    /// Skipped events summed over the `s` grid.
    pub skipped: [usize; 2],
    pub slope_degenerate: [usize; 2],
}

/// Estimated (or exact) `S_q(u|s)`, `Λ_q(u|s)` and `Λ*_q(u|s)` on a `(s, u)`
/// lattice, `s` on the transformed proband scale.
#[derive(Debug, Clone, PartialEq)]
pub struct ConditionalSurfaces {
    pub s_grid: Grid,
    pub u_grid: Grid,
    pub s0: SurfaceMatrix,
    pub s1: SurfaceMatrix,
    pub lam0: SurfaceMatrix,
    pub lam1: SurfaceMatrix,
    pub lam0_star: SurfaceMatrix,
    pub lam1_star: SurfaceMatrix,
    pub transform: TimeTransform,
    /// `None` for surfaces that were not smoothed from data.
    pub bandwidth: Option<f64>,
    pub diagnostics: SurfaceDiagnostics,
}

impl ConditionalSurfaces {
    pub fn survival(&self, group: Group) -> &SurfaceMatrix {
        match group {
            Group::Control => &self.s0,
            Group::Case => &self.s1,
        }
    }

    pub fn cumulative_hazard(&self, group: Group) -> &SurfaceMatrix {
        match group {
            Group::Control => &self.lam0,
            Group::Case => &self.lam1,
        }
    }

    /// `Λ_q(·|s)` on the `u` grid at an arbitrary transformed position `s`,
    /// linearly interpolated between `s` rows.
    pub fn cumulative_hazard_at(&self, group: Group, s: f64) -> Vec<f64> {
        let lam = self.cumulative_hazard(group);
        let (i, w) = self.s_grid.locate(s);
        if w == 0.0 {
            return lam.row(i).to_vec();
        }
        lam.row(i)
            .iter()
            .zip(lam.row(i + 1))
            .map(|(a, b)| a * (1.0 - w) + b * w)
            .collect()
    }
}

/// Holds the transform and stratum designs of one dataset so surfaces can be
/// rebuilt at several bandwidths.
#[derive(Debug, Clone)]
pub struct SurfaceBuilder {
    transform: TimeTransform,
    designs: [GroupDesign; 2],
}

impl SurfaceBuilder {
    pub fn new(ds: &Dataset) -> Result<Self> {
        let transform = TimeTransform::fit(ds)?;
        Ok(Self::with_transform(ds, transform))
    }

    pub fn with_transform(ds: &Dataset, transform: TimeTransform) -> Self {
        let positions: Vec<f64> = ds.families().iter().map(|f| transform.forward(f.proband.time)).collect();
        let designs = [
            GroupDesign::new(ds, Group::Control, &positions),
            GroupDesign::new(ds, Group::Case, &positions),
        ];
        Self { transform, designs }
    }

    pub fn transform(&self) -> &TimeTransform {
        &self.transform
    }

    pub fn design(&self, group: Group) -> &GroupDesign {
        &self.designs[group.index()]
    }

    pub fn build(&self, h: f64, s_grid: &Grid, u_grid: &Grid, opts: &FitOptions) -> Result<ConditionalSurfaces> {
        if !(h > 0.0) || !h.is_finite() {
            return Err(Error::InvalidConfig(format!("bandwidth must be positive, got {h}")));
        }
        let u = u_grid.points();
        let rows: Vec<RowFit> = s_grid
            .points()
            .par_iter()
            .map(|&s| {
                let mut row = RowFit::default();
                for q in Group::BOTH {
                    let fit = local_linear_fit(&self.designs[q.index()], s, h, opts);
                    let (lam, lam_star) = accumulate_on_grid(&fit.event_times, &fit.d_lambda, &fit.d_lambda_star, u);
                    row.lam[q.index()] = lam;
                    row.lam_star[q.index()] = lam_star;
                    row.skipped[q.index()] = fit.skipped_count;
                    row.slope_degenerate[q.index()] = fit.slope_degenerate_count;
                }
                row
            })
            .collect();

        let mut diagnostics = SurfaceDiagnostics::default();
        for q in Group::BOTH {
            let qi = q.index();
            diagnostics.event_times[qi] = self.designs[qi].event_times().len();
            diagnostics.skipped[qi] = rows.iter().map(|r| r.skipped[qi]).sum();
            diagnostics.slope_degenerate[qi] = rows.iter().map(|r| r.slope_degenerate[qi]).sum();
            let possible = diagnostics.event_times[qi] * rows.len();
            if possible > 0 && diagnostics.skipped[qi] == possible {
                return Err(Error::InsufficientData(qi as u8));
            }
        }

        let mut lam = [Vec::with_capacity(rows.len()), Vec::with_capacity(rows.len())];
        let mut lam_star = [Vec::with_capacity(rows.len()), Vec::with_capacity(rows.len())];
        for row in rows {
            let RowFit { lam: l, lam_star: ls, .. } = row;
            let [l0, l1] = l;
            let [ls0, ls1] = ls;
            lam[0].push(l0);
            lam[1].push(l1);
            lam_star[0].push(ls0);
            lam_star[1].push(ls1);
        }
        let [lam0, lam1] = lam.map(SurfaceMatrix::from_rows);
        let [lam0_star, lam1_star] = lam_star.map(SurfaceMatrix::from_rows);
        let s0 = lam0.map(|x| (-x).exp());
        let s1 = lam1.map(|x| (-x).exp());
        Ok(ConditionalSurfaces {
            s_grid: s_grid.clone(),
            u_grid: u_grid.clone(),
            s0,
            s1,
            lam0,
            lam1,
            lam0_star,
            lam1_star,
            transform: self.transform.clone(),
            bandwidth: Some(h),
            diagnostics,
        })
    }
}

#[derive(Default)]
struct RowFit {
    lam: [Vec<f64>; 2],
    lam_star: [Vec<f64>; 2],
    skipped: [usize; 2],
    slope_degenerate: [usize; 2],
}

/// Step sums of increments evaluated on `u`. The cumulative hazard is made
/// nondecreasing (running maximum from 0); the derivative is left as is.
fn accumulate_on_grid(times: &[f64], d_lam: &[f64], d_star: &[f64], u: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let mut lam = Vec::with_capacity(u.len());
    let mut star = Vec::with_capacity(u.len());
    let mut k = 0;
    let (mut raw, mut monotone, mut acc_star) = (0.0f64, 0.0f64, 0.0f64);
    for &x in u {
        while k < times.len() && times[k] <= x {
            raw += d_lam[k];
            acc_star += d_star[k];
            monotone = monotone.max(raw);
            k += 1;
        }
        lam.push(monotone);
        star.push(acc_star);
    }
    (lam, star)
}

/// Default grids: `s_points` on `[0, 1]` and `u_points` on `[0, τ]`.
pub fn default_grids(ds: &Dataset, s_points: usize, u_points: usize) -> Result<(Grid, Grid)> {
    let tau = ds.tau();
    if !(tau > 0.0) {
        return Err(Error::InvalidGrid("relatives' maximum observed time is zero".into()));
    }
    Ok((Grid::uniform(0.0, 1.0, s_points)?, Grid::uniform(0.0, tau, u_points)?))
}

/// Fits the transform and the local linear surfaces at bandwidth `h`.
pub fn build_conditional_surfaces(
    ds: &Dataset,
    h: f64,
    s_grid: &Grid,
    u_grid: &Grid,
    opts: &FitOptions,
) -> Result<ConditionalSurfaces> {
    SurfaceBuilder::new(ds)?.build(h, s_grid, u_grid, opts)
}
