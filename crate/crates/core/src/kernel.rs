//! Triweight kernel and the per-point local linear fit of relatives' hazard
//! increments on proband time.
//!
//! At every distinct relative event time `v` of a stratum, the fit regresses
//! `dN_i(v) / Y_i(v)` on `x_i - s` with weights `Y_i(v) K((x_i - s)/h)`, where
//! `x_i` is the proband's (transformed) time, `Y_i` the relatives of family `i`
//! still at risk and `dN_i` those failing at `v`. The intercept is the increment
//! of the conditional cumulative hazard at `s`; the slope is the increment of
//! its derivative in `s`.

use crate::types::{Dataset, Group};

/// Symmetric kernel supported on `[-1, 1]`.
pub trait Kernel {
    fn eval(&self, u: f64) -> f64;
}

/// `K(u) = (35/32)(1 - u²)³` on `[-1, 1]`.
#[derive(Debug, Clone, Copy, Default)]
pub struct Triweight;

impl Kernel for Triweight {
    #[inline]
    fn eval(&self, u: f64) -> f64 {
        triweight(u)
    }
}

#[inline]
pub fn triweight(u: f64) -> f64 {
    if u.abs() > 1.0 {
        return 0.0;
    }
    let a = 1.0 - u * u;
    35.0 / 32.0 * a * a * a
}

/// `∫_{-1}^{ω} r^k K(r) dr` in closed form (ω clamped to `[-1, 1]`).
pub fn kernel_moment(k: u32, omega: f64) -> f64 {
    let w = omega.clamp(-1.0, 1.0);
    // (1 - r²)³ expanded
    const COEFFS: [f64; 4] = [1.0, -3.0, 3.0, -1.0];
    let mut acc = 0.0;
    for (j, c) in COEFFS.iter().enumerate() {
        let e = k as i32 + 2 * j as i32 + 1;
        let lower = if e % 2 == 0 { 1.0 } else { -1.0 };
        acc += c * (w.powi(e) - lower) / e as f64;
    }
    35.0 / 32.0 * acc
}

/// Degeneracy guards for the local fit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitOptions {
    /// Minimum number of families with positive kernel weight and at least one
    /// relative at risk; below this the event contributes nothing.
    pub k_min: usize,
    /// Floor on the normalized weighted spread `C_q(s, v)`; below it the slope
    /// is set to zero and the intercept reduces to a weighted Nelson-Aalen step.
    pub eps_c: f64,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self { k_min: 5, eps_c: 1e-10 }
    }
}

#[derive(Debug, Clone, Copy)]
struct RelativeEntry {
    time: f64,
    event: bool,
    family: usize,
}

/// One stratum of the data laid out for repeated local fits: proband
/// positions on the smoothing scale and relatives sorted by time.
#[derive(Debug, Clone)]
pub struct GroupDesign {
    group: Group,
    positions: Vec<f64>,
    relatives: Vec<RelativeEntry>,
    event_times: Vec<f64>,
}

impl GroupDesign {
    /// `positions[i]` is the smoothing-scale proband time of `ds.families()[i]`.
    pub fn new(ds: &Dataset, group: Group, positions: &[f64]) -> Self {
        assert_eq!(positions.len(), ds.len());
        let mut local_positions = Vec::new();
        let mut relatives = Vec::new();
        for (fam, &x) in ds.families().iter().zip(positions) {
            if fam.group() != group {
                continue;
            }
            let idx = local_positions.len();
            local_positions.push(x);
            relatives.extend(fam.relatives.iter().map(|r| RelativeEntry {
                time: r.time,
                event: r.event,
                family: idx,
            }));
        }
        relatives.sort_by(|a, b| a.time.total_cmp(&b.time));
        let mut event_times: Vec<f64> = relatives.iter().filter(|r| r.event).map(|r| r.time).collect();
        event_times.dedup();
        Self {
            group,
            positions: local_positions,
            relatives,
            event_times,
        }
    }

    /// Uses raw proband times as positions.
    pub fn untransformed(ds: &Dataset, group: Group) -> Self {
        let positions: Vec<f64> = ds.families().iter().map(|f| f.proband.time).collect();
        Self::new(ds, group, &positions)
    }

    pub fn group(&self) -> Group {
        self.group
    }

    /// `n_q`, the number of families in the stratum.
    pub fn n_families(&self) -> usize {
        self.positions.len()
    }

    pub fn positions(&self) -> &[f64] {
        &self.positions
    }

    /// Distinct relative event times, increasing.
    pub fn event_times(&self) -> &[f64] {
        &self.event_times
    }

    pub fn n_events(&self) -> usize {
        self.relatives.iter().filter(|r| r.event).count()
    }
}

/// Weighted sums entering the fit at one `(s, v)`, normalized by `n_q h`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LocalFitAccumulators {
    /// `𝒴_q(s, v)`.
    pub y_weighted_sum: f64,
    /// `X̄_q(s, v)`, NaN when nothing is at risk in the window.
    pub weighted_mean_x: f64,
    /// `C_q(s, v)`.
    pub weighted_sse: f64,
    /// Families with positive weight and a relative at risk.
    pub effective_count: usize,
    /// `(n_q h)⁻¹ Σ w_i (x_i - X̄)`; zero up to rounding.
    pub orthogonality_residual: f64,
}

impl LocalFitAccumulators {
    /// Direct (non-incremental) evaluation at risk time `v`.
    pub fn compute(design: &GroupDesign, s: f64, h: f64, v: f64) -> Self {
        let n_fam = design.n_families();
        let mut at_risk = vec![0usize; n_fam];
        for r in &design.relatives {
            if r.time >= v {
                at_risk[r.family] += 1;
            }
        }
        let norm = 1.0 / (n_fam as f64 * h);
        let mut a0 = 0.0;
        let mut a1 = 0.0;
        let mut count = 0;
        for (f, &x) in design.positions.iter().enumerate() {
            let w = triweight((x - s) / h) * at_risk[f] as f64;
            if w > 0.0 {
                count += 1;
                a0 += w;
                a1 += w * x;
            }
        }
        let mean = a1 / a0;
        let mut sse = 0.0;
        let mut resid = 0.0;
        for (f, &x) in design.positions.iter().enumerate() {
            let w = triweight((x - s) / h) * at_risk[f] as f64;
            if w > 0.0 {
                sse += w * (x - mean) * (x - mean);
                resid += w * (x - mean);
            }
        }
        Self {
            y_weighted_sum: a0 * norm,
            weighted_mean_x: if a0 > 0.0 { mean } else { f64::NAN },
            weighted_sse: sse * norm,
            effective_count: count,
            orthogonality_residual: resid * norm,
        }
    }
}

/// Hazard increments at each distinct event time of the stratum for one `s`.
#[derive(Debug, Clone, PartialEq)]
pub struct PointFit {
    pub event_times: Vec<f64>,
    /// Increments of the conditional cumulative hazard `Λ_q(·|s)`.
    pub d_lambda: Vec<f64>,
    /// Increments of its `s`-derivative `Λ*_q(·|s)`.
    pub d_lambda_star: Vec<f64>,
    /// Events dropped entirely for lack of families in the window.
    pub skipped_count: usize,
    /// Events whose slope was zeroed because `C_q < eps_c`.
    pub slope_degenerate_count: usize,
}

/// Local linear fit at `s` with bandwidth `h`, sweeping relatives in time order
/// with running risk-set sums.
pub fn local_linear_fit(design: &GroupDesign, s: f64, h: f64, opts: &FitOptions) -> PointFit {
    let n_fam = design.n_families();
    let n_events = design.event_times.len();
    let mut fit = PointFit {
        event_times: design.event_times.clone(),
        d_lambda: vec![0.0; n_events],
        d_lambda_star: vec![0.0; n_events],
        skipped_count: 0,
        slope_degenerate_count: 0,
    };
    if n_events == 0 {
        return fit;
    }
    let norm = 1.0 / (n_fam as f64 * h);

    // centred regressor x - s and kernel weight per family
    let centred: Vec<f64> = design.positions.iter().map(|&x| x - s).collect();
    let weights: Vec<f64> = centred.iter().map(|&x| triweight(x / h)).collect();
    let mut at_risk = vec![0u32; n_fam];
    let (mut a0, mut a1, mut a2) = (0.0, 0.0, 0.0);
    let mut active = 0usize;
    for r in &design.relatives {
        let w = weights[r.family];
        if w > 0.0 {
            let x = centred[r.family];
            a0 += w;
            a1 += w * x;
            a2 += w * x * x;
            if at_risk[r.family] == 0 {
                active += 1;
            }
            at_risk[r.family] += 1;
        }
    }

    let rels = &design.relatives;
    let mut k = 0;
    let mut i = 0;
    while i < rels.len() {
        let t = rels[i].time;
        let mut j = i;
        let mut has_event = false;
        let (mut e0, mut e1) = (0.0, 0.0);
        while j < rels.len() && rels[j].time == t {
            if rels[j].event {
                has_event = true;
                let w = weights[rels[j].family];
                e0 += w;
                e1 += w * centred[rels[j].family];
            }
            j += 1;
        }

        if has_event {
            if active < opts.k_min || a0 <= 0.0 {
                fit.skipped_count += 1;
            } else {
                let mean = a1 / a0;
                let spread = (a2 - a1 * mean).max(0.0);
                let slope = if spread * norm < opts.eps_c {
                    fit.slope_degenerate_count += 1;
                    0.0
                } else {
                    (e1 - mean * e0) / spread
                };
                fit.d_lambda_star[k] = slope;
                fit.d_lambda[k] = e0 / a0 - slope * mean;
            }
            k += 1;
        }

        for r in &rels[i..j] {
            let w = weights[r.family];
            if w > 0.0 {
                let x = centred[r.family];
                a0 -= w;
                a1 -= w * x;
                a2 -= w * x * x;
                at_risk[r.family] -= 1;
                if at_risk[r.family] == 0 {
                    active -= 1;
                }
            }
        }
        if active == 0 {
            a0 = 0.0;
            a1 = 0.0;
            a2 = 0.0;
        }
        i = j;
    }
    debug_assert_eq!(k, n_events);
    fit
}
