//! Data model for case-control family survival data, plus the step-curve and
//! grid carriers shared by the estimation stages.

use std::collections::BTreeMap;

use crate::error::{Error, Result};

/// A possibly right-censored age, `time = min(T, C)` with `event = T <= C`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Observation {
    pub time: f64,
    pub event: bool,
}

impl Observation {
    pub fn new(time: f64, event: bool) -> Self {
        Self { time, event }
    }

    pub fn event(time: f64) -> Self {
        Self::new(time, true)
    }

    pub fn censored(time: f64) -> Self {
        Self::new(time, false)
    }

    pub fn status(&self) -> u8 {
        self.event as u8
    }
}

/// Proband status stratum. Cases had the event, controls did not.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Group {
    Control = 0,
    Case = 1,
}

impl Group {
    pub const BOTH: [Group; 2] = [Group::Control, Group::Case];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_event(event: bool) -> Self {
        if event {
            Group::Case
        } else {
            Group::Control
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Group::Control => "control",
            Group::Case => "case",
        }
    }
}

/// One ascertained family: the proband and the relatives whose histories were collected.
#[derive(Debug, Clone, PartialEq)]
pub struct FamilyRecord {
    pub family_id: String,
    pub proband: Observation,
    pub relatives: Vec<Observation>,
}

impl FamilyRecord {
    pub fn new(family_id: impl Into<String>, proband: Observation, relatives: Vec<Observation>) -> Self {
        Self {
            family_id: family_id.into(),
            proband,
            relatives,
        }
    }

    /// The stratum is the proband's event indicator.
    pub fn group(&self) -> Group {
        Group::from_event(self.proband.event)
    }
}

/// Role of a row in the flat input format.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Role {
    Proband,
    Relative,
}

/// One flat input row before validation.
#[derive(Debug, Clone, PartialEq)]
pub struct RawRow {
    pub family_id: String,
    pub role: Role,
    pub time: f64,
    pub status: i64,
}

impl RawRow {
    pub fn new(family_id: impl Into<String>, role: Role, time: f64, status: i64) -> Self {
        Self {
            family_id: family_id.into(),
            role,
            time,
            status,
        }
    }
}

/// Validated case-control family sample. Immutable once built.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    families: Vec<FamilyRecord>,
    n0: usize,
    n1: usize,
    tau0: f64,
    tau: f64,
}

impl Dataset {
    /// Builds a dataset from already-grouped families. Requires at least one
    /// case and one control family.
    pub fn from_families(families: Vec<FamilyRecord>) -> Result<Self> {
        for fam in &families {
            check_time(&fam.family_id, fam.proband.time)?;
            for rel in &fam.relatives {
                check_time(&fam.family_id, rel.time)?;
            }
        }
        let n1 = families.iter().filter(|f| f.proband.event).count();
        let n0 = families.len() - n1;
        if n0 == 0 || n1 == 0 {
            return Err(Error::EmptyDataset { n1, n0 });
        }
        let tau0 = families.iter().map(|f| f.proband.time).fold(0.0, f64::max);
        let tau = families
            .iter()
            .flat_map(|f| f.relatives.iter().map(|r| r.time))
            .fold(0.0, f64::max);
        Ok(Self {
            families,
            n0,
            n1,
            tau0,
            tau,
        })
    }

    pub fn families(&self) -> &[FamilyRecord] {
        &self.families
    }

    pub fn len(&self) -> usize {
        self.families.len()
    }

    pub fn is_empty(&self) -> bool {
        self.families.is_empty()
    }

    /// Number of control families.
    pub fn n0(&self) -> usize {
        self.n0
    }

    /// Number of case families.
    pub fn n1(&self) -> usize {
        self.n1
    }

    pub fn n_in(&self, group: Group) -> usize {
        match group {
            Group::Control => self.n0,
            Group::Case => self.n1,
        }
    }

    /// Largest proband observed time.
    pub fn tau0(&self) -> f64 {
        self.tau0
    }

    /// Largest relative observed time (0 when there are no relatives).
    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn n_relatives(&self) -> usize {
        self.families.iter().map(|f| f.relatives.len()).sum()
    }

    pub fn max_relatives(&self) -> usize {
        self.families.iter().map(|f| f.relatives.len()).max().unwrap_or(0)
    }

    pub fn in_group(&self, group: Group) -> impl Iterator<Item = &FamilyRecord> {
        self.families.iter().filter(move |f| f.group() == group)
    }

    /// Relatives of all families in `group`.
    pub fn relatives_in(&self, group: Group) -> Vec<Observation> {
        self.in_group(group).flat_map(|f| f.relatives.iter().copied()).collect()
    }

    /// Flattens back to rows: proband first, then relatives in stored order.
    pub fn to_rows(&self) -> Vec<RawRow> {
        let mut rows = Vec::with_capacity(self.len() + self.n_relatives());
        for fam in &self.families {
            rows.push(RawRow::new(
                fam.family_id.clone(),
                Role::Proband,
                fam.proband.time,
                fam.proband.status() as i64,
            ));
            for rel in &fam.relatives {
                rows.push(RawRow::new(fam.family_id.clone(), Role::Relative, rel.time, rel.status() as i64));
            }
        }
        rows
    }
}

fn check_time(family_id: &str, time: f64) -> Result<()> {
    if !time.is_finite() {
        return Err(Error::NonFiniteTime(family_id.to_string()));
    }
    if time < 0.0 {
        return Err(Error::NegativeTime {
            family_id: family_id.to_string(),
            time,
        });
    }
    Ok(())
}

/// Validates flat rows into a [`Dataset`]. Families are ordered by
/// `family_id`; relatives keep their row order.
pub fn validate_dataset<I>(rows: I) -> Result<Dataset>
where
    I: IntoIterator<Item = RawRow>,
{
    #[derive(Default)]
    struct Pending {
        proband: Option<Observation>,
        relatives: Vec<Observation>,
    }

    let mut by_id: BTreeMap<String, Pending> = BTreeMap::new();
    for row in rows {
        check_time(&row.family_id, row.time)?;
        let event = match row.status {
            0 => false,
            1 => true,
            status => {
                return Err(Error::InvalidStatus {
                    family_id: row.family_id,
                    status,
                })
            }
        };
        let obs = Observation::new(row.time, event);
        let entry = by_id.entry(row.family_id.clone()).or_default();
        match row.role {
            Role::Proband => {
                if entry.proband.is_some() {
                    return Err(Error::DuplicateProband(row.family_id));
                }
                entry.proband = Some(obs);
            }
            Role::Relative => entry.relatives.push(obs),
        }
    }

    let mut families = Vec::with_capacity(by_id.len());
    for (id, pending) in by_id {
        let proband = pending.proband.ok_or_else(|| Error::MissingProband(id.clone()))?;
        families.push(FamilyRecord::new(id, proband, pending.relatives));
    }
    Dataset::from_families(families)
}

/// Right-continuous, nonincreasing step survival curve with `S(0) = 1`.
///
/// Evaluation before the first jump returns 1; past the last jump it returns
/// the last value.
#[derive(Debug, Clone, PartialEq)]
pub struct StepSurvival {
    jump_times: Vec<f64>,
    values: Vec<f64>,
}

impl StepSurvival {
    /// The constant curve `S = 1`.
    pub fn one() -> Self {
        Self {
            jump_times: Vec::new(),
            values: Vec::new(),
        }
    }

    pub fn new(jump_times: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if jump_times.len() != values.len() {
            return Err(Error::InvalidGrid("jump times and values differ in length".into()));
        }
        if jump_times.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::InvalidGrid("jump times must be strictly increasing".into()));
        }
        let mut prev = 1.0;
        for &v in &values {
            if !(0.0..=1.0).contains(&v) || v > prev {
                return Err(Error::InvalidGrid("survival values must be nonincreasing in [0,1]".into()));
            }
            prev = v;
        }
        Ok(Self { jump_times, values })
    }

    pub fn jump_times(&self) -> &[f64] {
        &self.jump_times
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn eval(&self, t: f64) -> f64 {
        let idx = self.jump_times.partition_point(|&x| x <= t);
        if idx == 0 {
            1.0
        } else {
            self.values[idx - 1]
        }
    }

    /// Smallest jump time at which the curve is at or below `p`, if any.
    pub fn inverse(&self, p: f64) -> Option<f64> {
        let idx = self.values.partition_point(|&v| v > p);
        self.jump_times.get(idx).copied()
    }

    pub fn last_value(&self) -> f64 {
        self.values.last().copied().unwrap_or(1.0)
    }
}

/// Strictly increasing set of abscissae carrying the discretized integrals.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    points: Vec<f64>,
}

impl Grid {
    pub fn new(points: Vec<f64>) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::InvalidGrid("a grid needs at least two points".into()));
        }
        if points.iter().any(|x| !x.is_finite()) || points.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::InvalidGrid("grid points must be finite and strictly increasing".into()));
        }
        Ok(Self { points })
    }

    /// `n` equally spaced points from `lo` to `hi` inclusive.
    pub fn uniform(lo: f64, hi: f64, n: usize) -> Result<Self> {
        if n < 2 || !(hi > lo) {
            return Err(Error::InvalidGrid(format!("cannot build uniform grid on [{lo}, {hi}] with {n} points")));
        }
        let step = (hi - lo) / (n - 1) as f64;
        let mut points: Vec<f64> = (0..n).map(|i| lo + step * i as f64).collect();
        points[n - 1] = hi;
        Self::new(points)
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn lo(&self) -> f64 {
        self.points[0]
    }

    pub fn hi(&self) -> f64 {
        self.points[self.points.len() - 1]
    }

    /// Trapezoid rule for samples of a function on this grid.
    pub fn trapezoid(&self, f: &[f64]) -> f64 {
        debug_assert_eq!(f.len(), self.points.len());
        self.points
            .windows(2)
            .zip(f.windows(2))
            .map(|(x, y)| 0.5 * (x[1] - x[0]) * (y[0] + y[1]))
            .sum()
    }

    /// Running trapezoid integral from the first grid point; output starts at 0.
    pub fn cumulative_trapezoid(&self, f: &[f64]) -> Vec<f64> {
        debug_assert_eq!(f.len(), self.points.len());
        let mut out = Vec::with_capacity(f.len());
        let mut acc = 0.0;
        out.push(acc);
        for (x, y) in self.points.windows(2).zip(f.windows(2)) {
            acc += 0.5 * (x[1] - x[0]) * (y[0] + y[1]);
            out.push(acc);
        }
        out
    }

    /// Piecewise-linear interpolation of `values` at `x`, clamped at the ends.
    pub fn interpolate(&self, values: &[f64], x: f64) -> f64 {
        let (i, w) = self.locate(x);
        if w == 0.0 {
            values[i]
        } else {
            values[i] * (1.0 - w) + values[i + 1] * w
        }
    }

    /// Cell index `i` and weight `w` such that `x = (1-w)·p[i] + w·p[i+1]`,
    /// clamped to the grid.
    pub fn locate(&self, x: f64) -> (usize, f64) {
        let p = &self.points;
        if x <= p[0] {
            return (0, 0.0);
        }
        let last = p.len() - 1;
        if x >= p[last] {
            return (last, 0.0);
        }
        let i = p.partition_point(|&v| v <= x) - 1;
        (i, (x - p[i]) / (p[i + 1] - p[i]))
    }
}
