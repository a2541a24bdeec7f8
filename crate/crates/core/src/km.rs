//! Product-limit estimation for relatives' survival and censoring curves.

use crate::error::{Error, Result};
use crate::types::{Dataset, Group, Observation, StepSurvival};

/// Observations for a product-limit fit. With `flip_status` the censorings
/// are treated as the events, giving the censoring-time survival curve.
#[derive(Debug, Clone)]
pub struct KmInput {
    pub observations: Vec<Observation>,
    pub flip_status: bool,
}

impl KmInput {
    pub fn events(observations: Vec<Observation>) -> Self {
        Self {
            observations,
            flip_status: false,
        }
    }

    pub fn censoring(observations: Vec<Observation>) -> Self {
        Self {
            observations,
            flip_status: true,
        }
    }
}

/// Kaplan-Meier estimate. At each distinct event time the curve is multiplied
/// by `1 - d/r` with `r` the number whose time is `>=` that time.
pub fn km_estimate(input: &KmInput) -> Result<StepSurvival> {
    if input.observations.is_empty() {
        return Err(Error::EmptyInput);
    }
    let mut obs: Vec<(f64, bool)> = input
        .observations
        .iter()
        .map(|o| (o.time, o.event != input.flip_status))
        .collect();
    obs.sort_by(|a, b| a.0.total_cmp(&b.0));

    let mut at_risk = obs.len();
    let mut surv = 1.0;
    let mut jumps = Vec::new();
    let mut values = Vec::new();
    let mut i = 0;
    while i < obs.len() {
        let t = obs[i].0;
        let mut j = i;
        let mut deaths = 0usize;
        while j < obs.len() && obs[j].0 == t {
            deaths += obs[j].1 as usize;
            j += 1;
        }
        if deaths > 0 {
            surv *= 1.0 - deaths as f64 / at_risk as f64;
            jumps.push(t);
            values.push(surv.max(0.0));
        }
        at_risk -= j - i;
        i = j;
    }
    StepSurvival::new(jumps, values)
}

/// KM of the relatives of families in `group`.
pub fn km_relatives(ds: &Dataset, group: Group) -> Result<StepSurvival> {
    let obs = ds.relatives_in(group);
    if obs.is_empty() {
        return Err(Error::NoRelatives(group.name()));
    }
    km_estimate(&KmInput::events(obs))
}

/// KM of all relatives pooled, ignoring the sampling design.
pub fn km_all_relatives(ds: &Dataset) -> Result<StepSurvival> {
    let obs: Vec<Observation> = ds.families().iter().flat_map(|f| f.relatives.iter().copied()).collect();
    if obs.is_empty() {
        return Err(Error::NoRelatives("pooled"));
    }
    km_estimate(&KmInput::events(obs))
}

/// KM of the relatives' censoring times, pooled over both strata.
pub fn km_censoring(ds: &Dataset) -> Result<StepSurvival> {
    let obs: Vec<Observation> = ds.families().iter().flat_map(|f| f.relatives.iter().copied()).collect();
    if obs.is_empty() {
        return Err(Error::NoRelatives("pooled"));
    }
    km_estimate(&KmInput::censoring(obs))
}
