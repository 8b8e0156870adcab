//! Goodness of reproduction and Boltzmann-Shannon entropy of basis
//! populations.

use serde::Serialize;

use crate::dynamics::{Pulse, TimeSeries};
use crate::error::{Error, Result};

const SUM_TOL: f64 = 1e-6;

/// `-sum p ln p` with `0 ln 0 = 0`, no validation.
pub(crate) fn shannon(p: &[f64]) -> f64 {
    -p.iter().filter(|&&x| x > 0.0).map(|&x| x * x.ln()).sum::<f64>()
}

/// L1 distance between two population vectors. Ranges over `[0, 2]`.
pub fn goodness(ideal: &[f64], real: &[f64]) -> Result<f64> {
    if ideal.len() != real.len() {
        return Err(Error::Shape { expected: ideal.len(), got: real.len() });
    }
    for (name, p) in [("ideal", ideal), ("real", real)] {
        let total: f64 = p.iter().sum();
        if (total - 1.0).abs() > SUM_TOL {
            return Err(Error::InvalidDistribution(format!("{name} populations sum to {total}")));
        }
    }
    Ok(ideal.iter().zip(real).map(|(a, b)| (a - b).abs()).sum())
}

/// Boltzmann-Shannon entropy of a population vector.
pub fn entropy(p: &[f64]) -> Result<f64> {
    for &x in p {
        if x.is_nan() || x < 0.0 {
            return Err(Error::InvalidDistribution(format!("negative entry {x}")));
        }
        if x > 1.0 + SUM_TOL {
            return Err(Error::InvalidDistribution(format!("entry {x} exceeds 1")));
        }
    }
    Ok(shannon(p))
}

/// Trapezoidal time average of `S(tau)` over the recorded window.
pub fn mean_entropy(series: &TimeSeries) -> Result<f64> {
    time_average(&series.taus, &series.entropy)
}

/// Trapezoidal `(1/T) int y dtau` over samples at increasing `taus`.
pub fn time_average(taus: &[f64], values: &[f64]) -> Result<f64> {
    if taus.len() < 2 || taus.len() != values.len() {
        return Err(Error::InvalidDistribution(format!(
            "time average needs at least 2 aligned samples, got {}",
            taus.len()
        )));
    }
    if taus.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidDistribution("sample times must increase".into()));
    }
    let area: f64 = taus
        .windows(2)
        .zip(values.windows(2))
        .map(|(t, v)| 0.5 * (t[1] - t[0]) * (v[0] + v[1]))
        .sum();
    Ok(area / (taus[taus.len() - 1] - taus[0]))
}

/// Outcome of one run.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunSummary {
    /// `None` when the run has no ideal target.
    pub goodness: Option<f64>,
    pub final_populations: Vec<f64>,
    pub mean_entropy: f64,
    pub max_entropy_bound: f64,
    pub norm_drift: f64,
    pub step: f64,
    pub pulses: Vec<Pulse>,
    pub sample_stride: usize,
}

impl RunSummary {
    /// Collects the summary of a finished run. `goodness` is left empty when
    /// there is no ideal target or the final populations have drifted too
    /// far from unit sum to be scored.
    pub fn from_run(
        n: usize,
        final_populations: Vec<f64>,
        series: &TimeSeries,
        ideal: Option<&[f64]>,
        step: f64,
        pulses: Vec<Pulse>,
        sample_stride: usize,
    ) -> Result<Self> {
        let goodness = match ideal.map(|p| goodness(p, &final_populations)) {
            None => None,
            Some(Ok(g)) => Some(g),
            Some(Err(Error::InvalidDistribution(msg))) => {
                log::warn!("goodness not computed: {msg}");
                None
            }
            Some(Err(e)) => return Err(e),
        };
        Ok(RunSummary {
            goodness,
            mean_entropy: mean_entropy(series)?,
            max_entropy_bound: n as f64 * std::f64::consts::LN_2,
            norm_drift: series.norm_drift(),
            final_populations,
            step,
            pulses,
            sample_stride,
        })
    }
}
