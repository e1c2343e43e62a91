use serde::Serialize;

use crate::{Error, Result};

/// Fewest interface samples a deviation is computed from.
pub const MIN_SAMPLES: usize = 8;

/// A fine-grid deviation at least this fraction of the coarse one counts as persistent.
pub const PERSISTENCE_FRACTION: f64 = 0.5;

/// Weighted mean and (population) standard deviation; weights need not be normalized.
pub fn weighted_mean_std(values: &[f64], weights: &[f64]) -> (f64, f64) {
    let total: f64 = weights.iter().sum();
    if values.is_empty() || total <= 0.0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = values.iter().zip(weights).map(|(v, w)| v * w).sum::<f64>() / total;
    let var = values.iter().zip(weights).map(|(v, w)| w * (v - mean).powi(2)).sum::<f64>() / total;
    (mean, var.max(0.0).sqrt())
}

/// Spread of the interface values at one time level (or of `a*` samples).
#[derive(Clone, Copy, Debug, Serialize)]
pub struct RowDeviation {
    /// `None` for elliptic (time-independent) data.
    pub time: Option<f64>,
    pub mean: f64,
    /// `max − min` over samples.
    pub range: f64,
    /// Arclength-weighted standard deviation.
    pub std: f64,
}

/// How far interface values are from being constant, per row and overall.
#[derive(Clone, Debug, Serialize)]
pub struct DeviationReport {
    pub rows: Vec<RowDeviation>,
    pub max_range: f64,
    pub max_std: f64,
}

impl DeviationReport {
    /// The row whose time is closest to `t` (the only row for elliptic data).
    pub fn at_time(&self, t: f64) -> &RowDeviation {
        self.rows
            .iter()
            .min_by(|a, b| {
                let da = a.time.map_or(0.0, |s| (s - t).abs());
                let db = b.time.map_or(0.0, |s| (s - t).abs());
                da.total_cmp(&db)
            })
            .expect("deviation report has at least one row")
    }
}

/// Deviation of interface values from constancy, row by row.
///
/// `traces[k][m]` is the value at sample `m` on row `k`; `times` (if given)
/// labels the rows; `weights` are the arclength weights of the samples.
pub fn isothermic_deviation(traces: &[Vec<f64>], times: Option<&[f64]>, weights: &[f64]) -> Result<DeviationReport> {
    if traces.is_empty() {
        return Err(Error::InvalidScenario("deviation needs at least one row".into()));
    }
    if weights.len() < MIN_SAMPLES {
        return Err(Error::InvalidScenario(format!(
            "deviation needs at least {MIN_SAMPLES} samples, got {}",
            weights.len()
        )));
    }
    if let Some(t) = times {
        if t.len() != traces.len() {
            return Err(Error::InvalidScenario("one time per trace row is required".into()));
        }
    }
    let mut rows = Vec::with_capacity(traces.len());
    for (k, row) in traces.iter().enumerate() {
        if row.len() != weights.len() {
            return Err(Error::InvalidScenario(format!(
                "row {k} has {} values for {} weights",
                row.len(),
                weights.len()
            )));
        }
        let (mean, std) = weighted_mean_std(row, weights);
        let max = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let min = row.iter().copied().fold(f64::INFINITY, f64::min);
        rows.push(RowDeviation { time: times.map(|t| t[k]), mean, range: max - min, std });
    }
    let max_range = rows.iter().map(|r| r.range).fold(0.0, f64::max);
    let max_std = rows.iter().map(|r| r.std).fold(0.0, f64::max);
    Ok(DeviationReport { rows, max_range, max_std })
}

/// Deviation of elliptic interface values `v(x)`, `x ∈ ∂Ω`, from their mean `a*`.
pub fn elliptic_deviation(a_star_samples: &[f64], weights: &[f64]) -> Result<DeviationReport> {
    isothermic_deviation(&[a_star_samples.to_vec()], None, weights)
}

/// A deviation measured at two resolutions (`h` and `h/2`).
#[derive(Clone, Copy, Debug, Serialize)]
pub struct Persistence {
    pub coarse: f64,
    pub fine: f64,
    /// `coarse / fine`: the shrink factor per refinement.
    pub ratio: f64,
    /// `fine ≥ 0.5·coarse` and the deviation is not zero.
    pub persistent: bool,
}

pub fn persistence(coarse: f64, fine: f64) -> Persistence {
    Persistence { coarse, fine, ratio: coarse / fine, persistent: fine > 0.0 && fine >= PERSISTENCE_FRACTION * coarse }
}
