use crate::error::{Error, Result};
use crate::qmat::DensityMatrix;

/// States on an ascending time grid. Every engine returns one of these.
#[derive(Debug, Clone, PartialEq)]
pub struct StateSeries {
    times: Vec<f64>,
    states: Vec<DensityMatrix>,
}

impl StateSeries {
    pub fn new(times: Vec<f64>, states: Vec<DensityMatrix>) -> Result<Self> {
        if times.len() != states.len() {
            return Err(Error::Dimension(format!(
                "{} times but {} states",
                times.len(),
                states.len()
            )));
        }
        check_time_grid(&times)?;
        if let Some(first) = states.first() {
            if states.iter().any(|s| s.dim() != first.dim()) {
                return Err(Error::Dimension(
                    "states in a series must share one dimension".into(),
                ));
            }
        }
        Ok(StateSeries { times, states })
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn states(&self) -> &[DensityMatrix] {
        &self.states
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (f64, &DensityMatrix)> {
        self.times.iter().copied().zip(self.states.iter())
    }

    /// Keeps every `stride`-th entry starting from the first.
    pub fn subsample(&self, stride: usize) -> StateSeries {
        let stride = stride.max(1);
        StateSeries {
            times: self.times.iter().copied().step_by(stride).collect(),
            states: self.states.iter().cloned().step_by(stride).collect(),
        }
    }
}

/// Non-empty, finite, non-negative and strictly increasing.
pub fn check_time_grid(times: &[f64]) -> Result<()> {
    if times.is_empty() {
        return Err(Error::param("output_times", "time grid is empty"));
    }
    if times.iter().any(|t| !t.is_finite() || *t < 0.0) {
        return Err(Error::param(
            "output_times",
            "times must be finite and non-negative",
        ));
    }
    if times.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::param(
            "output_times",
            "times must be strictly increasing",
        ));
    }
    Ok(())
}

/// `t_k = k * t_max / (points - 1)` for `k = 0..points`.
pub fn uniform_grid(t_max: f64, points: usize) -> Vec<f64> {
    match points {
        0 => Vec::new(),
        1 => vec![0.0],
        _ => (0..points)
            .map(|k| k as f64 * t_max / (points - 1) as f64)
            .collect(),
    }
}
