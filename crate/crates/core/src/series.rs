use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// An ordered run of finite samples, optionally on a uniform time grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeSeries {
    values: Vec<f64>,
    start_time: Option<f64>,
    step_seconds: Option<f64>,
}

impl TimeSeries {
    /// Builds a series without timestamps. Rejects empty input and
    /// non-finite samples.
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return invalid("time series must contain at least one sample");
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return invalid(format!("sample {i} is not finite ({})", values[i]));
        }
        Ok(Self {
            values,
            start_time: None,
            step_seconds: None,
        })
    }

    /// Attaches a uniform time grid (epoch seconds of the first sample and
    /// the sampling step).
    pub fn with_timestamps(mut self, start_time: f64, step_seconds: f64) -> Result<Self> {
        if !(step_seconds > 0.0 && step_seconds.is_finite()) {
            return invalid(format!("step must be positive, got {step_seconds}"));
        }
        if !start_time.is_finite() {
            return invalid("start time must be finite");
        }
        self.start_time = Some(start_time);
        self.step_seconds = Some(step_seconds);
        Ok(self)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    /// Always false for a constructed series; kept for API symmetry.
    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn start_time(&self) -> Option<f64> {
        self.start_time
    }

    pub fn step_seconds(&self) -> Option<f64> {
        self.step_seconds
    }

    /// Wall-clock time of sample `index`, when the series has a time grid.
    pub fn time_at(&self, index: usize) -> Option<f64> {
        match (self.start_time, self.step_seconds) {
            (Some(t0), Some(dt)) => Some(t0 + dt * index as f64),
            _ => None,
        }
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }
}

impl TryFrom<Vec<f64>> for TimeSeries {
    type Error = crate::Error;

    fn try_from(values: Vec<f64>) -> Result<Self> {
        Self::new(values)
    }
}

impl TryFrom<&[f64]> for TimeSeries {
    type Error = crate::Error;

    fn try_from(values: &[f64]) -> Result<Self> {
        Self::new(values.to_vec())
    }
}

/// Mean and population standard deviation of a slice (two-pass).
pub(crate) fn mean_std(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n;
    (mean, var.sqrt())
}
