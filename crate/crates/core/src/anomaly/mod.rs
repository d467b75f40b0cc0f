//! Anomaly detectors: exact discord search (brute force and Hot SAX),
//! Sequitur rule density, Chaos Game histogram divergence, and the k-sigma
//! alarm rule shared by the score-producing detectors.

mod alarm;
mod chaos;
mod density;
mod discord;

use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};

pub use alarm::{threshold_alarms, DEFAULT_K_SIGMA};
pub use chaos::{
    chaos_game_score, chaos_histogram, ChaosHistogram, ChaosParams, DEFAULT_CHAOS_LEVEL,
};
pub use density::{density_to_score, sequitur_density, SequiturModel};
pub use discord::{
    brute_force_discord, hot_sax_discord, DiscordFinder, DiscordResult, SearchStats,
};

use crate::error::{invalid, Result};

/// A per-point score aligned with the input series. Only
/// `valid_from..=valid_to` carries values; the rest is undefined (warm-up or
/// look-ahead).
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreSeries {
    len: usize,
    valid_from: usize,
    values: Vec<f64>,
}

impl ScoreSeries {
    /// Builds a series of total length `len` whose defined values start at
    /// `valid_from`.
    pub fn new(len: usize, valid_from: usize, values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return invalid("score series has an empty valid range");
        }
        if valid_from + values.len() > len {
            return invalid(format!(
                "valid range {}..{} exceeds series length {len}",
                valid_from,
                valid_from + values.len()
            ));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return invalid("scores must be finite inside the valid range");
        }
        Ok(Self {
            len,
            valid_from,
            values,
        })
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn valid_from(&self) -> usize {
        self.valid_from
    }

    pub fn valid_to(&self) -> usize {
        self.valid_from + self.values.len() - 1
    }

    /// Values of the valid range, starting at [`ScoreSeries::valid_from`].
    pub fn valid_values(&self) -> &[f64] {
        &self.values
    }

    pub fn get(&self, index: usize) -> Option<f64> {
        index
            .checked_sub(self.valid_from)
            .and_then(|i| self.values.get(i).copied())
    }

    /// All positions, `None` outside the valid range.
    pub fn to_options(&self) -> Vec<Option<f64>> {
        (0..self.len).map(|i| self.get(i)).collect()
    }

    /// Index of the largest valid score (first one on ties).
    pub fn argmax(&self) -> usize {
        let mut best = 0;
        for (i, &v) in self.values.iter().enumerate() {
            if v > self.values[best] {
                best = i;
            }
        }
        self.valid_from + best
    }

    /// Index of the smallest valid score (first one on ties).
    pub fn argmin(&self) -> usize {
        let mut best = 0;
        for (i, &v) in self.values.iter().enumerate() {
            if v < self.values[best] {
                best = i;
            }
        }
        self.valid_from + best
    }

    /// Narrows the valid range to `from..=to` (intersected with the current one).
    pub fn restrict(&self, from: usize, to: usize) -> Result<Self> {
        let lo = from.max(self.valid_from);
        let hi = to.min(self.valid_to());
        if lo > hi {
            return invalid(format!("restricted range {from}..={to} is empty"));
        }
        Self::new(
            self.len,
            lo,
            self.values[lo - self.valid_from..=hi - self.valid_from].to_vec(),
        )
    }
}

impl Serialize for ScoreSeries {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let mut s = serializer.serialize_struct("ScoreSeries", 3)?;
        s.serialize_field("valid_from", &self.valid_from)?;
        s.serialize_field("valid_to", &self.valid_to())?;
        s.serialize_field("values", &self.to_options())?;
        s.end()
    }
}
