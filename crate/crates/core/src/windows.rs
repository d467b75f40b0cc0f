//! Subsequence distances over all length-`n` windows of a series.

use crate::series::mean_std;
use crate::sax::EPSILON_FLAT;

/// How window distances are measured.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DistanceMode {
    /// Euclidean distance between z-normalized windows (flat windows
    /// normalize to zeros).
    #[default]
    ZNormalized,
    /// Euclidean distance between raw windows.
    Raw,
}

/// Precomputed per-window offsets and scales.
pub(crate) struct WindowSet<'a> {
    values: &'a [f64],
    n: usize,
    offset: Vec<f64>,
    scale: Vec<f64>,
}

impl<'a> WindowSet<'a> {
    pub(crate) fn new(values: &'a [f64], n: usize, mode: DistanceMode) -> Self {
        let count = values.len() + 1 - n;
        let mut offset = Vec::with_capacity(count);
        let mut scale = Vec::with_capacity(count);
        for w in values.windows(n) {
            match mode {
                DistanceMode::Raw => {
                    offset.push(0.0);
                    scale.push(1.0);
                }
                DistanceMode::ZNormalized => {
                    let (m, s) = mean_std(w);
                    if s < EPSILON_FLAT {
                        offset.push(m);
                        scale.push(0.0);
                    } else {
                        offset.push(m);
                        scale.push(1.0 / s);
                    }
                }
            }
        }
        Self {
            values,
            n,
            offset,
            scale,
        }
    }

    /// Number of windows.
    pub(crate) fn len(&self) -> usize {
        self.offset.len()
    }

    /// Squared distance between windows `p` and `q`. Bitwise symmetric in
    /// its arguments.
    #[inline]
    pub(crate) fn dist_sq(&self, p: usize, q: usize) -> f64 {
        let (a, b) = (&self.values[p..p + self.n], &self.values[q..q + self.n]);
        let (ma, sa, mb, sb) = (self.offset[p], self.scale[p], self.offset[q], self.scale[q]);
        a.iter()
            .zip(b)
            .map(|(x, y)| {
                let d = (x - ma) * sa - (y - mb) * sb;
                d * d
            })
            .sum()
    }
}
