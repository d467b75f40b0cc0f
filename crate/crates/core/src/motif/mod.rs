//! Motif discovery: exact closest pairs, grammar rules mapped back to the
//! series, Motif Tracking, correlation clustering of SAX words and
//! multiscale description-length motifs.

mod approximate;
mod closest_pair;
mod grammar_motifs;
mod kmeans;
mod mdl;
mod postprocess;
mod tracking;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

pub use approximate::{approximate_motifs, pearson};
pub use closest_pair::{brute_force_closest_pair, mk_motif, PairSearch, PairStats};
pub use grammar_motifs::{grammar_motifs, grammar_motifs_from_model};
pub use kmeans::kmeans;
pub use mdl::{mdl_motifs, segment, smooth, MdlMotif, MdlParams, SegmentCode};
pub use postprocess::post_process_motifs;
pub use tracking::{motif_tracking, motif_tracking_with, Tracker, TrackingParams};

/// Which algorithm produced a motif.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MotifSource {
    BruteForce,
    Mk,
    GrammarMotif,
    Tracking,
    ApproxMotif,
    Mdl,
}

/// A repeated pattern: where it starts and how many points it spans.
///
/// The meaning of `score` depends on the source: pair distance for
/// closest-pair search, rule height for grammar motifs, occurrence count for
/// Motif Tracking, cluster size for approximate motifs, and relative
/// description-length gain for MDL motifs.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Motif {
    occurrences: Vec<usize>,
    length: usize,
    source: MotifSource,
    score: f64,
}

impl Motif {
    /// Sorts and deduplicates `occurrences`.
    pub fn new(mut occurrences: Vec<usize>, length: usize, source: MotifSource, score: f64) -> Result<Self> {
        if occurrences.is_empty() {
            return invalid("a motif needs at least one occurrence");
        }
        if length < 2 {
            return invalid(format!("motif length must be at least 2, got {length}"));
        }
        occurrences.sort_unstable();
        occurrences.dedup();
        Ok(Self {
            occurrences,
            length,
            source,
            score,
        })
    }

    pub fn occurrences(&self) -> &[usize] {
        &self.occurrences
    }

    /// Points per occurrence.
    pub fn length(&self) -> usize {
        self.length
    }

    pub fn source(&self) -> MotifSource {
        self.source
    }

    pub fn score(&self) -> f64 {
        self.score
    }

    pub fn count(&self) -> usize {
        self.occurrences.len()
    }
}
