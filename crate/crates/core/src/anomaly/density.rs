use crate::error::Result;
use crate::grammar::{infer_grammar, Grammar};
use crate::sax::{sax_sliding, SaxConfig, SaxSequence, SaxWord};
use crate::series::TimeSeries;

use super::ScoreSeries;

/// SAX words of a series compressed by Sequitur, with each word's depth in
/// the grammar.
///
/// With `collapse_runs`, consecutive identical words become one token before
/// inference, and every word of a run inherits the depth of its token.
#[derive(Debug, Clone)]
pub struct SequiturModel {
    sax: SaxSequence,
    vocabulary: Vec<SaxWord>,
    tokens: Vec<u32>,
    token_starts: Vec<usize>,
    grammar: Grammar,
    word_depths: Vec<u32>,
    series_len: usize,
}

impl SequiturModel {
    pub fn build(series: &TimeSeries, cfg: &SaxConfig, collapse_runs: bool) -> Result<Self> {
        let sax = sax_sliding(series, cfg)?;
        let (ids, vocabulary) = sax.intern();
        let (tokens, token_starts) = if collapse_runs {
            let mut tokens = Vec::new();
            let mut starts = Vec::new();
            for (i, &id) in ids.iter().enumerate() {
                if tokens.last() != Some(&id) {
                    tokens.push(id);
                    starts.push(i);
                }
            }
            (tokens, starts)
        } else {
            let starts = (0..ids.len()).collect();
            (ids, starts)
        };
        let grammar = infer_grammar(&tokens)?;
        let token_depths: Vec<u32> = grammar.unwrap()?.iter().map(|u| u.depth).collect();
        let mut word_depths = vec![0; sax.len()];
        for (t, &d) in token_depths.iter().enumerate() {
            let end = token_starts.get(t + 1).copied().unwrap_or(sax.len());
            word_depths[token_starts[t]..end].fill(d);
        }
        Ok(Self {
            sax,
            vocabulary,
            tokens,
            token_starts,
            grammar,
            word_depths,
            series_len: series.len(),
        })
    }

    pub fn sax(&self) -> &SaxSequence {
        &self.sax
    }

    pub fn config(&self) -> &SaxConfig {
        self.sax.config()
    }

    pub fn grammar(&self) -> &Grammar {
        &self.grammar
    }

    /// Distinct words, indexed by terminal id.
    pub fn vocabulary(&self) -> &[SaxWord] {
        &self.vocabulary
    }

    /// The terminal stream the grammar was inferred from.
    pub fn tokens(&self) -> &[u32] {
        &self.tokens
    }

    /// Window start of each token (identity unless runs were collapsed).
    pub fn token_starts(&self) -> &[usize] {
        &self.token_starts
    }

    /// Window start one past the last window represented by token `t`.
    pub fn token_end(&self, t: usize) -> usize {
        self.token_starts
            .get(t + 1)
            .copied()
            .unwrap_or(self.sax.len())
    }

    /// Grammar depth of the word at every window start.
    pub fn word_depths(&self) -> &[u32] {
        &self.word_depths
    }

    /// Rule density per point: the sum of depths of all words whose window
    /// covers the point.
    pub fn density(&self) -> ScoreSeries {
        let w = self.config().window_size;
        let mut prefix = Vec::with_capacity(self.word_depths.len() + 1);
        prefix.push(0u64);
        for &d in &self.word_depths {
            prefix.push(prefix.last().unwrap() + u64::from(d));
        }
        let m = self.word_depths.len();
        let values = (0..self.series_len)
            .map(|i| {
                let lo = (i + 1).saturating_sub(w);
                let hi = (i + 1).min(m);
                (prefix[hi] - prefix[lo]) as f64
            })
            .collect();
        ScoreSeries::new(self.series_len, 0, values).expect("density covers the series")
    }
}

/// Rule-density profile of a series. Low density marks regions the grammar
/// could not compress.
pub fn sequitur_density(series: &TimeSeries, cfg: &SaxConfig) -> Result<ScoreSeries> {
    Ok(SequiturModel::build(series, cfg, false)?.density())
}

/// Turns a density into an anomaly score: `max(d) - d`.
pub fn density_to_score(density: &ScoreSeries) -> ScoreSeries {
    let values = density.valid_values();
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    ScoreSeries::new(
        density.len(),
        density.valid_from(),
        values.iter().map(|d| max - d).collect(),
    )
    .expect("same shape as the input")
}
