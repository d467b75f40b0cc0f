//! The SAX representation: z-normalization, piecewise aggregation,
//! equiprobable Gaussian quantization and sliding-window encoding.
//!
//! Every window is z-normalized on its own before it is aggregated, so a word
//! describes the *shape* of the window, not its level or scale. Windows whose
//! standard deviation falls below [`EPSILON_FLAT`] are encoded as the
//! all-middle word instead of being divided by (almost) zero.

pub mod normal;
mod word;

use serde::{Deserialize, Serialize};

pub use word::SaxWord;

use crate::error::{invalid, Result};
use crate::series::{mean_std, TimeSeries};

/// Standard deviation below which a window is considered flat.
pub const EPSILON_FLAT: f64 = 1e-8;

/// Alphabet size, symbols per word and window length of a sliding encoding.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SaxConfig {
    pub alpha: usize,
    pub word_size: usize,
    pub window_size: usize,
}

impl SaxConfig {
    pub fn new(alpha: usize, word_size: usize, window_size: usize) -> Result<Self> {
        let cfg = Self {
            alpha,
            word_size,
            window_size,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(2..=26).contains(&self.alpha) {
            return invalid(format!("alpha must be in 2..=26, got {}", self.alpha));
        }
        if self.word_size == 0 {
            return invalid("word size must be at least 1");
        }
        if self.window_size < self.word_size {
            return invalid(format!(
                "window size {} is smaller than word size {}",
                self.window_size, self.word_size
            ));
        }
        if self.window_size % self.word_size != 0 {
            return invalid(format!(
                "window size {} is not a multiple of word size {}",
                self.window_size, self.word_size
            ));
        }
        Ok(())
    }

    /// Points averaged into each symbol.
    pub fn points_per_symbol(&self) -> usize {
        self.window_size / self.word_size
    }
}

impl Default for SaxConfig {
    fn default() -> Self {
        Self {
            alpha: 3,
            word_size: 8,
            window_size: 64,
        }
    }
}

/// The `alpha - 1` cuts splitting the standard normal into equiprobable bins.
#[derive(Debug, Clone, PartialEq)]
pub struct Breakpoints {
    cuts: Vec<f64>,
}

impl Breakpoints {
    /// Cuts at the `i / alpha` quantiles, `i = 1..alpha`.
    ///
    /// The lower half is computed and mirrored so the cuts are exactly
    /// symmetric about zero.
    pub fn gaussian(alpha: usize) -> Result<Self> {
        if alpha < 2 {
            return invalid(format!("alpha must be at least 2, got {alpha}"));
        }
        let mut cuts = vec![0.0; alpha - 1];
        for i in 1..alpha {
            if 2 * i < alpha {
                let c = normal::inverse_cdf(i as f64 / alpha as f64);
                cuts[i - 1] = c;
                cuts[alpha - 1 - i] = -c;
            }
        }
        Ok(Self { cuts })
    }

    pub fn cuts(&self) -> &[f64] {
        &self.cuts
    }

    pub fn alpha(&self) -> usize {
        self.cuts.len() + 1
    }

    /// Bin index of `value`. Bins are half-open `[cut, next)`, so a value
    /// equal to a cut goes to the upper bin.
    pub fn symbol(&self, value: f64) -> u8 {
        self.cuts.partition_point(|&c| c <= value) as u8
    }

    /// Expected value of a standard normal conditioned on each bin.
    pub fn bin_means(&self) -> Vec<f64> {
        let alpha = self.alpha() as f64;
        let mut edges = Vec::with_capacity(self.cuts.len() + 2);
        edges.push(f64::NEG_INFINITY);
        edges.extend_from_slice(&self.cuts);
        edges.push(f64::INFINITY);
        edges
            .windows(2)
            .map(|e| alpha * (normal::pdf(e[0]) - normal::pdf(e[1])))
            .collect()
    }

    /// Distance between bins `r` and `c` in the MINDIST lookup table.
    pub fn cell(&self, r: u8, c: u8) -> f64 {
        let (lo, hi) = if r <= c { (r, c) } else { (c, r) };
        if hi - lo <= 1 {
            0.0
        } else {
            self.cuts[hi as usize - 1] - self.cuts[lo as usize]
        }
    }
}

/// Z-normalizes `values` (population standard deviation). Flat input
/// (std below [`EPSILON_FLAT`]) maps to all zeros.
pub fn znormalize(values: &[f64]) -> Result<Vec<f64>> {
    if values.is_empty() {
        return invalid("cannot normalize an empty series");
    }
    Ok(znormalize_unchecked(values))
}

fn znormalize_unchecked(values: &[f64]) -> Vec<f64> {
    let (mean, std) = mean_std(values);
    if std < EPSILON_FLAT {
        vec![0.0; values.len()]
    } else {
        values.iter().map(|v| (v - mean) / std).collect()
    }
}

/// Piecewise aggregate approximation into `frames` block means.
///
/// When `frames` does not divide the length, boundary points contribute to
/// both neighbouring blocks in proportion to their overlap.
pub fn paa(values: &[f64], frames: usize) -> Result<Vec<f64>> {
    let n = values.len();
    if frames == 0 || frames > n {
        return invalid(format!("frame count {frames} must be in 1..={n}"));
    }
    if n % frames == 0 {
        let block = n / frames;
        return Ok(values
            .chunks_exact(block)
            .map(|c| c.iter().sum::<f64>() / block as f64)
            .collect());
    }
    // Point j spans [j*frames, (j+1)*frames) and frame f spans [f*n, (f+1)*n)
    // on a common integer axis; weights are the exact overlaps.
    let mut out = Vec::with_capacity(frames);
    for f in 0..frames {
        let lo = f * n;
        let hi = lo + n;
        let mut acc = 0.0;
        for j in lo / frames..hi.div_ceil(frames).min(n) {
            let a = (j * frames).max(lo);
            let b = ((j + 1) * frames).min(hi);
            if b > a {
                acc += values[j] * (b - a) as f64;
            }
        }
        out.push(acc / n as f64);
    }
    Ok(out)
}

/// Encodes a whole series as one word of `word_size` symbols.
pub fn sax_encode(values: &[f64], alpha: usize, word_size: usize) -> Result<SaxWord> {
    if word_size == 0 || values.len() < word_size {
        return invalid(format!(
            "series of length {} cannot be encoded into {word_size} symbols",
            values.len()
        ));
    }
    if !(2..=26).contains(&alpha) {
        return invalid(format!("alpha must be in 2..=26, got {alpha}"));
    }
    let bp = Breakpoints::gaussian(alpha)?;
    let z = znormalize_unchecked(values);
    let symbols = paa(&z, word_size)?
        .into_iter()
        .map(|v| bp.symbol(v))
        .collect();
    Ok(SaxWord::new_unchecked(symbols, alpha))
}

/// Word for one window with `window.len()` divisible by `word_size`.
pub(crate) fn encode_window(window: &[f64], word_size: usize, bp: &Breakpoints) -> SaxWord {
    let (mean, std) = mean_std(window);
    let alpha = bp.alpha();
    if std < EPSILON_FLAT {
        return SaxWord::new_unchecked(vec![(alpha / 2) as u8; word_size], alpha);
    }
    let block = window.len() / word_size;
    let symbols = window
        .chunks_exact(block)
        .map(|c| {
            let m = c.iter().map(|v| (v - mean) / std).sum::<f64>() / block as f64;
            bp.symbol(m)
        })
        .collect();
    SaxWord::new_unchecked(symbols, alpha)
}

/// Words of every window of a series, one per start index.
#[derive(Debug, Clone, PartialEq)]
pub struct SaxSequence {
    words: Vec<SaxWord>,
    config: SaxConfig,
}

impl SaxSequence {
    pub fn config(&self) -> &SaxConfig {
        &self.config
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    /// The word of the window starting at `start`.
    pub fn word(&self, start: usize) -> &SaxWord {
        &self.words[start]
    }

    pub fn words(&self) -> &[SaxWord] {
        &self.words
    }

    /// `(start index, word)` pairs in order.
    pub fn iter(&self) -> impl Iterator<Item = (usize, &SaxWord)> {
        self.words.iter().enumerate()
    }

    /// Maps each word to a dense integer id (first-seen order). Returns the
    /// id stream and the vocabulary.
    pub fn intern(&self) -> (Vec<u32>, Vec<SaxWord>) {
        let mut ids = std::collections::HashMap::new();
        let mut vocab = Vec::new();
        let stream = self
            .words
            .iter()
            .map(|w| {
                *ids.entry(w).or_insert_with(|| {
                    vocab.push(w.clone());
                    (vocab.len() - 1) as u32
                })
            })
            .collect();
        (stream, vocab)
    }
}

/// Sliding-window encoding: one independently normalized word per window
/// start `0..=N-w`.
pub fn sax_sliding(series: &TimeSeries, config: &SaxConfig) -> Result<SaxSequence> {
    config.validate()?;
    let values = series.values();
    let w = config.window_size;
    if values.len() < w {
        return invalid(format!(
            "series of length {} is shorter than the window size {w}",
            values.len()
        ));
    }
    let bp = Breakpoints::gaussian(config.alpha)?;
    let words = values
        .windows(w)
        .map(|win| encode_window(win, config.word_size, &bp))
        .collect();
    Ok(SaxSequence {
        words,
        config: *config,
    })
}

/// Number of positions at which two equal-length words differ.
pub fn hamming_distance(a: &SaxWord, b: &SaxWord) -> Result<usize> {
    if a.len() != b.len() {
        return invalid(format!("word lengths differ: {} vs {}", a.len(), b.len()));
    }
    Ok(a
        .symbols()
        .iter()
        .zip(b.symbols())
        .filter(|(x, y)| x != y)
        .count())
}

/// Lower-bounding distance between two words describing `window_size`-point
/// windows.
pub fn mindist(a: &SaxWord, b: &SaxWord, window_size: usize) -> Result<f64> {
    if a.len() != b.len() {
        return invalid(format!("word lengths differ: {} vs {}", a.len(), b.len()));
    }
    if a.alpha() != b.alpha() {
        return invalid(format!(
            "alphabet sizes differ: {} vs {}",
            a.alpha(),
            b.alpha()
        ));
    }
    if a.is_empty() {
        return Ok(0.0);
    }
    let bp = Breakpoints::gaussian(a.alpha())?;
    let sum: f64 = a
        .symbols()
        .iter()
        .zip(b.symbols())
        .map(|(&x, &y)| bp.cell(x, y).powi(2))
        .sum();
    Ok((window_size as f64 / a.len() as f64).sqrt() * sum.sqrt())
}
