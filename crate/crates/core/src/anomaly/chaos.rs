use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::sax::{sax_sliding, SaxConfig, SaxWord};
use crate::series::TimeSeries;

use super::ScoreSeries;

pub const DEFAULT_CHAOS_LEVEL: usize = 3;
const MAX_LEVEL: usize = 8;

/// Gram counts of a set of four-letter SAX words, one bin per possible gram
/// of length `level`.
///
/// The bin of a gram is its base-4 value with the first symbol most
/// significant, which is the same ordering as the quadrant recursion of the
/// Chaos Game bitmap (see [`ChaosHistogram::to_bitmap`]).
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ChaosHistogram {
    level: usize,
    counts: Vec<u64>,
    words: usize,
}

impl ChaosHistogram {
    pub fn level(&self) -> usize {
        self.level
    }

    pub fn bins(&self) -> usize {
        self.counts.len()
    }

    /// Raw gram counts before normalization.
    pub fn raw_counts(&self) -> &[u64] {
        &self.counts
    }

    /// Number of words the counts were collected from.
    pub fn word_count(&self) -> usize {
        self.words
    }

    /// Counts divided by the number of words.
    pub fn frequencies(&self) -> Vec<f64> {
        let n = self.words as f64;
        self.counts.iter().map(|&c| c as f64 / n).collect()
    }

    /// Sum of squared differences between the two frequency maps.
    pub fn squared_distance(&self, other: &ChaosHistogram) -> Result<f64> {
        if self.level != other.level {
            return invalid(format!(
                "histogram levels differ ({} vs {})",
                self.level, other.level
            ));
        }
        Ok(bin_distance(&self.counts, self.words, &other.counts, other.words))
    }

    /// The `2^level x 2^level` count image: each symbol picks a quadrant
    /// (a top-left, b top-right, c bottom-left, d bottom-right) inside the
    /// quadrant chosen by the previous symbols.
    pub fn to_bitmap(&self) -> Vec<Vec<u64>> {
        let side = 1usize << self.level;
        let mut img = vec![vec![0; side]; side];
        for (bin, &c) in self.counts.iter().enumerate() {
            let (mut row, mut col) = (0, 0);
            for k in (0..self.level).rev() {
                let digit = (bin >> (2 * k)) & 3;
                row = (row << 1) | (digit >> 1);
                col = (col << 1) | (digit & 1);
            }
            img[row][col] = c;
        }
        img
    }
}

fn bin_distance(a: &[u64], na: usize, b: &[u64], nb: usize) -> f64 {
    let (na, nb) = (na as f64, nb as f64);
    a.iter()
        .zip(b)
        .map(|(&x, &y)| {
            let d = x as f64 / na - y as f64 / nb;
            d * d
        })
        .sum()
}

fn check_level(level: usize, word_size: usize) -> Result<()> {
    if level == 0 || level > MAX_LEVEL {
        return invalid(format!("level must be in 1..={MAX_LEVEL}, got {level}"));
    }
    if level > word_size {
        return invalid(format!(
            "level {level} is longer than the words ({word_size} symbols)"
        ));
    }
    Ok(())
}

/// Bin of every gram of every word, flattened (`word_size - level + 1` per word).
fn gram_bins(words: &[SaxWord], level: usize) -> Vec<u32> {
    let mut out = Vec::new();
    for w in words {
        for g in w.symbols().windows(level) {
            out.push(g.iter().fold(0u32, |acc, &s| acc * 4 + u32::from(s)));
        }
    }
    out
}

/// Histogram of all length-`level` grams inside each word (grams never span
/// two words).
pub fn chaos_histogram(words: &[SaxWord], level: usize) -> Result<ChaosHistogram> {
    let Some(first) = words.first() else {
        return invalid("cannot build a histogram from zero words");
    };
    if let Some(w) = words.iter().find(|w| w.alpha() != 4) {
        return invalid(format!(
            "chaos game histograms need alphabet size 4, got {}",
            w.alpha()
        ));
    }
    if let Some(w) = words.iter().find(|w| w.len() < level) {
        return invalid(format!("word {w} is shorter than level {level}"));
    }
    check_level(level, first.len())?;
    let mut counts = vec![0u64; 1 << (2 * level)];
    for b in gram_bins(words, level) {
        counts[b as usize] += 1;
    }
    Ok(ChaosHistogram {
        level,
        counts,
        words: words.len(),
    })
}

/// Knobs of the Chaos Game detector. `lead` is the detection window D and
/// `lag` the reference window L, both counted in words spaced `stride` apart.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChaosParams {
    pub level: usize,
    pub lead: usize,
    pub lag: usize,
    pub stride: usize,
}

impl Default for ChaosParams {
    fn default() -> Self {
        Self {
            level: DEFAULT_CHAOS_LEVEL,
            lead: 100,
            lag: 200,
            stride: 1,
        }
    }
}

impl ChaosParams {
    pub fn validate(&self, cfg: &SaxConfig) -> Result<()> {
        if cfg.alpha != 4 {
            return Err(Error::Config(format!(
                "the chaos game detector needs alpha = 4, got {}",
                cfg.alpha
            )));
        }
        check_level(self.level, cfg.word_size).map_err(as_config)?;
        if self.lead == 0 || self.lag < self.lead {
            return Err(Error::Config(format!(
                "need lag >= lead >= 1, got lead {} and lag {}",
                self.lead, self.lag
            )));
        }
        if self.stride == 0 {
            return Err(Error::Config("stride must be at least 1".into()));
        }
        Ok(())
    }

    /// Points read past an evaluation index: the last detection word
    /// starts `stride * (lead - 1)` later and spans the window.
    pub fn look_ahead(&self, cfg: &SaxConfig) -> usize {
        self.stride * (self.lead - 1) + cfg.window_size - 1
    }

    /// First index with a complete lag window.
    pub fn warm_up(&self) -> usize {
        self.stride * self.lag
    }
}

fn as_config(e: Error) -> Error {
    match e {
        Error::InvalidInput(m) => Error::Config(m),
        other => other,
    }
}

/// Chaos Game divergence per point: the squared distance between the gram
/// frequencies of the `lead` words starting at `i` and of the `lag` words
/// before `i`.
///
/// Defined on `warm_up()..=N - 1 - look_ahead()`; nothing past
/// `i + look_ahead()` is read to score `i`.
pub fn chaos_game_score(series: &TimeSeries, cfg: &SaxConfig, params: &ChaosParams) -> Result<ScoreSeries> {
    params.validate(cfg)?;
    let need = params.warm_up() + params.look_ahead(cfg) + 1;
    if series.len() < need {
        return invalid(format!(
            "series of length {} is too short for lead {} and lag {} (need {need} points)",
            series.len(),
            params.lead,
            params.lag
        ));
    }
    let sax = sax_sliding(series, cfg)?;
    let level = params.level;
    let grams = cfg.word_size - level + 1;
    let bins = gram_bins(sax.words(), level);
    let of = |word: usize| &bins[word * grams..(word + 1) * grams];

    let (s, d, l) = (params.stride, params.lead, params.lag);
    let m = sax.len();
    let from = params.warm_up();
    let to = m - 1 - s * (d - 1);
    let mut scores = vec![0.0; to - from + 1];
    let nbins = 1usize << (2 * level);

    for r in 0..s {
        // words r, r + s, r + 2s, ...; chain position k is word r + k*s
        let chain_len = (m - r).div_ceil(s);
        if chain_len < l + d {
            continue;
        }
        let mut lag = vec![0u64; nbins];
        let mut det = vec![0u64; nbins];
        for k in 0..l {
            for &b in of(r + k * s) {
                lag[b as usize] += 1;
            }
        }
        for k in l..l + d {
            for &b in of(r + k * s) {
                det[b as usize] += 1;
            }
        }
        let mut k = l;
        loop {
            let i = r + k * s;
            scores[i - from] = bin_distance(&det, d, &lag, l);
            if k + d >= chain_len {
                break;
            }
            for &b in of(r + (k - l) * s) {
                lag[b as usize] -= 1;
            }
            for &b in of(i) {
                lag[b as usize] += 1;
                det[b as usize] -= 1;
            }
            for &b in of(r + (k + d) * s) {
                det[b as usize] += 1;
            }
            k += 1;
        }
    }
    ScoreSeries::new(series.len(), from, scores)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use rand_distr::StandardNormal;

    fn w(text: &str) -> SaxWord {
        SaxWord::parse(text, 4).unwrap()
    }

    #[test]
    fn histogram_examples() {
        let h = chaos_histogram(&[w("aaa")], 3).unwrap();
        assert_eq!(h.bins(), 64);
        assert_eq!(h.frequencies()[0], 1.0);
        assert_eq!(h.frequencies()[1..].iter().sum::<f64>(), 0.0);

        let h = chaos_histogram(&[w("ab"), w("ba")], 1).unwrap();
        assert_eq!(h.frequencies(), vec![1.0, 1.0, 0.0, 0.0]);

        let h = chaos_histogram(&[w("dcba")], 2).unwrap();
        // dc = 3*4+2, cb = 2*4+1, ba = 1*4+0
        let nz: Vec<usize> = (0..16).filter(|&b| h.raw_counts()[b] > 0).collect();
        assert_eq!(nz, vec![4, 9, 14]);
    }

    #[test]
    fn histogram_errors() {
        assert!(chaos_histogram(&[w("ab")], 3).is_err());
        assert!(chaos_histogram(&[], 1).is_err());
        assert!(chaos_histogram(&[SaxWord::parse("abc", 3).unwrap()], 1).is_err());
        assert!(chaos_histogram(&[w("ab")], 0).is_err());
    }

    #[test]
    fn bitmap_quadrants() {
        let h = chaos_histogram(&[w("ad"), w("da"), w("dd")], 2).unwrap();
        let img = h.to_bitmap();
        assert_eq!(img.len(), 4);
        // a then d: top-left quadrant, bottom-right cell of it
        assert_eq!(img[1][1], 1);
        assert_eq!(img[2][2], 1);
        assert_eq!(img[3][3], 1);
        let total: u64 = img.iter().flatten().sum();
        assert_eq!(total, 3);
    }

    fn noise(len: usize, seed: u64) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..len).map(|_| rng.sample(StandardNormal)).collect()
    }

    #[test]
    fn sliding_scores_match_direct_histograms() {
        let s = TimeSeries::new(noise(500, 3)).unwrap();
        let cfg = SaxConfig::new(4, 4, 8).unwrap();
        let sax = sax_sliding(&s, &cfg).unwrap();
        for stride in [1, 3] {
            let p = ChaosParams {
                level: 2,
                lead: 5,
                lag: 12,
                stride,
            };
            let sc = chaos_game_score(&s, &cfg, &p).unwrap();
            assert_eq!(sc.valid_from(), 12 * stride);
            assert_eq!(sc.valid_to(), 499 - p.look_ahead(&cfg));
            for i in sc.valid_from()..=sc.valid_to() {
                let det: Vec<SaxWord> = (0..5).map(|k| sax.word(i + k * stride).clone()).collect();
                let lag: Vec<SaxWord> = (1..=12).map(|k| sax.word(i - k * stride).clone()).collect();
                let hd = chaos_histogram(&det, 2).unwrap();
                let hl = chaos_histogram(&lag, 2).unwrap();
                let expect = hd.squared_distance(&hl).unwrap();
                assert!((sc.get(i).unwrap() - expect).abs() < 1e-12, "i={i}");
                assert_eq!(expect, hl.squared_distance(&hd).unwrap());
            }
        }
    }

    #[test]
    fn variance_step_peaks_near_the_step() {
        let mut x = noise(3000, 8);
        for (i, v) in x.iter_mut().enumerate() {
            *v = (i as f64 * 0.2).sin() + if i >= 1500 { 1.5 * *v } else { 0.05 * *v };
        }
        let s = TimeSeries::new(x).unwrap();
        let cfg = SaxConfig::new(4, 4, 16).unwrap();
        let p = ChaosParams {
            level: 3,
            lead: 50,
            lag: 100,
            stride: 1,
        };
        let sc = chaos_game_score(&s, &cfg, &p).unwrap();
        assert!(sc.argmax().abs_diff(1500) <= 50 + 16, "{}", sc.argmax());
    }

    #[test]
    fn parameter_checks() {
        let s = TimeSeries::new(noise(100, 1)).unwrap();
        let cfg = SaxConfig::new(4, 4, 8).unwrap();
        let bad_alpha = SaxConfig::new(3, 4, 8).unwrap();
        let p = ChaosParams {
            level: 3,
            lead: 10,
            lag: 20,
            stride: 1,
        };
        assert!(matches!(chaos_game_score(&s, &bad_alpha, &p), Err(Error::Config(_))));
        let short = ChaosParams { lag: 5, ..p };
        assert!(matches!(chaos_game_score(&s, &cfg, &short), Err(Error::Config(_))));
        let deep = ChaosParams { level: 5, ..p };
        assert!(matches!(chaos_game_score(&s, &cfg, &deep), Err(Error::Config(_))));
        let long = ChaosParams {
            lead: 40,
            lag: 80,
            ..p
        };
        assert!(matches!(chaos_game_score(&s, &cfg, &long), Err(Error::InvalidInput(_))));
        // exactly enough points for one score
        let need = p.warm_up() + p.look_ahead(&cfg) + 1;
        let s = TimeSeries::new(noise(need, 2)).unwrap();
        let sc = chaos_game_score(&s, &cfg, &p).unwrap();
        assert_eq!(sc.valid_from(), sc.valid_to());
    }
}
