use std::collections::HashMap;
use std::time::{Duration, Instant};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::sax::{sax_sliding, SaxConfig};
use crate::series::TimeSeries;
use crate::windows::{DistanceMode, WindowSet};

/// The subsequence farthest from its nearest non-self-match.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DiscordResult {
    /// Start index of the discord window.
    pub location: usize,
    /// Distance to its nearest non-overlapping neighbour.
    pub distance: f64,
}

/// Work counters of one search.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct SearchStats {
    pub distance_calls: u64,
}

/// Exact discord search over the windows of one series.
///
/// Two windows `p` and `q` are self-matches when `|p - q| <= n`; they are
/// never compared. Ties on distance go to the smallest location, so
/// [`DiscordFinder::brute_force`] and [`DiscordFinder::hot_sax`] return
/// identical results.
pub struct DiscordFinder<'a> {
    series: &'a TimeSeries,
    n: usize,
    mode: DistanceMode,
    deadline: Option<Duration>,
}

impl<'a> DiscordFinder<'a> {
    pub fn new(series: &'a TimeSeries, n: usize) -> Result<Self> {
        if n == 0 {
            return invalid("discord length must be at least 1");
        }
        if series.len() < 2 * n + 1 {
            return invalid(format!(
                "series of length {} is too short for discords of length {n} (need {})",
                series.len(),
                2 * n + 1
            ));
        }
        Ok(Self {
            series,
            n,
            mode: DistanceMode::ZNormalized,
            deadline: None,
        })
    }

    pub fn distance_mode(mut self, mode: DistanceMode) -> Self {
        self.mode = mode;
        self
    }

    /// Aborts the search with [`Error::Timeout`] once `limit` has elapsed.
    pub fn time_limit(mut self, limit: Duration) -> Self {
        self.deadline = Some(limit);
        self
    }

    fn windows(&self) -> WindowSet<'a> {
        WindowSet::new(self.series.values(), self.n, self.mode)
    }

    /// Exhaustive search.
    pub fn brute_force(&self) -> Result<(DiscordResult, SearchStats)> {
        let started = Instant::now();
        let ws = self.windows();
        let m = ws.len();
        let mut stats = SearchStats::default();
        let mut best: Option<(usize, f64)> = None;
        for p in 0..m {
            self.check_deadline(started)?;
            let mut nn = f64::INFINITY;
            for q in (0..m).filter(|&q| p.abs_diff(q) > self.n) {
                stats.distance_calls += 1;
                let d = ws.dist_sq(p, q);
                if d < nn {
                    nn = d;
                }
            }
            if nn.is_finite() && best.map_or(true, |(_, b)| nn > b) {
                best = Some((p, nn));
            }
        }
        Ok((finish(best), stats))
    }

    /// Hot SAX: the exhaustive search reordered by SAX word rarity, with
    /// early abandoning of candidates that cannot beat the current best.
    ///
    /// Outer order: windows whose word has the minimal occurrence count (in
    /// index order), then the rest shuffled with `seed`. Inner order: windows
    /// sharing the candidate's word, then all others in a seeded shuffle.
    pub fn hot_sax(&self, alpha: usize, word_size: usize, seed: u64) -> Result<(DiscordResult, SearchStats)> {
        let started = Instant::now();
        let cfg = SaxConfig::new(alpha, word_size, self.n)?;
        let (word_of, _) = sax_sliding(self.series, &cfg)?.intern();
        let ws = self.windows();
        let m = ws.len();

        let mut buckets: HashMap<u32, Vec<usize>> = HashMap::new();
        for (i, &w) in word_of.iter().enumerate() {
            buckets.entry(w).or_default().push(i);
        }
        let min_count = buckets.values().map(Vec::len).min().unwrap_or(0);

        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut outer: Vec<usize> = (0..m)
            .filter(|&i| buckets[&word_of[i]].len() == min_count)
            .collect();
        let mut rest: Vec<usize> = (0..m)
            .filter(|&i| buckets[&word_of[i]].len() != min_count)
            .collect();
        rest.shuffle(&mut rng);
        outer.extend(rest);
        let mut inner: Vec<usize> = (0..m).collect();
        inner.shuffle(&mut rng);

        let mut stats = SearchStats::default();
        let mut best: Option<(usize, f64)> = None;
        for &p in &outer {
            self.check_deadline(started)?;
            let wp = word_of[p];
            let same = &buckets[&wp];
            let others = inner.iter().copied().filter(|&q| word_of[q] != wp);
            let mut nn = f64::INFINITY;
            let mut abandoned = false;
            for q in same.iter().copied().chain(others) {
                if p.abs_diff(q) <= self.n {
                    continue;
                }
                stats.distance_calls += 1;
                let d = ws.dist_sq(p, q);
                if d < nn {
                    nn = d;
                }
                if matches!(best, Some((_, b)) if d < b) {
                    abandoned = true;
                    break;
                }
            }
            if abandoned || !nn.is_finite() {
                continue;
            }
            let better = match best {
                None => true,
                Some((loc, b)) => nn > b || (nn == b && p < loc),
            };
            if better {
                best = Some((p, nn));
            }
        }
        Ok((finish(best), stats))
    }

    fn check_deadline(&self, started: Instant) -> Result<()> {
        match self.deadline {
            Some(limit) if started.elapsed() > limit => Err(Error::Timeout(limit)),
            _ => Ok(()),
        }
    }
}

fn finish(best: Option<(usize, f64)>) -> DiscordResult {
    // N >= 2n + 1 guarantees window 0 has a non-self-match
    let (location, d2) = best.expect("at least one window has a non-self-match");
    DiscordResult {
        location,
        distance: d2.sqrt(),
    }
}

/// Exhaustive discord search on z-normalized windows of length `n`.
pub fn brute_force_discord(series: &TimeSeries, n: usize) -> Result<DiscordResult> {
    Ok(DiscordFinder::new(series, n)?.brute_force()?.0)
}

/// Hot SAX discord search; `cfg.window_size` must equal `n`.
pub fn hot_sax_discord(series: &TimeSeries, n: usize, cfg: &SaxConfig, seed: u64) -> Result<DiscordResult> {
    if cfg.window_size != n {
        return Err(Error::Config(format!(
            "Hot SAX needs the SAX window ({}) to equal the discord length ({n})",
            cfg.window_size
        )));
    }
    Ok(DiscordFinder::new(series, n)?
        .hot_sax(cfg.alpha, cfg.word_size, seed)?
        .0)
}
