use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{invalid, Result};
use crate::series::TimeSeries;
use crate::windows::{DistanceMode, WindowSet};

use super::{Motif, MotifSource};

/// Work counters of a closest-pair search.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct PairStats {
    /// Full window distance evaluations.
    pub distance_calls: u64,
    /// Pairs rejected by a reference lower bound without a distance call.
    pub pruned: u64,
}

/// Exact closest pair of non-overlapping windows (`|i - j| > n`).
///
/// Ties on distance go to the lexicographically smallest `(i, j)` with
/// `i < j`, so the brute-force scan and the reference-ordered search agree
/// exactly.
pub struct PairSearch<'a> {
    series: &'a TimeSeries,
    n: usize,
    mode: DistanceMode,
}

/// A pair rejected by the reference ordering, with the evidence used. Only
/// the pruning-soundness tests read it.
#[derive(Debug, Clone, Copy)]
#[cfg_attr(not(test), allow(dead_code))]
pub(crate) struct Skip {
    pub gap: f64,
    pub best: f64,
}

struct Best {
    pair: Option<(usize, usize)>,
    d2: f64,
}

impl Best {
    fn offer(&mut self, a: usize, b: usize, d2: f64) {
        let key = (a.min(b), a.max(b));
        let better = match self.pair {
            None => true,
            Some(p) => d2 < self.d2 || (d2 == self.d2 && key < p),
        };
        if better {
            self.pair = Some(key);
            self.d2 = d2;
        }
    }

    fn dist(&self) -> f64 {
        self.d2.sqrt()
    }
}

impl<'a> PairSearch<'a> {
    pub fn new(series: &'a TimeSeries, n: usize) -> Result<Self> {
        if n < 2 {
            return invalid(format!("motif length must be at least 2, got {n}"));
        }
        if series.len() < 2 * n + 1 {
            return invalid(format!(
                "series of length {} is too short for pairs of length {n} (need {})",
                series.len(),
                2 * n + 1
            ));
        }
        Ok(Self {
            series,
            n,
            mode: DistanceMode::ZNormalized,
        })
    }

    pub fn distance_mode(mut self, mode: DistanceMode) -> Self {
        self.mode = mode;
        self
    }

    fn to_motif(&self, best: &Best, source: MotifSource) -> Result<Motif> {
        let (i, j) = best.pair.expect("at least one pair exists when N >= 2n + 1");
        Motif::new(vec![i, j], self.n, source, best.dist())
    }

    /// Exhaustive scan over all pairs.
    pub fn brute_force(&self) -> Result<(Motif, PairStats)> {
        let ws = WindowSet::new(self.series.values(), self.n, self.mode);
        let m = ws.len();
        let mut stats = PairStats::default();
        let mut best = Best {
            pair: None,
            d2: f64::INFINITY,
        };
        for i in 0..m {
            for j in i + self.n + 1..m {
                stats.distance_calls += 1;
                let d2 = ws.dist_sq(i, j);
                if d2 < best.d2 {
                    best.pair = Some((i, j));
                    best.d2 = d2;
                }
            }
        }
        Ok((self.to_motif(&best, MotifSource::BruteForce)?, stats))
    }

    /// Reference-ordered search: windows are sorted by distance to a random
    /// reference window and compared at growing offsets in that order. By
    /// the triangle inequality no pair can be closer than the difference of
    /// its reference distances, so a whole offset is abandoned once every
    /// gap exceeds the best distance so far. Extra references only tighten
    /// the per-pair lower bound.
    pub fn mk(&self, num_refs: usize, seed: u64) -> Result<(Motif, PairStats)> {
        self.mk_observed(num_refs, seed, |_| {})
    }

    pub(crate) fn mk_observed(
        &self,
        num_refs: usize,
        seed: u64,
        mut on_skip: impl FnMut(Skip),
    ) -> Result<(Motif, PairStats)> {
        if num_refs == 0 {
            return invalid("at least one reference window is needed");
        }
        let ws = WindowSet::new(self.series.values(), self.n, self.mode);
        let m = ws.len();
        let n = self.n;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let refs = sample(&mut rng, m, num_refs.min(m)).into_vec();

        let mut stats = PairStats::default();
        let mut best = Best {
            pair: None,
            d2: f64::INFINITY,
        };
        let mut ref_dist: Vec<Vec<f64>> = Vec::with_capacity(refs.len());
        for &r in &refs {
            let mut row = Vec::with_capacity(m);
            for x in 0..m {
                stats.distance_calls += 1;
                let d2 = ws.dist_sq(r, x);
                if r.abs_diff(x) > n {
                    best.offer(r, x, d2);
                }
                row.push(d2.sqrt());
            }
            ref_dist.push(row);
        }

        let d0 = &ref_dist[0];
        let mut order: Vec<usize> = (0..m).collect();
        order.sort_by(|&a, &b| d0[a].total_cmp(&d0[b]).then(a.cmp(&b)));

        // rounding slack so that exact ties are never pruned
        let slack = |b: f64| b + 1e-9 * (1.0 + b);
        for offset in 1..m {
            let mut reachable = false;
            for k in 0..m - offset {
                let (a, b) = (order[k], order[k + offset]);
                let gap = d0[b] - d0[a];
                let bound = slack(best.dist());
                if gap > bound {
                    on_skip(Skip {
                        gap,
                        best: best.dist(),
                    });
                    stats.pruned += 1;
                    continue;
                }
                reachable = true;
                if a.abs_diff(b) <= n {
                    continue;
                }
                let lower = ref_dist[1..]
                    .iter()
                    .map(|row| (row[a] - row[b]).abs())
                    .fold(gap, f64::max);
                if lower > bound {
                    on_skip(Skip {
                        gap: lower,
                        best: best.dist(),
                    });
                    stats.pruned += 1;
                    continue;
                }
                stats.distance_calls += 1;
                best.offer(a, b, ws.dist_sq(a, b));
            }
            if !reachable {
                break;
            }
        }
        Ok((self.to_motif(&best, MotifSource::Mk)?, stats))
    }
}

/// Exhaustive closest non-overlapping pair of z-normalized windows of length `n`.
pub fn brute_force_closest_pair(series: &TimeSeries, n: usize) -> Result<Motif> {
    Ok(PairSearch::new(series, n)?.brute_force()?.0)
}

/// Exact closest pair by reference ordering; the result does not depend on
/// `seed` or `num_refs`.
pub fn mk_motif(series: &TimeSeries, n: usize, num_refs: usize, seed: u64) -> Result<Motif> {
    Ok(PairSearch::new(series, n)?.mk(num_refs, seed)?.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;
    use rand_distr::StandardNormal;

    fn walk(len: usize, seed: u64) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut v = 0.0;
        (0..len)
            .map(|_| {
                v += rng.sample::<f64, _>(StandardNormal);
                v
            })
            .collect()
    }

    #[test]
    fn planted_repeat_is_found() {
        let mut x = walk(600, 4);
        let pattern: Vec<f64> = x[100..130].to_vec();
        x[400..430].copy_from_slice(&pattern);
        let s = TimeSeries::new(x).unwrap();
        let bf = brute_force_closest_pair(&s, 30).unwrap();
        assert_eq!(bf.occurrences(), &[100, 400]);
        assert!(bf.score() < 1e-9);
        for refs in [1, 3] {
            assert_eq!(mk_motif(&s, 30, refs, 9).unwrap().occurrences(), &[100, 400]);
        }
    }

    #[test]
    fn constant_series_tie_rule() {
        let s = TimeSeries::new(vec![2.0; 40]).unwrap();
        let bf = brute_force_closest_pair(&s, 5).unwrap();
        assert_eq!(bf.occurrences(), &[0, 6]);
        assert_eq!(bf.score(), 0.0);
        let mk = mk_motif(&s, 5, 2, 3).unwrap();
        assert_eq!(mk.occurrences(), &[0, 6]);
        assert_eq!(mk.source(), MotifSource::Mk);
    }

    #[test]
    fn mk_matches_brute_force_and_prunes() {
        for seed in 0..8 {
            let s = TimeSeries::new(walk(500 + 60 * seed as usize, seed)).unwrap();
            let search = PairSearch::new(&s, 25).unwrap();
            let (bf, bf_stats) = search.brute_force().unwrap();
            for (refs, rs) in [(1, 1), (5, 2), (5, 3)] {
                let (mk, st) = search.mk(refs, rs).unwrap();
                assert_eq!(mk.occurrences(), bf.occurrences(), "seed {seed}");
                assert!((mk.score() - bf.score()).abs() < 1e-9);
                assert!(st.distance_calls < bf_stats.distance_calls);
            }
        }
    }

    #[test]
    fn skipped_pairs_are_provably_farther() {
        for seed in 0..5 {
            let s = TimeSeries::new(walk(300, 100 + seed)).unwrap();
            let search = PairSearch::new(&s, 10).unwrap();
            let mut skips = 0;
            search
                .mk_observed(3, seed, |sk| {
                    skips += 1;
                    assert!(sk.gap >= sk.best, "{sk:?}");
                })
                .unwrap();
            assert!(skips > 0);
        }
    }

    #[test]
    fn raw_mode_and_errors() {
        let s = TimeSeries::new(walk(200, 1)).unwrap();
        let search = PairSearch::new(&s, 10).unwrap().distance_mode(DistanceMode::Raw);
        let (bf, _) = search.brute_force().unwrap();
        let (mk, _) = search.mk(2, 5).unwrap();
        assert_eq!(bf.occurrences(), mk.occurrences());
        assert!(PairSearch::new(&s, 100).is_err());
        assert!(PairSearch::new(&s, 1).is_err());
        assert!(mk_motif(&s, 10, 0, 1).is_err());
    }
}
