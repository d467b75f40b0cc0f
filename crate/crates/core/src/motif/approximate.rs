use crate::error::{invalid, Result};
use crate::sax::{sax_sliding, Breakpoints, SaxConfig, EPSILON_FLAT};
use crate::series::{mean_std, TimeSeries};

use super::{Motif, MotifSource};

/// Pearson correlation; 0 when either input is constant.
pub fn pearson(a: &[f64], b: &[f64]) -> f64 {
    let (ma, sa) = mean_std(a);
    let (mb, sb) = mean_std(b);
    if sa < EPSILON_FLAT || sb < EPSILON_FLAT {
        return 0.0;
    }
    let cov = a.iter().zip(b).map(|(x, y)| (x - ma) * (y - mb)).sum::<f64>() / a.len() as f64;
    (cov / (sa * sb)).clamp(-1.0, 1.0)
}

struct BitSet {
    bits: Vec<u64>,
}

impl BitSet {
    fn new(len: usize) -> Self {
        Self {
            bits: vec![0; len.div_ceil(64)],
        }
    }

    fn set(&mut self, i: usize) {
        self.bits[i / 64] |= 1 << (i % 64);
    }

    fn clear(&mut self, i: usize) {
        self.bits[i / 64] &= !(1 << (i % 64));
    }

    fn get(&self, i: usize) -> bool {
        self.bits[i / 64] >> (i % 64) & 1 == 1
    }

    fn and_with(&mut self, other: &BitSet) {
        for (a, b) in self.bits.iter_mut().zip(&other.bits) {
            *a &= b;
        }
    }
}

/// Correlation clusters of SAX words.
///
/// Each window's word is turned into a numeric profile (every symbol
/// replaced by the mean of the standard normal inside its bin). Every pair
/// of windows at least one window apart whose profiles have `|r| >= r_min`
/// seeds a cluster; clusters are then merged, in index order, whenever
/// every pair of distinct members across them also clears `r_min` and lies
/// a window apart. Passes repeat until nothing merges. Clusters of two or
/// more windows are returned, largest first.
///
/// The seeding is quadratic in the number of windows and the merging
/// quadratic in the number of seeds, so this is meant for short series.
pub fn approximate_motifs(series: &TimeSeries, cfg: &SaxConfig, r_min: f64) -> Result<Vec<Motif>> {
    if !(r_min > 0.0 && r_min <= 1.0) {
        return invalid(format!("r_min must be in (0, 1], got {r_min}"));
    }
    let w = cfg.window_size;
    if series.len() < 2 * w {
        return invalid(format!(
            "series of length {} is shorter than two windows of {w}",
            series.len()
        ));
    }
    let sax = sax_sliding(series, cfg)?;
    let (ids, vocab) = sax.intern();
    let means = Breakpoints::gaussian(cfg.alpha)?.bin_means();
    let profiles: Vec<Vec<f64>> = vocab
        .iter()
        .map(|word| word.symbols().iter().map(|&s| means[s as usize]).collect())
        .collect();
    let v = vocab.len();
    let m = ids.len();

    // compatible[u] = windows whose word correlates with word u
    let mut word_ok = vec![false; v * v];
    for a in 0..v {
        for b in a..v {
            let ok = pearson(&profiles[a], &profiles[b]).abs() >= r_min;
            word_ok[a * v + b] = ok;
            word_ok[b * v + a] = ok;
        }
    }
    let mut compatible: Vec<BitSet> = (0..v).map(|_| BitSet::new(m)).collect();
    for (u, row) in compatible.iter_mut().enumerate() {
        for (q, &id) in ids.iter().enumerate() {
            if word_ok[u * v + id as usize] {
                row.set(q);
            }
        }
    }
    let pair_ok = |p: usize, q: usize| p.abs_diff(q) >= w && word_ok[ids[p] as usize * v + ids[q] as usize];

    let mut clusters: Vec<Option<Vec<usize>>> = Vec::new();
    for i in 0..m {
        for j in i + w..m {
            if pair_ok(i, j) {
                clusters.push(Some(vec![i, j]));
            }
        }
    }

    // windows that may join a cluster: compatible with, and a window away
    // from, every member (members themselves stay allowed)
    let allowed_for = |members: &[usize]| {
        let mut allowed = BitSet::new(m);
        allowed.bits.fill(u64::MAX);
        for &p in members {
            let mut row = BitSet {
                bits: compatible[ids[p] as usize].bits.clone(),
            };
            for q in p.saturating_sub(w - 1)..(p + w).min(m) {
                row.clear(q);
            }
            row.set(p);
            allowed.and_with(&row);
        }
        for &p in members {
            allowed.set(p);
        }
        allowed
    };

    loop {
        let mut changed = false;
        for a in 0..clusters.len() {
            let Some(members) = clusters[a].clone() else {
                continue;
            };
            let mut members = members;
            let mut allowed = allowed_for(&members);
            for b in a + 1..clusters.len() {
                let Some(other) = &clusters[b] else {
                    continue;
                };
                if other.iter().all(|&q| allowed.get(q)) {
                    let other = clusters[b].take().expect("checked above");
                    let added: Vec<usize> = other.into_iter().filter(|q| !members.contains(q)).collect();
                    if !added.is_empty() {
                        members.extend(&added);
                        members.sort_unstable();
                        allowed = allowed_for(&members);
                    }
                    changed = true;
                }
            }
            clusters[a] = Some(members);
        }
        if !changed {
            break;
        }
    }

    let mut out: Vec<Motif> = clusters
        .into_iter()
        .flatten()
        .filter(|c| c.len() >= 2)
        .map(|c| {
            let size = c.len() as f64;
            Motif::new(c, w.max(2), MotifSource::ApproxMotif, size)
        })
        .collect::<Result<_>>()?;
    out.sort_by(|a, b| b.count().cmp(&a.count()).then(a.occurrences().cmp(b.occurrences())));
    Ok(out)
}
