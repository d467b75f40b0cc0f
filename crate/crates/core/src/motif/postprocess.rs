use crate::sax::{SaxConfig, EPSILON_FLAT};
use crate::series::{mean_std, TimeSeries};

use super::Motif;

/// Cleans a raw motif list:
///
/// 1. occurrences closer than one window to the previous kept one are
///    dropped (self-matches);
/// 2. motifs sharing at least half of the smaller occurrence set are merged
///    until no pair qualifies;
/// 3. motifs whose every occurrence is monotone or flat are removed;
/// 4. the rest is sorted longest first, then by occurrence count.
///
/// Applying it twice gives the same result as applying it once.
pub fn post_process_motifs(motifs: &[Motif], series: &TimeSeries, cfg: &SaxConfig) -> Vec<Motif> {
    let w = cfg.window_size.max(1);
    let mut out: Vec<Motif> = motifs
        .iter()
        .map(|m| {
            let mut m = m.clone();
            m.occurrences = collapse(&m.occurrences, w);
            m
        })
        .collect();

    'merge: loop {
        for a in 0..out.len() {
            for b in a + 1..out.len() {
                if overlapping(&out[a].occurrences, &out[b].occurrences) {
                    let other = out.remove(b);
                    let m = &mut out[a];
                    m.occurrences.extend(other.occurrences);
                    m.occurrences.sort_unstable();
                    m.occurrences = collapse(&m.occurrences, w);
                    m.length = m.length.max(other.length);
                    m.score = m.score.max(other.score);
                    continue 'merge;
                }
            }
        }
        break;
    }

    let (_, std) = mean_std(series.values());
    out.retain(|m| !is_obvious(m, series.values(), std));
    out.sort_by(|a, b| {
        b.length
            .cmp(&a.length)
            .then(b.occurrences.len().cmp(&a.occurrences.len()))
            .then(a.occurrences.cmp(&b.occurrences))
    });
    out
}

/// Keeps an occurrence only if it starts at least `w` after the last kept one.
fn collapse(sorted: &[usize], w: usize) -> Vec<usize> {
    let mut kept: Vec<usize> = Vec::with_capacity(sorted.len());
    for &o in sorted {
        if kept.last().map_or(true, |&k| o >= k + w) {
            kept.push(o);
        }
    }
    kept
}

fn overlapping(a: &[usize], b: &[usize]) -> bool {
    let shared = a.iter().filter(|o| b.binary_search(o).is_ok()).count();
    2 * shared >= a.len().min(b.len())
}

fn is_obvious(m: &Motif, values: &[f64], std: f64) -> bool {
    m.occurrences.iter().all(|&o| {
        let end = (o + m.length).min(values.len());
        let seg = &values[o.min(end)..end];
        if seg.len() < 2 {
            return true;
        }
        let (lo, hi) = seg
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), &v| (l.min(v), h.max(v)));
        let flat = hi - lo <= EPSILON_FLAT * std;
        let rising = seg.windows(2).all(|p| p[1] >= p[0]);
        let falling = seg.windows(2).all(|p| p[1] <= p[0]);
        flat || rising || falling
    })
}
