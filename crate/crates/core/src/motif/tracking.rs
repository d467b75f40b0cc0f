use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::sax::{Breakpoints, EPSILON_FLAT};
use crate::series::{mean_std, TimeSeries};

use super::{Motif, MotifSource};

/// Knobs of Motif Tracking. Each symbol summarizes `symbol_size`
/// consecutive points of the first difference.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrackingParams {
    pub alpha: usize,
    /// Largest mean absolute difference per point for two occurrences to match.
    pub r: f64,
    pub symbol_size: usize,
}

/// A candidate motif word with its accepted, non-overlapping occurrences
/// (in symbol positions).
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Tracker {
    pub word: Vec<u8>,
    pub score: usize,
    pub indexes: Vec<usize>,
}

/// Motif Tracking with one difference point per symbol.
pub fn motif_tracking(series: &TimeSeries, alpha: usize, r: f64) -> Result<Vec<Motif>> {
    motif_tracking_with(
        series,
        &TrackingParams {
            alpha,
            r,
            symbol_size: 1,
        },
        |_, _| {},
    )
}

/// Grows trackers one symbol per generation over the symbolized first
/// difference. The occurrences of a word are grouped around prototypes: a
/// match joins the first group whose prototype lies within `r` and whose
/// last member it does not overlap. Every group of two or more is a
/// tracker; the rest die. Growth stops when a generation dies out.
///
/// The result holds every tracker that no extension could carry whole
/// (an extension kept all its occurrences), longest first, then by score.
/// On noisy backgrounds the longest are often chance repeats of the noise.
///
/// `on_generation` sees the survivors of every generation (word length
/// starting at 1).
pub fn motif_tracking_with(
    series: &TimeSeries,
    params: &TrackingParams,
    mut on_generation: impl FnMut(usize, &[Tracker]),
) -> Result<Vec<Motif>> {
    if series.len() < 3 {
        return invalid(format!(
            "motif tracking needs at least 3 points, got {}",
            series.len()
        ));
    }
    if !(params.r > 0.0 && params.r.is_finite()) {
        return invalid(format!("r must be positive and finite, got {}", params.r));
    }
    let s = params.symbol_size;
    if s == 0 {
        return invalid("symbol size must be at least 1");
    }
    let bp = Breakpoints::gaussian(params.alpha)?;

    let x = series.values();
    let mut diff: Vec<f64> = x.windows(2).map(|p| p[1] - p[0]).collect();
    let (mean, std) = mean_std(&diff);
    for d in &mut diff {
        *d = if std < EPSILON_FLAT { 0.0 } else { (*d - mean) / std };
    }
    let symbols: Vec<u8> = diff
        .chunks_exact(s)
        .map(|c| bp.symbol(c.iter().sum::<f64>() / s as f64))
        .collect();
    let count = symbols.len();
    if count < 2 {
        return invalid("series too short for the symbol size");
    }

    let close = |a: usize, b: usize, l: usize| {
        let (a, b) = (&diff[a * s..(a + l) * s], &diff[b * s..(b + l) * s]);
        let total: f64 = a.iter().zip(b).map(|(u, v)| (u - v).abs()).sum();
        total / ((l * s) as f64) < params.r
    };

    // (word, candidate positions whose symbols spell the word)
    let mut generation: Vec<(Vec<u8>, Vec<usize>)> = (0..params.alpha as u8)
        .map(|a| {
            let cands = (0..count).filter(|&j| symbols[j] == a).collect();
            (vec![a], cands)
        })
        .collect();
    let mut length = 1;
    let mut last: Vec<Tracker> = Vec::new();
    let mut closed: Vec<Tracker> = Vec::new();
    loop {
        let mut survivors = Vec::new();
        let mut parents = Vec::new();
        for (word, cands) in generation {
            // Leader clustering: a candidate joins the first group whose
            // prototype it matches, else it starts its own group. Each
            // group of two or more is a tracker.
            let mut groups: Vec<Vec<usize>> = Vec::new();
            for &j in &cands {
                let home = groups
                    .iter_mut()
                    .find(|g| j >= g[g.len() - 1] + length && close(g[0], j, length));
                match home {
                    Some(g) => g.push(j),
                    None => groups.push(vec![j]),
                }
            }
            let before = survivors.len();
            for accepted in groups.into_iter().filter(|g| g.len() >= 2) {
                survivors.push(Tracker {
                    word: word.clone(),
                    score: accepted.len(),
                    indexes: accepted,
                });
            }
            if survivors.len() > before {
                parents.push((word, cands));
            }
        }
        // a tracker is final unless some extension kept all its occurrences
        let extended: HashSet<(&[u8], &[usize])> = survivors
            .iter()
            .map(|t| (&t.word[..length - 1], &t.indexes[..]))
            .collect();
        closed.extend(
            last.drain(..)
                .filter(|t| !extended.contains(&(&t.word[..], &t.indexes[..]))),
        );
        if survivors.is_empty() {
            break;
        }
        on_generation(length, &survivors);
        last = survivors;

        let mut next = Vec::new();
        for (word, cands) in parents {
            let mut children: Vec<Vec<usize>> = vec![Vec::new(); params.alpha];
            for &j in &cands {
                if j + length < count {
                    children[symbols[j + length] as usize].push(j);
                }
            }
            for (a, c) in children.into_iter().enumerate() {
                if c.len() >= 2 {
                    let mut w = word.clone();
                    w.push(a as u8);
                    next.push((w, c));
                }
            }
        }
        generation = next;
        length += 1;
    }

    closed.sort_by(|a, b| {
        b.word
            .len()
            .cmp(&a.word.len())
            .then(b.score.cmp(&a.score))
            .then(a.indexes[0].cmp(&b.indexes[0]))
    });
    closed
        .iter()
        .map(|t| {
            Motif::new(
                t.indexes.iter().map(|&j| j * s).collect(),
                (t.word.len() * s + 1).max(2),
                MotifSource::Tracking,
                t.score as f64,
            )
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use rand_distr::StandardNormal;

    fn noise(len: usize, seed: u64) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..len).map(|_| rng.sample(StandardNormal)).collect()
    }

    #[test]
    fn planted_pair() {
        let mut x = noise(600, 1);
        let p: Vec<f64> = (0..20).map(|i| 3.0 * (i as f64 * 0.5).sin()).collect();
        x[100..120].copy_from_slice(&p);
        x[400..420].copy_from_slice(&p);
        let s = TimeSeries::new(x).unwrap();
        let motifs = motif_tracking(&s, 4, 0.5).unwrap();
        assert!(
            motifs.iter().any(|m| {
                let o = m.occurrences();
                m.length() >= 19
                    && o.iter().any(|&a| a.abs_diff(100) <= 5)
                    && o.iter().any(|&b| b.abs_diff(400) <= 5)
            }),
            "{motifs:?}"
        );
        assert!(motifs.windows(2).all(|p| p[0].length() >= p[1].length()));
    }

    #[test]
    fn strict_threshold_rejects_noisy_repeats() {
        let base: Vec<f64> = (0..30).map(|i| (i as f64 * 0.4).sin()).collect();
        let mut x = noise(300, 2);
        for (k, v) in x.iter_mut().enumerate() {
            *v = 0.05 * *v + base[k % 30];
        }
        let s = TimeSeries::new(x).unwrap();
        assert!(motif_tracking(&s, 4, 1e-9).unwrap().is_empty());
    }

    #[test]
    fn exact_halves_grow_to_block_length() {
        let mut x = noise(200, 3);
        x.extend(x.clone());
        let s = TimeSeries::new(x).unwrap();
        let motifs = motif_tracking(&s, 4, 0.1).unwrap();
        assert_eq!(motifs[0].occurrences(), &[0, 200]);
        assert_eq!(motifs[0].length(), 200);
        assert!(motifs[1].length() < 200, "{:?}", motifs[1]);
    }

    #[test]
    fn generations_extend_surviving_words() {
        let mut x = noise(300, 4);
        let head = x[..60].to_vec();
        x.extend(head);
        let s = TimeSeries::new(x).unwrap();
        let params = TrackingParams {
            alpha: 3,
            r: 0.8,
            symbol_size: 2,
        };
        let mut prev: Option<Vec<Tracker>> = None;
        let mut gens = 0;
        motif_tracking_with(&s, &params, |len, survivors| {
            gens += 1;
            for t in survivors {
                assert_eq!(t.word.len(), len);
                assert_eq!(t.score, t.indexes.len());
                assert!(t.score >= 2);
                if let Some(p) = &prev {
                    assert!(p.iter().any(|q| q.word[..] == t.word[..len - 1]));
                }
            }
            prev = Some(survivors.to_vec());
        })
        .unwrap();
        assert!(gens >= 10);
    }

    #[test]
    fn input_checks() {
        let s = TimeSeries::new(vec![1.0, 2.0]).unwrap();
        assert!(motif_tracking(&s, 4, 1.0).is_err());
        let s = TimeSeries::new(noise(50, 1)).unwrap();
        assert!(motif_tracking(&s, 4, 0.0).is_err());
        assert!(motif_tracking(&s, 4, f64::NAN).is_err());
        assert!(motif_tracking(&s, 1, 1.0).is_err());
    }
}
