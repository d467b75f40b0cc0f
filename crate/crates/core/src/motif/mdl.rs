use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::series::{mean_std, TimeSeries};

use super::{kmeans, Motif, MotifSource};

/// Knobs of multiscale MDL motif search.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MdlParams {
    /// Scales `1..=scales`; scale `i` smooths with a kernel of `2^i` points.
    pub scales: usize,
    /// Number of segment classes.
    pub k: usize,
    pub seed: u64,
}

impl Default for MdlParams {
    fn default() -> Self {
        Self {
            scales: 8,
            k: 4,
            seed: 0,
        }
    }
}

/// A monotone stretch of the smoothed series, coded by its length and rise.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SegmentCode {
    pub start: usize,
    pub length_points: usize,
    pub rise: f64,
    pub cluster_id: usize,
}

/// The best motif of one scale with its description lengths in bits.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MdlMotif {
    /// Score is the relative gain `1 - (model + data) / baseline`.
    pub motif: Motif,
    pub scale: usize,
    pub model_bits: f64,
    pub data_bits: f64,
    pub baseline_bits: f64,
}

impl MdlMotif {
    pub fn total_bits(&self) -> f64 {
        self.model_bits + self.data_bits
    }
}

/// Gaussian smoothing with a kernel about `size` points wide (`size / 2`
/// taps each side, sigma `size / 4`). Edges repeat the end values.
pub fn smooth(values: &[f64], size: usize) -> Vec<f64> {
    let half = size / 2;
    if half == 0 || values.is_empty() {
        return values.to_vec();
    }
    let sigma = size as f64 / 4.0;
    let kernel: Vec<f64> = (0..=2 * half)
        .map(|t| {
            let x = t as f64 - half as f64;
            (-x * x / (2.0 * sigma * sigma)).exp()
        })
        .collect();
    let norm: f64 = kernel.iter().sum();
    let last = values.len() as isize - 1;
    (0..values.len())
        .map(|i| {
            kernel
                .iter()
                .enumerate()
                .map(|(t, k)| {
                    let j = (i as isize + t as isize - half as isize).clamp(0, last);
                    k * values[j as usize]
                })
                .sum::<f64>()
                / norm
        })
        .collect()
}

/// Splits at sign changes of the first difference. Runs of zero
/// differences belong to the segment before them (or, at the start, to the
/// first segment). Neighbouring segments share their boundary point.
/// Cluster ids are left at 0.
pub fn segment(values: &[f64]) -> Vec<SegmentCode> {
    if values.len() < 2 {
        return vec![SegmentCode {
            start: 0,
            length_points: values.len().max(1),
            rise: 0.0,
            cluster_id: 0,
        }];
    }
    let signs: Vec<i8> = values
        .windows(2)
        .map(|p| {
            let d = p[1] - p[0];
            if d > 0.0 {
                1
            } else if d < 0.0 {
                -1
            } else {
                0
            }
        })
        .collect();
    let first = signs.iter().copied().find(|&s| s != 0).unwrap_or(0);
    let mut current = first;
    let effective: Vec<i8> = signs
        .iter()
        .map(|&s| {
            if s != 0 {
                current = s;
            }
            current
        })
        .collect();
    let mut out = Vec::new();
    let mut a = 0;
    for b in 0..effective.len() {
        if b + 1 == effective.len() || effective[b + 1] != effective[a] {
            out.push(SegmentCode {
                start: a,
                length_points: b - a + 2,
                rise: values[b + 1] - values[a],
                cluster_id: 0,
            });
            a = b + 1;
        }
    }
    out
}

fn zscore(xs: &mut [f64]) {
    let (m, s) = mean_std(xs);
    for x in xs {
        *x = if s > 0.0 { (*x - m) / s } else { 0.0 };
    }
}

/// Greedy left-to-right non-overlapping occurrences of a length-`len`
/// string among sorted candidate positions.
fn greedy(positions: &[usize], len: usize) -> Vec<usize> {
    let mut kept: Vec<usize> = Vec::new();
    for &p in positions {
        if kept.last().map_or(true, |&q| p >= q + len) {
            kept.push(p);
        }
    }
    kept
}

struct Choice {
    len: usize,
    occurrences: Vec<usize>,
    model: f64,
    data: f64,
}

/// The repeated substring (length >= 2, two non-overlapping occurrences)
/// minimizing model plus data bits, where the model spells the motif in
/// `log2 k` bits per symbol and the data is the string with each chosen
/// occurrence replaced by one escape symbol, `log2 (k + 1)` bits each.
fn best_substring(s: &[usize], k: usize) -> Option<Choice> {
    let n = s.len();
    let sym_bits = (k as f64).log2();
    let esc_bits = (k as f64 + 1.0).log2();
    let mut best: Option<Choice> = None;

    // groups of positions sharing their first `len` symbols, refined one
    // symbol at a time
    let mut groups: Vec<Vec<usize>> = {
        let mut by_pair: std::collections::BTreeMap<(usize, usize), Vec<usize>> = Default::default();
        for p in 0..n.saturating_sub(1) {
            by_pair.entry((s[p], s[p + 1])).or_default().push(p);
        }
        by_pair.into_values().collect()
    };
    let mut len = 2;
    while !groups.is_empty() {
        groups.retain(|g| greedy(g, len).len() >= 2);
        groups.sort_by_key(|g| g[0]);
        for g in &groups {
            let occ = greedy(g, len);
            let c = occ.len();
            let model = len as f64 * sym_bits;
            let data = (n - c * len + c) as f64 * esc_bits;
            if best.as_ref().map_or(true, |b| model + data < b.model + b.data) {
                best = Some(Choice {
                    len,
                    occurrences: occ,
                    model,
                    data,
                });
            }
        }
        let mut next = Vec::new();
        for g in &groups {
            let mut by_sym: std::collections::BTreeMap<usize, Vec<usize>> = Default::default();
            for &p in g {
                if p + len < n {
                    by_sym.entry(s[p + len]).or_default().push(p);
                }
            }
            next.extend(by_sym.into_values().filter(|v| v.len() >= 2));
        }
        groups = next;
        len += 1;
    }
    best
}

/// One motif per scale from the class string of smoothed segments. Scales
/// whose kernel is longer than the series are skipped with a warning; scales
/// without any repeated class substring yield nothing.
pub fn mdl_motifs(series: &TimeSeries, params: &MdlParams) -> Result<Vec<MdlMotif>> {
    if params.scales == 0 {
        return invalid("at least one scale is needed");
    }
    if params.k < 2 {
        return invalid(format!("k must be at least 2, got {}", params.k));
    }
    let mut out = Vec::new();
    for scale in 1..=params.scales {
        let size = 1usize.checked_shl(scale as u32).unwrap_or(usize::MAX);
        if size > series.len() {
            log::warn!(
                "skipping scale {scale}: kernel of {size} points exceeds series length {}",
                series.len()
            );
            continue;
        }
        let smoothed = smooth(series.values(), size);
        let mut segs = segment(&smoothed);
        let mut lengths: Vec<f64> = segs.iter().map(|g| g.length_points as f64).collect();
        let mut rises: Vec<f64> = segs.iter().map(|g| g.rise).collect();
        zscore(&mut lengths);
        zscore(&mut rises);
        let points: Vec<[f64; 2]> = lengths.iter().zip(&rises).map(|(&l, &r)| [l, r]).collect();
        let (labels, k) = kmeans(&points, params.k, params.seed)?;
        for (g, &l) in segs.iter_mut().zip(&labels) {
            g.cluster_id = l;
        }
        let Some(choice) = best_substring(&labels, k) else {
            continue;
        };
        let baseline = segs.len() as f64 * (k as f64 + 1.0).log2();
        let starts: Vec<usize> = choice.occurrences.iter().map(|&p| segs[p].start).collect();
        let span = choice
            .occurrences
            .iter()
            .map(|&p| {
                let last = &segs[p + choice.len - 1];
                last.start + last.length_points - segs[p].start
            })
            .max()
            .unwrap_or(2);
        let gain = 1.0 - (choice.model + choice.data) / baseline;
        out.push(MdlMotif {
            motif: Motif::new(starts, span.max(2), MotifSource::Mdl, gain)?,
            scale,
            model_bits: choice.model,
            data_bits: choice.data,
            baseline_bits: baseline,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use rand_distr::StandardNormal;

    #[test]
    fn smoothing_keeps_constants_and_mass() {
        assert_eq!(smooth(&[2.0; 10], 8), vec![2.0; 10]);
        let x = [0.0, 0.0, 0.0, 8.0, 0.0, 0.0, 0.0];
        let y = smooth(&x, 4);
        assert!((y.iter().sum::<f64>() - 8.0).abs() < 1e-12);
        assert!(y[3] < 8.0 && y[2] > 0.0 && (y[2] - y[4]).abs() < 1e-12);
    }

    #[test]
    fn segments_follow_sign_changes() {
        let segs = segment(&[0.0, 0.0, 1.0, 2.0, 2.0, 1.0, 3.0]);
        let summary: Vec<(usize, usize, f64)> = segs.iter().map(|g| (g.start, g.length_points, g.rise)).collect();
        assert_eq!(summary, vec![(0, 5, 2.0), (4, 2, -1.0), (5, 2, 2.0)]);
        assert_eq!(segment(&[1.0; 5]).len(), 1);
        assert_eq!(segment(&[1.0; 5])[0].length_points, 5);
    }

    /// Brute force over every substring: the cheapest repeated one.
    fn oracle(s: &[usize], k: usize) -> Option<f64> {
        let mut best: Option<f64> = None;
        for len in 2..=s.len() / 2 {
            for p in 0..=s.len() - len {
                let occ: Vec<usize> = (0..=s.len() - len).filter(|&q| s[q..q + len] == s[p..p + len]).collect();
                let c = greedy(&occ, len).len();
                if c >= 2 {
                    let cost = len as f64 * (k as f64).log2() + (s.len() - c * len + c) as f64 * (k as f64 + 1.0).log2();
                    best = Some(best.map_or(cost, |b: f64| b.min(cost)));
                }
            }
        }
        best
    }

    #[test]
    fn substring_search_matches_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..100 {
            let k = rng.gen_range(2..5);
            let len = rng.gen_range(0..40);
            let s: Vec<usize> = (0..len).map(|_| rng.gen_range(0..k)).collect();
            let got = best_substring(&s, k).map(|c| c.model + c.data);
            match (got, oracle(&s, k)) {
                (Some(a), Some(b)) => assert!((a - b).abs() < 1e-9, "{s:?}"),
                (None, None) => {}
                other => panic!("{other:?} for {s:?}"),
            }
            if let Some(c) = best_substring(&s, k) {
                assert!(c.model + c.data < len as f64 * (k as f64 + 1.0).log2());
            }
        }
    }

    #[test]
    fn square_wave_motif_tiles() {
        let x: Vec<f64> = (0..512).map(|i| if (i / 16) % 2 == 0 { 1.0 } else { -1.0 }).collect();
        let s = TimeSeries::new(x).unwrap();
        let motifs = mdl_motifs(
            &s,
            &MdlParams {
                scales: 5,
                k: 3,
                seed: 1,
            },
        )
        .unwrap();
        assert_eq!(motifs.len(), 5);
        let tiling = motifs.iter().any(|m| {
            let o = m.motif.occurrences();
            let covered = o.len() * m.motif.length();
            o.windows(2).all(|p| (p[1] - p[0]) % 32 == 0) && covered >= 400
        });
        assert!(tiling, "{motifs:#?}");
        assert!(motifs.iter().all(|m| m.motif.score() > 0.3));
    }

    #[test]
    fn noise_gain_is_reported() {
        // segment rises alternate in sign, so even noise strings compress
        // somewhat; the gain is reported for the caller to judge
        for seed in 0..5 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let x: Vec<f64> = (0..2000).map(|_| rng.sample(StandardNormal)).collect();
            let s = TimeSeries::new(x).unwrap();
            let motifs = mdl_motifs(&s, &MdlParams { scales: 4, k: 4, seed }).unwrap();
            assert_eq!(motifs.len(), 4);
            for m in motifs {
                assert!(m.total_bits() < m.baseline_bits);
                assert!((0.0..1.0).contains(&m.motif.score()));
                assert!(m.motif.count() >= 2);
            }
        }
    }

    #[test]
    fn constant_and_short_series() {
        let s = TimeSeries::new(vec![3.0; 300]).unwrap();
        assert!(mdl_motifs(&s, &MdlParams::default()).unwrap().is_empty());
        let short = TimeSeries::new((0..10).map(|i| (i as f64).sin()).collect()).unwrap();
        // only scales 1..=3 fit
        let got = mdl_motifs(&short, &MdlParams::default()).unwrap();
        assert!(got.iter().all(|m| m.scale <= 3));
        assert!(mdl_motifs(&s, &MdlParams { k: 1, ..Default::default() }).is_err());
        assert!(mdl_motifs(&s, &MdlParams { scales: 0, ..Default::default() }).is_err());
    }
}
