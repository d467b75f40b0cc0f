use crate::anomaly::SequiturModel;
use crate::error::Result;
use crate::sax::SaxConfig;
use crate::series::TimeSeries;

use super::{post_process_motifs, Motif, MotifSource};

/// Motifs from the Sequitur grammar of the series' SAX words: every rule is
/// mapped back to the points its expansions cover. Rules are ranked by
/// height, then by expansion length, and the best `top_k` survivors of
/// [`post_process_motifs`] with at least two occurrences are returned.
pub fn grammar_motifs(series: &TimeSeries, cfg: &SaxConfig, top_k: usize) -> Result<Vec<Motif>> {
    let model = SequiturModel::build(series, cfg, false)?;
    grammar_motifs_from_model(&model, series, top_k)
}

/// As [`grammar_motifs`], reusing an already inferred grammar.
pub fn grammar_motifs_from_model(model: &SequiturModel, series: &TimeSeries, top_k: usize) -> Result<Vec<Motif>> {
    let grammar = model.grammar();
    let heights = grammar.rule_heights()?;
    let lengths = grammar.expansion_lengths()?;
    let occurrences = grammar.rule_occurrences()?;
    let w = model.config().window_size;

    let mut ranked: Vec<usize> = (0..grammar.rules().len()).collect();
    ranked.sort_by(|&a, &b| {
        heights[b]
            .cmp(&heights[a])
            .then(lengths[b].cmp(&lengths[a]))
            .then(a.cmp(&b))
    });
    let mut raw = Vec::with_capacity(ranked.len());
    for r in ranked {
        let mut starts = Vec::new();
        let mut length = 0;
        for occ in &occurrences[r] {
            let first = model.token_starts()[occ.start];
            let last_window = model.token_end(occ.start + lengths[r] - 1) - 1;
            starts.push(first);
            length = length.max(last_window + w - first);
        }
        raw.push(Motif::new(
            starts,
            length.max(2),
            MotifSource::GrammarMotif,
            f64::from(heights[r]),
        )?);
    }

    let mut out: Vec<Motif> = post_process_motifs(&raw, series, model.config())
        .into_iter()
        .filter(|m| m.count() >= 2)
        .collect();
    out.sort_by(|a, b| {
        b.score()
            .total_cmp(&a.score())
            .then(b.length().cmp(&a.length()))
            .then(b.count().cmp(&a.count()))
    });
    out.truncate(top_k);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use rand_distr::StandardNormal;

    #[test]
    fn repeated_pattern_tiles_at_its_period() {
        let pattern = [0.0, 2.0, 1.0, 3.0, -1.0, 0.5, 2.5, -2.0, 1.5, 0.0, -0.5, 1.0];
        let p = pattern.len();
        let x: Vec<f64> = (0..p * 8).map(|i| pattern[i % p]).collect();
        let s = TimeSeries::new(x).unwrap();
        let cfg = SaxConfig::new(4, 4, 12).unwrap();
        let motifs = grammar_motifs(&s, &cfg, 3).unwrap();
        assert!(!motifs.is_empty());
        let top = &motifs[0];
        assert!(top.count() >= 2, "{top:?}");
        let phase = top.occurrences()[0] % p;
        assert!(top.occurrences().iter().all(|o| o % p == phase), "{top:?}");
    }

    #[test]
    fn noise_has_no_stable_motif() {
        let mut total = 0;
        for seed in 0..20 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let x: Vec<f64> = (0..600).map(|_| rng.sample(StandardNormal)).collect();
            let s = TimeSeries::new(x).unwrap();
            let cfg = SaxConfig::new(4, 8, 32).unwrap();
            let motifs = grammar_motifs(&s, &cfg, 5).unwrap();
            for m in &motifs {
                assert!(m.count() <= 2, "{m:?}");
                assert!(m.score() <= 2.0, "{m:?}");
            }
            total += motifs.len();
        }
        assert!(total <= 20, "{total}");
    }

    #[test]
    fn ramp_gives_nothing() {
        let s = TimeSeries::new((0..400).map(f64::from).collect()).unwrap();
        let cfg = SaxConfig::new(4, 4, 16).unwrap();
        assert!(grammar_motifs(&s, &cfg, 5).unwrap().is_empty());
    }
}
