use std::f64::consts::TAU;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::series::TimeSeries;

/// Shapes the synthetic generator can produce.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SynthKind {
    Sine,
    Square,
    Noise,
    Walk,
    /// A sine with one period replaced by a flat or inverted copy.
    PlantedDiscord,
    /// Low noise with one pattern pasted at several places.
    PlantedMotif,
    /// A sine whose noise level changes at `step_at`.
    Step,
    /// One point per minute: a daily load curve, weaker at weekends.
    Weekly,
}

/// How the planted discord alters its period.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DiscordStyle {
    #[default]
    Flat,
    Inverted,
}

/// A block of `len` points raised by `height`, added on top of any kind.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Excursion {
    pub at: usize,
    pub len: usize,
    pub height: f64,
}

/// Everything needed to regenerate a synthetic series.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SynthSpec {
    pub kind: SynthKind,
    pub len: usize,
    /// Period in points (a week for `weekly`).
    pub period: usize,
    pub amplitude: f64,
    /// Standard deviation of the additive Gaussian noise.
    pub noise: f64,
    pub seed: u64,
    /// Discord start; defaults to the period boundary nearest the middle.
    pub plant_at: Option<usize>,
    pub discord_style: DiscordStyle,
    /// Motif pattern length in points.
    pub motif_len: usize,
    /// Number of motif copies.
    pub plants: usize,
    /// Per-copy noise added to the motif pattern (0 for exact copies).
    /// Background noise does not reach the copies.
    pub jitter: f64,
    /// Variance step position; defaults to the middle.
    pub step_at: Option<usize>,
    /// Noise level after the step as a multiple of `noise`.
    pub step_ratio: f64,
    pub excursion: Option<Excursion>,
}

impl Default for SynthSpec {
    fn default() -> Self {
        Self {
            kind: SynthKind::Sine,
            len: 2000,
            period: 100,
            amplitude: 1.0,
            noise: 0.05,
            seed: 0,
            plant_at: None,
            discord_style: DiscordStyle::Flat,
            motif_len: 20,
            plants: 5,
            jitter: 0.0,
            step_at: None,
            step_ratio: 10.0,
            excursion: None,
        }
    }
}

/// Ground truth of a generated series.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SynthMeta {
    pub kind: SynthKind,
    pub seed: u64,
    /// Discord start, motif starts or step index, depending on the kind.
    pub planted: Vec<usize>,
    /// Points per planted feature (0 for a step).
    pub planted_len: usize,
    pub excursion: Option<Excursion>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Synth {
    pub series: TimeSeries,
    pub meta: SynthMeta,
}

/// Generates the series described by `spec`. The output depends only on
/// `spec` (including its seed).
pub fn synth(spec: &SynthSpec) -> Result<Synth> {
    if spec.len == 0 {
        return invalid("synthetic series length must be positive");
    }
    if !(spec.noise >= 0.0 && spec.noise.is_finite()) || !spec.amplitude.is_finite() {
        return invalid("noise must be a finite non-negative value and amplitude finite");
    }
    let needs_period = !matches!(spec.kind, SynthKind::Noise | SynthKind::Walk | SynthKind::PlantedMotif);
    if needs_period && spec.period < 2 {
        return invalid(format!("period must be at least 2, got {}", spec.period));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut gauss = move |sd: f64| sd * rng.sample::<f64, _>(StandardNormal);
    let n = spec.len;
    let p = spec.period as f64;
    let sine = |i: usize| spec.amplitude * (TAU * i as f64 / p).sin();

    let mut planted = Vec::new();
    let mut planted_len = 0;
    let mut x: Vec<f64> = match spec.kind {
        SynthKind::Sine => (0..n).map(|i| sine(i) + gauss(spec.noise)).collect(),
        SynthKind::Square => (0..n)
            .map(|i| {
                let s = if (i % spec.period) < spec.period / 2 { 1.0 } else { -1.0 };
                spec.amplitude * s + gauss(spec.noise)
            })
            .collect(),
        SynthKind::Noise => (0..n).map(|_| gauss(spec.noise)).collect(),
        SynthKind::Walk => {
            let mut v = 0.0;
            (0..n)
                .map(|_| {
                    v += gauss(spec.noise);
                    v
                })
                .collect()
        }
        SynthKind::PlantedDiscord => {
            if n < 3 * spec.period {
                return invalid("planted discord needs at least three periods");
            }
            let at = spec
                .plant_at
                .unwrap_or((n / 2) / spec.period * spec.period);
            if at + spec.period > n {
                return invalid(format!("discord at {at} does not fit in {n} points"));
            }
            planted = vec![at];
            planted_len = spec.period;
            (0..n)
                .map(|i| {
                    let base = if (at..at + spec.period).contains(&i) {
                        match spec.discord_style {
                            DiscordStyle::Flat => 0.0,
                            DiscordStyle::Inverted => -sine(i),
                        }
                    } else {
                        sine(i)
                    };
                    base + gauss(spec.noise)
                })
                .collect()
        }
        SynthKind::PlantedMotif => {
            let m = spec.motif_len;
            if m < 2 || spec.plants == 0 {
                return invalid("planted motif needs a pattern of at least 2 points and one copy");
            }
            // copies sit in equal slots, each shifted by a random offset
            let slot = n / spec.plants;
            if slot < 2 * m {
                return invalid(format!(
                    "{} copies of {m} points need at least {} points",
                    spec.plants,
                    2 * m * spec.plants
                ));
            }
            let mut v = 0.0;
            let mut pattern: Vec<f64> = (0..m)
                .map(|_| {
                    v += gauss(1.0);
                    v
                })
                .collect();
            let (pm, ps) = crate::series::mean_std(&pattern);
            for q in &mut pattern {
                *q = spec.amplitude * (*q - pm) / ps.max(1e-12);
            }
            let mut x: Vec<f64> = (0..n).map(|_| gauss(spec.noise)).collect();
            for k in 0..spec.plants {
                let offset = (gauss(1.0).abs() * 1e6) as usize % (slot - m + 1);
                let at = k * slot + offset;
                for (t, q) in pattern.iter().enumerate() {
                    x[at + t] = q + gauss(spec.jitter);
                }
                planted.push(at);
            }
            planted_len = m;
            x
        }
        SynthKind::Step => {
            let at = spec.step_at.unwrap_or(n / 2);
            if at >= n {
                return invalid(format!("step at {at} is outside the series"));
            }
            planted = vec![at];
            (0..n)
                .map(|i| {
                    let sd = if i < at { spec.noise } else { spec.noise * spec.step_ratio };
                    sine(i) + gauss(sd)
                })
                .collect()
        }
        SynthKind::Weekly => {
            let day = (spec.period / 7).max(1);
            (0..n)
                .map(|i| {
                    let weekday = (i % spec.period) / day;
                    let phase = (i % day) as f64 / day as f64;
                    // smooth daily swing peaking at noon, lowest at midnight
                    let bump = 0.5 - 0.5 * (TAU * phase).cos();
                    let scale = if weekday >= 5 { 0.3 } else { 1.0 };
                    spec.amplitude * (0.2 + scale * bump) + gauss(spec.noise)
                })
                .collect()
        }
    };

    if let Some(e) = spec.excursion {
        if e.at + e.len > n {
            return invalid(format!("excursion {}..{} exceeds {n} points", e.at, e.at + e.len));
        }
        for v in &mut x[e.at..e.at + e.len] {
            *v += e.height;
        }
    }
    Ok(Synth {
        series: TimeSeries::new(x)?,
        meta: SynthMeta {
            kind: spec.kind,
            seed: spec.seed,
            planted,
            planted_len,
            excursion: spec.excursion,
        },
    })
}
