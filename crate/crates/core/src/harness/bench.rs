use std::io::Write;
use std::time::{Duration, Instant};

use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::series::{mean_std, TimeSeries};

use super::run::{run_with_timeout, Algorithm, RunConfig, SeriesMeta};
use super::synth::{synth, SynthKind, SynthSpec};

/// What to time.
#[derive(Debug, Clone)]
pub struct BenchOptions {
    /// Series lengths, strictly ascending.
    pub sizes: Vec<usize>,
    pub algorithms: Vec<Algorithm>,
    pub reps: usize,
    /// Repetitions for discord searches at the largest size; these can take
    /// far longer than everything else together.
    pub slow_reps: usize,
    /// Per-run budget. A run over budget is recorded, and larger sizes of
    /// the same algorithm are skipped.
    pub timeout: Option<Duration>,
    /// Knobs shared by every run; `algorithm` is overridden.
    pub base: RunConfig,
    /// Input generator; `len` is overridden per size.
    pub input: SynthSpec,
}

impl Default for BenchOptions {
    fn default() -> Self {
        Self {
            sizes: vec![43_200, 86_400],
            algorithms: vec![Algorithm::Sequitur, Algorithm::ChaosGame, Algorithm::HotSax],
            reps: 5,
            slow_reps: 1,
            timeout: Some(Duration::from_secs(1800)),
            base: RunConfig {
                window_size: 120,
                lead: 100,
                lag: 200,
                ..Default::default()
            },
            // one point per minute with a daily cycle
            input: SynthSpec {
                kind: SynthKind::Sine,
                period: 1440,
                noise: 0.1,
                seed: 7,
                ..Default::default()
            },
        }
    }
}

/// Timings of one algorithm at one size.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchRow {
    pub algorithm: Algorithm,
    pub size: usize,
    pub label: String,
    pub repetitions: usize,
    /// `None` when no run finished.
    pub mean_seconds: Option<f64>,
    /// Sample standard deviation; `None` below two finished runs.
    pub std_seconds: Option<f64>,
    pub timed_out: bool,
}

/// Mean time at one size over the mean time at the previous size.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScalingRatio {
    pub algorithm: Algorithm,
    pub from: usize,
    pub to: usize,
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchReport {
    pub rows: Vec<BenchRow>,
    pub ratios: Vec<ScalingRatio>,
}

/// Short label of a series length: one and two months at one point per
/// minute read `44k` and `88k`, anything else its rounded thousands.
pub fn size_label(size: usize) -> String {
    match size {
        43_200 => "44k".into(),
        86_400 => "88k".into(),
        s if s >= 1000 => format!("{}k", (s + 500) / 1000),
        s => s.to_string(),
    }
}

/// Times every algorithm on the same synthetic input per size. Each
/// algorithm first runs once, untimed, on the smallest size. Runs are
/// serial.
pub fn run_bench(opts: &BenchOptions) -> Result<BenchReport> {
    if opts.sizes.is_empty() || opts.sizes.windows(2).any(|p| p[0] >= p[1]) {
        return invalid("bench sizes must be non-empty and strictly ascending");
    }
    if opts.reps == 0 || opts.slow_reps == 0 {
        return invalid("repetitions must be at least 1");
    }
    let inputs: Vec<TimeSeries> = opts
        .sizes
        .iter()
        .map(|&len| synth(&SynthSpec { len, ..opts.input.clone() }).map(|s| s.series))
        .collect::<Result<_>>()?;
    let largest = *opts.sizes.last().unwrap();

    let mut rows = Vec::new();
    for &algorithm in &opts.algorithms {
        let cfg = RunConfig {
            algorithm,
            timeout_s: opts.timeout.map(|t| t.as_secs_f64()),
            timing: false,
            ..opts.base.clone()
        };
        cfg.validate()?;
        match run_with_timeout(&cfg, &inputs[0], SeriesMeta::default()) {
            Ok(_) | Err(Error::Timeout(_)) => {}
            Err(e) => return Err(e),
        }
        let mut given_up = false;
        for (&size, series) in opts.sizes.iter().zip(&inputs) {
            let slow = matches!(algorithm, Algorithm::HotSax | Algorithm::Brute) && size == largest;
            let reps = if slow { opts.slow_reps } else { opts.reps };
            let mut times = Vec::new();
            let mut timed_out = given_up;
            for _ in 0..reps {
                if timed_out {
                    break;
                }
                let t = Instant::now();
                match run_with_timeout(&cfg, series, SeriesMeta::default()) {
                    Ok(_) => times.push(t.elapsed().as_secs_f64()),
                    Err(Error::Timeout(_)) => {
                        log::warn!("{algorithm} at {size} points timed out");
                        timed_out = true;
                    }
                    Err(e) => return Err(e),
                }
            }
            given_up = timed_out;
            let (mean, std) = summarize(&times);
            rows.push(BenchRow {
                algorithm,
                size,
                label: size_label(size),
                repetitions: times.len(),
                mean_seconds: mean,
                std_seconds: std,
                timed_out,
            });
        }
    }
    let ratios = rows
        .windows(2)
        .filter(|p| p[0].algorithm == p[1].algorithm)
        .filter_map(|p| {
            Some(ScalingRatio {
                algorithm: p[0].algorithm,
                from: p[0].size,
                to: p[1].size,
                ratio: p[1].mean_seconds? / p[0].mean_seconds?,
            })
        })
        .collect();
    Ok(BenchReport { rows, ratios })
}

fn summarize(times: &[f64]) -> (Option<f64>, Option<f64>) {
    match times.len() {
        0 => (None, None),
        1 => (Some(times[0]), None),
        n => {
            let (mean, pop) = mean_std(times);
            (Some(mean), Some(pop * (n as f64 / (n - 1) as f64).sqrt()))
        }
    }
}

impl BenchReport {
    pub fn row(&self, algorithm: Algorithm, size: usize) -> Option<&BenchRow> {
        self.rows.iter().find(|r| r.algorithm == algorithm && r.size == size)
    }

    /// One row per (algorithm, size), then the scaling ratios as comments.
    pub fn write_csv(&self, mut out: impl Write) -> Result<()> {
        let opt = |v: Option<f64>| v.map(|x| format!("{x:.6}")).unwrap_or_default();
        writeln!(out, "algorithm,size,label,repetitions,mean_seconds,std_seconds,timed_out")?;
        for r in &self.rows {
            writeln!(
                out,
                "{},{},{},{},{},{},{}",
                r.algorithm,
                r.size,
                r.label,
                r.repetitions,
                opt(r.mean_seconds),
                opt(r.std_seconds),
                r.timed_out
            )?;
        }
        for r in &self.ratios {
            writeln!(
                out,
                "# ratio {} {}/{}: {:.3}",
                r.algorithm,
                size_label(r.to),
                size_label(r.from),
                r.ratio
            )?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn labels() {
        assert_eq!(size_label(43_200), "44k");
        assert_eq!(size_label(86_400), "88k");
        assert_eq!(size_label(20_000), "20k");
        assert_eq!(size_label(999), "999");
    }

    #[test]
    fn small_bench() {
        let opts = BenchOptions {
            sizes: vec![2000, 4000],
            algorithms: vec![Algorithm::Sequitur, Algorithm::ChaosGame],
            reps: 3,
            base: RunConfig {
                window_size: 60,
                lead: 50,
                lag: 100,
                ..Default::default()
            },
            ..Default::default()
        };
        let r = run_bench(&opts).unwrap();
        assert_eq!(r.rows.len(), 4);
        assert!(r.rows.iter().all(|row| row.repetitions == 3 && row.std_seconds.is_some()));
        assert_eq!(r.ratios.len(), 2);
        let mut buf = Vec::new();
        r.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 1 + 4 + 2);
        assert!(text.contains("# ratio sequitur 4k/2k"));
    }

    #[test]
    fn timeouts_are_recorded_not_fatal() {
        let opts = BenchOptions {
            sizes: vec![20_000, 40_000],
            algorithms: vec![Algorithm::Brute],
            reps: 2,
            timeout: Some(Duration::from_millis(20)),
            ..Default::default()
        };
        let r = run_bench(&opts).unwrap();
        assert!(r.rows.iter().all(|row| row.timed_out && row.mean_seconds.is_none()));
        assert!(r.ratios.is_empty());
    }

    #[test]
    fn rejects_unordered_sizes() {
        let opts = BenchOptions {
            sizes: vec![4000, 2000],
            ..Default::default()
        };
        assert!(run_bench(&opts).is_err());
    }
}
