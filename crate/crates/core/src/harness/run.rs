use std::fmt;
use std::io::Write;
use std::str::FromStr;
use std::sync::mpsc;
use std::thread;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::anomaly::{
    chaos_game_score, density_to_score, threshold_alarms, ChaosParams, DiscordFinder, DiscordResult,
    ScoreSeries, SequiturModel, DEFAULT_K_SIGMA,
};
use crate::error::{Error, Result};
use crate::motif::{
    approximate_motifs, grammar_motifs_from_model, mdl_motifs, motif_tracking_with, MdlParams, Motif,
    PairSearch, TrackingParams,
};
use crate::sax::SaxConfig;
use crate::series::TimeSeries;
use crate::windows::DistanceMode;

use super::ingest::{ingest_csv, IngestOptions};

/// The algorithms the harness can run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Algorithm {
    #[serde(rename = "brute")]
    Brute,
    #[serde(rename = "hotsax")]
    HotSax,
    #[serde(rename = "sequitur")]
    Sequitur,
    #[serde(rename = "chaosgame")]
    ChaosGame,
    #[serde(rename = "mk")]
    Mk,
    #[serde(rename = "grammar-motif")]
    GrammarMotif,
    #[serde(rename = "tracking")]
    Tracking,
    #[serde(rename = "approx-motif")]
    ApproxMotif,
    #[serde(rename = "mdl")]
    Mdl,
}

impl Algorithm {
    pub const ALL: [Algorithm; 9] = [
        Algorithm::Brute,
        Algorithm::HotSax,
        Algorithm::Sequitur,
        Algorithm::ChaosGame,
        Algorithm::Mk,
        Algorithm::GrammarMotif,
        Algorithm::Tracking,
        Algorithm::ApproxMotif,
        Algorithm::Mdl,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Brute => "brute",
            Algorithm::HotSax => "hotsax",
            Algorithm::Sequitur => "sequitur",
            Algorithm::ChaosGame => "chaosgame",
            Algorithm::Mk => "mk",
            Algorithm::GrammarMotif => "grammar-motif",
            Algorithm::Tracking => "tracking",
            Algorithm::ApproxMotif => "approx-motif",
            Algorithm::Mdl => "mdl",
        }
    }

    /// Whether the algorithm yields a per-point score (and alarms).
    pub fn is_scoring(self) -> bool {
        matches!(self, Algorithm::Sequitur | Algorithm::ChaosGame)
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Algorithm::ALL
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or_else(|| {
                let names: Vec<_> = Algorithm::ALL.iter().map(|a| a.name()).collect();
                Error::Config(format!("unknown algorithm {s:?}; expected one of {}", names.join(", ")))
            })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Json,
    /// Aligned `index,value,score,alarm_flag` columns for plotting.
    Csv,
}

/// Every knob of one run. The resolved value is echoed into the report so
/// that the run can be repeated.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RunConfig {
    pub algorithm: Algorithm,
    pub alpha: usize,
    pub word_size: usize,
    pub window_size: usize,
    /// Chaos Game gram level.
    pub level: usize,
    /// Chaos Game detection window D, in words.
    pub lead: usize,
    /// Chaos Game reference window L, in words.
    pub lag: usize,
    pub stride: usize,
    /// Smallest Pearson correlation inside an approximate motif.
    pub r_min: f64,
    /// Motif Tracking match radius.
    pub r: f64,
    pub symbol_size: usize,
    pub scales: usize,
    pub k: usize,
    pub top_k: usize,
    pub num_refs: usize,
    pub k_sigma: f64,
    pub seed: u64,
    pub distance: DistanceMode,
    pub collapse_runs: bool,
    pub dump_grammar: bool,
    pub input: Option<String>,
    pub output: Option<String>,
    pub format: OutputFormat,
    pub ingest: IngestOptions,
    /// Wall-clock budget in seconds.
    pub timeout_s: Option<f64>,
    /// Record elapsed time. Off makes reports byte-identical across runs.
    pub timing: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        let chaos = ChaosParams::default();
        Self {
            algorithm: Algorithm::Sequitur,
            alpha: 4,
            word_size: 4,
            window_size: 100,
            level: chaos.level,
            lead: chaos.lead,
            lag: chaos.lag,
            stride: chaos.stride,
            r_min: 0.9,
            r: 0.5,
            symbol_size: 1,
            scales: 8,
            k: 4,
            top_k: 5,
            num_refs: 5,
            k_sigma: DEFAULT_K_SIGMA,
            seed: 0,
            distance: DistanceMode::ZNormalized,
            collapse_runs: false,
            dump_grammar: false,
            input: None,
            output: None,
            format: OutputFormat::Json,
            ingest: IngestOptions::default(),
            timeout_s: None,
            timing: false,
        }
    }
}

impl RunConfig {
    pub fn sax(&self) -> SaxConfig {
        SaxConfig {
            alpha: self.alpha,
            word_size: self.word_size,
            window_size: self.window_size,
        }
    }

    pub fn chaos(&self) -> ChaosParams {
        ChaosParams {
            level: self.level,
            lead: self.lead,
            lag: self.lag,
            stride: self.stride,
        }
    }

    pub fn timeout(&self) -> Option<Duration> {
        self.timeout_s.map(Duration::from_secs_f64)
    }

    /// Checks every knob the selected algorithm reads. All failures are
    /// [`Error::Config`].
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        self.sax().validate().map_err(to_config)?;
        match self.algorithm {
            Algorithm::ChaosGame => self.chaos().validate(&self.sax())?,
            Algorithm::Mk if self.num_refs == 0 => return bad("refs must be at least 1".into()),
            Algorithm::Tracking if !(self.r > 0.0 && self.r.is_finite()) => {
                return bad(format!("r must be positive, got {}", self.r))
            }
            Algorithm::Tracking if self.symbol_size == 0 => return bad("symbol size must be at least 1".into()),
            Algorithm::ApproxMotif if !(-1.0..=1.0).contains(&self.r_min) => {
                return bad(format!("rmin must lie in [-1, 1], got {}", self.r_min))
            }
            Algorithm::Mdl if self.scales == 0 || self.k == 0 => {
                return bad(format!("scales and k must be at least 1, got {} and {}", self.scales, self.k))
            }
            _ => {}
        }
        if self.algorithm.is_scoring() && !(self.k_sigma > 0.0 && self.k_sigma.is_finite()) {
            return bad(format!("ksigma must be positive, got {}", self.k_sigma));
        }
        if self.top_k == 0 {
            return bad("topk must be at least 1".into());
        }
        if let Some(t) = self.timeout_s {
            if !(t > 0.0 && t.is_finite()) {
                return bad(format!("timeout must be positive, got {t}"));
            }
        }
        Ok(())
    }
}

fn to_config(e: Error) -> Error {
    match e {
        Error::InvalidInput(m) => Error::Config(m),
        other => other,
    }
}

/// Where the analysed series came from.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct SeriesMeta {
    pub source: String,
    pub length: usize,
    pub start_time: Option<f64>,
    pub step_seconds: Option<f64>,
    pub segments: usize,
    pub rejected_rows: usize,
    pub interpolated_points: usize,
}

impl SeriesMeta {
    pub fn of(series: &TimeSeries, source: impl Into<String>) -> Self {
        Self {
            source: source.into(),
            length: series.len(),
            start_time: series.start_time(),
            step_seconds: series.step_seconds(),
            segments: 1,
            ..Default::default()
        }
    }
}

/// A motif plus, for MDL motifs, its code lengths.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MotifEntry {
    #[serde(flatten)]
    pub motif: Motif,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mdl: Option<MdlBits>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MdlBits {
    pub scale: usize,
    pub model_bits: f64,
    pub data_bits: f64,
    pub baseline_bits: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Timing {
    pub seconds: f64,
}

/// Output of one detector run. Fields serialize in declaration order.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub config: RunConfig,
    pub series_meta: SeriesMeta,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub scores: Option<ScoreSeries>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alarms: Option<Vec<usize>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub discord: Option<DiscordResult>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub motifs: Option<Vec<MotifEntry>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grammar: Option<String>,
    pub timing: Option<Timing>,
}

/// Ingests `cfg.input` and keeps the longest gap-free segment.
pub fn load_input(cfg: &RunConfig) -> Result<(TimeSeries, SeriesMeta)> {
    let Some(path) = &cfg.input else {
        return Err(Error::Config("no input file given".into()));
    };
    let got = ingest_csv(path, &cfg.ingest)?;
    if got.segments.len() > 1 {
        log::warn!(
            "{} split into {} segments; analysing the longest",
            path,
            got.segments.len()
        );
    }
    let series = got.longest().clone();
    let meta = SeriesMeta {
        segments: got.segments.len(),
        rejected_rows: got.rejected_rows,
        interpolated_points: got.interpolated_points,
        ..SeriesMeta::of(&series, path.clone())
    };
    Ok((series, meta))
}

/// Validates `cfg` and runs the selected algorithm on `series`.
///
/// Discord searches honour the timeout cooperatively. Use
/// [`run_with_timeout`] to bound the other algorithms.
pub fn run_detector(cfg: &RunConfig, series: &TimeSeries, meta: SeriesMeta) -> Result<Report> {
    cfg.validate()?;
    let started = Instant::now();
    let sax = cfg.sax();
    let mut report = Report {
        config: cfg.clone(),
        series_meta: meta,
        scores: None,
        alarms: None,
        discord: None,
        motifs: None,
        grammar: None,
        timing: None,
    };
    let plain = |ms: Vec<Motif>| Some(ms.into_iter().map(|motif| MotifEntry { motif, mdl: None }).collect());

    match cfg.algorithm {
        Algorithm::Brute | Algorithm::HotSax => {
            let mut finder = DiscordFinder::new(series, cfg.window_size)?.distance_mode(cfg.distance);
            if let Some(t) = cfg.timeout() {
                finder = finder.time_limit(t);
            }
            let (d, _) = if cfg.algorithm == Algorithm::Brute {
                finder.brute_force()?
            } else {
                finder.hot_sax(cfg.alpha, cfg.word_size, cfg.seed)?
            };
            report.discord = Some(d);
        }
        Algorithm::Sequitur => {
            let model = SequiturModel::build(series, &sax, cfg.collapse_runs)?;
            report.scores = Some(sequitur_score(&model)?);
            if cfg.dump_grammar {
                report.grammar = Some(dump(&model));
            }
        }
        Algorithm::ChaosGame => {
            report.scores = Some(chaos_game_score(series, &sax, &cfg.chaos())?);
        }
        Algorithm::Mk => {
            let (m, _) = PairSearch::new(series, cfg.window_size)?
                .distance_mode(cfg.distance)
                .mk(cfg.num_refs, cfg.seed)?;
            report.motifs = plain(vec![m]);
        }
        Algorithm::GrammarMotif => {
            let model = SequiturModel::build(series, &sax, cfg.collapse_runs)?;
            report.motifs = plain(grammar_motifs_from_model(&model, series, cfg.top_k)?);
            if cfg.dump_grammar {
                report.grammar = Some(dump(&model));
            }
        }
        Algorithm::Tracking => {
            let params = TrackingParams {
                alpha: cfg.alpha,
                r: cfg.r,
                symbol_size: cfg.symbol_size,
            };
            let mut ms = motif_tracking_with(series, &params, |_, _| {})?;
            ms.truncate(cfg.top_k);
            report.motifs = plain(ms);
        }
        Algorithm::ApproxMotif => {
            let mut ms = approximate_motifs(series, &sax, cfg.r_min)?;
            ms.truncate(cfg.top_k);
            report.motifs = plain(ms);
        }
        Algorithm::Mdl => {
            let params = MdlParams {
                scales: cfg.scales,
                k: cfg.k,
                seed: cfg.seed,
            };
            let ms = mdl_motifs(series, &params)?;
            report.motifs = Some(
                ms.into_iter()
                    .map(|m| MotifEntry {
                        mdl: Some(MdlBits {
                            scale: m.scale,
                            model_bits: m.model_bits,
                            data_bits: m.data_bits,
                            baseline_bits: m.baseline_bits,
                        }),
                        motif: m.motif,
                    })
                    .collect(),
            );
        }
    }
    if let Some(scores) = &report.scores {
        report.alarms = Some(threshold_alarms(scores, cfg.k_sigma)?);
    }
    if cfg.timing {
        report.timing = Some(Timing {
            seconds: started.elapsed().as_secs_f64(),
        });
    }
    Ok(report)
}

/// Sequitur anomaly score: `max - density`, on the points covered by a full
/// window's worth of windows. Points nearer the ends are covered by fewer
/// windows and would look sparse for that reason alone.
pub fn sequitur_score(model: &SequiturModel) -> Result<ScoreSeries> {
    let density = model.density();
    let w = model.config().window_size;
    let n = density.len();
    if n < 2 * w - 1 {
        return Err(Error::InvalidInput(format!(
            "series of length {n} is too short for a score with window {w} (need {})",
            2 * w - 1
        )));
    }
    Ok(density_to_score(&density.restrict(w - 1, n - w)?))
}

fn dump(model: &SequiturModel) -> String {
    let vocab = model.vocabulary();
    model
        .grammar()
        .dump_with(|t| vocab[t as usize].to_string())
}

/// Runs [`run_detector`] on a worker thread and gives up after the
/// configured timeout with [`Error::Timeout`]. An abandoned worker keeps
/// running in the background.
pub fn run_with_timeout(cfg: &RunConfig, series: &TimeSeries, meta: SeriesMeta) -> Result<Report> {
    let Some(limit) = cfg.timeout() else {
        return run_detector(cfg, series, meta);
    };
    let (tx, rx) = mpsc::channel();
    let (cfg, series) = (cfg.clone(), series.clone());
    thread::spawn(move || {
        let _ = tx.send(run_detector(&cfg, &series, meta));
    });
    match rx.recv_timeout(limit) {
        Ok(r) => r,
        Err(_) => Err(Error::Timeout(limit)),
    }
}

impl Report {
    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::InvalidInput(e.to_string()))
    }

    /// Plot data: a `# config:` line, then one row per point. `score` is
    /// empty outside the valid range; `alarm_flag` marks alarms, the discord
    /// window start, or motif occurrence starts.
    pub fn write_plot_csv(&self, series: &TimeSeries, mut out: impl Write) -> Result<()> {
        let config = serde_json::to_string(&self.config).map_err(|e| Error::InvalidInput(e.to_string()))?;
        writeln!(out, "# config: {config}")?;
        writeln!(out, "index,value,score,alarm_flag")?;
        let mut flags = vec![false; series.len()];
        let marks = self
            .alarms
            .iter()
            .flatten()
            .copied()
            .chain(self.discord.map(|d| d.location))
            .chain(
                self.motifs
                    .iter()
                    .flatten()
                    .flat_map(|m| m.motif.occurrences().iter().copied()),
            );
        for i in marks {
            if let Some(f) = flags.get_mut(i) {
                *f = true;
            }
        }
        for (i, v) in series.values().iter().enumerate() {
            let score = self
                .scores
                .as_ref()
                .and_then(|s| s.get(i))
                .map(|s| s.to_string())
                .unwrap_or_default();
            writeln!(out, "{i},{v},{score},{}", u8::from(flags[i]))?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::synth::{synth, SynthKind, SynthSpec};

    fn planted() -> (TimeSeries, usize) {
        let s = synth(&SynthSpec {
            kind: SynthKind::PlantedDiscord,
            len: 2000,
            period: 48,
            seed: 3,
            ..Default::default()
        })
        .unwrap();
        (s.series, s.meta.planted[0])
    }

    #[test]
    fn hotsax_finds_the_planted_discord() {
        let (s, at) = planted();
        let cfg = RunConfig {
            algorithm: Algorithm::HotSax,
            window_size: 48,
            ..Default::default()
        };
        let r = run_detector(&cfg, &s, SeriesMeta::of(&s, "synth")).unwrap();
        let d = r.discord.unwrap();
        assert!(d.location.abs_diff(at) <= 48, "{d:?} vs {at}");
    }

    #[test]
    fn chaos_needs_four_letters() {
        let (s, _) = planted();
        let cfg = RunConfig {
            algorithm: Algorithm::ChaosGame,
            alpha: 5,
            ..Default::default()
        };
        match run_detector(&cfg, &s, SeriesMeta::default()) {
            Err(Error::Config(m)) => assert!(m.contains("alpha = 4"), "{m}"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn knob_ranges() {
        let bad = |cfg: RunConfig| matches!(cfg.validate(), Err(Error::Config(_)));
        assert!(bad(RunConfig { alpha: 1, ..Default::default() }));
        assert!(bad(RunConfig { word_size: 0, ..Default::default() }));
        assert!(bad(RunConfig { k_sigma: 0.0, ..Default::default() }));
        assert!(bad(RunConfig { algorithm: Algorithm::ChaosGame, lag: 10, lead: 20, ..Default::default() }));
        assert!(bad(RunConfig { algorithm: Algorithm::Mk, num_refs: 0, ..Default::default() }));
        assert!(bad(RunConfig { algorithm: Algorithm::ApproxMotif, r_min: 1.5, ..Default::default() }));
        assert!(bad(RunConfig { timeout_s: Some(-1.0), ..Default::default() }));
        assert!(RunConfig::default().validate().is_ok());
        assert!("nope".parse::<Algorithm>().is_err());
        for a in Algorithm::ALL {
            assert_eq!(a.name().parse::<Algorithm>().unwrap(), a);
            assert_eq!(serde_json::to_string(&a).unwrap(), format!("\"{a}\""));
        }
    }

    #[test]
    fn alarms_lie_in_the_valid_range() {
        for (algorithm, window) in [(Algorithm::Sequitur, 40), (Algorithm::ChaosGame, 20)] {
            for seed in 0..5 {
                let s = synth(&SynthSpec {
                    kind: SynthKind::Step,
                    len: 3000,
                    period: 60,
                    seed,
                    ..Default::default()
                })
                .unwrap()
                .series;
                let cfg = RunConfig {
                    algorithm,
                    window_size: window,
                    lead: 50,
                    lag: 100,
                    k_sigma: 2.0,
                    ..Default::default()
                };
                let r = run_detector(&cfg, &s, SeriesMeta::of(&s, "synth")).unwrap();
                let scores = r.scores.unwrap();
                for a in r.alarms.unwrap() {
                    assert!((scores.valid_from()..=scores.valid_to()).contains(&a));
                }
            }
        }
    }

    #[test]
    fn reports_are_reproducible_and_ordered() {
        let (s, _) = planted();
        for algorithm in Algorithm::ALL {
            let cfg = RunConfig {
                algorithm,
                window_size: 48,
                lead: 20,
                lag: 40,
                ..Default::default()
            };
            let a = run_detector(&cfg, &s, SeriesMeta::of(&s, "synth")).unwrap().to_json().unwrap();
            let b = run_detector(&cfg, &s, SeriesMeta::of(&s, "synth")).unwrap().to_json().unwrap();
            assert_eq!(a, b, "{algorithm}");
            let v: serde_json::Value = serde_json::from_str(&a).unwrap();
            let echoed: RunConfig = serde_json::from_value(v["config"].clone()).unwrap();
            assert_eq!(echoed, cfg);
            let keys: Vec<&str> = ["\"config\"", "\"series_meta\"", "\"timing\""]
                .into_iter()
                .filter(|k| a.contains(k))
                .collect();
            assert_eq!(keys.len(), 3);
            assert!(a.find("\"config\"") < a.find("\"series_meta\""));
            assert!(a.rfind("\"timing\"") > a.find("\"series_meta\""));
        }
    }

    #[test]
    fn plot_csv_columns() {
        let (s, _) = planted();
        let cfg = RunConfig {
            algorithm: Algorithm::Sequitur,
            window_size: 48,
            dump_grammar: true,
            ..Default::default()
        };
        let r = run_detector(&cfg, &s, SeriesMeta::of(&s, "synth")).unwrap();
        assert!(r.grammar.as_deref().is_some_and(|g| g.contains("R0")));
        let mut buf = Vec::new();
        r.write_plot_csv(&s, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert!(lines[0].starts_with("# config: {"));
        assert_eq!(lines[1], "index,value,score,alarm_flag");
        assert_eq!(lines.len(), 2 + s.len());
        assert!(lines[2].ends_with(",,0"));
        assert!(lines[2 + 100].split(',').nth(2).is_some_and(|v| !v.is_empty()));
    }

    #[test]
    fn slow_runs_time_out() {
        let s = synth(&SynthSpec {
            kind: SynthKind::Noise,
            len: 20000,
            noise: 1.0,
            ..Default::default()
        })
        .unwrap()
        .series;
        let cfg = RunConfig {
            algorithm: Algorithm::Brute,
            window_size: 100,
            timeout_s: Some(0.05),
            ..Default::default()
        };
        assert!(matches!(
            run_detector(&cfg, &s, SeriesMeta::default()),
            Err(Error::Timeout(_))
        ));
        let cfg = RunConfig { algorithm: Algorithm::Mk, ..cfg };
        assert!(matches!(
            run_with_timeout(&cfg, &s, SeriesMeta::default()),
            Err(Error::Timeout(_))
        ));
    }
}
