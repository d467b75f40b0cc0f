//! Plumbing around the algorithms: CSV ingestion, synthetic series with
//! known ground truth, configured runs with JSON or plot-data reports, and
//! the runtime benchmark.

mod bench;
mod ingest;
mod run;
mod synth;

pub use bench::{run_bench, size_label, BenchOptions, BenchReport, BenchRow, ScalingRatio};
pub use ingest::{ingest_csv, ingest_reader, write_csv, IngestOptions, Ingested};
pub use run::{
    load_input, run_detector, run_with_timeout, sequitur_score, Algorithm, MdlBits, MotifEntry,
    OutputFormat, Report, RunConfig, SeriesMeta, Timing,
};
pub use synth::{synth, DiscordStyle, Excursion, Synth, SynthKind, SynthMeta, SynthSpec};
