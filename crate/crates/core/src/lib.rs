pub mod anomaly;
pub mod error;
pub mod grammar;
pub mod harness;
pub mod motif;
pub mod sax;
pub mod series;
mod windows;

pub use error::{Error, Result};
pub use series::TimeSeries;
pub use windows::DistanceMode;

// The guide's code blocks run as doctests so the book cannot drift from
// the API. One module per chapter keeps failures traceable.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../README.md")]
    mod readme {}
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/sax.md")]
    mod sax {}
    #[doc = include_str!("../../../book/src/grammar.md")]
    mod grammar {}
    #[doc = include_str!("../../../book/src/anomaly.md")]
    mod anomaly {}
    #[doc = include_str!("../../../book/src/motifs.md")]
    mod motifs {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
