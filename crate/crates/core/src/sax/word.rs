use std::fmt;

use serde::{Serialize, Serializer};

use crate::error::{invalid, Result};

/// A SAX word: symbol indices `0..alpha`, rendered as `'a'..`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SaxWord {
    alpha: u8,
    symbols: Vec<u8>,
}

impl SaxWord {
    /// Builds a word from raw symbol indices.
    pub fn from_symbols(symbols: Vec<u8>, alpha: usize) -> Result<Self> {
        if !(2..=26).contains(&alpha) {
            return invalid(format!("alphabet size must be in 2..=26, got {alpha}"));
        }
        if let Some(s) = symbols.iter().find(|&&s| s as usize >= alpha) {
            return invalid(format!("symbol index {s} outside alphabet of size {alpha}"));
        }
        Ok(Self {
            alpha: alpha as u8,
            symbols,
        })
    }

    /// Parses a lowercase word such as `"abca"` over an alphabet of `alpha` letters.
    pub fn parse(text: &str, alpha: usize) -> Result<Self> {
        let symbols = text
            .bytes()
            .map(|b| {
                if b.is_ascii_lowercase() {
                    Ok(b - b'a')
                } else {
                    invalid(format!("'{}' is not a SAX symbol", b as char))
                }
            })
            .collect::<Result<Vec<_>>>()?;
        Self::from_symbols(symbols, alpha)
    }

    pub(crate) fn new_unchecked(symbols: Vec<u8>, alpha: usize) -> Self {
        Self {
            alpha: alpha as u8,
            symbols,
        }
    }

    pub fn alpha(&self) -> usize {
        self.alpha as usize
    }

    pub fn symbols(&self) -> &[u8] {
        &self.symbols
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }
}

impl fmt::Display for SaxWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &s in &self.symbols {
            write!(f, "{}", (b'a' + s) as char)?;
        }
        Ok(())
    }
}

impl Serialize for SaxWord {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_display() {
        let w = SaxWord::parse("abca", 3).unwrap();
        assert_eq!(w.symbols(), &[0, 1, 2, 0]);
        assert_eq!(w.to_string(), "abca");
        assert!(SaxWord::parse("abd", 3).is_err());
        assert!(SaxWord::parse("aB", 3).is_err());
        assert!(SaxWord::parse("ab", 27).is_err());
    }
}
