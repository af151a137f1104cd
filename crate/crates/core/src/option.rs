use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// European option side.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum OptionKind {
    #[serde(rename = "C")]
    Call,
    #[serde(rename = "P")]
    Put,
}

impl OptionKind {
    /// Terminal payoff at underlying level `x`.
    #[inline]
    pub fn payoff(self, x: f64, strike: f64) -> f64 {
        match self {
            OptionKind::Call => (x - strike).max(0.0),
            OptionKind::Put => (strike - x).max(0.0),
        }
    }

    /// Index of the value-network head pricing this side.
    pub fn head(self) -> usize {
        match self {
            OptionKind::Call => 0,
            OptionKind::Put => 1,
        }
    }

    pub fn code(self) -> &'static str {
        match self {
            OptionKind::Call => "C",
            OptionKind::Put => "P",
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            OptionKind::Call => "call",
            OptionKind::Put => "put",
        }
    }
}

impl fmt::Display for OptionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for OptionKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "c" | "call" => Ok(OptionKind::Call),
            "p" | "put" => Ok(OptionKind::Put),
            other => Err(Error::Validation(format!("unknown option type `{other}`"))),
        }
    }
}
