use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::option::OptionKind;

/// Closed band of X/K treated as at-the-money.
pub const ATM_BAND: (f64, f64) = (0.97, 1.03);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum MoneynessClass {
    Atm,
    Itm,
    Otm,
}

impl MoneynessClass {
    pub const ALL: [MoneynessClass; 3] = [MoneynessClass::Atm, MoneynessClass::Itm, MoneynessClass::Otm];

    pub fn name(self) -> &'static str {
        match self {
            MoneynessClass::Atm => "ATM",
            MoneynessClass::Itm => "ITM",
            MoneynessClass::Otm => "OTM",
        }
    }

    /// Initial sentiment gate for fine-tuning this class.
    pub fn gate_init(self) -> f64 {
        match self {
            MoneynessClass::Atm => 0.25,
            MoneynessClass::Itm => 0.0,
            MoneynessClass::Otm => 1.2,
        }
    }

    /// ITM contracts keep the sentiment channel closed.
    pub fn gate_trainable(self) -> bool {
        self != MoneynessClass::Itm
    }
}

impl fmt::Display for MoneynessClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for MoneynessClass {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_uppercase().as_str() {
            "ATM" => Ok(MoneynessClass::Atm),
            "ITM" => Ok(MoneynessClass::Itm),
            "OTM" => Ok(MoneynessClass::Otm),
            other => Err(Error::Config(format!("unknown moneyness class {other:?}"))),
        }
    }
}

pub fn classify_moneyness(x: f64, k: f64, kind: OptionKind) -> MoneynessClass {
    let m = x / k;
    if (ATM_BAND.0..=ATM_BAND.1).contains(&m) {
        return MoneynessClass::Atm;
    }
    let above = m > ATM_BAND.1;
    match (kind, above) {
        (OptionKind::Call, true) | (OptionKind::Put, false) => MoneynessClass::Itm,
        _ => MoneynessClass::Otm,
    }
}
