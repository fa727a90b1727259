use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Default mantissa width of the big-float backend.
pub const DEFAULT_BIG_BITS: u32 = 256;

/// Environment variable overriding the default backend.
pub const PRECISION_ENV_VAR: &str = "PSEUDOPOWER_DEFAULT_PRECISION";

/// Arithmetic backend selector.
///
/// Textual form is `exact`, `big:<bits>` or `machine`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Precision {
    /// Reduced complex rationals; equality is decidable.
    Exact,
    /// Arbitrary-precision binary floating point with the given mantissa width (≥ 53).
    BigFloat { bits: u32 },
    /// IEEE-754 double precision.
    Machine,
}

impl Precision {
    pub fn big(bits: u32) -> Result<Self> {
        if bits < 53 {
            return Err(Error::invalid(format!(
                "big-float mantissa must be at least 53 bits, got {bits}"
            )));
        }
        Ok(Precision::BigFloat { bits })
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, Precision::Exact)
    }

    /// Mantissa width, `None` for the exact backend.
    pub fn mantissa_bits(&self) -> Option<u32> {
        match self {
            Precision::Exact => None,
            Precision::BigFloat { bits } => Some(*bits),
            Precision::Machine => Some(53),
        }
    }

    /// Reads the default from [`PRECISION_ENV_VAR`], falling back to `big:256`.
    pub fn from_env_or_default() -> Result<Self> {
        match std::env::var(PRECISION_ENV_VAR) {
            Ok(s) if !s.trim().is_empty() => s.parse(),
            _ => Ok(Self::default()),
        }
    }
}

impl Default for Precision {
    fn default() -> Self {
        Precision::BigFloat {
            bits: DEFAULT_BIG_BITS,
        }
    }
}

impl fmt::Display for Precision {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Precision::Exact => f.write_str("exact"),
            Precision::BigFloat { bits } => write!(f, "big:{bits}"),
            Precision::Machine => f.write_str("machine"),
        }
    }
}

impl FromStr for Precision {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        match s {
            "exact" => Ok(Precision::Exact),
            "machine" => Ok(Precision::Machine),
            "big" => Ok(Precision::default()),
            _ => {
                let bits = s
                    .strip_prefix("big:")
                    .ok_or_else(|| Error::parse(format!("unknown precision '{s}'")))?;
                let bits: u32 = bits
                    .parse()
                    .map_err(|_| Error::parse(format!("bad mantissa width in '{s}'")))?;
                Precision::big(bits)
            }
        }
    }
}

impl Serialize for Precision {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Precision {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_all_forms() {
        assert_eq!("exact".parse::<Precision>().unwrap(), Precision::Exact);
        assert_eq!("machine".parse::<Precision>().unwrap(), Precision::Machine);
        assert_eq!(
            "big:128".parse::<Precision>().unwrap(),
            Precision::BigFloat { bits: 128 }
        );
        assert_eq!(Precision::default().to_string(), "big:256");
    }

    #[test]
    fn rejects_narrow_big_float() {
        assert!("big:32".parse::<Precision>().is_err());
        assert!("big:x".parse::<Precision>().is_err());
        assert!("quad".parse::<Precision>().is_err());
    }
}
