use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::Error;

/// Test statistic family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    /// Sample-size weighted sum of unweighted U-statistics.
    Uci,
    /// Weighted U-statistics with weights estimated from the whole bin.
    Wuci,
    /// Weighted U-statistics with weights estimated from a held-out split.
    WuciSplit,
    /// Pearson χ² summed over conditional slices.
    Chi2,
    /// Likelihood-ratio G statistic summed over conditional slices.
    G,
}

impl Method {
    pub const ALL: [Method; 5] = [Method::Uci, Method::Wuci, Method::WuciSplit, Method::Chi2, Method::G];

    /// χ² and G, the only methods with an asymptotic reference distribution.
    pub fn is_classical(self) -> bool {
        matches!(self, Method::Chi2 | Method::G)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Method::Uci => "uci",
            Method::Wuci => "wuci",
            Method::WuciSplit => "wuci_split",
            Method::Chi2 => "chi2",
            Method::G => "g",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().replace('-', "_").as_str() {
            "uci" => Ok(Method::Uci),
            "wuci" => Ok(Method::Wuci),
            "wuci_split" => Ok(Method::WuciSplit),
            "chi2" | "chi2_perm" => Ok(Method::Chi2),
            "g" | "g_perm" => Ok(Method::G),
            other => Err(Error::Config(format!("unknown method '{other}'"))),
        }
    }
}

/// How the null distribution of a statistic is obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Calibration {
    /// Monte Carlo local permutations within each conditional slice.
    Permutation,
    /// Upper tail of the χ² law with `(ℓ₁-1)(ℓ₂-1)d` degrees of freedom.
    Asymptotic,
}

impl Calibration {
    pub fn as_str(self) -> &'static str {
        match self {
            Calibration::Permutation => "permutation",
            Calibration::Asymptotic => "asymptotic",
        }
    }
}

impl fmt::Display for Calibration {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Calibration {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "permutation" | "perm" => Ok(Calibration::Permutation),
            "asymptotic" | "asym" => Ok(Calibration::Asymptotic),
            other => Err(Error::Config(format!("unknown calibration '{other}'"))),
        }
    }
}
