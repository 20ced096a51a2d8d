use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{PibtError, Result};
use crate::numerics::normal_cdf;

/// A univariate outcome distribution for synthetic worlds.
///
/// Written and parsed as `normal(mu,sigma)`, `uniform(a,b)`, `point(c)` or
/// `lognormal(mu,sigma)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Marginal {
    Normal { mean: f64, sd: f64 },
    Uniform { lo: f64, hi: f64 },
    Point(f64),
    LogNormal { mu: f64, sigma: f64 },
}

impl Marginal {
    pub fn normal(mean: f64, sd: f64) -> Result<Self> {
        Marginal::Normal { mean, sd }.validated()
    }

    pub fn validated(self) -> Result<Self> {
        let ok = match self {
            Marginal::Normal { mean, sd } => mean.is_finite() && sd.is_finite() && sd > 0.0,
            Marginal::Uniform { lo, hi } => lo.is_finite() && hi.is_finite() && lo < hi,
            Marginal::Point(c) => c.is_finite(),
            Marginal::LogNormal { mu, sigma } => mu.is_finite() && sigma.is_finite() && sigma > 0.0,
        };
        if ok {
            Ok(self)
        } else {
            Err(PibtError::invalid(format!("invalid marginal parameters: {self}")))
        }
    }

    /// Maps a standard normal draw through this marginal's quantile function.
    pub fn from_standard_normal(&self, z: f64) -> f64 {
        match *self {
            Marginal::Normal { mean, sd } => mean + sd * z,
            Marginal::Uniform { lo, hi } => lo + (hi - lo) * normal_cdf(z),
            Marginal::Point(c) => c,
            Marginal::LogNormal { mu, sigma } => (mu + sigma * z).exp(),
        }
    }

    pub fn cdf(&self, y: f64) -> f64 {
        match *self {
            Marginal::Normal { mean, sd } => normal_cdf((y - mean) / sd),
            Marginal::Uniform { lo, hi } => ((y - lo) / (hi - lo)).clamp(0.0, 1.0),
            Marginal::Point(c) => {
                if y >= c {
                    1.0
                } else {
                    0.0
                }
            }
            Marginal::LogNormal { mu, sigma } => {
                if y <= 0.0 {
                    0.0
                } else {
                    normal_cdf((y.ln() - mu) / sigma)
                }
            }
        }
    }

    /// An interval holding all but a negligible amount of the mass.
    pub fn support_hint(&self) -> (f64, f64) {
        match *self {
            Marginal::Normal { mean, sd } => (mean - 12.0 * sd, mean + 12.0 * sd),
            Marginal::Uniform { lo, hi } => (lo, hi),
            Marginal::Point(c) => (c - 1.0, c + 1.0),
            Marginal::LogNormal { mu, sigma } => (0.0, (mu + 12.0 * sigma).exp()),
        }
    }
}

impl fmt::Display for Marginal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Marginal::Normal { mean, sd } => write!(f, "normal({mean},{sd})"),
            Marginal::Uniform { lo, hi } => write!(f, "uniform({lo},{hi})"),
            Marginal::Point(c) => write!(f, "point({c})"),
            Marginal::LogNormal { mu, sigma } => write!(f, "lognormal({mu},{sigma})"),
        }
    }
}

impl FromStr for Marginal {
    type Err = PibtError;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || PibtError::invalid(format!("cannot parse marginal {s:?}; expected e.g. normal(0,1)"));
        let s = s.trim();
        let open = s.find('(').ok_or_else(bad)?;
        let inner = s[open + 1..].strip_suffix(')').ok_or_else(bad)?;
        let args = inner
            .split(',')
            .map(|a| a.trim().parse::<f64>().map_err(|_| bad()))
            .collect::<Result<Vec<_>>>()?;
        let m = match (s[..open].trim().to_ascii_lowercase().as_str(), args.as_slice()) {
            ("normal", &[mean, sd]) => Marginal::Normal { mean, sd },
            ("uniform", &[lo, hi]) => Marginal::Uniform { lo, hi },
            ("point", &[c]) => Marginal::Point(c),
            ("lognormal", &[mu, sigma]) => Marginal::LogNormal { mu, sigma },
            _ => return Err(bad()),
        };
        m.validated()
    }
}

impl Serialize for Marginal {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Marginal {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}
