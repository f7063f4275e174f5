//! Total-variation hyperpriors on γ.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

pub const DEFAULT_EPSILON: f64 = 1e-2;
pub const DEFAULT_BETA: f64 = 1.0;

/// Penalty `β·T(γ)` added to the Type-II cost.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TvRegularizer {
    None,
    /// `β·Σ|γ_{i+1} − γ_i|`
    Linear {
        beta: f64,
    },
    /// `β·Σ log(|γ_{i+1} − γ_i| + ε)`
    Log {
        beta: f64,
        epsilon: f64,
    },
}

impl TvRegularizer {
    pub fn linear(beta: f64) -> Result<Self> {
        let r = TvRegularizer::Linear { beta };
        r.validate()?;
        Ok(r)
    }

    pub fn log(beta: f64, epsilon: f64) -> Result<Self> {
        let r = TvRegularizer::Log { beta, epsilon };
        r.validate()?;
        Ok(r)
    }

    pub fn validate(&self) -> Result<()> {
        let beta = self.beta();
        if !(beta.is_finite() && beta >= 0.0) {
            return Err(Error::InvalidInput(format!(
                "beta must be nonnegative, got {beta}"
            )));
        }
        if let TvRegularizer::Log { epsilon, .. } = self {
            if !(epsilon.is_finite() && *epsilon > 0.0) {
                return Err(Error::InvalidInput(format!(
                    "epsilon must be positive, got {epsilon}"
                )));
            }
        }
        Ok(())
    }

    pub fn beta(&self) -> f64 {
        match *self {
            TvRegularizer::None => 0.0,
            TvRegularizer::Linear { beta } | TvRegularizer::Log { beta, .. } => beta,
        }
    }

    pub fn tag(&self) -> &'static str {
        match self {
            TvRegularizer::None => "none",
            TvRegularizer::Linear { .. } => "linear-tv",
            TvRegularizer::Log { .. } => "log-tv",
        }
    }

    /// `β·T(γ)`; zero for `None`.
    pub fn penalty(&self, gamma: &[f64]) -> f64 {
        match *self {
            TvRegularizer::None => 0.0,
            TvRegularizer::Linear { beta } => beta * linear_tv(gamma),
            TvRegularizer::Log { beta, epsilon } => beta * log_tv(gamma, epsilon),
        }
    }

    /// Edge weights of the convex TV surrogate at `gamma`: ones for Linear TV,
    /// the reweighting for Log TV, zeros for `None`.
    pub fn edge_weights(&self, gamma: &[f64]) -> Vec<f64> {
        let edges = gamma.len().saturating_sub(1);
        match *self {
            TvRegularizer::None => vec![0.0; edges],
            TvRegularizer::Linear { .. } => vec![1.0; edges],
            TvRegularizer::Log { epsilon, .. } => log_tv_reweights(gamma, epsilon),
        }
    }
}

impl fmt::Display for TvRegularizer {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            TvRegularizer::None => write!(f, "none"),
            TvRegularizer::Linear { beta } => write!(f, "linear-tv:{beta}"),
            TvRegularizer::Log { beta, epsilon } => write!(f, "log-tv:{beta}:{epsilon}"),
        }
    }
}

/// Parses `none`, `linear-tv[:beta]` or `log-tv[:beta[:epsilon]]`.
impl FromStr for TvRegularizer {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut parts = s.trim().split(':');
        let tag = parts.next().unwrap_or_default();
        let mut number = |name: &str, default: f64| -> Result<f64> {
            match parts.next() {
                None => Ok(default),
                Some(p) => p.trim().parse::<f64>().map_err(|_| {
                    Error::InvalidInput(format!("bad {name} '{p}' in regularizer '{s}'"))
                }),
            }
        };
        let reg = match tag {
            "none" => TvRegularizer::None,
            "linear-tv" => TvRegularizer::Linear {
                beta: number("beta", DEFAULT_BETA)?,
            },
            "log-tv" => {
                let beta = number("beta", DEFAULT_BETA)?;
                let epsilon = number("epsilon", DEFAULT_EPSILON)?;
                TvRegularizer::Log { beta, epsilon }
            }
            other => {
                return Err(Error::InvalidInput(format!(
                    "unknown regularizer '{other}'"
                )))
            }
        };
        if parts.next().is_some() {
            return Err(Error::InvalidInput(format!(
                "too many fields in regularizer '{s}'"
            )));
        }
        reg.validate()?;
        Ok(reg)
    }
}

fn differences(gamma: &[f64]) -> impl Iterator<Item = f64> + '_ {
    gamma.windows(2).map(|w| (w[1] - w[0]).abs())
}

pub fn linear_tv(gamma: &[f64]) -> f64 {
    differences(gamma).sum()
}

pub fn log_tv(gamma: &[f64], epsilon: f64) -> f64 {
    differences(gamma).map(|d| (d + epsilon).ln()).sum()
}

/// Slopes of the tangent majorizer of [`log_tv`] at `gamma_prev`, one per edge.
pub fn log_tv_reweights(gamma_prev: &[f64], epsilon: f64) -> Vec<f64> {
    differences(gamma_prev)
        .map(|d| 1.0 / (d + epsilon))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn linear_examples() {
        assert_eq!(linear_tv(&[1.0, 1.0, 1.0]), 0.0);
        assert_eq!(linear_tv(&[0.0, 2.0, 0.0]), 4.0);
        assert_eq!(linear_tv(&[3.0]), 0.0);
    }

    #[test]
    fn log_examples() {
        assert_eq!(log_tv(&[5.0, 5.0], 1.0), 0.0);
        assert!((log_tv(&[0.0, 1.0], 1.0) - 2f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn reweight_examples() {
        assert_eq!(log_tv_reweights(&[0.3; 4], 0.1), vec![10.0; 3]);
        assert_eq!(log_tv_reweights(&[0.0, 1.0], 1.0), vec![0.5]);
    }

    #[test]
    fn parse_round_trip() {
        for s in ["none", "linear-tv:0.3", "log-tv:1:0.01"] {
            let r: TvRegularizer = s.parse().unwrap();
            assert_eq!(r.to_string().parse::<TvRegularizer>().unwrap(), r);
        }
        assert_eq!(
            "log-tv".parse::<TvRegularizer>().unwrap(),
            TvRegularizer::Log {
                beta: DEFAULT_BETA,
                epsilon: DEFAULT_EPSILON
            }
        );
        assert!("log-tv:1:0".parse::<TvRegularizer>().is_err());
        assert!("linear-tv:-1".parse::<TvRegularizer>().is_err());
        assert!("l2".parse::<TvRegularizer>().is_err());
    }
}
