//! Upper and lower bounds on the safety-violation probability for
//! confirmation by depth and by time, the closed-form exponential bound, and
//! inverse searches for the latency that meets a target.

mod chernoff;
mod depth;
pub mod quad;
mod search;
mod time;

use serde::{Deserialize, Serialize};

pub use chernoff::{chernoff_constants, ChernoffConstants};
pub use search::{beta_star, tolerance_check, DepthSearch, TimeSearch, Tolerance};

use crate::balanced::{balance_params, BalanceParams};
use crate::error::{Error, Result};
use crate::params::MiningParams;
use crate::probability::Prob;
use crate::series::{pmf_series_to, PmfSeries, MAX_ORDER};

/// Series residual used inside bound evaluations.
pub const SERIES_RESIDUAL: f64 = 1e-13;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Upper,
    Lower,
}

/// Which constant set to use: the canonical one (4Δ in the depth bound,
/// e^{3γ} in the exponential bound) or the revised one (3Δ, e^{5γ/2}).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    #[default]
    Canonical,
    Revised,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BoundKind {
    DepthUpper,
    DepthLower,
    DepthChernoff,
    TimeUpper,
    TimeLower,
}

impl BoundKind {
    pub const ALL: [BoundKind; 5] =
        [Self::DepthUpper, Self::DepthLower, Self::DepthChernoff, Self::TimeUpper, Self::TimeLower];

    pub fn is_depth(self) -> bool {
        matches!(self, Self::DepthUpper | Self::DepthLower | Self::DepthChernoff)
    }

    pub fn direction(self) -> Direction {
        match self {
            Self::DepthLower | Self::TimeLower => Direction::Lower,
            _ => Direction::Upper,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::DepthUpper => "depth-upper",
            Self::DepthLower => "depth-lower",
            Self::DepthChernoff => "depth-chernoff",
            Self::TimeUpper => "time-upper",
            Self::TimeLower => "time-lower",
        }
    }
}

impl std::str::FromStr for Variant {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "canonical" => Ok(Self::Canonical),
            "revised" => Ok(Self::Revised),
            _ => Err(format!("unknown variant '{s}' (canonical|revised)")),
        }
    }
}

impl std::str::FromStr for BoundKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        Self::ALL.into_iter().find(|k| k.name() == s).ok_or_else(|| {
            format!("unknown bound '{s}' (depth-upper|depth-lower|depth-chernoff|time-upper|time-lower)")
        })
    }
}

impl std::fmt::Display for BoundKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Truncation {
    pub series_order: usize,
    pub series_residual: f64,
    pub i0: usize,
    pub j0: usize,
    pub k0: usize,
    pub panels: usize,
    pub quad_change: f64,
    pub u_max: f64,
    pub tail_term: f64,
    pub n_scanned: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub kind: BoundKind,
    pub latency: f64,
    pub value: Prob,
    pub direction: Direction,
    pub n_star: Option<u64>,
    pub truncation: Truncation,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DepthOpts {
    /// Largest n scanned in the infimum; defaults to min(k, 400).
    pub n_max: Option<u64>,
    pub quad_tol: f64,
}

impl Default for DepthOpts {
    fn default() -> Self {
        Self { n_max: None, quad_tol: 1e-10 }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct TimeOpts {
    pub n_max: Option<u64>,
    pub i0: Option<usize>,
    pub j0: Option<usize>,
    pub k0: Option<usize>,
    pub j_max: Option<usize>,
    pub k_max: Option<usize>,
}

/// Evaluates every bound for one parameter point, sharing the e(i) series.
#[derive(Debug, Clone)]
pub struct BoundEngine {
    pub params: MiningParams,
    pub variant: Variant,
    pub series: PmfSeries,
    pub balance: BalanceParams,
    pub depth_opts: DepthOpts,
    pub time_opts: TimeOpts,
}

impl BoundEngine {
    pub fn new(params: MiningParams, variant: Variant) -> Result<Self> {
        params.require_tolerance()?;
        let series = pmf_series_to(&params, SERIES_RESIDUAL, MAX_ORDER)?;
        Ok(Self {
            params,
            variant,
            series,
            balance: balance_params(&params),
            depth_opts: DepthOpts::default(),
            time_opts: TimeOpts::default(),
        })
    }

    pub fn with_series(mut self, series: PmfSeries) -> Self {
        self.series = series;
        self
    }

    pub fn eval(&self, kind: BoundKind, latency: f64) -> Result<BoundReport> {
        let depth = || -> Result<u64> {
            if latency < 0.0 || latency.fract() != 0.0 {
                return Err(Error::Parameter(format!("depth {latency} must be a non-negative integer")));
            }
            Ok(latency as u64)
        };
        match kind {
            BoundKind::DepthUpper => self.depth_upper(depth()?),
            BoundKind::DepthLower => self.depth_lower(depth()?),
            BoundKind::DepthChernoff => self.chernoff(depth()?),
            BoundKind::TimeUpper => self.time_upper(latency),
            BoundKind::TimeLower => self.time_lower(latency),
        }
    }

    fn report(
        &self,
        kind: BoundKind,
        latency: f64,
        raw: f64,
        n_star: Option<u64>,
        truncation: Truncation,
    ) -> BoundReport {
        BoundReport {
            kind,
            latency,
            value: Prob::clamp(raw),
            direction: kind.direction(),
            n_star,
            truncation,
            warnings: Vec::new(),
        }
    }
}

/// Linear convolution of `a` and `b`, truncated to indices `0..len`.
pub(crate) fn convolve(a: &[f64], b: &[f64], len: usize) -> Vec<f64> {
    let mut out = vec![0.0; len];
    for (i, &x) in a.iter().enumerate().take(len) {
        if x == 0.0 {
            continue;
        }
        for (j, &y) in b.iter().enumerate().take(len - i) {
            out[i + j] += x * y;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn convolution_truncates() {
        let c = convolve(&[1.0, 2.0], &[3.0, 4.0, 5.0], 3);
        assert_eq!(c, vec![3.0, 10.0, 13.0]);
        let full = convolve(&[1.0, 2.0], &[3.0, 4.0, 5.0], 4);
        assert_eq!(full, vec![3.0, 10.0, 13.0, 10.0]);
    }
}
