//! Balancing probability ε, escape probability δ, the cdf bounds F(n) and
//! F^(k)(n) on the number of balanced heights, and the extremal Markov chain
//! that attains F.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::MiningParams;
use crate::probability::binom_ccdf;
use crate::sim::pool::run_trials;
use crate::sim::rng::{tag, StreamFactory};
use crate::stats::wilson;

pub const MAX_STAGES: u64 = 10_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BalanceParams {
    pub epsilon: f64,
    pub delta: f64,
    pub ratio: f64,
}

impl BalanceParams {
    /// ε + δ − εδ, the per-candidacy probability of either balancing or escaping.
    pub fn stop_prob(&self) -> f64 {
        self.epsilon + self.delta - self.epsilon * self.delta
    }
}

pub fn balance_params(params: &MiningParams) -> BalanceParams {
    let epsilon = -(-params.hbar()).exp_m1();
    let lead = 1.0 - params.a * (1.0 + params.hbar()) / params.h;
    let delta = lead.max(0.0) * (-params.abar()).exp();
    let p = epsilon + delta - epsilon * delta;
    let ratio = if p > 0.0 { epsilon / p } else { 0.0 };
    BalanceParams { epsilon, delta, ratio }
}

/// F(n) = 1 − (1−δ)·ratio^{n+1}; identically 0 when δ = 0.
pub fn cdf_x(bp: &BalanceParams, n: u64) -> f64 {
    if bp.delta == 0.0 {
        return 0.0;
    }
    1.0 - (1.0 - bp.delta) * bp.ratio.powf(n as f64 + 1.0)
}

/// 1 − F(n), computed without cancellation.
pub fn ccdf_x(bp: &BalanceParams, n: u64) -> f64 {
    if bp.delta == 0.0 {
        return 1.0;
    }
    (1.0 - bp.delta) * bp.ratio.powf(n as f64 + 1.0)
}

/// F^(k)(n) = 1 − (1−δ)·ratio^{n+1}·P(Bin(k, ε+δ−εδ) > n).
pub fn cdf_xk(bp: &BalanceParams, n: u64, k: u64) -> f64 {
    1.0 - ccdf_xk(bp, n, k)
}

/// 1 − F^(k)(n).
pub fn ccdf_xk(bp: &BalanceParams, n: u64, k: u64) -> f64 {
    let tail = binom_ccdf(n as i64, k, bp.stop_prob().clamp(0.0, 1.0)).unwrap_or(0.0);
    let r = if bp.delta == 0.0 { 1.0 } else { bp.ratio };
    (1.0 - bp.delta) * r.powf(n as f64 + 1.0) * tail
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainEstimate {
    pub trials: u64,
    pub seed: u64,
    /// `counts[n]` = number of trials with X = n.
    pub counts: Vec<u64>,
}

impl ChainEstimate {
    /// Empirical P(X <= n).
    pub fn cdf(&self, n: usize) -> f64 {
        self.cum(n) as f64 / self.trials as f64
    }

    /// 95% Wilson interval of P(X <= n).
    pub fn cdf_ci(&self, n: usize, z: f64) -> (f64, f64) {
        wilson(self.cum(n), self.trials, z)
    }

    fn cum(&self, n: usize) -> u64 {
        self.counts.iter().take(n + 1).sum()
    }
}

#[derive(Clone, Default)]
struct ChainTally {
    counts: Vec<u64>,
    overflow: bool,
}

fn merge_tally(mut a: ChainTally, b: ChainTally) -> ChainTally {
    if a.counts.len() < b.counts.len() {
        a.counts.resize(b.counts.len(), 0);
    }
    for (x, y) in a.counts.iter_mut().zip(&b.counts) {
        *x += y;
    }
    a.overflow |= b.overflow;
    a
}

/// Walks U₀ → {A | C}, C → {B → C | U}, U → {A | C} and counts B visits.
pub fn simulate_chain(bp: &BalanceParams, trials: u64, seed: u64) -> Result<ChainEstimate> {
    if bp.delta <= 0.0 {
        return Err(Error::NonTerminating(MAX_STAGES));
    }
    let streams = StreamFactory::new(seed, tag::CHAIN);
    let (eps, delta) = (bp.epsilon, bp.delta);
    let tally = run_trials(
        trials,
        ChainTally::default(),
        |i, s| {
            let mut rng = streams.trial(i);
            let mut x = 0usize;
            let mut stages = 0u64;
            // in U: escape with probability δ, otherwise enter C
            while rng.random::<f64>() >= delta {
                // in C: balance with probability ε and return to C, otherwise leave to U
                while rng.random::<f64>() < eps {
                    x += 1;
                    stages += 1;
                }
                stages += 1;
                if stages > MAX_STAGES {
                    s.overflow = true;
                    return;
                }
            }
            if s.counts.len() <= x {
                s.counts.resize(x + 1, 0);
            }
            s.counts[x] += 1;
        },
        merge_tally,
    );
    if tally.overflow {
        return Err(Error::NonTerminating(MAX_STAGES));
    }
    Ok(ChainEstimate { trials, seed, counts: tally.counts })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn btc25() -> BalanceParams {
        balance_params(&MiningParams::new(1.0 / 2400.0, 1.0 / 800.0, 10.0).unwrap())
    }

    #[test]
    fn known_values() {
        let bp = btc25();
        assert!((bp.epsilon - 0.0124222).abs() < 1e-7);
        assert!((bp.delta - 0.659745).abs() < 1e-6);
        assert!((ccdf_x(&bp, 0) - 0.006366).abs() < 1e-6);
        assert!((ccdf_x(&bp, 1) - 0.000119).abs() < 1e-6);
    }

    #[test]
    fn degenerate_cases() {
        let bp = balance_params(&MiningParams::new(0.0, 1.0, 0.0).unwrap());
        assert_eq!((bp.epsilon, bp.delta), (0.0, 1.0));
        let bp = balance_params(&MiningParams::new(0.02, 0.03, 100.0).unwrap());
        assert_eq!(bp.delta, 0.0);
        assert_eq!(cdf_x(&bp, 3), 0.0);
    }

    #[test]
    fn finite_depth_cdf() {
        let bp = btc25();
        assert_eq!(cdf_xk(&bp, 5, 5), 1.0);
        assert_eq!(cdf_xk(&bp, 0, 0), 1.0);
        assert!((cdf_xk(&bp, 2, 10_000) - cdf_x(&bp, 2)).abs() < 1e-9);
    }

    #[test]
    fn chain_trivial_cases() {
        let none = BalanceParams { epsilon: 0.0, delta: 0.3, ratio: 0.0 };
        let est = simulate_chain(&none, 1000, 1).unwrap();
        assert_eq!(est.counts, vec![1000]);
        let escape = BalanceParams { epsilon: 0.5, delta: 1.0, ratio: 0.5 };
        assert_eq!(simulate_chain(&escape, 1000, 1).unwrap().counts, vec![1000]);
        let stuck = BalanceParams { epsilon: 0.5, delta: 0.0, ratio: 1.0 };
        assert!(simulate_chain(&stuck, 10, 1).is_err());
    }
}
