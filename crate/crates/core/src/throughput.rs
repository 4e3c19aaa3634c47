//! Throughput–latency trade-off: block delay Δ(B) = B/r + ν, the fork-number
//! and throughput caps, and a grid search for the best (λ, B) under a safety
//! target and an expected confirmation-time budget.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bounds::{BoundEngine, BoundKind, Variant};
use crate::error::{Error, Result};
use crate::params::MiningParams;

pub fn delay_of_block(b: f64, r: f64, nu: f64) -> f64 {
    b / r + nu
}

/// Supremum of λΔ compatible with a fraction β of adversarial power.
pub fn fork_cap(beta: f64) -> Result<f64> {
    if !(beta > 0.0 && beta < 0.5) {
        return Err(Error::Infeasible(format!("beta = {beta} must lie in (0, 1/2)")));
    }
    Ok(1.0 / beta - 1.0 / (1.0 - beta))
}

pub fn throughput_rate_cap(beta: f64, r: f64) -> f64 {
    (1.0 - 2.0 * beta) / (1.0 - beta - beta * beta) * r
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SafetyBound {
    #[default]
    Chernoff,
    Finer,
}

impl std::str::FromStr for SafetyBound {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "chernoff" => Ok(Self::Chernoff),
            "finer" => Ok(Self::Finer),
            _ => Err(format!("unknown safety bound '{s}' (chernoff|finer)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThroughputProblem {
    pub beta: f64,
    /// Network rate in KB/s.
    pub r: f64,
    /// Fixed delay in seconds.
    pub nu: f64,
    /// Largest tolerated violation probability.
    pub q: f64,
    /// Expected confirmation-time budget in seconds.
    pub d: f64,
    pub b_min: f64,
    pub b_max: f64,
    /// Fork numbers λΔ to try; empty means a log grid on (0, fork_cap).
    pub fork_numbers: Vec<f64>,
    pub grid: usize,
    pub variant: Variant,
}

impl ThroughputProblem {
    pub fn new(beta: f64, r: f64, nu: f64, q: f64, d: f64) -> Self {
        Self {
            beta,
            r,
            nu,
            q,
            d,
            b_min: 10.0,
            b_max: 1e5,
            fork_numbers: Vec::new(),
            grid: 64,
            variant: Variant::Canonical,
        }
    }

    fn validate(&self) -> Result<f64> {
        let cap = fork_cap(self.beta)?;
        if !(self.r > 0.0 && self.nu >= 0.0) {
            return Err(Error::Parameter("r must be positive and nu non-negative".into()));
        }
        if !(self.q > 0.0 && self.q <= 1.0) {
            return Err(Error::Parameter(format!("q = {} must lie in (0, 1]", self.q)));
        }
        if !(self.d > 0.0) {
            return Err(Error::Parameter("d must be positive".into()));
        }
        if !(self.b_min > 0.0 && self.b_max >= self.b_min) {
            return Err(Error::Parameter("need 0 < B_min <= B_max".into()));
        }
        if self.grid == 0 {
            return Err(Error::Parameter("grid must be >= 1".into()));
        }
        Ok(cap)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrontierPoint {
    pub lambda: f64,
    pub b: f64,
    pub delta_b: f64,
    pub k: u64,
    /// Safety bound at depth k.
    pub p: f64,
    pub throughput: f64,
    pub feasible: bool,
    /// q − p.
    pub safety_margin: f64,
    /// (1−β)λd / (1 + (1−β)λΔ) − k.
    pub latency_margin: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThroughputSolution {
    pub best: FrontierPoint,
    pub fork_number: f64,
    pub frontier: Vec<FrontierPoint>,
}

fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 || lo == hi {
        return vec![hi];
    }
    let (a, b) = (lo.ln(), hi.ln());
    (0..n).map(|i| (a + (b - a) * i as f64 / (n - 1) as f64).exp()).collect()
}

/// Safety depth for a fork number x = λΔ; bounds depend on (aΔ, hΔ) only, so
/// Δ is fixed at 1 here.
fn depth_for(problem: &ThroughputProblem, x: f64, bound: SafetyBound) -> Result<(u64, f64)> {
    let params = MiningParams::from_total(x, problem.beta, 1.0)?;
    let engine = BoundEngine::new(params, problem.variant)?;
    let kind = match bound {
        SafetyBound::Chernoff => BoundKind::DepthChernoff,
        SafetyBound::Finer => BoundKind::DepthUpper,
    };
    match engine.min_depth(kind, problem.q) {
        Ok(found) => Ok((found.k, found.value)),
        // reported as an infeasible point rather than aborting the grid
        Err(Error::SearchExhausted { cap, .. }) => Ok((cap, engine.eval(kind, cap as f64)?.value.value)),
        Err(e) => Err(e),
    }
}

pub fn optimize(problem: &ThroughputProblem, bound: SafetyBound) -> Result<ThroughputSolution> {
    let cap = problem.validate()?;
    let xs = if problem.fork_numbers.is_empty() {
        // open interval (0, cap): stop one grid step short of the cap
        let g = problem.grid;
        log_grid(cap * 1e-3, cap * (1.0 - 1.0 / (g as f64 + 1.0)), g)
    } else {
        if let Some(&bad) = problem.fork_numbers.iter().find(|&&x| !(x > 0.0 && x < cap)) {
            return Err(Error::Infeasible(format!("fork number {bad} outside (0, {cap})")));
        }
        problem.fork_numbers.clone()
    };
    let bs = log_grid(problem.b_min, problem.b_max, problem.grid);
    let depths: Vec<Result<(u64, f64)>> = xs.par_iter().map(|&x| depth_for(problem, x, bound)).collect();
    let mut frontier = Vec::with_capacity(xs.len() * bs.len());
    for (&x, depth) in xs.iter().zip(depths) {
        let (k, p) = depth?;
        for &b in &bs {
            let delta_b = delay_of_block(b, problem.r, problem.nu);
            let lambda = x / delta_b;
            let hl = (1.0 - problem.beta) * lambda;
            let budget = if problem.d.is_infinite() { f64::INFINITY } else { hl * problem.d / (1.0 + hl * delta_b) };
            let latency_margin = budget - k as f64;
            let safety_margin = problem.q - p;
            frontier.push(FrontierPoint {
                lambda,
                b,
                delta_b,
                k,
                p,
                throughput: lambda * b / (1.0 + x),
                feasible: latency_margin >= 0.0 && safety_margin >= 0.0,
                safety_margin,
                latency_margin,
            });
        }
    }
    // deterministic arg-max: highest throughput, then lowest λ, then lowest B
    let best = frontier.iter().filter(|f| f.feasible).copied().reduce(|a, b| {
        let better = b.throughput > a.throughput || (b.throughput == a.throughput && (b.lambda, b.b) < (a.lambda, a.b));
        if better {
            b
        } else {
            a
        }
    });
    match best {
        Some(best) => Ok(ThroughputSolution { best, fork_number: best.lambda * best.delta_b, frontier }),
        None => {
            let near = frontier
                .iter()
                .copied()
                .max_by(|a, b| a.latency_margin.total_cmp(&b.latency_margin))
                .expect("grid is non-empty");
            Err(Error::Infeasible(format!(
                "no grid point meets the latency budget; closest has k = {} against a budget of {:.3}",
                near.k,
                near.k as f64 + near.latency_margin
            )))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn delay_examples() {
        assert!((delay_of_block(1600.0, 178.6, 0.9) - 9.8585).abs() < 1e-3);
        assert!((delay_of_block(200.0, 178.6, 0.9) - 2.0198).abs() < 1e-3);
        assert_eq!(delay_of_block(0.0, 178.6, 0.9), 0.9);
    }

    #[test]
    fn caps() {
        assert!((fork_cap(0.4).unwrap() - 5.0 / 6.0).abs() < 1e-12);
        assert!((fork_cap(1.0 / 3.0).unwrap() - 1.5).abs() < 1e-12);
        assert!(fork_cap(0.5).is_err());
        assert!((throughput_rate_cap(0.4, 178.6) - 81.18).abs() < 0.01);
        assert_eq!(throughput_rate_cap(0.0, 178.6), 178.6);
    }
}
