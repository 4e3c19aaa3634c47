//! Confirmation depth needed for 99.9% safety at a total rate of one block per
//! 600 s and Δ = 10 s, from the exponential bound, the finer upper bound and
//! the lower bound.

use std::time::Instant;

use naklab::{BoundEngine, BoundKind, MiningParams, Variant};

fn main() -> naklab::Result<()> {
    let target = 1e-3;
    println!("beta  chernoff  upper  lower");
    for beta in [0.10, 0.20, 0.30, 0.40] {
        let start = Instant::now();
        let p = MiningParams::from_total(1.0 / 600.0, beta, 10.0)?;
        let engine = BoundEngine::new(p, Variant::Canonical)?;
        let ch = engine.min_depth(BoundKind::DepthChernoff, target)?;
        let up = engine.min_depth(BoundKind::DepthUpper, target)?;
        let lo = engine.min_depth(BoundKind::DepthLower, target)?;
        println!("{:>4.0}% {:>8} {:>6} {:>6}   ({:.2?})", beta * 100.0, ch.k, up.k, lo.k, start.elapsed());
    }
    Ok(())
}
