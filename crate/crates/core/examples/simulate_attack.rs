//! Monte-Carlo frequency of the private-mining attack next to the analytic
//! lower and upper bounds, for confirmation by depth and by time.

use naklab::sim::{sim_private_attack_depth_batch, sim_private_attack_time_batch};
use naklab::{BoundEngine, LeadDist, MiningParams, SimConfig, Variant};

fn main() -> naklab::Result<()> {
    let beta = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(0.3);
    let trials = std::env::args().nth(2).and_then(|s| s.parse().ok()).unwrap_or(200_000);
    let p = MiningParams::from_total(1.0 / 600.0, beta, 10.0)?;
    let engine = BoundEngine::new(p, Variant::Canonical)?;
    let mut cfg = SimConfig::new(p, trials, 2024);
    cfg.lead = LeadDist::Geometric;

    let ks = [1, 2, 4, 6, 10, 15, 20, 30];
    println!("depth      lower        sim  +-      upper");
    for est in sim_private_attack_depth_batch(&cfg, &ks)? {
        let k = est.latency as u64;
        println!(
            "{k:>5} {:>10.3e} {:>10.3e} {:>8.1e} {:>10.3e}",
            engine.depth_lower(k)?.value.value,
            est.p_hat,
            est.std_err(),
            engine.depth_upper(k)?.value.value,
        );
    }

    let ts = [600.0, 1800.0, 3600.0, 7200.0, 14400.0];
    println!("time (s)   lower        sim  +-      upper");
    for est in sim_private_attack_time_batch(&cfg, &ts)? {
        let t = est.latency;
        println!(
            "{t:>8} {:>10.3e} {:>10.3e} {:>8.1e} {:>10.3e}",
            engine.time_lower(t)?.value.value,
            est.p_hat,
            est.std_err(),
            engine.time_upper(t)?.value.value,
        );
    }
    Ok(())
}
