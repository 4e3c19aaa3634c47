//! Distribution of M, the largest lead of adversarial arrivals over pacers,
//! from the power series of its generating function, checked against a
//! direct simulation of the race.

use naklab::sim::sim_max_diff;
use naklab::{mgf_m, pmf_series, MiningParams, SimConfig};

fn main() -> naklab::Result<()> {
    let p = MiningParams::new(1.0 / 2400.0, 1.0 / 800.0, 10.0)?;
    let series = pmf_series(&p, 12)?;
    let hist = sim_max_diff(&SimConfig::new(p, 200_000, 9))?;
    println!(" i   e(i)        simulated");
    for i in 0..8 {
        println!("{i:>2}   {:.6}    {:.6}", series.get(i), hist.pmf(i));
    }
    println!("residual after 12 terms: {:.2e}", series.residual);
    println!("E[e^M] = {:.6}", mgf_m(&p, 1.0)?);
    Ok(())
}
