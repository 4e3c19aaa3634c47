//! Tail of the number of balanced heights for Bitcoin- and Ethereum-like
//! parameters, against a run of the extremal chain that attains it.

use naklab::balanced::{ccdf_x, ccdf_xk};
use naklab::{balance_params, simulate_chain, MiningParams};

fn main() -> naklab::Result<()> {
    let chains = [("bitcoin", 1.0 / 600.0, 10.0), ("ethereum-classic", 1.0 / 13.0, 2.0)];
    for (name, lambda, delta) in chains {
        let bp = balance_params(&MiningParams::from_total(lambda, 0.25, delta)?);
        println!("{name}: eps={:.5} delta={:.5}", bp.epsilon, bp.delta);
        let est = simulate_chain(&bp, 1_000_000, 42)?;
        println!("  n   1-F(n)      1-F^(20)(n)  chain");
        for n in 0..4u64 {
            println!(
                "  {n}   {:<10.3e}  {:<11.3e}  {:.3e}",
                ccdf_x(&bp, n),
                ccdf_xk(&bp, n, 20),
                1.0 - est.cdf(n as usize)
            );
        }
    }
    Ok(())
}
