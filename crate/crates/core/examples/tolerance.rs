//! Fault-tolerance boundary 1/a = Δ + 1/h at one block per 600 s, for a few
//! propagation delays, and the check for some concrete (a, h, Δ).

use naklab::{beta_star, tolerance_check, MiningParams};

fn main() -> naklab::Result<()> {
    let lambda = 1.0 / 600.0;
    println!("delta(s)  beta*");
    for delta in [0.0, 1.0, 10.0, 60.0, 600.0] {
        println!("{delta:>8}  {:.4}", beta_star(lambda, delta));
    }

    for beta in [0.25, 0.49, 0.5] {
        let p = MiningParams::from_total(lambda, beta, 10.0)?;
        let t = tolerance_check(&p);
        println!("beta={beta}: within={} margin={:.1}s", t.within, t.margin);
    }
    Ok(())
}
