//! Best block rate and block size for a 25% adversary on a 160 KB/s network
//! with 1 s fixed delay, for a few confirmation-time budgets.

use naklab::throughput::{optimize, throughput_rate_cap, SafetyBound, ThroughputProblem};

fn main() -> naklab::Result<()> {
    let (beta, r, nu) = (0.25, 160.0, 1.0);
    println!("cap: {:.1} KB/s", throughput_rate_cap(beta, r));
    for d in [600.0, 3600.0, 6.0 * 3600.0] {
        let mut problem = ThroughputProblem::new(beta, r, nu, 1e-3, d);
        problem.grid = 48;
        match optimize(&problem, SafetyBound::Chernoff) {
            Ok(sol) => {
                let b = sol.best;
                println!(
                    "d={:>6}s: {:.1} KB/s with B={:.0} KB, 1/lambda={:.1}s, k={}",
                    d,
                    b.throughput,
                    b.b,
                    1.0 / b.lambda,
                    b.k
                );
            }
            Err(e) => println!("d={d:>6}s: {e}"),
        }
    }
    Ok(())
}
