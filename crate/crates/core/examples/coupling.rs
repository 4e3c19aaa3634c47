//! Coupling of two integer variables that makes P(X + Y >= 0) as large as
//! the marginals allow: the minimum of phi over n.

use naklab::probability::{couple_extremal, extremal_split, phi};
use naklab::DiscreteCdf;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn main() -> naklab::Result<()> {
    let fx = DiscreteCdf::from_pmf(-3, &[0.1, 0.2, 0.3, 0.4])?;
    let fy = DiscreteCdf::from_pmf(0, &[0.5, 0.25, 0.25])?;
    let (a_star, best) = extremal_split(&fx, &fy);
    println!("a* = {a_star}, max P(X+Y>=0) = {best:.4}");
    for n in -3..=3 {
        println!("  phi({n:>2}) = {:.4}", phi(&fx, &fy, n));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let trials = 200_000;
    let mut hits = 0;
    for _ in 0..trials {
        let (x, y) = couple_extremal(&fx, &fy, a_star, rng.random())?;
        hits += (x + y >= 0) as u32;
    }
    println!("sampled P(X+Y>=0) = {:.4}", hits as f64 / trials as f64);
    Ok(())
}
