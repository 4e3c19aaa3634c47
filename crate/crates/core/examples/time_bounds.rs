//! Safety versus confirmation time at 25% adversarial power, and the time
//! needed to reach a few targets.

use naklab::{BoundEngine, BoundKind, MiningParams, Variant};

fn main() -> naklab::Result<()> {
    let p = MiningParams::from_total(1.0 / 600.0, 0.25, 10.0)?;
    let engine = BoundEngine::new(p, Variant::Canonical)?;
    println!("t(h)   lower       upper");
    for hours in [1.0, 2.0, 4.0, 8.0, 12.0] {
        let t = hours * 3600.0;
        let lo = engine.time_lower(t)?.value.value;
        let up = engine.time_upper(t)?.value.value;
        println!("{hours:>4}   {lo:.3e}   {up:.3e}");
    }
    for target in [1e-2, 1e-3, 1e-6] {
        let up = engine.min_time(BoundKind::TimeUpper, target)?;
        let lo = engine.min_time(BoundKind::TimeLower, target)?;
        println!("target {target:e}: between {:.2} h and {:.2} h", lo.t / 3600.0, up.t / 3600.0);
    }
    Ok(())
}
