use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Adversarial rate `a`, honest rate `h` (blocks per second) and delay bound `delta` (seconds).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MiningParams {
    pub a: f64,
    pub h: f64,
    pub delta: f64,
}

impl MiningParams {
    pub fn new(a: f64, h: f64, delta: f64) -> Result<Self> {
        if !(a.is_finite() && h.is_finite() && delta.is_finite()) {
            return Err(Error::Parameter("rates and delay must be finite".into()));
        }
        if a < 0.0 || delta < 0.0 {
            return Err(Error::Parameter("a and delta must be non-negative".into()));
        }
        if h <= 0.0 {
            return Err(Error::Parameter("h must be positive".into()));
        }
        Ok(Self { a, h, delta })
    }

    /// Splits a total rate `lambda` with adversarial fraction `beta`: a = βλ, h = (1−β)λ.
    pub fn from_total(lambda: f64, beta: f64, delta: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&beta) {
            return Err(Error::Parameter(format!("beta = {beta} must lie in [0, 1)")));
        }
        Self::new(beta * lambda, (1.0 - beta) * lambda, delta)
    }

    /// 1/a > Δ + 1/h, written as a(1 + hΔ) < h so that a = 0 needs no special case.
    pub fn within_tolerance(&self) -> bool {
        self.a * (1.0 + self.h * self.delta) < self.h
    }

    pub fn require_tolerance(&self) -> Result<()> {
        if self.within_tolerance() {
            Ok(())
        } else {
            Err(Error::Domain(format!(
                "a = {:e}, h = {:e}, delta = {} violates 1/a > delta + 1/h",
                self.a, self.h, self.delta
            )))
        }
    }

    pub fn abar(&self) -> f64 {
        self.a * self.delta
    }

    pub fn hbar(&self) -> f64 {
        self.h * self.delta
    }

    pub fn beta(&self) -> f64 {
        self.a / (self.a + self.h)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn boundary_is_outside() {
        // 1/a = Δ + 1/h with a = 1/20, h = 1/10, Δ = 10
        let p = MiningParams::new(0.05, 0.1, 10.0).unwrap();
        assert!(!p.within_tolerance());
        let q = MiningParams::new(0.0499, 0.1, 10.0).unwrap();
        assert!(q.within_tolerance());
    }

    #[test]
    fn rejects_bad_rates() {
        assert!(MiningParams::new(-1.0, 1.0, 0.0).is_err());
        assert!(MiningParams::new(0.0, 0.0, 0.0).is_err());
        assert!(MiningParams::new(0.0, 1.0, f64::NAN).is_err());
    }
}
