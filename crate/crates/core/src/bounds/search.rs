use serde::{Deserialize, Serialize};

use super::{BoundEngine, BoundKind, Direction};
use crate::error::{Error, Result};
use crate::params::MiningParams;

pub const DEPTH_CAP: u64 = 5000;
const TIME_REL_WIDTH: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerance {
    pub within: bool,
    /// 1/a − Δ − 1/h in seconds; +∞ when a = 0.
    pub margin: f64,
    /// Adversarial fraction on the boundary a = h/(1 + hΔ) at the same total rate.
    pub beta_star: f64,
}

/// Root of a(1 + hΔ) = h with a = βλ, h = (1−β)λ; x = λΔ.
pub fn beta_star(lambda: f64, delta: f64) -> f64 {
    let x = lambda * delta;
    2.0 / (2.0 + x + (4.0 + x * x).sqrt())
}

pub fn tolerance_check(params: &MiningParams) -> Tolerance {
    let margin = if params.a == 0.0 { f64::INFINITY } else { 1.0 / params.a - params.delta - 1.0 / params.h };
    Tolerance { within: params.within_tolerance(), margin, beta_star: beta_star(params.a + params.h, params.delta) }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DepthSearch {
    pub k: u64,
    pub value: f64,
    /// Value at k − 1 (None when k = 1).
    pub value_below: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeSearch {
    pub t: f64,
    pub t_lo: f64,
    pub t_hi: f64,
    pub value: f64,
}

impl BoundEngine {
    fn depth_value(&self, kind: BoundKind, k: u64) -> Result<f64> {
        Ok(self.eval(kind, k as f64)?.value.value)
    }

    /// For upper bounds, the smallest k whose bound is at most `target`.
    /// Lower bounds need not be monotone at small k, so for them the result is
    /// one past the largest k whose lower bound still exceeds `target`.
    pub fn min_depth(&self, kind: BoundKind, target: f64) -> Result<DepthSearch> {
        if !kind.is_depth() {
            return Err(Error::Parameter(format!("{} is not a depth bound", kind.name())));
        }
        if !(target > 0.0 && target <= 1.0) {
            return Err(Error::Parameter(format!("target {target} must lie in (0, 1]")));
        }
        let f = |k: u64| self.depth_value(kind, k);
        let done = |k: u64, v: f64| -> Result<DepthSearch> {
            let value_below = if k > 1 { Some(f(k - 1)?) } else { None };
            Ok(DepthSearch { k, value: v, value_below })
        };
        match kind.direction() {
            Direction::Upper => {
                let mut lo = 0; // f(lo) > target, or lo = 0
                let mut hi = 1;
                let mut v_hi = f(hi)?;
                while v_hi > target {
                    if hi >= DEPTH_CAP {
                        return Err(Error::SearchExhausted { cap: DEPTH_CAP, target });
                    }
                    lo = hi;
                    hi = (hi * 2).min(DEPTH_CAP);
                    v_hi = f(hi)?;
                }
                while hi - lo > 1 {
                    let mid = (lo + hi) / 2;
                    let v = f(mid)?;
                    if v <= target {
                        hi = mid;
                        v_hi = v;
                    } else {
                        lo = mid;
                    }
                }
                done(hi, v_hi)
            }
            Direction::Lower => {
                // walk out until the bound is below target and decaying
                let mut prev = f(1)?;
                let mut lo;
                let mut hi = 1;
                loop {
                    if hi >= DEPTH_CAP {
                        return Err(Error::SearchExhausted { cap: DEPTH_CAP, target });
                    }
                    let next = (hi * 2).min(DEPTH_CAP);
                    let v = f(next)?;
                    let decaying = v <= prev;
                    lo = hi;
                    hi = next;
                    prev = v;
                    if v <= target && decaying {
                        break;
                    }
                }
                if f(lo)? <= target {
                    // nothing above target on the decaying branch; scan the head
                    let mut last = 0;
                    for k in 1..lo {
                        if f(k)? > target {
                            last = k;
                        }
                    }
                    let k = last + 1;
                    return done(k, f(k)?);
                }
                while hi - lo > 1 {
                    let mid = (lo + hi) / 2;
                    if f(mid)? <= target {
                        hi = mid;
                    } else {
                        lo = mid;
                    }
                }
                done(hi, f(hi)?)
            }
        }
    }

    /// Smallest t (to relative width 1e−3) with bound at most `target`; same
    /// convention as [`BoundEngine::min_depth`] for lower bounds.
    pub fn min_time(&self, kind: BoundKind, target: f64) -> Result<TimeSearch> {
        if kind.is_depth() {
            return Err(Error::Parameter(format!("{} is not a time bound", kind.name())));
        }
        if !(target > 0.0 && target <= 1.0) {
            return Err(Error::Parameter(format!("target {target} must lie in (0, 1]")));
        }
        let f = |t: f64| -> Result<f64> { Ok(self.eval(kind, t)?.value.value) };
        let unit = 1.0 / (self.params.a + self.params.h) + self.params.delta;
        let floor = unit * 1e-6;
        let cap = unit * 1e7;
        let mut hi = unit;
        let mut v_hi = f(hi)?;
        let mut prev = v_hi;
        loop {
            let decaying = kind.direction() == Direction::Upper || v_hi <= prev;
            if v_hi <= target && decaying {
                break;
            }
            if hi >= cap {
                return Err(Error::SearchExhausted { cap: cap as u64, target });
            }
            prev = v_hi;
            hi *= 2.0;
            v_hi = f(hi)?;
        }
        let mut lo = hi / 2.0;
        while f(lo)? <= target {
            if lo <= floor {
                return Ok(TimeSearch { t: 0.0, t_lo: 0.0, t_hi: lo, value: f(lo)? });
            }
            hi = lo;
            lo /= 2.0;
        }
        while hi - lo > TIME_REL_WIDTH * hi {
            let mid = 0.5 * (lo + hi);
            if f(mid)? <= target {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        Ok(TimeSearch { t: hi, t_lo: lo, t_hi: hi, value: f(hi)? })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn boundary_fraction() {
        assert!((beta_star(1.0 / 600.0, 10.0) - 0.498).abs() < 1e-3);
        assert_eq!(beta_star(1.0, 0.0), 0.5);
        let p = MiningParams::from_total(1.0 / 600.0, beta_star(1.0 / 600.0, 10.0), 10.0).unwrap();
        assert!((p.a * (1.0 + p.h * p.delta) - p.h).abs() < 1e-15);
    }

    #[test]
    fn tolerance_margin() {
        let t = tolerance_check(&MiningParams::new(0.0, 0.01, 10.0).unwrap());
        assert!(t.within && t.margin.is_infinite());
        let t = tolerance_check(&MiningParams::new(0.05, 0.1, 10.0).unwrap());
        assert!(!t.within && t.margin.abs() < 1e-12);
    }
}
