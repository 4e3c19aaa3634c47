//! Poisson, Erlang and binomial kernels, and the extremal coupling of two
//! integer-valued variables.
//!
//! Kernels return raw `f64` values; clamping to `[0, 1]` is left to callers
//! that build a [`Prob`].

use serde::{Deserialize, Serialize};
use statrs::function::beta::beta_reg;
use statrs::function::gamma::{gamma_lr, gamma_ur, ln_gamma};

use crate::error::{Error, Result};

/// A probability clamped to `[0, 1]`, keeping the pre-clamp value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Prob {
    pub value: f64,
    pub unclamped: f64,
}

impl Prob {
    pub fn clamp(raw: f64) -> Self {
        Self { value: raw.clamp(0.0, 1.0), unclamped: raw }
    }

    pub fn was_clamped(&self) -> bool {
        self.value != self.unclamped
    }
}

fn check_mean(lam: f64) -> Result<()> {
    if !lam.is_finite() || lam < 0.0 {
        return Err(Error::Parameter(format!("Poisson mean {lam} must be finite and >= 0")));
    }
    Ok(())
}

fn ln_poisson_pmf(i: u64, lam: f64) -> f64 {
    let x = i as f64;
    x * lam.ln() - lam - ln_gamma(x + 1.0)
}

pub fn poisson_pmf(i: u64, lam: f64) -> Result<f64> {
    check_mean(lam)?;
    if lam == 0.0 {
        return Ok(if i == 0 { 1.0 } else { 0.0 });
    }
    Ok(ln_poisson_pmf(i, lam).exp())
}

pub fn poisson_cdf(i: i64, lam: f64) -> Result<f64> {
    check_mean(lam)?;
    if i < 0 {
        return Ok(0.0);
    }
    if lam == 0.0 {
        return Ok(1.0);
    }
    Ok(gamma_ur(i as f64 + 1.0, lam))
}

/// pmf values for `0..=n`, filled outward from the mode so that large means
/// do not underflow the recursion.
pub fn poisson_pmf_table(n: usize, lam: f64) -> Result<Vec<f64>> {
    check_mean(lam)?;
    let mut p = vec![0.0; n + 1];
    if lam == 0.0 {
        p[0] = 1.0;
        return Ok(p);
    }
    let mode = (lam.floor() as usize).min(n);
    p[mode] = ln_poisson_pmf(mode as u64, lam).exp();
    for m in mode + 1..=n {
        p[m] = p[m - 1] * lam / m as f64;
    }
    for m in (0..mode).rev() {
        p[m] = p[m + 1] * (m + 1) as f64 / lam;
    }
    Ok(p)
}

/// Cumulative version of [`poisson_pmf_table`].
pub fn poisson_cdf_table(n: usize, lam: f64) -> Result<Vec<f64>> {
    let mut p = poisson_pmf_table(n, lam)?;
    let mut acc = 0.0;
    for v in p.iter_mut() {
        acc += *v;
        *v = acc.min(1.0);
    }
    Ok(p)
}

fn check_erlang(k: u64, h: f64) -> Result<()> {
    if k == 0 {
        return Err(Error::Parameter("Erlang shape must be >= 1".into()));
    }
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::Parameter(format!("Erlang rate {h} must be positive")));
    }
    Ok(())
}

/// Density of the sum of `k` exponentials with rate `h`.
pub fn erlang_pdf(t: f64, k: u64, h: f64) -> Result<f64> {
    check_erlang(k, h)?;
    if t < 0.0 || (t == 0.0 && k > 1) {
        return Ok(0.0);
    }
    if t == 0.0 {
        return Ok(h);
    }
    Ok(ln_erlang_pdf(t, k, h).exp())
}

pub(crate) fn ln_erlang_pdf(t: f64, k: u64, h: f64) -> f64 {
    let kf = k as f64;
    kf * h.ln() + (kf - 1.0) * t.ln() - h * t - ln_gamma(kf)
}

pub fn erlang_cdf(t: f64, k: u64, h: f64) -> Result<f64> {
    check_erlang(k, h)?;
    if t <= 0.0 {
        return Ok(0.0);
    }
    Ok(gamma_lr(k as f64, h * t))
}

/// Smallest `t` with `erlang_cdf(t) >= p`, by bracketing and bisection.
pub fn erlang_quantile(p: f64, k: u64, h: f64) -> Result<f64> {
    check_erlang(k, h)?;
    if !(0.0..1.0).contains(&p) {
        return Err(Error::Parameter(format!("quantile level {p} must lie in [0, 1)")));
    }
    let mean = k as f64 / h;
    let sd = (k as f64).sqrt() / h;
    let mut hi = mean + 8.0 * sd + 40.0 / h;
    while gamma_lr(k as f64, h * hi) < p {
        hi *= 2.0;
    }
    let mut lo = 0.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if gamma_lr(k as f64, h * mid) < p {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-12 * hi {
            break;
        }
    }
    Ok(hi)
}

/// P(Bin(k, p) > n).
pub fn binom_ccdf(n: i64, k: u64, p: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::Parameter(format!("success probability {p} outside [0, 1]")));
    }
    if n < 0 {
        return Ok(1.0);
    }
    if n as u64 >= k {
        return Ok(0.0);
    }
    if p == 0.0 {
        return Ok(0.0);
    }
    if p == 1.0 {
        return Ok(1.0);
    }
    // P(X >= n+1) = I_p(n+1, k-n)
    Ok(beta_reg(n as f64 + 1.0, (k - n as u64) as f64, p))
}

/// cdf of an integer variable supported on `offset..=offset+N`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscreteCdf {
    pub offset: i64,
    pub cdf: Vec<f64>,
    pub tail_mass: f64,
}

impl DiscreteCdf {
    pub fn from_pmf(offset: i64, pmf: &[f64]) -> Result<Self> {
        if pmf.is_empty() {
            return Err(Error::Parameter("empty pmf".into()));
        }
        let mut cdf = Vec::with_capacity(pmf.len());
        let mut acc = 0.0;
        for &p in pmf {
            if !(p >= 0.0) {
                return Err(Error::Parameter(format!("negative or NaN mass {p}")));
            }
            acc += p;
            cdf.push(acc);
        }
        if acc > 1.0 + 1e-12 {
            return Err(Error::Parameter(format!("total mass {acc} exceeds 1")));
        }
        let tail_mass = (1.0 - acc).max(0.0);
        Ok(Self { offset, cdf, tail_mass })
    }

    pub fn min_support(&self) -> i64 {
        self.offset
    }

    pub fn max_support(&self) -> i64 {
        self.offset + self.cdf.len() as i64 - 1
    }

    /// P(X <= x)
    pub fn at(&self, x: i64) -> f64 {
        if x < self.offset {
            return 0.0;
        }
        let i = ((x - self.offset) as usize).min(self.cdf.len() - 1);
        self.cdf[i]
    }

    /// P(X > x)
    pub fn ccdf(&self, x: i64) -> f64 {
        1.0 - self.at(x)
    }

    /// Generalized inverse `sup{m : F(m) < u}`, i.e. the least `m` with `F(m) >= u`.
    pub fn inverse(&self, u: f64) -> i64 {
        let i = self.cdf.partition_point(|&c| c < u);
        self.offset + i.min(self.cdf.len() - 1) as i64
    }
}

/// φ(n) = P(X > −n) + P(Y > n−1), an upper bound on P(X + Y ≥ 0) under any coupling.
pub fn phi(fx: &DiscreteCdf, fy: &DiscreteCdf, n: i64) -> f64 {
    fx.ccdf(-n) + fy.ccdf(n - 1)
}

/// Minimizer of [`phi`]; ties resolve to the smallest `n`.
pub fn extremal_split(fx: &DiscreteCdf, fy: &DiscreteCdf) -> (i64, f64) {
    let lo = (-fx.max_support()).min(fy.min_support()) - 1;
    let hi = (-fx.min_support()).max(fy.max_support()) + 2;
    let mut best = (lo, f64::INFINITY);
    for n in lo..=hi {
        let v = phi(fx, fy, n);
        if v < best.1 {
            best = (n, v);
        }
    }
    best
}

/// Joint draw attaining P(X₀ + Y₀ ≥ 0) = φ(a*) when `u` is uniform on [0, 1).
pub fn couple_extremal(fx: &DiscreteCdf, fy: &DiscreteCdf, a_star: i64, u: f64) -> Result<(i64, i64)> {
    // sums of two ccdfs overshoot 1 by a rounding step even when φ = 1
    if phi(fx, fy, a_star) > 1.0 + 1e-12 {
        return Err(Error::Degenerate(format!("phi({a_star}) > 1; no coupling attains it")));
    }
    let ux = u + fx.at(-a_star);
    let uy = fy.at(a_star - 1) - u;
    let x = fx.inverse(ux - ux.floor());
    let y = fy.inverse(uy - uy.floor());
    Ok((x, y))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn poisson_examples() {
        assert_eq!(poisson_pmf(0, 0.0).unwrap(), 1.0);
        assert!((poisson_pmf(0, 0.0125).unwrap() - (-0.0125f64).exp()).abs() < 1e-15);
        assert!((poisson_pmf(2, 1.0).unwrap() - (-1.0f64).exp() / 2.0).abs() < 1e-15);
        assert_eq!(poisson_cdf(-1, 5.0).unwrap(), 0.0);
        assert!((poisson_cdf(1, 1.0).unwrap() - 2.0 * (-1.0f64).exp()).abs() < 1e-14);
        assert!((poisson_cdf(200, 5.0).unwrap() - 1.0).abs() < 1e-15);
        assert!(poisson_pmf(1, -1.0).is_err());
    }

    #[test]
    fn poisson_table_survives_large_means() {
        let t = poisson_cdf_table(1200, 1000.0).unwrap();
        assert!((t[1000] - poisson_cdf(1000, 1000.0).unwrap()).abs() < 1e-12);
        assert!((t[1200] - 1.0).abs() < 1e-9);
    }

    #[test]
    fn erlang_examples() {
        assert_eq!(erlang_pdf(0.0, 3, 2.0).unwrap(), 0.0);
        assert!((erlang_pdf(0.7, 1, 2.0).unwrap() - 2.0 * (-1.4f64).exp()).abs() < 1e-15);
        assert_eq!(erlang_cdf(0.0, 3, 2.0).unwrap(), 0.0);
        assert!((erlang_cdf(2.0, 2, 1.0).unwrap() - (1.0 - 3.0 * (-2.0f64).exp())).abs() < 1e-14);
        assert!((erlang_cdf(0.3, 1, 4.0).unwrap() - (1.0 - (-1.2f64).exp())).abs() < 1e-15);
        assert!(erlang_pdf(1.0, 0, 1.0).is_err());
    }

    #[test]
    fn erlang_quantile_inverts_cdf() {
        let q = erlang_quantile(1.0 - 1e-12, 160, 0.001).unwrap();
        let c = erlang_cdf(q, 160, 0.001).unwrap();
        assert!((1.0 - 1e-12..1.0 - 1e-13 * 0.5).contains(&c));
    }

    #[test]
    fn binom_examples() {
        assert_eq!(binom_ccdf(5, 5, 0.3).unwrap(), 0.0);
        assert_eq!(binom_ccdf(-1, 5, 0.3).unwrap(), 1.0);
        assert!((binom_ccdf(0, 2, 0.5).unwrap() - 0.75).abs() < 1e-15);
        assert!(binom_ccdf(0, 2, 1.5).is_err());
    }

    #[test]
    fn inverse_takes_plateau_right_end() {
        // mass at 0 and 2, none at 1: F = (0.5, 0.5, 1.0)
        let f = DiscreteCdf::from_pmf(0, &[0.5, 0.0, 0.5]).unwrap();
        assert_eq!(f.inverse(0.5), 0);
        assert_eq!(f.inverse(0.5000001), 2);
        assert_eq!(f.inverse(0.0), 0);
    }

    #[test]
    fn point_masses_couple_to_origin() {
        let f = DiscreteCdf::from_pmf(0, &[1.0]).unwrap();
        for u in [0.0, 0.25, 0.999] {
            assert_eq!(couple_extremal(&f, &f, 0, u).unwrap(), (0, 0));
        }
        // with Y ≡ 5, φ(1) = P(X > −1) + P(Y > 0) = 2
        let five = DiscreteCdf::from_pmf(5, &[1.0]).unwrap();
        assert!(couple_extremal(&f, &five, 1, 0.3).is_err());
        let g = DiscreteCdf::from_pmf(-1, &[1.0]).unwrap();
        let (a, v) = extremal_split(&f, &g);
        assert_eq!(v, 0.0);
        for u in [0.0, 0.25, 0.999] {
            assert_eq!(couple_extremal(&f, &g, a, u).unwrap(), (0, -1));
        }
    }
}
