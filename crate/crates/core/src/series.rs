//! The generating function 𝓔(r) of the maximum difference M between the
//! adversarial arrivals and a renewal process with inter-arrival Δ + Exp(h),
//! and its Taylor coefficients e(i) = P(M = i).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::MiningParams;

pub const DEFAULT_RESIDUAL: f64 = 1e-10;
pub const MAX_ORDER: usize = 2000;
const NEG_SLACK: f64 = -1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PmfSeries {
    pub coeffs: Vec<f64>,
    pub n_max: usize,
    pub residual: f64,
}

impl PmfSeries {
    /// e(i), zero past the truncation order.
    pub fn get(&self, i: usize) -> f64 {
        self.coeffs.get(i).copied().unwrap_or(0.0)
    }

    /// Coefficients `0..=n`, zero padded.
    pub fn padded(&self, n: usize) -> Vec<f64> {
        (0..=n).map(|i| self.get(i)).collect()
    }

    pub fn cdf(&self, i: usize) -> f64 {
        self.coeffs.iter().take(i + 1).sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Precision {
    Double,
    DoubleDouble,
}

fn numerator_constant(p: &MiningParams) -> f64 {
    p.h - p.a - p.h * p.a * p.delta
}

/// Denominator of 𝓔 divided by (1 − r); equals h − a − haΔ at r = 1.
fn reduced_denominator(p: &MiningParams, r: f64) -> f64 {
    let x = 1.0 - r;
    let al = p.abar();
    let z = al * x;
    let ratio = if z == 0.0 { 1.0 } else { z.exp_m1() / z };
    -p.h * al * ratio + (p.h - p.a + p.a * x) * z.exp()
}

pub fn pgf_eval(params: &MiningParams, r: f64) -> Result<f64> {
    params.require_tolerance()?;
    if !r.is_finite() {
        return Err(Error::Parameter(format!("pgf argument {r} is not finite")));
    }
    let q = reduced_denominator(params, r);
    if q.abs() <= 1e-14 * params.h {
        return Err(Error::Pole { r });
    }
    Ok(numerator_constant(params) / q)
}

/// Location of the first pole of 𝓔 on (1, r_max], if any.
pub fn pole_below(params: &MiningParams, r_max: f64) -> Option<f64> {
    const SCAN: usize = 512;
    let f = |r: f64| reduced_denominator(params, r);
    let mut lo = 1.0;
    for s in 1..=SCAN {
        let r = 1.0 + (r_max - 1.0) * s as f64 / SCAN as f64;
        if f(r) <= 0.0 {
            let mut hi = r;
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if f(mid) > 0.0 {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            return Some(hi);
        }
        lo = r;
    }
    None
}

/// E[e^{νM}] = 𝓔(e^ν).
pub fn mgf_m(params: &MiningParams, nu: f64) -> Result<f64> {
    params.require_tolerance()?;
    if !(nu >= 0.0 && nu.is_finite()) {
        return Err(Error::Parameter(format!("nu = {nu} must be finite and >= 0")));
    }
    let r = nu.exp();
    if let Some(pole) = pole_below(params, r) {
        return Err(Error::DivergentMgf { pole, at: r });
    }
    pgf_eval(params, r)
}

pub fn pmf_series(params: &MiningParams, n_max: usize) -> Result<PmfSeries> {
    series_impl(params, n_max, None, Precision::Double)
}

/// Smallest order with residual below `tol`, capped at `cap`.
pub fn pmf_series_to(params: &MiningParams, tol: f64, cap: usize) -> Result<PmfSeries> {
    series_impl(params, cap, Some(tol), Precision::Double)
}

pub fn pmf_series_default(params: &MiningParams) -> Result<PmfSeries> {
    pmf_series_to(params, DEFAULT_RESIDUAL, MAX_ORDER)
}

pub fn pmf_series_with(params: &MiningParams, n_max: usize, precision: Precision) -> Result<PmfSeries> {
    series_impl(params, n_max, None, precision)
}

fn series_impl(params: &MiningParams, n_max: usize, tol: Option<f64>, precision: Precision) -> Result<PmfSeries> {
    params.require_tolerance()?;
    let first = match precision {
        Precision::Double => run_f64(params, n_max, tol),
        Precision::DoubleDouble => run_dd(params, n_max, tol),
    };
    match first {
        Err(Error::Instability { .. }) if precision == Precision::Double => run_dd(params, n_max, tol),
        other => other,
    }
}

/// Coefficients of the reduced denominator Q(r) = D(r)/(1 − r), where
/// D(r) = h − e^{aΔ(1−r)}(h + a − ar) r. With g_j = (−aΔ)^j/j! and
/// T_n = Σ_{j≥n} g_j this is Q_n = e^{aΔ}(h T_n − a g_{n−1}), Q_0 = h.
/// Dividing C by Q instead of C(1 − r) by D keeps the root at r = 1 out of
/// the recurrence, so rounding errors decay with the coefficients.
fn reduced_terms(params: &MiningParams, n_max: usize) -> Vec<Dd> {
    let al = params.abar();
    // aΔ < 1 inside the tolerance region, so 40 extra terms exhaust T_n
    let len = n_max + 41;
    let mut g = Vec::with_capacity(len + 1);
    let mut cur = Dd::from(1.0);
    for j in 0..=len {
        g.push(cur);
        cur = cur.mul(Dd::from(-al)).div_f64((j + 1) as f64);
    }
    let mut tail = vec![Dd::from(0.0); len + 2];
    for j in (0..=len).rev() {
        tail[j] = tail[j + 1].add(g[j]);
    }
    let scale = Dd::from(al.exp());
    let (h, a) = (Dd::from(params.h), Dd::from(params.a));
    let mut q = Vec::with_capacity(n_max + 1);
    q.push(h);
    for n in 1..=n_max {
        q.push(scale.mul(h.mul(tail[n]).add(a.mul(g[n - 1]).neg())));
    }
    q
}

fn finish(coeffs: Vec<f64>) -> Result<PmfSeries> {
    let mut sum = 0.0;
    let mut comp = 0.0;
    for (i, &c) in coeffs.iter().enumerate() {
        if c < NEG_SLACK {
            return Err(Error::Instability { index: i, value: c });
        }
        let y = c - comp;
        let t = sum + y;
        comp = (t - sum) - y;
        sum = t;
    }
    let n_max = coeffs.len() - 1;
    Ok(PmfSeries { coeffs, n_max, residual: 1.0 - sum })
}

fn run_f64(params: &MiningParams, n_max: usize, tol: Option<f64>) -> Result<PmfSeries> {
    let q: Vec<f64> = reduced_terms(params, n_max).iter().map(|x| x.hi + x.lo).collect();
    let h = params.h;
    let mut c: Vec<f64> = Vec::with_capacity(n_max + 1);
    let mut total = 0.0;
    for n in 0..=n_max {
        let num = if n == 0 { numerator_constant(params) } else { 0.0 };
        // Kahan-compensated Σ Q_m c_{n−m}
        let mut s = 0.0;
        let mut comp = 0.0;
        for m in 1..=n {
            let y = q[m] * c[n - m] - comp;
            let t = s + y;
            comp = (t - s) - y;
            s = t;
        }
        let v = (num - s) / h;
        if v < NEG_SLACK {
            return Err(Error::Instability { index: n, value: v });
        }
        c.push(v);
        total += v;
        if let Some(tol) = tol {
            if 1.0 - total < tol && n > 0 {
                break;
            }
        }
    }
    finish(c)
}

#[derive(Debug, Clone, Copy)]
struct Dd {
    hi: f64,
    lo: f64,
}

impl Dd {
    fn from(x: f64) -> Self {
        Self { hi: x, lo: 0.0 }
    }

    fn two_sum(a: f64, b: f64) -> (f64, f64) {
        let s = a + b;
        let bb = s - a;
        (s, (a - (s - bb)) + (b - bb))
    }

    fn add(self, o: Dd) -> Dd {
        let (s, e) = Self::two_sum(self.hi, o.hi);
        let e = e + self.lo + o.lo;
        let (hi, lo) = Self::two_sum(s, e);
        Dd { hi, lo }
    }

    fn neg(self) -> Dd {
        Dd { hi: -self.hi, lo: -self.lo }
    }

    fn mul(self, o: Dd) -> Dd {
        let p = self.hi * o.hi;
        let e = self.hi.mul_add(o.hi, -p);
        let e = e + self.hi * o.lo + self.lo * o.hi;
        let (hi, lo) = Self::two_sum(p, e);
        Dd { hi, lo }
    }

    fn div_f64(self, d: f64) -> Dd {
        let q1 = self.hi / d;
        let p = q1 * d;
        let r = self.add(Dd { hi: -p, lo: -q1.mul_add(d, -p) });
        let q2 = r.hi / d;
        let (hi, lo) = Self::two_sum(q1, q2);
        Dd { hi, lo }
    }
}

fn run_dd(params: &MiningParams, n_max: usize, tol: Option<f64>) -> Result<PmfSeries> {
    let q = reduced_terms(params, n_max);
    let mut c: Vec<Dd> = Vec::with_capacity(n_max + 1);
    let mut out = Vec::with_capacity(n_max + 1);
    let mut total = Dd::from(0.0);
    for n in 0..=n_max {
        let num = Dd::from(if n == 0 { numerator_constant(params) } else { 0.0 });
        let mut s = Dd::from(0.0);
        for m in 1..=n {
            s = s.add(q[m].mul(c[n - m]));
        }
        let v = num.add(s.neg()).div_f64(params.h);
        if v.hi < NEG_SLACK {
            return Err(Error::Instability { index: n, value: v.hi });
        }
        c.push(v);
        out.push(v.hi + v.lo);
        total = total.add(v);
        if let Some(tol) = tol {
            if 1.0 - (total.hi + total.lo) < tol && n > 0 {
                break;
            }
        }
    }
    finish(out)
}
