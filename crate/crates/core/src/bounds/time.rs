use statrs::function::gamma::gamma_ur;

use super::{convolve, BoundEngine, BoundKind, BoundReport, Truncation};
use crate::balanced::ccdf_x;
use crate::error::{Error, Result};
use crate::probability::poisson_pmf_table;

const TAIL: f64 = 1e-14;
const INDEX_CAP: usize = 200_000;

/// P(Erlang(s, h) > x), with the empty-support convention that it is 1 for x <= 0.
fn erlang_sf(x: f64, s: u64, h: f64) -> f64 {
    if x <= 0.0 {
        1.0
    } else {
        gamma_ur(s as f64, h * x)
    }
}

/// Poisson pmf `0..=i0` where `i0` is the first index whose upper tail is below [`TAIL`].
fn poisson_until_tail(lam: f64, cap: Option<usize>) -> Result<Vec<f64>> {
    let guess = (lam + 12.0 * lam.sqrt() + 40.0).ceil() as usize;
    let n = cap.unwrap_or(guess).min(INDEX_CAP);
    let pmf = poisson_pmf_table(n, lam)?;
    if cap.is_some() {
        return Ok(pmf);
    }
    let mut acc = 0.0;
    for (i, p) in pmf.iter().enumerate() {
        acc += p;
        if 1.0 - acc < TAIL {
            return Ok(pmf[..=i].to_vec());
        }
    }
    Ok(pmf)
}

impl BoundEngine {
    pub fn time_upper(&self, t: f64) -> Result<BoundReport> {
        if !(t > 0.0) {
            return Err(Error::Parameter(format!("confirmation time {t} must be positive")));
        }
        let p = &self.params;
        let o = &self.time_opts;
        let f1 = poisson_until_tail(p.a * (t + 2.0 * p.delta), o.i0)?;
        let order = self.series.n_max;
        let j0 = o.j0.unwrap_or(order).min(order);
        let k0 = o.k0.unwrap_or(order).min(order);
        let ej = &self.series.coeffs[..=j0];
        let ek = &self.series.coeffs[..=k0];
        let len = f1.len() + j0 + k0;
        let w = convolve(&convolve(&f1, ej, len), ek, len);
        let mass = |v: &[f64]| v.iter().sum::<f64>();
        let tail = 1.0 - mass(&f1) * mass(ej) * mass(ek);

        let n_max = o.n_max.unwrap_or(64).max(1);
        let mut best = (f64::INFINITY, 1);
        let mut prev = f64::INFINITY;
        let mut rising = 0;
        let mut scanned = 0;
        for n in 1..=n_max {
            scanned = n;
            let mut g = tail;
            for (m, &wm) in w.iter().enumerate() {
                if wm == 0.0 {
                    continue;
                }
                let s = m as u64 + n;
                g += wm * erlang_sf(t - (s + 2) as f64 * p.delta, s, p.h);
            }
            let v = ccdf_x(&self.balance, n - 1) + g;
            if v < best.0 {
                best = (v, n);
            }
            rising = if v > prev { rising + 1 } else { 0 };
            prev = v;
            if rising >= 8 {
                break;
            }
        }
        let tr = Truncation {
            series_order: order,
            series_residual: self.series.residual,
            i0: f1.len() - 1,
            j0,
            k0,
            tail_term: tail,
            n_scanned: scanned,
            ..Truncation::default()
        };
        let mut rep = self.report(BoundKind::TimeUpper, t, best.0, Some(best.1), tr);
        if tail > 0.5 {
            rep.warnings.push(format!("truncation tail term {tail:.3e} exceeds 0.5"));
        }
        Ok(rep)
    }

    pub fn time_lower(&self, t: f64) -> Result<BoundReport> {
        if !(t > 0.0) {
            return Err(Error::Parameter(format!("confirmation time {t} must be positive")));
        }
        let p = &self.params;
        if p.a >= p.h {
            return Err(Error::Domain("a >= h makes the geometric lead improper".into()));
        }
        let o = &self.time_opts;
        let tau = t + 2.0 * p.delta;
        let rho = p.a / p.h;
        // (1 − ρ)ρ^k e^{(h−a)τ} F₁(k; hτ) is the pmf of a geometric lead plus a
        // Poisson(aτ) count, so the exponential prefactor folds into a convolution.
        let poi = poisson_until_tail(p.a * tau, None)?;
        let geo_len = if rho > 0.0 { ((TAIL.ln() / rho.ln()).ceil() as usize).max(1) } else { 1 };
        let k_max = o.k_max.unwrap_or(poi.len() + geo_len).min(INDEX_CAP);
        let geo: Vec<f64> = (0..=k_max).map(|i| (1.0 - rho) * rho.powi(i as i32)).collect();
        let v = convolve(&geo, &poi, k_max + 1);
        let order = self.series.n_max;
        let j_max = o.j_max.unwrap_or(order).min(order);
        let ej = &self.series.coeffs[..=j_max];
        let u = convolve(ej, &v, j_max + k_max + 1);
        let mut s = 0.0;
        for (idx, &um) in u.iter().enumerate() {
            if um == 0.0 {
                continue;
            }
            s += um * erlang_sf(t + p.delta - idx as f64 * p.delta, idx as u64 + 1, p.h);
        }
        let raw = s - (-p.h * tau).exp();
        let tr = Truncation {
            series_order: order,
            series_residual: self.series.residual,
            j0: j_max,
            k0: k_max,
            ..Truncation::default()
        };
        Ok(self.report(BoundKind::TimeLower, t, raw, None, tr))
    }
}
