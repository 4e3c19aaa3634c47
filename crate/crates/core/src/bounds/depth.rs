use super::quad::erlang_expectation;
use super::{convolve, BoundEngine, BoundKind, BoundReport, Truncation, Variant};
use crate::balanced::ccdf_xk;
use crate::error::{Error, Result};
use crate::probability::poisson_cdf_table;

impl BoundEngine {
    /// G(j) = E[F₁(j; a(T + shift))] for j = 0..=jmax, with T = kΔ + Erlang(k, h).
    fn arrival_cdf(&self, k: u64, shift: f64, jmax: usize) -> Result<(Vec<f64>, Truncation)> {
        let p = &self.params;
        let base = k as f64 * p.delta + shift;
        let (g, info) = erlang_expectation(k, p.h, jmax + 1, self.depth_opts.quad_tol, |u, out| {
            let lam = (p.a * (u + base)).max(0.0);
            match poisson_cdf_table(jmax, lam) {
                Ok(t) => out.copy_from_slice(&t),
                Err(_) => out.fill(f64::NAN),
            }
        })?;
        if g.iter().any(|v| v.is_nan()) {
            return Err(Error::Accuracy { achieved: f64::NAN });
        }
        let tr = Truncation {
            series_order: self.series.n_max,
            series_residual: self.series.residual,
            panels: info.panels,
            quad_change: info.change,
            u_max: info.u_max,
            ..Truncation::default()
        };
        Ok((g, tr))
    }

    pub fn depth_upper(&self, k: u64) -> Result<BoundReport> {
        if k == 0 {
            return Err(Error::Parameter("depth must be >= 1".into()));
        }
        let ku = k as usize;
        let shift = match self.variant {
            Variant::Canonical => 4.0,
            Variant::Revised => 3.0,
        } * self.params.delta;
        let e = self.series.padded(ku);
        let w = convolve(&e, &e, ku + 1);
        let (g, mut tr) = self.arrival_cdf(k, shift, ku - 1)?;
        let n_max = self.depth_opts.n_max.unwrap_or(k.min(400)).clamp(1, k);
        let mut best = (f64::INFINITY, 1);
        for n in 1..=n_max {
            let m = ku - n as usize;
            let s: f64 = (0..=m).map(|i| w[i] * g[m - i]).sum();
            let v = (1.0 - s) + ccdf_xk(&self.balance, n - 1, k);
            if v < best.0 {
                best = (v, n);
            }
        }
        tr.n_scanned = n_max;
        Ok(self.report(BoundKind::DepthUpper, k as f64, best.0, Some(best.1), tr))
    }

    pub fn depth_lower(&self, k: u64) -> Result<BoundReport> {
        if k == 0 {
            return Err(Error::Parameter("depth must be >= 1".into()));
        }
        let p = &self.params;
        if p.a >= p.h {
            return Err(Error::Domain("a >= h makes the geometric lead improper".into()));
        }
        let ku = k as usize;
        let rho = p.a / p.h;
        let geo: Vec<f64> = (0..=ku).map(|i| (1.0 - rho) * rho.powi(i as i32)).collect();
        let e = self.series.padded(ku);
        let w = convolve(&geo, &e, ku + 1);
        let (g, tr) = self.arrival_cdf(k, -p.delta, ku)?;
        let stay = (-p.hbar()).exp();
        let mut s = 0.0;
        for m in 0..=ku {
            let short = if m < ku { g[ku - 1 - m] } else { 0.0 };
            s += w[m] * (stay * short + (1.0 - stay) * g[ku - m]);
        }
        // E[e^{−h(T+2Δ)}] with T = kΔ + Erlang(k, h)
        let no_pacer = (-(p.h * (k as f64 + 2.0) * p.delta) - k as f64 * std::f64::consts::LN_2).exp();
        let raw = 1.0 - no_pacer - s - self.series.residual.max(0.0);
        Ok(self.report(BoundKind::DepthLower, k as f64, raw, None, tr))
    }
}
