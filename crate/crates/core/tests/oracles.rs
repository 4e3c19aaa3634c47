//! Cross-checks against independent computations of the same quantities.

use naklab::balanced::{balance_params, ccdf_x, ccdf_xk};
use naklab::probability::{binom_ccdf, erlang_cdf, erlang_pdf, poisson_cdf, poisson_pmf, poisson_pmf_table};
use naklab::series::pmf_series_to;
use naklab::{BoundEngine, MiningParams, Variant};
use statrs::function::gamma::{gamma_ur, ln_gamma};

fn points() -> Vec<MiningParams> {
    let mut v = Vec::new();
    for beta in [0.1, 0.25, 0.4] {
        for (lambda, delta) in [(1.0 / 600.0, 10.0), (1.0 / 13.0, 2.0)] {
            v.push(MiningParams::from_total(lambda, beta, delta).unwrap());
        }
    }
    v
}

#[derive(Clone, Copy)]
struct C(f64, f64);

impl C {
    fn add(self, o: C) -> C {
        C(self.0 + o.0, self.1 + o.1)
    }
    fn sub(self, o: C) -> C {
        C(self.0 - o.0, self.1 - o.1)
    }
    fn mul(self, o: C) -> C {
        C(self.0 * o.0 - self.1 * o.1, self.0 * o.1 + self.1 * o.0)
    }
    fn div(self, o: C) -> C {
        let d = o.0 * o.0 + o.1 * o.1;
        C((self.0 * o.0 + self.1 * o.1) / d, (self.1 * o.0 - self.0 * o.1) / d)
    }
    fn exp(self) -> C {
        let m = self.0.exp();
        C(m * self.1.cos(), m * self.1.sin())
    }
    fn re(x: f64) -> C {
        C(x, 0.0)
    }
}

/// 𝓔(z) = C(1−z) / (h − z·e^{aΔ(1−z)}(h + a − a z)) at complex z.
fn pgf_complex(p: &MiningParams, z: C) -> C {
    let x = C::re(1.0).sub(z);
    let num = C::re(p.h - p.a - p.h * p.a * p.delta).mul(x);
    let growth = C::re(p.a * p.delta).mul(x).exp();
    let inner = z.mul(C::re(p.h + p.a).sub(C::re(p.a).mul(z)));
    num.div(C::re(p.h).sub(growth.mul(inner)))
}

#[test]
fn series_matches_cauchy_integral() {
    const N: usize = 4096;
    let rho = 0.9;
    for p in points() {
        let s = pmf_series_to(&p, 1e-13, 2000).unwrap();
        for i in 0..25usize {
            let mut acc = C(0.0, 0.0);
            for j in 0..N {
                let th = 2.0 * std::f64::consts::PI * j as f64 / N as f64;
                let z = C(rho * th.cos(), rho * th.sin());
                let rot = C((i as f64 * th).cos(), -(i as f64 * th).sin());
                acc = acc.add(pgf_complex(&p, z).mul(rot));
            }
            let e = acc.0 / N as f64 / rho.powi(i as i32);
            assert!((e - s.get(i)).abs() < 1e-11, "{p:?} i={i}: {e} vs {}", s.get(i));
        }
    }
}

fn ln_choose(n: u64, k: u64) -> f64 {
    ln_gamma(n as f64 + 1.0) - ln_gamma(k as f64 + 1.0) - ln_gamma((n - k) as f64 + 1.0)
}

/// P(Pois(a·(U + base)) <= j) for U ~ Erlang(k, h): a negative binomial
/// count for the Erlang part plus an independent Poisson(a·base).
fn arrival_cdf_closed(p: &MiningParams, k: u64, base: f64, jmax: usize) -> Vec<f64> {
    let q = p.h / (p.h + p.a);
    let nb: Vec<f64> = (0..=jmax as u64)
        .map(|n| (ln_choose(n + k - 1, n) + k as f64 * q.ln() + n as f64 * (1.0 - q).ln()).exp())
        .collect();
    let poi: Vec<f64> = (0..=jmax as u64).map(|n| poisson_pmf(n, p.a * base).unwrap()).collect();
    let mut cdf = Vec::with_capacity(jmax + 1);
    let mut acc = 0.0;
    for j in 0..=jmax {
        acc += (0..=j).map(|i| nb[i] * poi[j - i]).sum::<f64>();
        cdf.push(acc);
    }
    cdf
}

fn conv(a: &[f64], b: &[f64], len: usize) -> Vec<f64> {
    (0..len).map(|m| (0..=m).map(|i| a.get(i).unwrap_or(&0.0) * b.get(m - i).unwrap_or(&0.0)).sum()).collect()
}

#[test]
fn depth_upper_matches_negative_binomial_oracle() {
    for p in points() {
        let engine = BoundEngine::new(p, Variant::Canonical).unwrap();
        let bp = balance_params(&p);
        for k in [1u64, 3, 8, 20, 45] {
            let ku = k as usize;
            let e = engine.series.padded(ku);
            let w = conv(&e, &e, ku + 1);
            let g = arrival_cdf_closed(&p, k, (k + 4) as f64 * p.delta, ku);
            let oracle = (1..=k)
                .map(|n| {
                    let m = ku - n as usize;
                    let s: f64 = (0..=m).map(|i| w[i] * g[m - i]).sum();
                    1.0 - s + ccdf_xk(&bp, n - 1, k)
                })
                .fold(f64::INFINITY, f64::min);
            let got = engine.depth_upper(k).unwrap().value.unclamped;
            assert!((got - oracle).abs() < 1e-9, "{p:?} k={k}: {got} vs {oracle}");
        }
    }
}

#[test]
fn depth_lower_matches_negative_binomial_oracle() {
    for p in points() {
        let engine = BoundEngine::new(p, Variant::Canonical).unwrap();
        for k in [1u64, 4, 12, 30] {
            let ku = k as usize;
            let rho = p.a / p.h;
            let geo: Vec<f64> = (0..=ku).map(|i| (1.0 - rho) * rho.powi(i as i32)).collect();
            let w = conv(&geo, &engine.series.padded(ku), ku + 1);
            let g = arrival_cdf_closed(&p, k, (k as f64 - 1.0) * p.delta, ku);
            let stay = (-p.h * p.delta).exp();
            let s: f64 = (0..=ku)
                .map(|m| {
                    let short = if m < ku { g[ku - 1 - m] } else { 0.0 };
                    w[m] * (stay * short + (1.0 - stay) * g[ku - m])
                })
                .sum();
            let no_pacer = (-p.h * (k as f64 + 2.0) * p.delta).exp() / 2f64.powi(k as i32);
            let oracle = 1.0 - no_pacer - s - engine.series.residual;
            let got = engine.depth_lower(k).unwrap().value.unclamped;
            assert!((got - oracle).abs() < 1e-9, "{p:?} k={k}: {got} vs {oracle}");
        }
    }
}

#[test]
fn time_lower_matches_unfused_prefactor() {
    let p = MiningParams::from_total(1.0 / 600.0, 0.25, 10.0).unwrap();
    let engine = BoundEngine::new(p, Variant::Canonical).unwrap();
    let rho = p.a / p.h;
    for t in [300.0, 1800.0, 7200.0, 20000.0] {
        let tau = t + 2.0 * p.delta;
        // (1−ρ)ρ^k e^{(h−a)τ} P(Pois(hτ) <= k), taken literally
        let v: Vec<f64> = (0..400u64)
            .map(|k| (1.0 - rho) * rho.powi(k as i32) * ((p.h - p.a) * tau).exp() * gamma_ur(k as f64 + 1.0, p.h * tau))
            .collect();
        let u = conv(&engine.series.coeffs, &v, 400);
        let sf = |x: f64, s: u64| if x <= 0.0 { 1.0 } else { gamma_ur(s as f64, p.h * x) };
        let oracle: f64 =
            u.iter().enumerate().map(|(s, us)| us * sf(t + p.delta - s as f64 * p.delta, s as u64 + 1)).sum::<f64>()
                - (-p.h * tau).exp();
        let got = engine.time_lower(t).unwrap().value.unclamped;
        assert!((got - oracle).abs() < 1e-10, "t={t}: {got} vs {oracle}");
    }
}

#[test]
fn time_upper_matches_triple_sum() {
    let p = MiningParams::from_total(1.0 / 600.0, 0.3, 10.0).unwrap();
    let engine = BoundEngine::new(p, Variant::Canonical).unwrap();
    let bp = balance_params(&p);
    let e = &engine.series.coeffs;
    for t in [600.0, 3600.0, 10800.0] {
        let lam = p.a * (t + 2.0 * p.delta);
        let f1: Vec<f64> = (0..200u64).map(|i| poisson_pmf(i, lam).unwrap()).collect();
        let sf = |x: f64, s: u64| if x <= 0.0 { 1.0 } else { gamma_ur(s as f64, p.h * x) };
        let value = |n: u64| {
            let mut g = 0.0;
            for (i, fi) in f1.iter().enumerate() {
                for (j, ej) in e.iter().enumerate() {
                    for (l, el) in e.iter().enumerate() {
                        let s = (i + j + l) as u64 + n;
                        g += fi * ej * el * sf(t - (s + 2) as f64 * p.delta, s);
                    }
                }
            }
            ccdf_x(&bp, n - 1) + g
        };
        let got = engine.time_upper(t).unwrap();
        let n = got.n_star.unwrap();
        assert!((got.value.unclamped - value(n)).abs() < 1e-9, "t={t}");
        // n_star is a local minimum of the scanned objective
        assert!(value(n) <= value(n + 1) + 1e-12);
        if n > 1 {
            assert!(value(n) <= value(n - 1) + 1e-12);
        }
    }
}

#[test]
fn binomial_tail_brute_force() {
    for (k, p) in [(1u64, 0.3f64), (7, 0.5), (40, 0.013), (200, 0.66)] {
        for n in -1i64..=(k as i64 + 1) {
            let direct: f64 = ((n + 1).max(0) as u64..=k)
                .map(|i| (ln_choose(k, i) + i as f64 * p.ln() + (k - i) as f64 * (1.0 - p).ln()).exp())
                .sum();
            let got = binom_ccdf(n, k, p).unwrap();
            assert!((got - direct).abs() < 1e-12, "k={k} p={p} n={n}: {got} vs {direct}");
        }
    }
}

#[test]
fn poisson_kernels_agree_with_summation() {
    for lam in [0.0, 0.02, 1.5, 37.0, 900.0] {
        let table = poisson_pmf_table(1200, lam).unwrap();
        let mut acc = 0.0;
        for (i, &t) in table.iter().enumerate() {
            let direct = if lam == 0.0 {
                if i == 0 {
                    1.0
                } else {
                    0.0
                }
            } else {
                (i as f64 * lam.ln() - lam - ln_gamma(i as f64 + 1.0)).exp()
            };
            assert!((t - direct).abs() <= 1e-11 * direct + 1e-300, "lam={lam} i={i}");
            acc += direct;
            if i % 97 == 0 {
                assert!((poisson_cdf(i as i64, lam).unwrap() - acc).abs() < 1e-12);
            }
        }
    }
}

#[test]
fn erlang_cdf_is_integral_of_pdf() {
    for (k, h) in [(1u64, 0.5), (3, 1.0 / 800.0), (25, 2.0)] {
        let x = k as f64 / h * 1.3;
        let n = 20_000;
        let dx = x / n as f64;
        let mut s = erlang_pdf(0.0, k, h).unwrap() + erlang_pdf(x, k, h).unwrap();
        for i in 1..n {
            s += erlang_pdf(i as f64 * dx, k, h).unwrap() * if i % 2 == 1 { 4.0 } else { 2.0 };
        }
        let simpson = s * dx / 3.0;
        assert!((simpson - erlang_cdf(x, k, h).unwrap()).abs() < 1e-9, "k={k}");
        // Erlang(k) > x iff fewer than k Poisson arrivals by x
        assert!((1.0 - erlang_cdf(x, k, h).unwrap() - poisson_cdf(k as i64 - 1, h * x).unwrap()).abs() < 1e-12);
    }
}
