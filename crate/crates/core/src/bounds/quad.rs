//! Gauss–Legendre panel quadrature for expectations over an Erlang variable.

use crate::error::{Error, Result};
use crate::probability::{erlang_quantile, ln_erlang_pdf};

const ORDER: usize = 16;
const START_PANELS: usize = 16;
const MAX_PANELS: usize = 4096;

/// Nodes and weights on [−1, 1], from Newton iteration on the Legendre recurrence.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for j in 2..=n {
                let p2 = ((2 * j - 1) as f64 * z * p1 - (j - 1) as f64 * p0) / j as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (z * p1 - p0) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
        w[n - 1 - i] = w[i];
    }
    (x, w)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadInfo {
    pub panels: usize,
    pub change: f64,
    pub u_max: f64,
}

/// E[f(U)] for U ~ Erlang(k, h), where `f(u, out)` fills a vector of length `m`.
/// Panels on [0, u_max] double until the largest componentwise change is below `tol`.
pub fn erlang_expectation<F>(k: u64, h: f64, m: usize, tol: f64, f: F) -> Result<(Vec<f64>, QuadInfo)>
where
    F: Fn(f64, &mut [f64]),
{
    let u_max = erlang_quantile(1.0 - 1e-12, k, h)?;
    let (xs, ws) = gauss_legendre(ORDER);
    let mut buf = vec![0.0; m];
    let mut run = |panels: usize| -> Vec<f64> {
        let mut acc = vec![0.0; m];
        let width = u_max / panels as f64;
        for p in 0..panels {
            let mid = (p as f64 + 0.5) * width;
            for (x, w) in xs.iter().zip(&ws) {
                let u = mid + 0.5 * width * x;
                let weight = 0.5 * width * w * ln_erlang_pdf(u, k, h).exp();
                if weight == 0.0 {
                    continue;
                }
                f(u, &mut buf);
                for (a, b) in acc.iter_mut().zip(&buf) {
                    *a += weight * b;
                }
            }
        }
        acc
    };
    let mut panels = START_PANELS;
    let mut prev = run(panels);
    loop {
        let next = run(panels * 2);
        let change = prev.iter().zip(&next).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        panels *= 2;
        if change < tol {
            return Ok((next, QuadInfo { panels, change, u_max }));
        }
        if panels >= MAX_PANELS {
            return Err(Error::Accuracy { achieved: change });
        }
        prev = next;
    }
}
