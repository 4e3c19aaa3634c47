#![allow(dead_code)]

use naklab::probability::couple_extremal;
use naklab::DiscreteCdf;

/// The coupling is a step function of u; cutting [0, 1) at every point where
/// either coordinate can jump gives its exact joint law as (mass, x, y) cells.
pub fn coupling_cells(fx: &DiscreteCdf, fy: &DiscreteCdf, a_star: i64) -> Vec<(f64, i64, i64)> {
    let sx = fx.at(-a_star);
    let sy = fy.at(a_star - 1);
    let wrap = |v: f64| v - v.floor();
    let mut cuts = vec![0.0, 1.0, wrap(1.0 - sx), wrap(sy)];
    cuts.extend(fx.cdf.iter().map(|&c| wrap(c - sx)));
    cuts.extend(fy.cdf.iter().map(|&c| wrap(sy - c)));
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();
    cuts.windows(2)
        .filter(|w| w[1] > w[0])
        .map(|w| {
            let (x, y) = couple_extremal(fx, fy, a_star, 0.5 * (w[0] + w[1])).unwrap();
            (w[1] - w[0], x, y)
        })
        .collect()
}

pub fn pmf_from_cells(cells: &[(f64, i64, i64)], pick: impl Fn(i64, i64) -> i64, offset: i64, len: usize) -> Vec<f64> {
    let mut pmf = vec![0.0; len];
    for &(m, x, y) in cells {
        let v = pick(x, y) - offset;
        assert!((0..len as i64).contains(&v), "value {} outside support", v + offset);
        pmf[v as usize] += m;
    }
    pmf
}

pub fn normalized(raw: &[f64]) -> Vec<f64> {
    let s: f64 = raw.iter().sum();
    raw.iter().map(|x| x / s).collect()
}
