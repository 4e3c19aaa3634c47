use naklab::balanced::{balance_params, ccdf_x, cdf_xk};
use naklab::bounds::TimeOpts;
use naklab::series::pmf_series;
use naklab::{chernoff_constants, mgf_m, pgf_eval, tolerance_check, BoundEngine, BoundKind, MiningParams, Variant};

fn bitcoin(beta: f64) -> MiningParams {
    MiningParams::from_total(1.0 / 600.0, beta, 10.0).unwrap()
}

fn engine(p: MiningParams) -> BoundEngine {
    BoundEngine::new(p, Variant::Canonical).unwrap()
}

#[test]
fn series_partial_sums_match_pgf() {
    for beta in [0.1, 0.25, 0.4] {
        for p in [bitcoin(beta), MiningParams::from_total(1.0 / 13.0, beta, 2.0).unwrap()] {
            let s = pmf_series(&p, 400).unwrap();
            for r in [0.1f64, 0.5, 0.9] {
                let sum: f64 = s.coeffs.iter().enumerate().map(|(i, c)| c * r.powi(i as i32)).sum();
                assert!((sum - pgf_eval(&p, r).unwrap()).abs() < 1e-8, "beta={beta} r={r}");
            }
        }
    }
}

#[test]
fn series_known_values() {
    let p = MiningParams::new(1.0 / 2400.0, 1.0 / 800.0, 10.0).unwrap();
    assert!((pgf_eval(&p, 0.0).unwrap() - 0.6625).abs() < 1e-12);
    let s = pmf_series(&p, 200).unwrap();
    assert!((s.get(0) - 0.6625).abs() < 1e-12);
    assert!(s.residual < 1e-10);
    let zero = MiningParams::new(0.0, 1.0 / 800.0, 10.0).unwrap();
    assert_eq!(pmf_series(&zero, 5).unwrap().coeffs, vec![1.0, 0.0, 0.0, 0.0, 0.0, 0.0]);
    assert_eq!(mgf_m(&zero, 5.0).unwrap(), 1.0);
    for r in [-0.5, 0.3, 0.99] {
        assert!((pgf_eval(&zero, r).unwrap() - 1.0).abs() < 1e-15);
    }
}

#[test]
fn mgf_at_the_exponential_bound_argument() {
    let p = MiningParams::new(1.0 / 2400.0, 1.0 / 800.0, 10.0).unwrap();
    let c = chernoff_constants(&p, Variant::Canonical).unwrap();
    let nu = (1.0 + c.gamma / c.abar).ln();
    let s = pmf_series(&p, 400).unwrap();
    let direct: f64 = s.coeffs.iter().enumerate().map(|(i, e)| e * (nu * i as f64).exp()).sum();
    assert!((mgf_m(&p, nu).unwrap() - direct).abs() < 1e-6, "{} vs {direct}", mgf_m(&p, nu).unwrap());
}

#[test]
fn escape_probability_grows_with_honest_advantage() {
    let mut prev = 0.0;
    for a in [1e-5, 1e-4, 2e-4, 4e-4, 6e-4] {
        let p = MiningParams::new(a, 1.0 / 800.0, 10.0).unwrap();
        let e0 = pmf_series(&p, 0).unwrap().get(0);
        assert!(1.0 - e0 >= prev);
        prev = 1.0 - e0;
    }
}

#[test]
fn balanced_structure() {
    let bp = balance_params(&MiningParams::new(0.0, 1.0, 0.0).unwrap());
    assert_eq!((bp.epsilon, bp.delta), (0.0, 1.0));
    let bp = balance_params(&bitcoin(0.25));
    for n in 0..10 {
        let r = ccdf_x(&bp, n + 1) / ccdf_x(&bp, n);
        assert!((r - bp.ratio).abs() < 1e-13 * bp.ratio);
        assert_eq!(cdf_xk(&bp, n, 0), 1.0);
    }
}

#[test]
fn tolerance_with_no_adversary() {
    let t = tolerance_check(&MiningParams::new(0.0, 1.0 / 600.0, 10.0).unwrap());
    assert!(t.within && t.margin == f64::INFINITY);
}

#[test]
fn chernoff_dominates_finer_bound_on_bitcoin_grid() {
    for beta in [0.1, 0.2, 0.25, 0.3, 0.4] {
        let e = engine(bitcoin(beta));
        let c = chernoff_constants(&e.params, Variant::Canonical).unwrap();
        assert!(c.b > 0.0 && c.c > 0.0);
        assert_eq!(e.chernoff(0).unwrap().value.value, c.b.min(1.0));
        for k in 1..=160 {
            let up = e.depth_upper(k).unwrap().value.value;
            let lo = e.depth_lower(k).unwrap().value.value;
            let ch = e.chernoff(k).unwrap().value.value;
            // the finer bound is only accurate to the quadrature tolerance
            assert!(lo <= up && up <= ch + 1e-10, "beta={beta} k={k}: {lo} {up} {ch}");
        }
    }
}

#[test]
fn depth_upper_is_non_increasing() {
    let e = engine(bitcoin(0.25));
    let v: Vec<f64> = (1..=60).map(|k| e.depth_upper(k).unwrap().value.value).collect();
    for w in v.windows(2) {
        assert!(w[1] <= w[0]);
    }
}

#[test]
fn bounds_grow_with_adversary_rate() {
    let h = 1.0 / 800.0;
    let mut prev = [0.0f64; 4];
    for a in [1e-5, 1e-4, 2e-4, 3e-4, 4e-4] {
        let e = engine(MiningParams::new(a, h, 10.0).unwrap());
        let cur = [
            e.depth_upper(20).unwrap().value.value,
            e.depth_lower(20).unwrap().value.value,
            e.time_upper(7200.0).unwrap().value.value,
            e.time_lower(7200.0).unwrap().value.value,
        ];
        for (c, p) in cur.iter().zip(&prev) {
            assert!(c + 1e-12 >= *p, "a={a}: {cur:?} after {prev:?}");
        }
        prev = cur;
    }
}

#[test]
fn time_bounds_ordered_on_log_grid() {
    for beta in [0.1, 0.143, 0.25] {
        let e = engine(bitcoin(beta));
        for i in 0..50 {
            let t = 60.0 * (1e3f64).powf(i as f64 / 49.0);
            let lo = e.time_lower(t).unwrap().value.value;
            let up = e.time_upper(t).unwrap().value.value;
            assert!(lo <= up, "beta={beta} t={t}: {lo} > {up}");
        }
    }
}

#[test]
fn time_upper_decays_and_tightens() {
    let mut e = engine(bitcoin(0.25));
    assert!(e.time_upper(1e6).unwrap().value.value < 1e-6);
    let mut prev = f64::INFINITY;
    for order in [2usize, 4, 8, 16, 32] {
        e.time_opts = TimeOpts { i0: Some(order), j0: Some(order), k0: Some(order), ..TimeOpts::default() };
        let v = e.time_upper(3600.0).unwrap().value.value;
        assert!(v <= prev + 1e-15);
        prev = v;
    }
}

#[test]
fn time_lower_partial_sums_grow() {
    let mut e = engine(bitcoin(0.25));
    let mut prev = f64::NEG_INFINITY;
    for order in [1usize, 2, 4, 8, 16, 32] {
        e.time_opts = TimeOpts { j_max: Some(order), k_max: Some(order), ..TimeOpts::default() };
        let v = e.time_lower(3600.0).unwrap().value.unclamped;
        assert!(v >= prev - 1e-15);
        prev = v;
    }
    // largest near t = Δ and strictly positive there
    e.time_opts = TimeOpts::default();
    let near = e.time_lower(10.0).unwrap().value.value;
    assert!(near > 0.0 && near >= e.time_lower(36000.0).unwrap().value.value);
}

#[test]
fn no_adversary_limits() {
    let p = MiningParams::new(0.0, 1.0 / 600.0, 10.0).unwrap();
    let e = engine(p);
    for k in [1, 5, 20] {
        assert_eq!(e.depth_lower(k).unwrap().value.value, 0.0);
    }
    assert!(e.depth_upper(20).unwrap().value.value < 1e-9);
    assert!(e.time_upper(36000.0).unwrap().value.value < 1e-9);
    // the formula leaves e^{−h(t+Δ)}(1 − e^{−hΔ}) when a = 0
    let t = 600.0;
    let expected = (-p.h * (t + p.delta)).exp() * (1.0 - (-p.h * p.delta).exp());
    assert!((e.time_lower(t).unwrap().value.value - expected).abs() < 1e-15);
}

#[test]
fn inverse_searches() {
    let e = engine(bitcoin(0.25));
    assert_eq!(e.min_depth(BoundKind::DepthUpper, 1.0).unwrap().k, 1);
    assert_eq!(e.min_time(BoundKind::TimeUpper, 1.0).unwrap().t, 0.0);
    let t3 = e.min_time(BoundKind::TimeUpper, 1e-3).unwrap();
    let t4 = e.min_time(BoundKind::TimeUpper, 1e-4).unwrap();
    assert!(t4.t >= t3.t);
    // dense sweep crossing
    let step = 30.0;
    let mut t = step;
    while e.time_upper(t).unwrap().value.value > 1e-3 {
        t += step;
    }
    assert!((t3.t - t).abs() <= step, "search {} vs sweep {t}", t3.t);

    let ch = e.min_depth(BoundKind::DepthChernoff, 1e-3).unwrap().k;
    let up = e.min_depth(BoundKind::DepthUpper, 1e-3).unwrap().k;
    assert!(ch >= up);
}

#[test]
fn upper_reports_scan_minimum() {
    let e = engine(bitcoin(0.3));
    let r = e.depth_upper(40).unwrap();
    assert!(r.n_star.unwrap() >= 1 && r.n_star.unwrap() <= 40);
    assert_eq!(r.truncation.n_scanned, 40);
    assert!(r.truncation.quad_change < 1e-10);
}
