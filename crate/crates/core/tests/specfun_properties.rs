use abspin_core::specfun::{bessel_j, bessel_j_deriv, BesselOrder};
use abspin_core::Error;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;

const SAMPLES: usize = 10_000;

fn j(nu: f64, x: f64) -> f64 {
    bessel_j(BesselOrder::new(nu).unwrap(), x).unwrap()
}

fn jp(nu: f64, x: f64) -> f64 {
    bessel_j_deriv(BesselOrder::new(nu).unwrap(), x).unwrap()
}

fn non_integer(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    loop {
        let nu: f64 = rng.gen_range(lo..hi);
        if (nu - nu.round()).abs() > 1e-3 {
            return nu;
        }
    }
}

// Residuals are measured against the size of the terms that cancel.
#[test]
fn wronskian() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst = 0.0_f64;
    for _ in 0..SAMPLES {
        let nu = non_integer(&mut rng, -5.0, 5.0);
        let x = rng.gen_range(0.1..50.0);
        let (a, b) = (j(nu, x) * jp(-nu, x), jp(nu, x) * j(-nu, x));
        let expected = -2.0 * (nu * PI).sin() / (PI * x);
        let scale = a.abs().max(b.abs()).max(expected.abs());
        worst = worst.max(((a - b) - expected).abs() / scale);
    }
    assert!(worst <= 1e-10, "worst Wronskian residual {worst:e}");
}

#[test]
fn three_term_recurrence() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut worst = 0.0_f64;
    for _ in 0..SAMPLES {
        let nu: f64 = rng.gen_range(-5.0..5.0);
        let x = rng.gen_range(0.1..50.0);
        let (lo, hi, mid) = (j(nu - 1.0, x), j(nu + 1.0, x), 2.0 * nu / x * j(nu, x));
        let scale = lo.abs().max(hi.abs()).max(mid.abs());
        worst = worst.max((lo + hi - mid).abs() / scale);
    }
    assert!(worst <= 1e-9, "worst recurrence residual {worst:e}");
}

#[test]
fn derivative_matches_central_difference() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let h = 1e-6;
    let mut worst = 0.0_f64;
    for _ in 0..SAMPLES {
        let nu: f64 = rng.gen_range(-5.0..5.0);
        let x = rng.gen_range(0.1..50.0);
        let fd = (j(nu, x + h) - j(nu, x - h)) / (2.0 * h);
        let d = jp(nu, x);
        // absolute where |J'| <= 1; the difference quotient itself loses
        // absolute accuracy where J_{-nu} blows up near x = 0
        worst = worst.max((fd - d).abs() / d.abs().max(1.0));
    }
    assert!(worst <= 1e-6, "worst derivative deviation {worst:e}");
}

#[test]
fn simple_values() {
    assert!((j(0.0, 1e-12) - 1.0).abs() < 1e-10);
    let closed = (2.0 / (PI * 2.0)).sqrt() * 2.0_f64.sin();
    assert!((j(0.5, 2.0) - closed).abs() < 1e-10 * closed);
    assert!((jp(1.0, 1e-12) - 0.5).abs() < 1e-8);
    for x in [0.3, 1.7, 9.0, 33.0] {
        assert!((jp(0.0, x) + j(1.0, x)).abs() < 1e-14);
    }
    let fd = (j(0.3, 1.7 + 1e-6) - j(0.3, 1.7 - 1e-6)) / 2e-6;
    assert!((jp(0.3, 1.7) - fd).abs() < 1e-6);
}

#[test]
fn negative_integer_order_parity() {
    for n in 1..8 {
        for x in [0.5, 4.0, 20.0] {
            let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
            assert_eq!(j(-(n as f64), x), sign * j(n as f64, x));
        }
    }
}

#[test]
fn domain_errors() {
    let nu = BesselOrder::new(0.5).unwrap();
    for x in [0.0, -1.0, f64::NAN, f64::INFINITY] {
        assert!(matches!(bessel_j(nu, x), Err(Error::Domain(_))), "x = {x}");
    }
    assert!(BesselOrder::new(f64::NAN).is_err());
    assert!(BesselOrder::new(500.5).is_err());
}
