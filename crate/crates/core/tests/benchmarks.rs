use std::f64::consts::PI;

use pibo_core::benchmarks::{branin, hartmann6, log_branin_1d, HARTMANN6_MINIMIZER, HARTMANN6_MINIMUM};
use pibo_core::search::compass_maximize;
use pibo_core::Benchmark;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn branin_known_values() {
    assert!((branin(PI, 2.275).unwrap() - 0.397_887).abs() < 1e-5);
    assert!((branin(-PI, 12.275).unwrap() - 0.397_887).abs() < 1e-5);
}

#[test]
fn log_branin_grid_minimizer_is_pi() {
    let n = 1_000_000;
    let (mut best_x, mut best_v) = (0.0, f64::INFINITY);
    for i in 0..=n {
        let x = -5.0 + 15.0 * i as f64 / n as f64;
        let v = log_branin_1d(x).unwrap();
        if v < best_v {
            best_x = x;
            best_v = v;
        }
    }
    assert!((best_x - PI).abs() < 1e-3, "{best_x}");
    assert!((log_branin_1d(PI).unwrap() - 0.397_887f64.log10()).abs() < 1e-4);
    let mut prev = f64::INFINITY;
    for i in 0..=1000 {
        let x = 2.5 + (PI - 2.5) * i as f64 / 1000.0;
        let v = log_branin_1d(x).unwrap();
        assert!(v <= prev, "not decreasing at {x}");
        prev = v;
    }
}

#[test]
fn hartmann_minimum_certificates() {
    let start = HARTMANN6_MINIMIZER.to_vec();
    let res = compass_maximize(
        |x| -hartmann6(x).unwrap(),
        &start,
        &[0.0; 6],
        &[1.0; 6],
        &[1e-3; 6],
        20_000,
        1e-10,
    );
    assert!((-res.value - (-3.32237)).abs() < 1e-4);
    assert!(-res.value >= HARTMANN6_MINIMUM - 1e-9);

    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut lowest = f64::INFINITY;
    for _ in 0..1_000_000 {
        let x: [f64; 6] = std::array::from_fn(|_| rng.random());
        lowest = lowest.min(hartmann6(&x).unwrap());
    }
    assert!(lowest >= -3.32237 - 1e-6);
}

#[test]
fn branin_empirical_maximum() {
    let b = Benchmark::by_name("branin").unwrap();
    let (x, v) = b.empirical_maximizer();
    assert!((x[0] + 5.0).abs() < 1e-3 && x[1].abs() < 1e-3, "{x:?}");
    assert!((v - 308.13).abs() < 0.01, "{v}");
}
