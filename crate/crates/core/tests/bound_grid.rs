use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};

use semnet::bounds::{bernstein_upper, gen_slow_consistent, gen_slow_lossy, q_bound, r_bound, BoundError, CompressionSize};

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-12 * b.abs().max(1e-300)
}

/// Written out independently, with the log of `n^(d+c)/δ` taken literally
/// where it stays finite.
fn fast(n: f64, d: f64, eps: f64, delta: f64) -> f64 {
    let et = eps * n / (n - d);
    let l = (n.powf(d + 2.0) / delta).ln();
    let l = if l.is_finite() { l } else { (d + 2.0) * n.ln() - delta.ln() };
    et + 2.0 * l / (3.0 * (n - d)) + (9.0 * et * (1.0 - et) * l / (2.0 * (n - d))).sqrt()
}

fn slow_consistent(n: f64, d: f64, delta: f64) -> f64 {
    ((d + 1.0) * n.ln() + (1.0 / delta).ln()) / (n - d)
}

fn slow_lossy(n: f64, d: f64, eps: f64, delta: f64) -> f64 {
    eps * n / (n - d) + (((d + 2.0) * n.ln() + (1.0 / delta).ln()) / (2.0 * (n - d))).sqrt()
}

#[test]
fn formulas_match_transcription() {
    let mut checked = 0;
    for n in [10usize, 50, 100, 500, 1000, 10_000, 100_000, 1_000_000] {
        for d in [0usize, 1, 3, 9, n / 4, n / 2] {
            for eps in [0.0, 0.001, 0.01, 0.1, 0.2] {
                for delta in [0.01, 0.05, 0.1, 0.5] {
                    let (nf, df) = (n as f64, d as f64);
                    if let Ok(q) = q_bound(n, d, eps, delta) {
                        assert!(close(q.unclamped, fast(nf, df, eps, delta)), "Q n={n} d={d} eps={eps} δ={delta}");
                    }
                    let lossy = gen_slow_lossy(n, d, eps, delta).unwrap();
                    assert!(close(lossy.unclamped, slow_lossy(nf, df, eps, delta)));
                    let consistent = gen_slow_consistent(n, d, delta).unwrap();
                    assert!(close(consistent.unclamped, slow_consistent(nf, df, delta)));
                    checked += 1;
                }
            }
        }
    }
    assert!(checked >= 960);
}

#[test]
fn lossless_q_closed_form() {
    let n = 100.0f64;
    let expected = 2.0 * (7.0 * n.ln() + 10f64.ln()) / (3.0 * 95.0);
    let q = q_bound(100, 5, 0.0, 0.1).unwrap();
    assert!(close(q.unclamped, expected));
    assert!((q.value - 0.2424).abs() < 1e-4);
}

#[test]
fn q_monotone_in_eps_and_d() {
    for n in [50usize, 100, 500] {
        for d in 0..n / 2 {
            let mut prev = f64::NEG_INFINITY;
            for step in 0..=200 {
                let eps = step as f64 / 400.0;
                let Ok(q) = q_bound(n, d, eps, 0.05) else { break };
                assert!(q.unclamped >= prev);
                prev = q.unclamped;
                if let Ok(next) = q_bound(n, d + 1, eps, 0.05) {
                    assert!(next.unclamped >= q.unclamped, "n={n} d={d} eps={eps}");
                }
            }
        }
    }
}

#[test]
fn bounds_nonincreasing_in_n() {
    for d in [0usize, 2, 10] {
        for eps in [0.0, 0.02, 0.1] {
            let mut prev = [f64::INFINITY; 3];
            for n in (d + 5..3000).step_by(7) {
                let now = [
                    q_bound(n, d, eps, 0.05).map_or(f64::INFINITY, |r| r.unclamped),
                    gen_slow_consistent(n, d, 0.05).unwrap().unclamped,
                    gen_slow_lossy(n, d, eps, 0.05).unwrap().unclamped,
                ];
                for (a, b) in now.iter().zip(&prev) {
                    assert!(a <= b, "d={d} eps={eps} n={n}");
                }
                prev = now;
            }
        }
    }
}

#[test]
fn fast_beats_slow_at_small_eps() {
    let q = q_bound(1000, 10, 0.05, 0.05).unwrap();
    let slow = gen_slow_lossy(1000, 10, 0.05, 0.05).unwrap();
    assert!(q.value < slow.value);
}

#[test]
fn regime_and_size_errors() {
    assert!(matches!(q_bound(100, 10, 0.46, 0.05), Err(BoundError::OutOfRegime { .. })));
    assert!(matches!(q_bound(10, 10, 0.0, 0.05), Err(BoundError::CompressionTooLarge { .. })));
    assert!(matches!(
        r_bound(10, 6, 1.0, 2.0, CompressionSize::ActualNetSize(1), 0.05),
        Err(BoundError::RemovalOutOfRange { .. })
    ));
    let r = r_bound(64, 0, 2.0, 8.0, CompressionSize::MuFormula(2), 0.05).unwrap();
    assert_eq!(r.inputs.d, 8);
}

#[test]
fn bernstein_covers_binomial_mean() {
    let (n, p, delta, trials) = (200u64, 0.1, 0.05, 100_000);
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let bin = Binomial::new(n, p).unwrap();
    let failures = (0..trials)
        .filter(|_| p > bernstein_upper(bin.sample(&mut rng) as f64 / n as f64, n as usize, delta))
        .count();
    assert!((failures as f64) / (trials as f64) <= delta, "{failures} failures");
}
