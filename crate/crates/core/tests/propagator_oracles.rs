//! Space-time norms and refocusing times against independent computations.

use num_complex::Complex64;
use num_traits::Float;
use strichartz_core::propagator::{lp_spacetime_norm, max_time_step, refocus_search};
use strichartz_core::{FourierData, LatticePoint, QuadForm};

fn two_modes(a: f64, b: f64) -> FourierData {
    FourierData::new(
        4,
        vec![LatticePoint::new(1, -2), LatticePoint::new(-3, 0)],
        vec![Complex64::new(a, 0.0), Complex64::new(0.0, b)],
    )
    .unwrap()
}

/// For two distinct modes `|u|^2 = a^2 + b^2 + 2ab cos(2 pi s)` with `s`
/// equidistributed in `x` at every `t`, so
/// `||u||_p^p = T int_0^1 (a^2 + b^2 + 2ab cos 2 pi s)^{p/2} ds`.
fn two_mode_closed_form(a: f64, b: f64, p: f64, t_end: f64) -> f64 {
    const STEPS: usize = 1 << 16;
    let sum: f64 = (0..STEPS)
        .map(|i| {
            let s = (i as f64 + 0.5) / STEPS as f64;
            (a * a + b * b + 2.0 * a * b * (std::f64::consts::TAU * s).cos()).powf(p / 2.0)
        })
        .sum();
    (t_end * sum / STEPS as f64).powf(1.0 / p)
}

#[test]
fn two_mode_norm_matches_refined_quadrature_and_closed_form() {
    let form = QuadForm::sample_generic(4).unwrap();
    let f = two_modes(1.0, 0.5);
    let h = max_time_step(&form, 4);
    for p in [4.0, 3.0] {
        let base = lp_spacetime_norm(&form, &f, p, 1.0, 32, h).unwrap().value;
        let fine = lp_spacetime_norm(&form, &f, p, 1.0, 128, h / 4.0).unwrap().value;
        let closed = two_mode_closed_form(1.0, 0.5, p, 1.0);
        assert!(((base - fine) / fine).abs() < 1e-4, "p={p}: {base} vs {fine}");
        assert!(((base - closed) / closed).abs() < 1e-4, "p={p}: {base} vs {closed}");
    }
}

/// `||q x|| < 1 / N^2` decided in integer arithmetic on the exact binary
/// value of `x`.
fn close_to_integer(x: f64, q: u64, n: u32) -> bool {
    let (mantissa, exp, _) = x.integer_decode();
    if mantissa == 0 {
        return true;
    }
    if exp >= 0 {
        return true;
    }
    let shift = (-exp) as u32;
    assert!(shift < 100, "value too small for the oracle");
    let denom = 1u128 << shift;
    let r = (q as u128 * mantissa as u128) % denom;
    let d = r.min(denom - r);
    (n as u128 * n as u128) * d < denom
}

#[test]
fn refocus_matches_exact_rescan() {
    let n = 4;
    for seed in 0..8 {
        let form = QuadForm::sample_generic(seed).unwrap();
        let r = refocus_search(&form, n, 1_000_000).unwrap();
        let ok = |q: u64| close_to_integer(form.alpha(), q, n) && close_to_integer(form.beta(), q, n);
        let first = (1..=1_000_000u64).find(|&q| ok(q));
        assert_eq!(first, r.found.then_some(r.q), "seed {seed}");
    }
}
