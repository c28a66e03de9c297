//! Kernel values against independent evaluations.

use rand::Rng;
use strichartz_core::rng::stream;
use strichartz_core::weyl_kernel::{
    kernel_coefficients, kernel_direct, l4_time_integral, max_time_step, sup_over_x, TorusGrid,
};
use strichartz_core::{CutoffProfile, QuadForm};

/// Bits of the dyadic grid the N = 2 inputs live on.
const DYADIC_BITS: u32 = 20;

/// `K_2(t, x)` with every phase reduced modulo one in integer arithmetic.
/// All inputs are multiples of `2^-20`, so the phase of each term is a
/// multiple of `2^-40` and its residue is exact.
fn kernel_n2_exact(alpha: i64, beta: i64, t: i64, x: (i64, i64)) -> (f64, f64) {
    let one = 1i128 << DYADIC_BITS;
    let modulus = one * one;
    let (mut re, mut im) = (0.0, 0.0);
    // chi(n/2) = 1 for |n| <= 1 and the box is |n_i| < 2.
    for n1 in -1i128..=1 {
        for n2 in -1i128..=1 {
            // Q(n) scaled by 2^20.
            let q = n1 * n1 * one + 2 * beta as i128 * n1 * n2 + alpha as i128 * n2 * n2;
            let phase = (x.0 as i128 * n1 + x.1 as i128 * n2) * one + t as i128 * q;
            let r = phase.rem_euclid(modulus) as f64 / modulus as f64;
            let (s, c) = (std::f64::consts::TAU * r).sin_cos();
            re += c;
            im += s;
        }
    }
    (re, im)
}

#[test]
fn n2_kernel_matches_exact_phase_sum() {
    let chi = CutoffProfile::new();
    let mut rng = stream(11, "test.kernel_n2");
    let scale = (1i64 << DYADIC_BITS) as f64;
    for _ in 0..200 {
        let alpha = rng.gen_range(-(2i64 << DYADIC_BITS)..=(2i64 << DYADIC_BITS));
        let beta = rng.gen_range(-(2i64 << DYADIC_BITS)..=(2i64 << DYADIC_BITS));
        let t = rng.gen_range(-(1000i64 << DYADIC_BITS)..=(1000i64 << DYADIC_BITS));
        let x = (rng.gen_range(0..1i64 << DYADIC_BITS), rng.gen_range(0..1i64 << DYADIC_BITS));
        let form = QuadForm::new(alpha as f64 / scale, beta as f64 / scale).unwrap();
        let got = kernel_direct(&form, &chi, 2, t as f64 / scale, (x.0 as f64 / scale, x.1 as f64 / scale));
        let (re, im) = kernel_n2_exact(alpha, beta, t, x);
        assert!((got.re - re).abs() < 1e-12 && (got.im - im).abs() < 1e-12, "{got} vs {re}+{im}i");
    }
}

#[test]
fn refined_sup_is_at_least_the_dense_grid_maximum() {
    let chi = CutoffProfile::new();
    let n = 8;
    let mut rng = stream(12, "test.kernel_dense");
    // 64 times the points of the default 128 x 128 grid.
    let dense = 1024;
    let mut grid = TorusGrid::new(n, dense).unwrap();
    let side = 2 * n as usize - 1;
    let mut coeffs = vec![Default::default(); side * side];
    let weights = chi.weights(n);
    for seed in 0..6 {
        let form = QuadForm::sample_generic(seed).unwrap();
        let t = rng.gen_range(0.0..50.0);
        let s = sup_over_x(&form, &chi, n, t, 8).unwrap();
        kernel_coefficients(&form, &weights, t, &mut coeffs);
        let (dense_max, _) = grid.max_abs(&coeffs, true);
        // The refined value is a true value of |K|, so it cannot exceed the
        // sup; the dense grid undershoots the sup by at most a relative
        // (pi * 2N / M)^2 / 2 < 1.3e-3.
        assert!(s.sup_abs >= dense_max - 1e-6, "t={t}: {} < {dense_max}", s.sup_abs);
        assert!(s.sup_abs <= dense_max * (1.0 + 1.3e-3), "t={t}: {} vs {dense_max}", s.sup_abs);
    }
}

#[test]
fn l4_integral_self_converges() {
    let chi = CutoffProfile::new();
    let form = QuadForm::sample_generic(3).unwrap();
    let n = 8;
    let dt = max_time_step(&form, n);
    let coarse = l4_time_integral(&form, &chi, n, 4.0, dt, 4).unwrap();
    let fine = l4_time_integral(&form, &chi, n, 4.0, dt / 2.0, 4).unwrap();
    assert!(fine.step <= dt / 2.0 && coarse.step <= dt);
    let rel = (coarse.value - fine.value).abs() / fine.value;
    assert!(rel < 0.02, "relative change {rel}");
}
