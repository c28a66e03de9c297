//! Successive minima against the exact rational scan.

mod common;

use common::minima_oracle::minima;
use num_traits::ToPrimitive;
use rand::Rng;
use strichartz_core::lattice_minima::{successive_minima_auto, BoxNormParams};
use strichartz_core::rng::stream;
use strichartz_core::QuadForm;

fn check(form: QuadForm, n: u32, t: f64) {
    let got = successive_minima_auto(&BoxNormParams::new(form, n, t).unwrap()).unwrap();
    let want = minima(&form, n, t).expect("scan box certifies the minima");
    assert_eq!((got.v1, got.v2), (want.v1, want.v2), "t={t}");
    let (m1, m2) = (want.m1.to_f64().unwrap(), want.m2.to_f64().unwrap());
    assert!((got.m1 - m1).abs() <= 1e-12 * m1 && (got.m2 - m2).abs() <= 1e-12 * m2);
}

#[test]
fn fixed_time_example() {
    check(QuadForm::sample_generic(7).unwrap(), 8, 3.7);
}

#[test]
fn random_instances_at_n8() {
    let mut rng = stream(31, "test.minima_oracle");
    for i in 0..15 {
        let form = QuadForm::sample_generic(1000 + i).unwrap();
        check(form, 8, rng.gen_range(0.0..100.0));
    }
}

#[test]
fn time_zero() {
    check(QuadForm::sample_generic(2).unwrap(), 8, 0.0);
}
