//! Successive minima by exhaustive scan with exact rational norms.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Float, Signed, ToPrimitive, Zero};

use strichartz_core::QuadForm;

/// Scan half-width in `n`, in units of `N`.
pub const N_REACH: i64 = 8;
/// Scan half-width of `m_i` around `t L_i(n)`.
pub const M_REACH: f64 = 2.0;

pub fn exact(x: f64) -> BigRational {
    let (mantissa, exp, sign) = x.integer_decode();
    let m = BigInt::from(mantissa) * sign;
    if exp >= 0 {
        BigRational::from_integer(m << exp as usize)
    } else {
        BigRational::new(m, BigInt::from(1) << (-exp) as usize)
    }
}

pub struct OracleMinima {
    pub m1: BigRational,
    pub m2: BigRational,
    pub v1: [i64; 4],
    pub v2: [i64; 4],
}

fn dependent(a: &[i64; 4], b: &[i64; 4]) -> bool {
    (0..4).all(|i| (0..4).all(|j| a[i] as i128 * b[j] as i128 == a[j] as i128 * b[i] as i128))
}

fn f64_norm(form: &QuadForm, n: u32, t: f64, v: &[i64; 4]) -> f64 {
    let nn = n as f64;
    let (a, b) = (form.alpha(), form.beta());
    let l1 = v[0] as f64 + b * v[1] as f64;
    let l2 = b * v[0] as f64 + a * v[1] as f64;
    [
        v[0].abs() as f64 / nn,
        v[1].abs() as f64 / nn,
        nn * (t * l1 - v[2] as f64).abs(),
        nn * (t * l2 - v[3] as f64).abs(),
    ]
    .into_iter()
    .fold(0.0, f64::max)
}

fn exact_norm(form: &QuadForm, n: u32, t: f64, v: &[i64; 4]) -> BigRational {
    let nn = BigRational::from_integer(BigInt::from(n));
    let (a, b, t) = (exact(form.alpha()), exact(form.beta()), exact(t));
    let int = |x: i64| BigRational::from_integer(BigInt::from(x));
    let l1 = int(v[0]) + &b * int(v[1]);
    let l2 = &b * int(v[0]) + &a * int(v[1]);
    let parts = [
        int(v[0].abs()) / &nn,
        int(v[1].abs()) / &nn,
        &nn * (&t * l1 - int(v[2])).abs(),
        &nn * (&t * l2 - int(v[3])).abs(),
    ];
    parts.into_iter().fold(BigRational::zero(), |acc, x| if x > acc { x } else { acc })
}

/// Order: norm, then `(|m2|, |m1|, |n2|, |n1|)`, then signed coordinates.
fn key(v: &[i64; 4]) -> ([i64; 4], [i64; 4]) {
    ([v[3].abs(), v[2].abs(), v[1].abs(), v[0].abs()], *v)
}

/// Scans `|n_i| <= 8N`, `|m_i - t L_i(n)| <= 2`. Candidates are first ranked
/// in floating point; every one within a relative `1e-9` of the floating
/// second minimum is re-ranked exactly. Returns `None` if the exact second
/// minimum exceeds what the scan box certifies (8).
pub fn minima(form: &QuadForm, n: u32, t: f64) -> Option<OracleMinima> {
    let reach = N_REACH * n as i64;
    let (a, b) = (form.alpha(), form.beta());
    let mut cands: Vec<(f64, [i64; 4])> = Vec::new();
    for n1 in -reach..=reach {
        for n2 in -reach..=reach {
            let c1 = t * (n1 as f64 + b * n2 as f64);
            let c2 = t * (b * n1 as f64 + a * n2 as f64);
            for m1 in (c1 - M_REACH).ceil() as i64..=(c1 + M_REACH).floor() as i64 {
                for m2 in (c2 - M_REACH).ceil() as i64..=(c2 + M_REACH).floor() as i64 {
                    let v = [n1, n2, m1, m2];
                    match v.iter().find(|&&x| x != 0) {
                        Some(&x) if x > 0 => {}
                        _ => continue,
                    }
                    cands.push((f64_norm(form, n, t, &v), v));
                }
            }
        }
    }
    cands.sort_by(|x, y| x.0.total_cmp(&y.0));
    let first = cands[0].1;
    let second = cands.iter().find(|c| !dependent(&c.1, &first))?.0;
    let cut = second * (1.0 + 1e-9) + 1e-300;
    let mut exact_c: Vec<(BigRational, [i64; 4])> = cands
        .iter()
        .take_while(|c| c.0 <= cut)
        .map(|c| (exact_norm(form, n, t, &c.1), c.1))
        .collect();
    exact_c.sort_by(|x, y| x.0.cmp(&y.0).then_with(|| key(&x.1).cmp(&key(&y.1))));
    let (m1, v1) = exact_c[0].clone();
    let (m2, v2) = exact_c.iter().find(|c| !dependent(&c.1, &v1))?.clone();
    if m2.to_f64()? > N_REACH as f64 {
        return None;
    }
    Some(OracleMinima { m1, m2, v1, v2 })
}
