//! Change of variables taking four points with fixed first moments to a pair
//! of integer 3-vectors with prescribed Gram matrix.

use serde::{Deserialize, Serialize};

use crate::error::{precondition, Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct KookaburraImage {
    pub k: [i64; 3],
    pub l: [i64; 3],
    /// `16 sum k_i^2 - 4 a^2`.
    pub ap: i64,
    /// `16 sum l_i^2 - 4 b^2`.
    pub bp: i64,
    /// `16 sum k_i l_i - 4 a b`.
    pub cp: i64,
}

fn fold(v: &[i64; 4], total: i64) -> [i64; 3] {
    let s: [i64; 3] = std::array::from_fn(|i| 4 * v[i] - total);
    [s[1] + s[2], s[0] + s[2], s[0] + s[1]]
}

fn dot(x: &[i64; 3], y: &[i64; 3]) -> i64 {
    x.iter().zip(y).map(|(a, b)| a * b).sum()
}

/// Maps `(k_i, l_i)`, `i = 1..4`, with `sum k_i = a`, `sum l_i = b` to
/// `(k'', l'', A', B', C')` where `k'_i = 4 k_i - a`,
/// `k'' = (k'_2 + k'_3, k'_1 + k'_3, k'_1 + k'_2)` and likewise for `l`.
/// The Gram identities `|k''|^2 = A'`, `|l''|^2 = B'`, `k'' . l'' = C'` are
/// checked on every call.
pub fn kookaburra_map(k: [i64; 4], l: [i64; 4], a: i64, b: i64) -> Result<KookaburraImage> {
    if k.iter().sum::<i64>() != a || l.iter().sum::<i64>() != b {
        return Err(precondition("kookaburra_map", "need sum k_i = a and sum l_i = b"));
    }
    if k.iter().chain(&l).chain([&a, &b]).any(|x| x.abs() > 1 << 20) {
        return Err(Error::Overflow("kookaburra_map"));
    }
    let second = |x: &[i64; 4], y: &[i64; 4]| -> i64 { x.iter().zip(y).map(|(p, q)| p * q).sum() };
    let image = KookaburraImage {
        k: fold(&k, a),
        l: fold(&l, b),
        ap: 16 * second(&k, &k) - 4 * a * a,
        bp: 16 * second(&l, &l) - 4 * b * b,
        cp: 16 * second(&k, &l) - 4 * a * b,
    };
    if dot(&image.k, &image.k) != image.ap
        || dot(&image.l, &image.l) != image.bp
        || dot(&image.k, &image.l) != image.cp
    {
        return Err(Error::Inconsistent(format!("Gram identities fail for k={k:?}, l={l:?}")));
    }
    Ok(image)
}
