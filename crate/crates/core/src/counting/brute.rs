//! Brute-force representation counts: integer vectors of prescribed norms and
//! inner product.

use serde::{Deserialize, Serialize};

use super::arith::{gcd, is_square, isqrt};
use super::PallQuery;
use crate::error::{precondition, Result};

/// Which diagonal form the vectors are measured in.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PairForm {
    /// `x1^2 + x2^2 + x3^2` on `Z^3`.
    #[default]
    ThreeSquares,
    /// `x1^2 + x2^2 + x3^2 + 5 x4^2` on `Z^4`.
    ThreeSquaresPlusFive,
}

impl PairForm {
    fn weight4(self) -> Option<i64> {
        match self {
            PairForm::ThreeSquares => None,
            PairForm::ThreeSquaresPlusFive => Some(5),
        }
    }
}

/// All `x in Z^3` with `|x|^2 = n`, found by looping `x1, x2` and testing the
/// remainder for a square.
pub fn sphere_points(n: u64) -> Vec<[i64; 3]> {
    let mut out = Vec::new();
    let r = isqrt(n) as i64;
    for x in -r..=r {
        let rest = n - (x * x) as u64;
        let ry = isqrt(rest) as i64;
        for y in -ry..=ry {
            let zz = rest - (y * y) as u64;
            if is_square(zz) {
                let z = isqrt(zz) as i64;
                out.push([x, y, z]);
                if z != 0 {
                    out.push([x, y, -z]);
                }
            }
        }
    }
    out
}

/// `r_3(n)`.
pub fn r3(n: u64) -> u64 {
    sphere_points(n).len() as u64
}

/// Representations of `n` by `form`, padded to four coordinates.
pub fn representations(n: u64, form: PairForm) -> Vec<[i64; 4]> {
    match form.weight4() {
        None => sphere_points(n).into_iter().map(|[a, b, c]| [a, b, c, 0]).collect(),
        Some(w) => {
            let w = w as u64;
            let r4 = isqrt(n / w) as i64;
            let mut out = Vec::new();
            for x4 in -r4..=r4 {
                let rest = n - w * (x4 * x4) as u64;
                out.extend(sphere_points(rest).into_iter().map(|[a, b, c]| [a, b, c, x4]));
            }
            out
        }
    }
}

fn weighted_dot(x: &[i64; 4], y: &[i64; 4], form: PairForm) -> i64 {
    x[0] * y[0] + x[1] * y[1] + x[2] * y[2] + form.weight4().unwrap_or(0) * x[3] * y[3]
}

/// Number of pairs `(x, y)` with `x.x = A'`, `y.y = B'`, `x.y = C'` in the
/// chosen form.
pub fn brute_pair_count_in(query: &PallQuery, form: PairForm) -> Result<u64> {
    if query.ap < 0 || query.bp < 0 {
        return Err(precondition("brute_pair_count", "need A', B' >= 0"));
    }
    let xs = representations(query.ap as u64, form);
    let ys = representations(query.bp as u64, form);
    let mut count = 0;
    for x in &xs {
        count += ys.iter().filter(|y| weighted_dot(x, y, form) == query.cp).count() as u64;
    }
    Ok(count)
}

/// [`brute_pair_count_in`] for sums of three squares.
pub fn brute_pair_count(query: &PallQuery) -> Result<u64> {
    brute_pair_count_in(query, PairForm::ThreeSquares)
}

/// Pair counts for one `A'` and every `B' in 1..=max_b`, indexed
/// `[B' - 1][C' + offset]` with `offset = isqrt(A' * max_b)`.
pub struct PairCountRow {
    pub ap: i64,
    pub offset: i64,
    pub counts: Vec<Vec<u64>>,
}

impl PairCountRow {
    pub fn build(ap: i64, max_b: i64) -> Self {
        assert!(ap >= 0 && max_b >= 1);
        let offset = isqrt((ap * max_b) as u64) as i64;
        let xs = sphere_points(ap as u64);
        let counts = (1..=max_b)
            .map(|bp| {
                let mut row = vec![0u64; (2 * offset + 1) as usize];
                for y in sphere_points(bp as u64) {
                    for x in &xs {
                        let c = x[0] * y[0] + x[1] * y[1] + x[2] * y[2];
                        row[(c + offset) as usize] += 1;
                    }
                }
                row
            })
            .collect();
        PairCountRow { ap, offset, counts }
    }

    pub fn get(&self, bp: i64, cp: i64) -> u64 {
        if bp < 1 || bp as usize > self.counts.len() || cp.abs() > self.offset {
            return 0;
        }
        self.counts[bp as usize - 1][(cp + self.offset) as usize]
    }
}

/// Outcome of [`degenerate_split`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum DegenerateSplit {
    /// Every solution is `x = p z`, `y = q z` with `|z|^2 = m`; `p >= 0`,
    /// `gcd(p, q) = 1`, `q` carries the sign of `C'`.
    RankOne { p: i64, q: i64, m: u64, count: u64 },
    /// No integer pair `(p, q)` fits the data; the count is zero.
    Inconsistent,
}

impl DegenerateSplit {
    pub fn count(&self) -> u64 {
        match self {
            DegenerateSplit::RankOne { count, .. } => *count,
            DegenerateSplit::Inconsistent => 0,
        }
    }
}

/// Count for singular Gram data `A' B' = C'^2` through the collinear family.
pub fn degenerate_split(query: &PallQuery) -> Result<DegenerateSplit> {
    let PallQuery { ap, bp, cp } = *query;
    if ap < 0 || bp < 0 || (ap == 0 && bp == 0) {
        return Err(precondition("degenerate_split", "need A', B' >= 0, not both zero"));
    }
    if (ap as i128) * (bp as i128) != (cp as i128) * (cp as i128) {
        return Err(precondition("degenerate_split", "need A' B' = C'^2"));
    }
    let g = gcd(ap, bp);
    let (a, b) = (ap as u64 / g, bp as u64 / g);
    if !is_square(a) || !is_square(b) {
        return Ok(DegenerateSplit::Inconsistent);
    }
    let p = isqrt(a) as i64;
    let q = isqrt(b) as i64 * if cp < 0 { -1 } else { 1 };
    if (p * q) as i128 * g as i128 != cp as i128 {
        return Ok(DegenerateSplit::Inconsistent);
    }
    Ok(DegenerateSplit::RankOne {
        p,
        q,
        m: g,
        count: r3(g),
    })
}
