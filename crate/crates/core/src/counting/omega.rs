//! Counts of `q`-tuples of lattice points `(k_i, l_i)`, `|k_i|, |l_i| < N`,
//! with prescribed signed moments
//! `sum s_i k_i = a`, `sum s_i l_i = b`, `sum s_i k_i^2 = A`,
//! `sum s_i l_i^2 = B`, `sum s_i k_i l_i = C`.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{precondition, Error, Result};

/// Largest number of points accepted.
pub const MAX_POINTS: usize = 6;

/// The five moment sums `(a, b, A, B, C)`.
pub type MomentKey = [i64; 5];

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OmegaQuery {
    pub q: usize,
    pub n: u32,
    /// One sign per point, each `1` or `-1`.
    pub signs: Vec<i8>,
    pub target: MomentKey,
}

impl OmegaQuery {
    /// All signs positive.
    pub fn unsigned(q: usize, n: u32, target: MomentKey) -> Self {
        OmegaQuery {
            q,
            n,
            signs: vec![1; q],
            target,
        }
    }

    /// Signs `(-1)^i`, `i = 1..=q`.
    pub fn alternating(q: usize, n: u32, target: MomentKey) -> Self {
        OmegaQuery {
            q,
            n,
            signs: alternating_signs(q),
            target,
        }
    }
}

pub fn alternating_signs(q: usize) -> Vec<i8> {
    (1..=q).map(|i| if i % 2 == 0 { 1 } else { -1 }).collect()
}

fn validate(op: &'static str, q: usize, n: u32, signs: &[i8]) -> Result<()> {
    if q == 0 || q > MAX_POINTS {
        return Err(precondition(op, format!("need 1 <= q <= {MAX_POINTS}, got {q}")));
    }
    if n == 0 {
        return Err(precondition(op, "N must be >= 1"));
    }
    if signs.len() != q || signs.iter().any(|&s| s != 1 && s != -1) {
        return Err(precondition(op, "need one sign in {1, -1} per point"));
    }
    // Every partial moment is at most q N^2 in size.
    let nn = n as i64;
    (q as i64)
        .checked_mul(nn)
        .and_then(|x| x.checked_mul(nn))
        .filter(|&x| x < 1 << 62)
        .ok_or(Error::Overflow("omega moment keys"))?;
    Ok(())
}

/// The points `(k, l)` with `|k|, |l| < N`.
pub fn box_points(n: u32) -> Vec<(i64, i64)> {
    let r = n as i64 - 1;
    (-r..=r).flat_map(|k| (-r..=r).map(move |l| (k, l))).collect()
}

fn moment(k: i64, l: i64, s: i64) -> MomentKey {
    [s * k, s * l, s * k * k, s * l * l, s * k * l]
}

fn add(a: &MomentKey, b: &MomentKey) -> MomentKey {
    std::array::from_fn(|i| a[i] + b[i])
}

fn sub(a: &MomentKey, b: &MomentKey) -> MomentKey {
    std::array::from_fn(|i| a[i] - b[i])
}

/// Moment sums of every tuple of points carrying `signs`, in lexicographic
/// tuple order.
fn tuple_moments(points: &[(i64, i64)], signs: &[i8]) -> Vec<MomentKey> {
    let mut acc = vec![[0i64; 5]];
    for &s in signs {
        let s = s as i64;
        let mut next = Vec::with_capacity(acc.len() * points.len());
        for base in &acc {
            for &(k, l) in points {
                next.push(add(base, &moment(k, l, s)));
            }
        }
        acc = next;
    }
    acc
}

fn histogram(keys: Vec<MomentKey>) -> HashMap<MomentKey, u64> {
    let mut h = HashMap::with_capacity(keys.len());
    for key in keys {
        *h.entry(key).or_insert(0) += 1;
    }
    h
}

/// Meet-in-the-middle counter for a fixed `(q, N, signs)`; the histogram of
/// the right half is built once and reused across targets.
pub struct OmegaCounter {
    q: usize,
    n: u32,
    signs: Vec<i8>,
    left: Vec<MomentKey>,
    right: HashMap<MomentKey, u64>,
}

impl OmegaCounter {
    pub fn new(q: usize, n: u32, signs: &[i8]) -> Result<Self> {
        validate("omega_count", q, n, signs)?;
        let points = box_points(n);
        let split = q.div_ceil(2);
        Ok(OmegaCounter {
            q,
            n,
            signs: signs.to_vec(),
            left: tuple_moments(&points, &signs[..split]),
            right: histogram(tuple_moments(&points, &signs[split..])),
        })
    }

    pub fn matches(&self, query: &OmegaQuery) -> bool {
        query.q == self.q && query.n == self.n && query.signs == self.signs
    }

    pub fn count(&self, target: &MomentKey) -> u64 {
        self.left
            .iter()
            .map(|l| self.right.get(&sub(target, l)).copied().unwrap_or(0))
            .sum()
    }
}

/// Exact count by meet-in-the-middle on the five moment sums, split at
/// `ceil(q / 2)`.
pub fn omega_count(query: &OmegaQuery) -> Result<u64> {
    Ok(OmegaCounter::new(query.q, query.n, &query.signs)?.count(&query.target))
}

/// Reference count: enumerates the first `q - 1` points and solves the two
/// linear equations for the last one.
pub fn omega_count_naive(query: &OmegaQuery) -> Result<u64> {
    validate("omega_count_naive", query.q, query.n, &query.signs)?;
    let r = query.n as i64 - 1;
    let q = query.q;
    let last = query.signs[q - 1] as i64;
    let mut idx = vec![0usize; q - 1];
    let side = (2 * r + 1) as usize;
    let mut count = 0u64;
    loop {
        let mut acc = [0i64; 5];
        for (i, &j) in idx.iter().enumerate() {
            let (k, l) = ((j / side) as i64 - r, (j % side) as i64 - r);
            acc = add(&acc, &moment(k, l, query.signs[i] as i64));
        }
        let rest = sub(&query.target, &acc);
        // s k = rest[0], s l = rest[1] with s = +-1.
        let (k, l) = (last * rest[0], last * rest[1]);
        if k.abs() <= r && l.abs() <= r && moment(k, l, last) == rest {
            count += 1;
        }
        // Odometer over the first q - 1 points.
        let mut pos = 0;
        loop {
            if pos == idx.len() {
                return Ok(count);
            }
            idx[pos] += 1;
            if idx[pos] < side * side {
                break;
            }
            idx[pos] = 0;
            pos += 1;
        }
    }
}

/// Histogram of the moment sums of all `q`-tuples by full enumeration.
pub fn omega_histogram(q: usize, n: u32, signs: &[i8]) -> Result<HashMap<MomentKey, u64>> {
    validate("omega_histogram", q, n, signs)?;
    Ok(histogram(tuple_moments(&box_points(n), signs)))
}
