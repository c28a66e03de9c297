//! Closed-form count of pairs of integer 3-vectors with Gram matrix
//! `[[A', C'], [C', B']]`, positive definite:
//! `24 * 2^nu * chi(2) * prod_{odd p | k Delta} chi(p)` with
//! `k = gcd(A', B', C')`, `Delta = (A' B' - C'^2) / k^2` and `nu` the number
//! of distinct odd primes dividing `k Delta`.

use num_rational::Rational64;
use serde::{Deserialize, Serialize};

use super::arith::{factorize, gcd, legendre, square_part_root, valuation};
use crate::error::{precondition, Error, Result};
use crate::rng::{stream, StreamRng};
use rand::Rng;

/// The Gram data `(A', B', C')`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PallQuery {
    pub ap: i64,
    pub bp: i64,
    pub cp: i64,
}

impl PallQuery {
    pub fn new(ap: i64, bp: i64, cp: i64) -> Self {
        PallQuery { ap, bp, cp }
    }

    /// `A' B' - C'^2`, or an overflow error.
    pub fn determinant(&self) -> Result<i64> {
        let d = self.ap as i128 * self.bp as i128 - self.cp as i128 * self.cp as i128;
        i64::try_from(d).map_err(|_| Error::Overflow("A'B' - C'^2"))
    }

    /// `phi(x, y) = A' x^2 + B' y^2 + 2 C' x y`.
    fn phi(&self, x: i64, y: i64) -> i128 {
        let (x, y) = (x as i128, y as i128);
        self.ap as i128 * x * x + self.bp as i128 * y * y + 2 * self.cp as i128 * x * y
    }
}

/// Local data at one odd prime.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PrimeFactor {
    pub p: u64,
    /// Exponent of `p` in `k`.
    pub u1: u32,
    /// `u1` plus the exponent of `p` in `Delta`.
    pub u2: u32,
    /// `floor((u1 + 1) / 2)`.
    pub delta1: u32,
    pub kappa1: Rational64,
    pub kappa2: Rational64,
    pub chi: Rational64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PallFactorization {
    pub k: i64,
    pub delta: i64,
    pub nu: u32,
    pub per_prime: Vec<PrimeFactor>,
    /// Largest `h` with `h^2 | k`.
    pub h: i64,
}

fn require_definite(op: &'static str, q: &PallQuery) -> Result<i64> {
    if q.ap <= 0 || q.bp <= 0 {
        return Err(precondition(op, "need A', B' > 0"));
    }
    let det = q.determinant()?;
    if det <= 0 {
        return Err(precondition(op, format!("need A'B' - C'^2 > 0, got {det}")));
    }
    Ok(det)
}

/// `k`, `Delta` and the odd primes of `k Delta` with their local factors.
pub fn factorize_query(q: &PallQuery) -> Result<PallFactorization> {
    let det = require_definite("pall_count", q)?;
    let k = gcd(gcd(q.ap, q.bp) as i64, q.cp) as i64;
    let k2 = k.checked_mul(k).ok_or(Error::Overflow("k^2"))?;
    if det % k2 != 0 {
        return Err(Error::Inconsistent(format!("k^2 = {k2} does not divide {det}")));
    }
    let delta = det / k2;
    let kd = (k as u64)
        .checked_mul(delta as u64)
        .ok_or(Error::Overflow("k Delta"))?;
    let per_prime = factorize(kd)
        .into_iter()
        .filter(|&(p, _)| p != 2)
        .map(|(p, _)| prime_factor(q, k, delta, p))
        .collect::<Result<Vec<_>>>()?;
    Ok(PallFactorization {
        k,
        delta,
        nu: per_prime.len() as u32,
        per_prime,
        h: square_part_root(k as u64) as i64,
    })
}

/// `chi(p)` for an odd prime `p` dividing `k Delta`.
pub fn chi_odd_p(q: &PallQuery, p: u64) -> Result<Rational64> {
    require_definite("chi_odd_p", q)?;
    if p < 3 || p % 2 == 0 || factorize(p) != vec![(p, 1)] {
        return Err(precondition("chi_odd_p", format!("{p} is not an odd prime")));
    }
    let f = factorize_query(q)?;
    f.per_prime
        .iter()
        .find(|e| e.p == p)
        .map(|e| e.chi)
        .ok_or_else(|| precondition("chi_odd_p", format!("{p} does not divide k Delta")))
}

/// Legendre symbol of the first value of `phi / k` prime to `p`, scanning
/// `(x, y)` over `[0, p)^2` row by row.
fn unit_value_symbol(q: &PallQuery, k: i64, p: u64) -> Result<i32> {
    for x in 0..p as i64 {
        for y in 0..p as i64 {
            let v = q.phi(x, y) / k as i128;
            let r = v.rem_euclid(p as i128) as i64;
            if r != 0 {
                return Ok(legendre(r, p));
            }
        }
    }
    Err(Error::Inconsistent(format!("phi/k has no unit value modulo {p}")))
}

fn prime_factor(q: &PallQuery, k: i64, delta: i64, p: u64) -> Result<PrimeFactor> {
    let u1 = if k % p as i64 == 0 { valuation(k as u64, p) } else { 0 };
    let u2 = u1 + valuation(delta as u64, p);
    let delta1 = (u1 + 1) / 2;
    let pi = p as i64;
    let pow = |e: u32| pi.pow(e);
    let phi1 = unit_value_symbol(q, k, p)?;
    let half = Rational64::new(1, 2);
    let quarter = Rational64::new(1, 4);
    let one = Rational64::from_integer(1);
    let (kappa1, kappa2) = match (u1 % 2 == 0, u2 % 2 == 0) {
        (true, true) => {
            let s = (legendre(-k / pow(u1), p) * phi1) as i64;
            (one, half + quarter * (1 + s) * (u2 - u1) as i64)
        }
        (true, false) => {
            let s = (legendre(-k / pow(u1), p) * phi1) as i64;
            (half * (1 + s), quarter * (1 + s) * (u2 + 1 - u1) as i64)
        }
        (false, true) => {
            let kd = (k / pow(u1)) * (delta / pow(u2 - u1));
            let s = (legendre(-kd, p) * phi1) as i64;
            (half * (1 + s), Rational64::from_integer(0))
        }
        (false, false) => {
            // The unit-value symbol does not enter this row.
            let s = legendre(-delta / pow(u2 - u1), p) as i64;
            (half * (1 + s), Rational64::from_integer(0))
        }
    };
    let pd = pow(delta1);
    let chi = kappa1 * Rational64::new(pd - 1, pi - 1) + kappa2 * pd;
    Ok(PrimeFactor {
        p,
        u1,
        u2,
        delta1,
        kappa1,
        kappa2,
        chi,
    })
}

/// Node budget of the 2-adic search.
pub const TWO_ADIC_NODE_BUDGET: usize = 2_000_000;

/// Random trials of the certificate search in [`two_adic_solvable`].
pub const TWO_ADIC_TRIALS: usize = 20_000;

/// Whether `x.x = A`, `y.y = B`, `x.y = C` has a solution with
/// `x, y in Z_2^3`.
///
/// While `4 | A` and `4 | B` both vectors must be even, which forces `4 | C`
/// and lets everything be divided by 4. A root modulo `2^j` with
/// `j >= 2 e + 1`, `e` the least 2-adic valuation of a 3x3 minor of the
/// Jacobian, lifts to a genuine 2-adic root by Hensel's lemma. Such roots are
/// first sought by seeded random construction (free coordinates drawn at
/// random, the rest solved one variable at a time); if none turns up, a
/// depth-first search over digits either finds one or exhausts the tree.
pub fn two_adic_solvable(ap: i64, bp: i64, cp: i64) -> Result<bool> {
    let (mut a, mut b, mut c) = (ap, bp, cp);
    if a <= 0 || b <= 0 {
        return Err(precondition("two_adic_solvable", "need A', B' > 0"));
    }
    while a % 4 == 0 && b % 4 == 0 {
        if c % 4 != 0 {
            return Ok(false);
        }
        (a, b, c) = (a / 4, b / 4, c / 4);
    }
    if a % 4 == 0 {
        std::mem::swap(&mut a, &mut b);
    }
    let target = [a as u64, b as u64, c as u64];
    if certificate_search(&target) {
        return Ok(true);
    }
    let mut search = TwoAdicSearch {
        target,
        nodes: 0,
        max_depth: 60,
    };
    let start = [0u64; 6];
    match search.descend(&start, 0) {
        Some(found) => Ok(found),
        None => Err(Error::TwoAdicUnresolved {
            a: ap,
            b: bp,
            c: cp,
            nodes: search.nodes,
        }),
    }
}

/// Precision of the constructed roots.
const ROOT_BITS: u32 = 62;
const ROOT_NODE_BUDGET: usize = 4096;

fn inverse_odd(x: u64) -> u64 {
    let mut inv = x;
    for _ in 0..6 {
        inv = inv.wrapping_mul(2u64.wrapping_sub(x.wrapping_mul(inv)));
    }
    inv
}

/// Some `y` with `alpha y^2 + beta y + gamma = 0 mod 2^ROOT_BITS`, found bit
/// by bit.
fn poly_root(alpha: u64, beta: u64, gamma: u64, rng: &mut StreamRng) -> Option<u64> {
    let eval = |y: u64| alpha.wrapping_mul(y).wrapping_add(beta).wrapping_mul(y).wrapping_add(gamma);
    // (y, k): y is a root modulo 2^k.
    let mut stack = vec![(0u64, 0u32)];
    let mut nodes = 0;
    while let Some((y, k)) = stack.pop() {
        if k == ROOT_BITS {
            return Some(y);
        }
        nodes += 1;
        if nodes > ROOT_NODE_BUDGET {
            return None;
        }
        let mask = (1u64 << (k + 1)) - 1;
        let mut kids = [y, y | 1 << k];
        if rng.gen::<bool>() {
            kids.swap(0, 1);
        }
        // The child closer to a root is explored first; near a multiple root
        // the other one heads into a long dead branch.
        kids.sort_by_key(|&z| eval(z).trailing_zeros());
        for z in kids {
            if eval(z) & mask == 0 {
                stack.push((z, k + 1));
            }
        }
    }
    None
}

fn certified(v: &[u64; 6], target: &[u64; 3]) -> bool {
    let j = residual(v, target).iter().map(|r| r.trailing_zeros()).min().unwrap_or(0);
    j >= 2 * min_minor_valuation(v) + 1
}

/// Random construction of a certified root. Needs `A != 0 mod 4`, so that
/// `x` has an odd coordinate.
///
/// When `C / A` is 2-integral, `y = (C / A) x + w` with `w` orthogonal to `x`
/// and `w.w = (A B - C^2) / A`; `w` is drawn with a random power of two in
/// its free coordinate, since a highly divisible target forces a highly
/// divisible `w`. Otherwise one coordinate of `y` is drawn and the other two
/// solved for directly.
fn certificate_search(target: &[u64; 3]) -> bool {
    let [a, b, c] = *target;
    let (ai, ci) = (a as i64, c as i64);
    let va = a.trailing_zeros();
    let split = (ci == 0 || ci.trailing_zeros() >= va).then(|| {
        let unit = inverse_odd(a >> va);
        let det = (ai as i128) * (b as i64 as i128) - (ci as i128) * (ci as i128);
        let ratio = ((ci >> va) as u64).wrapping_mul(unit);
        let rest = ((det >> va) as u64).wrapping_mul(unit);
        (ratio, rest)
    });
    let mut rng = stream(a ^ b.rotate_left(21) ^ c.rotate_left(42), "pall.two_adic");
    for _ in 0..TWO_ADIC_TRIALS {
        let (x1, x2) = (rng.gen::<u64>(), rng.gen::<u64>());
        let rest = a.wrapping_sub(x1.wrapping_mul(x1)).wrapping_sub(x2.wrapping_mul(x2));
        let Some(x3) = poly_root(1, 0, rest.wrapping_neg(), &mut rng) else {
            continue;
        };
        let x = [x1, x2, x3];
        let Some(r) = (0..3).find(|&r| x[r] & 1 == 1) else {
            continue;
        };
        let (i, j) = ((r + 1) % 3, (r + 2) % 3);
        let xr2 = x[r].wrapping_mul(x[r]);
        let sq = |v: u64| v.wrapping_mul(v);
        let mut y = [0u64; 3];
        match split {
            Some((ratio, rest)) => {
                // w_r = -(x_i w_i + x_j w_j) / x_r, so x_r^2 w.w is a binary
                // form in (w_i, w_j).
                let shift = rng.gen_range(0..=rest.trailing_zeros().min(60) / 2 + 1);
                let wi = rng.gen::<u64>() << shift;
                let alpha = xr2.wrapping_add(sq(x[j]));
                let beta = x[i].wrapping_mul(x[j]).wrapping_mul(wi).wrapping_mul(2);
                let gamma = xr2
                    .wrapping_add(sq(x[i]))
                    .wrapping_mul(sq(wi))
                    .wrapping_sub(xr2.wrapping_mul(rest));
                let Some(wj) = poly_root(alpha, beta, gamma, &mut rng) else {
                    continue;
                };
                let wr = inverse_odd(x[r])
                    .wrapping_mul(x[i].wrapping_mul(wi).wrapping_add(x[j].wrapping_mul(wj)))
                    .wrapping_neg();
                let mut w = [0u64; 3];
                (w[i], w[j], w[r]) = (wi, wj, wr);
                for k in 0..3 {
                    y[k] = ratio.wrapping_mul(x[k]).wrapping_add(w[k]);
                }
            }
            None => {
                // y_r is fixed by the linear equation; y_j solves what is left
                // of y.y = B, multiplied through by x_r^2.
                let yi = rng.gen::<u64>();
                let c0 = c.wrapping_sub(x[i].wrapping_mul(yi));
                let alpha = xr2.wrapping_add(sq(x[j])).wrapping_neg();
                let beta = c0.wrapping_mul(x[j]).wrapping_mul(2);
                let gamma = xr2.wrapping_mul(b.wrapping_sub(sq(yi))).wrapping_sub(sq(c0));
                let Some(yj) = poly_root(alpha, beta, gamma, &mut rng) else {
                    continue;
                };
                let yr = inverse_odd(x[r]).wrapping_mul(c0.wrapping_sub(x[j].wrapping_mul(yj)));
                (y[i], y[j], y[r]) = (yi, yj, yr);
            }
        }
        if certified(&[x[0], x[1], x[2], y[0], y[1], y[2]], target) {
            return true;
        }
    }
    false
}

struct TwoAdicSearch {
    /// `(A, B, C)` as wrapping residues.
    target: [u64; 3],
    nodes: usize,
    max_depth: u32,
}

fn residual(v: &[u64; 6], target: &[u64; 3]) -> [u64; 3] {
    let dot = |i: usize, j: usize| {
        (0..3).fold(0u64, |acc, r| acc.wrapping_add(v[i + r].wrapping_mul(v[j + r])))
    };
    [
        dot(0, 0).wrapping_sub(target[0]),
        dot(3, 3).wrapping_sub(target[1]),
        dot(0, 3).wrapping_sub(target[2]),
    ]
}

/// Least valuation among the 3x3 minors of the Jacobian of
/// `(x.x, y.y, x.y)` at `v = (x, y)`, capped at 64.
fn min_minor_valuation(v: &[u64; 6]) -> u32 {
    // Column for x_r: (2 x_r, 0, y_r); for y_r: (0, 2 y_r, x_r).
    let col = |i: usize| -> [u64; 3] {
        if i < 3 {
            [v[i].wrapping_mul(2), 0, v[i + 3]]
        } else {
            [0, v[i].wrapping_mul(2), v[i - 3]]
        }
    };
    let mut best = 64;
    for i in 0..6 {
        for j in i + 1..6 {
            for l in j + 1..6 {
                let (a, b, c) = (col(i), col(j), col(l));
                let m = |x: u64, y: u64| x.wrapping_mul(y);
                let det = m(a[0], m(b[1], c[2]).wrapping_sub(m(b[2], c[1])))
                    .wrapping_sub(m(b[0], m(a[1], c[2]).wrapping_sub(m(a[2], c[1]))))
                    .wrapping_add(m(c[0], m(a[1], b[2]).wrapping_sub(m(a[2], b[1]))));
                best = best.min(det.trailing_zeros());
            }
        }
    }
    best
}

impl TwoAdicSearch {
    /// `Some(true)` on a certified root below `v`, `Some(false)` if the
    /// subtree is empty, `None` when the budget ran out.
    fn descend(&mut self, v: &[u64; 6], level: u32) -> Option<bool> {
        self.nodes += 1;
        if self.nodes > TWO_ADIC_NODE_BUDGET {
            return None;
        }
        if level > 0 && level >= 2 * min_minor_valuation(v) + 1 {
            return Some(true);
        }
        if level >= self.max_depth {
            return None;
        }
        let bit = 1u64 << level;
        let mask = (bit << 1) - 1;
        // Surviving children, least degenerate first.
        let mut children: Vec<(u32, [u64; 6])> = (0..64u64)
            .map(|choice| std::array::from_fn(|i| v[i] | if choice >> i & 1 == 1 { bit } else { 0 }))
            .filter(|child| residual(child, &self.target).iter().all(|r| r & mask == 0))
            .map(|child| (min_minor_valuation(&child).min(level + 1), child))
            .collect();
        children.sort_by_key(|&(e, _)| e);
        let mut exhausted = true;
        for (_, child) in children {
            match self.descend(&child, level + 1) {
                Some(true) => return Some(true),
                Some(false) => {}
                None => exhausted = false,
            }
        }
        if exhausted {
            Some(false)
        } else {
            None
        }
    }
}

/// `chi(2)`: one if the Gram system is solvable over the 2-adic integers,
/// zero otherwise.
pub fn chi_two(q: &PallQuery) -> Result<u8> {
    require_definite("chi_two", q)?;
    Ok(two_adic_solvable(q.ap, q.bp, q.cp)? as u8)
}

/// The closed-form count. The product over odd primes is evaluated first;
/// when it vanishes the 2-adic factor is not needed.
pub fn pall_count(q: &PallQuery) -> Result<u64> {
    let f = factorize_query(q)?;
    let odd: Rational64 = f.per_prime.iter().map(|e| e.chi).product();
    if odd == Rational64::from_integer(0) {
        return Ok(0);
    }
    if chi_two(q)? == 0 {
        return Ok(0);
    }
    let total = odd * Rational64::from_integer(24i64 << f.nu);
    if !total.is_integer() || total < Rational64::from_integer(0) {
        return Err(Error::Inconsistent(format!("non-integral count {total} for {q:?}")));
    }
    Ok(total.to_integer() as u64)
}

/// Largest `h` with `h^2 | gcd(A', B', C')`.
pub fn square_divisor_h(ap: i64, bp: i64, cp: i64) -> Result<u64> {
    if ap == 0 && bp == 0 && cp == 0 {
        return Err(precondition("square_divisor_h", "need (A', B', C') != 0"));
    }
    Ok(square_part_root(gcd(gcd(ap, bp) as i64, cp)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::counting::brute::{brute_pair_count, PairCountRow};

    #[test]
    fn small_examples() {
        assert_eq!(pall_count(&PallQuery::new(1, 1, 0)).unwrap(), 24);
        assert_eq!(pall_count(&PallQuery::new(2, 2, 1)).unwrap(), 48);
        assert!(pall_count(&PallQuery::new(-1, 1, 0)).is_err());
        assert!(pall_count(&PallQuery::new(1, 1, 1)).is_err());
    }

    #[test]
    fn chi_three_of_two_two_one() {
        let q = PallQuery::new(2, 2, 1);
        let f = factorize_query(&q).unwrap();
        assert_eq!((f.k, f.delta, f.nu, f.h), (1, 3, 1, 1));
        let e = f.per_prime[0];
        assert_eq!((e.p, e.u1, e.u2, e.delta1), (3, 0, 1, 0));
        assert_eq!(e.kappa1, Rational64::from_integer(1));
        assert_eq!(e.kappa2, Rational64::from_integer(1));
        assert_eq!(chi_odd_p(&q, 3).unwrap(), Rational64::from_integer(1));
        assert!(chi_odd_p(&q, 5).is_err());
        assert!(chi_odd_p(&q, 9).is_err());
    }

    #[test]
    fn odd_u1_even_u2_row_has_no_second_kappa() {
        // k = 3, Delta = 3: u1 = 1, u2 = 2.
        let q = PallQuery::new(3, 12, 3);
        let f = factorize_query(&q).unwrap();
        let e = f.per_prime.iter().find(|e| e.p == 3).unwrap();
        assert_eq!((e.u1, e.u2), (1, 2));
        assert_eq!(e.kappa2, Rational64::from_integer(0));
        assert_eq!(e.chi, e.kappa1 * Rational64::new(3 - 1, 2));
    }

    #[test]
    fn factorization_invariants() {
        for ap in 1..=30i64 {
            for bp in 1..=30i64 {
                for cp in -30..=30i64 {
                    let q = PallQuery::new(ap, bp, cp);
                    let Ok(f) = factorize_query(&q) else { continue };
                    assert_eq!(f.k * f.k * f.delta, ap * bp - cp * cp);
                    assert_eq!(f.k % (f.h * f.h), 0);
                    for e in &f.per_prime {
                        assert_eq!(e.delta1, (e.u1 + 1) / 2);
                        let pu = (e.p as i64).pow(e.u1);
                        assert_eq!(f.k % pu, 0);
                        assert_ne!((f.k / pu) % e.p as i64, 0);
                    }
                }
            }
        }
    }

    #[test]
    fn formula_matches_brute_force_up_to_40() {
        for ap in 1..=40i64 {
            let row = PairCountRow::build(ap, 40);
            for bp in 1..=40i64 {
                for cp in -row.offset..=row.offset {
                    let q = PallQuery::new(ap, bp, cp);
                    if q.determinant().unwrap() <= 0 {
                        continue;
                    }
                    assert_eq!(pall_count(&q).unwrap(), row.get(bp, cp), "{q:?}");
                }
            }
        }
    }

    #[test]
    fn two_adic_factor_agrees_with_solvability() {
        // Whenever integer solutions exist the system is 2-adically solvable.
        for (a, b, c) in [(1, 1, 0), (2, 2, 1), (22, 24, -4), (12, 12, -4), (3, 3, 1), (6, 14, 5)] {
            if brute_pair_count(&PallQuery::new(a, b, c)).unwrap() > 0 {
                assert!(two_adic_solvable(a, b, c).unwrap(), "({a},{b},{c})");
            }
        }
        // 7 is not a sum of three 2-adic squares; 4 | A, B but not C.
        assert!(!two_adic_solvable(7, 1, 0).unwrap());
        assert!(!two_adic_solvable(28, 4, 2).unwrap());
        assert!(!two_adic_solvable(4, 4, 2).unwrap());
    }

    #[test]
    fn square_divisor_examples() {
        assert_eq!(square_divisor_h(4, 8, 12).unwrap(), 2);
        assert_eq!(square_divisor_h(1, 1, 0).unwrap(), 1);
        assert_eq!(square_divisor_h(18, 36, 9).unwrap(), 3);
        assert!(square_divisor_h(0, 0, 0).is_err());
    }
}
