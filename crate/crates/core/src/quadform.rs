//! Torus geometry: the symmetric coefficient matrix `[[1, beta], [beta, alpha]]`
//! and the quadratic and linear forms built from it.
//!
//! The upper-left entry is normalised to one, so a form is fully described by
//! `alpha` (the lower-right entry) and `beta` (the off-diagonal entry).

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{precondition, Error, Result};
use crate::rng::{derive_seed, StreamRng};
use rand::SeedableRng;

/// Largest admissible magnitude of a matrix entry.
pub const ENTRY_BOUND: f64 = 2.0;

/// Rejection-sampling budget of [`QuadForm::sample_generic`].
pub const MAX_SAMPLER_DRAWS: u32 = 10_000;

/// An integer frequency `(k1, k2)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct LatticePoint {
    pub k1: i64,
    pub k2: i64,
}

impl LatticePoint {
    pub const fn new(k1: i64, k2: i64) -> Self {
        LatticePoint { k1, k2 }
    }

    /// Squared Euclidean length.
    pub fn norm2(&self) -> i64 {
        self.k1 * self.k1 + self.k2 * self.k2
    }
}

impl From<(i64, i64)> for LatticePoint {
    fn from((k1, k2): (i64, i64)) -> Self {
        LatticePoint { k1, k2 }
    }
}

/// Symmetric form `Q(k) = k1^2 + 2 beta k1 k2 + alpha k2^2`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuadForm {
    alpha: f64,
    beta: f64,
    /// Seed that produced the form, if it was sampled.
    seed: Option<u64>,
}

impl QuadForm {
    /// Builds a form with `|alpha|, |beta| <= 2`. Membership in the generic
    /// set is not required; query it with [`QuadForm::in_e`].
    pub fn new(alpha: f64, beta: f64) -> Result<Self> {
        if !alpha.is_finite() || !beta.is_finite() {
            return Err(precondition("QuadForm::new", "entries must be finite"));
        }
        if alpha.abs() > ENTRY_BOUND || beta.abs() > ENTRY_BOUND {
            return Err(precondition(
                "QuadForm::new",
                format!("|alpha|, |beta| must be <= 2, got ({alpha}, {beta})"),
            ));
        }
        Ok(QuadForm {
            alpha,
            beta,
            seed: None,
        })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn seed(&self) -> Option<u64> {
        self.seed
    }

    /// `max(1, |alpha|, |beta|)`; bounds `|Q(k)| <= 4 * norm * |k|_inf^2`.
    pub fn entry_norm(&self) -> f64 {
        1f64.max(self.alpha.abs()).max(self.beta.abs())
    }

    /// Eigenvalues `(lo, hi)` of `[[1, beta], [beta, alpha]]`, i.e. the roots
    /// of `x^2 - (1 + alpha) x + (alpha - beta^2)`.
    pub fn eigenvalues(&self) -> (f64, f64) {
        let half_trace = 0.5 * (1.0 + self.alpha);
        let half_gap = (0.25 * (1.0 - self.alpha).powi(2) + self.beta * self.beta).sqrt();
        (half_trace - half_gap, half_trace + half_gap)
    }

    /// True iff both eigenvalues exceed one in absolute value.
    ///
    /// Since the upper-left entry is one, the smaller eigenvalue of a
    /// positive-definite form is at most one; every member of this set is
    /// therefore indefinite.
    pub fn in_e(&self) -> bool {
        let (lo, hi) = self.eigenvalues();
        lo.abs() > 1.0 && hi.abs() > 1.0
    }

    pub fn is_positive_definite(&self) -> bool {
        self.alpha - self.beta * self.beta > 0.0
    }

    /// `Q(k) = k1^2 + 2 beta k1 k2 + alpha k2^2`.
    pub fn eval_q(&self, k: LatticePoint) -> f64 {
        let (k1, k2) = (k.k1 as f64, k.k2 as f64);
        k1 * k1 + 2.0 * self.beta * k1 * k2 + self.alpha * k2 * k2
    }

    /// `(L1(r), L2(r)) = (r1 + beta r2, beta r1 + alpha r2)`.
    pub fn linear_forms(&self, r: LatticePoint) -> (f64, f64) {
        let (r1, r2) = (r.k1 as f64, r.k2 as f64);
        (r1 + self.beta * r2, self.beta * r1 + self.alpha * r2)
    }

    /// Draws `(alpha, beta)` uniformly from `[-2, 2]^2` until the form lies in
    /// the generic set. Deterministic in `seed`.
    pub fn sample_generic(seed: u64) -> Result<Self> {
        let mut rng = StreamRng::seed_from_u64(derive_seed(seed, "quadform.generic"));
        for _ in 0..MAX_SAMPLER_DRAWS {
            let (alpha, beta) = draw_box(&mut rng);
            let form = QuadForm {
                alpha,
                beta,
                seed: Some(seed),
            };
            if form.in_e() {
                return Ok(form);
            }
        }
        Err(Error::SamplerExhausted {
            seed,
            attempts: MAX_SAMPLER_DRAWS,
        })
    }

    /// Number of integer triples `(A, B, C)` with `|A|, |B|, |C| <= r` and
    /// `|A + B alpha + C beta - tau| < delta`.
    ///
    /// For each `(B, C)` the admissible `A` form an interval around
    /// `tau - B alpha - C beta`; its integer endpoints are found by floor/ceil
    /// and then settled with the same floating predicate a triple loop would
    /// evaluate, so the result agrees with brute force exactly. Triples whose
    /// residual lies within a few ulps of `delta` are reported separately in
    /// [`ComboCount::guard_band`].
    pub fn count_small_combos(&self, r: i64, tau: f64, delta: f64) -> Result<ComboCount> {
        if r < 0 {
            return Err(precondition("count_small_combos", "R must be >= 0"));
        }
        if !(delta > 0.0) || !tau.is_finite() {
            return Err(precondition("count_small_combos", "delta must be > 0"));
        }
        let mut count = 0u64;
        let mut guard_band = 0u64;
        for b in -r..=r {
            for c in -r..=r {
                let centre = tau - b as f64 * self.alpha - c as f64 * self.beta;
                let mut lo = ((centre - delta).floor() as i64).max(-r);
                let mut hi = ((centre + delta).ceil() as i64).min(r);
                while lo <= hi && !self.combo_within(lo, b, c, tau, delta) {
                    lo += 1;
                }
                while hi >= lo && !self.combo_within(hi, b, c, tau, delta) {
                    hi -= 1;
                }
                if hi >= lo {
                    count += (hi - lo + 1) as u64;
                }
                let mut edges = [lo - 1, lo, hi, hi + 1];
                edges.sort_unstable();
                let mut prev = None;
                for a in edges {
                    if prev == Some(a) {
                        continue;
                    }
                    prev = Some(a);
                    if (-r..=r).contains(&a) && self.combo_ambiguous(a, b, c, tau, delta) {
                        guard_band += 1;
                    }
                }
            }
        }
        Ok(ComboCount { count, guard_band })
    }

    /// The floating predicate `|A + B alpha + C beta - tau| < delta`.
    pub fn combo_within(&self, a: i64, b: i64, c: i64, tau: f64, delta: f64) -> bool {
        (a as f64 + b as f64 * self.alpha + c as f64 * self.beta - tau).abs() < delta
    }

    fn combo_ambiguous(&self, a: i64, b: i64, c: i64, tau: f64, delta: f64) -> bool {
        let (af, bf, cf) = (a as f64, b as f64 * self.alpha, c as f64 * self.beta);
        let residual = (af + bf + cf - tau).abs();
        let scale = af.abs() + bf.abs() + cf.abs() + tau.abs() + delta;
        (residual - delta).abs() <= 4.0 * f64::EPSILON * scale
    }
}

fn draw_box(rng: &mut StreamRng) -> (f64, f64) {
    (
        rng.gen_range(-ENTRY_BOUND..=ENTRY_BOUND),
        rng.gen_range(-ENTRY_BOUND..=ENTRY_BOUND),
    )
}

/// Result of [`QuadForm::count_small_combos`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ComboCount {
    pub count: u64,
    /// Boundary triples whose membership is decided within rounding error.
    pub guard_band: u64,
}

/// Fraction of uniform draws from `[-2, 2]^2` that land in the generic set,
/// estimated from `draws` samples of the given stream.
pub fn generic_acceptance_rate(seed: u64, draws: u32) -> f64 {
    let mut rng = StreamRng::seed_from_u64(derive_seed(seed, "quadform.acceptance"));
    let hits = (0..draws)
        .filter(|_| {
            let (alpha, beta) = draw_box(&mut rng);
            QuadForm {
                alpha,
                beta,
                seed: None,
            }
            .in_e()
        })
        .count();
    hits as f64 / draws as f64
}
