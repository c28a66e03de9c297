//! Successive minima of the box norm
//! `F(n, m) = max(|n_i| / N, N |t L_i(n) - m_i|)` on `Z^2 x Z^2`.
//!
//! For fixed `n` the best `m_i` is the integer nearest `t L_i(n)`, and any
//! vector with `F <= r` has `|n_i| <= r N`, so scanning that box of `n` and,
//! for each `n`, every `m` with `N |t L_i(n) - m_i| <= r` finds every vector
//! of norm at most `r`.

use std::cmp::Ordering;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{precondition, Error, Result};
use crate::quadform::{LatticePoint, QuadForm};
use crate::weyl_kernel::{sup_over_x, CutoffProfile};

/// The data defining `F`. A finite `f64` time is already a dyadic rational
/// with a 53-bit numerator, so it is used as given by both the enumeration
/// and any exact re-computation.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoxNormParams {
    pub form: QuadForm,
    pub n: u32,
    pub t: f64,
}

impl BoxNormParams {
    pub fn new(form: QuadForm, n: u32, t: f64) -> Result<Self> {
        if n == 0 {
            return Err(precondition("BoxNormParams::new", "N must be >= 1"));
        }
        if !t.is_finite() {
            return Err(precondition("BoxNormParams::new", "t must be finite"));
        }
        Ok(BoxNormParams { form, n, t })
    }
}

/// `F(n, m)`.
pub fn box_norm(params: &BoxNormParams, n: LatticePoint, m: (i64, i64)) -> f64 {
    let nn = params.n as f64;
    let (l1, l2) = params.form.linear_forms(n);
    let t = params.t;
    (n.k1.abs() as f64 / nn)
        .max(n.k2.abs() as f64 / nn)
        .max(nn * (t * l1 - m.0 as f64).abs())
        .max(nn * (t * l2 - m.1 as f64).abs())
}

/// A lattice vector `(n1, n2, m1, m2)`.
pub type Vector4 = [i64; 4];

/// The two successive minima and vectors attaining them.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MinimaResult {
    pub m1: f64,
    pub m2: f64,
    pub v1: Vector4,
    pub v2: Vector4,
}

/// True iff the two vectors are linearly dependent over the rationals.
pub fn parallel(a: &Vector4, b: &Vector4) -> bool {
    (0..4).all(|i| {
        (i + 1..4).all(|j| a[i] as i128 * b[j] as i128 == a[j] as i128 * b[i] as i128)
    })
}

/// Sign normalisation: the first nonzero coordinate is positive.
pub fn is_canonical(v: &Vector4) -> bool {
    v.iter().find(|&&x| x != 0).is_some_and(|&x| x > 0)
}

/// Ordering of candidates: by norm, then the absolute coordinates compared
/// from the last (`|m2|`) to the first (`|n1|`), then the signed coordinates.
/// At `t = 0` this puts `((1,0),(0,0))` ahead of `((0,1),(0,0))`.
fn cmp_candidates(a: &(f64, Vector4), b: &(f64, Vector4)) -> Ordering {
    let abs = |v: &Vector4| [v[3].abs(), v[2].abs(), v[1].abs(), v[0].abs()];
    a.0.total_cmp(&b.0)
        .then_with(|| abs(&a.1).cmp(&abs(&b.1)))
        .then_with(|| a.1.cmp(&b.1))
}

/// Running pair (overall minimum, minimum not parallel to it).
#[derive(Default)]
struct MinimaTracker {
    first: Option<(f64, Vector4)>,
    second: Option<(f64, Vector4)>,
}

impl MinimaTracker {
    fn offer(&mut self, c: (f64, Vector4)) {
        let Some(a) = self.first else {
            self.first = Some(c);
            return;
        };
        if cmp_candidates(&c, &a) == Ordering::Less {
            if !parallel(&c.1, &a.1) {
                self.second = Some(a);
            }
            self.first = Some(c);
        } else if !parallel(&c.1, &a.1)
            && self
                .second
                .is_none_or(|b| cmp_candidates(&c, &b) == Ordering::Less)
        {
            self.second = Some(c);
        }
    }
}

/// Exhaustive minima over vectors with `F <= radius`.
pub fn successive_minima(params: &BoxNormParams, radius: f64) -> Result<MinimaResult> {
    if !(radius >= 1.0 && radius.is_finite()) {
        return Err(precondition("successive_minima", format!("radius must be >= 1, got {radius}")));
    }
    let nn = params.n as f64;
    let reach = (radius * nn).floor();
    if reach > 1e5 {
        return Err(precondition("successive_minima", "search box too large"));
    }
    let reach = reach as i64;
    let slack = radius / nn;
    let t = params.t;
    let mut tracker = MinimaTracker::default();
    for n1 in -reach..=reach {
        for n2 in -reach..=reach {
            let n = LatticePoint::new(n1, n2);
            let (l1, l2) = params.form.linear_forms(n);
            let (c1, c2) = (t * l1, t * l2);
            let range = |c: f64| ((c - slack).ceil() as i64)..=((c + slack).floor() as i64);
            for m1 in range(c1) {
                for m2 in range(c2) {
                    let v = [n1, n2, m1, m2];
                    if !is_canonical(&v) {
                        continue;
                    }
                    let f = box_norm(params, n, (m1, m2));
                    if f <= radius {
                        tracker.offer((f, v));
                    }
                }
            }
        }
    }
    match (tracker.first, tracker.second) {
        (Some((m1, v1)), Some((m2, v2))) => Ok(MinimaResult { m1, m2, v1, v2 }),
        _ => Err(Error::RadiusTooSmall { radius }),
    }
}

/// [`successive_minima`] starting at radius 1 and doubling on failure. A
/// radius of `N` always succeeds, since `((1,0), round)` and `((0,1), round)`
/// have norm at most `max(1/N, N/2)`.
pub fn successive_minima_auto(params: &BoxNormParams) -> Result<MinimaResult> {
    let mut radius = 1.0;
    loop {
        match successive_minima(params, radius) {
            Err(Error::RadiusTooSmall { .. }) if radius < params.n as f64 => {
                radius = (2.0 * radius).min(params.n as f64);
            }
            other => return other,
        }
    }
}

/// One Davenport comparison: `sup_x |K_N|^2 m1 m2 / N^2`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DavenportSample {
    pub params: BoxNormParams,
    pub minima: MinimaResult,
    pub sup_abs: f64,
    pub ratio: f64,
}

pub fn davenport_sample(
    params: &BoxNormParams,
    chi: &CutoffProfile,
    oversample: usize,
) -> Result<DavenportSample> {
    let minima = successive_minima_auto(params)?;
    let sup_abs = sup_over_x(&params.form, chi, params.n, params.t, oversample)?.sup_abs;
    let nn = params.n as f64;
    Ok(DavenportSample {
        params: *params,
        minima,
        sup_abs,
        ratio: sup_abs * sup_abs * minima.m1 * minima.m2 / (nn * nn),
    })
}

pub fn davenport_ratio(params: &BoxNormParams, chi: &CutoffProfile, oversample: usize) -> Result<f64> {
    Ok(davenport_sample(params, chi, oversample)?.ratio)
}

pub const MINIMA_CSV_HEADER: [&str; 7] = ["N", "t", "m1", "m2", "sup_abs", "davenport_ratio", "seed"];

/// Writes one CSV row per sample; the seed column is the form's seed.
pub fn write_minima_csv<W: Write>(
    samples: &[DavenportSample],
    out: &mut csv::Writer<W>,
) -> csv::Result<()> {
    for s in samples {
        out.write_record([
            s.params.n.to_string(),
            format!("{:e}", s.params.t),
            format!("{:e}", s.minima.m1),
            format!("{:e}", s.minima.m2),
            format!("{:e}", s.sup_abs),
            format!("{:e}", s.ratio),
            s.params.form.seed().map(|x| x.to_string()).unwrap_or_default(),
        ])?;
    }
    Ok(())
}
