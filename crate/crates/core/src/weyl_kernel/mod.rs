//! The regularized fundamental solution
//! `K_N(t, x) = sum_{|n_i| < N} chi(n1/N) chi(n2/N) e(x . n + t Q(n))`,
//! its supremum over the torus, the Weyl differencing majorant and the
//! time-averaged fourth power of the supremum.

mod cutoff;
mod grid;

use std::io::Write;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use cutoff::{CutoffProfile, TABLE_INTERVALS};
pub use grid::{box_side, eval_tensor, unit_phase, TorusGrid, MAX_GRID_POINTS};

use crate::error::{precondition, Result};
use crate::numeric::{dist_to_int, pairwise_sum};
use crate::quadform::{LatticePoint, QuadForm};

/// Smallest oversampling factor accepted by [`sup_over_x`].
pub const MIN_OVERSAMPLE: usize = 4;

/// Oversampling used when the caller has no preference.
pub const DEFAULT_OVERSAMPLE: usize = 8;

/// Direct evaluation of `K_N(t, x)`, `O(N^2)` terms.
pub fn kernel_direct(form: &QuadForm, chi: &CutoffProfile, n: u32, t: f64, x: (f64, f64)) -> Complex64 {
    assert!(n >= 1, "N must be >= 1");
    let w = chi.weights(n);
    let half = n as i64 - 1;
    let mut acc = Complex64::default();
    for (i, &w1) in w.iter().enumerate() {
        let n1 = i as i64 - half;
        let mut row = Complex64::default();
        for (j, &w2) in w.iter().enumerate() {
            let n2 = j as i64 - half;
            let k = LatticePoint::new(n1, n2);
            let phase = x.0 * n1 as f64 + x.1 * n2 as f64 + t * form.eval_q(k);
            row += w2 * unit_phase(phase);
        }
        acc += w1 * row;
    }
    acc
}

/// `K_N(0, 0) = (sum_n chi(n/N))^2`, the ceiling of `|K_N|`.
pub fn kernel_peak(chi: &CutoffProfile, n: u32) -> f64 {
    chi.lattice_sum(n).powi(2)
}

/// Fills `out` (length `(2N-1)^2`) with the coefficients
/// `chi(n1/N) chi(n2/N) e(t Q(n))`. The array is even under `n -> -n`, so only
/// half of it is evaluated and the rest mirrored.
pub fn kernel_coefficients(form: &QuadForm, weights: &[f64], t: f64, out: &mut [Complex64]) {
    let side = weights.len();
    assert_eq!(out.len(), side * side);
    let half = (side as i64 - 1) / 2;
    let total = side * side;
    for idx in 0..=total / 2 {
        let (r, c) = (idx / side, idx % side);
        let q = form.eval_q(LatticePoint::new(r as i64 - half, c as i64 - half));
        let z = (weights[r] * weights[c]) * unit_phase(t * q);
        out[idx] = z;
        out[total - 1 - idx] = z;
    }
}

/// An estimate of `sup_x |K_N(t, x)|`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct KernelSample {
    pub n: u32,
    pub t: f64,
    /// Largest `|K_N(t, x)|` found; a lower bound on the supremum.
    pub sup_abs: f64,
    /// Points per axis of the coarse grid.
    pub grid_size: usize,
    /// Refinement rounds performed around each candidate.
    pub refine_depth: u32,
    /// Where `sup_abs` was attained.
    pub argmax: (f64, f64),
}

/// Knobs of the local refinement that follows the coarse grid.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RefineSettings {
    /// Zoom rounds per candidate; each shrinks the stencil spacing by
    /// `STENCIL_HALF_WIDTH`.
    pub rounds: u32,
    /// Number of coarse local maxima refined.
    pub candidates: usize,
}

impl Default for RefineSettings {
    fn default() -> Self {
        RefineSettings {
            rounds: 3,
            candidates: 4,
        }
    }
}

/// Stencil is `(2 * STENCIL_HALF_WIDTH + 1)^2` points.
const STENCIL_HALF_WIDTH: usize = 4;

/// Reusable state for repeated supremum estimates at fixed `N` and grid.
///
/// With oversampling `s` the coarse grid has `M = 2 s N` points per axis and
/// every point lies within `h / sqrt(2)`, `h = 1 / M`, of a node. Along the
/// segment from the true maximizer `x*` to that node the second derivative of
/// `|K|^2` is at least `-4 (2 pi N)^2 sup^2` (Bernstein), and the first
/// derivative vanishes at `x*`, so the grid maximum is at least
/// `sup * sqrt(1 - pi^2 / s^2)`: a factor 1.09 at `s = 8`. Refinement only
/// increases the estimate.
pub struct SupEstimator {
    n: u32,
    weights: Vec<f64>,
    grid: TorusGrid,
    coeffs: Vec<Complex64>,
    refine: RefineSettings,
}

impl SupEstimator {
    pub fn new(chi: &CutoffProfile, n: u32, oversample: usize) -> Result<Self> {
        Self::with_refine(chi, n, oversample, RefineSettings::default())
    }

    pub fn with_refine(
        chi: &CutoffProfile,
        n: u32,
        oversample: usize,
        refine: RefineSettings,
    ) -> Result<Self> {
        if n == 0 {
            return Err(precondition("sup_over_x", "N must be >= 1"));
        }
        if oversample < MIN_OVERSAMPLE {
            return Err(precondition(
                "sup_over_x",
                format!("oversample must be >= {MIN_OVERSAMPLE}, got {oversample}"),
            ));
        }
        let m = oversample
            .checked_mul(2 * n as usize)
            .ok_or(crate::error::Error::GridTooLarge { points: usize::MAX })?;
        let grid = TorusGrid::new(n, m)?;
        let side = box_side(n);
        Ok(SupEstimator {
            n,
            weights: chi.weights(n),
            grid,
            coeffs: vec![Complex64::default(); side * side],
            refine,
        })
    }

    pub fn grid_size(&self) -> usize {
        self.grid.size()
    }

    pub fn sample(&mut self, form: &QuadForm, t: f64) -> KernelSample {
        kernel_coefficients(form, &self.weights, t, &mut self.coeffs);
        let m = self.grid.size();
        let h = 1.0 / m as f64;
        let n = self.n;
        let sample = |sup_abs: f64, argmax: (f64, f64), depth: u32| KernelSample {
            n,
            t,
            sup_abs,
            grid_size: m,
            refine_depth: depth,
            argmax,
        };

        if self.refine.rounds == 0 || self.refine.candidates <= 1 {
            let (best, (j1, j2)) = self.grid.max_abs(&self.coeffs, true);
            let centre = (j1 as f64 * h, j2 as f64 * h);
            if self.refine.rounds == 0 {
                return sample(best, centre, 0);
            }
            let (v, x) = self.refine_around(centre, best, h);
            return sample(v, x, self.refine.rounds);
        }

        let candidates = self.coarse_candidates();
        let (mut best, mut at) = candidates[0];
        for &(value, centre) in &candidates {
            let (v, x) = self.refine_around(centre, value, h);
            if v > best {
                best = v;
                at = x;
            }
        }
        sample(best, at, self.refine.rounds)
    }

    /// Largest coarse local maxima (value, location), best first.
    fn coarse_candidates(&mut self) -> Vec<(f64, (f64, f64))> {
        let m = self.grid.size();
        let upto = m / 2 + 1;
        let mut mags = vec![0.0f64; m * upto];
        self.grid
            .for_each_even(&self.coeffs, |j1, j2, z| mags[j2 * m + j1] = z.norm_sqr());
        // Value at an arbitrary node, folded through x -> -x.
        let at = |j1: usize, j2: usize| -> f64 {
            if j2 < upto {
                mags[j2 * m + j1]
            } else {
                mags[(m - j2) * m + (m - j1) % m]
            }
        };
        let keep = self.refine.candidates;
        // Best-first list of at most `keep` peaks.
        let mut peaks: Vec<(f64, usize, usize)> = Vec::with_capacity(keep + 1);
        for j2 in 0..upto {
            for j1 in 0..m {
                let v = mags[j2 * m + j1];
                if peaks.len() == keep && v <= peaks[keep - 1].0 {
                    continue;
                }
                let is_peak = [m - 1, 0, 1].iter().all(|&d2| {
                    [m - 1, 0, 1]
                        .iter()
                        .all(|&d1| (d1, d2) == (0, 0) || at((j1 + d1) % m, (j2 + d2) % m) <= v)
                });
                if is_peak {
                    let pos = peaks.partition_point(|p| p.0 >= v);
                    peaks.insert(pos, (v, j1, j2));
                    peaks.truncate(keep);
                }
            }
        }
        let h = 1.0 / m as f64;
        peaks
            .into_iter()
            .map(|(v, j1, j2)| (v.sqrt(), (j1 as f64 * h, j2 as f64 * h)))
            .collect()
    }

    fn refine_around(&self, mut centre: (f64, f64), mut best: f64, h: f64) -> (f64, (f64, f64)) {
        let w = STENCIL_HALF_WIDTH as f64;
        let mut step = h / w;
        let offsets: Vec<f64> = (0..=2 * STENCIL_HALF_WIDTH).map(|i| i as f64 - w).collect();
        for _ in 0..self.refine.rounds {
            let xs1: Vec<f64> = offsets.iter().map(|o| centre.0 + o * step).collect();
            let xs2: Vec<f64> = offsets.iter().map(|o| centre.1 + o * step).collect();
            let vals = eval_tensor(&self.coeffs, self.n, &xs1, &xs2);
            let mut round_best = (f64::NEG_INFINITY, centre);
            for (a, &x1) in xs1.iter().enumerate() {
                for (b, &x2) in xs2.iter().enumerate() {
                    let v = vals[a * xs2.len() + b].norm();
                    if v > round_best.0 {
                        round_best = (v, (x1, x2));
                    }
                }
            }
            if round_best.0 > best {
                best = round_best.0;
            }
            centre = round_best.1;
            step /= w;
        }
        (best, (centre.0.rem_euclid(1.0), centre.1.rem_euclid(1.0)))
    }
}

/// Estimates `sup_x |K_N(t, x)|` by a coarse FFT grid with
/// `oversample * 2N` points per axis followed by local refinement.
pub fn sup_over_x(
    form: &QuadForm,
    chi: &CutoffProfile,
    n: u32,
    t: f64,
    oversample: usize,
) -> Result<KernelSample> {
    Ok(SupEstimator::new(chi, n, oversample)?.sample(form, t))
}

/// `sup_x |K_N(t, x)| / min(N^2, 1/|t|)` for `0 < |t| <= 1/N`.
pub fn dispersive_ratio(form: &QuadForm, chi: &CutoffProfile, n: u32, t: f64) -> Result<f64> {
    if n == 0 {
        return Err(precondition("dispersive_ratio", "N must be >= 1"));
    }
    if !(t != 0.0 && t.abs() <= 1.0 / n as f64) {
        return Err(precondition(
            "dispersive_ratio",
            format!("need 0 < |t| <= 1/N, got t={t}, N={n}"),
        ));
    }
    let s = sup_over_x(form, chi, n, t, DEFAULT_OVERSAMPLE)?;
    Ok(s.sup_abs / dispersive_scale(n, t))
}

/// `min(N^2, 1/|t|)`.
pub fn dispersive_scale(n: u32, t: f64) -> f64 {
    let nn = n as f64;
    (nn * nn).min(1.0 / t.abs())
}

/// `sum_{|r_i| <= 2N} prod_j min(N, 1/||2 t L_j(r)||)`.
pub fn weyl_rhs(form: &QuadForm, n: u32, t: f64) -> f64 {
    let nn = n as f64;
    let reach = 2 * n as i64;
    let factor = |y: f64| {
        let d = dist_to_int(2.0 * t * y);
        if d * nn >= 1.0 {
            1.0 / d
        } else {
            nn
        }
    };
    let terms: Vec<f64> = (-reach..=reach)
        .map(|r1| {
            let row: Vec<f64> = (-reach..=reach)
                .map(|r2| {
                    let (l1, l2) = form.linear_forms(LatticePoint::new(r1, r2));
                    factor(l1) * factor(l2)
                })
                .collect();
            pairwise_sum(&row)
        })
        .collect();
    pairwise_sum(&terms)
}

/// `int_1^T sup_x |K_N(t, x)|^4 dt` by the composite midpoint rule.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct L4Integral {
    pub n: u32,
    pub t_end: f64,
    pub value: f64,
    /// Step actually used; divides `T - 1` exactly.
    pub step: f64,
    pub steps: u64,
}

/// Largest admissible time step `1 / (8 ||form|| N^2)`.
pub fn max_time_step(form: &QuadForm, n: u32) -> f64 {
    1.0 / (8.0 * form.entry_norm() * (n as f64).powi(2))
}

fn check_step(op: &'static str, form: &QuadForm, n: u32, dt: f64) -> Result<()> {
    if n == 0 {
        return Err(precondition(op, "N must be >= 1"));
    }
    let cap = max_time_step(form, n);
    if !(dt > 0.0 && dt <= cap) {
        return Err(precondition(op, format!("need 0 < dt <= {cap:e}, got {dt:e}")));
    }
    Ok(())
}

pub fn l4_time_integral(
    form: &QuadForm,
    chi: &CutoffProfile,
    n: u32,
    t_end: f64,
    dt: f64,
    oversample: usize,
) -> Result<L4Integral> {
    Ok(l4_time_integrals(form, chi, n, &[t_end], dt, oversample)?.remove(0))
}

/// [`l4_time_integral`] for several end times sharing one pass over `[1, max T]`.
///
/// A common step `h <= dt` is chosen so that `T - 1` is a multiple of `h` for
/// every requested `T` when possible; the integrals are then prefix sums of
/// one midpoint sequence. End times that do not fit the common step are
/// integrated separately.
pub fn l4_time_integrals(
    form: &QuadForm,
    chi: &CutoffProfile,
    n: u32,
    ends: &[f64],
    dt: f64,
    oversample: usize,
) -> Result<Vec<L4Integral>> {
    check_step("l4_time_integral", form, n, dt)?;
    if ends.is_empty() {
        return Ok(Vec::new());
    }
    if let Some(bad) = ends.iter().find(|&&t| !(t > 1.0 && t.is_finite())) {
        return Err(precondition("l4_time_integral", format!("need T > 1, got {bad}")));
    }
    // Unit-fraction step: every integer T then lands on the grid.
    let per_unit = (1.0 / dt).ceil();
    let h = 1.0 / per_unit;
    let steps_for = |t: f64| -> Option<u64> {
        let s = ((t - 1.0) * per_unit).round();
        ((s - (t - 1.0) * per_unit).abs() <= 1e-9 * s.max(1.0)).then_some(s as u64)
    };

    let mut out: Vec<Option<L4Integral>> = vec![None; ends.len()];
    let shared: Vec<(usize, u64)> = ends
        .iter()
        .enumerate()
        .filter_map(|(i, &t)| steps_for(t).filter(|&s| s > 0).map(|s| (i, s)))
        .collect();
    if let Some(&total) = shared.iter().map(|(_, s)| s).max() {
        let values = sup4_at_midpoints(form, chi, n, 1.0, h, total, oversample)?;
        for &(i, s) in &shared {
            out[i] = Some(L4Integral {
                n,
                t_end: ends[i],
                value: h * pairwise_sum(&values[..s as usize]),
                step: h,
                steps: s,
            });
        }
    }
    for (i, slot) in out.iter_mut().enumerate() {
        if slot.is_none() {
            let t = ends[i];
            let s = ((t - 1.0) / dt).ceil().max(1.0) as u64;
            let hs = (t - 1.0) / s as f64;
            let values = sup4_at_midpoints(form, chi, n, 1.0, hs, s, oversample)?;
            *slot = Some(L4Integral {
                n,
                t_end: t,
                value: hs * pairwise_sum(&values),
                step: hs,
                steps: s,
            });
        }
    }
    Ok(out.into_iter().map(|s| s.expect("filled above")).collect())
}

/// Time-slice chunk handed to one worker.
const SLICE_CHUNK: usize = 256;

/// `sup_x |K_N(t_s, x)|^4` at `t_s = start + (s + 1/2) h`, `s < steps`.
fn sup4_at_midpoints(
    form: &QuadForm,
    chi: &CutoffProfile,
    n: u32,
    start: f64,
    h: f64,
    steps: u64,
    oversample: usize,
) -> Result<Vec<f64>> {
    let refine = RefineSettings {
        rounds: 3,
        candidates: 1,
    };
    // Validate once so worker construction cannot fail.
    SupEstimator::with_refine(chi, n, oversample, refine)?;
    let mut values = vec![0.0; steps as usize];
    values
        .par_chunks_mut(SLICE_CHUNK)
        .enumerate()
        .for_each_init(
            || SupEstimator::with_refine(chi, n, oversample, refine).expect("validated"),
            |est, (c, chunk)| {
                for (i, v) in chunk.iter_mut().enumerate() {
                    let s = (c * SLICE_CHUNK + i) as f64;
                    *v = est.sample(form, start + (s + 0.5) * h).sup_abs.powi(4);
                }
            },
        );
    Ok(values)
}

/// One row of a [`SweepTable`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub sample: KernelSample,
    pub weyl_rhs: f64,
    /// Present for `0 < |t| <= 1/N`.
    pub ratio_disp: Option<f64>,
}

/// Kernel suprema of one form over an increasing list of times.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepTable {
    pub form: QuadForm,
    pub seed: u64,
    pub rows: Vec<SweepRow>,
}

impl SweepTable {
    /// Evaluates every time in `ts`, which must be strictly increasing.
    pub fn build(
        form: QuadForm,
        seed: u64,
        chi: &CutoffProfile,
        n: u32,
        ts: &[f64],
        oversample: usize,
    ) -> Result<Self> {
        if ts.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(precondition("SweepTable::build", "times must be strictly increasing"));
        }
        SupEstimator::new(chi, n, oversample)?;
        let rows = ts
            .par_iter()
            .map_init(
                || SupEstimator::new(chi, n, oversample).expect("validated"),
                |est, &t| {
                    let sample = est.sample(&form, t);
                    let ratio_disp = (t != 0.0 && t.abs() <= 1.0 / n as f64)
                        .then(|| sample.sup_abs / dispersive_scale(n, t));
                    SweepRow {
                        sample,
                        weyl_rhs: weyl_rhs(&form, n, t),
                        ratio_disp,
                    }
                },
            )
            .collect();
        Ok(SweepTable { form, seed, rows })
    }

    pub const CSV_HEADER: [&'static str; 6] = ["N", "t", "sup_abs", "weyl_rhs", "ratio_disp", "seed"];

    /// Writes the rows; set `header` for the first table of a file.
    pub fn write_csv<W: Write>(&self, out: &mut csv::Writer<W>) -> csv::Result<()> {
        for row in &self.rows {
            out.write_record([
                row.sample.n.to_string(),
                format!("{:e}", row.sample.t),
                format!("{:e}", row.sample.sup_abs),
                format!("{:e}", row.weyl_rhs),
                row.ratio_disp.map(|r| format!("{r:e}")).unwrap_or_default(),
                self.seed.to_string(),
            ])?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream;
    use rand::Rng;

    fn chi() -> CutoffProfile {
        CutoffProfile::new()
    }

    #[test]
    fn kernel_at_origin_is_peak() {
        let f = QuadForm::sample_generic(3).unwrap();
        let c = chi();
        for n in [1u32, 2, 5, 8] {
            let k = kernel_direct(&f, &c, n, 0.0, (0.0, 0.0));
            let peak = kernel_peak(&c, n);
            assert!((k.re - peak).abs() < 1e-9 * peak && k.im.abs() < 1e-9 * peak);
            let nn = n as f64;
            assert!(peak >= nn * nn - 1e-9 && peak <= (2.0 * nn + 1.0).powi(2));
        }
    }

    #[test]
    fn kernel_obeys_triangle_inequality() {
        let f = QuadForm::sample_generic(4).unwrap();
        let c = chi();
        let mut rng = stream(1, "test.kernel");
        for _ in 0..50 {
            let t = rng.gen_range(-10.0..10.0);
            let x = (rng.gen::<f64>(), rng.gen::<f64>());
            assert!(kernel_direct(&f, &c, 6, t, x).norm() <= kernel_peak(&c, 6) + 1e-9);
        }
    }

    #[test]
    fn fft_grid_agrees_with_direct_sum() {
        let f = QuadForm::sample_generic(5).unwrap();
        let c = chi();
        let n = 8;
        let t = 0.3719;
        let m = 64;
        let mut coeffs = vec![Complex64::default(); box_side(n).pow(2)];
        kernel_coefficients(&f, &c.weights(n), t, &mut coeffs);
        let mut grid = TorusGrid::new(n, m).unwrap();
        let mut values = vec![Complex64::default(); m * m];
        grid.for_each(&coeffs, |j1, j2, z| values[j1 * m + j2] = z);
        let mut rng = stream(2, "test.grid");
        for _ in 0..50 {
            let (j1, j2) = (rng.gen_range(0..m), rng.gen_range(0..m));
            let want = kernel_direct(&f, &c, n, t, (j1 as f64 / m as f64, j2 as f64 / m as f64));
            let got = values[j1 * m + j2];
            assert!((got - want).norm() <= 1e-9 * want.norm().max(1.0));
        }
    }

    #[test]
    fn sup_at_time_zero_is_peak_at_origin() {
        let f = QuadForm::sample_generic(6).unwrap();
        let c = chi();
        let s = sup_over_x(&f, &c, 8, 0.0, 8).unwrap();
        let peak = kernel_peak(&c, 8);
        assert!((s.sup_abs - peak).abs() < 1e-9 * peak);
        let d = |a: f64| a.min(1.0 - a);
        assert!(d(s.argmax.0) < 1e-12 && d(s.argmax.1) < 1e-12);
        assert_eq!(s.grid_size, 128);
        assert_eq!(s.refine_depth, 3);
    }

    #[test]
    fn sup_is_symmetric_in_time() {
        let f = QuadForm::sample_generic(7).unwrap();
        let c = chi();
        let mut rng = stream(3, "test.sym");
        for _ in 0..10 {
            let t = rng.gen_range(0.0..50.0);
            let a = sup_over_x(&f, &c, 8, t, 8).unwrap().sup_abs;
            let b = sup_over_x(&f, &c, 8, -t, 8).unwrap().sup_abs;
            assert!((a - b).abs() <= 1e-9 * a, "t={t} {a} {b}");
        }
    }

    #[test]
    fn sup_dominates_coarse_grid_and_respects_ceiling() {
        let f = QuadForm::sample_generic(8).unwrap();
        let c = chi();
        let n = 6;
        let mut rng = stream(4, "test.ceiling");
        let mut est = SupEstimator::new(&c, n, 4).unwrap();
        let mut grid = TorusGrid::new(n, est.grid_size()).unwrap();
        let mut coeffs = vec![Complex64::default(); box_side(n).pow(2)];
        for _ in 0..20 {
            let t = rng.gen_range(0.0..100.0);
            let s = est.sample(&f, t);
            kernel_coefficients(&f, &c.weights(n), t, &mut coeffs);
            let (coarse, _) = grid.max_abs(&coeffs, false);
            assert!(s.sup_abs >= coarse);
            assert!(s.sup_abs <= kernel_peak(&c, n) * (1.0 + 1e-12));
            let at = kernel_direct(&f, &c, n, t, s.argmax).norm();
            assert!((at - s.sup_abs).abs() <= 1e-9 * s.sup_abs);
        }
    }

    #[test]
    fn rejects_small_oversample() {
        let f = QuadForm::sample_generic(9).unwrap();
        assert!(sup_over_x(&f, &chi(), 8, 0.5, 3).is_err());
        assert!(sup_over_x(&f, &chi(), 8, 0.5, 1 << 20).is_err());
    }

    #[test]
    fn dispersive_ratio_domain_and_symmetry() {
        let f = QuadForm::sample_generic(10).unwrap();
        let c = chi();
        assert!(dispersive_ratio(&f, &c, 16, 0.0).is_err());
        assert!(dispersive_ratio(&f, &c, 16, 0.1).is_err());
        let t = 1.0 / 256.0;
        let a = dispersive_ratio(&f, &c, 16, t).unwrap();
        let b = dispersive_ratio(&f, &c, 16, -t).unwrap();
        assert!((a - b).abs() <= 1e-9 * a);
        assert!(a <= 5.0, "ratio {a}");
    }

    #[test]
    fn dispersive_ratio_small_time_limit() {
        let f = QuadForm::sample_generic(12).unwrap();
        let c = chi();
        let n = 16;
        let limit = kernel_peak(&c, n) / (n * n) as f64;
        assert!((1.0..=4.5).contains(&limit));
        let r = dispersive_ratio(&f, &c, n, 1e-9).unwrap();
        assert!((r - limit).abs() < 1e-4 * limit, "{r} vs {limit}");
    }

    #[test]
    fn weyl_rhs_ceiling() {
        let f = QuadForm::sample_generic(13).unwrap();
        for n in [1u32, 4, 8] {
            let nn = n as f64;
            let full = (4.0 * nn + 1.0).powi(2) * nn * nn;
            assert_eq!(weyl_rhs(&f, n, 0.0), full);
            for t in [0.01, 0.7, 3.3, 250.0] {
                assert!(weyl_rhs(&f, n, t) <= full);
            }
        }
    }

    #[test]
    fn weyl_majorant_holds_at_n8() {
        let c = chi();
        let mut rng = stream(5, "test.weyl");
        let mut worst: f64 = 0.0;
        for i in 0..100 {
            let f = QuadForm::sample_generic(1000 + i).unwrap();
            let t = rng.gen_range(0.0..10.0);
            let x = (rng.gen::<f64>(), rng.gen::<f64>());
            let k2 = kernel_direct(&f, &c, 8, t, x).norm_sqr();
            worst = worst.max(k2 / weyl_rhs(&f, 8, t));
        }
        assert!(worst <= 8.0, "C = {worst}");
    }

    #[test]
    fn l4_integral_bounds_and_steps() {
        let f = QuadForm::new(0.5, 0.25).unwrap();
        let c = chi();
        let n = 4;
        let dt = max_time_step(&f, n);
        assert!(l4_time_integral(&f, &c, n, 2.0, dt * 1.01, 4).is_err());
        assert!(l4_time_integral(&f, &c, n, 1.0, dt, 4).is_err());
        let short = l4_time_integral(&f, &c, n, 1.0 + 1e-6, dt, 4).unwrap();
        assert!(short.value <= 1e-6 * kernel_peak(&c, n).powi(4));
        let r = l4_time_integral(&f, &c, n, 3.0, dt, 4).unwrap();
        assert!(r.step <= dt);
        assert!((r.step * r.steps as f64 - 2.0).abs() < 1e-12);
        assert!(r.value > 0.0 && r.value <= 2.0 * kernel_peak(&c, n).powi(4));
    }

    #[test]
    fn l4_prefix_sums_match_separate_runs() {
        let f = QuadForm::sample_generic(14).unwrap();
        let c = chi();
        let n = 4;
        let dt = max_time_step(&f, n);
        let many = l4_time_integrals(&f, &c, n, &[2.0, 3.0, 2.5], dt, 4).unwrap();
        for r in &many {
            let one = l4_time_integral(&f, &c, n, r.t_end, dt, 4).unwrap();
            assert!((one.value - r.value).abs() <= 1e-12 * one.value);
            assert_eq!(one.steps, r.steps);
        }
    }

    #[test]
    fn sweep_table_rows_and_csv() {
        let f = QuadForm::sample_generic(15).unwrap();
        let c = chi();
        assert!(SweepTable::build(f, 15, &c, 4, &[0.5, 0.5], 8).is_err());
        let table = SweepTable::build(f, 15, &c, 4, &[0.01, 0.2, 3.0], 8).unwrap();
        assert_eq!(table.rows.len(), 3);
        assert!(table.rows[0].ratio_disp.is_some() && table.rows[2].ratio_disp.is_none());
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(SweepTable::CSV_HEADER).unwrap();
        table.write_csv(&mut w).unwrap();
        let text = String::from_utf8(w.into_inner().unwrap()).unwrap();
        assert!(text.starts_with("N,t,sup_abs,weyl_rhs,ratio_disp,seed\n"));
        assert_eq!(text.lines().count(), 4);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(64))]

            #[test]
            fn kernel_is_even_periodic_and_bounded(
                seed in 0u64..500,
                n in 1u32..7,
                t in -50.0f64..50.0,
                x1 in 0.0f64..1.0,
                x2 in 0.0f64..1.0,
            ) {
                let (f, c) = (QuadForm::sample_generic(seed).unwrap(), chi());
                let k = kernel_direct(&f, &c, n, t, (x1, x2));
                let tol = 1e-9 * kernel_peak(&c, n).max(1.0);
                prop_assert!(k.norm() <= kernel_peak(&c, n) + tol);
                prop_assert!((kernel_direct(&f, &c, n, t, (-x1, -x2)) - k).norm() <= tol);
                prop_assert!((kernel_direct(&f, &c, n, t, (x1 + 1.0, x2 - 2.0)) - k).norm() <= tol);
                // Conjugation reverses time.
                prop_assert!((kernel_direct(&f, &c, n, -t, (-x1, -x2)) - k.conj()).norm() <= tol);
            }

            #[test]
            fn sup_lies_between_sample_and_peak(seed in 0u64..500, n in 2u32..10, t in 0.0f64..100.0) {
                let (f, c) = (QuadForm::sample_generic(seed).unwrap(), chi());
                let s = sup_over_x(&f, &c, n, t, MIN_OVERSAMPLE).unwrap();
                let at = kernel_direct(&f, &c, n, t, s.argmax).norm();
                prop_assert!((at - s.sup_abs).abs() <= 1e-9 * s.sup_abs.max(1.0));
                prop_assert!(s.sup_abs <= kernel_peak(&c, n) * (1.0 + 1e-12));
                prop_assert!(s.sup_abs >= kernel_direct(&f, &c, n, t, (0.0, 0.0)).norm() - 1e-9);
            }
        }
    }
}
