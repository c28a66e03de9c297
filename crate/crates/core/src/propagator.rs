//! Free Schrödinger evolution `e^{it Q(D)}` of band-limited data on the
//! torus, its space-time `L^p` norms, the bound formulas those norms are
//! compared against, and the search for refocusing times.

use std::io::Write;

use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{precondition, Error, Result};
use crate::numeric::{dist_to_int, pairwise_sum};
use crate::quadform::{LatticePoint, QuadForm};
use crate::rng::stream;
pub use crate::weyl_kernel::max_time_step;
use crate::weyl_kernel::{box_side, unit_phase, TorusGrid};

/// Fourier coefficients supported in the open disc `|k| < N`.
#[derive(Clone, Debug, PartialEq)]
pub struct FourierData {
    n: u32,
    support: Vec<LatticePoint>,
    amps: Vec<Complex64>,
}

impl FourierData {
    pub fn new(n: u32, support: Vec<LatticePoint>, amps: Vec<Complex64>) -> Result<Self> {
        if n == 0 {
            return Err(precondition("FourierData::new", "N must be >= 1"));
        }
        if support.len() != amps.len() {
            return Err(precondition("FourierData::new", "one amplitude per support point"));
        }
        let r2 = n as i64 * n as i64;
        if let Some(k) = support.iter().find(|k| k.norm2() >= r2) {
            return Err(precondition(
                "FourierData::new",
                format!("support point ({}, {}) outside |k| < {n}", k.k1, k.k2),
            ));
        }
        if amps.iter().any(|a| !a.re.is_finite() || !a.im.is_finite()) {
            return Err(precondition("FourierData::new", "amplitudes must be finite"));
        }
        Ok(FourierData { n, support, amps })
    }

    /// One mode `amp e(k . x)`.
    pub fn single_mode(n: u32, k: LatticePoint, amp: Complex64) -> Result<Self> {
        FourierData::new(n, vec![k], vec![amp])
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn support(&self) -> &[LatticePoint] {
        &self.support
    }

    pub fn amps(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn l2_norm(&self) -> f64 {
        let sq: Vec<f64> = self.amps.iter().map(|a| a.norm_sqr()).collect();
        pairwise_sum(&sq).sqrt()
    }

    /// Dense `(2N-1) x (2N-1)` coefficient box of `e^{it Q(D)} f`, laid out
    /// as [`TorusGrid`] expects.
    fn coefficient_box(&self, form: &QuadForm, t: f64, out: &mut [Complex64]) {
        let side = box_side(self.n);
        let half = self.n as i64 - 1;
        out.iter_mut().for_each(|z| *z = Complex64::default());
        for (k, a) in self.support.iter().zip(&self.amps) {
            let idx = (k.k1 + half) as usize * side + (k.k2 + half) as usize;
            out[idx] += a * unit_phase(t * form.eval_q(*k));
        }
    }
}

/// Multiplies every amplitude by `e(t Q(k))`.
pub fn evolve(form: &QuadForm, f: &FourierData, t: f64) -> FourierData {
    FourierData {
        n: f.n,
        support: f.support.clone(),
        amps: f
            .support
            .iter()
            .zip(&f.amps)
            .map(|(k, a)| a * unit_phase(t * form.eval_q(*k)))
            .collect(),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BumpKind {
    /// `N^{-1} psi(k / N)` on the disc, the transform of `N chi(N x)`.
    FullBump,
    /// `N^{-1/2} psi_1(k1 / N)` on the axis `k2 = 0`.
    Line,
    /// All ones on `|k| < N`.
    IndicatorBall,
}

/// `exp(-1 / (1 - s))` for `s < 1`, zero beyond.
fn bump_profile(s: f64) -> f64 {
    if s < 1.0 {
        (-1.0 / (1.0 - s)).exp()
    } else {
        0.0
    }
}

/// `int_0^1 g(s) ds` by the midpoint rule; `g` must be smooth on `[0, 1]`.
fn midpoint_integral(g: impl Fn(f64) -> f64) -> f64 {
    const STEPS: usize = 20_000;
    let vals: Vec<f64> = (0..STEPS).map(|i| g((i as f64 + 0.5) / STEPS as f64)).collect();
    pairwise_sum(&vals) / STEPS as f64
}

/// Tolerance on the `L^2` norm of the bump kinds.
pub const BUMP_NORM_RANGE: (f64, f64) = (0.9, 1.1);

pub fn bump_data(n: u32, kind: BumpKind) -> Result<FourierData> {
    if n < 2 {
        return Err(precondition("bump_data", "N must be >= 2"));
    }
    let r = n as i64 - 1;
    let nf = n as f64;
    let disc: Vec<LatticePoint> = (-r..=r)
        .flat_map(|k1| (-r..=r).map(move |k2| LatticePoint::new(k1, k2)))
        .filter(|k| k.norm2() < n as i64 * n as i64)
        .collect();
    let data = match kind {
        BumpKind::IndicatorBall => {
            let amps = vec![Complex64::new(1.0, 0.0); disc.len()];
            return FourierData::new(n, disc, amps);
        }
        BumpKind::FullBump => {
            // psi(xi) = c exp(-1/(1-|xi|^2)); in polar coordinates with
            // s = 1 - |xi|^2 the squared L^2 norm is pi c^2 int_0^1 e^{-2/s} ds.
            let mass = std::f64::consts::PI * midpoint_integral(|s| (-2.0 / s).exp());
            let c = mass.sqrt().recip();
            let amps = disc
                .iter()
                .map(|k| Complex64::new(c * bump_profile(k.norm2() as f64 / (nf * nf)) / nf, 0.0))
                .collect();
            FourierData::new(n, disc, amps)?
        }
        BumpKind::Line => {
            // psi_1(u) = c exp(-1/(1-u^2)) on (-1, 1), unit L^2 norm.
            let mass = 2.0 * midpoint_integral(|u| bump_profile(u * u).powi(2));
            let c = mass.sqrt().recip();
            let support: Vec<LatticePoint> = (-r..=r).map(|k| LatticePoint::new(k, 0)).collect();
            let amps = support
                .iter()
                .map(|k| {
                    let u = k.k1 as f64 / nf;
                    Complex64::new(c * bump_profile(u * u) / nf.sqrt(), 0.0)
                })
                .collect();
            FourierData::new(n, support, amps)?
        }
    };
    let norm = data.l2_norm();
    if !(BUMP_NORM_RANGE.0..=BUMP_NORM_RANGE.1).contains(&norm) {
        return Err(Error::Inconsistent(format!("{kind:?} data at N={n} has L2 norm {norm}")));
    }
    Ok(data)
}

/// `||e^{it Q(D)} f||_{L^p([0, T] x T^2)}` and the discretisation used.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormResult {
    pub p: f64,
    pub t_end: f64,
    pub n: u32,
    pub value: f64,
    pub x_grid: usize,
    pub t_step: f64,
    /// Time slices evaluated.
    pub slices: usize,
    /// Whether the time integral was estimated from stratified samples.
    pub sampled: bool,
}

/// Smallest admissible grid, `4 (2N)` points per axis.
pub fn min_norm_grid(n: u32) -> usize {
    8 * n as usize
}

fn check_norm_args(form: &QuadForm, f: &FourierData, p: f64, t_end: f64, x_grid: usize, t_step: f64) -> Result<()> {
    const OP: &str = "lp_spacetime_norm";
    if !(p >= 1.0 && p.is_finite()) {
        return Err(precondition(OP, format!("need finite p >= 1, got {p}")));
    }
    if !(t_end > 0.0 && t_end.is_finite()) {
        return Err(precondition(OP, format!("need T > 0, got {t_end}")));
    }
    if x_grid < min_norm_grid(f.n) {
        return Err(precondition(
            OP,
            format!("x grid {x_grid} below {} for N={}", min_norm_grid(f.n), f.n),
        ));
    }
    let max_step = max_time_step(form, f.n);
    if !(t_step > 0.0 && t_step <= max_step) {
        return Err(precondition(OP, format!("time step {t_step} not in (0, {max_step}]")));
    }
    Ok(())
}

/// `|z|^p` from `|z|^2`.
#[inline]
fn pth_power(norm_sqr: f64, p: f64) -> f64 {
    let half = p / 2.0;
    if half.fract() == 0.0 && half <= 64.0 {
        norm_sqr.powi(half as i32)
    } else {
        norm_sqr.powf(half)
    }
}

/// `int_{T^2} |e^{it Q(D)} f|^p dx` by the grid mean, for each `t`.
fn slice_integrals(form: &QuadForm, f: &FourierData, p: f64, x_grid: usize, times: &[f64]) -> Result<Vec<f64>> {
    // Fail on grid allocation before the workers start.
    TorusGrid::new(f.n, x_grid)?;
    let chunk = times.len().div_ceil(4 * rayon::current_num_threads()).max(1);
    let parts: Vec<Vec<f64>> = times
        .par_chunks(chunk)
        .map(|ts| {
            let mut grid = TorusGrid::new(f.n, x_grid).expect("grid validated above");
            let side = box_side(f.n);
            let mut coeffs = vec![Complex64::default(); side * side];
            let mut powers = vec![0.0; x_grid * x_grid];
            ts.iter()
                .map(|&t| {
                    f.coefficient_box(form, t, &mut coeffs);
                    grid.for_each(&coeffs, |j1, j2, z| powers[j1 * x_grid + j2] = pth_power(z.norm_sqr(), p));
                    pairwise_sum(&powers) / powers.len() as f64
                })
                .collect()
        })
        .collect();
    Ok(parts.concat())
}

/// Space-time `L^p` norm over `[0, T] x T^2`.
///
/// Time is cut into the fixed cells `[i h, (i+1) h]`, `h = t_step`; each
/// cell meeting `[0, T]` contributes its overlap length times the `x`-integral
/// at the cell midpoint, so the result is nondecreasing in `T`. The
/// `x`-integral is the mean over the uniform `x_grid^2` grid, computed by FFT.
/// That mean is exact when `p` is an even integer and the grid exceeds the
/// degree `p (N - 1)` of `|u|^p`; otherwise the contract is self-convergence
/// under refinement of both steps.
pub fn lp_spacetime_norm(
    form: &QuadForm,
    f: &FourierData,
    p: f64,
    t_end: f64,
    x_grid: usize,
    t_step: f64,
) -> Result<NormResult> {
    check_norm_args(form, f, p, t_end, x_grid, t_step)?;
    let cells = (t_end / t_step).ceil().max(1.0) as usize;
    let times: Vec<f64> = (0..cells).map(|i| (i as f64 + 0.5) * t_step).collect();
    let slices = slice_integrals(form, f, p, x_grid, &times)?;
    let weighted: Vec<f64> = slices
        .iter()
        .enumerate()
        .map(|(i, v)| v * (t_end - i as f64 * t_step).min(t_step))
        .collect();
    Ok(NormResult {
        p,
        t_end,
        n: f.n,
        value: pairwise_sum(&weighted).powf(1.0 / p),
        x_grid,
        t_step,
        slices: cells,
        sampled: false,
    })
}

/// As [`lp_spacetime_norm`], but when more than `max_slices` cells would be
/// needed, `[0, T]` is split into `max_slices` equal strata and one uniformly
/// drawn time per stratum (seeded) stands in for it.
pub fn lp_spacetime_norm_sampled(
    form: &QuadForm,
    f: &FourierData,
    p: f64,
    t_end: f64,
    x_grid: usize,
    t_step: f64,
    max_slices: usize,
    seed: u64,
) -> Result<NormResult> {
    check_norm_args(form, f, p, t_end, x_grid, t_step)?;
    if max_slices == 0 {
        return Err(precondition("lp_spacetime_norm_sampled", "need max_slices >= 1"));
    }
    if (t_end / t_step).ceil() as usize <= max_slices {
        return lp_spacetime_norm(form, f, p, t_end, x_grid, t_step);
    }
    let width = t_end / max_slices as f64;
    let mut rng = stream(seed, "propagator.strata");
    let times: Vec<f64> = (0..max_slices).map(|s| (s as f64 + rng.gen::<f64>()) * width).collect();
    let slices = slice_integrals(form, f, p, x_grid, &times)?;
    Ok(NormResult {
        p,
        t_end,
        n: f.n,
        value: (pairwise_sum(&slices) * width).powf(1.0 / p),
        x_grid,
        t_step,
        slices: max_slices,
        sampled: true,
    })
}

fn check_bound_args(op: &'static str, p: f64, n: u32, t_end: f64) -> Result<()> {
    if !(p >= 2.0 && p.is_finite()) {
        return Err(precondition(op, format!("need finite p >= 2, got {p}")));
    }
    if n == 0 || !(t_end >= 1.0 && t_end.is_finite()) {
        return Err(precondition(op, "need N >= 1 and T >= 1"));
    }
    Ok(())
}

/// `N^{d/2 - (d+2)/p} + T^{1/p} sum_{m=0}^{d} N^{m/2 - (m^2+2m)/p}`.
pub fn conjecture_bound(d: u32, p: f64, n: u32, t_end: f64) -> Result<f64> {
    check_bound_args("conjecture_bound", p, n, t_end)?;
    if d == 0 {
        return Err(precondition("conjecture_bound", "need d >= 1"));
    }
    let nf = n as f64;
    let df = d as f64;
    let sum: f64 = (0..=d)
        .map(|m| {
            let m = m as f64;
            nf.powf(m / 2.0 - (m * m + 2.0 * m) / p)
        })
        .sum();
    Ok(nf.powf(df / 2.0 - (df + 2.0) / p) + t_end.powf(1.0 / p) * sum)
}

/// The two-dimensional conjecture written case by case, with cutoffs at
/// `p = 4, 6, 10`.
pub fn conjecture_bound_2d(p: f64, n: u32, t_end: f64) -> Result<f64> {
    check_bound_args("conjecture_bound_2d", p, n, t_end)?;
    let nf = n as f64;
    let tp = t_end.powf(1.0 / p);
    let fixed = nf.powf(1.0 - 4.0 / p);
    Ok(if p <= 4.0 {
        tp
    } else if p <= 6.0 {
        tp + fixed
    } else if p <= 10.0 {
        tp * nf.powf(0.5 - 3.0 / p) + fixed
    } else {
        nf.powf(1.0 - 8.0 / p) * tp + fixed
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TheoremBounds {
    /// `N^{1-4/p} + T^{1/p} N^{(2/3)(1-4/p)}`, valid for `p > 4`.
    pub weyl: f64,
    /// The sharp bound for `p >= 8`; `None` below.
    pub p8_10: Option<f64>,
}

pub fn theorem_bounds(p: f64, n: u32, t_end: f64) -> Result<TheoremBounds> {
    check_bound_args("theorem_bounds", p, n, t_end)?;
    if p <= 4.0 {
        return Err(precondition("theorem_bounds", format!("need p > 4, got {p}")));
    }
    let nf = n as f64;
    let tp = t_end.powf(1.0 / p);
    let fixed = nf.powf(1.0 - 4.0 / p);
    let weyl = fixed + tp * nf.powf(2.0 / 3.0 * (1.0 - 4.0 / p));
    let p8_10 = if p < 8.0 {
        None
    } else if p <= 10.0 {
        Some(fixed + tp * nf.powf(0.5 - 3.0 / p))
    } else {
        Some(fixed + nf.powf(1.0 - 8.0 / p) * tp)
    };
    Ok(TheoremBounds { weyl, p8_10 })
}

/// Outcome of [`refocus_search`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RefocusResult {
    /// The first qualifying `q`, or the best one seen if none qualified.
    pub q: u64,
    /// `max(||q alpha||, ||q beta||)` at `q`.
    pub worst: f64,
    pub n: u32,
    pub found: bool,
}

/// Smallest `q <= q_max` with `||q alpha||, ||q beta|| < 1 / N^2`.
pub fn refocus_search(form: &QuadForm, n: u32, q_max: u64) -> Result<RefocusResult> {
    if q_max == 0 || n == 0 {
        return Err(precondition("refocus_search", "need q_max >= 1 and N >= 1"));
    }
    let target = 1.0 / (n as f64 * n as f64);
    let mut best = RefocusResult {
        q: 1,
        worst: f64::INFINITY,
        n,
        found: false,
    };
    for q in 1..=q_max {
        let qf = q as f64;
        let worst = dist_to_int(qf * form.alpha()).max(dist_to_int(qf * form.beta()));
        if worst < target {
            return Ok(RefocusResult {
                q,
                worst,
                n,
                found: true,
            });
        }
        if worst < best.worst {
            best.q = q;
            best.worst = worst;
        }
    }
    Ok(best)
}

/// Least-squares line through `(ln scale, ln value)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExponentFit {
    pub slope: f64,
    pub intercept: f64,
    /// Coefficient of determination; 1 when the values are all equal.
    pub r2: f64,
}

pub fn exponent_fit(samples: &[(f64, f64)]) -> Result<ExponentFit> {
    if samples.len() < 2 {
        return Err(Error::DegenerateFit(format!("{} samples", samples.len())));
    }
    if samples.iter().any(|&(s, v)| !(s > 0.0 && v > 0.0 && s.is_finite() && v.is_finite())) {
        return Err(precondition("exponent_fit", "scales and values must be positive"));
    }
    let pts: Vec<(f64, f64)> = samples.iter().map(|&(s, v)| (s.ln(), v.ln())).collect();
    let count = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / count;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / count;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let syy: f64 = pts.iter().map(|p| (p.1 - my).powi(2)).sum();
    if sxx <= 1e-24 * count {
        return Err(Error::DegenerateFit("all scales equal".into()));
    }
    let slope = sxy / sxx;
    let resid: f64 = pts.iter().map(|p| (p.1 - my - slope * (p.0 - mx)).powi(2)).sum();
    let r2 = if syy <= 1e-24 { 1.0 } else { 1.0 - resid / syy };
    Ok(ExponentFit {
        slope,
        intercept: my - slope * mx,
        r2,
    })
}

/// One measured norm set against the bound formulas.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StrichartzRow {
    pub seed: u64,
    pub p: f64,
    pub n: u32,
    pub t_end: f64,
    pub norm: f64,
    pub conj_bound: f64,
    pub thm_weyl: Option<f64>,
    pub thm_p8: Option<f64>,
    /// `norm / (||f||_2 conj_bound)`.
    pub ratio: f64,
}

impl StrichartzRow {
    pub fn new(seed: u64, f: &FourierData, norm: &NormResult) -> Result<Self> {
        let conj_bound = conjecture_bound(2, norm.p, norm.n, norm.t_end)?;
        let thm = (norm.p > 4.0).then(|| theorem_bounds(norm.p, norm.n, norm.t_end)).transpose()?;
        Ok(StrichartzRow {
            seed,
            p: norm.p,
            n: norm.n,
            t_end: norm.t_end,
            norm: norm.value,
            conj_bound,
            thm_weyl: thm.map(|b| b.weyl),
            thm_p8: thm.and_then(|b| b.p8_10),
            ratio: norm.value / (f.l2_norm() * conj_bound),
        })
    }
}

pub const STRICHARTZ_CSV_HEADER: [&str; 9] =
    ["seed", "p", "N", "T", "norm", "conj_bound", "thm_weyl", "thm_p8", "ratio"];

pub fn write_strichartz_csv<W: Write>(rows: &[StrichartzRow], out: &mut csv::Writer<W>) -> csv::Result<()> {
    let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
    for r in rows {
        out.write_record([
            r.seed.to_string(),
            r.p.to_string(),
            r.n.to_string(),
            r.t_end.to_string(),
            r.norm.to_string(),
            r.conj_bound.to_string(),
            opt(r.thm_weyl),
            opt(r.thm_p8),
            r.ratio.to_string(),
        ])?;
    }
    Ok(())
}
