//! Evaluation of band-limited trigonometric polynomials on the 2-torus.
//!
//! A polynomial `u(x) = sum c_n e(n . x)` with `|n_i| < N` is stored as a
//! dense `(2N-1) x (2N-1)` array, row index `n1 + N - 1`, column index
//! `n2 + N - 1`. [`TorusGrid`] evaluates it on the uniform `M x M` grid
//! `x = (j1 / M, j2 / M)` with two passes of length-`M` inverse FFTs; only the
//! `2N - 1` non-empty rows are transformed in the first pass.

use std::f64::consts::TAU;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{precondition, Error, Result};
use crate::numeric::frac;

/// Largest grid (points per axis squared) the evaluators will allocate.
pub const MAX_GRID_POINTS: usize = 1 << 26;

/// `e(theta) = exp(2 pi i theta)` with the phase reduced mod 1 first.
#[inline]
pub fn unit_phase(theta: f64) -> Complex64 {
    let (s, c) = (TAU * frac(theta)).sin_cos();
    Complex64::new(c, s)
}

/// Side length `2N - 1` of the coefficient box.
#[inline]
pub fn box_side(n: u32) -> usize {
    2 * n as usize - 1
}

pub struct TorusGrid {
    n: u32,
    m: usize,
    fft: Arc<dyn Fft<f64>>,
    rows: Vec<Complex64>,
    cols: Vec<Complex64>,
    scratch: Vec<Complex64>,
}

/// Columns transformed per batch in the second pass.
const COLUMN_BATCH: usize = 32;

impl TorusGrid {
    pub fn new(n: u32, m: usize) -> Result<Self> {
        if n == 0 {
            return Err(precondition("TorusGrid::new", "N must be >= 1"));
        }
        if m < box_side(n) {
            return Err(precondition(
                "TorusGrid::new",
                format!("grid size {m} cannot resolve degree {}", n - 1),
            ));
        }
        let points = m.checked_mul(m).ok_or(Error::GridTooLarge { points: usize::MAX })?;
        if points > MAX_GRID_POINTS {
            return Err(Error::GridTooLarge { points });
        }
        let fft = FftPlanner::new().plan_fft_inverse(m);
        let scratch = vec![Complex64::default(); fft.get_inplace_scratch_len()];
        Ok(TorusGrid {
            n,
            m,
            fft,
            rows: vec![Complex64::default(); box_side(n) * m],
            cols: vec![Complex64::default(); COLUMN_BATCH.min(m) * m],
            scratch,
        })
    }

    pub fn size(&self) -> usize {
        self.m
    }

    pub fn degree_bound(&self) -> u32 {
        self.n
    }

    /// Calls `visit(j1, j2, u(j1/M, j2/M))` for every grid node. Nodes are
    /// visited column by column (`j2` outer), `j1` ascending inside a column.
    pub fn for_each(&mut self, coeffs: &[Complex64], visit: impl FnMut(usize, usize, Complex64)) {
        let m = self.m;
        self.sweep(coeffs, m, false, visit);
    }

    /// As [`TorusGrid::for_each`] but only for columns `j2 <= M / 2`. When the
    /// coefficients are even (`c_{-n} = c_n`) the polynomial is even in `x`,
    /// so these columns already carry every value of the grid.
    pub fn for_each_even(&mut self, coeffs: &[Complex64], visit: impl FnMut(usize, usize, Complex64)) {
        let upto = self.m / 2 + 1;
        self.sweep(coeffs, upto, true, visit);
    }

    fn sweep(
        &mut self,
        coeffs: &[Complex64],
        upto: usize,
        even: bool,
        mut visit: impl FnMut(usize, usize, Complex64),
    ) {
        let side = box_side(self.n);
        assert_eq!(coeffs.len(), side * side, "coefficient box size mismatch");
        let (m, half) = (self.m, self.n as i64 - 1);
        self.rows.iter_mut().for_each(|z| *z = Complex64::default());
        for r in 0..side {
            let row = &mut self.rows[r * m..(r + 1) * m];
            for c in 0..side {
                let n2 = c as i64 - half;
                row[n2.rem_euclid(m as i64) as usize] = coeffs[r * side + c];
            }
        }
        if even {
            // Row -n1 is row n1 reflected in x2.
            let done = self.n as usize * m;
            self.fft.process_with_scratch(&mut self.rows[..done], &mut self.scratch);
            for r in self.n as usize..side {
                let src = side - 1 - r;
                for j in 0..m {
                    self.rows[r * m + j] = self.rows[src * m + (m - j) % m];
                }
            }
        } else {
            self.fft.process_with_scratch(&mut self.rows, &mut self.scratch);
        }

        let mut j2 = 0;
        while j2 < upto {
            let batch = COLUMN_BATCH.min(upto - j2);
            let cols = &mut self.cols[..batch * m];
            cols.iter_mut().for_each(|z| *z = Complex64::default());
            for r in 0..side {
                let n1 = r as i64 - half;
                let dest = n1.rem_euclid(m as i64) as usize;
                for b in 0..batch {
                    cols[b * m + dest] = self.rows[r * m + j2 + b];
                }
            }
            self.fft.process_with_scratch(cols, &mut self.scratch);
            for b in 0..batch {
                for j1 in 0..m {
                    visit(j1, j2 + b, cols[b * m + j1]);
                }
            }
            j2 += batch;
        }
    }

    /// Full grid of `|u|`, row-major in `(j1, j2)`.
    pub fn magnitudes(&mut self, coeffs: &[Complex64]) -> Vec<f64> {
        let m = self.m;
        let mut out = vec![0.0; m * m];
        self.for_each(coeffs, |j1, j2, z| out[j1 * m + j2] = z.norm());
        out
    }

    /// Maximum of `|u|` over the grid and the node attaining it (first in
    /// visiting order on ties). `even` selects [`TorusGrid::for_each_even`].
    pub fn max_abs(&mut self, coeffs: &[Complex64], even: bool) -> (f64, (usize, usize)) {
        let mut best = (-1.0, (0, 0));
        let visit = |j1, j2, z: Complex64| {
            let v = z.norm_sqr();
            if v > best.0 {
                best = (v, (j1, j2));
            }
        };
        if even {
            self.for_each_even(coeffs, visit);
        } else {
            self.for_each(coeffs, visit);
        }
        (best.0.max(0.0).sqrt(), best.1)
    }
}

/// `e(n x)` for `n = -(N-1) ..= N-1`, by powers of `e(x)`.
fn phase_row(n: u32, x: f64, out: &mut Vec<Complex64>) {
    let half = n as usize - 1;
    out.clear();
    out.resize(box_side(n), Complex64::new(1.0, 0.0));
    let step = unit_phase(x);
    let mut z = Complex64::new(1.0, 0.0);
    for k in 1..=half {
        z *= step;
        out[half + k] = z;
        out[half - k] = z.conj();
    }
}

/// Evaluates the polynomial at the tensor points `xs1 x xs2` directly,
/// `O((2N-1)^2 |xs2| + (2N-1) |xs1| |xs2|)`. Output is row-major in `xs1`.
pub fn eval_tensor(coeffs: &[Complex64], n: u32, xs1: &[f64], xs2: &[f64]) -> Vec<Complex64> {
    let side = box_side(n);
    assert_eq!(coeffs.len(), side * side);
    let nb = xs2.len();
    let mut ph = Vec::with_capacity(side);
    // partial[r][b] = sum_{n2} c[r][n2] e(n2 x2_b)
    let mut partial = vec![Complex64::default(); side * nb];
    for (b, &x) in xs2.iter().enumerate() {
        phase_row(n, x, &mut ph);
        for r in 0..side {
            let row = &coeffs[r * side..(r + 1) * side];
            partial[r * nb + b] = row.iter().zip(&ph).map(|(c, p)| c * p).sum();
        }
    }
    let mut out = vec![Complex64::default(); xs1.len() * nb];
    for (a, &x1) in xs1.iter().enumerate() {
        phase_row(n, x1, &mut ph);
        let dest = &mut out[a * nb..(a + 1) * nb];
        for (r, p) in ph.iter().enumerate() {
            for (o, v) in dest.iter_mut().zip(&partial[r * nb..(r + 1) * nb]) {
                *o += p * v;
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn direct(coeffs: &[Complex64], n: u32, x1: f64, x2: f64) -> Complex64 {
        let side = box_side(n);
        let half = n as i64 - 1;
        let mut acc = Complex64::default();
        for r in 0..side {
            for c in 0..side {
                let (n1, n2) = ((r as i64 - half) as f64, (c as i64 - half) as f64);
                acc += coeffs[r * side + c] * unit_phase(n1 * x1 + n2 * x2);
            }
        }
        acc
    }

    fn sample_coeffs(n: u32) -> Vec<Complex64> {
        let side = box_side(n);
        (0..side * side)
            .map(|i| Complex64::new(((i * 37) % 11) as f64 - 5.0, ((i * 13) % 7) as f64 - 3.0))
            .collect()
    }

    #[test]
    fn fft_grid_matches_direct_sum() {
        for (n, m) in [(1u32, 4usize), (3, 8), (4, 7), (5, 40)] {
            let coeffs = sample_coeffs(n);
            let mut grid = TorusGrid::new(n, m).unwrap();
            let mut checked = 0;
            grid.for_each(&coeffs, |j1, j2, z| {
                let want = direct(&coeffs, n, j1 as f64 / m as f64, j2 as f64 / m as f64);
                assert!((z - want).norm() < 1e-9 * (1.0 + want.norm()), "n={n} m={m}");
                checked += 1;
            });
            assert_eq!(checked, m * m);
        }
    }

    #[test]
    fn even_sweep_covers_the_full_maximum() {
        let n = 5;
        let side = box_side(n);
        let mut coeffs = sample_coeffs(n);
        for r in 0..side {
            for c in 0..side {
                coeffs[r * side + c] = coeffs[(side - 1 - r) * side + (side - 1 - c)];
            }
        }
        for m in [40usize, 41] {
            let mut grid = TorusGrid::new(n, m).unwrap();
            let (full, _) = grid.max_abs(&coeffs, false);
            let (half, _) = grid.max_abs(&coeffs, true);
            assert!((full - half).abs() <= 1e-12 * full, "m={m}");
        }
    }

    #[test]
    fn tensor_matches_direct_sum() {
        let n = 4;
        let coeffs = sample_coeffs(n);
        let xs1 = [0.1, 0.37, 0.9];
        let xs2 = [0.0, 0.5];
        let got = eval_tensor(&coeffs, n, &xs1, &xs2);
        for (a, &x1) in xs1.iter().enumerate() {
            for (b, &x2) in xs2.iter().enumerate() {
                let want = direct(&coeffs, n, x1, x2);
                assert!((got[a * 2 + b] - want).norm() < 1e-10);
            }
        }
    }

    #[test]
    fn rejects_unresolving_grid() {
        assert!(TorusGrid::new(8, 10).is_err());
        assert!(matches!(TorusGrid::new(8, 1 << 14), Err(Error::GridTooLarge { .. })));
    }
}
