//! Smooth even cutoff: one on `[-1/2, 1/2]`, zero outside `(-1, 1)`.

/// Number of table intervals covering `|x|` in `[0, 1]`.
pub const TABLE_INTERVALS: usize = 4096;

/// Bump built from `exp(-1/s)` glue on `1/2 < |x| < 1`, frozen as a table.
///
/// Evaluation goes through the table with cubic (Catmull-Rom) interpolation
/// so that every platform sums identical coefficients; at table nodes, which
/// include every `n / N` with `N` a power of two up to 4096, the value is the
/// tabulated one exactly.
#[derive(Clone, Debug)]
pub struct CutoffProfile {
    table: Vec<f64>,
}

impl Default for CutoffProfile {
    fn default() -> Self {
        Self::new()
    }
}

fn glue(u: f64) -> f64 {
    if u <= 0.0 {
        0.0
    } else {
        (-1.0 / u).exp()
    }
}

impl CutoffProfile {
    pub fn new() -> Self {
        let table = (0..=TABLE_INTERVALS)
            .map(|i| Self::closed_form(i as f64 / TABLE_INTERVALS as f64))
            .collect();
        CutoffProfile { table }
    }

    /// The exact rule the table was built from.
    pub fn closed_form(x: f64) -> f64 {
        let a = x.abs();
        if a <= 0.5 {
            1.0
        } else if a >= 1.0 {
            0.0
        } else {
            let s = 2.0 * a - 1.0;
            let (g0, g1) = (glue(1.0 - s), glue(s));
            g0 / (g0 + g1)
        }
    }

    pub fn table(&self) -> &[f64] {
        &self.table
    }

    /// Table lookup with cubic interpolation, clamped to `[0, 1]`.
    pub fn eval(&self, x: f64) -> f64 {
        let a = x.abs();
        if a <= 0.5 {
            return 1.0;
        }
        if a >= 1.0 {
            return 0.0;
        }
        let pos = a * TABLE_INTERVALS as f64;
        let i = pos.floor() as usize;
        let u = pos - i as f64;
        if u == 0.0 {
            return self.table[i];
        }
        let at = |j: isize| -> f64 {
            let j = j.clamp(0, TABLE_INTERVALS as isize) as usize;
            self.table[j]
        };
        let i = i as isize;
        let (p0, p1, p2, p3) = (at(i - 1), at(i), at(i + 1), at(i + 2));
        let v = p1
            + 0.5
                * u
                * (p2 - p0
                    + u * (2.0 * p0 - 5.0 * p1 + 4.0 * p2 - p3 + u * (3.0 * (p1 - p2) + p3 - p0)));
        v.clamp(0.0, 1.0)
    }

    /// `sum_{|n| < N} chi(n / N)`.
    pub fn lattice_sum(&self, n: u32) -> f64 {
        let nn = n as i64;
        (-(nn - 1)..nn).map(|k| self.eval(k as f64 / n as f64)).sum()
    }

    /// Weights `chi(n / N)` for `n = -(N-1) ..= N-1`.
    pub fn weights(&self, n: u32) -> Vec<f64> {
        let nn = n as i64;
        (-(nn - 1)..nn).map(|k| self.eval(k as f64 / n as f64)).collect()
    }
}
