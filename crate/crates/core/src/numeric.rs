//! Small numeric helpers shared by the kernel and propagator code.

/// Nearest integer with ties resolved deterministically upward.
///
/// Values within `1e-12` of a half-integer are treated as lying exactly on
/// it and rounded up, so callers on different platforms agree.
pub fn nearest_int(x: f64) -> f64 {
    let fl = x.floor();
    let frac = x - fl;
    if (frac - 0.5).abs() <= 1e-12 || frac > 0.5 {
        fl + 1.0
    } else {
        fl
    }
}

/// Distance from `x` to the nearest integer, in `[0, 1/2]`.
pub fn dist_to_int(x: f64) -> f64 {
    (x - nearest_int(x)).abs().min(0.5)
}

/// Fractional part in `[0, 1)`, used to reduce phases before `sin_cos`.
pub(crate) fn frac(x: f64) -> f64 {
    let f = x - x.floor();
    if f >= 1.0 {
        0.0
    } else {
        f
    }
}

/// Pairwise (cascade) summation; the result depends only on the order of
/// `values`, never on thread scheduling.
pub fn pairwise_sum(values: &[f64]) -> f64 {
    const LEAF: usize = 64;
    if values.len() <= LEAF {
        return values.iter().sum();
    }
    let mid = values.len() / 2;
    pairwise_sum(&values[..mid]) + pairwise_sum(&values[mid..])
}

/// `n` points log-uniformly spaced on `[lo, hi]`, endpoints included.
pub fn log_space(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    assert!(lo > 0.0 && hi >= lo);
    match n {
        0 => vec![],
        1 => vec![lo],
        _ => {
            let (a, b) = (lo.ln(), hi.ln());
            (0..n)
                .map(|i| {
                    if i == 0 {
                        lo
                    } else if i == n - 1 {
                        hi
                    } else {
                        (a + (b - a) * i as f64 / (n - 1) as f64).exp()
                    }
                })
                .collect()
        }
    }
}
