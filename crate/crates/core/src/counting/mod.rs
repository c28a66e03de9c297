//! Exact integer counting: moment-constrained tuples of lattice points, the
//! change of variables to Gram data, the closed-form pair count and its
//! brute-force oracles.

pub mod arith;
pub mod brute;
pub mod kookaburra;
pub mod omega;
pub mod pall;

use std::io::Write;

use serde::{Deserialize, Serialize};

pub use brute::{
    brute_pair_count, brute_pair_count_in, degenerate_split, r3, sphere_points, DegenerateSplit,
    PairCountRow, PairForm,
};
pub use kookaburra::{kookaburra_map, KookaburraImage};
pub use omega::{
    alternating_signs, box_points, omega_count, omega_count_naive, omega_histogram, MomentKey, OmegaCounter,
    OmegaQuery, MAX_POINTS,
};
pub use pall::{
    chi_odd_p, chi_two, factorize_query, pall_count, square_divisor_h, two_adic_solvable,
    PallFactorization, PallQuery, PrimeFactor,
};

use crate::error::Result;

/// One line of the closed-form versus brute-force comparison.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PallRow {
    pub query: PallQuery,
    pub k: i64,
    pub delta: i64,
    pub nu: u32,
    pub h: i64,
    pub pall: u64,
    pub brute: u64,
}

impl PallRow {
    pub fn matches(&self) -> bool {
        self.pall == self.brute
    }
}

/// Compares the closed form with brute force for every positive-definite
/// `(A', B', C')` with `1 <= A', B' <= bound`, in `(A', B', C')` order.
pub fn pall_sweep(bound: i64) -> Result<Vec<PallRow>> {
    use rayon::prelude::*;
    let rows: Vec<Result<Vec<PallRow>>> = (1..=bound)
        .into_par_iter()
        .map(|ap| {
            let table = PairCountRow::build(ap, bound);
            let mut out = Vec::new();
            for bp in 1..=bound {
                for cp in -table.offset..=table.offset {
                    let query = PallQuery::new(ap, bp, cp);
                    if query.determinant()? <= 0 {
                        continue;
                    }
                    let f = factorize_query(&query)?;
                    out.push(PallRow {
                        query,
                        k: f.k,
                        delta: f.delta,
                        nu: f.nu,
                        h: f.h,
                        pall: pall_count(&query)?,
                        brute: table.get(bp, cp),
                    });
                }
            }
            Ok(out)
        })
        .collect();
    let mut all = Vec::new();
    for r in rows {
        all.extend(r?);
    }
    Ok(all)
}

pub const PALL_CSV_HEADER: [&str; 10] =
    ["Ap", "Bp", "Cp", "k", "Delta", "nu", "h", "pall", "brute", "match"];

pub fn write_pall_csv<W: Write>(rows: &[PallRow], out: &mut csv::Writer<W>) -> csv::Result<()> {
    for r in rows {
        out.write_record([
            r.query.ap.to_string(),
            r.query.bp.to_string(),
            r.query.cp.to_string(),
            r.k.to_string(),
            r.delta.to_string(),
            r.nu.to_string(),
            r.h.to_string(),
            r.pall.to_string(),
            r.brute.to_string(),
            r.matches().to_string(),
        ])?;
    }
    Ok(())
}

/// Smallest `C` with `brute <= C (A' B')^eps h` over the rows.
pub fn square_divisor_constant(rows: &[PallRow], eps: f64) -> f64 {
    rows.iter()
        .map(|r| r.brute as f64 / ((r.query.ap as f64 * r.query.bp as f64).powf(eps) * r.h as f64))
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sweep_to_twenty_matches() {
        let rows = pall_sweep(20).unwrap();
        assert!(rows.iter().all(PallRow::matches));
        assert!(rows.iter().any(|r| r.pall == 0) && rows.iter().any(|r| r.pall > 0));
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(PALL_CSV_HEADER).unwrap();
        write_pall_csv(&rows[..2], &mut w).unwrap();
        let text = String::from_utf8(w.into_inner().unwrap()).unwrap();
        assert!(text.starts_with("Ap,Bp,Cp,k,Delta,nu,h,pall,brute,match\n1,1,0,1,1,0,1,24,24,true\n"));
        assert!(square_divisor_constant(&rows, 0.1) > 0.0);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(64))]

            #[test]
            fn closed_form_matches_brute_force(ap in 1i64..80, bp in 1i64..80, cp in -80i64..80) {
                let q = PallQuery::new(ap, bp, cp);
                prop_assume!(q.determinant().unwrap() > 0);
                prop_assert_eq!(pall_count(&q).unwrap(), brute_pair_count(&q).unwrap());
            }

            #[test]
            fn count_is_invariant_under_symmetries(ap in 1i64..60, bp in 1i64..60, cp in -60i64..60) {
                let q = PallQuery::new(ap, bp, cp);
                prop_assume!(q.determinant().unwrap() > 0);
                let c = pall_count(&q).unwrap();
                prop_assert_eq!(c, pall_count(&PallQuery::new(bp, ap, cp)).unwrap());
                prop_assert_eq!(c, pall_count(&PallQuery::new(ap, bp, -cp)).unwrap());
                // (k, l) -> (k, l + k) sends (A, B, C) to (A, A + B + 2C, A + C).
                if ap + bp + 2 * cp < 1000 {
                    prop_assert_eq!(c, pall_count(&PallQuery::new(ap, ap + bp + 2 * cp, ap + cp)).unwrap());
                }
            }

            #[test]
            fn omega_matches_reference(q in 1usize..4, n in 1u32..4, alt in any::<bool>(), target in prop::array::uniform5(-6i64..7)) {
                let query = if alt { OmegaQuery::alternating(q, n, target) } else { OmegaQuery::unsigned(q, n, target) };
                prop_assert_eq!(omega_count(&query).unwrap(), omega_count_naive(&query).unwrap());
            }
        }
    }
}
