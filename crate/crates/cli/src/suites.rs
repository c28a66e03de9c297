//! One runner per suite. Each builds a task list, evaluates it on the worker
//! pool, and checks the results in task order.

use rand::Rng;
use rayon::prelude::*;
use strichartz_core::counting::{
    alternating_signs, box_points, omega_count_naive, pall_sweep, square_divisor_constant, write_pall_csv,
    MomentKey, OmegaCounter, OmegaQuery, PALL_CSV_HEADER,
};
use strichartz_core::lattice_minima::{davenport_sample, write_minima_csv, BoxNormParams, MINIMA_CSV_HEADER};
use strichartz_core::propagator::{
    bump_data, exponent_fit, lp_spacetime_norm, max_time_step, min_norm_grid, refocus_search, write_strichartz_csv,
    BumpKind, StrichartzRow, STRICHARTZ_CSV_HEADER,
};
use strichartz_core::rng::{derive_indexed, derive_seed, stream};
use strichartz_core::weyl_kernel::DEFAULT_OVERSAMPLE;
use strichartz_core::{CutoffProfile, QuadForm, SweepTable};

use crate::config::{ExperimentConfig, Suite};
use crate::error::CliError;
use crate::report::{SuiteResults, Violation};

/// Slack exponent standing in for `N^eps` losses.
pub const SLACK: f64 = 0.1;
/// Slack exponent of the Davenport ratio.
pub const DAVENPORT_SLACK: f64 = 0.2;

/// Results and CSV bytes of one suite run.
pub struct SuiteOutput {
    pub results: SuiteResults,
    pub csv: Vec<u8>,
}

pub fn run_suite(config: &ExperimentConfig) -> Result<SuiteOutput, CliError> {
    match config.suite {
        Suite::KernelSweep => kernel_sweep(config),
        Suite::Minima => minima(config),
        Suite::PallVerify => pall_verify(config),
        Suite::Omega => omega(config),
        Suite::Strichartz => strichartz(config),
        Suite::Refocus => refocus(config),
    }
}

fn csv_writer(header: &[&str]) -> Result<csv::Writer<Vec<u8>>, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header)?;
    Ok(w)
}

fn finish(w: csv::Writer<Vec<u8>>) -> Result<Vec<u8>, CliError> {
    w.into_inner().map_err(|e| CliError::io("csv buffer", e.into_error()))
}

fn form_at(seed: u64, stream_name: &str, index: u64) -> Result<(u64, QuadForm), CliError> {
    let s = derive_indexed(seed, stream_name, index);
    Ok((s, QuadForm::sample_generic(s)?))
}

fn fit_into(results: &mut SuiteResults, key: String, samples: &[(f64, f64)]) {
    if let Ok(fit) = exponent_fit(samples) {
        results.fitted_exponents.insert(key, fit.slope);
    }
}

fn sorted_times(config: &ExperimentConfig) -> Vec<f64> {
    let mut ts = config.times();
    ts.sort_by(f64::total_cmp);
    ts.dedup();
    ts
}

fn kernel_sweep(config: &ExperimentConfig) -> Result<SuiteOutput, CliError> {
    let chi = CutoffProfile::new();
    let times = sorted_times(config);
    let (weyl_c, disp_c, env_c) = (
        config.tolerance("weyl_c"),
        config.tolerance("dispersive_c"),
        config.tolerance("envelope_c"),
    );
    let mut results = SuiteResults::default();
    let mut w = csv_writer(&SweepTable::CSV_HEADER)?;
    let largest = *config.n.iter().max().expect("validated nonempty");
    let mut late = Vec::new();
    for &n in &config.n {
        let nf = n as f64;
        for i in 0..config.samples as u64 {
            let (seed, form) = form_at(config.seed, "kernel-sweep.forms", i)?;
            let table = SweepTable::build(form, seed, &chi, n, &times, DEFAULT_OVERSAMPLE)?;
            table.write_csv(&mut w)?;
            for row in &table.rows {
                let (t, sup) = (row.sample.t, row.sample.sup_abs);
                let at = |check: &str| Violation::new(check, seed, n, 0.0, 0.0).at_time(t);
                let weyl = sup * sup / row.weyl_rhs;
                results.ratio("weyl", weyl);
                results.check_le(weyl, weyl_c, || at("weyl_majorant"));
                if let Some(r) = row.ratio_disp {
                    results.ratio("dispersive", r);
                    results.check_le(r, disp_c, || at("dispersive"));
                }
                if t > 1.0 / nf {
                    let env = sup / (nf.powf(4.0 / 3.0 + SLACK) * (1.0 + t * t).sqrt().powf(1.0 / 6.0));
                    results.ratio("envelope", env);
                    results.check_le(env, env_c, || at("envelope"));
                }
                if n == largest && t >= 1.0 {
                    late.push(((1.0 + t * t).sqrt(), sup));
                }
            }
        }
    }
    fit_into(&mut results, format!("sup_t_exponent_N{largest}"), &late);
    Ok(SuiteOutput {
        results,
        csv: finish(w)?,
    })
}

fn minima(config: &ExperimentConfig) -> Result<SuiteOutput, CliError> {
    let chi = CutoffProfile::new();
    let mut times = stream(config.seed, "minima.times");
    let mut tasks = Vec::new();
    let mut index = 0;
    for &n in &config.n {
        for _ in 0..config.samples {
            let (_, form) = form_at(config.seed, "minima.forms", index)?;
            let t = config.t_max * (1.0 - times.gen::<f64>());
            tasks.push(BoxNormParams::new(form, n, t)?);
            index += 1;
        }
    }
    let samples = tasks
        .par_iter()
        .map(|p| davenport_sample(p, &chi, DEFAULT_OVERSAMPLE))
        .collect::<Result<Vec<_>, _>>()?;
    let limit = config.tolerance("davenport_c");
    let mut results = SuiteResults::default();
    let mut worst_per_n = Vec::new();
    for &n in &config.n {
        let worst = samples
            .iter()
            .filter(|s| s.params.n == n)
            .map(|s| s.ratio)
            .fold(0.0, f64::max);
        worst_per_n.push((n as f64, worst));
    }
    for s in &samples {
        let scaled = s.ratio / (s.params.n as f64).powf(DAVENPORT_SLACK);
        results.ratio("davenport", scaled);
        let seed = s.params.form.seed().unwrap_or_default();
        results.check_le(scaled, limit, || {
            Violation::new("davenport", seed, s.params.n, 0.0, 0.0).at_time(s.params.t)
        });
    }
    fit_into(&mut results, "davenport_N_exponent".to_string(), &worst_per_n);
    let mut w = csv_writer(&MINIMA_CSV_HEADER)?;
    write_minima_csv(&samples, &mut w)?;
    Ok(SuiteOutput {
        results,
        csv: finish(w)?,
    })
}

fn pall_verify(config: &ExperimentConfig) -> Result<SuiteOutput, CliError> {
    let rows = pall_sweep(config.bound)?;
    let mut results = SuiteResults::default();
    for r in &rows {
        results.checks += 1;
        if !r.matches() {
            let q = r.query;
            results.violations.push(Violation::for_query(
                "pall_mismatch",
                config.seed,
                [q.ap, q.bp, q.cp],
                r.pall as f64,
                r.brute as f64,
            ));
        }
    }
    let mismatches = results.violations.len();
    results.notes.push(if mismatches == 0 {
        format!("matches: all ({} queries)", rows.len())
    } else {
        format!("matches: {} of {}", rows.len() - mismatches, rows.len())
    });
    let c = square_divisor_constant(&rows, SLACK);
    results.ratio("square_divisor", c);
    results.check_le(c, config.tolerance("square_divisor_c"), || {
        Violation::global("square_divisor", config.seed, 0.0, 0.0)
    });
    let mut w = csv_writer(&PALL_CSV_HEADER)?;
    write_pall_csv(&rows, &mut w)?;
    Ok(SuiteOutput {
        results,
        csv: finish(w)?,
    })
}

/// Moment sums of a random tuple; every third target is shifted so that
/// unreachable keys are exercised too.
fn random_target(rng: &mut impl Rng, points: &[(i64, i64)], signs: &[i8], index: usize) -> MomentKey {
    let mut acc = [0i64; 5];
    for &s in signs {
        let (k, l) = points[rng.gen_range(0..points.len())];
        let s = s as i64;
        for (slot, v) in acc.iter_mut().zip([s * k, s * l, s * k * k, s * l * l, s * k * l]) {
            *slot += v;
        }
    }
    if index % 3 == 2 {
        acc[rng.gen_range(0..5)] += rng.gen_range(1..=3);
    }
    acc
}

fn omega(config: &ExperimentConfig) -> Result<SuiteOutput, CliError> {
    let mut rng = stream(config.seed, "omega.targets");
    let mut queries = Vec::new();
    for &q in &config.q {
        for &n in &config.n {
            let points = box_points(n);
            for signs in [vec![1i8; q], alternating_signs(q)] {
                for i in 0..config.samples {
                    let target = random_target(&mut rng, &points, &signs, i);
                    queries.push(OmegaQuery {
                        q,
                        n,
                        signs: signs.clone(),
                        target,
                    });
                }
            }
        }
    }
    let counts = queries
        .par_chunks(config.samples)
        .map(|group| {
            let counter = OmegaCounter::new(group[0].q, group[0].n, &group[0].signs)?;
            group
                .iter()
                .map(|query| Ok((counter.count(&query.target), omega_count_naive(query)?)))
                .collect::<Result<Vec<_>, strichartz_core::Error>>()
        })
        .collect::<Result<Vec<_>, _>>()?
        .concat();
    let mut results = SuiteResults::default();
    // Trend only: growth of the largest alternating-sign count. For even q
    // both halves carry the same signs, so by Cauchy-Schwarz it sits at the
    // zero target.
    for &q in config.q.iter().filter(|&&q| q % 2 == 0) {
        let maxima = config
            .n
            .iter()
            .map(|&n| Ok((n as f64, OmegaCounter::new(q, n, &alternating_signs(q))?.count(&[0; 5]) as f64)))
            .collect::<Result<Vec<_>, CliError>>()?;
        fit_into(&mut results, format!("alternating_max_N_exponent_q{q}"), &maxima);
    }
    let mut w = csv_writer(&["q", "N", "signs", "a", "b", "A", "B", "C", "mitm", "naive"])?;
    for (query, &(mitm, naive)) in queries.iter().zip(&counts) {
        results.checks += 1;
        let signs: String = query.signs.iter().map(|&s| if s > 0 { '+' } else { '-' }).collect();
        if mitm != naive {
            let mut v = Violation::new(
                &format!("omega_mismatch q={} signs={signs} target={:?}", query.q, query.target),
                config.seed,
                query.n,
                mitm as f64,
                naive as f64,
            );
            v.p = Some(2.0 * query.q as f64);
            results.violations.push(v);
        }
        let mut record = vec![query.q.to_string(), query.n.to_string(), signs];
        record.extend(query.target.iter().map(|x| x.to_string()));
        record.extend([mitm.to_string(), naive.to_string()]);
        w.write_record(&record)?;
    }
    Ok(SuiteOutput {
        results,
        csv: finish(w)?,
    })
}

fn strichartz(config: &ExperimentConfig) -> Result<SuiteOutput, CliError> {
    let form_seed = derive_seed(config.seed, "strichartz.form");
    let form = QuadForm::sample_generic(form_seed)?;
    let durations = sorted_times(config);
    let limit = config.tolerance("ratio_c");
    let mut results = SuiteResults::default();
    let mut rows = Vec::new();
    for &p in &config.p {
        for &t_end in &durations {
            let mut scaling = Vec::new();
            for &n in &config.n {
                let f = bump_data(n, BumpKind::IndicatorBall)?;
                let norm = lp_spacetime_norm(&form, &f, p, t_end, min_norm_grid(n), max_time_step(&form, n))?;
                let row = StrichartzRow::new(form_seed, &f, &norm)?;
                scaling.push((n as f64, norm.value / f.l2_norm()));
                results.ratio("conjecture", row.ratio);
                results.check_le(row.ratio, limit, || {
                    Violation::new("strichartz_ratio", form_seed, n, 0.0, 0.0).at_exponent(p, t_end)
                });
                rows.push(row);
            }
            fit_into(&mut results, format!("N_exponent_p{p}_T{t_end}"), &scaling);
        }
    }
    let mut w = csv_writer(&STRICHARTZ_CSV_HEADER)?;
    write_strichartz_csv(&rows, &mut w)?;
    Ok(SuiteOutput {
        results,
        csv: finish(w)?,
    })
}

fn refocus(config: &ExperimentConfig) -> Result<SuiteOutput, CliError> {
    let forms = (0..config.samples as u64)
        .map(|i| form_at(config.seed, "refocus.forms", i))
        .collect::<Result<Vec<_>, _>>()?;
    let tasks: Vec<_> = config
        .n
        .iter()
        .flat_map(|&n| forms.iter().map(move |&(seed, form)| (seed, form, n)))
        .collect();
    let found = tasks
        .par_iter()
        .map(|&(_, form, n)| refocus_search(&form, n, config.q_max))
        .collect::<Result<Vec<_>, _>>()?;
    let mut results = SuiteResults::default();
    let mut w = csv_writer(&["seed", "N", "q", "worst", "found"])?;
    for (&(seed, _, n), r) in tasks.iter().zip(&found) {
        results.checks += 1;
        if !r.found {
            results.violations.push(Violation::new(
                "refocus_not_found",
                seed,
                n,
                r.worst,
                1.0 / (n as f64 * n as f64),
            ));
        }
        w.write_record([seed.to_string(), n.to_string(), r.q.to_string(), format!("{:e}", r.worst), r.found.to_string()])?;
    }
    let mut medians = Vec::new();
    for &n in &config.n {
        let mut qs: Vec<u64> = tasks
            .iter()
            .zip(&found)
            .filter(|((_, _, m), _)| *m == n)
            .map(|(_, r)| r.q)
            .collect();
        qs.sort_unstable();
        let mid = qs.len() / 2;
        let median = if qs.len() % 2 == 0 {
            (qs[mid - 1] + qs[mid]) as f64 / 2.0
        } else {
            qs[mid] as f64
        };
        results.notes.push(format!("N={n}: median q = {median}"));
        medians.push((n as f64, median));
    }
    if let Ok(fit) = exponent_fit(&medians) {
        results.fitted_exponents.insert("median_q_N_exponent".to_string(), fit.slope);
        let (lo, hi) = (config.tolerance("exponent_lo"), config.tolerance("exponent_hi"));
        results.checks += 1;
        if !(lo..=hi).contains(&fit.slope) {
            let limit = if fit.slope < lo { lo } else { hi };
            results
                .violations
                .push(Violation::global("refocus_exponent", config.seed, fit.slope, limit));
        }
    }
    Ok(SuiteOutput {
        results,
        csv: finish(w)?,
    })
}
