//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Runs as a plain binary (`harness = false`) so the lines always reach the
//! test log. Exits non-zero when any criterion fails.

mod common;

use std::time::{Duration, Instant};

use common::*;
use lateration_stress::anchored::{anchored_stress, verify_anchored_stress};
use lateration_stress::cli::{cmd_certify, GlobalArgs};
use lateration_stress::framework::{write_instance, Framework, Instance};
use lateration_stress::generate::{generate_framework, generate_network, Attachment, GenConfig};
use lateration_stress::numerics::{psd_and_rank, Backend, Matrix, Rational, Scalar, Tolerances};
use lateration_stress::sdp::{check_certificate, export_realization_sdp, parse_sdpa, write_sdpa, ExportOptions};
use lateration_stress::stress::{
    compute_stress_matrix, pre_stress, verify_stress, ColumnOutcome, LaterationContext, StepAction, StepRecord,
    StressError, StressOptions,
};
use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Matching bound for printed 4-decimal tables on the float backend.
const MATCH_TOL: f64 = 1e-4;
/// Largest entry of a rank-one update the rational suites will carry.
const GROWTH_LIMIT_BITS: u64 = 4096;
/// Wall-clock allowance for each of the two randomized rational suites.
const SUITE_BUDGET: Duration = Duration::from_secs(90);

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: impl Into<String>) -> Outcome {
    Outcome { passed, detail: detail.into() }
}

fn main() {
    type Criterion = (&'static str, fn() -> Outcome);
    let criteria: [Criterion; 9] = [
        ("golden example 1", golden_first),
        ("golden example 2", golden_second),
        ("purification step invariants", step_invariants),
        ("end-to-end stress verification", end_to_end),
        ("anchored end-to-end", anchored_end_to_end),
        ("(d+1)-tree prediction", tree_prediction),
        ("float complexity smoke test", complexity),
        ("negative tests", negatives),
        ("SDP export and certificate", sdp_export),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let result = std::panic::catch_unwind(check).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            outcome(false, format!("panicked: {msg}"))
        });
        if !result.passed {
            failed += 1;
        }
        println!(
            "criterion {}: {} [{name}] {} ({:.1}s)",
            i + 1,
            if result.passed { "PASS" } else { "FAIL" },
            result.detail,
            start.elapsed().as_secs_f64()
        );
    }
    println!("acceptance: {} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}

fn first_example<T: Scalar>() -> Result<(), String> {
    let f = fixture("ex1.json");
    let ctx = LaterationContext::<T>::new(&f, &StressOptions::default()).map_err(|e| e.to_string())?;
    let l = ctx.gale_matrix().map_err(|e| e.to_string())?;
    compare(&l, EX1_L, Printed::Exact, MATCH_TOL).map_err(|e| format!("L {e}"))?;
    compare(&pre_stress(&l), EX1_S7, Printed::Exact, MATCH_TOL).map_err(|e| format!("S7 {e}"))?;
    let out = compute_stress_matrix::<T>(&f, &StressOptions::default()).map_err(|e| e.to_string())?;
    if out.trace.modifications() != 0 {
        return Err(format!("{} modifications", out.trace.modifications()));
    }
    compare(&out.stress, EX1_S7, Printed::Exact, MATCH_TOL).map_err(|e| format!("final {e}"))
}

fn status(r: &Result<(), String>, ok: &str) -> String {
    match r {
        Ok(()) => ok.to_string(),
        Err(e) => format!("mismatch: {e}"),
    }
}

fn golden_first() -> Outcome {
    let start = Instant::now();
    let exact = first_example::<Rational>();
    let elapsed = start.elapsed();
    let float = first_example::<f64>();
    let fast = elapsed < Duration::from_secs(1);
    outcome(
        exact.is_ok() && float.is_ok() && fast,
        format!(
            "rational: {}; float: {}; rational pipeline {:.3}s (< 1s)",
            status(&exact, "L and S7 exact, zero modifications"),
            status(&float, "within 1e-4, zero modifications"),
            elapsed.as_secs_f64()
        ),
    )
}

fn second_example<T: Scalar>() -> Result<(), String> {
    let f = fixture("ex2.json");
    let e = |e: StressError| e.to_string();
    let ctx = LaterationContext::<T>::new(&f, &StressOptions::default()).map_err(e)?;
    let mut s = pre_stress(&ctx.gale_matrix().map_err(e)?);
    compare(&s, EX2_S7, Printed::Exact, MATCH_TOL).map_err(|e| format!("S7 {e}"))?;
    if ctx.purify_column(&mut s, 6, true).map_err(e)? != ColumnOutcome::Skipped {
        return Err("position 7 was not skipped".into());
    }
    let ColumnOutcome::Modified { s: s6 } = ctx.purify_column(&mut s, 5, true).map_err(e)? else {
        return Err("position 6 was skipped".into());
    };
    compare_vec(&s6, EX2_S6_VEC, Printed::Exact, MATCH_TOL).map_err(|e| format!("s6 {e}"))?;
    compare(&s, EX2_S5, Printed::Rounded, MATCH_TOL).map_err(|e| format!("S5 {e}"))?;
    let ColumnOutcome::Modified { s: s5 } = ctx.purify_column(&mut s, 4, true).map_err(e)? else {
        return Err("position 5 was skipped".into());
    };
    compare_vec(&s5, EX2_S5_VEC, Printed::Rounded, MATCH_TOL).map_err(|e| format!("s5 {e}"))?;
    compare(&s, EX2_S4, Printed::Rounded, MATCH_TOL).map_err(|e| format!("S4 {e}"))?;
    let out = compute_stress_matrix::<T>(&f, &StressOptions::default()).map_err(e)?;
    let expected = vec![(7, StepAction::Skip), (6, StepAction::Modify), (5, StepAction::Modify)];
    if out.trace.summary() != expected {
        return Err(format!("trace {:?}", out.trace.summary()));
    }
    Ok(())
}

fn golden_second() -> Outcome {
    let exact = second_example::<Rational>();
    let float = second_example::<f64>();
    outcome(
        exact.is_ok() && float.is_ok(),
        format!(
            "rational: {}; float: {}",
            status(&exact, "S7 s6 exact, S5 s5 S4 equal to the print after rounding, trace [skip 7, modify 6, modify 5]"),
            status(&float, "within 1e-4, same trace")
        ),
    )
}

/// The 200 seeded instances shared by the two randomized framework suites,
/// smallest first.
fn random_instances() -> Vec<GenConfig> {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut list: Vec<GenConfig> = (0..200u64)
        .map(|i| {
            let d = rng.random_range(1..=3usize);
            let n = rng.random_range(d + 2..=40usize);
            GenConfig::new(d, n, i)
        })
        .collect();
    list.sort_by_key(|c| (c.n, c.dim, c.seed));
    list
}

fn guarded() -> StressOptions {
    StressOptions {
        max_entry_bits: Some(GROWTH_LIMIT_BITS),
        ..StressOptions::default()
    }
}

#[derive(Default)]
struct Tally {
    passed: usize,
    violated: Vec<String>,
    growth: usize,
    other: Vec<String>,
    unfinished: usize,
    largest_passed: Option<(usize, usize)>,
}

impl Tally {
    fn summary(&self, total: usize) -> String {
        let mut parts = vec![format!("{}/{total} instances pass", self.passed)];
        if !self.violated.is_empty() {
            parts.push(format!("{} invariant violations (first: {})", self.violated.len(), self.violated[0]));
        }
        if self.growth > 0 {
            parts.push(format!("{} stopped at the {GROWTH_LIMIT_BITS}-bit entry guard", self.growth));
        }
        if !self.other.is_empty() {
            parts.push(format!("{} errors (first: {})", self.other.len(), self.other[0]));
        }
        if self.unfinished > 0 {
            parts.push(format!("{} not reached within {}s", self.unfinished, SUITE_BUDGET.as_secs()));
        }
        if let Some((d, n)) = self.largest_passed {
            parts.push(format!("largest passing n = {n} (d = {d})"));
        }
        parts.join("; ")
    }

    fn record_pass(&mut self, cfg: &GenConfig) {
        self.passed += 1;
        if self.largest_passed.is_none_or(|(_, n)| cfg.n >= n) {
            self.largest_passed = Some((cfg.dim, cfg.n));
        }
    }

    fn record_error(&mut self, cfg: &GenConfig, e: StressError) {
        match e {
            StressError::GrowthLimit { .. } => self.growth += 1,
            other => self.other.push(format!("d={} n={} seed={}: {other}", cfg.dim, cfg.n, cfg.seed)),
        }
    }
}

fn product_is_zero(a: &Matrix<Rational>, s: &Matrix<Rational>) -> bool {
    a.matmul(s).unwrap().as_slice().iter().all(Zero::is_zero)
}

fn step_invariants() -> Outcome {
    let instances = random_instances();
    let deadline = Instant::now() + SUITE_BUDGET;
    let mut tally = Tally::default();
    for cfg in &instances {
        if Instant::now() >= deadline {
            tally.unfinished += 1;
            continue;
        }
        let f = generate_framework(cfg).unwrap();
        let (n, d) = (f.len(), f.dim());
        let opts = guarded();
        let tol = opts.tol;
        let run = || -> Result<Vec<usize>, StressError> {
            let ctx = LaterationContext::<Rational>::new(&f, &opts)?;
            let a = ctx.extended().clone();
            let mut bad = Vec::new();
            let mut observer = |rec: &StepRecord<Rational>, s: &Matrix<Rational>| {
                let clean = (rec.position..n).all(|j| (0..j).all(|i| ctx.has_edge(i, j) || s[(i, j)].is_zero()));
                let ok = clean
                    && product_is_zero(&a, s)
                    && psd_and_rank(s, &tol).is_ok_and(|(psd, rank)| psd.psd && rank == n - d - 1);
                if !ok {
                    bad.push(rec.position + 1);
                }
            };
            ctx.purify(pre_stress(&ctx.gale_matrix()?), &opts, Some(&mut observer))?;
            Ok(bad)
        };
        match run() {
            Ok(bad) if bad.is_empty() => tally.record_pass(cfg),
            Ok(bad) => tally
                .violated
                .push(format!("d={} n={} seed={} positions {bad:?}", cfg.dim, cfg.n, cfg.seed)),
            Err(e) => tally.record_error(cfg, e),
        }
    }
    outcome(tally.passed == instances.len(), tally.summary(instances.len()))
}

fn end_to_end() -> Outcome {
    let instances = random_instances();
    let deadline = Instant::now() + SUITE_BUDGET;
    let mut tally = Tally::default();
    for cfg in &instances {
        if Instant::now() >= deadline {
            tally.unfinished += 1;
            continue;
        }
        let f = generate_framework(cfg).unwrap();
        let opts = StressOptions { verify: false, ..guarded() };
        match compute_stress_matrix::<Rational>(&f, &opts)
            .and_then(|out| verify_stress(&out.stress, &f, &Tolerances::default()))
        {
            Ok(r) if r.passed() => tally.record_pass(cfg),
            Ok(r) => tally
                .violated
                .push(format!("d={} n={} seed={}: {}", cfg.dim, cfg.n, cfg.seed, r.describe_failures())),
            Err(e) => tally.record_error(cfg, e),
        }
    }
    outcome(tally.passed == instances.len(), tally.summary(instances.len()))
}

fn anchored_end_to_end() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut failures = Vec::new();
    let mut sizes = std::collections::BTreeSet::new();
    for i in 0..100u64 {
        let d = rng.random_range(1..=3usize);
        let m = d + rng.random_range(1..=3usize);
        let n = rng.random_range(1..=8usize);
        sizes.insert(n);
        let net = generate_network(&GenConfig::anchored(d, m, n, i)).unwrap();
        let verdict = anchored_stress::<Rational>(&net, &StressOptions::default())
            .and_then(|out| verify_anchored_stress(&out.matrix, &net, &Tolerances::default()));
        match verdict {
            Ok(r) if r.passed() && r.rank == n && r.gap == Some(0.0) => {}
            Ok(r) => failures.push(format!("d={d} m={m} n={n} seed={i}: {}", r.describe_failures())),
            Err(e) => failures.push(format!("d={d} m={m} n={n} seed={i}: {e}")),
        }
    }
    outcome(
        failures.is_empty(),
        format!(
            "{}/100 networks (m = d+1..d+3, {} to {} sensors) pass all six checks with rank n and exact zero gap{}",
            100 - failures.len(),
            sizes.first().unwrap(),
            sizes.last().unwrap(),
            failures.first().map(|f| format!("; first failure {f}")).unwrap_or_default()
        ),
    )
}

fn tree_prediction() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut bad = Vec::new();
    for i in 0..100u64 {
        let d = rng.random_range(1..=3usize);
        let n = rng.random_range(d + 2..=40usize);
        let f = generate_framework(&GenConfig::new(d, n, i).with_attachment(Attachment::Tree)).unwrap();
        let opts = StressOptions { verify: false, ..StressOptions::default() };
        match compute_stress_matrix::<Rational>(&f, &opts) {
            Ok(out) if out.is_dplus1_tree && out.trace.modifications() == 0 => {}
            Ok(out) => bad.push(format!(
                "seed {i}: tree={} modifications={}",
                out.is_dplus1_tree,
                out.trace.modifications()
            )),
            Err(e) => bad.push(format!("seed {i}: {e}")),
        }
    }
    outcome(
        bad.is_empty(),
        format!(
            "{}/100 tree instances (d 1..3, n up to 40) need zero modifications{}",
            100 - bad.len(),
            bad.first().map(|b| format!("; first failure {b}")).unwrap_or_default()
        ),
    )
}

/// Seconds for one float certify through the command layer, and its exit code.
fn time_certify(n: usize, dir: &std::path::Path) -> (f64, u8) {
    let f = generate_framework(&GenConfig::new(3, n, 1).with_attachment(Attachment::Tree)).unwrap();
    let input = dir.join(format!("tree{n}.json"));
    std::fs::write(&input, write_instance(&Instance::Framework(f))).unwrap();
    let global = GlobalArgs {
        backend: Some(Backend::Float),
        tol_solve: None,
        tol_rank: None,
        tol_psd: None,
        tol_sym: None,
        tol_match: None,
        no_skip: false,
        full_gp_scan: false,
        order: None,
        max_bits: None,
        search_budget: lateration_stress::graph::DEFAULT_SEARCH_BUDGET,
    };
    let mut sink = Vec::new();
    let start = Instant::now();
    let code = cmd_certify(&global, &input, dir, &mut sink).unwrap_or_else(|f| f.code);
    (start.elapsed().as_secs_f64(), code)
}

fn complexity() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let median = |n: usize| {
        let mut runs: Vec<(f64, u8)> = (0..3).map(|_| time_certify(n, dir.path())).collect();
        runs.sort_by(|a, b| a.0.total_cmp(&b.0));
        runs[1]
    };
    let (t500, c500) = time_certify(500, dir.path());
    let timed: Vec<(usize, f64, u8)> = [100, 200, 400]
        .into_iter()
        .map(|n| {
            let (t, c) = median(n);
            (n, t.max(1e-3), c)
        })
        .collect();
    let mut scaling_ok = true;
    for w in timed.windows(2) {
        let (n0, t0, _) = w[0];
        let (n1, t1, _) = w[1];
        let bound = 2.0 * (n1 as f64 / n0 as f64).powi(3);
        scaling_ok &= t1 / t0 <= bound;
    }
    let overall = timed[2].1 / timed[0].1;
    scaling_ok &= overall <= 2.0 * 64.0;
    let exits: Vec<String> = timed.iter().map(|(n, _, c)| format!("n={n}: {c}")).collect();
    outcome(
        t500 <= 60.0 && scaling_ok,
        format!(
            "d=3 tree instances: n=500 in {t500:.2}s (<= 60s); times {} s; t(400)/t(100) = {overall:.1} (<= 128); \
             exit codes n=500: {c500}, {}",
            timed.iter().map(|(n, t, _)| format!("{n}:{t:.3}")).collect::<Vec<_>>().join(" "),
            exits.join(" ")
        ),
    )
}

fn negatives() -> Outcome {
    let mut notes = Vec::new();
    let mut ok = true;

    // K4 minus an edge has no lateration ordering in the plane beyond its
    // seed triangle: the fourth vertex sees only two others.
    let p = int_matrix(&[&[0, 1, 0, 1], &[0, 0, 1, 1]]);
    let f = Framework::new(p, vec![(0, 1), (0, 2), (1, 2), (1, 3), (2, 3)], None).unwrap();
    let nf = matches!(compute_stress_matrix::<Rational>(&f, &StressOptions::default()), Err(StressError::NotFound));
    ok &= nf;
    notes.push(format!("non-lateration graph -> NotFound: {nf}"));

    let p = int_matrix(&[&[0, 1, 0, 2, 3], &[0, 0, 1, 0, 5]]);
    let edges = vec![(0, 1), (0, 2), (1, 2), (0, 3), (1, 3), (2, 3), (0, 4), (1, 4), (3, 4)];
    let f = Framework::new(p, edges, None).unwrap();
    let singular = match compute_stress_matrix::<Rational>(&f, &StressOptions::default()) {
        Err(StressError::Singular { subset, .. }) => subset == vec![1, 2, 4],
        _ => false,
    };
    ok &= singular;
    notes.push(format!("collinear triple -> Singular naming [1, 2, 4]: {singular}"));

    let f = fixture("ex2.json");
    let s = compute_stress_matrix::<Rational>(&f, &StressOptions::default()).unwrap().stress;
    let tol = Tolerances::default();
    let negated = verify_stress(&s.scale(&Rational::from_i64(-1)), &f, &tol).unwrap();
    let psd_only = !negated.psd_ok
        && negated.symmetric_ok
        && negated.null_ok
        && negated.offedge_ok
        && negated.rank_ok
        && negated.dual_objective_ok;
    ok &= psd_only;
    notes.push(format!("negated stress fails psd only: {psd_only}"));

    // Add v v^T with A v = 0 and v supported on the non-edge (1, 6).
    let a = f.extended_matrix::<Rational>();
    let basis = [1usize, 2, 3];
    let rhs: Vec<Rational> = (0..3).map(|r| -(a[(r, 0)].clone() + &a[(r, 5)])).collect();
    let x = lateration_stress::numerics::solve_square(&a.select_columns(&basis), &rhs, &tol).unwrap();
    let mut v = vec![Rational::zero(); 7];
    v[0] = Rational::from_i64(1);
    v[5] = Rational::from_i64(1);
    for (&b, xb) in basis.iter().zip(x) {
        v[b] = xb;
    }
    let mut bumped = s.clone();
    bumped.add_outer_self(&v);
    let r = verify_stress(&bumped, &f, &tol).unwrap();
    let offedge = !r.offedge_ok && r.first_offedge == Some((1, 6)) && r.null_ok && r.psd_ok && r.rank_ok;
    ok &= offedge;
    notes.push(format!("null-space bump on (1, 6) fails offedge at (1, 6): {offedge}"));

    let mut problem = export_realization_sdp(&fixture("ex1.json"), &ExportOptions::default()).unwrap();
    problem.rhs[4] += Rational::from_i64(1);
    let f1 = fixture("ex1.json");
    let a1 = f1.extended_matrix::<Rational>();
    let y = a1.transpose().matmul(&a1).unwrap();
    let s1 = compute_stress_matrix::<Rational>(&f1, &StressOptions::default()).unwrap().stress;
    let c = check_certificate(&y, &s1, &problem, &tol).unwrap();
    let feas = !c.primal_feasible && c.first_violated == Some(5) && c.dual_psd && c.complementarity_ok;
    ok &= feas;
    notes.push(format!("distance off by 1 flags constraint 5 only: {feas}"));

    outcome(ok, notes.join("; "))
}

fn sdp_export() -> Outcome {
    let f = fixture("ex1.json");
    let problem = export_realization_sdp(&f, &ExportOptions::default()).unwrap();
    let lossless = parse_sdpa(&write_sdpa(&problem, "example 1")).map(|p| p == problem).unwrap_or(false);
    let a = f.extended_matrix::<Rational>();
    let y = a.transpose().matmul(&a).unwrap();
    let ctx = LaterationContext::<Rational>::new(&f, &StressOptions::default()).unwrap();
    let s7 = ctx.to_vertex_space(&pre_stress(&ctx.gale_matrix().unwrap()));
    let printed = compare(&s7, EX1_S7, Printed::Exact, MATCH_TOL).is_ok();
    let r = check_certificate(&y, &s7, &problem, &Tolerances::default()).unwrap();
    let ok = lossless
        && printed
        && problem.constraint_count() == 15
        && r.primal_feasible
        && r.dual_psd
        && r.complementarity_ok
        && r.primal_rank == 3
        && r.dual_rank == 4
        && r.strict_complementarity_ok;
    outcome(
        ok,
        format!(
            "{} constraints, lossless round trip: {lossless}; feasible: {}, Y.S = {}, ranks {} + {} = {}",
            problem.constraint_count(),
            r.primal_feasible,
            r.inner_product,
            r.primal_rank,
            r.dual_rank,
            r.primal_rank + r.dual_rank
        ),
    )
}
