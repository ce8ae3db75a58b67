//! Acceptance gate. Each test prints one `PASS`/`FAIL` line and asserts.

use std::io::Write;
use std::time::Instant;

use pho_core::model::{Exponent, ScalarPH};
use pho_core::ph::{eval_dual_ph, oracle_dual_ph, pnorm};
use pho_core::sampling::{self, sub_seed};
use pho_core::verify::{self, ExampleParams};

const SEED: u64 = 20_240_917;

/// Relative agreement between the closed-form dual and the search oracle.
const ORACLE_REL_TOL: f64 = 0.02;
/// The closed form may undershoot the oracle by at most this much.
const ORACLE_ABS_SLACK: f64 = 1e-9;
const ORACLE_BUDGET: usize = 100_000;

fn report(id: u8, name: &str, ok: bool, detail: String, started: Instant) {
    let verdict = if ok { "PASS" } else { "FAIL" };
    let _ = writeln!(
        std::io::stderr(),
        "criterion {id} [{name}]: {verdict} ({detail}; {:.1}s)",
        started.elapsed().as_secs_f64()
    );
}

#[test]
fn criterion_1_dual_norm_calculus() {
    let t = Instant::now();
    let exps = [0.5, 0.7, 1.0, 1.5, 2.0, 3.0, f64::INFINITY];
    let mut rng = sampling::rng(SEED);
    let (mut cases, mut failures, mut worst_rel, mut low_p_exact) = (0, Vec::new(), 0.0f64, true);
    for (ei, &p) in exps.iter().enumerate() {
        let exponent = if p.is_infinite() { Exponent::Infinity } else { Exponent::Finite(p) };
        for dim in 1..=4 {
            let func = ScalarPH::pnorm(exponent, dim);
            for trial in 0..4 {
                let y = sampling::normal_vector(&mut rng, dim);
                let closed = eval_dual_ph(&func, y.as_slice()).unwrap();
                let seed = sub_seed(SEED, (ei * 100 + dim * 10 + trial) as u64);
                let oracle = oracle_dual_ph(&func, y.as_slice(), ORACLE_BUDGET, seed).unwrap();
                let rel = (closed - oracle).abs() / oracle.abs().max(1e-300);
                worst_rel = worst_rel.max(rel);
                if rel > ORACLE_REL_TOL || closed < oracle - ORACLE_ABS_SLACK {
                    failures.push(format!("p={p} dim={dim}: closed {closed}, oracle {oracle}"));
                }
                if p <= 1.0 {
                    low_p_exact &= closed == pnorm(Exponent::Infinity, y.as_slice());
                }
                cases += 1;
            }
        }
    }
    let ok = failures.is_empty() && low_p_exact;
    report(
        1,
        "dual-norm calculus",
        ok,
        format!("{cases} cases, worst relative gap {worst_rel:.2e}, p<=1 equals inf-norm: {low_p_exact}"),
        t,
    );
    assert!(ok, "{failures:?}");
}

#[test]
fn criterion_2_holder_suite() {
    let t = Instant::now();
    let mut lines = Vec::new();
    let mut ok = true;
    let mut worst = f64::INFINITY;
    for (i, psi) in verify::prop1_configurations().iter().enumerate() {
        let r = verify::prop1_suite(psi, 10_000, sub_seed(SEED, i as u64)).unwrap();
        ok &= r.ok;
        worst = worst.min(r.worst_margin);
        lines.push(format!(
            "config {i}: nonneg {} holder {} block {}",
            r.nonnegativity_violations, r.holder_violations, r.block_violations
        ));
    }
    report(
        2,
        "Holder-type inequality",
        ok,
        format!("5 configurations x 1e4 pairs, worst scaled margin {worst:.2e}"),
        t,
    );
    assert!(ok, "{lines:?}");
}

#[test]
fn criterion_3_weak_duality() {
    let t = Instant::now();
    let reports = verify::weak_duality_suite(100, 6, SEED).unwrap();
    let failures: Vec<_> = reports.iter().filter(|r| !r.weak_duality_ok).map(|r| r.instance).collect();
    let pairs: usize = reports.iter().map(|r| r.pairs_checked).sum();
    let worst = reports
        .iter()
        .filter_map(|r| r.min_scaled_gap)
        .fold(f64::INFINITY, f64::min);
    let ok = failures.is_empty() && reports.len() == 100 && pairs > 0;
    report(
        3,
        "weak duality",
        ok,
        format!("100 instances, {pairs} pairs, {} failures, worst scaled gap {worst:.2e}", failures.len()),
        t,
    );
    assert!(ok, "failing instances {failures:?}");
}

#[test]
fn criterion_4_omega_dichotomy() {
    let t = Instant::now();
    let reports = verify::theorem2_suite(100, 20, 10_000, SEED).unwrap();
    let failures: Vec<_> = reports.iter().filter(|r| !r.ok).map(|r| r.instance).collect();
    let finite: usize = reports.iter().map(|r| r.finite_points).sum();
    let neg_inf: usize = reports.iter().map(|r| r.neg_inf_points).sum();
    let lemma = verify::lemma1_suite(100, SEED).unwrap();
    let rays = lemma.iter().filter(|o| o.report.is_some()).count();
    let lemma_failures = lemma.iter().filter(|o| o.report.as_ref().is_some_and(|r| !r.ok)).count();
    let ok = failures.is_empty() && lemma_failures == 0 && finite > 0 && neg_inf > 0 && rays > 0;
    report(
        4,
        "omega dichotomy",
        ok,
        format!(
            "2000 points ({finite} finite, {neg_inf} -inf), {} failing instances, {rays} witness rays with {lemma_failures} failing",
            failures.len()
        ),
        t,
    );
    assert!(ok, "failing instances {failures:?}");
}

#[test]
fn criterion_5_avo_pipeline() {
    let t = Instant::now();
    let reports = verify::avo_suite(50, 10, SEED).unwrap();
    let failures: Vec<_> = reports.iter().filter(|r| !r.ok).map(|r| (r.instance, r.lp_value_gap)).collect();
    let worst = reports.iter().map(|r| r.lp_value_gap).fold(0.0f64, f64::max);
    let gaps = reports.iter().filter(|r| r.observed_gap > 1e-8 * (1.0 + r.brute_value.abs())).count();
    let one = verify::one_var_avo_report().unwrap();
    let one_ok = one.ok && one.split_value == 2.0 && one.dual_value == 2.0 && one.brute_value == 2.0;
    let ok = failures.is_empty() && one_ok;
    report(
        5,
        "AVO pipeline",
        ok,
        format!(
            "50 instances, worst LP value gap {worst:.2e}, {gaps} with a positive duality gap, one-variable instance {}/{}/{}",
            one.split_value, one.dual_value, one.brute_value
        ),
        t,
    );
    assert!(ok, "failing instances {failures:?}, one-variable {one:?}");
}

#[test]
fn criterion_6_example_crosschecks() {
    let t = Instant::now();
    let mut ok = true;
    let mut parts = Vec::new();
    let mut details = Vec::new();
    for e in [1u8, 3, 4] {
        let r = verify::example_crosscheck(e, &ExampleParams::for_example(e), sub_seed(SEED, e as u64)).unwrap();
        let this = r.ok && r.samples >= 1000 && r.disagreements == 0 && r.values_agree == Some(true);
        ok &= this;
        parts.push(format!(
            "ex{e}: {}/{} agree, values {:?} vs {:?}",
            r.samples - r.disagreements,
            r.samples,
            r.mechanical_value,
            r.literal_value
        ));
        if let Some(s) = &r.strong_duality {
            parts.push(format!("n=2 instance primal {} dual {}", s.primal_value, s.dual_value));
        }
        details.push(r);
    }
    let mut degenerate = ExampleParams::for_example(4);
    degenerate.lambda2 = Some(0.0);
    let r = verify::example_crosscheck(4, &degenerate, sub_seed(SEED, 40)).unwrap();
    ok &= r.ok && r.disagreements == 0;
    parts.push(format!("ex4 lambda2=0: {}/{} agree", r.samples - r.disagreements, r.samples));
    details.push(r);
    report(6, "example cross-checks", ok, parts.join(", "), t);
    assert!(ok, "{details:#?}");
}

#[test]
fn criterion_7_binary_reduction() {
    let t = Instant::now();
    let reports = verify::binary_suite(20, 10, SEED).unwrap();
    let failures: Vec<_> = reports.iter().filter(|r| !r.ok).map(|r| r.instance).collect();
    let points: usize = reports.iter().map(|r| r.binary_feasible).sum();
    let ok = failures.is_empty() && points > 0;
    report(
        7,
        "binary reduction",
        ok,
        format!("20 programs, {points} feasible binary points round-tripped, all duals linear: {}", reports.iter().all(|r| r.dual_is_lp)),
        t,
    );
    assert!(ok, "failing instances {failures:?}");
}

fn suite_json(seed: u64) -> Vec<String> {
    let psi = &verify::prop1_configurations()[0];
    vec![
        serde_json::to_string(&verify::prop1_suite(psi, 2000, seed).unwrap()).unwrap(),
        serde_json::to_string(&verify::weak_duality_suite(10, 6, seed).unwrap()).unwrap(),
        serde_json::to_string(&verify::theorem2_suite(5, 10, 500, seed).unwrap()).unwrap(),
        serde_json::to_string(&verify::lemma1_suite(5, seed).unwrap()).unwrap(),
        serde_json::to_string(&verify::avo_suite(10, 8, seed).unwrap()).unwrap(),
        serde_json::to_string(&verify::binary_suite(5, 8, seed).unwrap()).unwrap(),
    ]
    .into_iter()
    .chain((1..=5u8).map(|e| {
        let mut params = ExampleParams::for_example(e);
        params.samples = 200;
        params.solve_iters = 20_000;
        serde_json::to_string(&verify::example_crosscheck(e, &params, sub_seed(seed, e as u64)).unwrap()).unwrap()
    }))
    .collect()
}

#[test]
fn criterion_8_determinism() {
    let t = Instant::now();
    let first = suite_json(SEED);
    let second = suite_json(SEED);
    let other = suite_json(SEED + 1);
    let identical = first == second;
    let seed_matters = first.iter().zip(&other).all(|(a, b)| a != b);
    let ok = identical && seed_matters;
    report(
        8,
        "determinism",
        ok,
        format!("11 reports rerun byte-identical: {identical}, different seed changes every report: {seed_matters}"),
        t,
    );
    assert!(ok);
}
