//! End-to-end acceptance battery.  Each numbered criterion prints one
//! PASS/FAIL line (run with `--nocapture` to see them as they complete).

use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use sturmflow::em::{check_crossing_consistency, em_index, EmOutcome};
use sturmflow::error::{Result, SturmError};
use sturmflow::hermitian::TolerancePolicy;
use sturmflow::morse::{delta_regularize, morse_index, spectral_flow_crossings, spectral_flow_inertia, MorseOutcome};
use sturmflow::oracle::oracle_zero_count;
use sturmflow::problems::{
    clamped_beam_first_root, prob_0, prob_a, prob_b, prob_c, prob_scalar_second_order,
    random_problem,
};
use sturmflow::sturm::SturmProblem;
use sturmflow::verify::{verify, VerifyParams};

fn conclude(criterion: &str, passed: bool, detail: &str) {
    println!("[{}] criterion {criterion}: {detail}", if passed { "PASS" } else { "FAIL" });
    assert!(passed, "criterion {criterion}: {detail}");
}

/// Runs both pipelines directly (with the delta recorded by verify, if any)
/// and checks that the analytic, geometric and Galerkin crossing forms have
/// identical signatures at every crossing.
fn crossing_identity(
    problem: &SturmProblem,
    delta: Option<f64>,
    tol: &TolerancePolicy,
    seed: u64,
) -> Result<usize> {
    let effective = match delta {
        Some(d) => delta_regularize(problem, d),
        None => problem.clone(),
    };
    let em: EmOutcome = em_index(&effective, tol)?;
    let morse: MorseOutcome = morse_index(&effective, 16, tol)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut checked = 0;
    for crossing in &em.crossings {
        // Analytic vs geometric signatures (and entrywise agreement).
        check_crossing_consistency(&effective, crossing, tol, &mut rng)?;
        // Galerkin crossing at the same instant must carry the same signature.
        let partner = morse
            .crossings
            .iter()
            .min_by(|a, b| {
                (a.lambda - crossing.lambda)
                    .abs()
                    .total_cmp(&(b.lambda - crossing.lambda).abs())
            })
            .ok_or_else(|| {
                SturmError::Inconsistency {
                    lambda: crossing.lambda,
                    detail: "no Galerkin crossing to match".into(),
                }
            })?;
        if (partner.lambda - crossing.lambda).abs() > 1e-5 {
            return Err(SturmError::Inconsistency {
                lambda: crossing.lambda,
                detail: format!("nearest Galerkin crossing at {}", partner.lambda),
            });
        }
        if partner.signature != crossing.signature {
            return Err(SturmError::Inconsistency {
                lambda: crossing.lambda,
                detail: format!(
                    "Galerkin signature {} != analytic signature {}",
                    partner.signature, crossing.signature
                ),
            });
        }
        checked += 1;
    }
    if em.crossings.len() != morse.crossings.len() {
        return Err(SturmError::Inconsistency {
            lambda: f64::NAN,
            detail: format!(
                "{} intersection crossings vs {} Galerkin crossings",
                em.crossings.len(),
                morse.crossings.len()
            ),
        });
    }
    Ok(checked)
}

#[test]
fn criterion_1_definite_closed_form() {
    let start = Instant::now();
    let report = verify(&prob_a(), &VerifyParams::default()).unwrap();
    let elapsed = start.elapsed().as_secs_f64();
    let indices_ok = report.em_index == -2 && report.morse_index == -2 && report.agree;
    let instants_ok = report.conjugate_points.len() == 2
        && (report.conjugate_points[0].lambda - 0.4).abs() < 1e-6
        && (report.conjugate_points[1].lambda - 0.8).abs() < 1e-6;
    let fast = elapsed < 5.0;
    conclude(
        "1 (definite closed form)",
        indices_ok && instants_ok && fast,
        &format!(
            "em={} morse={} instants={:?} runtime={elapsed:.2}s",
            report.em_index,
            report.morse_index,
            report.conjugate_points.iter().map(|c| c.lambda).collect::<Vec<_>>()
        ),
    );
}

#[test]
fn criterion_2_indefinite_closed_form() {
    let start = Instant::now();
    let report = verify(&prob_b(), &VerifyParams::default()).unwrap();
    let elapsed = start.elapsed().as_secs_f64();
    let sigs: Vec<i64> = report.conjugate_points.iter().map(|c| c.signature).collect();
    let lams: Vec<f64> = report.conjugate_points.iter().map(|c| c.lambda).collect();
    let instants_ok = lams.len() == 3
        && (lams[0] - 0.4).abs() < 1e-6
        && (lams[1] - 2.0 / 3.0).abs() < 1e-6
        && (lams[2] - 0.8).abs() < 1e-6;
    let ok = report.em_index == 1
        && report.morse_index == 1
        && sigs == vec![1, -1, 1]
        && instants_ok
        && elapsed < 10.0;
    conclude(
        "2 (indefinite closed form)",
        ok,
        &format!("em={} signatures={sigs:?} instants={lams:?} runtime={elapsed:.2}s", report.em_index),
    );
}

#[test]
fn criterion_3_fourth_order_beam() {
    let c = (1.2 * clamped_beam_first_root()).powi(4);
    let report = verify(&prob_c(c), &VerifyParams::default()).unwrap();
    let ok = report.em_index == -1 && report.morse_index == -1 && report.agree;
    conclude(
        "3 (fourth order beam)",
        ok,
        &format!("em={} morse={}", report.em_index, report.morse_index),
    );
}

#[test]
fn criteria_4_and_5_randomized_suite_and_crossing_identity() {
    let tol = TolerancePolicy::default();
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let mut regularized = 0usize;
    let mut crossings_checked = 0usize;
    let mut slowest = 0.0f64;
    for case in 0..50 {
        let problem = random_problem(&mut rng);
        let start = Instant::now();
        let report = verify(&problem, &VerifyParams::default()).unwrap_or_else(|e| {
            panic!("random case {case} (m={} n={} nu={}) failed: {e}", problem.m, problem.n, problem.nu)
        });
        assert_eq!(
            report.em_index, report.morse_index,
            "random case {case} disagrees: em={} morse={} delta={:?}",
            report.em_index, report.morse_index, report.delta
        );
        if report.delta.is_some() {
            regularized += 1;
        }
        let checked = crossing_identity(&problem, report.delta, &tol, 1000 + case)
            .unwrap_or_else(|e| panic!("crossing identity failed on random case {case}: {e}"));
        crossings_checked += checked;
        slowest = slowest.max(start.elapsed().as_secs_f64());
        assert!(
            start.elapsed().as_secs_f64() < 30.0 * 2.0,
            "random case {case} exceeded the per-instance budget (incl. identity check)"
        );
    }
    conclude(
        "4 (randomized agreement, 50 problems)",
        true,
        &format!("all agree; {regularized} delta-regularized; slowest case {slowest:.1}s"),
    );

    // Canonical crossings for the identity check as well.
    let beam_c = (1.2 * clamped_beam_first_root()).powi(4);
    for (name, problem) in [
        ("PROB-A", prob_a()),
        ("PROB-B", prob_b()),
        ("PROB-C", prob_c(beam_c)),
    ] {
        crossings_checked += crossing_identity(&problem, None, &tol, 7)
            .unwrap_or_else(|e| panic!("crossing identity failed on {name}: {e}"));
    }
    conclude(
        "5 (crossing-form identity)",
        crossings_checked > 0,
        &format!("{crossings_checked} crossings: analytic, geometric and Galerkin signatures agree"),
    );
}

#[test]
fn criterion_6_geometry_invariants() {
    let tol = TolerancePolicy::default();
    let beam_c = (1.2 * clamped_beam_first_root()).powi(4);
    let problems = [prob_0(), prob_a(), prob_b(), prob_c(beam_c)];
    let mut worst_isotropy = 0.0f64;
    for problem in &problems {
        for i in 1..=64 {
            let lambda = i as f64 / 64.0;
            // solution_path validates h-constancy of every basis solution
            // internally and errors out on violation.
            let point = sturmflow::em::solution_path(problem, lambda, &tol).unwrap();
            worst_isotropy = worst_isotropy.max(point.isotropy_residual);
        }
        // Boundary-map antidiagonal blocks are exactly +/- p_{2m}.
        let bmap = problem.assemble_boundary_map();
        let p2m = problem.p2m();
        let m = problem.m;
        for j in 0..m {
            let k = 2 * m - 1 - j;
            let b = bmap.block(j, k).eval(0.37);
            let plus = (&b - &p2m).iter().map(|z| z.norm()).fold(0.0f64, f64::max);
            let minus = (&b + &p2m).iter().map(|z| z.norm()).fold(0.0f64, f64::max);
            assert!(
                plus == 0.0 || minus == 0.0,
                "antidiagonal block ({j}, {k}) differs from +/- p_2m"
            );
        }
    }
    conclude(
        "6 (geometry invariants)",
        worst_isotropy < 1e-8,
        &format!("worst isotropy residual {worst_isotropy:.2e} over 64 samples x {} problems", problems.len()),
    );
}

#[test]
fn criterion_7_spectral_flow_internals() {
    let tol = TolerancePolicy::default();
    let beam_c = (1.2 * clamped_beam_first_root()).powi(4);
    let suite: Vec<(&str, SturmProblem)> = vec![
        ("PROB-0", prob_0()),
        ("PROB-A", prob_a()),
        ("PROB-B", prob_b()),
        ("PROB-C", prob_c(beam_c)),
        ("scalar j=1", prob_scalar_second_order((1.5 * std::f64::consts::PI).powi(2))),
        ("scalar j=3", prob_scalar_second_order((3.5 * std::f64::consts::PI).powi(2))),
    ];
    for (name, problem) in &suite {
        let mut flows = Vec::new();
        for n in [16usize, 20, 24] {
            let by_inertia = spectral_flow_inertia(problem, n, &tol)
                .unwrap_or_else(|e| panic!("{name} inertia flow at N={n}: {e}"));
            let (by_crossings, _) = spectral_flow_crossings(problem, n, &tol)
                .unwrap_or_else(|e| panic!("{name} crossing flow at N={n}: {e}"));
            assert_eq!(by_inertia, by_crossings, "{name}: methods disagree at N={n}");
            flows.push(by_inertia);
        }
        assert!(flows.windows(2).all(|w| w[0] == w[1]), "{name}: flow unstable across N: {flows:?}");
    }
    conclude(
        "7 (spectral-flow internals)",
        true,
        &format!("inertia = crossing-sum and N-stable on {} problems", suite.len()),
    );
}

#[test]
fn criterion_8_index_axioms() {
    let tol = TolerancePolicy::default();
    let battery = sturmflow::axioms::run_battery(0, false, &tol);
    for c in &battery.checks {
        assert!(c.passed, "axiom {} failed: {}", c.name, c.detail);
    }
    // Sentinel: a negated crossing form must break localization.
    let sentinel = sturmflow::axioms::run_battery(0, true, &tol);
    let sentinel_fails = sentinel
        .checks
        .iter()
        .any(|c| c.name.starts_with("localization") && !c.passed);
    conclude(
        "8 (index axioms)",
        battery.all_passed() && sentinel_fails,
        &format!("{} checks pass; sentinel detected", battery.checks.len()),
    );
}

#[test]
fn criterion_9_classical_oracle_consistency() {
    let tol = TolerancePolicy::default();
    let ratios = [0.4, 0.7, 1.2, 1.5, 1.8, 2.3, 2.6, 3.2, 3.7, 4.4];
    for ratio in ratios {
        let c = (ratio * std::f64::consts::PI).powi(2);
        let problem = prob_scalar_second_order(c);
        let zeros = oracle_zero_count(&problem, &tol).unwrap() as i64;
        let report = verify(&problem, &VerifyParams::default()).unwrap();
        assert_eq!(
            report.classical_morse_index,
            Some(zeros),
            "classical index mismatch at sqrt(c)/pi = {ratio}"
        );
        assert_eq!(
            report.em_index.abs(),
            zeros,
            "|em_index| mismatch at sqrt(c)/pi = {ratio}"
        );
        assert!(report.agree, "pipelines disagree at sqrt(c)/pi = {ratio}");
    }
    conclude(
        "9 (classical oracle)",
        true,
        &format!("{} scalar configs: oracle = classical index = |em_index|", ratios.len()),
    );
}
