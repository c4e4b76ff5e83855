//! End-to-end acceptance run. Prints one PASS/FAIL line per criterion and
//! exits nonzero if any fails.

use std::collections::BTreeMap;
use std::process::Command;
use std::time::{Duration, Instant};

use frobdyn::{census_json, run_census, verify, VerifyCertificate, VerifyConfig};
use frobdyn_core::cert::{Check, Status};
use frobdyn_core::dynamics::{orbit, CensusReport, ProjPoint};
use frobdyn_core::FieldParams;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const SEED: u64 = 20240611;
const TRIALS: usize = 5;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(failures: Vec<String>, ok_detail: String) -> Outcome {
    if failures.is_empty() {
        Outcome { pass: true, detail: ok_detail }
    } else {
        Outcome { pass: false, detail: failures.join("; ") }
    }
}

fn describe(c: &Check) -> String {
    if c.detail.is_empty() {
        format!("{} {}", c.name, c.status.as_str())
    } else {
        format!("{} {} ({})", c.name, c.status.as_str(), c.detail)
    }
}

/// Every named check must be present and certified in every trial.
/// Failures are grouped by check.
fn trial_checks(cert: &VerifyCertificate, names: &[&str]) -> Vec<String> {
    let total = cert.trials().len();
    let mut bad = Vec::new();
    for name in names {
        let mut failing: BTreeMap<String, usize> = BTreeMap::new();
        for t in cert.trials() {
            match t.checks.iter().find(|c| c.name == *name) {
                Some(c) if c.status == Status::Certified => {}
                Some(c) => *failing.entry(describe(c)).or_default() += 1,
                None => *failing.entry(format!("{name} missing")).or_default() += 1,
            }
        }
        for (msg, n) in failing {
            bad.push(format!("{msg} in {n}/{total} trials"));
        }
    }
    bad
}

fn symbolic_check(cert: &VerifyCertificate, name: &str) -> Vec<String> {
    match cert.symbolic().iter().find(|c| c.name == name) {
        Some(c) if c.status == Status::Certified => vec![],
        Some(c) => vec![describe(c)],
        None => vec![format!("check {name} missing")],
    }
}

fn census_invariants<'a>(
    reports: impl IntoIterator<Item = &'a CensusReport>,
    names: &[&str],
) -> (Vec<String>, usize) {
    let mut bad = Vec::new();
    let mut n = 0;
    for r in reports {
        n += 1;
        for name in names {
            match r.invariants.iter().find(|c| c.name == *name) {
                Some(c) if c.status == Status::Certified => {}
                Some(c) => bad.push(format!("m={} mu={}: {}", r.degree, r.mu, describe(c))),
                None => bad.push(format!("m={} mu={}: {name} missing", r.degree, r.mu)),
            }
        }
    }
    (bad, n)
}

fn main() {
    let f16 = FieldParams::new(16).unwrap();
    let cfg = VerifyConfig {
        field: f16,
        mu: None,
        omega: None,
        precision: 128,
        trials: TRIALS,
        seed: SEED,
        workers: None,
    };
    let start = Instant::now();
    let cert = verify(&cfg).expect("verify runs");
    let elapsed = start.elapsed();

    // Censuses for every mu over GF(2^m), m <= 4.
    let mut all: BTreeMap<(u32, u64), CensusReport> = BTreeMap::new();
    let census_start = Instant::now();
    for m in 1..=4 {
        let f = FieldParams::new(m).unwrap();
        for mu in f.elements() {
            all.insert((m, mu.bits()), run_census(mu, 4).unwrap());
        }
    }
    let census_elapsed = census_start.elapsed();
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut chosen = Vec::new();
    for m in 1..=4u32 {
        let random = rng.random_range(0..1u64 << m);
        let mut mus = vec![0, 1, random];
        mus.sort_unstable();
        mus.dedup();
        for mu in mus {
            chosen.push(&all[&(m, mu)]);
        }
    }

    let mut results: Vec<(&str, Outcome)> = Vec::new();

    let mut bad = trial_checks(
        &cert,
        &[
            "r_1_leading_form",
            "r_2_leading_form",
            "r_3_leading_form",
            "r_inf_leading_form",
            "terminal_quadrics",
            "leading_forms_omega_independent",
        ],
    );
    bad.extend(symbolic_check(&cert, "terminal_quadrics_symbolic"));
    if elapsed > Duration::from_secs(120) {
        bad.push(format!("took {elapsed:?}"));
    }
    results.push((
        "terminal quadrics (y2^2, y1^2, y2 y3 + y1 yinf, yinf^2 + y1 y2)",
        outcome(bad, format!("{TRIALS} trials over GF(2^16) at t^128 in {:.2}s", elapsed.as_secs_f64())),
    ));

    let bad = trial_checks(
        &cert,
        &[
            "f0_routes",
            "f1_routes",
            "fb_definition_vs_intermediate",
            "fb_intermediate_vs_closed",
            "fb_definition_vs_closed",
            "f0_special_fiber",
            "f1_special_fiber",
            "fb_special_fiber",
        ],
    );
    results.push(("closed forms of F0, F1, FB and their special fiber", outcome(bad, format!("{TRIALS} trials"))));

    let bad = trial_checks(
        &cert,
        &[
            "gamma_sq",
            "alpha_beta_gamma_sq",
            "alpha_beta_sq",
            "mixed_sq",
            "combo_sq",
            "combo_sq_closed",
            "gamma_square_root",
            "a",
            "b",
            "c",
            "six_equalities_consistency",
            "abc_s_valuation",
            "tau0_normalization",
            "tau1_normalization",
            "alpha_b_normalization",
            "alpha0_normalization",
            "alpha1_normalization",
            "sqrt_a_over_c",
            "sqrt_a_over_b",
            "sqrt_inv_bc",
            "sqrt_inv_bc_displayed",
        ],
    );
    results.push(("scalar identities", outcome(bad, format!("{TRIALS} trials"))));

    let bad = trial_checks(
        &cert,
        &[
            "f_combination_s6",
            "f_combination_s6_closed",
            "f_divisibility_symbolic",
            "f_integral",
            "f_routes",
            "f_reconstruction",
            "f_reconstruction_closed",
        ],
    );
    results.push(("valuation and divisibility of f", outcome(bad, format!("{TRIALS} trials"))));

    let mut bad = symbolic_check(&cert, "kummer_pullback");
    bad.extend(symbolic_check(&cert, "kummer_twist"));
    results.push(("Kummer pullback factorization", outcome(bad, "exact over GF(2)[mu, y]".into())));

    let mut bad = symbolic_check(&cert, "frobenius_composite");
    let (more, n) = census_invariants(all.values(), &["step_avoids_excluded", "step_defined"]);
    bad.extend(more);
    results.push((
        "Frobenius step composite and excluded point",
        outcome(bad, format!("symbolic identity plus {n} exhaustive censuses, m <= 4, every mu")),
    ));

    let (bad, n) = census_invariants(
        chosen.iter().copied(),
        &["fiber_trichotomy", "fiber_roundtrip", "line_fibers", "preimage_counts", "degree_bookkeeping"],
    );
    let points: u64 = chosen.iter().map(|r| r.points).sum();
    results.push((
        "fiber census",
        outcome(bad, format!("{n} censuses, {points} points, mu in {{0, 1, random}}, m <= 4")),
    ));

    let mut bad = symbolic_check(&cert, "base_point_forced");
    let (more, n) = census_invariants(all.values(), &["base_point_unique"]);
    bad.extend(more);
    results.push(("base point is (0:0:1:0) only", outcome(bad, format!("forced argument plus {n} censuses"))));

    let (mut bad, n) = census_invariants(all.values(), &["orbits_periodic", "brent_agrees"]);
    let f1 = FieldParams::new(1).unwrap();
    let start_pt = ProjPoint::parse(f1, "0:1:0:0").unwrap();
    match orbit(&start_pt, f1.zero(), None) {
        Ok(o) if o.preperiod == 0 && o.period == 2 => {}
        Ok(o) => bad.push(format!("pinned orbit gave preperiod {}, period {}", o.preperiod, o.period)),
        Err(e) => bad.push(format!("pinned orbit failed: {e}")),
    }
    results.push((
        "orbit periodicity",
        outcome(bad, format!("{n} censuses in {:.2}s; pinned orbit (0:1:0:0) preperiod 0 period 2", census_elapsed.as_secs_f64())),
    ));

    results.push(("determinism", determinism(&cert, &cfg)));

    let mut failed = 0;
    for (i, (name, o)) in results.iter().enumerate() {
        let tag = if o.pass { "PASS" } else { "FAIL" };
        if !o.pass {
            failed += 1;
        }
        println!("{tag} criterion {:>2}: {name}: {}", i + 1, o.detail);
    }
    println!("{} of {} criteria pass", results.len() - failed, results.len());
    if failed > 0 {
        std::process::exit(1);
    }
}

fn determinism(first: &VerifyCertificate, cfg: &VerifyConfig) -> Outcome {
    let mut bad = Vec::new();
    let one_worker = VerifyConfig { workers: std::num::NonZeroUsize::new(1), ..cfg.clone() };
    let again = verify(&one_worker).expect("verify runs");
    if again.to_json() != first.to_json() {
        bad.push("library certificate changed between runs".to_string());
    }
    let f3 = FieldParams::new(3).unwrap();
    let mu = f3.element(5).unwrap();
    if census_json(&run_census(mu, 1).unwrap()) != census_json(&run_census(mu, 7).unwrap()) {
        bad.push("census JSON depends on worker count".to_string());
    }
    let run = |workers: &str| {
        Command::new(env!("CARGO_BIN_EXE_frobdyn"))
            .args(["verify", "--field", "16", "--trials", "3", "--trunc", "128", "--seed", "7", "--workers", workers])
            .output()
            .expect("binary runs")
    };
    let (a, b) = (run("1"), run("3"));
    if a.stdout != b.stdout || a.stdout.is_empty() {
        bad.push("CLI certificate differs between runs".to_string());
    }
    outcome(bad, "library, census and CLI output byte-identical across runs and worker counts".into())
}
