//! Runs the `frobdyn-core` verification pipeline and the finite-field
//! dynamics tools, and renders their results as JSON or text.

use std::collections::BTreeMap;
use std::num::NonZeroUsize;
use std::thread;

use frobdyn_core::cert::{overall, Check, Status, CERTIFY_BELOW};
use frobdyn_core::deformation::MIN_PRECISION;
use frobdyn_core::dynamics::{
    census_chunk, census_merge, census_ranges, fiber, orbit, CensusReport, FiberResult,
    ProjPoint, MAX_ENUMERATION_DEGREE,
};
use frobdyn_core::laurent::s_degree_covered;
use frobdyn_core::pipeline::{run_trial, symbolic_checks, TrialReport};
use frobdyn_core::verschiebung::{coordinate_changes, quadric_map};
use frobdyn_core::{FieldElement, FieldParams};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

pub const SCHEMA: &str = "1";

#[derive(Debug, Error)]
pub enum CliError {
    /// Bad flags or values; exit code 64.
    #[error("{0}")]
    Usage(String),
}

impl CliError {
    fn usage(msg: impl Into<String>) -> Self {
        CliError::Usage(msg.into())
    }
}

pub fn field_from_args(degree: u32, modulus: Option<&str>) -> Result<FieldParams, CliError> {
    let f = match modulus {
        Some(hex) => FieldParams::from_hex(degree, hex),
        None => FieldParams::new(degree),
    };
    f.map_err(|e| CliError::usage(format!("--field/--modulus: {e}")))
}

pub fn element_arg(f: FieldParams, flag: &str, hex: &str) -> Result<FieldElement, CliError> {
    f.element_from_hex(hex)
        .map_err(|e| CliError::usage(format!("{flag}: {e}")))
}

pub fn point_arg(f: FieldParams, flag: &str, text: &str) -> Result<ProjPoint, CliError> {
    ProjPoint::parse(f, text).map_err(|e| CliError::usage(format!("{flag}: {e}")))
}

pub fn to_json<T: Serialize>(v: &T) -> String {
    serde_json::to_string_pretty(v).expect("serializable")
}

/// Exit code for an overall status.
pub fn exit_code(status: Status) -> u8 {
    match status {
        Status::Certified | Status::Discrepancy => 0,
        Status::Failed => 1,
        Status::Inconclusive => 2,
    }
}

#[derive(Serialize)]
pub struct CheckJson {
    pub name: String,
    pub status: &'static str,
    /// Coefficients of `t^n` for `n <` this were compared.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub checked_below_t: Option<i64>,
    /// Highest power of `s` fully covered by that range.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub s_degree_covered: Option<i64>,
    #[serde(skip_serializing_if = "String::is_empty")]
    pub detail: String,
}

impl From<&Check> for CheckJson {
    fn from(c: &Check) -> Self {
        CheckJson {
            name: c.name.clone(),
            status: c.status.as_str(),
            checked_below_t: c.checked_below,
            s_degree_covered: c.checked_below.and_then(s_degree_covered),
            detail: c.detail.clone(),
        }
    }
}

fn checks_json(cs: &[Check]) -> Vec<CheckJson> {
    cs.iter().map(CheckJson::from).collect()
}

fn tally(cs: &[Check]) -> BTreeMap<&'static str, usize> {
    let mut m = BTreeMap::new();
    for s in [Status::Certified, Status::Discrepancy, Status::Inconclusive, Status::Failed] {
        m.insert(s.as_str(), cs.iter().filter(|c| c.status == s).count());
    }
    m
}

#[derive(Clone, Debug)]
pub struct VerifyConfig {
    pub field: FieldParams,
    pub mu: Option<FieldElement>,
    pub omega: Option<FieldElement>,
    pub precision: i64,
    pub trials: usize,
    pub seed: u64,
    pub workers: Option<NonZeroUsize>,
}

#[derive(Serialize)]
struct VerifyParams {
    field_degree: u32,
    modulus: String,
    trunc: i64,
    trials: usize,
    seed: u64,
    rng: &'static str,
    certify_below_t: i64,
    #[serde(skip_serializing_if = "Option::is_none")]
    mu: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    omega: Option<String>,
}

#[derive(Serialize)]
struct TrialJson {
    mu: String,
    omega: String,
    omega_variants: Vec<String>,
    status: &'static str,
    counts: BTreeMap<&'static str, usize>,
    checks: Vec<CheckJson>,
}

#[derive(Serialize)]
pub struct VerifyCertificate {
    schema: &'static str,
    command: &'static str,
    parameters: VerifyParams,
    status: &'static str,
    symbolic: Vec<CheckJson>,
    trials: Vec<TrialJson>,
    #[serde(skip)]
    pub overall: Status,
    #[serde(skip)]
    trial_reports: Vec<TrialReport>,
    #[serde(skip)]
    symbolic_checks: Vec<Check>,
}

fn random_element(rng: &mut ChaCha8Rng, f: FieldParams) -> FieldElement {
    f.element(rng.random_range(0..=f.mask())).expect("masked")
}

fn random_omega(rng: &mut ChaCha8Rng, f: FieldParams) -> FieldElement {
    loop {
        let w = random_element(rng, f);
        if !w.is_zero() && !w.is_one() {
            return w;
        }
    }
}

fn default_workers() -> usize {
    thread::available_parallelism().map_or(1, |n| n.get())
}

/// Runs `jobs` on up to `workers` threads, keeping results in input order.
fn parallel_map<T: Sync, R: Send>(jobs: &[T], workers: usize, f: impl Fn(&T) -> R + Sync) -> Vec<R> {
    let workers = workers.clamp(1, jobs.len().max(1));
    if workers == 1 {
        return jobs.iter().map(&f).collect();
    }
    let f = &f;
    let mut out: Vec<Option<R>> = (0..jobs.len()).map(|_| None).collect();
    thread::scope(|scope| {
        let handles: Vec<_> = (0..workers)
            .map(|w| {
                scope.spawn(move || {
                    jobs.iter()
                        .enumerate()
                        .skip(w)
                        .step_by(workers)
                        .map(|(i, j)| (i, f(j)))
                        .collect::<Vec<_>>()
                })
            })
            .collect();
        for h in handles {
            for (i, r) in h.join().expect("worker panicked") {
                out[i] = Some(r);
            }
        }
    });
    out.into_iter().map(|r| r.expect("every job ran")).collect()
}

pub fn verify(cfg: &VerifyConfig) -> Result<VerifyCertificate, CliError> {
    let f = cfg.field;
    if f.degree() < 2 {
        return Err(CliError::usage("verify needs --field >= 2 so that omega can avoid 0 and 1"));
    }
    if cfg.precision < MIN_PRECISION {
        return Err(CliError::usage(format!("--trunc must be at least {MIN_PRECISION}")));
    }
    if let Some(w) = cfg.omega {
        if w.is_zero() || w.is_one() {
            return Err(CliError::usage("--omega must differ from 0 and 1"));
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut pairs = Vec::new();
    for _ in 0..cfg.trials {
        let mu = random_element(&mut rng, f);
        let w = random_omega(&mut rng, f);
        pairs.push((mu, w));
    }
    if cfg.mu.is_some() || cfg.omega.is_some() {
        let mu = cfg.mu.unwrap_or_else(|| random_element(&mut rng, f));
        let w = cfg.omega.unwrap_or_else(|| random_omega(&mut rng, f));
        pairs.push((mu, w));
    }
    let workers = cfg.workers.map_or_else(default_workers, |n| n.get());
    let results = parallel_map(&pairs, workers, |&(mu, w)| run_trial(mu, w, cfg.precision));
    let mut reports = Vec::new();
    for r in results {
        reports.push(r.map_err(|e| CliError::usage(format!("trial parameters rejected: {e}")))?);
    }
    let symbolic = symbolic_checks();
    let all: Vec<&Check> = symbolic.iter().chain(reports.iter().flat_map(|r| r.checks.iter())).collect();
    let status = overall(all.iter().copied());
    let trials = reports
        .iter()
        .map(|r| TrialJson {
            mu: r.mu.to_string(),
            omega: r.omega.to_string(),
            omega_variants: r.omega_variants.iter().map(|w| w.to_string()).collect(),
            status: r.status().as_str(),
            counts: tally(&r.checks),
            checks: checks_json(&r.checks),
        })
        .collect();
    Ok(VerifyCertificate {
        schema: SCHEMA,
        command: "verify",
        parameters: VerifyParams {
            field_degree: f.degree(),
            modulus: f.modulus_hex(),
            trunc: cfg.precision,
            trials: cfg.trials,
            seed: cfg.seed,
            rng: "ChaCha8",
            certify_below_t: CERTIFY_BELOW,
            mu: cfg.mu.map(|m| m.to_string()),
            omega: cfg.omega.map(|w| w.to_string()),
        },
        status: status.as_str(),
        symbolic: checks_json(&symbolic),
        trials,
        overall: status,
        trial_reports: reports,
        symbolic_checks: symbolic,
    })
}

impl VerifyCertificate {
    pub fn trials(&self) -> &[TrialReport] {
        &self.trial_reports
    }

    pub fn symbolic(&self) -> &[Check] {
        &self.symbolic_checks
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("serializable")
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let line = |out: &mut String, c: &Check| {
            out.push_str(&format!("  {:<14} {}", c.status.as_str(), c.name));
            if !c.detail.is_empty() && c.status != Status::Certified {
                out.push_str(&format!(" ({})", c.detail));
            }
            out.push('\n');
        };
        out.push_str(&format!("symbolic identities: {}\n", overall(&self.symbolic_checks).as_str()));
        for c in &self.symbolic_checks {
            line(&mut out, c);
        }
        for (i, r) in self.trial_reports.iter().enumerate() {
            let t = tally(&r.checks);
            out.push_str(&format!(
                "trial {} mu={} omega={}: {} ({} certified, {} discrepancy, {} inconclusive, {} failed)\n",
                i + 1,
                r.mu,
                r.omega,
                r.status().as_str(),
                t["certified"],
                t["discrepancy"],
                t["inconclusive"],
                t["failed"]
            ));
            for c in r.checks.iter().filter(|c| c.status != Status::Certified) {
                line(&mut out, c);
            }
        }
        out.push_str(&format!("overall: {}\n", self.overall.as_str()));
        out
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Coords {
    Y,
    Z,
}

#[derive(Serialize)]
pub struct MapReport {
    schema: &'static str,
    command: &'static str,
    field_degree: u32,
    mu: String,
    input: String,
    input_coords: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    output: Option<String>,
    output_coords: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    error: Option<String>,
}

impl MapReport {
    pub fn text(&self) -> String {
        match (&self.output, &self.error) {
            (Some(o), _) => o.clone(),
            (_, Some(e)) => format!("error: {e}"),
            _ => unreachable!(),
        }
    }

    pub fn ok(&self) -> bool {
        self.error.is_none()
    }
}

fn coords_name(c: Coords) -> &'static str {
    match c {
        Coords::Y => "y",
        Coords::Z => "z",
    }
}

/// Applies the terminal quadrics. The input lives on the twisted space and
/// the output on `|2Θ|`; either may be given in z or y coordinates.
pub fn map_point(mu: FieldElement, p: &ProjPoint, input: Coords, output: Coords) -> MapReport {
    let ch = coordinate_changes(mu);
    let y = match input {
        Coords::Y => *p,
        Coords::Z => ch.z_to_y_twisted.apply(p),
    };
    let result = quadric_map(&y).map(|z| match output {
        Coords::Z => z,
        Coords::Y => ch.z_to_y.apply(&z),
    });
    let (out, err) = match result {
        Ok(z) => (Some(z.to_string()), None),
        Err(e) => (None, Some(e.to_string())),
    };
    MapReport {
        schema: SCHEMA,
        command: "map",
        field_degree: mu.field().degree(),
        mu: mu.to_string(),
        input: p.to_string(),
        input_coords: coords_name(input),
        output: out,
        output_coords: coords_name(output),
        error: err,
    }
}

#[derive(Serialize)]
pub struct FiberReport {
    schema: &'static str,
    command: &'static str,
    field_degree: u32,
    target: String,
    kind: &'static str,
    /// Rational points of the fiber in y-coordinates, the base point last
    /// on a line.
    points: Vec<String>,
}

impl FiberReport {
    pub fn text(&self) -> String {
        match self.kind {
            "empty" => "empty".into(),
            k => format!("{k} {}", self.points.join(" ")),
        }
    }
}

pub fn fiber_report(target: &ProjPoint) -> FiberReport {
    let r = fiber(target);
    let points = match &r {
        FiberResult::Unique(p) => vec![p.to_string()],
        FiberResult::Empty => vec![],
        FiberResult::Line { points, .. } => points.iter().map(|p| p.to_string()).collect(),
    };
    FiberReport {
        schema: SCHEMA,
        command: "fiber",
        field_degree: target.field().degree(),
        target: target.to_string(),
        kind: r.kind(),
        points,
    }
}

#[derive(Serialize)]
pub struct OrbitReport {
    schema: &'static str,
    command: &'static str,
    field_degree: u32,
    mu: String,
    start: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    preperiod: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    period: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    cycle_start: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    evaluations: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    error: Option<String>,
}

impl OrbitReport {
    pub fn text(&self) -> String {
        match (&self.error, self.preperiod, self.period) {
            (Some(e), _, _) => format!("error: {e}"),
            (None, Some(n), Some(l)) => format!(
                "preperiod {n}, period {l}, cycle starts at {}",
                self.cycle_start.as_deref().unwrap_or("")
            ),
            _ => unreachable!(),
        }
    }

    pub fn ok(&self) -> bool {
        self.error.is_none()
    }
}

pub fn orbit_report(mu: FieldElement, start: &ProjPoint, max_steps: Option<u64>) -> OrbitReport {
    let r = orbit(start, mu, max_steps);
    let mut rep = OrbitReport {
        schema: SCHEMA,
        command: "orbit",
        field_degree: mu.field().degree(),
        mu: mu.to_string(),
        start: start.to_string(),
        preperiod: None,
        period: None,
        cycle_start: None,
        evaluations: None,
        error: None,
    };
    match r {
        Ok(o) => {
            rep.preperiod = Some(o.preperiod);
            rep.period = Some(o.period);
            rep.cycle_start = Some(o.cycle_start.to_string());
            rep.evaluations = Some(o.evaluations);
        }
        Err(e) => rep.error = Some(e.to_string()),
    }
    rep
}

/// Census over `P^3`, split across threads by index range.
pub fn run_census(mu: FieldElement, workers: usize) -> Result<CensusReport, CliError> {
    let f = mu.field();
    if f.degree() > MAX_ENUMERATION_DEGREE {
        return Err(CliError::usage(format!(
            "census enumerates P^3 only for --field <= {MAX_ENUMERATION_DEGREE}"
        )));
    }
    let ranges = census_ranges(f, workers.max(1));
    let chunks = parallel_map(&ranges, workers, |r| census_chunk(mu, r.clone()));
    Ok(census_merge(mu, chunks))
}

#[derive(Serialize)]
struct CensusJson {
    schema: &'static str,
    command: &'static str,
    field_degree: u32,
    modulus: String,
    mu: String,
    points: u64,
    status: &'static str,
    classes: BTreeMap<&'static str, u64>,
    fibers: BTreeMap<&'static str, u64>,
    cycles_by_period: BTreeMap<String, u64>,
    points_by_period: BTreeMap<String, u64>,
    max_preperiod: u64,
    invariants: Vec<CheckJson>,
}

pub fn census_status(r: &CensusReport) -> Status {
    overall(&r.invariants)
}

pub fn census_json(r: &CensusReport) -> String {
    let classes = BTreeMap::from([
        ("off_h", r.off_h),
        ("h_off_kummer", r.h_off_kummer),
        ("kummer_on_h", r.kummer_h),
        ("on_kummer", r.on_kummer),
    ]);
    let fibers = BTreeMap::from([
        ("unique", r.fiber_unique),
        ("empty", r.fiber_empty),
        ("line", r.fiber_line),
    ]);
    let per = |m: &BTreeMap<u64, u64>| m.iter().map(|(k, v)| (format!("{k:06}"), *v)).collect();
    let j = CensusJson {
        schema: SCHEMA,
        command: "census",
        field_degree: r.degree,
        modulus: r.mu.field().modulus_hex(),
        mu: r.mu.to_string(),
        points: r.points,
        status: census_status(r).as_str(),
        classes,
        fibers,
        cycles_by_period: per(&r.period_stats.cycles),
        points_by_period: per(&r.period_stats.points_by_period),
        max_preperiod: r.period_stats.max_preperiod,
        invariants: checks_json(&r.invariants),
    };
    serde_json::to_string_pretty(&j).expect("serializable")
}

pub fn census_text(r: &CensusReport) -> String {
    let mut s = format!(
        "GF(2^{}) mu={}: {} points; off H {}, H off Kum {}, Kum on H {}\n",
        r.degree, r.mu, r.points, r.off_h, r.h_off_kummer, r.kummer_h
    );
    s.push_str(&format!(
        "cycles by period {:?}; max preperiod {}\n",
        r.period_stats.cycles, r.period_stats.max_preperiod
    ));
    for c in &r.invariants {
        s.push_str(&format!("  {:<12} {}\n", c.status.as_str(), c.name));
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parallel_map_keeps_order() {
        let v: Vec<u32> = (0..37).collect();
        assert_eq!(parallel_map(&v, 4, |x| x * 2), v.iter().map(|x| x * 2).collect::<Vec<_>>());
    }

    #[test]
    fn verify_rejects_bad_inputs() {
        let f = FieldParams::new(16).unwrap();
        let cfg = VerifyConfig {
            field: f,
            mu: None,
            omega: Some(f.one()),
            precision: 128,
            trials: 0,
            seed: 0,
            workers: None,
        };
        assert!(verify(&cfg).is_err());
        let cfg = VerifyConfig { omega: None, precision: 10, ..cfg };
        assert!(verify(&cfg).is_err());
    }

    #[test]
    fn census_worker_count_does_not_change_output() {
        let f = FieldParams::new(3).unwrap();
        let mu = f.element(3).unwrap();
        let a = census_json(&run_census(mu, 1).unwrap());
        let b = census_json(&run_census(mu, 5).unwrap());
        assert_eq!(a, b);
    }
}
