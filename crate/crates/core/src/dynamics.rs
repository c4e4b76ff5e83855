//! Finite-field dynamics of the Verschiebung: fibers, the Frobenius
//! self-map on `P^3`, orbits and exhaustive censuses.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::ops::Range;

use crate::cert::Check;
use crate::error::{FieldError, MapError};
use crate::gf2m::{FieldElement, FieldParams};
use crate::verschiebung::{kummer_z_at, quadric_map};

/// A point of `P^3` over GF(2^m), scaled so that its first nonzero
/// coordinate is 1.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub struct ProjPoint {
    coords: [FieldElement; 4],
}

impl ProjPoint {
    pub fn new(coords: [FieldElement; 4]) -> Result<Self, MapError> {
        let f = coords[0].field();
        if coords.iter().any(|c| c.field() != f) {
            return Err(FieldError::FieldMismatch.into());
        }
        let lead = coords.iter().find(|c| !c.is_zero()).ok_or(MapError::ZeroPoint)?;
        let inv = lead.inv()?;
        Ok(ProjPoint {
            coords: coords.map(|c| c * inv),
        })
    }

    pub fn from_bits(field: FieldParams, bits: [u64; 4]) -> Result<Self, MapError> {
        let mut c = [field.zero(); 4];
        for (slot, b) in c.iter_mut().zip(bits) {
            *slot = field.element(b)?;
        }
        Self::new(c)
    }

    /// Parses `a:b:c:d` with hexadecimal components.
    pub fn parse(field: FieldParams, text: &str) -> Result<Self, MapError> {
        let parts: Vec<&str> = text.split(':').collect();
        if parts.len() != 4 {
            return Err(FieldError::BadHex(text.into()).into());
        }
        let mut c = [field.zero(); 4];
        for (slot, p) in c.iter_mut().zip(parts) {
            *slot = field.element_from_hex(p.trim())?;
        }
        Self::new(c)
    }

    pub fn coords(&self) -> &[FieldElement; 4] {
        &self.coords
    }

    pub fn field(&self) -> FieldParams {
        self.coords[0].field()
    }

    /// Position in the enumeration: points with leading coordinate at
    /// position 0 come first, ordered by the remaining coordinates read as
    /// base-q digits.
    pub fn index(&self) -> u64 {
        let f = self.field();
        let q = f.order() as u64;
        let lead = self.coords.iter().position(|c| !c.is_zero()).expect("nonzero point");
        let mut offset = 0;
        for l in 0..lead {
            offset += q.pow(3 - l as u32);
        }
        let digits = self.coords[lead + 1..]
            .iter()
            .fold(0u64, |acc, c| acc * q + c.bits());
        offset + digits
    }

    pub fn from_index(field: FieldParams, mut idx: u64) -> Option<Self> {
        let q = field.order() as u64;
        for lead in 0..4 {
            let block = q.pow(3 - lead as u32);
            if idx < block {
                let mut c = [field.zero(); 4];
                c[lead] = field.one();
                for slot in (lead + 1..4).rev() {
                    c[slot] = field.element(idx % q).ok()?;
                    idx /= q;
                }
                return Some(ProjPoint { coords: c });
            }
            idx -= block;
        }
        None
    }

    pub fn e_bad_y(field: FieldParams) -> Self {
        ProjPoint {
            coords: [field.zero(), field.zero(), field.one(), field.zero()],
        }
    }

    /// The excluded point in the z-coordinates of `|2Θ|`.
    pub fn e_bad_z(mu: FieldElement) -> Self {
        let f = mu.field();
        ProjPoint {
            coords: [f.zero(), f.zero(), f.one(), mu],
        }
    }
}

impl fmt::Display for ProjPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let [a, b, c, d] = self.coords;
        write!(f, "{a}:{b}:{c}:{d}")
    }
}

/// `q^3 + q^2 + q + 1` for `q = 2^m`.
pub fn point_count(field: FieldParams) -> u64 {
    let q = field.order() as u64;
    q * q * q + q * q + q + 1
}

/// Largest degree for which `P^3` is enumerated.
pub const MAX_ENUMERATION_DEGREE: u32 = 10;

#[derive(Clone, PartialEq, Eq, Debug)]
pub enum FiberResult {
    Unique(ProjPoint),
    Empty,
    /// The points `(b : 0 : y3 : d)` for all `y3`, followed by the base
    /// point `(0:0:1:0)`.
    Line {
        base: ProjPoint,
        direction: ProjPoint,
        points: Vec<ProjPoint>,
    },
}

impl FiberResult {
    pub fn kind(&self) -> &'static str {
        match self {
            FiberResult::Unique(_) => "unique",
            FiberResult::Empty => "empty",
            FiberResult::Line { .. } => "line",
        }
    }

    /// Number of rational points, counting the base point on a line.
    pub fn len(&self) -> u64 {
        match self {
            FiberResult::Unique(_) => 1,
            FiberResult::Empty => 0,
            FiberResult::Line { points, .. } => points.len() as u64,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Preimages under the quadric map of a target in z-coordinates; the
/// answer is in y-coordinates of the twisted space.
pub fn fiber(target: &ProjPoint) -> FiberResult {
    let [a, b, c, d] = target.coords.map(|x| x.sqrt());
    let f = target.field();
    if !a.is_zero() {
        let r = (a * b).sqrt();
        let y3 = (c.square() + b * d + b * r) * a.inv().expect("a != 0");
        let y = ProjPoint::new([b, a, y3, d + r]).expect("a != 0");
        return FiberResult::Unique(y);
    }
    if c.square() != b * d {
        return FiberResult::Empty;
    }
    let base = ProjPoint::new([b, f.zero(), f.zero(), d]).expect("(b, d) != 0 on a nonzero target");
    let direction = ProjPoint::e_bad_y(f);
    let mut points: Vec<ProjPoint> = f
        .elements()
        .map(|y3| ProjPoint::new([b, f.zero(), y3, d]).expect("nonzero"))
        .collect();
    points.push(direction);
    FiberResult::Line {
        base,
        direction,
        points,
    }
}

/// One step of the Frobenius action on z-coordinates of `|2Θ|`.
pub fn frobenius_step(p: &ProjPoint, mu: FieldElement) -> Result<ProjPoint, MapError> {
    if mu.field() != p.field() {
        return Err(FieldError::FieldMismatch.into());
    }
    if *p == ProjPoint::e_bad_z(mu) {
        return Err(MapError::ExcludedPoint);
    }
    let [a, b, c, d] = p.coords;
    let (a2, b2, c2, d2) = (a.square(), b.square(), c.square(), d.square());
    let (a4, b4, c4, d4) = (a2.square(), b2.square(), c2.square(), d2.square());
    let (mu2, mu4) = (mu.square(), mu.pow(4));
    ProjPoint::new([
        mu4 * a4 + b4,
        a4,
        a2 * d2 + b2 * c2,
        mu4 * c4 + d4 + mu2 * a4 + a2 * b2,
    ])
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct OrbitSummary {
    pub start: ProjPoint,
    pub preperiod: u64,
    pub period: u64,
    /// First point of the cycle reached from `start`.
    pub cycle_start: ProjPoint,
    /// Step-map evaluations spent.
    pub evaluations: u64,
}

/// Brent's cycle detection. `max_steps` bounds `preperiod + period`; the
/// default is the number of points of `P^3`.
pub fn orbit(
    start: &ProjPoint,
    mu: FieldElement,
    max_steps: Option<u64>,
) -> Result<OrbitSummary, MapError> {
    let limit = max_steps.unwrap_or_else(|| point_count(start.field()));
    let step = |p: &ProjPoint| frobenius_step(p, mu);
    let mut evaluations = 0u64;
    let mut power = 1u64;
    let mut lam = 1u64;
    let mut tortoise = *start;
    let mut hare = step(start)?;
    evaluations += 1;
    while tortoise != hare {
        if power == lam {
            tortoise = hare;
            power *= 2;
            lam = 0;
        }
        hare = step(&hare)?;
        evaluations += 1;
        lam += 1;
        if evaluations > 2 * limit + 2 {
            return Err(MapError::StepLimit { steps: limit });
        }
    }
    let mut tortoise = *start;
    let mut hare = *start;
    for _ in 0..lam {
        hare = step(&hare)?;
    }
    let mut mu_len = 0u64;
    while tortoise != hare {
        tortoise = step(&tortoise)?;
        hare = step(&hare)?;
        mu_len += 1;
    }
    evaluations += lam + 2 * mu_len;
    if mu_len + lam > limit {
        return Err(MapError::StepLimit { steps: limit });
    }
    Ok(OrbitSummary {
        start: *start,
        preperiod: mu_len,
        period: lam,
        cycle_start: tortoise,
        evaluations,
    })
}

const NO_STEP: u32 = u32::MAX;

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
enum FiberClass {
    Unique,
    Empty,
    Line,
}

/// Partial census over an index range; chunks covering `0..N` merge into
/// a full report.
#[derive(Clone, Debug)]
pub struct CensusChunk {
    range: Range<u64>,
    classes: Vec<FiberClass>,
    on_h: Vec<bool>,
    on_kummer: Vec<bool>,
    steps: Vec<u32>,
    /// Preimage counts of every target, over the sources in `range`.
    preimages: Vec<u32>,
    /// Hits on every target by sources with `y2 = 0`.
    h1_hits: Vec<u32>,
    undefined_sources: Vec<u64>,
    violations: BTreeMap<&'static str, Vec<String>>,
}

fn violation(map: &mut BTreeMap<&'static str, Vec<String>>, key: &'static str, msg: String) {
    let v = map.entry(key).or_default();
    if v.len() < 8 {
        v.push(msg);
    }
}

pub fn census_chunk(mu: FieldElement, range: Range<u64>) -> CensusChunk {
    let f = mu.field();
    let n = point_count(f) as usize;
    let len = (range.end - range.start) as usize;
    let mut ch = CensusChunk {
        range: range.clone(),
        classes: Vec::with_capacity(len),
        on_h: Vec::with_capacity(len),
        on_kummer: Vec::with_capacity(len),
        steps: Vec::with_capacity(len),
        preimages: vec![0; n],
        h1_hits: vec![0; n],
        undefined_sources: Vec::new(),
        violations: BTreeMap::new(),
    };
    let e_bad = ProjPoint::e_bad_z(mu);
    for idx in range {
        let p = ProjPoint::from_index(f, idx).expect("index in range");
        // As a target in z-coordinates.
        let fib = fiber(&p);
        let on_h = p.coords[0].is_zero();
        let on_kum = kummer_z_at(&p, mu).is_zero();
        let class = match &fib {
            FiberResult::Unique(y) => {
                if quadric_map(y).ok() != Some(p) {
                    violation(&mut ch.violations, "fiber_roundtrip", format!("{p} <- {y}"));
                }
                FiberClass::Unique
            }
            FiberResult::Empty => FiberClass::Empty,
            FiberResult::Line { points, direction, .. } => {
                let ok = points.len() as u64 == f.order() as u64 + 1
                    && points.contains(direction)
                    && points
                        .iter()
                        .filter(|y| *y != direction)
                        .all(|y| quadric_map(y).ok() == Some(p));
                if !ok {
                    violation(&mut ch.violations, "line_fibers", format!("{p}"));
                }
                FiberClass::Line
            }
        };
        let expected = match (on_h, on_kum) {
            (false, _) => FiberClass::Unique,
            (true, false) => FiberClass::Empty,
            (true, true) => FiberClass::Line,
        };
        if class != expected {
            violation(&mut ch.violations, "fiber_trichotomy", format!("{p}: {}", fib.kind()));
        }
        ch.classes.push(class);
        ch.on_h.push(on_h);
        ch.on_kummer.push(on_kum);

        // As a source in y-coordinates.
        match quadric_map(&p) {
            Ok(img) => {
                let j = img.index() as usize;
                ch.preimages[j] += 1;
                if p.coords[1].is_zero() {
                    ch.h1_hits[j] += 1;
                }
            }
            Err(_) => ch.undefined_sources.push(idx),
        }

        // As a point of M_X for the step map.
        if p == e_bad {
            ch.steps.push(NO_STEP);
        } else {
            match frobenius_step(&p, mu) {
                Ok(img) => {
                    if img == e_bad {
                        violation(&mut ch.violations, "step_avoids_excluded", format!("{p}"));
                    }
                    ch.steps.push(img.index() as u32);
                }
                Err(e) => {
                    violation(&mut ch.violations, "step_defined", format!("{p}: {e}"));
                    ch.steps.push(NO_STEP);
                }
            }
        }
    }
    ch
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PeriodStats {
    /// period -> number of cycles with that period
    pub cycles: BTreeMap<u64, u64>,
    /// period -> number of points whose orbit ends in a cycle of that period
    pub points_by_period: BTreeMap<u64, u64>,
    pub max_preperiod: u64,
    pub preperiods: Vec<u64>,
    pub periods: Vec<u64>,
}

/// Preperiod and period of every node of a functional graph; nodes mapped
/// to `NO_STEP` are left out (period 0).
fn periodicity(next: &[u32]) -> PeriodStats {
    let n = next.len();
    let mut state = vec![0u8; n];
    let mut pre = vec![0u64; n];
    let mut per = vec![0u64; n];
    let mut cycles = BTreeMap::new();
    let mut path = Vec::new();
    for s in 0..n {
        if state[s] != 0 || next[s] == NO_STEP {
            continue;
        }
        path.clear();
        let mut v = s;
        while state[v] == 0 {
            state[v] = 1;
            path.push(v);
            v = next[v] as usize;
        }
        if state[v] == 1 {
            let pos = path.iter().position(|&u| u == v).expect("on path");
            let period = (path.len() - pos) as u64;
            *cycles.entry(period).or_insert(0) += 1;
            for &u in &path[pos..] {
                per[u] = period;
                pre[u] = 0;
                state[u] = 2;
            }
            path.truncate(pos);
        }
        for &u in path.iter().rev() {
            let w = next[u] as usize;
            per[u] = per[w];
            pre[u] = pre[w] + 1;
            state[u] = 2;
        }
    }
    let mut points_by_period = BTreeMap::new();
    for (i, &p) in per.iter().enumerate() {
        if next[i] != NO_STEP {
            *points_by_period.entry(p).or_insert(0) += 1;
        }
    }
    PeriodStats {
        cycles,
        points_by_period,
        max_preperiod: pre.iter().copied().max().unwrap_or(0),
        preperiods: pre,
        periods: per,
    }
}

#[derive(Clone, Debug)]
pub struct CensusReport {
    pub degree: u32,
    pub mu: FieldElement,
    pub points: u64,
    pub off_h: u64,
    pub h_off_kummer: u64,
    pub kummer_h: u64,
    pub on_kummer: u64,
    pub fiber_unique: u64,
    pub fiber_empty: u64,
    pub fiber_line: u64,
    pub period_stats: PeriodStats,
    pub invariants: Vec<Check>,
}

impl CensusReport {
    pub fn all_hold(&self) -> bool {
        self.invariants.iter().all(|c| c.is_certified())
    }
}

/// Brent is rerun from this many starting points (all when fewer).
const BRENT_SAMPLE: u64 = 512;

/// Merges chunks (in any order) that together cover every index.
pub fn census_merge(mu: FieldElement, mut chunks: Vec<CensusChunk>) -> CensusReport {
    let f = mu.field();
    let n = point_count(f);
    let q = f.order() as u64;
    chunks.sort_by_key(|c| c.range.start);
    let covered = chunks
        .iter()
        .try_fold(0u64, |e, c| (e == c.range.start).then_some(c.range.end));
    assert_eq!(covered, Some(n), "chunks must tile the index range");

    let mut classes = Vec::with_capacity(n as usize);
    let mut on_h = Vec::with_capacity(n as usize);
    let mut on_kum = Vec::with_capacity(n as usize);
    let mut steps = Vec::with_capacity(n as usize);
    let mut preimages = vec![0u32; n as usize];
    let mut h1_hits = vec![0u32; n as usize];
    let mut undefined = Vec::new();
    let mut violations: BTreeMap<&'static str, Vec<String>> = BTreeMap::new();
    for ch in chunks {
        classes.extend(ch.classes);
        on_h.extend(ch.on_h);
        on_kum.extend(ch.on_kummer);
        steps.extend(ch.steps);
        for (a, b) in preimages.iter_mut().zip(ch.preimages) {
            *a += b;
        }
        for (a, b) in h1_hits.iter_mut().zip(ch.h1_hits) {
            *a += b;
        }
        undefined.extend(ch.undefined_sources);
        for (k, v) in ch.violations {
            for m in v {
                violation(&mut violations, k, m);
            }
        }
    }

    let count = |pred: &dyn Fn(usize) -> bool| (0..n as usize).filter(|&i| pred(i)).count() as u64;
    let off_h = count(&|i| !on_h[i]);
    let h_off_kummer = count(&|i| on_h[i] && !on_kum[i]);
    let kummer_h = count(&|i| on_h[i] && on_kum[i]);
    let fiber_unique = count(&|i| classes[i] == FiberClass::Unique);
    let fiber_empty = count(&|i| classes[i] == FiberClass::Empty);
    let fiber_line = count(&|i| classes[i] == FiberClass::Line);

    let mut inv = Vec::new();
    let named = |v: &BTreeMap<&'static str, Vec<String>>, key: &'static str, what: &str| {
        match v.get(key) {
            None => Check::exact(key, true, what),
            Some(m) => Check::exact(key, false, format!("{what}; counterexamples {m:?}")),
        }
    };
    inv.push(named(&violations, "fiber_trichotomy", "off H: one preimage; H off Kum: none; Kum on H: a line"));
    inv.push(named(&violations, "fiber_roundtrip", "quadric_map inverts unique fibers"));
    inv.push(named(&violations, "line_fibers", "line fibers have q+1 points through E_bad"));

    // Brute-force preimage counts against the fiber solver.
    let mut mismatches = Vec::new();
    for i in 0..n as usize {
        let expect = match classes[i] {
            FiberClass::Unique => 1,
            FiberClass::Empty => 0,
            FiberClass::Line => q as u32,
        };
        if preimages[i] != expect && mismatches.len() < 8 {
            mismatches.push(i as u64);
        }
    }
    inv.push(Check::exact(
        "preimage_counts",
        mismatches.is_empty(),
        format!("brute-force preimages agree with fiber (the base point completes each line); mismatched indices {mismatches:?}"),
    ));
    let total: u64 = preimages.iter().map(|&c| c as u64).sum();
    let book = off_h + q * kummer_h;
    inv.push(Check::exact(
        "degree_bookkeeping",
        total == n - 1 && book == total,
        format!("1*{off_h} + 0*{h_off_kummer} + {q}*{kummer_h} = {book}; defined sources {total}; points {n}"),
    ));
    let base_idx = ProjPoint::e_bad_y(f).index();
    inv.push(Check::exact(
        "base_point_unique",
        undefined == [base_idx],
        format!("sources where all four quadrics vanish: {:?}", undefined.iter().map(|&i| ProjPoint::from_index(f, i).expect("valid")).collect::<Vec<_>>().iter().map(|p| format!("{p}")).collect::<Vec<_>>()),
    ));
    let nonempty_h = count(&|i| on_h[i] && classes[i] != FiberClass::Empty);
    let h1_image_ok = (0..n as usize).all(|i| (h1_hits[i] > 0) == (on_h[i] && on_kum[i]));
    inv.push(Check::exact(
        "h1_image_is_kummer_h",
        h1_image_ok && nonempty_h == kummer_h,
        format!("image of y2 = 0 equals the {kummer_h} rational points of Kum_X on H"),
    ));
    inv.push(named(&violations, "step_avoids_excluded", "the step never lands on (0:0:1:mu)"));
    inv.push(named(&violations, "step_defined", "the step is defined away from (0:0:1:mu)"));

    let stats = periodicity(&steps);
    let domain = steps.iter().filter(|&&s| s != NO_STEP).count() as u64;
    let periodic = (0..n as usize).all(|i| steps[i] == NO_STEP || stats.periods[i] >= 1);
    inv.push(Check::exact(
        "orbits_periodic",
        periodic && domain == n - 1 && stats.max_preperiod + stats.cycles.keys().max().copied().unwrap_or(0) <= n,
        format!("{domain} points; max preperiod {}", stats.max_preperiod),
    ));
    let stride = (n / BRENT_SAMPLE).max(1);
    let mut brent_bad = Vec::new();
    let mut i = 0;
    while i < n {
        if steps[i as usize] != NO_STEP {
            let p = ProjPoint::from_index(f, i).expect("valid");
            match orbit(&p, mu, None) {
                Ok(o) if o.preperiod == stats.preperiods[i as usize] && o.period == stats.periods[i as usize] => {}
                _ => brent_bad.push(format!("{p}")),
            }
        }
        i += stride;
    }
    inv.push(Check::exact(
        "brent_agrees",
        brent_bad.is_empty(),
        format!("Brent rerun every {stride} points; disagreements {brent_bad:?}"),
    ));

    CensusReport {
        degree: f.degree(),
        mu,
        points: n,
        off_h,
        h_off_kummer,
        kummer_h,
        on_kummer: count(&|i| on_kum[i]),
        fiber_unique,
        fiber_empty,
        fiber_line,
        period_stats: stats,
        invariants: inv,
    }
}

/// Splits `0..point_count` into at most `parts` contiguous ranges.
pub fn census_ranges(field: FieldParams, parts: usize) -> Vec<Range<u64>> {
    let n = point_count(field);
    let parts = (parts.max(1) as u64).min(n);
    (0..parts)
        .map(|k| (n * k / parts)..(n * (k + 1) / parts))
        .collect()
}

pub fn census(mu: FieldElement) -> Result<CensusReport, FieldError> {
    let f = mu.field();
    if f.degree() > MAX_ENUMERATION_DEGREE {
        return Err(FieldError::DegreeOutOfRange { degree: f.degree() });
    }
    Ok(census_merge(mu, vec![census_chunk(mu, 0..point_count(f))]))
}

/// The step map as the composite: Frobenius on coordinates, the change
/// from z to y on the twist, then the terminal quadrics. Compared with the
/// quartic formula over GF(2)[mu, a, b, c, d].
pub fn composite_identity() -> Check {
    use crate::verschiebung::{
        coordinate_change_symbolic, symbolic_vars, terminal_quadrics_symbolic, CoordSystem, QuadricSystem,
    };
    let name = "frobenius_composite";
    let v = symbolic_vars(CoordSystem::Z);
    let n: Vec<&str> = v.iter().map(|s| s.as_str()).collect();
    let p = |t: &str| crate::mpoly::Gf2Poly::parse(&n, t);
    let frob = QuadricSystem::new(
        CoordSystem::Z,
        CoordSystem::ZTwisted,
        2,
        [p("z1^2"), p("z2^2"), p("z3^2"), p("zinf^2")],
    );
    let display = [
        p("mu^4*z1^4 + z2^4"),
        p("z1^4"),
        p("z1^2*zinf^2 + z2^2*z3^2"),
        p("mu^4*z3^4 + zinf^4 + mu^2*z1^4 + z1^2*z2^2"),
    ];
    let composite = coordinate_change_symbolic(true, true)
        .compose(&frob)
        .and_then(|c| terminal_quadrics_symbolic().compose(&c));
    match composite {
        Ok(c) => Check::exact(name, c.polys == display && c.degree == 4, "over GF(2)[mu, a, b, c, d]"),
        Err(e) => Check::new(name, crate::cert::Status::Failed, format!("{e}")),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::string::ToString;

    fn gf(m: u32) -> FieldParams {
        FieldParams::new(m).unwrap()
    }

    fn pt(f: FieldParams, s: &str) -> ProjPoint {
        ProjPoint::parse(f, s).unwrap()
    }

    #[test]
    fn normalization_and_parsing() {
        let f = gf(4);
        let p = pt(f, "0:3:6:0");
        assert_eq!(p.coords()[1], f.one());
        assert_eq!(p.to_string(), "0:1:2:0");
        assert!(matches!(ProjPoint::parse(f, "0:0:0:0"), Err(MapError::ZeroPoint)));
        assert!(ProjPoint::parse(f, "1:2:3").is_err());
        assert!(ProjPoint::parse(f, "1:2:3:10").is_err());
    }

    #[test]
    fn index_is_a_bijection() {
        for m in 1..=3 {
            let f = gf(m);
            let n = point_count(f);
            for i in 0..n {
                let p = ProjPoint::from_index(f, i).unwrap();
                assert_eq!(p.index(), i);
            }
            assert!(ProjPoint::from_index(f, n).is_none());
        }
    }

    #[test]
    fn step_examples() {
        let f = gf(8);
        let mu = f.element(0x53).unwrap();
        let d = pt(f, "0:0:0:1");
        assert_eq!(frobenius_step(&d, mu).unwrap(), d);
        assert_eq!(frobenius_step(&pt(f, "0:1:0:0"), mu).unwrap(), pt(f, "1:0:0:0"));
        let img = frobenius_step(&pt(f, "1:0:0:0"), mu).unwrap();
        let expect = ProjPoint::new([mu.pow(4), f.one(), f.zero(), mu.square()]).unwrap();
        assert_eq!(img, expect);
        assert!(matches!(
            frobenius_step(&ProjPoint::e_bad_z(mu), mu),
            Err(MapError::ExcludedPoint)
        ));
    }

    #[test]
    fn fiber_examples() {
        let f = gf(1);
        assert_eq!(fiber(&pt(f, "1:1:1:1")), FiberResult::Unique(pt(f, "1:1:1:0")));
        assert_eq!(quadric_map(&pt(f, "1:1:1:0")).unwrap(), pt(f, "1:1:1:1"));
        assert_eq!(fiber(&pt(f, "0:0:1:0")), FiberResult::Empty);
        match fiber(&pt(f, "0:1:0:0")) {
            FiberResult::Line { base, points, .. } => {
                assert_eq!(base, pt(f, "1:0:0:0"));
                assert_eq!(points.len(), 3);
                assert!(points.contains(&ProjPoint::e_bad_y(f)));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn orbit_examples() {
        let f = gf(1);
        let o = orbit(&pt(f, "0:1:0:0"), f.zero(), None).unwrap();
        assert_eq!((o.preperiod, o.period), (0, 2));
        let o = orbit(&pt(f, "0:0:0:1"), f.one(), None).unwrap();
        assert_eq!((o.preperiod, o.period), (0, 1));
        assert!(matches!(
            orbit(&pt(f, "0:0:1:1"), f.one(), None),
            Err(MapError::ExcludedPoint)
        ));
        // (0:0:1:0) is the excluded point only for mu = 0.
        assert_eq!(frobenius_step(&pt(f, "0:0:1:0"), f.one()).unwrap(), pt(f, "0:0:0:1"));
        assert!(matches!(
            orbit(&pt(f, "0:0:1:0"), f.zero(), None),
            Err(MapError::ExcludedPoint)
        ));
        let g = gf(12);
        let o = orbit(&pt(g, "0:0:0:1"), g.element(0x777).unwrap(), None).unwrap();
        assert_eq!((o.preperiod, o.period), (0, 1));
    }

    #[test]
    fn composite_matches_step() {
        assert!(composite_identity().is_certified());
        let f = gf(5);
        let mu = f.element(0x13).unwrap();
        let ch = crate::verschiebung::coordinate_changes(mu).z_to_y_twisted;
        for i in (0..point_count(f)).step_by(97) {
            let p = ProjPoint::from_index(f, i).unwrap();
            if p == ProjPoint::e_bad_z(mu) {
                continue;
            }
            let sq = ProjPoint::new(p.coords().map(|c| c.square())).unwrap();
            let via = quadric_map(&ch.apply(&sq)).unwrap();
            assert_eq!(frobenius_step(&p, mu).unwrap(), via);
        }
    }

    #[test]
    fn small_census() {
        let f = gf(1);
        let r = census(f.zero()).unwrap();
        assert_eq!(r.points, 15);
        assert!(r.all_hold(), "{:?}", r.invariants);
        assert_eq!(r.off_h, 8);
        assert_eq!(r.off_h + r.h_off_kummer + r.kummer_h, 15);
    }

    #[test]
    fn chunked_census_matches() {
        let f = gf(3);
        let mu = f.element(5).unwrap();
        let whole = census(mu).unwrap();
        let chunks = census_ranges(f, 7).into_iter().rev().map(|r| census_chunk(mu, r)).collect();
        let merged = census_merge(mu, chunks);
        assert_eq!(whole.period_stats, merged.period_stats);
        assert_eq!(whole.kummer_h, merged.kummer_h);
        assert!(merged.all_hold());
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn field() -> impl Strategy<Value = FieldParams> {
            prop_oneof![Just(5u32), Just(16), Just(31), Just(64)].prop_map(gf)
        }

        fn point_in(f: FieldParams) -> impl Strategy<Value = ProjPoint> {
            let m = f.mask();
            proptest::array::uniform4(0..=m)
                .prop_filter("nonzero", |c| c.iter().any(|&x| x != 0))
                .prop_map(move |c| ProjPoint::from_bits(f, c).unwrap())
        }

        fn setup() -> impl Strategy<Value = (FieldElement, ProjPoint)> {
            field().prop_flat_map(|f| ((0..=f.mask()).prop_map(move |b| f.element(b).unwrap()), point_in(f)))
        }

        proptest! {
            #[test]
            fn fiber_classes_match_the_target((mu, p) in setup()) {
                let on_h = p.coords()[0].is_zero();
                let on_kum = kummer_z_at(&p, mu).is_zero();
                match fiber(&p) {
                    FiberResult::Unique(y) => {
                        prop_assert!(!on_h);
                        prop_assert_eq!(quadric_map(&y).unwrap(), p);
                    }
                    FiberResult::Empty => prop_assert!(on_h && !on_kum),
                    FiberResult::Line { base, direction, .. } => {
                        prop_assert!(on_h && on_kum);
                        prop_assert_eq!(direction, ProjPoint::e_bad_y(p.field()));
                        prop_assert_eq!(quadric_map(&base).unwrap(), p);
                    }
                }
            }

            #[test]
            fn every_source_lies_in_the_fiber_of_its_image((_mu, y) in setup()) {
                prop_assume!(y != ProjPoint::e_bad_y(y.field()));
                let z = quadric_map(&y).unwrap();
                match fiber(&z) {
                    FiberResult::Unique(u) => prop_assert_eq!(u, y),
                    FiberResult::Empty => prop_assert!(false, "{} maps to {} with empty fiber", y, z),
                    FiberResult::Line { base, direction, .. } => {
                        // y = base + t * direction for some t.
                        let [b1, b2, _, b4] = *base.coords();
                        let [y1, y2, _, y4] = *y.coords();
                        prop_assert_eq!(direction, ProjPoint::e_bad_y(y.field()));
                        prop_assert!(y1 * b2 == y2 * b1 && y1 * b4 == y4 * b1 && y2 * b4 == y4 * b2);
                    }
                }
            }

            #[test]
            fn step_never_lands_on_the_excluded_point((mu, p) in setup()) {
                if let Ok(q) = frobenius_step(&p, mu) {
                    prop_assert_ne!(q, ProjPoint::e_bad_z(mu));
                }
            }
        }
    }
}
