//! The quadric systems of the Verschiebung: the theta quadrics `P`, their
//! pullbacks `Q` to z-coordinates, the normalized map `R`, its leading
//! forms, the coordinate changes and the Kummer quartics.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::cert::{Check, Status};
use crate::deformation::{Consts, DeformationScalars, Matrix4};
use crate::dynamics::ProjPoint;
use crate::error::{CurveError, MapError, PolyError, SeriesError};
use crate::gf2m::FieldElement;
use crate::laurent::{Agreement, LaurentSeries, EXACT};
use crate::mpoly::{var_names, Coeff, Gf2, Gf2Poly, MultiPoly};

pub type SeriesPoly = MultiPoly<LaurentSeries>;
pub type FieldPoly = MultiPoly<FieldElement>;

#[derive(Clone, Copy, PartialEq, Eq, Debug, Hash)]
pub enum CoordSystem {
    /// Theta coordinates `x_B, x_0, x_1, x_inf` on `|2Θ|`.
    Theta,
    /// Theta coordinates on the twist `|2Θ_1|`.
    ThetaTwisted,
    Z,
    ZTwisted,
    Y,
    YTwisted,
}

impl CoordSystem {
    pub fn name(&self) -> &'static str {
        match self {
            CoordSystem::Theta => "x",
            CoordSystem::ThetaTwisted => "x(twisted)",
            CoordSystem::Z => "z",
            CoordSystem::ZTwisted => "z(twisted)",
            CoordSystem::Y => "y",
            CoordSystem::YTwisted => "y(twisted)",
        }
    }

    pub fn var_names(&self) -> [&'static str; 4] {
        match self {
            CoordSystem::Theta | CoordSystem::ThetaTwisted => THETA_VARS,
            CoordSystem::Z | CoordSystem::ZTwisted => Z_VARS,
            CoordSystem::Y | CoordSystem::YTwisted => Y_VARS,
        }
    }
}

pub const THETA_VARS: [&str; 4] = ["xB", "x0", "x1", "xinf"];
pub const Z_VARS: [&str; 4] = ["z1", "z2", "z3", "zinf"];
pub const Y_VARS: [&str; 4] = ["y1", "y2", "y3", "yinf"];

/// Variable list of a symbolic system: `mu` followed by the coordinates.
pub fn symbolic_vars(sys: CoordSystem) -> Vec<String> {
    let [a, b, c, d] = sys.var_names();
    var_names(&["mu", a, b, c, d])
}

/// Four homogeneous forms of one degree, mapping points with coordinates
/// in `source` to points with coordinates in `target`. Variables named
/// `mu` are parameters and do not count towards the degree.
#[derive(Clone, Debug, PartialEq)]
pub struct QuadricSystem<C: Coeff> {
    pub source: CoordSystem,
    pub target: CoordSystem,
    pub degree: u32,
    pub polys: [MultiPoly<C>; 4],
}

fn homogeneous_in_coords<C: Coeff>(p: &MultiPoly<C>, degree: u32) -> bool {
    let skip: Vec<bool> = p.vars().iter().map(|v| v == "mu").collect();
    p.terms().all(|(m, _)| {
        let d: u32 = m.0.iter().zip(&skip).filter(|(_, s)| !**s).map(|(e, _)| *e).sum();
        d == degree
    })
}

impl<C: Coeff> QuadricSystem<C> {
    pub fn new(
        source: CoordSystem,
        target: CoordSystem,
        degree: u32,
        polys: [MultiPoly<C>; 4],
    ) -> Self {
        debug_assert!(polys.iter().all(|p| homogeneous_in_coords(p, degree)));
        QuadricSystem {
            source,
            target,
            degree,
            polys,
        }
    }

    pub fn is_homogeneous(&self) -> bool {
        self.polys.iter().all(|p| homogeneous_in_coords(p, self.degree))
    }

    /// `self ∘ inner`; `inner` must land in the coordinates `self` reads.
    pub fn compose(&self, inner: &QuadricSystem<C>) -> Result<QuadricSystem<C>, PolyError> {
        if inner.target != self.source {
            return Err(PolyError::CoordinateMismatch {
                expected: self.source.name(),
                found: inner.target.name(),
            });
        }
        let names = self.source.var_names();
        let assign: Vec<(&str, &MultiPoly<C>)> =
            names.iter().copied().zip(inner.polys.iter()).collect();
        let mut out = Vec::with_capacity(4);
        for p in &self.polys {
            out.push(p.substitute(&assign)?);
        }
        Ok(QuadricSystem {
            source: inner.source,
            target: self.target,
            degree: self.degree * inner.degree,
            polys: out.try_into().expect("four forms"),
        })
    }
}

fn tagged<C: Coeff>(a: &QuadricSystem<C>, b: &QuadricSystem<C>) -> Result<(), PolyError> {
    if a.source != b.source || a.target != b.target {
        return Err(PolyError::CoordinateMismatch {
            expected: a.source.name(),
            found: b.source.name(),
        });
    }
    Ok(())
}

fn gf2_to_series(p: &Gf2Poly, f: crate::gf2m::FieldParams) -> SeriesPoly {
    p.map_coeffs(|c| {
        if c.0 {
            LaurentSeries::one(f)
        } else {
            LaurentSeries::exact_zero(f)
        }
    })
}

/// Specializes `mu` (the first variable) of a symbolic polynomial.
pub fn specialize(p: &Gf2Poly, mu: FieldElement) -> FieldPoly {
    let vars = p.vars()[1..].to_vec();
    let terms: Vec<(Vec<u32>, FieldElement)> = p
        .terms()
        .map(|(m, _)| (m.0[1..].to_vec(), mu.pow(m.0[0] as u128)))
        .collect();
    MultiPoly::from_terms(vars, terms)
}

fn specialize_system(s: &QuadricSystem<Gf2>, mu: FieldElement) -> QuadricSystem<FieldElement> {
    QuadricSystem::new(s.source, s.target, s.degree, s.polys.each_ref().map(|p| specialize(p, mu)))
}

/// The four theta quadrics, over GF(2).
pub fn p_quadrics() -> QuadricSystem<Gf2> {
    let v = &THETA_VARS;
    let p = |t| Gf2Poly::parse(v, t);
    QuadricSystem::new(
        CoordSystem::ThetaTwisted,
        CoordSystem::Theta,
        2,
        [
            p("xB^2 + x0^2 + x1^2 + xinf^2"),
            p("xB*x0 + x1*xinf"),
            p("xB*x1 + x0*xinf"),
            p("xB*xinf + x0*x1"),
        ],
    )
}

/// The basis change as linear forms in z; `twisted` squares the entries.
pub fn basis_system(m: &Matrix4, twisted: bool) -> QuadricSystem<LaurentSeries> {
    let m = if twisted { m.squared_entries() } else { m.clone() };
    let zv = var_names(&Z_VARS);
    let polys = core::array::from_fn(|i| {
        MultiPoly::from_terms(
            zv.clone(),
            (0..4).map(|j| {
                let mut e = vec![0; 4];
                e[j] = 1;
                (e, m.0[i][j].clone())
            }),
        )
    });
    let (src, tgt) = if twisted {
        (CoordSystem::ZTwisted, CoordSystem::ThetaTwisted)
    } else {
        (CoordSystem::Z, CoordSystem::Theta)
    };
    QuadricSystem::new(src, tgt, 1, polys)
}

/// Coefficientwise agreement of two series polynomials.
pub fn poly_agreement(a: &SeriesPoly, b: &SeriesPoly) -> Agreement {
    let d = a + b;
    let mut known = EXACT;
    for (_, c) in d.terms() {
        match c.agreement(&c.zero_like()) {
            Agreement::Equal { known_below } => known = known.min(known_below),
            diff => return diff,
        }
    }
    Agreement::Equal { known_below: known }
}

fn system_check(name: &str, a: &QuadricSystem<LaurentSeries>, b: &QuadricSystem<LaurentSeries>) -> Check {
    if let Err(e) = tagged(a, b) {
        return Check::new(name, Status::Failed, format!("{e}"));
    }
    let mut known = EXACT;
    for i in 0..4 {
        match poly_agreement(&a.polys[i], &b.polys[i]) {
            Agreement::Equal { known_below } => known = known.min(known_below),
            diff => return Check::series(name, &diff).with_detail(format!("form {i}: {}", Check::series(name, &diff).detail)),
        }
    }
    Check::series(name, &Agreement::Equal { known_below: known })
}

fn term(exps: [u32; 4], c: LaurentSeries) -> (Vec<u32>, LaurentSeries) {
    (exps.to_vec(), c)
}

/// The displayed `Q` quadrics.
pub fn q_displays(s: &DeformationScalars) -> QuadricSystem<LaurentSeries> {
    let k = Consts::new(s.mu, s.omega);
    let zv = var_names(&Z_VARS);
    let mu2 = s.mu.square();
    let c = |e: FieldElement, j: i64| k.cs(e, j);
    let one = k.one();
    let (w2, w4, w6, w8) = (k.wp(2), k.wp(4), k.wp(6), k.wp(8));
    let (n0, n1) = (&s.nu0, &s.nu1);
    let sq = |x: LaurentSeries| x.square();
    let t01 = &s.tau0 * &s.tau1;

    let kb = t01.pow(4);
    let qb = MultiPoly::from_terms(
        zv.clone(),
        vec![
            term([2, 0, 0, 0], sq(&(n0 * n1) + &c(mu2.square() * w4, 8))),
            term([0, 2, 0, 0], &k.s(8) * &sq(&n0.scale(w4) + n1)),
            term([0, 0, 2, 0], &k.s(16) * &sq(&n0.scale(w8) + n1)),
            term([0, 0, 0, 2], c(w8 * k.w1(8), 24)),
        ],
    )
    .scale(&kb);

    let common = |w_a: FieldElement, w_b: FieldElement, w_c: FieldElement, w_d: FieldElement| {
        vec![
            term([0, 2, 0, 0], c(w_a * k.w1(4), 8)),
            term([0, 1, 1, 0], c(w4 * k.w1(4), 12)),
            term([1, 0, 0, 1], c(w4 * k.w1(4), 12)),
            term([0, 0, 2, 0], c(w_b * k.w1(8), 16)),
            term([0, 1, 0, 1], c(w_c * k.w1(4), 16)),
            term([0, 0, 1, 1], c(w_c * w_d * k.w1(4), 20)),
        ]
    };
    let k0 = &s.tau0.pow(4) * &s.tau1.square();
    let mut t0 = vec![
        term([2, 0, 0, 0], sq(n0 + &c(mu2 * w2, 4))),
        term([1, 1, 0, 0], &c(w4, 4) * &sq(n0 + &c(mu2, 4))),
        term([1, 0, 1, 0], &c(w4, 8) * &sq(&n0.scale(w2) + &c(mu2, 4))),
    ];
    t0.extend(common(one, one, w4, one));
    let q0 = MultiPoly::from_terms(zv.clone(), t0).scale(&k0);

    let k1 = &s.tau0.square() * &s.tau1.pow(4);
    let mut t1 = vec![
        term([2, 0, 0, 0], sq(n1 + &c(mu2 * w2, 4))),
        term([1, 1, 0, 0], &k.s(4) * &sq(n1 + &c(mu2 * w4, 4))),
        term([1, 0, 1, 0], &k.s(8) * &sq(n1 + &c(mu2 * w6, 4))),
    ];
    t1.extend(common(w4, w8, w8, w4));
    let q1 = MultiPoly::from_terms(zv.clone(), t1).scale(&k1);

    let ki = &t01.square() * &c(w4, 8);
    let qi = MultiPoly::from_terms(
        zv,
        vec![
            term([2, 0, 0, 0], k.k(mu2.square())),
            term([0, 2, 0, 0], LaurentSeries::one(k.f)),
            term([0, 1, 1, 0], c(k.w1(4), 4)),
            term([1, 0, 0, 1], c(k.w1(4), 4)),
            term([0, 0, 2, 0], c(w4, 8)),
        ],
    )
    .scale(&ki);
    QuadricSystem::new(CoordSystem::ZTwisted, CoordSystem::Theta, 2, [qb, q0, q1, qi])
}

pub struct QReport {
    pub q: QuadricSystem<LaurentSeries>,
    pub checks: Vec<Check>,
}

/// `Q = P ∘ (basis with squared coefficients)`, compared with the closed forms.
pub fn compute_q(s: &DeformationScalars, basis: &Matrix4) -> Result<QReport, CurveError> {
    let f = s.mu.field();
    let p = p_quadrics();
    let ps = QuadricSystem::new(p.source, p.target, 2, p.polys.each_ref().map(|x| gf2_to_series(x, f)));
    let q = ps.compose(&basis_system(basis, true))?;
    let d = q_displays(s);
    let names = ["q_b_display", "q_0_display", "q_1_display", "q_inf_display"];
    let mut checks = Vec::new();
    for ((name, got), want) in names.iter().zip(&q.polys).zip(&d.polys) {
        checks.push(Check::series(name, &poly_agreement(got, want)));
    }
    checks.push(Check::exact("q_homogeneous", q.is_homogeneous(), "degree 2 in z"));
    Ok(QReport { q, checks })
}

/// The normalized map from the four displayed combinations of `Q`.
pub fn r_from_q(s: &DeformationScalars, q: &QuadricSystem<LaurentSeries>) -> QuadricSystem<LaurentSeries> {
    let k = Consts::new(s.mu, s.omega);
    let inv4 = (&s.tau0_inv * &s.tau1_inv).pow(4);
    let m = |c: FieldElement, j: i64| k.cs(k.inv(c), -j);
    let (w2, w4, w6) = (k.wp(2), k.wp(4), k.wp(6));
    let w16 = (k.one() + s.omega).pow(6);
    let [qb, q0, q1, qi] = &q.polys;
    let r1 = qb.scale(&(&inv4 * &m(w6 * w16, 18)));
    let r2 = (&qb.scale(&m(w6 * k.w1(2), 18)) + &(q0 + q1).scale(&m(k.w1(4), 8)))
        .scale(&(&inv4 * &m(w2 * k.w1(2), 2)));
    let r3 = (&qb.scale(&m(w6 * k.w1(4), 18))
        + &(&q0.scale(&k.k(w2)) + q1).scale(&m(w2 * k.w1(4), 8)))
        .scale(&(&inv4 * &m(w2 * k.w1(2), 4)));
    let lead = &k.k(k.one()) + &k.cs(s.mu.square() * w2, 4);
    let ri = (&(&qb.scale(&(&lead * &m(w6 * w16, 18)))
        + &(&q0.scale(&k.k(w4)) + q1).scale(&m(w4 * k.w1(4), 8)))
        + &qi.scale(&m(w4, 8)))
        .scale(&(&inv4 * &m(w2 * k.w1(2), 6)));
    QuadricSystem::new(CoordSystem::ZTwisted, CoordSystem::Z, 2, [r1, r2, r3, ri])
}

/// `M^{-1} (λ_• Q_•)` with `λ = (sqrt(abc), sqrt(c), sqrt(b), sqrt(a))`.
pub fn r_from_lambda(
    s: &DeformationScalars,
    q: &QuadricSystem<LaurentSeries>,
    basis_inverse: &Matrix4,
) -> Result<QuadricSystem<LaurentSeries>, CurveError> {
    let lam = [
        (&(&s.a * &s.b) * &s.c).sqrt()?,
        s.c.sqrt()?,
        s.b.sqrt()?,
        s.a.sqrt()?,
    ];
    let x: Vec<SeriesPoly> = (0..4).map(|j| q.polys[j].scale(&lam[j])).collect();
    let zv = var_names(&Z_VARS);
    let polys = core::array::from_fn(|i| {
        (0..4).fold(MultiPoly::zero(zv.clone()), |acc, j| &acc + &x[j].scale(&basis_inverse.0[i][j]))
    });
    Ok(QuadricSystem::new(CoordSystem::ZTwisted, CoordSystem::Z, 2, polys))
}

/// The leading forms, over GF(2)[mu].
pub fn leading_forms_symbolic() -> QuadricSystem<Gf2> {
    let v = symbolic_vars(CoordSystem::ZTwisted);
    let v: Vec<&str> = v.iter().map(|s| s.as_str()).collect();
    let p = |t| Gf2Poly::parse(&v, t);
    QuadricSystem::new(
        CoordSystem::ZTwisted,
        CoordSystem::Z,
        2,
        [
            p("mu^4*z1^2 + z2^2"),
            p("z1^2"),
            p("z2*z3 + z1*zinf"),
            p("mu^4*z3^2 + zinf^2 + mu^2*z1^2 + z1*z2"),
        ],
    )
}

/// The quadrics of the terminal form, over GF(2)[mu] (mu is unused).
pub fn terminal_quadrics_symbolic() -> QuadricSystem<Gf2> {
    let v = symbolic_vars(CoordSystem::YTwisted);
    let v: Vec<&str> = v.iter().map(|s| s.as_str()).collect();
    let p = |t| Gf2Poly::parse(&v, t);
    QuadricSystem::new(
        CoordSystem::YTwisted,
        CoordSystem::Z,
        2,
        [p("y2^2"), p("y1^2"), p("y2*y3 + y1*yinf"), p("yinf^2 + y1*y2")],
    )
}

/// Evaluates the terminal quadrics at a point in y-coordinates of
/// `|2Θ_1|`; the result is in z-coordinates of `|2Θ|`.
pub fn quadric_map(y: &ProjPoint) -> Result<ProjPoint, MapError> {
    let [y1, y2, y3, yi] = *y.coords();
    ProjPoint::new([y2.square(), y1.square(), y2 * y3 + y1 * yi, yi.square() + y1 * y2])
        .map_err(|_| MapError::BasePoint)
}

/// The change between z and y: `y2 = z2 + c z1`, `y_inf = z_inf + c z3`
/// with `c = mu` on `|2Θ|` and `c = mu^2` on the twist. In characteristic
/// 2 the inverse has the same shape.
pub fn coordinate_change_symbolic(twisted: bool, to_y: bool) -> QuadricSystem<Gf2> {
    let (z, y) = if twisted {
        (CoordSystem::ZTwisted, CoordSystem::YTwisted)
    } else {
        (CoordSystem::Z, CoordSystem::Y)
    };
    let (src, tgt) = if to_y { (z, y) } else { (y, z) };
    let v = symbolic_vars(src);
    let n: Vec<&str> = v.iter().map(|s| s.as_str()).collect();
    let m = if twisted { "mu^2" } else { "mu" };
    let p = |t: String| Gf2Poly::parse(&n, &t);
    QuadricSystem::new(
        src,
        tgt,
        1,
        [
            p(n[1].into()),
            p(format!("{} + {m}*{}", n[2], n[1])),
            p(n[3].into()),
            p(format!("{} + {m}*{}", n[4], n[3])),
        ],
    )
}

/// A numeric linear change of coordinates.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct LinearChange {
    pub source: CoordSystem,
    pub target: CoordSystem,
    pub matrix: [[FieldElement; 4]; 4],
}

impl LinearChange {
    pub fn apply(&self, p: &ProjPoint) -> ProjPoint {
        let c = p.coords();
        let f = p.field();
        let out = core::array::from_fn(|i| (0..4).fold(f.zero(), |acc, j| acc + self.matrix[i][j] * c[j]));
        ProjPoint::new(out).expect("invertible change")
    }

    pub fn then(&self, next: &LinearChange) -> Option<LinearChange> {
        if next.source != self.target {
            return None;
        }
        let f = self.matrix[0][0].field();
        let matrix = core::array::from_fn(|i| {
            core::array::from_fn(|j| (0..4).fold(f.zero(), |acc, l| acc + next.matrix[i][l] * self.matrix[l][j]))
        });
        Some(LinearChange {
            source: self.source,
            target: next.target,
            matrix,
        })
    }

    pub fn is_identity(&self) -> bool {
        let f = self.matrix[0][0].field();
        (0..4).all(|i| (0..4).all(|j| self.matrix[i][j] == if i == j { f.one() } else { f.zero() }))
    }
}

#[derive(Clone, Copy, Debug)]
pub struct CoordinateChanges {
    pub z_to_y: LinearChange,
    pub y_to_z: LinearChange,
    pub z_to_y_twisted: LinearChange,
    pub y_to_z_twisted: LinearChange,
}

pub fn coordinate_changes(mu: FieldElement) -> CoordinateChanges {
    let f = mu.field();
    let make = |c: FieldElement, source, target| {
        let mut m = [[f.zero(); 4]; 4];
        for (i, row) in m.iter_mut().enumerate() {
            row[i] = f.one();
        }
        m[1][0] = c;
        m[3][2] = c;
        LinearChange {
            source,
            target,
            matrix: m,
        }
    };
    use CoordSystem::*;
    CoordinateChanges {
        z_to_y: make(mu, Z, Y),
        y_to_z: make(mu, Y, Z),
        z_to_y_twisted: make(mu.square(), ZTwisted, YTwisted),
        y_to_z_twisted: make(mu.square(), YTwisted, ZTwisted),
    }
}

pub fn coordinate_change_checks(mu: FieldElement) -> Vec<Check> {
    let c = coordinate_changes(mu);
    let round = |a: &LinearChange, b: &LinearChange| {
        a.then(b).is_some_and(|m| m.is_identity()) && b.then(a).is_some_and(|m| m.is_identity())
    };
    let f = mu.field();
    let e_bad_z = c.y_to_z.apply(&ProjPoint::e_bad_y(f));
    let mut checks = vec![
        Check::exact("coordinate_change_inverse", round(&c.z_to_y, &c.y_to_z), "|2Θ|"),
        Check::exact(
            "coordinate_change_inverse_twisted",
            round(&c.z_to_y_twisted, &c.y_to_z_twisted),
            "|2Θ_1|",
        ),
        Check::exact(
            "e_bad_z_coordinates",
            e_bad_z == ProjPoint::e_bad_z(mu) && c.z_to_y.apply(&e_bad_z) == ProjPoint::e_bad_y(f),
            format!("(0:0:1:0) in y is {e_bad_z} in z"),
        ),
    ];
    let mut sym_ok = true;
    for tw in [false, true] {
        let fwd = coordinate_change_symbolic(tw, true);
        let back = coordinate_change_symbolic(tw, false);
        let v = symbolic_vars(back.source);
        let id: [Gf2Poly; 4] = core::array::from_fn(|i| Gf2Poly::var(v.clone(), &v[i + 1], Gf2::ONE).expect("var"));
        sym_ok &= fwd.compose(&back).is_ok_and(|r| r.polys == id);
    }
    checks.push(Check::exact("coordinate_change_inverse_symbolic", sym_ok, "over GF(2)[mu]"));
    checks
}

/// The leading forms, moved to y-coordinates of the twist, are exactly
/// the terminal quadrics.
pub fn terminal_certificate_symbolic() -> Check {
    let lead = leading_forms_symbolic();
    let ch = coordinate_change_symbolic(true, false);
    match lead.compose(&ch) {
        Ok(r) => Check::exact(
            "terminal_quadrics_symbolic",
            r == terminal_quadrics_symbolic(),
            "leading forms in y-coordinates over GF(2)[mu]",
        ),
        Err(e) => Check::new("terminal_quadrics_symbolic", Status::Failed, format!("{e}")),
    }
}

/// Only `y1 = y2 = y_inf = 0` kills `y2^2`, `y1^2`, `y_inf^2 + y1 y2`, and
/// the remaining quadric vanishes there.
pub fn base_point_argument() -> Check {
    let t = terminal_quadrics_symbolic();
    let v = symbolic_vars(CoordSystem::YTwisted);
    let var = |i: usize| Gf2Poly::var(v.clone(), &v[i], Gf2::ONE).expect("var");
    let forced = t.polys[0] == var(2).square()
        && t.polys[1] == var(1).square()
        && &t.polys[3] + &(&var(1) * &var(2)) == var(4).square();
    let zero = Gf2Poly::zero(v.clone());
    let at = [("y1", &zero), ("y2", &zero), ("yinf", &zero)];
    let vanish = t
        .polys
        .iter()
        .all(|p| p.substitute(&at).is_ok_and(|r| r.is_zero()));
    Check::exact(
        "base_point_forced",
        forced && vanish,
        "the quadrics vanish simultaneously only at (0:0:1:0)",
    )
}

fn constant_layer(p: &SeriesPoly, exponent: i64) -> Result<FieldPoly, SeriesError> {
    let vars = p.vars().to_vec();
    let mut terms = Vec::new();
    for (m, c) in p.terms() {
        let v = c.coeff(exponent).ok_or(SeriesError::InsufficientPrecision {
            available: c.precision(),
            required: exponent + 1,
        })?;
        terms.push((m.0.clone(), v));
    }
    Ok(MultiPoly::from_terms(vars, terms))
}

fn lift(p: &FieldPoly) -> SeriesPoly {
    p.map_coeffs(|c| LaurentSeries::constant(*c))
}

pub struct RReport {
    pub r: QuadricSystem<LaurentSeries>,
    pub leads: QuadricSystem<FieldElement>,
    pub checks: Vec<Check>,
}

/// Least t-valuation among coefficients of `p`, and the precision to which
/// every coefficient is known.
fn poly_valuation(p: &SeriesPoly) -> (Option<i64>, i64) {
    let mut val: Option<i64> = None;
    let mut prec = EXACT;
    for (_, c) in p.terms() {
        prec = prec.min(c.precision());
        if let Some(v) = c.valuation() {
            val = Some(val.map_or(v, |u| u.min(v)));
        }
    }
    (val, prec)
}

/// Builds `R` both ways and extracts and checks the leading forms.
pub fn compute_r(
    s: &DeformationScalars,
    q: &QuadricSystem<LaurentSeries>,
    basis_inverse: &Matrix4,
) -> Result<RReport, CurveError> {
    let r = r_from_q(s, q);
    let mut checks = Vec::new();
    let lam = r_from_lambda(s, q, basis_inverse)?;
    checks.push(lambda_route_check(&lam, &r, s.precision));

    let names = ["r_1", "r_2", "r_3", "r_inf"];
    let expected = specialize_system(&leading_forms_symbolic(), s.mu);
    let mut leads = Vec::new();
    for i in 0..4 {
        let (val, prec) = poly_valuation(&r.polys[i]);
        let integral = match val {
            Some(v) if v < 0 && v < prec => Status::Failed,
            _ if prec <= 0 => Status::Inconclusive,
            _ => Status::Certified,
        };
        checks.push(Check::new(
            &format!("{}_integral", names[i]),
            integral,
            format!("least t-valuation {val:?}, known below t^{prec}"),
        ));
        let lead = match constant_layer(&r.polys[i], 0) {
            Ok(l) => l,
            Err(e) => {
                checks.push(Check::new(&format!("{}_leading_form", names[i]), Status::Inconclusive, format!("{e}")));
                leads.push(expected.polys[i].clone());
                continue;
            }
        };
        checks.push(Check::exact(
            &format!("{}_leading_form", names[i]),
            lead == expected.polys[i],
            format!("{lead}"),
        ));
        let rest = &r.polys[i] + &lift(&lead);
        let (val, prec) = poly_valuation(&rest);
        let status = match val {
            Some(v) if v < 0 => Status::Failed,
            Some(v) if v < 4 && v < prec => Status::Discrepancy,
            _ if prec < 4 => Status::Inconclusive,
            _ => Status::Certified,
        };
        let detail = match val {
            Some(v) if v < 4 => format!(
                "remainder after the leading form has s-valuation {} (t^{v}), below s^2: {}",
                crate::laurent::SValuation { t_exponent: v },
                first_low_term(&rest, 4)
            ),
            _ => format!("remainder divisible by s^2, known below t^{prec}"),
        };
        checks.push(Check::new(&format!("{}_remainder_s2", names[i]), status, detail));
        leads.push(lead);
    }
    let leads = QuadricSystem::new(
        CoordSystem::ZTwisted,
        CoordSystem::Z,
        2,
        leads.try_into().expect("four forms"),
    );
    Ok(RReport { r, leads, checks })
}

fn first_low_term(p: &SeriesPoly, below: i64) -> String {
    for (m, c) in p.terms().rev() {
        if let Some(v) = c.valuation() {
            if v < below {
                let name: Vec<String> = m
                    .0
                    .iter()
                    .zip(Z_VARS)
                    .filter(|(e, _)| **e > 0)
                    .map(|(e, n)| if *e == 1 { n.into() } else { format!("{n}^{e}") })
                    .collect();
                let coeff = c.coeff(v).expect("known");
                return format!("{} carries {coeff}*t^{v}", name.join("*"));
            }
        }
    }
    String::new()
}

/// The two constructions of `R` agree up to one common series factor.
fn lambda_route_check(
    lam: &QuadricSystem<LaurentSeries>,
    r: &QuadricSystem<LaurentSeries>,
    cap: i64,
) -> Check {
    let name = "r_lambda_route";
    let key = [2, 0, 0, 0];
    let (Some(a), Some(b)) = (lam.polys[0].coeff(&key), r.polys[0].coeff(&key)) else {
        return Check::new(name, Status::Failed, "missing z1^2 coefficient");
    };
    let ratio = match a.div_capped(b, cap) {
        Ok(x) => x,
        Err(e) => return Check::new(name, Status::Inconclusive, format!("{e}")),
    };
    let scaled = QuadricSystem::new(r.source, r.target, 2, r.polys.each_ref().map(|p| p.scale(&ratio)));
    let c = system_check(name, lam, &scaled);
    let lead = ratio
        .valuation()
        .and_then(|v| ratio.coeff(v).map(|x| format!("{x}*t^{v}")))
        .unwrap_or_default();
    let detail = if c.detail.is_empty() {
        format!("equal up to the factor {lead} + ...")
    } else {
        c.detail.clone()
    };
    c.with_detail(detail)
}

/// The leading forms, moved to y-coordinates, equal the terminal quadrics.
pub fn terminal_certificate(leads: &QuadricSystem<FieldElement>, mu: FieldElement) -> Check {
    let f = mu.field();
    let c = coordinate_changes(mu).y_to_z_twisted;
    let yv = var_names(&Y_VARS);
    let change = QuadricSystem::new(
        CoordSystem::YTwisted,
        CoordSystem::ZTwisted,
        1,
        core::array::from_fn(|i| {
            MultiPoly::from_terms(
                yv.clone(),
                (0..4).filter(|&j| !c.matrix[i][j].is_zero()).map(|j| {
                    let mut e = vec![0; 4];
                    e[j] = 1;
                    (e, c.matrix[i][j])
                }),
            )
        }),
    );
    let expect = specialize_system(&terminal_quadrics_symbolic(), mu);
    match leads.compose(&change) {
        Ok(r) => Check::exact(
            "terminal_quadrics",
            r == expect,
            format!("{}, {}, {}, {}", r.polys[0], r.polys[1], r.polys[2], r.polys[3]),
        ),
        Err(e) => Check::new("terminal_quadrics", Status::Failed, format!("{e} over GF(2^{})", f.degree())),
    }
}

/// Kum_X in z-coordinates, over GF(2)[mu].
pub fn kummer_z_symbolic() -> Gf2Poly {
    let v = symbolic_vars(CoordSystem::Z);
    let v: Vec<&str> = v.iter().map(|s| s.as_str()).collect();
    Gf2Poly::parse(
        &v,
        "mu^2*z1^3*z2 + z1^3*zinf + z1^2*z2*z3 + mu^4*z1^2*z3^2 + z1*z2^3 + z2^2*zinf^2 + z3^4",
    )
}

/// Kum_{X_1} in y-coordinates, over GF(2)[mu].
pub fn kummer_y1_symbolic() -> Gf2Poly {
    let v = symbolic_vars(CoordSystem::YTwisted);
    let v: Vec<&str> = v.iter().map(|s| s.as_str()).collect();
    Gf2Poly::parse(
        &v,
        "y1^3*yinf + mu^2*y1^2*y2^2 + y1^2*y2*y3 + mu^4*y1^2*yinf^2 + mu^4*y2^2*y3^2 + y1*y2^3 + y2^2*yinf^2 + y3^4",
    )
}

/// Kum_X at a point in z-coordinates.
pub fn kummer_z_at(p: &ProjPoint, mu: FieldElement) -> FieldElement {
    let [z1, z2, z3, zi] = *p.coords();
    let (mu2, mu4) = (mu.square(), mu.pow(4));
    let z1s = z1.square();
    mu2 * z1s * z1 * z2
        + z1s * z1 * zi
        + z1s * z2 * z3
        + mu4 * z1s * z3.square()
        + z1 * z2.square() * z2
        + (z2 * zi).square()
        + z3.square().square()
}

/// Twisting the coefficients of Kum_X and changing to y-coordinates gives
/// Kum_{X_1}.
pub fn kummer_cross_check() -> Check {
    let name = "kummer_twist";
    let kz = kummer_z_symbolic();
    let v = kz.vars().to_vec();
    let mu2 = Gf2Poly::parse(&["mu", "z1", "z2", "z3", "zinf"], "mu^2");
    let twisted = match kz.substitute(&[("mu", &mu2)]) {
        Ok(t) => t,
        Err(e) => return Check::new(name, Status::Failed, format!("{e}")),
    };
    debug_assert_eq!(twisted.vars(), &v[..]);
    let ch = coordinate_change_symbolic(true, false);
    let assign: Vec<(&str, &Gf2Poly)> = Z_VARS.iter().copied().zip(ch.polys.iter()).collect();
    match twisted.substitute(&assign) {
        Ok(r) => Check::exact(name, r == kummer_y1_symbolic(), format!("{r}")),
        Err(e) => Check::new(name, Status::Failed, format!("{e}")),
    }
}

/// `Kum_X(Q(y)) = y2^4 * Kum_{X_1}(y)` over GF(2)[mu, y].
pub fn pullback_identity() -> Check {
    let name = "kummer_pullback";
    let t = terminal_quadrics_symbolic();
    let assign: Vec<(&str, &Gf2Poly)> = Z_VARS.iter().copied().zip(t.polys.iter()).collect();
    let lhs = match kummer_z_symbolic().substitute(&assign) {
        Ok(l) => l,
        Err(e) => return Check::new(name, Status::Failed, format!("{e}")),
    };
    let v = lhs.vars().to_vec();
    let y2_4 = Gf2Poly::var(v.clone(), "y2", Gf2::ONE).expect("var").pow(4, &Gf2::ONE);
    let k1 = kummer_y1_symbolic();
    let exact = &y2_4 * &k1 == lhs;
    let divides = lhs.exact_divide(&y2_4).is_ok_and(|q| q == k1);
    Check::exact(name, exact && divides, format!("{} terms on the left", lhs.num_terms()))
}

/// The theta-coordinate Kummer quartic, moved to z-coordinates, has its
/// lowest t-layer proportional to Kum_X.
pub fn kummer_theta_check(s: &DeformationScalars, basis: &Matrix4) -> Check {
    let name = "kummer_theta_form";
    let f = s.mu.field();
    let p = |t: &str| gf2_to_series(&Gf2Poly::parse(&THETA_VARS, t), f);
    let quartic = &(&(&p("xB^2*x0^2 + x1^2*xinf^2").scale(&s.c) + &p("xB^2*x1^2 + x0^2*xinf^2").scale(&s.b))
        + &p("xB^2*xinf^2 + x0^2*x1^2").scale(&s.a))
        + &p("xB*x0*x1*xinf");
    let basis_forms = basis_system(basis, false);
    let assign: Vec<(&str, &SeriesPoly)> = THETA_VARS.iter().copied().zip(basis_forms.polys.iter()).collect();
    let z = match quartic.substitute(&assign) {
        Ok(z) => z,
        Err(e) => return Check::new(name, Status::Failed, format!("{e}")),
    };
    let (Some(v), prec) = poly_valuation(&z) else {
        return Check::new(name, Status::Inconclusive, "no known coefficient");
    };
    if v >= prec {
        return Check::new(name, Status::Inconclusive, format!("precision t^{prec}"));
    }
    let layer = match constant_layer(&z, v) {
        Ok(l) => l,
        Err(e) => return Check::new(name, Status::Inconclusive, format!("{e}")),
    };
    let Some(c) = layer.coeff(&[0, 0, 4, 0]).copied() else {
        return Check::new(name, Status::Failed, format!("no z3^4 term in the t^{v} layer"));
    };
    let normalized = layer.scale(&c.inv().expect("nonzero"));
    let expect = specialize(&kummer_z_symbolic(), s.mu);
    Check::exact(name, normalized == expect, format!("lowest layer t^{v}, normalized by {c}"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::deformation::{basis_report, compute_scalars};
    use crate::gf2m::FieldParams;

    fn f16() -> FieldParams {
        FieldParams::new(16).unwrap()
    }

    #[test]
    fn p_quadric_examples() {
        let f = FieldParams::new(3).unwrap();
        let p = p_quadrics();
        let at = |v: [u64; 4]| {
            let v = v.map(|b| f.element(b).unwrap());
            p.polys.each_ref().map(|q| q.eval_field(&v))
        };
        let (o, z) = (f.one(), f.zero());
        assert_eq!(at([1, 0, 0, 0]), [o, z, z, z]);
        assert_eq!(at([1, 1, 1, 1]), [z, z, z, z]);
        let pb = &p_quadrics().polys[0];
        let sum = Gf2Poly::parse(&THETA_VARS, "xB + x0 + x1 + xinf");
        assert_eq!(*pb, sum.square());
    }

    #[test]
    fn quadric_map_examples() {
        let f = FieldParams::new(1).unwrap();
        let pt = |s| ProjPoint::parse(f, s).unwrap();
        assert_eq!(quadric_map(&pt("1:0:0:0")).unwrap(), pt("0:1:0:0"));
        assert_eq!(quadric_map(&pt("0:1:0:0")).unwrap(), pt("1:0:0:0"));
        assert_eq!(quadric_map(&pt("1:1:1:1")).unwrap(), pt("1:1:0:0"));
        assert!(matches!(quadric_map(&pt("0:0:1:0")), Err(MapError::BasePoint)));
    }

    #[test]
    fn coordinate_changes_examples() {
        let f = f16();
        let ch = coordinate_changes(f.zero());
        assert!(ch.z_to_y.is_identity());
        let mu = f.element(0x1234).unwrap();
        assert!(coordinate_change_checks(mu).iter().all(|c| c.is_certified()));
        let p = ProjPoint::new([f.zero(), f.zero(), f.one(), mu]).unwrap();
        assert_eq!(coordinate_changes(mu).z_to_y.apply(&p), ProjPoint::e_bad_y(f));
    }

    #[test]
    fn symbolic_certificates() {
        assert!(terminal_certificate_symbolic().is_certified());
        assert!(base_point_argument().is_certified());
        assert!(kummer_cross_check().is_certified());
        assert!(pullback_identity().is_certified());
    }

    #[test]
    fn kummer_examples() {
        let f = FieldParams::new(4).unwrap();
        let mu = f.element(7).unwrap();
        let pt = |s| ProjPoint::parse(f, s).unwrap();
        assert!(kummer_z_at(&pt("0:0:0:1"), mu).is_zero());
        assert_eq!(kummer_z_at(&pt("0:0:1:0"), mu), f.one());
        assert!(kummer_z_at(&pt("1:0:0:0"), mu).is_zero());
        let k = kummer_z_symbolic();
        for i in 0..50u64 {
            let p = crate::dynamics::ProjPoint::from_index(f, i * 83 % 4369).unwrap();
            let mut vals = vec![mu];
            vals.extend_from_slice(p.coords());
            assert_eq!(k.eval_field(&vals), kummer_z_at(&p, mu));
        }
    }

    #[test]
    fn mixing_coordinate_systems_is_an_error() {
        let t = terminal_quadrics_symbolic();
        assert!(matches!(t.compose(&t), Err(PolyError::CoordinateMismatch { .. })));
    }

    #[test]
    fn q_and_r_pipeline() {
        let f = f16();
        let (mu, w) = (f.element(0x3c1).unwrap(), f.element(0x9e).unwrap());
        let s = compute_scalars(mu, w, 128).unwrap().scalars;
        let b = basis_report(&s).unwrap();
        let q = compute_q(&s, &b.matrix).unwrap();
        for c in &q.checks {
            assert!(c.is_certified(), "{c:?}");
        }
        let r = compute_r(&s, &q.q, &b.inverse).unwrap();
        for c in &r.checks {
            assert!(c.status <= Status::Discrepancy, "{c:?}");
        }
        assert!(terminal_certificate(&r.leads, mu).is_certified());
        assert!(kummer_theta_check(&s, &b.matrix).is_certified());
    }
}
