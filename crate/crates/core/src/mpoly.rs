//! Sparse multivariate polynomials with graded-lex term order.

use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;
use core::fmt;

use crate::error::PolyError;
use crate::gf2m::FieldElement;
use crate::laurent::LaurentSeries;

/// Coefficient ring operations. All rings used here have characteristic 2,
/// so there is no negation.
pub trait Coeff: Clone + PartialEq + fmt::Debug {
    /// Whether the value must not be stored as a term.
    fn is_zero(&self) -> bool;
    /// Whether the value is zero to whatever precision it carries.
    fn is_known_zero(&self) -> bool {
        self.is_zero()
    }
    fn add(&self, other: &Self) -> Self;
    fn mul(&self, other: &Self) -> Self;
    fn zero_like(&self) -> Self;
    fn one_like(&self) -> Self;
    fn try_inv(&self) -> Option<Self>;
    fn square(&self) -> Self {
        self.mul(self)
    }
    /// Whether the value prints as the bare `1`.
    fn is_one(&self) -> bool;
    fn fmt_coeff(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result;
}

/// The prime field GF(2).
#[derive(Clone, Copy, PartialEq, Eq, Debug, Hash, PartialOrd, Ord)]
pub struct Gf2(pub bool);

impl Gf2 {
    pub const ZERO: Gf2 = Gf2(false);
    pub const ONE: Gf2 = Gf2(true);
}

impl Coeff for Gf2 {
    fn is_zero(&self) -> bool {
        !self.0
    }
    fn add(&self, other: &Self) -> Self {
        Gf2(self.0 ^ other.0)
    }
    fn mul(&self, other: &Self) -> Self {
        Gf2(self.0 & other.0)
    }
    fn zero_like(&self) -> Self {
        Gf2::ZERO
    }
    fn one_like(&self) -> Self {
        Gf2::ONE
    }
    fn try_inv(&self) -> Option<Self> {
        self.0.then_some(Gf2::ONE)
    }
    fn is_one(&self) -> bool {
        self.0
    }
    fn fmt_coeff(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0 as u8)
    }
}

impl Coeff for FieldElement {
    fn is_zero(&self) -> bool {
        FieldElement::is_zero(self)
    }
    fn add(&self, other: &Self) -> Self {
        *self + *other
    }
    fn mul(&self, other: &Self) -> Self {
        *self * *other
    }
    fn zero_like(&self) -> Self {
        self.field().zero()
    }
    fn one_like(&self) -> Self {
        self.field().one()
    }
    fn try_inv(&self) -> Option<Self> {
        self.inv().ok()
    }
    fn square(&self) -> Self {
        FieldElement::square(self)
    }
    fn is_one(&self) -> bool {
        FieldElement::is_one(self)
    }
    fn fmt_coeff(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl Coeff for LaurentSeries {
    /// Only exact zeros are dropped; a zero known to some precision still
    /// carries information.
    fn is_zero(&self) -> bool {
        self.is_exact_zero()
    }
    fn is_known_zero(&self) -> bool {
        LaurentSeries::is_zero(self)
    }
    fn add(&self, other: &Self) -> Self {
        self + other
    }
    fn mul(&self, other: &Self) -> Self {
        self * other
    }
    fn zero_like(&self) -> Self {
        LaurentSeries::exact_zero(self.field())
    }
    fn one_like(&self) -> Self {
        LaurentSeries::one(self.field())
    }
    fn try_inv(&self) -> Option<Self> {
        self.inv().ok()
    }
    fn square(&self) -> Self {
        LaurentSeries::square(self)
    }
    fn is_one(&self) -> bool {
        *self == LaurentSeries::one(self.field())
    }
    fn fmt_coeff(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({self})")
    }
}

/// Exponent vector. Ordered by total degree, then lexicographically with
/// the first variable most significant.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Monomial(pub Vec<u32>);

impl Monomial {
    pub fn one(nvars: usize) -> Self {
        Monomial(vec![0; nvars])
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().sum()
    }

    fn mul(&self, other: &Self) -> Self {
        Monomial(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    fn divide(&self, other: &Self) -> Option<Self> {
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| a.checked_sub(*b))
            .collect::<Option<Vec<_>>>()
            .map(Monomial)
    }
}

impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree()
            .cmp(&other.degree())
            .then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

#[derive(Clone, PartialEq, Debug)]
pub struct MultiPoly<C: Coeff> {
    vars: Vec<String>,
    terms: BTreeMap<Monomial, C>,
}

pub fn var_names(names: &[&str]) -> Vec<String> {
    names.iter().map(|s| s.to_string()).collect()
}

impl<C: Coeff> MultiPoly<C> {
    pub fn zero(vars: Vec<String>) -> Self {
        MultiPoly {
            vars,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(vars: Vec<String>, c: C) -> Self {
        let n = vars.len();
        let mut p = Self::zero(vars);
        p.add_term(Monomial::one(n), c);
        p
    }

    /// The variable `name` with coefficient `one`.
    pub fn var(vars: Vec<String>, name: &str, one: C) -> Result<Self, PolyError> {
        let i = index_of(&vars, name)?;
        let mut e = vec![0; vars.len()];
        e[i] = 1;
        let mut p = Self::zero(vars);
        p.add_term(Monomial(e), one);
        Ok(p)
    }

    /// All variables of `vars` in order.
    pub fn vars_as_polys(vars: &[String], one: &C) -> Vec<Self> {
        vars.iter()
            .map(|v| Self::var(vars.to_vec(), v, one.clone()).unwrap())
            .collect()
    }

    pub fn from_terms(
        vars: Vec<String>,
        terms: impl IntoIterator<Item = (Vec<u32>, C)>,
    ) -> Self {
        let mut p = Self::zero(vars);
        for (e, c) in terms {
            assert_eq!(e.len(), p.vars.len(), "exponent vector length");
            p.add_term(Monomial(e), c);
        }
        p
    }

    pub fn vars(&self) -> &[String] {
        &self.vars
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// True when every stored coefficient is zero to its precision.
    pub fn is_known_zero(&self) -> bool {
        self.terms.values().all(|c| c.is_known_zero())
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    /// Terms in increasing graded-lex order.
    pub fn terms(&self) -> impl DoubleEndedIterator<Item = (&Monomial, &C)> {
        self.terms.iter()
    }

    pub fn coeff(&self, exps: &[u32]) -> Option<&C> {
        self.terms.get(&Monomial(exps.to_vec()))
    }

    pub fn leading_term(&self) -> Option<(&Monomial, &C)> {
        self.terms.iter().next_back()
    }

    pub fn total_degree(&self) -> Option<u32> {
        self.terms.keys().map(Monomial::degree).max()
    }

    pub fn degree_in(&self, var: &str) -> Result<u32, PolyError> {
        let i = index_of(&self.vars, var)?;
        Ok(self.terms.keys().map(|m| m.0[i]).max().unwrap_or(0))
    }

    pub fn is_homogeneous(&self, degree: u32) -> bool {
        self.terms.keys().all(|m| m.degree() == degree)
    }

    fn add_term(&mut self, m: Monomial, c: C) {
        if c.is_zero() {
            return;
        }
        match self.terms.remove(&m) {
            Some(old) => {
                let s = old.add(&c);
                if !s.is_zero() {
                    self.terms.insert(m, s);
                }
            }
            None => {
                self.terms.insert(m, c);
            }
        }
    }

    fn check_vars(&self, other: &Self) -> Result<(), PolyError> {
        if self.vars == other.vars {
            Ok(())
        } else {
            Err(PolyError::VarMismatch)
        }
    }

    pub fn checked_add(&self, other: &Self) -> Result<Self, PolyError> {
        self.check_vars(other)?;
        let mut r = self.clone();
        for (m, c) in &other.terms {
            r.add_term(m.clone(), c.clone());
        }
        Ok(r)
    }

    pub fn checked_mul(&self, other: &Self) -> Result<Self, PolyError> {
        self.check_vars(other)?;
        let mut r = Self::zero(self.vars.clone());
        for (m1, c1) in &self.terms {
            for (m2, c2) in &other.terms {
                r.add_term(m1.mul(m2), c1.mul(c2));
            }
        }
        Ok(r)
    }

    pub fn plus(&self, other: &Self) -> Self {
        self.checked_add(other).expect("variable lists differ")
    }

    pub fn times(&self, other: &Self) -> Self {
        self.checked_mul(other).expect("variable lists differ")
    }

    pub fn scale(&self, c: &C) -> Self {
        let mut r = Self::zero(self.vars.clone());
        for (m, a) in &self.terms {
            r.add_term(m.clone(), a.mul(c));
        }
        r
    }

    /// Squares via the Frobenius: coefficients squared, exponents doubled.
    pub fn square(&self) -> Self {
        let mut r = Self::zero(self.vars.clone());
        for (m, c) in &self.terms {
            r.add_term(Monomial(m.0.iter().map(|e| 2 * e).collect()), c.square());
        }
        r
    }

    pub fn pow(&self, e: u32, one: &C) -> Self {
        let mut result = Self::constant(self.vars.clone(), one.clone());
        let mut base = self.clone();
        let mut e = e;
        while e != 0 {
            if e & 1 == 1 {
                result = result.times(&base);
            }
            e >>= 1;
            if e != 0 {
                base = base.square();
            }
        }
        result
    }

    pub fn map_coeffs<D: Coeff>(&self, f: impl Fn(&C) -> D) -> MultiPoly<D> {
        let mut r = MultiPoly::zero(self.vars.clone());
        for (m, c) in &self.terms {
            r.add_term(m.clone(), f(c));
        }
        r
    }

    /// Re-expresses the polynomial over another variable list that contains
    /// every variable of `self`.
    pub fn embed(&self, vars: &[String]) -> Result<Self, PolyError> {
        let idx: Vec<usize> = self
            .vars
            .iter()
            .map(|v| index_of(vars, v))
            .collect::<Result<_, _>>()?;
        let mut r = Self::zero(vars.to_vec());
        for (m, c) in &self.terms {
            let mut e = vec![0; vars.len()];
            for (k, &i) in idx.iter().enumerate() {
                e[i] = m.0[k];
            }
            r.add_term(Monomial(e), c.clone());
        }
        Ok(r)
    }

    /// Simultaneous substitution. Every assigned value must use one common
    /// variable list, which becomes the result's; variables left unassigned
    /// must appear in it and are kept.
    pub fn substitute(&self, assignments: &[(&str, &MultiPoly<C>)]) -> Result<Self, PolyError> {
        let target_vars = match assignments.first() {
            Some((_, p)) => p.vars.clone(),
            None => return Ok(self.clone()),
        };
        let mut images: Vec<Option<Self>> = vec![None; self.vars.len()];
        for (name, p) in assignments {
            if p.vars != target_vars {
                return Err(PolyError::VarMismatch);
            }
            images[index_of(&self.vars, name)?] = Some((*p).clone());
        }
        let one = match self.terms.values().next() {
            Some(c) => c.one_like(),
            None => return Ok(Self::zero(target_vars)),
        };
        let images: Vec<Self> = images
            .into_iter()
            .enumerate()
            .map(|(i, im)| match im {
                Some(p) => Ok(p),
                None => Self::var(target_vars.clone(), &self.vars[i], one.clone()),
            })
            .collect::<Result<_, _>>()?;
        let mut powers: Vec<Vec<Self>> = images
            .iter()
            .map(|p| vec![Self::constant(target_vars.clone(), one.clone()), p.clone()])
            .collect();
        let mut r = Self::zero(target_vars.clone());
        for (m, c) in &self.terms {
            let mut t = Self::constant(target_vars.clone(), c.clone());
            for (i, &e) in m.0.iter().enumerate() {
                if e == 0 {
                    continue;
                }
                while powers[i].len() <= e as usize {
                    let next = powers[i].last().unwrap().times(&images[i]);
                    powers[i].push(next);
                }
                t = t.times(&powers[i][e as usize]);
            }
            for (m2, c2) in t.terms {
                r.add_term(m2, c2);
            }
        }
        Ok(r)
    }

    /// Evaluates at `values` (one per variable, in order).
    pub fn eval(&self, values: &[C]) -> C {
        assert_eq!(values.len(), self.vars.len(), "one value per variable");
        let mut acc: Option<C> = None;
        for (m, c) in &self.terms {
            let mut t = c.clone();
            for (i, &e) in m.0.iter().enumerate() {
                for _ in 0..e {
                    t = t.mul(&values[i]);
                }
            }
            acc = Some(match acc {
                Some(a) => a.add(&t),
                None => t,
            });
        }
        acc.unwrap_or_else(|| values.first().map(|v| v.zero_like()).expect("no variables"))
    }

    /// Quotient of an exact division, by repeated leading-term elimination.
    pub fn exact_divide(&self, divisor: &Self) -> Result<Self, PolyError> {
        self.check_vars(divisor)?;
        let (lm, lc) = divisor.leading_term().ok_or(PolyError::ZeroDivisor)?;
        let lc_inv = lc.try_inv().ok_or(PolyError::NotDivisible)?;
        let mut rem = self.clone();
        let mut quot = Self::zero(self.vars.clone());
        loop {
            rem.terms.retain(|_, c| !c.is_known_zero());
            let (m, c) = match rem.leading_term() {
                Some((m, c)) => (m.clone(), c.clone()),
                None => break,
            };
            let qm = m.divide(lm).ok_or(PolyError::NotDivisible)?;
            let qc = c.mul(&lc_inv);
            for (dm, dc) in &divisor.terms {
                rem.add_term(dm.mul(&qm), dc.mul(&qc));
            }
            // the leading term cancels exactly only for exact coefficients
            rem.terms.remove(&m);
            quot.add_term(qm, qc);
        }
        Ok(quot)
    }
}

fn index_of(vars: &[String], name: &str) -> Result<usize, PolyError> {
    vars.iter()
        .position(|v| v == name)
        .ok_or_else(|| PolyError::UnknownVariable(name.to_string()))
}

impl<C: Coeff> fmt::Display for MultiPoly<C> {
    /// Terms in decreasing graded-lex order, e.g. `y2^2 + y1*y3`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (k, (m, c)) in self.terms.iter().rev().enumerate() {
            if k > 0 {
                write!(f, " + ")?;
            }
            let mut factors = 0;
            if !c.is_one() {
                c.fmt_coeff(f)?;
                factors += 1;
            }
            for (i, &e) in m.0.iter().enumerate() {
                if e == 0 {
                    continue;
                }
                if factors > 0 {
                    write!(f, "*")?;
                }
                write!(f, "{}", self.vars[i])?;
                if e > 1 {
                    write!(f, "^{e}")?;
                }
                factors += 1;
            }
            if factors == 0 {
                write!(f, "1")?;
            }
        }
        Ok(())
    }
}

impl<C: Coeff> core::ops::Add for &MultiPoly<C> {
    type Output = MultiPoly<C>;
    fn add(self, rhs: Self) -> MultiPoly<C> {
        self.plus(rhs)
    }
}

impl<C: Coeff> core::ops::Mul for &MultiPoly<C> {
    type Output = MultiPoly<C>;
    fn mul(self, rhs: Self) -> MultiPoly<C> {
        self.times(rhs)
    }
}

impl<C: Coeff> core::ops::Add for MultiPoly<C> {
    type Output = MultiPoly<C>;
    fn add(self, rhs: Self) -> MultiPoly<C> {
        self.plus(&rhs)
    }
}

impl<C: Coeff> core::ops::Mul for MultiPoly<C> {
    type Output = MultiPoly<C>;
    fn mul(self, rhs: Self) -> MultiPoly<C> {
        self.times(&rhs)
    }
}

/// Polynomials over GF(2), the setting of all symbolic identities.
pub type Gf2Poly = MultiPoly<Gf2>;

impl Gf2Poly {
    /// Parses a sum of monomials such as `mu^2*z1^3*z2 + z3^4 + 1`.
    /// Intended for fixed formulas; panics on malformed input.
    pub fn parse(vars: &[&str], text: &str) -> Self {
        let vars = var_names(vars);
        let mut p = Self::zero(vars.clone());
        for term in text.split('+') {
            let term = term.trim();
            let mut e = vec![0u32; vars.len()];
            let mut is_zero = false;
            for factor in term.split('*') {
                let factor = factor.trim();
                match factor {
                    "1" => continue,
                    "0" => {
                        is_zero = true;
                        continue;
                    }
                    _ => {}
                }
                let (name, exp) = match factor.split_once('^') {
                    Some((n, x)) => (n, x.parse::<u32>().expect("exponent")),
                    None => (factor, 1),
                };
                let i = index_of(&vars, name).expect("variable in list");
                e[i] += exp;
            }
            if !is_zero {
                p.add_term(Monomial(e), Gf2::ONE);
            }
        }
        p
    }

    /// Specializes into a field, evaluating at the given values.
    pub fn eval_field(&self, values: &[FieldElement]) -> FieldElement {
        let field = values.first().expect("at least one variable").field();
        self.map_coeffs(|c| if c.0 { field.one() } else { field.zero() })
            .eval(values)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gf2m::FieldParams;
    use proptest::prelude::*;

    const V: &[&str] = &["mu", "y1", "y2"];

    fn p(s: &str) -> Gf2Poly {
        Gf2Poly::parse(V, s)
    }

    #[test]
    fn freshman_dream() {
        let q = p("y2 + mu*y1");
        assert_eq!(q.pow(2, &Gf2::ONE), p("y2^2 + mu^2*y1^2"));
        assert_eq!(&q * &q, q.square());
    }

    #[test]
    fn substitution() {
        let vz = &["z1", "z3"];
        let f = Gf2Poly::parse(vz, "z3^4");
        let zero = Gf2Poly::zero(var_names(vz));
        assert!(f.substitute(&[("z3", &zero)]).unwrap().is_zero());
        let bad = f.substitute(&[("w", &zero)]);
        assert_eq!(bad, Err(PolyError::UnknownVariable("w".into())));
        // simultaneous, not sequential
        let g = Gf2Poly::parse(vz, "z1 + z3^2");
        let a = Gf2Poly::parse(vz, "z3");
        let b = Gf2Poly::parse(vz, "z1");
        assert_eq!(
            g.substitute(&[("z1", &a), ("z3", &b)]).unwrap(),
            Gf2Poly::parse(vz, "z3 + z1^2")
        );
    }

    #[test]
    fn division() {
        let q = p("y2^4*y1").exact_divide(&p("y2^4")).unwrap();
        assert_eq!(q, p("y1"));
        assert_eq!(p("y1").exact_divide(&p("y2")), Err(PolyError::NotDivisible));
        assert_eq!(p("y1").exact_divide(&Gf2Poly::zero(var_names(V))), Err(PolyError::ZeroDivisor));
        let a = p("y1 + mu*y2 + 1");
        let b = p("y1^3 + y2");
        assert_eq!((&a * &b).exact_divide(&b).unwrap(), a);
        assert_eq!((&a * &b + p("y1")).exact_divide(&b), Err(PolyError::NotDivisible));
    }

    #[test]
    fn printing_is_graded_lex() {
        assert_eq!(p("y1 + y2^2 + mu*y1*y2 + 1").to_string(), "mu*y1*y2 + y2^2 + y1 + 1");
        assert_eq!(Gf2Poly::zero(var_names(V)).to_string(), "0");
    }

    #[test]
    fn field_coefficients_square_by_frobenius() {
        let field = FieldParams::new(8).unwrap();
        let g = field.element(0x53).unwrap();
        let vars = var_names(&["x", "y"]);
        let x = MultiPoly::var(vars.clone(), "x", field.one()).unwrap();
        let y = MultiPoly::var(vars.clone(), "y", field.one()).unwrap();
        let f = &x.scale(&g) + &(&x * &y);
        assert_eq!(f.square(), &f * &f);
        assert_eq!(f.square().coeff(&[2, 0]), Some(&g.square()));
        let v = [field.element(3).unwrap(), field.element(7).unwrap()];
        assert_eq!(f.eval(&v), g * v[0] + v[0] * v[1]);
    }

    fn small_poly() -> impl Strategy<Value = Gf2Poly> {
        proptest::collection::vec((0u32..3, 0u32..3, 0u32..3), 0..6).prop_map(|ts| {
            Gf2Poly::from_terms(
                var_names(V),
                ts.into_iter().map(|(a, b, c)| (vec![a, b, c], Gf2::ONE)),
            )
        })
    }

    proptest! {
        #[test]
        fn ring_axioms(a in small_poly(), b in small_poly(), c in small_poly()) {
            prop_assert_eq!(&a * &b, &b * &a);
            prop_assert_eq!(&(&a * &b) * &c, &a * &(&b * &c));
            prop_assert_eq!(&a * &(&b + &c), &(&a * &b) + &(&a * &c));
            prop_assert!((&a + &a).is_zero());
        }

        #[test]
        fn identity_substitution(a in small_poly()) {
            let ids = Gf2Poly::vars_as_polys(&var_names(V), &Gf2::ONE);
            let assign: Vec<(&str, &Gf2Poly)> = V.iter().copied().zip(ids.iter()).collect();
            prop_assert_eq!(a.substitute(&assign).unwrap(), a);
        }

        #[test]
        fn product_divides(a in small_poly(), b in small_poly()) {
            prop_assume!(!b.is_zero());
            prop_assert_eq!((&a * &b).exact_divide(&b).unwrap(), a);
        }
    }
}
