//! Truncated Laurent series in a uniformizer `t` over GF(2^m).
//!
//! Throughout the crate the deformation parameter is `s = t^2`, so every
//! square root needed by the computations (including `sqrt(s)`) is a series
//! in `t`.
//!
//! A series carries an absolute precision `P`: coefficients of `t^n` for
//! `n >= P` are unknown. Exactly known series (finite sums of monomials)
//! carry the sentinel [`EXACT`]. Every operation derives its output
//! precision from its inputs; nothing ever gains precision silently.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::ops::{Add, Mul};

use crate::error::SeriesError;
use crate::gf2m::{FieldElement, FieldParams};

/// Precision sentinel for series known exactly.
pub const EXACT: i64 = i64::MAX / 4;

/// Default truncation: t^128, i.e. s^64.
pub const DEFAULT_PRECISION: i64 = 128;

#[inline]
fn clamp(p: i64) -> i64 {
    if p >= EXACT / 2 {
        EXACT
    } else {
        p
    }
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct LaurentSeries {
    field: FieldParams,
    /// Exponent of `coeffs[0]`; equals `prec` when the series is zero.
    val: i64,
    coeffs: Vec<u64>,
    prec: i64,
}

/// Outcome of comparing two series at every commonly known coefficient.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Agreement {
    /// No known coefficient differs; coefficients below `known_below` were
    /// compared (`EXACT` when both sides are exact).
    Equal { known_below: i64 },
    /// First differing coefficient.
    Differ {
        exponent: i64,
        lhs: FieldElement,
        rhs: FieldElement,
    },
}

impl Agreement {
    pub fn holds(&self) -> bool {
        matches!(self, Agreement::Equal { .. })
    }

    /// Exponent below which the comparison was made (the differing
    /// exponent for a mismatch).
    pub fn checked_below(&self) -> i64 {
        match *self {
            Agreement::Equal { known_below } => known_below,
            Agreement::Differ { exponent, .. } => exponent,
        }
    }
}

/// A valuation measured in powers of `s = t^2`, stored in `t` units so that
/// half-integers are representable.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Debug, Hash)]
pub struct SValuation {
    pub t_exponent: i64,
}

impl SValuation {
    /// Reduced fraction `(numerator, denominator)` with denominator 1 or 2.
    pub fn as_ratio(&self) -> (i64, i64) {
        if self.t_exponent % 2 == 0 {
            (self.t_exponent / 2, 1)
        } else {
            (self.t_exponent, 2)
        }
    }
}

impl fmt::Display for SValuation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.as_ratio() {
            (n, 1) => write!(f, "{n}"),
            (n, d) => write!(f, "{n}/{d}"),
        }
    }
}

impl LaurentSeries {
    fn normalized(field: FieldParams, val: i64, mut coeffs: Vec<u64>, prec: i64) -> Self {
        let prec = clamp(prec);
        if prec != EXACT {
            let keep = (prec - val).max(0) as usize;
            coeffs.truncate(keep);
        }
        let lead = coeffs.iter().position(|&c| c != 0);
        match lead {
            None => LaurentSeries {
                field,
                val: prec,
                coeffs: Vec::new(),
                prec,
            },
            Some(lz) => {
                let last = coeffs.iter().rposition(|&c| c != 0).unwrap();
                coeffs.truncate(last + 1);
                coeffs.drain(..lz);
                LaurentSeries {
                    field,
                    val: val + lz as i64,
                    coeffs,
                    prec,
                }
            }
        }
    }

    /// The zero series known below `t^prec`.
    pub fn zero(field: FieldParams, prec: i64) -> Self {
        Self::normalized(field, prec, Vec::new(), prec)
    }

    pub fn exact_zero(field: FieldParams) -> Self {
        Self::zero(field, EXACT)
    }

    pub fn one(field: FieldParams) -> Self {
        Self::constant(field.one())
    }

    pub fn constant(c: FieldElement) -> Self {
        Self::monomial(c, 0)
    }

    /// Exact monomial `c * t^exp`.
    pub fn monomial(c: FieldElement, exp: i64) -> Self {
        Self::normalized(c.field(), exp, vec![c.bits()], EXACT)
    }

    /// `t^k`, exact.
    pub fn t_pow(field: FieldParams, k: i64) -> Self {
        Self::monomial(field.one(), k)
    }

    /// `s^k = t^(2k)`, exact.
    pub fn s_pow(field: FieldParams, k: i64) -> Self {
        Self::t_pow(field, 2 * k)
    }

    /// Builds a series from `(exponent, coefficient bits)` pairs; repeated
    /// exponents are summed.
    pub fn from_terms(field: FieldParams, terms: &[(i64, u64)], prec: i64) -> Self {
        let mask = field.mask();
        let (lo, hi) = match (
            terms.iter().map(|t| t.0).min(),
            terms.iter().map(|t| t.0).max(),
        ) {
            (Some(lo), Some(hi)) => (lo, hi),
            _ => return Self::zero(field, prec),
        };
        let mut coeffs = vec![0u64; (hi - lo + 1) as usize];
        for &(e, c) in terms {
            coeffs[(e - lo) as usize] ^= c & mask;
        }
        Self::normalized(field, lo, coeffs, prec)
    }

    pub fn field(&self) -> FieldParams {
        self.field
    }

    /// Lowest exponent with a nonzero coefficient, `None` for a series that
    /// is zero to its known precision.
    pub fn valuation(&self) -> Option<i64> {
        if self.coeffs.is_empty() {
            None
        } else {
            Some(self.val)
        }
    }

    /// Valuation for precision bookkeeping: a zero series counts as its
    /// precision.
    fn effective_val(&self) -> i64 {
        self.val
    }

    pub fn precision(&self) -> i64 {
        self.prec
    }

    pub fn is_exact(&self) -> bool {
        self.prec == EXACT
    }

    /// True when no known coefficient is nonzero.
    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn is_exact_zero(&self) -> bool {
        self.coeffs.is_empty() && self.prec == EXACT
    }

    /// Coefficient of `t^n`, `None` when unknown.
    pub fn coeff(&self, n: i64) -> Option<FieldElement> {
        if n >= self.prec {
            return None;
        }
        let bits = if n < self.val || self.coeffs.is_empty() {
            0
        } else {
            self.coeffs.get((n - self.val) as usize).copied().unwrap_or(0)
        };
        Some(self.field.element(bits).unwrap())
    }

    /// Nonzero terms in increasing exponent order.
    pub fn terms(&self) -> impl Iterator<Item = (i64, FieldElement)> + '_ {
        let field = self.field;
        self.coeffs
            .iter()
            .enumerate()
            .filter(|(_, &c)| c != 0)
            .map(move |(i, &c)| (self.val + i as i64, field.element(c).unwrap()))
    }

    /// Forgets everything at and above `t^prec`.
    pub fn truncate(&self, prec: i64) -> Self {
        Self::normalized(self.field, self.val, self.coeffs.clone(), prec.min(self.prec))
    }

    fn check_field(&self, other: &Self) -> Result<(), SeriesError> {
        if self.field == other.field {
            Ok(())
        } else {
            Err(crate::error::FieldError::FieldMismatch.into())
        }
    }

    pub fn checked_add(&self, other: &Self) -> Result<Self, SeriesError> {
        self.check_field(other)?;
        let prec = self.prec.min(other.prec);
        if self.coeffs.is_empty() {
            return Ok(other.truncate(prec));
        }
        if other.coeffs.is_empty() {
            return Ok(self.truncate(prec));
        }
        let lo = self.val.min(other.val);
        let hi = (self.val + self.coeffs.len() as i64).max(other.val + other.coeffs.len() as i64);
        let hi = if prec == EXACT { hi } else { hi.min(prec) };
        if hi <= lo {
            return Ok(Self::zero(self.field, prec));
        }
        let mut coeffs = vec![0u64; (hi - lo) as usize];
        for s in [self, other] {
            for (i, &c) in s.coeffs.iter().enumerate() {
                let idx = s.val + i as i64 - lo;
                if idx < 0 || idx >= hi - lo {
                    continue;
                }
                coeffs[idx as usize] ^= c;
            }
        }
        Ok(Self::normalized(self.field, lo, coeffs, prec))
    }

    pub fn checked_mul(&self, other: &Self) -> Result<Self, SeriesError> {
        self.check_field(other)?;
        let prec = clamp(
            (self.effective_val() + other.prec).min(other.effective_val() + self.prec),
        );
        if self.coeffs.is_empty() || other.coeffs.is_empty() {
            return Ok(Self::zero(self.field, prec));
        }
        let base = self.val + other.val;
        let full = self.coeffs.len() + other.coeffs.len() - 1;
        let len = if prec == EXACT {
            full
        } else {
            ((prec - base).max(0) as usize).min(full)
        };
        let mut out = vec![0u64; len];
        let f = self.field;
        for (i, &a) in self.coeffs.iter().enumerate() {
            if a == 0 || i >= len {
                continue;
            }
            let jmax = (len - i).min(other.coeffs.len());
            for (j, &b) in other.coeffs[..jmax].iter().enumerate() {
                if b != 0 {
                    out[i + j] ^= f.mul_raw(a, b);
                }
            }
        }
        Ok(Self::normalized(self.field, base, out, prec))
    }

    pub fn scale(&self, c: FieldElement) -> Self {
        assert_eq!(c.field(), self.field, "operands from different fields");
        if c.is_zero() {
            return Self::exact_zero(self.field);
        }
        let coeffs = self
            .coeffs
            .iter()
            .map(|&a| self.field.mul_raw(a, c.bits()))
            .collect();
        Self::normalized(self.field, self.val, coeffs, self.prec)
    }

    /// Multiplies by `t^k`.
    pub fn shift(&self, k: i64) -> Self {
        let prec = if self.prec == EXACT { EXACT } else { self.prec + k };
        Self::normalized(self.field, self.val + k, self.coeffs.clone(), prec)
    }

    /// Frobenius. In characteristic 2 the truncation error squares too, so
    /// the precision doubles.
    pub fn square(&self) -> Self {
        let prec = if self.prec == EXACT {
            EXACT
        } else {
            2 * self.prec
        };
        if self.coeffs.is_empty() {
            return Self::zero(self.field, prec);
        }
        let mut coeffs = vec![0u64; 2 * self.coeffs.len() - 1];
        for (i, &c) in self.coeffs.iter().enumerate() {
            coeffs[2 * i] = self.field.sqr_raw(c);
        }
        Self::normalized(self.field, 2 * self.val, coeffs, prec)
    }

    pub fn pow(&self, e: u32) -> Self {
        let mut result = Self::one(self.field);
        let mut base = self.clone();
        let mut e = e;
        while e != 0 {
            if e & 1 == 1 {
                result = &result * &base;
            }
            e >>= 1;
            if e != 0 {
                base = base.square();
            }
        }
        result
    }

    /// Inverse; exact non-monomial inputs are expanded up to `t^DEFAULT_PRECISION`.
    pub fn inv(&self) -> Result<Self, SeriesError> {
        self.inv_capped(DEFAULT_PRECISION)
    }

    /// Inverse known at most below `t^cap` (never less than its leading
    /// coefficient).
    pub fn inv_capped(&self, cap: i64) -> Result<Self, SeriesError> {
        if self.coeffs.is_empty() {
            return Err(SeriesError::ZeroSeries);
        }
        let v = self.val;
        let f = self.field;
        if self.prec == EXACT && self.coeffs.len() == 1 {
            let c = f.inv_raw(self.coeffs[0]).expect("leading coefficient is nonzero");
            return Ok(Self::normalized(f, -v, vec![c], EXACT));
        }
        let intrinsic = if self.prec == EXACT {
            EXACT
        } else {
            -v + (self.prec - v)
        };
        let target = intrinsic.min(cap).max(-v + 1);
        let n = (target + v) as usize;
        let u0_inv = f.inv_raw(self.coeffs[0]).unwrap();
        let mut g = vec![0u64; n];
        g[0] = u0_inv;
        for k in 1..n {
            let mut acc = 0u64;
            let top = k.min(self.coeffs.len() - 1);
            for i in 1..=top {
                let u = self.coeffs[i];
                if u != 0 && g[k - i] != 0 {
                    acc ^= f.mul_raw(u, g[k - i]);
                }
            }
            g[k] = f.mul_raw(acc, u0_inv);
        }
        Ok(Self::normalized(f, -v, g, target))
    }

    /// `self / other`, with `other` inverted up to `t^cap`.
    pub fn div_capped(&self, other: &Self, cap: i64) -> Result<Self, SeriesError> {
        Ok(self * &other.inv_capped(cap)?)
    }

    /// Square root: halves exponents and takes coefficient-wise inverse
    /// Frobenius. Fails when a known odd-exponent coefficient is nonzero.
    pub fn sqrt(&self) -> Result<Self, SeriesError> {
        let prec = if self.prec == EXACT {
            EXACT
        } else {
            (self.prec + 1).div_euclid(2)
        };
        if self.coeffs.is_empty() {
            return Ok(Self::zero(self.field, prec));
        }
        if let Some((e, _)) = self.terms().find(|(e, _)| e.rem_euclid(2) == 1) {
            return Err(SeriesError::NotASquare { exponent: e });
        }
        let coeffs = self
            .coeffs
            .iter()
            .step_by(2)
            .map(|&c| self.field.sqrt_raw(c))
            .collect();
        Ok(Self::normalized(self.field, self.val / 2, coeffs, prec))
    }

    /// Valuation in powers of `s`.
    pub fn s_valuation(&self) -> Result<SValuation, SeriesError> {
        match self.valuation() {
            Some(v) => Ok(SValuation { t_exponent: v }),
            None => Err(SeriesError::ZeroSeries),
        }
    }

    /// Coefficient of `t^0`, requiring no pole and a known constant term.
    pub fn constant_term(&self) -> Result<FieldElement, SeriesError> {
        if let Some(v) = self.valuation() {
            if v < 0 {
                return Err(SeriesError::InsufficientPrecision {
                    available: v,
                    required: 0,
                });
            }
        }
        self.coeff(0).ok_or(SeriesError::InsufficientPrecision {
            available: self.prec,
            required: 1,
        })
    }

    /// Compares two series at every coefficient known on both sides.
    pub fn agreement(&self, other: &Self) -> Agreement {
        let diff = self + other;
        match diff.valuation() {
            None => Agreement::Equal {
                known_below: diff.prec,
            },
            Some(e) => Agreement::Differ {
                exponent: e,
                lhs: self.coeff(e).unwrap(),
                rhs: other.coeff(e).unwrap(),
            },
        }
    }

    /// Applies a field map to every coefficient (e.g. Frobenius on k only).
    pub fn map_coeffs(&self, f: impl Fn(u64) -> u64) -> Self {
        let coeffs = self.coeffs.iter().map(|&c| f(c)).collect();
        Self::normalized(self.field, self.val, coeffs, self.prec)
    }
}

impl fmt::Display for LaurentSeries {
    /// Sparse `exponent:coefficient-hex` pairs followed by the error term.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (e, c) in self.terms() {
            if !first {
                write!(f, ", ")?;
            }
            write!(f, "{e}:{c}")?;
            first = false;
        }
        if first {
            write!(f, "0")?;
        }
        if self.prec != EXACT {
            write!(f, " + O(t^{})", self.prec)?;
        }
        Ok(())
    }
}

macro_rules! forward_binop {
    ($tr:ident, $method:ident, $checked:ident) => {
        impl $tr<&LaurentSeries> for &LaurentSeries {
            type Output = LaurentSeries;
            fn $method(self, rhs: &LaurentSeries) -> LaurentSeries {
                self.$checked(rhs).expect("operands from different fields")
            }
        }
        impl $tr<LaurentSeries> for LaurentSeries {
            type Output = LaurentSeries;
            fn $method(self, rhs: LaurentSeries) -> LaurentSeries {
                (&self).$checked(&rhs).expect("operands from different fields")
            }
        }
        impl $tr<&LaurentSeries> for LaurentSeries {
            type Output = LaurentSeries;
            fn $method(self, rhs: &LaurentSeries) -> LaurentSeries {
                (&self).$checked(rhs).expect("operands from different fields")
            }
        }
        impl $tr<LaurentSeries> for &LaurentSeries {
            type Output = LaurentSeries;
            fn $method(self, rhs: LaurentSeries) -> LaurentSeries {
                self.$checked(&rhs).expect("operands from different fields")
            }
        }
    };
}

forward_binop!(Add, add, checked_add);
forward_binop!(Mul, mul, checked_mul);

/// Number of whole `s`-degrees covered by coefficients known below `t^prec`;
/// `None` when exact.
pub fn s_degree_covered(prec: i64) -> Option<i64> {
    if prec == EXACT {
        None
    } else {
        Some((prec - 1).div_euclid(2))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::string::ToString;
    use proptest::prelude::*;

    fn f16() -> FieldParams {
        FieldParams::new(16).unwrap()
    }

    fn ser(terms: &[(i64, u64)], prec: i64) -> LaurentSeries {
        LaurentSeries::from_terms(f16(), terms, prec)
    }

    #[test]
    fn squaring_binomial() {
        let f = ser(&[(0, 1), (1, 1)], EXACT);
        assert_eq!(&f * &f, ser(&[(0, 1), (2, 1)], EXACT));
        assert_eq!(f.square(), ser(&[(0, 1), (2, 1)], EXACT));
        assert!((&f + &f).is_exact_zero());
    }

    #[test]
    fn monomial_inverse() {
        let t = LaurentSeries::t_pow(f16(), 1);
        let tinv = LaurentSeries::t_pow(f16(), -1);
        assert_eq!(&t * &tinv, LaurentSeries::one(f16()));
        assert_eq!(LaurentSeries::t_pow(f16(), 2).inv().unwrap(), LaurentSeries::t_pow(f16(), -2));
        assert_eq!(LaurentSeries::one(f16()).inv().unwrap(), LaurentSeries::one(f16()));
    }

    #[test]
    fn geometric_series() {
        let f = ser(&[(0, 1), (1, 1)], EXACT);
        let g = f.inv_capped(40).unwrap();
        assert_eq!(g.precision(), 40);
        for n in 0..40 {
            assert!(g.coeff(n).unwrap().is_one());
        }
        assert_eq!(g.coeff(40), None);
        let one = &f * &g;
        assert_eq!(one, LaurentSeries::one(f16()).truncate(40));
    }

    #[test]
    fn inverse_of_zero_fails() {
        assert_eq!(LaurentSeries::zero(f16(), 10).inv(), Err(SeriesError::ZeroSeries));
    }

    #[test]
    fn square_roots() {
        assert_eq!(ser(&[(0, 1), (2, 1)], EXACT).sqrt().unwrap(), ser(&[(0, 1), (1, 1)], EXACT));
        assert_eq!(ser(&[(-2, 1)], EXACT).sqrt().unwrap(), ser(&[(-1, 1)], EXACT));
        assert_eq!(
            ser(&[(0, 1), (1, 1)], EXACT).sqrt(),
            Err(SeriesError::NotASquare { exponent: 1 })
        );
        // precision halves (rounding up what is still determined)
        assert_eq!(ser(&[(0, 1)], 9).sqrt().unwrap().precision(), 5);
        assert_eq!(ser(&[(0, 1)], 10).sqrt().unwrap().precision(), 5);
    }

    #[test]
    fn s_valuations() {
        let v = ser(&[(12, 1), (13, 5)], 40).s_valuation().unwrap();
        assert_eq!(v.as_ratio(), (6, 1));
        let v = ser(&[(-20, 3), (-18, 5)], 40).s_valuation().unwrap();
        assert_eq!(v.as_ratio(), (-10, 1));
        assert_eq!(LaurentSeries::one(f16()).s_valuation().unwrap().as_ratio(), (0, 1));
        assert_eq!(ser(&[(5, 1)], 40).s_valuation().unwrap().to_string(), "5/2");
        assert_eq!(LaurentSeries::zero(f16(), 30).s_valuation(), Err(SeriesError::ZeroSeries));
    }

    #[test]
    fn precision_rules() {
        let a = ser(&[(-3, 1), (0, 7)], 10);
        let b = ser(&[(2, 1)], 20);
        // min(-3 + 20, 2 + 10)
        assert_eq!((&a * &b).precision(), 12);
        assert_eq!((&a + &b).precision(), 10);
        let z = LaurentSeries::zero(f16(), 8);
        assert_eq!((&z * &a).precision(), 5);
        assert_eq!(a.square().precision(), 20);
        assert_eq!(a.shift(4).precision(), 14);
        assert_eq!(ser(&[(5, 1)], 3), LaurentSeries::zero(f16(), 3));
    }

    #[test]
    fn agreement_reports_first_difference() {
        let a = ser(&[(0, 1), (4, 2)], 30);
        let b = ser(&[(0, 1), (4, 3)], 20);
        match a.agreement(&b) {
            Agreement::Differ { exponent, lhs, rhs } => {
                assert_eq!(exponent, 4);
                assert_eq!((lhs.bits(), rhs.bits()), (2, 3));
            }
            other => panic!("{other:?}"),
        }
        assert_eq!(a.agreement(&a.truncate(25)), Agreement::Equal { known_below: 25 });
    }

    #[test]
    fn display_is_sparse() {
        assert_eq!(ser(&[(-2, 0xa), (3, 1)], 7).to_string(), "-2:a, 3:1 + O(t^7)");
        assert_eq!(LaurentSeries::exact_zero(f16()).to_string(), "0");
    }

    fn series_strategy(even: bool) -> impl Strategy<Value = LaurentSeries> {
        (-6i64..6, proptest::collection::vec(any::<u16>(), 1..20)).prop_map(move |(v, cs)| {
            let terms: Vec<(i64, u64)> = cs
                .iter()
                .enumerate()
                .map(|(i, &c)| {
                    let e = v + i as i64;
                    (if even { 2 * e } else { e }, c as u64)
                })
                .collect();
            ser(&terms, 60)
        })
    }

    proptest! {
        #[test]
        fn sqrt_round_trip(f in series_strategy(true)) {
            let r = f.sqrt().unwrap();
            prop_assert_eq!(r.agreement(&r), Agreement::Equal { known_below: r.precision() });
            match r.square().agreement(&f) {
                Agreement::Equal { .. } => {}
                other => prop_assert!(false, "{:?}", other),
            }
        }

        #[test]
        fn inverse_is_involutive(f in series_strategy(false)) {
            prop_assume!(!f.is_zero());
            let g = f.inv().unwrap().inv().unwrap();
            prop_assert!(g.agreement(&f).holds());
            let one = &f * &f.inv().unwrap();
            prop_assert!(one.agreement(&LaurentSeries::one(f16())).holds());
        }

        #[test]
        fn multiplication_commutes(a in series_strategy(false), b in series_strategy(false)) {
            prop_assert_eq!(&a * &b, &b * &a);
            prop_assert_eq!((&a + &b).square(), a.square() + b.square());
        }
    }
}
