//! Arithmetic in GF(2^m) for 1 <= m <= 64, polynomial basis.
//!
//! An element is stored as a `u64` whose bit `i` is the coefficient of
//! `x^i`. The modulus is stored with its leading bit, so it needs 65 bits in
//! the worst case and lives in a `u128`.

use alloc::string::String;
use core::fmt;
use core::ops::{Add, AddAssign, Mul, MulAssign};

use crate::error::FieldError;

/// Largest supported extension degree (one machine word per element).
pub const MAX_DEGREE: u32 = 64;

/// Description of GF(2^m): the degree and an irreducible modulus.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub struct FieldParams {
    degree: u32,
    modulus: u128,
}

impl FieldParams {
    /// GF(2^degree) with the numerically smallest irreducible modulus whose
    /// constant bit is set.
    pub fn new(degree: u32) -> Result<Self, FieldError> {
        check_degree(degree)?;
        let lead = 1u128 << degree;
        let mut candidate = lead | 1;
        loop {
            if is_irreducible(candidate) {
                return Ok(FieldParams {
                    degree,
                    modulus: candidate,
                });
            }
            // every irreducible polynomial of degree >= 2 has constant bit set,
            // and for degree 1 the only admissible choice is x + 1
            candidate += 2;
            debug_assert!(candidate < lead << 1);
        }
    }

    /// GF(2^degree) with an explicit modulus (leading bit included).
    pub fn with_modulus(degree: u32, modulus: u128) -> Result<Self, FieldError> {
        check_degree(degree)?;
        if poly_degree(modulus) != Some(degree) || modulus & 1 == 0 {
            return Err(FieldError::BadModulus { degree });
        }
        if !is_irreducible(modulus) {
            return Err(FieldError::Reducible);
        }
        Ok(FieldParams { degree, modulus })
    }

    /// Like [`FieldParams::with_modulus`], reading the modulus as hex.
    pub fn from_hex(degree: u32, modulus_hex: &str) -> Result<Self, FieldError> {
        let modulus = parse_hex_u128(modulus_hex)?;
        Self::with_modulus(degree, modulus)
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn modulus(&self) -> u128 {
        self.modulus
    }

    pub fn modulus_hex(&self) -> String {
        alloc::format!("{:x}", self.modulus)
    }

    /// Number of elements, `2^m`.
    pub fn order(&self) -> u128 {
        1u128 << self.degree
    }

    /// Mask selecting the `m` low bits.
    #[inline]
    pub fn mask(&self) -> u64 {
        if self.degree == 64 {
            u64::MAX
        } else {
            (1u64 << self.degree) - 1
        }
    }

    pub fn element(&self, bits: u64) -> Result<FieldElement, FieldError> {
        if bits & !self.mask() != 0 {
            return Err(FieldError::ElementOutOfRange {
                degree: self.degree,
            });
        }
        Ok(FieldElement { bits, field: *self })
    }

    pub fn element_from_hex(&self, hex: &str) -> Result<FieldElement, FieldError> {
        let v = parse_hex_u128(hex)?;
        if v > u64::MAX as u128 {
            return Err(FieldError::ElementOutOfRange {
                degree: self.degree,
            });
        }
        self.element(v as u64)
    }

    pub fn zero(&self) -> FieldElement {
        FieldElement {
            bits: 0,
            field: *self,
        }
    }

    pub fn one(&self) -> FieldElement {
        FieldElement {
            bits: 1,
            field: *self,
        }
    }

    /// Iterates over every element in increasing bit order. Only sensible
    /// for small degrees.
    pub fn elements(&self) -> impl Iterator<Item = FieldElement> + '_ {
        let field = *self;
        let top = self.mask();
        (0..=top).map(move |bits| FieldElement { bits, field })
    }

    // Raw word operations. Inputs must already be reduced.

    #[inline]
    pub fn add_raw(&self, a: u64, b: u64) -> u64 {
        a ^ b
    }

    #[inline]
    pub fn mul_raw(&self, a: u64, b: u64) -> u64 {
        if a == 0 || b == 0 {
            return 0;
        }
        self.reduce(clmul(a, b))
    }

    #[inline]
    pub fn sqr_raw(&self, a: u64) -> u64 {
        self.reduce(spread_bits(a))
    }

    pub fn pow_raw(&self, mut a: u64, mut e: u128) -> u64 {
        let mut r = 1u64;
        while e != 0 {
            if e & 1 == 1 {
                r = self.mul_raw(r, a);
            }
            a = self.sqr_raw(a);
            e >>= 1;
        }
        r
    }

    /// a^(2^m - 2), computed as the product of a^(2^i) for 1 <= i < m.
    pub fn inv_raw(&self, a: u64) -> Option<u64> {
        if a == 0 {
            return None;
        }
        let mut r = 1u64;
        let mut x = a;
        for _ in 1..self.degree {
            x = self.sqr_raw(x);
            r = self.mul_raw(r, x);
        }
        Some(r)
    }

    /// Inverse Frobenius: a^(2^(m-1)).
    pub fn sqrt_raw(&self, a: u64) -> u64 {
        let mut x = a;
        for _ in 1..self.degree {
            x = self.sqr_raw(x);
        }
        x
    }

    #[inline]
    fn reduce(&self, mut p: u128) -> u64 {
        let m = self.degree;
        while p >> m != 0 {
            let top = 127 - p.leading_zeros();
            p ^= self.modulus << (top - m);
        }
        p as u64
    }
}

fn check_degree(degree: u32) -> Result<(), FieldError> {
    if degree == 0 || degree > MAX_DEGREE {
        Err(FieldError::DegreeOutOfRange { degree })
    } else {
        Ok(())
    }
}

/// Carryless product of two 64-bit words.
#[inline]
fn clmul(a: u64, b: u64) -> u128 {
    let (a, mut b) = if a.count_ones() < b.count_ones() {
        (b as u128, a)
    } else {
        (a as u128, b)
    };
    let mut r = 0u128;
    while b != 0 {
        let i = b.trailing_zeros();
        r ^= a << i;
        b &= b - 1;
    }
    r
}

/// Squaring over GF(2) interleaves zero bits.
#[inline]
fn spread_bits(a: u64) -> u128 {
    let mut x = a as u128;
    x = (x | (x << 32)) & 0x0000_0000_FFFF_FFFF_0000_0000_FFFF_FFFF;
    x = (x | (x << 16)) & 0x0000_FFFF_0000_FFFF_0000_FFFF_0000_FFFF;
    x = (x | (x << 8)) & 0x00FF_00FF_00FF_00FF_00FF_00FF_00FF_00FF;
    x = (x | (x << 4)) & 0x0F0F_0F0F_0F0F_0F0F_0F0F_0F0F_0F0F_0F0F;
    x = (x | (x << 2)) & 0x3333_3333_3333_3333_3333_3333_3333_3333;
    x = (x | (x << 1)) & 0x5555_5555_5555_5555_5555_5555_5555_5555;
    x
}

fn poly_degree(p: u128) -> Option<u32> {
    if p == 0 {
        None
    } else {
        Some(127 - p.leading_zeros())
    }
}

fn poly_rem(mut a: u128, b: u128) -> u128 {
    let db = poly_degree(b).expect("nonzero divisor");
    while let Some(da) = poly_degree(a) {
        if da < db {
            break;
        }
        a ^= b << (da - db);
    }
    a
}

fn poly_gcd(mut a: u128, mut b: u128) -> u128 {
    while b != 0 {
        let r = poly_rem(a, b);
        a = b;
        b = r;
    }
    a
}

/// Multiplies two residues modulo `f` (degree <= 64) without overflow.
fn poly_mulmod(a: u128, b: u128, f: u128) -> u128 {
    let df = poly_degree(f).expect("nonzero modulus");
    let mut r = 0u128;
    let mut a = poly_rem(a, f);
    let mut b = b;
    while b != 0 {
        if b & 1 == 1 {
            r ^= a;
        }
        b >>= 1;
        a <<= 1;
        if a >> df & 1 == 1 {
            a ^= f;
        }
    }
    r
}

/// Ben-Or irreducibility test: f of degree m is irreducible iff
/// gcd(x^(2^i) - x, f) = 1 for every 1 <= i <= m/2.
pub fn is_irreducible(f: u128) -> bool {
    let m = match poly_degree(f) {
        None | Some(0) => return false,
        Some(m) => m,
    };
    if m == 1 {
        return true;
    }
    let x = 0b10u128;
    let mut h = x;
    for _ in 0..m / 2 {
        h = poly_mulmod(h, h, f);
        if poly_gcd(f, h ^ x) != 1 {
            return false;
        }
    }
    true
}

fn parse_hex_u128(s: &str) -> Result<u128, FieldError> {
    if s.is_empty() || s.len() > 32 || !s.bytes().all(|b| b.is_ascii_hexdigit()) {
        return Err(FieldError::BadHex(String::from(s)));
    }
    u128::from_str_radix(s, 16).map_err(|_| FieldError::BadHex(String::from(s)))
}

/// An element of GF(2^m), tagged with its field.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub struct FieldElement {
    bits: u64,
    field: FieldParams,
}

impl FieldElement {
    pub fn bits(&self) -> u64 {
        self.bits
    }

    pub fn field(&self) -> FieldParams {
        self.field
    }

    pub fn is_zero(&self) -> bool {
        self.bits == 0
    }

    pub fn is_one(&self) -> bool {
        self.bits == 1
    }

    fn same_field(&self, other: &Self) -> Result<(), FieldError> {
        if self.field == other.field {
            Ok(())
        } else {
            Err(FieldError::FieldMismatch)
        }
    }

    pub fn checked_add(&self, other: &Self) -> Result<Self, FieldError> {
        self.same_field(other)?;
        Ok(FieldElement {
            bits: self.bits ^ other.bits,
            field: self.field,
        })
    }

    pub fn checked_mul(&self, other: &Self) -> Result<Self, FieldError> {
        self.same_field(other)?;
        Ok(FieldElement {
            bits: self.field.mul_raw(self.bits, other.bits),
            field: self.field,
        })
    }

    pub fn square(&self) -> Self {
        FieldElement {
            bits: self.field.sqr_raw(self.bits),
            field: self.field,
        }
    }

    pub fn pow(&self, e: u128) -> Self {
        FieldElement {
            bits: self.field.pow_raw(self.bits, e),
            field: self.field,
        }
    }

    pub fn inv(&self) -> Result<Self, FieldError> {
        self.field
            .inv_raw(self.bits)
            .map(|bits| FieldElement {
                bits,
                field: self.field,
            })
            .ok_or(FieldError::DivisionByZero)
    }

    /// The unique square root (inverse Frobenius).
    pub fn sqrt(&self) -> Self {
        FieldElement {
            bits: self.field.sqrt_raw(self.bits),
            field: self.field,
        }
    }

    pub fn to_hex(&self) -> String {
        alloc::format!("{:x}", self.bits)
    }
}

impl fmt::Display for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:x}", self.bits)
    }
}

// Operator forms panic on mixed fields; use the checked methods when the
// operands come from untrusted input.

impl Add for FieldElement {
    type Output = FieldElement;
    fn add(self, rhs: Self) -> Self {
        self.checked_add(&rhs).expect("operands from different fields")
    }
}

impl AddAssign for FieldElement {
    fn add_assign(&mut self, rhs: Self) {
        *self = *self + rhs;
    }
}

impl Mul for FieldElement {
    type Output = FieldElement;
    fn mul(self, rhs: Self) -> Self {
        self.checked_mul(&rhs).expect("operands from different fields")
    }
}

impl MulAssign for FieldElement {
    fn mul_assign(&mut self, rhs: Self) {
        *self = *self * rhs;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn gf4() -> FieldParams {
        FieldParams::with_modulus(2, 0b111).unwrap()
    }

    #[test]
    fn default_moduli() {
        let expect = [(1, 0x3u128), (2, 0x7), (3, 0xb), (4, 0x13), (8, 0x11b), (16, 0x1002b)];
        for (m, modulus) in expect {
            assert_eq!(FieldParams::new(m).unwrap().modulus(), modulus, "m = {m}");
        }
        // x^64 + x^4 + x^3 + x + 1
        assert_eq!(FieldParams::new(64).unwrap().modulus(), (1u128 << 64) | 0x1b);
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(matches!(FieldParams::new(0), Err(FieldError::DegreeOutOfRange { .. })));
        assert!(matches!(FieldParams::new(65), Err(FieldError::DegreeOutOfRange { .. })));
        // x^2 + 1 = (x + 1)^2
        assert_eq!(FieldParams::with_modulus(2, 0b101), Err(FieldError::Reducible));
        assert!(matches!(FieldParams::with_modulus(2, 0b110), Err(FieldError::BadModulus { .. })));
        assert!(matches!(FieldParams::with_modulus(3, 0b111), Err(FieldError::BadModulus { .. })));
        assert!(FieldParams::from_hex(8, "0x11b").is_err());
        assert_eq!(FieldParams::from_hex(8, "11b").unwrap().modulus(), 0x11b);
    }

    #[test]
    fn irreducibility_matches_trial_division() {
        fn by_trial(f: u128) -> bool {
            let d = poly_degree(f).unwrap();
            (2u128..1 << (d / 2 + 1))
                .filter(|g| poly_degree(*g).unwrap() <= d / 2)
                .all(|g| poly_rem(f, g) != 0)
        }
        for f in 2u128..1 << 11 {
            assert_eq!(is_irreducible(f), by_trial(f), "f = {f:#b}");
        }
    }

    #[test]
    fn gf2_basics() {
        let f = FieldParams::new(1).unwrap();
        assert_eq!(f.one() + f.one(), f.zero());
        assert_eq!(f.one() * f.one(), f.one());
    }

    #[test]
    fn gf4_examples() {
        let f = gf4();
        let g = f.element(0b10).unwrap();
        assert_eq!((g * g).bits(), 0b11);
        assert_eq!(g.inv().unwrap().bits(), 0b11);
        assert_eq!(g.sqrt().bits(), 0b11);
        assert_eq!(f.one().inv().unwrap(), f.one());
        assert_eq!(f.zero().inv(), Err(FieldError::DivisionByZero));
        assert_eq!(f.zero().sqrt(), f.zero());
        assert_eq!(f.one().sqrt(), f.one());
    }

    #[test]
    fn mismatched_fields() {
        let a = FieldParams::new(3).unwrap().one();
        let b = FieldParams::new(4).unwrap().one();
        assert_eq!(a.checked_add(&b), Err(FieldError::FieldMismatch));
        assert_eq!(a.checked_mul(&b), Err(FieldError::FieldMismatch));
        assert!(FieldParams::new(3).unwrap().element(8).is_err());
    }

    #[test]
    fn exhaustive_small_fields() {
        for m in 1..=8 {
            let f = FieldParams::new(m).unwrap();
            for a in f.elements() {
                assert_eq!((a * a).sqrt(), a);
                assert_eq!(a.sqrt() * a.sqrt(), a);
                assert_eq!(a + a, f.zero());
                assert_eq!(a * f.one(), a);
                if !a.is_zero() {
                    assert_eq!(a * a.inv().unwrap(), f.one());
                }
            }
        }
    }

    #[test]
    fn hex_round_trip() {
        let f = FieldParams::new(16).unwrap();
        let a = f.element_from_hex("beef").unwrap();
        assert_eq!(a.to_hex(), "beef");
        assert_eq!(f.zero().to_hex(), "0");
        assert!(f.element_from_hex("10000").is_err());
        assert!(f.element_from_hex("").is_err());
    }

    fn field_strategy() -> impl Strategy<Value = FieldParams> {
        prop_oneof![Just(8u32), Just(16), Just(31), Just(47), Just(64)]
            .prop_map(|m| FieldParams::new(m).unwrap())
    }

    proptest! {
        #[test]
        fn ring_laws(f in field_strategy(), a in any::<u64>(), b in any::<u64>(), c in any::<u64>()) {
            let (a, b, c) = (
                f.element(a & f.mask()).unwrap(),
                f.element(b & f.mask()).unwrap(),
                f.element(c & f.mask()).unwrap(),
            );
            prop_assert_eq!(a * b, b * a);
            prop_assert_eq!((a * b) * c, a * (b * c));
            prop_assert_eq!(a * (b + c), a * b + a * c);
            prop_assert_eq!(a.square(), a * a);
            prop_assert_eq!((a + b).sqrt(), a.sqrt() + b.sqrt());
            prop_assert_eq!(a.sqrt().square(), a);
            if !a.is_zero() {
                prop_assert_eq!(a * a.inv().unwrap(), f.one());
            }
        }
    }
}
