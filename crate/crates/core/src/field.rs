//! Arithmetic in odd prime fields `F_q`.
//!
//! [`FieldSpec`] carries the modulus and exposes arithmetic on raw residues
//! (`u64` values already reduced into `[0, q)`); the linear algebra layer works
//! on those directly. [`FieldElement`] pairs a residue with its field and is the
//! checked, user-facing scalar type.

use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest supported modulus (exclusive). Keeps every product of two residues
/// inside a `u64`.
pub const MAX_MODULUS: u64 = 1 << 31;

/// Fields at or below this size take square roots by table scan.
const BRUTE_FORCE_SQRT_BELOW: u64 = 1000;

/// Deterministic primality check by trial division.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    if n.is_multiple_of(2) {
        return n == 2;
    }
    let mut d = 3u64;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 2;
    }
    true
}

/// Smallest odd prime strictly greater than `n`.
pub fn next_odd_prime_after(n: u64) -> u64 {
    let mut c = (n + 1).max(3);
    while !is_prime(c) {
        c += 1;
    }
    c
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "u64", into = "u64")]
pub struct FieldSpec {
    q: u64,
}

impl TryFrom<u64> for FieldSpec {
    type Error = Error;

    fn try_from(q: u64) -> Result<Self> {
        FieldSpec::new(q)
    }
}

impl From<FieldSpec> for u64 {
    fn from(spec: FieldSpec) -> u64 {
        spec.q
    }
}

impl fmt::Display for FieldSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "F_{}", self.q)
    }
}

impl FieldSpec {
    pub fn new(q: u64) -> Result<Self> {
        if !(3..MAX_MODULUS).contains(&q) || !is_prime(q) {
            return Err(Error::NotOddPrime(q));
        }
        Ok(FieldSpec { q })
    }

    #[inline]
    pub fn order(&self) -> u64 {
        self.q
    }

    /// Wraps an arbitrary integer, reducing it modulo `q`.
    pub fn element(&self, value: u64) -> FieldElement {
        FieldElement {
            value: value % self.q,
            q: self.q,
        }
    }

    pub fn from_i64(&self, value: i64) -> FieldElement {
        self.element(value.rem_euclid(self.q as i64) as u64)
    }

    pub fn zero(&self) -> FieldElement {
        self.element(0)
    }

    pub fn one(&self) -> FieldElement {
        self.element(1)
    }

    /// All `q` elements in increasing order.
    pub fn elements(&self) -> impl Iterator<Item = FieldElement> + '_ {
        (0..self.q).map(move |v| self.element(v))
    }

    #[inline]
    pub fn add(&self, a: u64, b: u64) -> u64 {
        let s = a + b;
        if s >= self.q {
            s - self.q
        } else {
            s
        }
    }

    #[inline]
    pub fn sub(&self, a: u64, b: u64) -> u64 {
        if a >= b {
            a - b
        } else {
            a + self.q - b
        }
    }

    #[inline]
    pub fn neg(&self, a: u64) -> u64 {
        if a == 0 {
            0
        } else {
            self.q - a
        }
    }

    #[inline]
    pub fn mul(&self, a: u64, b: u64) -> u64 {
        a * b % self.q
    }

    pub fn pow(&self, base: u64, mut exp: u64) -> u64 {
        let mut acc = 1 % self.q;
        let mut b = base % self.q;
        while exp > 0 {
            if exp & 1 == 1 {
                acc = self.mul(acc, b);
            }
            b = self.mul(b, b);
            exp >>= 1;
        }
        acc
    }

    pub fn inv(&self, a: u64) -> Result<u64> {
        if a.is_multiple_of(self.q) {
            return Err(Error::ZeroInverse);
        }
        Ok(self.pow(a, self.q - 2))
    }

    /// Euler's criterion; zero counts as a square.
    pub fn is_square(&self, a: u64) -> bool {
        let a = a % self.q;
        a == 0 || self.pow(a, (self.q - 1) / 2) == 1
    }

    /// Square roots of `a`: `[b, q - b]` with `b < q - b` for a nonzero square,
    /// `[0]` for zero, empty otherwise.
    pub fn sqrt(&self, a: u64) -> Vec<u64> {
        let a = a % self.q;
        if a == 0 {
            return vec![0];
        }
        if !self.is_square(a) {
            return Vec::new();
        }
        let r = if self.q < BRUTE_FORCE_SQRT_BELOW {
            (1..self.q)
                .find(|&b| self.mul(b, b) == a)
                .expect("Euler's criterion said a root exists")
        } else {
            self.tonelli_shanks(a)
        };
        let other = self.q - r;
        vec![r.min(other), r.max(other)]
    }

    /// One square root of a nonzero quadratic residue.
    pub(crate) fn tonelli_shanks(&self, a: u64) -> u64 {
        let q = self.q;
        let mut s = 0u32;
        let mut odd = q - 1;
        while odd.is_multiple_of(2) {
            odd /= 2;
            s += 1;
        }
        if s == 1 {
            return self.pow(a, (q + 1) / 4);
        }
        let z = (2..q)
            .find(|&z| !self.is_square(z))
            .expect("odd prime field has a non-residue");
        let mut m = s;
        let mut c = self.pow(z, odd);
        let mut t = self.pow(a, odd);
        let mut r = self.pow(a, odd.div_ceil(2));
        while t != 1 {
            let mut i = 0u32;
            let mut t2 = t;
            while t2 != 1 {
                t2 = self.mul(t2, t2);
                i += 1;
            }
            let mut b = c;
            for _ in 0..(m - i - 1) {
                b = self.mul(b, b);
            }
            m = i;
            c = self.mul(b, b);
            t = self.mul(t, c);
            r = self.mul(r, b);
        }
        r
    }
}

/// An element of `F_q` that remembers which field it belongs to.
///
/// The `std::ops` impls panic when the operands come from different fields;
/// use the `checked_*` methods to get an error instead.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FieldElement {
    value: u64,
    q: u64,
}

impl fmt::Display for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.value)
    }
}

impl FieldElement {
    #[inline]
    pub fn value(&self) -> u64 {
        self.value
    }

    #[inline]
    pub fn spec(&self) -> FieldSpec {
        FieldSpec { q: self.q }
    }

    pub fn is_zero(&self) -> bool {
        self.value == 0
    }

    fn same_field(&self, other: &Self) -> Result<FieldSpec> {
        if self.q != other.q {
            return Err(Error::FieldMismatch {
                left: self.q,
                right: other.q,
            });
        }
        Ok(self.spec())
    }

    fn with(&self, value: u64) -> Self {
        FieldElement { value, q: self.q }
    }

    pub fn checked_add(self, rhs: Self) -> Result<Self> {
        let f = self.same_field(&rhs)?;
        Ok(self.with(f.add(self.value, rhs.value)))
    }

    pub fn checked_sub(self, rhs: Self) -> Result<Self> {
        let f = self.same_field(&rhs)?;
        Ok(self.with(f.sub(self.value, rhs.value)))
    }

    pub fn checked_mul(self, rhs: Self) -> Result<Self> {
        let f = self.same_field(&rhs)?;
        Ok(self.with(f.mul(self.value, rhs.value)))
    }

    pub fn checked_div(self, rhs: Self) -> Result<Self> {
        let f = self.same_field(&rhs)?;
        Ok(self.with(f.mul(self.value, f.inv(rhs.value)?)))
    }

    pub fn inv(self) -> Result<Self> {
        Ok(self.with(self.spec().inv(self.value)?))
    }

    pub fn pow(self, exp: u64) -> Self {
        self.with(self.spec().pow(self.value, exp))
    }

    pub fn is_square(self) -> bool {
        self.spec().is_square(self.value)
    }

    /// Both square roots (smaller first), `[0]` for zero, or `None` for a
    /// non-residue.
    pub fn sqrt(self) -> Option<Vec<Self>> {
        let roots = self.spec().sqrt(self.value);
        if roots.is_empty() {
            None
        } else {
            Some(roots.into_iter().map(|r| self.with(r)).collect())
        }
    }
}

macro_rules! binop {
    ($tr:ident, $method:ident, $checked:ident) => {
        impl $tr for FieldElement {
            type Output = FieldElement;

            fn $method(self, rhs: FieldElement) -> FieldElement {
                self.$checked(rhs).unwrap_or_else(|e| panic!("{e}"))
            }
        }
    };
}

binop!(Add, add, checked_add);
binop!(Sub, sub, checked_sub);
binop!(Mul, mul, checked_mul);
binop!(Div, div, checked_div);

impl Neg for FieldElement {
    type Output = FieldElement;

    fn neg(self) -> FieldElement {
        self.with(self.spec().neg(self.value))
    }
}
