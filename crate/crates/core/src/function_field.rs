//! The hyperelliptic function field `F_q(x, y)` with `y^2 = f(x)`, `f` a
//! product of `d` distinct linear factors and `d` odd.
//!
//! Only what the code construction needs is modelled: the one-point divisors
//! `k P_inf`, the rational places, and functions written as linear combinations
//! of the canonical monomials `x^a y^b` with `b` in `{0, 1}`. The pole order of
//! `x^a y^b` at `P_inf` is `2a + d b`, so every pole number is realised by
//! exactly one canonical monomial.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{FieldElement, FieldSpec};

/// `W(P_inf) = <2, d>`: every even integer, plus every odd integer `>= d`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WeierstrassSemigroup {
    d: u64,
}

impl WeierstrassSemigroup {
    pub fn new(d: u64) -> Result<Self> {
        if d.is_multiple_of(2) {
            return Err(Error::InvalidCurve(format!("degree {d} must be odd")));
        }
        Ok(WeierstrassSemigroup { d })
    }

    pub fn degree(&self) -> u64 {
        self.d
    }

    pub fn genus(&self) -> u64 {
        (self.d - 1) / 2
    }

    /// The `g` gaps `1, 3, ..., 2g - 1`.
    pub fn gaps(&self) -> Vec<u64> {
        (0..self.genus()).map(|i| 2 * i + 1).collect()
    }

    pub fn is_pole_number(&self, w: u64) -> bool {
        w.is_multiple_of(2) || w >= self.d
    }

    /// Pole numbers in `[0, k]`, increasing.
    pub fn pole_numbers_up_to(&self, k: u64) -> impl Iterator<Item = u64> + '_ {
        (0..=k).filter(move |&w| self.is_pole_number(w))
    }
}

/// The canonical monomial `x^a y^b`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Monomial {
    pub a: u64,
    pub b: u8,
}

impl Monomial {
    pub const ONE: Monomial = Monomial { a: 0, b: 0 };

    pub fn x_power(a: u64) -> Self {
        Monomial { a, b: 0 }
    }

    pub fn pole_number(&self, d: u64) -> u64 {
        2 * self.a + d * u64::from(self.b)
    }
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.a, self.b) {
            (0, 0) => write!(f, "1"),
            (0, _) => write!(f, "y"),
            (1, 0) => write!(f, "x"),
            (a, 0) => write!(f, "x^{a}"),
            (1, _) => write!(f, "xy"),
            (a, _) => write!(f, "x^{a}y"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Place {
    Affine { x: u64, y: u64 },
    Infinity,
}

impl Place {
    pub fn coordinates(&self) -> Option<(u64, u64)> {
        match *self {
            Place::Affine { x, y } => Some((x, y)),
            Place::Infinity => None,
        }
    }
}

/// Serialized form of a curve.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CurveDescriptor {
    pub q: u64,
    pub roots: Vec<u64>,
    pub d: u64,
    pub genus: u64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HyperellipticCurve {
    spec: FieldSpec,
    roots: Vec<u64>,
    /// Coefficients of `f`, constant term first; leading coefficient 1.
    f_coeffs: Vec<u64>,
}

impl HyperellipticCurve {
    /// The curve `y^2 = prod (x - root)`.
    pub fn new(spec: FieldSpec, roots: &[FieldElement]) -> Result<Self> {
        if let Some(r) = roots.iter().find(|r| r.spec() != spec) {
            return Err(Error::FieldMismatch {
                left: spec.order(),
                right: r.spec().order(),
            });
        }
        let raw: Vec<u64> = roots.iter().map(|r| r.value()).collect();
        Self::from_raw_roots(spec, &raw)
    }

    pub fn from_raw_roots(spec: FieldSpec, roots: &[u64]) -> Result<Self> {
        let d = roots.len();
        if d.is_multiple_of(2) {
            return Err(Error::InvalidCurve(format!(
                "f must have odd degree, got {d} roots"
            )));
        }
        let roots: Vec<u64> = roots.iter().map(|&r| r % spec.order()).collect();
        let mut sorted = roots.clone();
        sorted.sort_unstable();
        if let Some(w) = sorted.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::InvalidCurve(format!(
                "repeated root {}; f must be square-free",
                w[0]
            )));
        }
        let mut f_coeffs = vec![1u64];
        for &r in &roots {
            // multiply by (x - r)
            let mut next = vec![0u64; f_coeffs.len() + 1];
            for (i, &c) in f_coeffs.iter().enumerate() {
                next[i + 1] = spec.add(next[i + 1], c);
                next[i] = spec.sub(next[i], spec.mul(c, r));
            }
            f_coeffs = next;
        }
        Ok(HyperellipticCurve {
            spec,
            roots,
            f_coeffs,
        })
    }

    pub fn from_descriptor(desc: &CurveDescriptor) -> Result<Self> {
        let curve = Self::from_raw_roots(FieldSpec::new(desc.q)?, &desc.roots)?;
        if curve.degree() != desc.d || curve.genus() != desc.genus {
            return Err(Error::InvalidCurve(format!(
                "descriptor claims d = {}, genus = {} but roots give d = {}, genus = {}",
                desc.d,
                desc.genus,
                curve.degree(),
                curve.genus()
            )));
        }
        Ok(curve)
    }

    pub fn descriptor(&self) -> CurveDescriptor {
        CurveDescriptor {
            q: self.spec.order(),
            roots: self.roots.clone(),
            d: self.degree(),
            genus: self.genus(),
        }
    }

    pub fn field(&self) -> FieldSpec {
        self.spec
    }

    pub fn roots(&self) -> &[u64] {
        &self.roots
    }

    pub fn f_coeffs(&self) -> &[u64] {
        &self.f_coeffs
    }

    pub fn degree(&self) -> u64 {
        self.roots.len() as u64
    }

    pub fn genus(&self) -> u64 {
        (self.degree() - 1) / 2
    }

    pub fn semigroup(&self) -> WeierstrassSemigroup {
        WeierstrassSemigroup { d: self.degree() }
    }

    pub fn eval_f(&self, x: u64) -> u64 {
        self.f_coeffs
            .iter()
            .rev()
            .fold(0, |acc, &c| self.spec.add(self.spec.mul(acc, x), c))
    }

    pub fn contains(&self, x: u64, y: u64) -> bool {
        x < self.spec.order() && y < self.spec.order() && self.spec.mul(y, y) == self.eval_f(x)
    }

    /// The canonical monomial with pole number `w`.
    pub fn monomial_for_pole_number(&self, w: u64) -> Result<Monomial> {
        let d = self.degree();
        if !self.semigroup().is_pole_number(w) {
            return Err(Error::NotAPoleNumber(w));
        }
        Ok(if w.is_multiple_of(2) {
            Monomial::x_power(w / 2)
        } else {
            Monomial {
                a: (w - d) / 2,
                b: 1,
            }
        })
    }

    /// Basis of `L(k P_inf)` ordered by pole number.
    pub fn riemann_roch_basis(&self, k: u64) -> Vec<Monomial> {
        self.semigroup()
            .pole_numbers_up_to(k)
            .map(|w| {
                self.monomial_for_pole_number(w)
                    .expect("filtered to pole numbers")
            })
            .collect()
    }

    pub fn evaluate_raw(&self, mono: Monomial, place: &Place) -> Result<u64> {
        let (x, y) = place.coordinates().ok_or(Error::EvaluateAtInfinity)?;
        let mut v = self.spec.pow(x, mono.a);
        if mono.b == 1 {
            v = self.spec.mul(v, y);
        }
        Ok(v)
    }

    pub fn evaluate(&self, mono: Monomial, place: &Place) -> Result<FieldElement> {
        Ok(self.spec.element(self.evaluate_raw(mono, place)?))
    }

    /// Every rational place: affine ones sorted by `(x, y)`, then `P_inf`.
    pub fn enumerate_places(&self) -> Vec<Place> {
        let mut places = Vec::new();
        for x in 0..self.spec.order() {
            for y in self.spec.sqrt(self.eval_f(x)) {
                debug_assert!(self.contains(x, y));
                places.push(Place::Affine { x, y });
            }
        }
        places.push(Place::Infinity);
        places
    }

    /// One affine place per x-coordinate that has any, keeping the smaller `y`.
    pub fn select_distinct_x_places(&self) -> Vec<Place> {
        (0..self.spec.order())
            .filter_map(|x| {
                self.spec
                    .sqrt(self.eval_f(x))
                    .first()
                    .map(|&y| Place::Affine { x, y })
            })
            .collect()
    }

    /// `|#places - (q + 1)| <= floor(2 g sqrt(q))`, in integers.
    pub fn satisfies_hasse_weil(&self, place_count: u64) -> bool {
        let q = self.spec.order();
        let g = self.genus();
        let deviation = place_count.abs_diff(q + 1);
        deviation <= integer_sqrt(4 * g * g * q)
    }
}

/// `floor(sqrt(n))`.
pub fn integer_sqrt(n: u64) -> u64 {
    if n < 2 {
        return n;
    }
    let mut r = (n as f64).sqrt() as u64;
    while r * r > n {
        r -= 1;
    }
    while (r + 1) * (r + 1) <= n {
        r += 1;
    }
    r
}

/// An element of `L(k P_inf)` for some `k`, as a sparse combination of
/// canonical monomials.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct CurveFunction {
    terms: BTreeMap<Monomial, u64>,
}

impl CurveFunction {
    pub fn monomial(mono: Monomial) -> Self {
        let mut terms = BTreeMap::new();
        terms.insert(mono, 1);
        CurveFunction { terms }
    }

    pub fn terms(&self) -> impl Iterator<Item = (Monomial, u64)> + '_ {
        self.terms.iter().map(|(&m, &c)| (m, c))
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    fn add_term(&mut self, curve: &HyperellipticCurve, mono: Monomial, c: u64) {
        let f = curve.field();
        let entry = self.terms.entry(mono).or_insert(0);
        *entry = f.add(*entry, c);
        if *entry == 0 {
            self.terms.remove(&mono);
        }
    }

    pub fn add(&self, other: &Self, curve: &HyperellipticCurve) -> Self {
        let mut out = self.clone();
        for (m, c) in other.terms() {
            out.add_term(curve, m, c);
        }
        out
    }

    pub fn scale(&self, c: u64, curve: &HyperellipticCurve) -> Self {
        let mut out = CurveFunction::default();
        for (m, v) in self.terms() {
            out.add_term(curve, m, curve.field().mul(v, c));
        }
        out
    }

    /// Product, with `y^2` rewritten as `f(x)` so the result stays canonical.
    pub fn mul(&self, other: &Self, curve: &HyperellipticCurve) -> Self {
        let f = curve.field();
        let mut out = CurveFunction::default();
        for (m1, c1) in self.terms() {
            for (m2, c2) in other.terms() {
                let c = f.mul(c1, c2);
                let a = m1.a + m2.a;
                match m1.b + m2.b {
                    2 => {
                        for (i, &fc) in curve.f_coeffs().iter().enumerate() {
                            if fc != 0 {
                                out.add_term(curve, Monomial::x_power(a + i as u64), f.mul(c, fc));
                            }
                        }
                    }
                    b => out.add_term(curve, Monomial { a, b }, c),
                }
            }
        }
        out
    }

    /// Pole order at `P_inf`; `None` for the zero function.
    pub fn pole_number(&self, d: u64) -> Option<u64> {
        self.terms.keys().map(|m| m.pole_number(d)).max()
    }

    pub fn evaluate(&self, place: &Place, curve: &HyperellipticCurve) -> Result<u64> {
        let f = curve.field();
        let mut acc = 0;
        for (m, c) in self.terms() {
            acc = f.add(acc, f.mul(c, curve.evaluate_raw(m, place)?));
        }
        Ok(acc)
    }
}
