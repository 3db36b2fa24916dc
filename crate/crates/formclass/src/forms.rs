//! Positive definite binary quadratic forms ax² + bxy + cy² of
//! negative discriminant.
//!
//! Provides the SL₂(ℤ) right action, Gauss reduction with a
//! transformation witness, automorphism groups, exact representation
//! solving, enumeration of reduced forms, and the exact set of
//! residues mod N attained by forms with leading coefficient prime
//! to N.

use crate::congruence::{lift, sl2_matrix_group, CongruenceError};
use crate::numtheory::{JsonInt, Mat2};
use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::ser::SerializeSeq;
use serde::{Serialize, Serializer};
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq, Clone)]
pub enum FormsError {
    #[error("({0}, {1}, {2}) is not positive definite")]
    NotPositiveDefinite(BigInt, BigInt, BigInt),
    #[error("({0}, {1}, {2}) is not primitive")]
    NotPrimitive(BigInt, BigInt, BigInt),
    #[error("{0} is not a negative discriminant (need < 0 and congruent to 0 or 1 mod 4)")]
    InvalidDiscriminant(BigInt),
    #[error("matrix determinant {0} is not 1")]
    NotUnimodular(BigInt),
    #[error(transparent)]
    Congruence(#[from] CongruenceError),
}

/// A primitive positive definite form `a x² + b xy + c y²`:
/// `a > 0`, `b² - 4ac < 0`, `gcd(a, b, c) = 1`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct QuadForm {
    pub a: BigInt,
    pub b: BigInt,
    pub c: BigInt,
}

impl QuadForm {
    pub fn new(a: BigInt, b: BigInt, c: BigInt) -> Result<QuadForm, FormsError> {
        let disc = &b * &b - BigInt::from(4) * &a * &c;
        if !a.is_positive() || !disc.is_negative() {
            return Err(FormsError::NotPositiveDefinite(a, b, c));
        }
        if !a.gcd(&b).gcd(&c).is_one() {
            return Err(FormsError::NotPrimitive(a, b, c));
        }
        Ok(QuadForm { a, b, c })
    }

    pub fn from_i64(a: i64, b: i64, c: i64) -> Result<QuadForm, FormsError> {
        QuadForm::new(BigInt::from(a), BigInt::from(b), BigInt::from(c))
    }

    pub fn discriminant(&self) -> BigInt {
        &self.b * &self.b - BigInt::from(4) * &self.a * &self.c
    }

    /// Evaluates the form at an integer point.
    pub fn eval(&self, x: &BigInt, y: &BigInt) -> BigInt {
        &self.a * x * x + &self.b * x * y + &self.c * y * y
    }

    /// The unique root of `Q(x, 1)` in the upper half-plane.
    pub fn omega(&self) -> QuadPoint {
        let two_a = BigInt::from(2) * &self.a;
        QuadPoint {
            r: BigRational::new(-self.b.clone(), two_a.clone()),
            s: BigRational::new(BigInt::one(), two_a),
            d: self.discriminant(),
        }
    }

    /// Right action by a determinant-1 integer matrix:
    /// `Q^γ(x, y) = Q(qx + ry, sx + ty)`.
    pub fn act(&self, g: &Mat2) -> Result<QuadForm, FormsError> {
        if !g.det().is_one() {
            return Err(FormsError::NotUnimodular(g.det()));
        }
        let (q, r, s, t) = (g.q(), g.r(), g.s(), g.t());
        let a = self.eval(q, s);
        let c = self.eval(r, t);
        let b = BigInt::from(2) * &self.a * q * r
            + &self.b * (q * t + r * s)
            + BigInt::from(2) * &self.c * s * t;
        let out = QuadForm { a, b, c };
        debug_assert_eq!(out.discriminant(), self.discriminant());
        debug_assert!(out.a.gcd(&out.b).gcd(&out.c).is_one());
        Ok(out)
    }

    /// Leading coefficient of `act(self, g)` without forming the whole
    /// transform: `a q² + b q s + c s²` from the first column of `g`.
    pub fn coeff_x2(&self, g: &Mat2) -> BigInt {
        self.eval(g.q(), g.s())
    }

    pub fn is_reduced(&self) -> bool {
        let abs_b = self.b.abs();
        abs_b <= self.a
            && self.a <= self.c
            && (self.b >= BigInt::zero() || (abs_b != self.a && self.a != self.c))
    }

    /// Gauss reduction. Returns the unique reduced equivalent form
    /// together with a witness `g` such that `act(self, g)` is the
    /// reduced form; deterministic.
    pub fn reduce(&self) -> (QuadForm, Mat2) {
        let mut f = self.clone();
        let mut w = Mat2::identity();
        loop {
            if f.b > f.a || f.b <= -&f.a {
                let two_a = BigInt::from(2) * &f.a;
                let m = (&f.a - &f.b).div_floor(&two_a);
                let t = Mat2::translation(&m);
                f = f.act(&t).expect("translation is unimodular");
                w = w.mul(&t);
            }
            if f.a > f.c {
                let s = Mat2::flip();
                f = f.act(&s).expect("flip is unimodular");
                w = w.mul(&s);
                continue;
            }
            if f.a == f.c && f.b.is_negative() {
                let s = Mat2::flip();
                f = f.act(&s).expect("flip is unimodular");
                w = w.mul(&s);
            }
            break;
        }
        debug_assert!(f.is_reduced());
        debug_assert_eq!(self.act(&w).unwrap(), f);
        (f, w)
    }

    /// All integer pairs `(x, y)` with `Q(x, y) = m`, sorted. Finite
    /// because the form is positive definite: `|y| ≤ sqrt(4am/|D|)`,
    /// and `x` solves a quadratic exactly.
    pub fn represent(&self, m: &BigInt) -> Vec<(BigInt, BigInt)> {
        let mut out: BTreeSet<(BigInt, BigInt)> = BTreeSet::new();
        if m.is_negative() {
            return Vec::new();
        }
        if m.is_zero() {
            return vec![(BigInt::zero(), BigInt::zero())];
        }
        let d = self.discriminant();
        let four_am = BigInt::from(4) * &self.a * m;
        let y_bound = (&four_am / d.abs()).sqrt();
        let two_a = BigInt::from(2) * &self.a;
        let mut y = -&y_bound;
        while y <= y_bound {
            let disc_x = &four_am + &d * &y * &y;
            if !disc_x.is_negative() {
                let root = disc_x.sqrt();
                if &root * &root == disc_x {
                    for r in [root.clone(), -root] {
                        let num = -&self.b * &y + r;
                        if num.mod_floor(&two_a).is_zero() {
                            let x = num / &two_a;
                            debug_assert_eq!(self.eval(&x, &y), *m);
                            out.insert((x, y.clone()));
                        }
                    }
                }
            }
            y += 1;
        }
        out.into_iter().collect()
    }

    /// The full SL₂(ℤ)-stabilizer of the form, sorted. Candidate
    /// columns come from the representations of `a` and `c`.
    pub fn automorphs(&self) -> Vec<Mat2> {
        let first = self.represent(&self.a);
        let second = self.represent(&self.c);
        let mut out = BTreeSet::new();
        for (q, s) in &first {
            for (r, t) in &second {
                let g = Mat2::new(q.clone(), r.clone(), s.clone(), t.clone());
                if g.det().is_one() && self.act(&g).unwrap() == *self {
                    out.insert(g.entries().clone());
                }
            }
        }
        out.into_iter()
            .map(|[q, r, s, t]| Mat2::new(q, r, s, t))
            .collect()
    }
}

impl fmt::Display for QuadForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {})", self.a, self.b, self.c)
    }
}

impl Serialize for QuadForm {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut seq = serializer.serialize_seq(Some(3))?;
        seq.serialize_element(&JsonInt(&self.a))?;
        seq.serialize_element(&JsonInt(&self.b))?;
        seq.serialize_element(&JsonInt(&self.c))?;
        seq.end()
    }
}

/// A point `r + s·sqrt(D)` of the upper half-plane, `s > 0`, `D < 0`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QuadPoint {
    pub r: BigRational,
    pub s: BigRational,
    pub d: BigInt,
}

impl QuadPoint {
    pub fn new(r: BigRational, s: BigRational, d: BigInt) -> Result<QuadPoint, FormsError> {
        if !s.is_positive() || !is_discriminant(&d) {
            return Err(FormsError::InvalidDiscriminant(d));
        }
        Ok(QuadPoint { r, s, d })
    }
}

impl fmt::Display for QuadPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} + {}*sqrt({})", self.r, self.s, self.d)
    }
}

fn is_discriminant(d: &BigInt) -> bool {
    d.is_negative() && {
        let m = d.mod_floor(&BigInt::from(4));
        m.is_zero() || m.is_one()
    }
}

/// The principal form of discriminant D: `(1, 1, (1-D)/4)` for odd D,
/// `(1, 0, -D/4)` for even D.
pub fn principal_form(d: &BigInt) -> Result<QuadForm, FormsError> {
    if !is_discriminant(d) {
        return Err(FormsError::InvalidDiscriminant(d.clone()));
    }
    let four = BigInt::from(4);
    if d.mod_floor(&four).is_one() {
        QuadForm::new(BigInt::one(), BigInt::one(), (BigInt::one() - d) / four)
    } else {
        QuadForm::new(BigInt::one(), BigInt::zero(), -d / four)
    }
}

/// All reduced forms of discriminant D, sorted by `(a, b, c)`. Their
/// count is the class number h(D).
pub fn reduced_forms(d: &BigInt) -> Result<Vec<QuadForm>, FormsError> {
    if !is_discriminant(d) {
        return Err(FormsError::InvalidDiscriminant(d.clone()));
    }
    let mut out = Vec::new();
    let four = BigInt::from(4);
    let mut b = d.mod_floor(&BigInt::from(2));
    // |b| ≤ a ≤ c forces 3b² ≤ |D|
    while BigInt::from(3) * &b * &b <= d.abs() {
        let ac = (&b * &b - d) / &four;
        let mut a = if b.is_zero() { BigInt::one() } else { b.clone() };
        while &a * &a <= ac {
            if ac.mod_floor(&a).is_zero() {
                let c = &ac / &a;
                if a.gcd(&b).gcd(&c).is_one() {
                    out.push(QuadForm {
                        a: a.clone(),
                        b: b.clone(),
                        c: c.clone(),
                    });
                    if b.is_positive() && b < a && a < c {
                        out.push(QuadForm {
                            a: a.clone(),
                            b: -&b,
                            c,
                        });
                    }
                }
            }
            a += 1;
        }
        b += 2;
    }
    out.sort();
    debug_assert!(out.iter().all(|f| f.is_reduced() && f.discriminant() == *d));
    Ok(out)
}

/// Class number h(D): the number of reduced forms.
pub fn class_number(d: &BigInt) -> Result<u64, FormsError> {
    Ok(reduced_forms(d)?.len() as u64)
}

/// Residue triple of a form mod n.
pub fn form_residue(q: &QuadForm, n: u64) -> [u64; 3] {
    let nb = BigInt::from(n);
    let red = |v: &BigInt| v.mod_floor(&nb).to_u64().unwrap();
    [red(&q.a), red(&q.b), red(&q.c)]
}

/// The exact set of residues mod N of forms of discriminant D with
/// leading coefficient prime to N, each keyed triple holding one
/// integral preimage form.
///
/// Completeness: every such form is `act(R, γ)` for a reduced `R` and
/// some `γ` in SL₂(ℤ), the residue of `act(R, γ)` depends only on `γ`
/// mod N, and reduction SL₂(ℤ) → SL₂(ℤ/Nℤ) is surjective; so running
/// `γ` over lifts of all of SL₂(ℤ/Nℤ) reaches every residue.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ResidueForms {
    modulus: u64,
    map: BTreeMap<[u64; 3], QuadForm>,
}

impl ResidueForms {
    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    pub fn contains(&self, triple: &[u64; 3]) -> bool {
        self.map.contains_key(triple)
    }

    pub fn contains_form(&self, q: &QuadForm) -> bool {
        self.contains(&form_residue(q, self.modulus))
    }

    /// One integral form reducing to the given triple.
    pub fn preimage(&self, triple: &[u64; 3]) -> Option<&QuadForm> {
        self.map.get(triple)
    }

    pub fn triples(&self) -> impl Iterator<Item = &[u64; 3]> {
        self.map.keys()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&[u64; 3], &QuadForm)> {
        self.map.iter()
    }
}

/// Computes [`ResidueForms`] for discriminant D at level N by acting
/// on every reduced form with lifts of all of SL₂(ℤ/Nℤ) and keeping
/// the residues with unit leading coefficient.
pub fn residue_forms(d: &BigInt, n: u64) -> Result<ResidueForms, FormsError> {
    let reduced = reduced_forms(d)?;
    let ambient = sl2_matrix_group(n)?;
    let lifts: Vec<Mat2> = ambient
        .elements()
        .map(|e| lift(&e))
        .collect::<Result<_, _>>()?;
    let nb = BigInt::from(n);
    let mut map: BTreeMap<[u64; 3], QuadForm> = BTreeMap::new();
    for r in &reduced {
        for g in &lifts {
            let q = r.act(g).expect("lift has determinant 1");
            if q.a.gcd(&nb).is_one() {
                map.entry(form_residue(&q, n)).or_insert(q);
            }
        }
    }
    Ok(ResidueForms { modulus: n, map })
}
