//! Exact integer and residue arithmetic: quadratic symbols, modular
//! square roots, CRT, extended gcd, integer 2x2 matrices, and rank-2
//! lattices in Hermite normal form.
//!
//! Everything here is deterministic and exact. The scalar helpers work
//! on `u64` moduli with `u128` intermediates (no silent overflow); the
//! lattice and matrix types use `BigInt` throughout.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::ser::{Serialize, SerializeSeq, Serializer};
use std::fmt;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq, Clone)]
pub enum NumTheoryError {
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("modulus must be positive")]
    ZeroModulus,
    #[error("generators span a lattice of rank < 2")]
    DegenerateLattice,
    #[error("matrix has determinant {0}, expected 1")]
    NotUnimodular(BigInt),
    #[error("no solution to the given congruences")]
    NoCrtSolution,
}

/// Extended gcd: returns `(g, x, y)` with `a*x + b*y = g` and `g >= 0`.
pub fn ext_gcd(a: &BigInt, b: &BigInt) -> (BigInt, BigInt, BigInt) {
    let (mut r0, mut r1) = (a.clone(), b.clone());
    let (mut x0, mut x1) = (BigInt::one(), BigInt::zero());
    let (mut y0, mut y1) = (BigInt::zero(), BigInt::one());
    while !r1.is_zero() {
        let q = &r0 / &r1;
        let r = &r0 - &q * &r1;
        r0 = std::mem::replace(&mut r1, r);
        let x = &x0 - &q * &x1;
        x0 = std::mem::replace(&mut x1, x);
        let y = &y0 - &q * &y1;
        y0 = std::mem::replace(&mut y1, y);
    }
    if r0.is_negative() {
        (-r0, -x0, -y0)
    } else {
        (r0, x0, y0)
    }
}

/// Trial-division primality test, adequate at desk scale.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    if n % 2 == 0 {
        return n == 2;
    }
    let mut d = 3u64;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 2;
    }
    true
}

/// Prime factorization `n = prod p^e` with ascending primes. `n >= 1`.
pub fn factorize(mut n: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    let mut p = 2u64;
    while p * p <= n {
        if n % p == 0 {
            let mut e = 0;
            while n % p == 0 {
                n /= p;
                e += 1;
            }
            out.push((p, e));
        }
        p += if p == 2 { 1 } else { 2 };
    }
    if n > 1 {
        out.push((n, 1));
    }
    out
}

/// Distinct prime divisors of `n`, ascending.
pub fn prime_divisors(n: u64) -> Vec<u64> {
    factorize(n).into_iter().map(|(p, _)| p).collect()
}

/// Largest squarefree divisor of `n`.
pub fn radical(n: u64) -> u64 {
    prime_divisors(n).into_iter().product::<u64>().max(1)
}

pub fn is_squarefree(n: u64) -> bool {
    n >= 1 && factorize(n).iter().all(|&(_, e)| e == 1)
}

/// Euler totient.
pub fn totient(n: u64) -> u64 {
    let mut t = n;
    for (p, _) in factorize(n) {
        t = t / p * (p - 1);
    }
    t
}

pub fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

pub fn pow_mod(mut a: u64, mut e: u64, m: u64) -> u64 {
    if m == 1 {
        return 0;
    }
    let mut r = 1u64;
    a %= m;
    while e > 0 {
        if e & 1 == 1 {
            r = mul_mod(r, a, m);
        }
        a = mul_mod(a, a, m);
        e >>= 1;
    }
    r
}

/// Inverse of `a` mod `m`, if `gcd(a, m) = 1`.
pub fn inv_mod(a: u64, m: u64) -> Option<u64> {
    if m == 0 {
        return None;
    }
    if m == 1 {
        return Some(0);
    }
    let (g, x, _) = ext_gcd(&BigInt::from(a), &BigInt::from(m));
    if !g.is_one() {
        return None;
    }
    Some(x.mod_floor(&BigInt::from(m)).to_u64().unwrap())
}

/// Chinese remainder merge of `(residue, modulus)` pairs. Moduli need
/// not be pairwise coprime; `None` when the congruences conflict.
pub fn crt(pairs: &[(u64, u64)]) -> Option<(u64, u64)> {
    let mut r0: u128 = 0;
    let mut m0: u128 = 1;
    for &(r, m) in pairs {
        if m == 0 {
            return None;
        }
        let (r, m) = (r as u128 % m as u128, m as u128);
        let g = {
            let (g, _, _) = ext_gcd(&BigInt::from(m0), &BigInt::from(m));
            g.to_u128().unwrap()
        };
        if (r0 % g) != (r % g) {
            return None;
        }
        let lcm = m0 / g * m;
        // solve r0 + m0*t === r (mod m): t === (r - r0)/g * inv(m0/g) (mod m/g)
        let diff = ((r + lcm - r0 % lcm) % lcm) / g;
        let m0g = m0 / g;
        let mg = m / g;
        let inv = inv_mod((m0g % mg) as u64, mg as u64)? as u128;
        let t = diff % mg * inv % mg;
        r0 = (r0 + m0 * t) % lcm;
        m0 = lcm;
    }
    Some((r0 as u64, m0 as u64))
}

/// Kronecker symbol `(d / p)` for prime `p`.
///
/// For odd `p` this is the Legendre symbol, computed by Euler's
/// criterion; at `p = 2` it is `0` for even `d`, `+1` for
/// `d === +-1 (mod 8)` and `-1` for `d === +-3 (mod 8)`.
pub fn kronecker(d: &BigInt, p: u64) -> Result<i32, NumTheoryError> {
    if !is_prime(p) {
        return Err(NumTheoryError::NotPrime(p));
    }
    if p == 2 {
        let r = d.mod_floor(&BigInt::from(8u8)).to_u64().unwrap();
        return Ok(match r {
            1 | 7 => 1,
            3 | 5 => -1,
            _ => 0,
        });
    }
    let pb = BigInt::from(p);
    let dp = d.mod_floor(&pb);
    if dp.is_zero() {
        return Ok(0);
    }
    let e = (&pb - 1) / 2;
    let r = dp.modpow(&e, &pb);
    Ok(if r.is_one() { 1 } else { -1 })
}

/// Kronecker symbol `(d / m)` for a positive integer `m`: the product
/// of `(d / p)` over the prime factorization of `m`, with `(d / 1) = 1`.
pub fn kronecker_composite(d: &BigInt, m: u64) -> Result<i32, NumTheoryError> {
    if m == 0 {
        return Err(NumTheoryError::ZeroModulus);
    }
    let mut out = 1i32;
    for (p, e) in factorize(m) {
        out *= kronecker(d, p)?.pow(e);
    }
    Ok(out)
}

/// Smallest nonnegative square root of `a` mod `m`, by exhaustive scan.
///
/// Intended for desk-scale moduli (`m <= 10^6`); returns `None` when no
/// root exists or `m = 0`.
pub fn sqrt_mod(a: &BigInt, m: u64) -> Option<Residue> {
    if m == 0 {
        return None;
    }
    let t = a.mod_floor(&BigInt::from(m)).to_u64().unwrap();
    (0..m).find(|&x| mul_mod(x, x, m) == t).map(|x| Residue::new(x as i64, m))
}

/// A residue class modulo a fixed positive modulus.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Residue {
    value: u64,
    modulus: u64,
}

impl Residue {
    /// Canonical representative of `v` mod `m`. Panics if `m = 0`.
    pub fn new(v: i64, m: u64) -> Residue {
        assert!(m > 0, "modulus must be positive");
        Residue {
            value: (v.rem_euclid(m as i64)) as u64,
            modulus: m,
        }
    }

    pub fn from_bigint(v: &BigInt, m: u64) -> Residue {
        assert!(m > 0, "modulus must be positive");
        Residue {
            value: v.mod_floor(&BigInt::from(m)).to_u64().unwrap(),
            modulus: m,
        }
    }

    pub fn value(&self) -> u64 {
        self.value
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    fn check(&self, other: &Residue) {
        assert_eq!(self.modulus, other.modulus, "modulus mismatch");
    }

    pub fn add(&self, other: &Residue) -> Residue {
        self.check(other);
        Residue {
            value: ((self.value as u128 + other.value as u128) % self.modulus as u128) as u64,
            modulus: self.modulus,
        }
    }

    pub fn sub(&self, other: &Residue) -> Residue {
        self.check(other);
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Residue {
        Residue {
            value: (self.modulus - self.value) % self.modulus,
            modulus: self.modulus,
        }
    }

    pub fn mul(&self, other: &Residue) -> Residue {
        self.check(other);
        Residue {
            value: mul_mod(self.value, other.value, self.modulus),
            modulus: self.modulus,
        }
    }

    pub fn pow(&self, e: u64) -> Residue {
        Residue {
            value: pow_mod(self.value, e, self.modulus),
            modulus: self.modulus,
        }
    }

    pub fn is_unit(&self) -> bool {
        self.value.gcd(&self.modulus) == 1
    }

    pub fn inv(&self) -> Option<Residue> {
        inv_mod(self.value, self.modulus).map(|v| Residue {
            value: v,
            modulus: self.modulus,
        })
    }
}

impl fmt::Display for Residue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} (mod {})", self.value, self.modulus)
    }
}

/// Serializes a `BigInt` as a JSON number when it fits in `i64`, else
/// as a decimal string.
pub(crate) struct JsonInt<'a>(pub &'a BigInt);

/// serde helper for struct fields holding a BigInt.
pub(crate) fn serialize_bigint<S: Serializer>(x: &BigInt, s: S) -> Result<S::Ok, S::Error> {
    JsonInt(x).serialize(s)
}

impl<'a> Serialize for JsonInt<'a> {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self.0.to_i64() {
            Some(v) => s.serialize_i64(v),
            None => s.collect_str(self.0),
        }
    }
}

/// Integer 2x2 matrix `[[q, r], [s, t]]`, stored row-major.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Mat2 {
    e: [BigInt; 4],
}

impl Mat2 {
    pub fn new(q: BigInt, r: BigInt, s: BigInt, t: BigInt) -> Mat2 {
        Mat2 { e: [q, r, s, t] }
    }

    pub fn from_i64(q: i64, r: i64, s: i64, t: i64) -> Mat2 {
        Mat2::new(BigInt::from(q), BigInt::from(r), BigInt::from(s), BigInt::from(t))
    }

    pub fn identity() -> Mat2 {
        Mat2::from_i64(1, 0, 0, 1)
    }

    /// Upper unipotent `[[1, k], [0, 1]]`.
    pub fn translation(k: &BigInt) -> Mat2 {
        Mat2::new(BigInt::one(), k.clone(), BigInt::zero(), BigInt::one())
    }

    /// `[[0, -1], [1, 0]]`.
    pub fn flip() -> Mat2 {
        Mat2::from_i64(0, -1, 1, 0)
    }

    pub fn entries(&self) -> &[BigInt; 4] {
        &self.e
    }

    pub fn q(&self) -> &BigInt {
        &self.e[0]
    }
    pub fn r(&self) -> &BigInt {
        &self.e[1]
    }
    pub fn s(&self) -> &BigInt {
        &self.e[2]
    }
    pub fn t(&self) -> &BigInt {
        &self.e[3]
    }

    pub fn det(&self) -> BigInt {
        &self.e[0] * &self.e[3] - &self.e[1] * &self.e[2]
    }

    pub fn is_unimodular(&self) -> bool {
        self.det().is_one()
    }

    pub fn mul(&self, other: &Mat2) -> Mat2 {
        let a = &self.e;
        let b = &other.e;
        Mat2::new(
            &a[0] * &b[0] + &a[1] * &b[2],
            &a[0] * &b[1] + &a[1] * &b[3],
            &a[2] * &b[0] + &a[3] * &b[2],
            &a[2] * &b[1] + &a[3] * &b[3],
        )
    }

    pub fn neg(&self) -> Mat2 {
        Mat2::new(-&self.e[0], -&self.e[1], -&self.e[2], -&self.e[3])
    }

    /// Inverse of a determinant-one matrix.
    pub fn inverse(&self) -> Result<Mat2, NumTheoryError> {
        let d = self.det();
        if !d.is_one() {
            return Err(NumTheoryError::NotUnimodular(d));
        }
        Ok(Mat2::new(
            self.e[3].clone(),
            -&self.e[1],
            -&self.e[2],
            self.e[0].clone(),
        ))
    }
}

impl fmt::Display for Mat2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "[[{}, {}], [{}, {}]]",
            self.e[0], self.e[1], self.e[2], self.e[3]
        )
    }
}

impl Serialize for Mat2 {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut seq = s.serialize_seq(Some(4))?;
        for v in &self.e {
            seq.serialize_element(&JsonInt(v))?;
        }
        seq.end()
    }
}

/// A full-rank sublattice of `Z^2` in row Hermite normal form
/// `[[p, q], [0, r]]` with `p, r > 0` and `0 <= q < r`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Lattice2 {
    rows: [[BigInt; 2]; 2],
}

/// Hermite normal form of the lattice spanned by `gens` (row vectors).
///
/// Errors when the generators span a lattice of rank below 2. The
/// result is independent of generator order and of unimodular
/// recombination of the generators.
pub fn hnf2(gens: &[[BigInt; 2]]) -> Result<Lattice2, NumTheoryError> {
    let mut pivot: Option<[BigInt; 2]> = None;
    let mut tail: Vec<BigInt> = Vec::new();
    for g in gens {
        if g[0].is_zero() && g[1].is_zero() {
            continue;
        }
        if g[0].is_zero() {
            tail.push(g[1].clone());
            continue;
        }
        match pivot.take() {
            None => pivot = Some(g.clone()),
            Some(p) => {
                let (d, x, y) = ext_gcd(&p[0], &g[0]);
                let merged = [&x * &p[0] + &y * &g[0], &x * &p[1] + &y * &g[1]];
                // complementary combination has first coordinate 0
                let comp = &p[1] * (&g[0] / &d) - &g[1] * (&p[0] / &d);
                if !comp.is_zero() {
                    tail.push(comp);
                }
                pivot = Some(merged);
            }
        }
    }
    let mut p = pivot.ok_or(NumTheoryError::DegenerateLattice)?;
    if p[0].is_negative() {
        p = [-&p[0], -&p[1]];
    }
    let mut r = BigInt::zero();
    for y in &tail {
        r = r.gcd(y);
    }
    if r.is_zero() {
        return Err(NumTheoryError::DegenerateLattice);
    }
    let q = p[1].mod_floor(&r);
    Ok(Lattice2 {
        rows: [[p[0].clone(), q], [BigInt::zero(), r]],
    })
}

impl Lattice2 {
    pub fn rows(&self) -> &[[BigInt; 2]; 2] {
        &self.rows
    }

    /// `p` in `[[p, q], [0, r]]`.
    pub fn pivot_x(&self) -> &BigInt {
        &self.rows[0][0]
    }

    /// `q` in `[[p, q], [0, r]]`.
    pub fn off_diag(&self) -> &BigInt {
        &self.rows[0][1]
    }

    /// `r` in `[[p, q], [0, r]]`.
    pub fn pivot_y(&self) -> &BigInt {
        &self.rows[1][1]
    }

    /// Index in `Z^2`, i.e. `p * r`.
    pub fn index(&self) -> BigInt {
        self.pivot_x() * self.pivot_y()
    }

    pub fn contains(&self, v: &[BigInt; 2]) -> bool {
        let (p, q, r) = (self.pivot_x(), self.off_diag(), self.pivot_y());
        if !(&v[0] % p).is_zero() {
            return false;
        }
        let alpha = &v[0] / p;
        ((&v[1] - alpha * q) % r).is_zero()
    }

    /// gcd of all entries: the largest `t` with `L = t * L0`.
    pub fn content(&self) -> BigInt {
        self.pivot_x().gcd(&self.off_diag().gcd(self.pivot_y()))
    }

    pub fn scaled(&self, k: &BigInt) -> Lattice2 {
        assert!(k.is_positive(), "lattice scale must be positive");
        Lattice2 {
            rows: [
                [self.pivot_x() * k, self.off_diag() * k],
                [BigInt::zero(), self.pivot_y() * k],
            ],
        }
    }

    /// Dual lattice with respect to the standard pairing, returned as
    /// an integer lattice plus denominator: `L^* = (1/den) * M`.
    pub fn dual(&self) -> (Lattice2, BigInt) {
        let (p, q, r) = (self.pivot_x(), self.off_diag(), self.pivot_y());
        let m = hnf2(&[
            [r.clone(), BigInt::zero()],
            [-q, p.clone()],
        ])
        .expect("dual of a rank-2 lattice is rank 2");
        (m, self.index())
    }

    pub fn sum(&self, other: &Lattice2) -> Lattice2 {
        let mut rows: Vec<[BigInt; 2]> = Vec::with_capacity(4);
        rows.extend_from_slice(self.rows());
        rows.extend_from_slice(other.rows());
        hnf2(&rows).expect("sum of rank-2 lattices is rank 2")
    }

    /// Intersection of two full-rank integer lattices, via duality:
    /// `(A n B)^* = A^* + B^*`.
    pub fn intersect(&self, other: &Lattice2) -> Lattice2 {
        let (m1, e1) = self.dual();
        let (m2, e2) = other.dual();
        let s = m1.scaled(&e2).sum(&m2.scaled(&e1));
        let e = &e1 * &e2;
        let (sd, det_s) = s.dual();
        // result = (e / det_s) * sd, which is integral
        let g = e.gcd(&det_s);
        let (num, den) = (&e / &g, &det_s / &g);
        let rows: Vec<[BigInt; 2]> = sd
            .rows()
            .iter()
            .map(|row| {
                let a = row[0].clone() * &num;
                let b = row[1].clone() * &num;
                assert!(
                    (&a % &den).is_zero() && (&b % &den).is_zero(),
                    "intersection of integer lattices must be integral"
                );
                [a / &den, b / &den]
            })
            .collect();
        hnf2(&rows).expect("intersection of full-rank lattices is full rank")
    }
}

impl fmt::Display for Lattice2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "[[{}, {}], [0, {}]]",
            self.rows[0][0], self.rows[0][1], self.rows[1][1]
        )
    }
}
