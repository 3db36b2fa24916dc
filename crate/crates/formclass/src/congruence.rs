//! Congruence subgroups between Γ₁(N) and SL₂(ℤ), handled through
//! their finite images mod N.
//!
//! Any subgroup of SL₂(ℤ) containing Γ₁(N) also contains the kernel
//! of reduction mod N, so it is determined exactly by its image in
//! SL₂(ℤ/Nℤ). That image is a [`FiniteMatrixGroup`]; membership,
//! coset enumeration, and witness searches all become finite
//! computations. Integer matrices travel as [`Mat2`], residue
//! matrices as [`ResidueMatrix`], and [`lift`] moves from the finite
//! world back to SL₂(ℤ) deterministically.

use crate::numtheory::{
    crt, ext_gcd, inv_mod, is_squarefree, prime_divisors, totient, Mat2,
};
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use serde::Serialize;
use std::collections::BTreeSet;
use thiserror::Error;

/// Levels above this are rejected by constructions that enumerate
/// SL₂(ℤ/Nℤ); the full group already has 9216 elements at N = 24.
pub const MAX_ENUM_LEVEL: u64 = 24;

#[derive(Debug, Error, PartialEq, Eq, Clone)]
pub enum CongruenceError {
    #[error("modulus must be positive")]
    ZeroModulus,
    #[error("level {0} exceeds the enumeration cap {MAX_ENUM_LEVEL}")]
    LevelTooLarge(u64),
    #[error("{0} does not divide {1}")]
    NotADivisor(u64, u64),
    #[error("matrix determinant {0} is not 1 mod {1}")]
    DetNotOne(u64, u64),
    #[error("matrix determinant {0} is not a unit mod {1}")]
    DetNotUnit(u64, u64),
    #[error("{0} is not a unit mod {1}")]
    NotAUnit(u64, u64),
    #[error("the given units do not form a multiplicatively closed nonempty set mod {0}")]
    UnitsNotClosed(u64),
    #[error("the given matrices are not closed under multiplication mod {0}")]
    ElementsNotClosed(u64),
    #[error("group description `{0}` is malformed: {1}")]
    BadGroupSpec(String, String),
    #[error("escape modulus {0} must be squarefree and at least 2")]
    BadEscapeModulus(u64),
    #[error("group lies inside the lower-triangular locus mod {0}; no escape witness exists")]
    NoWitness(u64),
}

/// A 2x2 matrix over ℤ/nℤ with unit determinant, entries stored
/// row-major as `[q, r, s, t]` for `[[q, r], [s, t]]`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct ResidueMatrix {
    pub modulus: u64,
    pub entries: [u64; 4],
}

impl ResidueMatrix {
    pub fn new(modulus: u64, entries: [i64; 4]) -> ResidueMatrix {
        assert!(modulus > 0, "zero modulus");
        let m = modulus as i64;
        ResidueMatrix {
            modulus,
            entries: entries.map(|e| e.rem_euclid(m) as u64),
        }
    }

    pub fn from_mat2(m: &Mat2, modulus: u64) -> ResidueMatrix {
        assert!(modulus > 0, "zero modulus");
        let nb = BigInt::from(modulus);
        let e = m.entries();
        let red = |v: &BigInt| v.mod_floor(&nb).to_u64().unwrap();
        ResidueMatrix {
            modulus,
            entries: [red(&e[0]), red(&e[1]), red(&e[2]), red(&e[3])],
        }
    }

    pub fn identity(modulus: u64) -> ResidueMatrix {
        ResidueMatrix::new(modulus, [1, 0, 0, 1])
    }

    /// Shear `[[1, 1], [0, 1]]`, the image of the translation matrix.
    pub fn shear(modulus: u64) -> ResidueMatrix {
        ResidueMatrix::new(modulus, [1, 1, 0, 1])
    }

    /// Rotation `[[0, -1], [1, 0]]`.
    pub fn flip(modulus: u64) -> ResidueMatrix {
        ResidueMatrix::new(modulus, [0, -1, 1, 0])
    }

    pub fn q(&self) -> u64 {
        self.entries[0]
    }

    pub fn r(&self) -> u64 {
        self.entries[1]
    }

    pub fn s(&self) -> u64 {
        self.entries[2]
    }

    pub fn t(&self) -> u64 {
        self.entries[3]
    }

    pub fn det(&self) -> u64 {
        let n = self.modulus as u128;
        let [q, r, s, t] = self.entries.map(|e| e as u128);
        ((q * t % n + n - r * s % n) % n) as u64
    }

    pub fn is_unimodular(&self) -> bool {
        self.det() == 1 % self.modulus
    }

    pub fn mul(&self, other: &ResidueMatrix) -> ResidueMatrix {
        assert_eq!(self.modulus, other.modulus, "modulus mismatch");
        let n = self.modulus as u128;
        let a = self.entries.map(|e| e as u128);
        let b = other.entries.map(|e| e as u128);
        let dot = |x: u128, y: u128, z: u128, w: u128| ((x * y % n + z * w % n) % n) as u64;
        ResidueMatrix {
            modulus: self.modulus,
            entries: [
                dot(a[0], b[0], a[1], b[2]),
                dot(a[0], b[1], a[1], b[3]),
                dot(a[2], b[0], a[3], b[2]),
                dot(a[2], b[1], a[3], b[3]),
            ],
        }
    }

    /// Inverse when the determinant is a unit mod n.
    pub fn inverse(&self) -> Option<ResidueMatrix> {
        let d = inv_mod(self.det(), self.modulus)?;
        let n = self.modulus as u128;
        let [q, r, s, t] = self.entries.map(|e| e as u128);
        let scale = |v: u128| (v % n * d as u128 % n) as u64;
        Some(ResidueMatrix {
            modulus: self.modulus,
            entries: [
                scale(t),
                scale((n - r % n) % n),
                scale((n - s % n) % n),
                scale(q),
            ],
        })
    }

    pub fn neg(&self) -> ResidueMatrix {
        let n = self.modulus;
        ResidueMatrix {
            modulus: n,
            entries: self.entries.map(|e| (n - e % n) % n),
        }
    }
}

fn bfs_closure(modulus: u64, gens: &[ResidueMatrix]) -> BTreeSet<[u64; 4]> {
    let id = ResidueMatrix::identity(modulus);
    let mut elems = BTreeSet::new();
    elems.insert(id.entries);
    let mut frontier = vec![id];
    while let Some(x) = frontier.pop() {
        for g in gens {
            let y = x.mul(g);
            if elems.insert(y.entries) {
                frontier.push(y);
            }
        }
    }
    elems
}

/// A finite group of invertible matrices over ℤ/nℤ, materialized as
/// the closure of its generators. Because every element has unit
/// determinant and the ambient set is finite, closure under products
/// alone already yields a group.
#[derive(Clone, Debug)]
pub struct FiniteMatrixGroup {
    modulus: u64,
    generators: Vec<ResidueMatrix>,
    elements: BTreeSet<[u64; 4]>,
}

impl PartialEq for FiniteMatrixGroup {
    fn eq(&self, other: &Self) -> bool {
        self.modulus == other.modulus && self.elements == other.elements
    }
}

impl Eq for FiniteMatrixGroup {}

impl FiniteMatrixGroup {
    pub fn from_generators(
        modulus: u64,
        generators: Vec<ResidueMatrix>,
    ) -> Result<FiniteMatrixGroup, CongruenceError> {
        if modulus == 0 {
            return Err(CongruenceError::ZeroModulus);
        }
        for g in &generators {
            assert_eq!(g.modulus, modulus, "modulus mismatch");
            if inv_mod(g.det(), modulus).is_none() {
                return Err(CongruenceError::DetNotUnit(g.det(), modulus));
            }
        }
        let elements = bfs_closure(modulus, &generators);
        Ok(FiniteMatrixGroup {
            modulus,
            generators,
            elements,
        })
    }

    /// Builds from an explicit element set, checking that the set is
    /// multiplicatively closed; a small generating set is extracted
    /// greedily.
    pub fn from_elements(
        modulus: u64,
        elements: BTreeSet<[u64; 4]>,
    ) -> Result<FiniteMatrixGroup, CongruenceError> {
        if modulus == 0 {
            return Err(CongruenceError::ZeroModulus);
        }
        if elements.is_empty() {
            return Err(CongruenceError::ElementsNotClosed(modulus));
        }
        let mats: Vec<ResidueMatrix> = elements
            .iter()
            .map(|&entries| ResidueMatrix { modulus, entries })
            .collect();
        for m in &mats {
            if inv_mod(m.det(), modulus).is_none() {
                return Err(CongruenceError::DetNotUnit(m.det(), modulus));
            }
        }
        let mut generators: Vec<ResidueMatrix> = Vec::new();
        let mut closed = bfs_closure(modulus, &generators);
        for m in &mats {
            if !closed.contains(&m.entries) {
                generators.push(*m);
                closed = bfs_closure(modulus, &generators);
            }
        }
        if closed != elements {
            return Err(CongruenceError::ElementsNotClosed(modulus));
        }
        Ok(FiniteMatrixGroup {
            modulus,
            generators,
            elements,
        })
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    pub fn generators(&self) -> &[ResidueMatrix] {
        &self.generators
    }

    pub fn order(&self) -> u64 {
        self.elements.len() as u64
    }

    pub fn contains(&self, m: &ResidueMatrix) -> bool {
        m.modulus == self.modulus && self.elements.contains(&m.entries)
    }

    /// Elements in lexicographic order of their `[q, r, s, t]` rows.
    pub fn elements(&self) -> impl Iterator<Item = ResidueMatrix> + '_ {
        let modulus = self.modulus;
        self.elements
            .iter()
            .map(move |&entries| ResidueMatrix { modulus, entries })
    }

    pub fn is_subgroup_of(&self, other: &FiniteMatrixGroup) -> bool {
        self.modulus == other.modulus && self.elements.is_subset(&other.elements)
    }

    /// Determinants of the elements, as a sorted set of units.
    pub fn determinant_set(&self) -> BTreeSet<u64> {
        self.elements().map(|m| m.det()).collect()
    }
}

/// Order of SL₂(ℤ/nℤ): n³ ∏_{p | n} (1 - 1/p²).
pub fn sl2_order(n: u64) -> u64 {
    let mut ord = n * n * n;
    for p in prime_divisors(n) {
        ord = ord / (p * p) * (p * p - 1);
    }
    ord.max(1)
}

/// Order of GL₂(ℤ/nℤ): n⁴ ∏_{p | n} (1 - 1/p²)(1 - 1/p).
pub fn gl2_order(n: u64) -> u64 {
    let mut ord = n * n * n * n;
    for p in prime_divisors(n) {
        ord = ord / (p * p) * (p * p - 1);
        ord = ord / p * (p - 1);
    }
    ord.max(1)
}

/// The full group SL₂(ℤ/nℤ), generated by the shear and the flip.
pub fn sl2_matrix_group(n: u64) -> Result<FiniteMatrixGroup, CongruenceError> {
    if n == 0 {
        return Err(CongruenceError::ZeroModulus);
    }
    if n > MAX_ENUM_LEVEL {
        return Err(CongruenceError::LevelTooLarge(n));
    }
    let g = FiniteMatrixGroup::from_generators(
        n,
        vec![ResidueMatrix::shear(n), ResidueMatrix::flip(n)],
    )?;
    debug_assert_eq!(g.order(), sl2_order(n));
    Ok(g)
}

/// A subgroup Γ with Γ₁(N) ⊆ Γ ⊆ SL₂(ℤ), stored as its image mod N.
///
/// The invariant that the image contains the shear `[[1,1],[0,1]]`
/// guarantees Γ ⊇ Γ₁(N), so membership of an integer matrix depends
/// only on its residue.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CongruenceGroup {
    level: u64,
    image: FiniteMatrixGroup,
}

impl CongruenceGroup {
    pub fn from_image(image: FiniteMatrixGroup) -> Result<CongruenceGroup, CongruenceError> {
        let n = image.modulus();
        for m in image.elements() {
            if !m.is_unimodular() {
                return Err(CongruenceError::DetNotOne(m.det(), n));
            }
        }
        if !image.contains(&ResidueMatrix::shear(n)) {
            return Err(CongruenceError::ElementsNotClosed(n));
        }
        Ok(CongruenceGroup { level: n, image })
    }

    /// Γ₁(N): integer matrices reducing to `[[1, *], [0, 1]]`.
    pub fn gamma1(n: u64) -> Result<CongruenceGroup, CongruenceError> {
        let image = FiniteMatrixGroup::from_generators(n, vec![ResidueMatrix::shear(n)])?;
        CongruenceGroup::from_image(image)
    }

    /// All of SL₂(ℤ), i.e. image the full SL₂(ℤ/Nℤ).
    pub fn sl2(n: u64) -> Result<CongruenceGroup, CongruenceError> {
        CongruenceGroup::from_image(sl2_matrix_group(n)?)
    }

    /// Γ₀(M) seen at level N (requires M | N): lower-left entry
    /// divisible by M.
    pub fn gamma0_image(m: u64, n: u64) -> Result<CongruenceGroup, CongruenceError> {
        if m == 0 || n == 0 {
            return Err(CongruenceError::ZeroModulus);
        }
        if n % m != 0 {
            return Err(CongruenceError::NotADivisor(m, n));
        }
        let ambient = sl2_matrix_group(n)?;
        let elements: BTreeSet<[u64; 4]> = ambient
            .elements()
            .filter(|e| e.s() % m == 0)
            .map(|e| e.entries)
            .collect();
        CongruenceGroup::from_image(FiniteMatrixGroup::from_elements(n, elements)?)
    }

    /// Γ_G(N) for a subgroup G of units mod N: matrices reducing to
    /// `[[t, *], [0, t⁻¹]]` with t ∈ G. The set G must already be
    /// multiplicatively closed.
    pub fn gamma_from_units(
        units: &BTreeSet<u64>,
        n: u64,
    ) -> Result<CongruenceGroup, CongruenceError> {
        if n == 0 {
            return Err(CongruenceError::ZeroModulus);
        }
        if units.is_empty() {
            return Err(CongruenceError::UnitsNotClosed(n));
        }
        let mut inverses = Vec::new();
        for &t in units {
            let ti = inv_mod(t, n).ok_or(CongruenceError::NotAUnit(t, n))?;
            inverses.push((t % n, ti));
        }
        for &(a, _) in &inverses {
            for &(b, _) in &inverses {
                if !units.contains(&(a * b % n)) {
                    return Err(CongruenceError::UnitsNotClosed(n));
                }
            }
        }
        let mut elements = BTreeSet::new();
        for &(t, ti) in &inverses {
            for r in 0..n {
                elements.insert([t, r, 0, ti]);
            }
        }
        CongruenceGroup::from_image(FiniteMatrixGroup::from_elements(n, elements)?)
    }

    /// Group generated by Γ₁(N) together with the given residue
    /// matrices (each must have determinant 1 mod N).
    pub fn from_generator_matrices(
        n: u64,
        mats: &[ResidueMatrix],
    ) -> Result<CongruenceGroup, CongruenceError> {
        if n == 0 {
            return Err(CongruenceError::ZeroModulus);
        }
        if n > MAX_ENUM_LEVEL {
            return Err(CongruenceError::LevelTooLarge(n));
        }
        let mut gens = vec![ResidueMatrix::shear(n)];
        for m in mats {
            assert_eq!(m.modulus, n, "modulus mismatch");
            if !m.is_unimodular() {
                return Err(CongruenceError::DetNotOne(m.det(), n));
            }
            gens.push(*m);
        }
        CongruenceGroup::from_image(FiniteMatrixGroup::from_generators(n, gens)?)
    }

    pub fn level(&self) -> u64 {
        self.level
    }

    pub fn image(&self) -> &FiniteMatrixGroup {
        &self.image
    }

    pub fn order(&self) -> u64 {
        self.image.order()
    }

    /// Membership of an integer matrix; true iff det is exactly 1 and
    /// the reduction mod N lies in the image.
    pub fn member(&self, g: &Mat2) -> bool {
        g.det().is_one() && self.image.contains(&ResidueMatrix::from_mat2(g, self.level))
    }

    pub fn contains_minus_identity(&self) -> bool {
        self.image
            .contains(&ResidueMatrix::identity(self.level).neg())
    }

    pub fn index_in_sl2(&self) -> u64 {
        sl2_order(self.level) / self.order()
    }

    /// Right-coset representatives of Γ in SL₂(ℤ): one lifted integer
    /// matrix per coset Γγ, each the lexicographically least residue
    /// in its coset, listed in that order.
    pub fn coset_reps(&self) -> Result<Vec<Mat2>, CongruenceError> {
        let ambient = sl2_matrix_group(self.level)?;
        let mut assigned: BTreeSet<[u64; 4]> = BTreeSet::new();
        let mut reps = Vec::new();
        for x in ambient.elements() {
            if assigned.contains(&x.entries) {
                continue;
            }
            for g in self.image.elements() {
                assigned.insert(g.mul(&x).entries);
            }
            reps.push(lift(&x)?);
        }
        debug_assert_eq!(reps.len() as u64, self.index_in_sl2());
        Ok(reps)
    }

    /// For squarefree M ≥ 2, finds a prime p | M and γ = [[q,r],[s,t]]
    /// in Γ with p | q and p ∤ s, by shifting a group element of
    /// nonzero lower-left entry with a power of the shear. Errors with
    /// [`CongruenceError::NoWitness`] when the image lies inside the
    /// lower-triangular locus mod every prime of M, i.e. Γ ⊆ Γ₀(M).
    pub fn gamma0_escape_witness(&self, m: u64) -> Result<(u64, Mat2), CongruenceError> {
        if m < 2 || !is_squarefree(m) {
            return Err(CongruenceError::BadEscapeModulus(m));
        }
        let n = self.level;
        for p in prime_divisors(m) {
            let gamma0 = if n % p != 0 {
                // [[1, 0], [N, 1]] reduces to the identity, so it is
                // in Γ, and p ∤ N makes its lower-left entry escape.
                Some(Mat2::new(
                    BigInt::one(),
                    BigInt::from(0),
                    BigInt::from(n),
                    BigInt::one(),
                ))
            } else {
                match self.image.elements().find(|e| e.s() % p != 0) {
                    Some(e) => Some(lift(&e)?),
                    None => None,
                }
            };
            let g0 = match gamma0 {
                Some(g0) => g0,
                None => continue,
            };
            let pb = BigInt::from(p);
            let s0 = g0.s().mod_floor(&pb).to_u64().unwrap();
            let q0 = g0.q().mod_floor(&pb).to_u64().unwrap();
            let k = (p - q0) % p * inv_mod(s0, p).expect("s0 is nonzero mod the prime p") % p;
            let gamma = Mat2::translation(&BigInt::from(k)).mul(&g0);
            assert!(gamma.q().mod_floor(&pb).is_zero());
            assert!(!gamma.s().mod_floor(&pb).is_zero());
            assert!(self.member(&gamma));
            return Ok((p, gamma));
        }
        Err(CongruenceError::NoWitness(m))
    }
}

/// Lifts a residue matrix of determinant 1 to an integer matrix of
/// determinant exactly 1. Deterministic: the centered representative
/// is used when it already works, otherwise the bottom row is made
/// coprime and the top row solved by extended gcd.
pub fn lift(m: &ResidueMatrix) -> Result<Mat2, CongruenceError> {
    if !m.is_unimodular() {
        return Err(CongruenceError::DetNotOne(m.det(), m.modulus));
    }
    let n = m.modulus;
    if n == 1 {
        return Ok(Mat2::identity());
    }
    let centered = m.entries.map(|e| {
        if e <= n / 2 {
            e as i64
        } else {
            e as i64 - n as i64
        }
    });
    let cand = Mat2::from_i64(centered[0], centered[1], centered[2], centered[3]);
    if cand.det().is_one() {
        return Ok(cand);
    }

    // Make the bottom row (s', t') a coprime integer pair congruent to
    // (s, t) mod N. When p | s' and p | t, p cannot divide N (the
    // row gcd with N is 1), so shifting t by a suitable multiple of N
    // clears every shared prime.
    let s1 = if m.s() == 0 { n } else { m.s() };
    let mut pairs = Vec::new();
    for p in prime_divisors(s1) {
        pairs.push((u64::from(m.t() % p == 0), p));
    }
    let k = crt(&pairs).expect("distinct prime moduli never conflict").0;
    let s_b = BigInt::from(s1);
    let t_b = BigInt::from(m.t()) + BigInt::from(n) * BigInt::from(k);

    // Solve q'·t' - r'·s' = 1 for the top row.
    let (g, x, y) = ext_gcd(&t_b, &s_b);
    assert!(g.is_one(), "bottom row is coprime");
    let base = Mat2::new(x, -y, s_b.clone(), t_b.clone());
    debug_assert!(base.det().is_one());

    // The two det-1 matrices with this bottom row differ by a shear
    // power; solve for it mod N.
    let nb = BigInt::from(n);
    let (g2, alpha, beta) = ext_gcd(&s_b, &t_b);
    assert!(g2.is_one());
    let dq = (BigInt::from(m.q()) - base.q()).mod_floor(&nb);
    let dr = (BigInt::from(m.r()) - base.r()).mod_floor(&nb);
    let j = (alpha * dq + beta * dr).mod_floor(&nb);
    let lifted = Mat2::translation(&j).mul(&base);
    assert!(lifted.det().is_one());
    assert_eq!(ResidueMatrix::from_mat2(&lifted, n), *m);
    Ok(lifted)
}

/// A subgroup of (ℤ/Nℤ)^× presented by the closure of a seed set.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct UnitsSubgroup {
    pub modulus: u64,
    pub elements: BTreeSet<u64>,
    pub index: u64,
    pub was_closed: bool,
}

/// Multiplicative closure of a set of units mod n, its index in the
/// full unit group, and whether the input was already closed.
pub fn units_subgroup_closure(
    seed: &BTreeSet<u64>,
    n: u64,
) -> Result<UnitsSubgroup, CongruenceError> {
    if n == 0 {
        return Err(CongruenceError::ZeroModulus);
    }
    let mut elements = BTreeSet::new();
    for &u in seed {
        if inv_mod(u, n).is_none() {
            return Err(CongruenceError::NotAUnit(u, n));
        }
        elements.insert(u % n);
    }
    let seed_reduced = elements.clone();
    elements.insert(1 % n);
    loop {
        let cur: Vec<u64> = elements.iter().copied().collect();
        let before = elements.len();
        for &a in &cur {
            for &b in &cur {
                elements.insert(a * b % n);
            }
        }
        if elements.len() == before {
            break;
        }
    }
    let index = totient(n) / elements.len() as u64;
    Ok(UnitsSubgroup {
        modulus: n,
        was_closed: seed_reduced == elements,
        elements,
        index,
    })
}

/// Parses a textual group description:
///
/// - `sl2:N`
/// - `gamma1:N`
/// - `gamma0:M@N`
/// - `gammaG:N:t1,t2,...`
/// - `gens:N:[[q,r,s,t],...]`
pub fn parse_group_spec(spec: &str) -> Result<CongruenceGroup, CongruenceError> {
    let bad = |msg: &str| CongruenceError::BadGroupSpec(spec.to_string(), msg.to_string());
    let (kind, rest) = spec
        .split_once(':')
        .ok_or_else(|| bad("expected `kind:...`"))?;
    let parse_level = |s: &str| s.trim().parse::<u64>().map_err(|_| bad("bad level"));
    match kind {
        "sl2" => CongruenceGroup::sl2(parse_level(rest)?),
        "gamma1" => CongruenceGroup::gamma1(parse_level(rest)?),
        "gamma0" => {
            let (m, n) = rest.split_once('@').ok_or_else(|| bad("expected `M@N`"))?;
            CongruenceGroup::gamma0_image(parse_level(m)?, parse_level(n)?)
        }
        "gammaG" => {
            let (n, ts) = rest
                .split_once(':')
                .ok_or_else(|| bad("expected `N:t1,t2,...`"))?;
            let n = parse_level(n)?;
            let mut units = BTreeSet::new();
            for t in ts.split(',') {
                units.insert(parse_level(t)?);
            }
            CongruenceGroup::gamma_from_units(&units, n)
        }
        "gens" => {
            let (n, mats) = rest
                .split_once(':')
                .ok_or_else(|| bad("expected `N:[[q,r,s,t],...]`"))?;
            let n = parse_level(n)?;
            if n == 0 {
                return Err(CongruenceError::ZeroModulus);
            }
            let compact: String = mats.chars().filter(|c| !c.is_whitespace()).collect();
            let inner = compact
                .strip_prefix("[[")
                .and_then(|s| s.strip_suffix("]]"))
                .ok_or_else(|| bad("matrix list must look like [[q,r,s,t],...]"))?;
            let mut parsed = Vec::new();
            for row in inner.split("],[") {
                let entries: Vec<i64> = row
                    .split(',')
                    .map(|v| v.parse::<i64>().map_err(|_| bad("bad matrix entry")))
                    .collect::<Result<_, _>>()?;
                let entries: [i64; 4] = entries
                    .try_into()
                    .map_err(|_| bad("each matrix needs exactly 4 entries"))?;
                parsed.push(ResidueMatrix::new(n, entries));
            }
            CongruenceGroup::from_generator_matrices(n, &parsed)
        }
        _ => Err(bad("unknown kind (want sl2, gamma1, gamma0, gammaG, gens)")),
    }
}
