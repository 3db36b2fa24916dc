//! The two decision procedures for a congruence group Γ ⊇ Γ₁(N) and
//! a discriminant D: whether Γ acts on the level-N forms (preserving
//! the gcd(a, N) = 1 condition), and whether Γ induces a form class
//! group, i.e. whether the Γ-classes inherit a group structure from
//! the level-N ray class group through a subgroup of principal
//! ideal classes.

use crate::classlevel::{enumerate_classes, level_data, ClassLevelError};
use crate::congruence::{lift, CongruenceError, CongruenceGroup};
use crate::forms::{residue_forms, FormsError, QuadForm};
use crate::numtheory::{kronecker, prime_divisors, Mat2, NumTheoryError};
use crate::orders::{in_principal_ray, OrdersError};
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::One;
use serde::Serialize;
use std::collections::BTreeSet;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq, Clone)]
pub enum InductionError {
    #[error("group has level {0} but the decision is at level {1}")]
    LevelMismatch(u64, u64),
    #[error("class {0} has no coarse class; enumeration is incomplete")]
    CoarseClassNotFound(String),
    #[error(transparent)]
    Forms(#[from] FormsError),
    #[error(transparent)]
    Congruence(#[from] CongruenceError),
    #[error(transparent)]
    Orders(#[from] OrdersError),
    #[error(transparent)]
    ClassLevel(#[from] ClassLevelError),
    #[error(transparent)]
    NumTheory(#[from] NumTheoryError),
}

/// Product of the primes p | N whose Kronecker symbol (D/p) is not
/// -1; square-free and divides N. The group action on level-N forms
/// exists exactly for subgroups of Γ₀ at this modulus.
pub fn m_value(d: &BigInt, n: u64) -> Result<u64, InductionError> {
    let mut m = 1;
    for p in prime_divisors(n) {
        if kronecker(d, p)? != -1 {
            m *= p;
        }
    }
    Ok(m)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ActsCounterexample {
    pub form: QuadForm,
    pub gamma: Mat2,
    /// Leading coefficient of act(form, gamma); shares a factor
    /// with the level.
    #[serde(serialize_with = "crate::numtheory::serialize_bigint")]
    pub leading_coeff: BigInt,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ActsVerdict {
    pub acts: bool,
    pub counterexample: Option<ActsCounterexample>,
}

/// Decides whether the group action preserves the level-N forms, by
/// checking every generator of the image against every residue of a
/// level-N form. The residue of act(Q, γ) depends only on (Q mod N,
/// γ mod N), and stability under the image's generators implies
/// stability under the whole image because each generator has finite
/// order there; so the exhaustive generator scan is a complete
/// decision, not a sample.
pub fn acts(
    gamma: &CongruenceGroup,
    d: &BigInt,
    n: u64,
) -> Result<ActsVerdict, InductionError> {
    if gamma.level() != n {
        return Err(InductionError::LevelMismatch(gamma.level(), n));
    }
    let rf = residue_forms(d, n)?;
    let nb = BigInt::from(n);
    for gbar in gamma.image().generators() {
        let g = lift(gbar)?;
        for (_, q) in rf.iter() {
            let a2 = q.coeff_x2(&g);
            if !a2.gcd(&nb).is_one() {
                debug_assert_eq!(a2, q.act(&g)?.a);
                return Ok(ActsVerdict {
                    acts: false,
                    counterexample: Some(ActsCounterexample {
                        form: q.clone(),
                        gamma: g,
                        leading_coeff: a2,
                    }),
                });
            }
        }
    }
    Ok(ActsVerdict {
        acts: true,
        counterexample: None,
    })
}

/// The containment form of the action decision: Γ acts on the
/// level-N forms iff its image lies in the Γ₀-image at the modulus
/// [`m_value`].
pub fn acts_criterion(
    gamma: &CongruenceGroup,
    d: &BigInt,
    n: u64,
) -> Result<bool, InductionError> {
    if gamma.level() != n {
        return Err(InductionError::LevelMismatch(gamma.level(), n));
    }
    let m = m_value(d, n)?;
    let g0 = CongruenceGroup::gamma0_image(m, n)?;
    Ok(gamma.image().is_subgroup_of(g0.image()))
}

/// Why a group fails to induce a form class group.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub enum Obstruction {
    /// The classes merged with the principal class do not form a
    /// subgroup of the level-N class group.
    IdentityFiberNotSubgroup { labels: Vec<String> },
    /// Some Γ-class is not a coset of the identity fiber.
    FiberNotCoset {
        class_label: String,
        fiber: Vec<String>,
        coset: Vec<String>,
    },
    /// The identity fiber contains a class whose ideal is not
    /// principal, so the candidate subgroup is not made of principal
    /// ideal classes.
    FiberOutsidePrincipalKernel { label: String },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct InduceVerdict {
    pub induces: bool,
    /// Labels of the subgroup H of level-N classes merged into the
    /// principal Γ-class, when the verdict is positive.
    pub subgroup_labels: Option<Vec<String>>,
    pub subgroup_indices: Option<BTreeSet<usize>>,
    pub obstruction: Option<Obstruction>,
    /// D = -3 and -4 are decided like any other discriminant but
    /// flagged, since the set-comparison statements downstream
    /// exclude them.
    pub small_disc_flag: bool,
    pub fine_classes: usize,
    pub coarse_classes: usize,
}

/// Decides whether Γ induces a form class group of discriminant D
/// and level N.
///
/// The Γ₁(N)-classes carry the transported group structure; the map
/// to Γ-classes is a surjection, and Γ induces exactly when (1) the
/// fiber H over the principal Γ-class is a subgroup, (2) every fiber
/// is a coset of H, and (3) every class in H is principal at level 1
/// (its ideal has a generator), so that the merged ideal subgroup
/// consists of principal ideals.
pub fn induces(
    gamma: &CongruenceGroup,
    d: &BigInt,
    n: u64,
) -> Result<InduceVerdict, InductionError> {
    if gamma.level() != n {
        return Err(InductionError::LevelMismatch(gamma.level(), n));
    }
    let data = level_data(d, n)?;
    let coarse = enumerate_classes(d, n, gamma)?;
    let small_disc_flag = *d == BigInt::from(-3) || *d == BigInt::from(-4);
    let mut fiber_of = Vec::with_capacity(data.list.len());
    for q in data.list.reps() {
        let idx = coarse
            .class_of(q)?
            .ok_or_else(|| InductionError::CoarseClassNotFound(q.to_string()))?;
        fiber_of.push(idx);
    }
    let mut fibers: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); coarse.len()];
    for (i, &c) in fiber_of.iter().enumerate() {
        fibers[c].insert(i);
    }
    let labels = |set: &BTreeSet<usize>| -> Vec<String> {
        set.iter()
            .map(|&i| data.table.labels()[i].clone())
            .collect()
    };
    let fail = |obstruction: Obstruction| InduceVerdict {
        induces: false,
        subgroup_labels: None,
        subgroup_indices: None,
        obstruction: Some(obstruction),
        small_disc_flag,
        fine_classes: data.list.len(),
        coarse_classes: coarse.len(),
    };
    let h = fibers[fiber_of[data.table.identity()]].clone();
    if !data.table.is_subgroup(&h) {
        return Ok(fail(Obstruction::IdentityFiberNotSubgroup { labels: labels(&h) }));
    }
    for (c, fiber) in fibers.iter().enumerate() {
        let base = *fiber.iter().next().expect("every coarse class has a fine class");
        let coset = data.table.coset(&h, base);
        if *fiber != coset {
            return Ok(fail(Obstruction::FiberNotCoset {
                class_label: coarse.reps()[c].to_string(),
                fiber: labels(fiber),
                coset: labels(&coset),
            }));
        }
    }
    for &i in &h {
        if !in_principal_ray(&data.ideals[i], 1)? {
            return Ok(fail(Obstruction::FiberOutsidePrincipalKernel {
                label: data.table.labels()[i].clone(),
            }));
        }
    }
    Ok(InduceVerdict {
        induces: true,
        subgroup_labels: Some(labels(&h)),
        subgroup_indices: Some(h),
        obstruction: None,
        small_disc_flag,
        fine_classes: data.list.len(),
        coarse_classes: coarse.len(),
    })
}

/// Indices of the Γ₁(N)-classes whose ideal is principal: the kernel
/// of the projection to the level-1 class group.
pub fn level1_kernel(d: &BigInt, n: u64) -> Result<BTreeSet<usize>, InductionError> {
    let data = level_data(d, n)?;
    let mut out = BTreeSet::new();
    for (i, ideal) in data.ideals.iter().enumerate() {
        if in_principal_ray(ideal, 1)? {
            out.insert(i);
        }
    }
    Ok(out)
}
