//! Exact arithmetic for binary quadratic forms and class groups of
//! imaginary quadratic orders, with level structure.
//!
//! The crate is organized bottom-up:
//!
//! * [`numtheory`] — integer and residue plumbing: quadratic symbols,
//!   modular square roots, CRT, rank-2 lattice normal forms.
//! * [`congruence`] — congruence subgroups of `SL2(Z)` containing
//!   `Gamma1(N)`, represented by their finite images mod `N`.
//! * [`forms`] — primitive positive definite integral binary quadratic
//!   forms, reduction with transformation witnesses, representation
//!   search, and residue-form enumeration at a level.
//! * [`grouptable`] — finite abelian groups given by multiplication
//!   tables, with invariant factors.
//! * [`orders`] — imaginary quadratic orders, proper fractional ideals
//!   as lattices, principal-ray membership, and a ray-class oracle.
//! * [`classlevel`] — form class groups of level `N`: class enumeration
//!   under a congruence group, the transported group law, and the
//!   subgroup of leading coefficients mod `N`.
//! * [`induction`] — whether a congruence group acts on the prime-to-`N`
//!   forms of a discriminant, and whether the action induces a group
//!   structure on the classes.
//! * [`adelic`] — the finite mod-`N` shadow of the adelic group attached
//!   to a discriminant and a congruence group, and the equivalence
//!   checks built on it.
//!
//! All integer arithmetic is arbitrary precision; nothing overflows
//! silently. Group enumeration is capped at a documented desk scale
//! (level at most 24).

pub mod adelic;
pub mod classlevel;
pub mod congruence;
pub mod forms;
pub mod grouptable;
pub mod induction;
pub mod numtheory;
pub mod orders;

pub use congruence::{CongruenceGroup, FiniteMatrixGroup, ResidueMatrix};
pub use forms::QuadForm;
pub use grouptable::ClassGroupTable;
pub use numtheory::{Lattice2, Mat2, Residue};
pub use orders::{ImagQuadOrder, OIdealLat, QuadElem};

/// Crate version, embedded in reports and cache keys.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
