//! Finite abelian groups presented by explicit multiplication tables.
//!
//! Both the form-side class group law and the ideal-side ray-class
//! oracle produce values of [`ClassGroupTable`]; comparing the two
//! through invariant factors and an explicit bijection is one of the
//! crate's standing cross-checks.

use serde::Serialize;
use std::collections::BTreeSet;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq, Clone)]
pub enum GroupTableError {
    #[error("table is not square ({0} labels, row {1} has length {2})")]
    NotSquare(usize, usize, usize),
    #[error("table entry {0} out of range")]
    EntryOutOfRange(usize),
    #[error("no two-sided identity element")]
    NoIdentity,
    #[error("element {0} has no inverse")]
    NoInverse(usize),
    #[error("associativity fails at ({0}, {1}, {2})")]
    NotAssociative(usize, usize, usize),
    #[error("multiplication is not commutative at ({0}, {1})")]
    NotCommutative(usize, usize),
}

/// A finite abelian group given by labels and a full multiplication
/// table; `table[i][j]` is the index of the product.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ClassGroupTable {
    labels: Vec<String>,
    table: Vec<Vec<usize>>,
    identity: usize,
    invariant_factors: Vec<u64>,
}

impl ClassGroupTable {
    /// Validates the group axioms exhaustively (identity, inverses,
    /// associativity, commutativity) and computes invariant factors.
    pub fn new(labels: Vec<String>, table: Vec<Vec<usize>>) -> Result<Self, GroupTableError> {
        let n = labels.len();
        for (i, row) in table.iter().enumerate() {
            if table.len() != n || row.len() != n {
                return Err(GroupTableError::NotSquare(n, i, row.len()));
            }
            for &v in row {
                if v >= n {
                    return Err(GroupTableError::EntryOutOfRange(v));
                }
            }
        }
        let identity = (0..n)
            .find(|&e| (0..n).all(|x| table[e][x] == x && table[x][e] == x))
            .ok_or(GroupTableError::NoIdentity)?;
        for x in 0..n {
            if !(0..n).any(|y| table[x][y] == identity) {
                return Err(GroupTableError::NoInverse(x));
            }
        }
        for i in 0..n {
            for j in 0..n {
                if table[i][j] != table[j][i] {
                    return Err(GroupTableError::NotCommutative(i, j));
                }
                for k in 0..n {
                    if table[table[i][j]][k] != table[i][table[j][k]] {
                        return Err(GroupTableError::NotAssociative(i, j, k));
                    }
                }
            }
        }
        let invariant_factors = invariant_factors(&table, identity);
        Ok(ClassGroupTable {
            labels,
            table,
            identity,
            invariant_factors,
        })
    }

    pub fn order(&self) -> usize {
        self.labels.len()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn table(&self) -> &[Vec<usize>] {
        &self.table
    }

    pub fn identity(&self) -> usize {
        self.identity
    }

    /// Invariant factors `d1 | d2 | ... | dk` (empty for the trivial
    /// group); their product is the group order.
    pub fn invariant_factors(&self) -> &[u64] {
        &self.invariant_factors
    }

    pub fn mul(&self, i: usize, j: usize) -> usize {
        self.table[i][j]
    }

    pub fn inverse(&self, i: usize) -> usize {
        (0..self.order())
            .find(|&j| self.table[i][j] == self.identity)
            .expect("validated group has inverses")
    }

    pub fn element_order(&self, i: usize) -> u64 {
        let mut x = i;
        let mut k = 1u64;
        while x != self.identity {
            x = self.mul(x, i);
            k += 1;
        }
        k
    }

    /// Subgroup generated by `seed`, as a sorted label set.
    pub fn subgroup_closure(&self, seed: &[usize]) -> BTreeSet<usize> {
        let mut set: BTreeSet<usize> = seed.iter().copied().collect();
        set.insert(self.identity);
        loop {
            let mut grew = false;
            let cur: Vec<usize> = set.iter().copied().collect();
            for &a in &cur {
                for &b in &cur {
                    if set.insert(self.mul(a, b)) {
                        grew = true;
                    }
                }
            }
            if !grew {
                return set;
            }
        }
    }

    pub fn is_subgroup(&self, set: &BTreeSet<usize>) -> bool {
        !set.is_empty() && self.subgroup_closure(&set.iter().copied().collect::<Vec<_>>()) == *set
    }

    /// Left coset `{h * x : h in subgroup}`.
    pub fn coset(&self, subgroup: &BTreeSet<usize>, x: usize) -> BTreeSet<usize> {
        subgroup.iter().map(|&h| self.mul(h, x)).collect()
    }

    /// Same order and same invariant factors.
    pub fn same_isomorphism_type(&self, other: &ClassGroupTable) -> bool {
        self.order() == other.order() && self.invariant_factors == other.invariant_factors
    }

    /// Checks that `sigma` transports this table onto `other`:
    /// `sigma(i * j) = sigma(i) * sigma(j)` with `sigma` a bijection.
    pub fn is_isomorphism_onto(&self, other: &ClassGroupTable, sigma: &[usize]) -> bool {
        let n = self.order();
        if other.order() != n || sigma.len() != n {
            return false;
        }
        let mut seen = vec![false; n];
        for &v in sigma {
            if v >= n || seen[v] {
                return false;
            }
            seen[v] = true;
        }
        for i in 0..n {
            for j in 0..n {
                if sigma[self.mul(i, j)] != other.mul(sigma[i], sigma[j]) {
                    return false;
                }
            }
        }
        true
    }
}

/// Invariant factors of an abelian group table: repeatedly split off a
/// cyclic subgroup of maximal order (always a direct summand in the
/// abelian case) and recurse on the quotient.
fn invariant_factors(table: &[Vec<usize>], identity: usize) -> Vec<u64> {
    fn order_of(table: &[Vec<usize>], identity: usize, i: usize) -> u64 {
        let mut x = i;
        let mut k = 1u64;
        while x != identity {
            x = table[x][i];
            k += 1;
        }
        k
    }

    let mut desc: Vec<u64> = Vec::new();
    let mut cur_table: Vec<Vec<usize>> = table.to_vec();
    let mut cur_id = identity;
    while cur_table.len() > 1 {
        let m = cur_table.len();
        let g = (0..m)
            .max_by_key(|&i| (order_of(&cur_table, cur_id, i), std::cmp::Reverse(i)))
            .unwrap();
        desc.push(order_of(&cur_table, cur_id, g));
        // cosets of <g>
        let mut cyclic = vec![cur_id];
        let mut x = g;
        while x != cur_id {
            cyclic.push(x);
            x = cur_table[x][g];
        }
        let mut coset_of = vec![usize::MAX; m];
        let mut reps: Vec<usize> = Vec::new();
        for e in 0..m {
            if coset_of[e] != usize::MAX {
                continue;
            }
            let c = reps.len();
            reps.push(e);
            for &s in &cyclic {
                coset_of[cur_table[e][s]] = c;
            }
        }
        let k = reps.len();
        let mut qt = vec![vec![0usize; k]; k];
        for i in 0..k {
            for j in 0..k {
                qt[i][j] = coset_of[cur_table[reps[i]][reps[j]]];
            }
        }
        cur_id = coset_of[cur_id];
        cur_table = qt;
    }
    desc.retain(|&d| d > 1);
    desc.reverse();
    desc
}
