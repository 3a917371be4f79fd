//! Markov-type Diophantine equations attached to three-block collections:
//! verification, Vieta mutation, and bounded enumeration of the solution
//! tree.

use crate::arith::{perfect_sqrt, Int};
use crate::error::{Error, Result};
use num::{Integer, Signed, Zero};
use std::collections::{BTreeSet, VecDeque};

/// The equation `d1 r1^2 + d2 r2^2 + d3 r3^2 = lambda r1 r2 r3` with
/// `lambda = sqrt(Ksq d1 d2 d3)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MarkovEquation {
    d: [Int; 3],
    ksq: Int,
    lambda: Int,
}

impl MarkovEquation {
    pub fn new(d1: Int, d2: Int, d3: Int, ksq: Int) -> Result<Self> {
        for v in [&d1, &d2, &d3, &ksq] {
            if !v.is_positive() {
                return Err(Error::OutOfRange(format!(
                    "equation data must be positive, got {v}"
                )));
            }
        }
        let product = &ksq * &d1 * &d2 * &d3;
        let lambda = perfect_sqrt(&product)
            .ok_or_else(|| Error::NoIntegralLambda(product.to_string()))?;
        Ok(MarkovEquation {
            d: [d1, d2, d3],
            ksq,
            lambda,
        })
    }

    pub fn multiplicities(&self) -> &[Int; 3] {
        &self.d
    }

    pub fn ksq(&self) -> &Int {
        &self.ksq
    }

    pub fn lambda(&self) -> &Int {
        &self.lambda
    }
}

impl std::fmt::Display for MarkovEquation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "{}r1^2 + {}r2^2 + {}r3^2 = {} r1r2r3",
            self.d[0], self.d[1], self.d[2], self.lambda
        )
    }
}

/// An ordered triple of positive integers. Position matters: slot `i`
/// carries the multiplicity `d_i`, so no sorting normalization is applied.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct MarkovTriple {
    r: [Int; 3],
}

impl MarkovTriple {
    pub fn new(r1: Int, r2: Int, r3: Int) -> Result<Self> {
        for v in [&r1, &r2, &r3] {
            if !v.is_positive() {
                return Err(Error::OutOfRange(format!(
                    "triple entries must be positive, got {v}"
                )));
            }
        }
        Ok(MarkovTriple { r: [r1, r2, r3] })
    }

    pub fn entries(&self) -> &[Int; 3] {
        &self.r
    }

    pub fn max_entry(&self) -> &Int {
        self.r.iter().max().expect("triple is nonempty")
    }
}

impl std::fmt::Display for MarkovTriple {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "({},{},{})", self.r[0], self.r[1], self.r[2])
    }
}

/// Exact equality test of the equation on a triple.
pub fn verify(eq: &MarkovEquation, t: &MarkovTriple) -> bool {
    let lhs: Int = (0..3).map(|i| &eq.d[i] * &t.r[i] * &t.r[i]).sum();
    let rhs = &eq.lambda * &t.r[0] * &t.r[1] * &t.r[2];
    lhs == rhs
}

/// Vieta mutation at slot `index` (1-based): replace `r_i` by the companion
/// root `(d_j r_j^2 + d_k r_k^2) / (d_i r_i)` of its quadratic. The quotient
/// is exact and positive for every valid solution; a violation is a hard
/// error.
pub fn mutate(eq: &MarkovEquation, t: &MarkovTriple, index: usize) -> Result<MarkovTriple> {
    if !(1..=3).contains(&index) {
        return Err(Error::BadMutationIndex(index));
    }
    if !verify(eq, t) {
        return Err(Error::InvalidTriple(format!("{t} fails {eq}")));
    }
    let i = index - 1;
    let (j, k) = ((i + 1) % 3, (i + 2) % 3);
    let num = &eq.d[j] * &t.r[j] * &t.r[j] + &eq.d[k] * &t.r[k] * &t.r[k];
    let den = &eq.d[i] * &t.r[i];
    let (root, rem) = num.div_rem(&den);
    if !rem.is_zero() || !root.is_positive() {
        return Err(Error::Internal(format!(
            "companion root {num}/{den} of {t} at slot {index} is not a positive integer"
        )));
    }
    let mut r = t.r.clone();
    r[i] = root;
    let out = MarkovTriple { r };
    debug_assert!(verify(eq, &out), "mutation must preserve the equation");
    Ok(out)
}

/// Breadth-first closure of a seed under the three mutations, pruned when the
/// maximal coordinate exceeds `bound`. The output is sorted and deduplicated,
/// hence independent of traversal order.
pub fn enumerate(
    eq: &MarkovEquation,
    seed: &MarkovTriple,
    bound: &Int,
) -> Result<Vec<MarkovTriple>> {
    Ok(enumerate_with_edges(eq, seed, bound)?.0)
}

/// Mutation edges `(from, slot, to)` between kept triples, alongside the
/// solution list.
pub type MutationEdge = (MarkovTriple, usize, MarkovTriple);

pub fn enumerate_with_edges(
    eq: &MarkovEquation,
    seed: &MarkovTriple,
    bound: &Int,
) -> Result<(Vec<MarkovTriple>, Vec<MutationEdge>)> {
    if !verify(eq, seed) {
        return Err(Error::InvalidTriple(format!("seed {seed} fails {eq}")));
    }
    if seed.max_entry() > bound {
        return Ok((Vec::new(), Vec::new()));
    }
    let mut seen = BTreeSet::new();
    let mut edges = BTreeSet::new();
    let mut queue = VecDeque::new();
    seen.insert(seed.clone());
    queue.push_back(seed.clone());
    while let Some(t) = queue.pop_front() {
        for index in 1..=3 {
            let next = mutate(eq, &t, index)?;
            if next.max_entry() > bound || next == t {
                continue;
            }
            edges.insert((t.clone(), index, next.clone()));
            if seen.insert(next.clone()) {
                queue.push_back(next);
            }
        }
    }
    Ok((seen.into_iter().collect(), edges.into_iter().collect()))
}
