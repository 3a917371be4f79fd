//! Link homology of normal surface singularities by integer linear algebra.
//!
//! Mumford's theorem presents `H_1` of the link by the intersection matrix of
//! any simple normal crossing resolution: generators are loops around the
//! exceptional curves, relations are the rows of the matrix. We compute the
//! group by Smith normal form and express the divisor cycle map gamma in
//! invariant-factor coordinates.

use crate::arith::{mod_inverse, reduce_mod, Int, Rat};
use crate::error::{Error, Result};
use crate::hjfrac::HjExpansion;
use crate::linalg::{require_negative_definite, smith_normal_form, solve_exact, IMat};
use num::{Integer, One, Zero};

/// A symmetric intersection matrix with labelled rows/columns.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IntersectionMatrix {
    mat: IMat,
    labels: Vec<String>,
}

impl IntersectionMatrix {
    /// Any symmetric pairing table (for example on a complete surface, where
    /// the form is indefinite).
    pub fn symmetric(mat: IMat, labels: Vec<String>) -> Result<Self> {
        if !mat.is_symmetric() {
            return Err(Error::NotSymmetric);
        }
        if labels.len() != mat.rows() {
            return Err(Error::LengthMismatch {
                expected: mat.rows(),
                got: labels.len(),
            });
        }
        Ok(IntersectionMatrix { mat, labels })
    }

    /// An exceptional configuration: symmetric and negative definite.
    pub fn negative_definite(mat: IMat, labels: Vec<String>) -> Result<Self> {
        require_negative_definite(&mat)?;
        Self::symmetric(mat, labels)
    }

    /// Tridiagonal matrix of a resolution chain: diagonal `-b_i`,
    /// off-diagonal `1`.
    pub fn chain(b: &HjExpansion) -> Self {
        Self::chain_of_selfints(b.coeffs())
    }

    /// Chain matrix from an arbitrary list of `b_i` (diagonal `-b_i`). Used
    /// for composite chains whose interior curves may have `b_i = 1`.
    pub fn chain_of_selfints(b: &[Int]) -> Self {
        let r = b.len();
        let mut mat = IMat::zero(r, r);
        for i in 0..r {
            mat[(i, i)] = -b[i].clone();
            if i + 1 < r {
                mat[(i, i + 1)] = Int::one();
                mat[(i + 1, i)] = Int::one();
            }
        }
        let labels = (1..=r).map(|i| format!("E{i}")).collect();
        IntersectionMatrix { mat, labels }
    }

    pub fn size(&self) -> usize {
        self.mat.rows()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn matrix(&self) -> &IMat {
        &self.mat
    }

    pub fn is_negative_definite(&self) -> bool {
        self.mat.is_negative_definite()
    }

    /// Column `j` as a vector, i.e. the intersection numbers of `E_j` with
    /// every curve of the configuration.
    pub fn column(&self, j: usize) -> Vec<Int> {
        (0..self.size()).map(|i| self.mat[(i, j)].clone()).collect()
    }
}

/// A finitely generated abelian group presented by an intersection matrix,
/// in invariant-factor coordinates (unit factors omitted).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LinkGroup {
    invariant_factors: Vec<Int>,
    /// `generator_images[j]` = coordinates of the loop generator `alpha_{j+1}`.
    generator_images: Vec<Vec<Int>>,
}

impl LinkGroup {
    pub fn invariant_factors(&self) -> &[Int] {
        &self.invariant_factors
    }

    pub fn generator_images(&self) -> &[Vec<Int>] {
        &self.generator_images
    }

    pub fn order(&self) -> Int {
        self.invariant_factors
            .iter()
            .fold(Int::one(), |acc, f| acc * f)
    }

    pub fn is_cyclic(&self) -> bool {
        self.invariant_factors.len() <= 1
    }

    pub fn generator_count(&self) -> usize {
        self.generator_images.len()
    }

    pub fn zero(&self) -> GammaValue {
        GammaValue {
            coords: vec![Int::zero(); self.invariant_factors.len()],
            moduli: self.invariant_factors.clone(),
        }
    }

    /// The class of `alpha_{j+1}`.
    pub fn generator(&self, j: usize) -> GammaValue {
        GammaValue {
            coords: self.generator_images[j].clone(),
            moduli: self.invariant_factors.clone(),
        }
    }
}

/// An element of a `LinkGroup`: one canonical residue per invariant factor.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GammaValue {
    coords: Vec<Int>,
    moduli: Vec<Int>,
}

impl GammaValue {
    pub fn coords(&self) -> &[Int] {
        &self.coords
    }

    pub fn moduli(&self) -> &[Int] {
        &self.moduli
    }

    pub fn is_zero(&self) -> bool {
        self.coords.iter().all(|c| c.is_zero())
    }

    pub fn add(&self, other: &GammaValue) -> GammaValue {
        assert_eq!(self.moduli, other.moduli, "values live in different groups");
        let coords = self
            .coords
            .iter()
            .zip(&other.coords)
            .zip(&self.moduli)
            .map(|((a, b), m)| reduce_mod(&(a + b), m))
            .collect();
        GammaValue {
            coords,
            moduli: self.moduli.clone(),
        }
    }

    pub fn scale(&self, k: &Int) -> GammaValue {
        let coords = self
            .coords
            .iter()
            .zip(&self.moduli)
            .map(|(c, m)| reduce_mod(&(c * k), m))
            .collect();
        GammaValue {
            coords,
            moduli: self.moduli.clone(),
        }
    }

    /// For an element of a cyclic group: its single residue (zero in the
    /// trivial group).
    pub fn cyclic_residue(&self) -> Int {
        assert!(self.coords.len() <= 1, "group is not cyclic");
        self.coords.first().cloned().unwrap_or_else(Int::zero)
    }

    pub fn cyclic_modulus(&self) -> Int {
        assert!(self.moduli.len() <= 1, "group is not cyclic");
        self.moduli.first().cloned().unwrap_or_else(Int::one)
    }
}

impl std::fmt::Display for GammaValue {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.coords.is_empty() {
            return write!(f, "0 mod 1");
        }
        let parts: Vec<String> = self
            .coords
            .iter()
            .zip(&self.moduli)
            .map(|(c, m)| format!("{c} mod {m}"))
            .collect();
        write!(f, "{}", parts.join(", "))
    }
}

/// The abelian group presented by the relations `M * (alpha_1..alpha_r) = 0`.
///
/// The group order equals `|det M|`. For chains the group is cyclic and the
/// coordinates are normalized so that `alpha_1` maps to `1`, matching the
/// continued-fraction coefficients `alpha_k = det A(b_1..b_{k-1}) alpha_1`.
pub fn link_group(m: &IntersectionMatrix) -> Result<LinkGroup> {
    require_negative_definite(m.matrix())?;
    let snf = smith_normal_form(m.matrix());
    let r = m.size();

    let keep: Vec<usize> = (0..r).filter(|&i| !snf.diag[i].is_one()).collect();
    let factors: Vec<Int> = keep.iter().map(|&i| snf.diag[i].clone()).collect();

    // alpha_j = e_j in presentation coordinates maps to column j of U.
    let mut images: Vec<Vec<Int>> = (0..r)
        .map(|j| {
            keep.iter()
                .map(|&i| reduce_mod(&snf.u[(i, j)], &factors_at(&factors, &keep, i)))
                .collect()
        })
        .collect();

    // canonical form for cyclic groups: rescale so alpha_1 maps to 1 whenever
    // alpha_1 generates
    if factors.len() == 1 {
        let modulus = factors[0].clone();
        let a1 = images[0][0].clone();
        if let Some(inv) = mod_inverse(&a1, &modulus) {
            for img in images.iter_mut() {
                img[0] = reduce_mod(&(&img[0] * &inv), &modulus);
            }
        }
    }

    Ok(LinkGroup {
        invariant_factors: factors,
        generator_images: images,
    })
}

fn factors_at(factors: &[Int], keep: &[usize], row: usize) -> Int {
    let pos = keep.iter().position(|&k| k == row).expect("kept row");
    factors[pos].clone()
}

/// Coefficients `n_k` with `alpha_k = n_k * alpha_1` on a resolution chain:
/// `n_k = det A(b_1, ..., b_{k-1})`.
pub fn alpha_coefficients(b: &[Int]) -> Vec<Int> {
    let mut out = Vec::with_capacity(b.len());
    let mut prev = Int::zero();
    let mut cur = Int::one();
    for bi in b {
        out.push(cur.clone());
        let next = bi * &cur - &prev;
        prev = cur;
        cur = next;
    }
    out
}

/// The divisor cycle map: `(k_1, ..., k_r) -> sum_j k_j alpha_j` where
/// `k_j = (D'.E_j)` for a lift `D'` of the divisor class.
pub fn gamma(intersections: &[Int], g: &LinkGroup) -> Result<GammaValue> {
    if intersections.len() != g.generator_count() {
        return Err(Error::LengthMismatch {
            expected: g.generator_count(),
            got: intersections.len(),
        });
    }
    let mut acc = g.zero();
    for (k, j) in intersections.iter().zip(0..) {
        if k.is_zero() {
            continue;
        }
        acc = acc.add(&g.generator(j).scale(k));
    }
    Ok(acc)
}

/// True iff two lifts produce the same gamma class; the difference of the two
/// intersection vectors should lie in the column lattice of `M`.
pub fn gamma_invariance_check(
    m: &IntersectionMatrix,
    d1: &[Int],
    d2: &[Int],
) -> Result<bool> {
    let g = link_group(m)?;
    Ok(gamma(d1, &g)? == gamma(d2, &g)?)
}

/// The unique integer vector `a` with `dprime + M a = target`, when the exact
/// rational solution of `M a = target - dprime` is integral.
pub fn adjust_divisor(
    dprime: &[Int],
    target: &[Int],
    m: &IntersectionMatrix,
) -> Result<Option<Vec<Int>>> {
    require_negative_definite(m.matrix())?;
    if dprime.len() != m.size() || target.len() != m.size() {
        return Err(Error::LengthMismatch {
            expected: m.size(),
            got: dprime.len().max(target.len()),
        });
    }
    let rhs: Vec<Rat> = target
        .iter()
        .zip(dprime)
        .map(|(t, d)| Rat::from_integer(t - d))
        .collect();
    let sol = solve_exact(m.matrix(), &rhs).ok_or(Error::SingularMatrix)?;
    if sol.iter().all(|x| x.denom().is_one()) {
        Ok(Some(sol.into_iter().map(|x| x.to_integer()).collect()))
    } else {
        Ok(None)
    }
}

/// Whether a class is `n` times some element: in each cyclic factor `Z/m`,
/// the residue must be divisible by `gcd(n, m)`.
pub fn lifts_to_general_fiber(v: &GammaValue, n: &Int) -> bool {
    v.coords()
        .iter()
        .zip(v.moduli())
        .all(|(c, m)| c.mod_floor(&n.gcd(m)).is_zero())
}

/// Least non-negative `x` with `x * g == 1 (mod modulus)`. A non-coprime
/// input means the class fails to generate the corresponding cyclic quotient.
pub fn inverse_mod(g: &Int, modulus: &Int) -> Result<Int> {
    mod_inverse(g, modulus).ok_or_else(|| Error::NotCoprime(g.to_string(), modulus.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::int;
    use crate::hjfrac::hj_expand;

    fn ints(v: &[i64]) -> Vec<Int> {
        v.iter().map(|&x| int(x)).collect()
    }

    fn chain_group(b: &[i64]) -> (IntersectionMatrix, LinkGroup) {
        let m = IntersectionMatrix::chain_of_selfints(&ints(b));
        let g = link_group(&m).unwrap();
        (m, g)
    }

    #[test]
    fn link_group_examples() {
        let (_, g) = chain_group(&[4]);
        assert_eq!(g.invariant_factors(), &[int(4)]);
        assert_eq!(g.generator(0).cyclic_residue(), int(1));

        let (_, g) = chain_group(&[6, 3, 2, 2, 2]);
        assert_eq!(g.order(), int(50));
        assert!(g.is_cyclic());

        let (_, g) = chain_group(&[2, 2, 2]);
        assert_eq!(g.order(), int(4));
        assert!(g.is_cyclic());
    }

    #[test]
    fn link_group_rejects_bad_matrices() {
        let m = IntersectionMatrix::symmetric(
            IMat::from_rows(&[vec![1, 0], vec![0, 1]]),
            vec!["a".into(), "b".into()],
        )
        .unwrap();
        assert_eq!(link_group(&m), Err(Error::NotNegativeDefinite));
        assert!(IntersectionMatrix::symmetric(
            IMat::from_rows(&[vec![0, 1], vec![2, 0]]),
            vec!["a".into(), "b".into()],
        )
        .is_err());
    }

    #[test]
    fn chain_generators_follow_alpha_coefficients() {
        for b in [vec![4], vec![6, 3, 2, 2, 2], vec![7, 2, 2, 2], vec![2, 2]] {
            let (_, g) = chain_group(&b);
            let coeffs = alpha_coefficients(&ints(&b));
            let order = g.order();
            for (j, c) in coeffs.iter().enumerate() {
                assert_eq!(
                    g.generator(j).cyclic_residue(),
                    reduce_mod(c, &order),
                    "chain {b:?} generator {j}"
                );
            }
        }
    }

    #[test]
    fn alpha_coefficient_examples() {
        assert_eq!(alpha_coefficients(&ints(&[4])), ints(&[1]));
        assert_eq!(
            alpha_coefficients(&ints(&[6, 3, 2, 2, 2])),
            ints(&[1, 6, 17, 28, 39])
        );
        assert_eq!(alpha_coefficients(&ints(&[7, 2, 2, 2])), ints(&[1, 7, 13, 19]));
    }

    #[test]
    fn gamma_examples() {
        let (_, g) = chain_group(&[4]);
        assert_eq!(gamma(&ints(&[1]), &g).unwrap().cyclic_residue(), int(1));

        let (_, g) = chain_group(&[6, 3, 2, 2, 2]);
        assert_eq!(
            gamma(&ints(&[0, 1, 0, 0, 0]), &g).unwrap().cyclic_residue(),
            int(6)
        );
        assert_eq!(
            gamma(&ints(&[1, 0, 0, 0, 1]), &g).unwrap().cyclic_residue(),
            int(40)
        );
        assert!(gamma(&ints(&[1, 2]), &g).is_err());
    }

    #[test]
    fn gamma_vanishes_on_relations() {
        // each column of the chain matrix is a relation, so gamma is zero on it
        for b in [vec![4], vec![6, 3, 2, 2, 2], vec![7, 2, 2, 2]] {
            let (m, g) = chain_group(&b);
            for j in 0..m.size() {
                assert!(gamma(&m.column(j), &g).unwrap().is_zero());
            }
        }
    }

    #[test]
    fn gamma_invariance_examples() {
        let (m, _) = chain_group(&[6, 3, 2, 2, 2]);
        let d1 = ints(&[1, 0, 2, 0, 1]);
        let mut d2 = d1.clone();
        for (i, v) in m.column(0).iter().enumerate() {
            d2[i] += v;
        }
        assert!(gamma_invariance_check(&m, &d1, &d2).unwrap());
        assert!(gamma_invariance_check(&m, &d1, &d1).unwrap());

        let (m, _) = chain_group(&[2, 2]);
        assert!(!gamma_invariance_check(&m, &ints(&[1, 0]), &ints(&[0, 1])).unwrap());
    }

    #[test]
    fn adjust_divisor_examples() {
        let m = IntersectionMatrix::negative_definite(
            IMat::from_rows(&[vec![-4]]),
            vec!["E1".into()],
        )
        .unwrap();
        assert_eq!(
            adjust_divisor(&ints(&[1]), &ints(&[5]), &m).unwrap(),
            Some(ints(&[-1]))
        );
        assert_eq!(
            adjust_divisor(&ints(&[3]), &ints(&[3]), &m).unwrap(),
            Some(ints(&[0]))
        );

        let (m, _) = chain_group(&[2, 2]);
        assert_eq!(adjust_divisor(&ints(&[1, 0]), &ints(&[0, 1]), &m).unwrap(), None);
    }

    #[test]
    fn adjust_divisor_round_trip() {
        let (m, _) = chain_group(&[6, 3, 2, 2, 2]);
        let dprime = ints(&[1, 0, 0, 2, -1]);
        let a = ints(&[2, -1, 0, 3, 1]);
        let target: Vec<Int> = m
            .matrix()
            .mul_vec(&a)
            .iter()
            .zip(&dprime)
            .map(|(ma, d)| ma + d)
            .collect();
        assert_eq!(adjust_divisor(&dprime, &target, &m).unwrap(), Some(a));
    }

    #[test]
    fn adjustment_map_is_injective() {
        // distinct a give distinct dprime + M a, brute forced over |a|_inf <= 3
        let (m, _) = chain_group(&[2, 2]);
        let mut seen = std::collections::BTreeSet::new();
        for a0 in -3..=3i64 {
            for a1 in -3..=3i64 {
                let v = m.matrix().mul_vec(&ints(&[a0, a1]));
                assert!(seen.insert(v), "collision at ({a0},{a1})");
            }
        }
    }

    #[test]
    fn lifting_examples() {
        let (_, g) = chain_group(&[2, 2, 2]); // order 4
        let two = gamma(&ints(&[0, 1, 0]), &g).unwrap();
        assert_eq!(two.cyclic_residue(), int(2));
        assert!(lifts_to_general_fiber(&two, &int(2)));
        let one = gamma(&ints(&[1, 0, 0]), &g).unwrap();
        assert!(!lifts_to_general_fiber(&one, &int(2)));

        // 10 in Z/25 is 5 * 2: brute force agrees
        let b = hj_expand(&int(25), &int(4)).unwrap();
        let g = link_group(&IntersectionMatrix::chain(&b)).unwrap();
        let v = gamma(&ints(&[10, 0, 0, 0]), &g).unwrap();
        assert_eq!(v.cyclic_residue(), int(10));
        let brute = (0..25i64).any(|x| (5 * x) % 25 == 10);
        assert_eq!(lifts_to_general_fiber(&v, &int(5)), brute);
    }

    #[test]
    fn inverse_mod_examples() {
        assert_eq!(inverse_mod(&int(1), &int(4)).unwrap(), int(1));
        assert_eq!(inverse_mod(&int(81), &int(4)).unwrap(), int(1));
        assert_eq!(inverse_mod(&int(7), &int(81)).unwrap(), int(58));
        assert!(inverse_mod(&int(6), &int(4)).is_err());
    }

    #[test]
    fn gamma_is_additive() {
        let (_, g) = chain_group(&[6, 3, 2, 2, 2]);
        let d1 = ints(&[1, 2, 0, -1, 3]);
        let d2 = ints(&[0, 1, 4, 1, -2]);
        let sum: Vec<Int> = d1.iter().zip(&d2).map(|(a, b)| a + b).collect();
        let lhs = gamma(&sum, &g).unwrap();
        let rhs = gamma(&d1, &g).unwrap().add(&gamma(&d2, &g).unwrap());
        assert_eq!(lhs, rhs);
    }
}
