//! Exact integer linear algebra: fraction-free determinants and solves,
//! and Smith normal form with a deterministic pivot rule.

use crate::arith::{Int, Rat};
use crate::error::{Error, Result};
use num::{Integer, One, Signed, Zero};

/// Dense integer matrix in row-major order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IMat {
    rows: usize,
    cols: usize,
    data: Vec<Int>,
}

impl IMat {
    pub fn new(rows: usize, cols: usize, data: Vec<Int>) -> Self {
        assert_eq!(rows * cols, data.len(), "matrix shape mismatch");
        IMat { rows, cols, data }
    }

    pub fn zero(rows: usize, cols: usize) -> Self {
        IMat::new(rows, cols, vec![Int::zero(); rows * cols])
    }

    pub fn identity(n: usize) -> Self {
        let mut m = IMat::zero(n, n);
        for i in 0..n {
            m[(i, i)] = Int::one();
        }
        m
    }

    pub fn from_rows(rows: &[Vec<i64>]) -> Self {
        let r = rows.len();
        let c = if r == 0 { 0 } else { rows[0].len() };
        let data = rows
            .iter()
            .flat_map(|row| {
                assert_eq!(row.len(), c);
                row.iter().map(|&v| Int::from(v))
            })
            .collect();
        IMat::new(r, c, data)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_symmetric(&self) -> bool {
        self.rows == self.cols
            && (0..self.rows).all(|i| (0..i).all(|j| self[(i, j)] == self[(j, i)]))
    }

    /// Leading principal minor determinants `det M[0..k]` for `k = 1..=n`.
    pub fn leading_minors(&self) -> Vec<Int> {
        (1..=self.rows.min(self.cols))
            .map(|k| self.submatrix(k).determinant())
            .collect()
    }

    fn submatrix(&self, k: usize) -> IMat {
        let mut data = Vec::with_capacity(k * k);
        for i in 0..k {
            for j in 0..k {
                data.push(self[(i, j)].clone());
            }
        }
        IMat::new(k, k, data)
    }

    /// Determinant by fraction-free (Bareiss) elimination.
    pub fn determinant(&self) -> Int {
        assert_eq!(self.rows, self.cols, "determinant of non-square matrix");
        let n = self.rows;
        if n == 0 {
            return Int::one();
        }
        let mut a = self.clone();
        let mut sign = Int::one();
        let mut prev = Int::one();
        for k in 0..n - 1 {
            if a[(k, k)].is_zero() {
                let Some(p) = (k + 1..n).find(|&i| !a[(i, k)].is_zero()) else {
                    return Int::zero();
                };
                a.swap_rows(k, p);
                sign = -sign;
            }
            for i in k + 1..n {
                for j in k + 1..n {
                    let num = &a[(k, k)] * &a[(i, j)] - &a[(i, k)] * &a[(k, j)];
                    let (q, r) = num.div_rem(&prev);
                    debug_assert!(r.is_zero(), "Bareiss division must be exact");
                    a[(i, j)] = q;
                }
                a[(i, k)] = Int::zero();
            }
            prev = a[(k, k)].clone();
        }
        sign * a[(n - 1, n - 1)].clone()
    }

    /// Negative definiteness via leading principal minors alternating in sign,
    /// starting negative.
    pub fn is_negative_definite(&self) -> bool {
        if !self.is_symmetric() {
            return false;
        }
        self.leading_minors().iter().enumerate().all(|(idx, d)| {
            if idx % 2 == 0 {
                d.is_negative()
            } else {
                d.is_positive()
            }
        })
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for j in 0..self.cols {
            self.data.swap(a * self.cols + j, b * self.cols + j);
        }
    }

    pub fn mul(&self, other: &IMat) -> IMat {
        assert_eq!(self.cols, other.rows);
        let mut out = IMat::zero(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                if self[(i, k)].is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let add = &self[(i, k)] * &other[(k, j)];
                    out[(i, j)] += add;
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[Int]) -> Vec<Int> {
        assert_eq!(self.cols, v.len());
        (0..self.rows)
            .map(|i| (0..self.cols).map(|j| &self[(i, j)] * &v[j]).sum())
            .collect()
    }
}

impl std::ops::Index<(usize, usize)> for IMat {
    type Output = Int;
    fn index(&self, (i, j): (usize, usize)) -> &Int {
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for IMat {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Int {
        &mut self.data[i * self.cols + j]
    }
}

/// Solve `M x = b` exactly over the rationals. The elimination is fraction
/// free: each equation is scaled to integers and reduced by Bareiss pivots.
/// Returns `None` when `M` is singular.
pub fn solve_exact(m: &IMat, b: &[Rat]) -> Option<Vec<Rat>> {
    assert_eq!(m.rows, m.cols, "solve_exact expects a square system");
    assert_eq!(m.rows, b.len());
    let n = m.rows;
    if n == 0 {
        return Some(Vec::new());
    }

    // Augmented integer matrix: each row scaled by the lcm of the rhs denominator.
    let mut a = IMat::zero(n, n + 1);
    for i in 0..n {
        let scale = b[i].denom().clone();
        for j in 0..n {
            a[(i, j)] = &m[(i, j)] * &scale;
        }
        a[(i, n)] = b[i].numer().clone();
    }

    // Forward fraction-free elimination to upper triangular form.
    let mut prev = Int::one();
    for k in 0..n.saturating_sub(1) {
        if a[(k, k)].is_zero() {
            let p = (k + 1..n).find(|&i| !a[(i, k)].is_zero())?;
            a.swap_rows(k, p);
        }
        for i in k + 1..n {
            for j in k + 1..=n {
                let num = &a[(k, k)] * &a[(i, j)] - &a[(i, k)] * &a[(k, j)];
                let (q, r) = num.div_rem(&prev);
                debug_assert!(r.is_zero(), "Bareiss division must be exact");
                a[(i, j)] = q;
            }
            a[(i, k)] = Int::zero();
        }
        prev = a[(k, k)].clone();
    }

    // Rational back substitution.
    let mut x = vec![Rat::zero(); n];
    for i in (0..n).rev() {
        if a[(i, i)].is_zero() {
            return None;
        }
        let mut acc = Rat::from_integer(a[(i, n)].clone());
        for j in i + 1..n {
            acc -= Rat::from_integer(a[(i, j)].clone()) * &x[j];
        }
        x[i] = acc / Rat::from_integer(a[(i, i)].clone());
    }
    Some(x)
}

/// Smith normal form `U * M * V = D` over the integers.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Snf {
    /// Diagonal entries of `D`, each non-negative, each dividing the next.
    pub diag: Vec<Int>,
    pub u: IMat,
    pub v: IMat,
}

/// Deterministic Smith normal form: the pivot is always the nonzero entry of
/// smallest absolute value in the remaining block, ties broken by lowest row
/// then lowest column, so repeated runs produce identical transforms.
pub fn smith_normal_form(m: &IMat) -> Snf {
    let rows = m.rows();
    let cols = m.cols();
    let mut a = m.clone();
    let mut u = IMat::identity(rows);
    let mut v = IMat::identity(cols);

    let pivot = |a: &IMat, k: usize| -> Option<(usize, usize)> {
        let mut best: Option<(usize, usize)> = None;
        for i in k..a.rows() {
            for j in k..a.cols() {
                if a[(i, j)].is_zero() {
                    continue;
                }
                let better = match best {
                    Some((bi, bj)) => a[(i, j)].abs() < a[(bi, bj)].abs(),
                    None => true,
                };
                if better {
                    best = Some((i, j));
                }
            }
        }
        best
    };

    for k in 0..rows.min(cols) {
        let Some((pi, pj)) = pivot(&a, k) else { break };
        swap_rows(&mut a, &mut u, k, pi);
        swap_cols(&mut a, &mut v, k, pj);

        loop {
            let mut clean = true;
            for i in k + 1..rows {
                if a[(i, k)].is_zero() {
                    continue;
                }
                let q = a[(i, k)].div_floor(&a[(k, k)]);
                row_sub(&mut a, &mut u, i, k, &q);
                if !a[(i, k)].is_zero() {
                    // remainder smaller than the pivot; promote it
                    swap_rows(&mut a, &mut u, k, i);
                    clean = false;
                }
            }
            for j in k + 1..cols {
                if a[(k, j)].is_zero() {
                    continue;
                }
                let q = a[(k, j)].div_floor(&a[(k, k)]);
                col_sub(&mut a, &mut v, j, k, &q);
                if !a[(k, j)].is_zero() {
                    swap_cols(&mut a, &mut v, k, j);
                    clean = false;
                }
            }
            if !clean {
                continue;
            }
            // pivot divides the rest of the block, or pull a bad row up
            let bad = (k + 1..rows)
                .flat_map(|i| (k + 1..cols).map(move |j| (i, j)))
                .find(|&(i, j)| !a[(i, j)].mod_floor(&a[(k, k)].abs()).is_zero());
            match bad {
                Some((i, _)) => {
                    row_add(&mut a, &mut u, k, i);
                }
                None => break,
            }
        }
        if a[(k, k)].is_negative() {
            negate_row(&mut a, &mut u, k);
        }
    }

    let diag = (0..rows.min(cols)).map(|i| a[(i, i)].clone()).collect();
    Snf { diag, u, v }
}

fn swap_rows(a: &mut IMat, u: &mut IMat, i: usize, j: usize) {
    if i == j {
        return;
    }
    a.swap_rows(i, j);
    u.swap_rows(i, j);
}

fn swap_cols(a: &mut IMat, v: &mut IMat, i: usize, j: usize) {
    if i == j {
        return;
    }
    for r in 0..a.rows() {
        let (x, y) = (a[(r, i)].clone(), a[(r, j)].clone());
        a[(r, i)] = y;
        a[(r, j)] = x;
    }
    for r in 0..v.rows() {
        let (x, y) = (v[(r, i)].clone(), v[(r, j)].clone());
        v[(r, i)] = y;
        v[(r, j)] = x;
    }
}

fn row_sub(a: &mut IMat, u: &mut IMat, i: usize, k: usize, q: &Int) {
    if q.is_zero() {
        return;
    }
    for j in 0..a.cols() {
        let d = q * &a[(k, j)];
        a[(i, j)] -= d;
    }
    for j in 0..u.cols() {
        let d = q * &u[(k, j)];
        u[(i, j)] -= d;
    }
}

fn row_add(a: &mut IMat, u: &mut IMat, i: usize, k: usize) {
    for j in 0..a.cols() {
        let d = a[(k, j)].clone();
        a[(i, j)] += d;
    }
    for j in 0..u.cols() {
        let d = u[(k, j)].clone();
        u[(i, j)] += d;
    }
}

fn col_sub(a: &mut IMat, v: &mut IMat, j: usize, k: usize, q: &Int) {
    if q.is_zero() {
        return;
    }
    for r in 0..a.rows() {
        let d = q * &a[(r, k)];
        a[(r, j)] -= d;
    }
    for r in 0..v.rows() {
        let d = q * &v[(r, k)];
        v[(r, j)] -= d;
    }
}

fn negate_row(a: &mut IMat, u: &mut IMat, k: usize) {
    for j in 0..a.cols() {
        let d = -a[(k, j)].clone();
        a[(k, j)] = d;
    }
    for j in 0..u.cols() {
        let d = -u[(k, j)].clone();
        u[(k, j)] = d;
    }
}

/// Validates a symmetric negative definite matrix, the shape Mumford's
/// presentation requires.
pub fn require_negative_definite(m: &IMat) -> Result<()> {
    if !m.is_symmetric() {
        return Err(Error::NotSymmetric);
    }
    if !m.is_negative_definite() {
        return Err(Error::NotNegativeDefinite);
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::{int, rat_int};

    #[test]
    fn determinant_small_cases() {
        let m = IMat::from_rows(&[vec![2, 1], vec![1, 2]]);
        assert_eq!(m.determinant(), int(3));
        let m = IMat::from_rows(&[vec![0, 1], vec![1, 0]]);
        assert_eq!(m.determinant(), int(-1));
        let m = IMat::from_rows(&[vec![1, 2, 3], vec![4, 5, 6], vec![7, 8, 9]]);
        assert_eq!(m.determinant(), int(0));
    }

    #[test]
    fn negative_definite_recognizes_chains() {
        let m = IMat::from_rows(&[vec![-4]]);
        assert!(m.is_negative_definite());
        let m = IMat::from_rows(&[vec![-2, 1], vec![1, -2]]);
        assert!(m.is_negative_definite());
        let m = IMat::from_rows(&[vec![1, 1], vec![1, 1]]);
        assert!(!m.is_negative_definite());
        let m = IMat::from_rows(&[vec![-1, 2], vec![2, -1]]);
        assert!(!m.is_negative_definite());
    }

    #[test]
    fn solve_exact_matches_hand_solution() {
        let m = IMat::from_rows(&[vec![-4]]);
        let x = solve_exact(&m, &[rat_int(4)]).unwrap();
        assert_eq!(x, vec![rat_int(-1)]);

        let m = IMat::from_rows(&[vec![2, 1], vec![1, 3]]);
        let x = solve_exact(&m, &[rat_int(5), rat_int(10)]).unwrap();
        assert_eq!(x, vec![rat_int(1), rat_int(3)]);

        let singular = IMat::from_rows(&[vec![1, 1], vec![2, 2]]);
        assert!(solve_exact(&singular, &[rat_int(1), rat_int(2)]).is_none());
    }

    #[test]
    fn snf_diagonalizes_with_valid_transforms() {
        let m = IMat::from_rows(&[vec![2, 4, 4], vec![-6, 6, 12], vec![10, -4, -16]]);
        let snf = smith_normal_form(&m);
        let d = snf.u.mul(&m).mul(&snf.v);
        for i in 0..3 {
            for j in 0..3 {
                if i == j {
                    assert_eq!(d[(i, j)], snf.diag[i]);
                } else {
                    assert!(d[(i, j)].is_zero());
                }
            }
        }
        // invariant factors of this classic example: 2, 6, 12
        assert_eq!(snf.diag, vec![int(2), int(6), int(12)]);
        assert_eq!(snf.u.determinant().abs(), int(1));
        assert_eq!(snf.v.determinant().abs(), int(1));
    }

    #[test]
    fn snf_divisibility_chain() {
        let m = IMat::from_rows(&[vec![6, 0], vec![0, 4]]);
        let snf = smith_normal_form(&m);
        assert_eq!(snf.diag, vec![int(2), int(12)]);
    }
}
