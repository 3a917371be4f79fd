//! Hirzebruch-Jung continued fractions, tridiagonal determinants, and the
//! arithmetic of cyclic quotient singularities of class T.

use crate::arith::{div_ceil, int, Int};
use crate::error::{Error, Result};
use num::{Integer, One, Signed, Zero};

/// The cyclic quotient singularity `1/m(1, q)`.
///
/// `m = 1` encodes a smooth point (with `q = 0`); otherwise `0 < q < m` and
/// `gcd(m, q) = 1`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CyclicQuotient {
    m: Int,
    q: Int,
}

impl CyclicQuotient {
    pub fn new(m: Int, q: Int) -> Result<Self> {
        if m.is_one() && q.is_zero() {
            return Ok(CyclicQuotient { m, q });
        }
        if !m.is_positive() || !q.is_positive() || q >= m {
            return Err(Error::OutOfRange(format!(
                "cyclic quotient needs 0 < q < m, got (m, q) = ({m}, {q})"
            )));
        }
        if !m.gcd(&q).is_one() {
            return Err(Error::NotCoprime(m.to_string(), q.to_string()));
        }
        Ok(CyclicQuotient { m, q })
    }

    pub fn smooth() -> Self {
        CyclicQuotient {
            m: Int::one(),
            q: Int::zero(),
        }
    }

    pub fn is_smooth(&self) -> bool {
        self.m.is_one()
    }

    pub fn m(&self) -> &Int {
        &self.m
    }

    pub fn q(&self) -> &Int {
        &self.q
    }
}

impl std::fmt::Display for CyclicQuotient {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.is_smooth() {
            write!(f, "smooth")
        } else {
            write!(f, "1/{}(1,{})", self.m, self.q)
        }
    }
}

/// The decomposition `(m, q) = (d n^2, d n a - 1)` of a class-T singularity.
///
/// `gcd(n, a) = 1` and `0 < a <= n`, with `a = n` only in the `n = 1` case
/// (the rational double point `A_{d-1}`).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct TDecomposition {
    d: Int,
    n: Int,
    a: Int,
}

impl TDecomposition {
    pub fn new(d: Int, n: Int, a: Int) -> Result<Self> {
        if !d.is_positive() || !n.is_positive() || !a.is_positive() {
            return Err(Error::OutOfRange(format!(
                "class-T data must be positive, got ({d}, {n}, {a})"
            )));
        }
        if !n.gcd(&a).is_one() {
            return Err(Error::NotCoprime(n.to_string(), a.to_string()));
        }
        if a > n || (a == n && !n.is_one()) {
            return Err(Error::OutOfRange(format!(
                "class-T data needs a < n (or a = n = 1), got ({d}, {n}, {a})"
            )));
        }
        Ok(TDecomposition { d, n, a })
    }

    pub fn d(&self) -> &Int {
        &self.d
    }

    pub fn n(&self) -> &Int {
        &self.n
    }

    pub fn a(&self) -> &Int {
        &self.a
    }

    /// Group order `m = d n^2` of the singularity.
    pub fn m(&self) -> Int {
        &self.d * &self.n * &self.n
    }

    /// Weight `q = d n a - 1` of the singularity.
    pub fn q(&self) -> Int {
        &self.d * &self.n * &self.a - Int::one()
    }

    pub fn singularity(&self) -> CyclicQuotient {
        CyclicQuotient::new(self.m(), self.q()).expect("class-T data is a valid quotient")
    }
}

impl std::fmt::Display for TDecomposition {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "(d,n,a)=({},{},{})", self.d, self.n, self.a)
    }
}

/// A Hirzebruch-Jung expansion `[b_1, ..., b_r]`, every `b_i >= 2`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HjExpansion {
    coeffs: Vec<Int>,
}

impl HjExpansion {
    pub fn new(coeffs: Vec<Int>) -> Result<Self> {
        if let Some(bad) = coeffs.iter().find(|b| **b < int(2)) {
            return Err(Error::BadExpansion(format!(
                "coefficient {bad} < 2 in {coeffs:?}"
            )));
        }
        Ok(HjExpansion { coeffs })
    }

    pub fn coeffs(&self) -> &[Int] {
        &self.coeffs
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }
}

/// Expand `m/q` as a Hirzebruch-Jung continued fraction by repeated ceiling
/// division: `b = ceil(m/q)`, then continue with `(q, b q - m)`. Remainders
/// strictly decrease, so the loop terminates.
pub fn hj_expand(m: &Int, q: &Int) -> Result<HjExpansion> {
    let cq = CyclicQuotient::new(m.clone(), q.clone())?;
    if cq.is_smooth() {
        return HjExpansion::new(Vec::new());
    }
    let mut coeffs = Vec::new();
    let mut m = cq.m().clone();
    let mut q = cq.q().clone();
    while !q.is_zero() {
        let b = div_ceil(&m, &q);
        let r = &b * &q - &m;
        coeffs.push(b);
        m = q;
        q = r;
    }
    HjExpansion::new(coeffs)
}

/// Determinant of the tridiagonal matrix with diagonal `b_1, ..., b_k` and
/// off-diagonal entries `-1`, via the recurrence
/// `det(b_1..b_k) = b_k det(b_1..b_{k-1}) - det(b_1..b_{k-2})`, `det() = 1`.
pub fn tridiag_det(b: &[Int]) -> Int {
    let mut prev = Int::zero(); // det of the (-1)-term, conventionally 0
    let mut cur = Int::one(); // det of the empty matrix
    for bi in b {
        let next = bi * &cur - &prev;
        prev = cur;
        cur = next;
    }
    cur
}

/// Recover `(m, q)` from an expansion: `m = det A(b_1..b_r)`,
/// `q = det A(b_2..b_r)`.
pub fn hj_evaluate(b: &HjExpansion) -> (Int, Int) {
    let m = tridiag_det(b.coeffs());
    let q = if b.is_empty() {
        Int::zero()
    } else {
        tridiag_det(&b.coeffs()[1..])
    };
    (m, q)
}

/// The unique `(d, n, a)` with `m = d n^2`, `q = d n a - 1`, if it exists.
///
/// Searches every `n` with `n^2 | m`; uniqueness is asserted rather than
/// assumed.
pub fn classify_class_t(s: &CyclicQuotient) -> Option<TDecomposition> {
    if s.is_smooth() {
        return None;
    }
    let mut found: Option<TDecomposition> = None;
    let mut n = Int::one();
    loop {
        let nsq = &n * &n;
        if &nsq > s.m() {
            break;
        }
        if s.m().mod_floor(&nsq).is_zero() {
            let d = s.m() / &nsq;
            let dn = &d * &n;
            let q1 = s.q() + Int::one();
            if q1.mod_floor(&dn).is_zero() {
                let a = q1 / &dn;
                if let Ok(t) = TDecomposition::new(d, n.clone(), a) {
                    if let Some(prev) = &found {
                        panic!("class-T decomposition of {s} is not unique: {prev} and {t}");
                    }
                    found = Some(t);
                }
            }
        }
        n += Int::one();
    }
    found
}

/// True iff the singularity is `1/n^2(1, na-1)` with `n > 1`.
pub fn is_wahl(s: &CyclicQuotient) -> bool {
    classify_class_t(s).is_some_and(|t| t.d().is_one() && !t.n().is_one())
}

/// Structural description of the one-parameter equation family
/// `x y = z^{dn} + t_{d-1} z^{(d-1)n} + ... + t_1 z^n + t_0` modulo the
/// weight-`(1, -1, a)` action of `Z/n`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VersalFamily {
    /// z-exponents `dn, (d-1)n, ..., n, 0`, strictly decreasing by `n`.
    pub monomial_exponents: Vec<Int>,
    /// `(1, -1, a)` reduced mod `n`.
    pub action_weights: (Int, Int, Int),
    /// The order `n` of the acting group.
    pub action_order: Int,
}

pub fn versal_family(t: &TDecomposition) -> VersalFamily {
    let mut exps = Vec::new();
    let mut k = t.d().clone();
    while !k.is_negative() {
        exps.push(&k * t.n());
        k -= Int::one();
    }
    let n = t.n().clone();
    let reduce = |v: Int| v.mod_floor(&n);
    VersalFamily {
        monomial_exponents: exps,
        action_weights: (reduce(Int::one()), reduce(-Int::one()), reduce(t.a().clone())),
        action_order: n,
    }
}

/// Milnor fiber invariants of the smoothing: `H_2` is free of rank `d - 1`
/// and `H_1` is cyclic of order `n`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MilnorInvariants {
    pub h2_rank: Int,
    pub h1_torsion: Int,
}

pub fn milnor_invariants(t: &TDecomposition) -> MilnorInvariants {
    MilnorInvariants {
        h2_rank: t.d() - Int::one(),
        h1_torsion: t.n().clone(),
    }
}
