//! Shared exact-arithmetic aliases and small number-theoretic helpers.
//!
//! Everything in the crate computes over arbitrary-precision integers and
//! rationals; floating point never appears.

use num::{BigInt, BigRational, Integer, One, Signed};

pub type Int = BigInt;
pub type Rat = BigRational;

pub fn int(v: i64) -> Int {
    Int::from(v)
}

pub fn rat_int(v: i64) -> Rat {
    Rat::from_integer(int(v))
}

pub fn rat(num: i64, den: i64) -> Rat {
    Rat::new(int(num), int(den))
}

/// Ceiling of `a / b` for `b > 0`.
pub fn div_ceil(a: &Int, b: &Int) -> Int {
    debug_assert!(b.is_positive());
    (a + b - Int::one()).div_floor(b)
}

/// Canonical residue of `a` in `[0, m)` for `m >= 1`.
pub fn reduce_mod(a: &Int, m: &Int) -> Int {
    debug_assert!(m.is_positive());
    a.mod_floor(m)
}

/// Least non-negative `x` with `x * g == 1 (mod m)`, if `gcd(g, m) = 1`.
///
/// For `m = 1` every residue is invertible and the result is `0`.
pub fn mod_inverse(g: &Int, m: &Int) -> Option<Int> {
    debug_assert!(m.is_positive());
    let e = g.extended_gcd(m);
    if e.gcd.is_one() {
        Some(e.x.mod_floor(m))
    } else {
        None
    }
}

/// Extended gcd: returns `(g, x, y)` with `a*x + b*y = g = gcd(a, b) >= 0`.
pub fn extended_gcd(a: &Int, b: &Int) -> (Int, Int, Int) {
    let e = a.extended_gcd(b);
    (e.gcd, e.x, e.y)
}

/// Exact integer square root when `n` is a perfect square.
pub fn perfect_sqrt(n: &Int) -> Option<Int> {
    if n.is_negative() {
        return None;
    }
    let r = n.sqrt();
    if &(&r * &r) == n {
        Some(r)
    } else {
        None
    }
}

/// True when the rational is an integer.
pub fn is_integer(r: &Rat) -> bool {
    r.denom().is_one()
}
