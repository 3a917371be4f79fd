//! Two-dimensional fans, cone singularity classification, M-resolutions,
//! minimal resolutions, and Mumford's rational intersection pairing on
//! singular toric surfaces.
//!
//! Cones are ordered pairs of rays; the normal form maps the first ray to
//! `(0,1)` and the second to `(m, -q)`, so the cone presents the cyclic
//! quotient `1/m(1,q)`. Fans may be listed in either rotational direction as
//! long as the direction is consistent; cones are read off consecutive rays
//! as listed.

use crate::arith::{extended_gcd, Int, Rat};
use crate::error::{Error, Result};
use crate::hjfrac::{classify_class_t, hj_expand, CyclicQuotient, TDecomposition};
use crate::link::{gamma, link_group, GammaValue, IntersectionMatrix, LinkGroup};
use crate::linalg::{solve_exact, IMat};
use num::{Integer, One, Signed, Zero};
use std::collections::BTreeMap;

/// A primitive lattice vector in `Z^2`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Ray {
    pub x: Int,
    pub y: Int,
}

impl Ray {
    pub fn new(x: impl Into<Int>, y: impl Into<Int>) -> Self {
        Ray {
            x: x.into(),
            y: y.into(),
        }
    }

    pub fn is_primitive(&self) -> bool {
        self.x.gcd(&self.y).is_one()
    }
}

impl std::fmt::Display for Ray {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "({},{})", self.x, self.y)
    }
}

pub fn det2(a: &Ray, b: &Ray) -> Int {
    &a.x * &b.y - &a.y * &b.x
}

/// A lattice automorphism `(x,y) -> (ax+by, cx+dy)` with determinant `+-1`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Unimodular {
    pub a: Int,
    pub b: Int,
    pub c: Int,
    pub d: Int,
}

impl Unimodular {
    pub fn apply(&self, r: &Ray) -> Ray {
        Ray {
            x: &self.a * &r.x + &self.b * &r.y,
            y: &self.c * &r.x + &self.d * &r.y,
        }
    }

    pub fn det(&self) -> Int {
        &self.a * &self.d - &self.b * &self.c
    }

    pub fn inverse(&self) -> Unimodular {
        let e = self.det();
        debug_assert!(e.abs().is_one());
        Unimodular {
            a: &self.d * &e,
            b: -(&self.b * &e),
            c: -(&self.c * &e),
            d: &self.a * &e,
        }
    }
}

/// Normal form of the cone spanned by `(v0, v1)`: the unique `(m, q, T)` with
/// `T v0 = (0,1)`, `T v1 = (m, -q)`, `0 <= q < m`, `T` unimodular.
pub fn cone_normal_form(v0: &Ray, v1: &Ray) -> Result<(Int, Int, Unimodular)> {
    for v in [v0, v1] {
        if !v.is_primitive() {
            return Err(Error::InvalidFan(format!("ray {v} is not primitive")));
        }
    }
    if det2(v0, v1).is_zero() {
        return Err(Error::ParallelRays);
    }
    let (g, c, d) = extended_gcd(&v0.x, &v0.y);
    debug_assert!(g.is_one());
    let mut t = Unimodular {
        a: v0.y.clone(),
        b: -v0.x.clone(),
        c,
        d,
    };
    let w = t.apply(v1);
    let (m, wy) = if w.x.is_negative() {
        t.a = -t.a;
        t.b = -t.b;
        (-w.x, w.y)
    } else {
        (w.x, w.y)
    };
    let q = (-&wy).mod_floor(&m);
    let k = (&wy + &q) / &m;
    t.c -= &k * &t.a;
    t.d -= &k * &t.b;
    debug_assert_eq!(t.apply(v0), Ray::new(0, 1));
    debug_assert_eq!(t.apply(v1), Ray::new(m.clone(), -q.clone()));
    Ok((m, q, t))
}

/// The cyclic quotient singularity of the affine chart of a cone.
pub fn cone_singularity(v0: &Ray, v1: &Ray) -> Result<CyclicQuotient> {
    let (m, q, _) = cone_normal_form(v0, v1)?;
    CyclicQuotient::new(m, q)
}

/// M-resolution rays of a class-T cone: the images of `(k n^2, 1 - k n a)`,
/// `k = 1..d-1`, under the inverse normalizing map. Smooth and Wahl cones
/// need no subdivision; a singular cone outside class T is an error.
pub fn m_resolve_cone(v0: &Ray, v1: &Ray) -> Result<Vec<Ray>> {
    let (m, q, t) = cone_normal_form(v0, v1)?;
    let s = CyclicQuotient::new(m, q)?;
    if s.is_smooth() {
        return Ok(Vec::new());
    }
    let tdec = classify_class_t(&s).ok_or_else(|| Error::NotClassT(s.to_string()))?;
    let tinv = t.inverse();
    let nsq = tdec.n() * tdec.n();
    let na = tdec.n() * tdec.a();
    let mut rays = Vec::new();
    let mut k = Int::one();
    while &k < tdec.d() {
        let r = Ray {
            x: &k * &nsq,
            y: Int::one() - &k * &na,
        };
        debug_assert!(r.is_primitive());
        rays.push(tinv.apply(&r));
        k += Int::one();
    }
    Ok(rays)
}

/// Hirzebruch-Jung chain of a cone: the inserted rays of the minimal
/// resolution (first ray adjacent to `v0`) and the coefficients `b_i`, so the
/// chain curves have self-intersection `-b_i`.
pub fn hj_chain_rays(v0: &Ray, v1: &Ray) -> Result<(Vec<Ray>, Vec<Int>)> {
    let (m, q, t) = cone_normal_form(v0, v1)?;
    if m.is_one() {
        return Ok((Vec::new(), Vec::new()));
    }
    let b = hj_expand(&m, &q)?;
    let tinv = t.inverse();
    let mut rays = Vec::with_capacity(b.len());
    let mut prev = Ray::new(0, 1);
    let mut cur = Ray::new(1, 0);
    for bi in b.coeffs() {
        rays.push(tinv.apply(&cur));
        let next = Ray {
            x: bi * &cur.x - &prev.x,
            y: bi * &cur.y - &prev.y,
        };
        prev = cur;
        cur = next;
    }
    debug_assert_eq!(cur, Ray::new(m, -q));
    Ok((rays, b.coeffs().to_vec()))
}

/// An ordered two-dimensional fan. Rays must be primitive and strictly
/// rotationally monotone (all consecutive determinants of one sign); a
/// complete fan covers the plane exactly once.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Fan2 {
    rays: Vec<Ray>,
    names: Vec<String>,
    complete: bool,
}

impl Fan2 {
    pub fn new(rays: Vec<Ray>, names: Option<Vec<String>>, complete: bool) -> Result<Self> {
        if rays.len() < 2 || (complete && rays.len() < 3) {
            return Err(Error::InvalidFan(format!(
                "need at least {} rays, got {}",
                if complete { 3 } else { 2 },
                rays.len()
            )));
        }
        for (i, r) in rays.iter().enumerate() {
            if r.x.is_zero() && r.y.is_zero() {
                return Err(Error::InvalidFan(format!("ray {} is zero", i + 1)));
            }
            if !r.is_primitive() {
                return Err(Error::InvalidFan(format!(
                    "ray {} = {r} is not primitive",
                    i + 1
                )));
            }
        }
        let names = match names {
            Some(n) => {
                if n.len() != rays.len() {
                    return Err(Error::InvalidFan(format!(
                        "{} names for {} rays",
                        n.len(),
                        rays.len()
                    )));
                }
                n
            }
            None => (1..=rays.len()).map(|i| format!("rho{i}")).collect(),
        };
        {
            let mut seen = std::collections::BTreeSet::new();
            for n in &names {
                if !seen.insert(n) {
                    return Err(Error::InvalidFan(format!("duplicate ray name {n}")));
                }
            }
        }

        let fan = Fan2 {
            rays,
            names,
            complete,
        };
        fan.check_orientation()?;
        Ok(fan)
    }

    fn check_orientation(&self) -> Result<()> {
        let n = self.rays.len();
        let pairs = if self.complete { n } else { n - 1 };
        let mut sign = 0i8;
        for i in 0..pairs {
            let d = det2(&self.rays[i], &self.rays[(i + 1) % n]);
            let s = match d.sign() {
                num::bigint::Sign::Plus => 1,
                num::bigint::Sign::Minus => -1,
                num::bigint::Sign::NoSign => {
                    return Err(Error::InvalidFan(format!(
                        "rays {} and {} are parallel",
                        i + 1,
                        (i + 1) % n + 1
                    )))
                }
            };
            if sign == 0 {
                sign = s;
            } else if sign != s {
                return Err(Error::InvalidFan(format!(
                    "inconsistent rotational direction at ray {}",
                    i + 1
                )));
            }
        }
        // validate the winding on a counterclockwise copy
        let ccw: Vec<&Ray> = if sign >= 0 {
            self.rays.iter().collect()
        } else {
            self.rays.iter().rev().collect()
        };
        let wraps = (0..pairs)
            .filter(|&i| abs_angle_lt(ccw[(i + 1) % n], ccw[i]))
            .count();
        if self.complete {
            if wraps != 1 {
                return Err(Error::InvalidFan(
                    "complete fan must cover the plane exactly once".into(),
                ));
            }
        } else {
            let overlap = match wraps {
                0 => false,
                1 => !abs_angle_lt(ccw[n - 1], ccw[0]),
                _ => true,
            };
            if overlap {
                return Err(Error::InvalidFan("fan rays overlap after a full turn".into()));
            }
        }
        Ok(())
    }

    pub fn rays(&self) -> &[Ray] {
        &self.rays
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn is_complete(&self) -> bool {
        self.complete
    }

    pub fn ray_count(&self) -> usize {
        self.rays.len()
    }

    pub fn cone_count(&self) -> usize {
        if self.complete {
            self.rays.len()
        } else {
            self.rays.len() - 1
        }
    }

    /// Ray indices `(i, j)` bounding cone `c`.
    pub fn cone(&self, c: usize) -> (usize, usize) {
        (c, (c + 1) % self.rays.len())
    }
}

/// Exact ordering of rays by absolute angle from the positive x-axis,
/// counterclockwise.
fn abs_angle_lt(a: &Ray, b: &Ray) -> bool {
    let half = |r: &Ray| -> u8 {
        if r.y.is_positive() || (r.y.is_zero() && r.x.is_positive()) {
            0
        } else {
            1
        }
    };
    match half(a).cmp(&half(b)) {
        std::cmp::Ordering::Less => true,
        std::cmp::Ordering::Greater => false,
        std::cmp::Ordering::Equal => det2(a, b).is_positive(),
    }
}

/// Per-cone singularity classification of a fan.
#[derive(Debug, Clone)]
pub struct ConeClass {
    pub cone: usize,
    pub v0_name: String,
    pub v1_name: String,
    pub singularity: CyclicQuotient,
    pub t: Option<TDecomposition>,
}

pub fn classify_fan(fan: &Fan2) -> Result<Vec<ConeClass>> {
    (0..fan.cone_count())
        .map(|c| {
            let (i, j) = fan.cone(c);
            let s = cone_singularity(&fan.rays[i], &fan.rays[j])?;
            let t = classify_class_t(&s);
            Ok(ConeClass {
                cone: c,
                v0_name: fan.names[i].clone(),
                v1_name: fan.names[j].clone(),
                singularity: s,
                t,
            })
        })
        .collect()
}

/// One cone's outcome inside an M-resolution.
#[derive(Debug, Clone)]
pub struct MResSite {
    pub cone: usize,
    pub v0_name: String,
    pub v1_name: String,
    pub singularity: CyclicQuotient,
    pub t: Option<TDecomposition>,
    pub inserted: Vec<(String, Ray)>,
    /// Set when the cone is singular but not of class T; it is left alone.
    pub flagged: bool,
}

/// The M-resolution of every class-T cone of a fan.
#[derive(Debug, Clone)]
pub struct MResolution {
    pub fan: Fan2,
    pub sites: Vec<MResSite>,
}

/// Subdivide every class-T cone by its Wahl-type rays. Cones that are neither
/// smooth nor of class T are flagged and left untouched.
pub fn m_resolution(fan: &Fan2) -> Result<MResolution> {
    let mut new_rays = Vec::new();
    let mut new_names = Vec::new();
    let mut sites = Vec::new();
    for c in 0..fan.cone_count() {
        let (i, j) = fan.cone(c);
        if c == 0 {
            new_rays.push(fan.rays[i].clone());
            new_names.push(fan.names[i].clone());
        }
        let s = cone_singularity(&fan.rays[i], &fan.rays[j])?;
        let t = classify_class_t(&s);
        let (inserted, flagged) = if s.is_smooth() {
            (Vec::new(), false)
        } else if t.is_some() {
            let rays = m_resolve_cone(&fan.rays[i], &fan.rays[j])?;
            let named: Vec<(String, Ray)> = rays
                .into_iter()
                .enumerate()
                .map(|(k, r)| (format!("A[{}][{}]", c + 1, k + 1), r))
                .collect();
            (named, false)
        } else {
            (Vec::new(), true)
        };
        for (name, ray) in &inserted {
            if fan.names.contains(name) {
                return Err(Error::InvalidFan(format!(
                    "inserted ray name {name} collides with an input ray name"
                )));
            }
            new_rays.push(ray.clone());
            new_names.push(name.clone());
        }
        if j != 0 {
            new_rays.push(fan.rays[j].clone());
            new_names.push(fan.names[j].clone());
        }
        sites.push(MResSite {
            cone: c,
            v0_name: fan.names[i].clone(),
            v1_name: fan.names[j].clone(),
            singularity: s,
            t,
            inserted,
            flagged,
        });
    }
    let fan = Fan2::new(new_rays, Some(new_names), fan.is_complete())?;
    Ok(MResolution { fan, sites })
}

/// A finitely supported rational combination of named curves.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct QDivisor {
    coeffs: BTreeMap<String, Rat>,
}

impl QDivisor {
    pub fn zero() -> Self {
        QDivisor::default()
    }

    pub fn of_curve(name: &str) -> Self {
        let mut coeffs = BTreeMap::new();
        coeffs.insert(name.to_string(), Rat::one());
        QDivisor { coeffs }
    }

    pub fn from_coeffs(pairs: impl IntoIterator<Item = (String, Rat)>) -> Self {
        let mut coeffs = BTreeMap::new();
        for (k, v) in pairs {
            if !v.is_zero() {
                coeffs.insert(k, v);
            }
        }
        QDivisor { coeffs }
    }

    pub fn coeff(&self, name: &str) -> Rat {
        self.coeffs.get(name).cloned().unwrap_or_else(Rat::zero)
    }

    pub fn coeffs(&self) -> &BTreeMap<String, Rat> {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn is_integral(&self) -> bool {
        self.coeffs.values().all(|v| v.denom().is_one())
    }

    pub fn add(&self, other: &QDivisor) -> QDivisor {
        let mut coeffs = self.coeffs.clone();
        for (k, v) in &other.coeffs {
            let e = coeffs.entry(k.clone()).or_insert_with(Rat::zero);
            *e += v;
        }
        coeffs.retain(|_, v| !v.is_zero());
        QDivisor { coeffs }
    }

    pub fn sub(&self, other: &QDivisor) -> QDivisor {
        self.add(&other.scale(&-Rat::one()))
    }

    pub fn scale(&self, k: &Rat) -> QDivisor {
        if k.is_zero() {
            return QDivisor::zero();
        }
        QDivisor {
            coeffs: self
                .coeffs
                .iter()
                .map(|(name, v)| (name.clone(), v * k))
                .collect(),
        }
    }

    pub fn scale_int(&self, k: &Int) -> QDivisor {
        self.scale(&Rat::from_integer(k.clone()))
    }
}

impl std::fmt::Display for QDivisor {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.coeffs.is_empty() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self
            .coeffs
            .iter()
            .map(|(name, v)| {
                if v.is_one() {
                    name.clone()
                } else {
                    format!("{v}*{name}")
                }
            })
            .collect();
        write!(f, "{}", parts.join(" + "))
    }
}

/// A pairing of rational divisor classes. Implemented by [`SurfaceModel`]
/// through Mumford's numerical pullback, and by synthetic forms in tests.
pub trait IntersectionForm {
    fn pair(&self, a: &QDivisor, b: &QDivisor) -> Result<Rat>;
}

/// The resolution data of one cone inside a [`SurfaceModel`].
#[derive(Debug, Clone)]
pub struct ConeResolution {
    /// Resolved-ray index of the first boundary ray.
    pub v0: usize,
    /// Resolved-ray index of the second boundary ray.
    pub v1: usize,
    /// Resolved-ray indices of the exceptional chain, `v0` side first.
    pub chain: Vec<usize>,
    /// Chain coefficients: curve `j` has self-intersection `-b[j]`.
    pub b: Vec<Int>,
    pub singularity: CyclicQuotient,
    pub t: Option<TDecomposition>,
}

/// A toric surface together with its minimal resolution: the singular fan,
/// the smooth refinement, per-cone exceptional chains, and a name for every
/// curve. Immutable once built; all queries are pure.
#[derive(Debug, Clone)]
pub struct SurfaceModel {
    fan: Fan2,
    resolved_rays: Vec<Ray>,
    resolved_names: Vec<String>,
    name_index: BTreeMap<String, usize>,
    cones: Vec<ConeResolution>,
    original_positions: Vec<usize>,
}

impl SurfaceModel {
    pub fn new(fan: Fan2) -> Result<Self> {
        let mut resolved_rays: Vec<Ray> = Vec::new();
        let mut resolved_names: Vec<String> = Vec::new();
        let mut cones = Vec::new();
        let mut original_positions = Vec::new();
        let mut pending: Vec<(usize, usize, Vec<usize>, Vec<Int>)> = Vec::new();

        for c in 0..fan.cone_count() {
            let (i, j) = fan.cone(c);
            if c == 0 {
                original_positions.push(0);
                resolved_rays.push(fan.rays()[i].clone());
                resolved_names.push(fan.names()[i].clone());
            }
            let (chain_rays, b) = hj_chain_rays(&fan.rays()[i], &fan.rays()[j])?;
            let mut chain = Vec::with_capacity(chain_rays.len());
            for (k, ray) in chain_rays.into_iter().enumerate() {
                chain.push(resolved_rays.len());
                resolved_rays.push(ray);
                resolved_names.push(format!("E[{}][{}]", c + 1, k + 1));
            }
            let v0 = original_positions[i];
            let v1 = if j == 0 {
                0
            } else {
                original_positions.push(resolved_rays.len());
                resolved_rays.push(fan.rays()[j].clone());
                resolved_names.push(fan.names()[j].clone());
                resolved_rays.len() - 1
            };
            pending.push((v0, v1, chain, b));
        }

        for (c, (v0, v1, chain, b)) in pending.into_iter().enumerate() {
            let (i, j) = fan.cone(c);
            let s = cone_singularity(&fan.rays()[i], &fan.rays()[j])?;
            let t = classify_class_t(&s);
            cones.push(ConeResolution {
                v0,
                v1,
                chain,
                b,
                singularity: s,
                t,
            });
        }

        let mut name_index = BTreeMap::new();
        for (idx, n) in resolved_names.iter().enumerate() {
            if name_index.insert(n.clone(), idx).is_some() {
                return Err(Error::InvalidFan(format!("duplicate curve name {n}")));
            }
        }

        let model = SurfaceModel {
            fan,
            resolved_rays,
            resolved_names,
            name_index,
            cones,
            original_positions,
        };
        model.verify_smooth()?;
        Ok(model)
    }

    fn verify_smooth(&self) -> Result<()> {
        let n = self.resolved_rays.len();
        let pairs = if self.fan.is_complete() { n } else { n - 1 };
        for i in 0..pairs {
            let d = det2(&self.resolved_rays[i], &self.resolved_rays[(i + 1) % n]);
            if !d.abs().is_one() {
                return Err(Error::Internal(format!(
                    "resolved cone at position {i} has determinant {d}"
                )));
            }
        }
        Ok(())
    }

    pub fn fan(&self) -> &Fan2 {
        &self.fan
    }

    pub fn cones(&self) -> &[ConeResolution] {
        &self.cones
    }

    pub fn curve_names(&self) -> &[String] {
        &self.resolved_names
    }

    pub fn curve_name(&self, idx: usize) -> &str {
        &self.resolved_names[idx]
    }

    pub fn resolved_ray(&self, idx: usize) -> &Ray {
        &self.resolved_rays[idx]
    }

    pub fn curve_index(&self, name: &str) -> Result<usize> {
        self.name_index
            .get(name)
            .copied()
            .ok_or_else(|| Error::UnknownCurve(name.to_string()))
    }

    /// Resolved-ray index of the `i`-th original fan ray.
    pub fn original_position(&self, i: usize) -> usize {
        self.original_positions[i]
    }

    fn is_boundary(&self, idx: usize) -> bool {
        !self.fan.is_complete() && (idx == 0 || idx + 1 == self.resolved_rays.len())
    }

    fn neighbors(&self, idx: usize) -> (Option<usize>, Option<usize>) {
        let n = self.resolved_rays.len();
        if self.fan.is_complete() {
            (Some((idx + n - 1) % n), Some((idx + 1) % n))
        } else {
            let left = if idx == 0 { None } else { Some(idx - 1) };
            let right = if idx + 1 == n { None } else { Some(idx + 1) };
            (left, right)
        }
    }

    /// Self-intersection of the curve of a resolved ray, from the smooth-fan
    /// relation `u_prev + u_next = b * u`. `None` for boundary rays of a
    /// non-complete fan (non-compact curves).
    pub fn self_intersection(&self, idx: usize) -> Option<Int> {
        let (l, r) = self.neighbors(idx);
        let (l, r) = (l?, r?);
        let u = &self.resolved_rays[idx];
        let sum = Ray {
            x: &self.resolved_rays[l].x + &self.resolved_rays[r].x,
            y: &self.resolved_rays[l].y + &self.resolved_rays[r].y,
        };
        let b = if !u.x.is_zero() {
            let (q, rem) = sum.x.div_rem(&u.x);
            debug_assert!(rem.is_zero() && &q * &u.y == sum.y, "fan relation failed");
            q
        } else {
            let (q, rem) = sum.y.div_rem(&u.y);
            debug_assert!(rem.is_zero(), "fan relation failed");
            q
        };
        Some(-b)
    }

    fn adjacent(&self, i: usize, j: usize) -> bool {
        let (l, r) = self.neighbors(i);
        l == Some(j) || r == Some(j)
    }

    pub fn is_compact_curve(&self, name: &str) -> Result<bool> {
        Ok(!self.is_boundary(self.curve_index(name)?))
    }

    /// Dense coefficient vector of a divisor over the resolved rays.
    fn dense(&self, d: &QDivisor) -> Result<Vec<Rat>> {
        let mut v = vec![Rat::zero(); self.resolved_rays.len()];
        for (name, c) in d.coeffs() {
            v[self.curve_index(name)?] = c.clone();
        }
        Ok(v)
    }

    /// Numerical pullback to the resolution: the proper transform plus the
    /// unique rational exceptional correction orthogonal to every chain curve.
    pub fn pullback(&self, d: &QDivisor) -> Result<Vec<Rat>> {
        let mut v = self.dense(d)?;
        for cone in &self.cones {
            let r = cone.chain.len();
            if r == 0 {
                continue;
            }
            let mut mat = IMat::zero(r, r);
            for i in 0..r {
                mat[(i, i)] = -cone.b[i].clone();
                if i + 1 < r {
                    mat[(i, i + 1)] = Int::one();
                    mat[(i + 1, i)] = Int::one();
                }
            }
            let rhs: Vec<Rat> = (0..r)
                .map(|i| -self.pair_with_curve(&v, cone.chain[i]))
                .collect();
            let corr = solve_exact(&mat, &rhs).ok_or(Error::SingularMatrix)?;
            for (i, a) in corr.into_iter().enumerate() {
                v[cone.chain[i]] += a;
            }
        }
        Ok(v)
    }

    /// `(sum_i v_i D_i) . D_idx` on the smooth fan, for compact `D_idx`.
    fn pair_with_curve(&self, v: &[Rat], idx: usize) -> Rat {
        let mut acc = Rat::zero();
        if !v[idx].is_zero() {
            let s = self
                .self_intersection(idx)
                .expect("chain curves are compact");
            acc += &v[idx] * Rat::from_integer(s);
        }
        let (l, r) = self.neighbors(idx);
        for n in [l, r].into_iter().flatten() {
            if !v[n].is_zero() {
                acc += v[n].clone();
            }
        }
        acc
    }

    /// Smooth-fan intersection of two dense divisor vectors. Errors when a
    /// non-compact curve's self-intersection would be required.
    fn pair_dense(&self, x: &[Rat], y: &[Rat]) -> Result<Rat> {
        let n = self.resolved_rays.len();
        let mut acc = Rat::zero();
        for i in 0..n {
            if x[i].is_zero() && y[i].is_zero() {
                continue;
            }
            if !x[i].is_zero() && !y[i].is_zero() {
                match self.self_intersection(i) {
                    Some(s) => acc += &x[i] * &y[i] * Rat::from_integer(s),
                    None => {
                        return Err(Error::UndefinedPairing(format!(
                            "self-intersection of the non-compact curve {}",
                            self.resolved_names[i]
                        )))
                    }
                }
            }
            let (_, right) = self.neighbors(i);
            if let Some(j) = right {
                let cross = &x[i] * &y[j] + &x[j] * &y[i];
                acc += cross;
            }
        }
        Ok(acc)
    }

    /// Mumford's rational intersection number of two divisor classes.
    pub fn mumford_intersect(&self, d1: &QDivisor, d2: &QDivisor) -> Result<Rat> {
        let p1 = self.pullback(d1)?;
        let p2 = self.pullback(d2)?;
        self.pair_dense(&p1, &p2)
    }

    /// The canonical class on the resolution: minus the sum of all ray
    /// divisors. Pulling it back recovers the canonical class of the
    /// singular surface (log discrepancies are restored by the orthogonal
    /// correction).
    pub fn canonical_class(&self) -> QDivisor {
        QDivisor::from_coeffs(
            self.resolved_names
                .iter()
                .map(|n| (n.clone(), -Rat::one())),
        )
    }

    /// Integer intersection table of a set of named compact curves on the
    /// resolution.
    pub fn intersection_table(&self, curves: &[String]) -> Result<IntersectionMatrix> {
        let idx: Vec<usize> = curves
            .iter()
            .map(|n| self.curve_index(n))
            .collect::<Result<_>>()?;
        for (&i, name) in idx.iter().zip(curves) {
            if self.is_boundary(i) {
                return Err(Error::UndefinedPairing(format!(
                    "curve {name} is not compact"
                )));
            }
        }
        let r = idx.len();
        let mut mat = IMat::zero(r, r);
        for a in 0..r {
            mat[(a, a)] = self.self_intersection(idx[a]).expect("compact curve");
            for b in a + 1..r {
                if self.adjacent(idx[a], idx[b]) {
                    mat[(a, b)] = Int::one();
                    mat[(b, a)] = Int::one();
                }
            }
        }
        IntersectionMatrix::symmetric(mat, curves.to_vec())
    }

    /// Intersection numbers of the proper transform of `d` with the chain
    /// curves of one cone: the input of the cycle map at that singular point.
    pub fn incidence_vector(&self, cone: usize, d: &QDivisor) -> Result<Vec<Int>> {
        let chain = self.cones[cone].chain.clone();
        self.incidence_with_curves(&chain, d)
    }

    /// Integer intersection numbers of the proper transform of `d` with an
    /// arbitrary list of compact curves.
    pub fn incidence_with_curves(&self, curves: &[usize], d: &QDivisor) -> Result<Vec<Int>> {
        let v = self.dense(d)?;
        curves
            .iter()
            .map(|&e| {
                let val = self.pair_with_curve(&v, e);
                if val.denom().is_one() {
                    Ok(val.to_integer())
                } else {
                    Err(Error::NonIntegralDivisor(format!(
                        "intersection with {} is {}",
                        self.resolved_names[e], val
                    )))
                }
            })
            .collect()
    }

    /// Link homology presentation of one cone's singular point.
    pub fn cone_link_group(&self, cone: usize) -> Result<LinkGroup> {
        link_group(&IntersectionMatrix::chain_of_selfints(&self.cones[cone].b))
    }

    /// The divisor cycle map at one singular point.
    pub fn cone_gamma(&self, cone: usize, d: &QDivisor) -> Result<GammaValue> {
        let g = self.cone_link_group(cone)?;
        gamma(&self.incidence_vector(cone, d)?, &g)
    }

    /// Resolved-ray indices strictly between two original rays, walking in
    /// the listed direction (wrapping only on complete fans).
    pub fn span_between(&self, from: &str, to: &str) -> Result<Vec<usize>> {
        let a = self.curve_index(from)?;
        let b = self.curve_index(to)?;
        let n = self.resolved_rays.len();
        let mut out = Vec::new();
        let mut i = (a + 1) % n;
        while i != b {
            if !self.fan.is_complete() && i == 0 {
                return Err(Error::InvalidFan(format!(
                    "no span from {from} to {to} in a non-complete fan"
                )));
            }
            out.push(i);
            i = (i + 1) % n;
            if out.len() > n {
                return Err(Error::Internal("span walk did not terminate".into()));
            }
        }
        Ok(out)
    }
}

impl IntersectionForm for SurfaceModel {
    fn pair(&self, a: &QDivisor, b: &QDivisor) -> Result<Rat> {
        self.mumford_intersect(a, b)
    }
}
