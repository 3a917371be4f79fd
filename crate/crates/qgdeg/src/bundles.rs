//! The Chern-class / Riemann-Roch ledger for blocks of exceptional bundles
//! attached to an M-resolved class-T point: specialized first Chern classes,
//! second Chern classes forced by `chi(F,F) = 1`, the chi-orthogonality
//! matrix, stability residues, and the hypothesis checks of the lifting
//! criterion.

use crate::arith::{is_integer, Int, Rat};
use crate::error::{Error, Result};
use crate::hjfrac::TDecomposition;
use crate::link::{alpha_coefficients, inverse_mod, lifts_to_general_fiber, GammaValue};
use crate::toric::{cone_normal_form, IntersectionForm, QDivisor, SurfaceModel};
use crate::hjfrac;
use num::{Integer, One, Signed, Zero};
use std::collections::BTreeMap;

/// Chern data of one bundle: rank `n`, the specialized first Chern class on
/// the central surface, and the exact rational second Chern class.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BundleLedger {
    pub rank: Int,
    pub c1: QDivisor,
    pub c2: Rat,
}

impl BundleLedger {
    pub fn new(rank: Int, c1: QDivisor, c2: Rat) -> Result<Self> {
        if !rank.is_positive() {
            return Err(Error::OutOfRange(format!("rank {rank} must be positive")));
        }
        Ok(BundleLedger { rank, c1, c2 })
    }

    /// Dual convention: `c1` negated, `c2` unchanged, rank unchanged.
    pub fn dual(&self) -> BundleLedger {
        BundleLedger {
            rank: self.rank.clone(),
            c1: self.c1.scale(&-Rat::one()),
            c2: self.c2.clone(),
        }
    }
}

/// Numerical data of the ambient surface used by Riemann-Roch: `chi(O)` (one
/// for all surfaces in range: `H^1(O) = H^2(O) = 0`), the canonical class,
/// and the intersection pairing.
pub struct SurfaceNumerics<'a> {
    pub chi_o: Rat,
    pub canonical: QDivisor,
    pub form: &'a dyn IntersectionForm,
}

impl<'a> SurfaceNumerics<'a> {
    pub fn for_model(model: &'a SurfaceModel) -> Self {
        SurfaceNumerics {
            chi_o: Rat::one(),
            canonical: model.canonical_class(),
            form: model,
        }
    }

    pub fn with_form(canonical: QDivisor, form: &'a dyn IntersectionForm) -> Self {
        SurfaceNumerics {
            chi_o: Rat::one(),
            canonical,
            form,
        }
    }
}

/// A synthetic bilinear pairing given by an explicit symmetric table on named
/// classes. Pairs absent from the table are errors, so a computation that
/// should not depend on a value cannot silently consume it.
#[derive(Debug, Clone, Default)]
pub struct FormalForm {
    table: BTreeMap<(String, String), Rat>,
}

impl FormalForm {
    pub fn new() -> Self {
        FormalForm::default()
    }

    pub fn set(&mut self, a: &str, b: &str, value: Rat) {
        let key = if a <= b { (a.into(), b.into()) } else { (b.into(), a.into()) };
        self.table.insert(key, value);
    }

    fn get(&self, a: &str, b: &str) -> Result<&Rat> {
        let key = if a <= b {
            (a.to_string(), b.to_string())
        } else {
            (b.to_string(), a.to_string())
        };
        self.table
            .get(&key)
            .ok_or_else(|| Error::UndefinedPairing(format!("({a}.{b}) not in table")))
    }
}

impl IntersectionForm for FormalForm {
    fn pair(&self, a: &QDivisor, b: &QDivisor) -> Result<Rat> {
        let mut acc = Rat::zero();
        for (na, ca) in a.coeffs() {
            for (nb, cb) in b.coeffs() {
                acc += ca * cb * self.get(na, nb)?.clone();
            }
        }
        Ok(acc)
    }
}

/// Second Chern class of an exceptional bundle of rank `n` with `c1^2` given:
/// the unique value making `chi(F, F) = 1` under the Riemann-Roch and tensor
/// formulas of this module, namely `(n-1)(c1^2 + n + 1) / (2n)`.
pub fn c2_exceptional(n: &Int, c1sq: &Rat) -> Rat {
    let n_rat = Rat::from_integer(n.clone());
    (&n_rat - Rat::one()) * (c1sq + &n_rat + Rat::one()) / (Rat::from_integer(2 * n))
}

/// Comparison-only variant with the constant `n^2 + 1` in place of `n + 1`;
/// it does not satisfy `chi(F, F) = 1` for `n > 1`.
pub fn c2_exceptional_printed(n: &Int, c1sq: &Rat) -> Rat {
    let n_rat = Rat::from_integer(n.clone());
    (&n_rat - Rat::one()) * (c1sq + &n_rat * &n_rat + Rat::one()) / (Rat::from_integer(2 * n))
}

/// Splitting-principle second Chern class of a tensor product of bundles of
/// ranks `e`, `g`:
/// `c2(E (x) G) = g(g-1)/2 c1(E)^2 + (eg-1) c1(E).c1(G) + e(e-1)/2 c1(G)^2
///              + g c2(E) + e c2(G)`.
#[allow(clippy::too_many_arguments)]
pub fn c2_tensor(
    e: &Int,
    c1e_sq: &Rat,
    c2e: &Rat,
    g: &Int,
    c1g_sq: &Rat,
    c2g: &Rat,
    c1e_dot_c1g: &Rat,
) -> Rat {
    let e = Rat::from_integer(e.clone());
    let g = Rat::from_integer(g.clone());
    let half = |x: Rat| x / Rat::from_integer(Int::from(2));
    half(&g * (&g - Rat::one())) * c1e_sq
        + (&e * &g - Rat::one()) * c1e_dot_c1g
        + half(&e * (&e - Rat::one())) * c1g_sq
        + &g * c2e
        + &e * c2g
}

/// Euler pairing `chi(a, b) = rk(a) rk(b) chi(O) + (C1^2 - K.C1)/2 - C2` of
/// the tensor ledger `a^v (x) b`, whose Chern data is assembled from the two
/// inputs (dual: `c1` negated, `c2` unchanged).
pub fn rr_chi(a: &BundleLedger, b: &BundleLedger, s: &SurfaceNumerics) -> Result<Rat> {
    let c1t = b.c1.scale_int(&a.rank).sub(&a.c1.scale_int(&b.rank));
    let c1t_sq = s.form.pair(&c1t, &c1t)?;
    let k_c1t = s.form.pair(&s.canonical, &c1t)?;
    let c1a_sq = s.form.pair(&a.c1, &a.c1)?;
    let c1b_sq = s.form.pair(&b.c1, &b.c1)?;
    let cross = -s.form.pair(&a.c1, &b.c1)?;
    let c2t = c2_tensor(&a.rank, &c1a_sq, &a.c2, &b.rank, &c1b_sq, &b.c2, &cross);
    let two = Rat::from_integer(Int::from(2));
    Ok(Rat::from_integer(&a.rank * &b.rank) * &s.chi_o + (c1t_sq - k_c1t) / two - c2t)
}

/// Matrix of Euler pairings; entries are asserted integral. The orthogonal
/// collection certificate is this matrix being the identity.
pub fn chi_matrix(ledgers: &[BundleLedger], s: &SurfaceNumerics) -> Result<Vec<Vec<Int>>> {
    ledgers
        .iter()
        .map(|a| {
            ledgers
                .iter()
                .map(|b| {
                    let chi = rr_chi(a, b, s)?;
                    if is_integer(&chi) {
                        Ok(chi.to_integer())
                    } else {
                        Err(Error::NonIntegralChi(format!(
                            "chi = {chi} for ranks {} and {}",
                            a.rank, b.rank
                        )))
                    }
                })
                .collect()
        })
        .collect()
}

pub fn is_identity_matrix(m: &[Vec<Int>]) -> bool {
    m.iter().enumerate().all(|(i, row)| {
        row.iter()
            .enumerate()
            .all(|(j, v)| if i == j { v.is_one() } else { v.is_zero() })
    })
}

/// Bezout chart generators for the weight-`(1, na-1, a, n)` hypersurface:
/// the pair `(p, q)` with `p a + q n = 1`, canonicalized to `0 <= p < n`.
pub fn ow_generators(n: &Int, a: &Int) -> Result<(Int, Int)> {
    let p = inverse_mod(a, n)?;
    let q = (Int::one() - &p * a) / n;
    debug_assert!((&p * a + &q * n).is_one());
    Ok((p, q))
}

/// A class-T point of the original surface, described on the M-resolved
/// model: the run of Wahl cones lying over it, the interior curves
/// `A_1..A_{d-1}`, and the boundary ray names.
#[derive(Debug, Clone)]
pub struct BlockSite {
    pub t: TDecomposition,
    /// Model cone indices of the Wahl points, in chain order.
    pub wahl_cones: Vec<usize>,
    /// Names of the interior rays, `A_1..A_{d-1}`.
    pub a_curves: Vec<String>,
    pub v0_name: String,
    pub v1_name: String,
}

impl BlockSite {
    /// Assemble the site between two original rays of an M-resolved model.
    /// Every cone in the run must present the same Wahl singularity
    /// `1/n^2(1, na-1)` (all smooth in the `n = 1` case), and the outer cone
    /// must classify as `(d n^2, d n a - 1)`.
    pub fn between(model: &SurfaceModel, v0_name: &str, v1_name: &str) -> Result<Self> {
        let fan = model.fan();
        let find = |name: &str| {
            fan.names()
                .iter()
                .position(|n| n == name)
                .ok_or_else(|| Error::UnknownCurve(name.to_string()))
        };
        let i0 = find(v0_name)?;
        let i1 = find(v1_name)?;
        let ray_count = fan.ray_count();

        let mut wahl_cones = Vec::new();
        let mut a_curves = Vec::new();
        let mut i = i0;
        loop {
            if !fan.is_complete() && i + 1 >= ray_count {
                return Err(Error::InvalidFan(format!(
                    "no cone run from {v0_name} to {v1_name}"
                )));
            }
            wahl_cones.push(i);
            let j = (i + 1) % ray_count;
            if j == i1 {
                break;
            }
            a_curves.push(fan.names()[j].clone());
            i = j;
            if wahl_cones.len() > ray_count {
                return Err(Error::Internal("cone walk did not terminate".into()));
            }
        }

        // uniform Wahl data across the run
        let mut na: Option<(Int, Int)> = None;
        for &c in &wahl_cones {
            let cone = &model.cones()[c];
            if cone.singularity.is_smooth() {
                match &na {
                    None => na = Some((Int::one(), Int::one())),
                    Some((n, _)) if n.is_one() => {}
                    Some(_) => {
                        return Err(Error::NotClassT(format!(
                            "cone {c} is smooth but the run is not of multiplicity one"
                        )))
                    }
                }
                continue;
            }
            let t = cone
                .t
                .as_ref()
                .filter(|t| t.d().is_one())
                .ok_or_else(|| {
                    Error::NotClassT(format!("cone {c} is {} (not Wahl)", cone.singularity))
                })?;
            match &na {
                None => na = Some((t.n().clone(), t.a().clone())),
                Some((n, a)) if n == t.n() && a == t.a() => {}
                Some(_) => {
                    return Err(Error::NotClassT(format!(
                        "cone {c} has mismatched Wahl data {}",
                        cone.singularity
                    )))
                }
            }
        }
        let (n, a) = na.expect("at least one cone in the run");
        let d = Int::from(wahl_cones.len());
        let t = TDecomposition::new(d, n, a)?;

        // the outer cone presents the full class-T singularity
        let p0 = model.original_position(i0);
        let p1 = model.original_position(i1);
        let (m_big, q_big, _) =
            cone_normal_form(model.resolved_ray(p0), model.resolved_ray(p1))?;
        if m_big != t.m() || q_big != t.q() {
            return Err(Error::NotClassT(format!(
                "outer cone from {v0_name} to {v1_name} is 1/{m_big}(1,{q_big}), expected {t}"
            )));
        }

        Ok(BlockSite {
            t,
            wahl_cones,
            a_curves,
            v0_name: v0_name.to_string(),
            v1_name: v1_name.to_string(),
        })
    }

    pub fn d(&self) -> usize {
        self.wahl_cones.len()
    }

    /// `D_0 + A_1 + ... + A_{k-1}` for `1 <= k <= d`.
    pub fn block_divisor(&self, d0: &QDivisor, k: usize) -> QDivisor {
        let mut acc = d0.clone();
        for name in self.a_curves.iter().take(k.saturating_sub(1)) {
            acc = acc.add(&QDivisor::of_curve(name));
        }
        acc
    }
}

/// The outcome of normalizing a divisor at a block site.
#[derive(Debug, Clone)]
pub struct Normalization {
    /// Multiplier `m`: the inverse of the link residue mod `n^2`.
    pub multiplier: Int,
    /// Integer coefficients of the interior curves `A_1..A_{d-1}`.
    pub adjustments: Vec<Int>,
    /// `m D + sum_k a_k A_k`, with cycle map `(alpha_11, 0, ..., 0)`.
    pub d0: QDivisor,
    /// Residue of the input divisor in the link of the undivided point.
    pub big_residue: Int,
    /// Order `d n^2` of that link group.
    pub big_order: Int,
}

/// Normalize a divisor at a class-T site: find the multiplier `m` (inverse of
/// the generator residue mod `n^2`) and interior-curve corrections such that
/// the cycle map of `m D + sum a_k A_k` is the first chain generator at the
/// first Wahl point and zero at the others.
///
/// Fails with [`Error::NotAGenerator`] when the divisor's class does not
/// generate the mod-`n^2` quotient of the link of the undivided point.
pub fn normalize_divisor(
    model: &SurfaceModel,
    site: &BlockSite,
    d: &QDivisor,
) -> Result<Normalization> {
    if !d.is_integral() {
        return Err(Error::NonIntegralDivisor(format!("{d}")));
    }
    let n = site.t.n().clone();
    let nsq = &n * &n;
    let d_count = site.d();

    // the link of the undivided point, presented on the composite chain
    let span = model.span_between(&site.v0_name, &site.v1_name)?;
    let b_big: Vec<Int> = span
        .iter()
        .map(|&i| {
            model
                .self_intersection(i)
                .map(|s| -s)
                .ok_or_else(|| Error::Internal("span curve is not compact".into()))
        })
        .collect::<Result<_>>()?;
    let alphas = alpha_coefficients(&b_big);
    let big_order = hjfrac::tridiag_det(&b_big);
    if big_order != site.t.m() {
        return Err(Error::Internal(format!(
            "composite chain has determinant {big_order}, expected {}",
            site.t.m()
        )));
    }
    let incidence = model.incidence_with_curves(&span, d)?;
    let big_residue = incidence
        .iter()
        .zip(&alphas)
        .fold(Int::zero(), |acc, (k, alpha)| acc + k * alpha)
        .mod_floor(&big_order);

    let multiplier = if nsq.is_one() {
        Int::one()
    } else {
        inverse_mod(&big_residue.mod_floor(&nsq), &nsq).map_err(|_| {
            Error::NotAGenerator(format!(
                "residue {big_residue} mod {big_order} reduces to {} mod {nsq}",
                big_residue.mod_floor(&nsq)
            ))
        })?
    };

    // per-Wahl-point residues of D, alpha_1-normalized
    let residues: Vec<Int> = site
        .wahl_cones
        .iter()
        .map(|&c| Ok(model.cone_gamma(c, d)?.cyclic_residue()))
        .collect::<Result<_>>()?;

    let adjustments = if nsq.is_one() {
        vec![Int::zero(); d_count - 1]
    } else {
        // alpha_r of each Wahl chain, and its inverse
        let alpha_last = alpha_coefficients(&model.cones()[site.wahl_cones[0]].b)
            .last()
            .cloned()
            .expect("Wahl chain is nonempty");
        let alpha_last_inv = inverse_mod(&alpha_last.mod_floor(&nsq), &nsq)
            .map_err(|_| Error::Internal("alpha_r must be a unit".into()))?;
        let mut adj = Vec::with_capacity(d_count.saturating_sub(1));
        let mut prev = Int::zero();
        for (i, residue) in residues.iter().enumerate() {
            let target = if i == 0 { Int::one() } else { Int::zero() };
            let lhs = (&multiplier * residue + &prev).mod_floor(&nsq);
            if i + 1 == d_count {
                if lhs != target.mod_floor(&nsq) {
                    return Err(Error::Internal(format!(
                        "chain equations are inconsistent at the last Wahl point: \
                         {lhs} != {target} mod {nsq}"
                    )));
                }
                break;
            }
            let a_i = ((target - lhs) * &alpha_last_inv).mod_floor(&nsq);
            prev = a_i.clone();
            adj.push(a_i);
        }
        adj
    };

    let mut d0 = d.scale_int(&multiplier);
    for (name, a) in site.a_curves.iter().zip(&adjustments) {
        d0 = d0.add(&QDivisor::of_curve(name).scale_int(a));
    }

    // the normalized class hits (alpha_11, 0, ..., 0) on the nose
    for (i, &c) in site.wahl_cones.iter().enumerate() {
        let got = model.cone_gamma(c, &d0)?.cyclic_residue();
        let want = if i == 0 {
            Int::one().mod_floor(&nsq)
        } else {
            Int::zero()
        };
        if got != want {
            return Err(Error::Internal(format!(
                "normalized divisor has residue {got} at Wahl point {}, expected {want}",
                i + 1
            )));
        }
    }

    Ok(Normalization {
        multiplier,
        adjustments,
        d0,
        big_residue,
        big_order,
    })
}

/// Cycle-map tuples of the block divisors `D_k = D_0 + A_1 + ... + A_k`,
/// `k = 0..d-1`, over the site's Wahl points. Components `1..k` must be
/// divisible by `n` (they lift to the general fiber) and component `k+1`
/// must be the chain generator itself; violations signal an upstream
/// normalization bug.
pub fn gamma_of_block_divisors(
    model: &SurfaceModel,
    site: &BlockSite,
    d0: &QDivisor,
) -> Result<Vec<Vec<GammaValue>>> {
    let n = site.t.n();
    let mut out = Vec::with_capacity(site.d());
    for k in 0..site.d() {
        let dk = site.block_divisor(d0, k + 1);
        let tuple: Vec<GammaValue> = site
            .wahl_cones
            .iter()
            .map(|&c| model.cone_gamma(c, &dk))
            .collect::<Result<_>>()?;
        for (i, v) in tuple.iter().enumerate() {
            if i < k {
                if !lifts_to_general_fiber(v, n) {
                    return Err(Error::Internal(format!(
                        "component {} of gamma(D_{k}) = {v} is not divisible by {n}",
                        i + 1
                    )));
                }
            } else if i == k {
                if !n.is_one() && v.cyclic_residue() != Int::one() {
                    return Err(Error::Internal(format!(
                        "component {} of gamma(D_{k}) = {v} is not the chain generator",
                        i + 1
                    )));
                }
            } else if !v.is_zero() {
                return Err(Error::Internal(format!(
                    "component {} of gamma(D_{k}) = {v} should vanish",
                    i + 1
                )));
            }
        }
        out.push(tuple);
    }
    Ok(out)
}

/// Which second Chern class convention to use when building ledgers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum C2Convention {
    /// The value forced by `chi(F, F) = 1`.
    #[default]
    Consistent,
    /// The `n^2 + 1` constant, for comparison output only.
    Printed,
}

/// Ledgers of the block bundles: ledger `k` has rank `n`,
/// `c1 = n (D_0 + A_1 + ... + A_{k-1})`, and the `c2` of an exceptional
/// bundle. `d0` must already be normalized at the site.
pub fn make_block_ledgers(
    form: &dyn IntersectionForm,
    t: &TDecomposition,
    d0: &QDivisor,
    a_curves: &[String],
    convention: C2Convention,
) -> Result<Vec<BundleLedger>> {
    let d: usize = num::ToPrimitive::to_usize(t.d())
        .ok_or_else(|| Error::OutOfRange("block length does not fit an index".into()))?;
    if a_curves.len() + 1 != d {
        return Err(Error::LengthMismatch {
            expected: d - 1,
            got: a_curves.len(),
        });
    }
    let mut ledgers = Vec::with_capacity(d);
    let mut base = d0.clone();
    for k in 0..d {
        if k > 0 {
            base = base.add(&QDivisor::of_curve(&a_curves[k - 1]));
        }
        let c1 = base.scale_int(t.n());
        let c1sq = form.pair(&c1, &c1)?;
        let c2 = match convention {
            C2Convention::Consistent => c2_exceptional(t.n(), &c1sq),
            C2Convention::Printed => c2_exceptional_printed(t.n(), &c1sq),
        };
        ledgers.push(BundleLedger::new(t.n().clone(), c1, c2)?);
    }
    Ok(ledgers)
}

/// `(K . c1)` of a ledger reduced mod `n`. The full pairing must be an
/// integer, and the residue must be coprime to `n` for the stability
/// argument to apply; the residue is the same for every ledger of a block.
pub fn stability_residue(
    s: &SurfaceNumerics,
    ledger: &BundleLedger,
    t: &TDecomposition,
) -> Result<Int> {
    let v = s.form.pair(&s.canonical, &ledger.c1)?;
    if !is_integer(&v) {
        return Err(Error::NonIntegralChi(format!("(K.c1) = {v} is not an integer")));
    }
    let n = t.n();
    if n.is_one() {
        return Ok(Int::zero());
    }
    let r = v.to_integer().mod_floor(n);
    if !r.gcd(n).is_one() {
        return Err(Error::ResidueNotCoprime {
            residue: r.to_string(),
            n: n.to_string(),
        });
    }
    Ok(r)
}

/// Verdicts of the main-theorem conditions at one singular point.
#[derive(Debug, Clone)]
pub struct PointVerdict {
    pub cone: usize,
    pub v0_name: String,
    pub v1_name: String,
    pub singularity: crate::hjfrac::CyclicQuotient,
    pub t: Option<TDecomposition>,
    /// Residue of the cycle map in the cyclic link group.
    pub residue: Int,
    pub order: Int,
    /// Condition (1): the class generates the mod-`n^2` quotient of the link.
    /// Defined for class-T points.
    pub generates: Option<bool>,
    /// Condition (2): the class is divisible by `n`. Defined for Wahl points.
    pub lifts: Option<bool>,
    /// Condition (3): the class vanishes.
    pub vanishes: bool,
}

/// Per-point verdicts for a divisor on a surface model.
#[derive(Debug, Clone)]
pub struct HypothesisReport {
    pub points: Vec<PointVerdict>,
}

impl HypothesisReport {
    /// Points at which condition (1) holds while every other singular point
    /// satisfies (2) (Wahl) or (3).
    pub fn viable_targets(&self) -> Vec<usize> {
        (0..self.points.len())
            .filter(|&i| {
                self.points[i].generates == Some(true)
                    && self.points.iter().enumerate().all(|(j, p)| {
                        j == i || p.lifts == Some(true) || p.vanishes
                    })
            })
            .collect()
    }

    pub fn satisfied(&self) -> bool {
        !self.viable_targets().is_empty()
    }
}

/// Evaluate the cycle map of `d` at every singular point of the fan and
/// check each condition of the main construction.
pub fn check_main_hypotheses(model: &SurfaceModel, d: &QDivisor) -> Result<HypothesisReport> {
    let mut points = Vec::new();
    for (c, cone) in model.cones().iter().enumerate() {
        if cone.singularity.is_smooth() {
            continue;
        }
        let value = model.cone_gamma(c, d)?;
        let residue = value.cyclic_residue();
        let order = value.cyclic_modulus();
        let generates = cone.t.as_ref().map(|t| {
            let nsq = t.n() * t.n();
            residue.mod_floor(&nsq).gcd(t.n()).is_one()
        });
        let lifts = cone
            .t
            .as_ref()
            .filter(|t| t.d().is_one() && !t.n().is_one())
            .map(|t| residue.mod_floor(t.n()).is_zero());
        let (i, j) = model.fan().cone(c);
        points.push(PointVerdict {
            cone: c,
            v0_name: model.fan().names()[i].clone(),
            v1_name: model.fan().names()[j].clone(),
            singularity: cone.singularity.clone(),
            t: cone.t.clone(),
            residue,
            order,
            generates,
            lifts,
            vanishes: value.is_zero(),
        });
    }
    Ok(HypothesisReport { points })
}
