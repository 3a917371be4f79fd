//! Command implementations: file formats, report assembly, and the
//! end-to-end demonstration pipeline on the built-in degenerate cubic
//! surface fixture.
//!
//! Exit-code contract: `0` every assertion passed, `1` a mathematical
//! verdict was negative, `2` input or usage error.

use crate::arith::{Int, Rat};
use crate::bundles::{
    self, BlockSite, C2Convention, HypothesisReport, Normalization, PointVerdict,
    SurfaceNumerics,
};
use crate::error::Error;
use crate::hjfrac::{self, CyclicQuotient, TDecomposition};
use crate::link::alpha_coefficients;
use crate::markov::{self, MarkovEquation, MarkovTriple};
use crate::report::{int_val, ints_val, obj, rat_val};
use crate::toric::{classify_fan, m_resolution, Fan2, QDivisor, Ray, SurfaceModel};
use num::{Integer, One, Zero};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use std::collections::BTreeMap;
use std::path::Path;

/// A command outcome: the machine-readable report plus the overall verdict.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub report: Value,
    pub ok: bool,
}

impl Outcome {
    fn pass(report: Value) -> Self {
        Outcome { report, ok: true }
    }
}

/// Errors that terminate a command with exit code 2.
#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Io(String),
    Math(Error),
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "{m}"),
            CliError::Io(m) => write!(f, "{m}"),
            CliError::Math(e) => write!(f, "{e}"),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Math(e)
    }
}

pub type CmdResult = std::result::Result<Outcome, CliError>;

// ---------------------------------------------------------------------------
// file formats

/// Fan file: ordered ray list, optional parallel name list, completeness.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FanFile {
    pub rays: Vec<[i64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub names: Option<Vec<String>>,
    #[serde(default = "default_true")]
    pub complete: bool,
}

fn default_true() -> bool {
    true
}

impl FanFile {
    pub fn to_fan(&self) -> Result<Fan2, Error> {
        let rays = self
            .rays
            .iter()
            .map(|&[x, y]| Ray::new(x, y))
            .collect::<Vec<_>>();
        Fan2::new(rays, self.names.clone(), self.complete)
    }

    pub fn of_fan(fan: &Fan2) -> Result<FanFile, Error> {
        let rays = fan
            .rays()
            .iter()
            .map(|r| {
                let x = num::ToPrimitive::to_i64(&r.x);
                let y = num::ToPrimitive::to_i64(&r.y);
                match (x, y) {
                    (Some(x), Some(y)) => Ok([x, y]),
                    _ => Err(Error::OutOfRange(format!(
                        "ray {r} does not fit the fan file integer range"
                    ))),
                }
            })
            .collect::<Result<Vec<_>, Error>>()?;
        Ok(FanFile {
            rays,
            names: Some(fan.names().to_vec()),
            complete: fan.is_complete(),
        })
    }
}

pub fn parse_fan_file(text: &str, origin: &str) -> std::result::Result<Fan2, CliError> {
    let file: FanFile = serde_json::from_str(text)
        .map_err(|e| CliError::Usage(format!("{origin}: invalid fan file: {e}")))?;
    file.to_fan()
        .map_err(|e| CliError::Usage(format!("{origin}: {e}")))
}

pub fn load_fan(path: &Path) -> std::result::Result<Fan2, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    parse_fan_file(&text, &path.display().to_string())
}

/// Divisor file: a map from ray labels to integer or exact-rational
/// coefficients (`81` or `"81"` or `"3/4"`).
pub fn parse_divisor_file(
    text: &str,
    origin: &str,
    fan: &Fan2,
) -> std::result::Result<QDivisor, CliError> {
    let raw: BTreeMap<String, Value> = serde_json::from_str(text)
        .map_err(|e| CliError::Usage(format!("{origin}: invalid divisor file: {e}")))?;
    let mut coeffs = Vec::new();
    for (name, v) in raw {
        if !fan.names().contains(&name) {
            return Err(CliError::Usage(format!(
                "{origin}: label {name} does not name a ray of the fan"
            )));
        }
        let c = match &v {
            Value::Number(n) => n
                .as_i64()
                .map(|i| Rat::from_integer(Int::from(i)))
                .ok_or_else(|| {
                    CliError::Usage(format!(
                        "{origin}: coefficient of {name} must be an integer or \"p/q\" string"
                    ))
                })?,
            Value::String(s) => s.parse::<Rat>().map_err(|e| {
                CliError::Usage(format!("{origin}: coefficient of {name}: {e}"))
            })?,
            _ => {
                return Err(CliError::Usage(format!(
                    "{origin}: coefficient of {name} must be an integer or \"p/q\" string"
                )))
            }
        };
        coeffs.push((name, c));
    }
    Ok(QDivisor::from_coeffs(coeffs))
}

pub fn load_divisor(path: &Path, fan: &Fan2) -> std::result::Result<QDivisor, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    parse_divisor_file(&text, &path.display().to_string(), fan)
}

pub fn parse_int_arg(s: &str, what: &str) -> std::result::Result<Int, CliError> {
    s.parse::<Int>()
        .map_err(|_| CliError::Usage(format!("{what}: expected an integer, got {s:?}")))
}

pub fn parse_triple_arg(s: &str, what: &str) -> std::result::Result<[Int; 3], CliError> {
    let parts: Vec<&str> = s.split(',').collect();
    if parts.len() != 3 {
        return Err(CliError::Usage(format!(
            "{what}: expected three comma-separated integers, got {s:?}"
        )));
    }
    Ok([
        parse_int_arg(parts[0].trim(), what)?,
        parse_int_arg(parts[1].trim(), what)?,
        parse_int_arg(parts[2].trim(), what)?,
    ])
}

// ---------------------------------------------------------------------------
// report fragments

fn singularity_val(s: &CyclicQuotient) -> Value {
    json!(s.to_string())
}

fn tdec_val(t: &Option<TDecomposition>) -> Value {
    match t {
        None => Value::Null,
        Some(t) => obj(vec![
            ("d", int_val(t.d())),
            ("n", int_val(t.n())),
            ("a", int_val(t.a())),
        ]),
    }
}

fn divisor_val(d: &QDivisor) -> Value {
    Value::Object(
        d.coeffs()
            .iter()
            .map(|(k, v)| (k.clone(), rat_val(v)))
            .collect(),
    )
}

fn verdict_label(p: &PointVerdict) -> &'static str {
    if p.vanishes {
        "(3)"
    } else if p.generates == Some(true) {
        "(1)"
    } else if p.lifts == Some(true) {
        "(2)"
    } else {
        "none"
    }
}

fn verdict_rows(report: &HypothesisReport) -> Value {
    Value::Array(
        report
            .points
            .iter()
            .map(|p| {
                obj(vec![
                    ("point", json!(format!("P{}", p.cone + 1))),
                    ("cone", json!(format!("({},{})", p.v0_name, p.v1_name))),
                    ("singularity", singularity_val(&p.singularity)),
                    ("gamma", json!(format!("{} mod {}", p.residue, p.order))),
                    (
                        "generates",
                        p.generates.map(Value::Bool).unwrap_or(Value::Null),
                    ),
                    ("lifts", p.lifts.map(Value::Bool).unwrap_or(Value::Null)),
                    ("vanishes", json!(p.vanishes)),
                    ("condition", json!(verdict_label(p))),
                ])
            })
            .collect(),
    )
}

fn normalization_val(norm: &Normalization, site: &BlockSite) -> Value {
    obj(vec![
        ("multiplier", int_val(&norm.multiplier)),
        (
            "adjustments",
            Value::Object(
                site.a_curves
                    .iter()
                    .zip(&norm.adjustments)
                    .map(|(n, a)| (n.clone(), int_val(a)))
                    .collect(),
            ),
        ),
        ("d0", divisor_val(&norm.d0)),
        (
            "link_residue",
            json!(format!("{} mod {}", norm.big_residue, norm.big_order)),
        ),
    ])
}

// ---------------------------------------------------------------------------
// commands

pub fn cmd_hj(m: &Int, q: &Int) -> CmdResult {
    let s = CyclicQuotient::new(m.clone(), q.clone())?;
    let expansion = hjfrac::hj_expand(m, q)?;
    let (em, eq) = hjfrac::hj_evaluate(&expansion);
    debug_assert!(&em == s.m() && (&eq == s.q() || s.is_smooth()));
    let t = hjfrac::classify_class_t(&s);
    let alphas = alpha_coefficients(expansion.coeffs());
    let mut fields = vec![
        ("m", int_val(m)),
        ("q", int_val(q)),
        ("expansion", ints_val(expansion.coeffs())),
        ("alpha_coefficients", ints_val(&alphas)),
        ("class_t", tdec_val(&t)),
        ("wahl", json!(hjfrac::is_wahl(&s))),
    ];
    if let Some(t) = &t {
        let v = hjfrac::versal_family(t);
        let milnor = hjfrac::milnor_invariants(t);
        fields.push((
            "versal_family",
            obj(vec![
                ("monomial_exponents", ints_val(&v.monomial_exponents)),
                (
                    "action_weights",
                    ints_val([&v.action_weights.0, &v.action_weights.1, &v.action_weights.2]),
                ),
                ("action_order", int_val(&v.action_order)),
            ]),
        ));
        fields.push((
            "milnor_fiber",
            obj(vec![
                ("h2_rank", int_val(&milnor.h2_rank)),
                ("h1_torsion", int_val(&milnor.h1_torsion)),
            ]),
        ));
    }
    Ok(Outcome::pass(obj(fields)))
}

fn classify_rows(fan: &Fan2) -> std::result::Result<Value, Error> {
    let rows = classify_fan(fan)?
        .into_iter()
        .map(|c| {
            obj(vec![
                ("cone", json!(c.cone + 1)),
                ("rays", json!(format!("({},{})", c.v0_name, c.v1_name))),
                ("singularity", singularity_val(&c.singularity)),
                ("class_t", tdec_val(&c.t)),
                (
                    "wahl",
                    json!(c.t.as_ref().is_some_and(|t| t.d().is_one() && !t.n().is_one())),
                ),
            ])
        })
        .collect();
    Ok(Value::Array(rows))
}

pub fn cmd_classify(fan: &Fan2) -> CmdResult {
    Ok(Outcome::pass(obj(vec![
        ("ray_count", json!(fan.ray_count())),
        ("complete", json!(fan.is_complete())),
        ("cones", classify_rows(fan)?),
    ])))
}

pub fn cmd_mres(fan: &Fan2) -> CmdResult {
    let mres = m_resolution(fan)?;
    let mut flagged = Vec::new();
    let sites: Vec<Value> = mres
        .sites
        .iter()
        .map(|s| {
            if s.flagged {
                flagged.push(s.cone + 1);
            }
            obj(vec![
                ("cone", json!(s.cone + 1)),
                ("rays", json!(format!("({},{})", s.v0_name, s.v1_name))),
                ("singularity", singularity_val(&s.singularity)),
                ("class_t", tdec_val(&s.t)),
                (
                    "inserted",
                    Value::Array(
                        s.inserted
                            .iter()
                            .map(|(n, r)| json!(format!("{n} = {r}")))
                            .collect(),
                    ),
                ),
                ("flagged", json!(s.flagged)),
            ])
        })
        .collect();
    let fan_file = FanFile::of_fan(&mres.fan)?;
    let report = obj(vec![
        ("sites", Value::Array(sites)),
        ("flagged_cones", json!(flagged)),
        (
            "fan_file",
            serde_json::to_value(&fan_file).expect("fan file serializes"),
        ),
        ("resolved_cones", classify_rows(&mres.fan)?),
    ]);
    Ok(Outcome {
        ok: flagged.is_empty(),
        report,
    })
}

/// Hypothesis verdicts plus, for every class-T point where the divisor
/// generates the link quotient, the normalization data and the block
/// divisor cycle classes.
pub fn cmd_check(fan: &Fan2, divisor: &QDivisor) -> CmdResult {
    let model = SurfaceModel::new(fan.clone())?;
    let hypo = bundles::check_main_hypotheses(&model, divisor)?;

    let mres = m_resolution(fan)?;
    let resolved = SurfaceModel::new(mres.fan.clone())?;
    let mut normalizations = Vec::new();
    for site_info in &mres.sites {
        if site_info.t.is_none() {
            continue;
        }
        let site = BlockSite::between(&resolved, &site_info.v0_name, &site_info.v1_name)?;
        match bundles::normalize_divisor(&resolved, &site, divisor) {
            Err(Error::NotAGenerator(reason)) => {
                normalizations.push(obj(vec![
                    ("point", json!(format!("P{}", site_info.cone + 1))),
                    ("normalizable", json!(false)),
                    ("reason", json!(reason)),
                ]));
            }
            Err(e) => return Err(e.into()),
            Ok(norm) => {
                let gammas = bundles::gamma_of_block_divisors(&resolved, &site, &norm.d0)?;
                let gamma_rows: Vec<Value> = gammas
                    .iter()
                    .enumerate()
                    .map(|(k, tuple)| {
                        obj(vec![
                            ("divisor", json!(format!("D_{k}"))),
                            (
                                "gamma",
                                Value::Array(
                                    tuple.iter().map(|v| json!(v.to_string())).collect(),
                                ),
                            ),
                        ])
                    })
                    .collect();
                normalizations.push(obj(vec![
                    ("point", json!(format!("P{}", site_info.cone + 1))),
                    ("normalizable", json!(true)),
                    ("normalization", normalization_val(&norm, &site)),
                    ("block_gamma", Value::Array(gamma_rows)),
                ]));
            }
        }
    }

    let ok = hypo.satisfied();
    let report = obj(vec![
        ("divisor", divisor_val(divisor)),
        ("points", verdict_rows(&hypo)),
        (
            "viable_targets",
            json!(hypo
                .viable_targets()
                .iter()
                .map(|&i| format!("P{}", hypo.points[i].cone + 1))
                .collect::<Vec<_>>()),
        ),
        ("normalizations", Value::Array(normalizations)),
        ("hypotheses_satisfied", json!(ok)),
    ]);
    Ok(Outcome { ok, report })
}

fn chi_matrix_val(m: &[Vec<Int>]) -> Value {
    Value::Array(m.iter().map(ints_val).collect())
}

/// Block ledgers, the chi matrix, tensor-difference squares, and stability
/// residues at one class-T point of the input fan.
pub fn cmd_chi(fan: &Fan2, divisor: &QDivisor, point: usize, paper_c2: bool) -> CmdResult {
    if point == 0 || point > fan.cone_count() {
        return Err(CliError::Usage(format!(
            "--point {point} is out of range (fan has {} cones)",
            fan.cone_count()
        )));
    }
    let mres = m_resolution(fan)?;
    let site_info = &mres.sites[point - 1];
    let Some(t) = site_info.t.clone() else {
        return Err(CliError::Usage(format!(
            "cone {point} is {} (not of class T)",
            site_info.singularity
        )));
    };
    let resolved = SurfaceModel::new(mres.fan.clone())?;
    let site = BlockSite::between(&resolved, &site_info.v0_name, &site_info.v1_name)?;

    let norm = match bundles::normalize_divisor(&resolved, &site, divisor) {
        Ok(n) => n,
        Err(Error::NotAGenerator(reason)) => {
            return Ok(Outcome {
                ok: false,
                report: obj(vec![
                    ("point", json!(format!("P{point}"))),
                    ("class_t", tdec_val(&Some(t))),
                    ("normalizable", json!(false)),
                    ("reason", json!(reason)),
                ]),
            })
        }
        Err(e) => return Err(e.into()),
    };
    let gammas = bundles::gamma_of_block_divisors(&resolved, &site, &norm.d0)?;
    let ledgers = bundles::make_block_ledgers(
        &resolved,
        &site.t,
        &norm.d0,
        &site.a_curves,
        C2Convention::Consistent,
    )?;
    let numerics = SurfaceNumerics::for_model(&resolved);
    let matrix = bundles::chi_matrix(&ledgers, &numerics)?;
    let identity = bundles::is_identity_matrix(&matrix);

    let ledger_rows: Vec<Value> = ledgers
        .iter()
        .enumerate()
        .map(|(k, l)| {
            let c1sq = resolved.mumford_intersect(&l.c1, &l.c1)?;
            Ok(obj(vec![
                ("bundle", json!(format!("F{}", k + 1))),
                ("rank", int_val(&l.rank)),
                ("c1", json!(l.c1.to_string())),
                ("c1_sq", rat_val(&c1sq)),
                ("c2", rat_val(&l.c2)),
            ]))
        })
        .collect::<Result<_, Error>>()?;

    // squares of c1(F_k^v (x) F_l) for k < l; all should equal -2 n^2
    let mut diff_rows = Vec::new();
    let mut diffs_ok = true;
    let expected_diff = -Rat::from_integer(2 * t.n() * t.n());
    for k in 0..ledgers.len() {
        for l in k + 1..ledgers.len() {
            let c1t = ledgers[l]
                .c1
                .scale_int(&ledgers[k].rank)
                .sub(&ledgers[k].c1.scale_int(&ledgers[l].rank));
            let sq = resolved.mumford_intersect(&c1t, &c1t)?;
            diffs_ok &= sq == expected_diff;
            diff_rows.push(obj(vec![
                ("pair", json!(format!("(F{},F{})", k + 1, l + 1))),
                ("c1_tensor_sq", rat_val(&sq)),
            ]));
        }
    }

    let mut residues = Vec::new();
    let mut residue_err = None;
    for l in &ledgers {
        match bundles::stability_residue(&numerics, l, &site.t) {
            Ok(r) => residues.push(r),
            Err(e) => {
                residue_err = Some(e.to_string());
                break;
            }
        }
    }
    let residues_equal = residue_err.is_none() && residues.windows(2).all(|w| w[0] == w[1]);

    let mut fields = vec![
        ("point", json!(format!("P{point}"))),
        ("class_t", tdec_val(&Some(t.clone()))),
        ("normalization", normalization_val(&norm, &site)),
        (
            "block_gamma",
            Value::Array(
                gammas
                    .iter()
                    .enumerate()
                    .map(|(k, tuple)| {
                        obj(vec![
                            ("divisor", json!(format!("D_{k}"))),
                            (
                                "gamma",
                                Value::Array(
                                    tuple.iter().map(|v| json!(v.to_string())).collect(),
                                ),
                            ),
                        ])
                    })
                    .collect(),
            ),
        ),
        ("ledgers", Value::Array(ledger_rows)),
        ("chi_matrix", chi_matrix_val(&matrix)),
        ("chi_is_identity", json!(identity)),
        ("c1_tensor_differences", Value::Array(diff_rows)),
        ("c1_tensor_sq_expected", rat_val(&expected_diff)),
        ("stability_residues", ints_val(&residues)),
        ("stability_residues_equal", json!(residues_equal)),
        ("modulus_n", int_val(t.n())),
    ];
    if let Some(e) = &residue_err {
        fields.push(("stability_error", json!(e)));
    }
    if paper_c2 {
        // comparison only: the printed constant n^2 + 1 in place of n + 1
        let printed = bundles::make_block_ledgers(
            &resolved,
            &site.t,
            &norm.d0,
            &site.a_curves,
            C2Convention::Printed,
        )?;
        let rows: Vec<Value> = printed
            .iter()
            .map(|a| {
                let row: Vec<Value> = printed
                    .iter()
                    .map(|b| Ok(rat_val(&bundles::rr_chi(a, b, &numerics)?)))
                    .collect::<Result<_, Error>>()?;
                Ok(Value::Array(row))
            })
            .collect::<Result<_, Error>>()?;
        fields.push(("paper_c2_chi_matrix", Value::Array(rows)));
    }

    let ok = identity && diffs_ok && residues_equal && residue_err.is_none();
    Ok(Outcome {
        ok,
        report: obj(fields),
    })
}

fn equation_val(eq: &MarkovEquation) -> Value {
    obj(vec![
        ("equation", json!(eq.to_string())),
        ("multiplicities", ints_val(eq.multiplicities())),
        ("k_squared", int_val(eq.ksq())),
        ("lambda", int_val(eq.lambda())),
    ])
}

fn triple_val(t: &MarkovTriple) -> Value {
    ints_val(t.entries())
}

pub fn cmd_markov_verify(d: &[Int; 3], ksq: &Int, r: &[Int; 3]) -> CmdResult {
    let eq = match MarkovEquation::new(d[0].clone(), d[1].clone(), d[2].clone(), ksq.clone()) {
        Ok(eq) => eq,
        Err(e @ Error::NoIntegralLambda(_)) => {
            return Ok(Outcome {
                ok: false,
                report: obj(vec![("error", json!(e.to_string()))]),
            })
        }
        Err(e) => return Err(e.into()),
    };
    let t = MarkovTriple::new(r[0].clone(), r[1].clone(), r[2].clone())?;
    let ok = markov::verify(&eq, &t);
    Ok(Outcome {
        ok,
        report: obj(vec![
            ("equation", equation_val(&eq)),
            ("triple", triple_val(&t)),
            ("verifies", json!(ok)),
        ]),
    })
}

pub fn cmd_markov_mutate(d: &[Int; 3], ksq: &Int, r: &[Int; 3], index: usize) -> CmdResult {
    let eq = MarkovEquation::new(d[0].clone(), d[1].clone(), d[2].clone(), ksq.clone())?;
    let t = MarkovTriple::new(r[0].clone(), r[1].clone(), r[2].clone())?;
    match markov::mutate(&eq, &t, index) {
        Ok(out) => Ok(Outcome::pass(obj(vec![
            ("equation", equation_val(&eq)),
            ("triple", triple_val(&t)),
            ("index", json!(index)),
            ("mutated", triple_val(&out)),
        ]))),
        Err(Error::InvalidTriple(msg)) => Ok(Outcome {
            ok: false,
            report: obj(vec![
                ("equation", equation_val(&eq)),
                ("triple", triple_val(&t)),
                ("error", json!(msg)),
            ]),
        }),
        Err(e) => Err(e.into()),
    }
}

pub fn cmd_markov_enumerate(d: &[Int; 3], ksq: &Int, seed: &[Int; 3], bound: &Int) -> CmdResult {
    let eq = MarkovEquation::new(d[0].clone(), d[1].clone(), d[2].clone(), ksq.clone())?;
    let seed = MarkovTriple::new(seed[0].clone(), seed[1].clone(), seed[2].clone())?;
    match markov::enumerate_with_edges(&eq, &seed, bound) {
        Ok((sols, edges)) => Ok(Outcome::pass(obj(vec![
            ("equation", equation_val(&eq)),
            ("seed", triple_val(&seed)),
            ("bound", int_val(bound)),
            ("count", json!(sols.len())),
            (
                "solutions",
                Value::Array(sols.iter().map(triple_val).collect()),
            ),
            (
                "edges",
                Value::Array(
                    edges
                        .iter()
                        .map(|(a, i, b)| json!(format!("{a} -[{i}]-> {b}")))
                        .collect(),
                ),
            ),
        ]))),
        Err(Error::InvalidTriple(msg)) => Ok(Outcome {
            ok: false,
            report: obj(vec![
                ("equation", equation_val(&eq)),
                ("seed", triple_val(&seed)),
                ("error", json!(msg)),
            ]),
        }),
        Err(e) => Err(e.into()),
    }
}

// ---------------------------------------------------------------------------
// the demonstration pipeline

pub const DEMO_FAN: &str = include_str!("../fixtures/cubic_delpezzo_fan.json");
pub const DEMO_MRES_FAN: &str = include_str!("../fixtures/cubic_delpezzo_mres_fan.json");
pub const DEMO_DIVISOR: &str = include_str!("../fixtures/cubic_delpezzo_divisor.json");

struct DemoFail {
    step: String,
}

struct DemoCtx {
    sections: Vec<(&'static str, Value)>,
}

impl DemoCtx {
    fn ensure(&self, cond: bool, step: &str) -> std::result::Result<(), DemoFail> {
        if cond {
            Ok(())
        } else {
            Err(DemoFail { step: step.into() })
        }
    }
}

fn demo_inputs(
    fixtures: Option<&Path>,
) -> std::result::Result<(Fan2, Fan2, QDivisor), CliError> {
    let (fan_text, mres_text, div_text) = match fixtures {
        None => (
            DEMO_FAN.to_string(),
            DEMO_MRES_FAN.to_string(),
            DEMO_DIVISOR.to_string(),
        ),
        Some(dir) => {
            let read = |name: &str| {
                std::fs::read_to_string(dir.join(name))
                    .map_err(|e| CliError::Io(format!("{}: {e}", dir.join(name).display())))
            };
            (
                read("cubic_delpezzo_fan.json")?,
                read("cubic_delpezzo_mres_fan.json")?,
                read("cubic_delpezzo_divisor.json")?,
            )
        }
    };
    let fan = parse_fan_file(&fan_text, "fan fixture")?;
    let mres_fan = parse_fan_file(&mres_text, "resolved fan fixture")?;
    let divisor = parse_divisor_file(&div_text, "divisor fixture", &mres_fan)?;
    Ok((fan, mres_fan, divisor))
}

/// Run the full pipeline on the built-in data: classify, M-resolve,
/// re-classify, walk the divisor sequence through the hypothesis checks,
/// build the three blocks, verify orthogonality and stability residues,
/// compute `K^2`, and tie the block data to its Markov-type equation.
pub fn cmd_demo(fixtures: Option<&Path>) -> CmdResult {
    let (fan, mres_fan, d1) = demo_inputs(fixtures)?;
    let mut ctx = DemoCtx {
        sections: Vec::new(),
    };
    let status = demo_steps(&mut ctx, &fan, &mres_fan, &d1);
    let mut fields: Vec<(&str, Value)> = Vec::new();
    match &status {
        Ok(()) => fields.push(("status", json!("pass"))),
        Err(f) => {
            fields.push(("status", json!("fail")));
            fields.push(("failed_step", json!(f.step.clone())));
        }
    }
    for (k, v) in ctx.sections {
        fields.push((k, v));
    }
    Ok(Outcome {
        ok: status.is_ok(),
        report: obj(fields),
    })
}

fn demo_steps(
    ctx: &mut DemoCtx,
    fan: &Fan2,
    mres_fan: &Fan2,
    d1: &QDivisor,
) -> std::result::Result<(), DemoFail> {
    let fail = |step: &str| DemoFail { step: step.into() };
    let step = |e: Error, step: &str| DemoFail {
        step: format!("{step}: {e}"),
    };

    // 1. classify the unresolved fan
    let classes = classify_fan(fan).map_err(|e| step(e, "classify input fan"))?;
    let orders: Vec<Int> = classes.iter().map(|c| c.singularity.m().clone()).collect();
    ctx.sections.push((
        "input_fan",
        obj(vec![
            ("rays", json!(fan.ray_count())),
            (
                "cone_orders",
                ints_val(&orders),
            ),
            ("cones", classify_rows(fan).map_err(|e| step(e, "classify input fan"))?),
        ]),
    ));
    ctx.ensure(
        orders == vec![Int::from(4), Int::from(50), Int::from(486)],
        "cone orders (4, 50, 486)",
    )?;
    let expected_t = [(1i64, 2i64, 1i64), (2, 5, 1), (6, 9, 2)];
    for (c, (d, n, a)) in classes.iter().zip(expected_t) {
        let t = c.t.as_ref().ok_or_else(|| fail("class-T classification"))?;
        ctx.ensure(
            t.d() == &Int::from(d) && t.n() == &Int::from(n) && t.a() == &Int::from(a),
            "class-T decompositions (1,2,1), (2,5,1), (6,9,2)",
        )?;
    }

    // 2. M-resolution matches the shipped nine-ray fan
    let mres = m_resolution(fan).map_err(|e| step(e, "M-resolution"))?;
    ctx.ensure(
        mres.sites.iter().all(|s| !s.flagged),
        "every cone smooth or class T",
    )?;
    ctx.ensure(
        mres.fan.rays() == mres_fan.rays(),
        "M-resolved rays match the shipped nine-ray fan",
    )?;
    ctx.sections.push((
        "m_resolution",
        obj(vec![
            ("ray_count", json!(mres.fan.ray_count())),
            (
                "inserted",
                Value::Array(
                    mres.sites
                        .iter()
                        .flat_map(|s| {
                            s.inserted
                                .iter()
                                .map(|(n, r)| json!(format!("{n} = {r}")))
                        })
                        .collect(),
                ),
            ),
        ]),
    ));

    // 3. classification of the resolved surface
    let model = SurfaceModel::new(mres_fan.clone()).map_err(|e| step(e, "resolved model"))?;
    let z_classes = classify_fan(mres_fan).map_err(|e| step(e, "classify resolved fan"))?;
    let mut tally: BTreeMap<String, usize> = BTreeMap::new();
    for c in &z_classes {
        *tally.entry(c.singularity.to_string()).or_default() += 1;
    }
    ctx.sections.push((
        "resolved_fan",
        obj(vec![
            (
                "singularities",
                Value::Object(
                    tally
                        .iter()
                        .map(|(k, v)| (k.clone(), json!(v)))
                        .collect(),
                ),
            ),
            (
                "cones",
                classify_rows(mres_fan).map_err(|e| step(e, "classify resolved fan"))?,
            ),
        ]),
    ));
    ctx.ensure(
        tally.get("1/4(1,1)") == Some(&1)
            && tally.get("1/25(1,4)") == Some(&2)
            && tally.get("1/81(1,17)") == Some(&6),
        "resolved singularities 1x(4,1), 2x(25,4), 6x(81,17)",
    )?;

    // 4. the divisor sequence D_1..D_9 and its hypothesis pattern
    let names = mres_fan.names().to_vec();
    let mut divisors = vec![d1.clone()];
    for name in names.iter().skip(1) {
        let prev = divisors.last().expect("nonempty").clone();
        divisors.push(prev.add(&QDivisor::of_curve(name)));
    }
    let mut verdict_sections = Vec::new();
    for (k, dk) in divisors.iter().enumerate() {
        let report = bundles::check_main_hypotheses(&model, dk)
            .map_err(|e| step(e, "hypothesis check"))?;
        for p in &report.points {
            let expected = match p.cone.cmp(&k) {
                std::cmp::Ordering::Less => "(2)",
                std::cmp::Ordering::Equal => "(1)",
                std::cmp::Ordering::Greater => "(3)",
            };
            ctx.ensure(
                verdict_label(p) == expected,
                &format!(
                    "hypothesis pattern of D_{}: expected {expected} at P{}",
                    k + 1,
                    p.cone + 1
                ),
            )?;
        }
        verdict_sections.push(obj(vec![
            ("divisor", json!(format!("D_{}", k + 1))),
            ("points", verdict_rows(&report)),
        ]));
    }
    ctx.sections
        .push(("hypothesis_checks", Value::Array(verdict_sections)));

    // 5. the three blocks
    let block_defs = [
        ("rho1", "rho2", 0usize),
        ("rho2", "rho4", 1),
        ("rho4", "rho1", 3),
    ];
    let numerics = SurfaceNumerics::for_model(&model);
    let mut block_sections = Vec::new();
    let mut block_data = Vec::new();
    for (v0, v1, base_index) in block_defs {
        let site = BlockSite::between(&model, v0, v1)
            .map_err(|e| step(e, "block site construction"))?;
        let base = &divisors[base_index];
        let norm = bundles::normalize_divisor(&model, &site, base)
            .map_err(|e| step(e, "block normalization"))?;
        let gammas = bundles::gamma_of_block_divisors(&model, &site, &norm.d0)
            .map_err(|e| step(e, "block divisor cycle classes"))?;
        let ledgers = bundles::make_block_ledgers(
            &model,
            &site.t,
            &norm.d0,
            &site.a_curves,
            C2Convention::Consistent,
        )
        .map_err(|e| step(e, "block ledgers"))?;
        let matrix =
            bundles::chi_matrix(&ledgers, &numerics).map_err(|e| step(e, "chi matrix"))?;
        ctx.ensure(
            bundles::is_identity_matrix(&matrix),
            &format!("chi matrix of the block at ({v0},{v1}) is the identity"),
        )?;
        let n = site.t.n().clone();
        let expected_diff = -Rat::from_integer(2 * &n * &n);
        for k in 0..ledgers.len() {
            for l in k + 1..ledgers.len() {
                let c1t = ledgers[l]
                    .c1
                    .scale_int(&n)
                    .sub(&ledgers[k].c1.scale_int(&n));
                let sq = model
                    .mumford_intersect(&c1t, &c1t)
                    .map_err(|e| step(e, "tensor c1 squares"))?;
                ctx.ensure(sq == expected_diff, "tensor c1 squares equal -2n^2")?;
            }
        }
        let mut residues = Vec::new();
        for l in &ledgers {
            residues.push(
                bundles::stability_residue(&numerics, l, &site.t)
                    .map_err(|e| step(e, "stability residue"))?,
            );
        }
        let expected_residue = (-site.t.a().clone()).mod_floor(&n);
        ctx.ensure(
            residues.iter().all(|r| {
                n.is_one() && r.is_zero() || *r == expected_residue
            }),
            "stability residues equal -a mod n",
        )?;
        block_sections.push(obj(vec![
            ("site", json!(format!("({v0},{v1})"))),
            ("class_t", tdec_val(&Some(site.t.clone()))),
            ("base_divisor", json!(format!("D_{}", base_index + 1))),
            ("normalization", normalization_val(&norm, &site)),
            (
                "block_gamma",
                Value::Array(
                    gammas
                        .iter()
                        .enumerate()
                        .map(|(k, tuple)| {
                            obj(vec![
                                ("divisor", json!(format!("D_{k}"))),
                                (
                                    "gamma",
                                    Value::Array(
                                        tuple.iter().map(|v| json!(v.to_string())).collect(),
                                    ),
                                ),
                            ])
                        })
                        .collect(),
                ),
            ),
            ("chi_matrix", chi_matrix_val(&matrix)),
            ("stability_residues", ints_val(&residues)),
        ]));
        block_data.push((site.t.clone(), ledgers.len()));
    }
    ctx.sections.push(("blocks", Value::Array(block_sections)));

    // 6. K^2 on both models
    let x_model = SurfaceModel::new(fan.clone()).map_err(|e| step(e, "input model"))?;
    let k_res = model
        .mumford_intersect(&model.canonical_class(), &model.canonical_class())
        .map_err(|e| step(e, "K^2 on the resolved surface"))?;
    let k_input = x_model
        .mumford_intersect(&x_model.canonical_class(), &x_model.canonical_class())
        .map_err(|e| step(e, "K^2 on the input surface"))?;
    ctx.sections.push((
        "canonical",
        obj(vec![
            ("k_squared", rat_val(&k_res)),
            ("k_squared_input_fan", rat_val(&k_input)),
        ]),
    ));
    ctx.ensure(k_res == Rat::from_integer(Int::from(3)), "K^2 = 3")?;
    ctx.ensure(k_input == k_res, "K^2 agrees on both models")?;

    // 7. block structure and the Markov-type equation
    let ds: Vec<Int> = block_data.iter().map(|(t, _)| t.d().clone()).collect();
    let ranks: Vec<Int> = block_data.iter().map(|(t, _)| t.n().clone()).collect();
    let bundle_count: usize = block_data.iter().map(|(_, len)| len).sum();
    ctx.ensure(
        ds == vec![Int::one(), Int::from(2), Int::from(6)],
        "block sizes (1, 2, 6)",
    )?;
    ctx.ensure(
        ranks == vec![Int::from(2), Int::from(5), Int::from(9)],
        "ranks (2, 5, 9)",
    )?;
    ctx.ensure(bundle_count == 9, "nine bundles in total")?;

    let eq = MarkovEquation::new(
        ds[0].clone(),
        ds[1].clone(),
        ds[2].clone(),
        k_res.to_integer(),
    )
    .map_err(|e| step(e, "Markov-type equation"))?;
    ctx.ensure(eq.lambda() == &Int::from(6), "lambda = 6")?;
    let rank_triple = MarkovTriple::new(ranks[0].clone(), ranks[1].clone(), ranks[2].clone())
        .map_err(|e| step(e, "rank triple"))?;
    ctx.ensure(
        markov::verify(&eq, &rank_triple),
        "ranks satisfy the Markov-type equation",
    )?;
    let seed = MarkovTriple::new(Int::from(2), Int::one(), Int::one())
        .map_err(|e| step(e, "mutation seed"))?;
    let (sols, edges) = markov::enumerate_with_edges(&eq, &seed, &Int::from(9))
        .map_err(|e| step(e, "mutation chain"))?;
    ctx.ensure(
        sols.contains(&rank_triple),
        "mutation chain reaches (2, 5, 9)",
    )?;
    ctx.sections.push((
        "markov",
        obj(vec![
            ("equation", equation_val(&eq)),
            ("block_sizes", ints_val(&ds)),
            ("ranks", ints_val(&ranks)),
            ("bundle_count", json!(bundle_count)),
            (
                "solutions_up_to_9",
                Value::Array(sols.iter().map(triple_val).collect()),
            ),
            (
                "edges",
                Value::Array(
                    edges
                        .iter()
                        .map(|(a, i, b)| json!(format!("{a} -[{i}]-> {b}")))
                        .collect(),
                ),
            ),
            (
                "note",
                json!(
                    "bundle classes on the smooth fiber are pinned by rank and c1; \
                     this certificate covers rank and block data"
                ),
            ),
        ]),
    ));
    Ok(())
}
