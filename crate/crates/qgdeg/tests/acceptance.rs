//! Acceptance suite: one test per criterion, each printing a PASS/FAIL line
//! and enforcing its time budget. Run with
//! `cargo test --test acceptance -- --nocapture` to see the lines.

use num::{Integer, One, Signed, Zero};
use qgdeg::arith::{int, rat_int, Int, Rat};
use qgdeg::bundles::{
    self, BlockSite, C2Convention, FormalForm, SurfaceNumerics,
};
use qgdeg::cli;
use qgdeg::hjfrac::{self, TDecomposition};
use qgdeg::linalg::{smith_normal_form, IMat};
use qgdeg::link::{
    adjust_divisor, alpha_coefficients, gamma, gamma_invariance_check, link_group,
    IntersectionMatrix,
};
use qgdeg::markov::{self, MarkovEquation, MarkovTriple};
use qgdeg::toric::{m_resolve_cone, QDivisor, Ray, SurfaceModel};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::time::{Duration, Instant};

fn criterion(number: u32, name: &str, budget: Duration, body: impl FnOnce()) {
    let start = Instant::now();
    let outcome = std::panic::catch_unwind(std::panic::AssertUnwindSafe(body));
    let elapsed = start.elapsed();
    match outcome {
        Ok(()) if elapsed <= budget => {
            println!("acceptance {number}: PASS  {name}  ({elapsed:.2?})");
        }
        Ok(()) => {
            println!(
                "acceptance {number}: FAIL  {name}  (over budget: {elapsed:.2?} > {budget:.2?})"
            );
            panic!("criterion {number} exceeded its time budget");
        }
        Err(e) => {
            println!("acceptance {number}: FAIL  {name}  ({elapsed:.2?})");
            std::panic::resume_unwind(e);
        }
    }
}

/// Every valid class-T datum with `d <= dmax`, `n <= nmax`, skipping the
/// smooth `(1,1,1)` corner.
fn class_t_range(dmax: i64, nmax: i64) -> Vec<TDecomposition> {
    let mut out = Vec::new();
    for d in 1..=dmax {
        for n in 1..=nmax {
            for a in 1..=n {
                if d * n * n == 1 {
                    continue;
                }
                if let Ok(t) = TDecomposition::new(int(d), int(n), int(a)) {
                    out.push(t);
                }
            }
        }
    }
    out
}

#[test]
fn criterion_1_determinant_identities() {
    criterion(
        1,
        "continued-fraction determinant identities for m <= 200",
        Duration::from_secs(1),
        || {
            let mut checked = 0u32;
            for m in 2..=200i64 {
                for q in 1..m {
                    if !int(m).gcd(&int(q)).is_one() {
                        continue;
                    }
                    let e = hjfrac::hj_expand(&int(m), &int(q)).unwrap();
                    assert_eq!(hjfrac::hj_evaluate(&e), (int(m), int(q)), "({m},{q})");
                    assert_eq!(
                        hjfrac::tridiag_det(&e.coeffs()[1..]),
                        int(q),
                        "tail determinant of ({m},{q})"
                    );
                    checked += 1;
                }
            }
            assert!(checked > 12_000, "coprime pair census");
        },
    );
}

#[test]
fn criterion_2_link_group_orders() {
    criterion(
        2,
        "link groups of class-T chains are cyclic of order d n^2",
        Duration::from_secs(1),
        || {
            for t in class_t_range(4, 7) {
                let m = t.m();
                let q = t.q();
                let e = hjfrac::hj_expand(&m, &q).unwrap();
                let g = link_group(&IntersectionMatrix::chain(&e)).unwrap();
                assert!(g.is_cyclic(), "{t}");
                assert_eq!(g.order(), m, "{t}");
                let coeffs = alpha_coefficients(e.coeffs());
                for (j, c) in coeffs.iter().enumerate() {
                    assert_eq!(
                        g.generator(j).cyclic_residue(),
                        c.mod_floor(&m),
                        "{t} generator {j}"
                    );
                }
            }
        },
    );
}

/// Local germ of an M-resolved class-T point: boundary rays plus the
/// inserted Wahl rays, minimally resolved.
fn local_model(t: &TDecomposition) -> SurfaceModel {
    let v0 = Ray::new(0, 1);
    let v1 = Ray::new(t.m(), -t.q());
    let mut rays = vec![v0.clone()];
    rays.extend(m_resolve_cone(&v0, &v1).unwrap());
    rays.push(v1);
    SurfaceModel::new(qgdeg::toric::Fan2::new(rays, None, false).unwrap()).unwrap()
}

#[test]
fn criterion_3_local_intersection_numbers() {
    criterion(
        3,
        "M-resolution curves satisfy (A_i)^2 = -2/n^2, (A_i.A_{i+1}) = 1/n^2, (K.A_i) = 0",
        Duration::from_secs(1),
        || {
            for n in [2i64, 3, 5, 9] {
                for d in 2..=3i64 {
                    for a in 1..=n {
                        let Ok(t) = TDecomposition::new(int(d), int(n), int(a)) else {
                            continue;
                        };
                        let model = local_model(&t);
                        let names = model.fan().names();
                        let k = model.canonical_class();
                        let nsq = Rat::from_integer(int(n * n));
                        for i in 1..d as usize {
                            let ai = QDivisor::of_curve(&names[i]);
                            assert_eq!(
                                model.mumford_intersect(&ai, &ai).unwrap(),
                                rat_int(-2) / &nsq,
                                "(A_{i})^2 at {t}"
                            );
                            assert_eq!(
                                model.mumford_intersect(&k, &ai).unwrap(),
                                rat_int(0),
                                "(K.A_{i}) at {t}"
                            );
                            if i + 1 < d as usize {
                                let next = QDivisor::of_curve(&names[i + 1]);
                                assert_eq!(
                                    model.mumford_intersect(&ai, &next).unwrap(),
                                    rat_int(1) / &nsq,
                                    "(A.A') at {t}"
                                );
                            }
                        }
                    }
                }
            }
        },
    );
}

/// The demonstration surface: the M-resolved nine-ray fan, its model, and
/// the three block sites with their normalized base divisors.
fn demo_blocks() -> (SurfaceModel, Vec<(BlockSite, QDivisor)>) {
    let fan = cli::parse_fan_file(cli::DEMO_MRES_FAN, "fixture").unwrap();
    let model = SurfaceModel::new(fan).unwrap();
    let d1 = QDivisor::of_curve("rho1").scale_int(&int(81));
    let d2 = d1.add(&QDivisor::of_curve("rho2"));
    let d4 = d2
        .add(&QDivisor::of_curve("rho3"))
        .add(&QDivisor::of_curve("rho4"));
    let defs = [("rho1", "rho2", d1), ("rho2", "rho4", d2), ("rho4", "rho1", d4)];
    let mut blocks = Vec::new();
    for (v0, v1, base) in defs {
        let site = BlockSite::between(&model, v0, v1).unwrap();
        let norm = bundles::normalize_divisor(&model, &site, &base).unwrap();
        blocks.push((site, norm.d0));
    }
    (model, blocks)
}

#[test]
fn criterion_4_chi_matrix_orthogonality() {
    criterion(
        4,
        "chi matrices of the (1,2), (2,5), (6,9) blocks are identities",
        Duration::from_secs(1),
        || {
            let (model, blocks) = demo_blocks();
            let numerics = SurfaceNumerics::for_model(&model);
            let expected_dn: Vec<(Int, Int)> = vec![
                (int(1), int(2)),
                (int(2), int(5)),
                (int(6), int(9)),
            ];
            for ((site, d0), (d, n)) in blocks.iter().zip(expected_dn) {
                assert_eq!((site.t.d(), site.t.n()), (&d, &n));
                let ledgers = bundles::make_block_ledgers(
                    &model,
                    &site.t,
                    d0,
                    &site.a_curves,
                    C2Convention::Consistent,
                )
                .unwrap();
                let matrix = bundles::chi_matrix(&ledgers, &numerics).unwrap();
                assert!(bundles::is_identity_matrix(&matrix), "block {}", site.t);
                let expected_sq = -Rat::from_integer(2 * &n * &n);
                for k in 0..ledgers.len() {
                    for l in k + 1..ledgers.len() {
                        let c1t = ledgers[l]
                            .c1
                            .scale_int(&n)
                            .sub(&ledgers[k].c1.scale_int(&n));
                        assert_eq!(
                            model.mumford_intersect(&c1t, &c1t).unwrap(),
                            expected_sq,
                            "tensor c1 square of pair ({k},{l}) in block {}",
                            site.t
                        );
                    }
                }
            }
        },
    );
}

fn random_rat(rng: &mut ChaCha8Rng) -> Rat {
    let num = rng.gen_range(-90..=90i64);
    let den = rng.gen_range(1..=24i64);
    Rat::new(int(num), int(den))
}

/// Synthetic block pairing with arbitrary base values `u = D0^2` and
/// `v_i = D0.A_i`, alongside the forced local intersection numbers.
fn synthetic_block_form(d: usize, n: i64, u: Rat, v: &[Rat]) -> (FormalForm, Vec<String>) {
    let mut form = FormalForm::new();
    let names: Vec<String> = (1..d).map(|i| format!("A{i}")).collect();
    form.set("D0", "D0", u);
    form.set("K", "D0", rat_int(0));
    for (i, a) in names.iter().enumerate() {
        form.set("D0", a, v[i].clone());
        form.set("K", a, rat_int(0));
        form.set(a, a, Rat::new(int(-2), int(n * n)));
        for (j, b) in names.iter().enumerate().skip(i + 1) {
            let val = if j == i + 1 {
                Rat::new(int(1), int(n * n))
            } else {
                rat_int(0)
            };
            form.set(a, b, val);
        }
    }
    (form, names)
}

#[test]
fn criterion_5_symbolic_independence() {
    criterion(
        5,
        "off-diagonal chi vanishes for 100 random injections of D0^2 and D0.A",
        Duration::from_secs(5),
        || {
            let mut rng = ChaCha8Rng::seed_from_u64(5);
            for (d, n, a) in [(1i64, 2i64, 1i64), (2, 5, 1), (6, 9, 2)] {
                let t = TDecomposition::new(int(d), int(n), int(a)).unwrap();
                for _ in 0..100 {
                    let u = random_rat(&mut rng);
                    let v: Vec<Rat> =
                        (1..d).map(|_| random_rat(&mut rng)).collect();
                    let (form, names) = synthetic_block_form(d as usize, n, u, &v);
                    let ledgers = bundles::make_block_ledgers(
                        &form,
                        &t,
                        &QDivisor::of_curve("D0"),
                        &names,
                        C2Convention::Consistent,
                    )
                    .unwrap();
                    let numerics =
                        SurfaceNumerics::with_form(QDivisor::of_curve("K"), &form);
                    let matrix = bundles::chi_matrix(&ledgers, &numerics).unwrap();
                    assert!(
                        bundles::is_identity_matrix(&matrix),
                        "chi depends on the injected base values for (d,n) = ({d},{n})"
                    );
                }
            }
        },
    );
}

#[test]
fn criterion_6_stability_residues() {
    criterion(
        6,
        "every ledger of a block has the same residue -a mod n, coprime to n",
        Duration::from_secs(1),
        || {
            let (model, blocks) = demo_blocks();
            let numerics = SurfaceNumerics::for_model(&model);
            for (site, d0) in &blocks {
                let ledgers = bundles::make_block_ledgers(
                    &model,
                    &site.t,
                    d0,
                    &site.a_curves,
                    C2Convention::Consistent,
                )
                .unwrap();
                let expected = (-site.t.a().clone()).mod_floor(site.t.n());
                for ledger in &ledgers {
                    let r = bundles::stability_residue(&numerics, ledger, &site.t).unwrap();
                    assert_eq!(r, expected, "block {}", site.t);
                    assert!(r.gcd(site.t.n()).is_one());
                }
            }
        },
    );
}

#[test]
fn criterion_7_demo_pipeline() {
    criterion(
        7,
        "end-to-end pipeline on the degenerate cubic surface data",
        Duration::from_secs(5),
        || {
            let out = cli::cmd_demo(None).unwrap();
            assert!(out.ok, "demo failed at step {}", out.report["failed_step"]);
            let r = &out.report;
            assert_eq!(
                r["input_fan"]["cone_orders"],
                serde_json::json!(["4", "50", "486"])
            );
            assert_eq!(
                r["resolved_fan"]["singularities"],
                serde_json::json!({"1/25(1,4)": 2, "1/4(1,1)": 1, "1/81(1,17)": 6})
            );
            assert_eq!(r["canonical"]["k_squared"], serde_json::json!("3"));
            assert_eq!(
                r["markov"]["block_sizes"],
                serde_json::json!(["1", "2", "6"])
            );
            assert_eq!(r["markov"]["ranks"], serde_json::json!(["2", "5", "9"]));
            assert_eq!(r["markov"]["bundle_count"], serde_json::json!(9));
            // the nine divisors carry the expected condition pattern
            let checks = r["hypothesis_checks"].as_array().unwrap();
            assert_eq!(checks.len(), 9);
            for (k, check) in checks.iter().enumerate() {
                let points = check["points"].as_array().unwrap();
                for (c, p) in points.iter().enumerate() {
                    let expected = match c.cmp(&k) {
                        std::cmp::Ordering::Less => "(2)",
                        std::cmp::Ordering::Equal => "(1)",
                        std::cmp::Ordering::Greater => "(3)",
                    };
                    assert_eq!(p["condition"], serde_json::json!(expected));
                }
            }
        },
    );
}

#[test]
fn criterion_8_markov_chains() {
    criterion(
        8,
        "Markov verification, the mutation chain, and the classical census",
        Duration::from_secs(5),
        || {
            let eq = MarkovEquation::new(int(1), int(2), int(6), int(3)).unwrap();
            assert_eq!(eq.lambda(), &int(6));
            let target = MarkovTriple::new(int(2), int(5), int(9)).unwrap();
            assert!(markov::verify(&eq, &target));

            let seed = MarkovTriple::new(int(2), int(1), int(1)).unwrap();
            let (sols, edges) = markov::enumerate_with_edges(&eq, &seed, &int(9)).unwrap();
            assert!(sols.contains(&seed));
            let mid = MarkovTriple::new(int(2), int(5), int(1)).unwrap();
            assert!(sols.contains(&mid) && sols.contains(&target));
            assert!(edges.contains(&(seed.clone(), 2, mid.clone())));
            assert!(edges.contains(&(mid, 3, target)));

            // classical equation: the bounded tree equals the exhaustive census
            let classical = MarkovEquation::new(int(1), int(1), int(1), int(9)).unwrap();
            let seed = MarkovTriple::new(int(1), int(1), int(1)).unwrap();
            let tree = markov::enumerate(&classical, &seed, &int(100)).unwrap();
            let mut census = Vec::new();
            for r1 in 1..=100i64 {
                for r2 in 1..=100i64 {
                    for r3 in 1..=100i64 {
                        if r1 * r1 + r2 * r2 + r3 * r3 == 3 * r1 * r2 * r3 {
                            census.push(
                                MarkovTriple::new(int(r1), int(r2), int(r3)).unwrap(),
                            );
                        }
                    }
                }
            }
            assert_eq!(tree, census);
        },
    );
}

#[test]
fn criterion_9_property_suite() {
    criterion(
        9,
        "mutation involutivity, gamma additivity/invariance, adjustment round trips, SNF determinism",
        Duration::from_secs(30),
        || {
            let mut rng = ChaCha8Rng::seed_from_u64(9);

            // mutation involutivity: 1000 (solution, slot) cases
            let eq = MarkovEquation::new(int(1), int(2), int(6), int(3)).unwrap();
            let seed = MarkovTriple::new(int(2), int(1), int(1)).unwrap();
            let sols = markov::enumerate(&eq, &seed, &int(2_000_000)).unwrap();
            let mut checked = 0;
            'outer: loop {
                for t in &sols {
                    for i in 1..=3 {
                        let once = markov::mutate(&eq, t, i).unwrap();
                        assert_eq!(&markov::mutate(&eq, &once, i).unwrap(), t);
                        checked += 1;
                        if checked >= 1000 {
                            break 'outer;
                        }
                    }
                }
            }

            let random_chain = |rng: &mut ChaCha8Rng| {
                let len = rng.gen_range(1..=6usize);
                let b: Vec<Int> = (0..len).map(|_| int(rng.gen_range(2..=7i64))).collect();
                IntersectionMatrix::chain_of_selfints(&b)
            };
            let random_vec = |rng: &mut ChaCha8Rng, len: usize| -> Vec<Int> {
                (0..len).map(|_| int(rng.gen_range(-9..=9i64))).collect()
            };

            // gamma additivity and choice invariance
            for _ in 0..1000 {
                let m = random_chain(&mut rng);
                let g = link_group(&m).unwrap();
                let d1 = random_vec(&mut rng, m.size());
                let d2 = random_vec(&mut rng, m.size());
                let sum: Vec<Int> = d1.iter().zip(&d2).map(|(a, b)| a + b).collect();
                let lhs = gamma(&sum, &g).unwrap();
                let rhs = gamma(&d1, &g).unwrap().add(&gamma(&d2, &g).unwrap());
                assert_eq!(lhs, rhs);

                let col = rng.gen_range(0..m.size());
                let scale = int(rng.gen_range(-3..=3i64));
                let shifted: Vec<Int> = m
                    .column(col)
                    .iter()
                    .zip(&d1)
                    .map(|(c, v)| v + c * &scale)
                    .collect();
                assert!(gamma_invariance_check(&m, &d1, &shifted).unwrap());
            }

            // adjustment round trips: a -> dprime + M a -> a
            for _ in 0..1000 {
                let m = random_chain(&mut rng);
                let dprime = random_vec(&mut rng, m.size());
                let a: Vec<Int> = (0..m.size())
                    .map(|_| int(rng.gen_range(-3..=3i64)))
                    .collect();
                let target: Vec<Int> = m
                    .matrix()
                    .mul_vec(&a)
                    .iter()
                    .zip(&dprime)
                    .map(|(ma, d)| ma + d)
                    .collect();
                assert_eq!(adjust_divisor(&dprime, &target, &m).unwrap(), Some(a));
            }

            // deterministic Smith normal form with valid transforms
            for _ in 0..1000 {
                let rows = rng.gen_range(1..=4usize);
                let cols = rng.gen_range(1..=4usize);
                let data: Vec<Int> = (0..rows * cols)
                    .map(|_| int(rng.gen_range(-9..=9i64)))
                    .collect();
                let m = IMat::new(rows, cols, data);
                let s1 = smith_normal_form(&m);
                let s2 = smith_normal_form(&m);
                assert_eq!(s1, s2, "repeated runs agree");
                let d = s1.u.mul(&m).mul(&s1.v);
                for i in 0..rows {
                    for j in 0..cols {
                        if i == j {
                            assert_eq!(d[(i, j)], s1.diag[i]);
                        } else {
                            assert!(d[(i, j)].is_zero());
                        }
                    }
                }
                for w in s1.diag.windows(2) {
                    if !w[0].is_zero() {
                        assert!(w[1].mod_floor(&w[0]).is_zero(), "divisibility chain");
                    } else {
                        assert!(w[1].is_zero());
                    }
                }
                assert!(s1.u.determinant().abs().is_one());
                assert!(s1.v.determinant().abs().is_one());
            }
        },
    );
}
