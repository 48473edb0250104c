//! Acceptance suite. One test per criterion; each prints a PASS line with
//! the measured outcome. All comparisons are exact over the rationals;
//! the only tolerances are the stated runtime budgets.

use rpq_core::backend::DeformationSpec;
use rpq_core::brackets::{
    bracket_prefactor, bracket_with_distinguished, check_fi3, check_fi_2n, check_gbi_gsbi,
    check_gsji, check_skew, n_bracket, permutations, BracketInput, OpArena,
};
use rpq_core::catalog::structure::{LinComb, StructKey, Sub2nAlgebra, Witt3Algebra, Alg3Algebra};
use rpq_core::catalog::{Family, Status};
use rpq_core::generators::{make_landau_scalars, make_w, WKind};
use rpq_core::halfint::HalfInt;
use rpq_core::harness::{run_suite, CoherenceSuite, FamilySuite, Grid, SuiteConfig};
use rpq_core::rng::SplitMix64;
use rpq_core::sampling::{random_homogeneous, random_simple};
use rpq_core::scalar::Scalar;
use rpq_core::shiftalg::GradedOperator;
use std::time::Instant;

fn backends() -> [DeformationSpec; 3] {
    [
        DeformationSpec::q_case(),
        DeformationSpec::pq_case(),
        DeformationSpec::classical(),
    ]
}

/// Criterion 1: associativity-forced identities, exact over the rationals.
/// GSJI n=2 on 50 seeded homogeneous triples per backend; skew-symmetry
/// for n=3,4 on 20 seeded tuples; GBI and GSBI for n=3 on 10 seeded tuples
/// per parity pattern. 100% exact-zero within the two-minute budget.
#[test]
fn criterion_1_associativity_forced_identities() {
    let t0 = Instant::now();
    let arena = OpArena::new();
    let mut zero_count = 0usize;
    // GSJI n=2: 50 triples per backend.
    for (bi, spec) in backends().iter().enumerate() {
        let mut rng = SplitMix64::new(1000 + bi as u64);
        for case in 0..50 {
            let mut ops = Vec::new();
            let mut ws = Vec::new();
            for _ in 0..3 {
                let (o, w) = random_homogeneous(&mut rng, spec, None);
                ops.push(o);
                ws.push(w);
            }
            let r = check_gsji(&arena, spec, 2, &ops, &ws).unwrap();
            assert!(r.holds, "GSJI n=2 case {} backend {}: {:?}", case, spec, r.witness);
            zero_count += 1;
        }
    }
    // Skew-symmetry for n=3 and n=4: 20 seeded tuples each, backends
    // cycling.
    for n in [3usize, 4] {
        for case in 0..20 {
            let spec = &backends()[case % 3];
            let mut rng = SplitMix64::new(2000 + (n * 100 + case) as u64);
            let mut ops = Vec::new();
            let mut ws = Vec::new();
            for _ in 0..n {
                let (o, w) = random_homogeneous(&mut rng, spec, None);
                ops.push(o);
                ws.push(w);
            }
            let perms = permutations(n);
            let perm = perms[rng.below(perms.len() as u64) as usize].clone();
            let input = BracketInput::with_weights(ops, ws);
            let r = check_skew(&arena, spec, &input, &perm).unwrap();
            assert!(r.holds, "skew n={} case {}: {:?}", n, case, r.witness);
            zero_count += 1;
        }
    }
    // GBI (all-even) and GSBI (mixed parity) for n=3: 10 seeded tuples per
    // parity pattern, backends cycling.
    let patterns: [[u8; 7]; 4] = [
        [0, 0, 0, 0, 0, 0, 0],
        [0, 1, 1, 0, 0, 0, 0],
        [0, 1, 1, 0, 0, 1, 1],
        [1, 0, 1, 1, 0, 0, 1],
    ];
    for (pi, pattern) in patterns.iter().enumerate() {
        for case in 0..10 {
            let spec = &backends()[case % 3];
            let mut rng = SplitMix64::new(3000 + (pi * 100 + case) as u64);
            let (b, _) = random_simple(&mut rng, spec, Some(pattern[0]), 1);
            let ops: Vec<GradedOperator> = pattern[1..]
                .iter()
                .map(|&p| random_simple(&mut rng, spec, Some(p), 1).0)
                .collect();
            let r = check_gbi_gsbi(&arena, spec, 3, &b, &ops).unwrap();
            assert!(
                r.holds,
                "Bremner pattern {} case {} backend {}: {:?}",
                pi, case, spec, r.witness
            );
            zero_count += 1;
        }
    }
    let elapsed = t0.elapsed();
    assert!(
        elapsed.as_secs() <= 120,
        "criterion 1 exceeded the two-minute budget: {:?}",
        elapsed
    );
    println!(
        "ACCEPTANCE 1 PASS - {} identity instances exactly zero in {:?}",
        zero_count, elapsed
    );
}

/// Criterion 2: GSJI n=4 on seven mixed-parity W-generators; the full
/// 5040-permutation outer sum with nested 4-brackets is exactly zero
/// within ten minutes, and a single-worker run reproduces the result.
#[test]
fn criterion_2_gsji_order_four_on_w_generators() {
    let t0 = Instant::now();
    let spec = DeformationSpec::q_case();
    let gens = [
        (WKind::B, 1i64, 2u32),
        (WKind::B, -1, 3),
        (WKind::Bbar, 0, 2),
        (WKind::F, 2, 1),
        (WKind::F, 0, 2),
        (WKind::Fbar, -1, 2),
        (WKind::Fbar, 1, 1),
    ];
    let ops: Vec<GradedOperator> = gens
        .iter()
        .map(|&(k, m, r)| make_w(k, m, r, &spec).unwrap())
        .collect();
    let ws: Vec<HalfInt> = gens.iter().map(|&(k, m, r)| k.id(m, r).weight()).collect();
    let run = |threads: usize| {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap();
        pool.install(|| {
            let arena = OpArena::new();
            check_gsji(&arena, &spec, 4, &ops, &ws).unwrap()
        })
    };
    let multi = run(4);
    assert!(multi.holds, "GSJI n=4 must vanish: {:?}", multi.witness);
    let single = run(1);
    assert!(single.holds);
    assert_eq!(multi.holds, single.holds);
    assert_eq!(multi.witness, single.witness);
    let elapsed = t0.elapsed();
    assert!(
        elapsed.as_secs() <= 600,
        "criterion 2 exceeded the ten-minute budget: {:?}",
        elapsed
    );
    println!(
        "ACCEPTANCE 2 PASS - 5040-permutation GSJI n=4 exactly zero, workers 4 and 1 agree, in {:?}",
        elapsed
    );
}

/// Criterion 3: the listed 3- and 4-bracket expansions and the
/// distinguished-element expansions agree exactly with the generic
/// bracket, 20 seeded cases each.
#[test]
fn criterion_3_bracket_form_equivalences() {
    let arena = OpArena::new();
    // Threaded 3-bracket expansion.
    for case in 0..20 {
        let spec = &backends()[case % 3];
        let mut rng = SplitMix64::new(4000 + case as u64);
        let (a1, _) = random_homogeneous(&mut rng, spec, None);
        let (a2, _) = random_homogeneous(&mut rng, spec, None);
        let (a3, _) = random_homogeneous(&mut rng, spec, None);
        let lhs = n_bracket(
            &arena,
            spec,
            &BracketInput::new(vec![a1.clone(), a2.clone(), a3.clone()]),
        )
        .unwrap();
        let (p1, p2, p3) = (a1.parity(), a2.parity(), a3.parity());
        let sgn = |neg: bool, op: GradedOperator| if neg { op.neg() } else { op };
        let terms = vec![
            a1.compose(&a2.graded_commutator(&a3)),
            sgn(p1 * p2 == 0, a2.compose(&a1.graded_commutator(&a3))),
            sgn(p3 * ((p1 + p2) % 2) == 1, a3.compose(&a1.graded_commutator(&a2))),
        ];
        let mut rhs = GradedOperator::zero(a1.signature().clone());
        for t in terms {
            rhs = if rhs.is_zero() {
                t
            } else if t.is_zero() {
                rhs
            } else {
                rhs.add(&t)
            };
        }
        assert_eq!(lhs, rhs, "triple expansion case {}", case);
    }
    // Pairwise-commutator 4-bracket expansion.
    for case in 0..20 {
        let spec = &backends()[case % 3];
        let mut rng = SplitMix64::new(5000 + case as u64);
        let mut ops = Vec::new();
        let mut ws = Vec::new();
        for _ in 0..4 {
            let (o, w) = random_homogeneous(&mut rng, spec, None);
            ops.push(o);
            ws.push(w);
        }
        let total: HalfInt = ws.iter().copied().sum();
        let lhs = n_bracket(&arena, spec, &BracketInput::with_weights(ops.clone(), ws)).unwrap();
        let p: Vec<u8> = ops.iter().map(|o| o.parity()).collect();
        let pref = bracket_prefactor(spec, 4, Some(total)).unwrap();
        let comm = |i: usize, j: usize| ops[i].graded_commutator(&ops[j]);
        let sgn = |neg: bool, op: GradedOperator| if neg { op.neg() } else { op };
        let terms = vec![
            comm(0, 1).compose(&comm(2, 3)),
            sgn(
                ((p[3] + p[2]) % 2) * ((p[1] + p[0]) % 2) == 1,
                comm(2, 3).compose(&comm(0, 1)),
            ),
            sgn(p[2] * p[1] == 0, comm(0, 2).compose(&comm(1, 3))),
            sgn(
                (p[3] * ((p[0] + p[2]) % 2) + p[1] * p[0]) % 2 == 0,
                comm(1, 3).compose(&comm(0, 2)),
            ),
            sgn(p[3] * ((p[1] + p[2]) % 2) == 1, comm(0, 3).compose(&comm(1, 2))),
            sgn(p[0] * ((p[1] + p[2]) % 2) == 1, comm(1, 2).compose(&comm(0, 3))),
        ];
        let mut rhs = GradedOperator::zero(ops[0].signature().clone());
        for t in terms {
            rhs = if rhs.is_zero() {
                t
            } else if t.is_zero() {
                rhs
            } else {
                rhs.add(&t)
            };
        }
        assert_eq!(lhs, rhs.scale(&pref), "quadruple expansion case {}", case);
    }
    // Distinguished-element expansions, with and without the trailing
    // operand.
    for case in 0..20 {
        let spec = &backends()[case % 3];
        let mut rng = SplitMix64::new(6000 + case as u64);
        let (b, _) = random_homogeneous(&mut rng, spec, None);
        let (a1, _) = random_homogeneous(&mut rng, spec, None);
        let (a2, _) = random_homogeneous(&mut rng, spec, None);
        let via = bracket_with_distinguished(&arena, spec, &b, &[a1.clone(), a2.clone()], None, None)
            .unwrap();
        let direct = n_bracket(&arena, spec, &BracketInput::new(vec![b.clone(), a1, a2])).unwrap();
        assert_eq!(via, direct, "threading case {}", case);
    }
    for case in 0..20 {
        let spec = &backends()[case % 3];
        let mut rng = SplitMix64::new(7000 + case as u64);
        let (b, _) = random_simple(&mut rng, spec, None, 2);
        let (z, _) = random_simple(&mut rng, spec, None, 2);
        let a: Vec<GradedOperator> = (0..3)
            .map(|_| random_simple(&mut rng, spec, None, 2).0)
            .collect();
        let via = bracket_with_distinguished(&arena, spec, &b, &a, Some(&z), None).unwrap();
        let mut all = vec![b.clone()];
        all.extend(a.iter().cloned());
        all.push(z.clone());
        let direct = n_bracket(&arena, spec, &BracketInput::new(all)).unwrap();
        assert_eq!(via, direct, "two-element threading case {}", case);
    }
    println!("ACCEPTANCE 3 PASS - bracket-form equivalences exact on 20 seeded cases each");
}

/// Criterion 4: classical-backend reproduction of the known algebra, all
/// exact: the Virasoro-Witt pair relations on m in [-3,3], the Witt
/// 3-algebra, the null 3-commutators, the W-pair commutators with the
/// repaired structure constant over the full grid, and the sub-2n-algebra
/// at n=2 with its worked example shape.
#[test]
fn criterion_4_classical_reproduction() {
    let spec = DeformationSpec::classical();
    let mut config = SuiteConfig::new(spec);
    config.families = vec![
        FamilySuite { family: Family::Vw, grid: Grid::new() },
        FamilySuite { family: Family::Witt3, grid: rpq_core::harness::parse_grid("v=1..6").unwrap() },
        FamilySuite { family: Family::Null3, grid: Grid::new() },
        FamilySuite { family: Family::W2Comm, grid: Grid::new() },
        FamilySuite { family: Family::Sub2n, grid: Grid::new() },
        FamilySuite { family: Family::ExSub4, grid: Grid::new() },
    ];
    let report = run_suite(&config).unwrap();
    assert!(report.summary.total > 2000, "grids cover the stated ranges");
    assert_eq!(
        report.summary.mismatch, 0,
        "classical mismatches: {:?}",
        report
            .checks
            .iter()
            .filter(|c| c.status == Status::Mismatch)
            .map(|c| c.id.clone())
            .take(5)
            .collect::<Vec<_>>()
    );
    assert_eq!(report.summary.conditional, 0);
    assert_eq!(report.summary.skipped, 0);
    println!(
        "ACCEPTANCE 4 PASS - {} classical relation instances all exact",
        report.summary.verified
    );
}

/// Criterion 5: deformed backends. The vanishing multi-fermion 3-brackets
/// are exact on the full grid; the angular-momentum gradings are exact in
/// the structural form; the two-generator Virasoro family runs the full
/// grid with every instance either verified or carrying a deterministic
/// minimal witness, with the status table snapshot-pinned and stable
/// across worker counts.
#[test]
fn criterion_5_deformed_backends() {
    for spec in [DeformationSpec::q_case(), DeformationSpec::pq_case()] {
        // Vanishing brackets on the full default grid (variants 3 and 4).
        let mut config = SuiteConfig::new(spec.clone());
        config.families = vec![FamilySuite {
            family: Family::Sub3,
            grid: rpq_core::harness::parse_grid("v=3..4").unwrap(),
        }];
        let report = run_suite(&config).unwrap();
        assert!(report.summary.total > 100);
        assert_eq!(
            report.summary.verified, report.summary.total,
            "vanishing brackets must be exact in {}",
            spec
        );
        // Structural gradings: eigenvalues m, m - 1/2, m + 1/2.
        let (lperp, _) = make_landau_scalars();
        let half = Scalar::from_rational(num_rational::BigRational::new(1.into(), 2.into()));
        for m in -2..=2i64 {
            for r in 1..=3u32 {
                if m + (r as i64) < 1 {
                    continue;
                }
                let wb = make_w(WKind::B, m, r, &spec).unwrap();
                assert_eq!(lperp.graded_commutator(&wb), wb.scale(&Scalar::from_int(m)));
                let wf = make_w(WKind::F, m, r, &spec).unwrap();
                assert_eq!(
                    lperp.graded_commutator(&wf),
                    wf.scale(&(&Scalar::from_int(m) - &half))
                );
                let wfb = make_w(WKind::Fbar, m, r, &spec).unwrap();
                assert_eq!(
                    lperp.graded_commutator(&wfb),
                    wfb.scale(&(&Scalar::from_int(m) + &half))
                );
            }
        }
    }
    // The Virasoro pair family: full grid on both deformed backends,
    // statuses pinned by the committed snapshots.
    for (spec, snap_path) in [
        (DeformationSpec::q_case(), "tests/snapshots/shov_q.snap"),
        (DeformationSpec::pq_case(), "tests/snapshots/shov_pq.snap"),
    ] {
        let mut config = SuiteConfig::new(spec.clone());
        config.families = [
            Family::Shov1,
            Family::Shov2,
            Family::Shov3,
            Family::Shov4,
            Family::Shov5,
            Family::Shov6,
            Family::Shov7,
            Family::Shov8,
            Family::Shov9,
        ]
        .iter()
        .map(|f| FamilySuite { family: *f, grid: Grid::new() })
        .collect();
        config.jobs = 4;
        let report = run_suite(&config).unwrap();
        for c in &report.checks {
            match c.status {
                Status::Verified => {}
                Status::Mismatch => {
                    assert!(c.witness.is_some(), "{} lacks a witness", c.id);
                }
                other => panic!("{} has unexpected status {}", c.id, other),
            }
        }
        let snapshot = std::fs::read_to_string(
            std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join(snap_path),
        )
        .expect("committed snapshot");
        let drift = report.diff_snapshot(&snapshot);
        assert!(drift.is_empty(), "snapshot drift in {}: {:?}", spec, &drift[..drift.len().min(5)]);
        // Worker-count stability on a one-family slice.
        let mut slice = SuiteConfig::new(spec.clone());
        slice.families = vec![FamilySuite { family: Family::Shov3, grid: Grid::new() }];
        slice.jobs = 1;
        let single = run_suite(&slice).unwrap();
        slice.jobs = 4;
        let multi = run_suite(&slice).unwrap();
        assert!(single.semantic_eq(&multi));
    }
    println!("ACCEPTANCE 5 PASS - deformed-backend guarantees hold; status tables match the snapshots");
}

/// Criterion 6: oracle coherence on 100 seeded pairs at the default
/// sample point; zero violations.
#[test]
fn criterion_6_oracle_coherence() {
    let mut config = SuiteConfig::new(DeformationSpec::pq_case());
    config.coherence = Some(CoherenceSuite { count: 100 });
    let report = run_suite(&config).unwrap();
    assert_eq!(report.summary.total, 100);
    assert_eq!(
        report.summary.verified, 100,
        "violations: {:?}",
        report
            .checks
            .iter()
            .filter(|c| c.status != Status::Verified)
            .map(|c| c.id.clone())
            .collect::<Vec<_>>()
    );
    println!("ACCEPTANCE 6 PASS - 100 seeded matrix-oracle pairs coherent, zero violations");
}

/// Criterion 7: negative controls. The super fundamental identity fails on
/// the Witt 3-algebra's own elements, and the order-2n super fundamental
/// identity fails on the sub-4-algebra's, each with a nonzero witness; the
/// checkers detect failure, not just success. The bosonic fundamental
/// identity on the lambda-limit structure algebra holds, as a positive
/// control of the same machinery.
#[test]
fn criterion_7_negative_controls() {
    let wb = |m: i64, r: u32| LinComb::basis(StructKey::W { kind: WKind::B, m, r });
    let wf = |m: i64, r: u32| LinComb::basis(StructKey::W { kind: WKind::F, m, r });
    for spec in [DeformationSpec::classical(), DeformationSpec::q_case()] {
        let alg = Witt3Algebra { spec: spec.clone() };
        let ops = [wb(3, 2), wf(3, 1), wb(2, 2), wb(0, 2), wb(3, 1)];
        let r = check_fi3(&alg, &ops).unwrap();
        assert!(!r.holds, "super FI must fail on the Witt 3-algebra in {}", spec);
        let witness = r.witness.expect("nonzero witness");
        assert!(!witness.is_empty() && witness != "0");

        let sub4 = Sub2nAlgebra { spec: spec.clone(), n: 2 };
        let ops: Vec<LinComb> = vec![
            wb(0, 3),
            wb(1, 3),
            wb(-1, 3),
            wb(2, 3),
            wb(-2, 3),
            wb(3, 3),
            wf(1, 3),
        ];
        let r = check_fi_2n(&sub4, 4, &ops).unwrap();
        assert!(!r.holds, "order-4 super FI must fail on the sub-4-algebra in {}", spec);
        assert!(r.witness.is_some());
    }
    // Positive control: the bosonic fundamental identity holds on the
    // classical lambda-limit structure algebra.
    let alg = Alg3Algebra { spec: DeformationSpec::classical() };
    let l = |m: i64, d: i64| LinComb::basis(StructKey::Vir { flavor: 0, m, d });
    for ops in [
        [l(1, 1), l(-1, 2), l(0, 1), l(2, 1), l(1, 2)],
        [l(0, 1), l(1, 1), l(-1, 1), l(2, 2), l(0, 2)],
        [l(2, 3), l(-1, 1), l(1, 2), l(0, 1), l(-2, 2)],
    ] {
        let r = check_fi3(&alg, &ops).unwrap();
        assert!(r.holds, "bosonic FI control: {:?}", r.witness);
    }
    println!("ACCEPTANCE 7 PASS - super FI violations detected with nonzero witnesses; bosonic control holds");
}
