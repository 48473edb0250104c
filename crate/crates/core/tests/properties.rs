//! Property tests for the algebraic substrate: exact field axioms for the
//! scalar quotient field, shift/evaluate coherence for coefficient
//! functions, and associativity plus parity bookkeeping for the operator
//! product.

use num_bigint::BigInt;
use num_rational::BigRational;
use proptest::prelude::*;
use rpq_core::backend::DeformationSpec;
use rpq_core::laurent::{Gen, LaurentPoly};
use rpq_core::rng::SplitMix64;
use rpq_core::sampling::random_homogeneous;
use rpq_core::scalar::Scalar;
use rpq_core::shiftalg::CoeffFn;

fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

fn arb_poly() -> impl Strategy<Value = LaurentPoly> {
    // Up to four terms in sqrt(p), sqrt(q), sqrt(lambda) with small
    // exponents and small rational coefficients.
    prop::collection::vec(
        (
            -3i32..=3,
            -3i32..=3,
            -2i32..=2,
            -5i64..=5,
            1i64..=3,
        ),
        0..4,
    )
    .prop_map(|terms| {
        let mut p = LaurentPoly::zero();
        for (ep, eq, el, num, den) in terms {
            let mut exps = [0i32; rpq_core::laurent::NVARS];
            exps[Gen::SqrtP as usize] = ep;
            exps[Gen::SqrtQ as usize] = eq;
            exps[Gen::SqrtLambda as usize] = el;
            p = p.add(&LaurentPoly::monomial(exps, rat(num, den)));
        }
        p
    })
}

fn arb_scalar() -> impl Strategy<Value = Scalar> {
    (arb_poly(), arb_poly()).prop_map(|(n, d)| {
        let den = if d.is_zero() { LaurentPoly::one() } else { d };
        Scalar::from_ratio(n, den).expect("nonzero denominator")
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn scalar_field_axioms(a in arb_scalar(), b in arb_scalar(), c in arb_scalar()) {
        // Commutativity and associativity.
        prop_assert_eq!(&a + &b, &b + &a);
        prop_assert_eq!(&a * &b, &b * &a);
        prop_assert_eq!(&(&a + &b) + &c, &a + &(&b + &c));
        prop_assert_eq!(&(&a * &b) * &c, &a * &(&b * &c));
        // Distributivity.
        prop_assert_eq!(&a * &(&b + &c), &(&a * &b) + &(&a * &c));
        // Additive and multiplicative inverses.
        prop_assert!((&a - &a).is_zero());
        if !a.is_zero() {
            prop_assert!(a.checked_div(&a).unwrap().is_one());
        }
    }

    #[test]
    fn scalar_equality_is_cross_multiplication(a in arb_scalar(), b in arb_scalar()) {
        let cross = a
            .numerator()
            .mul(b.denominator())
            .sub(&b.numerator().mul(a.denominator()));
        prop_assert_eq!(a == b, cross.is_zero());
    }

    #[test]
    fn coefffn_shift_evaluate_commutes(
        u in -2i32..=2,
        v in -2i32..=2,
        nu_pow in 0u16..=3,
        d in -3i32..=3,
        at in -4i64..=4,
    ) {
        let mut mono = rpq_core::shiftalg::CfMono::default();
        mono.regs[0].u = u;
        mono.regs[0].v = v;
        mono.regs[0].nu_pow = nu_pow;
        let f = CoeffFn::monomial(mono, Scalar::from_int(3));
        prop_assert_eq!(
            f.shift(0, d).eval(&[at, 0]),
            f.eval(&[at + d as i64, 0])
        );
    }
}

#[test]
fn operator_product_is_associative() {
    // 30 seeded random triples per backend, exactly.
    for (bi, spec) in [
        DeformationSpec::classical(),
        DeformationSpec::q_case(),
        DeformationSpec::pq_case(),
    ]
    .iter()
    .enumerate()
    {
        let mut rng = SplitMix64::new(100 + bi as u64);
        for _ in 0..30 {
            let (x, _) = random_homogeneous(&mut rng, spec, None);
            let (y, _) = random_homogeneous(&mut rng, spec, None);
            let (z, _) = random_homogeneous(&mut rng, spec, None);
            assert_eq!(x.compose(&y).compose(&z), x.compose(&y.compose(&z)));
        }
    }
}

#[test]
fn operator_parity_bookkeeping() {
    let spec = DeformationSpec::q_case();
    let mut rng = SplitMix64::new(200);
    for _ in 0..40 {
        let (x, _) = random_homogeneous(&mut rng, &spec, None);
        let (y, _) = random_homogeneous(&mut rng, &spec, None);
        let p = x.compose(&y);
        if !p.is_zero() {
            assert_eq!(p.parity(), (x.parity() + y.parity()) % 2);
        }
    }
}

#[test]
fn operator_scaling_is_linear() {
    // (c1 + c2) X = c1 X + c2 X on random operators.
    let spec = DeformationSpec::pq_case();
    let mut rng = SplitMix64::new(300);
    let c1 = Scalar::from_rational(rat(3, 2));
    let c2 = &Scalar::q_pow(rpq_core::halfint::HalfInt::from_int(1)) - &Scalar::from_int(2);
    for _ in 0..10 {
        let (x, _) = random_homogeneous(&mut rng, &spec, None);
        let lhs = x.scale(&(&c1 + &c2));
        let rhs = x.scale(&c1).add(&x.scale(&c2));
        assert_eq!(lhs, rhs);
        assert!(x.scale(&Scalar::zero()).is_zero());
        assert!(x.sub(&x).is_zero());
    }
}

#[test]
fn bracket_is_multilinear_in_each_slot() {
    // Additivity and scalar homogeneity slot by slot, weights held fixed.
    use rpq_core::brackets::{n_bracket, BracketInput, OpArena};
    let arena = OpArena::new();
    for spec in [DeformationSpec::q_case(), DeformationSpec::pq_case()] {
        let mut rng = SplitMix64::new(400);
        for _ in 0..4 {
            let (x, wx) = random_homogeneous(&mut rng, &spec, None);
            // A same-parity partner and a scalar for the probed slot.
            let (y, _) = random_homogeneous(&mut rng, &spec, Some(x.parity()));
            let (b, wb) = random_homogeneous(&mut rng, &spec, None);
            let (c, wc) = random_homogeneous(&mut rng, &spec, None);
            let lam = &Scalar::from_int(2) + &Scalar::q_pow(rpq_core::halfint::HalfInt::from_int(1));
            let slot = x.add(&y.scale(&lam));
            let ws = vec![wx, wb, wc, wx];
            let bracket = |first: &rpq_core::shiftalg::GradedOperator| {
                n_bracket(
                    &arena,
                    &spec,
                    &BracketInput::with_weights(
                        vec![first.clone(), b.clone(), c.clone(), x.clone()],
                        ws.clone(),
                    ),
                )
                .unwrap()
            };
            let lhs = bracket(&slot);
            let rhs = {
                let bx = bracket(&x);
                let by = bracket(&y).scale(&lam);
                if bx.is_zero() {
                    by
                } else if by.is_zero() {
                    bx
                } else {
                    bx.add(&by)
                }
            };
            assert_eq!(lhs, rhs);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn addition_paths_agree_on_canonical_form(a in arb_scalar(), b in arb_scalar()) {
        // The least-common-denominator path must produce the exact same
        // canonical representative as the naive cross-multiplied fraction;
        // interning depends on structural equality.
        let fast = &a + &b;
        let naive = Scalar::from_ratio(
            a.numerator().mul(b.denominator()).add(&b.numerator().mul(a.denominator())),
            a.denominator().mul(b.denominator()),
        )
        .unwrap();
        prop_assert_eq!(fast, naive);
    }
}

#[test]
fn half_integer_parsing() {
    use rpq_core::halfint::HalfInt;
    assert_eq!(HalfInt::parse("2"), Some(HalfInt::from_int(2)));
    assert_eq!(HalfInt::parse("-3/2"), Some(HalfInt::new(-3)));
    assert_eq!(HalfInt::parse(" 1/2 "), Some(HalfInt::half()));
    assert_eq!(HalfInt::parse("1/3"), None);
    assert_eq!(HalfInt::parse("x"), None);
    assert_eq!(HalfInt::new(-3).to_string(), "-3/2");
    assert_eq!(HalfInt::from_int(4).to_string(), "4");
}

#[test]
fn family_names_round_trip() {
    use rpq_core::catalog::Family;
    for f in Family::ALL {
        assert_eq!(Family::from_name(f.name()), Some(f));
        assert_eq!(Family::from_name(&f.name().to_lowercase()), Some(f));
    }
    assert_eq!(Family::from_name("w2comm"), Some(Family::W2Comm));
    assert_eq!(Family::from_name("no_such"), None);
}
