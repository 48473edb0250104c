//! Seeded generation of random homogeneous operators for the identity
//! suites. Operators are short signed sums of products of oscillators and
//! W-generators, so they stay small, exactly representable, and carry a
//! definite mode weight for the even-bracket prefactor.

use crate::backend::DeformationSpec;
use crate::generators::{make_oscillator, make_w, OscKind, WKind};
use crate::halfint::HalfInt;
use crate::rng::SplitMix64;
use crate::scalar::Scalar;
use crate::shiftalg::{GradedOperator, SpaceSignature};

const OSCILLATORS: [OscKind; 8] = [
    OscKind::A,
    OscKind::ADag,
    OscKind::B,
    OscKind::BDag,
    OscKind::Alpha,
    OscKind::AlphaDag,
    OscKind::Beta,
    OscKind::BetaDag,
];

fn random_factor(rng: &mut SplitMix64, spec: &DeformationSpec) -> (GradedOperator, HalfInt) {
    if rng.chance(1, 2) {
        let k = OSCILLATORS[rng.below(8) as usize];
        let op = make_oscillator(k, spec).expect("oscillator");
        let w = crate::generators::GeneratorId::Osc(k).weight();
        (op, w)
    } else {
        let kind = match rng.below(4) {
            0 => WKind::B,
            1 => WKind::Bbar,
            2 => WKind::F,
            _ => WKind::Fbar,
        };
        let r = 1 + rng.below(2) as u32;
        let m = rng.range_i64(1 - r as i64, 2);
        let op = make_w(kind, m, r, spec).expect("valid W indices");
        (op, HalfInt::from_int(m))
    }
}

fn random_product(rng: &mut SplitMix64, spec: &DeformationSpec) -> (GradedOperator, HalfInt) {
    loop {
        let k = 1 + rng.below(3);
        let mut acc: Option<(GradedOperator, HalfInt)> = None;
        for _ in 0..k {
            let (f, w) = random_factor(rng, spec);
            acc = Some(match acc {
                None => (f, w),
                Some((op, wsum)) => (op.compose(&f), wsum + w),
            });
        }
        let (op, w) = acc.expect("k >= 1");
        if !op.is_zero() {
            return (op, w);
        }
    }
}

/// A random parity-homogeneous operator with its mode weight. When
/// `parity` is given, resamples until it matches.
pub fn random_homogeneous(
    rng: &mut SplitMix64,
    spec: &DeformationSpec,
    parity: Option<u8>,
) -> (GradedOperator, HalfInt) {
    loop {
        let (mut op, w) = random_product(rng, spec);
        if let Some(p) = parity {
            if op.parity() != p {
                continue;
            }
        }
        // Half the time, widen to a two-term sum of equal parity and weight
        // (scaled by a small integer) so sums of shift terms get exercised.
        if rng.chance(1, 2) {
            for _ in 0..8 {
                let (other, w2) = random_product(rng, spec);
                if other.parity() == op.parity() && w2 == w {
                    let c = Scalar::from_int(rng.range_i64(-3, 3));
                    op = op.add(&other.scale(&c));
                    break;
                }
            }
        }
        if !op.is_zero() {
            return (op, w);
        }
    }
}

/// A random homogeneous operator kept deliberately small: a single product
/// of at most `max_factors` factors, one shift term per cell. The
/// factorial-size identity sums (Bremner, high-order Jacobi) use these so
/// the permutation combinatorics stays the dominant cost, not coefficient
/// growth.
pub fn random_simple(
    rng: &mut SplitMix64,
    spec: &DeformationSpec,
    parity: Option<u8>,
    max_factors: u64,
) -> (GradedOperator, HalfInt) {
    loop {
        let k = 1 + rng.below(max_factors.max(1));
        let mut acc: Option<(GradedOperator, HalfInt)> = None;
        for _ in 0..k {
            let (f, w) = random_factor(rng, spec);
            acc = Some(match acc {
                None => (f, w),
                Some((op, wsum)) => (op.compose(&f), wsum + w),
            });
        }
        let (op, w) = acc.expect("k >= 1");
        if op.is_zero() {
            continue;
        }
        if let Some(p) = parity {
            if op.parity() != p {
                continue;
            }
        }
        return (op, w);
    }
}

/// A batch of operators sharing the Landau signature; convenience for the
/// identity suites.
pub fn random_tuple(
    rng: &mut SplitMix64,
    spec: &DeformationSpec,
    parities: &[u8],
) -> (Vec<GradedOperator>, Vec<HalfInt>) {
    let mut ops = Vec::with_capacity(parities.len());
    let mut ws = Vec::with_capacity(parities.len());
    for &p in parities {
        let (op, w) = random_homogeneous(rng, spec, Some(p));
        ops.push(op);
        ws.push(w);
    }
    (ops, ws)
}

/// Deterministic parity pattern streams used by suite configs: `seed`
/// selects the pattern of odd slots among `n`.
pub fn parity_pattern(rng: &mut SplitMix64, n: usize) -> Vec<u8> {
    (0..n).map(|_| (rng.below(2)) as u8).collect()
}

/// The Landau signature shared by all sampled operators.
pub fn sample_space() -> std::sync::Arc<SpaceSignature> {
    SpaceSignature::landau()
}
