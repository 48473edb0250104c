//! Shared fixtures for the criterion benches.

use rpq_core::backend::DeformationSpec;
use rpq_core::generators::{make_w, WKind};
use rpq_core::halfint::HalfInt;
use rpq_core::shiftalg::GradedOperator;

/// A mixed-parity set of W-generators with their mode weights.
pub fn w_fixture(spec: &DeformationSpec) -> (Vec<GradedOperator>, Vec<HalfInt>) {
    let gens = [
        (WKind::B, 1i64, 2u32),
        (WKind::B, -1, 3),
        (WKind::Bbar, 0, 2),
        (WKind::F, 2, 1),
        (WKind::F, 0, 2),
        (WKind::Fbar, -1, 2),
        (WKind::Fbar, 1, 1),
    ];
    let ops = gens
        .iter()
        .map(|&(k, m, r)| make_w(k, m, r, spec).expect("valid indices"))
        .collect();
    let ws = gens.iter().map(|&(k, m, r)| k.id(m, r).weight()).collect();
    (ops, ws)
}
