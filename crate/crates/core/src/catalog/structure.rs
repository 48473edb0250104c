//! Structure-constant algebras: formal modules spanned by generator
//! symbols whose brackets are given by the catalog closed forms. The
//! fundamental-identity checks run here, where the bracket is the algebra
//! law itself rather than an operator composition.

use super::families;
use crate::backend::DeformationSpec;
use crate::brackets::{koszul_sign_bubble, NAlgebra};
use crate::generators::WKind;
use crate::halfint::HalfInt;
use crate::scalar::Scalar;
use std::collections::BTreeMap;
use std::fmt::Write as _;

/// A basis symbol of a structure algebra.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum StructKey {
    /// W-generator symbol.
    W { kind: WKind, m: i64, r: u32 },
    /// Virasoro-family symbol (flavor 0 = L, 1 = Lbar, 2 = H, 3 = Hbar).
    Vir { flavor: u8, m: i64, d: i64 },
}

impl StructKey {
    pub fn parity(&self) -> u8 {
        match self {
            StructKey::W { kind, .. } => kind.parity(),
            StructKey::Vir { flavor, .. } => {
                if *flavor >= 2 {
                    1
                } else {
                    0
                }
            }
        }
    }
}

/// A finite linear combination of basis symbols with exact coefficients.
#[derive(Clone, PartialEq, Eq, Debug, Default)]
pub struct LinComb {
    pub terms: BTreeMap<StructKey, Scalar>,
}

impl LinComb {
    pub fn zero() -> Self {
        LinComb::default()
    }

    pub fn basis(key: StructKey) -> Self {
        let mut terms = BTreeMap::new();
        terms.insert(key, Scalar::one());
        LinComb { terms }
    }

    pub fn insert(&mut self, key: StructKey, c: Scalar) {
        if c.is_zero() {
            return;
        }
        let e = self.terms.entry(key).or_insert_with(Scalar::zero);
        *e = &*e + &c;
        if e.is_zero() {
            self.terms.remove(&key);
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut r = self.clone();
        for (k, c) in &other.terms {
            r.insert(*k, c.clone());
        }
        r
    }

    pub fn scale(&self, c: &Scalar) -> Self {
        if c.is_zero() {
            return LinComb::zero();
        }
        LinComb {
            terms: self.terms.iter().map(|(k, v)| (*k, v * c)).collect(),
        }
    }

    pub fn neg(&self) -> Self {
        LinComb {
            terms: self.terms.iter().map(|(k, v)| (*k, -v.clone())).collect(),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// The parity shared by all terms; zero combinations count as even,
    /// mixed combinations panic (the structure brackets are parity
    /// homogeneous by construction).
    pub fn parity(&self) -> u8 {
        let mut it = self.terms.keys();
        let p = match it.next() {
            None => return 0,
            Some(k) => k.parity(),
        };
        assert!(
            it.all(|k| k.parity() == p),
            "mixed-parity structure combination"
        );
        p
    }

    pub fn describe(&self) -> String {
        if self.is_zero() {
            return "0".into();
        }
        let mut s = String::new();
        for (i, (k, c)) in self.terms.iter().enumerate() {
            if i > 0 {
                s.push_str(" + ");
            }
            let _ = write!(s, "{} * {:?}", c, k);
        }
        s
    }
}

/// Skew-normalize an ordered argument list against a canonical-order
/// predicate: bubble-sort with Koszul signs. Equal even arguments force
/// antisymmetric vanishing; equal odd arguments survive with sign +1.
fn skew_sort(args: &[StructKey]) -> Option<(Vec<StructKey>, i8)> {
    let n = args.len();
    let mut order: Vec<u8> = (0..n as u8).collect();
    order.sort_by_key(|&i| args[i as usize]);
    // Equal even keys adjacent in the sorted order collapse to zero.
    for w in order.windows(2) {
        let (a, b) = (args[w[0] as usize], args[w[1] as usize]);
        if a == b && a.parity() == 0 {
            return None;
        }
    }
    let parities: Vec<u8> = args.iter().map(|k| k.parity()).collect();
    let sign = koszul_sign_bubble(&order, &parities);
    let sorted: Vec<StructKey> = order.iter().map(|&i| args[i as usize]).collect();
    Some((sorted, sign))
}

/// Generic bracket-table evaluation: skew-normalize basis tuples, look up
/// the canonical form, and extend multilinearly.
fn multilinear_bracket<F>(args: &[LinComb], table: F) -> LinComb
where
    F: Fn(&[StructKey]) -> LinComb,
{
    // Expand the multilinear bracket over all basis tuples.
    let mut acc = LinComb::zero();
    let mut idx: Vec<usize> = vec![0; args.len()];
    let keys: Vec<Vec<(&StructKey, &Scalar)>> =
        args.iter().map(|a| a.terms.iter().collect()).collect();
    if keys.iter().any(|k| k.is_empty()) {
        return acc;
    }
    loop {
        let tuple: Vec<StructKey> = idx
            .iter()
            .enumerate()
            .map(|(slot, &i)| *keys[slot][i].0)
            .collect();
        let mut coeff = Scalar::one();
        for (slot, &i) in idx.iter().enumerate() {
            coeff = &coeff * keys[slot][i].1;
        }
        if let Some((sorted, sign)) = skew_sort(&tuple) {
            let val = table(&sorted);
            let c = if sign < 0 { -coeff } else { coeff };
            acc = acc.add(&val.scale(&c));
        }
        // advance the multi-index
        let mut slot = 0;
        loop {
            idx[slot] += 1;
            if idx[slot] < keys[slot].len() {
                break;
            }
            idx[slot] = 0;
            slot += 1;
            if slot == args.len() {
                return acc;
            }
        }
    }
}

/// The Witt 3-algebra: brackets of W_(m,2) and W_(m,1) symbols with the
/// closed-form table; every triple outside the two listed patterns is
/// zero.
pub struct Witt3Algebra {
    pub spec: DeformationSpec,
}

impl Witt3Algebra {
    fn table(&self, sorted: &[StructKey]) -> LinComb {
        let spec = &self.spec;
        let num = |x: i64| spec.deformed_number(HalfInt::from_int(x));
        let (k0, k1, k2) = (sorted[0], sorted[1], sorted[2]);
        let w = |k: StructKey| match k {
            StructKey::W { kind, m, r } => (kind, m, r),
            _ => panic!("Witt3 algebra takes W symbols"),
        };
        let total = w(k0).1 + w(k1).1 + w(k2).1;
        // Match the two listed patterns in any arrangement of the sorted
        // tuple, carrying the Koszul sign to the matched arrangement.
        let mut out = LinComb::zero();
        // Pattern (B2, B2, X1): [W^B_a2, W^B_b2, W^X_c1].
        let pat1 = |a: (WKind, i64, u32), b: (WKind, i64, u32), c: (WKind, i64, u32)| {
            a.0 == WKind::B && a.2 == 2 && b.0 == WKind::B && b.2 == 2 && c.2 == 1
        };
        // Pattern (B2, B1, X1).
        let pat2 = |a: (WKind, i64, u32), b: (WKind, i64, u32), c: (WKind, i64, u32)| {
            a.0 == WKind::B && a.2 == 2 && b.0 == WKind::B && b.2 == 1 && c.2 == 1
        };
        // Try all arrangements of the sorted triple, tracking the Koszul
        // sign to the matched arrangement.
        let perms = crate::brackets::permutations(3);
        let parities = [k0.parity(), k1.parity(), k2.parity()];
        for perm in &perms {
            let t = [
                w(sorted[perm[0] as usize]),
                w(sorted[perm[1] as usize]),
                w(sorted[perm[2] as usize]),
            ];
            let sign = crate::brackets::koszul_sign(
                perm,
                &parities,
            )
            .combined();
            if pat1(t[0], t[1], t[2]) {
                let c = &num(t[1].1) - &num(t[0].1);
                let c = if sign < 0 { -c } else { c };
                let kind = t[2].0;
                out.insert(StructKey::W { kind, m: total, r: 2 }, c.clone());
                out.insert(StructKey::W { kind, m: total, r: 1 }, &c * &num(t[2].1));
                return out;
            }
            if pat2(t[0], t[1], t[2]) {
                let c = &num(t[1].1) - &num(t[2].1);
                let c = if sign < 0 { -c } else { c };
                out.insert(StructKey::W { kind: t[2].0, m: total, r: 1 }, c);
                return out;
            }
        }
        out
    }
}

impl NAlgebra for Witt3Algebra {
    type Elt = LinComb;

    fn bracket(&self, args: &[LinComb]) -> LinComb {
        assert_eq!(args.len(), 3, "3-bracket");
        multilinear_bracket(args, |sorted| self.table(sorted))
    }

    fn add(&self, a: &LinComb, b: &LinComb) -> LinComb {
        a.add(b)
    }

    fn neg(&self, a: &LinComb) -> LinComb {
        a.neg()
    }

    fn is_zero(&self, a: &LinComb) -> bool {
        a.is_zero()
    }

    fn parity(&self, a: &LinComb) -> u8 {
        a.parity()
    }

    fn describe(&self, a: &LinComb) -> String {
        a.describe()
    }
}

/// The sub-2n-algebra on W_(m, n+1) symbols: the 2n-bracket is the
/// Vandermonde coefficient times the prefactor ratio, closing on the same
/// depth; more than one fermionic argument gives zero.
pub struct Sub2nAlgebra {
    pub spec: DeformationSpec,
    pub n: u32,
}

impl NAlgebra for Sub2nAlgebra {
    type Elt = LinComb;

    fn bracket(&self, args: &[LinComb]) -> LinComb {
        assert_eq!(args.len(), 2 * self.n as usize, "2n-bracket");
        let spec = self.spec.clone();
        let n = self.n;
        multilinear_bracket(args, move |sorted| {
            let mut modes = Vec::new();
            let mut fermions = 0;
            for k in sorted {
                match k {
                    StructKey::W { kind, m, r } if *r == n + 1 => {
                        modes.push(*m);
                        if kind.parity() == 1 {
                            fermions += 1;
                        }
                    }
                    _ => return LinComb::zero(),
                }
            }
            if fermions > 1 {
                return LinComb::zero();
            }
            let msum: i64 = modes.iter().sum();
            let ratio = match spec.prefactor_ratio(HalfInt::from_int(msum)) {
                Ok(r) => r,
                Err(_) => return LinComb::zero(),
            };
            let mut c = &families::vandermonde(&spec, &modes) * &ratio;
            c = &c * &Scalar::from_rational(num_rational::BigRational::new(1.into(), 2.into()));
            let kind = if fermions == 1 { WKind::F } else { WKind::B };
            let mut out = LinComb::zero();
            out.insert(StructKey::W { kind, m: msum, r: n + 1 }, c);
            out
        })
    }

    fn add(&self, a: &LinComb, b: &LinComb) -> LinComb {
        a.add(b)
    }

    fn neg(&self, a: &LinComb) -> LinComb {
        a.neg()
    }

    fn is_zero(&self, a: &LinComb) -> bool {
        a.is_zero()
    }

    fn parity(&self, a: &LinComb) -> u8 {
        a.parity()
    }

    fn describe(&self, a: &LinComb) -> String {
        a.describe()
    }
}

/// The lambda-limit 3-algebra on Virasoro symbols, with the closed-form
/// six-term coefficients; all unlisted triples vanish.
pub struct Alg3Algebra {
    pub spec: DeformationSpec,
}

impl Alg3Algebra {
    fn table(&self, sorted: &[StructKey]) -> LinComb {
        let spec = &self.spec;
        let v = |k: StructKey| match k {
            StructKey::Vir { flavor, m, d } => (flavor, m, d),
            _ => panic!("Alg3 algebra takes Virasoro symbols"),
        };
        let parities = [sorted[0].parity(), sorted[1].parity(), sorted[2].parity()];
        for perm in &crate::brackets::permutations(3) {
            let t = [
                v(sorted[perm[0] as usize]),
                v(sorted[perm[1] as usize]),
                v(sorted[perm[2] as usize]),
            ];
            let sign = crate::brackets::koszul_sign(perm, &parities).combined();
            let fams: Option<(u8, u8)> = match (t[0].0, t[1].0, t[2].0) {
                (0, 0, 0) => Some((1, 0)),
                (0, 0, 1) => Some((2, 1)),
                (0, 0, 2) => Some((3, 2)),
                (0, 0, 3) => Some((4, 3)),
                (0, 2, 3) => Some((5, 1)),
                _ => None,
            };
            if let Some((fam, out_flavor)) = fams {
                let mut params: BTreeMap<String, i64> = BTreeMap::new();
                match fam {
                    1 | 2 => {
                        params.insert("s".into(), t[0].2);
                        params.insert("r".into(), t[1].2);
                        params.insert("h".into(), t[2].2);
                        params.insert("m".into(), t[0].1);
                        params.insert("n".into(), t[1].1);
                        params.insert("k".into(), t[2].1);
                    }
                    3 | 4 => {
                        params.insert("s".into(), t[0].2);
                        params.insert("t".into(), t[1].2);
                        params.insert("alpha".into(), t[2].2);
                        params.insert("m".into(), t[0].1);
                        params.insert("n".into(), t[1].1);
                        params.insert("r".into(), t[2].1);
                    }
                    _ => {
                        params.insert("k".into(), t[0].2);
                        params.insert("alpha".into(), t[1].2);
                        params.insert("beta".into(), t[2].2);
                        params.insert("m".into(), t[0].1);
                        params.insert("r".into(), t[1].1);
                        params.insert("s".into(), t[2].1);
                    }
                }
                let coeff = alg3_coefficient(spec, fam, &params);
                let depth = match fam {
                    1 | 2 => t[0].2 + t[1].2 + t[2].2 - 1,
                    3 | 4 => t[0].2 + t[1].2 + t[2].2 - 1,
                    _ => t[0].2 + t[1].2 + t[2].2 - 1,
                };
                let mode = t[0].1 + t[1].1 + t[2].1;
                let mut out = LinComb::zero();
                let c = if sign < 0 { -coeff } else { coeff };
                out.insert(StructKey::Vir { flavor: out_flavor, m: mode, d: depth }, c);
                return out;
            }
        }
        LinComb::zero()
    }
}

/// The six-term coefficient of the lambda-limit families, shared with the
/// operator-level expected right sides.
fn alg3_coefficient(spec: &DeformationSpec, fam: u8, params: &BTreeMap<String, i64>) -> Scalar {
    let get = |k: &str| params[k];
    let num = |x: i64| spec.deformed_number(HalfInt::from_int(x));
    let qp = |e: i64| match spec.form {
        crate::backend::RForm::Classical => Scalar::one(),
        _ => Scalar::q_pow(HalfInt::from_int(e)),
    };
    let t = |a: i64, b: i64| -> Scalar { &(&qp((a - 1) * b) * &num(a)) * &num(b) };
    match fam {
        1 | 2 => {
            let (s, r, h) = (get("s"), get("r"), get("h"));
            let (m, n, k) = (get("m"), get("n"), get("k"));
            let (x12, x23, x31) = (m + s, n + r, k + h);
            let mut c = t(s, x23);
            c = &c - &t(r, x12);
            c = &c + &t(r, x31);
            c = &c - &t(h, x23);
            c = &c + &t(h, x12);
            c = &c - &t(s, x31);
            c
        }
        3 | 4 => {
            let (s, td, alpha) = (get("s"), get("t"), get("alpha"));
            let (m, n, r) = (get("m"), get("n"), get("r"));
            let (x12, x23, x31) = (m + s, n + td, r + alpha);
            let mut c = t(s, x23);
            c = &c - &t(td, x12);
            c = &c + &t(td, x31);
            c = &c - &t(alpha, x23);
            c = &c + &t(alpha, x12);
            c = &c - &t(s, x31);
            c
        }
        _ => {
            let (kd, alpha, beta) = (get("k"), get("alpha"), get("beta"));
            let (m, r, s) = (get("m"), get("r"), get("s"));
            let mut c = -&t(kd, r + alpha);
            c = &c + &t(alpha, m + kd);
            c = &c + &t(beta, r + alpha);
            c = &c - &t(alpha, s + beta);
            c = &c - &t(beta, m + kd);
            c = &c + &t(kd, s + beta);
            c
        }
    }
}

impl NAlgebra for Alg3Algebra {
    type Elt = LinComb;

    fn bracket(&self, args: &[LinComb]) -> LinComb {
        assert_eq!(args.len(), 3, "3-bracket");
        multilinear_bracket(args, |sorted| self.table(sorted))
    }

    fn add(&self, a: &LinComb, b: &LinComb) -> LinComb {
        a.add(b)
    }

    fn neg(&self, a: &LinComb) -> LinComb {
        a.neg()
    }

    fn is_zero(&self, a: &LinComb) -> bool {
        a.is_zero()
    }

    fn parity(&self, a: &LinComb) -> u8 {
        a.parity()
    }

    fn describe(&self, a: &LinComb) -> String {
        a.describe()
    }
}
