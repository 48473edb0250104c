//! Multivariate Laurent polynomials over the rationals in the five formal
//! generators sqrt(p), sqrt(q), sqrt(lambda), a, b.
//!
//! Working with square roots as the generators keeps half-integer powers of
//! p, q, lambda as ordinary monomials. Exponents are stored for the square
//! roots, so `p^(3/2)` is the monomial with sqrt(p)-exponent 3.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use std::collections::{BTreeMap, HashMap};
use std::fmt;

/// Number of formal generators.
pub const NVARS: usize = 5;

/// Formal generators of the coefficient field.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum Gen {
    /// sqrt(p)
    SqrtP = 0,
    /// sqrt(q)
    SqrtQ = 1,
    /// sqrt(lambda)
    SqrtLambda = 2,
    /// a (first extra deformation parameter)
    A = 3,
    /// b (second extra deformation parameter)
    B = 4,
}

impl Gen {
    pub const ALL: [Gen; NVARS] = [Gen::SqrtP, Gen::SqrtQ, Gen::SqrtLambda, Gen::A, Gen::B];

    /// Printed base name: exponents are halved for the square-root generators.
    fn base_name(self) -> &'static str {
        match self {
            Gen::SqrtP => "p",
            Gen::SqrtQ => "q",
            Gen::SqrtLambda => "lambda",
            Gen::A => "a",
            Gen::B => "b",
        }
    }

    fn is_sqrt(self) -> bool {
        matches!(self, Gen::SqrtP | Gen::SqrtQ | Gen::SqrtLambda)
    }
}

/// Exponent vector, one entry per generator (sqrt-generators count halves).
pub type Exps = [i32; NVARS];

const ZERO_EXPS: Exps = [0; NVARS];

fn exps_add(a: &Exps, b: &Exps) -> Exps {
    let mut r = *a;
    for i in 0..NVARS {
        r[i] += b[i];
    }
    r
}

fn exps_sub(a: &Exps, b: &Exps) -> Exps {
    let mut r = *a;
    for i in 0..NVARS {
        r[i] -= b[i];
    }
    r
}

/// A Laurent polynomial: finitely many monomials with nonzero rational
/// coefficients, keyed by exponent vector in lexicographic order.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct LaurentPoly {
    terms: BTreeMap<Exps, BigRational>,
}

impl LaurentPoly {
    pub fn zero() -> Self {
        LaurentPoly {
            terms: BTreeMap::new(),
        }
    }

    pub fn one() -> Self {
        Self::constant(BigRational::one())
    }

    pub fn constant(c: BigRational) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(ZERO_EXPS, c);
        }
        LaurentPoly { terms }
    }

    pub fn from_int(n: i64) -> Self {
        Self::constant(BigRational::from_integer(BigInt::from(n)))
    }

    pub fn monomial(exps: Exps, c: BigRational) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(exps, c);
        }
        LaurentPoly { terms }
    }

    /// The generator `g` raised to an integer power of the *stored* exponent
    /// (for sqrt generators this is twice the nominal power).
    pub fn gen_pow(g: Gen, e: i32) -> Self {
        let mut exps = ZERO_EXPS;
        exps[g as usize] = e;
        Self::monomial(exps, BigRational::one())
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.terms.len() == 1
            && self
                .terms
                .get(&ZERO_EXPS)
                .map(|c| c.is_one())
                .unwrap_or(false)
    }

    pub fn is_constant(&self) -> bool {
        self.terms.is_empty() || (self.terms.len() == 1 && self.terms.contains_key(&ZERO_EXPS))
    }

    pub fn as_constant(&self) -> Option<BigRational> {
        if self.is_zero() {
            return Some(BigRational::zero());
        }
        if self.is_constant() {
            return self.terms.get(&ZERO_EXPS).cloned();
        }
        None
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn iter_terms(&self) -> impl Iterator<Item = (&Exps, &BigRational)> {
        self.terms.iter()
    }

    fn insert_add(&mut self, exps: Exps, c: BigRational) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(exps) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                let s = o.get() + &c;
                if s.is_zero() {
                    o.remove();
                } else {
                    *o.get_mut() = s;
                }
            }
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut r = self.clone();
        for (e, c) in &other.terms {
            r.insert_add(*e, c.clone());
        }
        r
    }

    pub fn sub(&self, other: &Self) -> Self {
        let mut r = self.clone();
        for (e, c) in &other.terms {
            r.insert_add(*e, -c.clone());
        }
        r
    }

    pub fn neg(&self) -> Self {
        LaurentPoly {
            terms: self.terms.iter().map(|(e, c)| (*e, -c.clone())).collect(),
        }
    }

    pub fn mul(&self, other: &Self) -> Self {
        if self.is_zero() || other.is_zero() {
            return Self::zero();
        }
        let mut r = LaurentPoly::zero();
        for (ea, ca) in &self.terms {
            for (eb, cb) in &other.terms {
                r.insert_add(exps_add(ea, eb), ca * cb);
            }
        }
        r
    }

    pub fn scale(&self, c: &BigRational) -> Self {
        if c.is_zero() {
            return Self::zero();
        }
        LaurentPoly {
            terms: self.terms.iter().map(|(e, k)| (*e, k * c)).collect(),
        }
    }

    /// Multiply by a single monomial (unit in the Laurent ring).
    pub fn mul_monomial(&self, exps: &Exps, c: &BigRational) -> Self {
        if c.is_zero() {
            return Self::zero();
        }
        LaurentPoly {
            terms: self
                .terms
                .iter()
                .map(|(e, k)| (exps_add(e, exps), k * c))
                .collect(),
        }
    }

    pub fn pow(&self, n: u32) -> Self {
        let mut r = Self::one();
        for _ in 0..n {
            r = r.mul(self);
        }
        r
    }

    /// Per-variable minimum exponent over all terms (0 for the zero poly).
    pub fn min_exps(&self) -> Exps {
        let mut m = ZERO_EXPS;
        let mut first = true;
        for e in self.terms.keys() {
            if first {
                m = *e;
                first = false;
            } else {
                for i in 0..NVARS {
                    m[i] = m[i].min(e[i]);
                }
            }
        }
        m
    }

    pub fn min_exp(&self, g: Gen) -> Option<i32> {
        self.terms.keys().map(|e| e[g as usize]).min()
    }

    pub fn max_exp(&self, g: Gen) -> Option<i32> {
        self.terms.keys().map(|e| e[g as usize]).max()
    }

    /// Leading (lex-largest) term.
    pub fn leading(&self) -> Option<(&Exps, &BigRational)> {
        self.terms.iter().next_back()
    }

    /// Keep only the terms whose exponent of `g` equals `k`, optionally
    /// clearing that exponent to zero in the result.
    pub fn slice_exp(&self, g: Gen, k: i32, strip: bool) -> Self {
        let mut r = LaurentPoly::zero();
        for (e, c) in &self.terms {
            if e[g as usize] == k {
                let mut e2 = *e;
                if strip {
                    e2[g as usize] = 0;
                }
                r.insert_add(e2, c.clone());
            }
        }
        r
    }

    /// Evaluate at rational values for the generators. Negative exponents
    /// require the corresponding value to be nonzero.
    pub fn eval(&self, vals: &[BigRational; NVARS]) -> Option<BigRational> {
        let mut acc = BigRational::zero();
        for (e, c) in &self.terms {
            let mut t = c.clone();
            for i in 0..NVARS {
                let k = e[i];
                if k == 0 {
                    continue;
                }
                if vals[i].is_zero() {
                    if k < 0 {
                        return None;
                    }
                    t = BigRational::zero();
                    break;
                }
                t *= vals[i].pow(k);
            }
            acc += t;
        }
        Some(acc)
    }

    // ---- ordinary-polynomial machinery (exponents assumed nonnegative) ----

    fn assert_ordinary(&self) {
        debug_assert!(self.terms.keys().all(|e| e.iter().all(|&k| k >= 0)));
    }

    /// Exact division of ordinary polynomials; `None` if not divisible.
    pub fn div_exact(&self, g: &Self) -> Option<Self> {
        assert!(!g.is_zero(), "division by zero polynomial");
        if self.is_zero() {
            return Some(Self::zero());
        }
        if let Some(c) = g.as_constant() {
            return Some(self.scale(&(BigRational::one() / c)));
        }
        let (glead_e, glead_c) = g.leading().unwrap();
        let glead_e = *glead_e;
        let glead_c = glead_c.clone();
        let mut rem = self.clone();
        let mut quot = LaurentPoly::zero();
        while !rem.is_zero() {
            let (rl_e, rl_c) = rem.leading().unwrap();
            let de = exps_sub(rl_e, &glead_e);
            if de.iter().any(|&k| k < 0) {
                return None;
            }
            let qc = rl_c / &glead_c;
            quot.insert_add(de, qc.clone());
            rem = rem.sub(&g.mul_monomial(&de, &qc));
        }
        Some(quot)
    }

    fn degree_in(&self, v: usize) -> i32 {
        self.terms.keys().map(|e| e[v]).max().unwrap_or(0)
    }

    /// View as univariate in variable `v`: coefficient polys keyed by degree.
    fn univar(&self, v: usize) -> BTreeMap<i32, LaurentPoly> {
        let mut m: BTreeMap<i32, LaurentPoly> = BTreeMap::new();
        for (e, c) in &self.terms {
            let d = e[v];
            let mut e2 = *e;
            e2[v] = 0;
            m.entry(d).or_default().insert_add(e2, c.clone());
        }
        m.retain(|_, p| !p.is_zero());
        m
    }

    fn univar_coeff(&self, v: usize, d: i32) -> LaurentPoly {
        let mut r = LaurentPoly::zero();
        for (e, c) in &self.terms {
            if e[v] == d {
                let mut e2 = *e;
                e2[v] = 0;
                r.insert_add(e2, c.clone());
            }
        }
        r
    }

    /// Content with respect to `v`: gcd of the univariate coefficients.
    fn content_in(&self, v: usize) -> LaurentPoly {
        let coeffs = self.univar(v);
        let mut g = LaurentPoly::zero();
        for p in coeffs.values() {
            g = if g.is_zero() { p.clone() } else { gcd_poly(&g, p) };
            if g.is_constant() {
                return LaurentPoly::one();
            }
        }
        if g.is_zero() {
            LaurentPoly::one()
        } else {
            g
        }
    }

    /// Normalize so the lex-leading coefficient is 1.
    fn monic(&self) -> LaurentPoly {
        match self.leading() {
            None => self.clone(),
            Some((_, c)) => {
                let inv = BigRational::one() / c.clone();
                self.scale(&inv)
            }
        }
    }
}

/// When both polynomials involve at most one variable and it is the same
/// one, report it.
fn single_shared_variable(a: &LaurentPoly, b: &LaurentPoly) -> Option<usize> {
    let mut var: Option<usize> = None;
    for p in [a, b] {
        for v in 0..NVARS {
            if p.degree_in(v) > 0 {
                match var {
                    None => var = Some(v),
                    Some(w) if w == v => {}
                    _ => return None,
                }
            }
        }
    }
    var
}

/// Evaluate every variable except `v` at a fixed generic point and take
/// the univariate gcd of the images. Sound coprimality proof: when both
/// leading v-degrees survive the substitution, a common factor with
/// positive v-degree would survive too.
fn images_are_coprime(a: &LaurentPoly, b: &LaurentPoly, v: usize) -> bool {
    const POINT: [i64; NVARS] = [2, 3, 5, 7, 11];
    let image = |p: &LaurentPoly| -> Option<BTreeMap<i32, BigRational>> {
        let mut out: BTreeMap<i32, BigRational> = BTreeMap::new();
        for (e, c) in p.iter_terms() {
            let mut val = c.clone();
            for (i, &pt) in POINT.iter().enumerate() {
                if i == v || e[i] == 0 {
                    continue;
                }
                val *= BigRational::from_integer(BigInt::from(pt)).pow(e[i]);
            }
            let entry = out.entry(e[v]).or_insert_with(BigRational::zero);
            *entry += val;
        }
        out.retain(|_, c| !c.is_zero());
        let deg = out.keys().next_back().copied().unwrap_or(0);
        if deg != p.degree_in(v) {
            return None; // leading coefficient degenerated; inconclusive
        }
        Some(out)
    };
    let (Some(ia), Some(ib)) = (image(a), image(b)) else {
        return false;
    };
    // Monic Euclid on the univariate images.
    let (mut r0, mut r1) = (ia, ib);
    let deg = |p: &BTreeMap<i32, BigRational>| p.keys().next_back().copied().unwrap_or(-1);
    if deg(&r0) < deg(&r1) {
        std::mem::swap(&mut r0, &mut r1);
    }
    while !r1.is_empty() {
        let d1 = deg(&r1);
        let lc1 = r1[&d1].clone();
        let mut r = r0;
        loop {
            let dr = deg(&r);
            if r.is_empty() || dr < d1 {
                break;
            }
            let lcr = r[&dr].clone();
            let factor = lcr / &lc1;
            for (k, c) in r1.clone() {
                let e = r.entry(k + dr - d1).or_insert_with(BigRational::zero);
                *e -= &factor * c;
            }
            r.retain(|_, c| !c.is_zero());
        }
        r0 = r1;
        r1 = r;
    }
    deg(&r0) == 0
}

/// Two active variables across both polynomials, with every term of each
/// polynomial having the same total degree in them.
fn shared_homogeneous_pair(a: &LaurentPoly, b: &LaurentPoly) -> Option<(usize, usize)> {
    let mut active = Vec::new();
    for v in 0..NVARS {
        if a.degree_in(v) > 0 || b.degree_in(v) > 0 {
            active.push(v);
        }
    }
    if active.len() != 2 {
        return None;
    }
    let (v1, v2) = (active[0], active[1]);
    for p in [a, b] {
        let mut total: Option<i32> = None;
        for (e, _) in p.iter_terms() {
            let t = e[v1] + e[v2];
            match total {
                None => total = Some(t),
                Some(d) if d == t => {}
                _ => return None,
            }
        }
    }
    Some((v1, v2))
}

/// Gcd of two bivariate homogeneous polynomials: strip the shared monomial
/// factor, dehomogenize (v1 = 1), take the univariate gcd in v2, and
/// rehomogenize to its degree.
fn homogeneous_gcd(a: &LaurentPoly, b: &LaurentPoly, v1: usize, v2: usize) -> LaurentPoly {
    let strip = |p: &LaurentPoly| -> (LaurentPoly, i32, i32) {
        let m1 = p.terms.keys().map(|e| e[v1]).min().unwrap_or(0);
        let m2 = p.terms.keys().map(|e| e[v2]).min().unwrap_or(0);
        let mut shift = ZERO_EXPS;
        shift[v1] = -m1;
        shift[v2] = -m2;
        (p.mul_monomial(&shift, &BigRational::one()), m1, m2)
    };
    let (ah, a1, a2) = strip(a);
    let (bh, b1, b2) = strip(b);
    let dehom = |p: &LaurentPoly| -> LaurentPoly {
        let mut out = LaurentPoly::zero();
        for (e, c) in p.iter_terms() {
            let mut e2 = *e;
            e2[v1] = 0;
            out.insert_add(e2, c.clone());
        }
        out
    };
    let au = dehom(&ah);
    let bu = dehom(&bh);
    let u = univar_gcd(&au, &bu, v2);
    let deg = u.degree_in(v2);
    let mut g = LaurentPoly::zero();
    for (e, c) in u.iter_terms() {
        let mut e2 = *e;
        e2[v1] = deg - e[v2];
        g.insert_add(e2, c.clone());
    }
    let mut mono = ZERO_EXPS;
    mono[v1] = a1.min(b1);
    mono[v2] = a2.min(b2);
    g.mul_monomial(&mono, &BigRational::one()).monic()
}

/// Monic Euclid for univariate polynomials over the rationals.
fn univar_gcd(a: &LaurentPoly, b: &LaurentPoly, v: usize) -> LaurentPoly {
    let mut r0 = a.monic();
    let mut r1 = b.monic();
    if r0.degree_in(v) < r1.degree_in(v) {
        std::mem::swap(&mut r0, &mut r1);
    }
    while !r1.is_zero() {
        // r0 mod r1 with r1 monic: subtract lc * x^delta * r1 repeatedly.
        let d1 = r1.degree_in(v);
        let mut r = r0;
        loop {
            if r.is_zero() {
                break;
            }
            let dr = r.degree_in(v);
            if dr < d1 {
                break;
            }
            let lc = r.univar_coeff(v, dr).as_constant().expect("univariate");
            let mut shift = ZERO_EXPS;
            shift[v] = dr - d1;
            r = r.sub(&r1.mul_monomial(&shift, &lc));
        }
        r0 = r1;
        r1 = r.monic();
    }
    r0.monic()
}

fn pow_poly(p: &LaurentPoly, n: u32) -> LaurentPoly {
    p.pow(n)
}

/// Exact pseudo-remainder: lc(b)^(delta+1) * a mod b in variable `v`,
/// with the multiplier count pinned so the subresultant divisions stay
/// exact.
fn prem_exact(a: &LaurentPoly, b: &LaurentPoly, v: usize, delta: u32) -> LaurentPoly {
    let db = b.degree_in(v);
    let lcb = b.univar_coeff(v, db);
    let mut r = a.clone();
    let mut e = delta as i64 + 1;
    loop {
        if r.is_zero() {
            break;
        }
        let dr = r.degree_in(v);
        if dr < db {
            break;
        }
        let lcr = r.univar_coeff(v, dr);
        let mut shift = ZERO_EXPS;
        shift[v] = dr - db;
        r = lcb
            .mul(&r)
            .sub(&lcr.mul(&b.mul_monomial(&shift, &BigRational::one())));
        e -= 1;
    }
    for _ in 0..e.max(0) {
        r = r.mul(&lcb);
    }
    r
}

/// GCD of two ordinary (nonnegative-exponent) polynomials over Q, normalized
/// to have lex-leading coefficient 1. gcd(0, b) = monic(b).
pub fn gcd_poly(a: &LaurentPoly, b: &LaurentPoly) -> LaurentPoly {
    gcd_poly_cached(a, b)
}

thread_local! {
    static GCD_MEMO: std::cell::RefCell<HashMap<(LaurentPoly, LaurentPoly), LaurentPoly>> =
        std::cell::RefCell::new(HashMap::new());
}

// The same (numerator, denominator) pairs recur constantly across the
// permutation sums, so a per-thread memo pays for itself quickly.
fn gcd_poly_cached(a: &LaurentPoly, b: &LaurentPoly) -> LaurentPoly {
    if a.is_zero() {
        return b.monic();
    }
    if b.is_zero() {
        return a.monic();
    }
    if a.is_constant() || b.is_constant() {
        return LaurentPoly::one();
    }
    let key = if a.terms <= b.terms {
        (a.clone(), b.clone())
    } else {
        (b.clone(), a.clone())
    };
    if let Some(hit) = GCD_MEMO.with(|m| m.borrow().get(&key).cloned()) {
        return hit;
    }
    let g = gcd_poly_inner(a, b);
    GCD_MEMO.with(|m| {
        let mut m = m.borrow_mut();
        if m.len() > 200_000 {
            m.clear();
        }
        m.insert(key, g.clone());
    });
    g
}

fn gcd_poly_inner(a: &LaurentPoly, b: &LaurentPoly) -> LaurentPoly {
    a.assert_ordinary();
    b.assert_ordinary();
    if a.is_zero() {
        return b.monic();
    }
    if b.is_zero() {
        return a.monic();
    }
    if a.is_constant() || b.is_constant() {
        return LaurentPoly::one();
    }
    if a == b {
        return a.monic();
    }
    // Univariate pairs take the plain monic Euclid, which avoids the
    // pseudo-remainder coefficient growth entirely.
    if let Some(v) = single_shared_variable(a, b) {
        let g = univar_gcd(a, b, v);
        debug_assert!(a.div_exact(&g).is_some() && b.div_exact(&g).is_some());
        return g;
    }
    // Bivariate homogeneous pairs (the (p,q)-case backbone: everything is
    // homogeneous in sqrt(p), sqrt(q)) reduce to univariate gcd by
    // dehomogenizing.
    if let Some((v1, v2)) = shared_homogeneous_pair(a, b) {
        let g = homogeneous_gcd(a, b, v1, v2);
        debug_assert!(a.div_exact(&g).is_some() && b.div_exact(&g).is_some());
        return g;
    }
    // Main variable: both must have positive degree in it; if none is shared,
    // recurse through the content of whichever poly has an unshared variable.
    let mut main: Option<usize> = None;
    let mut best = i32::MAX;
    for v in 0..NVARS {
        let da = a.degree_in(v);
        let db = b.degree_in(v);
        if da > 0 && db > 0 {
            let m = da.min(db);
            if m < best {
                best = m;
                main = Some(v);
            }
        }
    }
    let v = match main {
        Some(v) => v,
        None => {
            // No shared variable: reduce one side to its content in some
            // variable it actually uses, and recurse.
            for v in 0..NVARS {
                if a.degree_in(v) > 0 {
                    return gcd_poly(&a.content_in(v), b);
                }
            }
            unreachable!("non-constant polynomial with no variables");
        }
    };

    // Image shortcut: evaluate the other variables at a fixed generic
    // point. If both degrees in v survive and the univariate images are
    // coprime, any common factor is free of v, so the gcd reduces to the
    // contents; this avoids the pseudo-remainder cascade in the dominant
    // coprime case.
    if images_are_coprime(a, b, v) {
        return gcd_poly(&a.content_in(v), &b.content_in(v));
    }
    let cont_a = a.content_in(v);
    let cont_b = b.content_in(v);
    let c = gcd_poly(&cont_a, &cont_b);
    let pa = a.div_exact(&cont_a).expect("content divides");
    let pb = b.div_exact(&cont_b).expect("content divides");

    let (mut a2, mut b2) = if pa.degree_in(v) >= pb.degree_in(v) {
        (pa, pb)
    } else {
        (pb, pa)
    };
    // Subresultant remainder sequence: the divisors g * h^delta are exact
    // by theory, which keeps coefficient growth polynomial without any
    // per-step content recursion.
    let mut g_coef = LaurentPoly::one();
    let mut h_coef = LaurentPoly::one();
    loop {
        let delta = (a2.degree_in(v) - b2.degree_in(v)) as u32;
        let r = prem_exact(&a2, &b2, v, delta);
        if r.is_zero() {
            break;
        }
        let denom = g_coef.mul(&h_coef.pow(delta));
        let next = r.div_exact(&denom).expect("subresultant division is exact");
        a2 = std::mem::replace(&mut b2, next);
        g_coef = a2.univar_coeff(v, a2.degree_in(v));
        if delta >= 1 {
            let num = pow_poly(&g_coef, delta);
            let den = pow_poly(&h_coef, delta - 1);
            h_coef = num.div_exact(&den).expect("subresultant h update is exact");
        }
        if b2.degree_in(v) == 0 {
            break;
        }
    }
    if b2.degree_in(v) == 0 && !b2.is_zero() {
        // Coprime in v: only the content gcd survives.
        return c.monic();
    }
    let cont0 = b2.content_in(v);
    let g = c
        .mul(&b2.div_exact(&cont0).expect("content divides"))
        .monic();
    assert!(
        a.div_exact(&g).is_some() && b.div_exact(&g).is_some(),
        "gcd postcondition violated"
    );
    g
}

impl fmt::Debug for LaurentPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self)
    }
}

fn fmt_exponent(f: &mut fmt::Formatter<'_>, g: Gen, e: i32) -> fmt::Result {
    write!(f, "{}", g.base_name())?;
    let (num, den) = if g.is_sqrt() {
        if e % 2 == 0 {
            (e / 2, 1)
        } else {
            (e, 2)
        }
    } else {
        (e, 1)
    };
    if den == 1 && num == 1 {
        return Ok(());
    }
    if den == 1 {
        if num >= 0 {
            write!(f, "^{}", num)
        } else {
            write!(f, "^({})", num)
        }
    } else {
        write!(f, "^({}/{})", num, den)
    }
}

impl fmt::Display for LaurentPoly {
    /// Deterministic text form: terms in descending lex order, generators
    /// printed as p, q, lambda, a, b with halved exponents for the roots.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (e, c) in self.terms.iter().rev() {
            let neg = c.is_negative();
            let mag = c.abs();
            if first {
                if neg {
                    write!(f, "-")?;
                }
                first = false;
            } else if neg {
                write!(f, " - ")?;
            } else {
                write!(f, " + ")?;
            }
            let has_vars = e.iter().any(|&k| k != 0);
            if !has_vars || !mag.is_one() {
                write!(f, "{}", mag)?;
                if has_vars {
                    write!(f, "*")?;
                }
            }
            let mut first_var = true;
            for g in Gen::ALL {
                let k = e[g as usize];
                if k != 0 {
                    if !first_var {
                        write!(f, "*")?;
                    }
                    fmt_exponent(f, g, k)?;
                    first_var = false;
                }
            }
        }
        Ok(())
    }
}
