//! Constructors for the named operators: the super high-order Virasoro
//! family on the z/theta space, the W-family, angular momentum and
//! Hamiltonian on the Landau Fock space, and the raw oscillators.

use crate::backend::{BackendError, DeformationSpec};
use crate::halfint::HalfInt;
use crate::scalar::Scalar;
use crate::shiftalg::{CoeffFn, GradedOperator, SpaceSignature, MAX_BOSONIC};
use std::fmt;
use std::sync::Arc;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GenError {
    #[error("index domain violated: {0}")]
    IndexDomain(String),
    #[error("syntax error at position {pos}: {msg}")]
    Syntax { pos: usize, msg: String },
    #[error(transparent)]
    Backend(#[from] BackendError),
}

/// Bosonic Landau registers.
pub const REG_A: usize = 0;
pub const REG_B: usize = 1;
/// Fermionic Landau registers (bit positions in the cell masks).
pub const FER_ALPHA: u8 = 0;
pub const FER_BETA: u8 = 1;

/// Raw oscillator names on the Landau space.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum OscKind {
    A,
    ADag,
    B,
    BDag,
    Alpha,
    AlphaDag,
    Beta,
    BetaDag,
}

/// Every named generator in the catalog.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum GeneratorId {
    /// L_m^s on the z/theta space.
    VirL { m: i64, s: u32 },
    /// Lbar_m^s.
    VirLbar { m: i64, s: u32 },
    /// H_r^(alpha+1/2).
    VirH { r: i64, alpha: u32 },
    /// Hbar_r^(alpha+1/2).
    VirHbar { r: i64, alpha: u32 },
    /// W^B_{m,r} = bdag^(m+r-1) b^(r-1).
    WB { m: i64, r: u32 },
    /// Wbar^B_{m,r} = W^B betadag beta.
    WBbar { m: i64, r: u32 },
    /// W^F_{m,r} = W^B-word beta.
    WF { m: i64, r: u32 },
    /// Wbar^F_{m,r} = W^B-word betadag.
    WFbar { m: i64, r: u32 },
    /// Angular momentum on the Landau space.
    Lperp,
    /// Hamiltonian (in units of B/m = 1).
    Ham,
    /// Raw oscillator.
    Osc(OscKind),
}

impl GeneratorId {
    /// Mode weight used by the even-order bracket prefactor: the mode
    /// label for W and Virasoro generators, the angular-momentum grading
    /// for raw oscillators, zero for the conserved scalars.
    pub fn weight(&self) -> HalfInt {
        match self {
            GeneratorId::VirL { m, .. } | GeneratorId::VirLbar { m, .. } => HalfInt::from_int(*m),
            GeneratorId::VirH { r, .. } | GeneratorId::VirHbar { r, .. } => HalfInt::from_int(*r),
            GeneratorId::WB { m, .. }
            | GeneratorId::WBbar { m, .. }
            | GeneratorId::WF { m, .. }
            | GeneratorId::WFbar { m, .. } => HalfInt::from_int(*m),
            GeneratorId::Lperp | GeneratorId::Ham => HalfInt::ZERO,
            GeneratorId::Osc(k) => match k {
                OscKind::BDag => HalfInt::from_int(1),
                OscKind::B => HalfInt::from_int(-1),
                OscKind::ADag => HalfInt::from_int(-1),
                OscKind::A => HalfInt::from_int(1),
                OscKind::BetaDag => HalfInt::half(),
                OscKind::Beta => -HalfInt::half(),
                OscKind::AlphaDag => -HalfInt::half(),
                OscKind::Alpha => HalfInt::half(),
            },
        }
    }

    pub fn validate(&self) -> Result<(), GenError> {
        match self {
            GeneratorId::WB { m, r }
            | GeneratorId::WBbar { m, r }
            | GeneratorId::WF { m, r }
            | GeneratorId::WFbar { m, r } => {
                if *r < 1 {
                    return Err(GenError::IndexDomain(format!("r >= 1 (got r={})", r)));
                }
                if *m + (*r as i64) < 1 {
                    return Err(GenError::IndexDomain(format!(
                        "m+r >= 1 (got m={}, r={})",
                        m, r
                    )));
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    /// The space the generator lives on.
    pub fn space(&self) -> Arc<SpaceSignature> {
        match self {
            GeneratorId::VirL { .. }
            | GeneratorId::VirLbar { .. }
            | GeneratorId::VirH { .. }
            | GeneratorId::VirHbar { .. } => SpaceSignature::z_space(),
            _ => SpaceSignature::landau(),
        }
    }

    /// Build the operator realization for the given backend.
    pub fn build(&self, spec: &DeformationSpec) -> Result<GradedOperator, GenError> {
        self.validate()?;
        match *self {
            GeneratorId::Osc(k) => Ok(make_oscillator(k, spec)?),
            GeneratorId::WB { m, r } => make_w(WKind::B, m, r, spec),
            GeneratorId::WBbar { m, r } => make_w(WKind::Bbar, m, r, spec),
            GeneratorId::WF { m, r } => make_w(WKind::F, m, r, spec),
            GeneratorId::WFbar { m, r } => make_w(WKind::Fbar, m, r, spec),
            GeneratorId::VirL { m, s } => make_virasoro(*self, m, s, spec, None),
            GeneratorId::VirLbar { m, s } => make_virasoro(*self, m, s, spec, None),
            GeneratorId::VirH { r, alpha } => make_virasoro(*self, r, alpha, spec, None),
            GeneratorId::VirHbar { r, alpha } => make_virasoro(*self, r, alpha, spec, None),
            GeneratorId::Lperp => Ok(make_landau_scalars().0),
            GeneratorId::Ham => Ok(make_landau_scalars().1),
        }
    }
}

/// W-operator flavors.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum WKind {
    B,
    Bbar,
    F,
    Fbar,
}

impl WKind {
    pub fn parity(self) -> u8 {
        match self {
            WKind::B | WKind::Bbar => 0,
            WKind::F | WKind::Fbar => 1,
        }
    }

    pub fn id(self, m: i64, r: u32) -> GeneratorId {
        match self {
            WKind::B => GeneratorId::WB { m, r },
            WKind::Bbar => GeneratorId::WBbar { m, r },
            WKind::F => GeneratorId::WF { m, r },
            WKind::Fbar => GeneratorId::WFbar { m, r },
        }
    }
}

/// Jordan-Wigner sign: anticommuting an operator on fermionic register k
/// past the occupied registers below it.
fn jw_sign(mask: u8, k: u8) -> i64 {
    let below = mask & ((1 << k) - 1);
    if below.count_ones() % 2 == 0 {
        1
    } else {
        -1
    }
}

/// Raw oscillators on the Landau space: bosonic raising has coefficient 1,
/// bosonic lowering carries the deformed number [nu]; the classical
/// backend reproduces the undeformed oscillator exactly. Fermionic raising
/// and lowering satisfy {f, fdag} = 1 with f^2 = 0.
pub fn make_oscillator(kind: OscKind, spec: &DeformationSpec) -> Result<GradedOperator, BackendError> {
    let sig = SpaceSignature::landau();
    let fdim = sig.fermion_dim();
    let mut terms: Vec<(u8, u8, [i32; MAX_BOSONIC], CoeffFn)> = Vec::new();
    let bosonic = |reg: usize, raise: bool| -> Result<Vec<(u8, u8, [i32; MAX_BOSONIC], CoeffFn)>, BackendError> {
        let mut out = Vec::new();
        let mut off = [0i32; MAX_BOSONIC];
        off[reg] = if raise { 1 } else { -1 };
        let coeff = if raise {
            CoeffFn::one()
        } else {
            CoeffFn::number_fn(spec, reg)?
        };
        for f in 0..fdim {
            out.push((f, f, off, coeff.clone()));
        }
        Ok(out)
    };
    let fermionic = |k: u8, raise: bool| -> Vec<(u8, u8, [i32; MAX_BOSONIC], CoeffFn)> {
        let mut out = Vec::new();
        for col in 0..fdim {
            let occupied = col & (1 << k) != 0;
            if raise == occupied {
                continue;
            }
            let row = col ^ (1 << k);
            let sign = jw_sign(col, k);
            out.push((
                row,
                col,
                [0; MAX_BOSONIC],
                CoeffFn::constant(Scalar::from_int(sign)),
            ));
        }
        out
    };
    let parity;
    match kind {
        OscKind::A => {
            terms.extend(bosonic(REG_A, false)?);
            parity = 0;
        }
        OscKind::ADag => {
            terms.extend(bosonic(REG_A, true)?);
            parity = 0;
        }
        OscKind::B => {
            terms.extend(bosonic(REG_B, false)?);
            parity = 0;
        }
        OscKind::BDag => {
            terms.extend(bosonic(REG_B, true)?);
            parity = 0;
        }
        OscKind::Alpha => {
            terms.extend(fermionic(FER_ALPHA, false));
            parity = 1;
        }
        OscKind::AlphaDag => {
            terms.extend(fermionic(FER_ALPHA, true));
            parity = 1;
        }
        OscKind::Beta => {
            terms.extend(fermionic(FER_BETA, false));
            parity = 1;
        }
        OscKind::BetaDag => {
            terms.extend(fermionic(FER_BETA, true));
            parity = 1;
        }
    }
    Ok(GradedOperator::from_terms(sig, parity, terms))
}

/// W-operators: the b-register shifts by m with the falling-factorial
/// coefficient A^(r-1)(nu_b); the beta-register structure selects the
/// flavor. Built directly in normal form; a test pins this against the
/// composition of raw oscillators.
pub fn make_w(kind: WKind, m: i64, r: u32, spec: &DeformationSpec) -> Result<GradedOperator, GenError> {
    kind.id(m, r).validate()?;
    let sig = SpaceSignature::landau();
    let coeff = CoeffFn::falling_factorial_fn(spec, REG_B, r - 1).map_err(GenError::from)?;
    let mut off = [0i32; MAX_BOSONIC];
    off[REG_B] = i32::try_from(m).expect("mode fits in i32");
    let beta_bit = 1u8 << FER_BETA;
    let mut terms: Vec<(u8, u8, [i32; MAX_BOSONIC], CoeffFn)> = Vec::new();
    let fdim = sig.fermion_dim();
    match kind {
        WKind::B => {
            for f in 0..fdim {
                terms.push((f, f, off, coeff.clone()));
            }
        }
        WKind::Bbar => {
            // Projector onto beta-occupied states.
            for f in 0..fdim {
                if f & beta_bit != 0 {
                    terms.push((f, f, off, coeff.clone()));
                }
            }
        }
        WKind::F => {
            // The beta lowering, with its Jordan-Wigner sign.
            for col in 0..fdim {
                if col & beta_bit != 0 {
                    let row = col ^ beta_bit;
                    let sign = jw_sign(col, FER_BETA);
                    terms.push((row, col, off, coeff.scale(&Scalar::from_int(sign))));
                }
            }
        }
        WKind::Fbar => {
            for col in 0..fdim {
                if col & beta_bit == 0 {
                    let row = col ^ beta_bit;
                    let sign = jw_sign(col, FER_BETA);
                    terms.push((row, col, off, coeff.scale(&Scalar::from_int(sign))));
                }
            }
        }
    }
    Ok(GradedOperator::from_terms(sig, kind.parity(), terms))
}

/// The super high-order Virasoro generators on the z/theta space. The
/// optional `k_fn` left prefactor is the script-K(P,Q) factor; it defaults
/// to 1.
pub fn make_virasoro(
    id: GeneratorId,
    mode: i64,
    depth: u32,
    spec: &DeformationSpec,
    k_fn: Option<&CoeffFn>,
) -> Result<GradedOperator, GenError> {
    let sig = SpaceSignature::z_space();
    let falling = CoeffFn::falling_factorial_fn(spec, 0, depth).map_err(GenError::from)?;
    let mut off = [0i32; MAX_BOSONIC];
    off[0] = i32::try_from(mode).expect("mode fits in i32");
    let sign = if depth % 2 == 0 { 1 } else { -1 };
    let d = depth as i64;
    let op = match id {
        GeneratorId::VirL { .. } => {
            // (-1)^s lambda^(s-1/2) z^(m+s) D^s: even, both theta cells.
            let c = &Scalar::from_int(sign) * &Scalar::lambda_pow(HalfInt::new(2 * d - 1));
            let f = falling.scale(&c);
            GradedOperator::from_terms(sig, 0, [(0u8, 0u8, off, f.clone()), (1u8, 1u8, off, f)])
        }
        GeneratorId::VirLbar { .. } => {
            // Adds the theta d/dtheta projector: only the theta-theta cell.
            let c = &Scalar::from_int(sign) * &Scalar::lambda_pow(HalfInt::new(2 * d + 3));
            GradedOperator::from_terms(sig, 0, [(1u8, 1u8, off, falling.scale(&c))])
        }
        GeneratorId::VirH { .. } => {
            // (-1)^(alpha+1) lambda^(alpha+1/2) z^(r+alpha) d/dtheta D^alpha:
            // maps the theta component to the non-theta one.
            let c = &Scalar::from_int(-sign) * &Scalar::lambda_pow(HalfInt::new(2 * d + 1));
            GradedOperator::from_terms(sig, 1, [(0u8, 1u8, off, falling.scale(&c))])
        }
        GeneratorId::VirHbar { .. } => {
            // theta multiplication instead of the theta derivative.
            let c = &Scalar::from_int(-sign) * &Scalar::lambda_pow(HalfInt::new(2 * d + 1));
            GradedOperator::from_terms(sig, 1, [(1u8, 0u8, off, falling.scale(&c))])
        }
        _ => unreachable!("make_virasoro called with a non-Virasoro id"),
    };
    Ok(match k_fn {
        Some(k) => op.apply_left_diag(k),
        None => op,
    })
}

/// Angular momentum and Hamiltonian, with undeformed occupation counters:
/// L_perp = (n_b + eps_beta/2) - (n_a + eps_alpha/2), H = n_a + eps_alpha.
/// Their commutators with any shift operator are then pure grading
/// statements, exact in every backend.
pub fn make_landau_scalars() -> (GradedOperator, GradedOperator) {
    let sig = SpaceSignature::landau();
    let fdim = sig.fermion_dim();
    let half = Scalar::from_rational(num_rational::BigRational::new(1.into(), 2.into()));
    let mut lperp_terms = Vec::new();
    let mut ham_terms = Vec::new();
    for f in 0..fdim {
        let eps_alpha = (f >> FER_ALPHA) & 1;
        let eps_beta = (f >> FER_BETA) & 1;
        // L_perp cell: nu_b - nu_a + (eps_beta - eps_alpha)/2.
        let mut lp = CoeffFn::nu_var(REG_B).sub(&CoeffFn::nu_var(REG_A));
        if eps_beta == 1 {
            lp = lp.add(&CoeffFn::constant(half.clone()));
        }
        if eps_alpha == 1 {
            lp = lp.sub(&CoeffFn::constant(half.clone()));
        }
        if !lp.is_zero() {
            lperp_terms.push((f, f, [0i32; MAX_BOSONIC], lp));
        }
        // H cell: nu_a + eps_alpha.
        let mut h = CoeffFn::nu_var(REG_A);
        if eps_alpha == 1 {
            h = h.add(&CoeffFn::one());
        }
        if !h.is_zero() {
            ham_terms.push((f, f, [0i32; MAX_BOSONIC], h));
        }
    }
    (
        GradedOperator::from_terms(sig.clone(), 0, lperp_terms),
        GradedOperator::from_terms(sig, 0, ham_terms),
    )
}

// ---------------------------------------------------------------------
// Text grammar: "WB(m=2,r=3)" or positional "WB(2,3)", "L(m=-1,s=2)",
// "Hbar(r=0,alpha=1)", "Lperp", "Ham", "b", "bdag", "beta", "betadag", ...
// ---------------------------------------------------------------------

impl fmt::Display for GeneratorId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GeneratorId::VirL { m, s } => write!(f, "L(m={},s={})", m, s),
            GeneratorId::VirLbar { m, s } => write!(f, "Lbar(m={},s={})", m, s),
            GeneratorId::VirH { r, alpha } => write!(f, "H(r={},alpha={})", r, alpha),
            GeneratorId::VirHbar { r, alpha } => write!(f, "Hbar(r={},alpha={})", r, alpha),
            GeneratorId::WB { m, r } => write!(f, "WB({},{})", m, r),
            GeneratorId::WBbar { m, r } => write!(f, "WBbar({},{})", m, r),
            GeneratorId::WF { m, r } => write!(f, "WF({},{})", m, r),
            GeneratorId::WFbar { m, r } => write!(f, "WFbar({},{})", m, r),
            GeneratorId::Lperp => write!(f, "Lperp"),
            GeneratorId::Ham => write!(f, "Ham"),
            GeneratorId::Osc(k) => {
                let s = match k {
                    OscKind::A => "a",
                    OscKind::ADag => "adag",
                    OscKind::B => "b",
                    OscKind::BDag => "bdag",
                    OscKind::Alpha => "alpha",
                    OscKind::AlphaDag => "alphadag",
                    OscKind::Beta => "beta",
                    OscKind::BetaDag => "betadag",
                };
                write!(f, "{}", s)
            }
        }
    }
}

/// Parse one generator expression. Arguments may be positional or named;
/// named arguments may come in any order.
pub fn parse_generator(text: &str) -> Result<GeneratorId, GenError> {
    let s = text.trim();
    let syntax = |pos: usize, msg: &str| GenError::Syntax {
        pos,
        msg: msg.to_string(),
    };
    let (head, args) = match s.find('(') {
        None => (s, None),
        Some(i) => {
            if !s.ends_with(')') {
                return Err(syntax(s.len(), "expected closing ')'"));
            }
            (&s[..i], Some(&s[i + 1..s.len() - 1]))
        }
    };
    let parse_args = |args: Option<&str>, names: [&str; 2]| -> Result<(i64, i64), GenError> {
        let args = args.ok_or_else(|| syntax(head.len(), "expected '(' with two arguments"))?;
        let parts: Vec<&str> = args.split(',').map(|p| p.trim()).collect();
        if parts.len() != 2 {
            return Err(syntax(head.len() + 1, "expected exactly two arguments"));
        }
        let mut vals: [Option<i64>; 2] = [None, None];
        for (k, part) in parts.iter().enumerate() {
            let (slot, text) = match part.split_once('=') {
                None => (k, *part),
                Some((name, v)) => {
                    let name = name.trim();
                    let slot = names
                        .iter()
                        .position(|n| *n == name)
                        .ok_or_else(|| syntax(head.len() + 1, &format!("unknown argument '{}'", name)))?;
                    (slot, v)
                }
            };
            let v: i64 = text
                .trim()
                .parse()
                .map_err(|_| syntax(head.len() + 1, &format!("bad integer '{}'", text.trim())))?;
            if vals[slot].is_some() {
                return Err(syntax(head.len() + 1, &format!("argument '{}' given twice", names[slot])));
            }
            vals[slot] = Some(v);
        }
        Ok((vals[0].unwrap(), vals[1].unwrap()))
    };
    let nonneg = |v: i64, name: &str| -> Result<u32, GenError> {
        u32::try_from(v).map_err(|_| GenError::IndexDomain(format!("{} >= 0 (got {})", name, v)))
    };
    let id = match head {
        "L" => {
            let (m, sdep) = parse_args(args, ["m", "s"])?;
            GeneratorId::VirL { m, s: nonneg(sdep, "s")? }
        }
        "Lbar" => {
            let (m, sdep) = parse_args(args, ["m", "s"])?;
            GeneratorId::VirLbar { m, s: nonneg(sdep, "s")? }
        }
        "H" => {
            let (r, al) = parse_args(args, ["r", "alpha"])?;
            GeneratorId::VirH { r, alpha: nonneg(al, "alpha")? }
        }
        "Hbar" => {
            let (r, al) = parse_args(args, ["r", "alpha"])?;
            GeneratorId::VirHbar { r, alpha: nonneg(al, "alpha")? }
        }
        "WB" | "WBbar" | "WF" | "WFbar" => {
            let (m, r) = parse_args(args, ["m", "r"])?;
            let r = nonneg(r, "r")?;
            match head {
                "WB" => GeneratorId::WB { m, r },
                "WBbar" => GeneratorId::WBbar { m, r },
                "WF" => GeneratorId::WF { m, r },
                _ => GeneratorId::WFbar { m, r },
            }
        }
        "Lperp" => GeneratorId::Lperp,
        "Ham" => GeneratorId::Ham,
        "a" => GeneratorId::Osc(OscKind::A),
        "adag" => GeneratorId::Osc(OscKind::ADag),
        "b" => GeneratorId::Osc(OscKind::B),
        "bdag" => GeneratorId::Osc(OscKind::BDag),
        "alpha" => GeneratorId::Osc(OscKind::Alpha),
        "alphadag" => GeneratorId::Osc(OscKind::AlphaDag),
        "beta" => GeneratorId::Osc(OscKind::Beta),
        "betadag" => GeneratorId::Osc(OscKind::BetaDag),
        other => return Err(syntax(0, &format!("unknown generator '{}'", other))),
    };
    id.validate()?;
    Ok(id)
}

/// Parse a comma-separated list of generator expressions (commas inside
/// parentheses belong to the arguments).
pub fn parse_generator_list(text: &str) -> Result<Vec<GeneratorId>, GenError> {
    let mut out = Vec::new();
    let mut depth = 0usize;
    let mut start = 0usize;
    for (i, ch) in text.char_indices() {
        match ch {
            '(' => depth += 1,
            ')' => {
                depth = depth.checked_sub(1).ok_or(GenError::Syntax {
                    pos: i,
                    msg: "unbalanced ')'".into(),
                })?
            }
            ',' if depth == 0 => {
                out.push(parse_generator(&text[start..i])?);
                start = i + 1;
            }
            _ => {}
        }
    }
    if !text[start..].trim().is_empty() {
        out.push(parse_generator(&text[start..])?);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::backend::DeformationSpec;

    #[test]
    fn classical_b_commutator_is_identity() {
        let spec = DeformationSpec::classical();
        let b = make_oscillator(OscKind::B, &spec).unwrap();
        let bd = make_oscillator(OscKind::BDag, &spec).unwrap();
        assert_eq!(
            b.graded_commutator(&bd),
            GradedOperator::identity(SpaceSignature::landau())
        );
        let a = make_oscillator(OscKind::A, &spec).unwrap();
        let ad = make_oscillator(OscKind::ADag, &spec).unwrap();
        assert_eq!(
            a.graded_commutator(&ad),
            GradedOperator::identity(SpaceSignature::landau())
        );
    }

    #[test]
    fn fermionic_algebra() {
        let spec = DeformationSpec::pq_case();
        let beta = make_oscillator(OscKind::Beta, &spec).unwrap();
        let betad = make_oscillator(OscKind::BetaDag, &spec).unwrap();
        let alpha = make_oscillator(OscKind::Alpha, &spec).unwrap();
        let alphad = make_oscillator(OscKind::AlphaDag, &spec).unwrap();
        let id = GradedOperator::identity(SpaceSignature::landau());
        // {beta, betadag} = {alpha, alphadag} = 1.
        assert_eq!(beta.graded_commutator(&betad), id);
        assert_eq!(alpha.graded_commutator(&alphad), id);
        // Nilpotency and cross anticommutators.
        assert!(beta.compose(&beta).is_zero());
        assert!(betad.compose(&betad).is_zero());
        assert!(alpha.graded_commutator(&beta).is_zero());
        assert!(alpha.graded_commutator(&betad).is_zero());
    }

    #[test]
    fn deformed_number_operator_from_composition() {
        // bdag . b is diagonal [nu] on the b register.
        let spec = DeformationSpec::pq_case();
        let b = make_oscillator(OscKind::B, &spec).unwrap();
        let bd = make_oscillator(OscKind::BDag, &spec).unwrap();
        let num = bd.compose(&b);
        let number = CoeffFn::number_fn(&spec, REG_B).unwrap();
        let sig = SpaceSignature::landau();
        let expect = GradedOperator::from_terms(
            sig.clone(),
            0,
            (0..sig.fermion_dim()).map(|f| (f, f, [0i32; MAX_BOSONIC], number.clone())),
        );
        assert_eq!(num, expect);
    }

    #[test]
    fn w_matches_oscillator_word() {
        // W^B_{m,r} = bdag^(m+r-1) b^(r-1), checked by composing the raw
        // oscillators; same for the dressed flavors.
        let spec = DeformationSpec::q_case();
        let b = make_oscillator(OscKind::B, &spec).unwrap();
        let bd = make_oscillator(OscKind::BDag, &spec).unwrap();
        let beta = make_oscillator(OscKind::Beta, &spec).unwrap();
        let betad = make_oscillator(OscKind::BetaDag, &spec).unwrap();
        for (m, r) in [(1i64, 1u32), (0, 2), (2, 3), (-1, 2), (-2, 3)] {
            let mut word = GradedOperator::identity(SpaceSignature::landau());
            for _ in 0..(m + r as i64 - 1) {
                word = word.compose(&bd);
            }
            for _ in 0..(r - 1) {
                word = word.compose(&b);
            }
            assert_eq!(make_w(WKind::B, m, r, &spec).unwrap(), word, "WB({},{})", m, r);
            assert_eq!(
                make_w(WKind::Bbar, m, r, &spec).unwrap(),
                word.compose(&betad).compose(&beta)
            );
            assert_eq!(make_w(WKind::F, m, r, &spec).unwrap(), word.compose(&beta));
            assert_eq!(make_w(WKind::Fbar, m, r, &spec).unwrap(), word.compose(&betad));
        }
    }

    #[test]
    fn w_parity_and_domain() {
        let spec = DeformationSpec::classical();
        assert_eq!(make_w(WKind::F, 2, 1, &spec).unwrap().parity(), 1);
        assert_eq!(make_w(WKind::Bbar, 2, 1, &spec).unwrap().parity(), 0);
        assert!(matches!(
            make_w(WKind::B, 0, 0, &spec),
            Err(GenError::IndexDomain(_))
        ));
        assert!(matches!(
            make_w(WKind::B, -3, 2, &spec),
            Err(GenError::IndexDomain(_))
        ));
    }

    #[test]
    fn virasoro_action_on_basis() {
        // L_m^0 z^k = lambda^(-1/2) z^(m+k); L_m^1 z^k = -lambda^(1/2) [k] z^(m+k).
        let spec = DeformationSpec::pq_case();
        let l0 = GeneratorId::VirL { m: 3, s: 0 }.build(&spec).unwrap();
        let sig = SpaceSignature::z_space();
        let lam = |h: i64| Scalar::lambda_pow(HalfInt::new(h));
        let expect0 = GradedOperator::from_terms(
            sig.clone(),
            0,
            [
                (0u8, 0u8, [3, 0], CoeffFn::constant(lam(-1))),
                (1u8, 1u8, [3, 0], CoeffFn::constant(lam(-1))),
            ],
        );
        assert_eq!(l0, expect0);
        let l1 = GeneratorId::VirL { m: 3, s: 1 }.build(&spec).unwrap();
        let num = CoeffFn::number_fn(&spec, 0).unwrap();
        let c = num.scale(&-&lam(1));
        let expect1 = GradedOperator::from_terms(
            sig.clone(),
            0,
            [(0u8, 0u8, [3, 0], c.clone()), (1u8, 1u8, [3, 0], c)],
        );
        assert_eq!(l1, expect1);
        // Parity of the H family is odd.
        assert_eq!(
            GeneratorId::VirH { r: 0, alpha: 1 }.build(&spec).unwrap().parity(),
            1
        );
    }

    #[test]
    fn hbar_h_anticommutator_vanishes() {
        // Hbar with Hbar: two theta-multiplications square to zero.
        let spec = DeformationSpec::q_case();
        let h1 = GeneratorId::VirHbar { r: 1, alpha: 0 }.build(&spec).unwrap();
        let h2 = GeneratorId::VirHbar { r: -1, alpha: 2 }.build(&spec).unwrap();
        assert!(h1.graded_commutator(&h2).is_zero());
    }

    #[test]
    fn landau_scalars_grade_the_w_family() {
        let (lperp, ham) = make_landau_scalars();
        for spec in [
            DeformationSpec::classical(),
            DeformationSpec::q_case(),
            DeformationSpec::pq_case(),
        ] {
            for m in -2..=2i64 {
                for r in 1..=3u32 {
                    if m + (r as i64) < 1 {
                        continue;
                    }
                    let wb = make_w(WKind::B, m, r, &spec).unwrap();
                    // [H, W] = 0: conserved operators.
                    assert!(ham.graded_commutator(&wb).is_zero());
                    // [Lperp, W^B] = m W^B.
                    assert_eq!(
                        lperp.graded_commutator(&wb),
                        wb.scale(&Scalar::from_int(m))
                    );
                    let wf = make_w(WKind::F, m, r, &spec).unwrap();
                    let wfbar = make_w(WKind::Fbar, m, r, &spec).unwrap();
                    let wbbar = make_w(WKind::Bbar, m, r, &spec).unwrap();
                    assert!(ham.graded_commutator(&wf).is_zero());
                    assert!(ham.graded_commutator(&wfbar).is_zero());
                    assert!(ham.graded_commutator(&wbbar).is_zero());
                    // Half-integer gradings for the fermionic flavors.
                    let half = Scalar::from_rational(num_rational::BigRational::new(1.into(), 2.into()));
                    assert_eq!(
                        lperp.graded_commutator(&wf),
                        wf.scale(&(&Scalar::from_int(m) - &half))
                    );
                    assert_eq!(
                        lperp.graded_commutator(&wfbar),
                        wfbar.scale(&(&Scalar::from_int(m) + &half))
                    );
                    assert_eq!(lperp.graded_commutator(&wbbar), wbbar.scale(&Scalar::from_int(m)));
                }
            }
        }
        // [Lperp, bdag] = bdag: the basic grading.
        let spec = DeformationSpec::pq_case();
        let bd = make_oscillator(OscKind::BDag, &spec).unwrap();
        assert_eq!(lperp.graded_commutator(&bd), bd);
    }

    #[test]
    fn grammar_round_trip() {
        let cases = [
            "WB(m=2,r=3)",
            "WFbar(-1,2)",
            "L(m=-1,s=2)",
            "Hbar(r=0,alpha=1)",
            "Lperp",
            "Ham",
            "betadag",
        ];
        for c in cases {
            let id = parse_generator(c).unwrap();
            let printed = id.to_string();
            assert_eq!(parse_generator(&printed).unwrap(), id, "{}", c);
        }
        assert_eq!(
            parse_generator("WB(m=2,r=3)").unwrap(),
            GeneratorId::WB { m: 2, r: 3 }
        );
        assert_eq!(
            parse_generator("Hbar(r=0,alpha=1)").unwrap(),
            GeneratorId::VirHbar { r: 0, alpha: 1 }
        );
        // Named arguments in either order.
        assert_eq!(
            parse_generator("WB(r=3,m=2)").unwrap(),
            GeneratorId::WB { m: 2, r: 3 }
        );
        // Domain error names the constraint.
        let err = parse_generator("WB(m=0,r=0)").unwrap_err();
        assert!(matches!(err, GenError::IndexDomain(ref s) if s.contains("r >= 1")));
        let err = parse_generator("WB(m=-4,r=2)").unwrap_err();
        assert!(matches!(err, GenError::IndexDomain(ref s) if s.contains("m+r >= 1")));
        // List parsing respects nested commas.
        let l = parse_generator_list("WB(1,2),WB(2,2)").unwrap();
        assert_eq!(l.len(), 2);
    }
}
