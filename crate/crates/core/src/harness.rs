//! Suite expansion, parallel execution and deterministic reporting.
//!
//! A work unit is one (relation, parameter tuple) or one identity
//! instance. Every unit derives its random stream from the suite seed and
//! its own id, so reports are byte-identical across worker counts and
//! runs.

use crate::backend::DeformationSpec;
use crate::brackets::{
    check_fi3, check_fi_2n, check_gbi_gsbi, check_gsji, check_skew, permutations, BracketInput,
    IdentityCheck, OpArena,
};
use crate::catalog::structure::{Alg3Algebra, LinComb, StructKey, Sub2nAlgebra, Witt3Algebra};
use crate::catalog::{compare, Family, RelationInstance, RepairFlags, Status};
use crate::generators::WKind;
use crate::rng::SplitMix64;
use crate::sampling;
use crate::scalar::Scalar;
use crate::shiftalg::matrix::{ExactMatrix, SafeWindow};
use crate::shiftalg::GradedOperator;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("invalid configuration: {0}")]
    Invalid(String),
    #[error("reports have different configurations; refusing to diff")]
    ConfigMismatch,
}

// RepairFlags lives in the catalog; give it serde here via a mirror.
mod repair_serde {
    use super::*;

    #[derive(Serialize, Deserialize)]
    struct Flags {
        sum_factor_inside: bool,
        swapped_sum_bound: bool,
        nalg_derived: bool,
    }

    pub fn serialize<S: serde::Serializer>(r: &RepairFlags, s: S) -> Result<S::Ok, S::Error> {
        Flags {
            sum_factor_inside: r.sum_factor_inside,
            swapped_sum_bound: r.swapped_sum_bound,
            nalg_derived: r.nalg_derived,
        }
        .serialize(s)
    }

    pub fn deserialize<'de, D: serde::Deserializer<'de>>(d: D) -> Result<RepairFlags, D::Error> {
        let f = Flags::deserialize(d)?;
        Ok(RepairFlags {
            sum_factor_inside: f.sum_factor_inside,
            swapped_sum_bound: f.swapped_sum_bound,
            nalg_derived: f.nalg_derived,
        })
    }
}

fn default_repairs() -> RepairFlags {
    RepairFlags::default()
}

/// Inclusive integer range in a parameter grid.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Range {
    pub lo: i64,
    pub hi: i64,
}

impl Range {
    pub fn new(lo: i64, hi: i64) -> Self {
        Range { lo, hi }
    }

    fn values(&self) -> impl Iterator<Item = i64> {
        self.lo..=self.hi
    }

    fn len(&self) -> usize {
        (self.hi - self.lo + 1).max(0) as usize
    }
}

/// Parameter grid override: named inclusive ranges, e.g. m=-2..2, r=1..3.
pub type Grid = BTreeMap<String, Range>;

/// Parse "m=-2..2,r=1..3".
pub fn parse_grid(text: &str) -> Result<Grid, ConfigError> {
    let mut grid = Grid::new();
    for part in text.split(',') {
        let part = part.trim();
        if part.is_empty() {
            continue;
        }
        let (name, range) = part
            .split_once('=')
            .ok_or_else(|| ConfigError::Invalid(format!("grid entry '{}' needs name=lo..hi", part)))?;
        let (lo, hi) = range
            .split_once("..")
            .ok_or_else(|| ConfigError::Invalid(format!("grid range '{}' needs lo..hi", range)))?;
        let lo: i64 = lo
            .trim()
            .parse()
            .map_err(|_| ConfigError::Invalid(format!("bad integer '{}'", lo)))?;
        let hi: i64 = hi
            .trim()
            .parse()
            .map_err(|_| ConfigError::Invalid(format!("bad integer '{}'", hi)))?;
        if hi < lo {
            return Err(ConfigError::Invalid(format!("empty range {}..{}", lo, hi)));
        }
        grid.insert(name.trim().to_string(), Range::new(lo, hi));
    }
    Ok(grid)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FamilySuite {
    pub family: Family,
    #[serde(default)]
    pub grid: Grid,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct IdentitySuite {
    pub n: usize,
    pub count: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BremnerSuite {
    pub n: usize,
    pub count: usize,
    /// Parity patterns (one entry per operand: distinguished first); the
    /// named defaults cover the all-even Bremner case and three super
    /// patterns.
    #[serde(default)]
    pub patterns: Vec<Vec<u8>>,
}

pub fn default_bremner_patterns(n: usize) -> Vec<Vec<u8>> {
    let len = 3 * n - 2;
    let all_even = vec![0u8; len];
    let mut two_odd = vec![0u8; len];
    two_odd[1] = 1;
    two_odd[2] = 1;
    let mut four_odd = vec![0u8; len];
    for k in 1..=4.min(len - 1) {
        four_odd[k] = 1;
    }
    let mut odd_b = vec![0u8; len];
    odd_b[0] = 1;
    odd_b[2] = 1;
    odd_b[3] = 1;
    vec![all_even, two_odd, four_odd, odd_b]
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FiVariant {
    /// Ternary fundamental identity on the lambda-limit structure algebra.
    Fi3Alg3,
    /// Super fundamental identity on the Witt 3-algebra table.
    SuperFi3Witt3,
    /// Order-2n super fundamental identity on the sub-2n-algebra table.
    SuperFi2nSub { n: u32 },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FiSuite {
    pub variant: FiVariant,
    pub count: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoherenceSuite {
    pub count: usize,
}

/// The full declarative suite description; the CLI flags are a strict
/// subset of this.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SuiteConfig {
    pub deformation: DeformationSpec,
    #[serde(default)]
    pub families: Vec<FamilySuite>,
    #[serde(default)]
    pub gsji: Vec<IdentitySuite>,
    #[serde(default)]
    pub skew: Vec<IdentitySuite>,
    #[serde(default)]
    pub bremner: Vec<BremnerSuite>,
    #[serde(default)]
    pub fi: Vec<FiSuite>,
    #[serde(default)]
    pub coherence: Option<CoherenceSuite>,
    #[serde(with = "repair_serde", default = "default_repairs")]
    pub repairs: RepairFlags,
    #[serde(default = "default_seed")]
    pub seed: u64,
    /// Worker count; 0 means the library default.
    #[serde(default)]
    pub jobs: usize,
    #[serde(default = "default_truncation")]
    pub truncation: u32,
}

fn default_seed() -> u64 {
    1
}

fn default_truncation() -> u32 {
    6
}

impl SuiteConfig {
    pub fn new(deformation: DeformationSpec) -> Self {
        SuiteConfig {
            deformation,
            families: Vec::new(),
            gsji: Vec::new(),
            skew: Vec::new(),
            bremner: Vec::new(),
            fi: Vec::new(),
            coherence: None,
            repairs: RepairFlags::default(),
            seed: default_seed(),
            jobs: 0,
            truncation: default_truncation(),
        }
    }

    /// The default full suite: every relation family plus the identity and
    /// oracle suites. A coverage test locks every Family tag into this.
    pub fn full(deformation: DeformationSpec) -> Self {
        let mut c = Self::new(deformation);
        c.families = Family::ALL
            .iter()
            .map(|f| FamilySuite {
                family: *f,
                grid: Grid::new(),
            })
            .collect();
        c.gsji = vec![IdentitySuite { n: 2, count: 50 }];
        c.skew = vec![
            IdentitySuite { n: 3, count: 20 },
            IdentitySuite { n: 4, count: 20 },
        ];
        c.bremner = vec![BremnerSuite {
            n: 3,
            count: 10,
            patterns: Vec::new(),
        }];
        c.fi = vec![
            FiSuite { variant: FiVariant::Fi3Alg3, count: 10 },
            FiSuite { variant: FiVariant::SuperFi3Witt3, count: 10 },
            FiSuite { variant: FiVariant::SuperFi2nSub { n: 2 }, count: 5 },
        ];
        c.coherence = Some(CoherenceSuite { count: 100 });
        c
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        self.deformation
            .validate_sample()
            .map_err(|e| ConfigError::Invalid(e.to_string()))?;
        for f in &self.families {
            for (k, r) in &f.grid {
                if r.len() == 0 {
                    return Err(ConfigError::Invalid(format!(
                        "{}: empty range for {}",
                        f.family.name(),
                        k
                    )));
                }
            }
        }
        for s in &self.gsji {
            if s.n % 2 != 0 || s.n == 0 {
                return Err(ConfigError::Invalid(format!(
                    "the generalized super Jacobi identity needs even n, got {}",
                    s.n
                )));
            }
        }
        for s in &self.bremner {
            if s.n % 2 != 1 {
                return Err(ConfigError::Invalid(format!(
                    "the Bremner identities need odd n, got {}",
                    s.n
                )));
            }
            for p in &s.patterns {
                if p.len() != 3 * s.n - 2 {
                    return Err(ConfigError::Invalid(format!(
                        "Bremner parity pattern needs {} entries (B plus 3n-3 operands)",
                        3 * s.n - 2
                    )));
                }
            }
        }
        Ok(())
    }
}

// ---------------------------------------------------------------------
// Report format
// ---------------------------------------------------------------------

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReportCheck {
    pub id: String,
    #[serde(default)]
    pub params: BTreeMap<String, i64>,
    pub status: Status,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub witness: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub trace: Option<String>,
    pub millis: u64,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Summary {
    pub total: usize,
    pub verified: usize,
    pub mismatch: usize,
    pub conditional: usize,
    pub skipped: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Report {
    pub config: SuiteConfig,
    pub checks: Vec<ReportCheck>,
    pub summary: Summary,
    pub version: String,
    pub hash: String,
    pub wall_millis: u64,
}

/// FNV-1a, the content hash over all semantic fields (timing excluded).
pub fn fnv1a(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xCBF29CE484222325;
    for b in bytes {
        h ^= *b as u64;
        h = h.wrapping_mul(0x100000001B3);
    }
    h
}

fn config_hash(config: &SuiteConfig) -> u64 {
    fnv1a(serde_json::to_string(config).expect("config serializes").as_bytes())
}

fn content_hash(config: &SuiteConfig, checks: &[ReportCheck]) -> String {
    let mut h = config_hash(config);
    for c in checks {
        let mut line = String::new();
        line.push_str(&c.id);
        line.push('\x1f');
        line.push_str(&c.status.to_string());
        line.push('\x1f');
        if let Some(w) = &c.witness {
            line.push_str(w);
        }
        line.push('\x1f');
        if let Some(t) = &c.trace {
            line.push_str(t);
        }
        h ^= fnv1a(line.as_bytes());
        h = h.wrapping_mul(0x100000001B3);
    }
    format!("{:016x}", h)
}

impl ReportCheck {
    /// The semantic content, excluding timing.
    pub fn semantic(&self) -> (&str, Status, Option<&str>, Option<&str>) {
        (
            self.id.as_str(),
            self.status,
            self.witness.as_deref(),
            self.trace.as_deref(),
        )
    }
}

impl Report {
    pub fn config_hash(&self) -> u64 {
        config_hash(&self.config)
    }

    /// Two runs agree semantically when every check's id, status, witness
    /// and trace coincide; timing fields and worker counts are not part of
    /// the outcome.
    pub fn semantic_eq(&self, other: &Report) -> bool {
        self.checks.len() == other.checks.len()
            && self
                .checks
                .iter()
                .zip(&other.checks)
                .all(|(a, b)| a.semantic() == b.semantic())
    }

    /// Human-readable text rendering.
    pub fn render_text(&self) -> String {
        use std::fmt::Write as _;
        let mut s = String::new();
        let _ = writeln!(
            s,
            "deformation {}  seed {}  checks {}",
            self.config.deformation, self.config.seed, self.summary.total
        );
        for c in &self.checks {
            let _ = write!(s, "{:<50} {}", c.id, c.status);
            if let Some(w) = &c.witness {
                let _ = write!(s, "  [{}]", w);
            }
            let _ = writeln!(s);
        }
        let _ = writeln!(
            s,
            "summary: {} verified, {} mismatch, {} conditional, {} skipped (hash {})",
            self.summary.verified,
            self.summary.mismatch,
            self.summary.conditional,
            self.summary.skipped,
            self.hash
        );
        s
    }

    /// Snapshot rendering: one "id status" line per check, no timing.
    pub fn render_snapshot(&self) -> String {
        let mut s = String::from("# status snapshot v1\n");
        for c in &self.checks {
            s.push_str(&format!("{} {}\n", c.id, c.status));
        }
        s
    }

    /// Compare against a snapshot text; returns drift descriptions.
    pub fn diff_snapshot(&self, snapshot: &str) -> Vec<String> {
        let mut expected: BTreeMap<&str, &str> = BTreeMap::new();
        for line in snapshot.lines() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            if let Some((id, st)) = line.rsplit_once(' ') {
                expected.insert(id, st);
            }
        }
        let mut drift = Vec::new();
        let mut seen = std::collections::BTreeSet::new();
        for c in &self.checks {
            seen.insert(c.id.as_str());
            match expected.get(c.id.as_str()) {
                None => drift.push(format!("{}: not in snapshot (now {})", c.id, c.status)),
                Some(st) if *st != c.status.to_string() => {
                    drift.push(format!("{}: {} -> {}", c.id, st, c.status))
                }
                _ => {}
            }
        }
        for (id, st) in expected {
            if !seen.contains(id) {
                drift.push(format!("{}: in snapshot ({}) but not in run", id, st));
            }
        }
        drift
    }
}

/// Per-check status changes between two runs of the same configuration.
pub fn diff_reports(old: &Report, new: &Report) -> Result<Vec<String>, ConfigError> {
    if old.config_hash() != new.config_hash() {
        return Err(ConfigError::ConfigMismatch);
    }
    let old_map: BTreeMap<&str, Status> =
        old.checks.iter().map(|c| (c.id.as_str(), c.status)).collect();
    let new_map: BTreeMap<&str, Status> =
        new.checks.iter().map(|c| (c.id.as_str(), c.status)).collect();
    let mut out = Vec::new();
    for (id, st) in &old_map {
        match new_map.get(id) {
            None => out.push(format!("{}: removed (was {})", id, st)),
            Some(n) if n != st => out.push(format!("{}: {} -> {}", id, st, n)),
            _ => {}
        }
    }
    for (id, st) in &new_map {
        if !old_map.contains_key(id) {
            out.push(format!("{}: added ({})", id, st));
        }
    }
    Ok(out)
}

// ---------------------------------------------------------------------
// Suite expansion
// ---------------------------------------------------------------------

enum WorkItem {
    Relation(RelationInstance),
    Gsji { n: usize, case: usize },
    Skew { n: usize, case: usize },
    Bremner { n: usize, case: usize, pattern: usize, parities: Vec<u8> },
    Fi { variant: FiVariant, case: usize },
    Coherence { case: usize },
}

impl WorkItem {
    fn id(&self) -> String {
        match self {
            WorkItem::Relation(inst) => inst.to_string(),
            WorkItem::Gsji { n, case } => format!("GSJI[case={},n={}]", case, n),
            WorkItem::Skew { n, case } => format!("SKEW[case={},n={}]", case, n),
            WorkItem::Bremner { n, case, pattern, parities } => {
                let name = if parities.iter().all(|&p| p == 0) {
                    "GBI"
                } else {
                    "GSBI"
                };
                format!("{}[case={},n={},pattern={}]", name, case, n, pattern)
            }
            WorkItem::Fi { variant, case } => {
                let name = match variant {
                    FiVariant::Fi3Alg3 => "FI_ALG3",
                    FiVariant::SuperFi3Witt3 => "SUPERFI_WITT3",
                    FiVariant::SuperFi2nSub { n } => {
                        return format!("SUPERFI2N_SUB[case={},n={}]", case, n)
                    }
                };
                format!("{}[case={}]", name, case)
            }
            WorkItem::Coherence { case } => format!("ORACLE[case={}]", case),
        }
    }
}

/// The default verification grid of each family (criterion-sized); config
/// ranges override the named defaults.
fn family_instances(family: Family, grid: &Grid) -> Vec<RelationInstance> {
    let r = |name: &str, lo: i64, hi: i64| -> Range {
        grid.get(name).copied().unwrap_or(Range::new(lo, hi))
    };
    let mut out = Vec::new();
    let w_valid = |m: i64, rr: i64| rr >= 1 && m + rr >= 1;
    match family {
        Family::Shov1 | Family::Shov2 | Family::Shov6 => {
            for s in r("s", 0, 2).values() {
                for rr in r("r", 0, 2).values() {
                    for m in r("m", -2, 2).values() {
                        for n in r("n", -2, 2).values() {
                            out.push(RelationInstance::new(
                                family,
                                &[("s", s), ("r", rr), ("m", m), ("n", n)],
                            ));
                        }
                    }
                }
            }
        }
        Family::Shov3 | Family::Shov4 | Family::Shov5 | Family::Shov7 => {
            for s in r("s", 0, 2).values() {
                for a in r("alpha", 0, 2).values() {
                    for m in r("m", -2, 2).values() {
                        for rr in r("r", -2, 2).values() {
                            out.push(RelationInstance::new(
                                family,
                                &[("s", s), ("alpha", a), ("m", m), ("r", rr)],
                            ));
                        }
                    }
                }
            }
        }
        Family::Shov8 | Family::Shov9 => {
            for a in r("alpha", 0, 2).values() {
                for b in r("beta", 0, 2).values() {
                    for rr in r("r", -2, 2).values() {
                        for s in r("s", -2, 2).values() {
                            out.push(RelationInstance::new(
                                family,
                                &[("alpha", a), ("beta", b), ("r", rr), ("s", s)],
                            ));
                        }
                    }
                }
            }
        }
        Family::Lim1 | Family::Lim2 | Family::Alg3_1 | Family::Alg3_2 => {
            for s in r("s", 0, 1).values() {
                for rr in r("r", 0, 1).values() {
                    for h in r("h", 0, 1).values() {
                        for m in r("m", -1, 1).values() {
                            for n in r("n", -1, 1).values() {
                                for k in r("k", -1, 1).values() {
                                    out.push(RelationInstance::new(
                                        family,
                                        &[
                                            ("s", s),
                                            ("r", rr),
                                            ("h", h),
                                            ("m", m),
                                            ("n", n),
                                            ("k", k),
                                        ],
                                    ));
                                }
                            }
                        }
                    }
                }
            }
        }
        Family::Lim3 | Family::Lim4 | Family::Alg3_3 | Family::Alg3_4 => {
            for s in r("s", 0, 1).values() {
                for t in r("t", 0, 1).values() {
                    for a in r("alpha", 0, 1).values() {
                        for m in r("m", -1, 1).values() {
                            for n in r("n", -1, 1).values() {
                                for rr in r("r", -1, 1).values() {
                                    out.push(RelationInstance::new(
                                        family,
                                        &[
                                            ("s", s),
                                            ("t", t),
                                            ("alpha", a),
                                            ("m", m),
                                            ("n", n),
                                            ("r", rr),
                                        ],
                                    ));
                                }
                            }
                        }
                    }
                }
            }
        }
        Family::Lim5 | Family::Alg3_5 => {
            for k in r("k", 0, 1).values() {
                for a in r("alpha", 0, 1).values() {
                    for b in r("beta", 0, 1).values() {
                        for m in r("m", -1, 1).values() {
                            for rr in r("r", -1, 1).values() {
                                for s in r("s", -1, 1).values() {
                                    out.push(RelationInstance::new(
                                        family,
                                        &[
                                            ("k", k),
                                            ("alpha", a),
                                            ("beta", b),
                                            ("m", m),
                                            ("r", rr),
                                            ("s", s),
                                        ],
                                    ));
                                }
                            }
                        }
                    }
                }
            }
        }
        Family::W2Comm => {
            for v in r("v", 1, 10).values() {
                for m1 in r("m1", -2, 2).values() {
                    for r1 in r("r1", 1, 3).values() {
                        for m2 in r("m2", -2, 2).values() {
                            for r2 in r("r2", 1, 3).values() {
                                if w_valid(m1, r1) && w_valid(m2, r2) {
                                    out.push(RelationInstance::new(
                                        family,
                                        &[
                                            ("v", v),
                                            ("m1", m1),
                                            ("r1", r1),
                                            ("m2", m2),
                                            ("r2", r2),
                                        ],
                                    ));
                                }
                            }
                        }
                    }
                }
            }
        }
        Family::Lperp | Family::TripleLh => {
            for g in r("g", 1, 4).values() {
                for m in r("m", -2, 2).values() {
                    for rr in r("r", 1, 3).values() {
                        if w_valid(m, rr) {
                            out.push(RelationInstance::new(
                                family,
                                &[("g", g), ("m", m), ("r", rr)],
                            ));
                        }
                    }
                }
            }
        }
        Family::Null3 => {
            for g in r("g", 1, 2).values() {
                for rr in r("r", 1, 3).values() {
                    out.push(RelationInstance::new(family, &[("g", g), ("m", 0), ("r", rr)]));
                }
            }
        }
        Family::Sub3 => {
            for v in r("v", 1, 4).values() {
                for r1 in r("r1", 1, 2).values() {
                    for r2 in r("r2", 1, 2).values() {
                        for r3 in r("r3", 1, 2).values() {
                            for m1 in r("m1", -1, 1).values() {
                                for m2 in r("m2", -1, 1).values() {
                                    for m3 in r("m3", -1, 1).values() {
                                        if w_valid(m1, r1) && w_valid(m2, r2) && w_valid(m3, r3) {
                                            out.push(RelationInstance::new(
                                                family,
                                                &[
                                                    ("v", v),
                                                    ("m1", m1),
                                                    ("r1", r1),
                                                    ("m2", m2),
                                                    ("r2", r2),
                                                    ("m3", m3),
                                                    ("r3", r3),
                                                ],
                                            ));
                                        }
                                    }
                                }
                            }
                        }
                    }
                }
            }
        }
        Family::Vw => {
            for v in r("v", 1, 8).values() {
                // operand depths per variant
                let (ra, rb) = match v {
                    1 | 2 => (2, 2),
                    3 | 4 => (2, 1),
                    5 => (1, 2),
                    6 | 8 => (1, 1),
                    7 => (2, 2),
                    _ => continue,
                };
                for m1 in r("m1", -3, 3).values() {
                    for m2 in r("m2", -3, 3).values() {
                        if w_valid(m1, ra) && w_valid(m2, rb) {
                            out.push(RelationInstance::new(
                                family,
                                &[("v", v), ("m1", m1), ("m2", m2)],
                            ));
                        }
                    }
                }
            }
        }
        Family::Witt3 => {
            for v in r("v", 1, 7).values() {
                let rs: [i64; 3] = match v {
                    1 | 2 => [2, 2, 1],
                    3 | 4 => [2, 1, 1],
                    5 => [2, 2, 2],
                    6 => [1, 1, 1],
                    7 => [2, 2, 1],
                    _ => continue,
                };
                for m1 in r("m1", -3, 3).values() {
                    for m2 in r("m2", -3, 3).values() {
                        for m3 in r("m3", -3, 3).values() {
                            if w_valid(m1, rs[0]) && w_valid(m2, rs[1]) && w_valid(m3, rs[2]) {
                                out.push(RelationInstance::new(
                                    family,
                                    &[("v", v), ("m1", m1), ("m2", m2), ("m3", m3)],
                                ));
                            }
                        }
                    }
                }
            }
        }
        Family::Nalg => {
            for f in r("f", 0, 1).values() {
                for r1 in r("r1", 1, 2).values() {
                    for r2 in r("r2", 1, 2).values() {
                        for r3 in r("r3", 1, 2).values() {
                            for m1 in r("m1", -1, 1).values() {
                                for m2 in r("m2", -1, 1).values() {
                                    for m3 in r("m3", -1, 1).values() {
                                        if w_valid(m1, r1) && w_valid(m2, r2) && w_valid(m3, r3) {
                                            out.push(RelationInstance::new(
                                                family,
                                                &[
                                                    ("n", 3),
                                                    ("f", f),
                                                    ("m1", m1),
                                                    ("r1", r1),
                                                    ("m2", m2),
                                                    ("r2", r2),
                                                    ("m3", m3),
                                                    ("r3", r3),
                                                ],
                                            ));
                                        }
                                    }
                                }
                            }
                        }
                    }
                }
            }
        }
        Family::Sub2n | Family::ExSub4 => {
            let range = r("m", -2, 2);
            let modes: Vec<i64> = range.values().collect();
            for f in r("f", 0, 1).values() {
                for quad in ascending_subsets(&modes, 4) {
                    let mut params: Vec<(&str, i64)> = vec![("f", f)];
                    if family == Family::Sub2n {
                        params.push(("n", 2));
                    }
                    let names = ["m1", "m2", "m3", "m4"];
                    for (i, m) in quad.iter().enumerate() {
                        params.push((names[i], *m));
                    }
                    out.push(RelationInstance::new(family, &params));
                }
            }
        }
        Family::ExSub6 => {
            let range = r("m", -2, 3);
            let modes: Vec<i64> = range.values().collect();
            for f in r("f", 0, 1).values() {
                for six in ascending_subsets(&modes, 6) {
                    let mut params: Vec<(&str, i64)> = vec![("f", f)];
                    let names = ["m1", "m2", "m3", "m4", "m5", "m6"];
                    for (i, m) in six.iter().enumerate() {
                        params.push((names[i], *m));
                    }
                    out.push(RelationInstance::new(family, &params));
                }
            }
        }
    }
    out
}

fn ascending_subsets(values: &[i64], k: usize) -> Vec<Vec<i64>> {
    let mut out = Vec::new();
    let n = values.len();
    if k > n {
        return out;
    }
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        out.push(idx.iter().map(|&i| values[i]).collect());
        // next combination
        let mut i = k;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            if idx[i] != i + n - k {
                break;
            }
            if i == 0 {
                return out;
            }
        }
        idx[i] += 1;
        for j in i + 1..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

fn expand(config: &SuiteConfig) -> Vec<WorkItem> {
    let mut items = Vec::new();
    for f in &config.families {
        for inst in family_instances(f.family, &f.grid) {
            items.push(WorkItem::Relation(inst));
        }
    }
    for s in &config.gsji {
        for case in 0..s.count {
            items.push(WorkItem::Gsji { n: s.n, case });
        }
    }
    for s in &config.skew {
        for case in 0..s.count {
            items.push(WorkItem::Skew { n: s.n, case });
        }
    }
    for s in &config.bremner {
        let patterns = if s.patterns.is_empty() {
            default_bremner_patterns(s.n)
        } else {
            s.patterns.clone()
        };
        for (pi, pat) in patterns.iter().enumerate() {
            for case in 0..s.count {
                items.push(WorkItem::Bremner {
                    n: s.n,
                    case,
                    pattern: pi,
                    parities: pat.clone(),
                });
            }
        }
    }
    for s in &config.fi {
        for case in 0..s.count {
            items.push(WorkItem::Fi { variant: s.variant, case });
        }
    }
    if let Some(c) = &config.coherence {
        for case in 0..c.count {
            items.push(WorkItem::Coherence { case });
        }
    }
    items
}

// ---------------------------------------------------------------------
// Execution
// ---------------------------------------------------------------------

fn case_rng(config: &SuiteConfig, id: &str) -> SplitMix64 {
    SplitMix64::new(config.seed ^ fnv1a(id.as_bytes()))
}

fn identity_entry(id: String, check: Result<IdentityCheck, String>, millis: u64) -> ReportCheck {
    match check {
        Ok(c) => ReportCheck {
            id,
            params: BTreeMap::new(),
            status: if c.holds { Status::Verified } else { Status::Mismatch },
            witness: c.witness,
            trace: None,
            millis,
        },
        Err(e) => ReportCheck {
            id,
            params: BTreeMap::new(),
            status: Status::Skipped,
            witness: None,
            trace: Some(e),
            millis,
        },
    }
}

fn run_item(arena: &OpArena, config: &SuiteConfig, item: &WorkItem) -> ReportCheck {
    let id = item.id();
    let t0 = std::time::Instant::now();
    let spec = &config.deformation;
    match item {
        WorkItem::Relation(inst) => {
            let r = compare(arena, inst, spec, &config.repairs);
            ReportCheck {
                id: r.id,
                params: r.params,
                status: r.status,
                witness: r.witness.map(|w| {
                    format!(
                        "cell ({},{}) offset {:?}: {} vs {}",
                        w.cell.0, w.cell.1, w.offset, w.lhs, w.rhs
                    )
                }),
                trace: r.trace.or(r.note),
                millis: r.millis,
            }
        }
        WorkItem::Gsji { n, .. } => {
            let mut rng = case_rng(config, &id);
            let count = 2 * n - 1;
            let mut ops = Vec::new();
            let mut ws = Vec::new();
            for _ in 0..count {
                let (o, w) = if *n >= 4 {
                    sampling::random_simple(&mut rng, spec, None, 1)
                } else {
                    sampling::random_homogeneous(&mut rng, spec, None)
                };
                ops.push(o);
                ws.push(w);
            }
            let r = check_gsji(arena, spec, *n, &ops, &ws).map_err(|e| e.to_string());
            identity_entry(id, r, t0.elapsed().as_millis() as u64)
        }
        WorkItem::Skew { n, .. } => {
            let mut rng = case_rng(config, &id);
            let mut ops = Vec::new();
            let mut ws = Vec::new();
            for _ in 0..*n {
                let (o, w) = sampling::random_homogeneous(&mut rng, spec, None);
                ops.push(o);
                ws.push(w);
            }
            let perms = permutations(*n);
            let perm = perms[rng.below(perms.len() as u64) as usize].clone();
            let input = BracketInput::with_weights(ops, ws);
            let r = check_skew(arena, spec, &input, &perm).map_err(|e| e.to_string());
            identity_entry(id, r, t0.elapsed().as_millis() as u64)
        }
        WorkItem::Bremner { n, parities, .. } => {
            let mut rng = case_rng(config, &id);
            let (b, _) = sampling::random_simple(&mut rng, spec, Some(parities[0]), 1);
            let ops: Vec<GradedOperator> = parities[1..]
                .iter()
                .map(|&p| sampling::random_simple(&mut rng, spec, Some(p), 1).0)
                .collect();
            let r = check_gbi_gsbi(arena, spec, *n, &b, &ops).map_err(|e| e.to_string());
            identity_entry(id, r, t0.elapsed().as_millis() as u64)
        }
        WorkItem::Fi { variant, .. } => {
            let mut rng = case_rng(config, &id);
            let r = run_fi(spec, *variant, &mut rng);
            identity_entry(id, r, t0.elapsed().as_millis() as u64)
        }
        WorkItem::Coherence { .. } => {
            let mut rng = case_rng(config, &id);
            let status = run_coherence(spec, config.truncation, &mut rng);
            let millis = t0.elapsed().as_millis() as u64;
            match status {
                Ok(None) => ReportCheck {
                    id,
                    params: BTreeMap::new(),
                    status: Status::Verified,
                    witness: None,
                    trace: None,
                    millis,
                },
                Ok(Some(w)) => ReportCheck {
                    id,
                    params: BTreeMap::new(),
                    status: Status::Mismatch,
                    witness: Some(w),
                    trace: None,
                    millis,
                },
                Err(e) => ReportCheck {
                    id,
                    params: BTreeMap::new(),
                    status: Status::Skipped,
                    witness: None,
                    trace: Some(e),
                    millis,
                },
            }
        }
    }
}

fn run_fi(
    spec: &DeformationSpec,
    variant: FiVariant,
    rng: &mut SplitMix64,
) -> Result<IdentityCheck, String> {
    match variant {
        FiVariant::Fi3Alg3 => {
            let alg = Alg3Algebra { spec: spec.clone() };
            let ops: Vec<LinComb> = (0..5)
                .map(|_| {
                    LinComb::basis(StructKey::Vir {
                        flavor: 0,
                        m: rng.range_i64(-2, 2),
                        d: rng.range_i64(1, 3),
                    })
                })
                .collect();
            check_fi3(&alg, &ops).map_err(|e| e.to_string())
        }
        FiVariant::SuperFi3Witt3 => {
            let alg = Witt3Algebra { spec: spec.clone() };
            let ops: Vec<LinComb> = (0..5)
                .map(|_| {
                    let kind = if rng.chance(1, 3) { WKind::F } else { WKind::B };
                    let r = 1 + rng.below(2) as u32;
                    let m = rng.range_i64(if r == 1 { 0 } else { -1 }, 3);
                    LinComb::basis(StructKey::W { kind, m, r })
                })
                .collect();
            check_fi3(&alg, &ops).map_err(|e| e.to_string())
        }
        FiVariant::SuperFi2nSub { n } => {
            let alg = Sub2nAlgebra { spec: spec.clone(), n };
            let arity = 2 * n as usize;
            let fermion_slot = rng.below(2 * arity as u64 - 1) as usize;
            let ops: Vec<LinComb> = (0..2 * arity - 1)
                .map(|i| {
                    let kind = if i == fermion_slot { WKind::F } else { WKind::B };
                    LinComb::basis(StructKey::W {
                        kind,
                        m: rng.range_i64(-2, 3),
                        r: n + 1,
                    })
                })
                .collect();
            check_fi_2n(&alg, arity, &ops).map_err(|e| e.to_string())
        }
    }
}

/// One oracle-coherence case: symbolic products against truncated-matrix
/// products on the joint safe window, plus the probabilistic converse
/// detector (distinct symbolic operators must not collide numerically).
fn run_coherence(
    spec: &DeformationSpec,
    truncation: u32,
    rng: &mut SplitMix64,
) -> Result<Option<String>, String> {
    let (x, _) = sampling::random_simple(rng, spec, None, 2);
    let (y, _) = sampling::random_simple(rng, spec, None, 2);
    let sample = &spec.sample;
    let n_max = truncation.max(x.reach().iter().chain(y.reach().iter()).copied().max().unwrap_or(0) * 2 + 2);
    let prod = x.compose(&y);
    let mx = ExactMatrix::of(&x, n_max, sample).map_err(|e| e.to_string())?;
    let my = ExactMatrix::of(&y, n_max, sample).map_err(|e| e.to_string())?;
    let mprod = ExactMatrix::of(&prod, n_max, sample).map_err(|e| e.to_string())?;
    let w = SafeWindow::join(
        SafeWindow::for_reach(x.reach(), n_max),
        SafeWindow::for_reach(y.reach(), n_max),
    );
    if !mprod.eq_on_window(&mx.mul(&my), w) {
        return Ok(Some("matrix product disagrees with symbolic product on the safe window".into()));
    }
    // Symbolic equality route: the same operator assembled two ways.
    let z1 = x.add(&x.scale(&Scalar::from_int(2)));
    let z2 = x.scale(&Scalar::from_int(3));
    if z1 != z2 {
        return Ok(Some("linear-combination routes disagree symbolically".into()));
    }
    let m1 = ExactMatrix::of(&z1, n_max, sample).map_err(|e| e.to_string())?;
    let m2 = ExactMatrix::of(&z2, n_max, sample).map_err(|e| e.to_string())?;
    if m1 != m2 {
        return Ok(Some("equal operators produced different matrices".into()));
    }
    // Probabilistic detector: distinct operators should differ numerically
    // at a generic sample point.
    if x != y {
        let myy = ExactMatrix::of(&y, n_max, sample).map_err(|e| e.to_string())?;
        if mx == myy {
            return Ok(Some("distinct operators collided numerically (degenerate sample point)".into()));
        }
    }
    Ok(None)
}

/// Execute a suite. Identical config and seed give a byte-identical report
/// apart from timing fields; worker count does not affect the outcome.
pub fn run_suite(config: &SuiteConfig) -> Result<Report, ConfigError> {
    config.validate()?;
    let t0 = std::time::Instant::now();
    let items = expand(config);
    let arena = OpArena::new();
    let run_all = || -> Vec<ReportCheck> {
        items
            .par_iter()
            .map(|item| run_item(&arena, config, item))
            .collect()
    };
    let mut checks = if config.jobs > 0 {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(config.jobs)
            .build()
            .map_err(|e| ConfigError::Invalid(e.to_string()))?;
        pool.install(run_all)
    } else {
        run_all()
    };
    checks.sort_by(|a, b| a.id.cmp(&b.id));
    let mut summary = Summary {
        total: checks.len(),
        ..Summary::default()
    };
    for c in &checks {
        match c.status {
            Status::Verified => summary.verified += 1,
            Status::Mismatch => summary.mismatch += 1,
            Status::Conditional => summary.conditional += 1,
            Status::Skipped => summary.skipped += 1,
        }
    }
    let hash = content_hash(config, &checks);
    Ok(Report {
        config: config.clone(),
        checks,
        summary,
        version: env!("CARGO_PKG_VERSION").to_string(),
        hash,
        wall_millis: t0.elapsed().as_millis() as u64,
    })
}
