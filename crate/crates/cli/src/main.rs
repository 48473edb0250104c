//! Command-line front end: run verification suites, evaluate single
//! brackets, and print structure-constant tables.
//!
//! Exit codes: 0 all checks verified (or informational command succeeded),
//! 1 usage or configuration error, 2 run completed with mismatches (or
//! snapshot drift / non-empty report diff).

use clap::{Args, Parser, Subcommand};
use rpq_core::backend::{DeformationSpec, RForm, SeriesTable};
use rpq_core::brackets::{n_bracket, BracketInput, OpArena};
use rpq_core::catalog::{project_w_basis, structure_f, Family, RepairFlags};
use rpq_core::generators::parse_generator_list;
use rpq_core::halfint::HalfInt;
use rpq_core::harness::{
    diff_reports, parse_grid, run_suite, BremnerSuite, CoherenceSuite, FamilySuite, FiSuite,
    FiVariant, Grid, IdentitySuite, Report, SuiteConfig,
};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::str::FromStr;

#[derive(Parser)]
#[command(
    name = "rpq",
    version,
    about = "Exact verification of R(p,q)-deformed super W-infinity n-algebras",
    disable_help_subcommand = true
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run relation and identity suites and report statuses.
    Check(CheckArgs),
    /// Evaluate one n-bracket of named generators.
    Bracket(BracketArgs),
    /// Print structure-constant and normalizer tables.
    Table(TableArgs),
    /// Compare two report files of the same configuration.
    ReportDiff { old: PathBuf, new: PathBuf },
}

#[derive(Args)]
struct DeformationArgs {
    /// Backend: q | pq | abpq | classical | series:<file>.
    #[arg(long, default_value = "pq")]
    deformation: String,
    /// Sample value of sqrt(p) for the numeric oracle (p is its square).
    #[arg(long)]
    p: Option<String>,
    /// Sample value of sqrt(q).
    #[arg(long)]
    q: Option<String>,
    /// Sample value of sqrt(lambda).
    #[arg(long)]
    lambda: Option<String>,
    /// Sample value of a.
    #[arg(long)]
    a: Option<String>,
    /// Sample value of b.
    #[arg(long)]
    b: Option<String>,
}

impl DeformationArgs {
    fn build(&self) -> Result<DeformationSpec, String> {
        let form = match self.deformation.as_str() {
            "q" => RForm::Q,
            "pq" => RForm::Pq,
            "abpq" => RForm::Abpq,
            "classical" => RForm::Classical,
            other => {
                if let Some(path) = other.strip_prefix("series:") {
                    let text = std::fs::read_to_string(path)
                        .map_err(|e| format!("series table '{}': {}", path, e))?;
                    let table = SeriesTable::parse(&text).map_err(|e| e.to_string())?;
                    RForm::Series { table }
                } else {
                    return Err(format!(
                        "unknown deformation '{}' (expected q|pq|abpq|classical|series:<file>)",
                        other
                    ));
                }
            }
        };
        let mut spec = DeformationSpec::new(form);
        let set = |field: &mut num_rational::BigRational, v: &Option<String>, name: &str| {
            if let Some(text) = v {
                match num_rational::BigRational::from_str(text) {
                    Ok(r) => {
                        *field = r;
                        Ok(())
                    }
                    Err(_) => Err(format!("flag --{}: '{}' is not a rational", name, text)),
                }
            } else {
                Ok(())
            }
        };
        set(&mut spec.sample.sqrt_p, &self.p, "p")?;
        set(&mut spec.sample.sqrt_q, &self.q, "q")?;
        set(&mut spec.sample.sqrt_lambda, &self.lambda, "lambda")?;
        set(&mut spec.sample.a, &self.a, "a")?;
        set(&mut spec.sample.b, &self.b, "b")?;
        spec.validate_sample().map_err(|e| e.to_string())?;
        Ok(spec)
    }
}

#[derive(Args)]
struct CheckArgs {
    #[command(flatten)]
    deformation: DeformationArgs,
    /// Suite selector, repeatable: a relation family (shov1..shov9,
    /// lim1..lim5, alg3_1..alg3_5, w2comm, lperp, triple_lh, null3, sub3,
    /// vw, witt3, nalg, sub2n, ex_sub4, ex_sub6), a family group (shov,
    /// lim, alg3), an identity suite (gsji, skew, gbi, gsbi, fi,
    /// coherence), or "all".
    #[arg(long)]
    suite: Vec<String>,
    /// Parameter grid override for family suites, e.g. "m=-2..2,r=1..3".
    #[arg(long)]
    grid: Option<String>,
    /// Bracket order for the identity suites.
    #[arg(long)]
    n: Option<usize>,
    /// Case count for the identity suites.
    #[arg(long)]
    count: Option<usize>,
    /// Seed for the deterministic case streams.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker count (0 = library default).
    #[arg(long)]
    jobs: Option<usize>,
    /// Bosonic truncation for the matrix oracle.
    #[arg(long)]
    truncation: Option<u32>,
    /// Evaluate the paper-literal forms (disable the documented repairs).
    #[arg(long)]
    paper_literal: bool,
    /// Output format: text | json.
    #[arg(long, default_value = "text")]
    format: String,
    /// Write the report here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Snapshot file: compare statuses against it (created when missing).
    #[arg(long)]
    snapshot: Option<PathBuf>,
    /// Declarative suite configuration (JSON mirroring the config schema);
    /// flags override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args)]
struct BracketArgs {
    #[command(flatten)]
    deformation: DeformationArgs,
    /// Comma-separated generator expressions, e.g. "WB(1,2),WB(2,2)".
    #[arg(long)]
    ops: String,
    /// Mode weights for the even-order prefactor (defaults to the
    /// generators' own mode labels), e.g. "1,2" or "1/2,-3/2".
    #[arg(long)]
    weights: Option<String>,
}

#[derive(Args)]
struct TableArgs {
    #[command(flatten)]
    deformation: DeformationArgs,
    /// Table kind: f | qnorm | vandermonde.
    #[arg(long, default_value = "f")]
    kind: String,
    /// Grid for the f table, e.g. "m1=-1..1,r1=1..2,m2=-1..1,r2=1..2".
    #[arg(long)]
    grid: Option<String>,
    /// Order parameter for the normalizer table.
    #[arg(long)]
    n: Option<u32>,
    /// Modes for the Vandermonde coefficient, e.g. "0,1,2,3".
    #[arg(long)]
    modes: Option<String>,
    /// Evaluate the paper-literal forms.
    #[arg(long)]
    paper_literal: bool,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            // Help and version requests are successes; everything else is
            // a usage error (exit 1 by the tool's contract).
            use clap::error::ErrorKind;
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(1),
            };
        }
    };
    let result = match cli.cmd {
        Cmd::Check(args) => cmd_check(args),
        Cmd::Bracket(args) => cmd_bracket(args),
        Cmd::Table(args) => cmd_table(args),
        Cmd::ReportDiff { old, new } => cmd_report_diff(&old, &new),
    };
    match result {
        Ok(code) => code,
        Err(msg) => {
            eprintln!("error: {}", msg);
            ExitCode::from(1)
        }
    }
}

fn add_suite(
    config: &mut SuiteConfig,
    name: &str,
    grid: &Grid,
    n: Option<usize>,
    count: Option<usize>,
) -> Result<(), String> {
    let fam = |config: &mut SuiteConfig, family: Family| {
        config.families.push(FamilySuite {
            family,
            grid: grid.clone(),
        });
    };
    match name.to_ascii_lowercase().as_str() {
        "all" | "full" => {
            let full = SuiteConfig::full(config.deformation.clone());
            config.families = full.families;
            config.gsji = full.gsji;
            config.skew = full.skew;
            config.bremner = full.bremner;
            config.fi = full.fi;
            config.coherence = full.coherence;
        }
        "shov" => {
            for f in [
                Family::Shov1,
                Family::Shov2,
                Family::Shov3,
                Family::Shov4,
                Family::Shov5,
                Family::Shov6,
                Family::Shov7,
                Family::Shov8,
                Family::Shov9,
            ] {
                fam(config, f);
            }
        }
        "lim" => {
            for f in [
                Family::Lim1,
                Family::Lim2,
                Family::Lim3,
                Family::Lim4,
                Family::Lim5,
            ] {
                fam(config, f);
            }
        }
        "alg3" => {
            for f in [
                Family::Alg3_1,
                Family::Alg3_2,
                Family::Alg3_3,
                Family::Alg3_4,
                Family::Alg3_5,
            ] {
                fam(config, f);
            }
        }
        "gsji" => {
            let n = n.unwrap_or(2);
            let count = count.unwrap_or(if n == 2 { 50 } else { 1 });
            config.gsji.push(IdentitySuite { n, count });
        }
        "skew" => {
            let n = n.unwrap_or(3);
            config.skew.push(IdentitySuite {
                n,
                count: count.unwrap_or(20),
            });
        }
        "gbi" | "gsbi" | "bremner" => {
            let n = n.unwrap_or(3);
            config.bremner.push(BremnerSuite {
                n,
                count: count.unwrap_or(10),
                patterns: Vec::new(),
            });
        }
        "fi" => {
            config.fi.push(FiSuite {
                variant: FiVariant::Fi3Alg3,
                count: count.unwrap_or(10),
            });
            config.fi.push(FiSuite {
                variant: FiVariant::SuperFi3Witt3,
                count: count.unwrap_or(10),
            });
            config.fi.push(FiSuite {
                variant: FiVariant::SuperFi2nSub { n: 2 },
                count: count.unwrap_or(5),
            });
        }
        "coherence" | "oracle" => {
            config.coherence = Some(CoherenceSuite {
                count: count.unwrap_or(100),
            });
        }
        other => match Family::from_name(other) {
            Some(f) => fam(config, f),
            None => return Err(format!("unknown suite '{}'", other)),
        },
    }
    Ok(())
}

fn cmd_check(args: CheckArgs) -> Result<ExitCode, String> {
    let spec = args.deformation.build()?;
    let mut config = match &args.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| format!("config '{}': {}", path.display(), e))?;
            serde_json::from_str::<SuiteConfig>(&text)
                .map_err(|e| format!("config '{}': {}", path.display(), e))?
        }
        None => SuiteConfig::new(spec.clone()),
    };
    if args.config.is_none() || !args.suite.is_empty() || args.deformation.deformation != "pq" {
        config.deformation = spec;
    }
    let grid = match &args.grid {
        Some(g) => parse_grid(g).map_err(|e| e.to_string())?,
        None => Grid::new(),
    };
    if !args.suite.is_empty() {
        config.families.clear();
        config.gsji.clear();
        config.skew.clear();
        config.bremner.clear();
        config.fi.clear();
        config.coherence = None;
        for s in &args.suite {
            add_suite(&mut config, s, &grid, args.n, args.count)?;
        }
    }
    if config.families.is_empty()
        && config.gsji.is_empty()
        && config.skew.is_empty()
        && config.bremner.is_empty()
        && config.fi.is_empty()
        && config.coherence.is_none()
    {
        return Err("nothing to run; pass --suite <name> or --suite all".into());
    }
    if let Some(seed) = args.seed {
        config.seed = seed;
    }
    if let Some(jobs) = args.jobs {
        config.jobs = jobs;
    }
    if let Some(t) = args.truncation {
        config.truncation = t;
    }
    if args.paper_literal {
        config.repairs = RepairFlags::paper_literal();
    }
    let report = run_suite(&config).map_err(|e| e.to_string())?;
    let rendered = match args.format.as_str() {
        "json" => serde_json::to_string_pretty(&report).map_err(|e| e.to_string())?,
        "text" => report.render_text(),
        other => return Err(format!("unknown format '{}' (expected json|text)", other)),
    };
    match &args.out {
        Some(path) => std::fs::write(path, rendered.as_bytes())
            .map_err(|e| format!("writing '{}': {}", path.display(), e))?,
        None => println!("{}", rendered),
    }
    let mut drifted = false;
    if let Some(snap_path) = &args.snapshot {
        if snap_path.exists() {
            let text = std::fs::read_to_string(snap_path)
                .map_err(|e| format!("snapshot '{}': {}", snap_path.display(), e))?;
            let drift = report.diff_snapshot(&text);
            if !drift.is_empty() {
                drifted = true;
                eprintln!("snapshot drift ({} changes):", drift.len());
                for d in drift.iter().take(50) {
                    eprintln!("  {}", d);
                }
            }
        } else {
            std::fs::write(snap_path, report.render_snapshot().as_bytes())
                .map_err(|e| format!("writing snapshot '{}': {}", snap_path.display(), e))?;
            eprintln!("snapshot written to {}", snap_path.display());
        }
    }
    if report.summary.mismatch > 0 || drifted {
        Ok(ExitCode::from(2))
    } else {
        Ok(ExitCode::SUCCESS)
    }
}

fn cmd_bracket(args: BracketArgs) -> Result<ExitCode, String> {
    let spec = args.deformation.build()?;
    let ids = parse_generator_list(&args.ops).map_err(|e| e.to_string())?;
    if ids.is_empty() {
        return Err("no operands given".into());
    }
    let mut ops = Vec::new();
    for id in &ids {
        ops.push(id.build(&spec).map_err(|e| format!("{}: {}", id, e))?);
    }
    let weights: Vec<HalfInt> = match &args.weights {
        None => ids.iter().map(|id| id.weight()).collect(),
        Some(text) => {
            let parts: Vec<&str> = text.split(',').collect();
            if parts.len() != ids.len() {
                return Err(format!(
                    "--weights needs {} entries, got {}",
                    ids.len(),
                    parts.len()
                ));
            }
            let mut out = Vec::new();
            for p in parts {
                out.push(HalfInt::parse(p).ok_or_else(|| format!("bad weight '{}'", p.trim()))?);
            }
            out
        }
    };
    let arena = OpArena::new();
    let result = n_bracket(&arena, &spec, &BracketInput::with_weights(ops, weights))
        .map_err(|e| e.to_string())?;
    if result.is_zero() {
        println!("0");
        return Ok(ExitCode::SUCCESS);
    }
    match project_w_basis(&result, &spec) {
        Some(terms) => {
            let rendered: Vec<String> = terms
                .iter()
                .map(|(kind, m, r, c)| {
                    let name = match kind {
                        rpq_core::generators::WKind::B => "WB",
                        rpq_core::generators::WKind::Bbar => "WBbar",
                        rpq_core::generators::WKind::F => "WF",
                        rpq_core::generators::WKind::Fbar => "WFbar",
                    };
                    format!("{} * {}({},{})", c, name, m, r)
                })
                .collect();
            println!("{}", rendered.join(" + "));
        }
        None => {
            // Not in the W-generator span; print the normal form.
            println!("{}", result);
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_table(args: TableArgs) -> Result<ExitCode, String> {
    let spec = args.deformation.build()?;
    let repairs = if args.paper_literal {
        RepairFlags::paper_literal()
    } else {
        RepairFlags::default()
    };
    match args.kind.as_str() {
        "f" => {
            let grid = match &args.grid {
                Some(g) => parse_grid(g).map_err(|e| e.to_string())?,
                None => parse_grid("m1=-1..1,r1=1..2,m2=-1..1,r2=1..2").unwrap(),
            };
            let get = |name: &str| {
                grid.get(name)
                    .copied()
                    .ok_or_else(|| format!("grid needs '{}'", name))
            };
            let (m1r, r1r, m2r, r2r) = (get("m1")?, get("r1")?, get("m2")?, get("r2")?);
            for m1 in m1r.lo..=m1r.hi {
                for r1 in r1r.lo.max(1)..=r1r.hi {
                    for m2 in m2r.lo..=m2r.hi {
                        for r2 in r2r.lo.max(1)..=r2r.hi {
                            if m1 + r1 < 1 || m2 + r2 < 1 {
                                continue;
                            }
                            let terms = structure_f(&spec, &repairs, m1, r1 as u32, m2, r2 as u32);
                            let shown: Vec<String> = terms
                                .iter()
                                .map(|(a, c)| {
                                    format!(
                                        "alpha={} (r_bar={}): {}",
                                        a,
                                        r1 + r2 - 1 - *a as i64,
                                        c
                                    )
                                })
                                .collect();
                            println!(
                                "f[m1={},r1={};m2={},r2={}] = {}",
                                m1,
                                r1,
                                m2,
                                r2,
                                if shown.is_empty() {
                                    "0".into()
                                } else {
                                    shown.join("; ")
                                }
                            );
                        }
                    }
                }
            }
        }
        "qnorm" => {
            let n = args.n.unwrap_or(2);
            if n < 2 {
                return Err("normalizer table needs n >= 2".into());
            }
            println!("Q({}) = {}", n, rpq_core::catalog::normalizer_q(&spec, n));
        }
        "vandermonde" => {
            let modes_text = args
                .modes
                .as_ref()
                .ok_or_else(|| "vandermonde table needs --modes".to_string())?;
            let modes: Result<Vec<i64>, _> = modes_text
                .split(',')
                .map(|s| s.trim().parse::<i64>())
                .collect();
            let modes = modes.map_err(|_| format!("bad modes '{}'", modes_text))?;
            println!(
                "V_{}({:?}) = {}",
                modes.len(),
                modes,
                rpq_core::catalog::vandermonde(&spec, &modes)
            );
        }
        other => {
            return Err(format!(
                "unknown table kind '{}' (expected f|qnorm|vandermonde)",
                other
            ))
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_report_diff(old: &Path, new: &Path) -> Result<ExitCode, String> {
    let load = |p: &Path| -> Result<Report, String> {
        let text =
            std::fs::read_to_string(p).map_err(|e| format!("report '{}': {}", p.display(), e))?;
        serde_json::from_str(&text).map_err(|e| format!("report '{}': {}", p.display(), e))
    };
    let old_r = load(old)?;
    let new_r = load(new)?;
    let diff = diff_reports(&old_r, &new_r).map_err(|e| e.to_string())?;
    if diff.is_empty() {
        println!("reports agree ({} checks)", old_r.summary.total);
        Ok(ExitCode::SUCCESS)
    } else {
        for d in &diff {
            println!("{}", d);
        }
        Ok(ExitCode::from(2))
    }
}
