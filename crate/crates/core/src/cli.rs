//! `chgeo` command-line front end.
//!
//! Every command builds one document that can be rendered as JSON, CSV or
//! an aligned text table. JSON documents carry `"schema": "chgeo/1"`.
//!
//! Exit codes: `0` success (including empty results), `1` verification
//! failure, `2` usage error.

use std::collections::BTreeMap;

use clap::{Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::catalog::{self, CatalogEntry};
use crate::classifier::{self, CaseTwo, EmptyReason, SolutionBranch, SweepResult};
use crate::error::{GeoError, Result};
use crate::jacobi;
use crate::rng::DEFAULT_SEED;
use crate::solvable::{AlgebraDocument, RuledSpec, RuledSpecDocument, SolvableAlgebra};
use crate::symbolic;
use crate::verify::{self, Report};

pub const SCHEMA: &str = "chgeo/1";

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Table,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CaseArg {
    I,
    Ii,
}

#[derive(Debug, Parser)]
#[command(name = "chgeo", version, about = "Hypersurfaces with constant principal curvatures in complex hyperbolic space")]
pub struct Cli {
    #[arg(long, global = true, value_enum, default_value = "json")]
    pub format: Format,
    #[arg(long, global = true, env = "CHGEO_SEED", default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    /// Overrides every residual tolerance.
    #[arg(long, global = true)]
    pub tolerance: Option<f64>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Hypersurfaces with two and three distinct principal curvatures.
    Catalog {
        #[arg(long)]
        n: usize,
        /// Radius for the families that come in one-parameter sets.
        #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
        r: f64,
    },
    /// Run all self-check suites.
    Verify,
    /// Solve the constraint system for one case.
    Classify {
        #[arg(long, allow_negative_numbers = true)]
        lambda3: Option<f64>,
        #[arg(long, value_enum)]
        case: Option<CaseArg>,
    },
    /// Differential of the normal-geodesic map and the image shape operator.
    Focal {
        #[arg(long, value_enum)]
        case: CaseArg,
        #[arg(long, default_value_t = 3)]
        n: usize,
        #[arg(long)]
        m1: Option<usize>,
        #[arg(long, allow_negative_numbers = true)]
        lambda3: Option<f64>,
        #[arg(long, allow_negative_numbers = true)]
        r: Option<f64>,
    },
    /// Case (ii) over a uniform lambda3 grid, plus the case (i) point.
    Sweep {
        #[arg(long, default_value_t = 97)]
        points: usize,
        #[arg(long, default_value_t = -0.49, allow_negative_numbers = true)]
        from: f64,
        #[arg(long, default_value_t = 0.49, allow_negative_numbers = true)]
        to: f64,
    },
    /// Structure constants of the solvable algebra, optionally with a ruled
    /// subalgebra `W^{2n-k}`.
    Algebra {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        k: Option<usize>,
    },
}

/// Rendered output of one command.
#[derive(Debug, Clone, PartialEq)]
pub struct Output {
    pub stdout: String,
    pub stderr: String,
    pub code: i32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CatalogDocument {
    pub schema: String,
    pub n: usize,
    pub r: f64,
    pub two: Vec<CatalogEntry>,
    pub three: Option<Vec<CatalogEntry>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassifyDocument {
    pub schema: String,
    pub branch: Option<SolutionBranch>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reason: Option<EmptyReason>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub symbolic: BTreeMap<String, String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FocalDocument {
    pub schema: String,
    pub n: usize,
    pub m1: usize,
    pub lambda: [f64; 3],
    pub b: [f64; 2],
    pub r: f64,
    /// `9 <Phi_* A, B_A>`.
    pub nine_phi_a: f64,
    /// `9 D(r)`, row major.
    pub nine_d: [f64; 4],
    pub c: [f64; 4],
    pub singular_values: Vec<f64>,
    pub kernel_dim: usize,
    pub rank: usize,
    pub image_codim: usize,
    pub gap_ok: bool,
    /// Shape operator of the image on `B_{u_1}, B_{u_2}`, row major.
    pub shape_block: [f64; 4],
    pub image_spectrum: Vec<(f64, usize)>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub symbolic: BTreeMap<String, String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlgebraOutput {
    pub schema: String,
    pub algebra: AlgebraDocument,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ruled: Option<RuledSpecDocument>,
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I) -> Output
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            return if code == EXIT_OK {
                Output { stdout: text, stderr: String::new(), code }
            } else {
                Output { stdout: String::new(), stderr: text, code }
            };
        }
    };
    match execute(&cli) {
        Ok(out) => out,
        Err(e) => Output {
            stdout: String::new(),
            stderr: format!("error: {e}\n"),
            code: EXIT_USAGE,
        },
    }
}

pub fn execute(cli: &Cli) -> Result<Output> {
    if let Some(t) = cli.tolerance {
        if !(t.is_finite() && t > 0.0) {
            return Err(GeoError::InvalidInput("tolerance must be positive".into()));
        }
    }
    match &cli.command {
        Command::Catalog { n, r } => cmd_catalog(*n, *r, cli.format),
        Command::Verify => Ok(cmd_verify(cli.seed, cli.tolerance, cli.format)),
        Command::Classify { lambda3, case } => cmd_classify(*lambda3, *case, cli.format),
        Command::Focal { case, n, m1, lambda3, r } => cmd_focal(*case, *n, *m1, *lambda3, *r, cli.format),
        Command::Sweep { points, from, to } => cmd_sweep(*points, *from, *to, cli.format),
        Command::Algebra { n, k } => cmd_algebra(*n, *k, cli.format),
    }
}

fn ok(stdout: String) -> Output {
    Output {
        stdout,
        stderr: String::new(),
        code: EXIT_OK,
    }
}

fn to_json<T: Serialize>(doc: &T) -> String {
    let mut s = serde_json::to_string_pretty(doc).expect("documents serialize");
    s.push('\n');
    s
}

/// Left-aligned columns separated by two spaces.
fn table(header: &[&str], rows: &[Vec<String>]) -> String {
    let mut widths: Vec<usize> = header.iter().map(|h| h.len()).collect();
    for row in rows {
        for (w, cell) in widths.iter_mut().zip(row) {
            *w = (*w).max(cell.len());
        }
    }
    let mut out = String::new();
    let line = |cells: Vec<&str>, out: &mut String| {
        let parts: Vec<String> = cells
            .iter()
            .zip(&widths)
            .map(|(c, w)| format!("{c:<w$}"))
            .collect();
        out.push_str(parts.join("  ").trim_end());
        out.push('\n');
    };
    line(header.to_vec(), &mut out);
    for row in rows {
        line(row.iter().map(String::as_str).collect(), &mut out);
    }
    out
}

fn csv(header: &[&str], rows: &[Vec<String>]) -> String {
    let mut out = header.join(",");
    out.push('\n');
    for row in rows {
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

fn render(format: Format, header: &[&str], rows: &[Vec<String>], json: String) -> String {
    match format {
        Format::Json => json,
        Format::Csv => csv(header, rows),
        Format::Table => table(header, rows),
    }
}

fn opt<T: ToString>(x: Option<T>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

pub fn catalog_document(n: usize, r: f64) -> Result<CatalogDocument> {
    let cat = catalog::catalog(n, r)?;
    let (three, note) = match cat.three {
        Ok(list) => (Some(list), None),
        Err(GeoError::OpenCase { .. }) => (
            None,
            Some("three distinct principal curvatures: classification open for n = 2".to_string()),
        ),
        Err(e) => return Err(e),
    };
    Ok(CatalogDocument {
        schema: SCHEMA.into(),
        n,
        r,
        two: cat.two,
        three,
        note,
    })
}

fn cmd_catalog(n: usize, r: f64, format: Format) -> Result<Output> {
    let doc = catalog_document(n, r)?;
    let entries = doc.two.iter().chain(doc.three.iter().flatten());
    let rows: Vec<Vec<String>> = entries
        .flat_map(|e| {
            e.profile.iter().map(move |(l, m)| {
                vec![
                    e.family.to_string(),
                    e.n.to_string(),
                    opt(e.k),
                    opt(e.r),
                    l.to_string(),
                    m.to_string(),
                ]
            })
        })
        .collect();
    let mut out = ok(render(
        format,
        &["family", "n", "k", "r", "lambda", "mult"],
        &rows,
        to_json(&doc),
    ));
    if let Some(note) = &doc.note {
        if format != Format::Json {
            out.stderr = format!("note: {note}\n");
        }
    }
    Ok(out)
}

#[derive(Serialize)]
struct VerifyDocument<'a> {
    schema: &'a str,
    #[serde(flatten)]
    report: &'a Report,
}

fn cmd_verify(seed: u64, tolerance: Option<f64>, format: Format) -> Output {
    let report = verify::run(seed, tolerance);
    let rows: Vec<Vec<String>> = report
        .suites
        .iter()
        .map(|s| {
            vec![
                s.name.to_string(),
                s.checks.to_string(),
                format!("{:e}", s.max_residual),
                format!("{:e}", s.tolerance),
                s.failures.to_string(),
                if s.passed { "pass" } else { "FAIL" }.to_string(),
            ]
        })
        .collect();
    let doc = VerifyDocument {
        schema: SCHEMA,
        report: &report,
    };
    let mut out = ok(render(
        format,
        &["suite", "checks", "max_residual", "tolerance", "failures", "status"],
        &rows,
        to_json(&doc),
    ));
    if !report.passed {
        out.code = EXIT_FAILURE;
        let failed: Vec<&str> = report.suites.iter().filter(|s| !s.passed).map(|s| s.name).collect();
        out.stderr = format!("verification failed: {}\n", failed.join(", "));
    }
    out
}

fn branch_symbols(b: &SolutionBranch) -> BTreeMap<String, String> {
    symbolic::tags([
        ("lambda1".to_string(), b.lambda1),
        ("lambda2".to_string(), b.lambda2),
        ("lambda3".to_string(), b.lambda3),
        ("b1sq".to_string(), b.b1sq),
        ("b2sq".to_string(), b.b2sq),
    ])
}

const BRANCH_HEADER: [&str; 8] = ["case", "lambda3", "lambda1", "lambda2", "b1sq", "b2sq", "mults", "reason"];

fn branch_row(b: &SolutionBranch) -> Vec<String> {
    let case = match b.case {
        classifier::CaseTag::I => "i",
        classifier::CaseTag::Ii => "ii",
    };
    vec![
        case.into(),
        b.lambda3.to_string(),
        b.lambda1.to_string(),
        b.lambda2.to_string(),
        b.b1sq.to_string(),
        b.b2sq.to_string(),
        format!("{};{};{}", b.mults.m1, b.mults.m2, b.mults.m3),
        String::new(),
    ]
}

fn empty_row(l3: f64, reason: EmptyReason) -> Vec<String> {
    let mut row = vec![String::new(); BRANCH_HEADER.len()];
    row[0] = "ii".into();
    row[1] = l3.to_string();
    row[7] = reason.as_str().into();
    row
}

pub fn classify_document(lambda3: Option<f64>, case: Option<CaseArg>) -> Result<ClassifyDocument> {
    let result = match (case, lambda3) {
        (Some(CaseArg::I), None) => CaseTwo::Branch(classifier::solve_case_one()),
        (Some(CaseArg::I), Some(_)) => {
            return Err(GeoError::InvalidInput("case i fixes lambda3; drop --lambda3".into()))
        }
        (_, Some(l3)) if l3.is_finite() => classifier::solve_case_two(l3),
        (_, Some(_)) => return Err(GeoError::InvalidInput("lambda3 must be finite".into())),
        (_, None) => return Err(GeoError::InvalidInput("--lambda3 is required for case ii".into())),
    };
    Ok(match result {
        CaseTwo::Branch(b) => ClassifyDocument {
            schema: SCHEMA.into(),
            symbolic: branch_symbols(&b),
            branch: Some(b),
            reason: None,
        },
        CaseTwo::Empty(reason) => ClassifyDocument {
            schema: SCHEMA.into(),
            branch: None,
            reason: Some(reason),
            symbolic: BTreeMap::new(),
        },
    })
}

fn cmd_classify(lambda3: Option<f64>, case: Option<CaseArg>, format: Format) -> Result<Output> {
    let doc = classify_document(lambda3, case)?;
    let rows = match (&doc.branch, doc.reason) {
        (Some(b), _) => vec![branch_row(b)],
        (None, Some(reason)) => vec![empty_row(lambda3.unwrap_or(f64::NAN), reason)],
        (None, None) => vec![],
    };
    Ok(ok(render(format, &BRANCH_HEADER, &rows, to_json(&doc))))
}

pub fn focal_document(
    case: CaseArg,
    n: usize,
    m1: Option<usize>,
    lambda3: Option<f64>,
    r: Option<f64>,
) -> Result<FocalDocument> {
    let (branch, m1) = match case {
        CaseArg::I => {
            if lambda3.is_some() {
                return Err(GeoError::InvalidInput("case i fixes lambda3; drop --lambda3".into()));
            }
            let m1 = m1.unwrap_or(n.saturating_sub(1));
            if n < 3 || m1 < 2 {
                return Err(GeoError::InvalidInput("case i needs n >= 3 and m1 >= 2".into()));
            }
            (classifier::solve_case_one(), m1)
        }
        CaseArg::Ii => {
            if m1.is_some_and(|m| m != 1) {
                return Err(GeoError::InvalidInput("case ii has m1 = 1".into()));
            }
            let l3 = lambda3.ok_or_else(|| GeoError::InvalidInput("--lambda3 is required for case ii".into()))?;
            match classifier::solve_case_two(l3) {
                CaseTwo::Branch(b) => (b, 1),
                CaseTwo::Empty(reason) => {
                    return Err(GeoError::InvalidInput(format!(
                        "no case ii hypersurface at lambda3 = {l3}: {}",
                        reason.as_str()
                    )))
                }
            }
        }
    };
    let r = match (r, case) {
        (Some(r), _) => r,
        (None, CaseArg::I) => catalog::special_radius(),
        (None, CaseArg::Ii) => 2.0 * (2.0 * branch.lambda3).atanh(),
    };
    let data = branch.to_non_hopf(n, m1)?;
    let focal = jacobi::transversal_map(&data, r)?;
    let shape = jacobi::image_shape_operator(&focal);
    let c = focal.c_matrix()?;
    let a = &focal.source.a;
    let nine_phi_a = 9.0 * focal.push_forward(a).dot(a);
    let nine_d = [0, 1, 2, 3].map(|i| 9.0 * focal.d[(i / 2, i % 2)]);
    let shape_block = [0, 1, 2, 3].map(|i| shape.u_block[(i / 2, i % 2)]);
    let mut fields = vec![("r".to_string(), r), ("nine_phi_a".to_string(), nine_phi_a)];
    for (i, v) in nine_d.iter().enumerate() {
        fields.push((format!("nine_d[{i}]"), *v));
    }
    for (i, v) in shape_block.iter().enumerate() {
        fields.push((format!("shape_block[{i}]"), *v));
    }
    for (i, l) in data.lambda.iter().enumerate() {
        fields.push((format!("lambda[{i}]"), *l));
    }
    Ok(FocalDocument {
        schema: SCHEMA.into(),
        n,
        m1,
        lambda: data.lambda,
        b: [branch.b1sq.sqrt(), branch.b2sq.sqrt()],
        r,
        nine_phi_a,
        nine_d,
        c: [c[(0, 0)], c[(0, 1)], c[(1, 0)], c[(1, 1)]],
        singular_values: focal.singular_values.clone(),
        kernel_dim: focal.kernel_dim,
        rank: focal.rank,
        image_codim: focal.image_codim,
        gap_ok: focal.gap_ok,
        shape_block,
        image_spectrum: shape.spectrum,
        symbolic: symbolic::tags(fields),
    })
}

fn cmd_focal(
    case: CaseArg,
    n: usize,
    m1: Option<usize>,
    lambda3: Option<f64>,
    r: Option<f64>,
    format: Format,
) -> Result<Output> {
    let doc = focal_document(case, n, m1, lambda3, r)?;
    let join = |xs: &[f64]| xs.iter().map(f64::to_string).collect::<Vec<_>>().join(";");
    let spectrum: Vec<String> = doc.image_spectrum.iter().map(|(l, m)| format!("{l}x{m}")).collect();
    let rows = vec![
        vec!["n".into(), doc.n.to_string()],
        vec!["m1".into(), doc.m1.to_string()],
        vec!["lambda".into(), join(&doc.lambda)],
        vec!["r".into(), doc.r.to_string()],
        vec!["nine_phi_a".into(), doc.nine_phi_a.to_string()],
        vec!["nine_d".into(), join(&doc.nine_d)],
        vec!["c".into(), join(&doc.c)],
        vec!["kernel_dim".into(), doc.kernel_dim.to_string()],
        vec!["rank".into(), doc.rank.to_string()],
        vec!["image_codim".into(), doc.image_codim.to_string()],
        vec!["gap_ok".into(), doc.gap_ok.to_string()],
        vec!["shape_block".into(), join(&doc.shape_block)],
        vec!["image_spectrum".into(), spectrum.join(";")],
    ];
    Ok(ok(render(format, &["quantity", "value"], &rows, to_json(&doc))))
}

pub fn sweep_grid(points: usize, from: f64, to: f64) -> Result<Vec<f64>> {
    if points == 0 || !(from.is_finite() && to.is_finite()) || from >= to {
        return Err(GeoError::InvalidInput("sweep needs points >= 1 and from < to".into()));
    }
    if points == 1 {
        return Ok(vec![from]);
    }
    let step = (to - from) / (points - 1) as f64;
    Ok((0..points).map(|i| from + step * i as f64).collect())
}

fn cmd_sweep(points: usize, from: f64, to: f64, format: Format) -> Result<Output> {
    let result: SweepResult = classifier::sweep(&sweep_grid(points, from, to)?)?;
    let mut rows: Vec<Vec<String>> = result.branches.iter().map(branch_row).collect();
    rows.extend(result.empty.iter().map(|e| empty_row(e.lambda3, e.reason)));
    let mut doc = serde_json::to_value(&result).expect("sweep serializes");
    if let Value::Object(map) = &mut doc {
        map.insert("schema".into(), json!(SCHEMA));
    }
    Ok(ok(render(format, &BRANCH_HEADER, &rows, to_json(&doc))))
}

pub fn algebra_document(n: usize, k: Option<usize>) -> Result<AlgebraOutput> {
    let alg = SolvableAlgebra::new(n)?;
    let ruled = k.map(|k| RuledSpec::canonical(n, k)).transpose()?;
    Ok(AlgebraOutput {
        schema: SCHEMA.into(),
        algebra: alg.to_document(),
        ruled: ruled.map(|s| s.to_document()),
    })
}

fn cmd_algebra(n: usize, k: Option<usize>, format: Format) -> Result<Output> {
    let doc = algebra_document(n, k)?;
    let labels = &doc.algebra.labels;
    let rows: Vec<Vec<String>> = doc
        .algebra
        .brackets
        .iter()
        .map(|b| vec![labels[b.i].clone(), labels[b.j].clone(), labels[b.k].clone(), b.c.to_string()])
        .collect();
    Ok(ok(render(format, &["x", "y", "component", "coefficient"], &rows, to_json(&doc))))
}
