//! Command dispatch for the `gevreylab` binary.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use gevreylab::division::{decompose_available, decompose_with, WeierstrassDivisor};
use gevreylab::gevrey::{estimate_order, norm_sequence, norms_of, GevreyEstimate, NormProxy};
use gevreylab::input::{is_problem_file, parse_branch, parse_radius, ProblemFile, SeriesFile};
use gevreylab::nagumo::{check_norm_inequalities, dominance_check, DominanceRow, NagumoConfig, PolyRadius, NormInequalityReport};
use gevreylab::solver::{solve, PdeProblem};
use gevreylab::text::print_series;
use gevreylab::{Error, Rational, Series};
use serde::Serialize;

#[derive(Debug, Parser)]
#[command(name = "gevreylab", version, about = "Formal solutions of singular first-order PDEs")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub flags: Flags,
}

#[derive(Debug, Clone, Default, clap::Args)]
pub struct Flags {
    /// Truncation order (overrides the file).
    #[arg(long, global = true)]
    pub trunc: Option<u32>,
    /// Highest P-adic index to compute.
    #[arg(long = "padic-terms", global = true)]
    pub padic_terms: Option<usize>,
    /// Radius of the norm proxy, a positive rational such as 1/2.
    #[arg(long, global = true)]
    pub radius: Option<String>,
    /// Norm proxy for Gevrey estimates.
    #[arg(long, global = true, value_enum)]
    pub proxy: Option<ProxyArg>,
    /// Directory for report files; stdout when absent.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ProxyArg {
    Sum,
    Max,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum)]
pub enum Format {
    #[default]
    Json,
    Csv,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve the problem in a TOML file.
    Solve {
        file: PathBuf,
        /// auto, divergent or convergent.
        #[arg(long)]
        branch: Option<String>,
    },
    /// P-adic decomposition of `f` by `P`.
    Decompose { file: PathBuf },
    /// Weierstrass division of `f` by `P`.
    Divide { file: PathBuf },
    /// Gevrey-order estimate of a decomposition or of a solved problem.
    Gevrey { file: PathBuf },
    /// Grid checks of the Nagumo-norm inequalities (and the majorant
    /// dominance diagnostic for problem files).
    NagumoCheck { file: PathBuf },
}

/// Failure of a command, with its exit code.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Input(Error),
    #[error("hypotheses not satisfied: {0}")]
    Refusal(Error),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Refusal(_) => 2,
            _ => 1,
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::Refusal(_) | Error::Resonance { .. } => CliError::Refusal(e),
            other => CliError::Input(other),
        }
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

/// A rendered report: JSON always, CSV when the command has a table.
pub struct Output {
    pub name: &'static str,
    pub json: String,
    pub csv: String,
}

fn read(path: &Path) -> CliResult<String> {
    std::fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

#[derive(Serialize)]
struct EstimateOrError {
    #[serde(skip_serializing_if = "Option::is_none")]
    estimate: Option<GevreyEstimate<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    error: Option<String>,
}

fn estimate(values: &gevreylab::gevrey::NormSequence<f64>) -> EstimateOrError {
    match estimate_order(values) {
        Ok(e) => EstimateOrError {
            estimate: Some(e),
            error: None,
        },
        Err(e) => EstimateOrError {
            estimate: None,
            error: Some(e.to_string()),
        },
    }
}

struct Settings {
    proxy: NormProxy,
    radius: Rational,
}

fn settings(flags: &Flags, options: &gevreylab::input::Options) -> CliResult<Settings> {
    let proxy = match flags.proxy {
        Some(ProxyArg::Sum) => NormProxy::CoeffSum,
        Some(ProxyArg::Max) => NormProxy::MaxAbs,
        None => options.proxy()?,
    };
    let radius = match &flags.radius {
        Some(r) => parse_radius(r)?,
        None => options.radius()?,
    };
    Ok(Settings { proxy, radius })
}

fn norm_csv(columns: &[Vec<f64>]) -> String {
    let mut out = String::from("component,n,M_n\n");
    for (c, values) in columns.iter().enumerate() {
        for (n, v) in values.iter().enumerate() {
            let _ = writeln!(out, "{c},{n},{v}");
        }
    }
    out
}

#[derive(Serialize)]
struct SolveReport {
    command: &'static str,
    variables: Vec<String>,
    trunc: u32,
    branch: String,
    h: Option<String>,
    certified_order: u32,
    residual_order: String,
    solution: Vec<String>,
    decomposition: Vec<Vec<String>>,
    proxy: NormProxy,
    radius: String,
    norms: Vec<Vec<f64>>,
    gevrey: Vec<EstimateOrError>,
}

fn load_problem(path: &Path, flags: &Flags) -> CliResult<(ProblemFile, PdeProblem<Rational>)> {
    let source = read(path)?;
    let pf = ProblemFile::from_toml(&source)?;
    let problem = pf.build(&source, flags.trunc)?;
    Ok((pf, problem))
}

fn run_solve(path: &Path, branch: Option<&str>, flags: &Flags) -> CliResult<Output> {
    let (pf, problem) = load_problem(path, flags)?;
    let names = pf.names()?;
    let choice = match branch {
        Some(b) => parse_branch(b)?,
        None => pf.options.branch()?,
    };
    let terms = flags.padic_terms.or(pf.options.padic_terms);
    let report = solve(&problem, choice, terms)?;
    let s = settings(flags, &pf.options)?;
    let sequences: Vec<_> = report
        .decomposition
        .iter()
        .map(|d| norm_sequence::<Rational, f64>(d, s.proxy, &s.radius))
        .collect();
    let out = SolveReport {
        command: "solve",
        trunc: problem.trunc(),
        branch: report.branch.to_string(),
        h: report.h.as_ref().map(|h| print_series(h, &names)),
        certified_order: report.certified_order,
        residual_order: report.residual_order.to_string(),
        solution: report
            .plain
            .iter()
            .map(|y| print_series(&y.truncate(report.certified_order), &names))
            .collect(),
        decomposition: report
            .decomposition
            .iter()
            .map(|d| d.coeffs().iter().map(|c| print_series(c, &names)).collect())
            .collect(),
        proxy: s.proxy,
        radius: s.radius.to_string(),
        norms: sequences.iter().map(|n| n.values.clone()).collect(),
        gevrey: sequences.iter().map(estimate).collect(),
        variables: names,
    };
    Ok(Output {
        name: "solve",
        csv: norm_csv(&out.norms),
        json: to_json(&out),
    })
}

fn to_json<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("report serializes");
    s.push('\n');
    s
}

struct LoadedSeries {
    file: SeriesFile,
    input: gevreylab::input::SeriesInput,
}

fn load_series(path: &Path, flags: &Flags) -> CliResult<LoadedSeries> {
    let source = read(path)?;
    let file = SeriesFile::from_toml(&source)?;
    let input = file.build(&source, flags.trunc)?;
    Ok(LoadedSeries { file, input })
}

fn divisor_of(loaded: &LoadedSeries) -> CliResult<WeierstrassDivisor<Rational>> {
    let p = loaded
        .input
        .p
        .as_ref()
        .ok_or_else(|| Error::InvalidInput("missing `P`".into()))?;
    Ok(WeierstrassDivisor::new(p, &loaded.input.ell)?)
}

#[derive(Serialize)]
struct DecomposeReport {
    command: &'static str,
    variables: Vec<String>,
    f: String,
    p: String,
    alpha: Vec<u32>,
    certified_order: u32,
    coefficients: Vec<String>,
}

fn decompose_series(
    loaded: &LoadedSeries,
    flags: &Flags,
) -> CliResult<gevreylab::division::PAdicDecomposition<Rational>> {
    let div = divisor_of(loaded)?;
    let all = decompose_available(&div, &loaded.input.f)?;
    match flags.padic_terms.or(loaded.file.options.padic_terms) {
        Some(n) if n + 1 < all.len() => Ok(decompose_with(&div, &loaded.input.f, n)?),
        _ => Ok(all),
    }
}

fn run_decompose(path: &Path, flags: &Flags) -> CliResult<Output> {
    let loaded = load_series(path, flags)?;
    let dec = decompose_series(&loaded, flags)?;
    let names = &loaded.input.names;
    let coefficients: Vec<String> = dec.coeffs().iter().map(|c| print_series(c, names)).collect();
    let mut csv = String::from("n,f_n\n");
    for (n, c) in coefficients.iter().enumerate() {
        let _ = writeln!(csv, "{n},\"{c}\"");
    }
    let out = DecomposeReport {
        command: "decompose",
        f: print_series(&loaded.input.f, names),
        p: print_series(dec.p(), names),
        alpha: dec.divisor().alpha().as_slice().to_vec(),
        certified_order: dec.certified_order(),
        coefficients,
        variables: names.clone(),
    };
    Ok(Output {
        name: "decompose",
        json: to_json(&out),
        csv,
    })
}

#[derive(Serialize)]
struct DivideReport {
    command: &'static str,
    variables: Vec<String>,
    f: String,
    p: String,
    alpha: Vec<u32>,
    quotient: Option<String>,
    quotient_trunc: Option<u32>,
    remainder: String,
    remainder_trunc: u32,
}

fn run_divide(path: &Path, flags: &Flags) -> CliResult<Output> {
    let loaded = load_series(path, flags)?;
    let div = divisor_of(&loaded)?;
    let names = &loaded.input.names;
    let r = div.remainder(&loaded.input.f)?;
    let q = div.quotient(&loaded.input.f).ok();
    let out = DivideReport {
        command: "divide",
        f: print_series(&loaded.input.f, names),
        p: print_series(div.p(), names),
        alpha: div.alpha().as_slice().to_vec(),
        quotient: q.as_ref().map(|q| print_series(q, names)),
        quotient_trunc: q.as_ref().map(Series::trunc),
        remainder: print_series(&r, names),
        remainder_trunc: r.trunc(),
        variables: names.clone(),
    };
    let mut csv = String::from("part,series\n");
    if let Some(q) = &out.quotient {
        let _ = writeln!(csv, "q,\"{q}\"");
    }
    let _ = writeln!(csv, "r,\"{}\"", out.remainder);
    Ok(Output {
        name: "divide",
        json: to_json(&out),
        csv,
    })
}

#[derive(Serialize)]
struct GevreyReport {
    command: &'static str,
    proxy: NormProxy,
    radius: String,
    norms: Vec<Vec<f64>>,
    gevrey: Vec<EstimateOrError>,
}

fn run_gevrey(path: &Path, flags: &Flags) -> CliResult<Output> {
    let source = read(path)?;
    let (sequences, s) = if is_problem_file(&source) {
        let (pf, problem) = load_problem(path, flags)?;
        let terms = flags.padic_terms.or(pf.options.padic_terms);
        let report = solve(&problem, pf.options.branch()?, terms)?;
        let s = settings(flags, &pf.options)?;
        let seqs: Vec<_> = report
            .decomposition
            .iter()
            .map(|d| norm_sequence::<Rational, f64>(d, s.proxy, &s.radius))
            .collect();
        (seqs, s)
    } else {
        let loaded = load_series(path, flags)?;
        let s = settings(flags, &loaded.file.options)?;
        let seqs = match loaded.input.p {
            Some(_) => {
                let dec = decompose_series(&loaded, flags)?;
                vec![norm_sequence::<Rational, f64>(&dec, s.proxy, &s.radius)]
            }
            // without P, the homogeneous components of f
            None => {
                let f = &loaded.input.f;
                let comps: Vec<Series> =
                    (0..=f.trunc()).map(|m| f.homogeneous_component(m)).collect::<Result<_, _>>()?;
                vec![norms_of::<Rational, f64>(&comps, s.proxy, &s.radius)]
            }
        };
        (seqs, s)
    };
    let out = GevreyReport {
        command: "gevrey",
        proxy: s.proxy,
        radius: s.radius.to_string(),
        norms: sequences.iter().map(|n| n.values.clone()).collect(),
        gevrey: sequences.iter().map(estimate).collect(),
    };
    Ok(Output {
        name: "gevrey",
        csv: norm_csv(&out.norms),
        json: to_json(&out),
    })
}

#[derive(Serialize)]
struct NagumoReport {
    command: &'static str,
    radii: Vec<f64>,
    config: NagumoConfig,
    #[serde(skip_serializing_if = "Option::is_none")]
    inequalities: Option<NormInequalityReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    dominance: Option<Vec<DominanceRow>>,
}

fn polyradius(d: usize, options: &gevreylab::input::Options, flags: &Flags) -> CliResult<PolyRadius> {
    if let Some(r) = &options.radii {
        return Ok(PolyRadius::new(r.clone())?);
    }
    let r = match &flags.radius {
        Some(t) => rational_to_f64(&parse_radius(t)?),
        None => 1.0,
    };
    Ok(PolyRadius::uniform(d, r)?)
}

fn rational_to_f64(q: &Rational) -> f64 {
    use num_traits::ToPrimitive;
    q.to_f64().unwrap_or(f64::NAN)
}

fn run_nagumo(path: &Path, flags: &Flags) -> CliResult<Output> {
    let source = read(path)?;
    let cfg = NagumoConfig::default();
    let out = if is_problem_file(&source) {
        let (pf, problem) = load_problem(path, flags)?;
        let report = solve(&problem, pf.options.branch()?, flags.padic_terms.or(pf.options.padic_terms))?;
        let pr = polyradius(problem.dim(), &pf.options, flags)?;
        let one = Rational::from_integer(1.into());
        let n_max = report.decomposition[0].len().saturating_sub(1).min(10);
        let dom = dominance_check(&problem, &report, &pr, &cfg, &one, &one, n_max)?;
        NagumoReport {
            command: "nagumo-check",
            radii: pr.radii().to_vec(),
            config: cfg,
            inequalities: None,
            dominance: Some(dom.rows),
        }
    } else {
        let loaded = load_series(path, flags)?;
        let f = &loaded.input.f;
        let g = loaded.input.g.clone().unwrap_or_else(|| Series::one(f.dim(), f.trunc()));
        let pr = polyradius(f.dim(), &loaded.file.options, flags)?;
        let rep = check_norm_inequalities(f, &g, loaded.file.m.unwrap_or(1), loaded.file.k.unwrap_or(1), &pr, &cfg)?;
        NagumoReport {
            command: "nagumo-check",
            radii: pr.radii().to_vec(),
            config: cfg,
            inequalities: Some(rep),
            dominance: None,
        }
    };
    let mut csv = String::new();
    if let Some(rep) = &out.inequalities {
        csv.push_str("name,lhs,rhs,margin,pass\n");
        for c in &rep.checks {
            let _ = writeln!(csv, "{},{},{},{},{}", c.name, c.lhs, c.rhs, c.margin, c.pass);
        }
    }
    if let Some(rows) = &out.dominance {
        csv.push_str("n,weighted_norm,z_n\n");
        for r in rows {
            let _ = writeln!(csv, "{},{},{}", r.n, r.lhs, r.z);
        }
    }
    Ok(Output {
        name: "nagumo-check",
        json: to_json(&out),
        csv,
    })
}

/// Run one command and return its rendered report.
pub fn execute(cli: &Cli) -> CliResult<Output> {
    let flags = &cli.flags;
    match &cli.command {
        Command::Solve { file, branch } => run_solve(file, branch.as_deref(), flags),
        Command::Decompose { file } => run_decompose(file, flags),
        Command::Divide { file } => run_divide(file, flags),
        Command::Gevrey { file } => run_gevrey(file, flags),
        Command::NagumoCheck { file } => run_nagumo(file, flags),
    }
}

/// Write the report where the flags ask for it; returns what goes to stdout.
pub fn emit(output: &Output, flags: &Flags) -> CliResult<String> {
    let chosen = match flags.format {
        Format::Json => &output.json,
        Format::Csv => &output.csv,
    };
    match &flags.out {
        None => Ok(chosen.clone()),
        Some(dir) => {
            let io = |path: PathBuf| move |source| CliError::Io { path, source };
            std::fs::create_dir_all(dir).map_err(io(dir.clone()))?;
            let json_path = dir.join(format!("{}.json", output.name));
            std::fs::write(&json_path, &output.json).map_err(io(json_path.clone()))?;
            if flags.format == Format::Csv {
                let csv_path = dir.join(format!("{}.csv", output.name));
                std::fs::write(&csv_path, &output.csv).map_err(io(csv_path.clone()))?;
            }
            Ok(String::new())
        }
    }
}

/// Cap rayon's pool from `GEVREYLAB_THREADS`.
pub fn configure_threads() {
    if let Some(n) = std::env::var("GEVREYLAB_THREADS")
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|&n| n > 0)
    {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
}

/// Parse arguments, run, print; returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    configure_threads();
    match execute(&cli).and_then(|o| emit(&o, &cli.flags)) {
        Ok(text) => {
            print!("{text}");
            0
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
