//! The `corechase` command line: `roots`, `experiment` and `bench`.
//!
//! Exit codes: 0 success, 1 usage or input error, 2 numerical failure.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use serde_json::{json, Value};

use crate::backerr::{self, loglog_slope, random_poly, ExperimentConfig, Method, Status};
use crate::companion::{preprocess, Scaling};
use crate::dense::{dense_roots, MAX_DENSE};
use crate::error::{InputError, SolveError};
use crate::qr::{solve_qr, Diagnostics, SolveOptions};
use crate::qz::solve_qz;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_NUMERICAL: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "corechase", version, about = "Polynomial roots by core-chasing QR and QZ")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Compute the roots of one polynomial.
    Roots(RootsArgs),
    /// Run a backward-error experiment grid and write a CSV table.
    Experiment(ExperimentArgs),
    /// Time the solvers over a list of degrees.
    Bench(BenchArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SolverKind {
    Qr,
    Qz,
    Dense,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ScaleArg {
    Monic,
    Norm,
    None,
}

impl From<ScaleArg> for Scaling {
    fn from(s: ScaleArg) -> Self {
        match s {
            ScaleArg::Monic => Scaling::Monic,
            ScaleArg::Norm => Scaling::Norm,
            ScaleArg::None => Scaling::None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Order {
    Ascending,
    Descending,
}

#[derive(Debug, Args)]
pub struct RootsArgs {
    /// JSON file holding an array of [re, im] coefficient pairs.
    #[arg(required_unless_present = "inline", conflicts_with = "inline")]
    pub file: Option<PathBuf>,
    /// Coefficients on the command line: comma-separated reals, or a JSON array of [re, im] pairs.
    #[arg(long, allow_hyphen_values = true)]
    pub inline: Option<String>,
    #[arg(long, value_enum, default_value = "qr")]
    pub method: SolverKind,
    /// Scaling for the pencil method (the QR method always divides by the leading coefficient).
    #[arg(long, value_enum, default_value = "norm")]
    pub scale: ScaleArg,
    #[arg(long, value_enum, default_value = "ascending")]
    pub order: Order,
    /// Sweeps allowed without a deflation.
    #[arg(long, default_value_t = 30)]
    pub max_iter: usize,
    #[arg(long, conflicts_with = "csv")]
    pub json: bool,
    /// One `re,im` line per root (the default).
    #[arg(long)]
    pub csv: bool,
    /// Also report sweep counts and sine-product drift.
    #[arg(long)]
    pub diagnostics: bool,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct ExperimentArgs {
    #[arg(long, value_delimiter = ',', default_value = "50")]
    pub degrees: Vec<usize>,
    /// Exponent spreads, as a list (`1,4,8`) or an inclusive range (`1..12`).
    #[arg(long, default_value = "1..12", value_parser = parse_rhos)]
    pub rhos: RhoList,
    #[arg(long, default_value_t = 100)]
    pub samples: usize,
    /// companionQR, companionQZ, companionQZ_unscaled, denseQR; empty for none.
    #[arg(long, value_delimiter = ',', default_value = "companionQR")]
    pub methods: Vec<String>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Also accumulate the transformations and record the matrix backward error.
    #[arg(long)]
    pub accumulate: bool,
    /// Output CSV path; stdout if absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RhoList(pub Vec<u32>);

fn parse_rhos(s: &str) -> Result<RhoList, String> {
    if let Some((a, b)) = s.split_once("..") {
        let a: u32 = a.trim().parse().map_err(|e| format!("bad range start '{a}': {e}"))?;
        let b: u32 = b.trim().parse().map_err(|e| format!("bad range end '{b}': {e}"))?;
        if a > b {
            return Err(format!("empty range {a}..{b}"));
        }
        return Ok(RhoList((a..=b).collect()));
    }
    s.split(',')
        .filter(|t| !t.trim().is_empty())
        .map(|t| t.trim().parse::<u32>().map_err(|e| format!("bad rho '{t}': {e}")))
        .collect::<Result<_, _>>()
        .map(RhoList)
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    #[arg(long, value_delimiter = ',', default_value = "256,512,1024,2048")]
    pub degrees: Vec<usize>,
    /// Timed runs per point; the median is reported.
    #[arg(long, default_value_t = 3)]
    pub repeats: usize,
    /// Include the dense solver up to this degree.
    #[arg(long, default_value_t = MAX_DENSE)]
    pub dense_max: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output CSV path; stdout if absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Parse and run; `out` receives results, `err` messages and summaries.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            if e.use_stderr() {
                let _ = write!(err, "{text}");
            } else {
                let _ = write!(out, "{text}");
            }
            return code;
        }
    };
    let result = match cli.command {
        Command::Roots(a) => cmd_roots(&a, out, err),
        Command::Experiment(a) => cmd_experiment(&a, out, err),
        Command::Bench(a) => cmd_bench(&a, out, err),
    };
    match result {
        Ok(()) => EXIT_OK,
        Err(CliError::Usage(m)) => {
            let _ = writeln!(err, "error: {m}");
            EXIT_USAGE
        }
        Err(CliError::Numerical(m)) => {
            let _ = writeln!(err, "error: {m}");
            EXIT_NUMERICAL
        }
    }
}

enum CliError {
    Usage(String),
    Numerical(String),
}

impl From<SolveError> for CliError {
    fn from(e: SolveError) -> Self {
        match e {
            SolveError::Input(_) => CliError::Usage(e.to_string()),
            _ => CliError::Numerical(e.to_string()),
        }
    }
}

impl From<InputError> for CliError {
    fn from(e: InputError) -> Self {
        CliError::Usage(e.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Usage(e.to_string())
    }
}

/// Word of `text` around a 1-based line/column position.
fn token_at(text: &str, line: usize, column: usize) -> String {
    let Some(l) = text.lines().nth(line.saturating_sub(1)) else {
        return String::from("end of input");
    };
    let chars: Vec<char> = l.chars().collect();
    if chars.is_empty() {
        return String::from("end of input");
    }
    let delim = |c: char| c.is_whitespace() || matches!(c, ',' | '[' | ']');
    let mut i = column.saturating_sub(1).min(chars.len() - 1);
    if delim(chars[i]) {
        return chars[i].to_string();
    }
    while i > 0 && !delim(chars[i - 1]) {
        i -= 1;
    }
    let mut j = i;
    while j < chars.len() && !delim(chars[j]) {
        j += 1;
    }
    chars[i..j].iter().collect()
}

/// Parse a JSON array of `[re, im]` pairs.
pub fn parse_coefficients_json(text: &str) -> Result<Vec<Complex64>, InputError> {
    let v: Value = serde_json::from_str(text).map_err(|e| {
        if e.is_eof() {
            InputError::Parse(String::from("malformed JSON: unexpected end of input"))
        } else {
            InputError::Parse(format!(
                "malformed JSON at line {} column {}: unexpected token `{}`",
                e.line(),
                e.column(),
                token_at(text, e.line(), e.column())
            ))
        }
    })?;
    let Value::Array(items) = v else {
        return Err(InputError::Parse(format!("expected an array of [re, im] pairs, found `{v}`")));
    };
    items
        .iter()
        .map(|item| match item.as_array().map(|p| p.as_slice()) {
            Some([re, im]) => match (re.as_f64(), im.as_f64()) {
                (Some(re), Some(im)) => Ok(Complex64::new(re, im)),
                _ => Err(InputError::Parse(format!("non-numeric coefficient `{item}`"))),
            },
            _ => Err(InputError::Parse(format!("expected a [re, im] pair, found `{item}`"))),
        })
        .collect()
}

/// Parse inline coefficients: a JSON array of pairs, or comma-separated reals.
pub fn parse_coefficients_inline(text: &str) -> Result<Vec<Complex64>, InputError> {
    if text.trim_start().starts_with('[') {
        return parse_coefficients_json(text);
    }
    text.split(',')
        .map(|t| {
            let t = t.trim();
            t.parse::<f64>()
                .map(|x| Complex64::new(x, 0.0))
                .map_err(|_| InputError::Parse(format!("not a number: `{t}`")))
        })
        .collect()
}

fn diagnostics_json(d: &Diagnostics) -> Value {
    json!({
        "sweeps": d.sweeps,
        "turnovers": d.turnovers,
        "exceptional_shifts": d.exceptional_shifts,
        "sine_drift_c": d.sine_drift_c,
        "sine_drift_b": d.sine_drift_b,
    })
}

fn cmd_roots(a: &RootsArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<(), CliError> {
    let mut coeffs = match (&a.inline, &a.file) {
        (Some(s), _) => parse_coefficients_inline(s)?,
        (None, Some(path)) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
            parse_coefficients_json(&text)?
        }
        (None, None) => return Err(CliError::Usage(String::from("no coefficients given"))),
    };
    if a.order == Order::Descending {
        coeffs.reverse();
    }
    let p = preprocess(&coeffs)?;
    let opts = SolveOptions {
        max_sweeps: a.max_iter,
        seed: a.seed,
        ..Default::default()
    };
    let (roots, diag) = match a.method {
        SolverKind::Qr => {
            let s = solve_qr(&p, &opts)?;
            (s.roots, Some(s.diagnostics))
        }
        SolverKind::Qz => {
            let s = solve_qz(&p, a.scale.into(), &opts)?;
            (s.roots, Some(s.diagnostics))
        }
        SolverKind::Dense => {
            if p.degree() > MAX_DENSE {
                return Err(CliError::Usage(format!("dense method is limited to degree {MAX_DENSE}")));
            }
            (dense_roots(&p, a.seed)?, None)
        }
    };
    if a.json {
        let list: Vec<Value> = roots.iter().map(|z| json!([z.re + 0.0, z.im + 0.0])).collect();
        let v = match (&diag, a.diagnostics) {
            (Some(d), true) => json!({ "roots": list, "diagnostics": diagnostics_json(d) }),
            _ => Value::Array(list),
        };
        writeln!(out, "{v}")?;
    } else {
        for z in &roots {
            // adding zero turns -0 into 0
            writeln!(out, "{},{}", z.re + 0.0, z.im + 0.0)?;
        }
        if let (Some(d), true) = (&diag, a.diagnostics) {
            writeln!(
                err,
                "sweeps={} turnovers={} exceptional_shifts={} sine_drift_c={:e} sine_drift_b={:e}",
                d.sweeps, d.turnovers, d.exceptional_shifts, d.sine_drift_c, d.sine_drift_b
            )?;
        }
    }
    Ok(())
}

fn cmd_experiment(a: &ExperimentArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<(), CliError> {
    let methods = a
        .methods
        .iter()
        .filter(|m| !m.trim().is_empty())
        .map(|m| m.trim().parse::<Method>().map_err(CliError::Usage))
        .collect::<Result<Vec<_>, _>>()?;
    let cfg = ExperimentConfig {
        degrees: a.degrees.clone(),
        rhos: a.rhos.0.clone(),
        samples: a.samples,
        methods: methods.clone(),
        seed: a.seed,
        accumulate: a.accumulate,
    };
    let reports = backerr::run_experiment(&cfg);
    match &a.out {
        Some(path) => backerr::write_csv_file(path, &reports).map_err(|e| CliError::Usage(e.to_string()))?,
        None => backerr::write_csv(&mut *out, &reports)?,
    }
    let summary: &mut dyn Write = if a.out.is_some() { out } else { err };
    for m in methods {
        let rows: Vec<_> = reports
            .iter()
            .filter(|r| r.method == m && r.status == Status::Ok)
            .collect();
        let failed = reports.iter().filter(|r| r.method == m && r.status != Status::Ok).count();
        let pts: Vec<(f64, f64)> = rows.iter().map(|r| (r.norm_a, m.metric(r))).collect();
        match loglog_slope(&pts) {
            Ok(s) => writeln!(
                summary,
                "{m}: slope {:.3} ± {:.3} over {} decades ({} runs, {failed} failed)",
                s.slope,
                s.stderr,
                s.decades,
                rows.len()
            )?,
            Err(e) => writeln!(summary, "{m}: slope unavailable: {e} ({} runs, {failed} failed)", rows.len())?,
        }
        if a.accumulate {
            let pts: Vec<(f64, f64)> = rows
                .iter()
                .filter_map(|r| r.delta_big_a.map(|d| (r.norm_a, d)))
                .collect();
            if let Ok(s) = loglog_slope(&pts) {
                writeln!(summary, "{m}: matrix backward error slope {:.3} ± {:.3}", s.slope, s.stderr)?;
            }
        }
    }
    Ok(())
}

/// Median wall time in seconds of solving one random polynomial of the given
/// degree, after one discarded run.
pub fn time_solve(method: Method, degree: usize, repeats: usize, seed: u64) -> Result<f64, SolveError> {
    let p = random_poly(degree, 1, seed)?;
    let opts = SolveOptions {
        seed,
        ..Default::default()
    };
    let once = || -> Result<f64, SolveError> {
        let t = Instant::now();
        match method {
            Method::CompanionQr => drop(solve_qr(&p, &opts)?),
            Method::CompanionQz => drop(solve_qz(&p, Scaling::Norm, &opts)?),
            Method::CompanionQzUnscaled => drop(solve_qz(&p, Scaling::None, &opts)?),
            Method::DenseQr => drop(dense_roots(&p, seed)?),
        }
        Ok(t.elapsed().as_secs_f64())
    };
    once()?;
    let mut times = (0..repeats.max(1)).map(|_| once()).collect::<Result<Vec<_>, _>>()?;
    times.sort_by(f64::total_cmp);
    let m = times.len();
    Ok(if m % 2 == 1 {
        times[m / 2]
    } else {
        0.5 * (times[m / 2 - 1] + times[m / 2])
    })
}

fn cmd_bench(a: &BenchArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<(), CliError> {
    if a.repeats == 0 {
        return Err(CliError::Usage(String::from("--repeats must be at least 1")));
    }
    if a.degrees.iter().any(|&d| d < 2) {
        return Err(CliError::Usage(String::from("degrees must be at least 2")));
    }
    let mut rows: Vec<(Method, usize, f64)> = Vec::new();
    for &n in &a.degrees {
        for m in [Method::CompanionQr, Method::CompanionQz, Method::DenseQr] {
            if m == Method::DenseQr && n > a.dense_max.min(MAX_DENSE) {
                continue;
            }
            rows.push((m, n, time_solve(m, n, a.repeats, a.seed)?));
        }
    }
    let mut csv = String::from("method,degree,seconds\n");
    for (m, n, t) in &rows {
        csv.push_str(&format!("{m},{n},{t:e}\n"));
    }
    let summary: &mut dyn Write = match &a.out {
        Some(path) => {
            std::fs::write(path, &csv).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
            out
        }
        None => {
            write!(out, "{csv}")?;
            err
        }
    };
    let time = |m: Method, n: usize| rows.iter().find(|r| r.0 == m && r.1 == n).map(|r| r.2);
    for m in [Method::CompanionQr, Method::CompanionQz, Method::DenseQr] {
        for &n in &a.degrees {
            if let (Some(t1), Some(t2)) = (time(m, n), time(m, 2 * n)) {
                writeln!(summary, "{m}: t({})/t({n}) = {:.2}", 2 * n, t2 / t1)?;
            }
        }
    }
    for &n in &a.degrees {
        if let (Some(qr), Some(qz)) = (time(Method::CompanionQr, n), time(Method::CompanionQz, n)) {
            writeln!(summary, "QZ/QR at degree {n}: {:.2}", qz / qr)?;
        }
    }
    Ok(())
}
