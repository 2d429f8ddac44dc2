//! Command-line front end.
//!
//! Reports go to stdout as JSON, matrices and problem files to disk, logs to
//! stderr. Exit codes:
//!
//! | code | meaning |
//! |------|---------|
//! | 0 | success, all checks passed |
//! | 1 | I/O failure |
//! | 2 | parse or usage error |
//! | 3 | no lateration ordering |
//! | 4 | singular system (affinely dependent points) |
//! | 5 | verification failed |
//! | 6 | dimension mismatch |
//! | 7 | generator resampling budget exhausted |
//! | 8 | numerical breakdown (overflow, growth limit, no convergence) |

use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Deserialize;
use serde_json::{json, Value};

use crate::anchored::{anchored_stress, verify_anchored_stress};
use crate::framework::{read_instance, value_to_rational, write_instance, FrameworkError, GeneralPositionMode, Instance};
use crate::generate::{generate, Attachment, GenConfig, GenError};
use crate::graph::DEFAULT_SEARCH_BUDGET;
use crate::json::{read_matrix_with_backend, write_matrix};
use crate::numerics::{Backend, Matrix, NumericsError, Rational, Scalar, Tolerances};
use crate::sdp::{
    check_certificate, export_anchored_sdp, export_realization_sdp, parse_dense_matrix, parse_sdpa, write_sdpa,
    EdgeKey, ExportOptions, SdpError,
};
use crate::stress::{compute_stress_matrix, verify_stress, StressError, StressOptions};

#[derive(Debug, Parser)]
#[command(name = "lateration-stress", version, about = "Maximum-rank stress certificates for lateration frameworks")]
pub struct RunConfig {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct GlobalArgs {
    /// Arithmetic backend: rational (exact) or float.
    #[arg(long, global = true)]
    pub backend: Option<Backend>,
    /// Relative pivot threshold for linear solves.
    #[arg(long = "tol-solve", global = true)]
    pub tol_solve: Option<f64>,
    /// Relative eigenvalue threshold for numerical rank.
    #[arg(long = "tol-rank", global = true)]
    pub tol_rank: Option<f64>,
    /// Relative negative-eigenvalue allowance for the PSD check.
    #[arg(long = "tol-psd", global = true)]
    pub tol_psd: Option<f64>,
    /// Relative asymmetry allowance.
    #[arg(long = "tol-sym", global = true)]
    pub tol_sym: Option<f64>,
    /// Absolute tolerance when comparing against reference values.
    #[arg(long = "tol-match", global = true)]
    pub tol_match: Option<f64>,
    /// Purify every column, even those already zero off the edge set.
    #[arg(long, global = true)]
    pub no_skip: bool,
    /// Check every (d+1)-subset for affine independence before starting.
    #[arg(long, global = true)]
    pub full_gp_scan: bool,
    /// Lateration ordering as 1-based labels, e.g. "1,2,3,4".
    #[arg(long, global = true, value_parser = parse_order)]
    pub order: Option<OrderArg>,
    /// Abort when a rational entry exceeds this many bits.
    #[arg(long, global = true)]
    pub max_bits: Option<u64>,
    /// State budget for the ordering search.
    #[arg(long, global = true, default_value_t = DEFAULT_SEARCH_BUDGET)]
    pub search_budget: u64,
}

/// A 0-based ordering parsed from a 1-based list.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OrderArg(pub Vec<usize>);

fn parse_order(text: &str) -> Result<OrderArg, String> {
    text.split(',')
        .map(|t| match t.trim().parse::<usize>() {
            Ok(v) if v >= 1 => Ok(v - 1),
            _ => Err(format!("`{t}` is not a 1-based vertex label")),
        })
        .collect::<Result<_, _>>()
        .map(OrderArg)
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Compute and verify a stress certificate for a framework or network.
    Certify {
        input: PathBuf,
        /// Directory for the stress, trace and report files.
        #[arg(long, default_value = ".")]
        out_dir: PathBuf,
    },
    /// Check a stress matrix file against an instance.
    Verify { input: PathBuf, matrix: PathBuf },
    /// Write a seeded random lateration instance.
    Gen(GenArgs),
    /// Export the semidefinite relaxation as an SDPA sparse file.
    ExportSdp {
        input: PathBuf,
        /// Output path; defaults to `<input stem>.dat-s` in the current directory.
        #[arg(short, long)]
        output: Option<PathBuf>,
        /// Maximize the trace of the position block instead of zero.
        #[arg(long)]
        trace_objective: bool,
        /// JSON list of measured squared lengths overriding the positions.
        #[arg(long)]
        lengths: Option<PathBuf>,
    },
    /// Check a primal-dual certificate pair against an SDPA problem file.
    CheckCert { problem: PathBuf, primal: PathBuf, dual: PathBuf },
}

#[derive(Debug, Clone, Args)]
pub struct GenArgs {
    #[arg(long)]
    pub dim: usize,
    /// Vertices, or sensors when `--anchors` is given.
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub anchors: Option<usize>,
    #[arg(long, env = "STRESS_SEED", default_value_t = 0)]
    pub seed: u64,
    /// uniform, tree, or window:W.
    #[arg(long, default_value = "uniform")]
    pub attachment: Attachment,
    #[arg(long, default_value_t = 0)]
    pub extra_edges: usize,
    #[arg(long, default_value_t = 1000)]
    pub bound: i64,
    #[arg(long, default_value_t = 10_000)]
    pub resample_budget: usize,
    /// Output path; stdout when absent.
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

/// A failed command with its exit code.
#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub message: String,
}

impl Failure {
    fn new(code: u8, message: impl Into<String>) -> Self {
        Self { code, message: message.into() }
    }
}

fn io_failure(path: &Path, e: std::io::Error) -> Failure {
    Failure::new(1, format!("{}: {e}", path.display()))
}

impl From<FrameworkError> for Failure {
    fn from(e: FrameworkError) -> Self {
        Failure::new(2, e.to_string())
    }
}

impl From<NumericsError> for Failure {
    fn from(e: NumericsError) -> Self {
        let code = match e {
            NumericsError::DimensionMismatch(_) => 6,
            _ => 8,
        };
        Failure::new(code, e.to_string())
    }
}

impl From<StressError> for Failure {
    fn from(e: StressError) -> Self {
        let code = match &e {
            StressError::Framework(_) => 2,
            StressError::NotFound | StressError::BudgetExhausted { .. } | StressError::InvalidOrder { .. } => 3,
            StressError::Singular { .. } | StressError::NotGeneralPosition { .. } => 4,
            StressError::VerificationFailed(_) => 5,
            StressError::Numerics(NumericsError::DimensionMismatch(_)) => 6,
            StressError::NonFinite { .. } | StressError::GrowthLimit { .. } | StressError::Numerics(_) => 8,
        };
        Failure::new(code, e.to_string())
    }
}

impl From<GenError> for Failure {
    fn from(e: GenError) -> Self {
        let code = match e {
            GenError::BudgetExhausted { .. } => 7,
            GenError::Usage(_) | GenError::Framework(_) => 2,
        };
        Failure::new(code, e.to_string())
    }
}

impl From<SdpError> for Failure {
    fn from(e: SdpError) -> Self {
        let code = match e {
            SdpError::DimensionMismatch(_) => 6,
            SdpError::Numerics(n) => return n.into(),
            SdpError::Parse { .. } | SdpError::UnknownEdge(_) => 2,
        };
        Failure::new(code, e.to_string())
    }
}

impl GlobalArgs {
    pub fn tolerances(&self) -> Result<Tolerances, Failure> {
        let mut tol = Tolerances::default();
        let overrides = [
            (&mut tol.solve, self.tol_solve),
            (&mut tol.rank, self.tol_rank),
            (&mut tol.psd, self.tol_psd),
            (&mut tol.sym, self.tol_sym),
            (&mut tol.matching, self.tol_match),
        ];
        for (slot, value) in overrides {
            if let Some(v) = value {
                *slot = v;
            }
        }
        tol.validate().map_err(|e| Failure::new(2, e))?;
        Ok(tol)
    }

    pub fn stress_options(&self) -> Result<StressOptions, Failure> {
        Ok(StressOptions {
            tol: self.tolerances()?,
            skip_clean_columns: !self.no_skip,
            general_position: if self.full_gp_scan { GeneralPositionMode::Full } else { GeneralPositionMode::Lazy },
            order: self.order.as_ref().map(|o| o.0.clone()),
            search_budget: self.search_budget,
            max_entry_bits: self.max_bits,
            record_ranks: false,
            verify: false,
        })
    }
}

fn read_file(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| io_failure(path, e))
}

fn write_file(path: &Path, text: &str) -> Result<(), Failure> {
    std::fs::write(path, text).map_err(|e| io_failure(path, e))
}

fn emit(out: &mut dyn Write, value: &Value) -> Result<(), Failure> {
    let text = serde_json::to_string_pretty(value).expect("serializable");
    writeln!(out, "{text}").map_err(|e| Failure::new(1, format!("stdout: {e}")))
}

fn stem(path: &Path) -> String {
    path.file_stem().map_or_else(|| "instance".into(), |s| s.to_string_lossy().into_owned())
}

/// Runs one command, writing its report to `out`. Returns the exit code.
pub fn run(config: &RunConfig, out: &mut dyn Write) -> u8 {
    let result = match &config.command {
        Command::Certify { input, out_dir } => cmd_certify(&config.global, input, out_dir, out),
        Command::Verify { input, matrix } => cmd_verify(&config.global, input, matrix, out),
        Command::Gen(args) => cmd_gen(args, out),
        Command::ExportSdp {
            input,
            output,
            trace_objective,
            lengths,
        } => cmd_export_sdp(input, output.as_deref(), *trace_objective, lengths.as_deref(), out),
        Command::CheckCert { problem, primal, dual } => cmd_check_cert(&config.global, problem, primal, dual, out),
    };
    match result {
        Ok(code) => code,
        Err(f) => {
            log::error!("{}", f.message);
            let _ = emit(out, &json!({ "error": f.message, "exit_code": f.code }));
            f.code
        }
    }
}

/// Parses the process arguments, sets up logging and runs.
pub fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let config = match RunConfig::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let stdout = std::io::stdout();
    let mut lock = stdout.lock();
    ExitCode::from(run(&config, &mut lock))
}

fn read_instance_file(path: &Path) -> Result<Instance, Failure> {
    Ok(read_instance(&read_file(path)?)?)
}

pub fn cmd_certify(global: &GlobalArgs, input: &Path, out_dir: &Path, out: &mut dyn Write) -> Result<u8, Failure> {
    let instance = read_instance_file(input)?;
    let opts = global.stress_options()?;
    let backend = global.backend.unwrap_or(Backend::Rational);
    std::fs::create_dir_all(out_dir).map_err(|e| io_failure(out_dir, e))?;
    let base = stem(input);
    let paths = ["stress", "trace", "report"].map(|kind| out_dir.join(format!("{base}.{kind}.json")));
    let summary = match backend {
        Backend::Rational => certify_with::<Rational>(&instance, &opts, &paths)?,
        Backend::Float => certify_with::<f64>(&instance, &opts, &paths)?,
    };
    let passed = summary["passed"].as_bool().unwrap_or(false);
    emit(out, &summary)?;
    Ok(if passed { 0 } else { 5 })
}

fn certify_with<T: Scalar>(instance: &Instance, opts: &StressOptions, paths: &[PathBuf; 3]) -> Result<Value, Failure> {
    let tol = opts.tol;
    let (matrix, trace, report, passed, extra) = match instance {
        Instance::Framework(f) => {
            let result = compute_stress_matrix::<T>(f, opts)?;
            let report = verify_stress(&result.stress, f, &tol)?;
            let extra = json!({
                "kind": "framework",
                "order": result.order.iter().map(|v| v + 1).collect::<Vec<_>>(),
                "is_dplus1_tree": result.is_dplus1_tree,
                "modifications": result.trace.modifications(),
            });
            let failures = (!report.passed()).then(|| report.describe_failures());
            let report_value = json!({ "passed": report.passed(), "basic_ok": report.basic_ok(), "failures": failures, "checks": report });
            (result.stress, result.trace.to_json(&result.order), report_value, report.passed(), extra)
        }
        Instance::Anchored(net) => {
            let result = anchored_stress::<T>(net, opts)?;
            let report = verify_anchored_stress(&result.matrix, net, &tol)?;
            let extra = json!({
                "kind": "anchored",
                "order": result.order.iter().map(|v| v + 1).collect::<Vec<_>>(),
                "modifications": result.steps.len(),
            });
            let failures = (!report.passed()).then(|| report.describe_failures());
            let report_value = json!({ "passed": report.passed(), "failures": failures, "checks": report });
            let trace = result.trace_json();
            (result.matrix, trace, report_value, report.passed(), extra)
        }
    };
    write_file(&paths[0], &write_matrix(&matrix))?;
    write_file(&paths[1], &(serde_json::to_string_pretty(&trace).expect("serializable") + "\n"))?;
    write_file(&paths[2], &(serde_json::to_string_pretty(&report).expect("serializable") + "\n"))?;
    if !passed {
        log::warn!("verification failed: {}", report["failures"]);
    }
    let mut summary = extra;
    summary["backend"] = json!(T::BACKEND);
    summary["passed"] = json!(passed);
    summary["report"] = report;
    summary["artifacts"] = json!({
        "stress": paths[0].display().to_string(),
        "trace": paths[1].display().to_string(),
        "report": paths[2].display().to_string(),
    });
    Ok(summary)
}

pub fn cmd_verify(global: &GlobalArgs, input: &Path, matrix: &Path, out: &mut dyn Write) -> Result<u8, Failure> {
    let instance = read_instance_file(input)?;
    let text = read_file(matrix)?;
    let (file_backend, m) = if text.trim_start().starts_with('{') {
        read_matrix_with_backend(&text)?
    } else {
        (Backend::Rational, parse_dense_matrix(&text)?)
    };
    let backend = global.backend.unwrap_or(file_backend);
    let tol = global.tolerances()?;
    let report = match backend {
        Backend::Rational => verify_with(&instance, &m, &tol)?,
        Backend::Float => verify_with(&instance, &m.convert::<f64>(), &tol)?,
    };
    let passed = report["passed"].as_bool().unwrap_or(false);
    let mut report = report;
    report["backend"] = json!(backend);
    emit(out, &report)?;
    Ok(if passed { 0 } else { 5 })
}

fn verify_with<T: Scalar>(instance: &Instance, m: &Matrix<T>, tol: &Tolerances) -> Result<Value, Failure> {
    Ok(match instance {
        Instance::Framework(f) => {
            let r = verify_stress(m, f, tol)?;
            let failures = (!r.passed()).then(|| r.describe_failures());
            json!({ "kind": "framework", "passed": r.passed(), "basic_ok": r.basic_ok(), "failures": failures, "checks": r })
        }
        Instance::Anchored(net) => {
            let r = verify_anchored_stress(m, net, tol)?;
            let failures = (!r.passed()).then(|| r.describe_failures());
            json!({ "kind": "anchored", "passed": r.passed(), "failures": failures, "checks": r })
        }
    })
}

pub fn cmd_gen(args: &GenArgs, out: &mut dyn Write) -> Result<u8, Failure> {
    let cfg = GenConfig {
        dim: args.dim,
        n: args.n,
        anchors: args.anchors,
        seed: args.seed,
        attachment: args.attachment,
        extra_edges: args.extra_edges,
        bound: args.bound,
        resample_budget: args.resample_budget,
    };
    let text = write_instance(&generate(&cfg)?);
    match &args.output {
        Some(path) => {
            write_file(path, &text)?;
            emit(out, &json!({ "output": path.display().to_string(), "seed": args.seed }))?;
        }
        None => out.write_all(text.as_bytes()).map_err(|e| Failure::new(1, format!("stdout: {e}")))?,
    }
    Ok(0)
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct LengthEntry {
    edge: Option<[usize; 2]>,
    anchor_edge: Option<[usize; 2]>,
    squared_length: Value,
}

/// `[{"edge": [i, j], "squared_length": ...}, {"anchor_edge": [k, j], ...}]`
/// with 1-based labels.
fn read_lengths(text: &str) -> Result<BTreeMap<EdgeKey, Rational>, Failure> {
    let entries: Vec<LengthEntry> =
        serde_json::from_str(text).map_err(|e| Failure::new(2, format!("lengths file: {e}")))?;
    let mut map = BTreeMap::new();
    for (n, e) in entries.into_iter().enumerate() {
        let one_based = |[a, b]: [usize; 2]| -> Result<(usize, usize), Failure> {
            if a == 0 || b == 0 {
                return Err(Failure::new(2, format!("lengths[{n}]: labels are 1-based")));
            }
            Ok((a - 1, b - 1))
        };
        let key = match (e.edge, e.anchor_edge) {
            (Some(p), None) => one_based(p).map(|(i, j)| EdgeKey::Pair(i, j))?,
            (None, Some(p)) => one_based(p).map(|(k, j)| EdgeKey::Anchor(k, j))?,
            _ => return Err(Failure::new(2, format!("lengths[{n}]: give exactly one of edge, anchor_edge"))),
        };
        let value = value_to_rational(&e.squared_length, &format!("lengths[{n}].squared_length"))?;
        map.insert(key, value);
    }
    Ok(map)
}

pub fn cmd_export_sdp(
    input: &Path,
    output: Option<&Path>,
    trace_objective: bool,
    lengths: Option<&Path>,
    out: &mut dyn Write,
) -> Result<u8, Failure> {
    let instance = read_instance_file(input)?;
    let opts = ExportOptions {
        trace_objective,
        squared_lengths: match lengths {
            Some(path) => read_lengths(&read_file(path)?)?,
            None => BTreeMap::new(),
        },
    };
    let (problem, title) = match &instance {
        Instance::Framework(f) => (
            export_realization_sdp(f, &opts)?,
            format!("graph realization relaxation: n = {}, d = {}, {} edges", f.len(), f.dim(), f.edges().len()),
        ),
        Instance::Anchored(net) => (
            export_anchored_sdp(net, &opts)?,
            format!(
                "anchored localization relaxation: d = {}, {} anchors, {} sensors",
                net.dim(),
                net.anchor_count(),
                net.sensor_count()
            ),
        ),
    };
    let path = output.map_or_else(|| PathBuf::from(format!("{}.dat-s", stem(input))), Path::to_path_buf);
    let text = write_sdpa(&problem, &title);
    write_file(&path, &text)?;
    let lossless = parse_sdpa(&text).map(|p| p == problem).unwrap_or(false);
    emit(
        out,
        &json!({
            "output": path.display().to_string(),
            "constraints": problem.constraint_count(),
            "blocks": problem.blocks,
            "round_trip": lossless,
        }),
    )?;
    Ok(0)
}

fn read_certificate_matrix(path: &Path) -> Result<Matrix<Rational>, Failure> {
    let text = read_file(path)?;
    if text.trim_start().starts_with('{') {
        Ok(read_matrix_with_backend(&text)?.1)
    } else {
        Ok(parse_dense_matrix(&text)?)
    }
}

pub fn cmd_check_cert(
    global: &GlobalArgs,
    problem: &Path,
    primal: &Path,
    dual: &Path,
    out: &mut dyn Write,
) -> Result<u8, Failure> {
    let problem = parse_sdpa(&read_file(problem)?)?;
    let y = read_certificate_matrix(primal)?;
    let s = read_certificate_matrix(dual)?;
    let tol = global.tolerances()?;
    let backend = global.backend.unwrap_or(Backend::Rational);
    let report = match backend {
        Backend::Rational => check_certificate(&y, &s, &problem, &tol)?,
        Backend::Float => check_certificate(&y.convert::<f64>(), &s.convert::<f64>(), &problem, &tol)?,
    };
    let failures = (!report.passed()).then(|| report.describe_failures());
    emit(out, &json!({ "backend": backend, "passed": report.passed(), "failures": failures, "checks": report }))?;
    Ok(if report.passed() { 0 } else { 5 })
}
