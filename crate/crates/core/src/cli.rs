//! Command-line driver.
//!
//! Exit codes: 0 success or YES, 1 NO (or a failed verification), 2 timeout,
//! 64 usage error, 65 data error.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Duration;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::bench::{load_corpus, run_bench, summarize, write_corpus, BenchConfig};
use crate::gen::{corpus, GenSpec};
use crate::instance::{AnnotatedMatrix, Rational, VertexId};
use crate::io::{
    format_rational, parse_instance, parse_rational, parse_solution, write_bench_csv, write_instance,
    write_solution, SolutionFile,
};
use crate::kernel::{kernelize, preprocess, IsolatedPolicy, KernelOutcome, KernelVariant};
use crate::lpfeas::LpMode;
use crate::oracle::{brute_force_decide, minimal_k, verify, OracleLimits, OracleOutcome};
use crate::pipeline::{solve, KernelChoice, PipelineConfig, PipelineOutcome, SRuleSet};
use crate::search::{OutcomeKind, VertexOrdering};

pub const EXIT_YES: i32 = 0;
pub const EXIT_NO: i32 = 1;
pub const EXIT_TIMEOUT: i32 = 2;
pub const EXIT_USAGE: i32 = 64;
pub const EXIT_DATA: i32 = 65;

#[derive(Parser, Debug)]
#[command(name = "decaf", version, about = "Exact weighted clique decomposition")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Decide an instance and print a solution file.
    Solve(SolveArgs),
    /// Print the kernel of an instance as an instance file.
    Kernelize(KernelizeArgs),
    /// Write a planted corpus with ground-truth sidecars.
    Generate(GenerateArgs),
    /// Check a solution file against an instance.
    Verify(VerifyArgs),
    /// Run configurations over a corpus directory.
    Bench(BenchArgs),
    /// Decide a small instance exhaustively.
    Oracle(OracleArgs),
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum KernelArg {
    None,
    Cricca,
    Decaf,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
#[value(rename_all = "snake_case")]
pub enum OrderArg {
    Arbitrary,
    PushFront,
    PushBack,
    KeepFirst,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum SRulesArg {
    #[value(name = "none")]
    None,
    #[value(name = "0")]
    R0,
    #[value(name = "01")]
    R01,
    #[value(name = "012")]
    R012,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum LpArg {
    Rational,
    Float,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum IsolatedArg {
    Ignore,
    ConsumeK,
}

#[derive(Args, Debug)]
pub struct SolveArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub k: usize,
    /// Start from a named preset: decaf, cricca or cricca-star.
    #[arg(long)]
    pub preset: Option<String>,
    #[arg(long, value_enum)]
    pub kernel: Option<KernelArg>,
    #[arg(long, value_enum)]
    pub order: Option<OrderArg>,
    #[arg(long, value_enum)]
    pub srules: Option<SRulesArg>,
    #[arg(long)]
    pub symmetry_break: bool,
    #[arg(long, value_enum, default_value = "rational")]
    pub lp: LpArg,
    /// Seconds.
    #[arg(long)]
    pub timeout: Option<f64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "ignore")]
    pub isolated: IsolatedArg,
}

#[derive(Args, Debug)]
pub struct KernelizeArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub k: usize,
    #[arg(long, value_enum, default_value = "decaf")]
    pub kernel: KernelArg,
    #[arg(long, value_enum, default_value = "ignore")]
    pub isolated: IsolatedArg,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct GenerateArgs {
    #[arg(long)]
    pub n: usize,
    /// Comma-separated planted clique counts.
    #[arg(long, value_delimiter = ',', required = true)]
    pub k_values: Vec<usize>,
    #[arg(long, default_value_t = 1)]
    pub per_k: usize,
    /// Comma-separated budget multipliers, decimals or fractions.
    #[arg(long, value_delimiter = ',', default_value = "1")]
    pub multipliers: Vec<String>,
    #[arg(long, default_value_t = 2)]
    pub size_min: usize,
    #[arg(long)]
    pub size_max: Option<usize>,
    #[arg(long, default_value_t = 1)]
    pub weight_min: i64,
    #[arg(long, default_value_t = 3)]
    pub weight_max: i64,
    #[arg(long, default_value_t = 0.5)]
    pub overlap_bias: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Drop vertices that are in no planted clique.
    #[arg(long)]
    pub prune_isolated: bool,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct VerifyArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub solution: PathBuf,
}

#[derive(Args, Debug)]
pub struct BenchArgs {
    #[arg(long)]
    pub corpus: PathBuf,
    /// Comma-separated presets or kernel:order:srules[:sym] specs.
    #[arg(long, default_value = "decaf,cricca-star")]
    pub configs: String,
    /// Seconds per solve.
    #[arg(long)]
    pub timeout: Option<f64>,
    #[arg(long, default_value_t = 1)]
    pub jobs: usize,
    /// Budget for instances without a truth file (overrides sidecars when given).
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct OracleArgs {
    #[arg(long)]
    pub input: PathBuf,
    /// Decide this budget.
    #[arg(long, conflicts_with = "minimal_k", required_unless_present = "minimal_k")]
    pub k: Option<usize>,
    /// Report the smallest budget up to this cap.
    #[arg(long)]
    pub minimal_k: Option<usize>,
    #[arg(long, default_value_t = OracleLimits::default().max_n)]
    pub max_n: usize,
    #[arg(long, default_value_t = OracleLimits::default().max_k)]
    pub max_k: usize,
}

/// A failure with its exit code.
#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    fn data(message: impl std::fmt::Display) -> Self {
        CliError {
            code: EXIT_DATA,
            message: message.to_string(),
        }
    }

    fn usage(message: impl std::fmt::Display) -> Self {
        CliError {
            code: EXIT_USAGE,
            message: message.to_string(),
        }
    }
}

type CliResult = Result<i32, CliError>;

/// Parses `args` (program name first), runs the command, and returns the exit code.
///
/// Normal output goes to `stdout`, diagnostics to `stderr`.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_YES };
            let text = e.render().to_string();
            if e.use_stderr() {
                let _ = write!(stderr, "{text}");
            } else {
                let _ = write!(stdout, "{text}");
            }
            return code;
        }
    };
    let result = match cli.command {
        Command::Solve(a) => cmd_solve(&a, stdout),
        Command::Kernelize(a) => cmd_kernelize(&a, stdout, stderr),
        Command::Generate(a) => cmd_generate(&a, stdout),
        Command::Verify(a) => cmd_verify(&a, stdout),
        Command::Bench(a) => cmd_bench(&a, stdout, stderr),
        Command::Oracle(a) => cmd_oracle(&a, stdout),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(stderr, "error: {}", e.message);
            e.code
        }
    }
}

/// Entry point for the binary: real arguments, real streams, `DECAF_LOG` logging.
pub fn main() -> i32 {
    init_logging();
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run(std::env::args_os(), &mut stdout.lock(), &mut stderr.lock())
}

/// Logs to stderr at the level named by `DECAF_LOG` (`off`, `info`, `debug`); off by default.
pub fn init_logging() {
    let env = env_logger::Env::new().filter_or("DECAF_LOG", "off");
    let _ = env_logger::Builder::from_env(env)
        .target(env_logger::Target::Stderr)
        .try_init();
}

fn read_instance(path: &Path) -> Result<(crate::instance::WeightedGraph, BTreeMap<VertexId, Rational>), CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::data(format!("{}: {e}", path.display())))?;
    parse_instance(&text).map_err(|e| CliError::data(format!("{}: {e}", path.display())))
}

fn emit(out: Option<&Path>, text: &str, stdout: &mut dyn Write) -> Result<(), CliError> {
    match out {
        Some(p) => fs::write(p, text).map_err(|e| CliError::data(format!("{}: {e}", p.display()))),
        None => stdout
            .write_all(text.as_bytes())
            .map_err(|e| CliError::data(format!("stdout: {e}"))),
    }
}

fn timeout_of(secs: Option<f64>) -> Result<Option<Duration>, CliError> {
    secs.map(|s| {
        Duration::try_from_secs_f64(s).map_err(|_| CliError::usage(format!("bad timeout {s}")))
    })
    .transpose()
}

fn isolated_policy(a: IsolatedArg) -> IsolatedPolicy {
    match a {
        IsolatedArg::Ignore => IsolatedPolicy::Ignore,
        IsolatedArg::ConsumeK => IsolatedPolicy::ConsumeK,
    }
}

fn kernel_choice(a: KernelArg) -> KernelChoice {
    match a {
        KernelArg::None => KernelChoice::None,
        KernelArg::Cricca => KernelChoice::Cricca,
        KernelArg::Decaf => KernelChoice::Decaf,
    }
}

fn ordering(a: OrderArg) -> VertexOrdering {
    match a {
        OrderArg::Arbitrary => VertexOrdering::Arbitrary,
        OrderArg::PushFront => VertexOrdering::PushFront,
        OrderArg::PushBack => VertexOrdering::PushBack,
        OrderArg::KeepFirst => VertexOrdering::KeepFirst,
    }
}

fn srule_set(a: SRulesArg) -> SRuleSet {
    match a {
        SRulesArg::None => SRuleSet::None,
        SRulesArg::R0 => SRuleSet::R0,
        SRulesArg::R01 => SRuleSet::R01,
        SRulesArg::R012 => SRuleSet::R012,
    }
}

/// The pipeline configuration selected by `solve` flags.
pub fn solve_config(a: &SolveArgs) -> Result<PipelineConfig, CliError> {
    let mut cfg = match &a.preset {
        Some(name) => PipelineConfig::preset(name)
            .ok_or_else(|| CliError::usage(format!("unknown preset `{name}`")))?,
        None => PipelineConfig::decaf(),
    };
    if let Some(k) = a.kernel {
        cfg.kernel = kernel_choice(k);
    }
    let order = a.order.map(ordering);
    match a.srules {
        Some(s) => srule_set(s).apply(&mut cfg.search, order),
        None => {
            if let Some(o) = order {
                cfg.search.ordering = o;
            }
        }
    }
    cfg.search.column_symmetry_breaking |= a.symmetry_break;
    cfg.search.lp_mode = match a.lp {
        LpArg::Rational => LpMode::Rational,
        LpArg::Float => LpMode::Float,
    };
    cfg.search.timeout = timeout_of(a.timeout)?;
    cfg.isolated = isolated_policy(a.isolated);
    Ok(cfg)
}

fn cmd_solve(a: &SolveArgs, stdout: &mut dyn Write) -> CliResult {
    let cfg = solve_config(a)?;
    let (graph, annotations) = read_instance(&a.input)?;
    let run = solve(&graph, &annotations, a.k, &cfg).map_err(CliError::data)?;
    let mut sol = match &run.outcome {
        PipelineOutcome::Yes(d) => SolutionFile::from_decomposition(d, &|v| annotations.contains_key(&v)),
        other => SolutionFile::with_outcome(other.kind()),
    };
    sol.stats = run.stat_pairs();
    emit(a.out.as_deref(), &write_solution(&sol), stdout)?;
    Ok(exit_for(run.outcome.kind()))
}

fn exit_for(kind: OutcomeKind) -> i32 {
    match kind {
        OutcomeKind::Yes => EXIT_YES,
        OutcomeKind::No => EXIT_NO,
        OutcomeKind::Timeout => EXIT_TIMEOUT,
    }
}

fn cmd_kernelize(a: &KernelizeArgs, stdout: &mut dyn Write, stderr: &mut dyn Write) -> CliResult {
    let (graph, annotations) = read_instance(&a.input)?;
    let pre = preprocess(&graph, &annotations, a.k, isolated_policy(a.isolated));
    if pre.k < 0 {
        let _ = writeln!(stderr, "no: isolated vertices exceed the budget");
        return Ok(EXIT_NO);
    }
    let m = AnnotatedMatrix::from_graph(&pre.graph, &pre.annotations).map_err(CliError::data)?;
    let variant = match a.kernel {
        KernelArg::None => return Err(CliError::usage("kernelize needs --kernel cricca or decaf")),
        KernelArg::Cricca => KernelVariant::Cricca,
        KernelArg::Decaf => KernelVariant::Decaf,
    };
    let res = kernelize(&m, pre.k as usize, variant).map_err(CliError::data)?;
    let s = res.stats;
    let header = format!(
        "# kernel {} k={} n_input={} n_before={} n_after={} blocks={} reductions={}\n",
        variant.name(),
        pre.k,
        graph.n(),
        s.n_before,
        s.n_after,
        s.block_count,
        s.rule_applications
    );
    match res.outcome {
        KernelOutcome::No(reason) => {
            let _ = writeln!(stderr, "no: {reason}");
            emit(a.out.as_deref(), &header, stdout)?;
            Ok(EXIT_NO)
        }
        KernelOutcome::Reduced { matrix, trace } => {
            let (g, ann) = matrix.to_graph();
            let mut text = header;
            let map: Vec<String> = trace
                .vertex_map
                .iter()
                .map(|&v| pre.vertex_map[v].to_string())
                .collect();
            text.push_str(&format!("# original ids: {}\n", map.join(" ")));
            text.push_str(&write_instance(&g, &ann));
            emit(a.out.as_deref(), &text, stdout)?;
            Ok(EXIT_YES)
        }
    }
}

fn cmd_generate(a: &GenerateArgs, stdout: &mut dyn Write) -> CliResult {
    let multipliers = a
        .multipliers
        .iter()
        .map(|m| parse_rational(m.trim()).ok_or_else(|| CliError::usage(format!("bad multiplier `{m}`"))))
        .collect::<Result<Vec<_>, _>>()?;
    let base = GenSpec {
        n: a.n,
        k_true: 1,
        size_range: (a.size_min, a.size_max.unwrap_or(a.n)),
        weight_range: (a.weight_min, a.weight_max),
        overlap_bias: a.overlap_bias,
        seed: a.seed,
    };
    let mut entries = corpus(&base, &a.k_values, a.per_k, &multipliers).map_err(CliError::usage)?;
    if a.prune_isolated {
        for e in &mut entries {
            e.instance = e.instance.pruned();
        }
    }
    write_corpus(&a.out, &entries).map_err(CliError::data)?;
    let _ = writeln!(stdout, "wrote {} instances to {}", entries.len(), a.out.display());
    Ok(EXIT_YES)
}

fn cmd_verify(a: &VerifyArgs, stdout: &mut dyn Write) -> CliResult {
    let (graph, annotations) = read_instance(&a.input)?;
    let text = fs::read_to_string(&a.solution)
        .map_err(|e| CliError::data(format!("{}: {e}", a.solution.display())))?;
    let sol = parse_solution(&text).map_err(|e| CliError::data(format!("{}: {e}", a.solution.display())))?;
    if sol.outcome != OutcomeKind::Yes {
        return Err(CliError::data(format!("solution outcome is `{}`; nothing to verify", sol.outcome.name())));
    }
    let n = graph.n();
    if let Some(v) = sol.cliques.iter().flat_map(|c| c.0.iter()).find(|&&v| v >= n) {
        return Err(CliError::data(format!("solution names vertex {v} but the instance has {n}")));
    }
    if sol.cliques.len() > 32 {
        return Err(CliError::data("more than 32 cliques"));
    }
    let a_mat = AnnotatedMatrix::from_graph(&graph, &annotations).map_err(CliError::data)?;
    let d = sol.to_decomposition(n);
    let report = verify(&a_mat, d.rows(), d.gamma()).map_err(CliError::data)?;
    match report.first_violation {
        None => {
            let _ = writeln!(stdout, "ok");
            Ok(EXIT_YES)
        }
        Some(v) => {
            let _ = writeln!(
                stdout,
                "violation at ({}, {}): cliques give {}, instance has {}",
                v.i,
                v.j,
                format_rational(&v.lhs),
                v.rhs
            );
            Ok(EXIT_NO)
        }
    }
}

fn cmd_bench(a: &BenchArgs, stdout: &mut dyn Write, stderr: &mut dyn Write) -> CliResult {
    let configs = BenchConfig::parse_list(&a.configs).map_err(CliError::usage)?;
    if configs.is_empty() {
        return Err(CliError::usage("no configs given"));
    }
    let instances = load_corpus(&a.corpus, a.k).map_err(CliError::data)?;
    let records = run_bench(&instances, &configs, timeout_of(a.timeout)?, a.jobs).map_err(CliError::data)?;
    let mut csv = Vec::new();
    write_bench_csv(&mut csv, &records).map_err(CliError::data)?;
    match &a.out {
        Some(p) => {
            fs::write(p, &csv).map_err(|e| CliError::data(format!("{}: {e}", p.display())))?;
            let _ = writeln!(stdout, "{}", summarize(&records));
        }
        None => {
            stdout.write_all(&csv).map_err(|e| CliError::data(format!("stdout: {e}")))?;
            // the summary goes to the side channel so stdout stays valid CSV
            let _ = writeln!(stderr, "{}", summarize(&records));
        }
    }
    Ok(EXIT_YES)
}

fn cmd_oracle(a: &OracleArgs, stdout: &mut dyn Write) -> CliResult {
    let (graph, annotations) = read_instance(&a.input)?;
    let m = AnnotatedMatrix::from_graph(&graph, &annotations).map_err(CliError::data)?;
    let limits = OracleLimits {
        max_n: a.max_n,
        max_k: a.max_k,
    };
    if let Some(cap) = a.minimal_k {
        return match minimal_k(&m, cap, limits).map_err(CliError::data)? {
            Some(k) => {
                let _ = writeln!(stdout, "minimal_k {k}");
                Ok(EXIT_YES)
            }
            None => {
                let _ = writeln!(stdout, "minimal_k none (cap {cap})");
                Ok(EXIT_NO)
            }
        };
    }
    let k = a.k.expect("clap requires --k without --minimal-k");
    match brute_force_decide(&m, k, limits).map_err(CliError::data)? {
        OracleOutcome::Yes(d) => {
            let sol = SolutionFile::from_decomposition(&d, &|v| annotations.contains_key(&v));
            emit(None, &write_solution(&sol), stdout)?;
            Ok(EXIT_YES)
        }
        OracleOutcome::No => {
            emit(None, "no\n", stdout)?;
            Ok(EXIT_NO)
        }
    }
}
