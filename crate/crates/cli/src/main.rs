//! `coarsekit`: decide whether unitary dynamics survives a coarse-graining.
//!
//! Exit codes: 0 compatible (or success), 1 incompatible / no emergent map,
//! 2 undecided, 64 unreadable input, 65 input violating an invariant,
//! 70 internal failure.

mod format;

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{ArgGroup, Args, Parser, Subcommand};
use coarsekit::classical::{emergent_channel, observational_vs_do, verify_total_probability};
use coarsekit::compat::{construct_emergent, run_all, CheckConfig, Verdict};
use coarsekit::scenarios::{lookup, random_scenario, registry, NamedScenario};
use serde::Serialize;

use format::{
    ChannelFile, ClassicalReport, ConfigFile, LoadError, ReportFile, ScenarioFile, ScenarioInfo,
    FORMAT_VERSION,
};

const SEED_ENV: &str = "COARSEKIT_SEED";

const EXIT_INCOMPATIBLE: u8 = 1;
const EXIT_UNDECIDED: u8 = 2;
const EXIT_USAGE: u8 = 64;
const EXIT_DATA: u8 = 65;
const EXIT_SOFTWARE: u8 = 70;

#[derive(Parser, Debug)]
#[command(
    name = "coarsekit",
    version,
    about = "Emergent dynamics under coarse-graining"
)]
struct Cli {
    #[command(flatten)]
    global: GlobalOpts,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone, Default)]
struct GlobalOpts {
    /// Write the machine-readable report to this path ("-" for stdout)
    #[arg(long, global = true, value_name = "PATH")]
    json: Option<PathBuf>,
    /// RNG seed (falls back to the file, then COARSEKIT_SEED, then 0)
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Feasibility tolerance of the Choi-matrix search
    #[arg(long, global = true)]
    tol: Option<f64>,
    /// Random ensembles tried per ancilla dimension
    #[arg(long, global = true)]
    trials: Option<usize>,
    /// Only search witnesses with this ancilla dimension
    #[arg(long, global = true)]
    ancilla: Option<usize>,
    /// Iteration cap of the Choi-matrix search
    #[arg(long, global = true, value_name = "N")]
    max_iter: Option<usize>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run every compatibility check on a scenario file or registry name
    Check {
        input: String,
        /// Include wall-clock time in the report (breaks byte-identical output)
        #[arg(long)]
        timing: bool,
    },
    /// Build the emergent channel and write its Kraus operators
    Construct {
        input: String,
        /// Output path for the channel file (stdout if omitted)
        #[arg(long, value_name = "PATH")]
        out: Option<PathBuf>,
    },
    /// Classical chain model queries
    #[command(group(ArgGroup::new("query").required(true).args(["emergent", "do_x"])))]
    Classical {
        input: PathBuf,
        /// Effective channel P(Y|X) of the chain model
        #[arg(long)]
        emergent: bool,
        /// P(Y|do(X=x)) against P(Y|X=x) for the intervention model
        #[arg(long = "do", value_name = "X")]
        do_x: Option<usize>,
    },
    /// List built-in scenarios
    List,
    /// Write a random scenario file
    Gen {
        #[arg(long, value_name = "D")]
        micro: usize,
        #[arg(long = "macro", value_name = "d")]
        macro_dim: usize,
        #[arg(long, default_value_t = 2)]
        kraus_count: usize,
        #[arg(long, value_name = "PATH")]
        out: Option<PathBuf>,
    },
}

#[derive(Debug)]
enum CliError {
    Usage(String),
    Data(String),
    Software(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Data(_) => EXIT_DATA,
            CliError::Software(_) => EXIT_SOFTWARE,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Usage(m) | CliError::Data(m) | CliError::Software(m) => m,
        }
    }
}

impl From<coarsekit::Error> for CliError {
    fn from(e: coarsekit::Error) -> Self {
        use coarsekit::Error::*;
        match e {
            DimensionMismatch(_)
            | NotHermitian { .. }
            | NotUnitary { .. }
            | NotCp { .. }
            | NotTp { .. }
            | InvalidState(_)
            | ZeroMarginal { .. }
            | IndexOutOfRange { .. }
            | InvalidTable(_)
            | InvalidArgument(_) => CliError::Data(e.to_string()),
            _ => CliError::Software(e.to_string()),
        }
    }
}

impl From<LoadError> for CliError {
    fn from(e: LoadError) -> Self {
        match e {
            LoadError::Format(m) => CliError::Usage(m),
            LoadError::Invariant(e) => e.into(),
        }
    }
}

fn read_file(path: &Path) -> Result<ScenarioFile, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text)
        .map_err(|e| CliError::Usage(format!("cannot parse {}: {e}", path.display())))
}

/// Registry name or path to a scenario file.
fn resolve(input: &str) -> Result<(NamedScenario, Option<ConfigFile>), CliError> {
    if let Some(ns) = lookup(input)? {
        return Ok((ns, None));
    }
    let file = read_file(Path::new(input))?;
    let scenario = file.scenario()?;
    let ns = NamedScenario {
        name: input.to_string(),
        scenario,
        expected: coarsekit::scenarios::Expectation::Unknown,
        notes: String::new(),
    };
    Ok((ns, file.config))
}

fn env_seed() -> Result<Option<u64>, CliError> {
    match std::env::var(SEED_ENV) {
        Ok(v) => v
            .trim()
            .parse()
            .map(Some)
            .map_err(|_| CliError::Usage(format!("{SEED_ENV}={v:?} is not a u64"))),
        Err(_) => Ok(None),
    }
}

fn resolve_seed(flag: Option<u64>, file: Option<u64>) -> Result<u64, CliError> {
    Ok(match (flag, file) {
        (Some(s), _) | (None, Some(s)) => s,
        (None, None) => env_seed()?.unwrap_or(0),
    })
}

fn build_config(g: &GlobalOpts, file: Option<&ConfigFile>) -> Result<CheckConfig, CliError> {
    let file = file.cloned().unwrap_or_default();
    let d = CheckConfig::default();
    let cfg = CheckConfig {
        sdp_tol: g.tol.or(file.sdp_tol).unwrap_or(d.sdp_tol),
        max_iter: g.max_iter.or(file.max_iter).unwrap_or(d.max_iter),
        trials: g.trials.or(file.trials).unwrap_or(d.trials),
        ancilla: g.ancilla.or(file.ancilla),
        seed: resolve_seed(g.seed, file.seed)?,
    };
    if !(cfg.sdp_tol.is_finite() && cfg.sdp_tol > 0.0) {
        return Err(CliError::Usage(format!(
            "tolerance {} must be positive",
            cfg.sdp_tol
        )));
    }
    if cfg.max_iter == 0 || cfg.trials == 0 || cfg.ancilla == Some(0) {
        return Err(CliError::Usage(
            "max-iter, trials and ancilla must be at least 1".into(),
        ));
    }
    Ok(cfg)
}

fn to_json<T: Serialize>(value: &T) -> Result<String, CliError> {
    let mut s =
        serde_json::to_string_pretty(value).map_err(|e| CliError::Software(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

fn write_output(path: Option<&Path>, text: &str) -> Result<(), CliError> {
    match path {
        None => {
            print!("{text}");
            Ok(())
        }
        Some(p) if p == Path::new("-") => {
            print!("{text}");
            Ok(())
        }
        Some(p) => std::fs::write(p, text)
            .map_err(|e| CliError::Usage(format!("cannot write {}: {e}", p.display()))),
    }
}

fn sci(x: f64) -> String {
    format!("{x:.2e}")
}

fn human_report(r: &ReportFile) -> String {
    let mut out = String::new();
    let s = &r.scenario;
    let _ = writeln!(
        out,
        "scenario     {} (D={}, d={}, expected {})",
        s.name, s.micro_dim, s.macro_dim, s.expected
    );
    let _ = writeln!(out, "verdict      {}", r.verdict);
    let _ = writeln!(
        out,
        "geometric    {:<13} fiber residual {} (kernel dim {})",
        r.methods.geometric,
        sci(r.fiber.residual),
        r.fiber.kernel_dim
    );
    let a = &r.algebraic;
    let _ = writeln!(
        out,
        "algebraic    {:<13} intertwiner {} (residual {}), association residual {}, dual identity residual {}",
        r.methods.algebraic,
        if a.v.is_some() { "found" } else { "absent" },
        sci(a.residual),
        sci(a.association_residual),
        sci(a.dual_identity_residual)
    );
    let _ = writeln!(
        out,
        "sdp          {:<13} {} with residual {} after {} iterations",
        r.methods.sdp,
        r.sdp.status,
        sci(r.sdp.residual),
        r.sdp.iterations
    );
    match &r.witness {
        Some(w) => {
            let _ = writeln!(
                out,
                "witness      ancilla {}, guessing probability {:.6} -> {:.6} (gain {})",
                w.ancilla_dim,
                w.pg_before,
                w.pg_after,
                sci(w.pg_after - w.pg_before)
            );
        }
        None => {
            let _ = writeln!(
                out,
                "witness      none found (ancilla {:?}, {} trials each)",
                r.config.ancilla, r.config.trials
            );
        }
    }
    let _ = writeln!(
        out,
        "equivalence  {:<13} {}",
        r.methods.equivalence,
        r.equivalence
            .as_ref()
            .map_or("not run".to_string(), |e| format!(
                "mixing residual {}",
                sci(e.residual)
            ))
    );
    match &r.emergent {
        Some(e) => {
            let _ = writeln!(
                out,
                "emergent     {} Kraus operators from {}, diagram residual {}",
                e.kraus.len(),
                e.source,
                sci(e.diagram_residual)
            );
        }
        None => {
            let _ = writeln!(out, "emergent     none");
        }
    }
    if let Some(t) = r.timing_ms {
        let _ = writeln!(out, "time         {t:.1} ms");
    }
    out
}

fn exit_for(v: Verdict) -> u8 {
    match v {
        Verdict::Compatible => 0,
        Verdict::Incompatible => EXIT_INCOMPATIBLE,
        Verdict::Undecided => EXIT_UNDECIDED,
    }
}

fn info(ns: &NamedScenario) -> ScenarioInfo {
    ScenarioInfo {
        name: ns.name.clone(),
        micro_dim: ns.scenario.micro_dim(),
        macro_dim: ns.scenario.macro_dim(),
        expected: ns.expected.as_str().into(),
    }
}

fn cmd_check(g: &GlobalOpts, input: &str, timing: bool) -> Result<u8, CliError> {
    let (ns, file_cfg) = resolve(input)?;
    let cfg = build_config(g, file_cfg.as_ref())?;
    let start = Instant::now();
    let report = run_all(&ns.scenario, &cfg)?;
    let mut file = ReportFile::new(info(&ns), &ns.scenario, &cfg, &report);
    if timing {
        file.timing_ms = Some(start.elapsed().as_secs_f64() * 1e3);
    }
    match &g.json {
        Some(p) => write_output(Some(p), &to_json(&file)?)?,
        None => print!("{}", human_report(&file)),
    }
    Ok(exit_for(report.verdict))
}

fn cmd_construct(g: &GlobalOpts, input: &str, out: Option<&Path>) -> Result<u8, CliError> {
    let (ns, _) = resolve(input)?;
    match construct_emergent(&ns.scenario)? {
        Some(e) => {
            let file = ChannelFile {
                version: FORMAT_VERSION,
                dim: ns.scenario.macro_dim(),
                source: e.source.as_str().into(),
                diagram_residual: e.diagram_residual,
                kraus: e
                    .channel
                    .kraus()
                    .iter()
                    .map(format::matrix_to_json)
                    .collect(),
            };
            write_output(out.or(g.json.as_deref()), &to_json(&file)?)?;
            Ok(0)
        }
        None => {
            eprintln!("no CPTP emergent map exists for {}", ns.name);
            Ok(EXIT_INCOMPATIBLE)
        }
    }
}

fn cmd_classical(
    g: &GlobalOpts,
    input: &Path,
    emergent: bool,
    do_x: Option<usize>,
) -> Result<u8, CliError> {
    let file = read_file(input)?;
    let report = if emergent {
        let m = file.chain_model()?;
        let table = emergent_channel(&m)?;
        ClassicalReport::Emergent {
            table: table.rows(),
            total_probability_residual: verify_total_probability(&m)?,
        }
    } else {
        let x = do_x.expect("clap enforces one query");
        let m = file.do_model()?;
        let (obs, int) = observational_vs_do(&m, x)?;
        let l1_gap: f64 = obs.iter().zip(&int).map(|(a, b)| (a - b).abs()).sum();
        ClassicalReport::Do {
            x,
            interventional: int,
            observational: obs,
            l1_gap,
            differ: l1_gap > 1e-12,
        }
    };
    match &g.json {
        Some(p) => write_output(Some(p), &to_json(&report)?)?,
        None => print!("{}", human_classical(&report)),
    }
    Ok(0)
}

fn fmt_vec(v: &[f64]) -> String {
    let parts: Vec<String> = v.iter().map(|p| format!("{p:.12}")).collect();
    format!("[{}]", parts.join(", "))
}

fn human_classical(r: &ClassicalReport) -> String {
    let mut out = String::new();
    match r {
        ClassicalReport::Emergent {
            table,
            total_probability_residual,
        } => {
            let _ = writeln!(out, "P(Y|X), rows y, columns x");
            for row in table {
                let _ = writeln!(out, "  {}", fmt_vec(row));
            }
            let _ = writeln!(
                out,
                "total probability residual {}",
                sci(*total_probability_residual)
            );
        }
        ClassicalReport::Do {
            x,
            interventional,
            observational,
            l1_gap,
            differ,
        } => {
            let _ = writeln!(out, "P(Y|do(X={x})) {}", fmt_vec(interventional));
            let _ = writeln!(out, "P(Y|X={x})     {}", fmt_vec(observational));
            let flag = if *differ { "differ" } else { "agree" };
            let _ = writeln!(out, "L1 gap {} ({flag})", sci(*l1_gap));
        }
    }
    out
}

fn cmd_list() -> Result<u8, CliError> {
    for ns in registry()? {
        println!(
            "{:<24} D={} d={} expected {:<12} {}",
            ns.name,
            ns.scenario.micro_dim(),
            ns.scenario.macro_dim(),
            ns.expected.as_str(),
            ns.notes
        );
    }
    Ok(0)
}

fn cmd_gen(
    g: &GlobalOpts,
    micro: usize,
    macro_dim: usize,
    kraus_count: usize,
    out: Option<&Path>,
) -> Result<u8, CliError> {
    let seed = resolve_seed(g.seed, None)?;
    let ns = random_scenario(micro, macro_dim, kraus_count, seed)?;
    let file = ScenarioFile::from_scenario(&ns.scenario);
    write_output(out.or(g.json.as_deref()), &to_json(&file)?)?;
    Ok(0)
}

fn run(cli: Cli) -> Result<u8, CliError> {
    let g = &cli.global;
    match &cli.command {
        Command::Check { input, timing } => cmd_check(g, input, *timing),
        Command::Construct { input, out } => cmd_construct(g, input, out.as_deref()),
        Command::Classical {
            input,
            emergent,
            do_x,
        } => cmd_classical(g, input, *emergent, *do_x),
        Command::List => cmd_list(),
        Command::Gen {
            micro,
            macro_dim,
            kraus_count,
            out,
        } => cmd_gen(g, *micro, *macro_dim, *kraus_count, out.as_deref()),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(EXIT_USAGE)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {}", e.message());
            ExitCode::from(e.code())
        }
    }
}
