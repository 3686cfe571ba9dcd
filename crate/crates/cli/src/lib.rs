//! Command-line front end: `verify`, `oracle` and `compile`.

pub mod report;

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use mrp_core::check::{check, CheckError, CheckOptions, EventuallyMode, MarkSharing, Rejection, Verdict};
use mrp_core::cp::{parse_definitions, Definitions};
use mrp_core::ftpl::{parse_ftpl, FtplFormula};
use mrp_core::json::{parse_config, parse_ops};
use mrp_core::model::Configuration;
use mrp_core::ops::OpTable;
use mrp_core::oracle::{oracle_check, Ending, EvolutionPath, OracleOptions, OracleVerdict};
use mrp_core::path::{compile, parse_path, Automaton};
use mrp_core::Error;

use report::{AutomatonSummary, Outcome, Report, StatsReport, TraceReport, WarningReport, EXIT_ERROR};

/// The checker and oracle recurse along paths; long cyclic paths need more
/// than the default thread stack.
const STACK_BYTES: usize = 512 << 20;

#[derive(Debug, Parser)]
#[command(name = "mrp", version, about = "Check temporal properties over reconfiguration paths of component models")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check a temporal property with the marking algorithm.
    Verify(VerifyArgs),
    /// Decide a property by enumerating paths up to a depth bound.
    Oracle(OracleArgs),
    /// Compile a path expression and print automaton statistics.
    Compile(CompileArgs),
}

#[derive(Debug, Args)]
pub struct Inputs {
    /// Component model (JSON).
    pub model: PathBuf,
    /// Operation table (JSON).
    pub ops: PathBuf,
    /// Reconfiguration path expression (.rpx).
    pub path: PathBuf,
    /// Temporal property (.ftpl).
    pub prop: PathBuf,
    /// Named configuration properties (.cp).
    pub defs: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum MarksArg {
    Fresh,
    Shared,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum EventuallyArg {
    Maximal,
    Prefix,
}

impl From<EventuallyArg> for EventuallyMode {
    fn from(e: EventuallyArg) -> Self {
        match e {
            EventuallyArg::Maximal => EventuallyMode::Maximal,
            EventuallyArg::Prefix => EventuallyMode::Prefix,
        }
    }
}

#[derive(Debug, Args)]
pub struct Output {
    /// Print the report as JSON.
    #[arg(long)]
    pub json: bool,
    /// Leave the timing out of the report.
    #[arg(long)]
    pub no_timing: bool,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub inputs: Inputs,
    /// Reject the run when a cycle keeps changing the configuration.
    #[arg(long)]
    pub strict: bool,
    #[arg(long, value_enum, default_value = "fresh")]
    pub marks: MarksArg,
    #[arg(long, value_enum, default_value = "maximal")]
    pub eventually: EventuallyArg,
    /// Write the automaton in DOT format (`-` for standard output).
    #[arg(long, value_name = "FILE")]
    pub emit_dot: Option<PathBuf>,
    /// Include visited states and the violating configuration.
    #[arg(long)]
    pub trace: bool,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Args)]
pub struct OracleArgs {
    #[command(flatten)]
    pub inputs: Inputs,
    /// Longest path enumerated; defaults to twice the number of states.
    #[arg(long)]
    pub max_depth: Option<usize>,
    /// Paths enumerated before giving up.
    #[arg(long, default_value_t = 1_000_000)]
    pub cap: usize,
    #[arg(long, value_enum, default_value = "maximal")]
    pub eventually: EventuallyArg,
    /// Include visited states and the violating configuration.
    #[arg(long)]
    pub trace: bool,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Args)]
pub struct CompileArgs {
    pub path: PathBuf,
    pub ops: PathBuf,
    #[arg(long, value_name = "FILE")]
    pub emit_dot: Option<PathBuf>,
    /// Print statistics as JSON.
    #[arg(long)]
    pub json: bool,
}

fn read(path: &Path) -> Result<String, String> {
    fs::read_to_string(path).map_err(|e| format!("cannot read {}: {e}", path.display()))
}

fn located<E: std::fmt::Display>(path: &Path) -> impl Fn(E) -> String + '_ {
    move |e| format!("{}: {e}", path.display())
}

struct Loaded {
    config: Configuration,
    ops: OpTable,
    automaton: Automaton,
    formula: FtplFormula,
}

fn load_ops(path: &Path) -> Result<OpTable, String> {
    parse_ops(&read(path)?).map_err(located(path))
}

fn load_automaton(path: &Path, ops: &OpTable) -> Result<Automaton, String> {
    let expr = parse_path(&read(path)?, ops).map_err(located(path))?;
    Ok(compile(&expr))
}

fn load(inputs: &Inputs) -> Result<Loaded, String> {
    let config = parse_config(&read(&inputs.model)?).map_err(located(&inputs.model))?;
    config
        .validate()
        .map_err(|v| located(&inputs.model)(Error::Validation(v)))?;
    let ops = load_ops(&inputs.ops)?;
    let defs = match &inputs.defs {
        Some(p) => parse_definitions(&read(p)?).map_err(located(p))?,
        None => Definitions::new(),
    };
    let automaton = load_automaton(&inputs.path, &ops)?;
    let formula = parse_ftpl(&read(&inputs.prop)?, &ops, &defs).map_err(located(&inputs.prop))?;
    Ok(Loaded { config, ops, automaton, formula })
}

fn emit_dot(target: &Path, a: &Automaton, out: &mut dyn Write) -> Result<(), String> {
    if target == Path::new("-") {
        out.write_all(a.to_dot().as_bytes()).map_err(|e| e.to_string())
    } else {
        fs::write(target, a.to_dot()).map_err(|e| format!("cannot write {}: {e}", target.display()))
    }
}

/// Runs `f` on a thread with a large stack.
fn with_stack<T: Send>(f: impl FnOnce() -> T + Send) -> T {
    std::thread::scope(|s| {
        std::thread::Builder::new()
            .stack_size(STACK_BYTES)
            .spawn_scoped(s, f)
            .expect("spawn checker thread")
            .join()
            .expect("checker thread panicked")
    })
}

fn rejected(command: &str, r: &Rejection) -> Report {
    let mut rep = Report::new(command, Outcome::Rejected);
    rep.message = Some(r.to_string());
    if let Rejection::UnsoundCycle(ws) = r {
        rep.warnings = ws.iter().map(WarningReport::from).collect();
    }
    rep
}

fn verdict_report(v: &Verdict, a: &Automaton, trace: bool) -> Report {
    let mut rep = Report::new("verify", Outcome::of(v.value));
    rep.automaton = Some(AutomatonSummary::of(a));
    rep.counterexample = v.counterexample.as_ref().map(|c| TraceReport::from_checker(c, trace));
    rep.warnings = v.warnings.iter().map(WarningReport::from).collect();
    rep.stats = Some(StatsReport::checker(v));
    rep
}

pub fn verify(args: &VerifyArgs, out: &mut dyn Write) -> Report {
    let start = Instant::now();
    let l = match load(&args.inputs) {
        Ok(l) => l,
        Err(e) => return Report::error("verify", e),
    };
    if let Some(target) = &args.emit_dot {
        if let Err(e) = emit_dot(target, &l.automaton, out) {
            return Report::error("verify", e);
        }
    }
    let opts = CheckOptions {
        marks: match args.marks {
            MarksArg::Fresh => MarkSharing::Fresh,
            MarksArg::Shared => MarkSharing::Shared,
        },
        eventually: args.eventually.into(),
        strict: args.strict,
        ..CheckOptions::default()
    };
    let result = with_stack(|| check(&l.formula, &l.automaton, &l.config, &l.ops, &opts));
    let mut rep = match result {
        Ok(v) => verdict_report(&v, &l.automaton, args.trace),
        Err(CheckError::Rejected(r)) => rejected("verify", &r),
        Err(e) => Report::error("verify", e.to_string()),
    };
    if !args.output.no_timing {
        rep.timing_ms = Some(start.elapsed().as_secs_f64() * 1e3);
    }
    rep
}

fn oracle_trace(p: &EvolutionPath, trace: bool) -> TraceReport {
    let violation = match p.ending {
        Ending::Lasso { loop_start } => format!("run repeating from step {loop_start} violates the property"),
        Ending::DeadEnd => "run ending here violates the property".to_string(),
        Ending::Truncated | Ending::Interior => "path violates the property".to_string(),
    };
    let last = p.configs.last().expect("paths hold at least one configuration");
    TraceReport {
        ops: p.ops.clone(),
        violation,
        states: trace.then(|| p.states[1..].iter().map(|q| q.to_string()).collect()),
        configuration: trace
            .then(|| serde_json::from_str(&mrp_core::json::serialize_config(last)).expect("configuration is JSON")),
    }
}

pub fn oracle(args: &OracleArgs) -> Report {
    let start = Instant::now();
    let l = match load(&args.inputs) {
        Ok(l) => l,
        Err(e) => return Report::error("oracle", e),
    };
    if !l.formula.is_cp_flat() {
        return rejected("oracle", &Rejection::NotCpFlat(l.formula.trace().cp().to_string()));
    }
    let opts = OracleOptions {
        cap: args.cap,
        eventually: args.eventually.into(),
        ..OracleOptions::new(args.max_depth.unwrap_or(2 * l.automaton.state_count()))
    };
    let result: Result<OracleVerdict, Error> =
        with_stack(|| oracle_check(&l.formula, &l.automaton, &l.config, &l.ops, &opts));
    let mut rep = match result {
        Ok(o) => {
            let mut rep = Report::new("oracle", Outcome::of(o.value));
            rep.automaton = Some(AutomatonSummary::of(&l.automaton));
            rep.counterexample = o.counterexample.as_ref().map(|p| oracle_trace(p, args.trace));
            rep.stats = Some(StatsReport::oracle(&o, l.automaton.back_edges().next().is_some()));
            rep
        }
        Err(e) => Report::error("oracle", e.to_string()),
    };
    if !args.output.no_timing {
        rep.timing_ms = Some(start.elapsed().as_secs_f64() * 1e3);
    }
    rep
}

pub fn compile_cmd(args: &CompileArgs, out: &mut dyn Write) -> Result<(), String> {
    let ops = load_ops(&args.ops)?;
    let a = load_automaton(&args.path, &ops)?;
    if let Some(target) = &args.emit_dot {
        emit_dot(target, &a, out)?;
        if target == Path::new("-") {
            return Ok(());
        }
    }
    let text = if args.json {
        let mut v = serde_json::to_value(AutomatonSummary::of(&a)).expect("summary serializes");
        v["transition_list"] = a
            .transitions()
            .iter()
            .map(|t| {
                serde_json::json!({
                    "source": t.source, "label": t.label, "target": t.target, "back_edge": t.back_edge
                })
            })
            .collect();
        format!("{}\n", serde_json::to_string_pretty(&v).expect("summary serializes"))
    } else {
        let mut s = format!("{}\n", a.summary());
        for t in a.transitions() {
            s.push_str(&format!(
                "  {} -{}-> {}{}\n",
                t.source,
                t.label,
                t.target,
                if t.back_edge { "  (back-edge)" } else { "" }
            ));
        }
        s
    };
    out.write_all(text.as_bytes()).map_err(|e| e.to_string())
}

fn print_report(rep: &Report, json: bool, out: &mut dyn Write, err: &mut dyn Write) {
    let _ = if json {
        writeln!(out, "{}", rep.to_json())
    } else if rep.verdict == Outcome::Error {
        write!(err, "{}", rep.to_text())
    } else {
        write!(out, "{}", rep.to_text())
    };
}

/// Parses `args` and runs the command, returning the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            if e.use_stderr() {
                let _ = write!(err, "{}", e.render());
                return EXIT_ERROR;
            }
            let _ = write!(out, "{}", e.render());
            return 0;
        }
    };
    match &cli.command {
        Command::Verify(a) => {
            let rep = verify(a, out);
            print_report(&rep, a.output.json, out, err);
            rep.exit_code
        }
        Command::Oracle(a) => {
            let rep = oracle(a);
            print_report(&rep, a.output.json, out, err);
            rep.exit_code
        }
        Command::Compile(a) => match compile_cmd(a, out) {
            Ok(()) => 0,
            Err(e) => {
                let _ = writeln!(err, "compile: error\n  {e}");
                EXIT_ERROR
            }
        },
    }
}
