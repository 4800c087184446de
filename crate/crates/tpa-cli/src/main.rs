//! `tpa`: simulate, analyze, transform and export timed protocol models.
//!
//! Exit codes: 0 ok (or no attack), 1 usage or input error, 2 replay failure,
//! 3 attack found, 4 inconclusive at the bounds.

use clap::{ArgAction, Args, ColorChoice, CommandFactory, FromArgMatches, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};
use std::collections::BTreeMap;
use std::io::{IsTerminal, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use tpa::analyzer::{parse_attacks, search, AttackPattern, Verdict};
use tpa::constraints::{export_smtlib, fmt_q, parse_constraint_set};
use tpa::library::{self, Scenario};
use tpa::process::{parse_spec, ProtocolSpec};
use tpa::sim::{self, parse_schedule, parse_topology, RandomScheduler, ScriptScheduler, SimError, Topology};
use tpa::transform::{render_role_strands, transform_spec};

// Writes to stdout, ignoring errors such as a closed pipe.
macro_rules! out {
    ($($arg:tt)*) => {{
        let _ = writeln!(std::io::stdout().lock(), $($arg)*);
    }};
}

const OK: u8 = 0;
const INPUT_ERROR: u8 = 1;
const REPLAY_ERROR: u8 = 2;
const ATTACK_FOUND: u8 = 3;
const INCONCLUSIVE: u8 = 4;

#[derive(Parser)]
#[command(name = "tpa", version, about = "Timed protocol analyzer for distance-bounding protocols")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run the timed semantics under a schedule file or a seeded random scheduler.
    Simulate(SimulateArgs),
    /// Bounded symbolic search for an attack pattern.
    Analyze(AnalyzeArgs),
    /// Print the untimed roles as process text or strands.
    Transform(TransformArgs),
    /// Write a constraint file as an SMT-LIB2 script.
    ExportSmt(ExportArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Output {
    Text,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum TransformFormat {
    Dsl,
    Strand,
}

#[derive(Args)]
struct SpecSource {
    /// Protocol file.
    spec: Option<PathBuf>,
    /// Built-in scenario instead of a protocol file (brands-chaum, meadows-xor, meadows-id).
    #[arg(long, conflicts_with = "spec")]
    scenario: Option<String>,
}

#[derive(Args)]
struct SimulateArgs {
    #[command(flatten)]
    source: SpecSource,
    /// Topology file, or the name of a built-in topology of the scenario.
    #[arg(long)]
    topology: Option<String>,
    /// Schedule to replay; without one a random scheduler runs.
    #[arg(long)]
    schedule: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1000)]
    max_steps: usize,
    /// Instances per role for the random scheduler, as `role=n`. Unlisted roles get 1.
    #[arg(long = "sessions", value_parser = parse_session, action = ArgAction::Append)]
    sessions: Vec<(String, u32)>,
    #[arg(long, value_enum, default_value_t = Output::Text)]
    format: Output,
}

#[derive(Args)]
struct AnalyzeArgs {
    #[command(flatten)]
    source: SpecSource,
    /// Attack pattern file; defaults to the scenario's patterns.
    #[arg(long)]
    patterns: Option<PathBuf>,
    /// Name of the pattern to search for.
    #[arg(long)]
    pattern: String,
    /// Instances per honest role, as `role=n`.
    #[arg(long = "sessions", value_parser = parse_session, action = ArgAction::Append)]
    sessions: Vec<(String, u32)>,
    #[arg(long, value_parser = clap::value_parser!(u32).range(1..))]
    capabilities: Option<u32>,
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    max_steps: Option<u64>,
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    max_states: Option<u64>,
    /// Write the attack's constraints here, in the format `export-smt` reads.
    #[arg(long)]
    dump_constraints: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Output::Json)]
    format: Output,
}

#[derive(Args)]
struct TransformArgs {
    #[command(flatten)]
    source: SpecSource,
    #[arg(long, value_enum, default_value_t = TransformFormat::Dsl)]
    format: TransformFormat,
    /// Only this role.
    #[arg(long)]
    role: Option<String>,
}

#[derive(Args)]
struct ExportArgs {
    /// Constraint file.
    input: PathBuf,
    /// Output path; stdout when absent.
    #[arg(short, long)]
    output: Option<PathBuf>,
}

fn parse_session(s: &str) -> Result<(String, u32), String> {
    let (role, n) = s.split_once('=').ok_or("expected role=n")?;
    let n: u32 = n.trim().parse().map_err(|_| format!("bad count `{n}`"))?;
    if n == 0 {
        return Err("session bounds must be positive".into());
    }
    Ok((role.trim().to_string(), n))
}

struct Failure(u8, String);

impl Failure {
    fn input(msg: impl std::fmt::Display) -> Failure {
        Failure(INPUT_ERROR, msg.to_string())
    }
}

type Res<T> = Result<T, Failure>;

fn no_color() -> bool {
    std::env::var_os("NO_COLOR").is_some_and(|v| !v.is_empty())
}

fn paint(text: &str, code: &str) -> String {
    if no_color() || !std::io::stdout().is_terminal() {
        text.to_string()
    } else {
        format!("\x1b[{code}m{text}\x1b[0m")
    }
}

fn read(path: &Path) -> Res<String> {
    std::fs::read_to_string(path).map_err(|e| Failure::input(format!("{}: {e}", path.display())))
}

fn load_scenario(name: &str) -> Res<Scenario> {
    library::scenario(name).ok_or_else(|| Failure::input(format!("unknown scenario `{name}`; known: {}", library::SCENARIOS.join(", "))))
}

fn load_spec(src: &SpecSource) -> Res<(ProtocolSpec, Option<Scenario>)> {
    match (&src.spec, &src.scenario) {
        (Some(path), _) => {
            let spec = parse_spec(&read(path)?).map_err(|e| Failure::input(format!("{}: {e}", path.display())))?;
            Ok((spec, None))
        }
        (None, Some(name)) => {
            let s = load_scenario(name)?;
            Ok((s.spec.clone(), Some(s)))
        }
        (None, None) => Err(Failure::input("a protocol file or --scenario is required")),
    }
}

fn load_topology(arg: Option<&str>, scenario: Option<&Scenario>) -> Res<Topology> {
    let arg = arg.ok_or_else(|| Failure::input("topology required"))?;
    if let Some(t) = scenario.and_then(|s| s.topology(arg)) {
        return Ok(t.clone());
    }
    let path = Path::new(arg);
    parse_topology(&read(path)?).map_err(|e| Failure::input(format!("{}: {e}", path.display())))
}

fn simulate(a: &SimulateArgs) -> Res<u8> {
    let (spec, scenario) = load_spec(&a.source)?;
    let topo = load_topology(a.topology.as_deref(), scenario.as_ref())?;
    let result = match &a.schedule {
        Some(path) => {
            let sched = parse_schedule(&read(path)?).map_err(|e| Failure::input(format!("{}: {e}", path.display())))?;
            sim::run(&spec, &topo, &mut ScriptScheduler::new(sched), a.max_steps)
        }
        None => {
            let mut bounds: BTreeMap<String, u32> = spec.roles.iter().map(|r| (r.name.clone(), 1)).collect();
            for (role, n) in &a.sessions {
                if !bounds.contains_key(role) {
                    return Err(Failure::input(format!("no role `{role}`")));
                }
                bounds.insert(role.clone(), *n);
            }
            sim::run(&spec, &topo, &mut RandomScheduler::new(a.seed, bounds, 1), a.max_steps)
        }
    };
    let trace = match result {
        Ok(t) => t,
        Err(e @ SimError::Replay { .. }) => return Err(Failure(REPLAY_ERROR, e.to_string())),
        Err(e) => return Err(Failure::input(e)),
    };
    match a.format {
        Output::Text => {
            out!("init clock {}", fmt_q(&trace.initial.clock));
            let _ = write!(std::io::stdout().lock(), "{}", trace.to_text());
            out!("end clock {} after {} steps", fmt_q(&trace.last_state().clock), trace.steps.len());
        }
        Output::Json => {
            let v = json!({
                "protocol": spec.name,
                "topology": topo.name,
                "steps": trace.steps.len(),
                "final_clock": fmt_q(&trace.last_state().clock),
                "trace": trace.lines(),
            });
            out!("{}", serde_json::to_string_pretty(&v).expect("json output"));
        }
    }
    Ok(OK)
}

fn select_pattern(a: &AnalyzeArgs, scenario: Option<&Scenario>) -> Res<AttackPattern> {
    let patterns = match (&a.patterns, scenario) {
        (Some(path), _) => parse_attacks(&read(path)?).map_err(|e| Failure::input(format!("{}: {e}", path.display())))?,
        (None, Some(s)) => s.patterns.clone(),
        (None, None) => return Err(Failure::input("--patterns is required with a protocol file")),
    };
    let names: Vec<&str> = patterns.iter().map(|p| p.name.as_str()).collect();
    let known = names.join(", ");
    patterns.into_iter().find(|p| p.name == a.pattern).ok_or_else(|| Failure::input(format!("no pattern `{}`; known: {known}", a.pattern)))
}

fn analyze(a: &AnalyzeArgs) -> Res<u8> {
    let (spec, scenario) = load_spec(&a.source)?;
    let pattern = select_pattern(a, scenario.as_ref())?;
    let mut bounds = pattern.bounds.clone();
    for (role, n) in &a.sessions {
        if !spec.roles.iter().any(|r| r.name == *role) {
            return Err(Failure::input(format!("no role `{role}`")));
        }
        bounds.roles.insert(role.clone(), *n);
    }
    if let Some(c) = a.capabilities {
        bounds.capabilities = c;
    }
    if let Some(s) = a.max_steps {
        bounds.steps = s as usize;
    }
    if let Some(s) = a.max_states {
        bounds.states = s as usize;
    }
    let verdict = search(&spec, &pattern, &bounds);
    if let (Some(path), Verdict::AttackFound { constraints, .. }) = (&a.dump_constraints, &verdict) {
        std::fs::write(path, constraints.to_string()).map_err(|e| Failure::input(format!("{}: {e}", path.display())))?;
    }
    let mut v = verdict.to_json(&bounds);
    v["protocol"] = Value::from(spec.name.clone());
    v["pattern"] = Value::from(pattern.name.clone());
    match a.format {
        Output::Json => out!("{}", serde_json::to_string_pretty(&v).expect("json output")),
        Output::Text => {
            let code = if verdict.is_attack() { "31" } else if matches!(verdict, Verdict::NoAttack { .. }) { "32" } else { "33" };
            out!("{} {}: {} ({} states)", spec.name, pattern.name, paint(verdict.name(), code), verdict.explored());
            match &verdict {
                Verdict::AttackFound { trace, witness, realizable, .. } => {
                    for l in trace {
                        out!("  {l}");
                    }
                    let w: Vec<String> = witness.iter().map(|(a, q)| format!("{a} = {}", fmt_q(q))).collect();
                    out!("witness: {}", w.join(", "));
                    out!("realizable: {realizable}");
                }
                Verdict::Inconclusive { reason, .. } => out!("reason: {reason}"),
                Verdict::NoAttack { .. } => {}
            }
        }
    }
    Ok(match verdict {
        Verdict::NoAttack { .. } => OK,
        Verdict::AttackFound { .. } => ATTACK_FOUND,
        Verdict::Inconclusive { .. } => INCONCLUSIVE,
    })
}

fn transform(a: &TransformArgs) -> Res<u8> {
    let (spec, _) = load_spec(&a.source)?;
    if spec.roles.is_empty() {
        return Err(Failure::input(format!("protocol `{}` has no roles", spec.name)));
    }
    let roles = transform_spec(&spec);
    let picked: Vec<_> = roles.iter().filter(|r| a.role.as_ref().is_none_or(|n| *n == r.name)).collect();
    if picked.is_empty() {
        return Err(Failure::input(format!("no role `{}`", a.role.as_deref().unwrap_or_default())));
    }
    for r in picked {
        match a.format {
            TransformFormat::Dsl => out!("({}): {}", r.name, r.body),
            TransformFormat::Strand => out!("{}", render_role_strands(r)),
        }
    }
    Ok(OK)
}

fn export_smt(a: &ExportArgs) -> Res<u8> {
    let cs = parse_constraint_set(&read(&a.input)?).map_err(|e| Failure::input(format!("{}: {e}", a.input.display())))?;
    let script = export_smtlib(&cs);
    match &a.output {
        Some(path) => std::fs::write(path, script).map_err(|e| Failure::input(format!("{}: {e}", path.display())))?,
        None => {
            let _ = write!(std::io::stdout().lock(), "{script}");
        }
    }
    Ok(OK)
}

fn main() -> ExitCode {
    let color = if no_color() { ColorChoice::Never } else { ColorChoice::Auto };
    let matches = match Cli::command().color(color).try_get_matches() {
        Ok(m) => m,
        Err(e) => {
            let code = if e.use_stderr() { INPUT_ERROR } else { OK };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let cli = match Cli::from_arg_matches(&matches) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(INPUT_ERROR);
        }
    };
    let r = match &cli.cmd {
        Cmd::Simulate(a) => simulate(a),
        Cmd::Analyze(a) => analyze(a),
        Cmd::Transform(a) => transform(a),
        Cmd::ExportSmt(a) => export_smt(a),
    };
    match r {
        Ok(code) => ExitCode::from(code),
        Err(Failure(code, msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(code)
        }
    }
}
