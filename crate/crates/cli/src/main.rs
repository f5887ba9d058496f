use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use pbnpin::model::{state_index, state_values, Limits, ModelError};
use pbnpin::parse::{parse_target_assignments, parse_with_limits, ParseError};
use pbnpin::pipeline::{synthesize, Options, PipelineError};
use pbnpin::verify::{check_global_stability, simulate};
use pbnpin::wiring::{
    build_wiring_digraph, compute_fas, find_cycles, is_acyclic, parse_fas_edges, pinning_partition, to_dot, FasError,
    FasStrategy,
};
use pbnpin::PbnModel;

const EXIT_STABLE: u8 = 0;
const EXIT_UNSTABLE: u8 = 1;
const EXIT_INPUT: u8 = 2;
const EXIT_CAP: u8 = 3;

#[derive(Parser)]
#[command(
    name = "pbnpin",
    version,
    about = "Pinning control synthesis for probabilistic Boolean networks"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse and validate a network file.
    Check {
        input: PathBuf,
        #[command(flatten)]
        caps: Caps,
    },
    /// Print the wiring digraph's cycles and optionally write it as DOT.
    Graph {
        input: PathBuf,
        /// Write Graphviz output here.
        #[arg(long)]
        dot: Option<PathBuf>,
        /// Feedback arc set: `dfs`, `min`, or a file of `tail -> head` lines.
        #[arg(long, default_value = "dfs")]
        fas: String,
        #[command(flatten)]
        caps: Caps,
    },
    /// Run both pinning stages and verify the controlled network.
    Synthesize {
        input: PathBuf,
        /// Steady state as `Name=0|1,...`; overrides the file's target clause.
        #[arg(long)]
        target: Option<String>,
        /// Feedback arc set: `dfs`, `min`, or a file of `tail -> head` lines.
        #[arg(long, default_value = "dfs")]
        fas: String,
        /// Write the JSON report here (`-` for stdout).
        #[arg(long)]
        report: Option<PathBuf>,
        /// Write the controlled network here.
        #[arg(long)]
        output: Option<PathBuf>,
        #[command(flatten)]
        caps: Caps,
    },
    /// Check global stability at the target with the exhaustive oracle.
    Verify {
        input: PathBuf,
        #[arg(long)]
        target: Option<String>,
        /// Write the verification report as JSON here (`-` for stdout).
        #[arg(long)]
        report: Option<PathBuf>,
        #[command(flatten)]
        caps: Caps,
    },
    /// Sample trajectories and report how often they end at the target.
    Simulate {
        input: PathBuf,
        #[arg(long)]
        target: Option<String>,
        #[arg(long, default_value_t = 100)]
        steps: usize,
        #[arg(long, default_value_t = 1000)]
        runs: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        caps: Caps,
    },
}

#[derive(Args, Clone, Copy)]
struct Caps {
    /// Largest network handled by the exhaustive oracle.
    #[arg(long, default_value_t = Limits::default().max_nodes, value_parser = positive)]
    max_nodes: usize,
    /// Largest in-degree accepted per candidate function.
    #[arg(long, default_value_t = Limits::default().max_indegree, value_parser = positive)]
    max_indegree: usize,
    /// Largest number of distinct modes enumerated by the oracle.
    #[arg(long, default_value_t = Limits::default().max_modes, value_parser = positive)]
    max_modes: usize,
}

fn positive(s: &str) -> Result<usize, String> {
    match s.parse::<usize>() {
        Ok(0) => Err("must be at least 1".into()),
        Ok(v) => Ok(v),
        Err(e) => Err(e.to_string()),
    }
}

impl Caps {
    fn limits(self) -> Limits {
        Limits {
            max_nodes: self.max_nodes,
            max_indegree: self.max_indegree,
            max_modes: self.max_modes,
        }
    }
}

/// Error carrying its exit code.
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn input(message: impl Into<String>) -> Self {
        Failure {
            code: EXIT_INPUT,
            message: message.into(),
        }
    }
}

impl From<ModelError> for Failure {
    fn from(e: ModelError) -> Self {
        Failure {
            code: if e.is_cap() { EXIT_CAP } else { EXIT_INPUT },
            message: e.to_string(),
        }
    }
}

impl From<FasError> for Failure {
    fn from(e: FasError) -> Self {
        Failure {
            code: if matches!(e, FasError::EdgeCap { .. }) {
                EXIT_CAP
            } else {
                EXIT_INPUT
            },
            message: e.to_string(),
        }
    }
}

impl From<PipelineError> for Failure {
    fn from(e: PipelineError) -> Self {
        match e {
            PipelineError::Fas(e) => e.into(),
            PipelineError::Model(e) => e.into(),
            other => Failure::input(other.to_string()),
        }
    }
}

fn load(path: &Path, limits: &Limits) -> Result<PbnModel, Failure> {
    let text = fs::read_to_string(path).map_err(|e| Failure::input(format!("{}: {e}", path.display())))?;
    parse_with_limits(&text, limits).map_err(|e: ParseError| Failure {
        code: match &e.model_error {
            Some(m) if m.is_cap() => EXIT_CAP,
            _ => EXIT_INPUT,
        },
        message: format!("{}:{e}", path.display()),
    })
}

fn target(model: &PbnModel, flag: Option<&str>) -> Result<Vec<bool>, Failure> {
    match flag {
        Some(text) => parse_target_assignments(model, text, model.target.as_deref()).map_err(Failure::input),
        None => model
            .target
            .clone()
            .ok_or_else(|| Failure::input("no target: add a `target` clause or pass --target")),
    }
}

fn fas_strategy(model: &PbnModel, spec: &str) -> Result<FasStrategy, Failure> {
    match spec {
        "dfs" => Ok(FasStrategy::DfsBackEdges),
        "min" => Ok(FasStrategy::ExhaustiveMin),
        path => {
            let text = fs::read_to_string(path).map_err(|e| Failure::input(format!("{path}: {e}")))?;
            let edges = parse_fas_edges(model, &text).map_err(|e| Failure::input(format!("{path}: {e}")))?;
            Ok(FasStrategy::UserSupplied(edges))
        }
    }
}

fn write_out(path: &Path, text: &str) -> Result<(), Failure> {
    if path == Path::new("-") {
        println!("{text}");
        Ok(())
    } else {
        fs::write(path, text).map_err(|e| Failure::input(format!("{}: {e}", path.display())))
    }
}

/// Human-readable progress; moved to stderr when stdout carries JSON.
fn say(json_on_stdout: bool, line: String) {
    if json_on_stdout {
        eprintln!("{line}");
    } else {
        println!("{line}");
    }
}

fn names_of(model: &PbnModel, nodes: &[usize]) -> String {
    let list: Vec<&str> = nodes.iter().map(|&i| model.nodes[i].name.as_str()).collect();
    format!("{{{}}}", list.join(", "))
}

fn tuple(values: &[bool]) -> String {
    let bits: Vec<&str> = values.iter().map(|&b| if b { "1" } else { "0" }).collect();
    format!("({})", bits.join(","))
}

fn run(cli: Cli) -> Result<u8, Failure> {
    match cli.command {
        Command::Check { input, caps } => {
            let model = load(&input, &caps.limits())?;
            let edges = build_wiring_digraph(&model).edges.len();
            println!("ok: {} nodes, {} wiring edges", model.len(), edges);
            Ok(EXIT_STABLE)
        }
        Command::Graph { input, dot, fas, caps } => {
            let model = load(&input, &caps.limits())?;
            let g = build_wiring_digraph(&model);
            let names = model.names();
            if is_acyclic(&g) {
                println!("acyclic: no pinning needed to cut cycles; only the steady-state stage applies");
            } else {
                println!("cyclic:");
                for c in find_cycles(&g) {
                    let path: Vec<&str> = c.iter().map(|&i| names[i].as_str()).collect();
                    println!("  {} -> {}", path.join(" -> "), path[0]);
                }
            }
            let fas = compute_fas(&g, &fas_strategy(&model, &fas)?)?;
            let plan = pinning_partition(&model, &fas);
            println!("pinned: {}", names_of(&model, &plan.pinned_nodes()));
            if let Some(path) = dot {
                write_out(&path, &to_dot(&g, &names, Some(&fas), &plan.pinned_nodes()))?;
            }
            Ok(EXIT_STABLE)
        }
        Command::Synthesize {
            input,
            target: flag,
            fas,
            report,
            output,
            caps,
        } => {
            let model = load(&input, &caps.limits())?;
            let eps = target(&model, flag.as_deref())?;
            let options = Options {
                fas: fas_strategy(&model, &fas)?,
                limits: caps.limits(),
                verify: true,
            };
            let s = synthesize(&model, Some(&eps), &options)?;
            let quiet = report.as_deref() == Some(Path::new("-")) || output.as_deref() == Some(Path::new("-"));
            say(quiet, format!("target: {} (index {})", tuple(&eps), state_index(&eps)));
            say(
                quiet,
                format!("pinned (first stage): {}", names_of(&model, &s.plan.pinned_nodes())),
            );
            say(
                quiet,
                format!("  uniform: {}", names_of(&model, &s.stage_one.uniform())),
            );
            say(
                quiet,
                format!("  non-uniform: {}", names_of(&model, &s.stage_one.nonuniform())),
            );
            say(
                quiet,
                format!(
                    "pinned (steady state): {} (cost {})",
                    names_of(&model, &s.steady.gamma),
                    s.steady.xi
                ),
            );
            let stable = s.verification.as_ref().is_some_and(|v| v.stable);
            say(
                quiet,
                format!("verdict: {}", if stable { "stable" } else { "unstable" }),
            );
            if let Some(path) = report {
                let json = serde_json::to_string_pretty(&s.report()).expect("report serializes");
                write_out(&path, &json)?;
            }
            if let Some(path) = output {
                write_out(&path, &pbnpin::serialize(&s.controlled))?;
            }
            Ok(if stable { EXIT_STABLE } else { EXIT_UNSTABLE })
        }
        Command::Verify {
            input,
            target: flag,
            report,
            caps,
        } => {
            let model = load(&input, &caps.limits())?;
            let eps = target(&model, flag.as_deref())?;
            let r = check_global_stability(&model, &eps, &caps.limits())?;
            let quiet = report.as_deref() == Some(Path::new("-"));
            say(quiet, format!("target: {} (index {})", tuple(&eps), r.target_index));
            say(quiet, format!("modes: {}", r.modes.len()));
            for d in &r.diagnostics {
                say(quiet, format!("  {d}"));
            }
            say(
                quiet,
                format!("verdict: {}", if r.stable { "stable" } else { "unstable" }),
            );
            if let Some(path) = report {
                write_out(&path, &serde_json::to_string_pretty(&r).expect("report serializes"))?;
            }
            Ok(if r.stable { EXIT_STABLE } else { EXIT_UNSTABLE })
        }
        Command::Simulate {
            input,
            target: flag,
            steps,
            runs,
            seed,
            caps,
        } => {
            let model = load(&input, &caps.limits())?;
            let eps = target(&model, flag.as_deref())?;
            if model.len() > caps.limits().max_nodes {
                return Err(ModelError::NodeCap {
                    n: model.len(),
                    cap: caps.limits().max_nodes,
                }
                .into());
            }
            let states = 1usize << model.len();
            let mut hits = 0usize;
            // starts cycle through every state in canonical order
            for r in 0..runs {
                let start = state_values(r % states + 1, model.len());
                let run = simulate(&model, &start, steps, seed.wrapping_add(r as u64));
                if run.last() == Some(&eps) {
                    hits += 1;
                }
            }
            println!("{hits}/{runs} runs at the target after {steps} steps");
            Ok(if hits == runs { EXIT_STABLE } else { EXIT_UNSTABLE })
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
