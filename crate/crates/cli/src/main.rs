//! `aidef` — run devices in worlds, mine rules from the traces, check
//! world contracts, score and replay lives.
//!
//! Exit codes: 0 ok, 2 assumption-check failure, 3 protocol violation,
//! 4 I/O or format error. Set AIDEF_LOG to control log verbosity.

use aidef_core::agent::{AgentPolicy, MinerGuidedAgent, RandomAgent};
use aidef_core::miner::{mine_implications, rules_from_jsonl, rules_to_jsonl, MinerConfig};
use aidef_core::protocol::{
    check_world_assumptions, FuzzConfig, ProtocolError, Session, StepOutcome, World,
};
use aidef_core::runner::{replay, report_success, run_episode, EpisodeConfig};
use aidef_core::signal::{Scalar, ScalarKind, SignalSpec, SignalValue};
use aidef_core::trace::{read_trace, write_trace, Metadata};
use aidef_core::worlds::AnyWorld;
use clap::{Parser, Subcommand, ValueEnum};
use std::io::{BufRead, Write};
use std::path::PathBuf;
use std::process::ExitCode;

const EXIT_ASSUMPTION_FAILURE: u8 = 2;
const EXIT_PROTOCOL_VIOLATION: u8 = 3;
const EXIT_IO_FORMAT: u8 = 4;

#[derive(Parser)]
#[command(name = "aidef", version, about = "Agent-world simulation runner")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum AgentKind {
    Random,
    Miner,
}

#[derive(Subcommand)]
enum Command {
    /// Run one episode and write its trace.
    Run {
        /// World id: `ttt-eye` or `tm:<seed>:<max_states>`.
        #[arg(long)]
        world: String,
        #[arg(long, value_enum, default_value = "random")]
        agent: AgentKind,
        /// Accepted moves to run for.
        #[arg(long)]
        steps: u64,
        /// World seed; also the agent seed unless --agent-seed is given.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        agent_seed: Option<u64>,
        #[arg(long)]
        out: PathBuf,
        /// Rules file for the miner agent (from `aidef mine`).
        #[arg(long)]
        rules: Option<PathBuf>,
        /// Chance of deliberately probing a predicted-incorrect move.
        #[arg(long, default_value_t = 0.0)]
        epsilon: f64,
        /// Prefer moves that keep more options open when positive.
        #[arg(long, default_value_t = 0.0)]
        mobility_weight: f64,
    },
    /// Mine implications from a recorded trace.
    Mine {
        #[arg(long)]
        trace: PathBuf,
        #[arg(long, default_value_t = 2)]
        max_atoms: usize,
        #[arg(long, default_value_t = 20)]
        min_support: u64,
        #[arg(long, default_value_t = 0.0)]
        max_violation_rate: f64,
        /// Mine next-input rules instead of bad-move rules (experimental).
        #[arg(long)]
        next_input: bool,
        #[arg(long)]
        out: PathBuf,
    },
    /// Fuzz a world against the incorrect-move assumptions.
    CheckWorld {
        #[arg(long)]
        world: String,
        /// Number of seeded random walks.
        #[arg(long, default_value_t = 100)]
        trials: u64,
        /// Accepted moves per walk.
        #[arg(long, default_value_t = 50)]
        horizon: usize,
        /// Incorrect moves probed per visited state.
        #[arg(long, default_value_t = 4)]
        probes: usize,
    },
    /// Re-run a trace through a fresh world and verify it reproduces.
    Replay {
        #[arg(long)]
        trace: PathBuf,
    },
    /// Success of a recorded life.
    Score {
        #[arg(long)]
        trace: PathBuf,
    },
    /// Act as the device yourself on an interactive terminal.
    Play {
        #[arg(long)]
        world: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn new(code: u8, message: impl ToString) -> Self {
        Failure {
            code,
            message: message.to_string(),
        }
    }

    fn io(message: impl ToString) -> Self {
        Self::new(EXIT_IO_FORMAT, message)
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter("AIDEF_LOG")).init();
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            eprintln!("error: {}", failure.message);
            ExitCode::from(failure.code)
        }
    }
}

fn dispatch(command: Command) -> Result<(), Failure> {
    match command {
        Command::Run {
            world,
            agent,
            steps,
            seed,
            agent_seed,
            out,
            rules,
            epsilon,
            mobility_weight,
        } => cmd_run(
            &world,
            agent,
            steps,
            seed,
            agent_seed.unwrap_or(seed),
            &out,
            rules.as_deref(),
            epsilon,
            mobility_weight,
        ),
        Command::Mine {
            trace,
            max_atoms,
            min_support,
            max_violation_rate,
            next_input,
            out,
        } => cmd_mine(
            &trace,
            MinerConfig {
                max_atoms,
                min_support,
                max_violation_rate,
                next_input_consequents: next_input,
            },
            &out,
        ),
        Command::CheckWorld {
            world,
            trials,
            horizon,
            probes,
        } => cmd_check_world(&world, trials, horizon, probes),
        Command::Replay { trace } => cmd_replay(&trace),
        Command::Score { trace } => cmd_score(&trace),
        Command::Play { world, seed } => cmd_play(&world, seed),
    }
}

#[allow(clippy::too_many_arguments)]
fn cmd_run(
    world_id: &str,
    agent_kind: AgentKind,
    steps: u64,
    seed: u64,
    agent_seed: u64,
    out: &std::path::Path,
    rules_path: Option<&std::path::Path>,
    epsilon: f64,
    mobility_weight: f64,
) -> Result<(), Failure> {
    if steps == 0 {
        return Err(Failure::io("--steps must be at least 1"));
    }
    let world = AnyWorld::from_id(world_id).map_err(Failure::io)?;
    let mut agent: Box<dyn AgentPolicy> = match agent_kind {
        AgentKind::Random => Box::new(RandomAgent::new(agent_seed)),
        AgentKind::Miner => {
            let rules = match rules_path {
                Some(path) => {
                    let text = std::fs::read_to_string(path).map_err(Failure::io)?;
                    rules_from_jsonl(&text, world.schema()).map_err(Failure::io)?
                }
                None => {
                    log::warn!("miner agent without --rules behaves like the random agent");
                    Vec::new()
                }
            };
            Box::new(MinerGuidedAgent::new(
                rules,
                agent_seed,
                epsilon,
                mobility_weight,
            ))
        }
    };
    let cfg = EpisodeConfig {
        max_steps: steps,
        world_seed: seed,
        agent_seed,
    };
    let life = run_episode(&world, agent.as_mut(), &cfg)
        .map_err(|e| Failure::new(EXIT_PROTOCOL_VIOLATION, e))?;
    write_trace(&life, out).map_err(Failure::io)?;
    println!(
        "{}",
        serde_json::json!({
            "world": world_id,
            "steps": life.len(),
            "death": life.death,
            "trace": out.display().to_string(),
        })
    );
    Ok(())
}

fn cmd_mine(
    trace: &std::path::Path,
    config: MinerConfig,
    out: &std::path::Path,
) -> Result<(), Failure> {
    let life = read_trace(trace).map_err(Failure::io)?;
    let rules = mine_implications(&life, &config).map_err(Failure::io)?;
    std::fs::write(out, rules_to_jsonl(&rules)).map_err(Failure::io)?;
    println!(
        "{}",
        serde_json::json!({
            "rules": rules.len(),
            "out": out.display().to_string(),
        })
    );
    for rule in &rules {
        log::info!("{rule}");
    }
    Ok(())
}

fn cmd_check_world(
    world_id: &str,
    trials: u64,
    horizon: usize,
    probes: usize,
) -> Result<(), Failure> {
    let world = AnyWorld::from_id(world_id).map_err(Failure::io)?;
    let fuzz = FuzzConfig {
        seeds: (0..trials).collect(),
        trials: probes,
        horizon,
    };
    let report =
        check_world_assumptions(&world, &fuzz).map_err(|e| Failure::new(EXIT_IO_FORMAT, e))?;
    print!("{}", report.to_json_lines());
    if report.failed() {
        return Err(Failure::new(
            EXIT_ASSUMPTION_FAILURE,
            format!("world '{world_id}' failed an assumption check"),
        ));
    }
    Ok(())
}

fn cmd_replay(trace: &std::path::Path) -> Result<(), Failure> {
    let life = read_trace(trace).map_err(Failure::io)?;
    replay(&life).map_err(|e| Failure::new(EXIT_PROTOCOL_VIOLATION, e))?;
    println!(
        "{}",
        serde_json::json!({"replayed_steps": life.len(), "ok": true})
    );
    Ok(())
}

fn cmd_score(trace: &std::path::Path) -> Result<(), Failure> {
    let life = read_trace(trace).map_err(Failure::io)?;
    let report = report_success(&life);
    println!(
        "{}",
        serde_json::to_string(&report).expect("report serializes")
    );
    Ok(())
}

fn parse_output_line(specs: &[SignalSpec], line: &str) -> Result<Vec<SignalValue>, String> {
    let tokens: Vec<&str> = line.split_whitespace().collect();
    if tokens.len() == 1 && (tokens[0] == "n" || tokens[0] == "nothing") {
        return Ok(aidef_core::signal::nothing_vector(specs));
    }
    if tokens.len() != specs.len() {
        return Err(format!(
            "expected {} values ({}), got {}",
            specs.len(),
            specs
                .iter()
                .map(|s| s.name.as_str())
                .collect::<Vec<_>>()
                .join(" "),
            tokens.len()
        ));
    }
    specs
        .iter()
        .zip(&tokens)
        .map(|(spec, token)| {
            let scalar = match spec.kind {
                ScalarKind::Boolean => match *token {
                    "0" => Scalar::Bool(false),
                    "1" => Scalar::Bool(true),
                    other => {
                        return Err(format!("'{}': expected 0 or 1, got '{other}'", spec.name))
                    }
                },
                ScalarKind::Finite { .. } => Scalar::Finite(
                    token
                        .parse::<u64>()
                        .map_err(|e| format!("'{}': {e}", spec.name))?,
                ),
                ScalarKind::Integer => Scalar::Int(
                    token
                        .parse::<i64>()
                        .map_err(|e| format!("'{}': {e}", spec.name))?,
                ),
                ScalarKind::Real => Scalar::Real(
                    token
                        .parse::<f64>()
                        .map_err(|e| format!("'{}': {e}", spec.name))?,
                ),
            };
            Ok(SignalValue::Concrete(scalar))
        })
        .collect()
}

fn render_vector(specs: &[SignalSpec], values: &[SignalValue]) -> String {
    specs
        .iter()
        .zip(values)
        .map(|(spec, v)| format!("{}={}", spec.name, v))
        .collect::<Vec<_>>()
        .join(" ")
}

fn cmd_play(world_id: &str, seed: u64) -> Result<(), Failure> {
    let world = AnyWorld::from_id(world_id).map_err(Failure::io)?;
    let schema = world.schema().clone();
    let metadata = Metadata::new(world_id, "human", seed, 0);
    let mut session = Session::new(&world, seed, metadata);

    let stdin = std::io::stdin();
    let mut out = std::io::stdout();
    writeln!(out, "world {world_id}; you are the device").ok();
    writeln!(
        out,
        "enter {} values ({}), 'n' for the all-nothing move, 'quit' to stop",
        schema.outputs.len(),
        schema
            .outputs
            .iter()
            .map(|s| s.name.as_str())
            .collect::<Vec<_>>()
            .join(" ")
    )
    .ok();

    loop {
        if world.life_complete(session.state()) {
            writeln!(out, "life complete after {} steps", session.t()).ok();
            break;
        }
        let observation = session.observation().clone();
        writeln!(
            out,
            "t={} | {} | {}",
            session.t(),
            render_vector(&schema.inputs, &observation.inputs),
            render_vector(&schema.rewards, &observation.rewards),
        )
        .ok();
        if !session.tried_incorrect().is_empty() {
            for tried in session.tried_incorrect() {
                writeln!(out, "  rejected: {}", render_vector(&schema.outputs, tried)).ok();
            }
        }
        write!(out, "> ").ok();
        out.flush().ok();

        let mut line = String::new();
        match stdin.lock().read_line(&mut line) {
            Ok(0) => break,
            Ok(_) => {}
            Err(e) => return Err(Failure::io(e)),
        }
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if line == "quit" || line == "exit" {
            break;
        }
        let output = match parse_output_line(&schema.outputs, line) {
            Ok(v) => v,
            Err(e) => {
                writeln!(out, "  ? {e}").ok();
                continue;
            }
        };
        match session.attempt(&output) {
            Ok(StepOutcome::Accepted { reward, .. }) => {
                writeln!(
                    out,
                    "  accepted; reward {}",
                    render_vector(&schema.rewards, &reward)
                )
                .ok();
            }
            Ok(StepOutcome::Rejected) => {
                writeln!(out, "  incorrect move (bad_move=1); time did not advance").ok();
            }
            Err(e @ ProtocolError::DuplicateIncorrectMove { .. }) => {
                writeln!(out, "  ? {e}").ok();
            }
            Err(e) => {
                writeln!(out, "  ? {e}").ok();
            }
        }
    }

    let life = session.into_life();
    let report = report_success(&life);
    writeln!(
        out,
        "{}",
        serde_json::to_string(&report).expect("report serializes")
    )
    .ok();
    Ok(())
}
