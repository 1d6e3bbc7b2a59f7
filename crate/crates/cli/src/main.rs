use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use dimacheck::composer::{self, AnalysisSettings, ComposeError};
use dimacheck::dima::config::{ms_to_us, SystemConfig, DEFAULT_QUANTUM_US};
use dimacheck::dima::network_ts;
use dimacheck::document::{parse_document, Document};
use dimacheck::model::Automaton;
use dimacheck::report::{AnalysisReport, GlobalResult, RowVerdict, SystemVerdict, REPORT_FORMAT, REPORT_VERSION};
use dimacheck::safety::Limits;
use dimacheck::simulation::{check_simulation, SimError, SimOptions};

const EXIT_OK: u8 = 0;
const EXIT_USAGE: u8 = 1;
const EXIT_NEGATIVE: u8 = 2;
const EXIT_ALPHABET: u8 = 3;
const EXIT_LIMIT: u8 = 4;

#[derive(Parser, Debug)]
#[command(name = "dimacheck", version, about = "Compositional schedulability analysis of partitioned avionics systems")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Decompose, certify interfaces, check every partition and deduce a verdict.
    CheckSystem {
        input: PathBuf,
        #[command(flatten)]
        run: RunArgs,
        /// Fall back to the exact global check with this state budget when the rule does not conclude.
        #[arg(long, value_name = "STATES")]
        global_budget: Option<u64>,
    },
    /// Certify the inputs of one partition and check its obligation.
    CheckPartition {
        input: PathBuf,
        #[arg(long)]
        partition: String,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Decide whether the concrete network is simulated by the abstract one.
    CheckSimulation {
        concrete: PathBuf,
        #[arg(value_name = "ABSTRACT")]
        abstract_: PathBuf,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Model-check the full system without decomposition.
    CheckGlobal {
        input: PathBuf,
        /// Only look for violations of this partition's requirements.
        #[arg(long)]
        partition: Option<String>,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Synthesize and certify the interface of every received message.
    SynthesizeInterfaces {
        input: PathBuf,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Parse and validate a model document.
    Validate {
        input: PathBuf,
        #[command(flatten)]
        run: RunArgs,
    },
}

#[derive(Args, Debug, Clone)]
struct RunArgs {
    /// Time quantum in milliseconds.
    #[arg(long, value_name = "MS")]
    quantum: Option<f64>,
    #[arg(long, value_name = "N", value_parser = clap::value_parser!(u64).range(1..))]
    max_states: Option<u64>,
    /// Wall-clock budget per check, in seconds.
    #[arg(long, value_name = "SECS", value_parser = clap::value_parser!(u64).range(1..))]
    max_time: Option<u64>,
    #[arg(long, value_name = "N", value_parser = clap::value_parser!(u64).range(1..))]
    jobs: Option<u64>,
    #[arg(long, value_enum, default_value_t = Format::Table)]
    format: Format,
    /// Write the output to a file instead of stdout.
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
enum Format {
    Table,
    Structured,
}

impl RunArgs {
    fn limits(&self) -> Limits {
        let mut l = Limits::default();
        if let Some(n) = self.max_states {
            l.max_states = n;
        }
        if let Some(s) = self.max_time {
            l.max_time = Duration::from_secs(s);
        }
        l
    }

    fn quantum_us(&self) -> Result<Option<u64>> {
        match self.quantum {
            None => Ok(None),
            Some(ms) => {
                let us = ms_to_us(ms).ok_or_else(|| anyhow!("--quantum: `{ms}` is not a whole number of microseconds"))?;
                if us == 0 {
                    bail!("--quantum must be positive");
                }
                Ok(Some(us))
            }
        }
    }

    fn settings(&self) -> Result<AnalysisSettings> {
        let mut s = AnalysisSettings {
            quantum_us: self.quantum_us()?,
            limits: self.limits(),
            sim_limits: self.limits(),
            ..AnalysisSettings::default()
        };
        if let Some(j) = self.jobs {
            s.jobs = j as usize;
        }
        Ok(s)
    }

    fn emit(&self, text: &str) -> Result<()> {
        match &self.out {
            Some(path) => fs::write(path, text).with_context(|| format!("cannot write {}", path.display())),
            None => {
                let mut out = std::io::stdout().lock();
                out.write_all(text.as_bytes())?;
                out.flush()?;
                Ok(())
            }
        }
    }
}

/// A directory stands for the `system.toml` inside it.
fn resolve(input: &Path) -> PathBuf {
    if input.is_dir() {
        input.join("system.toml")
    } else {
        input.to_path_buf()
    }
}

fn load(input: &Path) -> Result<Document> {
    let path = resolve(input);
    let src = fs::read_to_string(&path).with_context(|| format!("cannot read {}", path.display()))?;
    parse_document(&src).with_context(|| format!("{}", path.display()))
}

fn load_system(input: &Path) -> Result<SystemConfig> {
    match load(input)? {
        Document::System(cfg) => Ok(cfg),
        Document::Automata(_) => bail!("{}: expected a system configuration, found automata", input.display()),
    }
}

fn load_automata(input: &Path) -> Result<Vec<Automaton>> {
    match load(input)? {
        Document::Automata(a) => Ok(a),
        Document::System(_) => bail!("{}: expected automata, found a system configuration", input.display()),
    }
}

fn header() -> serde_json::Value {
    json!({ "format": REPORT_FORMAT, "version": REPORT_VERSION })
}

fn jsonl(records: &[serde_json::Value]) -> String {
    let mut out = String::new();
    for r in std::iter::once(&header()).chain(records) {
        out.push_str(&r.to_string());
        out.push('\n');
    }
    out
}

fn row_code(v: RowVerdict) -> u8 {
    match v {
        RowVerdict::Safe => EXIT_OK,
        RowVerdict::Unsafe => EXIT_NEGATIVE,
        RowVerdict::LimitExceeded => EXIT_LIMIT,
    }
}

fn render_report(report: &AnalysisReport, run: &RunArgs) -> Result<()> {
    match run.format {
        Format::Table => run.emit(&format!("{}\n{}", report.render_table(), report.render_proof_log())),
        Format::Structured => run.emit(&report.to_jsonl()),
    }
}

fn render_global(system: &str, quantum_us: u64, g: &GlobalResult) -> String {
    let mut s = format!(
        "global check of {system} at {} ms: {}\nexplored states: {}\npeak frontier: {}\ntime: {:.2} s\n",
        quantum_us as f64 / 1000.0,
        match g.verdict {
            RowVerdict::Safe => "safe",
            RowVerdict::Unsafe => "unsafe",
            RowVerdict::LimitExceeded => "limit exceeded",
        },
        g.explored_states,
        g.peak_frontier,
        g.elapsed_ms as f64 / 1000.0
    );
    if let Some(v) = &g.violation {
        s.push_str(&format!("violation: {v}\n"));
    }
    for line in g.trace.iter().flatten() {
        s.push_str(&format!("  {line}\n"));
    }
    s
}

fn compose_error_code(e: &ComposeError) -> u8 {
    match e {
        ComposeError::Simulation(SimError::AlphabetViolation(_)) => EXIT_ALPHABET,
        ComposeError::Simulation(SimError::LimitExceeded { .. }) | ComposeError::Check(_) => EXIT_LIMIT,
        _ => EXIT_USAGE,
    }
}

fn run(cli: Cli) -> Result<u8> {
    match cli.command {
        Command::CheckSystem { input, run, global_budget } => {
            let cfg = load_system(&input)?;
            let mut settings = run.settings()?;
            settings.global_budget = global_budget.map(|n| Limits { max_states: n, ..run.limits() });
            let report = composer::analyze_system(&cfg, &settings)?;
            render_report(&report, &run)?;
            Ok(if report.is_schedulable() { EXIT_OK } else { EXIT_NEGATIVE })
        }
        Command::CheckPartition { input, partition, run } => {
            let cfg = load_system(&input)?;
            let report = composer::analyze_partition(&cfg, &partition, &run.settings()?)?;
            render_report(&report, &run)?;
            let row = report.row(&partition).ok_or_else(|| anyhow!("no row for partition `{partition}`"))?;
            Ok(row_code(row.verdict))
        }
        Command::CheckGlobal { input, partition, run } => {
            let settings = run.settings()?;
            let cfg = composer::effective_config(&load_system(&input)?, &settings);
            let g = match &partition {
                Some(p) => composer::check_global_partition(&cfg, p, &settings.limits)?,
                None => composer::check_global(&cfg, &settings.limits)?,
            };
            match run.format {
                Format::Table => run.emit(&render_global(&cfg.name, cfg.quantum_us, &g))?,
                Format::Structured => run.emit(&jsonl(&[
                    json!({ "record": "system", "name": cfg.name, "quantum_us": cfg.quantum_us, "partition": partition }),
                    json!({ "record": "global", "result": g }),
                ]))?,
            }
            Ok(row_code(g.verdict))
        }
        Command::SynthesizeInterfaces { input, run } => {
            let cfg = load_system(&input)?;
            let settings = run.settings()?;
            let certs = composer::synthesize_all(&cfg, &settings)?;
            let quantum_us = settings.quantum_us.unwrap_or(cfg.quantum_us);
            let report = AnalysisReport {
                system: cfg.name.clone(),
                quantum_us,
                rows: Vec::new(),
                certificates: certs,
                proof_log: Vec::new(),
                global: None,
                verdict: SystemVerdict::NotConcluded,
                explanation: vec!["interface synthesis only; no obligation was checked".into()],
            };
            match run.format {
                Format::Table => run.emit(&report.render_table())?,
                Format::Structured => run.emit(&report.to_jsonl())?,
            }
            Ok(if report.certificates.iter().all(|c| c.holds) { EXIT_OK } else { EXIT_NEGATIVE })
        }
        Command::CheckSimulation { concrete, abstract_, run } => {
            let q = run.quantum_us()?.unwrap_or(DEFAULT_QUANTUM_US);
            let c = network_ts("concrete", &load_automata(&concrete)?, q)?;
            let a = network_ts("abstract", &load_automata(&abstract_)?, q)?;
            let opts = SimOptions {
                limits: run.limits(),
                keep_relation: false,
            };
            let w = match check_simulation(&c, &a, &opts) {
                Ok(w) => w,
                Err(e) => {
                    eprintln!("error: {e}");
                    return Ok(match e {
                        SimError::AlphabetViolation(_) => EXIT_ALPHABET,
                        SimError::LimitExceeded { .. } => EXIT_LIMIT,
                    });
                }
            };
            match run.format {
                Format::Table => {
                    let mut s = format!(
                        "simulation {}\npairs: {}\nconcrete states: {}\n",
                        if w.holds { "holds" } else { "fails" },
                        w.pairs,
                        w.concrete_states
                    );
                    if let Some(cx) = &w.counterexample {
                        s.push_str(&format!(
                            "violated clause: {} at depth {}{}\n",
                            cx.clause.as_str(),
                            cx.depth,
                            if cx.label.is_empty() { String::new() } else { format!(" on {}", cx.label) }
                        ));
                    }
                    run.emit(&s)?;
                }
                Format::Structured => run.emit(&jsonl(&[json!({
                    "record": "simulation",
                    "holds": w.holds,
                    "pairs": w.pairs,
                    "concrete_states": w.concrete_states,
                    "counterexample": w.counterexample,
                })]))?,
            }
            Ok(if w.holds { EXIT_OK } else { EXIT_NEGATIVE })
        }
        Command::Validate { input, run } => {
            let summary = match load(&input)? {
                Document::Automata(a) => {
                    let q = run.quantum_us()?.unwrap_or(DEFAULT_QUANTUM_US);
                    network_ts("network", &a, q)?;
                    format!("valid network of {} automata", a.len())
                }
                Document::System(cfg) => {
                    let settings = run.settings()?;
                    let cfg = composer::effective_config(&cfg, &settings);
                    let obligations = composer::decompose(&cfg)?;
                    let automata = dimacheck::dima::global_network(&cfg, cfg.quantum_us)?;
                    network_ts(&cfg.name, &automata, cfg.quantum_us)?;
                    format!(
                        "valid system `{}`: {} partitions, {} tasks, {} virtual links, {} obligations",
                        cfg.name,
                        cfg.partitions.len(),
                        cfg.partitions.iter().map(|p| p.tasks.len()).sum::<usize>(),
                        cfg.virtual_links.len(),
                        obligations.len()
                    )
                }
            };
            run.emit(&format!("{summary}\n"))?;
            Ok(EXIT_OK)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            let code = e.downcast_ref::<ComposeError>().map(compose_error_code).unwrap_or(EXIT_USAGE);
            ExitCode::from(code)
        }
    }
}
