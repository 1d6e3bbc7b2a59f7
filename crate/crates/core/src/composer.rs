//! Compositional schedulability analysis.
//!
//! The system is split into one obligation per partition. Each message a
//! partition receives is replaced by a periodic message interface whose
//! parameters are searched until the sending partition is certified to be
//! simulated by it. Every partition is then model checked against its
//! interfaces, and the results are combined by the assume-guarantee rule:
//! the system is schedulable when every partition is safe under its
//! interfaces and every interface is certified.

use std::collections::{BTreeMap, HashMap};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::Instant;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dima::config::{to_quanta, us_to_ms, ConfigError, PartitionSpec, PortKind, SystemConfig, TaskKind};
use crate::dima::{global_network, inbound_network, network_ts, partition_core};
use crate::model::{ActionKind, Automaton, CmpOp, Constraint, Direction, Edge, Location, Update};
use crate::report::{AnalysisReport, CertificateRecord, GlobalResult, PartitionRow, ProofStep, RowVerdict, SystemVerdict};
use crate::safety::{check_safety, CheckError, Limits, Trace, Verdict};
use crate::semantics::{semantics_of, Composite, Label, SemanticsError, TransitionSystem};
use crate::simulation::{verify_witness, Clause, SimError, SimOptions, SimWitness, SimulationChecker};

#[derive(Debug, Error)]
pub enum ComposeError {
    #[error("invalid configuration: {}", .0.join("; "))]
    Config(Vec<String>),
    #[error(transparent)]
    Build(#[from] ConfigError),
    #[error(transparent)]
    Semantics(#[from] SemanticsError),
    #[error(transparent)]
    Simulation(#[from] SimError),
    #[error(transparent)]
    Check(#[from] CheckError),
    #[error("message `{message}` is sent by sporadic task `{task}`; interfaces are synthesized for periodic sources only")]
    SporadicSource { message: String, task: String },
    #[error("no certifiable interface for `{message}` sent by `{sender}`: {reason}")]
    NoCertifiableInterface { message: String, sender: String, reason: String },
    #[error("interface parameters for `{message}`: {reason}")]
    InvalidParams { message: String, reason: String },
}

/// Parameters of a periodic message interface, in microseconds.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct MessageInterfaceParams {
    pub message: String,
    pub period_us: u64,
    pub init_offset_us: u64,
    pub offset_us: u64,
    pub jitter_us: u64,
}

impl MessageInterfaceParams {
    /// Emission anywhere in the period.
    pub fn maximal(message: &str, period_us: u64, init_offset_us: u64) -> Self {
        MessageInterfaceParams {
            message: message.to_owned(),
            period_us,
            init_offset_us,
            offset_us: 0,
            jitter_us: period_us,
        }
    }

    pub fn validate(&self) -> Result<(), ComposeError> {
        let bad = |reason: &str| {
            Err(ComposeError::InvalidParams {
                message: self.message.clone(),
                reason: reason.to_owned(),
            })
        };
        if self.period_us == 0 {
            return bad("period must be positive");
        }
        if self.jitter_us > self.period_us {
            return bad("jitter exceeds the period");
        }
        if self.offset_us + self.jitter_us > self.period_us {
            return bad("offset + jitter exceeds the period");
        }
        Ok(())
    }

    fn with(&self, offset_q: i64, jitter_q: i64, quantum_us: u64) -> Self {
        MessageInterfaceParams {
            offset_us: offset_q as u64 * quantum_us,
            jitter_us: jitter_q as u64 * quantum_us,
            ..self.clone()
        }
    }
}

/// The periodic interface automaton: after `init_offset`, once per period it
/// emits the message at some point of `[offset, offset + jitter]` relative
/// to the period start.
pub fn build_message_interface(p: &MessageInterfaceParams, quantum_us: u64) -> Result<Automaton, ComposeError> {
    p.validate()?;
    let q = |what: &str, v: u64| to_quanta(&format!("{what} of the {} interface", p.message), v, quantum_us);
    let period = q("period", p.period_us)?;
    let init = q("init offset", p.init_offset_us)?;
    let offset = q("offset", p.offset_us)?;
    let jitter = q("jitter", p.jitter_us)?;
    let mut a = Automaton::new(format!("{}.iface", p.message));
    a.time_unit_us = Some(quantum_us);
    a.clock("x")
        .action(p.message.clone(), ActionKind::Broadcast, Direction::Output)
        .location(Location::new("init").with_invariant(Constraint::atom("x", CmpOp::Le, init)))
        .location(Location::new("idle").with_invariant(Constraint::atom("x", CmpOp::Le, offset + jitter)))
        .location(Location::new("sent").with_invariant(Constraint::atom("x", CmpOp::Le, period)))
        .edge(Edge::new("init", "idle").when("x", CmpOp::Eq, init).update(Update::none().reset("x")))
        .edge(Edge::new("idle", "sent").when("x", CmpOp::Ge, offset).emit(p.message.clone()))
        .edge(Edge::new("sent", "idle").when("x", CmpOp::Eq, period).update(Update::none().reset("x")));
    Ok(a)
}

/// One partition's local schedulability problem.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PartitionObligation {
    pub partition: String,
    /// Messages the partition receives.
    pub required_inputs: Vec<String>,
    /// Sending partition of each required input.
    pub senders: BTreeMap<String, String>,
    /// One interface per required input.
    pub environment: Vec<MessageInterfaceParams>,
}

fn config_errors(cfg: &SystemConfig) -> Result<(), ComposeError> {
    let errs = cfg.validate();
    if errs.is_empty() {
        Ok(())
    } else {
        Err(ComposeError::Config(errs))
    }
}

/// Initial interface guess for `message`: the source task's period and
/// offset, emission anywhere in the period.
pub fn seed_params(cfg: &SystemConfig, message: &str) -> Result<(String, MessageInterfaceParams), ComposeError> {
    let (p, t) = cfg
        .sender_of(message)
        .ok_or_else(|| ComposeError::Config(vec![format!("message `{message}` has no sending task")]))?;
    if t.kind == TaskKind::Sporadic {
        return Err(ComposeError::SporadicSource {
            message: message.to_owned(),
            task: t.id.clone(),
        });
    }
    Ok((p.id.clone(), MessageInterfaceParams::maximal(message, t.period_us, t.offset_us)))
}

/// Split the system into one obligation per partition, each environment
/// seeded with maximal interfaces.
pub fn decompose(cfg: &SystemConfig) -> Result<Vec<PartitionObligation>, ComposeError> {
    config_errors(cfg)?;
    let mut out = Vec::new();
    for p in &cfg.partitions {
        let mut ob = PartitionObligation {
            partition: p.id.clone(),
            required_inputs: Vec::new(),
            senders: BTreeMap::new(),
            environment: Vec::new(),
        };
        for m in p.inbound_messages() {
            let (sender, seed) = seed_params(cfg, m)?;
            if sender == p.id {
                return Err(ComposeError::Config(vec![format!("partition `{sender}` sends `{m}` to itself")]));
            }
            ob.required_inputs.push(m.to_owned());
            ob.senders.insert(m.to_owned(), sender);
            ob.environment.push(seed);
        }
        out.push(ob);
    }
    Ok(out)
}

/// The model a sender is certified on: its supply, scheduler, tasks and
/// resources. Tasks never block on communication, so the partition's own
/// inbound environment does not influence when it emits messages.
pub fn certification_model(cfg: &SystemConfig, partition: &PartitionSpec, quantum_us: u64) -> Result<Composite, ComposeError> {
    Ok(network_ts(&partition.id, &partition_core(cfg, partition, quantum_us)?, quantum_us)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SearchMode {
    /// Binary search on jitter, binary search on offset for each jitter.
    #[default]
    Binary,
    /// Every jitter from zero upwards, every offset from zero upwards.
    Linear,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Attempt {
    pub offset_us: u64,
    pub jitter_us: u64,
    pub holds: bool,
    pub clause: Option<Clause>,
}

#[derive(Debug, Clone)]
pub struct Synthesis {
    pub params: MessageInterfaceParams,
    pub witness: SimWitness,
    pub attempts: Vec<Attempt>,
}

struct Search<'a> {
    checker: &'a SimulationChecker,
    guess: &'a MessageInterfaceParams,
    quantum_us: u64,
    opts: SimOptions,
    tried: HashMap<(i64, i64), Option<Clause>>,
    attempts: Vec<Attempt>,
}

impl Search<'_> {
    /// `None` when the candidate is certified, else the failing clause.
    fn probe(&mut self, offset: i64, jitter: i64) -> Result<Option<Clause>, ComposeError> {
        if let Some(r) = self.tried.get(&(offset, jitter)) {
            return Ok(*r);
        }
        let params = self.guess.with(offset, jitter, self.quantum_us);
        let ts = semantics_of(&build_message_interface(&params, self.quantum_us)?, self.quantum_us)?;
        let w = self.checker.check(&ts, &self.opts)?;
        let r = if w.holds {
            None
        } else {
            Some(w.counterexample.map(|c| c.clause).unwrap_or(Clause::GMismatch))
        };
        self.tried.insert((offset, jitter), r);
        self.attempts.push(Attempt {
            offset_us: params.offset_us,
            jitter_us: params.jitter_us,
            holds: r.is_none(),
            clause: r,
        });
        Ok(r)
    }

    /// Earliest certified offset for `jitter`.
    fn offset_for(&mut self, jitter: i64, period: i64, mode: SearchMode) -> Result<Option<i64>, ComposeError> {
        match mode {
            SearchMode::Linear => {
                for o in 0..=period - jitter {
                    if self.probe(o, jitter)?.is_none() {
                        return Ok(Some(o));
                    }
                }
                Ok(None)
            }
            SearchMode::Binary => {
                let (mut lo, mut hi) = (0, period - jitter);
                let mut found = None;
                while lo <= hi {
                    let mid = lo + (hi - lo) / 2;
                    match self.probe(mid, jitter)? {
                        None => {
                            found = Some(mid);
                            hi = mid - 1;
                        }
                        // the sender emitted before the window opened
                        Some(Clause::Output) => hi = mid - 1,
                        // the window closed before the sender emitted
                        Some(Clause::Delay) => lo = mid + 1,
                        Some(_) => break,
                    }
                }
                Ok(found)
            }
        }
    }
}

/// Search the interface parameters of `guess.message` against the cached
/// sender graph: smallest certified jitter first, then earliest offset.
pub fn synthesize_interface(
    checker: &SimulationChecker,
    sender: &str,
    guess: &MessageInterfaceParams,
    quantum_us: u64,
    opts: &SimOptions,
    mode: SearchMode,
) -> Result<Synthesis, ComposeError> {
    guess.validate()?;
    let period = to_quanta(&format!("period of the {} interface", guess.message), guess.period_us, quantum_us)?;
    let mut search = Search {
        checker,
        guess,
        quantum_us,
        opts: SimOptions {
            keep_relation: false,
            ..*opts
        },
        tried: HashMap::new(),
        attempts: Vec::new(),
    };
    let fail = |reason: String| ComposeError::NoCertifiableInterface {
        message: guess.message.clone(),
        sender: sender.to_owned(),
        reason,
    };
    let (jitter, offset) = match mode {
        SearchMode::Binary => {
            if let Some(c) = search.probe(0, period)? {
                return Err(fail(format!("even the maximal interface fails ({})", c.as_str())));
            }
            let mut best = (period, 0);
            let (mut lo, mut hi) = (0, period);
            while lo < hi {
                let mid = lo + (hi - lo) / 2;
                match search.offset_for(mid, period, mode)? {
                    Some(o) => {
                        best = (mid, o);
                        hi = mid;
                    }
                    None => lo = mid + 1,
                }
            }
            if best.0 == period {
                best.1 = search.offset_for(period, period, mode)?.unwrap_or(0);
            }
            best
        }
        SearchMode::Linear => {
            let mut found = None;
            for j in 0..=period {
                if let Some(o) = search.offset_for(j, period, mode)? {
                    found = Some((j, o));
                    break;
                }
            }
            found.ok_or_else(|| fail("no jitter and offset pair is certified".into()))?
        }
    };
    let params = guess.with(offset, jitter, quantum_us);
    let ts = semantics_of(&build_message_interface(&params, quantum_us)?, quantum_us)?;
    let witness = checker.check(&ts, opts)?;
    debug_assert!(witness.holds);
    Ok(Synthesis {
        params,
        witness,
        attempts: search.attempts,
    })
}

/// Settings of a full analysis.
#[derive(Debug, Clone)]
pub struct AnalysisSettings {
    /// Overrides the configuration's quantum.
    pub quantum_us: Option<u64>,
    /// Budget of each obligation check.
    pub limits: Limits,
    /// Budget of each simulation check.
    pub sim_limits: Limits,
    pub jobs: usize,
    /// Re-verify every certificate's relation independently.
    pub verify_certificates: bool,
    /// When set and the rule does not conclude, run the global check with this budget.
    pub global_budget: Option<Limits>,
    pub search: SearchMode,
}

impl Default for AnalysisSettings {
    fn default() -> Self {
        AnalysisSettings {
            quantum_us: None,
            limits: Limits::default(),
            sim_limits: Limits::default(),
            jobs: std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1),
            verify_certificates: true,
            global_budget: None,
            search: SearchMode::Binary,
        }
    }
}

/// Apply the settings' quantum to a copy of `cfg`.
pub fn effective_config(cfg: &SystemConfig, settings: &AnalysisSettings) -> SystemConfig {
    let mut cfg = cfg.clone();
    if let Some(q) = settings.quantum_us {
        cfg.quantum_us = q;
    }
    cfg
}

/// Run `f` over `items` on up to `jobs` threads; results keep item order.
fn parallel_map<T: Sync, R: Send>(items: &[T], jobs: usize, f: impl Fn(&T) -> R + Sync) -> Vec<R> {
    let jobs = jobs.clamp(1, items.len().max(1));
    if jobs == 1 {
        return items.iter().map(f).collect();
    }
    let next = AtomicUsize::new(0);
    let results: Mutex<Vec<Option<R>>> = Mutex::new((0..items.len()).map(|_| None).collect());
    std::thread::scope(|s| {
        for _ in 0..jobs {
            s.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::SeqCst);
                if i >= items.len() {
                    break;
                }
                let r = f(&items[i]);
                results.lock().unwrap()[i] = Some(r);
            });
        }
    });
    results.into_inner().unwrap().into_iter().map(|r| r.expect("every item ran")).collect()
}

/// Certify interfaces for `messages` (each with its seed), grouped by sender.
pub fn synthesize_interfaces(
    cfg: &SystemConfig,
    wanted: &BTreeMap<String, (String, MessageInterfaceParams)>,
    settings: &AnalysisSettings,
) -> Result<Vec<CertificateRecord>, ComposeError> {
    let q = cfg.quantum_us;
    let mut by_sender: BTreeMap<&str, Vec<(&str, &MessageInterfaceParams)>> = BTreeMap::new();
    for (m, (s, p)) in wanted {
        by_sender.entry(s.as_str()).or_default().push((m.as_str(), p));
    }
    let receivers = |m: &str| -> Vec<String> {
        cfg.link_for(m).map(|vl| vl.destinations.clone()).unwrap_or_default()
    };
    let groups: Vec<(&str, Vec<(&str, &MessageInterfaceParams)>)> = by_sender.into_iter().collect();
    let per_sender = parallel_map(&groups, settings.jobs, |(sender, msgs)| -> Result<Vec<CertificateRecord>, ComposeError> {
        let part = cfg.partition(sender)?;
        let concrete = certification_model(cfg, part, q)?;
        let opts = SimOptions {
            limits: settings.sim_limits,
            keep_relation: settings.verify_certificates,
        };
        let started = Instant::now();
        let checker = SimulationChecker::new(&concrete, &settings.sim_limits)?;
        let build_ms = started.elapsed().as_millis() as u64;
        let mut out = Vec::new();
        for (m, seed) in msgs {
            let t0 = Instant::now();
            let rec = match synthesize_interface(&checker, sender, seed, q, &opts, settings.search) {
                Ok(syn) => {
                    let verified = match (&syn.witness.relation, settings.verify_certificates) {
                        (Some(rel), true) => {
                            let ts = semantics_of(&build_message_interface(&syn.params, q)?, q)?;
                            verify_witness(&concrete, &ts, rel, None)
                        }
                        _ => false,
                    };
                    CertificateRecord {
                        message: m.to_string(),
                        sender: sender.to_string(),
                        receivers: receivers(m),
                        params: syn.params,
                        holds: syn.witness.holds && (verified || !settings.verify_certificates),
                        verified,
                        attempts: syn.attempts.len() as u32 + 1,
                        pairs: syn.witness.pairs,
                        concrete_states: syn.witness.concrete_states,
                        elapsed_ms: t0.elapsed().as_millis() as u64 + build_ms,
                        failure: (!verified && settings.verify_certificates).then(|| "witness failed re-verification".into()),
                        clause: None,
                    }
                }
                Err(ComposeError::NoCertifiableInterface { reason, .. }) => CertificateRecord {
                    message: m.to_string(),
                    sender: sender.to_string(),
                    receivers: receivers(m),
                    params: (*seed).clone(),
                    holds: false,
                    verified: false,
                    attempts: 1,
                    pairs: 0,
                    concrete_states: checker.states() as u64,
                    elapsed_ms: t0.elapsed().as_millis() as u64 + build_ms,
                    clause: clause_of(&reason),
                    failure: Some(reason),
                },
                Err(e) => return Err(e),
            };
            out.push(rec);
        }
        Ok(out)
    });
    let mut all = Vec::new();
    for r in per_sender {
        all.extend(r?);
    }
    all.sort_by(|a, b| a.message.cmp(&b.message));
    Ok(all)
}

fn clause_of(reason: &str) -> Option<Clause> {
    [Clause::GMismatch, Clause::Input, Clause::Output, Clause::Internal, Clause::Delay]
        .into_iter()
        .find(|c| reason.contains(c.as_str()))
}

/// Automata of an obligation: the partition, its interfaces, its inbound
/// latency chains and its port monitors.
pub fn obligation_network(cfg: &SystemConfig, ob: &PartitionObligation, quantum_us: u64) -> Result<Vec<Automaton>, ComposeError> {
    let part = cfg.partition(&ob.partition)?;
    let mut automata = partition_core(cfg, part, quantum_us)?;
    for p in &ob.environment {
        automata.push(build_message_interface(p, quantum_us)?);
    }
    automata.extend(inbound_network(cfg, part, quantum_us)?);
    Ok(automata)
}

/// Model check one obligation.
pub fn check_obligation(cfg: &SystemConfig, ob: &PartitionObligation, limits: &Limits) -> Result<Verdict, ComposeError> {
    let q = cfg.quantum_us;
    let ts = network_ts(&ob.partition, &obligation_network(cfg, ob, q)?, q)?;
    Ok(check_safety(&ts, limits)?)
}

fn row_from(
    name: &str,
    automata: &[Automaton],
    cfg: &SystemConfig,
    ts: &dyn TransitionSystem,
    r: Result<Verdict, CheckError>,
) -> PartitionRow {
    match r {
        Ok(v) => {
            let (violation, trace) = match &v.trace {
                Some(t) => (Some(describe_violation(cfg, automata, ts, t.last_state())), Some(compact_trace(ts, t, cfg.quantum_us))),
                None => (None, None),
            };
            PartitionRow {
                partition: name.to_owned(),
                verdict: if v.is_safe() { RowVerdict::Safe } else { RowVerdict::Unsafe },
                explored_states: v.stats.explored_states,
                peak_frontier: v.stats.peak_frontier,
                elapsed_ms: v.stats.elapsed_ms,
                violation,
                trace,
            }
        }
        Err(CheckError::LimitExceeded { kind, stats }) => PartitionRow {
            partition: name.to_owned(),
            verdict: RowVerdict::LimitExceeded,
            explored_states: stats.explored_states,
            peak_frontier: stats.peak_frontier,
            elapsed_ms: stats.elapsed_ms,
            violation: Some(format!("{kind:?} limit exceeded").to_lowercase()),
            trace: None,
        },
    }
}

/// Check an obligation and summarise it as a table row.
pub fn obligation_row(cfg: &SystemConfig, ob: &PartitionObligation, limits: &Limits) -> Result<PartitionRow, ComposeError> {
    let q = cfg.quantum_us;
    let automata = obligation_network(cfg, ob, q)?;
    let ts = network_ts(&ob.partition, &automata, q)?;
    Ok(row_from(&ob.partition, &automata, cfg, &ts, check_safety(&ts, limits)))
}

/// Exact check of the whole system: every partition, chain and monitor.
pub fn check_global(cfg: &SystemConfig, limits: &Limits) -> Result<GlobalResult, ComposeError> {
    config_errors(cfg)?;
    let q = cfg.quantum_us;
    let automata = global_network(cfg, q)?;
    let ts = network_ts(&cfg.name, &automata, q)?;
    let row = row_from("global", &automata, cfg, &ts, check_safety(&ts, limits));
    Ok(GlobalResult {
        verdict: row.verdict,
        explored_states: row.explored_states,
        peak_frontier: row.peak_frontier,
        elapsed_ms: row.elapsed_ms,
        violation: row.violation,
        trace: row.trace,
    })
}

/// A composite whose error states are those of a subset of its parts.
struct Scoped<'a> {
    inner: &'a Composite,
    mask: Vec<bool>,
}

impl TransitionSystem for Scoped<'_> {
    fn name(&self) -> &str {
        self.inner.name()
    }

    fn width(&self) -> usize {
        self.inner.width()
    }

    fn initial(&self) -> Vec<i32> {
        self.inner.initial()
    }

    fn successors(&self, s: &[i32], out: &mut crate::semantics::Successors) {
        self.inner.successors(s, out)
    }

    fn is_error(&self, s: &[i32]) -> bool {
        self.inner
            .parts()
            .iter()
            .enumerate()
            .any(|(k, p)| self.mask[k] && p.is_error(self.inner.part_state(k, s)))
    }

    fn alphabet(&self) -> &crate::model::Alphabet {
        self.inner.alphabet()
    }

    fn locations(&self, s: &[i32]) -> Vec<(String, String)> {
        self.inner.locations(s)
    }

    fn valuation(&self, s: &[i32]) -> Vec<(String, i64)> {
        self.inner.valuation(s)
    }

    fn components(&self) -> usize {
        self.inner.components()
    }
}

/// Exact check of the whole system against the requirements of one
/// partition only: errors of its tasks, its inbound chains and its port
/// monitors. Violations elsewhere are ignored.
pub fn check_global_partition(cfg: &SystemConfig, partition: &str, limits: &Limits) -> Result<GlobalResult, ComposeError> {
    check_global_partitions(cfg, &[partition], limits)
}

/// Like [`check_global_partition`] for the union of several partitions'
/// requirements, in one exploration.
pub fn check_global_partitions(cfg: &SystemConfig, partitions: &[&str], limits: &Limits) -> Result<GlobalResult, ComposeError> {
    config_errors(cfg)?;
    let q = cfg.quantum_us;
    let mut scope: Vec<String> = Vec::new();
    for id in partitions {
        let part = cfg.partition(id)?;
        scope.extend(partition_core(cfg, part, q)?.into_iter().map(|a| a.name));
        scope.extend(inbound_network(cfg, part, q)?.into_iter().map(|a| a.name));
    }
    let automata = global_network(cfg, q)?;
    let ts = network_ts(&cfg.name, &automata, q)?;
    let mask = automata.iter().map(|a| scope.contains(&a.name)).collect();
    let scoped = Scoped { inner: &ts, mask };
    let row = row_from(&partitions.join(","), &automata, cfg, &scoped, check_safety(&scoped, limits));
    Ok(GlobalResult {
        verdict: row.verdict,
        explored_states: row.explored_states,
        peak_frontier: row.peak_frontier,
        elapsed_ms: row.elapsed_ms,
        violation: row.violation,
        trace: row.trace,
    })
}

/// Name the error locations occupied in `state`.
pub fn describe_violation(cfg: &SystemConfig, automata: &[Automaton], ts: &dyn TransitionSystem, state: &[i32]) -> String {
    let mut found = Vec::new();
    for ((name, loc), a) in ts.locations(state).into_iter().zip(automata) {
        if !a.location_named(&loc).is_some_and(|l| l.error) {
            continue;
        }
        found.push(explain(cfg, &name, &loc));
    }
    if found.is_empty() {
        "error state reached".into()
    } else {
        found.join("; ")
    }
}

fn explain(cfg: &SystemConfig, automaton: &str, loc: &str) -> String {
    if let Some((pid, port)) = automaton.split_once(".mon.") {
        if let Some(ps) = cfg.partition(pid).ok().and_then(|p| p.port(port)) {
            return match ps.kind {
                PortKind::Sampling => format!(
                    "sampling refresh violation: {} not refreshed within {} ms at port `{port}` of {pid}",
                    ps.message,
                    us_to_ms(ps.refresh_us.unwrap_or(0))
                ),
                PortKind::Queuing => format!(
                    "queuing overflow: {} arrived at full port `{port}` (capacity {}) of {pid}",
                    ps.message,
                    ps.capacity.unwrap_or(0)
                ),
            };
        }
    }
    if loc == "miss" {
        if let Some((pid, tid)) = automaton.split_once('.') {
            return format!("deadline miss: task {tid} of {pid}");
        }
    }
    if loc == "overflow" {
        return format!("latency stage `{automaton}` overflowed");
    }
    format!("{automaton} reached error location {loc}")
}

/// Discrete steps of a trace with their time and the automata that moved.
pub fn compact_trace(ts: &dyn TransitionSystem, trace: &Trace, quantum_us: u64) -> Vec<String> {
    let mut out = Vec::new();
    let mut time = 0u64;
    let mut prev = ts.locations(&trace.initial);
    for (label, s) in &trace.steps {
        if let Label::Delay(d) = label {
            time += *d as u64;
            continue;
        }
        let locs = ts.locations(s);
        let moved: Vec<String> = prev
            .iter()
            .zip(&locs)
            .filter(|(a, b)| a.1 != b.1)
            .map(|(a, b)| format!("{}: {}→{}", a.0, a.1, b.1))
            .collect();
        out.push(format!(
            "t={}ms {} [{}]",
            us_to_ms(time * quantum_us),
            label.display(ts.alphabet()),
            moved.join(", ")
        ));
        prev = locs;
    }
    out
}

/// Combine obligation rows and certificates by the assume-guarantee rule.
pub fn deduce(
    system: &str,
    quantum_us: u64,
    obligations: &[PartitionObligation],
    rows: Vec<PartitionRow>,
    certificates: Vec<CertificateRecord>,
) -> AnalysisReport {
    let mut log = vec![ProofStep::Decompose {
        partitions: obligations.iter().map(|o| o.partition.clone()).collect(),
    }];
    for c in &certificates {
        log.push(ProofStep::Certificate {
            sender: c.sender.clone(),
            message: c.message.clone(),
            holds: c.holds,
        });
    }
    let cert_holds = |m: &str| certificates.iter().any(|c| c.message == m && c.holds);
    let mut explanation = Vec::new();
    let mut schedulable = true;
    for ob in obligations {
        let mut by_sender: BTreeMap<&str, Vec<String>> = BTreeMap::new();
        for m in &ob.required_inputs {
            by_sender.entry(ob.senders[m].as_str()).or_default().push(m.clone());
        }
        let mut env_ok = true;
        for (sender, msgs) in &by_sender {
            let holds = msgs.iter().all(|m| cert_holds(m));
            env_ok &= holds;
            log.push(ProofStep::ComposeAbstractions {
                sender: sender.to_string(),
                receiver: ob.partition.clone(),
                messages: msgs.clone(),
                holds,
            });
        }
        log.push(ProofStep::ComposeSystem {
            receiver: ob.partition.clone(),
            abstractions: ob.required_inputs.clone(),
            holds: env_ok,
        });
        let row = rows.iter().find(|r| r.partition == ob.partition);
        let safe = row.is_some_and(|r| r.verdict == RowVerdict::Safe);
        log.push(ProofStep::Obligation {
            partition: ob.partition.clone(),
            holds: safe,
        });
        log.push(ProofStep::Preservation {
            partition: ob.partition.clone(),
            holds: safe && env_ok,
        });
        if !safe {
            let why = match row {
                Some(r) if r.verdict == RowVerdict::LimitExceeded => "exceeded its exploration budget".to_owned(),
                Some(r) => format!("is unsafe under its interfaces: {}", r.violation.as_deref().unwrap_or("error reachable")),
                None => "was not checked".to_owned(),
            };
            explanation.push(format!("partition {} {why}", ob.partition));
        }
        schedulable &= safe && env_ok;
    }
    for c in &certificates {
        if !c.holds {
            explanation.push(format!(
                "interface of {} from {} is not certified{}",
                c.message,
                c.sender,
                c.failure.as_deref().map(|f| format!(": {f}")).unwrap_or_default()
            ));
        }
    }
    log.push(ProofStep::Conclude { schedulable });
    if schedulable {
        explanation.push("every partition is safe under certified interfaces".into());
    } else {
        explanation.push("the compositional rule is sufficient only; the system may still be schedulable".into());
    }
    AnalysisReport {
        system: system.to_owned(),
        quantum_us,
        rows,
        certificates,
        proof_log: log,
        global: None,
        verdict: if schedulable { SystemVerdict::Schedulable } else { SystemVerdict::NotConcluded },
        explanation,
    }
}

fn install_certificates(obligations: &mut [PartitionObligation], certs: &[CertificateRecord]) {
    for ob in obligations {
        for env in &mut ob.environment {
            if let Some(c) = certs.iter().find(|c| c.message == env.message && c.holds) {
                *env = c.params.clone();
            }
        }
    }
}

fn analyze(cfg: &SystemConfig, settings: &AnalysisSettings, only: Option<&str>) -> Result<AnalysisReport, ComposeError> {
    let cfg = effective_config(cfg, settings);
    let mut obligations = decompose(&cfg)?;
    if let Some(pid) = only {
        cfg.partition(pid)?;
        obligations.retain(|o| o.partition == pid);
    }
    let mut wanted = BTreeMap::new();
    for ob in &obligations {
        for env in &ob.environment {
            wanted.insert(env.message.clone(), (ob.senders[&env.message].clone(), env.clone()));
        }
    }
    let certs = synthesize_interfaces(&cfg, &wanted, settings)?;
    install_certificates(&mut obligations, &certs);
    let rows = parallel_map(&obligations, settings.jobs, |ob| obligation_row(&cfg, ob, &settings.limits));
    let rows = rows.into_iter().collect::<Result<Vec<_>, _>>()?;
    let mut report = deduce(&cfg.name, cfg.quantum_us, &obligations, rows, certs);
    if only.is_none() && !report.is_schedulable() {
        if let Some(budget) = &settings.global_budget {
            let g = check_global(&cfg, budget)?;
            report.explanation.push(match g.verdict {
                RowVerdict::Unsafe => format!(
                    "global check confirms the violation: {}",
                    g.violation.as_deref().unwrap_or("error reachable")
                ),
                RowVerdict::Safe => "global check finds no reachable error".into(),
                RowVerdict::LimitExceeded => "global check exceeded its budget".into(),
            });
            report.global = Some(g);
        }
    }
    Ok(report)
}

/// Decompose, synthesize interfaces, check every obligation and deduce.
pub fn analyze_system(cfg: &SystemConfig, settings: &AnalysisSettings) -> Result<AnalysisReport, ComposeError> {
    analyze(cfg, settings, None)
}

/// Synthesize the interfaces `partition` depends on and check its obligation.
pub fn analyze_partition(cfg: &SystemConfig, partition: &str, settings: &AnalysisSettings) -> Result<AnalysisReport, ComposeError> {
    analyze(cfg, settings, Some(partition))
}

/// Certificates for every message some partition receives.
pub fn synthesize_all(cfg: &SystemConfig, settings: &AnalysisSettings) -> Result<Vec<CertificateRecord>, ComposeError> {
    let cfg = effective_config(cfg, settings);
    let obligations = decompose(&cfg)?;
    let mut wanted = BTreeMap::new();
    for ob in &obligations {
        for env in &ob.environment {
            wanted.insert(env.message.clone(), (ob.senders[&env.message].clone(), env.clone()));
        }
    }
    synthesize_interfaces(&cfg, &wanted, settings)
}
