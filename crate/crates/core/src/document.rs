//! TOML model documents.
//!
//! A document either holds one or more `[[automaton]]` tables (a network of
//! automata run in parallel) or a `[system]` table together with the
//! `modules`, `partitions`, `schedule`, `tasks`, `ports` and `virtual-links`
//! sections describing a partitioned platform. The grammar is documented in
//! `docs/model-format.md`.

use std::collections::{BTreeMap, HashMap, HashSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;
use toml::Spanned;

use crate::dima::config::{
    ms_to_us, us_to_ms, Command, LatencyBounds, ModuleSpec, PartitionSpec, PortDirection, PortKind, PortSpec,
    ScheduleWindow, SystemConfig, TaskKind, TaskSpec, VirtualLinkSpec, DEFAULT_QUANTUM_US,
};
use crate::expr::{parse_constraint, parse_update, ExprError};
use crate::model::{
    validate_network, ActionDecl, ActionKind, Automaton, Constraint, Diagnostic, Direction, Edge, Location, SyncRef,
    Update, VarDecl,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParseError {
    #[error("line {line}, column {column}: {message}")]
    Syntax { line: usize, column: usize, message: String },
    #[error("invalid model: {}", join(.0))]
    Semantic(Vec<Diagnostic>),
    #[error("invalid system configuration: {}", .0.join("; "))]
    Config(Vec<String>),
}

fn join(d: &[Diagnostic]) -> String {
    d.iter().map(|d| d.to_string()).collect::<Vec<_>>().join("; ")
}

#[derive(Debug, Clone, PartialEq)]
pub enum Document {
    Automata(Vec<Automaton>),
    System(SystemConfig),
}

fn line_col(src: &str, offset: usize) -> (usize, usize) {
    let offset = offset.min(src.len());
    let before = &src[..offset];
    let line = before.matches('\n').count() + 1;
    let col = before.rfind('\n').map(|p| offset - p).unwrap_or(offset + 1);
    (line, col)
}

fn syntax_at(src: &str, offset: usize, message: impl Into<String>) -> ParseError {
    let (line, column) = line_col(src, offset);
    ParseError::Syntax {
        line,
        column,
        message: message.into(),
    }
}

fn expr_error(src: &str, spanned: &Spanned<String>, e: ExprError, what: &str) -> ParseError {
    // the span covers the opening quote
    let offset = spanned.span().start + e.column;
    syntax_at(src, offset, format!("{what}: {}", e.message))
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
struct RawDocument {
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    automaton: Vec<RawAutomaton>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    system: Option<RawSystem>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    modules: Vec<ModuleSpec>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    partitions: Vec<RawPartition>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    schedule: Vec<RawWindow>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    tasks: Vec<RawTask>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    ports: Vec<RawPort>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    virtual_links: Vec<RawLink>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
struct RawAutomaton {
    name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    time_unit_ms: Option<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    clocks: Vec<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    vars: Vec<RawVar>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    actions: Vec<RawAction>,
    locations: Vec<RawLocation>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    edges: Vec<RawEdge>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawVar {
    name: String,
    range: [i64; 2],
    #[serde(default, skip_serializing_if = "Option::is_none")]
    init: Option<i64>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawAction {
    name: String,
    kind: ActionKind,
    dir: Direction,
}

fn is_false(b: &bool) -> bool {
    !*b
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawLocation {
    name: String,
    #[serde(default, skip_serializing_if = "is_false")]
    initial: bool,
    #[serde(default, skip_serializing_if = "is_false")]
    error: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    invariant: Option<Spanned<String>>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    rate: BTreeMap<String, u8>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawEdge {
    from: String,
    to: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    guard: Option<Spanned<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    sync: Option<Spanned<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    update: Option<Spanned<String>>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
struct RawSystem {
    name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    time_quantum_ms: Option<f64>,
    major_frame_ms: f64,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
struct RawPartition {
    id: String,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
struct RawWindow {
    partition: String,
    offset_ms: f64,
    duration_ms: f64,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(untagged)]
enum RawCompute {
    Fixed(f64),
    Range([f64; 2]),
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", deny_unknown_fields)]
enum RawCommand {
    Compute(RawCompute),
    Lock(String),
    Unlock(String),
    Send(String),
    Receive(String),
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
struct RawTask {
    id: String,
    partition: String,
    kind: TaskKind,
    period_ms: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    deadline_ms: Option<f64>,
    priority: i64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    offset_ms: Option<f64>,
    commands: Vec<RawCommand>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
struct RawPort {
    name: String,
    partition: String,
    kind: PortKind,
    direction: PortDirection,
    message: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    refresh_ms: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    capacity: Option<u32>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
struct RawLink {
    id: String,
    message: String,
    source: String,
    destinations: Vec<String>,
    tx_udpip_ms: [f64; 2],
    vl_transit_ms: [f64; 2],
    rx_udpip_ms: [f64; 2],
    #[serde(default, skip_serializing_if = "Option::is_none")]
    stage_capacity: Option<u32>,
}

fn parse_raw(src: &str) -> Result<RawDocument, ParseError> {
    toml::from_str::<RawDocument>(src).map_err(|e| {
        let offset = e.span().map(|s| s.start).unwrap_or(0);
        syntax_at(src, offset, e.message().to_owned())
    })
}

/// Parse a model document. Automata are validated, system configurations are
/// checked for structural consistency.
pub fn parse_document(src: &str) -> Result<Document, ParseError> {
    let raw = parse_raw(src)?;
    let has_system = raw.system.is_some();
    if has_system && !raw.automaton.is_empty() {
        return Err(syntax_at(src, 0, "a document holds either automata or a system, not both"));
    }
    if has_system {
        return convert_system(src, raw).map(Document::System);
    }
    if raw.automaton.is_empty() {
        return Err(syntax_at(src, 0, "document declares neither `automaton` nor `system`"));
    }
    if !(raw.modules.is_empty()
        && raw.partitions.is_empty()
        && raw.schedule.is_empty()
        && raw.tasks.is_empty()
        && raw.ports.is_empty()
        && raw.virtual_links.is_empty())
    {
        return Err(syntax_at(src, 0, "system sections require a `[system]` table"));
    }
    let automata = raw
        .automaton
        .into_iter()
        .map(|a| convert_automaton(src, a))
        .collect::<Result<Vec<_>, _>>()?;
    let diags = validate_network(&automata);
    if !diags.is_empty() {
        return Err(ParseError::Semantic(diags));
    }
    Ok(Document::Automata(automata))
}

pub fn parse_automata(src: &str) -> Result<Vec<Automaton>, ParseError> {
    match parse_document(src)? {
        Document::Automata(a) => Ok(a),
        Document::System(_) => Err(syntax_at(src, 0, "expected automata, found a system configuration")),
    }
}

pub fn parse_system(src: &str) -> Result<SystemConfig, ParseError> {
    match parse_document(src)? {
        Document::System(s) => Ok(s),
        Document::Automata(_) => Err(syntax_at(src, 0, "expected a system configuration, found automata")),
    }
}

fn convert_automaton(src: &str, raw: RawAutomaton) -> Result<Automaton, ParseError> {
    let mut a = Automaton::new(raw.name);
    a.time_unit_us = match raw.time_unit_ms {
        None => None,
        Some(ms) => match ms_to_us(ms) {
            Some(us) if us > 0 => Some(us),
            _ => return Err(syntax_at(src, 0, format!("time-unit-ms = {ms} is not a positive whole number of microseconds"))),
        },
    };
    a.clocks = raw.clocks;
    a.vars = raw
        .vars
        .into_iter()
        .map(|v| VarDecl {
            init: v.init.unwrap_or(v.range[0]),
            name: v.name,
            lo: v.range[0],
            hi: v.range[1],
        })
        .collect();
    a.actions = raw
        .actions
        .into_iter()
        .map(|r| ActionDecl {
            name: r.name,
            kind: r.kind,
            dir: r.dir,
        })
        .collect();
    let mut initial = Vec::new();
    for l in raw.locations {
        let invariant = match &l.invariant {
            None => Constraint::tt(),
            Some(s) => parse_constraint(s.get_ref()).map_err(|e| expr_error(src, s, e, "invariant"))?,
        };
        if l.initial {
            initial.push(l.name.clone());
        }
        a.locations.push(Location {
            name: l.name,
            invariant,
            rates: l.rate,
            error: l.error,
        });
    }
    a.initial = match initial.len() {
        0 => a.locations.first().map(|l| l.name.clone()).unwrap_or_default(),
        1 => initial.pop().unwrap(),
        _ => return Err(syntax_at(src, 0, format!("automaton `{}` marks more than one initial location", a.name))),
    };
    for e in raw.edges {
        let guard = match &e.guard {
            None => Constraint::tt(),
            Some(s) => parse_constraint(s.get_ref()).map_err(|err| expr_error(src, s, err, "guard"))?,
        };
        let update = match &e.update {
            None => Update::none(),
            Some(s) => parse_update(s.get_ref()).map_err(|err| expr_error(src, s, err, "update"))?,
        };
        let sync = match &e.sync {
            None => None,
            Some(s) => Some(parse_sync(s.get_ref()).ok_or_else(|| {
                syntax_at(src, s.span().start, format!("sync `{}` must be `name!` or `name?`", s.get_ref()))
            })?),
        };
        a.edges.push(Edge {
            from: e.from,
            to: e.to,
            guard,
            sync,
            update,
        });
    }
    Ok(a)
}

fn parse_sync(s: &str) -> Option<SyncRef> {
    let s = s.trim();
    let (name, dir) = if let Some(n) = s.strip_suffix('!') {
        (n, Direction::Output)
    } else {
        let n = s.strip_suffix('?')?;
        (n, Direction::Input)
    };
    let name = name.trim();
    let ok = !name.is_empty() && name.chars().all(|c| c.is_alphanumeric() || c == '_' || c == '.');
    ok.then(|| SyncRef {
        action: name.to_owned(),
        dir,
    })
}

fn convert_system(src: &str, raw: RawDocument) -> Result<SystemConfig, ParseError> {
    let header = raw.system.expect("checked by caller");
    let mut errs = Vec::new();
    let us = |what: String, ms: f64, errs: &mut Vec<String>| -> u64 {
        ms_to_us(ms).unwrap_or_else(|| {
            errs.push(format!("{what} = {ms}ms is not a non-negative whole number of microseconds"));
            0
        })
    };
    let quantum_us = match header.time_quantum_ms {
        None => DEFAULT_QUANTUM_US,
        Some(ms) => us("time-quantum-ms".into(), ms, &mut errs),
    };
    let major_frame_us = us("major-frame-ms".into(), header.major_frame_ms, &mut errs);

    let mut seen = HashSet::new();
    let mut partitions: Vec<PartitionSpec> = Vec::new();
    for p in raw.partitions {
        if !seen.insert(p.id.clone()) {
            return Err(ParseError::Config(vec![format!("partition `{}` declared twice", p.id)]));
        }
        partitions.push(PartitionSpec {
            id: p.id,
            windows: Vec::new(),
            tasks: Vec::new(),
            ports: Vec::new(),
        });
    }
    let index: HashMap<String, usize> = partitions.iter().enumerate().map(|(i, p)| (p.id.clone(), i)).collect();
    let lookup = |id: &str, what: &str, errs: &mut Vec<String>| -> Option<usize> {
        let r = index.get(id).copied();
        if r.is_none() {
            errs.push(format!("{what} refers to unknown partition `{id}`"));
        }
        r
    };

    for w in raw.schedule {
        let offset_us = us(format!("window offset of {}", w.partition), w.offset_ms, &mut errs);
        let duration_us = us(format!("window duration of {}", w.partition), w.duration_ms, &mut errs);
        if let Some(i) = lookup(&w.partition, "schedule window", &mut errs) {
            partitions[i].windows.push(ScheduleWindow {
                partition: w.partition,
                offset_us,
                duration_us,
            });
        }
    }
    for p in &mut partitions {
        p.windows.sort_by_key(|w| w.offset_us);
    }
    for t in raw.tasks {
        let period_us = us(format!("period of {}", t.id), t.period_ms, &mut errs);
        let deadline_us = match t.deadline_ms {
            None => period_us,
            Some(d) => us(format!("deadline of {}", t.id), d, &mut errs),
        };
        let offset_us = us(format!("offset of {}", t.id), t.offset_ms.unwrap_or(0.0), &mut errs);
        let mut commands = Vec::new();
        for c in t.commands {
            commands.push(match c {
                RawCommand::Compute(RawCompute::Fixed(c)) => {
                    let c = us(format!("compute time of {}", t.id), c, &mut errs);
                    Command::Compute { bcet_us: c, wcet_us: c }
                }
                RawCommand::Compute(RawCompute::Range([b, w])) => Command::Compute {
                    bcet_us: us(format!("bcet of {}", t.id), b, &mut errs),
                    wcet_us: us(format!("wcet of {}", t.id), w, &mut errs),
                },
                RawCommand::Lock(r) => Command::Lock(r),
                RawCommand::Unlock(r) => Command::Unlock(r),
                RawCommand::Send(p) => Command::Send(p),
                RawCommand::Receive(p) => Command::Receive(p),
            });
        }
        if let Some(i) = lookup(&t.partition, &format!("task `{}`", t.id), &mut errs) {
            partitions[i].tasks.push(TaskSpec {
                id: t.id,
                partition: t.partition,
                kind: t.kind,
                period_us,
                deadline_us,
                priority: t.priority,
                offset_us,
                commands,
            });
        }
    }
    for p in raw.ports {
        let refresh_us = p.refresh_ms.map(|r| us(format!("refresh period of {}", p.name), r, &mut errs));
        if let Some(i) = lookup(&p.partition, &format!("port `{}`", p.name), &mut errs) {
            partitions[i].ports.push(PortSpec {
                name: p.name,
                partition: p.partition,
                kind: p.kind,
                direction: p.direction,
                message: p.message,
                refresh_us,
                capacity: p.capacity,
            });
        }
    }
    for p in &mut partitions {
        p.ports.sort_by(|a, b| a.name.cmp(&b.name));
    }
    let mut virtual_links = Vec::new();
    for v in raw.virtual_links {
        let bounds = |what: &str, r: [f64; 2], errs: &mut Vec<String>| LatencyBounds {
            min_us: us(format!("{what} min of {}", v.id), r[0], errs),
            max_us: us(format!("{what} max of {}", v.id), r[1], errs),
        };
        let tx_udpip = bounds("tx-udpip", v.tx_udpip_ms, &mut errs);
        let vl_transit = bounds("vl-transit", v.vl_transit_ms, &mut errs);
        let rx_udpip = bounds("rx-udpip", v.rx_udpip_ms, &mut errs);
        virtual_links.push(VirtualLinkSpec {
            id: v.id,
            message: v.message,
            source: v.source,
            destinations: v.destinations,
            tx_udpip,
            vl_transit,
            rx_udpip,
            stage_capacity: v.stage_capacity.unwrap_or(2),
        });
    }
    virtual_links.sort_by(|a, b| a.id.cmp(&b.id));
    let mut modules = raw.modules;
    modules.sort_by(|a, b| a.id.cmp(&b.id));

    let cfg = SystemConfig {
        name: header.name,
        quantum_us,
        major_frame_us,
        modules,
        partitions,
        virtual_links,
    };
    errs.extend(cfg.validate());
    if !errs.is_empty() {
        let _ = src;
        return Err(ParseError::Config(errs));
    }
    Ok(cfg)
}

fn spanned(s: String) -> Spanned<String> {
    Spanned::new(0..0, s)
}

fn raw_automaton(a: &Automaton) -> RawAutomaton {
    RawAutomaton {
        name: a.name.clone(),
        time_unit_ms: a.time_unit_us.map(us_to_ms),
        clocks: a.clocks.clone(),
        vars: a
            .vars
            .iter()
            .map(|v| RawVar {
                name: v.name.clone(),
                range: [v.lo, v.hi],
                init: (v.init != v.lo).then_some(v.init),
            })
            .collect(),
        actions: a
            .actions
            .iter()
            .map(|d| RawAction {
                name: d.name.clone(),
                kind: d.kind,
                dir: d.dir,
            })
            .collect(),
        locations: a
            .locations
            .iter()
            .map(|l| RawLocation {
                name: l.name.clone(),
                initial: l.name == a.initial,
                error: l.error,
                invariant: (!l.invariant.is_true()).then(|| spanned(l.invariant.to_string())),
                rate: l.rates.clone(),
            })
            .collect(),
        edges: a
            .edges
            .iter()
            .map(|e| RawEdge {
                from: e.from.clone(),
                to: e.to.clone(),
                guard: (!e.guard.is_true()).then(|| spanned(e.guard.to_string())),
                sync: e.sync.as_ref().map(|s| spanned(s.to_string())),
                update: (!e.update.is_empty()).then(|| spanned(e.update.to_string())),
            })
            .collect(),
    }
}

/// Serialise automata into a document that [`parse_automata`] reads back.
pub fn automata_to_toml(automata: &[Automaton]) -> String {
    let doc = RawDocument {
        automaton: automata.iter().map(raw_automaton).collect(),
        ..RawDocument::default()
    };
    toml::to_string(&doc).expect("automaton documents always serialise")
}

/// Serialise a system configuration into a document that [`parse_system`] reads back.
pub fn system_to_toml(cfg: &SystemConfig) -> String {
    let ms = us_to_ms;
    let mut doc = RawDocument {
        system: Some(RawSystem {
            name: cfg.name.clone(),
            time_quantum_ms: Some(ms(cfg.quantum_us)),
            major_frame_ms: ms(cfg.major_frame_us),
        }),
        modules: cfg.modules.clone(),
        ..RawDocument::default()
    };
    for p in &cfg.partitions {
        doc.partitions.push(RawPartition { id: p.id.clone() });
        for w in &p.windows {
            doc.schedule.push(RawWindow {
                partition: p.id.clone(),
                offset_ms: ms(w.offset_us),
                duration_ms: ms(w.duration_us),
            });
        }
        for t in &p.tasks {
            doc.tasks.push(RawTask {
                id: t.id.clone(),
                partition: p.id.clone(),
                kind: t.kind,
                period_ms: ms(t.period_us),
                deadline_ms: Some(ms(t.deadline_us)),
                priority: t.priority,
                offset_ms: Some(ms(t.offset_us)),
                commands: t
                    .commands
                    .iter()
                    .map(|c| match c {
                        Command::Compute { bcet_us, wcet_us } => {
                            RawCommand::Compute(RawCompute::Range([ms(*bcet_us), ms(*wcet_us)]))
                        }
                        Command::Lock(r) => RawCommand::Lock(r.clone()),
                        Command::Unlock(r) => RawCommand::Unlock(r.clone()),
                        Command::Send(p) => RawCommand::Send(p.clone()),
                        Command::Receive(p) => RawCommand::Receive(p.clone()),
                    })
                    .collect(),
            });
        }
        for port in &p.ports {
            doc.ports.push(RawPort {
                name: port.name.clone(),
                partition: p.id.clone(),
                kind: port.kind,
                direction: port.direction,
                message: port.message.clone(),
                refresh_ms: port.refresh_us.map(ms),
                capacity: port.capacity,
            });
        }
    }
    for v in &cfg.virtual_links {
        doc.virtual_links.push(RawLink {
            id: v.id.clone(),
            message: v.message.clone(),
            source: v.source.clone(),
            destinations: v.destinations.clone(),
            tx_udpip_ms: [ms(v.tx_udpip.min_us), ms(v.tx_udpip.max_us)],
            vl_transit_ms: [ms(v.vl_transit.min_us), ms(v.vl_transit.max_us)],
            rx_udpip_ms: [ms(v.rx_udpip.min_us), ms(v.rx_udpip.max_us)],
            stage_capacity: Some(v.stage_capacity),
        });
    }
    toml::to_string(&doc).expect("system documents always serialise")
}
