//! System configuration of a distributed partitioned avionics platform.
//!
//! All durations are stored in microseconds. Model construction converts
//! them to analysis quanta and rejects values that are not a whole number of
//! quanta.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const DEFAULT_QUANTUM_US: u64 = 100;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ConfigError {
    #[error("{0}")]
    Invalid(String),
    #[error("{what} = {value_us}us is not a multiple of the {quantum_us}us quantum")]
    QuantumMismatch {
        what: String,
        value_us: u64,
        quantum_us: u64,
    },
    #[error("unknown partition `{0}`")]
    UnknownPartition(String),
}

/// Convert a duration to analysis quanta.
pub fn to_quanta(what: &str, value_us: u64, quantum_us: u64) -> Result<i64, ConfigError> {
    if quantum_us == 0 || !value_us.is_multiple_of(quantum_us) {
        return Err(ConfigError::QuantumMismatch {
            what: what.to_owned(),
            value_us,
            quantum_us,
        });
    }
    Ok((value_us / quantum_us) as i64)
}

/// Parse a millisecond value (as written in configuration files) into microseconds.
pub fn ms_to_us(ms: f64) -> Option<u64> {
    if !ms.is_finite() || !(0.0..=1.0e9).contains(&ms) {
        return None;
    }
    let us = ms * 1000.0;
    let rounded = us.round();
    ((us - rounded).abs() < 1e-6).then_some(rounded as u64)
}

pub fn us_to_ms(us: u64) -> f64 {
    us as f64 / 1000.0
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScheduleWindow {
    pub partition: String,
    pub offset_us: u64,
    pub duration_us: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TaskKind {
    Periodic,
    Sporadic,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum Command {
    Compute { bcet_us: u64, wcet_us: u64 },
    Lock(String),
    Unlock(String),
    Send(String),
    Receive(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TaskSpec {
    pub id: String,
    pub partition: String,
    pub kind: TaskKind,
    /// Period for periodic tasks, minimum inter-release separation for sporadic ones.
    pub period_us: u64,
    pub deadline_us: u64,
    /// Larger value means higher priority.
    pub priority: i64,
    pub offset_us: u64,
    pub commands: Vec<Command>,
}

impl TaskSpec {
    pub fn sends(&self) -> impl Iterator<Item = &str> {
        self.commands.iter().filter_map(|c| match c {
            Command::Send(p) => Some(p.as_str()),
            _ => None,
        })
    }

    pub fn receives(&self) -> impl Iterator<Item = &str> {
        self.commands.iter().filter_map(|c| match c {
            Command::Receive(p) => Some(p.as_str()),
            _ => None,
        })
    }

    pub fn resources(&self) -> BTreeSet<&str> {
        self.commands
            .iter()
            .filter_map(|c| match c {
                Command::Lock(r) | Command::Unlock(r) => Some(r.as_str()),
                _ => None,
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PortKind {
    Sampling,
    Queuing,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PortDirection {
    Source,
    Destination,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PortSpec {
    pub name: String,
    pub partition: String,
    pub kind: PortKind,
    pub direction: PortDirection,
    pub message: String,
    pub refresh_us: Option<u64>,
    pub capacity: Option<u32>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LatencyBounds {
    pub min_us: u64,
    pub max_us: u64,
}

impl LatencyBounds {
    pub fn new(min_us: u64, max_us: u64) -> Self {
        LatencyBounds { min_us, max_us }
    }

    pub fn fixed(us: u64) -> Self {
        LatencyBounds::new(us, us)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VirtualLinkSpec {
    pub id: String,
    pub message: String,
    pub source: String,
    pub destinations: Vec<String>,
    pub tx_udpip: LatencyBounds,
    pub vl_transit: LatencyBounds,
    pub rx_udpip: LatencyBounds,
    /// Messages each latency stage can hold at once.
    pub stage_capacity: u32,
}

impl VirtualLinkSpec {
    pub fn end_to_end(&self) -> LatencyBounds {
        LatencyBounds {
            min_us: self.tx_udpip.min_us + self.vl_transit.min_us + self.rx_udpip.min_us,
            max_us: self.tx_udpip.max_us + self.vl_transit.max_us + self.rx_udpip.max_us,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModuleSpec {
    pub id: String,
    pub partitions: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PartitionSpec {
    pub id: String,
    pub windows: Vec<ScheduleWindow>,
    pub tasks: Vec<TaskSpec>,
    pub ports: Vec<PortSpec>,
}

impl PartitionSpec {
    pub fn port(&self, name: &str) -> Option<&PortSpec> {
        self.ports.iter().find(|p| p.name == name)
    }

    pub fn resources(&self) -> BTreeSet<&str> {
        self.tasks.iter().flat_map(|t| t.resources()).collect()
    }

    pub fn inbound_messages(&self) -> BTreeSet<&str> {
        self.ports
            .iter()
            .filter(|p| p.direction == PortDirection::Destination)
            .map(|p| p.message.as_str())
            .collect()
    }

    pub fn outbound_messages(&self) -> BTreeSet<&str> {
        self.ports
            .iter()
            .filter(|p| p.direction == PortDirection::Source)
            .map(|p| p.message.as_str())
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SystemConfig {
    pub name: String,
    pub quantum_us: u64,
    pub major_frame_us: u64,
    pub modules: Vec<ModuleSpec>,
    pub partitions: Vec<PartitionSpec>,
    pub virtual_links: Vec<VirtualLinkSpec>,
}

impl SystemConfig {
    pub fn partition(&self, id: &str) -> Result<&PartitionSpec, ConfigError> {
        self.partitions
            .iter()
            .find(|p| p.id == id)
            .ok_or_else(|| ConfigError::UnknownPartition(id.to_owned()))
    }

    pub fn link_for(&self, message: &str) -> Option<&VirtualLinkSpec> {
        self.virtual_links.iter().find(|v| v.message == message)
    }

    pub fn module_of(&self, partition: &str) -> Option<&ModuleSpec> {
        self.modules
            .iter()
            .find(|m| m.partitions.iter().any(|p| p == partition))
    }

    pub fn task_count(&self) -> usize {
        self.partitions.iter().map(|p| p.tasks.len()).sum()
    }

    /// The task that emits `message`, with its partition.
    pub fn sender_of(&self, message: &str) -> Option<(&PartitionSpec, &TaskSpec)> {
        for p in &self.partitions {
            for t in &p.tasks {
                for port in t.sends() {
                    if p.port(port).is_some_and(|ps| ps.message == message) {
                        return Some((p, t));
                    }
                }
            }
        }
        None
    }

    /// Swap the schedule windows of two partitions.
    pub fn swap_windows(&mut self, a: &str, b: &str) -> Result<(), ConfigError> {
        let ia = self.partitions.iter().position(|p| p.id == a).ok_or_else(|| ConfigError::UnknownPartition(a.into()))?;
        let ib = self.partitions.iter().position(|p| p.id == b).ok_or_else(|| ConfigError::UnknownPartition(b.into()))?;
        let wa = std::mem::take(&mut self.partitions[ia].windows);
        let wb = std::mem::take(&mut self.partitions[ib].windows);
        self.partitions[ia].windows = wb
            .into_iter()
            .map(|w| ScheduleWindow { partition: a.to_owned(), ..w })
            .collect();
        self.partitions[ib].windows = wa
            .into_iter()
            .map(|w| ScheduleWindow { partition: b.to_owned(), ..w })
            .collect();
        Ok(())
    }

    /// Check every structural constraint. Returns all problems found.
    pub fn validate(&self) -> Vec<String> {
        let mut errs = Vec::new();
        let q = self.quantum_us;
        if q == 0 {
            errs.push("time quantum must be positive".to_owned());
            return errs;
        }
        let check_q = |what: String, v: u64, errs: &mut Vec<String>| {
            if !v.is_multiple_of(q) {
                errs.push(format!("{what} = {v}us is not a multiple of the {q}us quantum"));
            }
        };
        if self.major_frame_us == 0 {
            errs.push("major frame must be positive".into());
        }
        check_q("major frame".into(), self.major_frame_us, &mut errs);

        let mut ids = HashSet::new();
        for p in &self.partitions {
            if !ids.insert(p.id.as_str()) {
                errs.push(format!("partition `{}` declared twice", p.id));
            }
        }
        let mut placed: HashMap<&str, &str> = HashMap::new();
        for m in &self.modules {
            for p in &m.partitions {
                if !ids.contains(p.as_str()) {
                    errs.push(format!("module `{}` hosts unknown partition `{p}`", m.id));
                }
                if let Some(prev) = placed.insert(p.as_str(), m.id.as_str()) {
                    errs.push(format!("partition `{p}` placed on both `{prev}` and `{}`", m.id));
                }
            }
        }

        // windows per module must be disjoint
        let mut per_module: BTreeMap<&str, Vec<&ScheduleWindow>> = BTreeMap::new();
        for p in &self.partitions {
            for w in &p.windows {
                check_q(format!("window offset of {}", p.id), w.offset_us, &mut errs);
                check_q(format!("window duration of {}", p.id), w.duration_us, &mut errs);
                if w.duration_us == 0 {
                    errs.push(format!("empty window for `{}`", p.id));
                }
                if w.offset_us + w.duration_us > self.major_frame_us {
                    errs.push(format!("window of `{}` exceeds the major frame", p.id));
                }
                let module = placed.get(p.id.as_str()).copied().unwrap_or(p.id.as_str());
                per_module.entry(module).or_default().push(w);
            }
        }
        for (module, mut ws) in per_module {
            ws.sort_by_key(|w| w.offset_us);
            for pair in ws.windows(2) {
                if pair[0].offset_us + pair[0].duration_us > pair[1].offset_us {
                    errs.push(format!(
                        "windows of `{}` and `{}` overlap on `{module}`",
                        pair[0].partition, pair[1].partition
                    ));
                }
            }
        }

        for p in &self.partitions {
            let mut names = HashSet::new();
            for port in &p.ports {
                if !names.insert(port.name.as_str()) {
                    errs.push(format!("port `{}` declared twice in `{}`", port.name, p.id));
                }
                match port.kind {
                    PortKind::Sampling => match port.refresh_us {
                        Some(r) if r > 0 => check_q(format!("refresh period of {}", port.name), r, &mut errs),
                        _ => errs.push(format!("sampling port `{}` needs a positive refresh period", port.name)),
                    },
                    PortKind::Queuing => {
                        if port.capacity.unwrap_or(0) < 1 {
                            errs.push(format!("queuing port `{}` needs capacity >= 1", port.name));
                        }
                    }
                }
            }
            let mut tids = HashSet::new();
            for t in &p.tasks {
                if !tids.insert(t.id.as_str()) {
                    errs.push(format!("task `{}` declared twice", t.id));
                }
                if t.partition != p.id {
                    errs.push(format!("task `{}` listed under `{}` but names `{}`", t.id, p.id, t.partition));
                }
                if t.period_us == 0 {
                    errs.push(format!("task `{}` needs a positive period", t.id));
                }
                if t.deadline_us == 0 || t.deadline_us > t.period_us {
                    errs.push(format!("task `{}`: deadline must be in (0, period]", t.id));
                }
                check_q(format!("period of {}", t.id), t.period_us, &mut errs);
                check_q(format!("deadline of {}", t.id), t.deadline_us, &mut errs);
                check_q(format!("offset of {}", t.id), t.offset_us, &mut errs);
                let mut held: Vec<&str> = Vec::new();
                for c in &t.commands {
                    match c {
                        Command::Compute { bcet_us, wcet_us } => {
                            if bcet_us > wcet_us {
                                errs.push(format!("task `{}`: bcet exceeds wcet", t.id));
                            }
                            check_q(format!("bcet of {}", t.id), *bcet_us, &mut errs);
                            check_q(format!("wcet of {}", t.id), *wcet_us, &mut errs);
                        }
                        Command::Lock(r) => {
                            if held.contains(&r.as_str()) {
                                errs.push(format!("task `{}` locks `{r}` twice", t.id));
                            }
                            held.push(r);
                        }
                        Command::Unlock(r) => {
                            if held.last() != Some(&r.as_str()) {
                                errs.push(format!("task `{}`: unlock of `{r}` is not properly nested", t.id));
                            } else {
                                held.pop();
                            }
                        }
                        Command::Send(port) | Command::Receive(port) => {
                            let want = if matches!(c, Command::Send(_)) {
                                PortDirection::Source
                            } else {
                                PortDirection::Destination
                            };
                            match p.port(port) {
                                None => errs.push(format!("task `{}` uses undeclared port `{port}`", t.id)),
                                Some(ps) if ps.direction != want => errs.push(format!(
                                    "task `{}` uses port `{port}` against its direction",
                                    t.id
                                )),
                                Some(_) => {}
                            }
                        }
                    }
                }
                if !held.is_empty() {
                    errs.push(format!("task `{}` ends holding {:?}", t.id, held));
                }
            }
        }

        // routing
        let mut routed = HashSet::new();
        for vl in &self.virtual_links {
            if !routed.insert(vl.message.as_str()) {
                errs.push(format!("message `{}` routed by more than one virtual link", vl.message));
            }
            for (what, b) in [("tx-udpip", vl.tx_udpip), ("vl-transit", vl.vl_transit), ("rx-udpip", vl.rx_udpip)] {
                if b.min_us > b.max_us {
                    errs.push(format!("virtual link `{}`: {what} min exceeds max", vl.id));
                }
                check_q(format!("{what} min of {}", vl.id), b.min_us, &mut errs);
                check_q(format!("{what} max of {}", vl.id), b.max_us, &mut errs);
            }
            if vl.stage_capacity == 0 {
                errs.push(format!("virtual link `{}` needs stage capacity >= 1", vl.id));
            }
            match self.partitions.iter().find(|p| p.id == vl.source) {
                None => errs.push(format!("virtual link `{}` has unknown source `{}`", vl.id, vl.source)),
                Some(p) => {
                    if !p.outbound_messages().contains(vl.message.as_str()) {
                        errs.push(format!(
                            "virtual link `{}`: source `{}` has no source port for `{}`",
                            vl.id, vl.source, vl.message
                        ));
                    }
                }
            }
            for d in &vl.destinations {
                match self.partitions.iter().find(|p| &p.id == d) {
                    None => errs.push(format!("virtual link `{}` has unknown destination `{d}`", vl.id)),
                    Some(p) => {
                        if !p.inbound_messages().contains(vl.message.as_str()) {
                            errs.push(format!(
                                "message `{}` routed to `{d}` which declares no receiving port for it",
                                vl.message
                            ));
                        }
                    }
                }
            }
        }
        let mut senders: HashMap<&str, usize> = HashMap::new();
        for p in &self.partitions {
            for t in &p.tasks {
                for port in t.sends() {
                    if let Some(ps) = p.port(port) {
                        *senders.entry(ps.message.as_str()).or_default() += 1;
                    }
                }
            }
            for port in &p.ports {
                if port.direction == PortDirection::Destination {
                    match self.link_for(&port.message) {
                        None => errs.push(format!("message `{}` received by `{}` is not routed", port.message, p.id)),
                        Some(vl) if !vl.destinations.contains(&p.id) => errs.push(format!(
                            "message `{}` received by `{}` but its virtual link does not reach it",
                            port.message, p.id
                        )),
                        Some(_) => {}
                    }
                }
            }
        }
        for (m, n) in senders {
            if n > 1 {
                errs.push(format!("message `{m}` is sent by {n} tasks; one sender per message type"));
            }
        }
        errs
    }
}
