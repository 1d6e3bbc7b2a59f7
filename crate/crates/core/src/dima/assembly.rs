//! Assembling built automata into partition and system networks.

use std::sync::Arc;

use super::comm::{build_comm_chain, build_link, build_receiver};
use super::config::{ConfigError, PartitionSpec, PortDirection, SystemConfig};
use super::ports::build_port_monitor;
use super::scheduler::build_task_scheduler;
use super::supply::build_partition_supply;
use super::task::{build_resource, build_task};
use crate::model::Automaton;
use crate::semantics::{semantics_of, Composite, SemanticsError, TransitionSystem};

/// Supply, scheduler, tasks and resources of one partition.
pub fn partition_core(cfg: &SystemConfig, partition: &PartitionSpec, quantum_us: u64) -> Result<Vec<Automaton>, ConfigError> {
    let mut out = vec![
        build_partition_supply(partition, cfg.major_frame_us, quantum_us)?,
        build_task_scheduler(partition, quantum_us),
    ];
    for t in &partition.tasks {
        out.push(build_task(partition, t, quantum_us)?);
    }
    for r in partition.resources() {
        out.push(build_resource(partition, r, quantum_us));
    }
    Ok(out)
}

/// Monitors of every destination port of `partition`.
pub fn port_monitors(partition: &PartitionSpec, quantum_us: u64) -> Result<Vec<Automaton>, ConfigError> {
    partition
        .ports
        .iter()
        .filter(|p| p.direction == PortDirection::Destination)
        .map(|p| build_port_monitor(p, quantum_us))
        .collect()
}

/// Latency chains that deliver into `partition` (receive stacks for this
/// destination only) together with its port monitors. The inbound messages
/// themselves are left as open inputs.
pub fn inbound_network(cfg: &SystemConfig, partition: &PartitionSpec, quantum_us: u64) -> Result<Vec<Automaton>, ConfigError> {
    let mut out = Vec::new();
    for m in partition.inbound_messages() {
        let vl = cfg
            .link_for(m)
            .ok_or_else(|| ConfigError::Invalid(format!("message `{m}` received by `{}` has no virtual link", partition.id)))?;
        out.extend(build_link(vl, quantum_us)?);
        out.push(build_receiver(vl, &partition.id, quantum_us)?);
    }
    out.extend(port_monitors(partition, quantum_us)?);
    Ok(out)
}

/// Every partition, chain and monitor of the system.
pub fn global_network(cfg: &SystemConfig, quantum_us: u64) -> Result<Vec<Automaton>, ConfigError> {
    let mut out = Vec::new();
    for p in &cfg.partitions {
        out.extend(partition_core(cfg, p, quantum_us)?);
    }
    for vl in &cfg.virtual_links {
        out.extend(build_comm_chain(vl, quantum_us)?);
    }
    for p in &cfg.partitions {
        out.extend(port_monitors(p, quantum_us)?);
    }
    Ok(out)
}

/// Give semantics to every automaton and compose them in order.
pub fn network_ts(name: &str, automata: &[Automaton], quantum_us: u64) -> Result<Composite, SemanticsError> {
    let parts = automata
        .iter()
        .map(|a| semantics_of(a, quantum_us).map(|t| Arc::new(t) as Arc<dyn TransitionSystem>))
        .collect::<Result<Vec<_>, _>>()?;
    Composite::with_name(name, parts)
}
