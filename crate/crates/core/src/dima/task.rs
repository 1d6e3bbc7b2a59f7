//! Periodic and sporadic task automata and the partition-local resources
//! they lock.
//!
//! A task owns two clocks: `r`, the wall clock of the current job used for
//! the deadline check, and `e`, the execution stopwatch that only runs while
//! the task holds the processor. A job walks through its command list; for
//! every command `k` there is a `wait_k` location (ready, not running) and a
//! `run_k` location (running). Reaching the end of the list reports
//! completion to the scheduler.

use super::config::{to_quanta, Command, ConfigError, PartitionSpec, TaskKind, TaskSpec};
use super::names;
use crate::model::{ActionKind, Automaton, CmpOp, Constraint, Direction, Edge, Location, Update};

pub fn build_task(partition: &PartitionSpec, task: &TaskSpec, quantum_us: u64) -> Result<Automaton, ConfigError> {
    let p = partition.id.as_str();
    let t = task.id.as_str();
    let q = |what: &str, v: u64| to_quanta(&format!("{what} of {t}"), v, quantum_us);
    let period = q("period", task.period_us)?;
    let deadline = q("deadline", task.deadline_us)?;
    let offset = q("offset", task.offset_us)?;
    if period == 0 || deadline == 0 || deadline > period {
        return Err(ConfigError::Invalid(format!("task `{t}` needs 0 < deadline <= period")));
    }

    let release = names::release(p, t);
    let finish = names::finish(p, t);
    let dispatch = names::dispatch(p, t);
    let preempt = names::preempt(p, t);

    let mut a = Automaton::new(format!("{p}.{t}"));
    a.time_unit_us = Some(quantum_us);
    a.clock("r")
        .clock("e")
        .action(release.clone(), ActionKind::Unicast, Direction::Output)
        .action(finish.clone(), ActionKind::Unicast, Direction::Output)
        .action(dispatch.clone(), ActionKind::Unicast, Direction::Input)
        .action(preempt.clone(), ActionKind::Unicast, Direction::Input);

    let mut declared = std::collections::BTreeSet::new();
    for c in &task.commands {
        match c {
            Command::Lock(r) | Command::Unlock(r) => {
                if declared.insert(r.clone()) {
                    a.action(names::lock(p, r, t), ActionKind::Unicast, Direction::Output)
                        .action(names::busy(p, r, t), ActionKind::Unicast, Direction::Output)
                        .action(names::unlock(p, r, t), ActionKind::Unicast, Direction::Output)
                        .action(names::released(p, r), ActionKind::Broadcast, Direction::Input);
                }
            }
            Command::Send(port) => {
                let msg = port_message(partition, t, port)?;
                if declared.insert(format!("send {msg}")) {
                    a.action(names::message(&msg), ActionKind::Broadcast, Direction::Output);
                }
            }
            Command::Receive(port) => {
                port_message(partition, t, port)?;
                if declared.insert(format!("receive {port}")) {
                    a.action(names::read(p, port), ActionKind::Broadcast, Direction::Output);
                }
            }
            Command::Compute { bcet_us, wcet_us } => {
                if bcet_us > wcet_us {
                    return Err(ConfigError::Invalid(format!("task `{t}` has bcet > wcet")));
                }
            }
        }
    }

    let urgent = || Constraint::atom("e", CmpOp::Le, 0);
    let frozen = |name: String| Location::new(name).stopped("e");
    let n = task.commands.len();

    let init_inv = match task.kind {
        TaskKind::Periodic => Constraint::atom("r", CmpOp::Le, offset),
        TaskKind::Sporadic => Constraint::tt(),
    };
    a.location(frozen("init".into()).with_invariant(init_inv));
    let idle_inv = match task.kind {
        TaskKind::Periodic => Constraint::atom("r", CmpOp::Le, period),
        TaskKind::Sporadic => Constraint::tt(),
    };
    a.location(frozen("idle".into()).with_invariant(idle_inv));
    a.location(Location::new("miss").stopped("r").stopped("e").error());

    let mut active = Vec::new();
    for k in 0..=n {
        a.location(frozen(format!("wait{k}")));
        let inv = match task.commands.get(k) {
            Some(Command::Compute { wcet_us, .. }) => Constraint::atom("e", CmpOp::Le, q("wcet", *wcet_us)?),
            _ => urgent(),
        };
        a.location(Location::new(format!("run{k}")).with_invariant(inv));
        active.push(format!("wait{k}"));
        active.push(format!("run{k}"));
        if matches!(task.commands.get(k), Some(Command::Lock(_))) {
            a.location(Location::new(format!("blk{k}")).with_invariant(urgent()))
                .location(frozen(format!("blocked{k}")))
                .location(Location::new(format!("wake{k}")).with_invariant(urgent()));
            active.extend([format!("blk{k}"), format!("blocked{k}"), format!("wake{k}")]);
        }
    }

    let reset_job = Update::none().reset("r").reset("e");
    match task.kind {
        TaskKind::Periodic => {
            a.edge(Edge::new("init", "wait0").when("r", CmpOp::Eq, offset).emit(release.clone()).update(reset_job.clone()));
            a.edge(Edge::new("idle", "wait0").when("r", CmpOp::Eq, period).emit(release.clone()).update(reset_job));
        }
        TaskKind::Sporadic => {
            a.edge(Edge::new("init", "wait0").when("r", CmpOp::Ge, offset).emit(release.clone()).update(reset_job.clone()));
            a.edge(Edge::new("idle", "wait0").when("r", CmpOp::Ge, period).emit(release.clone()).update(reset_job));
        }
    }

    for k in 0..=n {
        let wait = format!("wait{k}");
        let run = format!("run{k}");
        let next = format!("run{}", k + 1);
        a.edge(Edge::new(&wait, &run).recv(dispatch.clone()));
        a.edge(Edge::new(&run, &wait).recv(preempt.clone()));
        match task.commands.get(k) {
            None => {
                a.edge(Edge::new(&run, "idle").emit(finish.clone()).update(Update::none().reset("e")));
            }
            Some(Command::Compute { bcet_us, .. }) => {
                a.edge(Edge::new(&run, &next).when("e", CmpOp::Ge, q("bcet", *bcet_us)?).update(Update::none().reset("e")));
            }
            Some(Command::Send(port)) => {
                let msg = port_message(partition, t, port)?;
                a.edge(Edge::new(&run, &next).emit(names::message(&msg)));
            }
            Some(Command::Receive(port)) => {
                a.edge(Edge::new(&run, &next).emit(names::read(p, port)));
            }
            Some(Command::Unlock(r)) => {
                a.edge(Edge::new(&run, &next).emit(names::unlock(p, r, t)));
            }
            Some(Command::Lock(r)) => {
                let blk = format!("blk{k}");
                let blocked = format!("blocked{k}");
                let wake = format!("wake{k}");
                a.edge(Edge::new(&run, &next).emit(names::lock(p, r, t)));
                a.edge(Edge::new(&run, &blk).emit(names::busy(p, r, t)));
                a.edge(Edge::new(&blk, &blocked).emit(finish.clone()).update(Update::none().reset("e")));
                a.edge(Edge::new(&blocked, &wake).recv(names::released(p, r)));
                a.edge(Edge::new(&wake, &wait).emit(release.clone()));
            }
        }
    }
    for loc in &active {
        a.edge(Edge::new(loc, "miss").when("r", CmpOp::Gt, deadline));
    }
    Ok(a)
}

fn port_message(partition: &PartitionSpec, task: &str, port: &str) -> Result<String, ConfigError> {
    partition
        .port(port)
        .map(|ps| ps.message.clone())
        .ok_or_else(|| ConfigError::Invalid(format!("task `{task}` uses undeclared port `{port}`")))
}

/// Mutual-exclusion automaton for resource `resource` of `partition`.
/// No priority inheritance: a task that finds the resource held suspends
/// until it is released and then competes for the processor again.
pub fn build_resource(partition: &PartitionSpec, resource: &str, quantum_us: u64) -> Automaton {
    let p = partition.id.as_str();
    let users: Vec<&str> = partition
        .tasks
        .iter()
        .filter(|t| t.resources().contains(resource))
        .map(|t| t.id.as_str())
        .collect();
    let mut a = Automaton::new(format!("{p}.res.{resource}"));
    a.time_unit_us = Some(quantum_us);
    a.clock("w").action(names::released(p, resource), ActionKind::Broadcast, Direction::Output);
    for t in &users {
        a.action(names::lock(p, resource, t), ActionKind::Unicast, Direction::Input)
            .action(names::busy(p, resource, t), ActionKind::Unicast, Direction::Input)
            .action(names::unlock(p, resource, t), ActionKind::Unicast, Direction::Input);
    }
    a.location(Location::new("free").stopped("w"))
        .location(Location::new("held").stopped("w"))
        .location(Location::new("releasing").with_invariant(Constraint::atom("w", CmpOp::Le, 0)));
    for t in &users {
        a.edge(Edge::new("free", "held").recv(names::lock(p, resource, t)));
        a.edge(Edge::new("held", "held").recv(names::busy(p, resource, t)));
        a.edge(Edge::new("held", "releasing").recv(names::unlock(p, resource, t)).update(Update::none().reset("w")));
    }
    a.edge(Edge::new("releasing", "free").emit(names::released(p, resource)));
    a
}
