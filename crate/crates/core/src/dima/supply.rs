//! Time-division partition supply.

use super::config::{to_quanta, ConfigError, PartitionSpec};
use super::names;
use crate::model::{ActionKind, Automaton, CmpOp, Constraint, Direction, Edge, Location, Update};

/// Active intervals of `partition` in quanta, sorted and merged.
pub fn active_intervals(partition: &PartitionSpec, frame_us: u64, quantum_us: u64) -> Result<Vec<(i64, i64)>, ConfigError> {
    let frame = to_quanta("major frame", frame_us, quantum_us)?;
    let mut iv = Vec::new();
    for w in &partition.windows {
        let o = to_quanta(&format!("window offset of {}", partition.id), w.offset_us, quantum_us)?;
        let d = to_quanta(&format!("window duration of {}", partition.id), w.duration_us, quantum_us)?;
        if d == 0 || o + d > frame {
            return Err(ConfigError::Invalid(format!("window of `{}` is empty or exceeds the major frame", partition.id)));
        }
        iv.push((o, o + d));
    }
    iv.sort();
    for pair in iv.windows(2) {
        if pair[0].1 > pair[1].0 {
            return Err(ConfigError::Invalid(format!("windows of `{}` overlap", partition.id)));
        }
    }
    let mut merged: Vec<(i64, i64)> = Vec::new();
    for (s, e) in iv {
        match merged.last_mut() {
            Some(last) if last.1 == s => last.1 = e,
            _ => merged.push((s, e)),
        }
    }
    Ok(merged)
}

/// The supply automaton of one partition: broadcasts activation and
/// deactivation at window boundaries, repeating every major frame.
pub fn build_partition_supply(partition: &PartitionSpec, frame_us: u64, quantum_us: u64) -> Result<Automaton, ConfigError> {
    let frame = to_quanta("major frame", frame_us, quantum_us)?;
    if frame == 0 {
        return Err(ConfigError::Invalid("major frame must be positive".into()));
    }
    let iv = active_intervals(partition, frame_us, quantum_us)?;
    let active = |t: i64| iv.iter().any(|&(s, e)| s <= t && t < e);
    let on = names::activate(&partition.id);
    let off = names::deactivate(&partition.id);

    let mut events = Vec::new();
    for t in 0..frame {
        let prev = active((t + frame - 1) % frame);
        if active(t) != prev {
            events.push((t, if active(t) { on.clone() } else { off.clone() }));
        }
    }

    let mut a = Automaton::new(format!("{}.supply", partition.id));
    a.time_unit_us = Some(quantum_us);
    a.clock("f")
        .action(on.clone(), ActionKind::Broadcast, Direction::Output)
        .action(off, ActionKind::Broadcast, Direction::Output);
    let urgent = || Constraint::atom("f", CmpOp::Le, 0);
    let boot = active(0) && events.first().is_none_or(|(t, _)| *t != 0);
    if events.is_empty() {
        if boot {
            a.location(Location::new("boot").with_invariant(urgent()))
                .location(Location::new("on").stopped("f"))
                .edge(Edge::new("boot", "on").emit(on));
        } else {
            a.location(Location::new("off").stopped("f"));
        }
        return Ok(a);
    }
    // The cycle restarts at the first event so that partitions with
    // different first windows never reset at the same instant.
    let t0 = events[0].0;
    if boot {
        a.location(Location::new("boot").with_invariant(urgent()));
    }
    a.location(Location::new("start").with_invariant(Constraint::atom("f", CmpOp::Le, t0)));
    for (i, (t, _)) in events.iter().enumerate().skip(1) {
        a.location(Location::new(format!("w{i}")).with_invariant(Constraint::atom("f", CmpOp::Le, t - t0)));
    }
    a.location(Location::new("end").with_invariant(Constraint::atom("f", CmpOp::Le, frame)));
    if boot {
        a.edge(Edge::new("boot", "start").emit(on));
    }
    let after = |i: usize| if i + 1 == events.len() { "end".to_owned() } else { format!("w{}", i + 1) };
    let first = events[0].1.clone();
    a.edge(Edge::new("start", after(0)).when("f", CmpOp::Eq, t0).emit(first.clone()).update(Update::none().reset("f")));
    for (i, (t, action)) in events.iter().enumerate().skip(1) {
        a.edge(Edge::new(format!("w{i}"), after(i)).when("f", CmpOp::Eq, t - t0).emit(action.clone()));
    }
    a.edge(Edge::new("end", after(0)).when("f", CmpOp::Eq, frame).emit(first).update(Update::none().reset("f")));
    Ok(a)
}
