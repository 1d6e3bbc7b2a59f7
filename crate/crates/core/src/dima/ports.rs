//! Destination port monitors. These carry the communication error locations.

use super::config::{to_quanta, ConfigError, PortDirection, PortKind, PortSpec};
use super::names;
use crate::model::{ActionKind, Automaton, CmpOp, Direction, Edge, Location, Update, VarDecl};

/// Monitor of destination port `port`.
///
/// A sampling monitor measures the time since the last arrival, counted
/// from system start, and fails once it strictly exceeds the refresh
/// period. A queuing monitor counts buffered messages and fails on an
/// arrival to a full queue.
pub fn build_port_monitor(port: &PortSpec, quantum_us: u64) -> Result<Automaton, ConfigError> {
    if port.direction != PortDirection::Destination {
        return Err(ConfigError::Invalid(format!("port `{}` is not a destination port", port.name)));
    }
    let p = port.partition.as_str();
    let arrive = names::delivered(&port.message, p);
    let mut a = Automaton::new(format!("{p}.mon.{}", port.name));
    a.time_unit_us = Some(quantum_us);
    a.action(arrive.clone(), ActionKind::Broadcast, Direction::Input);
    match port.kind {
        PortKind::Sampling => {
            let refresh = match port.refresh_us {
                Some(r) if r > 0 => to_quanta(&format!("refresh period of {}", port.name), r, quantum_us)?,
                _ => return Err(ConfigError::Invalid(format!("sampling port `{}` needs a refresh period", port.name))),
            };
            a.clock("z")
                .location(Location::new("fresh"))
                .location(Location::new("stale").stopped("z").error())
                .edge(Edge::new("fresh", "fresh").recv(arrive).update(Update::none().reset("z")))
                .edge(Edge::new("fresh", "stale").when("z", CmpOp::Gt, refresh));
        }
        PortKind::Queuing => {
            let cap = match port.capacity {
                Some(c) if c >= 1 => c as i64,
                _ => return Err(ConfigError::Invalid(format!("queuing port `{}` needs capacity >= 1", port.name))),
            };
            let read = names::read(p, &port.name);
            a.action(read.clone(), ActionKind::Broadcast, Direction::Input)
                .var(VarDecl::new("cnt", 0, cap, 0))
                .location(Location::new("ok"))
                .location(Location::new("overflow").error())
                .edge(Edge::new("ok", "ok").when("cnt", CmpOp::Lt, cap).recv(arrive.clone()).update(Update::none().add("cnt", 1)))
                .edge(Edge::new("ok", "overflow").when("cnt", CmpOp::Eq, cap).recv(arrive))
                .edge(Edge::new("ok", "ok").when("cnt", CmpOp::Ge, 1).recv(read).update(Update::none().add("cnt", -1)));
        }
    }
    Ok(a)
}
