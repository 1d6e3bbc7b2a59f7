//! AFDX latency chain of one virtual link.
//!
//! A message crosses three stages: the transmitting end system's UDP/IP
//! stack, the virtual link itself and the receiving end system's UDP/IP stack
//! (one per destination partition). Each stage is a bounded FIFO delay line
//! with one clock per buffered message.

use super::config::{to_quanta, ConfigError, LatencyBounds, VirtualLinkSpec};
use super::names;
use crate::model::{ActionKind, Automaton, CmpOp, Constraint, Direction, Edge, Location, Update};

pub(crate) const DEFAULT_STAGE_CAPACITY: u32 = 2;

/// A FIFO delay stage relaying `input` to `output` after a latency in
/// `[lo, hi]` quanta. Arrivals to a full stage reach the `overflow` error.
pub fn build_stage(name: &str, input: &str, output: &str, lo: i64, hi: i64, capacity: u32, quantum_us: u64) -> Automaton {
    let cap = capacity.max(1) as usize;
    let clock = |s: usize| format!("x{s}");
    let loc = |h: usize, k: usize| format!("q{h}_{k}");
    let mut a = Automaton::new(name);
    a.time_unit_us = Some(quantum_us);
    for s in 0..cap {
        a.clock(clock(s));
    }
    a.action(input, ActionKind::Broadcast, Direction::Input)
        .action(output, ActionKind::Broadcast, Direction::Output);
    // `h` is the head slot, `k` the number of buffered messages
    for h in 0..cap {
        for k in 0..=cap {
            let mut l = Location::new(loc(h, k));
            let mut inv = Constraint::tt();
            for s in 0..cap {
                let occupied = (s + cap - h) % cap < k;
                if occupied {
                    inv = inv.and(crate::model::Atom::new(clock(s), CmpOp::Le, hi));
                } else {
                    l = l.stopped(clock(s));
                }
            }
            a.location(l.with_invariant(inv));
        }
    }
    let mut overflow = Location::new("overflow").error();
    for s in 0..cap {
        overflow = overflow.stopped(clock(s));
    }
    a.location(overflow);
    for h in 0..cap {
        for k in 0..=cap {
            if k < cap {
                let slot = (h + k) % cap;
                a.edge(Edge::new(loc(h, k), loc(h, k + 1)).recv(input).update(Update::none().reset(clock(slot))));
            } else {
                a.edge(Edge::new(loc(h, k), "overflow").recv(input));
            }
            if k > 0 {
                a.edge(
                    Edge::new(loc(h, k), loc((h + 1) % cap, k - 1))
                        .when(clock(h), CmpOp::Ge, lo)
                        .emit(output)
                        .update(Update::none().reset(clock(h))),
                );
            }
        }
    }
    a
}

fn bounds(what: String, b: &LatencyBounds, quantum_us: u64) -> Result<(i64, i64), ConfigError> {
    if b.min_us > b.max_us {
        return Err(ConfigError::Invalid(format!("{what}: min latency exceeds max")));
    }
    Ok((to_quanta(&what, b.min_us, quantum_us)?, to_quanta(&what, b.max_us, quantum_us)?))
}

fn capacity(vl: &VirtualLinkSpec) -> u32 {
    if vl.stage_capacity == 0 {
        DEFAULT_STAGE_CAPACITY
    } else {
        vl.stage_capacity
    }
}

/// Transmit-side stack and virtual link of `vl`, shared by all destinations.
pub fn build_link(vl: &VirtualLinkSpec, quantum_us: u64) -> Result<Vec<Automaton>, ConfigError> {
    let m = &vl.message;
    let (tlo, thi) = bounds(format!("tx latency of {}", vl.id), &vl.tx_udpip, quantum_us)?;
    let (vlo, vhi) = bounds(format!("transit latency of {}", vl.id), &vl.vl_transit, quantum_us)?;
    let cap = capacity(vl);
    Ok(vec![
        build_stage(&format!("{m}.iptx"), &names::message(m), &names::transmitted(m), tlo, thi, cap, quantum_us),
        build_stage(&format!("{m}.vl"), &names::transmitted(m), &names::transited(m), vlo, vhi, cap, quantum_us),
    ])
}

/// Receive-side stack delivering `vl`'s message to partition `dest`.
pub fn build_receiver(vl: &VirtualLinkSpec, dest: &str, quantum_us: u64) -> Result<Automaton, ConfigError> {
    let m = &vl.message;
    let (lo, hi) = bounds(format!("rx latency of {}", vl.id), &vl.rx_udpip, quantum_us)?;
    Ok(build_stage(
        &format!("{m}.iprx.{dest}"),
        &names::transited(m),
        &names::delivered(m, dest),
        lo,
        hi,
        capacity(vl),
        quantum_us,
    ))
}

/// The whole chain of `vl`: transmit stack, link and one receive stack per destination.
pub fn build_comm_chain(vl: &VirtualLinkSpec, quantum_us: u64) -> Result<Vec<Automaton>, ConfigError> {
    let mut chain = build_link(vl, quantum_us)?;
    for d in &vl.destinations {
        chain.push(build_receiver(vl, d, quantum_us)?);
    }
    Ok(chain)
}
