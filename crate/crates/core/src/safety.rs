//! Reachability of error states by breadth-first exploration.

use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::semantics::{describe_state, Label, Successors, TransitionSystem};
use crate::store::StateStore;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Limits {
    pub max_states: u64,
    pub max_time: Duration,
}

impl Default for Limits {
    fn default() -> Self {
        Limits {
            max_states: 50_000_000,
            max_time: Duration::from_secs(30 * 60),
        }
    }
}

impl Limits {
    pub fn states(max_states: u64) -> Self {
        Limits {
            max_states,
            ..Limits::default()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Safety {
    Safe,
    Unsafe,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Stats {
    pub explored_states: u64,
    pub peak_frontier: u64,
    pub elapsed_ms: u64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Trace {
    pub initial: Vec<i32>,
    pub steps: Vec<(Label, Vec<i32>)>,
}

impl Trace {
    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn last_state(&self) -> &[i32] {
        self.steps.last().map(|(_, s)| s.as_slice()).unwrap_or(&self.initial)
    }

    /// Step listing with runs of unit delays merged.
    pub fn render(&self, ts: &dyn TransitionSystem) -> Vec<String> {
        let mut lines = vec![format!("init: {}", describe_state(ts, &self.initial))];
        let mut time = 0u64;
        let mut i = 0;
        while i < self.steps.len() {
            let (label, _) = self.steps[i];
            if let Label::Delay(_) = label {
                let mut d = 0;
                while i < self.steps.len() {
                    match self.steps[i].0 {
                        Label::Delay(k) => d += k as u64,
                        _ => break,
                    }
                    i += 1;
                }
                time += d;
                lines.push(format!("delay({d}) -> t={time}: {}", describe_state(ts, &self.steps[i - 1].1)));
                continue;
            }
            lines.push(format!("{} at t={time}: {}", label.display(ts.alphabet()), describe_state(ts, &self.steps[i].1)));
            i += 1;
        }
        lines
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Verdict {
    pub result: Safety,
    pub stats: Stats,
    pub trace: Option<Trace>,
}

impl Verdict {
    pub fn is_safe(&self) -> bool {
        self.result == Safety::Safe
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LimitKind {
    States,
    Time,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CheckError {
    #[error("{} limit exceeded after {} states", match .kind { LimitKind::States => "state", LimitKind::Time => "time" }, .stats.explored_states)]
    LimitExceeded { kind: LimitKind, stats: Stats },
}

/// Decide whether any error state is reachable. Exploration is breadth-first
/// so a returned trace is shortest in number of transitions.
pub fn check_safety(ts: &dyn TransitionSystem, limits: &Limits) -> Result<Verdict, CheckError> {
    let start = Instant::now();
    let mut store = StateStore::new(ts.width());
    let mut parent: Vec<(u32, Label)> = Vec::new();
    let init = ts.initial();
    store.insert(&init);
    parent.push((u32::MAX, Label::Internal));
    let stats = |store: &StateStore, peak: u64, start: Instant| Stats {
        explored_states: store.len() as u64,
        peak_frontier: peak,
        elapsed_ms: start.elapsed().as_millis() as u64,
    };
    let trace_to = |store: &StateStore, parent: &[(u32, Label)], mut id: u32| -> Trace {
        let mut steps = Vec::new();
        while parent[id as usize].0 != u32::MAX {
            let (p, l) = parent[id as usize];
            steps.push((l, store.get(id)));
            id = p;
        }
        steps.reverse();
        Trace {
            initial: store.get(0),
            steps,
        }
    };
    if ts.is_error(&init) {
        return Ok(Verdict {
            result: Safety::Unsafe,
            stats: stats(&store, 1, start),
            trace: Some(Trace { initial: init, steps: Vec::new() }),
        });
    }
    let mut buf = Successors::new(ts.width());
    let mut cur = Vec::with_capacity(ts.width());
    let mut next = 0u32;
    let mut peak = 1u64;
    while (next as usize) < store.len() {
        if next.is_multiple_of(4096) && start.elapsed() > limits.max_time {
            return Err(CheckError::LimitExceeded {
                kind: LimitKind::Time,
                stats: stats(&store, peak, start),
            });
        }
        store.get_into(next, &mut cur);
        ts.successors(&cur, &mut buf);
        for (label, t) in buf.iter() {
            let (id, fresh) = store.insert(t);
            if !fresh {
                continue;
            }
            parent.push((next, label));
            if ts.is_error(t) {
                return Ok(Verdict {
                    result: Safety::Unsafe,
                    stats: stats(&store, peak, start),
                    trace: Some(trace_to(&store, &parent, id)),
                });
            }
            if store.len() as u64 > limits.max_states {
                return Err(CheckError::LimitExceeded {
                    kind: LimitKind::States,
                    stats: stats(&store, peak, start),
                });
            }
        }
        next += 1;
        peak = peak.max(store.len() as u64 - next as u64);
    }
    Ok(Verdict {
        result: Safety::Safe,
        stats: stats(&store, peak, start),
        trace: None,
    })
}

/// True iff every step of `trace` is a transition of `ts` from its predecessor
/// and the trace starts in the initial state.
pub fn replay_trace(ts: &dyn TransitionSystem, trace: &Trace) -> bool {
    if trace.initial != ts.initial() {
        return false;
    }
    let mut buf = Successors::new(ts.width());
    let mut cur = trace.initial.clone();
    for (label, next) in &trace.steps {
        ts.successors(&cur, &mut buf);
        if !buf.iter().any(|(l, t)| l == *label && t == next.as_slice()) {
            return false;
        }
        cur.clone_from(next);
    }
    true
}
