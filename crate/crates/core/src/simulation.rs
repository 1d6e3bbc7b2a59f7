//! Timed selection simulation between two transition systems.
//!
//! The concrete side takes strong steps, the abstract side answers with weak
//! moves: a selected input or output (an action the abstract system knows) is
//! matched by `tau* a tau*`, internal steps and unselected actions by the
//! internal closure, and a unit delay by internal steps around one unit delay.
//! The relation is the greatest fixpoint over the pairs reachable from the
//! initial pair and is computed by counting surviving candidates per move.

use std::collections::{HashSet, VecDeque};
use std::time::Instant;

use rustc_hash::FxHashMap;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::Alphabet;
use crate::safety::{LimitKind, Limits, Stats};
use crate::semantics::{weak_successors, Label, Successors, TransitionSystem, WeakMove};
use crate::store::StateStore;

/// The condition a dead pair violates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Clause {
    #[serde(rename = "g-mismatch")]
    GMismatch,
    #[serde(rename = "clause-1-input")]
    Input,
    #[serde(rename = "clause-2-output")]
    Output,
    #[serde(rename = "clause-3-internal")]
    Internal,
    #[serde(rename = "clause-4-delay")]
    Delay,
}

impl Clause {
    pub fn as_str(self) -> &'static str {
        match self {
            Clause::GMismatch => "g-mismatch",
            Clause::Input => "clause-1-input",
            Clause::Output => "clause-2-output",
            Clause::Internal => "clause-3-internal",
            Clause::Delay => "clause-4-delay",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Counterexample {
    pub concrete: Vec<i32>,
    #[serde(rename = "abstract")]
    pub abstract_state: Vec<i32>,
    pub clause: Clause,
    /// The concrete step the abstract side could not match; empty for g-mismatch.
    pub label: String,
    /// Length of the shortest path from the initial pair.
    pub depth: u32,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SimWitness {
    pub holds: bool,
    /// Surviving pairs, present when the relation holds and was requested.
    pub relation: Option<Vec<(Vec<i32>, Vec<i32>)>>,
    pub counterexample: Option<Counterexample>,
    pub pairs: u64,
    pub concrete_states: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SimError {
    #[error("abstract alphabet is not contained in the concrete alphabet; missing: {}", .0.join(", "))]
    AlphabetViolation(Vec<String>),
    #[error("simulation check exceeded its {} limit after {} states", match .kind { LimitKind::States => "state", LimitKind::Time => "time" }, .stats.explored_states)]
    LimitExceeded { kind: LimitKind, stats: Stats },
}

#[derive(Debug, Clone, Copy, Default)]
pub struct SimOptions {
    pub limits: Limits,
    pub keep_relation: bool,
}

/// Names that `a` uses but `c` does not.
fn missing_actions(concrete: &Alphabet, abstract_: &Alphabet) -> Vec<String> {
    let have = concrete.names();
    abstract_
        .names()
        .into_iter()
        .filter(|n| !have.contains(n))
        .map(str::to_owned)
        .collect()
}

/// The reachable graph of the concrete system, explored once and reused
/// across abstract candidates.
pub struct SimulationChecker {
    store: StateStore,
    edge_start: Vec<u32>,
    edges: Vec<(Label, u32)>,
    error: Vec<bool>,
    alphabet: Alphabet,
}

impl SimulationChecker {
    pub fn new(concrete: &dyn TransitionSystem, limits: &Limits) -> Result<Self, SimError> {
        let start = Instant::now();
        let mut store = StateStore::new(concrete.width());
        let mut edge_start = vec![0u32];
        let mut edges = Vec::new();
        let mut error = Vec::new();
        store.insert(&concrete.initial());
        let mut buf = Successors::new(concrete.width());
        let mut cur = Vec::new();
        let mut next = 0u32;
        while (next as usize) < store.len() {
            if next.is_multiple_of(4096) && start.elapsed() > limits.max_time {
                return Err(SimError::LimitExceeded {
                    kind: LimitKind::Time,
                    stats: Stats {
                        explored_states: store.len() as u64,
                        peak_frontier: 0,
                        elapsed_ms: start.elapsed().as_millis() as u64,
                    },
                });
            }
            store.get_into(next, &mut cur);
            error.push(concrete.is_error(&cur));
            concrete.successors(&cur, &mut buf);
            for (label, t) in buf.iter() {
                let (id, _) = store.insert(t);
                edges.push((label, id));
            }
            edge_start.push(edges.len() as u32);
            if store.len() as u64 > limits.max_states {
                return Err(SimError::LimitExceeded {
                    kind: LimitKind::States,
                    stats: Stats {
                        explored_states: store.len() as u64,
                        peak_frontier: 0,
                        elapsed_ms: start.elapsed().as_millis() as u64,
                    },
                });
            }
            next += 1;
        }
        Ok(SimulationChecker {
            store,
            edge_start,
            edges,
            error,
            alphabet: concrete.alphabet().clone(),
        })
    }

    pub fn states(&self) -> usize {
        self.store.len()
    }

    fn succ(&self, c: u32) -> &[(Label, u32)] {
        &self.edges[self.edge_start[c as usize] as usize..self.edge_start[c as usize + 1] as usize]
    }

    /// Decide whether the concrete system is simulated by `abstract_`.
    pub fn check(&self, abstract_: &dyn TransitionSystem, opts: &SimOptions) -> Result<SimWitness, SimError> {
        let missing = missing_actions(&self.alphabet, abstract_.alphabet());
        if !missing.is_empty() {
            return Err(SimError::AlphabetViolation(missing));
        }
        let start = Instant::now();
        // concrete action id -> abstract action id, for selected actions
        let selected: Vec<Option<u32>> = self
            .alphabet
            .actions
            .iter()
            .map(|a| {
                abstract_
                    .alphabet()
                    .get(&a.name)
                    .filter(|x| x.input || x.output)
                    .and_then(|_| abstract_.alphabet().id(&a.name))
                    .map(|i| i as u32)
            })
            .collect();
        let mut abs = AbstractSide::new(abstract_);
        let a0 = abs.intern(&abstract_.initial());

        let mut pair_ids: FxHashMap<(u32, u32), u32> = FxHashMap::default();
        let mut pairs: Vec<(u32, u32)> = Vec::new();
        let mut depth: Vec<u32> = Vec::new();
        // per pair: None alive-so-far, Some(cause)
        let mut intrinsic: Vec<Option<(Clause, Label)>> = Vec::new();
        let mut move_owner: Vec<u32> = Vec::new();
        let mut move_cands: Vec<u32> = Vec::new();
        let mut move_start: Vec<u32> = vec![0];

        pair_ids.insert((0, a0), 0);
        pairs.push((0, a0));
        depth.push(0);
        intrinsic.push(None);
        let mut next = 0usize;
        let mut cands_buf: Vec<u32> = Vec::new();
        while next < pairs.len() {
            if next.is_multiple_of(4096) && start.elapsed() > opts.limits.max_time {
                return Err(SimError::LimitExceeded {
                    kind: LimitKind::Time,
                    stats: Stats {
                        explored_states: pairs.len() as u64,
                        peak_frontier: 0,
                        elapsed_ms: start.elapsed().as_millis() as u64,
                    },
                });
            }
            let (c, a) = pairs[next];
            let pid = next as u32;
            next += 1;
            if self.error[c as usize] != abs.is_error(a) {
                intrinsic[pid as usize] = Some((Clause::GMismatch, Label::Internal));
                continue;
            }
            let moves_before = move_owner.len();
            let cands_before = move_cands.len();
            let mut died = None;
            for &(label, c2) in self.succ(c) {
                let (mv, clause) = match label {
                    Label::Input(x) => match selected[x as usize] {
                        Some(y) => (WeakMove::Action(Label::Input(y)), Clause::Input),
                        None => (WeakMove::Zero, Clause::Internal),
                    },
                    Label::Output(x) => match selected[x as usize] {
                        Some(y) => (WeakMove::Action(Label::Output(y)), Clause::Output),
                        None => (WeakMove::Zero, Clause::Internal),
                    },
                    Label::Internal => (WeakMove::Zero, Clause::Internal),
                    Label::Delay(d) => (WeakMove::Delay(d), Clause::Delay),
                };
                cands_buf.clear();
                cands_buf.extend_from_slice(abs.weak(a, mv));
                if cands_buf.is_empty() {
                    died = Some((clause, label));
                    break;
                }
                move_owner.push(pid);
                for &a2 in &cands_buf {
                    let key = (c2, a2);
                    let id = match pair_ids.get(&key) {
                        Some(&id) => id,
                        None => {
                            let id = pairs.len() as u32;
                            pair_ids.insert(key, id);
                            pairs.push(key);
                            depth.push(depth[pid as usize] + 1);
                            intrinsic.push(None);
                            id
                        }
                    };
                    move_cands.push(id);
                }
                move_start.push(move_cands.len() as u32);
            }
            if died.is_some() {
                move_owner.truncate(moves_before);
                move_cands.truncate(cands_before);
                move_start.truncate(moves_before + 1);
                intrinsic[pid as usize] = died;
            }
            if pairs.len() as u64 > opts.limits.max_states {
                return Err(SimError::LimitExceeded {
                    kind: LimitKind::States,
                    stats: Stats {
                        explored_states: pairs.len() as u64,
                        peak_frontier: 0,
                        elapsed_ms: start.elapsed().as_millis() as u64,
                    },
                });
            }
        }

        // reverse index: pair -> moves it is a candidate of
        let n = pairs.len();
        let mut rev_start = vec![0u32; n + 1];
        for &p in &move_cands {
            rev_start[p as usize + 1] += 1;
        }
        for i in 0..n {
            rev_start[i + 1] += rev_start[i];
        }
        let mut rev = vec![0u32; move_cands.len()];
        let mut fill = rev_start.clone();
        for m in 0..move_owner.len() {
            for &p in &move_cands[move_start[m] as usize..move_start[m + 1] as usize] {
                rev[fill[p as usize] as usize] = m as u32;
                fill[p as usize] += 1;
            }
        }
        let mut remaining: Vec<u32> = (0..move_owner.len()).map(|m| move_start[m + 1] - move_start[m]).collect();
        const ALIVE: u32 = u32::MAX;
        let mut death: Vec<u32> = vec![ALIVE; n];
        let mut cause_move: Vec<u32> = vec![u32::MAX; n];
        let mut order = 0u32;
        let mut work = VecDeque::new();
        for p in 0..n {
            if intrinsic[p].is_some() {
                death[p] = order;
                order += 1;
                work.push_back(p as u32);
            }
        }
        while let Some(p) = work.pop_front() {
            for &m in &rev[rev_start[p as usize] as usize..rev_start[p as usize + 1] as usize] {
                remaining[m as usize] -= 1;
                if remaining[m as usize] == 0 {
                    let owner = move_owner[m as usize];
                    if death[owner as usize] == ALIVE {
                        death[owner as usize] = order;
                        order += 1;
                        cause_move[owner as usize] = m;
                        work.push_back(owner);
                    }
                }
            }
        }

        let holds = death[0] == ALIVE;
        let counterexample = (!holds).then(|| {
            let mut p = 0u32;
            while intrinsic[p as usize].is_none() {
                let m = cause_move[p as usize] as usize;
                let cands = &move_cands[move_start[m] as usize..move_start[m + 1] as usize];
                p = *cands
                    .iter()
                    .min_by_key(|&&q| (depth[q as usize], death[q as usize]))
                    .expect("moves have candidates");
            }
            let (clause, label) = intrinsic[p as usize].unwrap();
            let (c, a) = pairs[p as usize];
            Counterexample {
                concrete: self.store.get(c),
                abstract_state: abs.store.get(a),
                clause,
                label: if clause == Clause::GMismatch {
                    String::new()
                } else {
                    label.display(&self.alphabet)
                },
                depth: depth[p as usize],
            }
        });
        let relation = (holds && opts.keep_relation).then(|| {
            (0..n)
                .filter(|&p| death[p] == ALIVE)
                .map(|p| (self.store.get(pairs[p].0), abs.store.get(pairs[p].1)))
                .collect()
        });
        Ok(SimWitness {
            holds,
            relation,
            counterexample,
            pairs: n as u64,
            concrete_states: self.store.len() as u64,
        })
    }
}

/// Lazily explored abstract system with memoised weak moves.
struct AbstractSide<'a> {
    ts: &'a dyn TransitionSystem,
    store: StateStore,
    succ: Vec<Option<Vec<(Label, u32)>>>,
    error: Vec<bool>,
    memo: FxHashMap<(u32, WeakMove), Vec<u32>>,
    buf: Successors,
    cur: Vec<i32>,
}

impl<'a> AbstractSide<'a> {
    fn new(ts: &'a dyn TransitionSystem) -> Self {
        AbstractSide {
            ts,
            store: StateStore::new(ts.width()),
            succ: Vec::new(),
            error: Vec::new(),
            memo: FxHashMap::default(),
            buf: Successors::new(ts.width()),
            cur: Vec::new(),
        }
    }

    fn intern(&mut self, s: &[i32]) -> u32 {
        let (id, fresh) = self.store.insert(s);
        if fresh {
            self.succ.push(None);
            self.error.push(self.ts.is_error(s));
        }
        id
    }

    fn is_error(&self, a: u32) -> bool {
        self.error[a as usize]
    }

    fn successors(&mut self, a: u32) -> Vec<(Label, u32)> {
        if let Some(s) = &self.succ[a as usize] {
            return s.clone();
        }
        self.store.get_into(a, &mut self.cur);
        let cur = std::mem::take(&mut self.cur);
        let mut buf = std::mem::take(&mut self.buf);
        self.ts.successors(&cur, &mut buf);
        let list: Vec<(Label, u32)> = buf.iter().map(|(l, t)| (l, t.to_vec())).collect::<Vec<_>>().into_iter().map(|(l, t)| (l, self.intern(&t))).collect();
        self.cur = cur;
        self.buf = buf;
        self.succ[a as usize] = Some(list.clone());
        list
    }

    fn closure(&mut self, seeds: &[u32]) -> Vec<u32> {
        let mut seen: HashSet<u32> = seeds.iter().copied().collect();
        let mut queue: VecDeque<u32> = seeds.iter().copied().collect();
        let mut out = Vec::new();
        while let Some(x) = queue.pop_front() {
            out.push(x);
            for (l, t) in self.successors(x) {
                if l == Label::Internal && seen.insert(t) {
                    queue.push_back(t);
                }
            }
        }
        out
    }

    fn weak(&mut self, a: u32, mv: WeakMove) -> &[u32] {
        if !self.memo.contains_key(&(a, mv)) {
            let mut result = match mv {
                WeakMove::Zero => self.closure(&[a]),
                WeakMove::Action(label) => {
                    let before = self.closure(&[a]);
                    let mut mid = Vec::new();
                    for b in before {
                        for (l, t) in self.successors(b) {
                            if l == label {
                                mid.push(t);
                            }
                        }
                    }
                    mid.sort_unstable();
                    mid.dedup();
                    self.closure(&mid)
                }
                WeakMove::Delay(d) => {
                    let mut seen: HashSet<(u32, u32)> = HashSet::new();
                    let mut queue = VecDeque::new();
                    seen.insert((a, 0));
                    queue.push_back((a, 0u32));
                    let mut out = Vec::new();
                    while let Some((x, e)) = queue.pop_front() {
                        if e == d {
                            out.push(x);
                        }
                        for (l, t) in self.successors(x) {
                            let n = match l {
                                Label::Internal => e,
                                Label::Delay(k) if e + k <= d => e + k,
                                _ => continue,
                            };
                            if seen.insert((t, n)) {
                                queue.push_back((t, n));
                            }
                        }
                    }
                    out
                }
            };
            result.sort_unstable();
            result.dedup();
            self.memo.insert((a, mv), result);
        }
        &self.memo[&(a, mv)]
    }
}

/// Decide `concrete ⪯ abstract_`.
pub fn check_simulation(
    concrete: &dyn TransitionSystem,
    abstract_: &dyn TransitionSystem,
    opts: &SimOptions,
) -> Result<SimWitness, SimError> {
    let missing = missing_actions(concrete.alphabet(), abstract_.alphabet());
    if !missing.is_empty() {
        return Err(SimError::AlphabetViolation(missing));
    }
    SimulationChecker::new(concrete, &opts.limits)?.check(abstract_, opts)
}

/// Independently re-check that `relation` is a timed selection simulation
/// containing the initial pair. With `multi_delay = Some(d)` delays of every
/// length up to `d` are checked directly as well.
pub fn verify_witness(
    concrete: &dyn TransitionSystem,
    abstract_: &dyn TransitionSystem,
    relation: &[(Vec<i32>, Vec<i32>)],
    multi_delay: Option<u32>,
) -> bool {
    if !missing_actions(concrete.alphabet(), abstract_.alphabet()).is_empty() {
        return false;
    }
    let rel: HashSet<(&[i32], &[i32])> = relation.iter().map(|(c, a)| (c.as_slice(), a.as_slice())).collect();
    let (c0, a0) = (concrete.initial(), abstract_.initial());
    if !rel.contains(&(c0.as_slice(), a0.as_slice())) {
        return false;
    }
    let calpha = concrete.alphabet();
    let aalpha = abstract_.alphabet();
    let select = |id: u32| -> Option<u32> {
        let name = calpha.name(id as usize);
        aalpha
            .get(name)
            .filter(|x| x.input || x.output)
            .map(|_| aalpha.id(name).unwrap() as u32)
    };
    let mut buf = Successors::new(concrete.width());
    let matched = |c2: &[i32], mv: WeakMove, a: &[i32]| -> bool {
        weak_successors(abstract_, a, mv)
            .iter()
            .any(|a2| rel.contains(&(c2, a2.as_slice())))
    };
    for (c, a) in relation {
        if concrete.is_error(c) != abstract_.is_error(a) {
            return false;
        }
        concrete.successors(c, &mut buf);
        for (label, c2) in buf.iter() {
            let mv = match label {
                Label::Input(x) => select(x).map_or(WeakMove::Zero, |y| WeakMove::Action(Label::Input(y))),
                Label::Output(x) => select(x).map_or(WeakMove::Zero, |y| WeakMove::Action(Label::Output(y))),
                Label::Internal => WeakMove::Zero,
                Label::Delay(d) => WeakMove::Delay(d),
            };
            if !matched(c2, mv, a) {
                return false;
            }
        }
        if let Some(max_d) = multi_delay {
            // states reachable from c by exactly d unit delays
            let mut frontier = vec![c.clone()];
            let mut inner = Successors::new(concrete.width());
            for d in 1..=max_d {
                let mut nextf = Vec::new();
                for x in &frontier {
                    concrete.successors(x, &mut inner);
                    for (l, t) in inner.iter() {
                        if l == Label::Delay(1) {
                            nextf.push(t.to_vec());
                        }
                    }
                }
                nextf.sort();
                nextf.dedup();
                if nextf.is_empty() {
                    break;
                }
                if d > 1 {
                    for c2 in &nextf {
                        if !matched(c2, WeakMove::Delay(d), a) {
                            return false;
                        }
                    }
                }
                frontier = nextf;
            }
        }
    }
    true
}
