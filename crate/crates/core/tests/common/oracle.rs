//! A direct interpreter of automata over unbounded integers, written
//! without the engine's compiled semantics, plus brute-force deciders built
//! on it.

use std::collections::{BTreeSet, HashMap, HashSet, VecDeque};

use dimacheck::model::{ActionKind, AssignValue, Automaton, Constraint, Direction, Term};

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RState {
    pub loc: usize,
    pub clocks: Vec<i64>,
    pub vars: Vec<i64>,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum RLabel {
    In(String),
    Out(String),
    Tau,
    Delay,
}

pub struct Reference<'a> {
    a: &'a Automaton,
    /// Clock values are capped here after delays; `None` leaves them unbounded.
    caps: Option<Vec<i64>>,
}

impl<'a> Reference<'a> {
    pub fn unbounded(a: &'a Automaton) -> Self {
        Reference { a, caps: None }
    }

    /// Clocks stop counting a few units above the largest constant they are
    /// compared with, which leaves every constraint's truth unchanged.
    pub fn capped(a: &'a Automaton, slack: i64) -> Self {
        let mut caps = vec![0i64; a.clocks.len()];
        let constraints = a.locations.iter().map(|l| &l.invariant).chain(a.edges.iter().map(|e| &e.guard));
        for c in constraints {
            for atom in &c.atoms {
                if let Term::Name(n) = &atom.term {
                    if let Some(i) = a.clocks.iter().position(|x| x == n) {
                        caps[i] = caps[i].max(atom.value);
                    }
                }
            }
        }
        Reference {
            a,
            caps: Some(caps.into_iter().map(|c| c + slack).collect()),
        }
    }

    pub fn initial(&self) -> RState {
        RState {
            loc: self.a.locations.iter().position(|l| l.name == self.a.initial).unwrap(),
            clocks: vec![0; self.a.clocks.len()],
            vars: self.a.vars.iter().map(|v| v.init).collect(),
        }
    }

    pub fn is_error(&self, s: &RState) -> bool {
        self.a.locations[s.loc].error
    }

    fn value(&self, s: &RState, name: &str) -> i64 {
        if let Some(i) = self.a.clocks.iter().position(|c| c == name) {
            return s.clocks[i];
        }
        let i = self.a.vars.iter().position(|v| v.name == name).unwrap();
        s.vars[i]
    }

    fn holds(&self, c: &Constraint, s: &RState) -> bool {
        c.atoms.iter().all(|atom| {
            let lhs = match &atom.term {
                Term::Name(n) => self.value(s, n),
                Term::Diff(l, r) => self.value(s, l) - self.value(s, r),
            };
            atom.op.holds(lhs, atom.value)
        })
    }

    pub fn steps(&self, s: &RState) -> Vec<(RLabel, RState)> {
        let here = &self.a.locations[s.loc];
        let mut out = Vec::new();
        for e in self.a.edges.iter().filter(|e| e.from == here.name) {
            if !self.holds(&e.guard, s) {
                continue;
            }
            let mut t = s.clone();
            t.loc = self.a.locations.iter().position(|l| l.name == e.to).unwrap();
            for asg in &e.update.assignments {
                if let Some(i) = self.a.clocks.iter().position(|c| *c == asg.target) {
                    t.clocks[i] = 0;
                    continue;
                }
                let i = self.a.vars.iter().position(|v| v.name == asg.target).unwrap();
                let decl = &self.a.vars[i];
                t.vars[i] = match asg.value {
                    AssignValue::Const(n) => n,
                    AssignValue::Offset(d) => (t.vars[i] + d).max(decl.lo).min(decl.hi),
                };
            }
            if !self.holds(&self.a.locations[t.loc].invariant, &t) {
                continue;
            }
            let label = match &e.sync {
                None => RLabel::Tau,
                Some(sync) if sync.dir == Direction::Input => RLabel::In(sync.action.clone()),
                Some(sync) => RLabel::Out(sync.action.clone()),
            };
            out.push((label, t));
        }
        for d in &self.a.actions {
            if d.kind == ActionKind::Broadcast && d.dir == Direction::Input {
                let label = RLabel::In(d.name.clone());
                if !out.iter().any(|(l, _)| *l == label) {
                    out.push((label, s.clone()));
                }
            }
        }
        let mut t = s.clone();
        for (i, c) in self.a.clocks.iter().enumerate() {
            if here.rate(c) == 1 {
                t.clocks[i] += 1;
                if let Some(caps) = &self.caps {
                    t.clocks[i] = t.clocks[i].min(caps[i]);
                }
            }
        }
        if self.holds(&here.invariant, &t) {
            out.push((RLabel::Delay, t));
        }
        out
    }
}

/// Upper bound on the number of states that differ in some observable way:
/// any reachable error is reachable within this many steps.
fn depth_bound(a: &Automaton) -> usize {
    let r = Reference::capped(a, 1);
    let clocks: usize = r.caps.as_ref().unwrap().iter().map(|c| *c as usize + 1).product();
    let vars: usize = a.vars.iter().map(|v| (v.hi - v.lo + 1) as usize).product();
    a.locations.len() * clocks * vars
}

/// Length of a shortest run to an error location, exploring unbounded
/// clock values breadth-first up to the depth bound.
pub fn shortest_error_run(a: &Automaton) -> Option<usize> {
    let r = Reference::unbounded(a);
    let bound = depth_bound(a);
    let init = r.initial();
    let mut seen = HashSet::new();
    seen.insert(init.clone());
    let mut layer = vec![init];
    for depth in 0..=bound {
        if layer.iter().any(|s| r.is_error(s)) {
            return Some(depth);
        }
        let mut next = Vec::new();
        for s in &layer {
            for (_, t) in r.steps(s) {
                if seen.insert(t.clone()) {
                    next.push(t);
                }
            }
        }
        if next.is_empty() {
            return None;
        }
        layer = next;
    }
    None
}

/// The whole reachable graph under capped clocks.
pub struct Graph {
    pub states: Vec<RState>,
    pub error: Vec<bool>,
    pub edges: Vec<Vec<(RLabel, usize)>>,
}

impl Graph {
    pub fn explore(a: &Automaton, slack: i64) -> Graph {
        let r = Reference::capped(a, slack);
        let mut index = HashMap::new();
        let mut states = vec![r.initial()];
        index.insert(states[0].clone(), 0);
        let mut edges = Vec::new();
        let mut error = Vec::new();
        let mut i = 0;
        while i < states.len() {
            let s = states[i].clone();
            error.push(r.is_error(&s));
            let mut out = Vec::new();
            for (l, t) in r.steps(&s) {
                let j = *index.entry(t.clone()).or_insert_with(|| {
                    states.push(t);
                    states.len() - 1
                });
                out.push((l, j));
            }
            edges.push(out);
            i += 1;
        }
        Graph { states, error, edges }
    }

    fn tau_closure(&self, seeds: impl IntoIterator<Item = usize>) -> BTreeSet<usize> {
        let mut seen: BTreeSet<usize> = BTreeSet::new();
        let mut queue: VecDeque<usize> = VecDeque::new();
        for s in seeds {
            if seen.insert(s) {
                queue.push_back(s);
            }
        }
        while let Some(s) = queue.pop_front() {
            for (l, t) in &self.edges[s] {
                if *l == RLabel::Tau && seen.insert(*t) {
                    queue.push_back(*t);
                }
            }
        }
        seen
    }

    pub fn weak(&self, s: usize, label: &RLabel) -> BTreeSet<usize> {
        let before = self.tau_closure([s]);
        let mid = before
            .iter()
            .flat_map(|&b| self.edges[b].iter().filter(|(l, _)| l == label).map(|(_, t)| *t))
            .collect::<Vec<_>>();
        self.tau_closure(mid)
    }

    pub fn weak_delay(&self, s: usize, d: usize) -> BTreeSet<usize> {
        let mut cur = self.tau_closure([s]);
        for _ in 0..d {
            let stepped = cur
                .iter()
                .flat_map(|&b| self.edges[b].iter().filter(|(l, _)| *l == RLabel::Delay).map(|(_, t)| *t))
                .collect::<Vec<_>>();
            cur = self.tau_closure(stepped);
        }
        cur
    }

    /// States reached by exactly `d` consecutive delays.
    pub fn strong_delay(&self, s: usize, d: usize) -> BTreeSet<usize> {
        let mut cur: BTreeSet<usize> = [s].into();
        for _ in 0..d {
            cur = cur
                .iter()
                .flat_map(|&b| self.edges[b].iter().filter(|(l, _)| *l == RLabel::Delay).map(|(_, t)| *t))
                .collect();
        }
        cur
    }
}

/// Greatest simulation over the full product of the two reachable graphs,
/// refined naively until stable. Delays of length one to `max_delay` are
/// each required to be matched. `None` when the abstract side uses an
/// action the concrete side does not declare.
pub fn brute_force_simulation(concrete: &Automaton, abstract_: &Automaton, max_delay: usize) -> Option<bool> {
    let known: BTreeSet<&str> = concrete.actions.iter().map(|d| d.name.as_str()).collect();
    if abstract_.actions.iter().any(|d| !known.contains(d.name.as_str())) {
        return None;
    }
    let selected: BTreeSet<&str> = abstract_.actions.iter().map(|d| d.name.as_str()).collect();
    let gc = Graph::explore(concrete, 3);
    let ga = Graph::explore(abstract_, 3);

    let mut alive: Vec<Vec<bool>> = (0..gc.states.len())
        .map(|c| (0..ga.states.len()).map(|a| gc.error[c] == ga.error[a]).collect())
        .collect();
    let mut memo: HashMap<(usize, RLabel), BTreeSet<usize>> = HashMap::new();
    let mut delay_memo: HashMap<(usize, usize), BTreeSet<usize>> = HashMap::new();
    loop {
        let mut changed = false;
        for c in 0..gc.states.len() {
            for a in 0..ga.states.len() {
                if !alive[c][a] {
                    continue;
                }
                let mut ok = true;
                for (l, c2) in &gc.edges[c] {
                    let targets = match l {
                        RLabel::In(n) | RLabel::Out(n) if selected.contains(n.as_str()) => {
                            memo.entry((a, l.clone())).or_insert_with(|| ga.weak(a, l)).clone()
                        }
                        RLabel::Delay => continue,
                        _ => memo.entry((a, RLabel::Tau)).or_insert_with(|| ga.weak_delay(a, 0)).clone(),
                    };
                    if !targets.iter().any(|&a2| alive[*c2][a2]) {
                        ok = false;
                        break;
                    }
                }
                for d in 1..=max_delay {
                    if !ok {
                        break;
                    }
                    let targets = delay_memo.entry((a, d)).or_insert_with(|| ga.weak_delay(a, d)).clone();
                    for c2 in gc.strong_delay(c, d) {
                        if !targets.iter().any(|&a2| alive[c2][a2]) {
                            ok = false;
                            break;
                        }
                    }
                }
                if !ok {
                    alive[c][a] = false;
                    changed = true;
                }
            }
        }
        if !changed {
            return Some(alive[0][0]);
        }
    }
}
