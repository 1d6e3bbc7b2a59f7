//! Discrete-time operational semantics.
//!
//! Time advances in unit quanta. A state is a flat vector of integers; for a
//! single automaton the layout is `[location, clocks.., vars..]` and a
//! composition concatenates the vectors of its parts, so nested and flat
//! compositions of the same automata produce identical states.
//!
//! Clocks that only appear in comparisons against constants are clamped at
//! one above the largest constant they are compared with; beyond that value
//! every atom evaluates the same, so the clamp is exact and keeps the state
//! space finite. Clocks used in difference constraints are not clamped.

use std::collections::{HashSet, VecDeque};
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::model::{
    incompatibility, validate, ActionKind, Alphabet, AssignValue, Automaton, CmpOp, Constraint, Diagnostic, Direction,
    Incompatibility, Term,
};

/// A transition label. Action ids index the owning system's [`Alphabet`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Label {
    Input(u32),
    Output(u32),
    Internal,
    /// Delay by the given number of quanta. Only unit delays are generated by
    /// `successors`; longer delays arise in weak moves.
    Delay(u32),
}

impl Label {
    pub fn action(self) -> Option<u32> {
        match self {
            Label::Input(a) | Label::Output(a) => Some(a),
            _ => None,
        }
    }

    /// Render with action names resolved against `alpha`.
    pub fn display(self, alpha: &Alphabet) -> String {
        match self {
            Label::Input(a) => format!("{}?", alpha.name(a as usize)),
            Label::Output(a) => format!("{}!", alpha.name(a as usize)),
            Label::Internal => "tau".to_owned(),
            Label::Delay(d) => format!("delay({d})"),
        }
    }
}

/// Successor buffer filled by [`TransitionSystem::successors`]. States are
/// stored back to back with a fixed stride.
#[derive(Debug, Default, Clone)]
pub struct Successors {
    width: usize,
    labels: Vec<Label>,
    data: Vec<i32>,
    /// Scratch buffers for composite systems; kept here so repeated calls do
    /// not allocate.
    pool: Vec<Successors>,
}

impl Successors {
    pub fn new(width: usize) -> Self {
        Successors {
            width,
            ..Successors::default()
        }
    }

    pub fn reset(&mut self, width: usize) {
        self.width = width;
        self.labels.clear();
        self.data.clear();
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn label(&self, i: usize) -> Label {
        self.labels[i]
    }

    pub fn state(&self, i: usize) -> &[i32] {
        &self.data[i * self.width..(i + 1) * self.width]
    }

    pub fn push(&mut self, label: Label, state: &[i32]) {
        debug_assert_eq!(state.len(), self.width);
        self.labels.push(label);
        self.data.extend_from_slice(state);
    }

    /// Append a copy of `base` and return it for in-place modification.
    pub fn push_copy(&mut self, label: Label, base: &[i32]) -> &mut [i32] {
        self.push(label, base);
        let n = self.data.len();
        &mut self.data[n - self.width..]
    }

    pub fn iter(&self) -> impl Iterator<Item = (Label, &[i32])> + '_ {
        self.labels.iter().copied().zip(self.data.chunks_exact(self.width.max(1)))
    }
}

/// A lazily explored timed I/O transition system.
pub trait TransitionSystem: Send + Sync {
    fn name(&self) -> &str;
    fn width(&self) -> usize;
    fn initial(&self) -> Vec<i32>;
    /// Append every successor of `s` to `out`. `out` is reset first.
    fn successors(&self, s: &[i32], out: &mut Successors);
    fn is_error(&self, s: &[i32]) -> bool;
    fn alphabet(&self) -> &Alphabet;
    /// `(automaton, location)` for each component.
    fn locations(&self, s: &[i32]) -> Vec<(String, String)>;
    /// Qualified clock and variable values.
    fn valuation(&self, s: &[i32]) -> Vec<(String, i64)>;
    /// Number of component automata.
    fn components(&self) -> usize {
        1
    }
}

/// Human-readable rendering of one state.
pub fn describe_state(ts: &dyn TransitionSystem, s: &[i32]) -> String {
    let locs = ts
        .locations(s)
        .into_iter()
        .map(|(a, l)| format!("{a}@{l}"))
        .collect::<Vec<_>>()
        .join(" ");
    let vals = ts
        .valuation(s)
        .into_iter()
        .map(|(n, v)| format!("{n}={v}"))
        .collect::<Vec<_>>()
        .join(" ");
    if vals.is_empty() {
        locs
    } else {
        format!("{locs} | {vals}")
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SemanticsError {
    #[error("automaton `{automaton}` is invalid: {}", .diagnostics.iter().map(|d| d.to_string()).collect::<Vec<_>>().join("; "))]
    Invalid {
        automaton: String,
        diagnostics: Vec<Diagnostic>,
    },
    #[error("automaton `{automaton}`: constant {value} ({value_us}us) is not a multiple of the {quantum_us}us quantum")]
    QuantumMismatch {
        automaton: String,
        value: i64,
        value_us: i64,
        quantum_us: u64,
    },
    #[error("cannot compose `{left}` with `{right}`: {reason}")]
    Incompatible {
        left: String,
        right: String,
        reason: Incompatibility,
    },
}

#[derive(Debug, Clone, Copy)]
enum Operand {
    Slot(usize),
    Diff(usize, usize),
}

#[derive(Debug, Clone, Copy)]
struct CAtom {
    lhs: Operand,
    op: CmpOp,
    value: i64,
}

impl CAtom {
    #[inline]
    fn holds(&self, s: &[i32]) -> bool {
        let lhs = match self.lhs {
            Operand::Slot(i) => s[i] as i64,
            Operand::Diff(i, j) => s[i] as i64 - s[j] as i64,
        };
        self.op.holds(lhs, self.value)
    }
}

#[inline]
fn all_hold(atoms: &[CAtom], s: &[i32]) -> bool {
    atoms.iter().all(|a| a.holds(s))
}

#[derive(Debug, Clone, Copy)]
enum CAssign {
    Set(usize, i32),
    Add { slot: usize, delta: i64, lo: i64, hi: i64 },
}

#[derive(Debug, Clone)]
struct CEdge {
    to: usize,
    guard: Vec<CAtom>,
    label: Label,
    assigns: Vec<CAssign>,
}

#[derive(Debug, Clone)]
struct CLocation {
    name: String,
    invariant: Vec<CAtom>,
    /// Per-clock rate, indexed like the clocks.
    rates: Vec<u8>,
    error: bool,
    edges: Vec<CEdge>,
    /// True when every rate is zero; the valuation cannot change by delaying.
    frozen: bool,
}

/// The transition system of a single automaton.
#[derive(Debug, Clone)]
pub struct AutomatonTs {
    name: String,
    alphabet: Alphabet,
    clocks: Vec<String>,
    vars: Vec<String>,
    /// Clamp value per clock; `None` for clocks in difference constraints.
    ceilings: Vec<Option<i32>>,
    locations: Vec<CLocation>,
    initial: Vec<i32>,
    broadcast_inputs: Vec<u32>,
}

/// Give semantics to `a` at the given quantum. Constants of automata without
/// a time unit are taken to be in quanta already.
pub fn semantics_of(a: &Automaton, quantum_us: u64) -> Result<AutomatonTs, SemanticsError> {
    AutomatonTs::build(a, quantum_us)
}

impl AutomatonTs {
    /// Semantics with constants read directly as quanta.
    pub fn new(a: &Automaton) -> Result<AutomatonTs, SemanticsError> {
        let mut a = a.clone();
        a.time_unit_us = None;
        AutomatonTs::build(&a, 1)
    }

    fn build(a: &Automaton, quantum_us: u64) -> Result<AutomatonTs, SemanticsError> {
        let diagnostics = validate(a);
        if !diagnostics.is_empty() {
            return Err(SemanticsError::Invalid {
                automaton: a.name.clone(),
                diagnostics,
            });
        }
        let nclocks = a.clocks.len();
        let clock_slot = |name: &str| a.clocks.iter().position(|c| c == name).map(|i| 1 + i);
        let var_index = |name: &str| a.vars.iter().position(|v| v.name == name);
        let slot_of = |name: &str| clock_slot(name).or_else(|| var_index(name).map(|i| 1 + nclocks + i));

        let scale = |value: i64| -> Result<i64, SemanticsError> {
            match a.time_unit_us {
                None => Ok(value),
                Some(unit) => {
                    let us = value * unit as i64;
                    if us % quantum_us as i64 != 0 {
                        return Err(SemanticsError::QuantumMismatch {
                            automaton: a.name.clone(),
                            value,
                            value_us: us,
                            quantum_us,
                        });
                    }
                    Ok(us / quantum_us as i64)
                }
            }
        };

        let mut max_const = vec![0i64; nclocks];
        let mut diagonal = vec![false; nclocks];
        let mut compile = |c: &Constraint| -> Result<Vec<CAtom>, SemanticsError> {
            let mut out = Vec::with_capacity(c.atoms.len());
            for atom in &c.atoms {
                let catom = match &atom.term {
                    Term::Name(n) => match clock_slot(n) {
                        Some(slot) => {
                            let v = scale(atom.value)?;
                            max_const[slot - 1] = max_const[slot - 1].max(v);
                            CAtom {
                                lhs: Operand::Slot(slot),
                                op: atom.op,
                                value: v,
                            }
                        }
                        None => CAtom {
                            lhs: Operand::Slot(slot_of(n).expect("validated")),
                            op: atom.op,
                            value: atom.value,
                        },
                    },
                    Term::Diff(l, r) => {
                        let (i, j) = (clock_slot(l).expect("validated"), clock_slot(r).expect("validated"));
                        diagonal[i - 1] = true;
                        diagonal[j - 1] = true;
                        CAtom {
                            lhs: Operand::Diff(i, j),
                            op: atom.op,
                            value: scale(atom.value)?,
                        }
                    }
                };
                out.push(catom);
            }
            Ok(out)
        };

        let alphabet = a.alphabet();
        let loc_index = |name: &str| a.locations.iter().position(|l| l.name == name).expect("validated");
        let mut locations = Vec::with_capacity(a.locations.len());
        for l in &a.locations {
            let rates: Vec<u8> = a.clocks.iter().map(|c| l.rate(c)).collect();
            locations.push(CLocation {
                name: l.name.clone(),
                invariant: compile(&l.invariant)?,
                frozen: rates.iter().all(|r| *r == 0),
                rates,
                error: l.error,
                edges: Vec::new(),
            });
        }
        for e in &a.edges {
            let guard = compile(&e.guard)?;
            let label = match &e.sync {
                None => Label::Internal,
                Some(sync) => {
                    let id = alphabet.id(&sync.action).expect("validated") as u32;
                    match sync.dir {
                        Direction::Input => Label::Input(id),
                        Direction::Output => Label::Output(id),
                    }
                }
            };
            let mut assigns = Vec::new();
            for asg in &e.update.assignments {
                if let Some(slot) = clock_slot(&asg.target) {
                    assigns.push(CAssign::Set(slot, 0));
                    continue;
                }
                let vi = var_index(&asg.target).expect("validated");
                let decl = &a.vars[vi];
                let slot = 1 + nclocks + vi;
                assigns.push(match asg.value {
                    AssignValue::Const(n) => CAssign::Set(slot, n as i32),
                    AssignValue::Offset(d) => CAssign::Add {
                        slot,
                        delta: d,
                        lo: decl.lo,
                        hi: decl.hi,
                    },
                });
            }
            let from = loc_index(&e.from);
            locations[from].edges.push(CEdge {
                to: loc_index(&e.to),
                guard,
                label,
                assigns,
            });
        }
        let ceilings = (0..nclocks)
            .map(|i| (!diagonal[i]).then(|| (max_const[i].max(0) + 1).min(i32::MAX as i64 / 2) as i32))
            .collect();
        let mut initial = vec![0i32; 1 + nclocks + a.vars.len()];
        initial[0] = loc_index(&a.initial) as i32;
        for (i, v) in a.vars.iter().enumerate() {
            initial[1 + nclocks + i] = v.init as i32;
        }
        let broadcast_inputs = alphabet
            .actions
            .iter()
            .enumerate()
            .filter(|(_, x)| x.input && x.kind == ActionKind::Broadcast)
            .map(|(i, _)| i as u32)
            .collect();
        Ok(AutomatonTs {
            name: a.name.clone(),
            alphabet,
            clocks: a.clocks.clone(),
            vars: a.vars.iter().map(|v| v.name.clone()).collect(),
            ceilings,
            locations,
            initial,
            broadcast_inputs,
        })
    }

    pub fn location_name(&self, s: &[i32]) -> &str {
        &self.locations[s[0] as usize].name
    }

    pub fn location_index(&self, name: &str) -> Option<usize> {
        self.locations.iter().position(|l| l.name == name)
    }

    fn apply(&self, edge: &CEdge, s: &[i32], out: &mut Successors) {
        let t = out.push_copy(edge.label, s);
        t[0] = edge.to as i32;
        for asg in &edge.assigns {
            match *asg {
                CAssign::Set(slot, v) => t[slot] = v,
                CAssign::Add { slot, delta, lo, hi } => t[slot] = (t[slot] as i64 + delta).clamp(lo, hi) as i32,
            }
        }
    }
}

impl TransitionSystem for AutomatonTs {
    fn name(&self) -> &str {
        &self.name
    }

    fn width(&self) -> usize {
        self.initial.len()
    }

    fn initial(&self) -> Vec<i32> {
        self.initial.clone()
    }

    fn successors(&self, s: &[i32], out: &mut Successors) {
        out.reset(self.initial.len());
        let loc = &self.locations[s[0] as usize];
        for edge in &loc.edges {
            if !all_hold(&edge.guard, s) {
                continue;
            }
            self.apply(edge, s, out);
            let n = out.len();
            let target = &self.locations[edge.to];
            if !all_hold(&target.invariant, out.state(n - 1)) {
                out.labels.pop();
                let w = out.width;
                out.data.truncate(out.data.len() - w);
            }
        }
        for &a in &self.broadcast_inputs {
            if !out.labels.contains(&Label::Input(a)) {
                out.push(Label::Input(a), s);
            }
        }
        let w = out.width;
        let start = out.data.len();
        out.data.extend_from_slice(s);
        if !loc.frozen {
            for (i, &rate) in loc.rates.iter().enumerate() {
                if rate == 1 {
                    let v = &mut out.data[start + 1 + i];
                    *v = match self.ceilings[i] {
                        Some(c) => (*v + 1).min(c),
                        None => v.saturating_add(1),
                    };
                }
            }
        }
        if all_hold(&loc.invariant, &out.data[start..start + w]) {
            out.labels.push(Label::Delay(1));
        } else {
            out.data.truncate(start);
        }
    }

    fn is_error(&self, s: &[i32]) -> bool {
        self.locations[s[0] as usize].error
    }

    fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    fn locations(&self, s: &[i32]) -> Vec<(String, String)> {
        vec![(self.name.clone(), self.location_name(s).to_owned())]
    }

    fn valuation(&self, s: &[i32]) -> Vec<(String, i64)> {
        let mut out = Vec::with_capacity(s.len() - 1);
        for (i, c) in self.clocks.iter().enumerate() {
            out.push((format!("{}.{c}", self.name), s[1 + i] as i64));
        }
        for (i, v) in self.vars.iter().enumerate() {
            out.push((format!("{}.{v}", self.name), s[1 + self.clocks.len() + i] as i64));
        }
        out
    }
}

/// Parallel composition of any number of pairwise compatible systems.
pub struct Composite {
    name: String,
    parts: Vec<Arc<dyn TransitionSystem>>,
    offsets: Vec<usize>,
    width: usize,
    alphabet: Alphabet,
    /// Local action id to composite action id, per part.
    to_global: Vec<Vec<u32>>,
    /// Composite action id to the local id in each part (`u32::MAX` if absent).
    to_local: Vec<Vec<u32>>,
    receivers: Vec<Vec<usize>>,
    external_inputs: Vec<u32>,
}

impl fmt::Debug for Composite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Composite")
            .field("name", &self.name)
            .field("parts", &self.parts.iter().map(|p| p.name().to_owned()).collect::<Vec<_>>())
            .finish()
    }
}

/// Compose `parts` in parallel, checking pairwise compatibility.
pub fn compose(parts: Vec<Arc<dyn TransitionSystem>>) -> Result<Composite, SemanticsError> {
    let name = parts.iter().map(|p| p.name()).collect::<Vec<_>>().join(" || ");
    Composite::with_name(name, parts)
}

impl Composite {
    pub fn with_name(name: impl Into<String>, parts: Vec<Arc<dyn TransitionSystem>>) -> Result<Composite, SemanticsError> {
        for i in 0..parts.len() {
            for j in i + 1..parts.len() {
                if let Some(reason) = incompatibility(parts[i].alphabet(), parts[j].alphabet()) {
                    return Err(SemanticsError::Incompatible {
                        left: parts[i].name().to_owned(),
                        right: parts[j].name().to_owned(),
                        reason,
                    });
                }
            }
        }
        let mut alphabet = Alphabet::default();
        let mut to_global = Vec::with_capacity(parts.len());
        for p in &parts {
            to_global.push(
                p.alphabet()
                    .actions
                    .iter()
                    .map(|a| alphabet.intern(&a.name, a.kind) as u32)
                    .collect::<Vec<_>>(),
            );
        }
        let n = alphabet.len();
        let mut sender = vec![None; n];
        let mut receivers = vec![Vec::new(); n];
        let mut to_local = vec![vec![u32::MAX; parts.len()]; n];
        for (k, p) in parts.iter().enumerate() {
            for (local, a) in p.alphabet().actions.iter().enumerate() {
                let g = to_global[k][local] as usize;
                to_local[g][k] = local as u32;
                if a.output {
                    sender[g] = Some(k);
                }
                if a.input {
                    receivers[g].push(k);
                }
            }
        }
        for (g, info) in alphabet.actions.iter_mut().enumerate() {
            info.output = sender[g].is_some();
            info.input = receivers[g]
                .iter()
                .any(|&k| info.kind == ActionKind::Unicast || sender[g].is_none_or(|s| s == k));
        }
        let external_inputs = (0..n)
            .filter(|&g| sender[g].is_none() && !receivers[g].is_empty())
            .map(|g| g as u32)
            .collect();
        let mut offsets = Vec::with_capacity(parts.len());
        let mut width = 0;
        for p in &parts {
            offsets.push(width);
            width += p.width();
        }
        Ok(Composite {
            name: name.into(),
            parts,
            offsets,
            width,
            alphabet,
            to_global,
            to_local,
            receivers,
            external_inputs,
        })
    }

    pub fn parts(&self) -> &[Arc<dyn TransitionSystem>] {
        &self.parts
    }

    fn slice<'a>(&self, k: usize, s: &'a [i32]) -> &'a [i32] {
        &s[self.offsets[k]..self.offsets[k] + self.parts[k].width()]
    }

    /// The slots of part `k` inside composite state `s`.
    pub fn part_state<'a>(&self, k: usize, s: &'a [i32]) -> &'a [i32] {
        self.slice(k, s)
    }

    /// Emit every combination of the chosen local successors, starting from
    /// `base` (which already carries the fixed parts).
    fn product(&self, bufs: &[Successors], choices: &[(usize, Vec<usize>)], label: Label, base: &mut [i32], out: &mut Successors) {
        fn rec(
            c: &Composite,
            bufs: &[Successors],
            choices: &[(usize, Vec<usize>)],
            depth: usize,
            label: Label,
            base: &mut [i32],
            out: &mut Successors,
        ) {
            if depth == choices.len() {
                out.push(label, base);
                return;
            }
            let (k, ref idxs) = choices[depth];
            let off = c.offsets[k];
            let w = c.parts[k].width();
            for &i in idxs {
                base[off..off + w].copy_from_slice(bufs[k].state(i));
                rec(c, bufs, choices, depth + 1, label, base, out);
            }
        }
        if choices.iter().any(|(_, v)| v.is_empty()) {
            return;
        }
        rec(self, bufs, choices, 0, label, base, out);
    }

    fn matching(buf: &Successors, label: Label) -> Vec<usize> {
        (0..buf.len()).filter(|&i| buf.label(i) == label).collect()
    }
}

impl TransitionSystem for Composite {
    fn name(&self) -> &str {
        &self.name
    }

    fn width(&self) -> usize {
        self.width
    }

    fn initial(&self) -> Vec<i32> {
        let mut s = Vec::with_capacity(self.width);
        for p in &self.parts {
            s.extend(p.initial());
        }
        s
    }

    fn successors(&self, s: &[i32], out: &mut Successors) {
        out.reset(self.width);
        let mut bufs = std::mem::take(&mut out.pool);
        bufs.resize_with(self.parts.len().max(bufs.len()), Successors::default);
        for (k, p) in self.parts.iter().enumerate() {
            p.successors(self.slice(k, s), &mut bufs[k]);
        }
        let mut base = s.to_vec();

        // independent internal moves
        for (buf, &off) in bufs.iter().zip(&self.offsets) {
            for (label, t) in buf.iter() {
                if label == Label::Internal {
                    out.push_copy(Label::Internal, s)[off..off + t.len()].copy_from_slice(t);
                }
            }
        }

        // outputs, synchronised with their receivers
        for k in 0..self.parts.len() {
            for i in 0..bufs[k].len() {
                let Label::Output(local) = bufs[k].label(i) else { continue };
                let g = self.to_global[k][local as usize] as usize;
                let kind = self.alphabet.actions[g].kind;
                let listeners: Vec<usize> = self.receivers[g].iter().copied().filter(|&r| r != k).collect();
                let mut choices = vec![(k, vec![i])];
                for &r in &listeners {
                    choices.push((r, Self::matching(&bufs[r], Label::Input(self.to_local[g][r]))));
                }
                let label = match kind {
                    ActionKind::Broadcast => Label::Output(g as u32),
                    ActionKind::Unicast if listeners.is_empty() => Label::Output(g as u32),
                    ActionKind::Unicast => Label::Internal,
                };
                base.copy_from_slice(s);
                self.product(&bufs, &choices, label, &mut base, out);
            }
        }

        // inputs from outside the composition
        for &g in &self.external_inputs {
            let g = g as usize;
            let choices: Vec<(usize, Vec<usize>)> = self.receivers[g]
                .iter()
                .map(|&r| (r, Self::matching(&bufs[r], Label::Input(self.to_local[g][r]))))
                .collect();
            base.copy_from_slice(s);
            self.product(&bufs, &choices, Label::Input(g as u32), &mut base, out);
        }

        // unit delay of every part
        let delays: Vec<(usize, Vec<usize>)> = (0..self.parts.len())
            .map(|k| (k, Self::matching(&bufs[k], Label::Delay(1))))
            .collect();
        base.copy_from_slice(s);
        self.product(&bufs, &delays, Label::Delay(1), &mut base, out);

        out.pool = bufs;
    }

    fn is_error(&self, s: &[i32]) -> bool {
        self.parts.iter().enumerate().any(|(k, p)| p.is_error(self.slice(k, s)))
    }

    fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    fn locations(&self, s: &[i32]) -> Vec<(String, String)> {
        self.parts
            .iter()
            .enumerate()
            .flat_map(|(k, p)| p.locations(self.slice(k, s)))
            .collect()
    }

    fn valuation(&self, s: &[i32]) -> Vec<(String, i64)> {
        self.parts
            .iter()
            .enumerate()
            .flat_map(|(k, p)| p.valuation(self.slice(k, s)))
            .collect()
    }

    fn components(&self) -> usize {
        self.parts.iter().map(|p| p.components()).sum()
    }
}

/// What a weak move must achieve.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum WeakMove {
    /// Reflexive-transitive closure of internal steps.
    Zero,
    /// `tau* label tau*` for an input or output label.
    Action(Label),
    /// Internal steps interleaved with unit delays summing to `d`.
    Delay(u32),
}

fn tau_closure(ts: &dyn TransitionSystem, seeds: Vec<Vec<i32>>, buf: &mut Successors) -> Vec<Vec<i32>> {
    let mut seen: HashSet<Vec<i32>> = seeds.iter().cloned().collect();
    let mut queue: VecDeque<Vec<i32>> = seeds.into();
    let mut out = Vec::new();
    while let Some(s) = queue.pop_front() {
        ts.successors(&s, buf);
        for (label, t) in buf.iter() {
            if label == Label::Internal && !seen.contains(t) {
                seen.insert(t.to_vec());
                queue.push_back(t.to_vec());
            }
        }
        out.push(s);
    }
    out
}

/// All states reachable from `s` by the weak move `mv`, sorted.
pub fn weak_successors(ts: &dyn TransitionSystem, s: &[i32], mv: WeakMove) -> Vec<Vec<i32>> {
    let mut buf = Successors::new(ts.width());
    let mut result = match mv {
        WeakMove::Zero => tau_closure(ts, vec![s.to_vec()], &mut buf),
        WeakMove::Action(label) => {
            let before = tau_closure(ts, vec![s.to_vec()], &mut buf);
            let mut mid = Vec::new();
            let mut seen = HashSet::new();
            for b in &before {
                ts.successors(b, &mut buf);
                for (l, t) in buf.iter() {
                    if l == label && seen.insert(t.to_vec()) {
                        mid.push(t.to_vec());
                    }
                }
            }
            tau_closure(ts, mid, &mut buf)
        }
        WeakMove::Delay(d) => {
            let mut seen: HashSet<(Vec<i32>, u32)> = HashSet::new();
            let mut queue = VecDeque::new();
            seen.insert((s.to_vec(), 0));
            queue.push_back((s.to_vec(), 0u32));
            let mut out = Vec::new();
            while let Some((x, e)) = queue.pop_front() {
                ts.successors(&x, &mut buf);
                for (l, t) in buf.iter() {
                    let next = match l {
                        Label::Internal => e,
                        Label::Delay(k) if e + k <= d => e + k,
                        _ => continue,
                    };
                    let key = (t.to_vec(), next);
                    if !seen.contains(&key) {
                        seen.insert(key.clone());
                        queue.push_back(key);
                    }
                }
                if e == d {
                    out.push(x);
                }
            }
            out
        }
    };
    result.sort();
    result.dedup();
    result
}

/// Wrap anything implementing the trait into a shareable handle.
pub fn shared<T: TransitionSystem + 'static>(ts: T) -> Arc<dyn TransitionSystem> {
    Arc::new(ts)
}
