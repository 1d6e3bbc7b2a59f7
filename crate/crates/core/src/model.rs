//! Stopwatch automata with I/O actions.
//!
//! An [`Automaton`] is kept in symbolic form: guards, invariants and updates
//! refer to clocks and variables by name. [`validate`] checks that every name
//! resolves and that the structural side conditions hold; the `semantics`
//! module compiles a validated automaton into index form.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};

/// Comparison operator of a constraint atom.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CmpOp {
    Lt,
    Le,
    Eq,
    Ge,
    Gt,
}

impl CmpOp {
    #[inline]
    pub fn holds(self, lhs: i64, rhs: i64) -> bool {
        match self {
            CmpOp::Lt => lhs < rhs,
            CmpOp::Le => lhs <= rhs,
            CmpOp::Eq => lhs == rhs,
            CmpOp::Ge => lhs >= rhs,
            CmpOp::Gt => lhs > rhs,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            CmpOp::Lt => "<",
            CmpOp::Le => "<=",
            CmpOp::Eq => "==",
            CmpOp::Ge => ">=",
            CmpOp::Gt => ">",
        }
    }
}

/// Left-hand side of an atom: a single clock/variable or a clock difference.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Term {
    Name(String),
    Diff(String, String),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Atom {
    pub term: Term,
    pub op: CmpOp,
    pub value: i64,
}

impl Atom {
    pub fn new(name: impl Into<String>, op: CmpOp, value: i64) -> Self {
        Atom {
            term: Term::Name(name.into()),
            op,
            value,
        }
    }

    pub fn diff(left: impl Into<String>, right: impl Into<String>, op: CmpOp, value: i64) -> Self {
        Atom {
            term: Term::Diff(left.into(), right.into()),
            op,
            value,
        }
    }
}

/// A conjunction of atoms. The empty conjunction is `true`.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Constraint {
    pub atoms: Vec<Atom>,
}

impl Constraint {
    pub fn tt() -> Self {
        Constraint::default()
    }

    pub fn is_true(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn and(mut self, atom: Atom) -> Self {
        self.atoms.push(atom);
        self
    }

    pub fn atom(name: impl Into<String>, op: CmpOp, value: i64) -> Self {
        Constraint::tt().and(Atom::new(name, op, value))
    }
}

impl From<Vec<Atom>> for Constraint {
    fn from(atoms: Vec<Atom>) -> Self {
        Constraint { atoms }
    }
}

/// Right-hand side of an assignment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum AssignValue {
    /// `target := n`
    Const(i64),
    /// `target := target + n` (negative `n` decrements); clamped to the variable range.
    Offset(i64),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Assignment {
    pub target: String,
    pub value: AssignValue,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Update {
    pub assignments: Vec<Assignment>,
}

impl Update {
    pub fn none() -> Self {
        Update::default()
    }

    pub fn is_empty(&self) -> bool {
        self.assignments.is_empty()
    }

    pub fn set(mut self, target: impl Into<String>, value: i64) -> Self {
        self.assignments.push(Assignment {
            target: target.into(),
            value: AssignValue::Const(value),
        });
        self
    }

    pub fn reset(self, clock: impl Into<String>) -> Self {
        self.set(clock, 0)
    }

    pub fn add(mut self, target: impl Into<String>, delta: i64) -> Self {
        self.assignments.push(Assignment {
            target: target.into(),
            value: AssignValue::Offset(delta),
        });
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ActionKind {
    Unicast,
    Broadcast,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Input,
    Output,
}

impl Direction {
    pub fn suffix(self) -> char {
        match self {
            Direction::Input => '?',
            Direction::Output => '!',
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ActionDecl {
    pub name: String,
    pub kind: ActionKind,
    pub dir: Direction,
}

/// The synchronisation label of an edge: `a!` or `a?`. Edges without one are internal.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SyncRef {
    pub action: String,
    pub dir: Direction,
}

impl SyncRef {
    pub fn output(action: impl Into<String>) -> Self {
        SyncRef {
            action: action.into(),
            dir: Direction::Output,
        }
    }

    pub fn input(action: impl Into<String>) -> Self {
        SyncRef {
            action: action.into(),
            dir: Direction::Input,
        }
    }
}

impl fmt::Display for SyncRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", self.action, self.dir.suffix())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Location {
    pub name: String,
    pub invariant: Constraint,
    /// Clock rates in this location. Clocks not listed run at rate 1.
    pub rates: BTreeMap<String, u8>,
    pub error: bool,
}

impl Location {
    pub fn new(name: impl Into<String>) -> Self {
        Location {
            name: name.into(),
            invariant: Constraint::tt(),
            rates: BTreeMap::new(),
            error: false,
        }
    }

    pub fn with_invariant(mut self, inv: Constraint) -> Self {
        self.invariant = inv;
        self
    }

    pub fn stopped(mut self, clock: impl Into<String>) -> Self {
        self.rates.insert(clock.into(), 0);
        self
    }

    pub fn error(mut self) -> Self {
        self.error = true;
        self
    }

    pub fn rate(&self, clock: &str) -> u8 {
        self.rates.get(clock).copied().unwrap_or(1)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Edge {
    pub from: String,
    pub to: String,
    pub guard: Constraint,
    pub sync: Option<SyncRef>,
    pub update: Update,
}

impl Edge {
    pub fn new(from: impl Into<String>, to: impl Into<String>) -> Self {
        Edge {
            from: from.into(),
            to: to.into(),
            guard: Constraint::tt(),
            sync: None,
            update: Update::none(),
        }
    }

    pub fn guard(mut self, guard: Constraint) -> Self {
        self.guard = guard;
        self
    }

    pub fn when(mut self, name: impl Into<String>, op: CmpOp, value: i64) -> Self {
        self.guard.atoms.push(Atom::new(name, op, value));
        self
    }

    pub fn sync(mut self, sync: SyncRef) -> Self {
        self.sync = Some(sync);
        self
    }

    pub fn emit(self, action: impl Into<String>) -> Self {
        self.sync(SyncRef::output(action))
    }

    pub fn recv(self, action: impl Into<String>) -> Self {
        self.sync(SyncRef::input(action))
    }

    pub fn update(mut self, update: Update) -> Self {
        self.update = update;
        self
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VarDecl {
    pub name: String,
    pub lo: i64,
    pub hi: i64,
    pub init: i64,
}

impl VarDecl {
    pub fn new(name: impl Into<String>, lo: i64, hi: i64, init: i64) -> Self {
        VarDecl {
            name: name.into(),
            lo,
            hi,
            init,
        }
    }
}

/// A stopwatch automaton with a declared action signature.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Automaton {
    pub name: String,
    pub clocks: Vec<String>,
    pub vars: Vec<VarDecl>,
    pub actions: Vec<ActionDecl>,
    pub locations: Vec<Location>,
    pub initial: String,
    pub edges: Vec<Edge>,
    /// Size of one model time unit in microseconds. `None` means constants are
    /// already expressed in analysis quanta.
    pub time_unit_us: Option<u64>,
}

impl Automaton {
    pub fn new(name: impl Into<String>) -> Self {
        Automaton {
            name: name.into(),
            clocks: Vec::new(),
            vars: Vec::new(),
            actions: Vec::new(),
            locations: Vec::new(),
            initial: String::new(),
            edges: Vec::new(),
            time_unit_us: None,
        }
    }

    pub fn clock(&mut self, name: impl Into<String>) -> &mut Self {
        self.clocks.push(name.into());
        self
    }

    pub fn var(&mut self, decl: VarDecl) -> &mut Self {
        self.vars.push(decl);
        self
    }

    pub fn action(&mut self, name: impl Into<String>, kind: ActionKind, dir: Direction) -> &mut Self {
        self.actions.push(ActionDecl {
            name: name.into(),
            kind,
            dir,
        });
        self
    }

    pub fn location(&mut self, loc: Location) -> &mut Self {
        if self.locations.is_empty() && self.initial.is_empty() {
            self.initial = loc.name.clone();
        }
        self.locations.push(loc);
        self
    }

    pub fn edge(&mut self, edge: Edge) -> &mut Self {
        self.edges.push(edge);
        self
    }

    pub fn location_named(&self, name: &str) -> Option<&Location> {
        self.locations.iter().find(|l| l.name == name)
    }

    pub fn error_locations(&self) -> impl Iterator<Item = &Location> {
        self.locations.iter().filter(|l| l.error)
    }

    pub fn inputs(&self) -> BTreeSet<&str> {
        self.actions
            .iter()
            .filter(|a| a.dir == Direction::Input)
            .map(|a| a.name.as_str())
            .collect()
    }

    pub fn outputs(&self) -> BTreeSet<&str> {
        self.actions
            .iter()
            .filter(|a| a.dir == Direction::Output)
            .map(|a| a.name.as_str())
            .collect()
    }

    /// The action signature as an [`Alphabet`].
    pub fn alphabet(&self) -> Alphabet {
        let mut alpha = Alphabet::default();
        for decl in &self.actions {
            let id = alpha.intern(&decl.name, decl.kind);
            match decl.dir {
                Direction::Input => alpha.actions[id].input = true,
                Direction::Output => alpha.actions[id].output = true,
            }
        }
        alpha
    }
}

/// One entry of an [`Alphabet`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ActionInfo {
    pub name: String,
    pub kind: ActionKind,
    pub input: bool,
    pub output: bool,
}

/// The I/O signature of an automaton or transition system. Action ids are
/// indices into `actions` and are local to the owning system.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Alphabet {
    pub actions: Vec<ActionInfo>,
    index: HashMap<String, usize>,
}

impl Alphabet {
    pub fn intern(&mut self, name: &str, kind: ActionKind) -> usize {
        if let Some(&id) = self.index.get(name) {
            return id;
        }
        let id = self.actions.len();
        self.actions.push(ActionInfo {
            name: name.to_owned(),
            kind,
            input: false,
            output: false,
        });
        self.index.insert(name.to_owned(), id);
        id
    }

    pub fn id(&self, name: &str) -> Option<usize> {
        self.index.get(name).copied()
    }

    pub fn get(&self, name: &str) -> Option<&ActionInfo> {
        self.id(name).map(|i| &self.actions[i])
    }

    pub fn name(&self, id: usize) -> &str {
        &self.actions[id].name
    }

    pub fn len(&self) -> usize {
        self.actions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.actions.is_empty()
    }

    pub fn inputs(&self) -> impl Iterator<Item = &ActionInfo> {
        self.actions.iter().filter(|a| a.input)
    }

    pub fn outputs(&self) -> impl Iterator<Item = &ActionInfo> {
        self.actions.iter().filter(|a| a.output)
    }

    /// Names of the actions this system actually uses (inputs or outputs).
    pub fn names(&self) -> BTreeSet<&str> {
        self.actions
            .iter()
            .filter(|a| a.input || a.output)
            .map(|a| a.name.as_str())
            .collect()
    }
}

/// Why two signatures cannot be composed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Incompatibility {
    SharedOutput(String),
    SharedUnicastInput(String),
    KindMismatch(String),
}

impl fmt::Display for Incompatibility {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Incompatibility::SharedOutput(a) => write!(f, "unique-output violated: both emit `{a}`"),
            Incompatibility::SharedUnicastInput(a) => {
                write!(f, "deterministic-pair unicast violated: both receive unicast `{a}`")
            }
            Incompatibility::KindMismatch(a) => {
                write!(f, "action `{a}` is unicast in one system and broadcast in the other")
            }
        }
    }
}

/// First violated compatibility condition between two signatures, if any.
pub fn incompatibility(a: &Alphabet, b: &Alphabet) -> Option<Incompatibility> {
    for x in &a.actions {
        let Some(y) = b.get(&x.name) else { continue };
        if !(x.input || x.output) || !(y.input || y.output) {
            continue;
        }
        if x.kind != y.kind {
            return Some(Incompatibility::KindMismatch(x.name.clone()));
        }
        if x.output && y.output {
            return Some(Incompatibility::SharedOutput(x.name.clone()));
        }
        if x.input && y.input && x.kind == ActionKind::Unicast {
            return Some(Incompatibility::SharedUnicastInput(x.name.clone()));
        }
    }
    None
}

/// `O1 ∩ O2 = ∅` and `I1 ∩ I2 ∩ Σu = ∅`.
pub fn compatible(a: &Automaton, b: &Automaton) -> bool {
    incompatibility(&a.alphabet(), &b.alphabet()).is_none()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DiagnosticKind {
    UndeclaredSymbol,
    DuplicateName,
    UndeclaredAction,
    DirectionMismatch,
    BroadcastBothDirections,
    ActionKindConflict,
    UnknownLocation,
    MissingInitial,
    InitialIsError,
    InvalidRate,
    InvalidClockAssignment,
    ConflictingUpdate,
    VarOutOfRange,
    EmptyRange,
    ClockVariableMix,
    InternalActionName,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagnostic {
    pub kind: DiagnosticKind,
    /// The offending element, e.g. `edge #3 (idle -> run)` or `clock x`.
    pub element: String,
    pub message: String,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.element, self.message)
    }
}

#[derive(PartialEq, Eq, Clone, Copy)]
enum SymKind {
    Clock,
    Var,
}

struct Scope<'a> {
    symbols: HashMap<&'a str, SymKind>,
    ranges: HashMap<&'a str, (i64, i64)>,
}

impl<'a> Scope<'a> {
    fn kind(&self, name: &str) -> Option<SymKind> {
        self.symbols.get(name).copied()
    }
}

fn check_constraint(scope: &Scope, c: &Constraint, element: &str, out: &mut Vec<Diagnostic>) {
    for atom in &c.atoms {
        match &atom.term {
            Term::Name(n) => {
                if scope.kind(n).is_none() {
                    out.push(Diagnostic {
                        kind: DiagnosticKind::UndeclaredSymbol,
                        element: element.to_owned(),
                        message: format!("`{n}` is neither a declared clock nor a declared variable"),
                    });
                }
            }
            Term::Diff(l, r) => {
                for n in [l, r] {
                    match scope.kind(n) {
                        None => out.push(Diagnostic {
                            kind: DiagnosticKind::UndeclaredSymbol,
                            element: element.to_owned(),
                            message: format!("`{n}` is not a declared clock"),
                        }),
                        Some(SymKind::Var) => out.push(Diagnostic {
                            kind: DiagnosticKind::ClockVariableMix,
                            element: element.to_owned(),
                            message: format!("difference constraints range over clocks only, `{n}` is a variable"),
                        }),
                        Some(SymKind::Clock) => {}
                    }
                }
            }
        }
    }
}

/// Check every structural invariant of `a`. An empty result means the
/// automaton can be given semantics.
pub fn validate(a: &Automaton) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    let mut symbols: HashMap<&str, SymKind> = HashMap::new();
    let mut ranges = HashMap::new();

    for c in &a.clocks {
        if symbols.insert(c.as_str(), SymKind::Clock).is_some() {
            out.push(Diagnostic {
                kind: DiagnosticKind::DuplicateName,
                element: format!("clock {c}"),
                message: format!("`{c}` declared more than once"),
            });
        }
    }
    for v in &a.vars {
        if symbols.insert(v.name.as_str(), SymKind::Var).is_some() {
            out.push(Diagnostic {
                kind: DiagnosticKind::DuplicateName,
                element: format!("var {}", v.name),
                message: format!("`{}` declared more than once", v.name),
            });
        }
        if v.lo > v.hi {
            out.push(Diagnostic {
                kind: DiagnosticKind::EmptyRange,
                element: format!("var {}", v.name),
                message: format!("range [{}, {}] is empty", v.lo, v.hi),
            });
        } else if v.init < v.lo || v.init > v.hi {
            out.push(Diagnostic {
                kind: DiagnosticKind::VarOutOfRange,
                element: format!("var {}", v.name),
                message: format!("initial value {} outside [{}, {}]", v.init, v.lo, v.hi),
            });
        }
        ranges.insert(v.name.as_str(), (v.lo, v.hi));
    }
    let scope = Scope { symbols, ranges };

    // actions
    let mut decls: HashMap<&str, Vec<&ActionDecl>> = HashMap::new();
    for d in &a.actions {
        if d.name == "tau" || d.name.is_empty() {
            out.push(Diagnostic {
                kind: DiagnosticKind::InternalActionName,
                element: format!("action {}", d.name),
                message: "the internal action cannot be declared".into(),
            });
        }
        decls.entry(d.name.as_str()).or_default().push(d);
    }
    let mut names: Vec<_> = decls.keys().copied().collect();
    names.sort_unstable();
    for name in names {
        let ds = &decls[name];
        if ds.iter().any(|d| d.kind != ds[0].kind) {
            out.push(Diagnostic {
                kind: DiagnosticKind::ActionKindConflict,
                element: format!("action {name}"),
                message: "declared both unicast and broadcast".into(),
            });
        }
        let dirs: HashSet<Direction> = ds.iter().map(|d| d.dir).collect();
        if dirs.len() < ds.len() {
            out.push(Diagnostic {
                kind: DiagnosticKind::DuplicateName,
                element: format!("action {name}"),
                message: "declared more than once with the same direction".into(),
            });
        }
        if dirs.len() == 2 && ds.iter().any(|d| d.kind == ActionKind::Broadcast) {
            out.push(Diagnostic {
                kind: DiagnosticKind::BroadcastBothDirections,
                element: format!("action {name}"),
                message: "broadcast action is both input and output; I ∩ O must contain unicast actions only".into(),
            });
        }
    }

    // locations
    let mut locs = HashSet::new();
    for l in &a.locations {
        let element = format!("location {}", l.name);
        if !locs.insert(l.name.as_str()) {
            out.push(Diagnostic {
                kind: DiagnosticKind::DuplicateName,
                element: element.clone(),
                message: format!("location `{}` declared more than once", l.name),
            });
        }
        check_constraint(&scope, &l.invariant, &element, &mut out);
        for (clock, rate) in &l.rates {
            if scope.kind(clock) != Some(SymKind::Clock) {
                out.push(Diagnostic {
                    kind: DiagnosticKind::UndeclaredSymbol,
                    element: element.clone(),
                    message: format!("rate given for undeclared clock `{clock}`"),
                });
            }
            if *rate > 1 {
                out.push(Diagnostic {
                    kind: DiagnosticKind::InvalidRate,
                    element: element.clone(),
                    message: format!("rate of `{clock}` is {rate}; stopwatch rates are 0 or 1"),
                });
            }
        }
    }
    match a.location_named(&a.initial) {
        None => out.push(Diagnostic {
            kind: DiagnosticKind::MissingInitial,
            element: format!("automaton {}", a.name),
            message: format!("initial location `{}` is not declared", a.initial),
        }),
        Some(l) if l.error => out.push(Diagnostic {
            kind: DiagnosticKind::InitialIsError,
            element: format!("location {}", l.name),
            message: "the initial location cannot be an error location".into(),
        }),
        Some(_) => {}
    }

    // edges
    for (i, e) in a.edges.iter().enumerate() {
        let element = format!("edge #{i} ({} -> {})", e.from, e.to);
        for end in [&e.from, &e.to] {
            if !locs.contains(end.as_str()) {
                out.push(Diagnostic {
                    kind: DiagnosticKind::UnknownLocation,
                    element: element.clone(),
                    message: format!("location `{end}` is not declared"),
                });
            }
        }
        check_constraint(&scope, &e.guard, &element, &mut out);
        if let Some(sync) = &e.sync {
            match decls.get(sync.action.as_str()) {
                None => out.push(Diagnostic {
                    kind: DiagnosticKind::UndeclaredAction,
                    element: element.clone(),
                    message: format!("action `{}` is not declared", sync.action),
                }),
                Some(ds) if !ds.iter().any(|d| d.dir == sync.dir) => out.push(Diagnostic {
                    kind: DiagnosticKind::DirectionMismatch,
                    element: element.clone(),
                    message: format!(
                        "`{sync}` used but `{}` is not declared as an {}",
                        sync.action,
                        match sync.dir {
                            Direction::Input => "input",
                            Direction::Output => "output",
                        }
                    ),
                }),
                Some(_) => {}
            }
        }
        let mut written = HashSet::new();
        for asg in &e.update.assignments {
            if !written.insert(asg.target.as_str()) {
                out.push(Diagnostic {
                    kind: DiagnosticKind::ConflictingUpdate,
                    element: element.clone(),
                    message: format!("`{}` assigned more than once", asg.target),
                });
            }
            match scope.kind(&asg.target) {
                None => out.push(Diagnostic {
                    kind: DiagnosticKind::UndeclaredSymbol,
                    element: element.clone(),
                    message: format!("assignment to undeclared `{}`", asg.target),
                }),
                Some(SymKind::Clock) => {
                    if asg.value != AssignValue::Const(0) {
                        out.push(Diagnostic {
                            kind: DiagnosticKind::InvalidClockAssignment,
                            element: element.clone(),
                            message: format!("clock `{}` can only be reset to 0", asg.target),
                        });
                    }
                }
                Some(SymKind::Var) => {
                    if let AssignValue::Const(n) = asg.value {
                        let (lo, hi) = scope.ranges[asg.target.as_str()];
                        if n < lo || n > hi {
                            out.push(Diagnostic {
                                kind: DiagnosticKind::VarOutOfRange,
                                element: element.clone(),
                                message: format!("`{} := {n}` outside [{lo}, {hi}]", asg.target),
                            });
                        }
                    }
                }
            }
        }
    }
    out
}

/// Validate a set of automata meant to run together: each validates on its
/// own, automaton names are unique and every action name has one kind.
pub fn validate_network(automata: &[Automaton]) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    let mut names = HashSet::new();
    let mut kinds: HashMap<&str, (ActionKind, &str)> = HashMap::new();
    for a in automata {
        if !names.insert(a.name.as_str()) {
            out.push(Diagnostic {
                kind: DiagnosticKind::DuplicateName,
                element: format!("automaton {}", a.name),
                message: "automaton name used more than once".into(),
            });
        }
        for d in validate(a) {
            out.push(Diagnostic {
                element: format!("{}: {}", a.name, d.element),
                ..d
            });
        }
        for d in &a.actions {
            match kinds.get(d.name.as_str()) {
                Some((k, owner)) if *k != d.kind => out.push(Diagnostic {
                    kind: DiagnosticKind::ActionKindConflict,
                    element: format!("action {}", d.name),
                    message: format!("kind differs between `{owner}` and `{}`", a.name),
                }),
                Some(_) => {}
                None => {
                    kinds.insert(d.name.as_str(), (d.kind, a.name.as_str()));
                }
            }
        }
    }
    out
}
