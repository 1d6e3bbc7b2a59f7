//! Random automata, abstractions of them and micro DIMA systems.

use std::collections::BTreeSet;

use dimacheck::dima::config::{
    Command, LatencyBounds, ModuleSpec, PartitionSpec, PortDirection, PortKind, PortSpec, ScheduleWindow, SystemConfig,
    TaskKind, TaskSpec, VirtualLinkSpec,
};
use dimacheck::model::{
    validate, ActionDecl, ActionKind, Atom, Automaton, CmpOp, Constraint, Direction, Edge, Location, SyncRef, Update,
    VarDecl,
};
use rand::rngs::StdRng;
use rand::seq::{IndexedRandom, SliceRandom};
use rand::Rng;

#[derive(Debug, Clone, Copy)]
pub struct Shape {
    pub locations: usize,
    pub clocks: usize,
    pub max_range: i64,
    pub max_const: i64,
    pub edges: usize,
}

impl Shape {
    /// Theorem-suite systems.
    pub const SYSTEM: Shape = Shape {
        locations: 6,
        clocks: 2,
        max_range: 3,
        max_const: 4,
        edges: 9,
    };
    /// Parts of composed instances, kept small so products stay small.
    pub const PART: Shape = Shape {
        locations: 4,
        clocks: 2,
        max_range: 3,
        max_const: 3,
        edges: 6,
    };
    /// Oracle-sized automata.
    pub const MICRO: Shape = Shape {
        locations: 4,
        clocks: 1,
        max_range: 3,
        max_const: 4,
        edges: 6,
    };
}

pub fn decl(name: &str, kind: ActionKind, dir: Direction) -> ActionDecl {
    ActionDecl {
        name: name.into(),
        kind,
        dir,
    }
}

fn random_op(rng: &mut StdRng) -> CmpOp {
    *[CmpOp::Lt, CmpOp::Le, CmpOp::Eq, CmpOp::Ge, CmpOp::Gt].choose(rng).unwrap()
}

pub fn random_automaton(rng: &mut StdRng, name: &str, shape: &Shape, actions: &[ActionDecl]) -> Automaton {
    let mut a = Automaton::new(name);
    let nclocks = if shape.clocks == 0 { 0 } else { rng.random_range(1..=shape.clocks) };
    let clocks: Vec<String> = (0..nclocks).map(|i| format!("x{i}")).collect();
    for c in &clocks {
        a.clock(c.clone());
    }
    let range = rng.random_bool(0.7).then(|| rng.random_range(1..=shape.max_range));
    if let Some(hi) = range {
        a.var(VarDecl::new("v", 0, hi, rng.random_range(0..=hi)));
    }
    for d in actions {
        a.action(d.name.clone(), d.kind, d.dir);
    }

    let nlocs = rng.random_range(2.min(shape.locations)..=shape.locations);
    for i in 0..nlocs {
        let mut l = Location::new(format!("l{i}"));
        if !clocks.is_empty() && rng.random_bool(0.35) {
            let c = clocks.choose(rng).unwrap();
            l = l.with_invariant(Constraint::atom(c.clone(), CmpOp::Le, rng.random_range(1..=shape.max_const)));
        }
        if i > 0 {
            if let Some(hi) = range {
                if rng.random_bool(0.1) {
                    l.invariant = l.invariant.and(Atom::new("v", CmpOp::Le, rng.random_range(0..=hi)));
                }
            }
            if rng.random_bool(0.25) {
                l = l.error();
            }
        }
        for c in &clocks {
            if rng.random_bool(0.2) {
                l = l.stopped(c.clone());
            }
        }
        a.location(l);
    }

    // a tree from the initial location keeps every location in play
    let mut ends: Vec<(usize, usize)> = (1..nlocs).map(|i| (rng.random_range(0..i), i)).collect();
    for _ in 0..rng.random_range(1..=shape.edges) {
        ends.push((rng.random_range(0..nlocs), rng.random_range(0..nlocs)));
    }
    for (from, to) in ends {
        let (from, to) = (format!("l{from}"), format!("l{to}"));
        let mut e = Edge::new(from, to);
        for _ in 0..rng.random_range(0..=2) {
            let use_var = range.is_some() && (clocks.is_empty() || rng.random_bool(0.35));
            e = if use_var {
                e.when("v", random_op(rng), rng.random_range(0..=range.unwrap()))
            } else if let Some(c) = clocks.choose(rng) {
                e.when(c.clone(), random_op(rng), rng.random_range(0..=shape.max_const))
            } else {
                e
            };
        }
        if !actions.is_empty() && rng.random_bool(0.55) {
            let d = actions.choose(rng).unwrap();
            e = e.sync(SyncRef {
                action: d.name.clone(),
                dir: d.dir,
            });
        }
        let mut u = Update::none();
        for c in &clocks {
            if rng.random_bool(0.35) {
                u = u.reset(c.clone());
            }
        }
        if let Some(hi) = range {
            if rng.random_bool(0.4) {
                u = match rng.random_range(0..3) {
                    0 => u.add("v", 1),
                    1 => u.add("v", -1),
                    _ => u.set("v", rng.random_range(0..=hi)),
                };
            }
        }
        a.edge(e.update(u));
    }
    let diags = validate(&a);
    assert!(diags.is_empty(), "generator produced an invalid automaton: {diags:?}");
    a
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mutation {
    /// Only remove constraints and add internal edges.
    Relax,
    /// Also add constraints and drop edges, which may break simulation.
    Mixed,
}

/// A candidate abstraction of `a`: the `hide` actions become internal and
/// the dynamics are perturbed according to `mode`.
pub fn abstraction(rng: &mut StdRng, a: &Automaton, name: &str, hide: &BTreeSet<String>, mode: Mutation) -> Automaton {
    let mut b = a.clone();
    b.name = name.into();
    b.actions.retain(|d| !hide.contains(&d.name));
    for e in &mut b.edges {
        if e.sync.as_ref().is_some_and(|s| hide.contains(&s.action)) {
            e.sync = None;
        }
        if !e.guard.atoms.is_empty() && rng.random_bool(0.3) {
            let i = rng.random_range(0..e.guard.atoms.len());
            e.guard.atoms.remove(i);
        }
    }
    for l in &mut b.locations {
        if !l.invariant.atoms.is_empty() && rng.random_bool(0.25) {
            l.invariant = Constraint::tt();
        }
    }
    let nlocs = b.locations.len();
    if rng.random_bool(0.3) {
        let from = b.locations[rng.random_range(0..nlocs)].name.clone();
        let to = b.locations[rng.random_range(0..nlocs)].name.clone();
        b.edge(Edge::new(from, to));
    }
    if mode == Mutation::Mixed {
        if !b.edges.is_empty() && rng.random_bool(0.3) {
            let i = rng.random_range(0..b.edges.len());
            b.edges.remove(i);
        }
        if let Some(c) = b.clocks.first().cloned() {
            for e in &mut b.edges {
                if rng.random_bool(0.15) {
                    e.guard.atoms.push(Atom::new(c.clone(), random_op(rng), rng.random_range(0..=3)));
                }
            }
        }
        for l in &mut b.locations {
            if l.name != b.initial && rng.random_bool(0.1) {
                l.error = !l.error;
            }
        }
    }
    let diags = validate(&b);
    assert!(diags.is_empty(), "abstraction is invalid: {diags:?}");
    b
}

/// Every action name declared by `a`.
pub fn names(a: &Automaton) -> BTreeSet<String> {
    a.actions.iter().map(|d| d.name.clone()).collect()
}

pub fn random_subset(rng: &mut StdRng, from: &BTreeSet<String>, p: f64) -> BTreeSet<String> {
    from.iter().filter(|_| rng.random_bool(p)).cloned().collect()
}

const MS: u64 = 1000;

/// A 2–3 partition system at a 1 ms quantum with a 10 ms major frame.
pub fn micro_system(rng: &mut StdRng, index: usize) -> SystemConfig {
    loop {
        let cfg = try_micro_system(rng, index);
        if cfg.validate().is_empty() {
            return cfg;
        }
    }
}

fn try_micro_system(rng: &mut StdRng, index: usize) -> SystemConfig {
    let nparts = rng.random_range(2..=3);
    let mut partitions = Vec::new();
    let mut modules = Vec::new();
    for p in 0..nparts {
        let id = format!("P{}", p + 1);
        let duration = rng.random_range(3..=6);
        let offset = rng.random_range(0..=10 - duration);
        let mut tasks = Vec::new();
        for t in 0..rng.random_range(1..=3) {
            let sporadic = t > 0 && rng.random_bool(0.2);
            let period = *[10u64, 20].choose(rng).unwrap();
            let wcet = rng.random_range(1..=3);
            let bcet = rng.random_range(1..=wcet);
            tasks.push(TaskSpec {
                id: format!("T{}{}", p + 1, t + 1),
                partition: id.clone(),
                kind: if sporadic { TaskKind::Sporadic } else { TaskKind::Periodic },
                period_us: period * MS,
                deadline_us: period * MS,
                priority: 10 - t as i64,
                offset_us: if rng.random_bool(0.5) { offset * MS } else { 0 },
                commands: vec![Command::Compute {
                    bcet_us: bcet * MS,
                    wcet_us: wcet * MS,
                }],
            });
        }
        partitions.push(PartitionSpec {
            id: id.clone(),
            windows: vec![ScheduleWindow {
                partition: id.clone(),
                offset_us: offset * MS,
                duration_us: duration * MS,
            }],
            tasks,
            ports: Vec::new(),
        });
        modules.push(ModuleSpec {
            id: format!("M{}", p + 1),
            partitions: vec![id],
        });
    }

    let mut links = Vec::new();
    for m in 0..rng.random_range(1..=2) {
        let message = format!("m{}", m + 1);
        let mut order: Vec<usize> = (0..nparts).collect();
        order.shuffle(rng);
        let (src, dst) = (order[0], order[1]);
        let kind = if rng.random_bool(0.5) { PortKind::Sampling } else { PortKind::Queuing };
        let refresh = (kind == PortKind::Sampling).then(|| *[20u64, 30, 40].choose(rng).unwrap() * MS);
        let capacity = (kind == PortKind::Queuing).then(|| rng.random_range(1..=2));
        let out_port = format!("{message}_out");
        let in_port = format!("{message}_in");
        let sp = &mut partitions[src];
        let sender = sp
            .tasks
            .iter_mut()
            .find(|t| t.kind == TaskKind::Periodic)
            .expect("first task is periodic");
        sender.commands.push(Command::Send(out_port.clone()));
        sp.ports.push(PortSpec {
            name: out_port,
            partition: sp.id.clone(),
            kind,
            direction: PortDirection::Source,
            message: message.clone(),
            refresh_us: refresh,
            capacity,
        });
        let dp = &mut partitions[dst];
        let ti = rng.random_range(0..dp.tasks.len());
        dp.tasks[ti].commands.insert(0, Command::Receive(in_port.clone()));
        dp.ports.push(PortSpec {
            name: in_port,
            partition: dp.id.clone(),
            kind,
            direction: PortDirection::Destination,
            message: message.clone(),
            refresh_us: refresh,
            capacity,
        });
        let transit = rng.random_range(1..=2);
        links.push(VirtualLinkSpec {
            id: format!("V{}", m + 1),
            message,
            source: partitions[src].id.clone(),
            destinations: vec![partitions[dst].id.clone()],
            tx_udpip: LatencyBounds::new(0, rng.random_range(0..=1) * MS),
            vl_transit: if rng.random_bool(0.5) {
                LatencyBounds::fixed(transit * MS)
            } else {
                LatencyBounds::new(MS, 2 * MS)
            },
            rx_udpip: LatencyBounds::new(0, rng.random_range(0..=1) * MS),
            stage_capacity: 2,
        });
    }

    SystemConfig {
        name: format!("micro-{index}"),
        quantum_us: MS,
        major_frame_us: 10 * MS,
        modules,
        partitions,
        virtual_links: links,
    }
}
