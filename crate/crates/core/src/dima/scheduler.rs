//! Preemptive fixed-priority task scheduler of one partition.
//!
//! The scheduler keeps the ready set in variables. Every scheduling event
//! moves it to the urgent `decide` location, where it preempts and dispatches
//! until the highest-priority ready task holds the processor, then returns to
//! `stable`. Nothing is dispatched while the partition is inactive.

use super::config::PartitionSpec;
use super::names;
use crate::model::{ActionKind, Atom, Automaton, CmpOp, Constraint, Direction, Edge, Location, Update, VarDecl};

/// Task indices of `partition` from highest to lowest priority; ties go to
/// the task declared first.
pub fn priority_order(partition: &PartitionSpec) -> Vec<usize> {
    let mut order: Vec<usize> = (0..partition.tasks.len()).collect();
    order.sort_by(|&a, &b| partition.tasks[b].priority.cmp(&partition.tasks[a].priority).then(a.cmp(&b)));
    order
}

pub fn build_task_scheduler(partition: &PartitionSpec, quantum_us: u64) -> Automaton {
    let p = &partition.id;
    let order = priority_order(partition);
    let n = order.len() as i64;
    let ids: Vec<&str> = order.iter().map(|&i| partition.tasks[i].id.as_str()).collect();
    let rdy = |rank: usize| format!("rdy{rank}");

    let mut a = Automaton::new(format!("{p}.sched"));
    a.time_unit_us = Some(quantum_us);
    a.clock("u")
        .var(VarDecl::new("act", 0, 1, 0))
        .var(VarDecl::new("cur", 0, n, n));
    for rank in 0..order.len() {
        a.var(VarDecl::new(rdy(rank), 0, 1, 0));
    }
    a.action(names::activate(p), ActionKind::Broadcast, Direction::Input)
        .action(names::deactivate(p), ActionKind::Broadcast, Direction::Input);
    for t in &ids {
        a.action(names::release(p, t), ActionKind::Unicast, Direction::Input)
            .action(names::finish(p, t), ActionKind::Unicast, Direction::Input)
            .action(names::dispatch(p, t), ActionKind::Unicast, Direction::Output)
            .action(names::preempt(p, t), ActionKind::Unicast, Direction::Output);
    }
    a.location(Location::new("stable").stopped("u"))
        .location(Location::new("decide").with_invariant(Constraint::atom("u", CmpOp::Le, 0)));

    for from in ["stable", "decide"] {
        for (rank, t) in ids.iter().enumerate() {
            a.edge(
                Edge::new(from, "decide")
                    .recv(names::release(p, t))
                    .update(Update::none().set(rdy(rank), 1).reset("u")),
            );
            a.edge(
                Edge::new(from, "decide")
                    .when("cur", CmpOp::Eq, rank as i64)
                    .recv(names::finish(p, t))
                    .update(Update::none().set(rdy(rank), 0).set("cur", n).reset("u")),
            );
        }
        a.edge(Edge::new(from, "decide").recv(names::activate(p)).update(Update::none().set("act", 1).reset("u")));
        a.edge(Edge::new(from, "decide").recv(names::deactivate(p)).update(Update::none().set("act", 0).reset("u")));
    }

    // none of the tasks ranked above `rank` is ready
    let higher_idle = |rank: usize| -> Vec<Atom> { (0..rank).map(|j| Atom::new(rdy(j), CmpOp::Eq, 0)).collect() };
    for (rank, t) in ids.iter().enumerate() {
        let mut g = Constraint::from(higher_idle(rank));
        g = g
            .and(Atom::new("act", CmpOp::Eq, 1))
            .and(Atom::new("cur", CmpOp::Eq, n))
            .and(Atom::new(rdy(rank), CmpOp::Eq, 1));
        a.edge(
            Edge::new("decide", "stable")
                .guard(g)
                .emit(names::dispatch(p, t))
                .update(Update::none().set("cur", rank as i64)),
        );
        a.edge(
            Edge::new("decide", "decide")
                .when("cur", CmpOp::Eq, rank as i64)
                .when("act", CmpOp::Eq, 0)
                .emit(names::preempt(p, t))
                .update(Update::none().set("cur", n)),
        );
        for j in 0..rank {
            let g = Constraint::from(higher_idle(j))
                .and(Atom::new("cur", CmpOp::Eq, rank as i64))
                .and(Atom::new("act", CmpOp::Eq, 1))
                .and(Atom::new(rdy(j), CmpOp::Eq, 1));
            a.edge(
                Edge::new("decide", "decide")
                    .guard(g)
                    .emit(names::preempt(p, t))
                    .update(Update::none().set("cur", n)),
            );
        }
        let settled = Constraint::from(higher_idle(rank))
            .and(Atom::new("act", CmpOp::Eq, 1))
            .and(Atom::new("cur", CmpOp::Eq, rank as i64));
        a.edge(Edge::new("decide", "stable").guard(settled));
    }
    a.edge(
        Edge::new("decide", "stable")
            .when("act", CmpOp::Eq, 0)
            .when("cur", CmpOp::Eq, n),
    );
    let mut idle = Constraint::from(higher_idle(order.len()));
    idle = idle.and(Atom::new("act", CmpOp::Eq, 1)).and(Atom::new("cur", CmpOp::Eq, n));
    a.edge(Edge::new("decide", "stable").guard(idle));
    a
}
