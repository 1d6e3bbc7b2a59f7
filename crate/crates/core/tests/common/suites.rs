//! Seeded property suites shared by the focused tests and the acceptance run.

use std::collections::BTreeSet;
use std::time::{Duration, Instant};

use dimacheck::composer::{analyze_system, check_global, AnalysisSettings};
use dimacheck::model::{ActionDecl, ActionKind, Automaton, Direction};
use dimacheck::report::RowVerdict;
use dimacheck::safety::{check_safety, replay_trace, Limits};
use dimacheck::semantics::TransitionSystem;
use dimacheck::simulation::{check_simulation, verify_witness, SimError, SimOptions, SimWitness};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use super::gen::{abstraction, decl, micro_system, names, random_automaton, random_subset, Mutation, Shape};
use super::oracle::{brute_force_simulation, shortest_error_run};
use super::{network, single};

use ActionKind::{Broadcast, Unicast};
use Direction::{Input, Output};

#[derive(Debug, Default)]
pub struct Outcome {
    pub instances: usize,
    pub failures: Vec<String>,
    pub detail: String,
    pub elapsed: Duration,
}

impl Outcome {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }

    pub fn summary(&self) -> String {
        format!(
            "{} instances, {} failures, {:.1}s{}{}",
            self.instances,
            self.failures.len(),
            self.elapsed.as_secs_f64(),
            if self.detail.is_empty() { "" } else { "; " },
            self.detail
        )
    }

    pub fn assert_passed(&self) {
        assert!(self.passed(), "{}\n{}", self.summary(), self.failures.join("\n"));
    }
}

fn opts() -> SimOptions {
    SimOptions {
        limits: Limits::states(5_000_000),
        keep_relation: true,
    }
}

fn simulates(concrete: &dyn TransitionSystem, abstract_: &dyn TransitionSystem) -> SimWitness {
    check_simulation(concrete, abstract_, &opts()).expect("simulation check stays within limits")
}

fn open_actions() -> Vec<ActionDecl> {
    vec![
        decl("a", Broadcast, Output),
        decl("b", Broadcast, Input),
        decl("c", Unicast, Input),
        decl("d", Unicast, Output),
    ]
}

/// A random system: one automaton, or two communicating ones.
fn random_system(rng: &mut StdRng) -> Vec<Automaton> {
    if rng.random_bool(0.5) {
        return vec![random_automaton(rng, "S", &Shape::SYSTEM, &open_actions())];
    }
    let left = random_automaton(
        rng,
        "L",
        &Shape::PART,
        &[decl("a", Broadcast, Output), decl("d", Unicast, Output), decl("b", Broadcast, Input)],
    );
    let right = random_automaton(
        rng,
        "R",
        &Shape::PART,
        &[decl("a", Broadcast, Input), decl("d", Unicast, Input), decl("b", Broadcast, Output)],
    );
    vec![left, right]
}

/// Search for an abstraction of `a` that simulates it.
fn certified_abstraction(
    rng: &mut StdRng,
    a: &Automaton,
    name: &str,
    hide: &BTreeSet<String>,
    mode: Mutation,
) -> Option<Automaton> {
    for attempt in 0..30 {
        let m = if attempt < 20 { mode } else { Mutation::Relax };
        let b = abstraction(rng, a, name, hide, m);
        if simulates(&single(a), &single(&b)).holds {
            return Some(b);
        }
    }
    None
}

pub fn reflexivity(seed: u64, n: usize) -> Outcome {
    let start = Instant::now();
    let mut rng = StdRng::seed_from_u64(seed);
    let mut out = Outcome::default();
    let mut pairs = 0;
    for i in 0..n {
        let sys = random_system(&mut rng);
        let ts = network(&sys);
        let w = simulates(&ts, &ts);
        pairs += w.pairs;
        if !w.holds {
            out.failures.push(format!("system #{i} is not simulated by itself"));
        } else if !verify_witness(&ts, &ts, w.relation.as_deref().unwrap_or(&[]), Some(2)) {
            out.failures.push(format!("system #{i}: relation rejected by the independent re-check"));
        }
        out.instances += 1;
    }
    out.detail = format!("{pairs} related pairs in total");
    out.elapsed = start.elapsed();
    out
}

pub fn transitivity(seed: u64, n: usize) -> Outcome {
    let start = Instant::now();
    let mut rng = StdRng::seed_from_u64(seed);
    let mut out = Outcome::default();
    let mut hidden = 0;
    while out.instances < n {
        let t1 = random_automaton(&mut rng, "T1", &Shape::SYSTEM, &open_actions());
        let h1 = random_subset(&mut rng, &names(&t1), 0.3);
        let Some(t2) = certified_abstraction(&mut rng, &t1, "T2", &h1, Mutation::Mixed) else { continue };
        let h2 = random_subset(&mut rng, &names(&t2), 0.3);
        let Some(t3) = certified_abstraction(&mut rng, &t2, "T3", &h2, Mutation::Mixed) else { continue };
        hidden += h1.len() + h2.len();
        let (c, a) = (single(&t1), single(&t3));
        let w = simulates(&c, &a);
        if !(w.holds && verify_witness(&c, &a, w.relation.as_deref().unwrap_or(&[]), Some(2))) {
            out.failures.push(format!("chain #{}: T1 ⪯ T2 ⪯ T3 but not T1 ⪯ T3", out.instances));
        }
        out.instances += 1;
    }
    out.detail = format!("{hidden} actions hidden along the chains");
    out.elapsed = start.elapsed();
    out
}

pub fn preservation(seed: u64, n: usize) -> Outcome {
    let start = Instant::now();
    let mut rng = StdRng::seed_from_u64(seed);
    let mut out = Outcome::default();
    let (mut abstract_safe, mut concrete_unsafe) = (0, 0);
    while out.instances < n {
        let t1 = random_automaton(&mut rng, "C", &Shape::SYSTEM, &open_actions());
        let hide = random_subset(&mut rng, &names(&t1), 0.3);
        let Some(t2) = certified_abstraction(&mut rng, &t1, "A", &hide, Mutation::Mixed) else { continue };
        let (c, a) = (single(&t1), single(&t2));
        let cs = check_safety(&c, &Limits::default()).unwrap().is_safe();
        let as_ = check_safety(&a, &Limits::default()).unwrap().is_safe();
        abstract_safe += as_ as usize;
        concrete_unsafe += !cs as usize;
        if as_ && !cs {
            out.failures.push(format!("pair #{}: abstract safe, concrete unsafe", out.instances));
        }
        out.instances += 1;
    }
    out.detail = format!("{abstract_safe} abstract-safe, {concrete_unsafe} concrete-unsafe");
    out.elapsed = start.elapsed();
    out
}

/// `T1 ⪯ T2` and `T1 ⪯ T3` with compatible `T2`, `T3` give `T1 ⪯ T2 ∥ T3`.
pub fn one_sided_composition(seed: u64, n: usize) -> Outcome {
    let start = Instant::now();
    let mut rng = StdRng::seed_from_u64(seed);
    let mut out = Outcome::default();
    let actions = vec![
        decl("o1", Broadcast, Output),
        decl("o2", Unicast, Output),
        decl("o3", Broadcast, Output),
        decl("i1", Broadcast, Input),
        decl("i2", Unicast, Input),
    ];
    while out.instances < n {
        let t1 = random_automaton(&mut rng, "T1", &Shape::PART, &actions);
        // split the outputs and the unicast input between the two sides
        let mut h2 = BTreeSet::new();
        let mut h3 = BTreeSet::new();
        for d in &actions {
            let keep_left = rng.random_bool(0.5);
            let shared = d.dir == Input && d.kind == Broadcast;
            if shared {
                if rng.random_bool(0.25) {
                    h2.insert(d.name.clone());
                }
                if rng.random_bool(0.25) {
                    h3.insert(d.name.clone());
                }
            } else if keep_left {
                h3.insert(d.name.clone());
            } else {
                h2.insert(d.name.clone());
            }
        }
        let Some(t2) = certified_abstraction(&mut rng, &t1, "T2", &h2, Mutation::Mixed) else { continue };
        let Some(t3) = certified_abstraction(&mut rng, &t1, "T3", &h3, Mutation::Mixed) else { continue };
        let c = single(&t1);
        let rhs = network(&[t2, t3]);
        let w = simulates(&c, &rhs);
        if !(w.holds && verify_witness(&c, &rhs, w.relation.as_deref().unwrap_or(&[]), None)) {
            out.failures.push(format!(
                "instance #{}: T1 ⪯ T2, T1 ⪯ T3 but not T1 ⪯ T2 ∥ T3 ({:?})",
                out.instances,
                w.counterexample.map(|c| c.clause)
            ));
        }
        out.instances += 1;
    }
    out.elapsed = start.elapsed();
    out
}

fn inputs(a: &Automaton) -> BTreeSet<String> {
    a.actions.iter().filter(|d| d.dir == Input).map(|d| d.name.clone()).collect()
}

fn outputs(a: &Automaton) -> BTreeSet<String> {
    a.actions.iter().filter(|d| d.dir == Output).map(|d| d.name.clone()).collect()
}

/// `O1 ∩ I4 ⊆ Σ2 ⊆ Σb` and `I2 ∩ O3 ⊆ Σ4 ⊆ Σb`.
pub fn side_condition(t1: &Automaton, t2: &Automaton, t3: &Automaton, t4: &Automaton) -> bool {
    let broadcast = |a: &Automaton| a.actions.iter().all(|d| d.kind == Broadcast);
    let (s2, s4) = (names(t2), names(t4));
    outputs(t1).intersection(&inputs(t4)).all(|x| s2.contains(x))
        && inputs(t2).intersection(&outputs(t3)).all(|x| s4.contains(x))
        && broadcast(t2)
        && broadcast(t4)
}

/// `T1 ⪯ T2` and `T3 ⪯ T4` under the side condition give `T1 ∥ T3 ⪯ T2 ∥ T4`.
pub fn two_sided_composition(seed: u64, n: usize) -> Outcome {
    let start = Instant::now();
    let mut rng = StdRng::seed_from_u64(seed);
    let mut out = Outcome::default();
    let left = vec![
        decl("a", Broadcast, Output),
        decl("b", Broadcast, Output),
        decl("c", Broadcast, Input),
        decl("d", Broadcast, Input),
    ];
    let right = vec![
        decl("c", Broadcast, Output),
        decl("e", Broadcast, Output),
        decl("a", Broadcast, Input),
        decl("f", Broadcast, Input),
    ];
    let mut rejected = 0;
    while out.instances < n {
        let t1 = random_automaton(&mut rng, "T1", &Shape::PART, &left);
        let t3 = random_automaton(&mut rng, "T3", &Shape::PART, &right);
        let h2 = random_subset(&mut rng, &names(&t1), 0.3);
        let h4 = random_subset(&mut rng, &names(&t3), 0.3);
        let Some(t2) = certified_abstraction(&mut rng, &t1, "T2", &h2, Mutation::Mixed) else { continue };
        let Some(t4) = certified_abstraction(&mut rng, &t3, "T4", &h4, Mutation::Mixed) else { continue };
        if !side_condition(&t1, &t2, &t3, &t4) {
            rejected += 1;
            continue;
        }
        let lhs = network(&[t1, t3]);
        let rhs = network(&[t2, t4]);
        let w = simulates(&lhs, &rhs);
        if !(w.holds && verify_witness(&lhs, &rhs, w.relation.as_deref().unwrap_or(&[]), None)) {
            out.failures.push(format!(
                "instance #{}: not T1 ∥ T3 ⪯ T2 ∥ T4 ({:?})",
                out.instances,
                w.counterexample.map(|c| c.clause)
            ));
        }
        out.instances += 1;
    }
    out.detail = format!("{rejected} candidates outside the side condition discarded");
    out.elapsed = start.elapsed();
    out
}

pub fn safety_oracle(seed: u64, n: usize) -> Outcome {
    let start = Instant::now();
    let mut rng = StdRng::seed_from_u64(seed);
    let mut out = Outcome::default();
    let mut unsafe_count = 0;
    let actions = [decl("a", Broadcast, Output), decl("b", Broadcast, Input), decl("c", Unicast, Input)];
    for i in 0..n {
        let a = random_automaton(&mut rng, "M", &Shape::MICRO, &actions);
        let ts = single(&a);
        let v = check_safety(&ts, &Limits::default()).unwrap();
        let expected = shortest_error_run(&a);
        unsafe_count += expected.is_some() as usize;
        let got = v.trace.as_ref().map(|t| t.len());
        if got != expected {
            out.failures.push(format!("automaton #{i}: engine {got:?}, oracle {expected:?}"));
        } else if let Some(t) = &v.trace {
            if !replay_trace(&ts, t) {
                out.failures.push(format!("automaton #{i}: trace does not replay"));
            }
        }
        out.instances += 1;
    }
    out.detail = format!("{unsafe_count} unsafe, {} safe; shortest run lengths compared", n - unsafe_count);
    out.elapsed = start.elapsed();
    out
}

pub fn simulation_oracle(seed: u64, n: usize) -> Outcome {
    let start = Instant::now();
    let mut rng = StdRng::seed_from_u64(seed);
    let mut out = Outcome::default();
    let (mut holds, mut fails, mut alphabet) = (0, 0, 0);
    let actions = vec![decl("a", Broadcast, Output), decl("b", Broadcast, Input), decl("c", Unicast, Input)];
    for i in 0..n {
        let c = random_automaton(&mut rng, "C", &Shape::MICRO, &actions);
        let hide = random_subset(&mut rng, &names(&c), 0.3);
        let a = match rng.random_range(0..20) {
            0..=7 => abstraction(&mut rng, &c, "A", &hide, Mutation::Relax),
            8..=15 => abstraction(&mut rng, &c, "A", &hide, Mutation::Mixed),
            16..=18 => {
                let kept: Vec<ActionDecl> = actions.iter().filter(|d| !hide.contains(&d.name)).cloned().collect();
                random_automaton(&mut rng, "A", &Shape::MICRO, &kept)
            }
            _ => {
                let mut extra = actions.clone();
                extra.push(decl("z", Broadcast, Output));
                random_automaton(&mut rng, "A", &Shape::MICRO, &extra)
            }
        };
        let expected = brute_force_simulation(&c, &a, 3);
        let got = match check_simulation(&single(&c), &single(&a), &opts()) {
            Ok(w) => Some(w.holds),
            Err(SimError::AlphabetViolation(_)) => None,
            Err(e) => panic!("unexpected error: {e}"),
        };
        match expected {
            Some(true) => holds += 1,
            Some(false) => fails += 1,
            None => alphabet += 1,
        }
        if got != expected {
            out.failures.push(format!("pair #{i}: engine {got:?}, oracle {expected:?}"));
        }
        out.instances += 1;
    }
    out.detail = format!("{holds} hold, {fails} fail, {alphabet} alphabet violations");
    out.elapsed = start.elapsed();
    out
}

pub struct Soundness {
    pub outcome: Outcome,
    pub schedulable: usize,
    pub global_unsafe: usize,
}

/// `deduce = schedulable ⇒ check-global = safe` on micro systems.
pub fn soundness(seed: u64, n: usize) -> Soundness {
    let start = Instant::now();
    let mut rng = StdRng::seed_from_u64(seed);
    let mut out = Outcome::default();
    let settings = AnalysisSettings {
        jobs: 1,
        limits: Limits::states(2_000_000),
        sim_limits: Limits::states(2_000_000),
        ..AnalysisSettings::default()
    };
    let (mut schedulable, mut not_concluded, mut global_unsafe, mut errors, mut skipped) = (0, 0, 0, 0, 0);
    let mut index = 0;
    while out.instances < n {
        let cfg = micro_system(&mut rng, index);
        index += 1;
        let global = check_global(&cfg, &Limits::states(5_000_000)).expect("micro systems build");
        if global.verdict == RowVerdict::LimitExceeded {
            skipped += 1;
            continue;
        }
        let deduced = match analyze_system(&cfg, &settings) {
            Ok(report) => report.is_schedulable(),
            Err(_) => {
                errors += 1;
                false
            }
        };
        match (deduced, global.verdict) {
            (true, RowVerdict::Safe) => schedulable += 1,
            (true, v) => out.failures.push(format!("system `{}`: deduce schedulable, check-global {v:?}", cfg.name)),
            (false, _) => not_concluded += 1,
        }
        global_unsafe += (global.verdict == RowVerdict::Unsafe) as usize;
        out.instances += 1;
    }
    out.detail = format!(
        "{schedulable} schedulable and globally safe, {not_concluded} not concluded ({errors} without a certifiable interface), {global_unsafe} globally unsafe, {skipped} skipped with an exhausted global budget"
    );
    out.elapsed = start.elapsed();
    Soundness {
        outcome: out,
        schedulable,
        global_unsafe,
    }
}
