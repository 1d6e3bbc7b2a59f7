#![allow(dead_code)]

pub mod gen;
pub mod oracle;
pub mod suites;

use std::path::PathBuf;
use std::sync::Arc;

use dimacheck::dima::config::SystemConfig;
use dimacheck::document::parse_system;
use dimacheck::model::Automaton;
use dimacheck::semantics::{compose, shared, AutomatonTs, Composite, TransitionSystem};

pub fn single(a: &Automaton) -> AutomatonTs {
    AutomatonTs::new(a).unwrap_or_else(|e| panic!("generated automaton is invalid: {e}"))
}

pub fn network(automata: &[Automaton]) -> Composite {
    let parts: Vec<Arc<dyn TransitionSystem>> = automata.iter().map(|a| shared(single(a))).collect();
    compose(parts).expect("parts are compatible")
}

pub fn model_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../models").join(name).join("system.toml")
}

pub fn load_model(name: &str) -> SystemConfig {
    let path = model_path(name);
    let src = std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    parse_system(&src).unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}
