//! Compositional schedulability analysis for partitioned avionics platforms.
//!
//! Systems are modelled as networks of stopwatch automata with input/output
//! actions ([`model`]). [`semantics`] gives them an exact discrete-time
//! meaning, [`safety`] decides error-location reachability and
//! [`simulation`] decides the timed selection simulation preorder used to
//! certify message interfaces. [`dima`] builds the platform models from a
//! [`dima::config::SystemConfig`] and [`composer`] runs the assume-guarantee
//! analysis end to end.

pub mod composer;
pub mod dima;
pub mod document;
pub mod expr;
pub mod model;
pub mod report;
pub mod safety;
pub mod semantics;
pub mod simulation;
pub mod store;
