//! Platform models built from a [`config::SystemConfig`].
//!
//! Every builder returns plain [`Automaton`](crate::model::Automaton) values
//! whose constants are expressed in analysis quanta. Action names are derived
//! from partition, task, resource and message identifiers by the helpers in
//! [`names`], so independently built pieces compose without extra wiring.

pub mod assembly;
pub mod comm;
pub mod config;
pub mod ports;
pub mod scheduler;
pub mod supply;
pub mod task;

pub use assembly::{global_network, inbound_network, network_ts, partition_core};

pub mod names {
    pub fn activate(p: &str) -> String {
        format!("activate_{p}")
    }
    pub fn deactivate(p: &str) -> String {
        format!("deactivate_{p}")
    }
    pub fn release(p: &str, t: &str) -> String {
        format!("release_{p}_{t}")
    }
    pub fn finish(p: &str, t: &str) -> String {
        format!("finish_{p}_{t}")
    }
    pub fn dispatch(p: &str, t: &str) -> String {
        format!("dispatch_{p}_{t}")
    }
    pub fn preempt(p: &str, t: &str) -> String {
        format!("preempt_{p}_{t}")
    }
    pub fn lock(p: &str, r: &str, t: &str) -> String {
        format!("lock_{p}_{r}_{t}")
    }
    pub fn busy(p: &str, r: &str, t: &str) -> String {
        format!("busy_{p}_{r}_{t}")
    }
    pub fn unlock(p: &str, r: &str, t: &str) -> String {
        format!("unlock_{p}_{r}_{t}")
    }
    pub fn released(p: &str, r: &str) -> String {
        format!("released_{p}_{r}")
    }
    pub fn read(p: &str, port: &str) -> String {
        format!("rd_{p}_{port}")
    }
    /// Emitted by the sending task; this is the action message interfaces abstract.
    pub fn message(m: &str) -> String {
        m.to_owned()
    }
    pub fn transmitted(m: &str) -> String {
        format!("{m}_tx")
    }
    pub fn transited(m: &str) -> String {
        format!("{m}_vl")
    }
    pub fn delivered(m: &str, dest: &str) -> String {
        format!("{m}_dlv_{dest}")
    }
}
