//! A deterministic lab for crash-fault consensus: simulate small asynchronous
//! systems under an adversarial scheduler, measure where agreement breaks as
//! the fault budget grows, and hand the outcomes to a family of paraconsistent
//! logic engines to see which contradictions explode and which are contained.
//!
//! The pieces:
//!
//! - [`model`] — processes, messages, configurations, crash semantics, and
//!   the enabled-event relation. Everything downstream is a pure function of
//!   a configuration, so runs are reproducible by construction.
//! - [`protocol`] — a flooding consensus family: with/without timeouts,
//!   quorum variants, dummy-message padding, and failure-oracle awareness.
//! - [`scheduler`] — seeded and targeted-delay adversaries, exact replay,
//!   and exhaustive exploration with shortest witness schedules.
//! - [`measure`] — property profiles (termination, consistency,
//!   non-triviality), fault-budget sweeps, transition detection, and the
//!   suppression/recurrence probes for oracle covers and padding.
//! - [`logic`] — formula parsing and entailment for classical logic, the
//!   `C1..C8` hierarchy, and a consistency-operator logic, all via explicit
//!   bivaluation search over a bounded closure.
//! - [`scenario`] / [`trace`] / [`report`] — the file formats: experiment
//!   descriptions in, replayable traces and sweep tables out.
//!
//! Each capability has a runnable example: `seeded_run`,
//! `exhaustive_exploration`, `fault_sweep`, `oracle_hierarchy`,
//! `dummy_padding`, `logic_engine`, and `consensus_to_logic_bridge`.
//! The `flpe` binary wraps the same calls behind a scriptable CLI.

pub mod logic;
pub mod measure;
pub mod model;
pub mod protocol;
pub mod report;
pub mod scenario;
pub mod scheduler;
pub mod trace;
