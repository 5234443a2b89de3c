//! Core system model: processes, channels, messages, configurations and the
//! single-step transition relation.
//!
//! The model is a message-passing system under an adversarial scheduler.
//! Everything downstream (seeded runs, exhaustive exploration, replay) is
//! built from two pure functions defined here:
//!
//!  - [`enabled_events`]: which events the scheduler may pick in a configuration
//!  - [`apply_event`]: the deterministic effect of one event
//!
//! Invariants the rest of the crate leans on:
//!
//!  - Determinism: both functions are pure; no randomness, no wall clock.
//!    Replaying an event list from the same initial configuration reproduces
//!    the same configuration list, bit for bit.
//!  - Crash freeze: a crashed process never takes another step and its state
//!    never changes again. Messages already in flight stay in flight; messages
//!    addressed to a crashed process are never delivered.
//!  - Decision irrevocability: once `output` is set it is never overwritten.
//!  - Canonical ordering: `enabled_events` returns events in a fixed total
//!    order (deliveries by `(src, seq, dst)`, then starts, timeouts and
//!    crashes by process id), so seeded adversaries are portable.
//!
//! A note on timeouts. A local timeout here models "this process has waited
//! long enough that something must be wrong". To keep fault-free executions
//! honest (nobody gives up while the system is still quiet but healthy), a
//! timeout is only enabled once some process has actually crashed, the
//! waiting process has drained its inbox, and it is not mid round-trip with a
//! live oracle. Without that gating a zero-fault run could replicate any
//! one-fault schedule minus its crash and split decisions anyway, which would
//! make fault counts meaningless as a swept feature.

use std::collections::BTreeSet;
use std::fmt;

use sha2::{Digest, Sha256};

use crate::protocol::{oracle_behavior, Protocol, SystemView};

/// Index of a process. Dense: a system with `n` processes uses ids `0..n`.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct ProcessId(pub usize);

impl fmt::Display for ProcessId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "p{}", self.0)
    }
}

/// Proposal / decision value. The alphabet is the small integers `0..=9`;
/// "undecided" is represented by `Option<Value>`, never by a sentinel value.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct Value(pub u8);

pub const VALUE_ALPHABET_MAX: u8 = 9;

impl Value {
    pub fn new(v: u8) -> Result<Self, ModelError> {
        if v > VALUE_ALPHABET_MAX {
            return Err(ModelError::ValueOutOfRange(v));
        }
        Ok(Value(v))
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum ModelError {
    #[error("need one initial value per process: {expected} processes, {got} values")]
    ValueCountMismatch { expected: usize, got: usize },
    #[error("value {0} outside the alphabet 0..=9")]
    ValueOutOfRange(u8),
    #[error("unknown process {0}")]
    UnknownProcess(ProcessId),
    #[error("a system needs at least one process")]
    EmptySystem,
}

// ---------------------------------------------------------------- topology

/// Static structure of the system: who exists, who may talk to whom, and
/// which processes are oracles (and for whom).
///
/// Level 0 holds the ordinary consensus participants. An oracle added for
/// target `t` sits one level above `t` and answers crash queries about it.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct SystemTopology {
    /// Oracle level per process; level 0 = ordinary participant.
    levels: Vec<u32>,
    /// For oracles, the process they monitor.
    targets: Vec<Option<ProcessId>>,
    /// Directed channels. Self-delivery (`src == dst`) needs no channel:
    /// a process may always hand itself a message locally.
    channels: BTreeSet<(ProcessId, ProcessId)>,
}

impl SystemTopology {
    /// Complete graph over `n` ordinary processes (no self loops).
    pub fn complete(n: usize) -> Result<Self, ModelError> {
        if n == 0 {
            return Err(ModelError::EmptySystem);
        }
        let mut channels = BTreeSet::new();
        for a in 0..n {
            for b in 0..n {
                if a != b {
                    channels.insert((ProcessId(a), ProcessId(b)));
                }
            }
        }
        Ok(SystemTopology { levels: vec![0; n], targets: vec![None; n], channels })
    }

    pub fn len(&self) -> usize {
        self.levels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.levels.is_empty()
    }

    pub fn contains(&self, p: ProcessId) -> bool {
        p.0 < self.levels.len()
    }

    pub fn level(&self, p: ProcessId) -> u32 {
        self.levels[p.0]
    }

    pub fn is_oracle(&self, p: ProcessId) -> bool {
        self.levels[p.0] > 0
    }

    pub fn oracle_target(&self, p: ProcessId) -> Option<ProcessId> {
        self.targets[p.0]
    }

    pub fn max_level(&self) -> u32 {
        self.levels.iter().copied().max().unwrap_or(0)
    }

    pub fn processes(&self) -> impl Iterator<Item = ProcessId> + '_ {
        (0..self.levels.len()).map(ProcessId)
    }

    pub fn level0(&self) -> impl Iterator<Item = ProcessId> + '_ {
        self.processes().filter(|p| !self.is_oracle(*p))
    }

    pub fn at_level(&self, level: u32) -> impl Iterator<Item = ProcessId> + '_ {
        self.processes().filter(move |p| self.level(*p) == level)
    }

    pub fn oracles(&self) -> impl Iterator<Item = ProcessId> + '_ {
        self.processes().filter(|p| self.is_oracle(*p))
    }

    pub fn has_channel(&self, src: ProcessId, dst: ProcessId) -> bool {
        src == dst || self.channels.contains(&(src, dst))
    }

    /// Append one oracle monitoring `target`, fully connected to everyone.
    /// The new process sits one level above its target.
    pub fn with_oracle(&self, target: ProcessId) -> Result<Self, ModelError> {
        if !self.contains(target) {
            return Err(ModelError::UnknownProcess(target));
        }
        let mut next = self.clone();
        let o = ProcessId(next.levels.len());
        next.levels.push(self.level(target) + 1);
        next.targets.push(Some(target));
        for p in self.processes() {
            next.channels.insert((p, o));
            next.channels.insert((o, p));
        }
        Ok(next)
    }

    /// One oracle per member of `covered`, in ascending id order.
    pub fn with_hierarchy(&self, covered: &BTreeSet<ProcessId>) -> Result<Self, ModelError> {
        let mut next = self.clone();
        for &t in covered {
            next = next.with_oracle(t)?;
        }
        Ok(next)
    }

    /// Stack `depth` oracle layers: layer 1 covers `known_faulty`, each later
    /// layer covers the oracles added by the previous one.
    pub fn with_layers(
        &self,
        known_faulty: &BTreeSet<ProcessId>,
        depth: u32,
    ) -> Result<Self, ModelError> {
        let mut topo = self.clone();
        let mut layer: BTreeSet<ProcessId> = known_faulty.clone();
        for _ in 0..depth {
            let before = topo.len();
            topo = topo.with_hierarchy(&layer)?;
            layer = (before..topo.len()).map(ProcessId).collect();
        }
        Ok(topo)
    }
}

// ---------------------------------------------------------------- messages

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum MessageKind {
    /// Broadcast of the sender's proposal value.
    Announce(Value),
    /// "Is your target crashed?"
    OracleQuery,
    /// Oracle's answer: ground-truth crash flag of its target at the moment
    /// the query was processed. May go stale in flight.
    OracleReply(bool),
    /// Content-free padding. Consumed, never acted on.
    Dummy,
}

impl MessageKind {
    pub fn label(&self) -> &'static str {
        match self {
            MessageKind::Announce(_) => "announce",
            MessageKind::OracleQuery => "query",
            MessageKind::OracleReply(_) => "reply",
            MessageKind::Dummy => "dummy",
        }
    }
}

/// One in-flight message. `(src, seq)` is unique: every sender stamps its
/// outgoing messages with a private counter, which is what makes schedules
/// replayable and the canonical event order total.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct Message {
    pub src: ProcessId,
    pub dst: ProcessId,
    pub seq: u64,
    pub kind: MessageKind,
}

// ---------------------------------------------------------------- processes

/// Protocol-owned per-process memory. One shared shape keeps configurations
/// hashable; protocols simply ignore the fields they do not use.
#[derive(Clone, PartialEq, Eq, Debug, Default)]
pub struct Locals {
    /// Proposal values recorded so far, own value included once started.
    pub received: std::collections::BTreeMap<ProcessId, Value>,
    /// Padding messages still to consume before a decision may land.
    pub dummies_left: u32,
    /// Decision made while padding was still pending; released when the last
    /// dummy is consumed. The first suppressed decision wins.
    pub pending_decision: Option<Value>,
    /// Whether this process has sent its round of oracle queries.
    pub queried: bool,
    /// Cached oracle verdicts: oracle id -> "its target was crashed".
    pub verdicts: std::collections::BTreeMap<ProcessId, bool>,
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct ProcessState {
    pub id: ProcessId,
    pub initial_value: Value,
    pub output: Option<Value>,
    pub crashed: bool,
    /// Whether the initial step has run. Oracles are born started: their
    /// initial step would be a no-op and would only bloat the schedule space.
    pub started: bool,
    pub next_seq: u64,
    pub locals: Locals,
}

impl ProcessState {
    pub fn decided(&self) -> bool {
        self.output.is_some()
    }
}

// ------------------------------------------------------------ configuration

/// Global state: every process plus the multiset of in-flight messages.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Configuration {
    pub states: Vec<ProcessState>,
    pub in_flight: Vec<Message>,
}

impl Configuration {
    pub fn state(&self, p: ProcessId) -> &ProcessState {
        &self.states[p.0]
    }

    pub fn any_crashed(&self) -> bool {
        self.states.iter().any(|s| s.crashed)
    }

    pub fn crashed_count(&self) -> usize {
        self.states.iter().filter(|s| s.crashed).count()
    }

    pub fn crashed_flags(&self) -> Vec<bool> {
        self.states.iter().map(|s| s.crashed).collect()
    }

    pub fn inbox_is_empty(&self, p: ProcessId) -> bool {
        !self.in_flight.iter().any(|m| m.dst == p)
    }

    /// A query round-trip with a live oracle is still pending: either our
    /// query has not been consumed yet (and the oracle may still answer) or
    /// the answer sits in our inbox (covered by the inbox check).
    pub fn pending_live_query(&self, p: ProcessId) -> bool {
        self.in_flight
            .iter()
            .any(|m| m.src == p && m.kind == MessageKind::OracleQuery && !self.states[m.dst.0].crashed)
    }

    /// In-flight messages in the canonical `(src, seq, dst)` order.
    pub fn canonical_messages(&self) -> Vec<Message> {
        let mut msgs = self.in_flight.clone();
        msgs.sort_by_key(|m| (m.src, m.seq, m.dst));
        msgs
    }

    /// Content digest over a canonical byte encoding. Two configurations
    /// compare equal iff their digests do, up to hash collisions, which a
    /// 128-bit truncation makes irrelevant at explorable scales.
    pub fn digest(&self) -> ConfigDigest {
        let mut bytes = Vec::with_capacity(64 + self.states.len() * 48);
        bytes.extend_from_slice(b"flpe-cfg-v1");
        for s in &self.states {
            push_u64(&mut bytes, s.id.0 as u64);
            bytes.push(s.initial_value.0);
            bytes.push(match s.output {
                Some(v) => v.0 + 1,
                None => 0,
            });
            bytes.push(s.crashed as u8);
            bytes.push(s.started as u8);
            push_u64(&mut bytes, s.next_seq);
            push_u64(&mut bytes, s.locals.received.len() as u64);
            for (p, v) in &s.locals.received {
                push_u64(&mut bytes, p.0 as u64);
                bytes.push(v.0);
            }
            push_u64(&mut bytes, s.locals.dummies_left as u64);
            bytes.push(match s.locals.pending_decision {
                Some(v) => v.0 + 1,
                None => 0,
            });
            bytes.push(s.locals.queried as u8);
            push_u64(&mut bytes, s.locals.verdicts.len() as u64);
            for (p, b) in &s.locals.verdicts {
                push_u64(&mut bytes, p.0 as u64);
                bytes.push(*b as u8);
            }
        }
        for m in self.canonical_messages() {
            push_u64(&mut bytes, m.src.0 as u64);
            push_u64(&mut bytes, m.seq);
            push_u64(&mut bytes, m.dst.0 as u64);
            let (tag, payload) = match m.kind {
                MessageKind::Announce(v) => (1u8, v.0),
                MessageKind::OracleQuery => (2, 0),
                MessageKind::OracleReply(b) => (3, b as u8),
                MessageKind::Dummy => (4, 0),
            };
            bytes.push(tag);
            bytes.push(payload);
        }
        let full = Sha256::digest(&bytes);
        let mut out = [0u8; 16];
        out.copy_from_slice(&full[..16]);
        ConfigDigest(out)
    }
}

fn push_u64(out: &mut Vec<u8>, v: u64) {
    out.extend_from_slice(&v.to_le_bytes());
}

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct ConfigDigest(pub [u8; 16]);

impl fmt::Display for ConfigDigest {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for b in self.0 {
            write!(f, "{b:02x}")?;
        }
        Ok(())
    }
}

impl ConfigDigest {
    pub fn parse(s: &str) -> Option<Self> {
        if s.len() != 32 {
            return None;
        }
        let mut out = [0u8; 16];
        for (i, chunk) in s.as_bytes().chunks(2).enumerate() {
            let hex = std::str::from_utf8(chunk).ok()?;
            out[i] = u8::from_str_radix(hex, 16).ok()?;
        }
        Some(ConfigDigest(out))
    }
}

/// Initial configuration for a topology: level-0 processes take the given
/// proposal values (one each, in id order); oracles hold a placeholder value
/// they never announce and are born started.
pub fn initial_configuration(
    topology: &SystemTopology,
    values: &[Value],
) -> Result<Configuration, ModelError> {
    let level0: Vec<ProcessId> = topology.level0().collect();
    if level0.len() != values.len() {
        return Err(ModelError::ValueCountMismatch { expected: level0.len(), got: values.len() });
    }
    let mut next_value = values.iter();
    let states = topology
        .processes()
        .map(|p| {
            let is_oracle = topology.is_oracle(p);
            ProcessState {
                id: p,
                initial_value: if is_oracle { Value(0) } else { *next_value.next().unwrap() },
                output: None,
                crashed: false,
                started: is_oracle,
                next_seq: 0,
                locals: Locals::default(),
            }
        })
        .collect();
    Ok(Configuration { states, in_flight: Vec::new() })
}

/// Complete graph plus matching initial configuration in one call.
pub fn build_system(
    n: usize,
    values: &[Value],
) -> Result<(SystemTopology, Configuration), ModelError> {
    let topology = SystemTopology::complete(n)?;
    let initial = initial_configuration(&topology, values)?;
    Ok((topology, initial))
}

// ---------------------------------------------------------------- events

/// One scheduler choice. `Start` is a process's initial protocol step (the
/// point where it announces its value); keeping it in the schedule is what
/// lets an adversary crash a process before anyone has heard from it.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum Event {
    Start(ProcessId),
    Deliver(Message),
    LocalTimeout(ProcessId),
    Crash(ProcessId),
}

impl fmt::Display for Event {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Event::Start(p) => write!(f, "start {p}"),
            Event::Deliver(m) => {
                write!(f, "deliver {} {}#{} -> {}", m.kind.label(), m.src, m.seq, m.dst)
            }
            Event::LocalTimeout(p) => write!(f, "timeout {p}"),
            Event::Crash(p) => write!(f, "crash {p}"),
        }
    }
}

/// Crash choices the scheduler is allowed: how many in total, and (optionally)
/// which processes are eligible at all. Targets are how fault counts at a
/// specific oracle level are swept.
#[derive(Clone, PartialEq, Eq, Debug, Default)]
pub struct CrashPolicy {
    pub budget: usize,
    pub targets: Option<BTreeSet<ProcessId>>,
}

impl CrashPolicy {
    pub fn budget(budget: usize) -> Self {
        CrashPolicy { budget, targets: None }
    }

    pub fn targeted(budget: usize, targets: BTreeSet<ProcessId>) -> Self {
        CrashPolicy { budget, targets: Some(targets) }
    }

    fn allows(&self, p: ProcessId) -> bool {
        self.targets.as_ref().map_or(true, |t| t.contains(&p))
    }
}

/// All events the scheduler may choose in `config`, in canonical order:
/// deliveries by `(src, seq, dst)`, then starts, timeouts and crash options
/// by process id. An empty result means the execution is complete.
pub fn enabled_events(
    config: &Configuration,
    topology: &SystemTopology,
    protocol: &dyn Protocol,
    policy: &CrashPolicy,
) -> Vec<Event> {
    let mut events = Vec::new();

    for m in config.canonical_messages() {
        if !config.states[m.dst.0].crashed {
            events.push(Event::Deliver(m));
        }
    }

    for s in &config.states {
        if !s.started && !s.crashed {
            events.push(Event::Start(s.id));
        }
    }

    let someone_crashed = config.any_crashed();
    if someone_crashed {
        let crashed = config.crashed_flags();
        let view = SystemView { topology, crashed: &crashed };
        for s in &config.states {
            if s.crashed || !s.started || s.decided() || topology.is_oracle(s.id) {
                continue;
            }
            if !protocol.timeouts_enabled() {
                continue;
            }
            if !config.inbox_is_empty(s.id) || config.pending_live_query(s.id) {
                continue;
            }
            if protocol.timeout_ready(&view, s) {
                events.push(Event::LocalTimeout(s.id));
            }
        }
    }

    if config.crashed_count() < policy.budget {
        for s in &config.states {
            if !s.crashed && policy.allows(s.id) {
                events.push(Event::Crash(s.id));
            }
        }
    }

    events
}

/// Apply one event. Panics on a disabled event: feeding the transition
/// function an event it never offered is a harness bug, not an input error.
pub fn apply_event(
    config: &Configuration,
    event: &Event,
    topology: &SystemTopology,
    protocol: &dyn Protocol,
) -> Configuration {
    let mut next = config.clone();
    match event {
        Event::Start(p) => {
            let s = &next.states[p.0];
            assert!(!s.crashed && !s.started, "start of {p} is not enabled");
            let actions = {
                let crashed = next.crashed_flags();
                let view = SystemView { topology, crashed: &crashed };
                dispatch(protocol, topology, *p).on_init(&view, &next.states[p.0])
            };
            next.states[p.0].started = true;
            absorb(&mut next, topology, *p, actions);
        }
        Event::Deliver(m) => {
            let pos = next
                .in_flight
                .iter()
                .position(|x| x == m)
                .unwrap_or_else(|| panic!("message {} {}#{} not in flight", m.kind.label(), m.src, m.seq));
            next.in_flight.swap_remove(pos);
            assert!(!next.states[m.dst.0].crashed, "delivery to crashed {}", m.dst);
            let actions = {
                let crashed = next.crashed_flags();
                let view = SystemView { topology, crashed: &crashed };
                dispatch(protocol, topology, m.dst).on_message(&view, &next.states[m.dst.0], m)
            };
            absorb(&mut next, topology, m.dst, actions);
        }
        Event::LocalTimeout(p) => {
            let s = &next.states[p.0];
            assert!(!s.crashed && s.started && !s.decided(), "timeout of {p} is not enabled");
            let actions = {
                let crashed = next.crashed_flags();
                let view = SystemView { topology, crashed: &crashed };
                dispatch(protocol, topology, *p).on_timeout(&view, &next.states[p.0])
            };
            absorb(&mut next, topology, *p, actions);
        }
        Event::Crash(p) => {
            assert!(!next.states[p.0].crashed, "{p} is already crashed");
            next.states[p.0].crashed = true;
        }
    }
    next
}

/// Oracles always run the built-in oracle behavior, whatever protocol the
/// level-0 processes follow.
fn dispatch<'a>(
    protocol: &'a dyn Protocol,
    topology: &SystemTopology,
    p: ProcessId,
) -> &'a dyn Protocol {
    if topology.is_oracle(p) {
        oracle_behavior()
    } else {
        protocol
    }
}

fn absorb(config: &mut Configuration, topology: &SystemTopology, p: ProcessId, actions: crate::protocol::Actions) {
    if let Some(locals) = actions.locals {
        config.states[p.0].locals = locals;
    }
    for (dst, kind) in actions.sends {
        debug_assert!(
            topology.has_channel(p, dst),
            "{p} has no channel to {dst}"
        );
        let seq = config.states[p.0].next_seq;
        config.states[p.0].next_seq += 1;
        config.in_flight.push(Message { src: p, dst, seq, kind });
    }
    if let Some(v) = actions.decide {
        let out = &mut config.states[p.0].output;
        assert!(out.is_none(), "{p} attempted to decide twice");
        *out = Some(v);
    }
}

// ---------------------------------------------------------------- execution

/// A (possibly truncated) execution: the initial configuration and each
/// applied event with the configuration it produced.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Execution {
    pub topology: SystemTopology,
    pub initial: Configuration,
    pub steps: Vec<(Event, Configuration)>,
    /// True when the run hit a step bound while events were still enabled.
    pub truncated: bool,
}

impl Execution {
    pub fn final_config(&self) -> &Configuration {
        self.steps.last().map(|(_, c)| c).unwrap_or(&self.initial)
    }

    pub fn events(&self) -> impl Iterator<Item = &Event> {
        self.steps.iter().map(|(e, _)| e)
    }

    /// Configurations in order, index 0 being the initial one.
    pub fn configurations(&self) -> impl Iterator<Item = &Configuration> {
        std::iter::once(&self.initial).chain(self.steps.iter().map(|(_, c)| c))
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::protocol::protocol_for_key;

    fn vals(vs: &[u8]) -> Vec<Value> {
        vs.iter().map(|&v| Value(v)).collect()
    }

    #[test]
    fn complete_graph_channel_count() {
        // n processes, every ordered pair once: n*(n-1) channels.
        let topo = SystemTopology::complete(3).unwrap();
        let pairs = topo
            .processes()
            .flat_map(|a| topo.processes().map(move |b| (a, b)))
            .filter(|(a, b)| a != b && topo.has_channel(*a, *b))
            .count();
        assert_eq!(pairs, 6);
    }

    #[test]
    fn single_process_system_has_no_channels() {
        let topo = SystemTopology::complete(1).unwrap();
        assert!(!topo.has_channel(ProcessId(0), ProcessId(1)));
        assert_eq!(topo.len(), 1);
    }

    #[test]
    fn zero_processes_is_an_error() {
        assert_eq!(SystemTopology::complete(0).unwrap_err(), ModelError::EmptySystem);
    }

    #[test]
    fn value_count_must_match() {
        let err = build_system(3, &vals(&[0, 1])).unwrap_err();
        assert_eq!(err, ModelError::ValueCountMismatch { expected: 3, got: 2 });
    }

    #[test]
    fn oracle_sits_one_level_up_and_is_fully_connected() {
        let topo = SystemTopology::complete(3).unwrap();
        let topo = topo.with_oracle(ProcessId(0)).unwrap();
        let o = ProcessId(3);
        assert_eq!(topo.level(o), 1);
        assert_eq!(topo.oracle_target(o), Some(ProcessId(0)));
        for p in [ProcessId(0), ProcessId(1), ProcessId(2)] {
            assert!(topo.has_channel(p, o) && topo.has_channel(o, p));
        }
        // Existing processes untouched.
        assert_eq!(topo.level(ProcessId(0)), 0);
    }

    #[test]
    fn oracle_of_oracle_sits_two_levels_up() {
        let topo = SystemTopology::complete(3)
            .unwrap()
            .with_layers(&[ProcessId(0)].into_iter().collect(), 2)
            .unwrap();
        assert_eq!(topo.len(), 5);
        assert_eq!(topo.level(ProcessId(3)), 1);
        assert_eq!(topo.level(ProcessId(4)), 2);
        assert_eq!(topo.oracle_target(ProcessId(4)), Some(ProcessId(3)));
        assert_eq!(topo.max_level(), 2);
    }

    #[test]
    fn unknown_oracle_target_is_an_error() {
        let topo = SystemTopology::complete(2).unwrap();
        assert_eq!(
            topo.with_oracle(ProcessId(7)).unwrap_err(),
            ModelError::UnknownProcess(ProcessId(7))
        );
    }

    #[test]
    fn enabled_events_empty_when_quiet() {
        // All started, nothing in flight, no crash budget, no timeouts.
        let (topo, mut config) = build_system(2, &vals(&[0, 1])).unwrap();
        for s in &mut config.states {
            s.started = true;
        }
        let p0 = protocol_for_key("p0", 1).unwrap();
        let events = enabled_events(&config, &topo, p0.as_ref(), &CrashPolicy::budget(0));
        assert!(events.is_empty());
    }

    #[test]
    fn crash_options_follow_budget_and_targets() {
        let (topo, config) = build_system(3, &vals(&[0, 1, 1])).unwrap();
        let p0 = protocol_for_key("p0", 1).unwrap();
        let all = enabled_events(&config, &topo, p0.as_ref(), &CrashPolicy::budget(1));
        let crashes: Vec<_> =
            all.iter().filter(|e| matches!(e, Event::Crash(_))).collect();
        assert_eq!(crashes.len(), 3);

        let targeted = CrashPolicy::targeted(1, [ProcessId(1)].into_iter().collect());
        let some = enabled_events(&config, &topo, p0.as_ref(), &targeted);
        let crashes: Vec<_> =
            some.iter().filter(|e| matches!(e, Event::Crash(_))).collect();
        assert_eq!(crashes, vec![&Event::Crash(ProcessId(1))]);
    }

    #[test]
    fn crash_freezes_a_process() {
        let (topo, config) = build_system(2, &vals(&[0, 1])).unwrap();
        let p0 = protocol_for_key("p0", 1).unwrap();
        let after = apply_event(&config, &Event::Crash(ProcessId(0)), &topo, p0.as_ref());
        assert!(after.states[0].crashed);
        // Its start is no longer offered; deliveries to it are gone too.
        let events = enabled_events(&after, &topo, p0.as_ref(), &CrashPolicy::budget(0));
        assert!(!events.iter().any(|e| matches!(e, Event::Start(p) if *p == ProcessId(0))));
    }

    #[test]
    #[should_panic(expected = "not in flight")]
    fn delivering_a_phantom_message_panics() {
        let (topo, config) = build_system(2, &vals(&[0, 1])).unwrap();
        let p0 = protocol_for_key("p0", 1).unwrap();
        let phantom = Message {
            src: ProcessId(0),
            dst: ProcessId(1),
            seq: 9,
            kind: MessageKind::Dummy,
        };
        apply_event(&config, &Event::Deliver(phantom), &topo, p0.as_ref());
    }

    #[test]
    #[should_panic(expected = "already crashed")]
    fn crashing_twice_panics() {
        let (topo, config) = build_system(2, &vals(&[0, 1])).unwrap();
        let p0 = protocol_for_key("p0", 1).unwrap();
        let once = apply_event(&config, &Event::Crash(ProcessId(0)), &topo, p0.as_ref());
        apply_event(&once, &Event::Crash(ProcessId(0)), &topo, p0.as_ref());
    }

    #[test]
    fn digest_distinguishes_output_changes() {
        let (_, config) = build_system(2, &vals(&[0, 1])).unwrap();
        let mut other = config.clone();
        other.states[1].output = Some(Value(1));
        assert_ne!(config.digest(), other.digest());
    }

    #[test]
    fn digest_ignores_in_flight_ordering() {
        let (_, mut config) = build_system(2, &vals(&[0, 1])).unwrap();
        let a = Message { src: ProcessId(0), dst: ProcessId(1), seq: 0, kind: MessageKind::Dummy };
        let b = Message { src: ProcessId(1), dst: ProcessId(0), seq: 0, kind: MessageKind::Dummy };
        config.in_flight = vec![a, b];
        let mut flipped = config.clone();
        flipped.in_flight = vec![b, a];
        assert_eq!(config.digest(), flipped.digest());
    }

    #[test]
    fn digest_roundtrips_through_hex() {
        let (_, config) = build_system(2, &vals(&[0, 1])).unwrap();
        let d = config.digest();
        assert_eq!(ConfigDigest::parse(&d.to_string()), Some(d));
    }
}
