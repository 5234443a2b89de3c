//! Protocol handlers: the pure per-process logic layered over the system
//! model.
//!
//! All handlers are pure functions from `(view, local state, stimulus)` to
//! [`Actions`]; they never touch global state directly and never see the
//! scheduler. That purity is what makes exhaustive exploration honest: the
//! engine may call a handler speculatively, cache configurations by digest,
//! and replay schedules, all without the protocol noticing.
//!
//! The family implemented here is flooding min-consensus:
//!
//!  - `p0`: announce your value to everyone, decide the minimum once you have
//!    heard from every participant. Never gives up waiting.
//!  - `p1`: `p0` plus a local timeout that decides the minimum of whatever
//!    has arrived so far (once at least `quorum` values are in).
//!  - `p1-padded:k`: `p1` that mails itself `k` content-free dummies at
//!    startup and refuses to release a decision until they are all consumed.
//!    Same decisions, strictly later.
//!  - `p0-oracle` / `p1-oracle`: on first timeout, query every oracle once
//!    instead of deciding. A verdict of "crashed" removes that process from
//!    the awaited set. The `p1` flavor keeps a last-resort timeout decision
//!    for when an oracle itself dies mid-conversation; the `p0` flavor never
//!    decides on a timeout.
//!  - `p3:<logic>`: `p1` dynamics, tagged with the logic its outcome sets are
//!    meant to be read in.
//!
//! Oracles themselves run [`OracleBehavior`] regardless of the configured
//! protocol: answer crash queries about their target truthfully, decide
//! nothing, say nothing unprompted.

use std::collections::BTreeSet;

use crate::model::{
    Locals, Message, MessageKind, ProcessId, ProcessState, SystemTopology, Value,
};

/// Read-only global facts a handler may consult: the static topology and the
/// ground-truth crash flags (the latter only matters to oracles; ordinary
/// processes must not peek and the flood family never does).
pub struct SystemView<'a> {
    pub topology: &'a SystemTopology,
    pub crashed: &'a [bool],
}

/// What a handler wants done: messages to send (stamped and enqueued by the
/// engine), an optional decision, and replacement local memory.
#[derive(Clone, PartialEq, Eq, Debug, Default)]
pub struct Actions {
    pub sends: Vec<(ProcessId, MessageKind)>,
    pub decide: Option<Value>,
    pub locals: Option<Locals>,
}

pub trait Protocol {
    /// Canonical registry key, e.g. `p1-padded:2`.
    fn key(&self) -> &str;
    /// Whether local timeouts exist at all for this protocol.
    fn timeouts_enabled(&self) -> bool;
    /// Whether this process has waited long enough that a timeout may fire.
    /// The engine adds its own gating on top (inbox drained, a crash has
    /// actually happened, no live oracle round-trip pending).
    fn timeout_ready(&self, view: &SystemView, state: &ProcessState) -> bool;
    /// First step of a process: runs exactly once, before any of its sends.
    fn on_init(&self, view: &SystemView, state: &ProcessState) -> Actions;
    fn on_message(&self, view: &SystemView, state: &ProcessState, msg: &Message) -> Actions;
    fn on_timeout(&self, view: &SystemView, state: &ProcessState) -> Actions;
    /// For protocols whose outcomes are meant to be read in a particular
    /// logic, its key (`cpl`, `c1`.., `mbc`).
    fn outcome_logic(&self) -> Option<&str> {
        None
    }
}

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum ProtocolError {
    #[error("unknown protocol key `{0}`")]
    UnknownKey(String),
    #[error("bad padding count in `{0}`: expected p1-padded:<k> with k >= 1")]
    BadPadding(String),
    #[error("bad outcome logic in `{0}`: {1}")]
    BadLogic(String, String),
}

/// Build a protocol from its registry key. `quorum` is the minimum number of
/// recorded values (own one included) before a `p1`-flavor timeout is ready.
pub fn protocol_for_key(key: &str, quorum: usize) -> Result<Box<dyn Protocol>, ProtocolError> {
    match key {
        "p0" => return Ok(Box::new(Flood::p0())),
        "p1" => return Ok(Box::new(Flood::p1(quorum))),
        "p0-oracle" => return Ok(Box::new(Flood::p0_oracle())),
        "p1-oracle" => return Ok(Box::new(Flood::p1_oracle(quorum))),
        _ => {}
    }
    if let Some(k) = key.strip_prefix("p1-padded:") {
        let k: u32 = k.parse().map_err(|_| ProtocolError::BadPadding(key.to_string()))?;
        if k == 0 {
            return Err(ProtocolError::BadPadding(key.to_string()));
        }
        return Ok(Box::new(Flood::p1_padded(k, quorum)));
    }
    if let Some(logic) = key.strip_prefix("p3:") {
        crate::logic::LogicId::parse(logic)
            .map_err(|e| ProtocolError::BadLogic(key.to_string(), e.to_string()))?;
        return Ok(Box::new(Flood::p3(logic, quorum)));
    }
    Err(ProtocolError::UnknownKey(key.to_string()))
}

// ---------------------------------------------------------------- flood-min

/// The whole flood-min family behind one parameterised struct; the registry
/// constructors pin down the five published variants.
pub struct Flood {
    key: String,
    timeouts: bool,
    quorum: usize,
    padding: u32,
    oracle_aware: bool,
    outcome_logic: Option<String>,
}

impl Flood {
    pub fn p0() -> Self {
        Flood {
            key: "p0".into(),
            timeouts: false,
            quorum: 1,
            padding: 0,
            oracle_aware: false,
            outcome_logic: None,
        }
    }

    pub fn p1(quorum: usize) -> Self {
        Flood { key: "p1".into(), quorum, timeouts: true, ..Flood::p0() }
    }

    pub fn p1_padded(k: u32, quorum: usize) -> Self {
        Flood {
            key: format!("p1-padded:{k}"),
            quorum,
            timeouts: true,
            padding: k,
            ..Flood::p0()
        }
    }

    pub fn p0_oracle() -> Self {
        Flood { key: "p0-oracle".into(), timeouts: true, oracle_aware: true, ..Flood::p0() }
    }

    pub fn p1_oracle(quorum: usize) -> Self {
        Flood {
            key: "p1-oracle".into(),
            quorum,
            timeouts: true,
            oracle_aware: true,
            ..Flood::p0()
        }
    }

    pub fn p3(logic: &str, quorum: usize) -> Self {
        Flood {
            key: format!("p3:{logic}"),
            quorum,
            timeouts: true,
            outcome_logic: Some(logic.to_string()),
            ..Flood::p0()
        }
    }

    /// The processes whose values must be in before a full-information
    /// decision: all ordinary participants, minus any an oracle has reported
    /// crashed. Without oracle awareness nobody is ever struck off.
    fn awaited(&self, view: &SystemView, locals: &Locals) -> BTreeSet<ProcessId> {
        let mut set: BTreeSet<ProcessId> = view.topology.level0().collect();
        if self.oracle_aware {
            for (o, crashed) in &locals.verdicts {
                if !crashed {
                    continue;
                }
                if let Some(t) = view.topology.oracle_target(*o) {
                    if view.topology.level(t) == 0 {
                        set.remove(&t);
                    }
                }
            }
        }
        set
    }

    /// Every oracle has either answered or been reported crashed by another
    /// oracle. Only then is the verdict picture considered settled.
    fn verdicts_complete(&self, view: &SystemView, locals: &Locals) -> bool {
        view.topology.oracles().all(|o| {
            locals.verdicts.contains_key(&o)
                || view.topology.oracles().any(|o2| {
                    view.topology.oracle_target(o2) == Some(o)
                        && locals.verdicts.get(&o2) == Some(&true)
                })
        })
    }

    /// Decide if the condition is met, routing through the padding gate.
    /// The decision value is the minimum over everything recorded, including
    /// values from processes no longer awaited: information already flooded
    /// must not be un-learned, or two deciders could disagree.
    fn try_decide(&self, view: &SystemView, state: &ProcessState, locals: &mut Locals) -> Option<Value> {
        if state.output.is_some() {
            return None;
        }
        let needed = self.awaited(view, locals);
        if !needed.iter().all(|p| locals.received.contains_key(p)) {
            return None;
        }
        let value = *locals.received.values().min()?;
        self.gate_padding(locals, value)
    }

    /// While padding is outstanding the first would-be decision is parked in
    /// `pending_decision`; consuming the last dummy releases it.
    fn gate_padding(&self, locals: &mut Locals, value: Value) -> Option<Value> {
        if locals.dummies_left > 0 {
            if locals.pending_decision.is_none() {
                locals.pending_decision = Some(value);
            }
            None
        } else {
            Some(value)
        }
    }
}

fn has_oracles(view: &SystemView) -> bool {
    view.topology.oracles().next().is_some()
}

impl Protocol for Flood {
    fn key(&self) -> &str {
        &self.key
    }

    fn timeouts_enabled(&self) -> bool {
        self.timeouts
    }

    fn timeout_ready(&self, view: &SystemView, state: &ProcessState) -> bool {
        if !self.timeouts {
            return false;
        }
        let locals = &state.locals;
        if self.oracle_aware && has_oracles(view) {
            if !locals.queried {
                // Query round first; the p1 flavor additionally insists on
                // the usual quorum of recorded values.
                return self.key != "p1-oracle" || locals.received.len() >= self.quorum;
            }
            // After the query round only the p1 flavor may time out again,
            // and only while some oracle is unaccounted for.
            return self.key == "p1-oracle"
                && !self.verdicts_complete(view, locals)
                && locals.received.len() >= self.quorum;
        }
        if self.key == "p0-oracle" {
            // Without oracles to ask there is nothing a timeout could do.
            return false;
        }
        locals.received.len() >= self.quorum
    }

    fn on_init(&self, view: &SystemView, state: &ProcessState) -> Actions {
        let mut locals = state.locals.clone();
        locals.received.insert(state.id, state.initial_value);
        let mut sends: Vec<(ProcessId, MessageKind)> = view
            .topology
            .level0()
            .filter(|p| *p != state.id)
            .map(|p| (p, MessageKind::Announce(state.initial_value)))
            .collect();
        if self.padding > 0 {
            locals.dummies_left = self.padding;
            for _ in 0..self.padding {
                sends.push((state.id, MessageKind::Dummy));
            }
        }
        let decide = self.try_decide(view, state, &mut locals);
        Actions { sends, decide, locals: Some(locals) }
    }

    fn on_message(&self, view: &SystemView, state: &ProcessState, msg: &Message) -> Actions {
        let mut locals = state.locals.clone();
        let mut decide = None;
        match msg.kind {
            MessageKind::Announce(v) => {
                locals.received.insert(msg.src, v);
                decide = self.try_decide(view, state, &mut locals);
            }
            MessageKind::OracleReply(crashed) => {
                locals.verdicts.insert(msg.src, crashed);
                if self.oracle_aware {
                    decide = self.try_decide(view, state, &mut locals);
                }
            }
            MessageKind::Dummy => {
                if locals.dummies_left > 0 {
                    locals.dummies_left -= 1;
                    if locals.dummies_left == 0 && state.output.is_none() {
                        decide = locals.pending_decision.take();
                    }
                }
            }
            MessageKind::OracleQuery => {}
        }
        Actions { sends: Vec::new(), decide, locals: Some(locals) }
    }

    fn on_timeout(&self, view: &SystemView, state: &ProcessState) -> Actions {
        let mut locals = state.locals.clone();
        if self.oracle_aware && !locals.queried && has_oracles(view) {
            locals.queried = true;
            let sends = view
                .topology
                .oracles()
                .map(|o| (o, MessageKind::OracleQuery))
                .collect();
            return Actions { sends, decide: None, locals: Some(locals) };
        }
        let value = *locals
            .received
            .values()
            .min()
            .expect("timeout fired before the initial step");
        let decide = self.gate_padding(&mut locals, value);
        Actions { sends: Vec::new(), decide, locals: Some(locals) }
    }

    fn outcome_logic(&self) -> Option<&str> {
        self.outcome_logic.as_deref()
    }
}

// ---------------------------------------------------------------- oracles

/// Behavior every oracle process runs: answer crash queries about its target
/// with the ground truth at processing time. The answer may be stale by the
/// time it arrives — that staleness is the whole phenomenon under study.
pub struct OracleBehavior;

static ORACLE: OracleBehavior = OracleBehavior;

pub fn oracle_behavior() -> &'static dyn Protocol {
    &ORACLE
}

impl Protocol for OracleBehavior {
    fn key(&self) -> &str {
        "oracle"
    }

    fn timeouts_enabled(&self) -> bool {
        false
    }

    fn timeout_ready(&self, _view: &SystemView, _state: &ProcessState) -> bool {
        false
    }

    fn on_init(&self, _view: &SystemView, _state: &ProcessState) -> Actions {
        Actions::default()
    }

    fn on_message(&self, view: &SystemView, state: &ProcessState, msg: &Message) -> Actions {
        match msg.kind {
            MessageKind::OracleQuery => {
                let target = view
                    .topology
                    .oracle_target(state.id)
                    .expect("oracle without a target");
                Actions {
                    sends: vec![(msg.src, MessageKind::OracleReply(view.crashed[target.0]))],
                    ..Actions::default()
                }
            }
            _ => Actions::default(),
        }
    }

    fn on_timeout(&self, _view: &SystemView, _state: &ProcessState) -> Actions {
        Actions::default()
    }
}
