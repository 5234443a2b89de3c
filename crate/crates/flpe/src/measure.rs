//! Measurement: property profiles over terminal configurations, fault-count
//! sweeps, transition detection, and the two "does the failure mode come
//! back?" transforms (oracle layering and schedule padding).
//!
//! The observables are deliberately coarse. Each terminal configuration is
//! summarised as a three-bit profile:
//!
//!  - termination: every non-crashed participant decided
//!  - consistency: all decisions (including those of processes that decided
//!    and later crashed) are pairwise equal
//!  - non-triviality: every decision is one of the proposed values
//!
//! A sweep runs exhaustive exploration at each value of a single feature
//! (total crash budget, or crash budget confined to one oracle level) and
//! records the set of profiles reachable at termination. A transition is
//! the smallest feature value at which that set changes; the profile that
//! appears is the interesting one, so failure profiles (consistency first,
//! then termination) are preferred as the representative.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::logic::Formula;
use crate::model::{
    initial_configuration, Configuration, CrashPolicy, Event, Execution, MessageKind, ModelError,
    ProcessId, SystemTopology, Value,
};
use crate::protocol::{protocol_for_key, Protocol, ProtocolError};
use crate::scheduler::{explore, replay, SchedulerError};

// ---------------------------------------------------------------- profiles

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct PropertyProfile {
    pub termination: bool,
    pub consistency: bool,
    pub non_triviality: bool,
}

impl PropertyProfile {
    pub const ALL_GOOD: PropertyProfile =
        PropertyProfile { termination: true, consistency: true, non_triviality: true };
}

impl fmt::Display for PropertyProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let t = |b: bool| if b { 'T' } else { 'F' };
        write!(f, "({},{},{})", t(self.termination), t(self.consistency), t(self.non_triviality))
    }
}

/// Profile of one configuration. All three properties are judged over the
/// ordinary (level-0) participants only; oracles neither propose nor decide.
pub fn profile_of(config: &Configuration, topology: &SystemTopology) -> PropertyProfile {
    let level0: Vec<ProcessId> = topology.level0().collect();
    let termination =
        level0.iter().all(|p| config.state(*p).crashed || config.state(*p).decided());
    let decided: Vec<Value> = level0.iter().filter_map(|p| config.state(*p).output).collect();
    let consistency = decided.windows(2).all(|w| w[0] == w[1]);
    let initials: BTreeSet<Value> =
        level0.iter().map(|p| config.state(*p).initial_value).collect();
    let non_triviality = decided.iter().all(|v| initials.contains(v));
    PropertyProfile { termination, consistency, non_triviality }
}

/// Decisions of the ordinary participants, decided ones only.
pub fn decisions(config: &Configuration, topology: &SystemTopology) -> BTreeMap<ProcessId, Value> {
    topology.level0().filter_map(|p| config.state(p).output.map(|v| (p, v))).collect()
}

/// Index of the first configuration in an execution (0 = initial) whose
/// profile violates consistency.
pub fn first_inconsistent_index(execution: &Execution) -> Option<usize> {
    execution
        .configurations()
        .position(|c| !profile_of(c, &execution.topology).consistency)
}

// ------------------------------------------------------------ fault counts

/// Crashes among the processes at one oracle level.
pub fn fault_count_at_level(config: &Configuration, topology: &SystemTopology, level: u32) -> usize {
    topology.at_level(level).filter(|p| config.state(*p).crashed).count()
}

/// Crashes across all levels.
pub fn fault_count(config: &Configuration) -> usize {
    config.crashed_count()
}

/// Exactly one crash at the topmost oracle level: the single-fault condition
/// at whatever level the hierarchy currently tops out.
pub fn maximal_level_condition(config: &Configuration, topology: &SystemTopology) -> bool {
    fault_count_at_level(config, topology, topology.max_level()) == 1
}

// ----------------------------------------------------------------- sweeps

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum SweptFeature {
    /// Total crash budget, any process.
    FaultCount,
    /// Crash budget confined to the processes at one oracle level.
    FaultCountAtLevel(u32),
}

impl fmt::Display for SweptFeature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SweptFeature::FaultCount => write!(f, "g"),
            SweptFeature::FaultCountAtLevel(l) => write!(f, "g@{l}"),
        }
    }
}

#[derive(Debug)]
pub struct SweepRow {
    pub feature_value: usize,
    pub profiles: BTreeSet<PropertyProfile>,
    /// Shortest witness schedule per profile (BFS order guarantees it).
    pub witnesses: BTreeMap<PropertyProfile, Vec<Event>>,
    pub visited: usize,
    pub truncated: usize,
    pub partial: bool,
}

#[derive(Debug)]
pub struct Sweep {
    pub feature: SweptFeature,
    pub rows: Vec<SweepRow>,
}

impl Sweep {
    pub fn partial(&self) -> bool {
        self.rows.iter().any(|r| r.partial)
    }
}

fn policy_for(feature: SweptFeature, value: usize, topology: &SystemTopology) -> CrashPolicy {
    match feature {
        SweptFeature::FaultCount => CrashPolicy::budget(value),
        SweptFeature::FaultCountAtLevel(l) => {
            CrashPolicy::targeted(value, topology.at_level(l).collect())
        }
    }
}

/// Explore the full schedule space at every feature value `0..=max_value`
/// and tabulate the reachable terminal profiles.
pub fn sweep(
    topology: &SystemTopology,
    values: &[Value],
    protocol: &dyn Protocol,
    feature: SweptFeature,
    max_value: usize,
    depth_bound: usize,
    state_cap: usize,
) -> Result<Sweep, MeasureError> {
    let initial = initial_configuration(topology, values)?;
    let mut rows = Vec::with_capacity(max_value + 1);
    for v in 0..=max_value {
        let policy = policy_for(feature, v, topology);
        let ex = explore(topology, &initial, protocol, &policy, depth_bound, state_cap);
        let mut profiles = BTreeSet::new();
        let mut witnesses: BTreeMap<PropertyProfile, Vec<Event>> = BTreeMap::new();
        for t in &ex.terminals {
            let profile = profile_of(&t.config, topology);
            profiles.insert(profile);
            witnesses
                .entry(profile)
                .or_insert_with(|| ex.witness(&t.digest).expect("terminal has a witness"));
        }
        rows.push(SweepRow {
            feature_value: v,
            profiles,
            witnesses,
            visited: ex.visited,
            truncated: ex.truncated,
            partial: ex.partial,
        });
    }
    Ok(Sweep { feature, rows })
}

// -------------------------------------------------------------- transitions

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Transition {
    /// Smallest feature value whose profile set differs from its predecessor.
    pub at: usize,
    pub before: BTreeSet<PropertyProfile>,
    pub after: BTreeSet<PropertyProfile>,
    /// Representative newly-appearing profile; consistency failures first,
    /// then termination failures, then whatever changed.
    pub after_profile: PropertyProfile,
}

pub fn detect_transition(sweep: &Sweep) -> Option<Transition> {
    for pair in sweep.rows.windows(2) {
        let (prev, next) = (&pair[0], &pair[1]);
        if prev.profiles == next.profiles {
            continue;
        }
        let fresh: Vec<PropertyProfile> =
            next.profiles.difference(&prev.profiles).copied().collect();
        let after_profile = fresh
            .iter()
            .find(|p| !p.consistency)
            .or_else(|| fresh.iter().find(|p| !p.termination))
            .or_else(|| fresh.first())
            .or_else(|| next.profiles.iter().next())
            .copied()?;
        return Some(Transition {
            at: next.feature_value,
            before: prev.profiles.clone(),
            after: next.profiles.clone(),
            after_profile,
        });
    }
    None
}

// ---------------------------------------------------------------- emergence

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Transform {
    /// Cover the (known-faulty or topmost-level) processes with one oracle
    /// each and ask whether the failure mode climbs one level up.
    AddOracle,
    /// Pad the protocol with k self-addressed dummies per process and ask
    /// whether the failure mode survives, shifted later in the schedule.
    Pad(u32),
}

impl fmt::Display for Transform {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Transform::AddOracle => write!(f, "add-oracle"),
            Transform::Pad(k) => write!(f, "pad:{k}"),
        }
    }
}

pub struct EmergenceInputs<'a> {
    pub topology: &'a SystemTopology,
    pub values: &'a [Value],
    pub protocol_key: &'a str,
    pub quorum: usize,
    pub known_faulty: &'a BTreeSet<ProcessId>,
    pub budget: usize,
    pub depth_bound: usize,
    pub state_cap: usize,
}

#[derive(Clone, Debug)]
pub struct EmergenceReport {
    pub transform: Transform,
    pub baseline: Transition,
    /// The baseline failure profile is gone under the transform, at the same
    /// feature value (oracle transform) or original step index (padding).
    pub suppressed: bool,
    /// An equivalent transition reappears: one oracle level up, or later in
    /// the schedule with the same profile and the same decisions.
    pub recurred: bool,
    pub recurred_at_level: Option<u32>,
    pub step_shift: Option<usize>,
}

#[derive(Debug, thiserror::Error)]
pub enum MeasureError {
    #[error("no baseline transition: the swept feature never changes the profile set")]
    NoBaselineTransition,
    #[error("no witness schedule for profile {0}")]
    NoWitness(PropertyProfile),
    #[error("transform `{transform}` does not apply to protocol `{protocol}`")]
    TransformMismatch { transform: String, protocol: String },
    #[error("correspondence replay broke at step {0}: {1}")]
    Correspondence(usize, String),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Protocol(#[from] ProtocolError),
    #[error(transparent)]
    Scheduler(#[from] SchedulerError),
}

/// Does the transform merely suppress the baseline failure, or does the same
/// failure re-emerge against the transformed system?
pub fn check_emergence(
    inputs: &EmergenceInputs,
    transform: Transform,
) -> Result<EmergenceReport, MeasureError> {
    match transform {
        Transform::AddOracle => check_oracle_emergence(inputs),
        Transform::Pad(k) => check_pad_emergence(inputs, k),
    }
}

fn check_oracle_emergence(inputs: &EmergenceInputs) -> Result<EmergenceReport, MeasureError> {
    let protocol = protocol_for_key(inputs.protocol_key, inputs.quorum)?;
    let top = inputs.topology.max_level();
    let budget = inputs.budget.max(1);

    let baseline_sweep = sweep(
        inputs.topology,
        inputs.values,
        protocol.as_ref(),
        SweptFeature::FaultCountAtLevel(top),
        budget,
        inputs.depth_bound,
        inputs.state_cap,
    )?;
    let baseline = detect_transition(&baseline_sweep).ok_or(MeasureError::NoBaselineTransition)?;

    // Cover the suspects: the declared known-faulty set at ground level, or
    // everything at the current top level when iterating the construction.
    let covered: BTreeSet<ProcessId> = if top == 0 && !inputs.known_faulty.is_empty() {
        inputs.known_faulty.clone()
    } else {
        inputs.topology.at_level(top).collect()
    };
    let transformed = inputs.topology.with_hierarchy(&covered)?;

    let same_level = sweep(
        &transformed,
        inputs.values,
        protocol.as_ref(),
        SweptFeature::FaultCountAtLevel(top),
        baseline.at,
        inputs.depth_bound,
        inputs.state_cap,
    )?;
    let suppressed = same_level
        .rows
        .iter()
        .find(|r| r.feature_value == baseline.at)
        .map(|r| !r.profiles.contains(&baseline.after_profile))
        .unwrap_or(false);

    let next_level = sweep(
        &transformed,
        inputs.values,
        protocol.as_ref(),
        SweptFeature::FaultCountAtLevel(top + 1),
        baseline.at,
        inputs.depth_bound,
        inputs.state_cap,
    )?;
    let recurrence = detect_transition(&next_level);
    let recurred = recurrence
        .as_ref()
        .map(|t| t.before == baseline.before && t.after == baseline.after)
        .unwrap_or(false);

    Ok(EmergenceReport {
        transform: Transform::AddOracle,
        baseline,
        suppressed,
        recurred,
        recurred_at_level: recurred.then_some(top + 1),
        step_shift: None,
    })
}

fn check_pad_emergence(inputs: &EmergenceInputs, k: u32) -> Result<EmergenceReport, MeasureError> {
    if inputs.protocol_key != "p1" {
        return Err(MeasureError::TransformMismatch {
            transform: Transform::Pad(k).to_string(),
            protocol: inputs.protocol_key.to_string(),
        });
    }
    let base_protocol = protocol_for_key("p1", inputs.quorum)?;
    let budget = inputs.budget.max(1);

    let baseline_sweep = sweep(
        inputs.topology,
        inputs.values,
        base_protocol.as_ref(),
        SweptFeature::FaultCount,
        budget,
        inputs.depth_bound,
        inputs.state_cap,
    )?;
    let baseline = detect_transition(&baseline_sweep).ok_or(MeasureError::NoBaselineTransition)?;
    let witness = baseline_sweep
        .rows
        .iter()
        .find(|r| r.feature_value == baseline.at)
        .and_then(|r| r.witnesses.get(&baseline.after_profile))
        .cloned()
        .ok_or(MeasureError::NoWitness(baseline.after_profile))?;

    let initial = initial_configuration(inputs.topology, inputs.values)?;
    let policy = CrashPolicy::budget(baseline.at);
    let base_exec =
        replay(inputs.topology, initial.clone(), base_protocol.as_ref(), &policy, &witness)?;

    let padded_protocol = protocol_for_key(&format!("p1-padded:{k}"), inputs.quorum)?;
    let padded_events =
        padded_correspondence(inputs.topology, &initial, padded_protocol.as_ref(), &policy, &witness, k)?;
    let padded_exec =
        replay(inputs.topology, initial, padded_protocol.as_ref(), &policy, &padded_events)?;

    let base_bad = first_inconsistent_index(&base_exec);
    let padded_bad = first_inconsistent_index(&padded_exec);
    let step_shift = match (base_bad, padded_bad) {
        (Some(b), Some(p)) => Some(p.saturating_sub(b)),
        _ => None,
    };
    let recurred = profile_of(base_exec.final_config(), inputs.topology)
        == profile_of(padded_exec.final_config(), inputs.topology)
        && decisions(base_exec.final_config(), inputs.topology)
            == decisions(padded_exec.final_config(), inputs.topology)
        && padded_bad.is_some();

    Ok(EmergenceReport {
        transform: Transform::Pad(k),
        baseline,
        suppressed: step_shift.map(|s| s > 0).unwrap_or(false),
        recurred,
        recurred_at_level: None,
        step_shift,
    })
}

/// Map a schedule of the plain protocol onto the padded one: every `Start`
/// is followed by delivering the k fresh self-addressed dummies, and every
/// other event is matched to the padded run's corresponding message (same
/// source, destination and payload; lowest outstanding sequence number).
/// The resulting schedule drains padding as soon as it is mailed, which is
/// exactly what makes the two runs track each other state for state.
pub fn padded_correspondence(
    topology: &SystemTopology,
    initial: &Configuration,
    padded: &dyn Protocol,
    policy: &CrashPolicy,
    base_events: &[Event],
    k: u32,
) -> Result<Vec<Event>, MeasureError> {
    use crate::model::{apply_event, enabled_events};

    let mut config = initial.clone();
    let mut out: Vec<Event> = Vec::with_capacity(base_events.len() + base_events.len() * k as usize);
    let mut push = |config: &mut Configuration, event: Event, at: usize| {
        let enabled = enabled_events(config, topology, padded, policy);
        if !enabled.contains(&event) {
            return Err(MeasureError::Correspondence(at, format!("`{event}` not enabled")));
        }
        *config = apply_event(config, &event, topology, padded);
        out.push(event);
        Ok(())
    };

    for (at, event) in base_events.iter().enumerate() {
        match event {
            Event::Start(p) => {
                push(&mut config, Event::Start(*p), at)?;
                for _ in 0..k {
                    let dummy = config
                        .in_flight
                        .iter()
                        .filter(|m| m.src == *p && m.dst == *p && m.kind == MessageKind::Dummy)
                        .min_by_key(|m| m.seq)
                        .copied()
                        .ok_or_else(|| {
                            MeasureError::Correspondence(at, format!("no dummy to drain for {p}"))
                        })?;
                    push(&mut config, Event::Deliver(dummy), at)?;
                }
            }
            Event::Deliver(m) => {
                let matched = config
                    .in_flight
                    .iter()
                    .filter(|x| x.src == m.src && x.dst == m.dst && x.kind == m.kind)
                    .min_by_key(|x| x.seq)
                    .copied()
                    .ok_or_else(|| {
                        MeasureError::Correspondence(
                            at,
                            format!("no padded counterpart for `{event}`"),
                        )
                    })?;
                push(&mut config, Event::Deliver(matched), at)?;
            }
            other => push(&mut config, *other, at)?,
        }
    }
    Ok(out)
}

// ------------------------------------------------------- outcome encoding

/// Encode the decisions of a terminal configuration as assertions readable
/// in a propositional language: `Dv` for each decided value `v`, plus the
/// exclusivity axioms `Da -> ~Db` for every ordered pair of distinct values
/// in the decided set and the proposal alphabet. A split decision thereby
/// becomes a contradictory assertion set — for a classical reader.
pub fn encode_outcome(
    config: &Configuration,
    topology: &SystemTopology,
    alphabet: &[Value],
) -> Vec<Formula> {
    let decided: BTreeSet<Value> =
        topology.level0().filter_map(|p| config.state(p).output).collect();
    let mut universe: BTreeSet<Value> = decided.clone();
    universe.extend(alphabet.iter().copied());

    let atom = |v: Value| Formula::atom(format!("D{v}"));
    let mut out: Vec<Formula> = decided.iter().map(|v| atom(*v)).collect();
    for a in &universe {
        for b in &universe {
            if a != b {
                out.push(atom(*a).imp(atom(*b).not()));
            }
        }
    }
    out
}
