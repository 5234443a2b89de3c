//! Adversarial schedulers: seeded random runs, schedule replay, and
//! exhaustive bounded exploration of the whole schedule space.
//!
//! The adversary owns every nondeterministic choice in the model — message
//! interleaving, when (and whether) to use the crash budget, when gated
//! timeouts fire. Three drivers share the same transition functions:
//!
//!  - [`run`]: one execution under a seeded adversary. Identical inputs and
//!    seed give identical executions, event for event and byte for byte.
//!  - [`replay`]: re-run a recorded schedule, validating at every step that
//!    the event really was enabled. A witness that fails replay is a bug.
//!  - [`explore`]: breadth-first enumeration of every reachable
//!    configuration up to a depth bound, deduplicated by content digest,
//!    with a parent map so any terminal configuration can be turned into a
//!    shortest witness schedule.
//!
//! Exploration is the ground truth the seeded adversary is measured against:
//! anything a random run exhibits must appear among the explored terminals
//! (at sufficient depth), never the other way round.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::model::{
    apply_event, enabled_events, Configuration, ConfigDigest, CrashPolicy, Event, ProcessId,
    SystemTopology,
};
use crate::protocol::Protocol;

pub use crate::model::Execution;

pub const DEFAULT_STEP_BOUND: usize = 200;
pub const DEFAULT_DEPTH_BOUND: usize = 24;
pub const DEFAULT_STATE_CAP: usize = 5_000_000;

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum AdversaryKind {
    /// Uniform choice over the enabled events, from a seeded generator.
    Seeded,
    /// Like `Seeded`, but deliveries to the victim are deferred while any
    /// other event is available.
    TargetedDelay(ProcessId),
    /// Marker for "enumerate everything"; drives [`explore`], not [`run`].
    Exhaustive,
}

/// A fully specified adversary. The crash plan pins crashes to exact step
/// indices; a non-empty plan disables spontaneous crash choices so the
/// schedule stays scripted.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Adversary {
    pub kind: AdversaryKind,
    pub seed: u64,
    pub crash_plan: BTreeMap<usize, ProcessId>,
}

impl Adversary {
    pub fn seeded(seed: u64) -> Self {
        Adversary { kind: AdversaryKind::Seeded, seed, crash_plan: BTreeMap::new() }
    }

    pub fn targeted_delay(victim: ProcessId, seed: u64) -> Self {
        Adversary { kind: AdversaryKind::TargetedDelay(victim), seed, crash_plan: BTreeMap::new() }
    }

    pub fn with_crash_plan(mut self, plan: BTreeMap<usize, ProcessId>) -> Self {
        self.crash_plan = plan;
        self
    }
}

#[derive(Debug, thiserror::Error)]
pub enum SchedulerError {
    #[error("step {step}: event `{event}` is not enabled")]
    EventNotEnabled { step: usize, event: String },
    #[error("step {step}: planned crash of {pid} is not enabled (already crashed, not a target, or budget spent)")]
    PlanNotEnabled { step: usize, pid: ProcessId },
    #[error("the exhaustive adversary drives `explore`, not `run`")]
    ExhaustiveNotRunnable,
}

// ---------------------------------------------------------------- seeded run

/// Drive one execution to quiescence or `step_bound` steps.
pub fn run(
    topology: &SystemTopology,
    initial: Configuration,
    protocol: &dyn Protocol,
    policy: &CrashPolicy,
    adversary: &Adversary,
    step_bound: usize,
) -> Result<Execution, SchedulerError> {
    if adversary.kind == AdversaryKind::Exhaustive {
        return Err(SchedulerError::ExhaustiveNotRunnable);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(adversary.seed);
    let mut config = initial.clone();
    let mut steps = Vec::new();
    let mut truncated = false;

    for step in 0.. {
        let enabled = enabled_events(&config, topology, protocol, policy);
        let event = match adversary.crash_plan.get(&step) {
            Some(&pid) => {
                let forced = Event::Crash(pid);
                if !enabled.contains(&forced) {
                    return Err(SchedulerError::PlanNotEnabled { step, pid });
                }
                forced
            }
            None => {
                let mut candidates: Vec<Event> = if adversary.crash_plan.is_empty() {
                    enabled
                } else {
                    enabled.into_iter().filter(|e| !matches!(e, Event::Crash(_))).collect()
                };
                if let AdversaryKind::TargetedDelay(victim) = adversary.kind {
                    let eager: Vec<Event> = candidates
                        .iter()
                        .copied()
                        .filter(|e| !matches!(e, Event::Deliver(m) if m.dst == victim))
                        .collect();
                    if !eager.is_empty() {
                        candidates = eager;
                    }
                }
                if candidates.is_empty() {
                    break;
                }
                if step >= step_bound {
                    truncated = true;
                    break;
                }
                candidates[rng.gen_range(0..candidates.len())]
            }
        };
        if step >= step_bound {
            truncated = true;
            break;
        }
        config = apply_event(&config, &event, topology, protocol);
        steps.push((event, config.clone()));
    }

    Ok(Execution { topology: topology.clone(), initial, steps, truncated })
}

// ------------------------------------------------------------------ replay

/// Re-apply a recorded schedule, checking enabledness at every step.
pub fn replay(
    topology: &SystemTopology,
    initial: Configuration,
    protocol: &dyn Protocol,
    policy: &CrashPolicy,
    events: &[Event],
) -> Result<Execution, SchedulerError> {
    let mut config = initial.clone();
    let mut steps = Vec::with_capacity(events.len());
    for (step, event) in events.iter().enumerate() {
        let enabled = enabled_events(&config, topology, protocol, policy);
        if !enabled.contains(event) {
            return Err(SchedulerError::EventNotEnabled { step, event: event.to_string() });
        }
        config = apply_event(&config, event, topology, protocol);
        steps.push((*event, config.clone()));
    }
    Ok(Execution { topology: topology.clone(), initial, steps, truncated: false })
}

// ----------------------------------------------------------- admissibility

/// What a finished (or truncated) execution still owes the fairness
/// contract. A complete execution — no events enabled at the end — owes
/// nothing by construction: undeliverable messages are exactly those
/// addressed to crashed processes, which fairness exempts.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct AdmissibilityReport {
    /// No events were enabled in the final configuration.
    pub complete: bool,
    /// In-flight messages addressed to live processes.
    pub undelivered_to_live: usize,
    /// Live processes that never took their initial step.
    pub unstarted_live: usize,
}

impl AdmissibilityReport {
    pub fn admissible(&self) -> bool {
        self.complete && self.undelivered_to_live == 0 && self.unstarted_live == 0
    }
}

pub fn check_admissible(
    execution: &Execution,
    protocol: &dyn Protocol,
    policy: &CrashPolicy,
) -> AdmissibilityReport {
    let config = execution.final_config();
    let enabled = enabled_events(config, &execution.topology, protocol, policy);
    let complete = enabled.is_empty() && !execution.truncated;
    let undelivered_to_live =
        config.in_flight.iter().filter(|m| !config.states[m.dst.0].crashed).count();
    let unstarted_live = config.states.iter().filter(|s| !s.crashed && !s.started).count();
    AdmissibilityReport { complete, undelivered_to_live, unstarted_live }
}

// ----------------------------------------------------------------- explore

/// One fully quiescent configuration found by exploration, at its BFS depth
/// (terminals arrive in nondecreasing depth order).
#[derive(Clone, Debug)]
pub struct Terminal {
    pub digest: ConfigDigest,
    pub depth: usize,
    pub config: Configuration,
}

/// Result of a bounded exhaustive exploration.
#[derive(Debug)]
pub struct Exploration {
    pub initial_digest: ConfigDigest,
    pub visited: usize,
    pub terminals: Vec<Terminal>,
    /// Configurations cut off by the depth bound while events were still
    /// enabled. Nonzero means the terminal set may be incomplete in depth.
    pub truncated: usize,
    /// The state cap was exhausted: every count is a lower bound.
    pub partial: bool,
    parents: BTreeMap<ConfigDigest, (ConfigDigest, Event)>,
}

impl Exploration {
    /// Shortest schedule from the initial configuration to `target`
    /// (any visited digest, terminal or not).
    pub fn witness(&self, target: &ConfigDigest) -> Option<Vec<Event>> {
        if *target == self.initial_digest {
            return Some(Vec::new());
        }
        let mut events = Vec::new();
        let mut at = *target;
        while at != self.initial_digest {
            let (parent, event) = self.parents.get(&at)?;
            events.push(*event);
            at = *parent;
        }
        events.reverse();
        Some(events)
    }
}

/// Breadth-first exploration of every schedule up to `depth_bound` steps,
/// deduplicating configurations by digest and capping total visited states.
pub fn explore(
    topology: &SystemTopology,
    initial: &Configuration,
    protocol: &dyn Protocol,
    policy: &CrashPolicy,
    depth_bound: usize,
    state_cap: usize,
) -> Exploration {
    let initial_digest = initial.digest();
    let mut visited: BTreeSet<ConfigDigest> = BTreeSet::new();
    visited.insert(initial_digest);
    let mut parents = BTreeMap::new();
    let mut terminals = Vec::new();
    let mut truncated = 0usize;
    let mut partial = false;
    let mut frontier: VecDeque<(Configuration, ConfigDigest, usize)> = VecDeque::new();
    frontier.push_back((initial.clone(), initial_digest, 0));

    while let Some((config, digest, depth)) = frontier.pop_front() {
        let enabled = enabled_events(&config, topology, protocol, policy);
        if enabled.is_empty() {
            terminals.push(Terminal { digest, depth, config });
            continue;
        }
        if depth >= depth_bound {
            truncated += 1;
            continue;
        }
        for event in enabled {
            let next = apply_event(&config, &event, topology, protocol);
            let next_digest = next.digest();
            if !visited.insert(next_digest) {
                continue;
            }
            parents.insert(next_digest, (digest, event));
            frontier.push_back((next, next_digest, depth + 1));
            if visited.len() >= state_cap {
                partial = true;
                break;
            }
        }
        if partial {
            break;
        }
    }

    Exploration {
        initial_digest,
        visited: visited.len(),
        terminals,
        truncated,
        partial,
        parents,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{build_system, Value};
    use crate::protocol::protocol_for_key;

    fn vals(vs: &[u8]) -> Vec<Value> {
        vs.iter().map(|&v| Value(v)).collect()
    }

    #[test]
    fn same_seed_same_execution() {
        let (topo, initial) = build_system(3, &vals(&[0, 1, 1])).unwrap();
        let p1 = protocol_for_key("p1", 1).unwrap();
        let policy = CrashPolicy::budget(1);
        let adv = Adversary::seeded(42);
        let a = run(&topo, initial.clone(), p1.as_ref(), &policy, &adv, 200).unwrap();
        let b = run(&topo, initial, p1.as_ref(), &policy, &adv, 200).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn fault_free_p0_floods_to_the_minimum() {
        let (topo, initial) = build_system(3, &vals(&[2, 1, 3])).unwrap();
        let p0 = protocol_for_key("p0", 1).unwrap();
        let policy = CrashPolicy::budget(0);
        let exec =
            run(&topo, initial, p0.as_ref(), &policy, &Adversary::seeded(7), 200).unwrap();
        assert!(!exec.truncated);
        for s in &exec.final_config().states {
            assert_eq!(s.output, Some(Value(1)));
        }
    }

    #[test]
    fn crash_plan_is_obeyed_and_spontaneous_crashes_are_off() {
        let (topo, initial) = build_system(3, &vals(&[0, 1, 1])).unwrap();
        let p1 = protocol_for_key("p1", 1).unwrap();
        let policy = CrashPolicy::budget(2);
        let adv = Adversary::seeded(3)
            .with_crash_plan([(0usize, ProcessId(2))].into_iter().collect());
        let exec = run(&topo, initial, p1.as_ref(), &policy, &adv, 200).unwrap();
        let crashes: Vec<_> = exec
            .events()
            .filter_map(|e| match e {
                Event::Crash(p) => Some(*p),
                _ => None,
            })
            .collect();
        assert_eq!(crashes, vec![ProcessId(2)], "exactly the planned crash, at step 0");
        assert!(matches!(exec.steps[0].0, Event::Crash(p) if p == ProcessId(2)));
    }

    #[test]
    fn impossible_plan_is_reported() {
        let (topo, initial) = build_system(2, &vals(&[0, 1])).unwrap();
        let p0 = protocol_for_key("p0", 1).unwrap();
        let policy = CrashPolicy::budget(0); // no budget: plan cannot fire
        let adv =
            Adversary::seeded(0).with_crash_plan([(0usize, ProcessId(0))].into_iter().collect());
        let err = run(&topo, initial, p0.as_ref(), &policy, &adv, 200).unwrap_err();
        assert!(matches!(err, SchedulerError::PlanNotEnabled { step: 0, .. }));
    }

    #[test]
    fn exhaustive_adversary_cannot_drive_run() {
        let (topo, initial) = build_system(2, &vals(&[0, 1])).unwrap();
        let p0 = protocol_for_key("p0", 1).unwrap();
        let adv = Adversary { kind: AdversaryKind::Exhaustive, seed: 0, crash_plan: BTreeMap::new() };
        let err = run(&topo, initial, p0.as_ref(), &CrashPolicy::budget(0), &adv, 10).unwrap_err();
        assert!(matches!(err, SchedulerError::ExhaustiveNotRunnable));
    }

    #[test]
    fn replay_reproduces_a_run_exactly() {
        let (topo, initial) = build_system(3, &vals(&[0, 1, 1])).unwrap();
        let p1 = protocol_for_key("p1", 1).unwrap();
        let policy = CrashPolicy::budget(1);
        let exec = run(
            &topo,
            initial.clone(),
            p1.as_ref(),
            &policy,
            &Adversary::seeded(11),
            200,
        )
        .unwrap();
        let events: Vec<Event> = exec.events().copied().collect();
        let replayed = replay(&topo, initial, p1.as_ref(), &policy, &events).unwrap();
        assert_eq!(exec, replayed);
    }

    #[test]
    fn replay_rejects_a_disabled_event() {
        let (topo, initial) = build_system(2, &vals(&[0, 1])).unwrap();
        let p0 = protocol_for_key("p0", 1).unwrap();
        let events = vec![Event::Crash(ProcessId(0))]; // budget is zero
        let err = replay(&topo, initial, p0.as_ref(), &CrashPolicy::budget(0), &events).unwrap_err();
        assert!(matches!(err, SchedulerError::EventNotEnabled { step: 0, .. }));
    }

    #[test]
    fn targeted_delay_starves_the_victim_while_anything_else_moves() {
        let (topo, initial) = build_system(3, &vals(&[0, 1, 1])).unwrap();
        let p0 = protocol_for_key("p0", 1).unwrap();
        let policy = CrashPolicy::budget(0);
        let adv = Adversary::targeted_delay(ProcessId(0), 5);
        let exec = run(&topo, initial, p0.as_ref(), &policy, &adv, 200).unwrap();
        // Every delivery to p0 must come after all other events.
        let positions: Vec<(usize, bool)> = exec
            .events()
            .enumerate()
            .map(|(i, e)| (i, matches!(e, Event::Deliver(m) if m.dst == ProcessId(0))))
            .collect();
        let first_victim = positions.iter().find(|(_, v)| *v).map(|(i, _)| *i).unwrap();
        assert!(
            positions.iter().all(|(i, v)| *v || *i < first_victim),
            "non-victim events interleaved after victim deliveries began"
        );
    }

    #[test]
    fn exploration_finds_all_fault_free_terminals() {
        let (topo, initial) = build_system(2, &vals(&[1, 0])).unwrap();
        let p0 = protocol_for_key("p0", 1).unwrap();
        let policy = CrashPolicy::budget(0);
        let ex = explore(&topo, &initial, p0.as_ref(), &policy, 24, 100_000);
        assert!(!ex.partial);
        assert_eq!(ex.truncated, 0);
        assert!(!ex.terminals.is_empty());
        for t in &ex.terminals {
            for s in &t.config.states {
                assert_eq!(s.output, Some(Value(0)), "flooding must reach the minimum");
            }
        }
    }

    #[test]
    fn witnesses_replay_to_their_terminal() {
        let (topo, initial) = build_system(3, &vals(&[0, 1, 1])).unwrap();
        let p1 = protocol_for_key("p1", 1).unwrap();
        let policy = CrashPolicy::budget(1);
        let ex = explore(&topo, &initial, p1.as_ref(), &policy, 20, 2_000_000);
        assert!(!ex.partial);
        let t = ex.terminals.first().expect("at least one terminal");
        let events = ex.witness(&t.digest).expect("terminal must have a witness");
        assert_eq!(events.len(), t.depth, "BFS witness length equals discovery depth");
        let exec = replay(&topo, initial, p1.as_ref(), &policy, &events).unwrap();
        assert_eq!(exec.final_config().digest(), t.digest);
    }

    #[test]
    fn depth_bound_truncates_instead_of_lying() {
        let (topo, initial) = build_system(3, &vals(&[0, 1, 1])).unwrap();
        let p0 = protocol_for_key("p0", 1).unwrap();
        let ex = explore(&topo, &initial, p0.as_ref(), &CrashPolicy::budget(0), 2, 100_000);
        assert!(ex.truncated > 0);
        assert!(ex.terminals.is_empty(), "nothing terminates within two steps");
    }

    #[test]
    fn state_cap_marks_the_result_partial() {
        let (topo, initial) = build_system(3, &vals(&[0, 1, 1])).unwrap();
        let p0 = protocol_for_key("p0", 1).unwrap();
        let ex = explore(&topo, &initial, p0.as_ref(), &CrashPolicy::budget(0), 24, 10);
        assert!(ex.partial);
    }

    #[test]
    fn complete_runs_are_admissible() {
        let (topo, initial) = build_system(3, &vals(&[2, 0, 1])).unwrap();
        let p0 = protocol_for_key("p0", 1).unwrap();
        let policy = CrashPolicy::budget(0);
        let exec =
            run(&topo, initial, p0.as_ref(), &policy, &Adversary::seeded(1), 200).unwrap();
        let report = check_admissible(&exec, p0.as_ref(), &policy);
        assert!(report.admissible());
    }

    #[test]
    fn truncated_runs_report_their_debts() {
        let (topo, initial) = build_system(3, &vals(&[2, 0, 1])).unwrap();
        let p0 = protocol_for_key("p0", 1).unwrap();
        let policy = CrashPolicy::budget(0);
        let exec =
            run(&topo, initial, p0.as_ref(), &policy, &Adversary::seeded(1), 2).unwrap();
        let report = check_admissible(&exec, p0.as_ref(), &policy);
        assert!(!report.admissible());
    }
}
