//! Scenario files: a small `key = value` format describing one experiment —
//! the system, the protocol, the adversary, and the exploration bounds.
//!
//! ```text
//! flpe-scenario v1
//! # three processes, one may crash
//! name = flp-split
//! processes = 3
//! values = 0,1,1
//! protocol = p1
//! crash_budget = 1
//! ```
//!
//! Unknown keys are rejected rather than ignored: a typo in an experiment
//! description must not silently change what was measured.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use crate::model::{ModelError, ProcessId, SystemTopology, Value};
use crate::protocol::{protocol_for_key, Protocol, ProtocolError};
use crate::scheduler::{
    Adversary, AdversaryKind, DEFAULT_DEPTH_BOUND, DEFAULT_STATE_CAP, DEFAULT_STEP_BOUND,
};

pub const SCENARIO_HEADER: &str = "flpe-scenario v1";

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum AdversarySpec {
    Seeded,
    Exhaustive,
    TargetedDelay(ProcessId),
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Scenario {
    pub name: String,
    pub processes: usize,
    pub values: Vec<Value>,
    pub protocol: String,
    pub timeout_quorum: usize,
    pub known_faulty: BTreeSet<ProcessId>,
    pub oracle_depth: u32,
    pub adversary: AdversarySpec,
    pub seed: u64,
    pub crash_budget: usize,
    pub crash_plan: BTreeMap<usize, ProcessId>,
    pub crash_targets: Option<BTreeSet<ProcessId>>,
    pub step_bound: usize,
    pub depth_bound: usize,
    pub state_cap: usize,
}

#[derive(Debug, thiserror::Error)]
pub enum ScenarioError {
    #[error("missing header `{SCENARIO_HEADER}`")]
    BadHeader,
    #[error("line {0}: expected `key = value`, got `{1}`")]
    Malformed(usize, String),
    #[error("line {0}: unknown key `{1}`")]
    UnknownKey(usize, String),
    #[error("line {0}: duplicate key `{1}`")]
    DuplicateKey(usize, String),
    #[error("line {0}: bad value for `{1}`: {2}")]
    BadValue(usize, String, String),
    #[error("missing required key `{0}`")]
    MissingKey(&'static str),
    #[error("{0}")]
    Invalid(String),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Protocol(#[from] ProtocolError),
}

pub fn parse_pid(s: &str) -> Option<ProcessId> {
    s.strip_prefix('p').and_then(|n| n.parse::<usize>().ok()).map(ProcessId)
}

fn parse_pid_list(s: &str) -> Option<BTreeSet<ProcessId>> {
    if s.is_empty() {
        return Some(BTreeSet::new());
    }
    s.split(',').map(|part| parse_pid(part.trim())).collect()
}

impl Scenario {
    pub fn parse(text: &str) -> Result<Scenario, ScenarioError> {
        let mut lines = text.lines().enumerate();
        match lines.next() {
            Some((_, first)) if first.trim() == SCENARIO_HEADER => {}
            _ => return Err(ScenarioError::BadHeader),
        }

        let mut fields: BTreeMap<&str, (usize, String)> = BTreeMap::new();
        for (i, raw) in lines {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let lineno = i + 1;
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| ScenarioError::Malformed(lineno, line.to_string()))?;
            let key = key.trim();
            let value = value.trim().to_string();
            const KEYS: &[&str] = &[
                "name",
                "processes",
                "values",
                "protocol",
                "timeout_quorum",
                "known_faulty",
                "oracle_depth",
                "adversary",
                "seed",
                "crash_budget",
                "crash_plan",
                "crash_targets",
                "step_bound",
                "depth_bound",
                "state_cap",
            ];
            let key = *KEYS
                .iter()
                .find(|k| **k == key)
                .ok_or_else(|| ScenarioError::UnknownKey(lineno, key.to_string()))?;
            if fields.insert(key, (lineno, value)).is_some() {
                return Err(ScenarioError::DuplicateKey(lineno, key.to_string()));
            }
        }

        let bad = |key: &str, msg: &str| {
            let line = fields.get(key).map(|(l, _)| *l).unwrap_or(0);
            ScenarioError::BadValue(line, key.to_string(), msg.to_string())
        };
        let take = |key: &str| fields.get(key).map(|(_, v)| v.as_str());
        let required = |key: &'static str| take(key).ok_or(ScenarioError::MissingKey(key));

        let name = required("name")?.to_string();
        if name.is_empty() || !name.chars().all(|c| c.is_ascii_alphanumeric() || "-_".contains(c)) {
            return Err(bad("name", "use only letters, digits, `-` and `_`"));
        }
        let processes: usize =
            required("processes")?.parse().map_err(|_| bad("processes", "not a number"))?;
        let values = required("values")?
            .split(',')
            .map(|v| {
                v.trim()
                    .parse::<u8>()
                    .ok()
                    .and_then(|n| Value::new(n).ok())
                    .ok_or_else(|| bad("values", "expected digits 0..=9, comma separated"))
            })
            .collect::<Result<Vec<Value>, _>>()?;
        let protocol = required("protocol")?.to_string();

        let parse_usize = |key: &str, default: usize| -> Result<usize, ScenarioError> {
            take(key).map_or(Ok(default), |v| v.parse().map_err(|_| bad(key, "not a number")))
        };
        let timeout_quorum = parse_usize("timeout_quorum", 1)?;
        let seed: u64 =
            take("seed").map_or(Ok(0), |v| v.parse().map_err(|_| bad("seed", "not a number")))?;
        let crash_budget = parse_usize("crash_budget", 0)?;
        let step_bound = parse_usize("step_bound", DEFAULT_STEP_BOUND)?;
        let depth_bound = parse_usize("depth_bound", DEFAULT_DEPTH_BOUND)?;
        let state_cap = parse_usize("state_cap", DEFAULT_STATE_CAP)?;
        let oracle_depth: u32 = take("oracle_depth")
            .map_or(Ok(0), |v| v.parse().map_err(|_| bad("oracle_depth", "not a number")))?;

        let known_faulty = take("known_faulty")
            .map_or(Some(BTreeSet::new()), parse_pid_list)
            .ok_or_else(|| bad("known_faulty", "expected pids like p0,p2"))?;
        let crash_targets = match take("crash_targets") {
            None => None,
            Some(v) => {
                Some(parse_pid_list(v).ok_or_else(|| bad("crash_targets", "expected pids"))?)
            }
        };
        let crash_plan = match take("crash_plan") {
            None => BTreeMap::new(),
            Some(v) if v.is_empty() => BTreeMap::new(),
            Some(v) => {
                let mut plan = BTreeMap::new();
                for entry in v.split(',') {
                    let (step, pid) = entry
                        .trim()
                        .split_once(':')
                        .ok_or_else(|| bad("crash_plan", "expected step:pid entries"))?;
                    let step: usize =
                        step.parse().map_err(|_| bad("crash_plan", "bad step index"))?;
                    let pid =
                        parse_pid(pid).ok_or_else(|| bad("crash_plan", "bad process id"))?;
                    if plan.insert(step, pid).is_some() {
                        return Err(bad("crash_plan", "two crashes at the same step"));
                    }
                }
                plan
            }
        };
        let adversary = match take("adversary") {
            None | Some("seeded") => AdversarySpec::Seeded,
            Some("exhaustive") => AdversarySpec::Exhaustive,
            Some(v) => match v.strip_prefix("targeted-delay:").and_then(parse_pid) {
                Some(pid) => AdversarySpec::TargetedDelay(pid),
                None => {
                    return Err(bad(
                        "adversary",
                        "expected seeded, exhaustive, or targeted-delay:<pid>",
                    ))
                }
            },
        };

        let scenario = Scenario {
            name,
            processes,
            values,
            protocol,
            timeout_quorum,
            known_faulty,
            oracle_depth,
            adversary,
            seed,
            crash_budget,
            crash_plan,
            crash_targets,
            step_bound,
            depth_bound,
            state_cap,
        };
        scenario.validate()?;
        Ok(scenario)
    }

    fn validate(&self) -> Result<(), ScenarioError> {
        if self.processes == 0 {
            return Err(ScenarioError::Invalid("a system needs at least one process".into()));
        }
        if self.values.len() != self.processes {
            return Err(ScenarioError::Invalid(format!(
                "{} processes but {} values",
                self.processes,
                self.values.len()
            )));
        }
        // Validates the protocol key (and its embedded parameters) early.
        protocol_for_key(&self.protocol, self.timeout_quorum)?;
        for p in &self.known_faulty {
            if p.0 >= self.processes {
                return Err(ScenarioError::Invalid(format!(
                    "known_faulty names {p}, but only p0..p{} exist",
                    self.processes - 1
                )));
            }
        }
        if self.oracle_depth > 0 && self.known_faulty.is_empty() {
            return Err(ScenarioError::Invalid(
                "oracle_depth needs known_faulty to say whom to cover".into(),
            ));
        }
        let topology = self.topology()?;
        let total = topology.len();
        if self.crash_budget + 1 > total {
            return Err(ScenarioError::Invalid(format!(
                "crash_budget {} would allow every one of the {total} processes to die",
                self.crash_budget
            )));
        }
        if let Some(targets) = &self.crash_targets {
            for t in targets {
                if !topology.contains(*t) {
                    return Err(ScenarioError::Invalid(format!("crash target {t} does not exist")));
                }
            }
        }
        if self.crash_plan.len() > self.crash_budget {
            return Err(ScenarioError::Invalid(format!(
                "crash_plan schedules {} crashes but crash_budget is {}",
                self.crash_plan.len(),
                self.crash_budget
            )));
        }
        for pid in self.crash_plan.values() {
            if !topology.contains(*pid) {
                return Err(ScenarioError::Invalid(format!("crash_plan names {pid}")));
            }
            if let Some(targets) = &self.crash_targets {
                if !targets.contains(pid) {
                    return Err(ScenarioError::Invalid(format!(
                        "crash_plan names {pid}, which crash_targets excludes"
                    )));
                }
            }
        }
        Ok(())
    }

    /// Complete graph over the participants, plus the configured oracle
    /// layers (layer 1 covers `known_faulty`, each further layer covers the
    /// previous layer's oracles).
    pub fn topology(&self) -> Result<SystemTopology, ModelError> {
        SystemTopology::complete(self.processes)?.with_layers(&self.known_faulty, self.oracle_depth)
    }

    pub fn protocol(&self) -> Result<Box<dyn Protocol>, ProtocolError> {
        protocol_for_key(&self.protocol, self.timeout_quorum)
    }

    pub fn policy(&self) -> crate::model::CrashPolicy {
        crate::model::CrashPolicy { budget: self.crash_budget, targets: self.crash_targets.clone() }
    }

    pub fn adversary(&self) -> Option<Adversary> {
        let kind = match self.adversary {
            AdversarySpec::Seeded => AdversaryKind::Seeded,
            AdversarySpec::TargetedDelay(p) => AdversaryKind::TargetedDelay(p),
            AdversarySpec::Exhaustive => return None,
        };
        Some(Adversary { kind, seed: self.seed, crash_plan: self.crash_plan.clone() })
    }

    /// Canonical text form; `parse(render(s))` is the identity on the
    /// parsed representation.
    pub fn render(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{SCENARIO_HEADER}");
        let _ = writeln!(out, "name = {}", self.name);
        let _ = writeln!(out, "processes = {}", self.processes);
        let values: Vec<String> = self.values.iter().map(|v| v.to_string()).collect();
        let _ = writeln!(out, "values = {}", values.join(","));
        let _ = writeln!(out, "protocol = {}", self.protocol);
        if self.timeout_quorum != 1 {
            let _ = writeln!(out, "timeout_quorum = {}", self.timeout_quorum);
        }
        if !self.known_faulty.is_empty() {
            let pids: Vec<String> = self.known_faulty.iter().map(|p| p.to_string()).collect();
            let _ = writeln!(out, "known_faulty = {}", pids.join(","));
        }
        if self.oracle_depth != 0 {
            let _ = writeln!(out, "oracle_depth = {}", self.oracle_depth);
        }
        match self.adversary {
            AdversarySpec::Seeded => {}
            AdversarySpec::Exhaustive => {
                let _ = writeln!(out, "adversary = exhaustive");
            }
            AdversarySpec::TargetedDelay(p) => {
                let _ = writeln!(out, "adversary = targeted-delay:{p}");
            }
        }
        if self.seed != 0 {
            let _ = writeln!(out, "seed = {}", self.seed);
        }
        let _ = writeln!(out, "crash_budget = {}", self.crash_budget);
        if !self.crash_plan.is_empty() {
            let entries: Vec<String> =
                self.crash_plan.iter().map(|(s, p)| format!("{s}:{p}")).collect();
            let _ = writeln!(out, "crash_plan = {}", entries.join(","));
        }
        if let Some(targets) = &self.crash_targets {
            let pids: Vec<String> = targets.iter().map(|p| p.to_string()).collect();
            let _ = writeln!(out, "crash_targets = {}", pids.join(","));
        }
        if self.step_bound != DEFAULT_STEP_BOUND {
            let _ = writeln!(out, "step_bound = {}", self.step_bound);
        }
        if self.depth_bound != DEFAULT_DEPTH_BOUND {
            let _ = writeln!(out, "depth_bound = {}", self.depth_bound);
        }
        if self.state_cap != DEFAULT_STATE_CAP {
            let _ = writeln!(out, "state_cap = {}", self.state_cap);
        }
        out
    }
}
