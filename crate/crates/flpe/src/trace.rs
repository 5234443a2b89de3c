//! Trace files: a line-oriented record of one execution, self-contained
//! enough to rebuild the system and replay every step.
//!
//! Invariants:
//! - Rendering is a pure function of the execution and its metadata, so a
//!   reproduced execution renders to a byte-identical file.
//! - The header carries everything needed to reconstruct the topology, the
//!   initial configuration and the protocol; a trace can be replayed without
//!   the scenario file it came from.
//! - Every record ends in the digest of the configuration *after* its event,
//!   so replays can detect divergence at the first bad step.
//!
//! ```text
//! flpe-trace v1 scenario=demo seed=7 step_bound=200 depth_bound=24 ...
//! step=0 event=start pid=p1 digest=8c0f...
//! step=1 event=deliver src=p1 seq=0 dst=p0 kind=announce:1 digest=22ab... decided=p0:1
//! end steps=2 truncated=false
//! ```

use std::collections::BTreeSet;
use std::fmt::Write as _;

use crate::model::{
    initial_configuration, ConfigDigest, Configuration, CrashPolicy, Event, Message, MessageKind,
    ModelError, ProcessId, SystemTopology, Value,
};
use crate::protocol::{protocol_for_key, Protocol, ProtocolError};
use crate::scheduler::{replay, Execution, SchedulerError};

pub const TRACE_HEADER: &str = "flpe-trace v1";

/// Everything a trace needs to be replayed on its own.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct TraceMeta {
    pub scenario: String,
    pub seed: u64,
    pub step_bound: usize,
    pub depth_bound: usize,
    pub crash_budget: usize,
    pub processes: usize,
    pub values: Vec<Value>,
    pub protocol: String,
    pub known_faulty: BTreeSet<ProcessId>,
    pub oracle_depth: u32,
    pub quorum: usize,
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct TraceRecord {
    pub step: usize,
    pub event: Event,
    /// Digest of the configuration after this event.
    pub digest: ConfigDigest,
    /// Set when this event made a process decide.
    pub decided: Option<(ProcessId, Value)>,
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Trace {
    pub meta: TraceMeta,
    pub records: Vec<TraceRecord>,
    pub truncated: bool,
}

#[derive(Debug, thiserror::Error)]
pub enum TraceError {
    #[error("missing header `{TRACE_HEADER}`")]
    BadHeader,
    #[error("line {0}: {1}")]
    Malformed(usize, String),
    #[error("header is missing `{0}`")]
    MissingField(&'static str),
    #[error("trace has no `end` line")]
    MissingEnd,
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Protocol(#[from] ProtocolError),
    #[error(transparent)]
    Replay(#[from] SchedulerError),
    #[error("step {step}: digest mismatch (trace {expected}, replay {got})")]
    DigestMismatch { step: usize, expected: ConfigDigest, got: ConfigDigest },
    #[error("trace records {expected} steps, replay produced {got}")]
    LengthMismatch { expected: usize, got: usize },
}

fn kind_token(kind: &MessageKind) -> String {
    match kind {
        MessageKind::Announce(v) => format!("announce:{v}"),
        MessageKind::OracleQuery => "query".into(),
        MessageKind::OracleReply(b) => format!("reply:{}", u8::from(*b)),
        MessageKind::Dummy => "dummy".into(),
    }
}

fn parse_kind(token: &str) -> Option<MessageKind> {
    match token {
        "query" => Some(MessageKind::OracleQuery),
        "dummy" => Some(MessageKind::Dummy),
        "reply:0" => Some(MessageKind::OracleReply(false)),
        "reply:1" => Some(MessageKind::OracleReply(true)),
        _ => {
            let v = token.strip_prefix("announce:")?.parse::<u8>().ok()?;
            Value::new(v).ok().map(MessageKind::Announce)
        }
    }
}

fn pid_list(pids: &BTreeSet<ProcessId>) -> String {
    pids.iter().map(|p| p.to_string()).collect::<Vec<_>>().join(",")
}

/// Render an execution as a trace file. Pure: byte-identical inputs give
/// byte-identical output.
pub fn render_trace(meta: &TraceMeta, execution: &Execution) -> String {
    let mut out = String::new();
    let values: Vec<String> = meta.values.iter().map(|v| v.to_string()).collect();
    let _ = writeln!(
        out,
        "{TRACE_HEADER} scenario={} seed={} step_bound={} depth_bound={} crash_budget={} \
         processes={} values={} protocol={} known_faulty={} oracle_depth={} quorum={}",
        meta.scenario,
        meta.seed,
        meta.step_bound,
        meta.depth_bound,
        meta.crash_budget,
        meta.processes,
        values.join(","),
        meta.protocol,
        pid_list(&meta.known_faulty),
        meta.oracle_depth,
        meta.quorum,
    );

    let mut previous = execution.initial.clone();
    for (step, (event, config)) in execution.steps.iter().enumerate() {
        let _ = write!(out, "step={step} ");
        match event {
            Event::Start(p) => {
                let _ = write!(out, "event=start pid={p}");
            }
            Event::Deliver(m) => {
                let _ = write!(
                    out,
                    "event=deliver src={} seq={} dst={} kind={}",
                    m.src,
                    m.seq,
                    m.dst,
                    kind_token(&m.kind)
                );
            }
            Event::LocalTimeout(p) => {
                let _ = write!(out, "event=timeout pid={p}");
            }
            Event::Crash(p) => {
                let _ = write!(out, "event=crash pid={p}");
            }
        }
        let _ = write!(out, " digest={}", config.digest());
        for (before, after) in previous.states.iter().zip(config.states.iter()) {
            if before.output.is_none() {
                if let Some(v) = after.output {
                    let _ = write!(out, " decided={}:{v}", after.id);
                }
            }
        }
        out.push('\n');
        previous = config.clone();
    }
    let _ = writeln!(out, "end steps={} truncated={}", execution.steps.len(), execution.truncated);
    out
}

fn field<'a>(tokens: &'a [(&str, &str)], key: &'static str) -> Result<&'a str, TraceError> {
    tokens
        .iter()
        .find(|(k, _)| *k == key)
        .map(|(_, v)| *v)
        .ok_or(TraceError::MissingField(key))
}

fn tokenize(rest: &str) -> Vec<(&str, &str)> {
    rest.split_whitespace().filter_map(|tok| tok.split_once('=')).collect()
}

pub fn parse_trace(text: &str) -> Result<Trace, TraceError> {
    let mut lines = text.lines().enumerate();
    let (_, header) = lines.next().ok_or(TraceError::BadHeader)?;
    let rest = header.strip_prefix(TRACE_HEADER).ok_or(TraceError::BadHeader)?;
    let tokens = tokenize(rest);

    let parse_err = |line: usize, msg: &str| TraceError::Malformed(line + 1, msg.to_string());

    let values = field(&tokens, "values")?
        .split(',')
        .map(|v| v.parse::<u8>().ok().and_then(|n| Value::new(n).ok()))
        .collect::<Option<Vec<Value>>>()
        .ok_or(TraceError::MissingField("values"))?;
    let known_faulty = match field(&tokens, "known_faulty")? {
        "" => BTreeSet::new(),
        list => list
            .split(',')
            .map(crate::scenario::parse_pid)
            .collect::<Option<BTreeSet<ProcessId>>>()
            .ok_or(TraceError::MissingField("known_faulty"))?,
    };
    let num =
        |key: &'static str| -> Result<usize, TraceError> {
            field(&tokens, key)?.parse().map_err(|_| TraceError::MissingField(key))
        };
    let meta = TraceMeta {
        scenario: field(&tokens, "scenario")?.to_string(),
        seed: field(&tokens, "seed")?.parse().map_err(|_| TraceError::MissingField("seed"))?,
        step_bound: num("step_bound")?,
        depth_bound: num("depth_bound")?,
        crash_budget: num("crash_budget")?,
        processes: num("processes")?,
        values,
        protocol: field(&tokens, "protocol")?.to_string(),
        known_faulty,
        oracle_depth: field(&tokens, "oracle_depth")?
            .parse()
            .map_err(|_| TraceError::MissingField("oracle_depth"))?,
        quorum: num("quorum")?,
    };

    let mut records = Vec::new();
    let mut end: Option<(usize, bool)> = None;
    for (i, line) in lines {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if end.is_some() {
            return Err(parse_err(i, "content after `end` line"));
        }
        if let Some(rest) = line.strip_prefix("end ") {
            let tokens = tokenize(rest);
            let steps = field(&tokens, "steps")?
                .parse()
                .map_err(|_| parse_err(i, "bad steps count"))?;
            let truncated = match field(&tokens, "truncated")? {
                "true" => true,
                "false" => false,
                _ => return Err(parse_err(i, "bad truncated flag")),
            };
            end = Some((steps, truncated));
            continue;
        }
        if !line.starts_with("step=") {
            return Err(parse_err(i, "expected a step record"));
        }
        let tokens = tokenize(line);
        let step: usize = field(&tokens, "step")?
            .parse()
            .map_err(|_| parse_err(i, "bad step index"))?;
        if step != records.len() {
            return Err(parse_err(i, "step indices must be contiguous from 0"));
        }
        let pid = |key: &'static str| -> Result<ProcessId, TraceError> {
            crate::scenario::parse_pid(field(&tokens, key)?)
                .ok_or_else(|| parse_err(i, "bad process id"))
        };
        let event = match field(&tokens, "event")? {
            "start" => Event::Start(pid("pid")?),
            "timeout" => Event::LocalTimeout(pid("pid")?),
            "crash" => Event::Crash(pid("pid")?),
            "deliver" => Event::Deliver(Message {
                src: pid("src")?,
                dst: pid("dst")?,
                seq: field(&tokens, "seq")?
                    .parse()
                    .map_err(|_| parse_err(i, "bad sequence number"))?,
                kind: parse_kind(field(&tokens, "kind")?)
                    .ok_or_else(|| parse_err(i, "bad message kind"))?,
            }),
            other => return Err(parse_err(i, &format!("unknown event `{other}`"))),
        };
        let digest = ConfigDigest::parse(field(&tokens, "digest")?)
            .ok_or_else(|| parse_err(i, "bad digest"))?;
        let decided = match tokens.iter().find(|(k, _)| *k == "decided") {
            None => None,
            Some((_, v)) => {
                let (p, val) =
                    v.split_once(':').ok_or_else(|| parse_err(i, "bad decided annotation"))?;
                let p = crate::scenario::parse_pid(p)
                    .ok_or_else(|| parse_err(i, "bad decided pid"))?;
                let val = val
                    .parse::<u8>()
                    .ok()
                    .and_then(|n| Value::new(n).ok())
                    .ok_or_else(|| parse_err(i, "bad decided value"))?;
                Some((p, val))
            }
        };
        records.push(TraceRecord { step, event, digest, decided });
    }

    let (steps, truncated) = end.ok_or(TraceError::MissingEnd)?;
    if steps != records.len() {
        return Err(TraceError::LengthMismatch { expected: steps, got: records.len() });
    }
    Ok(Trace { meta, records, truncated })
}

impl Trace {
    /// Rebuild the system the trace describes.
    pub fn reconstruct(
        &self,
    ) -> Result<(SystemTopology, Configuration, Box<dyn Protocol>, CrashPolicy), TraceError> {
        let topology = SystemTopology::complete(self.meta.processes)?
            .with_layers(&self.meta.known_faulty, self.meta.oracle_depth)?;
        let initial = initial_configuration(&topology, &self.meta.values)?;
        let protocol = protocol_for_key(&self.meta.protocol, self.meta.quorum)?;
        let policy = CrashPolicy { budget: self.meta.crash_budget, targets: None };
        Ok((topology, initial, protocol, policy))
    }

    /// Replay the recorded events and check every digest along the way.
    pub fn replay(&self) -> Result<Execution, TraceError> {
        let (topology, initial, protocol, policy) = self.reconstruct()?;
        let events: Vec<Event> = self.records.iter().map(|r| r.event).collect();
        let execution = replay(&topology, initial, protocol.as_ref(), &policy, &events)?;
        if execution.steps.len() != self.records.len() {
            return Err(TraceError::LengthMismatch {
                expected: self.records.len(),
                got: execution.steps.len(),
            });
        }
        for (record, (_, config)) in self.records.iter().zip(execution.steps.iter()) {
            let got = config.digest();
            if got != record.digest {
                return Err(TraceError::DigestMismatch {
                    step: record.step,
                    expected: record.digest,
                    got,
                });
            }
        }
        Ok(execution)
    }

    /// The final decisions recorded in the trace, in process order.
    pub fn decisions(&self) -> Vec<(ProcessId, Value)> {
        self.records.iter().filter_map(|r| r.decided).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::build_system;
    use crate::protocol::protocol_for_key;
    use crate::scheduler::{run, Adversary};

    fn demo_meta() -> TraceMeta {
        TraceMeta {
            scenario: "demo".into(),
            seed: 7,
            step_bound: 200,
            depth_bound: 24,
            crash_budget: 1,
            processes: 3,
            values: vec![Value(0), Value(1), Value(1)],
            protocol: "p1".into(),
            known_faulty: BTreeSet::new(),
            oracle_depth: 0,
            quorum: 1,
        }
    }

    fn demo_execution(seed: u64) -> Execution {
        let (topology, initial) =
            build_system(3, &[Value(0), Value(1), Value(1)]).unwrap();
        let protocol = protocol_for_key("p1", 1).unwrap();
        let policy = CrashPolicy { budget: 1, targets: None };
        run(&topology, initial, protocol.as_ref(), &policy, &Adversary::seeded(seed), 200).unwrap()
    }

    #[test]
    fn trace_round_trips_through_text() {
        let execution = demo_execution(7);
        let text = render_trace(&demo_meta(), &execution);
        let trace = parse_trace(&text).unwrap();
        assert_eq!(trace.meta, demo_meta());
        assert_eq!(trace.records.len(), execution.steps.len());
        assert_eq!(render_trace(&trace.meta, &trace.replay().unwrap()), text);
    }

    #[test]
    fn same_seed_renders_byte_identical_traces() {
        let a = render_trace(&demo_meta(), &demo_execution(7));
        let b = render_trace(&demo_meta(), &demo_execution(7));
        assert_eq!(a, b);
    }

    #[test]
    fn replay_verifies_digests() {
        let execution = demo_execution(3);
        let text = render_trace(&demo_meta(), &execution);
        let trace = parse_trace(&text).unwrap();
        let replayed = trace.replay().unwrap();
        assert_eq!(replayed.final_config().digest(), execution.final_config().digest());
    }

    #[test]
    fn tampered_digests_are_caught() {
        let execution = demo_execution(3);
        let text = render_trace(&demo_meta(), &execution);
        let mut trace = parse_trace(&text).unwrap();
        trace.records[0].digest = ConfigDigest([0u8; 16]);
        assert!(matches!(trace.replay(), Err(TraceError::DigestMismatch { step: 0, .. })));
    }

    #[test]
    fn decided_annotations_mark_decision_steps() {
        let execution = demo_execution(7);
        let text = render_trace(&demo_meta(), &execution);
        let trace = parse_trace(&text).unwrap();
        let decided_in_final: Vec<(ProcessId, Value)> = execution
            .final_config()
            .states
            .iter()
            .filter_map(|s| s.output.map(|v| (s.id, v)))
            .collect();
        let mut from_trace = trace.decisions();
        from_trace.sort();
        assert_eq!(from_trace, decided_in_final);
    }

    #[test]
    fn missing_end_line_is_an_error() {
        let execution = demo_execution(7);
        let text = render_trace(&demo_meta(), &execution);
        let cut = text.rsplit_once("end ").unwrap().0;
        assert!(matches!(parse_trace(cut), Err(TraceError::MissingEnd)));
    }

    #[test]
    fn header_fields_survive_empty_known_faulty() {
        let mut meta = demo_meta();
        meta.known_faulty = [ProcessId(0)].into_iter().collect();
        meta.oracle_depth = 0;
        let execution = demo_execution(7);
        let trace = parse_trace(&render_trace(&meta, &execution)).unwrap();
        assert_eq!(trace.meta.known_faulty, meta.known_faulty);
    }
}
