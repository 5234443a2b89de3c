//! Rendering of measurement results for the command line: `key=value` lines
//! for humans and pipelines, or CSV for spreadsheets. Text output follows the
//! same token style as trace files so the two can be processed alike.

use std::fmt::Write as _;

use crate::measure::{
    decisions, profile_of, EmergenceReport, PropertyProfile, Sweep, Transition,
};
use crate::model::SystemTopology;
use crate::scheduler::Exploration;

#[derive(Clone, Copy, PartialEq, Eq, Debug, Default)]
pub enum Format {
    #[default]
    Text,
    Csv,
}

impl std::str::FromStr for Format {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "text" => Ok(Format::Text),
            "csv" => Ok(Format::Csv),
            other => Err(format!("unknown format `{other}`, expected text or csv")),
        }
    }
}

/// `(T,F,T)` → `TFT`; comma-free so profile sets fit in one CSV field.
pub fn profile_compact(p: PropertyProfile) -> String {
    let t = |b: bool| if b { 'T' } else { 'F' };
    format!("{}{}{}", t(p.termination), t(p.consistency), t(p.non_triviality))
}

fn profile_set(profiles: impl IntoIterator<Item = PropertyProfile>, compact: bool) -> String {
    let rendered: Vec<String> = profiles
        .into_iter()
        .map(|p| if compact { profile_compact(p) } else { p.to_string() })
        .collect();
    if rendered.is_empty() {
        "-".into()
    } else {
        rendered.join(if compact { ";" } else { " " })
    }
}

fn transition_line(t: &Transition, feature: &str) -> String {
    format!(
        "transition feature={feature} at={} before={} after={} fresh={}",
        t.at,
        profile_set(t.before.iter().copied(), false),
        profile_set(t.after.iter().copied(), false),
        t.after_profile,
    )
}

pub fn render_sweep(sweep: &Sweep, transition: Option<&Transition>, format: Format) -> String {
    let mut out = String::new();
    match format {
        Format::Csv => {
            let _ = writeln!(out, "feature,value,profiles,visited,truncated,partial");
            for row in &sweep.rows {
                let _ = writeln!(
                    out,
                    "{},{},{},{},{},{}",
                    sweep.feature,
                    row.feature_value,
                    profile_set(row.profiles.iter().copied(), true),
                    row.visited,
                    row.truncated,
                    row.partial,
                );
            }
        }
        Format::Text => {
            for row in &sweep.rows {
                let _ = writeln!(
                    out,
                    "sweep feature={} value={} profiles={} visited={} truncated={} partial={}",
                    sweep.feature,
                    row.feature_value,
                    profile_set(row.profiles.iter().copied(), false),
                    row.visited,
                    row.truncated,
                    row.partial,
                );
            }
            match transition {
                Some(t) => {
                    let _ = writeln!(out, "{}", transition_line(t, &sweep.feature.to_string()));
                }
                None => {
                    let _ = writeln!(out, "transition feature={} none", sweep.feature);
                }
            }
        }
    }
    out
}

pub fn render_exploration(
    exploration: &Exploration,
    topology: &SystemTopology,
    format: Format,
) -> String {
    let mut out = String::new();
    let decisions_of = |config: &crate::model::Configuration| -> String {
        let d: Vec<String> =
            decisions(config, topology).iter().map(|(p, v)| format!("{p}:{v}")).collect();
        if d.is_empty() {
            "-".into()
        } else {
            d.join(";")
        }
    };
    match format {
        Format::Csv => {
            let _ = writeln!(out, "digest,depth,profile,decisions");
            for t in &exploration.terminals {
                let _ = writeln!(
                    out,
                    "{},{},{},{}",
                    t.digest,
                    t.depth,
                    profile_compact(profile_of(&t.config, topology)),
                    decisions_of(&t.config),
                );
            }
        }
        Format::Text => {
            let _ = writeln!(
                out,
                "explored initial={} visited={} terminals={} truncated={} partial={}",
                exploration.initial_digest,
                exploration.visited,
                exploration.terminals.len(),
                exploration.truncated,
                exploration.partial,
            );
            for t in &exploration.terminals {
                let _ = writeln!(
                    out,
                    "terminal digest={} depth={} profile={} decisions={}",
                    t.digest,
                    t.depth,
                    profile_of(&t.config, topology),
                    decisions_of(&t.config),
                );
            }
        }
    }
    out
}

/// The single verdict line for an emergence check.
pub fn emergence_verdict(report: &EmergenceReport) -> String {
    if report.recurred {
        if let Some(level) = report.recurred_at_level {
            return format!("RECURRED at level {level}");
        }
        if let Some(shift) = report.step_shift {
            return format!("RECURRED, step index shifted +{shift}");
        }
        return "RECURRED".into();
    }
    if report.suppressed {
        return "SUPPRESSED, no recurrence detected".into();
    }
    "UNCHANGED, the transform did not move the failure".into()
}

pub fn render_emergence(report: &EmergenceReport, format: Format) -> String {
    let mut out = String::new();
    let verdict = emergence_verdict(report);
    match format {
        Format::Csv => {
            let _ = writeln!(out, "key,value");
            let _ = writeln!(out, "transform,{}", report.transform);
            let _ = writeln!(out, "baseline_at,{}", report.baseline.at);
            let _ = writeln!(out, "baseline_profile,{}", profile_compact(report.baseline.after_profile));
            let _ = writeln!(out, "suppressed,{}", report.suppressed);
            let _ = writeln!(out, "recurred,{}", report.recurred);
            if let Some(level) = report.recurred_at_level {
                let _ = writeln!(out, "recurred_at_level,{level}");
            }
            if let Some(shift) = report.step_shift {
                let _ = writeln!(out, "step_shift,{shift}");
            }
            let _ = writeln!(out, "verdict,{verdict}");
        }
        Format::Text => {
            let _ = writeln!(out, "transform={}", report.transform);
            let _ = writeln!(out, "baseline {}", transition_line(&report.baseline, "g"));
            let _ = writeln!(out, "suppressed={}", report.suppressed);
            let _ = writeln!(out, "{verdict}");
        }
    }
    out
}

/// Verdict wording shared by the `logic` and `bridge` commands.
pub fn triviality_verdict(inconsistent: bool, trivial: bool) -> &'static str {
    match (inconsistent, trivial) {
        (_, true) => "TRIVIAL",
        (true, false) => "inconsistent, non-trivial",
        (false, false) => "consistent",
    }
}
