//! Run reports, rendered either as JSON or as text with the same content.

use std::fmt::Write as _;

use mrp_core::check::{Counterexample, Engine, Stats, Verdict, Warning};
use mrp_core::model::Configuration;
use mrp_core::oracle::OracleVerdict;
use mrp_core::path::Automaton;
use serde::Serialize;
use serde_json::Value as Json;

pub const EXIT_TRUE: i32 = 0;
pub const EXIT_FALSE: i32 = 1;
pub const EXIT_REJECTED: i32 = 2;
pub const EXIT_ERROR: i32 = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Outcome {
    True,
    False,
    Rejected,
    Error,
}

impl Outcome {
    pub fn exit_code(self) -> i32 {
        match self {
            Outcome::True => EXIT_TRUE,
            Outcome::False => EXIT_FALSE,
            Outcome::Rejected => EXIT_REJECTED,
            Outcome::Error => EXIT_ERROR,
        }
    }

    pub fn of(value: bool) -> Self {
        if value {
            Outcome::True
        } else {
            Outcome::False
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct AutomatonSummary {
    pub states: usize,
    pub transitions: usize,
    pub back_edges: usize,
}

impl AutomatonSummary {
    pub fn of(a: &Automaton) -> Self {
        AutomatonSummary {
            states: a.state_count(),
            transitions: a.transitions().len(),
            back_edges: a.back_edges().count(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct TraceReport {
    pub ops: Vec<String>,
    pub violation: String,
    /// State reached by each operation; only with `--trace`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub states: Option<Vec<String>>,
    /// The violating configuration; only with `--trace`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub configuration: Option<Json>,
}

fn config_json(c: &Configuration) -> Json {
    serde_json::from_str(&mrp_core::json::serialize_config(c)).expect("serialized configuration is JSON")
}

impl TraceReport {
    pub fn from_checker(cex: &Counterexample, detailed: bool) -> Self {
        TraceReport {
            ops: cex.steps.iter().map(|s| s.op.clone()).collect(),
            violation: cex.violation.to_string(),
            states: detailed.then(|| cex.steps.iter().map(|s| s.state.to_string()).collect()),
            configuration: detailed.then(|| config_json(&cex.configuration)),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct InstanceReport {
    pub kind: String,
    pub start: String,
    pub launches: u32,
    pub bodies: u64,
    pub max_per_state: u32,
    pub bound: u32,
}

#[derive(Debug, Clone, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum StatsReport {
    Checker {
        engine: String,
        marking_verdict: bool,
        body_executions: u64,
        within_bounds: bool,
        exact_nodes: Option<u64>,
        instances: Vec<InstanceReport>,
    },
    Oracle {
        max_depth: usize,
        paths: usize,
        evaluated: usize,
        unresolved: usize,
        /// The automaton has cycles, so the verdict only covers runs up to
        /// `max_depth` operations.
        bounded: bool,
    },
}

impl StatsReport {
    pub fn checker(v: &Verdict) -> Self {
        let Stats { instances, exact_nodes } = &v.stats;
        StatsReport::Checker {
            engine: match v.engine {
                Engine::Marking => "marking".into(),
                Engine::Exact => "exact".into(),
            },
            marking_verdict: v.marking_verdict,
            body_executions: v.stats.marking_total(),
            within_bounds: v.stats.within_bounds(),
            exact_nodes: *exact_nodes,
            instances: instances
                .iter()
                .map(|i| InstanceReport {
                    kind: i.kind.to_string(),
                    start: i.start.to_string(),
                    launches: i.launches,
                    bodies: i.total(),
                    max_per_state: i.max_per_state(),
                    bound: i.bound(),
                })
                .collect(),
        }
    }

    pub fn oracle(o: &OracleVerdict, cyclic: bool) -> Self {
        StatsReport::Oracle {
            max_depth: o.max_len,
            paths: o.paths,
            evaluated: o.evaluated,
            unresolved: o.unresolved,
            bounded: cyclic,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct WarningReport {
    pub code: String,
    pub message: String,
}

impl From<&Warning> for WarningReport {
    fn from(w: &Warning) -> Self {
        WarningReport { code: w.code.to_string(), message: w.message.clone() }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub command: String,
    pub verdict: Outcome,
    pub exit_code: i32,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub message: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub automaton: Option<AutomatonSummary>,
    pub counterexample: Option<TraceReport>,
    pub warnings: Vec<WarningReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub stats: Option<StatsReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timing_ms: Option<f64>,
}

impl Report {
    pub fn new(command: &str, verdict: Outcome) -> Self {
        Report {
            command: command.to_string(),
            verdict,
            exit_code: verdict.exit_code(),
            message: None,
            automaton: None,
            counterexample: None,
            warnings: Vec::new(),
            stats: None,
            timing_ms: None,
        }
    }

    pub fn error(command: &str, message: String) -> Self {
        Report { message: Some(message), ..Report::new(command, Outcome::Error) }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let verdict = match self.verdict {
            Outcome::True => "true",
            Outcome::False => "false",
            Outcome::Rejected => "REJECTED",
            Outcome::Error => "error",
        };
        let _ = writeln!(s, "{}: {verdict} (exit {})", self.command, self.exit_code);
        if let Some(m) = &self.message {
            let _ = writeln!(s, "  {m}");
        }
        if let Some(a) = &self.automaton {
            let _ = writeln!(s, "automaton: {} states, {} transitions, {} back-edges", a.states, a.transitions, a.back_edges);
        }
        if let Some(t) = &self.counterexample {
            let _ = writeln!(s, "counterexample: {}", if t.ops.is_empty() { "(initial configuration)".to_string() } else { t.ops.join(", ") });
            let _ = writeln!(s, "  {}", t.violation);
            if let Some(states) = &t.states {
                for (op, q) in t.ops.iter().zip(states) {
                    let _ = writeln!(s, "  -{op}-> {q}");
                }
            }
            if let Some(c) = &t.configuration {
                let _ = writeln!(s, "  configuration:");
                for line in serde_json::to_string_pretty(c).unwrap().lines() {
                    let _ = writeln!(s, "    {line}");
                }
            }
        }
        for w in &self.warnings {
            let _ = writeln!(s, "warning {}: {}", w.code, w.message);
        }
        match &self.stats {
            Some(StatsReport::Checker { engine, marking_verdict, body_executions, within_bounds, exact_nodes, instances }) => {
                let _ = writeln!(s, "engine: {engine} (marking pass: {marking_verdict})");
                let _ = writeln!(
                    s,
                    "body executions: {body_executions} over {} mark tables, {}",
                    instances.len(),
                    if *within_bounds { "within per-state bounds" } else { "per-state bound exceeded" }
                );
                for i in instances {
                    let _ = writeln!(
                        s,
                        "  {} from {}: {} launches, {} bodies, at most {} per state (bound {})",
                        i.kind, i.start, i.launches, i.bodies, i.max_per_state, i.bound
                    );
                }
                if let Some(n) = exact_nodes {
                    let _ = writeln!(s, "exact pass: {n} (state, configuration) pairs");
                }
            }
            Some(StatsReport::Oracle { max_depth, paths, evaluated, unresolved, bounded }) => {
                let _ = writeln!(
                    s,
                    "oracle: {paths} paths up to depth {max_depth}, {evaluated} evaluated, {unresolved} unresolved{}",
                    if *bounded { ", bounded by depth" } else { "" }
                );
            }
            None => {}
        }
        if let Some(t) = self.timing_ms {
            let _ = writeln!(s, "time: {t:.3} ms");
        }
        s
    }
}
