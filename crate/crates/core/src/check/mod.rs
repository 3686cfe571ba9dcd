//! Verification of temporal properties over every path of a compiled
//! automaton.
//!
//! The marking pass follows the mark-based algorithms state by state. Each
//! time a mark cuts exploration short, the configuration reaching the state
//! is compared with the one recorded at its first visit. If they ever differ
//! the marking verdict may be unsound, so the property is re-decided by an
//! exact pass over (state, configuration) pairs.

mod exact;
mod marking;

use std::collections::{BTreeSet, HashSet};
use std::fmt;

use crate::ftpl::{FtplFormula, TraceFormula};
use crate::model::Configuration;
use crate::ops::{classify_idempotence, Idempotence, OpTable};
use crate::path::{Automaton, StateId};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MarkSharing {
    /// Every launch of an inner checker starts from a fresh mark table.
    #[default]
    Fresh,
    /// All launches of the same inner formula share one table.
    Shared,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum EventuallyMode {
    /// `eventually cp` must be met on every maximal run.
    #[default]
    Maximal,
    /// Over the prefix-closed set of paths, which reduces to the first
    /// configuration.
    Prefix,
}

#[derive(Debug, Clone)]
pub struct CheckOptions {
    pub marks: MarkSharing,
    pub eventually: EventuallyMode,
    pub strict: bool,
    /// Distinct configurations the exact pass explores per state and
    /// checker before giving up on that state.
    pub state_budget: usize,
}

impl Default for CheckOptions {
    fn default() -> Self {
        CheckOptions {
            marks: MarkSharing::Fresh,
            eventually: EventuallyMode::Maximal,
            strict: false,
            state_budget: 64,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mark {
    Unchecked,
    Again,
    Checked,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum WarningCode {
    CycleOpNotIdempotent,
    NonIdempotentCycle,
    MarkingDivergence,
    StateBudgetExceeded,
}

impl fmt::Display for WarningCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            WarningCode::CycleOpNotIdempotent => "CYCLE_OP_NOT_IDEMPOTENT",
            WarningCode::NonIdempotentCycle => "NON_IDEMPOTENT_CYCLE",
            WarningCode::MarkingDivergence => "MARKING_DIVERGENCE",
            WarningCode::StateBudgetExceeded => "STATE_BUDGET_EXCEEDED",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Warning {
    pub code: WarningCode,
    pub message: String,
}

impl fmt::Display for Warning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.code, self.message)
    }
}

pub(crate) fn push_warning(ws: &mut Vec<Warning>, code: WarningCode, message: String) {
    if !ws.iter().any(|w| w.code == code && w.message == message) {
        ws.push(Warning { code, message });
    }
}

/// Warnings of a pass, at most one per code and state; messages are only
/// built for the first.
#[derive(Default)]
pub(crate) struct StateWarnings {
    pub list: Vec<Warning>,
    seen: HashSet<(WarningCode, StateId)>,
}

impl StateWarnings {
    pub fn report(&mut self, code: WarningCode, q: StateId, message: impl FnOnce() -> String) {
        if self.seen.insert((code, q)) {
            self.list.push(Warning { code, message: message() });
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    /// The configuration reached violates the property.
    Property,
    /// The event occurred after a prefix that does not satisfy the trace
    /// property.
    EventAfterPrefix(String),
    /// A run ends at a state without transitions before the property held.
    DeadEnd,
    /// A run loops forever without the property holding.
    Cycle,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::Property => f.write_str("property violated by the configuration reached"),
            Violation::EventAfterPrefix(e) => write!(f, "event `{e}` occurs after a prefix violating the trace property"),
            Violation::DeadEnd => f.write_str("run ends without the property ever holding"),
            Violation::Cycle => f.write_str("run cycles without the property ever holding"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TraceStep {
    pub op: String,
    pub state: StateId,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Counterexample {
    /// Operations from the initial state; replaying them from the initial
    /// configuration yields `configuration`.
    pub steps: Vec<TraceStep>,
    pub configuration: Configuration,
    pub violation: Violation,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InstanceKind {
    After,
    Always,
    Before,
    Eventually,
}

impl fmt::Display for InstanceKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            InstanceKind::After => "after",
            InstanceKind::Always => "always",
            InstanceKind::Before => "before",
            InstanceKind::Eventually => "eventually",
        })
    }
}

/// Counters for one mark table of the marking pass.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InstanceStats {
    pub kind: InstanceKind,
    pub start: StateId,
    pub launches: u32,
    /// Per state, summed over its mark cells.
    pub bodies: Vec<u32>,
}

impl InstanceStats {
    pub fn total(&self) -> u64 {
        self.bodies.iter().map(|&b| b as u64).sum()
    }

    pub fn max_per_state(&self) -> u32 {
        self.bodies.iter().copied().max().unwrap_or(0)
    }

    /// Body executions allowed per state: one for after/always, two for the
    /// two-cell before/eventually tables.
    pub fn bound(&self) -> u32 {
        match self.kind {
            InstanceKind::After | InstanceKind::Always => 1,
            InstanceKind::Before | InstanceKind::Eventually => 2,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Stats {
    pub instances: Vec<InstanceStats>,
    /// Pairs visited by the exact pass when it ran.
    pub exact_nodes: Option<u64>,
}

impl Stats {
    pub fn marking_total(&self) -> u64 {
        self.instances.iter().map(InstanceStats::total).sum()
    }

    pub fn within_bounds(&self) -> bool {
        self.instances.iter().all(|i| i.max_per_state() <= i.bound())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Engine {
    Marking,
    Exact,
}

#[derive(Debug, Clone)]
pub struct Verdict {
    pub value: bool,
    pub counterexample: Option<Counterexample>,
    pub warnings: Vec<Warning>,
    /// The answer of the marking pass alone.
    pub marking_verdict: bool,
    pub engine: Engine,
    pub stats: Stats,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum Rejection {
    #[error("`{0}` is outside CP♭, the checkable fragment: only `and` and `forall` may combine properties")]
    NotCpFlat(String),
    #[error("a cycle keeps changing the configuration, so the verdict is unsound")]
    UnsoundCycle(Vec<Warning>),
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CheckError {
    #[error("rejected: {0}")]
    Rejected(#[from] Rejection),
    #[error("automaton uses unknown operation `{0}`")]
    UnknownOperation(String),
}

/// Hook into the marking pass.
pub trait CheckObserver {
    /// Called on entering the body of an `after` checker at `q`. `chain`
    /// lists the states on the checker's current exploration chain, `q`
    /// last; `marks` is the checker's table.
    fn after_entry(&mut self, _q: StateId, _chain: &[StateId], _marks: &[Mark]) {}
}

struct NoObserver;

impl CheckObserver for NoObserver {}

/// Whether truth on a path carries over to every suffix starting at a
/// later index.
pub(crate) fn suffix_closed(f: &FtplFormula) -> bool {
    match f {
        FtplFormula::After(..) => true,
        FtplFormula::Before(_, t) | FtplFormula::Trace(t) => matches!(t, TraceFormula::Always(_)),
    }
}

pub(crate) fn formula_id(f: &FtplFormula) -> usize {
    f as *const FtplFormula as usize
}

#[derive(Debug, Clone)]
pub(crate) struct Step {
    pub label: String,
    pub state: StateId,
    pub config: Configuration,
}

/// Labels since the most recent occurrence of `q` in `trace[base..top]`,
/// the top entry included.
pub(crate) fn cycle_word(trace: &[Step], base: usize, q: StateId) -> Option<(usize, Vec<&str>)> {
    let top = trace.len() - 1;
    (base..top)
        .rev()
        .find(|&j| trace[j].state == q)
        .map(|j| (j, trace[j + 1..].iter().map(|s| s.label.as_str()).collect()))
}

pub(crate) fn apply_word(ops: &OpTable, c: &Configuration, word: &[&str]) -> Configuration {
    word.iter().fold(c.clone(), |c, l| ops.apply(&c, l))
}

/// Whether two more traversals of the cycle `word` from `c` both change the
/// configuration. One changing traversal is normal: a cycle of idempotent
/// operations may need a lap to settle.
pub(crate) fn keeps_changing(ops: &OpTable, c: &Configuration, word: &[&str]) -> bool {
    let once = apply_word(ops, c, word);
    once != *c && apply_word(ops, &once, word) != once
}

pub(crate) fn counterexample(trace: &[Step], violation: Violation) -> Counterexample {
    Counterexample {
        steps: trace[1..]
            .iter()
            .map(|s| TraceStep { op: s.label.clone(), state: s.state })
            .collect(),
        configuration: trace.last().expect("trace has a root").config.clone(),
        violation,
    }
}

pub(crate) fn non_idempotent_message(q: StateId, word: &[&str]) -> String {
    format!(
        "the cycle `{}` through {q} changes the configuration on every traversal",
        word.join(" ")
    )
}

/// Per transition, whether it lies on a cycle.
fn cyclic_transitions(a: &Automaton) -> Vec<bool> {
    let n = a.state_count();
    let reach: Vec<Vec<bool>> = a
        .states()
        .map(|s| {
            let mut seen = vec![false; n];
            let mut stack = vec![s];
            while let Some(q) = stack.pop() {
                for t in a.transitions_from(q) {
                    if !seen[t.target.0] {
                        seen[t.target.0] = true;
                        stack.push(t.target);
                    }
                }
            }
            seen
        })
        .collect();
    a.transitions().iter().map(|t| reach[t.target.0][t.source.0]).collect()
}

fn syntactic_warnings(a: &Automaton, ops: &OpTable) -> Vec<Warning> {
    let on_cycle: BTreeSet<&str> = a
        .transitions()
        .iter()
        .zip(cyclic_transitions(a))
        .filter(|(_, c)| *c)
        .map(|(t, _)| t.label.as_str())
        .collect();
    let mut ws = Vec::new();
    for name in on_cycle {
        let op = ops.get(name).expect("labels were validated");
        let class = classify_idempotence(op);
        if class != Idempotence::Idempotent {
            push_warning(
                &mut ws,
                WarningCode::CycleOpNotIdempotent,
                format!("operation `{name}` on a cycle is {class}"),
            );
        }
    }
    ws
}

pub fn check(
    f: &FtplFormula,
    a: &Automaton,
    c0: &Configuration,
    ops: &OpTable,
    opts: &CheckOptions,
) -> Result<Verdict, CheckError> {
    check_observed(f, a, c0, ops, opts, &mut NoObserver)
}

pub fn check_observed(
    f: &FtplFormula,
    a: &Automaton,
    c0: &Configuration,
    ops: &OpTable,
    opts: &CheckOptions,
    observer: &mut dyn CheckObserver,
) -> Result<Verdict, CheckError> {
    if let Some(t) = a.transitions().iter().find(|t| !ops.contains(&t.label)) {
        return Err(CheckError::UnknownOperation(t.label.clone()));
    }
    if !f.is_cp_flat() {
        return Err(Rejection::NotCpFlat(f.trace().cp().to_string()).into());
    }
    let mut warnings = syntactic_warnings(a, ops);

    let m = marking::run(f, a, c0, ops, opts, observer);
    let mut verdict = Verdict {
        value: m.value,
        counterexample: m.counterexample,
        warnings: Vec::new(),
        marking_verdict: m.value,
        engine: Engine::Marking,
        stats: Stats { instances: m.instances, exact_nodes: None },
    };
    let mut unsound = m.non_idempotent;
    for w in m.warnings {
        push_warning(&mut warnings, w.code, w.message);
    }
    if m.escalate {
        let x = exact::run(f, a, c0, ops, opts);
        unsound |= x.non_idempotent;
        for w in x.warnings {
            push_warning(&mut warnings, w.code, w.message);
        }
        verdict.value = x.value;
        verdict.counterexample = x.counterexample;
        verdict.engine = Engine::Exact;
        verdict.stats.exact_nodes = Some(x.nodes);
    }
    verdict.warnings = warnings;
    if opts.strict && unsound {
        let ws = verdict
            .warnings
            .into_iter()
            .filter(|w| w.code == WarningCode::NonIdempotentCycle)
            .collect();
        return Err(Rejection::UnsoundCycle(ws).into());
    }
    Ok(verdict)
}
