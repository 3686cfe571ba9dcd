use std::collections::{HashMap, HashSet};

use super::{
    counterexample, cycle_word, formula_id, keeps_changing, non_idempotent_message, suffix_closed,
    CheckObserver, CheckOptions, Counterexample, EventuallyMode, InstanceKind, InstanceStats, Mark, MarkSharing,
    StateWarnings, Step, Violation, Warning, WarningCode,
};
use crate::cp::CpFormula;
use crate::ftpl::{Event, FtplFormula, TraceFormula};
use crate::model::Configuration;
use crate::ops::OpTable;
use crate::path::{Automaton, StateId};

pub(crate) struct Outcome {
    pub value: bool,
    pub counterexample: Option<Counterexample>,
    pub warnings: Vec<Warning>,
    pub instances: Vec<InstanceStats>,
    /// A mark cut exploration short for a configuration other than the
    /// state's witness.
    pub escalate: bool,
    pub non_idempotent: bool,
}

struct Table {
    cells: usize,
    marks: Vec<Mark>,
    witness: Vec<Option<Configuration>>,
    stats: InstanceStats,
}

struct Marking<'a, 'o> {
    a: &'a Automaton,
    ops: &'a OpTable,
    opts: &'a CheckOptions,
    observer: &'o mut dyn CheckObserver,
    tables: Vec<Table>,
    shared: HashMap<usize, usize>,
    /// With fresh marks a launch depends only on its formula, state and
    /// configuration; launches known to hold are not repeated.
    held: HashSet<(usize, StateId, Configuration)>,
    trace: Vec<Step>,
    warnings: StateWarnings,
    counterexample: Option<Counterexample>,
    escalate: bool,
    non_idempotent: bool,
}

pub(crate) fn run(
    f: &FtplFormula,
    a: &Automaton,
    c0: &Configuration,
    ops: &OpTable,
    opts: &CheckOptions,
    observer: &mut dyn CheckObserver,
) -> Outcome {
    let mut m = Marking {
        a,
        ops,
        opts,
        observer,
        tables: Vec::new(),
        shared: HashMap::new(),
        held: HashSet::new(),
        trace: vec![Step { label: String::new(), state: a.initial(), config: c0.clone() }],
        warnings: StateWarnings::default(),
        counterexample: None,
        escalate: false,
        non_idempotent: false,
    };
    let value = m.launch(f, a.initial(), c0);
    Outcome {
        value,
        counterexample: m.counterexample,
        warnings: m.warnings.list,
        instances: m.tables.into_iter().map(|t| t.stats).collect(),
        escalate: m.escalate,
        non_idempotent: m.non_idempotent,
    }
}

impl Marking<'_, '_> {
    fn table(&mut self, f: &FtplFormula, kind: InstanceKind, start: StateId, cells: usize) -> usize {
        if self.opts.marks == MarkSharing::Shared {
            if let Some(&t) = self.shared.get(&formula_id(f)) {
                self.tables[t].stats.launches += 1;
                return t;
            }
        }
        let n = self.a.state_count() * cells;
        self.tables.push(Table {
            cells,
            marks: vec![Mark::Unchecked; n],
            witness: vec![None; n],
            stats: InstanceStats {
                kind,
                start,
                launches: 1,
                bodies: vec![0; self.a.state_count()],
            },
        });
        let t = self.tables.len() - 1;
        self.shared.insert(formula_id(f), t);
        t
    }

    fn enter(&mut self, t: usize, cell: usize, mark: Mark, c: &Configuration) {
        let table = &mut self.tables[t];
        table.marks[cell] = mark;
        table.witness[cell] = Some(c.clone());
        table.stats.bodies[cell / table.cells] += 1;
    }

    /// Called where a mark cuts exploration short.
    fn guard(&mut self, t: usize, cell: usize, base: usize, q: StateId, c: &Configuration) {
        if self.tables[t].witness[cell].as_ref() == Some(c) {
            return;
        }
        self.escalate = true;
        match cycle_word(&self.trace, base, q).filter(|(_, w)| keeps_changing(self.ops, c, w)) {
            Some((_, w)) => {
                self.non_idempotent = true;
                self.warnings.report(WarningCode::NonIdempotentCycle, q, || non_idempotent_message(q, &w));
            }
            None => self.warnings.report(WarningCode::MarkingDivergence, q, || {
                format!("{q} is reached again with a configuration different from its first visit")
            }),
        }
    }

    fn fail(&mut self, v: Violation) {
        if self.counterexample.is_none() {
            self.counterexample = Some(counterexample(&self.trace, v));
        }
    }

    fn push(&mut self, label: &str, q: StateId, c: &Configuration) {
        self.trace.push(Step { label: label.to_string(), state: q, config: c.clone() });
    }

    fn launch(&mut self, f: &FtplFormula, q: StateId, c: &Configuration) -> bool {
        if self.opts.marks == MarkSharing::Shared {
            return self.launch_instance(f, q, c);
        }
        let key = (formula_id(f), q, c.clone());
        if self.held.contains(&key) {
            return true;
        }
        let first = self.tables.len();
        let holds = self.launch_instance(f, q, c);
        for t in &mut self.tables[first..] {
            t.marks = Vec::new();
            t.witness = Vec::new();
        }
        if holds {
            self.held.insert(key);
        }
        holds
    }

    fn launch_instance(&mut self, f: &FtplFormula, q: StateId, c: &Configuration) -> bool {
        let base = self.trace.len() - 1;
        match f {
            FtplFormula::After(e, inner) => {
                let t = self.table(f, InstanceKind::After, q, 1);
                self.after(t, base, e, inner, q, c)
            }
            FtplFormula::Before(e, tr) => {
                let t = self.table(f, InstanceKind::Before, q, 2);
                let acc = tr.cp().eval(c);
                self.before(t, base, e, tr, q, c, acc)
            }
            FtplFormula::Trace(TraceFormula::Always(cp)) => {
                let t = self.table(f, InstanceKind::Always, q, 1);
                self.always(t, base, cp, q, c)
            }
            FtplFormula::Trace(TraceFormula::Eventually(cp)) => match self.opts.eventually {
                EventuallyMode::Prefix => {
                    let r = cp.eval(c);
                    if !r {
                        self.fail(Violation::Property);
                    }
                    r
                }
                EventuallyMode::Maximal => {
                    let t = self.table(f, InstanceKind::Eventually, q, 1);
                    self.eventually(t, base, cp, q, c)
                }
            },
        }
    }

    fn after(&mut self, t: usize, base: usize, e: &Event, inner: &FtplFormula, q: StateId, c: &Configuration) -> bool {
        if self.tables[t].marks[q.0] == Mark::Again {
            self.guard(t, q.0, base, q, c);
            return true;
        }
        self.enter(t, q.0, Mark::Again, c);
        let chain: Vec<StateId> = self.trace[base..].iter().map(|s| s.state).collect();
        self.observer.after_entry(q, &chain, &self.tables[t].marks);
        let rescan = !suffix_closed(inner);
        for tr in self.a.transitions_from(q) {
            let c0 = self.ops.apply(c, &tr.label);
            self.push(&tr.label, tr.target, &c0);
            let ok = if e.matches(&tr.label, c, &c0) {
                self.launch(inner, tr.target, &c0) && (!rescan || self.after(t, base, e, inner, tr.target, &c0))
            } else {
                self.after(t, base, e, inner, tr.target, &c0)
            };
            self.trace.pop();
            if !ok {
                return false;
            }
        }
        true
    }

    fn always(&mut self, t: usize, base: usize, cp: &CpFormula, q: StateId, c: &Configuration) -> bool {
        if !cp.eval(c) {
            self.fail(Violation::Property);
            return false;
        }
        if self.tables[t].marks[q.0] == Mark::Checked {
            self.guard(t, q.0, base, q, c);
            return true;
        }
        self.enter(t, q.0, Mark::Checked, c);
        for tr in self.a.transitions_from(q) {
            let c0 = self.ops.apply(c, &tr.label);
            self.push(&tr.label, tr.target, &c0);
            let ok = self.always(t, base, cp, tr.target, &c0);
            self.trace.pop();
            if !ok {
                return false;
            }
        }
        true
    }

    #[allow(clippy::too_many_arguments)]
    fn before(
        &mut self,
        t: usize,
        base: usize,
        e: &Event,
        tr: &TraceFormula,
        q: StateId,
        c: &Configuration,
        acc: bool,
    ) -> bool {
        let cell = 2 * q.0 + acc as usize;
        if self.tables[t].marks[cell] != Mark::Unchecked {
            self.guard(t, cell, base, q, c);
            return true;
        }
        self.enter(t, cell, Mark::Checked, c);
        for x in self.a.transitions_from(q) {
            let c0 = self.ops.apply(c, &x.label);
            self.push(&x.label, x.target, &c0);
            if !acc && e.matches(&x.label, c, &c0) {
                self.fail(Violation::EventAfterPrefix(e.to_string()));
                self.trace.pop();
                return false;
            }
            let acc0 = match tr {
                TraceFormula::Always(cp) => acc && cp.eval(&c0),
                TraceFormula::Eventually(cp) => acc || cp.eval(&c0),
            };
            let ok = self.before(t, base, e, tr, x.target, &c0, acc0);
            self.trace.pop();
            if !ok {
                return false;
            }
        }
        true
    }

    /// `Again` marks states on the current chain, `Checked` states whose
    /// runs all met the property.
    fn eventually(&mut self, t: usize, base: usize, cp: &CpFormula, q: StateId, c: &Configuration) -> bool {
        if cp.eval(c) {
            return true;
        }
        match self.tables[t].marks[q.0] {
            Mark::Checked => {
                self.guard(t, q.0, base, q, c);
                return true;
            }
            Mark::Again => {
                self.guard(t, q.0, base, q, c);
                self.fail(Violation::Cycle);
                return false;
            }
            Mark::Unchecked => {}
        }
        self.enter(t, q.0, Mark::Again, c);
        if self.a.transitions_from(q).is_empty() {
            self.fail(Violation::DeadEnd);
            return false;
        }
        for tr in self.a.transitions_from(q) {
            let c0 = self.ops.apply(c, &tr.label);
            self.push(&tr.label, tr.target, &c0);
            let ok = self.eventually(t, base, cp, tr.target, &c0);
            self.trace.pop();
            if !ok {
                return false;
            }
        }
        self.tables[t].marks[q.0] = Mark::Checked;
        true
    }
}
