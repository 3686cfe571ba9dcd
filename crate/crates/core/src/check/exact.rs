use std::collections::{HashMap, HashSet};

use super::{
    counterexample, cycle_word, formula_id, keeps_changing, non_idempotent_message, suffix_closed,
    CheckOptions, Counterexample, EventuallyMode, StateWarnings, Step, Violation, Warning, WarningCode,
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
    pub non_idempotent: bool,
    pub nodes: u64,
}

/// Exploration of (state, configuration) pairs. Visited sets are keyed by
/// the checker's formula node, so launches of the same inner formula share
/// results; that is sound here because a pair determines its future.
struct Exact<'a> {
    a: &'a Automaton,
    ops: &'a OpTable,
    opts: &'a CheckOptions,
    seen: HashSet<(usize, StateId, Configuration, bool)>,
    safe: HashSet<(usize, StateId, Configuration)>,
    on_stack: HashSet<(StateId, Configuration)>,
    per_state: HashMap<(usize, StateId), usize>,
    trace: Vec<Step>,
    warnings: StateWarnings,
    counterexample: Option<Counterexample>,
    non_idempotent: bool,
    nodes: u64,
}

pub(crate) fn run(f: &FtplFormula, a: &Automaton, c0: &Configuration, ops: &OpTable, opts: &CheckOptions) -> Outcome {
    let mut x = Exact {
        a,
        ops,
        opts,
        seen: HashSet::new(),
        safe: HashSet::new(),
        on_stack: HashSet::new(),
        per_state: HashMap::new(),
        trace: vec![Step { label: String::new(), state: a.initial(), config: c0.clone() }],
        warnings: StateWarnings::default(),
        counterexample: None,
        non_idempotent: false,
        nodes: 0,
    };
    let value = x.launch(f, a.initial(), c0);
    Outcome {
        value,
        counterexample: x.counterexample,
        warnings: x.warnings.list,
        non_idempotent: x.non_idempotent,
        nodes: x.nodes,
    }
}

impl Exact<'_> {
    fn fail(&mut self, v: Violation) {
        if self.counterexample.is_none() {
            self.counterexample = Some(counterexample(&self.trace, v));
        }
    }

    fn push(&mut self, label: &str, q: StateId, c: &Configuration) {
        self.trace.push(Step { label: label.to_string(), state: q, config: c.clone() });
    }

    /// Whether a new pair may be explored. Refuses pairs closing a cycle
    /// that would change the configuration again, and pairs beyond the
    /// per-state budget. The cycle test waits for a third configuration at
    /// `q`: cycles of idempotent operations settle by then.
    fn admit(&mut self, id: usize, base: usize, q: StateId, c: &Configuration) -> bool {
        let n = self.per_state.entry((id, q)).or_insert(0);
        *n += 1;
        let visits = *n;
        if visits > 2 {
            let changing = cycle_word(&self.trace, base, q)
                .filter(|(j, w)| self.trace[*j].config != *c && keeps_changing(self.ops, c, w));
            if let Some((_, w)) = changing {
                self.non_idempotent = true;
                self.warnings.report(WarningCode::NonIdempotentCycle, q, || non_idempotent_message(q, &w));
                return false;
            }
        }
        if visits > self.opts.state_budget {
            let budget = self.opts.state_budget;
            self.warnings.report(WarningCode::StateBudgetExceeded, q, || {
                format!("more than {budget} configurations reach {q}; exploration stopped there")
            });
            return false;
        }
        self.nodes += 1;
        true
    }

    fn first_visit(&mut self, id: usize, q: StateId, c: &Configuration, acc: bool) -> bool {
        self.seen.insert((id, q, c.clone(), acc))
    }

    fn launch(&mut self, f: &FtplFormula, q: StateId, c: &Configuration) -> bool {
        let base = self.trace.len() - 1;
        let id = formula_id(f);
        match f {
            FtplFormula::After(e, inner) => self.after(id, base, e, inner, q, c),
            FtplFormula::Before(e, tr) => {
                let acc = tr.cp().eval(c);
                self.before(id, base, e, tr, q, c, acc)
            }
            FtplFormula::Trace(TraceFormula::Always(cp)) => self.always(id, base, cp, q, c),
            FtplFormula::Trace(TraceFormula::Eventually(cp)) => match self.opts.eventually {
                EventuallyMode::Prefix => {
                    let r = cp.eval(c);
                    if !r {
                        self.fail(Violation::Property);
                    }
                    r
                }
                EventuallyMode::Maximal => self.eventually(id, base, cp, q, c),
            },
        }
    }

    fn after(&mut self, id: usize, base: usize, e: &Event, inner: &FtplFormula, q: StateId, c: &Configuration) -> bool {
        if !self.first_visit(id, q, c, false) || !self.admit(id, base, q, c) {
            return true;
        }
        let rescan = !suffix_closed(inner);
        for tr in self.a.transitions_from(q) {
            let c0 = self.ops.apply(c, &tr.label);
            self.push(&tr.label, tr.target, &c0);
            let ok = if e.matches(&tr.label, c, &c0) {
                self.launch(inner, tr.target, &c0) && (!rescan || self.after(id, base, e, inner, tr.target, &c0))
            } else {
                self.after(id, base, e, inner, tr.target, &c0)
            };
            self.trace.pop();
            if !ok {
                return false;
            }
        }
        true
    }

    fn always(&mut self, id: usize, base: usize, cp: &CpFormula, q: StateId, c: &Configuration) -> bool {
        if !cp.eval(c) {
            self.fail(Violation::Property);
            return false;
        }
        if !self.first_visit(id, q, c, false) || !self.admit(id, base, q, c) {
            return true;
        }
        for tr in self.a.transitions_from(q) {
            let c0 = self.ops.apply(c, &tr.label);
            self.push(&tr.label, tr.target, &c0);
            let ok = self.always(id, base, cp, tr.target, &c0);
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
        id: usize,
        base: usize,
        e: &Event,
        tr: &TraceFormula,
        q: StateId,
        c: &Configuration,
        acc: bool,
    ) -> bool {
        if !self.first_visit(id, q, c, acc) || !self.admit(id, base, q, c) {
            return true;
        }
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
            let ok = self.before(id, base, e, tr, x.target, &c0, acc0);
            self.trace.pop();
            if !ok {
                return false;
            }
        }
        true
    }

    fn eventually(&mut self, id: usize, base: usize, cp: &CpFormula, q: StateId, c: &Configuration) -> bool {
        if cp.eval(c) || self.safe.contains(&(id, q, c.clone())) {
            return true;
        }
        if self.on_stack.contains(&(q, c.clone())) {
            self.fail(Violation::Cycle);
            return false;
        }
        if !self.admit(id, base, q, c) {
            return true;
        }
        if self.a.transitions_from(q).is_empty() {
            self.fail(Violation::DeadEnd);
            return false;
        }
        self.on_stack.insert((q, c.clone()));
        for tr in self.a.transitions_from(q) {
            let c0 = self.ops.apply(c, &tr.label);
            self.push(&tr.label, tr.target, &c0);
            let ok = self.eventually(id, base, cp, tr.target, &c0);
            self.trace.pop();
            if !ok {
                return false;
            }
        }
        self.on_stack.remove(&(q, c.clone()));
        self.safe.insert((id, q, c.clone()));
        true
    }
}
