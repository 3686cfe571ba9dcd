//! Reference semantics by enumeration: every label sequence of the automaton
//! up to a length bound is replayed from the initial configuration and the
//! temporal formula is evaluated on it clause by clause.

use crate::check::EventuallyMode;
use crate::error::{Error, Result};
use crate::ftpl::{FtplFormula, TraceFormula};
use crate::model::Configuration;
use crate::ops::OpTable;
use crate::path::{Automaton, StateId};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Ending {
    /// The last state has no transitions.
    DeadEnd,
    /// Cut at the length bound.
    Truncated,
    /// The last (state, configuration) pair already occurred at
    /// `loop_start`, so the path describes an infinite run.
    Lasso { loop_start: usize },
    /// Extensions of the path are enumerated separately.
    Interior,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EvolutionPath {
    pub ops: Vec<String>,
    pub states: Vec<StateId>,
    /// One more than `ops`; `configs[i + 1]` results from applying `ops[i]`
    /// to `configs[i]`.
    pub configs: Vec<Configuration>,
    pub ending: Ending,
}

impl EvolutionPath {
    pub fn len(&self) -> usize {
        self.ops.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ops.is_empty()
    }

    fn event_at(&self, e: &crate::ftpl::Event, i: usize) -> bool {
        e.matches(&self.ops[i - 1], &self.configs[i - 1], &self.configs[i])
    }
}

fn eval_trace(t: &TraceFormula, configs: &[Configuration]) -> bool {
    match t {
        TraceFormula::Always(cp) => configs.iter().all(|c| cp.eval(c)),
        TraceFormula::Eventually(cp) => configs.iter().any(|c| cp.eval(c)),
    }
}

/// Truth of `f` on the finite path `σ`, read as the sequence itself.
pub fn eval_on_path(f: &FtplFormula, sigma: &EvolutionPath) -> bool {
    eval_suffix(f, sigma, 0)
}

/// Truth on the suffix starting at index `from`; event indexes are
/// positive relative to it.
fn eval_suffix(f: &FtplFormula, sigma: &EvolutionPath, from: usize) -> bool {
    let k = sigma.len();
    match f {
        FtplFormula::After(e, inner) => {
            (from + 1..=k).all(|i| !sigma.event_at(e, i) || eval_suffix(inner, sigma, i))
        }
        FtplFormula::Before(e, t) => {
            (from + 1..=k).all(|i| !sigma.event_at(e, i) || eval_trace(t, &sigma.configs[from..i]))
        }
        FtplFormula::Trace(t) => eval_trace(t, &sigma.configs[from..]),
    }
}

/// Truth on the infinite run repeating `σ[j..k]` forever, where the last
/// pair of `σ` equals the pair at `j`. Positions are folded into `0..k`.
fn eval_lasso(f: &FtplFormula, sigma: &EvolutionPath, j: usize, p: usize) -> bool {
    let k = sigma.len();
    let positions = || (p..k).chain(j..p.min(k));
    let steps = || (p + 1..=k).chain(j + 1..=p.min(k));
    let fold = |s: usize| if s == k { j } else { s };
    match f {
        FtplFormula::After(e, inner) => {
            steps().all(|s| !sigma.event_at(e, s) || eval_lasso(inner, sigma, j, fold(s)))
        }
        FtplFormula::Trace(TraceFormula::Always(cp)) => positions().all(|i| cp.eval(&sigma.configs[i])),
        FtplFormula::Trace(TraceFormula::Eventually(cp)) => positions().any(|i| cp.eval(&sigma.configs[i])),
        FtplFormula::Before(..) => unreachable!("prefix-monotone formulas are decided on finite paths"),
    }
}

#[derive(Debug, Clone)]
pub struct OracleOptions {
    pub max_len: usize,
    /// Paths enumerated before giving up.
    pub cap: usize,
    pub eventually: EventuallyMode,
    /// Evaluate every prefix instead of relying on prefix monotonicity.
    pub paranoid: bool,
}

impl OracleOptions {
    pub fn new(max_len: usize) -> Self {
        OracleOptions {
            max_len,
            cap: 1_000_000,
            eventually: EventuallyMode::Maximal,
            paranoid: false,
        }
    }
}

#[derive(Debug, Clone)]
pub struct OracleVerdict {
    pub value: bool,
    /// Shortest failing path found.
    pub counterexample: Option<EvolutionPath>,
    pub paths: usize,
    pub evaluated: usize,
    /// Paths cut at the bound that no verdict was drawn from.
    pub unresolved: usize,
    pub max_len: usize,
}

/// Depth-first enumeration of all paths of length at most `max_len`,
/// calling `visit` on each; stops early when `visit` returns false.
fn enumerate(
    a: &Automaton,
    c0: &Configuration,
    ops: &OpTable,
    max_len: usize,
    cap: usize,
    visit: &mut dyn FnMut(&EvolutionPath) -> bool,
) -> Result<usize> {
    fn go(
        a: &Automaton,
        ops: &OpTable,
        max_len: usize,
        cap: usize,
        p: &mut EvolutionPath,
        count: &mut usize,
        visit: &mut dyn FnMut(&EvolutionPath) -> bool,
    ) -> Result<bool> {
        *count += 1;
        if *count > cap {
            return Err(Error::ResourceCap { cap });
        }
        let q = *p.states.last().unwrap();
        let k = p.len();
        let out = a.transitions_from(q);
        let last = p.configs.last().unwrap();
        let earlier = (0..k).rev().find(|&i| p.states[i] == q && p.configs[i] == *last);
        p.ending = match earlier {
            Some(j) => Ending::Lasso { loop_start: j },
            None if out.is_empty() => Ending::DeadEnd,
            None if k == max_len => Ending::Truncated,
            None => Ending::Interior,
        };
        if !visit(p) {
            return Ok(false);
        }
        if k == max_len {
            return Ok(true);
        }
        for t in out {
            let c = ops.apply(p.configs.last().unwrap(), &t.label);
            p.ops.push(t.label.clone());
            p.states.push(t.target);
            p.configs.push(c);
            let go_on = go(a, ops, max_len, cap, p, count, visit)?;
            p.ops.pop();
            p.states.pop();
            p.configs.pop();
            if !go_on {
                return Ok(false);
            }
        }
        Ok(true)
    }
    let mut p = EvolutionPath {
        ops: Vec::new(),
        states: vec![a.initial()],
        configs: vec![c0.clone()],
        ending: Ending::Interior,
    };
    let mut count = 0;
    go(a, ops, max_len, cap, &mut p, &mut count, visit)?;
    Ok(count)
}

/// Every path of length at most `max_len` from the initial state.
pub fn enumerate_prefixes(
    a: &Automaton,
    c0: &Configuration,
    ops: &OpTable,
    max_len: usize,
    cap: usize,
) -> Result<Vec<EvolutionPath>> {
    let mut out = Vec::new();
    enumerate(a, c0, ops, max_len, cap, &mut |p| {
        out.push(p.clone());
        true
    })?;
    Ok(out)
}

fn is_leaf(p: &EvolutionPath, max_len: usize) -> bool {
    p.len() == max_len || matches!(p.ending, Ending::DeadEnd)
}

/// Conjunction of the formula over the enumerated paths. `eventually` not
/// guarded by `before` is judged on maximal runs only: dead ends and
/// lassos.
pub fn oracle_check(
    f: &FtplFormula,
    a: &Automaton,
    c0: &Configuration,
    ops: &OpTable,
    opts: &OracleOptions,
) -> Result<OracleVerdict> {
    let maximal = !f.is_prefix_monotone() && opts.eventually == EventuallyMode::Maximal;
    let mut evaluated = 0;
    let mut unresolved = 0;
    let mut failing: Option<EvolutionPath> = None;
    let paths = enumerate(a, c0, ops, opts.max_len, opts.cap, &mut |p| {
        let holds = if maximal {
            match p.ending {
                Ending::Lasso { loop_start } => Some(eval_lasso(f, p, loop_start, 0)),
                Ending::DeadEnd => Some(eval_on_path(f, p)),
                Ending::Truncated => {
                    unresolved += 1;
                    None
                }
                Ending::Interior => None,
            }
        } else if opts.paranoid || is_leaf(p, opts.max_len) {
            Some(eval_on_path(f, p))
        } else {
            None
        };
        match holds {
            Some(h) => {
                evaluated += 1;
                if !h {
                    failing = Some(p.clone());
                }
                h
            }
            None => true,
        }
    })?;
    let counterexample = failing.map(|p| if maximal { p } else { shortest_failing_prefix(f, p) });
    Ok(OracleVerdict {
        value: counterexample.is_none(),
        counterexample,
        paths,
        evaluated,
        unresolved,
        max_len: opts.max_len,
    })
}

fn shortest_failing_prefix(f: &FtplFormula, p: EvolutionPath) -> EvolutionPath {
    (0..=p.len())
        .map(|n| EvolutionPath {
            ops: p.ops[..n].to_vec(),
            states: p.states[..=n].to_vec(),
            configs: p.configs[..=n].to_vec(),
            ending: if n == p.len() { p.ending } else { Ending::Interior },
        })
        .find(|q| !eval_on_path(f, q))
        .unwrap_or(p)
}
