use std::collections::VecDeque;
use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(transparent)]
pub struct StateId(pub usize);

impl fmt::Display for StateId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "q{}", self.0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct Transition {
    pub source: StateId,
    pub label: String,
    pub target: StateId,
    /// Closes a cycle in the depth-first exploration from the initial state.
    pub back_edge: bool,
}

/// A deterministic automaton in which every state accepts and every state
/// is reachable from `q0`.
#[derive(Debug, Clone)]
pub struct Automaton {
    states: usize,
    /// Sorted by source, then label.
    transitions: Vec<Transition>,
    out: Vec<std::ops::Range<usize>>,
    /// `below[q]` holds the states `q'` with `q < q'`.
    below: Vec<Vec<bool>>,
}

impl Automaton {
    /// Builds an automaton from raw transitions over states `0..states`,
    /// state 0 being initial. Rejects nondeterminism and unreachable states.
    pub fn from_transitions(states: usize, raw: Vec<(usize, String, usize)>) -> Result<Self> {
        if states == 0 {
            return Err(Error::Automaton("automaton has no states".into()));
        }
        let mut raw = raw;
        raw.sort();
        for w in raw.windows(2) {
            if w[0].0 == w[1].0 && w[0].1 == w[1].1 {
                return Err(Error::Automaton(format!(
                    "two `{}` transitions leave q{}",
                    w[0].1, w[0].0
                )));
            }
        }
        if let Some((s, _, t)) = raw.iter().find(|(s, _, t)| *s >= states || *t >= states) {
            return Err(Error::Automaton(format!("transition q{s} -> q{t} leaves the state range")));
        }
        let mut out = vec![0..0; states];
        let mut i = 0;
        for (q, range) in out.iter_mut().enumerate() {
            let start = i;
            while i < raw.len() && raw[i].0 == q {
                i += 1;
            }
            *range = start..i;
        }
        let mut a = Automaton {
            states,
            transitions: raw
                .into_iter()
                .map(|(s, label, t)| Transition {
                    source: StateId(s),
                    label,
                    target: StateId(t),
                    back_edge: false,
                })
                .collect(),
            out,
            below: Vec::new(),
        };
        a.order_states()?;
        Ok(a)
    }

    /// Depth-first exploration from `q0`, children in label order. An edge
    /// into a state still on the exploration stack is a back-edge; `<` is
    /// reachability along the remaining edges, which form a DAG.
    fn order_states(&mut self) -> Result<()> {
        #[derive(Clone, Copy, PartialEq)]
        enum Colour {
            White,
            Grey,
            Black,
        }
        let n = self.states;
        let mut colour = vec![Colour::White; n];
        let mut finished = Vec::with_capacity(n);
        let mut stack: Vec<(usize, usize)> = vec![(0, self.out[0].start)];
        colour[0] = Colour::Grey;
        while let Some(top) = stack.last_mut() {
            let (q, next) = *top;
            if next == self.out[q].end {
                colour[q] = Colour::Black;
                finished.push(q);
                stack.pop();
                continue;
            }
            top.1 += 1;
            let t = self.transitions[next].target.0;
            match colour[t] {
                Colour::Grey => self.transitions[next].back_edge = true,
                Colour::White => {
                    colour[t] = Colour::Grey;
                    stack.push((t, self.out[t].start));
                }
                Colour::Black => {}
            }
        }
        if let Some(q) = colour.iter().position(|c| *c == Colour::White) {
            return Err(Error::Automaton(format!("q{q} is unreachable from q0")));
        }
        let mut below = vec![vec![false; n]; n];
        for &q in &finished {
            let mut row = vec![false; n];
            for t in &self.transitions[self.out[q].clone()] {
                if t.back_edge {
                    continue;
                }
                row[t.target.0] = true;
                for (r, &b) in row.iter_mut().zip(&below[t.target.0]) {
                    *r |= b;
                }
            }
            below[q] = row;
        }
        self.below = below;
        Ok(())
    }

    pub fn initial(&self) -> StateId {
        StateId(0)
    }

    pub fn state_count(&self) -> usize {
        self.states
    }

    pub fn states(&self) -> impl Iterator<Item = StateId> {
        (0..self.states).map(StateId)
    }

    pub fn transitions(&self) -> &[Transition] {
        &self.transitions
    }

    /// Outgoing transitions of `q` in label order.
    pub fn transitions_from(&self, q: StateId) -> &[Transition] {
        &self.transitions[self.out[q.0].clone()]
    }

    pub fn back_edges(&self) -> impl Iterator<Item = &Transition> {
        self.transitions.iter().filter(|t| t.back_edge)
    }

    /// The strict order on states.
    pub fn less(&self, a: StateId, b: StateId) -> bool {
        self.below[a.0][b.0]
    }

    pub fn step(&self, q: StateId, label: &str) -> Option<StateId> {
        self.transitions_from(q)
            .binary_search_by(|t| t.label.as_str().cmp(label))
            .ok()
            .map(|i| self.transitions_from(q)[i].target)
    }

    pub fn run<S: AsRef<str>>(&self, word: &[S]) -> Option<StateId> {
        word.iter()
            .try_fold(self.initial(), |q, l| self.step(q, l.as_ref()))
    }

    pub fn accepts<S: AsRef<str>>(&self, word: &[S]) -> bool {
        self.run(word).is_some()
    }

    /// Labels used on some transition, sorted and deduplicated.
    pub fn alphabet(&self) -> Vec<&str> {
        let mut v: Vec<&str> = self.transitions.iter().map(|t| t.label.as_str()).collect();
        v.sort_unstable();
        v.dedup();
        v
    }

    /// The state bijection witnessing isomorphism with `other`, if any.
    pub fn isomorphism(&self, other: &Automaton) -> Option<Vec<StateId>> {
        if self.states != other.states || self.transitions.len() != other.transitions.len() {
            return None;
        }
        let mut map = vec![None; self.states];
        let mut used = vec![false; other.states];
        map[0] = Some(StateId(0));
        used[0] = true;
        let mut queue = VecDeque::from([StateId(0)]);
        while let Some(q) = queue.pop_front() {
            let p = map[q.0]?;
            let (mine, theirs) = (self.transitions_from(q), other.transitions_from(p));
            if mine.len() != theirs.len() {
                return None;
            }
            for (a, b) in mine.iter().zip(theirs) {
                if a.label != b.label {
                    return None;
                }
                match map[a.target.0] {
                    Some(m) if m == b.target => {}
                    Some(_) => return None,
                    None => {
                        if used[b.target.0] {
                            return None;
                        }
                        used[b.target.0] = true;
                        map[a.target.0] = Some(b.target);
                        queue.push_back(a.target);
                    }
                }
            }
        }
        map.into_iter().collect()
    }

    /// GraphViz rendering; back-edges are dashed.
    pub fn to_dot(&self) -> String {
        let mut s = String::from("digraph automaton {\n  rankdir=LR;\n  node [shape=circle];\n");
        s.push_str("  start [shape=point];\n  start -> q0;\n");
        for q in self.states() {
            s.push_str(&format!("  {q};\n"));
        }
        for t in &self.transitions {
            let style = if t.back_edge { ", style=dashed" } else { "" };
            s.push_str(&format!(
                "  {} -> {} [label=\"{}\"{style}];\n",
                t.source, t.target, t.label
            ));
        }
        s.push_str("}\n");
        s
    }

    pub fn summary(&self) -> String {
        format!(
            "{} states, {} transitions, {} back-edges",
            self.states,
            self.transitions.len(),
            self.back_edges().count()
        )
    }
}
