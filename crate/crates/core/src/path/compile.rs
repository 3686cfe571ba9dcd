use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};

use super::{Automaton, PathExpr};

struct Glushkov {
    labels: Vec<String>,
    follow: Vec<BTreeSet<usize>>,
}

struct Summary {
    nullable: bool,
    first: BTreeSet<usize>,
    last: BTreeSet<usize>,
}

impl Glushkov {
    fn visit(&mut self, e: &PathExpr) -> Summary {
        match e {
            PathExpr::Op(name) => {
                let p = self.labels.len();
                self.labels.push(name.clone());
                self.follow.push(BTreeSet::new());
                Summary {
                    nullable: false,
                    first: BTreeSet::from([p]),
                    last: BTreeSet::from([p]),
                }
            }
            PathExpr::Seq(a, b) => {
                let a = self.visit(a);
                let b = self.visit(b);
                for &p in &a.last {
                    self.follow[p].extend(&b.first);
                }
                let mut first = a.first;
                if a.nullable {
                    first.extend(&b.first);
                }
                let mut last = b.last;
                if b.nullable {
                    last.extend(&a.last);
                }
                Summary { nullable: a.nullable && b.nullable, first, last }
            }
            PathExpr::Alt(a, b) => {
                let mut a = self.visit(a);
                let b = self.visit(b);
                a.first.extend(b.first);
                a.last.extend(b.last);
                Summary { nullable: a.nullable || b.nullable, first: a.first, last: a.last }
            }
            PathExpr::Opt(a) => Summary { nullable: true, ..self.visit(a) },
            PathExpr::Star(a) | PathExpr::Plus(a) => {
                let s = self.visit(a);
                for &p in &s.last {
                    self.follow[p].extend(&s.first);
                }
                Summary { nullable: s.nullable || matches!(e, PathExpr::Star(_)), ..s }
            }
        }
    }
}

type Delta = Vec<BTreeMap<String, usize>>;

/// Position automaton, subset construction, then minimisation with respect
/// to the words of `e` themselves. Every state of the result accepts, so it
/// recognises exactly the prefixes of those words. States are numbered breadth-first from the initial state, taking
/// labels in lexicographic order.
pub fn compile(e: &PathExpr) -> Automaton {
    let mut g = Glushkov { labels: Vec::new(), follow: Vec::new() };
    let top = g.visit(e);

    // Subset construction; the empty set stands for the initial state since
    // every other subset reached is non-empty.
    let mut index: HashMap<BTreeSet<usize>, usize> = HashMap::new();
    let mut sets: Vec<BTreeSet<usize>> = vec![BTreeSet::new()];
    index.insert(BTreeSet::new(), 0);
    let mut delta: Delta = vec![BTreeMap::new()];
    let mut queue = VecDeque::from([0usize]);
    while let Some(s) = queue.pop_front() {
        let next: BTreeSet<usize> = if s == 0 {
            top.first.clone()
        } else {
            sets[s].iter().flat_map(|&p| g.follow[p].iter().copied()).collect()
        };
        let mut by_label: BTreeMap<&str, BTreeSet<usize>> = BTreeMap::new();
        for p in next {
            by_label.entry(&g.labels[p]).or_default().insert(p);
        }
        for (label, target) in by_label {
            let t = match index.get(&target) {
                Some(&t) => t,
                None => {
                    let t = sets.len();
                    index.insert(target.clone(), t);
                    sets.push(target);
                    delta.push(BTreeMap::new());
                    queue.push_back(t);
                    t
                }
            };
            delta[s].insert(label.to_string(), t);
        }
    }

    let accepting: Vec<bool> = sets
        .iter()
        .enumerate()
        .map(|(i, s)| if i == 0 { top.nullable } else { !s.is_disjoint(&top.last) })
        .collect();
    let (blocks, block_of) = minimise(&delta, &accepting);
    let mut quotient: Delta = vec![BTreeMap::new(); blocks];
    for (s, edges) in delta.iter().enumerate() {
        for (l, &t) in edges {
            quotient[block_of[s]].insert(l.clone(), block_of[t]);
        }
    }
    renumber(&quotient, block_of[0])
}

type Signature<'a> = (usize, Vec<(&'a str, usize)>);

/// Moore refinement of a partial DFA.
fn minimise(delta: &Delta, accepting: &[bool]) -> (usize, Vec<usize>) {
    let n = delta.len();
    let mut block: Vec<usize> = accepting.iter().map(|&a| a as usize).collect();
    let mut count = 0;
    loop {
        let mut ids: HashMap<Signature, usize> = HashMap::new();
        let mut next = vec![0usize; n];
        for s in 0..n {
            let sig = (
                block[s],
                delta[s].iter().map(|(l, &t)| (l.as_str(), block[t])).collect::<Vec<_>>(),
            );
            let fresh = ids.len();
            next[s] = *ids.entry(sig).or_insert(fresh);
        }
        let new_count = ids.len();
        block = next;
        if new_count == count {
            return (count, block);
        }
        count = new_count;
    }
}

fn renumber(delta: &Delta, start: usize) -> Automaton {
    let mut order = vec![usize::MAX; delta.len()];
    order[start] = 0;
    let mut next = 1;
    let mut queue = VecDeque::from([start]);
    let mut transitions = Vec::new();
    while let Some(s) = queue.pop_front() {
        for (l, &t) in &delta[s] {
            if order[t] == usize::MAX {
                order[t] = next;
                next += 1;
                queue.push_back(t);
            }
            transitions.push((order[s], l.clone(), order[t]));
        }
    }
    Automaton::from_transitions(next, transitions).expect("compiled automaton is well formed")
}
