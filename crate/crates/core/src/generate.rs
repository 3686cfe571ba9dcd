//! Seeded random instances for property and differential testing.

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::cp::{CpAtom, CpFormula, Domain, Relation, Target};
use crate::ftpl::{Event, FtplFormula, Termination, TraceFormula};
use crate::model::{Binding, Component, Configuration, Delegation, PortRef, Value};
use crate::ops::{NamedOp, OpTable, PrimitiveOp, ValueExpr, RUN};
use crate::path::{compile, Automaton, PathExpr};

pub use rand::SeedableRng;

pub type Rng64 = ChaCha8Rng;

pub fn rng(seed: u64) -> Rng64 {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Component names are drawn from a pool larger than any generated model,
/// so operations regularly target absent components.
pub const NAME_POOL: usize = 10;
const CLASSES: [&str; 3] = ["K0", "K1", "K2"];
const TYPES: [&str; 2] = ["T0", "T1"];
const GROUP: &str = "G";

fn name(i: usize) -> String {
    format!("C{i}")
}

fn any_name(rng: &mut Rng64) -> String {
    if rng.gen_bool(0.1) {
        GROUP.to_string()
    } else {
        name(rng.gen_range(0..NAME_POOL))
    }
}

fn atomic(rng: &mut Rng64, n: String) -> Component {
    let ty = TYPES.choose(rng).unwrap();
    let mut c = Component::new(n, *CLASSES.choose(rng).unwrap())
        .with_param("p", Value::Int(rng.gen_range(0..5)))
        .with_input("in", ty)
        .with_output("out", ty);
    if rng.gen_bool(0.3) {
        c = c.with_param("on", Value::Bool(rng.gen()));
    }
    c
}

fn random_binding(rng: &mut Rng64) -> Binding {
    let (from_port, to_port) = if rng.gen_bool(0.9) { ("out", "in") } else { ("in", "out") };
    Binding::new(PortRef::new(any_name(rng), from_port), PortRef::new(any_name(rng), to_port))
}

/// A valid configuration with at most `max_components` components, possibly
/// including one composite grouping some of the others.
pub fn config(rng: &mut Rng64, max_components: usize) -> Configuration {
    let mut c = Configuration::new();
    let with_group = max_components >= 2 && rng.gen_bool(0.25);
    let n = rng.gen_range(1..=max_components - with_group as usize);
    let mut names: Vec<usize> = (0..NAME_POOL).collect();
    names.shuffle(rng);
    for &i in &names[..n] {
        let comp = atomic(rng, name(i));
        c.components.insert(comp.name.clone(), comp);
    }
    let present: Vec<String> = c.components.keys().cloned().collect();
    for _ in 0..rng.gen_range(0..=n) {
        let a = present.choose(rng).unwrap();
        let b = present.choose(rng).unwrap();
        let bd = Binding::new(PortRef::new(a.as_str(), "out"), PortRef::new(b.as_str(), "in"));
        if c.binding_violation(&bd).is_none() {
            c.bindings.insert(bd);
        }
    }
    if with_group {
        let sub = present.choose(rng).unwrap().clone();
        let ty = c.components[&sub].inputs["in"].clone();
        let mut g = Component::new(GROUP, "Group").with_input("in", &ty);
        g.subcomponents.insert(sub.clone());
        c.components.insert(GROUP.to_string(), g);
        c.delegations.insert(Delegation { outer: PortRef::new(GROUP, "in"), inner: PortRef::new(sub, "in") });
    }
    debug_assert!(c.is_valid(), "{:?}", c.validate());
    c
}

/// One primitive over the name pool. With `idempotent_only`, additive
/// parameter updates are never produced.
pub fn primitive(rng: &mut Rng64, idempotent_only: bool) -> PrimitiveOp {
    match rng.gen_range(0..6) {
        0 => {
            let n = name(rng.gen_range(0..NAME_POOL));
            let spec = atomic(rng, n);
            let parent = rng.gen_bool(0.2).then(|| any_name(rng));
            let bindings = (0..rng.gen_range(0..3))
                .map(|_| {
                    if rng.gen_bool(0.5) {
                        Binding::new(PortRef::new(any_name(rng), "out"), PortRef::new(spec.name.as_str(), "in"))
                    } else {
                        Binding::new(PortRef::new(spec.name.as_str(), "out"), PortRef::new(any_name(rng), "in"))
                    }
                })
                .collect();
            let delegations = match &parent {
                Some(p) if rng.gen_bool(0.5) => vec![Delegation {
                    outer: PortRef::new(p.as_str(), "in"),
                    inner: PortRef::new(spec.name.as_str(), "in"),
                }],
                _ => Vec::new(),
            };
            PrimitiveOp::AddComponent { spec, parent, bindings, delegations }
        }
        1 => PrimitiveOp::RemoveComponent(any_name(rng)),
        2 => PrimitiveOp::AddBinding(random_binding(rng)),
        3 => PrimitiveOp::RemoveBinding(random_binding(rng)),
        4 => {
            let param = if rng.gen_bool(0.8) { "p" } else { "on" };
            let expr = if !idempotent_only && rng.gen_bool(0.3) {
                ValueExpr::Add(rng.gen_range(-2..=3))
            } else if rng.gen_bool(0.85) {
                ValueExpr::Const(Value::Int(rng.gen_range(0..5)))
            } else {
                ValueExpr::Const(Value::Bool(rng.gen()))
            };
            PrimitiveOp::SetParam { component: any_name(rng), param: param.into(), expr }
        }
        _ => PrimitiveOp::Run,
    }
}

/// `count` named operations `op0`, `op1`, … of one to three steps each.
pub fn named_ops(rng: &mut Rng64, count: usize, idempotent_only: bool) -> Vec<NamedOp> {
    (0..count)
        .map(|i| NamedOp {
            name: format!("op{i}"),
            steps: (0..rng.gen_range(1..=3)).map(|_| primitive(rng, idempotent_only)).collect(),
        })
        .collect()
}

/// A path expression with at most `max_size` nodes over `names`.
pub fn path_expr(rng: &mut Rng64, names: &[String], max_size: usize) -> PathExpr {
    let leaf = |rng: &mut Rng64| PathExpr::Op(names.choose(rng).unwrap().clone());
    if max_size <= 1 {
        return leaf(rng);
    }
    match rng.gen_range(0..10) {
        0..=2 => leaf(rng),
        3..=5 if max_size >= 3 => {
            let left = rng.gen_range(1..=max_size - 2);
            let a = path_expr(rng, names, left);
            let b = path_expr(rng, names, max_size - 1 - a.size());
            PathExpr::seq(a, b)
        }
        6 | 7 if max_size >= 3 => {
            let left = rng.gen_range(1..=max_size - 2);
            let a = path_expr(rng, names, left);
            let b = path_expr(rng, names, max_size - 1 - a.size());
            PathExpr::alt(a, b)
        }
        8 => PathExpr::star(path_expr(rng, names, max_size - 1)),
        9 => PathExpr::plus(path_expr(rng, names, max_size - 1)),
        _ => PathExpr::opt(path_expr(rng, names, max_size - 1)),
    }
}

fn relation(rng: &mut Rng64) -> Relation {
    *[Relation::Eq, Relation::Ne, Relation::Lt, Relation::Le, Relation::Gt, Relation::Ge]
        .choose(rng)
        .unwrap()
}

fn atom(rng: &mut Rng64, var: Option<&str>) -> CpAtom {
    match rng.gen_range(0..10) {
        0 => CpAtom::True,
        1 => CpAtom::ComponentPresent(any_name(rng)),
        2 | 3 => CpAtom::BindingPresent(PortRef::new(any_name(rng), "out"), PortRef::new(any_name(rng), "in")),
        4 if rng.gen_bool(0.2) => CpAtom::False,
        _ => {
            let target = match var {
                Some(v) if rng.gen_bool(0.8) => Target::Var(v.to_string()),
                _ => Target::Component(any_name(rng)),
            };
            let (param, rel, value) = if rng.gen_bool(0.85) {
                ("p", relation(rng), Value::Int(rng.gen_range(0..5)))
            } else {
                ("on", if rng.gen() { Relation::Eq } else { Relation::Ne }, Value::Bool(rng.gen()))
            };
            CpAtom::ParamCmp { target, param: param.into(), rel, value }
        }
    }
}

fn domain(rng: &mut Rng64) -> Domain {
    if rng.gen_bool(0.4) {
        Domain::AllComponents
    } else {
        Domain::ComponentsOfClass(CLASSES.choose(rng).unwrap().to_string())
    }
}

/// A formula of the `and`/`forall` fragment with depth at most `max_depth`.
pub fn cp_flat(rng: &mut Rng64, max_depth: usize) -> CpFormula {
    cp_inner(rng, max_depth, None, false, 0)
}

/// A formula over the full connective set.
pub fn cp_any(rng: &mut Rng64, max_depth: usize) -> CpFormula {
    cp_inner(rng, max_depth, None, true, 0)
}

fn cp_inner(rng: &mut Rng64, depth: usize, var: Option<&str>, full: bool, bound: usize) -> CpFormula {
    if depth == 0 || rng.gen_bool(0.35) {
        return CpFormula::Atom(atom(rng, var));
    }
    let choices = if full { 6 } else { 2 };
    match rng.gen_range(0..choices) {
        0 => CpFormula::and(
            cp_inner(rng, depth - 1, var, full, bound),
            cp_inner(rng, depth - 1, var, full, bound),
        ),
        1 | 4 => {
            let v = format!("x{bound}");
            let body = Box::new(cp_inner(rng, depth - 1, Some(&v), full, bound + 1));
            if rng.gen_range(0..choices) == 4 {
                CpFormula::Exists { var: v, domain: domain(rng), body }
            } else {
                CpFormula::Forall { var: v, domain: domain(rng), body }
            }
        }
        2 => CpFormula::or(
            cp_inner(rng, depth - 1, var, full, bound),
            cp_inner(rng, depth - 1, var, full, bound),
        ),
        _ => CpFormula::not(cp_inner(rng, depth - 1, var, full, bound)),
    }
}

fn termination(rng: &mut Rng64) -> Termination {
    *[Termination::Normal, Termination::Exceptional, Termination::Terminates]
        .choose(rng)
        .unwrap()
}

fn event(rng: &mut Rng64, ops: &[String]) -> Event {
    Event { op: ops.choose(rng).unwrap().clone(), termination: termination(rng) }
}

fn trace(rng: &mut Rng64, cp: CpFormula) -> TraceFormula {
    if rng.gen() {
        TraceFormula::Always(cp)
    } else {
        TraceFormula::Eventually(cp)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Head {
    After,
    Before,
    Always,
    Eventually,
}

pub const HEADS: [Head; 4] = [Head::After, Head::Before, Head::Always, Head::Eventually];

/// A temporal formula with the given head over operations `ops` and a
/// property of the checkable fragment.
pub fn ftpl(rng: &mut Rng64, head: Head, ops: &[String], cp_depth: usize) -> FtplFormula {
    let cp = cp_flat(rng, cp_depth);
    match head {
        Head::Always => FtplFormula::Trace(TraceFormula::Always(cp)),
        Head::Eventually => FtplFormula::Trace(TraceFormula::Eventually(cp)),
        Head::Before => FtplFormula::Before(event(rng, ops), trace(rng, cp)),
        Head::After => {
            let e = event(rng, ops);
            let inner = match rng.gen_range(0..4) {
                0 => FtplFormula::Before(event(rng, ops), trace(rng, cp)),
                1 => FtplFormula::after(event(rng, ops), FtplFormula::Trace(trace(rng, cp))),
                _ => FtplFormula::Trace(trace(rng, cp)),
            };
            FtplFormula::after(e, inner)
        }
    }
}

/// A deterministic automaton on `states` states over `labels`: a random
/// spanning tree from `q0` plus `extra` further transitions, many of them
/// closing cycles.
pub fn automaton(rng: &mut Rng64, states: usize, labels: &[String], extra: usize) -> Automaton {
    let mut used: Vec<Vec<bool>> = vec![vec![false; labels.len()]; states];
    let mut raw = Vec::new();
    let mut free_sources: Vec<usize> = vec![0];
    for q in 1..states {
        let (s, l) = loop {
            let i = rng.gen_range(0..free_sources.len());
            let s = free_sources[i];
            let free: Vec<usize> = (0..labels.len()).filter(|&l| !used[s][l]).collect();
            match free.choose(rng) {
                Some(&l) => break (s, l),
                None => {
                    free_sources.swap_remove(i);
                }
            }
        };
        used[s][l] = true;
        raw.push((s, labels[l].clone(), q));
        free_sources.push(q);
    }
    for _ in 0..extra {
        let s = rng.gen_range(0..states);
        let free: Vec<usize> = (0..labels.len()).filter(|&l| !used[s][l]).collect();
        if let Some(&l) = free.choose(rng) {
            used[s][l] = true;
            let t = if rng.gen_bool(0.6) { rng.gen_range(0..=s) } else { rng.gen_range(0..states) };
            raw.push((s, labels[l].clone(), t));
        }
    }
    Automaton::from_transitions(states, raw).expect("generated automaton is well formed")
}

/// Operation names for [`named_ops`] with `count` operations, plus `run`.
pub fn op_names(count: usize) -> Vec<String> {
    let mut v: Vec<String> = (0..count).map(|i| format!("op{i}")).collect();
    v.push(RUN.to_string());
    v
}

/// Operator nodes of `e`, leaves excluded.
pub fn operators(e: &PathExpr) -> usize {
    match e {
        PathExpr::Op(_) => 0,
        PathExpr::Seq(a, b) | PathExpr::Alt(a, b) => 1 + operators(a) + operators(b),
        PathExpr::Opt(a) | PathExpr::Star(a) | PathExpr::Plus(a) => 1 + operators(a),
    }
}

/// One checker input: a model, its operations, a compiled path and a formula.
#[derive(Debug, Clone)]
pub struct Instance {
    pub config: Configuration,
    pub ops: OpTable,
    pub path: PathExpr,
    pub automaton: Automaton,
    pub formula: FtplFormula,
}

/// A differential-testing instance: at most 8 components, at most 5 named
/// operations built from idempotent steps, a path of at most 10 operators
/// and a flat property of depth at most 3 under `head`.
pub fn instance(rng: &mut Rng64, head: Head) -> Instance {
    let config = config(rng, 8);
    let count = rng.gen_range(1..=5);
    let ops = OpTable::from_ops(named_ops(rng, count, true)).expect("generated names are distinct");
    let names = op_names(count);
    let path = loop {
        let e = path_expr(rng, &names, 21);
        if operators(&e) <= 10 {
            break e;
        }
    };
    let automaton = compile(&path);
    let formula = ftpl(rng, head, &names, 3);
    Instance { config, ops, path, automaton, formula }
}
