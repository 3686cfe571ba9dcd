//! Primitive reconfiguration operations, named compositions of them, and the
//! reserved `run` operation.
//!
//! All operations are total: a primitive that cannot be performed leaves the
//! configuration unchanged. Results of applying an operation to a valid
//! configuration are always valid.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::error::{Error, Result};
use crate::model::{Binding, Component, Configuration, Delegation, Value, ValueType};

pub const RUN: &str = "run";

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum ValueExpr {
    Const(Value),
    Add(i64),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum PrimitiveOp {
    AddComponent {
        spec: Component,
        parent: Option<String>,
        bindings: Vec<Binding>,
        delegations: Vec<Delegation>,
    },
    RemoveComponent(String),
    AddBinding(Binding),
    RemoveBinding(Binding),
    SetParam {
        component: String,
        param: String,
        expr: ValueExpr,
    },
    Run,
}

impl fmt::Display for PrimitiveOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PrimitiveOp::AddComponent { spec, .. } => write!(f, "add-component {}", spec.name),
            PrimitiveOp::RemoveComponent(n) => write!(f, "remove-component {n}"),
            PrimitiveOp::AddBinding(b) => write!(f, "add-binding {b}"),
            PrimitiveOp::RemoveBinding(b) => write!(f, "remove-binding {b}"),
            PrimitiveOp::SetParam { component, param, expr } => match expr {
                ValueExpr::Const(v) => write!(f, "set-param {component}.{param} := {v}"),
                ValueExpr::Add(d) => write!(f, "set-param {component}.{param} += {d}"),
            },
            PrimitiveOp::Run => f.write_str("run"),
        }
    }
}

impl PrimitiveOp {
    /// Applies the operation, returning `None` when it cannot be performed.
    fn try_apply(&self, c: &Configuration) -> Option<Configuration> {
        match self {
            PrimitiveOp::AddComponent {
                spec,
                parent,
                bindings,
                delegations,
            } => {
                if c.components.contains_key(&spec.name) {
                    return None;
                }
                let mut next = c.clone();
                if let Some(p) = parent {
                    let pc = next.components.get_mut(p)?;
                    if !pc.parameters.is_empty() {
                        return None;
                    }
                    pc.subcomponents.insert(spec.name.clone());
                }
                next.components.insert(spec.name.clone(), spec.clone());
                if !next.is_valid() {
                    return None;
                }
                for b in bindings {
                    if next.binding_violation(b).is_none() {
                        next.bindings.insert(b.clone());
                    }
                }
                for d in delegations {
                    if next.delegation_violation(d).is_none() {
                        next.delegations.insert(d.clone());
                    }
                }
                Some(next)
            }
            PrimitiveOp::RemoveComponent(name) => {
                if !c.components.contains_key(name) {
                    return None;
                }
                let mut next = c.clone();
                next.components.remove(name);
                next.bindings.retain(|b| !b.touches(name));
                next.delegations.retain(|d| !d.touches(name));
                for comp in next.components.values_mut() {
                    comp.subcomponents.remove(name);
                }
                Some(next)
            }
            PrimitiveOp::AddBinding(b) => {
                if c.bindings.contains(b) || c.binding_violation(b).is_some() {
                    return None;
                }
                let mut next = c.clone();
                next.bindings.insert(b.clone());
                Some(next)
            }
            PrimitiveOp::RemoveBinding(b) => {
                if !c.bindings.contains(b) {
                    return None;
                }
                let mut next = c.clone();
                next.bindings.remove(b);
                Some(next)
            }
            PrimitiveOp::SetParam {
                component,
                param,
                expr,
            } => {
                let current = c.components.get(component)?.parameters.get(param)?;
                let value = match expr {
                    ValueExpr::Const(v) if v.value_type() == current.ty => v.clone(),
                    ValueExpr::Add(d) if current.ty == ValueType::Int => match current.value {
                        Value::Int(n) => Value::Int(n.checked_add(*d)?),
                        _ => return None,
                    },
                    _ => return None,
                };
                if value == current.value {
                    return None;
                }
                let mut next = c.clone();
                next.components
                    .get_mut(component)?
                    .parameters
                    .get_mut(param)?
                    .value = value;
                Some(next)
            }
            PrimitiveOp::Run => None,
        }
    }

    pub fn is_idempotent(&self) -> bool {
        !matches!(
            self,
            PrimitiveOp::SetParam {
                expr: ValueExpr::Add(_),
                ..
            }
        )
    }

    /// Components whose presence, ports, parameters or bindings this step
    /// reads or writes.
    fn touched(&self) -> BTreeSet<&str> {
        let mut s = BTreeSet::new();
        match self {
            PrimitiveOp::AddComponent {
                spec,
                parent,
                bindings,
                delegations,
            } => {
                s.insert(spec.name.as_str());
                s.extend(spec.subcomponents.iter().map(String::as_str));
                if let Some(p) = parent {
                    s.insert(p.as_str());
                }
                for b in bindings {
                    s.insert(b.from.component.as_str());
                    s.insert(b.to.component.as_str());
                }
                for d in delegations {
                    s.insert(d.outer.component.as_str());
                    s.insert(d.inner.component.as_str());
                }
            }
            PrimitiveOp::RemoveComponent(n) => {
                s.insert(n.as_str());
            }
            PrimitiveOp::AddBinding(b) | PrimitiveOp::RemoveBinding(b) => {
                s.insert(b.from.component.as_str());
                s.insert(b.to.component.as_str());
            }
            PrimitiveOp::SetParam { component, .. } => {
                s.insert(component.as_str());
            }
            PrimitiveOp::Run => {}
        }
        s
    }
}

/// Applies one primitive; identity when it cannot be performed.
pub fn apply_primitive(c: &Configuration, op: &PrimitiveOp) -> Configuration {
    op.try_apply(c).unwrap_or_else(|| c.clone())
}

/// Like [`apply_primitive`], also reporting whether the step changed anything.
pub fn apply_primitive_with_effect(c: &Configuration, op: &PrimitiveOp) -> (Configuration, bool) {
    match op.try_apply(c) {
        Some(next) => {
            let changed = next != *c;
            (next, changed)
        }
        None => (c.clone(), false),
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NamedOp {
    pub name: String,
    pub steps: Vec<PrimitiveOp>,
}

impl NamedOp {
    pub fn run() -> Self {
        NamedOp {
            name: RUN.to_string(),
            steps: vec![PrimitiveOp::Run],
        }
    }

    pub fn apply(&self, c: &Configuration) -> Configuration {
        let mut cur: Option<Configuration> = None;
        for step in &self.steps {
            let base = cur.as_ref().unwrap_or(c);
            if let Some(next) = step.try_apply(base) {
                cur = Some(next);
            }
        }
        cur.unwrap_or_else(|| c.clone())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Idempotence {
    Idempotent,
    NonIdempotent,
    Unknown,
}

impl fmt::Display for Idempotence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Idempotence::Idempotent => "idempotent",
            Idempotence::NonIdempotent => "non-idempotent",
            Idempotence::Unknown => "unknown",
        })
    }
}

/// Syntactic idempotence verdict.
///
/// A step sequence is idempotent when each step is and no two steps touch a
/// common component: such steps commute, and a composition of commuting
/// idempotent functions is idempotent.
pub fn classify_idempotence(op: &NamedOp) -> Idempotence {
    if op.steps.iter().any(|s| !s.is_idempotent()) {
        return Idempotence::NonIdempotent;
    }
    let mut seen: BTreeSet<&str> = BTreeSet::new();
    for step in &op.steps {
        let touched = step.touched();
        if touched.iter().any(|t| seen.contains(t)) {
            return Idempotence::Unknown;
        }
        seen.extend(touched);
    }
    Idempotence::Idempotent
}

/// Operation names mapped to their definitions; always contains `run`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OpTable {
    ops: BTreeMap<String, NamedOp>,
}

impl Default for OpTable {
    fn default() -> Self {
        let mut ops = BTreeMap::new();
        ops.insert(RUN.to_string(), NamedOp::run());
        OpTable { ops }
    }
}

impl OpTable {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, op: NamedOp) -> Result<()> {
        if op.steps.is_empty() {
            return Err(Error::Structure(format!("operation `{}` has no steps", op.name)));
        }
        if self.ops.contains_key(&op.name) {
            return Err(Error::DuplicateOperation(op.name));
        }
        self.ops.insert(op.name.clone(), op);
        Ok(())
    }

    pub fn from_ops(ops: impl IntoIterator<Item = NamedOp>) -> Result<Self> {
        let mut t = OpTable::new();
        for op in ops {
            t.insert(op)?;
        }
        Ok(t)
    }

    pub fn get(&self, name: &str) -> Option<&NamedOp> {
        self.ops.get(name)
    }

    pub fn contains(&self, name: &str) -> bool {
        self.ops.contains_key(name)
    }

    pub fn len(&self) -> usize {
        self.ops.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ops.is_empty()
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.ops.keys().map(String::as_str)
    }

    pub fn iter(&self) -> impl Iterator<Item = &NamedOp> {
        self.ops.values()
    }

    /// Applies the named operation. Unknown names are an input error that
    /// must be caught before checking starts; here they panic.
    pub fn apply(&self, c: &Configuration, name: &str) -> Configuration {
        match self.ops.get(name) {
            Some(op) => op.apply(c),
            None => panic!("operation `{name}` is not in the table"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::PortRef;

    fn base() -> Configuration {
        let mut c = Configuration::new();
        c.components.insert(
            "A".into(),
            Component::new("A", "K")
                .with_output("o", "t")
                .with_param("p", Value::Int(100)),
        );
        c.components
            .insert("B".into(), Component::new("B", "K").with_input("i", "t"));
        c.bindings
            .insert(Binding::new(PortRef::new("A", "o"), PortRef::new("B", "i")));
        c
    }

    fn add(delta: i64) -> PrimitiveOp {
        PrimitiveOp::SetParam {
            component: "A".into(),
            param: "p".into(),
            expr: ValueExpr::Add(delta),
        }
    }

    #[test]
    fn add_param_twice_is_not_once() {
        let once = apply_primitive(&base(), &add(50));
        let twice = apply_primitive(&once, &add(50));
        assert_eq!(once.components["A"].parameters["p"].value, Value::Int(150));
        assert_eq!(twice.components["A"].parameters["p"].value, Value::Int(200));
    }

    #[test]
    fn removing_a_component_drops_its_bindings() {
        let c = apply_primitive(&base(), &PrimitiveOp::RemoveComponent("B".into()));
        assert!(c.bindings.is_empty());
        assert!(!c.components.contains_key("B"));
        assert!(c.is_valid());
    }

    #[test]
    fn inapplicable_operations_are_identity() {
        let c = base();
        let cases = [
            PrimitiveOp::RemoveComponent("Z".into()),
            PrimitiveOp::AddComponent {
                spec: Component::new("A", "Other"),
                parent: None,
                bindings: vec![],
                delegations: vec![],
            },
            PrimitiveOp::AddBinding(Binding::new(PortRef::new("B", "i"), PortRef::new("A", "o"))),
            PrimitiveOp::RemoveBinding(Binding::new(PortRef::new("A", "x"), PortRef::new("B", "i"))),
            PrimitiveOp::SetParam {
                component: "A".into(),
                param: "p".into(),
                expr: ValueExpr::Const(Value::Bool(true)),
            },
            PrimitiveOp::SetParam {
                component: "Z".into(),
                param: "p".into(),
                expr: ValueExpr::Add(1),
            },
            PrimitiveOp::Run,
        ];
        for op in cases {
            let (next, changed) = apply_primitive_with_effect(&c, &op);
            assert_eq!(next, c, "{op}");
            assert!(!changed);
        }
    }

    #[test]
    fn add_component_installs_only_valid_bindings() {
        let spec = Component::new("C", "K").with_input("i", "t").with_input("j", "u");
        let op = PrimitiveOp::AddComponent {
            spec,
            parent: None,
            bindings: vec![
                Binding::new(PortRef::new("A", "o"), PortRef::new("C", "i")),
                Binding::new(PortRef::new("A", "o"), PortRef::new("C", "j")),
            ],
            delegations: vec![],
        };
        let c = apply_primitive(&base(), &op);
        assert_eq!(c.bindings.len(), 2);
        assert!(c.is_valid());
    }

    #[test]
    fn add_component_under_a_parameterised_parent_is_refused() {
        let op = PrimitiveOp::AddComponent {
            spec: Component::new("C", "K"),
            parent: Some("A".into()),
            bindings: vec![],
            delegations: vec![],
        };
        assert_eq!(apply_primitive(&base(), &op), base());
    }

    #[test]
    fn classification() {
        let bind = NamedOp {
            name: "b".into(),
            steps: vec![PrimitiveOp::AddBinding(Binding::new(
                PortRef::new("A", "o"),
                PortRef::new("B", "i"),
            ))],
        };
        assert_eq!(classify_idempotence(&bind), Idempotence::Idempotent);
        let inc = NamedOp { name: "inc".into(), steps: vec![add(1)] };
        assert_eq!(classify_idempotence(&inc), Idempotence::NonIdempotent);
        let churn = NamedOp {
            name: "churn".into(),
            steps: vec![
                PrimitiveOp::AddComponent {
                    spec: Component::new("X", "K"),
                    parent: None,
                    bindings: vec![],
                    delegations: vec![],
                },
                PrimitiveOp::RemoveComponent("X".into()),
            ],
        };
        assert_eq!(classify_idempotence(&churn), Idempotence::Unknown);
        // brute check: churn applied twice equals once on this sample anyway
        let c = base();
        assert_eq!(churn.apply(&churn.apply(&c)), churn.apply(&c));
        assert_eq!(classify_idempotence(&NamedOp::run()), Idempotence::Idempotent);
    }

    #[test]
    fn duplicate_names_are_rejected() {
        let mut t = OpTable::new();
        assert!(matches!(t.insert(NamedOp::run()), Err(Error::DuplicateOperation(_))));
        assert_eq!(t.len(), 1);
    }
}
