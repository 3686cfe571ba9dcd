//! Component models: components with typed ports and parameters, bindings
//! between ports, and delegation links from composite ports to the ports of
//! their subcomponents.
//!
//! Every collection is name-keyed and ordered, so the derived `Eq`/`Hash`
//! are the set-semantic equality used to tell `normal` events from
//! `exceptional` ones, independent of the order a file listed things in.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Value {
    Bool(bool),
    Int(i64),
    Str(String),
}

impl Value {
    pub fn value_type(&self) -> ValueType {
        match self {
            Value::Bool(_) => ValueType::Bool,
            Value::Int(_) => ValueType::Int,
            Value::Str(_) => ValueType::String,
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Bool(b) => write!(f, "{b}"),
            Value::Int(n) => write!(f, "{n}"),
            Value::Str(s) => write!(f, "{s:?}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ValueType {
    Int,
    Bool,
    String,
}

impl fmt::Display for ValueType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ValueType::Int => "int",
            ValueType::Bool => "bool",
            ValueType::String => "string",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct PortRef {
    pub component: String,
    pub port: String,
}

impl PortRef {
    pub fn new(component: impl Into<String>, port: impl Into<String>) -> Self {
        PortRef {
            component: component.into(),
            port: port.into(),
        }
    }
}

impl fmt::Display for PortRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}.{}", self.component, self.port)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Param {
    pub ty: ValueType,
    pub value: Value,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Component {
    pub name: String,
    pub class: String,
    pub parameters: BTreeMap<String, Param>,
    pub inputs: BTreeMap<String, String>,
    pub outputs: BTreeMap<String, String>,
    pub subcomponents: BTreeSet<String>,
}

impl Component {
    pub fn new(name: impl Into<String>, class: impl Into<String>) -> Self {
        Component {
            name: name.into(),
            class: class.into(),
            parameters: BTreeMap::new(),
            inputs: BTreeMap::new(),
            outputs: BTreeMap::new(),
            subcomponents: BTreeSet::new(),
        }
    }

    pub fn with_param(mut self, name: &str, value: Value) -> Self {
        let ty = value.value_type();
        self.parameters.insert(name.to_string(), Param { ty, value });
        self
    }

    pub fn with_input(mut self, name: &str, ty: &str) -> Self {
        self.inputs.insert(name.to_string(), ty.to_string());
        self
    }

    pub fn with_output(mut self, name: &str, ty: &str) -> Self {
        self.outputs.insert(name.to_string(), ty.to_string());
        self
    }

    pub fn is_composite(&self) -> bool {
        !self.subcomponents.is_empty()
    }

    /// Direction and type of a port, if the component declares it.
    pub fn port(&self, name: &str) -> Option<(PortDirection, &str)> {
        if let Some(t) = self.inputs.get(name) {
            Some((PortDirection::Input, t))
        } else {
            self.outputs.get(name).map(|t| (PortDirection::Output, t.as_str()))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PortDirection {
    Input,
    Output,
}

/// A binding links an output port (`from`) to an input port (`to`).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Binding {
    pub from: PortRef,
    pub to: PortRef,
}

impl Binding {
    pub fn new(from: PortRef, to: PortRef) -> Self {
        Binding { from, to }
    }

    pub fn touches(&self, component: &str) -> bool {
        self.from.component == component || self.to.component == component
    }

    /// True when the binding joins the two ports, whichever way round.
    pub fn joins(&self, a: &PortRef, b: &PortRef) -> bool {
        (&self.from == a && &self.to == b) || (&self.from == b && &self.to == a)
    }
}

impl fmt::Display for Binding {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} -> {}", self.from, self.to)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Delegation {
    pub outer: PortRef,
    pub inner: PortRef,
}

impl Delegation {
    pub fn touches(&self, component: &str) -> bool {
        self.outer.component == component || self.inner.component == component
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Configuration {
    pub components: BTreeMap<String, Component>,
    pub bindings: BTreeSet<Binding>,
    pub delegations: BTreeSet<Delegation>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Violation {
    #[error("component {component}: name `{name}` is used by more than one parameter/port")]
    OverlappingNames { component: String, name: String },
    #[error("component {component}: parameter {param} holds a value that is not of type {expected}")]
    ParamTypeMismatch {
        component: String,
        param: String,
        expected: ValueType,
    },
    #[error("component {component}: a composite component cannot have parameters")]
    CompositeWithParameters { component: String },
    #[error("component {component}: unknown subcomponent {sub}")]
    UnknownSubcomponent { component: String, sub: String },
    #[error("subcomponent cycle {}", .cycle.join(","))]
    SubcomponentCycle { cycle: Vec<String> },
    #[error("{context}: unknown component or port {port}")]
    UnknownPort { context: String, port: PortRef },
    #[error("binding {binding}: source must be an output port and target an input port")]
    BindingDirection { binding: Binding },
    #[error("binding type mismatch: {binding} links {from_type} to {to_type}")]
    BindingTypeMismatch {
        binding: Binding,
        from_type: String,
        to_type: String,
    },
    #[error("delegation {outer} -> {inner}: inner component is not a subcomponent of the outer one")]
    DelegationNotNested { outer: PortRef, inner: PortRef },
    #[error("delegation {outer} -> {inner}: ports differ in direction or type")]
    DelegationPortMismatch { outer: PortRef, inner: PortRef },
}

impl Configuration {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn component(&self, name: &str) -> Option<&Component> {
        self.components.get(name)
    }

    pub fn port(&self, r: &PortRef) -> Option<(PortDirection, &str)> {
        self.components.get(&r.component)?.port(&r.port)
    }

    pub fn has_binding_between(&self, a: &PortRef, b: &PortRef) -> bool {
        self.bindings.iter().any(|bd| bd.joins(a, b))
    }

    /// Checks every structural invariant. Violations are data, not errors.
    pub fn validate(&self) -> Result<(), Vec<Violation>> {
        let mut out = Vec::new();
        for c in self.components.values() {
            validate_component(c, &mut out);
            for sub in &c.subcomponents {
                if !self.components.contains_key(sub) {
                    out.push(Violation::UnknownSubcomponent {
                        component: c.name.clone(),
                        sub: sub.clone(),
                    });
                }
            }
        }
        if let Some(cycle) = self.subcomponent_cycle() {
            out.push(Violation::SubcomponentCycle { cycle });
        }
        for b in &self.bindings {
            if let Some(v) = self.binding_violation(b) {
                out.push(v);
            }
        }
        for d in &self.delegations {
            if let Some(v) = self.delegation_violation(d) {
                out.push(v);
            }
        }
        if out.is_empty() {
            Ok(())
        } else {
            Err(out)
        }
    }

    pub fn is_valid(&self) -> bool {
        self.validate().is_ok()
    }

    pub(crate) fn binding_violation(&self, b: &Binding) -> Option<Violation> {
        let from = self.port(&b.from);
        let to = self.port(&b.to);
        let (Some((fd, ft)), Some((td, tt))) = (from, to) else {
            let port = if from.is_none() { &b.from } else { &b.to };
            return Some(Violation::UnknownPort {
                context: format!("binding {b}"),
                port: port.clone(),
            });
        };
        if fd != PortDirection::Output || td != PortDirection::Input {
            return Some(Violation::BindingDirection { binding: b.clone() });
        }
        if ft != tt {
            return Some(Violation::BindingTypeMismatch {
                binding: b.clone(),
                from_type: ft.to_string(),
                to_type: tt.to_string(),
            });
        }
        None
    }

    pub(crate) fn delegation_violation(&self, d: &Delegation) -> Option<Violation> {
        let (Some(outer), Some(inner)) = (self.port(&d.outer), self.port(&d.inner)) else {
            let port = if self.port(&d.outer).is_none() { &d.outer } else { &d.inner };
            return Some(Violation::UnknownPort {
                context: format!("delegation {} -> {}", d.outer, d.inner),
                port: port.clone(),
            });
        };
        let nested = self.components[&d.outer.component]
            .subcomponents
            .contains(&d.inner.component);
        if !nested {
            return Some(Violation::DelegationNotNested {
                outer: d.outer.clone(),
                inner: d.inner.clone(),
            });
        }
        if outer != inner {
            return Some(Violation::DelegationPortMismatch {
                outer: d.outer.clone(),
                inner: d.inner.clone(),
            });
        }
        None
    }

    /// First cycle of the "is a subcomponent of" relation, in DFS order from
    /// the lexicographically smallest component.
    fn subcomponent_cycle(&self) -> Option<Vec<String>> {
        #[derive(Clone, Copy, PartialEq)]
        enum Colour {
            White,
            Grey,
            Black,
        }
        fn visit<'a>(
            cfg: &'a Configuration,
            name: &'a str,
            colour: &mut BTreeMap<&'a str, Colour>,
            stack: &mut Vec<&'a str>,
        ) -> Option<Vec<String>> {
            colour.insert(name, Colour::Grey);
            stack.push(name);
            for sub in &cfg.components[name].subcomponents {
                match colour.get(sub.as_str()).copied() {
                    Some(Colour::Grey) => {
                        let at = stack.iter().position(|s| *s == sub).unwrap_or(0);
                        return Some(stack[at..].iter().map(|s| s.to_string()).collect());
                    }
                    Some(Colour::White) => {
                        if let Some(c) = visit(cfg, sub, colour, stack) {
                            return Some(c);
                        }
                    }
                    _ => {}
                }
            }
            stack.pop();
            colour.insert(name, Colour::Black);
            None
        }
        let mut colour: BTreeMap<&str, Colour> = self
            .components
            .keys()
            .map(|k| (k.as_str(), Colour::White))
            .collect();
        for name in self.components.keys() {
            if colour[name.as_str()] == Colour::White {
                if let Some(c) = visit(self, name, &mut colour, &mut Vec::new()) {
                    return Some(c);
                }
            }
        }
        None
    }
}

fn validate_component(c: &Component, out: &mut Vec<Violation>) {
    let mut seen = BTreeSet::new();
    let names = c
        .parameters
        .keys()
        .chain(c.inputs.keys())
        .chain(c.outputs.keys());
    for n in names {
        if !seen.insert(n) {
            out.push(Violation::OverlappingNames {
                component: c.name.clone(),
                name: n.clone(),
            });
        }
    }
    for (name, p) in &c.parameters {
        if p.value.value_type() != p.ty {
            out.push(Violation::ParamTypeMismatch {
                component: c.name.clone(),
                param: name.clone(),
                expected: p.ty,
            });
        }
    }
    if c.is_composite() && !c.parameters.is_empty() {
        out.push(Violation::CompositeWithParameters {
            component: c.name.clone(),
        });
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pair() -> Configuration {
        let mut c = Configuration::new();
        let a = Component::new("A", "K").with_output("o", "int");
        let b = Component::new("B", "K").with_input("i", "int").with_input("s", "string");
        c.components.insert("A".into(), a);
        c.components.insert("B".into(), b);
        c
    }

    #[test]
    fn detects_two_node_subcomponent_cycle() {
        let mut c = pair();
        c.components.get_mut("A").unwrap().subcomponents.insert("B".into());
        c.components.get_mut("B").unwrap().subcomponents.insert("A".into());
        let v = c.validate().unwrap_err();
        assert!(v.iter().any(|v| v.to_string() == "subcomponent cycle A,B"), "{v:?}");
    }

    #[test]
    fn binding_types_must_agree() {
        let mut c = pair();
        c.bindings.insert(Binding::new(PortRef::new("A", "o"), PortRef::new("B", "s")));
        let v = c.validate().unwrap_err();
        assert!(v[0].to_string().starts_with("binding type mismatch"));
        let mut ok = pair();
        ok.bindings.insert(Binding::new(PortRef::new("A", "o"), PortRef::new("B", "i")));
        assert!(ok.is_valid());
    }

    #[test]
    fn binding_direction_is_output_to_input() {
        let mut c = pair();
        c.bindings.insert(Binding::new(PortRef::new("B", "i"), PortRef::new("A", "o")));
        assert!(matches!(c.validate().unwrap_err()[0], Violation::BindingDirection { .. }));
    }

    #[test]
    fn composite_cannot_have_parameters() {
        let mut c = pair();
        let a = c.components.get_mut("A").unwrap();
        a.subcomponents.insert("B".into());
        a.parameters.insert("p".into(), Param { ty: ValueType::Int, value: Value::Int(1) });
        assert!(matches!(
            c.validate().unwrap_err()[0],
            Violation::CompositeWithParameters { .. }
        ));
    }

    #[test]
    fn parameter_value_must_match_type() {
        let mut c = pair();
        c.components.get_mut("B").unwrap().parameters.insert(
            "p".into(),
            Param { ty: ValueType::Int, value: Value::Bool(true) },
        );
        assert!(matches!(c.validate().unwrap_err()[0], Violation::ParamTypeMismatch { .. }));
    }

    #[test]
    fn names_are_disjoint_across_parameters_and_ports() {
        let mut c = pair();
        c.components
            .get_mut("B")
            .unwrap()
            .outputs
            .insert("i".into(), "int".into());
        assert!(matches!(c.validate().unwrap_err()[0], Violation::OverlappingNames { .. }));
    }

    #[test]
    fn delegation_needs_nesting_and_matching_port() {
        let mut c = pair();
        let outer = Component::new("Outer", "Box").with_input("in", "int");
        c.components.insert("Outer".into(), outer);
        let d = Delegation { outer: PortRef::new("Outer", "in"), inner: PortRef::new("B", "i") };
        c.delegations.insert(d.clone());
        assert!(matches!(c.validate().unwrap_err()[0], Violation::DelegationNotNested { .. }));
        c.components.get_mut("Outer").unwrap().subcomponents.insert("B".into());
        assert!(c.is_valid());
        c.delegations.clear();
        c.delegations.insert(Delegation { outer: PortRef::new("Outer", "in"), inner: PortRef::new("B", "s") });
        assert!(matches!(c.validate().unwrap_err()[0], Violation::DelegationPortMismatch { .. }));
    }

    #[test]
    fn binding_match_ignores_orientation() {
        let b = Binding::new(PortRef::new("A", "o"), PortRef::new("B", "i"));
        assert!(b.joins(&PortRef::new("B", "i"), &PortRef::new("A", "o")));
    }
}
