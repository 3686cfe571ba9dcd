//! First-order configuration properties, evaluated over a single
//! configuration, and the conjunctive-universal fragment the marking
//! checker accepts.

pub(crate) mod parse;

use std::fmt;

use crate::model::{Configuration, PortRef, Value, ValueType};

pub use parse::{parse_cp, parse_definitions, Definitions};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Relation {
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
}

impl Relation {
    pub fn is_ordering(self) -> bool {
        !matches!(self, Relation::Eq | Relation::Ne)
    }

    pub fn symbol(self) -> &'static str {
        match self {
            Relation::Eq => "=",
            Relation::Ne => "!=",
            Relation::Lt => "<",
            Relation::Le => "<=",
            Relation::Gt => ">",
            Relation::Ge => ">=",
        }
    }

    /// `None` when the two values cannot be compared with this relation.
    pub fn holds(self, lhs: &Value, rhs: &Value) -> Option<bool> {
        if lhs.value_type() != rhs.value_type() {
            return None;
        }
        match self {
            Relation::Eq => Some(lhs == rhs),
            Relation::Ne => Some(lhs != rhs),
            _ => match (lhs, rhs) {
                (Value::Int(a), Value::Int(b)) => Some(match self {
                    Relation::Lt => a < b,
                    Relation::Le => a <= b,
                    Relation::Gt => a > b,
                    _ => a >= b,
                }),
                _ => None,
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Target {
    Component(String),
    Var(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum CpAtom {
    True,
    False,
    ComponentPresent(String),
    /// Some binding joins the two ports (either orientation).
    BindingPresent(PortRef, PortRef),
    ParamCmp {
        target: Target,
        param: String,
        rel: Relation,
        value: Value,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Domain {
    AllComponents,
    ComponentsOfClass(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum CpFormula {
    Atom(CpAtom),
    And(Box<CpFormula>, Box<CpFormula>),
    Or(Box<CpFormula>, Box<CpFormula>),
    Not(Box<CpFormula>),
    Forall {
        var: String,
        domain: Domain,
        body: Box<CpFormula>,
    },
    Exists {
        var: String,
        domain: Domain,
        body: Box<CpFormula>,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum FormulaError {
    #[error("unbound variable `{0}`")]
    Unbound(String),
    #[error("variable `{0}` shadows an enclosing binding")]
    Shadowed(String),
    #[error("relation `{rel}` cannot compare {ty} values")]
    Incomparable { rel: &'static str, ty: ValueType },
}

impl CpFormula {
    pub fn and(a: CpFormula, b: CpFormula) -> Self {
        CpFormula::And(Box::new(a), Box::new(b))
    }

    pub fn or(a: CpFormula, b: CpFormula) -> Self {
        CpFormula::Or(Box::new(a), Box::new(b))
    }

    pub fn not(a: CpFormula) -> Self {
        CpFormula::Not(Box::new(a))
    }

    pub fn atom(a: CpAtom) -> Self {
        CpFormula::Atom(a)
    }

    /// Membership in the fragment built from atoms, `and` and `forall` only.
    pub fn is_cp_flat(&self) -> bool {
        match self {
            CpFormula::Atom(_) => true,
            CpFormula::And(a, b) => a.is_cp_flat() && b.is_cp_flat(),
            CpFormula::Forall { body, .. } => body.is_cp_flat(),
            CpFormula::Or(..) | CpFormula::Not(_) | CpFormula::Exists { .. } => false,
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            CpFormula::Atom(_) => 0,
            CpFormula::And(a, b) | CpFormula::Or(a, b) => 1 + a.depth().max(b.depth()),
            CpFormula::Not(a) => 1 + a.depth(),
            CpFormula::Forall { body, .. } | CpFormula::Exists { body, .. } => 1 + body.depth(),
        }
    }

    /// Variables bound before use, no shadowing, ordering relations only on
    /// integers.
    pub fn check_well_formed(&self) -> Result<(), FormulaError> {
        fn go<'a>(f: &'a CpFormula, scope: &mut Vec<&'a str>) -> Result<(), FormulaError> {
            match f {
                CpFormula::Atom(CpAtom::ParamCmp { target, rel, value, .. }) => {
                    if let Target::Var(v) = target {
                        if !scope.contains(&v.as_str()) {
                            return Err(FormulaError::Unbound(v.clone()));
                        }
                    }
                    if rel.is_ordering() && value.value_type() != ValueType::Int {
                        return Err(FormulaError::Incomparable {
                            rel: rel.symbol(),
                            ty: value.value_type(),
                        });
                    }
                    Ok(())
                }
                CpFormula::Atom(_) => Ok(()),
                CpFormula::And(a, b) | CpFormula::Or(a, b) => {
                    go(a, scope)?;
                    go(b, scope)
                }
                CpFormula::Not(a) => go(a, scope),
                CpFormula::Forall { var, body, .. } | CpFormula::Exists { var, body, .. } => {
                    if scope.contains(&var.as_str()) {
                        return Err(FormulaError::Shadowed(var.clone()));
                    }
                    scope.push(var);
                    let r = go(body, scope);
                    scope.pop();
                    r
                }
            }
        }
        go(self, &mut Vec::new())
    }

    /// Evaluates the closed formula on `c`. Total: comparisons against a
    /// missing component or parameter, or of mismatched types, are false.
    pub fn eval(&self, c: &Configuration) -> bool {
        self.eval_in(c, &mut Vec::new())
    }

    fn eval_in<'a>(&'a self, c: &'a Configuration, env: &mut Vec<(&'a str, &'a str)>) -> bool {
        match self {
            CpFormula::Atom(a) => eval_atom(a, c, env),
            CpFormula::And(a, b) => a.eval_in(c, env) && b.eval_in(c, env),
            CpFormula::Or(a, b) => a.eval_in(c, env) || b.eval_in(c, env),
            CpFormula::Not(a) => !a.eval_in(c, env),
            CpFormula::Forall { var, domain, body } => domain_members(c, domain).all(|m| {
                env.push((var, m));
                let r = body.eval_in(c, env);
                env.pop();
                r
            }),
            CpFormula::Exists { var, domain, body } => domain_members(c, domain).any(|m| {
                env.push((var, m));
                let r = body.eval_in(c, env);
                env.pop();
                r
            }),
        }
    }
}

fn domain_members<'a>(c: &'a Configuration, d: &'a Domain) -> impl Iterator<Item = &'a str> + 'a {
    c.components
        .values()
        .filter(move |comp| match d {
            Domain::AllComponents => true,
            Domain::ComponentsOfClass(k) => &comp.class == k,
        })
        .map(|comp| comp.name.as_str())
}

fn eval_atom(a: &CpAtom, c: &Configuration, env: &[(&str, &str)]) -> bool {
    match a {
        CpAtom::True => true,
        CpAtom::False => false,
        CpAtom::ComponentPresent(n) => c.components.contains_key(n),
        CpAtom::BindingPresent(x, y) => c.has_binding_between(x, y),
        CpAtom::ParamCmp { target, param, rel, value } => {
            let name = match target {
                Target::Component(n) => n.as_str(),
                Target::Var(v) => match env.iter().rev().find(|(k, _)| k == v) {
                    Some((_, n)) => n,
                    None => return false,
                },
            };
            c.components
                .get(name)
                .and_then(|comp| comp.parameters.get(param))
                .and_then(|p| rel.holds(&p.value, value))
                .unwrap_or(false)
        }
    }
}

impl fmt::Display for Domain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Domain::AllComponents => f.write_str("components"),
            Domain::ComponentsOfClass(k) => write!(f, "class({k})"),
        }
    }
}

impl fmt::Display for CpAtom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CpAtom::True => f.write_str("true"),
            CpAtom::False => f.write_str("false"),
            CpAtom::ComponentPresent(n) => write!(f, "component({n})"),
            CpAtom::BindingPresent(a, b) => write!(f, "binding({a}, {b})"),
            CpAtom::ParamCmp { target, param, rel, value } => {
                let t = match target {
                    Target::Component(n) | Target::Var(n) => n,
                };
                write!(f, "param({t}.{param}) {} {value}", rel.symbol())
            }
        }
    }
}

/// Prints in the concrete syntax accepted by [`parse_cp`]; binary nodes are
/// always parenthesised.
impl fmt::Display for CpFormula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CpFormula::Atom(a) => write!(f, "{a}"),
            CpFormula::And(a, b) => write!(f, "({a} and {b})"),
            CpFormula::Or(a, b) => write!(f, "({a} or {b})"),
            CpFormula::Not(a) => write!(f, "not {a}"),
            CpFormula::Forall { var, domain, body } => {
                write!(f, "forall {var} in {domain} : ({body})")
            }
            CpFormula::Exists { var, domain, body } => {
                write!(f, "exists {var} in {domain} : ({body})")
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Binding, Component};

    fn servers(n: usize) -> Configuration {
        let mut c = Configuration::new();
        for i in 0..n {
            let name = format!("FS{i}");
            c.components.insert(
                name.clone(),
                Component::new(&name, "FileServer").with_param("deviation", Value::Int(10 * i as i64)),
            );
        }
        c
    }

    fn deviation_bound(limit: i64) -> CpFormula {
        CpFormula::Forall {
            var: "f".into(),
            domain: Domain::ComponentsOfClass("FileServer".into()),
            body: Box::new(CpFormula::Atom(CpAtom::ParamCmp {
                target: Target::Var("f".into()),
                param: "deviation".into(),
                rel: Relation::Le,
                value: Value::Int(limit),
            })),
        }
    }

    #[test]
    fn empty_domain_forall_holds() {
        assert!(deviation_bound(-1).eval(&servers(0)));
        assert!(!deviation_bound(-1).eval(&servers(1)));
        assert!(deviation_bound(20).eval(&servers(3)));
        assert!(!deviation_bound(19).eval(&servers(3)));
    }

    #[test]
    fn flat_fragment_membership() {
        let atom = CpFormula::atom(CpAtom::BindingPresent(
            PortRef::new("CacheHandler", "cache"),
            PortRef::new("RequestHandler", "getCache"),
        ));
        assert!(atom.is_cp_flat());
        assert!(CpFormula::and(deviation_bound(100), atom.clone()).is_cp_flat());
        assert!(CpFormula::atom(CpAtom::False).is_cp_flat());
        assert!(!CpFormula::or(atom.clone(), atom.clone()).is_cp_flat());
        assert!(!CpFormula::not(atom.clone()).is_cp_flat());
        let ex = CpFormula::Exists {
            var: "x".into(),
            domain: Domain::AllComponents,
            body: Box::new(atom),
        };
        assert!(!ex.is_cp_flat());
    }

    #[test]
    fn missing_or_mistyped_parameters_compare_false() {
        let c = servers(1);
        let cmp = |target: &str, value: Value, rel| {
            CpFormula::atom(CpAtom::ParamCmp {
                target: Target::Component(target.into()),
                param: "deviation".into(),
                rel,
                value,
            })
            .eval(&c)
        };
        assert!(cmp("FS0", Value::Int(0), Relation::Eq));
        assert!(!cmp("Nope", Value::Int(0), Relation::Eq));
        assert!(!cmp("FS0", Value::Str("0".into()), Relation::Ne));
        assert!(!cmp("FS0", Value::Bool(true), Relation::Eq));
    }

    #[test]
    fn binding_atom_is_orientation_free() {
        let mut c = Configuration::new();
        c.components.insert("A".into(), Component::new("A", "K").with_output("o", "t"));
        c.components.insert("B".into(), Component::new("B", "K").with_input("i", "t"));
        c.bindings.insert(Binding::new(PortRef::new("A", "o"), PortRef::new("B", "i")));
        let f = CpFormula::atom(CpAtom::BindingPresent(PortRef::new("B", "i"), PortRef::new("A", "o")));
        assert!(f.eval(&c));
    }

    #[test]
    fn well_formedness() {
        let unbound = CpFormula::atom(CpAtom::ParamCmp {
            target: Target::Var("x".into()),
            param: "p".into(),
            rel: Relation::Eq,
            value: Value::Int(1),
        });
        assert_eq!(unbound.check_well_formed(), Err(FormulaError::Unbound("x".into())));
        let shadow = CpFormula::Forall {
            var: "f".into(),
            domain: Domain::AllComponents,
            body: Box::new(deviation_bound(1)),
        };
        assert_eq!(shadow.check_well_formed(), Err(FormulaError::Shadowed("f".into())));
        assert!(deviation_bound(1).check_well_formed().is_ok());
    }
}
