//! JSON model and operation-table formats.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Binding, Component, Configuration, Delegation, Param, PortRef, Value, ValueType};
use crate::ops::{NamedOp, OpTable, PrimitiveOp, ValueExpr};

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigDoc {
    components: Vec<ComponentDoc>,
    #[serde(default)]
    bindings: Vec<Binding>,
    #[serde(default)]
    delegations: Vec<Delegation>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ComponentDoc {
    name: String,
    class: String,
    #[serde(default)]
    parameters: Vec<ParamDoc>,
    #[serde(default)]
    inputs: Vec<PortDoc>,
    #[serde(default)]
    outputs: Vec<PortDoc>,
    #[serde(default)]
    subcomponents: Vec<String>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ParamDoc {
    name: String,
    #[serde(rename = "type")]
    ty: ValueType,
    value: Value,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PortDoc {
    name: String,
    #[serde(rename = "type")]
    ty: String,
}

fn structural(message: String) -> Error {
    Error::Structure(message)
}

fn insert_unique<V>(map: &mut BTreeMap<String, V>, key: String, v: V, what: &str, owner: &str) -> Result<()> {
    if map.contains_key(&key) {
        return Err(structural(format!("component {owner}: duplicate {what} `{key}`")));
    }
    map.insert(key, v);
    Ok(())
}

impl ComponentDoc {
    fn into_component(self) -> Result<Component> {
        let mut c = Component::new(self.name, self.class);
        for p in self.parameters {
            let param = Param { ty: p.ty, value: p.value };
            insert_unique(&mut c.parameters, p.name, param, "parameter", &c.name)?;
        }
        for p in self.inputs {
            insert_unique(&mut c.inputs, p.name, p.ty, "input port", &c.name)?;
        }
        for p in self.outputs {
            insert_unique(&mut c.outputs, p.name, p.ty, "output port", &c.name)?;
        }
        c.subcomponents = self.subcomponents.into_iter().collect();
        Ok(c)
    }

    fn from_component(c: &Component) -> Self {
        ComponentDoc {
            name: c.name.clone(),
            class: c.class.clone(),
            parameters: c
                .parameters
                .iter()
                .map(|(n, p)| ParamDoc { name: n.clone(), ty: p.ty, value: p.value.clone() })
                .collect(),
            inputs: port_docs(&c.inputs),
            outputs: port_docs(&c.outputs),
            subcomponents: c.subcomponents.iter().cloned().collect(),
        }
    }
}

fn port_docs(m: &BTreeMap<String, String>) -> Vec<PortDoc> {
    m.iter()
        .map(|(n, t)| PortDoc { name: n.clone(), ty: t.clone() })
        .collect()
}

/// Parses a model. Structural problems (bad JSON, missing keys, duplicate
/// names) are errors; invariant violations are left to
/// [`Configuration::validate`].
pub fn parse_config(text: &str) -> Result<Configuration> {
    let doc: ConfigDoc = serde_json::from_str(text)?;
    let mut cfg = Configuration::new();
    for cd in doc.components {
        let c = cd.into_component()?;
        if cfg.components.contains_key(&c.name) {
            return Err(structural(format!("duplicate component name `{}`", c.name)));
        }
        cfg.components.insert(c.name.clone(), c);
    }
    cfg.bindings = doc.bindings.into_iter().collect();
    cfg.delegations = doc.delegations.into_iter().collect();
    Ok(cfg)
}

pub fn serialize_config(c: &Configuration) -> String {
    let doc = ConfigDoc {
        components: c.components.values().map(ComponentDoc::from_component).collect(),
        bindings: c.bindings.iter().cloned().collect(),
        delegations: c.delegations.iter().cloned().collect(),
    };
    serde_json::to_string_pretty(&doc).expect("configuration serializes")
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct OpsDoc {
    operations: Vec<OpDoc>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct OpDoc {
    name: String,
    steps: Vec<StepDoc>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
enum StepDoc {
    AddComponent {
        component: ComponentDoc,
        #[serde(default)]
        parent: Option<String>,
        #[serde(default)]
        bindings: Vec<Binding>,
        #[serde(default)]
        delegations: Vec<Delegation>,
    },
    RemoveComponent {
        component: String,
    },
    AddBinding {
        from: PortRef,
        to: PortRef,
    },
    RemoveBinding {
        from: PortRef,
        to: PortRef,
    },
    SetParam {
        component: String,
        param: String,
        expr: ExprDoc,
    },
    Run,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", deny_unknown_fields)]
enum ExprDoc {
    Const(Value),
    Add(i64),
}

impl StepDoc {
    fn into_primitive(self) -> Result<PrimitiveOp> {
        Ok(match self {
            StepDoc::AddComponent {
                component,
                parent,
                bindings,
                delegations,
            } => PrimitiveOp::AddComponent {
                spec: component.into_component()?,
                parent,
                bindings,
                delegations,
            },
            StepDoc::RemoveComponent { component } => PrimitiveOp::RemoveComponent(component),
            StepDoc::AddBinding { from, to } => PrimitiveOp::AddBinding(Binding::new(from, to)),
            StepDoc::RemoveBinding { from, to } => PrimitiveOp::RemoveBinding(Binding::new(from, to)),
            StepDoc::SetParam { component, param, expr } => PrimitiveOp::SetParam {
                component,
                param,
                expr: match expr {
                    ExprDoc::Const(v) => ValueExpr::Const(v),
                    ExprDoc::Add(d) => ValueExpr::Add(d),
                },
            },
            StepDoc::Run => PrimitiveOp::Run,
        })
    }

    fn from_primitive(p: &PrimitiveOp) -> Self {
        match p {
            PrimitiveOp::AddComponent { spec, parent, bindings, delegations } => StepDoc::AddComponent {
                component: ComponentDoc::from_component(spec),
                parent: parent.clone(),
                bindings: bindings.clone(),
                delegations: delegations.clone(),
            },
            PrimitiveOp::RemoveComponent(n) => StepDoc::RemoveComponent { component: n.clone() },
            PrimitiveOp::AddBinding(b) => StepDoc::AddBinding { from: b.from.clone(), to: b.to.clone() },
            PrimitiveOp::RemoveBinding(b) => StepDoc::RemoveBinding { from: b.from.clone(), to: b.to.clone() },
            PrimitiveOp::SetParam { component, param, expr } => StepDoc::SetParam {
                component: component.clone(),
                param: param.clone(),
                expr: match expr {
                    ValueExpr::Const(v) => ExprDoc::Const(v.clone()),
                    ValueExpr::Add(d) => ExprDoc::Add(*d),
                },
            },
            PrimitiveOp::Run => StepDoc::Run,
        }
    }
}

/// Parses an operation table; `run` is registered automatically and may not
/// be redefined. An empty document yields the table holding only `run`.
pub fn parse_ops(text: &str) -> Result<OpTable> {
    let mut table = OpTable::new();
    if text.trim().is_empty() {
        return Ok(table);
    }
    let doc: OpsDoc = serde_json::from_str(text)?;
    for od in doc.operations {
        if od.steps.is_empty() {
            return Err(structural(format!("operation `{}` has no steps", od.name)));
        }
        let steps = od
            .steps
            .into_iter()
            .map(StepDoc::into_primitive)
            .collect::<Result<Vec<_>>>()?;
        table.insert(NamedOp { name: od.name, steps })?;
    }
    Ok(table)
}

/// Serializes every operation except the built-in `run`.
pub fn serialize_ops(table: &OpTable) -> String {
    let doc = OpsDoc {
        operations: table
            .iter()
            .filter(|op| op.name != crate::ops::RUN)
            .map(|op| OpDoc { name: op.name.clone(), steps: op.steps.iter().map(StepDoc::from_primitive).collect() })
            .collect(),
    };
    serde_json::to_string_pretty(&doc).expect("operations serialize")
}
