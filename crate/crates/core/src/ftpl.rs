//! Temporal properties over reconfiguration paths: events, trace properties
//! and the `after`/`before` operators.

use std::fmt;

use crate::cp::{parse::parse_cp_at, CpFormula, Definitions};
use crate::error::ParseError;
use crate::lex::{Cursor, Tok};
use crate::model::Configuration;
use crate::ops::OpTable;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Termination {
    /// The operation changed the configuration.
    Normal,
    /// The operation left the configuration unchanged.
    Exceptional,
    Terminates,
}

impl Termination {
    pub fn holds(self, before: &Configuration, after: &Configuration) -> bool {
        match self {
            Termination::Normal => before != after,
            Termination::Exceptional => before == after,
            Termination::Terminates => true,
        }
    }

    pub fn keyword(self) -> &'static str {
        match self {
            Termination::Normal => "normal",
            Termination::Exceptional => "exceptional",
            Termination::Terminates => "terminates",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Event {
    pub op: String,
    pub termination: Termination,
}

impl Event {
    pub fn new(op: &str, termination: Termination) -> Self {
        Event { op: op.to_string(), termination }
    }

    /// Whether the step `before --label--> after` is an occurrence.
    pub fn matches(&self, label: &str, before: &Configuration, after: &Configuration) -> bool {
        label == self.op && self.termination.holds(before, after)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum TraceFormula {
    Always(CpFormula),
    Eventually(CpFormula),
}

impl TraceFormula {
    pub fn cp(&self) -> &CpFormula {
        match self {
            TraceFormula::Always(f) | TraceFormula::Eventually(f) => f,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum FtplFormula {
    After(Event, Box<FtplFormula>),
    Before(Event, TraceFormula),
    Trace(TraceFormula),
}

impl FtplFormula {
    pub fn after(e: Event, inner: FtplFormula) -> Self {
        FtplFormula::After(e, Box::new(inner))
    }

    pub fn always(cp: CpFormula) -> Self {
        FtplFormula::Trace(TraceFormula::Always(cp))
    }

    pub fn eventually(cp: CpFormula) -> Self {
        FtplFormula::Trace(TraceFormula::Eventually(cp))
    }

    /// The innermost trace property.
    pub fn trace(&self) -> &TraceFormula {
        match self {
            FtplFormula::After(_, inner) => inner.trace(),
            FtplFormula::Before(_, t) | FtplFormula::Trace(t) => t,
        }
    }

    pub fn is_cp_flat(&self) -> bool {
        self.trace().cp().is_cp_flat()
    }

    /// Whether truth on a path implies truth on every prefix of it; fails
    /// exactly for an `eventually` that is not guarded by `before`.
    pub fn is_prefix_monotone(&self) -> bool {
        match self {
            FtplFormula::After(_, inner) => inner.is_prefix_monotone(),
            FtplFormula::Before(..) => true,
            FtplFormula::Trace(t) => matches!(t, TraceFormula::Always(_)),
        }
    }
}

impl fmt::Display for Event {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {}", self.op, self.termination.keyword())
    }
}

impl fmt::Display for TraceFormula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TraceFormula::Always(cp) => write!(f, "always {cp}"),
            TraceFormula::Eventually(cp) => write!(f, "eventually {cp}"),
        }
    }
}

impl fmt::Display for FtplFormula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FtplFormula::After(e, inner) => write!(f, "after {e} {inner}"),
            FtplFormula::Before(e, t) => write!(f, "before {e} {t}"),
            FtplFormula::Trace(t) => write!(f, "{t}"),
        }
    }
}

pub fn parse_ftpl(text: &str, ops: &OpTable, defs: &Definitions) -> Result<FtplFormula, ParseError> {
    let mut cur = Cursor::new(text)?;
    let f = property(&mut cur, ops, defs)?;
    if !cur.at_end() {
        return Err(cur.error(format!("unexpected {}", cur.found())));
    }
    Ok(f)
}

fn property(cur: &mut Cursor, ops: &OpTable, defs: &Definitions) -> Result<FtplFormula, ParseError> {
    if cur.eat_keyword("after") {
        let e = event(cur, ops)?;
        Ok(FtplFormula::after(e, property(cur, ops, defs)?))
    } else if cur.eat_keyword("before") {
        let e = event(cur, ops)?;
        Ok(FtplFormula::Before(e, trace(cur, defs)?))
    } else {
        Ok(FtplFormula::Trace(trace(cur, defs)?))
    }
}

fn event(cur: &mut Cursor, ops: &OpTable) -> Result<Event, ParseError> {
    let op = match cur.peek() {
        Some(Tok::Ident(name)) if ops.contains(name) => name.clone(),
        Some(Tok::Ident(name)) => return Err(cur.error(format!("unknown operation `{name}`"))),
        _ => return Err(cur.error(format!("expected an operation name, found {}", cur.found()))),
    };
    cur.next();
    let termination = if cur.eat_keyword("normal") {
        Termination::Normal
    } else if cur.eat_keyword("exceptional") {
        Termination::Exceptional
    } else if cur.eat_keyword("terminates") {
        Termination::Terminates
    } else {
        return Err(cur.error(format!(
            "expected `normal`, `exceptional` or `terminates`, found {}",
            cur.found()
        )));
    };
    Ok(Event { op, termination })
}

fn trace(cur: &mut Cursor, defs: &Definitions) -> Result<TraceFormula, ParseError> {
    if cur.eat_keyword("always") {
        Ok(TraceFormula::Always(parse_cp_at(cur, defs)?))
    } else if cur.eat_keyword("eventually") {
        Ok(TraceFormula::Eventually(parse_cp_at(cur, defs)?))
    } else {
        Err(cur.error(format!(
            "expected `after`, `before`, `always` or `eventually`, found {}",
            cur.found()
        )))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cp::{parse_definitions, CpAtom};
    use crate::model::PortRef;
    use crate::ops::{NamedOp, PrimitiveOp};

    fn ops() -> OpTable {
        OpTable::from_ops(["AddCacheHandler", "RemoveCacheHandler"].iter().map(|n| NamedOp {
            name: n.to_string(),
            steps: vec![PrimitiveOp::Run],
        }))
        .unwrap()
    }

    fn defs() -> Definitions {
        parse_definitions("CacheConnected := binding(CacheHandler.cache, RequestHandler.getCache)").unwrap()
    }

    #[test]
    fn after_event_always() {
        let f = parse_ftpl("after AddCacheHandler normal always CacheConnected", &ops(), &defs()).unwrap();
        let connected = CpFormula::Atom(CpAtom::BindingPresent(
            PortRef::new("CacheHandler", "cache"),
            PortRef::new("RequestHandler", "getCache"),
        ));
        assert_eq!(
            f,
            FtplFormula::after(Event::new("AddCacheHandler", Termination::Normal), FtplFormula::always(connected))
        );
        assert_eq!(parse_ftpl(&f.to_string(), &ops(), &defs()).unwrap(), f);
    }

    #[test]
    fn errors() {
        assert!(parse_ftpl("always CacheConnected", &ops(), &defs()).is_ok());
        let e = parse_ftpl("before Foo terminates eventually true", &ops(), &defs()).unwrap_err();
        assert!(e.message.contains("Foo"));
        assert!(parse_ftpl("after run always true", &ops(), &defs()).is_err());
        assert!(parse_ftpl("always Unknown", &ops(), &defs()).is_err());
        assert!(parse_ftpl("before run normal after run normal always true", &ops(), &defs()).is_err());
    }

    #[test]
    fn prefix_monotonicity_classification() {
        let t = |s: &str| parse_ftpl(s, &ops(), &defs()).unwrap().is_prefix_monotone();
        assert!(t("always true"));
        assert!(t("before run normal eventually true"));
        assert!(!t("eventually true"));
        assert!(!t("after run terminates eventually true"));
    }
}
