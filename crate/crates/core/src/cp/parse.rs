use std::collections::BTreeMap;

use super::{CpAtom, CpFormula, Domain, Relation, Target};
use crate::error::ParseError;
use crate::lex::{Cursor, Tok};
use crate::model::{PortRef, Value, ValueType};

/// Named properties, each already expanded to a closed formula.
pub type Definitions = BTreeMap<String, CpFormula>;

const RESERVED: &[&str] = &[
    "and", "or", "not", "forall", "exists", "in", "components", "class", "component", "binding",
    "param", "true", "false",
];

/// Parses a definitions file: one `Name := cp` per line. Later definitions
/// may refer to earlier ones.
pub fn parse_definitions(text: &str) -> Result<Definitions, ParseError> {
    let mut defs = Definitions::new();
    let mut cur = Cursor::new(text)?;
    while !cur.at_end() {
        let pos = cur.position();
        let name = cur.expect_ident("definition name")?;
        if RESERVED.contains(&name.as_str()) {
            return Err(ParseError::new(pos.0, pos.1, format!("`{name}` is a keyword")));
        }
        if defs.contains_key(&name) {
            return Err(ParseError::new(pos.0, pos.1, format!("definition `{name}` given twice")));
        }
        cur.expect_sym(":=")?;
        let f = parse_cp_at(&mut cur, &defs)?;
        defs.insert(name, f);
    }
    Ok(defs)
}

/// Parses one complete formula.
pub fn parse_cp(text: &str, defs: &Definitions) -> Result<CpFormula, ParseError> {
    let mut cur = Cursor::new(text)?;
    let f = parse_cp_at(&mut cur, defs)?;
    if !cur.at_end() {
        return Err(cur.error(format!("unexpected {}", cur.found())));
    }
    Ok(f)
}

pub(crate) fn parse_cp_at(cur: &mut Cursor, defs: &Definitions) -> Result<CpFormula, ParseError> {
    CpParser { cur, defs, scope: Vec::new() }.formula()
}

struct CpParser<'c, 'd> {
    cur: &'c mut Cursor,
    defs: &'d Definitions,
    scope: Vec<String>,
}

impl CpParser<'_, '_> {
    fn formula(&mut self) -> Result<CpFormula, ParseError> {
        let mut f = self.term()?;
        let connective = if self.cur.is_keyword("and") {
            "and"
        } else if self.cur.is_keyword("or") {
            "or"
        } else {
            return Ok(f);
        };
        let other = if connective == "and" { "or" } else { "and" };
        loop {
            if self.cur.is_keyword(other) {
                return Err(self
                    .cur
                    .error(format!("`{connective}` and `{other}` mixed without parentheses")));
            }
            if !self.cur.eat_keyword(connective) {
                return Ok(f);
            }
            let rhs = self.term()?;
            f = if connective == "and" { CpFormula::and(f, rhs) } else { CpFormula::or(f, rhs) };
        }
    }

    fn term(&mut self) -> Result<CpFormula, ParseError> {
        let pos = self.cur.position();
        if self.cur.eat_sym("(") {
            let f = self.formula()?;
            self.cur.expect_sym(")")?;
            return Ok(f);
        }
        let word = match self.cur.peek() {
            Some(Tok::Ident(w)) => w.clone(),
            _ => return Err(self.cur.error(format!("expected a property, found {}", self.cur.found()))),
        };
        self.cur.next();
        match word.as_str() {
            "true" => Ok(CpFormula::Atom(CpAtom::True)),
            "false" => Ok(CpFormula::Atom(CpAtom::False)),
            "not" => Ok(CpFormula::not(self.term()?)),
            "component" => {
                self.cur.expect_sym("(")?;
                let n = self.cur.expect_ident("component name")?;
                self.cur.expect_sym(")")?;
                Ok(CpFormula::Atom(CpAtom::ComponentPresent(n)))
            }
            "binding" => {
                self.cur.expect_sym("(")?;
                let a = self.port_ref()?;
                self.cur.expect_sym(",")?;
                let b = self.port_ref()?;
                self.cur.expect_sym(")")?;
                Ok(CpFormula::Atom(CpAtom::BindingPresent(a, b)))
            }
            "param" => self.param_cmp(),
            "forall" | "exists" => self.quantifier(word == "forall"),
            _ => match self.defs.get(&word) {
                Some(f) => Ok(f.clone()),
                None => Err(ParseError::new(pos.0, pos.1, format!("unknown definition `{word}`"))),
            },
        }
    }

    fn port_ref(&mut self) -> Result<PortRef, ParseError> {
        let c = self.cur.expect_ident("component name")?;
        self.cur.expect_sym(".")?;
        let p = self.cur.expect_ident("port name")?;
        Ok(PortRef::new(c, p))
    }

    fn param_cmp(&mut self) -> Result<CpFormula, ParseError> {
        self.cur.expect_sym("(")?;
        let t = self.cur.expect_ident("component or variable")?;
        self.cur.expect_sym(".")?;
        let param = self.cur.expect_ident("parameter name")?;
        self.cur.expect_sym(")")?;
        let rel_pos = self.cur.position();
        let rel = match self.cur.next() {
            Some(Tok::Sym("=")) => Relation::Eq,
            Some(Tok::Sym("!=")) => Relation::Ne,
            Some(Tok::Sym("<")) => Relation::Lt,
            Some(Tok::Sym("<=")) => Relation::Le,
            Some(Tok::Sym(">")) => Relation::Gt,
            Some(Tok::Sym(">=")) => Relation::Ge,
            _ => return Err(ParseError::new(rel_pos.0, rel_pos.1, "expected a relation")),
        };
        let lit_pos = self.cur.position();
        let value = match self.cur.next() {
            Some(Tok::Int(n)) => Value::Int(n),
            Some(Tok::Str(s)) => Value::Str(s),
            Some(Tok::Ident(w)) if w == "true" => Value::Bool(true),
            Some(Tok::Ident(w)) if w == "false" => Value::Bool(false),
            _ => return Err(ParseError::new(lit_pos.0, lit_pos.1, "expected a literal")),
        };
        if rel.is_ordering() && value.value_type() != ValueType::Int {
            return Err(ParseError::new(
                rel_pos.0,
                rel_pos.1,
                format!("`{}` needs an int literal", rel.symbol()),
            ));
        }
        let target = if self.scope.contains(&t) { Target::Var(t) } else { Target::Component(t) };
        Ok(CpFormula::Atom(CpAtom::ParamCmp { target, param, rel, value }))
    }

    fn quantifier(&mut self, universal: bool) -> Result<CpFormula, ParseError> {
        let var_pos = self.cur.position();
        let var = self.cur.expect_ident("variable")?;
        if RESERVED.contains(&var.as_str()) {
            return Err(ParseError::new(var_pos.0, var_pos.1, format!("`{var}` is a keyword")));
        }
        if self.scope.contains(&var) {
            return Err(ParseError::new(
                var_pos.0,
                var_pos.1,
                format!("variable `{var}` shadows an enclosing binding"),
            ));
        }
        self.cur.expect_keyword("in")?;
        let domain = if self.cur.eat_keyword("components") {
            Domain::AllComponents
        } else if self.cur.eat_keyword("class") {
            self.cur.expect_sym("(")?;
            let k = self.cur.expect_ident("class name")?;
            self.cur.expect_sym(")")?;
            Domain::ComponentsOfClass(k)
        } else {
            return Err(self.cur.error("expected `components` or `class(...)`"));
        };
        self.cur.expect_sym(":")?;
        self.cur.expect_sym("(")?;
        self.scope.push(var.clone());
        let body = self.formula();
        self.scope.pop();
        let body = Box::new(body?);
        self.cur.expect_sym(")")?;
        Ok(if universal {
            CpFormula::Forall { var, domain, body }
        } else {
            CpFormula::Exists { var, domain, body }
        })
    }
}
