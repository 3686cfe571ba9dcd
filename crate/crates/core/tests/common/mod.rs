#![allow(dead_code)]

use std::path::PathBuf;

use mrp_core::check::{check, CheckError, CheckOptions, Verdict};
use mrp_core::cp::{parse_definitions, Definitions};
use mrp_core::ftpl::{parse_ftpl, FtplFormula};
use mrp_core::json::{parse_config, parse_ops};
use mrp_core::model::Configuration;
use mrp_core::ops::OpTable;
use mrp_core::oracle::{oracle_check, OracleOptions, OracleVerdict};
use mrp_core::path::{compile, parse_path, Automaton};

pub fn fixture(rel: &str) -> String {
    let p = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(rel);
    std::fs::read_to_string(&p).unwrap_or_else(|e| panic!("{}: {e}", p.display()))
}

pub struct Setup {
    pub config: Configuration,
    pub ops: OpTable,
    pub defs: Definitions,
    pub automaton: Automaton,
}

impl Setup {
    pub fn load(model: &str, ops: &str, path: &str, defs: &str) -> Self {
        let ops = parse_ops(&fixture(ops)).unwrap();
        let automaton = compile(&parse_path(&fixture(path), &ops).unwrap());
        Setup {
            config: parse_config(&fixture(model)).unwrap(),
            ops,
            defs: parse_definitions(&fixture(defs)).unwrap(),
            automaton,
        }
    }

    pub fn httpd(path: &str) -> Self {
        Self::load("httpd/model.json", "httpd/ops.json", path, "httpd/properties.cp")
    }

    pub fn formula(&self, text: &str) -> FtplFormula {
        parse_ftpl(text, &self.ops, &self.defs).unwrap()
    }

    pub fn check(&self, text: &str, opts: &CheckOptions) -> Result<Verdict, CheckError> {
        check(&self.formula(text), &self.automaton, &self.config, &self.ops, opts)
    }

    pub fn oracle(&self, text: &str, depth: usize) -> OracleVerdict {
        oracle_check(&self.formula(text), &self.automaton, &self.config, &self.ops, &OracleOptions::new(depth)).unwrap()
    }

    pub fn replay(&self, ops: &[String]) -> Configuration {
        ops.iter().fold(self.config.clone(), |c, op| self.ops.apply(&c, op))
    }
}
