mod common;

use common::{fixture, Setup};
use mrp_core::check::{CheckError, CheckOptions, Engine, Rejection, Violation, WarningCode};
use mrp_core::ftpl::{Event, Termination};
use mrp_core::oracle::enumerate_prefixes;

const HTTPD_FORMULAS: [&str; 7] = [
    "after-add",
    "always-cache",
    "after-remove",
    "before-add",
    "always-receiver",
    "eventually-server",
    "after-add-sized",
];

#[test]
fn after_add_holds() {
    let s = Setup::httpd("httpd/tuning.rpx");
    let v = s.check(&fixture("httpd/after-add.ftpl"), &CheckOptions::default()).unwrap();
    assert!(v.value);
    assert!(v.counterexample.is_none());
}

#[test]
fn always_cache_fails_with_replayable_trace() {
    let s = Setup::httpd("httpd/tuning.rpx");
    let v = s.check(&fixture("httpd/always-cache.ftpl"), &CheckOptions::default()).unwrap();
    assert!(!v.value);
    let cex = v.counterexample.unwrap();
    let ops: Vec<String> = cex.steps.iter().map(|s| s.op.clone()).collect();
    assert_eq!(ops, ["run", "RemoveCacheHandler"]);
    assert_eq!(s.replay(&ops), cex.configuration);
    assert_eq!(cex.violation, Violation::Property);
    assert!(!s.formula("always CacheConnected").trace().cp().eval(&cex.configuration));
}

#[test]
fn after_remove_fails() {
    let s = Setup::httpd("httpd/tuning.rpx");
    let v = s.check(&fixture("httpd/after-remove.ftpl"), &CheckOptions::default()).unwrap();
    assert!(!v.value);
}

#[test]
fn checker_agrees_with_oracle_on_httpd() {
    for path in ["httpd/tuning.rpx", "httpd/tuning-loop.rpx"] {
        let s = Setup::httpd(path);
        for name in HTTPD_FORMULAS {
            let text = fixture(&format!("httpd/{name}.ftpl"));
            for opts in [CheckOptions::default(), CheckOptions { marks: mrp_core::check::MarkSharing::Shared, ..Default::default() }] {
                let v = s.check(&text, &opts).unwrap();
                let o = s.oracle(&text, 12);
                assert_eq!(v.value, o.value, "{path} {name}");
            }
        }
    }
}

#[test]
fn counterexamples_replay() {
    let s = Setup::httpd("httpd/tuning-loop.rpx");
    for name in HTTPD_FORMULAS {
        let v = s.check(&fixture(&format!("httpd/{name}.ftpl")), &CheckOptions::default()).unwrap();
        if let Some(cex) = v.counterexample {
            let ops: Vec<String> = cex.steps.iter().map(|s| s.op.clone()).collect();
            assert!(s.automaton.accepts(&ops), "{name}");
            assert_eq!(s.replay(&ops), cex.configuration, "{name}");
        }
    }
}

#[test]
fn not_flat_formula_is_rejected() {
    let s = Setup::httpd("httpd/tuning.rpx");
    let err = s.check(&fixture("httpd/not-flat.ftpl"), &CheckOptions::default()).unwrap_err();
    assert!(matches!(err, CheckError::Rejected(Rejection::NotCpFlat(_))));
}

#[test]
fn cp_gate_rejects_disjunction_but_checks_flat() {
    let s = Setup::load("cp-gate/model.json", "cp-gate/ops.json", "cp-gate/path.rpx", "cp-gate/properties.cp");
    let text = fixture("cp-gate/either.ftpl");
    let err = s.check(&text, &CheckOptions::default()).unwrap_err();
    assert!(matches!(err, CheckError::Rejected(Rejection::NotCpFlat(_))));
    // The oracle still has a verdict for it, and it is false: after op1 op2
    // neither disjunct holds.
    assert!(!s.oracle(&text, 4).value);
    let flat = fixture("cp-gate/flat.ftpl");
    let v = s.check(&flat, &CheckOptions::default()).unwrap();
    assert_eq!(v.value, s.oracle(&flat, 4).value);
}

#[test]
fn shared_continuation_is_caught_by_the_guard() {
    let s = Setup::load(
        "shared-continuation/model.json",
        "shared-continuation/ops.json",
        "shared-continuation/path.rpx",
        "shared-continuation/properties.cp",
    );
    let text = fixture("shared-continuation/bounded.ftpl");
    let v = s.check(&text, &CheckOptions::default()).unwrap();
    assert!(v.marking_verdict, "the literal marking pass accepts");
    assert!(!v.value);
    assert_eq!(v.engine, Engine::Exact);
    assert!(v.warnings.iter().any(|w| w.code == WarningCode::MarkingDivergence));
    assert!(!s.oracle(&text, 4).value);
    let cex = v.counterexample.unwrap();
    let ops: Vec<String> = cex.steps.iter().map(|s| s.op.clone()).collect();
    assert_eq!(ops, ["op1", "op2"]);
}

#[test]
fn growing_cycle_warns_and_strict_rejects() {
    let s = Setup::load("httpd/model.json", "growing/ops.json", "growing/path.rpx", "growing/properties.cp");
    let text = fixture("growing/cache-present.ftpl");
    let v = s.check(&text, &CheckOptions::default()).unwrap();
    assert!(v.value);
    assert!(v.warnings.iter().any(|w| w.code == WarningCode::NonIdempotentCycle));
    assert!(v.warnings.iter().any(|w| w.code == WarningCode::CycleOpNotIdempotent));
    let strict = CheckOptions { strict: true, ..Default::default() };
    let err = s.check(&text, &strict).unwrap_err();
    assert!(matches!(err, CheckError::Rejected(Rejection::UnsoundCycle(_))));
}

#[test]
fn normal_and_exceptional_events() {
    let s = Setup::httpd("httpd/events.rpx");
    let paths = enumerate_prefixes(&s.automaton, &s.config, &s.ops, 8, 1000).unwrap();
    let full = paths.iter().max_by_key(|p| p.len()).unwrap();
    assert_eq!(full.ops, ["run", "RemoveCacheHandler", "AddCacheHandler", "AddCacheHandler"]);
    let hits = |t| {
        let e = Event::new("AddCacheHandler", t);
        (1..=full.len())
            .filter(|&i| e.matches(&full.ops[i - 1], &full.configs[i - 1], &full.configs[i]))
            .collect::<Vec<_>>()
    };
    assert_eq!(hits(Termination::Normal), [3]);
    assert_eq!(hits(Termination::Exceptional), [4]);
    let text = fixture("httpd/events-normal.ftpl");
    let v = s.check(&text, &CheckOptions::default()).unwrap();
    assert!(v.value);
    assert_eq!(v.value, s.oracle(&text, 8).value);
}
