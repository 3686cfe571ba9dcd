use mrp_core::check::{check, check_observed, CheckObserver, CheckOptions, MarkSharing, Mark};
use mrp_core::cp::CpFormula;
use mrp_core::ftpl::{Event, FtplFormula, Termination};
use mrp_core::generate::{self, rng, Head, Instance, HEADS};
use mrp_core::oracle::{enumerate_prefixes, eval_on_path, oracle_check, Ending, EvolutionPath, OracleOptions};
use mrp_core::ops::OpTable;
use mrp_core::path::StateId;
use mrp_core::Error;
use proptest::prelude::*;
use rand::Rng;

fn oracle_opts(i: &Instance) -> OracleOptions {
    OracleOptions::new(2 * i.automaton.state_count())
}

/// Returns `None` when the oracle gives up on the path count.
fn differential(seed: u64, head: Head) -> Option<(bool, bool)> {
    let i = generate::instance(&mut rng(seed), head);
    let v = check(&i.formula, &i.automaton, &i.config, &i.ops, &CheckOptions::default()).unwrap();
    match oracle_check(&i.formula, &i.automaton, &i.config, &i.ops, &oracle_opts(&i)) {
        Ok(o) => Some((v.value, o.value)),
        Err(Error::ResourceCap { .. }) => None,
        Err(e) => panic!("{e}"),
    }
}

#[test]
fn checker_agrees_with_oracle() {
    let mut skipped = 0;
    for seed in 0..150u64 {
        for head in HEADS {
            match differential(seed, head) {
                Some((checker, oracle)) => {
                    let i = generate::instance(&mut rng(seed), head);
                    assert_eq!(checker, oracle, "seed {seed} {head:?}: {} on {}", i.formula, i.path);
                }
                None => skipped += 1,
            }
        }
    }
    assert!(skipped < 10, "{skipped} instances exceeded the oracle cap");
}

#[test]
fn shared_marks_agree_with_oracle() {
    for seed in 1000..1100u64 {
        for head in HEADS {
            let i = generate::instance(&mut rng(seed), head);
            let opts = CheckOptions { marks: MarkSharing::Shared, ..Default::default() };
            let v = check(&i.formula, &i.automaton, &i.config, &i.ops, &opts).unwrap();
            if let Ok(o) = oracle_check(&i.formula, &i.automaton, &i.config, &i.ops, &oracle_opts(&i)) {
                assert_eq!(v.value, o.value, "seed {seed} {head:?}");
            }
        }
    }
}

fn cyclic(seed: u64, states: usize, idempotent: bool) -> (Instance, Vec<String>) {
    let mut r = rng(seed);
    let count = 4;
    let names = generate::op_names(count);
    let automaton = generate::automaton(&mut r, states, &names, states);
    let ops = OpTable::from_ops(generate::named_ops(&mut r, count, idempotent)).unwrap();
    let config = generate::config(&mut r, 8);
    let path = mrp_core::path::PathExpr::op("run");
    let head = HEADS[r.gen_range(0..4)];
    let formula = generate::ftpl(&mut r, head, &names, 2);
    (Instance { config, ops, path, automaton, formula }, names)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn fresh_marks_respect_per_state_bounds(seed in any::<u64>(), states in 1usize..=200, idem in any::<bool>()) {
        let (i, _) = cyclic(seed, states, idem);
        let v = check(&i.formula, &i.automaton, &i.config, &i.ops, &CheckOptions::default()).unwrap();
        for inst in &v.stats.instances {
            prop_assert_eq!(inst.bodies.len(), states);
            prop_assert!(inst.max_per_state() <= inst.bound(), "{:?}", inst);
        }
    }

    #[test]
    fn after_always_is_linear_with_shared_marks(seed in any::<u64>(), states in 1usize..=200) {
        let (i, names) = cyclic(seed, states, true);
        let mut r = rng(seed ^ 0x5eed);
        let e = Event::new(&names[r.gen_range(0..names.len())], Termination::Terminates);
        let f = FtplFormula::after(e, FtplFormula::always(generate::cp_flat(&mut r, 2)));
        let opts = CheckOptions { marks: MarkSharing::Shared, ..Default::default() };
        let v = check(&f, &i.automaton, &i.config, &i.ops, &opts).unwrap();
        let bound = 2 * states as u64 + i.automaton.transitions().len() as u64;
        prop_assert!(v.stats.marking_total() <= bound, "{} > {}", v.stats.marking_total(), bound);
        prop_assert!(v.stats.within_bounds());
    }

    #[test]
    fn vacuous_events(seed in any::<u64>()) {
        let i = generate::instance(&mut rng(seed), Head::Always);
        let alphabet = i.automaton.alphabet().into_iter().map(String::from).collect::<Vec<_>>();
        let Some(unused) = i.ops.names().find(|n| !alphabet.iter().any(|a| a == n)).map(String::from) else {
            return Ok(());
        };
        let cp = CpFormula::Atom(mrp_core::cp::CpAtom::False);
        for t in [Termination::Normal, Termination::Exceptional, Termination::Terminates] {
            for f in [
                FtplFormula::after(Event::new(&unused, t), FtplFormula::always(cp.clone())),
                FtplFormula::Before(Event::new(&unused, t), mrp_core::ftpl::TraceFormula::Always(cp.clone())),
            ] {
                prop_assert!(check(&f, &i.automaton, &i.config, &i.ops, &CheckOptions::default()).unwrap().value);
            }
        }
    }
}

/// Asserts that every state on the chain into an `after` body is marked
/// `again`.
#[derive(Default)]
struct ChainInvariant {
    entries: usize,
    broken: Vec<String>,
}

impl CheckObserver for ChainInvariant {
    fn after_entry(&mut self, q: StateId, chain: &[StateId], marks: &[Mark]) {
        self.entries += 1;
        if chain.last() != Some(&q) {
            self.broken.push(format!("chain {chain:?} does not end at {q}"));
        }
        for s in chain {
            if marks[s.0] != Mark::Again {
                self.broken.push(format!("{s} on the chain to {q} is {:?}", marks[s.0]));
            }
        }
    }
}

#[test]
fn chain_states_are_marked_again() {
    let mut entries = 0;
    for seed in 0..300u64 {
        let (i, _) = cyclic(seed, 2 + (seed as usize % 60), seed % 2 == 0);
        let f = generate::ftpl(&mut rng(seed), Head::After, &generate::op_names(4), 2);
        let mut obs = ChainInvariant::default();
        check_observed(&f, &i.automaton, &i.config, &i.ops, &CheckOptions::default(), &mut obs).unwrap();
        assert!(obs.broken.is_empty(), "seed {seed}: {:?}", obs.broken);
        entries += obs.entries;
    }
    assert!(entries > 300);
}

fn prefix(p: &EvolutionPath, n: usize) -> EvolutionPath {
    EvolutionPath {
        ops: p.ops[..n].to_vec(),
        states: p.states[..=n].to_vec(),
        configs: p.configs[..=n].to_vec(),
        ending: Ending::Truncated,
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn monotone_formulas_hold_on_prefixes(seed in any::<u64>(), head in 0usize..3) {
        let i = generate::instance(&mut rng(seed), [Head::After, Head::Before, Head::Always][head]);
        prop_assume!(i.formula.is_prefix_monotone());
        let paths = enumerate_prefixes(&i.automaton, &i.config, &i.ops, 6, 20_000).unwrap();
        for p in paths.iter().filter(|p| eval_on_path(&i.formula, p)) {
            for n in 0..p.len() {
                prop_assert!(eval_on_path(&i.formula, &prefix(p, n)), "{} on {:?}", i.formula, p.ops);
            }
        }
    }

    #[test]
    fn paranoid_oracle_matches_pruned(seed in any::<u64>(), head in 0usize..4) {
        let i = generate::instance(&mut rng(seed), HEADS[head]);
        let depth = i.automaton.state_count().min(6);
        let fast = oracle_check(&i.formula, &i.automaton, &i.config, &i.ops, &OracleOptions::new(depth));
        let slow = oracle_check(&i.formula, &i.automaton, &i.config, &i.ops, &OracleOptions { paranoid: true, ..OracleOptions::new(depth) });
        if let (Ok(a), Ok(b)) = (fast, slow) {
            prop_assert_eq!(a.value, b.value);
        }
    }

    /// Laps of a cycle built from idempotent operations settle once every
    /// operation has had a lap in which the earlier ones took effect.
    #[test]
    fn idempotent_cycles_stabilise(seed in any::<u64>(), len in 1usize..=4) {
        let mut r = rng(seed);
        let ops = OpTable::from_ops(generate::named_ops(&mut r, len, true)).unwrap();
        let word: Vec<String> = (0..len).map(|k| format!("op{k}")).collect();
        let lap = |c: &mrp_core::model::Configuration| word.iter().fold(c.clone(), |acc, o| ops.apply(&acc, o));
        let mut c = generate::config(&mut r, 8);
        let mut laps = vec![c.clone()];
        for _ in 0..=len + 1 {
            c = lap(&c);
            laps.push(c);
            c = laps.last().unwrap().clone();
        }
        let settled = (1..laps.len() - 1).find(|&k| laps[k] == laps[k + 1]);
        prop_assert!(settled.is_some(), "never settles within {} laps", len + 1);
    }
}

#[test]
fn idempotent_cycle_can_need_a_second_lap() {
    use mrp_core::json::{parse_config, parse_ops};
    let c0 = parse_config(
        r#"{"components":[{"name":"X","class":"K","outputs":[{"name":"out","type":"T"}]}]}"#,
    )
    .unwrap();
    let ops = parse_ops(
        r#"{"operations":[
        {"name":"Bind","steps":[{"kind":"add-binding","from":{"component":"X","port":"out"},"to":{"component":"Y","port":"in"}}]},
        {"name":"AddY","steps":[{"kind":"add-component","component":{"name":"Y","class":"K","inputs":[{"name":"in","type":"T"}]}}]}]}"#,
    )
    .unwrap();
    let lap = |c: &mrp_core::model::Configuration| ops.apply(&ops.apply(c, "Bind"), "AddY");
    let c1 = lap(&c0);
    let c2 = lap(&c1);
    assert!(c1.bindings.is_empty());
    assert_ne!(c1, c2, "the first lap does not settle the cycle");
    assert_eq!(lap(&c2), c2);
}
