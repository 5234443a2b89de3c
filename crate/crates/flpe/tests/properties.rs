//! Randomized invariants: whatever the seed, runs stay deterministic,
//! decisions stay grounded and irrevocable, padding stays invisible to
//! outcomes, and the solver keeps agreeing with the truth table.

use proptest::prelude::*;

use flpe::logic::{truth_table, Engine, Formula, LogicId};
use flpe::measure::{decisions, padded_correspondence, profile_of};
use flpe::model::{build_system, CrashPolicy, Value};
use flpe::protocol::protocol_for_key;
use flpe::scheduler::{replay, run, Adversary};
use flpe::trace::{parse_trace, render_trace, TraceMeta};

fn values_strategy() -> impl Strategy<Value = Vec<Value>> {
    proptest::collection::vec((0u8..=2).prop_map(Value), 3..=4)
}

fn formula_strategy() -> impl Strategy<Value = Formula> {
    let leaf = prop_oneof![
        Just(Formula::atom("A")),
        Just(Formula::atom("B")),
        Just(Formula::atom("C")),
    ];
    leaf.prop_recursive(3, 24, 2, |inner| {
        prop_oneof![
            inner.clone().prop_map(Formula::not),
            inner.clone().prop_map(Formula::circ),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| a.and(b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| a.or(b)),
            (inner.clone(), inner).prop_map(|(a, b)| a.imp(b)),
        ]
    })
}

/// Circ-free variant for comparisons against the classical truth table.
fn classical_formula_strategy() -> impl Strategy<Value = Formula> {
    let leaf = prop_oneof![
        Just(Formula::atom("A")),
        Just(Formula::atom("B")),
        Just(Formula::atom("C")),
    ];
    leaf.prop_recursive(3, 24, 2, |inner| {
        prop_oneof![
            inner.clone().prop_map(Formula::not),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| a.and(b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| a.or(b)),
            (inner.clone(), inner).prop_map(|(a, b)| a.imp(b)),
        ]
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn same_seed_same_execution(seed in any::<u64>(), values in values_strategy(), budget in 0usize..=1) {
        let (topology, initial) = build_system(values.len(), &values).unwrap();
        let protocol = protocol_for_key("p1", 1).unwrap();
        let policy = CrashPolicy::budget(budget);
        let adversary = Adversary::seeded(seed);
        let a = run(&topology, initial.clone(), protocol.as_ref(), &policy, &adversary, 300).unwrap();
        let b = run(&topology, initial, protocol.as_ref(), &policy, &adversary, 300).unwrap();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn decisions_are_grounded_and_irrevocable(seed in any::<u64>(), values in values_strategy()) {
        let (topology, initial) = build_system(values.len(), &values).unwrap();
        let protocol = protocol_for_key("p1", 1).unwrap();
        let policy = CrashPolicy::budget(1);
        let execution =
            run(&topology, initial, protocol.as_ref(), &policy, &Adversary::seeded(seed), 300)
                .unwrap();
        prop_assert!(!execution.truncated);

        let mut last: Vec<Option<Value>> = vec![None; values.len()];
        for config in execution.configurations() {
            for (i, slot) in last.iter_mut().enumerate() {
                let now = config.states[i].output;
                if let Some(v) = *slot {
                    prop_assert_eq!(now, Some(v), "p{} un-decided or flipped", i);
                }
                if let Some(v) = now {
                    prop_assert!(values.contains(&v), "p{} decided a value nobody proposed", i);
                }
                *slot = now;
            }
        }
    }

    #[test]
    fn recorded_schedules_replay_exactly(seed in any::<u64>(), values in values_strategy()) {
        let (topology, initial) = build_system(values.len(), &values).unwrap();
        let protocol = protocol_for_key("p1", 1).unwrap();
        let policy = CrashPolicy::budget(1);
        let execution = run(
            &topology,
            initial.clone(),
            protocol.as_ref(),
            &policy,
            &Adversary::seeded(seed),
            300,
        )
        .unwrap();
        let events: Vec<_> = execution.events().copied().collect();
        let replayed = replay(&topology, initial, protocol.as_ref(), &policy, &events).unwrap();
        prop_assert_eq!(
            replayed.final_config().digest(),
            execution.final_config().digest()
        );
    }

    #[test]
    fn padding_never_changes_the_outcome(seed in any::<u64>(), k in 1u32..=2) {
        let values = [Value(0), Value(1), Value(1)];
        let (topology, initial) = build_system(3, &values).unwrap();
        let plain = protocol_for_key("p1", 1).unwrap();
        let policy = CrashPolicy::budget(1);
        let base = run(
            &topology,
            initial.clone(),
            plain.as_ref(),
            &policy,
            &Adversary::seeded(seed),
            300,
        )
        .unwrap();
        let events: Vec<_> = base.events().copied().collect();

        let padded = protocol_for_key(&format!("p1-padded:{k}"), 1).unwrap();
        let mapped =
            padded_correspondence(&topology, &initial, padded.as_ref(), &policy, &events, k)
                .unwrap();
        // k dummies appear behind every start; a process crashed before its
        // start never gets to mail its padding.
        let starts =
            events.iter().filter(|e| matches!(e, flpe::model::Event::Start(_))).count();
        prop_assert_eq!(mapped.len(), events.len() + starts * k as usize);
        let padded_run =
            replay(&topology, initial, padded.as_ref(), &policy, &mapped).unwrap();

        prop_assert_eq!(
            decisions(base.final_config(), &topology),
            decisions(padded_run.final_config(), &topology)
        );
        prop_assert_eq!(
            profile_of(base.final_config(), &topology),
            profile_of(padded_run.final_config(), &topology)
        );
    }

    #[test]
    fn traces_round_trip_bytewise(seed in any::<u64>()) {
        let values = [Value(0), Value(1), Value(1)];
        let (topology, initial) = build_system(3, &values).unwrap();
        let protocol = protocol_for_key("p1", 1).unwrap();
        let policy = CrashPolicy::budget(1);
        let execution =
            run(&topology, initial, protocol.as_ref(), &policy, &Adversary::seeded(seed), 300)
                .unwrap();
        let meta = TraceMeta {
            scenario: "property".into(),
            seed,
            step_bound: 300,
            depth_bound: 24,
            crash_budget: 1,
            processes: 3,
            values: values.to_vec(),
            protocol: "p1".into(),
            known_faulty: Default::default(),
            oracle_depth: 0,
            quorum: 1,
        };
        let rendered = render_trace(&meta, &execution);
        let trace = parse_trace(&rendered).unwrap();
        prop_assert_eq!(render_trace(&trace.meta, &trace.replay().unwrap()), rendered);
    }

    #[test]
    fn formula_text_round_trips(f in formula_strategy()) {
        let reparsed: Formula = f.to_string().parse().unwrap();
        prop_assert_eq!(reparsed, f);
    }

    #[test]
    fn cpl_agrees_with_the_truth_table(
        gamma in proptest::collection::vec(classical_formula_strategy(), 0..=2),
        goal in classical_formula_strategy(),
    ) {
        let engine = Engine::new(LogicId::Cpl);
        prop_assert_eq!(
            engine.entails(&gamma, &goal).unwrap().holds(),
            truth_table::entails(&gamma, &goal)
        );
    }
}
