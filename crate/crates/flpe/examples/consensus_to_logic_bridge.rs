//! From schedules to assertion sets: find a split execution, encode its
//! outcome as propositional claims, and ask each logic whether the result
//! explodes. A classical reader loses everything; a paraconsistent reader
//! registers the contradiction and keeps reasoning.
//!
//! The second half runs the guarded protocol `p3:mbc`, whose decisions are
//! admitted only if the outcome stays non-trivial in mbc — consensus that
//! tolerates its own failure mode by weakening the logic, not the protocol.

use flpe::logic::{Engine, LogicId};
use flpe::measure::{encode_outcome, profile_of};
use flpe::model::{build_system, CrashPolicy, Value};
use flpe::protocol::protocol_for_key;
use flpe::scheduler::{explore, run, Adversary};

fn main() {
    let values = [Value(0), Value(1), Value(1)];
    let (topology, initial) = build_system(3, &values).expect("valid system");
    let plain = protocol_for_key("p1", 1).expect("known protocol");
    let policy = CrashPolicy::budget(1);

    let exploration = explore(&topology, &initial, plain.as_ref(), &policy, 20, 500_000);
    let split = exploration
        .terminals
        .iter()
        .find(|t| !profile_of(&t.config, &topology).consistency)
        .expect("one crash splits this system");

    let gamma = encode_outcome(&split.config, &topology, &values);
    let shown: Vec<String> = gamma.iter().map(|f| f.to_string()).collect();
    println!("split outcome as assertions: {}", shown.join(", "));

    for logic in [LogicId::Cpl, LogicId::C(1), LogicId::Mbc] {
        let check = Engine::new(logic).explosion_check(&gamma).expect("within closure cap");
        println!(
            "  {:>3}: inconsistent = {}, trivial = {}",
            logic.key(),
            check.inconsistent,
            check.trivial
        );
    }

    let guarded = protocol_for_key("p3:mbc", 1).expect("known protocol");
    let engine = Engine::new(LogicId::Mbc);
    for seed in 0..5 {
        let execution = run(
            &topology,
            initial.clone(),
            guarded.as_ref(),
            &policy,
            &Adversary::seeded(seed),
            200,
        )
        .expect("seeded adversaries always run");
        assert!(!execution.truncated, "guarded runs reach quiescence");
        let outcome = encode_outcome(execution.final_config(), &topology, &values);
        let trivial = engine.trivializes(&outcome).expect("within closure cap");
        println!(
            "p3:mbc seed {seed}: profile {}, outcome trivial in mbc = {trivial}",
            profile_of(execution.final_config(), &topology)
        );
        assert!(!trivial, "the guarded protocol never goes explosive");
    }
}
