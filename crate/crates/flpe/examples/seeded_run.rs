//! One seeded execution: three processes propose 0,1,1, one may crash, and
//! a pseudo-random adversary picks the schedule. The same seed always yields
//! the same run — shown here by replaying the schedule and comparing digests.

use flpe::model::{build_system, CrashPolicy, Value};
use flpe::protocol::protocol_for_key;
use flpe::scheduler::{replay, run, Adversary};

fn main() {
    let values = [Value(0), Value(1), Value(1)];
    let (topology, initial) = build_system(3, &values).expect("valid system");
    let protocol = protocol_for_key("p1", 1).expect("known protocol");
    let policy = CrashPolicy::budget(1);

    let execution = run(
        &topology,
        initial.clone(),
        protocol.as_ref(),
        &policy,
        &Adversary::seeded(7),
        200,
    )
    .expect("seeded adversaries always run");

    println!("seed 7, {} steps:", execution.len());
    let mut previous = &execution.initial;
    for (step, (event, config)) in execution.steps.iter().enumerate() {
        print!("  {step:>2}  {event}");
        for state in &config.states {
            if state.output.is_some() && previous.state(state.id).output.is_none() {
                print!("    -> {} decides {}", state.id, state.output.unwrap());
            }
        }
        println!();
        previous = config;
    }

    let final_digest = execution.final_config().digest();
    println!("final digest: {final_digest}");

    let events: Vec<_> = execution.events().copied().collect();
    let replayed = replay(&topology, initial, protocol.as_ref(), &policy, &events)
        .expect("a recorded schedule replays");
    assert_eq!(replayed.final_config().digest(), final_digest);
    println!("replay reaches the same digest: determinism holds");
}
