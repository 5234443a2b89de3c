//! Padding the protocol with self-addressed dummy messages does not repair
//! the consistency split — it only postpones it. Map the shortest split
//! schedule onto its padded counterpart and compare where the split lands.

use flpe::measure::{first_inconsistent_index, padded_correspondence, profile_of, decisions};
use flpe::model::{build_system, CrashPolicy, Value};
use flpe::protocol::protocol_for_key;
use flpe::scheduler::{explore, replay};

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
    let witness = exploration.witness(&split.digest).expect("terminals have witnesses");

    let base = replay(&topology, initial.clone(), plain.as_ref(), &policy, &witness)
        .expect("witness replays");
    let base_split = first_inconsistent_index(&base).expect("witness splits");

    for k in 1..=3 {
        let padded = protocol_for_key(&format!("p1-padded:{k}"), 1).expect("known protocol");
        let events =
            padded_correspondence(&topology, &initial, padded.as_ref(), &policy, &witness, k)
                .expect("correspondence holds");
        let run = replay(&topology, initial.clone(), padded.as_ref(), &policy, &events)
            .expect("padded schedule replays");
        let padded_split = first_inconsistent_index(&run).expect("split survives padding");

        assert_eq!(
            decisions(base.final_config(), &topology),
            decisions(run.final_config(), &topology),
            "padding must not change any decision"
        );
        println!(
            "k = {k}: split at step {padded_split} instead of {base_split} (+{}), same decisions",
            padded_split - base_split
        );
    }
}
