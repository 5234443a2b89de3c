//! Cover the suspect process with a failure oracle and watch the split
//! vanish at ground level — then reappear when the oracle itself may crash.
//! Iterating the construction (an oracle for the oracle) moves the failure
//! up again: suppression is real, disappearance is not.

use std::collections::BTreeSet;

use flpe::measure::{check_emergence, EmergenceInputs, Transform};
use flpe::model::{ProcessId, SystemTopology, Value};
use flpe::report::emergence_verdict;

fn main() {
    let values = [Value(0), Value(1), Value(1)];
    let known_faulty: BTreeSet<ProcessId> = [ProcessId(0)].into_iter().collect();

    for depth in 0..=1 {
        let topology = SystemTopology::complete(3)
            .expect("valid system")
            .with_layers(&known_faulty, depth)
            .expect("suspects exist");
        let inputs = EmergenceInputs {
            topology: &topology,
            values: &values,
            protocol_key: "p1-oracle",
            quorum: 1,
            known_faulty: &known_faulty,
            budget: 1,
            depth_bound: 24,
            state_cap: 2_000_000,
        };
        let report = check_emergence(&inputs, Transform::AddOracle).expect("baseline splits");
        println!(
            "{} oracle layer(s): baseline splits at g = {}, suppressed = {}, {}",
            depth,
            report.baseline.at,
            report.suppressed,
            emergence_verdict(&report)
        );
    }
}
