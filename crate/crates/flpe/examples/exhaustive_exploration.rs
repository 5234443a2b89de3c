//! Enumerate every schedule of the 0,1,1 system, first without faults and
//! then with one crash allowed. Fault-free, every terminal satisfies all
//! three properties; with one crash, shortest witnesses of the consistency
//! split appear.

use flpe::measure::profile_of;
use flpe::model::{build_system, CrashPolicy, Value};
use flpe::protocol::protocol_for_key;
use flpe::scheduler::explore;

fn main() {
    let values = [Value(0), Value(1), Value(1)];
    let (topology, initial) = build_system(3, &values).expect("valid system");
    let protocol = protocol_for_key("p1", 1).expect("known protocol");

    for budget in 0..=1 {
        let policy = CrashPolicy::budget(budget);
        let exploration = explore(&topology, &initial, protocol.as_ref(), &policy, 20, 500_000);
        let profiles: std::collections::BTreeSet<_> = exploration
            .terminals
            .iter()
            .map(|t| profile_of(&t.config, &topology).to_string())
            .collect();
        println!(
            "budget {budget}: visited {} configurations, {} terminals, profiles {:?}",
            exploration.visited,
            exploration.terminals.len(),
            profiles
        );

        if let Some(split) = exploration
            .terminals
            .iter()
            .find(|t| !profile_of(&t.config, &topology).consistency)
        {
            let witness = exploration.witness(&split.digest).expect("terminals have witnesses");
            println!("shortest split witness ({} events):", witness.len());
            for event in &witness {
                println!("  {event}");
            }
        }
    }
}
