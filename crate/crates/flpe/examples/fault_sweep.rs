//! Sweep the crash budget and watch the property profiles change: totality
//! below the threshold, a consistency split at it. The detected transition
//! is the phase boundary the rest of the toolkit revolves around.

use flpe::measure::{detect_transition, sweep, SweptFeature};
use flpe::model::{build_system, Value};
use flpe::protocol::protocol_for_key;

fn main() {
    let values = [Value(0), Value(1), Value(1)];
    let (topology, _) = build_system(3, &values).expect("valid system");
    let protocol = protocol_for_key("p1", 1).expect("known protocol");

    let swept = sweep(&topology, &values, protocol.as_ref(), SweptFeature::FaultCount, 2, 20, 500_000)
        .expect("sweep within caps");

    for row in &swept.rows {
        let profiles: Vec<String> = row.profiles.iter().map(|p| p.to_string()).collect();
        println!(
            "g = {}: profiles {} ({} states visited)",
            row.feature_value,
            profiles.join(" "),
            row.visited
        );
    }

    match detect_transition(&swept) {
        Some(t) => println!("transition at g = {}: {} appears", t.at, t.after_profile),
        None => println!("no transition in range"),
    }
}
