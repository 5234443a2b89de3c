//! The explosion staircase: which premise sets trivialize which logics.
//! Classical logic explodes on any contradiction; each calculus in the
//! c1..c8 hierarchy holds out until its own consistency marker is asserted;
//! mbc waits for the explicit operator `o`.

use flpe::logic::{gamma_n, Engine, Entailment, Formula, LogicId};

fn judge(logic: LogicId, gamma: &[Formula]) -> &'static str {
    let trivial = Engine::new(logic).trivializes(gamma).expect("within closure cap");
    if trivial {
        "explodes"
    } else {
        "contained"
    }
}

fn main() {
    let a: Formula = "A".parse().unwrap();
    let contradiction = [a.clone(), a.clone().not()];
    let with_operator = [a.clone(), a.clone().not(), a.clone().circ()];

    println!("{{A, ~A}}:");
    for logic in [LogicId::Cpl, LogicId::C(1), LogicId::C(2), LogicId::Mbc] {
        println!("  {:>3}  {}", logic.key(), judge(logic, &contradiction));
    }

    println!("{{A, ~A, oA}}:");
    for logic in [LogicId::Cpl, LogicId::C(1), LogicId::Mbc] {
        println!("  {:>3}  {}", logic.key(), judge(logic, &with_operator));
    }

    for n in 1..=2 {
        let gamma = gamma_n("A", n);
        let shown: Vec<String> = gamma.iter().map(|f| f.to_string()).collect();
        println!("level-{n} set {{{}}}:", shown.join(", "));
        for logic in [LogicId::C(n), LogicId::C(n + 1)] {
            println!("  {:>3}  {}", logic.key(), judge(logic, &gamma));
        }
    }

    let engine = Engine::new(LogicId::C(1));
    match engine.entails(&contradiction, &"B".parse().unwrap()).unwrap() {
        Entailment::Entails => println!("c1: contradiction entails B (unexpected)"),
        Entailment::Counterexample(v) => {
            println!("c1 counterexample to {{A, ~A}} |- B: {v}");
        }
    }
}
