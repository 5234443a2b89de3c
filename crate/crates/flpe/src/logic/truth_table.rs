//! Brute-force classical oracle: entailment by full truth-table
//! enumeration.
//!
//! This module is deliberately naive — a direct recursive evaluator and a
//! `2^n` loop over atom assignments, sharing no code with the bivaluation
//! search engine. It exists to be the independent referee the engine's
//! classical mode is checked against: if the two ever disagree on a
//! `o`-free instance, the engine is wrong.
//!
//! The consistency operator is read classically: a claim that a formula is
//! consistent is vacuously true when negation is classical, so `oF`
//! evaluates to true outright.

use std::collections::BTreeSet;

use super::formula::Formula;

/// Evaluate under a classical assignment of the atoms. Atoms missing from
/// `assignment` read as false.
pub fn eval(formula: &Formula, assignment: &BTreeSet<String>) -> bool {
    match formula {
        Formula::Atom(name) => assignment.contains(name),
        Formula::Not(f) => !eval(f, assignment),
        Formula::Circ(_) => true,
        Formula::And(a, b) => eval(a, assignment) && eval(b, assignment),
        Formula::Or(a, b) => eval(a, assignment) || eval(b, assignment),
        Formula::Imp(a, b) => !eval(a, assignment) || eval(b, assignment),
    }
}

fn collect_atoms(gamma: &[Formula], goal: Option<&Formula>) -> Vec<String> {
    let mut atoms = BTreeSet::new();
    for f in gamma {
        atoms.extend(f.atoms());
    }
    if let Some(goal) = goal {
        atoms.extend(goal.atoms());
    }
    atoms.into_iter().collect()
}

fn assignments(atoms: &[String]) -> impl Iterator<Item = BTreeSet<String>> + '_ {
    assert!(atoms.len() < 24, "truth table over {} atoms is not a sane oracle", atoms.len());
    (0u32..(1 << atoms.len())).map(move |mask| {
        atoms
            .iter()
            .enumerate()
            .filter(|(i, _)| mask & (1 << i) != 0)
            .map(|(_, a)| a.clone())
            .collect()
    })
}

/// Classical entailment: every assignment satisfying all of `gamma`
/// satisfies `goal`.
pub fn entails(gamma: &[Formula], goal: &Formula) -> bool {
    let atoms = collect_atoms(gamma, Some(goal));
    let holds = assignments(&atoms)
        .filter(|a| gamma.iter().all(|f| eval(f, a)))
        .all(|a| eval(goal, &a));
    holds
}

/// No assignment satisfies all of `gamma`; classically that is the same as
/// `gamma` entailing everything.
pub fn unsatisfiable(gamma: &[Formula]) -> bool {
    let atoms = collect_atoms(gamma, None);
    let satisfiable = assignments(&atoms).any(|a| gamma.iter().all(|f| eval(f, &a)));
    !satisfiable
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f(s: &str) -> Formula {
        s.parse().unwrap()
    }

    #[test]
    fn modus_ponens_holds() {
        assert!(entails(&[f("A"), f("A -> B")], &f("B")));
    }

    #[test]
    fn affirming_the_consequent_does_not() {
        assert!(!entails(&[f("B"), f("A -> B")], &f("A")));
    }

    #[test]
    fn tautologies_follow_from_nothing() {
        assert!(entails(&[], &f("A | ~A")));
        assert!(entails(&[], &f("A -> A")));
        assert!(!entails(&[], &f("A")));
    }

    #[test]
    fn contradictions_entail_anything() {
        assert!(unsatisfiable(&[f("A"), f("~A")]));
        assert!(entails(&[f("A"), f("~A")], &f("Q")));
        assert!(!unsatisfiable(&[f("A"), f("~B")]));
    }

    #[test]
    fn consistency_claims_are_classically_vacuous() {
        assert!(entails(&[], &f("oA")));
        assert!(entails(&[f("A"), f("oA -> B")], &f("B")));
    }

    #[test]
    fn empty_premises_over_shared_atoms() {
        // De Morgan, as a spot check of the evaluator itself.
        assert!(entails(&[f("~(A & B)")], &f("~A | ~B")));
        assert!(entails(&[f("~A | ~B")], &f("~(A & B)")));
    }
}
