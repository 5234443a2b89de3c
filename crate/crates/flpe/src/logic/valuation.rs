//! Bivaluation search over a finite closure fragment.
//!
//! A bivaluation maps formulas to {0,1} directly — no recursive truth
//! definition for negation. Which maps count as admissible is what
//! distinguishes the logics:
//!
//!  - classical: `v(~F) = 1 - v(F)`, `v(oF) = 1`
//!  - `mbc`: `v(F)=0 ⇒ v(~F)=1` (never both false), and a consistency
//!    claim that holds forbids both `F` and `~F` being true; `~` and `o`
//!    are otherwise unconstrained
//!  - `c<n>`: the `mbc` negation floor, plus `v(~~F)=1 ⇒ v(F)=1`, plus:
//!    wherever the fragment contains the n-th consistency annotation of a
//!    formula and it holds, that formula's negation behaves classically;
//!    annotations propagate across binary connectives. `oF` is not
//!    primitive here — it is rewritten to `~(F & ~F)` before evaluation.
//!
//! The search assigns formulas in subformula order (size, then structure),
//! so children always precede parents: binary connectives are computed, not
//! guessed, and the only branch points are negations of true formulas, free
//! consistency claims, and atoms. Clause instances are checked the moment
//! their last mentioned formula is assigned, so a completed assignment is
//! admissible by construction.
//!
//! Everything is judged inside the fragment: a clause constrains the search
//! only when every formula it mentions is present. Enlarging the fragment
//! (`closure_rounds`) can only restate constraints on formulas whose truth
//! is already free to absorb them, which is why verdicts are stable under
//! growth.

use std::collections::{BTreeMap, BTreeSet};

use super::formula::Formula;
use super::{annotation, marker, LogicError, LogicId};

pub(crate) struct Fragment {
    pub formulas: Vec<Formula>,
    /// Indices of the premise formulas (post-rewrite for `c<n>`).
    pub members: Vec<usize>,
    /// Index of the goal formula (post-rewrite for `c<n>`).
    pub goal: usize,
    kinds: Vec<Kind>,
    /// `c<n>` only: at the annotation's index, the (F, ~F) pairs it governs.
    ann_checks: Vec<Vec<AnnCheck>>,
    /// `c<n>` only: annotation propagation instances, at their last index.
    prop_checks: Vec<Vec<PropCheck>>,
    logic: LogicId,
}

enum Kind {
    Atom,
    Not { child: usize, grandchild: Option<usize> },
    Circ { child: usize, not_child: Option<usize> },
    And(usize, usize),
    Or(usize, usize),
    Imp(usize, usize),
}

struct AnnCheck {
    f: usize,
    not_f: usize,
}

struct PropCheck {
    ann_a: usize,
    ann_b: usize,
    ann_g: usize,
}

/// Rewrite `oF` as the definable consistency marker `~(F & ~F)` used by the
/// `c<n>` hierarchy.
fn rewrite_circ(f: &Formula) -> Formula {
    match f {
        Formula::Atom(_) => f.clone(),
        Formula::Not(x) => rewrite_circ(x).not(),
        Formula::Circ(x) => marker(&rewrite_circ(x)),
        Formula::And(a, b) => rewrite_circ(a).and(rewrite_circ(b)),
        Formula::Or(a, b) => rewrite_circ(a).or(rewrite_circ(b)),
        Formula::Imp(a, b) => rewrite_circ(a).imp(rewrite_circ(b)),
    }
}

pub(crate) fn build_fragment(
    logic: LogicId,
    members: &[Formula],
    goal: &Formula,
    closure_rounds: usize,
    cap: usize,
) -> Result<Fragment, LogicError> {
    let mut seed: Vec<Formula> = members.to_vec();
    seed.push(goal.clone());
    if let LogicId::C(_) = logic {
        seed = seed.iter().map(rewrite_circ).collect();
    }

    let mut set: BTreeSet<Formula> = BTreeSet::new();
    let insert = |set: &mut BTreeSet<Formula>, f: Formula| -> Result<(), LogicError> {
        set.insert(f);
        if set.len() > cap {
            return Err(LogicError::ClosureCap(cap));
        }
        Ok(())
    };

    for f in &seed {
        for sub in f.subformulas() {
            insert(&mut set, sub)?;
        }
    }

    if let LogicId::C(n) = logic {
        // Make the consistency chains of every atom part of the fragment, so
        // the hierarchy clause has something to grip even when the input
        // does not spell the chains out.
        let atoms: Vec<Formula> =
            set.iter().filter(|f| matches!(f, Formula::Atom(_))).cloned().collect();
        for atom in atoms {
            for sub in annotation(&atom, n).subformulas() {
                insert(&mut set, sub)?;
            }
        }
    }

    for _ in 0..closure_rounds {
        let snapshot: Vec<Formula> = set.iter().cloned().collect();
        for f in snapshot {
            insert(&mut set, f.not())?;
        }
    }

    let mut formulas: Vec<Formula> = set.into_iter().collect();
    formulas.sort_by_key(|f| (f.size(), f.clone()));
    let index: BTreeMap<Formula, usize> =
        formulas.iter().enumerate().map(|(i, f)| (f.clone(), i)).collect();
    let member_indices: Vec<usize> = seed[..members.len()].iter().map(|f| index[f]).collect();
    let goal_index = index[&seed[members.len()]];

    let at = |f: &Formula| index[f];
    let kinds: Vec<Kind> = formulas
        .iter()
        .map(|f| match f {
            Formula::Atom(_) => Kind::Atom,
            Formula::Not(x) => Kind::Not {
                child: at(x),
                grandchild: match x.as_ref() {
                    Formula::Not(g) => Some(at(g)),
                    _ => None,
                },
            },
            Formula::Circ(x) => {
                Kind::Circ { child: at(x), not_child: index.get(&x.as_ref().clone().not()).copied() }
            }
            Formula::And(a, b) => Kind::And(at(a), at(b)),
            Formula::Or(a, b) => Kind::Or(at(a), at(b)),
            Formula::Imp(a, b) => Kind::Imp(at(a), at(b)),
        })
        .collect();

    let mut ann_checks: Vec<Vec<AnnCheck>> = (0..formulas.len()).map(|_| Vec::new()).collect();
    let mut prop_checks: Vec<Vec<PropCheck>> = (0..formulas.len()).map(|_| Vec::new()).collect();
    if let LogicId::C(n) = logic {
        for (i, f) in formulas.iter().enumerate() {
            if let Some(&ai) = index.get(&annotation(f, n)) {
                if let Some(&ni) = index.get(&f.clone().not()) {
                    ann_checks[ai].push(AnnCheck { f: i, not_f: ni });
                }
            }
            let parts = match f {
                Formula::And(a, b) | Formula::Or(a, b) | Formula::Imp(a, b) => {
                    Some((a.as_ref(), b.as_ref()))
                }
                _ => None,
            };
            if let Some((a, b)) = parts {
                let anns = (
                    index.get(&annotation(a, n)),
                    index.get(&annotation(b, n)),
                    index.get(&annotation(f, n)),
                );
                if let (Some(&ann_a), Some(&ann_b), Some(&ann_g)) = anns {
                    let trigger = ann_a.max(ann_b).max(ann_g);
                    prop_checks[trigger].push(PropCheck { ann_a, ann_b, ann_g });
                }
            }
        }
    }

    Ok(Fragment {
        formulas,
        members: member_indices,
        goal: goal_index,
        kinds,
        ann_checks,
        prop_checks,
        logic,
    })
}

/// Find an admissible bivaluation of the fragment honoring `required`
/// (indices pinned to a truth value), or prove there is none.
pub(crate) fn solve(fragment: &Fragment, required: &BTreeMap<usize, bool>) -> Option<Vec<bool>> {
    let mut values: Vec<Option<bool>> = vec![None; fragment.formulas.len()];
    if assign(fragment, required, &mut values, 0) {
        Some(values.into_iter().map(Option::unwrap).collect())
    } else {
        None
    }
}

fn assign(
    fragment: &Fragment,
    required: &BTreeMap<usize, bool>,
    values: &mut Vec<Option<bool>>,
    i: usize,
) -> bool {
    if i == fragment.formulas.len() {
        return true;
    }
    let v = |j: usize| values[j].expect("children precede parents");
    let candidates: &[bool] = match fragment.kinds[i] {
        Kind::Atom => &[true, false],
        Kind::And(a, b) => {
            if v(a) && v(b) {
                &[true]
            } else {
                &[false]
            }
        }
        Kind::Or(a, b) => {
            if v(a) || v(b) {
                &[true]
            } else {
                &[false]
            }
        }
        Kind::Imp(a, b) => {
            if !v(a) || v(b) {
                &[true]
            } else {
                &[false]
            }
        }
        Kind::Not { child, .. } => match fragment.logic {
            LogicId::Cpl => {
                if v(child) {
                    &[false]
                } else {
                    &[true]
                }
            }
            // Never both false; a true child leaves the negation free.
            _ => {
                if v(child) {
                    &[true, false]
                } else {
                    &[true]
                }
            }
        },
        Kind::Circ { child, not_child } => match fragment.logic {
            LogicId::Cpl => &[true],
            LogicId::Mbc => {
                // A consistency claim over a visibly inconsistent pair is
                // false; otherwise the claim is not forced either way.
                if v(child) && not_child.map_or(false, |n| v(n)) {
                    &[false]
                } else {
                    &[false, true]
                }
            }
            LogicId::C(_) => unreachable!("circ is rewritten away for c<n>"),
        },
    };

    for &cand in candidates {
        if required.get(&i).is_some_and(|r| *r != cand) {
            continue;
        }
        if !checks_pass(fragment, values, i, cand) {
            continue;
        }
        values[i] = Some(cand);
        if assign(fragment, required, values, i + 1) {
            return true;
        }
    }
    values[i] = None;
    false
}

fn checks_pass(fragment: &Fragment, values: &[Option<bool>], i: usize, cand: bool) -> bool {
    if !matches!(fragment.logic, LogicId::C(_)) {
        return true;
    }
    let v = |j: usize| if j == i { cand } else { values[j].expect("earlier index") };
    // Double negation elimination: v(~~G)=1 forces v(G)=1.
    if let Kind::Not { grandchild: Some(g), .. } = fragment.kinds[i] {
        if cand && !v(g) {
            return false;
        }
    }
    // A holding annotation makes its formula's negation classical.
    if cand {
        for check in &fragment.ann_checks[i] {
            if v(check.f) && v(check.not_f) {
                return false;
            }
        }
    }
    // Annotations propagate across binary connectives.
    for check in &fragment.prop_checks[i] {
        if v(check.ann_a) && v(check.ann_b) && !v(check.ann_g) {
            return false;
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f(s: &str) -> Formula {
        s.parse().unwrap()
    }

    fn spot(frag: &Fragment, s: &str) -> usize {
        let target = f(s);
        frag.formulas.iter().position(|x| *x == target).unwrap_or_else(|| panic!("missing {s}"))
    }

    fn holds(frag: &Fragment, s: &str) -> bool {
        let target = f(s);
        frag.formulas.iter().any(|x| *x == target)
    }

    fn pin(frag: &Fragment, pairs: &[(&str, bool)]) -> BTreeMap<usize, bool> {
        pairs.iter().map(|(s, b)| (spot(frag, s), *b)).collect()
    }

    #[test]
    fn closure_adds_negation_rounds() {
        let frag = build_fragment(LogicId::Mbc, &[f("A")], &f("B"), 1, 4096).unwrap();
        for needed in ["A", "B", "~A", "~B"] {
            assert!(holds(&frag, needed), "missing {needed}");
        }
        let frag2 = build_fragment(LogicId::Mbc, &[f("A")], &f("B"), 2, 4096).unwrap();
        assert!(holds(&frag2, "~~A"));
    }

    #[test]
    fn hierarchy_closure_contains_atom_chains() {
        let frag = build_fragment(LogicId::C(1), &[f("A")], &f("B"), 1, 4096).unwrap();
        assert!(holds(&frag, "~(A & ~A)"), "first chain link of A");
        assert!(holds(&frag, "A & ~A"));
    }

    #[test]
    fn circ_is_rewritten_for_the_hierarchy() {
        let frag = build_fragment(LogicId::C(1), &[f("oA")], &f("B"), 0, 4096).unwrap();
        assert!(holds(&frag, "~(A & ~A)"));
        assert!(!frag.formulas.iter().any(|x| matches!(x, Formula::Circ(_))));
    }

    #[test]
    fn closure_cap_is_enforced() {
        let err = build_fragment(LogicId::Mbc, &[f("A & B & C")], &f("D"), 3, 10)
            .err()
            .expect("cap of 10 should trip");
        assert!(matches!(err, LogicError::ClosureCap(10)));
    }

    #[test]
    fn classical_negation_is_rigid_where_paraconsistent_is_free() {
        let gamma = [f("A"), f("~A")];
        let goal = f("Z");
        let cpl = build_fragment(LogicId::Cpl, &gamma, &goal, 1, 4096).unwrap();
        assert!(solve(&cpl, &pin(&cpl, &[("A", true), ("~A", true)])).is_none());

        let mbc = build_fragment(LogicId::Mbc, &gamma, &goal, 1, 4096).unwrap();
        let model = solve(&mbc, &pin(&mbc, &[("A", true), ("~A", true)])).unwrap();
        assert!(model[spot(&mbc, "A")]);
        assert!(model[spot(&mbc, "~A")]);
    }

    #[test]
    fn negations_are_never_both_false_outside_cpl() {
        let frag = build_fragment(LogicId::Mbc, &[f("A")], &f("Z"), 1, 4096).unwrap();
        assert!(solve(&frag, &pin(&frag, &[("A", false), ("~A", false)])).is_none());
    }

    #[test]
    fn double_negation_elimination_separates_the_hierarchy_from_mbc() {
        let gamma = [f("~~A")];
        let goal = f("A");
        let pins = [("~~A", true), ("A", false)];
        let c1 = build_fragment(LogicId::C(1), &gamma, &goal, 1, 4096).unwrap();
        assert!(solve(&c1, &pin(&c1, &pins)).is_none(), "c1 eliminates double negation");
        let mbc = build_fragment(LogicId::Mbc, &gamma, &goal, 1, 4096).unwrap();
        assert!(solve(&mbc, &pin(&mbc, &pins)).is_some(), "mbc does not");
    }

    #[test]
    fn holding_annotation_forces_classical_negation() {
        // v(~(A & ~A)) = 1 plus v(A) = v(~A) = 1 is inadmissible in c1.
        let gamma = [f("A"), f("~A"), f("~(A & ~A)")];
        let frag = build_fragment(LogicId::C(1), &gamma, &f("Z"), 1, 4096).unwrap();
        let required = pin(&frag, &[("A", true), ("~A", true), ("~(A & ~A)", true)]);
        assert!(solve(&frag, &required).is_none());
        // Dropping the annotation requirement restores a model.
        let relaxed = pin(&frag, &[("A", true), ("~A", true)]);
        assert!(solve(&frag, &relaxed).is_some());
    }
}
