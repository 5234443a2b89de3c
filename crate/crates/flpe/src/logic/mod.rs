//! Consequence engines for classical logic, the `c<n>` hierarchy of
//! paraconsistent calculi, and the `mbc` logic of formal inconsistency.
//!
//! The paraconsistent members tolerate contradictory premise sets without
//! collapsing: `{A, ~A}` does not entail an unrelated `Z`. What restores
//! explosive power is a consistency claim — primitive `oA` in `mbc`, the
//! definable chain `~(A & ~A)` and its iterates in `c<n>`. The boundary is
//! sharp and it is the whole point:
//!
//!  - `{A, ~A}` trivializes `cpl`, no paraconsistent logic here
//!  - `{A, ~A, A^(n)}` trivializes `c<n>` but not `c<n+1>`
//!  - `{A, ~A, oA}` trivializes `mbc`; drop the claim and it does not
//!
//! Everything is decided by bivaluation search over a finite closure
//! fragment (see [`valuation`]); `trivializes` asks whether a fresh atom
//! follows, `is_inconsistent` whether some subformula is entailed along
//! with its negation. An inconsistent but non-trivial premise set is the
//! signature of a logic of formal inconsistency doing its job.

pub mod formula;
pub mod truth_table;
mod valuation;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

pub use formula::{Formula, ParseError};

pub const DEFAULT_CLOSURE_ROUNDS: usize = 1;
pub const DEFAULT_CLOSURE_CAP: usize = 4096;

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum LogicId {
    /// Classical propositional logic.
    Cpl,
    /// The n-th paraconsistent calculus of the da Costa hierarchy.
    C(u32),
    /// A minimal logic of formal inconsistency with primitive `o`.
    Mbc,
}

impl LogicId {
    pub fn parse(s: &str) -> Result<LogicId, LogicError> {
        match s {
            "cpl" => return Ok(LogicId::Cpl),
            "mbc" => return Ok(LogicId::Mbc),
            _ => {}
        }
        s.strip_prefix('c')
            .and_then(|k| k.parse::<u32>().ok())
            .filter(|k| (1..=8).contains(k))
            .map(LogicId::C)
            .ok_or_else(|| LogicError::UnknownLogic(s.to_string()))
    }

    pub fn key(&self) -> String {
        match self {
            LogicId::Cpl => "cpl".to_string(),
            LogicId::C(n) => format!("c{n}"),
            LogicId::Mbc => "mbc".to_string(),
        }
    }
}

impl fmt::Display for LogicId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.key())
    }
}

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum LogicError {
    #[error("closure fragment exceeded the cap of {0} formulas")]
    ClosureCap(usize),
    #[error("unknown logic `{0}` (expected cpl, mbc, or c1..c8)")]
    UnknownLogic(String),
}

// ------------------------------------------------------ consistency chains

/// The definable consistency marker of the hierarchy: `F°` as `~(F & ~F)`.
pub fn marker(f: &Formula) -> Formula {
    f.clone().and(f.clone().not()).not()
}

/// k-th chain link: the marker applied k times.
pub fn chain(f: &Formula, k: u32) -> Formula {
    assert!(k >= 1, "chain links are numbered from 1");
    let mut out = marker(f);
    for _ in 1..k {
        out = marker(&out);
    }
    out
}

/// n-th annotation `F^(n)`: the conjunction of the first n chain links,
/// folded left, so `F^(n+1)` literally contains `F^(n)` as a subformula.
pub fn annotation(f: &Formula, n: u32) -> Formula {
    assert!(n >= 1, "annotations are numbered from 1");
    let mut out = chain(f, 1);
    for k in 2..=n {
        out = out.and(chain(f, k));
    }
    out
}

/// The canonical boundary premise set `{A, ~A, A^(n)}`: contradictory, and
/// annotated at exactly level n.
pub fn gamma_n(atom: &str, n: u32) -> Vec<Formula> {
    let a = Formula::atom(atom);
    vec![a.clone(), a.clone().not(), annotation(&a, n)]
}

// ----------------------------------------------------------------- engine

/// Outcome of an entailment query: either it holds, or here is an
/// admissible bivaluation making every premise true and the goal false.
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum Entailment {
    Entails,
    Counterexample(Valuation),
}

impl Entailment {
    pub fn holds(&self) -> bool {
        matches!(self, Entailment::Entails)
    }
}

/// A fragment bivaluation, keyed by formula.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Valuation {
    entries: BTreeMap<Formula, bool>,
}

impl Valuation {
    pub fn get(&self, f: &Formula) -> Option<bool> {
        self.entries.get(f).copied()
    }
}

impl fmt::Display for Valuation {
    /// Compact rendering: atoms and their immediate negations and
    /// consistency claims, e.g. `A=1 ~A=1 Z=0`.
    fn fmt(&self, out: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (f, v) in &self.entries {
            let shallow = match f {
                Formula::Atom(_) => true,
                Formula::Not(x) | Formula::Circ(x) => matches!(x.as_ref(), Formula::Atom(_)),
                _ => false,
            };
            if !shallow {
                continue;
            }
            if !first {
                write!(out, " ")?;
            }
            write!(out, "{}={}", f, if *v { 1 } else { 0 })?;
            first = false;
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug)]
pub struct Engine {
    logic: LogicId,
    closure_rounds: usize,
    closure_cap: usize,
}

impl Engine {
    pub fn new(logic: LogicId) -> Engine {
        Engine {
            logic,
            closure_rounds: DEFAULT_CLOSURE_ROUNDS,
            closure_cap: DEFAULT_CLOSURE_CAP,
        }
    }

    pub fn with_closure_rounds(mut self, rounds: usize) -> Engine {
        self.closure_rounds = rounds;
        self
    }

    pub fn with_closure_cap(mut self, cap: usize) -> Engine {
        self.closure_cap = cap;
        self
    }

    pub fn logic(&self) -> LogicId {
        self.logic
    }

    /// Does every admissible bivaluation of the closure fragment that makes
    /// all of `gamma` true make `goal` true as well?
    pub fn entails(&self, gamma: &[Formula], goal: &Formula) -> Result<Entailment, LogicError> {
        let frag = valuation::build_fragment(
            self.logic,
            gamma,
            goal,
            self.closure_rounds,
            self.closure_cap,
        )?;
        if frag.members.contains(&frag.goal) {
            return Ok(Entailment::Entails);
        }
        let mut required: BTreeMap<usize, bool> = BTreeMap::new();
        for &m in &frag.members {
            required.insert(m, true);
        }
        required.insert(frag.goal, false);
        match valuation::solve(&frag, &required) {
            None => Ok(Entailment::Entails),
            Some(values) => Ok(Entailment::Counterexample(Valuation {
                entries: frag.formulas.iter().cloned().zip(values).collect(),
            })),
        }
    }

    /// `gamma` entails even a fresh atom it never mentions: the premise set
    /// has gone explosive.
    pub fn trivializes(&self, gamma: &[Formula]) -> Result<bool, LogicError> {
        Ok(self.entails(gamma, &fresh_atom(gamma))?.holds())
    }

    /// Some subformula of `gamma` is entailed together with its negation.
    pub fn is_inconsistent(&self, gamma: &[Formula]) -> Result<bool, LogicError> {
        let mut subs = BTreeSet::new();
        for g in gamma {
            subs.extend(g.subformulas());
        }
        for s in subs {
            if self.entails(gamma, &s)?.holds()
                && self.entails(gamma, &s.clone().not())?.holds()
            {
                return Ok(true);
            }
        }
        Ok(false)
    }

    /// The two facts that decide whether a logic is earning its keep on a
    /// contradictory premise set.
    pub fn explosion_check(&self, gamma: &[Formula]) -> Result<ExplosionCheck, LogicError> {
        Ok(ExplosionCheck {
            inconsistent: self.is_inconsistent(gamma)?,
            trivial: self.trivializes(gamma)?,
        })
    }

    /// Does `gamma` entail the consistency of `f`, in this logic's own
    /// vocabulary? Classically every formula is well behaved.
    pub fn well_behaved(&self, gamma: &[Formula], f: &Formula) -> Result<bool, LogicError> {
        let claim = match self.logic {
            LogicId::Cpl => return Ok(true),
            LogicId::Mbc => f.clone().circ(),
            LogicId::C(n) => annotation(f, n),
        };
        Ok(self.entails(gamma, &claim)?.holds())
    }
}

/// Inconsistent-but-non-trivial is the circumvention of explosion.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct ExplosionCheck {
    pub inconsistent: bool,
    pub trivial: bool,
}

impl ExplosionCheck {
    pub fn circumvented(&self) -> bool {
        self.inconsistent && !self.trivial
    }
}

fn fresh_atom(gamma: &[Formula]) -> Formula {
    let used: BTreeSet<String> = gamma.iter().flat_map(|f| f.atoms()).collect();
    if !used.contains("Z") {
        return Formula::atom("Z");
    }
    let mut i = 0;
    loop {
        let name = format!("Z{i}");
        if !used.contains(&name) {
            return Formula::atom(name);
        }
        i += 1;
    }
}
