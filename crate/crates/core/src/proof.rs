//! Derivation steps recorded by the blackboard.

use crate::comparison::{Comparison, Rel, TermId};
use crate::term::STerm;

pub type StepId = usize;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Fact {
    Cmp(Comparison),
    Clause(Vec<Comparison>),
}

impl Fact {
    /// `1 <= 0`, the conclusion of a refutation.
    pub fn absurd() -> Fact {
        Fact::Cmp(Comparison::sign(0, Rel::Le))
    }

    pub fn is_absurd(&self) -> bool {
        *self == Fact::absurd()
    }

    pub fn cmp(&self) -> Option<&Comparison> {
        match self {
            Fact::Cmp(c) => Some(c),
            Fact::Clause(_) => None,
        }
    }
}

/// Rule-specific data needed to re-check a step.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Detail {
    None,
    /// Index into the clause list of the hypotheses and negated conclusion.
    Hyp(usize),
    /// Instance of clause `clause` of axiom `axiom`.
    Instance {
        axiom: usize,
        clause: usize,
        subst: Vec<(String, STerm)>,
        targets: Vec<TermId>,
    },
    /// Case assumption number `case` of a split on `on`.
    Case {
        on: String,
        case: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Step {
    pub module: &'static str,
    pub rule: &'static str,
    pub premises: Vec<StepId>,
    pub defs: Vec<TermId>,
    pub fact: Fact,
    pub detail: Detail,
}

impl Step {
    pub fn new(
        module: &'static str,
        rule: &'static str,
        premises: Vec<StepId>,
        fact: Fact,
    ) -> Step {
        let mut premises = premises;
        premises.sort_unstable();
        premises.dedup();
        Step {
            module,
            rule,
            premises,
            defs: Vec::new(),
            fact,
            detail: Detail::None,
        }
    }

    pub fn with_defs(mut self, mut defs: Vec<TermId>) -> Step {
        defs.sort_unstable();
        defs.dedup();
        self.defs = defs;
        self
    }

    pub fn with_detail(mut self, detail: Detail) -> Step {
        self.detail = detail;
        self
    }
}
