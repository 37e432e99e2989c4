//! The refutation loop: assert the hypotheses and the negated conclusion,
//! run the modules round-robin until a contradiction or a fixpoint, and
//! optionally split cases.

use std::fmt;
use std::str::FromStr;
use std::time::{Duration, Instant};

use num_traits::Signed;

use crate::additive::derive_additive;
use crate::axioms::{clausify, literal_norm, prepare, AxiomModule, Literal};
use crate::blackboard::{Blackboard, Def, Sign};
use crate::comparison::{normalize_pair, Comparison, Norm, Rel, TermId};
use crate::fm;
use crate::functions::{self, Library};
use crate::multiplicative::{derive_multiplicative, monotone_products, preprocess_signs};
use crate::parse::{Formula, Problem};
use crate::proof::{Detail, Fact, Step, StepId};
use crate::term::canonize;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Modules {
    pub congruence: bool,
    pub additive: bool,
    pub multiplicative: bool,
    pub axioms: bool,
    pub functions: bool,
}

impl Default for Modules {
    fn default() -> Self {
        Modules {
            congruence: true,
            additive: true,
            multiplicative: true,
            axioms: true,
            functions: true,
        }
    }
}

impl FromStr for Modules {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut m = Modules {
            congruence: false,
            additive: false,
            multiplicative: false,
            axioms: false,
            functions: false,
        };
        for name in s.split(',').map(str::trim).filter(|n| !n.is_empty()) {
            match name {
                "congruence" => m.congruence = true,
                "additive" => m.additive = true,
                "multiplicative" => m.multiplicative = true,
                "axioms" => m.axioms = true,
                "functions" => m.functions = true,
                other => return Err(format!("unknown module `{other}`")),
            }
        }
        Ok(m)
    }
}

#[derive(Debug, Clone, Copy)]
pub struct Config {
    pub max_rounds: usize,
    pub split_depth: u32,
    pub timeout: Duration,
    pub modules: Modules,
    pub fm: fm::Config,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            max_rounds: 20,
            split_depth: 0,
            timeout: Duration::from_secs(5),
            modules: Modules::default(),
            fm: fm::Config::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Proved,
    UnknownSaturated,
    UnknownResource,
    Timeout,
    InputError,
}

impl Verdict {
    pub fn exit_code(self) -> i32 {
        match self {
            Verdict::Proved => 0,
            Verdict::UnknownSaturated | Verdict::UnknownResource | Verdict::Timeout => 1,
            Verdict::InputError => 2,
        }
    }

    pub fn is_unknown(self) -> bool {
        matches!(
            self,
            Verdict::UnknownSaturated | Verdict::UnknownResource | Verdict::Timeout
        )
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Proved => "proved",
            Verdict::UnknownSaturated => "unknown_saturated",
            Verdict::UnknownResource => "unknown_resource",
            Verdict::Timeout => "timeout",
            Verdict::InputError => "input_error",
        })
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Stats {
    pub rounds: usize,
    pub splits: usize,
    pub facts: usize,
    pub elapsed: Duration,
}

/// A refutation branch: the blackboard at the end of the branch, where its
/// own steps and terms begin, and how it ended.
#[derive(Debug, Clone)]
pub struct Branch {
    pub bb: Blackboard,
    pub first_step: StepId,
    pub first_term: TermId,
    pub end: End,
}

#[derive(Debug, Clone)]
pub enum End {
    Contradiction(StepId, StepId),
    Split { on: String, cases: Vec<Branch> },
}

#[derive(Debug, Clone)]
pub struct Report {
    pub verdict: Verdict,
    pub stats: Stats,
    pub proof: Option<Branch>,
    pub axioms: Vec<String>,
    pub error: Option<String>,
}

/// The formulas to refute: hypotheses and the negated conclusion.
pub fn refutation_target(p: &Problem) -> Vec<Formula> {
    let mut fs = p.hyps.clone();
    if let Some(c) = &p.conclusion {
        fs.push(Formula::Not(Box::new(c.clone())));
    }
    fs
}

/// Ground clauses of the refutation target, in order.
pub fn input_clauses(p: &Problem) -> Option<Vec<Vec<Literal>>> {
    let mut out = Vec::new();
    for f in refutation_target(p) {
        out.extend(clausify(&f)?);
    }
    Some(out)
}

/// A case split: an exhaustive disjunction of comparisons.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Split {
    pub on: String,
    pub cases: Vec<Comparison>,
    pub weight: usize,
}

fn sign_split(t: TermId) -> Vec<Comparison> {
    vec![
        Comparison::sign(t, Rel::Lt),
        Comparison::sign(t, Rel::Eq),
        Comparison::sign(t, Rel::Gt),
    ]
}

pub fn suggest_splits(bb: &Blackboard) -> Vec<Split> {
    let mut weights: std::collections::BTreeMap<TermId, usize> = Default::default();
    let mut orders: Vec<Split> = Vec::new();
    let unsigned =
        |t: TermId| t != 0 && !matches!(bb.sign_of(t), Sign::Pos | Sign::Neg | Sign::Zero);
    for t in 1..bb.num_terms() {
        match bb.def(t) {
            Def::Prod(fs) => {
                for (b, _) in fs {
                    if unsigned(*b) {
                        *weights.entry(*b).or_default() += 1;
                    }
                }
            }
            Def::App(f, args) if f == "abs" && args.len() == 1 => {
                if unsigned(args[0].1) {
                    *weights.entry(args[0].1).or_default() += 1;
                }
            }
            Def::App(f, args) if f == "min" && args.len() == 2 => {
                let ((c1, i), (c2, j)) = (&args[0], &args[1]);
                let Norm::Cmp(le) = normalize_pair(c1.clone(), *i, Rel::Le, c2.clone(), *j) else {
                    continue;
                };
                let Norm::Cmp(ge) = normalize_pair(c1.clone(), *i, Rel::Ge, c2.clone(), *j) else {
                    continue;
                };
                if bb.entails(&le).is_some() || bb.entails(&ge).is_some() {
                    continue;
                }
                let on = format!("t{t}");
                match orders
                    .iter_mut()
                    .find(|s| s.cases == vec![le.clone(), ge.clone()])
                {
                    Some(s) => s.weight += 1,
                    None => orders.push(Split {
                        on,
                        cases: vec![le, ge],
                        weight: 1,
                    }),
                }
            }
            _ => {}
        }
    }
    let mut out: Vec<Split> = weights
        .into_iter()
        .map(|(t, w)| Split {
            on: format!("t{t}"),
            cases: sign_split(t),
            weight: w,
        })
        .collect();
    out.extend(orders);
    out.sort_by_key(|s| std::cmp::Reverse(s.weight));
    out
}

#[derive(Clone)]
struct State {
    bb: Blackboard,
    am: AxiomModule,
    lib: Library,
}

struct Run<'a> {
    cfg: &'a Config,
    start: Instant,
    stats: Stats,
}

enum Saturation {
    Proved,
    Saturated,
    Resource,
    Timeout,
}

impl Run<'_> {
    fn late(&self) -> bool {
        self.start.elapsed() > self.cfg.timeout
    }

    /// Round-robin passes until something decisive happens.
    fn saturate(&mut self, st: &mut State) -> Saturation {
        let m = self.cfg.modules;
        let mut resource = false;
        for _ in 0..self.cfg.max_rounds {
            self.stats.rounds += 1;
            let rev = st.bb.revision();
            let steps = st.bb.steps().len();
            type Pass = fn(&mut State, &fm::Config, &mut bool);
            let passes: [(bool, Pass); 6] = [
                (m.congruence, |st, _, _| {
                    functions::congruence_close(&mut st.bb);
                }),
                (m.additive, |st, cfg, res| {
                    *res |= derive_additive(&mut st.bb, cfg).resource;
                }),
                (m.multiplicative, |st, _, _| {
                    preprocess_signs(&mut st.bb);
                    monotone_products(&mut st.bb);
                }),
                (m.multiplicative, |st, cfg, res| {
                    *res |= derive_multiplicative(&mut st.bb, cfg).resource;
                }),
                (m.axioms, |st, _, _| {
                    functions::install(&st.bb, &mut st.am);
                    st.am.run(&mut st.bb);
                }),
                (m.functions, |st, _, _| {
                    st.lib.run(&mut st.bb);
                }),
            ];
            for (on, pass) in passes {
                if on {
                    pass(st, &self.cfg.fm, &mut resource);
                }
                st.bb.scan_clauses();
                if st.bb.has_contradiction() {
                    self.stats.facts += st.bb.steps().len() - steps;
                    return Saturation::Proved;
                }
                if self.late() {
                    return Saturation::Timeout;
                }
            }
            self.stats.facts += st.bb.steps().len() - steps;
            if st.bb.revision() == rev {
                return if resource {
                    Saturation::Resource
                } else {
                    Saturation::Saturated
                };
            }
        }
        Saturation::Resource
    }

    fn branch(
        &mut self,
        mut st: State,
        depth: u32,
        first_step: StepId,
        first_term: TermId,
    ) -> (Verdict, Option<Branch>) {
        let outcome = self.saturate(&mut st);
        let verdict = match outcome {
            Saturation::Proved => {
                let (a, b) = st.bb.contradiction().expect("contradiction");
                let end = End::Contradiction(a, b);
                return (
                    Verdict::Proved,
                    Some(Branch {
                        bb: st.bb,
                        first_step,
                        first_term,
                        end,
                    }),
                );
            }
            Saturation::Timeout => return (Verdict::Timeout, None),
            Saturation::Resource => Verdict::UnknownResource,
            Saturation::Saturated => Verdict::UnknownSaturated,
        };
        if depth == 0 {
            return (verdict, None);
        }
        'candidates: for split in suggest_splits(&st.bb).into_iter().take(4) {
            self.stats.splits += 1;
            let mut cases = Vec::new();
            for (k, c) in split.cases.iter().enumerate() {
                let mut child = st.clone();
                let (fs, ft) = (child.bb.steps().len(), child.bb.num_terms());
                let step = Step::new("split", "case", vec![], Fact::Cmp(c.clone())).with_detail(
                    Detail::Case {
                        on: split.on.clone(),
                        case: k,
                    },
                );
                child.bb.assert_cmp(c, step);
                let (v, b) = self.branch(child, depth - 1, fs, ft);
                match (v, b) {
                    (Verdict::Proved, Some(b)) => cases.push(b),
                    (Verdict::Timeout, _) => return (Verdict::Timeout, None),
                    _ => continue 'candidates,
                }
            }
            let end = End::Split {
                on: split.on.clone(),
                cases,
            };
            return (
                Verdict::Proved,
                Some(Branch {
                    bb: st.bb,
                    first_step,
                    first_term,
                    end,
                }),
            );
        }
        (verdict, None)
    }
}

fn input_error(msg: String, start: Instant) -> Report {
    let stats = Stats {
        elapsed: start.elapsed(),
        ..Stats::default()
    };
    Report {
        verdict: Verdict::InputError,
        stats,
        proof: None,
        axioms: vec![],
        error: Some(msg),
    }
}

/// Load the problem into a fresh blackboard and axiom module.
fn load(p: &Problem) -> Result<(Blackboard, AxiomModule), String> {
    let mut bb = Blackboard::new();
    let mut am = AxiomModule::new();
    for ax in &p.axioms {
        am.add(prepare(ax).map_err(|e| e.to_string())?);
    }
    for t in &p.terms {
        let s = canonize(t).map_err(|e| e.to_string())?;
        if !s.is_constant() {
            bb.register(&s.term);
        }
    }
    let clauses = input_clauses(p).ok_or("hypotheses have too many clauses")?;
    for (k, lits) in clauses.iter().enumerate() {
        let mut norms = Vec::new();
        for l in lits {
            let d = canonize(&l.difference()).map_err(|e| e.to_string())?;
            norms.push(literal_norm(&mut bb, &d, l.rel).ok_or("hypothesis cannot be normalized")?);
        }
        let step = Step::new("input", "hyp", vec![], Fact::absurd()).with_detail(Detail::Hyp(k));
        if let [n] = norms.as_slice() {
            bb.assert_norm(n, step);
        } else {
            bb.add_clause(&norms, step);
        }
    }
    Ok((bb, am))
}

pub fn solve(p: &Problem, cfg: &Config) -> Report {
    let start = Instant::now();
    let (bb, am) = match load(p) {
        Ok(x) => x,
        Err(e) => return input_error(e, start),
    };
    let mut run = Run {
        cfg,
        start,
        stats: Stats::default(),
    };
    let st = State {
        bb,
        am,
        lib: Library::new(),
    };
    let (verdict, proof) = if st.bb.has_contradiction() {
        let (a, b) = st.bb.contradiction().expect("contradiction");
        (
            Verdict::Proved,
            Some(Branch {
                bb: st.bb.clone(),
                first_step: 0,
                first_term: 0,
                end: End::Contradiction(a, b),
            }),
        )
    } else {
        run.branch(st.clone(), cfg.split_depth, 0, 0)
    };
    let mut stats = run.stats;
    stats.elapsed = start.elapsed();
    let axioms = proof
        .as_ref()
        .map(|b| axiom_texts(b, &st.am))
        .unwrap_or_default();
    Report {
        verdict,
        stats,
        proof,
        axioms,
        error: None,
    }
}

/// Texts of every axiom an instance step in the proof may refer to.
fn axiom_texts(b: &Branch, initial: &AxiomModule) -> Vec<String> {
    // Installed axioms depend only on the registered symbols, so replaying
    // the install order over the final term table reproduces the indices.
    let mut am = initial.clone();
    fn walk(b: &Branch, am: &mut AxiomModule) {
        replay(&b.bb, am);
        if let End::Split { cases, .. } = &b.end {
            for c in cases {
                walk(c, am);
            }
        }
    }
    walk(b, &mut am);
    am.axioms.iter().map(|a| a.text.clone()).collect()
}

fn replay(bb: &Blackboard, am: &mut AxiomModule) {
    let mut tmp = Blackboard::new();
    for t in 1..bb.num_terms() {
        tmp.register(bb.term(t));
        functions::install(&tmp, am);
    }
}

/// Readable form of a stored comparison.
pub fn describe(bb: &Blackboard, c: &Comparison) -> String {
    let name = |i: TermId| {
        if i == 0 {
            "1".to_string()
        } else {
            bb.term(i).to_string()
        }
    };
    if c.rhs == 0 {
        format!("{} {} {}", name(c.lhs), c.rel, c.coeff)
    } else if c.coeff.is_negative() {
        format!(
            "{} {} -{}*({})",
            name(c.lhs),
            c.rel,
            -c.coeff.clone(),
            name(c.rhs)
        )
    } else {
        format!("{} {} {}*({})", name(c.lhs), c.rel, c.coeff, name(c.rhs))
    }
}

/// Statistics line for reports.
pub fn stats_line(r: &Report) -> String {
    format!(
        "rounds={} splits={} facts={} time_ms={}",
        r.stats.rounds,
        r.stats.splits,
        r.stats.facts,
        r.stats.elapsed.as_millis()
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse::parse_problem;

    fn run(text: &str, depth: u32) -> Report {
        let p = parse_problem(text).unwrap();
        solve(
            &p,
            &Config {
                split_depth: depth,
                ..Config::default()
            },
        )
    }

    #[test]
    fn immediate() {
        let r = run("hyp x > 0\nconclude x > 0\n", 0);
        assert_eq!(r.verdict, Verdict::Proved);
        assert!(r.stats.rounds <= 1);
    }

    #[test]
    fn problem_two() {
        let r = run("hyp x > 1\nconclude (1 + y^2)*x > 1 + y^2\n", 0);
        assert_eq!(r.verdict, Verdict::Proved);
    }

    #[test]
    fn sign_splits() {
        let text = "hyp x > 0\nhyp x*y*z < 0\nhyp x*w > 0\nconclude w > y*z\n";
        assert!(run(text, 0).verdict.is_unknown());
        assert_eq!(run(text, 2).verdict, Verdict::Proved);
    }

    #[test]
    fn min_max_needs_split() {
        let text = "conclude min(x, y) + max(x, y) = x + y\n";
        assert!(run(text, 0).verdict.is_unknown());
        assert_eq!(run(text, 2).verdict, Verdict::Proved);
    }

    #[test]
    fn square_hits_round_cap() {
        let r = run("conclude x^2 + 2*x + 1 >= 0\n", 0);
        assert_eq!(r.verdict, Verdict::UnknownResource, "{}", stats_line(&r));
    }

    #[test]
    fn suggestions() {
        let p = parse_problem("hyp x > 0\nhyp x*y*z < 0\n").unwrap();
        let (bb, _) = load(&p).unwrap();
        let s = suggest_splits(&bb);
        assert_eq!(s.len(), 2);
        assert!(s.iter().all(|s| s.cases.len() == 3));
        let p = parse_problem("hyp x > 0\nhyp y > 0\nhyp x*y > 0\n").unwrap();
        let (bb, _) = load(&p).unwrap();
        assert!(suggest_splits(&bb).is_empty());
    }

    #[test]
    fn bad_axiom_is_input_error() {
        let r = run("axiom forall x y. x < y\nhyp a > 0\n", 0);
        assert_eq!(r.verdict, Verdict::InputError);
        assert_eq!(r.verdict.exit_code(), 2);
    }

    #[test]
    fn module_lists() {
        let m: Modules = "additive,multiplicative".parse().unwrap();
        assert!(m.additive && m.multiplicative && !m.axioms);
        assert!("additive,bogus".parse::<Modules>().is_err());
    }
}
