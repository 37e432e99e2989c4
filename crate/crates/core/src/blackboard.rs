//! The shared store of problem terms and what is known about them.
//!
//! Every registered term gets an index; index 0 is the constant `1`. Facts
//! relating two terms are kept per unordered pair as half-planes
//! `a*t_lo + b*t_hi (>|>=|=) 0` through the origin. Facts about a single
//! term (signs and comparisons with constants) live in the pair `(0, i)`.
//! Disequalities are kept in a side list per pair. Signs derived from the
//! `(0, i)` pairs are cached and feed the context of every other pair.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};

use num_traits::{One, Signed, Zero};

use crate::comparison::{normalize, Comparison, Norm, Rel, TermId};
use crate::proof::{Fact, Step, StepId};
use crate::rat::Rat;
use crate::term::{STerm, Term};

/// Definition of a problem term in terms of other problem terms.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Def {
    One,
    Var(String),
    Sum(Vec<(Rat, TermId)>),
    Prod(Vec<(TermId, i64)>),
    App(String, Vec<(Rat, TermId)>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Kind {
    Gt,
    Ge,
    Eq,
}

impl Kind {
    fn rel(self) -> Rel {
        match self {
            Kind::Gt => Rel::Gt,
            Kind::Ge => Rel::Ge,
            Kind::Eq => Rel::Eq,
        }
    }
}

/// A stored half-plane fact for a pair.
#[derive(Debug, Clone)]
struct Stored {
    a: Rat,
    b: Rat,
    kind: Kind,
    step: StepId,
}

#[derive(Debug, Clone)]
struct Row {
    a: Rat,
    b: Rat,
    kind: Kind,
    src: Vec<StepId>,
}

const MARK: StepId = StepId::MAX;

#[derive(Debug, Clone, Default)]
struct Pair {
    facts: Vec<Stored>,
    diseqs: Vec<Stored>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Bound {
    pub strict: bool,
    pub src: Vec<StepId>,
}

/// Sign knowledge about one term, with the steps that justify it.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SignInfo {
    /// `t >= 0` or `t > 0`.
    pub lower: Option<Bound>,
    /// `t <= 0` or `t < 0`.
    pub upper: Option<Bound>,
    pub nonzero: Option<Vec<StepId>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sign {
    Pos,
    NonNeg,
    Neg,
    NonPos,
    Zero,
    NonZero,
    Unknown,
}

impl SignInfo {
    pub fn sign(&self) -> Sign {
        let lo = self.lower.as_ref().map(|b| b.strict);
        let hi = self.upper.as_ref().map(|b| b.strict);
        match (lo, hi) {
            (Some(true), _) => Sign::Pos,
            (_, Some(true)) => Sign::Neg,
            (Some(false), Some(false)) => Sign::Zero,
            (Some(false), None) if self.nonzero.is_some() => Sign::Pos,
            (None, Some(false)) if self.nonzero.is_some() => Sign::Neg,
            (Some(false), None) => Sign::NonNeg,
            (None, Some(false)) => Sign::NonPos,
            _ if self.nonzero.is_some() => Sign::NonZero,
            _ => Sign::Unknown,
        }
    }

    /// `Some((+1 | -1, premises))` when the sign is strict.
    pub fn strict(&self) -> Option<(i8, Vec<StepId>)> {
        match (&self.lower, &self.upper) {
            (Some(b), _) if b.strict => Some((1, b.src.clone())),
            (_, Some(b)) if b.strict => Some((-1, b.src.clone())),
            (Some(b), None) => self.nonzero.as_ref().map(|nz| (1, union(&b.src, nz))),
            (None, Some(b)) => self.nonzero.as_ref().map(|nz| (-1, union(&b.src, nz))),
            _ => None,
        }
    }

    /// Premises for `t != 0`, if known.
    pub fn nonzero_src(&self) -> Option<Vec<StepId>> {
        if let Some((_, src)) = self.strict() {
            return Some(src);
        }
        self.nonzero.clone()
    }

    /// Premises for `t >= 0` (`dir = 1`) or `t <= 0` (`dir = -1`).
    pub fn weak(&self, dir: i8) -> Option<Vec<StepId>> {
        let b = if dir > 0 { &self.lower } else { &self.upper };
        b.as_ref().map(|b| b.src.clone())
    }

    /// Premises for `t = 0`.
    pub fn zero(&self) -> Option<Vec<StepId>> {
        Some(union(&self.weak(1)?, &self.weak(-1)?))
    }

    fn strength(b: &Option<Bound>) -> u8 {
        match b {
            None => 0,
            Some(b) if b.strict => 2,
            Some(_) => 1,
        }
    }
}

pub fn union(a: &[StepId], b: &[StepId]) -> Vec<StepId> {
    let set: BTreeSet<StepId> = a.iter().chain(b).copied().collect();
    set.into_iter().collect()
}

/// Outcome of an assertion.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Change {
    New,
    Strengthened,
    Redundant,
    Contradiction,
}

/// Admissible coefficients `c` for `t_i dir c*t_j`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoeffRange {
    pub dir: Rel,
    pub empty: bool,
    pub lo: Option<Rat>,
    pub hi: Option<Rat>,
    pub strict_lo: bool,
    pub strict_hi: bool,
    pub strict_interior: bool,
}

impl CoeffRange {
    pub fn contains(&self, c: &Rat) -> bool {
        !self.empty
            && self.lo.as_ref().is_none_or(|l| l <= c)
            && self.hi.as_ref().is_none_or(|h| c <= h)
    }
}

#[derive(Debug, Clone)]
struct PendingClause {
    lits: Vec<Comparison>,
    step: StepId,
    refuters: Vec<StepId>,
}

#[derive(Debug, Clone)]
pub struct Blackboard {
    terms: Vec<Term>,
    defs: Vec<Def>,
    index: HashMap<Term, TermId>,
    pairs: BTreeMap<(TermId, TermId), Pair>,
    adj: Vec<BTreeSet<TermId>>,
    signs: Vec<SignInfo>,
    steps: Vec<Step>,
    clauses: Vec<PendingClause>,
    seen_clauses: HashSet<Vec<Comparison>>,
    contradiction: Option<(StepId, StepId)>,
    revision: u64,
}

impl Default for Blackboard {
    fn default() -> Self {
        Blackboard::new()
    }
}

fn coef(r: &Row, v: usize) -> &Rat {
    if v == 0 {
        &r.a
    } else {
        &r.b
    }
}

fn elim(rows: Vec<Row>, v: usize) -> Vec<Row> {
    if let Some(k) = rows
        .iter()
        .position(|r| r.kind == Kind::Eq && !coef(r, v).is_zero())
    {
        let mut rows = rows;
        let e = rows.remove(k);
        let ev = coef(&e, v).clone();
        return rows
            .into_iter()
            .map(|r| {
                let rv = coef(&r, v).clone();
                if rv.is_zero() {
                    r
                } else {
                    let m = &rv / &ev;
                    Row {
                        a: &r.a - &m * &e.a,
                        b: &r.b - &m * &e.b,
                        kind: r.kind,
                        src: union(&r.src, &e.src),
                    }
                }
            })
            .collect();
    }
    let (mut out, mut pos, mut neg) = (Vec::new(), Vec::new(), Vec::new());
    for r in rows {
        let s = coef(&r, v).clone();
        if s.is_zero() {
            out.push(r);
        } else if s.is_positive() {
            pos.push(r);
        } else {
            neg.push(r);
        }
    }
    for p in &pos {
        for n in &neg {
            let (pv, nv) = (coef(p, v).clone(), -coef(n, v).clone());
            let kind = if p.kind == Kind::Gt || n.kind == Kind::Gt {
                Kind::Gt
            } else {
                Kind::Ge
            };
            out.push(Row {
                a: &nv * &p.a + &pv * &n.a,
                b: &nv * &p.b + &pv * &n.b,
                kind,
                src: union(&p.src, &n.src),
            });
        }
    }
    out
}

/// Sources of a refutation of the homogeneous two-variable system, if any.
fn infeasible(rows: &[Row]) -> Option<Vec<StepId>> {
    let trivial = |rs: &[Row]| {
        rs.iter()
            .filter(|r| r.kind == Kind::Gt && r.a.is_zero() && r.b.is_zero())
            .min_by_key(|r| r.src.len())
            .map(|r| r.src.clone())
    };
    if let Some(s) = trivial(rows) {
        return Some(s);
    }
    let rows = elim(rows.to_vec(), 1);
    if let Some(s) = trivial(&rows) {
        return Some(s);
    }
    trivial(&elim(rows, 0))
}

fn entails(ctx: &[Row], a: &Rat, b: &Rat, kind: Kind) -> Option<Vec<StepId>> {
    let refute = |neg_kind: Kind, sa: &Rat, sb: &Rat| {
        let mut rows = ctx.to_vec();
        rows.push(Row {
            a: -sa.clone(),
            b: -sb.clone(),
            kind: neg_kind,
            src: vec![MARK],
        });
        infeasible(&rows).map(|mut s| {
            s.retain(|x| *x != MARK);
            s
        })
    };
    match kind {
        Kind::Gt => refute(Kind::Ge, a, b),
        Kind::Ge => refute(Kind::Gt, a, b),
        Kind::Eq => {
            let s1 = refute(Kind::Gt, a, b)?;
            let s2 = refute(Kind::Gt, &-a.clone(), &-b.clone())?;
            Some(union(&s1, &s2))
        }
    }
}

/// Pair coordinates of a comparison: `(lo, hi, a, b, rel)` with
/// `a*t_lo + b*t_hi rel 0` and `rel` one of `>`, `>=`, `=`, `!=`.
fn to_pair(c: &Comparison) -> (TermId, TermId, Rat, Rat, Rel) {
    let (lo, hi, a, b) = if c.coeff.is_zero() {
        (0, c.lhs, Rat::zero(), Rat::one())
    } else if c.rhs == 0 {
        (0, c.lhs, -c.coeff.clone(), Rat::one())
    } else if c.lhs < c.rhs {
        (c.lhs, c.rhs, Rat::one(), -c.coeff.clone())
    } else {
        (c.rhs, c.lhs, -c.coeff.clone(), Rat::one())
    };
    match c.rel {
        Rel::Lt => (lo, hi, -a, -b, Rel::Gt),
        Rel::Le => (lo, hi, -a, -b, Rel::Ge),
        r => (lo, hi, a, b, r),
    }
}

fn from_pair(lo: TermId, hi: TermId, a: &Rat, b: &Rat, rel: Rel) -> Norm {
    normalize(&[(lo, a.clone()), (hi, b.clone())], rel).expect("two terms")
}

fn same_line(a1: &Rat, b1: &Rat, a2: &Rat, b2: &Rat) -> bool {
    a1 * b2 == a2 * b1
}

impl Blackboard {
    pub fn new() -> Blackboard {
        let mut bb = Blackboard {
            terms: vec![Term::One],
            defs: vec![Def::One],
            index: HashMap::new(),
            pairs: BTreeMap::new(),
            adj: vec![BTreeSet::new()],
            signs: vec![SignInfo {
                lower: Some(Bound {
                    strict: true,
                    src: vec![0],
                }),
                upper: None,
                nonzero: None,
            }],
            steps: Vec::new(),
            clauses: Vec::new(),
            seen_clauses: HashSet::new(),
            contradiction: None,
            revision: 0,
        };
        bb.index.insert(Term::One, 0);
        bb.steps.push(Step::new(
            "blackboard",
            "one",
            vec![],
            Fact::Cmp(Comparison::sign(0, Rel::Gt)),
        ));
        bb
    }

    // ---- terms ----

    pub fn register(&mut self, t: &Term) -> TermId {
        if let Some(&i) = self.index.get(t) {
            return i;
        }
        let def = match t {
            Term::One => Def::One,
            Term::Var(v) => Def::Var(v.clone()),
            Term::Sum(xs) => Def::Sum(
                xs.iter()
                    .map(|s| (s.coeff.clone(), self.register(&s.term)))
                    .collect(),
            ),
            Term::Prod(fs) => Def::Prod(fs.iter().map(|(b, e)| (self.register(b), *e)).collect()),
            Term::App(f, xs) => Def::App(
                f.clone(),
                xs.iter()
                    .map(|s| (s.coeff.clone(), self.register(&s.term)))
                    .collect(),
            ),
        };
        let i = self.terms.len();
        self.terms.push(t.clone());
        self.defs.push(def);
        self.index.insert(t.clone(), i);
        self.adj.push(BTreeSet::new());
        self.signs.push(SignInfo::default());
        self.revision += 1;
        i
    }

    pub fn register_sterm(&mut self, s: &STerm) -> (Rat, TermId) {
        (s.coeff.clone(), self.register(&s.term))
    }

    pub fn lookup(&self, t: &Term) -> Option<TermId> {
        self.index.get(t).copied()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn term(&self, i: TermId) -> &Term {
        &self.terms[i]
    }

    pub fn def(&self, i: TermId) -> &Def {
        &self.defs[i]
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    // ---- steps ----

    pub fn steps(&self) -> &[Step] {
        &self.steps
    }

    pub fn step(&self, id: StepId) -> &Step {
        &self.steps[id]
    }

    pub fn add_step(&mut self, step: Step) -> StepId {
        self.steps.push(step);
        self.steps.len() - 1
    }

    pub fn revision(&self) -> u64 {
        self.revision
    }

    pub fn contradiction(&self) -> Option<(StepId, StepId)> {
        self.contradiction
    }

    pub fn has_contradiction(&self) -> bool {
        self.contradiction.is_some()
    }

    /// Record a contradiction justified by `src`.
    fn clash(&mut self, src: Vec<StepId>) {
        if self.contradiction.is_some() {
            return;
        }
        let mut src = src;
        src.sort_unstable();
        src.dedup();
        let pair = match src.as_slice() {
            [a] => (0, *a),
            [a, b] => (*a, *b),
            _ => {
                let id = self.add_step(Step::new("blackboard", "linear", src, Fact::absurd()));
                (0, id)
            }
        };
        self.contradiction = Some(pair);
        self.revision += 1;
    }

    /// Record `step`, whose fact must be absurd, as the contradiction.
    pub fn refute(&mut self, step: Step) -> Change {
        if self.contradiction.is_some() {
            return Change::Contradiction;
        }
        debug_assert!(step.fact.is_absurd());
        let id = self.add_step(step);
        self.contradiction = Some((0, id));
        self.revision += 1;
        Change::Contradiction
    }

    // ---- signs ----

    pub fn sign(&self, i: TermId) -> &SignInfo {
        &self.signs[i]
    }

    pub fn sign_of(&self, i: TermId) -> Sign {
        self.signs[i].sign()
    }

    // ---- contexts ----

    fn sign_rows(&self, i: TermId, slot: usize, out: &mut Vec<Row>) {
        let s = &self.signs[i];
        let mk = |sgn: i64, b: &Bound| {
            let c = Rat::from_integer(sgn.into());
            let (a, bb) = if slot == 0 {
                (c, Rat::zero())
            } else {
                (Rat::zero(), c)
            };
            Row {
                a,
                b: bb,
                kind: if b.strict { Kind::Gt } else { Kind::Ge },
                src: b.src.clone(),
            }
        };
        if let Some(b) = &s.lower {
            out.push(mk(1, b));
        }
        if let Some(b) = &s.upper {
            out.push(mk(-1, b));
        }
    }

    fn context(&self, lo: TermId, hi: TermId, skip: Option<usize>) -> Vec<Row> {
        let mut rows = Vec::new();
        if let Some(p) = self.pairs.get(&(lo, hi)) {
            for (k, f) in p.facts.iter().enumerate() {
                if Some(k) != skip {
                    rows.push(Row {
                        a: f.a.clone(),
                        b: f.b.clone(),
                        kind: f.kind,
                        src: vec![f.step],
                    });
                }
            }
        }
        if lo == 0 {
            rows.push(Row {
                a: Rat::one(),
                b: Rat::zero(),
                kind: Kind::Gt,
                src: vec![0],
            });
        } else {
            self.sign_rows(lo, 0, &mut rows);
            self.sign_rows(hi, 1, &mut rows);
        }
        rows
    }

    /// Premises entailing `c`, if the stored facts entail it.
    pub fn entails(&self, c: &Comparison) -> Option<Vec<StepId>> {
        if let Some(n) = self.trivial(c) {
            return if n { Some(vec![]) } else { None };
        }
        let (lo, hi, a, b, rel) = to_pair(c);
        let ctx = self.context(lo, hi, None);
        match rel {
            Rel::Gt => entails(&ctx, &a, &b, Kind::Gt),
            Rel::Ge => entails(&ctx, &a, &b, Kind::Ge),
            Rel::Eq => entails(&ctx, &a, &b, Kind::Eq),
            _ => {
                if let Some(s) = entails(&ctx, &a, &b, Kind::Gt) {
                    return Some(s);
                }
                if let Some(s) = entails(&ctx, &-a.clone(), &-b.clone(), Kind::Gt) {
                    return Some(s);
                }
                self.pairs.get(&(lo, hi)).and_then(|p| {
                    p.diseqs
                        .iter()
                        .find(|d| same_line(&d.a, &d.b, &a, &b))
                        .map(|d| vec![d.step])
                })
            }
        }
    }

    /// Premises refuting `c`.
    pub fn refutes(&self, c: &Comparison) -> Option<Vec<StepId>> {
        self.entails(&c.negated())
    }

    fn trivial(&self, c: &Comparison) -> Option<bool> {
        if c.lhs == 0 && (c.coeff.is_zero() || c.rhs == 0) {
            let r = c.coeff.clone();
            return Some(c.rel.holds(&Rat::one(), &r));
        }
        None
    }

    // ---- assertion ----

    /// Assert the comparison `c`, justified by `step` (whose fact is
    /// overwritten with `c`). The step is only recorded when `c` is not
    /// already entailed.
    pub fn assert_cmp(&mut self, c: &Comparison, mut step: Step) -> Change {
        if self.contradiction.is_some() {
            return Change::Contradiction;
        }
        step.fact = Fact::Cmp(c.clone());
        if let Some(holds) = self.trivial(c) {
            if holds {
                return Change::Redundant;
            }
            step.fact = Fact::absurd();
            return self.refute(step);
        }
        if self.entails(c).is_some() {
            return Change::Redundant;
        }
        let (lo, hi, a, b, rel) = to_pair(c);
        let id = self.add_step(step);
        self.store(lo, hi, a, b, rel, id)
    }

    /// Assert a normalized result.
    pub fn assert_norm(&mut self, n: &Norm, step: Step) -> Change {
        match n {
            Norm::True => Change::Redundant,
            Norm::False => {
                let mut step = step;
                step.fact = Fact::absurd();
                self.refute(step)
            }
            Norm::Cmp(c) => self.assert_cmp(c, step),
        }
    }

    fn store(&mut self, lo: TermId, hi: TermId, a: Rat, b: Rat, rel: Rel, id: StepId) -> Change {
        if lo != hi && !self.pairs.contains_key(&(lo, hi)) {
            self.pairs.insert((lo, hi), Pair::default());
            self.adj[lo].insert(hi);
            self.adj[hi].insert(lo);
        }
        self.revision += 1;
        let fact = Stored {
            a,
            b,
            kind: Kind::Ge,
            step: id,
        };
        let pair = self.pairs.get_mut(&(lo, hi)).expect("pair");
        if rel == Rel::Ne {
            pair.diseqs.push(fact);
        } else {
            let kind = match rel {
                Rel::Gt => Kind::Gt,
                Rel::Eq => Kind::Eq,
                _ => Kind::Ge,
            };
            pair.facts.push(Stored { kind, ..fact });
        }
        let before = self.pairs[&(lo, hi)].facts.len();
        self.process(lo, hi);
        if self.contradiction.is_some() {
            Change::Contradiction
        } else if self.pairs[&(lo, hi)].facts.len() < before {
            Change::Strengthened
        } else {
            Change::New
        }
    }

    fn process(&mut self, lo: TermId, hi: TermId) {
        if self.contradiction.is_some() {
            return;
        }
        let ctx = self.context(lo, hi, None);
        if let Some(src) = infeasible(&ctx) {
            self.clash(src);
            return;
        }
        self.form_equalities(lo, hi);
        self.minimize(lo, hi);
        let mut derived: Vec<(Comparison, &'static str, Vec<StepId>)> = Vec::new();
        let ctx = self.context(lo, hi, None);
        let diseqs = self
            .pairs
            .get(&(lo, hi))
            .map(|p| p.diseqs.clone())
            .unwrap_or_default();
        for d in &diseqs {
            let up = entails(&ctx, &d.a, &d.b, Kind::Ge);
            let down = entails(&ctx, &-d.a.clone(), &-d.b.clone(), Kind::Ge);
            match (up, down) {
                (Some(s1), Some(s2)) => {
                    let mut src = union(&s1, &s2);
                    src.push(d.step);
                    self.clash(src);
                    return;
                }
                (Some(s), None) => {
                    if let Norm::Cmp(c) = from_pair(lo, hi, &d.a, &d.b, Rel::Gt) {
                        derived.push((c, "diseq", union(&s, &[d.step])));
                    }
                }
                (None, Some(s)) => {
                    if let Norm::Cmp(c) = from_pair(lo, hi, &-d.a.clone(), &-d.b.clone(), Rel::Gt) {
                        derived.push((c, "diseq", union(&s, &[d.step])));
                    }
                }
                (None, None) => {}
            }
        }
        if lo == 0 {
            self.update_sign(hi, &ctx);
        } else {
            for (slot, v) in [(0usize, lo), (1usize, hi)] {
                let unit = |s: i64| {
                    let c = Rat::from_integer(s.into());
                    if slot == 0 {
                        (c, Rat::zero())
                    } else {
                        (Rat::zero(), c)
                    }
                };
                let cur = self.signs[v].clone();
                for dir in [1i64, -1] {
                    for strict in [true, false] {
                        let have =
                            SignInfo::strength(if dir > 0 { &cur.lower } else { &cur.upper });
                        let want = if strict { 2 } else { 1 };
                        if have >= want {
                            break;
                        }
                        let (a, b) = unit(dir);
                        let kind = if strict { Kind::Gt } else { Kind::Ge };
                        if let Some(src) = entails(&ctx, &a, &b, kind) {
                            let rel = match (dir > 0, strict) {
                                (true, true) => Rel::Gt,
                                (true, false) => Rel::Ge,
                                (false, true) => Rel::Lt,
                                (false, false) => Rel::Le,
                            };
                            derived.push((Comparison::sign(v, rel), "linear", src));
                            break;
                        }
                    }
                }
            }
        }
        for (c, rule, src) in derived {
            if self.contradiction.is_some() {
                return;
            }
            self.assert_cmp(&c, Step::new("blackboard", rule, src, Fact::absurd()));
        }
    }

    fn form_equalities(&mut self, lo: TermId, hi: TermId) {
        loop {
            let facts = match self.pairs.get(&(lo, hi)) {
                Some(p) => p.facts.clone(),
                None => return,
            };
            let ctx = self.context(lo, hi, None);
            let mut changed = false;
            for (k, f) in facts.iter().enumerate() {
                if f.kind == Kind::Eq {
                    continue;
                }
                if let Some(src) = entails(&ctx, &-f.a.clone(), &-f.b.clone(), Kind::Ge) {
                    let src = union(&src, &[f.step]);
                    if let Norm::Cmp(c) = from_pair(lo, hi, &f.a, &f.b, Rel::Eq) {
                        let id =
                            self.add_step(Step::new("blackboard", "linear", src, Fact::Cmp(c)));
                        let p = self.pairs.get_mut(&(lo, hi)).unwrap();
                        p.facts[k] = Stored {
                            a: f.a.clone(),
                            b: f.b.clone(),
                            kind: Kind::Eq,
                            step: id,
                        };
                        self.revision += 1;
                        changed = true;
                        break;
                    }
                }
            }
            if !changed {
                return;
            }
        }
    }

    fn minimize(&mut self, lo: TermId, hi: TermId) {
        loop {
            let facts = match self.pairs.get(&(lo, hi)) {
                Some(p) => p.facts.clone(),
                None => return,
            };
            let mut removed = false;
            for (k, f) in facts.iter().enumerate().rev() {
                let ctx = self.context(lo, hi, Some(k));
                if entails(&ctx, &f.a, &f.b, f.kind).is_some() {
                    self.pairs.get_mut(&(lo, hi)).unwrap().facts.remove(k);
                    removed = true;
                    break;
                }
            }
            if !removed {
                return;
            }
        }
    }

    fn update_sign(&mut self, i: TermId, ctx: &[Row]) {
        let bound = |dir: i64| -> Option<Bound> {
            let b = Rat::from_integer(dir.into());
            if let Some(src) = entails(ctx, &Rat::zero(), &b, Kind::Gt) {
                return Some(Bound { strict: true, src });
            }
            entails(ctx, &Rat::zero(), &b, Kind::Ge).map(|src| Bound { strict: false, src })
        };
        let lower = bound(1);
        let upper = bound(-1);
        let nonzero = self.pairs.get(&(0, i)).and_then(|p| {
            p.diseqs
                .iter()
                .find(|d| d.a.is_zero())
                .map(|d| vec![d.step])
        });
        let old = &self.signs[i];
        let changed = SignInfo::strength(&old.lower) != SignInfo::strength(&lower)
            || SignInfo::strength(&old.upper) != SignInfo::strength(&upper)
            || old.nonzero.is_some() != nonzero.is_some();
        if !changed {
            return;
        }
        self.signs[i] = SignInfo {
            lower,
            upper,
            nonzero,
        };
        self.revision += 1;
        let neighbours: Vec<TermId> = self.adj[i].iter().copied().filter(|k| *k != 0).collect();
        for k in neighbours {
            let (lo, hi) = if k < i { (k, i) } else { (i, k) };
            self.process(lo, hi);
            if self.contradiction.is_some() {
                return;
            }
        }
    }

    // ---- queries for modules ----

    /// All stored comparisons with the step that justifies each.
    pub fn comparisons(&self) -> Vec<(Comparison, StepId)> {
        let mut out = Vec::new();
        for (&(lo, hi), p) in &self.pairs {
            for f in &p.facts {
                if let Norm::Cmp(c) = from_pair(lo, hi, &f.a, &f.b, f.kind.rel()) {
                    out.push((c, f.step));
                }
            }
        }
        out
    }

    /// Stored disequalities.
    pub fn disequalities(&self) -> Vec<(Comparison, StepId)> {
        let mut out = Vec::new();
        for (&(lo, hi), p) in &self.pairs {
            for f in &p.diseqs {
                if let Norm::Cmp(c) = from_pair(lo, hi, &f.a, &f.b, Rel::Ne) {
                    out.push((c, f.step));
                }
            }
        }
        out
    }

    /// Stored facts between the two terms (in either order).
    pub fn pair_facts(&self, i: TermId, j: TermId) -> Vec<(Comparison, StepId)> {
        let key = if i < j { (i, j) } else { (j, i) };
        let mut out = Vec::new();
        if let Some(p) = self.pairs.get(&key) {
            for f in &p.facts {
                if let Norm::Cmp(c) = from_pair(key.0, key.1, &f.a, &f.b, f.kind.rel()) {
                    out.push((c, f.step));
                }
            }
        }
        out
    }

    /// The coefficients `c` for which `t_i dir c*t_j` is entailed.
    pub fn implied_range(&self, i: TermId, j: TermId, dir: Rel) -> CoeffRange {
        assert!(matches!(dir, Rel::Le | Rel::Ge) && i != j);
        let (lo, hi) = if i < j { (i, j) } else { (j, i) };
        let ctx: Vec<Row> = self
            .context(lo, hi, None)
            .into_iter()
            .map(|r| {
                if i == lo {
                    r
                } else {
                    Row {
                        a: r.b,
                        b: r.a,
                        ..r
                    }
                }
            })
            .collect();
        let mut cands: Vec<(Rat, Rat)> = vec![
            (Rat::one(), Rat::zero()),
            (-Rat::one(), Rat::zero()),
            (Rat::zero(), Rat::one()),
            (Rat::zero(), -Rat::one()),
        ];
        for r in &ctx {
            cands.push((r.b.clone(), -r.a.clone()));
            cands.push((-r.b.clone(), r.a.clone()));
        }
        let inside = |g: &(Rat, Rat)| {
            ctx.iter().all(|r| {
                let v = &r.a * &g.0 + &r.b * &g.1;
                if r.kind == Kind::Eq {
                    v.is_zero()
                } else {
                    !v.is_negative()
                }
            })
        };
        let mut range = CoeffRange {
            dir,
            empty: false,
            lo: None,
            hi: None,
            strict_lo: false,
            strict_hi: false,
            strict_interior: false,
        };
        for g in cands
            .iter()
            .filter(|g| !(g.0.is_zero() && g.1.is_zero()) && inside(g))
        {
            let (gu, gw) = g;
            if gw.is_zero() {
                let ok = if dir == Rel::Le {
                    !gu.is_positive()
                } else {
                    !gu.is_negative()
                };
                if !ok {
                    range.empty = true;
                }
                continue;
            }
            let ratio = gu / gw;
            let lower = (dir == Rel::Le) == gw.is_positive();
            if lower {
                if range.lo.as_ref().is_none_or(|l| *l < ratio) {
                    range.lo = Some(ratio);
                }
            } else if range.hi.as_ref().is_none_or(|h| *h > ratio) {
                range.hi = Some(ratio);
            }
        }
        if let (Some(l), Some(h)) = (&range.lo, &range.hi) {
            if l > h {
                range.empty = true;
            }
        }
        if range.empty {
            range.lo = None;
            range.hi = None;
            return range;
        }
        let strict_rel = if dir == Rel::Le { Rel::Lt } else { Rel::Gt };
        let strict_at = |c: &Rat| {
            let n = normalize(&[(i, Rat::one()), (j, -c.clone())], strict_rel).expect("two terms");
            match n {
                Norm::True => true,
                Norm::False => false,
                Norm::Cmp(cmp) => self.entails(&cmp).is_some(),
            }
        };
        if let Some(l) = &range.lo {
            range.strict_lo = strict_at(l);
        }
        if let Some(h) = &range.hi {
            range.strict_hi = strict_at(h);
        }
        let mid = match (&range.lo, &range.hi) {
            (Some(l), Some(h)) if l == h => None,
            (Some(l), Some(h)) => Some((l + h) / Rat::from_integer(2.into())),
            (Some(l), None) => Some(l + Rat::one()),
            (None, Some(h)) => Some(h - Rat::one()),
            (None, None) => Some(Rat::zero()),
        };
        range.strict_interior = match mid {
            Some(m) => strict_at(&m),
            None => range.strict_lo,
        };
        range
    }

    // ---- clauses ----

    /// Add a disjunction of literals justified by `step`.
    pub fn add_clause(&mut self, lits: &[Norm], mut step: Step) -> Change {
        if self.contradiction.is_some() {
            return Change::Contradiction;
        }
        if lits.contains(&Norm::True) {
            return Change::Redundant;
        }
        let mut cmps: Vec<Comparison> = lits
            .iter()
            .filter_map(|l| match l {
                Norm::Cmp(c) => Some(c.clone()),
                _ => None,
            })
            .collect();
        cmps.sort_by(|x, y| (x.lhs, x.rhs, x.rel, &x.coeff).cmp(&(y.lhs, y.rhs, y.rel, &y.coeff)));
        cmps.dedup();
        if !self.seen_clauses.insert(cmps.clone()) {
            return Change::Redundant;
        }
        if cmps.iter().any(|c| self.entails(c).is_some()) {
            return Change::Redundant;
        }
        step.fact = Fact::Clause(cmps.clone());
        let id = self.add_step(step);
        self.clauses.push(PendingClause {
            lits: cmps,
            step: id,
            refuters: Vec::new(),
        });
        self.revision += 1;
        let k = self.clauses.len() - 1;
        self.scan_clause(k);
        if self.contradiction.is_some() {
            Change::Contradiction
        } else {
            Change::New
        }
    }

    pub fn pending_clauses(&self) -> Vec<Vec<Comparison>> {
        self.clauses.iter().map(|c| c.lits.clone()).collect()
    }

    /// Returns true if the clause was consumed.
    fn scan_clause(&mut self, k: usize) -> bool {
        let cl = self.clauses[k].clone();
        let mut lits = Vec::new();
        let mut refuters = cl.refuters.clone();
        for l in &cl.lits {
            if self.entails(l).is_some() {
                self.clauses.remove(k);
                self.revision += 1;
                return true;
            }
            match self.refutes(l) {
                Some(src) => refuters = union(&refuters, &src),
                None => lits.push(l.clone()),
            }
        }
        let mut premises = vec![cl.step];
        premises.extend(&refuters);
        match lits.len() {
            0 => {
                self.clauses.remove(k);
                self.refute(Step::new("blackboard", "unit", premises, Fact::absurd()));
                true
            }
            1 => {
                self.clauses.remove(k);
                self.revision += 1;
                let l = lits.pop().unwrap();
                self.assert_cmp(
                    &l,
                    Step::new("blackboard", "unit", premises, Fact::absurd()),
                );
                true
            }
            _ => {
                if lits.len() < cl.lits.len() {
                    self.revision += 1;
                    self.clauses[k] = PendingClause {
                        lits,
                        step: cl.step,
                        refuters,
                    };
                }
                false
            }
        }
    }

    /// Re-examine every pending clause. Returns true if anything changed.
    pub fn scan_clauses(&mut self) -> bool {
        let start = self.revision;
        let mut k = 0;
        while k < self.clauses.len() && self.contradiction.is_none() {
            if !self.scan_clause(k) {
                k += 1;
            } else {
                k = 0;
            }
        }
        self.revision != start
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse::parse_expr;
    use crate::rat::rat;
    use crate::term::canonize;

    fn hyp() -> Step {
        Step::new("input", "hyp", vec![], Fact::absurd())
    }

    fn bb_with(n: usize) -> Blackboard {
        let mut bb = Blackboard::new();
        for k in 1..=n {
            bb.register(&Term::Var(format!("v{k:02}")));
        }
        bb
    }

    fn cmp(l: TermId, rel: Rel, c: i64, r: TermId) -> Comparison {
        Comparison::new(l, rel, rat(c), r)
    }

    #[test]
    fn shares_subterms() {
        let mut bb = Blackboard::new();
        let s = canonize(&parse_expr("x + y").unwrap()).unwrap();
        let f = canonize(&parse_expr("f(x + y)").unwrap()).unwrap();
        let i = bb.register(&s.term);
        let j = bb.register(&f.term);
        assert_eq!(bb.def(j), &Def::App("f".into(), vec![(rat(1), i)]));
        assert_eq!(bb.register(&Term::One), 0);
    }

    #[test]
    fn worked_registration() {
        let mut bb = Blackboard::new();
        let s = canonize(&parse_expr("3*(5*x + 3*y + 4*x*y)^2 * f(u+v)^-1").unwrap()).unwrap();
        let top = bb.register(&s.term);
        assert_eq!(top, 9);
        assert_eq!(bb.def(9), &Def::Prod(vec![(4, 2), (8, -1)]));
    }

    #[test]
    fn redundant_and_replacing() {
        let mut bb = bb_with(5);
        bb.assert_cmp(&cmp(3, Rel::Lt, 2, 5), hyp());
        bb.assert_cmp(&cmp(3, Rel::Le, 7, 5), hyp());
        assert_eq!(
            bb.assert_cmp(&cmp(3, Rel::Lt, 4, 5), hyp()),
            Change::Redundant
        );

        let mut bb = bb_with(5);
        bb.assert_cmp(&cmp(3, Rel::Lt, 2, 5), hyp());
        bb.assert_cmp(&cmp(3, Rel::Le, 3, 5), hyp());
        assert_eq!(
            bb.assert_cmp(&cmp(3, Rel::Lt, 4, 5), hyp()),
            Change::Strengthened
        );
        let facts: Vec<Comparison> = bb.pair_facts(3, 5).into_iter().map(|x| x.0).collect();
        assert_eq!(facts.len(), 2);
        assert!(facts.contains(&cmp(3, Rel::Lt, 2, 5)));
        assert!(facts.contains(&cmp(3, Rel::Lt, 4, 5)));
    }

    #[test]
    fn promotion_and_equality() {
        let mut bb = bb_with(5);
        bb.assert_cmp(&cmp(3, Rel::Le, 4, 5), hyp());
        bb.assert_cmp(&cmp(3, Rel::Ne, 4, 5), hyp());
        let facts: Vec<Comparison> = bb.pair_facts(3, 5).into_iter().map(|x| x.0).collect();
        assert_eq!(facts, vec![cmp(3, Rel::Lt, 4, 5)]);

        let mut bb = bb_with(5);
        bb.assert_cmp(&cmp(3, Rel::Le, 4, 5), hyp());
        bb.assert_cmp(&cmp(3, Rel::Ge, 4, 5), hyp());
        let facts: Vec<Comparison> = bb.pair_facts(3, 5).into_iter().map(|x| x.0).collect();
        assert_eq!(facts, vec![cmp(3, Rel::Eq, 4, 5)]);
    }

    #[test]
    fn signs() {
        let mut bb = bb_with(2);
        assert_eq!(bb.sign_of(1), Sign::Unknown);
        bb.assert_cmp(&Comparison::sign(1, Rel::Gt), hyp());
        assert_eq!(bb.sign_of(1), Sign::Pos);
        bb.assert_cmp(&Comparison::sign(2, Rel::Ge), hyp());
        bb.assert_cmp(&Comparison::sign(2, Rel::Ne), hyp());
        assert_eq!(bb.sign_of(2), Sign::Pos);
        let mut bb = bb_with(2);
        bb.assert_cmp(&cmp(1, Rel::Gt, 3, 0), hyp());
        assert_eq!(bb.sign_of(1), Sign::Pos);
    }

    #[test]
    fn sign_cascade() {
        let mut bb = bb_with(3);
        bb.assert_cmp(&cmp(1, Rel::Gt, 1, 2), hyp());
        bb.assert_cmp(&Comparison::sign(2, Rel::Gt), hyp());
        assert_eq!(bb.sign_of(1), Sign::Pos);
    }

    #[test]
    fn contradictions() {
        let mut bb = bb_with(1);
        bb.assert_cmp(&Comparison::sign(1, Rel::Gt), hyp());
        assert!(!bb.has_contradiction());
        assert_eq!(
            bb.assert_cmp(&Comparison::sign(1, Rel::Le), hyp()),
            Change::Contradiction
        );
        assert_eq!(bb.contradiction(), Some((1, 2)));

        let mut bb = bb_with(1);
        let c = Comparison::new(0, Rel::Lt, rat(0), 0);
        assert_eq!(bb.assert_cmp(&c, hyp()), Change::Contradiction);
    }

    #[test]
    fn ranges() {
        let mut bb = bb_with(2);
        bb.assert_cmp(&Comparison::sign(2, Rel::Gt), hyp());
        bb.assert_cmp(&cmp(1, Rel::Le, 2, 2), hyp());
        let r = bb.implied_range(1, 2, Rel::Le);
        assert_eq!((r.lo, r.hi, r.empty), (Some(rat(2)), None, false));
        assert!(!r.strict_lo && r.strict_interior);

        let mut bb = bb_with(2);
        bb.assert_cmp(&cmp(1, Rel::Eq, 3, 2), hyp());
        let r = bb.implied_range(1, 2, Rel::Le);
        assert_eq!(
            (r.lo, r.hi, r.strict_lo),
            (Some(rat(3)), Some(rat(3)), false)
        );

        let bb = bb_with(2);
        assert!(bb.implied_range(1, 2, Rel::Le).empty);
    }

    #[test]
    fn clauses() {
        let mut bb = bb_with(4);
        bb.assert_cmp(&cmp(1, Rel::Lt, 1, 2), hyp());
        let lits = [
            Norm::Cmp(cmp(1, Rel::Gt, 1, 2)),
            Norm::Cmp(cmp(3, Rel::Le, 1, 4)),
        ];
        bb.add_clause(&lits, hyp());
        assert!(bb.entails(&cmp(3, Rel::Le, 1, 4)).is_some());

        let mut bb = bb_with(1);
        bb.add_clause(&[Norm::Cmp(Comparison::sign(1, Rel::Gt))], hyp());
        assert_eq!(bb.sign_of(1), Sign::Pos);

        let mut bb = bb_with(4);
        bb.assert_cmp(&cmp(1, Rel::Le, 1, 2), hyp());
        let lits = [
            Norm::Cmp(cmp(1, Rel::Le, 1, 2)),
            Norm::Cmp(cmp(3, Rel::Le, 1, 4)),
        ];
        assert_eq!(bb.add_clause(&lits, hyp()), Change::Redundant);
        assert!(bb.pending_clauses().is_empty());
    }
}
