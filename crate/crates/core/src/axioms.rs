//! Universally quantified axioms over uninterpreted functions.
//!
//! Axioms are turned into clauses. Every clause needs function applications
//! mentioning its variables (triggers); instances are found by matching the
//! triggers against registered applications, up to the linear equalities
//! known to the blackboard.

use std::collections::{BTreeMap, BTreeSet, HashSet};

use num_traits::{One, Zero};
use thiserror::Error;

use crate::blackboard::{Blackboard, Change, Def};
use crate::comparison::{normalize, Norm, Rel, TermId};
use crate::parse::{AxiomDecl, Formula};
use crate::proof::{Detail, Fact, Step, StepId};
use crate::rat::Rat;
use crate::term::{canonize, Expr, STerm, Term};

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Literal {
    pub lhs: Expr,
    pub rel: Rel,
    pub rhs: Expr,
}

impl Literal {
    pub fn negated(&self) -> Literal {
        Literal {
            lhs: self.lhs.clone(),
            rel: self.rel.negate(),
            rhs: self.rhs.clone(),
        }
    }

    /// `lhs - rhs`.
    pub fn difference(&self) -> Expr {
        Expr::sub(self.lhs.clone(), self.rhs.clone())
    }
}

const MAX_CLAUSES: usize = 256;

/// Conjunctive normal form. `None` if it would have too many clauses.
pub fn clausify(f: &Formula) -> Option<Vec<Vec<Literal>>> {
    cnf(f, true)
}

fn cnf(f: &Formula, pos: bool) -> Option<Vec<Vec<Literal>>> {
    match (f, pos) {
        (Formula::Atom(a, r, b), _) => {
            let rel = if pos { *r } else { r.negate() };
            Some(vec![vec![Literal {
                lhs: a.clone(),
                rel,
                rhs: b.clone(),
            }]])
        }
        (Formula::Not(g), _) => cnf(g, !pos),
        (Formula::And(gs), true) | (Formula::Or(gs), false) => {
            let mut out = Vec::new();
            for g in gs {
                out.extend(cnf(g, pos)?);
                if out.len() > MAX_CLAUSES {
                    return None;
                }
            }
            Some(out)
        }
        (Formula::Or(gs), true) | (Formula::And(gs), false) => {
            let mut out: Vec<Vec<Literal>> = vec![vec![]];
            for g in gs {
                let part = cnf(g, pos)?;
                let mut next = Vec::new();
                for a in &out {
                    for b in &part {
                        let mut c = a.clone();
                        c.extend(b.iter().cloned());
                        next.push(c);
                    }
                }
                if next.len() > MAX_CLAUSES {
                    return None;
                }
                out = next;
            }
            Some(out)
        }
        (Formula::Implies(a, b), true) => cnf(
            &Formula::Or(vec![Formula::Not(a.clone()), (**b).clone()]),
            true,
        ),
        (Formula::Implies(a, b), false) => cnf(
            &Formula::And(vec![(**a).clone(), Formula::Not(b.clone())]),
            true,
        ),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AxiomError {
    #[error("axiom clause `{0}` has no function application to trigger on")]
    NoTrigger(String),
    #[error("variable {1} of axiom clause `{0}` does not occur inside a function application")]
    Unpinned(String, String),
    #[error("axiom has too many clauses")]
    TooLarge,
    #[error("axiom cannot be canonized: {0}")]
    Term(String),
}

#[derive(Debug, Clone)]
pub struct Clause {
    /// Literals with variables renamed to `?name`.
    pub lits: Vec<Literal>,
    pub vars: BTreeSet<String>,
    /// Maximal applications containing variables.
    pub triggers: Vec<Term>,
}

#[derive(Debug, Clone)]
pub struct Axiom {
    pub text: String,
    pub clauses: Vec<Clause>,
}

fn is_pattern_var(v: &str) -> bool {
    v.starts_with('?')
}

fn pattern_vars(t: &Term) -> BTreeSet<String> {
    t.vars().into_iter().filter(|v| is_pattern_var(v)).collect()
}

fn show_clause(lits: &[Literal]) -> String {
    let parts: Vec<String> = lits
        .iter()
        .map(|l| format!("{} {} {}", l.lhs, l.rel, l.rhs).replace('?', ""))
        .collect();
    parts.join(" or ")
}

/// Collect the maximal applications containing pattern variables.
fn collect_triggers(t: &Term, out: &mut Vec<Term>) {
    match t {
        Term::App(..) if !pattern_vars(t).is_empty() => {
            if !out.contains(t) {
                out.push(t.clone());
            }
        }
        Term::One | Term::Var(_) | Term::App(..) => {}
        Term::Sum(xs) => xs.iter().for_each(|s| collect_triggers(&s.term, out)),
        Term::Prod(fs) => fs.iter().for_each(|(b, _)| collect_triggers(b, out)),
    }
}

/// Variables of `t` occurring inside some application.
fn pinned_vars(t: &Term, inside: bool, out: &mut BTreeSet<String>) {
    match t {
        Term::Var(v) if inside && is_pattern_var(v) => {
            out.insert(v.clone());
        }
        Term::One | Term::Var(_) => {}
        Term::Sum(xs) => xs.iter().for_each(|s| pinned_vars(&s.term, inside, out)),
        Term::Prod(fs) => fs.iter().for_each(|(b, _)| pinned_vars(b, inside, out)),
        Term::App(_, xs) => xs.iter().for_each(|s| pinned_vars(&s.term, true, out)),
    }
}

pub fn prepare(decl: &AxiomDecl) -> Result<Axiom, AxiomError> {
    let rename: BTreeMap<String, Expr> = decl
        .vars
        .iter()
        .map(|v| (v.clone(), Expr::var(&format!("?{v}"))))
        .collect();
    let clauses = clausify(&decl.body).ok_or(AxiomError::TooLarge)?;
    let mut out = Vec::new();
    for lits in clauses {
        let lits: Vec<Literal> = lits
            .into_iter()
            .map(|l| Literal {
                lhs: l.lhs.substitute(&rename),
                rel: l.rel,
                rhs: l.rhs.substitute(&rename),
            })
            .collect();
        let mut triggers = Vec::new();
        let mut vars = BTreeSet::new();
        let mut pinned = BTreeSet::new();
        for l in &lits {
            let d = canonize(&l.difference()).map_err(|e| AxiomError::Term(e.to_string()))?;
            collect_triggers(&d.term, &mut triggers);
            vars.extend(pattern_vars(&d.term));
            pinned_vars(&d.term, false, &mut pinned);
        }
        if triggers.is_empty() {
            return Err(AxiomError::NoTrigger(show_clause(&lits)));
        }
        if let Some(v) = vars.iter().find(|v| !pinned.contains(*v)) {
            return Err(AxiomError::Unpinned(show_clause(&lits), v[1..].to_string()));
        }
        out.push(Clause {
            lits,
            vars,
            triggers,
        });
    }
    Ok(Axiom {
        text: format!("forall {}. {}", decl.vars.join(" "), decl.body),
        clauses: out,
    })
}

// ---- equalities ----

type Lin = BTreeMap<TermId, Rat>;

#[derive(Debug, Clone, Default)]
struct Row {
    lin: Lin,
    steps: BTreeSet<StepId>,
    defs: BTreeSet<TermId>,
}

/// Fully reduced basis of the linear equalities known to the blackboard:
/// sum definitions and stored equalities between terms.
#[derive(Debug, Clone, Default)]
pub struct Basis {
    rows: Vec<(TermId, Row)>,
}

fn axpy(l: &mut Lin, a: &Rat, x: &Lin) {
    for (k, v) in x {
        let e = l.entry(*k).or_insert_with(Rat::zero);
        *e += a * v;
        if e.is_zero() {
            l.remove(k);
        }
    }
}

impl Basis {
    pub fn new(bb: &Blackboard) -> Basis {
        let mut b = Basis::default();
        for t in 1..bb.num_terms() {
            if let Def::Sum(xs) = bb.def(t) {
                let mut lin: Lin = xs.iter().map(|(c, i)| (*i, -c)).collect();
                *lin.entry(t).or_insert_with(Rat::zero) += Rat::one();
                b.add(Row {
                    lin,
                    steps: BTreeSet::new(),
                    defs: BTreeSet::from([t]),
                });
            }
        }
        for (c, step) in bb.comparisons() {
            if c.rel == Rel::Eq {
                let (lin, _) = c.linear();
                b.add(Row {
                    lin: lin.into_iter().filter(|(_, v)| !v.is_zero()).collect(),
                    steps: BTreeSet::from([step]),
                    defs: BTreeSet::new(),
                });
            }
        }
        b
    }

    fn reduce(&self, mut r: Row) -> Row {
        for (p, row) in &self.rows {
            if let Some(a) = r.lin.get(p).cloned() {
                axpy(&mut r.lin, &-a, &row.lin);
                r.steps.extend(row.steps.iter().copied());
                r.defs.extend(row.defs.iter().copied());
            }
        }
        r
    }

    fn add(&mut self, r: Row) {
        let mut r = self.reduce(r);
        let Some((&p, a)) = r.lin.iter().next_back() else {
            return;
        };
        let inv = a.recip();
        for v in r.lin.values_mut() {
            *v *= &inv;
        }
        for (_, row) in self.rows.iter_mut() {
            if let Some(a) = row.lin.get(&p).cloned() {
                axpy(&mut row.lin, &-a, &r.lin);
                row.steps.extend(r.steps.iter().copied());
                row.defs.extend(r.defs.iter().copied());
            }
        }
        r.lin.retain(|_, v| !v.is_zero());
        self.rows.push((p, r));
    }

    /// Premises showing `l = 0`, if it follows.
    fn zero(&self, l: Lin) -> Option<(BTreeSet<StepId>, BTreeSet<TermId>)> {
        let r = self.reduce(Row {
            lin: l,
            ..Row::default()
        });
        r.lin.is_empty().then_some((r.steps, r.defs))
    }
}

/// The s-term as a linear combination of registered terms.
fn lin_of(bb: &Blackboard, s: &STerm) -> Option<Lin> {
    if s.coeff.is_zero() {
        return Some(Lin::new());
    }
    if let Some(i) = bb.lookup(&s.term) {
        return Some(Lin::from([(i, s.coeff.clone())]));
    }
    if let Term::Sum(xs) = &s.term {
        let mut l = Lin::new();
        for x in xs {
            let i = bb.lookup(&x.term)?;
            axpy(
                &mut l,
                &(&s.coeff * &x.coeff),
                &Lin::from([(i, Rat::one())]),
            );
        }
        return Some(l);
    }
    None
}

// ---- matching ----

pub type Subst = BTreeMap<String, STerm>;

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Match {
    pub subst: Subst,
    /// Registered application matched by each trigger.
    pub targets: Vec<TermId>,
    pub steps: BTreeSet<StepId>,
    pub defs: BTreeSet<TermId>,
}

const MAX_MATCHES: usize = 1000;
const MAX_GROUPED: usize = 8;

/// Substitute an assignment into a pattern and canonize.
pub fn instantiate(p: &STerm, subst: &Subst) -> Option<STerm> {
    let map: BTreeMap<String, Expr> = subst
        .iter()
        .map(|(k, v)| (k.clone(), v.to_expr()))
        .collect();
    canonize(&p.to_expr().substitute(&map)).ok()
}

fn unbound(t: &Term, m: &Match) -> Vec<String> {
    pattern_vars(t)
        .into_iter()
        .filter(|v| !m.subst.contains_key(v))
        .collect()
}

fn div(s: &STerm, a: &Rat) -> STerm {
    s.scale(&a.recip())
}

struct Matcher<'a> {
    bb: &'a Blackboard,
    basis: &'a Basis,
}

impl Matcher<'_> {
    fn equal(&self, s: &STerm, t: &STerm, m: &Match) -> Option<Match> {
        if s == t {
            return Some(m.clone());
        }
        let mut l = lin_of(self.bb, s)?;
        axpy(&mut l, &-Rat::one(), &lin_of(self.bb, t)?);
        let (steps, defs) = self.basis.zero(l)?;
        let mut m = m.clone();
        m.steps.extend(steps);
        m.defs.extend(defs);
        Some(m)
    }

    fn bind(&self, m: &Match, v: &str, val: STerm) -> Match {
        let mut m = m.clone();
        m.subst.insert(v.to_string(), val);
        m
    }

    /// Match pattern `p` against the value `t`.
    fn sterm(&self, p: &STerm, t: &STerm, m: &Match) -> Vec<Match> {
        let free = unbound(&p.term, m);
        if free.is_empty() {
            return instantiate(p, &m.subst)
                .and_then(|s| self.equal(&s, t, m))
                .into_iter()
                .collect();
        }
        match &p.term {
            Term::Var(v) => vec![self.bind(m, v, div(t, &p.coeff))],
            Term::App(f, pargs) => match &t.term {
                Term::App(g, targs)
                    if f == g && pargs.len() == targs.len() && p.coeff == t.coeff =>
                {
                    self.args(pargs, targs, m)
                }
                _ => vec![],
            },
            Term::Sum(xs) => self.sum(p, xs, t, m),
            Term::Prod(fs) => self.prod(p, fs, t, m),
            Term::One => vec![],
        }
    }

    fn args(&self, ps: &[STerm], ts: &[STerm], m: &Match) -> Vec<Match> {
        let mut cur = vec![m.clone()];
        for (p, t) in ps.iter().zip(ts) {
            let mut next = Vec::new();
            for m in &cur {
                next.extend(self.sterm(p, t, m));
                if next.len() > MAX_MATCHES {
                    break;
                }
            }
            cur = next;
        }
        cur
    }

    fn sum(&self, p: &STerm, xs: &[STerm], t: &STerm, m: &Match) -> Vec<Match> {
        let mut rest = Vec::new();
        let mut free_vars: Vec<(String, Rat)> = Vec::new();
        let mut complex = Vec::new();
        for x in xs {
            let x = x.scale(&p.coeff);
            match &x.term {
                _ if unbound(&x.term, m).is_empty() => rest.push(x),
                Term::Var(v) => free_vars.push((v.clone(), x.coeff.clone())),
                _ => complex.push(x),
            }
        }
        let mut parts: Vec<Expr> = vec![t.to_expr()];
        for r in &rest {
            match instantiate(r, &m.subst) {
                Some(s) => parts.push(Expr::neg(s.to_expr())),
                None => return vec![],
            }
        }
        let Ok(residue) = canonize(&Expr::Add(parts)) else {
            return vec![];
        };
        match (free_vars.len(), complex.len()) {
            (0, 1) => self.sterm(&complex[0], &residue, m),
            (1, 0) => vec![self.bind(m, &free_vars[0].0, div(&residue, &free_vars[0].1))],
            (k, 0) if k >= 2 => self.group(&free_vars, &residue, m),
            _ => vec![],
        }
    }

    /// Distribute the summands of `r` over the free variables, each getting
    /// at least one.
    fn group(&self, vars: &[(String, Rat)], r: &STerm, m: &Match) -> Vec<Match> {
        let summands: Vec<STerm> = match &r.term {
            Term::Sum(xs) => xs.iter().map(|x| x.scale(&r.coeff)).collect(),
            _ => vec![r.clone()],
        };
        let (n, k) = (summands.len(), vars.len());
        if n < k || n > MAX_GROUPED {
            return vec![];
        }
        let mut out = Vec::new();
        let total = k.pow(n as u32);
        for code in 0..total {
            let mut groups: Vec<Vec<Expr>> = vec![vec![]; k];
            let mut c = code;
            for s in &summands {
                groups[c % k].push(s.to_expr());
                c /= k;
            }
            if groups.iter().any(|g| g.is_empty()) {
                continue;
            }
            let mut mm = m.clone();
            let mut ok = true;
            for ((v, a), g) in vars.iter().zip(groups) {
                match canonize(&Expr::Add(g)) {
                    Ok(s) => {
                        mm.subst.insert(v.clone(), div(&s, a));
                    }
                    Err(_) => ok = false,
                }
            }
            if ok {
                out.push(mm);
            }
        }
        out
    }

    fn prod(&self, p: &STerm, fs: &[(Term, i64)], t: &STerm, m: &Match) -> Vec<Match> {
        let tf: Vec<(Term, i64)> = match &t.term {
            Term::Prod(gs) => gs.clone(),
            Term::One => vec![],
            other => vec![(other.clone(), 1)],
        };
        let mut remaining = tf;
        let mut free = Vec::new();
        for (b, e) in fs {
            if unbound(b, m).is_empty() {
                let Some(s) = instantiate(&STerm::of(b.clone()), &m.subst) else {
                    return vec![];
                };
                if !s.coeff.is_one() {
                    return vec![];
                }
                match remaining.iter().position(|(g, f)| *g == s.term && f == e) {
                    Some(k) => {
                        remaining.remove(k);
                    }
                    None => return vec![],
                }
            } else if let (Term::Var(v), 1) = (b, e) {
                free.push(v.clone());
            } else {
                return vec![];
            }
        }
        let coeff = &t.coeff / &p.coeff;
        let (n, k) = (remaining.len(), free.len());
        if k == 0 || n < k || n > MAX_GROUPED {
            return vec![];
        }
        let mut out = Vec::new();
        for code in 0..k.pow(n as u32) {
            let mut groups: Vec<Vec<(Term, i64)>> = vec![vec![]; k];
            let mut c = code;
            for f in &remaining {
                groups[c % k].push(f.clone());
                c /= k;
            }
            if groups.iter().any(|g| g.is_empty()) {
                continue;
            }
            let mut mm = m.clone();
            for (idx, (v, g)) in free.iter().zip(groups).enumerate() {
                let term = if g.len() == 1 && g[0].1 == 1 {
                    g[0].0.clone()
                } else {
                    Term::Prod(g)
                };
                let c = if idx == 0 { coeff.clone() } else { Rat::one() };
                mm.subst.insert(v.clone(), STerm::new(c, term));
            }
            out.push(mm);
        }
        out
    }
}

/// All assignments under which every trigger of the clause matches a
/// registered application.
pub fn match_triggers(cl: &Clause, bb: &Blackboard) -> Vec<Match> {
    match_with(cl, bb, &Basis::new(bb))
}

fn match_with(cl: &Clause, bb: &Blackboard, basis: &Basis) -> Vec<Match> {
    let matcher = Matcher { bb, basis };
    let apps: Vec<(TermId, &Term)> = (1..bb.num_terms())
        .map(|i| (i, bb.term(i)))
        .filter(|(_, t)| t.is_app())
        .collect();
    let mut cur = vec![Match::default()];
    for trig in &cl.triggers {
        let Term::App(f, pargs) = trig else { continue };
        let mut next = Vec::new();
        for m in &cur {
            for (id, t) in &apps {
                let Term::App(g, targs) = t else { continue };
                if f != g || pargs.len() != targs.len() {
                    continue;
                }
                for mut mm in matcher.args(pargs, targs, m) {
                    mm.targets.push(*id);
                    next.push(mm);
                }
            }
            if next.len() > MAX_MATCHES {
                next.truncate(MAX_MATCHES);
                break;
            }
        }
        cur = next;
    }
    cur.retain(|m| cl.vars.iter().all(|v| m.subst.contains_key(v)));
    cur
}

// ---- instances ----

/// `Expr` for a term with some subterms replaced.
fn rebuild(t: &Term, swap: &dyn Fn(&Term) -> Option<Expr>) -> Expr {
    if let Some(e) = swap(t) {
        return e;
    }
    let st = |s: &STerm| {
        let inner = rebuild(&s.term, swap);
        if s.term == Term::One {
            Expr::Num(s.coeff.clone())
        } else if s.coeff.is_one() {
            inner
        } else {
            Expr::Mul(vec![Expr::Num(s.coeff.clone()), inner])
        }
    };
    match t {
        Term::One => Expr::num(1),
        Term::Var(v) => Expr::Var(v.clone()),
        Term::Sum(xs) => Expr::Add(xs.iter().map(st).collect()),
        Term::Prod(fs) => Expr::Mul(
            fs.iter()
                .map(|(b, e)| Expr::pow(rebuild(b, swap), *e))
                .collect(),
        ),
        Term::App(f, xs) => Expr::App(f.clone(), xs.iter().map(st).collect()),
    }
}

/// Canonical `lhs - rhs` of an instance literal, with applications that
/// match a trigger only up to equalities replaced by their targets.
pub fn instance_difference(
    lit: &Literal,
    cl: &Clause,
    m: &Match,
    bb: &Blackboard,
) -> Option<STerm> {
    let map: BTreeMap<String, Expr> = m
        .subst
        .iter()
        .map(|(k, v)| (k.clone(), v.to_expr()))
        .collect();
    let d = canonize(&lit.difference().substitute(&map)).ok()?;
    let mut swaps: Vec<(Term, Term)> = Vec::new();
    for (trig, id) in cl.triggers.iter().zip(&m.targets) {
        let inst = instantiate(&STerm::of(trig.clone()), &m.subst)?;
        let target = bb.term(*id);
        if inst.term != *target {
            swaps.push((inst.term, target.clone()));
        }
    }
    if swaps.is_empty() {
        return Some(d);
    }
    let e = rebuild(&d.term, &|t| {
        swaps.iter().find(|(a, _)| a == t).map(|(_, b)| b.to_expr())
    });
    let s = canonize(&e).ok()?;
    Some(s.scale(&d.coeff))
}

/// Turn `d rel 0` into a normalized comparison, registering the terms
/// involved. A sum with more than two summands besides a constant becomes
/// a single new term compared with the constant.
pub fn literal_norm(bb: &mut Blackboard, d: &STerm, rel: Rel) -> Option<Norm> {
    if d.is_constant() {
        return Some(if rel.holds(&d.coeff, &Rat::zero()) {
            Norm::True
        } else {
            Norm::False
        });
    }
    let Term::Sum(xs) = &d.term else {
        let i = bb.register(&d.term);
        return normalize(&[(i, d.coeff.clone())], rel);
    };
    if xs.len() <= 2 {
        let lin: Vec<(TermId, Rat)> = xs
            .iter()
            .map(|x| (bb.register(&x.term), &d.coeff * &x.coeff))
            .collect();
        return normalize(&lin, rel);
    }
    let k: Rat = xs
        .iter()
        .filter(|x| x.term == Term::One)
        .map(|x| &d.coeff * &x.coeff)
        .sum();
    let rest = canonize(&Expr::Add(
        xs.iter()
            .filter(|x| x.term != Term::One)
            .map(|x| x.scale(&d.coeff).to_expr())
            .collect(),
    ))
    .ok()?;
    let i = bb.register(&rest.term);
    normalize(&[(i, rest.coeff.clone()), (0, k)], rel)
}

/// Axioms and the instances already produced.
#[derive(Debug, Clone, Default)]
pub struct AxiomModule {
    pub axioms: Vec<Axiom>,
    seen: HashSet<(usize, usize, Vec<(String, STerm)>)>,
}

impl AxiomModule {
    pub fn new() -> AxiomModule {
        AxiomModule::default()
    }

    pub fn add(&mut self, ax: Axiom) -> usize {
        if let Some(k) = self.axioms.iter().position(|a| a.text == ax.text) {
            return k;
        }
        self.axioms.push(ax);
        self.axioms.len() - 1
    }

    /// Instantiate every clause against the current terms. Returns the
    /// number of new clauses sent to the blackboard.
    pub fn run(&mut self, bb: &mut Blackboard) -> usize {
        let basis = Basis::new(bb);
        let mut todo = Vec::new();
        for (a, ax) in self.axioms.iter().enumerate() {
            for (c, cl) in ax.clauses.iter().enumerate() {
                for m in match_with(cl, bb, &basis) {
                    let key: Vec<(String, STerm)> = m
                        .subst
                        .iter()
                        .map(|(k, v)| (k.clone(), v.clone()))
                        .collect();
                    if self.seen.insert((a, c, key)) {
                        todo.push((a, c, m));
                    }
                }
            }
        }
        let mut added = 0;
        for (a, c, m) in todo {
            if bb.has_contradiction() {
                break;
            }
            let cl = &self.axioms[a].clauses[c];
            let mut lits = Vec::new();
            let mut ok = true;
            for l in &cl.lits {
                match instance_difference(l, cl, &m, bb).and_then(|d| literal_norm(bb, &d, l.rel)) {
                    Some(n) => lits.push(n),
                    None => ok = false,
                }
            }
            if !ok {
                continue;
            }
            let subst = m
                .subst
                .iter()
                .map(|(k, v)| (k[1..].to_string(), v.clone()))
                .collect();
            let step = Step::new(
                "axioms",
                "instance",
                m.steps.iter().copied().collect(),
                Fact::Clause(vec![]),
            )
            .with_defs(m.defs.iter().copied().collect())
            .with_detail(Detail::Instance {
                axiom: a,
                clause: c,
                subst,
                targets: m.targets.clone(),
            });
            if matches!(
                bb.add_clause(&lits, step),
                Change::New | Change::Contradiction
            ) {
                added += 1;
            }
        }
        added
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::comparison::Comparison;
    use crate::parse::{parse_expr, parse_problem};
    use crate::rat::rat;

    fn axiom(text: &str) -> Result<Axiom, AxiomError> {
        let p = parse_problem(&format!("axiom {text}\n")).unwrap();
        prepare(&p.axioms[0])
    }

    fn reg(bb: &mut Blackboard, s: &str) -> TermId {
        let t = canonize(&parse_expr(s).unwrap()).unwrap();
        bb.register(&t.term)
    }

    fn hyp() -> Step {
        Step::new("input", "hyp", vec![], Fact::absurd())
    }

    #[test]
    fn clauses_and_triggers() {
        let ax = axiom("forall x y. x <= y -> f(x) <= f(y)").unwrap();
        assert_eq!(ax.clauses.len(), 1);
        let cl = &ax.clauses[0];
        assert_eq!(cl.lits.len(), 2);
        assert_eq!(cl.lits[0].rel, Rel::Gt);
        assert_eq!(cl.triggers.len(), 2);
        let ax = axiom("forall x. f(x) <= 1").unwrap();
        assert_eq!(ax.clauses[0].triggers.len(), 1);
        assert!(matches!(
            axiom("forall x y. x < y"),
            Err(AxiomError::NoTrigger(_))
        ));
        assert!(
            matches!(axiom("forall x y. f(x) < y"), Err(AxiomError::Unpinned(_, v)) if v == "y")
        );
    }

    #[test]
    fn cnf_distribution() {
        let p = parse_problem("hyp (a < 1 and b < 1) or c < 1\n").unwrap();
        let cs = clausify(&p.hyps[0]).unwrap();
        assert_eq!(cs.len(), 2);
        assert!(cs.iter().all(|c| c.len() == 2));
        let p = parse_problem("hyp not (a < 1 -> b < 1)\n").unwrap();
        let cs = clausify(&p.hyps[0]).unwrap();
        assert_eq!(cs.len(), 2);
        assert_eq!(cs[1][0].rel, Rel::Ge);
    }

    #[test]
    fn direct_and_mismatch() {
        let mut bb = Blackboard::new();
        let t = reg(&mut bb, "f(a)");
        let ax = axiom("forall x. f(x) <= 1").unwrap();
        let ms = match_triggers(&ax.clauses[0], &bb);
        assert_eq!(ms.len(), 1);
        assert_eq!(ms[0].targets, vec![t]);
        assert_eq!(
            ms[0].subst["?x"],
            canonize(&parse_expr("a").unwrap()).unwrap()
        );
        let ax = axiom("forall x. g(x) <= 1").unwrap();
        assert!(match_triggers(&ax.clauses[0], &bb).is_empty());
    }

    #[test]
    fn match_modulo_equalities() {
        // t6 = f(t1 + t4) with t1 = t2 + t3, t4 = 2 t3 - t5.
        let mut bb = Blackboard::new();
        let t = reg(&mut bb, "f(b + 3*c - e)");
        let ax = axiom("forall x y. f(x + y) >= 0").unwrap();
        let ms = match_triggers(&ax.clauses[0], &bb);
        let want_x = canonize(&parse_expr("b - e").unwrap()).unwrap();
        let want_y = canonize(&parse_expr("3*c").unwrap()).unwrap();
        assert!(ms
            .iter()
            .any(|m| m.subst["?x"] == want_x && m.subst["?y"] == want_y && m.targets == vec![t]));
        // A stored equality lets f(u) match f(v).
        let mut bb = Blackboard::new();
        let fu = reg(&mut bb, "f(u)");
        let (u, v) = (reg(&mut bb, "u"), reg(&mut bb, "v"));
        bb.assert_cmp(&Comparison::new(u, Rel::Eq, rat(1), v), hyp());
        let ax = axiom("forall x y. f(x) = f(y) + g(y)").unwrap();
        reg(&mut bb, "g(v)");
        let ms = match_triggers(&ax.clauses[0], &bb);
        assert!(ms.iter().any(|m| m.targets[0] == fu));
        let _ = v;
    }

    #[test]
    fn instances_are_asserted_once() {
        let mut bb = Blackboard::new();
        let fx = reg(&mut bb, "f(x)");
        let fy = reg(&mut bb, "f(y)");
        let (x, y) = (reg(&mut bb, "x"), reg(&mut bb, "y"));
        bb.assert_cmp(&Comparison::new(x, Rel::Lt, rat(1), y), hyp());
        let mut am = AxiomModule::new();
        am.add(axiom("forall x y. x <= y -> f(x) <= f(y)").unwrap());
        assert!(am.run(&mut bb) > 0);
        assert!(bb
            .entails(&Comparison::new(fx, Rel::Le, rat(1), fy))
            .is_some());
        assert_eq!(am.run(&mut bb), 0);
    }

    #[test]
    fn subadditive_registers_sum() {
        let mut bb = Blackboard::new();
        reg(&mut bb, "f(a + b)");
        reg(&mut bb, "f(a)");
        reg(&mut bb, "f(b)");
        let n = bb.num_terms();
        let mut am = AxiomModule::new();
        am.add(axiom("forall x y. f(x + y) <= f(x) + f(y)").unwrap());
        am.run(&mut bb);
        assert!(bb.num_terms() > n);
        let d = canonize(&parse_expr("f(a + b) - f(a) - f(b)").unwrap()).unwrap();
        let i = bb.lookup(&d.term).unwrap();
        assert!(bb
            .entails(&Comparison::sign(
                i,
                if d.coeff > rat(0) { Rel::Le } else { Rel::Ge }
            ))
            .is_some());
    }

    #[test]
    fn product_patterns() {
        let mut bb = Blackboard::new();
        let t = reg(&mut bb, "g(a*b)");
        let ax = axiom("forall x y. g(x*y) >= 0").unwrap();
        let ms = match_triggers(&ax.clauses[0], &bb);
        assert_eq!(ms.len(), 2);
        assert!(ms.iter().all(|m| m.targets == vec![t]));
    }
}
