//! Independent checker for proof traces.
//!
//! Steps are re-justified from their premises, either with the small exact
//! elimination procedures below (over linear forms, and over exponent
//! vectors for multiplicative steps) or by re-deriving the fact from the
//! schema of its rule. Only parsing, canonization and clausification are
//! shared with the prover.

use std::collections::{BTreeMap, BTreeSet, HashSet};

use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

use crate::axioms::{instantiate, prepare, Axiom};
use crate::blackboard::{Blackboard, Def};
use crate::comparison::{Comparison, Rel, TermId};
use crate::functions::is_builtin_axiom;
use crate::parse::{parse_expr, parse_problem, Problem};
use crate::proof::{Fact, StepId};
use crate::rat::{self, Rat};
use crate::solver::input_clauses;
use crate::term::{canonize, Expr, STerm, Term};
use crate::trace::{parse_trace, Block, BlockEnd, Entry, TraceDetail, TraceStep};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}: {msg}")]
pub struct CheckError {
    pub line: usize,
    pub step: Option<StepId>,
    pub msg: String,
}

// ---- linear rows ----

type Lin = BTreeMap<TermId, Rat>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
enum K {
    Gt,
    Ge,
    Eq,
    Ne,
}

fn holds(c: &Rat, k: K) -> bool {
    match k {
        K::Gt => c.is_positive(),
        K::Ge => !c.is_negative(),
        K::Eq => c.is_zero(),
        K::Ne => !c.is_zero(),
    }
}

fn axpy(l: &mut Lin, a: &Rat, x: &Lin) {
    for (t, c) in x {
        let e = l.entry(*t).or_insert_with(Rat::zero);
        *e += a * c;
        if e.is_zero() {
            l.remove(t);
        }
    }
}

fn single(t: TermId, c: Rat) -> Lin {
    let mut l = Lin::new();
    if !c.is_zero() {
        l.insert(t, c);
    }
    l
}

/// `Σ lin[t] * t  k  0`, where `t_0` stands for the constant 1.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
struct Row {
    lin: Lin,
    k: K,
}

impl Row {
    fn new(lin: Lin, rel: Rel) -> Row {
        let neg = || lin.iter().map(|(t, c)| (*t, -c.clone())).collect();
        match rel {
            Rel::Gt => Row { lin, k: K::Gt },
            Rel::Ge => Row { lin, k: K::Ge },
            Rel::Lt => Row {
                lin: neg(),
                k: K::Gt,
            },
            Rel::Le => Row {
                lin: neg(),
                k: K::Ge,
            },
            Rel::Eq => Row { lin, k: K::Eq },
            Rel::Ne => Row { lin, k: K::Ne },
        }
    }

    fn of(c: &Comparison) -> Row {
        let mut lin = single(c.lhs, Rat::one());
        axpy(&mut lin, &-c.coeff.clone(), &single(c.rhs, Rat::one()));
        Row::new(lin, c.rel)
    }

    fn neg_lin(&self) -> Lin {
        self.lin.iter().map(|(t, c)| (*t, -c.clone())).collect()
    }

    /// Rows whose disjunction is the negation of this one.
    fn negations(&self) -> Vec<Row> {
        match self.k {
            K::Gt => vec![Row {
                lin: self.neg_lin(),
                k: K::Ge,
            }],
            K::Ge => vec![Row {
                lin: self.neg_lin(),
                k: K::Gt,
            }],
            K::Eq => vec![
                Row {
                    lin: self.lin.clone(),
                    k: K::Gt,
                },
                Row {
                    lin: self.neg_lin(),
                    k: K::Gt,
                },
            ],
            K::Ne => vec![Row {
                lin: self.lin.clone(),
                k: K::Eq,
            }],
        }
    }

    /// The negation as one row (a disequality for an equation).
    fn negation(&self) -> Row {
        match self.k {
            K::Eq => Row {
                lin: self.lin.clone(),
                k: K::Ne,
            },
            _ => self.negations().pop().expect("one row"),
        }
    }

    fn vars(&self) -> impl Iterator<Item = TermId> + '_ {
        self.lin.keys().copied().filter(|t| *t != 0)
    }

    fn constant(&self) -> Option<Rat> {
        if self.vars().next().is_some() {
            None
        } else {
            Some(self.lin.get(&0).cloned().unwrap_or_else(Rat::zero))
        }
    }
}

const ROW_CAP: usize = 20_000;
const NE_SPLITS: usize = 8;

fn infeasible(rows: &[Row]) -> bool {
    let (ne, rest): (Vec<Row>, Vec<Row>) = rows.iter().cloned().partition(|r| r.k == K::Ne);
    fn go(rest: Vec<Row>, ne: &[Row]) -> bool {
        let Some((r, tail)) = ne.split_first() else {
            return fm(rest);
        };
        [
            Row {
                lin: r.lin.clone(),
                k: K::Gt,
            },
            Row {
                lin: r.neg_lin(),
                k: K::Gt,
            },
        ]
        .into_iter()
        .all(|alt| {
            let mut v = rest.clone();
            v.push(alt);
            go(v, tail)
        })
    }
    go(rest, &ne[..ne.len().min(NE_SPLITS)])
}

/// Fourier-Motzkin over rows without disequalities.
fn fm(rows: Vec<Row>) -> bool {
    let mut rows = rows;
    loop {
        let mut seen = HashSet::new();
        let mut next = Vec::new();
        for r in rows {
            if let Some(c) = r.constant() {
                if !holds(&c, r.k) {
                    return true;
                }
                continue;
            }
            let lead = r
                .vars()
                .next()
                .map(|v| r.lin[&v].abs())
                .expect("has a variable");
            let r = Row {
                lin: r.lin.iter().map(|(t, c)| (*t, c / &lead)).collect(),
                k: r.k,
            };
            if seen.insert(r.clone()) {
                next.push(r);
            }
        }
        if next.is_empty() || next.len() > ROW_CAP {
            return false;
        }
        if let Some(ei) = next.iter().position(|r| r.k == K::Eq) {
            let e = next.swap_remove(ei);
            let v = e.vars().next().expect("has a variable");
            let a = e.lin[&v].clone();
            rows = next
                .into_iter()
                .map(|mut r| {
                    if let Some(b) = r.lin.get(&v).cloned() {
                        axpy(&mut r.lin, &-(b / &a), &e.lin);
                    }
                    r
                })
                .collect();
            continue;
        }
        let vars: BTreeSet<TermId> = next
            .iter()
            .flat_map(|r| r.vars().collect::<Vec<_>>())
            .collect();
        let cost = |v: &TermId| {
            let p = next
                .iter()
                .filter(|r| r.lin.get(v).is_some_and(|c| c.is_positive()))
                .count();
            let n = next
                .iter()
                .filter(|r| r.lin.get(v).is_some_and(|c| c.is_negative()))
                .count();
            p * n
        };
        let v = *vars.iter().min_by_key(|v| cost(v)).expect("some variable");
        let (mut keep, mut pos, mut neg) = (Vec::new(), Vec::new(), Vec::new());
        for r in next {
            match r.lin.get(&v) {
                None => keep.push(r),
                Some(c) if c.is_positive() => pos.push(r),
                Some(_) => neg.push(r),
            }
        }
        for p in &pos {
            for n in &neg {
                let (a, b) = (p.lin[&v].clone(), -n.lin[&v].clone());
                let mut lin = Lin::new();
                axpy(&mut lin, &b, &p.lin);
                axpy(&mut lin, &a, &n.lin);
                let k = if p.k == K::Gt || n.k == K::Gt {
                    K::Gt
                } else {
                    K::Ge
                };
                keep.push(Row { lin, k });
            }
            if keep.len() > ROW_CAP {
                return false;
            }
        }
        rows = keep;
    }
}

// ---- multiplicative rows ----

/// `c * Π s^e  k  1` over positive quantities `s`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
struct MRow {
    e: BTreeMap<TermId, i64>,
    c: Rat,
    k: K,
}

const POW_BITS: u64 = 1 << 18;

impl MRow {
    fn pow(&self, n: i64) -> Option<MRow> {
        if n < 0 && self.k != K::Eq {
            return None;
        }
        let bits = (self.c.numer().bits() + self.c.denom().bits()).checked_mul(n.unsigned_abs())?;
        if bits > POW_BITS {
            return None;
        }
        let e = self
            .e
            .iter()
            .map(|(t, x)| x.checked_mul(n).map(|y| (*t, y)))
            .collect::<Option<_>>()?;
        Some(MRow {
            e,
            c: rat::pow(&self.c, n),
            k: self.k,
        })
    }

    fn mul(&self, o: &MRow) -> Option<MRow> {
        let mut e = self.e.clone();
        for (t, x) in &o.e {
            let y = e.get(t).copied().unwrap_or(0).checked_add(*x)?;
            if y == 0 {
                e.remove(t);
            } else {
                e.insert(*t, y);
            }
        }
        let k = match (self.k, o.k) {
            (K::Gt, _) | (_, K::Gt) => K::Gt,
            (K::Ge, _) | (_, K::Ge) => K::Ge,
            _ => K::Eq,
        };
        Some(MRow {
            e,
            c: &self.c * &o.c,
            k,
        })
    }

    /// `s_i rel d s_j` (or `s_i rel d`) with `d > 0`.
    fn ratio(i: TermId, rel: Rel, d: &Rat, j: Option<TermId>) -> Option<MRow> {
        if !d.is_positive() {
            return None;
        }
        let mut e = BTreeMap::new();
        let (si, sj, c, k) = match rel {
            Rel::Gt => (1, -1, d.recip(), K::Gt),
            Rel::Ge => (1, -1, d.recip(), K::Ge),
            Rel::Eq => (1, -1, d.recip(), K::Eq),
            Rel::Lt => (-1, 1, d.clone(), K::Gt),
            Rel::Le => (-1, 1, d.clone(), K::Ge),
            Rel::Ne => return None,
        };
        e.insert(i, si);
        if let Some(j) = j {
            *e.entry(j).or_insert(0) += sj;
            e.retain(|_, x| *x != 0);
        }
        Some(MRow { e, c, k })
    }
}

fn mul_infeasible(rows: Vec<MRow>) -> bool {
    let mut rows = rows;
    loop {
        let mut seen = HashSet::new();
        let mut next = Vec::new();
        for r in rows {
            if r.e.is_empty() {
                let ok = match r.k {
                    K::Gt => r.c > Rat::one(),
                    K::Ge => r.c >= Rat::one(),
                    _ => r.c == Rat::one(),
                };
                if !ok {
                    return true;
                }
                continue;
            }
            if seen.insert(r.clone()) {
                next.push(r);
            }
        }
        if next.is_empty() || next.len() > ROW_CAP {
            return false;
        }
        if let Some(ei) = next.iter().position(|r| r.k == K::Eq) {
            let eq = next.swap_remove(ei);
            let (&v, &a) = eq.e.iter().next().expect("has a variable");
            let mut out = Vec::new();
            for r in next {
                let Some(&b) = r.e.get(&v) else {
                    out.push(r);
                    continue;
                };
                let g = a.abs().gcd(&b.abs());
                let m = r
                    .pow(a.abs() / g)
                    .and_then(|x| eq.pow(-(b / g) * a.signum()).and_then(|y| x.mul(&y)));
                match m {
                    Some(m) => out.push(m),
                    None => return false,
                }
            }
            rows = out;
            continue;
        }
        let vars: BTreeSet<TermId> = next
            .iter()
            .flat_map(|r| r.e.keys().copied().collect::<Vec<_>>())
            .collect();
        let cost = |v: &TermId| {
            let p = next
                .iter()
                .filter(|r| r.e.get(v).is_some_and(|x| *x > 0))
                .count();
            let n = next
                .iter()
                .filter(|r| r.e.get(v).is_some_and(|x| *x < 0))
                .count();
            p * n
        };
        let v = *vars.iter().min_by_key(|v| cost(v)).expect("some variable");
        let (mut keep, mut pos, mut neg) = (Vec::new(), Vec::new(), Vec::new());
        for r in next {
            match r.e.get(&v) {
                None => keep.push(r),
                Some(x) if *x > 0 => pos.push(r),
                Some(_) => neg.push(r),
            }
        }
        for p in &pos {
            for n in &neg {
                let (a, b) = (p.e[&v], -n.e[&v]);
                let g = a.gcd(&b);
                match p
                    .pow(b / g)
                    .and_then(|x| n.pow(a / g).and_then(|y| x.mul(&y)))
                {
                    Some(m) => keep.push(m),
                    None => return false,
                }
            }
        }
        rows = keep;
    }
}

// ---- sign abstraction ----

/// Sign of `Π b^e` for the given factor signs, taking `0^e = 0`.
fn product_sign(fs: &[(TermId, i64)], sg: &BTreeMap<TermId, i8>) -> i8 {
    let mut s = 1;
    for (b, e) in fs {
        let x = sg[b];
        if x == 0 {
            return 0;
        }
        if e % 2 != 0 {
            s *= x;
        }
    }
    s
}

/// Every sign assignment of `vars` that `allowed` permits.
fn sign_assignments(
    vars: &BTreeSet<TermId>,
    allowed: impl Fn(TermId, i8) -> bool,
) -> Option<Vec<BTreeMap<TermId, i8>>> {
    if vars.len() > 10 {
        return None;
    }
    let mut out = vec![BTreeMap::new()];
    for &v in vars {
        let signs: Vec<i8> = [-1i8, 0, 1]
            .into_iter()
            .filter(|s| allowed(v, *s))
            .collect();
        out = out
            .iter()
            .flat_map(|a| {
                signs.iter().map(move |s| {
                    let mut b = a.clone();
                    b.insert(v, *s);
                    b
                })
            })
            .collect();
    }
    Some(out)
}

// ---- the checker ----

#[derive(Clone)]
struct Scope {
    bb: Blackboard,
    facts: Vec<Fact>,
}

struct Checker {
    inputs: Vec<Vec<(STerm, Rel)>>,
    axioms: Vec<Axiom>,
}

type Res = Result<(), String>;

fn ensure(ok: bool, msg: &str) -> Res {
    if ok {
        Ok(())
    } else {
        Err(msg.to_string())
    }
}

fn lits(f: &Fact) -> Vec<Comparison> {
    match f {
        Fact::Cmp(c) => vec![c.clone()],
        Fact::Clause(ls) => ls.clone(),
    }
}

fn factors(bb: &Blackboard, t: TermId) -> Vec<(TermId, i64)> {
    match bb.def(t) {
        Def::Prod(fs) => fs.clone(),
        Def::One => vec![],
        _ => vec![(t, 1)],
    }
}

/// `t` with the listed subterms replaced.
fn replace(t: &Term, swaps: &[(Term, Term)]) -> Expr {
    if let Some((_, b)) = swaps.iter().find(|(a, _)| a == t) {
        return b.to_expr();
    }
    let st = |s: &STerm| Expr::Mul(vec![Expr::Num(s.coeff.clone()), replace(&s.term, swaps)]);
    match t {
        Term::One => Expr::num(1),
        Term::Var(v) => Expr::Var(v.clone()),
        Term::Sum(xs) => Expr::Add(xs.iter().map(st).collect()),
        Term::Prod(fs) => Expr::Mul(
            fs.iter()
                .map(|(b, e)| Expr::pow(replace(b, swaps), *e))
                .collect(),
        ),
        Term::App(f, xs) => Expr::App(f.clone(), xs.iter().map(st).collect()),
    }
}

impl Scope {
    fn lin(&self, s: &STerm) -> Option<Lin> {
        match &s.term {
            Term::One => Some(single(0, s.coeff.clone())),
            Term::Sum(xs) => {
                let mut l = Lin::new();
                for x in xs {
                    let id = if x.term == Term::One {
                        0
                    } else {
                        self.bb.lookup(&x.term)?
                    };
                    axpy(&mut l, &(&s.coeff * &x.coeff), &single(id, Rat::one()));
                }
                Some(l)
            }
            t => Some(single(self.bb.lookup(t)?, s.coeff.clone())),
        }
    }

    fn expr_row(&self, e: &Expr, rel: Rel) -> Option<Row> {
        let d = canonize(e).ok()?;
        Some(Row::new(self.lin(&d)?, rel))
    }

    /// Add the definitions of the sums among the mentioned terms.
    fn close(&self, rows: &mut Vec<Row>, extra: &[TermId]) {
        let mut todo: Vec<TermId> = rows
            .iter()
            .flat_map(|r| r.vars().collect::<Vec<_>>())
            .collect();
        todo.extend(extra);
        let mut seen = HashSet::new();
        while let Some(t) = todo.pop() {
            if t == 0 || !seen.insert(t) {
                continue;
            }
            if let Def::Sum(xs) = self.bb.def(t) {
                let mut lin = single(t, Rat::one());
                for (c, i) in xs {
                    axpy(&mut lin, &-c.clone(), &single(*i, Rat::one()));
                    todo.push(*i);
                }
                rows.push(Row { lin, k: K::Eq });
            }
        }
    }

    fn infeasible(&self, rows: &[Row], defs: &[TermId]) -> bool {
        let mut rows = rows.to_vec();
        self.close(&mut rows, defs);
        infeasible(&rows)
    }

    fn entails(&self, premises: &[Row], goal: &Row, defs: &[TermId]) -> bool {
        goal.negations().into_iter().all(|alt| {
            let mut rows = premises.to_vec();
            rows.push(alt);
            self.infeasible(&rows, defs)
        })
    }

    fn premise_rows(&self, s: &TraceStep) -> Vec<Row> {
        s.premises
            .iter()
            .filter_map(|p| match &self.facts[*p] {
                Fact::Cmp(c) => Some(Row::of(c)),
                Fact::Clause(ls) if ls.len() == 1 => Some(Row::of(&ls[0])),
                Fact::Clause(_) => None,
            })
            .collect()
    }

    fn premise_cmps(&self, s: &TraceStep) -> Vec<Comparison> {
        s.premises
            .iter()
            .filter_map(|p| self.facts[*p].cmp().cloned())
            .collect()
    }

    /// Whether the premises leave `t` room for the sign `s`.
    fn sign_possible(&self, premises: &[Row], t: TermId, s: i8) -> bool {
        let rel = [Rel::Lt, Rel::Eq, Rel::Gt][(s + 1) as usize];
        let mut rows = premises.to_vec();
        rows.push(Row::of(&Comparison::sign(t, rel)));
        !self.infeasible(&rows, &[])
    }

    fn sign_from(&self, premises: &[Row], t: TermId, rel: Rel) -> bool {
        self.entails(premises, &Row::of(&Comparison::sign(t, rel)), &[])
    }

    /// Every literal `h` implies one of `targets`; false literals are
    /// dropped.
    fn clause_implies(&self, hs: &[Row], targets: &[Comparison]) -> Res {
        for h in hs {
            if let Some(c) = h.constant() {
                if holds(&c, h.k) {
                    return Err("a literal is trivially true".into());
                }
                continue;
            }
            let ok = targets
                .iter()
                .any(|f| self.entails(std::slice::from_ref(h), &Row::of(f), &[]));
            ensure(ok, "a literal is not matched by the recorded clause")?;
        }
        Ok(())
    }
}

fn app(bb: &Blackboard, t: TermId, f: &str) -> Option<Vec<(Rat, TermId)>> {
    match bb.def(t) {
        Def::App(g, args) if g == f => Some(args.clone()),
        _ => None,
    }
}

fn scaled(bb: &Blackboard, c: &Rat, i: TermId) -> Expr {
    let e = if i == 0 {
        Expr::num(1)
    } else {
        bb.term(i).to_expr()
    };
    Expr::Mul(vec![Expr::Num(c.clone()), e])
}

impl Checker {
    fn new(problem: &Problem, texts: &[String]) -> Result<Checker, String> {
        let mut inputs = Vec::new();
        for cl in input_clauses(problem).ok_or("hypotheses have too many clauses")? {
            let mut out = Vec::new();
            for l in cl {
                out.push((canonize(&l.difference()).map_err(|e| e.to_string())?, l.rel));
            }
            inputs.push(out);
        }
        let user: Vec<Axiom> = problem
            .axioms
            .iter()
            .map(|a| prepare(a).map_err(|e| e.to_string()))
            .collect::<Result<_, _>>()?;
        let mut axioms = Vec::new();
        for (k, text) in texts.iter().enumerate() {
            if let Some(a) = user.iter().find(|a| a.text == *text) {
                axioms.push(a.clone());
                continue;
            }
            if !is_builtin_axiom(text) {
                return Err(format!("axiom {k} is neither given nor built in"));
            }
            let p = parse_problem(&format!("axiom {text}\n")).map_err(|e| e.to_string())?;
            axioms.push(prepare(&p.axioms[0]).map_err(|e| e.to_string())?);
        }
        Ok(Checker { inputs, axioms })
    }

    fn step(&self, sc: &Scope, s: &TraceStep) -> Res {
        let fact_row = || match &s.fact {
            Fact::Cmp(c) => Ok(Row::of(c)),
            Fact::Clause(_) => Err("expected a comparison".to_string()),
        };
        let prem = sc.premise_rows(s);
        let t = s.defs.first().copied();
        match (s.module.as_str(), s.rule.as_str()) {
            ("blackboard", "one") => ensure(
                s.id == 0
                    && s.premises.is_empty()
                    && s.fact == Fact::Cmp(Comparison::sign(0, Rel::Gt)),
                "bad initial step",
            ),
            ("input", "hyp") => {
                let TraceDetail::Hyp(k) = s.detail else {
                    return Err("missing hypothesis index".into());
                };
                let input = self.inputs.get(k).ok_or("no such hypothesis")?;
                let mut hs = Vec::new();
                for (d, rel) in input {
                    hs.push(Row::new(
                        sc.lin(d).ok_or("hypothesis term not registered")?,
                        *rel,
                    ));
                }
                sc.clause_implies(&hs, &lits(&s.fact))
            }
            ("blackboard", "linear") | ("blackboard", "diseq") | ("additive", "linear") => ensure(
                sc.entails(&prem, &fact_row()?, &s.defs),
                "not a linear consequence of the premises",
            ),
            ("blackboard", "unit") => self.unit(sc, s),
            ("functions", "congruence") => self.congruence(sc, s, &prem),
            ("axioms", "instance") => self.instance(sc, s, &prem),
            ("multiplicative", "mult") => self.mult(sc, s),
            ("multiplicative", "sign") => self.sign(sc, s),
            ("multiplicative", "mono") => self.mono(sc, s, &prem),
            ("functions", r @ ("exp" | "log" | "builtin")) => {
                let t = s
                    .defs
                    .iter()
                    .copied()
                    .find(|d| matches!(sc.bb.def(*d), Def::App(..)))
                    .ok_or("missing term")?;
                let cands = match r {
                    "exp" => self.exp_candidates(sc, t),
                    "log" => self.log_candidates(sc, t, &prem),
                    _ => self.builtin_candidates(sc, t),
                }
                .ok_or("rule does not apply to the term")?;
                let goal = fact_row()?;
                ensure(
                    cands
                        .iter()
                        .any(|c| sc.entails(&[prem.clone(), vec![c.clone()]].concat(), &goal, &[])),
                    "fact does not follow from the rule",
                )
            }
            ("functions", "min_bound" | "min_sign" | "min_glb") => {
                let t = t.ok_or("missing term")?;
                let args = app(&sc.bb, t, "min").ok_or("not a min term")?;
                let goal = fact_row()?;
                let bounds: Vec<Row> = args
                    .iter()
                    .map(|(c, i)| {
                        let mut l = single(t, Rat::one());
                        axpy(&mut l, &-c.clone(), &single(*i, Rat::one()));
                        Row::new(l, Rel::Le)
                    })
                    .collect();
                for b in &bounds {
                    let mut rows = [prem.clone(), bounds.clone()].concat();
                    rows.push(Row {
                        lin: b.lin.clone(),
                        k: K::Eq,
                    });
                    ensure(
                        sc.entails(&rows, &goal, &[]),
                        "fact does not follow in every case of the minimum",
                    )?;
                }
                Ok(())
            }
            ("functions", "triangle") => self.triangle(sc, s, &prem),
            ("split", "case") => Err("case assumption outside a split".into()),
            (m, r) => Err(format!("unknown rule {m}/{r}")),
        }
    }

    fn unit(&self, sc: &Scope, s: &TraceStep) -> Res {
        let clauses: Vec<StepId> = s
            .premises
            .iter()
            .copied()
            .filter(|p| matches!(sc.facts[*p], Fact::Clause(_)))
            .collect();
        let [cl] = clauses.as_slice() else {
            return Err("unit step needs exactly one clause".into());
        };
        let others: Vec<Row> = s
            .premises
            .iter()
            .filter(|p| *p != cl)
            .filter_map(|p| sc.facts[*p].cmp().map(Row::of))
            .collect();
        let ls = lits(&sc.facts[*cl]);
        let keep = match &s.fact {
            f if f.is_absurd() => None,
            Fact::Cmp(c) if ls.contains(c) => Some(c.clone()),
            _ => return Err("fact is not a literal of the clause".into()),
        };
        for l in &ls {
            if Some(l) == keep.as_ref() {
                continue;
            }
            let mut rows = others.clone();
            rows.push(Row::of(l));
            ensure(
                sc.infeasible(&rows, &[]),
                "a dropped literal is not refuted",
            )?;
        }
        Ok(())
    }

    fn congruence(&self, sc: &Scope, s: &TraceStep, prem: &[Row]) -> Res {
        let Fact::Cmp(c) = &s.fact else {
            return Err("expected a comparison".into());
        };
        ensure(
            c.rel == Rel::Eq && c.coeff.is_one() && c.rhs != 0,
            "not an equation between terms",
        )?;
        let (Def::App(f, xs), Def::App(g, ys)) = (sc.bb.def(c.lhs), sc.bb.def(c.rhs)) else {
            return Err("not applications".into());
        };
        ensure(f == g && xs.len() == ys.len(), "different functions")?;
        for ((c1, i), (c2, j)) in xs.iter().zip(ys) {
            if i == j && c1 == c2 {
                continue;
            }
            let mut l = single(*i, c1.clone());
            axpy(&mut l, &-Rat::one(), &single(*j, c2.clone()));
            ensure(
                sc.entails(prem, &Row { lin: l, k: K::Eq }, &[]),
                "arguments not shown equal",
            )?;
        }
        Ok(())
    }

    /// `a` and `b` are equal syntactically, or application-wise with
    /// arguments equal by the premises.
    fn same(sc: &Scope, prem: &[Row], a: &STerm, b: &STerm) -> bool {
        if a == b {
            return true;
        }
        if let (Term::App(f, xs), Term::App(g, ys)) = (&a.term, &b.term) {
            if f == g
                && xs.len() == ys.len()
                && a.coeff == b.coeff
                && xs.iter().zip(ys).all(|(x, y)| Self::same(sc, prem, x, y))
            {
                return true;
            }
        }
        match (sc.lin(a), sc.lin(b)) {
            (Some(mut l), Some(r)) => {
                axpy(&mut l, &-Rat::one(), &r);
                sc.entails(prem, &Row { lin: l, k: K::Eq }, &[])
            }
            _ => false,
        }
    }

    fn instance(&self, sc: &Scope, s: &TraceStep, prem: &[Row]) -> Res {
        let TraceDetail::Instance {
            axiom,
            clause,
            subst,
            targets,
        } = &s.detail
        else {
            return Err("missing instance data".into());
        };
        let cl = self
            .axioms
            .get(*axiom)
            .and_then(|a| a.clauses.get(*clause))
            .ok_or("no such axiom clause")?;
        let sub: BTreeMap<String, STerm> = subst
            .iter()
            .map(|(x, t)| (format!("?{x}"), t.clone()))
            .collect();
        ensure(
            sub.keys().cloned().collect::<BTreeSet<_>>() == cl.vars,
            "substitution does not cover the variables",
        )?;
        ensure(
            targets.len() == cl.triggers.len(),
            "wrong number of targets",
        )?;
        let mut swaps = Vec::new();
        for (trig, id) in cl.triggers.iter().zip(targets) {
            ensure(*id < sc.bb.num_terms() && *id > 0, "bad target")?;
            let inst = instantiate(&STerm::of(trig.clone()), &sub).ok_or("instantiation failed")?;
            let target = STerm::of(sc.bb.term(*id).clone());
            ensure(
                Self::same(sc, prem, &inst, &target),
                "trigger does not match its target",
            )?;
            if inst != target {
                swaps.push((inst.term, target.term));
            }
        }
        let map: BTreeMap<String, Expr> =
            sub.iter().map(|(k, v)| (k.clone(), v.to_expr())).collect();
        let mut hs = Vec::new();
        for l in &cl.lits {
            let d = canonize(&l.difference().substitute(&map)).map_err(|e| e.to_string())?;
            let d = if swaps.is_empty() {
                d
            } else {
                canonize(&replace(&d.term, &swaps))
                    .map_err(|e| e.to_string())?
                    .scale(&d.coeff)
            };
            hs.push(Row::new(
                sc.lin(&d).ok_or("instance term not registered")?,
                l.rel,
            ));
        }
        let Fact::Clause(fs) = &s.fact else {
            return Err("expected a clause".into());
        };
        sc.clause_implies(&hs, fs)
    }

    fn mult(&self, sc: &Scope, s: &TraceStep) -> Res {
        let prem = sc.premise_rows(s);
        let cmps = sc.premise_cmps(s);
        let mut terms = BTreeSet::new();
        for c in cmps.iter().chain(s.fact.cmp()) {
            terms.extend(c.terms());
        }
        for d in &s.defs {
            terms.insert(*d);
            terms.extend(factors(&sc.bb, *d).into_iter().map(|(b, _)| b));
        }
        terms.remove(&0);
        let mut sg: BTreeMap<TermId, i8> = BTreeMap::new();
        for &t in &terms {
            if sc.sign_from(&prem, t, Rel::Gt) {
                sg.insert(t, 1);
            } else if sc.sign_from(&prem, t, Rel::Lt) {
                sg.insert(t, -1);
            }
        }
        // `c` over the positive quantities `s_t = sign(t) * t`.
        let form = |c: &Comparison| -> Option<(TermId, Rel, Rat, Option<TermId>)> {
            let si = *sg.get(&c.lhs)?;
            let rel = if si < 0 { c.rel.flip() } else { c.rel };
            if c.rhs == 0 {
                return Some((c.lhs, rel, &c.coeff * Rat::from_integer(si.into()), None));
            }
            let sj = *sg.get(&c.rhs)?;
            Some((
                c.lhs,
                rel,
                &c.coeff * Rat::from_integer((si * sj).into()),
                Some(c.rhs),
            ))
        };
        let mut rows = Vec::new();
        for c in &cmps {
            if c.coeff.is_zero() {
                continue;
            }
            if let Some((i, rel, d, j)) = form(c) {
                rows.extend(MRow::ratio(i, rel, &d, j));
            }
        }
        for d in &s.defs {
            let Def::Prod(fs) = sc.bb.def(*d) else {
                continue;
            };
            let (Some(&st), true) = (sg.get(d), fs.iter().all(|(b, _)| sg.contains_key(b))) else {
                continue;
            };
            if product_sign(fs, &sg) != st {
                continue;
            }
            let mut e = BTreeMap::from([(*d, 1i64)]);
            for (b, x) in fs {
                *e.entry(*b).or_insert(0) -= x;
            }
            e.retain(|_, x| *x != 0);
            rows.push(MRow {
                e,
                c: Rat::one(),
                k: K::Eq,
            });
        }
        if s.fact.is_absurd() {
            return ensure(
                mul_infeasible(rows),
                "premises are not multiplicatively inconsistent",
            );
        }
        let Fact::Cmp(c) = &s.fact else {
            return Err("expected a comparison".into());
        };
        if c.coeff.is_zero() {
            let st = *sg.get(&c.lhs).ok_or("sign of the term is unknown")?;
            return ensure(
                c.rel.holds(&Rat::from_integer(st.into()), &Rat::zero()),
                "sign fact does not hold",
            );
        }
        let (i, rel, d, j) = form(c).ok_or("a term of the fact has no known sign")?;
        if !d.is_positive() {
            return ensure(
                matches!(rel, Rel::Gt | Rel::Ge | Rel::Ne),
                "fact contradicts the signs",
            );
        }
        let negs: Vec<Rel> = match rel.negate() {
            Rel::Ne => vec![Rel::Lt, Rel::Gt],
            r => vec![r],
        };
        for r in negs {
            let mut all = rows.clone();
            all.extend(MRow::ratio(i, r, &d, j));
            ensure(
                mul_infeasible(all),
                "not a multiplicative consequence of the premises",
            )?;
        }
        Ok(())
    }

    fn sign(&self, sc: &Scope, s: &TraceStep) -> Res {
        let t = *s.defs.first().ok_or("missing term")?;
        let Def::Prod(fs) = sc.bb.def(t) else {
            return Err("not a product".into());
        };
        let mut vars: BTreeSet<TermId> = fs.iter().map(|(b, _)| *b).collect();
        vars.insert(t);
        let prem = sc.premise_rows(s);
        let assigns = sign_assignments(&vars, |v, x| sc.sign_possible(&prem, v, x))
            .ok_or("too many factors")?;
        let Fact::Cmp(c) = &s.fact else {
            return Err("expected a comparison".into());
        };
        ensure(
            c.coeff.is_zero() && vars.contains(&c.lhs),
            "not a sign fact about the product",
        )?;
        for a in assigns {
            if product_sign(fs, &a) != a[&t] {
                continue;
            }
            ensure(
                c.rel
                    .holds(&Rat::from_integer(a[&c.lhs].into()), &Rat::zero()),
                "sign does not follow",
            )?;
        }
        Ok(())
    }

    fn mono(&self, sc: &Scope, s: &TraceStep, prem: &[Row]) -> Res {
        let [p, q] = s.defs.as_slice() else {
            return Err("expected two terms".into());
        };
        let Fact::Cmp(c) = &s.fact else {
            return Err("expected a comparison".into());
        };
        ensure(
            [c.lhs, c.rhs].iter().all(|x| x == p || x == q) && c.lhs != c.rhs,
            "fact is not about the products",
        )?;
        let (fp, fq) = (factors(&sc.bb, *p), factors(&sc.bb, *q));
        let mut common = Vec::new();
        let mut lp = Vec::new();
        for (b, e) in &fp {
            match fq.iter().find(|(x, _)| x == b) {
                Some((_, f)) => {
                    let m = if e.signum() == f.signum() {
                        e.abs().min(f.abs()) * e.signum()
                    } else {
                        0
                    };
                    if m != 0 {
                        common.push((*b, m));
                    }
                    if e - m != 0 {
                        lp.push((*b, e - m));
                    }
                }
                None => lp.push((*b, *e)),
            }
        }
        let mut lq = Vec::new();
        for (b, f) in &fq {
            let m = common.iter().find(|(x, _)| x == b).map_or(0, |(_, m)| *m);
            if f - m != 0 {
                lq.push((*b, f - m));
            }
        }
        let single_factor = |l: &[(TermId, i64)]| match l {
            [] => Some(0),
            [(b, 1)] => Some(*b),
            _ => None,
        };
        let (Some(j), Some(k)) = (single_factor(&lp), single_factor(&lq)) else {
            return Err("products differ in more than one factor".into());
        };
        let vars: BTreeSet<TermId> = common.iter().map(|(b, _)| *b).collect();
        let assigns = sign_assignments(&vars, |v, x| sc.sign_possible(prem, v, x))
            .ok_or("too many factors")?;
        let signs: BTreeSet<i8> = assigns.iter().map(|a| product_sign(&common, a)).collect();
        // fact: a p + b q k 0 = M (a t_j + b t_k) k 0
        let row = Row::of(c);
        let mut inner = Lin::new();
        for (term, v) in [(*p, j), (*q, k)] {
            if let Some(a) = row.lin.get(&term) {
                axpy(&mut inner, a, &single(v, Rat::one()));
            }
        }
        let neg: Lin = inner.iter().map(|(t, x)| (*t, -x.clone())).collect();
        let (lin, ok) = match row.k {
            K::Eq => (inner, true),
            K::Gt | K::Ne if signs.iter().all(|x| *x == 1) => (inner, true),
            K::Gt | K::Ne if signs.iter().all(|x| *x == -1) => {
                (if row.k == K::Ne { inner } else { neg }, true)
            }
            K::Ge if signs.iter().all(|x| *x >= 0) => (inner, true),
            K::Ge if signs.iter().all(|x| *x <= 0) => (neg, true),
            _ => (inner, false),
        };
        ensure(ok, "sign of the common factor is not known")?;
        ensure(
            sc.entails(prem, &Row { lin, k: row.k }, &[]),
            "the differing factors are not ordered by the premises",
        )
    }

    fn exp_candidates(&self, sc: &Scope, t: TermId) -> Option<Vec<Row>> {
        let bb = &sc.bb;
        let [(c, a)] = app(bb, t, "exp")?.try_into().ok()?;
        let me = bb.term(t).to_expr();
        if a == 0 {
            return c.is_zero().then(|| {
                vec![Row {
                    lin: [(t, Rat::one()), (0, -Rat::one())].into(),
                    k: K::Eq,
                }]
            });
        }
        let e = if let Def::Sum(xs) = bb.def(a) {
            let fs = xs
                .iter()
                .map(|(k, i)| Expr::app("exp", vec![scaled(bb, &(&c * k), *i)]))
                .collect();
            Expr::sub(me, Expr::Mul(fs))
        } else {
            let p: i64 = c.numer().try_into().ok()?;
            let q: i64 = c.denom().try_into().ok()?;
            Expr::sub(
                Expr::pow(me, q),
                Expr::pow(Expr::app("exp", vec![bb.term(a).to_expr()]), p),
            )
        };
        Some(vec![sc.expr_row(&e, Rel::Eq)?])
    }

    fn log_candidates(&self, sc: &Scope, t: TermId, prem: &[Row]) -> Option<Vec<Row>> {
        let bb = &sc.bb;
        let [(c, a)] = app(bb, t, "log")?.try_into().ok()?;
        if a == 0 || !c.is_positive() {
            return None;
        }
        let mut parts = vec![];
        if !c.is_one() {
            parts.push(Expr::app("log", vec![Expr::Num(c.clone())]));
        }
        for (b, e) in factors(bb, a) {
            let base = bb.term(b).to_expr();
            if sc.sign_from(prem, b, Rel::Gt) {
                parts.push(Expr::Mul(vec![Expr::num(e), Expr::app("log", vec![base])]));
            } else if e % 2 == 0 && sc.sign_from(prem, b, Rel::Ne) {
                parts.push(Expr::app("log", vec![Expr::pow(base, e)]));
            } else {
                return None;
            }
        }
        Some(vec![sc.expr_row(
            &Expr::sub(bb.term(t).to_expr(), Expr::Add(parts)),
            Rel::Eq,
        )?])
    }

    fn builtin_candidates(&self, sc: &Scope, t: TermId) -> Option<Vec<Row>> {
        let bb = &sc.bb;
        let Def::App(f, args) = bb.def(t) else {
            return None;
        };
        let [(c, a)] = args.as_slice() else {
            return None;
        };
        let me = bb.term(t).to_expr();
        let x = scaled(bb, c, *a);
        let cands = match f.as_str() {
            "sin" | "cos" => vec![
                (Expr::Add(vec![me.clone(), Expr::num(1)]), Rel::Ge),
                (Expr::sub(me, Expr::num(1)), Rel::Le),
            ],
            "tan" => {
                let ratio = Expr::Mul(vec![
                    Expr::app("sin", vec![x.clone()]),
                    Expr::pow(Expr::app("cos", vec![x]), -1),
                ]);
                vec![(Expr::sub(me, ratio), Rel::Eq)]
            }
            "floor" => vec![
                (Expr::sub(me.clone(), x.clone()), Rel::Le),
                (Expr::Add(vec![me, Expr::neg(x), Expr::num(1)]), Rel::Gt),
            ],
            "ceil" => vec![
                (Expr::sub(me.clone(), x.clone()), Rel::Ge),
                (Expr::Add(vec![me, Expr::neg(x), Expr::num(-1)]), Rel::Lt),
            ],
            _ => return None,
        };
        Some(
            cands
                .into_iter()
                .filter_map(|(e, rel)| sc.expr_row(&e, rel))
                .collect(),
        )
    }

    fn triangle(&self, sc: &Scope, s: &TraceStep, prem: &[Row]) -> Res {
        let bb = &sc.bb;
        let t = *s.defs.first().ok_or("missing term")?;
        let args = app(bb, t, "abs").ok_or("not an absolute value")?;
        let [(one, a)] = args.as_slice() else {
            return Err("bad arity".into());
        };
        ensure(one.is_one(), "unnormalized argument")?;
        let Def::Sum(xs) = bb.def(*a) else {
            return Err("argument is not a sum".into());
        };
        // Ways of writing |c_i t_i| as k * t_m.
        let mut options: Vec<Vec<(Rat, TermId)>> = Vec::new();
        for (c, i) in xs {
            let k = c.abs();
            if *i == 0 {
                options.push(vec![(k, 0)]);
                continue;
            }
            let mut o = Vec::new();
            if let Some(m) = bb.lookup(&Term::App(
                "abs".into(),
                vec![STerm::of(bb.term(*i).clone())],
            )) {
                o.push((k.clone(), m));
            }
            if sc.sign_from(prem, *i, Rel::Ge) {
                o.push((k.clone(), *i));
            }
            if sc.sign_from(prem, *i, Rel::Le) {
                o.push((-k, *i));
            }
            if o.is_empty() {
                return Err("a summand has neither an absolute value nor a sign".into());
            }
            options.push(o);
        }
        let goal = match &s.fact {
            Fact::Cmp(c) => Row::of(c),
            Fact::Clause(_) => return Err("expected a comparison".into()),
        };
        let mut combos: Vec<Vec<(Rat, TermId)>> = vec![vec![]];
        for o in &options {
            combos = combos
                .iter()
                .flat_map(|c| o.iter().map(move |x| [c.clone(), vec![x.clone()]].concat()))
                .collect();
            if combos.len() > 256 {
                return Err("too many ways to split the absolute value".into());
            }
        }
        for parts in combos {
            let mut cands = Vec::new();
            let mut total = single(t, Rat::one());
            for (k, m) in &parts {
                axpy(&mut total, &-k.clone(), &single(*m, Rat::one()));
            }
            cands.push(Row::new(total, Rel::Le));
            for (j, (kj, mj)) in parts.iter().enumerate() {
                let mut l = single(t, Rat::one());
                axpy(&mut l, &-kj.clone(), &single(*mj, Rat::one()));
                for (n, (k, m)) in parts.iter().enumerate() {
                    if n != j {
                        axpy(&mut l, k, &single(*m, Rat::one()));
                    }
                }
                cands.push(Row::new(l, Rel::Ge));
            }
            if cands
                .iter()
                .any(|c| sc.entails(std::slice::from_ref(c), &goal, &[]))
            {
                return Ok(());
            }
        }
        Err("fact does not follow from the triangle inequality".into())
    }

    fn block(
        &self,
        b: &Block,
        mut sc: Scope,
        case: Option<(StepId, usize)>,
    ) -> Result<(), CheckError> {
        let mut awaiting = case;
        for e in &b.entries {
            match e {
                Entry::Term { id, text, line } => {
                    let fail = |msg: String| CheckError {
                        line: *line,
                        step: None,
                        msg,
                    };
                    let s = parse_expr(text).map_err(|e| fail(e.to_string()))?;
                    let s = canonize(&s).map_err(|e| fail(e.to_string()))?;
                    if !s.coeff.is_one() || s.is_constant() {
                        return Err(fail("term is not in canonical form".into()));
                    }
                    if *id != sc.bb.num_terms() || sc.bb.register(&s.term) != *id {
                        return Err(fail(format!("term {id} out of order or not canonical")));
                    }
                }
                Entry::Step(s) => {
                    let fail = |msg: String| CheckError {
                        line: s.line,
                        step: Some(s.id),
                        msg,
                    };
                    if s.id != sc.facts.len() {
                        return Err(fail("step out of order".into()));
                    }
                    if s.premises.iter().any(|p| *p >= s.id)
                        || s.defs.iter().any(|d| *d >= sc.bb.num_terms())
                    {
                        return Err(fail("dangling reference".into()));
                    }
                    let n = sc.bb.num_terms();
                    if lits(&s.fact)
                        .iter()
                        .any(|c| c.lhs >= n || c.rhs >= n || (c.rhs != 0 && c.coeff.is_zero()))
                    {
                        return Err(fail("malformed fact".into()));
                    }
                    match awaiting.take() {
                        Some((id, k)) => {
                            let ok = s.id == id
                                && s.module == "split"
                                && s.rule == "case"
                                && s.premises.is_empty()
                                && matches!(&s.detail, TraceDetail::Case { case, .. } if *case == k)
                                && matches!(s.fact, Fact::Cmp(_));
                            if !ok {
                                return Err(fail("a case must open with its assumption".into()));
                            }
                        }
                        None => self.step(&sc, s).map_err(fail)?,
                    }
                    sc.facts.push(s.fact.clone());
                }
            }
        }
        if awaiting.is_some() {
            return Err(CheckError {
                line: 0,
                step: None,
                msg: "case without assumption".into(),
            });
        }
        match &b.end {
            BlockEnd::Contradiction { a, b, line } => {
                let fail = |msg: &str| CheckError {
                    line: *line,
                    step: None,
                    msg: msg.into(),
                };
                let (Some(fa), Some(fb)) = (sc.facts.get(*a), sc.facts.get(*b)) else {
                    return Err(fail("dangling reference"));
                };
                let rows: Vec<Row> = [fa, fb]
                    .iter()
                    .filter_map(|f| f.cmp().map(Row::of))
                    .collect();
                let empty = [fa, fb]
                    .iter()
                    .any(|f| matches!(f, Fact::Clause(ls) if ls.is_empty()));
                if !empty && !sc.infeasible(&rows, &[]) {
                    return Err(fail("the final facts are consistent"));
                }
                Ok(())
            }
            BlockEnd::Split { cases, line, .. } => {
                let fail = |msg: &str| CheckError {
                    line: *line,
                    step: None,
                    msg: msg.into(),
                };
                let first = sc.facts.len();
                let mut negs = Vec::new();
                for c in cases {
                    let assumption = c.entries.iter().find_map(|e| match e {
                        Entry::Step(s) => Some(s),
                        Entry::Term { .. } => None,
                    });
                    let Some(Fact::Cmp(f)) = assumption.map(|s| &s.fact) else {
                        return Err(fail("case without assumption"));
                    };
                    if f.lhs >= sc.bb.num_terms() || f.rhs >= sc.bb.num_terms() {
                        return Err(fail("case on an unknown term"));
                    }
                    negs.push(Row::of(f).negation());
                }
                if cases.is_empty() || !sc.infeasible(&negs, &[]) {
                    return Err(fail("cases are not exhaustive"));
                }
                for (k, c) in cases.iter().enumerate() {
                    self.block(c, sc.clone(), Some((first, k)))?;
                }
                Ok(())
            }
        }
    }
}

/// Check a trace against the problem it claims to refute.
pub fn check_trace(problem: &Problem, text: &str) -> Result<(), CheckError> {
    let tr = parse_trace(text).map_err(|e| CheckError {
        line: e.line,
        step: None,
        msg: e.msg,
    })?;
    let ck = Checker::new(problem, &tr.axioms).map_err(|msg| CheckError {
        line: 0,
        step: None,
        msg,
    })?;
    ck.block(
        &tr.root,
        Scope {
            bb: Blackboard::new(),
            facts: Vec::new(),
        },
        None,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse::parse_problem;
    use crate::rat::{rat, ratq};

    fn row(terms: &[(TermId, i64)], rel: Rel) -> Row {
        Row::new(terms.iter().map(|(t, c)| (*t, rat(*c))).collect(), rel)
    }

    #[test]
    fn linear_infeasibility() {
        // x > 1, y > x, y < 1
        let rows = [
            row(&[(1, 1), (0, -1)], Rel::Gt),
            row(&[(2, 1), (1, -1)], Rel::Gt),
            row(&[(2, 1), (0, -1)], Rel::Lt),
        ];
        assert!(infeasible(&rows));
        assert!(!infeasible(&rows[..2]));
        // x != 0, x >= 0, x <= 0
        let rows = [
            row(&[(1, 1)], Rel::Ne),
            row(&[(1, 1)], Rel::Ge),
            row(&[(1, 1)], Rel::Le),
        ];
        assert!(infeasible(&rows));
        assert!(!infeasible(&rows[1..]));
        // x = y, x > 2, y < 2
        let rows = [
            row(&[(1, 1), (2, -1)], Rel::Eq),
            row(&[(1, 1), (0, -2)], Rel::Gt),
            row(&[(2, 1), (0, -2)], Rel::Lt),
        ];
        assert!(infeasible(&rows));
    }

    #[test]
    fn multiplicative_infeasibility() {
        // a^2 > 4 b^2, a < 2 b
        let p = MRow {
            e: [(1, 2), (2, -2)].into(),
            c: ratq(1, 4),
            k: K::Gt,
        };
        let q = MRow::ratio(1, Rel::Lt, &rat(2), Some(2)).unwrap();
        assert!(mul_infeasible(vec![p.clone(), q]));
        let q = MRow::ratio(1, Rel::Lt, &rat(3), Some(2)).unwrap();
        assert!(!mul_infeasible(vec![p, q]));
        // t = a b, a > 2, b > 3, t < 6
        let def = MRow {
            e: [(3, 1), (1, -1), (2, -1)].into(),
            c: rat(1),
            k: K::Eq,
        };
        let rows = vec![
            def,
            MRow::ratio(1, Rel::Gt, &rat(2), None).unwrap(),
            MRow::ratio(2, Rel::Gt, &rat(3), None).unwrap(),
            MRow::ratio(3, Rel::Lt, &rat(6), None).unwrap(),
        ];
        assert!(mul_infeasible(rows));
    }

    fn traced(src: &str, depth: u32) -> (Problem, String) {
        let p = parse_problem(src).unwrap();
        let r = crate::solver::solve(
            &p,
            &crate::solver::Config {
                split_depth: depth,
                ..Default::default()
            },
        );
        let t = crate::trace::write_trace(&r).expect("proved");
        (p, t)
    }

    fn edit(t: &str, from: &str, to: &str) -> String {
        assert!(t.contains(from), "{from} not in trace:\n{t}");
        t.replacen(from, to, 1)
    }

    const P02: &str = "hyp x > 1\nconclude (1 + y^2)*x > 1 + y^2\n";
    const P15: &str = "hyp x > 0\nhyp x*y*z < 0\nhyp x*w > 0\nconclude w > y*z\n";

    #[test]
    fn accepts_and_rejects() {
        let (p, t) = traced(P02, 0);
        assert_eq!(check_trace(&p, &t), Ok(()));
        let e = check_trace(&p, &edit(&t, "hyp=0 fact=t1 > 1", "hyp=0 fact=t1 > 2")).unwrap_err();
        assert_eq!(e.step, Some(1));
        assert!(check_trace(&p, &edit(&t, "step 1 ", "step 2 ")).is_err());
        assert!(check_trace(&p, &edit(&t, "term 1 x", "term 1 y")).is_err());
        // the trace does not prove the other problem
        let q = parse_problem("hyp x > 1\nconclude (1 + y^2)*x > 2 + y^2\n").unwrap();
        assert!(check_trace(&q, &t).is_err());
    }

    #[test]
    fn splits_must_cover() {
        let (p, t) = traced(P15, 2);
        assert_eq!(check_trace(&p, &t), Ok(()));
        let e = check_trace(&p, &edit(&t, "fact=t2 = 0", "fact=t2 = 1")).unwrap_err();
        assert!(e.msg.contains("exhaustive"), "{e}");
        assert!(check_trace(&p, &edit(&t, "case=1 on=t2", "case=2 on=t2")).is_err());
    }

    #[test]
    fn unknown_axioms_are_rejected() {
        let src = "axiom forall x. f(x) <= 1\nhyp u < v\nhyp 0 < w\nconclude u + w*f(x) < v + w\n";
        let (p, t) = traced(src, 0);
        assert_eq!(check_trace(&p, &t), Ok(()));
        let other = parse_problem(
            "axiom forall x. f(x) <= 2\nhyp u < v\nhyp 0 < w\nconclude u + w*f(x) < v + w\n",
        )
        .unwrap();
        assert!(check_trace(&other, &t).is_err());
    }

    #[test]
    fn sign_products() {
        let sg: BTreeMap<TermId, i8> = [(1, -1), (2, 1), (3, 0)].into();
        assert_eq!(product_sign(&[(1, 1), (2, 1)], &sg), -1);
        assert_eq!(product_sign(&[(1, 2), (2, 1)], &sg), 1);
        assert_eq!(product_sign(&[(1, 1), (3, -1)], &sg), 0);
        let vars: BTreeSet<TermId> = [1, 2].into();
        let a = sign_assignments(&vars, |v, s| v != 1 || s > 0).unwrap();
        assert_eq!(a.len(), 3);
    }
}
