//! Expression trees and canonical terms.
//!
//! Raw input is an [`Expr`]. [`canonize`] maps it to a canonical [`STerm`]:
//! a rational coefficient times a [`Term`] in normal form. Two expressions
//! that are equal up to associativity, commutativity, scalar distribution and
//! like-term merging canonize to structurally identical s-terms.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

use crate::rat::{rat, Rat};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TermError {
    #[error("exponent must be an integer literal (use root_n(x) for fractional powers)")]
    NonIntegerExponent,
    #[error("division by zero")]
    DivisionByZero,
    #[error("function `{0}` expects {1} argument(s)")]
    Arity(String, usize),
}

/// Raw expression as produced by the parser.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Expr {
    Num(Rat),
    Var(String),
    Add(Vec<Expr>),
    Mul(Vec<Expr>),
    Pow(Box<Expr>, i64),
    App(String, Vec<Expr>),
}

impl Expr {
    pub fn num(n: i64) -> Expr {
        Expr::Num(rat(n))
    }

    pub fn var(name: &str) -> Expr {
        Expr::Var(name.to_string())
    }

    pub fn app(name: &str, args: Vec<Expr>) -> Expr {
        Expr::App(name.to_string(), args)
    }

    pub fn neg(e: Expr) -> Expr {
        match e {
            Expr::Num(q) => Expr::Num(-q),
            e => Expr::Mul(vec![Expr::num(-1), e]),
        }
    }

    pub fn sub(a: Expr, b: Expr) -> Expr {
        Expr::Add(vec![a, Expr::neg(b)])
    }

    pub fn pow(base: Expr, n: i64) -> Expr {
        Expr::Pow(Box::new(base), n)
    }

    /// Free variables, in sorted order.
    pub fn vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_vars(&mut out);
        out
    }

    fn collect_vars(&self, out: &mut BTreeSet<String>) {
        match self {
            Expr::Num(_) => {}
            Expr::Var(v) => {
                out.insert(v.clone());
            }
            Expr::Add(xs) | Expr::Mul(xs) | Expr::App(_, xs) => {
                xs.iter().for_each(|x| x.collect_vars(out))
            }
            Expr::Pow(b, _) => b.collect_vars(out),
        }
    }

    /// Function symbols used anywhere in the expression.
    pub fn functions(&self, out: &mut BTreeSet<String>) {
        match self {
            Expr::Num(_) | Expr::Var(_) => {}
            Expr::Add(xs) | Expr::Mul(xs) => xs.iter().for_each(|x| x.functions(out)),
            Expr::App(f, xs) => {
                out.insert(f.clone());
                xs.iter().for_each(|x| x.functions(out));
            }
            Expr::Pow(b, _) => b.functions(out),
        }
    }

    /// Replace variables according to `map`.
    pub fn substitute(&self, map: &BTreeMap<String, Expr>) -> Expr {
        match self {
            Expr::Num(_) => self.clone(),
            Expr::Var(v) => map.get(v).cloned().unwrap_or_else(|| self.clone()),
            Expr::Add(xs) => Expr::Add(xs.iter().map(|x| x.substitute(map)).collect()),
            Expr::Mul(xs) => Expr::Mul(xs.iter().map(|x| x.substitute(map)).collect()),
            Expr::Pow(b, n) => Expr::Pow(Box::new(b.substitute(map)), *n),
            Expr::App(f, xs) => {
                Expr::App(f.clone(), xs.iter().map(|x| x.substitute(map)).collect())
            }
        }
    }

    fn precedence(&self) -> u8 {
        match self {
            Expr::Add(_) => 1,
            Expr::Mul(_) => 2,
            Expr::Num(q) if q.is_negative() => 2,
            Expr::Pow(..) => 3,
            _ => 4,
        }
    }
}

fn write_rat(f: &mut fmt::Formatter<'_>, q: &Rat) -> fmt::Result {
    if q.is_integer() {
        write!(f, "{}", q.numer())
    } else {
        write!(f, "({}/{})", q.numer(), q.denom())
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Num(q) => write_rat(f, q),
            Expr::Var(v) => write!(f, "{v}"),
            Expr::Add(xs) => {
                for (k, x) in xs.iter().enumerate() {
                    if k > 0 {
                        write!(f, " + ")?;
                    }
                    if x.precedence() <= 1 {
                        write!(f, "({x})")?;
                    } else {
                        write!(f, "{x}")?;
                    }
                }
                Ok(())
            }
            Expr::Mul(xs) => {
                for (k, x) in xs.iter().enumerate() {
                    if k > 0 {
                        write!(f, "*")?;
                    }
                    let paren = matches!(x, Expr::Add(_) | Expr::Mul(_));
                    if paren {
                        write!(f, "({x})")?;
                    } else {
                        write!(f, "{x}")?;
                    }
                }
                Ok(())
            }
            Expr::Pow(b, n) => {
                let atomic = match b.as_ref() {
                    Expr::Var(_) | Expr::App(..) => true,
                    Expr::Num(q) => !q.is_negative() || !q.is_integer(),
                    _ => false,
                };
                if atomic {
                    write!(f, "{b}^{n}")
                } else {
                    write!(f, "({b})^{n}")
                }
            }
            Expr::App(name, args) => {
                write!(f, "{name}(")?;
                for (k, a) in args.iter().enumerate() {
                    if k > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{a}")?;
                }
                write!(f, ")")
            }
        }
    }
}

/// A term in the sense of the canonical language: `1`, a variable, a sum of
/// s-terms, a product of powers, or a function application.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Term {
    One,
    Var(String),
    Sum(Vec<STerm>),
    Prod(Vec<(Term, i64)>),
    App(String, Vec<STerm>),
}

/// A scaled term `coeff * term`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct STerm {
    pub coeff: Rat,
    pub term: Term,
}

impl STerm {
    pub fn new(coeff: Rat, term: Term) -> STerm {
        if coeff.is_zero() {
            STerm::zero()
        } else {
            STerm { coeff, term }
        }
    }

    pub fn zero() -> STerm {
        STerm {
            coeff: Rat::zero(),
            term: Term::One,
        }
    }

    pub fn constant(c: Rat) -> STerm {
        STerm::new(c, Term::One)
    }

    pub fn of(term: Term) -> STerm {
        STerm {
            coeff: Rat::one(),
            term,
        }
    }

    pub fn scale(&self, q: &Rat) -> STerm {
        STerm::new(&self.coeff * q, self.term.clone())
    }

    pub fn is_constant(&self) -> bool {
        self.term == Term::One
    }

    pub fn to_expr(&self) -> Expr {
        if self.term == Term::One {
            return Expr::Num(self.coeff.clone());
        }
        let t = self.term.to_expr();
        if self.coeff.is_one() {
            t
        } else {
            Expr::Mul(vec![Expr::Num(self.coeff.clone()), t])
        }
    }
}

impl Term {
    fn rank(&self) -> u8 {
        match self {
            Term::One => 0,
            Term::Var(_) => 1,
            Term::Prod(_) => 2,
            Term::Sum(_) => 3,
            Term::App(..) => 4,
        }
    }

    pub fn is_app(&self) -> bool {
        matches!(self, Term::App(..))
    }

    pub fn to_expr(&self) -> Expr {
        match self {
            Term::One => Expr::num(1),
            Term::Var(v) => Expr::Var(v.clone()),
            Term::Sum(xs) => Expr::Add(xs.iter().map(STerm::to_expr).collect()),
            Term::Prod(fs) => {
                let mut parts: Vec<Expr> = fs
                    .iter()
                    .map(|(b, e)| {
                        if *e == 1 {
                            b.to_expr()
                        } else {
                            Expr::Pow(Box::new(b.to_expr()), *e)
                        }
                    })
                    .collect();
                if parts.len() == 1 {
                    parts.pop().unwrap()
                } else {
                    Expr::Mul(parts)
                }
            }
            Term::App(f, args) => Expr::App(f.clone(), args.iter().map(STerm::to_expr).collect()),
        }
    }

    /// Variables occurring in the term.
    pub fn vars(&self) -> BTreeSet<String> {
        self.to_expr().vars()
    }

    /// Visit every subterm (including `self`), children first.
    pub fn visit<'a>(&'a self, f: &mut dyn FnMut(&'a Term)) {
        match self {
            Term::One | Term::Var(_) => {}
            Term::Sum(xs) | Term::App(_, xs) => xs.iter().for_each(|s| s.term.visit(f)),
            Term::Prod(fs) => fs.iter().for_each(|(b, _)| b.visit(f)),
        }
        f(self);
    }
}

fn cmp_lex<T>(a: &[T], b: &[T], cmp: impl Fn(&T, &T) -> Ordering) -> Ordering {
    for (x, y) in a.iter().zip(b) {
        let o = cmp(x, y);
        if o != Ordering::Equal {
            return o;
        }
    }
    a.len().cmp(&b.len())
}

/// The fixed term order: `One < Var < Prod < Sum < App`, lexicographic within
/// a category.
pub fn compare(a: &Term, b: &Term) -> Ordering {
    match (a, b) {
        (Term::One, Term::One) => Ordering::Equal,
        (Term::Var(x), Term::Var(y)) => x.cmp(y),
        (Term::Prod(xs), Term::Prod(ys)) => cmp_lex(xs, ys, |(t1, e1), (t2, e2)| {
            compare(t1, t2).then(e1.cmp(e2))
        }),
        (Term::Sum(xs), Term::Sum(ys)) => cmp_lex(xs, ys, compare_sterm),
        (Term::App(f, xs), Term::App(g, ys)) => f
            .cmp(g)
            .then(xs.len().cmp(&ys.len()))
            .then_with(|| cmp_lex(xs, ys, compare_sterm)),
        _ => a.rank().cmp(&b.rank()),
    }
}

pub fn compare_sterm(a: &STerm, b: &STerm) -> Ordering {
    compare(&a.term, &b.term).then_with(|| a.coeff.cmp(&b.coeff))
}

impl Ord for Term {
    fn cmp(&self, other: &Self) -> Ordering {
        compare(self, other)
    }
}

impl PartialOrd for Term {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for STerm {
    fn cmp(&self, other: &Self) -> Ordering {
        compare_sterm(self, other)
    }
}

impl PartialOrd for STerm {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_expr())
    }
}

impl fmt::Display for STerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_expr())
    }
}

/// Canonizer state. Bases listed in `nonzero` may have all of their exponents
/// merged, including nonpositive ones.
#[derive(Debug, Default, Clone)]
pub struct Canonizer {
    pub nonzero: HashSet<Term>,
}

/// Canonize with no extra knowledge about nonzero bases.
pub fn canonize(e: &Expr) -> Result<STerm, TermError> {
    Canonizer::default().canonize(e)
}

impl Canonizer {
    pub fn canonize(&self, e: &Expr) -> Result<STerm, TermError> {
        match e {
            Expr::Num(q) => Ok(STerm::constant(q.clone())),
            Expr::Var(v) => Ok(STerm::of(Term::Var(v.clone()))),
            Expr::Add(xs) => {
                let parts = xs
                    .iter()
                    .map(|x| self.canonize(x))
                    .collect::<Result<Vec<_>, _>>()?;
                Ok(self.sum(parts))
            }
            Expr::Mul(xs) => {
                let parts = xs
                    .iter()
                    .map(|x| self.canonize(x))
                    .collect::<Result<Vec<_>, _>>()?;
                Ok(self.product(parts))
            }
            Expr::Pow(b, n) => {
                let base = self.canonize(b)?;
                self.power(base, *n)
            }
            Expr::App(f, xs) => {
                let args = xs
                    .iter()
                    .map(|x| self.canonize(x))
                    .collect::<Result<Vec<_>, _>>()?;
                self.apply(f, args)
            }
        }
    }

    pub fn sum(&self, parts: Vec<STerm>) -> STerm {
        let mut merged: BTreeMap<Term, Rat> = BTreeMap::new();
        for s in parts {
            match s.term {
                Term::Sum(inner) => {
                    for x in inner {
                        *merged.entry(x.term).or_insert_with(Rat::zero) += &s.coeff * &x.coeff;
                    }
                }
                t => *merged.entry(t).or_insert_with(Rat::zero) += s.coeff,
            }
        }
        let mut summands: Vec<STerm> = merged
            .into_iter()
            .filter(|(_, c)| !c.is_zero())
            .map(|(t, c)| STerm { coeff: c, term: t })
            .collect();
        match summands.len() {
            0 => STerm::zero(),
            1 => summands.pop().unwrap(),
            _ => {
                let lead = summands[0].coeff.clone();
                for s in summands.iter_mut() {
                    s.coeff = &s.coeff / &lead;
                }
                STerm {
                    coeff: lead,
                    term: Term::Sum(summands),
                }
            }
        }
    }

    pub fn product(&self, parts: Vec<STerm>) -> STerm {
        let mut coeff = Rat::one();
        let mut factors = Vec::new();
        for s in parts {
            coeff *= &s.coeff;
            match s.term {
                Term::One => {}
                Term::Prod(fs) => factors.extend(fs),
                t => factors.push((t, 1)),
            }
        }
        if coeff.is_zero() {
            return STerm::zero();
        }
        STerm::new(coeff, self.factors(factors))
    }

    pub fn power(&self, base: STerm, n: i64) -> Result<STerm, TermError> {
        if n == 1 {
            return Ok(base);
        }
        if base.coeff.is_zero() {
            return if n > 0 {
                Ok(STerm::zero())
            } else {
                Err(TermError::DivisionByZero)
            };
        }
        let coeff = crate::rat::pow(&base.coeff, n);
        let term = match base.term {
            Term::One => Term::One,
            Term::Prod(fs) if n >= 1 && fs.iter().all(|(_, e)| *e >= 1) => {
                self.factors(fs.into_iter().map(|(b, e)| (b, e * n)).collect())
            }
            t => self.factors(vec![(t, n)]),
        };
        Ok(STerm::new(coeff, term))
    }

    fn factors(&self, raw: Vec<(Term, i64)>) -> Term {
        let mut grouped: BTreeMap<Term, Vec<i64>> = BTreeMap::new();
        for (b, e) in raw {
            if b != Term::One {
                grouped.entry(b).or_default().push(e);
            }
        }
        let mut out = Vec::new();
        for (b, mut exps) in grouped {
            if self.nonzero.contains(&b) {
                let total: i64 = exps.iter().sum();
                if total != 0 {
                    out.push((b, total));
                }
                continue;
            }
            exps.sort_unstable();
            let positive: i64 = exps.iter().filter(|e| **e >= 1).sum();
            for e in exps.iter().filter(|e| **e < 1) {
                out.push((b.clone(), *e));
            }
            if positive > 0 {
                out.push((b, positive));
            }
        }
        match out.len() {
            0 => Term::One,
            1 if out[0].1 == 1 => out.pop().unwrap().0,
            _ => Term::Prod(out),
        }
    }

    fn apply(&self, f: &str, args: Vec<STerm>) -> Result<STerm, TermError> {
        match f {
            "abs" => {
                let [arg]: [STerm; 1] = args
                    .try_into()
                    .map_err(|_| TermError::Arity("abs".into(), 1))?;
                if arg.is_constant() {
                    return Ok(STerm::constant(arg.coeff.abs()));
                }
                let k = arg.coeff.abs();
                Ok(STerm::new(
                    k,
                    Term::App("abs".into(), vec![STerm::of(arg.term)]),
                ))
            }
            "min" | "max" if args.is_empty() => Err(TermError::Arity(f.into(), 1)),
            "max" => {
                let negated = args.into_iter().map(|a| a.scale(&rat(-1))).collect();
                Ok(self.apply("min", negated)?.scale(&rat(-1)))
            }
            "min" => Ok(self.min(args)),
            _ => Ok(STerm::of(Term::App(f.to_string(), args))),
        }
    }

    fn min(&self, args: Vec<STerm>) -> STerm {
        let mut constant: Option<Rat> = None;
        let mut rest: BTreeSet<STerm> = BTreeSet::new();
        for a in args {
            if a.is_constant() {
                constant = Some(match constant {
                    Some(c) if c < a.coeff => c,
                    _ => a.coeff,
                });
            } else {
                rest.insert(a);
            }
        }
        let mut all: Vec<STerm> = constant.map(STerm::constant).into_iter().collect();
        all.extend(rest);
        if all.len() == 1 {
            return all.pop().unwrap();
        }
        let k = match all.iter().find(|a| !a.coeff.is_zero()) {
            Some(a) => a.coeff.abs(),
            None => Rat::one(),
        };
        let scaled = all.iter().map(|a| a.scale(&k.recip())).collect();
        STerm::new(k, Term::App("min".into(), scaled))
    }
}

/// Evaluate a canonical s-term. `funcs` interprets uninterpreted symbols;
/// `abs` and `min` are built in. Returns `None` when undefined.
pub fn evaluate(
    s: &STerm,
    env: &dyn Fn(&str) -> Option<Rat>,
    funcs: &dyn Fn(&str, &[Rat]) -> Option<Rat>,
) -> Option<Rat> {
    Some(&s.coeff * eval_term(&s.term, env, funcs)?)
}

fn eval_term(
    t: &Term,
    env: &dyn Fn(&str) -> Option<Rat>,
    funcs: &dyn Fn(&str, &[Rat]) -> Option<Rat>,
) -> Option<Rat> {
    match t {
        Term::One => Some(Rat::one()),
        Term::Var(v) => env(v),
        Term::Sum(xs) => {
            let mut acc = Rat::zero();
            for x in xs {
                acc += evaluate(x, env, funcs)?;
            }
            Some(acc)
        }
        Term::Prod(fs) => {
            let mut acc = Rat::one();
            for (b, e) in fs {
                acc *= eval_pow(eval_term(b, env, funcs)?, *e)?;
            }
            Some(acc)
        }
        Term::App(f, xs) => {
            let args = xs
                .iter()
                .map(|x| evaluate(x, env, funcs))
                .collect::<Option<Vec<_>>>()?;
            apply_builtin(f, &args, funcs)
        }
    }
}

fn eval_pow(b: Rat, e: i64) -> Option<Rat> {
    if e < 0 && b.is_zero() {
        None
    } else {
        Some(crate::rat::pow(&b, e))
    }
}

fn apply_builtin(
    f: &str,
    args: &[Rat],
    funcs: &dyn Fn(&str, &[Rat]) -> Option<Rat>,
) -> Option<Rat> {
    match f {
        "abs" if args.len() == 1 => Some(args[0].abs()),
        "min" => args.iter().min().cloned(),
        "max" => args.iter().max().cloned(),
        "floor" if args.len() == 1 => Some(Rat::from_integer(args[0].floor().to_integer())),
        "ceil" if args.len() == 1 => Some(Rat::from_integer(args[0].ceil().to_integer())),
        _ => funcs(f, args),
    }
}

/// Direct recursive evaluation of a raw expression.
pub fn eval_expr(
    e: &Expr,
    env: &dyn Fn(&str) -> Option<Rat>,
    funcs: &dyn Fn(&str, &[Rat]) -> Option<Rat>,
) -> Option<Rat> {
    match e {
        Expr::Num(q) => Some(q.clone()),
        Expr::Var(v) => env(v),
        Expr::Add(xs) => {
            let mut acc = Rat::zero();
            for x in xs {
                acc += eval_expr(x, env, funcs)?;
            }
            Some(acc)
        }
        Expr::Mul(xs) => {
            let mut acc = Rat::one();
            for x in xs {
                acc *= eval_expr(x, env, funcs)?;
            }
            Some(acc)
        }
        Expr::Pow(b, n) => eval_pow(eval_expr(b, env, funcs)?, *n),
        Expr::App(f, xs) => {
            let args = xs
                .iter()
                .map(|x| eval_expr(x, env, funcs))
                .collect::<Option<Vec<_>>>()?;
            apply_builtin(f, &args, funcs)
        }
    }
}

/// Integer literal helper used by tests and the trace printer.
pub fn int_expr(n: &BigInt) -> Expr {
    Expr::Num(Rat::from_integer(n.clone()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse::parse_expr;

    fn c(s: &str) -> STerm {
        canonize(&parse_expr(s).unwrap()).unwrap()
    }

    #[test]
    fn one_is_minimal() {
        assert_eq!(compare(&Term::One, &Term::Var("x".into())), Ordering::Less);
        assert_eq!(
            compare(&Term::Var("x".into()), &Term::Var("x".into())),
            Ordering::Equal
        );
    }

    #[test]
    fn products_before_sums() {
        let sq = c("x^2").term;
        let sum = c("x + y").term;
        assert_eq!(compare(&sq, &sum), Ordering::Less);
    }

    #[test]
    fn worked_example() {
        let s = c("3*(5*x + 3*y + 4*x*y)^2 * f(u+v)^-1");
        assert_eq!(s.coeff, rat(75));
        let expected = c("(x + (3/5)*y + (4/5)*(x*y))^2 * f(u + v)^-1");
        assert_eq!(s.term, expected.term);
        assert_eq!(expected.coeff, rat(1));
    }

    #[test]
    fn variable_is_canonical() {
        assert_eq!(c("x"), STerm::of(Term::Var("x".into())));
    }

    #[test]
    fn positive_exponents_merge_others_do_not() {
        assert_eq!(c("x^2*x^5"), c("x^7"));
        match c("x^5*x^-2*x^-3*x^0").term {
            Term::Prod(fs) => assert_eq!(fs.len(), 4),
            t => panic!("expected product, got {t}"),
        }
    }

    #[test]
    fn like_terms_merge() {
        assert_eq!(c("2*x + 3*x"), STerm::new(rat(5), Term::Var("x".into())));
        assert_eq!(c("x - x"), STerm::zero());
    }

    #[test]
    fn nonzero_base_merges_all() {
        let mut cz = Canonizer::default();
        cz.nonzero.insert(Term::Var("x".into()));
        let s = cz.canonize(&parse_expr("x^5*x^-2*x^-3").unwrap()).unwrap();
        assert_eq!(s, STerm::constant(rat(1)));
    }

    #[test]
    fn abs_and_min_extract_scalars() {
        assert_eq!(c("abs(-3*x)"), c("3*abs(x)"));
        let m = c("min(2*x, 6*y)");
        assert_eq!(m.coeff, rat(2));
        assert_eq!(c("max(x, y)"), c("-1*min(-1*x, -1*y)"));
    }

    #[test]
    fn rejects_bad_input() {
        assert_eq!(
            canonize(&parse_expr("0^-1").unwrap()),
            Err(TermError::DivisionByZero)
        );
    }

    #[test]
    fn evaluation() {
        let env = |v: &str| if v == "x" { Some(rat(2)) } else { None };
        let none = |_: &str, _: &[Rat]| None;
        assert_eq!(evaluate(&c("5*x"), &env, &none), Some(rat(10)));
        let zero = |_: &str| Some(rat(0));
        assert_eq!(evaluate(&c("x^-1"), &zero, &none), None);
    }

    #[test]
    fn idempotent_on_display() {
        for s in [
            "x^-1*x",
            "(x*y)^-1",
            "abs(x - y) + min(x, 3)",
            "x^0",
            "f(2*x, y + 1)^3",
        ] {
            let once = c(s);
            let twice = canonize(&once.to_expr()).unwrap();
            assert_eq!(once, twice, "{s}");
        }
    }
}
