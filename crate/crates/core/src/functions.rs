//! Interpreted functions: congruence, roots, exp and log, min, abs and a few
//! bounded built-ins.
//!
//! Some properties are handed to the axiom module as universal axioms; the
//! rest are rules that inspect the registered terms directly.

use std::collections::{BTreeMap, BTreeSet, HashSet};

use num_traits::{One, Signed, Zero};

use crate::axioms::{literal_norm, prepare, AxiomModule};
use crate::blackboard::{union, Blackboard, Change, Def};
use crate::comparison::{normalize, normalize_pair, Comparison, Norm, Rel, TermId};
use crate::parse::parse_problem;
use crate::proof::{Fact, Step, StepId};
use crate::rat::Rat;
use crate::term::{canonize, Expr, STerm, Term};

fn step(rule: &'static str, premises: Vec<StepId>, defs: Vec<TermId>) -> Step {
    Step::new("functions", rule, premises, Fact::absurd()).with_defs(defs)
}

fn counts(c: Change) -> usize {
    usize::from(matches!(
        c,
        Change::New | Change::Strengthened | Change::Contradiction
    ))
}

/// `c * t_i`, with `t_0 = 1`.
fn scaled_expr(bb: &Blackboard, c: &Rat, i: TermId) -> Expr {
    let e = if i == 0 {
        Expr::num(1)
    } else {
        bb.term(i).to_expr()
    };
    Expr::Mul(vec![Expr::Num(c.clone()), e])
}

/// Premises for `c1 * t_i = c2 * t_j`, if entailed.
fn equal_args(
    bb: &Blackboard,
    (c1, i): &(Rat, TermId),
    (c2, j): &(Rat, TermId),
) -> Option<Vec<StepId>> {
    if i == j && c1 == c2 {
        return Some(vec![]);
    }
    match normalize(&[(*i, c1.clone()), (*j, -c2.clone())], Rel::Eq)? {
        Norm::True => Some(vec![]),
        Norm::False => None,
        Norm::Cmp(c) => bb.entails(&c),
    }
}

/// Assert equality of applications with entailed-equal arguments, to a
/// fixpoint.
pub fn congruence_close(bb: &mut Blackboard) -> usize {
    let mut learned = 0;
    loop {
        let mut groups: BTreeMap<(String, usize), Vec<TermId>> = BTreeMap::new();
        for t in 1..bb.num_terms() {
            if let Def::App(f, args) = bb.def(t) {
                groups.entry((f.clone(), args.len())).or_default().push(t);
            }
        }
        let mut todo = Vec::new();
        for ids in groups.values() {
            for (k, &a) in ids.iter().enumerate() {
                for &b in &ids[k + 1..] {
                    if bb
                        .entails(&Comparison::new(a, Rel::Eq, Rat::one(), b))
                        .is_some()
                    {
                        continue;
                    }
                    let (Def::App(_, xs), Def::App(_, ys)) = (bb.def(a), bb.def(b)) else {
                        continue;
                    };
                    let mut premises = Some(vec![]);
                    for (x, y) in xs.iter().zip(ys) {
                        premises = match (premises, equal_args(bb, x, y)) {
                            (Some(p), Some(q)) => Some(union(&p, &q)),
                            _ => None,
                        };
                    }
                    if let Some(p) = premises {
                        todo.push((a, b, p));
                    }
                }
            }
        }
        let mut changed = 0;
        for (a, b, p) in todo {
            let c = Comparison::new(a, Rel::Eq, Rat::one(), b);
            changed += counts(bb.assert_cmp(&c, step("congruence", p, vec![a, b])));
        }
        learned += changed;
        if changed == 0 || bb.has_contradiction() {
            return learned;
        }
    }
}

const EXP_AXIOMS: &[&str] = &[
    "forall x. exp(x) > 0",
    "forall x y. x < y -> exp(x) < exp(y)",
    "forall x y. x <= y -> exp(x) <= exp(y)",
    "forall x. x > 0 -> exp(x) > 1",
    "forall x. x >= 0 -> exp(x) >= 1",
    "forall x. x < 0 -> exp(x) < 1",
    "forall x. x <= 0 -> exp(x) <= 1",
];

const LOG_AXIOMS: &[&str] = &[
    "forall x y. 0 < x and x < y -> log(x) < log(y)",
    "forall x y. 0 < x and x <= y -> log(x) <= log(y)",
    "forall x. x > 1 -> log(x) > 0",
    "forall x. x >= 1 -> log(x) >= 0",
    "forall x. 0 < x and x < 1 -> log(x) < 0",
    "forall x. 0 < x and x <= 1 -> log(x) <= 0",
    "forall x. log(exp(x)) = x",
    "forall x. x > 0 -> exp(log(x)) = x",
];

const ABS_AXIOMS: &[&str] = &[
    "forall x. abs(x) >= 0",
    "forall x. abs(x) >= x",
    "forall x. abs(x) >= -x",
    "forall x. x >= 0 -> abs(x) = x",
    "forall x. x <= 0 -> abs(x) = -x",
];

fn root_axioms(n: u32) -> Vec<String> {
    if n.is_multiple_of(2) {
        vec![
            format!("forall x. x >= 0 -> root_{n}(x)^{n} = x"),
            format!("forall x. x >= 0 -> root_{n}(x) >= 0"),
        ]
    } else {
        vec![format!("forall x. root_{n}(x)^{n} = x")]
    }
}

/// Whether `text` is one of the axioms `install` can add.
pub fn is_builtin_axiom(text: &str) -> bool {
    let mut sources: Vec<String> = [EXP_AXIOMS, LOG_AXIOMS, ABS_AXIOMS]
        .concat()
        .iter()
        .map(|s| s.to_string())
        .collect();
    for part in text.split("root_").skip(1) {
        let digits: String = part.chars().take_while(char::is_ascii_digit).collect();
        if let Ok(n @ 2..) = digits.parse::<u32>() {
            sources.extend(root_axioms(n));
        }
    }
    sources
        .iter()
        .any(|s| prepared_text(s).as_deref() == Some(text))
}

fn prepared_text(source: &str) -> Option<String> {
    let p = parse_problem(&format!("axiom {source}\n")).ok()?;
    Some(prepare(p.axioms.first()?).ok()?.text)
}

/// Root index of a `root_n` symbol.
pub fn root_index(f: &str) -> Option<u32> {
    f.strip_prefix("root_")?.parse().ok().filter(|n| *n >= 2)
}

/// Axioms for the interpreted symbols occurring among the registered terms.
pub fn axioms_for(bb: &Blackboard) -> Vec<String> {
    let mut syms = BTreeSet::new();
    for t in 1..bb.num_terms() {
        if let Def::App(f, _) = bb.def(t) {
            syms.insert(f.clone());
        }
    }
    let mut out: Vec<String> = Vec::new();
    for f in &syms {
        match f.as_str() {
            "exp" => out.extend(EXP_AXIOMS.iter().map(|s| s.to_string())),
            "log" => out.extend(LOG_AXIOMS.iter().map(|s| s.to_string())),
            "abs" => out.extend(ABS_AXIOMS.iter().map(|s| s.to_string())),
            g => {
                if let Some(n) = root_index(g) {
                    out.extend(root_axioms(n));
                }
            }
        }
    }
    out
}

/// Hand the axioms for the registered interpreted symbols to the axiom
/// module. Returns how many were new.
pub fn install(bb: &Blackboard, am: &mut AxiomModule) -> usize {
    let mut new = 0;
    for text in axioms_for(bb) {
        let p = parse_problem(&format!("axiom {text}\n")).expect("built-in axiom parses");
        let ax = prepare(&p.axioms[0]).expect("built-in axiom has triggers");
        let before = am.axioms.len();
        am.add(ax);
        new += usize::from(am.axioms.len() > before);
    }
    new
}

/// State of the rules that fire once per term.
#[derive(Debug, Clone, Default)]
pub struct Library {
    exp_done: HashSet<TermId>,
    log_done: HashSet<TermId>,
    abs_done: HashSet<TermId>,
    builtin_done: HashSet<TermId>,
}

fn arg_of(bb: &Blackboard, t: TermId, f: &str) -> Option<(Rat, TermId)> {
    match bb.def(t) {
        Def::App(g, args) if g == f && args.len() == 1 => Some(args[0].clone()),
        _ => None,
    }
}

impl Library {
    pub fn new() -> Library {
        Library::default()
    }

    /// All direct rules. Returns the number of facts learned.
    pub fn run(&mut self, bb: &mut Blackboard) -> usize {
        let mut n = congruence_close(bb);
        n += self.run_exp_log(bb);
        n += run_min(bb);
        n += self.run_abs(bb);
        n += self.run_builtins(bb);
        n
    }

    /// Expand `exp` of sums and scaled terms, and `log` of products with
    /// positive factors.
    pub fn run_exp_log(&mut self, bb: &mut Blackboard) -> usize {
        let mut learned = 0;
        let n = bb.num_terms();
        for t in 1..n {
            if bb.has_contradiction() {
                break;
            }
            if let Some(a) = arg_of(bb, t, "exp") {
                if self.exp_done.insert(t) {
                    learned += expand_exp(bb, t, &a);
                }
            }
            if let Some(a) = arg_of(bb, t, "log") {
                if !self.log_done.contains(&t) {
                    if let Some(k) = expand_log(bb, t, &a) {
                        self.log_done.insert(t);
                        learned += k;
                    }
                }
            }
        }
        learned
    }

    /// Triangle inequalities for absolute values of sums.
    pub fn run_abs(&mut self, bb: &mut Blackboard) -> usize {
        let mut learned = 0;
        for t in 1..bb.num_terms() {
            if self.abs_done.contains(&t) || bb.has_contradiction() {
                continue;
            }
            let Some((_, a)) = arg_of(bb, t, "abs") else {
                continue;
            };
            let Def::Sum(xs) = bb.def(a).clone() else {
                continue;
            };
            let Some(parts) = abs_parts(bb, &xs) else {
                continue;
            };
            self.abs_done.insert(t);
            learned += triangle(bb, t, &parts);
        }
        learned
    }

    /// Bounds for sin, cos, floor and ceil; tan as sin over cos.
    pub fn run_builtins(&mut self, bb: &mut Blackboard) -> usize {
        let mut learned = 0;
        for t in 1..bb.num_terms() {
            let Def::App(f, args) = bb.def(t).clone() else {
                continue;
            };
            if args.len() != 1 || bb.has_contradiction() || self.builtin_done.contains(&t) {
                continue;
            }
            let (c, a) = &args[0];
            let me = bb.term(t).to_expr();
            let x = scaled_expr(bb, c, *a);
            let facts: Vec<(Expr, Rel)> = match f.as_str() {
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
                _ => continue,
            };
            self.builtin_done.insert(t);
            for (e, rel) in facts {
                let Ok(d) = canonize(&e) else { continue };
                if let Some(n) = literal_norm(bb, &d, rel) {
                    learned += counts(bb.assert_norm(&n, step("builtin", vec![], vec![t])));
                }
            }
        }
        learned
    }
}

/// Assert `t_a = e`, registering `e`.
fn assert_equal(bb: &mut Blackboard, a: TermId, e: Expr, st: Step) -> usize {
    let Ok(d) = canonize(&Expr::sub(bb.term(a).to_expr(), e)) else {
        return 0;
    };
    match literal_norm(bb, &d, Rel::Eq) {
        Some(Norm::True) | None => 0,
        Some(n) => counts(bb.assert_norm(&n, st)),
    }
}

/// `exp(c * (s_1 + ... + s_k)) = exp(c s_1) * ... * exp(c s_k)` and
/// `exp(p/q * x)^q = exp(x)^p`.
fn expand_exp(bb: &mut Blackboard, t: TermId, (c, a): &(Rat, TermId)) -> usize {
    if *a == 0 {
        if c.is_zero() {
            let cmp = Comparison::new(t, Rel::Eq, Rat::one(), 0);
            return counts(bb.assert_cmp(&cmp, step("exp", vec![], vec![t])));
        }
        return 0;
    }
    if let Def::Sum(xs) = bb.def(*a).clone() {
        let factors: Vec<Expr> = xs
            .iter()
            .map(|(k, i)| Expr::app("exp", vec![scaled_expr(bb, &(c * k), *i)]))
            .collect();
        return assert_equal(bb, t, Expr::Mul(factors), step("exp", vec![], vec![t, *a]));
    }
    if c.is_one() {
        return 0;
    }
    let (p, q) = (c.numer().clone(), c.denom().clone());
    let (Ok(p), Ok(q)) = (i64::try_from(p), i64::try_from(q)) else {
        return 0;
    };
    let base = Expr::app("exp", vec![bb.term(*a).to_expr()]);
    let lhs = Expr::pow(bb.term(t).to_expr(), q);
    let Ok(d) = canonize(&Expr::sub(lhs, Expr::pow(base, p))) else {
        return 0;
    };
    match literal_norm(bb, &d, Rel::Eq) {
        Some(Norm::True) | None => 0,
        Some(n) => counts(bb.assert_norm(&n, step("exp", vec![], vec![t]))),
    }
}

/// `log(c * Π b^e) = log(c) + Σ e log(b)` when every factor is known
/// positive; a nonzero factor with an even exponent stays as `log(b^e)`.
/// `None` while the signs are not yet known.
fn expand_log(bb: &mut Blackboard, t: TermId, (c, a): &(Rat, TermId)) -> Option<usize> {
    if *a == 0 || !c.is_positive() {
        return None;
    }
    let factors: Vec<(TermId, i64)> = match bb.def(*a) {
        Def::Prod(fs) => fs.clone(),
        Def::Sum(_) => return None,
        _ if !c.is_one() => vec![(*a, 1)],
        _ => return None,
    };
    if factors.len() == 1 && c.is_one() {
        return None;
    }
    let mut premises = Vec::new();
    let mut parts = Vec::new();
    if !c.is_one() {
        parts.push(Expr::app("log", vec![Expr::Num(c.clone())]));
    }
    for (b, e) in &factors {
        let base = bb.term(*b).to_expr();
        if let Some((1, src)) = bb.sign(*b).strict() {
            premises = union(&premises, &src);
            parts.push(Expr::Mul(vec![Expr::num(*e), Expr::app("log", vec![base])]));
        } else if e % 2 == 0 {
            let src = bb.sign(*b).nonzero_src()?;
            premises = union(&premises, &src);
            parts.push(Expr::app("log", vec![Expr::pow(base, *e)]));
        } else {
            return None;
        }
    }
    Some(assert_equal(
        bb,
        t,
        Expr::Add(parts),
        step("log", premises, vec![t, *a]),
    ))
}

/// `t <= c_i t_i`, signs shared by all arguments, and greatest lower bound
/// facts `s <= d * t`.
pub fn run_min(bb: &mut Blackboard) -> usize {
    let mut learned = 0;
    for t in 1..bb.num_terms() {
        if bb.has_contradiction() {
            break;
        }
        let Def::App(f, args) = bb.def(t).clone() else {
            continue;
        };
        if f != "min" {
            continue;
        }
        for (c, i) in &args {
            let n = normalize_pair(Rat::one(), t, Rel::Le, c.clone(), *i);
            learned += counts(bb.assert_norm(&n, step("min_bound", vec![], vec![t])));
        }
        for rel in [Rel::Gt, Rel::Ge, Rel::Lt, Rel::Le] {
            let mut src = Some(vec![]);
            for (c, i) in &args {
                let need = normalize(&[(*i, c.clone())], rel).expect("one term");
                let got = match need {
                    Norm::True => Some(vec![]),
                    Norm::False => None,
                    Norm::Cmp(cmp) => bb.entails(&cmp),
                };
                src = match (src, got) {
                    (Some(a), Some(b)) => Some(union(&a, &b)),
                    _ => None,
                };
            }
            if let Some(src) = src {
                let cmp = Comparison::sign(t, rel);
                learned += counts(bb.assert_cmp(&cmp, step("min_sign", src, vec![t])));
                break;
            }
        }
        learned += min_glb(bb, t, &args);
    }
    learned
}

/// The interval of `d` with `k s <= d c_j t_j` for every argument.
struct Glb {
    lo: Option<Rat>,
    hi: Option<Rat>,
}

fn lookup(bb: &Blackboard, n: Norm) -> Option<Vec<StepId>> {
    match n {
        Norm::True => Some(vec![]),
        Norm::False => None,
        Norm::Cmp(cmp) => bb.entails(&cmp),
    }
}

/// Greatest lower bound facts `k s <= d t` (`k = ±1`) for `t = min(args)`.
fn min_glb(bb: &mut Blackboard, t: TermId, args: &[(Rat, TermId)]) -> usize {
    let mut todo = Vec::new();
    for s in 0..bb.num_terms() {
        if s == t {
            continue;
        }
        for k in [Rat::one(), -Rat::one()] {
            let dir = if k.is_positive() { Rel::Le } else { Rel::Ge };
            let Some(glb) = glb_range(bb, s, &k, dir, args) else {
                continue;
            };
            let mut ds: Vec<Rat> = glb.lo.iter().chain(glb.hi.iter()).cloned().collect();
            ds.dedup();
            for d in ds {
                let mut strict = true;
                let mut src = Vec::new();
                let mut ok = true;
                for (c, j) in args {
                    let coeff = &d * c;
                    let lit = |rel| {
                        normalize(&[(s, k.clone()), (*j, -coeff.clone())], rel).expect("two terms")
                    };
                    if strict {
                        if let Some(p) = lookup(bb, lit(Rel::Lt)) {
                            src = union(&src, &p);
                            continue;
                        }
                    }
                    match lookup(bb, lit(Rel::Le)) {
                        Some(p) => {
                            strict = false;
                            src = union(&src, &p);
                        }
                        None => {
                            ok = false;
                            break;
                        }
                    }
                }
                if ok {
                    let rel = if strict { Rel::Lt } else { Rel::Le };
                    todo.push((normalize_pair(k.clone(), s, rel, d, t), src));
                }
            }
        }
    }
    let mut learned = 0;
    for (n, src) in todo {
        learned += counts(bb.assert_norm(&n, step("min_glb", src, vec![t])));
    }
    learned
}

/// `k s <= d c_j t_j` holds iff `s dir e t_j` with `e = k d c_j`.
fn glb_range(bb: &Blackboard, s: TermId, k: &Rat, dir: Rel, args: &[(Rat, TermId)]) -> Option<Glb> {
    let mut glb = Glb { lo: None, hi: None };
    for (c, j) in args {
        if c.is_zero() {
            return None;
        }
        let scale = k / c;
        let (lo, hi) = if *j == s {
            (Some(scale.clone()), Some(scale))
        } else {
            let r = bb.implied_range(s, *j, dir);
            if r.empty || (r.lo.is_none() && r.hi.is_none()) {
                return None;
            }
            if scale.is_positive() {
                (r.lo.map(|x| x * &scale), r.hi.map(|x| x * &scale))
            } else {
                (r.hi.map(|x| x * &scale), r.lo.map(|x| x * &scale))
            }
        };
        if let Some(l) = lo {
            if glb.lo.as_ref().is_none_or(|g| *g < l) {
                glb.lo = Some(l);
            }
        }
        if let Some(h) = hi {
            if glb.hi.as_ref().is_none_or(|g| *g > h) {
                glb.hi = Some(h);
            }
        }
    }
    match (&glb.lo, &glb.hi) {
        (Some(l), Some(h)) if l > h => None,
        _ => Some(glb),
    }
}

/// One summand `c * t_i` of an absolute value argument, seen through
/// `|c * t_i| = k * t_m` (with `t_m` an `abs` term, `± t_i`, or `1`).
#[derive(Debug, Clone)]
struct AbsPart {
    k: Rat,
    m: TermId,
    src: Vec<StepId>,
}

fn abs_parts(bb: &Blackboard, xs: &[(Rat, TermId)]) -> Option<Vec<AbsPart>> {
    let mut out = Vec::new();
    for (c, i) in xs {
        let k = c.abs();
        if *i == 0 {
            out.push(AbsPart {
                k,
                m: 0,
                src: vec![],
            });
            continue;
        }
        let abs_term = Term::App("abs".into(), vec![STerm::of(bb.term(*i).clone())]);
        if let Some(m) = bb.lookup(&abs_term) {
            out.push(AbsPart { k, m, src: vec![] });
        } else if let Some(src) = bb.sign(*i).weak(1) {
            out.push(AbsPart { k, m: *i, src });
        } else if let Some(src) = bb.sign(*i).weak(-1) {
            out.push(AbsPart { k: -k, m: *i, src });
        } else {
            return None;
        }
    }
    Some(out)
}

/// `|Σ c_i t_i| <= Σ |c_i t_i|` and `|Σ c_i t_i| >= |c_j t_j| - Σ_{l != j} |c_l t_l|`.
fn triangle(bb: &mut Blackboard, t: TermId, parts: &[AbsPart]) -> usize {
    let src = parts.iter().fold(vec![], |acc, p| union(&acc, &p.src));
    let me = bb.term(t).to_expr();
    let part = |bb: &Blackboard, p: &AbsPart| scaled_expr(bb, &p.k, p.m);
    let total: Vec<Expr> = parts.iter().map(|p| Expr::neg(part(bb, p))).collect();
    let mut facts = vec![(Expr::Add([vec![me.clone()], total].concat()), Rel::Le)];
    for (j, pj) in parts.iter().enumerate() {
        let mut e = vec![me.clone(), Expr::neg(part(bb, pj))];
        for (l, pl) in parts.iter().enumerate() {
            if l != j {
                e.push(part(bb, pl));
            }
        }
        facts.push((Expr::Add(e), Rel::Ge));
    }
    let mut learned = 0;
    for (e, rel) in facts {
        let Ok(d) = canonize(&e) else { continue };
        if let Some(n) = literal_norm(bb, &d, rel) {
            learned += counts(bb.assert_norm(&n, step("triangle", src.clone(), vec![t])));
        }
    }
    learned
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse::parse_expr;
    use crate::rat::{rat, ratq};

    fn hyp() -> Step {
        Step::new("input", "hyp", vec![], Fact::absurd())
    }

    fn reg(bb: &mut Blackboard, s: &str) -> TermId {
        let t = canonize(&parse_expr(s).unwrap()).unwrap();
        bb.register(&t.term)
    }

    #[test]
    fn congruence() {
        let mut bb = Blackboard::new();
        let f1 = reg(&mut bb, "f(a)");
        let f2 = reg(&mut bb, "f(b)");
        let g1 = reg(&mut bb, "g(a)");
        let (a, b) = (reg(&mut bb, "a"), reg(&mut bb, "b"));
        let h1 = reg(&mut bb, "h(a, b)");
        let h2 = reg(&mut bb, "h(b, a)");
        assert_eq!(congruence_close(&mut bb), 0);
        bb.assert_cmp(&Comparison::new(a, Rel::Eq, rat(1), b), hyp());
        assert!(congruence_close(&mut bb) > 0);
        assert!(bb
            .entails(&Comparison::new(f1, Rel::Eq, rat(1), f2))
            .is_some());
        assert!(bb
            .entails(&Comparison::new(h1, Rel::Eq, rat(1), h2))
            .is_some());
        assert!(bb
            .entails(&Comparison::new(f1, Rel::Eq, rat(1), g1))
            .is_none());
        assert_eq!(congruence_close(&mut bb), 0);
    }

    #[test]
    fn min_rules() {
        let mut bb = Blackboard::new();
        let t = reg(&mut bb, "min(a, b)");
        let (a, b) = (reg(&mut bb, "a"), reg(&mut bb, "b"));
        let s = reg(&mut bb, "s");
        bb.assert_cmp(&Comparison::new(s, Rel::Le, ratq(1, 2), a), hyp());
        bb.assert_cmp(&Comparison::new(s, Rel::Le, ratq(1, 2), b), hyp());
        bb.assert_cmp(&Comparison::sign(a, Rel::Gt), hyp());
        bb.assert_cmp(&Comparison::sign(b, Rel::Gt), hyp());
        run_min(&mut bb);
        assert!(bb
            .entails(&Comparison::new(t, Rel::Le, rat(1), a))
            .is_some());
        assert!(bb.entails(&Comparison::sign(t, Rel::Gt)).is_some());
        assert!(bb
            .entails(&Comparison::new(s, Rel::Le, ratq(1, 2), t))
            .is_some());
    }

    #[test]
    fn builtin_bounds() {
        let mut bb = Blackboard::new();
        let s = reg(&mut bb, "sin(x)");
        let fl = reg(&mut bb, "floor(x)");
        let mut lib = Library::new();
        lib.run_builtins(&mut bb);
        assert!(bb
            .entails(&Comparison::new(s, Rel::Le, rat(1), 0))
            .is_some());
        assert!(bb
            .entails(&Comparison::new(s, Rel::Ge, rat(-1), 0))
            .is_some());
        let x = bb.lookup(&Term::Var("x".into())).unwrap();
        assert!(bb
            .entails(&Comparison::new(fl, Rel::Le, rat(1), x))
            .is_some());
        assert!(lib.run_builtins(&mut bb) == 0);
    }

    #[test]
    fn exp_expansion() {
        let mut bb = Blackboard::new();
        let t = reg(&mut bb, "exp(3*x + 2*y)");
        let mut lib = Library::new();
        for _ in 0..3 {
            lib.run_exp_log(&mut bb);
        }
        let p = reg(&mut bb, "exp(3*x) * exp(2*y)");
        assert!(bb
            .entails(&Comparison::new(t, Rel::Eq, rat(1), p))
            .is_some());
        let e3 = reg(&mut bb, "exp(3*x)");
        let cube = reg(&mut bb, "exp(x)^3");
        assert!(bb
            .entails(&Comparison::new(e3, Rel::Eq, rat(1), cube))
            .is_some());
    }

    #[test]
    fn log_needs_positive_arguments() {
        let mut bb = Blackboard::new();
        let t = reg(&mut bb, "log(a*c^3)");
        let mut lib = Library::new();
        assert_eq!(lib.run_exp_log(&mut bb), 0);
        let (a, c) = (reg(&mut bb, "a"), reg(&mut bb, "c"));
        bb.assert_cmp(&Comparison::sign(a, Rel::Gt), hyp());
        bb.assert_cmp(&Comparison::sign(c, Rel::Gt), hyp());
        assert!(lib.run_exp_log(&mut bb) > 0);
        let d = canonize(&parse_expr("log(a*c^3) - log(a) - 3*log(c)").unwrap()).unwrap();
        let did = bb.lookup(&d.term).unwrap();
        assert!(bb.entails(&Comparison::sign(did, Rel::Eq)).is_some());
        let _ = t;
    }

    #[test]
    fn triangle_needs_known_parts() {
        let mut bb = Blackboard::new();
        reg(&mut bb, "abs(x + y)");
        let mut lib = Library::new();
        assert_eq!(lib.run_abs(&mut bb), 0);
        reg(&mut bb, "abs(x)");
        let y = reg(&mut bb, "y");
        bb.assert_cmp(&Comparison::sign(y, Rel::Gt), hyp());
        assert!(lib.run_abs(&mut bb) > 0);
    }

    #[test]
    fn installed_axioms() {
        let mut bb = Blackboard::new();
        reg(&mut bb, "root_3(x)");
        reg(&mut bb, "root_2(x)");
        let texts = axioms_for(&bb);
        assert!(texts.contains(&"forall x. root_3(x)^3 = x".to_string()));
        assert!(texts
            .iter()
            .filter(|t| t.contains("root_2"))
            .all(|t| t.contains("x >= 0")));
        let mut am = AxiomModule::new();
        assert_eq!(install(&bb, &mut am), 3);
        assert_eq!(install(&bb, &mut am), 0);
    }
}
