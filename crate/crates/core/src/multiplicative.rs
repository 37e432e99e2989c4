//! Multiplicative reasoning over strictly signed terms.
//!
//! A term `t` with known strict sign `σ` is replaced by `s = σ t > 0`. On
//! positive reals, multiplication plays the role addition plays in the
//! additive module, so Fourier-Motzkin runs over exponent vectors:
//! `c * Π s_k^e_k (>|>=|=) 1` with `c > 0`.

use std::collections::{BTreeMap, BTreeSet};

use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::blackboard::{union, Blackboard, Change, Def, Kind, SignInfo};
use crate::comparison::{normalize_pair, Comparison, Norm, Rel, TermId};
use crate::fm::{self, Config, Form, Outcome, Prov};
use crate::proof::{Fact, Step, StepId};
use crate::rat::{approx_root, exact_root, pow, Rat};

/// `coeff * Π s_k^exps[k] kind 1`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MulForm {
    pub coeff: Rat,
    pub exps: BTreeMap<TermId, i64>,
    pub kind: Kind,
    pub prov: Prov,
}

impl MulForm {
    /// The form of `s_i rel d * s_j` (or `s_i rel d` when `j` is `None`),
    /// for `d > 0`.
    pub fn ratio(i: TermId, rel: Rel, d: &Rat, j: Option<TermId>) -> Option<MulForm> {
        let mut exps = BTreeMap::new();
        let up = matches!(rel, Rel::Gt | Rel::Ge | Rel::Eq);
        exps.insert(i, if up { 1 } else { -1 });
        if let Some(j) = j {
            exps.insert(j, if up { -1 } else { 1 });
        }
        let kind = match rel {
            Rel::Gt | Rel::Lt => Kind::Gt,
            Rel::Ge | Rel::Le => Kind::Ge,
            Rel::Eq => Kind::Eq,
            Rel::Ne => return None,
        };
        let coeff = if up { d.recip() } else { d.clone() };
        Some(MulForm {
            coeff,
            exps,
            kind,
            prov: Prov::default(),
        })
    }

    fn exp(&self, v: TermId) -> i64 {
        self.exps.get(&v).copied().unwrap_or(0)
    }

    /// `self^a * other^b`, `a > 0`.
    fn product(
        x: &MulForm,
        a: i64,
        y: &MulForm,
        b: i64,
        kind: Kind,
        prov: Prov,
    ) -> Option<MulForm> {
        let mut exps: BTreeMap<TermId, i64> = BTreeMap::new();
        for (t, e) in &x.exps {
            let v = exps.entry(*t).or_insert(0);
            *v = v.checked_add(e.checked_mul(a)?)?;
        }
        for (t, e) in &y.exps {
            let v = exps.entry(*t).or_insert(0);
            *v = v.checked_add(e.checked_mul(b)?)?;
        }
        exps.retain(|_, e| *e != 0);
        if a.abs().max(b.abs()) > 4096 {
            return None;
        }
        let coeff = pow(&x.coeff, a) * pow(&y.coeff, b);
        Some(MulForm {
            coeff,
            exps,
            kind,
            prov,
        })
    }

    fn gcd(&self) -> i64 {
        self.exps.values().fold(0i64, |g, e| g.gcd(e))
    }

    /// `coeff^(1/g)` comparisons: compare effective constants of two forms
    /// with the same reduced direction.
    fn effective_cmp(&self, other: &MulForm) -> std::cmp::Ordering {
        let (g1, g2) = (self.gcd().max(1), other.gcd().max(1));
        pow(&self.coeff, g2).cmp(&pow(&other.coeff, g1))
    }
}

impl Form for MulForm {
    type Key = Vec<(TermId, i64)>;

    fn vars(&self) -> Vec<usize> {
        self.exps.keys().copied().collect()
    }

    fn sign(&self, v: usize) -> i32 {
        self.exp(v).signum() as i32
    }

    fn kind(&self) -> Kind {
        self.kind
    }

    fn combine(p: &Self, n: &Self, v: usize) -> Option<Self> {
        let (ep, en) = (p.exp(v), -n.exp(v));
        let g = ep.gcd(&en);
        let kind = if p.kind == Kind::Gt || n.kind == Kind::Gt {
            Kind::Gt
        } else {
            Kind::Ge
        };
        MulForm::product(p, en / g, n, ep / g, kind, p.prov.merge(&n.prov))
    }

    fn substitute(r: &Self, eq: &Self, v: usize) -> Option<Self> {
        let (er, ee) = (r.exp(v), eq.exp(v));
        let g = er.gcd(&ee);
        let a = ee.abs() / g;
        let b = -(er / g) * ee.signum();
        MulForm::product(r, a, eq, b, r.kind, r.prov.merge_eq(&eq.prov))
    }

    fn trivial(&self) -> Option<bool> {
        if !self.exps.is_empty() {
            return None;
        }
        let one = Rat::one();
        Some(match self.kind {
            Kind::Gt => self.coeff > one,
            Kind::Ge => self.coeff >= one,
            Kind::Eq => self.coeff == one,
        })
    }

    fn key(&self) -> Self::Key {
        let g = self.gcd().max(1);
        self.exps.iter().map(|(t, e)| (*t, e / g)).collect()
    }

    fn prov(&self) -> &Prov {
        &self.prov
    }

    fn dominates(&self, other: &Self) -> bool {
        use std::cmp::Ordering::*;
        match (self.kind, other.kind) {
            (Kind::Eq, Kind::Eq) => self.effective_cmp(other) == Equal,
            (Kind::Eq, _) | (_, Kind::Eq) => false,
            (a, b) => match self.effective_cmp(other) {
                Less => true,
                Equal => a == Kind::Gt || b == Kind::Ge,
                Greater => false,
            },
        }
    }
}

/// Strict signs of all terms other than `1`.
pub fn strict_signs(bb: &Blackboard) -> BTreeMap<TermId, (i8, Vec<StepId>)> {
    (1..bb.num_terms())
        .filter_map(|i| bb.sign(i).strict().map(|s| (i, s)))
        .collect()
}

/// Product definitions with repeated bases merged and zero exponents dropped.
fn merged_factors(fs: &[(TermId, i64)]) -> BTreeMap<TermId, i64> {
    let mut m = BTreeMap::new();
    for (b, e) in fs {
        *m.entry(*b).or_insert(0) += e;
    }
    m.retain(|_, e| *e != 0);
    m
}

pub fn collect_multiplicative(bb: &Blackboard) -> Vec<MulForm> {
    let signs = strict_signs(bb);
    let mut out = Vec::new();
    let mut next = 0usize;
    let mut push = |mut f: MulForm, steps: Vec<StepId>, terms: &[TermId]| {
        f.prov.steps.extend(steps);
        for t in terms {
            f.prov.steps.extend(signs[t].1.iter().copied());
        }
        if f.kind != Kind::Eq {
            f.prov.hist.insert(next);
            next += 1;
        }
        out.push(f);
    };
    for (c, step) in bb.comparisons() {
        let Some(&(si, _)) = signs.get(&c.lhs) else {
            continue;
        };
        let rel = if si > 0 { c.rel } else { c.rel.flip() };
        if c.coeff.is_zero() {
            continue;
        }
        if c.rhs == 0 {
            let d = &c.coeff * Rat::from_integer(si.into());
            if d.is_positive() {
                if let Some(f) = MulForm::ratio(c.lhs, rel, &d, None) {
                    push(f, vec![step], &[c.lhs]);
                }
            }
            continue;
        }
        let Some(&(sj, _)) = signs.get(&c.rhs) else {
            continue;
        };
        let d = &c.coeff * Rat::from_integer((si * sj).into());
        if d.is_positive() {
            if let Some(f) = MulForm::ratio(c.lhs, rel, &d, Some(c.rhs)) {
                push(f, vec![step], &[c.lhs, c.rhs]);
            }
        }
    }
    for (&t, &(st, _)) in &signs {
        let Def::Prod(fs) = bb.def(t) else { continue };
        let m = merged_factors(fs);
        if !m.keys().all(|b| signs.contains_key(b)) {
            continue;
        }
        let sp: i64 = m
            .iter()
            .map(|(b, e)| if signs[b].0 < 0 && e % 2 != 0 { -1 } else { 1 })
            .product();
        if sp != st as i64 {
            continue;
        }
        let mut exps: BTreeMap<TermId, i64> = m.iter().map(|(b, e)| (*b, -e)).collect();
        *exps.entry(t).or_insert(0) += 1;
        exps.retain(|_, e| *e != 0);
        let f = MulForm {
            coeff: Rat::one(),
            exps,
            kind: Kind::Eq,
            prov: Prov::default(),
        };
        let mut f = f;
        f.prov.defs.insert(t);
        let terms: Vec<TermId> = m.keys().copied().chain([t]).collect();
        push(f, vec![], &terms);
    }
    out
}

/// `s_i rel r * s_j` in positive variables (`j = None` for a constant).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Reduced {
    pub i: TermId,
    pub rel: Rel,
    pub r: Rat,
    pub j: Option<TermId>,
    pub extra: Vec<StepId>,
}

fn root_bounds(k: &Rat, n: i64, rel: Rel) -> Vec<(Rel, Rat)> {
    if n == 1 {
        return vec![(rel, k.clone())];
    }
    if let Some(r) = exact_root(k, n as u32) {
        return vec![(rel, r)];
    }
    let lower = || approx_root(k, n as u32, false);
    let upper = || approx_root(k, n as u32, true);
    match rel {
        Rel::Gt | Rel::Ge => vec![(Rel::Gt, lower())],
        Rel::Lt | Rel::Le => vec![(Rel::Lt, upper())],
        Rel::Eq => vec![(Rel::Gt, lower()), (Rel::Lt, upper())],
        Rel::Ne => vec![],
    }
}

/// Where a positive variable stands relative to 1, with premises.
pub type UnitInfo<'a> = &'a dyn Fn(TermId, Rel) -> Option<Vec<StepId>>;

/// Turn a form over at most two variables into comparisons of the
/// variables themselves. `unit(v, rel)` reports premises for `s_v rel 1`.
pub fn reduce_power(f: &MulForm, unit: UnitInfo<'_>) -> Vec<Reduced> {
    let vars: Vec<(TermId, i64)> = f.exps.iter().map(|(t, e)| (*t, *e)).collect();
    let rel0 = match f.kind {
        Kind::Gt => Rel::Gt,
        Kind::Ge => Rel::Ge,
        Kind::Eq => Rel::Eq,
    };
    // coeff * s_i^a * s_j^b rel0 1
    let (i, a) = match vars.first() {
        Some(&v) => v,
        None => return vec![],
    };
    let (coeff, a, rel, b) = if a < 0 {
        (
            f.coeff.recip(),
            -a,
            rel0.flip(),
            vars.get(1).map(|&(j, b)| (j, -b)),
        )
    } else {
        (f.coeff.clone(), a, rel0, vars.get(1).copied())
    };
    // s_i^a rel k * s_j^q  with k = 1/coeff
    let k = coeff.recip();
    let rel = match rel {
        Rel::Gt | Rel::Ge | Rel::Eq => rel,
        r => r,
    };
    let Some((j, b)) = b else {
        return root_bounds(&k, a, rel)
            .into_iter()
            .map(|(rel, r)| Reduced {
                i,
                rel,
                r,
                j: None,
                extra: vec![],
            })
            .collect();
    };
    let (p, q) = (a, -b);
    if q <= 0 {
        return vec![];
    }
    if p == q {
        return root_bounds(&k, p, rel)
            .into_iter()
            .map(|(rel, r)| Reduced {
                i,
                rel,
                r,
                j: Some(j),
                extra: vec![],
            })
            .collect();
    }
    if rel == Rel::Eq {
        return vec![];
    }
    let upward = matches!(rel, Rel::Gt | Rel::Ge);
    // Options: bound s_j^q by s_j^p, or s_i^p by s_i^q.
    let mut out = Vec::new();
    let j_rel = match (upward, p > q) {
        (false, true) | (true, false) => Rel::Ge,
        (true, true) | (false, false) => Rel::Le,
    };
    if let Some(extra) = unit(j, j_rel) {
        for (rel, r) in root_bounds(&k, p, rel) {
            out.push(Reduced {
                i,
                rel,
                r,
                j: Some(j),
                extra: extra.clone(),
            });
        }
    }
    let i_rel = match (upward, p > q) {
        (false, true) | (true, false) => Rel::Ge,
        (true, true) | (false, false) => Rel::Le,
    };
    if let Some(extra) = unit(i, i_rel) {
        for (rel, r) in root_bounds(&k, q, rel) {
            out.push(Reduced {
                i,
                rel,
                r,
                j: Some(j),
                extra: extra.clone(),
            });
        }
    }
    out
}

fn unit_fn<'a>(
    bb: &'a Blackboard,
    signs: &'a BTreeMap<TermId, (i8, Vec<StepId>)>,
) -> impl Fn(TermId, Rel) -> Option<Vec<StepId>> + 'a {
    move |v, rel| {
        let (s, _) = signs.get(&v)?;
        // s_v rel 1  <=>  σ t_v rel 1  <=>  t_v rel' σ
        let rel = if *s > 0 { rel } else { rel.flip() };
        bb.entails(&Comparison::new(v, rel, Rat::from_integer((*s).into()), 0))
    }
}

/// Translate a reduced comparison back to the original terms.
pub fn translate(red: &Reduced, signs: &BTreeMap<TermId, (i8, Vec<StepId>)>) -> Norm {
    let si = Rat::from_integer(signs[&red.i].0.into());
    match red.j {
        None => normalize_pair(si, red.i, red.rel, red.r.clone(), 0),
        Some(j) => {
            let sj = Rat::from_integer(signs[&j].0.into());
            normalize_pair(si, red.i, red.rel, &red.r * sj, j)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Report {
    pub asserted: usize,
    pub contradiction: bool,
    pub resource: bool,
}

fn mult_step(prov: &Prov, extra: &[StepId]) -> Step {
    let premises: Vec<StepId> = prov
        .steps
        .iter()
        .copied()
        .chain(extra.iter().copied())
        .collect();
    Step::new("multiplicative", "mult", premises, Fact::absurd())
        .with_defs(prov.defs.iter().copied().collect())
}

pub fn derive_multiplicative(bb: &mut Blackboard, cfg: &Config) -> Report {
    let mut report = Report::default();
    let signs = strict_signs(bb);
    let forms = collect_multiplicative(bb);
    let vars: Vec<usize> = signs.keys().copied().collect();
    let pairs = match fm::project_pairs(forms, &vars, cfg) {
        Outcome::Done(p) => p,
        Outcome::Contradiction(f) => {
            bb.refute(mult_step(&f.prov, &[]));
            report.contradiction = true;
            return report;
        }
        Outcome::Resource => {
            report.resource = true;
            return report;
        }
    };
    let mut todo = Vec::new();
    {
        let unit = unit_fn(bb, &signs);
        for (_, forms) in &pairs {
            for f in forms {
                for red in reduce_power(f, &unit) {
                    todo.push((translate(&red, &signs), mult_step(&f.prov, &red.extra)));
                }
            }
        }
    }
    for (n, step) in todo {
        if fm::oversized(&n, cfg) {
            report.resource = true;
            continue;
        }
        match bb.assert_norm(&n, step) {
            Change::New | Change::Strengthened => report.asserted += 1,
            Change::Contradiction => {
                report.contradiction = true;
                return report;
            }
            Change::Redundant => {}
        }
    }
    report
}

// ---- sign preprocessing ----

/// Sign of a single factor `b^e` given the sign of `b`: `(lower, upper,
/// nonzero)` as in `SignInfo`, using the premises of `s`.
fn power_sign(s: &SignInfo, e: i64) -> Option<(i8, bool, Vec<StepId>)> {
    if e == 0 {
        return Some((1, true, vec![]));
    }
    let even = e % 2 == 0;
    if even {
        if let Some(nz) = s.nonzero_src() {
            return Some((1, true, nz));
        }
        if e < 0 {
            return None;
        }
        return Some((1, false, vec![]));
    }
    if let Some((sg, src)) = s.strict() {
        return Some((sg, true, src));
    }
    if e < 0 {
        return None;
    }
    if let Some(src) = s.weak(1) {
        return Some((1, false, src));
    }
    s.weak(-1).map(|src| (-1, false, src))
}

/// Infer signs through product definitions.
pub fn preprocess_signs(bb: &mut Blackboard) -> usize {
    let mut learned = 0;
    for t in 1..bb.num_terms() {
        if bb.has_contradiction() {
            break;
        }
        let Def::Prod(fs) = bb.def(t).clone() else {
            continue;
        };
        let mut todo: Vec<(Comparison, Vec<StepId>)> = Vec::new();
        // A zero factor raised to a positive power.
        if let Some((b, _)) = fs
            .iter()
            .find(|(b, e)| *e > 0 && bb.sign(*b).zero().is_some())
        {
            if let Some(src) = bb.sign(*b).zero() {
                todo.push((Comparison::sign(t, Rel::Eq), src));
            }
        }
        // Forward: sign of the product from the signs of the factors.
        let parts: Option<Vec<(i8, bool, Vec<StepId>)>> = fs
            .iter()
            .map(|(b, e)| power_sign(bb.sign(*b), *e))
            .collect();
        if let Some(parts) = parts {
            let sg: i8 = parts.iter().map(|p| p.0).product();
            let strict = parts.iter().all(|p| p.1);
            let src: Vec<StepId> = parts.iter().fold(vec![], |acc, p| union(&acc, &p.2));
            let rel = match (sg > 0, strict) {
                (true, true) => Rel::Gt,
                (true, false) => Rel::Ge,
                (false, true) => Rel::Lt,
                (false, false) => Rel::Le,
            };
            todo.push((Comparison::sign(t, rel), src));
        }
        // Backward: a nonzero product has nonzero factors.
        if let Some(nz) = bb.sign(t).nonzero_src() {
            for (b, e) in &fs {
                if *e >= 1 && bb.sign(*b).nonzero_src().is_none() {
                    todo.push((Comparison::sign(*b, Rel::Ne), nz.clone()));
                }
            }
            // All but one odd factor strictly signed: the last one follows.
            if let Some((st, tsrc)) = bb.sign(t).strict() {
                let unknown: Vec<&(TermId, i64)> = fs
                    .iter()
                    .filter(|(b, e)| e % 2 != 0 && bb.sign(*b).strict().is_none())
                    .collect();
                if let [(b, _)] = unknown.as_slice() {
                    let mut sg = st;
                    let mut src = tsrc.clone();
                    let mut ok = true;
                    for (c, e) in &fs {
                        if c == b {
                            continue;
                        }
                        match power_sign(bb.sign(*c), *e) {
                            Some((s, true, p)) => {
                                sg *= s;
                                src = union(&src, &p);
                            }
                            _ if e % 2 == 0 && *e > 0 => {
                                // nonzero because the product is nonzero
                                src = union(&src, &nz);
                            }
                            _ => ok = false,
                        }
                    }
                    let dup = fs.iter().filter(|(c, _)| c == b).count() > 1;
                    if ok && !dup {
                        let rel = if sg > 0 { Rel::Gt } else { Rel::Lt };
                        todo.push((Comparison::sign(*b, rel), src));
                    }
                }
            }
        }
        for (c, src) in todo {
            let step = Step::new("multiplicative", "sign", src, Fact::absurd()).with_defs(vec![t]);
            if matches!(bb.assert_cmp(&c, step), Change::New | Change::Strengthened) {
                learned += 1;
            }
        }
    }
    learned
}

/// Factor multiset of a term: its product factors, or itself.
pub fn factors(bb: &Blackboard, t: TermId) -> Vec<(TermId, i64)> {
    match bb.def(t) {
        Def::Prod(fs) => {
            let mut v = fs.clone();
            v.sort_unstable();
            v
        }
        _ => vec![(t, 1)],
    }
}

/// Split `p` and `q` into a common part and the extra factor of each.
/// Succeeds when `p = M * t_j` and `q = M * t_k` (or `q = M`, giving
/// `k = 0`) with the common part `M` nonempty.
pub fn factor_difference(
    p: &[(TermId, i64)],
    q: &[(TermId, i64)],
) -> Option<(Vec<(TermId, i64)>, TermId, TermId)> {
    let mut rest_q: Vec<(TermId, i64)> = q.to_vec();
    let mut common = Vec::new();
    let mut extra_p = Vec::new();
    for f in p {
        match rest_q.iter().position(|g| g == f) {
            Some(k) => {
                rest_q.remove(k);
                common.push(*f);
            }
            None => extra_p.push(*f),
        }
    }
    if common.is_empty() {
        return None;
    }
    let j = match extra_p.as_slice() {
        [(j, 1)] => *j,
        _ => return None,
    };
    let k = match rest_q.as_slice() {
        [] => 0,
        [(k, 1)] => *k,
        _ => return None,
    };
    Some((common, j, k))
}

/// Sign of a product of factors: `(sign, strict, premises)`.
pub fn product_sign(bb: &Blackboard, fs: &[(TermId, i64)]) -> Option<(i8, bool, Vec<StepId>)> {
    let mut sg = 1i8;
    let mut strict = true;
    let mut src = vec![];
    for (b, e) in fs {
        let (s, st, p) = power_sign(bb.sign(*b), *e)?;
        if !st && p.is_empty() && e % 2 == 0 {
            // even power of an unsigned base: weakly positive
        }
        sg *= s;
        strict &= st;
        src = union(&src, &p);
    }
    Some((sg, strict, src))
}

/// Monotonicity through a single factor: from `t_j rel c * t_k` and the sign
/// of the common part `M`, infer `M t_j rel' c * M t_k`.
pub fn monotone_products(bb: &mut Blackboard) -> usize {
    let n = bb.num_terms();
    let mut todo: Vec<(Norm, Step)> = Vec::new();
    for p in 1..n {
        if !matches!(bb.def(p), Def::Prod(_)) {
            continue;
        }
        let fp = factors(bb, p);
        for q in 1..n {
            if q == p {
                continue;
            }
            let fq = factors(bb, q);
            let Some((common, j, k)) = factor_difference(&fp, &fq) else {
                continue;
            };
            if j == k {
                continue;
            }
            let Some((ms, mstrict, msrc)) = product_sign(bb, &common) else {
                continue;
            };
            let facts = bb.pair_facts(j, k);
            for (c, step) in facts {
                // orient as t_j rel coeff * t_k
                let (rel, coeff) = if c.lhs == j {
                    (c.rel, c.coeff.clone())
                } else {
                    if c.coeff.is_zero() {
                        continue;
                    }
                    let r = if c.coeff.is_negative() {
                        c.rel
                    } else {
                        c.rel.flip()
                    };
                    (r, c.coeff.recip())
                };
                if k != 0 && c.rhs == 0 {
                    continue;
                }
                if coeff.is_zero() && k != 0 {
                    continue;
                }
                let rel = if ms > 0 { rel } else { rel.flip() };
                let rel = if mstrict {
                    rel
                } else {
                    match rel {
                        Rel::Lt => Rel::Le,
                        Rel::Gt => Rel::Ge,
                        r => r,
                    }
                };
                if rel == Rel::Ne {
                    continue;
                }
                let n = normalize_pair(Rat::one(), p, rel, coeff, q);
                let premises = union(&msrc, &[step]);
                let step = Step::new("multiplicative", "mono", premises, Fact::absurd())
                    .with_defs(vec![p, q]);
                todo.push((n, step));
            }
        }
    }
    let mut learned = 0;
    for (n, step) in todo {
        match bb.assert_norm(&n, step) {
            Change::New | Change::Strengthened => learned += 1,
            Change::Contradiction => return learned,
            Change::Redundant => {}
        }
    }
    learned
}

/// Terms appearing in product definitions, for split suggestions.
pub fn product_factors(bb: &Blackboard) -> BTreeSet<TermId> {
    let mut out = BTreeSet::new();
    for t in 1..bb.num_terms() {
        if let Def::Prod(fs) = bb.def(t) {
            out.extend(fs.iter().map(|(b, _)| *b));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::blackboard::Sign;
    use crate::parse::parse_expr;
    use crate::rat::{rat, ratq};
    use crate::term::{canonize, Term};

    fn hyp() -> Step {
        Step::new("input", "hyp", vec![], Fact::absurd())
    }

    fn reg(bb: &mut Blackboard, s: &str) -> TermId {
        let t = canonize(&parse_expr(s).unwrap()).unwrap();
        bb.register(&t.term)
    }

    #[test]
    fn last_factor_sign() {
        let mut bb = Blackboard::new();
        let t4 = reg(&mut bb, "a^3*b*c^2");
        let (a, b) = (reg(&mut bb, "a"), reg(&mut bb, "b"));
        bb.assert_cmp(&Comparison::sign(t4, Rel::Gt), hyp());
        bb.assert_cmp(&Comparison::sign(b, Rel::Lt), hyp());
        preprocess_signs(&mut bb);
        assert_eq!(bb.sign_of(a), Sign::Neg);
    }

    #[test]
    fn no_signs_no_output() {
        let mut bb = Blackboard::new();
        reg(&mut bb, "a*b");
        let before = bb.revision();
        assert_eq!(preprocess_signs(&mut bb), 0);
        assert_eq!(monotone_products(&mut bb), 0);
        assert_eq!(bb.revision(), before);
    }

    #[test]
    fn single_factor_monotone() {
        let mut bb = Blackboard::new();
        let p = reg(&mut bb, "x*y");
        let q = reg(&mut bb, "x*z");
        let (x, y, z) = (reg(&mut bb, "x"), reg(&mut bb, "y"), reg(&mut bb, "z"));
        bb.assert_cmp(&Comparison::sign(x, Rel::Gt), hyp());
        bb.assert_cmp(&Comparison::new(y, Rel::Lt, rat(1), z), hyp());
        monotone_products(&mut bb);
        let want = normalize_pair(rat(1), p, Rel::Lt, rat(1), q);
        let Norm::Cmp(c) = want else { panic!() };
        assert!(bb.entails(&c).is_some());
    }

    #[test]
    fn products_above_one() {
        let mut bb = Blackboard::new();
        let t3 = reg(&mut bb, "a*b");
        let (a, b) = (reg(&mut bb, "a"), reg(&mut bb, "b"));
        bb.assert_cmp(&Comparison::new(a, Rel::Gt, rat(1), 0), hyp());
        bb.assert_cmp(&Comparison::new(b, Rel::Gt, rat(1), 0), hyp());
        preprocess_signs(&mut bb);
        derive_multiplicative(&mut bb, &Config::default());
        assert!(bb
            .entails(&Comparison::new(t3, Rel::Gt, rat(1), a))
            .is_some());
        crate::additive::derive_additive(&mut bb, &Config::default());
        assert!(bb
            .entails(&Comparison::new(t3, Rel::Gt, rat(1), 0))
            .is_some());
    }

    #[test]
    fn forms() {
        let f = MulForm::ratio(1, Rel::Lt, &rat(2), Some(2)).unwrap();
        assert_eq!(f.coeff, rat(2));
        assert_eq!(f.exps, BTreeMap::from([(1, -1), (2, 1)]));
        assert_eq!(f.kind, Kind::Gt);
    }

    #[test]
    fn roots() {
        let none = |_: TermId, _: Rel| None;
        // (1/9) s_i^2 s_j^-2 < 1 written as 9 s_i^-2 s_j^2 > 1
        let f = MulForm {
            coeff: rat(9),
            exps: BTreeMap::from([(1, -2), (2, 2)]),
            kind: Kind::Gt,
            prov: Prov::default(),
        };
        let r = reduce_power(&f, &none);
        assert_eq!(
            r,
            vec![Reduced {
                i: 1,
                rel: Rel::Lt,
                r: rat(3),
                j: Some(2),
                extra: vec![]
            }]
        );
        let f = MulForm {
            coeff: rat(2),
            exps: BTreeMap::from([(1, -2), (2, 2)]),
            kind: Kind::Gt,
            prov: Prov::default(),
        };
        let r = reduce_power(&f, &none);
        assert_eq!(r.len(), 1);
        assert_eq!(r[0].rel, Rel::Lt);
        assert!(pow(&r[0].r, 2) > rat(2) && &r[0].r - ratq(1, 1_000_000) < ratq(1415, 1000));
        let f = MulForm {
            coeff: ratq(1, 5),
            exps: BTreeMap::from([(1, 1), (2, -1)]),
            kind: Kind::Eq,
            prov: Prov::default(),
        };
        let r = reduce_power(&f, &none);
        assert_eq!(
            r,
            vec![Reduced {
                i: 1,
                rel: Rel::Eq,
                r: rat(5),
                j: Some(2),
                extra: vec![]
            }]
        );
    }

    #[test]
    fn unequal_exponents_need_unit_info() {
        // s_i^3 < s_j^2
        let f = MulForm {
            coeff: rat(1),
            exps: BTreeMap::from([(1, -3), (2, 2)]),
            kind: Kind::Gt,
            prov: Prov::default(),
        };
        assert!(reduce_power(&f, &|_, _| None).is_empty());
        let r = reduce_power(&f, &|v, rel| {
            if v == 2 && rel == Rel::Ge {
                Some(vec![7])
            } else {
                None
            }
        });
        assert_eq!(
            r,
            vec![Reduced {
                i: 1,
                rel: Rel::Lt,
                r: rat(1),
                j: Some(2),
                extra: vec![7]
            }]
        );
        let _ = Term::One;
    }
}
