//! Linear reasoning: Fourier-Motzkin over additive definitions and stored
//! comparisons.

use std::collections::{BTreeMap, BTreeSet};

use num_traits::{One, Signed, Zero};

use crate::blackboard::{Blackboard, Change, Def, Kind};
use crate::comparison::{normalize, Comparison, Norm, Rel, TermId};
use crate::fm::{self, Config, Form, Outcome, Prov};
use crate::proof::{Fact, Step};
use crate::rat::Rat;

/// `sum coeffs[k] * t_k kind 0`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LinForm {
    pub coeffs: BTreeMap<TermId, Rat>,
    pub kind: Kind,
    pub prov: Prov,
}

impl LinForm {
    pub fn new(terms: &[(TermId, Rat)], kind: Kind) -> LinForm {
        let mut coeffs = BTreeMap::new();
        for (t, c) in terms {
            *coeffs.entry(*t).or_insert_with(Rat::zero) += c;
        }
        coeffs.retain(|_, c: &mut Rat| !c.is_zero());
        LinForm {
            coeffs,
            kind,
            prov: Prov::default(),
        }
    }

    /// The form of a comparison; `None` for disequalities.
    pub fn from_comparison(c: &Comparison) -> Option<LinForm> {
        let (terms, rel) = c.linear();
        let neg: Vec<(TermId, Rat)> = terms.iter().map(|(t, a)| (*t, -a.clone())).collect();
        Some(match rel {
            Rel::Gt => LinForm::new(&terms, Kind::Gt),
            Rel::Ge => LinForm::new(&terms, Kind::Ge),
            Rel::Eq => LinForm::new(&terms, Kind::Eq),
            Rel::Lt => LinForm::new(&neg, Kind::Gt),
            Rel::Le => LinForm::new(&neg, Kind::Ge),
            Rel::Ne => return None,
        })
    }

    pub fn rel(&self) -> Rel {
        match self.kind {
            Kind::Gt => Rel::Gt,
            Kind::Ge => Rel::Ge,
            Kind::Eq => Rel::Eq,
        }
    }

    pub fn coeff(&self, v: TermId) -> Rat {
        self.coeffs.get(&v).cloned().unwrap_or_else(Rat::zero)
    }

    fn lincomb(a: &Rat, x: &LinForm, b: &Rat, y: &LinForm, kind: Kind, prov: Prov) -> LinForm {
        let mut coeffs = BTreeMap::new();
        for (t, c) in &x.coeffs {
            *coeffs.entry(*t).or_insert_with(Rat::zero) += a * c;
        }
        for (t, c) in &y.coeffs {
            *coeffs.entry(*t).or_insert_with(Rat::zero) += b * c;
        }
        coeffs.retain(|_, c: &mut Rat| !c.is_zero());
        LinForm { coeffs, kind, prov }
    }

    /// Normalize a form over at most two terms into a comparison.
    pub fn to_norm(&self) -> Option<Norm> {
        let terms: Vec<(TermId, Rat)> = self.coeffs.iter().map(|(t, c)| (*t, c.clone())).collect();
        normalize(&terms, self.rel())
    }
}

impl Form for LinForm {
    type Key = Vec<(TermId, Rat)>;

    fn vars(&self) -> Vec<usize> {
        self.coeffs.keys().copied().collect()
    }

    fn sign(&self, v: usize) -> i32 {
        match self.coeffs.get(&v) {
            Some(c) if c.is_positive() => 1,
            Some(_) => -1,
            None => 0,
        }
    }

    fn kind(&self) -> Kind {
        self.kind
    }

    fn combine(p: &Self, n: &Self, v: usize) -> Option<Self> {
        let (pv, nv) = (p.coeff(v), -n.coeff(v));
        let kind = if p.kind == Kind::Gt || n.kind == Kind::Gt {
            Kind::Gt
        } else {
            Kind::Ge
        };
        Some(LinForm::lincomb(
            &nv,
            p,
            &pv,
            n,
            kind,
            p.prov.merge(&n.prov),
        ))
    }

    fn substitute(r: &Self, eq: &Self, v: usize) -> Option<Self> {
        let m = -(r.coeff(v) / eq.coeff(v));
        Some(LinForm::lincomb(
            &Rat::one(),
            r,
            &m,
            eq,
            r.kind,
            r.prov.merge_eq(&eq.prov),
        ))
    }

    fn trivial(&self) -> Option<bool> {
        if self.coeffs.is_empty() {
            Some(self.kind != Kind::Gt)
        } else {
            None
        }
    }

    fn key(&self) -> Self::Key {
        let lead = self
            .coeffs
            .values()
            .next()
            .map(|c| c.abs())
            .unwrap_or_else(Rat::one);
        self.coeffs.iter().map(|(t, c)| (*t, c / &lead)).collect()
    }

    fn prov(&self) -> &Prov {
        &self.prov
    }
}

/// Translate stored comparisons and additive definitions into forms.
pub fn collect_additive(bb: &Blackboard) -> Vec<LinForm> {
    let mut out = Vec::new();
    let mut next = 0;
    let mut orig = |mut f: LinForm| {
        if f.kind != Kind::Eq {
            f.prov.hist.insert(next);
            next += 1;
        }
        f
    };
    let mut one = LinForm::new(&[(0, Rat::one())], Kind::Gt);
    one.prov.steps.insert(0);
    out.push(orig(one));
    for (c, step) in bb.comparisons() {
        if let Some(mut f) = LinForm::from_comparison(&c) {
            f.prov.steps.insert(step);
            out.push(orig(f));
        }
    }
    for i in 1..bb.num_terms() {
        if let Def::Sum(xs) = bb.def(i) {
            let mut terms = vec![(i, Rat::one())];
            terms.extend(xs.iter().map(|(c, t)| (*t, -c.clone())));
            let mut f = LinForm::new(&terms, Kind::Eq);
            f.prov.defs.insert(i);
            out.push(f);
        }
    }
    out
}

/// Eliminate `k` from `forms`.
pub fn eliminate(forms: Vec<LinForm>, k: TermId) -> Vec<LinForm> {
    let mut count = 0;
    match fm::eliminate(
        forms,
        k,
        &mut count,
        &Config {
            chernikov: false,
            ..Config::default()
        },
    ) {
        Outcome::Done(r) => r,
        Outcome::Contradiction(f) => vec![f],
        Outcome::Resource => Vec::new(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Report {
    pub asserted: usize,
    pub contradiction: bool,
    pub resource: bool,
}

fn step_for(f: &LinForm) -> Step {
    Step::new(
        "additive",
        "linear",
        f.prov.steps.iter().copied().collect(),
        Fact::absurd(),
    )
    .with_defs(f.prov.defs.iter().copied().collect())
}

/// The pairwise projections of the current additive system.
pub fn pair_forms(
    bb: &Blackboard,
    cfg: &Config,
) -> Outcome<Vec<((usize, usize), Vec<LinForm>)>, LinForm> {
    let forms = collect_additive(bb);
    let vars: BTreeSet<usize> = forms.iter().flat_map(|f| f.vars()).chain([0]).collect();
    let vars: Vec<usize> = vars.into_iter().collect();
    fm::project_pairs(forms, &vars, cfg)
}

/// Run one additive pass, asserting every derived pair comparison.
pub fn derive_additive(bb: &mut Blackboard, cfg: &Config) -> Report {
    let mut report = Report::default();
    match pair_forms(bb, cfg) {
        Outcome::Resource => report.resource = true,
        Outcome::Contradiction(f) => {
            bb.refute(step_for(&f));
            report.contradiction = true;
        }
        Outcome::Done(pairs) => {
            for (_, forms) in pairs {
                for f in forms {
                    let Some(n) = f.to_norm() else { continue };
                    if fm::oversized(&n, cfg) {
                        report.resource = true;
                        continue;
                    }
                    match bb.assert_norm(&n, step_for(&f)) {
                        Change::New | Change::Strengthened => report.asserted += 1,
                        Change::Contradiction => {
                            report.contradiction = true;
                            return report;
                        }
                        Change::Redundant => {}
                    }
                }
            }
        }
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::blackboard::Sign;
    use crate::parse::parse_expr;
    use crate::rat::{rat, ratq};
    use crate::term::{canonize, Term};

    fn form(terms: &[(TermId, i64)], kind: Kind) -> LinForm {
        let t: Vec<(TermId, Rat)> = terms.iter().map(|(v, c)| (*v, rat(*c))).collect();
        LinForm::new(&t, kind)
    }

    #[test]
    fn worked_elimination() {
        let a = form(&[(1, 3), (2, 2), (3, -1)], Kind::Gt);
        let b = form(&[(1, 4), (2, 1), (3, 1)], Kind::Ge);
        let c = form(&[(1, 2), (2, -1), (3, -2)], Kind::Ge);
        let out = eliminate(vec![a.clone(), b.clone()], 3);
        assert!(out
            .iter()
            .any(|f| f.coeffs == form(&[(1, 7), (2, 3)], Kind::Gt).coeffs && f.kind == Kind::Gt));
        let out = eliminate(vec![b, c], 3);
        assert!(out
            .iter()
            .any(|f| f.coeffs == form(&[(1, 10), (2, 1)], Kind::Ge).coeffs && f.kind == Kind::Ge));
        let untouched = form(&[(1, 1), (2, 1)], Kind::Ge);
        assert_eq!(eliminate(vec![untouched.clone()], 3), vec![untouched]);
        let _ = a;
    }

    #[test]
    fn translation() {
        let f = LinForm::from_comparison(&Comparison::new(1, Rel::Lt, rat(2), 2)).unwrap();
        assert_eq!(f.coeffs, form(&[(1, -1), (2, 2)], Kind::Gt).coeffs);
        assert_eq!(f.kind, Kind::Gt);
        assert!(LinForm::from_comparison(&Comparison::new(1, Rel::Ne, rat(1), 2)).is_none());
    }

    fn hyp() -> Step {
        Step::new("input", "hyp", vec![], Fact::absurd())
    }

    #[test]
    fn worked_pass() {
        let mut bb = Blackboard::new();
        for v in ["t1", "t2", "t3"] {
            bb.register(&Term::Var(v.into()));
        }
        let mut rows = Vec::new();
        for (c, k) in [
            ([3, 2, -1], Kind::Gt),
            ([4, 1, 1], Kind::Ge),
            ([2, -1, -2], Kind::Ge),
        ] {
            rows.push(form(&[(1, c[0]), (2, c[1]), (3, c[2])], k));
        }
        let pairs = match fm::project_pairs(rows, &[0, 1, 2, 3], &Config::default()) {
            Outcome::Done(p) => p,
            _ => panic!(),
        };
        let p12: Vec<Norm> = pairs
            .iter()
            .find(|(k, _)| *k == (1, 2))
            .unwrap()
            .1
            .iter()
            .filter_map(|f| f.to_norm())
            .collect();
        assert!(p12.contains(&Norm::Cmp(Comparison::new(1, Rel::Gt, ratq(-3, 7), 2))));
        assert!(p12.contains(&Norm::Cmp(Comparison::new(1, Rel::Ge, ratq(-1, 10), 2))));
        let _ = bb.assert_cmp(&Comparison::sign(1, Rel::Gt), hyp());
    }

    #[test]
    fn positivity_of_sum() {
        let mut bb = Blackboard::new();
        let s = canonize(&parse_expr("y + z").unwrap()).unwrap();
        let i = bb.register(&s.term);
        let (y, z) = (
            bb.lookup(&Term::Var("y".into())).unwrap(),
            bb.lookup(&Term::Var("z".into())).unwrap(),
        );
        bb.assert_cmp(&Comparison::sign(y, Rel::Ge), hyp());
        bb.assert_cmp(&Comparison::sign(z, Rel::Gt), hyp());
        assert_eq!(bb.sign_of(i), Sign::Unknown);
        let r = derive_additive(&mut bb, &Config::default());
        assert!(r.asserted > 0);
        assert_eq!(bb.sign_of(i), Sign::Pos);
    }

    #[test]
    fn contradiction_found() {
        let mut bb = Blackboard::new();
        let s = canonize(&parse_expr("x + y").unwrap()).unwrap();
        let i = bb.register(&s.term);
        let (x, y) = (
            bb.lookup(&Term::Var("x".into())).unwrap(),
            bb.lookup(&Term::Var("y".into())).unwrap(),
        );
        bb.assert_cmp(&Comparison::new(x, Rel::Gt, rat(1), 0), hyp());
        bb.assert_cmp(&Comparison::new(y, Rel::Gt, rat(1), 0), hyp());
        bb.assert_cmp(&Comparison::new(i, Rel::Lt, rat(2), 0), hyp());
        let r = derive_additive(&mut bb, &Config::default());
        assert!(r.contradiction);
        assert!(bb.has_contradiction());
    }
}
