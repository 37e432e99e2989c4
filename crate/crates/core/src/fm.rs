//! Fourier-Motzkin elimination, generic over the form representation.
//!
//! The additive module eliminates over rational linear forms, the
//! multiplicative module over exponent vectors with a rational coefficient.
//! Both share the elimination schedule, the redundancy filters and the
//! pairwise projection scheme implemented here.

use std::collections::{BTreeSet, HashMap};
use std::hash::Hash;

use crate::blackboard::Kind;
use crate::comparison::TermId;
use crate::proof::StepId;

/// Where a form came from.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Prov {
    pub steps: BTreeSet<StepId>,
    pub defs: BTreeSet<TermId>,
    /// Original inequalities the form was combined from.
    pub hist: BTreeSet<usize>,
}

impl Prov {
    pub fn merge(&self, other: &Prov) -> Prov {
        Prov {
            steps: self.steps.union(&other.steps).copied().collect(),
            defs: self.defs.union(&other.defs).copied().collect(),
            hist: self.hist.union(&other.hist).copied().collect(),
        }
    }

    /// Merge for equality substitution: the equality does not count toward
    /// the combination history.
    pub fn merge_eq(&self, eq: &Prov) -> Prov {
        Prov {
            steps: self.steps.union(&eq.steps).copied().collect(),
            defs: self.defs.union(&eq.defs).copied().collect(),
            hist: self.hist.clone(),
        }
    }
}

pub trait Form: Clone {
    type Key: Hash + Eq;

    fn vars(&self) -> Vec<usize>;
    /// Sign of the coefficient (or exponent) of `v`.
    fn sign(&self, v: usize) -> i32;
    fn kind(&self) -> Kind;
    /// Combine `p` (positive in `v`) and `n` (negative in `v`) so that `v`
    /// cancels. `None` if the result cannot be represented.
    fn combine(p: &Self, n: &Self, v: usize) -> Option<Self>;
    /// Use the equality `eq` to remove `v` from `r`.
    fn substitute(r: &Self, eq: &Self, v: usize) -> Option<Self>;
    /// For forms without variables: `Some(true)` if satisfied,
    /// `Some(false)` if contradictory. `None` if variables remain.
    fn trivial(&self) -> Option<bool>;
    /// Forms with equal keys are positive multiples of each other up to
    /// strictness.
    fn key(&self) -> Self::Key;
    fn prov(&self) -> &Prov;
    /// For forms with equal keys: whether `self` implies `other`.
    fn dominates(&self, other: &Self) -> bool {
        strength(self.kind()) >= strength(other.kind())
    }
}

#[derive(Debug, Clone)]
pub enum Outcome<T, F> {
    Done(T),
    Contradiction(F),
    Resource,
}

#[derive(Debug, Clone, Copy)]
pub struct Config {
    pub cap: usize,
    pub chernikov: bool,
    /// Derived comparisons whose coefficient needs more bits than this are
    /// dropped and reported as a resource limit.
    pub coeff_bits: u64,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            cap: 10_000,
            chernikov: true,
            coeff_bits: 256,
        }
    }
}

/// Whether a derived comparison exceeds the coefficient size limit.
pub fn oversized(n: &crate::comparison::Norm, cfg: &Config) -> bool {
    match n {
        crate::comparison::Norm::Cmp(c) => {
            c.coeff.numer().bits().max(c.coeff.denom().bits()) > cfg.coeff_bits
        }
        _ => false,
    }
}

fn strength(k: Kind) -> u8 {
    match k {
        Kind::Ge => 0,
        Kind::Gt => 1,
        Kind::Eq => 2,
    }
}

/// Remove duplicates (keeping the stronger form) and trivially true forms;
/// detect trivially false forms.
fn clean<F: Form>(rows: Vec<F>) -> Result<Vec<F>, F> {
    let mut out: Vec<F> = Vec::new();
    let mut seen: HashMap<(F::Key, bool), Vec<usize>> = HashMap::new();
    let mut dead = vec![];
    for r in rows {
        match r.trivial() {
            Some(true) => continue,
            Some(false) => return Err(r),
            None => {}
        }
        let eq = r.kind() == Kind::Eq;
        let group = seen.entry((r.key(), eq)).or_default();
        let mut skip = false;
        for &k in group.iter() {
            let old = &out[k];
            let fwd = r.dominates(old);
            let back = old.dominates(&r);
            if back && !(fwd && r.prov().steps.len() < old.prov().steps.len()) {
                skip = true;
                break;
            }
        }
        if skip {
            continue;
        }
        group.retain(|&k| {
            if r.dominates(&out[k]) {
                dead.push(k);
                false
            } else {
                true
            }
        });
        group.push(out.len());
        out.push(r);
    }
    dead.sort_unstable();
    dead.dedup();
    let mut i = 0;
    let mut idx = 0;
    out.retain(|_| {
        let keep = dead.get(i) != Some(&idx);
        if !keep {
            i += 1;
        }
        idx += 1;
        keep
    });
    Ok(out)
}

/// Eliminate `v`. `k` counts combination steps along this lineage.
pub fn eliminate<F: Form>(
    rows: Vec<F>,
    v: usize,
    k: &mut usize,
    cfg: &Config,
) -> Outcome<Vec<F>, F> {
    let eq_pos = rows
        .iter()
        .position(|r| r.kind() == Kind::Eq && r.sign(v) != 0);
    let next = match eq_pos {
        Some(e) => {
            let mut rows = rows;
            let eq = rows.remove(e);
            rows.into_iter()
                .filter_map(|r| {
                    if r.sign(v) == 0 {
                        Some(r)
                    } else {
                        F::substitute(&r, &eq, v)
                    }
                })
                .collect()
        }
        None => {
            let (mut out, mut pos, mut neg) = (Vec::new(), Vec::new(), Vec::new());
            for r in rows {
                match r.sign(v) {
                    0 => out.push(r),
                    s if s > 0 => pos.push(r),
                    _ => neg.push(r),
                }
            }
            if !pos.is_empty() || !neg.is_empty() {
                *k += 1;
            }
            let limit = *k + 1;
            for p in &pos {
                for n in &neg {
                    if let Some(c) = F::combine(p, n, v) {
                        if cfg.chernikov && c.prov().hist.len() > limit {
                            continue;
                        }
                        out.push(c);
                    }
                }
                if out.len() > cfg.cap {
                    return Outcome::Resource;
                }
            }
            out
        }
    };
    match clean(next) {
        Ok(rows) if rows.len() > cfg.cap => Outcome::Resource,
        Ok(rows) => Outcome::Done(rows),
        Err(bad) => Outcome::Contradiction(bad),
    }
}

fn cost<F: Form>(rows: &[F], v: usize) -> (u8, usize) {
    if rows.iter().any(|r| r.kind() == Kind::Eq && r.sign(v) != 0) {
        return (0, 0);
    }
    let pos = rows.iter().filter(|r| r.sign(v) > 0).count();
    let neg = rows.iter().filter(|r| r.sign(v) < 0).count();
    (1, pos * neg)
}

/// Eliminate every variable in `vars`, cheapest first.
pub fn eliminate_all<F: Form>(
    rows: Vec<F>,
    vars: &[usize],
    k: &mut usize,
    cfg: &Config,
) -> Outcome<Vec<F>, F> {
    let mut rows = rows;
    let mut todo: Vec<usize> = vars.to_vec();
    while !todo.is_empty() {
        let (best, _) = todo
            .iter()
            .enumerate()
            .min_by_key(|(_, &v)| (cost(&rows, v), v))
            .expect("nonempty");
        let v = todo.swap_remove(best);
        rows = match eliminate(rows, v, k, cfg) {
            Outcome::Done(r) => r,
            other => return other,
        };
    }
    Outcome::Done(rows)
}

/// Project onto every pair of `vars`. Returns, for each pair `(a, b)` with
/// `a < b`, the forms mentioning no variable outside `{a, b}`.
pub fn project_pairs<F: Form>(
    rows: Vec<F>,
    vars: &[usize],
    cfg: &Config,
) -> Outcome<Vec<((usize, usize), Vec<F>)>, F> {
    let mut vars = vars.to_vec();
    vars.sort_unstable();
    vars.dedup();
    let all: BTreeSet<usize> = rows.iter().flat_map(|r| r.vars()).collect();
    let outside: Vec<usize> = all
        .iter()
        .copied()
        .filter(|v| vars.binary_search(v).is_err())
        .collect();
    let mut k = 0;
    let rows = match eliminate_all(rows, &outside, &mut k, cfg) {
        Outcome::Done(r) => r,
        Outcome::Contradiction(f) => return Outcome::Contradiction(f),
        Outcome::Resource => return Outcome::Resource,
    };
    let mut out = Vec::new();
    match within(rows, &vars, k, cfg, &mut out) {
        Outcome::Done(()) => Outcome::Done(out),
        Outcome::Contradiction(f) => Outcome::Contradiction(f),
        Outcome::Resource => Outcome::Resource,
    }
}

type Sink<F> = Vec<((usize, usize), Vec<F>)>;

fn within<F: Form>(
    rows: Vec<F>,
    s: &[usize],
    k: usize,
    cfg: &Config,
    out: &mut Sink<F>,
) -> Outcome<(), F> {
    if s.len() < 2 {
        return Outcome::Done(());
    }
    if s.len() == 2 {
        out.push(((s[0], s[1]), rows));
        return Outcome::Done(());
    }
    let (s1, s2) = s.split_at(s.len() / 2);
    for (keep, drop) in [(s1, s2), (s2, s1)] {
        let mut k2 = k;
        match eliminate_all(rows.clone(), drop, &mut k2, cfg) {
            Outcome::Done(r) => match within(r, keep, k2, cfg, out) {
                Outcome::Done(()) => {}
                other => return other,
            },
            Outcome::Contradiction(f) => return Outcome::Contradiction(f),
            Outcome::Resource => return Outcome::Resource,
        }
    }
    cross(rows, s1, s2, k, cfg, out)
}

fn cross<F: Form>(
    rows: Vec<F>,
    a: &[usize],
    b: &[usize],
    k: usize,
    cfg: &Config,
    out: &mut Sink<F>,
) -> Outcome<(), F> {
    if a.len() == 1 && b.len() == 1 {
        let (x, y) = if a[0] < b[0] {
            (a[0], b[0])
        } else {
            (b[0], a[0])
        };
        out.push(((x, y), rows));
        return Outcome::Done(());
    }
    let (split, other, first) = if a.len() >= b.len() {
        (a, b, true)
    } else {
        (b, a, false)
    };
    let (h1, h2) = split.split_at(split.len() / 2);
    for (keep, drop) in [(h1, h2), (h2, h1)] {
        let mut k2 = k;
        match eliminate_all(rows.clone(), drop, &mut k2, cfg) {
            Outcome::Done(r) => {
                let res = if first {
                    cross(r, keep, other, k2, cfg, out)
                } else {
                    cross(r, other, keep, k2, cfg, out)
                };
                match res {
                    Outcome::Done(()) => {}
                    other => return other,
                }
            }
            Outcome::Contradiction(f) => return Outcome::Contradiction(f),
            Outcome::Resource => return Outcome::Resource,
        }
    }
    Outcome::Done(())
}
