//! Relations and normalized comparisons between problem terms.

use std::fmt;

use num_traits::{Signed, Zero};

use crate::rat::Rat;

/// Index of a registered problem term. Index 0 is the constant term `1`.
pub type TermId = usize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Rel {
    Lt,
    Le,
    Eq,
    Ge,
    Gt,
    Ne,
}

impl Rel {
    pub const ALL: [Rel; 6] = [Rel::Lt, Rel::Le, Rel::Eq, Rel::Ge, Rel::Gt, Rel::Ne];

    /// The relation obtained by exchanging both sides (`a < b` iff `b > a`).
    pub fn flip(self) -> Rel {
        match self {
            Rel::Lt => Rel::Gt,
            Rel::Le => Rel::Ge,
            Rel::Gt => Rel::Lt,
            Rel::Ge => Rel::Le,
            r => r,
        }
    }

    /// Logical negation.
    pub fn negate(self) -> Rel {
        match self {
            Rel::Lt => Rel::Ge,
            Rel::Le => Rel::Gt,
            Rel::Eq => Rel::Ne,
            Rel::Ge => Rel::Lt,
            Rel::Gt => Rel::Le,
            Rel::Ne => Rel::Eq,
        }
    }

    pub fn is_strict(self) -> bool {
        matches!(self, Rel::Lt | Rel::Gt)
    }

    /// Evaluate `a rel b`.
    pub fn holds<T: PartialOrd>(self, a: &T, b: &T) -> bool {
        match self {
            Rel::Lt => a < b,
            Rel::Le => a <= b,
            Rel::Eq => a == b,
            Rel::Ge => a >= b,
            Rel::Gt => a > b,
            Rel::Ne => a != b,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            Rel::Lt => "<",
            Rel::Le => "<=",
            Rel::Eq => "=",
            Rel::Ge => ">=",
            Rel::Gt => ">",
            Rel::Ne => "!=",
        }
    }

    pub fn from_symbol(s: &str) -> Option<Rel> {
        Rel::ALL.into_iter().find(|r| r.symbol() == s)
    }
}

impl fmt::Display for Rel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}

/// `t_lhs rel coeff * t_rhs`. With `rhs == 0` this is a comparison with the
/// constant `coeff`; otherwise `lhs < rhs` and `coeff != 0`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Comparison {
    pub lhs: TermId,
    pub rel: Rel,
    pub coeff: Rat,
    pub rhs: TermId,
}

impl Comparison {
    pub fn new(lhs: TermId, rel: Rel, coeff: Rat, rhs: TermId) -> Comparison {
        Comparison {
            lhs,
            rel,
            coeff,
            rhs,
        }
    }

    /// `t_i rel 0`.
    pub fn sign(i: TermId, rel: Rel) -> Comparison {
        Comparison {
            lhs: i,
            rel,
            coeff: Rat::zero(),
            rhs: 0,
        }
    }

    /// Linear form `sum a_k t_k rel 0` equivalent to this comparison.
    pub fn linear(&self) -> (Vec<(TermId, Rat)>, Rel) {
        let mut terms = vec![(self.lhs, num_traits::One::one())];
        if !self.coeff.is_zero() {
            terms.push((self.rhs, -self.coeff.clone()));
        }
        (terms, self.rel)
    }

    pub fn negated(&self) -> Comparison {
        Comparison {
            rel: self.rel.negate(),
            ..self.clone()
        }
    }

    pub fn terms(&self) -> Vec<TermId> {
        if self.coeff.is_zero() || self.rhs == 0 {
            vec![self.lhs]
        } else {
            vec![self.lhs, self.rhs]
        }
    }

    /// Evaluate under values of the problem terms.
    pub fn holds(&self, value: &dyn Fn(TermId) -> Rat) -> bool {
        let l = value(self.lhs);
        let r = &self.coeff * value(self.rhs);
        self.rel.holds(&l, &r)
    }
}

impl fmt::Display for Comparison {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "t{} {} ", self.lhs, self.rel)?;
        let c = &self.coeff;
        let num = if c.is_integer() {
            format!("{}", c.numer())
        } else {
            format!("{}/{}", c.numer(), c.denom())
        };
        if self.rhs == 0 {
            write!(f, "{num}")
        } else {
            write!(f, "{num}*t{}", self.rhs)
        }
    }
}

/// Result of normalizing a linear comparison.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Norm {
    True,
    False,
    Cmp(Comparison),
}

/// Normalize `sum a_k t_k rel 0`, which must mention at most two distinct
/// non-constant problem terms once like terms are merged. Returns `None` when
/// more than two remain.
pub fn normalize(terms: &[(TermId, Rat)], rel: Rel) -> Option<Norm> {
    let mut merged: Vec<(TermId, Rat)> = Vec::new();
    for (t, a) in terms {
        match merged.iter_mut().find(|(u, _)| u == t) {
            Some(slot) => slot.1 += a,
            None => merged.push((*t, a.clone())),
        }
    }
    merged.retain(|(_, a)| !a.is_zero());
    merged.sort_by_key(|(t, _)| *t);
    let zero = Rat::zero();
    match merged.as_slice() {
        [] => Some(if rel.holds(&zero, &zero) {
            Norm::True
        } else {
            Norm::False
        }),
        [(0, a)] => Some(if rel.holds(a, &zero) {
            Norm::True
        } else {
            Norm::False
        }),
        [(i, a)] => Some(Norm::Cmp(Comparison::sign(*i, oriented(rel, a)))),
        [(i, a), (j, b)] => {
            let (lhs, rhs) = if *i == 0 { (*j, *i) } else { (*i, *j) };
            let (la, rb) = if *i == 0 { (b, a) } else { (a, b) };
            Some(Norm::Cmp(Comparison {
                lhs,
                rel: oriented(rel, la),
                coeff: -(rb / la),
                rhs,
            }))
        }
        _ => None,
    }
}

fn oriented(rel: Rel, divisor: &Rat) -> Rel {
    if divisor.is_negative() {
        rel.flip()
    } else {
        rel
    }
}

/// Normalize `c1 * t_i rel c2 * t_j`.
pub fn normalize_pair(c1: Rat, i: TermId, rel: Rel, c2: Rat, j: TermId) -> Norm {
    normalize(&[(i, c1), (j, -c2)], rel).expect("two terms")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat::{rat, ratq};

    #[test]
    fn orientation() {
        // 3 t5 < 2 t3  ->  t3 > 3/2 t5
        let n = normalize_pair(rat(3), 5, Rel::Lt, rat(2), 3);
        assert_eq!(n, Norm::Cmp(Comparison::new(3, Rel::Gt, ratq(3, 2), 5)));
        // -2 t4 <= 6  ->  t4 >= -3
        let n = normalize(&[(4, rat(-2)), (0, rat(-6))], Rel::Le).unwrap();
        assert_eq!(n, Norm::Cmp(Comparison::new(4, Rel::Ge, rat(-3), 0)));
        // 1 < 0
        assert_eq!(normalize_pair(rat(1), 0, Rel::Lt, rat(0), 0), Norm::False);
        assert_eq!(normalize_pair(rat(2), 7, Rel::Le, rat(2), 7), Norm::True);
    }

    #[test]
    fn negation_is_involutive() {
        for r in Rel::ALL {
            assert_eq!(r.negate().negate(), r);
            assert_eq!(r.flip().flip(), r);
        }
    }

    #[test]
    fn display() {
        assert_eq!(
            Comparison::new(3, Rel::Lt, rat(4), 5).to_string(),
            "t3 < 4*t5"
        );
        assert_eq!(
            Comparison::new(2, Rel::Ge, ratq(-1, 2), 0).to_string(),
            "t2 >= -1/2"
        );
    }
}
