//! Exact rational helpers.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

pub type Rat = BigRational;

pub fn rat(n: i64) -> Rat {
    Rat::from_integer(BigInt::from(n))
}

pub fn ratq(n: i64, d: i64) -> Rat {
    Rat::new(BigInt::from(n), BigInt::from(d))
}

/// `q^n` for any integer `n`. Panics on `0^n` with `n < 0`.
pub fn pow(q: &Rat, n: i64) -> Rat {
    if n >= 0 {
        num_traits::pow(q.clone(), n as usize)
    } else {
        num_traits::pow(q.recip(), n.unsigned_abs() as usize)
    }
}

/// Exact `n`-th root of a nonnegative rational, if it exists.
pub fn exact_root(q: &Rat, n: u32) -> Option<Rat> {
    if q.is_negative() {
        if n % 2 == 1 {
            return exact_root(&-q, n).map(|r| -r);
        }
        return None;
    }
    let p = q.numer().nth_root(n);
    let d = q.denom().nth_root(n);
    if num_traits::pow(p.clone(), n as usize) == *q.numer()
        && num_traits::pow(d.clone(), n as usize) == *q.denom()
    {
        Some(Rat::new(p, d))
    } else {
        None
    }
}

/// Rational approximation of the `n`-th root of a positive rational, with
/// six decimal digits. With `upper` the result is at least the true root,
/// otherwise at most. Exact roots are returned exactly.
pub fn approx_root(q: &Rat, n: u32, upper: bool) -> Rat {
    assert!(q.is_positive() && n >= 1);
    if let Some(r) = exact_root(q, n) {
        return r;
    }
    let scale = num_traits::pow(BigInt::from(10), 6 * n as usize);
    let scaled = (q.numer() * scale) / q.denom();
    let lo = scaled.nth_root(n);
    let unit = BigInt::from(1_000_000);
    let mut r = Rat::new(lo, unit.clone());
    if upper {
        r += Rat::new(BigInt::one(), unit);
    }
    r
}

/// Floor of a rational as a rational.
pub fn floor(q: &Rat) -> Rat {
    Rat::from_integer(q.floor().to_integer())
}

pub fn is_zero(q: &Rat) -> bool {
    q.is_zero()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roots() {
        assert_eq!(exact_root(&ratq(8, 27), 3), Some(ratq(2, 3)));
        assert_eq!(exact_root(&rat(2), 2), None);
        assert_eq!(exact_root(&rat(-8), 3), Some(rat(-2)));
        let lo = approx_root(&rat(2), 2, false);
        let hi = approx_root(&rat(2), 2, true);
        assert!(pow(&lo, 2) < rat(2) && pow(&hi, 2) > rat(2));
        assert_eq!(&hi - &lo, ratq(1, 1_000_000));
    }

    #[test]
    fn powers() {
        assert_eq!(pow(&ratq(2, 3), -2), ratq(9, 4));
        assert_eq!(pow(&rat(5), 0), rat(1));
    }
}
