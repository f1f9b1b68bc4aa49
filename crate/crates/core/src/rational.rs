//! The coefficient field: arbitrary-precision rationals.
//!
//! All kernel arithmetic is exact. Values are `num::BigRational`, always in
//! reduced form with a positive denominator (maintained by `num` itself).

use num::bigint::Sign;
use num::{BigInt, BigRational, One, Signed, Zero};

pub type Rat = BigRational;

/// Shorthand for a rational from machine integers.
pub fn rat(num: i64, den: i64) -> Rat {
    Rat::new(BigInt::from(num), BigInt::from(den))
}

pub fn rat_int(num: i64) -> Rat {
    Rat::from(BigInt::from(num))
}

/// Exact principal m-th root of an integer, if it exists.
fn int_nth_root_exact(v: &BigInt, m: u32) -> Option<BigInt> {
    if m == 0 {
        return None;
    }
    if v.is_zero() {
        return Some(BigInt::zero());
    }
    if v.sign() == Sign::Minus {
        if m % 2 == 0 {
            return None;
        }
        return int_nth_root_exact(&-v, m).map(|r| -r);
    }
    let root = v.nth_root(m);
    if num::pow::pow(root.clone(), m as usize) == *v {
        Some(root)
    } else {
        None
    }
}

/// Exact principal m-th root of a rational: positive when one exists,
/// the real root for odd m and negative input. `None` when the value is
/// not an m-th power in the rationals.
pub fn rat_nth_root_exact(r: &Rat, m: u32) -> Option<Rat> {
    let num = int_nth_root_exact(r.numer(), m)?;
    let den = int_nth_root_exact(r.denom(), m)?;
    Some(Rat::new(num, den))
}

/// Generalized binomial coefficient `C(i, k)` with integer (possibly
/// negative) top index: `i(i-1)...(i-k+1) / k!`.
pub fn binom_int(i: i64, k: u64) -> Rat {
    if k == 0 {
        return Rat::one();
    }
    let mut num = BigInt::one();
    for j in 0..k {
        num *= BigInt::from(i - j as i64);
    }
    let mut den = BigInt::one();
    for j in 1..=k {
        den *= BigInt::from(j);
    }
    Rat::new(num, den)
}

/// Generalized binomial coefficient with rational top index, e.g. `C(1/m, k)`
/// for branch expansions of m-th roots.
pub fn binom_rat(top: &Rat, k: u64) -> Rat {
    let mut acc = Rat::one();
    for j in 0..k {
        acc *= top - rat_int(j as i64);
        acc /= rat_int(j as i64 + 1);
    }
    acc
}

/// Falling factorial `q(q-1)...(q-k+1)` as a rational, for derivative
/// coefficients of monomials `x^q` with integer q.
pub fn falling(q: i64, k: u64) -> Rat {
    let mut acc = BigInt::one();
    for j in 0..k {
        acc *= BigInt::from(q - j as i64);
    }
    Rat::from(acc)
}

/// Renders `p/q`, or just `p` for integers.
pub fn rat_to_string(r: &Rat) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// True when the rational is a negative number.
pub fn rat_is_negative(r: &Rat) -> bool {
    r.is_negative()
}
