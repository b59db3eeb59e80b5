//! Exact rational arithmetic helpers and the dyadic-interval primitive.
//!
//! All quantities in this crate — capitals, probabilities, cumulative sums,
//! masses, thresholds — are arbitrary-precision rationals. Growth exponents s
//! are never materialized as reals: whenever 2^s is rational the code carries
//! the growth factor rho = 2^s itself, and every power 2^{s·e} is computed as
//! rho^e. Comparisons between powers with fractional exponents are done by
//! cross-raising to integer exponents.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use num_bigint::{BigInt, BigUint};
use num_traits::{One, Pow, Signed, Zero};

use crate::error::{Error, Result};

pub type Rational = num_rational::BigRational;

/// Convenience constructor from small integers. Panics on q = 0.
pub fn rat(p: i64, q: i64) -> Rational {
    Rational::new(BigInt::from(p), BigInt::from(q))
}

/// Parse "p/q" or integer text. No decimal floats; the denominator must be
/// a positive integer.
pub fn parse_rational(s: &str) -> Result<Rational> {
    let bad = || Error::BadRational(s.to_string());
    let t = s.trim();
    let (num_text, den_text) = match t.split_once('/') {
        Some((n, d)) => (n, Some(d)),
        None => (t, None),
    };
    let numer = BigInt::from_str(num_text.trim()).map_err(|_| bad())?;
    let denom = match den_text {
        Some(d) => BigInt::from_str(d.trim()).map_err(|_| bad())?,
        None => BigInt::one(),
    };
    if denom <= BigInt::zero() {
        return Err(bad());
    }
    Ok(Rational::new(numer, denom))
}

/// Format as "p/q", or just "p" when the denominator is 1.
pub fn format_rational(r: &Rational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Exact `base^n` for positive `base`; `n` may be negative.
pub fn pow_rational(base: &Rational, n: i64) -> Rational {
    assert!(base.is_positive(), "pow_rational needs a positive base");
    let e = u32::try_from(n.unsigned_abs()).expect("exponent magnitude too large");
    let num = Pow::pow(base.numer(), e);
    let den = Pow::pow(base.denom(), e);
    if n >= 0 {
        Rational::new(num, den)
    } else {
        Rational::new(den, num)
    }
}

/// Exact 2^e as a rational; e may be negative.
pub fn two_pow(e: i64) -> Rational {
    pow_rational(&rat(2, 1), e)
}

/// Largest integer e with 2^e <= r, for r > 0. Exact: no floating log.
pub fn floor_log2(r: &Rational) -> i64 {
    assert!(r.is_positive(), "floor_log2 needs a positive argument");
    let p = r.numer().magnitude();
    let q = r.denom().magnitude();
    // bits(p) = a means 2^{a-1} <= p < 2^a, so p/q lies strictly between
    // 2^{a-b-1} and 2^{a-b+1}; the floor is a-b or a-b-1.
    let g = p.bits() as i64 - q.bits() as i64;
    let holds = |e: i64| -> bool {
        // Does r >= 2^e hold?
        if e >= 0 {
            *p >= q << u64::try_from(e).unwrap()
        } else {
            p << u64::try_from(-e).unwrap() >= *q
        }
    };
    if holds(g) {
        g
    } else {
        g - 1
    }
}

/// Exact comparison of a^ea versus b^eb for positive rationals.
pub fn cmp_pow(a: &Rational, ea: u64, b: &Rational, eb: u64) -> Ordering {
    let lhs = pow_rational(a, i64::try_from(ea).expect("exponent too large"));
    let rhs = pow_rational(b, i64::try_from(eb).expect("exponent too large"));
    lhs.cmp(&rhs)
}

/// The interval [j/2^k, (j+1)/2^k], always a sub-interval of [0, 1].
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct DyadicInterval {
    j: BigUint,
    k: u32,
}

impl DyadicInterval {
    pub fn new(j: BigUint, k: u32) -> Result<Self> {
        if j.bits() > u64::from(k) {
            return Err(Error::BadDyadic { j: j.to_string(), k });
        }
        Ok(DyadicInterval { j, k })
    }

    pub fn numerator(&self) -> &BigUint {
        &self.j
    }

    pub fn log_denominator(&self) -> u32 {
        self.k
    }

    pub fn lower(&self) -> Rational {
        Rational::new(BigInt::from(self.j.clone()), BigInt::one() << self.k)
    }

    pub fn upper(&self) -> Rational {
        Rational::new(
            BigInt::from(self.j.clone() + BigUint::one()),
            BigInt::one() << self.k,
        )
    }

    pub fn width(&self) -> Rational {
        Rational::new(BigInt::one(), BigInt::one() << self.k)
    }

    pub fn contains(&self, x: &Rational) -> bool {
        &self.lower() <= x && x <= &self.upper()
    }

    pub fn subset_of(&self, a: &Rational, b: &Rational) -> bool {
        &self.lower() >= a && &self.upper() <= b
    }
}

impl fmt::Display for DyadicInterval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "[{}/2^{}, {}/2^{}]",
            self.j,
            self.k,
            self.j.clone() + BigUint::one(),
            self.k
        )
    }
}

/// The dyadic interval [j/2^{m+2}, (j+1)/2^{m+2}] contained in [a, b], where
/// m is the largest integer with 2^m <= 1/(b-a). Such an interval always
/// exists because [a, b] spans strictly more than two grid cells at
/// resolution 2^{-(m+2)}. Among the valid j the smallest is returned, which
/// makes the choice deterministic.
pub fn contained_dyadic(a: &Rational, b: &Rational) -> Result<DyadicInterval> {
    let bad = || Error::BadInterval {
        a: format_rational(a),
        b: format_rational(b),
    };
    if a < &Rational::zero() || b <= a || b > &Rational::one() {
        return Err(bad());
    }
    let width = b - a;
    let m = floor_log2(&(Rational::one() / &width));
    debug_assert!(m >= 0);
    let k = u32::try_from(m + 2).expect("interval too narrow");
    // Smallest j with j/2^k >= a.
    let scaled = a * two_pow(i64::from(k));
    let j_int: BigInt = scaled.ceil().to_integer();
    let j = j_int.magnitude().clone();
    let interval = DyadicInterval::new(j, k)?;
    assert!(
        interval.subset_of(a, b),
        "containment must hold by the width bound"
    );
    Ok(interval)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha12Rng;

    #[test]
    fn parse_and_format() {
        assert_eq!(parse_rational("3/4").unwrap(), rat(3, 4));
        assert_eq!(parse_rational(" -7 ").unwrap(), rat(-7, 1));
        assert_eq!(parse_rational("6/4").unwrap(), rat(3, 2));
        assert!(parse_rational("1.5").is_err());
        assert!(parse_rational("3/0").is_err());
        assert!(parse_rational("3/-2").is_err());
        assert!(parse_rational("").is_err());
        assert_eq!(format_rational(&rat(3, 2)), "3/2");
        assert_eq!(format_rational(&rat(-8, 4)), "-2");
    }

    #[test]
    fn powers() {
        assert_eq!(pow_rational(&rat(3, 2), 0), rat(1, 1));
        assert_eq!(pow_rational(&rat(3, 2), 3), rat(27, 8));
        assert_eq!(pow_rational(&rat(3, 2), -2), rat(4, 9));
        assert_eq!(two_pow(-3), rat(1, 8));
    }

    #[test]
    fn floor_log2_against_scan() {
        let cases = [
            rat(1, 1),
            rat(7, 2),
            rat(8, 1),
            rat(1, 3),
            rat(10, 3),
            rat(1, 8),
            rat(255, 16),
            rat(1, 1000),
            rat(1000, 1),
        ];
        for r in &cases {
            let fast = floor_log2(r);
            // Oracle: scan exponents until the bracket flips.
            let mut e = -2000i64;
            while two_pow(e + 1) <= *r {
                e += 1;
            }
            assert_eq!(fast, e, "floor_log2({})", format_rational(r));
        }
    }

    #[test]
    fn cmp_pow_cases() {
        // (3/2)^4 = 81/16 > 5 = 5^1
        assert_eq!(cmp_pow(&rat(3, 2), 4, &rat(5, 1), 1), Ordering::Greater);
        // 2^10 < (3/2)^18
        assert_eq!(cmp_pow(&rat(2, 1), 10, &rat(3, 2), 18), Ordering::Less);
        assert_eq!(cmp_pow(&rat(4, 1), 3, &rat(2, 1), 6), Ordering::Equal);
    }

    #[test]
    fn dyadic_examples() {
        // Full interval: width 1 forces m=0, and the first quarter is chosen.
        let d = contained_dyadic(&rat(0, 1), &rat(1, 1)).unwrap();
        assert_eq!((d.numerator().clone(), d.log_denominator()), (0u32.into(), 2));

        let d = contained_dyadic(&rat(1, 2), &rat(1, 1)).unwrap();
        assert_eq!((d.numerator().clone(), d.log_denominator()), (4u32.into(), 3));

        let d = contained_dyadic(&rat(3, 10), &rat(6, 10)).unwrap();
        assert_eq!((d.numerator().clone(), d.log_denominator()), (3u32.into(), 3));
        assert_eq!(d.lower(), rat(3, 8));
        assert_eq!(d.upper(), rat(1, 2));
    }

    #[test]
    fn dyadic_rejects_bad_input() {
        assert!(contained_dyadic(&rat(1, 2), &rat(1, 2)).is_err());
        assert!(contained_dyadic(&rat(2, 3), &rat(1, 3)).is_err());
        assert!(contained_dyadic(&rat(-1, 10), &rat(1, 2)).is_err());
        assert!(contained_dyadic(&rat(1, 2), &rat(11, 10)).is_err());
    }

    #[test]
    fn dyadic_random_containment_and_width() {
        // 10^4 random sub-intervals of [0,1] with width >= 2^-20: the result
        // is contained, has width exactly 2^-(m+2), and j is minimal.
        let mut rng = ChaCha12Rng::seed_from_u64(0x9e3779b97f4a7c15);
        for _ in 0..10_000 {
            let den = 1u64 << rng.gen_range(1..=20);
            let lo = rng.gen_range(0..den - 1);
            let hi = rng.gen_range(lo + 1..=den);
            let a = Rational::new(BigInt::from(lo), BigInt::from(den));
            let b = Rational::new(BigInt::from(hi), BigInt::from(den));
            let d = contained_dyadic(&a, &b).unwrap();
            assert!(d.subset_of(&a, &b));
            let m = floor_log2(&(Rational::one() / (&b - &a)));
            assert_eq!(u64::from(d.log_denominator()), (m + 2) as u64);
            // Minimality: the next interval to the left leaves [a, b].
            if !d.numerator().is_zero() {
                let left = DyadicInterval::new(
                    d.numerator() - BigUint::one(),
                    d.log_denominator(),
                )
                .unwrap();
                assert!(left.lower() < a);
            }
        }
    }

    #[test]
    fn arithmetic_round_trip() {
        let mut rng = ChaCha12Rng::seed_from_u64(7);
        for _ in 0..1000 {
            let x = rat(rng.gen_range(-50..50), rng.gen_range(1..50));
            let y = rat(rng.gen_range(-50..50), rng.gen_range(1..50));
            assert_eq!(&(&x + &y) - &y, x);
            if !y.is_zero() {
                assert_eq!(&(&x * &y) / &y, x);
            }
        }
    }
}
