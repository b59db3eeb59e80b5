//! Brute-force re-derivations used to cross-check the fast paths.
//!
//! Nothing here shares a code path with the operations it checks: capitals
//! are recomputed from the betting rule directly or through full per-string
//! folds, sums are literal, and walks are exhaustive. The point is
//! independence, not speed; every entry point refuses instance sizes past
//! its exhaustive budget.

use std::collections::BTreeSet;
use std::fmt;

use num_traits::Zero;

use crate::bits::BitString;
use crate::error::{Error, Result};
use crate::gale::BettingStrategy;
use crate::numerics::{pow_rational, Rational};

/// One oracle comparison: an expected value (frozen or analytically derived)
/// against what the checked implementation produced.
#[derive(Clone, Debug)]
pub struct OracleReport {
    pub name: String,
    pub instance_size: u64,
    pub expected: String,
    pub actual: String,
    pub pass: bool,
}

impl OracleReport {
    pub fn compare(name: &str, instance_size: u64, expected: String, actual: String) -> Self {
        let pass = expected == actual;
        OracleReport {
            name: name.to_string(),
            instance_size,
            expected,
            actual,
            pass,
        }
    }
}

impl fmt::Display for OracleReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} n={} expected={} actual={} {}",
            self.name,
            self.instance_size,
            self.expected,
            self.actual,
            if self.pass { "PASS" } else { "FAIL" }
        )
    }
}

/// Counts strings `w` of length `n` whose capital ever reaches `c * d(w')`
/// along `w'w`, by walking the full depth-`n` tree below `w'` and pruning at
/// the first hit (every extension of a hit prefix counts).
///
/// This is the exhaustive side of the capital-counting inequality: the caller
/// asserts `count <= 2^n / c`. Capitals are folded here from the betting rule
/// directly, independent of the strategy's own walker.
pub fn kolmogorov_count(
    d: &BettingStrategy,
    w_prime: &BitString,
    n: u32,
    c: &Rational,
) -> Result<u64> {
    if n > 14 {
        return Err(Error::DepthGuard(format!("kolmogorov_count at n={n}")));
    }
    let base = fold_capital(d, w_prime);
    let goal = c * &base;
    let mut prefix = w_prime.clone();
    Ok(count_hits(d, &mut prefix, base, &goal, w_prime.len() + n as usize))
}

fn fold_capital(d: &BettingStrategy, w: &BitString) -> Rational {
    let mut cap = d.initial_capital().clone();
    let mut prefix = BitString::empty();
    for b in w.iter() {
        let (s0, s1) = d.shares_at(&prefix);
        cap = d.growth().rho() * cap * if b { s1 } else { s0 };
        prefix.push(b);
    }
    cap
}

fn count_hits(
    d: &BettingStrategy,
    prefix: &mut BitString,
    cap: Rational,
    goal: &Rational,
    full_len: usize,
) -> u64 {
    if cap >= *goal {
        return 1u64 << (full_len - prefix.len());
    }
    if prefix.len() == full_len {
        return 0;
    }
    let (s0, s1) = d.shares_at(prefix);
    let scaled = d.growth().rho() * cap;
    let c0 = &scaled * s0;
    let c1 = scaled * s1;
    prefix.push(false);
    let mut total = count_hits(d, prefix, c0, goal, full_len);
    prefix.pop();
    prefix.push(true);
    total += count_hits(d, prefix, c1, goal, full_len);
    prefix.pop();
    total
}

/// The literal cumulative sum `sum of p(y) over y < x of the same length`,
/// with `p(y) = d(y) / rho^{|x|}`: one full capital fold per smaller string,
/// no telescoping anywhere.
pub fn naive_cumulative(d: &BettingStrategy, x: &BitString) -> Result<Rational> {
    let n = x.len();
    if n > 12 {
        return Err(Error::DepthGuard(format!("naive_cumulative at n={n}")));
    }
    let denom = pow_rational(d.growth().rho(), n as i64);
    let mut total = Rational::zero();
    for y in BitString::all_of_len(n) {
        if y >= *x {
            break;
        }
        total += fold_capital(d, &y) / &denom;
    }
    Ok(total)
}

/// Cumulative sums for every string of length `n` in lexicographic order,
/// accumulated as a single running total (each entry is the literal sum of
/// all earlier `p(y)`).
pub fn naive_cumulative_table(
    d: &BettingStrategy,
    n: u32,
) -> Result<Vec<(BitString, Rational)>> {
    if n > 12 {
        return Err(Error::DepthGuard(format!("naive_cumulative_table at n={n}")));
    }
    let denom = pow_rational(d.growth().rho(), n as i64);
    let mut running = Rational::zero();
    let mut out = Vec::with_capacity(1usize << n);
    for y in BitString::all_of_len(n as usize) {
        out.push((y.clone(), running.clone()));
        running += fold_capital(d, &y) / &denom;
    }
    Ok(out)
}

/// The exact set `{x of length n : d(x) > threshold}`, one full fold per
/// string.
pub fn exhaustive_success_set(
    d: &BettingStrategy,
    n: u32,
    threshold: &Rational,
) -> Result<BTreeSet<BitString>> {
    if n > 14 {
        return Err(Error::DepthGuard(format!("exhaustive_success_set at n={n}")));
    }
    Ok(BitString::all_of_len(n as usize)
        .filter(|x| fold_capital(d, x) > *threshold)
        .collect())
}
