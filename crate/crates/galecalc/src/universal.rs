//! Weighted combination of a finite strategy roster into one exact s-gale.
//!
//! For `2^n <= |x| < 2^{n+1}` (and `n = 0` at the empty string) the combined
//! capital is
//!
//! ```text
//! d~(x) = 2^{-n} * (rho/2)^{|x|}  +  sum over i in 1..=n of 2^{-i} * M_i'(x)
//! ```
//!
//! where `M_i'` is the member's capital renormalized to 1 at its checkpoint
//! `x restricted to 2^i`, scaled by the even-bet weight `(rho/2)^{2^i}` it
//! would have held up to that point. Indices without a roster member bet
//! evenly, `M_i'(x) = (rho/2)^{|x|}`; the tail term is exactly the combined
//! weight of all not-yet-activated indices doing the same. Activation is
//! therefore seamless: at `|x| = 2^i` the entering member's factor equals its
//! even-bet continuation, so each length step of `d~` is a plain convex step
//! of its parts and the whole is an exact s-gale whenever the parts step
//! lawfully.
//!
//! Members are not trusted to step lawfully. Each one is metered and audited
//! along the evaluated string, and the first violation freezes it:
//!
//! - initial capital different from 1 (frozen at 0, before any bet),
//! - cumulative split cost exceeding the member's budget `t(j) = j^e`,
//! - a split that breaks `rho * M(x|j) = M(x|j 0) + M(x|j 1)` against the
//!   combined growth, or pays a negative share.
//!
//! A member frozen at `j` bets evenly from length `j` on, forever; if it
//! never reached its checkpoint (`j < 2^i`) its factor is fully even and it
//! is indistinguishable from an absent index.

use std::collections::BTreeMap;
use std::sync::Arc;

use num_bigint::BigUint;
use num_traits::{One, Zero};

use crate::bits::BitString;
use crate::error::{Error, Result};
use crate::gale::{
    BetRule, BettingStrategy, CapitalSource, GrowthFactor, StrategyKind,
};
use crate::numerics::{pow_rational, two_pow, Rational};

/// One roster entry: a strategy claiming to be an s-gale for the combined
/// growth, with the split-cost budget `t(j) = j^budget_exponent` it is held
/// to.
#[derive(Clone, Debug)]
pub struct StrategyProgram {
    pub index: u32,
    pub strategy: BettingStrategy,
    pub budget_exponent: u32,
}

impl StrategyProgram {
    pub fn new(index: u32, strategy: BettingStrategy, budget_exponent: u32) -> Self {
        StrategyProgram {
            index,
            strategy,
            budget_exponent,
        }
    }

    fn budget(&self, j: u64) -> BigUint {
        BigUint::from(j).pow(self.budget_exponent)
    }
}

/// The combined gale over a fixed roster. Evaluation is pure: every query
/// recomputes member capitals and freeze points from scratch, so concurrent
/// use needs no shared state.
#[derive(Clone)]
pub struct CombinedGale {
    members: BTreeMap<u32, StrategyProgram>,
    growth: GrowthFactor,
}

/// Builds the combined gale, checking only roster shape; member misbehavior
/// is never an error here because freezing absorbs it during evaluation.
pub fn combine(roster: Vec<StrategyProgram>, growth: GrowthFactor) -> Result<CombinedGale> {
    let mut members = BTreeMap::new();
    for prog in roster {
        if prog.index == 0 || prog.index > 30 {
            return Err(Error::BadRoster(format!(
                "member index {} out of range 1..=30",
                prog.index
            )));
        }
        if members.insert(prog.index, prog).is_some() {
            return Err(Error::BadRoster("duplicate member index".to_string()));
        }
    }
    // Later members get at least as much of the meter: budgets are monotone
    // non-decreasing in index order.
    let mut last_exponent = 0u32;
    for prog in members.values() {
        if prog.budget_exponent < last_exponent {
            return Err(Error::BadRoster(format!(
                "budget exponents must be non-decreasing by index; member {} has {} after {}",
                prog.index, prog.budget_exponent, last_exponent
            )));
        }
        last_exponent = prog.budget_exponent;
    }
    Ok(CombinedGale { members, growth })
}

impl CombinedGale {
    pub fn growth(&self) -> &GrowthFactor {
        &self.growth
    }

    pub fn member_indices(&self) -> impl Iterator<Item = u32> + '_ {
        self.members.keys().copied()
    }

    pub fn member(&self, index: u32) -> Result<&StrategyProgram> {
        self.members.get(&index).ok_or(Error::NoSuchMember(index))
    }

    /// The activation level `n` with `2^n <= len < 2^{n+1}`; 0 at the root.
    pub fn activation(len: u64) -> u32 {
        if len == 0 {
            0
        } else {
            63 - len.leading_zeros()
        }
    }

    /// Length at which the member is frozen along `x`, if any violation
    /// occurs at or before `|x|`. Freeze points depend only on the prefix up
    /// to the returned length, so they are stable under extension.
    pub fn freeze_point(&self, index: u32, x: &BitString) -> Result<Option<u64>> {
        let prog = self.member(index)?;
        let caps = prog.strategy.capitals_along(x);
        Ok(freeze_scan(prog, self.growth.rho(), x, &caps))
    }

    /// The renormalized factor `M_i'(x)` the member contributes at weight
    /// `2^{-i}` once activated.
    pub fn member_factor(&self, index: u32, x: &BitString) -> Result<Rational> {
        let prog = self.member(index)?;
        Ok(self.factor_of(prog, x))
    }

    fn factor_of(&self, prog: &StrategyProgram, x: &BitString) -> Rational {
        let len = x.len() as u64;
        let checkpoint = 1u64 << prog.index;
        let even = self.growth.even_factor();
        let caps = prog.strategy.capitals_along(x);
        // A dead checkpoint admits no renormalization; the member behaves as
        // an absent index. This is also what a seamless activation step
        // demands: the entering factor must equal the even-bet weight the
        // tail term was paying, whatever the member's capital did.
        if caps[checkpoint as usize].is_zero() {
            return pow_rational(&even, len as i64);
        }
        let frozen = freeze_scan(prog, self.growth.rho(), x, &caps);
        match frozen {
            Some(j) if j < checkpoint => pow_rational(&even, len as i64),
            Some(j) => {
                pow_rational(&even, checkpoint as i64) * &caps[j as usize]
                    / &caps[checkpoint as usize]
                    * pow_rational(&even, (len - j) as i64)
            }
            None => {
                pow_rational(&even, checkpoint as i64) * &caps[len as usize]
                    / &caps[checkpoint as usize]
            }
        }
    }

    /// Wraps the combined capital as a [`BettingStrategy`] whose shares are
    /// the exact capital ratios, so the standard validator can certify the
    /// construction as a gale. The combined capital is always positive (the
    /// tail term is), so the ratios are well defined.
    pub fn as_strategy(&self) -> BettingStrategy {
        BettingStrategy::new(
            StrategyKind::Gale,
            self.growth.clone(),
            Rational::one(),
            Arc::new(CombinedRule {
                inner: self.clone(),
            }),
        )
        .expect("unit capital is valid")
    }
}

impl CapitalSource for CombinedGale {
    fn capital(&self, x: &BitString) -> Rational {
        let len = x.len() as u64;
        let n = CombinedGale::activation(len);
        let even = self.growth.even_factor();
        let even_len = pow_rational(&even, len as i64);
        let mut total = two_pow(-(n as i64)) * &even_len;
        for i in 1..=n {
            let term = match self.members.get(&i) {
                None => even_len.clone(),
                Some(prog) => self.factor_of(prog, x),
            };
            total += two_pow(-(i as i64)) * term;
        }
        total
    }
}

/// First length at which the member violates its contract along `x`, if any.
///
/// `caps` are the member's own capitals at every prefix of `x`. A split at
/// length `j` is only auditable while `j < |x|` (its children are queried
/// then), so the scan checks initial capital and budget at every `j <= |x|`
/// and the step identity strictly inside.
fn freeze_scan(
    prog: &StrategyProgram,
    combined_rho: &Rational,
    x: &BitString,
    caps: &[Rational],
) -> Option<u64> {
    let len = x.len() as u64;
    if !caps[0].is_one() {
        return Some(0);
    }
    for j in 0..=len {
        if BigUint::from(prog.strategy.cumulative_cost(j)) > prog.budget(j) {
            return Some(j);
        }
        if j < len {
            let prefix = x.prefix(j as usize);
            let (s0, s1) = prog.strategy.shares_at(&prefix);
            let scaled = prog.strategy.growth().rho() * &caps[j as usize];
            let c0 = &scaled * &s0;
            let c1 = scaled * &s1;
            if c0 < Rational::zero() || c1 < Rational::zero() {
                return Some(j);
            }
            if combined_rho * &caps[j as usize] != c0 + c1 {
                return Some(j);
            }
        }
    }
    None
}

struct CombinedRule {
    inner: CombinedGale,
}

impl BetRule for CombinedRule {
    fn shares(&self, prefix: &BitString) -> (Rational, Rational) {
        let here = self.inner.capital(prefix);
        let denom = self.inner.growth.rho() * here;
        (
            self.inner.capital(&prefix.child(false)) / &denom,
            self.inner.capital(&prefix.child(true)) / denom,
        )
    }

    fn describe(&self) -> String {
        format!(
            "combined({} members, rho={})",
            self.inner.members.len(),
            self.inner.growth
        )
    }
}

/// The constant `c_i = 2^{-i} * (rho/2)^{2^i} / d_i(w restricted to 2^i)`
/// certifying `d~(w) >= c_i * d_i(w)` for an active, never-frozen member with
/// a positive checkpoint capital. Anything else is an error, not a guess.
pub fn domination_constant(
    combined: &CombinedGale,
    index: u32,
    w: &BitString,
) -> Result<Rational> {
    let prog = combined.member(index)?;
    let checkpoint = 1u64 << index;
    if (w.len() as u64) < checkpoint {
        return Err(Error::PrefixTooShort {
            have: w.len() as u64,
            need: checkpoint,
            n: index,
        });
    }
    let caps = prog.strategy.capitals_along(w);
    if let Some(at) = freeze_scan(prog, combined.growth.rho(), w, &caps) {
        return Err(Error::FrozenMember { index, at });
    }
    let at_checkpoint = &caps[checkpoint as usize];
    if at_checkpoint.is_zero() {
        return Err(Error::ZeroCheckpoint { index });
    }
    Ok(two_pow(-(index as i64)) * pow_rational(&combined.growth.even_factor(), checkpoint as i64)
        / at_checkpoint)
}
