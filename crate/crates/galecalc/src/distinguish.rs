//! The statistical test that turns capital growth into distinguishing power.
//!
//! The test A receives a candidate block `w` of length `N = 2^n`. It draws
//! its own randomness `r`, extends it to a plausible history `w'` of length
//! `N` with the same block structure the generator family uses, and accepts
//! iff the capital oracle reports a large enough jump across the block:
//!
//! ```text
//! M(w' w) >= c * (2/rho~)^N * M(w')
//! ```
//!
//! The generalized variant also scans partial blocks, accepting when
//! `M(w' (w restricted to l)) >= (2/rho~)^{N+l}` for some
//! `q*N <= l <= N`: an absolute threshold, no anchor capital.
//!
//! Acceptance rates are measured on generator outputs versus uniform inputs;
//! the gap is the advantage. Everything is exact rationals over seeded,
//! reproducible bit streams, and the generator side enumerates its whole
//! seed space whenever that is feasible, making `accept_prg` a true
//! probability rather than an estimate.

use std::fmt;

use num_traits::{One, Signed, Zero};

use crate::bits::BitString;
use crate::error::{Error, Result};
use crate::gale::{jump_event, BettingStrategy, CapitalSource, GrowthFactor};
use crate::numerics::{cmp_pow, format_rational, pow_rational, rat, two_pow, Rational};
use crate::prg::{extend_g, Approximator, BitSource, PrgFamily, SampledDistribution};

/// Parameters of the generalized (partial-block) variant: the intermediate
/// growth `rho'' = 2^{s''}` and the scan fraction `q`.
#[derive(Clone, Debug)]
pub struct GeneralParams {
    pub rho_dblprime: GrowthFactor,
    pub q: Rational,
}

/// Everything a run of the test needs. `martingale` is the declared capital
/// function; `approximator` is what the test actually queries, exact by
/// default and deliberately perturbable for error-band experiments.
#[derive(Clone)]
pub struct DistinguisherConfig {
    pub prg: PrgFamily,
    pub martingale: BettingStrategy,
    pub approximator: Approximator,
    pub c: Rational,
    pub k: u32,
    pub rho_tilde: GrowthFactor,
    pub general: Option<GeneralParams>,
    pub trials: u64,
    pub rng_seed: u64,
}

impl DistinguisherConfig {
    pub fn new(
        prg: PrgFamily,
        martingale: BettingStrategy,
        c: Rational,
        k: u32,
        rho_tilde: GrowthFactor,
        trials: u64,
        rng_seed: u64,
    ) -> Result<Self> {
        if c <= Rational::zero() || c > Rational::one() {
            return Err(Error::BadConfig(format!(
                "band constant c must lie in (0, 1], got {}",
                format_rational(&c)
            )));
        }
        if *rho_tilde.rho() <= Rational::one() || *rho_tilde.rho() > rat(2, 1) {
            return Err(Error::BadConfig(format!(
                "threshold growth must lie in (1, 2], got {}",
                rho_tilde
            )));
        }
        let approximator = Approximator::Exact(martingale.clone());
        Ok(DistinguisherConfig {
            prg,
            martingale,
            approximator,
            c,
            k,
            rho_tilde,
            general: None,
            trials,
            rng_seed,
        })
    }

    pub fn with_approximator(mut self, approximator: Approximator) -> Self {
        self.approximator = approximator;
        self
    }

    /// Enables the generalized variant. The scan fraction must satisfy
    /// `(s~ - s'') / (2 s'') <= q <= (s~ - s'') / s''`, checked exactly as
    /// integer-power comparisons of the growth factors; `s''` is never
    /// materialized.
    pub fn with_general(mut self, rho_dblprime: GrowthFactor, q: Rational) -> Result<Self> {
        if *rho_dblprime.rho() >= *self.rho_tilde.rho() {
            return Err(Error::BadExponentPair {
                detail: format!(
                    "generalized variant needs rho'' < rho~, got {} vs {}",
                    rho_dblprime, self.rho_tilde
                ),
            });
        }
        if q <= Rational::zero() {
            return Err(Error::BadExponentPair {
                detail: format!("scan fraction must be positive, got {}", format_rational(&q)),
            });
        }
        let p = u64::try_from(q.numer().clone()).map_err(|_| Error::BadExponentPair {
            detail: "scan fraction numerator too large".to_string(),
        })?;
        let r = u64::try_from(q.denom().clone()).map_err(|_| Error::BadExponentPair {
            detail: "scan fraction denominator too large".to_string(),
        })?;
        // q >= (s~ - s'')/(2 s'')  <=>  rho~^r <= rho''^{r + 2p}.
        if cmp_pow(self.rho_tilde.rho(), r, rho_dblprime.rho(), r + 2 * p)
            == std::cmp::Ordering::Greater
        {
            return Err(Error::BadExponentPair {
                detail: format!("scan fraction {} below the window", format_rational(&q)),
            });
        }
        // q <= (s~ - s'')/s''  <=>  rho''^{r + p} <= rho~^r.
        if cmp_pow(rho_dblprime.rho(), r + p, self.rho_tilde.rho(), r)
            == std::cmp::Ordering::Greater
        {
            return Err(Error::BadExponentPair {
                detail: format!("scan fraction {} above the window", format_rational(&q)),
            });
        }
        self.general = Some(GeneralParams { rho_dblprime, q });
        Ok(self)
    }

    fn check_block(&self, len: u64) -> Result<u32> {
        if !len.is_power_of_two() || len <= self.prg.min_out_len() {
            return Err(Error::BadConfig(format!(
                "the test needs |w| = 2^n with n > {}, got length {}",
                self.prg.m(),
                len
            )));
        }
        Ok(len.trailing_zeros())
    }
}

/// One decision of the test, with the degenerate-threshold condition kept
/// visible: when the anchor capital `M(w')` is zero the threshold is zero
/// and the literal `>=` accepts vacuously.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TrialOutcome {
    pub accept: bool,
    pub degenerate_threshold: bool,
}

fn decide(config: &DistinguisherConfig, w_prime: &BitString, w: &BitString) -> TrialOutcome {
    let anchor = config.approximator.query(w_prime);
    let threshold = &config.c * config.rho_tilde.threshold_power(w.len() as u64) * &anchor;
    let full = config.approximator.query(&w_prime.concat(w));
    TrialOutcome {
        accept: full >= threshold,
        degenerate_threshold: anchor.is_zero(),
    }
}

fn decide_general(
    config: &DistinguisherConfig,
    params: &GeneralParams,
    w_prime: &BitString,
    w: &BitString,
) -> TrialOutcome {
    let base = decide(config, w_prime, w);
    if base.accept {
        return base;
    }
    let big_n = w.len() as u64;
    let start = ceil_to_u64(&(&params.q * rat(big_n as i64, 1)));
    for l in start..=big_n {
        let value = config.approximator.query(&w_prime.concat(&w.prefix(l as usize)));
        if value >= config.rho_tilde.threshold_power(big_n + l) {
            return TrialOutcome {
                accept: true,
                degenerate_threshold: base.degenerate_threshold,
            };
        }
    }
    base
}

fn ceil_to_u64(r: &Rational) -> u64 {
    u64::try_from(r.ceil().to_integer()).expect("scan start fits in u64")
}

/// The test with the history `w'` supplied explicitly; [`run_a`] draws it.
pub fn run_a_with(
    config: &DistinguisherConfig,
    w_prime: &BitString,
    w: &BitString,
) -> Result<TrialOutcome> {
    config.check_block(w.len() as u64)?;
    if w_prime.len() != w.len() {
        return Err(Error::BadConfig(format!(
            "history length {} must match block length {}",
            w_prime.len(),
            w.len()
        )));
    }
    Ok(match &config.general {
        Some(params) => decide_general(config, params, w_prime, w),
        None => decide(config, w_prime, w),
    })
}

/// The base test: draw `r`, extend it to the history `w'`, compare the
/// capital across the block against `c * (2/rho~)^{|w|} * M(w')`.
pub fn run_a(
    config: &DistinguisherConfig,
    w: &BitString,
    source: &mut BitSource,
) -> Result<TrialOutcome> {
    let big_n = w.len() as u64;
    config.check_block(big_n)?;
    let seed = source.draw(config.prg.seed_len(big_n));
    let w_prime = extend_g(&config.prg, &seed, big_n)?;
    Ok(match &config.general {
        Some(params) => decide_general(config, params, &w_prime, w),
        None => decide(config, &w_prime, w),
    })
}

/// The generalized test. Requires the scan parameters to be configured.
pub fn run_a_general(
    config: &DistinguisherConfig,
    w: &BitString,
    source: &mut BitSource,
) -> Result<TrialOutcome> {
    if config.general.is_none() {
        return Err(Error::BadConfig(
            "generalized run needs scan parameters; use with_general".to_string(),
        ));
    }
    run_a(config, w, source)
}

/// Measured acceptance rates with the analytic reference lines attached.
/// All fields are exact; the floor can be negative at desk scale and is a
/// reference, not a guarantee.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DistinguisherReport {
    pub n: u32,
    pub big_n: u64,
    pub accept_prg: Rational,
    pub accept_uniform: Rational,
    pub advantage: Rational,
    pub analytic_uniform_bound: Rational,
    pub analytic_prg_floor: Rational,
    pub prg_trials: u64,
    pub uniform_trials: u64,
    pub prg_exhaustive: bool,
    pub degenerate_prg: u64,
    pub degenerate_uniform: u64,
}

impl fmt::Display for DistinguisherReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "n: {}", self.n)?;
        writeln!(f, "N: {}", self.big_n)?;
        writeln!(f, "accept_prg: {}", format_rational(&self.accept_prg))?;
        writeln!(f, "accept_uniform: {}", format_rational(&self.accept_uniform))?;
        writeln!(f, "advantage: {}", format_rational(&self.advantage))?;
        writeln!(
            f,
            "analytic_uniform_bound: {}",
            format_rational(&self.analytic_uniform_bound)
        )?;
        writeln!(
            f,
            "analytic_prg_floor: {}",
            format_rational(&self.analytic_prg_floor)
        )?;
        writeln!(f, "prg_trials: {}", self.prg_trials)?;
        writeln!(f, "uniform_trials: {}", self.uniform_trials)?;
        writeln!(f, "prg_exhaustive: {}", self.prg_exhaustive)?;
        writeln!(f, "degenerate_prg: {}", self.degenerate_prg)?;
        write!(f, "degenerate_uniform: {}", self.degenerate_uniform)
    }
}

impl DistinguisherReport {
    /// The CSV row `n, accept_prg, accept_uniform, advantage, bounds`.
    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{}",
            self.n,
            format_rational(&self.accept_prg),
            format_rational(&self.accept_uniform),
            format_rational(&self.advantage),
            format_rational(&self.analytic_uniform_bound),
            format_rational(&self.analytic_prg_floor)
        )
    }

    pub const CSV_HEADER: &'static str =
        "n,accept_prg,accept_uniform,advantage,analytic_uniform_bound,analytic_prg_floor";
}

/// Measures both acceptance rates at block length `N = 2^n`.
///
/// The generator side enumerates its full seed space (in numeric order)
/// whenever it has at most `2^20` points, so `accept_prg` is then exact over
/// inputs; otherwise it is sampled with `trials` draws. The uniform side is
/// always sampled with `trials` draws. Both sides share one seeded stream:
/// generator inputs first, uniform inputs second, so a fixed `(config, n,
/// trials)` always produces the identical report.
pub fn advantage(config: &DistinguisherConfig, n: u32, trials: u64) -> Result<DistinguisherReport> {
    if trials == 0 {
        return Err(Error::BadConfig("trials must be at least 1".to_string()));
    }
    if n > 20 {
        return Err(Error::DepthGuard(format!("advantage at n={n}")));
    }
    let big_n = 1u64 << n;
    config.check_block(big_n)?;
    let seed_bits = config.prg.seed_len(big_n);
    let mut source = BitSource::from_seed(config.rng_seed);

    let mut prg_accepts = 0u64;
    let mut degenerate_prg = 0u64;
    let prg_exhaustive = seed_bits <= 20;
    let prg_trials = if prg_exhaustive { 1u64 << seed_bits } else { trials };
    for t in 0..prg_trials {
        let x = if prg_exhaustive {
            BitString::from_value(t, seed_bits as usize)
        } else {
            source.draw(seed_bits)
        };
        let w = config.prg.generate(big_n, &x)?;
        let outcome = run_a(config, &w, &mut source)?;
        if outcome.accept {
            prg_accepts += 1;
        }
        if outcome.degenerate_threshold {
            degenerate_prg += 1;
        }
    }

    let mut uniform_accepts = 0u64;
    let mut degenerate_uniform = 0u64;
    for _ in 0..trials {
        let w = source.draw(big_n);
        let outcome = run_a(config, &w, &mut source)?;
        if outcome.accept {
            uniform_accepts += 1;
        }
        if outcome.degenerate_threshold {
            degenerate_uniform += 1;
        }
    }

    let accept_prg = rat(prg_accepts as i64, prg_trials as i64);
    let accept_uniform = rat(uniform_accepts as i64, trials as i64);
    let advantage = (&accept_prg - &accept_uniform).abs();
    // c^{-2} * 2^{-N(1-s~)} + N^{-k} + 2^{-N(1-s)}, each term exact: the
    // first is (rho~/2)^N / c^2, the last is 2^{sN - N} with sN the seed
    // length in bits.
    let analytic_uniform_bound = pow_rational(&config.rho_tilde.even_factor(), big_n as i64)
        / (&config.c * &config.c)
        + Rational::one() / pow_rational(&rat(big_n as i64, 1), i64::from(config.k))
        + two_pow(seed_bits as i64 - big_n as i64);
    let analytic_prg_floor = rat(1, i64::from((n + 1) * (n + 1)))
        - two_pow(-i64::from(config.k * n));

    Ok(DistinguisherReport {
        n,
        big_n,
        accept_prg,
        accept_uniform,
        advantage,
        analytic_uniform_bound,
        analytic_prg_floor,
        prg_trials,
        uniform_trials: trials,
        prg_exhaustive,
        degenerate_prg,
        degenerate_uniform,
    })
}

/// Exhaustively counts accepting `(w, r)` pairs over all blocks `w` of
/// length `2^n` and all test seeds `r`, for the count-bound checks. Returns
/// `(accepting pairs, total pairs)`.
pub fn exhaustive_uniform_count(config: &DistinguisherConfig, n: u32) -> Result<(u64, u64)> {
    let big_n = 1u64 << n;
    config.check_block(big_n)?;
    let seed_bits = config.prg.seed_len(big_n);
    if big_n + seed_bits > 22 {
        return Err(Error::DepthGuard(format!(
            "exhaustive pair count at {} block bits + {} seed bits",
            big_n, seed_bits
        )));
    }
    let mut accepts = 0u64;
    for r in BitString::all_of_len(seed_bits as usize) {
        let w_prime = extend_g(&config.prg, &r, big_n)?;
        for w in BitString::all_of_len(big_n as usize) {
            let outcome = match &config.general {
                Some(params) => decide_general(config, params, &w_prime, &w),
                None => decide(config, &w_prime, &w),
            };
            if outcome.accept {
                accepts += 1;
            }
        }
    }
    Ok((accepts, 1u64 << (big_n + seed_bits)))
}

/// Exact fraction of seeds whose extended sequence shows the capital jump at
/// scale `n`: over the full seed space for outputs of length `2^n`, count
/// seeds with `d(x restricted to 2^n) > threshold_power * d(x restricted to
/// 2^{n-1})`.
pub fn jump_frequency(
    dist: &SampledDistribution,
    d: &dyn CapitalSource,
    n: u32,
    threshold_power: &Rational,
) -> Result<Rational> {
    if n == 0 || n > 20 {
        return Err(Error::BadConfig(format!(
            "jump frequency needs 1 <= n <= 20, got {n}"
        )));
    }
    let big_n = 1u64 << n;
    let mut hits = 0i64;
    let mut total = 0i64;
    for (_, out) in dist.enumerate(big_n)? {
        total += 1;
        if jump_event(d, &out, n, threshold_power)? {
            hits += 1;
        }
    }
    Ok(rat(hits, total))
}
