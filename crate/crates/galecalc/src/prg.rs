//! Toy generator families, the block extension map, and the short-seed
//! sampled distribution it induces.
//!
//! A family with shrink parameter `m` maps seeds of length `N / 2^m` to
//! outputs of length `N` for every power of two `N >= 2^m`. The extension
//! map stitches those outputs into arbitrarily long sequences: positions
//! `1 ..= 2^m` are forced zeros, and each subsequent dyadic block doubles the
//! sequence using a fresh slice of the seed. Sampling a random seed and
//! trimming gives a distribution over `n`-bit strings whose entire support
//! costs at most `n / 2^m` random bits per power-of-two length, which is what
//! makes the support compressible and the distribution worth distinguishing.
//!
//! Everything here is exhaustively enumerable at desk scale: mass queries walk
//! the full seed space and refuse to run past `2^20` seeds.

use std::collections::BTreeMap;
use std::sync::Arc;

use num_bigint::BigInt;
use num_traits::{One, Zero};
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha12Rng;
use sha2::{Digest, Sha256};

use crate::bits::BitString;
use crate::error::{Error, Result};
use crate::gale::{BetRule, BettingStrategy, GrowthFactor, StrategyKind};
use crate::numerics::Rational;

/// Which toy generator a family uses.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PrgKind {
    /// The seed repeated `2^m` times. Deliberately weak: every output bit
    /// after the first block-copy is predictable. The positive control.
    Repetition,
    /// A Fibonacci linear-feedback shift register seeded with the input.
    /// Moderately structured; zero-preserving.
    Lfsr,
    /// A SHA-256 counter stream keyed by the seed. The desk-scale stand-in
    /// for a strong generator; the negative control. Not zero-preserving.
    HashChain,
}

impl PrgKind {
    pub fn name(&self) -> &'static str {
        match self {
            PrgKind::Repetition => "repetition",
            PrgKind::Lfsr => "lfsr",
            PrgKind::HashChain => "hash-chain",
        }
    }

    pub fn parse(name: &str) -> Result<Self> {
        match name {
            "repetition" => Ok(PrgKind::Repetition),
            "lfsr" => Ok(PrgKind::Lfsr),
            "hash-chain" => Ok(PrgKind::HashChain),
            other => Err(Error::BadConfig(format!(
                "unknown prg {other:?}; expected repetition, lfsr, or hash-chain"
            ))),
        }
    }
}

/// Feedback tap positions (1-based) for maximal-length registers, by width.
/// Widths outside the table fall back to `[L, L-1]`.
fn lfsr_taps(width: u64) -> Vec<u64> {
    match width {
        1 => vec![1],
        2 => vec![2, 1],
        4 => vec![4, 3],
        8 => vec![8, 6, 5, 4],
        16 => vec![16, 15, 13, 4],
        32 => vec![32, 22, 2, 1],
        64 => vec![64, 63, 61, 60],
        l => vec![l, l - 1],
    }
}

/// A generator family `G_N : seeds of length N/2^m -> outputs of length N`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PrgFamily {
    kind: PrgKind,
    m: u32,
}

impl PrgFamily {
    pub fn new(kind: PrgKind, m: u32) -> Result<Self> {
        if m < 2 {
            return Err(Error::BadConfig(format!(
                "shrink parameter m must be at least 2, got {m}"
            )));
        }
        Ok(PrgFamily { kind, m })
    }

    pub fn repetition(m: u32) -> Result<Self> {
        PrgFamily::new(PrgKind::Repetition, m)
    }

    pub fn lfsr(m: u32) -> Result<Self> {
        PrgFamily::new(PrgKind::Lfsr, m)
    }

    pub fn hash_chain(m: u32) -> Result<Self> {
        PrgFamily::new(PrgKind::HashChain, m)
    }

    pub fn kind(&self) -> PrgKind {
        self.kind
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    pub fn name(&self) -> &'static str {
        self.kind.name()
    }

    /// Smallest output length the family is defined for, `2^m`.
    pub fn min_out_len(&self) -> u64 {
        1u64 << self.m
    }

    /// Seed length for an output of length `out_len`, i.e. `out_len / 2^m`.
    pub fn seed_len(&self, out_len: u64) -> u64 {
        out_len >> self.m
    }

    /// Runs the generator: `out_len` must be a power of two at least `2^m`,
    /// and the seed must have exactly `out_len / 2^m` bits.
    pub fn generate(&self, out_len: u64, seed: &BitString) -> Result<BitString> {
        if !out_len.is_power_of_two() || out_len < self.min_out_len() {
            return Err(Error::BadOutLen(out_len));
        }
        let need = self.seed_len(out_len);
        if (seed.len() as u64) < need {
            return Err(Error::SeedTooShort {
                need,
                got: seed.len() as u64,
            });
        }
        if (seed.len() as u64) > need {
            return Err(Error::BadConfig(format!(
                "seed of length {} is longer than the exact {} bits the generator takes",
                seed.len(),
                need
            )));
        }
        Ok(match self.kind {
            PrgKind::Repetition => repetition_stretch(seed, out_len),
            PrgKind::Lfsr => lfsr_stretch(seed, out_len),
            PrgKind::HashChain => hash_chain_stretch(seed, out_len, self.m),
        })
    }
}

fn repetition_stretch(seed: &BitString, out_len: u64) -> BitString {
    let mut out = BitString::empty();
    for i in 0..out_len {
        out.push(seed.bit((i % seed.len() as u64) as usize));
    }
    out
}

/// Fibonacci LFSR: the register starts as the seed (seed bit 1 at the front),
/// each step outputs the last register bit, XORs the tap positions into a
/// feedback bit, and shifts the register right with the feedback in front.
fn lfsr_stretch(seed: &BitString, out_len: u64) -> BitString {
    let width = seed.len();
    let taps = lfsr_taps(width as u64);
    let mut state: Vec<bool> = seed.iter().collect();
    let mut out = BitString::empty();
    for _ in 0..out_len {
        out.push(state[width - 1]);
        let feedback = taps
            .iter()
            .fold(false, |acc, &t| acc ^ state[(t - 1) as usize]);
        state.rotate_right(1);
        state[0] = feedback;
    }
    out
}

/// SHA-256 counter stream: block `i` hashes a domain tag, the family
/// parameters, the packed seed, and `i`; output bits are taken MSB-first.
fn hash_chain_stretch(seed: &BitString, out_len: u64, m: u32) -> BitString {
    let mut packed = vec![0u8; seed.len().div_ceil(8)];
    for (i, b) in seed.iter().enumerate() {
        if b {
            packed[i / 8] |= 1 << (7 - (i % 8));
        }
    }
    let mut out = BitString::empty();
    let mut counter: u64 = 0;
    while (out.len() as u64) < out_len {
        let mut hasher = Sha256::new();
        hasher.update(b"galecalc.hash-chain.v1");
        hasher.update(m.to_be_bytes());
        hasher.update(out_len.to_be_bytes());
        hasher.update((seed.len() as u64).to_be_bytes());
        hasher.update(&packed);
        hasher.update(counter.to_be_bytes());
        let digest = hasher.finalize();
        for byte in digest {
            for shift in (0..8).rev() {
                if (out.len() as u64) == out_len {
                    break;
                }
                out.push((byte >> shift) & 1 == 1);
            }
        }
        counter += 1;
    }
    out
}

/// The extension map: forced zeros on positions `1 ..= 2^m`, then block `b`
/// (output positions `2^{b-1}+1 ..= 2^b`) filled by the generator at length
/// `2^{b-1}` from the seed slice at 1-based positions
/// `[s*2^{b-1}, s*2^b - 1]`, which has exactly `s*2^{b-1}` bits.
///
/// The slice convention reads those endpoints as 1-based and inclusive; the
/// final seed bit `s*out_len` is therefore never consumed, and a seed one bit
/// short of `s*out_len` is accepted (the sampler still draws the full count
/// to keep its accounting simple). The map is prefix-monotone in both
/// arguments: extending the seed or the output length never changes bits
/// already produced.
pub fn extend_g(prg: &PrgFamily, seed: &BitString, out_len: u64) -> Result<BitString> {
    if !out_len.is_power_of_two() || out_len < prg.min_out_len() {
        return Err(Error::BadOutLen(out_len));
    }
    let need = prg.seed_len(out_len).saturating_sub(1);
    if (seed.len() as u64) < need {
        return Err(Error::SeedTooShort {
            need,
            got: seed.len() as u64,
        });
    }
    let mut out = BitString::zeros(prg.min_out_len() as usize);
    let mut block_out = prg.min_out_len();
    while block_out < out_len {
        // Block producing output positions block_out+1 ..= 2*block_out from
        // the seed slice of length block_out / 2^m starting right after all
        // previously consumed seed bits.
        let q = prg.seed_len(block_out);
        let slice = seed.slice((q - 1) as usize, (2 * q - 1) as usize);
        let block = prg
            .generate(block_out, &slice)
            .expect("block length and slice width are consistent by construction");
        out = out.concat(&block);
        block_out *= 2;
    }
    Ok(out)
}

/// A deterministic bit stream with an exact consumption counter.
///
/// Wraps a seeded ChaCha12 generator; every query is counted so tests can
/// assert the advertised seed-length accounting bit for bit.
pub struct BitSource {
    rng: ChaCha12Rng,
    consumed: u64,
}

impl BitSource {
    pub fn from_seed(seed: u64) -> Self {
        BitSource {
            rng: ChaCha12Rng::seed_from_u64(seed),
            consumed: 0,
        }
    }

    pub fn draw_bit(&mut self) -> bool {
        self.consumed += 1;
        self.rng.next_u32() & 1 == 1
    }

    pub fn draw(&mut self, len: u64) -> BitString {
        let mut out = BitString::empty();
        for _ in 0..len {
            out.push(self.draw_bit());
        }
        out
    }

    pub fn consumed(&self) -> u64 {
        self.consumed
    }
}

/// The distribution of trimmed extensions of uniformly random seeds.
///
/// On target length `n` the sampler extends to `N = 2^{ceil(log2 n)}` output
/// bits and trims. When `N < 2^m` the output is the forced zero prefix and no
/// random bits are drawn; otherwise exactly `N / 2^m` bits are drawn (the
/// last of which the extension map never reads).
#[derive(Clone, Debug)]
pub struct SampledDistribution {
    prg: PrgFamily,
}

impl SampledDistribution {
    pub fn new(prg: PrgFamily) -> Self {
        SampledDistribution { prg }
    }

    pub fn prg(&self) -> &PrgFamily {
        &self.prg
    }

    /// Output length the sampler extends to before trimming.
    pub fn target_out_len(&self, n: u64) -> u64 {
        n.max(1).next_power_of_two()
    }

    /// Exact number of random bits a sample of length `n` consumes.
    pub fn seed_bits_for(&self, n: u64) -> u64 {
        let target = self.target_out_len(n);
        if target < self.prg.min_out_len() {
            0
        } else {
            self.prg.seed_len(target)
        }
    }

    pub fn sample(&self, n: u64, bits: &mut BitSource) -> BitString {
        let k = self.seed_bits_for(n);
        if k == 0 {
            return BitString::zeros(n as usize);
        }
        let seed = bits.draw(k);
        let out = extend_g(&self.prg, &seed, self.target_out_len(n))
            .expect("seed drawn at the exact required length");
        out.prefix(n as usize)
    }

    /// Iterates `(seed, trimmed output)` over the full seed space for
    /// length-`n` outputs. Refuses seed spaces past `2^20`.
    pub fn enumerate(&self, n: u64) -> Result<impl Iterator<Item = (BitString, BitString)> + '_> {
        let k = self.seed_bits_for(n);
        if k > 20 {
            return Err(Error::DepthGuard(format!(
                "{} seed bits for length {}",
                k, n
            )));
        }
        let target = self.target_out_len(n);
        Ok(BitString::all_of_len(k as usize).map(move |seed| {
            let out = if k == 0 {
                BitString::zeros(n as usize)
            } else {
                extend_g(&self.prg, &seed, target)
                    .expect("enumerated seed has the exact required length")
                    .prefix(n as usize)
            };
            (seed, out)
        }))
    }

    /// Exact probability of the cylinder at `w`, by exhaustive enumeration.
    pub fn mass(&self, w: &BitString) -> Result<Rational> {
        let n = w.len() as u64;
        let k = self.seed_bits_for(n);
        let mut hits: u64 = 0;
        for (_, out) in self.enumerate(n)? {
            if out == *w {
                hits += 1;
            }
        }
        Ok(Rational::new(
            BigInt::from(hits),
            BigInt::from(1u64) << k as usize,
        ))
    }

    /// All strings of length `n` with positive mass, with their exact masses.
    pub fn mass_table(&self, n: u64) -> Result<BTreeMap<BitString, Rational>> {
        let k = self.seed_bits_for(n);
        let mut counts: BTreeMap<BitString, u64> = BTreeMap::new();
        for (_, out) in self.enumerate(n)? {
            *counts.entry(out).or_insert(0) += 1;
        }
        let denom = BigInt::from(1u64) << k as usize;
        Ok(counts
            .into_iter()
            .map(|(w, c)| (w, Rational::new(BigInt::from(c), denom.clone())))
            .collect())
    }

    /// A length-`depth` string of positive mass all of whose prefixes also
    /// have positive mass: the lexicographically smallest in-support string.
    /// Mass consistency makes every prefix of an in-support string
    /// in-support, so any support member is a witness; the minimum makes the
    /// choice deterministic. The sampler is total, so support is never empty.
    pub fn support_chain(&self, depth: u64) -> Result<BitString> {
        let table = self.mass_table(depth)?;
        Ok(table
            .keys()
            .next()
            .expect("a total sampler has non-empty support")
            .clone())
    }
}

/// How the distinguisher's capital oracle answers queries.
///
/// `Exact` is the honest oracle. `Scaled` stays inside the `[c*d, d]` band
/// when the factor does. `ErrOn` answers a fixed off-band value on listed
/// strings and exactly elsewhere, for error-mass experiments. `Zero` is the
/// degenerate oracle that accepts everything vacuously.
#[derive(Clone)]
pub enum Approximator {
    Exact(BettingStrategy),
    Scaled {
        strategy: BettingStrategy,
        factor: Rational,
    },
    ErrOn {
        strategy: BettingStrategy,
        bad: Vec<BitString>,
        value: Rational,
    },
    Zero,
}

impl Approximator {
    pub fn query(&self, w: &BitString) -> Rational {
        match self {
            Approximator::Exact(d) => d.evaluate(w),
            Approximator::Scaled { strategy, factor } => strategy.evaluate(w) * factor,
            Approximator::ErrOn {
                strategy,
                bad,
                value,
            } => {
                if bad.contains(w) {
                    value.clone()
                } else {
                    strategy.evaluate(w)
                }
            }
            Approximator::Zero => Rational::zero(),
        }
    }

    pub fn describe(&self) -> String {
        match self {
            Approximator::Exact(d) => format!("exact[{}]", d.describe()),
            Approximator::Scaled { factor, .. } => {
                format!("scaled[factor={}]", crate::numerics::format_rational(factor))
            }
            Approximator::ErrOn { bad, .. } => format!("err-on[{} strings]", bad.len()),
            Approximator::Zero => "zero".into(),
        }
    }
}

/// Checks the two-part approximability condition at length `n`: the strings
/// where the oracle leaves the band `[c*d(w), d(w)]` must all lie in the
/// support of the distribution, and their total mass must be at most `n^-k`.
pub fn check_nu_approximable(
    dist: &SampledDistribution,
    d: &BettingStrategy,
    approximator: &Approximator,
    n: u64,
    c: &Rational,
    k: u32,
) -> Result<bool> {
    if *c <= Rational::zero() || *c > Rational::one() {
        return Err(Error::BadConfig(format!(
            "band constant c must be in (0, 1], got {}",
            crate::numerics::format_rational(c)
        )));
    }
    if n > 20 {
        return Err(Error::DepthGuard(format!("2^{n} strings at length {n}")));
    }
    let table = dist.mass_table(n)?;
    let mut err_mass = Rational::zero();
    for w in BitString::all_of_len(n as usize) {
        let exact = d.evaluate(&w);
        let got = approximator.query(&w);
        let in_band = got >= c * &exact && got <= exact;
        if in_band {
            continue;
        }
        match table.get(&w) {
            None => return Ok(false),
            Some(mass) => err_mass += mass,
        }
    }
    let bound = Rational::new(BigInt::one(), BigInt::from(n).pow(k));
    Ok(err_mass <= bound)
}

/// The supergale a sampled distribution induces at a chosen growth: capital
/// `rho^{|w|} * mass(w)`, realized by betting the conditional split
/// `mass(wb) / mass(w)` at every in-support prefix.
///
/// Mass consistency makes the shares sum to exactly 1 on support, so the
/// strategy validates as a supergale with equality. Queries walk the full
/// seed space at each prefix; keep the depths exhaustive. Evaluating past the
/// enumerable depth panics with the underlying guard message.
pub fn induced_supergale(
    dist: &SampledDistribution,
    growth: &GrowthFactor,
) -> Result<BettingStrategy> {
    let rule = InducedRule {
        dist: dist.clone(),
    };
    BettingStrategy::new(
        StrategyKind::Supergale,
        growth.clone(),
        Rational::one(),
        Arc::new(rule),
    )
}

struct InducedRule {
    dist: SampledDistribution,
}

impl BetRule for InducedRule {
    fn shares(&self, prefix: &BitString) -> (Rational, Rational) {
        let here = self
            .dist
            .mass(prefix)
            .expect("induced supergale queried past the enumerable depth");
        if here.is_zero() {
            return (Rational::zero(), Rational::zero());
        }
        let zero_side = self
            .dist
            .mass(&prefix.child(false))
            .expect("induced supergale queried past the enumerable depth");
        let one_side = self
            .dist
            .mass(&prefix.child(true))
            .expect("induced supergale queried past the enumerable depth");
        (zero_side / &here, one_side / &here)
    }

    fn describe(&self) -> String {
        format!(
            "induced[{} m={}]",
            self.dist.prg().name(),
            self.dist.prg().m()
        )
    }
}
