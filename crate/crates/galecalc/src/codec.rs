//! Compression driven by an exact gale.
//!
//! A unit-capital gale `d` with growth `rho = 2^s` assigns every length-n
//! string the mass `p(x) = d(x) / rho^n`; these masses sum to 1 exactly, so
//! sorting strings lexicographically tiles [0, 1] with bands `[c_n(x),
//! c_n(x) + p(x)]`, where `c_n(x)` is the total mass before `x`. A string
//! whose capital beats 1 owns a band wider than `2^{-sn}` and therefore
//! contains a short dyadic interval; that interval is the codeword. The
//! decoder walks back down from the root, at each step asking which child's
//! band contains the interval.
//!
//! `c_n` is never computed as the exponential sum over smaller strings. The
//! gale identity makes the subtree below a prefix `z` carry mass
//! `d(z) / rho^{|z|}` at every deeper level, so the cumulative telescopes
//! into one term per 1-bit of `x`. The brute-force sum lives in the oracles
//! module precisely so the two routes stay independent.
//!
//! Past the last string the cumulative is pinned at `c_n(1^n + 1) = 1`; this
//! needs no code, it is what the unit total forces.

use num_bigint::BigUint;
use num_traits::{One, Zero};

use crate::bits::BitString;
use crate::error::{Error, Result};
use crate::gale::{BettingStrategy, GrowthFactor, StrategyKind};
use crate::numerics::{
    contained_dyadic, format_rational, parse_rational, pow_rational, rat, DyadicInterval,
    Rational,
};

/// A compressed string: the source length, the growth the encoder used, and
/// the dyadic interval that singles the source out.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Codeword {
    pub n: u64,
    pub growth: GrowthFactor,
    pub interval: DyadicInterval,
}

const MAGIC: [u8; 2] = *b"GF";
const VERSION: u8 = 0x01;

impl Codeword {
    /// Number of payload bits, `m + 2` for interval width `2^{-(m+2)}`.
    pub fn payload_bits(&self) -> u32 {
        self.interval.log_denominator()
    }

    /// The payload as a bit string: the interval numerator, MSB first.
    pub fn payload(&self) -> BitString {
        let k = self.payload_bits();
        let j = self.interval.numerator();
        let mut out = BitString::empty();
        for t in (0..k).rev() {
            out.push(j.bit(u64::from(t)));
        }
        out
    }

    /// Serializes as: magic "GF", version, `n` as LEB128, the growth as
    /// length-prefixed `p/q` text, one payload bit-count byte, then the
    /// payload bits MSB-first and zero-padded to a byte boundary.
    pub fn to_bytes(&self) -> Result<Vec<u8>> {
        let k = self.payload_bits();
        if k > 255 {
            return Err(Error::PayloadTooWide(u64::from(k)));
        }
        let growth_text = format_rational(self.growth.rho());
        if growth_text.len() > 255 {
            return Err(Error::BadCodeword("growth text too long".to_string()));
        }
        let mut out = Vec::new();
        out.extend_from_slice(&MAGIC);
        out.push(VERSION);
        write_leb128(&mut out, self.n);
        out.push(growth_text.len() as u8);
        out.extend_from_slice(growth_text.as_bytes());
        out.push(k as u8);
        let mut byte = 0u8;
        for (t, b) in self.payload().iter().enumerate() {
            if b {
                byte |= 0x80 >> (t % 8);
            }
            if t % 8 == 7 {
                out.push(byte);
                byte = 0;
            }
        }
        if k % 8 != 0 {
            out.push(byte);
        }
        Ok(out)
    }

    /// Strict inverse of [`Codeword::to_bytes`]: trailing bytes, nonzero
    /// padding, or any malformed field is rejected.
    pub fn from_bytes(bytes: &[u8]) -> Result<Codeword> {
        fn bad(what: &str) -> Error {
            Error::BadCodeword(what.to_string())
        }
        fn take<'a>(bytes: &'a [u8], pos: &mut usize, count: usize) -> Result<&'a [u8]> {
            let end = pos.checked_add(count).ok_or_else(|| bad("overflow"))?;
            if end > bytes.len() {
                return Err(bad("truncated"));
            }
            let slice = &bytes[*pos..end];
            *pos = end;
            Ok(slice)
        }
        let mut pos = 0usize;
        if take(bytes, &mut pos, 2)? != MAGIC {
            return Err(bad("bad magic"));
        }
        if take(bytes, &mut pos, 1)?[0] != VERSION {
            return Err(bad("unsupported version"));
        }
        let mut n = 0u64;
        let mut shift = 0u32;
        loop {
            if shift > 63 {
                return Err(bad("length varint overflows"));
            }
            let byte = take(bytes, &mut pos, 1)?[0];
            if shift == 63 && byte > 1 {
                return Err(bad("length varint overflows"));
            }
            n |= u64::from(byte & 0x7f) << shift;
            if byte & 0x80 == 0 {
                break;
            }
            shift += 7;
        }
        let growth_len = usize::from(take(bytes, &mut pos, 1)?[0]);
        let growth_text = std::str::from_utf8(take(bytes, &mut pos, growth_len)?)
            .map_err(|_| bad("growth text not utf-8"))?;
        let growth = GrowthFactor::new(parse_rational(growth_text)?)?;
        let k = u32::from(take(bytes, &mut pos, 1)?[0]);
        let payload_bytes = take(bytes, &mut pos, ((k as usize) + 7) / 8)?;
        let mut j = BigUint::zero();
        for t in 0..(8 * payload_bytes.len()) {
            let bit = payload_bytes[t / 8] & (0x80 >> (t % 8)) != 0;
            if t < k as usize {
                j <<= 1;
                if bit {
                    j |= BigUint::one();
                }
            } else if bit {
                return Err(bad("nonzero padding"));
            }
        }
        if pos != bytes.len() {
            return Err(bad("trailing bytes"));
        }
        Ok(Codeword {
            n,
            growth,
            interval: DyadicInterval::new(j, k)?,
        })
    }
}

fn write_leb128(out: &mut Vec<u8>, mut v: u64) {
    loop {
        let byte = (v & 0x7f) as u8;
        v >>= 7;
        if v == 0 {
            out.push(byte);
            break;
        }
        out.push(byte | 0x80);
    }
}

fn check_codec_strategy(d: &BettingStrategy) -> Result<()> {
    if d.kind() != StrategyKind::Gale {
        return Err(Error::EncodeNeedsGale);
    }
    if !d.initial_capital().is_one() {
        return Err(Error::EncodeNeedsUnitCapital(format_rational(
            d.initial_capital(),
        )));
    }
    Ok(())
}

/// The cumulative mass `c_n(x)` of all length-n strings before `x`, computed
/// as one telescoped term per 1-bit of `x`: at each position where `x` takes
/// the 1-branch, the entire 0-subtree it skips contributes
/// `d((x restricted to i) 0) / rho^{i+1}`.
pub fn cumulative(d: &BettingStrategy, x: &BitString) -> Result<Rational> {
    check_codec_strategy(d)?;
    let mut walk = d.walker();
    let mut total = Rational::zero();
    let mut level_weight = Rational::one();
    for b in x.iter() {
        level_weight /= d.growth().rho();
        if b {
            let (left, _) = walk.children();
            total += left * &level_weight;
        }
        walk.step(b);
    }
    Ok(total)
}

/// Encodes `x` against the exact unit-capital gale `d`. Only strings whose
/// capital exceeds 1 are compressible; the codeword interval sits inside the
/// band `[c_n(x), c_n(x) + p(x)]` and carries `m + 2 <= floor(s n) + 2`
/// payload bits.
pub fn encode(d: &BettingStrategy, x: &BitString) -> Result<Codeword> {
    check_codec_strategy(d)?;
    let n = x.len();
    let capital = d.evaluate(x);
    if capital <= Rational::one() {
        return Err(Error::NotCompressible {
            capital: format_rational(&capital),
        });
    }
    let mass = capital / pow_rational(d.growth().rho(), n as i64);
    let lower = cumulative(d, x)?;
    let upper = &lower + mass;
    let interval = contained_dyadic(&lower, &upper)?;
    Ok(Codeword {
        n: n as u64,
        growth: d.growth().clone(),
        interval,
    })
}

/// Walks the codeword's interval back down the tree: at each prefix the
/// interval must sit inside exactly one child's band. A codeword produced by
/// [`encode`] with the same gale always does; anything else is corruption,
/// reported with the prefix length at which containment failed.
pub fn decode(d: &BettingStrategy, c: &Codeword) -> Result<BitString> {
    check_codec_strategy(d)?;
    if c.growth != *d.growth() {
        return Err(Error::BadCodeword(format!(
            "codeword growth {} does not match the strategy's {}",
            c.growth,
            d.growth()
        )));
    }
    let mut walk = d.walker();
    let mut band_lower = Rational::zero();
    let mut level_weight = Rational::one();
    let mut out = BitString::empty();
    for position in 0..c.n {
        level_weight /= d.growth().rho();
        let (c0, c1) = walk.children();
        let mass0 = c0 * &level_weight;
        let mid = &band_lower + mass0;
        let band_upper = &mid + c1 * &level_weight;
        if c.interval.subset_of(&band_lower, &mid) {
            walk.step(false);
            out.push(false);
        } else if c.interval.subset_of(&mid, &band_upper) {
            walk.step(true);
            out.push(true);
            band_lower = mid;
        } else {
            return Err(Error::Corrupt { position });
        }
    }
    Ok(out)
}

/// Compressed size over source length, exact: payload bits plus the full
/// serialized header, divided by `n`. An upper-bound surrogate for the rate
/// the construction certifies; header and payload are kept separate so the
/// header's constant is visible rather than asserted away.
pub fn rate_upper_bound(d: &BettingStrategy, x: &BitString) -> Result<Rational> {
    let codeword = encode(d, x)?;
    let bytes = codeword.to_bytes()?;
    let payload_bytes = ((codeword.payload_bits() as usize) + 7) / 8;
    let header_bits = 8 * (bytes.len() - payload_bytes);
    Ok(rat(
        header_bits as i64 + i64::from(codeword.payload_bits()),
        x.len() as i64,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gale::TableRule;
    use crate::numerics::floor_log2;
    use std::str::FromStr;
    use std::sync::Arc;

    fn bs(s: &str) -> BitString {
        BitString::from_str(s).unwrap()
    }

    fn lopsided_gale(s0: Rational, s1: Rational, growth: GrowthFactor) -> BettingStrategy {
        BettingStrategy::new(
            StrategyKind::Gale,
            growth,
            Rational::one(),
            Arc::new(TableRule::constant(s0, s1)),
        )
        .unwrap()
    }

    #[test]
    fn single_zero_gets_the_unit_interval() {
        let dz = BettingStrategy::double_on_zero();
        let c = encode(&dz, &bs("0")).unwrap();
        assert_eq!(c.n, 1);
        assert_eq!(c.interval, DyadicInterval::new(0u32.into(), 2).unwrap());
        assert_eq!(c.payload(), bs("00"));
        assert_eq!(decode(&dz, &c).unwrap(), bs("0"));

        let c2 = encode(&dz, &bs("00")).unwrap();
        assert_eq!(c2.n, 2);
        assert_eq!(c2.interval, DyadicInterval::new(0u32.into(), 2).unwrap());
        assert_eq!(decode(&dz, &c2).unwrap(), bs("00"));
    }

    #[test]
    fn uniform_capital_never_compresses() {
        let u = BettingStrategy::uniform_martingale();
        for x in ["0", "10", "0110"] {
            assert!(matches!(
                encode(&u, &bs(x)),
                Err(Error::NotCompressible { .. })
            ));
        }
    }

    #[test]
    fn encode_guards_kind_and_initial_capital() {
        use crate::gale::PseudorandomRule;
        let super_ = BettingStrategy::new(
            StrategyKind::Supergale,
            GrowthFactor::martingale(),
            Rational::one(),
            Arc::new(PseudorandomRule::supergale(1)),
        )
        .unwrap();
        assert!(matches!(
            encode(&super_, &bs("00")),
            Err(Error::EncodeNeedsGale)
        ));
        let rich = BettingStrategy::double_on_zero()
            .with_initial_capital(rat(2, 1))
            .unwrap();
        assert!(matches!(
            encode(&rich, &bs("00")),
            Err(Error::EncodeNeedsUnitCapital(_))
        ));
    }

    #[test]
    fn round_trips_on_every_compressible_string() {
        let fixtures = [
            BettingStrategy::double_on_zero(),
            BettingStrategy::repetition(2),
            lopsided_gale(rat(1, 3), rat(2, 3), GrowthFactor::martingale()),
            lopsided_gale(rat(5, 6), rat(1, 6), GrowthFactor::new(rat(3, 2)).unwrap()),
        ];
        for d in &fixtures {
            for n in [1usize, 4, 8] {
                let bound = floor_log2(&pow_rational(d.growth().rho(), n as i64));
                for x in BitString::all_of_len(n) {
                    match encode(d, &x) {
                        Ok(c) => {
                            assert_eq!(decode(d, &c).unwrap(), x);
                            assert!(i64::from(c.payload_bits()) <= bound + 2);
                            let band_low = cumulative(d, &x).unwrap();
                            let mass = d.evaluate(&x)
                                / pow_rational(d.growth().rho(), n as i64);
                            assert!(c.interval.subset_of(&band_low, &(band_low.clone() + mass)));
                        }
                        Err(Error::NotCompressible { .. }) => {}
                        Err(e) => panic!("unexpected: {e}"),
                    }
                }
            }
        }
    }

    #[test]
    fn cumulative_telescopes_stepwise() {
        let d = lopsided_gale(rat(1, 3), rat(2, 3), GrowthFactor::martingale());
        let n = 6;
        let denom = pow_rational(d.growth().rho(), n);
        let all: Vec<BitString> = BitString::all_of_len(n as usize).collect();
        for pair in all.windows(2) {
            let c_here = cumulative(&d, &pair[0]).unwrap();
            let p_here = d.evaluate(&pair[0]) / &denom;
            assert_eq!(c_here + p_here, cumulative(&d, &pair[1]).unwrap());
        }
        // The final band ends exactly at 1: the c_n(1^n + 1) = 1 convention.
        let last = &all[all.len() - 1];
        let c_last = cumulative(&d, last).unwrap();
        assert_eq!(c_last + d.evaluate(last) / &denom, rat(1, 1));
    }

    #[test]
    fn straddling_interval_is_reported_corrupt() {
        let d = lopsided_gale(rat(1, 3), rat(2, 3), GrowthFactor::martingale());
        // Child bands at the root split at 1/3; [1/4, 1/2] fits neither.
        let tampered = Codeword {
            n: 2,
            growth: GrowthFactor::martingale(),
            interval: DyadicInterval::new(1u32.into(), 2).unwrap(),
        };
        assert!(matches!(
            decode(&d, &tampered),
            Err(Error::Corrupt { position: 0 })
        ));
    }

    #[test]
    fn growth_mismatch_is_rejected_before_walking() {
        let dz = BettingStrategy::double_on_zero();
        let mut c = encode(&dz, &bs("000")).unwrap();
        c.growth = GrowthFactor::new(rat(3, 2)).unwrap();
        assert!(matches!(decode(&dz, &c), Err(Error::BadCodeword(_))));
    }

    #[test]
    fn wire_format_round_trips_and_rejects_damage() {
        let d = lopsided_gale(rat(5, 6), rat(1, 6), GrowthFactor::new(rat(3, 2)).unwrap());
        let c = encode(&d, &BitString::zeros(12)).unwrap();
        let bytes = c.to_bytes().unwrap();
        assert_eq!(&bytes[..3], &[b'G', b'F', 0x01]);
        assert_eq!(Codeword::from_bytes(&bytes).unwrap(), c);

        let mut wrong_magic = bytes.clone();
        wrong_magic[0] = b'H';
        assert!(Codeword::from_bytes(&wrong_magic).is_err());
        let mut wrong_version = bytes.clone();
        wrong_version[2] = 0x02;
        assert!(Codeword::from_bytes(&wrong_version).is_err());
        assert!(Codeword::from_bytes(&bytes[..bytes.len() - 1]).is_err());
        let mut trailing = bytes.clone();
        trailing.push(0);
        assert!(Codeword::from_bytes(&trailing).is_err());
    }

    #[test]
    fn rate_example_at_length_twelve() {
        let dz = BettingStrategy::double_on_zero();
        let x = BitString::zeros(12);
        let c = encode(&dz, &x).unwrap();
        assert_eq!(c.payload_bits(), 2);
        let header_bits = 8 * (c.to_bytes().unwrap().len() - 1);
        assert_eq!(
            rate_upper_bound(&dz, &x).unwrap(),
            rat(2 + header_bits as i64, 12)
        );
        assert!(matches!(
            rate_upper_bound(&BettingStrategy::uniform_martingale(), &x),
            Err(Error::NotCompressible { .. })
        ));
    }

    #[test]
    fn three_halves_growth_respects_the_width_bound() {
        let d = lopsided_gale(rat(5, 6), rat(1, 6), GrowthFactor::new(rat(3, 2)).unwrap());
        // floor(12 log2(3/2)) = 7, so any compressible 12-bit string fits in
        // 9 payload bits.
        for x in BitString::all_of_len(12) {
            if let Ok(c) = encode(&d, &x) {
                assert!(c.payload_bits() <= 9);
            }
        }
    }
}
