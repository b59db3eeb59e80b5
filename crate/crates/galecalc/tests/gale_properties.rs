//! Whole-tree invariants of the betting layer, checked exhaustively at
//! depths the unit tests leave alone.

use num_traits::{One, Zero};

use galecalc::bits::BitString;
use galecalc::fixtures::parse_strategy_fixture;
use galecalc::gale::{
    jump_event, scale_strategy, success_stats, validate, BettingStrategy, CapitalSource,
    GrowthFactor, StrategyKind,
};
use galecalc::numerics::{pow_rational, rat, Rational};
use galecalc::prg::{induced_supergale, BitSource, PrgFamily, SampledDistribution};

fn gale_fixtures() -> Vec<(&'static str, BettingStrategy)> {
    vec![
        ("uniform", BettingStrategy::uniform_martingale()),
        ("double-on-zero", BettingStrategy::double_on_zero()),
        ("repetition", BettingStrategy::repetition(2)),
        (
            "lopsided",
            parse_strategy_fixture("rule table\nshare0 2/3\nshare1 1/3\n").unwrap(),
        ),
        (
            "three-halves",
            parse_strategy_fixture("rule table\nrho 3/2\nshare0 5/6\nshare1 1/6\n").unwrap(),
        ),
    ]
}

/// Draws a string of the given length from a seeded stream.
fn random_string(source: &mut BitSource, len: u64) -> BitString {
    source.draw(len)
}

#[test]
fn capital_is_conserved_at_every_depth() {
    for (name, d) in gale_fixtures() {
        assert!(validate(&d, 8).ok, "{name} should validate");
        for n in [1u32, 4, 12] {
            let total: Rational = BitString::all_of_len(n as usize)
                .map(|w| d.evaluate(&w))
                .sum();
            let expected = pow_rational(d.growth().rho(), i64::from(n)) * d.initial_capital();
            assert_eq!(total, expected, "{name} at depth {n}");
        }
    }
}

#[test]
fn scaled_strategies_validate_and_match_pointwise() {
    let targets = [rat(2, 1), rat(7, 4), rat(3, 2)];
    let mut source = BitSource::from_seed(41);
    for (name, d) in gale_fixtures() {
        for target in &targets {
            if target < d.growth().rho() {
                assert!(scale_strategy(&d, &GrowthFactor::new(target.clone()).unwrap()).is_err());
                continue;
            }
            let growth = GrowthFactor::new(target.clone()).unwrap();
            let scaled = scale_strategy(&d, &growth).unwrap();
            assert_eq!(scaled.kind(), StrategyKind::Supergale);
            assert_eq!(*scaled.growth().rho(), rat(2, 1));
            let report = validate(&scaled, 12);
            assert!(report.ok, "{name} scaled to {target}: {report}");

            // d_scaled(w) = d(w) * (2 / target)^{|w|}, exhaustive short and
            // sampled long.
            let factor = rat(2, 1) / target;
            for w in BitString::all_of_len(6) {
                assert_eq!(
                    scaled.evaluate(&w),
                    d.evaluate(&w) * pow_rational(&factor, w.len() as i64)
                );
            }
            for _ in 0..10 {
                let w = random_string(&mut source, 12);
                assert_eq!(
                    scaled.evaluate(&w),
                    d.evaluate(&w) * pow_rational(&factor, w.len() as i64),
                    "{name} scaled to {target} at {w}"
                );
            }
        }
    }
}

#[test]
fn jump_events_ignore_the_initial_stake() {
    let mut source = BitSource::from_seed(97);
    let tp = GrowthFactor::new(rat(3, 2)).unwrap().threshold_power(8);
    for (name, d) in gale_fixtures() {
        for gamma in [rat(1, 3), rat(2, 1), rat(100, 1)] {
            let rescaled = d.clone().with_initial_capital(gamma).unwrap();
            for _ in 0..20 {
                let x = random_string(&mut source, 16);
                let base = jump_event(&d, &x, 4, &tp).unwrap();
                let scaled = jump_event(&rescaled, &x, 4, &tp).unwrap();
                assert_eq!(base, scaled, "{name} at {x}");
            }
        }
    }
}

#[test]
fn zero_capital_is_absorbing() {
    let mut source = BitSource::from_seed(29);
    for (name, d) in gale_fixtures() {
        for _ in 0..30 {
            let x = random_string(&mut source, 14);
            let caps = d.capitals_along(&x);
            if let Some(first_zero) = caps.iter().position(|c| c.is_zero()) {
                assert!(
                    caps[first_zero..].iter().all(|c| c.is_zero()),
                    "{name} revived dead capital on {x}"
                );
            }
        }
    }
}

#[test]
fn induced_supergales_validate_at_exhaustive_depth() {
    for kind in ["repetition", "lfsr", "hash-chain"] {
        let prg = match kind {
            "repetition" => PrgFamily::repetition(2).unwrap(),
            "lfsr" => PrgFamily::lfsr(2).unwrap(),
            _ => PrgFamily::hash_chain(2).unwrap(),
        };
        let dist = SampledDistribution::new(prg);
        for rho in [rat(2, 1), rat(3, 2)] {
            let induced =
                induced_supergale(&dist, &GrowthFactor::new(rho.clone()).unwrap()).unwrap();
            let report = validate(&induced, 12);
            assert!(report.ok, "{kind} at rho {rho}: {report}");
        }
    }
}

#[test]
fn success_stats_agree_with_the_capital_trace() {
    let mut source = BitSource::from_seed(67);
    for (name, d) in gale_fixtures() {
        for _ in 0..20 {
            let x = random_string(&mut source, 24);
            for threshold in [Rational::one(), rat(4, 1)] {
                let stats = success_stats(&d, &x, &threshold);
                let caps = d.capitals_along(&x);
                let first = caps.iter().position(|c| *c >= threshold);
                // Reverse scan, independent of the forward filter inside.
                let from = first.unwrap_or(0);
                let last_below = (from..caps.len()).rev().find(|&l| caps[l] < threshold);
                assert_eq!(
                    stats.first_hit,
                    first.map(|v| v as u64),
                    "{name} first_hit on {x}"
                );
                assert_eq!(
                    stats.last_below,
                    last_below.map(|v| v as u64),
                    "{name} last_below on {x}"
                );
            }
        }
    }
}
