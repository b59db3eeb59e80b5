//! Named strategy fixtures and the on-disk text formats.
//!
//! Two small formats live here. A *strategy fixture* is a key-value text
//! record describing one betting strategy:
//!
//! ```text
//! # lopsided bettor
//! rule table
//! rho 3/2
//! initial 1
//! share0 5/6
//! share1 1/6
//! ```
//!
//! Keys: `rule` (required: `uniform`, `double-on-zero`, `repetition`, or
//! `table`), `rho` (growth as `p/q` or integer text, default 2), `initial`
//! (default 1), `kind` (`gale` or `supergale`, default `gale`), `m`
//! (repetition block exponent, default 2), `share0`/`share1` (table only,
//! required), and `bet PREFIX S0 S1` (table only, optional per-prefix
//! overrides; `PREFIX` is a bit string or `-` for the empty prefix). Blank
//! lines and `#` comments are ignored.
//!
//! A *roster file* lists combinator members, one per line, in index order:
//!
//! ```text
//! # index  strategy-id  budget-exponent
//! 1 uniform 2
//! 2 double-on-zero 2
//! 3 repetition 3
//! ```
//!
//! The strategy id is a builtin id (`uniform`, `double-on-zero`,
//! `repetition`, `repetition:M`) or a path to a strategy fixture file.

use std::fs;
use std::sync::Arc;

use std::str::FromStr;

use crate::bits::BitString;
use crate::error::{Error, Result};
use crate::gale::{
    BettingStrategy, DoubleOnZeroRule, GrowthFactor, RepetitionRule, StrategyKind, TableRule,
    UniformRule,
};
use crate::numerics::{parse_rational, rat};
use crate::universal::StrategyProgram;

/// The builtin strategy ids, resolvable without any file.
pub const BUILTIN_STRATEGIES: &[&str] = &["uniform", "double-on-zero", "repetition"];

/// Resolves a builtin strategy id. `repetition` defaults to block exponent
/// 2; `repetition:M` selects another.
pub fn builtin_strategy(id: &str) -> Result<BettingStrategy> {
    match id {
        "uniform" => Ok(BettingStrategy::uniform_martingale()),
        "double-on-zero" => Ok(BettingStrategy::double_on_zero()),
        "repetition" => Ok(BettingStrategy::repetition(2)),
        _ => {
            if let Some(m_text) = id.strip_prefix("repetition:") {
                let m: u32 = m_text
                    .parse()
                    .map_err(|_| Error::BadFixture(format!("bad block exponent in {id:?}")))?;
                if !(2..=16).contains(&m) {
                    return Err(Error::BadFixture(format!(
                        "block exponent {m} out of range 2..=16"
                    )));
                }
                return Ok(BettingStrategy::repetition(m));
            }
            Err(Error::BadFixture(format!(
                "unknown strategy id {id:?}; builtins are {}",
                BUILTIN_STRATEGIES.join(", ")
            )))
        }
    }
}

/// Resolves a strategy argument: a builtin id first, otherwise a path to a
/// strategy fixture file.
pub fn resolve_strategy(id_or_path: &str) -> Result<BettingStrategy> {
    match builtin_strategy(id_or_path) {
        Ok(d) => Ok(d),
        Err(builtin_err) => {
            if std::path::Path::new(id_or_path).is_file() {
                let text = fs::read_to_string(id_or_path)
                    .map_err(|e| Error::BadFixture(format!("cannot read {id_or_path:?}: {e}")))?;
                parse_strategy_fixture(&text)
            } else {
                Err(builtin_err)
            }
        }
    }
}

/// Parses the strategy fixture text format described in the module docs.
pub fn parse_strategy_fixture(text: &str) -> Result<BettingStrategy> {
    let mut rule_name: Option<String> = None;
    let mut rho = rat(2, 1);
    let mut initial = rat(1, 1);
    let mut kind = StrategyKind::Gale;
    let mut m = 2u32;
    let mut share0 = None;
    let mut share1 = None;
    let mut bets: Vec<(BitString, crate::numerics::Rational, crate::numerics::Rational)> =
        Vec::new();

    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let bad = |msg: String| Error::BadFixture(format!("line {}: {}", lineno + 1, msg));
        let mut parts = line.split_whitespace();
        let key = parts.next().unwrap();
        match key {
            "rule" | "rho" | "initial" | "kind" | "m" | "share0" | "share1" => {
                let value = parts
                    .next()
                    .ok_or_else(|| bad(format!("key {key:?} needs a value")))?;
                if parts.next().is_some() {
                    return Err(bad(format!("key {key:?} takes a single value")));
                }
                match key {
                    "rule" => rule_name = Some(value.to_string()),
                    "rho" => rho = parse_rational(value)?,
                    "initial" => initial = parse_rational(value)?,
                    "kind" => {
                        kind = match value {
                            "gale" => StrategyKind::Gale,
                            "supergale" => StrategyKind::Supergale,
                            _ => return Err(bad(format!("unknown kind {value:?}"))),
                        }
                    }
                    "m" => {
                        m = value
                            .parse()
                            .map_err(|_| bad(format!("bad block exponent {value:?}")))?
                    }
                    "share0" => share0 = Some(parse_rational(value)?),
                    "share1" => share1 = Some(parse_rational(value)?),
                    _ => unreachable!(),
                }
            }
            "bet" => {
                let prefix_text = parts
                    .next()
                    .ok_or_else(|| bad("bet needs PREFIX S0 S1".to_string()))?;
                let s0_text = parts
                    .next()
                    .ok_or_else(|| bad("bet needs PREFIX S0 S1".to_string()))?;
                let s1_text = parts
                    .next()
                    .ok_or_else(|| bad("bet needs PREFIX S0 S1".to_string()))?;
                if parts.next().is_some() {
                    return Err(bad("bet takes exactly three values".to_string()));
                }
                let prefix = if prefix_text == "-" {
                    BitString::empty()
                } else {
                    BitString::from_str(prefix_text)?
                };
                bets.push((prefix, parse_rational(s0_text)?, parse_rational(s1_text)?));
            }
            _ => return Err(bad(format!("unknown key {key:?}"))),
        }
    }

    let rule_name =
        rule_name.ok_or_else(|| Error::BadFixture("missing required key 'rule'".to_string()))?;
    let growth = GrowthFactor::new(rho)?;
    let rule: Arc<dyn crate::gale::BetRule> = match rule_name.as_str() {
        "uniform" => Arc::new(UniformRule),
        "double-on-zero" => Arc::new(DoubleOnZeroRule),
        "repetition" => Arc::new(RepetitionRule::new(m)),
        "table" => {
            let s0 = share0
                .ok_or_else(|| Error::BadFixture("table rule needs share0".to_string()))?;
            let s1 = share1
                .ok_or_else(|| Error::BadFixture("table rule needs share1".to_string()))?;
            let mut table = TableRule::constant(s0, s1);
            for (prefix, s0, s1) in bets {
                table.insert(prefix, s0, s1);
            }
            Arc::new(table)
        }
        _ => {
            return Err(Error::BadFixture(format!(
                "unknown rule {rule_name:?}; expected uniform, double-on-zero, repetition, or table"
            )))
        }
    };
    BettingStrategy::new(kind, growth, initial, rule)
}

/// One roster line: member index, strategy id or path, budget exponent.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RosterRecord {
    pub index: u32,
    pub strategy: String,
    pub budget_exponent: u32,
}

/// Parses a roster file into its records. Shape violations (duplicate or
/// out-of-range indices, non-monotone budgets) are left to [`combine`],
/// which sees the assembled programs.
///
/// [`combine`]: crate::universal::combine
pub fn parse_roster(text: &str) -> Result<Vec<RosterRecord>> {
    let mut records = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let bad = |msg: String| Error::BadRoster(format!("line {}: {}", lineno + 1, msg));
        let parts: Vec<&str> = line.split_whitespace().collect();
        if parts.len() != 3 {
            return Err(bad(format!(
                "expected '<index> <strategy-id> <budget-exponent>', got {line:?}"
            )));
        }
        let index: u32 = parts[0]
            .parse()
            .map_err(|_| bad(format!("bad index {:?}", parts[0])))?;
        let budget_exponent: u32 = parts[2]
            .parse()
            .map_err(|_| bad(format!("bad budget exponent {:?}", parts[2])))?;
        records.push(RosterRecord {
            index,
            strategy: parts[1].to_string(),
            budget_exponent,
        });
    }
    if records.is_empty() {
        return Err(Error::BadRoster("roster file has no records".to_string()));
    }
    Ok(records)
}

/// Resolves parsed roster records into combinator members.
pub fn roster_programs(records: &[RosterRecord]) -> Result<Vec<StrategyProgram>> {
    records
        .iter()
        .map(|rec| {
            Ok(StrategyProgram::new(
                rec.index,
                resolve_strategy(&rec.strategy)?,
                rec.budget_exponent,
            ))
        })
        .collect()
}
