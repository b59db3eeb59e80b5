//! Exact gale calculus at desk scale.
//!
//! The crate implements, with arbitrary-precision rational arithmetic and no
//! floating point anywhere, the small zoo of objects that connect betting
//! strategies to pseudorandomness and compression:
//!
//! - [`gale`]: s-gales, supergales, and martingales given as incremental
//!   betting shares, with evaluation, validation, growth rescaling,
//!   jump-event predicates, and success statistics.
//! - [`prg`]: toy pseudorandom generator families, the block extension map
//!   that turns finite seeds into unbounded sequences, and the short-seed
//!   sampled distribution it induces, with exhaustive mass/support queries.
//! - [`universal`]: the weighted combination of a finite roster of strategies
//!   into a single exact s-gale with budget metering and freezing.
//! - [`codec`]: the gale-driven compressor — cumulative-interval encoder,
//!   binary-search decoder, and a bit-exact codeword wire format.
//! - [`distinguish`]: the statistical test that feeds capital jumps back into
//!   acceptance rates on generator outputs versus uniform inputs.
//! - [`oracles`]: independent brute-force re-derivations used to check the
//!   fast paths.
//!
//! Everything is deterministic: randomized procedures take a seeded stream.

pub mod bits;
pub mod codec;
pub mod distinguish;
pub mod error;
pub mod fixtures;
pub mod gale;
pub mod numerics;
pub mod oracles;
pub mod prg;
pub mod universal;

pub use bits::BitString;
pub use codec::{cumulative, decode, encode, rate_upper_bound, Codeword};
pub use distinguish::{
    advantage, jump_frequency, run_a, run_a_general, run_a_with, DistinguisherConfig,
    DistinguisherReport, GeneralParams, TrialOutcome,
};
pub use error::{Error, Result};
pub use fixtures::{
    builtin_strategy, parse_roster, parse_strategy_fixture, resolve_strategy, roster_programs,
    RosterRecord, BUILTIN_STRATEGIES,
};
pub use gale::{
    general_jump_event, jump_event, scale_strategy, success_stats, validate, BetRule,
    BettingStrategy, CapitalSource, CapitalTrace, CapitalWalk, GrowthFactor, JumpScale,
    StepCost, StrategyKind, SuccessStats, ValidationReport,
};
pub use numerics::{contained_dyadic, DyadicInterval, Rational};
pub use oracles::{
    exhaustive_success_set, kolmogorov_count, naive_cumulative, naive_cumulative_table,
    OracleReport,
};
pub use prg::{
    check_nu_approximable, extend_g, induced_supergale, Approximator, BitSource, PrgFamily,
    PrgKind, SampledDistribution,
};
pub use universal::{combine, domination_constant, CombinedGale, StrategyProgram};
