//! Game-theoretic statistics: betting-score ledgers, Kelly competitions,
//! and description ranges.
//!
//! The testing half treats evidence against a forecaster as money won from
//! it: a bettor buys payoffs the forecaster prices at expected value one,
//! and the accumulated capital is the strength of the case. [`ledger`]
//! records such sessions round by round, [`sim`] measures the threshold
//! bound empirically, and [`kelly`] runs the head-to-head competitions
//! whose final capital is a likelihood ratio.
//!
//! The descriptive half asks, after the fact, which members of a family fit
//! the data well enough: [`describe`] grades L(theta) against fixed cutoffs
//! and traces description ranges, and [`classical`] holds the normal-theory
//! error bounds the ranges get compared with.
//!
//! Everything is generic over the float width through [`scalar::Real`];
//! the `f64` aliases at the crate root are the intended entry point.

pub mod classical;
pub mod describe;
pub mod error;
pub mod families;
pub mod kelly;
pub mod ledger;
pub mod scalar;
pub mod sim;

pub use error::{Error, Result};
pub use scalar::Real;

pub use describe::{FormulaMode, FunctionalSpec, Grade, RangeMethod};
pub use families::FamilySpec;
pub use ledger::SessionStatus;

/// `f64` views of the generic types; most callers want these.
pub type ParamPoint = families::ParamPoint<f64>;
pub type Record = families::Record<f64>;
pub type Dataset = families::Dataset<f64>;
pub type MleFit = families::MleFit<f64>;

pub type Forecast = ledger::Forecast<f64>;
pub type PayoffSpec = ledger::PayoffSpec<f64>;
pub type Outcome = ledger::Outcome<f64>;
pub type BetRound = ledger::BetRound<f64>;
pub type LedgerSession = ledger::LedgerSession<f64>;
pub type SessionReport = ledger::SessionReport<f64>;
pub type Ledger = ledger::Ledger<f64>;
pub type LedgerRecord = ledger::LedgerRecord<f64>;

pub type Competitor = kelly::Competitor<f64>;
pub type CompetitionOutcome = kelly::CompetitionOutcome<f64>;
pub type TournamentEntry = kelly::TournamentEntry<f64>;

pub type Cutoffs = describe::Cutoffs<f64>;
pub type DescriptionRange = describe::DescriptionRange<f64>;
pub type ErrorBound = classical::ErrorBound<f64>;

pub type SimConfig = sim::SimConfig<f64>;
pub type VilleReport = sim::VilleReport<f64>;
