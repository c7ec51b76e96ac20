//! Betting-score accounting with optional continuation: sessions of
//! successive bets, capital trajectories, dynamic p-values, and cross-session
//! aggregation.
//!
//! A session starts with unit capital. Each round multiplies the capital by
//! the realized payoff factor of a unit-expectation bet, so the running
//! capital is itself the accumulated evidence against the forecaster. No
//! operation can inject capital, and capital 0 is absorbing.

use std::collections::BTreeMap;
use std::io::{BufRead, Write};
use std::path::Path;

use serde::{de::DeserializeOwned, Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::families::{log_density, FamilySpec, ParamPoint, Record};
use crate::scalar::{approx_f64, real, Real};

/// What the forecaster announced for one round.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Forecast<T> {
    /// Probability of a yes/no event.
    Event { probability: T },
    /// Distribution over finitely many labeled outcomes.
    Distribution { probabilities: BTreeMap<String, T> },
    /// A parametric forecaster.
    Model {
        family: FamilySpec,
        theta: ParamPoint<T>,
    },
}

/// The bettor's payoff: a nonnegative function of the outcome with expected
/// value 1 under the round's forecast.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PayoffSpec<T> {
    /// All-in bet on an event of forecast probability `alpha`: factor
    /// 1/alpha if it happens, 0 otherwise.
    EventAllIn { alpha: T },
    /// Explicit factor per outcome label; labels absent from the table pay 0.
    Table { factors: BTreeMap<String, T> },
    /// Kelly-style ratio of two forecasters staking `fraction` of capital:
    /// factor (1-f) + f * num(y)/den(y).
    DistributionRatio {
        numerator: (FamilySpec, ParamPoint<T>),
        denominator: (FamilySpec, ParamPoint<T>),
        fraction: T,
    },
}

/// What actually happened in one round.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Outcome<T> {
    Event { happened: bool },
    Label { label: String },
    Observation { record: Record<T> },
}

/// One settled bet.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BetRound<T> {
    pub t: u64,
    pub forecast: Forecast<T>,
    pub payoff: PayoffSpec<T>,
    pub outcome: Outcome<T>,
    pub factor: T,
    pub capital_after: T,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SessionStatus {
    Open,
    Closed,
}

/// An append-only betting session with unit initial capital.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LedgerSession<T> {
    pub id: String,
    pub rounds: Vec<BetRound<T>>,
    /// s_0 = 1, then one entry per settled round.
    pub capital_path: Vec<T>,
    pub running_max: T,
    pub status: SessionStatus,
}

/// Evidence snapshot of a session.
///
/// `evidence` is the current capital; `dynamic_p` derives from the running
/// maximum, which may exceed the capital at stopping time. The two are
/// reported separately on purpose: a final score is the capital actually
/// held, not the best level reached in the interim.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SessionReport<T> {
    pub evidence: T,
    pub running_max: T,
    pub dynamic_p: T,
}

impl<T: Real> LedgerSession<T> {
    /// Opens a session with capital fixed at 1.
    pub fn open(id: impl Into<String>) -> Result<Self> {
        let id = id.into();
        if id.is_empty() {
            return Err(Error::Domain("session id must be nonempty".into()));
        }
        Ok(LedgerSession {
            id,
            rounds: Vec::new(),
            capital_path: vec![T::one()],
            running_max: T::one(),
            status: SessionStatus::Open,
        })
    }

    pub fn current_capital(&self) -> T {
        *self.capital_path.last().expect("path holds at least s_0")
    }

    /// All-in bet against an event the forecast gives probability `alpha`.
    pub fn bet_event(&mut self, alpha: T, happened: bool) -> Result<&BetRound<T>> {
        self.bet_payoff(
            Forecast::Event { probability: alpha },
            PayoffSpec::EventAllIn { alpha },
            Outcome::Event { happened },
        )
    }

    /// Settles one round: validates the (forecast, payoff) pair, evaluates
    /// the factor at the outcome, and multiplies the capital.
    pub fn bet_payoff(
        &mut self,
        forecast: Forecast<T>,
        payoff: PayoffSpec<T>,
        outcome: Outcome<T>,
    ) -> Result<&BetRound<T>> {
        if self.status == SessionStatus::Closed {
            return Err(Error::ClosedSession(self.id.clone()));
        }
        validate_round(&forecast, &payoff)?;
        let factor = payoff.factor_at(&outcome)?;
        let capital_after = self.current_capital() * factor;
        if !capital_after.is_finite() {
            return Err(Error::Domain(format!(
                "capital overflowed: {} * {factor}",
                self.current_capital()
            )));
        }
        self.rounds.push(BetRound {
            t: self.rounds.len() as u64 + 1,
            forecast,
            payoff,
            outcome,
            factor,
            capital_after,
        });
        self.capital_path.push(capital_after);
        if capital_after > self.running_max {
            self.running_max = capital_after;
        }
        Ok(self.rounds.last().expect("just pushed"))
    }

    pub fn report(&self) -> SessionReport<T> {
        SessionReport {
            evidence: self.current_capital(),
            running_max: self.running_max,
            dynamic_p: T::one().min(self.running_max.recip()),
        }
    }

    /// Closes the session; the final score is the capital held now, not the
    /// running maximum.
    pub fn close(&mut self) -> Result<()> {
        if self.status == SessionStatus::Closed {
            return Err(Error::ClosedSession(self.id.clone()));
        }
        self.status = SessionStatus::Closed;
        Ok(())
    }

    /// Final score of a closed session.
    pub fn final_score(&self) -> Result<T> {
        match self.status {
            SessionStatus::Closed => Ok(self.current_capital()),
            SessionStatus::Open => Err(Error::OpenSession(self.id.clone())),
        }
    }
}

impl<T: Real> PayoffSpec<T> {
    /// Realized payoff factor at an outcome. Always >= 0.
    pub fn factor_at(&self, outcome: &Outcome<T>) -> Result<T> {
        match (self, outcome) {
            (PayoffSpec::EventAllIn { alpha }, Outcome::Event { happened }) => {
                if *happened {
                    Ok(alpha.recip())
                } else {
                    Ok(T::zero())
                }
            }
            (PayoffSpec::Table { factors }, Outcome::Label { label }) => {
                Ok(factors.get(label).copied().unwrap_or_else(T::zero))
            }
            (
                PayoffSpec::DistributionRatio {
                    numerator,
                    denominator,
                    fraction,
                },
                Outcome::Observation { record },
            ) => {
                let num = log_density(&numerator.0, &numerator.1, record)?;
                let den = log_density(&denominator.0, &denominator.1, record)?;
                ratio_factor(num, den, *fraction, || format!("{record:?}"))
            }
            (payoff, outcome) => Err(Error::RoundMismatch(format!(
                "outcome {} does not settle a {} payoff",
                outcome.kind_name(),
                payoff.kind_name()
            ))),
        }
    }

    fn kind_name(&self) -> &'static str {
        match self {
            PayoffSpec::EventAllIn { .. } => "event-all-in",
            PayoffSpec::Table { .. } => "table",
            PayoffSpec::DistributionRatio { .. } => "distribution-ratio",
        }
    }
}

impl<T> Outcome<T> {
    fn kind_name(&self) -> &'static str {
        match self {
            Outcome::Event { .. } => "event",
            Outcome::Label { .. } => "label",
            Outcome::Observation { .. } => "observation",
        }
    }
}

/// Factor (1-f) + f * exp(num - den) with the unpriceable cases rejected.
pub(crate) fn ratio_factor<T: Real>(
    num: T,
    den: T,
    fraction: T,
    describe_outcome: impl Fn() -> String,
) -> Result<T> {
    if den.is_infinite() && den < T::zero() {
        // The forecast put no mass on what happened. With any stake the
        // payoff there is unbounded, so the forecaster cannot price it.
        if fraction > T::zero() || num.is_infinite() {
            return Err(Error::UnboundedPayoff(describe_outcome()));
        }
        return Ok(T::one());
    }
    let ratio = (num - den).exp();
    let factor = if fraction == T::one() {
        ratio
    } else {
        (T::one() - fraction) + fraction * ratio
    };
    if !factor.is_finite() {
        return Err(Error::Domain("payoff factor overflowed".into()));
    }
    Ok(factor)
}

/// Checks that the payoff has unit expected value under the forecast and
/// that the two fit together structurally.
fn validate_round<T: Real>(forecast: &Forecast<T>, payoff: &PayoffSpec<T>) -> Result<()> {
    let tol = real::<T>(1e-9).max(T::epsilon() * real(16.0));
    match (forecast, payoff) {
        (Forecast::Event { probability }, PayoffSpec::EventAllIn { alpha }) => {
            if !(*alpha > T::zero() && *alpha <= T::one()) {
                return Err(Error::Domain(format!("alpha must be in (0, 1], got {alpha}")));
            }
            // Expectation of the all-in payoff is P(E)/alpha.
            if (*probability - *alpha).abs() > tol {
                return Err(Error::ExpectationViolation {
                    got: approx_f64(*probability / *alpha),
                });
            }
            Ok(())
        }
        (Forecast::Distribution { probabilities }, PayoffSpec::Table { factors }) => {
            let mut mass = T::zero();
            for (label, &p) in probabilities {
                if p < T::zero() || p > T::one() {
                    return Err(Error::Domain(format!(
                        "forecast probability for {label:?} out of [0, 1]: {p}"
                    )));
                }
                mass += p;
            }
            if (mass - T::one()).abs() > tol {
                return Err(Error::Domain(format!(
                    "forecast probabilities must sum to 1, got {mass}"
                )));
            }
            let mut expectation = T::zero();
            for (label, &factor) in factors {
                if factor < T::zero() {
                    return Err(Error::Domain(format!(
                        "payoff factor for {label:?} is negative: {factor}"
                    )));
                }
                let p = *probabilities
                    .get(label)
                    .ok_or_else(|| Error::UnknownLabel(label.clone()))?;
                if p == T::zero() && factor > T::zero() {
                    return Err(Error::UnboundedPayoff(format!("label {label:?}")));
                }
                expectation += p * factor;
            }
            if (expectation - T::one()).abs() > tol {
                return Err(Error::ExpectationViolation {
                    got: approx_f64(expectation),
                });
            }
            Ok(())
        }
        (
            Forecast::Model { family, theta },
            PayoffSpec::DistributionRatio {
                numerator,
                denominator,
                fraction,
            },
        ) => {
            if *fraction < T::zero() || *fraction > T::one() {
                return Err(Error::Domain(format!(
                    "fraction must be in [0, 1], got {fraction}"
                )));
            }
            numerator.0.validate_theta(&numerator.1)?;
            denominator.0.validate_theta(&denominator.1)?;
            if numerator.0 != denominator.0 {
                return Err(Error::RoundMismatch(
                    "ratio payoff needs one family for both sides".into(),
                ));
            }
            // The bettor buys the ratio against the round's own forecast;
            // only then does unit expectation hold by construction.
            if family != &denominator.0 || theta != &denominator.1 {
                return Err(Error::RoundMismatch(
                    "ratio denominator must be the round's forecast".into(),
                ));
            }
            Ok(())
        }
        (forecast, payoff) => Err(Error::RoundMismatch(format!(
            "{} forecast does not price a {} payoff",
            match forecast {
                Forecast::Event { .. } => "event",
                Forecast::Distribution { .. } => "distribution",
                Forecast::Model { .. } => "model",
            },
            payoff.kind_name()
        ))),
    }
}

/// Sum of final scores over sum of (unit) initial capitals. Every session
/// must be closed first: aggregating interim capital would reopen the door
/// to selective reporting.
pub fn aggregate<'a, T, I>(sessions: I) -> Result<T>
where
    T: Real + 'a,
    I: IntoIterator<Item = &'a LedgerSession<T>>,
{
    let mut total = T::zero();
    let mut count = 0u64;
    for session in sessions {
        total = total + session.final_score()?;
        count += 1;
    }
    if count == 0 {
        return Err(Error::EmptyData);
    }
    Ok(total / real(count as f64))
}

/// In-memory collection of sessions, keyed by id.
#[derive(Debug, Clone, PartialEq)]
pub struct Ledger<T> {
    pub sessions: BTreeMap<String, LedgerSession<T>>,
}

impl<T> Default for Ledger<T> {
    fn default() -> Self {
        Ledger {
            sessions: BTreeMap::new(),
        }
    }
}

impl<T: Real> Ledger<T> {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn open_session(&mut self, id: impl Into<String>) -> Result<&mut LedgerSession<T>> {
        let session = LedgerSession::open(id)?;
        let id = session.id.clone();
        if self.sessions.contains_key(&id) {
            return Err(Error::DuplicateSession(id));
        }
        Ok(self.sessions.entry(id).or_insert(session))
    }

    pub fn session(&self, id: &str) -> Result<&LedgerSession<T>> {
        self.sessions
            .get(id)
            .ok_or_else(|| Error::UnknownSession(id.to_string()))
    }

    pub fn session_mut(&mut self, id: &str) -> Result<&mut LedgerSession<T>> {
        self.sessions
            .get_mut(id)
            .ok_or_else(|| Error::UnknownSession(id.to_string()))
    }

    pub fn aggregate_all(&self) -> Result<T> {
        aggregate(self.sessions.values())
    }
}

/// One line of the append-only ledger file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "event", rename_all = "snake_case")]
pub enum LedgerRecord<T> {
    Open {
        session_id: String,
    },
    Round {
        session_id: String,
        t: u64,
        forecast: Forecast<T>,
        payoff: PayoffSpec<T>,
        outcome: Outcome<T>,
        factor: T,
        capital_after: T,
    },
    Close {
        session_id: String,
        final_score: T,
    },
}

impl<T: Real> LedgerRecord<T> {
    pub fn open(session_id: impl Into<String>) -> Self {
        LedgerRecord::Open {
            session_id: session_id.into(),
        }
    }

    pub fn round(session_id: impl Into<String>, round: &BetRound<T>) -> Self {
        LedgerRecord::Round {
            session_id: session_id.into(),
            t: round.t,
            forecast: round.forecast.clone(),
            payoff: round.payoff.clone(),
            outcome: round.outcome.clone(),
            factor: round.factor,
            capital_after: round.capital_after,
        }
    }

    pub fn close(session: &LedgerSession<T>) -> Self {
        LedgerRecord::Close {
            session_id: session.id.clone(),
            final_score: session.current_capital(),
        }
    }
}

/// Appends one record to a ledger file, creating the file if needed.
pub fn append_record<T: Real + Serialize>(
    path: impl AsRef<Path>,
    record: &LedgerRecord<T>,
) -> Result<()> {
    let mut file = std::fs::OpenOptions::new()
        .create(true)
        .append(true)
        .open(path)?;
    let line = serde_json::to_string(record)?;
    writeln!(file, "{line}")?;
    Ok(())
}

impl<T: Real + Serialize + DeserializeOwned> Ledger<T> {
    /// Loads a ledger file, replaying every round and verifying that the
    /// stored factors and capitals reproduce within 1e-12 relative.
    pub fn load_path(path: impl AsRef<Path>) -> Result<Self> {
        let file = std::fs::File::open(path)?;
        Self::from_ndjson(std::io::BufReader::new(file))
    }

    pub fn from_ndjson<R: BufRead>(reader: R) -> Result<Self> {
        let mut ledger = Ledger::new();
        for (i, line) in reader.lines().enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let record: LedgerRecord<T> = serde_json::from_str(&line)
                .map_err(|e| Error::LedgerFormat(format!("line {}: {e}", i + 1)))?;
            ledger.replay(record)?;
        }
        Ok(ledger)
    }

    fn replay(&mut self, record: LedgerRecord<T>) -> Result<()> {
        let tol = real::<T>(1e-12).max(T::epsilon() * real(16.0));
        match record {
            LedgerRecord::Open { session_id } => {
                self.open_session(session_id)?;
                Ok(())
            }
            LedgerRecord::Round {
                session_id,
                t,
                forecast,
                payoff,
                outcome,
                factor,
                capital_after,
            } => {
                let session = self.session_mut(&session_id)?;
                if t != session.rounds.len() as u64 + 1 {
                    return Err(Error::LedgerFormat(format!(
                        "session {session_id:?}: round {t} arrived after round {}",
                        session.rounds.len()
                    )));
                }
                let replayed = session.bet_payoff(forecast, payoff, outcome)?;
                for (stored, recomputed) in
                    [(factor, replayed.factor), (capital_after, replayed.capital_after)]
                {
                    if !close_rel(stored, recomputed, tol) {
                        return Err(Error::ReplayMismatch {
                            session: session_id,
                            round: t,
                            stored: approx_f64(stored),
                            recomputed: approx_f64(recomputed),
                        });
                    }
                }
                Ok(())
            }
            LedgerRecord::Close {
                session_id,
                final_score,
            } => {
                let session = self.session_mut(&session_id)?;
                session.close()?;
                let recomputed = session.current_capital();
                if !close_rel(final_score, recomputed, tol) {
                    return Err(Error::ReplayMismatch {
                        session: session_id,
                        round: session.rounds.len() as u64,
                        stored: approx_f64(final_score),
                        recomputed: approx_f64(recomputed),
                    });
                }
                Ok(())
            }
        }
    }
}

fn close_rel<T: Real>(a: T, b: T, tol: T) -> bool {
    a == b || (a - b).abs() <= tol * a.abs().max(b.abs())
}
