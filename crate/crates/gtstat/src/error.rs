//! Crate-wide error type. Payloads are `f64`/`String` so the enum stays
//! independent of the scalar type parameter.

/// Everything that can go wrong across the crate.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// A parameter or argument lies outside its mathematical domain.
    #[error("out of domain: {0}")]
    Domain(String),

    /// A record or outcome used a label the family does not declare.
    #[error("unknown label {0:?}")]
    UnknownLabel(String),

    /// An operation that needs data received none.
    #[error("dataset is empty")]
    EmptyData,

    /// A declared cell has no records, so its estimate is undefined.
    #[error("cell {0:?} has no records")]
    EmptyCell(String),

    /// The dataset kind cannot be evaluated under the given family.
    #[error("dataset does not fit the family: {0}")]
    DatasetMismatch(String),

    /// The data admit no valid parameter point (for example zero variance).
    #[error("degenerate data: {0}")]
    DegenerateData(String),

    /// Session ids are unique within a ledger.
    #[error("session {0:?} already exists")]
    DuplicateSession(String),

    #[error("no session named {0:?}")]
    UnknownSession(String),

    /// Closed sessions reject further bets.
    #[error("session {0:?} is closed")]
    ClosedSession(String),

    /// Aggregation is defined over closed sessions only.
    #[error("session {0:?} is still open")]
    OpenSession(String),

    /// A table payoff whose expected value under the forecast is not 1.
    #[error("payoff has expected value {got:.12} under the forecast, not 1")]
    ExpectationViolation { got: f64 },

    /// A payoff the forecaster cannot price: positive numerator mass where
    /// the forecast puts none.
    #[error("unbounded payoff: forecast puts zero mass on {0}")]
    UnboundedPayoff(String),

    /// The round's forecast, payoff, and outcome do not fit together.
    #[error("mismatched pairing: {0}")]
    RoundMismatch(String),

    /// Replaying a stored ledger did not reproduce its recorded capitals.
    #[error(
        "ledger replay mismatch in session {session:?} round {round}: \
         stored {stored:e}, recomputed {recomputed:e}"
    )]
    ReplayMismatch {
        session: String,
        round: u64,
        stored: f64,
        recomputed: f64,
    },

    /// A ledger file line that does not parse or arrives out of order.
    #[error("malformed ledger: {0}")]
    LedgerFormat(String),

    /// A range solver found a second mode where unimodality was required.
    #[error("log-likelihood is not unimodal near {0}")]
    NonUnimodal(f64),

    /// The family is outside what this operation supports.
    #[error("unsupported family: {0}")]
    UnsupportedFamily(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
