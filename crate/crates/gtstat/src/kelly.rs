//! Kelly betting between two forecasters: one prices outcomes (the
//! denominator), the other buys the ratio of its own distribution to the
//! price (the numerator). Over a dataset the numerator's final capital is the
//! likelihood ratio, which makes the competition a descriptive measure of
//! relative forecasting success.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::families::{self, log_density, Dataset, FamilySpec, MleFit, ParamPoint};
use crate::ledger::{ratio_factor, PayoffSpec};
use crate::scalar::{real, xlny, Real};

/// A forecaster entered into a competition, staking `fraction` of its
/// capital each round (1 = full Kelly).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Competitor<T> {
    pub family: FamilySpec,
    pub theta: ParamPoint<T>,
    pub fraction: T,
}

impl<T: Real> Competitor<T> {
    pub fn new(family: FamilySpec, theta: ParamPoint<T>, fraction: T) -> Result<Self> {
        family.validate_theta(&theta)?;
        if fraction < T::zero() || fraction > T::one() {
            return Err(Error::Domain(format!(
                "fraction must be in [0, 1], got {fraction}"
            )));
        }
        Ok(Competitor {
            family,
            theta,
            fraction,
        })
    }

    /// Full-Kelly competitor (fraction 1).
    pub fn full(family: FamilySpec, theta: ParamPoint<T>) -> Result<Self> {
        Self::new(family, theta, T::one())
    }
}

/// The payoff the numerator buys from the denominator: num(y)/den(y) at
/// every outcome, staked at the numerator's fraction.
pub fn kelly_payoff<T: Real>(
    denominator: &Competitor<T>,
    numerator: &Competitor<T>,
) -> Result<PayoffSpec<T>> {
    require_same_family(denominator, numerator)?;
    if numerator.fraction > T::zero() {
        check_support(denominator, numerator)?;
    }
    Ok(PayoffSpec::DistributionRatio {
        numerator: (numerator.family.clone(), numerator.theta.clone()),
        denominator: (denominator.family.clone(), denominator.theta.clone()),
        fraction: numerator.fraction,
    })
}

/// Pointwise (1-f) + f * S(y) applied to an existing payoff.
pub fn fractional_payoff<T: Real>(payoff: &PayoffSpec<T>, fraction: T) -> Result<PayoffSpec<T>> {
    if fraction < T::zero() || fraction > T::one() {
        return Err(Error::Domain(format!(
            "fraction must be in [0, 1], got {fraction}"
        )));
    }
    match payoff {
        PayoffSpec::Table { factors } => Ok(PayoffSpec::Table {
            factors: factors
                .iter()
                .map(|(label, &s)| {
                    (label.clone(), (T::one() - fraction) + fraction * s)
                })
                .collect(),
        }),
        PayoffSpec::DistributionRatio {
            numerator,
            denominator,
            fraction: inner,
        } => {
            // (1-f) + f((1-g) + g r) = (1 - fg) + fg r: fractions compose.
            Ok(PayoffSpec::DistributionRatio {
                numerator: numerator.clone(),
                denominator: denominator.clone(),
                fraction: fraction * *inner,
            })
        }
        PayoffSpec::EventAllIn { .. } => {
            if fraction == T::one() {
                Ok(payoff.clone())
            } else {
                // The all-in form cannot carry the (1-f) floor; a fractional
                // event bet is a two-outcome table instead.
                Err(Error::Domain(
                    "fractional all-in event payoff is not representable; \
                     use a two-outcome table"
                        .into(),
                ))
            }
        }
    }
}

/// Result of a betting competition over a dataset.
///
/// `final_capital` is exp(log_capital); when that exceeds the scalar range
/// the flag is set and the largest finite value is reported instead of
/// infinity, with `log_capital` remaining the authoritative number.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CompetitionOutcome<T> {
    pub log_capital: T,
    pub final_capital: T,
    pub overflowed: bool,
}

impl<T: Real> CompetitionOutcome<T> {
    fn from_log(log_capital: T) -> Self {
        let final_capital = log_capital.exp();
        if final_capital.is_infinite() {
            CompetitionOutcome {
                log_capital,
                final_capital: T::max_value(),
                overflowed: true,
            }
        } else {
            CompetitionOutcome {
                log_capital,
                final_capital,
                overflowed: false,
            }
        }
    }
}

/// Runs the batch competition: the numerator repeatedly buys its Kelly
/// payoff from the denominator, one round per record.
///
/// The denominator is the forecaster being tested; its own `fraction` plays
/// no role. For full Kelly the final capital is exactly the likelihood ratio
/// of numerator to denominator.
pub fn compete<T: Real>(
    denominator: &Competitor<T>,
    numerator: &Competitor<T>,
    data: &Dataset<T>,
) -> Result<CompetitionOutcome<T>> {
    require_same_family(denominator, numerator)?;
    denominator.family.validate_theta(&denominator.theta)?;
    numerator.family.validate_theta(&numerator.theta)?;
    let f = numerator.fraction;
    if f == T::one() {
        check_support(denominator, numerator)?;
    }
    let log_capital = match (&denominator.family, data) {
        (FamilySpec::BernoulliConstant, Dataset::BinomialSummary { .. }) => {
            let (successes, trials) = families::binomial_counts(&denominator.family, data)?;
            binomial_log_capital(
                denominator.theta.values[0],
                numerator.theta.values[0],
                f,
                successes,
                trials,
            )?
        }
        (FamilySpec::NormalMeanVar, Dataset::NormalSummary { .. }) => {
            if f != T::one() {
                return Err(Error::Domain(
                    "fractional competition over summary data needs per-record \
                     factors; provide records"
                        .into(),
                ));
            }
            let (n, mean, sd) = families::normal_summary_of(data)?;
            normal_log_density_sum(n, mean, sd, &numerator.theta)
                - normal_log_density_sum(n, mean, sd, &denominator.theta)
        }
        (_, Dataset::Records(records)) => {
            if records.is_empty() {
                return Err(Error::EmptyData);
            }
            let mut log_capital = T::zero();
            for record in records {
                let num = log_density(&numerator.family, &numerator.theta, record)?;
                let den = log_density(&denominator.family, &denominator.theta, record)?;
                if f == T::one() {
                    if den.is_infinite() {
                        return Err(Error::UnboundedPayoff(format!("{record:?}")));
                    }
                    // Stays in log space: a zero-mass numerator outcome is
                    // honest ruin, not an error.
                    log_capital = log_capital + (num - den);
                } else {
                    log_capital =
                        log_capital + ratio_factor(num, den, f, || format!("{record:?}"))?.ln();
                }
            }
            log_capital
        }
        (family, _) => {
            return Err(Error::DatasetMismatch(format!(
                "summary dataset does not fit the {} family",
                family.kind_name()
            )))
        }
    };
    Ok(CompetitionOutcome::from_log(log_capital))
}

fn binomial_log_capital<T: Real>(
    theta_den: T,
    theta_num: T,
    f: T,
    successes: u64,
    trials: u64,
) -> Result<T> {
    let k = real::<T>(successes as f64);
    let n = real::<T>(trials as f64);
    let mut log_capital = T::zero();
    if successes > 0 {
        let factor = ratio_factor(theta_num.ln(), theta_den.ln(), f, || "y = 1".into())?;
        log_capital = log_capital + xlny(k, factor);
    }
    if successes < trials {
        let factor = ratio_factor(
            (T::one() - theta_num).ln(),
            (T::one() - theta_den).ln(),
            f,
            || "y = 0".into(),
        )?;
        log_capital = log_capital + xlny(n - k, factor);
    }
    Ok(log_capital)
}

fn normal_log_density_sum<T: Real>(n: u64, mean: T, sd: T, theta: &ParamPoint<T>) -> T {
    let (mu, var) = (theta.values[0], theta.values[1]);
    let half_n = real::<T>(n as f64) / real(2.0);
    let two = real::<T>(2.0);
    let dev = mean - mu;
    // sum of squared deviations about mu: n (sd^2 + (mean - mu)^2)
    -half_n * (two * T::PI() * var).ln() - half_n * ((sd * sd + dev * dev) / var)
}

fn require_same_family<T: Real>(a: &Competitor<T>, b: &Competitor<T>) -> Result<()> {
    if a.family != b.family {
        return Err(Error::RoundMismatch(format!(
            "competitors must share one family, got {} vs {}",
            a.family.kind_name(),
            b.family.kind_name()
        )));
    }
    Ok(())
}

/// Rejects denominators that put zero mass where the numerator puts some;
/// checkable exactly on the finite outcome spaces, vacuous for the normal.
fn check_support<T: Real>(denominator: &Competitor<T>, numerator: &Competitor<T>) -> Result<()> {
    let den = &denominator.theta.values;
    let num = &numerator.theta.values;
    match &denominator.family {
        FamilySpec::BernoulliConstant | FamilySpec::ProductBernoulliCells { .. } => {
            for (i, (&d, &u)) in den.iter().zip(num).enumerate() {
                if d == T::zero() && u > T::zero() {
                    return Err(Error::UnboundedPayoff(format!("success in component {i}")));
                }
                if d == T::one() && u < T::one() {
                    return Err(Error::UnboundedPayoff(format!("failure in component {i}")));
                }
            }
            Ok(())
        }
        FamilySpec::FiniteDiscrete { outcomes } => {
            for (i, (&d, &u)) in den.iter().zip(num).enumerate() {
                if d == T::zero() && u > T::zero() {
                    return Err(Error::UnboundedPayoff(format!("outcome {:?}", outcomes[i])));
                }
            }
            Ok(())
        }
        FamilySpec::NormalMeanVar => Ok(()),
    }
}

/// One competitor's standing after a tournament round against the MLE.
#[derive(Debug, Clone, PartialEq)]
pub struct TournamentEntry<T> {
    pub theta: ParamPoint<T>,
    pub outcome: CompetitionOutcome<T>,
}

/// Ranks candidate parameter points by betting against the family's own
/// best fit on the data, best log-capital first. An entry's log-capital is
/// exactly its log likelihood ratio, so the top of the table is the MLE's
/// immediate neighborhood.
pub fn tournament<T: Real>(
    family: &FamilySpec,
    data: &Dataset<T>,
    candidates: &[ParamPoint<T>],
    fraction: T,
) -> Result<Vec<TournamentEntry<T>>> {
    let MleFit { theta: best, .. } = families::mle(family, data)?;
    let denominator = Competitor::full(family.clone(), best)?;
    let mut entries = Vec::with_capacity(candidates.len());
    for theta in candidates {
        let numerator = Competitor::new(family.clone(), theta.clone(), fraction)?;
        entries.push(TournamentEntry {
            theta: theta.clone(),
            outcome: compete(&denominator, &numerator, data)?,
        });
    }
    entries.sort_by(|a, b| {
        b.outcome
            .log_capital
            .partial_cmp(&a.outcome.log_capital)
            .unwrap_or(Ordering::Equal)
    });
    Ok(entries)
}
