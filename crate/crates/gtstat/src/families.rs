//! Forecasting families: the probability models that play the role of
//! forecasters. A family fixes the model shape and its label metadata; a
//! [`ParamPoint`] picks one forecaster out of the family.
//!
//! Everything downstream (ledgers, competitions, description ranges) is
//! built on four evaluations defined here: log density, closed-form MLE,
//! log likelihood ratio against the MLE, and seeded sampling.

use std::collections::BTreeMap;
use std::io::Read as IoRead;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rand_distr::Distribution;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{approx_f64, real, xlny, Real};

/// Which parametric family, plus its label metadata.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum FamilySpec {
    /// A single success probability shared by every record.
    BernoulliConstant,
    /// Normal with both mean and variance unknown.
    NormalMeanVar,
    /// One success probability per labeled cell; records carry a cell label.
    ProductBernoulliCells { cells: Vec<String> },
    /// A categorical distribution over labeled outcomes; the record label is
    /// the observation and `y` is conventionally 1.
    FiniteDiscrete { outcomes: Vec<String> },
}

impl FamilySpec {
    /// Bernoulli-per-cell family over the given cell labels (k >= 1, distinct).
    pub fn product_bernoulli<I, S>(cells: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let cells: Vec<String> = cells.into_iter().map(Into::into).collect();
        if cells.is_empty() {
            return Err(Error::Domain("cell family needs at least one cell".into()));
        }
        require_distinct(&cells)?;
        Ok(FamilySpec::ProductBernoulliCells { cells })
    }

    /// Categorical family over the given outcome labels (m >= 2, distinct).
    pub fn finite_discrete<I, S>(outcomes: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let outcomes: Vec<String> = outcomes.into_iter().map(Into::into).collect();
        if outcomes.len() < 2 {
            return Err(Error::Domain(
                "discrete family needs at least two outcomes".into(),
            ));
        }
        require_distinct(&outcomes)?;
        Ok(FamilySpec::FiniteDiscrete { outcomes })
    }

    /// Number of parameter components a [`ParamPoint`] must carry.
    pub fn param_len(&self) -> usize {
        match self {
            FamilySpec::BernoulliConstant => 1,
            FamilySpec::NormalMeanVar => 2,
            FamilySpec::ProductBernoulliCells { cells } => cells.len(),
            FamilySpec::FiniteDiscrete { outcomes } => outcomes.len(),
        }
    }

    /// Declared labels, if this family has any.
    pub fn labels(&self) -> Option<&[String]> {
        match self {
            FamilySpec::ProductBernoulliCells { cells } => Some(cells),
            FamilySpec::FiniteDiscrete { outcomes } => Some(outcomes),
            _ => None,
        }
    }

    /// Index of a declared label.
    pub fn label_index(&self, label: &str) -> Result<usize> {
        self.labels()
            .and_then(|ls| ls.iter().position(|l| l == label))
            .ok_or_else(|| Error::UnknownLabel(label.to_string()))
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            FamilySpec::BernoulliConstant => "bernoulli",
            FamilySpec::NormalMeanVar => "normal",
            FamilySpec::ProductBernoulliCells { .. } => "bernoulli-cells",
            FamilySpec::FiniteDiscrete { .. } => "discrete",
        }
    }

    /// Checks that `theta` is a valid parameter point for this family.
    ///
    /// Probability components are accepted on the closed interval [0, 1]:
    /// boundary points arise legitimately as degenerate MLEs and as sampling
    /// parameters, and densities handle them by assigning mass zero where
    /// needed. The normal variance stays strictly positive.
    pub fn validate_theta<T: Real>(&self, theta: &ParamPoint<T>) -> Result<()> {
        let want = self.param_len();
        if theta.values.len() != want {
            return Err(Error::Domain(format!(
                "{} expects {} parameter component(s), got {}",
                self.kind_name(),
                want,
                theta.values.len()
            )));
        }
        if theta.values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Domain("parameter components must be finite".into()));
        }
        match self {
            FamilySpec::BernoulliConstant | FamilySpec::ProductBernoulliCells { .. } => {
                for &v in &theta.values {
                    require_probability(v)?;
                }
            }
            FamilySpec::NormalMeanVar => {
                if theta.values[1] <= T::zero() {
                    return Err(Error::Domain(format!(
                        "variance must be positive, got {}",
                        theta.values[1]
                    )));
                }
            }
            FamilySpec::FiniteDiscrete { .. } => {
                let mut sum = T::zero();
                for &v in &theta.values {
                    require_probability(v)?;
                    sum += v;
                }
                // 1e-12 absolute for f64; widened only as far as the scalar
                // type's own precision forces.
                let tol = real::<T>(1e-12).max(T::epsilon() * real(16.0));
                if (sum - T::one()).abs() > tol {
                    return Err(Error::Domain(format!(
                        "outcome probabilities must sum to 1, got {sum}"
                    )));
                }
            }
        }
        Ok(())
    }
}

fn require_distinct(labels: &[String]) -> Result<()> {
    for (i, l) in labels.iter().enumerate() {
        if labels[..i].contains(l) {
            return Err(Error::Domain(format!("duplicate label {l:?}")));
        }
    }
    Ok(())
}

fn require_probability<T: Real>(v: T) -> Result<()> {
    if v < T::zero() || v > T::one() {
        Err(Error::Domain(format!("probability out of [0, 1]: {v}")))
    } else {
        Ok(())
    }
}

/// A point in a family's parameter space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamPoint<T> {
    pub values: Vec<T>,
}

impl<T> ParamPoint<T> {
    pub fn new(values: Vec<T>) -> Self {
        ParamPoint { values }
    }
}

impl<T> From<Vec<T>> for ParamPoint<T> {
    fn from(values: Vec<T>) -> Self {
        ParamPoint { values }
    }
}

/// One observation: the target value `y`, optionally tagged with the cell or
/// outcome label that plays the role of the forecasting variable.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Record<T> {
    pub label: Option<String>,
    pub y: T,
}

impl<T: Real> Record<T> {
    pub fn numeric(y: T) -> Self {
        Record { label: None, y }
    }

    pub fn labeled(label: impl Into<String>, y: T) -> Self {
        Record {
            label: Some(label.into()),
            y,
        }
    }

    /// Categorical observation: the label is the outcome.
    pub fn outcome(label: impl Into<String>) -> Self {
        Record {
            label: Some(label.into()),
            y: T::one(),
        }
    }
}

/// Observations of the target variable, either as raw records or as one of
/// the two summary forms that the closed-form evaluations accept directly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Dataset<T> {
    Records(Vec<Record<T>>),
    /// `sd` follows the population convention: sd^2 = (1/n) sum (y - mean)^2.
    NormalSummary { n: u64, mean: T, sd: T },
    BinomialSummary { trials: u64, successes: u64 },
}

impl<T: Real> Dataset<T> {
    pub fn records(records: Vec<Record<T>>) -> Self {
        Dataset::Records(records)
    }

    pub fn normal_summary(n: u64, mean: T, sd: T) -> Result<Self> {
        if n == 0 {
            return Err(Error::EmptyData);
        }
        if !mean.is_finite() || !sd.is_finite() || sd < T::zero() {
            return Err(Error::Domain(format!(
                "normal summary needs finite mean and sd >= 0, got ({mean}, {sd})"
            )));
        }
        Ok(Dataset::NormalSummary { n, mean, sd })
    }

    pub fn binomial_summary(trials: u64, successes: u64) -> Result<Self> {
        if trials == 0 {
            return Err(Error::EmptyData);
        }
        if successes > trials {
            return Err(Error::Domain(format!(
                "successes {successes} exceed trials {trials}"
            )));
        }
        Ok(Dataset::BinomialSummary { trials, successes })
    }

    /// Expands per-cell (label, successes, trials) counts into labeled 0/1
    /// records, for families that condition on cells.
    pub fn bernoulli_cells<S: AsRef<str>>(counts: &[(S, u64, u64)]) -> Result<Self> {
        let mut records = Vec::new();
        for (label, successes, trials) in counts {
            if successes > trials {
                return Err(Error::Domain(format!(
                    "cell {:?}: successes {successes} exceed trials {trials}",
                    label.as_ref()
                )));
            }
            for i in 0..*trials {
                let y = if i < *successes { T::one() } else { T::zero() };
                records.push(Record::labeled(label.as_ref(), y));
            }
        }
        Ok(Dataset::Records(records))
    }

    pub fn len(&self) -> u64 {
        match self {
            Dataset::Records(records) => records.len() as u64,
            Dataset::NormalSummary { n, .. } => *n,
            Dataset::BinomialSummary { trials, .. } => *trials,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Reads records from CSV with header `label,y` or `y`.
    pub fn from_csv_path(path: impl AsRef<Path>) -> Result<Self> {
        let file = std::fs::File::open(path)?;
        Self::from_csv_reader(file)
    }

    pub fn from_csv_reader<R: IoRead>(reader: R) -> Result<Self> {
        let mut csv = csv::ReaderBuilder::new()
            .has_headers(true)
            .trim(csv::Trim::All)
            .from_reader(reader);
        let headers = csv.headers()?.clone();
        let cols: Vec<&str> = headers.iter().collect();
        let labeled = match cols.as_slice() {
            ["label", "y"] => true,
            ["y"] => false,
            other => {
                return Err(Error::DatasetMismatch(format!(
                    "csv header must be `label,y` or `y`, got {other:?}"
                )))
            }
        };
        let mut records = Vec::new();
        for (i, row) in csv.records().enumerate() {
            let row = row?;
            let (label, y_text) = if labeled {
                let label = row.get(0).unwrap_or("");
                (
                    (!label.is_empty()).then(|| label.to_string()),
                    row.get(1).unwrap_or(""),
                )
            } else {
                (None, row.get(0).unwrap_or(""))
            };
            let y: f64 = y_text.parse().map_err(|_| {
                Error::Domain(format!("csv row {}: bad y value {y_text:?}", i + 2))
            })?;
            records.push(Record { label, y: real(y) });
        }
        Ok(Dataset::Records(records))
    }
}

/// A closed-form maximum-likelihood fit.
///
/// `boundary` lists parameter components whose estimate landed on the closed
/// boundary of an open domain (an all-0 or all-1 Bernoulli cell, an
/// unobserved discrete outcome). Ratios against such fits stay well defined
/// through the 0^0 = 1 convention.
#[derive(Debug, Clone, PartialEq)]
pub struct MleFit<T> {
    pub theta: ParamPoint<T>,
    pub boundary: Vec<usize>,
}

impl<T> MleFit<T> {
    pub fn is_degenerate(&self) -> bool {
        !self.boundary.is_empty()
    }
}

/// Natural-log density (or mass) of one record under `theta`.
///
/// Returns negative infinity where the point mass is exactly zero, for
/// example a success under a boundary parameter of 0.
pub fn log_density<T: Real>(
    family: &FamilySpec,
    theta: &ParamPoint<T>,
    record: &Record<T>,
) -> Result<T> {
    family.validate_theta(theta)?;
    match family {
        FamilySpec::BernoulliConstant => {
            require_unlabeled(family, record)?;
            bernoulli_log_mass(theta.values[0], record.y)
        }
        FamilySpec::NormalMeanVar => {
            require_unlabeled(family, record)?;
            let (mu, var) = (theta.values[0], theta.values[1]);
            let two = real::<T>(2.0);
            let dev = record.y - mu;
            Ok(-(two * T::PI() * var).ln() / two - dev * dev / (two * var))
        }
        FamilySpec::ProductBernoulliCells { .. } => {
            let idx = family.label_index(require_label(record)?)?;
            bernoulli_log_mass(theta.values[idx], record.y)
        }
        FamilySpec::FiniteDiscrete { .. } => {
            let idx = family.label_index(require_label(record)?)?;
            Ok(theta.values[idx].ln())
        }
    }
}

fn require_label<T>(record: &Record<T>) -> Result<&str> {
    record
        .label
        .as_deref()
        .ok_or_else(|| Error::UnknownLabel("<missing>".into()))
}

fn require_unlabeled<T>(family: &FamilySpec, record: &Record<T>) -> Result<()> {
    match &record.label {
        Some(label) => Err(Error::UnknownLabel(format!(
            "{label:?} (the {} family declares no labels)",
            family.kind_name()
        ))),
        None => Ok(()),
    }
}

fn bernoulli_log_mass<T: Real>(theta: T, y: T) -> Result<T> {
    if y == T::one() {
        Ok(theta.ln())
    } else if y == T::zero() {
        Ok((T::one() - theta).ln())
    } else {
        Err(Error::Domain(format!("Bernoulli outcome must be 0 or 1, got {y}")))
    }
}

/// Closed-form maximum-likelihood estimate for `family` on `data`.
pub fn mle<T: Real>(family: &FamilySpec, data: &Dataset<T>) -> Result<MleFit<T>> {
    match family {
        FamilySpec::BernoulliConstant => {
            let (successes, trials) = binomial_counts(family, data)?;
            let theta = real::<T>(successes as f64) / real(trials as f64);
            let mut boundary = Vec::new();
            if successes == 0 || successes == trials {
                boundary.push(0);
            }
            Ok(MleFit {
                theta: ParamPoint::new(vec![theta]),
                boundary,
            })
        }
        FamilySpec::NormalMeanVar => {
            let (_, mean, sd) = normal_summary_of(data)?;
            if sd <= T::zero() {
                return Err(Error::DegenerateData(
                    "zero empirical variance: no valid normal parameter point".into(),
                ));
            }
            Ok(MleFit {
                theta: ParamPoint::new(vec![mean, sd * sd]),
                boundary: Vec::new(),
            })
        }
        FamilySpec::ProductBernoulliCells { cells } => {
            let counts = cell_counts(family, data)?;
            let mut values = Vec::with_capacity(cells.len());
            let mut boundary = Vec::new();
            for (i, &(successes, trials)) in counts.iter().enumerate() {
                if trials == 0 {
                    return Err(Error::EmptyCell(cells[i].clone()));
                }
                values.push(real::<T>(successes as f64) / real(trials as f64));
                if successes == 0 || successes == trials {
                    boundary.push(i);
                }
            }
            Ok(MleFit {
                theta: ParamPoint::new(values),
                boundary,
            })
        }
        FamilySpec::FiniteDiscrete { outcomes } => {
            let counts = outcome_counts(family, data)?;
            let n: u64 = counts.iter().sum();
            debug_assert!(n > 0);
            let mut values = Vec::with_capacity(outcomes.len());
            let mut boundary = Vec::new();
            for (i, &c) in counts.iter().enumerate() {
                values.push(real::<T>(c as f64) / real(n as f64));
                if c == 0 {
                    boundary.push(i);
                }
            }
            Ok(MleFit {
                theta: ParamPoint::new(values),
                boundary,
            })
        }
    }
}

/// Log likelihood ratio `l = ln P_theta(data) - ln P_mle(data)` and its
/// exponential `L`, the fraction of capital `theta` retains when the best
/// forecaster in the family bets against it.
///
/// `L` lies in [0, 1] up to floating-point slack; it is 1 exactly at the MLE
/// because both summands go through the same evaluation.
pub fn log_lr<T: Real>(
    family: &FamilySpec,
    theta: &ParamPoint<T>,
    data: &Dataset<T>,
) -> Result<(T, T)> {
    family.validate_theta(theta)?;
    let fit = mle(family, data)?;
    let l = match (family, data) {
        // Summary forms evaluate through closed formulas; record forms sum
        // per-record log densities. The two routes agree analytically and
        // the tests hold them together.
        (FamilySpec::BernoulliConstant, Dataset::BinomialSummary { trials, successes }) => {
            let k = real::<T>(*successes as f64);
            let n = real::<T>(*trials as f64);
            let t = theta.values[0];
            let that = fit.theta.values[0];
            xlny(k, t) + xlny(n - k, T::one() - t) - xlny(k, that) - xlny(n - k, T::one() - that)
        }
        (FamilySpec::NormalMeanVar, Dataset::NormalSummary { n, mean, sd }) => {
            normal_summary_log_lr(*n, *mean, *sd, theta.values[0], theta.values[1])
        }
        (_, Dataset::Records(records)) => {
            if records.is_empty() {
                return Err(Error::EmptyData);
            }
            let mut sum_theta = T::zero();
            let mut sum_mle = T::zero();
            for record in records {
                sum_theta = sum_theta + log_density(family, theta, record)?;
                sum_mle = sum_mle + log_density(family, &fit.theta, record)?;
            }
            sum_theta - sum_mle
        }
        (family, _) => {
            return Err(Error::DatasetMismatch(format!(
                "summary dataset does not fit the {} family",
                family.kind_name()
            )))
        }
    };
    Ok((l, l.exp()))
}

/// Closed-form log likelihood ratio for the normal family on summary data.
///
/// Sum of squared deviations about `mu` decomposes as n(sd^2 + (mean-mu)^2);
/// the ratio term is divided before scaling so the result is exactly 0 at
/// the MLE.
fn normal_summary_log_lr<T: Real>(n: u64, mean: T, sd: T, mu: T, var: T) -> T {
    let half_n = real::<T>(n as f64) / real(2.0);
    let ssq = sd * sd;
    let dev = mean - mu;
    -half_n * (var / ssq).ln() - half_n * ((ssq + dev * dev) / var) + half_n
}

/// Draws `n` records from the forecaster `(family, theta)`, deterministically
/// in `seed`.
pub fn sample<T: Real>(
    family: &FamilySpec,
    theta: &ParamPoint<T>,
    n: u64,
    seed: u64,
) -> Result<Dataset<T>> {
    family.validate_theta(theta)?;
    if n == 0 {
        return Err(Error::Domain("sample size must be at least 1".into()));
    }
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mut records = Vec::with_capacity(n as usize);
    for _ in 0..n {
        records.push(draw_record(family, theta, &mut rng));
    }
    Ok(Dataset::Records(records))
}

/// One random record under `(family, theta)`. Draws happen in f64 and then
/// convert, so the stream is identical for every scalar type.
///
/// For the cell family the cell itself is drawn uniformly; the family models
/// outcomes conditional on cells and takes no stance on the cell marginal.
pub(crate) fn draw_record<T: Real, R: Rng + ?Sized>(
    family: &FamilySpec,
    theta: &ParamPoint<T>,
    rng: &mut R,
) -> Record<T> {
    match family {
        FamilySpec::BernoulliConstant => Record::numeric(draw_bernoulli(theta.values[0], rng)),
        FamilySpec::NormalMeanVar => {
            let normal = rand_distr::Normal::new(
                approx_f64(theta.values[0]),
                approx_f64(theta.values[1]).sqrt(),
            )
            .expect("validated variance is positive");
            Record::numeric(real(normal.sample(rng)))
        }
        FamilySpec::ProductBernoulliCells { cells } => {
            let idx = rng.random_range(0..cells.len());
            Record::labeled(cells[idx].clone(), draw_bernoulli(theta.values[idx], rng))
        }
        FamilySpec::FiniteDiscrete { outcomes } => {
            let u: f64 = rng.random();
            let mut acc = 0.0;
            let mut idx = outcomes.len() - 1;
            for (i, &p) in theta.values.iter().enumerate() {
                acc += approx_f64(p);
                if u < acc {
                    idx = i;
                    break;
                }
            }
            Record::outcome(outcomes[idx].clone())
        }
    }
}

fn draw_bernoulli<T: Real, R: Rng + ?Sized>(theta: T, rng: &mut R) -> T {
    let u: f64 = rng.random();
    if u < approx_f64(theta) {
        T::one()
    } else {
        T::zero()
    }
}

/// (successes, trials) for the constant Bernoulli family.
pub(crate) fn binomial_counts<T: Real>(
    family: &FamilySpec,
    data: &Dataset<T>,
) -> Result<(u64, u64)> {
    match data {
        Dataset::BinomialSummary { trials, successes } => {
            if *trials == 0 {
                return Err(Error::EmptyData);
            }
            if successes > trials {
                return Err(Error::Domain(format!(
                    "successes {successes} exceed trials {trials}"
                )));
            }
            Ok((*successes, *trials))
        }
        Dataset::Records(records) => {
            if records.is_empty() {
                return Err(Error::EmptyData);
            }
            let mut successes = 0;
            for record in records {
                require_unlabeled(family, record)?;
                if record.y == T::one() {
                    successes += 1;
                } else if record.y != T::zero() {
                    return Err(Error::Domain(format!(
                        "Bernoulli outcome must be 0 or 1, got {}",
                        record.y
                    )));
                }
            }
            Ok((successes, records.len() as u64))
        }
        Dataset::NormalSummary { .. } => Err(Error::DatasetMismatch(
            "normal summary does not fit the bernoulli family".into(),
        )),
    }
}

/// (n, mean, sd) with the population convention sd^2 = (1/n) sum (y - mean)^2.
pub(crate) fn normal_summary_of<T: Real>(data: &Dataset<T>) -> Result<(u64, T, T)> {
    match data {
        Dataset::NormalSummary { n, mean, sd } => {
            if *n == 0 {
                return Err(Error::EmptyData);
            }
            if !mean.is_finite() || !sd.is_finite() || *sd < T::zero() {
                return Err(Error::Domain(format!(
                    "normal summary needs finite mean and sd >= 0, got ({mean}, {sd})"
                )));
            }
            Ok((*n, *mean, *sd))
        }
        Dataset::Records(records) => {
            if records.is_empty() {
                return Err(Error::EmptyData);
            }
            if let Some(record) = records.iter().find(|r| r.label.is_some()) {
                return Err(Error::UnknownLabel(format!(
                    "{:?} (the normal family declares no labels)",
                    record.label.as_deref().unwrap_or_default()
                )));
            }
            let n = real::<T>(records.len() as f64);
            let mut mean = T::zero();
            for record in records {
                mean = mean + record.y;
            }
            mean = mean / n;
            let mut ss = T::zero();
            for record in records {
                let dev = record.y - mean;
                ss = ss + dev * dev;
            }
            Ok((records.len() as u64, mean, (ss / n).sqrt()))
        }
        Dataset::BinomialSummary { .. } => Err(Error::DatasetMismatch(
            "binomial summary does not fit the normal family".into(),
        )),
    }
}

/// Per-cell (successes, trials) in declaration order.
pub(crate) fn cell_counts<T: Real>(
    family: &FamilySpec,
    data: &Dataset<T>,
) -> Result<Vec<(u64, u64)>> {
    let FamilySpec::ProductBernoulliCells { cells } = family else {
        return Err(Error::UnsupportedFamily(format!(
            "cell counts need the cell family, got {}",
            family.kind_name()
        )));
    };
    let Dataset::Records(records) = data else {
        return Err(Error::DatasetMismatch(
            "the cell family needs labeled records".into(),
        ));
    };
    if records.is_empty() {
        return Err(Error::EmptyData);
    }
    let mut counts = vec![(0u64, 0u64); cells.len()];
    for record in records {
        let idx = family.label_index(require_label(record)?)?;
        counts[idx].1 += 1;
        if record.y == T::one() {
            counts[idx].0 += 1;
        } else if record.y != T::zero() {
            return Err(Error::Domain(format!(
                "Bernoulli outcome must be 0 or 1, got {}",
                record.y
            )));
        }
    }
    Ok(counts)
}

/// Per-outcome counts in declaration order.
pub(crate) fn outcome_counts<T: Real>(
    family: &FamilySpec,
    data: &Dataset<T>,
) -> Result<Vec<u64>> {
    let FamilySpec::FiniteDiscrete { outcomes } = family else {
        return Err(Error::UnsupportedFamily(format!(
            "outcome counts need the discrete family, got {}",
            family.kind_name()
        )));
    };
    let Dataset::Records(records) = data else {
        return Err(Error::DatasetMismatch(
            "the discrete family needs labeled records".into(),
        ));
    };
    if records.is_empty() {
        return Err(Error::EmptyData);
    }
    let mut counts = vec![0u64; outcomes.len()];
    for record in records {
        counts[family.label_index(require_label(record)?)?] += 1;
    }
    Ok(counts)
}

/// Builds a finite-outcome forecast map for ledger rounds: label -> mass.
/// Only meaningful for families with finite outcome spaces.
pub fn outcome_distribution<T: Real>(
    family: &FamilySpec,
    theta: &ParamPoint<T>,
) -> Result<BTreeMap<String, T>> {
    family.validate_theta(theta)?;
    match family {
        FamilySpec::FiniteDiscrete { outcomes } => Ok(outcomes
            .iter()
            .cloned()
            .zip(theta.values.iter().copied())
            .collect()),
        _ => Err(Error::UnsupportedFamily(format!(
            "no finite outcome labels for the {} family",
            family.kind_name()
        ))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn survey_family() -> FamilySpec {
        FamilySpec::product_bernoulli(["bf", "bm", "wf", "wm"]).unwrap()
    }

    fn survey_data() -> Dataset<f64> {
        // positive responses / asked, per cell
        Dataset::bernoulli_cells(&[("bf", 8, 10), ("bm", 12, 20), ("wf", 20, 50), ("wm", 20, 120)])
            .unwrap()
    }

    #[test]
    fn log_density_standard_normal_at_mode() {
        let family = FamilySpec::NormalMeanVar;
        let theta = ParamPoint::new(vec![0.0, 1.0]);
        let d = log_density(&family, &theta, &Record::numeric(0.0)).unwrap();
        // -0.5 ln(2 pi) = -0.91893853...
        assert_relative_eq!(d, -0.918_938_533_204_672_7, max_relative = 1e-14);
    }

    #[test]
    fn log_density_bernoulli_and_cells() {
        let family = FamilySpec::BernoulliConstant;
        let theta = ParamPoint::new(vec![0.7]);
        let d = log_density(&family, &theta, &Record::numeric(1.0)).unwrap();
        assert_relative_eq!(d, 0.7f64.ln(), max_relative = 1e-15);

        let cells = survey_family();
        let theta = ParamPoint::new(vec![0.8, 0.6, 0.4, 1.0 / 6.0]);
        let d = log_density(&cells, &theta, &Record::labeled("bf", 1.0)).unwrap();
        assert_relative_eq!(d, 0.8f64.ln(), max_relative = 1e-15);
    }

    #[test]
    fn log_density_zero_mass_is_neg_infinity() {
        let family = FamilySpec::BernoulliConstant;
        let theta = ParamPoint::<f64>::new(vec![0.0]);
        let d = log_density(&family, &theta, &Record::numeric(1.0)).unwrap();
        assert!(d.is_infinite() && d < 0.0);
    }

    #[test]
    fn log_density_rejects_bad_inputs() {
        let family = FamilySpec::BernoulliConstant;
        let theta = ParamPoint::new(vec![1.3]);
        assert!(matches!(
            log_density(&family, &theta, &Record::numeric(1.0)),
            Err(Error::Domain(_))
        ));
        let theta = ParamPoint::new(vec![0.5]);
        assert!(matches!(
            log_density(&family, &theta, &Record::labeled("bf", 1.0)),
            Err(Error::UnknownLabel(_))
        ));
        assert!(matches!(
            log_density(&survey_family(), &theta, &Record::labeled("zz", 1.0)),
            Err(Error::Domain(_) | Error::UnknownLabel(_))
        ));
    }

    #[test]
    fn mle_binomial_and_normal_summaries() {
        let fit = mle::<f64>(
            &FamilySpec::BernoulliConstant,
            &Dataset::binomial_summary(100, 70).unwrap(),
        )
        .unwrap();
        assert_eq!(fit.theta.values, vec![0.7]);
        assert!(!fit.is_degenerate());

        let fit = mle::<f64>(
            &FamilySpec::NormalMeanVar,
            &Dataset::normal_summary(505, 33.31, 7.642).unwrap(),
        )
        .unwrap();
        assert_eq!(fit.theta.values[0], 33.31);
        assert_relative_eq!(fit.theta.values[1], 7.642 * 7.642, max_relative = 1e-15);
    }

    #[test]
    fn mle_survey_counts() {
        let fit = mle(&survey_family(), &survey_data()).unwrap();
        let expected = [0.8, 0.6, 0.4, 1.0 / 6.0];
        for (got, want) in fit.theta.values.iter().zip(expected) {
            assert_relative_eq!(*got, want, max_relative = 1e-15);
        }
    }

    #[test]
    fn mle_flags_boundary_cells() {
        let family = FamilySpec::product_bernoulli(["a", "b"]).unwrap();
        let data = Dataset::bernoulli_cells(&[("a", 3, 3), ("b", 1, 2)]).unwrap();
        let fit = mle::<f64>(&family, &data).unwrap();
        assert_eq!(fit.theta.values, vec![1.0, 0.5]);
        assert_eq!(fit.boundary, vec![0]);
    }

    #[test]
    fn mle_errors() {
        assert!(matches!(
            mle::<f64>(&FamilySpec::BernoulliConstant, &Dataset::Records(vec![])),
            Err(Error::EmptyData)
        ));
        let family = FamilySpec::product_bernoulli(["a", "b"]).unwrap();
        let data = Dataset::bernoulli_cells(&[("a", 1, 2)]).unwrap();
        assert!(matches!(mle::<f64>(&family, &data), Err(Error::EmptyCell(_))));
        let flat = Dataset::Records(vec![Record::numeric(3.0); 4]);
        assert!(matches!(
            mle::<f64>(&FamilySpec::NormalMeanVar, &flat),
            Err(Error::DegenerateData(_))
        ));
    }

    #[test]
    fn log_lr_is_zero_and_one_at_the_mle() {
        let (l, big_l) = log_lr(
            &FamilySpec::NormalMeanVar,
            &ParamPoint::new(vec![33.31, 7.642 * 7.642]),
            &Dataset::normal_summary(505, 33.31, 7.642).unwrap(),
        )
        .unwrap();
        assert_eq!(l, 0.0);
        assert_eq!(big_l, 1.0);
    }

    #[test]
    fn log_lr_binomial_half() {
        // l(0.5) = 70 ln(5/7) + 30 ln(5/3) = -8.228287850...
        let (l, big_l) = log_lr(
            &FamilySpec::BernoulliConstant,
            &ParamPoint::new(vec![0.5]),
            &Dataset::binomial_summary(100, 70).unwrap(),
        )
        .unwrap();
        assert_relative_eq!(l, -8.228_287_850_505_598, max_relative = 1e-12);
        assert_relative_eq!(big_l, 2.669_930_711_889_18e-4, max_relative = 1e-11);
    }

    #[test]
    fn log_lr_summary_and_record_routes_agree() {
        let summary: Dataset<f64> = Dataset::binomial_summary(10, 7).unwrap();
        let records = Dataset::Records(
            (0..10)
                .map(|i| Record::numeric(if i < 7 { 1.0 } else { 0.0 }))
                .collect(),
        );
        let theta = ParamPoint::new(vec![0.42]);
        let (l_summary, _) = log_lr(&FamilySpec::BernoulliConstant, &theta, &summary).unwrap();
        let (l_records, _) = log_lr(&FamilySpec::BernoulliConstant, &theta, &records).unwrap();
        assert_relative_eq!(l_summary, l_records, max_relative = 1e-12);
    }

    #[test]
    fn log_lr_survives_boundary_mle() {
        // All successes: mle 1.0 sits on the boundary, ratios stay defined.
        let data: Dataset<f64> = Dataset::binomial_summary(5, 5).unwrap();
        let (l, big_l) = log_lr(
            &FamilySpec::BernoulliConstant,
            &ParamPoint::new(vec![0.5]),
            &data,
        )
        .unwrap();
        assert_relative_eq!(l, 5.0 * 0.5f64.ln(), max_relative = 1e-14);
        assert_relative_eq!(big_l, 0.5f64.powi(5), max_relative = 1e-13);
    }

    #[test]
    fn finite_outcome_masses_sum_to_one() {
        let family = FamilySpec::finite_discrete(["a", "b", "c"]).unwrap();
        let theta = ParamPoint::<f64>::new(vec![0.2, 0.3, 0.5]);
        let total: f64 = ["a", "b", "c"]
            .iter()
            .map(|l| {
                log_density(&family, &theta, &Record::outcome(*l))
                    .unwrap()
                    .exp()
            })
            .sum();
        assert_relative_eq!(total, 1.0, max_relative = 1e-10);
    }

    #[test]
    fn sample_is_deterministic_and_respects_boundaries() {
        let family = FamilySpec::BernoulliConstant;
        let ones = sample(&family, &ParamPoint::new(vec![1.0]), 5, 9).unwrap();
        let Dataset::Records(records) = &ones else { unreachable!() };
        assert!(records.iter().all(|r| r.y == 1.0));

        let zeros = sample(&family, &ParamPoint::new(vec![0.0]), 5, 9).unwrap();
        let Dataset::Records(records) = &zeros else { unreachable!() };
        assert!(records.iter().all(|r| r.y == 0.0));

        let theta = ParamPoint::new(vec![0.35]);
        let a = sample(&family, &theta, 64, 1234).unwrap();
        let b = sample(&family, &theta, 64, 1234).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn sample_covers_cells_and_outcomes() {
        let family = survey_family();
        let theta = ParamPoint::new(vec![0.8, 0.6, 0.4, 1.0 / 6.0]);
        let data = sample(&family, &theta, 400, 7).unwrap();
        let counts = cell_counts(&family, &data).unwrap();
        assert!(counts.iter().all(|&(_, trials)| trials > 0));

        let family = FamilySpec::finite_discrete(["x", "y"]).unwrap();
        let theta = ParamPoint::new(vec![0.25, 0.75]);
        let data = sample(&family, &theta, 200, 7).unwrap();
        let counts = outcome_counts(&family, &data).unwrap();
        assert_eq!(counts.iter().sum::<u64>(), 200);
        assert!(counts.iter().all(|&c| c > 0));
    }

    #[test]
    fn csv_round_trip() {
        let text = "label,y\nbf,1\nbf,0\nbm,1\n";
        let data: Dataset<f64> = Dataset::from_csv_reader(text.as_bytes()).unwrap();
        let Dataset::Records(records) = &data else { unreachable!() };
        assert_eq!(records.len(), 3);
        assert_eq!(records[0], Record::labeled("bf", 1.0));

        let text = "y\n0.5\n-1.25\n";
        let data: Dataset<f64> = Dataset::from_csv_reader(text.as_bytes()).unwrap();
        let Dataset::Records(records) = &data else { unreachable!() };
        assert_eq!(records[1], Record::numeric(-1.25));

        let bad = "x,y\n1,2\n";
        assert!(matches!(
            Dataset::<f64>::from_csv_reader(bad.as_bytes()),
            Err(Error::DatasetMismatch(_))
        ));
    }

    #[test]
    fn family_constructors_validate() {
        assert!(FamilySpec::product_bernoulli(Vec::<String>::new()).is_err());
        assert!(FamilySpec::product_bernoulli(["a", "a"]).is_err());
        assert!(FamilySpec::finite_discrete(["only"]).is_err());
        assert!(FamilySpec::finite_discrete(["a", "b"]).is_ok());
    }

    #[test]
    fn theta_validation() {
        let family = FamilySpec::finite_discrete(["a", "b", "c"]).unwrap();
        assert!(family
            .validate_theta(&ParamPoint::new(vec![0.2, 0.3, 0.5]))
            .is_ok());
        assert!(family
            .validate_theta(&ParamPoint::new(vec![0.2, 0.3, 0.4]))
            .is_err());
        assert!(FamilySpec::NormalMeanVar
            .validate_theta(&ParamPoint::new(vec![0.0, 0.0]))
            .is_err());
        assert!(FamilySpec::BernoulliConstant
            .validate_theta(&ParamPoint::new(vec![1.0]))
            .is_ok());
    }
}
