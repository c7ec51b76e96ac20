//! Monte Carlo check of the betting bound: run a bettor's capital process
//! against data actually drawn from the truth, and measure how often the
//! running maximum ever reaches a threshold. The bound says that frequency
//! cannot beat 1/threshold, no matter the bettor.

use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::families::{self, FamilySpec, ParamPoint};
use crate::kelly::{kelly_payoff, Competitor};
use crate::ledger::ratio_factor;
use crate::scalar::{real, Real};

/// One simulation: `paths` independent capital processes of length
/// `horizon`, data drawn from `truth`, the bettor staking its Kelly factor
/// against the truth each round.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig<T> {
    pub truth: (FamilySpec, ParamPoint<T>),
    /// Numerator of every round's payoff; the truth is the denominator.
    pub bettor: Competitor<T>,
    pub horizon: u64,
    pub threshold: T,
    pub paths: u64,
    pub seed: u64,
}

impl<T: Real> SimConfig<T> {
    pub fn validate(&self) -> Result<()> {
        let (family, truth_theta) = &self.truth;
        family.validate_theta(truth_theta)?;
        if self.horizon == 0 {
            return Err(Error::Domain("horizon must be at least 1".into()));
        }
        if self.paths == 0 {
            return Err(Error::Domain("paths must be at least 1".into()));
        }
        if !self.threshold.is_finite() || self.threshold < T::one() {
            return Err(Error::Domain(format!(
                "threshold must be a finite value >= 1, got {}",
                self.threshold
            )));
        }
        // Shares the competition's pairing and support rules: same family,
        // and no betting on outcomes the truth rules out entirely.
        let truth_side = Competitor::full(family.clone(), truth_theta.clone())?;
        kelly_payoff(&truth_side, &self.bettor)?;
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VilleReport<T> {
    /// Fraction of paths whose running maximum ever reached the threshold.
    pub frequency: T,
    /// Binomial standard error of `frequency`.
    pub standard_error: T,
    pub mean_final_capital: T,
    /// Standard error of the mean final capital (zero for a single path).
    pub final_capital_se: T,
}

/// Runs the simulation. Deterministic for a given config: each path owns
/// RNG stream `(seed, path index)` and results are folded in path order.
pub fn ville_frequency<T: Real>(config: &SimConfig<T>) -> Result<VilleReport<T>> {
    config.validate()?;
    let per_path: Result<Vec<(bool, T)>> = (0..config.paths)
        .into_par_iter()
        .map(|path| run_path(config, path))
        .collect();
    let per_path = per_path?;

    let hits = per_path.iter().filter(|(hit, _)| *hit).count();
    let paths = real::<T>(config.paths as f64);
    let frequency = real::<T>(hits as f64) / paths;
    let standard_error = (frequency * (T::one() - frequency) / paths).sqrt();

    let mut sum = Kahan::default();
    for &(_, capital) in &per_path {
        sum.add(capital);
    }
    let mean = sum.value() / paths;
    let final_capital_se = if config.paths > 1 {
        let mut squares = Kahan::default();
        for &(_, capital) in &per_path {
            let dev = capital - mean;
            squares.add(dev * dev);
        }
        (squares.value() / (paths - T::one())).sqrt() / paths.sqrt()
    } else {
        T::zero()
    };

    Ok(VilleReport {
        frequency,
        standard_error,
        mean_final_capital: mean,
        final_capital_se,
    })
}

fn run_path<T: Real>(config: &SimConfig<T>, path: u64) -> Result<(bool, T)> {
    let (family, truth) = &config.truth;
    let fraction = config.bettor.fraction;
    let full_stake = fraction == T::one();
    let log_threshold = config.threshold.ln();

    let mut rng = ChaCha12Rng::seed_from_u64(config.seed);
    rng.set_stream(path);

    // Log space throughout; s_0 = 1 counts toward the running maximum.
    let mut log_capital = T::zero();
    let mut log_max = T::zero();
    for round in 0..config.horizon {
        let record = families::draw_record(family, truth, &mut rng);
        let den = families::log_density(family, truth, &record)?;
        let num = families::log_density(family, &config.bettor.theta, &record)?;
        let log_factor = if full_stake {
            num - den
        } else {
            ratio_factor(num, den, fraction, || {
                format!("path {path}, round {}", round + 1)
            })?
            .ln()
        };
        log_capital = log_capital + log_factor;
        if log_capital > log_max {
            log_max = log_capital;
        }
        if log_capital == T::neg_infinity() {
            break; // ruin is absorbing, nothing downstream can change
        }
    }
    Ok((log_max >= log_threshold, log_capital.exp()))
}

/// Compensated accumulator, so path totals do not drift with count.
struct Kahan<T> {
    sum: T,
    carry: T,
}

impl<T: Real> Default for Kahan<T> {
    fn default() -> Self {
        Kahan {
            sum: T::zero(),
            carry: T::zero(),
        }
    }
}

impl<T: Real> Kahan<T> {
    fn add(&mut self, x: T) {
        let adjusted = x - self.carry;
        let next = self.sum + adjusted;
        self.carry = (next - self.sum) - adjusted;
        self.sum = next;
    }

    fn value(&self) -> T {
        self.sum
    }
}
