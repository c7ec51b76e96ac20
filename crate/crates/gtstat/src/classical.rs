//! Classical normal-theory quantities kept for comparison with the betting
//! machinery: additive error bounds built from inverse normal quantiles, and
//! the pooled standard error of a difference of proportions.

use serde::{Deserialize, Serialize};
use statrs::function::erf::erfc;

use crate::error::{Error, Result};
use crate::scalar::{approx_f64, real, Real};

/// Standard normal CDF.
pub fn normal_cdf<T: Real>(x: T) -> T {
    real(phi(approx_f64(x)))
}

fn phi(x: f64) -> f64 {
    0.5 * erfc(-x / std::f64::consts::SQRT_2)
}

/// Standard normal quantile.
///
/// A rational initial guess (relative error about 1e-9 on its own) is
/// polished with one Halley step against the CDF, which lands within a few
/// ulps across the central mass and keeps full float range in the tails.
pub fn inverse_normal_cdf<T: Real>(p: T) -> Result<T> {
    let p = approx_f64(p);
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::Domain(format!("quantile needs p in (0, 1), got {p}")));
    }
    let mut x = rational_guess(p);
    let residual = phi(x) - p;
    if residual != 0.0 {
        // u = (Phi(x) - p) / phi(x), assembled in logs so exp(x^2/2) cannot
        // overflow before the tiny residual damps it.
        let log_u =
            residual.abs().ln() + x * x / 2.0 + 0.5 * (2.0 * std::f64::consts::PI).ln();
        let u = residual.signum() * log_u.exp();
        x -= u / (1.0 + x * u / 2.0);
    }
    Ok(real(x))
}

/// Piecewise rational minimax approximation to the normal quantile: one
/// central rational in (p - 1/2)^2 and a shared tail rational in
/// sqrt(-2 ln p_tail), mirrored for the upper tail.
fn rational_guess(p: f64) -> f64 {
    const A: [f64; 6] = [
        -3.969_683_028_665_376e1,
        2.209_460_984_245_205e2,
        -2.759_285_104_469_687e2,
        1.383_577_518_672_690e2,
        -3.066_479_806_614_716e1,
        2.506_628_277_459_239e0,
    ];
    const B: [f64; 5] = [
        -5.447_609_879_822_406e1,
        1.615_858_368_580_409e2,
        -1.556_989_798_598_866e2,
        6.680_131_188_771_972e1,
        -1.328_068_155_288_572e1,
    ];
    const C: [f64; 6] = [
        -7.784_894_002_430_293e-3,
        -3.223_964_580_411_365e-1,
        -2.400_758_277_161_838e0,
        -2.549_732_539_343_734e0,
        4.374_664_141_464_968e0,
        2.938_163_982_698_783e0,
    ];
    const D: [f64; 4] = [
        7.784_695_709_041_462e-3,
        3.224_671_290_700_398e-1,
        2.445_134_137_142_996e0,
        3.754_408_661_907_416e0,
    ];
    const P_LOW: f64 = 0.02425;

    let horner = |coef: &[f64], x: f64| coef.iter().fold(0.0, |acc, &c| acc * x + c);
    let tail = |q: f64| horner(&C, q) / (horner(&D, q) * q + 1.0);

    if p < P_LOW {
        tail((-2.0 * p.ln()).sqrt())
    } else if p <= 1.0 - P_LOW {
        let q = p - 0.5;
        let r = q * q;
        q * horner(&A, r) / (horner(&B, r) * r + 1.0)
    } else {
        -tail((-2.0 * (1.0 - p).ln()).sqrt())
    }
}

/// A two-sided additive error bound: the estimate strays beyond `bound`
/// with probability `probability` under the normal theory.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErrorBound<T> {
    pub probability: T,
    pub bound: T,
}

impl<T: Real> ErrorBound<T> {
    /// The bound rescaled by 12, for yearly quantities quoted in months.
    pub fn months(&self) -> T {
        self.bound * real(12.0)
    }
}

/// z_{1 - p/2} * sd / sqrt(n), the classical bound on the error of a mean.
pub fn normal_error_bound<T: Real>(probability: T, sd: T, n: u64) -> Result<ErrorBound<T>> {
    if n == 0 {
        return Err(Error::EmptyData);
    }
    if !sd.is_finite() || sd <= T::zero() {
        return Err(Error::Domain(format!(
            "sd must be positive and finite, got {sd}"
        )));
    }
    if !(probability > T::zero() && probability < T::one()) {
        return Err(Error::Domain(format!(
            "tail probability must lie in (0, 1), got {probability}"
        )));
    }
    let z = inverse_normal_cdf(T::one() - probability / real(2.0))?;
    Ok(ErrorBound {
        probability,
        bound: z * sd / real::<T>(n as f64).sqrt(),
    })
}

/// Bounds at several tail probabilities over the same sample.
pub fn error_bound_table<T: Real>(
    probabilities: &[T],
    sd: T,
    n: u64,
) -> Result<Vec<ErrorBound<T>>> {
    probabilities
        .iter()
        .map(|&p| normal_error_bound(p, sd, n))
        .collect()
}

/// Pooled standard error of the difference of two proportions:
/// sqrt(pbar (1 - pbar) (1/n_a + 1/n_b)) with pbar pooled over both groups.
pub fn two_prop_pooled_se<T: Real>(
    successes_a: u64,
    trials_a: u64,
    successes_b: u64,
    trials_b: u64,
) -> Result<T> {
    if trials_a == 0 || trials_b == 0 {
        return Err(Error::EmptyData);
    }
    if successes_a > trials_a || successes_b > trials_b {
        return Err(Error::Domain("successes exceed trials".into()));
    }
    let pooled = real::<T>((successes_a + successes_b) as f64)
        / real::<T>((trials_a + trials_b) as f64);
    if pooled == T::zero() || pooled == T::one() {
        return Err(Error::DegenerateData(
            "pooled proportion is 0 or 1, so the pooled standard error vanishes".into(),
        ));
    }
    let inverse_sizes = real::<T>(trials_a as f64).recip() + real::<T>(trials_b as f64).recip();
    Ok((pooled * (T::one() - pooled) * inverse_sizes).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    #[test]
    fn quantile_hits_reference_points() {
        for (p, z) in [
            (0.75, 0.674_489_750_196_082),
            (0.975, 1.959_963_984_540_054),
            (0.9975, 2.807_033_768_343_811),
            (0.999_75, 3.480_756_404_196_475),
            (0.999_975, 4.055_626_981_214_843),
        ] {
            assert_abs_diff_eq!(inverse_normal_cdf(p).unwrap(), z, epsilon = 1e-9);
            assert_abs_diff_eq!(inverse_normal_cdf(1.0 - p).unwrap(), -z, epsilon = 1e-9);
        }
        assert_eq!(inverse_normal_cdf(0.5).unwrap(), 0.0);
    }

    #[test]
    fn quantile_inverts_the_cdf() {
        // Above x ~ 4.5 the roundtrip is limited by how finely doubles
        // resolve p near 1 (spacing 2^-53 blown up by 1/phi(x)), so the
        // upper sweep stops there; the lower tail keeps relative precision.
        let mut x = -8.0;
        while x <= 4.5 {
            let p = normal_cdf(x);
            assert_abs_diff_eq!(inverse_normal_cdf(p).unwrap(), x, epsilon = 1e-9);
            x += 0.05;
        }
    }

    #[test]
    fn quantile_survives_extreme_tails() {
        let z: f64 = inverse_normal_cdf(1e-300).unwrap();
        assert!(z.is_finite() && z < -37.0);
        assert!(inverse_normal_cdf(0.0).is_err());
        assert!(inverse_normal_cdf(1.0).is_err());
        assert!(inverse_normal_cdf(-0.5).is_err());
    }

    #[test]
    fn cdf_reference_points() {
        assert_abs_diff_eq!(normal_cdf(0.0), 0.5, epsilon = 1e-15);
        // The erfc backend is good to roughly 1e-12 absolute, no better.
        assert_abs_diff_eq!(normal_cdf(1.959_963_984_540_054), 0.975, epsilon = 1e-11);
        assert_abs_diff_eq!(normal_cdf(-1.959_963_984_540_054), 0.025, epsilon = 1e-11);
    }

    #[test]
    fn wage_error_bounds_in_months() {
        let table = error_bound_table(&[0.5, 0.05, 0.005, 0.0005, 0.00005], 7.642, 505).unwrap();
        let months: Vec<f64> = table.iter().map(ErrorBound::months).collect();
        for (got, want) in months
            .iter()
            .zip([2.7528, 7.9932, 11.4516, 14.2044, 16.5480])
        {
            assert_relative_eq!(*got, want, max_relative = 1e-3);
        }
        // Smaller tail probability, wider bound.
        assert!(months.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn pooled_standard_error() {
        let se = two_prop_pooled_se::<f64>(8, 10, 12, 20).unwrap();
        assert_relative_eq!(se, 0.182_574_185_835_055_36, max_relative = 1e-12);
        assert!(two_prop_pooled_se::<f64>(0, 10, 0, 20).is_err());
        assert!(two_prop_pooled_se::<f64>(10, 10, 20, 20).is_err());
        assert!(two_prop_pooled_se::<f64>(5, 0, 1, 2).is_err());
    }

    #[test]
    fn error_bound_rejects_bad_input() {
        assert!(normal_error_bound(0.05, 7.642, 0).is_err());
        assert!(normal_error_bound(0.05, 0.0, 10).is_err());
        assert!(normal_error_bound(0.0, 1.0, 10).is_err());
        assert!(normal_error_bound(1.0, 1.0, 10).is_err());
    }
}
