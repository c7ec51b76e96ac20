//! Description ranges: the set of forecasters a dataset rates as adequate.
//!
//! A forecaster theta retains the fraction L(theta) of its capital when the
//! family's best fit bets against it. Grading L against Fisher-style cutoffs
//! and collecting {theta : L(theta) >= 1/C} gives a descriptive range: which
//! forecasters performed acceptably on the data in hand, with no sampling
//! story attached.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::families::{self, Dataset, FamilySpec};
use crate::scalar::{approx_f64, real, xlny, Real};

/// Grade cutoffs on L, strictly decreasing in (0, 1). Defaults follow the
/// classical 1/2, 1/5, 1/15 convention.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Cutoffs<T> {
    pub good: T,
    pub fair: T,
    pub acceptable: T,
}

impl<T: Real> Default for Cutoffs<T> {
    fn default() -> Self {
        Cutoffs {
            good: real(0.5),
            fair: real(0.2),
            acceptable: real(1.0 / 15.0),
        }
    }
}

impl<T: Real> Cutoffs<T> {
    pub fn new(good: T, fair: T, acceptable: T) -> Result<Self> {
        let cutoffs = Cutoffs {
            good,
            fair,
            acceptable,
        };
        cutoffs.validate()?;
        Ok(cutoffs)
    }

    pub fn validate(&self) -> Result<()> {
        let ordered = T::zero() < self.acceptable
            && self.acceptable < self.fair
            && self.fair < self.good
            && self.good < T::one();
        if ordered {
            Ok(())
        } else {
            Err(Error::Domain(format!(
                "cutoffs must satisfy 0 < acceptable < fair < good < 1, got \
                 ({}, {}, {})",
                self.good, self.fair, self.acceptable
            )))
        }
    }

    /// The three passing grades paired with the L-cutoff defining each,
    /// best first.
    pub fn graded(&self) -> [(Grade, T); 3] {
        [
            (Grade::Good, self.good),
            (Grade::Fair, self.fair),
            (Grade::Poor, self.acceptable),
        ]
    }
}

/// Ordered best to worst, so `Grade::Good < Grade::Fair`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Grade {
    Good,
    Fair,
    Poor,
    Unacceptable,
}

impl Grade {
    pub fn label(self) -> &'static str {
        match self {
            Grade::Good => "good",
            Grade::Fair => "fair",
            Grade::Poor => "poor",
            Grade::Unacceptable => "unacceptable",
        }
    }
}

impl fmt::Display for Grade {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// Grades a likelihood ratio; each cutoff is inclusive from above.
pub fn grade<T: Real>(l_ratio: T, cutoffs: &Cutoffs<T>) -> Result<Grade> {
    cutoffs.validate()?;
    let slack = real::<T>(1e-12).max(T::epsilon() * real(16.0));
    if l_ratio.is_nan() || l_ratio < -slack || l_ratio > T::one() + slack {
        return Err(Error::Domain(format!("L must lie in [0, 1], got {l_ratio}")));
    }
    Ok(if l_ratio >= cutoffs.good {
        Grade::Good
    } else if l_ratio >= cutoffs.fair {
        Grade::Fair
    } else if l_ratio >= cutoffs.acceptable {
        Grade::Poor
    } else {
        Grade::Unacceptable
    })
}

/// The quantity a description range bounds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "h", rename_all = "snake_case")]
pub enum FunctionalSpec {
    /// One parameter component.
    Component { i: usize },
    /// theta[i] - theta[j].
    Difference { i: usize, j: usize },
    /// odds(theta[i]) / odds(theta[j]).
    OddsRatio { i: usize, j: usize },
}

impl FunctionalSpec {
    pub fn validate(&self, family: &FamilySpec) -> Result<()> {
        let len = family.param_len();
        let check = |idx: usize| {
            if idx < len {
                Ok(())
            } else {
                Err(Error::Domain(format!(
                    "component index {idx} out of range for {len} parameter(s)"
                )))
            }
        };
        match *self {
            FunctionalSpec::Component { i } => check(i),
            FunctionalSpec::Difference { i, j } | FunctionalSpec::OddsRatio { i, j } => {
                check(i)?;
                check(j)?;
                if i == j {
                    return Err(Error::Domain("functional indices must differ".into()));
                }
                Ok(())
            }
        }
    }

    pub fn evaluate<T: Real>(&self, values: &[T]) -> T {
        match *self {
            FunctionalSpec::Component { i } => values[i],
            FunctionalSpec::Difference { i, j } => values[i] - values[j],
            FunctionalSpec::OddsRatio { i, j } => odds(values[i]) / odds(values[j]),
        }
    }
}

impl fmt::Display for FunctionalSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            FunctionalSpec::Component { i } => write!(f, "theta[{i}]"),
            FunctionalSpec::Difference { i, j } => write!(f, "theta[{i}] - theta[{j}]"),
            FunctionalSpec::OddsRatio { i, j } => write!(f, "odds(theta[{i}]) / odds(theta[{j}])"),
        }
    }
}

fn odds<T: Real>(p: T) -> T {
    p / (T::one() - p)
}

/// How a range's endpoints were obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RangeMethod {
    ClosedForm,
    Bisection,
    Grid,
}

/// Which closed form the normal-mean range uses.
///
/// The published table's half-width is s sqrt((2C)^{1/N} - 1); solving the
/// profile inequality l(mu) >= ln(1/C) directly yields s sqrt(C^{2/N} - 1).
/// The two coincide at C = 2 and drift apart as C grows. Both are kept on
/// purpose: `Published` reproduces the table, `Derived` follows the
/// derivation, and guessing which was intended is not this crate's call.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FormulaMode {
    Published,
    Derived,
}

impl fmt::Display for FormulaMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FormulaMode::Published => "published",
            FormulaMode::Derived => "derived",
        })
    }
}

/// The range of a target functional over {theta : L(theta) >= 1/C}.
///
/// A boundary flag means the good set ran into the edge of the parameter
/// space on that side, so the reported endpoint is the domain edge rather
/// than a solved crossing.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DescriptionRange<T> {
    pub cutoff: T,
    pub target: FunctionalSpec,
    pub lo: T,
    pub hi: T,
    pub method: RangeMethod,
    pub formula_mode: Option<FormulaMode>,
    pub lo_at_boundary: bool,
    pub hi_at_boundary: bool,
}

fn require_cutoff<T: Real>(c: T) -> Result<T> {
    if c.is_finite() && c > T::one() {
        Ok(-c.ln())
    } else {
        Err(Error::Domain(format!("cutoff C must exceed 1, got {c}")))
    }
}

/// Description range of the single parameter of a one-parameter family:
/// endpoints solve l(theta) = -ln C by bisection outward from the MLE.
pub fn range_1d<T: Real>(family: &FamilySpec, data: &Dataset<T>, c: T) -> Result<DescriptionRange<T>> {
    let target = require_cutoff(c)?;
    match family {
        FamilySpec::BernoulliConstant => {
            let (successes, trials) = families::binomial_counts(family, data)?;
            let (l, mode) = binomial_log_lr_parts::<T>(successes, trials);
            let ends = unimodal_range_1d(&l, mode, T::zero(), T::one(), target)?;
            Ok(DescriptionRange {
                cutoff: c,
                target: FunctionalSpec::Component { i: 0 },
                lo: ends.lo,
                hi: ends.hi,
                method: RangeMethod::Bisection,
                formula_mode: None,
                lo_at_boundary: ends.lo_at_boundary,
                hi_at_boundary: ends.hi_at_boundary,
            })
        }
        other => Err(Error::UnsupportedFamily(format!(
            "range_1d needs a one-parameter family, got {}",
            other.kind_name()
        ))),
    }
}

/// Log likelihood ratio of the normal family profiled over the variance at
/// fixed mean: N (ln s - ln(s^2 + (mean - mu)^2) / 2), the maximum of the
/// full two-parameter l over sigma^2.
pub fn profile_normal_mean<T: Real>(data: &Dataset<T>, mu: T) -> Result<T> {
    let (n, mean, sd) = families::normal_summary_of(data)?;
    if sd <= T::zero() {
        return Err(Error::DegenerateData(
            "zero empirical variance: the profile is degenerate".into(),
        ));
    }
    Ok(profile_l(n, mean, sd, mu))
}

fn profile_l<T: Real>(n: u64, mean: T, sd: T, mu: T) -> T {
    let half_n = real::<T>(n as f64) / real(2.0);
    let ssq = sd * sd;
    let dev = mean - mu;
    // Written as a single ratio so the value is exactly 0 at mu = mean.
    -half_n * ((ssq + dev * dev) / ssq).ln()
}

/// Closed-form description range for the normal mean, profiled over the
/// variance. See [`FormulaMode`] for the two half-width formulas.
pub fn normal_mean_range<T: Real>(
    data: &Dataset<T>,
    c: T,
    mode: FormulaMode,
) -> Result<DescriptionRange<T>> {
    require_cutoff(c)?;
    let (n, mean, sd) = families::normal_summary_of(data)?;
    if sd <= T::zero() {
        return Err(Error::DegenerateData(
            "zero empirical variance: the range is degenerate".into(),
        ));
    }
    let n_t = real::<T>(n as f64);
    let grown = match mode {
        FormulaMode::Published => (real::<T>(2.0) * c).powf(n_t.recip()),
        FormulaMode::Derived => c.powf(real::<T>(2.0) / n_t),
    };
    let half_width = sd * (grown - T::one()).sqrt();
    Ok(DescriptionRange {
        cutoff: c,
        target: FunctionalSpec::Component { i: 0 },
        lo: mean - half_width,
        hi: mean + half_width,
        method: RangeMethod::ClosedForm,
        formula_mode: Some(mode),
        lo_at_boundary: false,
        hi_at_boundary: false,
    })
}

/// Range of a functional h over the good set of a multi-parameter family
/// with finite outcomes.
///
/// Cells that h does not touch are profiled out at their MLE (any other
/// value could only shrink L). What remains is one profiled coordinate
/// (solved by bisection) or two (searched on a 1e-3 grid per component with
/// the MLE injected as a grid point, then bisection-refined along the
/// h-direction at the feasibility boundary).
pub fn functional_range<T: Real>(
    family: &FamilySpec,
    data: &Dataset<T>,
    h: FunctionalSpec,
    c: T,
) -> Result<DescriptionRange<T>> {
    let target = require_cutoff(c)?;
    h.validate(family)?;
    let fit = families::mle(family, data)?;
    match family {
        FamilySpec::ProductBernoulliCells { .. } => {
            let counts = families::cell_counts(family, data)?;
            match h {
                FunctionalSpec::Component { i } => {
                    let (successes, trials) = counts[i];
                    let (l, mode) = binomial_log_lr_parts::<T>(successes, trials);
                    let ends = unimodal_range_1d(&l, mode, T::zero(), T::one(), target)?;
                    Ok(range_from_ends(c, h, ends, RangeMethod::Bisection))
                }
                FunctionalSpec::Difference { i, j } | FunctionalSpec::OddsRatio { i, j } => {
                    let (l_i, _) = binomial_log_lr_parts::<T>(counts[i].0, counts[i].1);
                    let (l_j, _) = binomial_log_lr_parts::<T>(counts[j].0, counts[j].1);
                    let problem = GridProblem {
                        part_a: &l_i,
                        part_b: &l_j,
                        joint: None,
                        h: &h,
                        mle: (fit.theta.values[i], fit.theta.values[j]),
                        target,
                        simplex: false,
                    };
                    let ends = grid_range_2d(&problem)?;
                    Ok(range_from_ends(c, h, ends, RangeMethod::Grid))
                }
            }
        }
        FamilySpec::FiniteDiscrete { .. } => {
            let counts = families::outcome_counts(family, data)?;
            let n: u64 = counts.iter().sum();
            match h {
                FunctionalSpec::Component { i } => {
                    // Profiling the other outcomes scales them down evenly,
                    // leaving exactly the binomial shape in component i.
                    let (l, mode) = binomial_log_lr_parts::<T>(counts[i], n);
                    let ends = unimodal_range_1d(&l, mode, T::zero(), T::one(), target)?;
                    Ok(range_from_ends(c, h, ends, RangeMethod::Bisection))
                }
                FunctionalSpec::Difference { i, j } | FunctionalSpec::OddsRatio { i, j } => {
                    let (k_i, k_j) = (counts[i], counts[j]);
                    let k_rest = n - k_i - k_j;
                    let n_t = real::<T>(n as f64);
                    let (that_i, that_j) = (
                        real::<T>(k_i as f64) / n_t,
                        real::<T>(k_j as f64) / n_t,
                    );
                    let that_rest = real::<T>(k_rest as f64) / n_t;
                    let ki_t = real::<T>(k_i as f64);
                    let kj_t = real::<T>(k_j as f64);
                    let kr_t = real::<T>(k_rest as f64);
                    let l_i = move |a: T| xlny(ki_t, a) - xlny(ki_t, that_i);
                    let l_j = move |b: T| xlny(kj_t, b) - xlny(kj_t, that_j);
                    // Mass off (i, j) is profiled proportionally to the
                    // remaining counts, contributing through its total only.
                    let joint = move |a: T, b: T| {
                        let rest = (T::one() - a - b).max(T::zero());
                        xlny(kr_t, rest) - xlny(kr_t, that_rest)
                    };
                    let problem = GridProblem {
                        part_a: &l_i,
                        part_b: &l_j,
                        joint: Some(&joint),
                        h: &h,
                        mle: (fit.theta.values[i], fit.theta.values[j]),
                        target,
                        simplex: true,
                    };
                    let ends = grid_range_2d(&problem)?;
                    Ok(range_from_ends(c, h, ends, RangeMethod::Grid))
                }
            }
        }
        other => Err(Error::UnsupportedFamily(format!(
            "functional ranges need a finite-outcome multi-parameter family, got {}",
            other.kind_name()
        ))),
    }
}

fn range_from_ends<T: Real>(
    c: T,
    target: FunctionalSpec,
    ends: Endpoints<T>,
    method: RangeMethod,
) -> DescriptionRange<T> {
    DescriptionRange {
        cutoff: c,
        target,
        lo: ends.lo,
        hi: ends.hi,
        method,
        formula_mode: None,
        lo_at_boundary: ends.lo_at_boundary,
        hi_at_boundary: ends.hi_at_boundary,
    }
}

/// Centered binomial log likelihood ratio closure and its mode k/n.
fn binomial_log_lr_parts<T: Real>(successes: u64, trials: u64) -> (impl Fn(T) -> T, T) {
    let k = real::<T>(successes as f64);
    let n = real::<T>(trials as f64);
    let mode = k / n;
    let at_mode = xlny(k, mode) + xlny(n - k, T::one() - mode);
    (
        move |t: T| xlny(k, t) + xlny(n - k, T::one() - t) - at_mode,
        mode,
    )
}

#[derive(Debug)]
struct Endpoints<T> {
    lo: T,
    hi: T,
    lo_at_boundary: bool,
    hi_at_boundary: bool,
}

/// Solves l = target on each side of the mode of a unimodal l over
/// [lo_bound, hi_bound], after a monotonicity scan of each flank.
fn unimodal_range_1d<T: Real>(
    l: &impl Fn(T) -> T,
    mode: T,
    lo_bound: T,
    hi_bound: T,
    target: T,
) -> Result<Endpoints<T>> {
    if l(mode) < target {
        return Err(Error::Domain(
            "the mode itself fails the cutoff; no range exists".into(),
        ));
    }
    let (hi, hi_at_boundary) = solve_flank(l, mode, hi_bound, target)?;
    let (lo, lo_at_boundary) = solve_flank(l, mode, lo_bound, target)?;
    Ok(Endpoints {
        lo,
        hi,
        lo_at_boundary,
        hi_at_boundary,
    })
}

fn solve_flank<T: Real>(
    l: &impl Fn(T) -> T,
    mode: T,
    bound: T,
    target: T,
) -> Result<(T, bool)> {
    const SCAN_POINTS: usize = 128;
    let mut prev = l(mode);
    for i in 1..=SCAN_POINTS {
        let x = mode + (bound - mode) * real(i as f64 / SCAN_POINTS as f64);
        let value = l(x);
        let slack = real::<T>(1e-9) * (T::one() + prev.abs());
        if value > prev + slack {
            return Err(Error::NonUnimodal(approx_f64(x)));
        }
        prev = value;
    }
    if l(bound) >= target {
        return Ok((bound, true));
    }
    // Invariant: l(inside) >= target > l(outside).
    let mut inside = mode;
    let mut outside = bound;
    let scale = mode.abs().max(bound.abs()).max(T::one());
    let tol = real::<T>(1e-9).max(T::epsilon() * real(8.0) * scale);
    for _ in 0..200 {
        if (outside - inside).abs() <= tol {
            break;
        }
        let mid = (inside + outside) / real(2.0);
        if l(mid) >= target {
            inside = mid;
        } else {
            outside = mid;
        }
    }
    Ok(((inside + outside) / real(2.0), false))
}

/// Grid resolution per theta-component.
const GRID_STEPS: u64 = 1000;

struct GridProblem<'a, T, La, Lb>
where
    T: Real,
    La: Fn(T) -> T,
    Lb: Fn(T) -> T,
{
    part_a: &'a La,
    part_b: &'a Lb,
    /// Extra non-separable term (the profiled remainder of a simplex).
    joint: Option<&'a dyn Fn(T, T) -> T>,
    h: &'a FunctionalSpec,
    mle: (T, T),
    target: T,
    /// Restrict the domain to a + b <= 1.
    simplex: bool,
}

impl<T, La, Lb> GridProblem<'_, T, La, Lb>
where
    T: Real,
    La: Fn(T) -> T,
    Lb: Fn(T) -> T,
{
    fn log_lr(&self, a: T, b: T) -> T {
        let mut l = (self.part_a)(a) + (self.part_b)(b);
        if let Some(joint) = self.joint {
            l = l + joint(a, b);
        }
        l
    }

    fn in_domain(&self, a: T, b: T) -> bool {
        let unit = |x: T| x >= T::zero() && x <= T::one();
        unit(a)
            && unit(b)
            && (!self.simplex || a + b <= T::one() + real(1e-12))
    }

    fn h_at(&self, a: T, b: T) -> T {
        match self.h {
            FunctionalSpec::Difference { .. } => a - b,
            FunctionalSpec::OddsRatio { .. } => odds(a) / odds(b),
            FunctionalSpec::Component { .. } => unreachable!("grid is for two-index functionals"),
        }
    }
}

/// Exhaustive 1e-3 grid over the two free components, then local bisection
/// refinement of each extremum along the h-direction.
fn grid_range_2d<T, La, Lb>(problem: &GridProblem<'_, T, La, Lb>) -> Result<Endpoints<T>>
where
    T: Real,
    La: Fn(T) -> T,
    Lb: Fn(T) -> T,
{
    let axis = grid_axis::<T>(&[problem.mle.0, problem.mle.1]);
    let parts_a: Vec<T> = axis.iter().map(|&a| (problem.part_a)(a)).collect();
    let parts_b: Vec<T> = axis.iter().map(|&b| (problem.part_b)(b)).collect();

    let mut max_h = T::neg_infinity();
    let mut min_h = T::infinity();
    let mut arg_max = problem.mle;
    let mut arg_min = problem.mle;
    let mut hi_unbounded = false;
    let mut lo_unbounded = false;

    for (p, &a) in axis.iter().enumerate() {
        for (q, &b) in axis.iter().enumerate() {
            if problem.simplex && a + b > T::one() + real(1e-12) {
                break; // axis ascends, so the rest of the row is out too
            }
            let mut l = parts_a[p] + parts_b[q];
            if let Some(joint) = problem.joint {
                l = l + joint(a, b);
            }
            if l < problem.target {
                continue;
            }
            let h = problem.h_at(a, b);
            if h.is_nan() {
                continue;
            }
            if h.is_infinite() {
                if h > T::zero() {
                    hi_unbounded = true;
                } else {
                    lo_unbounded = true;
                }
                continue;
            }
            if h > max_h {
                max_h = h;
                arg_max = (a, b);
            }
            if h < min_h {
                min_h = h;
                arg_min = (a, b);
            }
        }
    }
    debug_assert!(max_h >= min_h, "the MLE grid point keeps the set nonempty");

    let step = T::one() / real(GRID_STEPS as f64);
    let reach = real::<T>(3.0) * step;
    let (hi, hi_clamped) = refine_extremum(problem, arg_max, (T::one(), -T::one()), reach);
    let (lo, lo_clamped) = refine_extremum(problem, arg_min, (-T::one(), T::one()), reach);

    Ok(Endpoints {
        lo: if lo_unbounded {
            T::neg_infinity()
        } else {
            lo.min(min_h)
        },
        hi: if hi_unbounded {
            T::infinity()
        } else {
            hi.max(max_h)
        },
        lo_at_boundary: lo_unbounded || lo_clamped,
        hi_at_boundary: hi_unbounded || hi_clamped,
    })
}

/// Marches from a feasible grid extremum along the direction that improves
/// h, bisecting for the feasibility edge (the log ratio is concave along any
/// ray, so the feasible stretch is an interval). Returns the refined h and
/// whether the march was stopped by the parameter-space boundary instead of
/// the cutoff.
fn refine_extremum<T, La, Lb>(
    problem: &GridProblem<'_, T, La, Lb>,
    start: (T, T),
    direction: (T, T),
    reach: T,
) -> (T, bool)
where
    T: Real,
    La: Fn(T) -> T,
    Lb: Fn(T) -> T,
{
    let norm = (direction.0 * direction.0 + direction.1 * direction.1).sqrt();
    let dir = (direction.0 / norm, direction.1 / norm);
    let at = |t: T| (start.0 + t * dir.0, start.1 + t * dir.1);

    // Largest step that stays inside the parameter space.
    let t_domain = if problem.in_domain(at(reach).0, at(reach).1) {
        reach
    } else {
        let (mut lo, mut hi) = (T::zero(), reach);
        for _ in 0..80 {
            let mid = (lo + hi) / real(2.0);
            let (a, b) = at(mid);
            if problem.in_domain(a, b) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        lo
    };

    let feasible = |t: T| {
        let (a, b) = at(t);
        problem.log_lr(a, b) >= problem.target
    };
    if feasible(t_domain) {
        // Feasible all the way to the domain edge (or the reach cap): only a
        // true domain hit counts as a boundary.
        let (a, b) = at(t_domain);
        let clamped = t_domain < reach;
        return (problem.h_at(a, b), clamped);
    }
    let (mut lo, mut hi) = (T::zero(), t_domain);
    for _ in 0..80 {
        let mid = (lo + hi) / real(2.0);
        if feasible(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let (a, b) = at(lo);
    (problem.h_at(a, b), false)
}

/// 0 to 1 inclusive at the grid resolution, with the MLE components spliced
/// in so the good set is never missed entirely.
fn grid_axis<T: Real>(extra: &[T]) -> Vec<T> {
    let mut axis: Vec<T> = (0..=GRID_STEPS)
        .map(|i| real::<T>(i as f64 / GRID_STEPS as f64))
        .collect();
    for &x in extra {
        if x >= T::zero() && x <= T::one() {
            axis.push(x);
        }
    }
    axis.sort_by(|a, b| a.partial_cmp(b).expect("axis values are finite"));
    axis.dedup();
    axis
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::families::ParamPoint;
    use approx::assert_relative_eq;

    fn survey_family() -> FamilySpec {
        FamilySpec::product_bernoulli(["bf", "bm", "wf", "wm"]).unwrap()
    }

    fn survey_data() -> Dataset<f64> {
        Dataset::bernoulli_cells(&[("bf", 8, 10), ("bm", 12, 20), ("wf", 20, 50), ("wm", 20, 120)])
            .unwrap()
    }

    #[test]
    fn grades_follow_the_cutoff_table() {
        let cutoffs = Cutoffs::default();
        assert_eq!(grade(0.5, &cutoffs).unwrap(), Grade::Good);
        assert_eq!(grade(0.3, &cutoffs).unwrap(), Grade::Fair);
        assert_eq!(grade(0.2, &cutoffs).unwrap(), Grade::Fair);
        assert_eq!(grade(1.0 / 15.0, &cutoffs).unwrap(), Grade::Poor);
        assert_eq!(grade(0.05, &cutoffs).unwrap(), Grade::Unacceptable);
        assert!(grade(1.2, &cutoffs).is_err());
        assert!(grade(-0.1, &cutoffs).is_err());
        assert!(grade(f64::NAN, &cutoffs).is_err());
    }

    #[test]
    fn cutoffs_must_be_ordered() {
        assert!(Cutoffs::new(0.5, 0.2, 1.0 / 15.0).is_ok());
        assert!(Cutoffs::new(0.2, 0.5, 0.1).is_err());
        assert!(Cutoffs::new(0.5, 0.2, 0.0).is_err());
        assert!(Cutoffs::new(1.0, 0.2, 0.1).is_err());
    }

    #[test]
    fn binomial_range_matches_the_root_solve() {
        // Roots of 70 ln(t/0.7) + 30 ln((1-t)/0.3) = -ln C.
        let family = FamilySpec::BernoulliConstant;
        let data = Dataset::binomial_summary(100, 70).unwrap();

        let range = range_1d(&family, &data, 2.0).unwrap();
        assert_relative_eq!(range.lo, 0.644_374_445_2, epsilon = 1e-6);
        assert_relative_eq!(range.hi, 0.751_944_539_3, epsilon = 1e-6);
        assert!(!range.lo_at_boundary && !range.hi_at_boundary);

        let range = range_1d(&family, &data, 15.0).unwrap();
        assert_relative_eq!(range.lo, 0.587_556_540_5, epsilon = 1e-6);
        assert_relative_eq!(range.hi, 0.798_239_507_6, epsilon = 1e-6);
    }

    #[test]
    fn range_collapses_to_the_mle_as_c_drops_to_one() {
        let family = FamilySpec::BernoulliConstant;
        let data = Dataset::binomial_summary(100, 70).unwrap();
        let range = range_1d(&family, &data, 1.0 + 1e-9).unwrap();
        assert!(range.hi - range.lo < 1e-3);
        assert!(range.lo <= 0.7 && 0.7 <= range.hi);
        assert!(range_1d(&family, &data, 1.0).is_err());
    }

    #[test]
    fn all_successes_pin_the_upper_endpoint_to_the_boundary() {
        // l(t) = 5 ln t; lower root of 5 ln t = -ln 2 is 2^(-1/5).
        let family = FamilySpec::BernoulliConstant;
        let data = Dataset::binomial_summary(5, 5).unwrap();
        let range = range_1d(&family, &data, 2.0).unwrap();
        assert_eq!(range.hi, 1.0);
        assert!(range.hi_at_boundary);
        assert_relative_eq!(range.lo, 0.870_550_563_3, epsilon = 1e-6);
        assert!(!range.lo_at_boundary);
    }

    #[test]
    fn nonunimodal_scan_trips() {
        let camel = |t: f64| -(t - 0.3).powi(2) * (t - 0.8).powi(2) * 50.0;
        let err = unimodal_range_1d(&camel, 0.3, 0.0, 1.0, -(2f64.ln())).unwrap_err();
        assert!(matches!(err, Error::NonUnimodal(_)));
    }

    #[test]
    fn profile_is_zero_at_the_mean_and_crosses_at_the_known_width() {
        let data = Dataset::normal_summary(505, 33.31, 7.642).unwrap();
        assert_eq!(profile_normal_mean(&data, 33.31).unwrap(), 0.0);
        // d solving 505 (ln s - ln(s^2 + d^2)/2) = -ln 2 is 0.40067034.
        for sign in [-1.0, 1.0] {
            let l = profile_normal_mean(&data, 33.31 + sign * 0.400_670_34).unwrap();
            assert_relative_eq!(l, -(2.0f64.ln()), epsilon = 1e-6);
        }
    }

    #[test]
    fn normal_mean_ranges_in_both_modes() {
        let data = Dataset::normal_summary(505, 33.31, 7.642).unwrap();

        let published = normal_mean_range(&data, 2.0, FormulaMode::Published).unwrap();
        assert_relative_eq!(published.lo, 32.909_33, epsilon = 1e-4);
        assert_relative_eq!(published.hi, 33.710_67, epsilon = 1e-4);

        let derived = normal_mean_range(&data, 2.0, FormulaMode::Derived).unwrap();
        assert_relative_eq!(published.lo, derived.lo, epsilon = 1e-9);
        assert_relative_eq!(published.hi, derived.hi, epsilon = 1e-9);

        // Away from C = 2 the two formulas separate.
        let published = normal_mean_range(&data, 15.0, FormulaMode::Published).unwrap();
        let derived = normal_mean_range(&data, 15.0, FormulaMode::Derived).unwrap();
        assert_relative_eq!(published.hi, 33.938_2, epsilon = 1e-3);
        assert_relative_eq!(derived.hi, 34.103_5, epsilon = 1e-3);
        assert!(derived.hi > published.hi);
    }

    #[test]
    fn derived_mode_matches_profile_bisection() {
        let data = Dataset::normal_summary(505, 33.31, 7.642).unwrap();
        for c in [2.0, 5.0, 15.0] {
            let range = normal_mean_range(&data, c, FormulaMode::Derived).unwrap();
            let l = |mu: f64| profile_normal_mean(&data, mu).unwrap();
            let ends = unimodal_range_1d(&l, 33.31, 13.31, 53.31, -c.ln()).unwrap();
            assert_relative_eq!(range.lo, ends.lo, epsilon = 1e-6);
            assert_relative_eq!(range.hi, ends.hi, epsilon = 1e-6);
        }
    }

    #[test]
    fn survey_component_range() {
        let range = functional_range(
            &survey_family(),
            &survey_data(),
            FunctionalSpec::Component { i: 0 },
            2.0,
        )
        .unwrap();
        // Roots of 8 ln(t/0.8) + 2 ln((1-t)/0.2) = -ln 2.
        assert_relative_eq!(range.lo, 0.628_308_86, epsilon = 1e-6);
        assert_relative_eq!(range.hi, 0.918_674_05, epsilon = 1e-6);
    }

    #[test]
    fn survey_difference_range() {
        let range = functional_range(
            &survey_family(),
            &survey_data(),
            FunctionalSpec::Difference { i: 0, j: 1 },
            2.0,
        )
        .unwrap();
        assert_relative_eq!(range.lo, -0.010_1, epsilon = 2e-3);
        assert_relative_eq!(range.hi, 0.384_0, epsilon = 2e-3);
        assert!(range.lo <= 0.2 && 0.2 <= range.hi); // h at the MLE
        assert!(!range.lo_at_boundary && !range.hi_at_boundary);
    }

    #[test]
    fn survey_ranges_nest_and_keep_the_mle() {
        let h = FunctionalSpec::Difference { i: 0, j: 1 };
        let narrow = functional_range(&survey_family(), &survey_data(), h, 2.0).unwrap();
        let wide = functional_range(&survey_family(), &survey_data(), h, 5.0).unwrap();
        assert!(wide.lo <= narrow.lo && narrow.hi <= wide.hi);
    }

    #[test]
    fn survey_odds_ratio_range_brackets_the_estimate() {
        let range = functional_range(
            &survey_family(),
            &survey_data(),
            FunctionalSpec::OddsRatio { i: 0, j: 1 },
            2.0,
        )
        .unwrap();
        // odds(0.8)/odds(0.6) = 4 / 1.5
        let at_mle = 4.0 / 1.5;
        assert!(range.lo < at_mle && at_mle < range.hi);
        assert!(range.lo > 0.0);
    }

    #[test]
    fn discrete_component_and_difference_ranges() {
        let family = FamilySpec::finite_discrete(["a", "b", "c"]).unwrap();
        let mut records = Vec::new();
        for (label, count) in [("a", 2), ("b", 5), ("c", 3)] {
            for _ in 0..count {
                records.push(crate::families::Record::outcome(label));
            }
        }
        let data = Dataset::Records(records);

        let range =
            functional_range(&family, &data, FunctionalSpec::Component { i: 0 }, 2.0).unwrap();
        assert!(range.lo < 0.2 && 0.2 < range.hi);

        let range =
            functional_range(&family, &data, FunctionalSpec::Difference { i: 1, j: 0 }, 2.0)
                .unwrap();
        assert!(range.lo < 0.3 && 0.3 < range.hi);
        assert!(range.lo >= -1.0 && range.hi <= 1.0);
    }

    #[test]
    fn functional_validation() {
        let family = survey_family();
        assert!(FunctionalSpec::Component { i: 4 }.validate(&family).is_err());
        assert!(FunctionalSpec::Difference { i: 1, j: 1 }
            .validate(&family)
            .is_err());
        assert!(matches!(
            functional_range(
                &FamilySpec::NormalMeanVar,
                &Dataset::normal_summary(10, 0.0, 1.0).unwrap(),
                FunctionalSpec::Component { i: 0 },
                2.0,
            ),
            Err(Error::UnsupportedFamily(_))
        ));
    }

    #[test]
    fn scale_equivariance_of_the_normal_range() {
        let base = Dataset::normal_summary(505, 33.31, 7.642).unwrap();
        let scaled = Dataset::normal_summary(505, 333.1, 76.42).unwrap();
        for mode in [FormulaMode::Published, FormulaMode::Derived] {
            let a = normal_mean_range(&base, 5.0, mode).unwrap();
            let b = normal_mean_range(&scaled, 5.0, mode).unwrap();
            assert_relative_eq!(b.lo, a.lo * 10.0, max_relative = 1e-12);
            assert_relative_eq!(b.hi, a.hi * 10.0, max_relative = 1e-12);
        }
    }

    #[test]
    fn unused_param_point_constructor_compiles() {
        // ParamPoint is part of this module's public vocabulary through
        // FunctionalSpec::evaluate.
        let p = ParamPoint::new(vec![0.8, 0.6]);
        let h = FunctionalSpec::Difference { i: 0, j: 1 };
        assert_relative_eq!(h.evaluate(&p.values), 0.2, max_relative = 1e-15);
    }
}
