//! Cross-module invariants exercised through the public API: likelihood
//! ratios never exceed 1, summary and per-record routes agree, competitions
//! are reciprocal and order-insensitive, ledgers replay to the same capital,
//! and fractional stakes floor the losses.

use approx::{assert_abs_diff_eq, assert_relative_eq};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;

use gtstat::families::{self, Dataset, FamilySpec, ParamPoint, Record};
use gtstat::kelly::{compete, Competitor};
use gtstat::ledger::{Forecast, LedgerSession, Outcome, PayoffSpec};
use gtstat::{describe, Error};

fn bernoulli() -> FamilySpec {
    FamilySpec::BernoulliConstant
}

proptest! {
    #[test]
    fn binomial_likelihood_ratio_never_exceeds_one(
        trials in 1u64..400,
        k_frac in 0.0f64..=1.0,
        theta in 0.0f64..=1.0,
    ) {
        let successes = (k_frac * trials as f64).round() as u64;
        let data = Dataset::binomial_summary(trials, successes).unwrap();
        let (l, ratio) = families::log_lr(&bernoulli(), &ParamPoint::new(vec![theta]), &data).unwrap();
        prop_assert!(l <= 1e-12, "log ratio {l} above zero");
        prop_assert!((-1e-12..=1.0 + 1e-12).contains(&ratio), "ratio {ratio} outside [0, 1]");
    }

    #[test]
    fn normal_likelihood_ratio_never_exceeds_one(
        mu in -10.0f64..10.0,
        var in 0.01f64..100.0,
    ) {
        let data = Dataset::normal_summary(50, 1.5, 2.0).unwrap();
        let (l, ratio) =
            families::log_lr(&FamilySpec::NormalMeanVar, &ParamPoint::new(vec![mu, var]), &data)
                .unwrap();
        prop_assert!(l <= 1e-9, "log ratio {l} above zero");
        prop_assert!(ratio <= 1.0 + 1e-9);
    }

    #[test]
    fn dynamic_p_value_tracks_the_running_maximum(outcomes in prop::collection::vec(any::<bool>(), 1..40)) {
        let mut session = LedgerSession::<f64>::open("p").unwrap();
        let mut reports = Vec::new();
        for happened in outcomes {
            session.bet_event(0.5, happened).unwrap();
            reports.push(session.report());
        }
        for report in &reports {
            prop_assert!(report.dynamic_p > 0.0 && report.dynamic_p <= 1.0);
            prop_assert_eq!(report.dynamic_p, 1.0f64.min(report.running_max.recip()));
        }
        // The running maximum only grows, so the p-value only shrinks.
        for pair in reports.windows(2) {
            prop_assert!(pair[1].dynamic_p <= pair[0].dynamic_p);
        }
    }
}

#[test]
fn summary_and_record_routes_agree_for_the_normal_family() {
    let family = FamilySpec::NormalMeanVar;
    let truth = ParamPoint::new(vec![2.0, 9.0]);
    let data = families::sample(&family, &truth, 200, 42).unwrap();
    let records = match &data {
        Dataset::Records(r) => r.clone(),
        _ => unreachable!("sample returns records"),
    };
    let (n, mean, sd) = summarize(&records);
    let summary = Dataset::normal_summary(n, mean, sd).unwrap();

    for theta in [
        ParamPoint::new(vec![2.0, 9.0]),
        ParamPoint::new(vec![1.0, 4.0]),
        ParamPoint::new(vec![3.5, 20.0]),
    ] {
        let (l_records, _) = families::log_lr(&family, &theta, &data).unwrap();
        let (l_summary, _) = families::log_lr(&family, &theta, &summary).unwrap();
        assert_relative_eq!(l_records, l_summary, max_relative = 1e-9, epsilon = 1e-9);
    }
}

#[test]
fn profile_equals_the_variance_maximized_ratio() {
    let data = Dataset::normal_summary(60, 4.0, 1.5).unwrap();
    let family = FamilySpec::NormalMeanVar;
    for mu in [3.0, 3.9, 4.0, 4.5, 6.0] {
        let profiled = describe::profile_normal_mean(&data, mu).unwrap();
        // The inner maximum over the variance lands at s^2 + (mean - mu)^2.
        let best_var = 1.5 * 1.5 + (4.0 - mu) * (4.0 - mu);
        let (l_at_best, _) =
            families::log_lr(&family, &ParamPoint::new(vec![mu, best_var]), &data).unwrap();
        assert_abs_diff_eq!(profiled, l_at_best, epsilon = 1e-9);
        // Nearby variances only do worse.
        for factor in [0.9, 1.1] {
            let (l_off, _) = families::log_lr(
                &family,
                &ParamPoint::new(vec![mu, best_var * factor]),
                &data,
            )
            .unwrap();
            assert!(l_off <= profiled + 1e-12);
        }
    }
}

#[test]
fn competitions_are_reciprocal() {
    let family = bernoulli();
    let mut rng = ChaCha12Rng::seed_from_u64(7);
    for probe in 0..20 {
        let a = 0.05 + 0.9 * rng.random::<f64>();
        let b = 0.05 + 0.9 * rng.random::<f64>();
        let truth = 0.05 + 0.9 * rng.random::<f64>();
        let data = families::sample(&family, &ParamPoint::new(vec![truth]), 50, probe).unwrap();
        let side_a = Competitor::full(family.clone(), ParamPoint::new(vec![a])).unwrap();
        let side_b = Competitor::full(family.clone(), ParamPoint::new(vec![b])).unwrap();
        let forward = compete(&side_a, &side_b, &data).unwrap();
        let backward = compete(&side_b, &side_a, &data).unwrap();
        assert_abs_diff_eq!(
            forward.log_capital + backward.log_capital,
            0.0,
            epsilon = 1e-9
        );
    }
}

#[test]
fn competition_is_order_insensitive() {
    let family = bernoulli();
    let data = families::sample(&family, &ParamPoint::new(vec![0.6]), 80, 11).unwrap();
    let mut records = match data {
        Dataset::Records(r) => r,
        _ => unreachable!(),
    };
    let den = Competitor::full(family.clone(), ParamPoint::new(vec![0.5])).unwrap();
    let num = Competitor::new(family.clone(), ParamPoint::new(vec![0.7]), 0.6).unwrap();
    let forward = compete(&den, &num, &Dataset::Records(records.clone())).unwrap();
    records.reverse();
    records.rotate_left(13);
    let shuffled = compete(&den, &num, &Dataset::Records(records)).unwrap();
    assert_relative_eq!(
        forward.log_capital,
        shuffled.log_capital,
        epsilon = 1e-9,
        max_relative = 1e-9
    );
}

#[test]
fn fractional_stake_floors_the_final_capital() {
    // Worst case for a bettor certain of success: every trial fails. At
    // stake f each round's factor is (1-f) + f * 0/0.5 = 1 - f, so the
    // final capital is (1-f)^30 — small, but never ruin.
    let family = bernoulli();
    let records = vec![Record::numeric(0.0); 30];
    let den = Competitor::full(family.clone(), ParamPoint::new(vec![0.5])).unwrap();
    for fraction in [0.2f64, 0.5, 0.9] {
        let num = Competitor::new(family.clone(), ParamPoint::new(vec![1.0]), fraction).unwrap();
        let outcome = compete(&den, &num, &Dataset::Records(records.clone())).unwrap();
        assert_relative_eq!(
            outcome.log_capital,
            30.0 * (1.0 - fraction).ln(),
            max_relative = 1e-9
        );
        assert!(outcome.final_capital > 0.0, "no ruin at fraction {fraction}");
    }
}

#[test]
fn ledger_sessions_and_competitions_agree() {
    let family = bernoulli();
    let data = families::sample(&family, &ParamPoint::new(vec![0.55]), 60, 23).unwrap();
    let records = match &data {
        Dataset::Records(r) => r.clone(),
        _ => unreachable!(),
    };
    let den = Competitor::full(family.clone(), ParamPoint::new(vec![0.5])).unwrap();
    let num = Competitor::new(family.clone(), ParamPoint::new(vec![0.7]), 0.8).unwrap();
    let payoff = gtstat::kelly::kelly_payoff(&den, &num).unwrap();

    let mut session = LedgerSession::<f64>::open("versus").unwrap();
    for record in &records {
        session
            .bet_payoff(
                Forecast::Model {
                    family: family.clone(),
                    theta: den.theta.clone(),
                },
                payoff.clone(),
                Outcome::Observation {
                    record: record.clone(),
                },
            )
            .unwrap();
    }
    let outcome = compete(&den, &num, &data).unwrap();
    assert_relative_eq!(
        session.current_capital(),
        outcome.final_capital,
        max_relative = 1e-9
    );
}

#[test]
fn sampling_is_deterministic_in_the_seed() {
    let family = FamilySpec::product_bernoulli(["a", "b"]).unwrap();
    let theta = ParamPoint::new(vec![0.3, 0.8]);
    let first = families::sample(&family, &theta, 100, 5).unwrap();
    let second = families::sample(&family, &theta, 100, 5).unwrap();
    assert_eq!(first, second);
    let third = families::sample(&family, &theta, 100, 6).unwrap();
    assert_ne!(first, third);
}

#[test]
fn expectation_one_is_enforced_at_the_round_level() {
    let forecast = || Forecast::Distribution {
        probabilities: [("a".to_string(), 0.5), ("b".to_string(), 0.5)].into(),
    };
    let outcome = Outcome::Label {
        label: "a".to_string(),
    };
    let table = |b_factor: f64| PayoffSpec::Table {
        factors: [("a".to_string(), 1.5), ("b".to_string(), b_factor)].into(),
    };

    let mut session = LedgerSession::<f64>::open("tol").unwrap();
    // Sum p * factor = 1 exactly.
    session
        .bet_payoff(forecast(), table(0.5), outcome.clone())
        .unwrap();
    // Off by 1e-10: inside tolerance.
    session
        .bet_payoff(forecast(), table(0.5 + 2e-10), outcome.clone())
        .unwrap();
    // Off by 1e-6: a real violation.
    let err = session
        .bet_payoff(forecast(), table(0.5 + 2e-6), outcome)
        .unwrap_err();
    assert!(matches!(err, Error::ExpectationViolation { .. }));
}

#[test]
fn aggregate_averages_final_scores_across_sessions() {
    let mut won = LedgerSession::<f64>::open("won").unwrap();
    won.bet_event(0.05, true).unwrap();
    won.close().unwrap();
    let mut lost = LedgerSession::<f64>::open("lost").unwrap();
    lost.bet_event(0.05, false).unwrap();
    lost.close().unwrap();

    // (20 + 0) / 2; averaging final scores is itself a fair bet, so the
    // combined evidence stays a betting score.
    let combined = gtstat::ledger::aggregate([&won, &lost]).unwrap();
    assert_relative_eq!(combined, 10.0, max_relative = 1e-15);

    let mut open = LedgerSession::<f64>::open("open").unwrap();
    open.bet_event(0.5, true).unwrap();
    assert!(gtstat::ledger::aggregate([&open]).is_err());
}

#[test]
fn grades_nest_with_their_cutoffs() {
    let cutoffs = gtstat::describe::Cutoffs::default();
    let family = bernoulli();
    let data = Dataset::binomial_summary(100, 70).unwrap();
    // Larger C admits weaker forecasters: the grade at the edge of each
    // range is exactly the grade its cutoff defines.
    for (c, expected) in [
        (2.0, gtstat::Grade::Good),
        (5.0, gtstat::Grade::Fair),
        (15.0, gtstat::Grade::Poor),
    ] {
        let range = describe::range_1d(&family, &data, c).unwrap();
        for theta in [range.lo + 1e-7, range.hi - 1e-7] {
            let (_, ratio) =
                families::log_lr(&family, &ParamPoint::new(vec![theta]), &data).unwrap();
            let grade = describe::grade(ratio, &cutoffs).unwrap();
            assert!(
                grade <= expected,
                "theta {theta} graded {grade:?}, expected at least {expected:?}"
            );
        }
    }
}

fn summarize(records: &[Record<f64>]) -> (u64, f64, f64) {
    let n = records.len() as f64;
    let mean = records.iter().map(|r| r.y).sum::<f64>() / n;
    let var = records.iter().map(|r| (r.y - mean).powi(2)).sum::<f64>() / n;
    (records.len() as u64, mean, var.sqrt())
}
