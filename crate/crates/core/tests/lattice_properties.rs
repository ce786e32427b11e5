mod common;

use markov_induce::lattice::{
    characteristic_probability, hitting_exact, hitting_mc, potential_series, return_probabilities, LatticeModel,
    SeriesConfig,
};
use markov_induce::trajectory::SimConfig;
use markov_induce::Error;
use proptest::prelude::*;

/// A centered i.i.d. walk with steps `-a` and `b`.
fn two_step(a: i64, b: i64) -> LatticeModel {
    let total = (a + b) as f64;
    LatticeModel::iid(&[b as f64 / total, a as f64 / total], &[-a, b]).unwrap()
}

fn walk_strategy() -> impl Strategy<Value = LatticeModel> {
    prop_oneof![
        (1i64..4, 1i64..4).prop_map(|(a, b)| two_step(a, b)),
        (0.05f64..0.95).prop_map(|stay| LatticeModel::persistent(stay).unwrap()),
    ]
}

fn driving_rows(model: &LatticeModel) -> common::Rows {
    common::rows_of(model.driving())
}

fn step_list(model: &LatticeModel) -> Vec<i64> {
    (0..model.driving().len()).map(|s| model.step(s)[0]).collect()
}

#[test]
fn simple_walk_matches_binomial_law() {
    let table = return_probabilities(&LatticeModel::srw(), 200, None).unwrap();
    for n in 0..=200 {
        for p in -40..=40i64 {
            let value = table.probability(n, &[p]);
            let exact = common::srw_probability(n as u64, p);
            assert!((value - exact).abs() <= 1e-11 * exact, "n={n} p={p}");
            if (n as i64 + p) % 2 != 0 {
                assert_eq!(value, 0.0);
            }
        }
    }
}

#[test]
fn planar_walk_factorizes() {
    let table = return_probabilities(&LatticeModel::srw_2d(), 60, None).unwrap();
    for n in [0usize, 1, 2, 10, 37, 60] {
        for (x, y) in [(0i64, 0i64), (1, 0), (2, 2), (-3, 1), (5, -5)] {
            // rotating by 45 degrees turns the planar walk into two independent walks
            let exact = common::srw_probability(n as u64, x + y) * common::srw_probability(n as u64, x - y);
            assert!((table.probability(n, &[x, y]) - exact).abs() < 1e-14);
        }
        assert!((table.slice_mass(n) - 1.0).abs() < 1e-12);
    }
}

#[test]
fn series_matches_fourier_integral() {
    for model in [two_step(1, 2), LatticeModel::persistent(0.7).unwrap(), LatticeModel::srw()] {
        let rows = driving_rows(&model);
        let pi = common::weights(model.stationary());
        for p in [1i64, 2, 4] {
            let series = potential_series(&model, &[p], SeriesConfig::new(1e-15, 40_000)).unwrap();
            let fourier = common::potential_fourier(&rows, &pi, &step_list(&model), p, 20_000);
            let gap = (series.series_value - fourier).abs();
            assert!(gap <= series.tail_bound + 1e-9, "p={p}: {} vs {fourier} (bound {})", series.series_value, series.tail_bound);
        }
    }
}

#[test]
fn exact_hitting_reproduces_gamblers_ruin() {
    for p in 1..=5 {
        let h = hitting_exact(&LatticeModel::srw(), p, 400, 1e-8).unwrap();
        assert!((h.probability - 0.5 / p as f64).abs() < 1e-8, "{h:?}");
        let mirrored = hitting_exact(&LatticeModel::srw(), -p, 400, 1e-8).unwrap();
        assert!((mirrored.probability - h.probability).abs() < 1e-12);
    }
}

#[test]
fn exact_hitting_equals_reciprocal_fourier_value_for_iid_steps() {
    let model = two_step(1, 2);
    let rows = driving_rows(&model);
    let pi = common::weights(model.stationary());
    for p in [-3i64, -1, 1, 2, 5] {
        let exact = hitting_exact(&model, p, 1000, 1e-8).unwrap().probability;
        let fourier = common::potential_fourier(&rows, &pi, &step_list(&model), p, 20_000);
        assert!((exact - 1.0 / fourier).abs() < 1e-8, "p={p}: {exact} vs {}", 1.0 / fourier);
    }
}

#[test]
fn monte_carlo_hitting_agrees_with_exact_solve() {
    let model = LatticeModel::persistent(0.7).unwrap();
    for p in [1i64, 3] {
        let exact = hitting_exact(&model, p, 1000, 1e-8).unwrap().probability;
        let mc = hitting_mc(&model, &[p], &SimConfig::new(21, 20_000, 1), 100_000).unwrap();
        assert!(mc.estimate.within(exact, 3.0), "p={p}: {mc:?} vs {exact}");
    }
}

#[test]
fn invalid_lattice_requests_are_rejected() {
    assert_eq!(hitting_exact(&LatticeModel::srw(), 0, 100, 1e-8).unwrap_err(), Error::ZeroTarget);
    assert!(matches!(
        LatticeModel::iid(&[0.5, 0.5], &[-1, 2]).unwrap_err(),
        Error::NonCentered { .. }
    ));
    assert!(matches!(
        return_probabilities(&LatticeModel::srw(), 100, Some(10)).unwrap_err(),
        Error::WindowTooSmall { .. }
    ));
    assert!(matches!(
        hitting_exact(&two_step(1, 2), 3, 12, 1e-8).unwrap_err(),
        Error::RadiusTooSmall { .. }
    ));
    let capped = hitting_mc(&LatticeModel::srw(), &[50], &SimConfig::new(3, 200, 1), 10).unwrap();
    assert!(capped.censored > 0 && capped.censored < 200);
    assert_eq!(capped.estimate.mean, 0.0);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn mass_is_conserved(model in walk_strategy(), n_max in 1usize..300) {
        let table = return_probabilities(&model, n_max, None).unwrap();
        prop_assert!(table.leak <= 1e-12);
        for n in 0..=n_max {
            prop_assert!((table.slice_mass(n) - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn propagation_matches_characteristic_function(model in walk_strategy(), n in 0usize..40, p in -12i64..12) {
        let table = return_probabilities(&model, n.max(1), None).unwrap();
        let direct = characteristic_probability(&model, n, &[p]).unwrap();
        prop_assert!((table.probability(n, &[p]) - direct).abs() < 1e-12);
    }

    #[test]
    fn persistent_walk_is_symmetric(stay in 0.05f64..0.95, n in 0usize..80, p in 0i64..30) {
        let table = return_probabilities(&LatticeModel::persistent(stay).unwrap(), n.max(1), None).unwrap();
        prop_assert!((table.probability(n, &[p]) - table.probability(n, &[-p])).abs() < 1e-15);
        if (n as i64 + p) % 2 != 0 {
            prop_assert_eq!(table.probability(n, &[p]), 0.0);
        }
    }
}
