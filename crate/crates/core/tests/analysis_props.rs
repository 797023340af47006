use std::f64::consts::{PI, TAU};

use heraldsim::analysis::*;
use heraldsim::fock::{noon, Occupation};
use proptest::prelude::*;

fn period(s: &FringeScenario, n: usize) -> f64 {
    fringe_period(&fringe_scan(s, &dense_grid(n)).unwrap()).unwrap().period.unwrap()
}

#[test]
fn super_resolution_ratio() {
    let single = period(&single_photon_chip(), 256);
    let six = period(&six_photon_chip(4, 0), 256);
    assert!((single / TAU - 1.0).abs() < 0.02);
    assert!((six / PI - 1.0).abs() < 0.02);
    assert!((single / six / 2.0 - 1.0).abs() < 0.02);
    let cos = period(&six_photon_chip(3, 1), 256);
    assert!((cos / PI - 1.0).abs() < 0.02);
}

#[test]
fn noon_frequency_scales_with_photon_difference() {
    let base = period(&single_photon_readout(), 256);
    for (n, m, out, ratio) in [(2, 0, [1, 1], 2.0), (3, 1, [4, 0], 2.0), (4, 0, [3, 1], 4.0)] {
        let scan = fringe_scan(&noon_readout(n, m, out), &dense_grid(256)).unwrap();
        let p = fringe_period(&scan).unwrap().period.unwrap();
        assert!((base / p / ratio - 1.0).abs() < 0.02, "{n}::{m}");
    }
}

#[test]
fn dense_scans_are_finite_probabilities() {
    let grid = dense_grid(1000);
    for s in [single_photon_chip(), six_photon_chip(4, 0), noon_readout(4, 0, [3, 1])] {
        for x in fringe_scan(&s, &grid).unwrap() {
            assert!(x.probability.is_finite() && (0.0..=1.0).contains(&x.probability));
        }
    }
}

#[test]
fn sagnac_witness_separates_pure_from_mixed() {
    let target = Occupation::from([1, 1]);
    for (e3, e4) in [(1.0 / 3.0, 1.0 / 3.0), (0.5, 0.5), (0.2, 0.7)] {
        let pure = sagnac_reverse(&vec![(1.0, noon(2, 0, 0.0))], 0.5, e3, e4).unwrap();
        let mixed = sagnac_reverse(&dephase(&noon(2, 0, 0.0)), 0.5, e3, e4).unwrap();
        assert!((pure.two_photon[&target] - 1.0).abs() < 1e-10);
        // each photon leaves through its tap with probability 1 - eta
        let (x3, x4) = (1.0 - e3, 1.0 - e4);
        let expected = 2.0 * x3 * x4 / (x3 + x4).powi(2);
        assert!((mixed.two_photon[&target] - expected).abs() < 1e-10);
        if e3 == e4 {
            assert!((mixed.two_photon[&target] - 0.5).abs() < 1e-10);
        }
        assert!((pure.raw[&target] - x3 * x4).abs() < 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn recovers_period_of_cosines(freq in 1u32..9, offset in 0.0f64..TAU, vis in 0.1f64..1.0, n in 64usize..300) {
        let samples: Vec<FringeSample> = dense_grid(n)
            .into_iter()
            .map(|phi| FringeSample { phi, probability: 0.5 * (1.0 + vis * (freq as f64 * phi + offset).cos()) })
            .collect();
        let fit = fringe_period(&samples).unwrap();
        prop_assert!((fit.period.unwrap() * freq as f64 / TAU - 1.0).abs() < 0.02);
        prop_assert!((fit.visibility - vis).abs() < 0.05);
    }
}
