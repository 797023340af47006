use std::f64::consts::FRAC_PI_2;

use heraldsim::circuit::{ChipParams, Interferometer};
use heraldsim::detect::{fidelity, Topology};
use heraldsim::evolve::apply;
use heraldsim::fock::{noon, FockState, Occupation};
use heraldsim::herald::{branch, project, HeraldPattern};
use heraldsim::source::*;
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn weights_decay_geometrically(xi in -0.9f64..0.9, n_max in 1u32..7) {
        let p = SpdcParams::new(xi, n_max).unwrap();
        let s = spdc_state(&p).unwrap();
        prop_assert!((s.norm_sqr() - 1.0).abs() < 1e-12);
        let w = p.sector_weights();
        for (n, &wn) in w.iter().enumerate().skip(1) {
            let prev = s.amplitude(&[n as u32 - 1, n as u32 - 1].into()).norm_sqr();
            let cur = s.amplitude(&[n as u32, n as u32].into()).norm_sqr();
            prop_assert!((cur - prev * xi * xi).abs() < 1e-14);
            prop_assert!((wn - cur).abs() < 1e-14);
        }
    }

    #[test]
    fn report_total_matches_full_projection(xi in 0.01f64..0.5, phi in 0.0f64..6.3, n_max in 2u32..5) {
        let chip = ChipParams::default().with_phi(phi);
        let p = SpdcParams::new(xi, n_max).unwrap();
        let pattern = HeraldPattern::chip_default();
        let report = contamination_report(&chip, &p, &pattern, 4, &Topology::six_fold()).unwrap();
        let out = apply(&chip.circuit().unwrap().compile(), &chip_input(&p).unwrap()).unwrap();
        let full = project(&out, &pattern).unwrap().probability;
        prop_assert!((report.total_herald_probability - full).abs() < 1e-10);
        prop_assert!(report.sectors.iter().all(|s| s.herald_probability >= 0.0 && s.false_event_probability >= 0.0));
    }
}

#[test]
fn eight_photon_dc1_amplitudes() {
    let u = Interferometer::new(2).dc(0.5, 0, 1).unwrap().compile();
    let out = apply(&u, &FockState::basis([4, 4])).unwrap();
    let expected = [((8, 0), 35f64.sqrt() / 8.0), ((6, 2), 5f64.sqrt() / 4.0), ((4, 4), 3.0 / 8.0)];
    for ((n, m), mag) in expected {
        let (b, _) = branch(&out, &Default::default(), (0, 1), n, m);
        assert!((b - mag).abs() < 1e-12);
    }
    assert_eq!(out.len(), 5);
}

#[test]
fn sector_examples() {
    let chip = ChipParams::default().with_phi(FRAC_PI_2);
    let p = SpdcParams::new(0.085, 4).unwrap();
    let r = contamination_report(&chip, &p, &HeraldPattern::chip_default(), 6, &Topology::six_fold()).unwrap();

    assert_eq!(r.sector(1).unwrap().herald_probability, 0.0);

    let s2 = r.sector(2).unwrap();
    assert!((s2.herald_probability - 4.0 / 81.0).abs() < 1e-12);
    assert!(s2.false_channels.is_empty());
    let ideal = noon(2, 0, 0.0).marginal_distribution(&[0, 1]).unwrap();
    for o in &s2.conditional_distribution {
        assert!((o.p - ideal[&o.occ]).abs() < 1e-12);
    }

    let s3 = r.sector(3).unwrap();
    assert!((s3.herald_probability - 4.0 / 243.0).abs() < 1e-12);
    assert!(s3.false_channels.is_empty());

    let s4 = r.sector(4).unwrap();
    let find = |h: [u32; 2], n, m| {
        s4.branches.iter().find(|b| b.herald == Occupation::from(h) && b.n == n && b.m == m).unwrap().clone()
    };
    let b = find([2, 1], 3, 2);
    assert!((b.magnitude - 1.0 / (27.0 * 3f64.sqrt())).abs() < 1e-10);
    assert!((b.alpha.abs() - FRAC_PI_2).abs() < 1e-10);
    let b = find([2, 2], 4, 0);
    assert!((b.magnitude - 7.0 * 3f64.sqrt() / 81.0).abs() < 1e-10);
    assert!(b.alpha.abs() < 1e-10);
    let b = find([2, 2], 2, 2);
    assert!((b.magnitude - 3.0 / 81.0).abs() < 1e-10);

    // the |2>_i|3,2>|1>_l term reads as a heralded "2,2" six-fold event
    assert!(s4
        .false_channels
        .iter()
        .any(|c| c.apparent == Occupation::from([2, 2]) && c.origin == Occupation::from([2, 3, 2, 1]) && c.probability > 0.0));
    assert!(r.summary.iter().any(|row| row.sector == 4 && row.false_event_prob > 0.0));
    let json = serde_json::to_string(&r).unwrap();
    assert_eq!(serde_json::from_str::<ContaminationReport>(&json).unwrap(), r);
}

#[test]
fn heralded_fidelity_grows_with_overlap() {
    let cases: [([u32; 4], f64, FockState); 2] =
        [([0, 2, 2, 0], 0.0, noon(2, 0, 0.0)), ([0, 3, 3, 0], FRAC_PI_2, noon(4, 0, std::f64::consts::PI))];
    for (input, phi, target) in cases {
        let ideal = target.marginal_distribution(&[0, 1]).unwrap();
        let chip = ChipParams::default().with_phi(phi);
        let mut last = 0.0;
        for k in 0..=20 {
            let o = k as f64 / 20.0;
            let (_, d) = mixed_heralded_distribution(&chip, &input.into(), &HeraldPattern::chip_default(), o).unwrap();
            let f = fidelity(&d, &ideal).unwrap();
            assert!(f >= last - 1e-12, "overlap {o}: {f} < {last}");
            last = f;
        }
        assert!((last - 1.0).abs() < 1e-10);
    }
}

#[test]
fn hom_visibility_band() {
    let p = SpdcParams::new(0.085, 2).unwrap();
    let mut prev = -1.0;
    for k in 0..=10 {
        let v = hom_dip(&p.with_overlap(k as f64 / 10.0), 0.5).unwrap();
        assert!(v >= prev);
        prev = v;
    }
    // the model caps V at 1/3; high overlap lands inside 34 ± 4 %
    let v = hom_dip(&p.with_overlap(0.95), 0.5).unwrap();
    assert!((v - 0.34).abs() <= 0.04);
}
