//! Independent cross-checks of the evolution engines.

use heraldsim::circuit::{chip_circuit, random_unitary, unitarity_deviation, CMatrix, Interferometer};
use heraldsim::evolve::{amplitude, apply, distinguishable_probability};
use heraldsim::fock::{enumerate_basis, FockState, Occupation, C64};
use heraldsim::herald::{project, HeraldPattern};
use heraldsim::permanent::permanent;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn naive_permanent(a: &CMatrix) -> C64 {
    fn rec(a: &CMatrix, row: usize, used: &mut Vec<bool>) -> C64 {
        if row == a.nrows() {
            return C64::new(1.0, 0.0);
        }
        let mut s = C64::default();
        for c in 0..a.ncols() {
            if !used[c] {
                used[c] = true;
                s += a[(row, c)] * rec(a, row + 1, used);
                used[c] = false;
            }
        }
        s
    }
    rec(a, 0, &mut vec![false; a.ncols()])
}

fn random_input(rng: &mut ChaCha8Rng, modes: usize, photons: u32) -> Occupation {
    use rand::Rng;
    let mut counts = vec![0u32; modes];
    for _ in 0..photons {
        counts[rng.random_range(0..modes)] += 1;
    }
    Occupation::new(counts)
}

#[test]
fn polynomial_engine_matches_permanents() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut worst = 0.0f64;
    for trial in 0..200 {
        let modes = 2 + trial % 3;
        let photons = 1 + (trial / 3 % 4) as u32;
        let u = random_unitary(modes, &mut rng);
        let input = random_input(&mut rng, modes, photons);
        let out = apply(&u, &FockState::basis(input.clone())).unwrap();
        for occ in enumerate_basis(photons, modes) {
            let d = (out.amplitude(&occ) - amplitude(&u, &input, &occ)).norm();
            worst = worst.max(d);
        }
    }
    assert!(worst < 1e-10, "max deviation {worst:e}");
}

#[test]
fn ryser_matches_permutation_sum() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for n in 0..=6 {
        for _ in 0..5 {
            let a = random_unitary(n.max(1), &mut rng);
            let a = if n == 0 { CMatrix::zeros(0, 0) } else { a };
            assert!((permanent(&a) - naive_permanent(&a)).norm() < 1e-12);
        }
    }
}

#[test]
fn distinguishable_probabilities_sum_to_one() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for modes in 2..=4 {
        let u = random_unitary(modes, &mut rng);
        let input = random_input(&mut rng, modes, 3);
        let s: f64 = enumerate_basis(3, modes).iter().map(|o| distinguishable_probability(&u, &input, o)).sum();
        assert!((s - 1.0).abs() < 1e-12);
    }
}

fn arb_circuit(modes: usize) -> impl Strategy<Value = Interferometer> {
    prop::collection::vec((0.0f64..=1.0, 0usize..modes, 1usize..modes, -6.0f64..6.0), 0..8).prop_map(move |els| {
        els.into_iter().fold(Interferometer::new(modes), |c, (eta, i, off, phi)| {
            let j = (i + off) % modes;
            c.dc(eta, i, j).unwrap().phase(phi, j).unwrap()
        })
    })
}

fn arb_state(modes: usize) -> impl Strategy<Value = FockState> {
    prop::collection::vec((prop::collection::vec(0u32..3, modes), -1.0f64..1.0, -1.0f64..1.0), 1..4).prop_filter_map(
        "nonzero",
        move |terms| {
            let terms = terms.into_iter().map(|(occ, re, im)| (Occupation::new(occ), C64::new(re, im)));
            FockState::from_terms(modes, terms).ok()?.normalized()
        },
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn circuits_compile_to_unitaries(c in arb_circuit(4)) {
        prop_assert!(unitarity_deviation(&c.compile()) < 1e-12);
    }

    #[test]
    fn evolution_preserves_norm_and_sectors(c in arb_circuit(3), psi in arb_state(3)) {
        let out = apply(&c.compile(), &psi).unwrap();
        prop_assert!((out.norm_sqr() - 1.0).abs() < 1e-10);
        for n in psi.photon_numbers() {
            prop_assert!((out.sector(n).norm_sqr() - psi.sector(n).norm_sqr()).abs() < 1e-10);
        }
    }

    #[test]
    fn evolution_composes(a in arb_circuit(3), b in arb_circuit(3), psi in arb_state(3)) {
        let (ua, ub) = (a.compile(), b.compile());
        let stepwise = apply(&ub, &apply(&ua, &psi).unwrap()).unwrap();
        let joint = apply(&(&ub * &ua), &psi).unwrap();
        prop_assert!((stepwise.fidelity(&joint).unwrap() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn inner_products_are_invariant(c in arb_circuit(3), x in arb_state(3), y in arb_state(3)) {
        let u = c.compile();
        let before = x.inner_product(&y).unwrap();
        let after = apply(&u, &x).unwrap().inner_product(&apply(&u, &y).unwrap()).unwrap();
        prop_assert!((before - after).norm() < 1e-10);
    }

    #[test]
    fn herald_outcomes_partition_probability(
        eta1 in 0.0f64..=1.0, eta2 in 0.0f64..=1.0, eta3 in 0.0f64..=1.0, eta4 in 0.0f64..=1.0,
        phi in 0.0f64..std::f64::consts::TAU, n in 1u32..=3,
    ) {
        let chip = chip_circuit(eta1, eta2, eta3, eta4, phi).unwrap();
        let out = apply(&chip.compile(), &FockState::basis([0, n, n, 0])).unwrap();
        let mut total = 0.0;
        for a in 0..=2 * n {
            for b in 0..=2 * n - a {
                let r = project(&out, &HeraldPattern::new([(0, a), (3, b)]).unwrap()).unwrap();
                total += r.probability;
            }
        }
        prop_assert!((total - 1.0).abs() < 1e-10);
    }
}
