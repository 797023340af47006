//! Projective heralding on exact photon counts.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::circuit::ChipParams;
use crate::error::{Error, Result};
use crate::evolve::apply;
use crate::fock::{FockState, Occupation, C64};

/// Exact photon-count requirements on a subset of modes.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct HeraldPattern {
    requirements: BTreeMap<usize, u32>,
}

impl HeraldPattern {
    /// Rejects repeated mode indices.
    pub fn new<I: IntoIterator<Item = (usize, u32)>>(pairs: I) -> Result<Self> {
        let mut requirements = BTreeMap::new();
        for (m, n) in pairs {
            if requirements.insert(m, n).is_some() {
                return Err(Error::DuplicateMode(m));
            }
        }
        Ok(HeraldPattern { requirements })
    }

    /// One photon in each of the chip's herald modes i and l.
    pub fn chip_default() -> Self {
        use crate::circuit::chip_modes::{I, L};
        HeraldPattern::new([(I, 1), (L, 1)]).expect("distinct modes")
    }

    pub fn requirements(&self) -> &BTreeMap<usize, u32> {
        &self.requirements
    }

    pub fn modes(&self) -> impl Iterator<Item = usize> + '_ {
        self.requirements.keys().copied()
    }

    pub fn photons(&self) -> u32 {
        self.requirements.values().sum()
    }

    pub fn matches(&self, occ: &Occupation) -> bool {
        self.requirements.iter().all(|(&m, &n)| occ.get(m) == n)
    }

    pub fn validate(&self, modes: usize) -> Result<()> {
        match self.requirements.keys().find(|&&m| m >= modes) {
            Some(&m) => Err(Error::ModeOutOfRange { index: m, modes }),
            None => Ok(()),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct HeraldResult {
    pub probability: f64,
    /// Normalized state on `remaining_modes`, or the zero vector when the
    /// herald cannot fire.
    pub conditional_state: FockState,
    pub raw_amplitude_norm: f64,
    /// Original indices of the modes `conditional_state` lives on.
    pub remaining_modes: Vec<usize>,
    pub success: bool,
}

/// Keeps the terms matching `pattern`, removes the herald modes and
/// renormalizes.
///
/// A herald that cannot fire is not an error: the result has probability 0,
/// an empty conditional state and `success == false`.
pub fn project(state: &FockState, pattern: &HeraldPattern) -> Result<HeraldResult> {
    pattern.validate(state.modes())?;
    let remaining_modes: Vec<usize> =
        (0..state.modes()).filter(|m| !pattern.requirements.contains_key(m)).collect();
    let kept = state
        .terms()
        .filter(|(o, _)| pattern.matches(o))
        .map(|(o, a)| (o.restrict(&remaining_modes), *a));
    let raw = FockState::from_terms(remaining_modes.len(), kept)?;
    let raw_amplitude_norm = raw.norm();
    let probability = raw_amplitude_norm * raw_amplitude_norm;
    let (conditional_state, success) = match raw.normalized() {
        Some(s) if probability > 0.0 => (s, true),
        _ => (FockState::empty(remaining_modes.len()), false),
    };
    Ok(HeraldResult { probability, conditional_state, raw_amplitude_norm, remaining_modes, success })
}

/// Runs `input` through the chip and heralds on `pattern`.
pub fn heralded_output(chip: &ChipParams, input: &FockState, pattern: &HeraldPattern) -> Result<HeraldResult> {
    let u = chip.circuit()?.compile();
    project(&apply(&u, input)?, pattern)
}

/// One point of a phase scan. Serializes as `{"phi", "prob", "state"}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScanPoint {
    pub phi: f64,
    #[serde(rename = "prob")]
    pub probability: f64,
    pub state: FockState,
}

/// [`heralded_output`] at every phase in `phi_grid`, in grid order.
pub fn herald_scan(
    chip: &ChipParams,
    input: &FockState,
    pattern: &HeraldPattern,
    phi_grid: &[f64],
) -> Result<Vec<ScanPoint>> {
    phi_grid
        .par_iter()
        .map(|&phi| {
            let r = heralded_output(&chip.with_phi(phi), input, pattern)?;
            Ok(ScanPoint { phi, probability: r.probability, state: r.conditional_state })
        })
        .collect()
}

/// Component of `state` along the two-mode |N::M⟩ family on modes
/// `(x, y)`, after fixing `prefix` on the other modes.
///
/// Returns the norm of the projection onto span{|…N…M…⟩, |…M…N…⟩} and the
/// relative phase α of the second ket with respect to the first.
pub fn branch(state: &FockState, fixed: &BTreeMap<usize, u32>, (x, y): (usize, usize), n: u32, m: u32) -> (f64, f64) {
    let ket = |a: u32, b: u32| {
        let mut v = vec![0; state.modes()];
        for (&mode, &c) in fixed {
            v[mode] = c;
        }
        v[x] = a;
        v[y] = b;
        Occupation::new(v)
    };
    let first = state.amplitude(&ket(n, m));
    let second = if n == m { C64::default() } else { state.amplitude(&ket(m, n)) };
    let magnitude = (first.norm_sqr() + second.norm_sqr()).sqrt();
    let alpha = if first.norm() > 0.0 && second.norm() > 0.0 { (second / first).arg() } else { 0.0 };
    (magnitude, alpha)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::noon;
    use std::f64::consts::PI;

    fn chip() -> ChipParams {
        ChipParams::default()
    }

    #[test]
    fn two_two_heralds_noon() {
        for phi in [0.0, 0.4, 1.9] {
            let r = heralded_output(&chip().with_phi(phi), &FockState::basis([0, 2, 2, 0]), &HeraldPattern::chip_default()).unwrap();
            assert!((r.probability - 4.0 / 81.0).abs() < 1e-12);
            assert_eq!(r.remaining_modes, vec![1, 2]);
            assert!((r.conditional_state.fidelity(&noon(2, 0, 0.0)).unwrap() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn balanced_taps_give_one_sixteenth() {
        let r = heralded_output(&chip().with_taps(0.5), &FockState::basis([0, 2, 2, 0]), &HeraldPattern::chip_default()).unwrap();
        assert!((r.probability - 0.0625).abs() < 1e-12);
    }

    #[test]
    fn six_photon_rates() {
        let input = FockState::basis([0, 3, 3, 0]);
        for phi in [0.0, 0.7, PI / 2.0] {
            let r = heralded_output(&chip().with_taps(0.5).with_phi(phi), &input, &HeraldPattern::chip_default()).unwrap();
            assert!((r.probability - 3.0 / 64.0).abs() < 1e-12);
            let r = heralded_output(&chip().with_phi(phi), &input, &HeraldPattern::chip_default()).unwrap();
            assert!((r.probability - 4.0 / 243.0).abs() < 1e-12);
        }
    }

    #[test]
    fn impossible_herald_is_flagged() {
        let p = HeraldPattern::new([(0, 5)]).unwrap();
        let r = heralded_output(&chip(), &FockState::basis([0, 2, 2, 0]), &p).unwrap();
        assert_eq!(r.probability, 0.0);
        assert!(!r.success);
        assert!(r.conditional_state.is_empty());
    }

    #[test]
    fn unit_taps_block_heralds() {
        let c = ChipParams { eta3: 1.0, eta4: 1.0, ..chip() };
        let r = heralded_output(&c, &FockState::basis([0, 2, 2, 0]), &HeraldPattern::chip_default()).unwrap();
        assert_eq!(r.probability, 0.0);
    }

    #[test]
    fn pattern_validation() {
        assert!(HeraldPattern::new([(0, 1), (0, 2)]).is_err());
        let p = HeraldPattern::new([(7, 1)]).unwrap();
        assert!(project(&FockState::vacuum(4), &p).is_err());
    }

    #[test]
    fn completeness_over_herald_patterns() {
        let u = chip().with_phi(0.3).circuit().unwrap().compile();
        let out = apply(&u, &FockState::basis([0, 2, 2, 0])).unwrap();
        let mut total = 0.0;
        for i in 0..=4 {
            for l in 0..=(4 - i) {
                total += project(&out, &HeraldPattern::new([(0, i), (3, l)]).unwrap()).unwrap().probability;
            }
        }
        assert!((total - 1.0).abs() < 1e-10);
    }

    #[test]
    fn scan_keeps_grid_order() {
        let grid: Vec<f64> = (0..9).map(|k| k as f64 * 0.4).collect();
        let pts = herald_scan(&chip(), &FockState::basis([0, 2, 2, 0]), &HeraldPattern::chip_default(), &grid).unwrap();
        assert_eq!(pts.iter().map(|p| p.phi).collect::<Vec<_>>(), grid);
        assert!(pts.iter().all(|p| (p.probability - 4.0 / 81.0).abs() < 1e-12));
        let j = serde_json::to_value(&pts[0]).unwrap();
        assert!(j.get("prob").is_some() && j.get("state").is_some());
    }

    #[test]
    fn empty_intersection_scan_is_zero() {
        let p = HeraldPattern::new([(0, 3), (3, 3)]).unwrap();
        let pts = herald_scan(&chip(), &FockState::basis([0, 2, 2, 0]), &p, &[0.0, 1.0]).unwrap();
        assert!(pts.iter().all(|p| p.probability == 0.0 && p.state.is_empty()));
    }
}
