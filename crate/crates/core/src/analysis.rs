//! Phase fringes, super-resolution and the Sagnac coherence test.

use std::collections::BTreeMap;
use std::f64::consts::{PI, TAU};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::circuit::{ChipParams, Interferometer};
use crate::error::{Error, Result};
use crate::evolve::apply;
use crate::fock::{noon, Ensemble, FockState, Occupation};
use crate::herald::{heralded_output, project, HeraldPattern};

/// What the phase is applied to during a scan.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum PhaseCircuit {
    /// The four-mode chip; φ is its internal phase shifter.
    Chip(ChipParams),
    /// Any circuit; every phase shifter is set to φ.
    Custom(Interferometer),
}

impl PhaseCircuit {
    pub fn at(&self, phi: f64) -> Result<Interferometer> {
        match self {
            PhaseCircuit::Chip(c) => c.with_phi(phi).circuit(),
            PhaseCircuit::Custom(i) => Ok(i.with_phases(phi)),
        }
    }
}

/// Input state, circuit and the exact photon counts whose probability is
/// tracked versus φ.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FringeScenario {
    pub circuit: PhaseCircuit,
    pub input: FockState,
    pub pattern: HeraldPattern,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FringeSample {
    pub phi: f64,
    pub probability: f64,
}

/// `n` equally spaced phases on [0, 2π).
pub fn dense_grid(n: usize) -> Vec<f64> {
    (0..n).map(|k| TAU * k as f64 / n as f64).collect()
}

/// The sparse four-phase sampling {π/2, π, 3π/2, 2π}.
pub fn four_point_grid() -> Vec<f64> {
    vec![PI / 2.0, PI, 1.5 * PI, TAU]
}

/// Probability of `scenario.pattern` at each phase, in grid order.
pub fn fringe_scan(scenario: &FringeScenario, phi_grid: &[f64]) -> Result<Vec<FringeSample>> {
    if phi_grid.len() < 4 {
        return Err(Error::InsufficientSamples { need: 4, got: phi_grid.len() });
    }
    phi_grid
        .par_iter()
        .map(|&phi| {
            let circuit = scenario.circuit.at(phi)?;
            let input = if circuit.env_modes() > 0 {
                scenario.input.tensor(&FockState::vacuum(circuit.env_modes()))
            } else {
                scenario.input.clone()
            };
            let out = apply(&circuit.compile(), &input)?;
            let probability = project(&out, &scenario.pattern)?.probability / scenario.input.norm_sqr();
            Ok(FringeSample { phi, probability })
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FringeFit {
    /// `None` when the samples do not oscillate.
    pub period: Option<f64>,
    pub visibility: f64,
    pub note: Option<String>,
}

impl FringeFit {
    pub fn frequency(&self) -> Option<f64> {
        self.period.map(|p| TAU / p)
    }
}

const NO_FRINGE: &str = "no fringe";

/// Dominant period of the sample sequence.
///
/// Maximizes a least-squares (Lomb–Scargle) periodogram over the angular
/// frequency ω, first on a grid finer than the spectral resolution of the
/// scan, then by golden-section refinement. Fitting cosine and sine jointly
/// keeps the negative-frequency image of a real signal from biasing the peak.
pub fn fringe_period(samples: &[FringeSample]) -> Result<FringeFit> {
    if samples.len() < 8 {
        return Err(Error::InsufficientSamples { need: 8, got: samples.len() });
    }
    let ps: Vec<f64> = samples.iter().map(|s| s.probability).collect();
    let max = ps.iter().cloned().fold(f64::MIN, f64::max);
    let min = ps.iter().cloned().fold(f64::MAX, f64::min);
    let visibility = if max + min > 0.0 { (max - min) / (max + min) } else { 0.0 };
    if max - min <= 1e-12 * max.abs().max(1e-300) || max - min < 1e-15 {
        return Ok(FringeFit { period: None, visibility: 0.0, note: Some(NO_FRINGE.into()) });
    }

    let mean = ps.iter().sum::<f64>() / ps.len() as f64;
    let power = |w: f64| {
        let (s2, c2) = samples.iter().fold((0.0, 0.0), |(s, c), x| (s + (2.0 * w * x.phi).sin(), c + (2.0 * w * x.phi).cos()));
        let tau = s2.atan2(c2) / (2.0 * w);
        let (mut yc, mut ys, mut cc, mut ss) = (0.0, 0.0, 0.0, 0.0);
        for x in samples {
            let (sn, cs) = (w * (x.phi - tau)).sin_cos();
            let d = x.probability - mean;
            yc += d * cs;
            ys += d * sn;
            cc += cs * cs;
            ss += sn * sn;
        }
        let term = |num: f64, den: f64| if den > 1e-12 { num * num / den } else { 0.0 };
        term(yc, cc) + term(ys, ss)
    };

    let mut phis: Vec<f64> = samples.iter().map(|s| s.phi).collect();
    phis.sort_by(f64::total_cmp);
    let span = phis[phis.len() - 1] - phis[0];
    let min_step = phis.windows(2).map(|w| w[1] - w[0]).filter(|d| *d > 0.0).fold(f64::MAX, f64::min);
    if !(span > 0.0) || min_step == f64::MAX {
        return Err(Error::InsufficientSamples { need: 8, got: 1 });
    }
    // from a quarter cycle over the span up to Nyquist
    let w_lo = PI / (2.0 * span);
    let w_hi = PI / min_step;
    let step = PI / (8.0 * span);
    let mut best = (w_lo, power(w_lo));
    let mut w = w_lo;
    while w <= w_hi {
        let p = power(w);
        if p > best.1 {
            best = (w, p);
        }
        w += step;
    }

    let (mut a, mut b) = ((best.0 - step).max(w_lo * 0.5), best.0 + step);
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    for _ in 0..80 {
        if power(c) > power(d) {
            b = d;
        } else {
            a = c;
        }
        c = b - g * (b - a);
        d = a + g * (b - a);
    }
    let omega = (a + b) / 2.0;
    Ok(FringeFit { period: Some(TAU / omega), visibility, note: None })
}

/// Fit when possible; with fewer than 8 samples, report visibility only and
/// say why there is no period.
pub fn describe_fringe(samples: &[FringeSample]) -> FringeFit {
    match fringe_period(samples) {
        Ok(f) => f,
        Err(_) => {
            let max = samples.iter().map(|s| s.probability).fold(0.0, f64::max);
            let min = samples.iter().map(|s| s.probability).fold(f64::MAX, f64::min);
            let visibility = if max + min > 0.0 { (max - min) / (max + min) } else { 0.0 };
            FringeFit { period: None, visibility, note: Some(format!("{} samples: insufficient for fit", samples.len())) }
        }
    }
}

/// Shot-noise and Heisenberg phase uncertainties (1/√N, 1/N).
pub fn precision_bounds(n_photons: u32) -> Result<(f64, f64)> {
    if n_photons == 0 {
        return Err(Error::InvalidParameter { name: "n_photons", value: 0.0, reason: "must be at least 1" });
    }
    let n = n_photons as f64;
    Ok((1.0 / n.sqrt(), 1.0 / n))
}

/// Single photon into b, counted at j.
pub fn single_photon_chip() -> FringeScenario {
    FringeScenario {
        circuit: PhaseCircuit::Chip(ChipParams::default()),
        input: FockState::basis([0, 1, 0, 0]),
        pattern: HeraldPattern::new([(1, 1)]).expect("distinct"),
    }
}

/// |3,3⟩ into the chip, counting one herald photon each side and `(nj, nk)`
/// on the output pair.
pub fn six_photon_chip(nj: u32, nk: u32) -> FringeScenario {
    FringeScenario {
        circuit: PhaseCircuit::Chip(ChipParams::default()),
        input: FockState::basis([0, 3, 3, 0]),
        pattern: HeraldPattern::new([(0, 1), (1, nj), (2, nk), (3, 1)]).expect("distinct"),
    }
}

/// Phase on the second mode followed by a balanced coupler.
fn readout() -> Interferometer {
    Interferometer::new(2).phase(0.0, 1).and_then(|i| i.dc(0.5, 0, 1)).expect("valid two-mode circuit")
}

/// (|N,M⟩ + |M,N⟩)/√2 probed by a phase and a balanced coupler, counting
/// `outcome`.
pub fn noon_readout(n: u32, m: u32, outcome: impl Into<Occupation>) -> FringeScenario {
    let outcome = outcome.into();
    FringeScenario {
        circuit: PhaseCircuit::Custom(readout()),
        input: noon(n, m, 0.0),
        pattern: HeraldPattern::new([(0, outcome.get(0)), (1, outcome.get(1))]).expect("distinct"),
    }
}

/// The same readout for one photon in (|1,0⟩ + |0,1⟩)/√2.
pub fn single_photon_readout() -> FringeScenario {
    noon_readout(1, 0, [1, 0])
}

/// Photon statistics at a and d after sending a two-mode state back
/// through the chip.
#[derive(Clone, Debug, PartialEq)]
pub struct SagnacResult {
    /// Joint counts at (a, d), all photon numbers.
    pub raw: BTreeMap<Occupation, f64>,
    /// Restricted to events with two photons at (a, d), renormalized.
    pub two_photon: BTreeMap<Occupation, f64>,
    /// Probability that both photons reach (a, d).
    pub two_photon_probability: f64,
}

/// Return path of the loop: the fibre swaps j and k without a relative
/// phase, the pair recombines on DC2, and the taps DC3, DC4 couple it out
/// to a and d.
pub fn sagnac_reverse(ensemble: &Ensemble, eta2: f64, eta3: f64, eta4: f64) -> Result<SagnacResult> {
    // a zero-reflectivity coupler is a swap with the same phase on both arms
    let circuit = Interferometer::new(4).dc(0.0, 1, 2)?.dc(eta2, 1, 2)?.dc(eta3, 0, 1)?.dc(eta4, 2, 3)?;
    let u = circuit.compile();
    let total_w: f64 = ensemble.iter().map(|(w, _)| w).sum();
    if !(total_w > 0.0) {
        return Err(Error::InvalidDistribution("empty ensemble".into()));
    }
    let mut raw: BTreeMap<Occupation, f64> = BTreeMap::new();
    for (w, state) in ensemble {
        if state.modes() != 2 {
            return Err(Error::ModeMismatch { expected: 2, got: state.modes() });
        }
        let norm = state.norm_sqr();
        if norm == 0.0 {
            continue;
        }
        let input = FockState::vacuum(1).tensor(state).tensor(&FockState::vacuum(1));
        let out = apply(&u, &input)?;
        for (occ, p) in out.marginal_distribution(&[0, 3])? {
            *raw.entry(occ).or_insert(0.0) += w / total_w * p / norm;
        }
    }
    let two: BTreeMap<Occupation, f64> = raw.iter().filter(|(o, _)| o.total() == 2).map(|(o, p)| (o.clone(), *p)).collect();
    let two_photon_probability: f64 = two.values().sum();
    let two_photon = if two_photon_probability > 0.0 {
        two.into_iter().map(|(o, p)| (o, p / two_photon_probability)).collect()
    } else {
        BTreeMap::new()
    };
    Ok(SagnacResult { raw, two_photon, two_photon_probability })
}

/// Forward herald on the chip, then the return path.
pub fn sagnac_scenario(chip: &ChipParams, input: &FockState, pattern: &HeraldPattern) -> Result<SagnacResult> {
    let h = heralded_output(chip, input, pattern)?;
    if !h.success {
        return Err(Error::InvalidDistribution("herald never fires".into()));
    }
    if h.remaining_modes != [1, 2] {
        return Err(Error::Config("the return path needs the state on modes j, k".into()));
    }
    sagnac_reverse(&vec![(1.0, h.conditional_state)], chip.eta2, chip.eta3, chip.eta4)
}

/// Incoherent mixture of the basis components of `state`.
pub fn dephase(state: &FockState) -> Ensemble {
    state.terms().map(|(o, a)| (a.norm_sqr(), FockState::basis(o.clone()))).collect()
}
