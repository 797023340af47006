//! Evolution of Fock states through a mode-transformation matrix.
//!
//! Two independent engines live here. [`apply`] expands the product of
//! creation operators, substituting a†ₖ → Σⱼ Uⱼₖ a†ⱼ one photon at a time.
//! [`transition_amplitude`] computes single amplitudes ⟨t|U|s⟩ from matrix
//! permanents. The test suite holds each against the other.

use std::collections::BTreeMap;

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::circuit::{unitarity_deviation, CMatrix};
use crate::error::{Error, Result};
use crate::fock::{FockState, Occupation, C64};
use crate::permanent::permanent;
use crate::rng::par_sample;

/// Hard cap on photons per term.
pub const MAX_PHOTONS: u32 = 10;

/// Tolerance for the unitarity check in [`apply`].
pub const UNITARITY_TOL: f64 = 1e-10;

fn factorial(n: u32) -> f64 {
    (1..=n).map(f64::from).product()
}

fn occ_factorials(occ: &[u32]) -> f64 {
    occ.iter().map(|&c| factorial(c)).product()
}

fn check_matrix(matrix: &CMatrix, modes: usize) -> Result<()> {
    if matrix.nrows() != modes || matrix.ncols() != modes {
        return Err(Error::DimensionMismatch { rows: matrix.nrows(), cols: matrix.ncols(), modes });
    }
    let deviation = unitarity_deviation(matrix);
    if deviation > UNITARITY_TOL {
        return Err(Error::NonUnitary { deviation });
    }
    Ok(())
}

fn check_photons(occ: &Occupation) -> Result<()> {
    let photons = occ.total();
    if photons > MAX_PHOTONS {
        return Err(Error::TooManyPhotons { photons, max: MAX_PHOTONS });
    }
    Ok(())
}

/// Output terms of a single input ket, by creation-operator expansion.
fn expand_ket(matrix: &CMatrix, input: &Occupation) -> BTreeMap<Vec<u32>, C64> {
    let modes = input.modes();
    let mut poly: BTreeMap<Vec<u32>, C64> = BTreeMap::new();
    poly.insert(vec![0; modes], C64::new(1.0, 0.0));
    for (k, &count) in input.counts().iter().enumerate() {
        for _ in 0..count {
            let mut next: BTreeMap<Vec<u32>, C64> = BTreeMap::new();
            for (mono, coef) in &poly {
                for j in 0..modes {
                    let u = matrix[(j, k)];
                    if u.norm_sqr() == 0.0 {
                        continue;
                    }
                    let mut m = mono.clone();
                    m[j] += 1;
                    *next.entry(m).or_default() += coef * u;
                }
            }
            poly = next;
        }
    }
    let norm_in = occ_factorials(input.counts()).sqrt();
    for (mono, coef) in poly.iter_mut() {
        *coef *= occ_factorials(mono).sqrt() / norm_in;
    }
    poly
}

/// Evolves every term of `state` through `matrix`.
///
/// Photon-number sectors are preserved. Fails on a dimension mismatch, a
/// matrix that is not unitary within [`UNITARITY_TOL`], or a term with more
/// than [`MAX_PHOTONS`] photons.
pub fn apply(matrix: &CMatrix, state: &FockState) -> Result<FockState> {
    check_matrix(matrix, state.modes())?;
    let mut out: BTreeMap<Occupation, C64> = BTreeMap::new();
    for (occ, amp) in state.terms() {
        check_photons(occ)?;
        for (mono, coef) in expand_ket(matrix, occ) {
            *out.entry(Occupation::new(mono)).or_default() += amp * coef;
        }
    }
    Ok(FockState::from_map_pruned(state.modes(), out))
}

/// A single ⟨output|U|input⟩ request.
#[derive(Clone, Copy, Debug)]
pub struct TransitionQuery<'a> {
    pub matrix: &'a CMatrix,
    pub input: &'a Occupation,
    pub output: &'a Occupation,
}

/// Rows of the matrix repeated by `output`, columns by `input`.
fn repeated_submatrix(matrix: &CMatrix, input: &[u32], output: &[u32], f: impl Fn(C64) -> C64) -> CMatrix {
    let expand = |occ: &[u32]| -> Vec<usize> {
        occ.iter().enumerate().flat_map(|(m, &c)| std::iter::repeat_n(m, c as usize)).collect()
    };
    let rows = expand(output);
    let cols = expand(input);
    CMatrix::from_fn(rows.len(), cols.len(), |r, c| f(matrix[(rows[r], cols[c])]))
}

/// Per(U_sub) / √(∏sᵢ! ∏tⱼ!). Zero when photon numbers differ.
pub fn transition_amplitude(q: &TransitionQuery) -> C64 {
    if q.input.total() != q.output.total() || q.input.modes() != q.output.modes() {
        return C64::default();
    }
    let sub = repeated_submatrix(q.matrix, q.input.counts(), q.output.counts(), |z| z);
    let norm = (occ_factorials(q.input.counts()) * occ_factorials(q.output.counts())).sqrt();
    permanent(&sub) / norm
}

/// Shorthand for [`transition_amplitude`].
pub fn amplitude(matrix: &CMatrix, input: &Occupation, output: &Occupation) -> C64 {
    transition_amplitude(&TransitionQuery { matrix, input, output })
}

/// Output probability when every photon is distinguishable from the others:
/// Per(|U_sub|²) / ∏tⱼ!.
pub fn distinguishable_probability(matrix: &CMatrix, input: &Occupation, output: &Occupation) -> f64 {
    if input.total() != output.total() || input.modes() != output.modes() {
        return 0.0;
    }
    let sub = repeated_submatrix(matrix, input.counts(), output.counts(), |z| C64::new(z.norm_sqr(), 0.0));
    permanent(&sub).re / occ_factorials(output.counts())
}

/// Distribution of output occupations for a single input ket.
pub fn output_distribution(matrix: &CMatrix, input: &Occupation) -> Result<BTreeMap<Occupation, f64>> {
    let out = apply(matrix, &FockState::basis(input.clone()))?;
    let all: Vec<usize> = (0..out.modes()).collect();
    out.marginal_distribution(&all)
}

/// Categorical sampler over output occupations of one input ket.
#[derive(Clone, Debug)]
pub struct OutputSampler {
    outcomes: Vec<Occupation>,
    index: WeightedIndex<f64>,
}

impl OutputSampler {
    pub fn new(matrix: &CMatrix, input: &Occupation) -> Result<Self> {
        Self::from_distribution(&output_distribution(matrix, input)?)
    }

    pub fn from_distribution(dist: &BTreeMap<Occupation, f64>) -> Result<Self> {
        let outcomes: Vec<Occupation> = dist.keys().cloned().collect();
        let index = WeightedIndex::new(dist.values().copied())
            .map_err(|e| Error::InvalidDistribution(e.to_string()))?;
        Ok(OutputSampler { outcomes, index })
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Occupation {
        self.outcomes[self.index.sample(rng)].clone()
    }

    /// `shots` draws split across seeded worker streams (see [`crate::rng`]).
    pub fn sample_many(&self, shots: usize, seed: u64, workers: usize) -> Vec<Occupation> {
        par_sample(shots, seed, workers, |rng| self.sample(rng))
    }
}

/// One draw from |⟨out|U|in⟩|², deterministic in `seed`.
pub fn sample_output(matrix: &CMatrix, input: &Occupation, seed: u64) -> Result<Occupation> {
    let sampler = OutputSampler::new(matrix, input)?;
    Ok(sampler.sample(&mut ChaCha8Rng::seed_from_u64(seed)))
}

/// Relative frequencies of a list of outcomes.
pub fn histogram<K: Ord + Clone>(samples: &[K]) -> BTreeMap<K, f64> {
    let mut h = BTreeMap::new();
    for s in samples {
        *h.entry(s.clone()).or_insert(0.0) += 1.0;
    }
    let n = samples.len() as f64;
    h.values_mut().for_each(|v| *v /= n);
    h
}
