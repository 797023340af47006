//! Multimode bosonic Fock states with sparse complex amplitudes.
//!
//! A [`FockState`] maps occupation vectors (photons per mode) to complex
//! amplitudes. Terms are kept in lexicographic order of their occupation
//! vectors, so iteration and serialized output are deterministic. Every
//! constructor and operation drops amplitudes with magnitude at or below
//! [`PRUNE_EPS`].

use std::collections::BTreeMap;
use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type C64 = Complex64;

/// Amplitudes with magnitude at or below this are dropped.
pub const PRUNE_EPS: f64 = 1e-14;

/// Photon count per mode.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Occupation(Vec<u32>);

impl Occupation {
    pub fn new(counts: Vec<u32>) -> Self {
        Occupation(counts)
    }

    /// Builds an occupation from signed counts, rejecting negative entries.
    pub fn from_signed(counts: &[i64]) -> Result<Self> {
        counts
            .iter()
            .map(|&c| u32::try_from(c).map_err(|_| Error::NegativePhotonNumber(c)))
            .collect::<Result<Vec<_>>>()
            .map(Occupation)
    }

    pub fn vacuum(modes: usize) -> Self {
        Occupation(vec![0; modes])
    }

    pub fn modes(&self) -> usize {
        self.0.len()
    }

    pub fn total(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn counts(&self) -> &[u32] {
        &self.0
    }

    pub fn get(&self, mode: usize) -> u32 {
        self.0[mode]
    }

    /// Keeps only the listed modes, in the listed order.
    pub fn restrict(&self, modes: &[usize]) -> Occupation {
        Occupation(modes.iter().map(|&m| self.0[m]).collect())
    }

    pub fn concat(&self, other: &Occupation) -> Occupation {
        let mut v = self.0.clone();
        v.extend_from_slice(&other.0);
        Occupation(v)
    }
}

impl From<Vec<u32>> for Occupation {
    fn from(v: Vec<u32>) -> Self {
        Occupation(v)
    }
}

impl<const N: usize> From<[u32; N]> for Occupation {
    fn from(v: [u32; N]) -> Self {
        Occupation(v.to_vec())
    }
}

impl fmt::Display for Occupation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "|")?;
        for (i, c) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, "⟩")
    }
}

/// All occupation vectors with `photons` photons over `modes` modes, in
/// lexicographic order.
pub fn enumerate_basis(photons: u32, modes: usize) -> Vec<Occupation> {
    fn rec(remaining: u32, idx: usize, cur: &mut Vec<u32>, out: &mut Vec<Occupation>) {
        let modes = cur.len();
        if idx == modes - 1 {
            cur[idx] = remaining;
            out.push(Occupation(cur.clone()));
            return;
        }
        for c in 0..=remaining {
            cur[idx] = c;
            rec(remaining - c, idx + 1, cur, out);
        }
    }
    if modes == 0 {
        return if photons == 0 { vec![Occupation(vec![])] } else { vec![] };
    }
    let mut out = Vec::new();
    rec(photons, 0, &mut vec![0; modes], &mut out);
    out
}

/// A pure state on a fixed number of modes.
///
/// States are immutable values: every operation returns a new state.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "StateJson", into = "StateJson")]
pub struct FockState {
    modes: usize,
    terms: BTreeMap<Occupation, C64>,
}

impl FockState {
    /// The zero vector (no terms). Used for failed heralds.
    pub fn empty(modes: usize) -> Self {
        FockState { modes, terms: BTreeMap::new() }
    }

    pub fn vacuum(modes: usize) -> Self {
        Self::basis(Occupation::vacuum(modes))
    }

    pub fn basis(occ: impl Into<Occupation>) -> Self {
        let occ = occ.into();
        let modes = occ.modes();
        let mut terms = BTreeMap::new();
        terms.insert(occ, C64::new(1.0, 0.0));
        FockState { modes, terms }
    }

    /// Sums duplicate occupations and prunes tiny amplitudes.
    pub fn from_terms<I>(modes: usize, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Occupation, C64)>,
    {
        let mut map: BTreeMap<Occupation, C64> = BTreeMap::new();
        for (occ, amp) in terms {
            if occ.modes() != modes {
                return Err(Error::ModeMismatch { expected: modes, got: occ.modes() });
            }
            *map.entry(occ).or_default() += amp;
        }
        Ok(Self::from_map_pruned(modes, map))
    }

    pub(crate) fn from_map_pruned(modes: usize, mut terms: BTreeMap<Occupation, C64>) -> Self {
        terms.retain(|_, a| a.norm() > PRUNE_EPS);
        FockState { modes, terms }
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Occupation, &C64)> {
        self.terms.iter()
    }

    pub fn amplitude(&self, occ: &Occupation) -> C64 {
        self.terms.get(occ).copied().unwrap_or_default()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.terms.values().map(|a| a.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    /// `None` for the zero vector.
    pub fn normalized(&self) -> Option<FockState> {
        let n = self.norm();
        if n == 0.0 {
            return None;
        }
        Some(self.scaled(C64::new(1.0 / n, 0.0)))
    }

    pub fn scaled(&self, factor: C64) -> FockState {
        let terms = self.terms.iter().map(|(o, a)| (o.clone(), a * factor)).collect();
        Self::from_map_pruned(self.modes, terms)
    }

    /// Vector sum of two states on the same modes.
    pub fn add(&self, other: &FockState) -> Result<FockState> {
        self.check_modes(other)?;
        let mut terms = self.terms.clone();
        for (o, a) in &other.terms {
            *terms.entry(o.clone()).or_default() += a;
        }
        Ok(Self::from_map_pruned(self.modes, terms))
    }

    /// Set of total photon numbers present.
    pub fn photon_numbers(&self) -> Vec<u32> {
        let mut v: Vec<u32> = self.terms.keys().map(Occupation::total).collect();
        v.sort_unstable();
        v.dedup();
        v
    }

    /// Component with exactly `photons` photons in total.
    pub fn sector(&self, photons: u32) -> FockState {
        let terms = self
            .terms
            .iter()
            .filter(|(o, _)| o.total() == photons)
            .map(|(o, a)| (o.clone(), *a))
            .collect();
        FockState { modes: self.modes, terms }
    }

    pub fn tensor(&self, other: &FockState) -> FockState {
        let mut terms = BTreeMap::new();
        for (oa, a) in &self.terms {
            for (ob, b) in &other.terms {
                terms.insert(oa.concat(ob), a * b);
            }
        }
        Self::from_map_pruned(self.modes + other.modes, terms)
    }

    /// ⟨self|other⟩, conjugate-linear in `self`.
    pub fn inner_product(&self, other: &FockState) -> Result<C64> {
        self.check_modes(other)?;
        let (small, large, conj_small) = if self.len() <= other.len() {
            (self, other, true)
        } else {
            (other, self, false)
        };
        let mut acc = C64::default();
        for (o, a) in &small.terms {
            if let Some(b) = large.terms.get(o) {
                acc += if conj_small { a.conj() * b } else { b.conj() * a };
            }
        }
        Ok(acc)
    }

    /// Phase-insensitive overlap |⟨a|b⟩|² / (‖a‖²‖b‖²).
    pub fn fidelity(&self, other: &FockState) -> Result<f64> {
        let ip = self.inner_product(other)?;
        let denom = self.norm_sqr() * other.norm_sqr();
        if denom == 0.0 {
            return Ok(0.0);
        }
        Ok(ip.norm_sqr() / denom)
    }

    /// Photon-number distribution on `modes`, tracing out the rest.
    ///
    /// Probabilities sum to the squared norm; keys are restricted to the
    /// listed modes in the listed order.
    pub fn marginal_distribution(&self, modes: &[usize]) -> Result<BTreeMap<Occupation, f64>> {
        for &m in modes {
            if m >= self.modes {
                return Err(Error::ModeOutOfRange { index: m, modes: self.modes });
            }
        }
        let mut out = BTreeMap::new();
        for (o, a) in &self.terms {
            *out.entry(o.restrict(modes)).or_insert(0.0) += a.norm_sqr();
        }
        Ok(out)
    }

    /// Relabels modes: mode `i` of `self` becomes mode `perm[i]`.
    pub fn permute_modes(&self, perm: &[usize]) -> Result<FockState> {
        if perm.len() != self.modes {
            return Err(Error::ModeMismatch { expected: self.modes, got: perm.len() });
        }
        let mut seen = vec![false; self.modes];
        for &p in perm {
            if p >= self.modes {
                return Err(Error::ModeOutOfRange { index: p, modes: self.modes });
            }
            if std::mem::replace(&mut seen[p], true) {
                return Err(Error::DuplicateMode(p));
            }
        }
        let terms = self
            .terms
            .iter()
            .map(|(o, a)| {
                let mut v = vec![0; self.modes];
                for (i, &c) in o.counts().iter().enumerate() {
                    v[perm[i]] = c;
                }
                (Occupation(v), *a)
            })
            .collect();
        Ok(FockState { modes: self.modes, terms })
    }

    fn check_modes(&self, other: &FockState) -> Result<()> {
        if self.modes != other.modes {
            return Err(Error::ModeMismatch { expected: self.modes, got: other.modes });
        }
        Ok(())
    }
}

impl fmt::Display for FockState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, (o, a)) in self.terms.iter().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            write!(f, "({:.6}{:+.6}i){}", a.re, a.im, o)?;
        }
        Ok(())
    }
}

#[derive(Serialize, Deserialize)]
struct TermJson {
    occ: Vec<u32>,
    re: f64,
    im: f64,
}

#[derive(Serialize, Deserialize)]
struct StateJson {
    modes: usize,
    terms: Vec<TermJson>,
}

impl TryFrom<StateJson> for FockState {
    type Error = Error;

    fn try_from(j: StateJson) -> Result<Self> {
        FockState::from_terms(
            j.modes,
            j.terms.into_iter().map(|t| (Occupation(t.occ), C64::new(t.re, t.im))),
        )
    }
}

impl From<FockState> for StateJson {
    fn from(s: FockState) -> Self {
        StateJson {
            modes: s.modes,
            terms: s
                .terms
                .into_iter()
                .map(|(o, a)| TermJson { occ: o.0, re: a.re, im: a.im })
                .collect(),
        }
    }
}

/// Parameters of a two-mode number-entangled state
/// (|N,M⟩ + e^{iα}|M,N⟩)/√2.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoonSpec {
    pub n: u32,
    pub m: u32,
    pub alpha: f64,
    /// Which of the two modes carries N photons in the first ket.
    pub mode_pair: (usize, usize),
}

impl NoonSpec {
    pub fn new(n: i64, m: i64, alpha: f64) -> Result<Self> {
        if n < 0 {
            return Err(Error::NegativePhotonNumber(n));
        }
        if m < 0 {
            return Err(Error::NegativePhotonNumber(m));
        }
        if n < m {
            return Err(Error::InvalidParameter {
                name: "m",
                value: m as f64,
                reason: "must not exceed n",
            });
        }
        Ok(NoonSpec { n: n as u32, m: m as u32, alpha, mode_pair: (0, 1) })
    }
}

/// Two-mode state |N::M⟩^α. For N = M this is the single ket |N,N⟩.
pub fn make_noon(spec: &NoonSpec) -> Result<FockState> {
    let (x, y) = spec.mode_pair;
    if x > 1 || y > 1 || x == y {
        return Err(Error::Config(format!(
            "mode_pair must be (0,1) or (1,0), got ({x},{y})"
        )));
    }
    if spec.n < spec.m {
        return Err(Error::InvalidParameter {
            name: "m",
            value: spec.m as f64,
            reason: "must not exceed n",
        });
    }
    let ket = |first: u32, second: u32| {
        let mut v = vec![0; 2];
        v[x] = first;
        v[y] = second;
        Occupation(v)
    };
    if spec.n == spec.m {
        return Ok(FockState::basis(ket(spec.n, spec.n)));
    }
    let s = std::f64::consts::FRAC_1_SQRT_2;
    FockState::from_terms(
        2,
        [
            (ket(spec.n, spec.m), C64::new(s, 0.0)),
            (ket(spec.m, spec.n), C64::from_polar(s, spec.alpha)),
        ],
    )
}

/// Shorthand for [`make_noon`] on modes (0,1).
pub fn noon(n: u32, m: u32, alpha: f64) -> FockState {
    make_noon(&NoonSpec::new(n as i64, m as i64, alpha).expect("n >= m")).expect("valid spec")
}

/// Mixture of pure states with weights. Weights need not be normalized.
pub type Ensemble = Vec<(f64, FockState)>;

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_1_SQRT_2, PI};

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn noon_two_zero() {
        let s = noon(2, 0, 0.0);
        assert_eq!(s.len(), 2);
        assert!((s.amplitude(&[2, 0].into()) - c(FRAC_1_SQRT_2, 0.0)).norm() < 1e-15);
        assert!((s.amplitude(&[0, 2].into()) - c(FRAC_1_SQRT_2, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn noon_degenerate_is_single_ket() {
        for alpha in [0.0, 1.3, PI] {
            let s = noon(1, 1, alpha);
            assert_eq!(s.len(), 1);
            assert_eq!(s.amplitude(&[1, 1].into()), c(1.0, 0.0));
        }
    }

    #[test]
    fn noon_four_pi_has_minus_sign() {
        let s = noon(4, 0, PI);
        assert!((s.amplitude(&[4, 0].into()) - c(FRAC_1_SQRT_2, 0.0)).norm() < 1e-15);
        assert!((s.amplitude(&[0, 4].into()) - c(-FRAC_1_SQRT_2, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn noon_rejects_negative() {
        assert!(matches!(NoonSpec::new(-1, 0, 0.0), Err(Error::NegativePhotonNumber(-1))));
        assert!(matches!(NoonSpec::new(2, -3, 0.0), Err(Error::NegativePhotonNumber(-3))));
        assert!(NoonSpec::new(1, 2, 0.0).is_err());
        assert!(Occupation::from_signed(&[1, -2]).is_err());
    }

    #[test]
    fn noon_swapped_mode_pair() {
        let mut spec = NoonSpec::new(3, 1, 0.0).unwrap();
        spec.mode_pair = (1, 0);
        let s = make_noon(&spec).unwrap();
        assert!(s.amplitude(&[1, 3].into()).norm() > 0.7);
    }

    #[test]
    fn tensor_simple() {
        let s = FockState::basis([2]).tensor(&FockState::basis([2]));
        assert_eq!(s, FockState::basis([2, 2]));

        let plus = FockState::from_terms(
            2,
            [([1, 0].into(), c(FRAC_1_SQRT_2, 0.0)), ([0, 1].into(), c(FRAC_1_SQRT_2, 0.0))],
        )
        .unwrap();
        let t = plus.tensor(&FockState::vacuum(1));
        assert_eq!(t.modes(), 3);
        assert!((t.amplitude(&[1, 0, 0].into()).re - FRAC_1_SQRT_2).abs() < 1e-15);
        assert!((t.amplitude(&[0, 1, 0].into()).re - FRAC_1_SQRT_2).abs() < 1e-15);
    }

    #[test]
    fn inner_products() {
        let a = FockState::basis([2, 0]);
        let b = FockState::basis([0, 2]);
        assert_eq!(a.inner_product(&b).unwrap(), C64::default());
        let p = noon(2, 0, 0.0);
        let m = noon(2, 0, PI);
        assert!(p.inner_product(&m).unwrap().norm() < 1e-15);
        assert!((p.inner_product(&p).unwrap().re - p.norm_sqr()).abs() < 1e-15);
        assert!(matches!(
            a.inner_product(&FockState::vacuum(3)),
            Err(Error::ModeMismatch { .. })
        ));
    }

    #[test]
    fn inner_product_conjugates_first_argument() {
        let a = FockState::basis([1, 0]).scaled(c(0.0, 1.0));
        let b = FockState::basis([1, 0]);
        assert_eq!(a.inner_product(&b).unwrap(), c(0.0, -1.0));
        assert_eq!(b.inner_product(&a).unwrap(), c(0.0, 1.0));
    }

    #[test]
    fn marginals() {
        let d = noon(2, 0, 0.0).marginal_distribution(&[0, 1]).unwrap();
        assert_eq!(d.len(), 2);
        assert!((d[&Occupation::from([2, 0])] - 0.5).abs() < 1e-15);
        assert!((d[&Occupation::from([0, 2])] - 0.5).abs() < 1e-15);

        let d = FockState::basis([1, 1]).marginal_distribution(&[0]).unwrap();
        assert_eq!(d[&Occupation::from([1])], 1.0);

        assert!(matches!(
            FockState::basis([1, 1]).marginal_distribution(&[2]),
            Err(Error::ModeOutOfRange { index: 2, .. })
        ));
    }

    #[test]
    fn pruning_drops_cancelled_terms() {
        let s = FockState::from_terms(
            1,
            [([1].into(), c(0.5, 0.0)), ([1].into(), c(-0.5, 1e-16))],
        )
        .unwrap();
        assert!(s.is_empty());
    }

    #[test]
    fn basis_dimension_matches_binomial() {
        fn binom(n: u64, k: u64) -> u64 {
            (1..=k).fold(1, |acc, i| acc * (n - k + i) / i)
        }
        for n in 0..=8u32 {
            for m in 1..=8usize {
                let basis = enumerate_basis(n, m);
                assert_eq!(basis.len() as u64, binom(n as u64 + m as u64 - 1, n as u64));
                assert!(basis.windows(2).all(|w| w[0] < w[1]));
                assert!(basis.iter().all(|o| o.total() == n && o.modes() == m));
            }
        }
    }

    #[test]
    fn json_layout() {
        let s = noon(2, 0, PI);
        let j = serde_json::to_value(&s).unwrap();
        assert_eq!(j["modes"], 2);
        assert_eq!(j["terms"][0]["occ"], serde_json::json!([0, 2]));
        assert!((j["terms"][0]["re"].as_f64().unwrap() + FRAC_1_SQRT_2).abs() < 1e-15);
        let back: FockState = serde_json::from_value(j).unwrap();
        assert!((back.fidelity(&s).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn json_rejects_wrong_length() {
        let j = r#"{"modes":2,"terms":[{"occ":[1],"re":1.0,"im":0.0}]}"#;
        assert!(serde_json::from_str::<FockState>(j).is_err());
    }

    #[test]
    fn permute_swaps() {
        let s = FockState::basis([3, 1, 0]).permute_modes(&[1, 0, 2]).unwrap();
        assert_eq!(s, FockState::basis([1, 3, 0]));
        assert!(FockState::basis([1, 0]).permute_modes(&[0, 0]).is_err());
    }
}
