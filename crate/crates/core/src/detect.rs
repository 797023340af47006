//! Threshold detectors behind splitter trees.
//!
//! Each [`SplitterTree`] fans one optical mode out to a set of detectors.
//! Only the leaf probabilities matter for click statistics, so a tree is
//! described by them directly; whatever is missing from unity is loss.
//! Photons route independently, and a threshold detector reports the same
//! click for one photon or several.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::circuit::{ChipParams, chip_modes};
use crate::error::{Error, Result};
use crate::evolve::OutputSampler;
use crate::fock::{FockState, Occupation};
use crate::herald::{heralded_output, HeraldPattern};
use crate::rng::par_sample;

pub type DetectorId = String;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Leaf {
    pub det: DetectorId,
    pub p: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SplitterTree {
    pub mode: usize,
    pub leaves: Vec<Leaf>,
}

impl SplitterTree {
    pub fn new(mode: usize, leaves: Vec<Leaf>) -> Result<Self> {
        let t = SplitterTree { mode, leaves };
        t.validate()?;
        Ok(t)
    }

    /// `k` leaves named `{prefix}1..{prefix}k`, each reached with 1/k.
    pub fn uniform(mode: usize, prefix: &str, k: usize) -> Self {
        let leaves = (1..=k)
            .map(|i| Leaf { det: format!("{prefix}{i}"), p: 1.0 / k as f64 })
            .collect();
        SplitterTree { mode, leaves }
    }

    pub fn validate(&self) -> Result<()> {
        let mut seen = BTreeSet::new();
        for l in &self.leaves {
            if !(0.0..=1.0).contains(&l.p) {
                return Err(Error::InvalidParameter { name: "p", value: l.p, reason: "leaf probability must lie in [0, 1]" });
            }
            if !seen.insert(&l.det) {
                return Err(Error::Config(format!("detector `{}` appears twice", l.det)));
            }
        }
        let sum: f64 = self.leaves.iter().map(|l| l.p).sum();
        if sum > 1.0 + 1e-12 {
            return Err(Error::InvalidParameter { name: "leaves", value: sum, reason: "leaf probabilities sum above 1" });
        }
        Ok(())
    }

    pub fn loss(&self) -> f64 {
        (1.0 - self.leaves.iter().map(|l| l.p).sum::<f64>()).max(0.0)
    }

    fn leaf(&self, det: &str) -> Option<&Leaf> {
        self.leaves.iter().find(|l| l.det == det)
    }
}

/// Probability that `n_photons` photons entering `tree` land one each on
/// exactly the detectors in `targets`: n!·∏ p.
pub fn cascade_resolve_probability(tree: &SplitterTree, n_photons: u32, targets: &BTreeSet<DetectorId>) -> Result<f64> {
    if targets.len() > tree.leaves.len() {
        return Err(Error::Config(format!(
            "{} target detectors but the tree has {} leaves",
            targets.len(),
            tree.leaves.len()
        )));
    }
    if targets.len() != n_photons as usize {
        return Err(Error::Config(format!("{} photons cannot fire {} distinct detectors", n_photons, targets.len())));
    }
    let mut p: f64 = (1..=n_photons).map(f64::from).product();
    for t in targets {
        p *= tree.leaf(t).ok_or_else(|| Error::UnknownDetector(t.clone()))?.p;
    }
    Ok(p)
}

/// Probability that `n` photons fire `n` distinct detectors of the tree
/// (any of them): n!·eₙ(p), with eₙ the elementary symmetric polynomial.
pub fn resolve_probability(probs: &[f64], n: u32) -> f64 {
    let n = n as usize;
    if n > probs.len() {
        return 0.0;
    }
    let mut e = vec![0.0; n + 1];
    e[0] = 1.0;
    for &p in probs {
        for k in (1..=n).rev() {
            e[k] += e[k - 1] * p;
        }
    }
    e[n] * (1..=n).map(|k| k as f64).product::<f64>()
}

/// Detectors that fired, with photon counts when detectors resolve number
/// (always 1 for threshold detectors).
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ClickPattern(BTreeMap<DetectorId, u32>);

impl ClickPattern {
    pub fn from_detectors<I, S>(dets: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<DetectorId>,
    {
        ClickPattern(dets.into_iter().map(|d| (d.into(), 1)).collect())
    }

    pub fn contains(&self, det: &str) -> bool {
        self.0.contains_key(det)
    }

    pub fn detectors(&self) -> impl Iterator<Item = &DetectorId> {
        self.0.keys()
    }

    pub fn counts(&self) -> &BTreeMap<DetectorId, u32> {
        &self.0
    }

    /// Number of detectors that fired.
    pub fn fold(&self) -> usize {
        self.0.len()
    }

    fn merge(&self, other: &ClickPattern) -> ClickPattern {
        let mut m = self.0.clone();
        m.extend(other.0.iter().map(|(k, v)| (k.clone(), *v)));
        ClickPattern(m)
    }
}

impl fmt::Display for ClickPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "-");
        }
        for (i, (d, c)) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, "+")?;
            }
            if *c > 1 {
                write!(f, "{d}x{c}")?;
            } else {
                write!(f, "{d}")?;
            }
        }
        Ok(())
    }
}

impl std::str::FromStr for ClickPattern {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.is_empty() || s == "-" {
            return Ok(ClickPattern::default());
        }
        let mut m = BTreeMap::new();
        for part in s.split('+') {
            let (d, c) = match part.rsplit_once('x') {
                Some((d, c)) if !d.is_empty() && c.parse::<u32>().is_ok() => (d, c.parse().unwrap()),
                _ => (part, 1),
            };
            m.insert(d.to_string(), c);
        }
        Ok(ClickPattern(m))
    }
}

/// Splitter trees plus detector efficiencies. JSON layout:
/// `{"trees":[{"mode":2,"leaves":[{"det":"D1","p":0.25}]}],"efficiency":{"D1":1.0}}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Topology {
    pub trees: Vec<SplitterTree>,
    /// Missing detectors default to unit efficiency.
    #[serde(default)]
    pub efficiency: BTreeMap<DetectorId, f64>,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub number_resolving: bool,
}

impl Topology {
    pub fn new(trees: Vec<SplitterTree>) -> Result<Self> {
        let t = Topology { trees, efficiency: BTreeMap::new(), number_resolving: false };
        t.validate()?;
        Ok(t)
    }

    /// Herald modes i, l on one detector each; j and k each on a uniform
    /// four-leaf tree.
    pub fn six_fold() -> Self {
        use chip_modes::*;
        let single = |mode, name: &str| SplitterTree { mode, leaves: vec![Leaf { det: name.into(), p: 1.0 }] };
        Topology {
            trees: vec![
                single(I, "Di"),
                SplitterTree::uniform(J, "Dj", 4),
                SplitterTree::uniform(K, "Dk", 4),
                single(L, "Dl"),
            ],
            efficiency: BTreeMap::new(),
            number_resolving: false,
        }
    }

    /// Looks up a named preset.
    pub fn preset(name: &str) -> Option<Self> {
        match name {
            "paper-6fold" | "six-fold" => Some(Self::six_fold()),
            _ => None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let mut modes = BTreeSet::new();
        let mut dets = BTreeSet::new();
        for t in &self.trees {
            t.validate()?;
            if !modes.insert(t.mode) {
                return Err(Error::OverlappingTrees(t.mode));
            }
            for l in &t.leaves {
                if !dets.insert(l.det.as_str()) {
                    return Err(Error::Config(format!("detector `{}` appears in two trees", l.det)));
                }
            }
        }
        for (d, &e) in &self.efficiency {
            if !dets.contains(d.as_str()) {
                return Err(Error::UnknownDetector(d.clone()));
            }
            if !(0.0..=1.0).contains(&e) {
                return Err(Error::InvalidParameter { name: "efficiency", value: e, reason: "must lie in [0, 1]" });
            }
        }
        Ok(())
    }

    pub fn detectors(&self) -> Vec<DetectorId> {
        self.trees.iter().flat_map(|t| t.leaves.iter().map(|l| l.det.clone())).collect()
    }

    pub fn modes(&self) -> Vec<usize> {
        self.trees.iter().map(|t| t.mode).collect()
    }

    pub fn tree_for(&self, det: &str) -> Option<&SplitterTree> {
        self.trees.iter().find(|t| t.leaf(det).is_some())
    }

    fn efficiency(&self, det: &str) -> f64 {
        self.efficiency.get(det).copied().unwrap_or(1.0)
    }

    /// Per-leaf probability of a photon being routed to and registered by
    /// each detector.
    fn effective_probs(&self, tree: &SplitterTree) -> Vec<f64> {
        tree.leaves.iter().map(|l| l.p * self.efficiency(&l.det)).collect()
    }

    /// Click distribution for `n` photons in one tree, by enumerating how
    /// many photons reach each leaf (the remainder is lost).
    fn tree_clicks(&self, tree: &SplitterTree, n: u32) -> BTreeMap<ClickPattern, f64> {
        let probs = self.effective_probs(tree);
        let lost = (1.0 - probs.iter().sum::<f64>()).max(0.0);
        let mut out = BTreeMap::new();
        let mut counts = vec![0u32; probs.len()];
        self.route(tree, &probs, lost, n, 0, &mut counts, &mut out);
        out
    }

    #[allow(clippy::too_many_arguments)]
    fn route(
        &self,
        tree: &SplitterTree,
        probs: &[f64],
        lost: f64,
        remaining: u32,
        leaf: usize,
        counts: &mut Vec<u32>,
        out: &mut BTreeMap<ClickPattern, f64>,
    ) {
        if leaf == probs.len() {
            // multinomial weight with the leftover photons lost
            let total: u32 = counts.iter().sum::<u32>() + remaining;
            let mut w: f64 = (1..=total).map(f64::from).product();
            w /= (1..=remaining).map(f64::from).product::<f64>();
            w *= lost.powi(remaining as i32);
            for (&c, &p) in counts.iter().zip(probs) {
                w /= (1..=c).map(f64::from).product::<f64>();
                w *= p.powi(c as i32);
            }
            if w == 0.0 {
                return;
            }
            let pattern = ClickPattern(
                tree.leaves
                    .iter()
                    .zip(counts.iter())
                    .filter(|(_, &c)| c > 0)
                    .map(|(l, &c)| (l.det.clone(), if self.number_resolving { c } else { 1 }))
                    .collect(),
            );
            *out.entry(pattern).or_insert(0.0) += w;
            return;
        }
        for c in 0..=remaining {
            counts[leaf] = c;
            self.route(tree, probs, lost, remaining - c, leaf + 1, counts, out);
        }
        counts[leaf] = 0;
    }

    /// Routes a fixed occupation of the covered modes into one click pattern.
    pub fn sample_clicks<R: Rng + ?Sized>(&self, occ_on_trees: &[u32], rng: &mut R) -> ClickPattern {
        let mut fired: BTreeMap<DetectorId, u32> = BTreeMap::new();
        for (tree, &n) in self.trees.iter().zip(occ_on_trees) {
            if n == 0 {
                continue;
            }
            let mut w = self.effective_probs(tree);
            w.push((1.0 - w.iter().sum::<f64>()).max(0.0));
            let Ok(idx) = WeightedIndex::new(&w) else { continue };
            for _ in 0..n {
                let k = idx.sample(rng);
                if k < tree.leaves.len() {
                    *fired.entry(tree.leaves[k].det.clone()).or_insert(0) += 1;
                }
            }
        }
        if !self.number_resolving {
            fired.values_mut().for_each(|c| *c = 1);
        }
        ClickPattern(fired)
    }

    fn check_state(&self, state: &FockState) -> Result<()> {
        self.validate()?;
        match self.trees.iter().find(|t| t.mode >= state.modes()) {
            Some(t) => Err(Error::ModeOutOfRange { index: t.mode, modes: state.modes() }),
            None => Ok(()),
        }
    }
}

/// Exact click-pattern distribution of `state` under `topology`.
///
/// Modes without a tree are traced out. Probabilities sum to the squared
/// norm of the state.
pub fn click_distribution(state: &FockState, topology: &Topology) -> Result<BTreeMap<ClickPattern, f64>> {
    topology.check_state(state)?;
    let occ_dist = state.marginal_distribution(&topology.modes())?;
    let mut cache: BTreeMap<(usize, u32), BTreeMap<ClickPattern, f64>> = BTreeMap::new();
    let mut out: BTreeMap<ClickPattern, f64> = BTreeMap::new();
    for (occ, p_occ) in occ_dist {
        let mut acc: BTreeMap<ClickPattern, f64> = BTreeMap::from([(ClickPattern::default(), p_occ)]);
        for (ti, tree) in topology.trees.iter().enumerate() {
            let n = occ.get(ti);
            let per_tree = cache.entry((ti, n)).or_insert_with(|| topology.tree_clicks(tree, n));
            let mut next = BTreeMap::new();
            for (pa, wa) in &acc {
                for (pb, wb) in per_tree.iter() {
                    *next.entry(pa.merge(pb)).or_insert(0.0) += wa * wb;
                }
            }
            acc = next;
        }
        for (p, w) in acc {
            *out.entry(p).or_insert(0.0) += w;
        }
    }
    out.retain(|_, w| *w > 0.0);
    Ok(out)
}

/// Monte Carlo click patterns for a state, with deterministic seed splitting.
pub fn sample_click_patterns(
    state: &FockState,
    topology: &Topology,
    shots: usize,
    seed: u64,
    workers: usize,
) -> Result<Vec<ClickPattern>> {
    topology.check_state(state)?;
    let occ = OutputSampler::from_distribution(&state.marginal_distribution(&topology.modes())?)?;
    Ok(par_sample(shots, seed, workers, |rng| {
        let o = occ.sample(rng);
        topology.sample_clicks(o.counts(), rng)
    }))
}

/// Relative detector efficiencies from singles counts (largest = 1).
pub fn relative_efficiencies(singles: &BTreeMap<DetectorId, u64>) -> Result<BTreeMap<DetectorId, f64>> {
    if let Some((d, _)) = singles.iter().find(|(_, &c)| c == 0) {
        return Err(Error::ZeroSingles(d.clone()));
    }
    let max = singles.values().copied().max().unwrap_or(1) as f64;
    Ok(singles.iter().map(|(d, &c)| (d.clone(), c as f64 / max)).collect())
}

/// Divides each pattern count by the relative efficiencies of the detectors
/// in it and renormalizes to a distribution.
pub fn normalize_rates(
    raw_counts: &BTreeMap<ClickPattern, f64>,
    singles: &BTreeMap<DetectorId, u64>,
) -> Result<BTreeMap<ClickPattern, f64>> {
    normalize_rates_with(raw_counts, singles, |_| 1.0)
}

/// As [`normalize_rates`], also dividing by a per-pattern resolution
/// probability of the detection topology.
pub fn normalize_rates_with(
    raw_counts: &BTreeMap<ClickPattern, f64>,
    singles: &BTreeMap<DetectorId, u64>,
    resolution: impl Fn(&ClickPattern) -> f64,
) -> Result<BTreeMap<ClickPattern, f64>> {
    let eff = relative_efficiencies(singles)?;
    let mut out = BTreeMap::new();
    for (pat, &count) in raw_counts {
        let mut w = count;
        for d in pat.detectors() {
            w /= eff.get(d).ok_or_else(|| Error::UnknownDetector(d.clone()))?;
        }
        let r = resolution(pat);
        if r > 0.0 {
            out.insert(pat.clone(), w / r);
        }
    }
    renormalize(out)
}

fn renormalize<K: Ord>(mut d: BTreeMap<K, f64>) -> Result<BTreeMap<K, f64>> {
    let total: f64 = d.values().sum();
    if total <= 0.0 {
        return Err(Error::InvalidDistribution("no counts to normalize".into()));
    }
    d.values_mut().for_each(|v| *v /= total);
    Ok(d)
}

/// Photon-number distribution on the tree modes from click-pattern rates,
/// assuming each click is one photon and `photons` photons in total.
///
/// Patterns with a different click count are dropped. Each occupation is
/// divided by the probability that the trees resolve it into distinct
/// clicks. Keys follow the order of `topology.trees`.
pub fn outcome_distribution(
    rates: &BTreeMap<ClickPattern, f64>,
    topology: &Topology,
    photons: u32,
) -> Result<BTreeMap<Occupation, f64>> {
    topology.validate()?;
    let mut sums: BTreeMap<Occupation, f64> = BTreeMap::new();
    for (pat, &r) in rates {
        if pat.fold() != photons as usize {
            continue;
        }
        let mut occ = vec![0u32; topology.trees.len()];
        for d in pat.detectors() {
            let ti = topology
                .trees
                .iter()
                .position(|t| t.leaf(d).is_some())
                .ok_or_else(|| Error::UnknownDetector(d.clone()))?;
            occ[ti] += 1;
        }
        *sums.entry(Occupation::new(occ)).or_insert(0.0) += r;
    }
    let mut out = BTreeMap::new();
    for (occ, s) in sums {
        let rho: f64 = topology
            .trees
            .iter()
            .zip(occ.counts())
            .map(|(t, &n)| resolve_probability(&t.leaves.iter().map(|l| l.p).collect::<Vec<_>>(), n))
            .product();
        if rho > 0.0 {
            out.insert(occ, s / rho);
        }
    }
    renormalize(out)
}

fn check_distribution<K>(d: &BTreeMap<K, f64>) -> Result<()> {
    if let Some(v) = d.values().find(|v| **v < 0.0 || !v.is_finite()) {
        return Err(Error::InvalidDistribution(format!("entry {v} is not a probability")));
    }
    let total: f64 = d.values().sum();
    if (total - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidDistribution(format!("sums to {total}")));
    }
    Ok(())
}

/// Classical fidelity Σ √(pⱼ qⱼ). Outcomes missing from one side count as 0.
pub fn fidelity<K: Ord>(p: &BTreeMap<K, f64>, q: &BTreeMap<K, f64>) -> Result<f64> {
    check_distribution(p)?;
    check_distribution(q)?;
    Ok(p.iter().filter_map(|(k, a)| q.get(k).map(|b| (a * b).sqrt())).sum())
}

/// ½ Σ |pⱼ − qⱼ|.
pub fn total_variation<K: Ord>(p: &BTreeMap<K, f64>, q: &BTreeMap<K, f64>) -> f64 {
    let mut tv = 0.0;
    for (k, a) in p {
        tv += (a - q.get(k).copied().unwrap_or(0.0)).abs();
    }
    for (k, b) in q {
        if !p.contains_key(k) {
            tv += b.abs();
        }
    }
    tv / 2.0
}

/// Photon statistics of the heralded output with the first and last coupler
/// reflectivities set to `eta1`, `eta2` and the herald taps at their design
/// value 1/3.
pub fn simulated_reference_distribution(
    eta1: f64,
    eta2: f64,
    input: &FockState,
    pattern: &HeraldPattern,
    phi: f64,
) -> Result<BTreeMap<Occupation, f64>> {
    let chip = ChipParams { eta1, eta2, phi, ..ChipParams::default() };
    let r = heralded_output(&chip, input, pattern)?;
    if !r.success {
        return Err(Error::InvalidDistribution("herald never fires".into()));
    }
    let all: Vec<usize> = (0..r.conditional_state.modes()).collect();
    r.conditional_state.marginal_distribution(&all)
}
