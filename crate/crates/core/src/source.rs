//! Down-conversion inputs and the false heralds their higher-order terms
//! produce.
//!
//! A pair source emits Σₙ ξⁿ|n,n⟩ (normalized, truncated at `n_max`). Each
//! sector |n,n⟩ is run through the chip separately: sectors carry different
//! photon numbers, so they never interfere and their herald probabilities
//! add with weights ξ²ⁿ/Z.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::circuit::{ChipParams, CMatrix, Interferometer};
use crate::detect::{ClickPattern, Topology};
use crate::error::{Error, Result};
use crate::evolve::{amplitude, apply, distinguishable_probability};
use crate::fock::{enumerate_basis, FockState, Occupation, C64};
use crate::herald::{branch, project, HeraldPattern};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpdcParams {
    pub xi: f64,
    #[serde(default = "default_n_max")]
    pub n_max: u32,
    /// Indistinguishability of the photons, 1 = perfect interference.
    #[serde(default = "default_overlap")]
    pub overlap: f64,
}

fn default_n_max() -> u32 {
    4
}

fn default_overlap() -> f64 {
    1.0
}

impl SpdcParams {
    pub fn new(xi: f64, n_max: u32) -> Result<Self> {
        let p = SpdcParams { xi, n_max, overlap: 1.0 };
        p.validate()?;
        Ok(p)
    }

    pub fn with_overlap(self, overlap: f64) -> Self {
        SpdcParams { overlap, ..self }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.xi.abs() < 1.0) {
            return Err(Error::InvalidParameter { name: "xi", value: self.xi, reason: "|xi| must be below 1" });
        }
        if self.n_max < 1 {
            return Err(Error::InvalidParameter { name: "n_max", value: 0.0, reason: "must be at least 1" });
        }
        if !(0.0..=1.0).contains(&self.overlap) {
            return Err(Error::InvalidParameter { name: "overlap", value: self.overlap, reason: "must lie in [0, 1]" });
        }
        Ok(())
    }

    /// Normalized probability of the |n,n⟩ sector.
    pub fn sector_weights(&self) -> Vec<f64> {
        let raw: Vec<f64> = (0..=self.n_max).map(|n| self.xi.powi(2 * n as i32)).collect();
        let z: f64 = raw.iter().sum();
        raw.into_iter().map(|w| w / z).collect()
    }
}

/// Σₙ ξⁿ|n,n⟩ / √(Σ ξ²ⁿ) on two modes.
pub fn spdc_state(params: &SpdcParams) -> Result<FockState> {
    params.validate()?;
    let z: f64 = (0..=params.n_max).map(|n| params.xi.powi(2 * n as i32)).sum();
    let s = z.sqrt();
    FockState::from_terms(
        2,
        (0..=params.n_max).map(|n| (Occupation::from([n, n]), C64::new(params.xi.powi(n as i32) / s, 0.0))),
    )
}

/// The pair source on chip inputs b, c with a, d in vacuum.
pub fn chip_input(params: &SpdcParams) -> Result<FockState> {
    Ok(FockState::vacuum(1).tensor(&spdc_state(params)?).tensor(&FockState::vacuum(1)))
}

/// Two-photon-per-port interference visibility on a coupler:
/// V = (P_dist − P) / P_dist for the |2,2⟩ → |2,2⟩ coincidence, where P
/// mixes interfering and distinguishable statistics by `params.overlap`.
pub fn hom_dip(params: &SpdcParams, eta: f64) -> Result<f64> {
    params.validate()?;
    let u = Interferometer::new(2).dc(eta, 0, 1)?.compile();
    let inp = Occupation::from([2, 2]);
    let p_ind = amplitude(&u, &inp, &inp).norm_sqr();
    let p_dist = distinguishable_probability(&u, &inp, &inp);
    if p_dist == 0.0 {
        return Ok(0.0);
    }
    let p = params.overlap * p_ind + (1.0 - params.overlap) * p_dist;
    Ok((p_dist - p) / p_dist)
}

/// Output distribution of one input ket with partially distinguishable
/// photons, as a convex mixture of the interfering and distinguishable
/// cases.
pub fn mixed_output_distribution(matrix: &CMatrix, input: &Occupation, overlap: f64) -> BTreeMap<Occupation, f64> {
    enumerate_basis(input.total(), input.modes())
        .into_iter()
        .map(|o| {
            let p = overlap * amplitude(matrix, input, &o).norm_sqr()
                + (1.0 - overlap) * distinguishable_probability(matrix, input, &o);
            (o, p)
        })
        .filter(|(_, p)| *p > 0.0)
        .collect()
}

/// Herald probability and conditional photon statistics on the unheralded
/// modes for partially distinguishable input photons.
pub fn mixed_heralded_distribution(
    chip: &ChipParams,
    input: &Occupation,
    pattern: &HeraldPattern,
    overlap: f64,
) -> Result<(f64, BTreeMap<Occupation, f64>)> {
    pattern.validate(input.modes())?;
    let u = chip.circuit()?.compile();
    let remaining: Vec<usize> = (0..input.modes()).filter(|m| !pattern.requirements().contains_key(m)).collect();
    let mut out = BTreeMap::new();
    for (o, p) in mixed_output_distribution(&u, input, overlap) {
        if pattern.matches(&o) {
            *out.entry(o.restrict(&remaining)).or_insert(0.0) += p;
        }
    }
    let total: f64 = out.values().sum();
    if total > 0.0 {
        out.values_mut().for_each(|v| *v /= total);
    }
    Ok((total, out))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Outcome {
    pub occ: Occupation,
    pub p: f64,
}

/// A |N::M⟩ component on the two unheralded modes for a fixed herald
/// occupation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Branch {
    pub herald: Occupation,
    pub n: u32,
    pub m: u32,
    pub magnitude: f64,
    /// Relative phase of |M,N⟩ against |N,M⟩.
    pub alpha: f64,
}

/// Six-fold-style events that were not produced by the target occupation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FalseChannel {
    /// Click counts per unheralded tree, as they would be read.
    pub apparent: Occupation,
    /// True output occupation on the detected modes.
    pub origin: Occupation,
    pub probability: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SectorReport {
    pub n: u32,
    pub weight: f64,
    /// Exact-count herald probability for the |n,n⟩ input alone.
    pub herald_probability: f64,
    pub conditional_distribution: Vec<Outcome>,
    /// Probability that the clicks look like a target event.
    pub event_probability: f64,
    /// Part of `event_probability` coming from other occupations.
    pub false_event_probability: f64,
    pub false_channels: Vec<FalseChannel>,
    pub branches: Vec<Branch>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub sector: u32,
    /// Weighted by the sector probability.
    pub herald_prob: f64,
    pub false_event_prob: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ContaminationReport {
    pub params: SpdcParams,
    pub chip: ChipParams,
    pub pattern: HeraldPattern,
    pub target_photons: u32,
    pub sectors: Vec<SectorReport>,
    pub summary: Vec<SummaryRow>,
    pub total_herald_probability: f64,
    pub total_false_event_probability: f64,
}

impl ContaminationReport {
    /// No sector contributes heralds or events.
    pub fn is_empty(&self) -> bool {
        self.summary.is_empty()
    }

    pub fn sector(&self, n: u32) -> Option<&SectorReport> {
        self.sectors.iter().find(|s| s.n == n)
    }
}

/// Per-sector herald and false-event analysis of a pair source feeding the
/// chip.
///
/// A target event is a click pattern where each herald mode's tree reports
/// exactly the required number of clicks and the total click count equals
/// `target_photons`. Events from output occupations that do not match the
/// herald pattern with `target_photons` photons are counted as false.
pub fn contamination_report(
    chip: &ChipParams,
    params: &SpdcParams,
    pattern: &HeraldPattern,
    target_photons: u32,
    topology: &Topology,
) -> Result<ContaminationReport> {
    params.validate()?;
    topology.validate()?;
    if 2 * params.n_max < target_photons {
        return Err(Error::Truncation { n_max: params.n_max, photons: target_photons });
    }
    pattern.validate(4)?;
    let u = chip.circuit()?.compile();
    let weights = params.sector_weights();
    let tree_modes = topology.modes();
    let herald_trees: Vec<(usize, u32)> = pattern
        .requirements()
        .iter()
        .map(|(&m, &c)| {
            tree_modes
                .iter()
                .position(|&t| t == m)
                .map(|ti| (ti, c))
                .ok_or_else(|| Error::Config(format!("herald mode {m} has no detector tree")))
        })
        .collect::<Result<_>>()?;
    let free_trees: Vec<usize> = (0..tree_modes.len()).filter(|ti| !herald_trees.iter().any(|(h, _)| h == ti)).collect();
    let free_modes: Vec<usize> = (0..4).filter(|m| !pattern.requirements().contains_key(m)).collect();

    let mut sectors = Vec::new();
    for (n, &weight) in weights.iter().enumerate() {
        if weight == 0.0 {
            continue;
        }
        let n = n as u32;
        let out = apply(&u, &FockState::basis([0, n, n, 0]))?;
        let h = project(&out, pattern)?;
        let conditional_distribution = if h.success {
            let all: Vec<usize> = (0..h.conditional_state.modes()).collect();
            h.conditional_state
                .marginal_distribution(&all)?
                .into_iter()
                .map(|(occ, p)| Outcome { occ, p })
                .collect()
        } else {
            Vec::new()
        };

        let mut event_probability = 0.0;
        let mut false_event_probability = 0.0;
        let mut channels: BTreeMap<(Occupation, Occupation), f64> = BTreeMap::new();
        for (occ, p_occ) in out.marginal_distribution(&tree_modes)? {
            let genuine_occ = {
                let mut full = vec![0; 4];
                for (ti, &m) in tree_modes.iter().enumerate() {
                    full[m] = occ.get(ti);
                }
                Occupation::new(full)
            };
            let genuine = pattern.matches(&genuine_occ) && genuine_occ.total() == target_photons;
            let clicks = crate::detect::click_distribution(&FockState::basis(genuine_occ.clone()), topology)?;
            for (pat, p_click) in clicks {
                if !is_target_event(&pat, topology, &herald_trees, target_photons) {
                    continue;
                }
                let p = p_occ * p_click;
                event_probability += p;
                if !genuine {
                    false_event_probability += p;
                    let apparent = Occupation::new(free_trees.iter().map(|&ti| tree_clicks(&pat, topology, ti)).collect());
                    *channels.entry((apparent, occ.clone())).or_insert(0.0) += p;
                }
            }
        }
        let false_channels = channels
            .into_iter()
            .map(|((apparent, origin), probability)| FalseChannel { apparent, origin, probability })
            .collect();

        let branches = if free_modes.len() == 2 {
            sector_branches(&out, pattern, (free_modes[0], free_modes[1]))
        } else {
            Vec::new()
        };

        sectors.push(SectorReport {
            n,
            weight,
            herald_probability: h.probability,
            conditional_distribution,
            event_probability,
            false_event_probability,
            false_channels,
            branches,
        });
    }

    let summary: Vec<SummaryRow> = sectors
        .iter()
        .filter(|s| s.herald_probability > 0.0 || s.event_probability > 0.0)
        .map(|s| SummaryRow {
            sector: s.n,
            herald_prob: s.weight * s.herald_probability,
            false_event_prob: s.weight * s.false_event_probability,
        })
        .collect();
    Ok(ContaminationReport {
        params: *params,
        chip: *chip,
        pattern: pattern.clone(),
        target_photons,
        total_herald_probability: summary.iter().map(|r| r.herald_prob).sum(),
        total_false_event_probability: summary.iter().map(|r| r.false_event_prob).sum(),
        sectors,
        summary,
    })
}

fn tree_clicks(pat: &ClickPattern, topology: &Topology, ti: usize) -> u32 {
    topology.trees[ti].leaves.iter().filter(|l| pat.contains(&l.det)).count() as u32
}

fn is_target_event(pat: &ClickPattern, topology: &Topology, herald_trees: &[(usize, u32)], target: u32) -> bool {
    pat.fold() == target as usize && herald_trees.iter().all(|&(ti, c)| tree_clicks(pat, topology, ti) == c)
}

/// |N::M⟩ components on `free` for every herald occupation with at least
/// one photon in each herald mode.
fn sector_branches(out: &FockState, pattern: &HeraldPattern, free: (usize, usize)) -> Vec<Branch> {
    let herald_modes: Vec<usize> = pattern.modes().collect();
    let mut fixed_set: BTreeMap<Occupation, ()> = BTreeMap::new();
    for (o, _) in out.terms() {
        let h = o.restrict(&herald_modes);
        if h.counts().iter().all(|&c| c >= 1) {
            fixed_set.insert(h, ());
        }
    }
    let mut branches = Vec::new();
    for h in fixed_set.into_keys() {
        let fixed: BTreeMap<usize, u32> = herald_modes.iter().copied().zip(h.counts().iter().copied()).collect();
        let rest = out.photon_numbers().into_iter().max().unwrap_or(0).saturating_sub(h.total());
        for m in 0..=rest / 2 {
            if rest == 0 {
                break;
            }
            let n = rest - m;
            let (magnitude, alpha) = branch(out, &fixed, free, n, m);
            if magnitude > 1e-12 {
                branches.push(Branch { herald: h.clone(), n, m, magnitude, alpha });
            }
        }
    }
    branches
}
