//! Threshold detectors on splitter trees: resolution probabilities and the
//! click statistics of a heralded state.

use std::collections::BTreeSet;

use heraldsim::circuit::ChipParams;
use heraldsim::detect::{cascade_resolve_probability, click_distribution, SplitterTree, Topology};
use heraldsim::fock::FockState;
use heraldsim::herald::{heralded_output, HeraldPattern};

fn main() -> heraldsim::Result<()> {
    let tree = SplitterTree::uniform(1, "Dj", 4);
    for n in 1..=4u32 {
        let targets: BTreeSet<String> = (1..=n).map(|k| format!("Dj{k}")).collect();
        println!("{n} photons on {n} given leaves: {:.6}", cascade_resolve_probability(&tree, n, &targets)?);
    }

    let r = heralded_output(&ChipParams::default(), &FockState::basis([0, 2, 2, 0]), &HeraldPattern::chip_default())?;
    let state = FockState::basis([1]).tensor(&r.conditional_state).tensor(&FockState::basis([1]));
    let mut clicks: Vec<_> = click_distribution(&state, &Topology::six_fold())?.into_iter().collect();
    clicks.sort_by(|a, b| b.1.total_cmp(&a.1));
    println!("most likely click patterns:");
    for (pattern, p) in clicks.iter().take(6) {
        println!("  {pattern}: {p:.4}");
    }
    Ok(())
}
