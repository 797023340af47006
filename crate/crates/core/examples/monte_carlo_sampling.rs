//! Seeded, parallel sampling of output occupations compared with the exact
//! distribution.

use heraldsim::circuit::ChipParams;
use heraldsim::detect::total_variation;
use heraldsim::evolve::{apply, histogram, OutputSampler};
use heraldsim::fock::FockState;

fn main() -> heraldsim::Result<()> {
    let chip = ChipParams::default().with_phi(0.7);
    let out = apply(&chip.circuit()?.compile(), &FockState::basis([0, 2, 2, 0]))?;
    let exact = out.marginal_distribution(&[0, 1, 2, 3])?;
    let sampler = OutputSampler::from_distribution(&exact)?;
    for shots in [1_000, 10_000, 100_000] {
        let draws = sampler.sample_many(shots, 7, 8);
        println!("{shots:>7} shots: TV = {:.4}", total_variation(&histogram(&draws), &exact));
    }
    let again = sampler.sample_many(1_000, 7, 8) == sampler.sample_many(1_000, 7, 8);
    println!("same seed reproduces samples: {again}");
    Ok(())
}
