//! Sending the heralded pair back through the chip separates a coherent
//! |2::0> from its dephased mixture.

use heraldsim::analysis::{dephase, sagnac_reverse, sagnac_scenario};
use heraldsim::circuit::ChipParams;
use heraldsim::fock::{noon, FockState, Occupation};
use heraldsim::herald::HeraldPattern;

fn main() -> heraldsim::Result<()> {
    let chip = ChipParams::default().with_taps(0.5);
    let target = Occupation::from([1, 1]);
    let pure = sagnac_scenario(&chip, &FockState::basis([0, 2, 2, 0]), &HeraldPattern::chip_default())?;
    let mixed = sagnac_reverse(&dephase(&noon(2, 0, 0.0)), chip.eta2, chip.eta3, chip.eta4)?;
    println!("P(1,1 | two photons out): pure {:.4}, dephased {:.4}", pure.two_photon[&target], mixed.two_photon[&target]);
    Ok(())
}
