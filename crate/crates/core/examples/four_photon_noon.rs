//! Heralding four-photon states from |3,3>: the phase selects between
//! |4::0> and |3::1>.

use std::f64::consts::FRAC_PI_2;

use heraldsim::circuit::ChipParams;
use heraldsim::fock::{noon, FockState};
use heraldsim::herald::{heralded_output, HeraldPattern};

fn main() -> heraldsim::Result<()> {
    let input = FockState::basis([0, 3, 3, 0]);
    let (a, b) = (noon(4, 0, std::f64::consts::PI), noon(3, 1, 0.0));
    for phi in [0.0, FRAC_PI_2 / 2.0, FRAC_PI_2] {
        let chip = ChipParams::default().with_taps(0.5).with_phi(phi);
        let r = heralded_output(&chip, &input, &HeraldPattern::chip_default())?;
        println!(
            "phi {phi:.3}: P = {:.6}, F(4::0) = {:.4}, F(3::1) = {:.4}",
            r.probability,
            r.conditional_state.fidelity(&a)?,
            r.conditional_state.fidelity(&b)?
        );
    }
    Ok(())
}
