//! Heralding |2::0> from |2,2> on the four-mode chip.

use heraldsim::circuit::ChipParams;
use heraldsim::fock::FockState;
use heraldsim::herald::{heralded_output, HeraldPattern};

fn main() -> heraldsim::Result<()> {
    let input = FockState::basis([0, 2, 2, 0]);
    for taps in [1.0 / 3.0, 0.5] {
        let chip = ChipParams::default().with_taps(taps);
        let r = heralded_output(&chip, &input, &HeraldPattern::chip_default())?;
        println!("taps {taps:.4}: herald probability {:.6}", r.probability);
        println!("  state on (j, k): {}", r.conditional_state);
    }
    Ok(())
}
