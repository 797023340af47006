//! Fabrication error in the outer couplers and its effect on the heralded
//! photon statistics.

use heraldsim::detect::{fidelity, simulated_reference_distribution};
use heraldsim::fock::FockState;
use heraldsim::herald::HeraldPattern;

fn main() -> heraldsim::Result<()> {
    let pattern = HeraldPattern::chip_default();
    for (label, input) in [("|2,2>", [0, 2, 2, 0]), ("|3,3>", [0, 3, 3, 0])] {
        let input = FockState::basis(input);
        for k in 0..4 {
            let phi = k as f64 * std::f64::consts::FRAC_PI_4;
            let ideal = simulated_reference_distribution(0.5, 0.5, &input, &pattern, phi)?;
            let real = simulated_reference_distribution(0.542, 0.530, &input, &pattern, phi)?;
            println!("{label} phi {phi:.3}: F = {:.4}", fidelity(&real, &ideal)?);
        }
    }
    Ok(())
}
