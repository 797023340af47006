//! Fringe periods: one photon versus heralded six-photon events, and N-fold
//! frequency of |N::M> states behind a phase and a balanced coupler.

use heraldsim::analysis::*;

fn main() -> heraldsim::Result<()> {
    let grid = dense_grid(256);
    let period = |s: &FringeScenario| -> heraldsim::Result<f64> {
        Ok(fringe_period(&fringe_scan(s, &grid)?)?.period.unwrap_or(f64::NAN))
    };
    let single = period(&single_photon_chip())?;
    let six = period(&six_photon_chip(4, 0))?;
    println!("chip: single photon {single:.4}, six-photon {six:.4}, ratio {:.3}", single / six);
    let base = period(&single_photon_readout())?;
    for (n, m, out) in [(2, 0, [1, 1]), (3, 1, [4, 0]), (4, 0, [3, 1])] {
        let p = period(&noon_readout(n, m, out))?;
        println!("|{n}::{m}>: period {p:.4}, frequency x{:.3}", base / p);
    }
    let four = fringe_scan(&six_photon_chip(4, 0), &four_point_grid())?;
    println!("four-point scan: {}", describe_fringe(&four).note.unwrap_or_default());
    Ok(())
}
