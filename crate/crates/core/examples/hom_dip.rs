//! Two-photon interference on a balanced coupler, and the 2&2 visibility
//! as photon distinguishability grows.

use heraldsim::circuit::Interferometer;
use heraldsim::evolve::{amplitude, output_distribution};
use heraldsim::fock::Occupation;
use heraldsim::source::{hom_dip, SpdcParams};

fn main() -> heraldsim::Result<()> {
    let u = Interferometer::new(2).dc(0.5, 0, 1)?.compile();
    let one = Occupation::from([1, 1]);
    println!("<1,1|U|1,1> = {:.3e}", amplitude(&u, &one, &one).norm());
    for (occ, p) in output_distribution(&u, &one)? {
        println!("  P({occ}) = {p:.4}");
    }
    println!("2&2 visibility vs overlap:");
    for k in 0..=5 {
        let overlap = k as f64 / 5.0;
        let v = hom_dip(&SpdcParams::new(0.1, 4)?.with_overlap(overlap), 0.5)?;
        println!("  overlap {overlap:.1}: V = {v:.4}");
    }
    Ok(())
}
