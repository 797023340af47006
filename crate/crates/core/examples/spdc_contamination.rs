//! Higher-order pair emission: per-sector herald rates, false six-fold
//! events, and the eight-photon branches.

use std::f64::consts::FRAC_PI_2;

use heraldsim::circuit::ChipParams;
use heraldsim::detect::Topology;
use heraldsim::herald::HeraldPattern;
use heraldsim::source::{contamination_report, SpdcParams};

fn main() -> heraldsim::Result<()> {
    let chip = ChipParams::default().with_phi(FRAC_PI_2);
    let params = SpdcParams::new(0.085, 4)?;
    let r = contamination_report(&chip, &params, &HeraldPattern::chip_default(), 6, &Topology::six_fold())?;
    for row in &r.summary {
        println!("sector {}: herald {:.3e}, false {:.3e}", row.sector, row.herald_prob, row.false_event_prob);
    }
    if let Some(s) = r.sector(4) {
        let mut channels = s.false_channels.clone();
        channels.sort_by(|a, b| b.probability.total_cmp(&a.probability));
        for c in channels.iter().take(5) {
            println!("false {} from {}: {:.3e}", c.apparent, c.origin, c.probability);
        }
        for b in s.branches.iter().filter(|b| b.magnitude > 1e-3).take(8) {
            println!("herald {} |{}::{}>: |c| = {:.6}, alpha = {:.4}", b.herald, b.n, b.m, b.magnitude, b.alpha);
        }
    }
    Ok(())
}
