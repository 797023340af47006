//! Clock-synchronized coincidence counting: analytic trapezoid versus
//! Monte Carlo, and counting an explicit pulse stream.

use heraldsim::coinc::{count_coincidences, monte_carlo_profile, window_profile, CoincidenceConfig, PulseEvent};

fn main() -> heraldsim::Result<()> {
    let cfg = CoincidenceConfig::default();
    println!("delay_ns  analytic  simulated");
    for k in 0..=12 {
        let d = k as f64;
        println!("{d:8.1}  {:8.4}  {:9.4}", window_profile(d, &cfg), monte_carlo_profile(d, &cfg, 20_000, k)?);
    }
    let pulses: Vec<PulseEvent> = (0..5)
        .flat_map(|k| {
            let t = 100.0 * k as f64 + 10.0;
            [PulseEvent::new("A", t), PulseEvent::new("B", t + 2.0 * k as f64)]
        })
        .collect();
    for (channels, n) in count_coincidences(&pulses, &cfg)? {
        println!("{:?}: {n}", channels);
    }
    Ok(())
}
