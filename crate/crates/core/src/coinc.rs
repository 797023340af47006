//! Clocked coincidence counting.
//!
//! Pulse edges are latched on the next tick of a free-running clock. Events
//! whose ticks lie fewer than `window_cycles` apart form one record; two or
//! more distinct channels in a record make a coincidence. Under an unknown
//! clock phase this turns a nominal window of `window_cycles · t_clk` into a
//! trapezoid in the true delay.

use std::collections::{BTreeMap, BTreeSet};
use std::io::{Read, Write};

use rand::SeedableRng;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance, in clock periods, for treating an edge as lying on a tick.
const TICK_EPS: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PulseEvent {
    pub channel: String,
    /// Rising-edge time in ns.
    #[serde(rename = "t_ns")]
    pub t: f64,
}

impl PulseEvent {
    pub fn new(channel: impl Into<String>, t: f64) -> Self {
        PulseEvent { channel: channel.into(), t }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CoincidenceConfig {
    /// Clock period in ns.
    pub t_clk: f64,
    pub window_cycles: u32,
    /// Upper bound on distinct channels in a stream.
    pub n_channels: usize,
    /// Time of tick 0, in [0, t_clk).
    pub clock_phase: f64,
    /// Pulses on one channel closer than this (ns) merge into the first.
    pub dead_time: f64,
    /// Gaussian timestamp noise (ns); 0 disables it.
    pub jitter_sigma: f64,
    pub jitter_seed: u64,
}

impl Default for CoincidenceConfig {
    fn default() -> Self {
        CoincidenceConfig {
            t_clk: 2.9,
            window_cycles: 3,
            n_channels: 8,
            clock_phase: 0.0,
            dead_time: 50.0,
            jitter_sigma: 0.0,
            jitter_seed: 0,
        }
    }
}

impl CoincidenceConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.t_clk > 0.0) {
            return Err(Error::InvalidParameter { name: "t_clk", value: self.t_clk, reason: "must be positive" });
        }
        if self.window_cycles < 1 {
            return Err(Error::InvalidParameter { name: "window_cycles", value: 0.0, reason: "must be at least 1" });
        }
        if !(0.0..self.t_clk).contains(&self.clock_phase) {
            return Err(Error::InvalidParameter { name: "clock_phase", value: self.clock_phase, reason: "must lie in [0, t_clk)" });
        }
        if !(self.dead_time >= 0.0) {
            return Err(Error::InvalidParameter { name: "dead_time", value: self.dead_time, reason: "must be non-negative" });
        }
        if !(self.jitter_sigma >= 0.0) {
            return Err(Error::InvalidParameter { name: "jitter_sigma", value: self.jitter_sigma, reason: "must be non-negative" });
        }
        Ok(())
    }

    /// Nominal window T_IC = window_cycles · t_clk.
    pub fn window(&self) -> f64 {
        self.window_cycles as f64 * self.t_clk
    }
}

/// A pulse latched on clock tick `tick`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SyncEvent {
    pub channel: String,
    pub tick: i64,
}

/// Index of the first tick at or after `t`.
pub fn tick_of(t: f64, t_clk: f64, clock_phase: f64) -> i64 {
    ((t - clock_phase) / t_clk - TICK_EPS).ceil() as i64
}

/// Maps each event to the first clock tick at or after its timestamp.
pub fn synchronize(events: &[PulseEvent], t_clk: f64, clock_phase: f64) -> Vec<SyncEvent> {
    events
        .iter()
        .map(|e| SyncEvent { channel: e.channel.clone(), tick: tick_of(e.t, t_clk, clock_phase) })
        .collect()
}

/// Drops pulses that arrive within `dead_time` of the last kept pulse on
/// the same channel. Expects time-sorted input.
pub fn apply_dead_time(events: &[PulseEvent], dead_time: f64) -> Vec<PulseEvent> {
    let mut last: BTreeMap<&str, f64> = BTreeMap::new();
    let mut out = Vec::with_capacity(events.len());
    for e in events {
        match last.get(e.channel.as_str()) {
            Some(&t0) if e.t - t0 < dead_time => {}
            _ => {
                last.insert(&e.channel, e.t);
                out.push(e.clone());
            }
        }
    }
    out
}

fn check_events(events: &[PulseEvent], config: &CoincidenceConfig) -> Result<()> {
    config.validate()?;
    if let Some(e) = events.iter().find(|e| !(e.t >= 0.0)) {
        return Err(Error::InvalidParameter { name: "t", value: e.t, reason: "pulse times must be non-negative" });
    }
    let channels: BTreeSet<&str> = events.iter().map(|e| e.channel.as_str()).collect();
    if channels.len() > config.n_channels {
        return Err(Error::Config(format!("{} channels in stream, configured for {}", channels.len(), config.n_channels)));
    }
    Ok(())
}

/// Jitter, sort, dead time and clock synchronization, in that order.
pub fn prepare(events: &[PulseEvent], config: &CoincidenceConfig) -> Result<Vec<SyncEvent>> {
    check_events(events, config)?;
    let mut ev = events.to_vec();
    if config.jitter_sigma > 0.0 {
        let normal = Normal::new(0.0, config.jitter_sigma)
            .map_err(|_| Error::InvalidParameter { name: "jitter_sigma", value: config.jitter_sigma, reason: "invalid" })?;
        let mut rng = ChaCha8Rng::seed_from_u64(config.jitter_seed);
        for e in &mut ev {
            e.t = (e.t + normal.sample(&mut rng)).max(0.0);
        }
    }
    ev.sort_by(|a, b| a.t.total_cmp(&b.t));
    let ev = apply_dead_time(&ev, config.dead_time);
    Ok(synchronize(&ev, config.t_clk, config.clock_phase))
}

/// Counts coincidence records by the set of channels that fired.
///
/// Records are formed greedily: the earliest unassigned event opens a
/// window, every later event less than `window_cycles` ticks after it joins,
/// and the next record starts at the first event outside. Each event belongs
/// to at most one record.
pub fn count_coincidences(events: &[PulseEvent], config: &CoincidenceConfig) -> Result<BTreeMap<BTreeSet<String>, u64>> {
    let sync = prepare(events, config)?;
    Ok(group_synchronized(&sync, config.window_cycles))
}

/// Greedy grouping of already synchronized, tick-sorted events.
pub fn group_synchronized(sync: &[SyncEvent], window_cycles: u32) -> BTreeMap<BTreeSet<String>, u64> {
    let mut out = BTreeMap::new();
    let mut i = 0;
    while i < sync.len() {
        let start = sync[i].tick;
        let mut channels = BTreeSet::new();
        let mut j = i;
        while j < sync.len() && sync[j].tick - start < window_cycles as i64 {
            channels.insert(sync[j].channel.clone());
            j += 1;
        }
        if channels.len() >= 2 {
            *out.entry(channels).or_insert(0) += 1;
        }
        i = j;
    }
    out
}

/// Probability that two pulses `delay` ns apart are counted together when
/// the clock phase is uniformly random: 1 up to T_IC − T_clk, falling
/// linearly to 0 at T_IC.
pub fn window_profile(delay: f64, config: &CoincidenceConfig) -> f64 {
    let d = delay.abs();
    let t_ic = config.window();
    let flat = t_ic - config.t_clk;
    if d <= flat {
        1.0
    } else if d < t_ic {
        (t_ic - d) / config.t_clk
    } else {
        0.0
    }
}

/// Fraction of `trials` two-channel pulse pairs at `delay` that register a
/// coincidence, drawing the clock phase uniformly per trial.
pub fn monte_carlo_profile(delay: f64, config: &CoincidenceConfig, trials: usize, seed: u64) -> Result<f64> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let t0 = 10.0 * config.window();
    let mut hits = 0usize;
    for _ in 0..trials {
        let phase = rng.random_range(0.0..config.t_clk);
        // two pulses on distinct channels: one record iff their ticks are close
        let gap = tick_of(t0 + delay, config.t_clk, phase) - tick_of(t0, config.t_clk, phase);
        if gap.abs() < config.window_cycles as i64 {
            hits += 1;
        }
    }
    Ok(hits as f64 / trials as f64)
}

/// `(delay, analytic, simulated)` for each delay, simulated in parallel with
/// one seed per delay.
pub fn delay_sweep(delays: &[f64], config: &CoincidenceConfig, trials: usize, seed: u64) -> Result<Vec<(f64, f64, f64)>> {
    delays
        .par_iter()
        .enumerate()
        .map(|(k, &d)| Ok((d, window_profile(d, config), monte_carlo_profile(d, config, trials, seed.wrapping_add(k as u64))?)))
        .collect()
}

/// Reads a `channel,t_ns` CSV with a header row.
pub fn read_pulses<R: Read>(reader: R) -> Result<Vec<PulseEvent>> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    rdr.deserialize().map(|r| r.map_err(Error::from)).collect()
}

pub fn write_pulses<W: Write>(writer: W, events: &[PulseEvent]) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    for e in events {
        w.serialize(e)?;
    }
    w.flush()?;
    Ok(())
}

/// Writes `channels,count` rows, channels joined by `;`.
pub fn write_coincidences<W: Write>(writer: W, counts: &BTreeMap<BTreeSet<String>, u64>) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["channels", "count"])?;
    for (set, n) in counts {
        w.write_record([set.iter().cloned().collect::<Vec<_>>().join(";"), n.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_coincidences<R: Read>(reader: R) -> Result<BTreeMap<BTreeSet<String>, u64>> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let mut out = BTreeMap::new();
    for rec in rdr.records() {
        let rec = rec?;
        let set = rec.get(0).unwrap_or("").split(';').filter(|s| !s.is_empty()).map(String::from).collect();
        let n = rec
            .get(1)
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| Error::Config(format!("bad count in coincidence row {:?}", rec)))?;
        out.insert(set, n);
    }
    Ok(out)
}
