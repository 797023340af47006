//! Declarative scenario files and the runs behind the `heraldsim` binary.
//!
//! A scenario is a JSON document naming a circuit, an input, a herald
//! pattern and optionally a detection topology, a phase sweep and Monte
//! Carlo settings. Each `run_*` function turns one into a set of output
//! files plus a short text summary; nothing here touches global state, so
//! identical configs and seeds give byte-identical files.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::analysis::{dense_grid, describe_fringe, dephase, four_point_grid, fringe_scan, sagnac_reverse, FringeScenario, PhaseCircuit};
use crate::circuit::{CMatrix, ChipParams, Interferometer};
use crate::coinc::{count_coincidences, delay_sweep, read_pulses, write_coincidences, CoincidenceConfig};
use crate::detect::{click_distribution, fidelity, sample_click_patterns, total_variation, Topology};
use crate::error::{Error, Result};
use crate::evolve::{apply, histogram, OutputSampler};
use crate::fock::{FockState, Occupation, C64};
use crate::herald::{project, HeraldPattern};
use crate::rng::DEFAULT_WORKERS;
use crate::source::{chip_input, contamination_report, SpdcParams};

/// Named scenarios shipped with the binary.
pub const PRESETS: &[&str] = &["fig2a", "fig2b-sagnac", "fig3a", "fig3b", "fig3b-4pt", "fig4", "contamination", "coincidence-window"];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CircuitSpec {
    Chip(ChipParams),
    Inline(Interferometer),
    /// Path to an interferometer JSON file, relative to the scenario file.
    File(PathBuf),
    /// Raw transfer matrix as real and imaginary parts.
    Matrix { re: Vec<Vec<f64>>, im: Vec<Vec<f64>> },
}

/// Exactly one input source.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InputSpec {
    Fock(Occupation),
    State(FockState),
    /// Pair source on chip inputs b, c.
    Spdc(SpdcParams),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DetectionSpec {
    Preset(String),
    File(PathBuf),
    Inline(Topology),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Grid {
    /// Equally spaced points on [0, 2π).
    Dense(usize),
    Points(Vec<f64>),
}

impl Grid {
    pub fn points(&self) -> Vec<f64> {
        match self {
            Grid::Dense(n) => dense_grid(*n),
            Grid::Points(p) => p.clone(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SweepParameter {
    Phi,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub parameter: SweepParameter,
    pub grid: Grid,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub circuit: Option<CircuitSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub input: Option<InputSpec>,
    /// Exact photon counts to condition on (simulate, contamination) or to
    /// track (fringe).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub herald: Option<HeraldPattern>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub detection: Option<DetectionSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepSpec>,
    #[serde(default)]
    pub seed: u64,
    /// Monte Carlo shots; 0 skips sampling.
    #[serde(default)]
    pub shots: usize,
    /// Photon number of a target event in contamination analysis.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target_photons: Option<u32>,
    /// Also send the heralded state around the Sagnac loop.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub sagnac: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coincidence: Option<CoincidenceConfig>,
    #[serde(skip)]
    pub base_dir: Option<PathBuf>,
}

impl ScenarioConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    /// Parses a scenario file; file references resolve against its directory.
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        let mut cfg = Self::from_json(&text)?;
        cfg.base_dir = path.parent().map(Path::to_path_buf);
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn preset(name: &str) -> Option<Self> {
        let chip = |phi| Some(CircuitSpec::Chip(ChipParams::default().with_phi(phi)));
        let fock = |o: [u32; 4]| Some(InputSpec::Fock(o.into()));
        let six_fold = || Some(DetectionSpec::Preset("paper-6fold".into()));
        let herald = Some(HeraldPattern::chip_default());
        let mut cfg = ScenarioConfig { name: Some(name.into()), seed: 1, ..Default::default() };
        match name {
            "fig2a" | "fig2b-sagnac" => {
                cfg.circuit = chip(0.0);
                cfg.input = fock([0, 2, 2, 0]);
                cfg.herald = herald;
                cfg.detection = six_fold();
                cfg.shots = 100_000;
                cfg.sagnac = name == "fig2b-sagnac";
            }
            "fig3a" => {
                cfg.circuit = chip(0.0);
                cfg.input = fock([0, 1, 0, 0]);
                cfg.herald = HeraldPattern::new([(1, 1)]).ok();
                cfg.sweep = Some(SweepSpec { parameter: SweepParameter::Phi, grid: Grid::Dense(256) });
            }
            "fig3b" | "fig3b-4pt" => {
                cfg.circuit = chip(0.0);
                cfg.input = fock([0, 3, 3, 0]);
                cfg.herald = HeraldPattern::new([(0, 1), (1, 4), (2, 0), (3, 1)]).ok();
                let grid = if name == "fig3b" { Grid::Dense(256) } else { Grid::Points(four_point_grid()) };
                cfg.sweep = Some(SweepSpec { parameter: SweepParameter::Phi, grid });
            }
            "fig4" => {
                cfg.circuit = chip(PI / 2.0);
                cfg.input = fock([0, 3, 3, 0]);
                cfg.herald = herald;
                cfg.detection = six_fold();
                cfg.shots = 100_000;
            }
            "contamination" => {
                cfg.circuit = chip(PI / 2.0);
                cfg.input = Some(InputSpec::Spdc(SpdcParams { xi: 0.085, n_max: 4, overlap: 1.0 }));
                cfg.herald = herald;
                cfg.detection = six_fold();
                cfg.target_photons = Some(6);
            }
            "coincidence-window" => {
                cfg.coincidence = Some(CoincidenceConfig::default());
                cfg.shots = 100_000;
            }
            _ => return None,
        }
        Some(cfg)
    }

    fn resolve_path(&self, p: &Path) -> PathBuf {
        match &self.base_dir {
            Some(d) if p.is_relative() => d.join(p),
            _ => p.to_path_buf(),
        }
    }

    /// Checks that referenced files exist and the parts present are sound.
    pub fn validate(&self) -> Result<()> {
        if let Some(CircuitSpec::File(p)) = &self.circuit {
            let p = self.resolve_path(p);
            if !p.is_file() {
                return Err(Error::Config(format!("circuit file {} not found", p.display())));
            }
        }
        if let Some(DetectionSpec::File(p)) = &self.detection {
            let p = self.resolve_path(p);
            if !p.is_file() {
                return Err(Error::Config(format!("detection file {} not found", p.display())));
            }
        }
        if let Some(DetectionSpec::Preset(name)) = &self.detection {
            if Topology::preset(name).is_none() {
                return Err(Error::Config(format!("unknown detection preset `{name}`")));
            }
        }
        if let Some(InputSpec::Spdc(p)) = &self.input {
            p.validate()?;
        }
        if let Some(c) = &self.coincidence {
            c.validate()?;
        }
        Ok(())
    }

    fn circuit_spec(&self) -> Result<&CircuitSpec> {
        self.circuit.as_ref().ok_or_else(|| Error::Config("scenario has no circuit".into()))
    }

    fn load_interferometer(&self, p: &Path) -> Result<Interferometer> {
        let p = self.resolve_path(p);
        let text = std::fs::read_to_string(&p).map_err(|e| Error::Config(format!("cannot read {}: {e}", p.display())))?;
        Ok(serde_json::from_str(&text)?)
    }

    /// Transfer matrix and the number of system (non-environment) modes.
    pub fn resolve_matrix(&self) -> Result<(CMatrix, usize)> {
        let from = |i: Interferometer| (i.compile(), i.modes());
        Ok(match self.circuit_spec()? {
            CircuitSpec::Chip(c) => from(c.circuit()?),
            CircuitSpec::Inline(i) => from(i.clone()),
            CircuitSpec::File(p) => from(self.load_interferometer(p)?),
            CircuitSpec::Matrix { re, im } => {
                let n = re.len();
                if im.len() != n || re.iter().chain(im).any(|r| r.len() != n) {
                    return Err(Error::Config("matrix parts must be square and of equal size".into()));
                }
                (CMatrix::from_fn(n, n, |r, c| C64::new(re[r][c], im[r][c])), n)
            }
        })
    }

    fn phase_circuit(&self) -> Result<PhaseCircuit> {
        Ok(match self.circuit_spec()? {
            CircuitSpec::Chip(c) => PhaseCircuit::Chip(*c),
            CircuitSpec::Inline(i) => PhaseCircuit::Custom(i.clone()),
            CircuitSpec::File(p) => PhaseCircuit::Custom(self.load_interferometer(p)?),
            CircuitSpec::Matrix { .. } => return Err(Error::Config("a raw matrix has no phase to sweep".into())),
        })
    }

    pub fn resolve_input(&self) -> Result<FockState> {
        match self.input.as_ref().ok_or_else(|| Error::Config("scenario has no input".into()))? {
            InputSpec::Fock(o) => Ok(FockState::basis(o.clone())),
            InputSpec::State(s) => Ok(s.clone()),
            InputSpec::Spdc(p) => chip_input(p),
        }
    }

    pub fn resolve_topology(&self) -> Result<Option<Topology>> {
        let t = match &self.detection {
            None => return Ok(None),
            Some(DetectionSpec::Preset(name)) => {
                Topology::preset(name).ok_or_else(|| Error::Config(format!("unknown detection preset `{name}`")))?
            }
            Some(DetectionSpec::Inline(t)) => t.clone(),
            Some(DetectionSpec::File(p)) => {
                let p = self.resolve_path(p);
                let text = std::fs::read_to_string(&p).map_err(|e| Error::Config(format!("cannot read {}: {e}", p.display())))?;
                serde_json::from_str(&text)?
            }
        };
        t.validate()?;
        Ok(Some(t))
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

impl FromStr for OutputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            _ => Err(Error::Config(format!("unknown format `{s}`"))),
        }
    }
}

/// Files produced by a run, in write order, plus a human-readable summary.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct RunOutput {
    pub files: Vec<(String, String)>,
    pub summary: String,
}

impl RunOutput {
    pub fn file(&self, name: &str) -> Option<&str> {
        self.files.iter().find(|(n, _)| n == name).map(|(_, c)| c.as_str())
    }

    pub fn write_to(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        for (name, content) in &self.files {
            std::fs::write(dir.join(name), content)?;
        }
        Ok(())
    }

    fn push(&mut self, name: impl Into<String>, content: String) {
        self.files.push((name.into(), content));
    }
}

fn occ_label(o: &Occupation) -> String {
    o.counts().iter().map(|c| c.to_string()).collect::<Vec<_>>().join(",")
}

fn csv_table<I, R>(header: &[&str], rows: I) -> Result<String>
where
    I: IntoIterator<Item = R>,
    R: IntoIterator<Item = String>,
{
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header)?;
    for r in rows {
        w.write_record(r)?;
    }
    String::from_utf8(w.into_inner().map_err(|e| Error::Io(e.into_error()))?)
        .map_err(|e| Error::Config(e.to_string()))
}

fn json<T: Serialize + ?Sized>(v: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(v)?;
    s.push('\n');
    Ok(s)
}

/// A distribution as `outcome,probability` CSV or a JSON list, in key order.
fn write_distribution<K: Ord>(
    out: &mut RunOutput,
    stem: &str,
    dist: &BTreeMap<K, f64>,
    label: impl Fn(&K) -> String,
    format: OutputFormat,
) -> Result<()> {
    match format {
        OutputFormat::Csv => {
            let rows = dist.iter().map(|(k, p)| [label(k), p.to_string()]);
            out.push(format!("{stem}.csv"), csv_table(&["outcome", "probability"], rows)?);
        }
        OutputFormat::Json => {
            #[derive(Serialize)]
            struct Row {
                outcome: String,
                probability: f64,
            }
            let rows: Vec<Row> = dist.iter().map(|(k, p)| Row { outcome: label(k), probability: *p }).collect();
            out.push(format!("{stem}.json"), json(&rows)?);
        }
    }
    Ok(())
}

/// Reads an `outcome,probability` CSV.
pub fn read_distribution(path: &Path) -> Result<BTreeMap<String, f64>> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
    let mut out = BTreeMap::new();
    for rec in rdr.records() {
        let rec = rec?;
        let (Some(k), Some(v)) = (rec.get(0), rec.get(1)) else {
            return Err(Error::Config(format!("{}: expected outcome,probability rows", path.display())));
        };
        let p: f64 = v.parse().map_err(|_| Error::Config(format!("{}: bad probability `{v}`", path.display())))?;
        *out.entry(k.to_string()).or_insert(0.0) += p;
    }
    Ok(out)
}

#[derive(Serialize)]
struct HeraldReport<'a> {
    probability: f64,
    success: bool,
    remaining_modes: &'a [usize],
    raw_amplitude_norm: f64,
}

/// Evolves the input, applies the herald and writes the conditional state,
/// herald report and photon statistics; optionally click patterns, Monte
/// Carlo samples and the Sagnac return path.
pub fn run_simulate(cfg: &ScenarioConfig, format: OutputFormat) -> Result<RunOutput> {
    let (u, modes) = cfg.resolve_matrix()?;
    let mut input = cfg.resolve_input()?;
    if input.modes() != modes {
        return Err(Error::ModeMismatch { expected: modes, got: input.modes() });
    }
    if u.nrows() > modes {
        input = input.tensor(&FockState::vacuum(u.nrows() - modes));
    }
    let out_state = apply(&u, &input)?;
    let pattern = cfg.herald.clone().unwrap_or_default();
    pattern.validate(modes)?;
    let h = project(&out_state, &pattern)?;
    let keep: Vec<usize> = (0..h.remaining_modes.len()).filter(|&i| h.remaining_modes[i] < modes).collect();
    let dist = if h.success { h.conditional_state.marginal_distribution(&keep)? } else { BTreeMap::new() };

    let mut out = RunOutput::default();
    let mut summary = String::new();
    out.push("state.json", json(&h.conditional_state)?);
    out.push(
        "herald.json",
        json(&HeraldReport {
            probability: h.probability,
            success: h.success,
            remaining_modes: &h.remaining_modes,
            raw_amplitude_norm: h.raw_amplitude_norm,
        })?,
    );
    write_distribution(&mut out, "distribution", &dist, occ_label, format)?;
    let _ = writeln!(summary, "herald probability: {}", h.probability);
    if !h.success {
        let _ = writeln!(summary, "herald never fires for this input");
    }
    for (o, p) in &dist {
        let _ = writeln!(summary, "  {o}  {p:.6}");
    }

    if let Some(topo) = cfg.resolve_topology()? {
        let clicks = click_distribution(&out_state, &topo)?;
        write_distribution(&mut out, "clicks", &clicks, |p| p.to_string(), format)?;
        if cfg.shots > 0 {
            let samples = sample_click_patterns(&out_state, &topo, cfg.shots, cfg.seed, DEFAULT_WORKERS)?;
            let hist = histogram(&samples);
            let _ = writeln!(summary, "click patterns: total variation of {} samples = {:.5}", cfg.shots, total_variation(&hist, &clicks));
            write_distribution(&mut out, "clicks_sampled", &hist, |p| p.to_string(), format)?;
        }
    }

    if cfg.shots > 0 {
        let sys: Vec<usize> = (0..modes).collect();
        let sampler = OutputSampler::from_distribution(&out_state.marginal_distribution(&sys)?)?;
        let samples = sampler.sample_many(cfg.shots, cfg.seed, DEFAULT_WORKERS);
        let rest: Vec<usize> = (0..modes).filter(|m| !pattern.requirements().contains_key(m)).collect();
        let heralded: Vec<Occupation> = samples.iter().filter(|o| pattern.matches(o)).map(|o| o.restrict(&rest)).collect();
        let freq = heralded.len() as f64 / cfg.shots as f64;
        let _ = writeln!(summary, "sampled herald frequency: {freq} ({} of {} shots)", heralded.len(), cfg.shots);
        write_distribution(&mut out, "sampled", &histogram(&heralded), occ_label, format)?;
    }

    if cfg.sagnac {
        if !h.success || h.remaining_modes != [1, 2] {
            return Err(Error::Config("the Sagnac return path needs a heralded state on modes j, k".into()));
        }
        let chip = match cfg.circuit_spec()? {
            CircuitSpec::Chip(c) => *c,
            _ => return Err(Error::Config("the Sagnac return path needs a chip circuit".into())),
        };
        let pure = sagnac_reverse(&vec![(1.0, h.conditional_state.clone())], chip.eta2, chip.eta3, chip.eta4)?;
        let mixed = sagnac_reverse(&dephase(&h.conditional_state), chip.eta2, chip.eta3, chip.eta4)?;
        let keys: std::collections::BTreeSet<&Occupation> = pure.raw.keys().chain(mixed.raw.keys()).collect();
        let get = |m: &BTreeMap<Occupation, f64>, k: &Occupation| m.get(k).copied().unwrap_or(0.0).to_string();
        let rows = keys.into_iter().map(|k| {
            [occ_label(k), get(&pure.raw, k), get(&mixed.raw, k), get(&pure.two_photon, k), get(&mixed.two_photon, k)]
        });
        out.push("sagnac.csv", csv_table(&["outcome", "pure", "dephased", "pure_two_photon", "dephased_two_photon"], rows)?);
        let p11 = |m: &BTreeMap<Occupation, f64>| m.get(&Occupation::from([1, 1])).copied().unwrap_or(0.0);
        let _ = writeln!(summary, "sagnac P(1,1 | two photons): pure {:.6}, dephased {:.6}", p11(&pure.two_photon), p11(&mixed.two_photon));
    }
    out.summary = summary;
    Ok(out)
}

/// Probability of the scenario's herald pattern over the phase sweep, and
/// the fitted period.
pub fn run_fringe(cfg: &ScenarioConfig, format: OutputFormat) -> Result<RunOutput> {
    let sweep = cfg.sweep.as_ref().ok_or_else(|| Error::Config("fringe needs a sweep".into()))?;
    let pattern = cfg.herald.clone().ok_or_else(|| Error::Config("fringe needs a detection pattern in `herald`".into()))?;
    let scenario = FringeScenario { circuit: cfg.phase_circuit()?, input: cfg.resolve_input()?, pattern };
    let samples = fringe_scan(&scenario, &sweep.grid.points())?;
    let fit = describe_fringe(&samples);

    let mut out = RunOutput::default();
    match format {
        OutputFormat::Csv => {
            let rows = samples.iter().map(|s| [s.phi.to_string(), s.probability.to_string()]);
            out.push("fringe.csv", csv_table(&["phi", "probability"], rows)?);
        }
        OutputFormat::Json => out.push("fringe.json", json(&samples)?),
    }
    out.push("period.json", json(&fit)?);
    let mut summary = format!("{} samples\n", samples.len());
    match fit.period {
        Some(p) => {
            let _ = writeln!(summary, "period: {p:.6} rad ({:.4} pi), visibility {:.4}", p / PI, fit.visibility);
        }
        None => {
            let _ = writeln!(summary, "{}; visibility {:.4}", fit.note.as_deref().unwrap_or("no period"), fit.visibility);
        }
    }
    out.summary = summary;
    Ok(out)
}

/// Per-sector false-herald analysis of a pair-source input.
pub fn run_contamination(cfg: &ScenarioConfig, format: OutputFormat) -> Result<RunOutput> {
    let chip = match cfg.circuit_spec()? {
        CircuitSpec::Chip(c) => *c,
        _ => return Err(Error::Config("contamination needs a chip circuit".into())),
    };
    let params = match &cfg.input {
        Some(InputSpec::Spdc(p)) => *p,
        _ => return Err(Error::Config("contamination needs an spdc input".into())),
    };
    let pattern = cfg.herald.clone().unwrap_or_else(HeraldPattern::chip_default);
    let topo = cfg.resolve_topology()?.unwrap_or_else(Topology::six_fold);
    let report = contamination_report(&chip, &params, &pattern, cfg.target_photons.unwrap_or(6), &topo)?;

    let mut out = RunOutput::default();
    out.push("contamination.json", json(&report)?);
    let rows = report.summary.iter().map(|r| [r.sector.to_string(), r.herald_prob.to_string(), r.false_event_prob.to_string()]);
    match format {
        OutputFormat::Csv => out.push("summary.csv", csv_table(&["sector", "herald_prob", "false_event_prob"], rows)?),
        OutputFormat::Json => out.push("summary.json", json(&report.summary)?),
    }
    let mut summary = String::new();
    if report.is_empty() {
        summary.push_str("no sector produces heralds or target events\n");
    }
    for r in &report.summary {
        let _ = writeln!(summary, "sector {}: herald {:.4e}, false events {:.4e}", r.sector, r.herald_prob, r.false_event_prob);
    }
    for s in &report.sectors {
        let mut by_label: BTreeMap<&Occupation, f64> = BTreeMap::new();
        for c in &s.false_channels {
            *by_label.entry(&c.apparent).or_insert(0.0) += c.probability;
        }
        for (label, p) in by_label {
            let _ = writeln!(summary, "  sector {} can read as heralded {} (p = {:.4e})", s.n, occ_label(label), p);
        }
    }
    out.summary = summary;
    Ok(out)
}

/// Counts coincidences in a pulse CSV, or without one, compares the
/// simulated window against the analytic trapezoid over 0 to 12 ns.
pub fn run_coincidence(cfg: &ScenarioConfig, pulses: Option<&Path>, format: OutputFormat) -> Result<RunOutput> {
    let cc = cfg.coincidence.clone().unwrap_or_default();
    cc.validate()?;
    let mut out = RunOutput::default();
    let mut summary = String::new();
    match pulses {
        Some(path) => {
            let file = std::fs::File::open(path).map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
            let events = read_pulses(file)?;
            let counts = count_coincidences(&events, &cc)?;
            match format {
                OutputFormat::Csv => {
                    let mut buf = Vec::new();
                    write_coincidences(&mut buf, &counts)?;
                    out.push("coincidences.csv", String::from_utf8(buf).map_err(|e| Error::Config(e.to_string()))?);
                }
                OutputFormat::Json => {
                    let rows: Vec<(Vec<&String>, u64)> = counts.iter().map(|(s, n)| (s.iter().collect(), *n)).collect();
                    out.push("coincidences.json", json(&rows)?);
                }
            }
            let total: u64 = counts.values().sum();
            let _ = writeln!(summary, "{} pulses, {total} coincidence records", events.len());
        }
        None => {
            let delays: Vec<f64> = (0..=48).map(|k| k as f64 * 0.25).collect();
            let shots = if cfg.shots > 0 { cfg.shots } else { 100_000 };
            let sweep = delay_sweep(&delays, &cc, shots, cfg.seed)?;
            let rows = sweep.iter().map(|(d, a, s)| [d.to_string(), a.to_string(), s.to_string()]);
            out.push("window_profile.csv", csv_table(&["delay_ns", "analytic", "simulated"], rows)?);
            let worst = sweep.iter().map(|(_, a, s)| (a - s).abs()).fold(0.0, f64::max);
            let _ = writeln!(summary, "window {} ns, max deviation over {} trials per delay: {worst:.5}", cc.window(), shots);
        }
    }
    out.summary = summary;
    Ok(out)
}

/// Classical fidelity between two `outcome,probability` CSV files.
pub fn run_fidelity(a: &Path, b: &Path) -> Result<RunOutput> {
    let p = read_distribution(a)?;
    let q = read_distribution(b)?;
    let f = fidelity(&p, &q)?;
    let mut out = RunOutput::default();
    out.push("fidelity.json", json(&BTreeMap::from([("fidelity", f)]))?);
    out.summary = format!("{f}\n");
    Ok(out)
}
