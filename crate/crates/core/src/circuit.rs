//! Linear-optical circuits and their mode-transformation matrices.
//!
//! An [`Interferometer`] is an ordered list of [`Element`]s acting on a set
//! of signal modes plus any environment modes introduced by loss taps.
//! [`Interferometer::compile`] multiplies the element matrices in list order
//! (first element acts first), so a photon entering mode `k` leaves in mode
//! `j` with amplitude `U[(j, k)]`.
//!
//! Couplers use the convention
//!
//! ```text
//! DC(η) = [ √η        i√(1-η) ]
//!         [ i√(1-η)   √η      ]
//! ```
//!
//! which every expected amplitude in this crate is written against.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, Matrix2};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::C64;

pub type CMatrix = DMatrix<C64>;

/// Mode indices of the four-waveguide chip.
///
/// Inputs a..d and outputs i..l share indices 0..3; the internal waveguides
/// e, f (after the first coupler) are indices 1, 2, as are g, h (before the
/// last coupler).
pub mod chip_modes {
    pub const A: usize = 0;
    pub const B: usize = 1;
    pub const C: usize = 2;
    pub const D: usize = 3;
    pub const I: usize = 0;
    pub const J: usize = 1;
    pub const K: usize = 2;
    pub const L: usize = 3;
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum Element {
    /// Directional coupler of reflectivity `eta` between two modes.
    Dc { eta: f64, modes: [usize; 2] },
    /// Phase `e^{iφ}` on one mode.
    Phase { phi: f64, mode: usize },
    /// Keeps amplitude √t in `mode`, routes √(1-t) into `env_mode`.
    Loss {
        t: f64,
        mode: usize,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        env_mode: Option<usize>,
    },
}

impl Element {
    fn validate(&self, total_modes: usize) -> Result<()> {
        let check_mode = |m: usize| {
            if m >= total_modes {
                Err(Error::ModeOutOfRange { index: m, modes: total_modes })
            } else {
                Ok(())
            }
        };
        match *self {
            Element::Dc { eta, modes: [i, j] } => {
                check_unit("eta", eta)?;
                check_mode(i)?;
                check_mode(j)?;
                if i == j {
                    return Err(Error::DuplicateMode(i));
                }
            }
            Element::Phase { phi, mode } => {
                if !phi.is_finite() {
                    return Err(Error::InvalidParameter { name: "phi", value: phi, reason: "must be finite" });
                }
                check_mode(mode)?;
            }
            Element::Loss { t, mode, env_mode } => {
                check_unit("t", t)?;
                check_mode(mode)?;
                let env = env_mode.ok_or_else(|| Error::Config("loss tap without environment mode".into()))?;
                check_mode(env)?;
                if env == mode {
                    return Err(Error::DuplicateMode(mode));
                }
            }
        }
        Ok(())
    }
}

fn check_unit(name: &'static str, v: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&v) {
        return Err(Error::InvalidParameter { name, value: v, reason: "must lie in [0, 1]" });
    }
    Ok(())
}

/// The 2×2 directional-coupler matrix for reflectivity `eta`.
pub fn dc_matrix(eta: f64) -> Result<Matrix2<C64>> {
    check_unit("eta", eta)?;
    let r = C64::new(eta.sqrt(), 0.0);
    let t = C64::new(0.0, (1.0 - eta).sqrt());
    Ok(Matrix2::new(r, t, t, r))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "InterferometerJson", into = "InterferometerJson")]
pub struct Interferometer {
    modes: usize,
    env_modes: usize,
    labels: BTreeMap<String, usize>,
    elements: Vec<Element>,
}

impl Interferometer {
    pub fn new(modes: usize) -> Self {
        Interferometer { modes, env_modes: 0, labels: BTreeMap::new(), elements: Vec::new() }
    }

    pub fn with_labels(mut self, labels: BTreeMap<String, usize>) -> Self {
        self.labels = labels;
        self
    }

    /// Appends an element after validating it against the current modes.
    pub fn push(mut self, element: Element) -> Result<Self> {
        let element = match element {
            Element::Loss { t, mode, env_mode: None } => {
                self.env_modes += 1;
                Element::Loss { t, mode, env_mode: Some(self.total_modes() - 1) }
            }
            e => e,
        };
        element.validate(self.total_modes())?;
        self.elements.push(element);
        Ok(self)
    }

    pub fn dc(self, eta: f64, i: usize, j: usize) -> Result<Self> {
        self.push(Element::Dc { eta, modes: [i, j] })
    }

    pub fn phase(self, phi: f64, mode: usize) -> Result<Self> {
        self.push(Element::Phase { phi, mode })
    }

    /// Routes `1 - transmission` of `mode` into a fresh environment mode.
    pub fn with_loss(&self, mode: usize, transmission: f64) -> Result<Self> {
        self.clone().push(Element::Loss { t: transmission, mode, env_mode: None })
    }

    /// Signal modes (excluding environment modes).
    pub fn modes(&self) -> usize {
        self.modes
    }

    pub fn env_modes(&self) -> usize {
        self.env_modes
    }

    pub fn total_modes(&self) -> usize {
        self.modes + self.env_modes
    }

    pub fn elements(&self) -> &[Element] {
        &self.elements
    }

    pub fn labels(&self) -> &BTreeMap<String, usize> {
        &self.labels
    }

    pub fn label(&self, name: &str) -> Option<usize> {
        self.labels.get(name).copied()
    }

    /// Replaces the phase of every phase shifter.
    pub fn with_phases(&self, phi: f64) -> Self {
        let mut c = self.clone();
        for e in &mut c.elements {
            if let Element::Phase { phi: p, .. } = e {
                *p = phi;
            }
        }
        c
    }

    /// Mode-transformation matrix on all `total_modes()` modes.
    pub fn compile(&self) -> CMatrix {
        let n = self.total_modes();
        let mut u = CMatrix::identity(n, n);
        for e in &self.elements {
            match *e {
                Element::Dc { eta, modes: [i, j] } => {
                    let m = dc_matrix(eta).expect("validated on push");
                    mix_rows(&mut u, i, j, &m);
                }
                Element::Phase { phi, mode } => {
                    let p = C64::from_polar(1.0, phi);
                    for c in 0..n {
                        u[(mode, c)] *= p;
                    }
                }
                Element::Loss { t, mode, env_mode } => {
                    let m = dc_matrix(t).expect("validated on push");
                    mix_rows(&mut u, mode, env_mode.expect("assigned on push"), &m);
                }
            }
        }
        u
    }

    pub fn is_lossless(&self) -> bool {
        !self.elements.iter().any(|e| matches!(e, Element::Loss { .. }))
    }
}

/// u ← E·u where E acts as `m` on rows (i, j).
fn mix_rows(u: &mut CMatrix, i: usize, j: usize, m: &Matrix2<C64>) {
    for c in 0..u.ncols() {
        let (a, b) = (u[(i, c)], u[(j, c)]);
        u[(i, c)] = m[(0, 0)] * a + m[(0, 1)] * b;
        u[(j, c)] = m[(1, 0)] * a + m[(1, 1)] * b;
    }
}

/// max |U†U − I| over all entries.
pub fn unitarity_deviation(u: &CMatrix) -> f64 {
    if u.nrows() != u.ncols() {
        return f64::INFINITY;
    }
    let g = u.adjoint() * u;
    let n = u.nrows();
    let mut dev: f64 = 0.0;
    for r in 0..n {
        for c in 0..n {
            let expect = if r == c { 1.0 } else { 0.0 };
            dev = dev.max((g[(r, c)] - C64::new(expect, 0.0)).norm());
        }
    }
    dev
}

/// Haar-random unitary from the QR decomposition of a complex Ginibre matrix.
pub fn random_unitary<R: Rng + ?Sized>(modes: usize, rng: &mut R) -> CMatrix {
    let g = CMatrix::from_fn(modes, modes, |_, _| {
        C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
    });
    let qr = g.qr();
    let mut q = qr.q();
    let r = qr.r();
    for c in 0..modes {
        let d = r[(c, c)];
        let ph = if d.norm() > 0.0 { d / d.norm() } else { C64::new(1.0, 0.0) };
        for row in 0..modes {
            q[(row, c)] *= ph;
        }
    }
    q
}

/// Reflectivities and internal phase of the four-waveguide heralding chip.
/// Fields missing from JSON take their design values.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ChipParams {
    pub eta1: f64,
    pub eta2: f64,
    pub eta3: f64,
    pub eta4: f64,
    pub phi: f64,
}

impl Default for ChipParams {
    /// Design values: η1 = η2 = 1/2, η3 = η4 = 1/3, φ = 0.
    fn default() -> Self {
        ChipParams { eta1: 0.5, eta2: 0.5, eta3: 1.0 / 3.0, eta4: 1.0 / 3.0, phi: 0.0 }
    }
}

impl ChipParams {
    pub fn with_phi(self, phi: f64) -> Self {
        ChipParams { phi, ..self }
    }

    pub fn with_taps(self, eta: f64) -> Self {
        ChipParams { eta3: eta, eta4: eta, ..self }
    }

    pub fn circuit(&self) -> Result<Interferometer> {
        chip_circuit(self.eta1, self.eta2, self.eta3, self.eta4, self.phi)
    }
}

/// The heralding chip: DC1 on (b,c), phase φ on f, DC3 on (a/i, e/g),
/// DC4 on (f/h, d/l), DC2 on (g,h).
pub fn chip_circuit(eta1: f64, eta2: f64, eta3: f64, eta4: f64, phi: f64) -> Result<Interferometer> {
    use chip_modes::*;
    let labels = [
        ("a", A), ("b", B), ("c", C), ("d", D),
        ("i", I), ("j", J), ("k", K), ("l", L),
    ]
    .into_iter()
    .map(|(k, v)| (k.to_string(), v))
    .collect();
    Interferometer::new(4)
        .with_labels(labels)
        .dc(eta1, B, C)?
        .phase(phi, C)?
        .dc(eta3, A, B)?
        .dc(eta4, C, D)?
        .dc(eta2, B, C)
}

#[derive(Serialize, Deserialize)]
struct InterferometerJson {
    modes: usize,
    #[serde(default, skip_serializing_if = "is_zero")]
    env_modes: usize,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    labels: BTreeMap<String, usize>,
    #[serde(default)]
    elements: Vec<Element>,
}

fn is_zero(v: &usize) -> bool {
    *v == 0
}

impl TryFrom<InterferometerJson> for Interferometer {
    type Error = Error;

    fn try_from(j: InterferometerJson) -> Result<Self> {
        let mut c = Interferometer::new(j.modes);
        c.env_modes = j.env_modes;
        c.labels = j.labels;
        for e in j.elements {
            c = c.push(e)?;
        }
        Ok(c)
    }
}

impl From<Interferometer> for InterferometerJson {
    fn from(c: Interferometer) -> Self {
        InterferometerJson {
            modes: c.modes,
            env_modes: c.env_modes,
            labels: c.labels,
            elements: c.elements,
        }
    }
}
