//! Simulation of heralded multiphoton path entanglement in linear-optical
//! waveguide circuits.
//!
//! The crate evolves bosonic Fock states through interferometers
//! ([`circuit`], [`evolve`]), conditions them on herald detections
//! ([`herald`]), models threshold detectors behind splitter trees
//! ([`detect`]), down-conversion inputs and their higher-order terms
//! ([`source`]), clocked coincidence electronics ([`coinc`]), and phase
//! fringes and coherence tests ([`analysis`]). [`scenario`] bundles these
//! into declarative, file-driven runs used by the `heraldsim` binary.
//!
//! ```
//! use heraldsim::circuit::ChipParams;
//! use heraldsim::fock::{noon, FockState};
//! use heraldsim::herald::{heralded_output, HeraldPattern};
//!
//! let r = heralded_output(
//!     &ChipParams::default(),
//!     &FockState::basis([0, 2, 2, 0]),
//!     &HeraldPattern::chip_default(),
//! )
//! .unwrap();
//! assert!((r.probability - 4.0 / 81.0).abs() < 1e-12);
//! assert!(r.conditional_state.fidelity(&noon(2, 0, 0.0)).unwrap() > 1.0 - 1e-12);
//! ```

// Negated float comparisons are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod circuit;
pub mod coinc;
pub mod detect;
pub mod error;
pub mod evolve;
pub mod fock;
pub mod herald;
pub mod permanent;
pub mod rng;
pub mod scenario;
pub mod source;

pub use error::{Error, Result};
