//! Four-photon interferometry with two independent sources of
//! polarization-entangled photon pairs.
//!
//! One photon of each pair travels left through a polarizer to a detector;
//! the other two meet on a beam splitter. The crate provides
//!
//! * [`fock`]: an exact sparse Fock-space algebra used as a brute-force oracle,
//! * [`elements`]: the initial state and the detection operators,
//! * [`oracle`]: probabilities computed on the Fock space,
//! * [`analytic`]: closed-form coincidence probabilities,
//! * [`wavepacket`]: Gaussian wave-packet densities and visibilities,
//! * [`montecarlo`]: an event-level coincidence simulator,
//! * [`bell`]: CHSH statistics and a local hidden-variable baseline,
//! * [`config`] and [`report`]: the key-value configuration format and CSV output.

pub mod analytic;
pub mod bell;
pub mod config;
pub mod elements;
pub mod error;
pub mod fock;
pub mod montecarlo;
pub mod oracle;
pub mod report;
pub mod wavepacket;

pub use error::{Error, Result};
