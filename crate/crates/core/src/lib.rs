//! Numerical model of the two-pinhole / lens / wire-grid interferometer.
//!
//! * [`duality`]: distinguishability `K`, visibility `V`, the bound
//!   `K² + V² ≤ 1`, which-path detectors and backward inference.
//! * [`optics`]: aperture fields, Fourier-plane fringes, wire grids, imaging.
//! * [`sampling`]: Monte Carlo photon detection and `K̂`, `V̂` estimators.
//! * [`bohm`]: de Broglie–Bohm trajectories through the lens volume.
//! * [`inference`]: the space of fringe profiles compatible with dark wires.
//! * [`scenario`] and [`report`]: preset experiments and their outputs.
//! * [`cli`]: the `afshar` command.

pub mod bohm;
pub mod cli;
pub mod duality;
pub mod error;
mod fourier;
pub mod inference;
pub mod model;
pub mod optics;
pub mod report;
pub mod sampling;
pub mod scenario;

pub use error::{Error, Result};
pub use model::{
    make_optical_system, Accounting, AmplitudePair, DetectionEvent, DetectorGram, DualityReport, Grid, OpticalSystem,
    Plane, SampledField, Spot, TwoPinholeConfig, WireGrid,
};
