//! Simulation library for transverse super-resolution of two coherent
//! sources by balanced homodyne detection with a first-order Hermite–Gauss
//! local oscillator.
//!
//! The crate is layered bottom-up:
//!
//! * [`numerics`]: error function, adaptive Gauss–Kronrod quadrature, and
//!   counter-seeded random streams.
//! * [`beam`]: Hermite–Gauss mode amplitudes, displaced-beam decomposition.
//! * [`channel`]: hard-aperture diffraction loss and the Rayleigh length
//!   scale of the receiver.
//! * [`bhd`]: homodyne signal mean, variance, and the minimum resolvable
//!   separation with and without centroid misalignment.
//! * [`mcsim`]: Monte Carlo shot sampler cross-checking the closed forms.
//! * [`scenario`]: config parsing, parameter sweeps, CSV/SVG emission, CLI.

pub mod beam;
pub mod bhd;
pub mod channel;
pub mod error;
pub mod mcsim;
pub mod numerics;
pub mod scenario;

pub use error::{Error, Result};
