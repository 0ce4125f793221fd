//! Simulation toolkit for continuous-wave lasing without inversion (LWI) in
//! mercury vapor.
//!
//! The crate models the full chain from atomic structure to laser resonator:
//!
//! * [`atom`] — level schemes (pedagogical four-level chain and the 13-level
//!   Zeeman-resolved mercury scheme), drive fields, and Hamiltonian assembly
//!   from angular-momentum algebra.
//! * [`liouvillian`] — master-equation generators (coherent, radiative,
//!   incoherent pumping, laser phase diffusion), stationary states, and the
//!   complex probe susceptibility.
//! * [`doppler`] — the Doppler-free three-photon beam geometry,
//!   Maxwell-Boltzmann velocity averaging, vapor density.
//! * [`response`] — the combined velocity- and noise-averaged medium response
//!   used by all higher-level sweeps.
//! * [`laser_power`] — nonlinear susceptibility fits, the photon-number
//!   equation, stationary power and threshold maps.
//! * [`gain_field`] — spatial gain distributions from intersecting Gaussian
//!   drive beams.
//! * [`cavity`] — Fourier-optics propagation through a four-mirror ring
//!   resonator, round-trip eigenmodes, and beam-quality analysis.

pub mod atom;
pub mod cavity;
pub mod constants;
pub mod doppler;
mod error;
pub mod fitting;
pub mod gain_field;
pub mod io;
pub mod laser_power;
pub mod linalg;
pub mod liouvillian;
pub mod response;
pub mod wigner;

pub use error::{Error, Result};

pub use ndarray;
pub use num_complex;
