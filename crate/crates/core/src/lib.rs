//! Split-step Fourier fiber channel simulator and capacity-bound toolkit.
//!
//! The channel model splits a fiber link into K segments; each segment
//! applies a per-sample Kerr phase rotation, a unitary chromatic-dispersion
//! step in the DFT domain, and additive circular Gaussian amplifier noise.
//! On top of the simulator, the crate evaluates achievable-rate bounds on the
//! channel capacity: a nested Monte Carlo lower bound with standard errors,
//! two closed-form lower bounds with their high-power asymptotes, the AWGN
//! upper bound, and a closed-form low-power approximation.
//!
//! Everything is deterministic under a fixed seed: noise streams are keyed by
//! (seed, stream, segment) so parallel schedules cannot change results.

pub mod appendix;
pub mod bounds;
pub mod channel;
pub mod error;
pub mod mc;
pub mod params;

pub use error::{Error, Result};
