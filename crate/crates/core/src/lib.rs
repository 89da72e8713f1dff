//! Numerical core for the linear-feedback sum-capacity of the N-sender
//! Gaussian multiple access channel.
//!
//! The crate solves the cooperation-factor fixed point behind the
//! sum-capacity formula, evaluates the Lagrange-dual converse bound on it,
//! solves the steady-state Riccati equation of the iterative-refinement
//! feedback code, simulates that code end to end over a complex AWGN
//! channel, and estimates conditional maximal correlations for jointly
//! Gaussian triples.
//!
//! All rates are in nats internally; presentation layers convert to bits.
//! Complex signaling packs two real channel uses into one complex use, and
//! every covariance handled here is the per-real-use (half) covariance, so
//! power comparisons against a per-real-use budget need no unit juggling.

pub mod capacity;
pub mod dual;
pub mod error;
pub mod kramer;
pub mod linalg;
pub mod maxcorr;
pub mod riccati;
pub mod rng;
pub mod sim;

pub use error::{Error, Result};
