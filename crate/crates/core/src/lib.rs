//! Rate-leakage analysis for classical communication over quantum
//! state-dependent channels with channel side information at the encoder and
//! a state-masking constraint.
//!
//! The crate has five layers:
//!
//! - [`qstate`] — density operators, POVMs, hybrid classical-quantum states
//!   over named registers, and entropy functionals in bits.
//! - [`channels`] — state-dependent channels `N_{EA→B}` in operator-sum form,
//!   measurement channels, random-parameter channels, entangled channel-state
//!   sources, n-fold products, and a JSON spec format.
//! - [`region`] — single-letter (and small-n) evaluation of achievable
//!   rate-leakage pairs for an encoder strategy, plus a derivative-free
//!   optimizer that sweeps leakage budgets into a capacity-leakage curve.
//! - [`presets`] — built-in channels and strategies with closed-form
//!   rate-leakage curves, used as ground truth by the tests and the CLI.
//! - [`sim`] — desk-scale Monte Carlo simulation of the random-binning coding
//!   scheme for measurement channels with classical side information,
//!   including exact small-blocklength leakage by enumeration.

pub mod channels;
pub mod error;
pub mod linalg;
pub mod presets;
pub mod qstate;
pub mod random;
pub mod region;
pub mod sim;

pub use error::{Error, Result};
