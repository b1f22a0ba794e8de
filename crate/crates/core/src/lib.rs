//! Link-level simulator and analysis library for buffer-aided cooperative
//! relay networks with adjustable (randomized) space-time codes.
//!
//! The crate is organized around the stages of a two-hop relay link:
//!
//! - [`numerics`]: complex matrices, Hermitian eigendecomposition, the
//!   Gaussian Q-function and seeded random-number streams.
//! - [`channel`]: block-fading draws, AWGN and imperfect-CSI perturbation.
//! - [`coding`]: BPSK, Alamouti and adjustable (randomized) Alamouti
//!   encoding, exhaustive ML detection and linear decoding.
//! - [`relay`]: relay nodes with FIFO block buffers in AF or DF mode.
//! - [`selection`]: max-link, BRS, MMRS and DSTC group selection policies.
//! - [`abaro`]: stochastic-gradient adaptation of the adjustable code with
//!   structural projection and power normalization.
//! - [`analysis`]: pairwise-error-probability bounds, coding/buffer gain
//!   factors and the multiplication-count complexity model.
//! - [`engine`]: Monte Carlo orchestration, BER sweeps and diversity slopes.

pub mod abaro;
pub mod analysis;
pub mod channel;
pub mod coding;
pub mod engine;
mod error;
pub mod numerics;
pub mod relay;
pub mod selection;
pub mod tolerances;

pub use error::{Error, Result};
