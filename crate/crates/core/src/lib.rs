//! Retina-inspired motion maps for infrared frame sequences.
//!
//! The crate is organised around a handful of independent pieces:
//!
//! - [`grid`], [`params`] and [`state`]: the dense grid carrier, the automaton
//!   constants and the per-sequence mutable state.
//! - [`kernel`]: fixed kernels (Gaussian, Mexican hat, Sobel), convolution and
//!   the bilateral filter.
//! - [`rca`]: the five-layer retinal cellular automaton and its sequence
//!   driver.
//! - [`io`]: frame loading, motion-map writing, manifests and paired samples.
//! - [`synth`]: seeded synthetic sequences with exact ground truth.
//! - [`eval`]: IoU/GIoU, NMS, matching, P/R/F1 and AP@50.
//! - [`pmi`]: a forward-only, seeded toy of the bidirectional cross-attention
//!   block that couples the appearance and motion pathways.

pub mod error;
pub mod eval;
pub mod grid;
pub mod io;
pub mod kernel;
pub mod params;
pub mod pmi;
pub mod rca;
pub mod rng;
pub mod state;
pub mod synth;

pub use error::{Error, Result};
pub use grid::Grid;
pub use kernel::Kernel;
pub use params::RcaParams;
pub use rca::RcaEngine;
pub use state::{LayerTrace, RcaState};
