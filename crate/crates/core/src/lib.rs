//! Gridless channel-parameter estimation and single-BS position/orientation
//! recovery for mmWave MIMO-OFDM links, with a reproducible RMSE-vs-CRLB
//! benchmark.
//!
//! Pipeline: synthesize received pilots ([`signal`]), denoise the block-Hankel
//! virtual channel matrix under an atomic-norm trace penalty ([`denoiser`]),
//! recover per-path delay/angle triplets by two-level Vandermonde
//! decomposition ([`extract`]), re-fit geometry by weighted least squares
//! ([`localize`]), and compare against numerical Cramér–Rao bounds ([`crlb`]).

pub mod crlb;
pub mod denoiser;
pub mod error;
pub mod experiment;
pub mod extract;
pub mod geometry;
pub mod linalg;
pub mod localize;
pub mod signal;
pub mod toeplitz;
pub mod vcm;

pub use error::{Error, Result};
pub use geometry::{ChannelParams, PathParams, Point2D, SceneConfig};
pub use signal::{PilotMatrix, ReceivedSignal, SystemConfig};
