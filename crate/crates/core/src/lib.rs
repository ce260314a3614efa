//! CPU-scale radiance-field toolkit.
//!
//! The crate is split along the data flow of a differentiable renderer:
//!
//! - [`math`]: cameras, rays, stratified sampling, images, PSNR.
//! - [`net`]: a small reverse-mode computation graph (linear / conv1d /
//!   relu / concat), parameter tensors and Adam.
//! - [`encoding`]: multiresolution hash grids and sinusoidal direction
//!   encodings.
//! - [`field`]: the two radiance-field families (hash-encoded MLP field and
//!   low-rank factorized field) sharing one `f(x, d) -> (sigma, color)`
//!   contract.
//! - [`render`]: alpha compositing along rays plus the color/depth losses.
//! - [`exec`]: deterministic chunked execution, parallel via rayon when the
//!   `parallel` feature is enabled (default) with a sequential fallback.
//!
//! All numeric kernels are generic over [`Real`] so the same code path runs
//! at `f32` for training and at `f64` for finite-difference verification.

pub mod encoding;
pub mod error;
pub mod exec;
pub mod field;
pub mod math;
pub mod net;
pub mod real;
pub mod render;

pub use error::CoreError;
pub use real::{real, Real};
