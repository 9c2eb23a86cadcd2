//! Horizontally quasiconvex envelopes and h-convex hulls in the first
//! Heisenberg group, computed on Cartesian grids.
//!
//! - [`group`]: group law, Korányi gauge, left and right invariant metrics.
//! - [`field`]: box domains, trilinear grid fields, the field file format.
//! - [`direct`]: the horizontal-line convexification operator and falsifiers.
//! - [`hj`]: the nonlocal Hamilton-Jacobi iteration.
//! - [`region`] and [`hull`]: sets, defining functions, hulls, sup-convolution,
//!   inclusion margins and stability probes.
//! - [`config`] and [`cli`]: the command-line front end.

pub mod cli;
pub mod config;
pub mod direct;
pub mod error;
pub mod field;
pub mod group;
pub mod hj;
pub mod hull;
pub mod region;
pub mod report;

pub use error::{Error, Result};
