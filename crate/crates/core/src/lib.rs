//! Link-level modeling and optimization for simultaneous lightwave
//! information and power transfer over indoor optical wireless links.
//!
//! The crate is organised bottom-up:
//!
//! - [`channel`]: Lambertian LED emission, optical concentrator and the
//!   line-of-sight channel power gain for a discrete set of receiver FOVs.
//! - [`linkmodel`]: interference aggregates, electrical SINR and the
//!   achievable-rate lower bound.
//! - [`harvest`]: solar-cell harvesting (diode law with fill factor) and the
//!   per-phase energy of time-splitting frames.
//! - [`optimizer`]: closed-form solvers for time-splitting (TS) and
//!   time-splitting with DC-bias optimization (TSBO) under rate/SINR
//!   constraints, the fixed baseline and a brute-force grid oracle.
//! - [`scenario`]: scenario construction from SI parameters and the
//!   parameter sweeps behind the rate-threshold and neighbor-count studies.
//!
//! All physics functions are pure; angles are radians, currents amperes.

// `!(x > 0.0)` is used on purpose so NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod channel;
pub mod error;
pub mod harvest;
pub mod linkmodel;
pub mod optimizer;
pub mod scenario;

pub use error::{Error, Result};
