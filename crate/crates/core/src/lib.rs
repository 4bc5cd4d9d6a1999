//! Aggregate interference in randomly deployed CSMA/CA networks.
//!
//! * [`analytic`] derives the effective active node density of an 802.11
//!   DCF network and the resulting shot-noise interference law.
//! * [`point_process`] samples PPP, Matérn hardcore and SSI patterns and
//!   measures the aggregate power they produce.
//! * [`des`] is a packet-level discrete-event simulator of the DCF over a
//!   random planar topology.
//! * [`stats`] compares the resulting weighted samples.

// Argument checks are written as `!(x > 0.0)` so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analytic;
pub mod config;
pub mod des;
pub mod error;
pub mod numerics;
pub mod point_process;
pub mod special;
pub mod stats;

pub use config::{AccessMode, PhyMacConfig};
pub use error::{Error, Result};
