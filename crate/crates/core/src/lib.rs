//! Determinantal shot noise Cox processes.
//!
//! Cluster point processes whose cluster centres form a determinantal point
//! process (DPP): the Gaussian-DPP-Thomas and Ginibre-DPP-Thomas processes,
//! with the Thomas process (Poisson centres) as the reference model.
//!
//! The crate covers
//! * simulation ([`dpp`], [`cluster`]),
//! * closed-form pair correlation and K-functions and nonparametric
//!   estimators of K, g, F, G and J ([`summaries`]),
//! * minimum contrast fitting ([`fit`]),
//! * global envelope tests based on the extreme rank length ([`envelope`]),
//! * a simulation study driver ([`study`]).

pub mod cluster;
pub mod dpp;
pub mod envelope;
pub mod error;
pub mod fit;
pub mod geometry;
pub mod io;
pub mod rng;
mod spatial;
pub mod special;
pub mod study;
pub mod summaries;

pub use error::{Error, Result};
pub use geometry::{Point, PointPattern, Window};
pub use rng::RngStream;
