//! Pseudo-spectral simulation and diagnostics for the diffusively scaled
//! Jin-Xin relaxation system and its viscous conservation-law limit.

pub mod analysis;
pub mod config;
pub mod error;
pub mod harness;
pub mod integrators;
pub mod models;
pub mod plot;
pub mod spectral;

pub use error::{Error, Result};
