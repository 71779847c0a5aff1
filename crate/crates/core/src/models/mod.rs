//! Relaxation system, limit equation and their flux families.

pub mod flux;
pub mod jinxin;

pub use flux::{builtin_fluxes, Flux, Monomial, PolynomialFlux};
pub use jinxin::{
    darcy_velocity, effective_big_z, effective_z, jinxin_rhs, limit_rhs, JinXinModel, JinXinState, LimitState,
};
