//! Periodic spectral fields and the discrete Littlewood-Paley toolkit.

pub mod besov;
pub mod container;
pub mod dyadic;
pub mod field;
pub mod grid;
pub mod series;

pub use besov::{besov_norm, besov_norm_stacked, BesovValue, Window};
pub use dyadic::{dyadic_block, lowfreq_cutoff, DyadicScheme};
pub use field::{nonlinear_product, SpectralField};
pub use grid::Grid;
pub use series::{chemin_lerner_norm, NormSeries};
