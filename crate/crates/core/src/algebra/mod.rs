//! Matrix and Fourier-series algebra shared by the engines.

pub mod grid;
pub mod mat2;
pub mod series;
pub mod weights;

pub use grid::{coefficients_from_grid, TorusGrid};
pub use mat2::{mat_exp_traceless, mat_log_near_identity, Mat2};
pub use series::{Coefficient, FourierSeries, MatrixSeries, Product, ScalarSeries, DEFAULT_K_MAX};
pub use weights::{ConeSpec, MultiIndex, WeightScheme};
