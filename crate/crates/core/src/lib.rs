//! Lyapunov exponents and KAM reducibility for
//! complex quasi-periodic Schrodinger cocycles.
//!
//! Angles are radians on `R / 2 pi Z`. Frequencies are stored as fractions
//! of the circle and scaled by `2 pi` where a rotation is applied.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod algebra;
pub mod cocycle;
pub mod config;
pub mod diophantine;
pub mod error;
pub mod kam;
pub mod output;
pub mod spectral;
pub mod verify;

pub use error::{Error, Result};
