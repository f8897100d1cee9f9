//! Radon and M2 tomography toolkit.

// `!(x > 0.0)` style checks are meant to reject NaN as well
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bench;
pub mod error;
pub mod forward;
pub mod inversion;
pub mod io;
pub mod ndim;
pub mod phasespace;
pub mod quadrature;
pub mod selftest;
mod spectral;

pub use error::{Error, ErrorKind, Result};
