#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::excessive_precision, clippy::needless_range_loop)]

pub mod biot_savart;
pub mod bounds;
pub mod error;
pub mod geometry;
pub mod jet;
pub mod kernels;
pub mod norms;
pub mod quad;
pub mod rates;

pub use error::{Error, Result};
