// `!(x >= 0.0)` is the NaN-rejecting form used throughout validation
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod graphcut;
pub mod imaging;
pub mod labels;
pub mod matting;
pub mod metrics;
pub mod pipeline;
pub mod trimap;

pub use error::{Error, Result};
