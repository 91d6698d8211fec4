//! Closed-form matting: the matting Laplacian over local windows and the
//! trimap-constrained linear solve for the alpha matte.

mod laplacian;
mod solve;
mod sparse;
mod trimap;

pub use crate::imaging::SoftMask;
pub use laplacian::build_matting_laplacian;
pub use solve::{matte, solve_alpha, AlphaSolve, MatteOutcome, MattingParams};
pub use sparse::SparseSymmetricMatrix;
pub use trimap::{Trimap, TrimapLabel};
