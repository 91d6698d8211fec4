//! GrabCut-style segmentation seeded from RECIST axes: grayscale mixture
//! appearance models, contrast-sensitive 4-neighbour smoothness and exact
//! min-cut energy minimization.

mod gmm;
mod grabcut;
mod maxflow;
mod seeds;

pub use gmm::{fit_gmm, Component, GmmModel, EM_MAX_ITERS, EM_TOLERANCE, VARIANCE_FLOOR};
pub use grabcut::{grabcut_segment, grabcut_with_trace, GrabCutOutcome, GrabCutParams};
pub use maxflow::{max_flow, FlowNetwork, GraphCut, MaxFlow};
pub use seeds::{bresenham, default_frame, seeds_from_recist, Point, RecistAnnotation, Seed, SeedLabels};
