//! Graph-cut segmentation: colour mixtures, max-flow and the iterated
//! trimap refinement built on them.

pub mod gmm;
pub mod grabcut;
pub mod maxflow;

pub use gmm::{fit_gmm, Gmm};
pub use grabcut::{grabcut_refine, GrabCutOutput, Trimap, TrimapLabel};
pub use maxflow::{max_flow, FlowGraph, MinCut};
