use thiserror::Error;

/// Errors raised by the geometry, raster and labeling routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("degenerate quadrilateral: {0}")]
    DegenerateQuad(String),
    #[error("singular correspondence system")]
    SingularSystem,
    #[error("point maps to infinity under homography")]
    PointAtInfinity,
    #[error("mask has no foreground pixels")]
    EmptyMask,
    #[error("input values are constant; no separating threshold")]
    ConstantInput,
    #[error("shape mismatch: expected {expected:?}, got {got:?}")]
    ShapeMismatch {
        expected: (usize, usize),
        got: (usize, usize),
    },
    #[error("empty input")]
    EmptyInput,
    #[error("quadrilateral is not convex")]
    NonConvex,
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, Error>;
