use thiserror::Error;

/// Errors raised by the geometry pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix is not skew-symmetric (|X + X^T| = {defect:.3e}, tolerance {tolerance:.3e})")]
    NonSkewInput { defect: f64, tolerance: f64 },

    #[error("degenerate frame: {0}")]
    DegenerateFrame(String),

    #[error("point ({x}, {y}) is off the unit sphere: | |f| - 1 | = {deviation:.3e}")]
    OffSphere { x: f64, y: f64, deviation: f64 },

    #[error("point ({x}, {y}) lies outside the domain")]
    OutOfDomain { x: f64, y: f64 },

    #[error("degenerate immersion at ({x}, {y}): |f_x| = {norm:.3e} (branch point)")]
    DegenerateImmersion { x: f64, y: f64, norm: f64 },

    #[error("immersion is not conformal at ({x}, {y}): relative defect {defect:.3e}")]
    NotConformal { x: f64, y: f64, defect: f64 },

    #[error("normal frame obstruction at node ({i}, {j}): {reason}")]
    FrameObstruction { i: usize, j: usize, reason: String },

    #[error("lambda is not on the unit circle: |lambda| = {modulus}")]
    BadLambda { modulus: f64 },

    #[error("invalid immersion: {0}")]
    InvalidSpec(String),

    #[error("grid file {path}: line {line}: {message}")]
    GridFile { path: String, line: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
