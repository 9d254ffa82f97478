//! Crate-wide error type.

use thiserror::Error;

/// Errors produced by scene construction, rendering, geometry processing
/// and file I/O.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid rotation: {0}")]
    InvalidRotation(String),

    #[error("degenerate look-at: eye and target coincide (or up hint is collinear with forward)")]
    DegenerateLookAt,

    #[error("tag collision: `{0}` is already present in the collection")]
    TagCollision(String),

    #[error("not found: no object tagged `{0}`")]
    NotFound(String),

    #[error("scene has no camera; set one before rendering")]
    MissingCamera,

    #[error("invalid primitive: {0}")]
    InvalidPrimitive(String),

    #[error("invalid geometry: {0}")]
    InvalidGeometry(String),

    #[error("color bind error: {0}")]
    ColorBind(String),

    #[error("invalid image: {0}")]
    InvalidImage(String),

    #[error("invalid light: {0}")]
    InvalidLight(String),

    #[error("invalid camera: {0}")]
    InvalidCamera(String),

    #[error("pixel ({0}, {1}) out of bounds for {2}x{3} image")]
    PixelOutOfBounds(u32, u32, u32, u32),

    #[error("invalid render settings: {0}")]
    InvalidSettings(String),

    #[error("insufficient points: need at least {needed}, got {got}")]
    InsufficientPoints { needed: usize, got: usize },

    #[error("duplicate keypoint at time {0}")]
    DuplicateKeypoint(f64),

    #[error("trajectory has no keypoints")]
    EmptyTrajectory,

    #[error("empty reconstruction: no seed triangle found for any radius")]
    EmptyReconstruction,

    #[error("invalid simplification target: {0} (must be at least 4 faces)")]
    InvalidTarget(usize),

    #[error("atlas capacity exceeded: {faces} faces do not fit at resolution {resolution} with gap {gap_px}; minimal resolution that fits is {min_resolution}")]
    AtlasCapacity {
        faces: usize,
        resolution: u32,
        gap_px: u32,
        min_resolution: u32,
    },

    #[error("empty bake: no projected points to take colors from")]
    EmptyBake,

    #[error("meshify stage `{stage}` failed: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },

    #[error("parse error in {file}: {message}")]
    Parse { file: String, message: String },

    #[error("schema violation at {path}: {message}")]
    Schema { path: String, message: String },

    #[error("dangling sidecar reference `{0}`: {1}")]
    Sidecar(String, String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Wraps an error with the meshify stage it occurred in.
    pub fn in_stage(self, stage: &'static str) -> Self {
        Error::Stage {
            stage,
            source: Box::new(self),
        }
    }
}

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
