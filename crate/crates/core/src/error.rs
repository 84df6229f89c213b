use std::path::PathBuf;

use thiserror::Error;

/// Failures of the pure geometric predicates.
#[derive(Debug, Clone, Copy, PartialEq, Error)]
pub enum GeomError {
    #[error("vector has zero length")]
    ZeroVector,
    #[error("vector norm {0} is not within 1e-6 of one")]
    NotUnit(f64),
    #[error("projected direction is degenerate")]
    DegenerateProjection,
    #[error("triangle has a side shorter than the degeneracy threshold")]
    DegenerateTriangle,
}

/// Failures while reading or writing point clouds and meshes.
#[derive(Debug, Error)]
pub enum FormatError {
    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("parse error in {path} at line {line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },
    #[error("unsupported format: {0}")]
    UnsupportedFormat(String),
}

/// Failures of the rotation-system and face-tracker kernels.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TopologyError {
    #[error("halfedge {0} is not part of the mesh")]
    UnknownHalfedge(usize),
    #[error("{{{0}, {1}}} is not an edge of the candidate graph")]
    NotAGraphEdge(usize, usize),
    #[error("vertex {0} has no incident mesh edges")]
    IsolatedVertex(usize),
    #[error("inconsistent face state: {0}")]
    InconsistentState(String),
}

/// Invalid run parameters.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParamsError {
    #[error("k must be at least 2, got {0}")]
    K(usize),
    #[error("r must be positive, got {0}")]
    R(f64),
    #[error("theta must lie in (0, 180] degrees, got {0}")]
    Theta(f64),
    #[error("quality bounds must satisfy min < max, got [{0}, {1}]")]
    Quality(f64, f64),
}

/// Top-level error for the reconstruction pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Format(#[from] FormatError),
    #[error(transparent)]
    Params(#[from] ParamsError),
    #[error(transparent)]
    Topology(#[from] TopologyError),
    #[error(transparent)]
    Geom(#[from] GeomError),
    #[error("point cloud is empty")]
    EmptyInput,
    #[error("point cloud has no normals and estimation is disabled")]
    MissingNormals,
    #[error("non-finite coordinate at point {0}")]
    NonFinite(usize),
    #[error("reconstruction invariant violated: {0}")]
    Assertion(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
