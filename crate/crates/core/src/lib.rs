//! Surface reconstruction from oriented point clouds.
//!
//! The mesh starts as a minimum spanning tree of a filtered k-nearest-neighbor
//! graph, embedded on a surface by a rotation system (a cyclic order of
//! outgoing halfedges per vertex). Edges are inserted shortest-first when they
//! split a face without crossing nearby edges, handles raise the genus where a
//! hole is large enough, and remaining polygons are ear-clipped.

pub mod error;
pub mod faces;
pub mod geom;
pub mod graph;
pub mod io;
pub mod kdtree;
pub mod mesh_out;
pub mod params;
pub mod pipeline;
pub mod pointcloud;
pub mod reconstruct;
pub mod rotation;
pub mod synth;

pub use error::{Error, FormatError, GeomError, ParamsError, Result, TopologyError};
pub use geom::{Point2, Point3, UnitNormal, Vec3};
pub use faces::FaceTracker;
pub use graph::{Edge, Graph, Metric};
pub use kdtree::KdTree;
pub use mesh_out::{compute_metrics, extract_triangles, Metrics, TriangleMesh};
pub use params::Params;
pub use pipeline::{PipelineConfig, Output};
pub use pointcloud::PointCloud;
pub use reconstruct::{reconstruct, Mesher, Options, Reconstruction, Stats, Timings};
pub use rotation::RotationSystem;
