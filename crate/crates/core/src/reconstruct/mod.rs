//! The mesh-growing engine.
//!
//! Per connected component of the candidate graph the mesh starts as the
//! minimum spanning tree (a single face). Queue edges are inserted when their
//! two corners lie on one face (so the genus stays zero), when they cross no
//! nearby mesh edge in a local projection, and when any triangle they close
//! is well shaped. Handle edges then join distinct faces around large holes,
//! and an ear-clipping pass triangulates what is left.

mod checks;
mod handles;
mod triangulate;

use std::time::{Duration, Instant};

use crate::error::{Error, Result};
use crate::faces::FaceTracker;
use crate::geom::{Point3, UnitNormal};
use crate::graph::{spanning_forest, Edge, Graph};
use crate::kdtree::KdTree;
use crate::params::Params;
use crate::rotation::RotationSystem;

pub use handles::HandleCandidate;

/// Knobs that do not change the reconstruction itself.
#[derive(Debug, Clone)]
pub struct Options {
    /// Seeds the face tracker's balancing priorities.
    pub seed: u64,
    /// Components up to this many vertices get a full face recount after
    /// every insertion; larger ones only at stage ends.
    pub audit_orbit_limit: usize,
}

impl Default for Options {
    fn default() -> Self {
        Options {
            seed: 0,
            audit_orbit_limit: 500,
        }
    }
}

/// Wall-clock time per stage, summed over components.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Timings {
    pub init: Duration,
    pub insertion: Duration,
    pub handles: Duration,
    pub triangulation: Duration,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Stats {
    /// Edges accepted by the insertion stage (MST edges excluded).
    pub inserted: usize,
    pub rejected_topology: usize,
    pub rejected_geometry: usize,
    pub rejected_quality: usize,
    pub handle_candidates: usize,
    /// Accepted handle edges.
    pub handles: Vec<(usize, usize)>,
    pub triangulation_inserted: usize,
    /// Number of times the Euler characteristic was checked.
    pub euler_checks: usize,
    /// Number of full τ-orbit recounts performed.
    pub orbit_recounts: usize,
}

/// Per-component bookkeeping for the Euler audit.
#[derive(Debug, Clone, Default)]
struct ComponentState {
    edges: usize,
    faces: usize,
    handles: usize,
}

pub struct Mesher<'a> {
    graph: &'a Graph,
    positions: &'a [Point3],
    normals: &'a [UnitNormal],
    params: Params,
    options: Options,
    tree: KdTree,
    rs: RotationSystem,
    ft: FaceTracker,
    /// Longest Euclidean graph edge per component (geometry-test ball padding).
    euclid_l_max: Vec<f64>,
    /// Queue-ordered edges per component, consumed by `run_component`.
    queues: Vec<Vec<Edge>>,
    comp: Vec<ComponentState>,
    stamp: Vec<u32>,
    epoch: u32,
    ball: Vec<usize>,
    seen: Vec<bool>,
    stats: Stats,
    timings: Timings,
}

/// Finished reconstruction state.
#[derive(Debug, Clone)]
pub struct Reconstruction {
    pub rs: RotationSystem,
    pub stats: Stats,
    pub timings: Timings,
}

impl<'a> Mesher<'a> {
    /// Builds the circular ordering, seeds every component with its MST and
    /// starts face tracking.
    pub fn new(graph: &'a Graph, positions: &'a [Point3], normals: &'a [UnitNormal], params: &Params, options: Options) -> Result<Self> {
        params.validate()?;
        let start = Instant::now();
        let n = graph.vertex_count();
        let tree = KdTree::build(positions)?;
        let mut rs = RotationSystem::new(graph, positions, normals);
        let mut comp = vec![ComponentState::default(); graph.component_count()];
        let mut euclid_l_max = vec![0.0f64; graph.component_count()];
        for e in graph.edges() {
            let c = graph.component_of(e.u);
            euclid_l_max[c] = euclid_l_max[c].max((positions[e.u] - positions[e.v]).norm());
        }
        let queues = graph.sorted_edges_by_component();
        for (c, queue) in queues.iter().enumerate() {
            let mst = spanning_forest(n, queue);
            comp[c].edges = mst.len();
            comp[c].faces = usize::from(!mst.is_empty());
            rs.init_forest(mst.iter().map(|e| (e.u, e.v)))?;
        }
        let ft = FaceTracker::from_rotation_system(&rs, options.seed);
        let capacity = rs.halfedge_capacity();
        let mut mesher = Mesher {
            graph,
            positions,
            normals,
            params: params.clone(),
            options,
            tree,
            rs,
            ft,
            euclid_l_max,
            comp,
            queues,
            stamp: vec![0; n],
            epoch: 0,
            ball: Vec::new(),
            seen: vec![false; capacity],
            stats: Stats::default(),
            timings: Timings::default(),
        };
        for c in 0..graph.component_count() {
            mesher.audit_component(c, true)?;
        }
        mesher.timings.init = start.elapsed();
        Ok(mesher)
    }

    pub fn rotation_system(&self) -> &RotationSystem {
        &self.rs
    }

    pub fn face_tracker(&self) -> &FaceTracker {
        &self.ft
    }

    pub fn stats(&self) -> &Stats {
        &self.stats
    }

    pub fn graph(&self) -> &Graph {
        self.graph
    }

    /// Runs every stage on every component.
    pub fn run(mut self) -> Result<Reconstruction> {
        for c in 0..self.graph.component_count() {
            if self.graph.component_members(c).len() < 2 {
                continue;
            }
            self.run_component(c)?;
        }
        Ok(Reconstruction {
            rs: self.rs,
            stats: self.stats,
            timings: self.timings,
        })
    }

    fn run_component(&mut self, c: usize) -> Result<()> {
        let t = Instant::now();
        let queue = std::mem::take(&mut self.queues[c]);
        let limit = if self.params.handles_enabled() {
            (2 * queue.len()).div_ceil(3)
        } else {
            queue.len()
        };
        self.insertion_stage(&queue[..limit])?;
        self.audit_component(c, true)?;
        self.timings.insertion += t.elapsed();

        let t = Instant::now();
        let mut handle_vertices = Vec::new();
        if self.params.handles_enabled() {
            let candidates = self.find_handle_candidates(c)?;
            self.stats.handle_candidates += candidates.len();
            for (u, v) in self.connect_handles(c, &candidates)? {
                handle_vertices.push(u);
                handle_vertices.push(v);
            }
            self.audit_component(c, true)?;
        }
        self.timings.handles += t.elapsed();

        let t = Instant::now();
        self.triangulate(c, &handle_vertices)?;
        self.audit_component(c, true)?;
        self.timings.triangulation += t.elapsed();
        Ok(())
    }

    /// Inserts every queue edge passing the topology, geometry and quality tests.
    pub fn insertion_stage(&mut self, queue: &[Edge]) -> Result<()> {
        for e in queue {
            let (u, v) = (e.u, e.v);
            if self.rs.has_edge(u, v) {
                continue;
            }
            if !self.topology_test(u, v)? {
                self.stats.rejected_topology += 1;
                continue;
            }
            if !self.geometry_test(u, v) {
                self.stats.rejected_geometry += 1;
                continue;
            }
            if !self.quality_test(u, v)? {
                self.stats.rejected_quality += 1;
                continue;
            }
            let ins = self.rs.insert_edge(u, v)?;
            self.ft.split_on_insert(&ins)?;
            self.stats.inserted += 1;
            self.record_face_split(u)?;
        }
        Ok(())
    }

    /// Bookkeeping after an edge split one face of `u`'s component into two.
    fn record_face_split(&mut self, u: usize) -> Result<()> {
        let c = self.graph.component_of(u);
        self.comp[c].edges += 1;
        self.comp[c].faces += 1;
        let small = self.graph.component_members(c).len() <= self.options.audit_orbit_limit;
        self.audit_component(c, small)
    }

    /// Checks `V − E + F = 2 − 2·handles` for component `c`, optionally
    /// recounting faces by walking τ-orbits.
    fn audit_component(&mut self, c: usize, recount: bool) -> Result<()> {
        let graph = self.graph;
        let members = graph.component_members(c);
        if members.len() < 2 {
            return Ok(());
        }
        let st = &self.comp[c];
        self.stats.euler_checks += 1;
        let chi = members.len() as i64 - st.edges as i64 + st.faces as i64;
        if chi != 2 - 2 * st.handles as i64 {
            return Err(Error::Assertion(format!(
                "component {c}: V - E + F = {chi} with {} handles",
                st.handles
            )));
        }
        if recount {
            self.stats.orbit_recounts += 1;
            let faces = self.rs.count_faces_of(members, &mut self.seen);
            if faces != self.comp[c].faces {
                return Err(Error::Assertion(format!(
                    "component {c}: {faces} faces walked, {} expected",
                    self.comp[c].faces
                )));
            }
        }
        Ok(())
    }

    fn next_epoch(&mut self) -> u32 {
        if self.epoch == u32::MAX {
            self.stamp.iter_mut().for_each(|s| *s = 0);
            self.epoch = 0;
        }
        self.epoch += 1;
        self.epoch
    }
}

/// Reconstructs all components of `graph`.
pub fn reconstruct(graph: &Graph, positions: &[Point3], normals: &[UnitNormal], params: &Params, options: Options) -> Result<Reconstruction> {
    Mesher::new(graph, positions, normals, params, options)?.run()
}

#[cfg(test)]
mod tests;
