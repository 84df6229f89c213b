//! End-to-end run: normals, optional smoothing, candidate graph,
//! reconstruction, triangle extraction and metrics.

use crate::error::{Error, Result};
use crate::graph::{build_knn_graph, Metric};
use crate::kdtree::KdTree;
use crate::mesh_out::{compute_metrics, extract_triangles, Metrics, TriangleMesh};
use crate::geom::{UnitNormal, Vec3};
use crate::params::Params;
use crate::pointcloud::{estimate_normals, smooth_project, PointCloud};
use crate::reconstruct::{reconstruct, Options, Stats};

#[derive(Debug, Clone, Default)]
pub struct PipelineConfig {
    pub params: Params,
    /// Estimate normals when the input has none. When false such input is an error.
    pub skip_normal_estimation: bool,
    pub options: Options,
}

impl PipelineConfig {
    pub fn new(params: Params) -> Self {
        PipelineConfig { params, ..Default::default() }
    }
}

#[derive(Debug, Clone)]
pub struct Output {
    pub mesh: TriangleMesh,
    pub metrics: Metrics,
    pub stats: Stats,
    /// Connected components of the candidate graph.
    pub graph_components: usize,
}

/// Ensures `cloud` has normals, estimating them if allowed. Returns whether
/// they were estimated.
fn with_normals(cloud: &mut PointCloud, config: &PipelineConfig) -> Result<bool> {
    if cloud.normals.is_some() {
        return Ok(false);
    }
    if config.skip_normal_estimation {
        return Err(Error::MissingNormals);
    }
    cloud.normals = Some(estimate_normals(cloud, config.params.k)?.normals);
    Ok(true)
}

/// Smoothing passes for noisy input. Estimated normals are re-estimated on
/// the smoothed positions and flipped to agree with the previous ones.
fn smooth(cloud: PointCloud, params: &Params, reestimate: bool) -> Result<PointCloud> {
    let mut cloud = cloud;
    for _ in 0..params.smoothing_iterations {
        let mut next = smooth_project(&cloud, params.k, params.cos_theta())?;
        if reestimate {
            let old = cloud.normals.as_ref().expect("normals present");
            let fresh = estimate_normals(&next, params.k)?.normals;
            next.normals = Some(
                fresh
                    .into_iter()
                    .zip(old)
                    .map(|(n, o)| if n.dot(o) < 0.0 { n.flipped() } else { n })
                    .collect(),
            );
        }
        cloud = next;
    }
    Ok(cloud)
}

/// Spatially coherent vertex order (kd-tree leaf order). Reconstruction runs
/// on the permuted cloud so neighborhoods stay close in memory.
fn spatial_order(positions: &[crate::geom::Point3]) -> Result<Vec<usize>> {
    Ok(KdTree::build(positions)?.leaf_indices())
}

fn permute<T: Clone>(v: &[T], order: &[usize]) -> Vec<T> {
    order.iter().map(|&i| v[i].clone()).collect()
}

/// Rotates `cycle` so its smallest entry comes first, keeping the cyclic order.
fn canonical_cycle(cycle: &mut [usize]) {
    if let Some(k) = (0..cycle.len()).min_by_key(|&k| cycle[k]) {
        cycle.rotate_left(k);
    }
}

/// Maps a mesh over permuted indices back to input indices, in a canonical
/// order that does not depend on the permutation.
fn unpermute(mesh: TriangleMesh, order: &[usize], cloud: &PointCloud, normals: &[UnitNormal]) -> TriangleMesh {
    let mut triangles: Vec<[usize; 3]> = mesh
        .triangles
        .iter()
        .map(|t| {
            let mut t = t.map(|i| order[i]);
            canonical_cycle(&mut t);
            t
        })
        .collect();
    triangles.sort_unstable();
    let mut holes: Vec<Vec<usize>> = mesh
        .holes
        .iter()
        .map(|h| {
            let mut h: Vec<usize> = h.iter().map(|&i| order[i]).collect();
            canonical_cycle(&mut h);
            h
        })
        .collect();
    holes.sort_unstable();
    let mut input_normals = vec![Vec3::zeros(); order.len()];
    for (k, &i) in order.iter().enumerate() {
        input_normals[i] = normals[k].into_inner();
    }
    TriangleMesh {
        vertices: cloud.original_positions.clone(),
        normals: Some(input_normals),
        triangles,
        holes,
    }
}

/// Reconstructs a mesh from `cloud`. Output vertices are the cloud's
/// original positions, in input order.
pub fn run(cloud: &PointCloud, config: &PipelineConfig) -> Result<Output> {
    config.params.validate()?;
    if cloud.is_empty() {
        return Err(Error::EmptyInput);
    }
    let mut work = cloud.clone();
    let estimated = with_normals(&mut work, config)?;
    let metric = if config.params.noisy {
        work = smooth(work, &config.params, estimated)?;
        Metric::Projection
    } else {
        Metric::Euclidean
    };
    let order = spatial_order(&work.positions)?;
    work = PointCloud {
        positions: permute(&work.positions, &order),
        normals: work.normals.as_deref().map(|n| permute(n, &order)),
        original_positions: permute(&work.original_positions, &order),
    };
    let graph = build_knn_graph(&work, &config.params, metric)?;
    log::info!(
        "candidate graph: {} vertices, {} edges, {} components",
        graph.vertex_count(),
        graph.edge_count(),
        graph.component_count()
    );
    let normals = work.normals.as_deref().expect("normals present");
    let rec = reconstruct(&graph, &work.positions, normals, &config.params, config.options.clone())?;
    let mesh = unpermute(extract_triangles(&rec.rs, &work.original_positions, None), &order, cloud, normals);
    let metrics = compute_metrics(&mesh, cloud.len(), Some(&rec.timings));
    log::info!(
        "{} triangles, {} boundary edges, {} handles, r_v = {:.6}",
        mesh.triangles.len(),
        metrics.boundary_edges,
        rec.stats.handles.len(),
        metrics.r_v
    );
    let mut stats = rec.stats;
    for e in &mut stats.handles {
        *e = (order[e.0], order[e.1]);
    }
    Ok(Output {
        mesh,
        metrics,
        stats,
        graph_components: graph.component_count(),
    })
}
