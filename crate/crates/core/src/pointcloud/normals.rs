use std::cmp::Reverse;
use std::collections::BinaryHeap;

use nalgebra::{Matrix3, SymmetricEigen};

use crate::error::Result;
use crate::geom::{project_to_plane, Point3, UnitNormal, Vec3};
use crate::kdtree::{KdTree, NeighborTable};

use super::PointCloud;

/// Estimated normals plus a flag for points whose neighborhood spans at most a line.
#[derive(Debug, Clone)]
pub struct NormalEstimate {
    pub normals: Vec<UnitNormal>,
    pub degenerate: Vec<bool>,
}

/// Relative eigenvalue below which a covariance direction counts as absent.
const RANK_TOLERANCE: f64 = 1e-10;

/// A unit vector orthogonal to `d` (any, deterministic).
fn orthogonal_to(d: &Vec3) -> UnitNormal {
    let a = d.abs();
    let axis = if a.x <= a.y && a.x <= a.z {
        Vec3::x()
    } else if a.y <= a.z {
        Vec3::y()
    } else {
        Vec3::z()
    };
    UnitNormal::new_normalize(d.cross(&axis)).unwrap_or_else(|_| UnitNormal::z_axis())
}

/// Least-variance direction of the points in `nbrs`, or `None`-flagged fallback.
fn pca_normal(points: &[Point3], nbrs: impl Iterator<Item = usize> + Clone) -> (UnitNormal, bool) {
    let count = nbrs.clone().count() as f64;
    let centroid = nbrs.clone().fold(Vec3::zeros(), |acc, j| acc + points[j].coords) / count;
    let mut cov = Matrix3::zeros();
    for j in nbrs {
        let d = points[j].coords - centroid;
        cov += d * d.transpose();
    }
    let eig = SymmetricEigen::new(cov);
    let mut order = [0usize, 1, 2];
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let largest = eig.eigenvalues[order[2]];
    let middle = eig.eigenvalues[order[1]];
    if largest <= 0.0 {
        return (UnitNormal::z_axis(), true);
    }
    if middle <= RANK_TOLERANCE * largest {
        let dominant: Vec3 = eig.eigenvectors.column(order[2]).into();
        return (orthogonal_to(&dominant), true);
    }
    let least: Vec3 = eig.eigenvectors.column(order[0]).into();
    (UnitNormal::new_normalize(least).unwrap_or_else(|_| UnitNormal::z_axis()), false)
}

/// Flips normals so that neighboring normals agree in sign.
///
/// Orientation spreads along a minimum spanning tree of the neighbor graph
/// with cost `1 − |Nᵢ·Nⱼ|`. Each connected part is seeded at its highest
/// point, whose normal is made to point toward +z.
fn orient(points: &[Point3], table: &NeighborTable, normals: &mut [UnitNormal]) {
    let n = points.len();
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); n];
    for i in 0..n {
        for j in table.row(i).filter(|&j| j != i) {
            adj[i].push(j);
            adj[j].push(i);
        }
    }
    for list in &mut adj {
        list.sort_unstable();
        list.dedup();
    }
    let mut by_height: Vec<usize> = (0..n).collect();
    by_height.sort_by(|&a, &b| points[b].z.total_cmp(&points[a].z).then(a.cmp(&b)));

    let mut done = vec![false; n];
    let mut heap = BinaryHeap::new();
    for seed in by_height {
        if done[seed] {
            continue;
        }
        if normals[seed].z < 0.0 {
            normals[seed] = normals[seed].flipped();
        }
        heap.push(Reverse((0u64, seed, seed)));
        while let Some(Reverse((_, v, parent))) = heap.pop() {
            if done[v] {
                continue;
            }
            done[v] = true;
            if normals[parent].dot(&normals[v]) < 0.0 {
                normals[v] = normals[v].flipped();
            }
            for &w in &adj[v] {
                if !done[w] {
                    // Non-negative floats order like their bit patterns.
                    let cost = 1.0 - normals[v].dot(&normals[w]).abs();
                    heap.push(Reverse((cost.max(0.0).to_bits(), w, v)));
                }
            }
        }
    }
}

/// PCA normals over each point's `k`-neighborhood (self included), then
/// consistently oriented.
pub fn estimate_normals(cloud: &PointCloud, k: usize) -> Result<NormalEstimate> {
    let tree = KdTree::build(&cloud.positions)?;
    let table = tree.knn_table(k + 1);
    let pts = &cloud.positions;
    let (mut normals, degenerate): (Vec<_>, Vec<_>) = (0..pts.len()).map(|i| pca_normal(pts, table.row(i))).unzip();
    let flagged = degenerate.iter().filter(|&&d| d).count();
    if flagged > 0 {
        log::debug!("{flagged} points have rank-deficient neighborhoods");
    }
    orient(pts, &table, &mut normals);
    Ok(NormalEstimate { normals, degenerate })
}

/// One smoothing pass: each point moves onto the plane through its
/// neighborhood centroid whose normal is the mean neighborhood normal.
///
/// Only neighbors whose normal is within the angle given by `cos_theta` of
/// the point's own normal take part. Normals are left unchanged; callers
/// re-estimate them on the returned positions when needed.
pub fn smooth_project(cloud: &PointCloud, k: usize, cos_theta: f64) -> Result<PointCloud> {
    let normals = cloud.normals.as_ref().ok_or(crate::Error::MissingNormals)?;
    let tree = KdTree::build(&cloud.positions)?;
    let table = tree.knn_table(k + 1);
    let pts = &cloud.positions;
    let projected = (0..pts.len())
        .map(|i| {
            let ni = &normals[i];
            let mut centroid = Vec3::zeros();
            let mut mean = Vec3::zeros();
            let mut count = 0.0;
            for j in table.row(i).filter(|&j| ni.dot(&normals[j]) >= cos_theta) {
                centroid += pts[j].coords;
                mean += normals[j].as_vec();
                count += 1.0;
            }
            let plane_normal = UnitNormal::new_normalize(mean).unwrap_or(*ni);
            project_to_plane(&pts[i], &Point3::from(centroid / count), &plane_normal)
        })
        .collect();
    Ok(PointCloud {
        positions: projected,
        normals: cloud.normals.clone(),
        original_positions: cloud.original_positions.clone(),
    })
}
