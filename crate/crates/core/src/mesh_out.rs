//! Triangle extraction from a finished rotation system, mesh statistics and
//! mesh file I/O.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{FormatError, Result};
use crate::geom::{Point3, UnitNormal, Vec3};
use crate::graph::UnionFind;
use crate::io::{self, Format, RawGeometry};
use crate::reconstruct::Timings;
use crate::rotation::RotationSystem;

#[derive(Debug, Clone, Default, PartialEq)]
pub struct TriangleMesh {
    pub vertices: Vec<Point3>,
    pub normals: Option<Vec<Vec3>>,
    /// Counterclockwise about the vertex normals.
    pub triangles: Vec<[usize; 3]>,
    /// Faces that are not triangles, as vertex loops.
    pub holes: Vec<Vec<usize>>,
}

/// Emits every three-halfedge face of `rs` once. `vertices` are the
/// positions to export (the unsmoothed input).
pub fn extract_triangles(rs: &RotationSystem, vertices: &[Point3], normals: Option<&[UnitNormal]>) -> TriangleMesh {
    let mut mesh = TriangleMesh {
        vertices: vertices.to_vec(),
        normals: normals.map(|n| n.iter().map(|n| n.into_inner()).collect()),
        ..TriangleMesh::default()
    };
    for face in rs.faces() {
        let loop_: Vec<usize> = face.iter().map(|&h| rs.tail(h)).collect();
        // τ walks faces clockwise about the normals
        if let [a, b, c] = loop_[..] {
            mesh.triangles.push([a, c, b]);
        } else {
            mesh.holes.push(loop_);
        }
    }
    mesh
}

impl TriangleMesh {
    /// Sorted undirected edges with the number of incident triangles.
    pub fn edge_incidence(&self) -> Vec<((usize, usize), usize)> {
        let mut edges: Vec<(usize, usize)> = self
            .triangles
            .iter()
            .flat_map(|t| [(t[0], t[1]), (t[1], t[2]), (t[2], t[0])])
            .map(|(a, b)| (a.min(b), a.max(b)))
            .collect();
        edges.sort_unstable();
        let mut out: Vec<((usize, usize), usize)> = Vec::new();
        for e in edges {
            match out.last_mut() {
                Some((last, count)) if *last == e => *count += 1,
                _ => out.push((e, 1)),
            }
        }
        out
    }

    /// Every directed edge occurs at most once, so neighbors agree on orientation.
    pub fn is_consistently_oriented(&self) -> bool {
        let mut directed: Vec<(usize, usize)> = self
            .triangles
            .iter()
            .flat_map(|t| [(t[0], t[1]), (t[1], t[2]), (t[2], t[0])])
            .collect();
        directed.sort_unstable();
        directed.windows(2).all(|w| w[0] != w[1])
    }

    /// Mean length over distinct edges (0 for an empty mesh).
    pub fn mean_edge_length(&self) -> f64 {
        let edges = self.edge_incidence();
        if edges.is_empty() {
            return 0.0;
        }
        edges.iter().map(|((a, b), _)| (self.vertices[*a] - self.vertices[*b]).norm()).sum::<f64>() / edges.len() as f64
    }

    pub fn save(&self, path: &Path, format: Format) -> Result<()> {
        if format == Format::Xyz {
            return Err(FormatError::UnsupportedFormat("xyz cannot hold a mesh".into()).into());
        }
        let raw = RawGeometry {
            positions: self.vertices.clone(),
            normals: self.normals.clone(),
            faces: self.triangles.iter().map(|t| t.to_vec()).collect(),
        };
        io::write(path, format, &raw, false)?;
        Ok(())
    }

    /// Loads a triangle mesh; polygons with more than three corners are rejected.
    pub fn load(path: &Path) -> Result<Self> {
        let raw = io::read(path, Format::from_path(path)?)?;
        let mut triangles = Vec::with_capacity(raw.faces.len());
        for (i, f) in raw.faces.iter().enumerate() {
            let [a, b, c] = f[..] else {
                return Err(FormatError::Parse {
                    path: path.to_path_buf(),
                    line: 0,
                    message: format!("face {i} has {} corners, expected 3", f.len()),
                }
                .into());
            };
            triangles.push([a, b, c]);
        }
        Ok(TriangleMesh {
            vertices: raw.positions,
            normals: raw.normals,
            triangles,
            holes: Vec::new(),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ComponentMetrics {
    pub chi: i64,
    pub genus: i64,
    pub boundary_loops: usize,
    pub triangles: usize,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct TimingsMs {
    pub init: f64,
    pub insertion: f64,
    pub handles: f64,
    pub triangulation: f64,
}

impl From<&Timings> for TimingsMs {
    fn from(t: &Timings) -> Self {
        let ms = |d: std::time::Duration| d.as_secs_f64() * 1e3;
        TimingsMs {
            init: ms(t.init),
            insertion: ms(t.insertion),
            handles: ms(t.handles),
            triangulation: ms(t.triangulation),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub input_vertices: usize,
    pub referenced_vertices: usize,
    pub r_v: f64,
    pub boundary_edges: usize,
    pub components: Vec<ComponentMetrics>,
    pub timings_ms: TimingsMs,
}

impl Metrics {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("metrics serialize")
    }
}

/// Counts closed loops of boundary halfedges (directed triangle edges whose
/// reverse is in no triangle).
fn boundary_loops(boundary: &mut [(usize, usize)]) -> usize {
    boundary.sort_unstable();
    let mut used = vec![false; boundary.len()];
    let mut loops = 0;
    for start in 0..boundary.len() {
        if used[start] {
            continue;
        }
        loops += 1;
        let origin = boundary[start].0;
        let mut cur = start;
        loop {
            used[cur] = true;
            let head = boundary[cur].1;
            if head == origin {
                break;
            }
            let from = boundary.partition_point(|e| e.0 < head);
            match (from..boundary.len()).take_while(|&i| boundary[i].0 == head).find(|&i| !used[i]) {
                Some(next) => cur = next,
                None => break,
            }
        }
    }
    loops
}

/// Vertex reference ratio, boundary edge count and per-component topology.
///
/// Components are connected sets of triangles (sharing a vertex), ordered by
/// smallest vertex index. `genus = (2 − b − χ) / 2`, with `b` boundary loops.
pub fn compute_metrics(mesh: &TriangleMesh, input_vertices: usize, timings: Option<&Timings>) -> Metrics {
    let n = mesh.vertices.len();
    let mut referenced = vec![false; n];
    let mut uf = UnionFind::new(n);
    for t in &mesh.triangles {
        for &v in t {
            referenced[v] = true;
        }
        uf.union(t[0], t[1]);
        uf.union(t[1], t[2]);
    }
    let referenced_vertices = referenced.iter().filter(|&&r| r).count();

    let mut label = vec![usize::MAX; n];
    let mut count = 0;
    for v in (0..n).filter(|&v| referenced[v]) {
        let r = uf.find(v);
        if label[r] == usize::MAX {
            label[r] = count;
            count += 1;
        }
    }
    let comp_of = |uf: &mut UnionFind, v: usize| label[uf.find(v)];

    let mut verts = vec![0i64; count];
    let mut edges = vec![0i64; count];
    let mut tris = vec![0usize; count];
    let mut boundary: Vec<Vec<(usize, usize)>> = vec![Vec::new(); count];
    for v in (0..n).filter(|&v| referenced[v]) {
        verts[comp_of(&mut uf, v)] += 1;
    }
    for t in &mesh.triangles {
        tris[comp_of(&mut uf, t[0])] += 1;
    }
    let incidence = mesh.edge_incidence();
    let mut boundary_edges = 0;
    for &((a, _), k) in &incidence {
        edges[comp_of(&mut uf, a)] += 1;
        if k == 1 {
            boundary_edges += 1;
        }
    }
    let is_boundary = |a: usize, b: usize| {
        let key = (a.min(b), a.max(b));
        incidence
            .binary_search_by(|probe| probe.0.cmp(&key))
            .map(|i| incidence[i].1 == 1)
            .unwrap_or(false)
    };
    for t in &mesh.triangles {
        for (a, b) in [(t[0], t[1]), (t[1], t[2]), (t[2], t[0])] {
            if is_boundary(a, b) {
                boundary[comp_of(&mut uf, a)].push((a, b));
            }
        }
    }
    let components = (0..count)
        .map(|c| {
            let chi = verts[c] - edges[c] + tris[c] as i64;
            let b = boundary_loops(&mut boundary[c]);
            ComponentMetrics {
                chi,
                genus: (2 - b as i64 - chi).div_euclid(2),
                boundary_loops: b,
                triangles: tris[c],
            }
        })
        .collect();
    Metrics {
        input_vertices,
        referenced_vertices,
        r_v: if input_vertices == 0 { 0.0 } else { referenced_vertices as f64 / input_vertices as f64 },
        boundary_edges,
        components,
        timings_ms: timings.map(TimingsMs::from).unwrap_or_default(),
    }
}
