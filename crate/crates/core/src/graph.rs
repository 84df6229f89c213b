//! The candidate graph: symmetric kNN relation with normal and length culling,
//! its connected components, per-component minimum spanning trees and the
//! ascending edge queue.

use crate::error::{Error, Result};
use crate::kdtree::KdTree;
use crate::params::Params;
use crate::pointcloud::{projected_length, PointCloud};

/// How edge lengths are measured.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Metric {
    Euclidean,
    /// Mean of the edge's projections into both endpoint tangent planes.
    Projection,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge {
    pub u: usize,
    pub v: usize,
    pub len: f64,
}

impl Edge {
    /// Queue order: length, then smaller endpoint, then larger endpoint.
    pub fn queue_cmp(&self, other: &Edge) -> std::cmp::Ordering {
        let key = |e: &Edge| (e.u.min(e.v), e.u.max(e.v));
        self.len.total_cmp(&other.len).then_with(|| key(self).cmp(&key(other)))
    }
}

/// Minimal disjoint-set forest with path halving and union by size.
#[derive(Debug, Clone)]
pub struct UnionFind {
    parent: Vec<u32>,
    size: Vec<u32>,
}

impl UnionFind {
    pub fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n as u32).collect(),
            size: vec![1; n],
        }
    }

    pub fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] as usize != x {
            let p = self.parent[x] as usize;
            self.parent[x] = self.parent[p];
            x = p;
        }
        x
    }

    /// Returns false when `a` and `b` were already joined.
    pub fn union(&mut self, a: usize, b: usize) -> bool {
        let (mut a, mut b) = (self.find(a), self.find(b));
        if a == b {
            return false;
        }
        if self.size[a] < self.size[b] {
            std::mem::swap(&mut a, &mut b);
        }
        self.parent[b] = a as u32;
        self.size[a] += self.size[b];
        true
    }
}

#[derive(Debug, Clone)]
pub struct Graph {
    offsets: Vec<usize>,
    nbrs: Vec<u32>,
    lens: Vec<f64>,
    edges: Vec<Edge>,
    component: Vec<u32>,
    members: Vec<Vec<usize>>,
    component_l_max: Vec<f64>,
}

impl Graph {
    /// Builds a graph from undirected edges; duplicates keep their first length.
    ///
    /// Panics on self-loops or out-of-range endpoints.
    pub fn from_edges(n: usize, edges: impl IntoIterator<Item = Edge>) -> Self {
        let mut list: Vec<Edge> = edges
            .into_iter()
            .map(|e| {
                assert!(e.u != e.v && e.u < n && e.v < n, "invalid edge {e:?}");
                Edge {
                    u: e.u.min(e.v),
                    v: e.u.max(e.v),
                    len: e.len,
                }
            })
            .collect();
        list.sort_by_key(|e| (e.u, e.v));
        list.dedup_by_key(|e| (e.u, e.v));

        let mut degree = vec![0usize; n + 1];
        for e in &list {
            degree[e.u + 1] += 1;
            degree[e.v + 1] += 1;
        }
        for i in 0..n {
            degree[i + 1] += degree[i];
        }
        let offsets = degree;
        let mut fill = offsets.clone();
        let mut nbrs = vec![0u32; 2 * list.len()];
        let mut lens = vec![0.0; 2 * list.len()];
        // Edges are sorted by (u, v), so each adjacency row comes out sorted.
        for e in &list {
            nbrs[fill[e.u]] = e.v as u32;
            lens[fill[e.u]] = e.len;
            fill[e.u] += 1;
        }
        for e in &list {
            nbrs[fill[e.v]] = e.u as u32;
            lens[fill[e.v]] = e.len;
            fill[e.v] += 1;
        }
        for u in 0..n {
            let (s, t) = (offsets[u], offsets[u + 1]);
            let mut row: Vec<(u32, f64)> = nbrs[s..t].iter().copied().zip(lens[s..t].iter().copied()).collect();
            row.sort_by_key(|r| r.0);
            for (k, (v, l)) in row.into_iter().enumerate() {
                nbrs[s + k] = v;
                lens[s + k] = l;
            }
        }

        let mut uf = UnionFind::new(n);
        for e in &list {
            uf.union(e.u, e.v);
        }
        let mut label_of_root = vec![u32::MAX; n];
        let mut component = vec![0u32; n];
        let mut members: Vec<Vec<usize>> = Vec::new();
        for v in 0..n {
            let r = uf.find(v);
            if label_of_root[r] == u32::MAX {
                label_of_root[r] = members.len() as u32;
                members.push(Vec::new());
            }
            component[v] = label_of_root[r];
            members[component[v] as usize].push(v);
        }
        let mut component_l_max = vec![0.0f64; members.len()];
        for e in &list {
            let c = component[e.u] as usize;
            component_l_max[c] = component_l_max[c].max(e.len);
        }
        Graph {
            offsets,
            nbrs,
            lens,
            edges: list,
            component,
            members,
            component_l_max,
        }
    }

    pub fn vertex_count(&self) -> usize {
        self.component.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Undirected edges with `u < v`, sorted by `(u, v)`.
    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    /// Neighbors of `u` in ascending index order.
    pub fn neighbors(&self, u: usize) -> &[u32] {
        &self.nbrs[self.offsets[u]..self.offsets[u + 1]]
    }

    /// Edge lengths aligned with [`neighbors`](Self::neighbors).
    pub fn neighbor_lengths(&self, u: usize) -> &[f64] {
        &self.lens[self.offsets[u]..self.offsets[u + 1]]
    }

    pub fn degree(&self, u: usize) -> usize {
        self.offsets[u + 1] - self.offsets[u]
    }

    /// Position of `v` within the adjacency row of `u`.
    pub fn slot(&self, u: usize, v: usize) -> Option<usize> {
        self.neighbors(u).binary_search(&(v as u32)).ok()
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.slot(u, v).is_some()
    }

    pub fn edge_len(&self, u: usize, v: usize) -> Option<f64> {
        self.slot(u, v).map(|s| self.neighbor_lengths(u)[s])
    }

    /// Maximum edge length over the whole graph (0 without edges).
    pub fn l_max(&self) -> f64 {
        self.component_l_max.iter().copied().fold(0.0, f64::max)
    }

    /// Maximum edge length within component `c`.
    pub fn component_l_max(&self, c: usize) -> f64 {
        self.component_l_max[c]
    }

    pub fn component_of(&self, v: usize) -> usize {
        self.component[v] as usize
    }

    /// Component label per vertex; labels are numbered by smallest member.
    pub fn component_labels(&self) -> &[u32] {
        &self.component
    }

    pub fn component_count(&self) -> usize {
        self.members.len()
    }

    /// Vertices of component `c`, ascending.
    pub fn component_members(&self, c: usize) -> &[usize] {
        &self.members[c]
    }

    /// Minimum spanning tree of component `c` under the queue order.
    pub fn minimum_spanning_tree(&self, c: usize) -> Vec<Edge> {
        spanning_forest(self.vertex_count(), &self.sorted_edges(c))
    }

    /// All edges of component `c` in queue order.
    pub fn sorted_edges(&self, c: usize) -> Vec<Edge> {
        let mut q: Vec<Edge> = self
            .edges
            .iter()
            .filter(|e| self.component[e.u] as usize == c)
            .copied()
            .collect();
        q.sort_by(Edge::queue_cmp);
        q
    }

    /// Queue-ordered edges of every component, from a single sort.
    pub fn sorted_edges_by_component(&self) -> Vec<Vec<Edge>> {
        let mut all = self.edges.clone();
        all.sort_by(Edge::queue_cmp);
        let mut out = vec![Vec::new(); self.component_count()];
        for e in all {
            out[self.component[e.u] as usize].push(e);
        }
        out
    }
}

/// Kruskal over edges already in queue order. With that strict total order
/// the result is the unique minimum spanning forest.
pub fn spanning_forest(n: usize, sorted: &[Edge]) -> Vec<Edge> {
    let mut uf = UnionFind::new(n);
    sorted.iter().filter(|e| uf.union(e.u, e.v)).copied().collect()
}

/// Builds the culled, symmetric kNN graph of a cloud with normals.
///
/// Edges joining points whose normals differ by more than `theta` are
/// dropped first; then edges longer than `r` times the mean length of the
/// survivors.
pub fn build_knn_graph(cloud: &PointCloud, params: &Params, metric: Metric) -> Result<Graph> {
    let normals = cloud.normals.as_ref().ok_or(Error::MissingNormals)?;
    let pts = &cloud.positions;
    let tree = KdTree::build(pts)?;
    let table = tree.knn_table(params.k + 1);
    let mut pairs: Vec<(u32, u32)> = Vec::with_capacity(pts.len() * params.k);
    for i in 0..pts.len() {
        for j in table.row(i).filter(|&j| j != i).take(params.k) {
            pairs.push((i.min(j) as u32, i.max(j) as u32));
        }
    }
    pairs.sort_unstable();
    pairs.dedup();

    let cos_theta = params.cos_theta();
    let survivors: Vec<Edge> = pairs
        .into_iter()
        .map(|(u, v)| (u as usize, v as usize))
        .filter(|&(u, v)| normals[u].dot(&normals[v]) >= cos_theta)
        .map(|(u, v)| {
            let e = pts[v] - pts[u];
            let len = match metric {
                Metric::Euclidean => e.norm(),
                Metric::Projection => projected_length(&e, &normals[u], &normals[v]),
            };
            Edge { u, v, len }
        })
        .collect();
    let mean = if survivors.is_empty() {
        0.0
    } else {
        survivors.iter().map(|e| e.len).sum::<f64>() / survivors.len() as f64
    };
    let limit = params.r * mean;
    let before = survivors.len();
    let kept: Vec<Edge> = survivors.into_iter().filter(|e| e.len <= limit).collect();
    log::debug!("graph: {} edges kept, {} culled by length (limit {limit:.4e})", kept.len(), before - kept.len());
    Ok(Graph::from_edges(pts.len(), kept))
}
