//! Rotation systems over the candidate graph.
//!
//! Every directed graph edge (halfedge) gets a fixed id: its slot in the
//! circular ordering (CO) of its tail, where each vertex's neighbors are
//! sorted by angle about the vertex normal. The live rotation system (RS)
//! marks the halfedges currently in the mesh and links them, per tail, into
//! a cyclic list that is always a subsequence of the CO.
//!
//! `ρ` moves to the next outgoing halfedge counterclockwise, `ι` reverses a
//! halfedge and `τ = ρ ∘ ι` walks around a face.

use std::f64::consts::TAU;

use crate::error::TopologyError;
use crate::geom::{plane_angle, reference_direction, Point3, UnitNormal};
use crate::graph::Graph;

pub const NIL: u32 = u32::MAX;

/// Result of splicing an edge `{u, v}` into the RS.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Insertion {
    /// The new halfedges `(u, v)` and `(v, u)`.
    pub e: usize,
    pub f: usize,
    /// Corner at `u` the edge was placed into.
    pub h_prev: usize,
    pub h_next: usize,
    /// Corner at `v`.
    pub g_prev: usize,
    pub g_next: usize,
}

/// An adjacent pair of RS halfedges at a vertex; `(h, h)` at a degree-1 vertex.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Corner {
    pub prev: usize,
    pub next: usize,
}

/// Per-halfedge links, kept together so a traversal step touches one cache line.
#[derive(Debug, Clone, Copy)]
struct Half {
    head: u32,
    twin: u32,
    /// RS successor and predecessor at the tail; `NIL` while inactive.
    next: u32,
    prev: u32,
}

#[derive(Debug, Clone)]
pub struct RotationSystem {
    offsets: Vec<usize>,
    half: Vec<Half>,
    angle: Vec<f64>,
    /// CO slot of each graph adjacency slot (graph rows are index-sorted).
    by_neighbor: Vec<u32>,
    sorted_neighbors: Vec<u32>,
    degree: Vec<u32>,
    any: Vec<u32>,
    edges: usize,
    degenerate_angles: usize,
}

impl RotationSystem {
    /// Builds the circular ordering of `graph` about `normals`; the RS starts empty.
    ///
    /// Neighbors whose direction projects to (nearly) nothing get a tiny
    /// index-scaled angle so the order stays strict.
    pub fn new(graph: &Graph, positions: &[Point3], normals: &[UnitNormal]) -> Self {
        let n = graph.vertex_count();
        let mut offsets = Vec::with_capacity(n + 1);
        offsets.push(0);
        for u in 0..n {
            offsets.push(offsets[u] + graph.degree(u));
        }
        let total = offsets[n];
        let mut head = vec![0u32; total];
        let mut angle = vec![0.0; total];
        let mut by_neighbor = vec![0u32; total];
        let mut sorted_neighbors = vec![0u32; total];
        let mut degenerate_angles = 0;
        let mut row: Vec<(f64, u32, u32)> = Vec::new();
        for u in 0..n {
            let nu = &normals[u];
            let reference = reference_direction(nu);
            row.clear();
            for (k, &v) in graph.neighbors(u).iter().enumerate() {
                let a = match plane_angle(&positions[v as usize], &positions[u], nu, &reference) {
                    Ok(a) => a,
                    Err(_) => {
                        degenerate_angles += 1;
                        (v as f64 + 1.0) * 1e-9 % TAU
                    }
                };
                row.push((a, v, k as u32));
            }
            row.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
            let base = offsets[u];
            for (s, &(a, v, k)) in row.iter().enumerate() {
                head[base + s] = v;
                angle[base + s] = a;
                by_neighbor[base + k as usize] = s as u32;
                sorted_neighbors[base + k as usize] = v;
            }
        }
        if degenerate_angles > 0 {
            log::debug!("{degenerate_angles} neighbor directions were degenerate in their tangent plane");
        }
        let mut rs = RotationSystem {
            offsets,
            half: head
                .iter()
                .map(|&head| Half {
                    head,
                    twin: NIL,
                    next: NIL,
                    prev: NIL,
                })
                .collect(),
            angle,
            by_neighbor,
            sorted_neighbors,
            degree: vec![0; n],
            any: vec![NIL; n],
            edges: 0,
            degenerate_angles,
        };
        for u in 0..n {
            for h in rs.co_slots(u) {
                let v = rs.half[h].head as usize;
                rs.half[h].twin = rs.halfedge(v, u).expect("graph adjacency is symmetric") as u32;
            }
        }
        rs
    }

    /// Activates `edges` (a forest) all at once, linking each vertex's halfedges in CO order.
    pub fn init_forest(&mut self, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<(), TopologyError> {
        let mut touched = Vec::new();
        for (u, v) in edges {
            let h = self.halfedge(u, v).ok_or(TopologyError::NotAGraphEdge(u, v))?;
            if self.is_active(h) {
                continue;
            }
            // a self-link marks the halfedge active until its vertex is relinked
            let t = self.iota(h);
            self.half[h].next = h as u32;
            self.half[t].next = t as u32;
            self.edges += 1;
            touched.push(u);
            touched.push(v);
        }
        touched.sort_unstable();
        touched.dedup();
        for u in touched {
            self.relink(u);
        }
        Ok(())
    }

    /// Rebuilds the cyclic RS list at `u` from the active CO slots.
    fn relink(&mut self, u: usize) {
        let slots: Vec<usize> = self.co_slots(u).filter(|&h| self.is_active(h)).collect();
        self.degree[u] = slots.len() as u32;
        self.any[u] = slots.first().map_or(NIL, |&h| h as u32);
        for (i, &h) in slots.iter().enumerate() {
            let nx = slots[(i + 1) % slots.len()];
            self.half[h].next = nx as u32;
            self.half[nx].prev = h as u32;
        }
    }

    pub fn vertex_count(&self) -> usize {
        self.degree.len()
    }

    /// Total number of halfedge ids (both directions of every graph edge).
    pub fn halfedge_capacity(&self) -> usize {
        self.half.len()
    }

    /// Number of undirected edges currently in the mesh.
    pub fn edge_count(&self) -> usize {
        self.edges
    }

    pub fn degenerate_angle_count(&self) -> usize {
        self.degenerate_angles
    }

    /// CO slots (halfedge ids) of `u` in angular order.
    pub fn co_slots(&self, u: usize) -> std::ops::Range<usize> {
        self.offsets[u]..self.offsets[u + 1]
    }

    /// Halfedge id of `(u, v)` if `{u, v}` is a graph edge.
    pub fn halfedge(&self, u: usize, v: usize) -> Option<usize> {
        let (s, t) = (self.offsets[u], self.offsets[u + 1]);
        let k = self.sorted_neighbors[s..t].binary_search(&(v as u32)).ok()?;
        Some(s + self.by_neighbor[s + k] as usize)
    }

    #[inline]
    pub fn head(&self, h: usize) -> usize {
        self.half[h].head as usize
    }

    #[inline]
    pub fn tail(&self, h: usize) -> usize {
        self.half[self.half[h].twin as usize].head as usize
    }

    /// Angle of `h` about its tail's normal.
    #[inline]
    pub fn angle(&self, h: usize) -> f64 {
        self.angle[h]
    }

    #[inline]
    pub fn is_active(&self, h: usize) -> bool {
        self.half[h].next != NIL
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.halfedge(u, v).is_some_and(|h| self.is_active(h))
    }

    /// Mesh degree of `u`.
    #[inline]
    pub fn degree(&self, u: usize) -> usize {
        self.degree[u] as usize
    }

    /// Reverse halfedge; defined for every graph halfedge.
    #[inline]
    pub fn iota(&self, h: usize) -> usize {
        self.half[h].twin as usize
    }

    /// Next RS halfedge counterclockwise at the tail. Unchecked: `h` must be active.
    #[inline]
    pub fn rho(&self, h: usize) -> usize {
        self.half[h].next as usize
    }

    #[inline]
    pub fn rho_inv(&self, h: usize) -> usize {
        self.half[h].prev as usize
    }

    /// `ρ(ι(h))`: the halfedge after `h` on its face. Unchecked.
    #[inline]
    pub fn tau(&self, h: usize) -> usize {
        self.half[self.half[h].twin as usize].next as usize
    }

    pub fn try_rho(&self, h: usize) -> Result<usize, TopologyError> {
        self.check(h).map(|h| self.rho(h))
    }

    pub fn try_iota(&self, h: usize) -> Result<usize, TopologyError> {
        self.check(h).map(|h| self.iota(h))
    }

    pub fn try_tau(&self, h: usize) -> Result<usize, TopologyError> {
        self.check(h).map(|h| self.tau(h))
    }

    fn check(&self, h: usize) -> Result<usize, TopologyError> {
        if h < self.half.len() && self.is_active(h) {
            Ok(h)
        } else {
            Err(TopologyError::UnknownHalfedge(h))
        }
    }

    /// Active outgoing halfedges of `u`, counterclockwise.
    pub fn outgoing(&self, u: usize) -> impl Iterator<Item = usize> + '_ {
        let start = self.any[u];
        let count = self.degree[u] as usize;
        let mut h = start as usize;
        (0..count).map(move |_| {
            let cur = h;
            h = self.half[h].next as usize;
            cur
        })
    }

    /// Mesh neighbors of `u`, counterclockwise.
    pub fn mesh_neighbors(&self, u: usize) -> impl Iterator<Item = usize> + '_ {
        self.outgoing(u).map(|h| self.head(h))
    }

    /// All active halfedges in id order.
    pub fn active_halfedges(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.half.len()).filter(|&h| self.is_active(h))
    }

    /// The RS corner at `u` that the (inactive) halfedge `slot` would be inserted into.
    pub fn corner_for_slot(&self, u: usize, slot: usize) -> Result<Corner, TopologyError> {
        match self.degree[u] {
            0 => Err(TopologyError::IsolatedVertex(u)),
            1 => {
                let h = self.any[u] as usize;
                Ok(Corner { prev: h, next: h })
            }
            _ => {
                let (s, t) = (self.offsets[u], self.offsets[u + 1]);
                let len = t - s;
                let mut i = slot - s;
                for _ in 0..len {
                    i = if i == 0 { len - 1 } else { i - 1 };
                    let half = &self.half[s + i];
                    if half.next != NIL {
                        return Ok(Corner {
                            prev: s + i,
                            next: half.next as usize,
                        });
                    }
                }
                unreachable!("degree > 0 implies an active slot")
            }
        }
    }

    /// Corner at `u` that the edge towards `v` would split.
    pub fn corner_of(&self, u: usize, v: usize) -> Result<Corner, TopologyError> {
        let h = self.halfedge(u, v).ok_or(TopologyError::NotAGraphEdge(u, v))?;
        self.corner_for_slot(u, h)
    }

    /// Counterclockwise angular extent of a corner at its vertex, in `(0, 2π]`.
    pub fn corner_angle(&self, c: Corner) -> f64 {
        if c.prev == c.next {
            return TAU;
        }
        let d = self.angle[c.next] - self.angle[c.prev];
        if d <= 0.0 {
            d + TAU
        } else {
            d
        }
    }

    /// Splices `{u, v}` into its corners at both ends.
    pub fn insert_edge(&mut self, u: usize, v: usize) -> Result<Insertion, TopologyError> {
        let e = self.halfedge(u, v).ok_or(TopologyError::NotAGraphEdge(u, v))?;
        if self.is_active(e) {
            return Err(TopologyError::InconsistentState(format!("edge {{{u}, {v}}} already in mesh")));
        }
        let f = self.iota(e);
        let cu = self.corner_for_slot(u, e)?;
        let cv = self.corner_for_slot(v, f)?;
        self.splice_after(cu.prev, e);
        self.splice_after(cv.prev, f);
        self.edges += 1;
        Ok(Insertion {
            e,
            f,
            h_prev: cu.prev,
            h_next: cu.next,
            g_prev: cv.prev,
            g_next: cv.next,
        })
    }

    fn splice_after(&mut self, p: usize, h: usize) {
        let u = self.tail(h);
        let n = self.half[p].next as usize;
        self.half[p].next = h as u32;
        self.half[h].prev = p as u32;
        self.half[h].next = n as u32;
        self.half[n].prev = h as u32;
        self.degree[u] += 1;
    }

    /// Length of the τ-orbit through `h`.
    pub fn orbit_len(&self, h: usize) -> usize {
        let mut len = 1;
        let mut x = self.tau(h);
        while x != h {
            x = self.tau(x);
            len += 1;
        }
        len
    }

    /// The τ-orbit through `h`, starting at `h`.
    pub fn orbit(&self, h: usize) -> Vec<usize> {
        let mut out = vec![h];
        let mut x = self.tau(h);
        while x != h {
            out.push(x);
            x = self.tau(x);
        }
        out
    }

    /// All faces (τ-orbits), each starting at its smallest halfedge id.
    pub fn faces(&self) -> Vec<Vec<usize>> {
        let mut seen = vec![false; self.half.len()];
        let mut out = Vec::new();
        for h in self.active_halfedges() {
            if seen[h] {
                continue;
            }
            let orbit = self.orbit(h);
            for &x in &orbit {
                seen[x] = true;
            }
            out.push(orbit);
        }
        out
    }

    /// Number of τ-orbits among halfedges whose tail is in `vertices`.
    pub fn count_faces_of(&self, vertices: &[usize], seen: &mut [bool]) -> usize {
        let mut count = 0;
        let mut visited = Vec::new();
        for &u in vertices {
            for h in self.outgoing(u) {
                if seen[h] {
                    continue;
                }
                count += 1;
                let mut x = h;
                loop {
                    seen[x] = true;
                    visited.push(x);
                    x = self.tau(x);
                    if x == h {
                        break;
                    }
                }
            }
        }
        for x in visited {
            seen[x] = false;
        }
        count
    }
}
