use std::collections::{HashMap, VecDeque};
use std::f64::consts::PI;

use crate::error::Result;
use crate::graph::{Edge, UnionFind};

use super::Mesher;

/// An unused graph edge joining two different faces through wide corners.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HandleCandidate {
    pub edge: Edge,
    /// Face ids (frozen after the insertion stage) of the corners at `u` and `v`.
    pub faces: (usize, usize),
}

impl Mesher<'_> {
    /// Handle candidates of component `c`, ascending by length.
    ///
    /// Must run after the insertion stage and before any handle is added;
    /// face ids come from the face tracker as it stands then.
    pub fn find_handle_candidates(&mut self, c: usize) -> Result<Vec<HandleCandidate>> {
        let mut out = Vec::new();
        for e in self.graph.sorted_edges(c) {
            if self.rs.has_edge(e.u, e.v) {
                continue;
            }
            let (Ok(cu), Ok(cv)) = (self.rs.corner_of(e.u, e.v), self.rs.corner_of(e.v, e.u)) else {
                continue;
            };
            let fu = self.ft.face_id(cu.next)?;
            let fv = self.ft.face_id(cv.next)?;
            if fu == fv {
                continue;
            }
            if self.rs.corner_angle(cu) <= PI || self.rs.corner_angle(cv) <= PI {
                continue;
            }
            if !self.geometry_test(e.u, e.v) {
                continue;
            }
            out.push(HandleCandidate { edge: e, faces: (fu, fv) });
        }
        Ok(out)
    }

    /// Fewest mesh edges between `u` and `v`, or `None` when more than `cap`.
    pub fn hop_distance_capped(&mut self, u: usize, v: usize, cap: usize) -> Option<usize> {
        if u == v {
            return Some(0);
        }
        let epoch = self.next_epoch();
        let mut queue = VecDeque::new();
        self.stamp[u] = epoch;
        queue.push_back((u, 0usize));
        while let Some((x, d)) = queue.pop_front() {
            if d == cap {
                continue;
            }
            for y in self.rs.mesh_neighbors(x) {
                if y == v {
                    return Some(d + 1);
                }
                if self.stamp[y] != epoch {
                    self.stamp[y] = epoch;
                    queue.push_back((y, d + 1));
                }
            }
        }
        None
    }

    /// Inserts candidates in order while they join faces not yet merged,
    /// their endpoints are more than `n` hops apart, both corners are still
    /// wider than π, no nearby edge is crossed and the genus limit allows.
    /// Returns the inserted edges.
    pub fn connect_handles(&mut self, c: usize, candidates: &[HandleCandidate]) -> Result<Vec<(usize, usize)>> {
        let mut inserted = Vec::new();
        if !self.params.handles_enabled() {
            return Ok(inserted);
        }
        // Face classes: frozen face ids merged as handles join them. Handle
        // halfedges themselves inherit the class of the merged face.
        let mut class_of: HashMap<usize, usize> = HashMap::new();
        for cand in candidates {
            for f in [cand.faces.0, cand.faces.1] {
                let next = class_of.len();
                class_of.entry(f).or_insert(next);
            }
        }
        let mut classes = UnionFind::new(class_of.len());
        let mut handle_class: HashMap<usize, usize> = HashMap::new();
        let limit = self.params.max_genus.unwrap_or(usize::MAX);
        for cand in candidates {
            if self.comp[c].handles >= limit {
                break;
            }
            let (u, v) = (cand.edge.u, cand.edge.v);
            if self.rs.has_edge(u, v) {
                continue;
            }
            let (Ok(cu), Ok(cv)) = (self.rs.corner_of(u, v), self.rs.corner_of(v, u)) else {
                continue;
            };
            let class = |h: usize, ft: &crate::faces::FaceTracker| -> Option<usize> {
                if let Some(&k) = handle_class.get(&h) {
                    return Some(k);
                }
                ft.face_id(h).ok().and_then(|f| class_of.get(&f).copied())
            };
            let (Some(ku), Some(kv)) = (class(cu.next, &self.ft), class(cv.next, &self.ft)) else {
                continue;
            };
            if classes.find(ku) == classes.find(kv) {
                continue;
            }
            if self.rs.corner_angle(cu) <= PI || self.rs.corner_angle(cv) <= PI {
                continue;
            }
            if self.hop_distance_capped(u, v, self.params.n).is_some() {
                continue;
            }
            if !self.geometry_test(u, v) {
                continue;
            }
            let ins = self.rs.insert_edge(u, v)?;
            classes.union(ku, kv);
            let merged = classes.find(ku);
            handle_class.insert(ins.e, merged);
            handle_class.insert(ins.f, merged);
            let st = &mut self.comp[c];
            st.edges += 1;
            st.faces -= 1;
            st.handles += 1;
            self.stats.handles.push((u, v));
            inserted.push((u, v));
            log::debug!("handle {{{u}, {v}}} inserted in component {c}");
            self.audit_component(c, false)?;
        }
        Ok(inserted)
    }
}
