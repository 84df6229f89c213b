use crate::error::{Result, TopologyError};
use crate::geom::{segments_intersect_2d, tangent_frame, triangle_angles, Point2, Segment2, UnitNormal};
use crate::rotation::Corner;

use super::Mesher;

/// `‖N_u + N_v‖` below this leaves no usable projection plane.
const MIN_PLANE_NORMAL: f64 = 1e-6;

impl Mesher<'_> {
    fn corners(&self, u: usize, v: usize) -> Result<Option<(Corner, Corner)>, TopologyError> {
        let cu = match self.rs.corner_of(u, v) {
            Ok(c) => c,
            Err(TopologyError::IsolatedVertex(_)) => return Ok(None),
            Err(e) => return Err(e),
        };
        let cv = match self.rs.corner_of(v, u) {
            Ok(c) => c,
            Err(TopologyError::IsolatedVertex(_)) => return Ok(None),
            Err(e) => return Err(e),
        };
        Ok(Some((cu, cv)))
    }

    /// True iff both insertion corners of `{u, v}` border the same face.
    ///
    /// The face in the corner `(prev, next)` at a vertex contains `ι(prev)`
    /// followed by `next`; all four of these halfedges must share one face.
    pub fn topology_test(&self, u: usize, v: usize) -> Result<bool> {
        let Some((cu, cv)) = self.corners(u, v)? else {
            return Ok(false);
        };
        let side = [self.rs.iota(cu.prev), cu.next, self.rs.iota(cv.prev), cv.next];
        let f = self.ft.face_id(side[0])?;
        for &h in &side[1..] {
            if self.ft.face_id(h)? != f {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// True iff the projected candidate `{u, v}` crosses no projected mesh edge nearby.
    ///
    /// Mesh edges with an endpoint in the ball of radius `|uv|/2 + L_max`
    /// around the midpoint are projected into the plane whose normal is the
    /// mean of the endpoint normals.
    pub fn geometry_test(&mut self, u: usize, v: usize) -> bool {
        let sum = self.normals[u].as_vec() + self.normals[v].as_vec();
        if sum.norm() < MIN_PLANE_NORMAL {
            return false;
        }
        let Ok(normal) = UnitNormal::new_normalize(sum) else {
            return false;
        };
        let (e1, e2) = tangent_frame(&normal);
        let (pu, pv) = (self.positions[u], self.positions[v]);
        let mid = nalgebra::center(&pu, &pv);
        let proj = |i: usize| {
            let d = self.positions[i] - mid;
            Point2::new(d.dot(&e1), d.dot(&e2))
        };
        let c = self.graph.component_of(u);
        let radius = 0.5 * (pu - pv).norm() + self.euclid_l_max[c];
        let mut ball = std::mem::take(&mut self.ball);
        self.tree.radius_into(&mid, radius, &mut ball);
        let epoch = self.next_epoch();
        ball.retain(|&w| self.graph.component_of(w) == c);
        for &w in &ball {
            self.stamp[w] = epoch;
        }
        let candidate = Segment2::new([u, v], proj(u), proj(v));
        let mut clear = true;
        'outer: for &w in &ball {
            let pw = proj(w);
            for x in self.rs.mesh_neighbors(w) {
                // edges with both ends in the ball are visited once, from the larger end
                if self.stamp[x] == epoch && x > w {
                    continue;
                }
                if segments_intersect_2d(&candidate, &Segment2::new([w, x], pw, proj(x))) {
                    clear = false;
                    break 'outer;
                }
            }
        }
        self.ball = ball;
        clear
    }

    /// Rejects the insertion when it would close a triangle with an angle
    /// outside the configured bounds.
    pub fn quality_test(&self, u: usize, v: usize) -> Result<bool> {
        let Some((cu, cv)) = self.corners(u, v)? else {
            return Ok(true);
        };
        let rs = &self.rs;
        // Face behind (u, v): (u, v), g_next, ..., ι(h_prev).
        let apex_a = (rs.head(cv.next) == rs.head(cu.prev) && rs.tau(cv.next) == rs.iota(cu.prev)).then(|| rs.head(cv.next));
        // Face behind (v, u): (v, u), h_next, ..., ι(g_prev).
        let apex_b = (rs.head(cu.next) == rs.head(cv.prev) && rs.tau(cu.next) == rs.iota(cv.prev)).then(|| rs.head(cu.next));
        let (lo, hi) = (self.params.quality_min_deg.to_radians(), self.params.quality_max_deg.to_radians());
        for apex in [apex_a, apex_b].into_iter().flatten() {
            match triangle_angles(&self.positions[u], &self.positions[v], &self.positions[apex]) {
                Ok((a, b, c)) if [a, b, c].iter().all(|&x| x >= lo && x <= hi) => {}
                _ => return Ok(false),
            }
        }
        Ok(true)
    }
}
