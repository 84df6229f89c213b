use std::cmp::Reverse;
use std::collections::BinaryHeap;

use crate::error::Result;

use super::Mesher;

/// Ear candidate `{v, w}` cutting off the corner `(h1, h2)` at their common neighbor.
type Ear = Reverse<(u64, usize, usize, usize, usize)>;

impl Mesher<'_> {
    /// Pushes every ear of the corners at `u` whose closing edge is an unused graph edge.
    fn push_ears(&self, u: usize, queue: &mut BinaryHeap<Ear>) {
        for h1 in self.rs.outgoing(u) {
            let h2 = self.rs.rho(h1);
            let (v, w) = (self.rs.head(h1), self.rs.head(h2));
            if v == w || self.rs.has_edge(v, w) {
                continue;
            }
            if let Some(len) = self.graph.edge_len(v, w) {
                queue.push(Reverse((len.to_bits(), v.min(w), v.max(w), h1, h2)));
            }
        }
    }

    /// Whether the ear `(h1, h2)` can still be cut by inserting `{v, w}`.
    ///
    /// The corner at `u` must be intact and `{v, w}` must land, in circular
    /// order, in the corners at `v` and `w` that border the same face.
    fn ear_is_valid(&self, h1: usize, h2: usize) -> bool {
        let rs = &self.rs;
        if !rs.is_active(h1) || !rs.is_active(h2) || rs.rho(h1) != h2 {
            return false;
        }
        let (v, w) = (rs.head(h1), rs.head(h2));
        if rs.has_edge(v, w) {
            return false;
        }
        match (rs.corner_of(v, w), rs.corner_of(w, v)) {
            (Ok(cv), Ok(cw)) => cv.next == rs.iota(h1) && cw.prev == rs.iota(h2),
            _ => false,
        }
    }

    /// Ear-clips the remaining faces of component `c`, starting next to `seeds`.
    pub fn triangulate(&mut self, c: usize, seeds: &[usize]) -> Result<()> {
        let graph = self.graph;
        let members = graph.component_members(c);
        let mut visited = vec![false; members.len()];
        let local = |x: usize| members.binary_search(&x).expect("vertex in component");
        let mut queue: BinaryHeap<Ear> = BinaryHeap::new();
        let mut sweep = seeds.iter().copied().chain(members.iter().copied());
        loop {
            if queue.is_empty() {
                // refill from the next unvisited vertex, or stop
                let Some(u) = sweep.by_ref().find(|&u| !visited[local(u)]) else {
                    break;
                };
                visited[local(u)] = true;
                self.push_ears(u, &mut queue);
                continue;
            }
            let Reverse((_, _, _, h1, h2)) = queue.pop().expect("non-empty queue");
            if !self.ear_is_valid(h1, h2) {
                continue;
            }
            let (v, w) = (self.rs.head(h1), self.rs.head(h2));
            if !self.geometry_test(v, w) {
                continue;
            }
            self.rs.insert_edge(v, w)?;
            self.stats.triangulation_inserted += 1;
            self.record_face_split(v)?;
            for x in [v, w] {
                visited[local(x)] = true;
                self.push_ears(x, &mut queue);
            }
        }
        Ok(())
    }
}
