//! Static kd-tree over 3D points for k-nearest-neighbor and ball queries.
//!
//! Built once by median splits along the widest bounding-box axis. Results
//! are deterministic: equal distances are ordered by ascending point index.

use crate::error::Error;
use crate::geom::Point3;

const LEAF_SIZE: usize = 8;
const NIL: u32 = u32::MAX;

#[derive(Debug, Clone)]
struct Node {
    /// Range into `perm` covered by this subtree.
    start: u32,
    end: u32,
    /// Split axis, or 3 for a leaf.
    axis: u8,
    value: f64,
    left: u32,
    right: u32,
}

/// Fixed-width rows of neighbor indices, nearest first.
#[derive(Debug, Clone)]
pub struct NeighborTable {
    width: usize,
    idx: Vec<u32>,
}

impl NeighborTable {
    pub fn width(&self) -> usize {
        self.width
    }

    pub fn len(&self) -> usize {
        self.idx.len().checked_div(self.width).unwrap_or(0)
    }

    pub fn is_empty(&self) -> bool {
        self.idx.is_empty()
    }

    pub fn row(&self, i: usize) -> impl ExactSizeIterator<Item = usize> + Clone + '_ {
        self.idx[i * self.width..(i + 1) * self.width].iter().map(|&j| j as usize)
    }
}

#[derive(Debug, Clone)]
pub struct KdTree {
    points: Vec<Point3>,
    perm: Vec<u32>,
    /// `points` permuted into leaf order, so leaf scans read contiguous memory.
    sorted: Vec<Point3>,
    nodes: Vec<Node>,
}

impl KdTree {
    pub fn build(points: &[Point3]) -> Result<Self, Error> {
        if points.is_empty() {
            return Err(Error::EmptyInput);
        }
        let mut tree = KdTree {
            points: points.to_vec(),
            perm: (0..points.len() as u32).collect(),
            sorted: Vec::new(),
            nodes: Vec::with_capacity(2 * points.len() / LEAF_SIZE + 1),
        };
        tree.build_node(0, points.len());
        tree.sorted = tree.perm.iter().map(|&i| points[i as usize]).collect();
        Ok(tree)
    }

    fn build_node(&mut self, start: usize, end: usize) -> u32 {
        let id = self.nodes.len() as u32;
        self.nodes.push(Node {
            start: start as u32,
            end: end as u32,
            axis: 3,
            value: 0.0,
            left: NIL,
            right: NIL,
        });
        if end - start <= LEAF_SIZE {
            return id;
        }
        let mut lo = [f64::INFINITY; 3];
        let mut hi = [f64::NEG_INFINITY; 3];
        for &i in &self.perm[start..end] {
            let p = &self.points[i as usize];
            for a in 0..3 {
                lo[a] = lo[a].min(p[a]);
                hi[a] = hi[a].max(p[a]);
            }
        }
        let axis = (0..3)
            .max_by(|&a, &b| (hi[a] - lo[a]).total_cmp(&(hi[b] - lo[b])))
            .unwrap_or(0);
        if hi[axis] - lo[axis] <= 0.0 {
            // all points coincide
            return id;
        }
        let mid = start + (end - start) / 2;
        let points = &self.points;
        self.perm[start..end].select_nth_unstable_by(mid - start, |&a, &b| {
            points[a as usize][axis]
                .total_cmp(&points[b as usize][axis])
                .then(a.cmp(&b))
        });
        let value = self.points[self.perm[mid] as usize][axis];
        let left = self.build_node(start, mid);
        let right = self.build_node(mid, end);
        let node = &mut self.nodes[id as usize];
        node.axis = axis as u8;
        node.value = value;
        node.left = left;
        node.right = right;
        id
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[Point3] {
        &self.points
    }

    pub fn depth(&self) -> usize {
        fn rec(nodes: &[Node], id: u32) -> usize {
            let n = &nodes[id as usize];
            if n.axis == 3 {
                1
            } else {
                1 + rec(nodes, n.left).max(rec(nodes, n.right))
            }
        }
        rec(&self.nodes, 0)
    }

    /// Indices stored in leaves, in leaf order.
    pub fn leaf_indices(&self) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.len());
        let mut stack = vec![0u32];
        while let Some(id) = stack.pop() {
            let n = &self.nodes[id as usize];
            if n.axis == 3 {
                out.extend(self.perm[n.start as usize..n.end as usize].iter().map(|&i| i as usize));
            } else {
                stack.push(n.right);
                stack.push(n.left);
            }
        }
        out
    }

    /// The `min(k, N)` nearest points to `q` as `(index, distance)`, ascending.
    pub fn knn(&self, q: &Point3, k: usize) -> Vec<(usize, f64)> {
        let mut best = Vec::with_capacity(k + 1);
        self.knn_into(q, k, &mut best);
        best.into_iter().map(|(d2, i)| (i as usize, d2.sqrt())).collect()
    }

    /// Like [`knn`](Self::knn) but fills `best` with `(squared distance, index)`.
    pub fn knn_into(&self, q: &Point3, k: usize, best: &mut Vec<(f64, u32)>) {
        best.clear();
        if k == 0 {
            return;
        }
        self.knn_rec(0, q, k, best);
    }

    fn knn_rec(&self, id: u32, q: &Point3, k: usize, best: &mut Vec<(f64, u32)>) {
        let node = &self.nodes[id as usize];
        if node.axis == 3 {
            let range = node.start as usize..node.end as usize;
            for (&i, p) in self.perm[range.clone()].iter().zip(&self.sorted[range]) {
                let d2 = (p - q).norm_squared();
                let cand = (d2, i);
                if best.len() == k {
                    let worst = best[k - 1];
                    if d2 > worst.0 || (d2 == worst.0 && i > worst.1) {
                        continue;
                    }
                    best.pop();
                }
                let pos = best.partition_point(|&(bd, bi)| bd < d2 || (bd == d2 && bi < i));
                best.insert(pos, cand);
            }
            return;
        }
        let diff = q[node.axis as usize] - node.value;
        let (near, far) = if diff < 0.0 {
            (node.left, node.right)
        } else {
            (node.right, node.left)
        };
        self.knn_rec(near, q, k, best);
        if best.len() < k || diff * diff <= best[k - 1].0 {
            self.knn_rec(far, q, k, best);
        }
    }

    /// The `min(k, N)` nearest neighbors of every indexed point (self included).
    pub fn knn_table(&self, k: usize) -> NeighborTable {
        let width = k.min(self.points.len());
        let mut idx = Vec::with_capacity(width * self.points.len());
        let mut best = Vec::with_capacity(width + 1);
        for p in &self.points {
            self.knn_into(p, width, &mut best);
            idx.extend(best.iter().map(|&(_, i)| i));
        }
        NeighborTable { width, idx }
    }

    /// All indices with `‖p − c‖ ≤ rad`, ascending.
    pub fn radius_query(&self, c: &Point3, rad: f64) -> Vec<usize> {
        let mut out = Vec::new();
        self.radius_into(c, rad, &mut out);
        out.sort_unstable();
        out
    }

    /// Appends (unsorted) all indices within `rad` of `c` to `out` after clearing it.
    pub fn radius_into(&self, c: &Point3, rad: f64, out: &mut Vec<usize>) {
        out.clear();
        if rad < 0.0 {
            return;
        }
        let r2 = rad * rad;
        let mut stack = Vec::with_capacity(64);
        stack.push(0u32);
        while let Some(id) = stack.pop() {
            let node = &self.nodes[id as usize];
            if node.axis == 3 {
                let range = node.start as usize..node.end as usize;
                for (&i, p) in self.perm[range.clone()].iter().zip(&self.sorted[range]) {
                    if (p - c).norm_squared() <= r2 {
                        out.push(i as usize);
                    }
                }
                continue;
            }
            let diff = c[node.axis as usize] - node.value;
            // the median point itself sits in the right subtree, so equality must visit both
            if diff <= rad {
                stack.push(node.left);
            }
            if diff >= -rad {
                stack.push(node.right);
            }
        }
    }
}
