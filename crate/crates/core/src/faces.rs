//! Face identities for the growing mesh.
//!
//! Each face's boundary (its τ-orbit) is stored in order as a treap with
//! implicit keys. Nodes are indexed by halfedge id and keep parent links, so
//! two halfedges lie on the same face iff they reach the same root. Inserting
//! an edge splits one face into two with two splits and three joins.

use crate::error::TopologyError;
use crate::rotation::{Insertion, RotationSystem, NIL};

#[derive(Debug, Clone)]
pub struct FaceTracker {
    nodes: Vec<Node>,
    salt: u64,
    faces: usize,
}

/// Treap node of one halfedge; `size == 0` marks an untracked halfedge.
#[derive(Debug, Clone, Copy)]
struct Node {
    left: u32,
    right: u32,
    parent: u32,
    size: u32,
}

const UNTRACKED: Node = Node {
    left: NIL,
    right: NIL,
    parent: NIL,
    size: 0,
};

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

impl FaceTracker {
    /// An empty tracker for `capacity` halfedge ids; priorities derive from `seed`.
    pub fn with_capacity(capacity: usize, seed: u64) -> Self {
        FaceTracker {
            nodes: vec![UNTRACKED; capacity],
            salt: splitmix64(seed),
            faces: 0,
        }
    }

    /// One tree per τ-orbit of the active halfedges of `rs`.
    pub fn from_rotation_system(rs: &RotationSystem, seed: u64) -> Self {
        let mut ft = Self::with_capacity(rs.halfedge_capacity(), seed);
        for face in rs.faces() {
            ft.add_face(&face);
        }
        ft
    }

    /// Tracks `seq` as a new face in the given boundary order.
    pub fn add_face(&mut self, seq: &[usize]) {
        for &h in seq {
            assert!(!self.is_tracked(h), "halfedge {h} already tracked");
            self.reset(h);
        }
        self.build(seq);
        self.faces += 1;
    }

    /// Makes `h` a tracked singleton.
    fn reset(&mut self, h: usize) {
        self.nodes[h] = Node { size: 1, ..UNTRACKED };
    }

    #[inline]
    fn priority(&self, x: usize) -> u64 {
        splitmix64(x as u64 ^ self.salt)
    }

    /// Linear-time treap build over an in-order sequence (Cartesian tree by priority).
    fn build(&mut self, seq: &[usize]) -> u32 {
        let mut spine: Vec<u32> = Vec::new();
        for &h in seq {
            let mut last = NIL;
            while let Some(&top) = spine.last() {
                if self.priority(top as usize) >= self.priority(h) {
                    break;
                }
                last = spine.pop().unwrap();
            }
            self.nodes[h].left = last;
            if last != NIL {
                self.nodes[last as usize].parent = h as u32;
            }
            if let Some(&top) = spine.last() {
                self.nodes[top as usize].right = h as u32;
                self.nodes[h].parent = top;
            }
            spine.push(h as u32);
        }
        let Some(&root) = spine.first() else { return NIL };
        self.nodes[root as usize].parent = NIL;
        self.recompute_sizes(root);
        root
    }

    fn recompute_sizes(&mut self, root: u32) {
        let mut stack = vec![(root, false)];
        while let Some((x, done)) = stack.pop() {
            if done {
                self.update(x as usize);
                continue;
            }
            stack.push((x, true));
            for c in [self.nodes[x as usize].left, self.nodes[x as usize].right] {
                if c != NIL {
                    stack.push((c, false));
                }
            }
        }
    }

    #[inline]
    fn sz(&self, x: u32) -> u32 {
        if x == NIL {
            0
        } else {
            self.nodes[x as usize].size
        }
    }

    #[inline]
    fn update(&mut self, x: usize) {
        self.nodes[x].size = 1 + self.sz(self.nodes[x].left) + self.sz(self.nodes[x].right);
    }

    fn merge(&mut self, a: u32, b: u32) -> u32 {
        if a == NIL {
            return b;
        }
        if b == NIL {
            return a;
        }
        if self.priority(a as usize) > self.priority(b as usize) {
            let r = self.merge(self.nodes[a as usize].right, b);
            self.nodes[a as usize].right = r;
            self.nodes[r as usize].parent = a;
            self.update(a as usize);
            self.nodes[a as usize].parent = NIL;
            a
        } else {
            let l = self.merge(a, self.nodes[b as usize].left);
            self.nodes[b as usize].left = l;
            self.nodes[l as usize].parent = b;
            self.update(b as usize);
            self.nodes[b as usize].parent = NIL;
            b
        }
    }

    /// Splits `t` into its first `k` elements and the rest.
    fn split(&mut self, t: u32, k: u32) -> (u32, u32) {
        if t == NIL {
            return (NIL, NIL);
        }
        let x = t as usize;
        let ls = self.sz(self.nodes[x].left);
        if k <= ls {
            let (a, b) = self.split(self.nodes[x].left, k);
            self.nodes[x].left = b;
            if b != NIL {
                self.nodes[b as usize].parent = t;
            }
            self.update(x);
            if a != NIL {
                self.nodes[a as usize].parent = NIL;
            }
            self.nodes[x].parent = NIL;
            (a, t)
        } else {
            let (a, b) = self.split(self.nodes[x].right, k - ls - 1);
            self.nodes[x].right = a;
            if a != NIL {
                self.nodes[a as usize].parent = t;
            }
            self.update(x);
            if b != NIL {
                self.nodes[b as usize].parent = NIL;
            }
            self.nodes[x].parent = NIL;
            (t, b)
        }
    }

    fn check(&self, h: usize) -> Result<(), TopologyError> {
        if self.is_tracked(h) {
            Ok(())
        } else {
            Err(TopologyError::UnknownHalfedge(h))
        }
    }

    fn root_unchecked(&self, h: usize) -> u32 {
        let mut x = h as u32;
        while self.nodes[x as usize].parent != NIL {
            x = self.nodes[x as usize].parent;
        }
        x
    }

    /// Position of `h` within its face sequence.
    fn rank(&self, h: usize) -> u32 {
        let mut r = self.sz(self.nodes[h].left);
        let mut x = h as u32;
        while self.nodes[x as usize].parent != NIL {
            let p = self.nodes[x as usize].parent;
            if self.nodes[p as usize].right == x {
                r += self.sz(self.nodes[p as usize].left) + 1;
            }
            x = p;
        }
        r
    }

    /// Current face identity of `h`. Only stable until the next mutation.
    pub fn face_id(&self, h: usize) -> Result<usize, TopologyError> {
        self.check(h)?;
        Ok(self.root_unchecked(h) as usize)
    }

    pub fn same_face(&self, a: usize, b: usize) -> Result<bool, TopologyError> {
        Ok(self.face_id(a)? == self.face_id(b)?)
    }

    /// Number of halfedges on the face of `h`.
    pub fn face_size(&self, h: usize) -> Result<usize, TopologyError> {
        let r = self.face_id(h)?;
        Ok(self.nodes[r].size as usize)
    }

    pub fn face_count(&self) -> usize {
        self.faces
    }

    pub fn is_tracked(&self, h: usize) -> bool {
        h < self.nodes.len() && self.nodes[h].size != 0
    }

    /// The face of `h` in boundary order, starting at its first tree element.
    pub fn face_sequence(&self, h: usize) -> Result<Vec<usize>, TopologyError> {
        let root = self.face_id(h)? as u32;
        let mut out = Vec::with_capacity(self.nodes[root as usize].size as usize);
        let mut stack = Vec::new();
        let mut x = root;
        while x != NIL || !stack.is_empty() {
            while x != NIL {
                stack.push(x);
                x = self.nodes[x as usize].left;
            }
            let top = stack.pop().unwrap();
            out.push(top as usize);
            x = self.nodes[top as usize].right;
        }
        Ok(out)
    }

    /// Updates faces after `rs.insert_edge` produced `ins`.
    ///
    /// The face holding both corners is cut at the corner successors; the
    /// run starting at `g_next` becomes face A (behind `e`) and the run
    /// starting at `h_next` face B (behind `f`). Returns the new face ids.
    pub fn split_on_insert(&mut self, ins: &Insertion) -> Result<(usize, usize), TopologyError> {
        self.check(ins.h_next)?;
        self.check(ins.g_next)?;
        for h in [ins.e, ins.f] {
            if self.is_tracked(h) {
                return Err(TopologyError::InconsistentState(format!("halfedge {h} already tracked")));
            }
        }
        let root = self.root_unchecked(ins.h_next);
        if root != self.root_unchecked(ins.g_next) {
            return Err(TopologyError::InconsistentState(format!(
                "corner successors {} and {} lie on different faces",
                ins.h_next, ins.g_next
            )));
        }
        let p = self.rank(ins.h_next);
        let (l, r) = self.split(root, p);
        let s = self.merge(r, l);
        let q = self.rank(ins.g_next);
        let (b_seq, a_seq) = self.split(s, q);
        for h in [ins.e, ins.f] {
            self.reset(h);
        }
        let a = self.merge(ins.e as u32, a_seq);
        let b = self.merge(ins.f as u32, b_seq);
        self.faces += 1;
        Ok((a as usize, b as usize))
    }

    /// Face id of every tracked halfedge (`usize::MAX` elsewhere), as a frozen snapshot.
    pub fn snapshot(&self) -> Vec<usize> {
        (0..self.nodes.len())
            .map(|h| if self.is_tracked(h) { self.root_unchecked(h) as usize } else { usize::MAX })
            .collect()
    }

    /// Height of the tree holding `h` (diagnostics and tests).
    pub fn height(&self, h: usize) -> Result<usize, TopologyError> {
        let root = self.face_id(h)? as u32;
        let mut best = 0;
        let mut stack = vec![(root, 1usize)];
        while let Some((x, d)) = stack.pop() {
            best = best.max(d);
            for c in [self.nodes[x as usize].left, self.nodes[x as usize].right] {
                if c != NIL {
                    stack.push((c, d + 1));
                }
            }
        }
        Ok(best)
    }
}
