//! Depth-truncated rooted binary tree with level-order (heap) indexing.
//!
//! The root is vertex 1 and the children of vertex `k` are `2k` and `2k + 1`,
//! so level, parent and children are index arithmetic and the sphere of
//! radius `r` occupies the contiguous index range `[2^r, 2^(r+1))`. Within a
//! sphere, increasing index order is the canonical coordinate order used by
//! every sphere-slice matrix downstream.

use crate::error::{Error, Result};
use std::ops::Range;

/// One-based heap index of a vertex.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct VertexId(usize);

impl VertexId {
    pub fn new(index: usize) -> Self {
        assert!(index >= 1, "vertex indices are 1-based");
        VertexId(index)
    }

    pub fn index(self) -> usize {
        self.0
    }

    /// Graph distance from the root; equals floor(log2(index)).
    pub fn level(self) -> usize {
        self.0.ilog2() as usize
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TreeGeometry {
    depth: usize,
}

impl TreeGeometry {
    pub fn new(depth: usize) -> Self {
        TreeGeometry { depth }
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn vertex_count(&self) -> usize {
        (1 << (self.depth + 1)) - 1
    }

    pub fn contains(&self, v: VertexId) -> bool {
        v.index() >= 1 && v.index() <= self.vertex_count()
    }

    pub fn is_root(&self, v: VertexId) -> bool {
        v.index() == 1
    }

    pub fn is_leaf(&self, v: VertexId) -> bool {
        v.level() == self.depth
    }

    pub fn parent(&self, v: VertexId) -> Option<VertexId> {
        (v.index() > 1).then(|| VertexId(v.index() / 2))
    }

    pub fn children(&self, v: VertexId) -> Option<[VertexId; 2]> {
        (v.level() < self.depth).then(|| [VertexId(2 * v.index()), VertexId(2 * v.index() + 1)])
    }

    pub fn neighbors(&self, v: VertexId) -> Vec<VertexId> {
        let mut out = Vec::with_capacity(3);
        if let Some(p) = self.parent(v) {
            out.push(p);
        }
        if let Some(c) = self.children(v) {
            out.extend(c);
        }
        out
    }

    pub fn degree(&self, v: VertexId) -> usize {
        self.neighbors(v).len()
    }

    pub fn vertices(&self) -> impl Iterator<Item = VertexId> {
        (1..=self.vertex_count()).map(VertexId)
    }

    /// Zero-based position of a vertex in the canonical coordinate order.
    pub fn array_index(&self, v: VertexId) -> usize {
        v.index() - 1
    }

    pub fn vertex_at(&self, array_index: usize) -> VertexId {
        VertexId(array_index + 1)
    }

    pub fn level_of_index(&self, array_index: usize) -> usize {
        VertexId(array_index + 1).level()
    }

    pub fn sphere_size(&self, r: usize) -> usize {
        1 << r
    }

    /// The 2^r vertices at distance `r` from the root, in increasing index
    /// order.
    pub fn sphere(&self, r: usize) -> Result<Vec<VertexId>> {
        self.check_radius(r)?;
        Ok(((1 << r)..(1 << (r + 1))).map(VertexId).collect())
    }

    /// Zero-based array offset of the first sphere-`r` vertex.
    pub fn sphere_offset(&self, r: usize) -> usize {
        (1 << r) - 1
    }

    pub fn check_radius(&self, r: usize) -> Result<()> {
        if r > self.depth {
            return Err(Error::RadiusOutOfRange {
                radius: r,
                depth: self.depth,
            });
        }
        Ok(())
    }

    /// Level of the deepest common ancestor of two same-sphere vertices.
    pub fn lca_level(&self, z: VertexId, w: VertexId) -> Result<usize> {
        if z.level() != w.level() {
            return Err(Error::LevelMismatch {
                left: z.level(),
                right: w.level(),
            });
        }
        let (mut a, mut b) = (z.index(), w.index());
        while a != b {
            a /= 2;
            b /= 2;
        }
        Ok(VertexId(a).level())
    }

    /// Array-index range of the level-`r` descendants of `v` (including `v`
    /// itself when `r == level(v)`).
    pub fn descendants_at(&self, v: VertexId, r: usize) -> Result<Range<usize>> {
        self.check_radius(r)?;
        let l = v.level();
        assert!(r >= l, "descendants_at called with r above the vertex");
        let span = 1 << (r - l);
        let first = v.index() * span;
        Ok((first - 1)..(first - 1 + span))
    }
}
