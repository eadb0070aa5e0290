//! Exact nearest-neighbor search over 2D points.
//!
//! A static KD-tree built once per POI category. Queries prune on the
//! squared splitting-plane distance, so results match a linear scan
//! exactly: comparisons happen on squared distances and the square root
//! is taken once at the end.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::fx;
use crate::geometry::PointXY;

#[derive(Debug, Clone)]
struct Node {
    point: PointXY,
    axis: u8,
    left: Option<usize>,
    right: Option<usize>,
}

#[derive(Debug, Clone)]
pub struct SpatialIndex {
    nodes: Vec<Node>,
    root: usize,
}

impl SpatialIndex {
    /// Builds an index over `points`. Duplicates are kept.
    pub fn build(points: &[PointXY]) -> Result<SpatialIndex> {
        if points.is_empty() {
            return Err(Error::EmptyInput("spatial index needs at least one point".into()));
        }
        for p in points {
            if !p.x.is_finite() || !p.y.is_finite() {
                return Err(Error::Validation("spatial index point must be finite".into()));
            }
        }
        let mut pts: Vec<PointXY> = points.to_vec();
        let mut nodes = Vec::with_capacity(pts.len());
        let root = build_node(&mut pts, 0, &mut nodes);
        Ok(SpatialIndex { nodes, root })
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// The closest indexed point to `q` and its Euclidean distance.
    pub fn nearest(&self, q: PointXY) -> (PointXY, f64) {
        let mut best = (self.nodes[self.root].point, f64::INFINITY);
        self.search(self.root, q, &mut best);
        (best.0, fx::sqrt(best.1))
    }

    /// Distance from `q` to the closest indexed point.
    pub fn nearest_distance(&self, q: PointXY) -> f64 {
        self.nearest(q).1
    }

    fn search(&self, id: usize, q: PointXY, best: &mut (PointXY, f64)) {
        let node = &self.nodes[id];
        let d2 = squared_distance(node.point, q);
        if d2 < best.1 {
            *best = (node.point, d2);
        }
        let delta = match node.axis {
            0 => q.x - node.point.x,
            _ => q.y - node.point.y,
        };
        let (near, far) = if delta <= 0.0 {
            (node.left, node.right)
        } else {
            (node.right, node.left)
        };
        if let Some(n) = near {
            self.search(n, q, best);
        }
        if let Some(f) = far {
            if delta * delta <= best.1 {
                self.search(f, q, best);
            }
        }
    }
}

fn build_node(pts: &mut [PointXY], depth: usize, nodes: &mut Vec<Node>) -> usize {
    let axis = (depth % 2) as u8;
    let mid = pts.len() / 2;
    pts.select_nth_unstable_by(mid, |a, b| {
        let (ka, kb) = match axis {
            0 => (a.x, b.x),
            _ => (a.y, b.y),
        };
        ka.partial_cmp(&kb).expect("points are finite")
    });
    let point = pts[mid];
    let (lo, hi) = pts.split_at_mut(mid);
    let hi = &mut hi[1..];
    let left = if lo.is_empty() { None } else { Some(build_node(lo, depth + 1, nodes)) };
    let right = if hi.is_empty() { None } else { Some(build_node(hi, depth + 1, nodes)) };
    nodes.push(Node { point, axis, left, right });
    nodes.len() - 1
}

pub fn squared_distance(a: PointXY, b: PointXY) -> f64 {
    let dx = a.x - b.x;
    let dy = a.y - b.y;
    dx * dx + dy * dy
}

/// Brute-force nearest neighbor, for cross-checking the index.
pub fn nearest_linear(points: &[PointXY], q: PointXY) -> Result<(PointXY, f64)> {
    let mut best: Option<(PointXY, f64)> = None;
    for &p in points {
        let d2 = squared_distance(p, q);
        if best.is_none_or(|(_, b)| d2 < b) {
            best = Some((p, d2));
        }
    }
    let (p, d2) =
        best.ok_or_else(|| Error::EmptyInput("nearest neighbor of zero points".into()))?;
    Ok((p, fx::sqrt(d2)))
}
