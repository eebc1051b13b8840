use std::cmp::Ordering;
use std::collections::BinaryHeap;

use super::{dist2, Point3, PointCloud};
use crate::error::{Error, Result};

const LEAF_SIZE: usize = 8;

/// One search result: point index and squared Euclidean distance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Neighbor {
    pub index: usize,
    pub dist2: f64,
}

impl Neighbor {
    fn key_cmp(&self, other: &Self) -> Ordering {
        self.dist2
            .total_cmp(&other.dist2)
            .then(self.index.cmp(&other.index))
    }
}

// Max-heap ordering on (distance, index) so the worst candidate sits on top.
struct Candidate(Neighbor);

impl PartialEq for Candidate {
    fn eq(&self, other: &Self) -> bool {
        self.0.key_cmp(&other.0) == Ordering::Equal
    }
}
impl Eq for Candidate {}
impl PartialOrd for Candidate {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Candidate {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.key_cmp(&other.0)
    }
}

#[derive(Debug, Clone)]
enum Node {
    Leaf {
        start: usize,
        end: usize,
    },
    Split {
        axis: usize,
        value: f64,
        left: usize,
        right: usize,
    },
}

/// Exact k-d tree over a fixed set of positions.
///
/// Results always equal a brute-force scan: candidates are ranked by
/// `(squared distance, index)` and a subtree is skipped only when its slab
/// distance is strictly larger than the current worst candidate.
#[derive(Debug, Clone)]
pub struct NeighborIndex {
    points: Vec<Point3>,
    order: Vec<usize>,
    nodes: Vec<Node>,
}

impl NeighborIndex {
    pub fn build(cloud: &PointCloud) -> Result<Self> {
        Self::from_points(cloud.positions())
    }

    pub fn from_points(points: &[Point3]) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::EmptyCloud);
        }
        if let Some(index) = points.iter().position(|p| !p.iter().all(|c| c.is_finite())) {
            return Err(Error::NonFinite { index });
        }
        let mut index = NeighborIndex {
            points: points.to_vec(),
            order: (0..points.len()).collect(),
            nodes: Vec::new(),
        };
        index.build_node(0, points.len());
        Ok(index)
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

    fn build_node(&mut self, start: usize, end: usize) -> usize {
        let id = self.nodes.len();
        if end - start <= LEAF_SIZE {
            self.nodes.push(Node::Leaf { start, end });
            return id;
        }
        let axis = self.widest_axis(start, end);
        let mid = start + (end - start) / 2;
        let points = &self.points;
        self.order[start..end].select_nth_unstable_by(mid - start, |&a, &b| {
            points[a][axis].total_cmp(&points[b][axis]).then(a.cmp(&b))
        });
        let value = self.points[self.order[mid]][axis];
        self.nodes.push(Node::Leaf { start: 0, end: 0 });
        let left = self.build_node(start, mid);
        let right = self.build_node(mid, end);
        self.nodes[id] = Node::Split {
            axis,
            value,
            left,
            right,
        };
        id
    }

    fn widest_axis(&self, start: usize, end: usize) -> usize {
        let mut lo = [f64::INFINITY; 3];
        let mut hi = [f64::NEG_INFINITY; 3];
        for &i in &self.order[start..end] {
            for a in 0..3 {
                lo[a] = lo[a].min(self.points[i][a]);
                hi[a] = hi[a].max(self.points[i][a]);
            }
        }
        (0..3)
            .max_by(|&a, &b| (hi[a] - lo[a]).total_cmp(&(hi[b] - lo[b])).then(b.cmp(&a)))
            .unwrap_or(0)
    }

    /// The `k` nearest points to `query`, ascending by distance, equal
    /// distances ordered by lower index.
    pub fn knn(&self, query: &Point3, k: usize) -> Result<Vec<Neighbor>> {
        if k == 0 || k > self.points.len() {
            return Err(Error::InsufficientPoints {
                needed: k.max(1),
                available: self.points.len(),
            });
        }
        let mut heap = BinaryHeap::with_capacity(k + 1);
        self.search_knn(0, query, k, &mut heap);
        let mut out: Vec<Neighbor> = heap.into_iter().map(|c| c.0).collect();
        out.sort_by(Neighbor::key_cmp);
        Ok(out)
    }

    pub fn nearest(&self, query: &Point3) -> Neighbor {
        self.knn(query, 1).expect("index is nonempty")[0]
    }

    fn search_knn(&self, node: usize, q: &Point3, k: usize, heap: &mut BinaryHeap<Candidate>) {
        match self.nodes[node] {
            Node::Leaf { start, end } => {
                for &i in &self.order[start..end] {
                    let cand = Neighbor {
                        index: i,
                        dist2: dist2(q, &self.points[i]),
                    };
                    if heap.len() < k {
                        heap.push(Candidate(cand));
                    } else if let Some(top) = heap.peek() {
                        if cand.key_cmp(&top.0) == Ordering::Less {
                            heap.pop();
                            heap.push(Candidate(cand));
                        }
                    }
                }
            }
            Node::Split {
                axis,
                value,
                left,
                right,
            } => {
                let diff = q[axis] - value;
                let (near, far) = if diff < 0.0 {
                    (left, right)
                } else {
                    (right, left)
                };
                self.search_knn(near, q, k, heap);
                let worst = if heap.len() < k {
                    f64::INFINITY
                } else {
                    heap.peek().map_or(f64::INFINITY, |c| c.0.dist2)
                };
                if diff * diff <= worst {
                    self.search_knn(far, q, k, heap);
                }
            }
        }
    }

    /// All points with squared distance `<= radius^2`, sorted like `knn`.
    pub fn within_radius(&self, query: &Point3, radius: f64) -> Vec<Neighbor> {
        let r2 = radius * radius;
        let mut out = Vec::new();
        self.search_radius(0, query, r2, &mut out);
        out.sort_by(Neighbor::key_cmp);
        out
    }

    /// True if some point lies within `radius` (squared distance `< radius^2`).
    pub fn any_closer_than(&self, query: &Point3, radius: f64) -> bool {
        self.any_closer(0, query, radius * radius)
    }

    fn any_closer(&self, node: usize, q: &Point3, r2: f64) -> bool {
        match self.nodes[node] {
            Node::Leaf { start, end } => self.order[start..end]
                .iter()
                .any(|&i| dist2(q, &self.points[i]) < r2),
            Node::Split {
                axis,
                value,
                left,
                right,
            } => {
                let diff = q[axis] - value;
                let (near, far) = if diff < 0.0 {
                    (left, right)
                } else {
                    (right, left)
                };
                self.any_closer(near, q, r2) || (diff * diff < r2 && self.any_closer(far, q, r2))
            }
        }
    }

    fn search_radius(&self, node: usize, q: &Point3, r2: f64, out: &mut Vec<Neighbor>) {
        match self.nodes[node] {
            Node::Leaf { start, end } => {
                for &i in &self.order[start..end] {
                    let d = dist2(q, &self.points[i]);
                    if d <= r2 {
                        out.push(Neighbor { index: i, dist2: d });
                    }
                }
            }
            Node::Split {
                axis,
                value,
                left,
                right,
            } => {
                let diff = q[axis] - value;
                let (near, far) = if diff < 0.0 {
                    (left, right)
                } else {
                    (right, left)
                };
                self.search_radius(near, q, r2, out);
                if diff * diff <= r2 {
                    self.search_radius(far, q, r2, out);
                }
            }
        }
    }
}
