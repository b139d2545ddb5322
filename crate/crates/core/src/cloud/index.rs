use nalgebra::Point3;

use crate::cloud::PointCloud;
use crate::error::{Error, Result};

const LEAF_SIZE: usize = 16;
const NO_CHILD: u32 = u32::MAX;

#[derive(Clone, Copy, Debug)]
struct Node {
    min: [f64; 3],
    max: [f64; 3],
    left: u32,
    right: u32,
    // leaf payload: indices[start..end]
    start: u32,
    end: u32,
}

/// Exact nearest-neighbor / radius index over a point cloud.
///
/// A bounding-box kd-tree with median splits. All queries return exactly
/// what a brute-force linear scan would: nearest-neighbor ties are broken
/// by the smallest point index, radius queries use the strict inequality
/// `distance < radius` and report indices in ascending order.
///
/// The index owns a copy of the points, so it can outlive the cloud and be
/// queried from many threads at once.
#[derive(Debug, Clone)]
pub struct SpatialIndex {
    nodes: Vec<Node>,
    indices: Vec<u32>,
    points: Vec<Point3<f64>>,
    root: u32,
}

impl SpatialIndex {
    /// Builds the index. Errors on an empty cloud.
    pub fn build(cloud: &PointCloud) -> Result<Self> {
        if cloud.is_empty() {
            return Err(Error::InvalidParameter(
                "cannot index an empty point cloud".to_string(),
            ));
        }
        let points = cloud.points().to_vec();
        let mut index = Self {
            nodes: Vec::with_capacity(2 * points.len() / LEAF_SIZE + 2),
            indices: (0..points.len() as u32).collect(),
            points,
            root: 0,
        };
        index.root = index.build_range(0, index.points.len());
        Ok(index)
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[Point3<f64>] {
        &self.points
    }

    fn build_range(&mut self, start: usize, end: usize) -> u32 {
        let mut min = [f64::INFINITY; 3];
        let mut max = [f64::NEG_INFINITY; 3];
        for &idx in &self.indices[start..end] {
            let p = &self.points[idx as usize];
            for k in 0..3 {
                min[k] = min[k].min(p[k]);
                max[k] = max[k].max(p[k]);
            }
        }

        if end - start <= LEAF_SIZE {
            self.nodes.push(Node {
                min,
                max,
                left: NO_CHILD,
                right: NO_CHILD,
                start: start as u32,
                end: end as u32,
            });
            return (self.nodes.len() - 1) as u32;
        }

        let mut axis = 0;
        for k in 1..3 {
            if max[k] - min[k] > max[axis] - min[axis] {
                axis = k;
            }
        }
        let mid = start + (end - start) / 2;
        self.indices[start..end].select_nth_unstable_by(mid - start, |&a, &b| {
            let va = self.points[a as usize][axis];
            let vb = self.points[b as usize][axis];
            va.partial_cmp(&vb).unwrap_or(std::cmp::Ordering::Equal)
        });

        let left = self.build_range(start, mid);
        let right = self.build_range(mid, end);
        self.nodes.push(Node {
            min,
            max,
            left,
            right,
            start: 0,
            end: 0,
        });
        (self.nodes.len() - 1) as u32
    }

    fn box_dist_sq(node: &Node, q: &Point3<f64>) -> f64 {
        let mut d2 = 0.0;
        for k in 0..3 {
            let v = q[k];
            if v < node.min[k] {
                d2 += (node.min[k] - v) * (node.min[k] - v);
            } else if v > node.max[k] {
                d2 += (v - node.max[k]) * (v - node.max[k]);
            }
        }
        d2
    }

    /// Exact nearest neighbor; ties broken by the smallest point index.
    /// Returns `(point index, Euclidean distance)`.
    pub fn nearest(&self, query: &Point3<f64>) -> (usize, f64) {
        let mut best = (f64::INFINITY, usize::MAX);
        self.nearest_rec(self.root, query, &mut best);
        (best.1, best.0.sqrt())
    }

    fn nearest_rec(&self, node_idx: u32, q: &Point3<f64>, best: &mut (f64, usize)) {
        let node = &self.nodes[node_idx as usize];
        // Strictly-greater pruning keeps equidistant candidates in other
        // boxes reachable, which the smallest-index tie-break needs.
        if Self::box_dist_sq(node, q) > best.0 {
            return;
        }
        if node.left == NO_CHILD {
            for &idx in &self.indices[node.start as usize..node.end as usize] {
                let idx = idx as usize;
                let d2 = (self.points[idx] - q).norm_squared();
                if d2 < best.0 || (d2 == best.0 && idx < best.1) {
                    *best = (d2, idx);
                }
            }
            return;
        }
        let (l, r) = (node.left, node.right);
        let dl = Self::box_dist_sq(&self.nodes[l as usize], q);
        let dr = Self::box_dist_sq(&self.nodes[r as usize], q);
        if dl <= dr {
            self.nearest_rec(l, q, best);
            self.nearest_rec(r, q, best);
        } else {
            self.nearest_rec(r, q, best);
            self.nearest_rec(l, q, best);
        }
    }

    /// All indices with `distance(query, point) < radius` (strict), in
    /// ascending index order. Errors on negative radius.
    pub fn radius_neighbors(&self, query: &Point3<f64>, radius: f64) -> Result<Vec<usize>> {
        if radius < 0.0 {
            return Err(Error::InvalidParameter(format!(
                "radius must be non-negative, got {radius}"
            )));
        }
        let mut out = Vec::new();
        if radius > 0.0 {
            self.radius_rec(self.root, query, radius * radius, &mut out);
            out.sort_unstable();
        }
        Ok(out)
    }

    fn radius_rec(&self, node_idx: u32, q: &Point3<f64>, r2: f64, out: &mut Vec<usize>) {
        let node = &self.nodes[node_idx as usize];
        if Self::box_dist_sq(node, q) >= r2 {
            return;
        }
        if node.left == NO_CHILD {
            for &idx in &self.indices[node.start as usize..node.end as usize] {
                let idx = idx as usize;
                if (self.points[idx] - q).norm_squared() < r2 {
                    out.push(idx);
                }
            }
            return;
        }
        self.radius_rec(node.left, q, r2, out);
        self.radius_rec(node.right, q, r2, out);
    }

    /// The `k` nearest points, ordered by `(distance, index)` ascending.
    /// Returns all points when `k >= len`.
    pub fn k_nearest(&self, query: &Point3<f64>, k: usize) -> Vec<usize> {
        if k == 0 {
            return Vec::new();
        }
        let k = k.min(self.points.len());
        // (d2, idx) max-heap; the root is the current worst kept candidate.
        let mut heap: Vec<(f64, usize)> = Vec::with_capacity(k + 1);
        self.k_nearest_rec(self.root, query, k, &mut heap);
        heap.sort_unstable_by(|a, b| a.partial_cmp(b).unwrap());
        heap.into_iter().map(|(_, i)| i).collect()
    }

    fn k_nearest_rec(
        &self,
        node_idx: u32,
        q: &Point3<f64>,
        k: usize,
        heap: &mut Vec<(f64, usize)>,
    ) {
        let node = &self.nodes[node_idx as usize];
        if heap.len() == k {
            let worst = heap[0];
            let bd = Self::box_dist_sq(node, q);
            if bd > worst.0 {
                return;
            }
        }
        if node.left == NO_CHILD {
            for &idx in &self.indices[node.start as usize..node.end as usize] {
                let idx = idx as usize;
                let cand = ((self.points[idx] - q).norm_squared(), idx);
                if heap.len() < k {
                    heap.push(cand);
                    sift_up(heap);
                } else if cand < heap[0] {
                    heap[0] = cand;
                    sift_down(heap);
                }
            }
            return;
        }
        let (l, r) = (node.left, node.right);
        let dl = Self::box_dist_sq(&self.nodes[l as usize], q);
        let dr = Self::box_dist_sq(&self.nodes[r as usize], q);
        if dl <= dr {
            self.k_nearest_rec(l, q, k, heap);
            self.k_nearest_rec(r, q, k, heap);
        } else {
            self.k_nearest_rec(r, q, k, heap);
            self.k_nearest_rec(l, q, k, heap);
        }
    }
}

// Small binary max-heap over (d2, idx) tuples, ordered lexicographically so
// that the tie-break matches brute force exactly.
fn sift_up(heap: &mut [(f64, usize)]) {
    let mut i = heap.len() - 1;
    while i > 0 {
        let parent = (i - 1) / 2;
        if heap[i] > heap[parent] {
            heap.swap(i, parent);
            i = parent;
        } else {
            break;
        }
    }
}

fn sift_down(heap: &mut [(f64, usize)]) {
    let n = heap.len();
    let mut i = 0;
    loop {
        let (l, r) = (2 * i + 1, 2 * i + 2);
        let mut largest = i;
        if l < n && heap[l] > heap[largest] {
            largest = l;
        }
        if r < n && heap[r] > heap[largest] {
            largest = r;
        }
        if largest == i {
            break;
        }
        heap.swap(i, largest);
        i = largest;
    }
}
