use alloc::vec;
use alloc::vec::Vec;

use super::BeliefError;

/// How points sit inside a node: leaves own a contiguous range of the
/// permutation array, internal nodes point at two children.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum NodeKind {
    Leaf,
    Internal { left: usize, right: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Node {
    pub centroid: Vec<f64>,
    pub radius: f64,
    pub kind: NodeKind,
    /// Range into the permutation array covered by this node's subtree.
    pub start: usize,
    pub end: usize,
}

/// Exact nearest-neighbor index over a fixed point set: nested balls, built
/// by splitting on the dimension of maximum spread at the median position.
#[derive(Debug, Clone, PartialEq)]
pub struct BallTree {
    points: Vec<Vec<f64>>,
    /// Permutation of point indices; each leaf owns a contiguous slice.
    order: Vec<usize>,
    nodes: Vec<Node>,
    leaf_size: usize,
    dim: usize,
}

pub fn euclidean(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let mut sum = 0.0;
    for (x, y) in a.iter().zip(b) {
        let d = x - y;
        sum += d * d;
    }
    libm::sqrt(sum)
}

impl BallTree {
    /// Builds the tree. Construction is deterministic: the split dimension
    /// is the lowest-index dimension of maximum spread, and points are
    /// ordered by (coordinate, original index) around the median.
    pub fn build(points: Vec<Vec<f64>>, leaf_size: usize) -> Result<Self, BeliefError> {
        if points.is_empty() {
            return Err(BeliefError::EmptyStore);
        }
        let dim = points[0].len();
        for point in &points {
            if point.len() != dim {
                return Err(BeliefError::DimensionMismatch { expected: dim, found: point.len() });
            }
        }
        let leaf_size = leaf_size.max(1);
        let mut tree = Self {
            order: (0..points.len()).collect(),
            points,
            nodes: Vec::new(),
            leaf_size,
            dim,
        };
        tree.build_node(0, tree.order.len());
        Ok(tree)
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn leaf_size(&self) -> usize {
        self.leaf_size
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn point(&self, index: usize) -> &[f64] {
        &self.points[index]
    }

    /// Original point indices covered by a node, in leaf order.
    pub fn node_members(&self, node: &Node) -> &[usize] {
        &self.order[node.start..node.end]
    }

    fn build_node(&mut self, start: usize, end: usize) -> usize {
        let members = &self.order[start..end];
        let mut centroid = vec![0.0; self.dim];
        for &index in members {
            for (c, v) in centroid.iter_mut().zip(&self.points[index]) {
                *c += v;
            }
        }
        for c in centroid.iter_mut() {
            *c /= members.len() as f64;
        }
        let radius = members
            .iter()
            .map(|&index| euclidean(&centroid, &self.points[index]))
            .fold(0.0, f64::max);

        let node_index = self.nodes.len();
        self.nodes.push(Node { centroid, radius, kind: NodeKind::Leaf, start, end });

        if end - start > self.leaf_size {
            let split_dim = self.max_spread_dim(start, end);
            let mid = start + (end - start) / 2;
            let (points, order) = (&self.points, &mut self.order);
            order[start..end].sort_unstable_by(|&a, &b| {
                let ca = points[a][split_dim];
                let cb = points[b][split_dim];
                ca.total_cmp(&cb).then(a.cmp(&b))
            });
            let left = self.build_node(start, mid);
            let right = self.build_node(mid, end);
            self.nodes[node_index].kind = NodeKind::Internal { left, right };
        }
        node_index
    }

    fn max_spread_dim(&self, start: usize, end: usize) -> usize {
        let mut best_dim = 0;
        let mut best_spread = f64::NEG_INFINITY;
        for d in 0..self.dim {
            let mut lo = f64::INFINITY;
            let mut hi = f64::NEG_INFINITY;
            for &index in &self.order[start..end] {
                let v = self.points[index][d];
                lo = lo.min(v);
                hi = hi.max(v);
            }
            let spread = hi - lo;
            if spread > best_spread {
                best_spread = spread;
                best_dim = d;
            }
        }
        best_dim
    }

    /// Exact nearest neighbor by branch-and-bound: a ball is pruned only
    /// when its lower bound strictly exceeds the best distance, so
    /// equidistant points are all examined and the lowest original index
    /// wins ties.
    pub fn nearest(&self, query: &[f64]) -> Result<(usize, f64), BeliefError> {
        if query.len() != self.dim {
            return Err(BeliefError::DimensionMismatch { expected: self.dim, found: query.len() });
        }
        let mut best_index = usize::MAX;
        let mut best_distance = f64::INFINITY;
        self.search(0, query, &mut best_index, &mut best_distance);
        Ok((best_index, best_distance))
    }

    fn lower_bound(&self, node: &Node, query: &[f64]) -> f64 {
        (euclidean(&node.centroid, query) - node.radius).max(0.0)
    }

    fn search(&self, node_index: usize, query: &[f64], best_index: &mut usize, best_distance: &mut f64) {
        let node = &self.nodes[node_index];
        if self.lower_bound(node, query) > *best_distance {
            return;
        }
        match node.kind {
            NodeKind::Leaf => {
                for &index in self.node_members(node) {
                    let distance = euclidean(query, &self.points[index]);
                    if distance < *best_distance
                        || (distance == *best_distance && index < *best_index)
                    {
                        *best_distance = distance;
                        *best_index = index;
                    }
                }
            }
            NodeKind::Internal { left, right } => {
                let lb_left = self.lower_bound(&self.nodes[left], query);
                let lb_right = self.lower_bound(&self.nodes[right], query);
                let (first, second) = if lb_left <= lb_right { (left, right) } else { (right, left) };
                self.search(first, query, best_index, best_distance);
                self.search(second, query, best_index, best_distance);
            }
        }
    }
}
