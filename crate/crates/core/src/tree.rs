//! Spanning-tree construction over pairwise correlation weights and the
//! per-edge conditional-Gaussian parameters.
//!
//! The best tree approximation of a Gaussian maximizes the sum of pairwise
//! mutual informations over its edges; since −ln(1 − ρ²) is monotone in ρ²,
//! the squared correlation coefficients serve directly as edge weights.
//! Prim's algorithm with a dense O(N²) best-edge scan fits the complete
//! graph better than heap-based variants.

use nalgebra::DMatrix;

use crate::posterior::GaussianPosterior;
use crate::{Error, Result};

/// A spanning tree in parent-array form, rooted at index 0.
#[derive(Debug, Clone, PartialEq)]
pub struct RootedTree {
    parent: Vec<Option<usize>>,
    children: Vec<Vec<usize>>,
    root: usize,
    topo: Vec<usize>,
}

impl RootedTree {
    /// Builds a tree from parent links; exactly one node must have no parent.
    pub fn from_parents(parent: Vec<Option<usize>>) -> Result<Self> {
        let n = parent.len();
        if n == 0 {
            return Err(Error::InvalidArgument("tree must have at least one node".into()));
        }
        let mut root = None;
        for (i, p) in parent.iter().enumerate() {
            match p {
                None => {
                    if root.replace(i).is_some() {
                        return Err(Error::InvalidArgument("tree has more than one root".into()));
                    }
                }
                Some(p) if *p >= n => {
                    return Err(Error::InvalidArgument(format!(
                        "parent index {p} out of range for {n} nodes"
                    )));
                }
                Some(p) if *p == i => {
                    return Err(Error::InvalidArgument(format!("node {i} is its own parent")));
                }
                Some(_) => {}
            }
        }
        let root = root.ok_or_else(|| Error::InvalidArgument("tree has no root".into()))?;

        let mut children = vec![Vec::new(); n];
        for (i, p) in parent.iter().enumerate() {
            if let Some(p) = *p {
                children[p].push(i);
            }
        }
        // BFS from the root; covering all nodes certifies the parent relation
        // is acyclic and connected.
        let mut topo = Vec::with_capacity(n);
        topo.push(root);
        let mut head = 0;
        while head < topo.len() {
            let u = topo[head];
            head += 1;
            topo.extend_from_slice(&children[u]);
        }
        if topo.len() != n {
            return Err(Error::InvalidArgument(
                "parent relation does not connect all nodes".into(),
            ));
        }
        Ok(Self {
            parent,
            children,
            root,
            topo,
        })
    }

    pub fn len(&self) -> usize {
        self.parent.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parent.is_empty()
    }

    pub fn root(&self) -> usize {
        self.root
    }

    pub fn parent(&self, i: usize) -> Option<usize> {
        self.parent[i]
    }

    pub fn parents(&self) -> &[Option<usize>] {
        &self.parent
    }

    pub fn children(&self, i: usize) -> &[usize] {
        &self.children[i]
    }

    /// Nodes in breadth-first order from the root (parents before children).
    pub fn topo_order(&self) -> &[usize] {
        &self.topo
    }

    /// (child, parent) pairs in ascending child order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.parent
            .iter()
            .enumerate()
            .filter_map(|(i, p)| p.map(|p| (i, p)))
    }

    /// Edge set as sorted (min, max) pairs, for comparisons between trees.
    pub fn edge_set(&self) -> Vec<(usize, usize)> {
        let mut edges: Vec<_> = self
            .edges()
            .map(|(a, b)| (a.min(b), a.max(b)))
            .collect();
        edges.sort_unstable();
        edges
    }
}

/// Conditional Gaussian of a child given its parent:
/// mean `mean_offset + slope·x_parent`, variance `C_ii − C_ij²/C_jj`.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeCpd {
    pub child: usize,
    pub parent: usize,
    pub slope: f64,
    pub mean_offset: f64,
    pub variance: f64,
}

impl EdgeCpd {
    /// Conditional mean of the child at a given parent value.
    pub fn conditional_mean(&self, x_parent: f64) -> f64 {
        self.mean_offset + self.slope * x_parent
    }
}

const SYMMETRY_TOL: f64 = 1e-9;

/// Maximum spanning tree of a complete weighted graph, rooted at node 0.
///
/// Dense Prim scan, O(N²). The diagonal is ignored. Ties are broken toward
/// the lexicographically smallest (min, max) index pair so runs are
/// reproducible.
pub fn max_spanning_tree(weights: &DMatrix<f64>) -> Result<RootedTree> {
    let n = weights.nrows();
    if n == 0 || weights.ncols() != n {
        return Err(Error::InvalidArgument(format!(
            "weight matrix must be square and nonempty, got {}×{}",
            n,
            weights.ncols()
        )));
    }
    for i in 0..n {
        for j in (i + 1)..n {
            if (weights[(i, j)] - weights[(j, i)]).abs() > SYMMETRY_TOL {
                return Err(Error::InvalidArgument(format!(
                    "weights asymmetric at ({i},{j}): {} vs {}",
                    weights[(i, j)],
                    weights[(j, i)]
                )));
            }
        }
    }

    let mut parent = vec![None; n];
    if n == 1 {
        return RootedTree::from_parents(parent);
    }

    let edge_key = |u: usize, v: usize| (u.min(v), u.max(v));
    let mut in_tree = vec![false; n];
    in_tree[0] = true;
    // best[v]: weight of the best edge joining v to the current tree,
    // from[v]: the tree endpoint of that edge.
    let mut best = vec![f64::NEG_INFINITY; n];
    let mut from = vec![0usize; n];
    for v in 1..n {
        best[v] = weights[(0, v)];
    }

    for _ in 1..n {
        let mut pick = None;
        for v in 0..n {
            if in_tree[v] {
                continue;
            }
            pick = match pick {
                None => Some(v),
                Some(p) => {
                    if best[v] > best[p]
                        || (best[v] == best[p] && edge_key(from[v], v) < edge_key(from[p], p))
                    {
                        Some(v)
                    } else {
                        Some(p)
                    }
                }
            };
        }
        let v = pick.expect("some node is still outside the tree");
        in_tree[v] = true;
        parent[v] = Some(from[v]);
        for u in 0..n {
            if in_tree[u] {
                continue;
            }
            let w = weights[(v, u)];
            if w > best[u] || (w == best[u] && edge_key(v, u) < edge_key(from[u], u)) {
                best[u] = w;
                from[u] = v;
            }
        }
    }
    RootedTree::from_parents(parent)
}

/// The chain 0 → 1 → … → n−1 used as a fixed-topology ablation.
pub fn line_tree(n: usize) -> Result<RootedTree> {
    if n == 0 {
        return Err(Error::InvalidArgument("tree must have at least one node".into()));
    }
    let parent = (0..n).map(|i| if i == 0 { None } else { Some(i - 1) }).collect();
    RootedTree::from_parents(parent)
}

/// Conditional-Gaussian parameters for every (child, parent) edge.
///
/// Returned in ascending child order.
pub fn edge_cpds(tree: &RootedTree, post: &GaussianPosterior) -> Result<Vec<EdgeCpd>> {
    if tree.len() != post.dim() {
        return Err(Error::InvalidArgument(format!(
            "tree has {} nodes but the posterior dimension is {}",
            tree.len(),
            post.dim()
        )));
    }
    let cov = post.cov();
    let z = post.mean();
    let mut cpds = Vec::with_capacity(tree.len().saturating_sub(1));
    for (child, parent) in tree.edges() {
        let c_jj = cov[(parent, parent)];
        if !(c_jj > 0.0) {
            return Err(Error::DegenerateCovariance(format!(
                "nonpositive variance {c_jj} at parent {parent}"
            )));
        }
        let c_ij = cov[(child, parent)];
        let slope = c_ij / c_jj;
        let variance = cov[(child, child)] - c_ij * c_ij / c_jj;
        if !(variance > 0.0) {
            return Err(Error::DegenerateCovariance(format!(
                "nonpositive conditional variance {variance} for edge ({child},{parent})"
            )));
        }
        cpds.push(EdgeCpd {
            child,
            parent,
            slope,
            mean_offset: z[child] - slope * z[parent],
            variance,
        });
    }
    Ok(cpds)
}

/// Line-oriented debug dump: one `child parent weight` row per edge.
pub fn dump_edge_list(tree: &RootedTree, weights: &DMatrix<f64>) -> String {
    let mut out = String::new();
    for (child, parent) in tree.edges() {
        out.push_str(&format!("{child} {parent} {}\n", weights[(child, parent)]));
    }
    out
}
