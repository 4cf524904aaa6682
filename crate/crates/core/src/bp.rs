//! Belief propagation on the discretized Gaussian tree, plus the loopy-BP
//! diagnostic on the complete pairwise graph.
//!
//! On a tree a single two-sweep schedule (every edge passes one message in
//! each direction) is exact: sum-product beliefs are the marginals of the
//! tree distribution restricted to the alphabet, and max-product with
//! backtracking returns its exact joint maximizer. Sum-product messages are
//! stored normalized in the linear domain; max-product runs entirely in the
//! log domain.

use nalgebra::DMatrix;

use crate::channel::LinearSystem;
use crate::constellation::Constellation;
use crate::posterior::GaussianPosterior;
use crate::tree::{EdgeCpd, RootedTree};
use crate::{Error, Result};

/// Log-domain potentials of the tree distribution sampled at alphabet points.
///
/// `log_root[a]` is the root potential −(a − z_r)²/(2C_rr); for each
/// non-root node `i`, `log_edges[i][(a_i, a_p)]` is the conditional
/// potential of child value `a_i` given parent value `a_p`. Each table is
/// shifted so its maximum is 0; the shift is a per-table constant that
/// cancels under belief normalization.
#[derive(Debug, Clone)]
pub struct FactorTables {
    pub levels: Vec<f64>,
    pub log_root: Vec<f64>,
    pub log_edges: Vec<Option<DMatrix<f64>>>,
}

impl FactorTables {
    pub fn alphabet_len(&self) -> usize {
        self.levels.len()
    }

    pub fn n_vars(&self) -> usize {
        self.log_edges.len()
    }
}

/// Per-variable probability vectors over the alphabet.
#[derive(Debug, Clone, PartialEq)]
pub struct BeliefTable {
    rows: Vec<Vec<f64>>,
}

impl BeliefTable {
    fn new(rows: Vec<Vec<f64>>) -> Self {
        Self { rows }
    }

    /// Degenerate table putting all mass on one symbol per variable.
    pub fn one_hot(hot: &[usize], alphabet_len: usize) -> Self {
        let rows = hot
            .iter()
            .map(|&a| {
                let mut row = vec![0.0; alphabet_len];
                row[a] = 1.0;
                row
            })
            .collect();
        Self { rows }
    }

    pub fn n_vars(&self) -> usize {
        self.rows.len()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.rows[i]
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    /// Index of the most probable symbol for variable `i`; ties break toward
    /// the smaller alphabet index.
    pub fn argmax_row(&self, i: usize) -> usize {
        let row = &self.rows[i];
        let mut best = 0;
        for (k, &v) in row.iter().enumerate().skip(1) {
            if v > row[best] {
                best = k;
            }
        }
        best
    }
}

/// Samples the root and conditional Gaussians of the tree distribution at
/// every alphabet point, in the log domain.
pub fn build_factor_tables(
    tree: &RootedTree,
    cpds: &[EdgeCpd],
    post: &GaussianPosterior,
    c: &Constellation,
) -> Result<FactorTables> {
    let n = tree.len();
    if post.dim() != n {
        return Err(Error::InvalidArgument(format!(
            "posterior dimension {} does not match {} tree nodes",
            post.dim(),
            n
        )));
    }
    if cpds.len() + 1 != n {
        return Err(Error::InvalidArgument(format!(
            "expected {} edge CPDs for {} nodes, got {}",
            n - 1,
            n,
            cpds.len()
        )));
    }
    let levels = c.levels().to_vec();
    let k = levels.len();
    let root = tree.root();

    let z_r = post.mean()[root];
    let c_rr = post.cov()[(root, root)];
    if !(c_rr > 0.0) {
        return Err(Error::DegenerateCovariance(format!(
            "nonpositive root variance {c_rr}"
        )));
    }
    let mut log_root: Vec<f64> = levels
        .iter()
        .map(|&a| -(a - z_r) * (a - z_r) / (2.0 * c_rr))
        .collect();
    shift_to_zero_max(&mut log_root);

    let mut log_edges: Vec<Option<DMatrix<f64>>> = vec![None; n];
    for cpd in cpds {
        if cpd.child == root || cpd.child >= n || tree.parent(cpd.child) != Some(cpd.parent) {
            return Err(Error::InvalidArgument(format!(
                "edge CPD ({}, {}) does not match the tree",
                cpd.child, cpd.parent
            )));
        }
        if !(cpd.variance > 0.0) {
            return Err(Error::DegenerateCovariance(format!(
                "nonpositive CPD variance for child {}",
                cpd.child
            )));
        }
        let inv_two_var = 1.0 / (2.0 * cpd.variance);
        let mut table = DMatrix::<f64>::zeros(k, k);
        let mut max = f64::NEG_INFINITY;
        for (ai, &a) in levels.iter().enumerate() {
            for (aj, &b) in levels.iter().enumerate() {
                let d = a - cpd.conditional_mean(b);
                let v = -d * d * inv_two_var;
                table[(ai, aj)] = v;
                max = max.max(v);
            }
        }
        for v in table.iter_mut() {
            *v -= max;
        }
        log_edges[cpd.child] = Some(table);
    }
    Ok(FactorTables {
        levels,
        log_root,
        log_edges,
    })
}

fn shift_to_zero_max(v: &mut [f64]) {
    let max = v.iter().fold(f64::NEG_INFINITY, |m, &x| m.max(x));
    for x in v.iter_mut() {
        *x -= max;
    }
}

fn normalize_message(m: &mut [f64]) -> Result<()> {
    let sum: f64 = m.iter().sum();
    if !(sum > 0.0 && sum.is_finite()) {
        return Err(Error::NumericFailure(
            "unnormalizable all-zero or non-finite message".into(),
        ));
    }
    for v in m.iter_mut() {
        *v /= sum;
    }
    Ok(())
}

/// Sibling products without division: prefix/suffix products of the
/// children's message vectors, so a star node still costs O(deg·|A|).
fn sibling_products(msgs: &[&[f64]], k: usize) -> Vec<Vec<f64>> {
    let deg = msgs.len();
    let mut prefix = vec![vec![1.0; k]; deg + 1];
    for t in 0..deg {
        for a in 0..k {
            prefix[t + 1][a] = prefix[t][a] * msgs[t][a];
        }
    }
    let mut suffix = vec![1.0; k];
    let mut out = vec![vec![0.0; k]; deg];
    for t in (0..deg).rev() {
        for a in 0..k {
            out[t][a] = prefix[t][a] * suffix[a];
            suffix[a] *= msgs[t][a];
        }
    }
    out
}

fn sibling_sums(msgs: &[&[f64]], k: usize) -> Vec<Vec<f64>> {
    let deg = msgs.len();
    let mut prefix = vec![vec![0.0; k]; deg + 1];
    for t in 0..deg {
        for a in 0..k {
            prefix[t + 1][a] = prefix[t][a] + msgs[t][a];
        }
    }
    let mut suffix = vec![0.0; k];
    let mut out = vec![vec![0.0; k]; deg];
    for t in (0..deg).rev() {
        for a in 0..k {
            out[t][a] = prefix[t][a] + suffix[a];
            suffix[a] += msgs[t][a];
        }
    }
    out
}

/// Exact sum-product on the tree: one leaves→root sweep, one root→leaves
/// sweep, normalized beliefs equal to the marginals of the tree
/// distribution. Total work O(|A|²·N).
pub fn run_sum_product(ft: &FactorTables, tree: &RootedTree) -> Result<BeliefTable> {
    let n = tree.len();
    let k = ft.alphabet_len();
    check_consistency(ft, tree)?;
    let root = tree.root();

    // exponentiate lazily, once per table
    let edge_lin: Vec<Option<DMatrix<f64>>> = ft
        .log_edges
        .iter()
        .map(|t| t.as_ref().map(|t| t.map(f64::exp)))
        .collect();
    let root_lin: Vec<f64> = ft.log_root.iter().map(|&v| v.exp()).collect();

    // leaves → root: message from each non-root node to its parent
    let mut to_parent: Vec<Vec<f64>> = vec![Vec::new(); n];
    for &i in tree.topo_order().iter().rev() {
        if i == root {
            continue;
        }
        let table = edge_lin[i].as_ref().expect("non-root node has a table");
        let mut weight = vec![1.0; k];
        for &ch in tree.children(i) {
            for a in 0..k {
                weight[a] *= to_parent[ch][a];
            }
        }
        let mut msg = vec![0.0; k];
        for aj in 0..k {
            let mut s = 0.0;
            for ai in 0..k {
                s += table[(ai, aj)] * weight[ai];
            }
            msg[aj] = s;
        }
        normalize_message(&mut msg)?;
        to_parent[i] = msg;
    }

    // root → leaves
    let mut from_parent: Vec<Vec<f64>> = vec![Vec::new(); n];
    for &j in tree.topo_order() {
        let kids = tree.children(j);
        if kids.is_empty() {
            continue;
        }
        // evidence arriving at j from outside each child's subtree
        let mut base = if j == root {
            root_lin.clone()
        } else {
            from_parent[j].clone()
        };
        normalize_message(&mut base)?;
        let child_msgs: Vec<&[f64]> = kids.iter().map(|&c| to_parent[c].as_slice()).collect();
        let sib = sibling_products(&child_msgs, k);
        for (t, &i) in kids.iter().enumerate() {
            let table = edge_lin[i].as_ref().expect("non-root node has a table");
            let mut msg = vec![0.0; k];
            for ai in 0..k {
                let mut s = 0.0;
                for aj in 0..k {
                    s += table[(ai, aj)] * base[aj] * sib[t][aj];
                }
                msg[ai] = s;
            }
            normalize_message(&mut msg)?;
            from_parent[i] = msg;
        }
    }

    let mut rows = Vec::with_capacity(n);
    for i in 0..n {
        let mut b = if i == root {
            root_lin.clone()
        } else {
            from_parent[i].clone()
        };
        for &ch in tree.children(i) {
            for a in 0..k {
                b[a] *= to_parent[ch][a];
            }
        }
        normalize_message(&mut b)?;
        rows.push(b);
    }
    Ok(BeliefTable::new(rows))
}

/// Max-product in the log domain with backtracking.
///
/// Returns the normalized max-marginal table and the exact joint maximizer
/// of the tree distribution; ties break toward the smaller alphabet index.
pub fn run_max_product(ft: &FactorTables, tree: &RootedTree) -> Result<(BeliefTable, Vec<f64>)> {
    let n = tree.len();
    let k = ft.alphabet_len();
    check_consistency(ft, tree)?;
    let root = tree.root();

    // leaves → root with argmax bookkeeping
    let mut to_parent: Vec<Vec<f64>> = vec![Vec::new(); n];
    let mut arg_to_parent: Vec<Vec<usize>> = vec![Vec::new(); n];
    for &i in tree.topo_order().iter().rev() {
        if i == root {
            continue;
        }
        let table = ft.log_edges[i].as_ref().expect("non-root node has a table");
        let mut weight = vec![0.0; k];
        for &ch in tree.children(i) {
            for a in 0..k {
                weight[a] += to_parent[ch][a];
            }
        }
        let mut msg = vec![f64::NEG_INFINITY; k];
        let mut arg = vec![0usize; k];
        for aj in 0..k {
            for ai in 0..k {
                let v = table[(ai, aj)] + weight[ai];
                if v > msg[aj] {
                    msg[aj] = v;
                    arg[aj] = ai;
                }
            }
        }
        shift_to_zero_max(&mut msg);
        to_parent[i] = msg;
        arg_to_parent[i] = arg;
    }

    // decisions: maximize at the root, then fix children top-down
    let mut root_score = ft.log_root.clone();
    for &ch in tree.children(root) {
        for a in 0..k {
            root_score[a] += to_parent[ch][a];
        }
    }
    let mut decisions_idx = vec![0usize; n];
    decisions_idx[root] = argmax_first(&root_score);
    for &j in tree.topo_order() {
        for &i in tree.children(j) {
            decisions_idx[i] = arg_to_parent[i][decisions_idx[j]];
        }
    }
    let decisions: Vec<f64> = decisions_idx.iter().map(|&a| ft.levels[a]).collect();

    // root → leaves for the max-marginals
    let mut from_parent: Vec<Vec<f64>> = vec![Vec::new(); n];
    for &j in tree.topo_order() {
        let kids = tree.children(j);
        if kids.is_empty() {
            continue;
        }
        let base = if j == root {
            ft.log_root.clone()
        } else {
            from_parent[j].clone()
        };
        let child_msgs: Vec<&[f64]> = kids.iter().map(|&c| to_parent[c].as_slice()).collect();
        let sib = sibling_sums(&child_msgs, k);
        for (t, &i) in kids.iter().enumerate() {
            let table = ft.log_edges[i].as_ref().expect("non-root node has a table");
            let mut msg = vec![f64::NEG_INFINITY; k];
            for ai in 0..k {
                for aj in 0..k {
                    let v = table[(ai, aj)] + base[aj] + sib[t][aj];
                    if v > msg[ai] {
                        msg[ai] = v;
                    }
                }
            }
            shift_to_zero_max(&mut msg);
            from_parent[i] = msg;
        }
    }

    let mut rows = Vec::with_capacity(n);
    for i in 0..n {
        let mut b = if i == root {
            ft.log_root.clone()
        } else {
            from_parent[i].clone()
        };
        for &ch in tree.children(i) {
            for a in 0..k {
                b[a] += to_parent[ch][a];
            }
        }
        shift_to_zero_max(&mut b);
        let mut lin: Vec<f64> = b.iter().map(|&v| v.exp()).collect();
        normalize_message(&mut lin)?;
        rows.push(lin);
    }
    Ok((BeliefTable::new(rows), decisions))
}

fn argmax_first(v: &[f64]) -> usize {
    let mut best = 0;
    for (i, &x) in v.iter().enumerate().skip(1) {
        if x > v[best] {
            best = i;
        }
    }
    best
}

fn check_consistency(ft: &FactorTables, tree: &RootedTree) -> Result<()> {
    let n = tree.len();
    let k = ft.alphabet_len();
    if ft.n_vars() != n || ft.log_root.len() != k {
        return Err(Error::InvalidArgument(
            "factor tables do not match the tree".into(),
        ));
    }
    for i in 0..n {
        match (&ft.log_edges[i], i == tree.root()) {
            (None, true) => {}
            (Some(t), false) if t.nrows() == k && t.ncols() == k => {}
            _ => {
                return Err(Error::InvalidArgument(format!(
                    "factor table shape mismatch at node {i}"
                )));
            }
        }
    }
    Ok(())
}

const LOOPY_CONVERGENCE_TOL: f64 = 1e-6;

/// Sum-product loopy BP on the complete pairwise graph of the exact
/// posterior, with a flooding schedule and optional damping.
///
/// This is a diagnostic detector only: on the dense graphs produced by
/// random channels it has no exactness or convergence guarantee. Expanding
/// ‖Hx − y‖² gives the pairwise factorization with single-variable
/// potential exp((yᵀh_i x_i − ‖h_i‖²x_i²/2)/σ²) and pair potential
/// exp(−h_iᵀh_j x_i x_j / σ²).
pub fn run_loopy_bp(
    sys: &LinearSystem,
    c: &Constellation,
    max_iters: usize,
    damping: f64,
) -> Result<BeliefTable> {
    if max_iters == 0 {
        return Err(Error::InvalidArgument("max_iters must be at least 1".into()));
    }
    if !(0.0..1.0).contains(&damping) {
        return Err(Error::InvalidArgument(format!(
            "damping must lie in [0, 1), got {damping}"
        )));
    }
    let sigma2 = sys.noise_variance();
    if !(sigma2 > 0.0) {
        return Err(Error::InvalidArgument(
            "loopy BP requires positive noise variance".into(),
        ));
    }
    let n = sys.n_vars();
    let k = c.len();
    let levels = c.levels();

    let gram = sys.h().tr_mul(sys.h());
    let hty = sys.h().tr_mul(sys.y());

    // log single-variable potentials, one row per variable
    let mut log_unary = vec![vec![0.0; k]; n];
    for i in 0..n {
        for (a, &s) in levels.iter().enumerate() {
            log_unary[i][a] = (hty[i] * s - 0.5 * gram[(i, i)] * s * s) / sigma2;
        }
        shift_to_zero_max(&mut log_unary[i]);
    }
    // log pair potential between i and j evaluated at (a_i, a_j)
    let log_pair = |i: usize, j: usize, ai: usize, aj: usize| -> f64 {
        -gram[(i, j)] * levels[ai] * levels[aj] / sigma2
    };

    // messages[i][j]: message from variable i to variable j, linear, sum 1
    let uniform = vec![1.0 / k as f64; k];
    let mut messages = vec![vec![uniform.clone(); n]; n];
    let mut next = messages.clone();

    for _ in 0..max_iters {
        let mut delta = 0.0f64;
        for j in 0..n {
            for i in 0..n {
                if i == j {
                    continue;
                }
                // message j → i, recomputed from scratch in the log domain
                let mut lm = vec![f64::NEG_INFINITY; k];
                for ai in 0..k {
                    let mut terms = Vec::with_capacity(k);
                    for aj in 0..k {
                        let mut t = log_unary[j][aj] + log_pair(i, j, ai, aj);
                        for l in 0..n {
                            if l != i && l != j {
                                t += messages[l][j][aj].max(f64::MIN_POSITIVE).ln();
                            }
                        }
                        terms.push(t);
                    }
                    lm[ai] = log_sum_exp(&terms);
                }
                shift_to_zero_max(&mut lm);
                let mut m: Vec<f64> = lm.iter().map(|&v| v.exp()).collect();
                normalize_message(&mut m)?;
                for a in 0..k {
                    let blended = (1.0 - damping) * m[a] + damping * messages[j][i][a];
                    delta = delta.max((blended - messages[j][i][a]).abs());
                    next[j][i][a] = blended;
                }
            }
        }
        std::mem::swap(&mut messages, &mut next);
        if delta < LOOPY_CONVERGENCE_TOL {
            break;
        }
    }

    let mut rows = Vec::with_capacity(n);
    for i in 0..n {
        let mut lb = log_unary[i].clone();
        for l in 0..n {
            if l != i {
                for a in 0..k {
                    lb[a] += messages[l][i][a].max(f64::MIN_POSITIVE).ln();
                }
            }
        }
        shift_to_zero_max(&mut lb);
        let mut b: Vec<f64> = lb.iter().map(|&v| v.exp()).collect();
        normalize_message(&mut b)?;
        rows.push(b);
    }
    Ok(BeliefTable::new(rows))
}

fn log_sum_exp(v: &[f64]) -> f64 {
    let max = v.iter().fold(f64::NEG_INFINITY, |m, &x| m.max(x));
    if !max.is_finite() {
        return max;
    }
    max + v.iter().map(|&x| (x - max).exp()).sum::<f64>().ln()
}
