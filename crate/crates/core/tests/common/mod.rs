//! Shared oracles for the integration suites.
//!
//! Everything here recomputes expected values from first principles
//! (exhaustive enumeration, Prüfer-sequence tree enumeration, direct
//! Gaussian density evaluation) and stays independent of the message
//! passing and Prim implementations it checks.
#![allow(dead_code)]

use gta_mimo::channel::sample_real_channel;
use gta_mimo::posterior::mmse_posterior;
use gta_mimo::{Constellation, EdgeCpd, GaussianPosterior, LinearSystem, RootedTree};
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random well-posed real system with the given shape and noise.
pub fn random_system(m: usize, n: usize, noise_variance: f64, seed: u64) -> LinearSystem {
    let mut r = rng(seed);
    let h = sample_real_channel(m, n, &mut r).unwrap();
    let y = DVector::from_fn(m, |_, _| r.random::<f64>() * 8.0 - 4.0);
    LinearSystem::new(h, y, noise_variance).unwrap()
}

/// Random Bayesian posterior of an n-variable system.
pub fn random_posterior(n: usize, seed: u64) -> GaussianPosterior {
    let sys = random_system(n, n, 0.6, seed);
    mmse_posterior(&sys, 5.0).unwrap()
}

/// Decodes a Prüfer sequence over `n` labels into the edge list of the
/// corresponding labeled tree.
pub fn prufer_edges(n: usize, seq: &[usize]) -> Vec<(usize, usize)> {
    assert_eq!(seq.len(), n - 2);
    let mut degree = vec![1usize; n];
    for &s in seq {
        degree[s] += 1;
    }
    let mut edges = Vec::with_capacity(n - 1);
    let mut used = vec![false; n];
    for &s in seq {
        let leaf = (0..n).find(|&v| degree[v] == 1 && !used[v]).unwrap();
        edges.push((leaf, s));
        used[leaf] = true;
        degree[s] -= 1;
    }
    let rest: Vec<usize> = (0..n).filter(|&v| !used[v] && degree[v] == 1).collect();
    edges.push((rest[0], rest[1]));
    edges
}

/// Maximum spanning-tree weight over all n^(n−2) labeled trees.
pub fn brute_force_max_tree_weight(w: &DMatrix<f64>) -> f64 {
    let n = w.nrows();
    if n == 2 {
        return w[(0, 1)];
    }
    let digits = n - 2;
    let total = n.pow(digits as u32);
    let mut best = f64::NEG_INFINITY;
    for code in 0..total {
        let mut c = code;
        let mut seq = Vec::with_capacity(digits);
        for _ in 0..digits {
            seq.push(c % n);
            c /= n;
        }
        let sum: f64 = prufer_edges(n, &seq).iter().map(|&(a, b)| w[(a, b)]).sum();
        best = best.max(sum);
    }
    best
}

/// Log-density of the discretized tree distribution at one assignment,
/// evaluated directly from the Gaussian parameters.
pub fn tree_log_density(
    post: &GaussianPosterior,
    tree: &RootedTree,
    cpds: &[EdgeCpd],
    x: &[f64],
) -> f64 {
    let root = tree.root();
    let z_r = post.mean()[root];
    let c_rr = post.cov()[(root, root)];
    let mut ld = -(x[root] - z_r) * (x[root] - z_r) / (2.0 * c_rr);
    for cpd in cpds {
        let d = x[cpd.child] - (cpd.mean_offset + cpd.slope * x[cpd.parent]);
        ld += -d * d / (2.0 * cpd.variance);
    }
    ld
}

/// Exhaustive marginals of the discretized tree distribution.
pub fn enumerate_tree_marginals(
    post: &GaussianPosterior,
    tree: &RootedTree,
    cpds: &[EdgeCpd],
    c: &Constellation,
) -> Vec<Vec<f64>> {
    let n = tree.len();
    let k = c.len();
    let levels = c.levels();
    let total = k.pow(n as u32);
    let mut marginals = vec![vec![0.0; k]; n];
    let mut z = 0.0;
    let mut idx = vec![0usize; n];
    let mut x = vec![0.0; n];
    for code in 0..total {
        let mut cc = code;
        for d in 0..n {
            idx[d] = cc % k;
            x[d] = levels[idx[d]];
            cc /= k;
        }
        let p = tree_log_density(post, tree, cpds, &x).exp();
        z += p;
        for d in 0..n {
            marginals[d][idx[d]] += p;
        }
    }
    for row in marginals.iter_mut() {
        for v in row.iter_mut() {
            *v /= z;
        }
    }
    marginals
}

/// Exhaustive joint maximizer of the discretized tree distribution.
pub fn enumerate_tree_map(
    post: &GaussianPosterior,
    tree: &RootedTree,
    cpds: &[EdgeCpd],
    c: &Constellation,
) -> Vec<f64> {
    let n = tree.len();
    let k = c.len();
    let levels = c.levels();
    let total = k.pow(n as u32);
    let mut best = f64::NEG_INFINITY;
    let mut best_x = vec![0.0; n];
    let mut x = vec![0.0; n];
    for code in 0..total {
        let mut cc = code;
        for d in 0..n {
            x[d] = levels[cc % k];
            cc /= k;
        }
        let ld = tree_log_density(post, tree, cpds, &x);
        if ld > best {
            best = ld;
            best_x.copy_from_slice(&x);
        }
    }
    best_x
}

/// Conservative standard deviation of the difference of two error rates
/// measured on `n_symbols` paired symbols (independence approximation,
/// which overstates the paired variance).
pub fn binomial_diff_sigma(p_a: f64, p_b: f64, n_symbols: f64) -> f64 {
    ((p_a * (1.0 - p_a) + p_b * (1.0 - p_b)) / n_symbols).sqrt()
}
