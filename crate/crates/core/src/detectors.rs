//! Uniform detector interface: ZF, MMSE, MMSE-SIC, the Gaussian tree
//! approximation (GTA) with its variants, exhaustive ML, and the loopy-BP
//! diagnostic.
//!
//! Every detector is a pure function of (system, constellation) and reports
//! the wall-clock time of the detect call itself, excluding instance
//! generation, so worst-case per-vector decode times can be compared.

use std::fmt;
use std::str::FromStr;
use std::time::{Duration, Instant};

use nalgebra::{Cholesky, DMatrix, DVector};
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::bp::{build_factor_tables, run_loopy_bp, run_max_product, run_sum_product, BeliefTable};
use crate::channel::LinearSystem;
use crate::constellation::Constellation;
use crate::posterior::{mmse_posterior, zf_posterior};
use crate::tree::{edge_cpds, line_tree, max_spanning_tree};
use crate::{Error, Result};

/// Default cap on the number of candidates exhaustive ML will enumerate.
pub const DEFAULT_ML_BUDGET: u64 = 1 << 24;

const DEFAULT_LOOPY_ITERS: usize = 30;
const DEFAULT_LOOPY_DAMPING: f64 = 0.0;

/// Which unconstrained Gaussian posterior feeds the tree pipeline.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GtaVariant {
    /// Bayesian posterior with the N(0, eI) prior (the default).
    Bayesian,
    /// Plain least-squares posterior, no prior.
    Zf,
}

/// Which spanning tree the pipeline uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TreeKind {
    /// Maximum spanning tree over squared correlations.
    ChowLiu,
    /// Fixed chain 0 → 1 → … → n−1 (ablation).
    Line,
}

/// Message-passing flavor for the tree.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BpMode {
    /// Sum-product: exact marginals, hard decision by per-symbol argmax.
    Sum,
    /// Max-product: exact joint maximizer via backtracking.
    Max,
}

/// A detector selection, parseable from the CLI names
/// `zf, mmse, sic, gta, gta:line, gta:zf, gta:max, ml, loopybp`.
#[derive(Debug, Clone, PartialEq)]
pub enum DetectorSpec {
    Zf,
    Mmse,
    MmseSic,
    Gta {
        variant: GtaVariant,
        tree: TreeKind,
        mode: BpMode,
    },
    Ml,
    LoopyBp {
        max_iters: usize,
        damping: f64,
    },
}

impl DetectorSpec {
    /// The default GTA configuration: Bayesian posterior, Chow-Liu tree,
    /// sum-product messages.
    pub fn gta_default() -> Self {
        DetectorSpec::Gta {
            variant: GtaVariant::Bayesian,
            tree: TreeKind::ChowLiu,
            mode: BpMode::Sum,
        }
    }

    /// Runs this detector on one instance.
    pub fn detect(&self, sys: &LinearSystem, c: &Constellation) -> Result<DetectionResult> {
        match *self {
            DetectorSpec::Zf => detect_zf(sys, c),
            DetectorSpec::Mmse => detect_mmse(sys, c, c.energy()),
            DetectorSpec::MmseSic => detect_mmse_sic(sys, c, c.energy()),
            DetectorSpec::Gta {
                variant,
                tree,
                mode,
            } => detect_gta(sys, c, c.energy(), variant, tree, mode),
            DetectorSpec::Ml => detect_ml(sys, c, DEFAULT_ML_BUDGET),
            DetectorSpec::LoopyBp { max_iters, damping } => {
                detect_loopy_bp(sys, c, max_iters, damping)
            }
        }
    }
}

impl fmt::Display for DetectorSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            DetectorSpec::Zf => "zf",
            DetectorSpec::Mmse => "mmse",
            DetectorSpec::MmseSic => "sic",
            DetectorSpec::Gta {
                variant,
                tree,
                mode,
            } => match (variant, tree, mode) {
                (GtaVariant::Bayesian, TreeKind::ChowLiu, BpMode::Sum) => "gta",
                (GtaVariant::Bayesian, TreeKind::Line, BpMode::Sum) => "gta:line",
                (GtaVariant::Zf, TreeKind::ChowLiu, BpMode::Sum) => "gta:zf",
                (GtaVariant::Bayesian, TreeKind::ChowLiu, BpMode::Max) => "gta:max",
                _ => return write!(f, "gta:custom"),
            },
            DetectorSpec::Ml => "ml",
            DetectorSpec::LoopyBp { .. } => "loopybp",
        };
        f.write_str(name)
    }
}

impl FromStr for DetectorSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "zf" => Ok(DetectorSpec::Zf),
            "mmse" => Ok(DetectorSpec::Mmse),
            "sic" => Ok(DetectorSpec::MmseSic),
            "gta" => Ok(DetectorSpec::gta_default()),
            "gta:line" => Ok(DetectorSpec::Gta {
                variant: GtaVariant::Bayesian,
                tree: TreeKind::Line,
                mode: BpMode::Sum,
            }),
            "gta:zf" => Ok(DetectorSpec::Gta {
                variant: GtaVariant::Zf,
                tree: TreeKind::ChowLiu,
                mode: BpMode::Sum,
            }),
            "gta:max" => Ok(DetectorSpec::Gta {
                variant: GtaVariant::Bayesian,
                tree: TreeKind::ChowLiu,
                mode: BpMode::Max,
            }),
            "ml" => Ok(DetectorSpec::Ml),
            "loopybp" => Ok(DetectorSpec::LoopyBp {
                max_iters: DEFAULT_LOOPY_ITERS,
                damping: DEFAULT_LOOPY_DAMPING,
            }),
            other => Err(Error::InvalidArgument(format!(
                "unknown detector '{other}' (expected one of \
                 zf, mmse, sic, gta, gta:line, gta:zf, gta:max, ml, loopybp)"
            ))),
        }
    }
}

impl Serialize for DetectorSpec {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for DetectorSpec {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(D::Error::custom)
    }
}

/// Hard decisions, optional per-symbol posteriors, and the decode time.
#[derive(Debug, Clone)]
pub struct DetectionResult {
    pub hard: Vec<f64>,
    pub soft: Option<BeliefTable>,
    pub elapsed: Duration,
}

/// Zero-forcing: least-squares mean, sliced componentwise.
pub fn detect_zf(sys: &LinearSystem, c: &Constellation) -> Result<DetectionResult> {
    let start = Instant::now();
    let post = zf_posterior(sys)?;
    let hard = slice_all(post.mean(), c)?;
    Ok(DetectionResult {
        hard,
        soft: None,
        elapsed: start.elapsed(),
    })
}

/// MMSE: Bayesian mean under the N(0, eI) prior, sliced componentwise.
pub fn detect_mmse(sys: &LinearSystem, c: &Constellation, e: f64) -> Result<DetectionResult> {
    let start = Instant::now();
    let post = mmse_posterior(sys, e)?;
    let hard = slice_all(post.mean(), c)?;
    Ok(DetectionResult {
        hard,
        soft: None,
        elapsed: start.elapsed(),
    })
}

/// MMSE with successive interference cancellation and optimal ordering:
/// at each step, detect the undetected symbol with the smallest
/// post-detection error variance, subtract its contribution, repeat.
pub fn detect_mmse_sic(sys: &LinearSystem, c: &Constellation, e: f64) -> Result<DetectionResult> {
    if !(e > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "mean symbol energy must be positive, got {e}"
        )));
    }
    let start = Instant::now();
    let m = sys.n_obs();
    let n = sys.n_vars();
    let lambda = sys.noise_variance() / e;
    let mut remaining: Vec<usize> = (0..n).collect();
    let mut y_cur = sys.y().clone();
    let mut hard = vec![0.0; n];

    while !remaining.is_empty() {
        let k = remaining.len();
        let mut a = DMatrix::<f64>::zeros(m, k);
        for (t, &col) in remaining.iter().enumerate() {
            a.set_column(t, &sys.h().column(col));
        }
        let mut gram = a.tr_mul(&a);
        for t in 0..k {
            gram[(t, t)] += lambda;
        }
        let chol = Cholesky::new(gram).ok_or_else(|| {
            Error::SingularSystem("regularized Gram matrix lost positive definiteness".into())
        })?;
        let cov = chol.inverse();
        // σ² scales the error covariance uniformly, so the argmin of the
        // diagonal is unaffected by it
        let mut pick = 0;
        for t in 1..k {
            if cov[(t, t)] < cov[(pick, pick)] {
                pick = t;
            }
        }
        let z = chol.solve(&a.tr_mul(&y_cur));
        let idx = remaining[pick];
        let sym = c.slice(z[pick])?;
        hard[idx] = sym;
        y_cur -= sys.h().column(idx) * sym;
        remaining.remove(pick);
    }
    Ok(DetectionResult {
        hard,
        soft: None,
        elapsed: start.elapsed(),
    })
}

/// The Gaussian tree approximation pipeline: posterior → squared-correlation
/// weights → spanning tree → edge CPDs → factor tables → BP → decision.
pub fn detect_gta(
    sys: &LinearSystem,
    c: &Constellation,
    e: f64,
    variant: GtaVariant,
    tree_kind: TreeKind,
    mode: BpMode,
) -> Result<DetectionResult> {
    let start = Instant::now();
    let post = match variant {
        GtaVariant::Bayesian => mmse_posterior(sys, e)?,
        GtaVariant::Zf => zf_posterior(sys)?,
    };
    // σ² = 0 collapses the posterior to a point mass; the tree carries no
    // information and the decision is the sliced mean
    if sys.noise_variance() == 0.0 {
        let indices: Vec<usize> = post
            .mean()
            .iter()
            .map(|&v| c.slice_index(v))
            .collect::<Result<_>>()?;
        let hard = indices.iter().map(|&a| c.levels()[a]).collect();
        return Ok(DetectionResult {
            hard,
            soft: Some(BeliefTable::one_hot(&indices, c.len())),
            elapsed: start.elapsed(),
        });
    }
    let tree = match tree_kind {
        TreeKind::ChowLiu => max_spanning_tree(&post.squared_correlation_weights()?)?,
        TreeKind::Line => line_tree(sys.n_vars())?,
    };
    let cpds = edge_cpds(&tree, &post)?;
    let tables = build_factor_tables(&tree, &cpds, &post, c)?;
    let (hard, soft) = match mode {
        BpMode::Sum => {
            let beliefs = run_sum_product(&tables, &tree)?;
            let hard = (0..sys.n_vars())
                .map(|i| c.levels()[beliefs.argmax_row(i)])
                .collect();
            (hard, beliefs)
        }
        BpMode::Max => {
            let (beliefs, decisions) = run_max_product(&tables, &tree)?;
            (decisions, beliefs)
        }
    };
    Ok(DetectionResult {
        hard,
        soft: Some(soft),
        elapsed: start.elapsed(),
    })
}

/// Exact maximum likelihood by exhaustive enumeration.
///
/// Candidates are visited in reflected mixed-radix Gray order so each step
/// changes one coordinate by one level, keeping the residual update O(M).
/// Refuses instances with more than `budget` candidates.
pub fn detect_ml(sys: &LinearSystem, c: &Constellation, budget: u64) -> Result<DetectionResult> {
    let start = Instant::now();
    let n = sys.n_vars();
    let k = c.len();
    let required = (k as f64).powi(n as i32);
    if !(required <= budget as f64) {
        return Err(Error::MlBudgetExceeded { required, budget });
    }
    let levels = c.levels();
    let h = sys.h();

    // start at the all-smallest assignment
    let mut digits = vec![0usize; n];
    let mut x = DVector::from_element(n, levels[0]);
    let mut r = sys.y() - h * &x;

    let mut best_sq = r.norm_squared();
    let mut best_digits = digits.clone();

    // Knuth's loopless reflected mixed-radix Gray generation
    let mut focus: Vec<usize> = (0..=n).collect();
    let mut dir = vec![1i64; n];
    let mut steps: u64 = 0;
    loop {
        let j = focus[0];
        focus[0] = 0;
        if j == n {
            break;
        }
        let old = digits[j];
        let new = (old as i64 + dir[j]) as usize;
        digits[j] = new;
        let delta = levels[new] - levels[old];
        // r = y − Hx, so increasing x_j removes delta·h_j from r
        r.axpy(-delta, &h.column(j), 1.0);
        x[j] = levels[new];
        if new == 0 || new == k - 1 {
            dir[j] = -dir[j];
            focus[j] = focus[j + 1];
            focus[j + 1] = j + 1;
        }
        steps += 1;
        if steps.is_multiple_of(4096) {
            // refresh the residual to stop float drift from accumulating
            r = sys.y() - h * &x;
        }
        let sq = r.norm_squared();
        if sq < best_sq || (sq == best_sq && digits < best_digits) {
            best_sq = sq;
            best_digits = digits.clone();
        }
    }

    let hard = best_digits.iter().map(|&d| levels[d]).collect();
    Ok(DetectionResult {
        hard,
        soft: None,
        elapsed: start.elapsed(),
    })
}

/// Loopy BP on the complete pairwise graph (diagnostic): beliefs from the
/// flooding schedule, hard decision by per-symbol argmax.
pub fn detect_loopy_bp(
    sys: &LinearSystem,
    c: &Constellation,
    max_iters: usize,
    damping: f64,
) -> Result<DetectionResult> {
    let start = Instant::now();
    let beliefs = run_loopy_bp(sys, c, max_iters, damping)?;
    let hard = (0..sys.n_vars())
        .map(|i| c.levels()[beliefs.argmax_row(i)])
        .collect();
    Ok(DetectionResult {
        hard,
        soft: Some(beliefs),
        elapsed: start.elapsed(),
    })
}

fn slice_all(z: &DVector<f64>, c: &Constellation) -> Result<Vec<f64>> {
    z.iter().map(|&v| c.slice(v)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{sample_real_channel, transmit};
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn random_symbols(c: &Constellation, n: usize, rng: &mut ChaCha8Rng) -> DVector<f64> {
        DVector::from_fn(n, |_, _| c.levels()[rng.random_range(0..c.len())])
    }

    fn noiseless_instance(
        n: usize,
        qam: u32,
        seed: u64,
    ) -> (LinearSystem, DVector<f64>, Constellation) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let c = Constellation::make_qam(qam).unwrap();
        let h = sample_real_channel(n, n, &mut rng).unwrap();
        let x = random_symbols(&c, n, &mut rng);
        let mut sys = LinearSystem::new(h, DVector::zeros(n), 0.0).unwrap();
        let y = transmit(&sys, &x, &mut rng).unwrap();
        sys.set_observation(y).unwrap();
        (sys, x, c)
    }

    fn residual(sys: &LinearSystem, hard: &[f64]) -> f64 {
        (sys.y() - sys.h() * DVector::from_column_slice(hard)).norm()
    }

    #[test]
    fn zf_recovers_identity_noiseless() {
        let c = Constellation::make_qam(16).unwrap();
        let x = DVector::from_vec(vec![-3.0, 1.0]);
        let sys = LinearSystem::new(DMatrix::identity(2, 2), x.clone(), 0.0).unwrap();
        let res = detect_zf(&sys, &c).unwrap();
        assert_eq!(res.hard, x.as_slice());
    }

    #[test]
    fn zf_slices_the_mean() {
        let c = Constellation::make_qam(16).unwrap();
        let sys = LinearSystem::new(
            DMatrix::identity(2, 2),
            DVector::from_vec(vec![0.2, -2.6]),
            0.0,
        )
        .unwrap();
        let res = detect_zf(&sys, &c).unwrap();
        assert_eq!(res.hard, vec![1.0, -3.0]);
    }

    #[test]
    fn zf_noiseless_recovery_random_12x12() {
        for seed in 0..50 {
            let (sys, x, c) = noiseless_instance(12, 16, 10_000 + seed);
            let res = detect_zf(&sys, &c).unwrap();
            assert_eq!(res.hard, x.as_slice(), "seed {seed}");
        }
    }

    #[test]
    fn mmse_identity_halves_observation() {
        let c = Constellation::make_qam(4).unwrap();
        // σ² = e = 1 → mean = y/2
        let sys = LinearSystem::new(
            DMatrix::identity(2, 2),
            DVector::from_vec(vec![1.8, -0.4]),
            1.0,
        )
        .unwrap();
        let res = detect_mmse(&sys, &c, 1.0).unwrap();
        assert_eq!(res.hard, vec![c.slice(0.9).unwrap(), c.slice(-0.2).unwrap()]);
    }

    #[test]
    fn mmse_matches_zf_at_negligible_noise() {
        for seed in 0..20 {
            let mut rng = ChaCha8Rng::seed_from_u64(700 + seed);
            let c = Constellation::make_qam(16).unwrap();
            let h = sample_real_channel(9, 8, &mut rng).unwrap();
            let y = DVector::from_fn(9, |_, _| rng.random::<f64>() * 8.0 - 4.0);
            let sys = LinearSystem::new(h, y, 1e-14).unwrap();
            let a = detect_zf(&sys, &c).unwrap();
            let b = detect_mmse(&sys, &c, c.energy()).unwrap();
            assert_eq!(a.hard, b.hard, "seed {seed}");
        }
    }

    #[test]
    fn sic_equals_mmse_on_orthogonal_columns() {
        let c = Constellation::make_qam(16).unwrap();
        let sys = LinearSystem::new(
            DMatrix::identity(3, 3),
            DVector::from_vec(vec![2.4, -0.9, 0.1]),
            0.5,
        )
        .unwrap();
        let a = detect_mmse(&sys, &c, c.energy()).unwrap();
        let b = detect_mmse_sic(&sys, &c, c.energy()).unwrap();
        assert_eq!(a.hard, b.hard);
    }

    #[test]
    fn sic_equals_mmse_for_single_variable() {
        let c = Constellation::make_qam(16).unwrap();
        let sys = LinearSystem::new(
            DMatrix::from_element(3, 1, 1.5),
            DVector::from_vec(vec![4.0, 4.4, 3.9]),
            0.7,
        )
        .unwrap();
        let a = detect_mmse(&sys, &c, c.energy()).unwrap();
        let b = detect_mmse_sic(&sys, &c, c.energy()).unwrap();
        assert_eq!(a.hard, b.hard);
    }

    #[test]
    fn gta_matches_mmse_on_diagonal_gram() {
        let c = Constellation::make_qam(16).unwrap();
        let h = DMatrix::from_row_slice(2, 2, &[1.5, 0.0, 0.0, 0.8]);
        let sys = LinearSystem::new(h, DVector::from_vec(vec![2.2, -1.7]), 0.4).unwrap();
        let a = detect_mmse(&sys, &c, c.energy()).unwrap();
        let b = detect_gta(
            &sys,
            &c,
            c.energy(),
            GtaVariant::Bayesian,
            TreeKind::ChowLiu,
            BpMode::Sum,
        )
        .unwrap();
        assert_eq!(a.hard, b.hard);
    }

    #[test]
    fn gta_variants_recover_noiseless() {
        for seed in 0..20 {
            let (mut sys, x, c) = noiseless_instance(6, 16, 20_000 + seed);
            // tiny positive noise keeps the posteriors positive definite
            sys = LinearSystem::new(sys.h().clone(), sys.y().clone(), 1e-12).unwrap();
            for (variant, tree, mode) in [
                (GtaVariant::Bayesian, TreeKind::ChowLiu, BpMode::Sum),
                (GtaVariant::Bayesian, TreeKind::ChowLiu, BpMode::Max),
                (GtaVariant::Bayesian, TreeKind::Line, BpMode::Sum),
                (GtaVariant::Zf, TreeKind::ChowLiu, BpMode::Sum),
            ] {
                let res = detect_gta(&sys, &c, c.energy(), variant, tree, mode).unwrap();
                assert_eq!(res.hard, x.as_slice(), "seed {seed} {variant:?} {tree:?}");
            }
        }
    }

    #[test]
    fn exactly_zero_noise_recovers_for_all_main_detectors() {
        for seed in 0..10 {
            let (sys, x, c) = noiseless_instance(6, 16, 70_000 + seed);
            assert_eq!(sys.noise_variance(), 0.0);
            for name in ["zf", "mmse", "sic", "gta", "gta:zf", "gta:max", "ml"] {
                let spec: DetectorSpec = name.parse().unwrap();
                let res = spec.detect(&sys, &c).unwrap();
                assert_eq!(res.hard, x.as_slice(), "{name} at seed {seed}");
            }
        }
    }

    #[test]
    fn ml_budget_refusal_names_the_budget() {
        let c = Constellation::make_qam(16).unwrap();
        let n = 16; // 4^16 > 2^24
        let sys = LinearSystem::new(DMatrix::identity(n, n), DVector::zeros(n), 0.1).unwrap();
        match detect_ml(&sys, &c, DEFAULT_ML_BUDGET) {
            Err(Error::MlBudgetExceeded { budget, .. }) => {
                assert_eq!(budget, DEFAULT_ML_BUDGET)
            }
            other => panic!("expected budget refusal, got {other:?}"),
        }
    }

    #[test]
    fn ml_single_variable_slices_scalar_least_squares() {
        let c = Constellation::make_qam(16).unwrap();
        let sys = LinearSystem::new(
            DMatrix::from_element(1, 1, 2.0),
            DVector::from_vec(vec![5.0]),
            0.1,
        )
        .unwrap();
        let res = detect_ml(&sys, &c, DEFAULT_ML_BUDGET).unwrap();
        // least squares gives 2.5; slicing picks 3
        assert_eq!(res.hard, vec![3.0]);
    }

    #[test]
    fn ml_recovers_noiseless() {
        for seed in 0..10 {
            let (sys, x, c) = noiseless_instance(6, 16, 30_000 + seed);
            let res = detect_ml(&sys, &c, DEFAULT_ML_BUDGET).unwrap();
            assert_eq!(res.hard, x.as_slice());
        }
    }

    #[test]
    fn ml_matches_plain_enumeration() {
        // independent oracle: straightforward odometer enumeration
        for seed in 0..10 {
            let mut rng = ChaCha8Rng::seed_from_u64(40_000 + seed);
            let c = Constellation::make_qam(16).unwrap();
            let n = 4;
            let h = sample_real_channel(n, n, &mut rng).unwrap();
            let x = random_symbols(&c, n, &mut rng);
            let mut sys = LinearSystem::new(h, DVector::zeros(n), 2.0).unwrap();
            let y = transmit(&sys, &x, &mut rng).unwrap();
            sys.set_observation(y).unwrap();

            let k = c.len();
            let mut best = f64::INFINITY;
            let mut best_x = vec![0.0; n];
            for code in 0..k.pow(n as u32) {
                let mut cc = code;
                let mut cand = vec![0.0; n];
                for d in 0..n {
                    cand[d] = c.levels()[cc % k];
                    cc /= k;
                }
                let r = residual(&sys, &cand);
                if r * r < best {
                    best = r * r;
                    best_x = cand;
                }
            }
            let res = detect_ml(&sys, &c, DEFAULT_ML_BUDGET).unwrap();
            assert_eq!(res.hard, best_x, "seed {seed}");
        }
    }

    #[test]
    fn ml_residual_dominates_all_detectors() {
        for seed in 0..10 {
            let mut rng = ChaCha8Rng::seed_from_u64(50_000 + seed);
            let c = Constellation::make_qam(4).unwrap();
            let n = 8;
            let h = sample_real_channel(n, n, &mut rng).unwrap();
            let x = random_symbols(&c, n, &mut rng);
            let mut sys = LinearSystem::new(h, DVector::zeros(n), 1.5).unwrap();
            let y = transmit(&sys, &x, &mut rng).unwrap();
            sys.set_observation(y).unwrap();

            let ml = detect_ml(&sys, &c, DEFAULT_ML_BUDGET).unwrap();
            let r_ml = residual(&sys, &ml.hard);
            for spec in [
                DetectorSpec::Zf,
                DetectorSpec::Mmse,
                DetectorSpec::MmseSic,
                DetectorSpec::gta_default(),
                "gta:max".parse().unwrap(),
                DetectorSpec::LoopyBp {
                    max_iters: 20,
                    damping: 0.0,
                },
            ] {
                let res = spec.detect(&sys, &c).unwrap();
                assert!(
                    r_ml <= residual(&sys, &res.hard) + 1e-9,
                    "{spec} beat ML at seed {seed}"
                );
            }
        }
    }

    #[test]
    fn every_detector_emits_alphabet_members() {
        let (sys, _, c) = noiseless_instance(4, 16, 60_000);
        let sys = LinearSystem::new(sys.h().clone(), sys.y().clone(), 0.8).unwrap();
        for name in ["zf", "mmse", "sic", "gta", "gta:line", "gta:zf", "gta:max", "ml", "loopybp"] {
            let spec: DetectorSpec = name.parse().unwrap();
            let res = spec.detect(&sys, &c).unwrap();
            assert_eq!(res.hard.len(), 4);
            for &s in &res.hard {
                assert!(c.index_of(s).is_some(), "{name} emitted {s}");
            }
            if let Some(soft) = &res.soft {
                for i in 0..soft.n_vars() {
                    let sum: f64 = soft.row(i).iter().sum();
                    assert!((sum - 1.0).abs() < 1e-9);
                }
            }
        }
    }

    #[test]
    fn detector_names_round_trip() {
        for name in ["zf", "mmse", "sic", "gta", "gta:line", "gta:zf", "gta:max", "ml", "loopybp"] {
            let spec: DetectorSpec = name.parse().unwrap();
            assert_eq!(spec.to_string(), name);
        }
        assert!("sphere".parse::<DetectorSpec>().is_err());
    }
}
