//! Scoring-ready SVDD models.

use std::cell::Cell;

use crate::data::DataMatrix;
use crate::error::{Result, SvddError};
use crate::kernel::{kernel_unchecked, KernelParams};
use crate::solver::{DualProblem, SolveResult};

thread_local! {
    static SCORE_CALLS: Cell<u64> = const { Cell::new(0) };
}

/// Number of observations scored on the current thread so far.
pub fn score_call_count() -> u64 {
    SCORE_CALLS.with(|c| c.get())
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ModelOptions {
    /// Rows with `α ≤ alpha_zero_tol` are not support vectors.
    pub alpha_zero_tol: f64,
    /// `α ≥ C·(1 − alpha_boundary_rel_tol)` counts as at the bound.
    pub alpha_boundary_rel_tol: f64,
}

impl Default for ModelOptions {
    fn default() -> Self {
        ModelOptions {
            alpha_zero_tol: 1e-8,
            alpha_boundary_rel_tol: 1e-8,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SvddModel {
    pub(crate) support_vectors: DataMatrix,
    pub(crate) sv_alpha: Vec<f64>,
    pub(crate) params: KernelParams,
    pub(crate) penalty: f64,
    pub(crate) outlier_fraction: f64,
    pub(crate) r_squared: f64,
    pub(crate) self_term: f64,
    pub(crate) center: Vec<f64>,
    pub(crate) training_n: usize,
    pub(crate) threshold_fallback: bool,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScoreOutcome {
    pub dist_squared: f64,
    pub is_outlier: bool,
}

impl ScoreOutcome {
    pub fn is_inside(&self) -> bool {
        !self.is_outlier
    }
}

/// Kernel-space squared distance from `z` to the center implied by
/// `(support_vectors, alpha)`, given the precomputed `Σᵢⱼ αᵢαⱼK(xᵢ,xⱼ)`.
fn distance_squared(
    support_vectors: &DataMatrix,
    alpha: &[f64],
    params: &KernelParams,
    self_term: f64,
    z: &[f64],
) -> f64 {
    let cross: f64 = support_vectors
        .rows()
        .zip(alpha)
        .map(|(x, a)| a * kernel_unchecked(x, z, params))
        .sum();
    // K(z, z) = 1 for the Gaussian kernel
    1.0 - 2.0 * cross + self_term
}

fn self_term(support_vectors: &DataMatrix, alpha: &[f64], params: &KernelParams) -> f64 {
    let mut acc = 0.0;
    for (xi, ai) in support_vectors.rows().zip(alpha) {
        for (xj, aj) in support_vectors.rows().zip(alpha) {
            acc += ai * aj * kernel_unchecked(xi, xj, params);
        }
    }
    acc
}

/// Build a model from a solved dual with default tolerances.
pub fn build_model(problem: &DualProblem, result: &SolveResult) -> Result<SvddModel> {
    build_model_with(problem, result, &ModelOptions::default())
}

pub fn build_model_with(
    problem: &DualProblem,
    result: &SolveResult,
    options: &ModelOptions,
) -> Result<SvddModel> {
    let data = problem.data();
    if result.alpha.len() != data.n_rows() {
        return Err(SvddError::input("solution length does not match the problem"));
    }
    let keep: Vec<usize> = (0..data.n_rows())
        .filter(|&i| result.alpha[i] > options.alpha_zero_tol)
        .collect();
    if keep.is_empty() {
        return Err(SvddError::Numeric("solution has no support vectors".into()));
    }
    let support_vectors = data.select(&keep);
    let mut sv_alpha: Vec<f64> = keep.iter().map(|&i| result.alpha[i]).collect();
    let mass: f64 = sv_alpha.iter().sum();
    if mass != 1.0 {
        for a in &mut sv_alpha {
            *a /= mass;
        }
    }
    let penalty = problem.penalty();
    let params = *problem.params();
    let self_term = self_term(&support_vectors, &sv_alpha, &params);

    let bound = penalty * (1.0 - options.alpha_boundary_rel_tol);
    let dists: Vec<f64> = support_vectors
        .rows()
        .map(|x| distance_squared(&support_vectors, &sv_alpha, &params, self_term, x))
        .collect();
    let boundary: Vec<f64> = dists
        .iter()
        .zip(&sv_alpha)
        .filter(|(_, &a)| a < bound)
        .map(|(d, _)| *d)
        .collect();
    let (r_squared, threshold_fallback) = if boundary.is_empty() {
        (dists.iter().cloned().fold(0.0, f64::max), true)
    } else {
        (boundary.iter().sum::<f64>() / boundary.len() as f64, false)
    };

    let m = data.n_cols();
    let mut center = vec![0.0; m];
    for (x, a) in support_vectors.rows().zip(&sv_alpha) {
        for (c, v) in center.iter_mut().zip(x) {
            *c += a * v;
        }
    }

    Ok(SvddModel {
        support_vectors,
        sv_alpha,
        params,
        penalty,
        outlier_fraction: problem.outlier_fraction(),
        r_squared: r_squared.max(0.0),
        self_term,
        center,
        training_n: data.n_rows(),
        threshold_fallback,
    })
}

impl SvddModel {
    /// Assemble a model from stored parts, recomputing nothing. Used when
    /// loading persisted models; checks the structural invariants.
    #[allow(clippy::too_many_arguments)]
    pub fn from_parts(
        support_vectors: DataMatrix,
        sv_alpha: Vec<f64>,
        params: KernelParams,
        penalty: f64,
        outlier_fraction: f64,
        r_squared: f64,
        self_term: f64,
        center: Vec<f64>,
        training_n: usize,
        threshold_fallback: bool,
    ) -> Result<Self> {
        let nsv = support_vectors.n_rows();
        if nsv == 0 {
            return Err(SvddError::input("model needs at least one support vector"));
        }
        if sv_alpha.len() != nsv {
            return Err(SvddError::input("alpha length differs from support vector count"));
        }
        if center.len() != support_vectors.n_cols() {
            return Err(SvddError::input("center dimension differs from feature dimension"));
        }
        if (sv_alpha.iter().sum::<f64>() - 1.0).abs() > 1e-9 || sv_alpha.iter().any(|&a| !(a > 0.0)) {
            return Err(SvddError::input("support vector weights must be positive and sum to one"));
        }
        if !(r_squared >= 0.0 && r_squared.is_finite()) {
            return Err(SvddError::input("threshold R² must be finite and nonnegative"));
        }
        if !(self_term > 0.0 && self_term <= 1.0 + 1e-12) {
            return Err(SvddError::input("self term must lie in (0, 1]"));
        }
        if !(penalty > 0.0 && penalty.is_finite()) || !(outlier_fraction > 0.0 && outlier_fraction.is_finite()) {
            return Err(SvddError::input("penalty and outlier fraction must be positive"));
        }
        Ok(SvddModel {
            support_vectors,
            sv_alpha,
            params,
            penalty,
            outlier_fraction,
            r_squared,
            self_term,
            center,
            training_n,
            threshold_fallback,
        })
    }

    pub fn support_vectors(&self) -> &DataMatrix {
        &self.support_vectors
    }

    pub fn sv_alpha(&self) -> &[f64] {
        &self.sv_alpha
    }

    pub fn n_support_vectors(&self) -> usize {
        self.support_vectors.n_rows()
    }

    pub fn dimension(&self) -> usize {
        self.support_vectors.n_cols()
    }

    pub fn params(&self) -> &KernelParams {
        &self.params
    }

    pub fn penalty(&self) -> f64 {
        self.penalty
    }

    pub fn outlier_fraction(&self) -> f64 {
        self.outlier_fraction
    }

    pub fn r_squared(&self) -> f64 {
        self.r_squared
    }

    /// `Σᵢⱼ αᵢαⱼK(xᵢ,xⱼ)` over the support vectors.
    pub fn self_term(&self) -> f64 {
        self.self_term
    }

    /// Input-space center `Σ αᵢxᵢ`.
    pub fn center(&self) -> &[f64] {
        &self.center
    }

    pub fn training_n(&self) -> usize {
        self.training_n
    }

    /// Set when every support vector sat at the bound `C`, so R² fell back
    /// to the largest support-vector distance.
    pub fn threshold_fallback(&self) -> bool {
        self.threshold_fallback
    }

    /// Support vectors strictly below the bound `C`.
    pub fn boundary_indices(&self, options: &ModelOptions) -> Vec<usize> {
        let bound = self.penalty * (1.0 - options.alpha_boundary_rel_tol);
        (0..self.sv_alpha.len()).filter(|&i| self.sv_alpha[i] < bound).collect()
    }

    /// Score one observation: outlier iff `dist² > R²`.
    pub fn score(&self, z: &[f64]) -> Result<ScoreOutcome> {
        if z.len() != self.dimension() {
            return Err(SvddError::input(format!(
                "observation has {} features, model expects {}",
                z.len(),
                self.dimension()
            )));
        }
        SCORE_CALLS.with(|c| c.set(c.get() + 1));
        let dist_squared = distance_squared(
            &self.support_vectors,
            &self.sv_alpha,
            &self.params,
            self.self_term,
            z,
        );
        Ok(ScoreOutcome {
            dist_squared,
            is_outlier: dist_squared > self.r_squared,
        })
    }

    pub fn score_batch(&self, data: &DataMatrix) -> Result<Vec<ScoreOutcome>> {
        if !data.is_empty() && data.n_cols() != self.dimension() {
            return Err(SvddError::input(format!(
                "data has {} features, model expects {}",
                data.n_cols(),
                self.dimension()
            )));
        }
        data.rows().map(|z| self.score(z)).collect()
    }

    /// `true` for every row scored inside the description.
    pub fn inside_mask(&self, data: &DataMatrix) -> Result<Vec<bool>> {
        Ok(self.score_batch(data)?.iter().map(ScoreOutcome::is_inside).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::KernelCache;
    use crate::solver::{solve_dual, SolverConfig};
    use proptest::prelude::*;

    fn fit(pts: &[Vec<f64>], s: f64, c: f64) -> (DataMatrix, SolveResult, SvddModel) {
        let data = DataMatrix::from_rows(pts).unwrap();
        let problem = DualProblem::with_penalty(&data, KernelParams::new(s).unwrap(), c).unwrap();
        let result = solve_dual(&problem, &SolverConfig::default(), &mut KernelCache::new(16)).unwrap();
        let model = build_model(&problem, &result).unwrap();
        (data.clone(), result, model)
    }

    #[test]
    fn two_point_closed_form() {
        let (_, _, model) = fit(&[vec![0.0, 0.0], vec![2.0, 0.0]], 1.0, 1.0);
        let g = (-2.0f64).exp();
        assert!((model.r_squared() - (1.0 - g) / 2.0).abs() < 1e-12);
        assert!((model.r_squared() - 0.432332).abs() < 1e-6);
        assert_eq!(model.center(), &[1.0, 0.0]);

        let mid = model.score(&[1.0, 0.0]).unwrap();
        let expected = 1.0 - 2.0 * (-0.5f64).exp() + (1.0 + g) / 2.0;
        assert!((mid.dist_squared - expected).abs() < 1e-12);
        assert!((mid.dist_squared - 0.354606).abs() < 1e-6);
        assert!(!mid.is_outlier);

        for sv in [[0.0, 0.0], [2.0, 0.0]] {
            let o = model.score(&sv).unwrap();
            assert!((o.dist_squared - model.r_squared()).abs() < 1e-9);
        }
    }

    #[test]
    fn single_point_model() {
        let (_, _, model) = fit(&[vec![1.5, -2.0]], 0.7, 1.0);
        assert_eq!(model.r_squared(), 0.0);
        assert_eq!(model.center(), &[1.5, -2.0]);
        let o = model.score(&[1.5, -2.0]).unwrap();
        assert_eq!(o.dist_squared, 0.0);
        assert!(!o.is_outlier);
    }

    #[test]
    fn boundary_point_scores_inside() {
        // a point with dist² == R² exactly is not an outlier
        let model = SvddModel::from_parts(
            DataMatrix::from_rows(&[[0.0]]).unwrap(),
            vec![1.0],
            KernelParams::new(1.0).unwrap(),
            1.0,
            1.0,
            0.0,
            1.0,
            vec![0.0],
            1,
            false,
        )
        .unwrap();
        assert!(!model.score(&[0.0]).unwrap().is_outlier);
        assert!(model.score(&[0.1]).unwrap().is_outlier);
    }

    #[test]
    fn all_at_bound_falls_back() {
        // n·C = 1: every α is pinned at C
        let pts: Vec<Vec<f64>> = (0..4).map(|i| vec![i as f64, (i * i) as f64 * 0.3]).collect();
        let (_, result, model) = fit(&pts, 1.0, 0.25);
        assert!(result.alpha.iter().all(|&a| (a - 0.25).abs() < 1e-15));
        assert!(model.threshold_fallback());
        let max_d = (0..4)
            .map(|i| model.score(&pts[i]).unwrap().dist_squared)
            .fold(0.0, f64::max);
        assert_eq!(model.r_squared(), max_d);
    }

    #[test]
    fn batch_scoring() {
        let (data, _, model) = fit(&[vec![0.0, 0.0], vec![2.0, 0.0]], 1.0, 1.0);
        assert!(model.score_batch(&DataMatrix::empty(2)).unwrap().is_empty());
        let one = model.score_batch(&data.select(&[1])).unwrap();
        assert_eq!(one.len(), 1);
        assert!(!one[0].is_outlier);
        assert!(model.score(&[0.0]).is_err());
        assert!(model.score_batch(&DataMatrix::from_rows(&[[0.0]]).unwrap()).is_err());
    }

    fn cloud() -> impl Strategy<Value = (Vec<Vec<f64>>, f64)> {
        (
            prop::collection::vec(prop::collection::vec(-3.0f64..3.0, 2), 3..25),
            prop::sample::select(vec![0.7, 1.5, 3.0]),
        )
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(40))]

        #[test]
        fn threshold_is_consistent_across_boundary_svs((pts, s) in cloud()) {
            let (_, _, model) = fit(&pts, s, 1.0);
            prop_assert!((model.sv_alpha().iter().sum::<f64>() - 1.0).abs() <= 1e-9);
            prop_assert!(model.self_term() > 0.0 && model.self_term() <= 1.0);
            for k in model.boundary_indices(&ModelOptions::default()) {
                let d = model.score(model.support_vectors().row(k)).unwrap().dist_squared;
                prop_assert!((d - model.r_squared()).abs() <= 1e-6);
            }
        }

        #[test]
        fn pruning_zero_alpha_rows_keeps_distances((pts, s) in cloud(), z in prop::collection::vec(-4.0f64..4.0, 2)) {
            let (data, result, model) = fit(&pts, s, 1.0);
            let full: f64 = {
                let st = self_term(&data, &result.alpha, model.params());
                distance_squared(&data, &result.alpha, model.params(), st, &z)
            };
            let pruned = model.score(&z).unwrap().dist_squared;
            prop_assert!((full - pruned).abs() <= 1e-7);
            prop_assert_eq!(model.score(&z).unwrap(), model.score(&z).unwrap());
        }

        #[test]
        fn clear_outliers_are_at_most_nf(pts in prop::collection::vec(prop::collection::vec(-3.0f64..3.0, 2), 20..60)) {
            let f = 0.1;
            let c = 1.0 / (pts.len() as f64 * f);
            let (data, _, model) = fit(&pts, 1.0, c);
            // only points at α = C can sit clearly outside, and at most 1/C = n·f of them fit
            let tol = 1e-6 * model.r_squared().max(1e-12).sqrt() + 1e-9;
            let out = model
                .score_batch(&data)
                .unwrap()
                .iter()
                .filter(|o| o.dist_squared > model.r_squared() + tol)
                .count();
            prop_assert!(out as f64 <= pts.len() as f64 * f + 1e-9);
        }
    }
}
