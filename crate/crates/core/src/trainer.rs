//! Baseline training: one solve over every observation.

use std::time::{Duration, Instant};

use crate::data::DataMatrix;
use crate::error::Result;
use crate::kernel::{KernelCache, KernelParams};
use crate::model::{build_model, SvddModel};
use crate::solver::{solve_dual, DualProblem, SolveResult, SolverConfig};

/// Callback invoked with every dual problem and its solution.
pub type SolveObserver<'o> = &'o (dyn Fn(&DualProblem, &SolveResult) + Sync);

#[derive(Clone, Debug)]
pub struct FullTraining {
    pub model: SvddModel,
    /// Wall-clock time of the solve alone.
    pub elapsed: Duration,
    pub solver_iterations: usize,
    pub solver_converged: bool,
}

/// Train on all rows of `data` with `C = 1/(n·f)`.
pub fn train_full(
    data: &DataMatrix,
    params: KernelParams,
    outlier_fraction: f64,
    config: &SolverConfig,
) -> Result<FullTraining> {
    train_full_observed(data, params, outlier_fraction, config, &|_, _| {})
}

pub fn train_full_observed(
    data: &DataMatrix,
    params: KernelParams,
    outlier_fraction: f64,
    config: &SolverConfig,
    observer: SolveObserver,
) -> Result<FullTraining> {
    let problem = DualProblem::from_outlier_fraction(data, params, outlier_fraction)?;
    let mut cache = KernelCache::for_rows(data.n_rows());
    let start = Instant::now();
    let result = solve_dual(&problem, config, &mut cache)?;
    let elapsed = start.elapsed();
    observer(&problem, &result);
    Ok(FullTraining {
        model: build_model(&problem, &result)?,
        elapsed,
        solver_iterations: result.iterations,
        solver_converged: result.converged,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use svdd_oracle as oracle;

    #[test]
    fn single_row() {
        let data = DataMatrix::from_rows(&[[4.0, 4.0]]).unwrap();
        let t = train_full(&data, KernelParams::new(1.0).unwrap(), 0.001, &SolverConfig::default()).unwrap();
        assert_eq!(t.model.r_squared(), 0.0);
        assert_eq!(t.model.n_support_vectors(), 1);
    }

    #[test]
    fn triangle_matches_oracle_model() {
        let pts = vec![vec![0.0, 0.0], vec![4.0, 0.0], vec![2.0, 3.0]];
        let data = DataMatrix::from_rows(&pts).unwrap();
        let t = train_full(&data, KernelParams::new(10.0).unwrap(), 1.0 / 3.0, &SolverConfig::default()).unwrap();
        let o = oracle::solve(&pts, 10.0, 1.0);
        let k = oracle::gaussian_gram(&pts, 10.0);
        // R² at any free support vector of the oracle solution
        let kk = oracle::quadratic_form(&k, &o.alpha);
        let free = (0..3).find(|&i| o.alpha[i] > 1e-6 && o.alpha[i] < 1.0 - 1e-6).unwrap();
        let cross: f64 = (0..3).map(|i| o.alpha[i] * k[i][free]).sum();
        let r2 = 1.0 - 2.0 * cross + kk;
        assert!((t.model.r_squared() - r2).abs() < 1e-5);
    }

    #[test]
    fn deterministic() {
        let pts: Vec<[f64; 2]> = (0..50).map(|i| [(i as f64 * 0.37).sin() * 3.0, (i as f64 * 0.11).cos()]).collect();
        let data = DataMatrix::from_rows(&pts).unwrap();
        let p = KernelParams::new(1.0).unwrap();
        let a = train_full(&data, p, 0.05, &SolverConfig::default()).unwrap();
        let b = train_full(&data, p, 0.05, &SolverConfig::default()).unwrap();
        assert_eq!(a.model, b.model);
    }
}
