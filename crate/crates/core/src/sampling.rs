//! Iterative sampling-based training.
//!
//! Each iteration solves a small random sample, merges its support vectors
//! into the master set `SV*`, and re-solves the merged set. The threshold R²
//! and input-space center `a = Σ αᵢxᵢ` of the merged solve are tracked until
//! both stop moving for `t` consecutive iterations.

use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::data::DataMatrix;
use crate::error::{Result, SvddError};
use crate::kernel::{KernelCache, KernelParams};
use crate::model::{build_model, SvddModel};
use crate::solver::{solve_dual, DualProblem, SolverConfig};
use crate::trainer::SolveObserver;

/// Which row count defines `C = 1/(n·f)` inside each solve.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum PenaltyBasis {
    /// Rows of the set being solved.
    #[default]
    SolveSize,
    /// The configured sample size, for every solve (raised to `1/rows`
    /// when that would be infeasible).
    SampleSize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SamplingConfig {
    pub sample_size: usize,
    pub outlier_fraction: f64,
    /// Relative center tolerance ε₁.
    pub eps_center: f64,
    /// Relative R² tolerance ε₂.
    pub eps_r_squared: f64,
    /// Consecutive passing iterations required.
    pub t_consecutive: usize,
    pub max_iter: usize,
    pub rng_seed: u64,
    pub check_center: bool,
    pub penalty_basis: PenaltyBasis,
}

impl SamplingConfig {
    pub fn new(sample_size: usize, outlier_fraction: f64) -> Self {
        SamplingConfig {
            sample_size,
            outlier_fraction,
            eps_center: 1e-3,
            eps_r_squared: 1e-3,
            t_consecutive: 5,
            max_iter: 1000,
            rng_seed: 0,
            check_center: true,
            penalty_basis: PenaltyBasis::SolveSize,
        }
    }

    /// Sample size `m + 1` for `m` features.
    pub fn for_dimension(n_features: usize, outlier_fraction: f64) -> Self {
        Self::new(n_features + 1, outlier_fraction)
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.rng_seed = seed;
        self
    }

    fn validate(&self) -> Result<()> {
        if self.sample_size == 0 {
            return Err(SvddError::config("sample size must be positive"));
        }
        if !(self.outlier_fraction > 0.0 && self.outlier_fraction <= 1.0) {
            return Err(SvddError::config("outlier fraction must lie in (0, 1]"));
        }
        if !(self.eps_center > 0.0 && self.eps_r_squared > 0.0) {
            return Err(SvddError::config("convergence tolerances must be positive"));
        }
        if self.t_consecutive == 0 || self.max_iter == 0 {
            return Err(SvddError::config("t and max_iter must be positive"));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct IterationRecord {
    pub iteration: usize,
    pub r_squared: f64,
    pub center: Vec<f64>,
    /// `‖aᵢ − aᵢ₋₁‖`; `None` on the first iteration.
    pub center_delta: Option<f64>,
    pub master_set_size: usize,
    /// Consecutive iterations (ending here) passing the relative tests.
    pub streak: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TrainStatus {
    Converged,
    MaxIter,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrainTrace {
    pub records: Vec<IterationRecord>,
    pub status: TrainStatus,
}

impl TrainTrace {
    pub fn iterations(&self) -> usize {
        self.records.len()
    }
}

#[derive(Clone, Debug)]
pub struct SamplingTraining {
    pub model: SvddModel,
    pub trace: TrainTrace,
    /// Final master set `SV*` (rows of the training data).
    pub master_set: DataMatrix,
    pub elapsed: Duration,
}

/// `n` rows drawn uniformly with replacement.
pub fn sample_with_replacement<R: Rng + ?Sized>(
    data: &DataMatrix,
    n: usize,
    rng: &mut R,
) -> Result<DataMatrix> {
    if data.is_empty() {
        return Err(SvddError::input("cannot sample from an empty data set"));
    }
    let rows = data.n_rows();
    let idx: Vec<usize> = (0..n).map(|_| rng.random_range(0..rows)).collect();
    Ok(data.select(&idx))
}

fn passes(prev: &IterationRecord, cur: &IterationRecord, cfg: &SamplingConfig) -> bool {
    let r2_ok = (cur.r_squared - prev.r_squared).abs() <= cfg.eps_r_squared * prev.r_squared;
    if !cfg.check_center {
        return r2_ok;
    }
    let delta = euclid(&cur.center, &prev.center);
    let scale = euclid(&prev.center, &vec![0.0; prev.center.len()]).max(1e-12);
    r2_ok && delta <= cfg.eps_center * scale
}

fn euclid(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// True when the last record hits `max_iter` or the last `t` records each
/// pass the relative center and R² tests against their predecessor.
pub fn check_convergence(trace: &[IterationRecord], cfg: &SamplingConfig) -> bool {
    let Some(last) = trace.last() else {
        return false;
    };
    if last.iteration >= cfg.max_iter {
        return true;
    }
    streak_of(trace, cfg) >= cfg.t_consecutive
}

fn streak_of(trace: &[IterationRecord], cfg: &SamplingConfig) -> usize {
    trace
        .windows(2)
        .rev()
        .take_while(|w| passes(&w[0], &w[1], cfg))
        .count()
}

struct SolvedSet {
    support: DataMatrix,
    model: SvddModel,
}

fn solve_set(
    set: &DataMatrix,
    params: KernelParams,
    cfg: &SamplingConfig,
    solver_cfg: &SolverConfig,
    cache: &mut KernelCache,
    observer: SolveObserver,
) -> Result<SolvedSet> {
    let rows = set.n_rows() as f64;
    let penalty = match cfg.penalty_basis {
        PenaltyBasis::SolveSize => 1.0 / (rows * cfg.outlier_fraction),
        PenaltyBasis::SampleSize => {
            (1.0 / (cfg.sample_size as f64 * cfg.outlier_fraction)).max(1.0 / rows)
        }
    };
    let problem = DualProblem::with_penalty(set, params, penalty)?;
    let result = solve_dual(&problem, solver_cfg, cache)?;
    observer(&problem, &result);
    let model = build_model(&problem, &result)?;
    Ok(SolvedSet {
        support: model.support_vectors().clone(),
        model,
    })
}

/// Train with the sampling method.
pub fn train_sampling(
    data: &DataMatrix,
    params: KernelParams,
    cfg: &SamplingConfig,
    solver_cfg: &SolverConfig,
) -> Result<SamplingTraining> {
    train_sampling_observed(data, params, cfg, solver_cfg, &|_, _| {})
}

pub fn train_sampling_observed(
    data: &DataMatrix,
    params: KernelParams,
    cfg: &SamplingConfig,
    solver_cfg: &SolverConfig,
    observer: SolveObserver,
) -> Result<SamplingTraining> {
    cfg.validate()?;
    if data.is_empty() {
        return Err(SvddError::input("cannot train on an empty data set"));
    }
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.rng_seed);
    let mut cache = KernelCache::new(cfg.sample_size.max(512));

    let first = sample_with_replacement(data, cfg.sample_size, &mut rng)?;
    let first_sv = solve_set(&first, params, cfg, solver_cfg, &mut cache, observer)?.support;
    let mut master = DataMatrix::union_dedup([&first_sv])?;

    let mut records: Vec<IterationRecord> = Vec::new();
    let mut last_model: Option<SvddModel> = None;
    let mut status = TrainStatus::MaxIter;
    for i in 1..=cfg.max_iter {
        let sample = sample_with_replacement(data, cfg.sample_size, &mut rng)?;
        let sample_sv = solve_set(&sample, params, cfg, solver_cfg, &mut cache, observer)?.support;
        let merged = DataMatrix::union_dedup([&master, &sample_sv])?;
        let solved = solve_set(&merged, params, cfg, solver_cfg, &mut cache, observer)?;

        let center = solved.model.center().to_vec();
        let center_delta = records
            .last()
            .map(|p| euclid(&center, &p.center));
        let mut record = IterationRecord {
            iteration: i,
            r_squared: solved.model.r_squared(),
            center,
            center_delta,
            master_set_size: solved.support.n_rows(),
            streak: 0,
        };
        record.streak = match records.last() {
            Some(prev) if passes(prev, &record, cfg) => prev.streak + 1,
            _ => 0,
        };
        let done_by_streak = record.streak >= cfg.t_consecutive;
        records.push(record);
        master = solved.support;
        last_model = Some(solved.model);
        if done_by_streak {
            status = TrainStatus::Converged;
            break;
        }
    }

    Ok(SamplingTraining {
        model: last_model.expect("max_iter >= 1"),
        trace: TrainTrace { records, status },
        master_set: master,
        elapsed: start.elapsed(),
    })
}
