//! Partitioned training: `p` workers each run the sampling method on their
//! block of rows, a controller unions the workers' master sets and solves
//! the union once.

use std::time::{Duration, Instant};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::data::{row_key, DataMatrix};
use crate::error::{Result, SvddError};
use crate::kernel::{KernelCache, KernelParams};
use crate::model::{build_model, SvddModel};
use crate::sampling::{train_sampling_observed, SamplingConfig, SamplingTraining, TrainTrace};
use crate::solver::{solve_dual, DualProblem, SolverConfig};
use crate::trainer::SolveObserver;

const SHUFFLE_SALT: u64 = 0x5eed_5eed_0000_0001;

#[derive(Clone, Debug, PartialEq)]
pub struct DistributedConfig {
    pub workers: usize,
    /// Seeded shuffle of the rows before contiguous partitioning.
    pub shuffle: bool,
}

impl DistributedConfig {
    pub fn new(workers: usize) -> Self {
        DistributedConfig {
            workers,
            shuffle: true,
        }
    }
}

#[derive(Clone, Debug)]
pub struct DistributedTraining {
    pub model: SvddModel,
    pub worker_traces: Vec<TrainTrace>,
    /// Final `SV*` of each worker, in worker order.
    pub worker_master_sets: Vec<DataMatrix>,
    /// Deduplicated union of the worker master sets.
    pub union_size: usize,
    pub elapsed: Duration,
}

/// Half-open row ranges of `p` contiguous blocks with sizes `⌊n/p⌋` or `⌈n/p⌉`.
pub fn partition_ranges(n: usize, p: usize) -> Vec<(usize, usize)> {
    let base = n / p;
    let extra = n % p;
    let mut start = 0;
    (0..p)
        .map(|w| {
            let len = base + usize::from(w < extra);
            let r = (start, start + len);
            start += len;
            r
        })
        .collect()
}

/// Union of worker master sets with duplicates removed and rows in a
/// canonical (lexicographic) order, so the result does not depend on the
/// order in which workers report.
pub fn union_master_sets(sets: &[DataMatrix]) -> Result<DataMatrix> {
    let merged = DataMatrix::union_dedup(sets.iter())?;
    let mut order: Vec<usize> = (0..merged.n_rows()).collect();
    order.sort_by(|&a, &b| {
        merged
            .row(a)
            .iter()
            .zip(merged.row(b))
            .map(|(x, y)| x.total_cmp(y))
            .find(|o| o.is_ne())
            .unwrap_or(std::cmp::Ordering::Equal)
            .then_with(|| row_key(merged.row(a)).cmp(&row_key(merged.row(b))))
    });
    Ok(merged.select(&order))
}

pub fn train_distributed(
    data: &DataMatrix,
    params: KernelParams,
    scfg: &SamplingConfig,
    dcfg: &DistributedConfig,
    solver_cfg: &SolverConfig,
) -> Result<DistributedTraining> {
    train_distributed_observed(data, params, scfg, dcfg, solver_cfg, &|_, _| {})
}

pub fn train_distributed_observed(
    data: &DataMatrix,
    params: KernelParams,
    scfg: &SamplingConfig,
    dcfg: &DistributedConfig,
    solver_cfg: &SolverConfig,
    observer: SolveObserver,
) -> Result<DistributedTraining> {
    let p = dcfg.workers;
    let n = data.n_rows();
    if p == 0 || p > n {
        return Err(SvddError::config(format!(
            "worker count {p} must lie in 1..={n} (one row per worker at least)"
        )));
    }
    let start = Instant::now();
    if p == 1 {
        // a single partition is the plain sampling method
        let out = train_sampling_observed(data, params, scfg, solver_cfg, observer)?;
        return Ok(DistributedTraining {
            union_size: out.master_set.n_rows(),
            model: out.model,
            worker_traces: vec![out.trace],
            worker_master_sets: vec![out.master_set],
            elapsed: start.elapsed(),
        });
    }

    let shuffled;
    let source = if dcfg.shuffle {
        let mut idx: Vec<usize> = (0..n).collect();
        idx.shuffle(&mut ChaCha8Rng::seed_from_u64(scfg.rng_seed ^ SHUFFLE_SALT));
        shuffled = data.select(&idx);
        &shuffled
    } else {
        data
    };

    let blocks: Vec<DataMatrix> = partition_ranges(n, p)
        .into_iter()
        .map(|(a, b)| source.slice_rows(a, b))
        .collect();

    let results: Vec<Result<SamplingTraining>> = std::thread::scope(|scope| {
        let handles: Vec<_> = blocks
            .iter()
            .enumerate()
            .map(|(w, block)| {
                let cfg = scfg.clone().with_seed(scfg.rng_seed.wrapping_add(w as u64));
                scope.spawn(move || train_sampling_observed(block, params, &cfg, solver_cfg, observer))
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("worker panicked"))
            .collect()
    });
    let mut masters = Vec::with_capacity(p);
    let mut traces = Vec::with_capacity(p);
    for r in results {
        let r = r?;
        masters.push(r.master_set);
        traces.push(r.trace);
    }

    let union = union_master_sets(&masters)?;
    let problem = DualProblem::from_outlier_fraction(&union, params, scfg.outlier_fraction)?;
    let mut cache = KernelCache::for_rows(union.n_rows());
    let result = solve_dual(&problem, solver_cfg, &mut cache)?;
    observer(&problem, &result);
    let model = build_model(&problem, &result)?;

    Ok(DistributedTraining {
        model,
        worker_traces: traces,
        worker_master_sets: masters,
        union_size: union.n_rows(),
        elapsed: start.elapsed(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampling::train_sampling;

    fn blob(n: usize) -> DataMatrix {
        let rows: Vec<[f64; 2]> = (0..n)
            .map(|i| {
                let t = i as f64 * 2.399963;
                let r = 1.0 + ((i * 31) % 97) as f64 / 97.0;
                [4.0 + r * t.cos(), 4.0 + 0.6 * r * t.sin()]
            })
            .collect();
        DataMatrix::from_rows(&rows).unwrap()
    }

    #[test]
    fn partitions_are_balanced_and_cover() {
        let r = partition_ranges(10, 3);
        assert_eq!(r, vec![(0, 4), (4, 7), (7, 10)]);
        let r = partition_ranges(5, 5);
        assert!(r.iter().all(|(a, b)| b - a == 1));
    }

    #[test]
    fn too_many_workers() {
        let data = blob(3);
        let params = KernelParams::new(1.0).unwrap();
        let err = train_distributed(&data, params, &SamplingConfig::new(3, 0.01), &DistributedConfig::new(4), &SolverConfig::default());
        assert!(matches!(err, Err(SvddError::Config(_))));
    }

    #[test]
    fn one_worker_is_plain_sampling() {
        let data = blob(800);
        let params = KernelParams::new(0.8).unwrap();
        let scfg = SamplingConfig::new(5, 0.001).with_seed(17);
        let solver = SolverConfig::default();
        let d = train_distributed(&data, params, &scfg, &DistributedConfig::new(1), &solver).unwrap();
        let s = train_sampling(&data, params, &scfg, &solver).unwrap();
        assert_eq!(d.model, s.model);
        assert_eq!(d.worker_traces, vec![s.trace]);
    }

    #[test]
    fn singleton_partitions_do_not_crash() {
        let data = blob(12);
        let params = KernelParams::new(1.0).unwrap();
        let scfg = SamplingConfig::new(3, 0.001).with_seed(1);
        let out = train_distributed(&data, params, &scfg, &DistributedConfig::new(12), &SolverConfig::default()).unwrap();
        assert_eq!(out.worker_traces.len(), 12);
        assert!(out.union_size <= 12);
        assert!(out.model.n_support_vectors() <= out.union_size);
    }

    #[test]
    fn union_ignores_report_order() {
        let a = DataMatrix::from_rows(&[[1.0, 2.0], [0.0, 5.0]]).unwrap();
        let b = DataMatrix::from_rows(&[[0.0, 5.0], [3.0, -1.0]]).unwrap();
        let c = DataMatrix::from_rows(&[[-2.0, 0.0]]).unwrap();
        let reference = union_master_sets(&[a.clone(), b.clone(), c.clone()]).unwrap();
        assert_eq!(reference.n_rows(), 4);
        for perm in [[1, 0, 2], [2, 1, 0], [0, 2, 1], [2, 0, 1], [1, 2, 0]] {
            let sets = [&a, &b, &c];
            let permuted: Vec<DataMatrix> = perm.iter().map(|&i| sets[i].clone()).collect();
            assert_eq!(union_master_sets(&permuted).unwrap(), reference);
        }
    }

    #[test]
    fn final_support_vectors_come_from_data() {
        let data = blob(1200);
        let params = KernelParams::new(0.8).unwrap();
        let scfg = SamplingConfig::new(5, 0.001).with_seed(2);
        let out = train_distributed(&data, params, &scfg, &DistributedConfig::new(3), &SolverConfig::default()).unwrap();
        let keys: std::collections::HashSet<Vec<u64>> = data.rows().map(row_key).collect();
        assert!(out.model.support_vectors().rows().all(|r| keys.contains(&row_key(r))));
        let again = train_distributed(&data, params, &scfg, &DistributedConfig::new(3), &SolverConfig::default()).unwrap();
        assert_eq!(out.model, again.model);
    }
}
