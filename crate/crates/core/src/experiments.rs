//! Benchmark sweeps: sample-size timing runs and the random-polygon
//! comparison of the sampling method against full training.
//!
//! Cells run on a rayon pool; results come back in cell order whatever the
//! completion order. Cell `i` is seeded with `base_seed + i`.

use rayon::prelude::*;

use crate::data::DataMatrix;
use crate::datagen::{generate_polygon, label_grid, sample_polygon_interior};
use crate::error::{Result, SvddError};
use crate::eval::f1_measure;
use crate::io::format_real;
use crate::kernel::KernelParams;
use crate::sampling::{train_sampling, SamplingConfig, TrainStatus};
use crate::solver::SolverConfig;
use crate::trainer::train_full;

pub const THREADS_ENV: &str = "SVDD_THREADS";

/// Worker count from `SVDD_THREADS`, or rayon's default when unset or invalid.
pub fn default_threads() -> Option<usize> {
    std::env::var(THREADS_ENV)
        .ok()
        .and_then(|v| v.trim().parse().ok())
        .filter(|&n: &usize| n > 0)
}

fn run_pooled<T: Send>(threads: Option<usize>, job: impl FnOnce() -> T + Send) -> Result<T> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = threads {
        builder = builder.num_threads(n);
    }
    let pool = builder
        .build()
        .map_err(|e| SvddError::config(format!("thread pool: {e}")))?;
    Ok(pool.install(job))
}

/// SplitMix64 finalizer, used to derive independent sub-seeds.
pub fn mix_seed(seed: u64, stream: u64) -> u64 {
    let mut z = seed
        .wrapping_add(stream.wrapping_mul(0x9e37_79b9_7f4a_7c15))
        .wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

fn seconds(d: std::time::Duration, timing: bool) -> f64 {
    if timing {
        d.as_secs_f64()
    } else {
        f64::NAN
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BenchRow {
    pub sample_size: usize,
    /// 1 converged, 0 stopped at `max_iter`, -1 failed.
    pub status: i32,
    pub iterations: usize,
    pub r_squared: f64,
    pub n_sv: usize,
    pub seconds: f64,
    pub is_min_time: bool,
    pub error: Option<String>,
}

#[derive(Clone, Debug)]
pub struct BenchConfig {
    pub params: KernelParams,
    /// Template for every cell; `sample_size` and `rng_seed` are overridden.
    pub sampling: SamplingConfig,
    pub sample_sizes: Vec<usize>,
    pub base_seed: u64,
    pub threads: Option<usize>,
    /// When false, `seconds` is NaN so reruns are byte-identical.
    pub timing: bool,
}

pub fn bench_sample_sizes(data: &DataMatrix, cfg: &BenchConfig, solver: &SolverConfig) -> Result<Vec<BenchRow>> {
    let cells: Vec<(usize, usize)> = cfg.sample_sizes.iter().copied().enumerate().collect();
    let mut rows: Vec<BenchRow> = run_pooled(cfg.threads, || {
        cells
            .par_iter()
            .map(|&(i, n)| {
                let mut scfg = cfg.sampling.clone().with_seed(cfg.base_seed.wrapping_add(i as u64));
                scfg.sample_size = n;
                match train_sampling(data, cfg.params, &scfg, solver) {
                    Ok(out) => BenchRow {
                        sample_size: n,
                        status: match out.trace.status {
                            TrainStatus::Converged => 1,
                            TrainStatus::MaxIter => 0,
                        },
                        iterations: out.trace.iterations(),
                        r_squared: out.model.r_squared(),
                        n_sv: out.model.n_support_vectors(),
                        seconds: seconds(out.elapsed, cfg.timing),
                        is_min_time: false,
                        error: None,
                    },
                    Err(e) => BenchRow {
                        sample_size: n,
                        status: -1,
                        iterations: 0,
                        r_squared: f64::NAN,
                        n_sv: 0,
                        seconds: f64::NAN,
                        is_min_time: false,
                        error: Some(e.to_string()),
                    },
                }
            })
            .collect()
    })?;
    let fastest = rows
        .iter()
        .enumerate()
        .filter(|(_, r)| r.status >= 0 && r.seconds.is_finite())
        .min_by(|a, b| a.1.seconds.total_cmp(&b.1.seconds))
        .map(|(i, _)| i);
    if let Some(i) = fastest {
        rows[i].is_min_time = true;
    }
    Ok(rows)
}

pub const BENCH_HEADER: [&str; 7] = ["sample_size", "iterations", "status", "r_squared", "n_sv", "seconds", "is_min_time"];

pub fn bench_cells(row: &BenchRow) -> Vec<String> {
    vec![
        row.sample_size.to_string(),
        row.iterations.to_string(),
        row.status.to_string(),
        format_real(row.r_squared),
        row.n_sv.to_string(),
        format_real(row.seconds),
        u8::from(row.is_min_time).to_string(),
    ]
}

#[derive(Clone, Debug)]
pub struct SimulationConfig {
    pub vertex_counts: Vec<usize>,
    pub reps: usize,
    pub interior_points: usize,
    pub sample_size: usize,
    pub bandwidths: Vec<f64>,
    pub outlier_fraction: f64,
    pub r_min: f64,
    pub r_max: f64,
    pub grid_resolution: usize,
    pub base_seed: u64,
    pub threads: Option<usize>,
}

impl Default for SimulationConfig {
    fn default() -> Self {
        SimulationConfig {
            vertex_counts: vec![5, 15, 25],
            reps: 5,
            interior_points: 600,
            sample_size: 5,
            bandwidths: vec![1.0, 2.33, 3.66, 5.0],
            outlier_fraction: 0.001,
            r_min: 3.0,
            r_max: 5.0,
            grid_resolution: 200,
            base_seed: 0,
            threads: None,
        }
    }
}

/// One long-form result row. Summary rows carry `s = NaN` and the best F1
/// of each method across all bandwidths.
#[derive(Clone, Debug, PartialEq)]
pub struct SimulationRow {
    pub k: usize,
    pub rep: usize,
    pub s: f64,
    pub f1_full: f64,
    pub f1_sampling: f64,
    /// NaN when the full-method F1 is zero.
    pub ratio: f64,
    pub degenerate: bool,
    pub summary: bool,
}

fn ratio_of(sampling: f64, full: f64) -> f64 {
    if full > 0.0 {
        sampling / full
    } else {
        f64::NAN
    }
}

fn simulate_cell(cfg: &SimulationConfig, solver: &SolverConfig, k: usize, rep: usize, seed: u64) -> Result<Vec<SimulationRow>> {
    let poly = generate_polygon(k, cfg.r_min, cfg.r_max, mix_seed(seed, 0))?;
    let train = sample_polygon_interior(&poly, cfg.interior_points, mix_seed(seed, 1))?;
    let grid = label_grid(&poly, cfg.grid_resolution)?;
    let points = grid.spec.points();

    let mut rows = Vec::with_capacity(cfg.bandwidths.len() + 1);
    let (mut best_full, mut best_sampling) = (0.0f64, 0.0f64);
    let mut any_degenerate = false;
    for (j, &s) in cfg.bandwidths.iter().enumerate() {
        let params = KernelParams::new(s)?;
        let full = train_full(&train, params, cfg.outlier_fraction, solver)?;
        let scfg = SamplingConfig::new(cfg.sample_size, cfg.outlier_fraction).with_seed(mix_seed(seed, 2 + j as u64));
        let sampled = train_sampling(&train, params, &scfg, solver)?;
        let ef = f1_measure(&full.model.inside_mask(&points)?, &grid.labels)?;
        let es = f1_measure(&sampled.model.inside_mask(&points)?, &grid.labels)?;
        let degenerate = ef.degenerate || es.degenerate;
        any_degenerate |= degenerate;
        best_full = best_full.max(ef.f1);
        best_sampling = best_sampling.max(es.f1);
        rows.push(SimulationRow {
            k,
            rep,
            s,
            f1_full: ef.f1,
            f1_sampling: es.f1,
            ratio: ratio_of(es.f1, ef.f1),
            degenerate,
            summary: false,
        });
    }
    rows.push(SimulationRow {
        k,
        rep,
        s: f64::NAN,
        f1_full: best_full,
        f1_sampling: best_sampling,
        ratio: ratio_of(best_sampling, best_full),
        degenerate: any_degenerate,
        summary: true,
    });
    Ok(rows)
}

/// Per-polygon results ordered by vertex count, then repetition, then
/// bandwidth, with each polygon's summary row last. A failing cell aborts
/// the sweep.
pub fn simulate_polygons(cfg: &SimulationConfig, solver: &SolverConfig) -> Result<Vec<SimulationRow>> {
    if cfg.vertex_counts.is_empty() || cfg.reps == 0 || cfg.bandwidths.is_empty() {
        return Err(SvddError::config("simulation needs vertex counts, repetitions and bandwidths"));
    }
    let cells: Vec<(usize, usize)> = cfg
        .vertex_counts
        .iter()
        .flat_map(|&k| (0..cfg.reps).map(move |r| (k, r)))
        .collect();
    let results: Vec<Result<Vec<SimulationRow>>> = run_pooled(cfg.threads, || {
        cells
            .par_iter()
            .enumerate()
            .map(|(i, &(k, rep))| simulate_cell(cfg, solver, k, rep, cfg.base_seed.wrapping_add(i as u64)))
            .collect()
    })?;
    let mut rows = Vec::new();
    for r in results {
        rows.extend(r?);
    }
    Ok(rows)
}

pub const SIMULATION_HEADER: [&str; 8] = ["k", "rep", "s", "f1_full", "f1_sampling", "ratio", "degenerate", "summary"];

pub fn simulation_cells(row: &SimulationRow) -> Vec<String> {
    vec![
        row.k.to_string(),
        row.rep.to_string(),
        format_real(row.s),
        format_real(row.f1_full),
        format_real(row.f1_sampling),
        format_real(row.ratio),
        u8::from(row.degenerate).to_string(),
        u8::from(row.summary).to_string(),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::datagen::{generate_shape, ShapeKind, ShapeParams};

    #[test]
    fn bench_marks_one_fastest_row() {
        let data = generate_shape(ShapeKind::Star, 2000, &ShapeParams::default(), 4).unwrap();
        let cfg = BenchConfig {
            params: KernelParams::new(1.5).unwrap(),
            sampling: SamplingConfig::new(3, 0.001),
            sample_sizes: vec![3, 5, 8],
            base_seed: 10,
            threads: Some(1),
            timing: true,
        };
        let rows = bench_sample_sizes(&data, &cfg, &SolverConfig::default()).unwrap();
        assert_eq!(rows.iter().map(|r| r.sample_size).collect::<Vec<_>>(), vec![3, 5, 8]);
        assert_eq!(rows.iter().filter(|r| r.is_min_time).count(), 1);
        assert!(rows.iter().all(|r| r.status == 1));
    }

    #[test]
    fn bench_records_failures_and_continues() {
        let data = generate_shape(ShapeKind::Star, 200, &ShapeParams::default(), 4).unwrap();
        let cfg = BenchConfig {
            params: KernelParams::new(1.5).unwrap(),
            sampling: SamplingConfig::new(3, 0.001),
            sample_sizes: vec![0, 4],
            base_seed: 0,
            threads: Some(1),
            timing: false,
        };
        let rows = bench_sample_sizes(&data, &cfg, &SolverConfig::default()).unwrap();
        assert_eq!(rows[0].status, -1);
        assert!(rows[0].error.is_some());
        assert_eq!(rows[1].status, 1);
        assert!(rows[1].seconds.is_nan());
        assert!(rows.iter().all(|r| !r.is_min_time));
    }

    #[test]
    fn bench_is_thread_count_invariant() {
        let data = generate_shape(ShapeKind::TwoDonut, 3000, &ShapeParams::default(), 8).unwrap();
        let mut cfg = BenchConfig {
            params: KernelParams::new(1.0).unwrap(),
            sampling: SamplingConfig::new(3, 0.001),
            sample_sizes: vec![3, 4, 6, 9],
            base_seed: 5,
            threads: Some(1),
            timing: false,
        };
        let solver = SolverConfig::default();
        let a = bench_sample_sizes(&data, &cfg, &solver).unwrap();
        cfg.threads = Some(3);
        let b = bench_sample_sizes(&data, &cfg, &solver).unwrap();
        let bits = |rows: &[BenchRow]| rows.iter().map(|r| (r.iterations, r.r_squared.to_bits(), r.n_sv)).collect::<Vec<_>>();
        assert_eq!(bits(&a), bits(&b));
    }

    #[test]
    fn small_simulation_shape() {
        let cfg = SimulationConfig {
            vertex_counts: vec![5, 9],
            reps: 2,
            interior_points: 150,
            bandwidths: vec![1.5, 3.0],
            grid_resolution: 40,
            base_seed: 3,
            threads: Some(2),
            ..SimulationConfig::default()
        };
        let solver = SolverConfig::default();
        let rows = simulate_polygons(&cfg, &solver).unwrap();
        assert_eq!(rows.len(), 2 * 2 * 3);
        let summaries: Vec<_> = rows.iter().filter(|r| r.summary).collect();
        assert_eq!(summaries.len(), 4);
        for s in &summaries {
            assert!(s.s.is_nan());
            assert!(s.f1_full > 0.0 && s.f1_full <= 1.0);
        }
        assert_eq!(rows[0].k, 5);
        assert_eq!(rows.last().unwrap().k, 9);

        let again = simulate_polygons(&SimulationConfig { threads: Some(1), ..cfg }, &solver).unwrap();
        let cells = |r: &[SimulationRow]| r.iter().map(simulation_cells).collect::<Vec<_>>();
        assert_eq!(cells(&rows), cells(&again));
    }

    #[test]
    fn sub_seeds_differ() {
        let s: std::collections::HashSet<u64> = (0..100).map(|i| mix_seed(42, i)).collect();
        assert_eq!(s.len(), 100);
        assert_ne!(mix_seed(1, 0), mix_seed(2, 0));
    }
}
