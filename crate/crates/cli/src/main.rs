use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use svdd::datagen::{
    generate_polygon, generate_shape, label_grid, sample_polygon_interior, ShapeKind, ShapeParams,
};
use svdd::experiments::{
    bench_cells, bench_sample_sizes, default_threads, simulate_polygons, simulation_cells, BenchConfig,
    SimulationConfig, BENCH_HEADER, SIMULATION_HEADER,
};
use svdd::io::{format_real, read_csv, read_model, write_csv, write_model, write_scores, write_table, write_trace};
use svdd::{
    f1_measure, train_distributed, train_full, train_sampling, DataMatrix, DistributedConfig, KernelParams,
    PenaltyBasis, SamplingConfig, SolverConfig, SvddModel, TrainTrace,
};

const DEFAULT_BANDWIDTHS: [f64; 4] = [1.0, 2.33, 3.66, 5.0];

#[derive(Parser)]
#[command(name = "svdd", version, about = "Support Vector Data Description experiments")]
struct Cli {
    /// Write NaN instead of wall-clock seconds so reruns are byte-identical.
    #[arg(long, global = true)]
    no_timing: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic dataset.
    Generate(GenerateArgs),
    /// Train a model and print `method,n_obs,sample_size,iterations,r_squared,n_sv,seconds`.
    Train(TrainArgs),
    /// Score every row of a dataset with a saved model.
    Score(ScoreArgs),
    /// Sweep the sampling trainer over a range of sample sizes.
    BenchSamplesize(BenchArgs),
    /// Compare full and sampling training on random polygons.
    SimulatePolygons(SimulateArgs),
    /// F1 of one or two saved models against a labeled dataset.
    Evaluate(EvaluateArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    Banana,
    Star,
    #[value(name = "two_donut", alias = "two-donut")]
    TwoDonut,
    Polygon,
}

#[derive(Args)]
struct GenerateArgs {
    #[arg(value_enum)]
    kind: Kind,
    /// Output CSV (shapes) or output directory (polygon).
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 10_000)]
    count: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1.0)]
    scale: f64,
    #[arg(long, default_value_t = 0.1)]
    noise: f64,
    #[arg(long, default_value_t = 25)]
    vertices: usize,
    #[arg(long, default_value_t = 3.0)]
    rmin: f64,
    #[arg(long, default_value_t = 5.0)]
    rmax: f64,
    /// Interior training points for `polygon`.
    #[arg(long, default_value_t = 600)]
    interior: usize,
    #[arg(long, default_value_t = 200)]
    resolution: usize,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Method {
    Full,
    Sampling,
    Distributed,
}

impl Method {
    fn name(self) -> &'static str {
        match self {
            Method::Full => "full",
            Method::Sampling => "sampling",
            Method::Distributed => "distributed",
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Basis {
    SolveSize,
    SampleSize,
}

#[derive(Args)]
struct InputArgs {
    /// The CSV has no header row.
    #[arg(long)]
    no_header: bool,
}

#[derive(Args)]
struct SamplingArgs {
    #[arg(long, default_value_t = 0.001)]
    f: f64,
    /// Defaults to the number of features plus one.
    #[arg(long)]
    sample_size: Option<usize>,
    /// Relative center tolerance.
    #[arg(long, default_value_t = 1e-3)]
    eps_center: f64,
    /// Relative R² tolerance.
    #[arg(long, default_value_t = 1e-3)]
    eps_r2: f64,
    /// Consecutive passing iterations required for convergence.
    #[arg(long, default_value_t = 5)]
    t: usize,
    #[arg(long, default_value_t = 1000)]
    max_iter: usize,
    /// Only test R² for convergence.
    #[arg(long)]
    no_center_check: bool,
    #[arg(long, value_enum, default_value_t = Basis::SolveSize)]
    penalty_basis: Basis,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

impl SamplingArgs {
    fn config(&self, n_features: usize) -> SamplingConfig {
        let mut c = SamplingConfig::for_dimension(n_features, self.f).with_seed(self.seed);
        if let Some(n) = self.sample_size {
            c.sample_size = n;
        }
        c.eps_center = self.eps_center;
        c.eps_r_squared = self.eps_r2;
        c.t_consecutive = self.t;
        c.max_iter = self.max_iter;
        c.check_center = !self.no_center_check;
        c.penalty_basis = match self.penalty_basis {
            Basis::SolveSize => PenaltyBasis::SolveSize,
            Basis::SampleSize => PenaltyBasis::SampleSize,
        };
        c
    }
}

#[derive(Args)]
struct TrainArgs {
    data: PathBuf,
    #[arg(long, value_enum, default_value_t = Method::Sampling)]
    method: Method,
    /// Gaussian bandwidth.
    #[arg(long)]
    s: f64,
    #[command(flatten)]
    sampling: SamplingArgs,
    #[arg(long, default_value_t = 2)]
    workers: usize,
    #[arg(long)]
    no_shuffle: bool,
    #[arg(long)]
    model_out: Option<PathBuf>,
    /// Per-iteration trace (sampling: the run; distributed: first worker).
    #[arg(long)]
    trace_out: Option<PathBuf>,
    #[command(flatten)]
    input: InputArgs,
}

#[derive(Args)]
struct ScoreArgs {
    model: PathBuf,
    data: PathBuf,
    #[arg(long)]
    out: PathBuf,
    #[command(flatten)]
    input: InputArgs,
}

#[derive(Args)]
struct BenchArgs {
    data: PathBuf,
    #[arg(long)]
    s: f64,
    #[arg(long, default_value_t = 3)]
    min_size: usize,
    #[arg(long, default_value_t = 20)]
    max_size: usize,
    #[command(flatten)]
    sampling: SamplingArgs,
    #[arg(long)]
    out: PathBuf,
    /// Worker threads; defaults to $SVDD_THREADS or all cores.
    #[arg(long)]
    threads: Option<usize>,
    #[command(flatten)]
    input: InputArgs,
}

#[derive(Args)]
struct SimulateArgs {
    #[arg(long, value_delimiter = ',', default_values_t = [5usize, 15, 25])]
    vertices: Vec<usize>,
    #[arg(long, default_value_t = 5)]
    reps: usize,
    #[arg(long, default_value_t = 600)]
    interior: usize,
    #[arg(long, default_value_t = 5)]
    sample_size: usize,
    #[arg(long, value_delimiter = ',', default_values_t = DEFAULT_BANDWIDTHS)]
    s: Vec<f64>,
    #[arg(long, default_value_t = 0.001)]
    f: f64,
    #[arg(long, default_value_t = 3.0)]
    rmin: f64,
    #[arg(long, default_value_t = 5.0)]
    rmax: f64,
    #[arg(long, default_value_t = 200)]
    resolution: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Args)]
struct EvaluateArgs {
    /// CSV whose last column is `label` (1 = inside).
    data: PathBuf,
    model: PathBuf,
    /// Reference model for an F1 ratio `F1(model) / F1(reference)`.
    #[arg(long)]
    reference: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let timing = !cli.no_timing;
    let outcome = match cli.command {
        Command::Generate(a) => generate(a),
        Command::Train(a) => train(a, timing),
        Command::Score(a) => score(a),
        Command::BenchSamplesize(a) => bench(a, timing),
        Command::SimulatePolygons(a) => simulate(a),
        Command::Evaluate(a) => evaluate(a),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn load(path: &Path, input: &InputArgs) -> Result<DataMatrix> {
    let d = read_csv(path, !input.no_header).with_context(|| format!("reading {}", path.display()))?;
    Ok(d.features)
}

fn generate(a: GenerateArgs) -> Result<()> {
    let kind = match a.kind {
        Kind::Banana => ShapeKind::Banana,
        Kind::Star => ShapeKind::Star,
        Kind::TwoDonut => ShapeKind::TwoDonut,
        Kind::Polygon => return generate_polygon_files(&a),
    };
    let params = ShapeParams {
        scale: a.scale,
        noise: a.noise,
    };
    let data = generate_shape(kind, a.count, &params, a.seed)?;
    write_csv(&a.out, &data, Some(&["x", "y"]), None)?;
    println!("{}", data.n_rows());
    Ok(())
}

fn generate_polygon_files(a: &GenerateArgs) -> Result<()> {
    let poly = generate_polygon(a.vertices, a.rmin, a.rmax, a.seed)?;
    let interior = sample_polygon_interior(&poly, a.interior, a.seed.wrapping_add(1))?;
    let grid = label_grid(&poly, a.resolution)?;
    std::fs::create_dir_all(&a.out).with_context(|| format!("creating {}", a.out.display()))?;
    write_csv(a.out.join("vertices.csv"), &poly.vertices_matrix(), Some(&["x", "y"]), None)?;
    write_csv(a.out.join("interior.csv"), &interior, Some(&["x", "y"]), None)?;
    write_csv(a.out.join("grid.csv"), &grid.spec.points(), Some(&["x", "y"]), Some(&grid.labels))?;
    println!("{}", interior.n_rows());
    Ok(())
}

fn seconds(d: std::time::Duration, timing: bool) -> f64 {
    if timing {
        d.as_secs_f64()
    } else {
        f64::NAN
    }
}

fn train(a: TrainArgs, timing: bool) -> Result<()> {
    let data = load(&a.data, &a.input)?;
    let params = KernelParams::new(a.s)?;
    let solver = SolverConfig::default();
    let scfg = a.sampling.config(data.n_cols());
    let (model, sample_size, iterations, elapsed, trace): (SvddModel, usize, usize, _, Option<TrainTrace>) = match a.method {
        Method::Full => {
            let out = train_full(&data, params, a.sampling.f, &solver)?;
            (out.model, data.n_rows(), 1, out.elapsed, None)
        }
        Method::Sampling => {
            let out = train_sampling(&data, params, &scfg, &solver)?;
            let it = out.trace.iterations();
            (out.model, scfg.sample_size, it, out.elapsed, Some(out.trace))
        }
        Method::Distributed => {
            let dcfg = DistributedConfig {
                workers: a.workers,
                shuffle: !a.no_shuffle,
            };
            let out = train_distributed(&data, params, &scfg, &dcfg, &solver)?;
            let it = out.worker_traces.iter().map(TrainTrace::iterations).max().unwrap_or(0);
            (out.model, scfg.sample_size, it, out.elapsed, out.worker_traces.into_iter().next())
        }
    };
    if let Some(path) = &a.model_out {
        write_model(&model, path)?;
    }
    if let Some(path) = &a.trace_out {
        match &trace {
            Some(t) => write_trace(path, t)?,
            None => bail!("--trace-out needs --method sampling or distributed"),
        }
    }
    println!(
        "{},{},{},{},{},{},{}",
        a.method.name(),
        data.n_rows(),
        sample_size,
        iterations,
        format_real(model.r_squared()),
        model.n_support_vectors(),
        format_real(seconds(elapsed, timing)),
    );
    Ok(())
}

fn score(a: ScoreArgs) -> Result<()> {
    let model = read_model(&a.model).with_context(|| format!("loading model {}", a.model.display()))?;
    let data = load(&a.data, &a.input)?;
    let scores = model.score_batch(&data)?;
    write_scores(&a.out, &scores)?;
    println!("{}", scores.len());
    Ok(())
}

fn bench(a: BenchArgs, timing: bool) -> Result<()> {
    if a.min_size == 0 || a.min_size > a.max_size {
        bail!("sample size range {}..={} is empty", a.min_size, a.max_size);
    }
    let data = load(&a.data, &a.input)?;
    let cfg = BenchConfig {
        params: KernelParams::new(a.s)?,
        sampling: a.sampling.config(data.n_cols()),
        sample_sizes: (a.min_size..=a.max_size).collect(),
        base_seed: a.sampling.seed,
        threads: a.threads.or_else(default_threads),
        timing,
    };
    let rows = bench_sample_sizes(&data, &cfg, &SolverConfig::default())?;
    for r in rows.iter().filter(|r| r.error.is_some()) {
        eprintln!("sample size {}: {}", r.sample_size, r.error.as_deref().unwrap_or(""));
    }
    let file = std::fs::File::create(&a.out).with_context(|| format!("creating {}", a.out.display()))?;
    write_table(std::io::BufWriter::new(file), &BENCH_HEADER, rows.iter().map(bench_cells))?;
    println!("{}", rows.len());
    Ok(())
}

fn simulate(a: SimulateArgs) -> Result<()> {
    let cfg = SimulationConfig {
        vertex_counts: a.vertices,
        reps: a.reps,
        interior_points: a.interior,
        sample_size: a.sample_size,
        bandwidths: a.s,
        outlier_fraction: a.f,
        r_min: a.rmin,
        r_max: a.rmax,
        grid_resolution: a.resolution,
        base_seed: a.seed,
        threads: a.threads.or_else(default_threads),
    };
    let rows = simulate_polygons(&cfg, &SolverConfig::default())?;
    let file = std::fs::File::create(&a.out).with_context(|| format!("creating {}", a.out.display()))?;
    write_table(std::io::BufWriter::new(file), &SIMULATION_HEADER, rows.iter().map(simulation_cells))?;
    println!("{}", rows.len());
    Ok(())
}

fn evaluate(a: EvaluateArgs) -> Result<()> {
    let d = read_csv(&a.data, true).with_context(|| format!("reading {}", a.data.display()))?;
    let Some(labels) = d.labels else {
        bail!("{} has no trailing label column", a.data.display());
    };
    let model = read_model(&a.model)?;
    let report = f1_measure(&model.inside_mask(&d.features)?, &labels)?;
    println!("tp,fp,fn,tn,precision,recall,f1,degenerate,ratio");
    let ratio = match &a.reference {
        Some(path) => {
            let reference = read_model(path)?;
            let full = f1_measure(&reference.inside_mask(&d.features)?, &labels)?;
            if full.f1 > 0.0 {
                report.f1 / full.f1
            } else {
                f64::NAN
            }
        }
        None => f64::NAN,
    };
    println!(
        "{},{},{},{},{},{},{},{},{}",
        report.true_positives,
        report.false_positives,
        report.false_negatives,
        report.true_negatives,
        format_real(report.precision),
        format_real(report.recall),
        format_real(report.f1),
        u8::from(report.degenerate),
        format_real(ratio),
    );
    Ok(())
}
