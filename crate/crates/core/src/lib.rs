//! Support Vector Data Description (SVDD) with a Gaussian kernel.
//!
//! Three trainers share one SMO dual solver:
//!
//! * [`train_full`] solves the dual over every observation.
//! * [`train_sampling`] repeatedly solves small random samples and merges
//!   their support vectors until the threshold and center stabilize.
//! * [`train_distributed`] runs the sampling trainer on row partitions and
//!   solves the union of their support vectors once.
//!
//! ```
//! use svdd::{train_full, DataMatrix, KernelParams, SolverConfig};
//!
//! let data = DataMatrix::from_rows(&[[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]]).unwrap();
//! let fit = train_full(&data, KernelParams::new(1.0).unwrap(), 0.5, &SolverConfig::default()).unwrap();
//! assert!(fit.model.score(&[0.3, 0.3]).unwrap().is_inside());
//! assert!(fit.model.score(&[5.0, 5.0]).unwrap().is_outlier);
//! ```

pub mod data;
pub mod datagen;
pub mod distributed;
pub mod error;
pub mod eval;
pub mod experiments;
pub mod io;
pub mod kernel;
pub mod model;
pub mod sampling;
pub mod solver;
pub mod trainer;

pub use data::DataMatrix;
pub use distributed::{train_distributed, train_distributed_observed, DistributedConfig, DistributedTraining};
pub use error::{Result, SvddError};
pub use eval::{f1_measure, f1_ratio, grid_agreement, EvalReport};
pub use kernel::{gaussian_kernel, KernelCache, KernelParams};
pub use model::{build_model, ModelOptions, ScoreOutcome, SvddModel};
pub use sampling::{
    check_convergence, train_sampling, train_sampling_observed, IterationRecord, PenaltyBasis, SamplingConfig,
    SamplingTraining, TrainStatus, TrainTrace,
};
pub use solver::{audit_solution, solve_dual, AlphaInit, DualProblem, KktAudit, SolveResult, SolverConfig};
pub use trainer::{train_full, train_full_observed, FullTraining, SolveObserver};
