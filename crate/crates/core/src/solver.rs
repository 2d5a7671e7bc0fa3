//! Sequential minimal optimization for the kernelized SVDD dual
//!
//! ```text
//! max  Σ αᵢ K(xᵢ,xᵢ) − Σᵢⱼ αᵢ αⱼ K(xᵢ,xⱼ)
//! s.t. Σ αᵢ = 1,  0 ≤ αᵢ ≤ C
//! ```
//!
//! With the Gaussian kernel the linear term is the constant `Σαᵢ = 1`, so the
//! solver minimizes `αᵀKα` and keeps the gradient `G = 2Kα`. A pair update
//! moves mass `δ` from `j` to `i`; along that direction the objective is a
//! one-dimensional quadratic whose minimizer is `(Gⱼ − Gᵢ) / (2η)` with
//! `η = Kᵢᵢ + Kⱼⱼ − 2Kᵢⱼ`, clipped to the box.

use crate::data::DataMatrix;
use crate::error::{Result, SvddError};
use crate::kernel::{kernel_row, KernelCache, KernelParams};

/// Curvature floor for (near-)duplicate pairs.
const TAU: f64 = 1e-12;

/// The dual problem for one training set.
#[derive(Clone, Copy, Debug)]
pub struct DualProblem<'a> {
    data: &'a DataMatrix,
    params: KernelParams,
    penalty: f64,
}

impl<'a> DualProblem<'a> {
    /// `C = 1 / (n·f)`.
    pub fn from_outlier_fraction(
        data: &'a DataMatrix,
        params: KernelParams,
        outlier_fraction: f64,
    ) -> Result<Self> {
        if !(outlier_fraction > 0.0 && outlier_fraction <= 1.0) {
            return Err(SvddError::config(format!(
                "outlier fraction must lie in (0, 1], got {outlier_fraction}"
            )));
        }
        let n = data.n_rows() as f64;
        Self::with_penalty(data, params, 1.0 / (n * outlier_fraction))
    }

    pub fn with_penalty(data: &'a DataMatrix, params: KernelParams, penalty: f64) -> Result<Self> {
        let n = data.n_rows();
        if n == 0 {
            return Err(SvddError::input("cannot train on an empty data set"));
        }
        if !(penalty.is_finite() && penalty > 0.0) {
            return Err(SvddError::config(format!("penalty C must be positive, got {penalty}")));
        }
        // n·C ≥ 1 up to rounding in 1/(n·f)
        if (n as f64) * penalty < 1.0 - 1e-12 {
            return Err(SvddError::config(format!(
                "infeasible problem: n·C = {} < 1",
                n as f64 * penalty
            )));
        }
        Ok(DualProblem {
            data,
            params,
            penalty,
        })
    }

    pub fn data(&self) -> &'a DataMatrix {
        self.data
    }

    pub fn params(&self) -> &KernelParams {
        &self.params
    }

    pub fn penalty(&self) -> f64 {
        self.penalty
    }

    pub fn n(&self) -> usize {
        self.data.n_rows()
    }

    /// The outlier fraction `f = 1/(n·C)` implied by the penalty.
    pub fn outlier_fraction(&self) -> f64 {
        1.0 / (self.n() as f64 * self.penalty)
    }
}

/// Starting point for the SMO iterations.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum AlphaInit {
    /// Fill coordinates in index order up to `C` until the mass is placed;
    /// only `⌈1/C⌉` rows enter the initial gradient.
    #[default]
    Sparse,
    /// `αᵢ = 1/n` (see [`initialize_alpha`]); costs a full Gram product.
    Uniform,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SolverConfig {
    pub kkt_tolerance: f64,
    /// `None` means `max(100·n, 10000)`.
    pub max_iterations: Option<usize>,
    pub init: AlphaInit,
    /// Record the dual objective after every pair update.
    pub record_objective: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            kkt_tolerance: 1e-6,
            max_iterations: None,
            init: AlphaInit::Sparse,
            record_objective: false,
        }
    }
}

impl SolverConfig {
    pub fn iteration_cap(&self, n: usize) -> usize {
        self.max_iterations.unwrap_or_else(|| (100 * n).max(10_000))
    }

    fn validate(&self) -> Result<()> {
        if !(self.kkt_tolerance > 0.0) {
            return Err(SvddError::config("kkt_tolerance must be positive"));
        }
        if self.max_iterations == Some(0) {
            return Err(SvddError::config("max_iterations must be positive"));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SolveResult {
    pub alpha: Vec<f64>,
    /// Dual objective `Σαᵢ − αᵀKα`.
    pub objective: f64,
    pub iterations: usize,
    /// Gap between the most violating pair at termination.
    pub max_kkt_violation: f64,
    /// False when the iteration cap stopped the solver first.
    pub converged: bool,
    /// Objective after each update when [`SolverConfig::record_objective`]
    /// is set; the first entry is the starting point.
    pub objective_trace: Vec<f64>,
}

/// Uniform feasible start `αᵢ = 1/n`, clipped to `[0, C]` and renormalized.
pub fn initialize_alpha(problem: &DualProblem) -> Result<Vec<f64>> {
    let n = problem.n();
    let c = problem.penalty();
    if (n as f64) * c < 1.0 - 1e-12 {
        return Err(SvddError::config("infeasible problem: n·C < 1"));
    }
    let a = (1.0 / n as f64).min(c);
    let mut alpha = vec![a; n];
    let sum: f64 = alpha.iter().sum();
    if sum != 1.0 {
        for x in &mut alpha {
            *x = (*x / sum).min(c);
        }
    }
    Ok(alpha)
}

fn sparse_start(n: usize, c: f64) -> Vec<f64> {
    let mut alpha = vec![0.0; n];
    let mut remaining = 1.0f64;
    for a in alpha.iter_mut() {
        if remaining <= 0.0 {
            break;
        }
        let take = remaining.min(c);
        *a = take;
        remaining -= take;
    }
    if remaining > 0.0 {
        // only reachable when n·C rounds just below one
        alpha[n - 1] += remaining;
    }
    alpha
}

/// Most violating pair: `i = argmin{Gᵢ : αᵢ < C}`, `j = argmax{Gⱼ : αⱼ > 0}`.
/// Ties go to the lowest index.
fn select_pair(alpha: &[f64], grad: &[f64], c: f64) -> (Option<usize>, Option<usize>, f64) {
    let mut up: Option<usize> = None;
    let mut low: Option<usize> = None;
    let mut g_up = f64::INFINITY;
    let mut g_low = f64::NEG_INFINITY;
    for (t, (&a, &g)) in alpha.iter().zip(grad).enumerate() {
        if a < c && g < g_up {
            g_up = g;
            up = Some(t);
        }
        if a > 0.0 && g > g_low {
            g_low = g;
            low = Some(t);
        }
    }
    let violation = match (up, low) {
        (Some(_), Some(_)) => (g_low - g_up).max(0.0),
        _ => 0.0,
    };
    (up, low, violation)
}

fn objective_value(alpha: &[f64], grad: &[f64]) -> f64 {
    let linear: f64 = alpha.iter().sum();
    let quad: f64 = alpha.iter().zip(grad).map(|(a, g)| a * g).sum::<f64>() * 0.5;
    linear - quad
}

/// Solve the dual to within `config.kkt_tolerance`.
///
/// `cache` is scratch space; it is reset for this problem.
pub fn solve_dual(
    problem: &DualProblem,
    config: &SolverConfig,
    cache: &mut KernelCache,
) -> Result<SolveResult> {
    config.validate()?;
    let data = problem.data();
    let params = *problem.params();
    let n = problem.n();
    let c = problem.penalty();
    cache.reset(n);

    let mut alpha = match config.init {
        AlphaInit::Sparse => sparse_start(n, c),
        AlphaInit::Uniform => initialize_alpha(problem)?,
    };

    let mut grad = vec![0.0; n];
    for i in 0..n {
        if alpha[i] > 0.0 {
            let w = 2.0 * alpha[i];
            let row = kernel_row(i, data, &params, cache)?;
            for (g, k) in grad.iter_mut().zip(row) {
                *g += w * k;
            }
        }
    }
    if grad.iter().any(|g| !g.is_finite()) {
        return Err(SvddError::Numeric("non-finite kernel values".into()));
    }

    let cap = config.iteration_cap(n);
    let mut objective_trace = Vec::new();
    if config.record_objective {
        objective_trace.push(objective_value(&alpha, &grad));
    }
    let mut iterations = 0usize;
    let (violation, converged) = loop {
        let (up, low, violation) = select_pair(&alpha, &grad, c);
        if violation <= config.kkt_tolerance {
            break (violation, true);
        }
        if iterations >= cap {
            break (violation, false);
        }
        let (i, j) = (up.expect("violation implies pair"), low.expect("violation implies pair"));

        let row_i = kernel_row(i, data, &params, cache)?;
        // Gaussian diagonal is exactly one
        let eta = (row_i[i] + 1.0 - 2.0 * row_i[j]).max(TAU);
        let room_i = c - alpha[i];
        let room_j = alpha[j];
        let delta = ((grad[j] - grad[i]) / (2.0 * eta)).min(room_i).min(room_j);
        if delta == room_i {
            alpha[i] = c;
        } else {
            alpha[i] += delta;
        }
        if delta == room_j {
            alpha[j] = 0.0;
        } else {
            alpha[j] -= delta;
        }

        let w = 2.0 * delta;
        for (g, k) in grad.iter_mut().zip(row_i) {
            *g += w * k;
        }
        let row_j = kernel_row(j, data, &params, cache)?;
        for (g, k) in grad.iter_mut().zip(row_j) {
            *g -= w * k;
        }
        iterations += 1;
        if config.record_objective {
            objective_trace.push(objective_value(&alpha, &grad));
        }
    };

    renormalize(&mut alpha, c);
    Ok(SolveResult {
        objective: objective_value(&alpha, &grad),
        alpha,
        iterations,
        max_kkt_violation: violation,
        converged,
        objective_trace,
    })
}

/// Push accumulated rounding drift in `Σα` onto the coordinate with the
/// most room for it.
fn renormalize(alpha: &mut [f64], c: f64) {
    let drift = 1.0 - alpha.iter().sum::<f64>();
    if drift == 0.0 {
        return;
    }
    let target = if drift > 0.0 {
        alpha
            .iter()
            .enumerate()
            .filter(|(_, &a)| a > 0.0)
            .min_by(|a, b| a.1.total_cmp(b.1))
            .map(|(t, _)| t)
    } else {
        alpha
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .map(|(t, _)| t)
    };
    if let Some(t) = target {
        alpha[t] = (alpha[t] + drift).clamp(0.0, c.max(alpha[t]));
    }
}

/// Report from [`audit_solution`].
#[derive(Clone, Debug, Default, PartialEq)]
pub struct KktAudit {
    pub alpha_sum_error: f64,
    pub box_violations: usize,
    /// Points with `α > 0` lying strictly inside the sphere beyond tolerance.
    pub inside_violations: usize,
    /// Free support vectors off the boundary beyond tolerance.
    pub boundary_violations: usize,
    /// Points below the bound `C` lying outside beyond tolerance.
    pub outside_violations: usize,
}

impl KktAudit {
    pub fn total(&self) -> usize {
        self.box_violations + self.inside_violations + self.boundary_violations + self.outside_violations
            + usize::from(self.alpha_sum_error > 1e-9)
    }
}

/// Check feasibility and the inside / boundary / outside position
/// conditions of a solution, with distances taken in kernel space.
///
/// `tolerance` is in squared-distance units; the solver guarantees the
/// position conditions to within its final `max_kkt_violation`.
pub fn audit_solution(problem: &DualProblem, result: &SolveResult, tolerance: f64) -> KktAudit {
    let data = problem.data();
    let params = problem.params();
    let c = problem.penalty();
    let alpha = &result.alpha;
    let n = problem.n();

    let mut audit = KktAudit {
        alpha_sum_error: (alpha.iter().sum::<f64>() - 1.0).abs(),
        ..KktAudit::default()
    };
    audit.box_violations = alpha.iter().filter(|&&a| !(a >= 0.0 && a <= c + 1e-12)).count();

    let support: Vec<usize> = (0..n).filter(|&i| alpha[i] > 0.0).collect();
    let mut self_term = 0.0;
    for &i in &support {
        for &j in &support {
            self_term += alpha[i] * alpha[j] * crate::kernel::kernel_unchecked(data.row(i), data.row(j), params);
        }
    }
    let dist2: Vec<f64> = (0..n)
        .map(|k| {
            let cross: f64 = support
                .iter()
                .map(|&i| alpha[i] * crate::kernel::kernel_unchecked(data.row(i), data.row(k), params))
                .sum();
            1.0 - 2.0 * cross + self_term
        })
        .collect();

    let at_bound = |a: f64| a >= c * (1.0 - 1e-8);
    // Solver sets: below the bound (can grow) and positive (can shrink).
    let below: Vec<usize> = (0..n).filter(|&k| alpha[k] < c).collect();
    let positive = &support;
    let max_below = below.iter().map(|&k| dist2[k]).fold(f64::NEG_INFINITY, f64::max);
    let min_positive = positive.iter().map(|&k| dist2[k]).fold(f64::INFINITY, f64::min);
    // every growable point lies no farther out than every shrinkable one
    // (up to tolerance); this encodes all three position conditions.
    let free: Vec<usize> = support.iter().copied().filter(|&k| !at_bound(alpha[k])).collect();
    if !free.is_empty() {
        let r2 = free.iter().map(|&k| dist2[k]).sum::<f64>() / free.len() as f64;
        audit.boundary_violations = free.iter().filter(|&&k| (dist2[k] - r2).abs() > tolerance).count();
        audit.inside_violations = positive.iter().filter(|&&k| dist2[k] < r2 - tolerance).count();
        audit.outside_violations = below.iter().filter(|&&k| dist2[k] > r2 + tolerance).count();
    } else if max_below > min_positive + tolerance {
        audit.outside_violations = below.iter().filter(|&&k| dist2[k] > min_positive + tolerance).count();
    }
    audit
}
