//! Reference solutions for the kernelized SVDD dual on tiny instances.
//!
//! Everything here is deliberately naive and shares no code with the `svdd`
//! crate: the Gram matrix is built directly, the optimum is located by an
//! exhaustive grid over the capped simplex and then polished with an
//! accelerated projected-gradient method.
//!
//! The dual is handled in its minimization form `min αᵀKα` subject to
//! `Σα = 1, 0 ≤ α ≤ C`; the SVDD objective is `1 − αᵀKα` for the Gaussian
//! kernel.

use nalgebra::{DMatrix, SymmetricEigen};

#[derive(Clone, Debug)]
pub struct OracleSolution {
    pub alpha: Vec<f64>,
    /// Dual objective `Σαᵢ − αᵀKα`.
    pub objective: f64,
}

/// Gaussian Gram matrix `exp(−‖xᵢ − xⱼ‖² / (2s²))`.
pub fn gaussian_gram(points: &[Vec<f64>], s: f64) -> Vec<Vec<f64>> {
    let n = points.len();
    let mut k = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..n {
            let d2: f64 = points[i]
                .iter()
                .zip(&points[j])
                .map(|(a, b)| (a - b) * (a - b))
                .sum();
            k[i][j] = (-d2 / (2.0 * s * s)).exp();
        }
    }
    k
}

pub fn quadratic_form(k: &[Vec<f64>], alpha: &[f64]) -> f64 {
    let mut acc = 0.0;
    for (i, row) in k.iter().enumerate() {
        for (j, kij) in row.iter().enumerate() {
            acc += alpha[i] * alpha[j] * kij;
        }
    }
    acc
}

/// Dual objective with the diagonal term kept explicit.
pub fn dual_objective(k: &[Vec<f64>], alpha: &[f64]) -> f64 {
    let linear: f64 = alpha.iter().enumerate().map(|(i, a)| a * k[i][i]).sum();
    linear - quadratic_form(k, alpha)
}

/// Euclidean projection onto `{Σα = 1, 0 ≤ α ≤ c}`.
///
/// Solves `Σ clamp(vᵢ − τ, 0, c) = 1` exactly by walking the sorted
/// breakpoints of the piecewise-linear left-hand side.
pub fn project_capped_simplex(v: &[f64], c: f64) -> Vec<f64> {
    let mass = |tau: f64| -> f64 { v.iter().map(|x| (x - tau).clamp(0.0, c)).sum() };
    let mut breaks: Vec<f64> = v.iter().flat_map(|&x| [x, x - c]).collect();
    breaks.sort_by(|a, b| a.partial_cmp(b).unwrap());
    // mass is nonincreasing in tau; find adjacent breakpoints bracketing 1.
    let mut lo = breaks[0] - 1.0;
    let mut hi = breaks[breaks.len() - 1] + 1.0;
    for w in breaks.windows(2) {
        let (a, b) = (w[0], w[1]);
        if mass(a) >= 1.0 && mass(b) <= 1.0 {
            lo = a;
            hi = b;
            break;
        }
    }
    if mass(breaks[0]) < 1.0 {
        hi = breaks[0];
    }
    let (m_lo, m_hi) = (mass(lo), mass(hi));
    let tau = if (m_lo - m_hi).abs() < f64::EPSILON {
        lo
    } else {
        lo + (m_lo - 1.0) * (hi - lo) / (m_lo - m_hi)
    };
    v.iter().map(|x| (x - tau).clamp(0.0, c)).collect()
}

/// Enumerate every point `α = q / steps` with integer `q`, `Σq = steps` and
/// `α ≤ c`; return the minimizer of `αᵀKα`.
pub fn simplex_grid_search(k: &[Vec<f64>], c: f64, steps: usize) -> Vec<f64> {
    let n = k.len();
    let cap = ((c * steps as f64) + 1e-9).floor() as usize;
    let mut best = (f64::INFINITY, vec![0.0; n]);
    let mut q = vec![0usize; n];

    fn recurse(
        pos: usize,
        remaining: usize,
        cap: usize,
        steps: usize,
        q: &mut Vec<usize>,
        k: &[Vec<f64>],
        best: &mut (f64, Vec<f64>),
    ) {
        let n = q.len();
        if pos == n - 1 {
            if remaining > cap {
                return;
            }
            q[pos] = remaining;
            let alpha: Vec<f64> = q.iter().map(|&x| x as f64 / steps as f64).collect();
            let val = quadratic_form(k, &alpha);
            if val < best.0 {
                *best = (val, alpha);
            }
            return;
        }
        let left = n - 1 - pos;
        for take in 0..=remaining.min(cap) {
            if remaining - take > left * cap {
                continue;
            }
            q[pos] = take;
            recurse(pos + 1, remaining - take, cap, steps, q, k, best);
        }
    }

    recurse(0, steps, cap, steps, &mut q, k, &mut best);
    if best.0.is_infinite() {
        // Grid too coarse for the box (c·steps < 1 per coordinate); fall
        // back to the projected uniform point.
        return project_capped_simplex(&vec![1.0 / n as f64; n], c);
    }
    best.1
}

/// Accelerated projected gradient with adaptive restart on `αᵀKα`.
pub fn polish(k: &[Vec<f64>], c: f64, start: &[f64], max_iter: usize) -> Vec<f64> {
    let n = k.len();
    // Gershgorin bound on the largest eigenvalue of 2K.
    let lipschitz = 2.0
        * k.iter()
            .map(|row| row.iter().map(|x| x.abs()).sum::<f64>())
            .fold(0.0, f64::max);
    let step = 1.0 / lipschitz;
    let grad = |a: &[f64]| -> Vec<f64> {
        (0..n)
            .map(|i| 2.0 * (0..n).map(|j| k[i][j] * a[j]).sum::<f64>())
            .collect()
    };
    let mut x = project_capped_simplex(start, c);
    let mut y = x.clone();
    let mut t = 1.0f64;
    let mut fx = quadratic_form(k, &x);
    for _ in 0..max_iter {
        let g = grad(&y);
        let v: Vec<f64> = y.iter().zip(&g).map(|(a, b)| a - step * b).collect();
        let x_next = project_capped_simplex(&v, c);
        let f_next = quadratic_form(k, &x_next);
        let moved = x_next
            .iter()
            .zip(&x)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        if f_next > fx {
            if t == 1.0 {
                // a plain projected step no longer descends
                break;
            }
            // restart momentum
            t = 1.0;
            y = x.clone();
            continue;
        }
        let t_next = 0.5 * (1.0 + (1.0 + 4.0 * t * t).sqrt());
        y = x_next
            .iter()
            .zip(&x)
            .map(|(a, b)| a + ((t - 1.0) / t_next) * (a - b))
            .collect();
        x = x_next;
        fx = f_next;
        t = t_next;
        if moved < 1e-16 {
            break;
        }
    }
    x
}

/// Grid resolution that keeps the enumeration in the tens of thousands.
pub fn default_steps(n: usize) -> usize {
    match n {
        0..=3 => 1000,
        4 => 120,
        5 => 48,
        6 => 24,
        7 => 16,
        _ => 12,
    }
}

/// Brute-force optimum of the Gaussian SVDD dual on `points`.
pub fn solve(points: &[Vec<f64>], s: f64, c: f64) -> OracleSolution {
    let k = gaussian_gram(points, s);
    solve_gram(&k, c, default_steps(points.len()))
}

pub fn solve_gram(k: &[Vec<f64>], c: f64, steps: usize) -> OracleSolution {
    let start = simplex_grid_search(k, c, steps);
    let alpha = polish(k, c, &start, 400_000);
    OracleSolution {
        objective: dual_objective(k, &alpha),
        alpha,
    }
}

/// Smallest eigenvalue of a symmetric matrix; used to decide whether the
/// dual optimum is unique enough for coordinate-wise comparison.
pub fn min_eigenvalue(k: &[Vec<f64>]) -> f64 {
    let n = k.len();
    let m = DMatrix::from_fn(n, n, |i, j| k[i][j]);
    SymmetricEigen::new(m)
        .eigenvalues
        .iter()
        .cloned()
        .fold(f64::INFINITY, f64::min)
}

/// Closed-form SVDD threshold for the two-point problem with `α = (½, ½)`.
pub fn two_point_r_squared(kernel_value: f64) -> f64 {
    (1.0 - kernel_value) / 2.0
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn projection_lands_on_capped_simplex() {
        let p = project_capped_simplex(&[0.9, 0.5, -0.3, 0.2], 0.4);
        let sum: f64 = p.iter().sum();
        assert!((sum - 1.0).abs() < 1e-12);
        assert!(p.iter().all(|&a| (-1e-15..=0.4 + 1e-15).contains(&a)));
        let q = project_capped_simplex(&[0.25, 0.25, 0.25, 0.25], 1.0);
        for a in q {
            assert!((a - 0.25).abs() < 1e-15);
        }
    }

    #[test]
    fn two_point_optimum_is_symmetric() {
        let sol = solve(&[vec![0.0, 0.0], vec![2.0, 0.0]], 1.0, 1.0);
        assert!((sol.alpha[0] - 0.5).abs() < 1e-9);
        let r2 = two_point_r_squared((-2.0f64).exp());
        assert!((r2 - 0.432_332_358_381_693_6).abs() < 1e-12);
    }

    #[test]
    fn grid_respects_box() {
        let k = gaussian_gram(&[vec![0.0], vec![1.0], vec![2.0]], 1.0);
        let a = simplex_grid_search(&k, 0.4, 1000);
        assert!(a.iter().all(|&x| x <= 0.4 + 1e-12));
        assert!((a.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }
}
