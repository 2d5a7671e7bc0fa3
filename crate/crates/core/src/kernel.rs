//! Gaussian kernel and the row cache used by the dual solver.

use crate::data::DataMatrix;
use crate::error::{Result, SvddError};

/// Upper bound on cache memory when the caller does not size it explicitly.
pub const DEFAULT_CACHE_BYTES: usize = 256 * 1024 * 1024;
/// Upper bound on cached rows regardless of memory.
pub const DEFAULT_CACHE_ROWS: usize = 4096;

/// Bandwidth `s` of the Gaussian kernel `exp(−‖x−y‖² / (2s²))`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KernelParams {
    bandwidth: f64,
    neg_inv_two_s2: f64,
}

impl KernelParams {
    pub fn new(bandwidth: f64) -> Result<Self> {
        if !(bandwidth.is_finite() && bandwidth > 0.0) {
            return Err(SvddError::config(format!(
                "Gaussian bandwidth must be positive and finite, got {bandwidth}"
            )));
        }
        Ok(KernelParams {
            bandwidth,
            neg_inv_two_s2: -1.0 / (2.0 * bandwidth * bandwidth),
        })
    }

    pub fn bandwidth(&self) -> f64 {
        self.bandwidth
    }

    /// Kernel value for a precomputed squared distance.
    #[inline]
    pub fn eval_squared_distance(&self, d2: f64) -> f64 {
        (d2 * self.neg_inv_two_s2).exp()
    }
}

/// Squared Euclidean distance, accumulated in index order.
#[inline]
pub fn squared_distance(x: &[f64], y: &[f64]) -> f64 {
    let mut acc = 0.0;
    for k in 0..x.len() {
        let d = x[k] - y[k];
        acc += d * d;
    }
    acc
}

/// `K(x, y) = exp(−‖x−y‖² / (2s²))`.
pub fn gaussian_kernel(x: &[f64], y: &[f64], params: &KernelParams) -> Result<f64> {
    if x.len() != y.len() {
        return Err(SvddError::input(format!(
            "kernel arguments have dimensions {} and {}",
            x.len(),
            y.len()
        )));
    }
    if x.is_empty() {
        return Err(SvddError::input("kernel arguments must have dimension >= 1"));
    }
    Ok(kernel_unchecked(x, y, params))
}

#[inline]
pub(crate) fn kernel_unchecked(x: &[f64], y: &[f64], params: &KernelParams) -> f64 {
    params.eval_squared_distance(squared_distance(x, y))
}

const EMPTY: u32 = u32::MAX;

/// Least-recently-used cache of Gram matrix rows for one data set.
///
/// A cache only ever holds rows for a single problem; [`KernelCache::reset`]
/// must be called (the solver does this) before reusing it on other data.
#[derive(Debug)]
pub struct KernelCache {
    capacity: usize,
    n: usize,
    slot_of: Vec<u32>,
    owner: Vec<usize>,
    last_use: Vec<u64>,
    rows: Vec<Vec<f64>>,
    tick: u64,
    hits: u64,
    misses: u64,
}

impl KernelCache {
    pub fn new(capacity_rows: usize) -> Self {
        KernelCache {
            capacity: capacity_rows.max(1),
            n: 0,
            slot_of: Vec::new(),
            owner: Vec::new(),
            last_use: Vec::new(),
            rows: Vec::new(),
            tick: 0,
            hits: 0,
            misses: 0,
        }
    }

    /// `min(n, 4096)` rows, further limited so the cache stays under
    /// [`DEFAULT_CACHE_BYTES`].
    pub fn for_rows(n: usize) -> Self {
        let by_memory = DEFAULT_CACHE_BYTES / (8 * n.max(1));
        KernelCache::new(n.min(DEFAULT_CACHE_ROWS).min(by_memory).max(2))
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    /// Number of rows currently stored.
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn hits(&self) -> u64 {
        self.hits
    }

    pub fn misses(&self) -> u64 {
        self.misses
    }

    /// Drop all rows and prepare for a data set with `n` observations.
    /// Row buffers are kept for reuse when the width matches.
    pub fn reset(&mut self, n: usize) {
        if n != self.n {
            self.rows.clear();
        }
        self.n = n;
        self.slot_of.clear();
        self.slot_of.resize(n, EMPTY);
        self.owner.clear();
        self.last_use.clear();
        self.owner.resize(self.rows.len(), usize::MAX);
        self.last_use.resize(self.rows.len(), 0);
        self.tick = 0;
    }

    fn lookup_or_compute(
        &mut self,
        i: usize,
        data: &DataMatrix,
        params: &KernelParams,
    ) -> usize {
        self.tick += 1;
        let slot = self.slot_of[i];
        if slot != EMPTY {
            self.hits += 1;
            self.last_use[slot as usize] = self.tick;
            return slot as usize;
        }
        self.misses += 1;
        let slot = if let Some(free) = self.owner.iter().position(|&o| o == usize::MAX) {
            free
        } else if self.rows.len() < self.capacity {
            self.rows.push(Vec::with_capacity(self.n));
            self.owner.push(usize::MAX);
            self.last_use.push(0);
            self.rows.len() - 1
        } else {
            let victim = self
                .last_use
                .iter()
                .enumerate()
                .min_by_key(|(_, &t)| t)
                .map(|(s, _)| s)
                .expect("capacity >= 1");
            self.slot_of[self.owner[victim]] = EMPTY;
            victim
        };
        let xi = data.row(i);
        let row = &mut self.rows[slot];
        row.clear();
        row.extend(data.rows().map(|xj| kernel_unchecked(xi, xj, params)));
        self.owner[slot] = i;
        self.last_use[slot] = self.tick;
        self.slot_of[i] = slot as u32;
        slot
    }
}

/// Row `i` of the Gram matrix, `row[j] = K(xᵢ, xⱼ)`, served from `cache`
/// when present.
pub fn kernel_row<'c>(
    i: usize,
    data: &DataMatrix,
    params: &KernelParams,
    cache: &'c mut KernelCache,
) -> Result<&'c [f64]> {
    if i >= data.n_rows() {
        return Err(SvddError::input(format!(
            "row index {i} out of range for {} observations",
            data.n_rows()
        )));
    }
    if cache.n != data.n_rows() {
        cache.reset(data.n_rows());
    }
    let slot = cache.lookup_or_compute(i, data, params);
    Ok(&cache.rows[slot])
}
