//! Deterministic quadrature primitives.
//!
//! Grid integration evaluates one value per cell and then reduces with
//! [`pairwise_sum`], a fixed binary tree over the cell index order. The tree
//! depends only on the number of cells, so integrals are bit-identical
//! whether cells were evaluated sequentially or in parallel, and across any
//! number of worker threads. The `parallel` feature (on by default) switches
//! cell evaluation to rayon; the reduction itself is never parallelized.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Fix the number of worker threads for parallel integration. `0` keeps
/// the default of one worker per core. Must be called before the first
/// parallel integral; results do not depend on the worker count either
/// way, only throughput does. Without the `parallel` feature this is a
/// no-op.
pub fn configure_threads(threads: usize) -> Result<(), crate::error::Error> {
    if threads == 0 {
        return Ok(());
    }
    #[cfg(feature = "parallel")]
    {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .map_err(|e| crate::error::Error::ThreadPool(e.to_string()))?;
    }
    Ok(())
}

/// Pairwise summation over a fixed binary tree.
///
/// Blocks of up to 64 values are summed left to right; larger slices are
/// split at the midpoint. The tree shape is a function of `values.len()`
/// alone, which is what makes grid integrals reproducible bit-for-bit.
pub fn pairwise_sum(values: &[f64]) -> f64 {
    if values.len() <= 64 {
        return values.iter().sum();
    }
    let mid = values.len() / 2;
    pairwise_sum(&values[..mid]) + pairwise_sum(&values[mid..])
}

/// Evaluate `f` for every index in `0..n`, sequentially.
pub fn try_map_cells_seq<E>(
    n: usize,
    f: impl Fn(usize) -> Result<f64, E>,
) -> Result<Vec<f64>, E> {
    (0..n).map(f).collect()
}

/// Evaluate `f` for every index in `0..n` on the rayon pool, preserving
/// index order.
#[cfg(feature = "parallel")]
pub fn try_map_cells_par<E: Send>(
    n: usize,
    f: impl Fn(usize) -> Result<f64, E> + Sync + Send,
) -> Result<Vec<f64>, E> {
    (0..n).into_par_iter().map(f).collect()
}

/// Evaluate cells with the configured strategy and reduce deterministically.
#[cfg(feature = "parallel")]
pub fn try_sum_cells<E: Send>(
    n: usize,
    f: impl Fn(usize) -> Result<f64, E> + Sync + Send,
) -> Result<f64, E> {
    Ok(pairwise_sum(&try_map_cells_par(n, f)?))
}

/// Evaluate cells with the configured strategy and reduce deterministically.
#[cfg(not(feature = "parallel"))]
pub fn try_sum_cells<E>(n: usize, f: impl Fn(usize) -> Result<f64, E>) -> Result<f64, E> {
    Ok(pairwise_sum(&try_map_cells_seq(n, f)?))
}

/// Sequential twin of [`try_sum_cells`]; produces bit-identical results.
pub fn try_sum_cells_seq<E>(n: usize, f: impl Fn(usize) -> Result<f64, E>) -> Result<f64, E> {
    Ok(pairwise_sum(&try_map_cells_seq(n, f)?))
}

/// Midpoint of cell `index` on the tensor-product grid with `per_axis`
/// subdivisions of each interval. Axis 0 varies fastest.
pub fn cell_midpoint(intervals: &[(f64, f64)], per_axis: usize, index: usize, out: &mut [f64]) {
    debug_assert_eq!(intervals.len(), out.len());
    let mut rest = index;
    for (axis, &(lo, hi)) in intervals.iter().enumerate() {
        let k = rest % per_axis;
        rest /= per_axis;
        let width = (hi - lo) / per_axis as f64;
        out[axis] = lo + (k as f64 + 0.5) * width;
    }
}

/// Total number of cells for a tensor-product grid, if representable.
pub fn cell_count(dim: usize, per_axis: usize) -> Option<usize> {
    let mut n: usize = 1;
    for _ in 0..dim {
        n = n.checked_mul(per_axis)?;
    }
    Some(n)
}

/// Interior sample points: the midpoint grid with `per_axis` points per
/// interval, materialized as a point list. Intended for residual sampling,
/// not integration.
pub fn interior_grid(intervals: &[(f64, f64)], per_axis: usize) -> Vec<Vec<f64>> {
    let n = cell_count(intervals.len(), per_axis).expect("sample grid too large");
    let mut points = Vec::with_capacity(n);
    let mut point = vec![0.0; intervals.len()];
    for index in 0..n {
        cell_midpoint(intervals, per_axis, index, &mut point);
        points.push(point.clone());
    }
    points
}

/// Composite Simpson rule with `n` (rounded up to even) subintervals.
pub fn composite_simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    let n = if n.is_multiple_of(2) { n.max(2) } else { n + 1 };
    let h = (b - a) / n as f64;
    let mut values = Vec::with_capacity(n + 1);
    for k in 0..=n {
        let weight = if k == 0 || k == n {
            1.0
        } else if k % 2 == 1 {
            4.0
        } else {
            2.0
        };
        values.push(weight * f(a + k as f64 * h));
    }
    pairwise_sum(&values) * h / 3.0
}

/// Adaptive Simpson integration to absolute tolerance `tol`.
pub fn adaptive_simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    fn simpson(fa: f64, fm: f64, fb: f64, a: f64, b: f64) -> f64 {
        (b - a) / 6.0 * (fa + 4.0 * fm + fb)
    }
    #[allow(clippy::too_many_arguments)]
    fn recurse<F: Fn(f64) -> f64>(
        f: &F,
        a: f64,
        b: f64,
        fa: f64,
        fm: f64,
        fb: f64,
        whole: f64,
        tol: f64,
        depth: u32,
    ) -> f64 {
        let m = 0.5 * (a + b);
        let lm = 0.5 * (a + m);
        let rm = 0.5 * (m + b);
        let flm = f(lm);
        let frm = f(rm);
        let left = simpson(fa, flm, fm, a, m);
        let right = simpson(fm, frm, fb, m, b);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            return left + right + delta / 15.0;
        }
        recurse(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
            + recurse(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
    }
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = simpson(fa, fm, fb, a, b);
    recurse(&f, a, b, fa, fm, fb, whole, tol, 48)
}
