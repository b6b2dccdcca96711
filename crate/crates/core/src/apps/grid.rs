use alloc::vec::Vec;

/// `n` evenly spaced points from `lo` to `hi` inclusive.
pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => alloc::vec![lo],
        _ => (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect(),
    }
}

/// Objective at every `(a, b)` with `a < b`; other cells are `None`.
/// Row `i` holds `a_grid[i]`.
pub fn grid_eval(a_grid: &[f64], b_grid: &[f64], mut objective: impl FnMut(f64, f64) -> f64) -> Vec<Vec<Option<f64>>> {
    a_grid
        .iter()
        .map(|&a| b_grid.iter().map(|&b| (a < b).then(|| objective(a, b))).collect())
        .collect()
}
