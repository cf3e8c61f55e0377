//! Sampling grids.

use crate::real::Real;

/// `n` evenly spaced points from `lo` to `hi` inclusive.
pub fn linspace<T: Real>(lo: T, hi: T, n: usize) -> Vec<T> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => {
            let step = (hi - lo) / T::from_usize(n - 1).unwrap();
            let mut out: Vec<T> = (0..n).map(|i| lo + step * T::from_usize(i).unwrap()).collect();
            out[n - 1] = hi;
            out
        }
    }
}

/// `n` logarithmically spaced points from `lo` to `hi` inclusive (`lo > 0`).
pub fn logspace<T: Real>(lo: T, hi: T, n: usize) -> Vec<T> {
    let mut out: Vec<T> = linspace(lo.ln(), hi.ln(), n).into_iter().map(T::exp).collect();
    if let Some(first) = out.first_mut() {
        *first = lo;
    }
    if let Some(last) = out.last_mut() {
        *last = hi;
    }
    out
}

/// Mesh nodes inside `[lo, hi]` together with the interval midpoints between
/// them, sorted.
pub fn refined_nodes<T: Real>(mesh: &[T], lo: T, hi: T) -> Vec<T> {
    let inside: Vec<T> = mesh.iter().copied().filter(|&x| x >= lo && x <= hi).collect();
    let mut out = Vec::with_capacity(2 * inside.len());
    for (i, &x) in inside.iter().enumerate() {
        out.push(x);
        if let Some(&next) = inside.get(i + 1) {
            out.push((x + next) * T::lit(0.5));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn endpoints_are_exact() {
        let g = linspace(0.1f64, 0.7, 7);
        assert_eq!(g.len(), 7);
        assert_eq!(g[0], 0.1);
        assert_eq!(g[6], 0.7);
        let g = logspace(1.0f64, 1000.0, 4);
        assert_eq!(g[0], 1.0);
        assert!((g[1] - 10.0).abs() < 1e-12);
        assert_eq!(g[3], 1000.0);
    }

    #[test]
    fn refined_nodes_interleave_midpoints() {
        let mesh = [0.0f64, 1.0, 2.0, 4.0];
        assert_eq!(refined_nodes(&mesh, 0.5, 4.0), vec![1.0, 1.5, 2.0, 3.0, 4.0]);
    }
}
