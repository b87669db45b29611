//! Fixtures shared by the benchmarks.

use sconvex::{MonotoneSet, PolyConvexFn, ScalarProduct};

/// Deterministic polyhedral function with `n` pieces on `R^d`.
pub fn sample_function(d: usize, n: usize) -> PolyConvexFn {
    let pieces = (0..n)
        .map(|k| {
            let t = k as f64;
            let slope = (0..d).map(|i| ((t + 1.0) * (i as f64 + 1.7)).sin()).collect();
            (slope, 0.1 * (t * 0.37).cos())
        })
        .collect();
    PolyConvexFn::new(d, pieces).expect("well-formed pieces")
}

pub fn sample_set(d: usize, m: usize, n: usize, seed: u64) -> MonotoneSet {
    sconvex::random_monotone(&ScalarProduct::canonical(d, m), n, seed).expect("generator succeeds")
}
