//! Seeded generators and brute-force oracles shared by the integration tests.
#![allow(dead_code)]

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sconvex::{PolyConvexFn, ScalarProduct};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn vec_in(rng: &mut ChaCha8Rng, d: usize, lo: f64, hi: f64) -> Vec<f64> {
    (0..d).map(|_| rng.gen_range(lo..hi)).collect()
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// `A^T diag(signs) A` for a random well-conditioned `A`, index `m`.
pub fn random_form(rng: &mut ChaCha8Rng, d: usize, m: usize) -> ScalarProduct {
    loop {
        let a = DMatrix::from_fn(d, d, |_, _| rng.gen_range(-1.0..1.0));
        let svd = a.clone().svd(false, false);
        let smin = svd.singular_values.min();
        let smax = svd.singular_values.max();
        if smin < 0.2 * smax || smin < 0.2 {
            continue;
        }
        let signs = DMatrix::from_diagonal(&nalgebra::DVector::from_fn(d, |i, _| if i < m { 1.0 } else { -1.0 }));
        let s = a.transpose() * signs * &a;
        if let Ok(sp) = ScalarProduct::new(s) {
            assert_eq!(sp.index(), m);
            return sp;
        }
    }
}

/// Random pieces with slopes in `[-1, 1]^d` and intercepts in `[0, 1]`.
pub fn random_function(rng: &mut ChaCha8Rng, d: usize, n: usize) -> PolyConvexFn {
    let pieces = (0..n).map(|_| (vec_in(rng, d, -1.0, 1.0), rng.gen_range(0.0..1.0))).collect();
    PolyConvexFn::new(d, pieces).unwrap()
}

/// Random function with extra dominated pieces: a duplicate slope with a
/// larger intercept, and a convex combination of two slopes lying above the
/// combined intercept.
pub fn random_function_with_dominated(rng: &mut ChaCha8Rng, d: usize, n: usize) -> PolyConvexFn {
    let base = random_function(rng, d, n);
    let mut pieces: Vec<(Vec<f64>, f64)> = base.pieces().map(|(s, c)| (s.to_vec(), c)).collect();
    let k = rng.gen_range(0..n);
    pieces.push((pieces[k].0.clone(), pieces[k].1 + rng.gen_range(0.1..1.0)));
    if n >= 2 {
        let (a, b) = (0, 1);
        let t: f64 = rng.gen_range(0.2..0.8);
        let slope = pieces[a].0.iter().zip(&pieces[b].0).map(|(x, y)| t * x + (1.0 - t) * y).collect();
        let c = t * pieces[a].1 + (1.0 - t) * pieces[b].1 + rng.gen_range(0.0..0.5);
        pieces.push((slope, c));
    }
    PolyConvexFn::new(d, pieces).unwrap()
}

/// Brute-force argmax within `tol`.
pub fn brute_argmax(f: &PolyConvexFn, subset: &[usize], x: &[f64], tol: f64) -> Vec<usize> {
    let vals: Vec<f64> = subset.iter().map(|&k| dot(f.slope(k), x) - f.intercept(k)).collect();
    let best = vals.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mut out: Vec<usize> = subset.iter().zip(&vals).filter(|(_, &v)| v >= best - tol).map(|(&k, _)| k).collect();
    out.sort_unstable();
    out
}

/// Projection of `x` onto `{z : <z, a> = b}`.
pub fn onto_hyperplane(x: &[f64], a: &[f64], b: f64) -> Vec<f64> {
    let aa = dot(a, a);
    let t = (b - dot(x, a)) / aa;
    x.iter().zip(a).map(|(xi, ai)| xi + t * ai).collect()
}

/// Cyclic Jacobi eigenvalues of a symmetric matrix.
pub fn jacobi_eigenvalues(m: &DMatrix<f64>) -> Vec<f64> {
    let n = m.nrows();
    let mut a = m.clone();
    for _ in 0..100 {
        let off: f64 = (0..n).flat_map(|i| (0..n).map(move |j| (i, j))).filter(|(i, j)| i != j).map(|(i, j)| a[(i, j)].powi(2)).sum();
        if off < 1e-30 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                if a[(p, q)].abs() < 1e-300 {
                    continue;
                }
                let theta = (a[(q, q)] - a[(p, p)]) / (2.0 * a[(p, q)]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                let mut r = DMatrix::identity(n, n);
                r[(p, p)] = c;
                r[(q, q)] = c;
                r[(p, q)] = s;
                r[(q, p)] = -s;
                a = r.transpose() * a * &r;
            }
        }
    }
    (0..n).map(|i| a[(i, i)]).collect()
}

/// Random symmetric matrix with eigenvalues bounded away from zero.
pub fn random_symmetric_invertible(rng: &mut ChaCha8Rng, d: usize) -> DMatrix<f64> {
    loop {
        let a = DMatrix::from_fn(d, d, |_, _| rng.gen_range(-1.0..1.0));
        let s = (&a + a.transpose()) * 0.5;
        if jacobi_eigenvalues(&s).iter().all(|l| l.abs() > 0.05) {
            return s;
        }
    }
}

/// Random `(f, j, C1, C2)` with `max_{C1} y^j < min_{C2} y^j`.
pub fn random_gap_instance(rng: &mut ChaCha8Rng) -> (PolyConvexFn, usize, Vec<usize>, Vec<usize>) {
    loop {
        let d = rng.gen_range(2..=3);
        let n = rng.gen_range(2..=6);
        let f = random_function(rng, d, n);
        let j = rng.gen_range(0..d);
        let t: f64 = rng.gen_range(-0.5..0.5);
        let c1: Vec<usize> = (0..n).filter(|&k| f.slope(k)[j] < t - 0.05 && rng.gen_bool(0.8)).collect();
        let c2: Vec<usize> = (0..n).filter(|&k| f.slope(k)[j] > t + 0.05 && rng.gen_bool(0.8)).collect();
        if !c1.is_empty() && !c2.is_empty() {
            return (f, j, c1, c2);
        }
    }
}

/// Points where `f` has active pieces in both `c1` and `c2`, found by
/// sampling tie hyperplanes of pairs `(k, l)` in `c1 x c2`.
pub fn tie_set_points(
    rng: &mut ChaCha8Rng,
    f: &PolyConvexFn,
    c1: &[usize],
    c2: &[usize],
    attempts: usize,
) -> Vec<Vec<f64>> {
    let all: Vec<usize> = (0..f.len()).collect();
    let mut out = Vec::new();
    for _ in 0..attempts {
        let k = c1[rng.gen_range(0..c1.len())];
        let l = c2[rng.gen_range(0..c2.len())];
        let n: Vec<f64> = f.slope(l).iter().zip(f.slope(k)).map(|(a, b)| a - b).collect();
        let x0 = vec_in(rng, f.dim(), -3.0, 3.0);
        let x = onto_hyperplane(&x0, &n, f.intercept(l) - f.intercept(k));
        let act = brute_argmax(f, &all, &x, 1e-9);
        if act.iter().any(|a| c1.contains(a)) && act.iter().any(|a| c2.contains(a)) {
            out.push(x);
        }
    }
    out
}
