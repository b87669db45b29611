//! Finite `S`-monotone sets, their Fitzpatrick functions and projections.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{check_dim, Error, Result};
use crate::polyconvex::PolyConvexFn;
use crate::pseudo_space::ScalarProduct;
use crate::vecops::{complement_basis, dist, dot, norm, norm_sq, sub};
use crate::ISOTROPY_TOL;

const MIN_SEPARATION: f64 = 1e-12;

/// A nonempty finite set `G` with `S(y - z, y - z) >= -tol` for all pairs.
#[derive(Debug, Clone, PartialEq)]
pub struct MonotoneSet {
    space: ScalarProduct,
    points: Vec<Vec<f64>>,
}

/// Minimizers of `y -> S(x - y, x - y)` over `G`, as indices into the set.
#[derive(Debug, Clone, PartialEq)]
pub struct ProjectionResult {
    pub minimizers: Vec<usize>,
    pub value: f64,
}

/// Returns the first pair (lexicographic in indices) whose scalar square is
/// below `-tol` as [`Error::NotMonotone`].
pub fn check_monotone(space: &ScalarProduct, points: &[Vec<f64>], tol: f64) -> Result<()> {
    if points.is_empty() {
        return Err(Error::InvalidInput("point set is empty".into()));
    }
    for p in points {
        check_dim(space.dim(), p.len())?;
    }
    for i in 0..points.len() {
        for j in i + 1..points.len() {
            let q = space.square(&sub(&points[i], &points[j]));
            if q < -tol {
                return Err(Error::NotMonotone { i, j, value: q });
            }
        }
    }
    Ok(())
}

impl MonotoneSet {
    pub fn new(space: ScalarProduct, points: Vec<Vec<f64>>, tol: f64) -> Result<Self> {
        check_monotone(&space, &points, tol)?;
        for i in 0..points.len() {
            for j in i + 1..points.len() {
                if dist(&points[i], &points[j]) <= MIN_SEPARATION {
                    return Err(Error::InvalidInput(format!("points {i} and {j} coincide")));
                }
            }
        }
        Ok(Self { space, points })
    }

    pub fn space(&self) -> &ScalarProduct {
        &self.space
    }

    pub fn points(&self) -> &[Vec<f64>] {
        &self.points
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.points[i]
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.space.dim()
    }

    /// `psi_G(x) = max_y S(x, y) - S(y, y)/2`: slope `S y`, intercept `S(y, y)/2`.
    pub fn fitzpatrick(&self) -> PolyConvexFn {
        let pieces = self
            .points
            .iter()
            .map(|y| (self.space.apply(y), 0.5 * self.space.square(y)))
            .collect();
        PolyConvexFn::new(self.dim(), pieces).expect("nonempty set with matching dimension")
    }

    /// `g(x) = psi_G(S^{-1} x)`: slope `y`, intercept `S(y, y)/2`. Its
    /// subdifferential at `S x`, intersected with `G`, is `P_G(x)`.
    pub fn dual_potential(&self) -> PolyConvexFn {
        let pieces = self
            .points
            .iter()
            .map(|y| (y.clone(), 0.5 * self.space.square(y)))
            .collect();
        PolyConvexFn::new(self.dim(), pieces).expect("nonempty set with matching dimension")
    }

    /// `phi_G(x) = min_y S(x - y, x - y)`.
    pub fn scalar_square_to_set(&self, x: &[f64]) -> Result<f64> {
        check_dim(self.dim(), x.len())?;
        Ok(self
            .points
            .iter()
            .map(|y| self.space.square(&sub(x, y)))
            .fold(f64::INFINITY, f64::min))
    }

    /// `P_G(x)`; ties are decided against `tol * max(1, |value|)`.
    pub fn project(&self, x: &[f64], tol: f64) -> Result<ProjectionResult> {
        check_dim(self.dim(), x.len())?;
        let values: Vec<f64> = self
            .points
            .iter()
            .map(|y| self.space.square(&sub(x, y)))
            .collect();
        let value = values.iter().copied().fold(f64::INFINITY, f64::min);
        let eff = tol * value.abs().max(1.0);
        let minimizers = values
            .iter()
            .enumerate()
            .filter(|&(_, &v)| v <= value + eff)
            .map(|(i, _)| i)
            .collect();
        Ok(ProjectionResult { minimizers, value })
    }
}

/// Builds the graph `{(u_i, v_i)}` of a sampled 1-Lipschitz map
/// `R^m -> R^{d-m}` as a monotone set for the canonical form with index `m`.
pub fn graph_from_lipschitz(m: usize, samples: &[(Vec<f64>, Vec<f64>)]) -> Result<MonotoneSet> {
    let Some((u0, v0)) = samples.first() else {
        return Err(Error::InvalidInput("no samples".into()));
    };
    check_dim(m, u0.len())?;
    let k = v0.len();
    let d = m + k;
    if d == 0 {
        return Err(Error::InvalidInput("graph dimension is zero".into()));
    }
    for (u, v) in samples {
        check_dim(m, u.len())?;
        check_dim(k, v.len())?;
    }
    for i in 0..samples.len() {
        for j in i + 1..samples.len() {
            let du = dist(&samples[i].0, &samples[j].0);
            let dv = dist(&samples[i].1, &samples[j].1);
            if dv * dv > du * du * (1.0 + 1e-12) + 1e-300 {
                return Err(Error::LipschitzViolation { i, j, du, dv });
            }
        }
    }
    let points = samples
        .iter()
        .map(|(u, v)| u.iter().chain(v.iter()).copied().collect())
        .collect();
    MonotoneSet::new(ScalarProduct::canonical(d, m), points, ISOTROPY_TOL)
}

/// Seeded random monotone set with strictly positive pair squares.
///
/// Points are drawn as a graph of a random strict contraction in the
/// canonical coordinates of `space` and mapped back through `V^{-1}`.
pub fn random_monotone(space: &ScalarProduct, n: usize, seed: u64) -> Result<MonotoneSet> {
    let set = generate(space, n, 0, seed)?;
    check_monotone(space, set.points(), 0.0)
        .map_err(|e| Error::Internal(format!("generated set failed the monotonicity check: {e}")))?;
    Ok(set)
}

/// Like [`random_monotone`] but with `chain_len` of the points on one
/// isotropic line, so the set has exactly isotropic pairs (up to rounding).
/// Needs `1 <= index < dim`.
pub fn random_monotone_with_chain(
    space: &ScalarProduct,
    n: usize,
    chain_len: usize,
    seed: u64,
) -> Result<MonotoneSet> {
    let m = space.index();
    if m == 0 || m == space.dim() {
        return Err(Error::InvalidInput(
            "a definite form has no isotropic directions".into(),
        ));
    }
    if chain_len > n {
        return Err(Error::InvalidInput("chain longer than the set".into()));
    }
    generate(space, n, chain_len, seed)
}

fn unit_vector(rng: &mut ChaCha8Rng, k: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..k).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let n = norm(&v);
        if n > 0.1 {
            return v.iter().map(|x| x / n).collect();
        }
    }
}

fn generate(space: &ScalarProduct, n: usize, chain_len: usize, seed: u64) -> Result<MonotoneSet> {
    if n == 0 {
        return Err(Error::InvalidInput("n must be at least 1".into()));
    }
    let d = space.dim();
    let m = space.index();
    let k = d - m;
    if m == 0 && n > 1 {
        return Err(Error::InvalidInput(
            "a negative definite form only admits single-point monotone sets".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let inertia = space.inertia()?;
    let v_inv = inertia
        .v
        .clone()
        .try_inverse()
        .ok_or_else(|| Error::Degenerate("inertia factor not invertible".into()))?;

    let mut samples: Vec<(Vec<f64>, Vec<f64>)> = Vec::with_capacity(n);
    if m == 0 {
        samples.push((vec![], (0..k).map(|_| rng.gen_range(-2.0..2.0)).collect()));
    } else {
        // v = sigma <u, e> f + B sin(W^T u), |B| <= rho < 1, B maps into f-perp.
        let e = unit_vector(&mut rng, m);
        let w = complement_basis(&e);
        let f = if k > 0 { unit_vector(&mut rng, k) } else { vec![] };
        let f_perp = if k > 0 { complement_basis(&f) } else { vec![] };
        let sigma = if chain_len > 0 { 1.0 } else { rng.gen_range(0.3..0.9) };
        let rho = rng.gen_range(0.0..0.9);
        let raw: Vec<Vec<f64>> = (0..f_perp.len())
            .map(|_| (0..w.len()).map(|_| rng.gen_range(-1.0..1.0)).collect())
            .collect();
        let b = if raw.is_empty() || w.is_empty() {
            None
        } else {
            let r = DMatrix::from_fn(raw.len(), w.len(), |i, j| raw[i][j]);
            let spectral = r.clone().svd(false, false).singular_values.max();
            let fp = DMatrix::from_fn(k, f_perp.len(), |i, j| f_perp[j][i]);
            let scale = if spectral > 0.0 { rho / spectral } else { 0.0 };
            Some(fp * r * scale)
        };
        let map = |u: &[f64]| -> Vec<f64> {
            if k == 0 {
                return vec![];
            }
            let along = sigma * dot(u, &e);
            let mut v: Vec<f64> = f.iter().map(|fi| along * fi).collect();
            if let Some(b) = &b {
                let s = DVector::from_iterator(w.len(), w.iter().map(|wi| dot(u, wi).sin()));
                let bv = b * s;
                for (vi, add) in v.iter_mut().zip(bv.iter()) {
                    *vi += add;
                }
            }
            v
        };

        let anchor: Vec<f64> = (0..m).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let mut us: Vec<Vec<f64>> = Vec::with_capacity(n);
        let mut attempts = 0;
        while us.len() < n {
            attempts += 1;
            if attempts > 100_000 {
                return Err(Error::Internal("could not place separated samples".into()));
            }
            let u: Vec<f64> = if us.len() < chain_len {
                let t = rng.gen_range(-2.0..2.0);
                anchor.iter().zip(&e).map(|(a, ei)| a + t * ei).collect()
            } else {
                (0..m).map(|_| rng.gen_range(-2.0..2.0)).collect()
            };
            if us.iter().all(|p| norm_sq(&sub(p, &u)) > 1e-6) {
                us.push(u);
            }
        }
        for u in us {
            let v = map(&u);
            samples.push((u, v));
        }
    }

    let points = samples
        .into_iter()
        .map(|(u, v)| {
            let w = DVector::from_iterator(d, u.into_iter().chain(v));
            (&v_inv * w).as_slice().to_vec()
        })
        .collect();
    MonotoneSet::new(space.clone(), points, ISOTROPY_TOL)
}
