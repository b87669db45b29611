//! Difference-of-convex ("c-c") surfaces covering singular sets.
//!
//! A surface is the zero set of `h(x) = x^j + g1(x^{-j}) - g2(x^{-j})` with
//! polyhedral convex `g1`, `g2`, optionally precomposed with a matrix `M`
//! (the surface is then `{x : h(M x) = 0}`). Wherever `g1` and `g2` are
//! differentiable, `grad h` lies in a finite normal set whose elements have
//! `j`-th coordinate one.
//!
//! [`theorem1_build`] constructs such a surface from a polyhedral `f` and two
//! groups of pieces `C1`, `C2` separated in coordinate `j`: with
//! `f_C = max_{k in C1 ∪ C2} <x, y_k> - f*(y_k)` and the partial conjugate
//! `g(r, u) = inf_s f_C(s, u) - s r`, it sets `g1 = g(r2, .)/(r2 - r1)` and
//! `g2 = g(r1, .)/(r2 - r1)` for `a < r1 < r2 < b`. Every point where `f`
//! has active pieces in both groups lies on `{h = 0}`.

use std::collections::BTreeSet;

use nalgebra::{DMatrix, DVector};

use crate::error::{check_dim, Error, Result};
use crate::lp::{LinearProgram, LpOutcome, Relation};
use crate::monotone::MonotoneSet;
use crate::polyconvex::PolyConvexFn;
use crate::pseudo_space::PairClass;
use crate::singularity::SingularPoint;
use crate::vecops::{dist, dot, drop_coord, insert_coord, norm, norm_sq, sub};
use crate::COORD_EPS;

const UNIT_COORD_TOL: f64 = 1e-12;
/// Finite-difference step and tolerance for normal checks in
/// [`verify_coverage`].
pub const GRADIENT_FD_STEP: f64 = 1e-5;
pub const GRADIENT_TOL: f64 = 1e-6;
const HYPERPLANE_DEDUP: f64 = 1e-9;

/// The pieces and the interior levels a surface was built from.
#[derive(Debug, Clone, PartialEq)]
pub struct SurfaceOrigin {
    pub c1: Vec<usize>,
    pub c2: Vec<usize>,
    pub r1: f64,
    pub r2: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CcSurface {
    dim: usize,
    j: usize,
    g1: PolyConvexFn,
    g2: PolyConvexFn,
    normal_set: Vec<Vec<f64>>,
    precompose: Option<DMatrix<f64>>,
    origin: Option<SurfaceOrigin>,
}

impl CcSurface {
    pub fn new(
        j: usize,
        g1: PolyConvexFn,
        g2: PolyConvexFn,
        normal_set: Vec<Vec<f64>>,
        precompose: Option<DMatrix<f64>>,
    ) -> Result<Self> {
        let dim = g1.dim() + 1;
        check_dim(g1.dim(), g2.dim())?;
        if j >= dim {
            return Err(Error::InvalidInput(format!("coordinate {j} out of range for dimension {dim}")));
        }
        for w in &normal_set {
            check_dim(dim, w.len())?;
            if (w[j] - 1.0).abs() > UNIT_COORD_TOL {
                return Err(Error::InvalidInput(format!(
                    "normal vector has coordinate {j} equal to {} instead of 1",
                    w[j]
                )));
            }
        }
        if let Some(m) = &precompose {
            if m.nrows() != dim || m.ncols() != dim {
                return Err(Error::DimensionMismatch { expected: dim, got: m.nrows() });
            }
        }
        Ok(Self {
            dim,
            j,
            g1,
            g2,
            normal_set,
            precompose,
            origin: None,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn j(&self) -> usize {
        self.j
    }

    pub fn g1(&self) -> &PolyConvexFn {
        &self.g1
    }

    pub fn g2(&self) -> &PolyConvexFn {
        &self.g2
    }

    pub fn normal_set(&self) -> &[Vec<f64>] {
        &self.normal_set
    }

    pub fn precompose(&self) -> Option<&DMatrix<f64>> {
        self.precompose.as_ref()
    }

    pub fn origin(&self) -> Option<&SurfaceOrigin> {
        self.origin.as_ref()
    }

    pub fn with_precompose(mut self, m: DMatrix<f64>) -> Result<Self> {
        if m.nrows() != self.dim || m.ncols() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, got: m.nrows() });
        }
        self.precompose = Some(m);
        Ok(self)
    }

    /// `z = M x`, or `x` itself without precomposition.
    pub fn to_h_coords(&self, x: &[f64]) -> Vec<f64> {
        match &self.precompose {
            Some(m) => (m * DVector::from_column_slice(x)).as_slice().to_vec(),
            None => x.to_vec(),
        }
    }

    /// `h(z)` without precomposition.
    pub fn h(&self, z: &[f64]) -> f64 {
        let u = drop_coord(z, self.j);
        z[self.j] + self.g1.eval_unchecked(&u) - self.g2.eval_unchecked(&u)
    }

    /// The point of `{h = 0}` (in `h` coordinates) above `u`.
    pub fn lift(&self, u: &[f64]) -> Vec<f64> {
        let s = self.g2.eval_unchecked(u) - self.g1.eval_unchecked(u);
        insert_coord(u, self.j, s)
    }
}

/// `theta^j(C) = { y / y^j }`.
pub fn rescale_theta(c: &[Vec<f64>], j: usize) -> Result<Vec<Vec<f64>>> {
    c.iter()
        .map(|y| {
            if j >= y.len() {
                return Err(Error::InvalidInput(format!("coordinate {j} out of range")));
            }
            if !(y[j] > 0.0) {
                return Err(Error::InvalidInput(format!(
                    "coordinate {j} must be positive, got {}",
                    y[j]
                )));
            }
            let s = y[j];
            let mut w: Vec<f64> = y.iter().map(|v| v / s).collect();
            w[j] = 1.0;
            Ok(w)
        })
        .collect()
}

/// `h(M x)` (or `h(x)`).
pub fn eval_surface(surf: &CcSurface, x: &[f64]) -> Result<f64> {
    check_dim(surf.dim, x.len())?;
    Ok(surf.h(&surf.to_h_coords(x)))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GradientCheck {
    Pass,
    Fail,
    Nonsmooth,
}

/// Finite-difference check that `grad h` at `z = M x` is within `tol` of the
/// normal set. Returns [`GradientCheck::Nonsmooth`] when one-sided
/// differences of `g1` or `g2` disagree by more than `10 tol`.
pub fn surface_gradient_check(
    surf: &CcSurface,
    x: &[f64],
    fd_step: f64,
    tol: f64,
) -> Result<GradientCheck> {
    check_dim(surf.dim, x.len())?;
    let z = surf.to_h_coords(x);
    let r = surf.h(&z);
    if r.abs() > tol.max(1e-8) {
        return Err(Error::Precondition(format!("point is off the surface (h = {r:e})")));
    }
    Ok(gradient_check_at(surf, &z, fd_step, tol))
}

fn gradient_check_at(surf: &CcSurface, z: &[f64], h: f64, tol: f64) -> GradientCheck {
    let u = drop_coord(z, surf.j);
    for g in [&surf.g1, &surf.g2] {
        let g0 = g.eval_unchecked(&u);
        for i in 0..u.len() {
            let mut up = u.clone();
            up[i] += h;
            let mut dn = u.clone();
            dn[i] -= h;
            let fwd = (g.eval_unchecked(&up) - g0) / h;
            let bwd = (g0 - g.eval_unchecked(&dn)) / h;
            if (fwd - bwd).abs() > 10.0 * tol {
                return GradientCheck::Nonsmooth;
            }
        }
    }
    let grad: Vec<f64> = (0..z.len())
        .map(|i| {
            let mut up = z.to_vec();
            up[i] += h;
            let mut dn = z.to_vec();
            dn[i] -= h;
            (surf.h(&up) - surf.h(&dn)) / (2.0 * h)
        })
        .collect();
    let nearest = surf
        .normal_set
        .iter()
        .map(|w| dist(w, &grad))
        .fold(f64::INFINITY, f64::min);
    if nearest <= tol {
        GradientCheck::Pass
    } else {
        GradientCheck::Fail
    }
}

fn check_piece_indices(f: &PolyConvexFn, idx: &[usize], name: &str) -> Result<()> {
    if idx.is_empty() {
        return Err(Error::InvalidInput(format!("{name} is empty")));
    }
    if let Some(&k) = idx.iter().find(|&&k| k >= f.len()) {
        return Err(Error::InvalidInput(format!("{name} index {k} out of range")));
    }
    Ok(())
}

/// `g(r, .)` as an explicit polyhedral function on `R^{d-1}`: the pointwise
/// max over straddling pairs `(k, l)`, `y_k^j < r < y_l^j`, of the convex
/// combination with `j`-th slope coordinate `r`, plus pieces with
/// `y_k^j = r` exactly.
fn partial_conjugate(
    slopes: &[Vec<f64>],
    intercepts: &[f64],
    j: usize,
    r: f64,
) -> Result<PolyConvexFn> {
    let dim = slopes[0].len() - 1;
    let mut pieces = Vec::new();
    for (k, yk) in slopes.iter().enumerate() {
        if yk[j] == r {
            pieces.push((drop_coord(yk, j), intercepts[k]));
        }
        if yk[j] >= r {
            continue;
        }
        for (l, yl) in slopes.iter().enumerate() {
            if yl[j] <= r {
                continue;
            }
            let lambda = (yl[j] - r) / (yl[j] - yk[j]);
            let slope = drop_coord(yk, j)
                .iter()
                .zip(drop_coord(yl, j))
                .map(|(a, b)| lambda * a + (1.0 - lambda) * b)
                .collect();
            let c = lambda * intercepts[k] + (1.0 - lambda) * intercepts[l];
            pieces.push((slope, c));
        }
    }
    if pieces.is_empty() {
        return Err(Error::Internal(format!(
            "partial conjugate at level {r} is -inf: no pieces straddle it"
        )));
    }
    PolyConvexFn::new(dim, pieces)
}

fn scale(f: &PolyConvexFn, factor: f64) -> PolyConvexFn {
    let pieces = f
        .pieces()
        .map(|(s, c)| (s.iter().map(|v| v * factor).collect(), c * factor))
        .collect();
    PolyConvexFn::new(f.dim(), pieces).expect("scaling keeps shape")
}

/// Builds the c-c surface covering the points where `f` has active pieces in
/// both `c1` and `c2`. Requires `max_{c1} y^j < min_{c2} y^j`. Normal vectors
/// closer than `tol` are merged.
pub fn theorem1_build(
    f: &PolyConvexFn,
    j: usize,
    c1: &[usize],
    c2: &[usize],
    tol: f64,
) -> Result<CcSurface> {
    if j >= f.dim() {
        return Err(Error::InvalidInput(format!(
            "coordinate {j} out of range for dimension {}",
            f.dim()
        )));
    }
    check_piece_indices(f, c1, "C1")?;
    check_piece_indices(f, c2, "C2")?;
    let c1: Vec<usize> = c1.iter().copied().collect::<BTreeSet<_>>().into_iter().collect();
    let c2: Vec<usize> = c2.iter().copied().collect::<BTreeSet<_>>().into_iter().collect();
    let a = c1.iter().map(|&k| f.slope(k)[j]).fold(f64::NEG_INFINITY, f64::max);
    let b = c2.iter().map(|&k| f.slope(k)[j]).fold(f64::INFINITY, f64::min);
    if !(a < b) {
        return Err(Error::GapViolation { j, a, b });
    }
    let r1 = a + (b - a) / 3.0;
    let r2 = a + 2.0 * (b - a) / 3.0;

    // f_C with the conjugate values f*(y_k) as intercepts
    let members: Vec<usize> = c1.iter().chain(&c2).copied().collect();
    let slopes: Vec<Vec<f64>> = members.iter().map(|&k| f.slope(k).to_vec()).collect();
    let intercepts = members
        .iter()
        .map(|&k| f.conjugate_at(f.slope(k)).map(|v| v.min(f.intercept(k))))
        .collect::<Result<Vec<_>>>()?;

    let g_at_r1 = partial_conjugate(&slopes, &intercepts, j, r1)?;
    let g_at_r2 = partial_conjugate(&slopes, &intercepts, j, r2)?;
    let inv = 1.0 / (r2 - r1);
    let g1 = scale(&g_at_r2, inv);
    let g2 = scale(&g_at_r1, inv);

    let mut diffs = Vec::new();
    for &k in &c1 {
        for &l in &c2 {
            diffs.push(sub(f.slope(l), f.slope(k)));
        }
    }
    let mut normal_set: Vec<Vec<f64>> = Vec::new();
    for w in rescale_theta(&diffs, j)? {
        if normal_set.iter().all(|v| dist(v, &w) > tol) {
            normal_set.push(w);
        }
    }
    let mut surf = CcSurface::new(j, g1, g2, normal_set, None)?;
    surf.origin = Some(SurfaceOrigin { c1, c2, r1, r2 });
    Ok(surf)
}

/// Mean-value witness at a point of `{h = 0}`: a level `r in [r1, r2]` and
/// active pieces `k in C1`, `l in C2` of `f_C` whose convex combination has
/// `j`-th coordinate `r`, confirmed by re-solving the one-variable LP
/// `inf_s f_C(s, u) - s r` and matching it against `f_C(z) - z^j r`.
#[derive(Debug, Clone, PartialEq)]
pub struct MeanValueWitness {
    pub r: f64,
    pub k: usize,
    pub l: usize,
    pub lambda: f64,
    pub lp_value: f64,
}

pub fn mean_value_witness(
    f: &PolyConvexFn,
    surf: &CcSurface,
    x: &[f64],
    tol: f64,
) -> Result<Option<MeanValueWitness>> {
    let origin = surf
        .origin
        .as_ref()
        .ok_or_else(|| Error::Precondition("surface has no construction record".into()))?;
    check_dim(surf.dim, x.len())?;
    let j = surf.j;
    let z = surf.to_h_coords(x);
    let members: Vec<usize> = origin.c1.iter().chain(&origin.c2).copied().collect();
    let conj = |k: usize| -> Result<f64> {
        Ok(f.conjugate_at(f.slope(k))?.min(f.intercept(k)))
    };
    let intercepts = members.iter().map(|&k| conj(k)).collect::<Result<Vec<_>>>()?;
    let value_of = |i: usize| dot(&z, f.slope(members[i])) - intercepts[i];
    let fc = (0..members.len()).map(value_of).fold(f64::NEG_INFINITY, f64::max);
    let active: Vec<usize> = (0..members.len()).filter(|&i| value_of(i) >= fc - tol).collect();
    let n1 = origin.c1.len();
    let best_k = active.iter().copied().filter(|&i| i < n1).min_by(|&p, &q| {
        f.slope(members[p])[j].total_cmp(&f.slope(members[q])[j])
    });
    let best_l = active.iter().copied().filter(|&i| i >= n1).max_by(|&p, &q| {
        f.slope(members[p])[j].total_cmp(&f.slope(members[q])[j])
    });
    let (Some(ik), Some(il)) = (best_k, best_l) else {
        return Ok(None);
    };
    let tk = f.slope(members[ik])[j];
    let tl = f.slope(members[il])[j];
    let lo = tk.max(origin.r1);
    let hi = tl.min(origin.r2);
    if lo > hi {
        return Ok(None);
    }
    let r = 0.5 * (lo + hi);
    let lambda = (tl - r) / (tl - tk);

    // one-variable LP: minimize t s.t. t >= s (y_k^j - r) + <u, y_k^{-j}> - c_k
    let u = drop_coord(&z, j);
    let mut lp = LinearProgram::minimize(vec![0.0, 1.0]);
    lp.set_free(0);
    lp.set_free(1);
    for (i, &k) in members.iter().enumerate() {
        let y = f.slope(k);
        let rest = dot(&u, &drop_coord(y, j)) - intercepts[i];
        lp.add(vec![y[j] - r, -1.0], Relation::Le, -rest);
    }
    let lp_value = match lp.solve() {
        LpOutcome::Optimal { value, .. } => value,
        other => return Err(Error::Internal(format!("partial conjugate LP returned {other:?}"))),
    };
    let primal = fc - z[j] * r;
    let scale = 1.0 + fc.abs() + (z[j] * r).abs();
    if (lp_value - primal).abs() > tol * scale {
        return Ok(None);
    }
    Ok(Some(MeanValueWitness {
        r,
        k: members[ik],
        l: members[il],
        lambda,
        lp_value,
    }))
}

/// Clustering of covering compacts. With `radius = None` every compact is a
/// pair of single points, so `diam theta^j(C) = 0 < epsilon`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClusterOptions {
    pub epsilon: f64,
    pub radius: Option<f64>,
}

impl Default for ClusterOptions {
    fn default() -> Self {
        Self {
            epsilon: 1.0,
            radius: None,
        }
    }
}

fn diameter(vs: &[Vec<f64>]) -> f64 {
    let mut d: f64 = 0.0;
    for i in 0..vs.len() {
        for k in i + 1..vs.len() {
            d = d.max(dist(&vs[i], &vs[k]));
        }
    }
    d
}

/// Compacts `(C1, C2)` for each admissible ordered pair. With clustering,
/// each pair is grown to balls of slopes when the grown compacts keep the
/// gap, satisfy `accept` on every difference and have `theta^j` diameter
/// below epsilon; otherwise the singleton pair is used.
fn compacts(
    slopes: &[Vec<f64>],
    pool: &[usize],
    j: usize,
    opts: &ClusterOptions,
    pair_ok: &dyn Fn(usize, usize) -> bool,
) -> Vec<(Vec<usize>, Vec<usize>)> {
    let mut out: Vec<(Vec<usize>, Vec<usize>)> = Vec::new();
    let mut seen = BTreeSet::new();
    for &k in pool {
        for &l in pool {
            if slopes[l][j] - slopes[k][j] <= COORD_EPS || !pair_ok(k, l) {
                continue;
            }
            let mut chosen = (vec![k], vec![l]);
            if let Some(radius) = opts.radius {
                let c1: Vec<usize> = pool
                    .iter()
                    .copied()
                    .filter(|&p| dist(&slopes[p], &slopes[k]) <= radius)
                    .collect();
                let c2: Vec<usize> = pool
                    .iter()
                    .copied()
                    .filter(|&p| dist(&slopes[p], &slopes[l]) <= radius)
                    .collect();
                let a = c1.iter().map(|&p| slopes[p][j]).fold(f64::NEG_INFINITY, f64::max);
                let b = c2.iter().map(|&p| slopes[p][j]).fold(f64::INFINITY, f64::min);
                let all_ok = c1
                    .iter()
                    .all(|&p| c2.iter().all(|&q| slopes[q][j] - slopes[p][j] > COORD_EPS && pair_ok(p, q)));
                if b - a > COORD_EPS && all_ok {
                    let diffs: Vec<Vec<f64>> = c1
                        .iter()
                        .flat_map(|&p| c2.iter().map(move |&q| (p, q)))
                        .map(|(p, q)| {
                            let w = sub(&slopes[q], &slopes[p]);
                            let s = w[j];
                            w.iter().map(|v| v / s).collect()
                        })
                        .collect();
                    if diameter(&diffs) < opts.epsilon {
                        chosen = (c1, c2);
                    }
                }
            }
            if seen.insert(chosen.clone()) {
                out.push(chosen);
            }
        }
    }
    out
}

/// Surfaces covering `Sigma^j_A(∂f)`: one per compact pair drawn from the
/// pieces `A` with distinct `j`-th slope coordinates.
pub fn cover_sigma_j_a(
    f: &PolyConvexFn,
    a_indices: &[usize],
    j: usize,
    opts: &ClusterOptions,
) -> Result<Vec<CcSurface>> {
    if j >= f.dim() {
        return Err(Error::InvalidInput(format!("coordinate {j} out of range")));
    }
    check_piece_indices(f, a_indices, "A")?;
    let pool: Vec<usize> = a_indices.iter().copied().collect::<BTreeSet<_>>().into_iter().collect();
    compacts(f.slopes(), &pool, j, opts, &|_, _| true)
        .into_iter()
        .map(|(c1, c2)| theorem1_build(f, j, &c1, &c2, COORD_EPS))
        .collect()
}

fn monotone_family(
    g: &MonotoneSet,
    j: usize,
    opts: &ClusterOptions,
    want: PairClass,
    iso_tol: f64,
) -> Result<Vec<CcSurface>> {
    if j >= g.dim() {
        return Err(Error::InvalidInput(format!("coordinate {j} out of range")));
    }
    let potential = g.dual_potential();
    let pool: Vec<usize> = (0..g.len()).collect();
    let space = g.space();
    let pair_ok = |k: usize, l: usize| space.pair_class_unchecked(g.point(l), g.point(k), iso_tol) == want;
    compacts(g.points(), &pool, j, opts, &pair_ok)
        .into_iter()
        .map(|(c1, c2)| {
            theorem1_build(&potential, j, &c1, &c2, COORD_EPS)?.with_precompose(space.matrix().clone())
        })
        .collect()
}

/// Surfaces `{h_n(S x) = 0}` covering `Sigma^j_1(P_G)`, built from pairs
/// `(y, z)` with `z^j > y^j` and `S(z - y, z - y) > 0`.
pub fn cover_sigma1(
    g: &MonotoneSet,
    j: usize,
    opts: &ClusterOptions,
    iso_tol: f64,
) -> Result<Vec<CcSurface>> {
    monotone_family(g, j, opts, PairClass::Positive, iso_tol)
}

/// Surfaces covering the closure-type zero-order set, built from isotropic
/// pairs. Every normalized normal `w` must satisfy `0 <= S(w, w) <= delta`
/// up to `iso_tol`.
pub fn cover_sigma0(
    g: &MonotoneSet,
    j: usize,
    delta: f64,
    opts: &ClusterOptions,
    iso_tol: f64,
) -> Result<Vec<CcSurface>> {
    if !(delta > 0.0) {
        return Err(Error::InvalidInput("delta must be positive".into()));
    }
    let surfaces = monotone_family(g, j, opts, PairClass::Isotropic, iso_tol)?;
    let space = g.space();
    for s in &surfaces {
        for w in s.normal_set() {
            let q = space.square(w);
            let slack = iso_tol * norm_sq(w).max(1.0);
            if q < -slack || q > delta + slack {
                return Err(Error::Internal(format!(
                    "normal with scalar square {q:e} outside [0, {delta}]"
                )));
            }
        }
    }
    Ok(surfaces)
}

/// The hyperplane `{x : S(x - anchor, direction) = 0}` through an isotropic
/// pair `(y, z)` with `anchor = z`, `direction = y - z`.
#[derive(Debug, Clone, PartialEq)]
pub struct IsotropicHyperplane {
    pub anchor: Vec<f64>,
    pub direction: Vec<f64>,
    /// Indices `(y, z)` into the monotone set.
    pub pair: (usize, usize),
    /// Euclidean normal `S * direction`.
    pub normal: Vec<f64>,
    /// `S(w, w)` for `w = direction / direction^j`.
    pub normalized_square: f64,
    pub j: usize,
}

impl IsotropicHyperplane {
    /// Euclidean distance from `x` to the hyperplane.
    pub fn residual(&self, x: &[f64]) -> f64 {
        dot(&sub(x, &self.anchor), &self.normal).abs() / norm(&self.normal)
    }
}

/// Isotropic hyperplanes covering the closure-type zero-order set when the
/// index is one.
pub fn cover_sigma0_lines(g: &MonotoneSet, j: usize, iso_tol: f64) -> Result<Vec<IsotropicHyperplane>> {
    let space = g.space();
    if space.index() != 1 {
        return Err(Error::Precondition(format!(
            "isotropic hyperplane covering needs index 1, got {}",
            space.index()
        )));
    }
    if j >= g.dim() {
        return Err(Error::InvalidInput(format!("coordinate {j} out of range")));
    }
    let mut out: Vec<IsotropicHyperplane> = Vec::new();
    let mut keys: Vec<(Vec<f64>, f64)> = Vec::new();
    for iy in 0..g.len() {
        for iz in 0..g.len() {
            let (y, z) = (g.point(iy), g.point(iz));
            if y[j] - z[j] <= COORD_EPS
                || space.pair_class_unchecked(y, z, iso_tol) != PairClass::Isotropic
            {
                continue;
            }
            let direction = sub(y, z);
            let normal = space.apply(&direction);
            let nn = norm(&normal);
            let mut unit: Vec<f64> = normal.iter().map(|v| v / nn).collect();
            if let Some(first) = unit.iter().copied().find(|v| v.abs() > 1e-12) {
                if first < 0.0 {
                    unit.iter_mut().for_each(|v| *v = -*v);
                }
            }
            let offset = dot(&unit, z);
            let dup = keys.iter().any(|(u, o)| {
                dist(u, &unit) <= HYPERPLANE_DEDUP && (o - offset).abs() <= HYPERPLANE_DEDUP
            });
            if dup {
                continue;
            }
            keys.push((unit, offset));
            let w: Vec<f64> = direction.iter().map(|v| v / direction[j]).collect();
            out.push(IsotropicHyperplane {
                anchor: z.to_vec(),
                direction,
                pair: (iy, iz),
                normal,
                normalized_square: space.square(&w),
                j,
            });
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cover {
    Surface(CcSurface),
    Hyperplane(IsotropicHyperplane),
}

impl Cover {
    pub fn residual(&self, x: &[f64]) -> f64 {
        match self {
            Cover::Surface(s) => s.h(&s.to_h_coords(x)).abs(),
            Cover::Hyperplane(p) => p.residual(x),
        }
    }
}

/// Which singular points a covering family is expected to contain.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PointFilter {
    All,
    /// Some strictly positive witness pair differs in coordinate `j`.
    Sigma1(usize),
    /// Some isotropic witness pair differs in coordinate `j`.
    Sigma0Bar(usize),
}

impl PointFilter {
    pub fn matches(&self, p: &SingularPoint) -> bool {
        match *self {
            PointFilter::All => true,
            PointFilter::Sigma1(j) => p.in_sigma1(j),
            PointFilter::Sigma0Bar(j) => p.in_sigma0_bar(j),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct CoverReport {
    pub total_points: usize,
    pub covered: usize,
    /// Largest over matched points of the smallest residual; `+inf` when a
    /// matched point has no covering candidate at all.
    pub max_residual: f64,
    pub normal_checks: usize,
    pub normal_failures: usize,
}

impl CoverReport {
    pub fn all_covered(&self) -> bool {
        self.covered == self.total_points && self.normal_failures == 0
    }

    pub fn merge(&mut self, other: &CoverReport) {
        self.total_points += other.total_points;
        self.covered += other.covered;
        self.max_residual = self.max_residual.max(other.max_residual);
        self.normal_checks += other.normal_checks;
        self.normal_failures += other.normal_failures;
    }
}

/// Counts how many filtered points lie within `tol` of some cover and checks
/// the normal condition at a smooth surface point next to each covered one.
pub fn verify_coverage(
    covers: &[Cover],
    points: &[SingularPoint],
    filter: PointFilter,
    tol: f64,
) -> CoverReport {
    let mut report = CoverReport::default();
    for p in points.iter().filter(|p| filter.matches(p)) {
        report.total_points += 1;
        let best = covers
            .iter()
            .map(|c| (c.residual(&p.location), c))
            .min_by(|a, b| a.0.total_cmp(&b.0));
        let Some((residual, cover)) = best else {
            report.max_residual = f64::INFINITY;
            continue;
        };
        report.max_residual = report.max_residual.max(residual);
        if residual > tol {
            continue;
        }
        report.covered += 1;
        match normal_check_near(cover, &p.location) {
            Some(true) => report.normal_checks += 1,
            Some(false) => {
                report.normal_checks += 1;
                report.normal_failures += 1;
            }
            None => {}
        }
    }
    report
}

/// `None` when no smooth sample was found near `x`.
fn normal_check_near(cover: &Cover, x: &[f64]) -> Option<bool> {
    match cover {
        Cover::Hyperplane(p) => {
            let w: Vec<f64> = p.direction.iter().map(|v| v / p.direction[p.j]).collect();
            Some(p.normalized_square.abs() <= 1e-9 * norm_sq(&w).max(1.0))
        }
        Cover::Surface(s) => {
            let z = s.to_h_coords(x);
            let u = drop_coord(&z, s.j);
            let mut candidates = vec![u.clone()];
            for step in [1e-3, 1e-2, 5e-2] {
                for i in 0..u.len() {
                    for sign in [1.0, -1.0] {
                        let mut v = u.clone();
                        v[i] += sign * step;
                        candidates.push(v);
                    }
                }
            }
            candidates.into_iter().find_map(|v| {
                match gradient_check_at(s, &s.lift(&v), GRADIENT_FD_STEP, GRADIENT_TOL) {
                    GradientCheck::Pass => Some(true),
                    GradientCheck::Fail => Some(false),
                    GradientCheck::Nonsmooth => None,
                }
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pseudo_space::ScalarProduct;

    fn hinge() -> PolyConvexFn {
        PolyConvexFn::new(2, vec![(vec![0.0, 0.0], 0.0), (vec![1.0, 1.0], 1.0)]).unwrap()
    }

    fn v_fn() -> PolyConvexFn {
        PolyConvexFn::new(
            2,
            vec![(vec![0.0, -1.0], 0.0), (vec![0.0, 1.0], 0.0), (vec![2.0, 0.0], 0.0)],
        )
        .unwrap()
    }

    #[test]
    fn rescale_examples() {
        assert_eq!(rescale_theta(&[vec![2.0, -1.0]], 0).unwrap(), vec![vec![1.0, -0.5]]);
        assert_eq!(rescale_theta(&[vec![1.0, 3.0]], 0).unwrap(), vec![vec![1.0, 3.0]]);
        assert_eq!(
            rescale_theta(&[vec![2.0, 2.0], vec![4.0, 0.0]], 0).unwrap(),
            vec![vec![1.0, 1.0], vec![1.0, 0.0]]
        );
        assert!(rescale_theta(&[vec![0.0, 1.0]], 0).is_err());
        assert!(rescale_theta(&[vec![-1.0, 1.0]], 0).is_err());
    }

    #[test]
    fn hyperplane_surface() {
        let s = theorem1_build(&hinge(), 0, &[0], &[1], 1e-12).unwrap();
        // h(x) = x1 + x2 - 1
        for x in [[0.0, 0.0], [2.0, -3.0], [0.25, 4.0]] {
            let h = eval_surface(&s, &x).unwrap();
            assert!((h - (x[0] + x[1] - 1.0)).abs() < 1e-12, "{x:?}");
        }
        assert_eq!(s.normal_set(), &[vec![1.0, 1.0]]);
        assert_eq!(
            surface_gradient_check(&s, &[0.3, 0.7], 1e-6, 1e-6).unwrap(),
            GradientCheck::Pass
        );
    }

    #[test]
    fn v_surface() {
        let s = theorem1_build(&v_fn(), 0, &[0, 1], &[2], 1e-12).unwrap();
        let origin = s.origin().unwrap();
        assert!((origin.r1 - 2.0 / 3.0).abs() < 1e-15 && (origin.r2 - 4.0 / 3.0).abs() < 1e-15);
        // h(s, u) = s - |u|/2
        for x in [[1.0, 2.0], [0.0, 0.0], [3.0, -1.5], [-1.0, 0.25]] {
            let h = eval_surface(&s, &x).unwrap();
            assert!((h - (x[0] - x[1].abs() / 2.0)).abs() < 1e-12, "{x:?}");
        }
        assert!(eval_surface(&s, &[1.0, 2.0]).unwrap().abs() < 1e-12);
        let mut normals = s.normal_set().to_vec();
        normals.sort_by(|a, b| a[1].total_cmp(&b[1]));
        assert_eq!(normals, vec![vec![1.0, -0.5], vec![1.0, 0.5]]);
        assert_eq!(surface_gradient_check(&s, &[1.0, 2.0], 1e-6, 1e-6).unwrap(), GradientCheck::Pass);
        assert_eq!(surface_gradient_check(&s, &[0.0, 0.0], 1e-6, 1e-6).unwrap(), GradientCheck::Nonsmooth);
    }

    #[test]
    fn equal_g_gives_coordinate() {
        let g = PolyConvexFn::new(1, vec![(vec![1.0], 0.0), (vec![-2.0], 1.0)]).unwrap();
        let s = CcSurface::new(1, g.clone(), g, vec![], None).unwrap();
        assert_eq!(eval_surface(&s, &[4.0, -7.0]).unwrap(), -7.0);
        let m = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]);
        let s = s.with_precompose(m).unwrap();
        assert_eq!(eval_surface(&s, &[4.0, -7.0]).unwrap(), 4.0);
    }

    #[test]
    fn normal_set_must_be_unit_in_j() {
        let g = PolyConvexFn::new(1, vec![(vec![0.0], 0.0)]).unwrap();
        assert!(CcSurface::new(0, g.clone(), g, vec![vec![2.0, 1.0]], None).is_err());
    }

    #[test]
    fn gap_violation() {
        assert!(matches!(
            theorem1_build(&hinge(), 0, &[1], &[0], 1e-12),
            Err(Error::GapViolation { .. })
        ));
        assert!(matches!(
            theorem1_build(&hinge(), 0, &[0], &[0], 1e-12),
            Err(Error::GapViolation { .. })
        ));
    }

    #[test]
    fn symmetric_pieces_give_symmetry_plane() {
        // f even in x1: C2 is the reflection of C1, equal intercepts
        let f = PolyConvexFn::new(2, vec![(vec![-1.0, 0.5], 0.3), (vec![1.0, 0.5], 0.3)]).unwrap();
        let s = theorem1_build(&f, 0, &[0], &[1], 1e-12).unwrap();
        for u in [-2.0, 0.0, 3.5] {
            assert!(eval_surface(&s, &[0.0, u]).unwrap().abs() < 1e-12);
        }
    }

    #[test]
    fn dominated_piece_uses_conjugate_value() {
        // piece 2 (slope 1, intercept 5) never active, yet slope 1 lies in
        // the subdifferential [0, 2] at x = 0; f*(1) = 0
        let f = PolyConvexFn::new(1, vec![(vec![0.0], 0.0), (vec![2.0], 0.0), (vec![1.0], 5.0)]).unwrap();
        let s = theorem1_build(&f, 0, &[0], &[2], 1e-12).unwrap();
        assert!(eval_surface(&s, &[0.0]).unwrap().abs() < 1e-12);
    }

    #[test]
    fn cover_sigma_j_a_examples() {
        let opts = ClusterOptions::default();
        let s = cover_sigma_j_a(&hinge(), &[0, 1], 0, &opts).unwrap();
        assert_eq!(s.len(), 1);
        assert!(eval_surface(&s[0], &[0.5, 0.5]).unwrap().abs() < 1e-12);

        let same_j = PolyConvexFn::new(2, vec![(vec![1.0, 0.0], 0.0), (vec![1.0, 2.0], 1.0)]).unwrap();
        assert!(cover_sigma_j_a(&same_j, &[0, 1], 0, &opts).unwrap().is_empty());

        let three = PolyConvexFn::new(
            2,
            vec![(vec![0.0, 0.0], 0.0), (vec![1.0, 0.0], 0.0), (vec![2.0, 1.0], 0.0)],
        )
        .unwrap();
        assert_eq!(cover_sigma_j_a(&three, &[0, 1, 2], 0, &opts).unwrap().len(), 3);
    }

    #[test]
    fn clustered_compacts_are_multi_point() {
        let f = PolyConvexFn::new(
            2,
            vec![
                (vec![0.0, 0.0], 0.0),
                (vec![0.05, 0.02], 0.1),
                (vec![2.0, 1.0], 0.0),
                (vec![2.02, 1.03], 0.2),
            ],
        )
        .unwrap();
        let opts = ClusterOptions { epsilon: 0.2, radius: Some(0.1) };
        let surfs = cover_sigma_j_a(&f, &[0, 1, 2, 3], 0, &opts).unwrap();
        assert!(surfs.iter().any(|s| {
            let o = s.origin().unwrap();
            o.c1.len() == 2 && o.c2.len() == 2
        }));
    }

    #[test]
    fn sigma1_standard_pair() {
        let g = MonotoneSet::new(ScalarProduct::standard(1), vec![vec![0.0, 0.0], vec![1.0, 1.0]], 0.0).unwrap();
        let s = cover_sigma1(&g, 0, &ClusterOptions::default(), 1e-9).unwrap();
        assert_eq!(s.len(), 1);
        for x in [[0.5, 0.5], [3.0, -2.0], [-1.0, 2.0]] {
            assert!(eval_surface(&s[0], &x).unwrap().abs() < 1e-12);
        }
        assert!((eval_surface(&s[0], &[1.0, 1.0]).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn sigma1_empty_for_isotropic_chain() {
        let pts = (0..3).map(|i| vec![i as f64, i as f64]).collect();
        let g = MonotoneSet::new(ScalarProduct::canonical(2, 1), pts, 0.0).unwrap();
        assert!(cover_sigma1(&g, 0, &ClusterOptions::default(), 1e-9).unwrap().is_empty());
        let single = MonotoneSet::new(ScalarProduct::identity(2), vec![vec![1.0, 2.0]], 0.0).unwrap();
        assert!(cover_sigma1(&single, 0, &ClusterOptions::default(), 1e-9).unwrap().is_empty());
    }

    #[test]
    fn sigma0_chain() {
        let pts = (0..3).map(|i| vec![i as f64, i as f64]).collect();
        let g = MonotoneSet::new(ScalarProduct::canonical(2, 1), pts, 0.0).unwrap();
        let s = cover_sigma0(&g, 0, 0.1, &ClusterOptions::default(), 1e-9).unwrap();
        assert_eq!(s.len(), 3);
        for surf in &s {
            for t in [-2.0, 0.5, 1.0, 4.0] {
                assert!(eval_surface(surf, &[t, t]).unwrap().abs() < 1e-12);
            }
            assert!(eval_surface(surf, &[1.0, 0.0]).unwrap().abs() > 0.1);
        }
        let lines = cover_sigma0_lines(&g, 0, 1e-9).unwrap();
        assert_eq!(lines.len(), 1);
        assert!(lines[0].residual(&[3.0, 3.0]) < 1e-12);
        assert!(cover_sigma0(&g, 0, 0.0, &ClusterOptions::default(), 1e-9).is_err());
    }

    #[test]
    fn lines_need_index_one() {
        let g = MonotoneSet::new(ScalarProduct::identity(2), vec![vec![0.0, 0.0]], 0.0).unwrap();
        assert!(matches!(cover_sigma0_lines(&g, 0, 1e-9), Err(Error::Precondition(_))));
    }

    #[test]
    fn standard_form_lines_are_axis_parallel() {
        // isotropic pairs of the standard form differ along an axis
        let g = MonotoneSet::new(
            ScalarProduct::standard(1),
            vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![1.0, 2.0]],
            0.0,
        )
        .unwrap();
        let l1 = cover_sigma0_lines(&g, 0, 1e-9).unwrap();
        assert_eq!(l1.len(), 1);
        // x2 = 0
        assert!(l1[0].residual(&[17.0, 0.0]) < 1e-12);
        assert!(l1[0].residual(&[0.0, 1.0]) > 0.5);
        let l2 = cover_sigma0_lines(&g, 1, 1e-9).unwrap();
        assert_eq!(l2.len(), 1);
        // x1 = 1
        assert!(l2[0].residual(&[1.0, -9.0]) < 1e-12);
    }

    #[test]
    fn mean_value_on_v_surface() {
        let f = v_fn();
        let s = theorem1_build(&f, 0, &[0, 1], &[2], 1e-12).unwrap();
        for u in [-2.0, -0.3, 0.0, 0.7, 1.5] {
            let x = s.lift(&[u]);
            let w = mean_value_witness(&f, &s, &x, 1e-9).unwrap().expect("witness");
            assert!(w.r >= 2.0 / 3.0 - 1e-12 && w.r <= 4.0 / 3.0 + 1e-12);
            let yk = f.slope(w.k)[0];
            let yl = f.slope(w.l)[0];
            assert!((w.lambda * yk + (1.0 - w.lambda) * yl - w.r).abs() < 1e-12);
        }
    }

    #[test]
    fn verify_empty_and_offset() {
        let r = verify_coverage(&[], &[], PointFilter::All, 1e-8);
        assert_eq!((r.total_points, r.covered, r.max_residual), (0, 0, 0.0));

        let s = theorem1_build(&hinge(), 0, &[0], &[1], 1e-12).unwrap();
        let g = MonotoneSet::new(ScalarProduct::identity(2), vec![vec![-1.0, 0.0], vec![1.0, 0.0]], 0.0).unwrap();
        let mut p = crate::singularity::classify_point(&g, &[0.0, 0.0], 1e-9).unwrap().unwrap();
        p.location = vec![0.6, 0.5];
        let r = verify_coverage(&[Cover::Surface(s)], &[p], PointFilter::All, 1e-8);
        assert_eq!(r.total_points, 1);
        assert_eq!(r.covered, 0);
        assert!((r.max_residual - 0.1).abs() < 1e-12);
    }
}
