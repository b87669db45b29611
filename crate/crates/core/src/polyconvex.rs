//! Polyhedral convex functions `f(x) = max_k <x, y_k> - c_k`.
//!
//! The slopes `y_k` together with the intercepts `c_k` describe `f` through
//! finitely many affine minorants. Restricting to a subset of pieces gives
//! the sup over a subset of slopes, the conjugate is a small LP over the
//! convex hull of the slopes, and exposure of a slope (being the unique
//! maximizer somewhere) is decided by a margin LP.

use std::collections::BTreeSet;

use crate::error::{check_dim, Error, Result};
use crate::lp::{LinearProgram, LpOutcome, Relation};
use crate::vecops::dot;

/// Margin above which a piece counts as exposed.
pub const EXPOSURE_MARGIN: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct PolyConvexFn {
    dim: usize,
    slopes: Vec<Vec<f64>>,
    intercepts: Vec<f64>,
}

/// Pieces attaining the maximum of a (possibly restricted) polyhedral
/// function within an activity tolerance.
#[derive(Debug, Clone, PartialEq)]
pub struct ActiveSet {
    pub indices: Vec<usize>,
    pub value: f64,
}

impl ActiveSet {
    pub fn contains(&self, k: usize) -> bool {
        self.indices.binary_search(&k).is_ok()
    }
}

impl PolyConvexFn {
    /// Pieces are `(slope, intercept)`; piece `k` is `x -> <x, slope> - intercept`.
    /// A zero `dim` is allowed and yields a constant function.
    pub fn new(dim: usize, pieces: Vec<(Vec<f64>, f64)>) -> Result<Self> {
        if pieces.is_empty() {
            return Err(Error::InvalidInput("polyhedral function needs at least one piece".into()));
        }
        let mut slopes = Vec::with_capacity(pieces.len());
        let mut intercepts = Vec::with_capacity(pieces.len());
        for (slope, c) in pieces {
            check_dim(dim, slope.len())?;
            if !c.is_finite() || slope.iter().any(|v| !v.is_finite()) {
                return Err(Error::InvalidInput("non-finite piece data".into()));
            }
            slopes.push(slope);
            intercepts.push(c);
        }
        Ok(Self {
            dim,
            slopes,
            intercepts,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.slopes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.slopes.is_empty()
    }

    pub fn slope(&self, k: usize) -> &[f64] {
        &self.slopes[k]
    }

    pub fn slopes(&self) -> &[Vec<f64>] {
        &self.slopes
    }

    pub fn intercept(&self, k: usize) -> f64 {
        self.intercepts[k]
    }

    pub fn intercepts(&self) -> &[f64] {
        &self.intercepts
    }

    pub fn pieces(&self) -> impl Iterator<Item = (&[f64], f64)> + '_ {
        self.slopes
            .iter()
            .map(Vec::as_slice)
            .zip(self.intercepts.iter().copied())
    }

    pub fn piece_value(&self, k: usize, x: &[f64]) -> f64 {
        dot(x, &self.slopes[k]) - self.intercepts[k]
    }

    pub fn eval(&self, x: &[f64]) -> Result<f64> {
        check_dim(self.dim, x.len())?;
        Ok(self.eval_unchecked(x))
    }

    pub(crate) fn eval_unchecked(&self, x: &[f64]) -> f64 {
        (0..self.len())
            .map(|k| self.piece_value(k, x))
            .fold(f64::NEG_INFINITY, f64::max)
    }

    fn check_indices(&self, subset: &[usize]) -> Result<()> {
        if subset.is_empty() {
            return Err(Error::InvalidInput("piece subset is empty".into()));
        }
        if let Some(&k) = subset.iter().find(|&&k| k >= self.len()) {
            return Err(Error::InvalidInput(format!(
                "piece index {k} out of range (function has {} pieces)",
                self.len()
            )));
        }
        Ok(())
    }

    /// `Arg_C(x)`: pieces of `subset` attaining `max_{k in subset}` within `tol`.
    pub fn arg_set(&self, subset: &[usize], x: &[f64], tol: f64) -> Result<ActiveSet> {
        self.check_indices(subset)?;
        check_dim(self.dim, x.len())?;
        Ok(self.arg_set_unchecked(subset.iter().copied(), x, tol))
    }

    pub(crate) fn arg_set_unchecked(
        &self,
        subset: impl Iterator<Item = usize> + Clone,
        x: &[f64],
        tol: f64,
    ) -> ActiveSet {
        let value = subset
            .clone()
            .map(|k| self.piece_value(k, x))
            .fold(f64::NEG_INFINITY, f64::max);
        let indices: BTreeSet<usize> = subset
            .filter(|&k| self.piece_value(k, x) >= value - tol)
            .collect();
        ActiveSet {
            indices: indices.into_iter().collect(),
            value,
        }
    }

    /// Active set over all pieces.
    pub fn active(&self, x: &[f64], tol: f64) -> Result<ActiveSet> {
        check_dim(self.dim, x.len())?;
        Ok(self.arg_set_unchecked(0..self.len(), x, tol))
    }

    /// Slopes of the active pieces at `x`; `∂f(x)` is their convex hull.
    pub fn subdifferential(&self, x: &[f64], tol: f64) -> Result<Vec<Vec<f64>>> {
        let act = self.active(x, tol)?;
        Ok(act.indices.iter().map(|&k| self.slopes[k].clone()).collect())
    }

    /// `f*(y) = min { sum l_k c_k : l >= 0, sum l_k = 1, sum l_k y_k = y }`,
    /// `+inf` when `y` is outside the convex hull of the slopes.
    pub fn conjugate_at(&self, y: &[f64]) -> Result<f64> {
        check_dim(self.dim, y.len())?;
        let n = self.len();
        let mut lp = LinearProgram::minimize(self.intercepts.clone());
        lp.add(vec![1.0; n], Relation::Eq, 1.0);
        for i in 0..self.dim {
            let row = self.slopes.iter().map(|s| s[i]).collect();
            lp.add(row, Relation::Eq, y[i]);
        }
        match lp.solve() {
            LpOutcome::Optimal { value, .. } => Ok(value),
            LpOutcome::Infeasible => Ok(f64::INFINITY),
            LpOutcome::Unbounded => Err(Error::Internal(
                "conjugate LP unbounded over a simplex".into(),
            )),
        }
    }

    /// Fenchel equality `f(x) + f*(y) = <x, y>` within `tol`.
    pub fn fenchel_check(&self, x: &[f64], y: &[f64], tol: f64) -> Result<bool> {
        check_dim(self.dim, x.len())?;
        let conj = self.conjugate_at(y)?;
        if !conj.is_finite() {
            return Err(Error::Precondition(
                "y lies outside the convex hull of the slopes (f*(y) = +inf)".into(),
            ));
        }
        Ok((self.eval_unchecked(x) + conj - dot(x, y)).abs() <= tol)
    }

    /// The function built from the kept pieces only; pointwise below `self`.
    pub fn restricted(&self, keep: &[usize]) -> Result<Self> {
        self.check_indices(keep)?;
        let kept: BTreeSet<usize> = keep.iter().copied().collect();
        Ok(Self {
            dim: self.dim,
            slopes: kept.iter().map(|&k| self.slopes[k].clone()).collect(),
            intercepts: kept.iter().map(|&k| self.intercepts[k]).collect(),
        })
    }

    /// Same slopes with each intercept replaced by the conjugate value
    /// `f*(y_k) <= c_k`. Pieces that are ever active keep their intercept.
    pub fn tightened(&self) -> Result<Self> {
        let intercepts = self
            .slopes
            .iter()
            .zip(&self.intercepts)
            .map(|(s, &c)| self.conjugate_at(s).map(|v| v.min(c)))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            dim: self.dim,
            slopes: self.slopes.clone(),
            intercepts,
        })
    }

    /// Largest margin `delta <= 1` such that piece `k` beats every other piece
    /// by `delta` at some point.
    pub fn exposure_margin(&self, k: usize) -> Result<f64> {
        self.check_indices(&[k])?;
        let d = self.dim;
        // variables: x (d, free), delta (free)
        let mut obj = vec![0.0; d + 1];
        obj[d] = 1.0;
        let mut lp = LinearProgram::maximize(obj);
        for i in 0..=d {
            lp.set_free(i);
        }
        for l in (0..self.len()).filter(|&l| l != k) {
            let mut row: Vec<f64> = (0..d).map(|i| self.slopes[l][i] - self.slopes[k][i]).collect();
            row.push(1.0);
            lp.add(row, Relation::Le, self.intercepts[l] - self.intercepts[k]);
        }
        let mut cap = vec![0.0; d + 1];
        cap[d] = 1.0;
        lp.add(cap, Relation::Le, 1.0);
        match lp.solve() {
            LpOutcome::Optimal { value, .. } => Ok(value),
            other => Err(Error::Internal(format!("exposure LP returned {other:?}"))),
        }
    }

    /// Pieces that are the strict unique maximizer at some point; their slopes
    /// are the gradients attained by `f`.
    pub fn exposed_slopes(&self) -> Result<BTreeSet<usize>> {
        let mut out = BTreeSet::new();
        for k in 0..self.len() {
            if self.exposure_margin(k)? > EXPOSURE_MARGIN {
                out.insert(k);
            }
        }
        Ok(out)
    }
}

/// Whether `point` is within `tol` (max-norm) of the convex hull of
/// `generators`.
pub fn hull_membership(point: &[f64], generators: &[Vec<f64>], tol: f64) -> Result<bool> {
    if generators.is_empty() {
        return Err(Error::InvalidInput("no generators".into()));
    }
    let d = point.len();
    for g in generators {
        check_dim(d, g.len())?;
    }
    let n = generators.len();
    // variables: lambda (n), t
    let mut obj = vec![0.0; n + 1];
    obj[n] = 1.0;
    let mut lp = LinearProgram::minimize(obj);
    let mut simplex = vec![1.0; n + 1];
    simplex[n] = 0.0;
    lp.add(simplex, Relation::Eq, 1.0);
    for i in 0..d {
        let mut row: Vec<f64> = generators.iter().map(|g| g[i]).collect();
        row.push(-1.0);
        lp.add(row.clone(), Relation::Le, point[i]);
        row[n] = 1.0;
        lp.add(row, Relation::Ge, point[i]);
    }
    match lp.solve() {
        LpOutcome::Optimal { value, .. } => Ok(value <= tol),
        other => Err(Error::Internal(format!("hull LP returned {other:?}"))),
    }
}
