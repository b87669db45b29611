//! Singular points of projections onto monotone sets.
//!
//! A point `x` is singular when `P_G(x)` has at least two elements. Each pair
//! of minimizers is a witness; the point has order 0 when every witness pair
//! is isotropic and order 1 when some pair has a strictly positive scalar
//! square.

use std::collections::{BTreeSet, HashSet};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{check_dim, Error, Result};
use crate::monotone::MonotoneSet;
use crate::polyconvex::PolyConvexFn;
use crate::pseudo_space::PairClass;
use crate::vecops::{complement_basis, dot, norm, norm_sq, sub};
use crate::COORD_EPS;

const DEDUP_GRID: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Order {
    Zero,
    One,
}

impl Order {
    pub fn as_u8(self) -> u8 {
        match self {
            Order::Zero => 0,
            Order::One => 1,
        }
    }
}

/// A pair of minimizers `(a, b)` (indices into `G`, `a < b`).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Witness {
    pub a: usize,
    pub b: usize,
    pub class: PairClass,
    /// Coordinates where the two points differ by more than `1e-12`.
    pub differs: BTreeSet<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SingularPoint {
    pub location: Vec<f64>,
    pub witnesses: Vec<Witness>,
    pub j_indices: BTreeSet<usize>,
    pub order: Order,
}

impl SingularPoint {
    /// Some strictly positive witness pair differs in coordinate `j`.
    pub fn in_sigma1(&self, j: usize) -> bool {
        self.witnesses
            .iter()
            .any(|w| w.class == PairClass::Positive && w.differs.contains(&j))
    }

    /// Some isotropic witness pair differs in coordinate `j` (the closure-type
    /// zero-order set, which may include order-1 points).
    pub fn in_sigma0_bar(&self, j: usize) -> bool {
        self.witnesses
            .iter()
            .any(|w| w.class == PairClass::Isotropic && w.differs.contains(&j))
    }
}

fn differing_coords(y: &[f64], z: &[f64]) -> BTreeSet<usize> {
    y.iter()
        .zip(z)
        .enumerate()
        .filter(|(_, (a, b))| (*a - *b).abs() > COORD_EPS)
        .map(|(j, _)| j)
        .collect()
}

/// `None` when `P_G(x)` is a single point.
pub fn classify_point(g: &MonotoneSet, x: &[f64], tol: f64) -> Result<Option<SingularPoint>> {
    classify_point_with(g, x, tol, tol)
}

/// [`classify_point`] with separate projection-tie and isotropy tolerances.
pub fn classify_point_with(
    g: &MonotoneSet,
    x: &[f64],
    tie_tol: f64,
    iso_tol: f64,
) -> Result<Option<SingularPoint>> {
    let proj = g.project(x, tie_tol)?;
    if proj.minimizers.len() < 2 {
        return Ok(None);
    }
    let space = g.space();
    let mut witnesses = Vec::new();
    let mut j_indices = BTreeSet::new();
    for (ia, &a) in proj.minimizers.iter().enumerate() {
        for &b in &proj.minimizers[ia + 1..] {
            let (y, z) = (g.point(a), g.point(b));
            let differs = differing_coords(y, z);
            j_indices.extend(differs.iter().copied());
            witnesses.push(Witness {
                a,
                b,
                class: space.pair_class_unchecked(y, z, iso_tol),
                differs,
            });
        }
    }
    let order = if witnesses.iter().any(|w| w.class == PairClass::Positive) {
        Order::One
    } else {
        Order::Zero
    };
    Ok(Some(SingularPoint {
        location: x.to_vec(),
        witnesses,
        j_indices,
        order,
    }))
}

/// Points of `xs` where two pieces of `A` differing in coordinate `j` both
/// attain `f(x)` within `tol`.
pub fn sigma_j_a(
    f: &PolyConvexFn,
    a_indices: &[usize],
    j: usize,
    xs: &[Vec<f64>],
    tol: f64,
) -> Result<Vec<Vec<f64>>> {
    if j >= f.dim() {
        return Err(Error::InvalidInput(format!(
            "coordinate {j} out of range for dimension {}",
            f.dim()
        )));
    }
    let mut out = Vec::new();
    for x in xs {
        let full = f.eval(x)?;
        let act = f.arg_set(a_indices, x, tol)?;
        let attaining: Vec<usize> = act
            .indices
            .iter()
            .copied()
            .filter(|&k| f.piece_value(k, x) >= full - tol)
            .collect();
        let coords: Vec<f64> = attaining.iter().map(|&k| f.slope(k)[j]).collect();
        let lo = coords.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = coords.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if coords.len() >= 2 && hi - lo > COORD_EPS {
            out.push(x.clone());
        }
    }
    Ok(out)
}

/// Samples the tie hyperplane `S(x, y - z) = (S(y,y) - S(z,z))/2` of every
/// pair of `G` inside a ball of `radius` around the pair midpoint, and keeps
/// the singular samples. Results are ordered by (pair, sample) and
/// deduplicated on a `1e-9` grid.
pub fn candidate_singular_points(
    g: &MonotoneSet,
    samples_per_pair: usize,
    radius: f64,
    seed: u64,
    tol: f64,
) -> Result<Vec<SingularPoint>> {
    if samples_per_pair == 0 {
        return Err(Error::InvalidInput("samples_per_pair must be at least 1".into()));
    }
    if !(radius >= 0.0) {
        return Err(Error::InvalidInput("radius must be non-negative".into()));
    }
    let d = g.dim();
    let space = g.space();
    let mut seen: HashSet<Vec<i64>> = HashSet::new();
    let mut out = Vec::new();
    let mut pair_id: u64 = 0;
    for i in 0..g.len() {
        for k in i + 1..g.len() {
            pair_id += 1;
            let (y, z) = (g.point(i), g.point(k));
            let normal = space.apply(&sub(y, z));
            let nn = norm(&normal);
            if nn == 0.0 {
                continue;
            }
            let offset = 0.5 * (space.square(y) - space.square(z));
            let unit: Vec<f64> = normal.iter().map(|v| v / nn).collect();
            let basis = complement_basis(&unit);
            let mid: Vec<f64> = y.iter().zip(z).map(|(a, b)| 0.5 * (a + b)).collect();
            let mut rng = ChaCha8Rng::seed_from_u64(
                seed ^ pair_id.wrapping_mul(0x9E37_79B9_7F4A_7C15),
            );
            for s in 0..samples_per_pair {
                let mut x = mid.clone();
                if s > 0 && !basis.is_empty() {
                    let dir = random_direction(&mut rng, basis.len());
                    let r = radius * rng.gen::<f64>().powf(1.0 / basis.len() as f64);
                    for (c, b) in dir.iter().zip(&basis) {
                        for (xi, bi) in x.iter_mut().zip(b) {
                            *xi += r * c * bi;
                        }
                    }
                }
                // snap back onto the hyperplane
                let shift = (offset - dot(&x, &normal)) / (nn * nn);
                for (xi, ni) in x.iter_mut().zip(&normal) {
                    *xi += shift * ni;
                }
                if let Some(p) = classify_point(g, &x, tol)? {
                    let key: Vec<i64> = x.iter().map(|v| (v / DEDUP_GRID).round() as i64).collect();
                    if seen.insert(key) {
                        out.push(p);
                    }
                }
            }
        }
    }
    debug_assert!(out.iter().all(|p| p.location.len() == d));
    Ok(out)
}

fn random_direction(rng: &mut ChaCha8Rng, k: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..k).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let n2 = norm_sq(&v);
        if n2 > 1e-4 && n2 <= 1.0 {
            let n = n2.sqrt();
            return v.iter().map(|x| x / n).collect();
        }
    }
}

/// Re-derives a point's classification with the brute-force projection and
/// checks the invariants of [`SingularPoint`].
pub fn reverify(g: &MonotoneSet, p: &SingularPoint, tol: f64) -> Result<bool> {
    check_dim(g.dim(), p.location.len())?;
    let proj = g.project(&p.location, tol)?;
    let ok_witnesses = !p.witnesses.is_empty()
        && p.witnesses
            .iter()
            .all(|w| proj.minimizers.contains(&w.a) && proj.minimizers.contains(&w.b));
    let positive = p.witnesses.iter().any(|w| w.class == PairClass::Positive);
    let order_ok = (p.order == Order::One) == positive;
    Ok(ok_witnesses && order_ok)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pseudo_space::ScalarProduct;

    fn euclid_pair() -> MonotoneSet {
        MonotoneSet::new(
            ScalarProduct::identity(2),
            vec![vec![-1.0, 0.0], vec![1.0, 0.0]],
            0.0,
        )
        .unwrap()
    }

    fn chain(n: usize) -> MonotoneSet {
        let pts = (0..n).map(|i| vec![i as f64, i as f64]).collect();
        MonotoneSet::new(ScalarProduct::canonical(2, 1), pts, 0.0).unwrap()
    }

    #[test]
    fn classify_examples() {
        let p = classify_point(&euclid_pair(), &[0.0, 5.0], 1e-9).unwrap().unwrap();
        assert_eq!(p.order, Order::One);
        assert_eq!(p.j_indices, BTreeSet::from([0]));
        assert!(p.in_sigma1(0) && !p.in_sigma1(1));

        let p = classify_point(&chain(2), &[0.0, 0.0], 1e-9).unwrap().unwrap();
        assert_eq!(p.order, Order::Zero);
        assert_eq!(p.j_indices, BTreeSet::from([0, 1]));
        assert!(p.in_sigma0_bar(0) && p.in_sigma0_bar(1));

        assert!(classify_point(&euclid_pair(), &[0.3, 5.0], 1e-9).unwrap().is_none());
    }

    #[test]
    fn sigma_j_a_examples() {
        let f = PolyConvexFn::new(2, vec![(vec![0.0, 0.0], 0.0), (vec![1.0, 1.0], 1.0)]).unwrap();
        let xs = vec![vec![0.5, 0.5], vec![2.0, 2.0]];
        assert_eq!(sigma_j_a(&f, &[0, 1], 0, &xs, 1e-9).unwrap(), vec![vec![0.5, 0.5]]);
        assert!(sigma_j_a(&f, &[0, 1], 0, &[vec![0.0, 0.0]], 1e-9).unwrap().is_empty());
        assert!(sigma_j_a(&f, &[1], 0, &xs, 1e-9).unwrap().is_empty());
        assert!(sigma_j_a(&f, &[0, 1], 2, &xs, 1e-9).is_err());
    }

    #[test]
    fn candidates_lie_on_tie_plane() {
        let pts = candidate_singular_points(&euclid_pair(), 25, 2.0, 1, 1e-9).unwrap();
        assert!(!pts.is_empty());
        for p in &pts {
            assert!(p.location[0].abs() < 1e-9);
            assert!(reverify(&euclid_pair(), p, 1e-9).unwrap());
        }
    }

    #[test]
    fn singleton_has_no_candidates() {
        let g = MonotoneSet::new(ScalarProduct::identity(2), vec![vec![0.0, 0.0]], 0.0).unwrap();
        assert!(candidate_singular_points(&g, 10, 1.0, 0, 1e-9).unwrap().is_empty());
    }

    #[test]
    fn chain_candidates_are_zero_order_on_diagonal() {
        let g = chain(3);
        let pts = candidate_singular_points(&g, 10, 3.0, 5, 1e-9).unwrap();
        assert!(!pts.is_empty());
        for p in &pts {
            assert!((p.location[0] - p.location[1]).abs() < 1e-9);
            assert_eq!(p.order, Order::Zero);
            // brute force: every point of the chain is a minimizer
            assert_eq!(g.project(&p.location, 1e-9).unwrap().minimizers, vec![0, 1, 2]);
        }
    }

    #[test]
    fn zero_samples_rejected() {
        assert!(candidate_singular_points(&euclid_pair(), 0, 1.0, 0, 1e-9).is_err());
    }

    #[test]
    fn deterministic_in_seed() {
        let g = crate::monotone::random_monotone(&ScalarProduct::standard(1), 6, 3).unwrap();
        let a = candidate_singular_points(&g, 8, 1.5, 42, 1e-9).unwrap();
        let b = candidate_singular_points(&g, 8, 1.5, 42, 1e-9).unwrap();
        assert_eq!(a, b);
    }
}
