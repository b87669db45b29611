pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub(crate) fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub(crate) fn norm_sq(a: &[f64]) -> f64 {
    dot(a, a)
}

pub(crate) fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// `x` with coordinate `j` removed.
pub(crate) fn drop_coord(x: &[f64], j: usize) -> Vec<f64> {
    x.iter()
        .enumerate()
        .filter(|&(i, _)| i != j)
        .map(|(_, &v)| v)
        .collect()
}

/// Inverse of [`drop_coord`]: inserts `value` at position `j`.
pub(crate) fn insert_coord(u: &[f64], j: usize, value: f64) -> Vec<f64> {
    let mut x = Vec::with_capacity(u.len() + 1);
    x.extend_from_slice(&u[..j]);
    x.push(value);
    x.extend_from_slice(&u[j..]);
    x
}

/// Orthonormal basis of the complement of the unit vector `e` in `R^k`.
pub(crate) fn complement_basis(e: &[f64]) -> Vec<Vec<f64>> {
    let k = e.len();
    let mut basis: Vec<Vec<f64>> = vec![e.to_vec()];
    for axis in 0..k {
        let mut v = vec![0.0; k];
        v[axis] = 1.0;
        for b in &basis {
            let c = dot(&v, b);
            for (vi, bi) in v.iter_mut().zip(b) {
                *vi -= c * bi;
            }
        }
        let n = norm(&v);
        if n > 1e-6 {
            basis.push(v.iter().map(|x| x / n).collect());
        }
        if basis.len() == k {
            break;
        }
    }
    basis.remove(0);
    basis
}
