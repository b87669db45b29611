//! Small dense linear programs.
//!
//! A two-phase tableau simplex with Bland's pivoting rule. The problems this
//! crate poses (conjugate values, hull membership, exposure margins) have a
//! few dozen variables at most, so a dense tableau is adequate and the
//! pivoting sequence is fully deterministic.

const PIVOT_EPS: f64 = 1e-11;
const FEAS_EPS: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    Le,
    Eq,
    Ge,
}

#[derive(Debug, Clone)]
pub struct Constraint {
    pub coeffs: Vec<f64>,
    pub relation: Relation,
    pub rhs: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum LpOutcome {
    Optimal { x: Vec<f64>, value: f64 },
    Infeasible,
    Unbounded,
}

impl LpOutcome {
    pub fn value(&self) -> Option<f64> {
        match self {
            LpOutcome::Optimal { value, .. } => Some(*value),
            _ => None,
        }
    }
}

/// `max/min c^T x` subject to linear constraints. Variables are
/// non-negative unless marked free.
#[derive(Debug, Clone)]
pub struct LinearProgram {
    objective: Vec<f64>,
    minimize: bool,
    free: Vec<bool>,
    constraints: Vec<Constraint>,
}

impl LinearProgram {
    pub fn maximize(objective: Vec<f64>) -> Self {
        let n = objective.len();
        Self {
            objective,
            minimize: false,
            free: vec![false; n],
            constraints: Vec::new(),
        }
    }

    pub fn minimize(objective: Vec<f64>) -> Self {
        let mut lp = Self::maximize(objective);
        lp.minimize = true;
        lp
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn set_free(&mut self, var: usize) {
        self.free[var] = true;
    }

    pub fn add(&mut self, coeffs: Vec<f64>, relation: Relation, rhs: f64) {
        assert_eq!(coeffs.len(), self.num_vars(), "constraint width");
        self.constraints.push(Constraint {
            coeffs,
            relation,
            rhs,
        });
    }

    pub fn solve(&self) -> LpOutcome {
        // Column layout: one column per non-negative variable, two per free
        // variable (x = x+ - x-), then slacks/surpluses, then artificials.
        let n = self.num_vars();
        let mut col_of = Vec::with_capacity(n);
        let mut n_struct = 0;
        for &is_free in &self.free {
            col_of.push(n_struct);
            n_struct += if is_free { 2 } else { 1 };
        }

        let m = self.constraints.len();
        let mut rows: Vec<(Vec<f64>, Relation, f64)> = Vec::with_capacity(m);
        for c in &self.constraints {
            let mut a = vec![0.0; n_struct];
            for (i, &v) in c.coeffs.iter().enumerate() {
                a[col_of[i]] = v;
                if self.free[i] {
                    a[col_of[i] + 1] = -v;
                }
            }
            let (a, rel, b) = if c.rhs < 0.0 {
                let flipped = match c.relation {
                    Relation::Le => Relation::Ge,
                    Relation::Ge => Relation::Le,
                    Relation::Eq => Relation::Eq,
                };
                (a.iter().map(|v| -v).collect(), flipped, -c.rhs)
            } else {
                (a, c.relation, c.rhs)
            };
            rows.push((a, rel, b));
        }

        let n_slack = rows.iter().filter(|r| r.1 != Relation::Eq).count();
        let n_art = rows.iter().filter(|r| r.1 != Relation::Le).count();
        let art_start = n_struct + n_slack;
        let width = art_start + n_art;

        let mut tab = Tableau::new(m, width);
        let mut slack = n_struct;
        let mut art = art_start;
        for (r, (a, rel, b)) in rows.iter().enumerate() {
            tab.row_mut(r)[..n_struct].copy_from_slice(a);
            tab.set_rhs(r, *b);
            match rel {
                Relation::Le => {
                    tab.row_mut(r)[slack] = 1.0;
                    tab.basis[r] = slack;
                    slack += 1;
                }
                Relation::Ge => {
                    tab.row_mut(r)[slack] = -1.0;
                    slack += 1;
                    tab.row_mut(r)[art] = 1.0;
                    tab.basis[r] = art;
                    art += 1;
                }
                Relation::Eq => {
                    tab.row_mut(r)[art] = 1.0;
                    tab.basis[r] = art;
                    art += 1;
                }
            }
        }

        // Phase 1: maximize -sum(artificials).
        if n_art > 0 {
            let mut cost = vec![0.0; width];
            for c in cost.iter_mut().skip(art_start) {
                *c = -1.0;
            }
            tab.load_objective(&cost);
            if tab.run(width) == Step::Unbounded {
                return LpOutcome::Infeasible;
            }
            let scale = rows.iter().map(|r| r.2.abs()).fold(1.0, f64::max);
            if tab.objective_value() < -FEAS_EPS * scale {
                return LpOutcome::Infeasible;
            }
            // Drive remaining (zero-valued) artificials out of the basis.
            let mut r = 0;
            while r < tab.m {
                if tab.basis[r] >= art_start {
                    let pivot_col =
                        (0..art_start).find(|&c| tab.row(r)[c].abs() > PIVOT_EPS * 100.0);
                    match pivot_col {
                        Some(c) => tab.pivot(r, c),
                        None => {
                            tab.remove_row(r);
                            continue;
                        }
                    }
                }
                r += 1;
            }
        }

        // Phase 2 over non-artificial columns.
        let sign = if self.minimize { -1.0 } else { 1.0 };
        let mut cost = vec![0.0; width];
        for i in 0..n {
            let c = sign * self.objective[i];
            cost[col_of[i]] = c;
            if self.free[i] {
                cost[col_of[i] + 1] = -c;
            }
        }
        tab.load_objective(&cost);
        if tab.run(art_start) == Step::Unbounded {
            return LpOutcome::Unbounded;
        }

        let mut cols = vec![0.0; width];
        for r in 0..tab.m {
            cols[tab.basis[r]] = tab.rhs(r);
        }
        let x: Vec<f64> = (0..n)
            .map(|i| {
                let v = cols[col_of[i]];
                if self.free[i] {
                    v - cols[col_of[i] + 1]
                } else {
                    v
                }
            })
            .collect();
        let value = self
            .objective
            .iter()
            .zip(&x)
            .map(|(c, v)| c * v)
            .sum::<f64>();
        LpOutcome::Optimal { x, value }
    }
}

#[derive(Debug, PartialEq, Eq)]
enum Step {
    Optimal,
    Unbounded,
}

/// Row-major tableau; the last column is the right-hand side and the last
/// row holds reduced costs (`z_j - c_j` for maximization).
struct Tableau {
    m: usize,
    width: usize,
    data: Vec<f64>,
    basis: Vec<usize>,
}

impl Tableau {
    fn new(m: usize, width: usize) -> Self {
        Self {
            m,
            width,
            data: vec![0.0; (m + 1) * (width + 1)],
            basis: vec![usize::MAX; m],
        }
    }

    fn stride(&self) -> usize {
        self.width + 1
    }

    fn row(&self, r: usize) -> &[f64] {
        let s = self.stride();
        &self.data[r * s..(r + 1) * s]
    }

    fn row_mut(&mut self, r: usize) -> &mut [f64] {
        let s = self.stride();
        &mut self.data[r * s..(r + 1) * s]
    }

    fn rhs(&self, r: usize) -> f64 {
        self.row(r)[self.width]
    }

    fn set_rhs(&mut self, r: usize, v: f64) {
        let w = self.width;
        self.row_mut(r)[w] = v;
    }

    fn objective_value(&self) -> f64 {
        self.rhs(self.m)
    }

    fn load_objective(&mut self, cost: &[f64]) {
        let m = self.m;
        let w = self.width;
        {
            let z = self.row_mut(m);
            for (zc, c) in z.iter_mut().zip(cost) {
                *zc = -c;
            }
            z[w] = 0.0;
        }
        for r in 0..m {
            let b = self.basis[r];
            let coef = self.row(m)[b];
            if coef != 0.0 {
                self.axpy_row(m, r, -coef);
            }
        }
    }

    /// `row[dst] += alpha * row[src]`
    fn axpy_row(&mut self, dst: usize, src: usize, alpha: f64) {
        let s = self.stride();
        for c in 0..s {
            let v = self.data[src * s + c];
            self.data[dst * s + c] += alpha * v;
        }
    }

    fn pivot(&mut self, r: usize, c: usize) {
        let s = self.stride();
        let p = self.data[r * s + c];
        for k in 0..s {
            self.data[r * s + k] /= p;
        }
        for other in 0..=self.m {
            if other == r {
                continue;
            }
            let f = self.data[other * s + c];
            if f != 0.0 {
                self.axpy_row(other, r, -f);
                self.data[other * s + c] = 0.0;
            }
        }
        self.basis[r] = c;
    }

    fn remove_row(&mut self, r: usize) {
        let s = self.stride();
        self.data.drain(r * s..(r + 1) * s);
        self.basis.remove(r);
        self.m -= 1;
    }

    /// Bland's rule: lowest-index improving column, ties in the ratio test
    /// broken by lowest basic index.
    fn run(&mut self, allowed_cols: usize) -> Step {
        let max_iter = 50_000;
        for _ in 0..max_iter {
            let z = self.row(self.m);
            let entering = (0..allowed_cols).find(|&c| z[c] < -PIVOT_EPS);
            let Some(c) = entering else {
                return Step::Optimal;
            };
            let mut best: Option<(usize, f64)> = None;
            for r in 0..self.m {
                let a = self.row(r)[c];
                if a > PIVOT_EPS {
                    let ratio = self.rhs(r) / a;
                    best = match best {
                        None => Some((r, ratio)),
                        Some((br, bratio)) => {
                            if ratio < bratio - 1e-12
                                || (ratio <= bratio + 1e-12 && self.basis[r] < self.basis[br])
                            {
                                Some((r, ratio))
                            } else {
                                Some((br, bratio))
                            }
                        }
                    };
                }
            }
            match best {
                Some((r, _)) => self.pivot(r, c),
                None => return Step::Unbounded,
            }
        }
        // Bland's rule terminates; hitting this bound means numerical cycling.
        Step::Optimal
    }
}
