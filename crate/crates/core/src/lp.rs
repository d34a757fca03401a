//! Exact linear programming over the rationals (two-phase simplex with
//! Bland's rule) for small feasibility systems.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Sense {
    Eq,
    Ge,
    Le,
}

/// `Σ coeff·x_var  sense  rhs`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Row {
    pub coeffs: Vec<(usize, i64)>,
    pub sense: Sense,
    pub rhs: i64,
}

impl Row {
    pub fn new(coeffs: Vec<(usize, i64)>, sense: Sense, rhs: i64) -> Self {
        Row { coeffs, sense, rhs }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LpOutcome {
    Infeasible,
    /// An optimal vertex minimising `Σ cost·x`.
    Optimal(Vec<BigRational>),
}

fn rat(v: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(v))
}

struct Tableau {
    /// `rows × (cols + 1)`; the last column is the right-hand side.
    t: Vec<Vec<BigRational>>,
    /// Reduced-cost row, same width.
    obj: Vec<BigRational>,
    basis: Vec<usize>,
    cols: usize,
}

impl Tableau {
    fn pivot(&mut self, r: usize, c: usize) {
        let p = self.t[r][c].clone();
        if !p.is_one() {
            for v in self.t[r].iter_mut() {
                if !v.is_zero() {
                    *v /= &p;
                }
            }
        }
        let prow = self.t[r].clone();
        let nz: Vec<usize> = (0..=self.cols).filter(|&j| !prow[j].is_zero()).collect();
        for (i, row) in self.t.iter_mut().enumerate() {
            if i == r || row[c].is_zero() {
                continue;
            }
            let f = row[c].clone();
            for &j in &nz {
                let d = &f * &prow[j];
                row[j] -= d;
            }
        }
        if !self.obj[c].is_zero() {
            let f = self.obj[c].clone();
            for &j in &nz {
                let d = &f * &prow[j];
                self.obj[j] -= d;
            }
        }
        self.basis[r] = c;
    }

    /// Minimises the objective encoded in `obj` over columns `< allowed`.
    /// Returns false if unbounded.
    fn optimise(&mut self, allowed: usize) -> bool {
        loop {
            let entering = (0..allowed).find(|&j| self.obj[j].is_negative());
            let Some(c) = entering else { return true };
            let mut best: Option<(usize, BigRational)> = None;
            for i in 0..self.t.len() {
                let a = &self.t[i][c];
                if a.is_positive() {
                    let ratio = &self.t[i][self.cols] / a;
                    let better = match &best {
                        None => true,
                        Some((bi, br)) => {
                            ratio < *br || (ratio == *br && self.basis[i] < self.basis[*bi])
                        }
                    };
                    if better {
                        best = Some((i, ratio));
                    }
                }
            }
            match best {
                None => return false,
                Some((r, _)) => self.pivot(r, c),
            }
        }
    }
}

/// Minimises `Σ cost[j]·x_j` subject to `rows` and `x ≥ 0`. Costs must be
/// nonnegative so the program is bounded below.
pub fn solve_lp(n: usize, rows: &[Row], cost: &[i64]) -> LpOutcome {
    let m = rows.len();
    let n_slack = rows.iter().filter(|r| r.sense != Sense::Eq).count();
    let cols = n + n_slack + m;
    let mut t = vec![vec![BigRational::zero(); cols + 1]; m];
    let mut slack = n;
    for (i, r) in rows.iter().enumerate() {
        let flip = r.rhs < 0;
        let sign = if flip { -1 } else { 1 };
        for &(j, a) in &r.coeffs {
            t[i][j] += rat(sign * a);
        }
        match r.sense {
            Sense::Eq => {}
            Sense::Ge => {
                t[i][slack] = rat(-sign);
                slack += 1;
            }
            Sense::Le => {
                t[i][slack] = rat(sign);
                slack += 1;
            }
        }
        t[i][n + n_slack + i] = BigRational::one();
        t[i][cols] = rat(sign * r.rhs);
    }
    let art = n + n_slack;
    let mut obj = vec![BigRational::zero(); cols + 1];
    for row in &t {
        for j in 0..art {
            obj[j] -= &row[j];
        }
        obj[cols] -= &row[cols];
    }
    let mut tab = Tableau {
        t,
        obj,
        basis: (art..art + m).collect(),
        cols,
    };
    tab.optimise(art);
    if !tab.obj[cols].is_zero() {
        return LpOutcome::Infeasible;
    }
    // Drive artificial variables out of the basis; drop redundant rows.
    let mut i = 0;
    while i < tab.t.len() {
        if tab.basis[i] >= art {
            match (0..art).find(|&j| !tab.t[i][j].is_zero()) {
                Some(j) => {
                    tab.pivot(i, j);
                    i += 1;
                }
                None => {
                    tab.t.remove(i);
                    tab.basis.remove(i);
                }
            }
        } else {
            i += 1;
        }
    }
    let mut obj = vec![BigRational::zero(); cols + 1];
    for (j, &c) in cost.iter().enumerate() {
        obj[j] = rat(c);
    }
    for (i, &b) in tab.basis.iter().enumerate() {
        if !obj[b].is_zero() {
            let f = obj[b].clone();
            for (o, t) in obj.iter_mut().zip(&tab.t[i]).take(cols + 1) {
                if !t.is_zero() {
                    *o -= &f * t;
                }
            }
        }
    }
    tab.obj = obj;
    tab.optimise(art);
    let mut x = vec![BigRational::zero(); n];
    for (i, &b) in tab.basis.iter().enumerate() {
        if b < n {
            x[b] = tab.t[i][cols].clone();
        }
    }
    LpOutcome::Optimal(x)
}
