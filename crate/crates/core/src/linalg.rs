//! Tridiagonal and banded direct solvers.

use crate::error::{Error, Result};
use crate::grid::TridiagonalOperator;

/// Thomas algorithm without pivoting. Fails on a zero (or non-finite) pivot.
pub fn solve_tridiagonal(a: &TridiagonalOperator, rhs: &[f64]) -> Result<Vec<f64>> {
    let n = a.n();
    let mut c = vec![0.0; n];
    let mut d = vec![0.0; n];
    let mut beta = a.diag[0];
    if beta == 0.0 || !beta.is_finite() {
        return Err(singular(0));
    }
    c[0] = if n > 1 { a.sup[0] / beta } else { 0.0 };
    d[0] = rhs[0] / beta;
    for i in 1..n {
        beta = a.diag[i] - a.sub[i - 1] * c[i - 1];
        if beta == 0.0 || !beta.is_finite() {
            return Err(singular(i));
        }
        if i + 1 < n {
            c[i] = a.sup[i] / beta;
        }
        d[i] = (rhs[i] - a.sub[i - 1] * d[i - 1]) / beta;
    }
    for i in (0..n - 1).rev() {
        d[i] -= c[i] * d[i + 1];
    }
    Ok(d)
}

/// Thomas elimination for a symmetric positive definite tridiagonal matrix.
/// Returns `None` if a non-positive pivot shows up, i.e. the matrix is not
/// positive definite.
pub fn solve_spd_tridiagonal(a: &TridiagonalOperator, rhs: &[f64]) -> Option<Vec<f64>> {
    let n = a.n();
    let mut c = vec![0.0; n];
    let mut d = vec![0.0; n];
    let mut beta = a.diag[0];
    if !(beta > 0.0) {
        return None;
    }
    c[0] = if n > 1 { a.sup[0] / beta } else { 0.0 };
    d[0] = rhs[0] / beta;
    for i in 1..n {
        beta = a.diag[i] - a.sub[i - 1] * c[i - 1];
        if !(beta > 0.0) {
            return None;
        }
        if i + 1 < n {
            c[i] = a.sup[i] / beta;
        }
        d[i] = (rhs[i] - a.sub[i - 1] * d[i - 1]) / beta;
    }
    for i in (0..n - 1).rev() {
        d[i] -= c[i] * d[i + 1];
    }
    Some(d)
}

fn singular(index: usize) -> Error {
    Error::Invariant(format!("singular pivot at row {index}"))
}

/// General band matrix with `kl` sub- and `ku` super-diagonals, stored row by
/// row with room for the fill-in created by partial pivoting.
#[derive(Debug, Clone)]
pub struct BandMatrix {
    n: usize,
    kl: usize,
    ku: usize,
    width: usize,
    data: Vec<f64>,
}

impl BandMatrix {
    pub fn zeros(n: usize, kl: usize, ku: usize) -> Self {
        let width = 2 * kl + ku + 1;
        BandMatrix {
            n,
            kl,
            ku,
            width,
            data: vec![0.0; n * width],
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    fn offset(&self, i: usize, j: usize) -> usize {
        i * self.width + (j + self.kl - i)
    }

    fn in_band(&self, i: usize, j: usize) -> bool {
        j + self.kl >= i && j <= i + self.ku
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        if self.in_band(i, j) {
            self.data[self.offset(i, j)]
        } else {
            0.0
        }
    }

    /// Adds `value` at `(i, j)`, which must lie inside the declared band.
    pub fn add(&mut self, i: usize, j: usize, value: f64) {
        assert!(self.in_band(i, j), "entry ({i}, {j}) outside band");
        let k = self.offset(i, j);
        self.data[k] += value;
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        (0..self.n)
            .map(|i| {
                let lo = i.saturating_sub(self.kl);
                let hi = (i + self.ku).min(self.n - 1);
                (lo..=hi).map(|j| self.get(i, j) * x[j]).sum()
            })
            .collect()
    }

    /// LU factorisation with partial pivoting.
    pub fn factor(&self) -> Result<BandLu> {
        let n = self.n;
        let kl = self.kl;
        let reach = kl + self.ku;
        let mut a = self.data.clone();
        let w = self.width;
        let idx = |i: usize, j: usize| i * w + (j + kl - i);
        let mut piv = vec![0usize; n];
        let scale = self.data.iter().fold(0.0f64, |m, x| m.max(x.abs())).max(1e-300);
        for k in 0..n {
            let last = (k + kl).min(n - 1);
            let mut p = k;
            let mut best = a[idx(k, k)].abs();
            for i in k + 1..=last {
                let v = a[idx(i, k)].abs();
                if v > best {
                    best = v;
                    p = i;
                }
            }
            if best <= scale * 1e-300 || !best.is_finite() {
                return Err(singular(k));
            }
            piv[k] = p;
            let jmax = (k + reach).min(n - 1);
            if p != k {
                for j in k..=jmax {
                    a.swap(idx(k, j), idx(p, j));
                }
            }
            let pivot = a[idx(k, k)];
            for i in k + 1..=last {
                let l = a[idx(i, k)] / pivot;
                a[idx(i, k)] = l;
                if l != 0.0 {
                    for j in k + 1..=jmax {
                        a[idx(i, j)] -= l * a[idx(k, j)];
                    }
                }
            }
        }
        Ok(BandLu {
            n,
            kl,
            reach,
            width: w,
            data: a,
            piv,
        })
    }
}

/// Factored band matrix.
#[derive(Debug, Clone)]
pub struct BandLu {
    n: usize,
    kl: usize,
    reach: usize,
    width: usize,
    data: Vec<f64>,
    piv: Vec<usize>,
}

impl BandLu {
    pub fn solve(&self, rhs: &[f64]) -> Vec<f64> {
        let n = self.n;
        let (kl, w) = (self.kl, self.width);
        let idx = |i: usize, j: usize| i * w + (j + kl - i);
        let mut x = rhs.to_vec();
        for k in 0..n {
            let p = self.piv[k];
            if p != k {
                x.swap(k, p);
            }
            let last = (k + kl).min(n - 1);
            let xk = x[k];
            for i in k + 1..=last {
                x[i] -= self.data[idx(i, k)] * xk;
            }
        }
        for k in (0..n).rev() {
            let jmax = (k + self.reach).min(n - 1);
            let mut s = x[k];
            for j in k + 1..=jmax {
                s -= self.data[idx(k, j)] * x[j];
            }
            x[k] = s / self.data[idx(k, k)];
        }
        x
    }
}

/// Bordered system `[A b; cᵀ d] [x; y] = [f; g]` with banded `A`.
///
/// Solved by block elimination followed by iterative refinement, which keeps
/// the solve accurate when `A` itself is close to singular (folds) as long as
/// the bordered matrix is not.
pub struct BorderedSystem<'a> {
    a: &'a BandMatrix,
    lu: BandLu,
    b: Vec<f64>,
    c: Vec<f64>,
    d: f64,
    ab: Vec<f64>,
    denom: f64,
}

impl<'a> BorderedSystem<'a> {
    pub fn new(a: &'a BandMatrix, b: Vec<f64>, c: Vec<f64>, d: f64) -> Result<Self> {
        let lu = a.factor()?;
        let ab = lu.solve(&b);
        let denom = d - dot(&c, &ab);
        if denom == 0.0 || !denom.is_finite() {
            return Err(Error::Invariant("singular bordered system".into()));
        }
        Ok(BorderedSystem {
            a,
            lu,
            b,
            c,
            d,
            ab,
            denom,
        })
    }

    fn eliminate(&self, f: &[f64], g: f64) -> (Vec<f64>, f64) {
        let af = self.lu.solve(f);
        let y = (g - dot(&self.c, &af)) / self.denom;
        let x = af.iter().zip(&self.ab).map(|(p, q)| p - q * y).collect();
        (x, y)
    }

    pub fn solve(&self, f: &[f64], g: f64) -> (Vec<f64>, f64) {
        let (mut x, mut y) = self.eliminate(f, g);
        for _ in 0..2 {
            let ax = self.a.apply(&x);
            let rf: Vec<f64> = (0..f.len()).map(|i| f[i] - ax[i] - self.b[i] * y).collect();
            let rg = g - dot(&self.c, &x) - self.d * y;
            let (dx, dy) = self.eliminate(&rf, rg);
            for (xi, di) in x.iter_mut().zip(&dx) {
                *xi += di;
            }
            y += dy;
        }
        (x, y)
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}
