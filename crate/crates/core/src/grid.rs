//! Uniform 1D Dirichlet grid, nodal fields, conservative operator assembly and
//! the quadrature helpers shared by every solver.
//!
//! Only interior nodes `x_i = i h`, `i = 1..=n`, are stored; boundary values
//! are zero and implicit.

use std::ops::{Deref, DerefMut};

use crate::error::{Error, Result};

/// Uniform grid on `(0, L)` with `n` interior nodes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    length: f64,
    n: usize,
    h: f64,
}

impl Grid {
    pub fn new(length: f64, n: usize) -> Result<Self> {
        if !(length > 0.0) || !length.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "domain length must be positive, got {length}"
            )));
        }
        if n < 3 {
            return Err(Error::InvalidArgument(format!(
                "need at least 3 interior nodes, got {n}"
            )));
        }
        Ok(Grid {
            length,
            n,
            h: length / (n + 1) as f64,
        })
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    /// Coordinate of interior node `i` (0-based), i.e. `(i + 1) h`.
    pub fn node(&self, i: usize) -> f64 {
        (i + 1) as f64 * self.h
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.node(i)).collect()
    }

    /// Composite trapezoid rule for an integrand that vanishes on the boundary.
    pub fn integrate(&self, values: &[f64]) -> f64 {
        debug_assert_eq!(values.len(), self.n);
        self.h * values.iter().sum::<f64>()
    }

    /// Composite trapezoid rule with explicit boundary values of the integrand.
    pub fn integrate_with_ends(&self, values: &[f64], left: f64, right: f64) -> f64 {
        self.integrate(values) + 0.5 * self.h * (left + right)
    }

    /// `∫ f g dx` for two fields vanishing on the boundary.
    pub fn inner(&self, f: &[f64], g: &[f64]) -> f64 {
        self.h * f.iter().zip(g).map(|(a, b)| a * b).sum::<f64>()
    }
}

/// Nodal values of a scalar profile on the interior nodes of a grid.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Field(Vec<f64>);

impl Field {
    pub fn zeros(n: usize) -> Self {
        Field(vec![0.0; n])
    }

    pub fn constant(n: usize, c: f64) -> Self {
        Field(vec![c; n])
    }

    pub fn from_fn(grid: &Grid, f: impl Fn(f64) -> f64) -> Self {
        Field((0..grid.n()).map(|i| f(grid.node(i))).collect())
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    pub fn sup_norm(&self) -> f64 {
        sup_norm(&self.0)
    }

    pub fn min(&self) -> f64 {
        self.0.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.0.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// True when every interior value is strictly positive.
    pub fn is_positive(&self) -> bool {
        self.0.iter().all(|&x| x > 0.0)
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Field {
        Field(self.0.iter().map(|&x| f(x)).collect())
    }
}

impl From<Vec<f64>> for Field {
    fn from(v: Vec<f64>) -> Self {
        Field(v)
    }
}

impl Deref for Field {
    type Target = [f64];
    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl DerefMut for Field {
    fn deref_mut(&mut self) -> &mut [f64] {
        &mut self.0
    }
}

pub fn sup_norm(values: &[f64]) -> f64 {
    values.iter().fold(0.0f64, |m, x| m.max(x.abs()))
}

pub fn sup_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0f64, |m, (x, y)| m.max((x - y).abs()))
}

/// Diffusion coefficient known at the interior nodes and at both boundary
/// points, so that face values next to the boundary never extrapolate.
#[derive(Debug, Clone, PartialEq)]
pub struct Coefficient {
    left: f64,
    interior: Vec<f64>,
    right: f64,
}

impl Coefficient {
    pub fn constant(n: usize, c: f64) -> Self {
        Coefficient {
            left: c,
            interior: vec![c; n],
            right: c,
        }
    }

    pub fn from_fn(grid: &Grid, f: impl Fn(f64) -> f64) -> Self {
        Coefficient {
            left: f(0.0),
            interior: (0..grid.n()).map(|i| f(grid.node(i))).collect(),
            right: f(grid.length()),
        }
    }

    pub fn new(interior: Vec<f64>, left: f64, right: f64) -> Self {
        Coefficient {
            left,
            interior,
            right,
        }
    }

    /// Coefficient `c(v(x))` of a field whose boundary value is zero.
    pub fn of_field(v: &[f64], c: impl Fn(f64) -> f64) -> Self {
        let c0 = c(0.0);
        Coefficient {
            left: c0,
            interior: v.iter().map(|&x| c(x)).collect(),
            right: c0,
        }
    }

    pub fn interior(&self) -> &[f64] {
        &self.interior
    }

    pub fn len(&self) -> usize {
        self.interior.len()
    }

    pub fn is_empty(&self) -> bool {
        self.interior.is_empty()
    }

    /// Value at extended index `j` in `0..=n+1`, where 0 and n+1 are the boundary.
    pub fn extended(&self, j: usize) -> f64 {
        let n = self.interior.len();
        if j == 0 {
            self.left
        } else if j == n + 1 {
            self.right
        } else {
            self.interior[j - 1]
        }
    }

    /// Arithmetic-mean face values; face `j` (0..=n) sits between extended
    /// nodes `j` and `j + 1`.
    pub fn faces(&self) -> Vec<f64> {
        let n = self.interior.len();
        (0..=n)
            .map(|j| 0.5 * (self.extended(j) + self.extended(j + 1)))
            .collect()
    }

    pub fn check_positive(&self, what: &'static str) -> Result<()> {
        let n = self.interior.len();
        for j in 0..n + 2 {
            let value = self.extended(j);
            if !(value > 0.0) {
                return Err(Error::CoefficientSign {
                    what,
                    index: j,
                    value,
                });
            }
        }
        Ok(())
    }
}

/// Tridiagonal matrix: `sub[i]` couples row `i + 1` to column `i`,
/// `sup[i]` couples row `i` to column `i + 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct TridiagonalOperator {
    pub sub: Vec<f64>,
    pub diag: Vec<f64>,
    pub sup: Vec<f64>,
}

impl TridiagonalOperator {
    pub fn zeros(n: usize) -> Self {
        TridiagonalOperator {
            sub: vec![0.0; n.saturating_sub(1)],
            diag: vec![0.0; n],
            sup: vec![0.0; n.saturating_sub(1)],
        }
    }

    pub fn diagonal(d: Vec<f64>) -> Self {
        let n = d.len();
        TridiagonalOperator {
            sub: vec![0.0; n.saturating_sub(1)],
            diag: d,
            sup: vec![0.0; n.saturating_sub(1)],
        }
    }

    pub fn n(&self) -> usize {
        self.diag.len()
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let n = self.n();
        let mut y = vec![0.0; n];
        for i in 0..n {
            let mut s = self.diag[i] * x[i];
            if i > 0 {
                s += self.sub[i - 1] * x[i - 1];
            }
            if i + 1 < n {
                s += self.sup[i] * x[i + 1];
            }
            y[i] = s;
        }
        y
    }

    pub fn is_symmetric(&self) -> bool {
        self.sub == self.sup
    }

    /// Row-sum norm.
    pub fn inf_norm(&self) -> f64 {
        let n = self.n();
        (0..n)
            .map(|i| {
                let mut s = self.diag[i].abs();
                if i > 0 {
                    s += self.sub[i - 1].abs();
                }
                if i + 1 < n {
                    s += self.sup[i].abs();
                }
                s
            })
            .fold(0.0, f64::max)
    }

    pub fn add_diagonal(&mut self, d: &[f64]) {
        for (a, b) in self.diag.iter_mut().zip(d) {
            *a += b;
        }
    }

    pub fn scaled(&self, c: f64) -> Self {
        TridiagonalOperator {
            sub: self.sub.iter().map(|x| x * c).collect(),
            diag: self.diag.iter().map(|x| x * c).collect(),
            sup: self.sup.iter().map(|x| x * c).collect(),
        }
    }

    /// `self * diag(d)` (column scaling).
    pub fn times_diagonal(&self, d: &[f64]) -> Self {
        let n = self.n();
        TridiagonalOperator {
            sub: (0..n - 1).map(|i| self.sub[i] * d[i]).collect(),
            diag: (0..n).map(|i| self.diag[i] * d[i]).collect(),
            sup: (0..n - 1).map(|i| self.sup[i] * d[i + 1]).collect(),
        }
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        if i == j {
            self.diag[i]
        } else if j + 1 == i {
            self.sub[j]
        } else if i + 1 == j {
            self.sup[i]
        } else {
            0.0
        }
    }
}

/// Conservative second-order discretisation of `-(p φ')' + q φ` with
/// homogeneous Dirichlet conditions. Face values of `p` are arithmetic means.
pub fn assemble_div_form(p: &Coefficient, q: &[f64], grid: &Grid) -> Result<TridiagonalOperator> {
    let n = grid.n();
    if p.len() != n || q.len() != n {
        return Err(Error::InvalidArgument(format!(
            "coefficient length mismatch: p {}, q {}, grid {}",
            p.len(),
            q.len(),
            n
        )));
    }
    p.check_positive("p")?;
    let ih2 = 1.0 / (grid.h() * grid.h());
    let faces = p.faces();
    let diag = (0..n)
        .map(|i| (faces[i] + faces[i + 1]) * ih2 + q[i])
        .collect();
    let off: Vec<f64> = (0..n - 1).map(|i| -faces[i + 1] * ih2).collect();
    Ok(TridiagonalOperator {
        sub: off.clone(),
        diag,
        sup: off,
    })
}

/// `-D Δ` on the grid.
pub fn laplacian(grid: &Grid, diffusion: f64) -> TridiagonalOperator {
    let n = grid.n();
    let ih2 = diffusion / (grid.h() * grid.h());
    TridiagonalOperator {
        sub: vec![-ih2; n - 1],
        diag: vec![2.0 * ih2; n],
        sup: vec![-ih2; n - 1],
    }
}

/// Nodal first derivative: centred differences in the interior and one-sided
/// second-order stencils at the first and last interior nodes.
pub fn nodal_gradient(grid: &Grid, f: &[f64]) -> Vec<f64> {
    let n = f.len();
    let h = grid.h();
    let mut g = vec![0.0; n];
    for i in 1..n - 1 {
        g[i] = (f[i + 1] - f[i - 1]) / (2.0 * h);
    }
    g[0] = (-3.0 * f[0] + 4.0 * f[1] - f[2]) / (2.0 * h);
    g[n - 1] = (3.0 * f[n - 1] - 4.0 * f[n - 2] + f[n - 3]) / (2.0 * h);
    g
}

/// Adaptive Simpson quadrature of `f` on `[a, b]` to absolute tolerance `tol`.
pub fn adaptive_simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    fn rec(
        f: &dyn Fn(f64) -> f64,
        a: f64,
        b: f64,
        fa: f64,
        fm: f64,
        fb: f64,
        whole: f64,
        tol: f64,
        depth: u32,
    ) -> f64 {
        let m = 0.5 * (a + b);
        let lm = 0.5 * (a + m);
        let rm = 0.5 * (m + b);
        let flm = f(lm);
        let frm = f(rm);
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            left + right + delta / 15.0
        } else {
            rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
                + rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
        }
    }
    if a == b {
        return 0.0;
    }
    let fa = f(a);
    let fb = f(b);
    let fm = f(0.5 * (a + b));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    rec(f, a, b, fa, fm, fb, whole, tol, 40)
}

/// Cached antiderivative `G(v) = ∫_0^v χ/d` on `[0, v_max]`, stored with its
/// exact derivative at every table node and read back by cubic Hermite
/// interpolation.
#[derive(Debug, Clone)]
pub struct GTable {
    step: f64,
    values: Vec<f64>,
    slopes: Vec<f64>,
}

/// Table spacing of [`GTable`].
pub const G_TABLE_STEP: f64 = 1.0e-3;

impl GTable {
    pub fn build(
        d: &dyn Fn(f64) -> f64,
        chi: &dyn Fn(f64) -> f64,
        v_max: f64,
    ) -> Result<Self> {
        let cells = ((v_max.max(G_TABLE_STEP) / G_TABLE_STEP).ceil() as usize).max(1);
        let step = G_TABLE_STEP;
        let mut values = Vec::with_capacity(cells + 1);
        let mut slopes = Vec::with_capacity(cells + 1);
        let integrand = |t: f64| chi(t) / d(t);
        let mut acc = 0.0;
        for k in 0..=cells {
            let v = k as f64 * step;
            let dv = d(v);
            if !(dv > 0.0) {
                return Err(Error::CoefficientSign {
                    what: "d",
                    index: k,
                    value: dv,
                });
            }
            if k > 0 {
                let a = (k - 1) as f64 * step;
                // midpoint check catches sign changes of d inside a cell
                let dm = d(a + 0.5 * step);
                if !(dm > 0.0) {
                    return Err(Error::CoefficientSign {
                        what: "d",
                        index: k,
                        value: dm,
                    });
                }
                acc += adaptive_simpson(&integrand, a, v, 1e-15);
            }
            values.push(acc);
            slopes.push(chi(v) / dv);
        }
        Ok(GTable {
            step,
            values,
            slopes,
        })
    }

    pub fn v_max(&self) -> f64 {
        (self.values.len() - 1) as f64 * self.step
    }

    /// Interpolated antiderivative; `None` outside `[0, v_max]`.
    pub fn eval(&self, v: f64) -> Option<f64> {
        if !(v >= 0.0) || v > self.v_max() {
            return None;
        }
        let cells = self.values.len() - 1;
        let k = ((v / self.step) as usize).min(cells - 1);
        let t = (v - k as f64 * self.step) / self.step;
        let (t2, t3) = (t * t, t * t * t);
        let h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
        let h10 = t3 - 2.0 * t2 + t;
        let h01 = -2.0 * t3 + 3.0 * t2;
        let h11 = t3 - t2;
        Some(
            h00 * self.values[k]
                + h10 * self.step * self.slopes[k]
                + h01 * self.values[k + 1]
                + h11 * self.step * self.slopes[k + 1],
        )
    }
}

/// `g(v_i) = ∫_0^{v_i} χ(τ)/d(τ) dτ` at every node of `v`.
pub fn quadrature_g(
    d: &dyn Fn(f64) -> f64,
    chi: &dyn Fn(f64) -> f64,
    v: &[f64],
) -> Result<Field> {
    let v_max = v.iter().copied().fold(0.0f64, f64::max);
    let table = GTable::build(d, chi, 1.25 * v_max.max(G_TABLE_STEP))?;
    let integrand = |t: f64| chi(t) / d(t);
    v.iter()
        .map(|&x| match table.eval(x) {
            Some(g) => Ok(g),
            None => {
                // negative arguments: integrate directly towards zero
                for k in 0..=16 {
                    let dv = d(x * k as f64 / 16.0);
                    if !(dv > 0.0) {
                        return Err(Error::CoefficientSign {
                            what: "d",
                            index: k,
                            value: dv,
                        });
                    }
                }
                Ok(-adaptive_simpson(&integrand, x, 0.0, 1e-15))
            }
        })
        .collect::<Result<Vec<_>>>()
        .map(Field::from)
}
