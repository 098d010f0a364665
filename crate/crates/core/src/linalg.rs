//! Dense and banded linear algebra: LU with partial pivoting, Gauss-Legendre
//! rules and infinity-norm condition numbers.

use num_rational::Ratio;
use num_traits::{One, Zero};
use rayon::prelude::*;
use std::ops::{Add, Mul};

use crate::bernstein::binom_signed;
use crate::error::{Error, Result};
use crate::opmatrix::BandedMatrix;

/// Row-major dense matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Dense<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Copy + Zero> Dense<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![T::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self
    where
        T: One,
    {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, T::one());
        }
        m
    }

    pub fn from_fn<F: FnMut(usize, usize) -> T>(rows: usize, cols: usize, mut f: F) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> T {
        self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: T) {
        self.data[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self.get(j, i))
    }

    pub fn matmul(&self, other: &Self) -> Result<Self>
    where
        T: Add<Output = T> + Mul<Output = T>,
    {
        if self.cols != other.rows {
            return Err(Error::Dimension { expected: self.cols, found: other.rows });
        }
        Ok(Self::from_fn(self.rows, other.cols, |i, j| {
            (0..self.cols).fold(T::zero(), |acc, k| acc + self.get(i, k) * other.get(k, j))
        }))
    }
}

impl Dense<f64> {
    pub fn norm_inf(&self) -> f64 {
        (0..self.rows)
            .map(|i| self.row(i).iter().map(|v| v.abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    /// `self + s · other`.
    pub fn add_scaled(&self, other: &Self, s: f64) -> Result<Self> {
        if (self.rows, self.cols) != (other.rows, other.cols) {
            return Err(Error::Dimension { expected: self.rows * self.cols, found: other.rows * other.cols });
        }
        Ok(Self::from_fn(self.rows, self.cols, |i, j| self.get(i, j) + s * other.get(i, j)))
    }

    pub fn matvec(&self, v: &[f64]) -> Result<Vec<f64>> {
        if v.len() != self.cols {
            return Err(Error::Dimension { expected: self.cols, found: v.len() });
        }
        Ok((0..self.rows)
            .map(|i| self.row(i).iter().zip(v).map(|(a, b)| a * b).sum())
            .collect())
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.data
            .iter()
            .zip(&other.data)
            .fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }
}

impl Dense<i128> {
    pub fn checked_matmul(&self, other: &Self) -> Result<Self> {
        if self.cols != other.rows {
            return Err(Error::Dimension { expected: self.cols, found: other.rows });
        }
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for j in 0..other.cols {
                let mut acc: i128 = 0;
                for k in 0..self.cols {
                    let t = self
                        .get(i, k)
                        .checked_mul(other.get(k, j))
                        .ok_or(Error::Overflow("dense product"))?;
                    acc = acc.checked_add(t).ok_or(Error::Overflow("dense product"))?;
                }
                out.set(i, j, acc);
            }
        }
        Ok(out)
    }

    pub fn trace(&self) -> i128 {
        (0..self.rows.min(self.cols)).map(|i| self.get(i, i)).sum()
    }
}

// ---------------------------------------------------------------------------
// Gauss-Legendre

/// Quadrature rule on `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl QuadratureRule {
    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// `∫_0^1 f`.
    pub fn integrate<F: Fn(f64) -> f64>(&self, f: F) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(&x, w)| w * f(x)).sum()
    }

    /// `∫_a^b f`.
    pub fn integrate_on<F: Fn(f64) -> f64>(&self, a: f64, b: f64, f: F) -> f64 {
        (b - a) * self.integrate(|t| f(a + (b - a) * t))
    }
}

const GL_TOL: f64 = 1e-15;
const GL_MAX_ITER: usize = 100;

/// `n`-point Gauss-Legendre rule mapped to `[0, 1]`; nodes increasing.
pub fn gauss_legendre(n: usize) -> Result<QuadratureRule> {
    if n == 0 {
        return Err(Error::Argument("Gauss-Legendre rule needs at least one point".into()));
    }
    let nf = n as f64;
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        // Roots of P_n on [−1, 1], largest first.
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..GL_MAX_ITER {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() <= GL_TOL {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, x);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[n - 1 - i] = 0.5 * (1.0 + x);
        nodes[i] = 0.5 * (1.0 - x);
        weights[n - 1 - i] = 0.5 * w;
        weights[i] = 0.5 * w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.5;
    }
    Ok(QuadratureRule { nodes, weights })
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    for k in 1..n {
        let kf = k as f64;
        let p2 = ((2.0 * kf + 1.0) * x * p1 - kf * p0) / (kf + 1.0);
        p0 = p1;
        p1 = p2;
    }
    let nf = n as f64;
    (p1, nf * (x * p1 - p0) / (x * x - 1.0))
}

// ---------------------------------------------------------------------------
// Banded LU

/// `PA = LU` of a square banded matrix with partial pivoting.
///
/// `U` is stored with upper bandwidth `kl + ku`. The multipliers of step `k`
/// are kept separately and, as in LAPACK's `gbtrf`, are not permuted by later
/// row swaps; [`BandedLU::solve`] applies swaps and eliminations interleaved.
#[derive(Debug, Clone)]
pub struct BandedLU {
    n: usize,
    kl: usize,
    ku: usize,
    u: BandedMatrix,
    multipliers: Vec<Vec<f64>>,
    pivots: Vec<usize>,
}

pub fn banded_lu_factor(m: &BandedMatrix) -> Result<BandedLU> {
    let n = m.rows();
    if m.cols() != n {
        return Err(Error::Argument(format!("LU needs a square matrix, got {n}×{}", m.cols())));
    }
    let (kl, ku) = (m.lower(), m.upper());
    let mut w = BandedMatrix::zeros(n, n, kl, kl + ku);
    for (i, j, v) in m.iter_entries() {
        w.set(i, j, v);
    }
    let mut multipliers = Vec::with_capacity(n);
    let mut pivots = Vec::with_capacity(n);
    for k in 0..n {
        let last_row = (k + kl).min(n - 1);
        let last_col = (k + kl + ku).min(n - 1);
        let mut p = k;
        let mut best = w.get(k, k).abs();
        for i in k + 1..=last_row {
            let v = w.get(i, k).abs();
            if v > best {
                best = v;
                p = i;
            }
        }
        if best == 0.0 {
            return Err(Error::Singular { column: k });
        }
        pivots.push(p);
        if p != k {
            for j in k..=last_col {
                let a = w.get(k, j);
                let b = w.get(p, j);
                w.set(k, j, b);
                w.set(p, j, a);
            }
        }
        let pivot = w.get(k, k);
        let mut col = Vec::with_capacity(last_row - k);
        for i in k + 1..=last_row {
            let l = w.get(i, k) / pivot;
            col.push(l);
            w.set(i, k, 0.0);
            if l != 0.0 {
                for j in k + 1..=last_col {
                    let v = w.get(i, j) - l * w.get(k, j);
                    w.set(i, j, v);
                }
            }
        }
        multipliers.push(col);
    }
    let u = w.slice(0, n, 0, n);
    let u = BandedMatrix::from_fn(n, n, 0, kl + ku, |i, j| u.get(i, j));
    Ok(BandedLU { n, kl, ku, u, multipliers, pivots })
}

pub fn banded_lu_solve(lu: &BandedLU, rhs: &[f64]) -> Result<Vec<f64>> {
    lu.solve(rhs)
}

impl BandedLU {
    pub fn size(&self) -> usize {
        self.n
    }

    /// Bandwidths of the factored matrix.
    pub fn bandwidths(&self) -> (usize, usize) {
        (self.kl, self.ku)
    }

    pub fn u(&self) -> &BandedMatrix {
        &self.u
    }

    pub fn pivots(&self) -> &[usize] {
        &self.pivots
    }

    pub fn solve(&self, rhs: &[f64]) -> Result<Vec<f64>> {
        if rhs.len() != self.n {
            return Err(Error::Dimension { expected: self.n, found: rhs.len() });
        }
        let mut x = rhs.to_vec();
        for k in 0..self.n {
            x.swap(k, self.pivots[k]);
            let xk = x[k];
            for (off, l) in self.multipliers[k].iter().enumerate() {
                x[k + 1 + off] -= l * xk;
            }
        }
        for k in (0..self.n).rev() {
            let mut s = x[k];
            for j in k + 1..self.u.row_range(k).end {
                s -= self.u.get(k, j) * x[j];
            }
            x[k] = s / self.u.get(k, k);
        }
        Ok(x)
    }

    /// Dense `(P, L, U)` with `PA = LU`.
    pub fn factors_dense(&self) -> (Dense<f64>, Dense<f64>, Dense<f64>) {
        let n = self.n;
        let mut perm: Vec<usize> = (0..n).collect();
        let mut l = Dense::<f64>::zeros(n, n);
        for k in 0..n {
            let p = self.pivots[k];
            if p != k {
                perm.swap(k, p);
                for j in 0..k {
                    let a = l.get(k, j);
                    l.set(k, j, l.get(p, j));
                    l.set(p, j, a);
                }
            }
            for (off, &m) in self.multipliers[k].iter().enumerate() {
                l.set(k + 1 + off, k, m);
            }
        }
        for i in 0..n {
            l.set(i, i, 1.0);
        }
        let p = Dense::from_fn(n, n, |i, j| if perm[i] == j { 1.0 } else { 0.0 });
        (p, l, self.u.to_dense())
    }

    /// Columns of `A^{-1}`, computed in parallel.
    pub fn inverse_columns(&self) -> Result<Vec<Vec<f64>>> {
        (0..self.n)
            .into_par_iter()
            .map(|j| {
                let mut e = vec![0.0; self.n];
                e[j] = 1.0;
                self.solve(&e)
            })
            .collect()
    }
}

/// `‖A‖_∞ ‖A^{-1}‖_∞` with the inverse formed from unit-vector solves.
pub fn inf_condition_number(m: &BandedMatrix) -> Result<f64> {
    let lu = banded_lu_factor(m)?;
    let cols = lu.inverse_columns()?;
    let n = m.rows();
    let inv_norm = (0..n)
        .map(|i| cols.iter().map(|c| c[i].abs()).sum::<f64>())
        .fold(0.0, f64::max);
    Ok(m.norm_inf() * inv_norm)
}

/// Dense counterpart of [`inf_condition_number`].
pub fn dense_inf_condition_number(m: &Dense<f64>) -> Result<f64> {
    let inv = DenseLU::factor(m)?.inverse();
    Ok(m.norm_inf() * inv.norm_inf())
}

// ---------------------------------------------------------------------------
// Dense LU (reference path)

/// Dense LU with partial pivoting; the reference against which the banded
/// path is checked.
#[derive(Debug, Clone)]
pub struct DenseLU {
    lu: Dense<f64>,
    perm: Vec<usize>,
}

impl DenseLU {
    pub fn factor(m: &Dense<f64>) -> Result<Self> {
        let n = m.rows();
        if m.cols() != n {
            return Err(Error::Argument(format!("LU needs a square matrix, got {n}×{}", m.cols())));
        }
        let mut a = m.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        for k in 0..n {
            let p = (k..n)
                .max_by(|&x, &y| a.get(x, k).abs().total_cmp(&a.get(y, k).abs()))
                .unwrap_or(k);
            if a.get(p, k) == 0.0 {
                return Err(Error::Singular { column: k });
            }
            if p != k {
                perm.swap(k, p);
                for j in 0..n {
                    let t = a.get(k, j);
                    a.set(k, j, a.get(p, j));
                    a.set(p, j, t);
                }
            }
            for i in k + 1..n {
                let l = a.get(i, k) / a.get(k, k);
                a.set(i, k, l);
                for j in k + 1..n {
                    a.set(i, j, a.get(i, j) - l * a.get(k, j));
                }
            }
        }
        Ok(Self { lu: a, perm })
    }

    pub fn solve(&self, rhs: &[f64]) -> Result<Vec<f64>> {
        let n = self.lu.rows();
        if rhs.len() != n {
            return Err(Error::Dimension { expected: n, found: rhs.len() });
        }
        let mut x: Vec<f64> = self.perm.iter().map(|&p| rhs[p]).collect();
        for i in 0..n {
            for j in 0..i {
                x[i] -= self.lu.get(i, j) * x[j];
            }
        }
        for i in (0..n).rev() {
            for j in i + 1..n {
                x[i] -= self.lu.get(i, j) * x[j];
            }
            x[i] /= self.lu.get(i, i);
        }
        Ok(x)
    }

    pub fn inverse(&self) -> Dense<f64> {
        let n = self.lu.rows();
        let mut inv = Dense::zeros(n, n);
        for j in 0..n {
            let mut e = vec![0.0; n];
            e[j] = 1.0;
            let c = self.solve(&e).expect("dimension checked");
            for i in 0..n {
                inv.set(i, j, c[i]);
            }
        }
        inv
    }
}

// ---------------------------------------------------------------------------
// Hilbert matrices

pub fn hilbert(n: usize) -> Dense<f64> {
    Dense::from_fn(n, n, |i, j| 1.0 / (i + j + 1) as f64)
}

/// Exact inverse of the order-`n` Hilbert matrix.
pub fn hilbert_inverse_exact(n: usize) -> Result<Dense<i128>> {
    let nn = n as i64;
    let mut inv = Dense::<i128>::zeros(n, n);
    for i in 1..=nn {
        for j in 1..=nn {
            let b = binom_signed(i + j - 2, i - 1);
            let v = [
                (i + j - 1) as i128,
                binom_signed(nn + i - 1, nn - j),
                binom_signed(nn + j - 1, nn - i),
                b,
                b,
            ]
            .iter()
            .try_fold(1i128, |acc, &f| acc.checked_mul(f))
            .ok_or(Error::Overflow("Hilbert inverse"))?;
            let v = if (i + j) % 2 == 0 { v } else { -v };
            inv.set((i - 1) as usize, (j - 1) as usize, v);
        }
    }
    Ok(inv)
}

/// Exact `cond_∞(H_n)` as a rational.
pub fn hilbert_condition_exact(n: usize) -> Result<Ratio<i128>> {
    if n == 0 {
        return Err(Error::Argument("Hilbert matrix of order 0".into()));
    }
    // The first row has the largest absolute sum.
    let h_norm = (1..=n as i128).fold(Ratio::zero(), |acc: Ratio<i128>, k| acc + Ratio::new(1, k));
    let inv = hilbert_inverse_exact(n)?;
    let inv_norm = (0..n)
        .map(|i| inv.row(i).iter().map(|v| v.abs()).sum::<i128>())
        .max()
        .unwrap_or(0);
    Ok(h_norm * Ratio::from_integer(inv_norm))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn gauss_legendre_small_rules() {
        let r = gauss_legendre(1).unwrap();
        assert_eq!((r.nodes(), r.weights()), (&[0.5][..], &[1.0][..]));
        let r = gauss_legendre(2).unwrap();
        let h = 0.5 / 3f64.sqrt();
        assert_relative_eq!(r.nodes()[0], 0.5 - h, epsilon = 1e-15);
        assert_relative_eq!(r.nodes()[1], 0.5 + h, epsilon = 1e-15);
        assert_relative_eq!(r.weights()[0], 0.5, epsilon = 1e-15);
        assert!(gauss_legendre(0).is_err());
    }

    #[test]
    fn twenty_point_rule_is_exact_to_degree_39() {
        let r = gauss_legendre(20).unwrap();
        assert_relative_eq!(r.integrate(|x| x.powi(39)), 1.0 / 40.0, max_relative = 1e-13);
        assert_relative_eq!(r.weights().iter().sum::<f64>(), 1.0, epsilon = 1e-14);
        assert!(r.nodes().windows(2).all(|w| w[0] < w[1]));
        for (a, b) in r.nodes().iter().zip(r.nodes().iter().rev()) {
            assert_relative_eq!(a + b, 1.0, epsilon = 1e-15);
        }
    }

    #[test]
    fn identity_factor_has_no_pivoting() {
        let id = BandedMatrix::identity(5);
        let lu = banded_lu_factor(&id).unwrap();
        assert_eq!(lu.pivots(), &[0, 1, 2, 3, 4]);
        let (p, l, u) = lu.factors_dense();
        assert_eq!(p, Dense::identity(5));
        assert_eq!(l, Dense::identity(5));
        assert_eq!(u, Dense::identity(5));
        assert_eq!(banded_lu_solve(&lu, &[1.0, 2.0, 3.0, 4.0, 5.0]).unwrap(), vec![1.0, 2.0, 3.0, 4.0, 5.0]);
    }

    #[test]
    fn two_by_two_tridiagonal_solve() {
        let m = BandedMatrix::from_fn(2, 2, 1, 1, |i, j| if i == j { 2.0 } else { -1.0 });
        let x = banded_lu_solve(&banded_lu_factor(&m).unwrap(), &[1.0, 0.0]).unwrap();
        assert_relative_eq!(x[0], 2.0 / 3.0, epsilon = 1e-15);
        assert_relative_eq!(x[1], 1.0 / 3.0, epsilon = 1e-15);
    }

    #[test]
    fn pentadiagonal_matches_dense_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let n = 50;
        let m = BandedMatrix::from_fn(n, n, 2, 2, |i, j| {
            if i == j {
                10.0 + rng.gen::<f64>()
            } else {
                rng.gen_range(-1.0..1.0)
            }
        });
        let b: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let x = banded_lu_solve(&banded_lu_factor(&m).unwrap(), &b).unwrap();
        let y = DenseLU::factor(&m.to_dense()).unwrap().solve(&b).unwrap();
        for (a, c) in x.iter().zip(&y) {
            assert_relative_eq!(a, c, epsilon = 1e-10);
        }
    }

    #[test]
    fn pivoting_reconstructs_pa_equals_lu() {
        // Small diagonal forces row swaps.
        let m = BandedMatrix::from_fn(6, 6, 2, 1, |i, j| {
            if i == j {
                1e-3 * (i + 1) as f64
            } else {
                (i * 3 + j * 5) as f64 % 7.0 - 3.0
            }
        });
        let lu = banded_lu_factor(&m).unwrap();
        assert!(lu.pivots().iter().enumerate().any(|(k, &p)| k != p));
        let (p, l, u) = lu.factors_dense();
        let pa = p.matmul(&m.to_dense()).unwrap();
        let prod = l.matmul(&u).unwrap();
        assert!(pa.max_abs_diff(&prod) < 1e-12);
        assert!(lu.u().upper() <= m.lower() + m.upper());
    }

    #[test]
    fn zero_pivot_is_reported() {
        let m = BandedMatrix::from_fn(3, 3, 1, 1, |i, j| if i == 1 || j == 1 { 0.0 } else { 1.0 });
        assert!(matches!(banded_lu_factor(&m), Err(Error::Singular { .. })));
        let lu = banded_lu_factor(&BandedMatrix::identity(3)).unwrap();
        assert!(matches!(lu.solve(&[1.0]), Err(Error::Dimension { .. })));
    }

    #[test]
    fn condition_numbers() {
        assert_eq!(inf_condition_number(&BandedMatrix::identity(4)).unwrap(), 1.0);
        let exact = hilbert_condition_exact(4).unwrap();
        assert_eq!(exact, Ratio::from_integer(28375));
        let c = dense_inf_condition_number(&hilbert(4)).unwrap();
        assert_relative_eq!(c, 28375.0, max_relative = 1e-9);
    }

    #[test]
    fn hilbert_inverse_is_exact() {
        for n in 1..=8 {
            let inv = hilbert_inverse_exact(n).unwrap();
            let h = hilbert(n);
            let prod = h.matmul(&Dense::from_fn(n, n, |i, j| inv.get(i, j) as f64)).unwrap();
            let tol = 1e-7 * inv.row(n / 2).iter().map(|v| v.abs() as f64).sum::<f64>().max(1.0);
            assert!(prod.max_abs_diff(&Dense::identity(n)) < tol, "n = {n}");
        }
    }
}
