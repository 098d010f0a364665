//! The dual Bernstein basis `B*_{i,N}`, characterised by
//! `∫_a^b B_{i,N} B*_{j,N} dx = δ_{ij}`.
//!
//! Two representations are provided. [`DualCoefficients`] holds the
//! coefficients `d_{i,j}` of `B*_{i,N} = Σ_j d_{i,j} B_{j,N}` computed in exact
//! rational arithmetic. The entries grow combinatorially with `N` (about
//! `3·10^8` at `N = 14`), so contracting them against floating point moments
//! loses most significant digits. [`DualPairing`] tabulates the same functions
//! through their Legendre expansion
//!
//! ```text
//!     B*_{i,N} = Σ_n (2n+1) β_{n,i} P̃_n,
//! ```
//!
//! where `β_{n,i}` are the (exact, `O(2^N)`-sized) Bernstein coefficients of
//! the shifted Legendre polynomial `P̃_n`. The solver pairs against this form.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use crate::bernstein::{binom_signed, binomial_f64, BernsteinBasis, Interval};
use crate::error::Result;
use crate::linalg::{gauss_legendre, QuadratureRule};

/// Coefficients `d_{i,j}` of the dual basis in the Bernstein basis.
#[derive(Debug, Clone, PartialEq)]
pub struct DualCoefficients {
    degree: usize,
    interval: Interval,
    /// Unit-interval values, exact.
    exact: Vec<BigRational>,
    /// `exact / (b − a)` rounded once.
    values: Vec<f64>,
}

fn big_binom(n: i64, k: i64) -> BigInt {
    if n < 0 || k < 0 || k > n {
        return BigInt::zero();
    }
    let k = k.min(n - k);
    let mut c = BigInt::one();
    for i in 0..k {
        c = c * BigInt::from(n - i) / BigInt::from(i + 1);
    }
    c
}

pub fn dual_coefficients(basis: &BernsteinBasis) -> DualCoefficients {
    let n = basis.degree() as i64;
    let size = basis.len();
    let mut exact = vec![BigRational::zero(); size * size];
    for i in 0..=n {
        for j in i..=n {
            let mut sum = BigInt::zero();
            for r in 0..=i.min(j) {
                sum += BigInt::from(2 * r + 1)
                    * big_binom(n + r + 1, n - i)
                    * big_binom(n - r, n - i)
                    * big_binom(n + r + 1, n - j)
                    * big_binom(n - r, n - j);
            }
            if (i + j) % 2 == 1 {
                sum = -sum;
            }
            let value = BigRational::new(sum, big_binom(n, i) * big_binom(n, j));
            exact[(i * (n + 1) + j) as usize] = value.clone();
            exact[(j * (n + 1) + i) as usize] = value;
        }
    }
    let width = basis.interval().width();
    let values = exact
        .iter()
        .map(|q| q.to_f64().unwrap_or(f64::NAN) / width)
        .collect();
    DualCoefficients { degree: basis.degree(), interval: basis.interval(), exact, values }
}

impl DualCoefficients {
    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn interval(&self) -> Interval {
        self.interval
    }

    /// `d_{i,j}` on the stored interval.
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * (self.degree + 1) + j]
    }

    /// Exact unit-interval value of `d_{i,j}`.
    pub fn exact(&self, i: usize, j: usize) -> &BigRational {
        &self.exact[i * (self.degree + 1) + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let n = self.degree + 1;
        &self.values[i * n..(i + 1) * n]
    }

    /// `B*_{i,N}(x)` from the Bernstein-form coefficients.
    pub fn eval(&self, i: usize, x: f64) -> Result<f64> {
        let basis = BernsteinBasis::new(self.degree, self.interval);
        crate::bernstein::poly_eval(self.row(i), &basis, x)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

/// `β_{n,i}`: Bernstein coefficients (degree `N`) of `P̃_n(x) = P_n(2x − 1)`,
/// row `n`, column `i`.
pub fn legendre_in_bernstein(degree: usize) -> Vec<Vec<f64>> {
    let big_n = degree as i64;
    (0..=big_n)
        .map(|n| {
            (0..=big_n)
                .map(|i| {
                    let num: i128 = (0..=n.min(i))
                        .map(|k| {
                            let sign = if (n - k) % 2 == 0 { 1 } else { -1 };
                            let c = binom_signed(n, k);
                            sign * c * c * binom_signed(big_n - n, i - k)
                        })
                        .sum();
                    num as f64 / binomial_f64(degree as u64, i as u64)
                })
                .collect()
        })
        .collect()
}

/// Shifted Legendre values `P̃_0(t), …, P̃_n(t)` by the three-term recurrence.
pub fn shifted_legendre(n: usize, t: f64) -> Vec<f64> {
    let y = 2.0 * t - 1.0;
    let mut p = vec![1.0; n + 1];
    if n >= 1 {
        p[1] = y;
    }
    for k in 1..n {
        let kf = k as f64;
        p[k + 1] = ((2.0 * kf + 1.0) * y * p[k] - kf * p[k - 1]) / (kf + 1.0);
    }
    p
}

/// Dual basis functions tabulated at the nodes of a Gauss-Legendre rule,
/// for computing `(f, B*_{i,N})` by quadrature.
#[derive(Debug, Clone)]
pub struct DualPairing {
    basis: BernsteinBasis,
    rule: QuadratureRule,
    /// `values[i][q]` is the unit-interval dual function `i` at node `q`.
    values: Vec<Vec<f64>>,
    beta: Vec<Vec<f64>>,
}

impl DualPairing {
    pub fn new(basis: BernsteinBasis, points: usize) -> Result<Self> {
        let rule = gauss_legendre(points)?;
        let n = basis.degree();
        let beta = legendre_in_bernstein(n);
        let legendre: Vec<Vec<f64>> = rule.nodes().iter().map(|&t| shifted_legendre(n, t)).collect();
        let values = (0..=n)
            .map(|i| {
                legendre
                    .iter()
                    .map(|p| (0..=n).map(|k| (2 * k + 1) as f64 * beta[k][i] * p[k]).sum())
                    .collect()
            })
            .collect();
        Ok(Self { basis, rule, values, beta })
    }

    pub fn basis(&self) -> &BernsteinBasis {
        &self.basis
    }

    pub fn rule(&self) -> &QuadratureRule {
        &self.rule
    }

    /// Physical quadrature nodes on `[a, b]`.
    pub fn nodes(&self) -> Vec<f64> {
        let iv = self.basis.interval();
        self.rule.nodes().iter().map(|&t| iv.from_local(t)).collect()
    }

    /// `(f, B*_{i,N})` for all `i = 0..=N`.
    pub fn pair<F: Fn(f64) -> f64>(&self, f: F) -> Vec<f64> {
        let samples: Vec<f64> = self.nodes().into_iter().map(f).collect();
        self.pair_samples(&samples)
    }

    /// As [`pair`](Self::pair) with `f` already sampled at [`nodes`](Self::nodes).
    pub fn pair_samples(&self, samples: &[f64]) -> Vec<f64> {
        let weights = self.rule.weights();
        self.values
            .iter()
            .map(|psi| {
                psi.iter()
                    .zip(weights)
                    .zip(samples)
                    .map(|((p, w), f)| p * w * f)
                    .sum()
            })
            .collect()
    }

    /// `B*_{i,N}(x)` from the Legendre form.
    pub fn eval(&self, i: usize, x: f64) -> Result<f64> {
        let iv = self.basis.interval();
        let t = iv.to_local(x)?;
        let n = self.basis.degree();
        let p = shifted_legendre(n, t);
        let s: f64 = (0..=n).map(|k| (2 * k + 1) as f64 * self.beta[k][i] * p[k]).sum();
        Ok(s / iv.width())
    }
}
