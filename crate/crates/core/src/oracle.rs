//! Reference computations that share no code path with the fast routines
//! they check: exact rational arithmetic on monomial expansions, exact
//! integration and rational Gauss-Jordan inversion.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::linalg::Dense;

fn rational(v: f64) -> BigRational {
    BigRational::from_float(v).expect("finite value")
}

fn binom(n: usize, k: usize) -> BigInt {
    if k > n {
        return BigInt::zero();
    }
    (0..k).fold(BigInt::one(), |acc, i| acc * BigInt::from(n - i) / BigInt::from(i + 1))
}

/// Monomial coefficients (in `t ∈ [0,1]`) of `Σ_i c_i B_{i,N}(t)`, exactly:
/// `B_{i,N}(t) = C(N,i) Σ_{k≥i} (−1)^{k−i} C(N−i, k−i) t^k`.
pub fn bernstein_to_monomial(coeffs: &[f64]) -> Vec<BigRational> {
    let n = coeffs.len().saturating_sub(1);
    let mut mono = vec![BigRational::zero(); n + 1];
    for (i, &c) in coeffs.iter().enumerate() {
        let c = rational(c) * BigRational::from_integer(binom(n, i));
        for k in i..=n {
            let term = c.clone() * BigRational::from_integer(binom(n - i, k - i));
            if (k - i) % 2 == 0 {
                mono[k] += term;
            } else {
                mono[k] -= term;
            }
        }
    }
    mono
}

/// `p`-th derivative of a monomial-coefficient polynomial.
pub fn differentiate(mono: &[BigRational], p: usize) -> Vec<BigRational> {
    let mut cur = mono.to_vec();
    for _ in 0..p {
        if cur.len() <= 1 {
            return vec![BigRational::zero()];
        }
        cur = cur
            .iter()
            .enumerate()
            .skip(1)
            .map(|(k, c)| c * BigRational::from_integer(BigInt::from(k)))
            .collect();
    }
    cur
}

/// Horner evaluation at an exact rational point.
pub fn eval_monomial(mono: &[BigRational], x: &BigRational) -> BigRational {
    mono.iter().rev().fold(BigRational::zero(), |acc, c| acc * x + c)
}

/// `d^p/dx^p Σ_i c_i B_{i,N}(x)` on `[a, b]`, exactly from the binary values
/// of the inputs, rounded once.
pub fn bernstein_derivative_exact(coeffs: &[f64], p: usize, a: f64, b: f64, x: f64) -> f64 {
    let (ra, rb) = (rational(a), rational(b));
    let width = &rb - &ra;
    let t = (rational(x) - ra) / &width;
    let d = differentiate(&bernstein_to_monomial(coeffs), p);
    let mut v = eval_monomial(&d, &t);
    for _ in 0..p {
        v /= width.clone();
    }
    v.to_f64().unwrap_or(f64::NAN)
}

/// `∫_0^1 Σ c_k x^k dx`, exactly.
pub fn integrate_monomial_unit(mono: &[BigRational]) -> BigRational {
    mono.iter()
        .enumerate()
        .map(|(k, c)| c / BigRational::from_integer(BigInt::from(k + 1)))
        .fold(BigRational::zero(), |acc, v| acc + v)
}

/// Inverse of a square matrix by Gauss-Jordan elimination over the rationals
/// (entries taken as their exact binary values).
pub fn rational_inverse(m: &Dense<f64>) -> Result<Vec<Vec<BigRational>>> {
    let n = m.rows();
    if m.cols() != n {
        return Err(Error::Argument("inverse of a non-square matrix".into()));
    }
    let mut a: Vec<Vec<BigRational>> = (0..n)
        .map(|i| {
            (0..2 * n)
                .map(|j| {
                    if j < n {
                        rational(m.get(i, j))
                    } else if j - n == i {
                        BigRational::one()
                    } else {
                        BigRational::zero()
                    }
                })
                .collect()
        })
        .collect();
    for k in 0..n {
        let p = (k..n).find(|&i| !a[i][k].is_zero()).ok_or(Error::Singular { column: k })?;
        a.swap(k, p);
        let pivot = a[k][k].clone();
        for v in a[k].iter_mut() {
            *v = &*v / &pivot;
        }
        let row = a[k].clone();
        for (i, r) in a.iter_mut().enumerate() {
            if i == k || r[k].is_zero() {
                continue;
            }
            let f = r[k].clone();
            for (v, pv) in r.iter_mut().zip(&row) {
                *v -= &f * pv;
            }
        }
    }
    Ok(a.into_iter().map(|r| r[n..].to_vec()).collect())
}

/// `‖M‖_∞ ‖M^{-1}‖_∞` with the inverse computed exactly.
pub fn rational_inf_condition(m: &Dense<f64>) -> Result<f64> {
    let inv = rational_inverse(m)?;
    let inv_norm = inv
        .iter()
        .map(|r| r.iter().fold(BigRational::zero(), |acc, v| acc + v.abs()))
        .max()
        .unwrap_or_else(BigRational::zero);
    Ok(m.norm_inf() * inv_norm.to_f64().unwrap_or(f64::NAN))
}

/// `D_t^α Θ(t) = (1/Γ(1−α)) ∫_0^t Θ'(s) (t−s)^{−α} ds` by quadrature.
///
/// With `r = (t−s)^{1−α}` the integral becomes
/// `(1/(1−α)) ∫_0^{t^{1−α}} Θ'(t − r^{1/(1−α)}) dr`, whose integrand is
/// bounded but only Hölder-smooth at `r = 0`; geometrically graded panels of
/// 20-point Gauss-Legendre resolve it.
pub fn caputo_quadrature(theta_dt: &dyn Fn(f64) -> f64, alpha: f64, t: f64) -> f64 {
    if t <= 0.0 {
        return 0.0;
    }
    let rule = crate::linalg::gauss_legendre(20).expect("20 points");
    let beta = 1.0 / (1.0 - alpha);
    let top = t.powf(1.0 - alpha);
    let f = |r: f64| theta_dt((t - r.powf(beta)).max(0.0));
    let mut sum = 0.0;
    let mut hi = top;
    for _ in 0..60 {
        let lo = 0.5 * hi;
        sum += rule.integrate_on(lo, hi, f);
        hi = lo;
    }
    sum += rule.integrate_on(0.0, hi, f);
    sum / ((1.0 - alpha) * crate::caputo::gamma(1.0 - alpha))
}
