//! The Bernstein basis on an interval `[a, b]`:
//!
//! ```text
//!     B_{i,N}(x) = C(N,i) (x−a)^i (b−x)^{N−i} / (b−a)^N,   0 ≤ i ≤ N,
//! ```
//!
//! with `B_{i,N} ≡ 0` for indices outside `0..=N`.

use crate::error::{Error, Result};

/// A closed interval `[a, b]` with `a < b`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    a: f64,
    b: f64,
}

impl Interval {
    pub fn new(a: f64, b: f64) -> Result<Self> {
        if !(a.is_finite() && b.is_finite() && a < b) {
            return Err(Error::InvalidInterval { a, b });
        }
        Ok(Self { a, b })
    }

    /// The unit interval `[0, 1]`.
    pub fn unit() -> Self {
        Self { a: 0.0, b: 1.0 }
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn width(&self) -> f64 {
        self.b - self.a
    }

    pub fn contains(&self, x: f64) -> bool {
        x >= self.a && x <= self.b
    }

    pub fn is_unit(&self) -> bool {
        self.a == 0.0 && self.b == 1.0
    }

    /// Maps `x ∈ [a, b]` to the local coordinate `t ∈ [0, 1]`.
    pub fn to_local(&self, x: f64) -> Result<f64> {
        if !self.contains(x) {
            return Err(Error::Domain { x, a: self.a, b: self.b });
        }
        Ok(((x - self.a) / self.width()).clamp(0.0, 1.0))
    }

    /// Maps `t ∈ [0, 1]` to `[a, b]`.
    pub fn from_local(&self, t: f64) -> f64 {
        self.a + t * self.width()
    }
}

impl Default for Interval {
    fn default() -> Self {
        Self::unit()
    }
}

/// The degree-`N` Bernstein basis on an interval.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BernsteinBasis {
    degree: usize,
    interval: Interval,
}

impl BernsteinBasis {
    pub fn new(degree: usize, interval: Interval) -> Self {
        Self { degree, interval }
    }

    pub fn unit(degree: usize) -> Self {
        Self::new(degree, Interval::unit())
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn interval(&self) -> Interval {
        self.interval
    }

    pub fn len(&self) -> usize {
        self.degree + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

/// Exact binomial coefficient, `None` on overflow. Zero when `k > n`.
pub fn binomial(n: u64, k: u64) -> Option<i128> {
    if k > n {
        return Some(0);
    }
    let k = k.min(n - k);
    let mut c: i128 = 1;
    for i in 0..k {
        // c * (n - i) is divisible by (i + 1) at every step.
        c = c.checked_mul((n - i) as i128)? / (i as i128 + 1);
    }
    Some(c)
}

/// Binomial coefficient as a float; exact integer arithmetic while it fits.
pub fn binomial_f64(n: u64, k: u64) -> f64 {
    match binomial(n, k) {
        Some(c) => c as f64,
        None => {
            let k = k.min(n - k);
            (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
        }
    }
}

/// Signed binomial with the convention `C(n, k) = 0` for `k < 0` or `k > n`.
pub(crate) fn binom_signed(n: i64, k: i64) -> i128 {
    if n < 0 || k < 0 || k > n {
        0
    } else {
        binomial(n as u64, k as u64).expect("binomial overflow")
    }
}

/// All `N+1` basis values at `x`, by the triangular de Casteljau recurrence
/// `B_{i,k} = (1−t) B_{i,k−1} + t B_{i−1,k−1}`.
pub fn eval_all(basis: &BernsteinBasis, x: f64) -> Result<Vec<f64>> {
    let t = basis.interval.to_local(x)?;
    Ok(eval_all_local(basis.degree, t))
}

pub(crate) fn eval_all_local(degree: usize, t: f64) -> Vec<f64> {
    let s = 1.0 - t;
    let mut values = vec![0.0; degree + 1];
    values[0] = 1.0;
    for k in 1..=degree {
        // sweep downwards so values[i-1] still holds level k-1
        values[k] = t * values[k - 1];
        for i in (1..k).rev() {
            values[i] = s * values[i] + t * values[i - 1];
        }
        values[0] *= s;
    }
    values
}

/// `B_{i,N}(x)`; zero for `i` outside `0..=N`.
pub fn eval_basis(i: i64, basis: &BernsteinBasis, x: f64) -> Result<f64> {
    let values = eval_all(basis, x)?;
    if i < 0 || i as usize > basis.degree {
        return Ok(0.0);
    }
    Ok(values[i as usize])
}

/// `Σ_i c_i B_{i,N}(x)`.
pub fn poly_eval(coeffs: &[f64], basis: &BernsteinBasis, x: f64) -> Result<f64> {
    if coeffs.len() != basis.len() {
        return Err(Error::Dimension { expected: basis.len(), found: coeffs.len() });
    }
    let t = basis.interval.to_local(x)?;
    Ok(de_casteljau(coeffs, t))
}

/// Evaluates a Bernstein polynomial on `[0, 1]` by repeated convex combination.
pub(crate) fn de_casteljau(coeffs: &[f64], t: f64) -> f64 {
    let mut work = coeffs.to_vec();
    let n = work.len();
    for level in 1..n {
        for i in 0..n - level {
            work[i] = (1.0 - t) * work[i] + t * work[i + 1];
        }
    }
    work.first().copied().unwrap_or(0.0)
}

/// A coefficient vector that is nonzero only on a contiguous index window.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseCoefficients {
    /// Degree of the basis the coefficients refer to.
    pub degree: usize,
    /// Index of `values[0]`.
    pub start: usize,
    pub values: Vec<f64>,
}

impl SparseCoefficients {
    pub fn get(&self, index: usize) -> f64 {
        if index < self.start {
            return 0.0;
        }
        self.values.get(index - self.start).copied().unwrap_or(0.0)
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.values.iter().enumerate().map(move |(k, &v)| (self.start + k, v))
    }

    /// Count of stored entries that are nonzero.
    pub fn nonzeros(&self) -> usize {
        self.values.iter().filter(|v| **v != 0.0).count()
    }

    pub fn to_dense(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.degree + 1];
        for (r, v) in self.iter() {
            out[r] = v;
        }
        out
    }
}

/// Coefficients `c_r`, `r = i..=i+j`, with `B_{i,N−j} = Σ_r c_r B_{r,N}`.
pub fn degree_elevate(i: usize, degree: usize, levels: usize) -> Result<SparseCoefficients> {
    if levels > degree || i > degree - levels {
        return Err(Error::Argument(format!(
            "degree elevation needs j ≤ N and i ≤ N − j (i = {i}, N = {degree}, j = {levels})"
        )));
    }
    let lower = (degree - levels) as u64;
    let lead = binomial_f64(lower, i as u64);
    let values = (i..=i + levels)
        .map(|r| {
            lead * binomial_f64(levels as u64, (r - i) as u64)
                / binomial_f64(degree as u64, r as u64)
        })
        .collect();
    Ok(SparseCoefficients { degree, start: i, values })
}

/// `c_{p,N} = (−1)^p N! / ((b−a)^p (N−p)!)`.
pub fn derivative_scale(p: usize, degree: usize, interval: &Interval) -> f64 {
    let falling: f64 = ((degree - p + 1)..=degree).map(|k| k as f64).product();
    let sign = if p % 2 == 0 { 1.0 } else { -1.0 };
    sign * falling / interval.width().powi(p as i32)
}

/// `B^{(p)}_{i,N}` written in the degree-`(N−p)` basis, scaled by `c_{p,N}`.
#[derive(Debug, Clone, PartialEq)]
pub struct LowerDegreeDerivative {
    pub scale: f64,
    pub coefficients: SparseCoefficients,
}

impl LowerDegreeDerivative {
    pub fn eval(&self, interval: &Interval, x: f64) -> Result<f64> {
        let basis = BernsteinBasis::new(self.coefficients.degree, *interval);
        let values = eval_all(&basis, x)?;
        Ok(self.scale * self.coefficients.iter().map(|(r, c)| c * values[r]).sum::<f64>())
    }
}

pub fn derivative_in_lower_basis(
    i: usize,
    basis: &BernsteinBasis,
    p: usize,
) -> Result<LowerDegreeDerivative> {
    let n = basis.degree;
    check_order(i, n, p)?;
    let k_lo = (i + p).saturating_sub(n);
    let k_hi = i.min(p);
    // term k multiplies B_{i−k, N−p}; store by ascending index i−k.
    let start = i - k_hi;
    let mut values = vec![0.0; k_hi - k_lo + 1];
    for k in k_lo..=k_hi {
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        values[(i - k) - start] = sign * binomial_f64(p as u64, k as u64);
    }
    Ok(LowerDegreeDerivative {
        scale: derivative_scale(p, n, &basis.interval),
        coefficients: SparseCoefficients { degree: n - p, start, values },
    })
}

/// Row `i` of the same-degree derivative relation
/// `B^{(p)}_{i,N} = c_{p,N} Σ_j ω_{i,j} B_{j,N}`, with `|i − j| ≤ p`.
#[derive(Debug, Clone, PartialEq)]
pub struct ExpansionCoefficients {
    pub row: usize,
    pub order: usize,
    pub scale: f64,
    pub omega: SparseCoefficients,
}

impl ExpansionCoefficients {
    /// Coefficient of `B_{j,N}` including the scale.
    pub fn entry(&self, j: usize) -> f64 {
        self.scale * self.omega.get(j)
    }
}

/// Exact numerator of `ω_{i,j}`: `Σ_k (−1)^k C(p,k) C(N−p,i−k) C(p,j−i+k)`.
/// `ω_{i,j}` is this divided by `C(N,j)`.
pub fn omega_numerator(i: usize, j: usize, p: usize, degree: usize) -> i128 {
    let (i, j, p, n) = (i as i64, j as i64, p as i64, degree as i64);
    let k_lo = (i - j).max(0);
    let k_hi = p.min(i - j + p);
    (k_lo..=k_hi)
        .map(|k| {
            let sign = if k % 2 == 0 { 1 } else { -1 };
            sign * binom_signed(p, k) * binom_signed(n - p, i - k) * binom_signed(p, j - i + k)
        })
        .sum()
}

pub fn derivative_expansion(
    i: usize,
    basis: &BernsteinBasis,
    p: usize,
) -> Result<ExpansionCoefficients> {
    let n = basis.degree;
    check_order(i, n, p)?;
    let start = i.saturating_sub(p);
    let end = (i + p).min(n);
    let values = (start..=end)
        .map(|j| omega_numerator(i, j, p, n) as f64 / binomial_f64(n as u64, j as u64))
        .collect();
    Ok(ExpansionCoefficients {
        row: i,
        order: p,
        scale: derivative_scale(p, n, &basis.interval),
        omega: SparseCoefficients { degree: n, start, values },
    })
}

fn check_order(i: usize, degree: usize, p: usize) -> Result<()> {
    if p > degree {
        return Err(Error::Argument(format!(
            "derivative order p = {p} exceeds degree N = {degree}"
        )));
    }
    if i > degree {
        return Err(Error::Argument(format!("basis index {i} exceeds degree {degree}")));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn eval_basis_examples() {
        let b2 = BernsteinBasis::unit(2);
        assert_abs_diff_eq!(eval_basis(0, &b2, 0.5).unwrap(), 0.25, epsilon = 1e-15);
        assert_eq!(eval_basis(1, &BernsteinBasis::unit(3), 0.0).unwrap(), 0.0);
        let b4 = BernsteinBasis::unit(4);
        assert_abs_diff_eq!(eval_basis(2, &b4, 0.3).unwrap(), 0.2646, epsilon = 1e-14);
    }

    #[test]
    fn out_of_range_index_is_zero() {
        let b = BernsteinBasis::unit(3);
        assert_eq!(eval_basis(-1, &b, 0.4).unwrap(), 0.0);
        assert_eq!(eval_basis(4, &b, 0.4).unwrap(), 0.0);
    }

    #[test]
    fn outside_interval_is_domain_error() {
        let b = BernsteinBasis::unit(3);
        assert!(matches!(eval_basis(0, &b, 1.5), Err(Error::Domain { .. })));
        assert!(matches!(eval_all(&b, -0.1), Err(Error::Domain { .. })));
    }

    #[test]
    fn eval_all_examples() {
        let v = eval_all(&BernsteinBasis::unit(1), 0.25).unwrap();
        assert_eq!(v, vec![0.75, 0.25]);
        assert_eq!(eval_all(&BernsteinBasis::unit(3), 0.0).unwrap(), vec![1.0, 0.0, 0.0, 0.0]);
        let b = BernsteinBasis::new(2, Interval::new(0.0, 2.0).unwrap());
        assert_eq!(eval_all(&b, 1.0).unwrap(), vec![0.25, 0.5, 0.25]);
    }

    #[test]
    fn endpoint_interpolation() {
        for n in 0..20 {
            let b = BernsteinBasis::new(n, Interval::new(-1.0, 3.0).unwrap());
            let left = eval_all(&b, -1.0).unwrap();
            let right = eval_all(&b, 3.0).unwrap();
            for i in 0..=n {
                assert_eq!(left[i], if i == 0 { 1.0 } else { 0.0 });
                assert_eq!(right[i], if i == n { 1.0 } else { 0.0 });
            }
        }
    }

    #[test]
    fn high_degree_does_not_overflow() {
        let b = BernsteinBasis::unit(200);
        let v = eval_all(&b, 0.5).unwrap();
        assert!(v.iter().all(|x| x.is_finite() && *x >= 0.0));
        assert_abs_diff_eq!(v.iter().sum::<f64>(), 1.0, epsilon = 1e-13);
    }

    #[test]
    fn degree_elevation_examples() {
        let e = degree_elevate(0, 2, 1).unwrap();
        assert_eq!((e.start, e.values.clone()), (0, vec![1.0, 0.5]));
        let e = degree_elevate(0, 5, 0).unwrap();
        assert_eq!((e.start, e.values.clone()), (0, vec![1.0]));
        let e = degree_elevate(1, 3, 1).unwrap();
        assert_eq!(e.start, 1);
        assert_abs_diff_eq!(e.values[0], 2.0 / 3.0, epsilon = 1e-15);
        assert_abs_diff_eq!(e.values[1], 2.0 / 3.0, epsilon = 1e-15);
        assert!(degree_elevate(3, 3, 1).is_err());
        assert!(degree_elevate(0, 2, 3).is_err());
    }

    #[test]
    fn lower_basis_derivative_examples() {
        let b1 = BernsteinBasis::unit(1);
        let d = derivative_in_lower_basis(0, &b1, 1).unwrap();
        assert_eq!(d.scale, -1.0);
        assert_eq!(d.coefficients.values, vec![1.0]);

        let b2 = BernsteinBasis::unit(2);
        let d = derivative_in_lower_basis(1, &b2, 1).unwrap();
        for x in [0.0, 0.2, 0.7, 1.0] {
            assert_abs_diff_eq!(d.eval(&Interval::unit(), x).unwrap(), 2.0 - 4.0 * x, epsilon = 1e-14);
        }
        let d = derivative_in_lower_basis(0, &b2, 2).unwrap();
        assert_abs_diff_eq!(d.eval(&Interval::unit(), 0.3).unwrap(), 2.0, epsilon = 1e-14);
        assert!(derivative_in_lower_basis(0, &b2, 3).is_err());
    }

    #[test]
    fn expansion_examples() {
        let b2 = BernsteinBasis::unit(2);
        let e = derivative_expansion(1, &b2, 1).unwrap();
        assert_eq!(e.entry(0), 2.0);
        assert_eq!(e.entry(1), 0.0);
        assert_eq!(e.entry(2), -2.0);

        let e = derivative_expansion(0, &BernsteinBasis::unit(3), 0).unwrap();
        assert_eq!((e.scale, e.omega.values.clone()), (1.0, vec![1.0]));

        let e = derivative_expansion(0, &b2, 2).unwrap();
        for j in 0..=2 {
            assert_eq!(e.entry(j), 2.0);
        }
        assert!(derivative_expansion(0, &b2, 3).is_err());
    }

    #[test]
    fn first_and_second_derivative_closed_forms() {
        for n in 2..=15usize {
            let b = BernsteinBasis::unit(n);
            for i in 0..=n {
                let (ni, ii) = (n as f64, i as f64);
                let e1 = derivative_expansion(i, &b, 1).unwrap();
                let first = |j: i64| match j - i as i64 {
                    -1 => ni - ii + 1.0,
                    0 => -(ni - 2.0 * ii),
                    1 => -(ii + 1.0),
                    _ => 0.0,
                };
                let e2 = derivative_expansion(i, &b, 2).unwrap();
                let second = |j: i64| match j - i as i64 {
                    -2 => (ni - ii + 2.0) * (ni - ii + 1.0),
                    -1 => -2.0 * (ni - ii + 1.0) * (ni - 2.0 * ii + 1.0),
                    0 => ni * ni - 6.0 * ni * ii + 6.0 * ii * ii - ni,
                    1 => 2.0 * (ii + 1.0) * (ni - 2.0 * ii - 1.0),
                    2 => (ii + 2.0) * (ii + 1.0),
                    _ => 0.0,
                };
                for j in 0..=n {
                    let (a, b) = (e1.entry(j), first(j as i64));
                    assert!((a - b).abs() <= 1e-13 * b.abs(), "p=1 N={n} i={i} j={j}: {a} vs {b}");
                    let (a, b) = (e2.entry(j), second(j as i64));
                    assert!((a - b).abs() <= 1e-13 * b.abs(), "p=2 N={n} i={i} j={j}: {a} vs {b}");
                }
            }
        }
    }

    #[test]
    fn poly_eval_examples() {
        let ones = vec![1.0; 7];
        assert_abs_diff_eq!(poly_eval(&ones, &BernsteinBasis::unit(6), 0.37).unwrap(), 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(
            poly_eval(&[0.0, 1.0, 0.0], &BernsteinBasis::unit(2), 0.5).unwrap(),
            0.5,
            epsilon = 1e-15
        );
        let b = BernsteinBasis::new(3, Interval::new(2.0, 5.0).unwrap());
        assert_eq!(poly_eval(&[1.0, 0.0, 0.0, 0.0], &b, 2.0).unwrap(), 1.0);
        assert!(matches!(
            poly_eval(&[1.0, 2.0], &BernsteinBasis::unit(2), 0.5),
            Err(Error::Dimension { .. })
        ));
    }

    #[test]
    fn binomials_are_exact() {
        assert_eq!(binomial(10, 3), Some(120));
        assert_eq!(binomial(3, 5), Some(0));
        assert_eq!(binomial(100, 50), Some(100891344545564193334812497256));
        assert_eq!(binomial_f64(0, 0), 1.0);
    }
}
