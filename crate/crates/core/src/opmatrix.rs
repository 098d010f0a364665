//! Banded operational matrices.
//!
//! With `Φ = [B_{0,N}, …, B_{N,N}]ᵀ`, differentiation acts as
//! `dᵖΦ/dxᵖ = D_p Φ`, where row `i` of `D_p` holds `c_{p,N} ω_{i,·}` and the
//! matrix is `(p, p)`-banded. On `[0, 1]` the entries of `D_p` are integers;
//! they are built exactly as [`IntegerBandedMatrix`] and scaled by
//! `(b−a)^{−p}` when converted to floating point.

use num_traits::{One, Zero};
use std::ops::{Add, Mul};

use crate::bernstein::{binomial, omega_numerator, BernsteinBasis};
use crate::error::{Error, Result};
use crate::linalg::Dense;

/// Rectangular matrix stored by diagonals.
///
/// Band `d` (offset `j − i`, `−lower ≤ d ≤ upper`) is stored contiguously,
/// starting at row `max(0, −d)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Banded<T> {
    rows: usize,
    cols: usize,
    lower: usize,
    upper: usize,
    bands: Vec<Vec<T>>,
}

pub type BandedMatrix = Banded<f64>;
pub type IntegerBandedMatrix = Banded<i128>;

impl<T: Copy + Zero> Banded<T> {
    pub fn zeros(rows: usize, cols: usize, lower: usize, upper: usize) -> Self {
        let lower = lower.min(rows.saturating_sub(1));
        let upper = upper.min(cols.saturating_sub(1));
        let bands = (-(lower as isize)..=upper as isize)
            .map(|d| vec![T::zero(); band_len(rows, cols, d)])
            .collect();
        Self { rows, cols, lower, upper, bands }
    }

    pub fn from_fn<F: FnMut(usize, usize) -> T>(
        rows: usize,
        cols: usize,
        lower: usize,
        upper: usize,
        mut f: F,
    ) -> Self {
        let mut m = Self::zeros(rows, cols, lower, upper);
        for i in 0..rows {
            for j in m.row_range(i) {
                m.set(i, j, f(i, j));
            }
        }
        m
    }

    pub fn identity(n: usize) -> Self
    where
        T: One,
    {
        let mut m = Self::zeros(n, n, 0, 0);
        m.bands[0].iter_mut().for_each(|v| *v = T::one());
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn lower(&self) -> usize {
        self.lower
    }

    pub fn upper(&self) -> usize {
        self.upper
    }

    /// Diagonal at offset `d = j − i`, or `None` outside the stored bands.
    pub fn band(&self, d: isize) -> Option<&[T]> {
        if d < -(self.lower as isize) || d > self.upper as isize {
            return None;
        }
        Some(&self.bands[(d + self.lower as isize) as usize])
    }

    /// Column indices of row `i` inside the band.
    pub fn row_range(&self, i: usize) -> std::ops::Range<usize> {
        let lo = i.saturating_sub(self.lower);
        let hi = (i + self.upper + 1).min(self.cols);
        lo..hi.max(lo)
    }

    fn slot(&self, i: usize, j: usize) -> Option<(usize, usize)> {
        if i >= self.rows || j >= self.cols {
            return None;
        }
        let d = j as isize - i as isize;
        if d < -(self.lower as isize) || d > self.upper as isize {
            return None;
        }
        let start = (-d).max(0) as usize;
        Some(((d + self.lower as isize) as usize, i - start))
    }

    /// Entry `(i, j)`; zero outside the band.
    pub fn get(&self, i: usize, j: usize) -> T {
        match self.slot(i, j) {
            Some((b, k)) => self.bands[b][k],
            None => T::zero(),
        }
    }

    /// Sets entry `(i, j)`. Panics if the position lies outside the band.
    pub fn set(&mut self, i: usize, j: usize, value: T) {
        let (b, k) = self
            .slot(i, j)
            .unwrap_or_else(|| panic!("({i}, {j}) is outside the band"));
        self.bands[b][k] = value;
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, self.upper, self.lower, |i, j| self.get(j, i))
    }

    pub fn map<U: Copy + Zero, F: Fn(T) -> U>(&self, f: F) -> Banded<U> {
        Banded {
            rows: self.rows,
            cols: self.cols,
            lower: self.lower,
            upper: self.upper,
            bands: self.bands.iter().map(|b| b.iter().map(|&v| f(v)).collect()).collect(),
        }
    }

    /// Rows `r0..r1` and columns `c0..c1`, keeping band storage.
    pub fn slice(&self, r0: usize, r1: usize, c0: usize, c1: usize) -> Self {
        let shift = c0 as isize - r0 as isize;
        let lower = (self.lower as isize + shift).max(0) as usize;
        let upper = (self.upper as isize - shift).max(0) as usize;
        Self::from_fn(r1 - r0, c1 - c0, lower, upper, |i, j| self.get(i + r0, j + c0))
    }

    pub fn to_dense(&self) -> Dense<T> {
        let mut d = Dense::zeros(self.rows, self.cols);
        for i in 0..self.rows {
            for j in self.row_range(i) {
                d.set(i, j, self.get(i, j));
            }
        }
        d
    }

    pub fn iter_entries(&self) -> impl Iterator<Item = (usize, usize, T)> + '_ {
        (0..self.rows).flat_map(move |i| self.row_range(i).map(move |j| (i, j, self.get(i, j))))
    }
}

impl<T> Banded<T>
where
    T: Copy + Zero + Add<Output = T> + Mul<Output = T>,
{
    /// Banded product; bandwidths add.
    pub fn matmul(&self, other: &Self) -> Result<Self> {
        if self.cols != other.rows {
            return Err(Error::Dimension { expected: self.cols, found: other.rows });
        }
        let mut out = Self::zeros(
            self.rows,
            other.cols,
            self.lower + other.lower,
            self.upper + other.upper,
        );
        for i in 0..self.rows {
            for j in out.row_range(i) {
                let mut acc = T::zero();
                for k in self.row_range(i) {
                    acc = acc + self.get(i, k) * other.get(k, j);
                }
                out.set(i, j, acc);
            }
        }
        Ok(out)
    }

    pub fn matvec(&self, v: &[T]) -> Result<Vec<T>> {
        if v.len() != self.cols {
            return Err(Error::Dimension { expected: self.cols, found: v.len() });
        }
        Ok((0..self.rows)
            .map(|i| {
                self.row_range(i)
                    .fold(T::zero(), |acc, j| acc + self.get(i, j) * v[j])
            })
            .collect())
    }
}

fn band_len(rows: usize, cols: usize, d: isize) -> usize {
    let start = (-d).max(0);
    let end = (rows as isize).min(cols as isize - d);
    (end - start).max(0) as usize
}

impl BandedMatrix {
    pub fn norm_inf(&self) -> f64 {
        (0..self.rows)
            .map(|i| self.row_range(i).map(|j| self.get(i, j).abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }
}

impl IntegerBandedMatrix {
    pub fn checked_matmul(&self, other: &Self) -> Result<Self> {
        if self.cols != other.rows {
            return Err(Error::Dimension { expected: self.cols, found: other.rows });
        }
        let mut out = Self::zeros(
            self.rows,
            other.cols,
            self.lower + other.lower,
            self.upper + other.upper,
        );
        for i in 0..self.rows {
            for j in out.row_range(i) {
                let mut acc: i128 = 0;
                for k in self.row_range(i) {
                    let term = self
                        .get(i, k)
                        .checked_mul(other.get(k, j))
                        .ok_or(Error::Overflow("banded product"))?;
                    acc = acc.checked_add(term).ok_or(Error::Overflow("banded product"))?;
                }
                out.set(i, j, acc);
            }
        }
        Ok(out)
    }

    pub fn checked_pow(&self, k: u32) -> Result<Self> {
        let mut acc = Self::identity(self.rows);
        for _ in 0..k {
            acc = acc.checked_matmul(self)?;
        }
        Ok(acc)
    }

    pub fn is_zero(&self) -> bool {
        self.bands.iter().all(|b| b.iter().all(|v| *v == 0))
    }

    pub fn trace(&self) -> i128 {
        self.band(0).map(|b| b.iter().sum()).unwrap_or(0)
    }

    pub fn column_sums(&self) -> Vec<i128> {
        let mut sums = vec![0; self.cols];
        for (_, j, v) in self.iter_entries() {
            sums[j] += v;
        }
        sums
    }
}

/// `(b−a)^p D_p` on the unit interval, exactly.
pub fn integer_derivative_matrix(degree: usize, p: usize) -> Result<IntegerBandedMatrix> {
    if p > degree {
        return Err(Error::Argument(format!(
            "derivative order p = {p} exceeds degree N = {degree}"
        )));
    }
    let mut falling: i128 = 1;
    for k in (degree - p + 1)..=degree {
        falling = falling.checked_mul(k as i128).ok_or(Error::Overflow("N!/(N−p)!"))?;
    }
    if p % 2 == 1 {
        falling = -falling;
    }
    let n = degree + 1;
    let mut m = IntegerBandedMatrix::zeros(n, n, p, p);
    for i in 0..n {
        for j in m.row_range(i) {
            let num = omega_numerator(i, j, p, degree)
                .checked_mul(falling)
                .ok_or(Error::Overflow("c_{p,N} ω numerator"))?;
            let den = binomial(degree as u64, j as u64).ok_or(Error::Overflow("C(N, j)"))?;
            debug_assert_eq!(num % den, 0, "D_p entry ({i},{j}) is not integral");
            m.set(i, j, num / den);
        }
    }
    Ok(m)
}

/// `D_p` for `basis`, bandwidths `(p, p)`.
pub fn build_derivative_matrix(basis: &BernsteinBasis, p: usize) -> Result<BandedMatrix> {
    let exact = integer_derivative_matrix(basis.degree(), p)?;
    let scale = basis.interval().width().powi(p as i32);
    Ok(exact.map(|v| v as f64 / scale))
}

/// `(D̃_1, D̃_2)`: `D_1` and `D_2` with first and last rows and columns removed.
pub fn build_interior_pair(basis: &BernsteinBasis) -> Result<(BandedMatrix, BandedMatrix)> {
    let n = basis.degree();
    if n < 2 {
        return Err(Error::Argument(format!("interior matrices need N ≥ 2, got N = {n}")));
    }
    let d1 = build_derivative_matrix(basis, 1)?;
    let d2 = build_derivative_matrix(basis, 2)?;
    Ok((d1.slice(1, n, 1, n), d2.slice(1, n, 1, n)))
}

/// `m · v` for a banded matrix.
pub fn band_matvec(m: &BandedMatrix, v: &[f64]) -> Result<Vec<f64>> {
    m.matvec(v)
}

pub fn to_dense(m: &BandedMatrix) -> Dense<f64> {
    m.to_dense()
}

/// Characteristic polynomial `det(λI − M)` of an exact integer matrix by the
/// Faddeev-LeVerrier recursion; coefficients from `λ^n` down to `λ^0`.
pub fn characteristic_polynomial(m: &Dense<i128>) -> Result<Vec<i128>> {
    let n = m.rows();
    let mut coeffs = vec![1i128];
    let mut aux = Dense::<i128>::identity(n);
    for k in 1..=n {
        let am = m.checked_matmul(&aux)?;
        let tr = am.trace();
        if tr % k as i128 != 0 {
            return Err(Error::Argument("Faddeev-LeVerrier division is not exact".into()));
        }
        let c = -tr / k as i128;
        coeffs.push(c);
        aux = am;
        for i in 0..n {
            let v = aux.get(i, i).checked_add(c).ok_or(Error::Overflow("charpoly"))?;
            aux.set(i, i, v);
        }
    }
    Ok(coeffs)
}

/// `(I − c D_p)^{−1} = Σ_{m=0}^{⌊N/p⌋} c^m D_p^m` (finite since `D_p` is nilpotent).
pub fn neumann_inverse(basis: &BernsteinBasis, p: usize, c: f64) -> Result<Dense<f64>> {
    let n = basis.len();
    let dp = build_derivative_matrix(basis, p)?.to_dense();
    let mut total = Dense::<f64>::identity(n);
    let mut power = Dense::<f64>::identity(n);
    let terms = basis.degree().checked_div(p).unwrap_or(0);
    let mut scale = 1.0;
    for _ in 0..terms {
        power = power.matmul(&dp)?;
        scale *= c;
        total = total.add_scaled(&power, scale)?;
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bernstein::Interval;

    fn dense_rows(m: &BandedMatrix) -> Vec<Vec<f64>> {
        let d = m.to_dense();
        (0..d.rows()).map(|i| (0..d.cols()).map(|j| d.get(i, j)).collect()).collect()
    }

    #[test]
    fn first_derivative_matrix_degree_two() {
        let d1 = build_derivative_matrix(&BernsteinBasis::unit(2), 1).unwrap();
        assert_eq!(
            dense_rows(&d1),
            vec![vec![-2.0, -1.0, 0.0], vec![2.0, 0.0, -2.0], vec![0.0, 1.0, 2.0]]
        );
        assert_eq!((d1.lower(), d1.upper()), (1, 1));
    }

    #[test]
    fn zeroth_order_is_identity() {
        let d0 = build_derivative_matrix(&BernsteinBasis::unit(3), 0).unwrap();
        assert_eq!(d0.to_dense(), Dense::identity(4));
    }

    #[test]
    fn second_derivative_degree_two_is_square_of_first() {
        let b = BernsteinBasis::unit(2);
        let d2 = build_derivative_matrix(&b, 2).unwrap();
        assert_eq!(
            dense_rows(&d2),
            vec![vec![2.0, 2.0, 2.0], vec![-4.0, -4.0, -4.0], vec![2.0, 2.0, 2.0]]
        );
        let d1 = build_derivative_matrix(&b, 1).unwrap();
        assert_eq!(d1.matmul(&d1).unwrap().to_dense(), d2.to_dense());
    }

    #[test]
    fn order_above_degree_is_rejected() {
        assert!(build_derivative_matrix(&BernsteinBasis::unit(2), 3).is_err());
    }

    #[test]
    fn general_interval_scales_by_width_power() {
        let b = BernsteinBasis::new(5, Interval::new(1.0, 3.0).unwrap());
        let u = build_derivative_matrix(&BernsteinBasis::unit(5), 2).unwrap();
        let g = build_derivative_matrix(&b, 2).unwrap();
        for (i, j, v) in u.iter_entries() {
            assert_eq!(g.get(i, j), v / 4.0);
        }
    }

    #[test]
    fn first_derivative_matches_printed_tridiagonal_form() {
        for n in 3..=12usize {
            let d1 = build_derivative_matrix(&BernsteinBasis::unit(n), 1).unwrap();
            let nf = n as f64;
            for i in 0..=n {
                let f = i as f64;
                assert_eq!(d1.get(i, i), 2.0 * f - nf);
                if i > 0 {
                    assert_eq!(d1.get(i, i - 1), nf - f + 1.0);
                }
                if i < n {
                    assert_eq!(d1.get(i, i + 1), -(f + 1.0));
                }
            }
        }
    }

    #[test]
    fn second_derivative_piecewise_form_degree_five() {
        // Offsets written as j − i (the row index is the differentiated function).
        let n = 5usize;
        let d2 = build_derivative_matrix(&BernsteinBasis::unit(n), 2).unwrap().to_dense();
        let nf = n as f64;
        for i in 0..=n {
            for j in 0..=n {
                let f = i as f64;
                let expected = match j as i64 - i as i64 {
                    -2 => (nf - f + 2.0) * (nf - f + 1.0),
                    -1 => -2.0 * (nf - f + 1.0) * (nf - 2.0 * f + 1.0),
                    0 => nf * nf - 6.0 * nf * f + 6.0 * f * f - nf,
                    1 => 2.0 * (f + 1.0) * (nf - 2.0 * f - 1.0),
                    2 => (f + 2.0) * (f + 1.0),
                    _ => 0.0,
                };
                assert_eq!(d2.get(i, j), expected, "({i},{j})");
            }
        }
    }

    #[test]
    fn interior_pair_examples() {
        let (t1, t2) = build_interior_pair(&BernsteinBasis::unit(2)).unwrap();
        assert_eq!((t1.rows(), t1.get(0, 0)), (1, 0.0));
        assert_eq!(t2.get(0, 0), -4.0);

        let (t1, _) = build_interior_pair(&BernsteinBasis::unit(4)).unwrap();
        assert_eq!(t1.norm_inf(), 6.0);
        let d1 = build_derivative_matrix(&BernsteinBasis::unit(4), 1).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                assert_eq!(t1.get(i, j), d1.get(i + 1, j + 1));
            }
        }
        assert_eq!((t1.lower(), t1.upper()), (1, 1));

        let (_, t2) = build_interior_pair(&BernsteinBasis::unit(16)).unwrap();
        assert_eq!(t2.norm_inf(), 616.0);
        assert_eq!((t2.lower(), t2.upper()), (2, 2));

        assert!(build_interior_pair(&BernsteinBasis::unit(1)).is_err());
    }

    #[test]
    fn matvec_examples() {
        let id = BandedMatrix::identity(4);
        let v = vec![1.0, -2.0, 3.5, 0.25];
        assert_eq!(band_matvec(&id, &v).unwrap(), v);

        let d1 = build_derivative_matrix(&BernsteinBasis::unit(2), 1).unwrap();
        assert_eq!(band_matvec(&d1, &[1.0, 1.0, 1.0]).unwrap(), vec![-3.0, 0.0, 3.0]);
        // the derivative of the constant 1 has coefficients D_1ᵀ·1 = 0
        assert_eq!(band_matvec(&d1.transpose(), &[1.0, 1.0, 1.0]).unwrap(), vec![0.0; 3]);
        assert!(band_matvec(&d1, &[1.0]).is_err());
    }

    #[test]
    fn to_dense_of_single_entry() {
        let m = BandedMatrix::from_fn(1, 1, 0, 0, |_, _| 7.5);
        assert_eq!(to_dense(&m).get(0, 0), 7.5);
    }

    #[test]
    fn slicing_keeps_band_structure() {
        let m = BandedMatrix::from_fn(6, 6, 2, 1, |i, j| (10 * i + j) as f64);
        let s = m.slice(1, 5, 1, 5);
        assert_eq!((s.lower(), s.upper()), (2, 1));
        for i in 0..4 {
            for j in 0..4 {
                assert_eq!(s.get(i, j), m.get(i + 1, j + 1));
            }
        }
    }

    #[test]
    fn characteristic_polynomial_of_small_matrix() {
        // [[2, 1], [1, 2]] → λ² − 4λ + 3
        let mut m = Dense::<i128>::zeros(2, 2);
        m.set(0, 0, 2);
        m.set(0, 1, 1);
        m.set(1, 0, 1);
        m.set(1, 1, 2);
        assert_eq!(characteristic_polynomial(&m).unwrap(), vec![1, -4, 3]);
    }
}
