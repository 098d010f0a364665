//! Named property checks run by `bernfad verify`.
//!
//! Every check reports a measured defect next to its verdict. Random inputs
//! come from a ChaCha stream seeded by the caller, so a report is
//! reproducible from its seed.

use std::sync::Arc;

use num_rational::BigRational;
use num_traits::ToPrimitive;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::bernstein::{binomial, eval_all, poly_eval, BernsteinBasis};
use crate::caputo::{builtin_examples, caputo_power, caputo_series, gamma, l1_weights, TaylorSeries, TimeGrid};
use crate::dual::{dual_coefficients, DualPairing};
use crate::error::Result;
use crate::harness::{
    run_example, temporal_sweep, weighted_energy_norm, weighted_l2_norm, CsvTable, Cell, RunConfig,
};
use crate::linalg::{banded_lu_factor, dense_inf_condition_number, gauss_legendre, inf_condition_number, Dense};
use crate::opmatrix::{
    build_derivative_matrix, build_interior_pair, characteristic_polynomial, integer_derivative_matrix,
    neumann_inverse, BandedMatrix,
};
use crate::oracle::{bernstein_derivative_exact, caputo_quadrature, integrate_monomial_unit};
use crate::solver::{assemble, solve, solve_assembled, ProblemSpec, Source, SourceFn, PAIRING_POINTS};

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub passed: bool,
    /// Largest observed violation (0 for exact checks that hold).
    pub defect: f64,
    pub detail: String,
}

impl Check {
    fn tolerance(defect: f64, tol: f64, detail: impl Into<String>) -> Self {
        Self { passed: defect <= tol, defect, detail: detail.into() }
    }

    fn exact(failures: usize, detail: impl Into<String>) -> Self {
        Self { passed: failures == 0, defect: failures as f64, detail: detail.into() }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PropertyResult {
    pub name: &'static str,
    pub check: Check,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerifyReport {
    pub seed: u64,
    pub results: Vec<PropertyResult>,
}

impl VerifyReport {
    pub fn all_passed(&self) -> bool {
        self.results.iter().all(|r| r.check.passed)
    }

    pub fn to_table(&self) -> CsvTable {
        let mut t = CsvTable::new(&["property", "status", "defect", "detail"]);
        for r in &self.results {
            t.push(vec![
                Cell::Text(r.name.to_string()),
                Cell::Text(if r.check.passed { "pass" } else { "FAIL" }.to_string()),
                Cell::Real(r.check.defect),
                Cell::Text(r.check.detail.clone()),
            ]);
        }
        t
    }
}

type Property = fn(&mut ChaCha8Rng) -> Result<Check>;

pub const PROPERTIES: &[(&str, Property)] = &[
    ("bernstein.partition_of_unity", partition_of_unity),
    ("bernstein.derivative_oracle", derivative_oracle),
    ("dual.biorthogonality", biorthogonality),
    ("opmatrix.column_sums", column_sums),
    ("opmatrix.nilpotency", nilpotency),
    ("opmatrix.d1_power_rows", d1_power_rows),
    ("opmatrix.reflection", reflection),
    ("opmatrix.trace_and_charpoly", trace_and_charpoly),
    ("opmatrix.neumann_inverse", neumann),
    ("opmatrix.product_consistency", product_consistency),
    ("opmatrix.interior_norms", interior_norms),
    ("linalg.quadrature_exactness", quadrature_exactness),
    ("linalg.lu_reconstruction", lu_reconstruction),
    ("linalg.condition_consistency", condition_consistency),
    ("caputo.telescoping", telescoping),
    ("caputo.a_equals_b", a_equals_b),
    ("caputo.series_vs_power", series_vs_power),
    ("caputo.manufactured_residual", manufactured_residual),
    ("solver.matrix_identity", matrix_identity),
    ("solver.equal_tau", equal_tau),
    ("solver.polynomial_exactness", polynomial_exactness),
    ("solver.pairing_shortcut", pairing_shortcut),
    ("solver.zero_fixed_point", zero_fixed_point),
    ("solver.stability", stability),
    ("harness.error_norm_consistency", error_norm_consistency),
    ("harness.csv_round_trip", csv_round_trip),
    ("harness.temporal_rates", temporal_rates),
];

/// Runs every property whose name contains `filter` (all when `None`).
pub fn verify(filter: Option<&str>, seed: u64) -> VerifyReport {
    let results = PROPERTIES
        .iter()
        .filter(|(name, _)| filter.is_none_or(|f| name.contains(f)))
        .map(|&(name, prop)| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let check = prop(&mut rng).unwrap_or_else(|e| Check {
                passed: false,
                defect: f64::INFINITY,
                detail: format!("error: {e}"),
            });
            PropertyResult { name, check }
        })
        .collect();
    VerifyReport { seed, results }
}

// ---------------------------------------------------------------------------
// bernstein / dual

fn partition_of_unity(rng: &mut ChaCha8Rng) -> Result<Check> {
    let mut worst: f64 = 0.0;
    for n in 0..=30 {
        let b = BernsteinBasis::unit(n);
        for _ in 0..20 {
            let s: f64 = eval_all(&b, rng.gen())?.iter().sum();
            worst = worst.max((s - 1.0).abs());
        }
    }
    Ok(Check::tolerance(worst, 1e-14, "|Σ_i B_{i,N}(x) − 1|, N ≤ 30"))
}

/// Derivative through `D_pᵀ c` against exact monomial differentiation; the
/// relative error is taken against the largest exact value over the samples.
pub fn derivative_defect(n: usize, p: usize, coeffs: &[f64], points: &[f64]) -> Result<f64> {
    let basis = BernsteinBasis::unit(n);
    let dp = build_derivative_matrix(&basis, p)?;
    let dc = dp.transpose().matvec(coeffs)?;
    let mut scale: f64 = 0.0;
    let mut diff: f64 = 0.0;
    for &x in points {
        let fast = poly_eval(&dc, &basis, x)?;
        let exact = bernstein_derivative_exact(coeffs, p, 0.0, 1.0, x);
        scale = scale.max(exact.abs());
        diff = diff.max((fast - exact).abs());
    }
    Ok(if scale == 0.0 { diff } else { diff / scale })
}

fn derivative_oracle(rng: &mut ChaCha8Rng) -> Result<Check> {
    let mut worst: f64 = 0.0;
    for n in 1..=12 {
        for p in 0..=n {
            let c: Vec<f64> = (0..=n).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let pts: Vec<f64> = (0..25).map(|_| rng.gen()).collect();
            worst = worst.max(derivative_defect(n, p, &c, &pts)?);
        }
    }
    Ok(Check::tolerance(worst, 1e-10, "relative error vs exact monomial derivative, N ≤ 12"))
}

/// `max_{i,j} |∫B_i B*_j − δ_ij|` with an `(N+1)`-point rule (exact for degree 2N).
pub fn biorthogonality_defect(n: usize) -> Result<f64> {
    let basis = BernsteinBasis::unit(n);
    let d = dual_coefficients(&basis);
    let rule = gauss_legendre(n + 1)?;
    let bq: Vec<Vec<f64>> = rule.nodes().iter().map(|&x| eval_all(&basis, x)).collect::<Result<_>>()?;
    let psi: Vec<Vec<f64>> = (0..=n)
        .map(|j| rule.nodes().iter().map(|&x| poly_eval(d.row(j), &basis, x)).collect::<Result<_>>())
        .collect::<Result<_>>()?;
    let mut worst: f64 = 0.0;
    for i in 0..=n {
        for (j, psi_j) in psi.iter().enumerate() {
            let g: f64 = (0..rule.len()).map(|q| rule.weights()[q] * bq[q][i] * psi_j[q]).sum();
            let target = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((g - target).abs());
        }
    }
    Ok(worst)
}

fn biorthogonality(_: &mut ChaCha8Rng) -> Result<Check> {
    let mut worst: f64 = 0.0;
    for n in 1..=15 {
        worst = worst.max(biorthogonality_defect(n)?);
    }
    Ok(Check::tolerance(worst, 1e-8, "max |∫B_i B*_j − δ_ij|, N ≤ 15"))
}

// ---------------------------------------------------------------------------
// opmatrix (exact)

fn column_sums(_: &mut ChaCha8Rng) -> Result<Check> {
    let mut bad = 0;
    for n in 1..=12 {
        for p in 1..=n {
            let m = integer_derivative_matrix(n, p)?;
            bad += m.column_sums().iter().filter(|&&s| s != 0).count();
        }
    }
    Ok(Check::exact(bad, "nonzero column sums of (b−a)^p D_p, N ≤ 12, 1 ≤ p ≤ N"))
}

/// `Some(index)` if `D_p` has nilpotency index `⌈(N+1)/p⌉`, else `None`.
pub fn nilpotency_holds(n: usize, p: usize) -> Result<bool> {
    let m = integer_derivative_matrix(n, p)?;
    let k = (n + 1).div_ceil(p) as u32;
    let before = m.checked_pow(k - 1)?;
    let at = before.checked_matmul(&m)?;
    Ok(at.is_zero() && !before.is_zero())
}

fn nilpotency(_: &mut ChaCha8Rng) -> Result<Check> {
    let mut bad = 0;
    for n in 1..=10 {
        for p in 1..=n {
            if !nilpotency_holds(n, p)? {
                bad += 1;
            }
        }
    }
    Ok(Check::exact(bad, "D_p^⌈(N+1)/p⌉ = 0 ≠ D_p^{⌈(N+1)/p⌉−1}, N ≤ 10"))
}

/// `(D_1^N)_{i,j} = (−1)^N N! (−1)^i C(N,i)` for all `j`.
pub fn d1_power_rows_hold(n: usize) -> Result<bool> {
    let d = integer_derivative_matrix(n, 1)?.checked_pow(n as u32)?;
    let fact: i128 = (1..=n as i128).product();
    let c = if n % 2 == 0 { fact } else { -fact };
    for i in 0..=n {
        let s = if i % 2 == 0 { 1 } else { -1 };
        let want = c * s * binomial(n as u64, i as u64).unwrap_or(0);
        if (0..=n).any(|j| d.get(i, j) != want) {
            return Ok(false);
        }
    }
    Ok(true)
}

fn d1_power_rows(_: &mut ChaCha8Rng) -> Result<Check> {
    let bad = (1..=8).filter(|&n| !d1_power_rows_hold(n).unwrap_or(false)).count();
    Ok(Check::exact(bad, "(D_1^N)_{i,j} = c_{N,N} (−1)^i C(N,i), N ≤ 8"))
}

pub fn reflection_failures(n: usize, p: usize) -> Result<usize> {
    let m = integer_derivative_matrix(n, p)?;
    let s = if p % 2 == 0 { 1 } else { -1 };
    Ok((0..=n)
        .flat_map(|i| (0..=n).map(move |j| (i, j)))
        .filter(|&(i, j)| m.get(i, j) != s * m.get(n - i, n - j))
        .count())
}

fn reflection(_: &mut ChaCha8Rng) -> Result<Check> {
    let mut bad = 0;
    for n in 1..=12 {
        for p in 0..=n {
            bad += reflection_failures(n, p)?;
        }
    }
    Ok(Check::exact(bad, "(D_p)_{i,j} = (−1)^p (D_p)_{N−i,N−j}, N ≤ 12"))
}

fn trace_and_charpoly(_: &mut ChaCha8Rng) -> Result<Check> {
    let mut bad = 0;
    for n in 1..=8 {
        for p in 1..=n {
            let m = integer_derivative_matrix(n, p)?;
            if m.trace() != 0 {
                bad += 1;
            }
            let cp = characteristic_polynomial(&m.to_dense())?;
            if cp[0] != 1 || cp[1..].iter().any(|&c| c != 0) {
                bad += 1;
            }
        }
    }
    Ok(Check::exact(bad, "trace D_p = 0 and det(λI − D_p) = λ^{N+1}, N ≤ 8"))
}

fn neumann(_: &mut ChaCha8Rng) -> Result<Check> {
    let mut worst: f64 = 0.0;
    for n in 1..=8 {
        let basis = BernsteinBasis::unit(n);
        for p in 1..=n {
            let dp = build_derivative_matrix(&basis, p)?.to_dense();
            for c in [1.0, -1.0, 0.5, -0.5] {
                let series = neumann_inverse(&basis, p, c)?;
                let m = Dense::<f64>::identity(n + 1).add_scaled(&dp, -c)?;
                // I − cD_p is badly conditioned for N near 8; compare against the exact inverse.
                let exact = crate::oracle::rational_inverse(&m)?;
                let inv = Dense::from_fn(n + 1, n + 1, |i, j| exact[i][j].to_f64().unwrap_or(f64::NAN));
                worst = worst.max(series.max_abs_diff(&inv) / inv.norm_inf().max(1.0));
            }
        }
    }
    Ok(Check::tolerance(worst, 1e-10, "(I − cD_p)^{-1} = Σ_m c^m D_p^m vs exact rational inverse, N ≤ 8"))
}

fn product_consistency(_: &mut ChaCha8Rng) -> Result<Check> {
    let mut bad = 0;
    for n in 1..=10 {
        let d1 = integer_derivative_matrix(n, 1)?;
        for p in 0..=n {
            if integer_derivative_matrix(n, p)? != d1.checked_pow(p as u32)? {
                bad += 1;
            }
        }
    }
    Ok(Check::exact(bad, "D_p = D_1^p exactly, N ≤ 10"))
}

fn interior_norms(_: &mut ChaCha8Rng) -> Result<Check> {
    let mut bad = 0;
    for n in 4..=30usize {
        let (d1, d2) = build_interior_pair(&BernsteinBasis::unit(n))?;
        let nf = n as f64;
        if d1.norm_inf() != 2.0 * (nf - 1.0) {
            bad += 1;
        }
        let closed = match n {
            7..=15 => Some(2.0 * nf * nf + 10.0 * nf - 68.0),
            16.. => Some(4.0 * nf * nf - 28.0 * nf + 40.0),
            _ => None,
        };
        if closed.is_some_and(|c| c != d2.norm_inf()) {
            bad += 1;
        }
    }
    Ok(Check::exact(bad, "‖D̃_1‖ = 2(N−1) (N ≥ 4), ‖D̃_2‖ closed forms (7 ≤ N ≤ 30)"))
}

// ---------------------------------------------------------------------------
// linalg

fn quadrature_exactness(rng: &mut ChaCha8Rng) -> Result<Check> {
    let mut worst: f64 = 0.0;
    for n in [2usize, 5, 20] {
        let rule = gauss_legendre(n)?;
        for _ in 0..10 {
            let coeffs: Vec<f64> = (0..2 * n).map(|_| rng.gen()).collect();
            let mono: Vec<BigRational> = coeffs.iter().map(|&c| BigRational::from_float(c).expect("finite")).collect();
            let exact = integrate_monomial_unit(&mono).to_f64().unwrap_or(f64::NAN);
            let q = rule.integrate(|x| coeffs.iter().rev().fold(0.0, |acc, c| acc * x + c));
            worst = worst.max(((q - exact) / exact).abs());
        }
    }
    Ok(Check::tolerance(worst, 1e-13, "n-point rule on degree 2n−1, n ∈ {2, 5, 20}"))
}

pub fn random_banded(rng: &mut ChaCha8Rng, n: usize, kl: usize, ku: usize) -> BandedMatrix {
    BandedMatrix::from_fn(n, n, kl, ku, |_, _| rng.gen_range(-1.0..1.0))
}

fn lu_reconstruction(rng: &mut ChaCha8Rng) -> Result<Check> {
    let mut worst: f64 = 0.0;
    for _ in 0..40 {
        let n = rng.gen_range(3..=60);
        let (kl, ku) = (rng.gen_range(1..=4), rng.gen_range(1..=4));
        let m = random_banded(rng, n, kl, ku);
        let lu = match banded_lu_factor(&m) {
            Ok(lu) => lu,
            Err(_) => continue,
        };
        let (p, l, u) = lu.factors_dense();
        let pa = p.matmul(&m.to_dense())?;
        let scale = (0..n).flat_map(|i| (0..n).map(move |j| (i, j))).fold(0.0f64, |s, (i, j)| s.max(pa.get(i, j).abs()));
        worst = worst.max(pa.max_abs_diff(&l.matmul(&u)?) / scale);
    }
    Ok(Check::tolerance(worst, 1e-12, "‖PA − LU‖_max / ‖A‖_max, bandwidths 1..4, sizes 3..60"))
}

fn condition_consistency(rng: &mut ChaCha8Rng) -> Result<Check> {
    let mut worst: f64 = 0.0;
    let mut below_one = 0;
    for _ in 0..20 {
        let n = rng.gen_range(3..=40);
        let m = BandedMatrix::from_fn(n, n, 2, 2, |i, j| {
            if i == j {
                4.0 + rng.gen::<f64>()
            } else {
                rng.gen_range(-1.0..1.0)
            }
        });
        let c = inf_condition_number(&m)?;
        let d = dense_inf_condition_number(&m.to_dense())?;
        if c < 1.0 {
            below_one += 1;
        }
        worst = worst.max(((c - d) / d).abs());
    }
    let mut check = Check::tolerance(worst, 1e-8, "banded vs dense cond_∞, relative");
    if below_one > 0 {
        check.passed = false;
        check.detail.push_str(&format!("; {below_one} values below 1"));
    }
    Ok(check)
}

// ---------------------------------------------------------------------------
// caputo

fn telescoping(rng: &mut ChaCha8Rng) -> Result<Check> {
    let mut worst: f64 = 0.0;
    for _ in 0..10 {
        let alpha = rng.gen_range(0.01..0.99);
        let w = l1_weights(alpha, &TimeGrid::new(200, 1.0)?)?;
        for k in 1..=200 {
            let s = (1.0 - w.b(1)) + (1..k).map(|j| w.b(j) - w.b(j + 1)).sum::<f64>() + w.b(k);
            worst = worst.max((s - 1.0).abs());
        }
    }
    Ok(Check::tolerance(worst, 1e-14, "(1−b_1) + Σ(b_j − b_{j+1}) + b_k = 1, k ≤ 200"))
}

fn a_equals_b(rng: &mut ChaCha8Rng) -> Result<Check> {
    let mut worst: f64 = 0.0;
    for _ in 0..10 {
        let alpha = rng.gen_range(0.01..0.99);
        let w = l1_weights(alpha, &TimeGrid::new(100, 1.0)?)?;
        let e = 1.0 - alpha;
        for k in 0..100usize {
            for j in 0..=k {
                let direct = ((k + 1 - j) as f64).powf(e) - ((k - j) as f64).powf(e);
                worst = worst.max((w.a(k, j) - direct).abs()).max((w.a(k, j) - w.b(k - j)).abs());
            }
            if w.a(k, k) != 1.0 {
                worst = f64::INFINITY;
            }
        }
    }
    Ok(Check::tolerance(worst, 0.0, "a_{k,j} = b_{k−j} = (k+1−j)^{1−α} − (k−j)^{1−α}, a_{k,k} = 1"))
}

fn series_vs_power(rng: &mut ChaCha8Rng) -> Result<Check> {
    let mut worst: f64 = 0.0;
    for m in 1..=8usize {
        for _ in 0..10 {
            let alpha = rng.gen_range(0.01..0.99);
            let t = rng.gen_range(0.0..2.0);
            let mut c = vec![0.0; m + 1];
            c[m] = 1.0;
            let s = caputo_series(&TaylorSeries::Polynomial(c), alpha, t, 1e-14)?;
            let p = caputo_power(m as u32, alpha, t);
            worst = worst.max((s - p).abs() / p.abs().max(1e-300));
        }
    }
    Ok(Check::tolerance(worst, 1e-12, "series of t^m vs Γ(m+1)/Γ(m+1−α) t^{m−α}"))
}

/// `max |D_t^α u − κ₁u_xx + κ₂u_x − S|` over random points, where `S` is
/// the solver's source closure and `D_t^α u` comes from the series; the
/// series is itself cross-checked against quadrature of the Caputo integral.
pub fn manufactured_residual_defect(rng: &mut ChaCha8Rng, points: usize) -> Result<(f64, f64)> {
    let mut residual: f64 = 0.0;
    let mut cross: f64 = 0.0;
    for ex in builtin_examples() {
        let (k1, k2) = ex.kappa;
        for _ in 0..points {
            let alpha = rng.gen_range(0.05..0.95);
            let (x, t): (f64, f64) = (rng.gen(), rng.gen_range(0.0..1.0));
            let series = caputo_series(&ex.temporal_series, alpha, t, 1e-14)?;
            let quad = caputo_quadrature(&ex.temporal_dt, alpha, t);
            cross = cross.max((series - quad).abs());
            let s = ex.source_at_time(t, alpha, k1, k2)?(x);
            let r = (ex.spatial)(x) * series - k1 * ex.u_xx(x, t) + k2 * ex.u_x(x, t) - s;
            residual = residual.max(r.abs());
        }
    }
    Ok((residual, cross))
}

fn manufactured_residual(rng: &mut ChaCha8Rng) -> Result<Check> {
    let (r, c) = manufactured_residual_defect(rng, 50)?;
    let mut check = Check::tolerance(r.max(c), 1e-10, format!("PDE residual {r:.2e}; series vs quadrature {c:.2e}"));
    check.defect = r.max(c);
    Ok(check)
}

// ---------------------------------------------------------------------------
// solver

fn matrix_identity(rng: &mut ChaCha8Rng) -> Result<Check> {
    let mut worst: f64 = 0.0;
    for n in 2..=20 {
        let (k1, k2, alpha) = (rng.gen_range(0.05..2.0), rng.gen_range(0.05..2.0), rng.gen_range(0.1..0.9));
        let spec = ProblemSpec::new(k1, k2, alpha, 1.0, Arc::new(|_| 0.0), Source::Zero)?;
        let sys = assemble(&spec, n, TimeGrid::new(40, 1.0)?)?;
        let basis = BernsteinBasis::unit(n);
        let d1 = build_derivative_matrix(&basis, 1)?;
        let d2 = build_derivative_matrix(&basis, 2)?;
        let a = sys.system_matrix();
        for i in 0..n - 1 {
            for j in 0..n - 1 {
                let id = if i == j { sys.mu() } else { 0.0 };
                let want = id - k1 * d2.get(j + 1, i + 1) + k2 * d1.get(j + 1, i + 1);
                let scale = want.abs().max(sys.mu());
                worst = worst.max((a.get(i, j) - want).abs() / scale);
            }
        }
    }
    Ok(Check::tolerance(worst, 1e-13, "A = μI − κ₁D̃_2ᵀ + κ₂D̃_1ᵀ, relative"))
}

fn equal_tau(_: &mut ChaCha8Rng) -> Result<Check> {
    let spec = ProblemSpec::new(0.3, 1.1, 0.4, 1.0, Arc::new(|_| 0.0), Source::Zero)?;
    let a = assemble(&spec, 10, TimeGrid::new(25, 1.0)?)?;
    let b = assemble(&spec.clone(), 10, TimeGrid::new(50, 2.0)?)?;
    let same = a.system_matrix() == b.system_matrix();
    Ok(Check::exact(usize::from(!same), "equal τ on different grids gives bit-identical A"))
}

fn polynomial_exactness(_: &mut ChaCha8Rng) -> Result<Check> {
    let mut worst: f64 = 0.0;
    for n in [3usize, 4, 7] {
        let (k1, k2, alpha) = (0.4, 1.3, 0.6);
        let g0 = gamma(2.0 - alpha);
        // u = x²(1−x) t
        let source: SourceFn = Arc::new(move |x: f64, t: f64| {
            x * x * (1.0 - x) * t.powf(1.0 - alpha) / g0 - k1 * (2.0 - 6.0 * x) * t + k2 * (2.0 * x - 3.0 * x * x) * t
        });
        let spec = ProblemSpec::new(k1, k2, alpha, 1.0, Arc::new(|_| 0.0), Source::Function(source))?;
        let h = solve(&spec, n, TimeGrid::new(10, 1.0)?)?;
        for k in 1..=10 {
            let t = h.grid.time(k);
            for j in 0..=20 {
                let x = j as f64 / 20.0;
                worst = worst.max((h.evaluate(x, k)? - x * x * (1.0 - x) * t).abs());
            }
        }
    }
    Ok(Check::tolerance(worst, 1e-10, "u = x²(1−x)t reproduced at every step, N ∈ {3, 4, 7}"))
}

fn pairing_shortcut(rng: &mut ChaCha8Rng) -> Result<Check> {
    let mut worst: f64 = 0.0;
    for n in 2..=12 {
        let basis = BernsteinBasis::unit(n);
        let pairing = DualPairing::new(basis, PAIRING_POINTS)?;
        let mut c = vec![0.0; n + 1];
        for v in c.iter_mut().take(n).skip(1) {
            *v = rng.gen_range(-1.0..1.0);
        }
        let q = pairing.pair(|x| poly_eval(&c, &basis, x).unwrap_or(f64::NAN));
        for i in 1..n {
            worst = worst.max((q[i] - c[i]).abs());
        }
    }
    Ok(Check::tolerance(worst, 1e-12, "(u_N, ψ_i) by quadrature = c_i, N ≤ 12"))
}

fn zero_fixed_point(_: &mut ChaCha8Rng) -> Result<Check> {
    let spec = ProblemSpec::new(1.0, 1.0, 0.5, 1.0, Arc::new(|_| 0.0), Source::Zero)?;
    let mut nonzero = 0;
    for n in [2usize, 6, 12] {
        let h = solve(&spec, n, TimeGrid::new(50, 1.0)?)?;
        nonzero += h.coeffs.iter().flatten().filter(|v| **v != 0.0).count();
    }
    Ok(Check::exact(nonzero, "S ≡ 0, g ≡ 0 gives an identically zero history"))
}

/// `max_k ‖u_N^k‖_{1,w} / ‖u_N^0‖_w` for `S ≡ 0`, `g = sin(πx)`.
pub fn stability_ratio(n: usize, steps: usize, kappa1: f64, kappa2: f64, alpha: f64) -> Result<f64> {
    let g = |x: f64| (std::f64::consts::PI * x).sin();
    let spec = ProblemSpec::new(kappa1, kappa2, alpha, 1.0, Arc::new(g), Source::Zero)?;
    let sys = assemble(&spec, n, TimeGrid::new(steps, 1.0)?)?;
    let h = solve_assembled(&sys)?;
    let a1 = crate::harness::alpha1(&h);
    let u0 = crate::harness::solution_with_derivative(&h, 0)?;
    let n0 = weighted_l2_norm(&|x| u0(x).0, &h.basis, kappa1, kappa2)?;
    let mut worst: f64 = 0.0;
    for k in 1..=steps {
        let uk = crate::harness::solution_with_derivative(&h, k)?;
        worst = worst.max(weighted_energy_norm(&uk, &h.basis, kappa1, kappa2, a1)? / n0);
    }
    Ok(worst)
}

fn stability(_: &mut ChaCha8Rng) -> Result<Check> {
    let mut worst: f64 = 0.0;
    let mut failing = Vec::new();
    for n in 2..=12 {
        let r = stability_ratio(n, 200, 1.0, 1.0, 0.5)?;
        if r > 1.0 + 1e-8 {
            failing.push(n);
        }
        worst = worst.max(r - 1.0);
    }
    let detail = if failing.is_empty() {
        "‖u^k‖_{1,w} ≤ ‖u^0‖_w (1 + 1e-8), N ≤ 12, M = 200".to_string()
    } else {
        format!("bound exceeded for N = {failing:?} (κ₁ = κ₂ = 1, α = 0.5, M = 200)")
    };
    Ok(Check { passed: failing.is_empty(), defect: worst.max(0.0), detail })
}

// ---------------------------------------------------------------------------
// harness

fn error_norm_consistency(_: &mut ChaCha8Rng) -> Result<Check> {
    let cells: [(&str, f64, usize, usize); 6] = [
        ("ex1", 0.25, 4, 10),
        ("ex1", 0.5, 4, 10),
        ("ex1", 0.75, 4, 10),
        ("ex3", 0.5, 6, 80),
        ("ex3", 0.5, 10, 320),
        ("ex4", 0.75, 14, 100),
    ];
    let mut worst: f64 = 0.0;
    for (name, alpha, n, m) in cells {
        let ex = crate::caputo::example(name)?;
        let (_, r) = run_example(&ex, &RunConfig::for_example(&ex, alpha, n, m))?;
        worst = worst.max((r.l_2_rms / r.l_2_quadrature - 1.0).abs());
    }
    Ok(Check::tolerance(worst, 0.05, "uniform-grid L² vs quadrature L², relative"))
}

fn csv_round_trip(rng: &mut ChaCha8Rng) -> Result<Check> {
    let mut t = CsvTable::new(&["i", "a", "b"]);
    for i in 0..50 {
        let a = rng.gen_range(-1.0..1.0) * 10f64.powi(rng.gen_range(-12..12));
        t.push(vec![Cell::Int(i), Cell::Real(a), if i % 3 == 0 { Cell::Empty } else { Cell::Real(rng.gen()) }]);
    }
    let text = t.emit()?;
    let back = CsvTable::parse(&text)?;
    let bad = usize::from(back != t.rounded()) + usize::from(back.emit()? != text);
    Ok(Check::exact(bad, "parse(emit(t)) = rounded(t) and re-emission is identical"))
}

/// Finest three temporal rates for `ex` at `α` with `N = 14`,
/// `M ∈ {25, 50, 100, 200, 400}`.
pub fn finest_rates(name: &str, alpha: f64) -> Result<Vec<f64>> {
    let ex = crate::caputo::example(name)?;
    let cfg = RunConfig::for_example(&ex, alpha, 14, 25);
    let t = temporal_sweep(&ex, &cfg, &[25, 50, 100, 200, 400])?;
    Ok(t.rates()[1..].to_vec())
}

fn temporal_rates(_: &mut ChaCha8Rng) -> Result<Check> {
    let mut worst: f64 = 0.0;
    let mut notes = Vec::new();
    for ex in builtin_examples() {
        for alpha in [0.25, 0.5, 0.75] {
            let rates = finest_rates(ex.name, alpha)?;
            let d = rates.iter().map(|r| (r - (2.0 - alpha)).abs()).fold(0.0, f64::max);
            if d > 0.05 {
                notes.push(format!("{} α={alpha}: {rates:.3?}", ex.name));
            }
            worst = worst.max(d);
        }
    }
    let detail = if notes.is_empty() {
        "finest three rates within ±0.05 of 2 − α (N = 14, M = 25..400)".to_string()
    } else {
        notes.join("; ")
    };
    Ok(Check::tolerance(worst, 0.05, detail))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::error_norms;
    use crate::oracle::bernstein_to_monomial;

    #[test]
    fn filter_selects_by_substring() {
        let r = verify(Some("opmatrix.column"), 0);
        assert_eq!(r.results.len(), 1);
        assert!(r.all_passed());
    }

    #[test]
    fn examples_from_the_property_list() {
        assert!(integer_derivative_matrix(12, 3).unwrap().column_sums().iter().all(|&s| s == 0));
        let d2 = integer_derivative_matrix(7, 2).unwrap();
        assert!(d2.checked_pow(4).unwrap().is_zero());
        assert!(!d2.checked_pow(3).unwrap().is_zero());
    }

    #[test]
    fn error_norms_on_exact_history_vanish() {
        let spec = ProblemSpec::new(1.0, 1.0, 0.5, 1.0, Arc::new(|_| 0.0), Source::Zero).unwrap();
        let h = solve(&spec, 4, TimeGrid::new(3, 1.0).unwrap()).unwrap();
        let r = error_norms(&|_| (0.0, 0.0), &h, 3).unwrap();
        assert_eq!((r.l_inf, r.l_2, r.h1w), (0.0, 0.0, 0.0));
    }

    #[test]
    fn monomial_oracle_integral_of_basis() {
        // ∫ B_{i,N} = 1/(N+1)
        let mut c = vec![0.0; 6];
        c[2] = 1.0;
        let v = integrate_monomial_unit(&bernstein_to_monomial(&c)).to_f64().unwrap();
        assert!((v - 1.0 / 6.0).abs() < 1e-16);
    }
}
