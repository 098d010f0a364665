//! Petrov-Galerkin time march.
//!
//! The trial space is spanned by the interior Bernstein polynomials
//! `B_{1,N}, …, B_{N−1,N}` (which vanish at both ends); the test functions are
//! the corresponding dual functions `ψ_i = B*_{i,N}`. Each L1 step solves
//!
//! ```text
//!     A c^{k+1} = b^{k+1},   Aᵀ = μ I − κ₁ D̃₂ + κ₂ D̃₁,
//!     b^{k+1}_i = μ (c^k_i − Σ_{j<k} a_{k,j} (c^{j+1}_i − c^j_i)) + (S^{k+1}, ψ_i).
//! ```
//!
//! `A` depends only on `(α, τ, κ₁, κ₂, N)`, so it is factored once.
//!
//! The boundary parts of `B_{i,N}'` and `B_{i,N}''` (their `B_{0,N}` and
//! `B_{N,N}` components) drop out: biorthogonality makes them orthogonal to
//! every interior `ψ_i`.

use std::fmt;
use std::io::{Read, Write};
use std::sync::Arc;

use crate::bernstein::{eval_all, BernsteinBasis, Interval};
use crate::caputo::{l1_weights, L1Weights, ManufacturedSolution, TimeGrid};
use crate::dual::{dual_coefficients, DualCoefficients, DualPairing};
use crate::error::{Error, Result};
use crate::linalg::{banded_lu_factor, BandedLU};
use crate::opmatrix::{build_interior_pair, BandedMatrix};

/// Gauss-Legendre points used for every pairing with the dual basis.
pub const PAIRING_POINTS: usize = 20;
/// Tolerance for the homogeneous boundary check on the initial datum.
pub const BOUNDARY_TOL: f64 = 1e-12;

pub type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;
pub type SourceFn = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;

#[derive(Clone)]
pub enum Source {
    Zero,
    /// `S(x, t)`.
    Function(SourceFn),
    /// Built from a manufactured solution with the problem's `α, κ₁, κ₂`.
    Manufactured(ManufacturedSolution),
}

impl fmt::Debug for Source {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Zero => f.write_str("Zero"),
            Self::Function(_) => f.write_str("Function(..)"),
            Self::Manufactured(m) => write!(f, "Manufactured({})", m.name),
        }
    }
}

#[derive(Clone)]
pub struct ProblemSpec {
    pub kappa1: f64,
    pub kappa2: f64,
    pub alpha: f64,
    pub domain: Interval,
    pub horizon: f64,
    pub initial: ScalarFn,
    pub source: Source,
}

impl fmt::Debug for ProblemSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ProblemSpec")
            .field("kappa1", &self.kappa1)
            .field("kappa2", &self.kappa2)
            .field("alpha", &self.alpha)
            .field("domain", &self.domain)
            .field("horizon", &self.horizon)
            .field("source", &self.source)
            .finish_non_exhaustive()
    }
}

impl ProblemSpec {
    pub fn new(
        kappa1: f64,
        kappa2: f64,
        alpha: f64,
        horizon: f64,
        initial: ScalarFn,
        source: Source,
    ) -> Result<Self> {
        let spec = Self { kappa1, kappa2, alpha, domain: Interval::unit(), horizon, initial, source };
        spec.validate()?;
        Ok(spec)
    }

    /// Problem whose exact solution is `ex`, with `g = u(·, 0)`.
    pub fn from_manufactured(
        ex: &ManufacturedSolution,
        alpha: f64,
        kappa1: f64,
        kappa2: f64,
        horizon: f64,
    ) -> Result<Self> {
        let g = ex.clone();
        Self::new(
            kappa1,
            kappa2,
            alpha,
            horizon,
            Arc::new(move |x| g.g(x)),
            Source::Manufactured(ex.clone()),
        )
    }

    pub fn with_domain(mut self, domain: Interval) -> Self {
        self.domain = domain;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.kappa1 > 0.0 && self.kappa2 > 0.0) {
            return Err(Error::Argument(format!(
                "κ₁ and κ₂ must be positive, got κ₁ = {}, κ₂ = {}",
                self.kappa1, self.kappa2
            )));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::Argument(format!("α must lie in (0, 1), got {}", self.alpha)));
        }
        if !(self.horizon > 0.0) {
            return Err(Error::Argument(format!("T must be positive, got {}", self.horizon)));
        }
        Ok(())
    }

    pub fn exact(&self) -> Option<&ManufacturedSolution> {
        match &self.source {
            Source::Manufactured(m) => Some(m),
            _ => None,
        }
    }

    pub fn grid(&self, steps: usize) -> Result<TimeGrid> {
        TimeGrid::new(steps, self.horizon)
    }
}

/// The factored system for one `(spec, N, τ)`.
#[derive(Debug, Clone)]
pub struct AssembledSystem {
    spec: ProblemSpec,
    basis: BernsteinBasis,
    grid: TimeGrid,
    weights: L1Weights,
    operator: BandedMatrix,
    system: BandedMatrix,
    lu: BandedLU,
    pairing: DualPairing,
    dual: DualCoefficients,
    condition_lhs: f64,
}

/// `Aᵀ = μI − κ₁D̃₂ + κ₂D̃₁` together with `κ₁‖D̃₂‖_∞ + κ₂‖D̃₁‖_∞`.
pub fn operator_matrix(
    basis: &BernsteinBasis,
    mu: f64,
    kappa1: f64,
    kappa2: f64,
) -> Result<(BandedMatrix, f64)> {
    let (d1, d2) = build_interior_pair(basis)?;
    let n = basis.degree() - 1;
    let op = BandedMatrix::from_fn(n, n, 2, 2, |i, j| {
        let id = if i == j { mu } else { 0.0 };
        id - kappa1 * d2.get(i, j) + kappa2 * d1.get(i, j)
    });
    Ok((op, kappa1 * d2.norm_inf() + kappa2 * d1.norm_inf()))
}

pub fn assemble(spec: &ProblemSpec, degree: usize, grid: TimeGrid) -> Result<AssembledSystem> {
    spec.validate()?;
    let basis = BernsteinBasis::new(degree, spec.domain);
    let weights = l1_weights(spec.alpha, &grid)?;
    let mu = weights.mu();
    let (operator, condition_lhs) = operator_matrix(&basis, mu, spec.kappa1, spec.kappa2)?;
    let system = operator.transpose();
    if condition_lhs >= mu {
        log::warn!(
            "sufficient nonsingularity condition κ₁‖D̃₂‖ + κ₂‖D̃₁‖ < μ fails ({condition_lhs:.4e} ≥ {mu:.4e}); \
             proceeding with the LU factorization"
        );
    }
    let lu = banded_lu_factor(&system).map_err(|e| match e {
        Error::Singular { .. } => Error::SingularSystem { lhs: condition_lhs, mu },
        other => other,
    })?;
    let pairing = DualPairing::new(basis, PAIRING_POINTS)?;
    let dual = dual_coefficients(&basis);
    Ok(AssembledSystem {
        spec: spec.clone(),
        basis,
        grid,
        weights,
        operator,
        system,
        lu,
        pairing,
        dual,
        condition_lhs,
    })
}

impl AssembledSystem {
    pub fn spec(&self) -> &ProblemSpec {
        &self.spec
    }

    pub fn basis(&self) -> &BernsteinBasis {
        &self.basis
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn weights(&self) -> &L1Weights {
        &self.weights
    }

    pub fn mu(&self) -> f64 {
        self.weights.mu()
    }

    /// `Aᵀ = μI − κ₁D̃₂ + κ₂D̃₁`.
    pub fn operator_matrix(&self) -> &BandedMatrix {
        &self.operator
    }

    /// `A`, the matrix actually solved against.
    pub fn system_matrix(&self) -> &BandedMatrix {
        &self.system
    }

    pub fn lu(&self) -> &BandedLU {
        &self.lu
    }

    pub fn pairing(&self) -> &DualPairing {
        &self.pairing
    }

    pub fn dual(&self) -> &DualCoefficients {
        &self.dual
    }

    /// Whether `κ₁‖D̃₂‖_∞ + κ₂‖D̃₁‖_∞ < μ`.
    pub fn condition_satisfied(&self) -> bool {
        self.condition_lhs < self.mu()
    }

    /// `(g, ψ_i)` for the interior indices.
    pub fn project_initial(&self) -> Result<Vec<f64>> {
        project_initial(&*self.spec.initial, self)
    }

    /// `(S(·, t), ψ_i)` for the interior indices.
    pub fn source_pairing(&self, t: f64) -> Result<Vec<f64>> {
        let n = self.basis.degree();
        let full = match &self.spec.source {
            Source::Zero => return Ok(vec![0.0; n - 1]),
            Source::Function(f) => self.pairing.pair(|x| f(x, t)),
            Source::Manufactured(m) => {
                let s = m.source_at_time(t, self.spec.alpha, self.spec.kappa1, self.spec.kappa2)?;
                self.pairing.pair(s)
            }
        };
        Ok(full[1..n].to_vec())
    }

    /// `c^{k+1}` from `c^0, …, c^k`.
    pub fn step(&self, history: &[Vec<f64>], k: usize) -> Result<Vec<f64>> {
        if history.len() != k + 1 {
            return Err(Error::Argument(format!(
                "step {k} needs c^0..c^{k}, got {} vectors",
                history.len()
            )));
        }
        let w = &self.weights;
        let mut memory = history[k].clone();
        for j in 0..k {
            let a = w.a(k, j);
            for (m, (new, old)) in memory.iter_mut().zip(history[j + 1].iter().zip(&history[j])) {
                *m -= a * (new - old);
            }
        }
        let source = self.source_pairing(self.grid.time(k + 1))?;
        let mu = w.mu();
        let rhs: Vec<f64> = memory.iter().zip(&source).map(|(m, s)| mu * m + s).collect();
        self.lu.solve(&rhs)
    }
}

pub fn project_initial(g: &dyn Fn(f64) -> f64, sys: &AssembledSystem) -> Result<Vec<f64>> {
    let iv = sys.basis.interval();
    let (left, right) = (g(iv.a()), g(iv.b()));
    if left.abs() > BOUNDARY_TOL || right.abs() > BOUNDARY_TOL {
        return Err(Error::BoundaryViolation { left, right });
    }
    let n = sys.basis.degree();
    Ok(sys.pairing.pair(g)[1..n].to_vec())
}

/// One time step; see [`AssembledSystem::step`].
pub fn step(sys: &AssembledSystem, history: &SolutionHistory, k: usize) -> Result<Vec<f64>> {
    sys.step(&history.coeffs[..=k], k)
}

/// Runs the full march on a freshly assembled system.
pub fn solve(spec: &ProblemSpec, degree: usize, grid: TimeGrid) -> Result<SolutionHistory> {
    let sys = assemble(spec, degree, grid)?;
    solve_assembled(&sys)
}

pub fn solve_assembled(sys: &AssembledSystem) -> Result<SolutionHistory> {
    let steps = sys.grid.steps();
    let mut coeffs = Vec::with_capacity(steps + 1);
    coeffs.push(sys.project_initial()?);
    for k in 0..steps {
        let next = sys.step(&coeffs, k)?;
        coeffs.push(next);
    }
    Ok(SolutionHistory {
        basis: sys.basis,
        grid: sys.grid,
        alpha: sys.spec.alpha,
        kappa1: sys.spec.kappa1,
        kappa2: sys.spec.kappa2,
        coeffs,
    })
}

/// Interior coefficients `c^0, …, c^M`.
#[derive(Debug, Clone, PartialEq)]
pub struct SolutionHistory {
    pub basis: BernsteinBasis,
    pub grid: TimeGrid,
    pub alpha: f64,
    pub kappa1: f64,
    pub kappa2: f64,
    pub coeffs: Vec<Vec<f64>>,
}

impl SolutionHistory {
    pub fn steps(&self) -> usize {
        self.coeffs.len() - 1
    }

    /// Full coefficient vector of `u_N^k` (zeros at both ends).
    pub fn full_coefficients(&self, k: usize) -> Vec<f64> {
        let mut full = Vec::with_capacity(self.basis.len());
        full.push(0.0);
        full.extend_from_slice(&self.coeffs[k]);
        full.push(0.0);
        full
    }

    pub fn evaluate(&self, x: f64, k: usize) -> Result<f64> {
        evaluate(self, x, k)
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let n = self.basis.degree();
        let mut header = vec!["k".to_string(), "t_k".to_string()];
        header.extend((1..n).map(|i| format!("c_{i}")));
        w.write_record(&header)?;
        for (k, c) in self.coeffs.iter().enumerate() {
            let mut row = vec![k.to_string(), format!("{:?}", self.grid.time(k))];
            row.extend(c.iter().map(|v| format!("{v:?}")));
            w.write_record(&row)?;
        }
        w.flush().map_err(|e| Error::Csv(e.to_string()))?;
        Ok(())
    }

    /// Coefficient rows `(k, t_k, c^k)` of a CSV written by [`write_csv`](Self::write_csv).
    pub fn read_csv<R: Read>(input: R) -> Result<Vec<(usize, f64, Vec<f64>)>> {
        let mut r = csv::Reader::from_reader(input);
        let mut rows = Vec::new();
        for rec in r.records() {
            let rec = rec?;
            let parse = |s: &str| s.parse::<f64>().map_err(|e| Error::Csv(e.to_string()));
            let k = rec[0].parse::<usize>().map_err(|e| Error::Csv(e.to_string()))?;
            let t = parse(&rec[1])?;
            let c = rec.iter().skip(2).map(parse).collect::<Result<Vec<_>>>()?;
            rows.push((k, t, c));
        }
        Ok(rows)
    }
}

/// `u_N^k(x) = Σ_i c^k_i B_{i,N}(x)`; exactly zero at the endpoints.
pub fn evaluate(history: &SolutionHistory, x: f64, k: usize) -> Result<f64> {
    if k > history.steps() {
        return Err(Error::Argument(format!(
            "time index {k} exceeds the number of steps {}",
            history.steps()
        )));
    }
    let iv = history.basis.interval();
    if !iv.contains(x) {
        return Err(Error::Domain { x, a: iv.a(), b: iv.b() });
    }
    if x == iv.a() || x == iv.b() {
        return Ok(0.0);
    }
    let b = eval_all(&history.basis, x)?;
    Ok(history.coeffs[k].iter().zip(&b[1..]).map(|(c, v)| c * v).sum())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bernstein::eval_basis;
    use crate::caputo::{example, gamma};
    use crate::opmatrix::build_derivative_matrix;
    use approx::assert_relative_eq;

    fn zero_spec() -> ProblemSpec {
        ProblemSpec::new(1.0, 1.0, 0.5, 1.0, Arc::new(|_| 0.0), Source::Zero).unwrap()
    }

    #[test]
    fn degree_two_system_is_scalar() {
        let spec = ProblemSpec::new(0.3, 2.0, 0.5, 1.0, Arc::new(|_| 0.0), Source::Zero).unwrap();
        let sys = assemble(&spec, 2, TimeGrid::new(10, 1.0).unwrap()).unwrap();
        let a = sys.system_matrix();
        assert_eq!((a.rows(), a.cols()), (1, 1));
        assert_relative_eq!(a.get(0, 0), sys.mu() + 4.0 * 0.3, epsilon = 1e-14);
    }

    #[test]
    fn operator_is_transpose_of_system() {
        let ex = example("ex1").unwrap();
        let spec = ProblemSpec::from_manufactured(&ex, 0.5, 0.1, 2.0, 1.0).unwrap();
        let sys = assemble(&spec, 9, TimeGrid::new(40, 1.0).unwrap()).unwrap();
        let b = sys.basis();
        let d1 = build_derivative_matrix(b, 1).unwrap();
        let d2 = build_derivative_matrix(b, 2).unwrap();
        for i in 0..8 {
            for j in 0..8 {
                let id = if i == j { sys.mu() } else { 0.0 };
                let expected = id - 0.1 * d2.get(j + 1, i + 1) + 2.0 * d1.get(j + 1, i + 1);
                assert_relative_eq!(sys.system_matrix().get(i, j), expected, max_relative = 1e-13);
            }
        }
    }

    #[test]
    fn equal_tau_gives_identical_matrix() {
        let spec = zero_spec();
        let a = assemble(&spec, 8, TimeGrid::new(10, 1.0).unwrap()).unwrap();
        let b = assemble(&spec.clone(), 8, TimeGrid::new(20, 2.0).unwrap()).unwrap();
        assert_eq!(a.system_matrix(), b.system_matrix());
    }

    #[test]
    fn initial_projection_examples() {
        let spec = ProblemSpec::new(
            1.0,
            1.0,
            0.5,
            1.0,
            Arc::new(|x| eval_basis(1, &BernsteinBasis::unit(2), x).unwrap()),
            Source::Zero,
        )
        .unwrap();
        let sys = assemble(&spec, 2, TimeGrid::new(4, 1.0).unwrap()).unwrap();
        assert_relative_eq!(sys.project_initial().unwrap()[0], 1.0, epsilon = 1e-13);

        let sys = assemble(&zero_spec(), 5, TimeGrid::new(4, 1.0).unwrap()).unwrap();
        assert_eq!(sys.project_initial().unwrap(), vec![0.0; 4]);

        let ex1 = example("ex1").unwrap();
        let spec = ProblemSpec::from_manufactured(&ex1, 0.5, 0.1, 2.0, 1.0).unwrap();
        let sys = assemble(&spec, 4, TimeGrid::new(4, 1.0).unwrap()).unwrap();
        assert!(sys.project_initial().unwrap().iter().all(|v| *v == 0.0));

        let bad = ProblemSpec::new(1.0, 1.0, 0.5, 1.0, Arc::new(|_| 1.0), Source::Zero).unwrap();
        let sys = assemble(&bad, 4, TimeGrid::new(4, 1.0).unwrap()).unwrap();
        assert!(matches!(sys.project_initial(), Err(Error::BoundaryViolation { .. })));
    }

    #[test]
    fn boundary_components_vanish_under_pairing() {
        for n in [3, 8, 12] {
            let basis = BernsteinBasis::unit(n);
            let pairing = DualPairing::new(basis, PAIRING_POINTS).unwrap();
            for end in [0, n as i64] {
                let p = pairing.pair(|x| eval_basis(end, &basis, x).unwrap());
                for v in &p[1..n] {
                    assert!(v.abs() <= 1e-12, "N = {n}: {v}");
                }
            }
        }
    }

    #[test]
    fn zero_data_stays_zero() {
        let h = solve(&zero_spec(), 6, TimeGrid::new(25, 1.0).unwrap()).unwrap();
        assert!(h.coeffs.iter().flatten().all(|v| *v == 0.0));
        assert_eq!(h.evaluate(0.3, 25).unwrap(), 0.0);
    }

    #[test]
    fn evaluate_examples() {
        let h = SolutionHistory {
            basis: BernsteinBasis::unit(2),
            grid: TimeGrid::new(1, 1.0).unwrap(),
            alpha: 0.5,
            kappa1: 1.0,
            kappa2: 1.0,
            coeffs: vec![vec![1.0], vec![1.0]],
        };
        assert_eq!(h.evaluate(0.5, 1).unwrap(), 0.5);
        assert_eq!(h.evaluate(0.0, 0).unwrap(), 0.0);
        assert_eq!(h.evaluate(1.0, 1).unwrap(), 0.0);
        assert!(h.evaluate(1.5, 0).is_err());
        assert!(h.evaluate(0.5, 2).is_err());
    }

    #[test]
    fn linear_in_time_polynomial_solution_is_reproduced() {
        // u = x²(1−x)·t lies in the trial space and L1 is exact for linear t.
        let (k1, k2, alpha) = (0.4, 1.3, 0.6);
        let g0 = gamma(2.0 - alpha);
        let source: SourceFn = Arc::new(move |x: f64, t: f64| {
            let xs = x * x * (1.0 - x);
            xs * t.powf(1.0 - alpha) / g0 - k1 * (2.0 - 6.0 * x) * t + k2 * (2.0 * x - 3.0 * x * x) * t
        });
        let spec = ProblemSpec::new(k1, k2, alpha, 1.0, Arc::new(|_| 0.0), Source::Function(source)).unwrap();
        let h = solve(&spec, 4, TimeGrid::new(8, 1.0).unwrap()).unwrap();
        for k in [1, 4, 8] {
            let t = h.grid.time(k);
            for x in [0.1, 0.37, 0.8] {
                let err = (h.evaluate(x, k).unwrap() - x * x * (1.0 - x) * t).abs();
                assert!(err <= 1e-10, "k = {k}, x = {x}: {err:e}");
            }
        }
    }

    #[test]
    fn history_csv_round_trip() {
        let ex = example("ex3").unwrap();
        let spec = ProblemSpec::from_manufactured(&ex, 0.5, 0.2, 1.5, 1.0).unwrap();
        let h = solve(&spec, 5, TimeGrid::new(6, 1.0).unwrap()).unwrap();
        let mut buf = Vec::new();
        h.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("k,t_k,c_1,c_2,c_3,c_4\n"));
        let rows = SolutionHistory::read_csv(&buf[..]).unwrap();
        assert_eq!(rows.len(), 7);
        for (k, t, c) in rows {
            assert_eq!(t, h.grid.time(k));
            assert_eq!(c, h.coeffs[k]);
        }
    }

    #[test]
    fn example_one_reaches_reported_accuracy() {
        let ex = example("ex1").unwrap();
        let spec = ProblemSpec::from_manufactured(&ex, 0.5, 0.1, 2.0, 1.0).unwrap();
        let h = solve(&spec, 4, TimeGrid::new(10, 1.0).unwrap()).unwrap();
        let err = (0..=100)
            .map(|j| {
                let x = j as f64 / 100.0;
                (h.evaluate(x, 10).unwrap() - ex.u(x, 1.0)).abs()
            })
            .fold(0.0, f64::max);
        assert!(err > 0.61e-4 && err < 2.44e-4, "{err:e}");
    }
}
