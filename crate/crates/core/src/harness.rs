//! Error measurement, convergence rates, the conditioning study and CSV
//! output.

use std::fmt;
use std::time::Instant;

use rayon::prelude::*;

use crate::bernstein::poly_eval;
use crate::caputo::{gamma, ManufacturedSolution, TimeGrid};
use crate::error::{Error, Result};
use crate::linalg::{dense_inf_condition_number, gauss_legendre, hilbert, hilbert_condition_exact, inf_condition_number};
use crate::opmatrix::build_derivative_matrix;
use crate::solver::{operator_matrix, solve, ProblemSpec, SolutionHistory};
use crate::BernsteinBasis;

/// Number of subintervals of the uniform grid used by the discrete norms.
pub const NORM_GRID: usize = 100;
/// Gauss-Legendre points for the weighted energy norm.
pub const NORM_QUADRATURE_POINTS: usize = 20;

/// Errors of one run at the final time.
#[derive(Debug, Clone, PartialEq)]
pub struct ErrorReport {
    /// `max_{j=0..𝒩} |e(x_j)|`.
    pub l_inf: f64,
    /// `(Σ_{j=0}^{𝒩−1} e(x_j)² / √𝒩)^{1/2}`, the normalisation of the
    /// published tables.
    pub l_2: f64,
    /// `((1/𝒩) Σ_{j=0}^{𝒩−1} e(x_j)²)^{1/2}`.
    pub l_2_rms: f64,
    /// `(∫ e²)^{1/2}` by Gauss-Legendre quadrature.
    pub l_2_quadrature: f64,
    /// Weighted energy norm of the error.
    pub h1w: f64,
    pub n: usize,
    pub m: usize,
    pub alpha: f64,
    pub kappa1: f64,
    pub kappa2: f64,
    /// Wall-clock seconds for the solve.
    pub runtime: f64,
}

/// `(∫ w u² + α₁ ∫ w u_x²)^{1/2}` with `w = exp(−κ₂x/κ₁)` and
/// `α₁ = κ₁ τ^α Γ(2−α)`; `u` returns `(u, u_x)`.
pub fn weighted_energy_norm(
    u: &dyn Fn(f64) -> (f64, f64),
    basis: &BernsteinBasis,
    kappa1: f64,
    kappa2: f64,
    alpha1: f64,
) -> Result<f64> {
    let rule = gauss_legendre(NORM_QUADRATURE_POINTS)?;
    let iv = basis.interval();
    let s = rule.integrate_on(iv.a(), iv.b(), |x| {
        let (v, dv) = u(x);
        (-kappa2 * x / kappa1).exp() * (v * v + alpha1 * dv * dv)
    });
    Ok(s.sqrt())
}

/// `(∫ w u²)^{1/2}`.
pub fn weighted_l2_norm(u: &dyn Fn(f64) -> f64, basis: &BernsteinBasis, kappa1: f64, kappa2: f64) -> Result<f64> {
    weighted_energy_norm(&|x| (u(x), 0.0), basis, kappa1, kappa2, 0.0)
}

/// `α₁ = κ₁ τ^α Γ(2−α)`.
pub fn alpha1(history: &SolutionHistory) -> f64 {
    history.kappa1 * history.grid.tau().powf(history.alpha) * gamma(2.0 - history.alpha)
}

/// `u_N^k` and its derivative as a closure.
pub fn solution_with_derivative(
    history: &SolutionHistory,
    k: usize,
) -> Result<impl Fn(f64) -> (f64, f64) + '_> {
    let full = history.full_coefficients(k);
    let d1 = build_derivative_matrix(&history.basis, 1)?;
    let deriv = d1.transpose().matvec(&full)?;
    Ok(move |x: f64| {
        let v = history.evaluate(x, k).unwrap_or(f64::NAN);
        let dv = poly_eval(&deriv, &history.basis, x).unwrap_or(f64::NAN);
        (v, dv)
    })
}

/// Error norms of `u_N^k` against `exact`, which returns `(u, u_x)` at time `t_k`.
pub fn error_norms(
    exact: &dyn Fn(f64) -> (f64, f64),
    history: &SolutionHistory,
    k: usize,
) -> Result<ErrorReport> {
    let iv = history.basis.interval();
    let h = iv.width() / NORM_GRID as f64;
    let errs: Vec<f64> = (0..=NORM_GRID)
        .map(|j| {
            let x = if j == NORM_GRID { iv.b() } else { iv.a() + j as f64 * h };
            Ok((exact(x).0 - history.evaluate(x, k)?).abs())
        })
        .collect::<Result<_>>()?;
    let l_inf = errs.iter().fold(0.0, |m: f64, e| m.max(*e));
    let sum_sq: f64 = errs[..NORM_GRID].iter().map(|e| e * e).sum();
    let nn = NORM_GRID as f64;

    let approx = solution_with_derivative(history, k)?;
    let err_fn = |x: f64| {
        let (u, ux) = exact(x);
        let (v, vx) = approx(x);
        (u - v, ux - vx)
    };
    let rule = gauss_legendre(NORM_QUADRATURE_POINTS)?;
    let l_2_quadrature = rule.integrate_on(iv.a(), iv.b(), |x| err_fn(x).0.powi(2)).sqrt();
    let h1w = weighted_energy_norm(&err_fn, &history.basis, history.kappa1, history.kappa2, alpha1(history))?;
    Ok(ErrorReport {
        l_inf,
        l_2: (sum_sq / nn.sqrt()).sqrt(),
        l_2_rms: (sum_sq / nn).sqrt(),
        l_2_quadrature,
        h1w,
        n: history.basis.degree(),
        m: history.steps(),
        alpha: history.alpha,
        kappa1: history.kappa1,
        kappa2: history.kappa2,
        runtime: 0.0,
    })
}

/// One manufactured-solution run with its final-time error report.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunConfig {
    pub alpha: f64,
    pub kappa1: f64,
    pub kappa2: f64,
    pub degree: usize,
    pub steps: usize,
    pub horizon: f64,
}

impl RunConfig {
    /// Defaults of `ex` at `α`, `T = 1`.
    pub fn for_example(ex: &ManufacturedSolution, alpha: f64, degree: usize, steps: usize) -> Self {
        Self { alpha, kappa1: ex.kappa.0, kappa2: ex.kappa.1, degree, steps, horizon: 1.0 }
    }
}

pub fn run_example(ex: &ManufacturedSolution, cfg: &RunConfig) -> Result<(SolutionHistory, ErrorReport)> {
    let spec = ProblemSpec::from_manufactured(ex, cfg.alpha, cfg.kappa1, cfg.kappa2, cfg.horizon)?;
    let grid = TimeGrid::new(cfg.steps, cfg.horizon)?;
    let start = Instant::now();
    let history = solve(&spec, cfg.degree, grid)?;
    let runtime = start.elapsed().as_secs_f64();
    let t = cfg.horizon;
    let exact = |x: f64| (ex.u(x, t), ex.u_x(x, t));
    let mut report = error_norms(&exact, &history, cfg.steps)?;
    report.runtime = runtime;
    Ok((history, report))
}

// ---------------------------------------------------------------------------
// Rates

/// `log(e/e_prev) / log(h/h_prev)`.
pub fn rate(e_prev: f64, e: f64, h_prev: f64, h: f64) -> f64 {
    (e / e_prev).ln() / (h / h_prev).ln()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateRow {
    /// `M` for a temporal sweep, `N` for a spatial one.
    pub resolution: usize,
    /// `τ` or `1/N`.
    pub step: f64,
    pub error: f64,
    pub rate: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RateTable {
    /// `"M"` or `"N"`.
    pub variable: &'static str,
    /// Which norm the error column holds.
    pub norm: &'static str,
    pub rows: Vec<RateRow>,
    pub reports: Vec<ErrorReport>,
}

impl RateTable {
    pub fn from_errors(variable: &'static str, norm: &'static str, points: &[(usize, f64, f64)]) -> Self {
        let rows = points
            .iter()
            .enumerate()
            .map(|(i, &(resolution, step, error))| RateRow {
                resolution,
                step,
                error,
                rate: (i > 0).then(|| rate(points[i - 1].2, error, points[i - 1].1, step)),
            })
            .collect();
        Self { variable, norm, rows, reports: Vec::new() }
    }

    pub fn rates(&self) -> Vec<f64> {
        self.rows.iter().filter_map(|r| r.rate).collect()
    }

    pub fn to_table(&self) -> CsvTable {
        let step_name = if self.variable == "M" { "tau" } else { "inv_N" };
        let mut t = CsvTable::new(&[self.variable, step_name, self.norm, "rate"]);
        for r in &self.rows {
            t.push(vec![
                Cell::Int(r.resolution as i64),
                Cell::Real(r.step),
                Cell::Real(r.error),
                r.rate.map_or(Cell::Empty, Cell::Real),
            ]);
        }
        t
    }
}

fn check_increasing(list: &[usize], what: &str) -> Result<()> {
    if list.is_empty() || list.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Argument(format!("{what} list must be non-empty and increasing")));
    }
    Ok(())
}

/// Fixed `N`, varying `M`; rates in `L∞` against `τ`.
pub fn temporal_sweep(ex: &ManufacturedSolution, base: &RunConfig, steps: &[usize]) -> Result<RateTable> {
    check_increasing(steps, "M")?;
    let reports: Vec<ErrorReport> = steps
        .par_iter()
        .map(|&m| run_example(ex, &RunConfig { steps: m, ..*base }).map(|r| r.1))
        .collect::<Result<_>>()?;
    let points: Vec<_> = reports.iter().map(|r| (r.m, base.horizon / r.m as f64, r.l_inf)).collect();
    let mut t = RateTable::from_errors("M", "l_inf", &points);
    t.reports = reports;
    Ok(t)
}

/// Fixed `M`, varying `N`; weighted energy error against `1/N`.
pub fn spatial_sweep(ex: &ManufacturedSolution, base: &RunConfig, degrees: &[usize]) -> Result<RateTable> {
    check_increasing(degrees, "N")?;
    let reports: Vec<ErrorReport> = degrees
        .par_iter()
        .map(|&n| run_example(ex, &RunConfig { degree: n, ..*base }).map(|r| r.1))
        .collect::<Result<_>>()?;
    let points: Vec<_> = reports.iter().map(|r| (r.n, 1.0 / r.n as f64, r.h1w)).collect();
    let mut t = RateTable::from_errors("N", "h1w", &points);
    t.reports = reports;
    Ok(t)
}

// ---------------------------------------------------------------------------
// Conditioning

#[derive(Debug, Clone, PartialEq)]
pub struct ConditionRow {
    pub kappa1: f64,
    pub kappa2: f64,
    pub n: usize,
    /// `cond_∞(Aᵀ)`, `Aᵀ = μI − κ₁D̃₂ + κ₂D̃₁`.
    pub cond: Option<f64>,
    /// `cond_∞(H_N)`.
    pub hilbert: f64,
    /// `cond / hilbert`.
    pub ratio: Option<f64>,
    /// `cond_∞(A)`.
    pub system_cond: Option<f64>,
    pub error: Option<String>,
}

/// `cond_∞` of the order-`n` Hilbert matrix, exact while it fits in `i128`.
pub fn hilbert_condition(n: usize) -> Result<f64> {
    match hilbert_condition_exact(n) {
        Ok(r) => Ok(*r.numer() as f64 / *r.denom() as f64),
        Err(Error::Overflow(_)) => dense_inf_condition_number(&hilbert(n)),
        Err(e) => Err(e),
    }
}

pub fn conditioning_study(
    alpha: f64,
    tau: f64,
    kappa_pairs: &[(f64, f64)],
    degrees: &[usize],
) -> Result<Vec<ConditionRow>> {
    if !(alpha > 0.0 && alpha < 1.0) || !(tau > 0.0) {
        return Err(Error::Argument(format!("need 0 < α < 1 and τ > 0, got α = {alpha}, τ = {tau}")));
    }
    let mu = 1.0 / (tau.powf(alpha) * gamma(2.0 - alpha));
    let mut rows = Vec::new();
    for &(kappa1, kappa2) in kappa_pairs {
        for &n in degrees {
            let hilbert = hilbert_condition(n)?;
            let result = (|| -> Result<(f64, f64)> {
                let (op, _) = operator_matrix(&BernsteinBasis::unit(n), mu, kappa1, kappa2)?;
                Ok((inf_condition_number(&op)?, inf_condition_number(&op.transpose())?))
            })();
            rows.push(match result {
                Ok((c, s)) => ConditionRow {
                    kappa1,
                    kappa2,
                    n,
                    cond: Some(c),
                    hilbert,
                    ratio: Some(c / hilbert),
                    system_cond: Some(s),
                    error: None,
                },
                Err(e) => ConditionRow {
                    kappa1,
                    kappa2,
                    n,
                    cond: None,
                    hilbert,
                    ratio: None,
                    system_cond: None,
                    error: Some(e.to_string()),
                },
            });
        }
    }
    Ok(rows)
}

pub fn condition_table(rows: &[ConditionRow]) -> CsvTable {
    let mut t = CsvTable::new(&["kappa1", "kappa2", "N", "cond_inf", "hilbert_cond", "R_inf", "system_cond", "error"]);
    for r in rows {
        t.push(vec![
            Cell::Real(r.kappa1),
            Cell::Real(r.kappa2),
            Cell::Int(r.n as i64),
            r.cond.map_or(Cell::Empty, Cell::Real),
            Cell::Real(r.hilbert),
            r.ratio.map_or(Cell::Empty, Cell::Real),
            r.system_cond.map_or(Cell::Empty, Cell::Real),
            r.error.clone().map_or(Cell::Empty, Cell::Text),
        ]);
    }
    t
}

pub fn error_table(reports: &[ErrorReport]) -> CsvTable {
    let mut t = CsvTable::new(&[
        "N", "M", "alpha", "kappa1", "kappa2", "l_inf", "l_2", "l_2_rms", "h1w", "runtime_s",
    ]);
    for r in reports {
        t.push(vec![
            Cell::Int(r.n as i64),
            Cell::Int(r.m as i64),
            Cell::Real(r.alpha),
            Cell::Real(r.kappa1),
            Cell::Real(r.kappa2),
            Cell::Real(r.l_inf),
            Cell::Real(r.l_2),
            Cell::Real(r.l_2_rms),
            Cell::Real(r.h1w),
            Cell::Real(r.runtime),
        ]);
    }
    t
}

// ---------------------------------------------------------------------------
// CSV

/// Significant digits of real cells.
pub const CSV_DIGITS: usize = 6;

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Int(i64),
    Real(f64),
    Text(String),
    Empty,
}

impl fmt::Display for Cell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Cell::Int(v) => write!(f, "{v}"),
            Cell::Real(v) => write!(f, "{:.*e}", CSV_DIGITS - 1, v),
            Cell::Text(s) => f.write_str(s),
            Cell::Empty => Ok(()),
        }
    }
}

impl Cell {
    fn parse(s: &str) -> Cell {
        if s.is_empty() {
            Cell::Empty
        } else if let Ok(v) = s.parse::<i64>() {
            Cell::Int(v)
        } else if let Ok(v) = s.parse::<f64>() {
            Cell::Real(v)
        } else {
            Cell::Text(s.to_string())
        }
    }

    pub fn as_f64(&self) -> Option<f64> {
        match self {
            Cell::Int(v) => Some(*v as f64),
            Cell::Real(v) => Some(*v),
            _ => None,
        }
    }

    /// The value a reader recovers after emission.
    pub fn rounded(&self) -> Cell {
        match self {
            Cell::Real(_) => Cell::parse(&self.to_string()),
            other => other.clone(),
        }
    }
}

/// Header plus rows; reals are written in scientific notation with
/// [`CSV_DIGITS`] significant digits.
#[derive(Debug, Clone, PartialEq)]
pub struct CsvTable {
    pub header: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl CsvTable {
    pub fn new(header: &[&str]) -> Self {
        Self { header: header.iter().map(|s| s.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(row.len(), self.header.len(), "row width must match the header");
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<Vec<&Cell>> {
        let idx = self.header.iter().position(|h| h == name)?;
        Some(self.rows.iter().map(|r| &r[idx]).collect())
    }

    pub fn emit(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.header)?;
        for row in &self.rows {
            w.write_record(row.iter().map(|c| c.to_string()))?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Csv(e.to_string()))?;
        String::from_utf8(bytes).map_err(|e| Error::Csv(e.to_string()))
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut r = csv::Reader::from_reader(text.as_bytes());
        let header = r.headers()?.iter().map(|s| s.to_string()).collect::<Vec<_>>();
        let rows = r
            .records()
            .map(|rec| rec.map(|rec| rec.iter().map(Cell::parse).collect()))
            .collect::<std::result::Result<Vec<Vec<Cell>>, _>>()?;
        Ok(Self { header, rows })
    }

    /// The table as a reader would recover it.
    pub fn rounded(&self) -> Self {
        Self {
            header: self.header.clone(),
            rows: self.rows.iter().map(|r| r.iter().map(Cell::rounded).collect()).collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::caputo::example;
    use approx::assert_relative_eq;

    fn constant_history(n: usize, c: f64) -> SolutionHistory {
        SolutionHistory {
            basis: BernsteinBasis::unit(n),
            grid: TimeGrid::new(1, 1.0).unwrap(),
            alpha: 0.5,
            kappa1: 1.0,
            kappa2: 1.0,
            coeffs: vec![vec![c; n - 1]; 2],
        }
    }

    #[test]
    fn exact_solution_has_zero_error() {
        let h = constant_history(2, 1.0);
        // u_N = B_{1,2} = 2x(1−x)
        let exact = |x: f64| (2.0 * x * (1.0 - x), 2.0 - 4.0 * x);
        let r = error_norms(&exact, &h, 1).unwrap();
        assert!(r.l_inf < 1e-15 && r.l_2 < 1e-15 && r.h1w < 1e-14, "{r:?}");
    }

    #[test]
    fn constant_error_field() {
        // zero approximation against a constant "exact" value 1e-3
        let h = constant_history(3, 0.0);
        let r = error_norms(&|_| (1e-3, 0.0), &h, 1).unwrap();
        assert_relative_eq!(r.l_inf, 1e-3, max_relative = 1e-12);
        assert_relative_eq!(r.l_2_rms, 1e-3, max_relative = 1e-12);
        assert_relative_eq!(r.l_2, 10f64.sqrt() * 1e-3, max_relative = 1e-12);
    }

    #[test]
    fn example_one_table_cell() {
        let ex = example("ex1").unwrap();
        let (_, r) = run_example(&ex, &RunConfig::for_example(&ex, 0.25, 4, 10)).unwrap();
        assert!(r.l_inf / 3.46e-5 > 0.5 && r.l_inf / 3.46e-5 < 2.0, "{r:?}");
        assert!(r.l_2 / 7.11e-5 > 0.5 && r.l_2 / 7.11e-5 < 2.0, "{r:?}");
    }

    #[test]
    fn halving_errors_give_unit_rate() {
        let t = RateTable::from_errors("M", "l_inf", &[(10, 0.1, 4e-3), (20, 0.05, 2e-3), (40, 0.025, 1e-3)]);
        assert_eq!(t.rows[0].rate, None);
        for r in t.rates() {
            assert_relative_eq!(r, 1.0, epsilon = 1e-14);
        }
    }

    #[test]
    fn sweep_lists_must_increase() {
        let ex = example("ex1").unwrap();
        let cfg = RunConfig::for_example(&ex, 0.5, 4, 10);
        assert!(temporal_sweep(&ex, &cfg, &[20, 10]).is_err());
        assert!(spatial_sweep(&ex, &cfg, &[]).is_err());
    }

    #[test]
    fn conditioning_first_cell() {
        let rows = conditioning_study(0.5, 1.0 / 40.0, &[(0.1, 2.0)], &[4]).unwrap();
        let r = &rows[0];
        assert_relative_eq!(r.cond.unwrap(), 5.31, max_relative = 0.01);
        assert_relative_eq!(r.ratio.unwrap(), 1.87e-4, max_relative = 0.02);
        assert_eq!(r.hilbert, 28375.0);
    }

    #[test]
    fn csv_round_trip_is_stable() {
        let mut t = CsvTable::new(&["N", "x", "rate", "note"]);
        t.push(vec![Cell::Int(4), Cell::Real(std::f64::consts::PI * 1e-5), Cell::Empty, Cell::Text("ok".into())]);
        t.push(vec![Cell::Int(6), Cell::Real(-2.5e7), Cell::Real(1.4999999), Cell::Empty]);
        let text = t.emit().unwrap();
        assert!(text.contains("3.14159e-5"));
        let back = CsvTable::parse(&text).unwrap();
        assert_eq!(back, t.rounded());
        assert_eq!(back.emit().unwrap(), text);
    }
}
