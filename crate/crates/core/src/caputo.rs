//! Caputo derivatives in time: the L1 weights used by the time march, exact
//! Caputo derivatives of powers and power series, and the manufactured
//! solutions whose source terms are built from them.

use std::f64::consts::PI;
use std::fmt;

use crate::error::{Error, Result};

/// Uniform grid `t_k = kτ`, `τ = T/M`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeGrid {
    steps: usize,
    horizon: f64,
}

impl TimeGrid {
    pub fn new(steps: usize, horizon: f64) -> Result<Self> {
        if steps == 0 {
            return Err(Error::Argument("time grid needs M ≥ 1".into()));
        }
        if !(horizon > 0.0 && horizon.is_finite()) {
            return Err(Error::Argument(format!("time horizon must be positive, got {horizon}")));
        }
        Ok(Self { steps, horizon })
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn tau(&self) -> f64 {
        self.horizon / self.steps as f64
    }

    pub fn time(&self, k: usize) -> f64 {
        if k == self.steps {
            self.horizon
        } else {
            k as f64 * self.tau()
        }
    }
}

/// Weights of the L1 approximation
/// `D_t^α u(t_{k+1}) ≈ μ Σ_{j=0}^{k} a_{k,j} (u^{j+1} − u^j)`.
#[derive(Debug, Clone, PartialEq)]
pub struct L1Weights {
    alpha: f64,
    mu: f64,
    b: Vec<f64>,
}

pub fn l1_weights(alpha: f64, grid: &TimeGrid) -> Result<L1Weights> {
    check_alpha(alpha)?;
    let mu = 1.0 / (grid.tau().powf(alpha) * gamma(2.0 - alpha));
    let b = (0..=grid.steps()).map(|j| b_coefficient(alpha, j)).collect();
    Ok(L1Weights { alpha, mu, b })
}

fn b_coefficient(alpha: f64, j: usize) -> f64 {
    let e = 1.0 - alpha;
    let j = j as f64;
    (j + 1.0).powf(e) - j.powf(e)
}

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha < 1.0 {
        Ok(())
    } else {
        Err(Error::Argument(format!("fractional order must lie in (0, 1), got {alpha}")))
    }
}

impl L1Weights {
    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// `μ = 1/(τ^α Γ(2−α))`.
    pub fn mu(&self) -> f64 {
        self.mu
    }

    /// `b_j = (j+1)^{1−α} − j^{1−α}`.
    pub fn b(&self, j: usize) -> f64 {
        self.b.get(j).copied().unwrap_or_else(|| b_coefficient(self.alpha, j))
    }

    /// `a_{k,j} = (k+1−j)^{1−α} − (k−j)^{1−α}` for `j ≤ k`.
    pub fn a(&self, k: usize, j: usize) -> f64 {
        assert!(j <= k, "a_{{k,j}} needs j ≤ k (k = {k}, j = {j})");
        self.b(k - j)
    }
}

// ---------------------------------------------------------------------------
// Gamma

const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

/// `Γ(x)` by the Lanczos approximation, with reflection below 1/2.
pub fn gamma(x: f64) -> f64 {
    if x < 0.5 {
        return PI / ((PI * x).sin() * gamma(1.0 - x));
    }
    let x = x - 1.0;
    let t = x + LANCZOS_G + 0.5;
    let s = LANCZOS[1..]
        .iter()
        .enumerate()
        .fold(LANCZOS[0], |acc, (i, c)| acc + c / (x + i as f64 + 1.0));
    (2.0 * PI).sqrt() * t.powf(x + 0.5) * (-t).exp() * s
}

/// `D_t^α t^m = Γ(m+1)/Γ(m+1−α) t^{m−α}`; zero for `m = 0`.
pub fn caputo_power(m: u32, alpha: f64, t: f64) -> f64 {
    if m == 0 {
        return 0.0;
    }
    let mf = m as f64;
    if t == 0.0 {
        return 0.0;
    }
    gamma(mf + 1.0) / gamma(mf + 1.0 - alpha) * t.powf(mf - alpha)
}

// ---------------------------------------------------------------------------
// Series

/// Taylor coefficients `c_m` of an analytic time factor `Θ(t) = Σ c_m t^m`.
#[derive(Clone)]
pub enum TaylorSeries {
    Polynomial(Vec<f64>),
    Entire(fn(usize) -> f64),
}

impl fmt::Debug for TaylorSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Polynomial(c) => f.debug_tuple("Polynomial").field(c).finish(),
            Self::Entire(_) => f.write_str("Entire(..)"),
        }
    }
}

impl TaylorSeries {
    fn coefficient(&self, m: usize) -> f64 {
        match self {
            Self::Polynomial(c) => c.get(m).copied().unwrap_or(0.0),
            Self::Entire(f) => f(m),
        }
    }
}

pub const SERIES_TOL: f64 = 1e-14;
pub const SERIES_MAX_TERMS: usize = 200;

/// Termwise Caputo derivative `Σ_{m≥1} c_m Γ(m+1)/Γ(m+1−α) t^{m−α}`.
///
/// Polynomials are summed exactly. Entire series stop after two consecutive
/// terms below `tol` (one of which may be a structural zero).
pub fn caputo_series(series: &TaylorSeries, alpha: f64, t: f64, tol: f64) -> Result<f64> {
    check_alpha(alpha)?;
    if t < 0.0 {
        return Err(Error::Argument(format!("Caputo derivative needs t ≥ 0, got {t}")));
    }
    if t == 0.0 {
        return Ok(0.0);
    }
    let limit = match series {
        TaylorSeries::Polynomial(c) => c.len().saturating_sub(1),
        TaylorSeries::Entire(_) => SERIES_MAX_TERMS,
    };
    // ratio = Γ(m+1)/Γ(m+1−α), power = t^{m−α}
    let mut ratio = 1.0 / gamma(2.0 - alpha);
    let mut power = t.powf(1.0 - alpha);
    let mut sum = 0.0;
    let mut small = 0;
    for m in 1..=limit {
        if m > 1 {
            let mf = m as f64;
            ratio *= mf / (mf - alpha);
            power *= t;
        }
        let term = series.coefficient(m) * ratio * power;
        sum += term;
        if matches!(series, TaylorSeries::Entire(_)) {
            small = if term.abs() < tol { small + 1 } else { 0 };
            if small >= 2 {
                return Ok(sum);
            }
        }
    }
    match series {
        TaylorSeries::Polynomial(_) => Ok(sum),
        TaylorSeries::Entire(_) => Err(Error::NoConvergence { terms: SERIES_MAX_TERMS }),
    }
}

fn inv_factorial(m: usize) -> f64 {
    (1..=m).fold(1.0, |acc, k| acc / k as f64)
}

fn sin_coefficients(m: usize) -> f64 {
    match m % 4 {
        1 => inv_factorial(m),
        3 => -inv_factorial(m),
        _ => 0.0,
    }
}

fn exp_neg_square_coefficients(m: usize) -> f64 {
    if m % 2 == 1 {
        return 0.0;
    }
    let k = m / 2;
    let s = if k % 2 == 0 { 1.0 } else { -1.0 };
    s * inv_factorial(k)
}

fn exp_neg_coefficients(m: usize) -> f64 {
    let s = if m % 2 == 0 { 1.0 } else { -1.0 };
    s * inv_factorial(m)
}

// ---------------------------------------------------------------------------
// Manufactured solutions

/// Separable exact solution `u(x, t) = X(x) Θ(t)` on `[0, 1]`.
#[derive(Debug, Clone)]
pub struct ManufacturedSolution {
    pub name: &'static str,
    pub formula: &'static str,
    pub spatial: fn(f64) -> f64,
    pub spatial_dx: fn(f64) -> f64,
    pub spatial_dxx: fn(f64) -> f64,
    pub temporal: fn(f64) -> f64,
    /// `Θ'(t)`, used only by the quadrature cross-check.
    pub temporal_dt: fn(f64) -> f64,
    pub temporal_series: TaylorSeries,
    /// Default `(κ₁, κ₂)`.
    pub kappa: (f64, f64),
}

impl ManufacturedSolution {
    pub fn u(&self, x: f64, t: f64) -> f64 {
        (self.spatial)(x) * (self.temporal)(t)
    }

    pub fn u_x(&self, x: f64, t: f64) -> f64 {
        (self.spatial_dx)(x) * (self.temporal)(t)
    }

    pub fn u_xx(&self, x: f64, t: f64) -> f64 {
        (self.spatial_dxx)(x) * (self.temporal)(t)
    }

    /// Initial datum `g(x) = u(x, 0)`.
    pub fn g(&self, x: f64) -> f64 {
        self.u(x, 0.0)
    }

    /// `D_t^α u(x, t)`.
    pub fn caputo_u(&self, x: f64, t: f64, alpha: f64) -> Result<f64> {
        Ok((self.spatial)(x) * caputo_series(&self.temporal_series, alpha, t, SERIES_TOL)?)
    }

    /// `S = D_t^α u − κ₁ u_xx + κ₂ u_x`.
    pub fn source(&self, x: f64, t: f64, alpha: f64, kappa1: f64, kappa2: f64) -> Result<f64> {
        Ok(self.caputo_u(x, t, alpha)? - kappa1 * self.u_xx(x, t) + kappa2 * self.u_x(x, t))
    }

    /// Source closure in time with the spatial factors pre-applied, so the
    /// series is summed once per time level instead of once per point.
    pub fn source_at_time(
        &self,
        t: f64,
        alpha: f64,
        kappa1: f64,
        kappa2: f64,
    ) -> Result<impl Fn(f64) -> f64 + '_> {
        let d = caputo_series(&self.temporal_series, alpha, t, SERIES_TOL)?;
        let th = (self.temporal)(t);
        Ok(move |x: f64| {
            (self.spatial)(x) * d - kappa1 * (self.spatial_dxx)(x) * th
                + kappa2 * (self.spatial_dx)(x) * th
        })
    }
}

const HALF_PI: f64 = std::f64::consts::FRAC_PI_2;

pub fn builtin_examples() -> Vec<ManufacturedSolution> {
    vec![
        ManufacturedSolution {
            name: "ex1",
            formula: "x^2 (1 - x) sin t",
            spatial: |x| x * x * (1.0 - x),
            spatial_dx: |x| 2.0 * x - 3.0 * x * x,
            spatial_dxx: |x| 2.0 - 6.0 * x,
            temporal: f64::sin,
            temporal_dt: f64::cos,
            temporal_series: TaylorSeries::Entire(sin_coefficients),
            kappa: (0.1, 2.0),
        },
        ManufacturedSolution {
            name: "ex2",
            formula: "sin(pi x) exp(-t^2)",
            spatial: |x| (PI * x).sin(),
            spatial_dx: |x| PI * (PI * x).cos(),
            spatial_dxx: |x| -PI * PI * (PI * x).sin(),
            temporal: |t| (-t * t).exp(),
            temporal_dt: |t| -2.0 * t * (-t * t).exp(),
            temporal_series: TaylorSeries::Entire(exp_neg_square_coefficients),
            kappa: (1.0, 1.0),
        },
        ManufacturedSolution {
            name: "ex3",
            formula: "x^4 (1 - x)^2 t^2",
            spatial: |x| x.powi(4) * (1.0 - x).powi(2),
            // x⁴ − 2x⁵ + x⁶
            spatial_dx: |x| 4.0 * x.powi(3) - 10.0 * x.powi(4) + 6.0 * x.powi(5),
            spatial_dxx: |x| 12.0 * x * x - 40.0 * x.powi(3) + 30.0 * x.powi(4),
            temporal: |t| t * t,
            temporal_dt: |t| 2.0 * t,
            temporal_series: TaylorSeries::Polynomial(vec![0.0, 0.0, 1.0]),
            kappa: (0.2, 1.5),
        },
        ManufacturedSolution {
            name: "ex4",
            formula: "x cos(pi x / 2) exp(-t)",
            spatial: |x| x * (HALF_PI * x).cos(),
            spatial_dx: |x| (HALF_PI * x).cos() - HALF_PI * x * (HALF_PI * x).sin(),
            spatial_dxx: |x| {
                -2.0 * HALF_PI * (HALF_PI * x).sin() - HALF_PI * HALF_PI * x * (HALF_PI * x).cos()
            },
            temporal: |t| (-t).exp(),
            temporal_dt: |t| -(-t).exp(),
            temporal_series: TaylorSeries::Entire(exp_neg_coefficients),
            kappa: (0.1, 2.0),
        },
    ]
}

pub fn example(name: &str) -> Result<ManufacturedSolution> {
    builtin_examples()
        .into_iter()
        .find(|e| e.name == name)
        .ok_or_else(|| Error::Argument(format!("unknown example '{name}' (expected ex1..ex4)")))
}
