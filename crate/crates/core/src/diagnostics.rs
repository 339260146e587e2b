//! Markovianity diagnostics over a time grid.
//!
//! Per-grid-point work is independent and goes through [`crate::par`];
//! reports are always assembled in grid order.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::channel::{choi, projector_depolarizing, ChannelError, DensityMatrix, Superoperator};
use crate::family::DynamicalMapFamily;
use crate::generator::SINGULAR_TOL;
use crate::matcore::{self, MatError};
use crate::par;
use crate::quad;

/// Default tolerance on the smallest Choi eigenvalue of V(t+Δ, t).
pub const DIVISIBILITY_TOL: f64 = 1e-8;

/// Default threshold above which a trace-distance derivative counts as positive.
pub const BLP_TOL: f64 = 1e-10;

/// Default finite-difference step for [`blp_derivative`].
pub const BLP_STEP: f64 = 1e-5;

/// Absolute tolerance of the Laplace and waiting-time quadratures.
pub const QUAD_TOL: f64 = 1e-10;

/// Number of random antipodal pairs added to the six axis pairs.
pub const RANDOM_PAIRS: usize = 20;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DiagnosticsError {
    #[error("dynamical map is not invertible at t = {t} (smallest singular value {sigma_min:.3e})")]
    SingularMap { t: f64, sigma_min: f64 },
    #[error("channel parameter λ = {lambda} at t = {t} is outside [0, 1]")]
    BadLambda { t: f64, lambda: f64 },
    #[error("dimension must be at least 2, got {0}")]
    BadDim(usize),
    #[error("capacity is only available for the completely depolarizing projector")]
    UnsupportedChannel,
    #[error("Laplace variable must be positive, got {0}")]
    BadS(f64),
    #[error("1 − f̃(s) = {0:.3e} is too close to zero")]
    PoleAtS(f64),
    #[error("invalid argument: {0}")]
    BadArgument(String),
    #[error(transparent)]
    Channel(#[from] ChannelError),
    #[error(transparent)]
    Matrix(#[from] MatError),
}

/// Maximal runs of consecutive grid points where `flags` is set, as
/// `(first t, last t)` pairs.
pub fn intervals_where(tgrid: &[f64], flags: &[bool]) -> Vec<(f64, f64)> {
    let mut out = Vec::new();
    let mut start: Option<usize> = None;
    for (i, &on) in flags.iter().enumerate() {
        match (on, start) {
            (true, None) => start = Some(i),
            (false, Some(s)) => {
                out.push((tgrid[s], tgrid[i - 1]));
                start = None;
            }
            _ => {}
        }
    }
    if let Some(s) = start {
        out.push((tgrid[s], tgrid[flags.len() - 1]));
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Divisible,
    Nondivisible,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DivisibilityReport {
    pub tgrid: Vec<f64>,
    pub min_choi_eig: Vec<f64>,
    pub verdict: Verdict,
    pub violation_intervals: Vec<(f64, f64)>,
    pub tol: f64,
}

fn checked_inverse(map: &Superoperator, t: f64) -> Result<Superoperator, DiagnosticsError> {
    let sigma_min = matcore::min_singular_value(map.matrix())?;
    if sigma_min <= SINGULAR_TOL {
        return Err(DiagnosticsError::SingularMap { t, sigma_min });
    }
    map.inverse().map_err(|_| DiagnosticsError::SingularMap { t, sigma_min })
}

/// Smallest Choi eigenvalue of the intermediate map `V(t+Δ, t) = Λ(t+Δ)Λ(t)⁻¹`.
pub fn intermediate_min_eig(family: &DynamicalMapFamily, t: f64, delta: f64) -> Result<f64, DiagnosticsError> {
    let inv = checked_inverse(&family.map_at(t), t)?;
    let v = family.map_at(t + delta).compose(&inv)?;
    let ev = choi(&v).eigenvalues()?;
    Ok(*ev.last().expect("non-empty spectrum"))
}

/// CP-divisibility scan: records λ_min of the Choi matrix of `V(t+Δ, t)` at
/// every grid point.
pub fn cp_divisibility_scan(
    family: &DynamicalMapFamily,
    tgrid: &[f64],
    delta: f64,
    tol: f64,
) -> Result<DivisibilityReport, DiagnosticsError> {
    if !(delta > 0.0) {
        return Err(DiagnosticsError::BadArgument(format!("step Δ must be positive, got {delta}")));
    }
    let min_choi_eig = par::try_map_indexed(tgrid.len(), |i| intermediate_min_eig(family, tgrid[i], delta))?;
    let flags: Vec<bool> = min_choi_eig.iter().map(|&l| l < -tol).collect();
    let violation_intervals = intervals_where(tgrid, &flags);
    let verdict = if violation_intervals.is_empty() { Verdict::Divisible } else { Verdict::Nondivisible };
    Ok(DivisibilityReport { tgrid: tgrid.to_vec(), min_choi_eig, verdict, violation_intervals, tol })
}

/// Grid spacing used as the default divisibility step.
pub fn default_delta(tgrid: &[f64]) -> f64 {
    if tgrid.len() < 2 {
        return 1e-2;
    }
    (tgrid[tgrid.len() - 1] - tgrid[0]) / (tgrid.len() - 1) as f64
}

fn trace_distance_at(
    family: &DynamicalMapFamily,
    diff: &matcore::ComplexMatrix,
    t: f64,
) -> Result<f64, DiagnosticsError> {
    let out = family.map_at(t).apply_operator(diff)?;
    Ok(matcore::trace_norm(&out.hermitian_part())?)
}

/// `d/dt ‖Λ(t)(ρ₁ − ρ₂)‖₁` by central differences (second-order forward
/// differences when t < h).
pub fn blp_derivative(
    family: &DynamicalMapFamily,
    rho1: &DensityMatrix,
    rho2: &DensityMatrix,
    t: f64,
    h: f64,
) -> Result<f64, DiagnosticsError> {
    if !(h > 0.0) {
        return Err(DiagnosticsError::BadArgument(format!("step h must be positive, got {h}")));
    }
    let diff = rho1.matrix().try_sub(rho2.matrix())?;
    let n = |s: f64| trace_distance_at(family, &diff, s);
    if t >= h {
        Ok((n(t + h)? - n(t - h)?) / (2.0 * h))
    } else {
        Ok((-3.0 * n(t)? + 4.0 * n(t + h)? - n(t + 2.0 * h)?) / (2.0 * h))
    }
}

pub type StatePair = (DensityMatrix, DensityMatrix);

fn antipodal(r: [f64; 3]) -> StatePair {
    let neg = [-r[0], -r[1], -r[2]];
    (DensityMatrix::bloch(r).expect("unit Bloch vector"), DensityMatrix::bloch(neg).expect("unit Bloch vector"))
}

/// Six axis pairs (±x, ±y, ±z) followed by [`RANDOM_PAIRS`] random antipodal
/// pure-state pairs drawn from a ChaCha8 stream seeded with `seed`.
pub fn default_qubit_pairs(seed: u64) -> Vec<StatePair> {
    let mut pairs = Vec::with_capacity(6 + RANDOM_PAIRS);
    for axis in 0..3 {
        let mut r = [0.0; 3];
        r[axis] = 1.0;
        pairs.push(antipodal(r));
        r[axis] = -1.0;
        pairs.push(antipodal(r));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    while pairs.len() < 6 + RANDOM_PAIRS {
        let v: [f64; 3] = [rng.sample(StandardNormal), rng.sample(StandardNormal), rng.sample(StandardNormal)];
        let norm = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
        if norm < 1e-6 {
            continue;
        }
        // Shrink by one ulp-scale factor so rounding never leaves the Bloch ball.
        let s = (1.0 - 1e-15) / norm;
        pairs.push(antipodal([v[0] * s, v[1] * s, v[2] * s]));
    }
    pairs
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlpReport {
    pub tgrid: Vec<f64>,
    pub sigma: Vec<f64>,
    pub positive_intervals: Vec<(f64, f64)>,
    pub tol: f64,
}

impl BlpReport {
    pub fn is_markovian(&self) -> bool {
        self.positive_intervals.is_empty()
    }
}

/// σ(t) = max over pairs of the trace-distance derivative.
pub fn blp_scan(
    family: &DynamicalMapFamily,
    tgrid: &[f64],
    pairs: &[StatePair],
    h: f64,
    tol: f64,
) -> Result<BlpReport, DiagnosticsError> {
    if pairs.is_empty() {
        return Err(DiagnosticsError::BadArgument("at least one state pair is required".into()));
    }
    let sigma = par::try_map_indexed(tgrid.len(), |i| {
        pairs.iter().try_fold(f64::NEG_INFINITY, |acc, (a, b)| {
            Ok::<_, DiagnosticsError>(acc.max(blp_derivative(family, a, b, tgrid[i], h)?))
        })
    })?;
    let flags: Vec<bool> = sigma.iter().map(|&s| s > tol).collect();
    let positive_intervals = intervals_where(tgrid, &flags);
    Ok(BlpReport { tgrid: tgrid.to_vec(), sigma, positive_intervals, tol })
}

/// `x ln x` with the continuous extension 0 at x = 0.
fn xlogx_rel(x: f64, d: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        x * (d * x).ln()
    }
}

/// Classical capacity of `λ𝟙 + (1 − λ)E` with E completely depolarizing, in nats.
///
/// Evaluated as `a ln(da) + (d−1) b ln(db)` with `a = λ + (1−λ)/d`,
/// `b = (1−λ)/d`, which equals `ln d − S_min` because `a + (d−1)b = 1`.
pub fn depolarizing_capacity(lambda: f64, d: usize) -> Result<f64, DiagnosticsError> {
    if d < 2 {
        return Err(DiagnosticsError::BadDim(d));
    }
    if !(0.0..=1.0).contains(&lambda) {
        return Err(DiagnosticsError::BadLambda { t: f64::NAN, lambda });
    }
    let df = d as f64;
    let b = (1.0 - lambda) / df;
    let a = lambda + b;
    let c = xlogx_rel(a, df) + (df - 1.0) * xlogx_rel(b, df);
    Ok(c.clamp(0.0, df.ln()))
}

/// Minimal output entropy of the depolarizing family, in nats.
pub fn min_output_entropy(lambda: f64, d: usize) -> Result<f64, DiagnosticsError> {
    Ok((d as f64).ln() - depolarizing_capacity(lambda, d)?)
}

/// Refuses projectors other than the completely depolarizing one.
pub fn require_depolarizing(e: &Superoperator) -> Result<(), DiagnosticsError> {
    if e.distance(&projector_depolarizing(e.dim())) > 1e-12 {
        return Err(DiagnosticsError::UnsupportedChannel);
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CapacitySeries {
    pub tgrid: Vec<f64>,
    pub capacity: Vec<f64>,
    pub lambda_values: Vec<f64>,
}

impl CapacitySeries {
    /// Runs of grid points `t_i` with `C(t_{i+1}) > C(t_i)`.
    pub fn increasing_intervals(&self) -> Vec<(f64, f64)> {
        let mut flags: Vec<bool> = self.capacity.windows(2).map(|w| w[1] > w[0]).collect();
        flags.push(false);
        intervals_where(&self.tgrid, &flags)
    }

    pub fn is_strictly_decreasing(&self) -> bool {
        self.capacity.windows(2).all(|w| w[1] < w[0])
    }
}

/// `C(μ(tᵢ), d)` along the grid.
pub fn capacity_trajectory(
    mu: &(dyn Fn(f64) -> f64 + Sync),
    tgrid: &[f64],
    d: usize,
) -> Result<CapacitySeries, DiagnosticsError> {
    let lambda_values: Vec<f64> = par::map_indexed(tgrid.len(), |i| mu(tgrid[i]));
    let capacity = par::try_map_indexed(tgrid.len(), |i| {
        depolarizing_capacity(lambda_values[i], d).map_err(|e| match e {
            DiagnosticsError::BadLambda { lambda, .. } => DiagnosticsError::BadLambda { t: tgrid[i], lambda },
            other => other,
        })
    })?;
    Ok(CapacitySeries { tgrid: tgrid.to_vec(), capacity, lambda_values })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SemiMarkovReport {
    pub passed: bool,
    pub nonnegative: bool,
    pub first_negative: Option<f64>,
    pub integral: f64,
    pub tgrid: Vec<f64>,
    pub survival: Vec<f64>,
}

/// Checks `f ≥ 0` on the grid and `∫₀ᵀ f ≤ 1`; reports the survival
/// probability `1 − ∫₀ᵗ f` at each grid point.
pub fn semimarkov_check(f: &dyn Fn(f64) -> f64, horizon: f64, grid: &[f64], breaks: &[f64]) -> SemiMarkovReport {
    let first_negative = grid.iter().copied().filter(|&t| t <= horizon).find(|&t| f(t) < -1e-12);
    let nonnegative = first_negative.is_none();
    let integral = quad::integrate_with_breaks(f, 0.0, horizon, breaks, QUAD_TOL);
    let mut survival = Vec::with_capacity(grid.len());
    let mut acc = 0.0;
    let mut prev = 0.0;
    let per_cell = QUAD_TOL / grid.len().max(1) as f64;
    for &t in grid {
        acc += quad::integrate_with_breaks(f, prev, t, breaks, per_cell.max(1e-14));
        prev = t;
        survival.push(1.0 - acc);
    }
    SemiMarkovReport {
        passed: nonnegative && integral <= 1.0 + 1e-10,
        nonnegative,
        first_negative,
        integral,
        tgrid: grid.to_vec(),
        survival,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LaplaceValue {
    pub value: f64,
    pub horizon: f64,
    /// `e^{−sT}·max|f|/s` with the maximum sampled on [0, T].
    pub truncation_bound: f64,
}

/// `∫₀ᵀ e^{−st} f(t) dt`; the horizon defaults to `40/s`.
pub fn laplace(f: &dyn Fn(f64) -> f64, s: f64, horizon: Option<f64>) -> Result<LaplaceValue, DiagnosticsError> {
    if !(s > 0.0 && s.is_finite()) {
        return Err(DiagnosticsError::BadS(s));
    }
    let horizon = horizon.unwrap_or(40.0 / s);
    let value = quad::integrate(&|t| (-s * t).exp() * f(t), 0.0, horizon, QUAD_TOL);
    let sup = (0..=256).map(|i| f(horizon * i as f64 / 256.0).abs()).fold(0.0, f64::max);
    Ok(LaplaceValue { value, horizon, truncation_bound: (-s * horizon).exp() * sup / s })
}

/// `k̃(s) = s f̃(s)/(1 − f̃(s))`.
pub fn kernel_laplace_from_f(f_tilde: f64, s: f64) -> Result<f64, DiagnosticsError> {
    let denom = 1.0 - f_tilde;
    if denom.abs() <= 1e-12 {
        return Err(DiagnosticsError::PoleAtS(denom));
    }
    Ok(s * f_tilde / denom)
}

/// Inverse relation `f̃(s) = k̃(s)/(s + k̃(s))`.
pub fn f_laplace_from_kernel(k_tilde: f64, s: f64) -> Result<f64, DiagnosticsError> {
    let denom = s + k_tilde;
    if denom.abs() <= 1e-12 {
        return Err(DiagnosticsError::PoleAtS(denom));
    }
    Ok(k_tilde / denom)
}
