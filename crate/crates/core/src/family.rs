//! Dynamical-map families and the solvers that produce them.
//!
//! A [`DynamicalMapFamily`] is a time-indexed map `t ↦ Λ(t)`. The closed-form
//! constructors here cover Pauli semigroups and their mixture, and projector
//! families `Λ(t) = μ(t)·𝟙 + (1 − μ(t))·E`. Two numerical routes produce
//! [`SampledFamily`] values on a grid: RK4 propagation of a time-local
//! generator, and a predictor-corrector solve of the memory-kernel equation
//! `dΛ/dt = ∫₀ᵗ k(t−τ)(E − 𝟙) Λ(τ) dτ`.

use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::channel::{is_projector, ChannelError, Superoperator};
use crate::matcore::{self, ComplexMatrix};
use crate::quad;

pub type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;
pub type MapFn = Arc<dyn Fn(f64) -> Superoperator + Send + Sync>;

/// Local error bound enforced by [`propagate_ode`].
pub const ODE_LOCAL_TOL: f64 = 1e-6;

/// Absolute tolerance of the quadrature in [`analytic_memory_solution`].
pub const QUAD_TOL: f64 = 1e-10;

const PROJECTOR_TOL: f64 = 1e-10;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FamilyError {
    #[error("Pauli axis must be 1, 2 or 3, got {0}")]
    BadAxis(usize),
    #[error("invalid parameter: {0}")]
    BadParams(String),
    #[error("superoperator is not a projector (E² ≠ E)")]
    NotProjector,
    #[error("profile must start at 1, got μ(0) = {0}")]
    BadInitialProfile(f64),
    #[error("families have different dimensions ({0} vs {1})")]
    DimMismatch(usize, usize),
    #[error("time grid must be ascending and start at 0")]
    BadGrid,
    #[error("time grid is not uniform")]
    NonuniformGrid,
    #[error("RK4 local error estimate {estimate:.3e} exceeds {ODE_LOCAL_TOL:e} on [{t0}, {t1}]")]
    StepTooLarge { t0: f64, t1: f64, estimate: f64 },
    #[error(transparent)]
    Channel(#[from] ChannelError),
}

/// Points where a family's time dependence is not smooth.
#[derive(Debug, Clone, PartialEq, Default)]
pub enum Breakpoints {
    #[default]
    None,
    List(Vec<f64>),
    /// `first + n·spacing` for n = 0, 1, 2, …
    Periodic {
        first: f64,
        spacing: f64,
    },
}

impl Breakpoints {
    /// Ascending breakpoints inside the closed interval [a, b].
    pub fn within(&self, a: f64, b: f64) -> Vec<f64> {
        match self {
            Breakpoints::None => Vec::new(),
            Breakpoints::List(v) => {
                let mut out: Vec<f64> = v.iter().copied().filter(|&t| t >= a && t <= b).collect();
                out.sort_by(f64::total_cmp);
                out
            }
            Breakpoints::Periodic { first, spacing } => {
                let n0 = ((a - first) / spacing).ceil().max(0.0) as u64;
                (n0..).map(|n| first + n as f64 * spacing).take_while(|&t| t <= b).filter(|&t| t >= a).collect()
            }
        }
    }

    /// Union of two breakpoint sets restricted to [0, horizon].
    pub fn merged(&self, other: &Self, horizon: f64) -> Self {
        let mut all = self.within(0.0, horizon);
        all.extend(other.within(0.0, horizon));
        all.sort_by(f64::total_cmp);
        all.dedup();
        if all.is_empty() {
            Breakpoints::None
        } else {
            Breakpoints::List(all)
        }
    }
}

/// Time-indexed family of superoperators with optional analytic extras.
#[derive(Clone)]
pub struct DynamicalMapFamily {
    dim: usize,
    map_at: MapFn,
    generator_at: Option<MapFn>,
    profile: Option<ScalarFn>,
    breakpoints: Breakpoints,
}

impl fmt::Debug for DynamicalMapFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("DynamicalMapFamily")
            .field("dim", &self.dim)
            .field("has_generator", &self.generator_at.is_some())
            .field("has_profile", &self.profile.is_some())
            .field("breakpoints", &self.breakpoints)
            .finish()
    }
}

impl DynamicalMapFamily {
    pub fn new(dim: usize, map_at: MapFn) -> Self {
        Self { dim, map_at, generator_at: None, profile: None, breakpoints: Breakpoints::None }
    }

    pub fn with_generator(mut self, generator_at: MapFn) -> Self {
        self.generator_at = Some(generator_at);
        self
    }

    pub fn with_profile(mut self, profile: ScalarFn) -> Self {
        self.profile = Some(profile);
        self
    }

    pub fn with_breakpoints(mut self, breakpoints: Breakpoints) -> Self {
        self.breakpoints = breakpoints;
        self
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn map_at(&self, t: f64) -> Superoperator {
        (self.map_at)(t)
    }

    pub fn generator_at(&self, t: f64) -> Option<Superoperator> {
        self.generator_at.as_ref().map(|g| g(t))
    }

    pub fn profile(&self, t: f64) -> Option<f64> {
        self.profile.as_ref().map(|p| p(t))
    }

    pub fn breakpoints(&self) -> &Breakpoints {
        &self.breakpoints
    }
}

/// Superoperators sampled on a time grid.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledFamily {
    pub dim: usize,
    pub tgrid: Vec<f64>,
    pub maps: Vec<Superoperator>,
}

impl SampledFamily {
    /// Largest Frobenius deviation from a reference family over the grid.
    pub fn max_deviation(&self, reference: &DynamicalMapFamily) -> f64 {
        self.tgrid.iter().zip(&self.maps).map(|(&t, m)| m.distance(&reference.map_at(t))).fold(0.0, f64::max)
    }
}

/// Memory kernel `K(t) = k(t)·(E − 𝟙)` for a CPTP projector E.
#[derive(Clone)]
pub struct MemoryKernel {
    k: ScalarFn,
    projector: Superoperator,
}

impl MemoryKernel {
    pub fn new(k: ScalarFn, projector: Superoperator) -> Result<Self, FamilyError> {
        if !is_projector(&projector, PROJECTOR_TOL) {
            return Err(FamilyError::NotProjector);
        }
        Ok(Self { k, projector })
    }

    pub fn dim(&self) -> usize {
        self.projector.dim()
    }

    pub fn k(&self, t: f64) -> f64 {
        (self.k)(t)
    }

    pub fn projector(&self) -> &Superoperator {
        &self.projector
    }
}

fn pauli_sandwich(k: usize) -> Superoperator {
    let s = matcore::pauli(k);
    Superoperator::sandwich(&s, &s)
}

/// `(1 − w)·𝟙 + w·E`.
fn blend_identity(e: &Superoperator, w: f64) -> Superoperator {
    Superoperator::identity(e.dim()).lin_comb(1.0 - w, e, w).expect("matching dimensions")
}

/// The semigroup `e^{tL_k}` with `L_k ρ = (c/2)(σ_k ρ σ_k − ρ)`.
pub fn pauli_semigroup(c: f64, k: usize) -> Result<DynamicalMapFamily, FamilyError> {
    if !(1..=3).contains(&k) {
        return Err(FamilyError::BadAxis(k));
    }
    if !(c > 0.0 && c.is_finite()) {
        return Err(FamilyError::BadParams(format!("rate c must be positive, got {c}")));
    }
    let flip = pauli_sandwich(k);
    let id = Superoperator::identity(2);
    let generator = flip.sub(&id).expect("qubit").scale(c / 2.0);
    let map_at: MapFn = Arc::new(move |t| {
        let x = (-c * t).exp();
        id.lin_comb((1.0 + x) / 2.0, &flip, (1.0 - x) / 2.0).expect("qubit")
    });
    Ok(DynamicalMapFamily::new(2, map_at).with_generator(Arc::new(move |_| generator.clone())))
}

/// `Λ(t)ρ = ((1+e^{−ct})/2)ρ + ((1−e^{−ct})/4)(σ₁ρσ₁ + σ₂ρσ₂)`, the equal mixture
/// of the σ₁ and σ₂ dephasing semigroups.
pub fn pauli_mixture(c: f64) -> Result<DynamicalMapFamily, FamilyError> {
    if !(c > 0.0 && c.is_finite()) {
        return Err(FamilyError::BadParams(format!("rate c must be positive, got {c}")));
    }
    let id = Superoperator::identity(2);
    let flips = pauli_sandwich(1).add(&pauli_sandwich(2)).expect("qubit");
    // Rates (c/4, c/4, −(c/4)·tanh(ct/2)).
    let d12 = flips.sub(&id.scale(2.0)).expect("qubit").scale(c / 4.0);
    let d3 = pauli_sandwich(3).sub(&id).expect("qubit");
    let generator = Arc::new(move |t: f64| {
        let g3 = -(c / 4.0) * (c * t / 2.0).tanh();
        d12.add(&d3.scale(g3)).expect("qubit")
    });
    Ok(DynamicalMapFamily::new(
        2,
        Arc::new(move |t| {
            let x = (-c * t).exp();
            id.lin_comb((1.0 + x) / 2.0, &flips, (1.0 - x) / 4.0).expect("qubit")
        }),
    )
    .with_generator(generator))
}

/// `Λ(t) = μ(t)·𝟙 + (1 − μ(t))·E` for a CPTP projector E.
pub fn projector_family(mu: ScalarFn, e: Superoperator) -> Result<DynamicalMapFamily, FamilyError> {
    if !is_projector(&e, PROJECTOR_TOL) {
        return Err(FamilyError::NotProjector);
    }
    let mu0 = mu(0.0);
    if (mu0 - 1.0).abs() > 1e-12 {
        return Err(FamilyError::BadInitialProfile(mu0));
    }
    let dim = e.dim();
    let mu_map = Arc::clone(&mu);
    Ok(DynamicalMapFamily::new(dim, Arc::new(move |t| blend_identity(&e, 1.0 - mu_map(t)))).with_profile(mu))
}

/// Projector family driven by a time-local rate: `μ` is supplied in closed
/// form and the generator is `rate(t)·(E − 𝟙)`.
pub fn projector_family_with_rate(
    mu: ScalarFn,
    rate: ScalarFn,
    e: Superoperator,
    breakpoints: Breakpoints,
) -> Result<DynamicalMapFamily, FamilyError> {
    let l = e.sub(&Superoperator::identity(e.dim()))?;
    Ok(projector_family(mu, e)?.with_generator(Arc::new(move |t| l.scale(rate(t)))).with_breakpoints(breakpoints))
}

/// The semigroup `e^{γ(E−𝟙)t} = e^{−γt}𝟙 + (1 − e^{−γt})E`.
pub fn projector_semigroup(gamma: f64, e: Superoperator) -> Result<DynamicalMapFamily, FamilyError> {
    if !(gamma >= 0.0 && gamma.is_finite()) {
        return Err(FamilyError::BadParams(format!("rate γ must be non-negative, got {gamma}")));
    }
    projector_family_with_rate(Arc::new(move |t| (-gamma * t).exp()), Arc::new(move |_| gamma), e, Breakpoints::None)
}

/// Pointwise `p·F1 + (1 − p)·F2`.
pub fn convex_combine(
    p: f64,
    f1: &DynamicalMapFamily,
    f2: &DynamicalMapFamily,
) -> Result<DynamicalMapFamily, FamilyError> {
    if !(0.0..=1.0).contains(&p) {
        return Err(FamilyError::BadParams(format!("mixing weight must lie in [0, 1], got {p}")));
    }
    if f1.dim != f2.dim {
        return Err(FamilyError::DimMismatch(f1.dim, f2.dim));
    }
    let (a, b) = (f1.clone(), f2.clone());
    let mut out = DynamicalMapFamily::new(
        f1.dim,
        Arc::new(move |t| a.map_at(t).lin_comb(p, &b.map_at(t), 1.0 - p).expect("matching dimensions")),
    );
    if let (Some(m1), Some(m2)) = (f1.profile.clone(), f2.profile.clone()) {
        out = out.with_profile(Arc::new(move |t| p * m1(t) + (1.0 - p) * m2(t)));
    }
    out.breakpoints = match (&f1.breakpoints, &f2.breakpoints) {
        (Breakpoints::None, other) | (other, Breakpoints::None) => other.clone(),
        (x, y) if x == y => x.clone(),
        // Mixed periodic sets are merged over a generous horizon.
        (x, y) => x.merged(y, 1e3),
    };
    Ok(out)
}

fn check_grid(tgrid: &[f64]) -> Result<(), FamilyError> {
    if tgrid.is_empty() || tgrid[0] != 0.0 || tgrid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(FamilyError::BadGrid);
    }
    Ok(())
}

fn rk4_step(g: &dyn Fn(f64) -> ComplexMatrix, t: f64, h: f64, y: &ComplexMatrix) -> ComplexMatrix {
    let k1 = &g(t) * y;
    let y2 = y + &k1.scale_real(h / 2.0);
    let k2 = &g(t + h / 2.0) * &y2;
    let y3 = y + &k2.scale_real(h / 2.0);
    let k3 = &g(t + h / 2.0) * &y3;
    let y4 = y + &k3.scale_real(h);
    let k4 = &g(t + h) * &y4;
    let incr = &(&k1 + &k2.scale_real(2.0)) + &(&k3.scale_real(2.0) + &k4);
    y + &incr.scale_real(h / 6.0)
}

fn rk4_span(g: &dyn Fn(f64) -> ComplexMatrix, t0: f64, t1: f64, steps: usize, y0: &ComplexMatrix) -> ComplexMatrix {
    let h = (t1 - t0) / steps as f64;
    let mut y = y0.clone();
    for s in 0..steps {
        y = rk4_step(g, t0 + s as f64 * h, h, &y);
    }
    y
}

/// Integrates `dΛ/dt = G(t)Λ` from `Λ(0) = 𝟙` with classical RK4.
///
/// Each grid interval is covered by substeps no longer than `max_substep`, and
/// again with half that step; the finer result is kept and the Richardson
/// estimate `‖Λ_fine − Λ_coarse‖_F / 15` must stay below [`ODE_LOCAL_TOL`].
pub fn propagate_ode(
    generator: &dyn Fn(f64) -> Superoperator,
    tgrid: &[f64],
    max_substep: f64,
) -> Result<SampledFamily, FamilyError> {
    check_grid(tgrid)?;
    if !(max_substep > 0.0) {
        return Err(FamilyError::BadParams(format!("substep must be positive, got {max_substep}")));
    }
    let dim = generator(0.0).dim();
    let g = |t: f64| generator(t).matrix().clone();
    let mut y = ComplexMatrix::identity(dim * dim);
    let mut maps = Vec::with_capacity(tgrid.len());
    maps.push(Superoperator::identity(dim));
    for w in tgrid.windows(2) {
        let (t0, t1) = (w[0], w[1]);
        let steps = ((t1 - t0) / max_substep).ceil().max(1.0) as usize;
        let coarse = rk4_span(&g, t0, t1, steps, &y);
        let fine = rk4_span(&g, t0, t1, 2 * steps, &y);
        let estimate = (&fine - &coarse).frobenius_norm() / 15.0;
        if !(estimate <= ODE_LOCAL_TOL) {
            return Err(FamilyError::StepTooLarge { t0, t1, estimate });
        }
        y = fine;
        maps.push(Superoperator::from_matrix_unchecked(dim, y.clone()));
    }
    Ok(SampledFamily { dim, tgrid: tgrid.to_vec(), maps })
}

/// Grid step of a uniform grid starting at 0.
pub fn uniform_step(tgrid: &[f64]) -> Result<f64, FamilyError> {
    check_grid(tgrid)?;
    if tgrid.len() == 1 {
        return Ok(0.0);
    }
    let n = tgrid.len() - 1;
    let h = tgrid[n] / n as f64;
    let tol = 1e-9 * tgrid[n].max(1.0);
    if tgrid.iter().enumerate().any(|(i, &t)| (t - i as f64 * h).abs() > tol) {
        return Err(FamilyError::NonuniformGrid);
    }
    Ok(h)
}

/// Weight `x(t)` of E in `Λ(t) = (1 − x)𝟙 + xE` for the memory-kernel equation.
///
/// Since `(E − 𝟙)E = 0`, the operator equation collapses to the scalar
/// Volterra equation `ẋ(t) = ∫₀ᵗ k(t−τ)(1 − x(τ)) dτ`, `x(0) = 0`. The memory
/// integral uses the trapezoidal rule and the time step is Heun's method
/// (explicit predictor, trapezoidal corrector), which is second order overall.
pub fn solve_memory_weights(k: &dyn Fn(f64) -> f64, tgrid: &[f64]) -> Result<Vec<f64>, FamilyError> {
    let h = uniform_step(tgrid)?;
    let n = tgrid.len();
    let kv: Vec<f64> = (0..n).map(|i| k(i as f64 * h)).collect();
    // y = 1 − x is the survival weight on 𝟙.
    let mut y = vec![0.0; n];
    y[0] = 1.0;
    // memory(m, y_m) = ∫₀^{t_m} k(t_m − τ) y(τ) dτ with y(t_m) = y_m.
    let memory = |y: &[f64], m: usize, y_m: f64| -> f64 {
        if m == 0 {
            return 0.0;
        }
        let interior: f64 = (1..m).map(|j| kv[m - j] * y[j]).sum();
        h * (0.5 * kv[m] * y[0] + interior + 0.5 * kv[0] * y_m)
    };
    let mut deriv_prev = 0.0;
    for m in 0..n - 1 {
        let predictor = y[m] - h * deriv_prev;
        let deriv_next = memory(&y, m + 1, predictor);
        y[m + 1] = y[m] - 0.5 * h * (deriv_prev + deriv_next);
        deriv_prev = memory(&y, m + 1, y[m + 1]);
    }
    Ok(y.into_iter().map(|s| 1.0 - s).collect())
}

/// Solves the memory-kernel master equation on a uniform grid and lifts the
/// scalar solution to superoperators.
pub fn solve_memory_kernel(kernel: &MemoryKernel, tgrid: &[f64]) -> Result<SampledFamily, FamilyError> {
    let x = solve_memory_weights(&|t| kernel.k(t), tgrid)?;
    let maps = x.iter().map(|&w| blend_identity(&kernel.projector, w)).collect();
    Ok(SampledFamily { dim: kernel.dim(), tgrid: tgrid.to_vec(), maps })
}

/// `Λ(t) = (1 − ∫₀ᵗ f)𝟙 + (∫₀ᵗ f)E`, integrating `f` by adaptive Simpson.
pub fn analytic_memory_solution(f: &dyn Fn(f64) -> f64, e: &Superoperator, t: f64) -> Superoperator {
    analytic_memory_solution_with_breaks(f, e, t, &[])
}

/// [`analytic_memory_solution`] with quadrature panels split at `breaks`.
pub fn analytic_memory_solution_with_breaks(
    f: &dyn Fn(f64) -> f64,
    e: &Superoperator,
    t: f64,
    breaks: &[f64],
) -> Superoperator {
    let w = quad::integrate_with_breaks(f, 0.0, t, breaks, QUAD_TOL);
    blend_identity(e, w)
}
