//! Time-local GKSL generators, numerical generator extraction and the qubit
//! Pauli-rate decomposition.

use std::sync::Arc;

use num_complex::Complex64 as C64;
use thiserror::Error;

use crate::channel::{ChannelError, Superoperator};
use crate::family::{DynamicalMapFamily, ScalarFn};
use crate::matcore::{self, kron, ComplexMatrix, MatError};

/// Default finite-difference step for [`extract_generator`].
pub const DEFAULT_FD_STEP: f64 = 1e-4;

/// Smallest singular value below which Λ(t) counts as non-invertible.
pub const SINGULAR_TOL: f64 = 1e-10;

pub type OperatorFn = Arc<dyn Fn(f64) -> ComplexMatrix + Send + Sync>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeneratorError {
    #[error("Hamiltonian is not Hermitian at t = {t}")]
    NotHermitianHamiltonian { t: f64 },
    #[error("operator has dimension {got}, generator expects {expected}")]
    DimMismatch { expected: usize, got: usize },
    #[error("time must be non-negative, got {0}")]
    NegativeTime(f64),
    #[error("finite-difference step must be positive, got {0}")]
    BadStep(f64),
    #[error("dynamical map is not invertible at t = {t} (smallest singular value {sigma_min:.3e})")]
    SingularMap { t: f64, sigma_min: f64 },
    #[error("Pauli-rate decomposition needs a qubit generator, got d = {0}")]
    BadDim(usize),
    #[error(transparent)]
    Matrix(#[from] MatError),
    #[error(transparent)]
    Channel(#[from] ChannelError),
}

/// One dissipative term γ(t)·(VρV† − ½{V†V, ρ}).
#[derive(Clone)]
pub struct Dissipator {
    pub rate: ScalarFn,
    pub noise: OperatorFn,
}

/// `L(t)ρ = −i[H(t), ρ] + Σ_α γ_α(t)(V_α ρ V_α† − ½{V_α†V_α, ρ})`.
#[derive(Clone)]
pub struct GkslGenerator {
    dim: usize,
    hamiltonian: Option<OperatorFn>,
    channels: Vec<Dissipator>,
}

impl GkslGenerator {
    pub fn new(dim: usize) -> Self {
        Self { dim, hamiltonian: None, channels: Vec::new() }
    }

    pub fn with_hamiltonian(mut self, h: OperatorFn) -> Self {
        self.hamiltonian = Some(h);
        self
    }

    pub fn with_constant_hamiltonian(self, h: ComplexMatrix) -> Self {
        self.with_hamiltonian(Arc::new(move |_| h.clone()))
    }

    pub fn with_channel(mut self, rate: ScalarFn, noise: OperatorFn) -> Self {
        self.channels.push(Dissipator { rate, noise });
        self
    }

    pub fn with_constant_channel(self, rate: f64, noise: ComplexMatrix) -> Self {
        self.with_channel(Arc::new(move |_| rate), Arc::new(move |_| noise.clone()))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn channels(&self) -> &[Dissipator] {
        &self.channels
    }
}

/// `Σ_k γ_k(σ_k ρ σ_k − ρ)` as a GKSL generator with constant rates.
pub fn pauli_gksl(rates: [f64; 3]) -> GkslGenerator {
    rates.iter().enumerate().fold(GkslGenerator::new(2), |g, (k, &r)| g.with_constant_channel(r, matcore::pauli(k + 1)))
}

fn check_dim(m: &ComplexMatrix, dim: usize) -> Result<(), GeneratorError> {
    if m.rows() != dim || m.cols() != dim {
        return Err(GeneratorError::DimMismatch { expected: dim, got: m.rows() });
    }
    Ok(())
}

/// Superoperator of the generator at time `t`.
///
/// Under column stacking, `vec(Hρ) = (I⊗H)vec ρ`, `vec(ρH) = (Hᵀ⊗I)vec ρ` and
/// `vec(VρV†) = (V̄⊗V)vec ρ`.
pub fn gksl_superop(g: &GkslGenerator, t: f64) -> Result<Superoperator, GeneratorError> {
    if t < 0.0 {
        return Err(GeneratorError::NegativeTime(t));
    }
    let d = g.dim;
    let id = ComplexMatrix::identity(d);
    let mut l = ComplexMatrix::zeros(d * d, d * d);
    if let Some(hf) = &g.hamiltonian {
        let h = hf(t);
        check_dim(&h, d)?;
        if !h.is_hermitian(1e-10) {
            return Err(GeneratorError::NotHermitianHamiltonian { t });
        }
        let comm = &kron(&id, &h) - &kron(&h.transpose(), &id);
        l = &l + &comm.scale(C64::new(0.0, -1.0));
    }
    for ch in &g.channels {
        let rate = (ch.rate)(t);
        let v = (ch.noise)(t);
        check_dim(&v, d)?;
        let vdv = &v.adjoint() * &v;
        let jump = kron(&v.conj(), &v);
        let anti = &kron(&id, &vdv) + &kron(&vdv.transpose(), &id);
        let term = &jump - &anti.scale_real(0.5);
        l = &l + &term.scale_real(rate);
    }
    Ok(Superoperator::new(d, l)?)
}

enum Stencil {
    Central,
    Forward,
    Backward,
}

fn choose_stencil(family: &DynamicalMapFamily, t: f64, h: f64) -> Stencil {
    if t < h {
        return Stencil::Forward;
    }
    let kinks = family.breakpoints().within(t - h, t + h);
    // A kink strictly inside (t − h, t + h) spoils the central stencil; take
    // the one-sided stencil on the side that does not contain it.
    match kinks.iter().find(|&&b| (b - t).abs() < h) {
        None => Stencil::Central,
        Some(&b) if b <= t => Stencil::Forward,
        Some(_) if t >= 2.0 * h => Stencil::Backward,
        Some(_) => Stencil::Forward,
    }
}

/// `L(t) = Λ̇(t)·Λ(t)⁻¹` by finite differences.
///
/// Central differences away from kinks; second-order one-sided stencils near
/// t = 0 and near registered breakpoints.
pub fn extract_generator(family: &DynamicalMapFamily, t: f64, h: f64) -> Result<Superoperator, GeneratorError> {
    if !(h > 0.0) {
        return Err(GeneratorError::BadStep(h));
    }
    if t < 0.0 {
        return Err(GeneratorError::NegativeTime(t));
    }
    let lam = family.map_at(t);
    let sigma_min = matcore::min_singular_value(lam.matrix())?;
    if sigma_min <= SINGULAR_TOL {
        return Err(GeneratorError::SingularMap { t, sigma_min });
    }
    let m = |s: f64| family.map_at(s).matrix().clone();
    let deriv = match choose_stencil(family, t, h) {
        Stencil::Central => (&m(t + h) - &m(t - h)).scale_real(0.5 / h),
        Stencil::Forward => {
            let acc = &(&m(t + h).scale_real(4.0) - &lam.matrix().scale_real(3.0)) - &m(t + 2.0 * h);
            acc.scale_real(0.5 / h)
        }
        Stencil::Backward => {
            let acc = &(&lam.matrix().scale_real(3.0) - &m(t - h).scale_real(4.0)) + &m(t - 2.0 * h);
            acc.scale_real(0.5 / h)
        }
    };
    let inv = matcore::inv(lam.matrix()).map_err(|_| GeneratorError::SingularMap { t, sigma_min })?;
    Ok(Superoperator::new(family.dim(), &deriv * &inv)?)
}

/// Canonical rates of a qubit generator `Σ_k γ_k(σ_k·σ_k − ·)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PauliRates {
    pub gamma1: f64,
    pub gamma2: f64,
    pub gamma3: f64,
    /// Frobenius norm of the part of L outside its Pauli-diagonal component.
    pub residual: f64,
}

impl PauliRates {
    pub fn as_array(&self) -> [f64; 3] {
        [self.gamma1, self.gamma2, self.gamma3]
    }
}

/// Reads off γ₁, γ₂, γ₃ from the eigenvalues ξ_k of L on σ_k:
/// ξ₁ = −2(γ₂+γ₃), ξ₂ = −2(γ₁+γ₃), ξ₃ = −2(γ₁+γ₂).
pub fn pauli_rates(l: &Superoperator) -> Result<PauliRates, GeneratorError> {
    if l.dim() != 2 {
        return Err(GeneratorError::BadDim(l.dim()));
    }
    let mut xi = [0.0; 3];
    let mut diagonal = ComplexMatrix::zeros(4, 4);
    for k in 1..=3 {
        let s = matcore::pauli(k);
        let ls = l.apply_operator(&s)?;
        xi[k - 1] = (&s * &ls).trace().re / 2.0;
        let v = s.vec();
        diagonal = &diagonal + &ComplexMatrix::outer(&v, &v).scale_real(xi[k - 1] / 2.0);
    }
    let a = xi.map(|x| -x / 2.0);
    let total = (a[0] + a[1] + a[2]) / 2.0;
    let residual = (l.matrix() - &diagonal).frobenius_norm();
    Ok(PauliRates { gamma1: total - a[0], gamma2: total - a[1], gamma3: total - a[2], residual })
}
