//! Splitting the projector semigroup into two non-Markovian projector families.
//!
//! With `μ₁ = e^{−γt} g(t)/p` and `μ₂ = e^{−γt}(1 − g(t))/(1 − p)` one has
//! `p·μ₁ + (1 − p)·μ₂ = e^{−γt}` for any profile `g`, so
//! `p·Λ₁(t) + (1 − p)·Λ₂(t)` is the semigroup `e^{γ(E−𝟙)t}`. The profile is
//! pinned to `g = p` up to `t* = −ln(1 − p)/γ` and must stay in (0, p]
//! afterwards so that both `μ_k` remain in (0, 1].

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::channel::Superoperator;
use crate::family::{self, Breakpoints, DynamicalMapFamily, FamilyError, ScalarFn};

/// Closeness to 0 or 1 at which the rate formulas are refused.
pub const RATE_GUARD: f64 = 1e-12;

const PROFILE_TOL: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MixtureError {
    #[error("invalid parameter: {0}")]
    BadParams(String),
    #[error("rate formula divides by {denominator:.3e} at t = {t}")]
    DivisionByZero { t: f64, denominator: f64 },
    #[error("profile failed validation at t = {t}: {kind}")]
    InvalidProfile { t: f64, kind: ViolationKind },
    #[error(transparent)]
    Family(#[from] FamilyError),
}

/// `t* = −ln(1 − p)/γ`, where `e^{−γt*} = 1 − p`.
pub fn t_star(gamma: f64, p: f64) -> Result<f64, MixtureError> {
    check_gamma_p(gamma, p)?;
    Ok(-(1.0 - p).ln() / gamma)
}

fn check_gamma_p(gamma: f64, p: f64) -> Result<(), MixtureError> {
    if !(gamma > 0.0 && gamma.is_finite()) {
        return Err(MixtureError::BadParams(format!("γ must be positive, got {gamma}")));
    }
    if !(p > 0.0 && p < 1.0) {
        return Err(MixtureError::BadParams(format!("p must lie in (0, 1), got {p}")));
    }
    Ok(())
}

/// Mixing profile `g(t)` with its analytic derivative.
#[derive(Clone)]
pub struct GProfile {
    p: f64,
    gamma: f64,
    t_star: f64,
    g: ScalarFn,
    g_dot: ScalarFn,
    breakpoints: Breakpoints,
}

impl fmt::Debug for GProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("GProfile")
            .field("p", &self.p)
            .field("gamma", &self.gamma)
            .field("t_star", &self.t_star)
            .field("breakpoints", &self.breakpoints)
            .finish()
    }
}

impl GProfile {
    /// A user-supplied profile. It should pass [`validate_profile`] before use.
    pub fn custom(
        gamma: f64,
        p: f64,
        g: ScalarFn,
        g_dot: ScalarFn,
        breakpoints: Breakpoints,
    ) -> Result<Self, MixtureError> {
        let t_star = t_star(gamma, p)?;
        Ok(Self { p, gamma, t_star, g, g_dot, breakpoints })
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn t_star(&self) -> f64 {
        self.t_star
    }

    pub fn g(&self, t: f64) -> f64 {
        (self.g)(t)
    }

    pub fn g_dot(&self, t: f64) -> f64 {
        (self.g_dot)(t)
    }

    pub fn breakpoints(&self) -> &Breakpoints {
        &self.breakpoints
    }
}

/// Heaviside step with H(0) = 0.
fn heaviside(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else {
        0.0
    }
}

/// `g(t) = p·(1 − ε·sin²(γ(t − t*))·H(t − t*))` for 0 < ε < 1.
pub fn g_sin2(gamma: f64, p: f64, epsilon: f64) -> Result<GProfile, MixtureError> {
    let ts = t_star(gamma, p)?;
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(MixtureError::BadParams(format!("ε must lie in (0, 1), got {epsilon}")));
    }
    let g: ScalarFn = Arc::new(move |t| {
        let s = (gamma * (t - ts)).sin();
        p * (1.0 - epsilon * s * s * heaviside(t - ts))
    });
    let g_dot: ScalarFn =
        Arc::new(move |t| if t > ts { -p * epsilon * gamma * (2.0 * gamma * (t - ts)).sin() } else { 0.0 });
    Ok(GProfile {
        p,
        gamma,
        t_star: ts,
        g,
        g_dot,
        breakpoints: Breakpoints::Periodic { first: ts, spacing: PI / (2.0 * gamma) },
    })
}

/// The two-component decomposition derived from a profile.
#[derive(Debug, Clone)]
pub struct MixtureDecomposition {
    profile: GProfile,
}

impl MixtureDecomposition {
    pub fn new(profile: GProfile) -> Self {
        Self { profile }
    }

    pub fn profile(&self) -> &GProfile {
        &self.profile
    }

    fn decay(&self, t: f64) -> f64 {
        (-self.profile.gamma * t).exp()
    }

    fn before_switch(&self, t: f64) -> bool {
        t <= self.profile.t_star
    }

    pub fn mu1(&self, t: f64) -> f64 {
        if self.before_switch(t) {
            self.decay(t)
        } else {
            self.decay(t) * self.profile.g(t) / self.profile.p
        }
    }

    pub fn mu2(&self, t: f64) -> f64 {
        if self.before_switch(t) {
            self.decay(t)
        } else {
            self.decay(t) * (1.0 - self.profile.g(t)) / (1.0 - self.profile.p)
        }
    }

    /// `γ₁(t) = γ − ġ/g`.
    pub fn gamma1(&self, t: f64) -> Result<f64, MixtureError> {
        let g = self.profile.g(t);
        if g.abs() <= RATE_GUARD {
            return Err(MixtureError::DivisionByZero { t, denominator: g });
        }
        Ok(self.profile.gamma - self.profile.g_dot(t) / g)
    }

    /// `γ₂(t) = γ + ġ/(1 − g)`.
    pub fn gamma2(&self, t: f64) -> Result<f64, MixtureError> {
        let one_minus_g = 1.0 - self.profile.g(t);
        if one_minus_g.abs() <= RATE_GUARD {
            return Err(MixtureError::DivisionByZero { t, denominator: one_minus_g });
        }
        Ok(self.profile.gamma + self.profile.g_dot(t) / one_minus_g)
    }

    /// `f₁ = −μ̇₁ = γ₁μ₁ = e^{−γt}(γg − ġ)/p`.
    pub fn f1(&self, t: f64) -> f64 {
        let gamma = self.profile.gamma;
        if self.before_switch(t) {
            gamma * self.decay(t)
        } else {
            self.decay(t) * (gamma * self.profile.g(t) - self.profile.g_dot(t)) / self.profile.p
        }
    }

    /// `f₂ = −μ̇₂ = γ₂μ₂ = e^{−γt}(γ(1 − g) + ġ)/(1 − p)`.
    pub fn f2(&self, t: f64) -> f64 {
        let gamma = self.profile.gamma;
        if self.before_switch(t) {
            gamma * self.decay(t)
        } else {
            self.decay(t) * (gamma * (1.0 - self.profile.g(t)) + self.profile.g_dot(t)) / (1.0 - self.profile.p)
        }
    }

    /// `p·μ₁ + (1 − p)·μ₂`, which equals `e^{−γt}`.
    pub fn combined_mu(&self, t: f64) -> f64 {
        let p = self.profile.p;
        p * self.mu1(t) + (1.0 - p) * self.mu2(t)
    }

    /// Λ₁ as a projector family with generator `γ₁(t)(E − 𝟙)`.
    pub fn family1(&self, e: Superoperator) -> Result<DynamicalMapFamily, MixtureError> {
        let (a, b) = (self.clone(), self.clone());
        Ok(family::projector_family_with_rate(
            Arc::new(move |t| a.mu1(t)),
            Arc::new(move |t| b.gamma1(t).unwrap_or(f64::NAN)),
            e,
            self.profile.breakpoints.clone(),
        )?)
    }

    /// Λ₂ as a projector family with generator `γ₂(t)(E − 𝟙)`.
    pub fn family2(&self, e: Superoperator) -> Result<DynamicalMapFamily, MixtureError> {
        let (a, b) = (self.clone(), self.clone());
        Ok(family::projector_family_with_rate(
            Arc::new(move |t| a.mu2(t)),
            Arc::new(move |t| b.gamma2(t).unwrap_or(f64::NAN)),
            e,
            self.profile.breakpoints.clone(),
        )?)
    }

    /// The semigroup `e^{γ(E−𝟙)t}` that the two families average to.
    pub fn semigroup(&self, e: Superoperator) -> Result<DynamicalMapFamily, MixtureError> {
        Ok(family::projector_semigroup(self.profile.gamma, e)?)
    }
}

/// `(μ₁, μ₂)` as standalone functions of time.
pub fn mu_profiles(profile: &GProfile) -> (ScalarFn, ScalarFn) {
    let a = MixtureDecomposition::new(profile.clone());
    let b = a.clone();
    (Arc::new(move |t| a.mu1(t)), Arc::new(move |t| b.mu2(t)))
}

pub type RateFn = Arc<dyn Fn(f64) -> Result<f64, MixtureError> + Send + Sync>;

/// `(γ₁, γ₂)` evaluated from the analytic `g` and `ġ`.
pub fn local_rates(profile: &GProfile) -> (RateFn, RateFn) {
    let a = MixtureDecomposition::new(profile.clone());
    let b = a.clone();
    (Arc::new(move |t| a.gamma1(t)), Arc::new(move |t| b.gamma2(t)))
}

/// Waiting-time densities `(f₁, f₂)` with `f_k = −μ̇_k`.
pub fn waiting_densities(dec: &MixtureDecomposition) -> (ScalarFn, ScalarFn) {
    let a = dec.clone();
    let b = dec.clone();
    (Arc::new(move |t| a.f1(t)), Arc::new(move |t| b.f2(t)))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ViolationKind {
    /// g(0) ≠ p.
    InitialValue,
    /// g differs from p before t*.
    NotPinnedBeforeSwitch,
    /// g ≤ 0.
    NonPositive,
    /// g > p.
    AboveP,
    /// μ₁ outside (0, 1].
    Mu1OutOfRange,
    /// μ₂ outside (0, 1].
    Mu2OutOfRange,
}

impl fmt::Display for ViolationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            ViolationKind::InitialValue => "g(0) differs from p",
            ViolationKind::NotPinnedBeforeSwitch => "g differs from p before t*",
            ViolationKind::NonPositive => "g is not positive",
            ViolationKind::AboveP => "g exceeds p",
            ViolationKind::Mu1OutOfRange => "mu1 leaves (0, 1]",
            ViolationKind::Mu2OutOfRange => "mu2 leaves (0, 1]",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProfileViolation {
    pub t: f64,
    pub kind: ViolationKind,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfileReport {
    pub passed: bool,
    pub first_violation: Option<ProfileViolation>,
}

/// Checks the admissibility constraints of a profile on a grid and reports
/// the first violation in grid order.
pub fn validate_profile(profile: &GProfile, grid: &[f64]) -> ProfileReport {
    let dec = MixtureDecomposition::new(profile.clone());
    let p = profile.p;
    let fail = |t, kind| ProfileReport { passed: false, first_violation: Some(ProfileViolation { t, kind }) };
    if (profile.g(0.0) - p).abs() > PROFILE_TOL {
        return fail(0.0, ViolationKind::InitialValue);
    }
    for &t in grid {
        let g = profile.g(t);
        if t <= profile.t_star && (g - p).abs() > PROFILE_TOL {
            return fail(t, ViolationKind::NotPinnedBeforeSwitch);
        }
        if !(g > PROFILE_TOL) {
            return fail(t, ViolationKind::NonPositive);
        }
        if g > p + PROFILE_TOL {
            return fail(t, ViolationKind::AboveP);
        }
        let mu1 = dec.mu1(t);
        if !(mu1 > 0.0 && mu1 <= 1.0 + PROFILE_TOL) {
            return fail(t, ViolationKind::Mu1OutOfRange);
        }
        let mu2 = dec.mu2(t);
        if !(mu2 > 0.0 && mu2 <= 1.0 + PROFILE_TOL) {
            return fail(t, ViolationKind::Mu2OutOfRange);
        }
    }
    ProfileReport { passed: true, first_violation: None }
}

/// Builds a decomposition, refusing profiles that fail validation on `grid`.
pub fn decompose(profile: GProfile, grid: &[f64]) -> Result<MixtureDecomposition, MixtureError> {
    let report = validate_profile(&profile, grid);
    if let Some(v) = report.first_violation {
        return Err(MixtureError::InvalidProfile { t: v.t, kind: v.kind });
    }
    Ok(MixtureDecomposition::new(profile))
}
