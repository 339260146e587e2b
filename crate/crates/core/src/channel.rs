//! States, superoperators, Choi matrices and CPTP projector channels.

use num_complex::Complex64 as C64;
use rand::Rng;
use rand_distr::StandardNormal;
use thiserror::Error;

use crate::matcore::{self, herm_eig, ComplexMatrix, MatError};

/// Default absolute tolerance on the smallest Choi eigenvalue.
pub const PSD_TOL: f64 = 1e-10;

/// Relative Hermiticity tolerance for Choi matrices.
pub const CHOI_HERMITIAN_TOL: f64 = 1e-8;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ChannelError {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimMismatch { expected: usize, got: usize },
    #[error("invalid density matrix: {0}")]
    InvalidState(String),
    #[error("dimension must be at least 2, got {0}")]
    BadDim(usize),
    #[error("map is not Hermiticity-preserving (Choi asymmetry {asymmetry:.3e})")]
    NotHermitian { asymmetry: f64 },
    #[error(transparent)]
    Matrix(#[from] MatError),
}

/// A d × d Hermitian, unit-trace, positive semidefinite matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    dim: usize,
    matrix: ComplexMatrix,
}

impl DensityMatrix {
    pub fn new(matrix: ComplexMatrix) -> Result<Self, ChannelError> {
        if !matrix.is_square() {
            return Err(ChannelError::InvalidState(format!("{}x{} is not square", matrix.rows(), matrix.cols())));
        }
        if !matrix.is_hermitian(1e-10) {
            return Err(ChannelError::InvalidState("not Hermitian".into()));
        }
        let tr = matrix.trace();
        if (tr.re - 1.0).abs() > 1e-10 || tr.im.abs() > 1e-10 {
            return Err(ChannelError::InvalidState(format!("trace {tr} differs from 1")));
        }
        let lmin = herm_eig(&matrix)?.min();
        if lmin < -1e-10 {
            return Err(ChannelError::InvalidState(format!("negative eigenvalue {lmin:.3e}")));
        }
        Ok(Self { dim: matrix.rows(), matrix })
    }

    /// Maximally mixed state I/d.
    pub fn maximally_mixed(dim: usize) -> Self {
        Self { dim, matrix: ComplexMatrix::identity(dim).scale_real(1.0 / dim as f64) }
    }

    /// Computational basis projector |k⟩⟨k|.
    pub fn basis(dim: usize, k: usize) -> Self {
        Self { dim, matrix: ComplexMatrix::unit(dim, k, k) }
    }

    /// Qubit state (I + r·σ)/2 for a Bloch vector with |r| ≤ 1.
    pub fn bloch(r: [f64; 3]) -> Result<Self, ChannelError> {
        let m =
            r.iter().enumerate().fold(matcore::pauli(0), |acc, (k, &x)| &acc + &matcore::pauli(k + 1).scale_real(x));
        Self::new(m.scale_real(0.5))
    }

    /// Random full-rank state GG†/Tr(GG†) with G a standard complex Gaussian matrix.
    pub fn random<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Self {
        let g =
            ComplexMatrix::from_fn(dim, dim, |_, _| C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)));
        let gg = &g * &g.adjoint();
        let tr = gg.trace().re;
        let m = gg.scale_real(1.0 / tr).hermitian_part();
        Self { dim, matrix: m }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }
}

/// Linear map on d × d operators, stored as a d² × d² matrix acting on
/// column-stacked operators.
#[derive(Debug, Clone, PartialEq)]
pub struct Superoperator {
    dim: usize,
    matrix: ComplexMatrix,
}

impl Superoperator {
    pub fn new(dim: usize, matrix: ComplexMatrix) -> Result<Self, ChannelError> {
        let n = dim * dim;
        if matrix.rows() != n || matrix.cols() != n {
            return Err(ChannelError::DimMismatch { expected: n, got: matrix.rows() });
        }
        if !matrix.is_finite() {
            return Err(MatError::NonFinite.into());
        }
        Ok(Self { dim, matrix })
    }

    /// Wraps a matrix already known to have shape d² × d².
    pub(crate) fn from_matrix_unchecked(dim: usize, matrix: ComplexMatrix) -> Self {
        debug_assert_eq!(matrix.rows(), dim * dim);
        Self { dim, matrix }
    }

    /// Realizes an arbitrary linear map by evaluating it on the matrix units.
    pub fn from_map(dim: usize, f: impl Fn(&ComplexMatrix) -> ComplexMatrix) -> Self {
        let n = dim * dim;
        let mut m = ComplexMatrix::zeros(n, n);
        for j in 0..dim {
            for i in 0..dim {
                let col = i + j * dim;
                let image = f(&ComplexMatrix::unit(dim, i, j)).vec();
                for (row, z) in image.into_iter().enumerate() {
                    m[(row, col)] = z;
                }
            }
        }
        Self { dim, matrix: m }
    }

    /// Superoperator of ρ ↦ AρB.
    pub fn sandwich(a: &ComplexMatrix, b: &ComplexMatrix) -> Self {
        Self { dim: a.rows(), matrix: matcore::kron(&b.transpose(), a) }
    }

    pub fn identity(dim: usize) -> Self {
        Self { dim, matrix: ComplexMatrix::identity(dim * dim) }
    }

    pub fn zero(dim: usize) -> Self {
        Self { dim, matrix: ComplexMatrix::zeros(dim * dim, dim * dim) }
    }

    /// Matrix transposition ρ ↦ ρᵀ (positive but not completely positive).
    pub fn transposition(dim: usize) -> Self {
        Self::from_map(dim, |x| x.transpose())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    /// Applies the map to an arbitrary d × d operator.
    pub fn apply_operator(&self, x: &ComplexMatrix) -> Result<ComplexMatrix, ChannelError> {
        if x.rows() != self.dim || x.cols() != self.dim {
            return Err(ChannelError::DimMismatch { expected: self.dim, got: x.rows() });
        }
        let v = self.matrix.matvec(&x.vec())?;
        Ok(ComplexMatrix::unvec(&v, self.dim, self.dim)?)
    }

    /// unvec(S · vec(ρ)).
    pub fn apply(&self, rho: &DensityMatrix) -> Result<ComplexMatrix, ChannelError> {
        self.apply_operator(rho.matrix())
    }

    /// Composition `self ∘ other` (apply `other` first).
    pub fn compose(&self, other: &Self) -> Result<Self, ChannelError> {
        self.check_dim(other)?;
        Ok(Self { dim: self.dim, matrix: &self.matrix * &other.matrix })
    }

    pub fn add(&self, other: &Self) -> Result<Self, ChannelError> {
        self.check_dim(other)?;
        Ok(Self { dim: self.dim, matrix: &self.matrix + &other.matrix })
    }

    pub fn sub(&self, other: &Self) -> Result<Self, ChannelError> {
        self.check_dim(other)?;
        Ok(Self { dim: self.dim, matrix: &self.matrix - &other.matrix })
    }

    pub fn scale(&self, s: f64) -> Self {
        Self { dim: self.dim, matrix: self.matrix.scale_real(s) }
    }

    /// a·self + b·other.
    pub fn lin_comb(&self, a: f64, other: &Self, b: f64) -> Result<Self, ChannelError> {
        self.check_dim(other)?;
        Ok(Self { dim: self.dim, matrix: &self.matrix.scale_real(a) + &other.matrix.scale_real(b) })
    }

    pub fn inverse(&self) -> Result<Self, ChannelError> {
        Ok(Self { dim: self.dim, matrix: matcore::inv(&self.matrix)? })
    }

    /// Frobenius distance to another superoperator.
    pub fn distance(&self, other: &Self) -> f64 {
        (&self.matrix - &other.matrix).frobenius_norm()
    }

    fn check_dim(&self, other: &Self) -> Result<(), ChannelError> {
        if self.dim != other.dim {
            return Err(ChannelError::DimMismatch { expected: self.dim, got: other.dim });
        }
        Ok(())
    }
}

/// Unnormalized Choi matrix Σᵢⱼ |i⟩⟨j| ⊗ S(|i⟩⟨j|); trace d for TP maps.
#[derive(Debug, Clone, PartialEq)]
pub struct ChoiMatrix {
    dim: usize,
    matrix: ComplexMatrix,
}

impl ChoiMatrix {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    /// Spectrum of the Hermitian part, descending. Fails when the map is not
    /// Hermiticity-preserving.
    pub fn eigenvalues(&self) -> Result<Vec<f64>, ChannelError> {
        let asymmetry = self.matrix.hermitian_defect();
        if asymmetry > CHOI_HERMITIAN_TOL * self.matrix.frobenius_norm().max(1.0) {
            return Err(ChannelError::NotHermitian { asymmetry });
        }
        Ok(herm_eig(&self.matrix.hermitian_part())?.eigenvalues)
    }
}

pub fn choi(s: &Superoperator) -> ChoiMatrix {
    let d = s.dim;
    let n = d * d;
    // C[(i,a),(j,b)] = S(|i⟩⟨j|)[a,b] = S[a + b·d, i + j·d]
    let m = ComplexMatrix::from_fn(n, n, |r, c| {
        let (i, a) = (r / d, r % d);
        let (j, b) = (c / d, c % d);
        s.matrix[(a + b * d, i + j * d)]
    });
    ChoiMatrix { dim: d, matrix: m }
}

/// Outcome of a complete-positivity test.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CpReport {
    pub is_cp: bool,
    pub min_eigenvalue: f64,
}

/// CP iff the smallest Choi eigenvalue is at least `-tol`.
pub fn is_cp(s: &Superoperator, tol: f64) -> Result<CpReport, ChannelError> {
    let min_eigenvalue = *choi(s).eigenvalues()?.last().expect("non-empty spectrum");
    Ok(CpReport { is_cp: min_eigenvalue >= -tol, min_eigenvalue })
}

/// Trace preservation checked on every matrix unit.
pub fn is_tp(s: &Superoperator, tol: f64) -> bool {
    let d = s.dim;
    // Tr S(|i⟩⟨j|) = Σ_a S[a + a·d, i + j·d]
    (0..d).all(|j| {
        (0..d).all(|i| {
            let col = i + j * d;
            let tr: C64 = (0..d).map(|a| s.matrix[(a + a * d, col)]).sum();
            let expected = if i == j { 1.0 } else { 0.0 };
            (tr - expected).norm() <= tol
        })
    })
}

/// ‖S² − S‖_F ≤ tol.
pub fn is_projector(s: &Superoperator, tol: f64) -> bool {
    let sq = &s.matrix * &s.matrix;
    (&sq - &s.matrix).frobenius_norm() <= tol
}

/// Replacement channel ρ ↦ ω Tr ρ.
pub fn projector_replacer(omega: &DensityMatrix) -> Superoperator {
    let d = omega.dim;
    let w = omega.matrix.vec();
    // Column (i + j·d) equals vec(ω) when i = j, zero otherwise.
    let n = d * d;
    let m = ComplexMatrix::from_fn(n, n, |r, c| {
        let (i, j) = (c % d, c / d);
        if i == j {
            w[r]
        } else {
            C64::new(0.0, 0.0)
        }
    });
    Superoperator { dim: d, matrix: m }
}

/// Completely depolarizing channel ρ ↦ (I/d) Tr ρ.
pub fn projector_depolarizing(dim: usize) -> Superoperator {
    projector_replacer(&DensityMatrix::maximally_mixed(dim))
}

/// Pinching ρ ↦ Σₖ |k⟩⟨k| ρ |k⟩⟨k| onto the computational basis.
pub fn projector_dephase(dim: usize) -> Result<Superoperator, ChannelError> {
    if dim < 2 {
        return Err(ChannelError::BadDim(dim));
    }
    Ok(Superoperator::from_map(dim, |x| {
        ComplexMatrix::from_fn(dim, dim, |i, j| if i == j { x[(i, i)] } else { C64::new(0.0, 0.0) })
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    fn assert_close(a: &ComplexMatrix, b: &ComplexMatrix, tol: f64) {
        let d = (a - b).max_abs();
        assert!(d <= tol, "difference {d:e}\n{a:?}\n{b:?}");
    }

    #[test]
    fn density_matrix_validation() {
        assert!(DensityMatrix::new(ComplexMatrix::diag_real(&[0.5, 0.5])).is_ok());
        assert!(matches!(
            DensityMatrix::new(ComplexMatrix::diag_real(&[0.6, 0.5])),
            Err(ChannelError::InvalidState(_))
        ));
        assert!(matches!(
            DensityMatrix::new(ComplexMatrix::diag_real(&[1.5, -0.5])),
            Err(ChannelError::InvalidState(_))
        ));
        assert!(DensityMatrix::bloch([0.0, 0.0, 1.2]).is_err());
    }

    #[test]
    fn apply_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let rho = DensityMatrix::random(2, &mut rng);
        assert_close(&Superoperator::identity(2).apply(&rho).unwrap(), rho.matrix(), 1e-15);
        let out = projector_depolarizing(2).apply(&rho).unwrap();
        assert_close(&out, &ComplexMatrix::identity(2).scale_real(0.5), 1e-15);

        let rho = DensityMatrix::new(ComplexMatrix::from_real_rows(&[&[0.5, 0.3], &[0.3, 0.5]])).unwrap();
        let out = projector_dephase(2).unwrap().apply(&rho).unwrap();
        assert_close(&out, &ComplexMatrix::diag_real(&[0.5, 0.5]), 1e-15);
    }

    #[test]
    fn apply_dim_mismatch() {
        let rho = DensityMatrix::maximally_mixed(3);
        assert!(matches!(Superoperator::identity(2).apply(&rho), Err(ChannelError::DimMismatch { .. })));
    }

    #[test]
    fn sandwich_matches_direct_product() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let a = DensityMatrix::random(3, &mut rng).matrix().clone();
        let x = DensityMatrix::random(3, &mut rng).matrix().clone();
        let y = DensityMatrix::random(3, &mut rng).matrix().clone();
        let s = Superoperator::sandwich(&a, &y);
        assert_close(&s.apply_operator(&x).unwrap(), &(&(&a * &x) * &y), 1e-14);
    }

    #[test]
    fn choi_examples() {
        // Identity channel: 2|Ω⟩⟨Ω|, Ω maximally entangled.
        let ev = choi(&Superoperator::identity(2)).eigenvalues().unwrap();
        assert!((ev[0] - 2.0).abs() < 1e-14);
        assert!(ev[1..].iter().all(|l| l.abs() < 1e-14));

        // Depolarizing projector: built directly as Σ|i⟩⟨j| ⊗ δᵢⱼ I/2 = I₄/2.
        let ch = choi(&projector_depolarizing(2));
        let direct = matcore::kron(&ComplexMatrix::identity(2), &ComplexMatrix::identity(2).scale_real(0.5));
        assert_close(ch.matrix(), &direct, 1e-15);
        for l in ch.eigenvalues().unwrap() {
            assert!((l - 0.5).abs() < 1e-14);
        }

        // Transposition: Σ|i⟩⟨j| ⊗ |j⟩⟨i| = SWAP.
        let ch = choi(&Superoperator::transposition(2));
        let mut swap = ComplexMatrix::zeros(4, 4);
        for i in 0..2 {
            for j in 0..2 {
                swap[(i * 2 + j, j * 2 + i)] = c(1.0);
            }
        }
        assert_close(ch.matrix(), &swap, 0.0);
        let ev = ch.eigenvalues().unwrap();
        assert!((ev[0] - 1.0).abs() < 1e-14 && (ev[3] + 1.0).abs() < 1e-14);
    }

    #[test]
    fn dephasing_choi_spectrum() {
        // Σᵢ |i⟩⟨i| ⊗ |i⟩⟨i| = diag(1, 0, 0, 1).
        let ch = choi(&projector_dephase(2).unwrap());
        assert_close(ch.matrix(), &ComplexMatrix::diag_real(&[1.0, 0.0, 0.0, 1.0]), 0.0);
        let ev = ch.eigenvalues().unwrap();
        assert_eq!(ev, vec![1.0, 1.0, 0.0, 0.0]);
    }

    #[test]
    fn cp_reports() {
        let r = is_cp(&Superoperator::identity(2), PSD_TOL).unwrap();
        assert!(r.is_cp);
        assert!(r.min_eigenvalue.abs() < 1e-14);
        let r = is_cp(&Superoperator::transposition(2), PSD_TOL).unwrap();
        assert!(!r.is_cp);
        assert!((r.min_eigenvalue + 1.0).abs() < 1e-14);
    }

    #[test]
    fn cp_rejects_non_hermiticity_preserving() {
        let s = Superoperator::sandwich(&matcore::pauli(0).scale(C64::new(0.0, 1.0)), &matcore::pauli(0));
        assert!(matches!(is_cp(&s, PSD_TOL), Err(ChannelError::NotHermitian { .. })));
    }

    #[test]
    fn tp_checks() {
        assert!(is_tp(&projector_depolarizing(2), 1e-12));
        assert!(!is_tp(&Superoperator::identity(2).scale(0.5), 1e-12));
        let e = projector_depolarizing(2);
        for mu in [0.0, 0.3, 1.0] {
            let m = Superoperator::identity(2).lin_comb(mu, &e, 1.0 - mu).unwrap();
            assert!(is_tp(&m, 1e-12));
        }
    }

    #[test]
    fn projectors_are_cptp_idempotent() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let mut all = vec![
            projector_depolarizing(2),
            projector_depolarizing(3),
            projector_dephase(2).unwrap(),
            projector_dephase(4).unwrap(),
            projector_replacer(&DensityMatrix::basis(2, 0)),
        ];
        all.push(projector_replacer(&DensityMatrix::random(3, &mut rng)));
        for e in &all {
            assert!(is_projector(e, 1e-10));
            assert!(is_tp(e, 1e-10));
            assert!(is_cp(e, 1e-10).unwrap().is_cp);
        }
    }

    #[test]
    fn replacer_kills_traceless() {
        let e = projector_replacer(&DensityMatrix::basis(2, 0));
        let delta = matcore::pauli(3);
        assert!(e.apply_operator(&delta).unwrap().max_abs() < 1e-15);
    }

    #[test]
    fn dephase_rejects_small_dim() {
        assert_eq!(projector_dephase(1), Err(ChannelError::BadDim(1)));
    }

    #[test]
    fn semigroup_map_is_not_projector() {
        let e = projector_depolarizing(2);
        let mu = (-1.0f64).exp();
        let m = Superoperator::identity(2).lin_comb(mu, &e, 1.0 - mu).unwrap();
        assert!(!is_projector(&m, 1e-10));
    }

    #[test]
    fn choi_is_linear() {
        let a = projector_depolarizing(2);
        let b = Superoperator::transposition(2);
        let lhs = choi(&a.lin_comb(0.3, &b, -1.7).unwrap());
        let rhs = &choi(&a).matrix().scale_real(0.3) + &choi(&b).matrix().scale_real(-1.7);
        assert_close(lhs.matrix(), &rhs, 1e-14);
    }
}
