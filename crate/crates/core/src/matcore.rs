//! Dense complex matrix kernel.
//!
//! Everything downstream works with small matrices (d ≤ 4, superoperators of
//! size d² × d²), so all routines here are plain O(n³) loops over a row-major
//! buffer. Operators are vectorized by stacking columns:
//! `vec(ρ)[i + j·d] = ρ[i, j]`, which gives `vec(AρB) = (Bᵀ ⊗ A) vec(ρ)`.

use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Neg, Sub};

use num_complex::Complex64 as C64;
use thiserror::Error;

/// Relative Hermiticity tolerance used by [`herm_eig`] and [`trace_norm`].
pub const HERMITIAN_TOL: f64 = 1e-10;

/// Relative pivot threshold below which [`inv`] reports a singular matrix.
pub const PIVOT_TOL: f64 = 1e-12;

const JACOBI_MAX_SWEEPS: usize = 100;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MatError {
    #[error("entry buffer of length {len} does not fit a {rows}x{cols} matrix")]
    Shape { rows: usize, cols: usize, len: usize },
    #[error("matrix contains a non-finite entry")]
    NonFinite,
    #[error("expected a square matrix, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },
    #[error("dimension mismatch: {0}")]
    DimMismatch(String),
    #[error("matrix is not Hermitian (asymmetry {asymmetry:.3e})")]
    NotHermitian { asymmetry: f64 },
    #[error("Jacobi eigensolver did not converge after {0} sweeps")]
    NoConvergence(usize),
    #[error("matrix is singular (pivot {pivot:.3e} at column {column})")]
    Singular { column: usize, pivot: f64 },
}

/// Dense complex matrix with row-major storage.
#[derive(Clone, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            write!(f, "  ")?;
            for j in 0..self.cols {
                let z = self[(i, j)];
                write!(f, "{:+.6}{:+.6}i ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

impl ComplexMatrix {
    /// Builds a matrix from a row-major buffer, rejecting bad shapes and
    /// non-finite entries.
    pub fn new(rows: usize, cols: usize, data: Vec<C64>) -> Result<Self, MatError> {
        if rows == 0 || cols == 0 || data.len() != rows * cols {
            return Err(MatError::Shape { rows, cols, len: data.len() });
        }
        if data.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(MatError::NonFinite);
        }
        Ok(Self { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![C64::new(0.0, 0.0); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_fn(n, n, |i, j| if i == j { C64::new(1.0, 0.0) } else { C64::new(0.0, 0.0) })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    /// Real-valued matrix from nested rows. Panics on ragged input.
    pub fn from_real_rows(rows: &[&[f64]]) -> Self {
        let n = rows.len();
        let m = rows[0].len();
        assert!(rows.iter().all(|r| r.len() == m), "ragged rows");
        Self::from_fn(n, m, |i, j| C64::new(rows[i][j], 0.0))
    }

    /// Complex matrix from nested rows. Panics on ragged input.
    pub fn from_rows(rows: &[&[C64]]) -> Self {
        let n = rows.len();
        let m = rows[0].len();
        assert!(rows.iter().all(|r| r.len() == m), "ragged rows");
        Self::from_fn(n, m, |i, j| rows[i][j])
    }

    pub fn diag_real(values: &[f64]) -> Self {
        let n = values.len();
        Self::from_fn(n, n, |i, j| if i == j { C64::new(values[i], 0.0) } else { C64::new(0.0, 0.0) })
    }

    /// Outer product |u⟩⟨v|.
    pub fn outer(u: &[C64], v: &[C64]) -> Self {
        Self::from_fn(u.len(), v.len(), |i, j| u[i] * v[j].conj())
    }

    /// Matrix unit |i⟩⟨j| of size n × n.
    pub fn unit(n: usize, i: usize, j: usize) -> Self {
        let mut m = Self::zeros(n, n);
        m[(i, j)] = C64::new(1.0, 0.0);
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn as_slice(&self) -> &[C64] {
        &self.data
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn conj(&self) -> Self {
        Self { rows: self.rows, cols: self.cols, data: self.data.iter().map(|z| z.conj()).collect() }
    }

    pub fn scale(&self, s: C64) -> Self {
        Self { rows: self.rows, cols: self.cols, data: self.data.iter().map(|z| z * s).collect() }
    }

    pub fn scale_real(&self, s: f64) -> Self {
        Self { rows: self.rows, cols: self.cols, data: self.data.iter().map(|z| z * s).collect() }
    }

    pub fn trace(&self) -> C64 {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Largest entry modulus.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// ‖M − M†‖_F.
    pub fn hermitian_defect(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let n = self.rows;
        let mut acc = 0.0;
        for i in 0..n {
            for j in 0..n {
                acc += (self[(i, j)] - self[(j, i)].conj()).norm_sqr();
            }
        }
        acc.sqrt()
    }

    /// Hermitian within `rel_tol · max(1, ‖M‖_F)`.
    pub fn is_hermitian(&self, rel_tol: f64) -> bool {
        self.is_square() && self.hermitian_defect() <= rel_tol * self.frobenius_norm().max(1.0)
    }

    /// (M + M†)/2.
    pub fn hermitian_part(&self) -> Self {
        Self::from_fn(self.rows, self.cols, |i, j| (self[(i, j)] + self[(j, i)].conj()) * 0.5)
    }

    /// Column-stacked vectorization.
    pub fn vec(&self) -> Vec<C64> {
        let mut out = Vec::with_capacity(self.rows * self.cols);
        for j in 0..self.cols {
            for i in 0..self.rows {
                out.push(self[(i, j)]);
            }
        }
        out
    }

    /// Inverse of [`ComplexMatrix::vec`] for a `rows × cols` target.
    pub fn unvec(v: &[C64], rows: usize, cols: usize) -> Result<Self, MatError> {
        if v.len() != rows * cols {
            return Err(MatError::Shape { rows, cols, len: v.len() });
        }
        Ok(Self::from_fn(rows, cols, |i, j| v[i + j * rows]))
    }

    pub fn matvec(&self, v: &[C64]) -> Result<Vec<C64>, MatError> {
        if v.len() != self.cols {
            return Err(MatError::DimMismatch(format!(
                "{}x{} matrix times vector of length {}",
                self.rows,
                self.cols,
                v.len()
            )));
        }
        Ok((0..self.rows)
            .map(|i| self.data[i * self.cols..(i + 1) * self.cols].iter().zip(v).map(|(a, b)| a * b).sum())
            .collect())
    }

    pub fn try_mul(&self, rhs: &Self) -> Result<Self, MatError> {
        if self.cols != rhs.rows {
            return Err(MatError::DimMismatch(format!("{}x{} times {}x{}", self.rows, self.cols, rhs.rows, rhs.cols)));
        }
        let mut out = Self::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.data[i * self.cols + k];
                if a == C64::new(0.0, 0.0) {
                    continue;
                }
                let row = &rhs.data[k * rhs.cols..(k + 1) * rhs.cols];
                let dst = &mut out.data[i * rhs.cols..(i + 1) * rhs.cols];
                for (d, b) in dst.iter_mut().zip(row) {
                    *d += a * b;
                }
            }
        }
        Ok(out)
    }

    fn zip_with(&self, rhs: &Self, op: &str, f: impl Fn(C64, C64) -> C64) -> Result<Self, MatError> {
        if self.rows != rhs.rows || self.cols != rhs.cols {
            return Err(MatError::DimMismatch(format!("{}x{} {op} {}x{}", self.rows, self.cols, rhs.rows, rhs.cols)));
        }
        Ok(Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| f(*a, *b)).collect(),
        })
    }

    pub fn try_add(&self, rhs: &Self) -> Result<Self, MatError> {
        self.zip_with(rhs, "+", |a, b| a + b)
    }

    pub fn try_sub(&self, rhs: &Self) -> Result<Self, MatError> {
        self.zip_with(rhs, "-", |a, b| a - b)
    }

    /// Commutator AB − BA.
    pub fn commutator(&self, rhs: &Self) -> Self {
        &(self * rhs) - &(rhs * self)
    }

    /// Anticommutator AB + BA.
    pub fn anticommutator(&self, rhs: &Self) -> Self {
        &(self * rhs) + &(rhs * self)
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = C64;

    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        assert!(i < self.rows && j < self.cols, "index ({i}, {j}) out of bounds");
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        assert!(i < self.rows && j < self.cols, "index ({i}, {j}) out of bounds");
        &mut self.data[i * self.cols + j]
    }
}

// Operator impls panic on shape mismatch; use the `try_*` methods for
// fallible arithmetic.
impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        self.try_mul(rhs).expect("matrix product shape mismatch")
    }
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        self.try_add(rhs).expect("matrix sum shape mismatch")
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        self.try_sub(rhs).expect("matrix difference shape mismatch")
    }
}

impl Neg for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn neg(self) -> ComplexMatrix {
        self.scale_real(-1.0)
    }
}

/// Eigendecomposition of a Hermitian matrix.
#[derive(Debug, Clone)]
pub struct HermEigResult {
    /// Eigenvalues in descending order.
    pub eigenvalues: Vec<f64>,
    /// Orthonormal eigenvectors stored as columns, ordered like `eigenvalues`.
    pub eigenvectors: ComplexMatrix,
}

impl HermEigResult {
    pub fn min(&self) -> f64 {
        *self.eigenvalues.last().expect("non-empty spectrum")
    }

    pub fn max(&self) -> f64 {
        self.eigenvalues[0]
    }

    /// U diag(λ) U†.
    pub fn reconstruct(&self) -> ComplexMatrix {
        let u = &self.eigenvectors;
        let n = u.rows();
        ComplexMatrix::from_fn(n, n, |i, j| (0..n).map(|k| u[(i, k)] * self.eigenvalues[k] * u[(j, k)].conj()).sum())
    }
}

fn check_hermitian(m: &ComplexMatrix) -> Result<(), MatError> {
    if !m.is_square() {
        return Err(MatError::NotSquare { rows: m.rows, cols: m.cols });
    }
    let asymmetry = m.hermitian_defect();
    if asymmetry > HERMITIAN_TOL * m.frobenius_norm().max(1.0) {
        return Err(MatError::NotHermitian { asymmetry });
    }
    Ok(())
}

/// Hermitian eigendecomposition by cyclic complex Jacobi rotations.
///
/// The input is symmetrized to (M + M†)/2 once it passes the Hermiticity
/// check, so finite-difference noise below the tolerance is tolerated.
pub fn herm_eig(m: &ComplexMatrix) -> Result<HermEigResult, MatError> {
    check_hermitian(m)?;
    let n = m.rows;
    let mut a = m.hermitian_part();
    for i in 0..n {
        a[(i, i)] = C64::new(a[(i, i)].re, 0.0);
    }
    let mut v = ComplexMatrix::identity(n);
    let scale = a.frobenius_norm();
    if scale == 0.0 {
        return Ok(HermEigResult { eigenvalues: vec![0.0; n], eigenvectors: v });
    }

    let off = |a: &ComplexMatrix| -> f64 {
        let mut s = 0.0;
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    s += a[(i, j)].norm_sqr();
                }
            }
        }
        s.sqrt()
    };

    let mut converged = off(&a) <= f64::EPSILON * scale;
    let mut sweeps = 0;
    while !converged {
        if sweeps == JACOBI_MAX_SWEEPS {
            return Err(MatError::NoConvergence(sweeps));
        }
        sweeps += 1;
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[(p, q)];
                let r = apq.norm();
                if r <= f64::MIN_POSITIVE {
                    continue;
                }
                // Phase-rotate column q so the (p, q) entry becomes real, then
                // apply the real symmetric Jacobi rotation.
                let phase = apq / r;
                let app = a[(p, p)].re;
                let aqq = a[(q, q)].re;
                let tau = (aqq - app) / (2.0 * r);
                let t = tau.signum() / (tau.abs() + (1.0 + tau * tau).sqrt());
                let t = if tau == 0.0 { 1.0 } else { t };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                // U = diag(1, phase*) · [[c, s], [-s, c]]
                let u_pp = C64::new(c, 0.0);
                let u_pq = C64::new(s, 0.0);
                let u_qp = -phase.conj() * s;
                let u_qq = phase.conj() * c;

                for k in 0..n {
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    a[(k, p)] = akp * u_pp + akq * u_qp;
                    a[(k, q)] = akp * u_pq + akq * u_qq;
                }
                for k in 0..n {
                    let apk = a[(p, k)];
                    let aqk = a[(q, k)];
                    a[(p, k)] = u_pp.conj() * apk + u_qp.conj() * aqk;
                    a[(q, k)] = u_pq.conj() * apk + u_qq.conj() * aqk;
                }
                a[(p, q)] = C64::new(0.0, 0.0);
                a[(q, p)] = C64::new(0.0, 0.0);
                a[(p, p)] = C64::new(a[(p, p)].re, 0.0);
                a[(q, q)] = C64::new(a[(q, q)].re, 0.0);

                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = vkp * u_pp + vkq * u_qp;
                    v[(k, q)] = vkp * u_pq + vkq * u_qq;
                }
            }
        }
        converged = off(&a) <= f64::EPSILON * scale;
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(j, j)].re.total_cmp(&a[(i, i)].re));
    let eigenvalues = order.iter().map(|&i| a[(i, i)].re).collect();
    let eigenvectors = ComplexMatrix::from_fn(n, n, |i, k| v[(i, order[k])]);
    Ok(HermEigResult { eigenvalues, eigenvectors })
}

/// Trace norm Σ|λᵢ| of a Hermitian matrix.
pub fn trace_norm(m: &ComplexMatrix) -> Result<f64, MatError> {
    Ok(herm_eig(m)?.eigenvalues.iter().map(|l| l.abs()).sum())
}

/// Smallest singular value, from the spectrum of M†M.
pub fn min_singular_value(m: &ComplexMatrix) -> Result<f64, MatError> {
    let gram = &m.adjoint() * m;
    Ok(herm_eig(&gram)?.min().max(0.0).sqrt())
}

/// Kronecker product A ⊗ B.
pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    let (br, bc) = (b.rows, b.cols);
    ComplexMatrix::from_fn(a.rows * br, a.cols * bc, |i, j| a[(i / br, j / bc)] * b[(i % br, j % bc)])
}

/// Gauss–Jordan inverse with partial pivoting.
pub fn inv(m: &ComplexMatrix) -> Result<ComplexMatrix, MatError> {
    if !m.is_square() {
        return Err(MatError::NotSquare { rows: m.rows, cols: m.cols });
    }
    let n = m.rows;
    let threshold = PIVOT_TOL * m.frobenius_norm();
    let mut a = m.clone();
    let mut x = ComplexMatrix::identity(n);
    for col in 0..n {
        let (piv_row, piv_abs) = (col..n)
            .map(|r| (r, a[(r, col)].norm()))
            .max_by(|l, r| l.1.total_cmp(&r.1))
            .expect("non-empty pivot range");
        if piv_abs <= threshold || piv_abs == 0.0 {
            return Err(MatError::Singular { column: col, pivot: piv_abs });
        }
        if piv_row != col {
            for k in 0..n {
                a.data.swap(piv_row * n + k, col * n + k);
                x.data.swap(piv_row * n + k, col * n + k);
            }
        }
        let inv_piv = a[(col, col)].inv();
        for k in 0..n {
            a[(col, k)] *= inv_piv;
            x[(col, k)] *= inv_piv;
        }
        for r in 0..n {
            if r == col {
                continue;
            }
            let factor = a[(r, col)];
            if factor == C64::new(0.0, 0.0) {
                continue;
            }
            for k in 0..n {
                let ack = a[(col, k)];
                let xck = x[(col, k)];
                a[(r, k)] -= factor * ack;
                x[(r, k)] -= factor * xck;
            }
        }
    }
    Ok(x)
}

/// Pauli matrix σ_k for k ∈ {0, 1, 2, 3}, with σ₀ = I₂.
pub fn pauli(k: usize) -> ComplexMatrix {
    let z = C64::new(0.0, 0.0);
    let one = C64::new(1.0, 0.0);
    let i = C64::new(0.0, 1.0);
    match k {
        0 => ComplexMatrix::identity(2),
        1 => ComplexMatrix::from_rows(&[&[z, one], &[one, z]]),
        2 => ComplexMatrix::from_rows(&[&[z, -i], &[i, z]]),
        3 => ComplexMatrix::from_rows(&[&[one, z], &[z, -one]]),
        _ => panic!("pauli index {k} out of range"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn lcg_matrix(seed: &mut u64, n: usize) -> ComplexMatrix {
        let mut next = || {
            *seed = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((*seed >> 11) as f64 / (1u64 << 53) as f64) * 2.0 - 1.0
        };
        ComplexMatrix::from_fn(n, n, |_, _| c(next(), next()))
    }

    #[test]
    fn new_rejects_bad_input() {
        assert!(matches!(ComplexMatrix::new(2, 2, vec![c(0.0, 0.0); 3]), Err(MatError::Shape { .. })));
        assert_eq!(ComplexMatrix::new(1, 1, vec![c(f64::NAN, 0.0)]), Err(MatError::NonFinite));
    }

    #[test]
    fn eig_of_paulis() {
        let e = herm_eig(&pauli(3)).unwrap();
        assert_eq!(e.eigenvalues, vec![1.0, -1.0]);
        let e = herm_eig(&ComplexMatrix::identity(2)).unwrap();
        assert_eq!(e.eigenvalues, vec![1.0, 1.0]);
        let e = herm_eig(&pauli(1)).unwrap();
        assert!((e.eigenvalues[0] - 1.0).abs() < 1e-14);
        assert!((e.eigenvalues[1] + 1.0).abs() < 1e-14);
        let e = herm_eig(&pauli(2)).unwrap();
        assert!((e.eigenvalues[0] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn eig_rejects_non_hermitian() {
        let m = ComplexMatrix::from_real_rows(&[&[0.0, 1.0], &[0.0, 0.0]]);
        assert!(matches!(herm_eig(&m), Err(MatError::NotHermitian { .. })));
        let r = ComplexMatrix::zeros(2, 3);
        assert!(matches!(herm_eig(&r), Err(MatError::NotSquare { .. })));
    }

    #[test]
    fn eig_random_hermitian_reconstructs() {
        let mut seed = 7;
        for n in [2, 3, 4, 9, 16] {
            let a = lcg_matrix(&mut seed, n);
            let m = a.hermitian_part();
            let e = herm_eig(&m).unwrap();
            let resid = (&e.reconstruct() - &m).frobenius_norm();
            assert!(resid <= 1e-10 * m.frobenius_norm().max(1.0), "n={n} resid={resid}");
            let u = &e.eigenvectors;
            let gram = &u.adjoint() * u;
            assert!((&gram - &ComplexMatrix::identity(n)).frobenius_norm() < 1e-10);
            assert!(e.eigenvalues.windows(2).all(|w| w[0] >= w[1]));
            let sum: f64 = e.eigenvalues.iter().sum();
            assert!((sum - m.trace().re).abs() <= 1e-10 * m.frobenius_norm().max(1.0));
        }
    }

    #[test]
    fn eig_handles_degenerate_spectrum() {
        // Rank-one projector onto (1, i, 0, 1)/√3 padded with a repeated eigenvalue.
        let s = 1.0 / 3f64.sqrt();
        let u = [c(s, 0.0), c(0.0, s), c(0.0, 0.0), c(s, 0.0)];
        let m = ComplexMatrix::outer(&u, &u);
        let e = herm_eig(&m).unwrap();
        assert!((e.eigenvalues[0] - 1.0).abs() < 1e-14);
        assert!(e.eigenvalues[1..].iter().all(|l| l.abs() < 1e-14));
    }

    #[test]
    fn trace_norm_examples() {
        assert!((trace_norm(&ComplexMatrix::diag_real(&[0.5, -0.5])).unwrap() - 1.0).abs() < 1e-15);
        assert!((trace_norm(&pauli(1)).unwrap() - 2.0).abs() < 1e-14);
        assert_eq!(trace_norm(&ComplexMatrix::zeros(3, 3)).unwrap(), 0.0);
    }

    #[test]
    fn trace_norm_dominates_trace() {
        let mut seed = 11;
        for _ in 0..20 {
            let m = lcg_matrix(&mut seed, 3).hermitian_part();
            assert!(trace_norm(&m).unwrap() + 1e-12 >= m.trace().re.abs());
        }
    }

    #[test]
    fn kron_identity_sigma_x() {
        let k = kron(&ComplexMatrix::identity(2), &pauli(1));
        let expected = ComplexMatrix::from_real_rows(&[
            &[0.0, 1.0, 0.0, 0.0],
            &[1.0, 0.0, 0.0, 0.0],
            &[0.0, 0.0, 0.0, 1.0],
            &[0.0, 0.0, 1.0, 0.0],
        ]);
        assert_eq!(k, expected);
    }

    #[test]
    fn kron_mixed_product_and_vec_identity() {
        let mut seed = 3;
        let a = lcg_matrix(&mut seed, 2);
        let b = lcg_matrix(&mut seed, 2);
        let cm = lcg_matrix(&mut seed, 2);
        let d = lcg_matrix(&mut seed, 2);
        let lhs = &kron(&a, &b) * &kron(&cm, &d);
        let rhs = kron(&(&a * &cm), &(&b * &d));
        assert!((&lhs - &rhs).frobenius_norm() < 1e-13);

        // vec(AρB) = (Bᵀ ⊗ A) vec(ρ), with vec(AρB) formed by direct products.
        let rho = lcg_matrix(&mut seed, 2);
        let direct = (&(&a * &rho) * &b).vec();
        let via = kron(&b.transpose(), &a).matvec(&rho.vec()).unwrap();
        for (x, y) in direct.iter().zip(&via) {
            assert!((x - y).norm() < 1e-13);
        }
    }

    #[test]
    fn kron_is_associative() {
        let mut seed = 5;
        let a = lcg_matrix(&mut seed, 2);
        let b = lcg_matrix(&mut seed, 3);
        let cm = lcg_matrix(&mut seed, 2);
        let l = kron(&kron(&a, &b), &cm);
        let r = kron(&a, &kron(&b, &cm));
        assert!((&l - &r).max_abs() < 1e-14);
    }

    #[test]
    fn vec_unvec_roundtrip() {
        let m = ComplexMatrix::from_real_rows(&[&[1.0, 2.0], &[3.0, 4.0]]);
        let v = m.vec();
        assert_eq!(v.iter().map(|z| z.re).collect::<Vec<_>>(), vec![1.0, 3.0, 2.0, 4.0]);
        assert_eq!(ComplexMatrix::unvec(&v, 2, 2).unwrap(), m);
    }

    #[test]
    fn inverse_examples() {
        let m = ComplexMatrix::diag_real(&[2.0, 4.0]);
        assert_eq!(inv(&m).unwrap(), ComplexMatrix::diag_real(&[0.5, 0.25]));

        let mut seed = 17;
        for n in [2, 4, 9] {
            let m = &lcg_matrix(&mut seed, n) + &ComplexMatrix::identity(n).scale_real(3.0);
            let mi = inv(&m).unwrap();
            assert!((&(&m * &mi) - &ComplexMatrix::identity(n)).frobenius_norm() < 1e-12);
            assert!((&inv(&mi).unwrap() - &m).frobenius_norm() < 1e-8);
        }
    }

    #[test]
    fn inverse_rejects_singular() {
        let m = ComplexMatrix::from_real_rows(&[&[1.0, 2.0], &[2.0, 4.0]]);
        assert!(matches!(inv(&m), Err(MatError::Singular { .. })));
        assert!(matches!(inv(&ComplexMatrix::zeros(2, 2)), Err(MatError::Singular { .. })));
    }

    #[test]
    fn min_singular_value_of_diag() {
        let m = ComplexMatrix::diag_real(&[3.0, -0.5]);
        assert!((min_singular_value(&m).unwrap() - 0.5).abs() < 1e-14);
    }
}
