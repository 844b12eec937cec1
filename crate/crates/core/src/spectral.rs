//! Dense Hermitian eigendecomposition with deterministic ordering and phase
//! convention, plus the exact single-step propagator `exp(-i A dt)`.

use std::ops::{Add, Sub};

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::tolerances::{HERMITIAN_TOL, SOLVER_EPS, SOLVER_MAX_ITER};
use crate::{Error, Result, C64};

/// Dense complex Hermitian matrix of dimension at least 2.
#[derive(Debug, Clone, PartialEq)]
pub struct OperatorMatrix(DMatrix<C64>);

impl OperatorMatrix {
    /// Validates dimension and Hermiticity.
    pub fn new(m: DMatrix<C64>) -> Result<Self> {
        if !m.is_square() || m.nrows() < 2 {
            return Err(Error::DimensionTooSmall(m.nrows().min(m.ncols())));
        }
        if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::invalid("matrix", "non-finite entry"));
        }
        let deviation = hermiticity_deviation(&m);
        let tolerance = HERMITIAN_TOL * (1.0 + max_abs(&m));
        if deviation > tolerance {
            return Err(Error::NonHermitianInput { deviation, tolerance });
        }
        Ok(OperatorMatrix(m))
    }

    /// Wraps a matrix that is Hermitian up to rounding, projecting out the
    /// anti-Hermitian residue.
    pub(crate) fn hermitize(m: DMatrix<C64>) -> Self {
        let h = (&m + m.adjoint()) * C64::new(0.5, 0.0);
        OperatorMatrix(h)
    }

    pub fn zeros(dim: usize) -> Self {
        OperatorMatrix(DMatrix::zeros(dim, dim))
    }

    pub fn from_real_diagonal(diag: &[f64]) -> Self {
        let d = DVector::from_iterator(diag.len(), diag.iter().map(|&x| C64::new(x, 0.0)));
        OperatorMatrix(DMatrix::from_diagonal(&d))
    }

    /// Builds a matrix from real row-major entries (must be symmetric).
    pub fn from_real_rows(rows: &[&[f64]]) -> Result<Self> {
        let n = rows.len();
        let m = DMatrix::from_fn(n, n, |i, j| C64::new(rows[i][j], 0.0));
        OperatorMatrix::new(m)
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.0
    }

    pub fn into_matrix(self) -> DMatrix<C64> {
        self.0
    }

    /// Largest entry modulus.
    pub fn max_abs(&self) -> f64 {
        max_abs(&self.0)
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.0.norm()
    }

    pub fn scaled(&self, factor: f64) -> Self {
        OperatorMatrix(&self.0 * C64::new(factor, 0.0))
    }

    /// `max |A - B|` over entries.
    pub fn max_abs_diff(&self, other: &OperatorMatrix) -> f64 {
        max_abs(&(&self.0 - &other.0))
    }
}

impl Add for &OperatorMatrix {
    type Output = OperatorMatrix;

    fn add(self, rhs: &OperatorMatrix) -> OperatorMatrix {
        OperatorMatrix(&self.0 + &rhs.0)
    }
}

impl Sub for &OperatorMatrix {
    type Output = OperatorMatrix;

    fn sub(self, rhs: &OperatorMatrix) -> OperatorMatrix {
        OperatorMatrix(&self.0 - &rhs.0)
    }
}

/// Instantaneous eigensystem: ascending eigenvalues and orthonormal
/// eigenvectors stored as columns.
///
/// Each column produced by [`eigendecompose`] has its largest-modulus entry
/// real and non-negative (first such entry on ties).
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralDecomposition {
    eigenvalues: Vec<f64>,
    eigenvectors: DMatrix<C64>,
}

impl SpectralDecomposition {
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn eigenvectors(&self) -> &DMatrix<C64> {
        &self.eigenvectors
    }

    pub fn source_dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn vector(&self, n: usize) -> DVector<C64> {
        self.eigenvectors.column(n).into_owned()
    }

    pub fn ground_energy(&self) -> f64 {
        self.eigenvalues[0]
    }

    /// `max(eigenvalue) - min(eigenvalue)`.
    pub fn spectral_range(&self) -> f64 {
        self.eigenvalues[self.eigenvalues.len() - 1] - self.eigenvalues[0]
    }

    /// `V diag(eps) V^dagger`.
    pub fn reconstruct(&self) -> DMatrix<C64> {
        let d = DVector::from_iterator(
            self.eigenvalues.len(),
            self.eigenvalues.iter().map(|&e| C64::new(e, 0.0)),
        );
        &self.eigenvectors * DMatrix::from_diagonal(&d) * self.eigenvectors.adjoint()
    }

    /// Copy with column `n` multiplied by `exp(i phases[n])`.
    ///
    /// The result no longer follows the phase convention; it exists to check
    /// that downstream quantities do not depend on it.
    pub fn rephased(&self, phases: &[f64]) -> Self {
        assert_eq!(phases.len(), self.source_dim(), "one phase per eigenvector");
        let mut v = self.eigenvectors.clone();
        for (j, &phi) in phases.iter().enumerate() {
            let u = C64::from_polar(1.0, phi);
            v.column_mut(j).iter_mut().for_each(|z| *z *= u);
        }
        SpectralDecomposition { eigenvalues: self.eigenvalues.clone(), eigenvectors: v }
    }
}

/// Hermitian eigendecomposition, ascending order, gauge-fixed columns.
pub fn eigendecompose(a: &OperatorMatrix) -> Result<SpectralDecomposition> {
    let deviation = hermiticity_deviation(&a.0);
    let tolerance = HERMITIAN_TOL * (1.0 + a.max_abs());
    if deviation > tolerance || !deviation.is_finite() {
        return Err(Error::NonHermitianInput { deviation, tolerance });
    }

    let eig = SymmetricEigen::try_new(a.0.clone(), SOLVER_EPS, SOLVER_MAX_ITER)
        .ok_or(Error::SolverFailure)?;
    let n = a.dim();

    // Stable sort keeps the solver's index order among exact ties.
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));

    let eigenvalues: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    if eigenvalues.iter().any(|e| !e.is_finite()) {
        return Err(Error::SolverFailure);
    }
    let mut eigenvectors = DMatrix::<C64>::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        let mut col = eig.eigenvectors.column(src).into_owned();
        fix_gauge(&mut col);
        eigenvectors.set_column(dst, &col);
    }

    Ok(SpectralDecomposition { eigenvalues, eigenvectors })
}

/// `exp(-i A dt)` via the spectral decomposition of `A`.
pub fn unitary_step(a: &OperatorMatrix, dt: f64) -> Result<DMatrix<C64>> {
    if !dt.is_finite() {
        return Err(Error::invalid("dt", "must be finite"));
    }
    Ok(propagator_from(&eigendecompose(a)?, dt))
}

/// `exp(-i A dt)` from an existing decomposition of `A`.
pub fn propagator_from(dec: &SpectralDecomposition, dt: f64) -> DMatrix<C64> {
    let phases = DVector::from_iterator(
        dec.source_dim(),
        dec.eigenvalues.iter().map(|&e| C64::from_polar(1.0, -e * dt)),
    );
    let v = &dec.eigenvectors;
    v * DMatrix::from_diagonal(&phases) * v.adjoint()
}

fn fix_gauge(col: &mut DVector<C64>) {
    let mut best = 0;
    let mut best_abs = -1.0;
    for (k, z) in col.iter().enumerate() {
        let r = z.norm();
        if r > best_abs {
            best_abs = r;
            best = k;
        }
    }
    if best_abs <= 0.0 {
        return;
    }
    let phase = col[best] / best_abs;
    let rot = phase.conj();
    col.iter_mut().for_each(|z| *z *= rot);
    col[best] = C64::new(best_abs, 0.0);
}

pub(crate) fn max_abs(m: &DMatrix<C64>) -> f64 {
    m.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

pub(crate) fn hermiticity_deviation(m: &DMatrix<C64>) -> f64 {
    let n = m.nrows();
    let mut dev: f64 = 0.0;
    for i in 0..n {
        for j in i..n {
            let d = (m[(i, j)] - m[(j, i)].conj()).norm();
            if d.is_nan() {
                return f64::NAN;
            }
            dev = dev.max(d);
        }
    }
    dev
}
