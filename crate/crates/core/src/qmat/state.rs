use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qmat::matrix::{ComplexMatrix, C64};

/// Tolerance for structural validation (Hermiticity, trace, positivity, norm).
pub const STRUCTURE_TOL: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Party {
    A,
    B,
}

/// Bipartite density matrix on `C^{d_a} ⊗ C^{d_b}`.
///
/// Composite index of `|jk>` is `j * d_b + k`.
#[derive(Clone, Debug)]
pub struct DensityMatrix {
    dim_a: usize,
    dim_b: usize,
    matrix: ComplexMatrix,
}

impl DensityMatrix {
    pub fn new(dim_a: usize, dim_b: usize, matrix: ComplexMatrix) -> Result<Self> {
        if dim_a < 1 || dim_b < 1 {
            return Err(Error::InvalidDimension(format!(
                "local dimensions {dim_a}x{dim_b}"
            )));
        }
        let n = dim_a * dim_b;
        if matrix.rows() != n || matrix.cols() != n {
            return Err(Error::DimensionMismatch(format!(
                "expected {n}x{n} matrix for {dim_a}x{dim_b}, got {}x{}",
                matrix.rows(),
                matrix.cols()
            )));
        }
        let herm = matrix.hermitian_deviation();
        if herm > STRUCTURE_TOL {
            return Err(Error::InvalidState(format!(
                "not Hermitian (max deviation {herm:.3e})"
            )));
        }
        let tr = matrix.trace();
        if (tr.re - 1.0).abs() > STRUCTURE_TOL || tr.im.abs() > STRUCTURE_TOL {
            return Err(Error::InvalidState(format!("trace is {tr}, expected 1")));
        }
        let min_eig = matrix.eigenvalues_hermitian()[0];
        if min_eig < -STRUCTURE_TOL {
            return Err(Error::InvalidState(format!(
                "not positive semidefinite (smallest eigenvalue {min_eig:.3e})"
            )));
        }
        Ok(Self {
            dim_a,
            dim_b,
            matrix,
        })
    }

    /// Rescales a PSD Hermitian matrix to unit trace before validating.
    pub fn from_unnormalized(dim_a: usize, dim_b: usize, matrix: ComplexMatrix) -> Result<Self> {
        let tr = matrix.trace().re;
        if !(tr > 0.0) {
            return Err(Error::InvalidState(format!(
                "trace {tr} cannot be normalized"
            )));
        }
        Self::new(dim_a, dim_b, matrix.scale(1.0 / tr))
    }

    pub fn maximally_mixed(dim_a: usize, dim_b: usize) -> Self {
        let n = dim_a * dim_b;
        Self {
            dim_a,
            dim_b,
            matrix: ComplexMatrix::identity(n).scale(1.0 / n as f64),
        }
    }

    pub fn dim_a(&self) -> usize {
        self.dim_a
    }

    pub fn dim_b(&self) -> usize {
        self.dim_b
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.dim_a, self.dim_b)
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn purity(&self) -> f64 {
        self.matrix.hs_inner(&self.matrix).re
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        self.matrix.eigenvalues_hermitian()
    }

    /// `<psi|rho|psi>`.
    pub fn expectation_pure(&self, psi: &PureState) -> Result<f64> {
        if psi.dims() != self.dims() {
            return Err(Error::DimensionMismatch(format!(
                "pure state {:?} against density matrix {:?}",
                psi.dims(),
                self.dims()
            )));
        }
        let v = psi.amplitudes();
        let rv = self.matrix.apply(v);
        Ok(v.iter().zip(&rv).map(|(a, b)| a.conj() * b).sum::<C64>().re)
    }

    /// `tr(rho O)` for an operator on the full space.
    pub fn expectation(&self, op: &ComplexMatrix) -> C64 {
        self.matrix.adjoint().hs_inner(op)
    }

    pub fn partial_trace(&self, keep: Party) -> ComplexMatrix {
        partial_trace(self, keep)
    }

    /// `(U_a ⊗ U_b) rho (U_a ⊗ U_b)^dagger`.
    pub fn conjugate_local(&self, u_a: &ComplexMatrix, u_b: &ComplexMatrix) -> Result<Self> {
        if u_a.rows() != self.dim_a || u_b.rows() != self.dim_b {
            return Err(Error::DimensionMismatch("local unitary size".into()));
        }
        let u = u_a.kron(u_b);
        let m = u.matmul(&self.matrix).matmul(&u.adjoint());
        // Conjugation keeps the spectrum; only rounding needs repair.
        Self::new(self.dim_a, self.dim_b, m.hermitian_part())
    }

    /// Convex combination `Σ w_i rho_i` of states with equal dimensions.
    pub fn mixture(parts: &[(f64, &DensityMatrix)]) -> Result<Self> {
        let (first_w, first) = parts
            .first()
            .ok_or_else(|| Error::InvalidParameter("empty mixture".into()))?;
        let mut acc = first.matrix.scale(*first_w);
        for (w, rho) in &parts[1..] {
            if rho.dims() != first.dims() {
                return Err(Error::DimensionMismatch(
                    "mixture components differ in dimension".into(),
                ));
            }
            if *w < 0.0 {
                return Err(Error::InvalidParameter(format!(
                    "negative mixture weight {w}"
                )));
            }
            acc = acc.add(&rho.matrix.scale(*w));
        }
        Self::new(first.dim_a, first.dim_b, acc)
    }

    /// `rho_a ⊗ rho_b` from local density matrices.
    pub fn product(rho_a: &ComplexMatrix, rho_b: &ComplexMatrix) -> Result<Self> {
        Self::new(rho_a.rows(), rho_b.rows(), rho_a.kron(rho_b))
    }
}

/// Reduced density matrix of the kept party.
pub fn partial_trace(rho: &DensityMatrix, keep: Party) -> ComplexMatrix {
    let (da, db) = rho.dims();
    let m = rho.matrix();
    match keep {
        Party::A => ComplexMatrix::from_fn(da, da, |i, j| {
            (0..db).map(|k| m[(i * db + k, j * db + k)]).sum()
        }),
        Party::B => ComplexMatrix::from_fn(db, db, |i, j| {
            (0..da).map(|k| m[(k * db + i, k * db + j)]).sum()
        }),
    }
}

/// Normalized bipartite pure state.
#[derive(Clone, Debug)]
pub struct PureState {
    dim_a: usize,
    dim_b: usize,
    amplitudes: Vec<C64>,
}

impl PureState {
    pub fn new(dim_a: usize, dim_b: usize, amplitudes: Vec<C64>) -> Result<Self> {
        if amplitudes.len() != dim_a * dim_b {
            return Err(Error::DimensionMismatch(format!(
                "{} amplitudes for {dim_a}x{dim_b}",
                amplitudes.len()
            )));
        }
        let norm2: f64 = amplitudes.iter().map(|z| z.norm_sqr()).sum();
        if (norm2 - 1.0).abs() > STRUCTURE_TOL {
            return Err(Error::InvalidState(format!(
                "squared norm is {norm2}, expected 1"
            )));
        }
        Ok(Self {
            dim_a,
            dim_b,
            amplitudes,
        })
    }

    pub fn normalized(dim_a: usize, dim_b: usize, amplitudes: Vec<C64>) -> Result<Self> {
        let norm: f64 = amplitudes.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if !(norm > 0.0) || !norm.is_finite() {
            return Err(Error::InvalidState("zero or non-finite vector".into()));
        }
        Self::new(
            dim_a,
            dim_b,
            amplitudes.into_iter().map(|z| z / norm).collect(),
        )
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.dim_a, self.dim_b)
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }

    /// The `d_a x d_b` coefficient matrix `c_kl`.
    pub fn coefficient_matrix(&self) -> DMatrix<C64> {
        DMatrix::from_row_slice(self.dim_a, self.dim_b, &self.amplitudes)
    }

    pub fn schmidt_coefficients(&self) -> Vec<f64> {
        let sv = self.coefficient_matrix().singular_values();
        let mut lambdas: Vec<f64> = sv.iter().map(|s| s * s).collect();
        lambdas.sort_by(|a, b| b.total_cmp(a));
        lambdas
    }

    /// Number of Schmidt coefficients above `tol`.
    pub fn schmidt_rank(&self, tol: f64) -> usize {
        self.schmidt_coefficients()
            .iter()
            .filter(|&&l| l > tol)
            .count()
    }

    pub fn to_density(&self) -> DensityMatrix {
        DensityMatrix {
            dim_a: self.dim_a,
            dim_b: self.dim_b,
            matrix: ComplexMatrix::outer(&self.amplitudes),
        }
    }

    /// `(U_a ⊗ U_b)|psi>`.
    pub fn apply_local(&self, u_a: &ComplexMatrix, u_b: &ComplexMatrix) -> Result<Self> {
        if u_a.rows() != self.dim_a || u_b.rows() != self.dim_b {
            return Err(Error::DimensionMismatch("local unitary size".into()));
        }
        Self::normalized(
            self.dim_a,
            self.dim_b,
            u_a.kron(u_b).apply(&self.amplitudes),
        )
    }
}

/// Schmidt coefficients of a pure state, descending and summing to one.
pub fn schmidt_coefficients(psi: &PureState) -> Vec<f64> {
    psi.schmidt_coefficients()
}
