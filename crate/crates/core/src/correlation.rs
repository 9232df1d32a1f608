//! Bloch coefficient matrices, covariance cross blocks and their norms.
//!
//! For local bases `b_k` (party a) and `c_l` (party b), each made of `1/√d`
//! followed by an orthonormal su(d) basis, the state expands as
//! `rho = Σ_kl X_kl b_k ⊗ c_l` with `X_kl = tr(rho b_k ⊗ c_l)`. Dropping row
//! and column 0 leaves the su submatrix whose singular values drive every
//! local-unitary-invariant criterion in this crate.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::qmat::{gell_mann_basis, partial_trace, DensityMatrix, Party, SuBasis, C64};

const IMAG_TOL: f64 = 1e-9;

#[derive(Clone, Debug)]
pub struct CorrelationData {
    pub dim_a: usize,
    pub dim_b: usize,
    /// Full `d_a² x d_b²` coefficient matrix.
    pub full: DMatrix<f64>,
    /// `(d_a²-1) x (d_b²-1)` su block.
    pub su: DMatrix<f64>,
    /// Coefficients of `rho_a` in the extended basis of party a (index 0 included).
    pub v_a: DVector<f64>,
    /// Coefficients of `rho_b` in the extended basis of party b.
    pub v_b: DVector<f64>,
    /// Singular values of `su`, descending.
    pub epsilon: Vec<f64>,
    /// Singular values of `full` (operator Schmidt coefficients), descending.
    pub xi: Vec<f64>,
}

fn check_bases(rho: &DensityMatrix, basis_a: &SuBasis, basis_b: &SuBasis) -> Result<()> {
    if basis_a.dim() != rho.dim_a() || basis_b.dim() != rho.dim_b() {
        return Err(Error::DimensionMismatch(format!(
            "bases su({})/su({}) for a {}x{} state",
            basis_a.dim(),
            basis_b.dim(),
            rho.dim_a(),
            rho.dim_b()
        )));
    }
    Ok(())
}

/// `X_kl = tr(rho b_k ⊗ c_l)` over the extended bases.
fn coefficient_matrix(
    rho: &DensityMatrix,
    basis_a: &SuBasis,
    basis_b: &SuBasis,
) -> Result<DMatrix<f64>> {
    let (da, db) = rho.dims();
    let m = rho.matrix();
    let (na, nb) = (da * da, db * db);
    let mut out = DMatrix::zeros(na, nb);
    let mut partial = vec![C64::new(0.0, 0.0); db * db];
    for k in 0..na {
        // partial[mm * db + nn] = Σ_ij b_k[j, i] rho[(i, mm), (j, nn)]
        partial.iter_mut().for_each(|z| *z = C64::new(0.0, 0.0));
        for &(j, i, z) in basis_a.sparse_extended(k) {
            for mm in 0..db {
                let row = m.row(i * db + mm);
                for nn in 0..db {
                    partial[mm * db + nn] += z * row[j * db + nn];
                }
            }
        }
        for l in 0..nb {
            let val: C64 = basis_b
                .sparse_extended(l)
                .iter()
                .map(|&(nn, mm, w)| w * partial[mm * db + nn])
                .sum();
            if val.im.abs() > IMAG_TOL {
                return Err(Error::Numerical(format!(
                    "imaginary Bloch coefficient {:.3e} at ({k}, {l})",
                    val.im
                )));
            }
            out[(k, l)] = val.re;
        }
    }
    Ok(out)
}

pub(crate) fn sorted_singular_values(m: &DMatrix<f64>) -> Vec<f64> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return Vec::new();
    }
    let mut sv: Vec<f64> = m.singular_values().iter().map(|s| s.max(0.0)).collect();
    sv.sort_by(|a, b| b.total_cmp(a));
    sv
}

pub fn correlation_data(
    rho: &DensityMatrix,
    basis_a: &SuBasis,
    basis_b: &SuBasis,
) -> Result<CorrelationData> {
    check_bases(rho, basis_a, basis_b)?;
    let (da, db) = rho.dims();
    let full = coefficient_matrix(rho, basis_a, basis_b)?;
    let su = full.view((1, 1), (da * da - 1, db * db - 1)).into_owned();
    let v_a = full.column(0) * (db as f64).sqrt();
    let v_b = full.row(0).transpose() * (da as f64).sqrt();
    let epsilon = sorted_singular_values(&su);
    let xi = sorted_singular_values(&full);
    Ok(CorrelationData {
        dim_a: da,
        dim_b: db,
        full,
        su,
        v_a,
        v_b,
        epsilon,
        xi,
    })
}

impl CorrelationData {
    /// Correlation data in the generalized Gell-Mann bases.
    pub fn canonical(rho: &DensityMatrix) -> Result<Self> {
        let (da, db) = rho.dims();
        correlation_data(rho, &gell_mann_basis(da)?, &gell_mann_basis(db)?)
    }

    /// `tr|X^su|`.
    pub fn su_trace_norm(&self) -> f64 {
        self.epsilon.iter().sum()
    }

    /// `‖X^su‖₂`.
    pub fn su_two_norm(&self) -> f64 {
        self.epsilon.iter().map(|e| e * e).sum::<f64>().sqrt()
    }

    pub fn is_square(&self) -> bool {
        self.dim_a == self.dim_b
    }
}

pub fn trace_norm(m: &DMatrix<f64>) -> f64 {
    sorted_singular_values(m).iter().sum()
}

pub fn two_norm(m: &DMatrix<f64>) -> f64 {
    sorted_singular_values(m)
        .iter()
        .map(|s| s * s)
        .sum::<f64>()
        .sqrt()
}

/// Operator Schmidt coefficients: singular values of the full coefficient matrix.
pub fn operator_schmidt_values(
    rho: &DensityMatrix,
    basis_a: &SuBasis,
    basis_b: &SuBasis,
) -> Result<Vec<f64>> {
    check_bases(rho, basis_a, basis_b)?;
    Ok(sorted_singular_values(&coefficient_matrix(
        rho, basis_a, basis_b,
    )?))
}

/// Cross covariances between the su components of the two parties.
#[derive(Clone, Debug)]
pub struct CovarianceBlock {
    pub dim_a: usize,
    pub dim_b: usize,
    /// `X^su - v_a v_bᵀ` restricted to su indices.
    pub cross: DMatrix<f64>,
    pub purity_a: f64,
    pub purity_b: f64,
}

impl CovarianceBlock {
    pub fn trace_norm(&self) -> f64 {
        trace_norm(&self.cross)
    }
}

pub fn covariance_block(
    rho: &DensityMatrix,
    basis_a: &SuBasis,
    basis_b: &SuBasis,
) -> Result<CovarianceBlock> {
    Ok(covariance_from(
        &correlation_data(rho, basis_a, basis_b)?,
        rho,
    ))
}

pub(crate) fn covariance_from(corr: &CorrelationData, rho: &DensityMatrix) -> CovarianceBlock {
    let (da, db) = (corr.dim_a, corr.dim_b);
    let va = corr.v_a.rows(1, da * da - 1);
    let vb = corr.v_b.rows(1, db * db - 1);
    let cross = &corr.su - va * vb.transpose();
    let ra = partial_trace(rho, Party::A);
    let rb = partial_trace(rho, Party::B);
    CovarianceBlock {
        dim_a: da,
        dim_b: db,
        cross,
        purity_a: ra.hs_inner(&ra).re,
        purity_b: rb.hs_inner(&rb).re,
    }
}

impl CovarianceBlock {
    pub fn canonical(rho: &DensityMatrix) -> Result<Self> {
        Ok(covariance_from(&CorrelationData::canonical(rho)?, rho))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qmat::{isotropic, max_entangled, rho_w, ComplexMatrix, PureState};

    /// Independent oracle: `tr(rho (b_k ⊗ c_l))` with dense Kronecker products.
    fn dense_coefficients(rho: &DensityMatrix) -> DMatrix<f64> {
        let (da, db) = rho.dims();
        let ba = gell_mann_basis(da).unwrap();
        let bb = gell_mann_basis(db).unwrap();
        DMatrix::from_fn(da * da, db * db, |k, l| {
            rho.expectation(&ba.extended(k).kron(&bb.extended(l))).re
        })
    }

    #[test]
    fn coefficients_match_dense_oracle() {
        for rho in [rho_w(), isotropic(3, 0.3).unwrap()] {
            let corr = CorrelationData::canonical(&rho).unwrap();
            let dense = dense_coefficients(&rho);
            assert!((&corr.full - dense).abs().max() < 1e-13);
        }
    }

    #[test]
    fn maximally_mixed_has_no_correlations() {
        let corr = CorrelationData::canonical(&DensityMatrix::maximally_mixed(3, 3)).unwrap();
        assert!(corr.epsilon.iter().all(|&e| e.abs() < 1e-14));
        assert!((corr.full[(0, 0)] - 1.0 / 3.0).abs() < 1e-14);
        assert!((corr.xi[0] - 1.0 / 3.0).abs() < 1e-14);
        assert!(corr.xi[1..].iter().all(|&x| x < 1e-14));
    }

    #[test]
    fn max_entangled_singular_values() {
        for d in 2..=5 {
            let rho = max_entangled(d, d).unwrap().to_density();
            let corr = CorrelationData::canonical(&rho).unwrap();
            assert_eq!(corr.epsilon.len(), d * d - 1);
            for e in &corr.epsilon {
                assert!((e - 1.0 / d as f64).abs() < 1e-12);
            }
            assert_eq!(corr.xi.len(), d * d);
            for x in &corr.xi {
                assert!((x - 1.0 / d as f64).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn pure_product_state() {
        let mut amps = vec![C64::new(0.0, 0.0); 9];
        amps[0] = C64::new(1.0, 0.0);
        let rho = PureState::new(3, 3, amps).unwrap().to_density();
        let corr = CorrelationData::canonical(&rho).unwrap();
        let sum_sq: f64 = corr.epsilon.iter().map(|e| e * e).sum();
        assert!((sum_sq - 4.0 / 9.0).abs() < 1e-12);
        assert!((corr.xi[0] - 1.0).abs() < 1e-12);
        assert!(corr.xi[1..].iter().all(|&x| x < 1e-12));
        let cov = CovarianceBlock::canonical(&rho).unwrap();
        assert!(cov.cross.abs().max() < 1e-12);
        assert!(cov.trace_norm() < 1e-10);
    }

    #[test]
    fn norms_of_simple_matrices() {
        let z = DMatrix::<f64>::zeros(3, 3);
        assert_eq!(trace_norm(&z), 0.0);
        assert_eq!(two_norm(&z), 0.0);
        let id = DMatrix::<f64>::identity(3, 3);
        assert!((trace_norm(&id) - 3.0).abs() < 1e-14);
        assert!((two_norm(&id) - 3f64.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn isotropic_norms() {
        let corr = CorrelationData::canonical(&isotropic(3, 0.5).unwrap()).unwrap();
        assert!((corr.su_trace_norm() - 4.0 / 3.0).abs() < 1e-12);
        assert!((corr.su_two_norm() - 8f64.sqrt() * 0.5 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn covariance_of_max_entangled_equals_su_block() {
        let rho = max_entangled(3, 3).unwrap().to_density();
        let cov = CovarianceBlock::canonical(&rho).unwrap();
        assert!((cov.trace_norm() - 8.0 / 3.0).abs() < 1e-12);
        assert!((cov.purity_a - 1.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn covariance_matches_direct_expectations() {
        let rho = rho_w();
        let cov = CovarianceBlock::canonical(&rho).unwrap();
        let g = gell_mann_basis(4).unwrap();
        let id = ComplexMatrix::identity(4);
        let direct = DMatrix::from_fn(15, 15, |k, l| {
            let ga = &g.generators()[k];
            let gb = &g.generators()[l];
            let joint = rho.expectation(&ga.kron(gb)).re;
            let ea = rho.expectation(&ga.kron(&id)).re;
            let eb = rho.expectation(&id.kron(gb)).re;
            joint - ea * eb
        });
        assert!((&cov.cross - direct).abs().max() < 1e-13);
    }

    #[test]
    fn basis_mismatch_is_an_error() {
        let rho = rho_w();
        let b3 = gell_mann_basis(3).unwrap();
        assert!(matches!(
            correlation_data(&rho, &b3, &b3),
            Err(Error::DimensionMismatch(_))
        ));
    }
}
