//! Schmidt-number criteria evaluated on a known state.
//!
//! Each criterion is a family of inequalities indexed by `r`, all of which
//! hold for states of Schmidt number at most `r`. A violation of the `r`-th
//! inequality by more than the tolerance certifies a Schmidt number of at
//! least `r + 1`. Only `r < min(d_a, d_b)` is ever tested, so no certificate
//! can exceed the smaller local dimension.

use serde::{Deserialize, Serialize};

use crate::correlation::{covariance_from, CorrelationData, CovarianceBlock};
use crate::error::{Error, Result};
use crate::qmat::{
    max_entangled_in, partial_trace, ComplexMatrix, DensityMatrix, Party, PureState,
};

/// Minimum violation for a certificate. Touching the bound certifies nothing.
pub const VIOLATION_TOL: f64 = 1e-9;
/// Eigenvalue floor for the reduction map.
pub const REDUCTION_TOL: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CriterionId {
    TraceNorm,
    Ccnr,
    TwoNorm,
    Fidelity,
    ReductionMap,
    Covariance,
    MomentBoundary,
}

/// One evaluated inequality `lhs <= rhs` for Schmidt number `r`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RankTest {
    pub r: usize,
    pub lhs: f64,
    pub rhs: f64,
    pub violated: bool,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SchmidtCertificate {
    pub criterion_id: CriterionId,
    pub certified_lower_bound: usize,
    /// `lhs - rhs` of the inequality for `r = bound - 1`; for bound 1 the
    /// (non-positive up to tolerance) slack of the `r = 1` inequality.
    pub margin: f64,
    pub tests: Vec<RankTest>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl SchmidtCertificate {
    pub fn from_tests(criterion_id: CriterionId, tests: Vec<RankTest>) -> Self {
        let best = tests.iter().filter(|t| t.violated).max_by_key(|t| t.r);
        let (bound, margin) = match best {
            Some(t) => (t.r + 1, t.lhs - t.rhs),
            None => (1, tests.first().map_or(0.0, |t| t.lhs - t.rhs)),
        };
        Self {
            criterion_id,
            certified_lower_bound: bound,
            margin,
            tests,
            note: None,
        }
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = Some(note.into());
        self
    }
}

fn strict_tests(dmin: usize, mut sides: impl FnMut(usize) -> (f64, f64)) -> Vec<RankTest> {
    (1..dmin)
        .map(|r| {
            let (lhs, rhs) = sides(r);
            RankTest {
                r,
                lhs,
                rhs,
                violated: lhs > rhs + VIOLATION_TOL,
            }
        })
        .collect()
}

/// `tr|X^su| - (r-1) <= √((1-1/d_a)(1-1/d_b))`.
pub fn sn_trace_norm(corr: &CorrelationData) -> SchmidtCertificate {
    let (da, db) = (corr.dim_a as f64, corr.dim_b as f64);
    let rhs = ((1.0 - 1.0 / da) * (1.0 - 1.0 / db)).sqrt();
    let norm = corr.su_trace_norm();
    let tests = strict_tests(corr.dim_a.min(corr.dim_b), |r| {
        (norm - (r as f64 - 1.0), rhs)
    });
    SchmidtCertificate::from_tests(CriterionId::TraceNorm, tests)
}

/// `Σ_k ξ_k <= r` on the operator Schmidt coefficients.
pub fn sn_ccnr(xi: &[f64], dim_a: usize, dim_b: usize) -> SchmidtCertificate {
    let sum: f64 = xi.iter().sum();
    let tests = strict_tests(dim_a.min(dim_b), |r| (sum, r as f64));
    SchmidtCertificate::from_tests(CriterionId::Ccnr, tests)
}

/// `‖X^su‖₂² <= 1 + (r - 2d)/(d² r)`; equal dimensions only.
pub fn sn_two_norm(corr: &CorrelationData) -> Result<SchmidtCertificate> {
    if !corr.is_square() {
        return Err(Error::Unsupported(format!(
            "two-norm criterion needs equal local dimensions, got {}x{}",
            corr.dim_a, corr.dim_b
        )));
    }
    let d = corr.dim_a as f64;
    let sq = corr.su_two_norm().powi(2);
    let tests = strict_tests(corr.dim_a, |r| {
        let r = r as f64;
        (sq, 1.0 + (r - 2.0 * d) / (d * d * r))
    });
    Ok(SchmidtCertificate::from_tests(CriterionId::TwoNorm, tests))
}

/// `<Ψ|rho|Ψ> <= Σ_{k<=r} λ_k` for the Schmidt coefficients `λ` of the target.
pub fn sn_fidelity(rho: &DensityMatrix, target: &PureState) -> Result<SchmidtCertificate> {
    let fid = rho.expectation_pure(target)?;
    let lambdas = target.schmidt_coefficients();
    let dmin = rho.dim_a().min(rho.dim_b());
    let tests = strict_tests(dmin, |r| (fid, lambdas.iter().take(r).sum::<f64>()));
    Ok(SchmidtCertificate::from_tests(CriterionId::Fidelity, tests))
}

/// Eigenvalues (ascending) of `rho_a ⊗ 1 - rho / r`.
pub fn reduction_map_spectrum(rho: &DensityMatrix, r: usize) -> Result<Vec<f64>> {
    if r < 1 {
        return Err(Error::InvalidParameter("reduction map needs r >= 1".into()));
    }
    let ra = partial_trace(rho, Party::A);
    let op = ra
        .kron(&ComplexMatrix::identity(rho.dim_b()))
        .sub(&rho.matrix().scale(1.0 / r as f64));
    Ok(op.eigenvalues_hermitian())
}

/// Positivity of `rho_a ⊗ 1 - rho/r`; a negative eigenvalue certifies Schmidt number `> r`.
///
/// The returned test stores `lhs = -λ_min` and `rhs = 0`.
pub fn reduction_map_test(rho: &DensityMatrix, r: usize) -> Result<RankTest> {
    let min = reduction_map_spectrum(rho, r)?[0];
    Ok(RankTest {
        r,
        lhs: -min,
        rhs: 0.0,
        violated: min < -REDUCTION_TOL,
    })
}

pub fn sn_reduction_map(rho: &DensityMatrix) -> Result<SchmidtCertificate> {
    let dmin = rho.dim_a().min(rho.dim_b());
    let tests = (1..dmin)
        .map(|r| reduction_map_test(rho, r))
        .collect::<Result<Vec<_>>>()?;
    Ok(SchmidtCertificate::from_tests(
        CriterionId::ReductionMap,
        tests,
    ))
}

/// `tr|X_cov| - (r-1) <= √((1 - tr rho_a²)(1 - tr rho_b²))`.
pub fn sn_covariance(block: &CovarianceBlock) -> SchmidtCertificate {
    let rhs = ((1.0 - block.purity_a).max(0.0) * (1.0 - block.purity_b).max(0.0)).sqrt();
    let norm = block.trace_norm();
    let tests = strict_tests(block.dim_a.min(block.dim_b), |r| {
        (norm - (r as f64 - 1.0), rhs)
    });
    SchmidtCertificate::from_tests(CriterionId::Covariance, tests)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CertificateReport {
    pub dim_a: usize,
    pub dim_b: usize,
    pub certificates: Vec<SchmidtCertificate>,
    pub max_bound: usize,
    /// Best bound among the fidelity witnesses that were tried.
    pub max_fidelity_bound: usize,
}

impl CertificateReport {
    pub fn get(&self, id: CriterionId) -> Option<&SchmidtCertificate> {
        self.certificates.iter().find(|c| c.criterion_id == id)
    }
}

/// Fidelity targets: `|Ψ₊ʳ>` for `r = 2..=min(d_a, d_b)` and the dominant
/// eigenvector of the state.
pub fn fidelity_targets(rho: &DensityMatrix) -> Result<Vec<(String, PureState)>> {
    let (da, db) = rho.dims();
    let mut targets = Vec::new();
    for r in 2..=da.min(db) {
        targets.push((format!("max_entangled_r{r}"), max_entangled_in(r, da, db)?));
    }
    let (_, vectors) = rho.matrix().eigh();
    if let Some(top) = vectors.last() {
        targets.push((
            "dominant_eigenvector".to_string(),
            PureState::normalized(da, db, top.clone())?,
        ));
    }
    Ok(targets)
}

/// Runs every criterion applicable to the state's dimensions.
pub fn compare_all(rho: &DensityMatrix) -> Result<CertificateReport> {
    let corr = CorrelationData::canonical(rho)?;
    let mut certificates = vec![
        sn_trace_norm(&corr),
        sn_ccnr(&corr.xi, corr.dim_a, corr.dim_b),
    ];
    if corr.is_square() {
        certificates.push(sn_two_norm(&corr)?);
    }
    let mut max_fidelity_bound = 1;
    for (label, target) in fidelity_targets(rho)? {
        let cert = sn_fidelity(rho, &target)?.with_note(label);
        max_fidelity_bound = max_fidelity_bound.max(cert.certified_lower_bound);
        certificates.push(cert);
    }
    certificates.push(sn_reduction_map(rho)?);
    certificates.push(sn_covariance(&covariance_from(&corr, rho)));
    let max_bound = certificates
        .iter()
        .map(|c| c.certified_lower_bound)
        .max()
        .unwrap_or(1);
    Ok(CertificateReport {
        dim_a: rho.dim_a(),
        dim_b: rho.dim_b(),
        certificates,
        max_bound,
        max_fidelity_bound,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qmat::{isotropic, max_entangled, rho_w, C64};

    fn product_state() -> DensityMatrix {
        let mut amps = vec![C64::new(0.0, 0.0); 9];
        amps[0] = C64::new(1.0, 0.0);
        PureState::new(3, 3, amps).unwrap().to_density()
    }

    fn corr(rho: &DensityMatrix) -> CorrelationData {
        CorrelationData::canonical(rho).unwrap()
    }

    #[test]
    fn trace_norm_on_isotropic() {
        assert_eq!(
            sn_trace_norm(&corr(&isotropic(3, 0.0).unwrap())).certified_lower_bound,
            3
        );
        assert_eq!(
            sn_trace_norm(&corr(&isotropic(3, 0.5).unwrap())).certified_lower_bound,
            2
        );
        let mixed = sn_trace_norm(&corr(&DensityMatrix::maximally_mixed(3, 3)));
        assert_eq!(mixed.certified_lower_bound, 1);
        assert!(mixed.margin < 0.0);
    }

    #[test]
    fn trace_norm_margin_is_reported() {
        // tr|X^su| = 8/3, r = 2 side is 8/3 - 1 vs 2/3.
        let c = sn_trace_norm(&corr(&isotropic(3, 0.0).unwrap()));
        assert!((c.margin - 1.0).abs() < 1e-12);
    }

    #[test]
    fn ccnr_cases() {
        assert_eq!(sn_ccnr(&corr(&rho_w()).xi, 4, 4).certified_lower_bound, 3);
        assert_eq!(
            sn_ccnr(&corr(&product_state()).xi, 3, 3).certified_lower_bound,
            1
        );
        for d in 2..=5 {
            let c = corr(&max_entangled(d, d).unwrap().to_density());
            assert_eq!(sn_ccnr(&c.xi, d, d).certified_lower_bound, d);
        }
        // Sums within the slack of an integer certify nothing beyond it.
        assert_eq!(sn_ccnr(&[1.0 + 5e-10, 1.0], 3, 3).certified_lower_bound, 2);
        assert_eq!(sn_ccnr(&[2.0 + 5e-10], 3, 3).certified_lower_bound, 2);
    }

    #[test]
    fn two_norm_cases() {
        let c = sn_two_norm(&corr(&max_entangled(3, 3).unwrap().to_density())).unwrap();
        assert_eq!(c.certified_lower_bound, 3);
        let lhs = c.tests[1].lhs;
        assert!((lhs - 8.0 / 9.0).abs() < 1e-12);
        assert!((c.tests[1].rhs - 7.0 / 9.0).abs() < 1e-12);
        let mixed = sn_two_norm(&corr(&DensityMatrix::maximally_mixed(3, 3))).unwrap();
        assert_eq!(mixed.certified_lower_bound, 1);

        let iso = isotropic(3, 0.2).unwrap();
        let tn = sn_trace_norm(&corr(&iso)).certified_lower_bound;
        let two = sn_two_norm(&corr(&iso)).unwrap().certified_lower_bound;
        assert!(tn >= two);

        let unequal = corr(&DensityMatrix::maximally_mixed(2, 3));
        assert!(matches!(sn_two_norm(&unequal), Err(Error::Unsupported(_))));
    }

    #[test]
    fn fidelity_cases() {
        let psi = max_entangled(3, 3).unwrap();
        let c = sn_fidelity(&psi.to_density(), &psi).unwrap();
        assert_eq!(c.certified_lower_bound, 3);
        let c = sn_fidelity(&DensityMatrix::maximally_mixed(3, 3), &psi).unwrap();
        assert_eq!(c.certified_lower_bound, 1);
        assert!((c.tests[0].lhs - 1.0 / 9.0).abs() < 1e-12);

        let w = rho_w();
        for (_, target) in fidelity_targets(&w).unwrap() {
            assert!(sn_fidelity(&w, &target).unwrap().certified_lower_bound <= 2);
        }
    }

    #[test]
    fn reduction_map_cases() {
        let iso = isotropic(3, 0.0).unwrap();
        let spec = reduction_map_spectrum(&iso, 2).unwrap();
        // Oracle: 1/3 - 1/2 on |Ψ₊>, 1/3 elsewhere.
        assert!((spec[0] + 1.0 / 6.0).abs() < 1e-12);
        assert!((spec[1] - 1.0 / 3.0).abs() < 1e-12);
        assert_eq!(sn_reduction_map(&iso).unwrap().certified_lower_bound, 3);
        assert!(!reduction_map_test(&iso, 3).unwrap().violated);
        assert!(!reduction_map_test(&product_state(), 1).unwrap().violated);
        assert!(reduction_map_test(&iso, 0).is_err());
    }

    #[test]
    fn covariance_cases() {
        let psi = max_entangled(3, 3).unwrap().to_density();
        let c = sn_covariance(&CovarianceBlock::canonical(&psi).unwrap());
        assert_eq!(c.certified_lower_bound, 3);
        assert!((c.tests[0].rhs - 2.0 / 3.0).abs() < 1e-12);
        let p = sn_covariance(&CovarianceBlock::canonical(&product_state()).unwrap());
        assert_eq!(p.certified_lower_bound, 1);
        assert_eq!(
            sn_covariance(&CovarianceBlock::canonical(&rho_w()).unwrap()).certified_lower_bound,
            3
        );
    }

    #[test]
    fn compare_all_reports() {
        let w = compare_all(&rho_w()).unwrap();
        assert_eq!(w.max_bound, 3);
        assert!(w.max_fidelity_bound <= 2);
        assert_eq!(w.get(CriterionId::Ccnr).unwrap().certified_lower_bound, 3);
        assert_eq!(
            w.get(CriterionId::TraceNorm).unwrap().certified_lower_bound,
            3
        );

        let noisy = compare_all(&isotropic(3, 0.9).unwrap()).unwrap();
        assert!(noisy
            .certificates
            .iter()
            .all(|c| c.certified_lower_bound == 1));

        let psi4 = compare_all(&max_entangled(4, 4).unwrap().to_density()).unwrap();
        assert_eq!(psi4.max_fidelity_bound, 4);
        for id in [
            CriterionId::TraceNorm,
            CriterionId::Ccnr,
            CriterionId::TwoNorm,
            CriterionId::ReductionMap,
            CriterionId::Covariance,
        ] {
            assert_eq!(psi4.get(id).unwrap().certified_lower_bound, 4, "{id:?}");
        }
    }
}
