//! Simulated randomized measurements.
//!
//! Each sample is one correlator `x = tr(rho U M U† ⊗ V M V†)` with
//! independent Haar-random local unitaries, or `x = αᵀ X^su β` with
//! independent uniform unit vectors on the Bloch sphere. Means of `x²` and
//! `x⁴`, rescaled, estimate `S2` and `S4`.
//!
//! Samples are drawn in fixed blocks, each from its own stream derived from
//! `(seed, block)`, and block sums are reduced in block order. Results do
//! not depend on the number of worker threads.

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::boundary::{classify_point, ClassifyMode};
use crate::correlation::CorrelationData;
use crate::criteria::SchmidtCertificate;
use crate::error::{Error, Result};
use crate::moments::{bloch_scales, exact_moments, haar_scales, observable_m, MomentPair};
use crate::qmat::{gaussian_vector, isotropic, ComplexMatrix, DensityMatrix, C64};
use crate::rng::{stream, Domain};

pub const MIN_SAMPLES: usize = 100;
pub const BLOCK: usize = 4096;
/// Sample count for the Monte-Carlo eighth moment behind predicted variances.
pub const DEFAULT_R8_SAMPLES: usize = 2_000_000;

/// Haar-random unitary: Gram-Schmidt on the columns of a complex Ginibre
/// matrix, which leaves `R` with a positive real diagonal.
pub fn haar_unitary<R: Rng + ?Sized>(d: usize, rng: &mut R) -> ComplexMatrix {
    let mut cols: Vec<Vec<C64>> = (0..d).map(|_| gaussian_vector(rng, d)).collect();
    for j in 0..d {
        // Two passes keep the columns orthogonal to machine precision.
        for _ in 0..2 {
            for i in 0..j {
                let (done, rest) = cols.split_at_mut(j);
                let q = &done[i];
                let c = &mut rest[0];
                let proj: C64 = q.iter().zip(c.iter()).map(|(a, b)| a.conj() * b).sum();
                c.iter_mut().zip(q).for_each(|(b, a)| *b -= proj * a);
            }
        }
        let norm = cols[j].iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        cols[j].iter_mut().for_each(|z| *z /= norm);
    }
    ComplexMatrix::from_fn(d, d, |i, j| cols[j][i])
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SamplingPath {
    /// Haar-random local unitaries applied to the fixed observable `M` (odd d).
    #[default]
    HaarObservable,
    /// Uniform Bloch-sphere directions, any d.
    BlochSphere,
}

impl SamplingPath {
    /// Haar path where available, otherwise the Bloch sphere.
    pub fn default_for(d: usize) -> Self {
        if d % 2 == 1 {
            SamplingPath::HaarObservable
        } else {
            SamplingPath::BlochSphere
        }
    }
}

enum Sampler {
    Haar { rho: Vec<C64>, m: Vec<f64> },
    Bloch { su: DMatrix<f64> },
}

/// Sums of even powers of the sampled correlators.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct PowerSums {
    pub n: usize,
    pub p2: f64,
    pub p4: f64,
    pub p6: f64,
    pub p8: f64,
}

impl PowerSums {
    fn push(&mut self, x: f64) {
        let x2 = x * x;
        let x4 = x2 * x2;
        self.n += 1;
        self.p2 += x2;
        self.p4 += x4;
        self.p6 += x4 * x2;
        self.p8 += x4 * x4;
    }

    fn merge(mut self, o: &PowerSums) -> Self {
        self.n += o.n;
        self.p2 += o.p2;
        self.p4 += o.p4;
        self.p6 += o.p6;
        self.p8 += o.p8;
        self
    }

    pub fn mean(&self, power: u32) -> f64 {
        let s = match power {
            2 => self.p2,
            4 => self.p4,
            6 => self.p6,
            8 => self.p8,
            _ => panic!("power {power} not tracked"),
        };
        s / self.n as f64
    }
}

/// Correlator sampler bound to one state and sampling path.
pub struct Estimator {
    d: usize,
    path: SamplingPath,
    sampler: Sampler,
    scales: (f64, f64),
}

impl Estimator {
    pub fn new(rho: &DensityMatrix, path: SamplingPath) -> Result<Self> {
        let (da, db) = rho.dims();
        if da != db {
            return Err(Error::Unsupported(format!(
                "moment estimation needs equal local dimensions, got {da}x{db}"
            )));
        }
        let d = da;
        let (sampler, scales) = match path {
            SamplingPath::HaarObservable => {
                let m = observable_m(d)?;
                (
                    Sampler::Haar {
                        rho: rho.matrix().as_slice().to_vec(),
                        m: m.eigenvalues,
                    },
                    haar_scales(d),
                )
            }
            SamplingPath::BlochSphere => {
                let corr = CorrelationData::canonical(rho)?;
                (Sampler::Bloch { su: corr.su }, bloch_scales(d))
            }
        };
        Ok(Self {
            d,
            path,
            sampler,
            scales,
        })
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn path(&self) -> SamplingPath {
        self.path
    }

    /// `(c2, c4)` with `ŝ2 = c2 mean(x²)`, `ŝ4 = c4 mean(x⁴)`.
    pub fn scales(&self) -> (f64, f64) {
        self.scales
    }

    fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let d = self.d;
        match &self.sampler {
            Sampler::Haar { rho, m } => {
                let rotate = |rng: &mut R| {
                    let u = haar_unitary(d, rng);
                    ComplexMatrix::from_fn(d, d, |i, j| {
                        (0..d).map(|a| u[(i, a)] * m[a] * u[(j, a)].conj()).sum()
                    })
                };
                let a = rotate(rng);
                let b = rotate(rng);
                // tr(rho A ⊗ B) = Σ rho[(i,k),(j,l)] A[j,i] B[l,k]
                let n = d * d;
                let mut acc = C64::new(0.0, 0.0);
                for i in 0..d {
                    for k in 0..d {
                        let row = &rho[(i * d + k) * n..(i * d + k + 1) * n];
                        for j in 0..d {
                            let aji = a[(j, i)];
                            for l in 0..d {
                                acc += row[j * d + l] * aji * b[(l, k)];
                            }
                        }
                    }
                }
                acc.re
            }
            Sampler::Bloch { su } => {
                let dim = su.nrows();
                let alpha = unit_vector(rng, dim);
                let beta = unit_vector(rng, dim);
                let mut acc = 0.0;
                for i in 0..dim {
                    let row: f64 = (0..dim).map(|j| su[(i, j)] * beta[j]).sum();
                    acc += alpha[i] * row;
                }
                acc
            }
        }
    }

    fn block_values(&self, seed: u64, domain: Domain, block: usize, count: usize) -> Vec<f64> {
        let mut rng = stream(seed, domain, block as u64);
        (0..count).map(|_| self.draw(&mut rng)).collect()
    }

    fn blocks(n: usize) -> Vec<(usize, usize)> {
        (0..n.div_ceil(BLOCK))
            .map(|b| (b, BLOCK.min(n - b * BLOCK)))
            .collect()
    }

    /// The raw correlators behind [`Estimator::estimate`] with the same seed.
    pub fn sample_values(&self, n: usize, seed: u64) -> Vec<f64> {
        Self::blocks(n)
            .into_par_iter()
            .map(|(b, c)| self.block_values(seed, Domain::Sampling, b, c))
            .collect::<Vec<_>>()
            .concat()
    }

    pub fn power_sums(&self, n: usize, seed: u64, domain: Domain) -> PowerSums {
        let parts: Vec<PowerSums> = Self::blocks(n)
            .into_par_iter()
            .map(|(b, c)| {
                let mut s = PowerSums::default();
                for x in self.block_values(seed, domain, b, c) {
                    s.push(x);
                }
                s
            })
            .collect();
        parts
            .iter()
            .fold(PowerSums::default(), |acc, p| acc.merge(p))
    }

    /// Monte-Carlo `E[x⁸]` and its standard error, from a stream independent
    /// of the estimation samples.
    pub fn mu8(&self, n: usize, seed: u64) -> (f64, f64) {
        let parts: Vec<(f64, f64)> = Self::blocks(n)
            .into_par_iter()
            .map(|(b, c)| {
                self.block_values(seed, Domain::HigherMoment, b, c)
                    .iter()
                    .fold((0.0, 0.0), |(s8, s16), x| {
                        let x8 = x.powi(8);
                        (s8 + x8, s16 + x8 * x8)
                    })
            })
            .collect();
        let (s8, s16) = parts
            .iter()
            .fold((0.0, 0.0), |(a, b), p| (a + p.0, b + p.1));
        let nf = n as f64;
        let mean = s8 / nf;
        let var = (s16 / nf - mean * mean).max(0.0) * nf / (nf - 1.0);
        (mean, (var / nf).sqrt())
    }

    pub fn estimate(&self, n: usize, seed: u64) -> Result<EstimatorResult> {
        if n < MIN_SAMPLES {
            return Err(Error::InvalidParameter(format!(
                "n_tot = {n} is below the minimum of {MIN_SAMPLES} samples"
            )));
        }
        let s = self.power_sums(n, seed, Domain::Sampling);
        let (c2, c4) = self.scales;
        let nf = n as f64;
        let (m2, m4, m6, m8) = (s.mean(2), s.mean(4), s.mean(6), s.mean(8));
        // Unbiased sample (co)variances of x² and x⁴, divided by n for the means.
        let bessel = nf / (nf - 1.0);
        let v22 = (m4 - m2 * m2) * bessel;
        let v24 = (m6 - m2 * m4) * bessel;
        let v44 = (m8 - m4 * m4) * bessel;
        let cov = [
            [c2 * c2 * v22 / nf, c2 * c4 * v24 / nf],
            [c2 * c4 * v24 / nf, c4 * c4 * v44 / nf],
        ];
        Ok(EstimatorResult {
            s2: c2 * m2,
            s4: c4 * m4,
            std_s2: cov[0][0].max(0.0).sqrt(),
            std_s4: cov[1][1].max(0.0).sqrt(),
            cov,
            mean_x2: m2,
            mean_x4: m4,
            predicted: None,
            n_samples: n,
            seed,
            path: self.path,
        })
    }
}

fn unit_vector<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..dim).map(|_| rng.sample(StandardNormal)).collect();
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-300 {
            return v.into_iter().map(|x| x / norm).collect();
        }
    }
}

/// Variances of the moment estimators from exact second and fourth moments
/// and a Monte-Carlo eighth moment.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PredictedVariance {
    pub var_s2: f64,
    pub var_s4: f64,
    /// `E[x²]`, `E[x⁴]` from the exact moments.
    pub r2: f64,
    pub r4: f64,
    /// Monte-Carlo `E[x⁸]` and its standard error.
    pub r8: f64,
    pub r8_stderr: f64,
    pub r8_samples: usize,
    pub n_samples: usize,
}

impl PredictedVariance {
    pub fn std_s2(&self) -> f64 {
        self.var_s2.max(0.0).sqrt()
    }

    pub fn std_s4(&self) -> f64 {
        self.var_s4.max(0.0).sqrt()
    }
}

/// Only `S2`'s variance from closed forms: `c2² (R4 - R2²) / n`.
pub fn predicted_var_s2(exact: &MomentPair, scales: (f64, f64), n_samples: usize) -> f64 {
    let (c2, c4) = scales;
    let (r2, r4) = (exact.s2 / c2, exact.s4 / c4);
    c2 * c2 * (r4 - r2 * r2) / n_samples as f64
}

pub fn predicted_variance(
    rho: &DensityMatrix,
    path: SamplingPath,
    n_samples: usize,
    r8_samples: usize,
    seed: u64,
) -> Result<PredictedVariance> {
    if n_samples < 1 || r8_samples < MIN_SAMPLES {
        return Err(Error::InvalidParameter(format!(
            "need n_samples >= 1 and r8_samples >= {MIN_SAMPLES}"
        )));
    }
    let est = Estimator::new(rho, path)?;
    let exact = exact_moments(&CorrelationData::canonical(rho)?)?;
    let (c2, c4) = est.scales();
    let (r2, r4) = (exact.s2 / c2, exact.s4 / c4);
    let (r8, r8_stderr) = est.mu8(r8_samples, seed);
    let nf = n_samples as f64;
    Ok(PredictedVariance {
        var_s2: predicted_var_s2(&exact, (c2, c4), n_samples),
        var_s4: c4 * c4 * (r8 - r4 * r4) / nf,
        r2,
        r4,
        r8,
        r8_stderr,
        r8_samples,
        n_samples,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EstimatorResult {
    pub s2: f64,
    pub s4: f64,
    /// Empirical standard deviations of `ŝ2`, `ŝ4`.
    pub std_s2: f64,
    pub std_s4: f64,
    /// Empirical covariance of `(ŝ2, ŝ4)`.
    pub cov: [[f64; 2]; 2],
    pub mean_x2: f64,
    pub mean_x4: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub predicted: Option<PredictedVariance>,
    pub n_samples: usize,
    pub seed: u64,
    pub path: SamplingPath,
}

impl EstimatorResult {
    pub fn moments(&self) -> MomentPair {
        MomentPair {
            s2: self.s2,
            s4: self.s4,
            std_s2: Some(self.std_s2),
            std_s4: Some(self.std_s4),
            n_samples: Some(self.n_samples),
        }
    }
}

pub fn estimate_moments(
    rho: &DensityMatrix,
    n_tot: usize,
    seed: u64,
    path: SamplingPath,
) -> Result<EstimatorResult> {
    Estimator::new(rho, path)?.estimate(n_tot, seed)
}

/// Decision geometry for finite-statistics certificates.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Geometry {
    /// Confidence ellipse from the empirical covariance of `(ŝ2, ŝ4)`.
    #[default]
    Ellipse,
    /// Independent `kσ` intervals on both axes.
    Rectangle,
}

impl Geometry {
    pub fn mode(self, est: &EstimatorResult, k: f64) -> ClassifyMode {
        match self {
            Geometry::Ellipse => ClassifyMode::Ellipse { cov: est.cov, k },
            Geometry::Rectangle => ClassifyMode::Rectangle {
                std_s2: est.std_s2,
                std_s4: est.std_s4,
                k,
            },
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Detection {
    pub certificate: SchmidtCertificate,
    pub estimate: EstimatorResult,
    pub k_sigma: f64,
    pub geometry: Geometry,
}

pub fn detect_with_confidence(
    rho: &DensityMatrix,
    n_tot: usize,
    k_sigma: f64,
    seed: u64,
    path: SamplingPath,
) -> Result<Detection> {
    detect_with_geometry(rho, n_tot, k_sigma, seed, path, Geometry::Ellipse)
}

pub fn detect_with_geometry(
    rho: &DensityMatrix,
    n_tot: usize,
    k_sigma: f64,
    seed: u64,
    path: SamplingPath,
    geometry: Geometry,
) -> Result<Detection> {
    if !(k_sigma >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "k_sigma = {k_sigma} must be >= 0"
        )));
    }
    let estimate = estimate_moments(rho, n_tot, seed, path)?;
    let certificate = classify_point(
        estimate.s2,
        estimate.s4,
        rho.dim_a(),
        &geometry.mode(&estimate, k_sigma),
    )?;
    Ok(Detection {
        certificate,
        estimate,
        k_sigma,
        geometry,
    })
}

/// Infinite-statistics white-noise threshold for certifying `bound` on
/// `isotropic(d, p)` through the trace-norm criterion.
pub fn analytic_noise_threshold(d: usize, bound: usize) -> Result<f64> {
    if bound < 2 || bound > d {
        return Err(Error::InvalidRank {
            rank: bound,
            dim: d,
        });
    }
    let (df, r) = (d as f64, (bound - 1) as f64);
    Ok(1.0 - (df * r - 1.0) / (df * df - 1.0))
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct NoiseTolerance {
    pub d: usize,
    pub target_bound: usize,
    /// Trace-norm threshold on exact states.
    pub analytic: f64,
    /// Threshold of the moment boundary on exact moments.
    pub exact_moments: f64,
    /// Largest `p` certified from simulated data, `None` if even `p = 0` fails.
    pub finite: Option<f64>,
    pub n_tot: usize,
    pub k_sigma: f64,
    pub seed: u64,
    pub path: SamplingPath,
    pub resolution: f64,
}

pub const NOISE_RESOLUTION: f64 = 1e-3;

fn bisect(mut ok: impl FnMut(f64) -> Result<bool>) -> Result<Option<f64>> {
    if !ok(0.0)? {
        return Ok(None);
    }
    if ok(1.0)? {
        return Ok(Some(1.0));
    }
    let (mut lo, mut hi) = (0.0, 1.0);
    while hi - lo > NOISE_RESOLUTION {
        let mid = 0.5 * (lo + hi);
        if ok(mid)? {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(Some(lo))
}

/// Largest white-noise fraction at which `isotropic(d, p)` is still
/// certified at `target_bound`. The same seed is used for every `p`.
pub fn noise_tolerance(
    d: usize,
    target_bound: usize,
    n_tot: usize,
    k_sigma: f64,
    seed: u64,
    path: SamplingPath,
) -> Result<NoiseTolerance> {
    let analytic = analytic_noise_threshold(d, target_bound)?;
    let exact = bisect(|p| {
        let m = exact_moments(&CorrelationData::canonical(&isotropic(d, p)?)?)?;
        Ok(
            classify_point(m.s2, m.s4, d, &ClassifyMode::Exact)?.certified_lower_bound
                >= target_bound,
        )
    })?
    .unwrap_or(0.0);
    let finite = bisect(|p| {
        let det = detect_with_confidence(&isotropic(d, p)?, n_tot, k_sigma, seed, path)?;
        Ok(det.certificate.certified_lower_bound >= target_bound)
    })?;
    Ok(NoiseTolerance {
        d,
        target_bound,
        analytic,
        exact_moments: exact,
        finite,
        n_tot,
        k_sigma,
        seed,
        path,
        resolution: NOISE_RESOLUTION,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qmat::max_entangled;

    fn psi3() -> DensityMatrix {
        max_entangled(3, 3).unwrap().to_density()
    }

    #[test]
    fn haar_unitaries_are_unitary() {
        let mut rng = stream(1, Domain::Sampling, 0);
        for d in [2, 3, 5, 8] {
            for _ in 0..20 {
                assert!(haar_unitary(d, &mut rng).unitarity_deviation() < 1e-10);
            }
        }
    }

    #[test]
    fn haar_first_moment() {
        let mut rng = stream(2, Domain::Sampling, 0);
        let n = 20_000;
        let vals: Vec<f64> = (0..n)
            .map(|_| haar_unitary(3, &mut rng)[(0, 0)].norm_sqr())
            .collect();
        let mean = vals.iter().sum::<f64>() / n as f64;
        let var = vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        assert!(
            (mean - 1.0 / 3.0).abs() < 4.0 * (var / n as f64).sqrt(),
            "{mean}"
        );
    }

    #[test]
    fn refuses_bad_inputs() {
        assert!(matches!(
            estimate_moments(&psi3(), 99, 0, SamplingPath::HaarObservable),
            Err(Error::InvalidParameter(_))
        ));
        let four = max_entangled(4, 4).unwrap().to_density();
        assert!(matches!(
            estimate_moments(&four, 1000, 0, SamplingPath::HaarObservable),
            Err(Error::Unsupported(_))
        ));
        assert!(estimate_moments(&four, 1000, 0, SamplingPath::BlochSphere).is_ok());
        let rect = DensityMatrix::maximally_mixed(2, 3);
        assert!(matches!(
            estimate_moments(&rect, 1000, 0, SamplingPath::BlochSphere),
            Err(Error::Unsupported(_))
        ));
    }

    #[test]
    fn deterministic_and_block_consistent() {
        let a = estimate_moments(&psi3(), 10_000, 5, SamplingPath::HaarObservable).unwrap();
        let b = estimate_moments(&psi3(), 10_000, 5, SamplingPath::HaarObservable).unwrap();
        assert_eq!(a, b);
        let c = estimate_moments(&psi3(), 10_000, 6, SamplingPath::HaarObservable).unwrap();
        assert_ne!(a.s2, c.s2);

        let est = Estimator::new(&psi3(), SamplingPath::HaarObservable).unwrap();
        let xs = est.sample_values(10_000, 5);
        let m2 = xs.iter().map(|x| x * x).sum::<f64>() / xs.len() as f64;
        assert!((16.0 * m2 - a.s2).abs() < 1e-12);
    }

    #[test]
    fn maximally_mixed_gives_zero() {
        let rho = DensityMatrix::maximally_mixed(3, 3);
        for path in [SamplingPath::HaarObservable, SamplingPath::BlochSphere] {
            let r = estimate_moments(&rho, 1000, 1, path).unwrap();
            assert!(r.s2.abs() < 1e-12 && r.s4.abs() < 1e-12);
        }
    }

    #[test]
    fn estimates_track_exact_values() {
        let rho = psi3();
        for path in [SamplingPath::HaarObservable, SamplingPath::BlochSphere] {
            let r = estimate_moments(&rho, 50_000, 9, path).unwrap();
            assert!(
                (r.s2 - 2.0).abs() < 4.0 * r.std_s2,
                "{path:?}: {} ± {}",
                r.s2,
                r.std_s2
            );
            assert!(
                (r.s4 - 5.0 / 3.0).abs() < 4.0 * r.std_s4,
                "{path:?}: {} ± {}",
                r.s4,
                r.std_s4
            );
        }
    }

    #[test]
    fn closed_form_variance_of_s2() {
        let exact = MomentPair::exact(2.0, 5.0 / 3.0);
        let v = predicted_var_s2(&exact, haar_scales(3), 1000);
        assert!((v - 28.0 / 5000.0).abs() < 1e-15);
    }

    #[test]
    fn analytic_thresholds() {
        assert_eq!(analytic_noise_threshold(3, 3).unwrap(), 0.375);
        assert_eq!(analytic_noise_threshold(3, 2).unwrap(), 0.75);
        assert!(analytic_noise_threshold(3, 1).is_err());
        assert!(analytic_noise_threshold(3, 4).is_err());
    }

    #[test]
    fn exact_detection_noise_thresholds_match_trace_norm() {
        let t = noise_tolerance(3, 3, 1000, 2.0, 1, SamplingPath::HaarObservable).unwrap();
        assert!((t.exact_moments - 0.375).abs() <= NOISE_RESOLUTION);
        assert!(t.finite.is_some());
    }
}
