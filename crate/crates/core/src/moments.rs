//! Second and fourth Bloch-sphere moments and their randomized-measurement
//! counterparts.
//!
//! With `ε_i` the singular values of the su block and `d` the common local
//! dimension,
//!
//! ```text
//! S2 = d²/(d-1)² Σ ε_i²
//! S4 = 2d⁴/(3(d-1)⁴) Σ ε_i⁴ + S2²/3
//! ```
//!
//! normalized so that pure product states give `S2 = S4 = 1`. Haar-randomized
//! correlators of the observable from [`observable_m`] reproduce them up to
//! the constants in [`haar_scales`].

use serde::{Deserialize, Serialize};

use crate::correlation::CorrelationData;
use crate::error::{Error, Result};
use crate::qmat::ComplexMatrix;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MomentPair {
    pub s2: f64,
    pub s4: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub std_s2: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub std_s4: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_samples: Option<usize>,
}

impl MomentPair {
    pub fn exact(s2: f64, s4: f64) -> Self {
        Self {
            s2,
            s4,
            std_s2: None,
            std_s4: None,
            n_samples: None,
        }
    }

    /// `s2²/3 <= s4 <= s2²` within `tol`.
    pub fn in_physical_cone(&self, tol: f64) -> bool {
        let sq = self.s2 * self.s2;
        self.s4 >= sq / 3.0 - tol && self.s4 <= sq + tol
    }
}

fn require_equal_dims(corr: &CorrelationData) -> Result<usize> {
    if !corr.is_square() {
        return Err(Error::Unsupported(format!(
            "moments need equal local dimensions, got {}x{}",
            corr.dim_a, corr.dim_b
        )));
    }
    Ok(corr.dim_a)
}

/// Moments from su singular values.
pub fn moments_from_singular_values(epsilon: &[f64], d: usize) -> MomentPair {
    let df = d as f64;
    let k = df / (df - 1.0);
    let sum2: f64 = epsilon.iter().map(|e| e * e).sum();
    let sum4: f64 = epsilon.iter().map(|e| e.powi(4)).sum();
    let s2 = k * k * sum2;
    let s4 = 2.0 * k.powi(4) / 3.0 * sum4 + s2 * s2 / 3.0;
    MomentPair::exact(s2, s4)
}

pub fn exact_moments(corr: &CorrelationData) -> Result<MomentPair> {
    let d = require_equal_dims(corr)?;
    Ok(moments_from_singular_values(&corr.epsilon, d))
}

/// `(c2, c4)` with `S2 = c2 R2` and `S4 = c4 R4` for the observable of [`observable_m`].
pub fn haar_scales(d: usize) -> (f64, f64) {
    let df = d as f64;
    let c2 = (df + 1.0).powi(2);
    let c4 = c2 * (df * df + 1.0).powi(2) / (9.0 * (df - 1.0).powi(2));
    (c2, c4)
}

pub fn moments_from_r(r2: f64, r4: f64, d: usize) -> MomentPair {
    let (c2, c4) = haar_scales(d);
    MomentPair::exact(c2 * r2, c4 * r4)
}

/// Inverse of [`moments_from_r`].
pub fn r_from_moments(m: &MomentPair, d: usize) -> (f64, f64) {
    let (c2, c4) = haar_scales(d);
    (m.s2 / c2, m.s4 / c4)
}

/// `M = diag(α₊, .., α₊, β, α₋, .., α₋)` for odd `d`, traceless with `tr M² = d`.
#[derive(Clone, Debug, Serialize)]
pub struct ObservableM {
    pub dim: usize,
    pub alpha_plus: f64,
    pub beta: f64,
    pub alpha_minus: f64,
    pub eigenvalues: Vec<f64>,
}

impl ObservableM {
    pub fn matrix(&self) -> ComplexMatrix {
        ComplexMatrix::diag(&self.eigenvalues)
    }
}

pub fn observable_m(d: usize) -> Result<ObservableM> {
    if d < 3 || d.is_multiple_of(2) {
        return Err(Error::Unsupported(format!(
            "randomized-measurement observable is only available for odd d >= 3 (got {d}); \
             use the Bloch-sphere sampling path instead"
        )));
    }
    let df = d as f64;
    let y = 0.5
        * (1.0
            - (1.0 + (df + 3.0 + (df.powi(3) + 3.0 * df * df + df + 3.0).sqrt()) / (df - 2.0))
                .sqrt());
    let u = 2.0 * y - 1.0;
    let denom = ((df - 1.0) * (u * u + df)).sqrt();
    let alpha_plus = (df - 2.0 * y + 1.0) / denom;
    let alpha_minus = (-df - 2.0 * y + 1.0) / denom;
    let beta = -((df - 1.0) * u * u / (u * u + df)).sqrt();
    let half = (d - 1) / 2;
    let mut eigenvalues = vec![alpha_plus; half];
    eigenvalues.push(beta);
    eigenvalues.extend(std::iter::repeat_n(alpha_minus, half));

    let trace: f64 = eigenvalues.iter().sum();
    let trace_sq: f64 = eigenvalues.iter().map(|x| x * x).sum();
    if trace.abs() > 1e-10 || (trace_sq - df).abs() > 1e-9 {
        return Err(Error::Numerical(format!(
            "observable normalization failed: tr M = {trace:e}, tr M² = {trace_sq}"
        )));
    }
    Ok(ObservableM {
        dim: d,
        alpha_plus,
        beta,
        alpha_minus,
        eigenvalues,
    })
}

/// Moments of a uniform unit vector on the sphere in `R^D`.
///
/// `E[α_i α_j] = δ_ij / D` and
/// `E[α_i α_j α_k α_l] = (δ_ij δ_kl + δ_ik δ_jl + δ_il δ_jk) / (D(D+2))`.
/// Contracting twice, for independent `α, β` and a real matrix `X` with
/// singular values `ε`:
/// `E[(αᵀXβ)⁴] = a Σε⁴ + b (Σε²)²`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SphereMoments {
    pub dim: usize,
    pub second: f64,
    pub fourth_weight: f64,
    pub quartic_a: f64,
    pub quartic_b: f64,
}

pub fn sphere_moment_constants(dim: usize) -> Result<SphereMoments> {
    if dim < 2 {
        return Err(Error::InvalidDimension(format!(
            "sphere dimension must be >= 2, got {dim}"
        )));
    }
    let n = dim as f64;
    let w = 1.0 / (n * (n + 2.0));
    Ok(SphereMoments {
        dim,
        second: 1.0 / n,
        fourth_weight: w,
        // E_α[(α·u)⁴] = 3|u|⁴ w, E_β[|Xβ|⁴] = ((Σε²)² + 2Σε⁴) w.
        quartic_a: 6.0 * w * w,
        quartic_b: 3.0 * w * w,
    })
}

/// `(n2, n4)` with `S2 = n2 E[x²]`, `S4 = n4 E[x⁴]` for `x = αᵀ X^su β`.
pub fn bloch_scales(d: usize) -> (f64, f64) {
    let sphere = sphere_moment_constants(d * d - 1).expect("d >= 2");
    let df = d as f64;
    let k = df / (df - 1.0);
    let n2 = k * k / (sphere.second * sphere.second);
    // S4 = k⁴/3 (2Σε⁴ + (Σε²)²) and E[x⁴] = b (2Σε⁴ + (Σε²)²).
    let n4 = k.powi(4) / (3.0 * sphere.quartic_b);
    (n2, n4)
}
