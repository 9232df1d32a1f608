//! Named states and state families.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qmat::matrix::{ComplexMatrix, C64};
use crate::qmat::state::{DensityMatrix, PureState};
use crate::rng::{stream, Domain};

/// `(1/√r) Σ_{j<r} |jj>` embedded in `d ⊗ d`.
pub fn max_entangled(r: usize, d: usize) -> Result<PureState> {
    max_entangled_in(r, d, d)
}

/// `|Ψ₊ʳ>` embedded in `d_a ⊗ d_b`.
pub fn max_entangled_in(r: usize, dim_a: usize, dim_b: usize) -> Result<PureState> {
    let dmin = dim_a.min(dim_b);
    if r < 1 || r > dmin {
        return Err(Error::InvalidRank { rank: r, dim: dmin });
    }
    let w = 1.0 / (r as f64).sqrt();
    let mut amps = vec![C64::new(0.0, 0.0); dim_a * dim_b];
    for j in 0..r {
        amps[j * dim_b + j] = C64::new(w, 0.0);
    }
    PureState::new(dim_a, dim_b, amps)
}

fn check_unit_interval(name: &str, p: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidParameter(format!(
            "{name} = {p} outside [0, 1]"
        )));
    }
    Ok(())
}

/// `(1-p)|Ψ₊ᵈ><Ψ₊ᵈ| + p 1/d²`.
pub fn isotropic(d: usize, p: f64) -> Result<DensityMatrix> {
    check_unit_interval("p", p)?;
    if d < 2 {
        return Err(Error::InvalidDimension(format!(
            "isotropic state needs d >= 2, got {d}"
        )));
    }
    let psi = max_entangled(d, d)?.to_density();
    let noise = DensityMatrix::maximally_mixed(d, d);
    DensityMatrix::mixture(&[(1.0 - p, &psi), (p, &noise)])
}

/// `½|Ψ₊³><Ψ₊³| + ¼(|23>+|32>)(<23|+<32|)` on `4 ⊗ 4`.
pub fn rho_w() -> DensityMatrix {
    let psi = max_entangled(3, 4)
        .expect("rank 3 fits in d = 4")
        .to_density();
    let mut amps = vec![C64::new(0.0, 0.0); 16];
    amps[2 * 4 + 3] = C64::new(1.0, 0.0);
    amps[3 * 4 + 2] = C64::new(1.0, 0.0);
    let phi = ComplexMatrix::outer(&amps);
    let m = psi.matrix().scale(0.5).add(&phi.scale(0.25));
    DensityMatrix::new(4, 4, m).expect("rho_W is a valid state")
}

/// The four d = 3 families whose moments trace the outer region boundary.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    /// `p|00><00| + (1-p) 1/9`, `p ∈ [0, 1]`.
    A,
    /// `√λ|00> + √(1-λ)|11>`, `λ ∈ [1/2, 1]`.
    B,
    /// `√λ|00> + √λ|11> + √(1-2λ)|22>`, `λ ∈ [1/3, 1/2]`.
    C,
    /// `p|Ψ₊³><Ψ₊³| + (1-p) 1/9`, `p ∈ [0, 1]`.
    D,
}

impl Family {
    pub const ALL: [Family; 4] = [Family::A, Family::B, Family::C, Family::D];

    pub fn param_range(self) -> (f64, f64) {
        match self {
            Family::A | Family::D => (0.0, 1.0),
            Family::B => (0.5, 1.0),
            Family::C => (1.0 / 3.0, 0.5),
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Family::A => "A",
            Family::B => "B",
            Family::C => "C",
            Family::D => "D",
        }
    }
}

pub fn family_state(family: Family, param: f64) -> Result<DensityMatrix> {
    let (lo, hi) = family.param_range();
    // The C range ends at 1/3, which is not exactly representable.
    if !(param >= lo - 1e-12 && param <= hi + 1e-12) {
        return Err(Error::InvalidParameter(format!(
            "family {} parameter {param} outside [{lo}, {hi}]",
            family.label()
        )));
    }
    let param = param.clamp(lo, hi);
    let ket = |terms: &[(usize, f64)]| {
        let mut amps = vec![C64::new(0.0, 0.0); 9];
        for &(j, w) in terms {
            amps[j * 3 + j] = C64::new(w.max(0.0).sqrt(), 0.0);
        }
        PureState::normalized(3, 3, amps)
    };
    match family {
        Family::A => {
            let zero = ket(&[(0, 1.0)])?.to_density();
            DensityMatrix::mixture(&[
                (param, &zero),
                (1.0 - param, &DensityMatrix::maximally_mixed(3, 3)),
            ])
        }
        Family::B => Ok(ket(&[(0, param), (1, 1.0 - param)])?.to_density()),
        Family::C => Ok(ket(&[(0, param), (1, param), (2, 1.0 - 2.0 * param)])?.to_density()),
        Family::D => {
            let psi = max_entangled(3, 3)?.to_density();
            DensityMatrix::mixture(&[
                (param, &psi),
                (1.0 - param, &DensityMatrix::maximally_mixed(3, 3)),
            ])
        }
    }
}

pub(crate) fn gaussian_vector<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Vec<C64> {
    (0..n)
        .map(|_| {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            C64::new(re, im)
        })
        .collect()
}

/// Haar-random pure state: a normalized complex Gaussian vector.
pub fn random_pure(dim_a: usize, dim_b: usize, seed: u64) -> Result<PureState> {
    let mut rng = stream(seed, Domain::State, 0);
    random_pure_with(&mut rng, dim_a, dim_b)
}

pub fn random_pure_with<R: Rng + ?Sized>(
    rng: &mut R,
    dim_a: usize,
    dim_b: usize,
) -> Result<PureState> {
    if dim_a < 1 || dim_b < 1 {
        return Err(Error::InvalidDimension(format!("{dim_a}x{dim_b}")));
    }
    PureState::normalized(dim_a, dim_b, gaussian_vector(rng, dim_a * dim_b))
}

/// Random pure state of Schmidt rank exactly `rank` (almost surely): the
/// coefficient matrix is a product of `d_a x rank` and `rank x d_b`
/// complex Gaussian matrices.
pub fn random_pure_with_rank<R: Rng + ?Sized>(
    rng: &mut R,
    dim_a: usize,
    dim_b: usize,
    rank: usize,
) -> Result<PureState> {
    let dmin = dim_a.min(dim_b);
    if rank < 1 || rank > dmin {
        return Err(Error::InvalidRank { rank, dim: dmin });
    }
    let left = gaussian_vector(rng, dim_a * rank);
    let right = gaussian_vector(rng, rank * dim_b);
    let mut amps = vec![C64::new(0.0, 0.0); dim_a * dim_b];
    for i in 0..dim_a {
        for j in 0..dim_b {
            amps[i * dim_b + j] = (0..rank)
                .map(|k| left[i * rank + k] * right[k * dim_b + j])
                .sum();
        }
    }
    PureState::normalized(dim_a, dim_b, amps)
}

/// Random mixed state from the induced measure: partial trace of a
/// Haar-random pure state on an ancilla of dimension `rank`.
pub fn random_mixed(dim_a: usize, dim_b: usize, rank: usize, seed: u64) -> Result<DensityMatrix> {
    let mut rng = stream(seed, Domain::State, 1);
    random_mixed_with(&mut rng, dim_a, dim_b, rank)
}

pub fn random_mixed_with<R: Rng + ?Sized>(
    rng: &mut R,
    dim_a: usize,
    dim_b: usize,
    rank: usize,
) -> Result<DensityMatrix> {
    let n = dim_a * dim_b;
    if rank < 1 || rank > n {
        return Err(Error::InvalidRank { rank, dim: n });
    }
    // Columns of G are the (unnormalized) ancilla branches; rho = G G^dagger / tr.
    let g = gaussian_vector(rng, n * rank);
    let m = ComplexMatrix::from_fn(n, n, |i, j| {
        (0..rank)
            .map(|k| g[i * rank + k] * g[j * rank + k].conj())
            .sum()
    });
    DensityMatrix::from_unnormalized(dim_a, dim_b, m.hermitian_part())
}
