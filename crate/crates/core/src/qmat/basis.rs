//! Orthonormal su(d) operator bases.
//!
//! Generators are normalized under the Hilbert-Schmidt inner product,
//! `tr(g_i g_j) = δ_ij`. Together with `1/√d` they form an orthonormal basis
//! of the Hermitian `d x d` matrices, which is the "extended" basis used for
//! the full Bloch coefficient matrix (index 0 is always `1/√d`).

use crate::error::{Error, Result};
use crate::qmat::matrix::{ComplexMatrix, C64};

const STRUCTURE_TOL: f64 = 1e-10;
const ORTHO_TOL: f64 = 1e-9;

#[derive(Clone, Debug)]
pub struct SuBasis {
    dim: usize,
    generators: Vec<ComplexMatrix>,
    // Non-zero entries (row, col, value) of each extended-basis element.
    sparse: Vec<Vec<(usize, usize, C64)>>,
}

/// Generalized Gell-Mann matrices, normalized to `tr(g_i g_j) = δ_ij`.
///
/// Order: symmetric off-diagonal `(j,k)` with `j < k` in lexicographic order,
/// then antisymmetric off-diagonal in the same order, then the `d-1` diagonal
/// generators `diag(1,..,1,-l,0,..)/√(l(l+1))` for `l = 1..d-1`.
pub fn gell_mann_basis(d: usize) -> Result<SuBasis> {
    if d < 2 {
        return Err(Error::InvalidDimension(format!(
            "su(d) basis needs d >= 2, got {d}"
        )));
    }
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let mut gens = Vec::with_capacity(d * d - 1);
    for j in 0..d {
        for k in j + 1..d {
            let mut g = ComplexMatrix::zeros(d, d);
            g[(j, k)] = C64::new(s, 0.0);
            g[(k, j)] = C64::new(s, 0.0);
            gens.push(g);
        }
    }
    for j in 0..d {
        for k in j + 1..d {
            let mut g = ComplexMatrix::zeros(d, d);
            g[(j, k)] = C64::new(0.0, -s);
            g[(k, j)] = C64::new(0.0, s);
            gens.push(g);
        }
    }
    for l in 1..d {
        let norm = ((l * (l + 1)) as f64).sqrt();
        let mut g = ComplexMatrix::zeros(d, d);
        for m in 0..l {
            g[(m, m)] = C64::new(1.0 / norm, 0.0);
        }
        g[(l, l)] = C64::new(-(l as f64) / norm, 0.0);
        gens.push(g);
    }
    Ok(SuBasis::build(d, gens))
}

impl SuBasis {
    /// Validates a user-supplied set of generators.
    pub fn from_generators(dim: usize, generators: Vec<ComplexMatrix>) -> Result<Self> {
        if dim < 2 {
            return Err(Error::InvalidDimension(format!(
                "su(d) basis needs d >= 2, got {dim}"
            )));
        }
        if generators.len() != dim * dim - 1 {
            return Err(Error::InvalidParameter(format!(
                "su({dim}) basis needs {} generators, got {}",
                dim * dim - 1,
                generators.len()
            )));
        }
        for (i, g) in generators.iter().enumerate() {
            if g.rows() != dim || g.cols() != dim {
                return Err(Error::DimensionMismatch(format!(
                    "generator {i} is not {dim}x{dim}"
                )));
            }
            if g.hermitian_deviation() > STRUCTURE_TOL {
                return Err(Error::InvalidParameter(format!(
                    "generator {i} is not Hermitian"
                )));
            }
            if g.trace().norm() > STRUCTURE_TOL {
                return Err(Error::InvalidParameter(format!(
                    "generator {i} is not traceless"
                )));
            }
        }
        for i in 0..generators.len() {
            for j in i..generators.len() {
                let ip = generators[i].hs_inner(&generators[j]);
                let want = if i == j { 1.0 } else { 0.0 };
                if (ip.re - want).abs() > ORTHO_TOL || ip.im.abs() > ORTHO_TOL {
                    return Err(Error::InvalidParameter(format!(
                        "generators {i} and {j} are not orthonormal (tr = {ip})"
                    )));
                }
            }
        }
        Ok(Self::build(dim, generators))
    }

    fn build(dim: usize, generators: Vec<ComplexMatrix>) -> Self {
        let mut sparse = Vec::with_capacity(dim * dim);
        let id = 1.0 / (dim as f64).sqrt();
        sparse.push((0..dim).map(|i| (i, i, C64::new(id, 0.0))).collect());
        for g in &generators {
            let mut nz = Vec::new();
            for i in 0..dim {
                for j in 0..dim {
                    let z = g[(i, j)];
                    if z.norm() > 0.0 {
                        nz.push((i, j, z));
                    }
                }
            }
            sparse.push(nz);
        }
        Self {
            dim,
            generators,
            sparse,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn generators(&self) -> &[ComplexMatrix] {
        &self.generators
    }

    pub fn len(&self) -> usize {
        self.generators.len()
    }

    pub fn is_empty(&self) -> bool {
        self.generators.is_empty()
    }

    /// Element `k` of the extended basis (`k = 0` is `1/√d`).
    pub fn extended(&self, k: usize) -> ComplexMatrix {
        if k == 0 {
            ComplexMatrix::identity(self.dim).scale(1.0 / (self.dim as f64).sqrt())
        } else {
            self.generators[k - 1].clone()
        }
    }

    pub(crate) fn sparse_extended(&self, k: usize) -> &[(usize, usize, C64)] {
        &self.sparse[k]
    }

    /// Real coefficients `tr(M g_k)` of a Hermitian matrix on the generators.
    pub fn coefficients(&self, m: &ComplexMatrix) -> Vec<f64> {
        (1..=self.len())
            .map(|k| self.trace_against(k, m).re)
            .collect()
    }

    /// `tr(M b_k)` for extended-basis element `k`.
    pub(crate) fn trace_against(&self, k: usize, m: &ComplexMatrix) -> C64 {
        self.sparse[k].iter().map(|&(i, j, z)| z * m[(j, i)]).sum()
    }

    /// `tr(M) 1/d + Σ_k c_k g_k`.
    pub fn reconstruct(&self, identity_coeff: f64, coeffs: &[f64]) -> ComplexMatrix {
        let mut out = ComplexMatrix::identity(self.dim).scale(identity_coeff / self.dim as f64);
        for (g, &c) in self.generators.iter().zip(coeffs) {
            out = out.add(&g.scale(c));
        }
        out
    }

    /// New basis `g'_i = Σ_j O_ij g_j` for a real orthogonal `O`.
    pub fn rotated(&self, orthogonal: &nalgebra::DMatrix<f64>) -> Result<Self> {
        let n = self.len();
        if orthogonal.nrows() != n || orthogonal.ncols() != n {
            return Err(Error::DimensionMismatch(format!(
                "rotation must be {n}x{n}"
            )));
        }
        let gens = (0..n)
            .map(|i| {
                let mut acc = ComplexMatrix::zeros(self.dim, self.dim);
                for j in 0..n {
                    let w = orthogonal[(i, j)];
                    if w != 0.0 {
                        acc = acc.add(&self.generators[j].scale(w));
                    }
                }
                acc
            })
            .collect();
        Self::from_generators(self.dim, gens)
    }
}
