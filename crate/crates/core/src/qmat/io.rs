//! JSON state files: `{"dim_a": .., "dim_b": .., "re": [[..]], "im": [[..]]}`.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qmat::matrix::ComplexMatrix;
use crate::qmat::state::DensityMatrix;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct StateFile {
    pub dim_a: usize,
    pub dim_b: usize,
    pub re: Vec<Vec<f64>>,
    pub im: Vec<Vec<f64>>,
}

impl StateFile {
    pub fn from_density(rho: &DensityMatrix) -> Self {
        let (re, im) = rho.matrix().re_im();
        Self {
            dim_a: rho.dim_a(),
            dim_b: rho.dim_b(),
            re,
            im,
        }
    }

    pub fn into_density(self) -> Result<DensityMatrix> {
        let m = ComplexMatrix::from_real_imag(&self.re, &self.im)?;
        DensityMatrix::new(self.dim_a, self.dim_b, m)
    }
}

pub fn parse_state(json: &str) -> Result<DensityMatrix> {
    let file: StateFile = serde_json::from_str(json).map_err(|e| Error::Parse(e.to_string()))?;
    file.into_density()
}

pub fn read_state(path: &Path) -> Result<DensityMatrix> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_state(&text)
}

pub fn write_state(path: &Path, rho: &DensityMatrix) -> Result<()> {
    let json = serde_json::to_string_pretty(&StateFile::from_density(rho))
        .map_err(|e| Error::Parse(e.to_string()))?;
    fs::write(path, json).map_err(|e| Error::io(path, e))
}
