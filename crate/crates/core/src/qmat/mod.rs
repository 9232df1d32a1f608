//! Complex matrices, bipartite states, operator bases and named states.

mod basis;
mod io;
mod matrix;
mod state;
mod states;

pub use basis::{gell_mann_basis, SuBasis};
pub use io::{parse_state, read_state, write_state, StateFile};
pub use matrix::{ComplexMatrix, C64};
pub use state::{
    partial_trace, schmidt_coefficients, DensityMatrix, Party, PureState, STRUCTURE_TOL,
};
pub(crate) use states::gaussian_vector;
pub use states::{
    family_state, isotropic, max_entangled, max_entangled_in, random_mixed, random_mixed_with,
    random_pure, random_pure_with, random_pure_with_rank, rho_w, Family,
};
