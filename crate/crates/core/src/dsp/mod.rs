//! Numerical kernels shared by the pre-filter designs and the link simulator.

mod fourier;
mod linalg;

pub use fourier::{conj_reverse, convolve, dft, idft, Dft};
pub use linalg::{
    least_squares_solve, nullspace_project, nullspace_project_with_gram, ComplexMatrix,
    NullProjection, DEFAULT_REG_EPSILON, RANK_TOLERANCE,
};
