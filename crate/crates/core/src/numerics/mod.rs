//! Grids, transforms, kinetic operators, quadrature and eigensolvers.

mod eigen;
mod fft;
mod field;
mod grid;
mod kinetic;
pub mod quad;

pub use eigen::{
    dense_eigen, eigs_smallest, lanczos_smallest, operator_to_dense, symmetry_defect,
    tridiagonal_count_below, tridiagonal_eigenvalue, tridiagonal_smallest, DenseOperator, EigenError, EigenRequest,
    Spectrum, SymmetricOperator, TridiagonalOperator, Which,
};
pub use fft::{Dst1, Fft3};
pub use field::{FieldError, RadialField, WaveField};
pub use grid::{BoxGrid3D, GridError, RadialGrid, SpacingLaw};
pub use kinetic::{apply_kinetic, KineticError, KineticOperator, RadialSqrtKinetic};
