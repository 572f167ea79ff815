//! Dense complex matrix kernel and the tensor-product algebra built on
//! Kronecker products.

mod eigen;
mod expm;
mod json;
mod matrix;
mod ops;

pub use eigen::{
    eigen_decompose, eigen_decompose_capped, eigenvalues, hermitian_eigen, hermitian_eigenvalues,
    schur, EigenDecomposition, Schur, Spectrum, DEFAULT_CONDITION_CAP,
};
pub use expm::matrix_exp;
pub use json::MatrixJson;
pub use matrix::{Lu, SquareMatrix};
pub use ops::{ad_power, embed_slot, kron, kron_all, nabla, pair, product, TensorOperator};
