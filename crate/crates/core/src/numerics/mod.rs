//! Numerical kernels shared by the engines.

pub mod bspline;
pub mod dense;
pub mod minres;
pub mod roots;

pub use bspline::cubic_bspline;
pub use dense::{solve_dense, solve_least_squares, solve_least_squares_ridge, DenseMatrix, LeastSquares};
pub use minres::{
    minres, solve_symmetric_indefinite, SparseSymmetric, SymmetricBuilder, SymmetricOperator,
    SymmetricSolve,
};
pub use roots::{polynomial_roots, root_clusters};
