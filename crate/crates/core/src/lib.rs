//! Fitting linear prediction models to sampled data and extending the data
//! beyond its domain: exponential sums, smooth constrained extension in one
//! and two dimensions, model splines and model blending.
//!
//! Every engine is generic over the scalar type through [`Real`]; the aliases
//! below fix it to `f64` (and `f32` where useful).
//!
//! ```
//! use lpext::{grid::{sample_1d, NoiseSpec, TestFunction}, model1d::{fit_model_1d, CoeffKind}};
//!
//! let g = sample_1d(TestFunction::F1, 0.0, 7.0, 0.02, NoiseSpec::none()).unwrap();
//! let fit = fit_model_1d(&g, 6, 50, CoeffKind::Constant, 0.0, 0.0).unwrap();
//! assert_eq!(fit.model.p.len(), 6);
//! ```

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod blend;
pub mod error;
pub mod grid;
pub mod io;
pub mod model1d;
pub mod model2d;
pub mod numerics;
pub mod prony;
pub mod scalar;
pub mod smooth1d;
pub mod smooth2d;
pub mod spline;

pub use error::{Error, Result};
pub use scalar::Real;

pub type Grid1D = grid::SampledGrid1D<f64>;
pub type Grid2D = grid::SampledGrid2D<f64>;
pub type Model1D = model1d::Model1D<f64>;
pub type Model2D = model2d::Model2D<f64>;
pub type CoeffKind = model1d::CoeffKind<f64>;
pub type ExponentialModel = prony::ExponentialModel<f64>;
pub type SmoothExtension1D = smooth1d::SmoothExtension1D<f64>;
pub type SmoothExtension2D = smooth2d::SmoothExtension2D<f64>;
pub type ExtensionDomain2D = smooth2d::ExtensionDomain2D<f64>;
pub type FittedSpline1D = spline::FittedSpline1D<f64>;
pub type FittedSpline2D = spline::FittedSpline2D<f64>;
pub type BlendSpec = blend::BlendSpec<f64>;
pub type ModelFile = io::ModelFile<f64>;

pub type Grid1DF32 = grid::SampledGrid1D<f32>;
pub type Grid2DF32 = grid::SampledGrid2D<f32>;
pub type Model1DF32 = model1d::Model1D<f32>;
pub type Model2DF32 = model2d::Model2D<f32>;
