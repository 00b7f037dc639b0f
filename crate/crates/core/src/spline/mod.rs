//! Model splines: cubic B-spline combinations whose coefficients satisfy a
//! constant-coefficient model, so the spline itself satisfies the model.
//!
//! Coefficient `i` multiplies `B((x - origin) / d - i)`; the coefficients
//! covering `[origin, origin + w]` are `i = -1 ..= ceil(w / d) + 1`.

mod bivariate;
mod univariate;

pub use bivariate::{
    approximate_extend_2d, build_spline_basis_2d, extend_model_spline_2d, fit_global_band_2d, fit_model_spline_2d,
    ExtensionStrategy, FittedSpline2D, ModelSplineBasis2D, ModelSplineExtension2D, SplineExtension2D,
};
pub use univariate::{
    build_spline_basis_1d, extend_model_spline_1d, fit_model_spline_1d, CoefficientSequence, FittedSpline1D,
    ModelSplineBasis1D, BACKWARD_PIVOT_TOL,
};

use crate::error::{Error, Result};
use crate::model1d::Model1D;
use crate::model2d::Model2D;
use crate::numerics::bspline::cubic_bspline;
use crate::numerics::dense::lstsq_columns;
use crate::scalar::Real;

/// Number of coefficients covering an interval of width `w` with knot mesh `d`.
pub fn coefficient_count<T: Real>(w: T, d: T) -> Result<usize> {
    if !(d > T::zero()) || !d.is_finite() || !(w >= T::zero()) {
        return Err(Error::InvalidParameter("knot mesh must be positive".into()));
    }
    let r = w / d;
    let k = r.round();
    let cells = if (r - k).abs() <= T::lit(8.0) * T::epsilon() * r.max(T::one()) {
        k
    } else {
        r.ceil()
    };
    cells
        .to_usize()
        .map(|c| c + 3)
        .ok_or_else(|| Error::InvalidParameter("too many spline coefficients".into()))
}

/// The four coefficient indices whose B-splines are nonzero near `t`, with weights.
#[inline]
pub(crate) fn knot_window<T: Real>(t: T) -> (i64, [T; 4]) {
    let base = t.floor().to_i64().unwrap_or(i64::MIN / 2);
    let first = base - 1;
    let mut w = [T::zero(); 4];
    for (k, wk) in w.iter_mut().enumerate() {
        *wk = cubic_bspline(t - T::from_i64_lossy(first + k as i64));
    }
    (first, w)
}

/// Least-squares cubic B-spline coefficients (indices `-1 ..= K-2`) of samples
/// `(xs, ys)` on knots `origin + i d`.
pub fn bspline_coefficients_1d<T: Real>(xs: &[T], ys: &[T], origin: T, d: T, count: usize) -> Result<Vec<T>> {
    if xs.len() != ys.len() {
        return Err(Error::DimensionMismatch("abscissae and values differ in length".into()));
    }
    let rows = xs.len();
    let mut cols = vec![vec![T::zero(); rows]; count];
    for (r, &x) in xs.iter().enumerate() {
        let (first, w) = knot_window((x - origin) / d);
        for (k, &wk) in w.iter().enumerate() {
            let a = first + k as i64 + 1;
            if wk != T::zero() {
                if a < 0 || a as usize >= count {
                    return Err(Error::Domain(format!("sample {x} outside the coefficient window")));
                }
                cols[a as usize][r] = wk;
            }
        }
    }
    let ls = lstsq_columns(cols, rows, ys.to_vec(), None);
    if ls.rank_deficient {
        return Err(Error::Degenerate("samples do not determine every coefficient".into()));
    }
    Ok(ls.x)
}

/// Largest `|g(x + (m+1) d) - sum_k p_k g(x + k d)|` over the sample points.
pub fn verify_model_identity_1d<T: Real>(
    g: impl Fn(T) -> Result<T>,
    model: &Model1D<T>,
    d: T,
    samples: &[T],
) -> Result<T> {
    if !model.kind.is_constant() {
        return Err(Error::InvalidParameter("model splines need a constant model".into()));
    }
    let m = model.m;
    let mut worst = T::zero();
    for &x in samples {
        let mut r = g(x + T::from_usize_lossy(m + 1) * d)?;
        for k in 1..=m {
            r -= model.p[k - 1] * g(x + T::from_usize_lossy(k) * d)?;
        }
        worst = worst.max(r.abs());
    }
    Ok(worst)
}

/// Largest `|sum_{k,l} p_{kl} g(x + k d, y + l d)|` over the sample points.
pub fn verify_model_identity_2d<T: Real>(
    g: impl Fn(T, T) -> Result<T>,
    model: &Model2D<T>,
    d: T,
    samples: &[(T, T)],
) -> Result<T> {
    let m = model.m;
    let mut worst = T::zero();
    for &(x, y) in samples {
        let mut r = T::zero();
        for k in 1..=m {
            for l in 1..=m {
                let c = model.coeff(k, l);
                if c != T::zero() {
                    r += c * g(x + T::from_usize_lossy(k) * d, y + T::from_usize_lossy(l) * d)?;
                }
            }
        }
        worst = worst.max(r.abs());
    }
    Ok(worst)
}
