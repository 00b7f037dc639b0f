use crate::error::{Error, Result};
use crate::grid::{interval_count, SampledGrid2D};
use crate::model2d::Model2D;
use crate::numerics::dense::lstsq_columns;
use crate::scalar::{all_finite, norm2, Real};

use super::{coefficient_count, knot_window};

/// Tensor-product model splines on an `kx x ky` coefficient array whose
/// array index `a` is coefficient index `a - 1`.
///
/// Members are seeded by unit values on the free band
/// `{(a, b): min(a, b) <= m - 2}` and completed by the corner recurrence.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelSplineBasis2D<T> {
    pub model: Model2D<T>,
    pub x0: T,
    pub y0: T,
    pub d: T,
    pub kx: usize,
    pub ky: usize,
    /// Seed position of each member, as array indices.
    pub band: Vec<(usize, usize)>,
    /// Member coefficient arrays, `b * kx + a`.
    pub arrays: Vec<Vec<T>>,
}

impl<T: Real> ModelSplineBasis2D<T> {
    pub fn len(&self) -> usize {
        self.arrays.len()
    }

    pub fn is_empty(&self) -> bool {
        self.arrays.is_empty()
    }

    /// `kx ky - (kx - m + 1)(ky - m + 1)`
    pub fn expected_size(m: usize, kx: usize, ky: usize) -> usize {
        kx * ky - (kx + 1 - m) * (ky + 1 - m)
    }

    pub fn eval_member(&self, idx: usize, x: T, y: T) -> Result<T> {
        eval_array(&self.arrays[idx], self.kx, self.ky, self.x0, self.y0, self.d, x, y)
    }
}

fn band_positions(m: usize, kx: usize, ky: usize) -> Vec<(usize, usize)> {
    let mut band = Vec::new();
    for b in 0..ky {
        for a in 0..kx {
            if a.min(b) + 2 <= m {
                band.push((a, b));
            }
        }
    }
    band
}

/// Solves the window ending at `(a, b)` for its corner entry; `None` if a
/// window entry with a nonzero coefficient lies outside the array.
#[inline]
fn corner_value<T: Real>(model: &Model2D<T>, c: &[T], kx: usize, a: usize, b: usize) -> Option<T> {
    let m = model.m;
    let mut s = T::zero();
    for l in 0..m {
        for k in 0..m {
            if k == m - 1 && l == m - 1 {
                continue;
            }
            let p = model.p[k * m + l];
            if p == T::zero() {
                continue;
            }
            let (ia, ib) = ((a + k) as i64 - (m - 1) as i64, (b + l) as i64 - (m - 1) as i64);
            if ia < 0 || ib < 0 {
                return None;
            }
            s += p * c[ib as usize * kx + ia as usize];
        }
    }
    Some(-s)
}

#[allow(clippy::too_many_arguments)]
fn eval_array<T: Real>(c: &[T], kx: usize, ky: usize, x0: T, y0: T, d: T, x: T, y: T) -> Result<T> {
    let (fx, wx) = knot_window((x - x0) / d);
    let (fy, wy) = knot_window((y - y0) / d);
    let mut s = T::zero();
    for (l, &wl) in wy.iter().enumerate() {
        if wl == T::zero() {
            continue;
        }
        let b = fy + l as i64 + 1;
        for (k, &wk) in wx.iter().enumerate() {
            if wk == T::zero() {
                continue;
            }
            let a = fx + k as i64 + 1;
            if a < 0 || b < 0 || a as usize >= kx || b as usize >= ky {
                return Err(Error::Domain(format!(
                    "({x}, {y}) lies outside the coefficient window"
                )));
            }
            s += wk * wl * c[b as usize * kx + a as usize];
        }
    }
    Ok(s)
}

/// Builds all members for a `kx x ky` coefficient array starting at knot
/// `(x0, y0)` with mesh `d`.
pub fn build_spline_basis_2d<T: Real>(
    model: &Model2D<T>,
    x0: T,
    y0: T,
    d: T,
    kx: usize,
    ky: usize,
) -> Result<ModelSplineBasis2D<T>> {
    let m = model.m;
    if !(d > T::zero()) || !d.is_finite() {
        return Err(Error::InvalidParameter("knot mesh must be positive".into()));
    }
    if kx < m + 2 || ky < m + 2 {
        return Err(Error::InsufficientData(format!(
            "coefficient array {kx} x {ky} too small for order {m} (need {} per side)",
            m + 2
        )));
    }
    let band = band_positions(m, kx, ky);
    let mut arrays = Vec::with_capacity(band.len());
    for &(sa, sb) in &band {
        let mut c = vec![T::zero(); kx * ky];
        c[sb * kx + sa] = T::one();
        for b in m - 1..ky {
            for a in m - 1..kx {
                let v = corner_value(model, &c, kx, a, b).expect("interior windows lie inside the array");
                if !v.is_finite() {
                    return Err(Error::Overflow {
                        x: (x0 + T::from_usize_lossy(a) * d - d).as_f64(),
                    });
                }
                c[b * kx + a] = v;
            }
        }
        arrays.push(c);
    }
    Ok(ModelSplineBasis2D {
        model: model.clone(),
        x0,
        y0,
        d,
        kx,
        ky,
        band,
        arrays,
    })
}

/// Fitted surface `sum_{a,b} c_{ab} B((x - x0)/d - a + 1) B((y - y0)/d - b + 1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct FittedSpline2D<T> {
    pub model: Model2D<T>,
    pub x0: T,
    pub y0: T,
    pub d: T,
    pub kx: usize,
    pub ky: usize,
    pub coeffs: Vec<T>,
    pub weights: Vec<T>,
    /// Root-mean-square misfit on the data nodes.
    pub rms: T,
    pub rank_deficient: bool,
}

impl<T: Real> FittedSpline2D<T> {
    pub fn eval(&self, x: T, y: T) -> Result<T> {
        eval_array(&self.coeffs, self.kx, self.ky, self.x0, self.y0, self.d, x, y)
    }

    /// Samples on the lattice `(x0 + i h, y0 + j h)`.
    pub fn sample(&self, x0: T, y0: T, h: T, nx: usize, ny: usize) -> Result<SampledGrid2D<T>> {
        let mut v = Vec::with_capacity(nx * ny);
        for j in 0..ny {
            let y = y0 + T::from_usize_lossy(j) * h;
            for i in 0..nx {
                v.push(self.eval(x0 + T::from_usize_lossy(i) * h, y)?);
            }
        }
        SampledGrid2D::new(x0, y0, h, nx, ny, v)
    }

    /// Largest window residual of the coefficient array relative to `|P| max|c|`.
    pub fn coefficient_model_residual(&self) -> T {
        let m = self.model.m;
        let mut worst = T::zero();
        let scale = self.model.norm() * self.coeffs.iter().fold(T::zero(), |a, v| a.max(v.abs()));
        if scale == T::zero() {
            return T::zero();
        }
        for b in 0..=self.ky - m {
            for a in 0..=self.kx - m {
                let mut r = T::zero();
                for k in 0..m {
                    for l in 0..m {
                        r += self.model.p[k * m + l] * self.coeffs[(b + l) * self.kx + a + k];
                    }
                }
                worst = worst.max(r.abs());
            }
        }
        worst / scale
    }
}

/// Design columns of `arrays` evaluated on the data nodes of `grid`.
fn design_columns<T: Real>(
    arrays: &[Vec<T>],
    kx: usize,
    ky: usize,
    x0: T,
    y0: T,
    d: T,
    grid: &SampledGrid2D<T>,
) -> Result<Vec<Vec<T>>> {
    let win = |origin: T, coord: T, k: usize| -> Result<(usize, [T; 4])> {
        let (f, w) = knot_window((coord - origin) / d);
        let a0 = f + 1;
        for (q, &wq) in w.iter().enumerate() {
            let a = a0 + q as i64;
            if wq != T::zero() && (a < 0 || a as usize >= k) {
                return Err(Error::Domain(format!("node {coord} lies outside the coefficient window")));
            }
        }
        Ok((a0.max(0) as usize, shift_weights(a0, w)))
    };
    let xw = (0..grid.nx)
        .map(|i| win(x0, grid.x(i as i64), kx))
        .collect::<Result<Vec<_>>>()?;
    let yw = (0..grid.ny)
        .map(|j| win(y0, grid.y(j as i64), ky))
        .collect::<Result<Vec<_>>>()?;
    let rows = grid.nx * grid.ny;
    let mut cols = Vec::with_capacity(arrays.len());
    for c in arrays {
        let mut col = Vec::with_capacity(rows);
        for &(b0, ref wy) in &yw {
            for &(a0, ref wx) in &xw {
                let mut s = T::zero();
                for (l, &wl) in wy.iter().enumerate() {
                    if wl == T::zero() {
                        continue;
                    }
                    let row = (b0 + l) * kx;
                    for (k, &wk) in wx.iter().enumerate() {
                        if wk != T::zero() {
                            s += wk * wl * c[row + a0 + k];
                        }
                    }
                }
                col.push(s);
            }
        }
        cols.push(col);
    }
    Ok(cols)
}

/// Re-bases window weights so a negative first index (zero weight there) is dropped.
fn shift_weights<T: Real>(a0: i64, w: [T; 4]) -> [T; 4] {
    if a0 >= 0 {
        return w;
    }
    let drop = (-a0) as usize;
    let mut out = [T::zero(); 4];
    out[..4 - drop].copy_from_slice(&w[drop..]);
    out
}

fn solve_weights<T: Real>(mut cols: Vec<Vec<T>>, rows: usize, values: &[T], ridge: T) -> (Vec<T>, bool) {
    let count = cols.len();
    let mut scales = Vec::with_capacity(count);
    for col in cols.iter_mut() {
        let nrm = norm2(col);
        let s = if nrm > T::zero() { nrm } else { T::one() };
        for v in col.iter_mut() {
            *v /= s;
        }
        scales.push(s);
    }
    let mut rhs = values.to_vec();
    let total = if ridge > T::zero() {
        let w = ridge.sqrt();
        for (u, col) in cols.iter_mut().enumerate() {
            col.resize(rows + count, T::zero());
            col[rows + u] = w;
        }
        rhs.resize(rows + count, T::zero());
        rows + count
    } else {
        rows
    };
    let ls = lstsq_columns(cols, total, rhs, None);
    let w = ls.x.iter().zip(&scales).map(|(&x, &s)| x / s).collect();
    (w, ls.rank_deficient)
}

fn combine<T: Real>(arrays: &[Vec<T>], weights: &[T], len: usize) -> Vec<T> {
    let mut c = vec![T::zero(); len];
    for (arr, &w) in arrays.iter().zip(weights) {
        if w == T::zero() {
            continue;
        }
        for (ci, &v) in c.iter_mut().zip(arr) {
            *ci += w * v;
        }
    }
    c
}

fn finish_fit<T: Real>(
    basis: &ModelSplineBasis2D<T>,
    grid: &SampledGrid2D<T>,
    cols: &[Vec<T>],
    weights: Vec<T>,
    rank_deficient: bool,
) -> Result<FittedSpline2D<T>> {
    let coeffs = combine(&basis.arrays, &weights, basis.kx * basis.ky);
    if !all_finite(&coeffs) {
        return Err(Error::Degenerate("non-finite spline coefficients".into()));
    }
    let mut sq = T::zero();
    for (r, &f) in grid.values.iter().enumerate() {
        let g: T = cols.iter().zip(&weights).map(|(c, &w)| c[r] * w).sum();
        sq += (g - f) * (g - f);
    }
    Ok(FittedSpline2D {
        model: basis.model.clone(),
        x0: basis.x0,
        y0: basis.y0,
        d: basis.d,
        kx: basis.kx,
        ky: basis.ky,
        coeffs,
        weights,
        rms: (sq / T::from_usize_lossy(grid.values.len())).sqrt(),
        rank_deficient,
    })
}

/// Least-squares fit of the data in the span of the basis.
pub fn fit_model_spline_2d<T: Real>(grid: &SampledGrid2D<T>, basis: &ModelSplineBasis2D<T>) -> Result<FittedSpline2D<T>> {
    let rows = grid.values.len();
    if rows < basis.len() {
        return Err(Error::InsufficientData(format!(
            "{rows} nodes for {} basis functions",
            basis.len()
        )));
    }
    let cols = design_columns(&basis.arrays, basis.kx, basis.ky, basis.x0, basis.y0, basis.d, grid)?;
    let (weights, rank_deficient) = solve_weights(cols.clone(), rows, &grid.values, T::zero());
    finish_fit(basis, grid, &cols, weights, rank_deficient)
}

/// How a 2-D model-spline fit is carried beyond the data.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ExtensionStrategy<T> {
    /// Fit on the data's coefficient window, then propagate the coefficients.
    FitThenPropagate,
    /// Build the basis over the whole target window and fit with a ridge on
    /// the unit-normalized member weights.
    GlobalBand { ridge: T },
}

/// Extension of a fitted spline by coefficient propagation.
#[derive(Debug, Clone, PartialEq)]
pub struct SplineExtension2D<T> {
    pub spline: FittedSpline2D<T>,
    /// Band entries beyond the fitted window that the model leaves free; they
    /// continue their layer linearly.
    pub free_entries: usize,
}

/// Propagates the fitted coefficients forward to cover `[x0, xhi] x [y0, yhi]`.
///
/// Entries solvable by the corner recurrence are computed from it; any band
/// entries it cannot reach are extrapolated linearly along their layer.
pub fn extend_model_spline_2d<T: Real>(fitted: &FittedSpline2D<T>, xhi: T, yhi: T) -> Result<SplineExtension2D<T>> {
    let nkx = coefficient_count(xhi - fitted.x0, fitted.d)?.max(fitted.kx);
    let nky = coefficient_count(yhi - fitted.y0, fitted.d)?.max(fitted.ky);
    let (kx, ky) = (fitted.kx, fitted.ky);
    let model = &fitted.model;

    let mut coeffs = vec![T::zero(); nkx * nky];
    let mut free = 0usize;
    for b in 0..nky {
        for a in 0..nkx {
            let k = b * nkx + a;
            coeffs[k] = if a < kx && b < ky {
                fitted.coeffs[b * kx + a]
            } else if let Some(v) = corner_value(model, &coeffs, nkx, a, b) {
                v
            } else if b >= ky {
                free += 1;
                T::lit(2.0) * coeffs[k - nkx] - coeffs[k - 2 * nkx]
            } else {
                free += 1;
                T::lit(2.0) * coeffs[k - 1] - coeffs[k - 2]
            };
            if !coeffs[k].is_finite() {
                return Err(Error::Overflow {
                    x: (fitted.x0 + T::from_usize_lossy(a) * fitted.d - fitted.d).as_f64(),
                });
            }
        }
    }
    Ok(SplineExtension2D {
        spline: FittedSpline2D {
            model: model.clone(),
            x0: fitted.x0,
            y0: fitted.y0,
            d: fitted.d,
            kx: nkx,
            ky: nky,
            coeffs,
            weights: fitted.weights.clone(),
            rms: fitted.rms,
            rank_deficient: fitted.rank_deficient,
        },
        free_entries: free,
    })
}

/// Global-band fit: basis over the coefficient window of `[lo, hi]^2` fitted
/// to the data with a ridge on the normalized member weights.
pub fn fit_global_band_2d<T: Real>(
    grid: &SampledGrid2D<T>,
    model: &Model2D<T>,
    d: T,
    lo: T,
    hi: T,
    ridge: T,
) -> Result<FittedSpline2D<T>> {
    if !(ridge >= T::zero()) || !ridge.is_finite() {
        return Err(Error::InvalidParameter("ridge must be >= 0".into()));
    }
    let k = coefficient_count(hi - lo, d)?;
    let basis = build_spline_basis_2d(model, lo, lo, d, k, k)?;
    let rows = grid.values.len();
    if ridge == T::zero() && rows < basis.len() {
        return Err(Error::InsufficientData(format!(
            "{rows} nodes for {} basis functions; use a positive ridge",
            basis.len()
        )));
    }
    let cols = design_columns(&basis.arrays, basis.kx, basis.ky, basis.x0, basis.y0, basis.d, grid)?;
    let (weights, rank_deficient) = solve_weights(cols.clone(), rows, &grid.values, ridge);
    finish_fit(&basis, grid, &cols, weights, rank_deficient)
}

/// Outcome of [`approximate_extend_2d`].
#[derive(Debug, Clone, PartialEq)]
pub struct ModelSplineExtension2D<T> {
    pub grid: SampledGrid2D<T>,
    pub spline: FittedSpline2D<T>,
    pub basis_size: usize,
    pub free_entries: usize,
}

/// Fits model splines with knot mesh `d` to the data and samples the result
/// over `[lo, hi]^2` at the data mesh.
pub fn approximate_extend_2d<T: Real>(
    grid: &SampledGrid2D<T>,
    model: &Model2D<T>,
    d: T,
    lo: T,
    hi: T,
    strategy: ExtensionStrategy<T>,
) -> Result<ModelSplineExtension2D<T>> {
    let n = interval_count(lo, hi, grid.h)? + 1;
    match strategy {
        ExtensionStrategy::FitThenPropagate => {
            if lo < grid.x0 || lo < grid.y0 {
                return Err(Error::Unsupported(
                    "fit-then-propagate only extends forward; use the global-band strategy".into(),
                ));
            }
            let kx = coefficient_count(grid.x(grid.nx as i64 - 1) - grid.x0, d)?;
            let ky = coefficient_count(grid.y(grid.ny as i64 - 1) - grid.y0, d)?;
            let basis = build_spline_basis_2d(model, grid.x0, grid.y0, d, kx, ky)?;
            let fitted = fit_model_spline_2d(grid, &basis)?;
            let ext = extend_model_spline_2d(&fitted, hi, hi)?;
            let out = ext.spline.sample(lo, lo, grid.h, n, n)?;
            Ok(ModelSplineExtension2D {
                grid: out,
                spline: ext.spline,
                basis_size: basis.len(),
                free_entries: ext.free_entries,
            })
        }
        ExtensionStrategy::GlobalBand { ridge } => {
            let spline = fit_global_band_2d(grid, model, d, lo, hi, ridge)?;
            let out = spline.sample(lo, lo, grid.h, n, n)?;
            let basis_size = ModelSplineBasis2D::<T>::expected_size(model.m, spline.kx, spline.ky);
            Ok(ModelSplineExtension2D {
                grid: out,
                spline,
                basis_size,
                free_entries: 0,
            })
        }
    }
}
