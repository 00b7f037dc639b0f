//! Bivariate constant-coefficient models
//! `sum_{k,l=1..m} p_{kl} f_{i+(k-1)n, j+(l-1)n} = 0` with `p_{mm} = 1`.

use crate::error::{Error, Result};
use crate::grid::SampledGrid2D;
use crate::numerics::dense::lstsq_columns;
use crate::scalar::{all_finite, Real};

#[derive(Debug, Clone, PartialEq)]
pub struct Model2D<T> {
    pub m: usize,
    pub n: usize,
    /// Row-major `m x m`; `p[(k-1) m + (l-1)]` multiplies the sample offset by
    /// `(k-1) n` in x and `(l-1) n` in y.
    pub p: Vec<T>,
}

impl<T: Real> Model2D<T> {
    pub fn new(m: usize, n: usize, p: Vec<T>) -> Result<Self> {
        if m < 2 {
            return Err(Error::InvalidParameter("2-D models need order m >= 2".into()));
        }
        if n == 0 {
            return Err(Error::InvalidParameter("stride n must be >= 1".into()));
        }
        if p.len() != m * m {
            return Err(Error::DimensionMismatch(format!(
                "order {m} needs {} coefficients, got {}",
                m * m,
                p.len()
            )));
        }
        if !all_finite(&p) {
            return Err(Error::NonFinite("model coefficients".into()));
        }
        if p[m * m - 1] != T::one() {
            return Err(Error::InvalidParameter("corner coefficient p_mm must be 1".into()));
        }
        Ok(Self { m, n, p })
    }

    pub fn from_rows(n: usize, rows: &[Vec<T>]) -> Result<Self> {
        let m = rows.len();
        if rows.iter().any(|r| r.len() != m) {
            return Err(Error::DimensionMismatch("coefficient array must be square".into()));
        }
        Self::new(m, n, rows.concat())
    }

    /// `p_{kl}` with 1-based `k, l`.
    #[inline]
    pub fn coeff(&self, k: usize, l: usize) -> T {
        self.p[(k - 1) * self.m + (l - 1)]
    }

    pub fn rows(&self) -> Vec<Vec<T>> {
        self.p.chunks(self.m).map(|r| r.to_vec()).collect()
    }

    /// Window extent in samples, `(m - 1) n`.
    pub fn span(&self) -> usize {
        (self.m - 1) * self.n
    }

    pub fn transpose(&self) -> Self {
        let m = self.m;
        let mut p = vec![T::zero(); m * m];
        for k in 0..m {
            for l in 0..m {
                p[l * m + k] = self.p[k * m + l];
            }
        }
        Self { m, n: self.n, p }
    }

    /// Frobenius norm of the coefficient array.
    pub fn norm(&self) -> T {
        crate::scalar::norm2(&self.p)
    }

    /// Model residual of the window anchored at `(i, j)` of an `nx`-wide
    /// row-major array.
    pub fn window_residual(&self, values: &[T], nx: usize, i: usize, j: usize) -> T {
        let mut s = T::zero();
        for k in 0..self.m {
            for l in 0..self.m {
                let c = self.p[k * self.m + l];
                if c != T::zero() {
                    s += c * values[(j + l * self.n) * nx + i + k * self.n];
                }
            }
        }
        s
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModelFit2D<T> {
    pub model: Model2D<T>,
    /// Objective `I2` at the fitted coefficients (without the ridge term).
    pub residual: T,
    pub rows: usize,
    pub rank: usize,
    pub rank_deficient: bool,
}

fn window_count(nx: usize, ny: usize, span: usize) -> usize {
    if nx <= span || ny <= span {
        0
    } else {
        (nx - span) * (ny - span)
    }
}

/// Least-squares fit of the `m^2 - 1` free coefficients over every full window.
pub fn fit_model_2d<T: Real>(grid: &SampledGrid2D<T>, m: usize, n: usize, ridge: T) -> Result<ModelFit2D<T>> {
    if m < 2 || n == 0 {
        return Err(Error::InvalidParameter("need m >= 2 and n >= 1".into()));
    }
    if !(ridge >= T::zero()) || !ridge.is_finite() {
        return Err(Error::InvalidParameter("ridge must be >= 0".into()));
    }
    let span = (m - 1) * n;
    let rows = window_count(grid.nx, grid.ny, span);
    let unknowns = m * m - 1;
    if rows < unknowns {
        return Err(Error::InsufficientData(format!(
            "{rows} model windows for {unknowns} unknown coefficients"
        )));
    }
    let total = if ridge > T::zero() { rows + unknowns } else { rows };
    let mut cols = vec![vec![T::zero(); total]; unknowns];
    let mut rhs = vec![T::zero(); total];
    let mut r = 0;
    for j in 0..grid.ny - span {
        for i in 0..grid.nx - span {
            for k in 0..m {
                for l in 0..m {
                    let v = grid.get(i + k * n, j + l * n);
                    let idx = k * m + l;
                    if idx == unknowns {
                        rhs[r] = -v;
                    } else {
                        cols[idx][r] = v;
                    }
                }
            }
            r += 1;
        }
    }
    if ridge > T::zero() {
        let w = ridge.sqrt();
        for (u, col) in cols.iter_mut().enumerate() {
            col[rows + u] = w;
        }
    }
    let ls = lstsq_columns(cols, total, rhs, None);
    let mut p = ls.x;
    p.push(T::one());
    if !all_finite(&p) {
        return Err(Error::Degenerate("model fit produced non-finite coefficients".into()));
    }
    let model = Model2D::new(m, n, p)?;
    let residual = model_residual_2d(grid, &model)?;
    Ok(ModelFit2D {
        model,
        residual,
        rows,
        rank: ls.rank,
        rank_deficient: ls.rank_deficient,
    })
}

/// Objective `I2`: sum of squared window residuals.
pub fn model_residual_2d<T: Real>(grid: &SampledGrid2D<T>, model: &Model2D<T>) -> Result<T> {
    let span = model.span();
    if window_count(grid.nx, grid.ny, span) == 0 {
        return Err(Error::InsufficientData("grid smaller than one model window".into()));
    }
    let mut s = T::zero();
    for j in 0..grid.ny - span {
        for i in 0..grid.nx - span {
            let r = model.window_residual(&grid.values, grid.nx, i, j);
            s += r * r;
        }
    }
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(n: usize, f: impl Fn(usize, usize) -> f64) -> SampledGrid2D<f64> {
        let mut v = Vec::new();
        for j in 0..n {
            for i in 0..n {
                v.push(f(i, j));
            }
        }
        SampledGrid2D::new(0.0, 0.0, 1.0, n, n, v).unwrap()
    }

    #[test]
    fn constant_data_window_sum() {
        let g = grid(6, |_, _| 1.0);
        let fit = fit_model_2d(&g, 2, 1, 0.0).unwrap();
        let s: f64 = fit.model.p.iter().sum();
        assert!(s.abs() < 1e-12);
        assert!(fit.residual <= 1e-18);
        assert!(fit.rank_deficient);
    }

    #[test]
    fn separable_exponential() {
        let g = grid(8, |i, j| 2f64.powi(i as i32) * 3f64.powi(j as i32));
        let fit = fit_model_2d(&g, 2, 1, 0.0).unwrap();
        let scale: f64 = g.values.iter().map(|v| v * v).sum();
        assert!(fit.residual <= 1e-12 * scale);
        // row recurrence f_{i+1,j+1} = 2 f_{i,j+1}
        let exact = Model2D::new(2, 1, vec![0.0, -2.0, 0.0, 1.0]).unwrap();
        assert!(model_residual_2d(&g, &exact).unwrap() <= 1e-20 * scale);
    }

    #[test]
    fn zero_grid_residual() {
        let g = grid(5, |_, _| 0.0);
        let model = Model2D::new(2, 1, vec![0.3, -0.1, 0.2, 1.0]).unwrap();
        assert_eq!(model_residual_2d(&g, &model).unwrap(), 0.0);
    }

    #[test]
    fn stride_windows() {
        let g = grid(9, |i, j| ((i * 3 + j * 5) % 7) as f64);
        let fit = fit_model_2d(&g, 3, 2, 0.0).unwrap();
        assert_eq!(fit.rows, 25);
        let pert = Model2D::new(3, 2, {
            let mut p = fit.model.p.clone();
            p[0] += 1e-3;
            p
        })
        .unwrap();
        assert!(fit.residual <= model_residual_2d(&g, &pert).unwrap());
    }

    #[test]
    fn scale_invariance() {
        let g = grid(7, |i, j| (0.3 * i as f64).sin() * (0.2 * j as f64).cos() + 0.1 * (i * j) as f64);
        let s = SampledGrid2D::new(0.0, 0.0, 1.0, 7, 7, g.values.iter().map(|v| 3.5 * v).collect()).unwrap();
        let a = fit_model_2d(&g, 3, 1, 0.0).unwrap().model;
        let b = fit_model_2d(&s, 3, 1, 0.0).unwrap().model;
        for (x, y) in a.p.iter().zip(&b.p) {
            assert!((x - y).abs() < 1e-8 * (1.0 + x.abs()));
        }
    }

    #[test]
    fn rejects_bad_models() {
        assert!(Model2D::new(1, 1, vec![1.0]).is_err());
        assert!(Model2D::new(2, 1, vec![0.0, 0.0, 0.0, 2.0]).is_err());
        let g = grid(3, |_, _| 1.0);
        assert!(matches!(fit_model_2d(&g, 3, 1, 0.0), Err(Error::InsufficientData(_))));
    }
}
