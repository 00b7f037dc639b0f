//! Univariate linear prediction models with constant or varying coefficients.
//!
//! A model of order `m` and stride `n` relates samples by
//!
//! ```text
//! (1 + q[m] u(x_i)) f_i = sum_{k=1..m} (p[k-1] + q[k-1] u(x_i)) f_{i-(m-k+1)n}
//! ```
//!
//! Unknowns are ordered `(p_1..p_m, q_1..q_{m+1})` in the fitting system.

use std::fmt;

use crate::error::{Error, Result};
use crate::grid::SampledGrid1D;
use crate::numerics::dense::lstsq_columns;
use crate::scalar::{all_finite, Real};

/// The varying part `u(x)` of the coefficients.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CoeffKind<T> {
    Constant,
    Linear,
    Rational { alpha: T },
}

impl<T: Real> CoeffKind<T> {
    #[inline]
    pub fn u(&self, x: T) -> T {
        match *self {
            CoeffKind::Constant => T::zero(),
            CoeffKind::Linear => x,
            CoeffKind::Rational { alpha } => (x + alpha).recip(),
        }
    }

    pub fn is_constant(&self) -> bool {
        matches!(self, CoeffKind::Constant)
    }

    /// Fails if `u` has a pole in `[lo, hi]`.
    pub fn check_interval(&self, lo: T, hi: T) -> Result<()> {
        if let CoeffKind::Rational { alpha } = *self {
            if !alpha.is_finite() {
                return Err(Error::InvalidParameter("rational alpha must be finite".into()));
            }
            let pole = -alpha;
            if pole >= lo && pole <= hi {
                return Err(Error::Domain(format!(
                    "u(x) = 1/(x + {alpha}) has a pole inside [{lo}, {hi}]"
                )));
            }
        }
        Ok(())
    }
}

impl<T: Real> fmt::Display for CoeffKind<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CoeffKind::Constant => f.write_str("const"),
            CoeffKind::Linear => f.write_str("linear"),
            CoeffKind::Rational { alpha } => write!(f, "rational:{alpha}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Model1D<T> {
    pub m: usize,
    pub n: usize,
    pub kind: CoeffKind<T>,
    /// `p_1..p_m`
    pub p: Vec<T>,
    /// `q_1..q_{m+1}`, all zero for the constant kind.
    pub q: Vec<T>,
}

impl<T: Real> Model1D<T> {
    pub fn new(m: usize, n: usize, kind: CoeffKind<T>, p: Vec<T>, q: Vec<T>) -> Result<Self> {
        if m == 0 || n == 0 {
            return Err(Error::InvalidParameter("order m and stride n must be >= 1".into()));
        }
        if p.len() != m || q.len() != m + 1 {
            return Err(Error::DimensionMismatch(format!(
                "order {m} needs {m} p and {} q coefficients, got {} and {}",
                m + 1,
                p.len(),
                q.len()
            )));
        }
        if !all_finite(&p) || !all_finite(&q) {
            return Err(Error::NonFinite("model coefficients".into()));
        }
        if kind.is_constant() && q.iter().any(|v| *v != T::zero()) {
            return Err(Error::InvalidParameter("constant models have q = 0".into()));
        }
        if let CoeffKind::Rational { alpha } = kind {
            if !alpha.is_finite() {
                return Err(Error::NonFinite("rational alpha".into()));
            }
        }
        Ok(Self { m, n, kind, p, q })
    }

    /// Constant-coefficient model with stride `n`.
    pub fn constant(n: usize, p: Vec<T>) -> Result<Self> {
        let m = p.len();
        Self::new(m, n, CoeffKind::Constant, p, vec![T::zero(); m + 1])
    }

    /// Lag coefficient `p_k + q_k u(x)` for `k = 1..=m`.
    #[inline]
    pub fn coeff(&self, k: usize, x: T) -> T {
        self.p[k - 1] + self.q[k - 1] * self.kind.u(x)
    }

    /// Multiplier `1 + q_{m+1} u(x)` of the predicted sample.
    #[inline]
    pub fn pivot(&self, x: T) -> T {
        T::one() + self.q[self.m] * self.kind.u(x)
    }

    /// Lag distance, in samples, of coefficient `k`.
    #[inline]
    pub fn lag(&self, k: usize) -> usize {
        (self.m - k + 1) * self.n
    }

    /// Span of one model window in samples (`m n`).
    pub fn reach(&self) -> usize {
        self.m * self.n
    }

    /// Model residual at node `i` of a sequence where `get(j)` returns the
    /// value at node `j` and `x` the abscissa of node `i`.
    pub fn residual_with(&self, x: T, fi: T, get: impl Fn(usize) -> T) -> T {
        let mut r = self.pivot(x) * fi;
        for k in 1..=self.m {
            r -= self.coeff(k, x) * get(k);
        }
        r
    }
}

/// Result of [`fit_model_1d`].
#[derive(Debug, Clone, PartialEq)]
pub struct ModelFit1D<T> {
    pub model: Model1D<T>,
    /// Least-squares objective `I1` at the fitted coefficients (without ridge terms).
    pub residual: T,
    pub rows: usize,
    pub rank: usize,
    /// The unregularized system was rank deficient; the minimum-norm fit was returned.
    pub rank_deficient: bool,
}

fn check_fit_inputs<T: Real>(grid: &SampledGrid1D<T>, m: usize, n: usize) -> Result<()> {
    if m == 0 || n == 0 {
        return Err(Error::InvalidParameter("order m and stride n must be >= 1".into()));
    }
    let big_n = grid.last_index();
    if big_n < m * n + m {
        return Err(Error::InsufficientData(format!(
            "{} nodes cannot fit order {m} with stride {n} (need at least {})",
            grid.len(),
            m * n + m + 1
        )));
    }
    Ok(())
}

/// Fits a model by least squares over residual rows `i = m n ..= N`,
/// minimizing `I1 + ridge_p |p|^2 + ridge_q |q|^2`.
pub fn fit_model_1d<T: Real>(
    grid: &SampledGrid1D<T>,
    m: usize,
    n: usize,
    kind: CoeffKind<T>,
    ridge_p: T,
    ridge_q: T,
) -> Result<ModelFit1D<T>> {
    check_fit_inputs(grid, m, n)?;
    if !(ridge_p >= T::zero()) || !(ridge_q >= T::zero()) {
        return Err(Error::InvalidParameter("ridge weights must be >= 0".into()));
    }
    kind.check_interval(grid.a, grid.b())?;
    let f = &grid.values;
    let big_n = grid.last_index();
    let start = m * n;
    let rows = big_n - start + 1;
    let varying = !kind.is_constant();
    let unknowns = if varying { 2 * m + 1 } else { m };

    let mut extra = Vec::new();
    for j in 0..unknowns {
        let r = if j < m { ridge_p } else { ridge_q };
        if r > T::zero() {
            extra.push((j, r.sqrt()));
        }
    }
    let total = rows + extra.len();
    let mut cols = vec![vec![T::zero(); total]; unknowns];
    let mut rhs = vec![T::zero(); total];
    for (r, i) in (start..=big_n).enumerate() {
        let ui = kind.u(grid.x(i as i64));
        for k in 1..=m {
            let lagged = f[i - (m - k + 1) * n];
            cols[k - 1][r] = lagged;
            if varying {
                cols[m + k - 1][r] = ui * lagged;
            }
        }
        if varying {
            cols[2 * m][r] = -ui * f[i];
        }
        rhs[r] = f[i];
    }
    for (e, &(j, w)) in extra.iter().enumerate() {
        cols[j][rows + e] = w;
    }
    let ls = lstsq_columns(cols, total, rhs, None);
    if !all_finite(&ls.x) {
        return Err(Error::Degenerate("model fit produced non-finite coefficients".into()));
    }
    let p = ls.x[..m].to_vec();
    let q = if varying {
        ls.x[m..].to_vec()
    } else {
        vec![T::zero(); m + 1]
    };
    let model = Model1D::new(m, n, kind, p, q)?;
    let residual = model_residual_1d(grid, &model)?;
    Ok(ModelFit1D {
        model,
        residual,
        rows,
        rank: ls.rank,
        rank_deficient: ls.rank_deficient,
    })
}

/// Objective `I1`: sum of squared model residuals over rows `m n ..= N`.
pub fn model_residual_1d<T: Real>(grid: &SampledGrid1D<T>, model: &Model1D<T>) -> Result<T> {
    check_fit_inputs(grid, model.m, model.n)?;
    let f = &grid.values;
    let mut sum = T::zero();
    for i in model.reach()..=grid.last_index() {
        let r = model.residual_with(grid.x(i as i64), f[i], |k| f[i - model.lag(k)]);
        sum += r * r;
    }
    Ok(sum)
}
