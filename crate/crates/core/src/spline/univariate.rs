use crate::error::{Error, Result};
use crate::grid::{interval_count, SampledGrid1D};
use crate::model1d::Model1D;
use crate::numerics::dense::lstsq_columns;
use crate::scalar::{norm2, Real};

use super::knot_window;

/// Backward propagation divides by `p_1`; smaller magnitudes are rejected.
pub const BACKWARD_PIVOT_TOL: f64 = 1e-10;

/// Coefficients `c_i` for `i = first .. first + values.len()`.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientSequence<T> {
    pub first: i64,
    pub values: Vec<T>,
}

impl<T: Real> CoefficientSequence<T> {
    pub fn last(&self) -> i64 {
        self.first + self.values.len() as i64 - 1
    }

    pub fn get(&self, i: i64) -> Option<T> {
        if i < self.first {
            return None;
        }
        self.values.get((i - self.first) as usize).copied()
    }

    /// Grows the sequence to cover `[lo, hi]` using
    /// `c_{i+m+1} = sum_k p_k c_{i+k}` forward and its inverse backward.
    pub fn extend_to(&mut self, p: &[T], lo: i64, hi: i64) -> Result<()> {
        let m = p.len() as i64;
        if (self.values.len() as i64) < m {
            return Err(Error::InsufficientData("sequence shorter than the model order".into()));
        }
        while self.last() < hi {
            let n = self.values.len();
            let base = n - m as usize;
            let mut s = T::zero();
            for (k, &pk) in p.iter().enumerate() {
                s += pk * self.values[base + k];
            }
            if !s.is_finite() {
                return Err(Error::Overflow {
                    x: (self.last() + 1) as f64,
                });
            }
            self.values.push(s);
        }
        if self.first > lo {
            let p1 = p[0];
            let scale = p.iter().fold(T::zero(), |a, v| a.max(v.abs())).max(T::one());
            if p1.abs() <= T::lit(BACKWARD_PIVOT_TOL) * scale {
                return Err(Error::SingularPivot { index: self.first - 1 });
            }
            let need = (self.first - lo) as usize;
            let mu = m as usize;
            let mut cur = std::collections::VecDeque::from(std::mem::take(&mut self.values));
            for step in 0..need {
                // new head c_{i+1} = (c_{i+m+1} - sum_{k>=2} p_k c_{i+k}) / p_1
                let mut r = cur[mu - 1];
                for k in 2..=mu {
                    r -= p[k - 1] * cur[k - 2];
                }
                let v = r / p1;
                if !v.is_finite() {
                    return Err(Error::Overflow {
                        x: (self.first - step as i64 - 1) as f64,
                    });
                }
                cur.push_front(v);
            }
            self.values = cur.into();
            self.first -= need as i64;
        }
        Ok(())
    }
}

/// `m` model sequences seeded by unit vectors on indices `-1 ..= m-2`, plus
/// optional fractional shifts of the resulting splines.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelSplineBasis1D<T> {
    /// Recurrence coefficients `p_1..p_m`.
    pub p: Vec<T>,
    pub origin: T,
    pub d: T,
    /// Coefficient count `K` (indices `-1 ..= K-2`).
    pub count: usize,
    pub sequences: Vec<CoefficientSequence<T>>,
    /// Shift offsets `tau` in units of `d`; member `S_j(x - tau d)`.
    pub shifts: Vec<T>,
}

impl<T: Real> ModelSplineBasis1D<T> {
    pub fn order(&self) -> usize {
        self.p.len()
    }

    /// Total number of basis functions, `m (1 + shifts)`.
    pub fn len(&self) -> usize {
        self.order() * (1 + self.shifts.len())
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn shift_of(&self, s: usize) -> T {
        if s == 0 {
            T::zero()
        } else {
            self.shifts[s - 1]
        }
    }

    /// Value of member `idx` (ordered shift-major) at `x`.
    pub fn eval_member(&self, idx: usize, x: T) -> Result<T> {
        let m = self.order();
        let seq = &self.sequences[idx % m];
        eval_sequence(seq, self.origin, self.d, self.shift_of(idx / m), x)
    }
}

fn eval_sequence<T: Real>(seq: &CoefficientSequence<T>, origin: T, d: T, shift: T, x: T) -> Result<T> {
    let t = (x - origin) / d - shift;
    let (first, w) = knot_window(t);
    let mut s = T::zero();
    for (k, &wk) in w.iter().enumerate() {
        if wk == T::zero() {
            continue;
        }
        let c = seq
            .get(first + k as i64)
            .ok_or_else(|| Error::Domain(format!("x = {x} lies outside the coefficient window")))?;
        s += wk * c;
    }
    Ok(s)
}

/// Builds the basis for a constant model with knot mesh `d` starting at `origin`.
pub fn build_spline_basis_1d<T: Real>(
    model: &Model1D<T>,
    origin: T,
    d: T,
    count: usize,
    shifts: &[T],
) -> Result<ModelSplineBasis1D<T>> {
    if !model.kind.is_constant() {
        return Err(Error::InvalidParameter("model splines need a constant-coefficient model".into()));
    }
    if !(d > T::zero()) || !d.is_finite() {
        return Err(Error::InvalidParameter("knot mesh must be positive".into()));
    }
    let m = model.m;
    if count < m + 2 {
        return Err(Error::InsufficientData(format!(
            "{count} coefficients for an order-{m} model (need at least {})",
            m + 2
        )));
    }
    if shifts.iter().any(|&s| !(s > T::zero() && s < T::one())) {
        return Err(Error::InvalidParameter("shift offsets must lie in (0, 1)".into()));
    }
    let last = count as i64 - 2;
    let lo = if shifts.is_empty() { -1 } else { -2 };
    let mut sequences = Vec::with_capacity(m);
    for j in 0..m {
        let mut values = vec![T::zero(); m];
        values[j] = T::one();
        let mut seq = CoefficientSequence { first: -1, values };
        seq.extend_to(&model.p, lo, last)?;
        sequences.push(seq);
    }
    Ok(ModelSplineBasis1D {
        p: model.p.clone(),
        origin,
        d,
        count,
        sequences,
        shifts: shifts.to_vec(),
    })
}

/// A fitted model spline `sum_s sum_i c^{(s)}_i B((x - origin)/d - tau_s - i)`.
#[derive(Debug, Clone, PartialEq)]
pub struct FittedSpline1D<T> {
    pub p: Vec<T>,
    pub origin: T,
    pub d: T,
    /// Shift offsets, the first being 0.
    pub shifts: Vec<T>,
    pub coeffs: Vec<CoefficientSequence<T>>,
    /// Weights of the basis members.
    pub weights: Vec<T>,
    pub rms: T,
    pub rank_deficient: bool,
}

impl<T: Real> FittedSpline1D<T> {
    pub fn eval(&self, x: T) -> Result<T> {
        let mut s = T::zero();
        for (seq, &tau) in self.coeffs.iter().zip(&self.shifts) {
            s += eval_sequence(seq, self.origin, self.d, tau, x)?;
        }
        Ok(s)
    }

    /// Model in coefficient space (stride 1).
    pub fn model(&self) -> Result<Model1D<T>> {
        Model1D::constant(1, self.p.clone())
    }
}

/// Least-squares fit of the data in the span of the basis.
pub fn fit_model_spline_1d<T: Real>(grid: &SampledGrid1D<T>, basis: &ModelSplineBasis1D<T>) -> Result<FittedSpline1D<T>> {
    let count = basis.len();
    let rows = grid.len();
    if rows < count {
        return Err(Error::InsufficientData(format!("{rows} nodes for {count} basis functions")));
    }
    let xs = grid.nodes();
    let mut cols = Vec::with_capacity(count);
    let mut scales = Vec::with_capacity(count);
    for idx in 0..count {
        let mut col = xs
            .iter()
            .map(|&x| basis.eval_member(idx, x))
            .collect::<Result<Vec<T>>>()?;
        let nrm = norm2(&col);
        let s = if nrm > T::zero() { nrm } else { T::one() };
        for v in col.iter_mut() {
            *v /= s;
        }
        cols.push(col);
        scales.push(s);
    }
    let ls = lstsq_columns(cols, rows, grid.values.clone(), None);
    if ls.rank == 0 && grid.values.iter().any(|v| *v != T::zero()) {
        return Err(Error::Degenerate("basis vanishes on the data nodes".into()));
    }
    let weights: Vec<T> = ls.x.iter().zip(&scales).map(|(&w, &s)| w / s).collect();
    let m = basis.order();
    let mut shifts = vec![T::zero()];
    shifts.extend_from_slice(&basis.shifts);
    let coeffs = (0..shifts.len())
        .map(|s| combine(&basis.sequences, &weights[s * m..(s + 1) * m]))
        .collect();
    let mut fitted = FittedSpline1D {
        p: basis.p.clone(),
        origin: basis.origin,
        d: basis.d,
        shifts,
        coeffs,
        weights,
        rms: T::zero(),
        rank_deficient: ls.rank_deficient,
    };
    let mut sq = T::zero();
    for (k, &x) in xs.iter().enumerate() {
        let e = fitted.eval(x)? - grid.values[k];
        sq += e * e;
    }
    fitted.rms = (sq / T::from_usize_lossy(rows)).sqrt();
    Ok(fitted)
}

fn combine<T: Real>(seqs: &[CoefficientSequence<T>], w: &[T]) -> CoefficientSequence<T> {
    let first = seqs[0].first;
    let mut values = vec![T::zero(); seqs[0].values.len()];
    for (seq, &wj) in seqs.iter().zip(w) {
        for (v, &c) in values.iter_mut().zip(&seq.values) {
            *v += wj * c;
        }
    }
    CoefficientSequence { first, values }
}

/// Samples the fitted spline on `[lo, hi]` with mesh `h`, propagating the
/// coefficients as far as needed.
pub fn extend_model_spline_1d<T: Real>(fitted: &FittedSpline1D<T>, lo: T, hi: T, h: T) -> Result<SampledGrid1D<T>> {
    let n = interval_count(lo, hi, h)?;
    let mut ext = fitted.clone();
    for (seq, &tau) in ext.coeffs.iter_mut().zip(&fitted.shifts) {
        let t_lo = (lo - fitted.origin) / fitted.d - tau;
        let t_hi = (hi - fitted.origin) / fitted.d - tau;
        let need_lo = t_lo.floor().to_i64().unwrap_or(i64::MIN / 2) - 1;
        let need_hi = t_hi.floor().to_i64().unwrap_or(i64::MAX / 2) + 2;
        seq.extend_to(&fitted.p, need_lo.min(seq.first), need_hi.max(seq.last()))?;
    }
    let values = (0..=n)
        .map(|k| ext.eval(lo + T::from_usize_lossy(k) * h))
        .collect::<Result<Vec<T>>>()?;
    SampledGrid1D::new(lo, h, values)
}
