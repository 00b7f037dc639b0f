//! Sparse symmetric matrices and a MINRES solver for symmetric, possibly
//! indefinite systems.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::scalar::{all_finite, dot, norm2, Real};

/// Default relative residual tolerance.
pub const DEFAULT_RTOL: f64 = 1e-8;

/// Anything that can apply a symmetric linear map.
pub trait SymmetricOperator<T> {
    fn dim(&self) -> usize;
    /// `y = A x`
    fn apply(&self, x: &[T], y: &mut [T]);
}

/// Symmetric sparse matrix given by its upper triangle.
///
/// Stored internally as full CSR so products are a single pass.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseSymmetric<T> {
    dim: usize,
    upper: Vec<(usize, usize, T)>,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<T>,
}

impl<T: Real> SparseSymmetric<T> {
    /// Builds the matrix from upper-triangle entries `(row, col, value)` with
    /// `row <= col`. Duplicates are rejected.
    pub fn from_upper(dim: usize, entries: Vec<(usize, usize, T)>) -> Result<Self> {
        let mut seen = BTreeMap::new();
        for &(r, c, v) in &entries {
            if r >= dim || c >= dim {
                return Err(Error::DimensionMismatch(format!(
                    "entry ({r}, {c}) outside dimension {dim}"
                )));
            }
            if r > c {
                return Err(Error::InvalidParameter(format!(
                    "entry ({r}, {c}) below the diagonal"
                )));
            }
            if !v.is_finite() {
                return Err(Error::NonFinite(format!("matrix entry ({r}, {c})")));
            }
            if seen.insert((r, c), ()).is_some() {
                return Err(Error::InvalidParameter(format!("duplicate entry ({r}, {c})")));
            }
        }
        let mut upper = entries;
        upper.sort_by_key(|&(r, c, _)| (r, c));
        Ok(Self::assemble(dim, upper))
    }

    fn assemble(dim: usize, upper: Vec<(usize, usize, T)>) -> Self {
        let mut counts = vec![0usize; dim + 1];
        for &(r, c, _) in &upper {
            counts[r + 1] += 1;
            if r != c {
                counts[c + 1] += 1;
            }
        }
        for i in 0..dim {
            counts[i + 1] += counts[i];
        }
        let nnz = counts[dim];
        let mut col_idx = vec![0usize; nnz];
        let mut values = vec![T::zero(); nnz];
        let mut next = counts.clone();
        // Insert mirrored (lower) entries first so each row stays column-sorted.
        for &(r, c, v) in &upper {
            if r != c {
                let k = next[c];
                col_idx[k] = r;
                values[k] = v;
                next[c] += 1;
            }
        }
        for &(r, c, v) in &upper {
            let k = next[r];
            col_idx[k] = c;
            values[k] = v;
            next[r] += 1;
        }
        Self {
            dim,
            upper,
            row_ptr: counts,
            col_idx,
            values,
        }
    }

    pub fn dimension(&self) -> usize {
        self.dim
    }

    /// Upper-triangle entries sorted by (row, col).
    pub fn upper_entries(&self) -> &[(usize, usize, T)] {
        &self.upper
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn diagonal(&self) -> Vec<T> {
        let mut d = vec![T::zero(); self.dim];
        for &(r, c, v) in &self.upper {
            if r == c {
                d[r] = v;
            }
        }
        d
    }

    /// Entries of row `r` as `(col, value)`.
    pub fn row(&self, r: usize) -> impl Iterator<Item = (usize, T)> + '_ {
        (self.row_ptr[r]..self.row_ptr[r + 1]).map(move |k| (self.col_idx[k], self.values[k]))
    }

    /// `D A D` for a diagonal `D` given by `scale`.
    pub fn scaled(&self, scale: &[T]) -> Self {
        let upper = self
            .upper
            .iter()
            .map(|&(r, c, v)| (r, c, scale[r] * v * scale[c]))
            .collect();
        Self::assemble(self.dim, upper)
    }

    pub fn matvec(&self, x: &[T]) -> Vec<T> {
        let mut y = vec![T::zero(); self.dim];
        self.apply(x, &mut y);
        y
    }
}

impl<T: Real> SymmetricOperator<T> for SparseSymmetric<T> {
    fn dim(&self) -> usize {
        self.dim
    }

    fn apply(&self, x: &[T], y: &mut [T]) {
        for (r, yr) in y.iter_mut().enumerate().take(self.dim) {
            let mut s = T::zero();
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                s += self.values[k] * x[self.col_idx[k]];
            }
            *yr = s;
        }
    }
}

/// Accumulates symmetric entries, summing duplicates, in a deterministic order.
#[derive(Debug, Clone, Default)]
pub struct SymmetricBuilder<T> {
    dim: usize,
    entries: BTreeMap<(usize, usize), T>,
}

impl<T: Real> SymmetricBuilder<T> {
    pub fn new(dim: usize) -> Self {
        Self {
            dim,
            entries: BTreeMap::new(),
        }
    }

    /// Adds `v` at `(r, c)` (and implicitly at `(c, r)`).
    pub fn add(&mut self, r: usize, c: usize, v: T) {
        let key = if r <= c { (r, c) } else { (c, r) };
        *self.entries.entry(key).or_insert_with(T::zero) += v;
    }

    pub fn build(self) -> Result<SparseSymmetric<T>> {
        let entries = self
            .entries
            .into_iter()
            .filter(|(_, v)| *v != T::zero())
            .map(|((r, c), v)| (r, c, v))
            .collect();
        SparseSymmetric::from_upper(self.dim, entries)
    }
}

/// Outcome of an iterative symmetric solve.
#[derive(Debug, Clone, PartialEq)]
pub struct SymmetricSolve<T> {
    pub x: Vec<T>,
    /// True relative residual `|b - Ax| / |b|` of the returned iterate.
    pub residual: T,
    pub iterations: usize,
    pub converged: bool,
}

struct Cycle<T> {
    iterations: usize,
    lanczos_breakdown: bool,
    _estimate: T,
}

/// One MINRES run on `A dx = r`, accumulating into `dx`.
fn minres_cycle<T: Real, A: SymmetricOperator<T> + ?Sized>(
    a: &A,
    r0: &[T],
    dx: &mut [T],
    target: T,
    budget: usize,
) -> Cycle<T> {
    let n = r0.len();
    let beta1 = norm2(r0);
    if beta1 == T::zero() {
        return Cycle {
            iterations: 0,
            lanczos_breakdown: false,
            _estimate: T::zero(),
        };
    }
    let mut r1 = r0.to_vec();
    let mut r2 = r0.to_vec();
    let mut v = vec![T::zero(); n];
    let mut tmp = vec![T::zero(); n];
    let mut wm1 = vec![T::zero(); n];
    let mut wm2 = vec![T::zero(); n];

    let mut oldb = T::zero();
    let mut beta = beta1;
    let mut dbar = T::zero();
    let mut epsln = T::zero();
    let mut phibar = beta1;
    let mut cs = -T::one();
    let mut sn = T::zero();
    let tiny = T::epsilon() * beta1;

    for itn in 1..=budget {
        let s = T::one() / beta;
        for (vi, &ri) in v.iter_mut().zip(&r2) {
            *vi = s * ri;
        }
        a.apply(&v, &mut tmp);
        if itn >= 2 {
            let f = beta / oldb;
            for (ti, &ri) in tmp.iter_mut().zip(&r1) {
                *ti -= f * ri;
            }
        }
        let alfa = dot(&v, &tmp);
        let f = alfa / beta;
        for (ti, &ri) in tmp.iter_mut().zip(&r2) {
            *ti -= f * ri;
        }
        std::mem::swap(&mut r1, &mut r2);
        std::mem::swap(&mut r2, &mut tmp);
        oldb = beta;
        beta = norm2(&r2);

        let oldeps = epsln;
        let delta = cs * dbar + sn * alfa;
        let gbar = sn * dbar - cs * alfa;
        epsln = sn * beta;
        dbar = -cs * beta;
        let mut gamma = gbar.hypot(beta);
        if gamma == T::zero() {
            gamma = T::epsilon();
        }
        cs = gbar / gamma;
        sn = beta / gamma;
        let phi = cs * phibar;
        phibar = sn * phibar;

        let ig = T::one() / gamma;
        for i in 0..n {
            wm2[i] = (v[i] - oldeps * wm2[i] - delta * wm1[i]) * ig;
        }
        std::mem::swap(&mut wm1, &mut wm2);
        for (xi, &wi) in dx.iter_mut().zip(&wm1) {
            *xi += phi * wi;
        }

        if phibar <= target {
            return Cycle {
                iterations: itn,
                lanczos_breakdown: false,
                _estimate: phibar,
            };
        }
        if beta <= tiny {
            return Cycle {
                iterations: itn,
                lanczos_breakdown: true,
                _estimate: phibar,
            };
        }
    }
    Cycle {
        iterations: budget,
        lanczos_breakdown: false,
        _estimate: phibar,
    }
}

fn residual_vec<T: Real, A: SymmetricOperator<T> + ?Sized>(a: &A, b: &[T], x: &[T]) -> Vec<T> {
    let mut ax = vec![T::zero(); b.len()];
    a.apply(x, &mut ax);
    b.iter().zip(&ax).map(|(&bi, &ai)| bi - ai).collect()
}

/// MINRES with true-residual verification.
///
/// The short recurrence's residual estimate drifts from the true residual in
/// long runs; whenever the estimate claims convergence the true residual is
/// recomputed and, if needed, MINRES restarts on the remaining residual.
/// Non-convergence is reported through `converged = false`; a singular,
/// inconsistent system surfaces as [`Error::Breakdown`].
pub fn minres<T: Real, A: SymmetricOperator<T> + ?Sized>(
    a: &A,
    b: &[T],
    rtol: T,
    max_iter: usize,
) -> Result<SymmetricSolve<T>> {
    let n = a.dim();
    if b.len() != n {
        return Err(Error::DimensionMismatch(format!(
            "right-hand side has {} entries for dimension {n}",
            b.len()
        )));
    }
    if !(rtol > T::zero()) {
        return Err(Error::InvalidParameter("rtol must be positive".into()));
    }
    if !all_finite(b) {
        return Err(Error::NonFinite("right-hand side".into()));
    }
    let bnorm = norm2(b);
    let mut x = vec![T::zero(); n];
    if bnorm == T::zero() {
        return Ok(SymmetricSolve {
            x,
            residual: T::zero(),
            iterations: 0,
            converged: true,
        });
    }
    let goal = rtol * bnorm;
    let mut used = 0usize;
    let mut r = b.to_vec();
    let mut rnorm = bnorm;
    while used < max_iter {
        let mut dx = vec![T::zero(); n];
        let cycle = minres_cycle(a, &r, &mut dx, T::lit(0.5) * goal, max_iter - used);
        used += cycle.iterations;
        for (xi, di) in x.iter_mut().zip(&dx) {
            *xi += *di;
        }
        if !all_finite(&x) {
            return Err(Error::Breakdown("non-finite iterate".into()));
        }
        r = residual_vec(a, b, &x);
        let new_norm = norm2(&r);
        if new_norm <= goal {
            rnorm = new_norm;
            break;
        }
        let stalled = new_norm > T::lit(0.99) * rnorm;
        rnorm = new_norm;
        if cycle.lanczos_breakdown && stalled {
            return Err(Error::Breakdown(format!(
                "Krylov space exhausted with relative residual {:e}; system is singular",
                (rnorm / bnorm).as_f64()
            )));
        }
        if cycle.iterations == 0 {
            break;
        }
    }
    Ok(SymmetricSolve {
        x,
        residual: rnorm / bnorm,
        iterations: used,
        converged: rnorm <= goal,
    })
}

/// Solves `Ax = b` for symmetric, possibly indefinite `A`, failing with
/// [`Error::NotConverged`] if `rtol` is not reached within `max_iter`.
pub fn solve_symmetric_indefinite<T: Real, A: SymmetricOperator<T> + ?Sized>(
    a: &A,
    b: &[T],
    rtol: T,
    max_iter: usize,
) -> Result<SymmetricSolve<T>> {
    let out = minres(a, b, rtol, max_iter)?;
    if !out.converged {
        return Err(Error::NotConverged {
            residual: out.residual.as_f64(),
            iterations: out.iterations,
        });
    }
    Ok(out)
}

/// Default iteration budget: ten times the dimension.
pub fn default_max_iter(dim: usize) -> usize {
    10 * dim.max(1)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn diag(v: &[f64]) -> SparseSymmetric<f64> {
        SparseSymmetric::from_upper(v.len(), v.iter().enumerate().map(|(i, &d)| (i, i, d)).collect())
            .unwrap()
    }

    #[test]
    fn identity_in_one_iteration() {
        let a = diag(&[1.0; 5]);
        let b = [1.0, -2.0, 3.0, 0.5, 4.0];
        let s = solve_symmetric_indefinite(&a, &b, 1e-12, 50).unwrap();
        assert!(s.iterations <= 1);
        for (x, e) in s.x.iter().zip(&b) {
            assert!((x - e).abs() < 1e-14);
        }
    }

    #[test]
    fn indefinite_diagonal() {
        let a = diag(&[2.0, -3.0]);
        let s = solve_symmetric_indefinite(&a, &[2.0, 3.0], 1e-12, 20).unwrap();
        assert!((s.x[0] - 1.0).abs() < 1e-12 && (s.x[1] + 1.0).abs() < 1e-12);
    }

    #[test]
    fn zero_rhs() {
        let a = diag(&[2.0, -3.0]);
        let s = minres(&a, &[0.0, 0.0], 1e-8, 10).unwrap();
        assert_eq!(s.iterations, 0);
        assert!(s.x.iter().all(|v| *v == 0.0));
    }

    #[test]
    fn singular_inconsistent_breaks_down() {
        let a = diag(&[1.0, 0.0]);
        let r = solve_symmetric_indefinite(&a, &[1.0, 1.0], 1e-10, 100);
        assert!(matches!(r, Err(Error::Breakdown(_)) | Err(Error::NotConverged { .. })));
    }

    #[test]
    fn reports_non_convergence() {
        // 1-D Laplacian needs ~n iterations
        let n = 200;
        let mut e = Vec::new();
        for i in 0..n {
            e.push((i, i, 2.0));
            if i + 1 < n {
                e.push((i, i + 1, -1.0));
            }
        }
        let a = SparseSymmetric::from_upper(n, e).unwrap();
        let b = vec![1.0; n];
        match solve_symmetric_indefinite(&a, &b, 1e-12, 5) {
            Err(Error::NotConverged { residual, iterations }) => {
                assert!(residual > 1e-12);
                assert_eq!(iterations, 5);
            }
            other => panic!("expected non-convergence, got {other:?}"),
        }
        let s = solve_symmetric_indefinite(&a, &b, 1e-10, default_max_iter(n)).unwrap();
        assert!(s.residual <= 1e-10);
    }

    #[test]
    fn rejects_bad_structure() {
        assert!(SparseSymmetric::from_upper(2, vec![(1, 0, 1.0)]).is_err());
        assert!(SparseSymmetric::from_upper(2, vec![(0, 2, 1.0)]).is_err());
        assert!(SparseSymmetric::from_upper(2, vec![(0, 1, 1.0), (0, 1, 2.0)]).is_err());
        assert!(SparseSymmetric::from_upper(2, vec![(0, 1, f64::NAN)]).is_err());
    }

    #[test]
    fn builder_sums_and_mirrors() {
        let mut b = SymmetricBuilder::new(2);
        b.add(1, 0, 1.0);
        b.add(0, 1, 2.0);
        b.add(0, 0, 4.0);
        let a = b.build().unwrap();
        assert_eq!(a.matvec(&[1.0, 0.0]), vec![4.0, 3.0]);
        assert_eq!(a.matvec(&[0.0, 1.0]), vec![3.0, 0.0]);
    }
}
