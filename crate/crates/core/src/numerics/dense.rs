//! Dense matrices, Householder least squares and LU.

use crate::error::{Error, Result};
use crate::scalar::{all_finite, Real};

/// Row-major dense matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Real> DenseMatrix<T> {
    pub fn new(rows: usize, cols: usize, data: Vec<T>) -> Result<Self> {
        if rows * cols != data.len() {
            return Err(Error::DimensionMismatch(format!(
                "{rows}x{cols} matrix needs {} entries, got {}",
                rows * cols,
                data.len()
            )));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![T::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = T::one();
        }
        m
    }

    /// Builds a matrix from equally long rows.
    pub fn from_rows(rows: &[Vec<T>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return Err(Error::DimensionMismatch("ragged rows".into()));
        }
        let data = rows.iter().flatten().copied().collect();
        Self::new(rows.len(), cols, data)
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn as_slice(&self) -> &[T] {
        &self.data
    }

    pub fn row(&self, r: usize) -> &[T] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn row_mut(&mut self, r: usize) -> &mut [T] {
        &mut self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn column(&self, c: usize) -> Vec<T> {
        (0..self.rows).map(|r| self[(r, c)]).collect()
    }

    pub fn matvec(&self, x: &[T]) -> Vec<T> {
        assert_eq!(x.len(), self.cols, "matvec dimension");
        (0..self.rows)
            .map(|r| crate::scalar::dot(self.row(r), x))
            .collect()
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                t[(c, r)] = self[(r, c)];
            }
        }
        t
    }

    /// Stacks `other` below `self`.
    pub fn vstack(&self, other: &Self) -> Result<Self> {
        if self.cols != other.cols {
            return Err(Error::DimensionMismatch("vstack column counts differ".into()));
        }
        let mut data = self.data.clone();
        data.extend_from_slice(&other.data);
        Self::new(self.rows + other.rows, self.cols, data)
    }

    pub fn is_finite(&self) -> bool {
        all_finite(&self.data)
    }
}

impl<T> std::ops::Index<(usize, usize)> for DenseMatrix<T> {
    type Output = T;
    #[inline]
    fn index(&self, (r, c): (usize, usize)) -> &T {
        &self.data[r * self.cols + c]
    }
}

impl<T> std::ops::IndexMut<(usize, usize)> for DenseMatrix<T> {
    #[inline]
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut T {
        &mut self.data[r * self.cols + c]
    }
}

/// Least-squares solution together with the numerical rank of the system.
#[derive(Debug, Clone, PartialEq)]
pub struct LeastSquares<T> {
    pub x: Vec<T>,
    pub rank: usize,
    /// Set when the (ridge-augmented) system was rank deficient and the
    /// minimum-norm minimizer was returned.
    pub rank_deficient: bool,
}

/// Householder QR of a column-major `m x n` matrix, optionally with column
/// pivoting. Reflectors are stored below the diagonal.
pub(crate) struct HouseholderQr<T> {
    m: usize,
    n: usize,
    cols: Vec<Vec<T>>,
    betas: Vec<T>,
    pub(crate) perm: Vec<usize>,
    steps: usize,
}

impl<T: Real> HouseholderQr<T> {
    pub(crate) fn factor(mut cols: Vec<Vec<T>>, m: usize, pivot: bool) -> Self {
        let n = cols.len();
        let steps = m.min(n);
        let mut betas = Vec::with_capacity(steps);
        let mut perm: Vec<usize> = (0..n).collect();
        for k in 0..steps {
            if pivot {
                let mut best = k;
                let mut best_norm = T::neg_infinity();
                for (j, col) in cols.iter().enumerate().skip(k) {
                    let nrm = crate::scalar::norm2(&col[k..]);
                    if nrm > best_norm {
                        best_norm = nrm;
                        best = j;
                    }
                }
                cols.swap(k, best);
                perm.swap(k, best);
            }
            let (head, tail) = cols.split_at_mut(k + 1);
            let v = &mut head[k];
            let alpha = crate::scalar::norm2(&v[k..]);
            if alpha == T::zero() {
                betas.push(T::zero());
                continue;
            }
            let alpha = if v[k] > T::zero() { -alpha } else { alpha };
            // v = x - alpha e1, stored in place; R_kk = alpha
            let v0 = v[k] - alpha;
            let mut vnorm2 = v0 * v0;
            for vi in &v[k + 1..] {
                vnorm2 += *vi * *vi;
            }
            let beta = if vnorm2 == T::zero() {
                T::zero()
            } else {
                T::lit(2.0) / vnorm2
            };
            let mut vk: Vec<T> = v[k..].to_vec();
            vk[0] = v0;
            for c in tail.iter_mut() {
                let s: T = vk.iter().zip(&c[k..]).map(|(&a, &b)| a * b).sum();
                let f = beta * s;
                for (ci, &vi) in c[k..].iter_mut().zip(&vk) {
                    *ci -= f * vi;
                }
            }
            v[k] = alpha;
            // normalized reflector tail: v / v0 so that the head is 1
            if v0 != T::zero() {
                for vi in &mut v[k + 1..] {
                    *vi /= v0;
                }
                betas.push(beta * v0 * v0);
            } else {
                betas.push(T::zero());
            }
        }
        Self {
            m,
            n,
            cols,
            betas,
            perm,
            steps,
        }
    }

    #[inline]
    pub(crate) fn r(&self, i: usize, j: usize) -> T {
        self.cols[j][i]
    }

    pub(crate) fn apply_qt(&self, b: &mut [T]) {
        for k in 0..self.steps {
            self.reflect(k, b);
        }
    }

    pub(crate) fn apply_q(&self, y: &mut [T]) {
        for k in (0..self.steps).rev() {
            self.reflect(k, y);
        }
    }

    fn reflect(&self, k: usize, b: &mut [T]) {
        let beta = self.betas[k];
        if beta == T::zero() {
            return;
        }
        let col = &self.cols[k];
        let mut s = b[k];
        for i in k + 1..self.m {
            s += col[i] * b[i];
        }
        let f = beta * s;
        b[k] -= f;
        for i in k + 1..self.m {
            b[i] -= f * col[i];
        }
    }

    /// Numerical rank: diagonal entries of R above `tol * |R_00|`.
    pub(crate) fn rank(&self, tol: T) -> usize {
        if self.steps == 0 {
            return 0;
        }
        let r00 = self.r(0, 0).abs();
        if r00 == T::zero() {
            return 0;
        }
        (0..self.steps)
            .take_while(|&k| self.r(k, k).abs() > tol * r00)
            .count()
    }

    pub(crate) fn diag(&self) -> Vec<T> {
        (0..self.steps).map(|k| self.r(k, k)).collect()
    }

    pub(crate) fn dims(&self) -> (usize, usize) {
        (self.m, self.n)
    }
}

fn to_columns<T: Real>(a: &DenseMatrix<T>) -> Vec<Vec<T>> {
    (0..a.cols()).map(|c| a.column(c)).collect()
}

fn upper_solve<T: Real>(qr: &HouseholderQr<T>, r: usize, c: &[T]) -> Vec<T> {
    let mut y = vec![T::zero(); r];
    for i in (0..r).rev() {
        let mut s = c[i];
        for j in i + 1..r {
            s -= qr.r(i, j) * y[j];
        }
        y[i] = s / qr.r(i, i);
    }
    y
}

fn validate<T: Real>(a: &DenseMatrix<T>, b: &[T]) -> Result<()> {
    if a.rows() == 0 || a.cols() == 0 {
        return Err(Error::DimensionMismatch("empty least-squares system".into()));
    }
    if b.len() != a.rows() {
        return Err(Error::DimensionMismatch(format!(
            "right-hand side has {} entries for {} rows",
            b.len(),
            a.rows()
        )));
    }
    if !a.is_finite() {
        return Err(Error::NonFinite("least-squares matrix".into()));
    }
    if !all_finite(b) {
        return Err(Error::NonFinite("least-squares right-hand side".into()));
    }
    Ok(())
}

/// Minimizes `|Ax - b|^2 + ridge |x|^2`.
///
/// Uses a column-pivoted Householder factorization. With `ridge = 0` and a
/// rank-deficient `A` the minimum-norm minimizer is returned.
pub fn solve_least_squares<T: Real>(
    a: &DenseMatrix<T>,
    b: &[T],
    ridge: T,
) -> Result<LeastSquares<T>> {
    let ridges = vec![ridge; a.cols()];
    solve_least_squares_ridge(a, b, &ridges)
}

/// Like [`solve_least_squares`] with an individual ridge weight per unknown:
/// minimizes `|Ax - b|^2 + sum_j ridge_j x_j^2`.
pub fn solve_least_squares_ridge<T: Real>(
    a: &DenseMatrix<T>,
    b: &[T],
    ridges: &[T],
) -> Result<LeastSquares<T>> {
    validate(a, b)?;
    if ridges.len() != a.cols() {
        return Err(Error::DimensionMismatch("one ridge weight per column".into()));
    }
    if ridges.iter().any(|r| !(*r >= T::zero()) || !r.is_finite()) {
        return Err(Error::InvalidParameter("ridge weights must be finite and >= 0".into()));
    }
    let n = a.cols();
    let extra: Vec<usize> = (0..n).filter(|&j| ridges[j] > T::zero()).collect();
    let m = a.rows() + extra.len();
    let mut cols = to_columns(a);
    for (j, col) in cols.iter_mut().enumerate() {
        col.resize(m, T::zero());
        if let Some(pos) = extra.iter().position(|&e| e == j) {
            col[a.rows() + pos] = ridges[j].sqrt();
        }
    }
    let mut rhs = b.to_vec();
    rhs.resize(m, T::zero());
    Ok(lstsq_columns(cols, m, rhs, None))
}

/// Core pivoted least-squares solve on columns; `rcond` defaults to
/// `eps * max(m, n)`.
pub(crate) fn lstsq_columns<T: Real>(
    cols: Vec<Vec<T>>,
    m: usize,
    mut rhs: Vec<T>,
    rcond: Option<T>,
) -> LeastSquares<T> {
    let n = cols.len();
    let tol = rcond.unwrap_or_else(|| T::epsilon() * T::from_usize_lossy(m.max(n)));
    let qr = HouseholderQr::factor(cols, m, true);
    qr.apply_qt(&mut rhs);
    let rank = qr.rank(tol);
    let mut x = vec![T::zero(); n];
    if rank == 0 {
        return LeastSquares {
            x,
            rank,
            rank_deficient: true,
        };
    }
    let z = if rank == n {
        upper_solve(&qr, rank, &rhs)
    } else {
        // minimum-norm solution of the r x n system [R11 R12] z = c via a QR
        // factorization of its transpose: z = Q2 R2^{-T} c
        let rt: Vec<Vec<T>> = (0..rank)
            .map(|i| (0..n).map(|j| if j < i { T::zero() } else { qr.r(i, j) }).collect())
            .collect();
        let qr2 = HouseholderQr::factor(rt, n, false);
        let mut w = vec![T::zero(); n];
        for i in 0..rank {
            let mut s = rhs[i];
            for j in 0..i {
                s -= qr2.r(j, i) * w[j];
            }
            w[i] = s / qr2.r(i, i);
        }
        qr2.apply_q(&mut w);
        w
    };
    for (k, &p) in qr.perm.iter().enumerate() {
        x[p] = z[k];
    }
    LeastSquares {
        x,
        rank,
        rank_deficient: rank < n,
    }
}

/// Diagonal of R from a pivoted QR of the given columns (in pivot order),
/// with the permutation. Used to detect dependent basis members.
pub(crate) fn pivoted_r_diagonal<T: Real>(cols: Vec<Vec<T>>, m: usize) -> (Vec<T>, Vec<usize>) {
    let qr = HouseholderQr::factor(cols, m, true);
    debug_assert_eq!(qr.dims().0, m);
    (qr.diag(), qr.perm.clone())
}

/// Solves a square system by LU with partial pivoting.
pub fn solve_dense<T: Real>(a: &DenseMatrix<T>, b: &[T]) -> Result<Vec<T>> {
    let n = a.rows();
    if a.cols() != n || b.len() != n {
        return Err(Error::DimensionMismatch("square system expected".into()));
    }
    let mut lu = a.clone();
    let mut x = b.to_vec();
    let scale = a.as_slice().iter().fold(T::zero(), |s, v| s.max(v.abs()));
    for k in 0..n {
        let p = (k..n)
            .max_by(|&i, &j| lu[(i, k)].abs().partial_cmp(&lu[(j, k)].abs()).unwrap())
            .unwrap();
        if lu[(p, k)].abs() <= T::epsilon() * scale * T::from_usize_lossy(n) {
            return Err(Error::Degenerate(format!("singular matrix at column {k}")));
        }
        if p != k {
            for c in 0..n {
                let t = lu[(k, c)];
                lu[(k, c)] = lu[(p, c)];
                lu[(p, c)] = t;
            }
            x.swap(k, p);
        }
        for i in k + 1..n {
            let f = lu[(i, k)] / lu[(k, k)];
            if f == T::zero() {
                continue;
            }
            for c in k..n {
                let v = lu[(k, c)];
                lu[(i, c)] -= f * v;
            }
            let xk = x[k];
            x[i] -= f * xk;
        }
    }
    for i in (0..n).rev() {
        let mut s = x[i];
        for j in i + 1..n {
            s -= lu[(i, j)] * x[j];
        }
        x[i] = s / lu[(i, i)];
    }
    Ok(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn identity_system() {
        let a = DenseMatrix::<f64>::identity(3);
        let s = solve_least_squares(&a, &[1.0, 2.0, 3.0], 0.0).unwrap();
        assert_eq!(s.rank, 3);
        for (x, e) in s.x.iter().zip([1.0, 2.0, 3.0]) {
            assert_relative_eq!(*x, e, epsilon = 1e-14);
        }
    }

    #[test]
    fn mean_of_two_observations() {
        let a = DenseMatrix::new(2, 1, vec![1.0, 1.0]).unwrap();
        let s = solve_least_squares(&a, &[0.0, 2.0], 0.0).unwrap();
        assert_relative_eq!(s.x[0], 1.0, epsilon = 1e-14);
    }

    #[test]
    fn ridge_shrinks_componentwise() {
        let a = DenseMatrix::<f64>::identity(2);
        let s = solve_least_squares(&a, &[4.0, 4.0], 1.0).unwrap();
        assert_relative_eq!(s.x[0], 2.0, epsilon = 1e-14);
        assert_relative_eq!(s.x[1], 2.0, epsilon = 1e-14);
        let s = solve_least_squares(&a, &[4.0, 4.0], 1e12).unwrap();
        assert!(s.x.iter().all(|v| v.abs() < 1e-10));
    }

    #[test]
    fn min_norm_for_rank_deficient() {
        // two identical columns: min-norm splits the weight evenly
        let a = DenseMatrix::new(3, 2, vec![1.0, 1.0, 2.0, 2.0, 3.0, 3.0]).unwrap();
        let s = solve_least_squares(&a, &[2.0, 4.0, 6.0], 0.0).unwrap();
        assert!(s.rank_deficient);
        assert_eq!(s.rank, 1);
        assert_relative_eq!(s.x[0], 1.0, epsilon = 1e-12);
        assert_relative_eq!(s.x[1], 1.0, epsilon = 1e-12);
    }

    #[test]
    fn underdetermined_min_norm() {
        let a = DenseMatrix::new(1, 3, vec![1.0, 2.0, 2.0]).unwrap();
        let s = solve_least_squares(&a, &[9.0], 0.0).unwrap();
        // x = a^T / |a|^2 * 9
        assert_relative_eq!(s.x[0], 1.0, epsilon = 1e-12);
        assert_relative_eq!(s.x[1], 2.0, epsilon = 1e-12);
        assert_relative_eq!(s.x[2], 2.0, epsilon = 1e-12);
    }

    #[test]
    fn rejects_bad_input() {
        let a = DenseMatrix::<f64>::identity(2);
        assert!(matches!(
            solve_least_squares(&a, &[1.0], 0.0),
            Err(Error::DimensionMismatch(_))
        ));
        assert!(matches!(
            solve_least_squares(&a, &[1.0, f64::NAN], 0.0),
            Err(Error::NonFinite(_))
        ));
        assert!(solve_least_squares(&a, &[1.0, 1.0], -1.0).is_err());
    }

    #[test]
    fn lu_solves() {
        let a = DenseMatrix::from_rows(&[vec![0.0, 2.0], vec![3.0, 1.0]]).unwrap();
        let x = solve_dense(&a, &[4.0, 5.0]).unwrap();
        assert_relative_eq!(x[0], 1.0, epsilon = 1e-14);
        assert_relative_eq!(x[1], 2.0, epsilon = 1e-14);
        let s = DenseMatrix::from_rows(&[vec![1.0, 2.0], vec![2.0, 4.0]]).unwrap();
        assert!(solve_dense(&s, &[1.0, 1.0]).is_err());
    }

    #[test]
    fn works_in_single_precision() {
        let a = DenseMatrix::new(3, 1, vec![1.0f32, 1.0, 1.0]).unwrap();
        let s = solve_least_squares(&a, &[1.0, 2.0, 3.0], 0.0).unwrap();
        assert!((s.x[0] - 2.0).abs() < 1e-6);
    }
}
