//! Exponential-sum reconstruction from a constant-coefficient model.
//!
//! The model's characteristic roots `λ_j` give the exponentials; the data is
//! then fitted by least squares in the real basis built from `λ_j^t` with
//! `t = (x - origin) / d`, `d` being the model mesh.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::grid::SampledGrid1D;
use crate::model1d::Model1D;
use crate::numerics::dense::{lstsq_columns, pivoted_r_diagonal};
use crate::numerics::roots::{polynomial_roots, root_clusters, CLUSTER_TOL};
use crate::scalar::{all_finite, Real};

/// Relative threshold for dropping dependent basis members.
pub const PRUNE_TOL: f64 = 1e-10;

/// Roots of `sum_k p_k λ^{k-1} - λ^m`.
pub fn characteristic_roots<T: Real>(model: &Model1D<T>) -> Result<Vec<Complex<T>>> {
    if !model.kind.is_constant() {
        return Err(Error::InvalidParameter(
            "characteristic roots need a constant-coefficient model".into(),
        ));
    }
    let mut c = model.p.clone();
    c.push(-T::one());
    polynomial_roots(&c)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Part {
    Re,
    Im,
}

/// One real basis function `t^power * Part(λ^t)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BasisTerm<T> {
    pub lambda: Complex<T>,
    pub part: Part,
    pub power: u32,
}

impl<T: Real> BasisTerm<T> {
    /// Value at exponent variable `t`; `None` on overflow.
    pub fn eval(&self, t: T) -> Option<T> {
        let z = complex_pow(self.lambda, t)?;
        let v = match self.part {
            Part::Re => z.re,
            Part::Im => z.im,
        };
        let v = if self.power == 0 {
            v
        } else {
            v * t.powi(self.power as i32)
        };
        v.is_finite().then_some(v)
    }

    pub fn is_zero_root(&self) -> bool {
        self.lambda.re == T::zero() && self.lambda.im == T::zero()
    }
}

/// Principal-branch power. A zero base gives `1` at `t = 0` and `0` for
/// `t > 0`.
fn complex_pow<T: Real>(z: Complex<T>, t: T) -> Option<Complex<T>> {
    let r = z.norm();
    if r == T::zero() {
        return Some(if t == T::zero() {
            Complex::new(T::one(), T::zero())
        } else {
            Complex::new(T::zero(), T::zero())
        });
    }
    let theta = z.im.atan2(z.re);
    let mag = (t * r.ln()).exp();
    if !mag.is_finite() {
        return None;
    }
    let ang = t * theta;
    Some(Complex::new(mag * ang.cos(), mag * ang.sin()))
}

/// Real basis together with the coordinate map `t = (x - origin) / d`.
#[derive(Debug, Clone, PartialEq)]
pub struct RealBasis<T> {
    pub roots: Vec<Complex<T>>,
    /// Index groups of `roots` treated as one confluent root.
    pub clusters: Vec<Vec<usize>>,
    pub terms: Vec<BasisTerm<T>>,
    pub origin: T,
    pub d: T,
    /// A zero root is present; its terms are only meaningful for `t >= 0`.
    pub restricted: bool,
    /// Members removed as numerically dependent on the data nodes.
    pub pruned: usize,
}

impl<T: Real> RealBasis<T> {
    pub fn t(&self, x: T) -> T {
        (x - self.origin) / self.d
    }
}

fn candidate_terms<T: Real>(roots: &[Complex<T>], clusters: &[Vec<usize>], tol: T) -> Vec<BasisTerm<T>> {
    let mut terms = Vec::new();
    for group in clusters {
        let k = T::from_usize_lossy(group.len());
        let mut mean = Complex::new(T::zero(), T::zero());
        for &i in group {
            mean = mean + roots[i];
        }
        let lambda = mean / k;
        let scale = T::one().max(lambda.norm());
        let real = lambda.im.abs() <= tol * scale;
        let lambda = if real {
            Complex::new(lambda.re, T::zero())
        } else {
            lambda
        };
        if !real && lambda.im < T::zero() {
            // covered by the conjugate in the upper half plane
            continue;
        }
        let zero = lambda.norm() <= tol;
        let lambda = if zero {
            Complex::new(T::zero(), T::zero())
        } else {
            lambda
        };
        for power in 0..group.len() as u32 {
            terms.push(BasisTerm {
                lambda,
                part: Part::Re,
                power,
            });
            // negative real roots oscillate on the principal branch
            if !zero && (!real || lambda.re < T::zero()) {
                terms.push(BasisTerm {
                    lambda,
                    part: Part::Im,
                    power,
                });
            }
        }
    }
    terms
}

/// Builds the real basis for `roots` and drops members that are numerically
/// dependent on the nodes of `grid`.
pub fn build_real_basis<T: Real>(
    roots: &[Complex<T>],
    grid: &SampledGrid1D<T>,
    d: T,
    cluster_tol: T,
) -> Result<RealBasis<T>> {
    if !(d > T::zero()) {
        return Err(Error::InvalidParameter("model mesh d must be positive".into()));
    }
    if roots.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::NonFinite("roots".into()));
    }
    let clusters = root_clusters(roots, cluster_tol);
    let candidates = candidate_terms(roots, &clusters, cluster_tol);
    let restricted = candidates.iter().any(|t| t.is_zero_root());
    let origin = grid.a;
    let nodes: Vec<T> = grid.nodes().iter().map(|&x| (x - origin) / d).collect();

    let mut cols = Vec::with_capacity(candidates.len());
    for term in &candidates {
        let col = eval_column(term, &nodes, grid.a, d)?;
        cols.push(col);
    }
    let keep = independent_columns(cols, nodes.len());
    let pruned = candidates.len() - keep.len();
    let terms: Vec<BasisTerm<T>> = keep.into_iter().map(|k| candidates[k]).collect();
    if terms.is_empty() {
        return Err(Error::Degenerate("no independent basis functions on the data nodes".into()));
    }
    Ok(RealBasis {
        roots: roots.to_vec(),
        clusters,
        terms,
        origin,
        d,
        restricted,
        pruned,
    })
}

fn eval_column<T: Real>(term: &BasisTerm<T>, ts: &[T], origin: T, d: T) -> Result<Vec<T>> {
    ts.iter()
        .map(|&t| {
            term.eval(t).ok_or_else(|| Error::Overflow {
                x: (origin + t * d).as_f64(),
            })
        })
        .collect()
}

/// Indices (ascending) of a maximal well-conditioned subset of columns.
fn independent_columns<T: Real>(mut cols: Vec<Vec<T>>, m: usize) -> Vec<usize> {
    let mut nonzero = Vec::new();
    for (k, col) in cols.iter_mut().enumerate() {
        let nrm = crate::scalar::norm2(col);
        if nrm > T::zero() {
            for v in col.iter_mut() {
                *v /= nrm;
            }
            nonzero.push(k);
        }
    }
    let cols: Vec<Vec<T>> = nonzero.iter().map(|&k| cols[k].clone()).collect();
    if cols.is_empty() {
        return Vec::new();
    }
    let (diag, perm) = pivoted_r_diagonal(cols, m);
    let top = diag[0].abs();
    let mut keep: Vec<usize> = diag
        .iter()
        .enumerate()
        .take_while(|(_, r)| r.abs() >= T::lit(PRUNE_TOL) * top && top > T::zero())
        .map(|(k, _)| nonzero[perm[k]])
        .collect();
    keep.sort_unstable();
    keep
}

/// Fitted exponential sum `g(x) = sum_k coeffs[k] * terms[k](t(x))`.
#[derive(Debug, Clone, PartialEq)]
pub struct ExponentialModel<T> {
    pub basis: RealBasis<T>,
    pub coeffs: Vec<T>,
    /// Root-mean-square misfit on the data nodes.
    pub rms: T,
}

/// Least-squares fit of the data in the given basis.
pub fn fit_exponential_sum<T: Real>(grid: &SampledGrid1D<T>, basis: &RealBasis<T>) -> Result<ExponentialModel<T>> {
    if basis.terms.is_empty() {
        return Err(Error::Degenerate("empty basis".into()));
    }
    let m = grid.len();
    if m < basis.terms.len() {
        return Err(Error::InsufficientData(format!(
            "{m} nodes for {} basis functions",
            basis.terms.len()
        )));
    }
    let ts: Vec<T> = grid.nodes().iter().map(|&x| basis.t(x)).collect();
    let mut cols = Vec::with_capacity(basis.terms.len());
    let mut scales = Vec::with_capacity(basis.terms.len());
    for term in &basis.terms {
        let mut col = eval_column(term, &ts, basis.origin, basis.d)?;
        let nrm = crate::scalar::norm2(&col);
        let s = if nrm > T::zero() { nrm } else { T::one() };
        for v in col.iter_mut() {
            *v /= s;
        }
        cols.push(col);
        scales.push(s);
    }
    let ls = lstsq_columns(cols, m, grid.values.clone(), None);
    if ls.rank < basis.terms.len() {
        return Err(Error::Degenerate(format!(
            "basis has numerical rank {} < {}",
            ls.rank,
            basis.terms.len()
        )));
    }
    let coeffs: Vec<T> = ls.x.iter().zip(&scales).map(|(&c, &s)| c / s).collect();
    if !all_finite(&coeffs) {
        return Err(Error::Degenerate("non-finite exponential coefficients".into()));
    }
    let mut model = ExponentialModel {
        basis: basis.clone(),
        coeffs,
        rms: T::zero(),
    };
    let mut sq = T::zero();
    for (k, &x) in grid.nodes().iter().enumerate() {
        let e = model.eval(x)? - grid.values[k];
        sq += e * e;
    }
    model.rms = (sq / T::from_usize_lossy(m)).sqrt();
    Ok(model)
}

impl<T: Real> ExponentialModel<T> {
    pub fn eval(&self, x: T) -> Result<T> {
        let t = self.basis.t(x);
        let mut s = T::zero();
        for (term, &c) in self.basis.terms.iter().zip(&self.coeffs) {
            if c == T::zero() {
                continue;
            }
            let v = term.eval(t).ok_or(Error::Overflow { x: x.as_f64() })?;
            s += c * v;
        }
        if !s.is_finite() {
            return Err(Error::Overflow { x: x.as_f64() });
        }
        Ok(s)
    }

    /// Samples the sum on `[lo, hi]` with mesh `h`.
    pub fn extend(&self, lo: T, hi: T, h: T) -> Result<SampledGrid1D<T>> {
        let n = crate::grid::interval_count(lo, hi, h)?;
        let values = (0..=n)
            .map(|k| self.eval(lo + T::from_usize_lossy(k) * h))
            .collect::<Result<Vec<T>>>()?;
        SampledGrid1D::new(lo, h, values)
    }
}

/// Full pipeline from a constant model: roots, basis on the data, fit.
pub fn prony_from_model<T: Real>(grid: &SampledGrid1D<T>, model: &Model1D<T>) -> Result<ExponentialModel<T>> {
    let roots = characteristic_roots(model)?;
    let d = T::from_usize_lossy(model.n) * grid.h;
    let basis = build_real_basis(&roots, grid, d, T::lit(CLUSTER_TOL))?;
    fit_exponential_sum(grid, &basis)
}
