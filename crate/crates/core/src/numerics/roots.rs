//! Polynomial roots as eigenvalues of the companion matrix.
//!
//! The companion matrix is balanced and reduced with the Francis
//! double-shift QR iteration for upper Hessenberg matrices; each eigenvalue
//! is then polished by a few Newton steps on the original polynomial.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::scalar::{all_finite, Real};

/// Default relative tolerance below which two roots form a cluster.
pub const CLUSTER_TOL: f64 = 1e-6;

const MAX_SWEEPS: usize = 60;

/// Returns the `m` roots (with multiplicity) of `sum_k coeffs[k] * z^k`.
///
/// Roots are ordered by real part, then imaginary part.
pub fn polynomial_roots<T: Real>(coeffs: &[T]) -> Result<Vec<Complex<T>>> {
    if coeffs.len() < 2 {
        return Err(Error::InvalidParameter("polynomial degree must be >= 1".into()));
    }
    if !all_finite(coeffs) {
        return Err(Error::NonFinite("polynomial coefficients".into()));
    }
    let m = coeffs.len() - 1;
    let lead = coeffs[m];
    if lead == T::zero() {
        return Err(Error::InvalidParameter("leading coefficient is zero".into()));
    }

    // 1-indexed companion matrix of the monic polynomial (first row form)
    let mut a = vec![vec![T::zero(); m + 1]; m + 1];
    for j in 1..=m {
        a[1][j] = -coeffs[m - j] / lead;
    }
    for i in 2..=m {
        a[i][i - 1] = T::one();
    }
    balance(&mut a, m);
    let eig = hessenberg_eigenvalues(&mut a, m)?;

    let mut roots: Vec<Complex<T>> = eig.into_iter().map(|z| polish(coeffs, z)).collect();
    roots.sort_by(|x, y| {
        x.re.partial_cmp(&y.re)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(x.im.partial_cmp(&y.im).unwrap_or(std::cmp::Ordering::Equal))
    });
    Ok(roots)
}

/// Evaluates the polynomial and its derivative by Horner's rule.
pub fn eval_polynomial<T: Real>(coeffs: &[T], z: Complex<T>) -> (Complex<T>, Complex<T>) {
    let mut p = Complex::new(T::zero(), T::zero());
    let mut dp = p;
    for &c in coeffs.iter().rev() {
        dp = dp * z + p;
        p = p * z + Complex::new(c, T::zero());
    }
    (p, dp)
}

fn polish<T: Real>(coeffs: &[T], mut z: Complex<T>) -> Complex<T> {
    let (mut pz, mut dpz) = eval_polynomial(coeffs, z);
    for _ in 0..4 {
        if dpz.norm() == T::zero() {
            break;
        }
        let cand = z - pz / dpz;
        let (pc, dpc) = eval_polynomial(coeffs, cand);
        if !(pc.norm() < pz.norm()) {
            break;
        }
        z = cand;
        pz = pc;
        dpz = dpc;
    }
    z
}

/// Groups roots that lie within `tol * max(1, |z|)` of each other.
///
/// Returns index groups into `roots`; singletons are included.
pub fn root_clusters<T: Real>(roots: &[Complex<T>], tol: T) -> Vec<Vec<usize>> {
    let n = roots.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], i: usize) -> usize {
        let mut r = i;
        while p[r] != r {
            r = p[r];
        }
        p[i] = r;
        r
    }
    for i in 0..n {
        for j in i + 1..n {
            let scale = T::one().max(roots[i].norm()).max(roots[j].norm());
            if (roots[i] - roots[j]).norm() < tol * scale {
                let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
                if ri != rj {
                    parent[rj] = ri;
                }
            }
        }
    }
    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut label = vec![usize::MAX; n];
    for i in 0..n {
        let r = find(&mut parent, i);
        if label[r] == usize::MAX {
            label[r] = groups.len();
            groups.push(Vec::new());
        }
        groups[label[r]].push(i);
    }
    groups
}

fn balance<T: Real>(a: &mut [Vec<T>], n: usize) {
    let radix = T::lit(2.0);
    let sqrdx = radix * radix;
    let mut done = false;
    while !done {
        done = true;
        for i in 1..=n {
            let mut r = T::zero();
            let mut c = T::zero();
            for j in 1..=n {
                if j != i {
                    c += a[j][i].abs();
                    r += a[i][j].abs();
                }
            }
            if c != T::zero() && r != T::zero() {
                let mut g = r / radix;
                let mut f = T::one();
                let s = c + r;
                while c < g {
                    f *= radix;
                    c *= sqrdx;
                }
                g = r * radix;
                while c > g {
                    f /= radix;
                    c /= sqrdx;
                }
                if (c + r) / f < T::lit(0.95) * s {
                    done = false;
                    let g = T::one() / f;
                    for j in 1..=n {
                        a[i][j] *= g;
                    }
                    for row in a.iter_mut().take(n + 1).skip(1) {
                        row[i] *= f;
                    }
                }
            }
        }
    }
}

#[inline]
fn sign<T: Real>(a: T, b: T) -> T {
    if b >= T::zero() {
        a.abs()
    } else {
        -a.abs()
    }
}

/// Eigenvalues of a 1-indexed upper Hessenberg matrix (destroyed).
#[allow(clippy::many_single_char_names)]
fn hessenberg_eigenvalues<T: Real>(a: &mut [Vec<T>], n: usize) -> Result<Vec<Complex<T>>> {
    let mut wr = vec![T::zero(); n + 1];
    let mut wi = vec![T::zero(); n + 1];
    let mut anorm = T::zero();
    for i in 1..=n {
        for j in i.saturating_sub(1).max(1)..=n {
            anorm += a[i][j].abs();
        }
    }
    let (mut p, mut q, mut r);
    let (mut x, mut y, mut z, mut w);
    let mut nn = n;
    let mut t = T::zero();
    let half = T::lit(0.5);
    while nn >= 1 {
        let mut its = 0;
        loop {
            // look for a single small subdiagonal element
            let mut l = nn;
            while l >= 2 {
                let mut s = a[l - 1][l - 1].abs() + a[l][l].abs();
                if s == T::zero() {
                    s = anorm;
                }
                if a[l][l - 1].abs() + s == s {
                    a[l][l - 1] = T::zero();
                    break;
                }
                l -= 1;
            }
            x = a[nn][nn];
            if l == nn {
                wr[nn] = x + t;
                wi[nn] = T::zero();
                nn -= 1;
            } else {
                y = a[nn - 1][nn - 1];
                w = a[nn][nn - 1] * a[nn - 1][nn];
                if l == nn - 1 {
                    p = half * (y - x);
                    q = p * p + w;
                    z = q.abs().sqrt();
                    x += t;
                    if q >= T::zero() {
                        z = p + sign(z, p);
                        wr[nn - 1] = x + z;
                        wr[nn] = x + z;
                        if z != T::zero() {
                            wr[nn] = x - w / z;
                        }
                        wi[nn - 1] = T::zero();
                        wi[nn] = T::zero();
                    } else {
                        wr[nn - 1] = x + p;
                        wr[nn] = x + p;
                        wi[nn - 1] = -z;
                        wi[nn] = z;
                    }
                    nn -= 2;
                } else {
                    if its == MAX_SWEEPS {
                        return Err(Error::NotConverged {
                            residual: a[nn][nn - 1].abs().as_f64(),
                            iterations: its,
                        });
                    }
                    if its == 10 || its == 20 {
                        // exceptional shift
                        t += x;
                        for i in 1..=nn {
                            a[i][i] -= x;
                        }
                        let s = a[nn][nn - 1].abs() + a[nn - 1][nn - 2].abs();
                        x = T::lit(0.75) * s;
                        y = x;
                        w = T::lit(-0.4375) * s * s;
                    }
                    its += 1;
                    let mut m = nn - 2;
                    loop {
                        z = a[m][m];
                        r = x - z;
                        let s = y - z;
                        p = (r * s - w) / a[m + 1][m] + a[m][m + 1];
                        q = a[m + 1][m + 1] - z - r - s;
                        r = a[m + 2][m + 1];
                        let s = p.abs() + q.abs() + r.abs();
                        p /= s;
                        q /= s;
                        r /= s;
                        if m == l {
                            break;
                        }
                        let u = a[m][m - 1].abs() * (q.abs() + r.abs());
                        let v = p.abs() * (a[m - 1][m - 1].abs() + z.abs() + a[m + 1][m + 1].abs());
                        if u + v == v {
                            break;
                        }
                        m -= 1;
                    }
                    for i in m + 2..=nn {
                        a[i][i - 2] = T::zero();
                        if i != m + 2 {
                            a[i][i - 3] = T::zero();
                        }
                    }
                    let mut k = m;
                    while k < nn {
                        if k != m {
                            p = a[k][k - 1];
                            q = a[k + 1][k - 1];
                            r = T::zero();
                            if k != nn - 1 {
                                r = a[k + 2][k - 1];
                            }
                            x = p.abs() + q.abs() + r.abs();
                            if x != T::zero() {
                                p /= x;
                                q /= x;
                                r /= x;
                            }
                        }
                        let s = sign((p * p + q * q + r * r).sqrt(), p);
                        if s != T::zero() {
                            if k == m {
                                if l != m {
                                    a[k][k - 1] = -a[k][k - 1];
                                }
                            } else {
                                a[k][k - 1] = -s * x;
                            }
                            p += s;
                            x = p / s;
                            y = q / s;
                            z = r / s;
                            q /= p;
                            r /= p;
                            for j in k..=nn {
                                p = a[k][j] + q * a[k + 1][j];
                                if k != nn - 1 {
                                    p += r * a[k + 2][j];
                                    a[k + 2][j] -= p * z;
                                }
                                a[k + 1][j] -= p * y;
                                a[k][j] -= p * x;
                            }
                            let mmin = if nn < k + 3 { nn } else { k + 3 };
                            for i in l..=mmin {
                                p = x * a[i][k] + y * a[i][k + 1];
                                if k != nn - 1 {
                                    p += z * a[i][k + 2];
                                    a[i][k + 2] -= p * r;
                                }
                                a[i][k + 1] -= p * q;
                                a[i][k] -= p;
                            }
                        }
                        k += 1;
                    }
                }
            }
            if nn < 2 || l + 1 >= nn {
                break;
            }
        }
    }
    Ok((1..=n).map(|i| Complex::new(wr[i], wi[i])).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(z: Complex<f64>, re: f64, im: f64, tol: f64) -> bool {
        (z - Complex::new(re, im)).norm() < tol
    }

    #[test]
    fn factored_quadratic() {
        let r = polynomial_roots(&[6.0, -5.0, 1.0]).unwrap();
        assert!(close(r[0], 2.0, 0.0, 1e-12) && close(r[1], 3.0, 0.0, 1e-12));
    }

    #[test]
    fn imaginary_pair() {
        let r = polynomial_roots(&[1.0, 0.0, 1.0]).unwrap();
        assert!(close(r[0], 0.0, -1.0, 1e-12) && close(r[1], 0.0, 1.0, 1e-12));
    }

    #[test]
    fn linear_and_errors() {
        let r = polynomial_roots(&[-3.0, 2.0]).unwrap();
        assert!(close(r[0], 1.5, 0.0, 1e-14));
        assert!(polynomial_roots(&[1.0]).is_err());
        assert!(polynomial_roots(&[1.0, 0.0]).is_err());
    }

    #[test]
    fn clusters_double_root() {
        let r = polynomial_roots(&[4.0, -4.0, 1.0]).unwrap();
        let groups = root_clusters(&r, 1e-6);
        assert_eq!(groups.len(), 1);
        assert_eq!(groups[0].len(), 2);
        let distinct = polynomial_roots(&[6.0, -5.0, 1.0]).unwrap();
        assert_eq!(root_clusters(&distinct, 1e-6).len(), 2);
    }

    #[test]
    fn degree_eight_residuals() {
        // (z^2+1)(z-1)(z+2)(z-0.5)(z^2-2z+5)(z-3)
        let factors: Vec<Vec<f64>> = vec![
            vec![1.0, 0.0, 1.0],
            vec![-1.0, 1.0],
            vec![2.0, 1.0],
            vec![-0.5, 1.0],
            vec![5.0, -2.0, 1.0],
            vec![-3.0, 1.0],
        ];
        let mut c = vec![1.0];
        for f in &factors {
            let mut out = vec![0.0; c.len() + f.len() - 1];
            for (i, a) in c.iter().enumerate() {
                for (j, b) in f.iter().enumerate() {
                    out[i + j] += a * b;
                }
            }
            c = out;
        }
        let roots = polynomial_roots(&c).unwrap();
        assert_eq!(roots.len(), 8);
        let cmax = c.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        for z in &roots {
            assert!(eval_polynomial(&c, *z).0.norm() <= 1e-8 * cmax);
        }
    }
}
