//! Smooth approximation-extension of 2-D data subject to a bivariate model.
//!
//! Minimizes `S(g) + mu E(g)` subject to `C g = 0` (every full model window on
//! the target lattice) through the symmetric indefinite KKT system
//!
//! ```text
//! [ H   C^T ] [ g ]   [ mu W f ]
//! [ C   0   ] [ l ] = [   0    ]
//! ```
//!
//! with `H` the Hessian of `S + mu E` (halved). Unknowns are the target nodes
//! in row-major order (`j * nx + i`) followed by one multiplier per window.

use crate::error::{Error, Result};
use crate::grid::SampledGrid2D;
use crate::model2d::Model2D;
use crate::numerics::minres::{minres, SparseSymmetric, SymmetricBuilder, DEFAULT_RTOL};
use crate::scalar::{norm2, Real};
use crate::smooth1d::lattice_index;

/// Calls `f(weight, stencil)` for every squared difference of the `Q`
/// energy on an `nx x ny` lattice; stencil entries are `(node, coefficient)`.
pub(crate) fn for_each_q_term(nx: usize, ny: usize, mut f: impl FnMut(f64, &[(usize, f64)])) {
    let idx = |i: usize, j: usize| j * nx + i;
    for j in 1..ny.saturating_sub(1) {
        for i in 1..nx.saturating_sub(1) {
            f(1.0, &[(idx(i - 1, j), 1.0), (idx(i, j), -2.0), (idx(i + 1, j), 1.0)]);
            f(1.0, &[(idx(i, j - 1), 1.0), (idx(i, j), -2.0), (idx(i, j + 1), 1.0)]);
            for (a, b) in [(i, j), (i + 1, j), (i, j + 1), (i + 1, j + 1)] {
                f(
                    0.25,
                    &[
                        (idx(a, b), 1.0),
                        (idx(a - 1, b), -1.0),
                        (idx(a, b - 1), -1.0),
                        (idx(a - 1, b - 1), 1.0),
                    ],
                );
            }
        }
    }
}

/// Smoothness energy `S(g) = sum_{interior} Q g_{ij}`.
pub fn q_energy<T: Real>(g: &SampledGrid2D<T>) -> Result<T> {
    q_energy_values(&g.values, g.nx, g.ny)
}

pub fn q_energy_values<T: Real>(values: &[T], nx: usize, ny: usize) -> Result<T> {
    if nx < 3 || ny < 3 {
        return Err(Error::InsufficientData("Q energy needs at least a 3 x 3 array".into()));
    }
    if values.len() != nx * ny {
        return Err(Error::DimensionMismatch("array size does not match its dimensions".into()));
    }
    let mut s = T::zero();
    for_each_q_term(nx, ny, |w, st| {
        let d: T = st.iter().map(|&(k, c)| T::lit(c) * values[k]).sum();
        s += T::lit(w) * d * d;
    });
    Ok(s)
}

/// Target lattice containing the data lattice.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExtensionDomain2D<T> {
    pub x0: T,
    pub y0: T,
    pub h: T,
    pub nx: usize,
    pub ny: usize,
    /// Target indices of data node `(0, 0)`.
    pub off_i: usize,
    pub off_j: usize,
    /// Data lattice size.
    pub data_nx: usize,
    pub data_ny: usize,
}

impl<T: Real> ExtensionDomain2D<T> {
    /// Target square `[c, d]^2` with the data mesh.
    pub fn square(grid: &SampledGrid2D<T>, c: T, d: T) -> Result<Self> {
        Self::rect(grid, c, d, c, d)
    }

    pub fn rect(grid: &SampledGrid2D<T>, xlo: T, xhi: T, ylo: T, yhi: T) -> Result<Self> {
        let i0 = lattice_index(grid.x0, grid.h, xlo)?;
        let i1 = lattice_index(grid.x0, grid.h, xhi)?;
        let j0 = lattice_index(grid.y0, grid.h, ylo)?;
        let j1 = lattice_index(grid.y0, grid.h, yhi)?;
        if i0 > 0 || j0 > 0 || i1 < grid.nx as i64 - 1 || j1 < grid.ny as i64 - 1 {
            return Err(Error::InvalidParameter(
                "target domain must contain the data domain".into(),
            ));
        }
        Ok(Self {
            x0: grid.x(i0),
            y0: grid.y(j0),
            h: grid.h,
            nx: (i1 - i0 + 1) as usize,
            ny: (j1 - j0 + 1) as usize,
            off_i: (-i0) as usize,
            off_j: (-j0) as usize,
            data_nx: grid.nx,
            data_ny: grid.ny,
        })
    }

    /// Domain equal to the data lattice.
    pub fn identity(grid: &SampledGrid2D<T>) -> Self {
        Self {
            x0: grid.x0,
            y0: grid.y0,
            h: grid.h,
            nx: grid.nx,
            ny: grid.ny,
            off_i: 0,
            off_j: 0,
            data_nx: grid.nx,
            data_ny: grid.ny,
        }
    }

    pub fn node_count(&self) -> usize {
        self.nx * self.ny
    }

    #[inline]
    pub fn node(&self, i: usize, j: usize) -> usize {
        j * self.nx + i
    }

    /// Target node of data node `(i, j)`.
    #[inline]
    pub fn data_node(&self, i: usize, j: usize) -> usize {
        self.node(i + self.off_i, j + self.off_j)
    }

    fn check(&self, grid: &SampledGrid2D<T>) -> Result<()> {
        if grid.nx != self.data_nx || grid.ny != self.data_ny || grid.h != self.h {
            return Err(Error::DimensionMismatch("domain was built for a different grid".into()));
        }
        if self.off_i + grid.nx > self.nx || self.off_j + grid.ny > self.ny {
            return Err(Error::DimensionMismatch("data lattice exceeds the target".into()));
        }
        Ok(())
    }
}

/// Assembled KKT system.
#[derive(Debug, Clone)]
pub struct KktSystem<T> {
    pub matrix: SparseSymmetric<T>,
    pub rhs: Vec<T>,
    pub nodes: usize,
    pub constraints: usize,
}

/// Anchors `(i, j)` of every full model window on the lattice.
fn window_anchors(nx: usize, ny: usize, span: usize) -> Vec<(usize, usize)> {
    if nx <= span || ny <= span {
        return Vec::new();
    }
    let mut a = Vec::with_capacity((nx - span) * (ny - span));
    for j in 0..ny - span {
        for i in 0..nx - span {
            a.push((i, j));
        }
    }
    a
}

pub fn assemble_kkt<T: Real>(
    grid: &SampledGrid2D<T>,
    model: &Model2D<T>,
    domain: &ExtensionDomain2D<T>,
    mu: T,
) -> Result<KktSystem<T>> {
    if !(mu > T::zero()) || !mu.is_finite() {
        return Err(Error::InvalidParameter("mu must be positive".into()));
    }
    domain.check(grid)?;
    if domain.nx < 3 || domain.ny < 3 {
        return Err(Error::InsufficientData("target lattice must be at least 3 x 3".into()));
    }
    let anchors = window_anchors(domain.nx, domain.ny, model.span());
    if anchors.is_empty() {
        return Err(Error::InsufficientData("no model window fits in the target lattice".into()));
    }
    let nodes = domain.node_count();
    let constraints = anchors.len();
    let mut b = SymmetricBuilder::new(nodes + constraints);
    for_each_q_term(domain.nx, domain.ny, |w, st| {
        for &(r, cr) in st {
            for &(c, cc) in st {
                if r <= c {
                    b.add(r, c, T::lit(w * cr * cc));
                }
            }
        }
    });
    let mut rhs = vec![T::zero(); nodes + constraints];
    for j in 0..grid.ny {
        for i in 0..grid.nx {
            let k = domain.data_node(i, j);
            b.add(k, k, mu);
            rhs[k] = mu * grid.get(i, j);
        }
    }
    let (m, n) = (model.m, model.n);
    for (r, &(ai, aj)) in anchors.iter().enumerate() {
        for k in 0..m {
            for l in 0..m {
                let c = model.p[k * m + l];
                if c != T::zero() {
                    b.add(domain.node(ai + k * n, aj + l * n), nodes + r, c);
                }
            }
        }
    }
    Ok(KktSystem {
        matrix: b.build()?,
        rhs,
        nodes,
        constraints,
    })
}

/// Iterative solve settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions<T> {
    pub rtol: T,
    /// Defaults to ten times the system dimension.
    pub max_iter: Option<usize>,
}

impl<T: Real> Default for SolverOptions<T> {
    fn default() -> Self {
        Self {
            rtol: T::lit(DEFAULT_RTOL),
            max_iter: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SmoothExtension2D<T> {
    pub grid: SampledGrid2D<T>,
    pub multipliers: Vec<T>,
    pub smoothness: T,
    pub data: T,
    /// `S + mu E`
    pub objective: T,
    pub iterations: usize,
    /// Relative residual of the diagonally scaled KKT system.
    pub residual: T,
    /// `|C g| / (|P|_F |g|)`
    pub constraint_residual: T,
    pub unknowns: usize,
    pub constraints: usize,
}

/// Symmetric diagonal scaling: `H_ii^{-1/2}` on nodes, inverse scaled row
/// norms on constraints.
fn kkt_scaling<T: Real>(sys: &KktSystem<T>) -> Vec<T> {
    let dim = sys.nodes + sys.constraints;
    let diag = sys.matrix.diagonal();
    let mut s = vec![T::one(); dim];
    for k in 0..sys.nodes {
        if diag[k] > T::zero() {
            s[k] = diag[k].sqrt().recip();
        }
    }
    for r in sys.nodes..dim {
        let nrm: T = sys
            .matrix
            .row(r)
            .map(|(c, v)| {
                let w = v * s[c];
                w * w
            })
            .sum::<T>()
            .sqrt();
        if nrm > T::zero() {
            s[r] = nrm.recip();
        }
    }
    s
}

/// Minimizes `S(g) + mu E(g)` over model-satisfying arrays on the target.
pub fn extend_smooth_2d<T: Real>(
    grid: &SampledGrid2D<T>,
    model: &Model2D<T>,
    domain: &ExtensionDomain2D<T>,
    mu: T,
    opts: SolverOptions<T>,
) -> Result<SmoothExtension2D<T>> {
    let sys = assemble_kkt(grid, model, domain, mu)?;
    let dim = sys.nodes + sys.constraints;
    let scale = kkt_scaling(&sys);
    let a = sys.matrix.scaled(&scale);
    let b: Vec<T> = sys.rhs.iter().zip(&scale).map(|(&v, &s)| v * s).collect();
    let max_iter = opts.max_iter.unwrap_or(10 * dim);
    let sol = minres(&a, &b, opts.rtol, max_iter)?;
    if !sol.converged {
        return Err(Error::NotConverged {
            residual: sol.residual.as_f64(),
            iterations: sol.iterations,
        });
    }
    let x: Vec<T> = sol.x.iter().zip(&scale).map(|(&v, &s)| v * s).collect();
    let g = x[..sys.nodes].to_vec();
    let multipliers = x[sys.nodes..].to_vec();

    let out = SampledGrid2D::new(domain.x0, domain.y0, domain.h, domain.nx, domain.ny, g)?;
    let smoothness = q_energy(&out)?;
    let data = data_energy_2d(&out, grid, domain);
    let constraint_residual = constraint_residual(&out, model);
    Ok(SmoothExtension2D {
        grid: out,
        multipliers,
        smoothness,
        data,
        objective: smoothness + mu * data,
        iterations: sol.iterations,
        residual: sol.residual,
        constraint_residual,
        unknowns: dim,
        constraints: sys.constraints,
    })
}

/// `E(g) = sum (f - g)^2` over the data nodes.
pub fn data_energy_2d<T: Real>(g: &SampledGrid2D<T>, grid: &SampledGrid2D<T>, domain: &ExtensionDomain2D<T>) -> T {
    let mut s = T::zero();
    for j in 0..grid.ny {
        for i in 0..grid.nx {
            let e = grid.get(i, j) - g.values[domain.data_node(i, j)];
            s += e * e;
        }
    }
    s
}

/// `|C g| / (|P|_F |g|)` over all full windows; 0 for `g = 0`.
pub fn constraint_residual<T: Real>(g: &SampledGrid2D<T>, model: &Model2D<T>) -> T {
    let anchors = window_anchors(g.nx, g.ny, model.span());
    let r: Vec<T> = anchors
        .iter()
        .map(|&(i, j)| model.window_residual(&g.values, g.nx, i, j))
        .collect();
    let gn = norm2(&g.values);
    if gn == T::zero() {
        return T::zero();
    }
    norm2(&r) / (model.norm() * gn)
}
