//! Linear blending between two constant-coefficient models.

use crate::error::{Error, Result};
use crate::grid::SampledGrid1D;
use crate::model1d::{CoeffKind, Model1D};
use crate::scalar::Real;
use crate::smooth1d::{extend_smooth_1d, ExtensionRange1D, SmoothExtension1D};

#[derive(Debug, Clone, PartialEq)]
pub struct BlendSpec<T> {
    pub model_start: Model1D<T>,
    pub model_end: Model1D<T>,
    pub x_start: T,
    pub x_end: T,
}

impl<T: Real> BlendSpec<T> {
    pub fn new(model_start: Model1D<T>, model_end: Model1D<T>, x_start: T, x_end: T) -> Result<Self> {
        let spec = Self {
            model_start,
            model_end,
            x_start,
            x_end,
        };
        spec.validate()?;
        Ok(spec)
    }

    fn validate(&self) -> Result<()> {
        let (a, b) = (&self.model_start, &self.model_end);
        if !a.kind.is_constant() || !b.kind.is_constant() {
            return Err(Error::InvalidParameter("only constant-coefficient models can be blended".into()));
        }
        if a.m != b.m || a.n != b.n {
            return Err(Error::DimensionMismatch(format!(
                "blended models differ: (m, n) = ({}, {}) vs ({}, {})",
                a.m, a.n, b.m, b.n
            )));
        }
        if !self.x_start.is_finite() || !self.x_end.is_finite() {
            return Err(Error::NonFinite("blend interval".into()));
        }
        if !(self.x_end > self.x_start) {
            return Err(Error::InvalidParameter("x_end must exceed x_start".into()));
        }
        Ok(())
    }
}

/// Linear-kind model whose lag coefficients run from `model_start` at
/// `x_start` to `model_end` at `x_end`.
pub fn blend_models<T: Real>(spec: &BlendSpec<T>) -> Result<Model1D<T>> {
    spec.validate()?;
    let m = spec.model_start.m;
    let w = spec.x_end - spec.x_start;
    let mut p = Vec::with_capacity(m);
    let mut q = Vec::with_capacity(m + 1);
    for (&ps, &pe) in spec.model_start.p.iter().zip(&spec.model_end.p) {
        let slope = (pe - ps) / w;
        q.push(slope);
        p.push(ps - slope * spec.x_start);
    }
    q.push(T::zero());
    Model1D::new(m, spec.model_start.n, CoeffKind::Linear, p, q)
}

/// Smooth extension of `grid` over `range` under the blended model.
pub fn blend_extend<T: Real>(
    grid: &SampledGrid1D<T>,
    spec: &BlendSpec<T>,
    p: usize,
    mu: T,
    range: ExtensionRange1D,
) -> Result<SmoothExtension1D<T>> {
    let model = blend_models(spec)?;
    extend_smooth_1d(grid, &model, range, p, mu)
}
