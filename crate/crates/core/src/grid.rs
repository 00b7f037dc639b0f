//! Uniformly sampled data, the reference test functions and seeded noise.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::scalar::{all_finite, Real};

/// Samples `values[k]` at `x = a + k h`.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledGrid1D<T> {
    pub a: T,
    pub h: T,
    pub values: Vec<T>,
}

impl<T: Real> SampledGrid1D<T> {
    pub fn new(a: T, h: T, values: Vec<T>) -> Result<Self> {
        if !(h > T::zero()) || !h.is_finite() || !a.is_finite() {
            return Err(Error::InvalidParameter("mesh h must be positive and finite".into()));
        }
        if values.len() < 2 {
            return Err(Error::InsufficientData("a 1-D grid needs at least two nodes".into()));
        }
        if !all_finite(&values) {
            return Err(Error::NonFinite("grid values".into()));
        }
        Ok(Self { a, h, values })
    }

    /// Index of the last node (`N`).
    pub fn last_index(&self) -> usize {
        self.values.len() - 1
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Abscissa of node `i`, which may lie outside `0..=N`.
    pub fn x(&self, i: i64) -> T {
        self.a + T::from_i64_lossy(i) * self.h
    }

    /// Right end `a + N h`.
    pub fn b(&self) -> T {
        self.x(self.last_index() as i64)
    }

    pub fn nodes(&self) -> Vec<T> {
        (0..self.values.len()).map(|i| self.x(i as i64)).collect()
    }
}

/// Samples on an `nx x ny` lattice; `values[j * nx + i]` sits at
/// `(x0 + i h, y0 + j h)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledGrid2D<T> {
    pub x0: T,
    pub y0: T,
    pub h: T,
    pub nx: usize,
    pub ny: usize,
    pub values: Vec<T>,
}

impl<T: Real> SampledGrid2D<T> {
    pub fn new(x0: T, y0: T, h: T, nx: usize, ny: usize, values: Vec<T>) -> Result<Self> {
        if !(h > T::zero()) || !h.is_finite() || !x0.is_finite() || !y0.is_finite() {
            return Err(Error::InvalidParameter("mesh h must be positive and finite".into()));
        }
        if nx == 0 || ny == 0 {
            return Err(Error::InsufficientData("empty 2-D grid".into()));
        }
        if values.len() != nx * ny {
            return Err(Error::DimensionMismatch(format!(
                "{} values for a {nx} x {ny} grid",
                values.len()
            )));
        }
        if !all_finite(&values) {
            return Err(Error::NonFinite("grid values".into()));
        }
        Ok(Self {
            x0,
            y0,
            h,
            nx,
            ny,
            values,
        })
    }

    pub fn zeros(x0: T, y0: T, h: T, nx: usize, ny: usize) -> Self {
        Self {
            x0,
            y0,
            h,
            nx,
            ny,
            values: vec![T::zero(); nx * ny],
        }
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> T {
        self.values[j * self.nx + i]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: T) {
        self.values[j * self.nx + i] = v;
    }

    pub fn x(&self, i: i64) -> T {
        self.x0 + T::from_i64_lossy(i) * self.h
    }

    pub fn y(&self, j: i64) -> T {
        self.y0 + T::from_i64_lossy(j) * self.h
    }

    /// Swaps the roles of x and y.
    pub fn transpose(&self) -> Self {
        let mut values = vec![T::zero(); self.values.len()];
        for j in 0..self.ny {
            for i in 0..self.nx {
                values[i * self.ny + j] = self.get(i, j);
            }
        }
        Self {
            x0: self.y0,
            y0: self.x0,
            h: self.h,
            nx: self.ny,
            ny: self.nx,
            values,
        }
    }
}

/// The four reference functions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TestFunction {
    F1,
    F2,
    F3,
    F4,
}

impl TestFunction {
    pub fn is_bivariate(self) -> bool {
        matches!(self, TestFunction::F3 | TestFunction::F4)
    }

    pub fn eval<T: Real>(self, x: T, y: Option<T>) -> Result<T> {
        let l = T::lit;
        match (self, y) {
            (TestFunction::F1, None) => {
                Ok(l(0.8).powf(x) - x.cos() + l(2.0) * (l(2.0) * x).sin() + (x + T::one()).recip())
            }
            (TestFunction::F2, None) => {
                if x < T::zero() {
                    return Err(Error::Domain(format!("f2 is undefined for x = {x} < 0")));
                }
                Ok(l(5.0) * (l(2.0) * x).cos() / (x * x + T::one()) + x.powf(l(1.5)) * x.sin())
            }
            (TestFunction::F3, Some(y)) => {
                let d = x - l(2.0);
                Ok(l(0.4) * (l(4.0) * (x + y)).cos() + l(0.6) * y * (l(3.0) * (x - y)).sin() - d * d)
            }
            (TestFunction::F4, Some(y)) => {
                let d = x - l(2.0);
                Ok(x * x - y * y * y + l(2.0) + x - y + l(20.0) * (-d * d).exp())
            }
            (f, None) => Err(Error::InvalidParameter(format!("{f} needs a y coordinate"))),
            (f, Some(_)) => Err(Error::InvalidParameter(format!("{f} takes no y coordinate"))),
        }
    }
}

impl fmt::Display for TestFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            TestFunction::F1 => "f1",
            TestFunction::F2 => "f2",
            TestFunction::F3 => "f3",
            TestFunction::F4 => "f4",
        };
        f.write_str(s)
    }
}

impl FromStr for TestFunction {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "f1" => Ok(TestFunction::F1),
            "f2" => Ok(TestFunction::F2),
            "f3" => Ok(TestFunction::F3),
            "f4" => Ok(TestFunction::F4),
            _ => Err(Error::InvalidParameter(format!("unknown test function `{s}`"))),
        }
    }
}

/// Uniform noise on `[-amplitude, amplitude]` drawn from a seeded stream.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseSpec {
    pub amplitude: f64,
    pub seed: u64,
}

impl NoiseSpec {
    pub fn none() -> Self {
        Self {
            amplitude: 0.0,
            seed: 0,
        }
    }

    pub fn new(amplitude: f64, seed: u64) -> Result<Self> {
        if !(amplitude >= 0.0) || !amplitude.is_finite() {
            return Err(Error::InvalidParameter("noise amplitude must be >= 0".into()));
        }
        Ok(Self { amplitude, seed })
    }

    /// Noise value number `k` of the stream.
    pub fn sample(&self, k: u64) -> f64 {
        if self.amplitude == 0.0 {
            return 0.0;
        }
        let u = (splitmix64(self.seed, k) >> 11) as f64 * (1.0 / (1u64 << 53) as f64);
        self.amplitude * (2.0 * u - 1.0)
    }
}

/// splitmix64 output for position `k` of the stream started at `seed`.
pub fn splitmix64(seed: u64, k: u64) -> u64 {
    let mut z = seed.wrapping_add(k.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Number of mesh intervals in `[a, b]`; rejects meshes that do not divide
/// the interval.
pub fn interval_count<T: Real>(a: T, b: T, h: T) -> Result<usize> {
    if !(h > T::zero()) || !a.is_finite() || !b.is_finite() || !h.is_finite() {
        return Err(Error::InvalidParameter("mesh h must be positive and finite".into()));
    }
    if !(b > a) {
        return Err(Error::InvalidParameter(format!("empty interval [{a}, {b}]")));
    }
    let r = (b - a) / h;
    let k = r.round();
    if (r - k).abs() > T::lit(8.0) * T::epsilon() * r.max(T::one()) {
        return Err(Error::InvalidParameter(format!(
            "mesh {h} does not divide [{a}, {b}] into an integral number of steps"
        )));
    }
    k.to_usize()
        .ok_or_else(|| Error::InvalidParameter("too many nodes".into()))
}

pub fn sample_1d<T: Real>(f: TestFunction, a: T, b: T, h: T, noise: NoiseSpec) -> Result<SampledGrid1D<T>> {
    if f.is_bivariate() {
        return Err(Error::InvalidParameter(format!("{f} is bivariate")));
    }
    let n = interval_count(a, b, h)?;
    let values = (0..=n)
        .map(|k| {
            let x = a + T::from_usize_lossy(k) * h;
            Ok(f.eval(x, None)? + T::lit(noise.sample(k as u64)))
        })
        .collect::<Result<Vec<T>>>()?;
    SampledGrid1D::new(a, h, values)
}

/// Samples a bivariate function on the square `[lo, hi]^2`.
pub fn sample_2d<T: Real>(f: TestFunction, lo: T, hi: T, h: T, noise: NoiseSpec) -> Result<SampledGrid2D<T>> {
    if !f.is_bivariate() {
        return Err(Error::InvalidParameter(format!("{f} is univariate")));
    }
    let n = interval_count(lo, hi, h)? + 1;
    let mut values = Vec::with_capacity(n * n);
    for j in 0..n {
        let y = lo + T::from_usize_lossy(j) * h;
        for i in 0..n {
            let x = lo + T::from_usize_lossy(i) * h;
            values.push(f.eval(x, Some(y))? + T::lit(noise.sample((j * n + i) as u64)));
        }
    }
    SampledGrid2D::new(lo, lo, h, n, n, values)
}
