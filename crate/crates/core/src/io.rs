//! Text formats: 1-D sample CSV, 2-D grid files and JSON model files.
//!
//! ```text
//! x,value
//! 0.0,1.0
//! 0.02,1.03
//! ```
//!
//! ```text
//! # grid2d x0=0.0 y0=0.0 h=0.1 nx=3 ny=2
//! 1.0,2.0,3.0
//! 4.0,5.0,6.0
//! ```
//!
//! Model files are JSON objects tagged by `kind`:
//!
//! ```text
//! {"kind":"model1d","m":2,"n":1,"u":{"type":"const"},"p":[..],"q":[..]}
//! {"kind":"model1d","m":2,"n":1,"u":{"type":"rational","alpha":1.0},"p":[..],"q":[..]}
//! {"kind":"model2d","m":2,"n":1,"P":[[..],[..]]}
//! ```

use std::fs;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{SampledGrid1D, SampledGrid2D};
use crate::model1d::{CoeffKind, Model1D};
use crate::model2d::Model2D;
use crate::scalar::Real;

fn fmt<T: Real>(v: T) -> String {
    format!("{:?}", v.as_f64())
}

fn parse_num<T: Real>(s: &str, line: usize) -> Result<T> {
    let v: f64 = s.trim().parse().map_err(|_| Error::Parse {
        line,
        message: format!("not a number: {:?}", s.trim()),
    })?;
    if !v.is_finite() {
        return Err(Error::Parse {
            line,
            message: format!("non-finite value {v}"),
        });
    }
    Ok(T::lit(v))
}

pub fn write_grid_1d<T: Real>(mut w: impl Write, grid: &SampledGrid1D<T>) -> Result<()> {
    writeln!(w, "x,value")?;
    for (k, &v) in grid.values.iter().enumerate() {
        writeln!(w, "{},{}", fmt(grid.x(k as i64)), fmt(v))?;
    }
    Ok(())
}

/// Reads a `x,value` CSV; abscissae must be uniformly spaced and increasing.
pub fn read_grid_1d<T: Real>(r: impl BufRead) -> Result<SampledGrid1D<T>> {
    let mut xs: Vec<T> = Vec::new();
    let mut vs: Vec<T> = Vec::new();
    let mut header = false;
    for (idx, line) in r.lines().enumerate() {
        let line = line?;
        let no = idx + 1;
        let t = line.trim();
        if t.is_empty() || t.starts_with('#') {
            continue;
        }
        if !header {
            let cols: Vec<_> = t.split(',').map(str::trim).collect();
            if cols != ["x", "value"] {
                return Err(Error::Parse {
                    line: no,
                    message: "expected header `x,value`".into(),
                });
            }
            header = true;
            continue;
        }
        let cells: Vec<&str> = t.split(',').collect();
        if cells.len() != 2 {
            return Err(Error::Parse {
                line: no,
                message: format!("expected 2 fields, found {}", cells.len()),
            });
        }
        xs.push(parse_num(cells[0], no)?);
        vs.push(parse_num(cells[1], no)?);
    }
    if !header {
        return Err(Error::Parse {
            line: 1,
            message: "missing header `x,value`".into(),
        });
    }
    if xs.len() < 2 {
        return Err(Error::InsufficientData("a 1-D sample file needs at least two rows".into()));
    }
    let n = xs.len() - 1;
    let a = xs[0];
    let h = (xs[n] - a) / T::from_usize_lossy(n);
    if !(h > T::zero()) {
        return Err(Error::Parse {
            line: 2,
            message: "abscissae must increase".into(),
        });
    }
    let tol = T::lit(1e-9) * (a.abs() + xs[n].abs()).max(h);
    for (k, &x) in xs.iter().enumerate() {
        if (x - (a + T::from_usize_lossy(k) * h)).abs() > tol {
            return Err(Error::Parse {
                line: k + 2,
                message: format!("abscissa {x} breaks the uniform mesh {h}"),
            });
        }
    }
    SampledGrid1D::new(a, h, vs)
}

pub fn write_grid_2d<T: Real>(mut w: impl Write, grid: &SampledGrid2D<T>) -> Result<()> {
    writeln!(
        w,
        "# grid2d x0={} y0={} h={} nx={} ny={}",
        fmt(grid.x0),
        fmt(grid.y0),
        fmt(grid.h),
        grid.nx,
        grid.ny
    )?;
    for row in grid.values.chunks(grid.nx) {
        let cells: Vec<String> = row.iter().map(|&v| fmt(v)).collect();
        writeln!(w, "{}", cells.join(","))?;
    }
    Ok(())
}

pub fn read_grid_2d<T: Real>(r: impl BufRead) -> Result<SampledGrid2D<T>> {
    let mut lines = r.lines().enumerate();
    let (x0, y0, h, nx, ny) = loop {
        let Some((idx, line)) = lines.next() else {
            return Err(Error::Parse {
                line: 1,
                message: "missing `# grid2d` header".into(),
            });
        };
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        break parse_header(line.trim(), idx + 1)?;
    };
    let mut values = Vec::with_capacity(nx * ny);
    let mut rows = 0;
    for (idx, line) in lines {
        let line = line?;
        let no = idx + 1;
        let t = line.trim();
        if t.is_empty() || t.starts_with('#') {
            continue;
        }
        let cells: Vec<&str> = t.split(',').collect();
        if cells.len() != nx {
            return Err(Error::Parse {
                line: no,
                message: format!("expected {nx} values, found {}", cells.len()),
            });
        }
        if rows == ny {
            return Err(Error::Parse {
                line: no,
                message: format!("more than ny={ny} rows"),
            });
        }
        for c in cells {
            values.push(parse_num(c, no)?);
        }
        rows += 1;
    }
    if rows != ny {
        return Err(Error::Parse {
            line: rows + 2,
            message: format!("expected {ny} rows, found {rows}"),
        });
    }
    SampledGrid2D::new(x0, y0, h, nx, ny, values)
}

fn parse_header<T: Real>(line: &str, no: usize) -> Result<(T, T, T, usize, usize)> {
    let bad = |message: String| Error::Parse { line: no, message };
    let rest = line
        .strip_prefix('#')
        .map(str::trim_start)
        .and_then(|s| s.strip_prefix("grid2d"))
        .ok_or_else(|| bad("expected `# grid2d` header".into()))?;
    let (mut x0, mut y0, mut h, mut nx, mut ny) = (None, None, None, None, None);
    for tok in rest.split_whitespace() {
        let (k, v) = tok.split_once('=').ok_or_else(|| bad(format!("malformed field {tok:?}")))?;
        match k {
            "x0" => x0 = Some(parse_num::<T>(v, no)?),
            "y0" => y0 = Some(parse_num::<T>(v, no)?),
            "h" => h = Some(parse_num::<T>(v, no)?),
            "nx" => nx = Some(v.parse::<usize>().map_err(|_| bad(format!("bad nx {v:?}")))?),
            "ny" => ny = Some(v.parse::<usize>().map_err(|_| bad(format!("bad ny {v:?}")))?),
            _ => return Err(bad(format!("unknown field {k:?}"))),
        }
    }
    match (x0, y0, h, nx, ny) {
        (Some(x0), Some(y0), Some(h), Some(nx), Some(ny)) => Ok((x0, y0, h, nx, ny)),
        _ => Err(bad("header needs x0, y0, h, nx and ny".into())),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
enum UFile {
    Const,
    Linear,
    Rational { alpha: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
enum ModelRecord {
    Model1d {
        m: usize,
        n: usize,
        u: UFile,
        p: Vec<f64>,
        q: Vec<f64>,
    },
    Model2d {
        m: usize,
        n: usize,
        #[serde(rename = "P")]
        p: Vec<Vec<f64>>,
    },
}

/// Contents of a model file.
#[derive(Debug, Clone, PartialEq)]
pub enum ModelFile<T> {
    Model1D(Model1D<T>),
    Model2D(Model2D<T>),
}

fn to_f64<T: Real>(v: &[T]) -> Vec<f64> {
    v.iter().map(|x| x.as_f64()).collect()
}

fn from_f64<T: Real>(v: &[f64]) -> Vec<T> {
    v.iter().map(|&x| T::lit(x)).collect()
}

impl<T: Real> ModelFile<T> {
    pub fn to_json(&self) -> Result<String> {
        let rec = match self {
            ModelFile::Model1D(m) => ModelRecord::Model1d {
                m: m.m,
                n: m.n,
                u: match m.kind {
                    CoeffKind::Constant => UFile::Const,
                    CoeffKind::Linear => UFile::Linear,
                    CoeffKind::Rational { alpha } => UFile::Rational { alpha: alpha.as_f64() },
                },
                p: to_f64(&m.p),
                q: to_f64(&m.q),
            },
            ModelFile::Model2D(m) => ModelRecord::Model2d {
                m: m.m,
                n: m.n,
                p: m.rows().iter().map(|r| to_f64(r)).collect(),
            },
        };
        serde_json::to_string_pretty(&rec).map_err(|e| Error::Io(e.to_string()))
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let rec: ModelRecord = serde_json::from_str(s).map_err(|e| Error::Parse {
            line: e.line(),
            message: e.to_string(),
        })?;
        match rec {
            ModelRecord::Model1d { m, n, u, p, q } => {
                let kind = match u {
                    UFile::Const => CoeffKind::Constant,
                    UFile::Linear => CoeffKind::Linear,
                    UFile::Rational { alpha } => CoeffKind::Rational { alpha: T::lit(alpha) },
                };
                Ok(ModelFile::Model1D(Model1D::new(m, n, kind, from_f64(&p), from_f64(&q))?))
            }
            ModelRecord::Model2d { m, n, p } => {
                let rows: Vec<Vec<T>> = p.iter().map(|r| from_f64(r)).collect();
                let model = Model2D::from_rows(n, &rows)?;
                if model.m != m {
                    return Err(Error::DimensionMismatch(format!("m = {m} but P is {} x {}", model.m, model.m)));
                }
                Ok(ModelFile::Model2D(model))
            }
        }
    }

    pub fn into_1d(self) -> Result<Model1D<T>> {
        match self {
            ModelFile::Model1D(m) => Ok(m),
            ModelFile::Model2D(_) => Err(Error::InvalidParameter("expected a model1d file".into())),
        }
    }

    pub fn into_2d(self) -> Result<Model2D<T>> {
        match self {
            ModelFile::Model2D(m) => Ok(m),
            ModelFile::Model1D(_) => Err(Error::InvalidParameter("expected a model2d file".into())),
        }
    }
}

pub fn load_grid_1d<T: Real>(path: impl AsRef<Path>) -> Result<SampledGrid1D<T>> {
    read_grid_1d(BufReader::new(fs::File::open(path)?))
}

pub fn save_grid_1d<T: Real>(path: impl AsRef<Path>, grid: &SampledGrid1D<T>) -> Result<()> {
    let mut buf = Vec::new();
    write_grid_1d(&mut buf, grid)?;
    Ok(fs::write(path, buf)?)
}

pub fn load_grid_2d<T: Real>(path: impl AsRef<Path>) -> Result<SampledGrid2D<T>> {
    read_grid_2d(BufReader::new(fs::File::open(path)?))
}

pub fn save_grid_2d<T: Real>(path: impl AsRef<Path>, grid: &SampledGrid2D<T>) -> Result<()> {
    let mut buf = Vec::new();
    write_grid_2d(&mut buf, grid)?;
    Ok(fs::write(path, buf)?)
}

pub fn load_model<T: Real>(path: impl AsRef<Path>) -> Result<ModelFile<T>> {
    ModelFile::from_json(&fs::read_to_string(path)?)
}

pub fn save_model<T: Real>(path: impl AsRef<Path>, model: &ModelFile<T>) -> Result<()> {
    let mut s = model.to_json()?;
    s.push('\n');
    Ok(fs::write(path, s)?)
}
