use std::fs;
use std::io::Write;
use std::path::Path;

use lpext::blend::{blend_extend, blend_models, BlendSpec};
use lpext::grid::{sample_1d, sample_2d, NoiseSpec, TestFunction};
use lpext::io::{load_grid_1d, load_grid_2d, load_model, save_grid_1d, save_grid_2d, save_model, ModelFile};
use lpext::model1d::fit_model_1d;
use lpext::model2d::fit_model_2d;
use lpext::prony::prony_from_model;
use lpext::smooth1d::{extend_smooth_1d, ExtensionRange1D};
use lpext::smooth2d::{extend_smooth_2d, ExtensionDomain2D, SolverOptions};
use lpext::spline::{
    approximate_extend_2d, build_spline_basis_1d, build_spline_basis_2d, coefficient_count, extend_model_spline_1d,
    fit_model_spline_1d, ExtensionStrategy,
};
use lpext::{CoeffKind, Error, Grid1D, Grid2D, Model1D, Model2D, Result};

use crate::report::Report;
use crate::{
    BlendArgs, Extend1dArgs, Extend2dArgs, Fit1dArgs, Fit2dArgs, GenArgs, PronyArgs, SplineBasisArgs, SplineFitArgs,
    Strategy,
};

fn parse_range(s: &str) -> Result<(f64, f64)> {
    let bad = || Error::InvalidParameter(format!("expected lo:hi, got {s:?}"));
    let (a, b) = s.split_once(':').ok_or_else(bad)?;
    let lo: f64 = a.trim().parse().map_err(|_| bad())?;
    let hi: f64 = b.trim().parse().map_err(|_| bad())?;
    if !lo.is_finite() || !hi.is_finite() || hi <= lo {
        return Err(Error::InvalidParameter(format!("empty range {s:?}")));
    }
    Ok((lo, hi))
}

fn parse_kind(s: &str) -> Result<CoeffKind> {
    match s.split_once(':') {
        None => match s {
            "const" => Ok(CoeffKind::Constant),
            "linear" => Ok(CoeffKind::Linear),
            "rational" => Ok(CoeffKind::Rational { alpha: 1.0 }),
            _ => Err(Error::InvalidParameter(format!("unknown u kind {s:?}"))),
        },
        Some(("rational", a)) => {
            let alpha: f64 = a
                .parse()
                .map_err(|_| Error::InvalidParameter(format!("bad rational alpha {a:?}")))?;
            Ok(CoeffKind::Rational { alpha })
        }
        _ => Err(Error::InvalidParameter(format!("unknown u kind {s:?}"))),
    }
}

fn model_1d(path: &Path) -> Result<Model1D> {
    load_model(path)?.into_1d()
}

fn model_2d(path: &Path) -> Result<Model2D> {
    load_model(path)?.into_2d()
}

fn fmt_vec(v: &[f64]) -> String {
    let parts: Vec<String> = v.iter().map(|x| format!("{x:?}")).collect();
    format!("[{}]", parts.join(", "))
}

pub fn gen(a: GenArgs) -> Result<()> {
    let f: TestFunction = a.function.parse()?;
    let noise = NoiseSpec::new(a.noise, a.seed)?;
    let mut rep = Report::new("gen");
    rep.put("function", f).num("noise", a.noise).put("seed", a.seed);
    if f.is_bivariate() {
        let g = sample_2d(f, a.a, a.b, a.h, noise)?;
        save_grid_2d(&a.output, &g)?;
        rep.put("nx", g.nx).put("ny", g.ny);
    } else {
        let g = sample_1d(f, a.a, a.b, a.h, noise)?;
        save_grid_1d(&a.output, &g)?;
        rep.put("nodes", g.len());
    }
    rep.write(&a.output)?;
    Ok(())
}

pub fn fit1d(a: Fit1dArgs) -> Result<()> {
    let grid = load_grid_1d(&a.input)?;
    let kind = parse_kind(&a.u)?;
    let fit = fit_model_1d(&grid, a.m, a.n, kind, a.ridge_p, a.ridge_q)?;
    save_model(&a.output, &ModelFile::Model1D(fit.model.clone()))?;
    Report::new("fit1d")
        .put("m", a.m)
        .put("n", a.n)
        .put("u", kind)
        .num("I1", fit.residual)
        .put("rows", fit.rows)
        .put("rank", fit.rank)
        .put("rank_deficient", fit.rank_deficient)
        .write(&a.output)?;
    Ok(())
}

pub fn prony(a: PronyArgs) -> Result<()> {
    let grid = load_grid_1d(&a.input)?;
    let model = match (&a.model, a.m, a.n) {
        (Some(p), _, _) => model_1d(p)?,
        (None, Some(m), Some(n)) => fit_model_1d(&grid, m, n, CoeffKind::Constant, 0.0, 0.0)?.model,
        _ => return Err(Error::InvalidParameter("give --model or both --m and --n".into())),
    };
    let (lo, hi) = parse_range(&a.range)?;
    let exp = prony_from_model(&grid, &model)?;
    let out = exp.extend(lo, hi, grid.h)?;
    save_grid_1d(&a.output, &out)?;
    let mut rep = Report::new("prony");
    for (k, r) in exp.basis.roots.iter().enumerate() {
        rep.put(&format!("root{k}"), format!("{:?} {:+?}i", r.re, r.im));
    }
    rep.put("terms", exp.basis.terms.len())
        .put("pruned", exp.basis.pruned)
        .put("restricted", exp.basis.restricted)
        .put("coefficients", fmt_vec(&exp.coeffs))
        .num("rms", exp.rms)
        .write(&a.output)?;
    Ok(())
}

pub fn extend1d(a: Extend1dArgs) -> Result<()> {
    let grid = load_grid_1d(&a.input)?;
    let model = model_1d(&a.model)?;
    let (lo, hi) = parse_range(&a.range)?;
    let range = ExtensionRange1D::from_interval(&grid, lo, hi)?;
    let ext = extend_smooth_1d(&grid, &model, range, a.p, a.mu)?;
    save_grid_1d(&a.output, &ext.grid)?;
    Report::new("extend1d")
        .put("p", a.p)
        .num("mu", a.mu)
        .num("S_p", ext.smoothness)
        .num("E", ext.data)
        .num("F", ext.objective)
        .num("model_residual", ext.model_residual)
        .num("condition", ext.condition)
        .put("rank_deficient", ext.rank_deficient)
        .write(&a.output)?;
    Ok(())
}

pub fn fit2d(a: Fit2dArgs) -> Result<()> {
    let grid = load_grid_2d(&a.input)?;
    let fit = fit_model_2d(&grid, a.m, a.n, a.ridge)?;
    save_model(&a.output, &ModelFile::Model2D(fit.model.clone()))?;
    Report::new("fit2d")
        .put("m", a.m)
        .put("n", a.n)
        .num("I2", fit.residual)
        .put("rows", fit.rows)
        .put("rank", fit.rank)
        .put("rank_deficient", fit.rank_deficient)
        .write(&a.output)?;
    Ok(())
}

pub fn extend2d(a: Extend2dArgs) -> Result<()> {
    let grid = load_grid_2d(&a.input)?;
    let model = match (&a.model, a.m) {
        (Some(p), _) => model_2d(p)?,
        (None, Some(m)) => fit_model_2d(&grid, m, a.n.unwrap_or(1), 0.0)?.model,
        _ => return Err(Error::InvalidParameter("give --model or --m".into())),
    };
    let (c, d) = parse_range(&a.domain)?;
    let domain = ExtensionDomain2D::square(&grid, c, d)?;
    let opts = SolverOptions {
        rtol: a.rtol,
        max_iter: a.max_iter,
    };
    let ext = extend_smooth_2d(&grid, &model, &domain, a.mu, opts)?;
    save_grid_2d(&a.output, &ext.grid)?;
    Report::new("extend2d")
        .put("m", model.m)
        .put("n", model.n)
        .num("mu", a.mu)
        .num("S", ext.smoothness)
        .num("E", ext.data)
        .num("F", ext.objective)
        .put("unknowns", ext.unknowns)
        .put("constraints", ext.constraints)
        .put("iterations", ext.iterations)
        .num("residual", ext.residual)
        .num("constraint_residual", ext.constraint_residual)
        .write(&a.output)?;
    Ok(())
}

fn lattice(lo: f64, hi: f64, h: f64) -> Result<Vec<f64>> {
    let n = lpext::grid::interval_count(lo, hi, h)?;
    Ok((0..=n).map(|k| lo + k as f64 * h).collect())
}

pub fn splinebasis(a: SplineBasisArgs) -> Result<()> {
    let (lo, hi) = parse_range(&a.range)?;
    let d = a.mesh;
    let h = a.h.unwrap_or(d / 4.0);
    let xs = lattice(lo, hi, h)?;
    let count = coefficient_count(hi - lo, d)?;
    let mut out = Vec::new();
    let mut rep = Report::new("splinebasis");
    match load_model::<f64>(&a.model)? {
        ModelFile::Model1D(model) => {
            let basis = build_spline_basis_1d(&model, lo, d, count, &[])?;
            let names: Vec<String> = (0..basis.len()).map(|k| format!("s{k}")).collect();
            writeln!(out, "x,{}", names.join(","))?;
            for &x in &xs {
                let vals = (0..basis.len())
                    .map(|k| basis.eval_member(k, x).map(|v| format!("{v:?}")))
                    .collect::<Result<Vec<_>>>()?;
                writeln!(out, "{x:?},{}", vals.join(","))?;
            }
            rep.put("dimension", 1).put("size", basis.len());
        }
        ModelFile::Model2D(model) => {
            let basis = build_spline_basis_2d(&model, lo, lo, d, count, count)?;
            let names: Vec<String> = (0..basis.len()).map(|k| format!("b{k}")).collect();
            writeln!(out, "x,y,{}", names.join(","))?;
            for &y in &xs {
                for &x in &xs {
                    let vals = (0..basis.len())
                        .map(|k| basis.eval_member(k, x, y).map(|v| format!("{v:?}")))
                        .collect::<Result<Vec<_>>>()?;
                    writeln!(out, "{x:?},{y:?},{}", vals.join(","))?;
                }
            }
            rep.put("dimension", 2).put("size", basis.len());
        }
    }
    fs::write(&a.output, out)?;
    rep.put("coefficients_per_axis", count).num("mesh", d).write(&a.output)?;
    Ok(())
}

pub fn splinefit(a: SplineFitArgs) -> Result<()> {
    let mut rep = Report::new("splinefit");
    match load_model::<f64>(&a.model)? {
        ModelFile::Model1D(model) => {
            if a.strategy == Strategy::GlobalBand {
                return Err(Error::Unsupported("the global-band strategy applies to 2-D models".into()));
            }
            let grid: Grid1D = load_grid_1d(&a.input)?;
            let d = a.mesh.unwrap_or(model.n as f64 * grid.h);
            let (lo, hi) = match &a.range {
                Some(r) => parse_range(r)?,
                None => (grid.a, grid.b()),
            };
            let count = coefficient_count(grid.b() - grid.a, d)?;
            let basis = build_spline_basis_1d(&model, grid.a, d, count, &a.shifts)?;
            let fitted = fit_model_spline_1d(&grid, &basis)?;
            let out = extend_model_spline_1d(&fitted, lo, hi, grid.h)?;
            save_grid_1d(&a.output, &out)?;
            rep.put("size", basis.len())
                .num("mesh", d)
                .num("rms", fitted.rms)
                .put("rank_deficient", fitted.rank_deficient);
        }
        ModelFile::Model2D(model) => {
            let grid: Grid2D = load_grid_2d(&a.input)?;
            let d = a.mesh.unwrap_or(model.n as f64 * grid.h);
            let (lo, hi) = match &a.range {
                Some(r) => parse_range(r)?,
                None => (grid.x0.min(grid.y0), grid.x(grid.nx as i64 - 1).max(grid.y(grid.ny as i64 - 1))),
            };
            let strategy = match a.strategy {
                Strategy::FitThenPropagate => ExtensionStrategy::FitThenPropagate,
                Strategy::GlobalBand => ExtensionStrategy::GlobalBand { ridge: a.ridge },
            };
            let ext = approximate_extend_2d(&grid, &model, d, lo, hi, strategy)?;
            save_grid_2d(&a.output, &ext.grid)?;
            rep.put("size", ext.basis_size)
                .put("free_entries", ext.free_entries)
                .num("mesh", d)
                .num("rms", ext.spline.rms)
                .put("rank_deficient", ext.spline.rank_deficient);
        }
    }
    rep.put("strategy", format!("{:?}", a.strategy)).write(&a.output)?;
    Ok(())
}

pub fn blend(a: BlendArgs) -> Result<()> {
    let grid = load_grid_1d(&a.input)?;
    let spec = BlendSpec::new(model_1d(&a.model_start)?, model_1d(&a.model_end)?, a.x_start, a.x_end)?;
    let (lo, hi) = parse_range(&a.range)?;
    let range = ExtensionRange1D::from_interval(&grid, lo, hi)?;
    let blended = blend_models(&spec)?;
    let ext = blend_extend(&grid, &spec, a.p, a.mu, range)?;
    save_grid_1d(&a.output, &ext.grid)?;
    Report::new("blend")
        .put("p_blend", fmt_vec(&blended.p))
        .put("q_blend", fmt_vec(&blended.q))
        .num("mu", a.mu)
        .num("S_p", ext.smoothness)
        .num("E", ext.data)
        .num("F", ext.objective)
        .num("model_residual", ext.model_residual)
        .write(&a.output)?;
    Ok(())
}
