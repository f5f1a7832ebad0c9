use std::path::Path;
use std::str::FromStr;

use anyhow::{bail, ensure, Context, Result};
use log::{info, warn};
use polybohr::bohrradii::{
    bound_c, bound_k, bound_omega, closed_bounds, majorant_curve, solve_t_m, MajorantKind, DEFAULT_RADIUS_TOL,
};
use polybohr::fockmodel::io::read_polynomial;
use polybohr::fockmodel::{assemble, evaluate_scalar, FreePolynomial, Scaling, Truncation};
use polybohr::opanalysis::{numerical_radius, operator_norm, SpectralResult};
use polybohr::verification::{run_named, SuiteConfig, SuiteReport, SUITE_NAMES};
use polybohr::C64;
use rayon::prelude::*;
use serde_json::Value;

use crate::output::{emit, render, round_num, Format, Table};
use crate::{Cli, Command, CurveKind};

pub fn run(cli: &Cli) -> Result<bool> {
    ensure!(cli.tol > 0.0 && cli.tol.is_finite(), "--tol must be positive");
    if let Some(t) = &cli.trunc {
        ensure!(!t.is_empty() && t.iter().all(|&d| d >= 1), "--trunc degrees must be at least 1");
    }
    let out = cli.out.as_deref();
    match &cli.command {
        Command::Radii { k, m } => {
            let tables = radii(parse_range(k)?, parse_range(m)?)?;
            emit(&render(&tables, cli.format), out)?;
        }
        Command::Curve { kind, file, k, grid } => {
            let table = curve(*kind, file.as_deref(), *k, &parse_grid(grid)?, cli)?;
            emit(&render(&[table], cli.format), out)?;
        }
        Command::Norm { file, r, sweep } => {
            let table = spectral("norm", file, *r, *sweep, cli, operator_norm)?;
            emit(&render(&[table], cli.format), out)?;
        }
        Command::Numrad { file, r, sweep } => {
            let table = spectral("numrad", file, *r, *sweep, cli, numerical_radius)?;
            emit(&render(&[table], cli.format), out)?;
        }
        Command::Eval { file, point } => {
            let f = read_polynomial(file).with_context(|| format!("reading {}", file.display()))?;
            let z = parse_point(point)?;
            let v = evaluate_scalar(&f, &z)?;
            let mut t = Table::new("eval", &["row", "col", "re", "im"]);
            for r in 0..v.nrows() {
                for c in 0..v.ncols() {
                    t.push(vec![r.into(), c.into(), v[(r, c)].re.into(), v[(r, c)].im.into()]);
                }
            }
            emit(&render(&[t], cli.format), out)?;
        }
        Command::Verify { suite, headroom, m_max, perturb_constant } => {
            let cfg = SuiteConfig {
                seed: cli.seed,
                trials: cli.trials,
                tol: cli.tol,
                headroom: *headroom,
                m_max: *m_max,
                constant_scale: *perturb_constant,
                ..Default::default()
            };
            return verify(suite, &cfg, cli.format, out);
        }
    }
    Ok(true)
}

/// `a:b` inclusive, or a single value.
pub fn parse_range(s: &str) -> Result<(usize, usize)> {
    let (a, b) = match s.split_once(':') {
        Some((a, b)) => (a.trim().parse()?, b.trim().parse()?),
        None => {
            let v = s.trim().parse()?;
            (v, v)
        }
    };
    ensure!(a >= 1 && a <= b, "invalid range {s:?}: need 1 <= start <= end");
    Ok((a, b))
}

/// `start:stop:count` with `count ≥ 1` evenly spaced points.
pub fn parse_grid(s: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = s.split(':').collect();
    ensure!(parts.len() == 3, "grid {s:?} is not start:stop:count");
    let a: f64 = parts[0].trim().parse()?;
    let b: f64 = parts[1].trim().parse()?;
    let n: usize = parts[2].trim().parse()?;
    ensure!(n >= 1 && a.is_finite() && b.is_finite() && a <= b, "invalid grid {s:?}");
    if n == 1 {
        return Ok(vec![a]);
    }
    Ok((0..n).map(|i| if i + 1 == n { b } else { a + (b - a) * i as f64 / (n - 1) as f64 }).collect())
}

/// Factors separated by `;`, coordinates by `,`; complex entries like `0.1-0.2i`.
pub fn parse_point(s: &str) -> Result<Vec<Vec<C64>>> {
    s.split(';')
        .map(|factor| {
            factor
                .split(',')
                .map(|x| C64::from_str(x.trim()).map_err(|e| anyhow::anyhow!("bad coordinate {x:?}: {e}")))
                .collect()
        })
        .collect()
}

fn radii(k: (usize, usize), m: (usize, usize)) -> Result<Vec<Table>> {
    let bounds = (k.0..=k.1).into_par_iter().map(closed_bounds).collect::<polybohr::Result<Vec<_>>>()?;
    let mut kt = Table::new(
        "k",
        &["k", "simple", "gamma_k", "sqrt_lower", "log_upper", "mh0_simple", "mh0_lower", "t_k0"],
    );
    for b in bounds {
        kt.push(vec![
            b.k.into(),
            b.mh_lower_simple.into(),
            b.mh_lower_gamma.into(),
            b.mh_lower_sqrt.into(),
            b.log_bound.into(),
            b.mh0_lower_simple.into(),
            b.mh0_lower.into(),
            b.t_k0.into(),
        ]);
    }
    let ts = (m.0..=m.1)
        .into_par_iter()
        .map(|m| solve_t_m(m, DEFAULT_RADIUS_TOL))
        .collect::<polybohr::Result<Vec<_>>>()?;
    let mut mt = Table::new("m", &["m", "t_m"]);
    for (i, t) in ts.iter().enumerate() {
        if let Some(w) = &t.warning {
            warn!("{w}");
        }
        mt.push(vec![(m.0 + i).into(), t.value.into()]);
    }
    Ok(vec![kt, mt])
}

fn load(file: &Path) -> Result<FreePolynomial> {
    read_polynomial(file).with_context(|| format!("reading {}", file.display()))
}

fn truncation_for(f: &FreePolynomial, cli: &Cli) -> Result<Truncation> {
    match &cli.trunc {
        Some(t) => {
            ensure!(t.len() == f.k(), "--trunc has {} degrees for {} factors", t.len(), f.k());
            Ok(Truncation::new(t, f.alphabet_sizes())?)
        }
        None => Ok(f.truncation_with_headroom(4)?),
    }
}

fn curve(kind: CurveKind, file: Option<&Path>, k: usize, grid: &[f64], cli: &Cli) -> Result<Table> {
    let mut t = Table::new("curve", &["r", "value"]);
    let values: Vec<f64> = match kind {
        CurveKind::D | CurveKind::M => {
            let Some(file) = file else { bail!("curves D and M need --file") };
            let f = load(file)?;
            let trunc = truncation_for(&f, cli)?;
            let mk = if kind == CurveKind::D { MajorantKind::MultiHomogeneous } else { MajorantKind::Homogeneous };
            info!("majorant at truncation {:?}", trunc.degrees());
            majorant_curve(&f, mk, grid, &trunc, cli.tol)?.values
        }
        CurveKind::C | CurveKind::K | CurveKind::Omega => {
            ensure!(k >= 1, "k must be at least 1");
            grid.par_iter()
                .map(|&r| match kind {
                    CurveKind::C => bound_c(&vec![r; k]),
                    CurveKind::K => bound_k(&vec![r; k]),
                    _ => bound_omega(r, k),
                })
                .collect::<polybohr::Result<_>>()?
        }
    };
    for (r, v) in grid.iter().zip(values) {
        t.push(vec![(*r).into(), v.into()]);
    }
    Ok(t)
}

fn spectral(
    name: &str,
    file: &Path,
    r: f64,
    sweep: bool,
    cli: &Cli,
    solve: fn(&polybohr::fockmodel::ComplexMatrix, f64) -> polybohr::Result<SpectralResult>,
) -> Result<Table> {
    ensure!((0.0..=1.0).contains(&r), "r must lie in [0, 1]");
    let f = load(file)?;
    let top = truncation_for(&f, cli)?;
    let fd = f.factor_degrees();
    let top_deg = top.degrees();
    let levels = if sweep { top_deg.iter().zip(&fd).map(|(t, d)| t.saturating_sub(*d)).max().unwrap_or(0) } else { 0 };
    let truncs: Vec<Vec<usize>> = (0..=levels)
        .map(|j| {
            if sweep {
                top_deg.iter().zip(&fd).map(|(&t, &d)| (d + j).min(t)).collect()
            } else {
                top_deg.clone()
            }
        })
        .collect();
    let rows = truncs
        .par_iter()
        .map(|ds| {
            let trunc = Truncation::new(ds, f.alphabet_sizes())?;
            let a = assemble(&f, &Scaling::Uniform(r), &trunc)?;
            Ok((ds.clone(), trunc.dim(), solve(&a, cli.tol)?))
        })
        .collect::<polybohr::Result<Vec<_>>>()?;
    let mut t = Table::new(name, &["truncation", "dim", "r", "value", "residual"]);
    for (ds, dim, res) in rows {
        let label: Vec<String> = ds.iter().map(usize::to_string).collect();
        t.push(vec![label.join(";").into(), dim.into(), r.into(), res.value.into(), res.residual.into()]);
    }
    Ok(t)
}

fn round_all(v: Value) -> Value {
    match v {
        Value::Number(n) if !(n.is_i64() || n.is_u64()) => n.as_f64().map_or(Value::Number(n), round_num),
        Value::Array(a) => Value::Array(a.into_iter().map(round_all).collect()),
        Value::Object(o) => Value::Object(o.into_iter().map(|(k, v)| (k, round_all(v))).collect()),
        other => other,
    }
}

fn verify(names: &[String], cfg: &SuiteConfig, format: Format, out: Option<&Path>) -> Result<bool> {
    let names: Vec<&str> =
        if names.is_empty() { SUITE_NAMES.to_vec() } else { names.iter().map(String::as_str).collect() };
    let mut reports: Vec<SuiteReport> = Vec::new();
    for name in names {
        let start = std::time::Instant::now();
        let report = run_named(name, cfg)?;
        info!("{name}: {:.2}s", start.elapsed().as_secs_f64());
        if !report.pass {
            eprint!("{report}");
        }
        reports.push(report);
    }
    let mut t = Table::new("verify", &["suite", "trials", "cases", "violations", "max_slack", "pass"]);
    for r in &reports {
        t.push(vec![
            r.name.as_str().into(),
            r.trials.into(),
            r.cases.into(),
            r.violations.len().into(),
            r.max_slack_used.into(),
            if r.pass { "true" } else { "false" }.into(),
        ]);
    }
    emit(&render(&[t], format), None)?;
    if let Some(path) = out {
        let json = round_all(serde_json::to_value(&reports)?);
        emit(&(serde_json::to_string_pretty(&json)? + "\n"), Some(path))?;
    }
    Ok(reports.iter().all(|r| r.pass))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ranges_and_grids() {
        assert_eq!(parse_range("2:5").unwrap(), (2, 5));
        assert_eq!(parse_range("3").unwrap(), (3, 3));
        assert!(parse_range("5:2").is_err());
        assert!(parse_range("0:2").is_err());
        assert_eq!(parse_grid("0:1:3").unwrap(), vec![0.0, 0.5, 1.0]);
        assert_eq!(parse_grid("0.2:0.2:1").unwrap(), vec![0.2]);
        assert!(parse_grid("0:1").is_err());
    }

    #[test]
    fn points() {
        let z = parse_point("0.1+0.2i,0.3;-0.4i").unwrap();
        assert_eq!(z, vec![vec![C64::new(0.1, 0.2), C64::new(0.3, 0.0)], vec![C64::new(0.0, -0.4)]]);
        assert!(parse_point("x").is_err());
    }
}
