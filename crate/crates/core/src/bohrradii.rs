//! Majorant series, closed-form bound functions and the radius equations.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::fockmodel::{assemble, FreePolynomial, Scaling, Truncation};
use crate::opanalysis::operator_norm;

/// Default tolerance on the solved argument.
pub const DEFAULT_RADIUS_TOL: f64 = 1e-12;
/// Series truncation certificate target.
pub const SERIES_TAIL_TOL: f64 = 1e-13;
pub const MAX_BISECTIONS: usize = 200;
const MAX_SERIES_TERMS: usize = 50_000_000;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RadiusResult {
    pub value: f64,
    /// `|f(value) − target|`, including the series tail.
    pub residual: f64,
    pub bracket: (f64, f64),
    pub tail_bound: f64,
    pub series_terms_used: usize,
    pub iterations: usize,
    pub warning: Option<String>,
}

/// Partial sum of `Σ_{m≥1} C(m+k−1, k−1)^{1/2} r^m`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SeriesValue {
    pub partial: f64,
    /// Upper bound on the discarded tail; infinite when summation stopped
    /// early because the partial sum passed `stop_above`.
    pub tail: f64,
    pub terms: usize,
}

/// Sums the binomial series at `r ∈ [0, 1)`. Terms have ratio
/// `r·sqrt((m+k)/(m+1))`, decreasing to `r`, so once it drops below one the
/// tail after term `M` is at most `a_{M+1} / (1 − ratio_{M+1})`.
pub fn binomial_series(k: usize, r: f64, stop_above: f64) -> Result<SeriesValue> {
    if k == 0 {
        return Err(Error::InvalidParameter("k must be at least 1".into()));
    }
    if !(0.0..1.0).contains(&r) {
        return Err(Error::OutsideDomain(format!("series radius {r} must lie in [0, 1)")));
    }
    let kf = k as f64;
    let mut term = kf.sqrt() * r;
    let mut partial = 0.0;
    let mut comp = 0.0;
    for m in 1..=MAX_SERIES_TERMS {
        // Kahan summation of a_m.
        let y = term - comp;
        let t = partial + y;
        comp = (t - partial) - y;
        partial = t;
        if partial > stop_above {
            return Ok(SeriesValue { partial, tail: f64::INFINITY, terms: m });
        }
        let mf = m as f64;
        let ratio = r * ((mf + kf) / (mf + 1.0)).sqrt();
        let next = term * ratio;
        let next_ratio = r * ((mf + 1.0 + kf) / (mf + 2.0)).sqrt();
        if next_ratio < 1.0 {
            let tail = next / (1.0 - next_ratio);
            if tail < SERIES_TAIL_TOL {
                return Ok(SeriesValue { partial, tail, terms: m });
            }
        }
        term = next;
    }
    Err(Error::NotConverged { what: "binomial series".into(), iterations: MAX_SERIES_TERMS, residual: f64::INFINITY })
}

/// Bisection for the root of an increasing function on `[lo, hi]`, where
/// `eval(x)` returns `(f(x) − target, uncertainty)`.
fn bisect(
    mut lo: f64,
    mut hi: f64,
    tol: f64,
    eval: &dyn Fn(f64) -> Result<(f64, f64, usize)>,
) -> Result<(f64, f64, (f64, f64), f64, usize, usize)> {
    let (flo, _, _) = eval(lo)?;
    let (fhi, _, _) = eval(hi)?;
    if !(flo < 0.0 && fhi > 0.0) {
        return Err(Error::InvalidParameter(format!("no sign change on [{lo}, {hi}]: {flo}, {fhi}")));
    }
    // Strict increase on a sample grid before trusting the bracket.
    let mut prev = flo;
    for j in 1..=32 {
        let x = lo + (hi - lo) * j as f64 / 33.0;
        let (fx, _, _) = eval(x)?;
        if fx <= prev {
            return Err(Error::InvalidParameter(format!("defining function is not increasing near {x}")));
        }
        prev = fx;
    }
    let mut iterations = 0;
    while iterations < MAX_BISECTIONS {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        iterations += 1;
        let (fm, _, _) = eval(mid)?;
        if fm < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= tol * 1e-3 {
            break;
        }
    }
    if hi - lo > tol {
        return Err(Error::NotConverged { what: "bisection".into(), iterations, residual: hi - lo });
    }
    // Report the endpoint with the smaller residual.
    let (fl, ul, nl) = eval(lo)?;
    let (fh, uh, nh) = eval(hi)?;
    let (value, f, u, n) = if fl.abs() + ul <= fh.abs() + uh { (lo, fl, ul, nl) } else { (hi, fh, uh, nh) };
    Ok((value, f.abs() + u, (lo, hi), u, n, iterations))
}

fn solve_series(k: usize, target: f64, hi: f64, tol: f64) -> Result<RadiusResult> {
    if k == 0 {
        return Err(Error::InvalidParameter("k must be at least 1".into()));
    }
    let eval = |r: f64| -> Result<(f64, f64, usize)> {
        let s = binomial_series(k, r, f64::INFINITY)?;
        Ok((s.partial + 0.5 * s.tail - target, 0.5 * s.tail, s.terms))
    };
    let (value, residual, bracket, tail, terms, iterations) = bisect(0.0, hi, tol, &eval)?;
    Ok(RadiusResult {
        value,
        residual,
        bracket,
        tail_bound: 2.0 * tail,
        series_terms_used: terms,
        iterations,
        warning: None,
    })
}

/// `γ_k`: the root of `Σ_{m≥1} C(m+k−1,k−1)^{1/2} r^m = 1/2`.
pub fn solve_gamma_k(k: usize, tol: f64) -> Result<RadiusResult> {
    // The k = 1 series r/(1−r) is a lower bound, so γ_k ≤ 1/3.
    solve_series(k, 0.5, 0.34, tol)
}

/// `t_k⁰`: the root of the same series set equal to 1.
pub fn solve_t_k0(k: usize, tol: f64) -> Result<RadiusResult> {
    solve_series(k, 1.0, 0.51, tol)
}

/// `Σ_{q=1}^m t^q cos(π/(⌊m/q⌋+2))`.
pub fn t_m_polynomial(m: usize, t: f64) -> f64 {
    (1..=m)
        .rev()
        .fold(0.0, |acc, q| (acc + (std::f64::consts::PI / ((m / q) as f64 + 2.0)).cos()) * t)
}

/// `t_m`: the root in `[1/3, 1]` of `Σ_{q=1}^m t^q cos(π/(⌊m/q⌋+2)) = 1/2`.
///
/// For `m = 1` the equation reads `t/2 = 1/2`, so the root is the endpoint
/// `t = 1`; it is returned with a warning.
pub fn solve_t_m(m: usize, tol: f64) -> Result<RadiusResult> {
    match m {
        0 => Err(Error::InvalidParameter("m must be at least 1".into())),
        1 => Ok(RadiusResult {
            value: 1.0,
            residual: (t_m_polynomial(1, 1.0) - 0.5).abs(),
            bracket: (1.0, 1.0),
            tail_bound: 0.0,
            series_terms_used: 1,
            iterations: 0,
            warning: Some("m = 1: the root is the endpoint t = 1, outside the open interval".into()),
        }),
        _ => {
            let eval = |t: f64| -> Result<(f64, f64, usize)> {
                Ok((t_m_polynomial(m, t) - 0.5, 4.0 * m as f64 * f64::EPSILON, m))
            };
            let (value, residual, bracket, _, terms, iterations) = bisect(1.0 / 3.0, 1.0, tol, &eval)?;
            Ok(RadiusResult { value, residual, bracket, tail_bound: 0.0, series_terms_used: terms, iterations, warning: None })
        }
    }
}

fn check_radius(r: f64) -> Result<()> {
    if !(0.0..1.0).contains(&r) {
        return Err(Error::OutsideDomain(format!("radius {r} must lie in [0, 1)")));
    }
    Ok(())
}

/// `C(r) = 1` if `c ≤ 1/2`, else `c + 1/(4c)`, with `c = Π(1−r_i)^{−1} − 1`.
pub fn bound_c(rs: &[f64]) -> Result<f64> {
    rs.iter().try_for_each(|&r| check_radius(r))?;
    let c = 1.0 / rs.iter().map(|r| 1.0 - r).product::<f64>() - 1.0;
    Ok(if c <= 0.5 { 1.0 } else { c + 1.0 / (4.0 * c) })
}

/// `K(r) = min{C(r), Π(1−r_i²)^{−1/2}}`.
pub fn bound_k(rs: &[f64]) -> Result<f64> {
    let c = bound_c(rs)?;
    let b = rs.iter().map(|r| 1.0 - r * r).product::<f64>().powf(-0.5);
    Ok(c.min(b))
}

/// `M(r) = 1` for `r ≤ 1/3`, else `(4r² + (1−r)²)/(4r(1−r))`.
pub fn bound_m(r: f64) -> Result<f64> {
    check_radius(r)?;
    Ok(if r <= 1.0 / 3.0 { 1.0 } else { (4.0 * r * r + (1.0 - r).powi(2)) / (4.0 * r * (1.0 - r)) })
}

/// `Ω(r) = min{M(r), (1−r²)^{−k/2}}`.
pub fn bound_omega(r: f64, k: usize) -> Result<f64> {
    let m = bound_m(r)?;
    Ok(m.min((1.0 - r * r).powf(-(k as f64) / 2.0)))
}

/// Proven bounds on the Bohr radii of the polyball with `k` factors.
/// Bounds stated only for `k > 1` are `None` at `k = 1`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ClosedBounds {
    pub k: usize,
    /// `1 − (2/3)^{1/k}`.
    pub mh_lower_simple: f64,
    /// `γ_k`.
    pub mh_lower_gamma: f64,
    /// `1/(3√k)`, strictly below `γ_k`.
    pub mh_lower_sqrt: Option<f64>,
    /// Largest of the lower bounds above.
    pub mh_lower: f64,
    /// `min{1/3, 2√(log k)/√k}`.
    pub mh_upper: f64,
    /// `2√(log k)/√k`.
    pub log_bound: Option<f64>,
    /// `√(1 − (1/2)^{1/k})`.
    pub mh0_lower_simple: f64,
    /// `1/(2√k)`.
    pub mh0_lower: Option<f64>,
    /// `t_k⁰`.
    pub t_k0: f64,
    /// `min{1/√2, 2√(log k)/√k}`.
    pub mh0_upper: f64,
    pub h_exact: f64,
    /// `max{1/2, √(1 − (1/2)^{1/k})}`.
    pub h0_lower: f64,
    pub h0_upper: f64,
}

pub fn closed_bounds(k: usize) -> Result<ClosedBounds> {
    if k == 0 {
        return Err(Error::InvalidParameter("k must be at least 1".into()));
    }
    let kf = k as f64;
    let gamma = solve_gamma_k(k, DEFAULT_RADIUS_TOL)?.value;
    let simple = 1.0 - (2.0f64 / 3.0).powf(1.0 / kf);
    let multi = k > 1;
    let log_bound = multi.then(|| 2.0 * kf.ln().sqrt() / kf.sqrt());
    let mh0_simple = (1.0 - 0.5f64.powf(1.0 / kf)).sqrt();
    let t_k0 = solve_t_k0(k, DEFAULT_RADIUS_TOL)?.value;
    let inv_sqrt2 = std::f64::consts::FRAC_1_SQRT_2;
    Ok(ClosedBounds {
        k,
        mh_lower_simple: simple,
        mh_lower_gamma: gamma,
        mh_lower_sqrt: multi.then(|| 1.0 / (3.0 * kf.sqrt())),
        mh_lower: simple.max(gamma),
        mh_upper: log_bound.map_or(1.0 / 3.0, |b| b.min(1.0 / 3.0)),
        log_bound,
        mh0_lower_simple: mh0_simple,
        mh0_lower: multi.then(|| 1.0 / (2.0 * kf.sqrt())),
        t_k0,
        mh0_upper: log_bound.map_or(inv_sqrt2, |b| b.min(inv_sqrt2)),
        h_exact: 1.0 / 3.0,
        h0_lower: mh0_simple.max(0.5),
        h0_upper: inv_sqrt2,
    })
}

fn check_truncation(f: &FreePolynomial, trunc: &Truncation) -> Result<()> {
    let fd = f.factor_degrees();
    if fd.iter().zip(trunc.degrees()).any(|(a, b)| *a > b) {
        return Err(Error::TruncationTooSmall(format!(
            "polynomial degrees {fd:?} exceed truncation degrees {:?}",
            trunc.degrees()
        )));
    }
    Ok(())
}

/// Norms `‖Σ_{Λ_p} A_α ⊗ S_α‖` of the multi-homogeneous blocks, by multidegree.
pub fn lambda_block_norms(f: &FreePolynomial, trunc: &Truncation, tol: f64) -> Result<Vec<(Vec<usize>, f64)>> {
    check_truncation(f, trunc)?;
    f.multidegrees()
        .into_iter()
        .map(|p| {
            let a = assemble(&f.lambda_block(&p), &Scaling::one(), trunc)?;
            Ok((p, operator_norm(&a, tol)?.value))
        })
        .collect()
}

/// Norms `‖Σ_{Γ_q} A_α ⊗ S_α‖` of the homogeneous blocks, by total degree.
pub fn gamma_block_norms(f: &FreePolynomial, trunc: &Truncation, tol: f64) -> Result<Vec<(usize, f64)>> {
    check_truncation(f, trunc)?;
    f.total_degrees()
        .into_iter()
        .map(|q| {
            let a = assemble(&f.gamma_block(q), &Scaling::one(), trunc)?;
            Ok((q, operator_norm(&a, tol)?.value))
        })
        .collect()
}

/// `𝒟(F, r) = Σ_p ‖Σ_{Λ_p} A_α ⊗ ρ_α S_α‖`.
pub fn majorant_mh(f: &FreePolynomial, rho: &Scaling, trunc: &Truncation, tol: f64) -> Result<f64> {
    check_truncation(f, trunc)?;
    let g = f.dilate(rho);
    Ok(lambda_block_norms(&g, trunc, tol)?.iter().map(|(_, v)| v).sum())
}

/// `ℳ(F, r) = Σ_q ‖Σ_{Γ_q} A_α ⊗ ρ_α S_α‖`.
pub fn majorant_h(f: &FreePolynomial, rho: &Scaling, trunc: &Truncation, tol: f64) -> Result<f64> {
    check_truncation(f, trunc)?;
    let g = f.dilate(rho);
    Ok(gamma_block_norms(&g, trunc, tol)?.iter().map(|(_, v)| v).sum())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum MajorantKind {
    /// Multi-homogeneous blocks, `𝒟`.
    MultiHomogeneous,
    /// Homogeneous blocks, `ℳ`.
    Homogeneous,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MajorantCurve {
    pub kind: MajorantKind,
    pub radii: Vec<f64>,
    pub values: Vec<f64>,
    pub truncation: Vec<usize>,
}

/// The majorant at uniform radii; block norms are computed once and
/// weighted by `r^{|p|}`.
pub fn majorant_curve(
    f: &FreePolynomial,
    kind: MajorantKind,
    radii: &[f64],
    trunc: &Truncation,
    tol: f64,
) -> Result<MajorantCurve> {
    radii.iter().try_for_each(|&r| {
        if (0.0..=1.0).contains(&r) {
            Ok(())
        } else {
            Err(Error::OutsideDomain(format!("radius {r} must lie in [0, 1]")))
        }
    })?;
    let blocks: Vec<(usize, f64)> = match kind {
        MajorantKind::MultiHomogeneous => lambda_block_norms(f, trunc, tol)?
            .into_iter()
            .map(|(p, v)| (p.iter().sum(), v))
            .collect(),
        MajorantKind::Homogeneous => gamma_block_norms(f, trunc, tol)?,
    };
    let values = radii
        .iter()
        .map(|&r| blocks.iter().map(|&(q, v)| v * r.powi(q as i32)).sum())
        .collect();
    Ok(MajorantCurve { kind, radii: radii.to_vec(), values, truncation: trunc.degrees() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::freewords::MultiWord;
    use crate::C64;
    use nalgebra::DMatrix;
    use proptest::prelude::*;

    // Roots computed independently with a bracketing solver on the
    // closed-form series in extended precision.
    const GAMMA: [(usize, f64); 5] = [
        (2, 0.24822748598685068),
        (3, 0.20671998810805192),
        (4, 0.1809121235898121),
        (10, 0.11674258549365497),
        (50, 0.05281175953189662),
    ];
    const T_K0: [(usize, f64); 5] = [
        (2, 0.38504696488022494),
        (3, 0.32502676594764845),
        (4, 0.2865485248380026),
        (10, 0.18760286293696893),
        (50, 0.08559066417300698),
    ];
    const T_M_EXCESS: [(usize, f64); 6] = [
        (2, 0.18430475687170816),
        (3, 0.1096743089303312),
        (10, 0.01721018208878483),
        (50, 0.0011127535977296654),
        (100, 0.00029887258072119893),
        (200, 7.841427906235543e-05),
    ];

    fn mobius(a: f64, n: usize) -> FreePolynomial {
        let mut f = FreePolynomial::new(&[1], 1).unwrap();
        f.add_scalar_term(MultiWord::identity(&[1]), C64::new(a, 0.0)).unwrap();
        for j in 1..=n {
            let w = MultiWord::from_letters(&[vec![1; j]], &[1]).unwrap();
            f.add_scalar_term(w, C64::new(-(1.0 - a * a) * a.powi(j as i32 - 1), 0.0)).unwrap();
        }
        f
    }

    #[test]
    fn geometric_cases() {
        let g = solve_gamma_k(1, 1e-12).unwrap();
        assert!((g.value - 1.0 / 3.0).abs() < 1e-10);
        assert!(g.residual <= 1e-12 && g.tail_bound <= 1e-12);
        assert!(g.bracket.0 <= g.value && g.value <= g.bracket.1);
        assert!((solve_t_k0(1, 1e-12).unwrap().value - 0.5).abs() < 1e-10);
    }

    #[test]
    fn series_roots_match_oracle() {
        for (k, v) in GAMMA {
            let r = solve_gamma_k(k, 1e-12).unwrap();
            assert!((r.value - v).abs() < 1e-11, "γ_{k}: {} vs {v}", r.value);
            assert!(r.residual <= 1e-12);
        }
        for (k, v) in T_K0 {
            let r = solve_t_k0(k, 1e-12).unwrap();
            assert!((r.value - v).abs() < 1e-11, "t_{k}0: {} vs {v}", r.value);
            assert!(r.value > 1.0 / (2.0 * (k as f64).sqrt()));
        }
    }

    #[test]
    fn t_m_matches_oracle() {
        for (m, v) in T_M_EXCESS {
            let r = solve_t_m(m, 1e-12).unwrap();
            assert!((r.value - 1.0 / 3.0 - v).abs() < 1e-11, "t_{m}");
            assert!(r.residual <= 1e-12);
        }
        // Quadratic oracle for m = 2.
        let c = std::f64::consts::FRAC_1_SQRT_2;
        let root = (-c + (c * c + 1.0).sqrt()) / 1.0;
        assert!((solve_t_m(2, 1e-12).unwrap().value - root).abs() < 1e-12);
        let one = solve_t_m(1, 1e-12).unwrap();
        assert_eq!(one.value, 1.0);
        assert!(one.warning.is_some());
    }

    #[test]
    fn closed_forms() {
        assert_eq!(bound_c(&[1.0 / 3.0]).unwrap(), 1.0);
        assert!((bound_c(&[0.5]).unwrap() - 1.25).abs() < 1e-15);
        assert_eq!(bound_c(&[0.0, 0.0]).unwrap(), 1.0);
        assert_eq!(bound_k(&[0.0]).unwrap(), 1.0);
        let k9 = bound_k(&[0.9]).unwrap();
        assert!((k9 - (0.19f64).powf(-0.5)).abs() < 1e-12);
        assert_eq!(bound_omega(0.25, 3).unwrap(), 1.0);
        assert!((bound_m(0.5).unwrap() - 1.25).abs() < 1e-15);
        assert!((bound_omega(0.5, 1).unwrap() - 1.25f64.min(0.75f64.powf(-0.5))).abs() < 1e-15);
        assert!((bound_m(1.0 / 3.0 + 1e-12).unwrap() - 1.0).abs() < 1e-9);
        assert!(bound_c(&[1.0]).is_err());
    }

    #[test]
    fn closed_bounds_records() {
        let b1 = closed_bounds(1).unwrap();
        assert!((b1.mh_lower_simple - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(b1.mh_upper, 1.0 / 3.0);
        assert!((b1.h0_lower - b1.h0_upper).abs() < 1e-15);
        assert!(b1.log_bound.is_none() && b1.mh0_lower.is_none());
        let b4 = closed_bounds(4).unwrap();
        assert!((b4.mh_lower_simple - 0.0964).abs() < 1e-4);
        assert!(b4.mh_lower_gamma > 1.0 / 6.0);
        assert_eq!(b4.mh_lower, b4.mh_lower_gamma);
        assert!(b4.mh_lower <= b4.mh_upper);
    }

    #[test]
    fn mobius_majorant() {
        let f = mobius(0.5, 60);
        let t = Truncation::new(&[60], &[1]).unwrap();
        let d = majorant_mh(&f, &Scaling::Uniform(1.0 / 3.0), &t, 1e-12).unwrap();
        assert!((d - 0.8).abs() < 1e-12);
        let m = majorant_h(&f, &Scaling::Uniform(1.0 / 3.0), &t, 1e-12).unwrap();
        assert!((m - d).abs() < 1e-14);
        let f = mobius(0.9, 200);
        let t = Truncation::new(&[200], &[1]).unwrap();
        assert!((majorant_mh(&f, &Scaling::Uniform(0.4), &t, 1e-12).unwrap() - 1.01875).abs() < 1e-9);
    }

    #[test]
    fn majorant_examples() {
        let n = [2, 2];
        let f = FreePolynomial::constant(&n, C64::new(0.0, -0.7)).unwrap();
        let t = Truncation::new(&[1, 1], &n).unwrap();
        assert!((majorant_mh(&f, &Scaling::Uniform(0.5), &t, 1e-12).unwrap() - 0.7).abs() < 1e-14);
        let mut g = FreePolynomial::new(&n, 1).unwrap();
        g.add_scalar_term(MultiWord::from_letters(&[vec![1, 2], vec![]], &n).unwrap(), C64::new(0.3, 0.0)).unwrap();
        assert!(matches!(majorant_mh(&g, &Scaling::one(), &t, 1e-12), Err(Error::TruncationTooSmall(_))));
        // A single Λ_p block has norm equal to the ℓ² norm of its coefficients.
        let mut h = FreePolynomial::new(&n, 1).unwrap();
        let coeffs = [(vec![vec![1], vec![2]], C64::new(0.3, 0.4)), (vec![vec![2], vec![2]], C64::new(-1.0, 0.0))];
        for (w, c) in &coeffs {
            h.add_scalar_term(MultiWord::from_letters(w, &n).unwrap(), *c).unwrap();
        }
        let l2 = coeffs.iter().map(|(_, c)| c.norm_sqr()).sum::<f64>().sqrt();
        let r: f64 = 0.6;
        let got = majorant_mh(&h, &Scaling::Uniform(r), &t, 1e-12).unwrap();
        assert!((got - r * r * l2).abs() < 1e-12);
        // Curves agree with pointwise evaluation.
        let curve = majorant_curve(&h, MajorantKind::MultiHomogeneous, &[0.0, 0.3, 0.6], &t, 1e-12).unwrap();
        assert!((curve.values[2] - got).abs() < 1e-12);
        assert_eq!(curve.values[0], 0.0);
    }

    fn random_poly(seed: u64, n: &[usize], deg: usize) -> FreePolynomial {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let mut f = FreePolynomial::new(n, 2).unwrap();
        for p0 in 0..=deg {
            for p1 in 0..=deg - p0 {
                let w = MultiWord::from_letters(
                    &[(0..p0).map(|_| rng.random_range(1..=n[0] as u32)).collect(), (0..p1).map(|_| rng.random_range(1..=n[1] as u32)).collect()],
                    n,
                )
                .unwrap();
                let a = DMatrix::from_fn(2, 2, |_, _| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
                f.add_term(w, a).unwrap();
            }
        }
        f
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn homogeneous_majorant_is_smaller(seed in 0u64..100_000, r in 0.0f64..1.0) {
            let n = [2, 1];
            let f = random_poly(seed, &n, 2);
            let t = Truncation::new(&[2, 2], &n).unwrap();
            let m = majorant_h(&f, &Scaling::Uniform(r), &t, 1e-12).unwrap();
            let d = majorant_mh(&f, &Scaling::Uniform(r), &t, 1e-12).unwrap();
            prop_assert!(m <= d + 1e-12);
        }

        #[test]
        fn bound_k_is_monotone_and_below_c(r1 in 0.0f64..0.99, r2 in 0.0f64..0.99, dr in 0.0f64..0.01) {
            let a = bound_k(&[r1, r2]).unwrap();
            let b = bound_k(&[r1 + dr, r2]).unwrap();
            prop_assert!(b >= a - 1e-12);
            prop_assert!(a <= bound_c(&[r1, r2]).unwrap());
            prop_assert!(bound_omega(r1, 2).unwrap() >= 1.0);
        }

        #[test]
        fn solvers_re_substitute(k in 1usize..60) {
            let g = solve_gamma_k(k, 1e-12).unwrap();
            let s = binomial_series(k, g.value, f64::INFINITY).unwrap();
            prop_assert!((s.partial - 0.5).abs() <= 1e-12);
            prop_assert!(g.tail_bound <= 1e-12);
            let t = solve_t_k0(k, 1e-12).unwrap();
            prop_assert!(t.value > g.value);
        }
    }

    #[test]
    fn t_k0_decreases_and_t_m_decreases() {
        let ts: Vec<f64> = (1..=30).map(|k| solve_t_k0(k, 1e-12).unwrap().value).collect();
        assert!(ts.windows(2).all(|w| w[0] > w[1]));
        let tm: Vec<f64> = (2..=200).map(|m| solve_t_m(m, 1e-12).unwrap().value).collect();
        assert!(tm.windows(2).all(|w| w[0] > w[1]));
    }
}
