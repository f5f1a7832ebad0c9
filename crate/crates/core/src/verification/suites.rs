use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::generators::{
    autocorrelation, factor_dim, fejer_cos, fejer_extremal, fit_truncation, gaussian, gen_polydisc_schur,
    gen_re_bounded, gen_schur, random_fejer, random_polydisc, rng_from, torus_points, PolydiscPolynomial,
    SchurOptions, Shape,
};
use super::{run_suite, Case, SuiteConfig, SuiteReport};
use crate::bohrradii::{majorant_h, majorant_mh, solve_t_m};
use crate::error::Result;
use crate::fockmodel::{
    assemble, assemble_pluriharmonic, berezin_kernel, extract_pluriharmonic_checked, ComplexMatrix, FreePolynomial,
    KPluriharmonic, Scaling, Truncation,
};
use crate::freewords::{multiword_right_leq, MultiWord};
use crate::opanalysis::{dense_min_eig, dense_norm, max_eig_hermitian, min_eig_hermitian, numerical_radius, operator_norm};

const SPECTRAL_TOL: f64 = 1e-11;

fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

/// Upper estimate of `‖A‖`.
fn norm_upper(a: &ComplexMatrix) -> Result<f64> {
    let r = operator_norm(a, SPECTRAL_TOL)?;
    Ok(r.value + r.residual)
}

/// Upper estimate of `ω(A)`.
fn numrad_upper(a: &ComplexMatrix) -> Result<f64> {
    let r = numerical_radius(a, SPECTRAL_TOL)?;
    Ok(r.value + r.residual)
}

fn dense_max_eig(a: &DMatrix<C64>) -> f64 {
    -dense_min_eig(&(-a))
}

/// `2I − A − A*`.
fn re_defect(a: &ComplexMatrix) -> Result<ComplexMatrix> {
    ComplexMatrix::identity(a.rows()).scale(c(2.0)).sub(a)?.sub(&a.adjoint())
}

/// `Σ_{α∈set} A_α*A_α` over the support of `f`.
fn gram_sum<'a>(f: &FreePolynomial, set: impl IntoIterator<Item = &'a MultiWord>) -> DMatrix<C64> {
    let m = f.coeff_dim();
    set.into_iter()
        .filter_map(|w| f.coefficient(w))
        .fold(DMatrix::zeros(m, m), |acc, a| acc + a.adjoint() * a)
}

/// A right-minimal subset of the non-constant support, chosen greedily in
/// random order.
fn random_right_minimal(rng: &mut ChaCha8Rng, f: &FreePolynomial) -> Result<Vec<MultiWord>> {
    let mut words: Vec<MultiWord> = f.terms().map(|(w, _)| w.clone()).filter(|w| !w.is_identity()).collect();
    words.shuffle(rng);
    let mut kept: Vec<MultiWord> = Vec::new();
    for w in words {
        let mut ok = true;
        for u in &kept {
            if multiword_right_leq(u, &w)? || multiword_right_leq(&w, u)? {
                ok = false;
                break;
            }
        }
        if ok {
            kept.push(w);
        }
    }
    Ok(kept)
}

fn support_of_degree(f: &FreePolynomial, q: usize) -> Vec<MultiWord> {
    f.terms().map(|(w, _)| w.clone()).filter(|w| w.total_degree() == q).collect()
}

fn support_of_multidegree(f: &FreePolynomial, p: &[usize]) -> Vec<MultiWord> {
    f.terms().map(|(w, _)| w.clone()).filter(|w| w.multidegree() == p).collect()
}

/// Coefficients `a, −(1−a²)a^{n−1}` of the Möbius map `(a − z)/(1 − az)`.
fn mobius_coefficients(a: f64, terms: usize) -> Vec<f64> {
    std::iter::once(a).chain((1..terms).map(|n| -(1.0 - a * a) * a.powi(n as i32 - 1))).collect()
}

fn mobius_majorant(a: f64, r: f64) -> f64 {
    // a + (1 − a²) Σ a^{n−1} r^n = a + (1 − a²) r/(1 − a r).
    a + (1.0 - a * a) * r / (1.0 - a * r)
}

fn schur_shape(rng: &mut ChaCha8Rng, cfg: &SuiteConfig, max_m: usize) -> Shape {
    Shape::random(rng, 3, 2, 3, max_m, cfg.dim_cap)
}

fn scalar_constant(f: &FreePolynomial) -> f64 {
    f.constant_term()[(0, 0)].norm()
}

pub fn wiener_suite(cfg: &SuiteConfig) -> Result<SuiteReport> {
    let mut probes = vec![];
    for a in [0.1, 0.3, 0.5, 0.7, 0.9, 0.99] {
        for (n, an) in mobius_coefficients(a, 12).iter().enumerate().skip(1) {
            probes.push(Case::new(format!("mobius a={a} n={n}"), an.abs(), 1.0 - a * a));
        }
    }
    let opts = cfg.schur_options();
    run_suite("wiener", cfg, probes, |seed| {
        let mut rng = rng_from(seed);
        let shape = schur_shape(&mut rng, cfg, 2);
        let s = gen_schur(seed, &shape, &opts)?;
        let a0 = scalar_constant(&s.f);
        let rhs = 1.0 - a0 * a0;
        let mut cases = Vec::new();
        for p in s.f.multidegrees() {
            if p.iter().all(|&x| x == 0) {
                continue;
            }
            let block = assemble(&s.f.lambda_block(&p), &Scaling::one(), &s.truncation)?;
            cases.push(Case::new(format!("{} lambda {p:?}", shape.describe()), norm_upper(&block)?, rhs));
        }
        let set = random_right_minimal(&mut rng, &s.f)?;
        let lhs = dense_norm(&gram_sum(&s.f, &set)).sqrt();
        cases.push(Case::new(format!("{} right-minimal |set|={}", shape.describe(), set.len()), lhs, rhs));
        Ok(cases)
    })
}

pub fn bohr_mh_suite(cfg: &SuiteConfig) -> Result<SuiteReport> {
    let mut probes = vec![];
    for i in 1..=99 {
        let a = i as f64 / 100.0;
        probes.push(Case::new(format!("mobius r=1/3 a={a}"), mobius_majorant(a, 1.0 / 3.0), 1.0));
    }
    let opts = cfg.schur_options();
    run_suite("bohr_mh", cfg, probes, |seed| {
        let mut rng = rng_from(seed);
        let shape = schur_shape(&mut rng, cfg, 2);
        let s = gen_schur(seed, &shape, &opts)?;
        let k = shape.alphabet_sizes.len();
        let radii: Vec<f64> = if rng.random::<f64>() < 0.4 {
            // Split Π(1 − r_i) = 2/3 across the factors.
            let w: Vec<f64> = (0..k).map(|_| rng.random_range(0.05..1.0)).collect();
            let total: f64 = w.iter().sum();
            w.iter().map(|x| 1.0 - (2.0f64 / 3.0).powf(x / total)).collect()
        } else {
            (0..k).map(|_| rng.random_range(0.0..0.6)).collect()
        };
        let prod: f64 = radii.iter().map(|r| 1.0 - r).product();
        let a0 = scalar_constant(&s.f);
        let lhs = majorant_mh(&s.f, &Scaling::PerFactor(radii.clone()), &s.truncation, SPECTRAL_TOL)?;
        let params = format!("{} r={radii:?}", shape.describe());
        let mut cases = vec![Case::new(params.clone(), lhs, a0 + (1.0 - a0 * a0) * (1.0 / prod - 1.0))];
        if prod >= 2.0 / 3.0 - 1e-15 {
            cases.push(Case::new(format!("{params} radius region"), lhs, 1.0));
        }
        Ok(cases)
    })
}

pub fn bohr_h_suite(cfg: &SuiteConfig) -> Result<SuiteReport> {
    let mut probes = vec![];
    for i in 1..=99 {
        let a = i as f64 / 100.0;
        probes.push(Case::new(format!("mobius r=1/3 a={a}"), mobius_majorant(a, 1.0 / 3.0), 1.0));
    }
    // Sharpness: the majorant must exceed one beyond 1/3.
    for (a, r) in [(0.9, 0.4), (0.95, 0.35), (0.99, 0.34)] {
        probes.push(Case::new(format!("sharpness a={a} r={r}"), 1.0 + 1e-6, mobius_majorant(a, r)));
    }
    let opts = cfg.schur_options();
    run_suite("bohr_h", cfg, probes, |seed| {
        let mut rng = rng_from(seed);
        let shape = schur_shape(&mut rng, cfg, 2);
        let s = gen_schur(seed, &shape, &opts)?;
        let r = if rng.random::<f64>() < 0.3 { 1.0 / 3.0 } else { rng.random_range(0.0..1.0 / 3.0) };
        let lhs = majorant_h(&s.f, &Scaling::Uniform(r), &s.truncation, SPECTRAL_TOL)?;
        Ok(vec![Case::new(format!("{} r={r}", shape.describe()), lhs, 1.0)])
    })
}

/// `1 − t·(1 + 2Σ c_p z^p)` for the Fejér extremal `c`, in letter 1 of
/// factor 0 of a model with the given alphabet sizes.
fn fejer_probe(m: usize, t: f64, sizes: &[usize]) -> Result<FreePolynomial> {
    let cs = autocorrelation(&fejer_extremal(m));
    let mut f = FreePolynomial::new(sizes, 1)?;
    f.add_scalar_term(MultiWord::identity(sizes), c(1.0 - t))?;
    for (p, cp) in cs.iter().enumerate().skip(1) {
        let mut letters = vec![Vec::new(); sizes.len()];
        letters[0] = vec![1; p];
        f.add_scalar_term(MultiWord::from_letters(&letters, sizes)?, cp / cs[0] * (-2.0 * t))?;
    }
    Ok(f)
}

/// Landau operator checks for one polynomial with `F(0) ≥ 0`, `Re F ≤ I`.
fn landau_cases(
    f: &FreePolynomial,
    trunc: &Truncation,
    sets: Vec<(String, Vec<MultiWord>, bool)>,
    scale: f64,
    label: &str,
) -> Result<Vec<Case>> {
    let m = f.coeff_dim();
    let b = DMatrix::<C64>::identity(m, m) - f.constant_term();
    let nb = dense_norm(&b);
    let mut cases = Vec::new();
    for (name, set, orthogonal) in sets {
        if set.iter().all(|w| f.coefficient(w).is_none()) {
            continue;
        }
        let gram = gram_sum(f, &set);
        let excess = dense_max_eig(&(gram - &b * c(4.0 * scale * scale * nb)));
        cases.push(Case::new(format!("{label} {name} gram"), excess, 0.0));
        if orthogonal {
            let mut block = FreePolynomial::new(f.alphabet_sizes(), m)?;
            for w in &set {
                if let Some(a) = f.coefficient(w) {
                    block.add_term(w.clone(), a.clone())?;
                }
            }
            let lhs = norm_upper(&assemble(&block, &Scaling::one(), trunc)?)?;
            cases.push(Case::new(format!("{label} {name} norm"), lhs, 2.0 * scale * nb));
        }
        let present: Vec<&DMatrix<C64>> = set.iter().filter_map(|w| f.coefficient(w)).collect();
        if present.len() <= 8 {
            let l = present.len();
            let diag = &b * c(2.0 * scale);
            let mut p = DMatrix::<C64>::zeros((l + 1) * m, (l + 1) * m);
            for j in 0..=l {
                p.view_mut((j * m, j * m), (m, m)).copy_from(&diag);
            }
            for (j, a) in present.iter().enumerate() {
                p.view_mut(((j + 1) * m, 0), (m, m)).copy_from(*a);
                p.view_mut((0, (j + 1) * m), (m, m)).copy_from(&a.adjoint());
            }
            cases.push(Case::new(format!("{label} {name} block positivity"), -dense_min_eig(&p), 0.0));
        }
    }
    Ok(cases)
}

fn landau_sets(rng: &mut ChaCha8Rng, f: &FreePolynomial) -> Result<Vec<(String, Vec<MultiWord>, bool)>> {
    let k = f.k();
    let mut sets = Vec::new();
    for p in f.multidegrees() {
        if p.iter().any(|&x| x > 0) {
            sets.push((format!("lambda {p:?}"), support_of_multidegree(f, &p), true));
        }
    }
    for q in f.total_degrees() {
        if q > 0 {
            sets.push((format!("gamma {q}"), support_of_degree(f, q), k == 1));
        }
    }
    sets.push(("right-minimal".into(), random_right_minimal(rng, f)?, false));
    Ok(sets)
}

pub fn landau_op_suite(cfg: &SuiteConfig) -> Result<SuiteReport> {
    let scale = cfg.constant_scale;
    let mut probes = Vec::new();
    for m in 1..=8 {
        for t in [0.25, 0.5, 1.0] {
            for sizes in [vec![1usize], vec![1, 2]] {
                let f = fejer_probe(m, t, &sizes)?;
                let mut ds = vec![0; sizes.len()];
                ds[0] = m + 1;
                let trunc = Truncation::new(&ds, &sizes)?;
                let set: Vec<MultiWord> = f.terms().map(|(w, _)| w.clone()).filter(|w| w.total_degree() == 1).collect();
                let label = format!("fejer probe m={m} t={t} n={sizes:?}");
                probes.extend(landau_cases(&f, &trunc, vec![("lambda 1".into(), set, true)], scale, &label)?);
            }
        }
    }
    let opts = cfg.schur_options();
    run_suite("landau_op", cfg, probes, |seed| {
        let mut rng = rng_from(seed);
        let shape = Shape::random(&mut rng, 2, 2, 2, 2, cfg.dim_cap);
        let s = gen_re_bounded(seed, &shape, &opts)?;
        let sets = landau_sets(&mut rng, &s.f)?;
        landau_cases(&s.f, &s.truncation, sets, scale, &shape.describe())
    })
}

/// `|a_p| ≤ 2 a_0 cos(π/(⌊m/p⌋+2))` for `f = c_0 + 2Σ c_p z^p`, `Re f = |q|²`.
fn fejer_scalar_cases(c: &[C64], label: &str) -> Vec<Case> {
    let m = c.len() - 1;
    let a0 = c[0].re;
    (1..=m)
        .map(|p| Case::new(format!("{label} m={m} p={p}"), 2.0 * c[p].norm(), 2.0 * a0 * fejer_cos(m, p)))
        .collect()
}

/// Homogeneous-block numerical radii of the analytic part of `f` against
/// `bound0·cos(π/(⌊m/q⌋+2))`.
fn fejer_block_cases(f: &FreePolynomial, m: usize, bound0: f64, trunc: &Truncation, label: &str) -> Result<Vec<Case>> {
    let mut out = Vec::new();
    for q in 1..=m {
        let block = f.gamma_block(q);
        if block.num_terms() == 0 {
            continue;
        }
        let w = numrad_upper(&assemble(&block, &Scaling::one(), trunc)?)?;
        out.push(Case::new(format!("{label} q={q}"), w, bound0 * fejer_cos(m, q)));
    }
    Ok(out)
}

/// `G(T)*G(T)` as a pluriharmonic polynomial, read off a truncation deep
/// enough that the needed entries are exact.
fn gram_pluriharmonic(g: &FreePolynomial) -> Result<(KPluriharmonic, Truncation)> {
    let deg = g.factor_degrees();
    let ds: Vec<usize> = deg.iter().map(|d| 2 * d).collect();
    let trunc = Truncation::new(&ds, g.alphabet_sizes())?;
    let a = assemble(g, &Scaling::one(), &trunc)?;
    let gram = a.adjoint().matmul(&a)?;
    let scale = gram.max_abs().max(1.0);
    let f = extract_pluriharmonic_checked(&gram, &trunc, &deg, &deg, 1e-12 * scale)?;
    Ok((f, trunc))
}

fn random_polynomial(rng: &mut ChaCha8Rng, sizes: &[usize], degrees: &[usize], m: usize) -> Result<FreePolynomial> {
    let mut f = FreePolynomial::new(sizes, m)?;
    let total: usize = degrees.iter().sum();
    for w in super::generators::random_support(rng, sizes, total, 0.7) {
        if w.multidegree().iter().zip(degrees).all(|(a, b)| a <= b) {
            f.add_term(w, DMatrix::from_fn(m, m, |_, _| gaussian(rng)))?;
        }
    }
    // Pin the requested degree in every factor.
    for (i, &d) in degrees.iter().enumerate() {
        if d > 0 {
            let mut letters = vec![Vec::new(); sizes.len()];
            letters[i] = (0..d).map(|_| rng.random_range(1..=sizes[i] as u32)).collect();
            f.add_term(MultiWord::from_letters(&letters, sizes)?, DMatrix::from_fn(m, m, |_, _| gaussian(rng)))?;
        }
    }
    if f.num_terms() == 0 || f.coefficient(&MultiWord::identity(sizes)).is_none() {
        f.add_term(MultiWord::identity(sizes), DMatrix::from_fn(m, m, |_, _| gaussian(rng)))?;
    }
    Ok(f)
}

pub fn fejer_suite(cfg: &SuiteConfig) -> Result<SuiteReport> {
    let m_max = cfg.m_max.max(1);
    let mut probes = Vec::new();
    for m in 1..=m_max {
        let cs = autocorrelation(&fejer_extremal(m));
        let cs: Vec<C64> = cs.iter().map(|x| x / cs[0].re).collect();
        probes.extend(fejer_scalar_cases(&cs, "extremal"));
    }
    let opts = cfg.schur_options();
    run_suite("fejer", cfg, probes, |seed| {
        let mut rng = rng_from(seed);
        let mut cases = Vec::new();
        for m in 1..=m_max {
            cases.extend(fejer_scalar_cases(&random_fejer(&mut rng, m), "scalar"));
        }
        // G*G in one factor: a positive pluriharmonic polynomial of degree deg G.
        let n = rng.random_range(1..=2);
        let d = rng.random_range(1..=if n == 1 { 3 } else { 2 });
        let mcoef = rng.random_range(1..=2);
        let g = random_polynomial(&mut rng, &[n], &[d], mcoef)?;
        let (f, trunc) = gram_pluriharmonic(&g)?;
        let bound0 = dense_norm(&f.constant_term());
        let label = format!("gram n={n} deg={d} m={mcoef}");
        cases.extend(fejer_block_cases(&f.analytic_part(), d, bound0, &trunc, &label)?);
        // 2I − F − F* for Re F ≤ I, any number of factors.
        let shape = Shape::random(&mut rng, 2, 2, 2, 2, cfg.dim_cap);
        let s = gen_re_bounded(rng.random(), &shape, &opts)?;
        let b = DMatrix::<C64>::identity(shape.m, shape.m) - s.f.constant_term();
        let label = format!("re-bounded {}", shape.describe());
        cases.extend(fejer_block_cases(&s.f, s.f.degree(), 2.0 * dense_norm(&b), &s.truncation, &label)?);
        Ok(cases)
    })
}

pub fn bohr_numrad_suite(cfg: &SuiteConfig) -> Result<SuiteReport> {
    let t_m: Vec<f64> = (1..=4).map(|m| solve_t_m(m, 1e-14).map(|r| r.value)).collect::<Result<_>>()?;
    let mut probes = Vec::new();
    for m in 1..=4 {
        for t in [0.5, 1.0] {
            let f = fejer_probe(m, t, &[1])?;
            let trunc = Truncation::new(&[m + 2], &[1])?;
            probes.push(numrad_case(&f, m, t_m[m - 1], &trunc, &format!("fejer probe m={m} t={t}"))?);
        }
    }
    let opts = cfg.schur_options();
    run_suite("bohr_numrad", cfg, probes, |seed| {
        let mut rng = rng_from(seed);
        let shape = Shape::random(&mut rng, 2, 2, 4, 1, cfg.dim_cap);
        let s = gen_re_bounded(seed, &shape, &opts)?;
        let m = s.f.degree().max(1);
        Ok(vec![numrad_case(&s.f, m, t_m[m - 1], &s.truncation, &shape.describe())?])
    })
}

fn numrad_case(f: &FreePolynomial, m: usize, t: f64, trunc: &Truncation, label: &str) -> Result<Case> {
    let mut lhs = scalar_constant(f);
    for q in 1..=m {
        let block = f.gamma_block(q);
        if block.num_terms() > 0 {
            lhs += numrad_upper(&assemble(&block, &Scaling::one(), trunc)?)? * t.powi(q as i32);
        }
    }
    Ok(Case::new(format!("{label} t_m={t}"), lhs, 1.0))
}

fn random_disc_point(rng: &mut ChaCha8Rng, radius: f64) -> C64 {
    C64::from_polar(radius * rng.random::<f64>().sqrt(), rng.random_range(0.0..std::f64::consts::TAU))
}

pub fn landau_polydisc_suite(cfg: &SuiteConfig) -> Result<SuiteReport> {
    let mut probes = Vec::new();
    for i in 0..=20 {
        // Möbius at the origin: |f'(0)| = 1 − c².
        let c0 = i as f64 / 20.0;
        probes.push(Case::new(format!("mobius c={c0}"), 1.0 - c0 * c0, 2.0 * (1.0 - c0)));
    }
    run_suite("landau_polydisc", cfg, probes, |seed| {
        let mut rng = rng_from(seed);
        let k = rng.random_range(1..=3);
        let degree = rng.random_range(1..=3);
        let g = gen_polydisc_schur(&mut rng, k, degree);
        let radius = [0.5, 0.9, 0.99][rng.random_range(0..3)];
        let a: Vec<C64> = (0..k).map(|_| random_disc_point(&mut rng, radius)).collect();
        let ga = g.eval(&a);
        let rot = if ga.norm() > 0.0 { ga.conj() / ga.norm() } else { c(1.0) };
        let f = g.scale(rot);
        let fa = f.eval(&a).re;
        let lhs: f64 = f.gradient(&a).iter().zip(&a).map(|(d, ai)| (1.0 - ai.norm_sqr()) * d.norm()).sum();
        Ok(vec![Case::new(format!("k={k} deg={degree} |a|<={radius}"), lhs, 2.0 * (1.0 - fa))])
    })
}

/// `1 + 2Σ_{p=1}^{m} ρ^p cos(π/(⌊m/p⌋+2))`, or `(1+ρ)/(1−ρ)` for `m = None`.
pub fn harnack_factor(m: Option<usize>, rho: f64) -> f64 {
    match m {
        None => (1.0 + rho) / (1.0 - rho),
        Some(m) => 1.0 + 2.0 * (1..=m).map(|p| rho.powi(p as i32) * fejer_cos(m, p)).sum::<f64>(),
    }
}

fn poisson(cz: C64) -> f64 {
    ((c(1.0) + cz) / (c(1.0) - cz)).re
}

enum HarmonicFactor {
    Poisson(C64),
    /// `Re(c_0 + 2Σ c_p z^p)` for an autocorrelation `c`.
    Trig(Vec<C64>),
}

impl HarmonicFactor {
    fn eval(&self, z: C64) -> f64 {
        match self {
            Self::Poisson(cp) => poisson(cp * z),
            Self::Trig(cs) => {
                cs[0].re + 2.0 * cs.iter().enumerate().skip(1).map(|(p, a)| (a * z.powu(p as u32)).re).sum::<f64>()
            }
        }
    }

    fn degree(&self) -> Option<usize> {
        match self {
            Self::Poisson(_) => None,
            Self::Trig(cs) => Some(cs.len() - 1),
        }
    }
}

pub fn harnack_suite(cfg: &SuiteConfig) -> Result<SuiteReport> {
    let mut probes = Vec::new();
    for (cp, rho) in [(0.999, 0.9), (0.99, 0.5), (0.9999, 0.99)] {
        let v = poisson(c(cp * rho));
        probes.push(Case::new(format!("poisson c={cp} rho={rho}"), v, harnack_factor(None, rho)));
    }
    run_suite("harnack", cfg, probes, |seed| {
        let mut rng = rng_from(seed);
        let mut cases = Vec::new();
        let k = rng.random_range(1..=3);
        let rho: Vec<f64> = (0..k).map(|_| rng.random_range(0.0..0.95)).collect();
        // (a) products of positive one-variable harmonic factors.
        let factors: Vec<HarmonicFactor> = (0..k)
            .map(|_| {
                if rng.random::<bool>() {
                    let mag = 1.0 - 10f64.powf(rng.random_range(-4.0..0.0));
                    HarmonicFactor::Poisson(C64::from_polar(mag, rng.random_range(0.0..std::f64::consts::TAU)))
                } else {
                    {
                    let m = rng.random_range(1..=5);
                    HarmonicFactor::Trig(random_fejer(&mut rng, m))
                }
                }
            })
            .collect();
        let z: Vec<C64> = factors
            .iter()
            .zip(&rho)
            .map(|(h, &r)| match h {
                HarmonicFactor::Poisson(cp) if rng.random::<bool>() => c(r) * cp.conj() / cp.norm(),
                _ => C64::from_polar(r, rng.random_range(0.0..std::f64::consts::TAU)),
            })
            .collect();
        let value: f64 = factors.iter().zip(&z).map(|(h, &zi)| h.eval(zi)).product();
        let at0: f64 = factors.iter().map(|h| h.eval(c(0.0))).product();
        let middle: f64 = factors.iter().zip(&rho).map(|(h, &r)| harnack_factor(h.degree(), r)).product();
        let outer: f64 = rho.iter().map(|&r| harnack_factor(None, r)).product();
        cases.push(Case::new(format!("product k={k} rho={rho:?}"), value, at0 * middle));
        cases.push(Case::new(format!("product k={k} middle"), middle, outer));
        // 1 − Re f for a polydisc Schur polynomial f.
        let degree = rng.random_range(1..=3);
        let f = gen_polydisc_schur(&mut rng, k, degree);
        let zf: Vec<C64> = rho.iter().map(|&r| C64::from_polar(r, rng.random_range(0.0..std::f64::consts::TAU))).collect();
        let h = 1.0 - f.eval(&zf).re;
        let h0 = 1.0 - f.constant().re;
        let middle: f64 = f.factor_degrees().iter().zip(&rho).map(|(&m, &r)| harnack_factor(Some(m), r)).product();
        cases.push(Case::new(format!("1-Re f k={k} deg={degree}"), h, h0 * middle));
        // (b) operator: F = G*G, checked through its pluriharmonic coefficients.
        let kb = rng.random_range(1..=2);
        let sizes: Vec<usize> = (0..kb).map(|_| rng.random_range(1..=2)).collect();
        let mut degrees: Vec<usize> = (0..kb).map(|_| rng.random_range(0..=1)).collect();
        if kb == 1 {
            degrees[0] = rng.random_range(1..=2);
        } else if degrees.iter().all(|&d| d == 0) {
            degrees[rng.random_range(0..kb)] = 1;
        }
        let mcoef = rng.random_range(1..=2);
        let g = random_polynomial(&mut rng, &sizes, &degrees, mcoef)?;
        let (pf, trunc) = gram_pluriharmonic(&g)?;
        let rho_b: Vec<f64> = (0..kb).map(|_| rng.random_range(0.0..0.95)).collect();
        let a = assemble_pluriharmonic(&pf, &Scaling::PerFactor(rho_b.clone()), &trunc)?;
        let top = max_eig_hermitian(&a, SPECTRAL_TOL)?;
        let bottom = min_eig_hermitian(&a, SPECTRAL_TOL)?;
        let omega = (top.value + top.residual).max(-(bottom.value - bottom.residual));
        let a0 = dense_norm(&pf.constant_term());
        let fd = g.factor_degrees();
        let middle: f64 = fd.iter().zip(&rho_b).map(|(&m, &r)| harnack_factor(Some(m), r)).product();
        let outer: f64 = rho_b.iter().map(|&r| harnack_factor(None, r)).product();
        let label = format!("gram n={sizes:?} deg={degrees:?} rho={rho_b:?}");
        cases.push(Case::new(format!("{label} omega"), omega, a0 * middle));
        cases.push(Case::new(format!("{label} middle"), a0 * middle, a0 * outer));
        Ok(cases)
    })
}

pub fn re_bridge_suite(cfg: &SuiteConfig) -> Result<SuiteReport> {
    // f(z) = z: 2I − rS − rS* ⪰ 0.
    let mut probes = Vec::new();
    for r in [0.5, 0.9, 0.999] {
        let mut f = FreePolynomial::new(&[1], 1)?;
        f.add_scalar_term(MultiWord::single(&[1], 0, 1)?, c(1.0))?;
        let trunc = Truncation::new(&[30], &[1])?;
        let h = re_defect(&assemble(&f, &Scaling::Uniform(r), &trunc)?)?;
        let low = min_eig_hermitian(&h, SPECTRAL_TOL)?;
        probes.push(Case::new(format!("f=z r={r}"), -(low.value - low.residual), 0.0));
    }
    run_suite("re_bridge", cfg, probes, |seed| {
        let mut rng = rng_from(seed);
        let k = rng.random_range(1..=3);
        let degree = rng.random_range(1..=if k == 3 { 2 } else { 3 });
        let g = random_polydisc(&mut rng, k, degree);
        let (_, sup_re) = g.torus_bounds(torus_points(k));
        let mut f = g.clone();
        f.add_constant(c(1.0 - sup_re));
        let free = f.to_free()?;
        let sizes = vec![1; k];
        let trunc = fit_truncation(&free.factor_degrees(), &sizes, 1, cfg.headroom, cfg.dim_cap)?;
        let r = [0.3, 0.9, 0.999][rng.random_range(0..3)] * rng.random_range(0.9..1.0);
        let h = re_defect(&assemble(&free, &Scaling::Uniform(r), &trunc)?)?;
        let low = min_eig_hermitian(&h, SPECTRAL_TOL)?;
        let mut cases = vec![Case::new(format!("k={k} deg={degree} r={r}"), -(low.value - low.residual), 0.0)];
        if k <= 2 {
            cases.push(converse_case(&mut rng, &g, degree)?);
        }
        Ok(cases)
    })
}

/// Shifts `g` so that `Re f(z0) = 5/4` at an interior point and checks that
/// the truncated Berezin kernel at `z0/r` exhibits `2I − F(rS) − F(rS)*`
/// with a negative Rayleigh quotient.
fn converse_case(rng: &mut ChaCha8Rng, g: &PolydiscPolynomial, degree: usize) -> Result<Case> {
    let k = g.k;
    let z0: Vec<C64> = (0..k).map(|_| C64::from_polar(0.8, rng.random_range(0.0..std::f64::consts::TAU))).collect();
    let mut f = g.clone();
    f.add_constant(c(1.25 - g.eval(&z0).re));
    let r = 0.99;
    let free = f.to_free()?;
    let d = if k == 1 { 40 } else { 14 };
    let trunc = Truncation::new(&vec![d; k], &vec![1; k])?;
    let h = re_defect(&assemble(&free, &Scaling::Uniform(r), &trunc)?)?;
    let w: Vec<Vec<C64>> = z0.iter().map(|z| vec![z / r]).collect();
    let kern = berezin_kernel(&w, &trunc)?;
    let q = kern.transform(&h, factor_dim(1, d).pow(k as u32))?[(0, 0)].re / kern.norm_sqr();
    Ok(Case::new(format!("converse k={k} deg={degree}"), q, -0.25))
}

/// `f_i` in letter `j` of factor `i`, as a polynomial over all factors.
fn embed_single(sizes: &[usize], factor: usize, letter: u32, coeffs: &[C64]) -> Result<FreePolynomial> {
    let mut f = FreePolynomial::new(sizes, 1)?;
    for (p, a) in coeffs.iter().enumerate() {
        let mut letters = vec![Vec::new(); sizes.len()];
        letters[factor] = vec![letter; p];
        f.add_scalar_term(MultiWord::from_letters(&letters, sizes)?, *a)?;
    }
    Ok(f)
}

pub fn bombieri_upper_suite(cfg: &SuiteConfig) -> Result<SuiteReport> {
    let opts = SchurOptions { ..cfg.schur_options() };
    let probes = vec![Case::new("constant r=0", 0.5, 0.5)];
    run_suite("bombieri_upper", cfg, probes, |seed| {
        let mut rng = rng_from(seed);
        let mut cases = Vec::new();
        let shape = schur_shape(&mut rng, cfg, 1);
        let s = gen_schur(seed, &shape, &opts)?;
        let k = shape.alphabet_sizes.len();
        let r = rng.random_range(0.0..0.99);
        let lhs = majorant_mh(&s.f, &Scaling::Uniform(r), &s.truncation, SPECTRAL_TOL)?;
        let rhs = (1.0 - r * r).powf(-(k as f64) / 2.0) * s.certified_norm_lower;
        cases.push(Case::new(format!("{} r={r}", shape.describe()), lhs, rhs));
        // Products of one-variable polynomials on distinct factors.
        let k = rng.random_range(2..=3);
        let sizes: Vec<usize> = (0..k).map(|_| rng.random_range(1..=2)).collect();
        let mut degs: Vec<usize> = (0..k).map(|_| rng.random_range(1..=3)).collect();
        while degs.iter().zip(&sizes).map(|(&d, &n)| factor_dim(n, d)).product::<usize>() > cfg.dim_cap {
            let i = (0..k).max_by_key(|&i| factor_dim(sizes[i], degs[i])).expect("k >= 2");
            degs[i] -= 1;
        }
        let parts: Vec<(u32, Vec<C64>)> = sizes
            .iter()
            .zip(&degs)
            .map(|(&n, &d)| (rng.random_range(1..=n as u32), (0..=d).map(|_| gaussian(&mut rng)).collect()))
            .collect();
        let mut prod = FreePolynomial::constant(&sizes, c(1.0))?;
        for (i, (j, coeffs)) in parts.iter().enumerate() {
            prod = prod.mul(&embed_single(&sizes, i, *j, coeffs)?)?;
        }
        let trunc = fit_truncation(&prod.factor_degrees(), &sizes, 1, cfg.headroom, cfg.dim_cap)?;
        let mut d_prod = 1.0;
        let mut n_prod = 1.0;
        for (i, (j, coeffs)) in parts.iter().enumerate() {
            let fi = embed_single(&sizes[i..=i], 0, *j, coeffs)?;
            let ti = Truncation::new(&trunc.degrees()[i..=i], &sizes[i..=i])?;
            d_prod *= majorant_mh(&fi, &Scaling::Uniform(r), &ti, SPECTRAL_TOL)?;
            n_prod *= operator_norm(&assemble(&fi, &Scaling::one(), &ti)?, SPECTRAL_TOL)?.value;
        }
        let d_g = majorant_mh(&prod, &Scaling::Uniform(r), &trunc, SPECTRAL_TOL)?;
        let n_g = operator_norm(&assemble(&prod, &Scaling::one(), &trunc)?, SPECTRAL_TOL)?.value;
        let label = format!("product n={sizes:?} r={r}");
        cases.push(Case::new(format!("{label} majorant"), (d_g - d_prod).abs() / d_prod.max(1.0), 0.0));
        cases.push(Case::new(format!("{label} norm"), (n_g - n_prod).abs() / n_prod.max(1.0), 0.0));
        Ok(cases)
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> SuiteConfig {
        SuiteConfig { trials: 24, ..Default::default() }
    }

    #[test]
    fn harnack_factor_limits() {
        assert!((harnack_factor(Some(1), 0.5) - 1.5).abs() < 1e-15);
        for m in 1..10 {
            assert!(harnack_factor(Some(m), 0.7) <= harnack_factor(None, 0.7));
        }
    }

    #[test]
    fn mobius_majorant_closed_forms() {
        for i in 1..100 {
            let a = i as f64 / 100.0;
            let v = mobius_majorant(a, 1.0 / 3.0);
            assert!((v - (1.0 + 3.0 * a - 2.0 * a * a) / (3.0 - a)).abs() < 1e-14);
        }
        assert!((mobius_majorant(0.9, 0.4) - 1.01875).abs() < 1e-14);
    }

    #[test]
    fn small_runs_pass() {
        let cfg = small();
        for name in super::super::SUITE_NAMES {
            let r = super::super::run_named(name, &cfg).unwrap();
            assert!(r.pass, "{r}");
            assert!(r.cases > 0);
        }
    }

    #[test]
    fn perturbed_landau_constant_is_caught() {
        let cfg = SuiteConfig { trials: 4, constant_scale: 0.75, ..Default::default() };
        assert!(!landau_op_suite(&cfg).unwrap().pass);
    }

    #[test]
    fn reports_are_deterministic() {
        let cfg = small();
        assert_eq!(wiener_suite(&cfg).unwrap(), wiener_suite(&cfg).unwrap());
        assert_eq!(harnack_suite(&cfg).unwrap(), harnack_suite(&cfg).unwrap());
    }
}
