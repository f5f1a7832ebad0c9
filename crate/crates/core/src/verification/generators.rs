//! Seeded random instances for the suites.

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fockmodel::{assemble, ComplexMatrix, FreePolynomial, Scaling, Truncation};
use crate::freewords::{compositions, words_of_length, MultiWord};
use crate::opanalysis::{dense_min_eig, is_positive, operator_norm};

pub fn rng_from(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn gaussian(rng: &mut ChaCha8Rng) -> C64 {
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    C64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

fn gaussian_matrix(rng: &mut ChaCha8Rng, m: usize) -> DMatrix<C64> {
    DMatrix::from_fn(m, m, |_, _| gaussian(rng))
}

/// Dimension of one factor `Σ_{l≤d} n^l`.
pub fn factor_dim(n: usize, d: usize) -> usize {
    (0..=d).map(|l| n.pow(l as u32)).sum()
}

/// Largest truncation `deg_i + h` with `h ≤ headroom` whose assembled size
/// `m·dim` stays within `cap`.
pub fn fit_truncation(degrees: &[usize], sizes: &[usize], m: usize, headroom: usize, cap: usize) -> Result<Truncation> {
    for h in (0..=headroom).rev() {
        let dim: usize = degrees.iter().zip(sizes).map(|(&d, &n)| factor_dim(n, d + h)).product();
        if dim * m <= cap {
            let ds: Vec<usize> = degrees.iter().map(|d| d + h).collect();
            return Truncation::new(&ds, sizes);
        }
    }
    Err(Error::DimensionCap {
        requested: degrees.iter().zip(sizes).map(|(&d, &n)| factor_dim(n, d)).product::<usize>() * m,
        cap,
    })
}

/// Shape of a random polynomial.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Shape {
    pub alphabet_sizes: Vec<usize>,
    pub degree: usize,
    pub m: usize,
}

impl Shape {
    /// A random shape whose worst-case truncation at `degree` fits `cap`.
    pub fn random(rng: &mut ChaCha8Rng, max_k: usize, max_n: usize, max_degree: usize, max_m: usize, cap: usize) -> Shape {
        let k = rng.random_range(1..=max_k);
        let sizes: Vec<usize> = (0..k).map(|_| rng.random_range(1..=max_n)).collect();
        let m = rng.random_range(1..=max_m);
        let mut degree = rng.random_range(1..=max_degree);
        while degree > 1 && m * sizes.iter().map(|&n| factor_dim(n, degree)).product::<usize>() > cap {
            degree -= 1;
        }
        Shape { alphabet_sizes: sizes, degree, m }
    }

    pub fn describe(&self) -> String {
        format!("n={:?} deg={} m={}", self.alphabet_sizes, self.degree, self.m)
    }
}

/// Random multiwords of total degree at most `degree`, each kept with
/// probability `density`.
pub fn random_support(rng: &mut ChaCha8Rng, sizes: &[usize], degree: usize, density: f64) -> Vec<MultiWord> {
    let mut out = Vec::new();
    for p in (0..=degree).flat_map(|q| compositions(q, sizes.len())) {
        let per_factor: Vec<Vec<_>> = p.iter().zip(sizes).map(|(&l, &n)| words_of_length(n, l)).collect();
        let mut idx = vec![0usize; per_factor.len()];
        loop {
            if rng.random::<f64>() < density {
                let parts = idx.iter().zip(&per_factor).map(|(&j, ws)| ws[j].clone()).collect();
                out.push(MultiWord::new(parts));
            }
            // Odometer over the per-factor word lists.
            let mut i = 0;
            loop {
                if i == idx.len() {
                    break;
                }
                idx[i] += 1;
                if idx[i] < per_factor[i].len() {
                    break;
                }
                idx[i] = 0;
                i += 1;
            }
            if i == idx.len() {
                break;
            }
        }
    }
    out
}

/// A polynomial with truncated norm one.
#[derive(Clone, Debug)]
pub struct SchurSample {
    pub f: FreePolynomial,
    pub truncation: Truncation,
    /// `‖F(T)‖` after scaling, re-evaluated; a lower bound for `‖F‖_∞`.
    pub certified_norm_lower: f64,
    /// Factor the raw draw was multiplied by.
    pub scaling_applied: f64,
    pub headroom_used: usize,
}

#[derive(Clone, Debug)]
pub struct SchurOptions {
    /// Constant coefficient `a_0·I`.
    pub scalar_constant: bool,
    /// Rotate so the constant is real and nonnegative (needs a scalar constant).
    pub nonnegative_constant: bool,
    pub headroom: usize,
    pub dim_cap: usize,
    pub tol: f64,
}

impl Default for SchurOptions {
    fn default() -> Self {
        Self { scalar_constant: true, nonnegative_constant: false, headroom: 4, dim_cap: 128, tol: 1e-12 }
    }
}

/// Gaussian coefficients rescaled so that the truncated norm equals one.
pub fn gen_schur(seed: u64, shape: &Shape, opts: &SchurOptions) -> Result<SchurSample> {
    let mut rng = rng_from(seed);
    let sizes = &shape.alphabet_sizes;
    let id = MultiWord::identity(sizes);
    let mut f = FreePolynomial::new(sizes, shape.m)?;
    let density = rng.random_range(0.3..1.0);
    let decay: f64 = rng.random_range(0.4..1.0);
    let a0 = gaussian(&mut rng);
    if opts.scalar_constant {
        f.add_scalar_term(id.clone(), a0)?;
    } else {
        f.add_term(id.clone(), gaussian_matrix(&mut rng, shape.m))?;
    }
    for w in random_support(&mut rng, sizes, shape.degree, density) {
        if w.is_identity() {
            continue;
        }
        let a = gaussian_matrix(&mut rng, shape.m) * C64::new(decay.powi(w.total_degree() as i32), 0.0);
        f.add_term(w, a)?;
    }
    // Keep the nominal degree: ensure some top-degree word is present.
    if f.degree() < shape.degree {
        let mut letters: Vec<Vec<u32>> = vec![Vec::new(); sizes.len()];
        for _ in 0..shape.degree {
            let i = rng.random_range(0..sizes.len());
            letters[i].push(rng.random_range(1..=sizes[i] as u32));
        }
        f.add_term(MultiWord::from_letters(&letters, sizes)?, gaussian_matrix(&mut rng, shape.m))?;
    }
    let fd = f.factor_degrees();
    let truncation = fit_truncation(&fd, sizes, shape.m, opts.headroom, opts.dim_cap)?;
    let headroom_used = truncation.degrees()[0] - fd[0];
    let norm = operator_norm(&assemble(&f, &Scaling::one(), &truncation)?, opts.tol)?.value;
    if norm == 0.0 {
        return Err(Error::InvalidParameter("zero polynomial drawn".into()));
    }
    let mut factor = C64::new(1.0 / norm, 0.0);
    if opts.nonnegative_constant {
        if !opts.scalar_constant {
            return Err(Error::InvalidParameter("a nonnegative constant needs a scalar constant term".into()));
        }
        if a0.norm() > 0.0 {
            factor *= a0.conj() / a0.norm();
        }
    }
    let f = f.scale(factor);
    let certified_norm_lower = operator_norm(&assemble(&f, &Scaling::one(), &truncation)?, opts.tol)?.value;
    Ok(SchurSample { f, truncation, certified_norm_lower, scaling_applied: 1.0 / norm, headroom_used })
}

/// `U` and `P ≥ 0` with `A = U P`.
pub fn polar(a: &DMatrix<C64>) -> (DMatrix<C64>, DMatrix<C64>) {
    let svd = a.clone().svd(true, true);
    let u = svd.u.expect("requested");
    let vt = svd.v_t.expect("requested");
    let s = DMatrix::from_diagonal(&svd.singular_values.map(|x| C64::new(x, 0.0)));
    let unitary = &u * &vt;
    let p = vt.adjoint() * s * &vt;
    (unitary, (&p + p.adjoint()) * C64::new(0.5, 0.0))
}

/// A polynomial with `F(0) ≥ 0` and `2I − F(T) − F(T)* ⪰ 0` on its truncation.
#[derive(Clone, Debug)]
pub struct ReBoundedSample {
    pub f: FreePolynomial,
    pub truncation: Truncation,
    /// `λ_min(2I − F(T) − F(T)*)`.
    pub positivity_margin: f64,
}

/// `F = s·U*G` for a Schur sample `G` with `G(0) = U P`, so `F(0) = sP ≥ 0`
/// and `‖F(T)‖ ≤ 1`, hence `Re F(T) ≤ I`.
pub fn gen_re_bounded(seed: u64, shape: &Shape, opts: &SchurOptions) -> Result<ReBoundedSample> {
    let mut rng = rng_from(seed ^ 0x5EED_0F_2E);
    let g = gen_schur(seed, shape, &SchurOptions { scalar_constant: false, nonnegative_constant: false, ..opts.clone() })?;
    let (u, _) = polar(&g.f.constant_term());
    let s = if rng.random::<f64>() < 0.5 { 1.0 } else { rng.random_range(0.5..1.0) };
    let f = g.f.left_multiply(&(u.adjoint() * C64::new(s, 0.0)))?;
    let a = assemble(&f, &Scaling::one(), &g.truncation)?;
    let two = ComplexMatrix::identity(a.rows()).scale(C64::new(2.0, 0.0));
    let h = two.sub(&a)?.sub(&a.adjoint())?;
    let margin = crate::opanalysis::min_eig_hermitian(&h, 1e-12)?.value;
    if !is_positive(&h, opts.tol.max(1e-10))? {
        return Err(Error::InvalidParameter(format!("generated F violates Re F <= I: {margin}")));
    }
    debug_assert!(dense_min_eig(&f.constant_term()) >= -1e-12);
    Ok(ReBoundedSample { f, truncation: g.truncation, positivity_margin: margin })
}

/// Scalar polynomials on the polydisc `D^k`, stored as exponent vectors.
#[derive(Clone, Debug, PartialEq)]
pub struct PolydiscPolynomial {
    pub k: usize,
    pub terms: Vec<(Vec<usize>, C64)>,
}

impl PolydiscPolynomial {
    pub fn new(k: usize) -> Self {
        Self { k, terms: Vec::new() }
    }

    pub fn push(&mut self, p: Vec<usize>, a: C64) {
        debug_assert_eq!(p.len(), self.k);
        self.terms.push((p, a));
    }

    pub fn degree(&self) -> usize {
        self.terms.iter().map(|(p, _)| p.iter().sum()).max().unwrap_or(0)
    }

    pub fn factor_degrees(&self) -> Vec<usize> {
        (0..self.k)
            .map(|i| self.terms.iter().map(|(p, _)| p[i]).max().unwrap_or(0))
            .collect()
    }

    pub fn constant(&self) -> C64 {
        self.terms.iter().filter(|(p, _)| p.iter().all(|&e| e == 0)).map(|(_, a)| a).sum()
    }

    pub fn eval(&self, z: &[C64]) -> C64 {
        self.terms
            .iter()
            .map(|(p, a)| p.iter().zip(z).fold(*a, |acc, (&e, zi)| acc * zi.powu(e as u32)))
            .sum()
    }

    /// `∂f/∂z_i` at `z`.
    pub fn gradient(&self, z: &[C64]) -> Vec<C64> {
        (0..self.k)
            .map(|i| {
                self.terms
                    .iter()
                    .filter(|(p, _)| p[i] > 0)
                    .map(|(p, a)| {
                        p.iter().zip(z).enumerate().fold(*a * p[i] as f64, |acc, (j, (&e, zj))| {
                            acc * zj.powu(if j == i { e as u32 - 1 } else { e as u32 })
                        })
                    })
                    .sum()
            })
            .collect()
    }

    pub fn scale(&self, c: C64) -> Self {
        Self { k: self.k, terms: self.terms.iter().map(|(p, a)| (p.clone(), a * c)).collect() }
    }

    pub fn add_constant(&mut self, c: C64) {
        self.push(vec![0; self.k], c);
    }

    /// The same function as a free polynomial over one letter per factor.
    pub fn to_free(&self) -> Result<FreePolynomial> {
        let sizes = vec![1; self.k];
        let mut f = FreePolynomial::new(&sizes, 1)?;
        for (p, a) in &self.terms {
            let letters: Vec<Vec<u32>> = p.iter().map(|&e| vec![1; e]).collect();
            f.add_scalar_term(MultiWord::from_letters(&letters, &sizes)?, *a)?;
        }
        Ok(f)
    }

    /// Upper bounds `(sup |f|, sup Re f)` over the torus, certified by a
    /// grid with `points` nodes per coordinate: a first-order Taylor bound at
    /// each node plus the second-order remainder `(h²/8)·Σ|a_p|·|p|²`.
    pub fn torus_bounds(&self, points: usize) -> (f64, f64) {
        let h = 2.0 * std::f64::consts::PI / points as f64;
        let second: f64 = self
            .terms
            .iter()
            .map(|(p, a)| a.norm() * (p.iter().sum::<usize>() as f64).powi(2))
            .sum::<f64>()
            * h
            * h
            / 8.0;
        let total = points.pow(self.k as u32);
        let mut sup_abs = f64::NEG_INFINITY;
        let mut sup_re = f64::NEG_INFINITY;
        let mut z = vec![C64::new(1.0, 0.0); self.k];
        for idx in 0..total {
            let mut rest = idx;
            for zi in z.iter_mut() {
                *zi = C64::from_polar(1.0, h * (rest % points) as f64);
                rest /= points;
            }
            let v = self.eval(&z);
            // |∂f/∂θ_i| = |z_i ∂f/∂z_i| = |∂f/∂z_i| on the torus.
            let first: f64 = self.gradient(&z).iter().map(|g| g.norm()).sum::<f64>() * h / 2.0;
            sup_abs = sup_abs.max(v.norm() + first);
            sup_re = sup_re.max(v.re + first);
        }
        (sup_abs + second, sup_re + second)
    }
}

/// Grid resolution keeping `points^k` near four thousand nodes.
pub fn torus_points(k: usize) -> usize {
    match k {
        1 => 1024,
        2 => 64,
        3 => 16,
        _ => 8,
    }
}

/// Random polydisc polynomial of total degree at most `degree`.
pub fn random_polydisc(rng: &mut ChaCha8Rng, k: usize, degree: usize) -> PolydiscPolynomial {
    let mut f = PolydiscPolynomial::new(k);
    let decay: f64 = rng.random_range(0.3..1.0);
    for p in (0..=degree).flat_map(|q| compositions(q, k)) {
        if rng.random::<f64>() < 0.7 || p.iter().all(|&e| e == 0) {
            let q: usize = p.iter().sum();
            f.push(p, gaussian(rng) * decay.powi(q as i32));
        }
    }
    f
}

/// Random polydisc polynomial scaled so that its certified sup-norm bound
/// is one.
pub fn gen_polydisc_schur(rng: &mut ChaCha8Rng, k: usize, degree: usize) -> PolydiscPolynomial {
    let f = random_polydisc(rng, k, degree);
    let (sup, _) = f.torus_bounds(torus_points(k));
    f.scale(C64::new(1.0 / sup, 0.0))
}

/// Autocorrelation `c_p = Σ_j q_{j+p} conj(q_j)`, `p = 0..deg q`: the
/// nonnegative trigonometric polynomial `|q(e^{iθ})|² = c_0 + 2 Re Σ c_p e^{ipθ}`.
pub fn autocorrelation(q: &[C64]) -> Vec<C64> {
    (0..q.len())
        .map(|p| (0..q.len() - p).map(|j| q[j + p] * q[j].conj()).sum())
        .collect()
}

/// `q_j = sin((j+1)π/(m+2))`, whose autocorrelation attains
/// `c_1 = c_0 cos(π/(m+2))`.
pub fn fejer_extremal(m: usize) -> Vec<C64> {
    (0..=m)
        .map(|j| C64::new(((j + 1) as f64 * std::f64::consts::PI / (m as f64 + 2.0)).sin(), 0.0))
        .collect()
}

/// `cos(π/(⌊m/p⌋ + 2))`.
pub fn fejer_cos(m: usize, p: usize) -> f64 {
    (std::f64::consts::PI / ((m / p) as f64 + 2.0)).cos()
}

/// Coefficients of a random nonnegative trigonometric polynomial of degree
/// `m`, normalized to `c_0 = 1`.
pub fn random_fejer(rng: &mut ChaCha8Rng, m: usize) -> Vec<C64> {
    let q: Vec<C64> = match rng.random_range(0..3) {
        0 => (0..=m).map(|_| gaussian(rng)).collect(),
        1 => {
            let eps = 10f64.powf(rng.random_range(-6.0..-1.0));
            fejer_extremal(m).into_iter().map(|x| x + gaussian(rng) * eps).collect()
        }
        _ => {
            let rot = C64::from_polar(1.0, rng.random_range(0.0..std::f64::consts::TAU));
            fejer_extremal(m)
                .into_iter()
                .enumerate()
                .map(|(j, x)| x * rot.powu(j as u32) * rng.random_range(0.8..1.2))
                .collect()
        }
    };
    let c = autocorrelation(&q);
    let c0 = c[0].re;
    c.into_iter().map(|x| x / c0).collect()
}
