use std::collections::{BTreeMap, BTreeSet};

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

use super::matrix::ComplexMatrix;
use super::truncation::Truncation;
use crate::error::{Error, Result};
use crate::freewords::MultiWord;

/// Default cap on the coefficient dimension `m`.
pub const DEFAULT_COEFF_DIM_CAP: usize = 8;

fn zero() -> C64 {
    C64::new(0.0, 0.0)
}

fn check_coeff(m: usize, a: &DMatrix<C64>) -> Result<()> {
    if a.nrows() != m || a.ncols() != m {
        return Err(Error::DimensionMismatch(format!(
            "coefficient is {}x{}, expected {m}x{m}",
            a.nrows(),
            a.ncols()
        )));
    }
    if a.iter().any(|v| !(v.re.is_finite() && v.im.is_finite())) {
        return Err(Error::NonFinite("polynomial coefficient".into()));
    }
    Ok(())
}

/// Weights `ρ_α` applied to monomials during assembly.
#[derive(Clone, Debug, PartialEq)]
pub enum Scaling {
    /// `ρ_α = r^{|α|}`.
    Uniform(f64),
    /// `ρ_α = Π_i r_i^{|α_i|}`.
    PerFactor(Vec<f64>),
    /// `ρ_α = Π` of the per-letter radii `r_{i,j}` along every letter of `α`.
    PerLetter(Vec<Vec<f64>>),
}

impl Scaling {
    pub fn one() -> Self {
        Scaling::Uniform(1.0)
    }

    pub fn weight(&self, w: &MultiWord) -> f64 {
        match self {
            Scaling::Uniform(r) => r.powi(w.total_degree() as i32),
            Scaling::PerFactor(rs) => w
                .parts()
                .iter()
                .zip(rs)
                .map(|(p, r)| r.powi(p.len() as i32))
                .product(),
            Scaling::PerLetter(rs) => w
                .parts()
                .iter()
                .zip(rs)
                .map(|(p, r)| p.letters().iter().map(|&l| r[l as usize - 1]).product::<f64>())
                .product(),
        }
    }

    fn validate(&self, alphabet_sizes: &[usize]) -> Result<()> {
        let ok = |r: f64| (0.0..=1.0).contains(&r);
        let valid = match self {
            Scaling::Uniform(r) => ok(*r),
            Scaling::PerFactor(rs) => rs.len() == alphabet_sizes.len() && rs.iter().all(|&r| ok(r)),
            Scaling::PerLetter(rs) => {
                rs.len() == alphabet_sizes.len()
                    && rs.iter().zip(alphabet_sizes).all(|(r, &n)| r.len() == n)
                    && rs.iter().flatten().all(|&r| ok(r))
            }
        };
        if valid {
            Ok(())
        } else {
            Err(Error::InvalidParameter(format!("scaling {self:?} must lie in [0, 1] with one entry per factor/letter")))
        }
    }
}

/// `F(X) = Σ_α A_(α) ⊗ X_α` with `m×m` complex coefficients.
#[derive(Clone, Debug, PartialEq)]
pub struct FreePolynomial {
    alphabet_sizes: Vec<usize>,
    m: usize,
    terms: BTreeMap<MultiWord, DMatrix<C64>>,
}

impl FreePolynomial {
    pub fn new(alphabet_sizes: &[usize], m: usize) -> Result<Self> {
        if m == 0 {
            return Err(Error::InvalidParameter("coefficient dimension must be positive".into()));
        }
        if alphabet_sizes.is_empty() || alphabet_sizes.contains(&0) {
            return Err(Error::InvalidParameter("alphabet sizes must be nonempty and positive".into()));
        }
        Ok(Self { alphabet_sizes: alphabet_sizes.to_vec(), m, terms: BTreeMap::new() })
    }

    /// The constant scalar polynomial `c`.
    pub fn constant(alphabet_sizes: &[usize], c: C64) -> Result<Self> {
        let mut f = Self::new(alphabet_sizes, 1)?;
        f.add_scalar_term(MultiWord::identity(alphabet_sizes), c)?;
        Ok(f)
    }

    pub fn alphabet_sizes(&self) -> &[usize] {
        &self.alphabet_sizes
    }

    pub fn k(&self) -> usize {
        self.alphabet_sizes.len()
    }

    pub fn coeff_dim(&self) -> usize {
        self.m
    }

    pub fn terms(&self) -> impl Iterator<Item = (&MultiWord, &DMatrix<C64>)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn coefficient(&self, w: &MultiWord) -> Option<&DMatrix<C64>> {
        self.terms.get(w)
    }

    /// `A_0`, or the zero matrix when there is no constant term.
    pub fn constant_term(&self) -> DMatrix<C64> {
        self.terms
            .get(&MultiWord::identity(&self.alphabet_sizes))
            .cloned()
            .unwrap_or_else(|| DMatrix::zeros(self.m, self.m))
    }

    /// Adds `a ⊗ X_w` to the polynomial, merging with an existing term.
    pub fn add_term(&mut self, w: MultiWord, a: DMatrix<C64>) -> Result<()> {
        if w.alphabet_sizes() != self.alphabet_sizes {
            return Err(Error::AlphabetMismatch(format!(
                "term over {:?} added to a polynomial over {:?}",
                w.alphabet_sizes(),
                self.alphabet_sizes
            )));
        }
        check_coeff(self.m, &a)?;
        let entry = self.terms.entry(w).or_insert_with(|| DMatrix::zeros(a.nrows(), a.ncols()));
        *entry += a;
        let drop = entry.iter().all(|v| *v == zero());
        if drop {
            self.terms.retain(|_, v| v.iter().any(|x| *x != zero()));
        }
        Ok(())
    }

    pub fn add_scalar_term(&mut self, w: MultiWord, c: C64) -> Result<()> {
        let a = DMatrix::from_diagonal_element(self.m, self.m, c);
        self.add_term(w, a)
    }

    /// Total degree `max |α|` (0 for the zero polynomial).
    pub fn degree(&self) -> usize {
        self.terms.keys().map(MultiWord::total_degree).max().unwrap_or(0)
    }

    /// Degree in each factor, `max |α_i|`.
    pub fn factor_degrees(&self) -> Vec<usize> {
        let mut out = vec![0; self.k()];
        for w in self.terms.keys() {
            for (o, p) in out.iter_mut().zip(w.parts()) {
                *o = (*o).max(p.len());
            }
        }
        out
    }

    /// Multidegrees carrying at least one term.
    pub fn multidegrees(&self) -> BTreeSet<Vec<usize>> {
        self.terms.keys().map(MultiWord::multidegree).collect()
    }

    /// Total degrees carrying at least one term.
    pub fn total_degrees(&self) -> BTreeSet<usize> {
        self.terms.keys().map(MultiWord::total_degree).collect()
    }

    fn filtered(&self, keep: impl Fn(&MultiWord) -> bool) -> Self {
        Self {
            alphabet_sizes: self.alphabet_sizes.clone(),
            m: self.m,
            terms: self.terms.iter().filter(|(w, _)| keep(w)).map(|(w, a)| (w.clone(), a.clone())).collect(),
        }
    }

    /// The block `Σ_{α ∈ Λ_p} A_α ⊗ X_α`.
    pub fn lambda_block(&self, p: &[usize]) -> Self {
        self.filtered(|w| w.multidegree() == p)
    }

    /// The block `Σ_{α ∈ Γ_q} A_α ⊗ X_α`.
    pub fn gamma_block(&self, q: usize) -> Self {
        self.filtered(|w| w.total_degree() == q)
    }

    /// Keeps the terms whose word lies in `set`.
    pub fn restrict_to(&self, set: &crate::freewords::WordSet) -> Self {
        self.filtered(|w| set.contains(w))
    }

    pub fn map_coefficients(&self, f: impl Fn(&MultiWord, &DMatrix<C64>) -> DMatrix<C64>) -> Self {
        let mut out = Self { alphabet_sizes: self.alphabet_sizes.clone(), m: self.m, terms: BTreeMap::new() };
        for (w, a) in &self.terms {
            let b = f(w, a);
            if b.iter().any(|v| *v != zero()) {
                out.terms.insert(w.clone(), b);
            }
        }
        out
    }

    pub fn scale(&self, c: C64) -> Self {
        self.map_coefficients(|_, a| a * c)
    }

    /// `F(ρX)`: each coefficient multiplied by its weight `ρ_α`.
    pub fn dilate(&self, rho: &Scaling) -> Self {
        self.map_coefficients(|w, a| a * C64::new(rho.weight(w), 0.0))
    }

    /// `U·F` for an `m×m` matrix `U`.
    pub fn left_multiply(&self, u: &DMatrix<C64>) -> Result<Self> {
        check_coeff(self.m, u)?;
        Ok(self.map_coefficients(|_, a| u * a))
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_compatible(other)?;
        let mut out = self.clone();
        for (w, a) in &other.terms {
            out.add_term(w.clone(), a.clone())?;
        }
        Ok(out)
    }

    /// Product `F·G = Σ A_α B_β ⊗ X_{αβ}` (factorwise concatenation).
    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.check_compatible(other)?;
        let mut out = Self::new(&self.alphabet_sizes, self.m)?;
        for (wa, a) in &self.terms {
            for (wb, b) in &other.terms {
                out.add_term(wa.concat(wb)?, a * b)?;
            }
        }
        Ok(out)
    }

    fn check_compatible(&self, other: &Self) -> Result<()> {
        if self.alphabet_sizes != other.alphabet_sizes || self.m != other.m {
            return Err(Error::AlphabetMismatch(format!(
                "polynomials over {:?} (m={}) and {:?} (m={})",
                self.alphabet_sizes, self.m, other.alphabet_sizes, other.m
            )));
        }
        Ok(())
    }

    /// The smallest truncation that holds every term, plus `headroom`.
    pub fn truncation_with_headroom(&self, headroom: usize) -> Result<Truncation> {
        let degrees: Vec<usize> = self.factor_degrees().iter().map(|d| d + headroom).collect();
        Truncation::new(&degrees, &self.alphabet_sizes)
    }
}

fn push_block(
    t: &mut Vec<(usize, usize, C64)>,
    map: &[Option<usize>],
    a: &DMatrix<C64>,
    weight: C64,
    dim: usize,
) {
    for (col, row) in map.iter().enumerate() {
        let Some(row) = *row else { continue };
        for b in 0..a.ncols() {
            for r in 0..a.nrows() {
                let v = a[(r, b)];
                if v != zero() {
                    t.push((r * dim + row, b * dim + col, v * weight));
                }
            }
        }
    }
}

fn check_model(alphabet_sizes: &[usize], trunc: &Truncation) -> Result<()> {
    if alphabet_sizes != trunc.alphabet_sizes() {
        return Err(Error::AlphabetMismatch(format!(
            "polynomial over {:?} assembled on a model over {:?}",
            alphabet_sizes,
            trunc.alphabet_sizes()
        )));
    }
    Ok(())
}

/// `Σ_α A_α ⊗ ρ_α S_α` compressed to the truncation, as an
/// `(m·dim) × (m·dim)` matrix with coefficient index major.
pub fn assemble(f: &FreePolynomial, rho: &Scaling, trunc: &Truncation) -> Result<ComplexMatrix> {
    check_model(&f.alphabet_sizes, trunc)?;
    rho.validate(&f.alphabet_sizes)?;
    let short = f
        .factor_degrees()
        .iter()
        .zip(trunc.degrees())
        .any(|(fd, d)| *fd > d);
    if short {
        log::warn!(
            "polynomial degrees {:?} exceed truncation degrees {:?}; high terms are cut",
            f.factor_degrees(),
            trunc.degrees()
        );
    }
    let dim = trunc.dim();
    let id = MultiWord::identity(&f.alphabet_sizes);
    let mut t = Vec::new();
    for (w, a) in &f.terms {
        let map = trunc.word_map(w, &id);
        push_block(&mut t, &map, a, C64::new(rho.weight(w), 0.0), dim);
    }
    ComplexMatrix::from_triplets(f.m * dim, f.m * dim, t)
}

/// `F(X) = Σ A_(α;β) ⊗ X_α X_β*` where in each factor at least one of
/// `α_i`, `β_i` is empty.
#[derive(Clone, Debug, PartialEq)]
pub struct KPluriharmonic {
    alphabet_sizes: Vec<usize>,
    m: usize,
    terms: BTreeMap<(MultiWord, MultiWord), DMatrix<C64>>,
}

impl KPluriharmonic {
    pub fn new(alphabet_sizes: &[usize], m: usize) -> Result<Self> {
        FreePolynomial::new(alphabet_sizes, m)?;
        Ok(Self { alphabet_sizes: alphabet_sizes.to_vec(), m, terms: BTreeMap::new() })
    }

    pub fn alphabet_sizes(&self) -> &[usize] {
        &self.alphabet_sizes
    }

    pub fn coeff_dim(&self) -> usize {
        self.m
    }

    pub fn terms(&self) -> impl Iterator<Item = (&(MultiWord, MultiWord), &DMatrix<C64>)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn coefficient(&self, alpha: &MultiWord, beta: &MultiWord) -> Option<&DMatrix<C64>> {
        self.terms.get(&(alpha.clone(), beta.clone()))
    }

    /// `A_(g0; g0)`, or zero.
    pub fn constant_term(&self) -> DMatrix<C64> {
        let id = MultiWord::identity(&self.alphabet_sizes);
        self.coefficient(&id, &id).cloned().unwrap_or_else(|| DMatrix::zeros(self.m, self.m))
    }

    pub fn add_term(&mut self, alpha: MultiWord, beta: MultiWord, a: DMatrix<C64>) -> Result<()> {
        for w in [&alpha, &beta] {
            if w.alphabet_sizes() != self.alphabet_sizes {
                return Err(Error::AlphabetMismatch(format!(
                    "term over {:?} added to a function over {:?}",
                    w.alphabet_sizes(),
                    self.alphabet_sizes
                )));
            }
        }
        if alpha.parts().iter().zip(beta.parts()).any(|(a, b)| !a.is_identity() && !b.is_identity()) {
            return Err(Error::InvalidParameter(format!(
                "term ({alpha}; {beta}) has both words nonempty in one factor"
            )));
        }
        check_coeff(self.m, &a)?;
        let key = (alpha, beta);
        let entry = self.terms.entry(key.clone()).or_insert_with(|| DMatrix::zeros(a.nrows(), a.ncols()));
        *entry += a;
        if entry.iter().all(|v| *v == zero()) {
            self.terms.remove(&key);
        }
        Ok(())
    }

    /// Per-factor degree `max(|α_i|, |β_i|)` over all terms.
    pub fn factor_degrees(&self) -> Vec<usize> {
        let mut out = vec![0; self.alphabet_sizes.len()];
        for (a, b) in self.terms.keys() {
            for (i, o) in out.iter_mut().enumerate() {
                *o = (*o).max(a.part(i).len()).max(b.part(i).len());
            }
        }
        out
    }

    /// The analytic part `Σ_α A_(α; g0) ⊗ X_α` as a free polynomial.
    pub fn analytic_part(&self) -> FreePolynomial {
        let id = MultiWord::identity(&self.alphabet_sizes);
        let mut f = FreePolynomial::new(&self.alphabet_sizes, self.m).expect("validated shape");
        for ((a, b), c) in &self.terms {
            if *b == id {
                f.add_term(a.clone(), c.clone()).expect("validated term");
            }
        }
        f
    }

    /// Builds the pluriharmonic function `A_0 + Σ_{α≠0} (A_α ⊗ X_α + A_α* ⊗ X_α*)`
    /// from `A_0` and the non-constant part of a polynomial.
    pub fn from_analytic(f: &FreePolynomial, constant: DMatrix<C64>) -> Result<Self> {
        let mut h = Self::new(f.alphabet_sizes(), f.coeff_dim())?;
        let id = MultiWord::identity(f.alphabet_sizes());
        h.add_term(id.clone(), id.clone(), constant)?;
        for (w, a) in f.terms() {
            if w.is_identity() {
                continue;
            }
            h.add_term(w.clone(), id.clone(), a.clone())?;
            h.add_term(id.clone(), w.clone(), a.adjoint())?;
        }
        Ok(h)
    }
}

/// `Σ A_(α;β) ⊗ ρ_α ρ_β S_α S_β*` compressed to the truncation.
pub fn assemble_pluriharmonic(
    f: &KPluriharmonic,
    rho: &Scaling,
    trunc: &Truncation,
) -> Result<ComplexMatrix> {
    check_model(&f.alphabet_sizes, trunc)?;
    rho.validate(&f.alphabet_sizes)?;
    let dim = trunc.dim();
    let mut t = Vec::new();
    for ((alpha, beta), a) in &f.terms {
        let map = trunc.word_map(alpha, beta);
        let w = rho.weight(alpha) * rho.weight(beta);
        push_block(&mut t, &map, a, C64::new(w, 0.0), dim);
    }
    ComplexMatrix::from_triplets(f.m * dim, f.m * dim, t)
}

fn coeff_dim_of(t: &ComplexMatrix, trunc: &Truncation) -> Result<usize> {
    let dim = trunc.dim();
    if !t.is_square() || t.rows() % dim != 0 {
        return Err(Error::DimensionMismatch(format!(
            "{}x{} matrix is not a block operator over a model of dimension {dim}",
            t.rows(),
            t.cols()
        )));
    }
    Ok(t.rows() / dim)
}

/// All pairs `(α; β)` with at most one of `α_i, β_i` nonempty and both of
/// length at most `degrees_i`.
pub fn pluriharmonic_index_pairs(alphabet_sizes: &[usize], degrees: &[usize]) -> Vec<(MultiWord, MultiWord)> {
    let per_factor: Vec<Vec<(crate::freewords::Word, crate::freewords::Word)>> = alphabet_sizes
        .iter()
        .zip(degrees)
        .map(|(&n, &d)| {
            let id = crate::freewords::Word::identity(n);
            let mut v = vec![(id.clone(), id.clone())];
            for len in 1..=d {
                for w in crate::freewords::words_of_length(n, len) {
                    v.push((w.clone(), id.clone()));
                    v.push((id.clone(), w));
                }
            }
            v
        })
        .collect();
    let mut out: Vec<(Vec<_>, Vec<_>)> = vec![(Vec::new(), Vec::new())];
    for opts in &per_factor {
        out = out
            .into_iter()
            .flat_map(|(a, b)| {
                opts.iter().map(move |(x, y)| {
                    let mut a = a.clone();
                    let mut b = b.clone();
                    a.push(x.clone());
                    b.push(y.clone());
                    (a, b)
                })
            })
            .collect();
    }
    out.into_iter().map(|(a, b)| (MultiWord::new(a), MultiWord::new(b))).collect()
}

/// Reads the coefficients `A_(α;β) = [⟨T(e_b ⊗ e_β), e_a ⊗ e_α⟩]_{a,b}` for
/// every admissible pair with `|α_i|, |β_i| ≤ degrees_i`.
pub fn extract_pluriharmonic(
    t: &ComplexMatrix,
    trunc: &Truncation,
    degrees: &[usize],
) -> Result<KPluriharmonic> {
    let m = coeff_dim_of(t, trunc)?;
    if degrees.len() != trunc.k() || degrees.iter().zip(trunc.degrees()).any(|(a, b)| *a > b) {
        return Err(Error::TruncationTooSmall(format!(
            "coefficient degrees {degrees:?} do not fit truncation degrees {:?}",
            trunc.degrees()
        )));
    }
    let dim = trunc.dim();
    let sizes = trunc.alphabet_sizes();
    let mut f = KPluriharmonic::new(&sizes, m)?;
    for (alpha, beta) in pluriharmonic_index_pairs(&sizes, degrees) {
        let ra = trunc.index_of(&alpha).expect("fits truncation");
        let cb = trunc.index_of(&beta).expect("fits truncation");
        let a = DMatrix::from_fn(m, m, |r, c| t.get(r * dim + ra, c * dim + cb));
        if a.iter().any(|v| *v != zero()) {
            f.add_term(alpha, beta, a)?;
        }
    }
    Ok(f)
}

/// Largest entry of `T − assemble_pluriharmonic(F)` over columns whose word
/// lengths satisfy `|β_i| ≤ d_i − margins_i`.
pub fn reconstruction_residual(
    t: &ComplexMatrix,
    f: &KPluriharmonic,
    trunc: &Truncation,
    margins: &[usize],
) -> Result<f64> {
    let rebuilt = assemble_pluriharmonic(f, &Scaling::one(), trunc)?;
    let diff = t.sub(&rebuilt)?;
    let limits: Vec<usize> = trunc
        .degrees()
        .iter()
        .zip(margins)
        .map(|(d, m)| d.saturating_sub(*m))
        .collect();
    let dim = trunc.dim();
    let mut keep = vec![false; dim];
    for i in trunc.indices_with_degrees_at_most(&limits) {
        keep[i] = true;
    }
    Ok(diff
        .triplets()
        .filter(|&(_, c, _)| keep[c % dim])
        .map(|(_, _, v)| v.norm())
        .fold(0.0, f64::max))
}

/// Extracts coefficients and verifies the reconstruction on the interior.
pub fn extract_pluriharmonic_checked(
    t: &ComplexMatrix,
    trunc: &Truncation,
    degrees: &[usize],
    margins: &[usize],
    tol: f64,
) -> Result<KPluriharmonic> {
    let f = extract_pluriharmonic(t, trunc, degrees)?;
    let residual = reconstruction_residual(t, &f, trunc, margins)?;
    if residual > tol {
        return Err(Error::NotToeplitz { residual, tol });
    }
    Ok(f)
}

/// Checks `(I ⊗ R_{i,s}*) T (I ⊗ R_{i,t}) = δ_{st} T` entrywise within `tol`.
///
/// Rows range over words with `|γ_i| ≤ d_i − 1`; columns additionally keep
/// `margins_i` levels away from the truncation in every factor, for operators
/// that are exact only on such columns (e.g. `G(T)*G(T)` with `margins = deg G`).
pub fn is_multi_toeplitz(t: &ComplexMatrix, trunc: &Truncation, margins: &[usize], tol: f64) -> Result<bool> {
    let m = coeff_dim_of(t, trunc)?;
    let dim = trunc.dim();
    let degrees = trunc.degrees();
    let dense = t.to_dense();
    let col_limits: Vec<usize> = degrees.iter().zip(margins).map(|(d, g)| d.saturating_sub(*g)).collect();
    for i in 0..trunc.k() {
        if degrees[i] == 0 {
            continue;
        }
        let n = trunc.alphabet_sizes()[i];
        let rights: Vec<Vec<Option<usize>>> = (1..=n as u32)
            .map(|j| {
                let r = trunc.right_creation(i, j).expect("valid letter");
                let mut map = vec![None; dim];
                for (row, col, _) in r.triplets() {
                    map[col] = Some(row);
                }
                map
            })
            .collect();
        let mut row_limits = vec![usize::MAX; trunc.k()];
        row_limits[i] = degrees[i] - 1;
        let rows = trunc.indices_with_degrees_at_most(&row_limits);
        if col_limits[i] == 0 {
            continue;
        }
        let mut climits = col_limits.clone();
        climits[i] -= 1;
        let cols = trunc.indices_with_degrees_at_most(&climits);
        for (s, rs) in rights.iter().enumerate() {
            for (tt, rt) in rights.iter().enumerate() {
                for &x in &rows {
                    let xs = rs[x].expect("row below the top level");
                    for &y in &cols {
                        let yt = rt[y].expect("column below the top level");
                        for a in 0..m {
                            for b in 0..m {
                                let lhs = dense[(a * dim + xs, b * dim + yt)];
                                let rhs = if s == tt { dense[(a * dim + x, b * dim + y)] } else { zero() };
                                if (lhs - rhs).norm() > tol {
                                    return Ok(false);
                                }
                            }
                        }
                    }
                }
            }
        }
    }
    Ok(true)
}

/// `F(z) = Σ A_α z_α` at a scalar point `z = (z_{i,j})`.
pub fn evaluate_scalar(f: &FreePolynomial, z: &[Vec<C64>]) -> Result<DMatrix<C64>> {
    if z.len() != f.k() || z.iter().zip(&f.alphabet_sizes).any(|(row, &n)| row.len() != n) {
        return Err(Error::AlphabetMismatch(format!(
            "point shape {:?} does not match alphabet sizes {:?}",
            z.iter().map(Vec::len).collect::<Vec<_>>(),
            f.alphabet_sizes
        )));
    }
    let mut out = DMatrix::zeros(f.m, f.m);
    for (w, a) in &f.terms {
        let mut zw = C64::new(1.0, 0.0);
        for (part, row) in w.parts().iter().zip(z) {
            for &l in part.letters() {
                zw *= row[l as usize - 1];
            }
        }
        out += a * zw;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn scalar(v: C64) -> DMatrix<C64> {
        DMatrix::from_element(1, 1, v)
    }

    fn mobius(a: f64, degree: usize) -> FreePolynomial {
        let mut f = FreePolynomial::new(&[1], 1).unwrap();
        f.add_scalar_term(MultiWord::identity(&[1]), c(a, 0.0)).unwrap();
        for n in 1..=degree {
            let w = MultiWord::from_letters(&[vec![1; n]], &[1]).unwrap();
            f.add_scalar_term(w, c(-(1.0 - a * a) * a.powi(n as i32 - 1), 0.0)).unwrap();
        }
        f
    }

    #[test]
    fn constant_assembles_to_identity() {
        let t = Truncation::new(&[2, 1], &[2, 1]).unwrap();
        let f = FreePolynomial::constant(&[2, 1], c(1.0, 0.0)).unwrap();
        assert_eq!(assemble(&f, &Scaling::one(), &t).unwrap(), ComplexMatrix::identity(t.dim()));
        let mut h = KPluriharmonic::new(&[2, 1], 1).unwrap();
        let id = MultiWord::identity(&[2, 1]);
        h.add_term(id.clone(), id, scalar(c(1.0, 0.0))).unwrap();
        assert_eq!(
            assemble_pluriharmonic(&h, &Scaling::one(), &t).unwrap(),
            ComplexMatrix::identity(t.dim())
        );
    }

    #[test]
    fn single_letter_scaled_shift() {
        let t = Truncation::new(&[2], &[1]).unwrap();
        let mut f = FreePolynomial::new(&[1], 1).unwrap();
        f.add_scalar_term(MultiWord::single(&[1], 0, 1).unwrap(), c(1.0, 0.0)).unwrap();
        let a = assemble(&f, &Scaling::Uniform(0.3), &t).unwrap();
        let s = t.left_creation(0, 1).unwrap().scale(c(0.3, 0.0));
        assert_eq!(a, s);
    }

    #[test]
    fn matrix_coefficients_use_kronecker_layout() {
        let n = [2];
        let t = Truncation::new(&[1], &n).unwrap();
        let mut f = FreePolynomial::new(&n, 2).unwrap();
        let a = DMatrix::from_row_slice(2, 2, &[c(1.0, 0.0), c(2.0, 0.0), c(0.0, 1.0), c(3.0, 0.0)]);
        let w = MultiWord::single(&n, 0, 2).unwrap();
        f.add_term(w.clone(), a.clone()).unwrap();
        let got = assemble(&f, &Scaling::one(), &t).unwrap();
        let expect = ComplexMatrix::from_dense(&a).unwrap().kron(&t.monomial(&w).unwrap());
        assert_eq!(got, expect);
    }

    #[test]
    fn scaling_weights() {
        let n = [2, 1];
        let w = MultiWord::from_letters(&[vec![1, 2], vec![1]], &n).unwrap();
        assert!((Scaling::Uniform(0.5).weight(&w) - 0.125).abs() < 1e-15);
        assert!((Scaling::PerFactor(vec![0.5, 0.2]).weight(&w) - 0.05).abs() < 1e-15);
        let s = Scaling::PerLetter(vec![vec![0.5, 0.4], vec![0.1]]);
        assert!((s.weight(&w) - 0.02).abs() < 1e-15);
        let f = FreePolynomial::constant(&n, c(1.0, 0.0)).unwrap();
        let t = Truncation::new(&[1, 1], &n).unwrap();
        assert!(assemble(&f, &Scaling::Uniform(1.5), &t).is_err());
    }

    #[test]
    fn mobius_evaluation_matches_closed_form() {
        let f = mobius(0.5, 30);
        let v = evaluate_scalar(&f, &[vec![c(0.2, 0.0)]]).unwrap()[(0, 0)];
        assert!((v - c(0.3 / 0.9, 0.0)).norm() < 1e-12);
        assert!(evaluate_scalar(&f, &[vec![c(0.2, 0.0), c(0.0, 0.0)]]).is_err());
    }

    #[test]
    fn product_concatenates_words() {
        let n = [2, 1];
        let mut f = FreePolynomial::new(&n, 1).unwrap();
        f.add_scalar_term(MultiWord::single(&n, 0, 1).unwrap(), c(2.0, 0.0)).unwrap();
        let mut g = FreePolynomial::new(&n, 1).unwrap();
        g.add_scalar_term(MultiWord::single(&n, 0, 2).unwrap(), c(1.0, 1.0)).unwrap();
        g.add_scalar_term(MultiWord::single(&n, 1, 1).unwrap(), c(1.0, 0.0)).unwrap();
        let p = f.mul(&g).unwrap();
        let w = MultiWord::from_letters(&[vec![1, 2], vec![]], &n).unwrap();
        assert_eq!(p.coefficient(&w).unwrap()[(0, 0)], c(2.0, 2.0));
        assert_eq!(p.num_terms(), 2);
        // Assembled products agree with products of assembled factors away
        // from the truncation edge.
        let t = Truncation::new(&[4, 3], &n).unwrap();
        let lhs = assemble(&p, &Scaling::one(), &t).unwrap();
        let rhs = assemble(&f, &Scaling::one(), &t)
            .unwrap()
            .matmul(&assemble(&g, &Scaling::one(), &t).unwrap())
            .unwrap();
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn hermitian_symmetric_coefficients_assemble_hermitian() {
        let n = [2, 1];
        let mut f = FreePolynomial::new(&n, 2).unwrap();
        f.add_term(
            MultiWord::from_letters(&[vec![2, 1], vec![]], &n).unwrap(),
            DMatrix::from_row_slice(2, 2, &[c(1.0, 2.0), c(0.0, 1.0), c(-1.0, 0.5), c(3.0, 0.0)]),
        )
        .unwrap();
        f.add_term(
            MultiWord::from_letters(&[vec![], vec![1]], &n).unwrap(),
            DMatrix::from_row_slice(2, 2, &[c(0.5, 0.0), c(0.0, 0.0), c(0.0, -1.0), c(1.0, 1.0)]),
        )
        .unwrap();
        let h = KPluriharmonic::from_analytic(&f, DMatrix::identity(2, 2)).unwrap();
        let t = Truncation::new(&[3, 2], &n).unwrap();
        let a = assemble_pluriharmonic(&h, &Scaling::PerFactor(vec![0.7, 0.4]), &t).unwrap();
        assert!(a.hermitian_defect() < 1e-14);
    }

    #[test]
    fn mixed_words_rejected() {
        let n = [2];
        let mut h = KPluriharmonic::new(&n, 1).unwrap();
        let err = h.add_term(
            MultiWord::single(&n, 0, 1).unwrap(),
            MultiWord::single(&n, 0, 2).unwrap(),
            scalar(c(1.0, 0.0)),
        );
        assert!(err.is_err());
    }

    #[test]
    fn extraction_examples() {
        let n = [1];
        let t = Truncation::new(&[3], &n).unwrap();
        let id = ComplexMatrix::identity(t.dim());
        let f = extract_pluriharmonic_checked(&id, &t, &[3], &[0], 1e-14).unwrap();
        assert_eq!(f.num_terms(), 1);
        assert_eq!(f.constant_term()[(0, 0)], c(1.0, 0.0));
        let s = t.left_creation(0, 1).unwrap();
        let x = s.add(&s.adjoint()).unwrap();
        let f = extract_pluriharmonic_checked(&x, &t, &[3], &[0], 1e-14).unwrap();
        assert_eq!(f.num_terms(), 2);
        let g1 = MultiWord::single(&n, 0, 1).unwrap();
        let g0 = MultiWord::identity(&n);
        assert_eq!(f.coefficient(&g1, &g0).unwrap()[(0, 0)], c(1.0, 0.0));
        assert_eq!(f.coefficient(&g0, &g1).unwrap()[(0, 0)], c(1.0, 0.0));
        assert!(is_multi_toeplitz(&x, &t, &[0], 1e-14).unwrap());
        assert!(is_multi_toeplitz(&id, &t, &[0], 1e-14).unwrap());
    }

    #[test]
    fn gram_round_trip_and_toeplitz() {
        // G = a0 + a1 X_{1,1} + a2 X_{1,2} X_{2,1} with matrix coefficients.
        let n = [2, 1];
        let mut g = FreePolynomial::new(&n, 2).unwrap();
        let mk = |s: f64| {
            DMatrix::from_row_slice(2, 2, &[c(s, 0.1), c(0.3, -s), c(-0.2, 0.4), c(1.0 - s, 0.0)])
        };
        g.add_term(MultiWord::identity(&n), mk(0.5)).unwrap();
        g.add_term(MultiWord::single(&n, 0, 1).unwrap(), mk(-0.7)).unwrap();
        g.add_term(MultiWord::from_letters(&[vec![2], vec![1]], &n).unwrap(), mk(0.9)).unwrap();
        let deg = g.factor_degrees();
        let t = Truncation::new(&[deg[0] * 2 + 1, deg[1] * 2 + 1], &n).unwrap();
        let ga = assemble(&g, &Scaling::Uniform(0.8), &t).unwrap();
        let gram = ga.adjoint().matmul(&ga).unwrap();
        let f = extract_pluriharmonic_checked(&gram, &t, &deg, &deg, 1e-12).unwrap();
        // Oracle: A_(α;g0) = Σ_β B_β* B_{βα} for the dilated coefficients.
        let gd = g.dilate(&Scaling::Uniform(0.8));
        let id = MultiWord::identity(&n);
        let a0: DMatrix<C64> = gd.terms().map(|(_, b)| b.adjoint() * b).fold(DMatrix::zeros(2, 2), |s, x| s + x);
        assert!((f.constant_term() - a0).norm() < 1e-12);
        let g1 = MultiWord::single(&n, 0, 1).unwrap();
        let expect = gd.coefficient(&id).unwrap().adjoint() * gd.coefficient(&g1).unwrap();
        assert!((f.coefficient(&g1, &id).unwrap() - expect).norm() < 1e-12);
        assert!(is_multi_toeplitz(&gram, &t, &deg, 1e-12).unwrap());
        // Hermitian matrices with a non-constant diagonal are not multi-Toeplitz.
        let small = Truncation::new(&[2], &[1]).unwrap();
        let r = DMatrix::from_fn(3, 3, |i, j| c(if i == j { i as f64 } else { (i + 2 * j) as f64 }, 0.0));
        let h = ComplexMatrix::from_dense(&(&r + r.adjoint())).unwrap();
        assert!(!is_multi_toeplitz(&h, &small, &[0], 1e-9).unwrap());
    }
}
