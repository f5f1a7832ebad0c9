use num_complex::Complex64 as C64;

use super::matrix::ComplexMatrix;
use crate::error::{Error, Result};
use crate::freewords::{MultiWord, Word};

/// Default cap on the total dimension of a truncated model.
pub const DEFAULT_DIMENSION_CAP: usize = 4_000_000;

/// Per-factor word arithmetic on basis indices.
///
/// A word of length `l` with lexicographic rank `r` sits at index
/// `offset[l] + r`, so the factor basis is in graded-lex order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub(crate) struct FactorSpace {
    pub n: usize,
    pub d: usize,
    /// `offset[l]` = number of words of length < l; `offset[d+1]` = dim.
    pub offset: Vec<usize>,
    /// `pow[l] = n^l` for `l ≤ d`.
    pub pow: Vec<usize>,
}

impl FactorSpace {
    fn new(n: usize, d: usize, cap: usize) -> Result<Self> {
        let mut offset = Vec::with_capacity(d + 2);
        let mut pow = Vec::with_capacity(d + 1);
        offset.push(0usize);
        let mut p = 1usize;
        for l in 0..=d {
            if l > 0 {
                p = p.checked_mul(n).filter(|&v| v <= cap).ok_or(Error::DimensionCap {
                    requested: usize::MAX,
                    cap,
                })?;
            }
            pow.push(p);
            let next = offset[l].checked_add(p).filter(|&v| v <= cap).ok_or(
                Error::DimensionCap { requested: offset[l].saturating_add(p), cap },
            )?;
            offset.push(next);
        }
        Ok(Self { n, d, offset, pow })
    }

    pub fn dim(&self) -> usize {
        self.offset[self.d + 1]
    }

    /// `(length, rank)` of the word at `idx`.
    pub fn decode(&self, idx: usize) -> (usize, usize) {
        let l = self.offset.partition_point(|&o| o <= idx) - 1;
        (l, idx - self.offset[l])
    }

    pub fn encode(&self, len: usize, rank: usize) -> usize {
        self.offset[len] + rank
    }

    pub fn index_of(&self, w: &Word) -> Option<usize> {
        (w.len() <= self.d && w.alphabet_size() == self.n).then(|| self.encode(w.len(), w.lex_rank()))
    }

    pub fn word_at(&self, idx: usize) -> Word {
        let (l, mut r) = self.decode(idx);
        let mut letters = vec![0u32; l];
        for slot in letters.iter_mut().rev() {
            *slot = (r % self.n) as u32 + 1;
            r /= self.n;
        }
        Word::new(letters, self.n).expect("decoded letters are in range")
    }

    /// Index map of `S_α S_β*` on this factor: `e_{βσ} ↦ e_{ασ}`, with words
    /// that do not start with `β` or would exceed length `d` sent to `None`.
    pub fn left_map(&self, alpha: &Word, beta: &Word) -> Vec<Option<usize>> {
        let (la, ra) = (alpha.len(), alpha.lex_rank());
        let (lb, rb) = (beta.len(), beta.lex_rank());
        (0..self.dim())
            .map(|idx| {
                let (l, r) = self.decode(idx);
                if l < lb {
                    return None;
                }
                let tail = l - lb;
                if lb > 0 && r / self.pow[tail] != rb {
                    return None;
                }
                let sigma = r % self.pow[tail];
                let nl = la + tail;
                (nl <= self.d).then(|| self.encode(nl, ra * self.pow[tail] + sigma))
            })
            .collect()
    }

    /// Index map of the right creation operator `R_α`: `e_γ ↦ e_{γα}`.
    pub fn right_map(&self, alpha: &Word) -> Vec<Option<usize>> {
        let (la, ra) = (alpha.len(), alpha.lex_rank());
        (0..self.dim())
            .map(|idx| {
                let (l, r) = self.decode(idx);
                let nl = l + la;
                (nl <= self.d).then(|| self.encode(nl, r * self.pow[la] + ra))
            })
            .collect()
    }
}

/// Finite section of `F²(H_{n_1}) ⊗ ... ⊗ F²(H_{n_k})` keeping words of
/// length at most `d_i` in factor `i`.
///
/// Basis indices are factor-major: factor 1 is the most significant digit.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Truncation {
    factors: Vec<FactorSpace>,
    dim: usize,
}

impl Truncation {
    pub fn new(degrees: &[usize], alphabet_sizes: &[usize]) -> Result<Self> {
        Self::with_cap(degrees, alphabet_sizes, DEFAULT_DIMENSION_CAP)
    }

    pub fn with_cap(degrees: &[usize], alphabet_sizes: &[usize], cap: usize) -> Result<Self> {
        if degrees.len() != alphabet_sizes.len() {
            return Err(Error::AlphabetMismatch(format!(
                "{} degrees for {} factors",
                degrees.len(),
                alphabet_sizes.len()
            )));
        }
        if degrees.is_empty() {
            return Err(Error::InvalidParameter("a truncation needs at least one factor".into()));
        }
        if alphabet_sizes.contains(&0) {
            return Err(Error::InvalidParameter("alphabet sizes must be positive".into()));
        }
        let factors = degrees
            .iter()
            .zip(alphabet_sizes)
            .map(|(&d, &n)| FactorSpace::new(n, d, cap))
            .collect::<Result<Vec<_>>>()?;
        let dim = factors
            .iter()
            .try_fold(1usize, |acc, f| acc.checked_mul(f.dim()))
            .filter(|&v| v <= cap)
            .ok_or_else(|| Error::DimensionCap {
                requested: factors.iter().fold(1usize, |a, f| a.saturating_mul(f.dim())),
                cap,
            })?;
        Ok(Self { factors, dim })
    }

    /// Same degree `d` in every factor.
    pub fn uniform(d: usize, alphabet_sizes: &[usize]) -> Result<Self> {
        Self::new(&vec![d; alphabet_sizes.len()], alphabet_sizes)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn k(&self) -> usize {
        self.factors.len()
    }

    pub fn degrees(&self) -> Vec<usize> {
        self.factors.iter().map(|f| f.d).collect()
    }

    pub fn alphabet_sizes(&self) -> Vec<usize> {
        self.factors.iter().map(|f| f.n).collect()
    }

    pub fn factor_dims(&self) -> Vec<usize> {
        self.factors.iter().map(FactorSpace::dim).collect()
    }

    pub(crate) fn factor(&self, i: usize) -> &FactorSpace {
        &self.factors[i]
    }

    /// Splits a basis index into per-factor indices.
    pub fn split_index(&self, mut idx: usize) -> Vec<usize> {
        let mut out = vec![0; self.k()];
        for (slot, f) in out.iter_mut().zip(&self.factors).rev() {
            *slot = idx % f.dim();
            idx /= f.dim();
        }
        out
    }

    pub fn join_index(&self, parts: &[usize]) -> usize {
        parts.iter().zip(&self.factors).fold(0, |acc, (&p, f)| acc * f.dim() + p)
    }

    /// Word lengths `(|α_1|, ..., |α_k|)` of the basis vector at `idx`.
    pub fn multidegree_at(&self, idx: usize) -> Vec<usize> {
        self.split_index(idx)
            .iter()
            .zip(&self.factors)
            .map(|(&p, f)| f.decode(p).0)
            .collect()
    }

    pub fn index_of(&self, w: &MultiWord) -> Option<usize> {
        if w.k() != self.k() {
            return None;
        }
        let parts = w
            .parts()
            .iter()
            .zip(&self.factors)
            .map(|(p, f)| f.index_of(p))
            .collect::<Option<Vec<_>>>()?;
        Some(self.join_index(&parts))
    }

    pub fn word_at(&self, idx: usize) -> MultiWord {
        let parts = self.split_index(idx);
        MultiWord::new(parts.iter().zip(&self.factors).map(|(&p, f)| f.word_at(p)).collect())
    }

    /// The ordered basis `e_α` of the truncated space.
    pub fn basis(&self) -> Vec<MultiWord> {
        (0..self.dim).map(|i| self.word_at(i)).collect()
    }

    pub(crate) fn check_word(&self, w: &MultiWord) -> Result<()> {
        if w.alphabet_sizes() == self.alphabet_sizes() {
            Ok(())
        } else {
            Err(Error::AlphabetMismatch(format!(
                "word over {:?} used with a model over {:?}",
                w.alphabet_sizes(),
                self.alphabet_sizes()
            )))
        }
    }

    /// Combines per-factor index maps into a map on the full basis.
    pub(crate) fn tensor_map(&self, maps: &[Vec<Option<usize>>]) -> Vec<Option<usize>> {
        let mut full: Vec<Option<usize>> = vec![Some(0)];
        for (map, f) in maps.iter().zip(&self.factors) {
            let mut next = Vec::with_capacity(full.len() * f.dim());
            for prefix in &full {
                for target in map {
                    next.push(match (prefix, target) {
                        (Some(a), Some(b)) => Some(a * f.dim() + b),
                        _ => None,
                    });
                }
            }
            full = next;
        }
        full
    }

    /// Index map of `S_α S_β*` on the truncated basis.
    pub(crate) fn word_map(&self, alpha: &MultiWord, beta: &MultiWord) -> Vec<Option<usize>> {
        let maps: Vec<_> = self
            .factors
            .iter()
            .enumerate()
            .map(|(i, f)| f.left_map(alpha.part(i), beta.part(i)))
            .collect();
        self.tensor_map(&maps)
    }

    /// Basis indices whose word lengths satisfy `|α_i| ≤ limit_i`.
    pub fn indices_with_degrees_at_most(&self, limits: &[usize]) -> Vec<usize> {
        (0..self.dim)
            .filter(|&i| self.multidegree_at(i).iter().zip(limits).all(|(l, m)| l <= m))
            .collect()
    }

    fn creation(&self, factor: usize, letter: u32, right: bool) -> Result<ComplexMatrix> {
        let f = self.factors.get(factor).ok_or_else(|| {
            Error::InvalidParameter(format!("factor {factor} out of range for k = {}", self.k()))
        })?;
        let w = Word::letter(letter, f.n)?;
        let maps: Vec<_> = self
            .factors
            .iter()
            .enumerate()
            .map(|(i, g)| {
                if i != factor {
                    (0..g.dim()).map(Some).collect()
                } else if right {
                    g.right_map(&w)
                } else {
                    g.left_map(&w, &Word::identity(g.n))
                }
            })
            .collect();
        map_to_matrix(&self.tensor_map(&maps), C64::new(1.0, 0.0))
    }

    /// Compression of the left creation operator `S_{i,j}` (`factor` is
    /// 0-based, `letter` 1-based).
    pub fn left_creation(&self, factor: usize, letter: u32) -> Result<ComplexMatrix> {
        self.creation(factor, letter, false)
    }

    /// Compression of the right creation operator `R_{i,j}`.
    pub fn right_creation(&self, factor: usize, letter: u32) -> Result<ComplexMatrix> {
        self.creation(factor, letter, true)
    }

    /// Compression of `S_α = S_{1,α_1} ... S_{k,α_k}`.
    pub fn monomial(&self, alpha: &MultiWord) -> Result<ComplexMatrix> {
        self.check_word(alpha)?;
        let id = MultiWord::identity(&self.alphabet_sizes());
        map_to_matrix(&self.word_map(alpha, &id), C64::new(1.0, 0.0))
    }
}

pub(crate) fn map_to_matrix(map: &[Option<usize>], value: C64) -> Result<ComplexMatrix> {
    let t = map
        .iter()
        .enumerate()
        .filter_map(|(col, row)| row.map(|r| (r, col, value)))
        .collect();
    ComplexMatrix::from_triplets(map.len(), map.len(), t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::freewords::enumerate_gamma;

    fn one() -> C64 {
        C64::new(1.0, 0.0)
    }

    #[test]
    fn basis_examples() {
        let t = Truncation::new(&[2], &[1]).unwrap();
        let b: Vec<String> = t.basis().iter().map(|w| w.to_string()).collect();
        assert_eq!(b, vec!["(g0)", "(g1)", "(g1.g1)"]);
        let t = Truncation::new(&[1], &[2]).unwrap();
        let b: Vec<String> = t.basis().iter().map(|w| w.to_string()).collect();
        assert_eq!(b, vec!["(g0)", "(g1)", "(g2)"]);
        assert_eq!(Truncation::new(&[1, 1], &[1, 1]).unwrap().dim(), 4);
        assert_eq!(Truncation::new(&[3, 2], &[2, 3]).unwrap().factor_dims(), vec![15, 13]);
    }

    #[test]
    fn dimension_cap_is_enforced() {
        assert!(matches!(
            Truncation::with_cap(&[10, 10], &[2, 2], 1000),
            Err(Error::DimensionCap { .. })
        ));
        assert!(Truncation::new(&[40], &[3]).is_err());
    }

    #[test]
    fn index_lookup_is_a_bijection_in_graded_lex_order() {
        let t = Truncation::new(&[2, 1, 3], &[2, 3, 1]).unwrap();
        let basis = t.basis();
        for (i, w) in basis.iter().enumerate() {
            assert_eq!(t.index_of(w), Some(i));
        }
        for pair in basis.windows(2) {
            assert!(pair[0] < pair[1]);
        }
        // Cross-check against enumeration by total degree.
        let count: usize = (0..=6)
            .map(|q| {
                enumerate_gamma(q, &[2, 3, 1])
                    .unwrap()
                    .iter()
                    .filter(|w| t.index_of(w).is_some())
                    .count()
            })
            .sum();
        assert_eq!(count, t.dim());
    }

    #[test]
    fn single_letter_shift() {
        let t = Truncation::new(&[2], &[1]).unwrap();
        let s = t.left_creation(0, 1).unwrap().to_dense();
        let mut expect = nalgebra::DMatrix::zeros(3, 3);
        expect[(1, 0)] = one();
        expect[(2, 1)] = one();
        assert_eq!(s, expect);
        assert_eq!(t.right_creation(0, 1).unwrap().to_dense(), expect);
    }

    #[test]
    fn creation_columns_have_orthogonal_supports() {
        let t = Truncation::new(&[1], &[2]).unwrap();
        let s1 = t.left_creation(0, 1).unwrap();
        let s2 = t.left_creation(0, 2).unwrap();
        assert_eq!(s1.adjoint().matmul(&s2).unwrap().nnz(), 0);
        assert_eq!(s1.get(1, 0), one());
        assert_eq!(s2.get(2, 0), one());
    }

    #[test]
    fn right_creation_appends() {
        let t = Truncation::new(&[2], &[2]).unwrap();
        let r1 = t.right_creation(0, 1).unwrap();
        let g2 = t.index_of(&MultiWord::single(&[2], 0, 2).unwrap()).unwrap();
        let g2g1 = t
            .index_of(&MultiWord::from_letters(&[vec![2, 1]], &[2]).unwrap())
            .unwrap();
        assert_eq!(r1.get(g2g1, g2), one());
        assert_eq!(r1.row(g2g1).count(), 1);
    }

    #[test]
    fn isometry_and_commutation_on_interior() {
        let t = Truncation::new(&[3, 2], &[2, 2]).unwrap();
        let interior = t.indices_with_degrees_at_most(&[2, 1]);
        for i in 0..2 {
            for j in 1..=2u32 {
                let sj = t.left_creation(i, j).unwrap();
                for jp in 1..=2u32 {
                    let sjp = t.left_creation(i, jp).unwrap();
                    let g = sj.adjoint().matmul(&sjp).unwrap().principal_submatrix(&interior);
                    let expect = if j == jp {
                        ComplexMatrix::identity(interior.len())
                    } else {
                        ComplexMatrix::zeros(interior.len(), interior.len())
                    };
                    assert_eq!(g, expect);
                }
                let other = t.left_creation(1 - i, 1).unwrap();
                let c = sj.matmul(&other).unwrap().sub(&other.matmul(&sj).unwrap()).unwrap();
                assert_eq!(c.nnz(), 0);
            }
        }
        // Left and right creation commute away from the top two levels.
        let low = t.indices_with_degrees_at_most(&[1, 2]);
        for j in 1..=2u32 {
            for jp in 1..=2u32 {
                let s = t.left_creation(0, j).unwrap();
                let r = t.right_creation(0, jp).unwrap();
                let c = s.matmul(&r).unwrap().sub(&r.matmul(&s).unwrap()).unwrap();
                for &col in &low {
                    for (row, _) in c.triplets().filter(|&(_, cc, _)| cc == col).map(|(r, _, v)| (r, v)) {
                        panic!("commutator nonzero at ({row}, {col})");
                    }
                }
            }
        }
    }

    #[test]
    fn monomial_is_product_of_creations() {
        let n = [2, 1];
        let t = Truncation::new(&[3, 2], &n).unwrap();
        let alpha = MultiWord::from_letters(&[vec![2, 1], vec![1]], &n).unwrap();
        let direct = t.monomial(&alpha).unwrap();
        let prod = t
            .left_creation(0, 2)
            .unwrap()
            .matmul(&t.left_creation(0, 1).unwrap())
            .unwrap()
            .matmul(&t.left_creation(1, 1).unwrap())
            .unwrap();
        assert_eq!(direct, prod);
    }
}
