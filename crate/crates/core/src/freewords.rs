//! Words over free semigroups, multiwords over products of them, and the
//! set predicates (right/left minimal, orthogonal) used by the majorant
//! series.

use std::cmp::Ordering;
use std::collections::BTreeSet;
use std::fmt;

use crate::error::{Error, Result};

/// Default cap on the number of elements an enumeration may produce.
pub const DEFAULT_ENUMERATION_CAP: usize = 1_000_000;

/// A word `g_{j_1} ... g_{j_p}` in the unital free semigroup on `n` generators.
///
/// Letters are 1-based. The empty letter sequence is the identity `g_0`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Word {
    letters: Vec<u32>,
    n: usize,
}

impl Word {
    pub fn new(letters: Vec<u32>, n: usize) -> Result<Self> {
        if let Some(&bad) = letters.iter().find(|&&l| l == 0 || l as usize > n) {
            return Err(Error::LetterOutOfRange { letter: bad as usize, n });
        }
        Ok(Self { letters, n })
    }

    pub fn identity(n: usize) -> Self {
        Self { letters: Vec::new(), n }
    }

    /// The single-letter word `g_j`.
    pub fn letter(j: u32, n: usize) -> Result<Self> {
        Self::new(vec![j], n)
    }

    pub fn letters(&self) -> &[u32] {
        &self.letters
    }

    pub fn alphabet_size(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_identity(&self) -> bool {
        self.letters.is_empty()
    }

    /// Concatenation `self · other`.
    pub fn concat(&self, other: &Word) -> Result<Word> {
        check_alphabet(self.n, other.n)?;
        let mut letters = Vec::with_capacity(self.len() + other.len());
        letters.extend_from_slice(&self.letters);
        letters.extend_from_slice(&other.letters);
        Ok(Word { letters, n: self.n })
    }

    /// Rank among words of the same length in lexicographic order.
    pub(crate) fn lex_rank(&self) -> usize {
        self.letters
            .iter()
            .fold(0usize, |acc, &l| acc * self.n + (l as usize - 1))
    }
}

impl Ord for Word {
    /// Graded lexicographic: shorter words first, then lexicographic.
    fn cmp(&self, other: &Self) -> Ordering {
        self.n
            .cmp(&other.n)
            .then(self.len().cmp(&other.len()))
            .then_with(|| self.letters.cmp(&other.letters))
    }
}

impl PartialOrd for Word {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.letters.is_empty() {
            return write!(f, "g0");
        }
        let parts: Vec<String> = self.letters.iter().map(|l| format!("g{l}")).collect();
        write!(f, "{}", parts.join("."))
    }
}

fn check_alphabet(a: usize, b: usize) -> Result<()> {
    if a == b {
        Ok(())
    } else {
        Err(Error::AlphabetMismatch(format!("alphabet sizes {a} and {b}")))
    }
}

pub fn reverse(w: &Word) -> Word {
    let mut letters = w.letters.clone();
    letters.reverse();
    Word { letters, n: w.n }
}

/// Returns `Some(σ)` when `ω = σ·γ`, i.e. `γ ≤_r ω`.
pub fn right_divides(gamma: &Word, omega: &Word) -> Result<Option<Word>> {
    check_alphabet(gamma.n, omega.n)?;
    if omega.letters.ends_with(&gamma.letters) {
        let cut = omega.len() - gamma.len();
        Ok(Some(Word { letters: omega.letters[..cut].to_vec(), n: omega.n }))
    } else {
        Ok(None)
    }
}

/// Returns `Some(σ)` when `ω = γ·σ`, i.e. `γ ≤_l ω`.
pub fn left_divides(gamma: &Word, omega: &Word) -> Result<Option<Word>> {
    check_alphabet(gamma.n, omega.n)?;
    if omega.letters.starts_with(&gamma.letters) {
        Ok(Some(Word { letters: omega.letters[gamma.len()..].to_vec(), n: omega.n }))
    } else {
        Ok(None)
    }
}

/// A k-tuple of words, one per factor `F_{n_1}^+ × ... × F_{n_k}^+`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct MultiWord {
    parts: Vec<Word>,
}

impl MultiWord {
    pub fn new(parts: Vec<Word>) -> Self {
        Self { parts }
    }

    /// Builds a multiword from raw letter arrays, validating every letter.
    pub fn from_letters(letters: &[Vec<u32>], alphabet_sizes: &[usize]) -> Result<Self> {
        if letters.len() != alphabet_sizes.len() {
            return Err(Error::AlphabetMismatch(format!(
                "multiword has {} parts but there are {} factors",
                letters.len(),
                alphabet_sizes.len()
            )));
        }
        let parts = letters
            .iter()
            .zip(alphabet_sizes)
            .map(|(l, &n)| Word::new(l.clone(), n))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { parts })
    }

    /// The identity `g_0 = (g_0^1, ..., g_0^k)`.
    pub fn identity(alphabet_sizes: &[usize]) -> Self {
        Self { parts: alphabet_sizes.iter().map(|&n| Word::identity(n)).collect() }
    }

    /// The word `g_j^i` placed in factor `i` (0-based), identity elsewhere.
    pub fn single(alphabet_sizes: &[usize], factor: usize, letter: u32) -> Result<Self> {
        let mut w = Self::identity(alphabet_sizes);
        let n = *alphabet_sizes
            .get(factor)
            .ok_or_else(|| Error::InvalidParameter(format!("factor {factor} out of range")))?;
        w.parts[factor] = Word::letter(letter, n)?;
        Ok(w)
    }

    pub fn parts(&self) -> &[Word] {
        &self.parts
    }

    pub fn part(&self, i: usize) -> &Word {
        &self.parts[i]
    }

    pub fn k(&self) -> usize {
        self.parts.len()
    }

    pub fn alphabet_sizes(&self) -> Vec<usize> {
        self.parts.iter().map(|w| w.n).collect()
    }

    pub fn total_degree(&self) -> usize {
        self.parts.iter().map(Word::len).sum()
    }

    /// The multidegree `(|α_1|, ..., |α_k|)`.
    pub fn multidegree(&self) -> Vec<usize> {
        self.parts.iter().map(Word::len).collect()
    }

    pub fn is_identity(&self) -> bool {
        self.parts.iter().all(Word::is_identity)
    }

    /// Factorwise concatenation `(α_1 β_1, ..., α_k β_k)`.
    pub fn concat(&self, other: &MultiWord) -> Result<MultiWord> {
        self.check_same_shape(other)?;
        let parts = self
            .parts
            .iter()
            .zip(&other.parts)
            .map(|(a, b)| a.concat(b))
            .collect::<Result<Vec<_>>>()?;
        Ok(MultiWord { parts })
    }

    pub fn reverse(&self) -> MultiWord {
        MultiWord { parts: self.parts.iter().map(reverse).collect() }
    }

    pub(crate) fn check_same_shape(&self, other: &MultiWord) -> Result<()> {
        if self.alphabet_sizes() == other.alphabet_sizes() {
            Ok(())
        } else {
            Err(Error::AlphabetMismatch(format!(
                "alphabet sizes {:?} and {:?}",
                self.alphabet_sizes(),
                other.alphabet_sizes()
            )))
        }
    }
}

impl Ord for MultiWord {
    fn cmp(&self, other: &Self) -> Ordering {
        self.parts.cmp(&other.parts)
    }
}

impl PartialOrd for MultiWord {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for MultiWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.parts.iter().map(|w| w.to_string()).collect();
        write!(f, "({})", parts.join(", "))
    }
}

/// Componentwise right order: `β ≤_r γ` iff `β_i ≤_r γ_i` for every `i`.
pub fn multiword_right_leq(beta: &MultiWord, gamma: &MultiWord) -> Result<bool> {
    beta.check_same_shape(gamma)?;
    for (b, g) in beta.parts.iter().zip(&gamma.parts) {
        if right_divides(b, g)?.is_none() {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Componentwise left order.
pub fn multiword_left_leq(beta: &MultiWord, gamma: &MultiWord) -> Result<bool> {
    beta.check_same_shape(gamma)?;
    for (b, g) in beta.parts.iter().zip(&gamma.parts) {
        if left_divides(b, g)?.is_none() {
            return Ok(false);
        }
    }
    Ok(true)
}

/// A finite set of multiwords over a common product of alphabets.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WordSet {
    alphabet_sizes: Vec<usize>,
    elements: BTreeSet<MultiWord>,
}

impl WordSet {
    pub fn new(alphabet_sizes: &[usize]) -> Self {
        Self { alphabet_sizes: alphabet_sizes.to_vec(), elements: BTreeSet::new() }
    }

    pub fn from_elements(
        alphabet_sizes: &[usize],
        elements: impl IntoIterator<Item = MultiWord>,
    ) -> Result<Self> {
        let mut set = Self::new(alphabet_sizes);
        for e in elements {
            set.insert(e)?;
        }
        Ok(set)
    }

    /// Inserts an element; returns whether it was new.
    pub fn insert(&mut self, w: MultiWord) -> Result<bool> {
        if w.alphabet_sizes() != self.alphabet_sizes {
            return Err(Error::AlphabetMismatch(format!(
                "element over {:?} inserted into a set over {:?}",
                w.alphabet_sizes(),
                self.alphabet_sizes
            )));
        }
        Ok(self.elements.insert(w))
    }

    pub fn alphabet_sizes(&self) -> &[usize] {
        &self.alphabet_sizes
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn contains(&self, w: &MultiWord) -> bool {
        self.elements.contains(w)
    }

    /// Elements in graded-lex order.
    pub fn iter(&self) -> impl Iterator<Item = &MultiWord> {
        self.elements.iter()
    }

    pub fn reversed(&self) -> WordSet {
        WordSet {
            alphabet_sizes: self.alphabet_sizes.clone(),
            elements: self.elements.iter().map(MultiWord::reverse).collect(),
        }
    }
}

impl<'a> IntoIterator for &'a WordSet {
    type Item = &'a MultiWord;
    type IntoIter = std::collections::btree_set::Iter<'a, MultiWord>;

    fn into_iter(self) -> Self::IntoIter {
        self.elements.iter()
    }
}

fn no_comparable_pair(set: &WordSet, leq: fn(&MultiWord, &MultiWord) -> Result<bool>) -> bool {
    let elems: Vec<&MultiWord> = set.iter().collect();
    for (a, x) in elems.iter().enumerate() {
        for y in &elems[a + 1..] {
            // Elements share one shape, so the order relation cannot fail.
            if leq(x, y).unwrap_or(false) || leq(y, x).unwrap_or(false) {
                return false;
            }
        }
    }
    true
}

/// True iff no two distinct elements are comparable in the right order.
pub fn is_right_minimal(set: &WordSet) -> bool {
    no_comparable_pair(set, multiword_right_leq)
}

/// True iff no two distinct elements are comparable in the left order.
pub fn is_left_minimal(set: &WordSet) -> bool {
    no_comparable_pair(set, multiword_left_leq)
}

fn prefix_comparable(a: &Word, b: &Word) -> bool {
    a.letters.starts_with(&b.letters) || b.letters.starts_with(&a.letters)
}

/// True iff the ranges of `S_α`, `α ∈ Λ`, are pairwise orthogonal.
///
/// `S_β* S_α` factors over the tensor slots and vanishes exactly when some
/// slot has `α_i`, `β_i` with neither a left divisor of the other. Such a
/// slot has `α_i ≠ g_0` and `β_i` not a left divisor of `α_i`.
pub fn is_orthogonal(set: &WordSet) -> bool {
    let elems: Vec<&MultiWord> = set.iter().collect();
    for (a, x) in elems.iter().enumerate() {
        for y in &elems[a + 1..] {
            let separated = x
                .parts
                .iter()
                .zip(&y.parts)
                .any(|(p, q)| !prefix_comparable(p, q));
            if !separated {
                return false;
            }
        }
    }
    true
}

/// All words of length exactly `len` over `n` letters, in lex order.
pub fn words_of_length(n: usize, len: usize) -> Vec<Word> {
    let count = n.checked_pow(len as u32).unwrap_or(usize::MAX);
    let mut out = Vec::with_capacity(count.min(1 << 20));
    if n == 0 {
        if len == 0 {
            out.push(Word::identity(0));
        }
        return out;
    }
    let mut letters = vec![1u32; len];
    loop {
        out.push(Word { letters: letters.clone(), n });
        // Odometer increment from the last position.
        let mut pos = len;
        loop {
            if pos == 0 {
                return out;
            }
            pos -= 1;
            if (letters[pos] as usize) < n {
                letters[pos] += 1;
                break;
            }
            letters[pos] = 1;
        }
    }
}

fn product_count(factors: impl IntoIterator<Item = usize>) -> Option<usize> {
    factors.into_iter().try_fold(1usize, |acc, c| acc.checked_mul(c))
}

fn cartesian(per_factor: &[Vec<Word>], out: &mut Vec<MultiWord>) {
    let k = per_factor.len();
    if per_factor.iter().any(Vec::is_empty) {
        return;
    }
    let mut idx = vec![0usize; k];
    loop {
        out.push(MultiWord {
            parts: idx.iter().zip(per_factor).map(|(&j, ws)| ws[j].clone()).collect(),
        });
        let mut pos = k;
        loop {
            if pos == 0 {
                return;
            }
            pos -= 1;
            idx[pos] += 1;
            if idx[pos] < per_factor[pos].len() {
                break;
            }
            idx[pos] = 0;
        }
    }
}

/// `Λ_p`: all multiwords with `|α_i| = p_i`, capped at `cap` elements.
pub fn enumerate_lambda_capped(p: &[usize], n: &[usize], cap: usize) -> Result<WordSet> {
    if p.len() != n.len() {
        return Err(Error::AlphabetMismatch(format!(
            "multidegree has {} entries for {} factors",
            p.len(),
            n.len()
        )));
    }
    let count = product_count(p.iter().zip(n).map(|(&pi, &ni)| {
        ni.checked_pow(pi as u32).unwrap_or(usize::MAX)
    }))
    .unwrap_or(usize::MAX);
    if count > cap {
        return Err(Error::CardinalityCap { requested: count, cap });
    }
    let per_factor: Vec<Vec<Word>> =
        p.iter().zip(n).map(|(&pi, &ni)| words_of_length(ni, pi)).collect();
    let mut out = Vec::with_capacity(count);
    cartesian(&per_factor, &mut out);
    Ok(WordSet { alphabet_sizes: n.to_vec(), elements: out.into_iter().collect() })
}

pub fn enumerate_lambda(p: &[usize], n: &[usize]) -> Result<WordSet> {
    enumerate_lambda_capped(p, n, DEFAULT_ENUMERATION_CAP)
}

/// All multidegrees `p` with `Σ p_i = q`, in lexicographic order.
pub fn compositions(q: usize, k: usize) -> Vec<Vec<usize>> {
    fn rec(q: usize, k: usize, prefix: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if k == 1 {
            prefix.push(q);
            out.push(prefix.clone());
            prefix.pop();
            return;
        }
        for first in 0..=q {
            prefix.push(first);
            rec(q - first, k - 1, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    if k == 0 {
        if q == 0 {
            out.push(Vec::new());
        }
        return out;
    }
    rec(q, k, &mut Vec::with_capacity(k), &mut out);
    out
}

/// All multidegrees `p` with `p_i ≤ bounds_i`, in lexicographic order.
pub fn multidegrees_up_to(bounds: &[usize]) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new()];
    for &b in bounds {
        out = out
            .into_iter()
            .flat_map(|prefix| {
                (0..=b).map(move |v| {
                    let mut p = prefix.clone();
                    p.push(v);
                    p
                })
            })
            .collect();
    }
    out
}

/// `Γ_q`: all multiwords of total degree `q`, capped at `cap` elements.
pub fn enumerate_gamma_capped(q: usize, n: &[usize], cap: usize) -> Result<WordSet> {
    let mut set = WordSet::new(n);
    let mut total = 0usize;
    for p in compositions(q, n.len()) {
        let block = enumerate_lambda_capped(&p, n, cap.saturating_sub(total))?;
        total += block.len();
        set.elements.extend(block.elements);
    }
    Ok(set)
}

pub fn enumerate_gamma(q: usize, n: &[usize]) -> Result<WordSet> {
    enumerate_gamma_capped(q, n, DEFAULT_ENUMERATION_CAP)
}
