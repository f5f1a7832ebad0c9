//! JSON polynomial files:
//!
//! ```json
//! {"n": [2, 1], "m": 1,
//!  "terms": [{"word": [[1, 2], []], "coeff": [[[0.5, 0.0]]]}]}
//! ```
//!
//! Words are arrays of 1-based letters per factor; `coeff` is an `m×m`
//! row-major array of `[re, im]` pairs. Pluriharmonic files carry the
//! adjoint word of each term under `"coword"`.

use std::path::Path;

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use super::polynomial::{FreePolynomial, KPluriharmonic};
use crate::error::{Error, Result};
use crate::freewords::MultiWord;

#[derive(Debug, Serialize, Deserialize)]
struct TermRecord {
    word: Vec<Vec<u32>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    coword: Option<Vec<Vec<u32>>>,
    coeff: Vec<Vec<[f64; 2]>>,
}

#[derive(Debug, Serialize, Deserialize)]
struct PolynomialRecord {
    n: Vec<usize>,
    m: usize,
    terms: Vec<TermRecord>,
}

fn coeff_from_record(rows: &[Vec<[f64; 2]>], m: usize) -> Result<DMatrix<C64>> {
    if rows.len() != m || rows.iter().any(|r| r.len() != m) {
        return Err(Error::Format(format!("coefficient is not {m}x{m}")));
    }
    Ok(DMatrix::from_fn(m, m, |r, c| C64::new(rows[r][c][0], rows[r][c][1])))
}

fn coeff_to_record(a: &DMatrix<C64>) -> Vec<Vec<[f64; 2]>> {
    (0..a.nrows())
        .map(|r| (0..a.ncols()).map(|c| [a[(r, c)].re, a[(r, c)].im]).collect())
        .collect()
}

fn word_to_record(w: &MultiWord) -> Vec<Vec<u32>> {
    w.parts().iter().map(|p| p.letters().to_vec()).collect()
}

pub fn polynomial_from_json(text: &str) -> Result<FreePolynomial> {
    let rec: PolynomialRecord = serde_json::from_str(text)?;
    let mut f = FreePolynomial::new(&rec.n, rec.m)?;
    for t in rec.terms {
        if t.coword.is_some() {
            return Err(Error::Format("holomorphic polynomial term carries a coword".into()));
        }
        let w = MultiWord::from_letters(&t.word, &rec.n)?;
        f.add_term(w, coeff_from_record(&t.coeff, rec.m)?)?;
    }
    Ok(f)
}

pub fn polynomial_to_json(f: &FreePolynomial) -> String {
    let rec = PolynomialRecord {
        n: f.alphabet_sizes().to_vec(),
        m: f.coeff_dim(),
        terms: f
            .terms()
            .map(|(w, a)| TermRecord { word: word_to_record(w), coword: None, coeff: coeff_to_record(a) })
            .collect(),
    };
    serde_json::to_string_pretty(&rec).expect("polynomial records serialize")
}

pub fn pluriharmonic_from_json(text: &str) -> Result<KPluriharmonic> {
    let rec: PolynomialRecord = serde_json::from_str(text)?;
    let mut f = KPluriharmonic::new(&rec.n, rec.m)?;
    for t in rec.terms {
        let a = MultiWord::from_letters(&t.word, &rec.n)?;
        let b = match &t.coword {
            Some(cw) => MultiWord::from_letters(cw, &rec.n)?,
            None => MultiWord::identity(&rec.n),
        };
        f.add_term(a, b, coeff_from_record(&t.coeff, rec.m)?)?;
    }
    Ok(f)
}

pub fn pluriharmonic_to_json(f: &KPluriharmonic) -> String {
    let rec = PolynomialRecord {
        n: f.alphabet_sizes().to_vec(),
        m: f.coeff_dim(),
        terms: f
            .terms()
            .map(|((a, b), c)| TermRecord {
                word: word_to_record(a),
                coword: Some(word_to_record(b)),
                coeff: coeff_to_record(c),
            })
            .collect(),
    };
    serde_json::to_string_pretty(&rec).expect("pluriharmonic records serialize")
}

pub fn read_polynomial(path: impl AsRef<Path>) -> Result<FreePolynomial> {
    polynomial_from_json(&std::fs::read_to_string(path)?)
}

pub fn write_polynomial(path: impl AsRef<Path>, f: &FreePolynomial) -> Result<()> {
    std::fs::write(path, polynomial_to_json(f))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let text = r#"{"n": [2, 1], "m": 2, "terms": [
            {"word": [[], []], "coeff": [[[1, 0], [0, 0]], [[0, 0], [0.5, -0.5]]]},
            {"word": [[1, 2], [1]], "coeff": [[[0.25, 0], [0, 1]], [[0, 0], [0, 0]]]}
        ]}"#;
        let f = polynomial_from_json(text).unwrap();
        assert_eq!(f.num_terms(), 2);
        assert_eq!(f.degree(), 3);
        let g = polynomial_from_json(&polynomial_to_json(&f)).unwrap();
        assert_eq!(f, g);
    }

    #[test]
    fn pluriharmonic_round_trip() {
        let text = r#"{"n": [1], "m": 1, "terms": [
            {"word": [[1]], "coword": [[]], "coeff": [[[1, 0]]]},
            {"word": [[]], "coword": [[1]], "coeff": [[[1, 0]]]}
        ]}"#;
        let f = pluriharmonic_from_json(text).unwrap();
        assert_eq!(f.num_terms(), 2);
        assert_eq!(pluriharmonic_from_json(&pluriharmonic_to_json(&f)).unwrap(), f);
    }

    #[test]
    fn malformed_files_are_rejected() {
        assert!(polynomial_from_json(r#"{"n": [1], "m": 1, "terms": [{"word": [[2]], "coeff": [[[1, 0]]]}]}"#).is_err());
        assert!(polynomial_from_json(r#"{"n": [1], "m": 2, "terms": [{"word": [[1]], "coeff": [[[1, 0]]]}]}"#).is_err());
        assert!(polynomial_from_json(r#"{"n": [1, 1], "m": 1, "terms": [{"word": [[1]], "coeff": [[[1, 0]]]}]}"#).is_err());
        assert!(polynomial_from_json("not json").is_err());
    }
}
