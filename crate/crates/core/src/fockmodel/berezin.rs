use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

use super::matrix::ComplexMatrix;
use super::truncation::Truncation;
use crate::error::{Error, Result};

/// Largest factor dimension a kernel will materialize.
pub const KERNEL_FACTOR_CAP: usize = 1 << 24;

/// Truncated Berezin kernel `K_z = Δ^{1/2} Σ_β conj(z)_β e_β` at a scalar
/// point of the polyball, stored as a tensor product of per-factor vectors.
#[derive(Clone, Debug)]
pub struct BerezinKernel {
    trunc: Truncation,
    delta: f64,
    factors: Vec<Vec<C64>>,
    conj_point: Vec<Vec<C64>>,
    tail_bound: f64,
}

fn kahan_sum(values: impl Iterator<Item = f64>) -> f64 {
    let (mut sum, mut comp) = (0.0f64, 0.0f64);
    for v in values {
        let y = v - comp;
        let t = sum + y;
        comp = (t - sum) - y;
        sum = t;
    }
    sum
}

/// Builds the kernel at `z = (z_{i,j})`, one row per factor.
///
/// Requires `‖z_i‖₂ < 1` for every factor. The reported tail bound is the
/// squared norm of the discarded part, `1 − Π_i (1 − ‖z_i‖^{2(d_i+1)})`,
/// plus a floating-point allowance.
pub fn berezin_kernel(z: &[Vec<C64>], trunc: &Truncation) -> Result<BerezinKernel> {
    let sizes = trunc.alphabet_sizes();
    if z.len() != sizes.len() || z.iter().zip(&sizes).any(|(row, &n)| row.len() != n) {
        return Err(Error::AlphabetMismatch(format!(
            "point shape {:?} does not match alphabet sizes {sizes:?}",
            z.iter().map(Vec::len).collect::<Vec<_>>()
        )));
    }
    let mut delta = 1.0;
    let mut log_keep = 0.0;
    let mut factors = Vec::with_capacity(z.len());
    for (i, row) in z.iter().enumerate() {
        if row.iter().any(|v| !(v.re.is_finite() && v.im.is_finite())) {
            return Err(Error::NonFinite(format!("point row {i}")));
        }
        let s: f64 = row.iter().map(|v| v.norm_sqr()).sum();
        if s >= 1.0 {
            return Err(Error::OutsideDomain(format!("row {i} has squared norm {s} >= 1")));
        }
        delta *= 1.0 - s;
        let f = trunc.factor(i);
        log_keep += (-s.powi(f.d as i32 + 1)).ln_1p();
        if f.dim() > KERNEL_FACTOR_CAP {
            return Err(Error::DimensionCap { requested: f.dim(), cap: KERNEL_FACTOR_CAP });
        }
        let conj: Vec<C64> = row.iter().map(|v| v.conj()).collect();
        let mut v = vec![C64::new(0.0, 0.0); f.dim()];
        v[0] = C64::new(1.0, 0.0);
        for len in 1..=f.d {
            for rank in 0..f.pow[len] {
                let parent = v[f.encode(len - 1, rank / f.n)];
                v[f.encode(len, rank)] = parent * conj[rank % f.n];
            }
        }
        factors.push(v);
    }
    let largest = factors.iter().map(Vec::len).max().unwrap_or(1) as f64;
    let allowance = 8.0 * f64::EPSILON * (largest.log2() + z.len() as f64 + 4.0);
    let tail_bound = -log_keep.exp_m1() + allowance;
    let conj_point = z.iter().map(|row| row.iter().map(|v| v.conj()).collect()).collect();
    Ok(BerezinKernel { trunc: trunc.clone(), delta, factors, conj_point, tail_bound })
}

impl BerezinKernel {
    pub fn truncation(&self) -> &Truncation {
        &self.trunc
    }

    /// `Δ_z(1) = Π_i (1 − ‖z_i‖²)`.
    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn tail_bound(&self) -> f64 {
        self.tail_bound
    }

    /// Per-factor vectors `(conj(z_i)_β)_β`; the kernel is `Δ^{1/2}` times
    /// their tensor product.
    pub fn factor_vectors(&self) -> &[Vec<C64>] {
        &self.factors
    }

    /// `‖K_z‖² = K_z* K_z`, summed per factor with compensated summation.
    pub fn norm_sqr(&self) -> f64 {
        self.delta
            * self
                .factors
                .iter()
                .map(|v| kahan_sum(v.iter().map(|x| x.norm_sqr())))
                .product::<f64>()
    }

    /// `|K_z* K_z − 1|`.
    pub fn isometry_defect(&self) -> f64 {
        (self.norm_sqr() - 1.0).abs()
    }

    /// Entry of the kernel vector at a basis index.
    pub fn entry(&self, idx: usize) -> C64 {
        let parts = self.trunc.split_index(idx);
        parts
            .iter()
            .zip(&self.factors)
            .fold(C64::new(self.delta.sqrt(), 0.0), |acc, (&p, v)| acc * v[p])
    }

    /// The kernel as a dense vector (requires a materializable dimension).
    pub fn to_vector(&self, cap: usize) -> Result<Vec<C64>> {
        let dim = self.trunc.dim();
        if dim > cap {
            return Err(Error::DimensionCap { requested: dim, cap });
        }
        let mut out = vec![C64::new(self.delta.sqrt(), 0.0)];
        for v in &self.factors {
            out = out.iter().flat_map(|&a| v.iter().map(move |&b| a * b)).collect();
        }
        Ok(out)
    }

    /// `‖(S_{i,j}* ⊗ I) K_z − conj(z_{i,j}) K_z‖` with `factor` 0-based and
    /// `letter` 1-based. Only the top level of factor `i` contributes.
    pub fn intertwining_defect(&self, factor: usize, letter: u32) -> Result<f64> {
        let f = self
            .trunc
            .alphabet_sizes()
            .get(factor)
            .copied()
            .ok_or_else(|| Error::InvalidParameter(format!("factor {factor} out of range")))?;
        if letter == 0 || letter as usize > f {
            return Err(Error::LetterOutOfRange { letter: letter as usize, n: f });
        }
        let space = self.trunc.factor(factor);
        let v = &self.factors[factor];
        let c = self.conj_point[factor][letter as usize - 1];
        let mut diff_sq = 0.0;
        for idx in 0..space.dim() {
            let (len, rank) = space.decode(idx);
            let shifted = if len < space.d {
                v[space.encode(len + 1, (letter as usize - 1) * space.pow[len] + rank)]
            } else {
                C64::new(0.0, 0.0)
            };
            diff_sq += (shifted - c * v[idx]).norm_sqr();
        }
        let others: f64 = self
            .factors
            .iter()
            .enumerate()
            .filter(|(i, _)| *i != factor)
            .map(|(_, v)| v.iter().map(|x| x.norm_sqr()).sum::<f64>())
            .product();
        Ok((self.delta * diff_sq * others).sqrt())
    }

    /// `[⟨T (e_b ⊗ K_z), e_a ⊗ K_z⟩]_{a,b}` for an `(m·dim)`-square `T`.
    pub fn transform(&self, t: &ComplexMatrix, cap: usize) -> Result<DMatrix<C64>> {
        let dim = self.trunc.dim();
        if !t.is_square() || t.rows() % dim != 0 {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} operator on a model of dimension {dim}",
                t.rows(),
                t.cols()
            )));
        }
        let m = t.rows() / dim;
        let k = self.to_vector(cap)?;
        let mut out = DMatrix::zeros(m, m);
        let mut x = vec![C64::new(0.0, 0.0); m * dim];
        for b in 0..m {
            x.iter_mut().for_each(|v| *v = C64::new(0.0, 0.0));
            x[b * dim..(b + 1) * dim].copy_from_slice(&k);
            let y = t.matvec(&x);
            for a in 0..m {
                out[(a, b)] = y[a * dim..(a + 1) * dim]
                    .iter()
                    .zip(&k)
                    .map(|(yv, kv)| kv.conj() * yv)
                    .sum();
            }
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fockmodel::polynomial::{assemble, evaluate_scalar, FreePolynomial, Scaling};
    use crate::freewords::MultiWord;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn origin_gives_vacuum() {
        let t = Truncation::new(&[2, 1], &[2, 1]).unwrap();
        let k = berezin_kernel(&[vec![c(0.0, 0.0); 2], vec![c(0.0, 0.0)]], &t).unwrap();
        assert_eq!(k.delta(), 1.0);
        let v = k.to_vector(1000).unwrap();
        assert_eq!(v[0], c(1.0, 0.0));
        assert!(v[1..].iter().all(|x| *x == c(0.0, 0.0)));
        assert_eq!(k.isometry_defect(), 0.0);
    }

    #[test]
    fn single_variable_geometric_norm() {
        let r: f64 = 0.6;
        for d in [0usize, 3, 10, 40] {
            let t = Truncation::new(&[d], &[1]).unwrap();
            let k = berezin_kernel(&[vec![c(r, 0.0)]], &t).unwrap();
            let expect = (1.0 - r * r) * (0..=d).map(|m| r.powi(2 * m as i32)).sum::<f64>();
            assert!((k.norm_sqr() - expect).abs() < 1e-14);
            assert!(k.isometry_defect() <= k.tail_bound());
        }
    }

    #[test]
    fn rejects_boundary_points() {
        let t = Truncation::new(&[2], &[2]).unwrap();
        assert!(matches!(
            berezin_kernel(&[vec![c(0.6, 0.0), c(0.0, 0.8)]], &t),
            Err(Error::OutsideDomain(_))
        ));
    }

    #[test]
    fn intertwining_within_tail() {
        let n = [2, 1];
        let t = Truncation::new(&[6, 8], &n).unwrap();
        let z = vec![vec![c(0.3, 0.2), c(-0.1, 0.4)], vec![c(0.5, -0.3)]];
        let k = berezin_kernel(&z, &t).unwrap();
        for (i, &ni) in n.iter().enumerate() {
            for j in 1..=ni as u32 {
                let d = k.intertwining_defect(i, j).unwrap();
                assert!(d * d <= k.tail_bound(), "factor {i} letter {j}: {d}");
                // Dense cross-check of the same quantity.
                let s = t.left_creation(i, j).unwrap();
                let v = k.to_vector(10_000).unwrap();
                let sv = s.adjoint_matvec(&v);
                let cz = z[i][j as usize - 1].conj();
                let dense: f64 = sv.iter().zip(&v).map(|(a, b)| (a - cz * b).norm_sqr()).sum::<f64>().sqrt();
                assert!((dense - d).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn transform_evaluates_polynomials() {
        let n = [2, 1];
        let mut f = FreePolynomial::new(&n, 1).unwrap();
        f.add_scalar_term(MultiWord::identity(&n), c(0.2, 0.1)).unwrap();
        f.add_scalar_term(MultiWord::from_letters(&[vec![1, 2], vec![]], &n).unwrap(), c(-0.7, 0.0)).unwrap();
        f.add_scalar_term(MultiWord::from_letters(&[vec![2], vec![1]], &n).unwrap(), c(0.0, 0.5)).unwrap();
        let z = vec![vec![c(0.2, 0.1), c(-0.3, 0.2)], vec![c(0.4, 0.0)]];
        let t = Truncation::new(&[14, 14], &n).unwrap();
        let k = berezin_kernel(&z, &t).unwrap();
        let a = assemble(&f, &Scaling::one(), &t).unwrap();
        let got = k.transform(&a, 1_000_000).unwrap()[(0, 0)];
        let expect = evaluate_scalar(&f, &z).unwrap()[(0, 0)];
        assert!((got - expect).norm() < 1e-6, "{got} vs {expect}");
    }
}
