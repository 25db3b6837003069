use num_complex::Complex64;

use crate::defaults::STRUCTURAL_TOL;
use crate::error::{Error, Result};
use crate::linalg::ComplexMatrix;

/// Square complex matrix equal to its conjugate transpose.
///
/// The constructor checks the symmetry entrywise (tolerance
/// `STRUCTURAL_TOL` relative to the largest entry) and then symmetrizes
/// exactly, so every stored value satisfies `h[r][c] == conj(h[c][r])`
/// bit-for-bit and the diagonal is real.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianMatrix {
    dim: usize,
    entries: Vec<Complex64>,
}

impl HermitianMatrix {
    pub fn new(m: &ComplexMatrix) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::NotHermitian(format!("{}x{} is not square", m.rows(), m.cols())));
        }
        let dim = m.rows();
        let scale = m.max_abs().max(1.0);
        for r in 0..dim {
            for c in r..dim {
                let dev = (m.get(r, c) - m.get(c, r).conj()).norm();
                if dev > STRUCTURAL_TOL * scale {
                    return Err(Error::NotHermitian(format!(
                        "entry ({r},{c}) deviates from conjugate transpose by {dev:.3e}"
                    )));
                }
            }
        }
        let mut entries = vec![Complex64::new(0.0, 0.0); dim * dim];
        for r in 0..dim {
            entries[r * dim + r] = Complex64::new(m.get(r, r).re, 0.0);
            for c in (r + 1)..dim {
                let v = (m.get(r, c) + m.get(c, r).conj()) * 0.5;
                entries[r * dim + c] = v;
                entries[c * dim + r] = v.conj();
            }
        }
        Ok(Self { dim, entries })
    }

    /// Builds from real diagonal and upper-triangular entries without a
    /// tolerance check (the result is Hermitian by construction).
    pub fn from_upper(dim: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut entries = vec![Complex64::new(0.0, 0.0); dim * dim];
        for r in 0..dim {
            entries[r * dim + r] = Complex64::new(f(r, r).re, 0.0);
            for c in (r + 1)..dim {
                let v = f(r, c);
                entries[r * dim + c] = v;
                entries[c * dim + r] = v.conj();
            }
        }
        Self { dim, entries }
    }

    pub fn zeros(dim: usize) -> Self {
        Self { dim, entries: vec![Complex64::new(0.0, 0.0); dim * dim] }
    }

    pub fn identity(dim: usize) -> Self {
        Self::from_upper(dim, |r, c| {
            if r == c { Complex64::new(1.0, 0.0) } else { Complex64::new(0.0, 0.0) }
        })
    }

    pub fn diagonal(values: &[f64]) -> Self {
        let dim = values.len();
        Self::from_upper(dim, |r, c| {
            if r == c { Complex64::new(values[r], 0.0) } else { Complex64::new(0.0, 0.0) }
        })
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> Complex64 {
        self.entries[r * self.dim + c]
    }

    pub fn to_matrix(&self) -> ComplexMatrix {
        ComplexMatrix::new(self.dim, self.dim, self.entries.clone()).expect("valid by construction")
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.dim != other.dim {
            return Err(Error::ShapeMismatch(format!("add: dim {} vs {}", self.dim, other.dim)));
        }
        let entries = self.entries.iter().zip(&other.entries).map(|(a, b)| a + b).collect();
        Ok(Self { dim: self.dim, entries })
    }

    pub fn scale(&self, s: f64) -> Self {
        Self { dim: self.dim, entries: self.entries.iter().map(|z| z * s).collect() }
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.entries.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim).map(|i| self.get(i, i).re).sum()
    }

    pub fn matvec(&self, x: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(x.len(), self.dim);
        let mut out = vec![Complex64::new(0.0, 0.0); self.dim];
        for r in 0..self.dim {
            let mut acc = Complex64::new(0.0, 0.0);
            for c in 0..self.dim {
                acc += self.get(r, c) * x[c];
            }
            out[r] = acc;
        }
        out
    }

    /// Real quadratic form `<Hv, v>` (v need not be normalized).
    pub fn quadratic_form(&self, v: &[Complex64]) -> f64 {
        let hv = self.matvec(v);
        hv.iter().zip(v).map(|(a, b)| (a * b.conj()).re).sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn rejects_non_hermitian() {
        let m = ComplexMatrix::from_rows(&[
            vec![c(1.0, 0.0), c(2.0, 0.0)],
            vec![c(0.0, 0.0), c(1.0, 0.0)],
        ])
        .unwrap();
        assert!(matches!(HermitianMatrix::new(&m), Err(Error::NotHermitian(_))));
    }

    #[test]
    fn symmetrizes_within_tolerance() {
        let eps = 1e-14;
        let m = ComplexMatrix::from_rows(&[
            vec![c(1.0, eps), c(0.5, 0.25)],
            vec![c(0.5, -0.25 + eps), c(-2.0, 0.0)],
        ])
        .unwrap();
        let h = HermitianMatrix::new(&m).unwrap();
        assert_eq!(h.get(0, 0).im, 0.0);
        assert_eq!(h.get(0, 1), h.get(1, 0).conj());
    }
}
