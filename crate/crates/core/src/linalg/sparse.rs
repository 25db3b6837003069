use std::collections::HashMap;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::defaults::STRUCTURAL_TOL;
use crate::error::{Error, Result};
use crate::linalg::{ComplexMatrix, HermitianMatrix};

/// Row dimension above which matvec fans out across the rayon pool.
const PAR_MATVEC_THRESHOLD: usize = 8192;

/// Sparse square operator in coalesced triplet form with a CSR index.
///
/// When the `hermitian` flag is set the triplet set must be closed under
/// `(i, j, v) -> (j, i, conj v)`; the constructor verifies this.
#[derive(Debug, Clone)]
pub struct SparseOperator {
    dim: usize,
    hermitian: bool,
    row_start: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<Complex64>,
}

impl SparseOperator {
    pub fn new(dim: usize, triplets: Vec<(usize, usize, Complex64)>, hermitian: bool) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidArgument("sparse operator dimension must be positive".into()));
        }
        let mut coalesced: HashMap<(usize, usize), Complex64> = HashMap::new();
        for (r, c, v) in triplets {
            if r >= dim || c >= dim {
                return Err(Error::InvalidArgument(format!(
                    "triplet index ({r},{c}) out of range for dim {dim}"
                )));
            }
            if !v.re.is_finite() || !v.im.is_finite() {
                return Err(Error::InvalidArgument("triplet values must be finite".into()));
            }
            *coalesced.entry((r, c)).or_insert(Complex64::new(0.0, 0.0)) += v;
        }
        coalesced.retain(|_, v| v.norm() > 0.0);

        if hermitian {
            let scale = coalesced.values().map(|v| v.norm()).fold(1.0f64, f64::max);
            for (&(r, c), &v) in &coalesced {
                let mirror = coalesced.get(&(c, r)).copied().unwrap_or(Complex64::new(0.0, 0.0));
                if (mirror - v.conj()).norm() > STRUCTURAL_TOL * scale {
                    return Err(Error::NotHermitian(format!(
                        "triplet ({r},{c}) has no conjugate mirror"
                    )));
                }
            }
        }

        let mut entries: Vec<((usize, usize), Complex64)> = coalesced.into_iter().collect();
        entries.sort_by_key(|&((r, c), _)| (r, c));

        let mut row_start = vec![0usize; dim + 1];
        let mut col_idx = Vec::with_capacity(entries.len());
        let mut values = Vec::with_capacity(entries.len());
        for ((r, c), v) in entries {
            row_start[r + 1] += 1;
            col_idx.push(c);
            values.push(v);
        }
        for r in 0..dim {
            row_start[r + 1] += row_start[r];
        }
        Ok(Self { dim, hermitian, row_start, col_idx, values })
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn is_hermitian(&self) -> bool {
        self.hermitian
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn triplets(&self) -> Vec<(usize, usize, Complex64)> {
        let mut out = Vec::with_capacity(self.nnz());
        for r in 0..self.dim {
            for k in self.row_start[r]..self.row_start[r + 1] {
                out.push((r, self.col_idx[k], self.values[k]));
            }
        }
        out
    }

    /// Max absolute row sum; for a Hermitian operator this bounds the
    /// operator norm.
    pub fn one_norm_bound(&self) -> f64 {
        (0..self.dim)
            .map(|r| {
                self.values[self.row_start[r]..self.row_start[r + 1]]
                    .iter()
                    .map(|v| v.norm())
                    .sum::<f64>()
            })
            .fold(0.0, f64::max)
    }

    pub fn matvec(&self, x: &[Complex64], out: &mut [Complex64]) {
        assert_eq!(x.len(), self.dim);
        assert_eq!(out.len(), self.dim);
        let row = |r: usize| -> Complex64 {
            let mut acc = Complex64::new(0.0, 0.0);
            for k in self.row_start[r]..self.row_start[r + 1] {
                acc += self.values[k] * x[self.col_idx[k]];
            }
            acc
        };
        if self.dim >= PAR_MATVEC_THRESHOLD {
            out.par_iter_mut().enumerate().for_each(|(r, o)| *o = row(r));
        } else {
            for (r, o) in out.iter_mut().enumerate() {
                *o = row(r);
            }
        }
    }

    pub fn to_dense(&self) -> ComplexMatrix {
        let mut m = ComplexMatrix::zeros(self.dim, self.dim);
        for r in 0..self.dim {
            for k in self.row_start[r]..self.row_start[r + 1] {
                m.set(r, self.col_idx[k], self.values[k]);
            }
        }
        m
    }

    pub fn to_hermitian(&self) -> Result<HermitianMatrix> {
        if !self.hermitian {
            return Err(Error::NotHermitian("hermitian flag not set".into()));
        }
        HermitianMatrix::new(&self.to_dense())
    }

    /// `(S + S*) / 2` with the hermitian flag set.
    pub fn real_part(&self) -> Self {
        let mut triplets = Vec::with_capacity(2 * self.nnz());
        for (r, c, v) in self.triplets() {
            triplets.push((r, c, v * 0.5));
            triplets.push((c, r, v.conj() * 0.5));
        }
        Self::new(self.dim, triplets, true).expect("symmetrized triplets are Hermitian")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn coalesces_and_validates() {
        let s = SparseOperator::new(
            3,
            vec![(0, 1, c(1.0, 0.0)), (0, 1, c(0.5, 0.0)), (1, 0, c(1.5, 0.0))],
            true,
        )
        .unwrap();
        assert_eq!(s.nnz(), 2);
        assert!((s.to_dense().get(0, 1) - c(1.5, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn hermitian_flag_requires_closure() {
        let err = SparseOperator::new(2, vec![(0, 1, c(1.0, 0.0))], true);
        assert!(matches!(err, Err(Error::NotHermitian(_))));
        assert!(SparseOperator::new(2, vec![(0, 1, c(1.0, 0.0))], false).is_ok());
    }

    #[test]
    fn rejects_out_of_range() {
        assert!(SparseOperator::new(2, vec![(0, 2, c(1.0, 0.0))], false).is_err());
    }

    #[test]
    fn matvec_matches_dense() {
        let s = SparseOperator::new(
            4,
            vec![(0, 1, c(1.0, 2.0)), (1, 0, c(1.0, -2.0)), (2, 3, c(0.0, 1.0)), (3, 2, c(0.0, -1.0)), (2, 2, c(3.0, 0.0))],
            true,
        )
        .unwrap();
        let x: Vec<Complex64> = (0..4).map(|i| c(i as f64 + 0.5, -(i as f64))).collect();
        let mut out = vec![c(0.0, 0.0); 4];
        s.matvec(&x, &mut out);
        let dense_out = s.to_dense().matvec(&x);
        for (a, b) in out.iter().zip(&dense_out) {
            assert!((a - b).norm() < 1e-14);
        }
    }

    #[test]
    fn real_part_is_hermitian() {
        let s = SparseOperator::new(3, vec![(1, 0, c(1.0, 0.0)), (2, 1, c(0.5, 0.5))], false).unwrap();
        let re = s.real_part();
        assert!(re.is_hermitian());
        let d = re.to_dense();
        let adj = d.adjoint();
        assert!(d.approx_eq(&adj, 1e-15));
    }
}
