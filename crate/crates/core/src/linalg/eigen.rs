//! Dense Hermitian eigensolver.
//!
//! Cyclic-by-row complex Jacobi: each sweep annihilates every off-diagonal
//! entry with a unitary plane rotation, so the accumulated eigenvector
//! matrix is unitary by construction and the off-diagonal mass decreases
//! monotonically. Correctness is enforced by a reconstruction residual
//! check rather than by trusting the iteration.

use num_complex::Complex64;

use crate::defaults::DENSE_EIGEN_TOL;
use crate::error::{Error, Result};
use crate::linalg::{ComplexMatrix, HermitianMatrix};

/// Ascending eigenvalues with matching orthonormal eigenvector columns.
#[derive(Debug, Clone)]
pub struct Eigen {
    pub values: Vec<f64>,
    pub vectors: ComplexMatrix,
}

impl Eigen {
    pub fn min(&self) -> f64 {
        self.values[0]
    }

    pub fn max(&self) -> f64 {
        *self.values.last().expect("nonempty spectrum")
    }

    /// Column `j` of the eigenvector matrix.
    pub fn vector(&self, j: usize) -> Vec<Complex64> {
        (0..self.vectors.rows()).map(|r| self.vectors.get(r, j)).collect()
    }
}

const MAX_SWEEPS: usize = 64;

pub fn hermitian_eigen(h: &HermitianMatrix) -> Result<Eigen> {
    let n = h.dim();
    let mut a: Vec<Complex64> = (0..n * n)
        .map(|k| h.get(k / n, k % n))
        .collect();
    let mut v: Vec<Complex64> = vec![Complex64::new(0.0, 0.0); n * n];
    for i in 0..n {
        v[i * n + i] = Complex64::new(1.0, 0.0);
    }

    let scale = h.frobenius_norm();
    // Entries this far below the matrix scale are annihilated instead of
    // rotated: subnormal values carry too few mantissa bits for z/|z| to
    // stay on the unit circle, which would silently deform the
    // accumulated eigenvector unitary.
    let negligible = 1e-18 * scale;
    if scale > 1e-280 {
        let stop = (n as f64) * 1e-15 * scale;
        for _ in 0..MAX_SWEEPS {
            let mut off = 0.0f64;
            for p in 0..n {
                for q in (p + 1)..n {
                    off += a[p * n + q].norm_sqr();
                }
            }
            if off.sqrt() <= stop {
                break;
            }
            for p in 0..n {
                for q in (p + 1)..n {
                    rotate(&mut a, &mut v, n, p, q, negligible);
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    let diag: Vec<f64> = (0..n).map(|i| a[i * n + i].re).collect();
    order.sort_by(|&i, &j| diag[i].partial_cmp(&diag[j]).expect("finite eigenvalues"));

    let values: Vec<f64> = order.iter().map(|&i| diag[i]).collect();
    let mut vectors = ComplexMatrix::zeros(n, n);
    for (col, &src) in order.iter().enumerate() {
        for r in 0..n {
            vectors.set(r, col, v[r * n + src]);
        }
    }

    let eig = Eigen { values, vectors };
    let residual = reconstruction_residual(h, &eig);
    if residual > DENSE_EIGEN_TOL * scale.max(1.0) {
        return Err(Error::Internal(format!(
            "eigensolver residual {residual:.3e} exceeds {:.1e} * max(1, |H|)",
            DENSE_EIGEN_TOL
        )));
    }
    Ok(eig)
}

/// Frobenius norm of `H - V diag(values) V*`.
pub fn reconstruction_residual(h: &HermitianMatrix, eig: &Eigen) -> f64 {
    let n = h.dim();
    let mut acc = 0.0f64;
    for r in 0..n {
        for c in 0..n {
            let mut s = Complex64::new(0.0, 0.0);
            for k in 0..n {
                s += eig.vectors.get(r, k) * eig.values[k] * eig.vectors.get(c, k).conj();
            }
            acc += (h.get(r, c) - s).norm_sqr();
        }
    }
    acc.sqrt()
}

/// One Jacobi rotation zeroing a[p][q] (p < q).
fn rotate(a: &mut [Complex64], v: &mut [Complex64], n: usize, p: usize, q: usize, negligible: f64) {
    let z = a[p * n + q];
    let zn = z.norm();
    if zn <= negligible {
        a[p * n + q] = Complex64::new(0.0, 0.0);
        a[q * n + p] = Complex64::new(0.0, 0.0);
        return;
    }
    let app = a[p * n + p].re;
    let aqq = a[q * n + q].re;
    let phase = z / zn;

    // Real rotation angle for [[app, |z|], [|z|, aqq]].
    let tau = (aqq - app) / (2.0 * zn);
    let t = if tau >= 0.0 {
        1.0 / (tau + (1.0 + tau * tau).sqrt())
    } else {
        -1.0 / (-tau + (1.0 + tau * tau).sqrt())
    };
    let c = 1.0 / (1.0 + t * t).sqrt();
    let s = t * c;

    // J = [[c*phase, s*phase], [-s, c]] diagonalizes the (p,q) submatrix.
    let jpp = phase * c;
    let jpq = phase * s;
    let jqp = Complex64::new(-s, 0.0);
    let jqq = Complex64::new(c, 0.0);

    // A <- J* A J, applied as column then row updates.
    for k in 0..n {
        let akp = a[k * n + p];
        let akq = a[k * n + q];
        a[k * n + p] = akp * jpp + akq * jqp;
        a[k * n + q] = akp * jpq + akq * jqq;
    }
    for k in 0..n {
        let apk = a[p * n + k];
        let aqk = a[q * n + k];
        a[p * n + k] = jpp.conj() * apk + jqp.conj() * aqk;
        a[q * n + k] = jpq.conj() * apk + jqq.conj() * aqk;
    }
    // Clean the rotated pair so roundoff does not leave a stray imaginary part.
    a[p * n + q] = Complex64::new(0.0, 0.0);
    a[q * n + p] = Complex64::new(0.0, 0.0);
    a[p * n + p] = Complex64::new(a[p * n + p].re, 0.0);
    a[q * n + q] = Complex64::new(a[q * n + q].re, 0.0);

    for k in 0..n {
        let vkp = v[k * n + p];
        let vkq = v[k * n + q];
        v[k * n + p] = vkp * jpp + vkq * jqp;
        v[k * n + q] = vkp * jpq + vkq * jqq;
    }
}

/// Largest singular value, computed as sqrt of the top eigenvalue of M*M.
/// Agrees with the top eigenvalue of the Hermitian dilation [[0, M], [M*, 0]].
pub fn operator_norm(m: &ComplexMatrix) -> f64 {
    let gram = m.adjoint().mul(m).expect("adjoint dims always match");
    let h = HermitianMatrix::new(&gram).expect("M*M is Hermitian");
    let eig = hermitian_eigen(&h).expect("Gram matrix eigensolve");
    eig.max().max(0.0).sqrt()
}

/// Outcome of a PSD test: either PSD, or a unit witness vector with
/// negative quadratic form.
#[derive(Debug, Clone)]
pub enum PsdVerdict {
    Psd,
    NotPsd {
        eigenvalue: f64,
        witness: Vec<Complex64>,
    },
}

impl PsdVerdict {
    pub fn is_psd(&self) -> bool {
        matches!(self, PsdVerdict::Psd)
    }
}

/// PSD iff the smallest eigenvalue is >= -tol; otherwise the bottom
/// eigenvector comes back as a witness (its quadratic form is < -tol).
pub fn psd_check(h: &HermitianMatrix, tol: f64) -> Result<PsdVerdict> {
    let eig = hermitian_eigen(h)?;
    if eig.min() >= -tol {
        Ok(PsdVerdict::Psd)
    } else {
        Ok(PsdVerdict::NotPsd { eigenvalue: eig.min(), witness: eig.vector(0) })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn random_hermitian(n: usize, rng: &mut ChaCha8Rng) -> HermitianMatrix {
        HermitianMatrix::from_upper(n, |r, cidx| {
            if r == cidx {
                c(rng.gen_range(-2.0..2.0), 0.0)
            } else {
                c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
            }
        })
    }

    #[test]
    fn diagonal_case() {
        let h = HermitianMatrix::diagonal(&[3.0, -1.0]);
        let eig = hermitian_eigen(&h).unwrap();
        assert_eq!(eig.values, vec![-1.0, 3.0]);
    }

    #[test]
    fn pauli_x_spectrum() {
        let h = HermitianMatrix::from_upper(2, |r, cc| {
            if r != cc { c(1.0, 0.0) } else { c(0.0, 0.0) }
        });
        let eig = hermitian_eigen(&h).unwrap();
        assert!((eig.values[0] + 1.0).abs() < 1e-12);
        assert!((eig.values[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn two_by_two_matches_quadratic_formula() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..50 {
            let h = random_hermitian(2, &mut rng);
            let (a, b) = (h.get(0, 0).re, h.get(1, 1).re);
            let z = h.get(0, 1).norm();
            let disc = ((a - b) * (a - b) + 4.0 * z * z).sqrt();
            let lo = (a + b - disc) / 2.0;
            let hi = (a + b + disc) / 2.0;
            let eig = hermitian_eigen(&h).unwrap();
            assert!((eig.values[0] - lo).abs() < 1e-12);
            assert!((eig.values[1] - hi).abs() < 1e-12);
        }
    }

    #[test]
    fn reconstruction_and_orthonormality() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for n in [3usize, 7, 15] {
            let h = random_hermitian(n, &mut rng);
            let eig = hermitian_eigen(&h).unwrap();
            for j in 1..n {
                assert!(eig.values[j - 1] <= eig.values[j] + 1e-14);
            }
            let v = &eig.vectors;
            let gram = v.adjoint().mul(v).unwrap();
            assert!(gram.approx_eq(&ComplexMatrix::identity(n), 1e-11));
        }
    }

    #[test]
    fn operator_norm_basics() {
        assert!((operator_norm(&ComplexMatrix::identity(4)) - 1.0).abs() < 1e-12);
        let e12 = ComplexMatrix::matrix_unit(2, 0, 1);
        assert!((operator_norm(&e12) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn operator_norm_matches_dilation() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        for _ in 0..20 {
            let m = ComplexMatrix::new(
                3,
                2,
                (0..6).map(|_| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect(),
            )
            .unwrap();
            // Hermitian dilation [[0, M], [M*, 0]].
            let mut d = ComplexMatrix::zeros(5, 5);
            d.set_block(0, 3, &m);
            d.set_block(3, 0, &m.adjoint());
            let dil = HermitianMatrix::new(&d).unwrap();
            let top = hermitian_eigen(&dil).unwrap().max();
            assert!((operator_norm(&m) - top).abs() < 1e-10);
        }
    }

    #[test]
    fn psd_check_basics() {
        let h = HermitianMatrix::identity(2);
        assert!(psd_check(&h, 1e-9).unwrap().is_psd());

        let h = HermitianMatrix::diagonal(&[1.0, -0.1]);
        match psd_check(&h, 1e-9).unwrap() {
            PsdVerdict::NotPsd { eigenvalue, witness } => {
                assert!((eigenvalue + 0.1).abs() < 1e-12);
                assert!(witness[1].norm() > 0.99);
                assert!(h.quadratic_form(&witness) < -1e-9);
            }
            PsdVerdict::Psd => panic!("diag(1,-0.1) is not PSD"),
        }
    }

    #[test]
    fn psd_two_by_two_determinant_law() {
        // [[1, a], [conj a, 1]] is PSD iff |a| <= 1.
        for &mag in &[0.5f64, 1.0, 1.5] {
            let a = Complex64::from_polar(mag, 0.37);
            let h = HermitianMatrix::from_upper(2, |r, cc| {
                if r == cc { c(1.0, 0.0) } else { a }
            });
            let verdict = psd_check(&h, 1e-9).unwrap();
            assert_eq!(verdict.is_psd(), mag <= 1.0, "magnitude {mag}");
        }
    }

    #[test]
    fn norm_of_hermitian_is_extreme_eigenvalue() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..20 {
            let h = random_hermitian(4, &mut rng);
            let eig = hermitian_eigen(&h).unwrap();
            let expect = eig.min().abs().max(eig.max().abs());
            assert!((operator_norm(&h.to_matrix()) - expect).abs() < 1e-10);
        }
    }
}
