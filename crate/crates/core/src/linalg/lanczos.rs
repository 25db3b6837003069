//! Extremal eigenvalues of sparse Hermitian operators.
//!
//! Restarted Lanczos with full reorthogonalization; every returned value
//! carries an explicitly computed residual `|Sv - lambda v|`, so the
//! certificate does not depend on the iteration having behaved. A shifted
//! power iteration backs the Krylov loop up when it stalls.

use num_complex::Complex64;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::linalg::{hermitian_eigen, HermitianMatrix, SparseOperator};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Extreme {
    Max,
    Min,
}

#[derive(Debug, Clone)]
pub struct SparseEigenResult {
    pub value: f64,
    /// Achieved `|Sv - lambda v|_2` for the returned Ritz pair.
    pub residual: f64,
    /// Certified target `tol * max-row-sum`; `converged` means
    /// `residual <= residual_bound`.
    pub residual_bound: f64,
    pub iterations: usize,
    pub converged: bool,
    pub vector: Vec<Complex64>,
}

const KRYLOV_BLOCK: usize = 80;
const MAX_RESTARTS: usize = 60;
const POWER_ITERS: usize = 20_000;

pub fn sparse_extreme_eigen(
    s: &SparseOperator,
    which: Extreme,
    tol: f64,
    seed: u64,
) -> Result<SparseEigenResult> {
    if !s.is_hermitian() {
        return Err(Error::NotHermitian("sparse_extreme_eigen needs the hermitian flag".into()));
    }
    if tol <= 0.0 {
        return Err(Error::InvalidArgument("tolerance must be positive".into()));
    }
    let n = s.dim();
    let scale = s.one_norm_bound();
    let bound = tol * scale;
    if scale == 0.0 {
        let mut vector = vec![Complex64::new(0.0, 0.0); n];
        vector[0] = Complex64::new(1.0, 0.0);
        return Ok(SparseEigenResult { value: 0.0, residual: 0.0, residual_bound: 0.0, iterations: 0, converged: true, vector });
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut start = random_unit(n, &mut rng);
    let mut iterations = 0usize;
    let mut best: Option<(f64, f64, Vec<Complex64>)> = None; // (value, residual, vector)

    for restart in 0..MAX_RESTARTS {
        let (ritz_value, ritz_vec, used) = lanczos_pass(s, &start, which);
        iterations += used;
        let residual = residual_norm(s, &ritz_vec, ritz_value);
        let better = match &best {
            None => true,
            Some((v, _, _)) => match which {
                Extreme::Max => ritz_value > *v,
                Extreme::Min => ritz_value < *v,
            },
        };
        if better {
            best = Some((ritz_value, residual, ritz_vec.clone()));
        }
        if residual <= bound {
            let (value, residual, vector) = best.expect("set above");
            return Ok(SparseEigenResult { value, residual, residual_bound: bound, iterations, converged: true, vector });
        }
        // Restart from the Ritz vector; period blend in fresh randomness
        // so a stagnant invariant subspace cannot trap the iteration.
        start = ritz_vec;
        if restart % 7 == 6 {
            let noise = random_unit(n, &mut rng);
            for (a, b) in start.iter_mut().zip(&noise) {
                *a += 0.05 * b;
            }
            normalize(&mut start);
        }
    }

    // Fallback: power iteration on the shifted operator.
    let (value, residual, vector, used) = shifted_power(s, which, scale, bound, &mut rng);
    iterations += used;
    let replace = match &best {
        None => true,
        Some((v, _, _)) => match which {
            Extreme::Max => value > *v,
            Extreme::Min => value < *v,
        },
    };
    let (value, residual, vector) = if replace {
        (value, residual, vector)
    } else {
        best.expect("nonempty")
    };
    Ok(SparseEigenResult {
        value,
        residual,
        residual_bound: bound,
        iterations,
        converged: residual <= bound,
        vector,
    })
}

fn lanczos_pass(s: &SparseOperator, start: &[Complex64], which: Extreme) -> (f64, Vec<Complex64>, usize) {
    let n = s.dim();
    let m = KRYLOV_BLOCK.min(n);
    let mut basis: Vec<Vec<Complex64>> = Vec::with_capacity(m);
    let mut alphas: Vec<f64> = Vec::with_capacity(m);
    let mut betas: Vec<f64> = Vec::with_capacity(m);

    let mut q = start.to_vec();
    normalize(&mut q);
    basis.push(q);

    let mut w = vec![Complex64::new(0.0, 0.0); n];
    let mut matvecs = 0usize;
    for j in 0..m {
        s.matvec(&basis[j], &mut w);
        matvecs += 1;
        let alpha = dot(&w, &basis[j]).re;
        alphas.push(alpha);
        for (wi, qi) in w.iter_mut().zip(&basis[j]) {
            *wi -= alpha * qi;
        }
        if j > 0 {
            let beta_prev = betas[j - 1];
            let prev = &basis[j - 1];
            for (wi, qi) in w.iter_mut().zip(prev) {
                *wi -= beta_prev * qi;
            }
        }
        // Full reorthogonalization, two passes.
        for _ in 0..2 {
            for q in &basis {
                let c = dot(&w, q);
                for (wi, qi) in w.iter_mut().zip(q) {
                    *wi -= c * qi;
                }
            }
        }
        let beta = norm(&w);
        if beta <= 1e-14 * (1.0 + alpha.abs()) || j + 1 == m {
            break;
        }
        betas.push(beta);
        let mut next = w.clone();
        for v in next.iter_mut() {
            *v /= beta;
        }
        basis.push(next);
    }

    let k = alphas.len();
    let tri = HermitianMatrix::from_upper(k, |r, c| {
        if r == c {
            Complex64::new(alphas[r], 0.0)
        } else if c == r + 1 {
            Complex64::new(betas[r], 0.0)
        } else {
            Complex64::new(0.0, 0.0)
        }
    });
    let eig = hermitian_eigen(&tri).expect("tridiagonal eigensolve");
    let idx = match which {
        Extreme::Max => k - 1,
        Extreme::Min => 0,
    };
    let value = eig.values[idx];
    let coeffs = eig.vector(idx);
    let mut ritz = vec![Complex64::new(0.0, 0.0); n];
    for (j, q) in basis.iter().enumerate() {
        let c = coeffs[j];
        for (rv, qv) in ritz.iter_mut().zip(q) {
            *rv += c * qv;
        }
    }
    normalize(&mut ritz);
    (value, ritz, matvecs)
}

fn shifted_power(
    s: &SparseOperator,
    which: Extreme,
    scale: f64,
    bound: f64,
    rng: &mut ChaCha8Rng,
) -> (f64, f64, Vec<Complex64>, usize) {
    let n = s.dim();
    let mut x = random_unit(n, rng);
    let mut sx = vec![Complex64::new(0.0, 0.0); n];
    let sign = match which {
        Extreme::Max => 1.0,
        Extreme::Min => -1.0,
    };
    let mut used = 0usize;
    for it in 0..POWER_ITERS {
        s.matvec(&x, &mut sx);
        used += 1;
        if it % 50 == 49 {
            let value = dot(&sx, &x).re;
            let res = residual_from_image(&sx, &x, value);
            if res <= bound {
                break;
            }
        }
        // x <- normalize(sign * Sx + scale * x): shifts the target extreme
        // to the dominant eigenvalue of a PSD operator.
        for (xi, si) in x.iter_mut().zip(&sx) {
            *xi = sign * si + scale * *xi;
        }
        normalize(&mut x);
    }
    s.matvec(&x, &mut sx);
    used += 1;
    let value = dot(&sx, &x).re;
    let residual = residual_from_image(&sx, &x, value);
    (value, residual, x, used)
}

fn residual_norm(s: &SparseOperator, v: &[Complex64], lambda: f64) -> f64 {
    let mut sv = vec![Complex64::new(0.0, 0.0); v.len()];
    s.matvec(v, &mut sv);
    residual_from_image(&sv, v, lambda)
}

fn residual_from_image(sv: &[Complex64], v: &[Complex64], lambda: f64) -> f64 {
    sv.iter()
        .zip(v)
        .map(|(a, b)| (a - lambda * b).norm_sqr())
        .sum::<f64>()
        .sqrt()
}

fn dot(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x * y.conj()).sum()
}

fn norm(a: &[Complex64]) -> f64 {
    a.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

fn normalize(a: &mut [Complex64]) {
    let n = norm(a);
    if n > 0.0 {
        for x in a.iter_mut() {
            *x /= n;
        }
    }
}

fn random_unit(n: usize, rng: &mut ChaCha8Rng) -> Vec<Complex64> {
    let mut v: Vec<Complex64> = (0..n)
        .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
        .collect();
    normalize(&mut v);
    v
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn diagonal_max() {
        let trips = (0..5).map(|i| (i, i, c(i as f64 + 1.0, 0.0))).collect();
        let s = SparseOperator::new(5, trips, true).unwrap();
        let r = sparse_extreme_eigen(&s, Extreme::Max, 1e-9, 0).unwrap();
        assert!(r.converged);
        assert!((r.value - 5.0).abs() < 1e-8);
        let rmin = sparse_extreme_eigen(&s, Extreme::Min, 1e-9, 0).unwrap();
        assert!((rmin.value - 1.0).abs() < 1e-8);
    }

    #[test]
    fn path_graph_spectrum() {
        // Adjacency of the path on m vertices has top eigenvalue 2cos(pi/(m+1)).
        for m in [6usize, 25, 80] {
            let mut trips = Vec::new();
            for i in 0..m - 1 {
                trips.push((i, i + 1, c(1.0, 0.0)));
                trips.push((i + 1, i, c(1.0, 0.0)));
            }
            let s = SparseOperator::new(m, trips, true).unwrap();
            let r = sparse_extreme_eigen(&s, Extreme::Max, 1e-10, 1).unwrap();
            let expect = 2.0 * (std::f64::consts::PI / (m as f64 + 1.0)).cos();
            assert!(r.converged, "m={m}");
            assert!((r.value - expect).abs() < 1e-8, "m={m}: {} vs {}", r.value, expect);
        }
    }

    #[test]
    fn agrees_with_dense_on_random_instances() {
        use rand::prelude::*;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        for n in [8usize, 30, 64] {
            let mut trips = Vec::new();
            for _ in 0..3 * n {
                let r = rng.gen_range(0..n);
                let cc = rng.gen_range(0..n);
                let v = c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
                trips.push((r, cc, v * 0.5));
                trips.push((cc, r, v.conj() * 0.5));
            }
            let s = SparseOperator::new(n, trips, true).unwrap();
            let dense = hermitian_eigen(&s.to_hermitian().unwrap()).unwrap();
            for which in [Extreme::Max, Extreme::Min] {
                let r = sparse_extreme_eigen(&s, which, 1e-9, 7).unwrap();
                let expect = match which {
                    Extreme::Max => dense.max(),
                    Extreme::Min => dense.min(),
                };
                assert!((r.value - expect).abs() < 1e-7, "n={n}: {} vs {}", r.value, expect);
            }
        }
    }

    #[test]
    fn deterministic_for_fixed_seed() {
        let mut trips = Vec::new();
        for i in 0..40usize {
            trips.push((i, (i + 1) % 40, c(1.0, 0.0)));
            trips.push(((i + 1) % 40, i, c(1.0, 0.0)));
        }
        let s = SparseOperator::new(40, trips, true).unwrap();
        let a = sparse_extreme_eigen(&s, Extreme::Max, 1e-10, 5).unwrap();
        let b = sparse_extreme_eigen(&s, Extreme::Max, 1e-10, 5).unwrap();
        assert_eq!(a.value.to_bits(), b.value.to_bits());
        assert_eq!(a.iterations, b.iterations);
    }

    #[test]
    fn rejects_non_hermitian_flag() {
        let s = SparseOperator::new(2, vec![(0, 1, c(1.0, 0.0))], false).unwrap();
        assert!(sparse_extreme_eigen(&s, Extreme::Max, 1e-8, 0).is_err());
    }
}
