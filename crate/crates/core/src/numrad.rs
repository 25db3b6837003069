//! Classical numerical radius with certified enclosures.
//!
//! `w(T)` is computed as the maximum over rotations of the top eigenvalue
//! of `Re(e^{-i theta} T)`. The sweep starts from 64 uniform samples and
//! refines by interval bisection; since the derivative of the objective is
//! bounded by `|T|`, every interval carries a rigorous upper bound and the
//! final enclosure is certified.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{hermitian_eigen, operator_norm, ComplexMatrix, HermitianMatrix};

/// Provenance tag for a bound.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Sweep,
    Ascent,
    Certificate,
    ClosedForm,
}

impl Method {
    pub fn as_str(&self) -> &'static str {
        match self {
            Method::Sweep => "sweep",
            Method::Ascent => "ascent",
            Method::Certificate => "certificate",
            Method::ClosedForm => "closed-form",
        }
    }
}

/// Certified interval for a radius-type quantity. `upper == None` marks a
/// lower-bound-only estimate (no certificate was produced).
#[derive(Debug, Clone)]
pub struct RadiusEstimate {
    pub lower: f64,
    pub upper: Option<f64>,
    pub lower_method: Method,
    pub upper_method: Option<Method>,
    pub iterations: usize,
}

impl RadiusEstimate {
    pub fn new(
        lower: f64,
        upper: Option<f64>,
        lower_method: Method,
        upper_method: Option<Method>,
        iterations: usize,
    ) -> Result<Self> {
        if !lower.is_finite() || lower < -1e-12 {
            return Err(Error::InvalidArgument(format!("lower bound {lower} must be finite and >= 0")));
        }
        if let Some(u) = upper {
            if !u.is_finite() || u < 0.0 {
                return Err(Error::InvalidArgument(format!("upper bound {u} must be finite and >= 0")));
            }
            if lower > u + 1e-12 {
                return Err(Error::InvalidArgument(format!("lower {lower} exceeds upper {u}")));
            }
        }
        Ok(Self { lower: lower.max(0.0), upper, lower_method, upper_method, iterations })
    }

    pub fn width(&self) -> Option<f64> {
        self.upper.map(|u| u - self.lower)
    }
}

/// `(T + T*) / 2`.
pub fn real_part(t: &ComplexMatrix) -> Result<HermitianMatrix> {
    if !t.is_square() {
        return Err(Error::ShapeMismatch(format!("real_part needs a square matrix, got {}x{}", t.rows(), t.cols())));
    }
    Ok(HermitianMatrix::from_upper(t.rows(), |r, c| {
        (t.get(r, c) + t.get(c, r).conj()) * 0.5
    }))
}

/// Numerical radius with an enclosure of width <= tol.
pub fn numerical_radius(t: &ComplexMatrix, tol: f64) -> Result<RadiusEstimate> {
    numerical_radius_detailed(t, tol).map(|d| d.estimate)
}

/// Like [`numerical_radius`] but also returns a maximizing rotation and
/// unit vector (used to build ascent directions and witnesses).
pub struct RadiusDetail {
    pub estimate: RadiusEstimate,
    pub theta: f64,
    pub vector: Vec<Complex64>,
}

pub fn numerical_radius_detailed(t: &ComplexMatrix, tol: f64) -> Result<RadiusDetail> {
    if !t.is_square() {
        return Err(Error::ShapeMismatch(format!("numerical radius needs a square matrix, got {}x{}", t.rows(), t.cols())));
    }
    if tol <= 0.0 {
        return Err(Error::InvalidArgument("tolerance must be positive".into()));
    }
    let norm = operator_norm(t);
    if norm == 0.0 {
        let mut vector = vec![Complex64::new(0.0, 0.0); t.rows()];
        vector[0] = Complex64::new(1.0, 0.0);
        return Ok(RadiusDetail {
            estimate: RadiusEstimate::new(0.0, Some(0.0), Method::Sweep, Some(Method::Sweep), 0)?,
            theta: 0.0,
            vector,
        });
    }
    // Work on T / |T| so the sweep Lipschitz constant is 1.
    let m = t.scale(Complex64::new(1.0 / norm, 0.0));
    let tol_n = tol / norm;
    let (value, theta, vector, iterations) = sweep(&m, tol_n)?;
    let estimate = RadiusEstimate::new(
        value.0 * norm,
        Some(value.1 * norm),
        Method::Sweep,
        Some(Method::Sweep),
        iterations,
    )?;
    Ok(RadiusDetail { estimate, theta, vector })
}

/// Uncertified best-effort maximizer of the rotation objective: the
/// initial sweep plus golden refinement around the leading peaks. The
/// value is a sound lower bound for w (every sample is), with no upper
/// claim. Used inside ascent loops where only comparisons matter.
#[derive(Debug, Clone)]
pub(crate) struct RadiusLower {
    pub value: f64,
    pub theta: f64,
    pub vector: Vec<Complex64>,
    pub evaluations: usize,
}

pub(crate) fn radius_lower(t: &ComplexMatrix) -> Result<RadiusLower> {
    if !t.is_square() {
        return Err(Error::ShapeMismatch("square matrix required".into()));
    }
    let n = t.rows();
    let eval = |theta: f64| -> Result<(f64, Vec<Complex64>)> {
        let rotated = t.scale(Complex64::from_polar(1.0, -theta));
        let h = real_part(&rotated)?;
        let eig = hermitian_eigen(&h)?;
        Ok((eig.max(), eig.vector(n - 1)))
    };
    let two_pi = std::f64::consts::TAU;
    let m = INITIAL_SAMPLES;
    let mut samples = Vec::with_capacity(m);
    let mut evaluations = 0usize;
    for j in 0..m {
        let theta = two_pi * j as f64 / m as f64;
        let (f, _) = eval(theta)?;
        evaluations += 1;
        samples.push((theta, f));
    }
    // Local maxima of the circular sample sequence, best three.
    let mut peaks: Vec<(f64, f64)> = (0..m)
        .filter(|&j| {
            let prev = samples[(j + m - 1) % m].1;
            let next = samples[(j + 1) % m].1;
            samples[j].1 >= prev && samples[j].1 >= next
        })
        .map(|j| samples[j])
        .collect();
    peaks.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap_or(std::cmp::Ordering::Equal));
    peaks.truncate(3);
    if peaks.is_empty() {
        peaks.push(samples[0]);
    }

    let h = two_pi / m as f64;
    const INVPHI: f64 = 0.618_033_988_749_894_9;
    let mut best = (peaks[0].0, peaks[0].1);
    for &(theta0, f0) in &peaks {
        let mut lo = theta0 - h;
        let mut hi = theta0 + h;
        let mut x1 = hi - INVPHI * (hi - lo);
        let mut x2 = lo + INVPHI * (hi - lo);
        let mut f1 = eval(x1)?.0;
        let mut f2 = eval(x2)?.0;
        evaluations += 2;
        for _ in 0..40 {
            if f1 < f2 {
                lo = x1;
                x1 = x2;
                f1 = f2;
                x2 = lo + INVPHI * (hi - lo);
                f2 = eval(x2)?.0;
            } else {
                hi = x2;
                x2 = x1;
                f2 = f1;
                x1 = hi - INVPHI * (hi - lo);
                f1 = eval(x1)?.0;
            }
            evaluations += 1;
        }
        let (x, f) = if f1 > f2 { (x1, f1) } else { (x2, f2) };
        let (x, f) = if f > f0 { (x, f) } else { (theta0, f0) };
        if f > best.1 {
            best = (x, f);
        }
    }
    let (value, vector) = eval(best.0)?;
    evaluations += 1;
    Ok(RadiusLower { value: value.max(best.1), theta: best.0, vector, evaluations })
}

struct Interval {
    upper: f64,
    lo: f64,
    hi: f64,
    flo: f64,
    fhi: f64,
}

impl PartialEq for Interval {
    fn eq(&self, other: &Self) -> bool {
        self.upper == other.upper
    }
}
impl Eq for Interval {}
impl PartialOrd for Interval {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Interval {
    fn cmp(&self, other: &Self) -> Ordering {
        self.upper.partial_cmp(&other.upper).unwrap_or(Ordering::Equal)
    }
}

fn make_interval(lo: f64, hi: f64, flo: f64, fhi: f64) -> Interval {
    // The objective is the support function of the numerical range: a max
    // of cosines of unit frequency, each with curvature at most w <= 1 on
    // the normalized matrix. Any member branch passing through the
    // interval is bounded by its endpoint values plus h^2/8.
    let h = hi - lo;
    Interval { upper: flo.max(fhi) + h * h / 8.0, lo, hi, flo, fhi }
}

const INITIAL_SAMPLES: usize = 64;
const MAX_EVALS: usize = 500_000;

/// Returns ((lower, upper), best theta, best vector, evaluations).
fn sweep(m: &ComplexMatrix, tol: f64) -> Result<((f64, f64), f64, Vec<Complex64>, usize)> {
    let two_pi = 2.0 * std::f64::consts::PI;
    let eval = |theta: f64| -> Result<(f64, Vec<Complex64>)> {
        let rotated = m.scale(Complex64::from_polar(1.0, -theta));
        let h = real_part(&rotated)?;
        let eig = hermitian_eigen(&h)?;
        Ok((eig.max(), eig.vector(h.dim() - 1)))
    };

    let mut evals = 0usize;
    let mut best = f64::NEG_INFINITY;
    let mut best_theta = 0.0;
    let mut best_vec: Vec<Complex64> = Vec::new();
    let mut samples = Vec::with_capacity(INITIAL_SAMPLES + 1);
    for j in 0..=INITIAL_SAMPLES {
        let theta = two_pi * (j as f64) / (INITIAL_SAMPLES as f64);
        let (f, v) = eval(theta)?;
        evals += 1;
        if f > best {
            best = f;
            best_theta = theta;
            best_vec = v;
        }
        samples.push((theta, f));
    }

    let mut heap = BinaryHeap::new();
    for w in samples.windows(2) {
        heap.push(make_interval(w[0].0, w[1].0, w[0].1, w[1].1));
    }

    loop {
        let top = heap.peek().map(|i| i.upper).unwrap_or(best);
        let upper = top.max(best);
        if upper - best <= tol {
            return Ok(((best, upper), best_theta, best_vec, evals));
        }
        if evals >= MAX_EVALS {
            return Err(Error::Internal(format!(
                "rotation sweep exceeded {MAX_EVALS} evaluations (enclosure {:.3e})",
                upper - best
            )));
        }
        let iv = heap.pop().expect("nonempty heap while refining");
        let mid = 0.5 * (iv.lo + iv.hi);
        let (fmid, v) = eval(mid)?;
        evals += 1;
        if fmid > best {
            best = fmid;
            best_theta = mid;
            best_vec = v;
        }
        heap.push(make_interval(iv.lo, mid, iv.flo, fmid));
        heap.push(make_interval(mid, iv.hi, fmid, iv.fhi));
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

    fn random_matrix(n: usize, rng: &mut ChaCha8Rng) -> ComplexMatrix {
        ComplexMatrix::new(
            n,
            n,
            (0..n * n).map(|_| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect(),
        )
        .unwrap()
    }

    #[test]
    fn rejects_bad_inputs() {
        let m = ComplexMatrix::zeros(2, 3);
        assert!(numerical_radius(&m, 1e-8).is_err());
        let sq = ComplexMatrix::identity(2);
        assert!(numerical_radius(&sq, 0.0).is_err());
        assert!(numerical_radius(&sq, -1.0).is_err());
    }

    #[test]
    fn hermitian_diagonal() {
        let m = ComplexMatrix::from_rows(&[
            vec![c(1.0, 0.0), c(0.0, 0.0)],
            vec![c(0.0, 0.0), c(-2.0, 0.0)],
        ])
        .unwrap();
        let est = numerical_radius(&m, 1e-9).unwrap();
        assert!((est.lower - 2.0).abs() < 1e-8);
        assert!(est.width().unwrap() <= 1e-9);
    }

    #[test]
    fn matrix_unit_is_one_half() {
        // Re(e^{-i theta} E12) has eigenvalues +-1/2 for every theta.
        let e12 = ComplexMatrix::matrix_unit(2, 0, 1);
        let est = numerical_radius(&e12, 1e-9).unwrap();
        assert!((est.lower - 0.5).abs() < 1e-8);
        assert!((est.upper.unwrap() - 0.5).abs() < 1e-8);
    }

    #[test]
    fn unitary_has_radius_one() {
        let u = ComplexMatrix::from_rows(&[
            vec![Complex64::from_polar(1.0, 0.3), c(0.0, 0.0)],
            vec![c(0.0, 0.0), Complex64::from_polar(1.0, -1.1)],
        ])
        .unwrap();
        let est = numerical_radius(&u, 1e-8).unwrap();
        assert!((est.lower - 1.0).abs() < 1e-7);
    }

    #[test]
    fn real_part_cases() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let h = HermitianMatrix::from_upper(3, |r, cidx| {
            if r == cidx { c(rng.gen_range(-1.0..1.0), 0.0) } else { c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)) }
        });
        let re = real_part(&h.to_matrix()).unwrap();
        assert!(re.to_matrix().approx_eq(&h.to_matrix(), 1e-15));

        // Skew-Hermitian K has real part 0.
        let k = ComplexMatrix::from_rows(&[
            vec![c(0.0, 1.0), c(2.0, 3.0)],
            vec![c(-2.0, 3.0), c(0.0, -0.5)],
        ])
        .unwrap();
        assert!((real_part(&k).unwrap().frobenius_norm()) < 1e-15);

        // E12 -> Pauli X / 2.
        let re = real_part(&ComplexMatrix::matrix_unit(2, 0, 1)).unwrap();
        assert_eq!(re.get(0, 1), c(0.5, 0.0));
        assert_eq!(re.get(1, 0), c(0.5, 0.0));
    }

    #[test]
    fn norm_sandwich_on_random_matrices() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..30 {
            let m = random_matrix(4, &mut rng);
            let w = numerical_radius(&m, 1e-8).unwrap();
            let norm = operator_norm(&m);
            assert!(w.upper.unwrap() >= norm / 2.0 - 1e-7);
            assert!(w.lower <= norm + 1e-7);
        }
    }

    #[test]
    fn rotation_invariance() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for _ in 0..10 {
            let m = random_matrix(3, &mut rng);
            let theta = rng.gen_range(0.0..std::f64::consts::TAU);
            let rotated = m.scale(Complex64::from_polar(1.0, theta));
            let a = numerical_radius(&m, 1e-8).unwrap();
            let b = numerical_radius(&rotated, 1e-8).unwrap();
            assert!((a.lower - b.lower).abs() < 2e-8);
        }
    }

    #[test]
    fn subadditivity() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        for _ in 0..10 {
            let s = random_matrix(3, &mut rng);
            let t = random_matrix(3, &mut rng);
            let ws = numerical_radius(&s, 1e-8).unwrap().lower;
            let wt = numerical_radius(&t, 1e-8).unwrap().lower;
            let wsum = numerical_radius(&s.add(&t).unwrap(), 1e-8).unwrap().lower;
            assert!(wsum <= ws + wt + 2e-8);
        }
    }
}
