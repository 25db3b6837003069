//! Joint numerical radius bounds for operator tuples.
//!
//! `w1` optimizes over scalar phases with a certified grid-plus-bisection
//! enclosure; `wk_lower` ascends over k-by-k unitary tuples and only ever
//! claims lower bounds. Upper bounds come from certificates in
//! [`cert`]: block-orthogonal structure or positive tridiagonal
//! completions.

mod cert;

pub use cert::{
    block_orthogonal_wcb, detect_orthogonal_blocks, verify_tridiagonal_certificate,
    wcb_upper_search, wcb_upper_search_with_kappa, CbUpperBound, CertificateCheck,
    TridiagonalCertificate,
};

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use num_complex::Complex64;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::linalg::{hermitian_eigen, operator_norm, ComplexMatrix, HermitianMatrix};
use crate::numrad::{numerical_radius_detailed, Method, RadiusEstimate};

/// Ordered tuple of same-shape square complex matrices.
#[derive(Debug, Clone)]
pub struct OperatorTuple {
    dim: usize,
    matrices: Vec<ComplexMatrix>,
}

impl OperatorTuple {
    pub fn new(matrices: Vec<ComplexMatrix>) -> Result<Self> {
        let first = matrices
            .first()
            .ok_or_else(|| Error::InvalidArgument("operator tuple must be nonempty".into()))?;
        if !first.is_square() {
            return Err(Error::ShapeMismatch(format!(
                "tuple entries must be square, got {}x{}",
                first.rows(),
                first.cols()
            )));
        }
        let dim = first.rows();
        for (i, m) in matrices.iter().enumerate() {
            if m.rows() != dim || m.cols() != dim {
                return Err(Error::ShapeMismatch(format!(
                    "tuple entry {i} is {}x{}, expected {dim}x{dim}",
                    m.rows(),
                    m.cols()
                )));
            }
        }
        Ok(Self { dim, matrices })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.matrices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.matrices.is_empty()
    }

    pub fn get(&self, i: usize) -> &ComplexMatrix {
        &self.matrices[i]
    }

    pub fn matrices(&self) -> &[ComplexMatrix] {
        &self.matrices
    }

    pub fn scale(&self, s: Complex64) -> Self {
        Self { dim: self.dim, matrices: self.matrices.iter().map(|m| m.scale(s)).collect() }
    }

    pub fn operator_norms(&self) -> Vec<f64> {
        self.matrices.iter().map(operator_norm).collect()
    }

    /// `sum_i U_i (x) x_i` for unitaries (or any k-by-k matrices) `U`.
    pub fn couple(&self, couplers: &[ComplexMatrix]) -> Result<ComplexMatrix> {
        if couplers.len() != self.len() {
            return Err(Error::ShapeMismatch(format!(
                "{} couplers for {} tuple entries",
                couplers.len(),
                self.len()
            )));
        }
        let k = couplers[0].rows();
        let mut acc = ComplexMatrix::zeros(k * self.dim, k * self.dim);
        for (u, x) in couplers.iter().zip(&self.matrices) {
            if u.rows() != k || u.cols() != k {
                return Err(Error::ShapeMismatch("couplers must share one square shape".into()));
            }
            acc = acc.add(&u.kron(x))?;
        }
        Ok(acc)
    }
}

/// Internal tolerance used when the operation signature carries none.
pub(crate) const SEARCH_TOL: f64 = 1e-8;

/// Joint radius over scalar couplings (k = 1), with a certified enclosure
/// for d <= 3 and a multistart lower bound plus the coarse upper
/// `sum_i w(x_i)` beyond that.
pub fn w1(t: &OperatorTuple, tol: f64, seed: u64) -> Result<RadiusEstimate> {
    w1_with_phases(t, tol, seed).map(|(e, _)| e)
}

pub fn w1_with_phases(t: &OperatorTuple, tol: f64, seed: u64) -> Result<(RadiusEstimate, Vec<f64>)> {
    if tol <= 0.0 {
        return Err(Error::InvalidArgument("tolerance must be positive".into()));
    }
    let d = t.len();
    let norms = t.operator_norms();
    let scale = norms.iter().cloned().fold(0.0f64, f64::max);
    if scale == 0.0 {
        return Ok((
            RadiusEstimate::new(0.0, Some(0.0), Method::Sweep, Some(Method::Sweep), 0)?,
            vec![0.0; d],
        ));
    }

    // A single operator absorbs its phase into the rotation sweep.
    if d == 1 {
        let detail = numerical_radius_detailed(t.get(0), tol)?;
        let phases = vec![-detail.theta];
        return Ok((detail.estimate, phases));
    }
    // Orthogonal supports make the coupled operator block diagonal for
    // every scalar coupling: the value is exactly max_i w(x_i).
    if let Some(partition) = cert::detect_orthogonal_blocks(t) {
        let est = cert::block_orthogonal_wcb(t, &partition, tol)?;
        return Ok((est, vec![0.0; d]));
    }

    let normalized = t.scale(Complex64::new(1.0 / scale, 0.0));
    let lipschitz: Vec<f64> = norms.iter().map(|&n| n / scale).collect();
    let tol_n = tol / scale;

    if d <= 3 {
        let (lower, upper, phases, evals) = phase_branch_bound(&normalized, &lipschitz, tol_n)?;
        let est = RadiusEstimate::new(
            lower * scale,
            Some(upper * scale),
            Method::Sweep,
            Some(Method::Sweep),
            evals,
        )?;
        Ok((est, phases))
    } else {
        let (lower, phases, evals) = phase_multistart(&normalized, 8, seed)?;
        // Coarse fallback upper bound: w is subadditive.
        let mut upper = 0.0;
        let mut iters = evals;
        for x in normalized.matrices() {
            let est = numerical_radius_detailed(x, tol_n.max(1e-10))?;
            upper += est.estimate.upper.expect("sweep always returns an upper bound");
            iters += est.estimate.iterations;
        }
        let est = RadiusEstimate::new(
            lower * scale,
            Some(upper.max(lower) * scale),
            Method::Ascent,
            Some(Method::Sweep),
            iters,
        )?;
        Ok((est, phases))
    }
}

/// Top eigenvalue of `Re(sum_i e^{i psi_i} x_i)`: the phase objective.
/// A rotation of the whole sum folds into the phases, so maximizing this
/// over the torus equals the scalar-coupling joint radius.
fn phase_objective(t: &OperatorTuple, phases: &[f64]) -> Result<f64> {
    let p = t.dim();
    let mut sum = ComplexMatrix::zeros(p, p);
    for (x, &psi) in t.matrices().iter().zip(phases) {
        sum = sum.add(&x.scale(Complex64::from_polar(1.0, psi)))?;
    }
    let h = HermitianMatrix::from_upper(p, |r, c| (sum.get(r, c) + sum.get(c, r).conj()) * 0.5);
    Ok(hermitian_eigen(&h)?.max())
}

struct PhaseBox {
    upper: f64,
    center: Vec<f64>,
    widths: Vec<f64>,
}

impl PartialEq for PhaseBox {
    fn eq(&self, other: &Self) -> bool {
        self.upper == other.upper
    }
}
impl Eq for PhaseBox {}
impl PartialOrd for PhaseBox {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for PhaseBox {
    fn cmp(&self, other: &Self) -> Ordering {
        self.upper.partial_cmp(&other.upper).unwrap_or(Ordering::Equal)
    }
}

const PHASE_GRID: usize = 64;
const MAX_PHASE_EVALS: usize = 3_000_000;

/// The phase objective is a max over unit vectors of a separable sum of
/// cosines with per-axis amplitude at most |x_i|, so a box of widths w_i
/// around an evaluated center overshoots by at most sum_i |x_i| w_i^2 / 8.
fn slack(lipschitz: &[f64], widths: &[f64]) -> f64 {
    lipschitz.iter().zip(widths).map(|(l, w)| l * w * w / 8.0).sum()
}

fn phase_branch_bound(
    t: &OperatorTuple,
    lipschitz: &[f64],
    tol: f64,
) -> Result<(f64, f64, Vec<f64>, usize)> {
    let d = t.len();
    let two_pi = std::f64::consts::TAU;
    let per_axis = match d {
        1 | 2 => PHASE_GRID,
        _ => PHASE_GRID,
    };
    let h = two_pi / per_axis as f64;

    let mut heap: BinaryHeap<PhaseBox> = BinaryHeap::new();
    let mut best = f64::NEG_INFINITY;
    let mut best_phases = vec![0.0; d];
    let mut evals = 0usize;

    // Initial grid of box centers, 64 per phase.
    let mut idx = vec![0usize; d];
    loop {
        let center: Vec<f64> = idx.iter().map(|&i| (i as f64 + 0.5) * h).collect();
        let value = phase_objective(t, &center)?;
        evals += 1;
        if value > best {
            best = value;
            best_phases = center.clone();
        }
        let widths = vec![h; d];
        let upper = value + slack(lipschitz, &widths);
        heap.push(PhaseBox { upper, center, widths });

        let mut axis = 0;
        loop {
            if axis == d {
                break;
            }
            idx[axis] += 1;
            if idx[axis] < per_axis {
                break;
            }
            idx[axis] = 0;
            axis += 1;
        }
        if axis == d {
            break;
        }
    }

    loop {
        let upper_global = heap.peek().map(|b| b.upper).unwrap_or(best).max(best);
        if upper_global - best <= tol {
            return Ok((best, upper_global, best_phases, evals));
        }
        if evals >= MAX_PHASE_EVALS {
            return Err(Error::Internal(format!(
                "phase sweep exceeded {MAX_PHASE_EVALS} evaluations (enclosure {:.3e})",
                upper_global - best
            )));
        }
        let b = heap.pop().expect("nonempty heap");
        // Split along the axis with the largest Lipschitz-weighted width.
        let axis = (0..d)
            .max_by(|&i, &j| {
                (lipschitz[i] * b.widths[i])
                    .partial_cmp(&(lipschitz[j] * b.widths[j]))
                    .unwrap_or(Ordering::Equal)
            })
            .expect("nonempty dims");
        let mut widths = b.widths.clone();
        widths[axis] /= 2.0;
        for side in [-1.0, 1.0] {
            let mut center = b.center.clone();
            center[axis] += side * widths[axis] / 2.0;
            let value = phase_objective(t, &center)?;
            evals += 1;
            if value > best {
                best = value;
                best_phases = center.clone();
            }
            heap.push(PhaseBox {
                upper: value + slack(lipschitz, &widths),
                center,
                widths: widths.clone(),
            });
        }
    }
}

/// Multistart coordinate ascent over phases (used for d > 3).
fn phase_multistart(t: &OperatorTuple, starts: usize, seed: u64) -> Result<(f64, Vec<f64>, usize)> {
    let d = t.len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best = f64::NEG_INFINITY;
    let mut best_phases = vec![0.0; d];
    let mut evals = 0usize;
    for s in 0..starts.max(1) {
        let mut phases: Vec<f64> = if s == 0 {
            vec![0.0; d]
        } else {
            (0..d).map(|_| rng.gen_range(0.0..std::f64::consts::TAU)).collect()
        };
        let mut value = phase_objective(t, &phases)?;
        evals += 1;
        for _round in 0..4 {
            let mut improved = false;
            for axis in 0..d {
                let mut lo = phases[axis] - std::f64::consts::PI / 2.0;
                let mut hi = phases[axis] + std::f64::consts::PI / 2.0;
                const INVPHI: f64 = 0.618_033_988_749_894_9;
                let mut x1 = hi - INVPHI * (hi - lo);
                let mut x2 = lo + INVPHI * (hi - lo);
                let mut p1 = phases.clone();
                p1[axis] = x1;
                let mut p2 = phases.clone();
                p2[axis] = x2;
                let mut f1 = phase_objective(t, &p1)?;
                let mut f2 = phase_objective(t, &p2)?;
                evals += 2;
                for _ in 0..20 {
                    if f1 < f2 {
                        lo = x1;
                        x1 = x2;
                        f1 = f2;
                        x2 = lo + INVPHI * (hi - lo);
                        let mut p = phases.clone();
                        p[axis] = x2;
                        f2 = phase_objective(t, &p)?;
                    } else {
                        hi = x2;
                        x2 = x1;
                        f2 = f1;
                        x1 = hi - INVPHI * (hi - lo);
                        let mut p = phases.clone();
                        p[axis] = x1;
                        f1 = phase_objective(t, &p)?;
                    }
                    evals += 1;
                }
                let (x, f) = if f1 > f2 { (x1, f1) } else { (x2, f2) };
                if f > value + 1e-13 {
                    phases[axis] = x;
                    value = f;
                    improved = true;
                }
            }
            if !improved {
                break;
            }
        }
        if value > best {
            best = value;
            best_phases = phases;
        }
    }
    Ok((best, best_phases, evals))
}

/// Witness data for a `wk_lower` value: the unitary tuple, the maximizing
/// rotation, and the maximizing unit vector of the coupled operator.
#[derive(Debug, Clone)]
pub struct WkWitness {
    pub k: usize,
    pub unitaries: Vec<ComplexMatrix>,
    pub theta: f64,
    pub vector: Vec<Complex64>,
    pub value: f64,
}

/// Lower bound for the level-k joint radius via multiplicative ascent over
/// unitary tuples. Upper bounds are never claimed here.
///
/// Monotonicity in k holds by construction: the level-k search folds in the
/// level-(k-1) result through a diagonal embedding before its own restarts.
pub fn wk_lower(t: &OperatorTuple, k: usize, restarts: usize, seed: u64) -> Result<RadiusEstimate> {
    wk_lower_with_witness(t, k, restarts, seed).map(|(e, _)| e)
}

pub fn wk_lower_with_witness(
    t: &OperatorTuple,
    k: usize,
    restarts: usize,
    seed: u64,
) -> Result<(RadiusEstimate, WkWitness)> {
    if k == 0 {
        return Err(Error::InvalidArgument("k must be >= 1".into()));
    }
    let norms = t.operator_norms();
    let scale = norms.iter().cloned().fold(0.0f64, f64::max);
    if scale == 0.0 {
        let est = RadiusEstimate::new(0.0, None, Method::Ascent, None, 0)?;
        let witness = WkWitness {
            k,
            unitaries: vec![ComplexMatrix::identity(k); t.len()],
            theta: 0.0,
            vector: unit_basis(k * t.dim()),
            value: 0.0,
        };
        return Ok((est, witness));
    }
    let normalized = t.scale(Complex64::new(1.0 / scale, 0.0));
    let (value, witness_n, iters) = wk_search(&normalized, k, restarts.max(1), seed)?;
    let est = RadiusEstimate::new(value * scale, None, Method::Ascent, None, iters)?;
    let witness = WkWitness {
        k,
        unitaries: witness_n.unitaries,
        theta: witness_n.theta,
        vector: witness_n.vector,
        value: value * scale,
    };
    Ok((est, witness))
}

fn unit_basis(n: usize) -> Vec<Complex64> {
    let mut v = vec![Complex64::new(0.0, 0.0); n];
    v[0] = Complex64::new(1.0, 0.0);
    v
}

fn wk_search(t: &OperatorTuple, k: usize, restarts: usize, seed: u64) -> Result<(f64, WkWitness, usize)> {
    // Level 1 is the scalar phase problem, shared with the public entry
    // point so the level ladder never undercuts it.
    let (w1_est, w1_phases) = w1_with_phases(t, SEARCH_TOL, seed)?;
    let (w1_lower, mut iters) = (w1_est.lower, w1_est.iterations);
    let diag_witness = |k: usize| -> Vec<ComplexMatrix> {
        w1_phases
            .iter()
            .map(|&psi| ComplexMatrix::identity(k).scale(Complex64::from_polar(1.0, psi)))
            .collect()
    };
    if k == 1 {
        let unitaries = diag_witness(1);
        let m = t.couple(&unitaries)?;
        let detail = crate::numrad::radius_lower(&m)?;
        iters += detail.evaluations;
        let value = w1_lower.max(detail.value);
        let witness = WkWitness {
            k: 1,
            unitaries,
            theta: detail.theta,
            vector: detail.vector,
            value,
        };
        return Ok((value, witness, iters));
    }

    // Embed the level-(k-1) result for guaranteed monotonicity.
    let (prev_value, prev_witness, prev_iters) = wk_search(t, k - 1, (restarts / 2).max(1), seed)?;
    iters += prev_iters;
    let embedded: Vec<ComplexMatrix> = prev_witness
        .unitaries
        .iter()
        .map(|u| {
            let mut big = ComplexMatrix::identity(k);
            big.set_block(0, 0, u);
            big
        })
        .collect();

    let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(k as u64));
    let mut best_value = prev_value;
    let mut best_unitaries = embedded.clone();

    for r in 0..restarts {
        let init: Vec<ComplexMatrix> = if r == 0 {
            diag_witness(k)
        } else if r == 1 {
            embedded.clone()
        } else {
            (0..t.len()).map(|_| random_unitary(k, &mut rng)).collect()
        };
        let (value, unitaries, used) = ascend(t, init)?;
        iters += used;
        if value > best_value {
            best_value = value;
            best_unitaries = unitaries;
        }
    }

    let m = t.couple(&best_unitaries)?;
    let detail = crate::numrad::radius_lower(&m)?;
    iters += detail.evaluations;
    let value = detail.value.max(prev_value).max(w1_lower);
    let witness = WkWitness {
        k,
        unitaries: best_unitaries,
        theta: detail.theta,
        vector: detail.vector,
        value,
    };
    Ok((value, witness, iters))
}

const ASCENT_ITERS: usize = 40;

fn ascend(t: &OperatorTuple, mut unitaries: Vec<ComplexMatrix>) -> Result<(f64, Vec<ComplexMatrix>, usize)> {
    let p = t.dim();
    let k = unitaries[0].rows();
    let mut iters = 0usize;
    let m = t.couple(&unitaries)?;
    let mut detail = crate::numrad::radius_lower(&m)?;
    iters += detail.evaluations;
    let mut value = detail.value;

    for _ in 0..ASCENT_ITERS {
        // First-order direction from the maximizing vector: the objective
        // linearizes as Re e^{-i theta} sum_i tr(U_i V x_i^T V*).
        let mut vmat = ComplexMatrix::zeros(k, p);
        for a in 0..k {
            for b in 0..p {
                vmat.set(a, b, detail.vector[a * p + b]);
            }
        }
        let rot = Complex64::from_polar(1.0, -detail.theta);
        let mut directions = Vec::with_capacity(t.len());
        let mut total = 0.0f64;
        for (u, x) in unitaries.iter().zip(t.matrices()) {
            let xt = transpose(x);
            let g = vmat.mul(&xt)?.mul(&vmat.adjoint())?;
            let z = u.mul(&g)?.scale(rot);
            // Skew part; the ascent direction is its negative.
            let skew = z.sub(&z.adjoint())?.scale(Complex64::new(0.5, 0.0));
            total += skew.frobenius_norm().powi(2);
            directions.push(skew.scale(Complex64::new(-1.0, 0.0)));
        }
        let total = total.sqrt();
        if total < 1e-12 {
            break;
        }
        for dir in directions.iter_mut() {
            *dir = dir.scale(Complex64::new(1.0 / total, 0.0));
        }

        let mut improved = false;
        let mut step = 0.5f64;
        while step > 1e-5 {
            let candidate: Vec<ComplexMatrix> = unitaries
                .iter()
                .zip(&directions)
                .map(|(u, dir)| Ok(expm_skew(&dir.scale(Complex64::new(step, 0.0)))?.mul(u)?))
                .collect::<Result<_>>()?;
            let m = t.couple(&candidate)?;
            let cand_detail = crate::numrad::radius_lower(&m)?;
            iters += cand_detail.evaluations;
            if cand_detail.value > value + 1e-12 {
                unitaries = candidate;
                value = cand_detail.value;
                detail = cand_detail;
                improved = true;
                break;
            }
            step *= 0.25;
        }
        if !improved {
            break;
        }
    }
    Ok((value, unitaries, iters))
}

fn transpose(m: &ComplexMatrix) -> ComplexMatrix {
    let mut out = ComplexMatrix::zeros(m.cols(), m.rows());
    for r in 0..m.rows() {
        for c in 0..m.cols() {
            out.set(c, r, m.get(r, c));
        }
    }
    out
}

/// Exponential of a skew-Hermitian matrix via the Hermitian spectral
/// decomposition of iK.
pub(crate) fn expm_skew(k: &ComplexMatrix) -> Result<ComplexMatrix> {
    let a = k.scale(Complex64::new(0.0, 1.0)); // iK is Hermitian
    let h = HermitianMatrix::new(&a)?;
    let eig = hermitian_eigen(&h)?;
    let n = h.dim();
    let mut out = ComplexMatrix::zeros(n, n);
    for r in 0..n {
        for c in 0..n {
            let mut s = Complex64::new(0.0, 0.0);
            for j in 0..n {
                let phase = Complex64::from_polar(1.0, -eig.values[j]);
                s += eig.vectors.get(r, j) * phase * eig.vectors.get(c, j).conj();
            }
            out.set(r, c, s);
        }
    }
    Ok(out)
}

pub(crate) fn random_unitary(k: usize, rng: &mut ChaCha8Rng) -> ComplexMatrix {
    let mut kmat = ComplexMatrix::zeros(k, k);
    for r in 0..k {
        kmat.set(r, r, Complex64::new(0.0, rng.gen_range(-1.5..1.5)));
        for c in (r + 1)..k {
            let z = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            kmat.set(r, c, z);
            kmat.set(c, r, -z.conj());
        }
    }
    expm_skew(&kmat).expect("skew exponential of a finite matrix")
}

pub(crate) fn is_unitary(m: &ComplexMatrix, tol: f64) -> bool {
    if !m.is_square() {
        return false;
    }
    let gram = m.adjoint().mul(m).expect("square dims");
    gram.approx_eq(&ComplexMatrix::identity(m.rows()), tol)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn scalar_tuple(values: &[Complex64]) -> OperatorTuple {
        OperatorTuple::new(
            values.iter().map(|&v| ComplexMatrix::new(1, 1, vec![v]).unwrap()).collect(),
        )
        .unwrap()
    }

    #[test]
    fn tuple_validation() {
        assert!(OperatorTuple::new(vec![]).is_err());
        let a = ComplexMatrix::identity(2);
        let b = ComplexMatrix::identity(3);
        assert!(OperatorTuple::new(vec![a.clone(), b]).is_err());
        assert!(OperatorTuple::new(vec![a.clone(), a]).is_ok());
    }

    #[test]
    fn w1_of_scalars_is_modulus_sum() {
        let t = scalar_tuple(&[c(0.3, 0.4), c(0.0, -1.0), c(0.6, 0.0)]);
        let est = w1(&t, 1e-8, 0).unwrap();
        assert!((est.lower - 2.1).abs() < 1e-7, "got {}", est.lower);
        assert!(est.width().unwrap() <= 1e-8);
    }

    #[test]
    fn w1_block_diagonal_pair() {
        // E12 in two orthogonal 2x2 blocks of M4: radius 1/2.
        let mut x1 = ComplexMatrix::zeros(4, 4);
        x1.set(0, 1, c(1.0, 0.0));
        let mut x2 = ComplexMatrix::zeros(4, 4);
        x2.set(2, 3, c(1.0, 0.0));
        let t = OperatorTuple::new(vec![x1, x2]).unwrap();
        let est = w1(&t, 1e-7, 0).unwrap();
        assert!((est.lower - 0.5).abs() < 1e-6, "got {}", est.lower);
    }

    #[test]
    fn wk_reduces_to_w1_at_level_one() {
        use rand::prelude::*;
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..5 {
            let mats: Vec<ComplexMatrix> = (0..2)
                .map(|_| {
                    ComplexMatrix::new(
                        2,
                        2,
                        (0..4).map(|_| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect(),
                    )
                    .unwrap()
                })
                .collect();
            let t = OperatorTuple::new(mats).unwrap();
            let a = w1(&t, 1e-7, 3).unwrap();
            let b = wk_lower(&t, 1, 4, 3).unwrap();
            assert!(b.lower >= a.lower - 1e-6);
            assert!(b.lower <= a.upper.unwrap() + 1e-6);
            assert!(b.upper.is_none());
        }
    }

    #[test]
    fn single_matrix_wk_equals_w() {
        let x = ComplexMatrix::from_rows(&[
            vec![c(0.0, 0.0), c(1.0, 0.5)],
            vec![c(0.2, 0.0), c(0.0, -0.3)],
        ])
        .unwrap();
        let t = OperatorTuple::new(vec![x.clone()]).unwrap();
        let w = numerical_radius_detailed(&x, 1e-9).unwrap().estimate;
        for k in 1..=3usize {
            let est = wk_lower(&t, k, 4, 1).unwrap();
            assert!(est.lower >= w.lower - 1e-6, "k={k}");
            assert!(est.lower <= w.upper.unwrap() + 1e-6, "k={k}");
        }
    }

    #[test]
    fn wk_monotone_in_k() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let mats: Vec<ComplexMatrix> = (0..2)
            .map(|_| {
                ComplexMatrix::new(
                    3,
                    3,
                    (0..9).map(|_| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect(),
                )
                .unwrap()
            })
            .collect();
        let t = OperatorTuple::new(mats).unwrap();
        let k1 = wk_lower(&t, 1, 4, 9).unwrap();
        let k2 = wk_lower(&t, 2, 8, 9).unwrap();
        let k3 = wk_lower(&t, 3, 16, 9).unwrap();
        assert!(k1.lower <= k2.lower + 1e-9);
        assert!(k2.lower <= k3.lower + 1e-9);
    }

    #[test]
    fn expm_skew_is_unitary() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for k in 1..=4usize {
            let u = random_unitary(k, &mut rng);
            assert!(is_unitary(&u, 1e-10), "k={k}");
        }
    }

    #[test]
    fn homogeneity_of_bounds() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let mats: Vec<ComplexMatrix> = (0..2)
            .map(|_| {
                ComplexMatrix::new(
                    2,
                    2,
                    (0..4).map(|_| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect(),
                )
                .unwrap()
            })
            .collect();
        let t = OperatorTuple::new(mats).unwrap();
        let base = wk_lower(&t, 2, 4, 5).unwrap();
        let scaled = wk_lower(&t.scale(c(3.0, 0.0)), 2, 4, 5).unwrap();
        assert!((scaled.lower - 3.0 * base.lower).abs() < 1e-8 * scaled.lower.max(1.0));
    }
}
