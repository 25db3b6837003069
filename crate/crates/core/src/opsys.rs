//! The operator system spanned by the identity and one matrix-unit pair
//! per 2x2 summand, as concrete data: blockwise positivity, UCP and
//! k-positivity certification of generator assignments, the
//! trace-obstruction computation, and closed-form bound calculators.

use num_complex::Complex64;

use crate::defaults::{BALL_CAP, FEAS_MAX_ITER, KAPPA};
use crate::error::{Error, Result};
use crate::groups::{ball_enumerate, re_norm_lower, rep_operator_on_ball, GroupSpec};
use crate::jointrad::{
    block_orthogonal_wcb, detect_orthogonal_blocks, is_unitary, wcb_upper_search,
    wcb_upper_search_with_kappa, wk_lower_with_witness, OperatorTuple, WkWitness,
};
use crate::linalg::{
    hermitian_eigen, psd_check, ComplexMatrix, HermitianMatrix, PsdVerdict, SparseOperator,
};
use crate::numrad::numerical_radius;

/// Element `A0 (x) I + sum_i A_i (x) E12_i + A_i* (x) E21_i` of
/// `M_p (x) U_n`, Hermitian by construction.
#[derive(Debug, Clone)]
pub struct UnElement {
    a0: HermitianMatrix,
    coeffs: Vec<ComplexMatrix>,
}

impl UnElement {
    pub fn new(a0: HermitianMatrix, coeffs: Vec<ComplexMatrix>) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::InvalidArgument("element needs at least one generator coefficient".into()));
        }
        let p = a0.dim();
        for (i, m) in coeffs.iter().enumerate() {
            if m.rows() != p || m.cols() != p {
                return Err(Error::ShapeMismatch(format!(
                    "coefficient {i} is {}x{}, identity coefficient is {p}x{p}",
                    m.rows(),
                    m.cols()
                )));
            }
        }
        Ok(Self { a0, coeffs })
    }

    pub fn n(&self) -> usize {
        self.coeffs.len()
    }

    pub fn dim(&self) -> usize {
        self.a0.dim()
    }

    pub fn identity_coeff(&self) -> &HermitianMatrix {
        &self.a0
    }

    pub fn generator_coeffs(&self) -> &[ComplexMatrix] {
        &self.coeffs
    }

    /// The 2p x 2p block `[[A0, A_i], [A_i*, A0]]`: the i-th summand of
    /// the element under the direct-sum decomposition.
    pub fn block(&self, i: usize) -> HermitianMatrix {
        let p = self.dim();
        HermitianMatrix::from_upper(2 * p, |r, c| {
            match (r < p, c < p) {
                (true, true) => self.a0.get(r, c),
                (true, false) => self.coeffs[i].get(r, c - p),
                (false, false) => self.a0.get(r - p, c - p),
                (false, true) => unreachable!("from_upper only visits the upper triangle"),
            }
        })
    }
}

#[derive(Debug, Clone)]
pub enum UnPositivity {
    Psd,
    NotPsd {
        block: usize,
        eigenvalue: f64,
        witness: Vec<Complex64>,
    },
}

impl UnPositivity {
    pub fn is_psd(&self) -> bool {
        matches!(self, UnPositivity::Psd)
    }
}

/// Positivity in `M_p (x) U_n` decomposes blockwise: the element is PSD
/// iff every 2x2 block `[[A0, A_i], [A_i*, A0]]` is.
pub fn un_positivity(e: &UnElement, tol: f64) -> Result<UnPositivity> {
    for i in 0..e.n() {
        match psd_check(&e.block(i), tol)? {
            PsdVerdict::Psd => {}
            PsdVerdict::NotPsd { eigenvalue, witness } => {
                return Ok(UnPositivity::NotPsd { block: i, eigenvalue, witness });
            }
        }
    }
    Ok(UnPositivity::Psd)
}

/// The generator tuple: E12 in the i-th of n orthogonal 2x2 blocks of
/// M_{2n}.
pub fn un_generators(n: usize) -> OperatorTuple {
    let p = 2 * n;
    OperatorTuple::new((0..n).map(|i| ComplexMatrix::matrix_unit(p, 2 * i, 2 * i + 1)).collect())
        .expect("matrix units share shape")
}

/// Normalized trace on M_p.
pub fn normalized_trace(m: &ComplexMatrix) -> f64 {
    m.trace().re / m.rows() as f64
}

/// Exact upper bound (in fact the exact value) of the cb joint radius for
/// structured tuples: scalars, a single operator, entrywise-nonnegative
/// matrices, or orthogonal block supports.
#[derive(Debug, Clone)]
pub struct WcbCertificate {
    pub upper: f64,
    pub kind: &'static str,
}

const DENSE_NONNEG_CAP: usize = 512;

pub fn exact_wcb_certificate(t: &OperatorTuple, tol: f64) -> Result<Option<WcbCertificate>> {
    let p = t.dim();
    if p == 1 {
        let sum: f64 = t.matrices().iter().map(|m| m.get(0, 0).norm()).sum();
        return Ok(Some(WcbCertificate { upper: sum, kind: "scalar-tuple" }));
    }
    if t.len() == 1 {
        let est = numerical_radius(t.get(0), tol.max(1e-10))?;
        return Ok(Some(WcbCertificate { upper: est.upper.expect("sweep upper"), kind: "single-operator" }));
    }
    let scale = t.matrices().iter().map(|m| m.max_abs()).fold(1.0f64, f64::max);
    let nonneg = t.matrices().iter().all(|m| {
        m.entries().iter().all(|z| z.im.abs() <= 1e-14 * scale && z.re >= -1e-14 * scale)
    });
    if nonneg && p <= DENSE_NONNEG_CAP {
        // Entrywise domination collapses all coupling levels to the top
        // eigenvalue of the real part of the plain sum.
        let mut sum = ComplexMatrix::zeros(p, p);
        for m in t.matrices() {
            sum = sum.add(m)?;
        }
        let h = HermitianMatrix::from_upper(p, |r, c| (sum.get(r, c) + sum.get(c, r).conj()) * 0.5);
        let lam = hermitian_eigen(&h)?.max();
        return Ok(Some(WcbCertificate {
            upper: lam + 1e-9 * lam.abs().max(1.0),
            kind: "nonnegative-entries",
        }));
    }
    if let Some(partition) = detect_orthogonal_blocks(t) {
        let est = block_orthogonal_wcb(t, &partition, tol.max(1e-10))?;
        return Ok(Some(WcbCertificate { upper: est.upper.expect("certificate upper"), kind: "block-orthogonal" }));
    }
    Ok(None)
}

/// A verified positivity violation: an element PSD in `M_k (x) U_n`
/// whose image under the generator assignment has a negative direction.
#[derive(Debug, Clone)]
pub struct PositivityViolation {
    pub element: UnElement,
    pub image: HermitianMatrix,
    pub image_min_eigenvalue: f64,
    pub witness_vector: Vec<Complex64>,
    pub quadratic_form: f64,
    pub cross_validated: bool,
}

#[derive(Debug, Clone)]
pub enum KposVerdict {
    PositiveRefuted {
        k: usize,
        value: f64,
        violation: PositivityViolation,
    },
    Consistent {
        lower: f64,
        upper: Option<f64>,
    },
}

impl KposVerdict {
    pub fn is_refuted(&self) -> bool {
        matches!(self, KposVerdict::PositiveRefuted { .. })
    }
}

const HALF_TOL: f64 = 1e-9;

/// k-positivity test for the map sending the i-th generator to `x_i`:
/// refuted exactly when the level-k joint radius exceeds 1/2.
pub fn kpos_check(x: &OperatorTuple, k: usize, budget: usize, seed: u64) -> Result<KposVerdict> {
    if k == 0 {
        return Err(Error::InvalidArgument("k must be >= 1".into()));
    }
    let (est, witness) = wk_lower_with_witness(x, k, budget.max(1), seed)?;
    if est.lower > 0.5 + HALF_TOL {
        let violation = build_violation(x, &witness)?;
        return Ok(KposVerdict::PositiveRefuted { k, value: est.lower, violation });
    }
    let upper = exact_wcb_certificate(x, HALF_TOL)?.map(|c| c.upper);
    Ok(KposVerdict::Consistent { lower: est.lower, upper })
}

/// Turns a witness with value w > 1/2 into a concrete positivity
/// violation: rotate the couplers so the pairing is -w, then
/// `I + sum_i A_i (x) x_i + h.c.` has quadratic form 1 - 2w < 0 while the
/// element itself is PSD (all couplers are unitary).
fn build_violation(x: &OperatorTuple, witness: &WkWitness) -> Result<PositivityViolation> {
    let k = witness.k;
    let coupled = x.couple(&witness.unitaries)?;
    let v = &witness.vector;
    let pairing: Complex64 = {
        let mv = coupled.matvec(v);
        mv.iter().zip(v).map(|(a, b)| a * b.conj()).sum()
    };
    let phase = if pairing.norm() > 0.0 {
        -pairing.conj() / pairing.norm()
    } else {
        Complex64::new(-1.0, 0.0)
    };
    let rotated: Vec<ComplexMatrix> = witness.unitaries.iter().map(|u| u.scale(phase)).collect();
    let element = UnElement::new(HermitianMatrix::identity(k), rotated.clone())?;

    let kp = coupled.rows();
    let shifted = coupled.scale(phase);
    let image = HermitianMatrix::from_upper(kp, |r, c| {
        let base = if r == c { Complex64::new(1.0, 0.0) } else { Complex64::new(0.0, 0.0) };
        base + (shifted.get(r, c) + shifted.get(c, r).conj())
    });
    let quadratic_form = image.quadratic_form(v);
    let image_min_eigenvalue = hermitian_eigen(&image)?.min();
    let cross_validated =
        un_positivity(&element, HALF_TOL)?.is_psd() && quadratic_form < -HALF_TOL;
    Ok(PositivityViolation {
        element,
        image,
        image_min_eigenvalue,
        witness_vector: v.clone(),
        quadratic_form,
        cross_validated,
    })
}

#[derive(Debug, Clone)]
pub enum UcpVerdict {
    Certified {
        upper: f64,
        kind: String,
    },
    Refuted {
        k: usize,
        value: f64,
        violation: PositivityViolation,
    },
    Undecided {
        lower: f64,
        upper: Option<f64>,
    },
}

impl UcpVerdict {
    pub fn as_str(&self) -> &'static str {
        match self {
            UcpVerdict::Certified { .. } => "UCP_CERTIFIED",
            UcpVerdict::Refuted { .. } => "REFUTED",
            UcpVerdict::Undecided { .. } => "UNDECIDED",
        }
    }
}

/// UCP trichotomy for the generator assignment `E12_i -> x_i`: certified
/// when a cb upper bound of at most 1/2 exists, refuted when some level-k
/// lower bound exceeds 1/2, undecided otherwise.
pub fn ucp_check(x: &OperatorTuple, budget: usize, seed: u64) -> Result<UcpVerdict> {
    let exact = exact_wcb_certificate(x, HALF_TOL)?;
    if let Some(cert) = &exact {
        if cert.upper <= 0.5 + HALF_TOL {
            return Ok(UcpVerdict::Certified { upper: cert.upper, kind: cert.kind.to_string() });
        }
    }
    let mut best_lower = 0.0f64;
    for k in 1..=3usize {
        match kpos_check(x, k, budget.max(1), seed.wrapping_add(k as u64))? {
            KposVerdict::PositiveRefuted { k, value, violation } => {
                return Ok(UcpVerdict::Refuted { k, value, violation });
            }
            KposVerdict::Consistent { lower, .. } => best_lower = best_lower.max(lower),
        }
    }
    let mut upper = exact.map(|c| c.upper);
    if upper.is_none() && x.dim() <= 8 {
        let ub = wcb_upper_search(x, FEAS_MAX_ITER.min(2000), 1e-3, seed)?;
        if ub.bound <= 0.5 + HALF_TOL {
            return Ok(UcpVerdict::Certified { upper: ub.bound, kind: "kappa-certificate".into() });
        }
        upper = Some(ub.bound);
    }
    Ok(UcpVerdict::Undecided { lower: best_lower, upper })
}

/// The 2x2 Choi-type block `[[P, x], [x*, Q]]`.
#[derive(Debug, Clone)]
pub struct ChoiBlockPair {
    pub p: HermitianMatrix,
    pub x: ComplexMatrix,
    pub q: HermitianMatrix,
}

impl ChoiBlockPair {
    pub fn new(p: HermitianMatrix, x: ComplexMatrix, q: HermitianMatrix) -> Result<Self> {
        let d = p.dim();
        if q.dim() != d || x.rows() != d || x.cols() != d {
            return Err(Error::ShapeMismatch("block pair needs three matrices of one dimension".into()));
        }
        Ok(Self { p, x, q })
    }

    pub fn assemble(&self) -> HermitianMatrix {
        let d = self.p.dim();
        HermitianMatrix::from_upper(2 * d, |r, c| match (r < d, c < d) {
            (true, true) => self.p.get(r, c),
            (true, false) => self.x.get(r, c - d),
            (false, false) => self.q.get(r - d, c - d),
            (false, true) => unreachable!("upper triangle only"),
        })
    }
}

#[derive(Debug, Clone)]
pub struct TraceBound {
    /// The certified lower bound 1/w for tau(P + Q).
    pub bound: f64,
    /// The computed tau(P + Q).
    pub value: f64,
    /// `value - bound`, asserted >= -tol.
    pub slack: f64,
    /// The conjugated 2x2 scalar matrix [[tau P, -1/2w], [-1/2w, tau Q]].
    pub scalar_matrix: [[f64; 2]; 2],
}

/// Trace obstruction for one Choi block: a PSD pair with a unitary
/// off-diagonal `u/(2w)` forces `tau(P + Q) >= 1/w`. The conjugated
/// scalar matrix is recomputed and its entry sum checked, so the returned
/// inequality is verified, not assumed.
pub fn choi_block_trace_bound(
    b: &ChoiBlockPair,
    u: &ComplexMatrix,
    w: f64,
    tol: f64,
) -> Result<TraceBound> {
    if tol <= 0.0 {
        return Err(Error::InvalidArgument("tolerance must be positive".into()));
    }
    if !(w.is_finite() && w > 0.0) {
        return Err(Error::InvalidArgument("w must be finite and positive".into()));
    }
    if !psd_check(&b.assemble(), tol)?.is_psd() {
        return Err(Error::Precondition("block pair is not PSD".into()));
    }
    if !is_unitary(u, tol.max(1e-12) * 10.0) {
        return Err(Error::Precondition("off-diagonal base is not unitary".into()));
    }
    let expected = u.scale(Complex64::new(1.0 / (2.0 * w), 0.0));
    let dev = b.x.sub(&expected)?.max_abs();
    if dev > tol * (1.0 / (2.0 * w)).max(1.0) {
        return Err(Error::Precondition(format!(
            "off-diagonal deviates from u/(2w) by {dev:.3e}"
        )));
    }
    let tp = b.p.trace() / b.p.dim() as f64;
    let tq = b.q.trace() / b.q.dim() as f64;
    let off = -1.0 / (2.0 * w);
    let entry_sum = tp + tq + 2.0 * off;
    if entry_sum < -tol {
        return Err(Error::Internal(format!(
            "entry sum {entry_sum:.3e} of the conjugated scalar matrix is negative: positivity was violated upstream"
        )));
    }
    Ok(TraceBound {
        bound: 1.0 / w,
        value: tp + tq,
        slack: entry_sum,
        scalar_matrix: [[tp, off], [off, tq]],
    })
}

/// A certified value for the cb joint radius used by the obstruction demo.
#[derive(Debug, Clone)]
pub struct CertifiedW {
    pub value: f64,
    pub provenance: String,
}

#[derive(Debug, Clone)]
pub enum ObstructionOutcome {
    Demonstrated,
    NotApplicable { reason: String },
}

#[derive(Debug, Clone)]
pub struct SolverOutcome {
    pub unknown: bool,
    pub iterations: usize,
    pub psd_residual: f64,
    pub affine_residual: f64,
}

/// Report of the lifting-obstruction demonstration: the analytic
/// contradiction chain and the numerical completion problems.
#[derive(Debug, Clone)]
pub struct ObstructionReport {
    pub n: usize,
    pub dim: usize,
    pub w: Option<CertifiedW>,
    pub outcome: ObstructionOutcome,
    /// Per-block bound 1/w.
    pub per_block_bound: f64,
    /// Total n/w: strict excess over the unital trace 1 is the
    /// contradiction.
    pub total_bound: f64,
    pub trace_shadow: Option<SolverOutcome>,
    pub full_completion: Option<SolverOutcome>,
    /// Operator-norm distance from each truncated generator to its
    /// re-unitarization (free-group path only).
    pub perturbation_norms: Vec<f64>,
    pub completed_entries: Vec<usize>,
    pub branch_discrepancy: bool,
}

const FULL_COMPLETION_DIM_CAP: usize = 32;

/// Demonstrates the lifting obstruction for a tuple of unitaries with a
/// certified cb joint radius strictly below n: any unital completion
/// `[[P_j, u_j/(2w)], [., Q_j]] >= 0, sum_j (P_j + Q_j) = I` would force
/// `1 >= n/w > 1`. The feasibility engine is asked to find one and must
/// come back empty.
pub fn lp_obstruction_demo(u: &OperatorTuple, budget: usize, seed: u64) -> Result<ObstructionReport> {
    for (i, m) in u.matrices().iter().enumerate() {
        if !is_unitary(m, 1e-9) {
            return Err(Error::Precondition(format!("tuple entry {i} is not unitary")));
        }
    }
    let cert = exact_wcb_certificate(u, HALF_TOL)?;
    let w = match cert {
        Some(c) => CertifiedW { value: c.upper, provenance: format!("exact certificate ({})", c.kind) },
        None => {
            return obstruction_core(u.len(), u.dim(), None, budget, seed, None, Vec::new(), Vec::new());
        }
    };
    obstruction_core(u.len(), u.dim(), Some(w), budget, seed, Some(u), Vec::new(), Vec::new())
}

/// Free-group instantiation: compress the generators to a Cayley ball,
/// certify w from the compression (entrywise-nonnegative, so the value is
/// exact), re-unitarize by completing the partial permutations, and run
/// the obstruction.
pub fn free_group_obstruction(n: usize, radius: usize, budget: usize, seed: u64) -> Result<ObstructionReport> {
    let spec = GroupSpec::Free(n);
    spec.validate()?;
    let ball = ball_enumerate(&spec, radius, BALL_CAP)?;
    let p = ball.len();

    let mut perturbations = Vec::with_capacity(n);
    let mut completed = Vec::with_capacity(n);
    let mut dense_unitaries: Option<Vec<ComplexMatrix>> = if p <= FULL_COMPLETION_DIM_CAP {
        Some(Vec::with_capacity(n))
    } else {
        None
    };

    for i in 0..n {
        let mut unit = vec![Complex64::new(0.0, 0.0); n];
        unit[i] = Complex64::new(1.0, 0.0);
        let single = rep_operator_on_ball(&spec, &ball, &unit)?;
        let (completion_count, unitary) = complete_partial_permutation(&single, p)?;
        completed.push(completion_count);
        // The completion is itself a partial permutation on the boundary:
        // its operator norm is exactly 1 when nonempty.
        perturbations.push(if completion_count > 0 { 1.0 } else { 0.0 });
        if let Some(d) = dense_unitaries.as_mut() {
            d.push(unitary.to_dense());
        }
    }

    // Exact value of the compressed tuple: the compression has 0/1 entries,
    // so every coupling level collapses to the top eigenvalue of the real
    // part, computed here through the radial shortcut.
    let est = re_norm_lower(&spec, &vec![1.0; n], radius, 1e-9, seed)?;
    let w = CertifiedW {
        value: est.lower,
        provenance: format!(
            "top eigenvalue of the radius-{radius} ball compression (nonnegative entries make this the exact cb joint radius of the truncated tuple)"
        ),
    };

    let dense_tuple = match dense_unitaries {
        Some(mats) => Some(OperatorTuple::new(mats)?),
        None => None,
    };
    obstruction_core(n, p, Some(w), budget, seed, dense_tuple.as_ref(), perturbations, completed)
}

/// Completes the compressed left translation (a partial permutation) to a
/// permutation unitary: unmatched columns map to unmatched rows in index
/// order. Returns the number of completed entries and the unitary.
fn complete_partial_permutation(s: &SparseOperator, dim: usize) -> Result<(usize, SparseOperator)> {
    let mut row_hit = vec![false; dim];
    let mut col_hit = vec![false; dim];
    let mut triplets = s.triplets();
    for (r, c, v) in &triplets {
        if (v - Complex64::new(1.0, 0.0)).norm() > 1e-12 || row_hit[*r] || col_hit[*c] {
            return Err(Error::Precondition("compression is not a partial permutation".into()));
        }
        row_hit[*r] = true;
        col_hit[*c] = true;
    }
    let free_rows: Vec<usize> = (0..dim).filter(|&r| !row_hit[r]).collect();
    let free_cols: Vec<usize> = (0..dim).filter(|&c| !col_hit[c]).collect();
    if free_rows.len() != free_cols.len() {
        return Err(Error::Internal("partial permutation with unbalanced defect".into()));
    }
    let added = free_rows.len();
    for (r, c) in free_rows.into_iter().zip(free_cols) {
        triplets.push((r, c, Complex64::new(1.0, 0.0)));
    }
    Ok((added, SparseOperator::new(dim, triplets, false)?))
}

#[allow(clippy::too_many_arguments)]
fn obstruction_core(
    n: usize,
    dim: usize,
    w: Option<CertifiedW>,
    budget: usize,
    seed: u64,
    dense: Option<&OperatorTuple>,
    perturbation_norms: Vec<f64>,
    completed_entries: Vec<usize>,
) -> Result<ObstructionReport> {
    let mut report = ObstructionReport {
        n,
        dim,
        w: w.clone(),
        outcome: ObstructionOutcome::Demonstrated,
        per_block_bound: 0.0,
        total_bound: 0.0,
        trace_shadow: None,
        full_completion: None,
        perturbation_norms,
        completed_entries,
        branch_discrepancy: false,
    };
    let w = match w {
        Some(c) => c,
        None => {
            report.outcome = ObstructionOutcome::NotApplicable {
                reason: "no certified cb joint radius below n is available".into(),
            };
            return Ok(report);
        }
    };
    if n as f64 / w.value <= 1.0 + 1e-12 {
        report.outcome = ObstructionOutcome::NotApplicable {
            reason: format!("n/w = {:.6} does not exceed 1: no contradiction", n as f64 / w.value),
        };
        return Ok(report);
    }
    report.per_block_bound = 1.0 / w.value;
    report.total_bound = n as f64 / w.value;

    // Trace shadow: scalars p_j, q_j with [[p_j, -1/(2w)], [., q_j]] PSD
    // and sum (p_j + q_j) = 1. Infeasible since each pair sums to >= 1/w.
    let shadow = {
        use crate::psdfeas::{solve, AffineTerm, Cell, FeasibilityProblem, FeasibilityStatus};
        let mut prob = FeasibilityProblem::new();
        prob.max_iter = budget.max(1);
        let off = prob.add_const(
            "off",
            ComplexMatrix::new(1, 1, vec![Complex64::new(-1.0 / (2.0 * w.value), 0.0)])?,
        )?;
        let mut terms = Vec::with_capacity(2 * n);
        for j in 0..n {
            let pj = prob.add_block(&format!("p{j}"), 1)?;
            let qj = prob.add_block(&format!("q{j}"), 1)?;
            prob.add_pattern(vec![
                vec![Cell::Var { idx: pj, adjoint: false }, Cell::Const { idx: off, adjoint: false }],
                vec![Cell::Const { idx: off, adjoint: true }, Cell::Var { idx: qj, adjoint: false }],
            ])?;
            terms.push(AffineTerm { block: pj, row: 0, col: 0, coeff: Complex64::new(1.0, 0.0) });
            terms.push(AffineTerm { block: qj, row: 0, col: 0, coeff: Complex64::new(1.0, 0.0) });
        }
        prob.add_affine(terms, Complex64::new(1.0, 0.0))?;
        let res = solve(&prob, seed)?;
        SolverOutcome {
            unknown: !matches!(res.status, FeasibilityStatus::Feasible(_)),
            iterations: res.iterations,
            psd_residual: res.psd_residual,
            affine_residual: res.affine_residual,
        }
    };
    if !shadow.unknown {
        report.branch_discrepancy = true;
    }
    report.trace_shadow = Some(shadow);

    // Full completion problem at desk scale.
    if let Some(t) = dense {
        if 2 * t.dim() <= 2 * FULL_COMPLETION_DIM_CAP {
            let full = full_completion_problem(t, w.value, budget, seed)?;
            if !full.unknown {
                report.branch_discrepancy = true;
            }
            report.full_completion = Some(full);
        }
    }
    Ok(report)
}

fn full_completion_problem(u: &OperatorTuple, w: f64, budget: usize, seed: u64) -> Result<SolverOutcome> {
    use crate::psdfeas::{solve, AffineTerm, Cell, FeasibilityProblem, FeasibilityStatus};
    let n = u.len();
    let p = u.dim();
    let mut prob = FeasibilityProblem::new();
    prob.max_iter = budget.max(1);
    let mut blocks = Vec::with_capacity(2 * n);
    for j in 0..n {
        let pj = prob.add_block(&format!("P{j}"), p)?;
        let qj = prob.add_block(&format!("Q{j}"), p)?;
        let cj = prob.add_const(
            &format!("C{j}"),
            u.get(j).scale(Complex64::new(1.0 / (2.0 * w), 0.0)),
        )?;
        prob.add_pattern(vec![
            vec![Cell::Var { idx: pj, adjoint: false }, Cell::Const { idx: cj, adjoint: false }],
            vec![Cell::Const { idx: cj, adjoint: true }, Cell::Var { idx: qj, adjoint: false }],
        ])?;
        blocks.push((pj, qj));
    }
    for r in 0..p {
        for c in 0..p {
            let mut terms = Vec::with_capacity(2 * n);
            for &(pj, qj) in &blocks {
                terms.push(AffineTerm { block: pj, row: r, col: c, coeff: Complex64::new(1.0, 0.0) });
                terms.push(AffineTerm { block: qj, row: r, col: c, coeff: Complex64::new(1.0, 0.0) });
            }
            let target = if r == c { Complex64::new(1.0, 0.0) } else { Complex64::new(0.0, 0.0) };
            prob.add_affine(terms, target)?;
        }
    }
    let res = solve(&prob, seed)?;
    Ok(SolverOutcome {
        unknown: !matches!(res.status, FeasibilityStatus::Feasible(_)),
        iterations: res.iterations,
        psd_residual: res.psd_residual,
        affine_residual: res.affine_residual,
    })
}

/// Closed-form bounds as functions of the generator count.
#[derive(Debug, Clone, Copy)]
pub struct BoundReport {
    pub n: u64,
    /// `n / sqrt(2n-1)`: lower bound for the domain parameter of the
    /// matrix-unit system.
    pub d_inf_un_lower: f64,
    /// `sqrt(2n-1)`: the Kesten value of the free-generator sum.
    pub kesten_w: f64,
    /// `(n - sqrt(2n-1)) / (2 sqrt(2n-1))`: Hausdorff-distance lower bound
    /// between the k-max and plain matrix ranges.
    pub hausdorff_lower: f64,
    /// `sqrt(n/8) - 1/2`: the floor the Hausdorff bound strictly exceeds.
    pub hausdorff_floor: f64,
    /// `2n sqrt(2n-1) / ((4n+1) sqrt(2n-1) - n)`: lower bound for the
    /// free-generator span, always >= 1/2.
    pub dinf_sn_lower: f64,
}

impl BoundReport {
    pub fn verdict_un(&self) -> bool {
        self.d_inf_un_lower > 1.0
    }

    pub fn verdict_hausdorff(&self) -> bool {
        self.hausdorff_lower > self.hausdorff_floor
    }

    pub fn verdict_sn(&self) -> bool {
        self.dinf_sn_lower >= 0.5
    }
}

pub fn bound_calculators(n: u64) -> Result<BoundReport> {
    if n < 2 {
        return Err(Error::InvalidArgument("bound calculators need n >= 2".into()));
    }
    let nf = n as f64;
    let root = (2.0 * nf - 1.0).sqrt();
    Ok(BoundReport {
        n,
        d_inf_un_lower: nf / root,
        kesten_w: root,
        hausdorff_lower: (nf - root) / (2.0 * root),
        hausdorff_floor: (nf / 8.0).sqrt() - 0.5,
        dinf_sn_lower: 2.0 * nf * root / ((4.0 * nf + 1.0) * root - nf),
    })
}

/// Re-derives the certificate normalization from the matrix-unit
/// generator oracle: the generators have cb joint radius exactly 1/2, so
/// kappa is 1/2 divided by the minimal diagonal-sum norm found for them.
pub fn calibrate_kappa(iters: usize, seed: u64) -> Result<f64> {
    let t = un_generators(2);
    let ub = wcb_upper_search_with_kappa(&t, iters, 1e-3, seed, KAPPA)?;
    let kappa = 0.5 / ub.raw_diag_sum_norm;
    if !(0.2..=1.0).contains(&kappa) {
        return Err(Error::Internal(format!(
            "calibrated normalization {kappa:.4} is out of the plausible range"
        )));
    }
    Ok(kappa)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn un_positivity_contraction_law() {
        // A0 = I, contractions: PSD.
        let a = ComplexMatrix::matrix_unit(2, 0, 1).scale(c(0.9, 0.0));
        let e = UnElement::new(HermitianMatrix::identity(2), vec![a]).unwrap();
        assert!(un_positivity(&e, 1e-9).unwrap().is_psd());

        // Norm 1.1: not PSD, block identified.
        let a = ComplexMatrix::matrix_unit(2, 0, 1).scale(c(1.1, 0.0));
        let e = UnElement::new(HermitianMatrix::identity(2), vec![ComplexMatrix::zeros(2, 2), a]).unwrap();
        match un_positivity(&e, 1e-9).unwrap() {
            UnPositivity::NotPsd { block, eigenvalue, witness } => {
                assert_eq!(block, 1);
                assert!(eigenvalue < -1e-9);
                let h = e.block(1);
                assert!(h.quadratic_form(&witness) < -1e-9);
            }
            UnPositivity::Psd => panic!("norm-1.1 coefficient must violate positivity"),
        }

        // All blocks zero: PSD.
        let e = UnElement::new(HermitianMatrix::zeros(2), vec![ComplexMatrix::zeros(2, 2)]).unwrap();
        assert!(un_positivity(&e, 1e-9).unwrap().is_psd());
    }

    #[test]
    fn generators_are_certified_ucp() {
        for n in [2usize, 3] {
            let t = un_generators(n);
            match ucp_check(&t, 4, 0).unwrap() {
                UcpVerdict::Certified { upper, .. } => {
                    assert!((upper - 0.5).abs() < 1e-7, "n={n}: upper {upper}");
                }
                other => panic!("n={n}: expected certification, got {}", other.as_str()),
            }
        }
    }

    #[test]
    fn scaled_generators_refuted() {
        let t = un_generators(2).scale(c(1.2, 0.0));
        match ucp_check(&t, 4, 0).unwrap() {
            UcpVerdict::Refuted { value, violation, .. } => {
                assert!((value - 0.6).abs() < 1e-6);
                assert!(violation.cross_validated);
                assert!(violation.quadratic_form < -0.1);
            }
            other => panic!("expected refutation, got {}", other.as_str()),
        }
    }

    #[test]
    fn kpos_single_entry_examples() {
        // w(c E12) = c/2: 0.6 E12 stays consistent, 1.2 E12 is refuted.
        let small = OperatorTuple::new(vec![ComplexMatrix::matrix_unit(2, 0, 1).scale(c(0.6, 0.0))]).unwrap();
        assert!(!kpos_check(&small, 1, 4, 0).unwrap().is_refuted());

        let big = OperatorTuple::new(vec![ComplexMatrix::matrix_unit(2, 0, 1).scale(c(1.2, 0.0))]).unwrap();
        match kpos_check(&big, 1, 4, 0).unwrap() {
            KposVerdict::PositiveRefuted { value, violation, .. } => {
                assert!((value - 0.6).abs() < 1e-6);
                assert!(violation.cross_validated);
            }
            KposVerdict::Consistent { .. } => panic!("1.2 E12 must be refuted"),
        }

        let zero = OperatorTuple::new(vec![ComplexMatrix::zeros(2, 2)]).unwrap();
        for k in 1..=3 {
            assert!(!kpos_check(&zero, k, 2, 0).unwrap().is_refuted());
        }
    }

    #[test]
    fn trace_bound_equality_cases() {
        // P = Q = (1/2w) I, u = I, w = 1: tau(P+Q) = 1 = 1/w.
        let w = 1.0;
        let half = HermitianMatrix::diagonal(&[0.5, 0.5]);
        let b = ChoiBlockPair::new(half.clone(), ComplexMatrix::identity(2).scale(c(0.5, 0.0)), half).unwrap();
        let tb = choi_block_trace_bound(&b, &ComplexMatrix::identity(2), w, 1e-9).unwrap();
        assert!((tb.value - 1.0).abs() < 1e-12);
        assert!(tb.slack.abs() < 1e-12);

        // P = Q = I, any unitary u, w = 1/2: value 2 = bound 2.
        let u = ComplexMatrix::from_rows(&[vec![c(0.0, 0.0), c(0.0, 1.0)], vec![c(0.0, -1.0), c(0.0, 0.0)]]).unwrap();
        let b = ChoiBlockPair::new(
            HermitianMatrix::identity(2),
            u.scale(c(1.0, 0.0)),
            HermitianMatrix::identity(2),
        )
        .unwrap();
        let tb = choi_block_trace_bound(&b, &u, 0.5, 1e-9).unwrap();
        assert!((tb.value - 2.0).abs() < 1e-12);
        assert!(tb.slack >= -1e-12);
    }

    #[test]
    fn trace_bound_rejects_non_psd() {
        let b = ChoiBlockPair::new(
            HermitianMatrix::zeros(2),
            ComplexMatrix::identity(2).scale(c(0.5, 0.0)),
            HermitianMatrix::zeros(2),
        )
        .unwrap();
        assert!(matches!(
            choi_block_trace_bound(&b, &ComplexMatrix::identity(2), 1.0, 1e-9),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn bound_formulas_at_two() {
        let r = bound_calculators(2).unwrap();
        assert!((r.d_inf_un_lower - 2.0 / 3f64.sqrt()).abs() < 1e-15);
        assert!((r.kesten_w - 3f64.sqrt()).abs() < 1e-15);
        assert!((r.hausdorff_lower - (2.0 - 3f64.sqrt()) / (2.0 * 3f64.sqrt())).abs() < 1e-15);
        assert!(r.hausdorff_floor.abs() < 1e-15); // sqrt(2/8) - 1/2 = 0
        assert!(r.verdict_un() && r.verdict_hausdorff() && r.verdict_sn());
        assert!(bound_calculators(1).is_err());
    }

    #[test]
    fn bound_asymptotics() {
        let r = bound_calculators(10_000).unwrap();
        let approx = (10_000f64 / 2.0).sqrt();
        assert!((r.d_inf_un_lower - approx).abs() / approx < 0.01);
    }

    #[test]
    fn obstruction_not_applicable_cases() {
        // Single unitary: w = 1 = n.
        let u = OperatorTuple::new(vec![ComplexMatrix::identity(2)]).unwrap();
        let rep = lp_obstruction_demo(&u, 100, 0).unwrap();
        assert!(matches!(rep.outcome, ObstructionOutcome::NotApplicable { .. }));

        // Commuting unitaries (both the identity): w = n.
        let u = OperatorTuple::new(vec![ComplexMatrix::identity(2), ComplexMatrix::identity(2)]).unwrap();
        let rep = lp_obstruction_demo(&u, 100, 0).unwrap();
        assert!(matches!(rep.outcome, ObstructionOutcome::NotApplicable { .. }));
    }

    #[test]
    fn free_group_obstruction_small_radius() {
        let rep = free_group_obstruction(2, 2, 4000, 0).unwrap();
        assert!(matches!(rep.outcome, ObstructionOutcome::Demonstrated));
        assert!(rep.total_bound > 1.0);
        let shadow = rep.trace_shadow.expect("shadow ran");
        assert!(shadow.unknown);
        assert!(!rep.branch_discrepancy);
        // R=2 ball has 17 elements: the full completion also runs.
        let full = rep.full_completion.expect("full problem ran at dim 17");
        assert!(full.unknown);
    }

    #[test]
    fn kappa_calibration_matches_default() {
        let kappa = calibrate_kappa(1500, 0).unwrap();
        assert!((kappa - 0.5).abs() < 0.05, "calibrated {kappa}");
    }
}
