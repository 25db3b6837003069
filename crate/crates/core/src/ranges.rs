//! Matrix-range membership tests.
//!
//! The range of the free-generator tuple is the product of norm balls
//! (decidable outright); the range of the matrix-unit tuple is the cb
//! joint-radius ball of radius 1/2 (certified or refuted through the
//! machinery in [`crate::jointrad`] and [`crate::opsys`]); general
//! membership reduces to a Choi-matrix feasibility problem.

use num_complex::Complex64;

use crate::defaults::FEAS_MAX_ITER;
use crate::error::{Error, Result};
use crate::jointrad::{wcb_upper_search, OperatorTuple};
use crate::linalg::{operator_norm, ComplexMatrix, HermitianMatrix};
use crate::numrad::numerical_radius;
use crate::opsys::{
    bound_calculators, exact_wcb_certificate, kpos_check, un_generators, KposVerdict,
    PositivityViolation,
};
use crate::psdfeas::{solve, AffineTerm, FeasibilityProblem, FeasibilityStatus};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    In,
    Out,
    Undecided,
}

impl Verdict {
    pub fn as_str(&self) -> &'static str {
        match self {
            Verdict::In => "IN",
            Verdict::Out => "OUT",
            Verdict::Undecided => "UNDECIDED",
        }
    }
}

/// Re-verifiable evidence attached to every decisive verdict.
#[derive(Debug, Clone)]
pub enum Evidence {
    /// Per-entry operator norms (the norm-ball case).
    Norms(Vec<f64>),
    /// A cb upper-bound certificate.
    Certificate { kind: String, upper: f64 },
    /// A level-k violation with its cross-validated positivity witness.
    Violation { k: usize, value: f64, violation: Box<PositivityViolation> },
    /// Bounds only.
    Interval { lower: f64, upper: Option<f64> },
    /// A verified Choi witness for a UCP map with prescribed values.
    Choi {
        witness: HermitianMatrix,
        unital_residual: f64,
        constraint_residual: f64,
        assumption: String,
    },
    /// Undecided here, but an independent test flags the point as OUT.
    CrossFlag { lower: f64, upper: Option<f64>, flagged_out_by: String },
}

#[derive(Debug, Clone)]
pub struct MembershipVerdict {
    pub status: Verdict,
    pub evidence: Evidence,
}

const HALF_TOL: f64 = 1e-9;

/// Membership in the range of the free-generator tuple: exactly the
/// product of norm balls. Decisive.
pub fn membership_sn(b: &OperatorTuple, tol: f64) -> MembershipVerdict {
    let norms = b.operator_norms();
    let status = if norms.iter().all(|&n| n <= 1.0 + tol) { Verdict::In } else { Verdict::Out };
    MembershipVerdict { status, evidence: Evidence::Norms(norms) }
}

/// Membership in the range of the matrix-unit tuple: the cb joint radius
/// is at most 1/2. IN needs a certificate, OUT a violated level.
pub fn membership_un(a: &OperatorTuple, budget: usize, seed: u64) -> Result<MembershipVerdict> {
    let exact = exact_wcb_certificate(a, HALF_TOL)?;
    if let Some(cert) = &exact {
        if cert.upper <= 0.5 + HALF_TOL {
            return Ok(MembershipVerdict {
                status: Verdict::In,
                evidence: Evidence::Certificate { kind: cert.kind.to_string(), upper: cert.upper },
            });
        }
    }
    let mut best_lower = 0.0f64;
    for k in 1..=3usize {
        match kpos_check(a, k, budget.max(1), seed.wrapping_add(k as u64))? {
            KposVerdict::PositiveRefuted { k, value, violation } => {
                return Ok(MembershipVerdict {
                    status: Verdict::Out,
                    evidence: Evidence::Violation { k, value, violation: Box::new(violation) },
                });
            }
            KposVerdict::Consistent { lower, .. } => best_lower = best_lower.max(lower),
        }
    }
    let mut upper = exact.map(|c| c.upper);
    if upper.is_none() && a.dim() <= 8 {
        let ub = wcb_upper_search(a, FEAS_MAX_ITER.min(2000), 1e-3, seed)?;
        if ub.bound <= 0.5 + HALF_TOL {
            return Ok(MembershipVerdict {
                status: Verdict::In,
                evidence: Evidence::Certificate { kind: "kappa-certificate".into(), upper: ub.bound },
            });
        }
        upper = Some(ub.bound);
    }
    Ok(MembershipVerdict {
        status: Verdict::Undecided,
        evidence: Evidence::Interval { lower: best_lower, upper },
    })
}

/// Membership at the k-max level: the level-k radius is at most 1/2. A cb
/// certificate decides IN (the cb radius dominates every level); a level-k
/// violation decides OUT.
pub fn membership_kmax_un(a: &OperatorTuple, k: usize, budget: usize, seed: u64) -> Result<MembershipVerdict> {
    if k == 0 {
        return Err(Error::InvalidArgument("k must be >= 1".into()));
    }
    let exact = exact_wcb_certificate(a, HALF_TOL)?;
    if let Some(cert) = &exact {
        if cert.upper <= 0.5 + HALF_TOL {
            return Ok(MembershipVerdict {
                status: Verdict::In,
                evidence: Evidence::Certificate { kind: cert.kind.to_string(), upper: cert.upper },
            });
        }
    }
    match kpos_check(a, k, budget.max(1), seed)? {
        KposVerdict::PositiveRefuted { k, value, violation } => Ok(MembershipVerdict {
            status: Verdict::Out,
            evidence: Evidence::Violation { k, value, violation: Box::new(violation) },
        }),
        KposVerdict::Consistent { lower, upper } => Ok(MembershipVerdict {
            status: Verdict::Undecided,
            evidence: Evidence::Interval { lower, upper: upper.or(exact.map(|c| c.upper)) },
        }),
    }
}

const EXTENSION_ASSUMPTION: &str =
    "UCP maps on the span of the tuple extend to the full matrix algebra without changing the prescribed values (injectivity of the matrix target)";

/// General membership `B in W(T)` via feasibility over Choi matrices of
/// unital completely positive maps with `phi(T_l) = B_l`. IN comes with a
/// re-verified Choi witness; the engine cannot prove OUT, so the
/// alternative is UNDECIDED (cross-flagged when an independent test
/// refutes the point).
pub fn membership_w(
    t: &OperatorTuple,
    b: &OperatorTuple,
    budget: usize,
    seed: u64,
) -> Result<MembershipVerdict> {
    if t.len() != b.len() {
        return Err(Error::ShapeMismatch(format!(
            "tuples of lengths {} and {} cannot be matched",
            t.len(),
            b.len()
        )));
    }
    let m = t.dim();
    let n = b.dim();
    let mut prob = FeasibilityProblem::new();
    prob.max_iter = budget.max(1);
    let choi = prob.add_block("C", m * n)?;
    prob.require_psd(choi)?;

    // Unitality: sum of the n x n diagonal blocks is the identity.
    for r in 0..n {
        for c in 0..n {
            let terms: Vec<AffineTerm> = (0..m)
                .map(|i| AffineTerm {
                    block: choi,
                    row: i * n + r,
                    col: i * n + c,
                    coeff: Complex64::new(1.0, 0.0),
                })
                .collect();
            let target = if r == c { Complex64::new(1.0, 0.0) } else { Complex64::new(0.0, 0.0) };
            prob.add_affine(terms, target)?;
        }
    }
    // Value constraints: sum_{ij} T_l[i,j] C_block(i,j) = B_l.
    for l in 0..t.len() {
        for r in 0..n {
            for c in 0..n {
                let mut terms = Vec::new();
                for i in 0..m {
                    for j in 0..m {
                        let coeff = t.get(l).get(i, j);
                        if coeff.norm() == 0.0 {
                            continue;
                        }
                        terms.push(AffineTerm { block: choi, row: i * n + r, col: j * n + c, coeff });
                    }
                }
                prob.add_affine(terms, b.get(l).get(r, c))?;
            }
        }
    }

    let res = solve(&prob, seed)?;
    if let FeasibilityStatus::Feasible(witness) = res.status {
        let choi_w = &witness[0];
        let (unital_residual, constraint_residual) = choi_residuals(t, b, choi_w);
        return Ok(MembershipVerdict {
            status: Verdict::In,
            evidence: Evidence::Choi {
                witness: choi_w.clone(),
                unital_residual,
                constraint_residual,
                assumption: EXTENSION_ASSUMPTION.into(),
            },
        });
    }

    // Cross-check when T is the canonical matrix-unit generator tuple.
    if is_un_generator_tuple(t) {
        let flag = membership_un(b, 16, seed)?;
        if flag.status == Verdict::Out {
            let (lower, upper) = match &flag.evidence {
                Evidence::Violation { value, .. } => (*value, None),
                _ => (0.0, None),
            };
            return Ok(MembershipVerdict {
                status: Verdict::Undecided,
                evidence: Evidence::CrossFlag {
                    lower,
                    upper,
                    flagged_out_by: "matrix-unit membership (cb radius exceeds 1/2)".into(),
                },
            });
        }
    }
    Ok(MembershipVerdict {
        status: Verdict::Undecided,
        evidence: Evidence::Interval { lower: 0.0, upper: None },
    })
}

fn choi_residuals(t: &OperatorTuple, b: &OperatorTuple, choi: &HermitianMatrix) -> (f64, f64) {
    let m = t.dim();
    let n = b.dim();
    let mut unital = 0.0f64;
    for r in 0..n {
        for c in 0..n {
            let mut s = Complex64::new(0.0, 0.0);
            for i in 0..m {
                s += choi.get(i * n + r, i * n + c);
            }
            let target = if r == c { Complex64::new(1.0, 0.0) } else { Complex64::new(0.0, 0.0) };
            unital = unital.max((s - target).norm());
        }
    }
    let mut constraint = 0.0f64;
    for l in 0..t.len() {
        for r in 0..n {
            for c in 0..n {
                let mut s = Complex64::new(0.0, 0.0);
                for i in 0..m {
                    for j in 0..m {
                        s += t.get(l).get(i, j) * choi.get(i * n + r, j * n + c);
                    }
                }
                constraint = constraint.max((s - b.get(l).get(r, c)).norm());
            }
        }
    }
    (unital, constraint)
}

fn is_un_generator_tuple(t: &OperatorTuple) -> bool {
    let d = t.len();
    if t.dim() != 2 * d {
        return false;
    }
    let gens = un_generators(d);
    t.matrices()
        .iter()
        .zip(gens.matrices())
        .all(|(a, b)| a.approx_eq(b, 1e-12))
}

/// Admissible test family member for the k-min refutation: a tuple with
/// an exactly certified cb radius of at most 1/2.
#[derive(Debug, Clone)]
pub enum RefuteOutcome {
    Refuted {
        witness: OperatorTuple,
        admissibility: String,
        certificate_value: f64,
        value: f64,
    },
    NoWitnessFound {
        tried: usize,
        best: f64,
    },
}

impl RefuteOutcome {
    pub fn is_refuted(&self) -> bool {
        matches!(self, RefuteOutcome::Refuted { .. })
    }
}

/// Searches certified families (scalar tuples and block-orthogonal
/// tuples, whose cb radius at most 1/2 is exactly certifiable, hence
/// admissible at every level k) for A with `w(sum B_i (x) A_i) > 1/2`.
/// Such an A excludes B from the k-min range.
pub fn omin_refute(b: &OperatorTuple, k: usize, budget: usize, seed: u64) -> Result<RefuteOutcome> {
    if k == 0 {
        return Err(Error::InvalidArgument("k must be >= 1".into()));
    }
    let d = b.len();
    let mut tried = 0usize;
    let mut best = 0.0f64;

    let mut consider = |a: OperatorTuple, admissibility: String, cert: f64| -> Result<Option<RefuteOutcome>> {
        tried += 1;
        let mut coupled = ComplexMatrix::zeros(b.dim() * a.dim(), b.dim() * a.dim());
        for i in 0..d {
            coupled = coupled.add(&b.get(i).kron(a.get(i)))?;
        }
        let w = numerical_radius(&coupled, 1e-9)?;
        best = best.max(w.lower);
        if w.lower > 0.5 + HALF_TOL {
            Ok(Some(RefuteOutcome::Refuted {
                witness: a,
                admissibility,
                certificate_value: cert,
                value: w.lower,
            }))
        } else {
            Ok(None)
        }
    };

    // Slot indicators: A = (0, .., 1/2 at slot i, .., 0).
    for i in 0..d {
        if budget == 0 {
            break;
        }
        let mats: Vec<ComplexMatrix> = (0..d)
            .map(|j| {
                if j == i {
                    ComplexMatrix::new(1, 1, vec![Complex64::new(0.5, 0.0)]).expect("1x1")
                } else {
                    ComplexMatrix::zeros(1, 1)
                }
            })
            .collect();
        let a = OperatorTuple::new(mats)?;
        if let Some(out) = consider(a, format!("scalar slot indicator {i} (modulus sum 1/2)"), 0.5)? {
            return Ok(out);
        }
    }

    // Matrix-unit family in orthogonal blocks, scaled to cb radius 1/2.
    if budget > 0 {
        let a = un_generators(d);
        if let Some(out) = consider(a, "matrix units in orthogonal blocks (cb radius 1/2)".into(), 0.5)? {
            return Ok(out);
        }
    }

    // Seeded random members of both families.
    use rand::prelude::*;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    for trial in 1..budget {
        if trial % 2 == 1 {
            // Random scalar tuple on the simplex of total modulus 1/2.
            let raw: Vec<f64> = (0..d).map(|_| rng.gen_range(0.01..1.0)).collect();
            let total: f64 = raw.iter().sum();
            let mats: Vec<ComplexMatrix> = raw
                .iter()
                .map(|&r| {
                    let phase = rng.gen_range(0.0..std::f64::consts::TAU);
                    ComplexMatrix::new(1, 1, vec![Complex64::from_polar(0.5 * r / total, phase)]).expect("1x1")
                })
                .collect();
            let a = OperatorTuple::new(mats)?;
            if let Some(out) = consider(a, "random scalar tuple (modulus sum 1/2)".into(), 0.5)? {
                return Ok(out);
            }
        } else {
            // Random 2x2 blocks, each normalized to radius exactly 1/2.
            let p = 2 * d;
            let mats: Vec<ComplexMatrix> = (0..d)
                .map(|i| {
                    let mut block = ComplexMatrix::zeros(p, p);
                    for r in 0..2 {
                        for c in 0..2 {
                            block.set(
                                2 * i + r,
                                2 * i + c,
                                Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)),
                            );
                        }
                    }
                    block
                })
                .collect();
            let mut scaled = Vec::with_capacity(d);
            let mut ok = true;
            for m in mats {
                let w = numerical_radius(&m, 1e-10)?;
                match w.upper {
                    Some(u) if u > 0.0 => scaled.push(m.scale(Complex64::new(0.5 / u, 0.0))),
                    _ => {
                        ok = false;
                        break;
                    }
                }
            }
            if !ok {
                continue;
            }
            let a = OperatorTuple::new(scaled)?;
            if let Some(out) =
                consider(a, "block-orthogonal tuple normalized to cb radius 1/2".into(), 0.5)?
            {
                return Ok(out);
            }
        }
    }
    Ok(RefuteOutcome::NoWitnessFound { tried, best })
}

/// Best-effort search trace for the Hausdorff gap between the k-max and
/// plain matrix-unit ranges.
///
/// Admissibility of a candidate is certified through its cb radius, which
/// also collapses the scaling distance `(1 - 1/(2r)) sum_i |A_i|` to zero
/// whenever `r <= 1/2`: the families searchable at desk scale do not
/// separate the two sets, so the informative quantity is the closed-form
/// bound reported alongside. No optimality is claimed.
#[derive(Debug, Clone)]
pub struct HausdorffEstimate {
    pub n: usize,
    pub k: usize,
    pub p: usize,
    pub search_value: f64,
    pub closed_form_bound: f64,
    pub floor: f64,
    pub trace: Vec<(String, f64)>,
}

pub fn hausdorff_gap_estimate(
    n: usize,
    k: usize,
    p: usize,
    budget: usize,
    seed: u64,
) -> Result<HausdorffEstimate> {
    if n < 2 || k == 0 || p == 0 {
        return Err(Error::InvalidArgument("need n >= 2, k >= 1, p >= 1".into()));
    }
    let bounds = bound_calculators(n as u64)?;
    let mut trace = Vec::new();
    let mut search_value = 0.0f64;

    use rand::prelude::*;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    for trial in 0..budget {
        let candidate: Option<(String, OperatorTuple)> = if p == 1 {
            let mats: Vec<ComplexMatrix> = (0..n)
                .map(|_| {
                    ComplexMatrix::new(
                        1,
                        1,
                        vec![Complex64::from_polar(rng.gen_range(0.0..1.0), rng.gen_range(0.0..std::f64::consts::TAU))],
                    )
                    .expect("1x1")
                })
                .collect();
            Some((format!("scalar candidate {trial}"), OperatorTuple::new(mats)?))
        } else if p >= 2 * n {
            let mats: Vec<ComplexMatrix> = (0..n)
                .map(|i| {
                    let mut block = ComplexMatrix::zeros(p, p);
                    for r in 0..2 {
                        for c in 0..2 {
                            block.set(
                                2 * i + r,
                                2 * i + c,
                                Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)),
                            );
                        }
                    }
                    block
                })
                .collect();
            Some((format!("block-orthogonal candidate {trial}"), OperatorTuple::new(mats)?))
        } else {
            None
        };
        let Some((label, a)) = candidate else { break };
        let Some(cert) = exact_wcb_certificate(&a, HALF_TOL)? else { continue };
        let r = cert.upper;
        let norm_sum: f64 = a.matrices().iter().map(operator_norm).sum();
        let value = if r > 0.5 { (1.0 - 1.0 / (2.0 * r)) * norm_sum } else { 0.0 };
        trace.push((label, value));
        search_value = search_value.max(value);
    }

    Ok(HausdorffEstimate {
        n,
        k,
        p,
        search_value,
        closed_form_bound: bounds.hausdorff_lower,
        floor: bounds.hausdorff_floor,
        trace,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn scalar_tuple(values: &[Complex64]) -> OperatorTuple {
        OperatorTuple::new(values.iter().map(|&v| ComplexMatrix::new(1, 1, vec![v]).unwrap()).collect()).unwrap()
    }

    #[test]
    fn norm_ball_membership_is_decisive() {
        let unitary = ComplexMatrix::from_rows(&[
            vec![c(0.0, 0.0), c(0.0, 1.0)],
            vec![c(0.0, -1.0), c(0.0, 0.0)],
        ])
        .unwrap();
        let t = OperatorTuple::new(vec![unitary, ComplexMatrix::identity(2)]).unwrap();
        assert_eq!(membership_sn(&t, 1e-9).status, Verdict::In);

        let t = OperatorTuple::new(vec![ComplexMatrix::identity(2).scale(c(1.01, 0.0))]).unwrap();
        assert_eq!(membership_sn(&t, 1e-9).status, Verdict::Out);
    }

    #[test]
    fn scalar_membership_by_modulus_sum() {
        let inside = scalar_tuple(&[c(0.25, 0.0), c(0.0, 0.15)]);
        assert_eq!(membership_un(&inside, 4, 0).unwrap().status, Verdict::In);

        let outside = scalar_tuple(&[c(0.35, 0.0), c(0.0, 0.25)]);
        let v = membership_un(&outside, 4, 0).unwrap();
        assert_eq!(v.status, Verdict::Out);
        match v.evidence {
            Evidence::Violation { value, violation, .. } => {
                assert!((value - 0.6).abs() < 1e-6);
                assert!(violation.cross_validated);
            }
            _ => panic!("OUT needs a violation witness"),
        }
    }

    #[test]
    fn boundary_single_matrix_unit_is_in() {
        let t = OperatorTuple::new(vec![ComplexMatrix::matrix_unit(2, 0, 1)]).unwrap();
        let v = membership_un(&t, 4, 0).unwrap();
        assert_eq!(v.status, Verdict::In);
    }

    #[test]
    fn kmax_contains_un_members() {
        let t = scalar_tuple(&[c(0.2, 0.0), c(0.1, 0.1)]);
        for k in 1..=3 {
            assert_eq!(membership_kmax_un(&t, k, 4, 0).unwrap().status, Verdict::In);
        }
    }

    #[test]
    fn membership_w_disk_for_matrix_unit() {
        let t = OperatorTuple::new(vec![ComplexMatrix::matrix_unit(2, 0, 1)]).unwrap();
        let inside = scalar_tuple(&[c(0.49, 0.0)]);
        let v = membership_w(&t, &inside, 20_000, 0).unwrap();
        assert_eq!(v.status, Verdict::In);
        match v.evidence {
            Evidence::Choi { unital_residual, constraint_residual, .. } => {
                assert!(unital_residual <= 1e-7);
                assert!(constraint_residual <= 1e-7);
            }
            _ => panic!("IN needs a Choi witness"),
        }

        let outside = scalar_tuple(&[c(0.51, 0.0)]);
        let v = membership_w(&t, &outside, 20_000, 0).unwrap();
        assert_eq!(v.status, Verdict::Undecided);
        assert!(matches!(v.evidence, Evidence::CrossFlag { .. }));
    }

    #[test]
    fn membership_w_identity_and_state_cases() {
        // B = T: the identity map is a witness.
        let t = OperatorTuple::new(vec![ComplexMatrix::matrix_unit(2, 0, 1)]).unwrap();
        let v = membership_w(&t, &t, 20_000, 1).unwrap();
        assert_eq!(v.status, Verdict::In);

        // B = state values (n = 1): diagonal compression of T.
        let b = scalar_tuple(&[c(0.0, 0.0)]);
        let v = membership_w(&t, &b, 20_000, 2).unwrap();
        assert_eq!(v.status, Verdict::In);
    }

    #[test]
    fn omin_refute_large_norm() {
        // Some |B_i| > 2 gives w(B_i)/2 > 1/2 on a slot indicator.
        let b = OperatorTuple::new(vec![ComplexMatrix::identity(2).scale(c(2.5, 0.0))]).unwrap();
        match omin_refute(&b, 1, 8, 0).unwrap() {
            RefuteOutcome::Refuted { value, certificate_value, .. } => {
                assert!(value > 0.5 + 1e-9);
                assert!((certificate_value - 0.5).abs() < 1e-12);
            }
            RefuteOutcome::NoWitnessFound { .. } => panic!("norm-2.5 entry must be refuted"),
        }
    }

    #[test]
    fn omin_no_witness_for_genuine_members() {
        // Scalars of modulus <= 1 are genuine members of the norm-ball
        // range; the k-min refuter must not fire.
        let b = scalar_tuple(&[c(0.9, 0.0), c(0.0, 0.8)]);
        let out = omin_refute(&b, 2, 12, 3).unwrap();
        assert!(!out.is_refuted());
    }

    #[test]
    fn hausdorff_estimate_shape() {
        let est = hausdorff_gap_estimate(2, 1, 4, 6, 0).unwrap();
        assert!(est.search_value >= 0.0);
        assert!((est.closed_form_bound - 0.0773502691896258).abs() < 1e-12);
        assert!(est.closed_form_bound > est.floor);

        let empty = hausdorff_gap_estimate(2, 1, 4, 0, 0).unwrap();
        assert_eq!(empty.trace.len(), 0);
        assert_eq!(empty.search_value, 0.0);
    }
}
