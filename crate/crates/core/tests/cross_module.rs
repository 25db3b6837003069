//! Cross-module invariants: quantities computed through one module must
//! agree with independent routes through another.

use num_complex::Complex64;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use opradius_core::groups::{self, GroupSpec};
use opradius_core::jointrad::{self, OperatorTuple};
use opradius_core::linalg::{
    hermitian_eigen, operator_norm, psd_check, ComplexMatrix, HermitianMatrix,
};
use opradius_core::numrad;
use opradius_core::opsys::{self, ChoiBlockPair, UcpVerdict};
use opradius_core::ranges::{self, Verdict};

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

fn random_unitary(n: usize, rng: &mut ChaCha8Rng) -> ComplexMatrix {
    // Exponential of a random skew-Hermitian matrix.
    let h = HermitianMatrix::from_upper(n, |r, cc| {
        if r == cc {
            c(rng.gen_range(-1.0..1.0), 0.0)
        } else {
            c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
        }
    });
    let eig = hermitian_eigen(&h).unwrap();
    let mut u = ComplexMatrix::zeros(n, n);
    for r in 0..n {
        for cc in 0..n {
            let mut s = c(0.0, 0.0);
            for j in 0..n {
                s += eig.vectors.get(r, j)
                    * Complex64::from_polar(1.0, eig.values[j])
                    * eig.vectors.get(cc, j).conj();
            }
            u.set(r, cc, s);
        }
    }
    u
}

/// Contraction law through the dilation: [[I, A], [A*, I]] is PSD exactly
/// when |A| <= 1.
#[test]
fn psd_dilation_matches_norm() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..40 {
        let n = rng.gen_range(1..4);
        let a = random_matrix(n, &mut rng);
        let norm = operator_norm(&a);
        // Rescale away from the boundary so the verdict is unambiguous.
        let target = if rng.gen_bool(0.5) { rng.gen_range(0.2..0.95) } else { rng.gen_range(1.05..2.0) };
        let a = a.scale(c(target / norm.max(1e-12), 0.0));
        let mut block = ComplexMatrix::identity(2 * n);
        block.set_block(0, n, &a);
        block.set_block(n, 0, &a.adjoint());
        let h = HermitianMatrix::new(&block).unwrap();
        let verdict = psd_check(&h, 1e-9).unwrap();
        assert_eq!(verdict.is_psd(), target <= 1.0, "target norm {target}");
    }
}

/// For nonnegative-coefficient group truncations the numerical radius of
/// the compression equals the top eigenvalue of its real part.
#[test]
fn truncation_radius_equals_real_part_norm() {
    let spec = GroupSpec::Free(2);
    for radius in [1usize, 2] {
        let op = groups::rep_operator(&spec, &[c(1.0, 0.0), c(0.5, 0.0)], radius, 10_000).unwrap();
        let dense = op.to_dense();
        let w = numrad::numerical_radius(&dense, 1e-6).unwrap();
        let re = numrad::real_part(&dense).unwrap();
        let lam = hermitian_eigen(&re).unwrap().max();
        assert!(w.lower <= lam + 1e-6, "R={radius}: w {} vs lambda_max {}", w.lower, lam);
        assert!(w.upper.unwrap() >= lam - 1e-6, "R={radius}: w {} vs lambda_max {}", w.lower, lam);
        assert!(
            (w.lower - lam).abs() < 2e-6,
            "R={radius}: w {} vs lambda_max {}",
            w.lower,
            lam
        );
    }
}

/// Scalar-coupling joint radius of the truncated generator tuple matches
/// the nonnegative-coefficient value on the same ball: phases absorb.
#[test]
fn w1_of_truncated_generators_matches_re_norm() {
    let spec = GroupSpec::Free(2);
    let radius = 1;
    let ball = groups::ball_enumerate(&spec, radius, 10_000).unwrap();
    let singles: Vec<ComplexMatrix> = (0..2)
        .map(|i| {
            let mut unit = vec![c(0.0, 0.0); 2];
            unit[i] = c(1.0, 0.0);
            groups::rep_operator_on_ball(&spec, &ball, &unit).unwrap().to_dense()
        })
        .collect();
    let t = OperatorTuple::new(singles).unwrap();
    let w1 = jointrad::w1(&t, 1e-6, 0).unwrap();
    let re = groups::re_norm_lower(&spec, &[1.0, 1.0], radius, 1e-9, 0).unwrap();
    assert!(
        (w1.lower - re.lower).abs() < 1e-5,
        "w1 {} vs re_norm {}",
        w1.lower,
        re.lower
    );

    // The sparse phase-optimized search agrees on a deeper truncation.
    let check = groups::w1_group_check(&spec, &[c(0.0, 1.0), c(-1.0, 0.0)], 8, 0).unwrap();
    assert!(check.agreement() < 1e-6, "agreement {}", check.agreement());
}

/// UCP scaling law: generators scaled by c are certified for c <= 1 and
/// refuted for c >= 1 + margin.
#[test]
fn ucp_scaling_law() {
    for &(scale, expect_certified) in
        &[(0.3f64, true), (0.7, true), (1.0, true), (1.3, false), (2.0, false)]
    {
        let t = opsys::un_generators(2).scale(c(scale, 0.0));
        match opsys::ucp_check(&t, 4, 0).unwrap() {
            UcpVerdict::Certified { .. } => assert!(expect_certified, "scale {scale} certified"),
            UcpVerdict::Refuted { .. } => assert!(!expect_certified, "scale {scale} refuted"),
            UcpVerdict::Undecided { .. } => panic!("scale {scale} must be decided"),
        }
    }
}

/// Trace obstruction slack is nonnegative on every PSD input meeting the
/// preconditions: the operation re-derives an inequality, so a negative
/// slack would be a bug.
#[test]
fn choi_trace_bound_random_inputs() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut accepted = 0;
    while accepted < 25 {
        let p = rng.gen_range(1..4);
        let u = random_unitary(p, &mut rng);
        let w: f64 = rng.gen_range(0.4..3.0);
        let t = rng.gen_range(1.0 / (2.0 * w)..2.0 / w);
        // P = Q = tI + small PSD noise keeps the pair PSD.
        let noise = {
            let g = random_matrix(p, &mut rng).scale(c(0.1, 0.0));
            g.adjoint().mul(&g).unwrap()
        };
        let mut diag = ComplexMatrix::scaled_identity(p, c(t, 0.0));
        diag = diag.add(&noise).unwrap();
        let ph = HermitianMatrix::new(&diag).unwrap();
        let pair = ChoiBlockPair::new(
            ph.clone(),
            u.scale(c(1.0 / (2.0 * w), 0.0)),
            ph.clone(),
        )
        .unwrap();
        match opsys::choi_block_trace_bound(&pair, &u, w, 1e-9) {
            Ok(tb) => {
                assert!(tb.slack >= -1e-9, "slack {}", tb.slack);
                assert!(tb.value >= tb.bound - 1e-9);
                accepted += 1;
            }
            Err(_) => {
                // Noise occasionally pushes the pair off PSD; skip.
            }
        }
    }
}

/// The norm of the assembled matrix-unit-system element dominates every
/// coefficient norm.
#[test]
fn element_norm_dominates_coefficients() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..20 {
        let p = rng.gen_range(1..4);
        let n = rng.gen_range(1..4);
        let a0m = {
            let g = random_matrix(p, &mut rng);
            g.add(&g.adjoint()).unwrap().scale(c(0.5, 0.0))
        };
        let a0 = HermitianMatrix::new(&a0m).unwrap();
        let coeffs: Vec<ComplexMatrix> = (0..n).map(|_| random_matrix(p, &mut rng)).collect();
        let e = opsys::UnElement::new(a0, coeffs.clone()).unwrap();
        // Norm of the element: max over the direct-sum blocks.
        let elem_norm = (0..n)
            .map(|i| operator_norm(&e.block(i).to_matrix()))
            .fold(0.0f64, f64::max);
        for coeff in &coeffs {
            assert!(operator_norm(coeff) <= elem_norm + 1e-9);
        }
    }
}

/// Containment chain: a tuple certified IN the cb-ball range is IN at
/// every k-max level, and a tuple inside the norm-ball range is never
/// refuted on the k-min side.
#[test]
fn containment_chain_randomized() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..12 {
        let d = rng.gen_range(1..4);
        // Scalar tuples with modulus sum below 1/2 are genuine members.
        let total: f64 = rng.gen_range(0.05..0.45);
        let raw: Vec<f64> = (0..d).map(|_| rng.gen_range(0.1..1.0)).collect();
        let sum: f64 = raw.iter().sum();
        let scalars: Vec<ComplexMatrix> = raw
            .iter()
            .map(|&r| {
                ComplexMatrix::new(
                    1,
                    1,
                    vec![Complex64::from_polar(total * r / sum, rng.gen_range(0.0..std::f64::consts::TAU))],
                )
                .unwrap()
            })
            .collect();
        let t = OperatorTuple::new(scalars).unwrap();
        assert_eq!(ranges::membership_un(&t, 4, 1).unwrap().status, Verdict::In);
        for k in 1..=3 {
            let v = ranges::membership_kmax_un(&t, k, 4, 1).unwrap();
            assert_ne!(v.status, Verdict::Out, "chain violated at k={k}");
        }
    }
    for seed in 0..8u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(100 + seed);
        let d = rng.gen_range(1..3);
        let p = rng.gen_range(1..3);
        let mats: Vec<ComplexMatrix> = (0..d)
            .map(|_| {
                let m = random_matrix(p, &mut rng);
                let norm = operator_norm(&m);
                m.scale(c(rng.gen_range(0.2..0.99) / norm.max(1e-12), 0.0))
            })
            .collect();
        let b = OperatorTuple::new(mats).unwrap();
        assert_eq!(ranges::membership_sn(&b, 1e-9).status, Verdict::In);
        let out = ranges::omin_refute(&b, 2, 10, seed).unwrap();
        assert!(!out.is_refuted(), "genuine member refuted (seed {seed})");
    }
}

/// d = 1: all membership operations agree with the disk/ball pictures
/// derived from the radius and norm oracles.
#[test]
fn single_operator_memberships_agree_with_disks() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for _ in 0..10 {
        let m = random_matrix(2, &mut rng);
        let t = OperatorTuple::new(vec![m.clone()]).unwrap();
        let w = numrad::numerical_radius(&m, 1e-9).unwrap();
        let norm = operator_norm(&m);
        if norm < 1.0 - 1e-6 {
            assert_eq!(ranges::membership_sn(&t, 1e-9).status, Verdict::In);
        }
        if norm > 1.0 + 1e-6 {
            assert_eq!(ranges::membership_sn(&t, 1e-9).status, Verdict::Out);
        }
        let un = ranges::membership_un(&t, 4, 0).unwrap();
        if w.upper.unwrap() < 0.5 - 1e-6 {
            assert_eq!(un.status, Verdict::In);
        }
        if w.lower > 0.5 + 1e-6 {
            assert_eq!(un.status, Verdict::Out);
        }
    }
}

/// Certificate law for the assembled tridiagonal: scaled generators with
/// identity diagonal stay positive up to the norm boundary.
#[test]
fn tridiagonal_certificate_boundary() {
    for &(scale, valid) in &[(0.5f64, true), (1.0, true), (1.4, false)] {
        let t = opsys::un_generators(2).scale(c(scale, 0.0));
        let cert = jointrad::TridiagonalCertificate::new(
            vec![HermitianMatrix::identity(4); 3],
            t.matrices().to_vec(),
        )
        .unwrap();
        let check = jointrad::verify_tridiagonal_certificate(&cert, 1e-9).unwrap();
        assert_eq!(check.valid, valid, "scale {scale}");
        assert!((check.diag_sum_norm - 3.0).abs() < 1e-10);
    }
}
