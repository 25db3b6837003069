use num_complex::Complex64;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::linalg::{hermitian_eigen, psd_check, ComplexMatrix, HermitianMatrix, PsdVerdict};
use crate::psdfeas::{Cell, FeasibilityProblem, FeasibilityResult, FeasibilityStatus};

/// Realified view of a problem: every complex entry of every block becomes
/// two real parameters, user and structural constraints become real rows.
pub(crate) struct RealProblem {
    /// Dimensions of all blocks (variables first, then lifted patterns).
    pub dims: Vec<usize>,
    pub offsets: Vec<usize>,
    pub total: usize,
    pub n_var_blocks: usize,
    /// Blocks subject to the PSD clip.
    pub psd_indices: Vec<usize>,
    /// Normalized rows `(sparse terms, rhs)`.
    pub rows: Vec<(Vec<(usize, f64)>, f64)>,
}

#[inline]
fn re_param(offsets: &[usize], dims: &[usize], block: usize, r: usize, c: usize) -> usize {
    offsets[block] + 2 * (r * dims[block] + c)
}

#[inline]
fn im_param(offsets: &[usize], dims: &[usize], block: usize, r: usize, c: usize) -> usize {
    re_param(offsets, dims, block, r, c) + 1
}

struct ComplexTerm {
    block: usize,
    row: usize,
    col: usize,
    coeff: Complex64,
    conj: bool,
}

pub(crate) fn realify(p: &FeasibilityProblem, lift_patterns: bool) -> Result<RealProblem> {
    let mut dims: Vec<usize> = p.blocks.iter().map(|(_, d)| *d).collect();
    let n_var_blocks = dims.len();
    let mut pattern_aux = Vec::new();
    if lift_patterns {
        for pat in &p.patterns {
            let grid = pat.cells.len();
            let d = pat
                .cells
                .iter()
                .flatten()
                .find_map(|c| p.cell_dim(c))
                .expect("validated pattern");
            pattern_aux.push(dims.len());
            dims.push(grid * d);
        }
    }
    let mut offsets = Vec::with_capacity(dims.len());
    let mut total = 0usize;
    for &d in &dims {
        offsets.push(total);
        total += 2 * d * d;
    }

    let mut psd_indices: Vec<usize> = p.psd_blocks.clone();
    psd_indices.extend(pattern_aux.iter().copied());

    let mut rows: Vec<(Vec<(usize, f64)>, f64)> = Vec::new();
    let push_complex = |terms: &[ComplexTerm], target: Complex64, rows: &mut Vec<(Vec<(usize, f64)>, f64)>| {
        let mut re_row = Vec::with_capacity(2 * terms.len());
        let mut im_row = Vec::with_capacity(2 * terms.len());
        for t in terms {
            let rp = re_param(&offsets, &dims, t.block, t.row, t.col);
            let ip = im_param(&offsets, &dims, t.block, t.row, t.col);
            let sign = if t.conj { -1.0 } else { 1.0 };
            // coeff * z or coeff * conj(z): Re = c.re*u -+ c.im*v, Im = c.im*u +- c.re*v
            re_row.push((rp, t.coeff.re));
            re_row.push((ip, -sign * t.coeff.im));
            im_row.push((rp, t.coeff.im));
            im_row.push((ip, sign * t.coeff.re));
        }
        rows.push((re_row, target.re));
        rows.push((im_row, target.im));
    };

    // User constraints.
    for ac in &p.affine {
        let terms: Vec<ComplexTerm> = ac
            .terms
            .iter()
            .map(|t| ComplexTerm { block: t.block, row: t.row, col: t.col, coeff: t.coeff, conj: false })
            .collect();
        push_complex(&terms, ac.target, &mut rows);
    }

    // Hermiticity of variable blocks.
    for (b, &d) in dims.iter().enumerate().take(n_var_blocks) {
        for r in 0..d {
            rows.push((vec![(im_param(&offsets, &dims, b, r, r), 1.0)], 0.0));
            for c in (r + 1)..d {
                rows.push((
                    vec![
                        (re_param(&offsets, &dims, b, r, c), 1.0),
                        (re_param(&offsets, &dims, b, c, r), -1.0),
                    ],
                    0.0,
                ));
                rows.push((
                    vec![
                        (im_param(&offsets, &dims, b, r, c), 1.0),
                        (im_param(&offsets, &dims, b, c, r), 1.0),
                    ],
                    0.0,
                ));
            }
        }
    }

    // Ties between lifted pattern blocks and their cells.
    if lift_patterns {
        for (pi, pat) in p.patterns.iter().enumerate() {
            let aux = pattern_aux[pi];
            let grid = pat.cells.len();
            let d = dims[aux] / grid;
            for (i, row_cells) in pat.cells.iter().enumerate() {
                for (j, cell) in row_cells.iter().enumerate() {
                    for r in 0..d {
                        for c in 0..d {
                            let ar = i * d + r;
                            let ac = j * d + c;
                            match cell {
                                Cell::Zero => {
                                    rows.push((vec![(re_param(&offsets, &dims, aux, ar, ac), 1.0)], 0.0));
                                    rows.push((vec![(im_param(&offsets, &dims, aux, ar, ac), 1.0)], 0.0));
                                }
                                Cell::Var { idx, adjoint } => {
                                    let (vr, vc, conj) = if *adjoint { (c, r, true) } else { (r, c, false) };
                                    let terms = [
                                        ComplexTerm { block: aux, row: ar, col: ac, coeff: Complex64::new(1.0, 0.0), conj: false },
                                        ComplexTerm { block: *idx, row: vr, col: vc, coeff: Complex64::new(-1.0, 0.0), conj },
                                    ];
                                    push_complex(&terms, Complex64::new(0.0, 0.0), &mut rows);
                                }
                                Cell::Const { idx, adjoint } => {
                                    let m = &p.consts[*idx].1;
                                    let v = if *adjoint { m.get(c, r).conj() } else { m.get(r, c) };
                                    let terms = [ComplexTerm {
                                        block: aux,
                                        row: ar,
                                        col: ac,
                                        coeff: Complex64::new(1.0, 0.0),
                                        conj: false,
                                    }];
                                    push_complex(&terms, v, &mut rows);
                                }
                            }
                        }
                    }
                }
            }
        }
    }

    // Normalize rows; drop trivial ones, reject contradictions.
    let mut normalized = Vec::with_capacity(rows.len());
    for (mut terms, rhs) in rows {
        terms.retain(|&(_, c)| c != 0.0);
        let norm: f64 = terms.iter().map(|&(_, c)| c * c).sum::<f64>().sqrt();
        if norm == 0.0 {
            if rhs.abs() > 1e-12 {
                return Err(Error::IllPosedAffine { residual: rhs.abs() });
            }
            continue;
        }
        let terms: Vec<(usize, f64)> = terms.iter().map(|&(i, c)| (i, c / norm)).collect();
        normalized.push((terms, rhs / norm));
    }

    Ok(RealProblem { dims, offsets, total, n_var_blocks, psd_indices, rows: normalized })
}

pub(crate) fn block_matrix(rp: &RealProblem, x: &[f64], block: usize) -> ComplexMatrix {
    let d = rp.dims[block];
    let mut m = ComplexMatrix::zeros(d, d);
    for r in 0..d {
        for c in 0..d {
            let idx = rp.offsets[block] + 2 * (r * d + c);
            m.set(r, c, Complex64::new(x[idx], x[idx + 1]));
        }
    }
    m
}

fn write_block(rp: &RealProblem, x: &mut [f64], block: usize, m: &ComplexMatrix) {
    let d = rp.dims[block];
    for r in 0..d {
        for c in 0..d {
            let idx = rp.offsets[block] + 2 * (r * d + c);
            let z = m.get(r, c);
            x[idx] = z.re;
            x[idx + 1] = z.im;
        }
    }
}

/// Symmetrize-then-clip: nearest PSD matrix to an arbitrary square matrix.
fn clip_psd(m: &ComplexMatrix) -> (ComplexMatrix, f64) {
    let d = m.rows();
    let h = HermitianMatrix::from_upper(d, |r, c| (m.get(r, c) + m.get(c, r).conj()) * 0.5);
    let eig = hermitian_eigen(&h).expect("eigensolve during PSD projection");
    let min = eig.values[0];
    let mut out = ComplexMatrix::zeros(d, d);
    for r in 0..d {
        for c in 0..d {
            let mut s = Complex64::new(0.0, 0.0);
            for j in 0..d {
                let lam = eig.values[j].max(0.0);
                if lam == 0.0 {
                    continue;
                }
                s += eig.vectors.get(r, j) * lam * eig.vectors.get(c, j).conj();
            }
            out.set(r, c, s);
        }
    }
    (out, min)
}

/// Least-squares projector onto the affine subspace `Ax = b`, with a
/// Cholesky factorization of the (ridged) Gram matrix precomputed once.
pub(crate) struct AffineProjector {
    rows: Vec<(Vec<(usize, f64)>, f64)>,
    chol: Vec<f64>,
    m: usize,
}

impl AffineProjector {
    pub fn new(rows: &[(Vec<(usize, f64)>, f64)]) -> Result<Self> {
        let m = rows.len();
        let mut gram = vec![0.0f64; m * m];
        for i in 0..m {
            for j in i..m {
                // Sparse dot product of rows i and j.
                let mut s = 0.0;
                let (a, _) = &rows[i];
                let (b, _) = &rows[j];
                // Rows are short; a hash-free quadratic scan is fine.
                for &(ia, ca) in a {
                    for &(ib, cb) in b {
                        if ia == ib {
                            s += ca * cb;
                        }
                    }
                }
                gram[i * m + j] = s;
                gram[j * m + i] = s;
            }
        }
        let ridge = 1e-10;
        for i in 0..m {
            gram[i * m + i] += ridge;
        }
        cholesky_in_place(&mut gram, m)?;
        Ok(Self { rows: rows.to_vec(), chol: gram, m })
    }

    /// Projects x onto the affine set in place; returns the max row
    /// residual after projection.
    pub fn project(&self, x: &mut [f64]) -> f64 {
        if self.m == 0 {
            return 0.0;
        }
        let mut defect = vec![0.0f64; self.m];
        for (i, (terms, rhs)) in self.rows.iter().enumerate() {
            let mut s = -rhs;
            for &(idx, c) in terms {
                s += c * x[idx];
            }
            defect[i] = s;
        }
        chol_solve(&self.chol, self.m, &mut defect);
        for (i, (terms, _)) in self.rows.iter().enumerate() {
            let y = defect[i];
            if y == 0.0 {
                continue;
            }
            for &(idx, c) in terms {
                x[idx] -= c * y;
            }
        }
        self.residual(x)
    }

    pub fn residual(&self, x: &[f64]) -> f64 {
        let mut worst = 0.0f64;
        for (terms, rhs) in &self.rows {
            let mut s = -rhs;
            for &(idx, c) in terms {
                s += c * x[idx];
            }
            worst = worst.max(s.abs());
        }
        worst
    }
}

fn cholesky_in_place(g: &mut [f64], m: usize) -> Result<()> {
    for i in 0..m {
        for j in 0..=i {
            let mut s = g[i * m + j];
            for k in 0..j {
                s -= g[i * m + k] * g[j * m + k];
            }
            if i == j {
                if s <= 0.0 {
                    return Err(Error::Internal("Gram matrix lost positivity during factorization".into()));
                }
                g[i * m + i] = s.sqrt();
            } else {
                g[i * m + j] = s / g[j * m + j];
            }
        }
        for j in (i + 1)..m {
            g[i * m + j] = 0.0;
        }
    }
    Ok(())
}

fn chol_solve(l: &[f64], m: usize, b: &mut [f64]) {
    for i in 0..m {
        let mut s = b[i];
        for k in 0..i {
            s -= l[i * m + k] * b[k];
        }
        b[i] = s / l[i * m + i];
    }
    for i in (0..m).rev() {
        let mut s = b[i];
        for k in (i + 1)..m {
            s -= l[k * m + i] * b[k];
        }
        b[i] = s / l[i * m + i];
    }
}

const STAGNATION_WINDOW: usize = 400;
const STAGNATION_EPS: f64 = 1e-14;

pub fn solve(p: &FeasibilityProblem, seed: u64) -> Result<FeasibilityResult> {
    let rp = realify(p, true)?;
    let projector = AffineProjector::new(&rp.rows)?;

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut x: Vec<f64> = (0..rp.total).map(|_| rng.gen_range(-0.1..0.1)).collect();

    // Detect an inconsistent affine system up front: projection of any
    // point onto a consistent set satisfies the rows to factorization
    // accuracy.
    let first_residual = projector.project(&mut x);
    if first_residual > 1e-6 {
        return Err(Error::IllPosedAffine { residual: first_residual });
    }

    let mut worst_violation = f64::INFINITY;
    let mut affine_residual = first_residual;
    let mut last_change = f64::INFINITY;
    let mut stagnant = 0usize;

    for iter in 0..p.max_iter {
        // PSD step.
        let mut violation = 0.0f64;
        let mut prev = x.clone();
        for &b in &rp.psd_indices {
            let m = block_matrix(&rp, &x, b);
            let (clipped, min_eig) = clip_psd(&m);
            violation = violation.max((-min_eig).max(0.0));
            write_block(&rp, &mut x, b, &clipped);
        }
        // Affine step.
        affine_residual = projector.project(&mut x);
        worst_violation = violation;

        if violation <= p.tol {
            if let Some(witness) = verify(p, &rp, &x) {
                return Ok(FeasibilityResult {
                    status: FeasibilityStatus::Feasible(witness),
                    psd_residual: violation,
                    affine_residual,
                    iterations: iter + 1,
                });
            }
        }

        // Stagnation: the alternating sequence has settled (typically at
        // the distance-minimizing pair of an empty intersection).
        let change: f64 = x
            .iter()
            .zip(prev.iter_mut())
            .map(|(a, b)| (*a - *b) * (*a - *b))
            .sum::<f64>()
            .sqrt();
        if (change - last_change).abs() <= STAGNATION_EPS * change.max(1.0) && change < 1e-12 {
            stagnant += 1;
            if stagnant >= STAGNATION_WINDOW {
                return Ok(FeasibilityResult {
                    status: FeasibilityStatus::Unknown,
                    psd_residual: worst_violation,
                    affine_residual,
                    iterations: iter + 1,
                });
            }
        } else {
            stagnant = 0;
        }
        last_change = change;
    }

    Ok(FeasibilityResult {
        status: FeasibilityStatus::Unknown,
        psd_residual: worst_violation,
        affine_residual,
        iterations: p.max_iter,
    })
}

/// Independent re-verification: symmetrize the variable blocks, then check
/// every PSD object with the dense eigensolver and every affine row
/// against the symmetrized values.
fn verify(p: &FeasibilityProblem, rp: &RealProblem, x: &[f64]) -> Option<Vec<HermitianMatrix>> {
    let mut vars = Vec::with_capacity(rp.n_var_blocks);
    for b in 0..rp.n_var_blocks {
        let m = block_matrix(rp, x, b);
        let d = m.rows();
        vars.push(HermitianMatrix::from_upper(d, |r, c| (m.get(r, c) + m.get(c, r).conj()) * 0.5));
    }
    let var_mats: Vec<ComplexMatrix> = vars.iter().map(|h| h.to_matrix()).collect();

    for &b in &p.psd_blocks {
        match psd_check(&vars[b], p.tol) {
            Ok(PsdVerdict::Psd) => {}
            _ => return None,
        }
    }
    for pat in &p.patterns {
        let assembled = p.assemble_pattern(pat, &var_mats);
        let h = HermitianMatrix::new(&assembled).ok()?;
        match psd_check(&h, p.tol) {
            Ok(PsdVerdict::Psd) => {}
            _ => return None,
        }
    }
    for ac in &p.affine {
        let mut s = -ac.target;
        for t in &ac.terms {
            s += t.coeff * var_mats[t.block].get(t.row, t.col);
        }
        if s.norm() > p.tol {
            return None;
        }
    }
    Some(vars)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::psdfeas::AffineTerm;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn trace_one_psd_is_feasible() {
        let mut p = FeasibilityProblem::new();
        let x = p.add_block("X", 2).unwrap();
        p.require_psd(x).unwrap();
        p.add_affine(
            vec![
                AffineTerm { block: x, row: 0, col: 0, coeff: c(1.0, 0.0) },
                AffineTerm { block: x, row: 1, col: 1, coeff: c(1.0, 0.0) },
            ],
            c(1.0, 0.0),
        )
        .unwrap();
        let res = solve(&p, 0).unwrap();
        match res.status {
            FeasibilityStatus::Feasible(ws) => {
                assert!((ws[0].trace() - 1.0).abs() < 1e-6);
            }
            FeasibilityStatus::Unknown => panic!("trace-one PSD problem must be feasible"),
        }
    }

    #[test]
    fn contraction_corner_is_infeasible_so_unknown() {
        // [[I, A], [A*, X]] PSD with X = 0 forces A = 0; with |A| = 1 the
        // problem is infeasible and the engine must not claim a witness.
        let mut p = FeasibilityProblem::new();
        let x = p.add_block("X", 2).unwrap();
        let a = p
            .add_const("A", ComplexMatrix::matrix_unit(2, 0, 1))
            .unwrap();
        let i = p.add_const("I", ComplexMatrix::identity(2)).unwrap();
        p.add_pattern(vec![
            vec![Cell::Const { idx: i, adjoint: false }, Cell::Const { idx: a, adjoint: false }],
            vec![Cell::Const { idx: a, adjoint: true }, Cell::Var { idx: x, adjoint: false }],
        ])
        .unwrap();
        // X = 0 entrywise.
        for r in 0..2 {
            for cc in 0..2 {
                p.add_affine(
                    vec![AffineTerm { block: x, row: r, col: cc, coeff: c(1.0, 0.0) }],
                    c(0.0, 0.0),
                )
                .unwrap();
            }
        }
        p.max_iter = 3000;
        let res = solve(&p, 1).unwrap();
        assert!(!res.is_feasible());
    }

    #[test]
    fn inconsistent_affine_is_reported() {
        let mut p = FeasibilityProblem::new();
        let x = p.add_block("X", 1).unwrap();
        p.add_affine(vec![AffineTerm { block: x, row: 0, col: 0, coeff: c(1.0, 0.0) }], c(1.0, 0.0)).unwrap();
        p.add_affine(vec![AffineTerm { block: x, row: 0, col: 0, coeff: c(1.0, 0.0) }], c(2.0, 0.0)).unwrap();
        assert!(matches!(solve(&p, 0), Err(Error::IllPosedAffine { .. })));
    }

    #[test]
    fn feasible_never_flips_with_larger_budget() {
        let mut p = FeasibilityProblem::new();
        let x = p.add_block("X", 2).unwrap();
        p.require_psd(x).unwrap();
        p.add_affine(
            vec![AffineTerm { block: x, row: 0, col: 1, coeff: c(1.0, 0.0) }],
            c(0.25, 0.0),
        )
        .unwrap();
        p.max_iter = 2000;
        let small = solve(&p, 7).unwrap();
        p.max_iter = 20_000;
        let large = solve(&p, 7).unwrap();
        assert!(small.is_feasible());
        assert!(large.is_feasible());
        assert_eq!(small.iterations, large.iterations);
    }
}
