//! Exhaustive small-instance oracle: eliminate the affine constraints,
//! grid the few remaining real parameters, and decide feasibility of the
//! PSD constraints by maximizing the concave objective
//! `g(t) = min over constraints of lambda_min(assembled(t))`.
//!
//! The verdict is sound inside the search box by a Lipschitz margin on the
//! full grid; since `g` is concave, a refined interior maximum extends the
//! negative verdict globally. Independent of the alternating-projection
//! path in [`super::solve`].

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{hermitian_eigen, operator_norm, ComplexMatrix, HermitianMatrix};
use crate::psdfeas::solve::{block_matrix, realify, AffineProjector, RealProblem};
use crate::psdfeas::FeasibilityProblem;

#[derive(Debug, Clone, Copy)]
pub struct OracleOptions {
    pub box_halfwidth: f64,
    pub grid_per_axis: usize,
}

impl Default for OracleOptions {
    fn default() -> Self {
        Self { box_halfwidth: 8.0, grid_per_axis: 9 }
    }
}

#[derive(Debug, Clone)]
pub enum OracleVerdict {
    Feasible { witness: Vec<HermitianMatrix>, objective: f64 },
    Infeasible { margin: f64 },
}

impl OracleVerdict {
    pub fn is_feasible(&self) -> bool {
        matches!(self, OracleVerdict::Feasible { .. })
    }
}

pub fn brute_force_oracle(p: &FeasibilityProblem, opts: OracleOptions) -> Result<OracleVerdict> {
    let rp = realify(p, false)?;
    let projector = AffineProjector::new(&rp.rows)?;

    let mut particular = vec![0.0f64; rp.total];
    let residual = projector.project(&mut particular);
    if residual > 1e-8 {
        // No solution to the equality constraints at all.
        return Ok(OracleVerdict::Infeasible { margin: residual });
    }

    let basis = null_space(&rp)?;
    let r = basis.len();
    if r > 3 {
        return Err(Error::InvalidArgument(format!(
            "affine elimination leaves {r} free parameters; the oracle handles at most 3"
        )));
    }

    let eval = |t: &[f64]| -> f64 {
        let x = point_at(&particular, &basis, t);
        objective(p, &rp, &x)
    };

    if r == 0 {
        let g = eval(&[]);
        return Ok(if g >= -p.tol {
            OracleVerdict::Feasible { witness: witness_at(p, &rp, &particular, &basis, &[]), objective: g }
        } else {
            OracleVerdict::Infeasible { margin: -g }
        });
    }

    // Per-axis Lipschitz constants of the assembled constraints.
    let lips: Vec<f64> = (0..r)
        .map(|j| {
            let base = point_at(&particular, &basis, &vec![0.0; r]);
            let mut t = vec![0.0; r];
            t[j] = 1.0;
            let shifted = point_at(&particular, &basis, &t);
            constraint_shift_norm(p, &rp, &base, &shifted)
        })
        .collect();

    let mut box_l = opts.box_halfwidth.max(1.0);
    for _expansion in 0..4 {
        let mut n = opts.grid_per_axis.max(3) | 1;
        let n_cap = if r == 3 { 65 } else { 257 };
        loop {
            let (grid_best, grid_t) = grid_max(&eval, r, box_l, n);
            let (g_star, t_star) = polish(&eval, grid_t, grid_best, box_l);
            if g_star >= -p.tol {
                return Ok(OracleVerdict::Feasible {
                    witness: witness_at(p, &rp, &particular, &basis, &t_star),
                    objective: g_star,
                });
            }
            let h = 2.0 * box_l / (n as f64 - 1.0);
            let slack: f64 = lips.iter().map(|l| l * h / 2.0).sum();
            if grid_best + slack < -p.tol {
                let interior = t_star.iter().all(|&t| t.abs() < 0.9 * box_l);
                if interior {
                    return Ok(OracleVerdict::Infeasible { margin: -(grid_best + slack) });
                }
                break; // maximum pushed to the boundary: expand the box
            }
            if n >= n_cap {
                break;
            }
            n = (2 * n - 1).min(n_cap);
        }
        box_l *= 4.0;
    }
    Err(Error::Internal("oracle grid resolution exhausted without a sound verdict".into()))
}

fn null_space(rp: &RealProblem) -> Result<Vec<Vec<f64>>> {
    let n = rp.total;
    // Dense A^T A over the (small) parameter space.
    let mut gram = vec![0.0f64; n * n];
    for (terms, _) in &rp.rows {
        for &(i, ci) in terms {
            for &(j, cj) in terms {
                gram[i * n + j] += ci * cj;
            }
        }
    }
    let h = HermitianMatrix::from_upper(n, |r, c| Complex64::new(gram[r * n + c], 0.0));
    let eig = hermitian_eigen(&h)?;
    let lam_max = eig.values.last().copied().unwrap_or(0.0).max(1.0);
    let mut basis = Vec::new();
    for (j, &lam) in eig.values.iter().enumerate() {
        if lam <= 1e-10 * lam_max {
            basis.push((0..n).map(|r| eig.vectors.get(r, j).re).collect());
        }
    }
    Ok(basis)
}

fn point_at(particular: &[f64], basis: &[Vec<f64>], t: &[f64]) -> Vec<f64> {
    let mut x = particular.to_vec();
    for (b, &tj) in basis.iter().zip(t) {
        for (xi, bi) in x.iter_mut().zip(b) {
            *xi += tj * bi;
        }
    }
    x
}

/// Min over all PSD constraints of the smallest eigenvalue at x.
fn objective(p: &FeasibilityProblem, rp: &RealProblem, x: &[f64]) -> f64 {
    let vars: Vec<ComplexMatrix> = (0..rp.n_var_blocks).map(|b| block_matrix(rp, x, b)).collect();
    let mut worst = f64::INFINITY;
    for &b in &p.psd_blocks {
        worst = worst.min(min_eig(&vars[b]));
    }
    for pat in &p.patterns {
        worst = worst.min(min_eig(&p.assemble_pattern(pat, &vars)));
    }
    if worst == f64::INFINITY {
        0.0
    } else {
        worst
    }
}

fn min_eig(m: &ComplexMatrix) -> f64 {
    let d = m.rows();
    let h = HermitianMatrix::from_upper(d, |r, c| (m.get(r, c) + m.get(c, r).conj()) * 0.5);
    hermitian_eigen(&h).expect("oracle eigensolve").values[0]
}

fn constraint_shift_norm(p: &FeasibilityProblem, rp: &RealProblem, base: &[f64], shifted: &[f64]) -> f64 {
    let vb: Vec<ComplexMatrix> = (0..rp.n_var_blocks).map(|b| block_matrix(rp, base, b)).collect();
    let vs: Vec<ComplexMatrix> = (0..rp.n_var_blocks).map(|b| block_matrix(rp, shifted, b)).collect();
    let mut worst = 0.0f64;
    for &b in &p.psd_blocks {
        worst = worst.max(operator_norm(&vs[b].sub(&vb[b]).expect("same dims")));
    }
    for pat in &p.patterns {
        let d = p.assemble_pattern(pat, &vs).sub(&p.assemble_pattern(pat, &vb)).expect("same dims");
        worst = worst.max(operator_norm(&d));
    }
    worst
}

fn grid_max(eval: &impl Fn(&[f64]) -> f64, r: usize, box_l: f64, n: usize) -> (f64, Vec<f64>) {
    let step = 2.0 * box_l / (n as f64 - 1.0);
    let mut idx = vec![0usize; r];
    let mut best = f64::NEG_INFINITY;
    let mut best_t = vec![0.0; r];
    loop {
        let t: Vec<f64> = idx.iter().map(|&i| -box_l + i as f64 * step).collect();
        let g = eval(&t);
        if g > best {
            best = g;
            best_t = t;
        }
        let mut axis = 0;
        loop {
            if axis == r {
                return (best, best_t);
            }
            idx[axis] += 1;
            if idx[axis] < n {
                break;
            }
            idx[axis] = 0;
            axis += 1;
        }
    }
}

fn polish(eval: &impl Fn(&[f64]) -> f64, mut t: Vec<f64>, mut value: f64, box_l: f64) -> (f64, Vec<f64>) {
    const INVPHI: f64 = 0.618_033_988_749_894_9;
    let r = t.len();
    for _round in 0..24 {
        let mut improved = false;
        for axis in 0..r {
            let mut lo = (t[axis] - box_l / 4.0).max(-box_l);
            let mut hi = (t[axis] + box_l / 4.0).min(box_l);
            let mut x1 = hi - INVPHI * (hi - lo);
            let mut x2 = lo + INVPHI * (hi - lo);
            let at = |x: f64, t: &[f64]| {
                let mut tt = t.to_vec();
                tt[axis] = x;
                eval(&tt)
            };
            let mut f1 = at(x1, &t);
            let mut f2 = at(x2, &t);
            for _ in 0..28 {
                if f1 < f2 {
                    lo = x1;
                    x1 = x2;
                    f1 = f2;
                    x2 = lo + INVPHI * (hi - lo);
                    f2 = at(x2, &t);
                } else {
                    hi = x2;
                    x2 = x1;
                    f2 = f1;
                    x1 = hi - INVPHI * (hi - lo);
                    f1 = at(x1, &t);
                }
            }
            let (x, f) = if f1 > f2 { (x1, f1) } else { (x2, f2) };
            if f > value + 1e-15 {
                t[axis] = x;
                value = f;
                improved = true;
            }
        }
        if !improved {
            break;
        }
    }
    (value, t)
}

fn witness_at(
    p: &FeasibilityProblem,
    rp: &RealProblem,
    particular: &[f64],
    basis: &[Vec<f64>],
    t: &[f64],
) -> Vec<HermitianMatrix> {
    let x = point_at(particular, basis, t);
    let _ = p;
    (0..rp.n_var_blocks)
        .map(|b| {
            let m = block_matrix(rp, &x, b);
            HermitianMatrix::from_upper(m.rows(), |r, c| (m.get(r, c) + m.get(c, r).conj()) * 0.5)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::psdfeas::{AffineTerm, Cell};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn one_parameter_completion_feasible() {
        // [[1, t], [t, 1]] with t free: feasible (t = 0).
        let mut p = FeasibilityProblem::new();
        let x = p.add_block("X", 2).unwrap();
        p.require_psd(x).unwrap();
        // Pin the diagonal to 1, keep the real off-diagonal free.
        for d in 0..2 {
            p.add_affine(vec![AffineTerm { block: x, row: d, col: d, coeff: c(1.0, 0.0) }], c(1.0, 0.0)).unwrap();
        }
        // Imaginary part of the off-diagonal pinned to zero: one real dof.
        p.add_affine(
            vec![
                AffineTerm { block: x, row: 0, col: 1, coeff: c(1.0, 0.0) },
                AffineTerm { block: x, row: 1, col: 0, coeff: c(-1.0, 0.0) },
            ],
            c(0.0, 0.0),
        )
        .unwrap();
        let v = brute_force_oracle(&p, OracleOptions::default()).unwrap();
        assert!(v.is_feasible());
    }

    #[test]
    fn determinant_obstruction_infeasible() {
        // [[1, 2], [2, x]] PSD with x <= 3 (slack s >= 0, x + s = 3): needs
        // x >= 4, so infeasible.
        let mut p = FeasibilityProblem::new();
        let x = p.add_block("x", 1).unwrap();
        let s = p.add_block("s", 1).unwrap();
        p.require_psd(s).unwrap();
        let top = p
            .add_const(
                "T",
                ComplexMatrix::from_rows(&[vec![c(1.0, 0.0), c(2.0, 0.0)], vec![c(2.0, 0.0), c(0.0, 0.0)]]).unwrap(),
            )
            .unwrap();
        let _ = top;
        // Pattern [[1, 2], [2, x]] via a 2x2 grid of 1x1 cells.
        let one = p.add_const("one", ComplexMatrix::new(1, 1, vec![c(1.0, 0.0)]).unwrap()).unwrap();
        let two = p.add_const("two", ComplexMatrix::new(1, 1, vec![c(2.0, 0.0)]).unwrap()).unwrap();
        p.add_pattern(vec![
            vec![Cell::Const { idx: one, adjoint: false }, Cell::Const { idx: two, adjoint: false }],
            vec![Cell::Const { idx: two, adjoint: true }, Cell::Var { idx: x, adjoint: false }],
        ])
        .unwrap();
        p.add_affine(
            vec![
                AffineTerm { block: x, row: 0, col: 0, coeff: c(1.0, 0.0) },
                AffineTerm { block: s, row: 0, col: 0, coeff: c(1.0, 0.0) },
            ],
            c(3.0, 0.0),
        )
        .unwrap();
        let v = brute_force_oracle(&p, OracleOptions::default()).unwrap();
        assert!(!v.is_feasible());
    }

    #[test]
    fn rejects_too_many_parameters() {
        let mut p = FeasibilityProblem::new();
        let x = p.add_block("X", 2).unwrap();
        p.require_psd(x).unwrap();
        // A 2x2 Hermitian block has 4 real dof and no affine rows: too many.
        let err = brute_force_oracle(&p, OracleOptions::default());
        assert!(matches!(err, Err(Error::InvalidArgument(_))));
    }
}
