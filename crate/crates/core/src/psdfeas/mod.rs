//! PSD feasibility engine: find Hermitian variable blocks satisfying
//! block-pattern positivity and affine equality constraints.
//!
//! The solver alternates projections between the PSD cones (blockwise
//! eigenvalue clipping on lifted pattern blocks) and the affine subspace
//! (least-squares projection with a precomputed factorization). FEASIBLE
//! is only reported after an independent re-verification pass; the engine
//! never claims infeasibility.

mod manifest;
mod oracle;
mod solve;

pub use manifest::{emit_problem, parse_problem};
pub use oracle::{brute_force_oracle, OracleOptions, OracleVerdict};
pub use solve::solve;

use num_complex::Complex64;

use crate::defaults::{FEAS_MAX_ITER, ITERATIVE_TOL, STRUCTURAL_TOL};
use crate::error::{Error, Result};
use crate::linalg::{hermitian_eigen, ComplexMatrix, HermitianMatrix};

/// One cell of a block pattern.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Cell {
    Zero,
    /// Variable block by index, optionally adjointed.
    Var { idx: usize, adjoint: bool },
    /// Named constant by index, optionally adjointed.
    Const { idx: usize, adjoint: bool },
}

/// Rectangular grid of cells assembled into one matrix that is required
/// to be PSD. The grid must be structurally Hermitian: `cells[j][i]` is
/// the adjoint of `cells[i][j]`.
#[derive(Debug, Clone)]
pub struct Pattern {
    pub cells: Vec<Vec<Cell>>,
}

/// One term of an affine functional: `coeff * block[row][col]`.
#[derive(Debug, Clone, Copy)]
pub struct AffineTerm {
    pub block: usize,
    pub row: usize,
    pub col: usize,
    pub coeff: Complex64,
}

#[derive(Debug, Clone)]
pub struct AffineConstraint {
    pub terms: Vec<AffineTerm>,
    pub target: Complex64,
}

#[derive(Debug, Clone)]
pub struct FeasibilityProblem {
    pub(crate) blocks: Vec<(String, usize)>,
    pub(crate) consts: Vec<(String, ComplexMatrix)>,
    pub(crate) psd_blocks: Vec<usize>,
    pub(crate) patterns: Vec<Pattern>,
    pub(crate) affine: Vec<AffineConstraint>,
    pub tol: f64,
    pub max_iter: usize,
}

impl FeasibilityProblem {
    pub fn new() -> Self {
        Self {
            blocks: Vec::new(),
            consts: Vec::new(),
            psd_blocks: Vec::new(),
            patterns: Vec::new(),
            affine: Vec::new(),
            tol: ITERATIVE_TOL,
            max_iter: FEAS_MAX_ITER,
        }
    }

    pub fn add_block(&mut self, name: &str, dim: usize) -> Result<usize> {
        if dim == 0 {
            return Err(Error::InvalidArgument("block dimension must be positive".into()));
        }
        if self.blocks.iter().any(|(n, _)| n == name) || self.consts.iter().any(|(n, _)| n == name) {
            return Err(Error::InvalidArgument(format!("duplicate name '{name}'")));
        }
        self.blocks.push((name.to_string(), dim));
        Ok(self.blocks.len() - 1)
    }

    pub fn add_const(&mut self, name: &str, m: ComplexMatrix) -> Result<usize> {
        if !m.is_square() {
            return Err(Error::ShapeMismatch("constants must be square".into()));
        }
        if self.blocks.iter().any(|(n, _)| n == name) || self.consts.iter().any(|(n, _)| n == name) {
            return Err(Error::InvalidArgument(format!("duplicate name '{name}'")));
        }
        self.consts.push((name.to_string(), m));
        Ok(self.consts.len() - 1)
    }

    pub fn require_psd(&mut self, block: usize) -> Result<()> {
        if block >= self.blocks.len() {
            return Err(Error::InvalidArgument(format!("no block with index {block}")));
        }
        if !self.psd_blocks.contains(&block) {
            self.psd_blocks.push(block);
        }
        Ok(())
    }

    pub fn add_pattern(&mut self, cells: Vec<Vec<Cell>>) -> Result<()> {
        let p = Pattern { cells };
        self.validate_pattern(&p)?;
        self.patterns.push(p);
        Ok(())
    }

    pub fn add_affine(&mut self, terms: Vec<AffineTerm>, target: Complex64) -> Result<()> {
        for t in &terms {
            let (_, dim) = self
                .blocks
                .get(t.block)
                .ok_or_else(|| Error::InvalidArgument(format!("no block with index {}", t.block)))?;
            if t.row >= *dim || t.col >= *dim {
                return Err(Error::InvalidArgument(format!(
                    "entry ({}, {}) out of range for block of dim {dim}",
                    t.row, t.col
                )));
            }
        }
        if !target.re.is_finite() || !target.im.is_finite() {
            return Err(Error::InvalidArgument("affine target must be finite".into()));
        }
        self.affine.push(AffineConstraint { terms, target });
        Ok(())
    }

    pub fn block_dim(&self, idx: usize) -> usize {
        self.blocks[idx].1
    }

    pub fn block_name(&self, idx: usize) -> &str {
        &self.blocks[idx].0
    }

    pub fn block_count(&self) -> usize {
        self.blocks.len()
    }

    pub(crate) fn cell_dim(&self, cell: &Cell) -> Option<usize> {
        match cell {
            Cell::Zero => None,
            Cell::Var { idx, .. } => Some(self.blocks[*idx].1),
            Cell::Const { idx, .. } => Some(self.consts[*idx].1.rows()),
        }
    }

    fn validate_pattern(&self, p: &Pattern) -> Result<()> {
        let rows = p.cells.len();
        if rows == 0 || p.cells.iter().any(|r| r.len() != rows) {
            return Err(Error::ShapeMismatch("pattern grid must be square and nonempty".into()));
        }
        let mut dim = None;
        for row in &p.cells {
            for cell in row {
                if let Cell::Var { idx, .. } = cell {
                    if *idx >= self.blocks.len() {
                        return Err(Error::InvalidArgument(format!("pattern references unknown block {idx}")));
                    }
                }
                if let Cell::Const { idx, .. } = cell {
                    if *idx >= self.consts.len() {
                        return Err(Error::InvalidArgument(format!("pattern references unknown constant {idx}")));
                    }
                }
                if let Some(d) = self.cell_dim(cell) {
                    match dim {
                        None => dim = Some(d),
                        Some(existing) if existing != d => {
                            return Err(Error::ShapeMismatch(format!(
                                "pattern mixes cell dimensions {existing} and {d}"
                            )));
                        }
                        _ => {}
                    }
                }
            }
        }
        if dim.is_none() {
            return Err(Error::InvalidArgument("pattern must reference at least one block".into()));
        }
        // Structural Hermitian symmetry.
        for i in 0..rows {
            for j in 0..rows {
                let a = &p.cells[i][j];
                let b = &p.cells[j][i];
                let ok = match (a, b) {
                    (Cell::Zero, Cell::Zero) => true,
                    (Cell::Var { idx: x, adjoint: ax }, Cell::Var { idx: y, adjoint: ay }) => {
                        x == y && (i == j || ax != ay)
                    }
                    (Cell::Const { idx: x, adjoint: ax }, Cell::Const { idx: y, adjoint: ay }) => {
                        x == y && (i == j || ax != ay)
                    }
                    _ => false,
                };
                if !ok {
                    return Err(Error::ShapeMismatch(format!(
                        "pattern cell ({j},{i}) is not the adjoint of cell ({i},{j})"
                    )));
                }
                if i == j {
                    if let Cell::Const { idx, .. } = a {
                        let m = &self.consts[*idx].1;
                        let scale = m.max_abs().max(1.0);
                        if !m.approx_eq(&m.adjoint(), STRUCTURAL_TOL * scale) {
                            return Err(Error::NotHermitian(format!(
                                "diagonal pattern constant '{}' is not Hermitian",
                                self.consts[*idx].0
                            )));
                        }
                    }
                }
            }
        }
        Ok(())
    }

    /// Assembles a pattern from concrete variable values.
    pub(crate) fn assemble_pattern(&self, p: &Pattern, values: &[ComplexMatrix]) -> ComplexMatrix {
        let grid = p.cells.len();
        let d = p
            .cells
            .iter()
            .flatten()
            .find_map(|c| self.cell_dim(c))
            .expect("validated pattern has a dimension");
        let mut out = ComplexMatrix::zeros(grid * d, grid * d);
        for (i, row) in p.cells.iter().enumerate() {
            for (j, cell) in row.iter().enumerate() {
                let block = match cell {
                    Cell::Zero => continue,
                    Cell::Var { idx, adjoint } => {
                        if *adjoint {
                            values[*idx].adjoint()
                        } else {
                            values[*idx].clone()
                        }
                    }
                    Cell::Const { idx, adjoint } => {
                        if *adjoint {
                            self.consts[*idx].1.adjoint()
                        } else {
                            self.consts[*idx].1.clone()
                        }
                    }
                };
                out.set_block(i * d, j * d, &block);
            }
        }
        out
    }
}

impl Default for FeasibilityProblem {
    fn default() -> Self {
        Self::new()
    }
}

#[derive(Debug, Clone)]
pub enum FeasibilityStatus {
    Feasible(Vec<HermitianMatrix>),
    Unknown,
}

#[derive(Debug, Clone)]
pub struct FeasibilityResult {
    pub status: FeasibilityStatus,
    /// Worst PSD violation (most negative eigenvalue, clamped at 0) at exit.
    pub psd_residual: f64,
    /// Worst affine row residual at exit.
    pub affine_residual: f64,
    pub iterations: usize,
}

impl FeasibilityResult {
    pub fn is_feasible(&self) -> bool {
        matches!(self.status, FeasibilityStatus::Feasible(_))
    }
}

/// Nearest PSD matrix in Frobenius distance: eigenvalue clipping.
pub fn project_psd(h: &HermitianMatrix) -> HermitianMatrix {
    let eig = hermitian_eigen(h).expect("eigensolve of a valid Hermitian matrix");
    let n = h.dim();
    let mut entries = ComplexMatrix::zeros(n, n);
    for r in 0..n {
        for c in 0..n {
            let mut s = Complex64::new(0.0, 0.0);
            for j in 0..n {
                let lam = eig.values[j].max(0.0);
                if lam == 0.0 {
                    continue;
                }
                s += eig.vectors.get(r, j) * lam * eig.vectors.get(c, j).conj();
            }
            entries.set(r, c, s);
        }
    }
    HermitianMatrix::new(&entries).expect("clipped matrix is Hermitian")
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn project_psd_identity_on_psd() {
        let h = HermitianMatrix::diagonal(&[2.0, 0.5]);
        let p = project_psd(&h);
        assert!(p.to_matrix().approx_eq(&h.to_matrix(), 1e-12));
    }

    #[test]
    fn project_psd_clips() {
        let h = HermitianMatrix::diagonal(&[1.0, -2.0]);
        let p = project_psd(&h);
        assert!(p.to_matrix().approx_eq(&HermitianMatrix::diagonal(&[1.0, 0.0]).to_matrix(), 1e-12));
    }

    #[test]
    fn project_psd_distance_matches_clipped_mass() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..10 {
            let h = HermitianMatrix::from_upper(4, |r, cc| {
                if r == cc {
                    c(rng.gen_range(-1.0..1.0), 0.0)
                } else {
                    c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
                }
            });
            let p = project_psd(&h);
            let eig = hermitian_eigen(&h).unwrap();
            let expect: f64 = eig.values.iter().filter(|&&l| l < 0.0).map(|l| l * l).sum::<f64>().sqrt();
            let dist = p.to_matrix().sub(&h.to_matrix()).unwrap().frobenius_norm();
            assert!((dist - expect).abs() < 1e-10);
            // Idempotent.
            let pp = project_psd(&p);
            assert!(pp.to_matrix().approx_eq(&p.to_matrix(), 1e-10));
        }
    }

    #[test]
    fn project_psd_variational_inequality() {
        // Metric projection: <H - P(H), Q - P(H)> <= 0 for PSD Q.
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let h = HermitianMatrix::from_upper(3, |r, cc| {
            if r == cc {
                c(rng.gen_range(-1.0..1.0), 0.0)
            } else {
                c(rng.gen_range(-0.5..0.5), rng.gen_range(-0.5..0.5))
            }
        });
        let p = project_psd(&h);
        let diff = h.to_matrix().sub(&p.to_matrix()).unwrap();
        for _ in 0..20 {
            // Random PSD Q = G* G.
            let g = ComplexMatrix::new(
                3,
                3,
                (0..9).map(|_| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect(),
            )
            .unwrap();
            let q = g.adjoint().mul(&g).unwrap();
            let qm = q.sub(&p.to_matrix()).unwrap();
            // Real Frobenius inner product.
            let inner: f64 = (0..3)
                .flat_map(|r| (0..3).map(move |cc| (r, cc)))
                .map(|(r, cc)| (diff.get(r, cc).conj() * qm.get(r, cc)).re)
                .sum();
            assert!(inner <= 1e-9, "variational inequality violated: {inner}");
        }
    }

    #[test]
    fn pattern_validation_rejects_asymmetry() {
        let mut p = FeasibilityProblem::new();
        let a = p.add_block("P", 2).unwrap();
        let b = p.add_block("Q", 2).unwrap();
        // [[P, Q], [Q, P]] is not structurally Hermitian (needs Q*).
        let bad = vec![
            vec![Cell::Var { idx: a, adjoint: false }, Cell::Var { idx: b, adjoint: false }],
            vec![Cell::Var { idx: b, adjoint: false }, Cell::Var { idx: a, adjoint: false }],
        ];
        assert!(p.add_pattern(bad).is_err());
        let good = vec![
            vec![Cell::Var { idx: a, adjoint: false }, Cell::Var { idx: b, adjoint: false }],
            vec![Cell::Var { idx: b, adjoint: true }, Cell::Var { idx: a, adjoint: false }],
        ];
        assert!(p.add_pattern(good).is_ok());
    }
}
