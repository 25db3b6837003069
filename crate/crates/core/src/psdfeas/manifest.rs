//! Text manifest for feasibility problems.
//!
//! ```text
//! # lines starting with # are comments
//! var P1 2                 # Hermitian variable block, dimension 2
//! psd P1                   # require the block itself PSD
//! const A 2                # named constant, followed by `dim` rows
//! 0+0i 1+0i
//! 0+0i 0+0i
//! pattern [[P1, A], [A*, Q1]]
//! affine P1 0 0 1+0i  Q1 1 1 1+0i = 2+0i
//! tol 1e-7
//! max_iter 50000
//! ```

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::io::{emit_matrix, format_complex, format_f64, parse_complex};
use crate::linalg::ComplexMatrix;
use crate::psdfeas::{AffineTerm, Cell, FeasibilityProblem};

pub fn parse_problem(text: &str) -> Result<FeasibilityProblem> {
    let mut p = FeasibilityProblem::new();
    let lines: Vec<(usize, &str)> = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
        .collect();
    let mut i = 0usize;
    // Patterns and psd flags reference names, so collect them after all
    // declarations parse.
    let mut pending_psd: Vec<(usize, String)> = Vec::new();
    let mut pending_patterns: Vec<(usize, String)> = Vec::new();
    let mut pending_affine: Vec<(usize, String)> = Vec::new();

    while i < lines.len() {
        let (lno, line) = lines[i];
        i += 1;
        if line.is_empty() {
            continue;
        }
        let (key, rest) = line.split_once(char::is_whitespace).unwrap_or((line, ""));
        let rest = rest.trim();
        match key {
            "var" => {
                let mut it = rest.split_whitespace();
                let name = it.next().ok_or(Error::Parse { line: lno, msg: "var needs a name".into() })?;
                let dim: usize = it
                    .next()
                    .and_then(|s| s.parse().ok())
                    .ok_or(Error::Parse { line: lno, msg: "var needs a dimension".into() })?;
                p.add_block(name, dim).map_err(|e| Error::Parse { line: lno, msg: e.to_string() })?;
            }
            "const" => {
                let mut it = rest.split_whitespace();
                let name = it.next().ok_or(Error::Parse { line: lno, msg: "const needs a name".into() })?;
                let dim: usize = it
                    .next()
                    .and_then(|s| s.parse().ok())
                    .ok_or(Error::Parse { line: lno, msg: "const needs a dimension".into() })?;
                let mut entries = Vec::with_capacity(dim * dim);
                for _ in 0..dim {
                    let (rlno, row) = *lines
                        .get(i)
                        .ok_or(Error::Parse { line: lno, msg: format!("const {name} needs {dim} rows") })?;
                    i += 1;
                    let toks: Vec<&str> = row.split_whitespace().collect();
                    if toks.len() != dim {
                        return Err(Error::Parse { line: rlno, msg: format!("expected {dim} entries") });
                    }
                    for tok in toks {
                        entries.push(parse_complex(tok).map_err(|msg| Error::Parse { line: rlno, msg })?);
                    }
                }
                let m = ComplexMatrix::new(dim, dim, entries)?;
                p.add_const(name, m).map_err(|e| Error::Parse { line: lno, msg: e.to_string() })?;
            }
            "psd" => pending_psd.push((lno, rest.to_string())),
            "pattern" => pending_patterns.push((lno, rest.to_string())),
            "affine" => pending_affine.push((lno, rest.to_string())),
            "tol" => {
                p.tol = rest
                    .parse()
                    .map_err(|_| Error::Parse { line: lno, msg: format!("bad tolerance '{rest}'") })?;
                if p.tol <= 0.0 {
                    return Err(Error::Parse { line: lno, msg: "tolerance must be positive".into() });
                }
            }
            "max_iter" => {
                p.max_iter = rest
                    .parse()
                    .map_err(|_| Error::Parse { line: lno, msg: format!("bad iteration cap '{rest}'") })?;
            }
            other => {
                return Err(Error::Parse { line: lno, msg: format!("unknown directive '{other}'") });
            }
        }
    }

    for (lno, name) in pending_psd {
        let idx = block_index(&p, &name).ok_or(Error::Parse { line: lno, msg: format!("psd references unknown block '{name}'") })?;
        p.require_psd(idx).map_err(|e| Error::Parse { line: lno, msg: e.to_string() })?;
    }
    for (lno, text) in pending_patterns {
        let cells = parse_pattern_cells(&p, &text, lno)?;
        p.add_pattern(cells).map_err(|e| Error::Parse { line: lno, msg: e.to_string() })?;
    }
    for (lno, text) in pending_affine {
        let (terms, target) = parse_affine_row(&p, &text, lno)?;
        p.add_affine(terms, target).map_err(|e| Error::Parse { line: lno, msg: e.to_string() })?;
    }
    Ok(p)
}

fn block_index(p: &FeasibilityProblem, name: &str) -> Option<usize> {
    p.blocks.iter().position(|(n, _)| n == name)
}

fn const_index(p: &FeasibilityProblem, name: &str) -> Option<usize> {
    p.consts.iter().position(|(n, _)| n == name)
}

fn parse_cell(p: &FeasibilityProblem, tok: &str, lno: usize) -> Result<Cell> {
    let tok = tok.trim();
    if tok == "0" {
        return Ok(Cell::Zero);
    }
    let (name, adjoint) = match tok.strip_suffix('*') {
        Some(base) => (base, true),
        None => (tok, false),
    };
    if let Some(idx) = block_index(p, name) {
        return Ok(Cell::Var { idx, adjoint });
    }
    if let Some(idx) = const_index(p, name) {
        return Ok(Cell::Const { idx, adjoint });
    }
    Err(Error::Parse { line: lno, msg: format!("pattern cell '{tok}' is not a declared name") })
}

fn parse_pattern_cells(p: &FeasibilityProblem, text: &str, lno: usize) -> Result<Vec<Vec<Cell>>> {
    let compact: String = text.chars().filter(|c| !c.is_whitespace()).collect();
    let inner = compact
        .strip_prefix("[[")
        .and_then(|s| s.strip_suffix("]]"))
        .ok_or(Error::Parse { line: lno, msg: "pattern must look like [[A, B],[B*, C]]".into() })?;
    let mut cells = Vec::new();
    for row in inner.split("],[") {
        let row_cells: Vec<Cell> = row
            .split(',')
            .map(|tok| parse_cell(p, tok, lno))
            .collect::<Result<_>>()?;
        cells.push(row_cells);
    }
    Ok(cells)
}

fn parse_affine_row(p: &FeasibilityProblem, text: &str, lno: usize) -> Result<(Vec<AffineTerm>, Complex64)> {
    let (lhs, rhs) = text
        .rsplit_once('=')
        .ok_or(Error::Parse { line: lno, msg: "affine row needs '= target'".into() })?;
    let target = parse_complex(rhs.trim()).map_err(|msg| Error::Parse { line: lno, msg })?;
    let toks: Vec<&str> = lhs.split_whitespace().collect();
    if toks.is_empty() || toks.len() % 4 != 0 {
        return Err(Error::Parse {
            line: lno,
            msg: "affine row must be groups of `name row col coeff`".into(),
        });
    }
    let mut terms = Vec::with_capacity(toks.len() / 4);
    for chunk in toks.chunks(4) {
        let block = block_index(p, chunk[0])
            .ok_or(Error::Parse { line: lno, msg: format!("affine references unknown block '{}'", chunk[0]) })?;
        let row: usize = chunk[1]
            .parse()
            .map_err(|_| Error::Parse { line: lno, msg: format!("bad row '{}'", chunk[1]) })?;
        let col: usize = chunk[2]
            .parse()
            .map_err(|_| Error::Parse { line: lno, msg: format!("bad col '{}'", chunk[2]) })?;
        let coeff = parse_complex(chunk[3]).map_err(|msg| Error::Parse { line: lno, msg })?;
        terms.push(AffineTerm { block, row, col, coeff });
    }
    Ok((terms, target))
}

pub fn emit_problem(p: &FeasibilityProblem) -> String {
    let mut out = String::new();
    for (name, dim) in &p.blocks {
        out.push_str(&format!("var {name} {dim}\n"));
    }
    for &idx in &p.psd_blocks {
        out.push_str(&format!("psd {}\n", p.blocks[idx].0));
    }
    for (name, m) in &p.consts {
        out.push_str(&format!("const {name} {}\n", m.rows()));
        let body = emit_matrix(m);
        // Drop the `rows cols` header: const rows follow the declaration.
        for line in body.lines().skip(1) {
            out.push_str(line);
            out.push('\n');
        }
    }
    for pat in &p.patterns {
        let rows: Vec<String> = pat
            .cells
            .iter()
            .map(|row| {
                let cells: Vec<String> = row
                    .iter()
                    .map(|c| match c {
                        Cell::Zero => "0".to_string(),
                        Cell::Var { idx, adjoint } => {
                            format!("{}{}", p.blocks[*idx].0, if *adjoint { "*" } else { "" })
                        }
                        Cell::Const { idx, adjoint } => {
                            format!("{}{}", p.consts[*idx].0, if *adjoint { "*" } else { "" })
                        }
                    })
                    .collect();
                format!("[{}]", cells.join(", "))
            })
            .collect();
        out.push_str(&format!("pattern [{}]\n", rows.join(",")));
    }
    for ac in &p.affine {
        let terms: Vec<String> = ac
            .terms
            .iter()
            .map(|t| format!("{} {} {} {}", p.blocks[t.block].0, t.row, t.col, format_complex(t.coeff)))
            .collect();
        out.push_str(&format!("affine {} = {}\n", terms.join("  "), format_complex(ac.target)));
    }
    out.push_str(&format!("tol {}\n", format_f64(p.tol)));
    out.push_str(&format!("max_iter {}\n", p.max_iter));
    out
}
