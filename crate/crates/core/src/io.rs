//! Shared text formats.
//!
//! Matrix files: first line `rows cols`, then rows of whitespace-separated
//! complex entries written `a+bi` / `a-bi` (e.g. `0.5-1.25i`); `#` starts a
//! comment line. Sparse files: `dim nnz hermitian:{0|1}` then zero-indexed
//! `row col a+bi` triplets. Tuple files: header `d p`, then d matrices
//! separated by blank lines. Matrix-unit-system element files: header
//! `n p`, then the identity coefficient followed by the n generator
//! coefficients.
//!
//! Floats are emitted with 17 significant digits and a lowercase `e`
//! exponent so that emitted files and reports are byte-stable and
//! round-trip exactly.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::jointrad::OperatorTuple;
use crate::linalg::{ComplexMatrix, HermitianMatrix, SparseOperator};
use crate::opsys::UnElement;

/// Canonical float: 17 significant digits, lowercase exponent.
pub fn format_f64(x: f64) -> String {
    format!("{:.16e}", x)
}

/// Canonical complex entry `a+bi` / `a-bi`.
pub fn format_complex(z: Complex64) -> String {
    let im = if z.im.is_sign_negative() && z.im == 0.0 { 0.0 } else { z.im };
    if im < 0.0 {
        format!("{}-{}i", format_f64(z.re), format_f64(-im))
    } else {
        format!("{}+{}i", format_f64(z.re), format_f64(im))
    }
}

/// Parses `a+bi`, `a-bi`, `a`, `bi`, `i`, `-i`.
pub fn parse_complex(token: &str) -> std::result::Result<Complex64, String> {
    let t = token.trim();
    if t.is_empty() {
        return Err("empty complex literal".into());
    }
    if let Some(body) = t.strip_suffix(['i', 'I']) {
        // Either a pure imaginary literal or a+bi: split at the sign of the
        // imaginary part (a '+'/'-' that is neither leading nor part of an
        // exponent).
        if let Some(pos) = split_point(body) {
            let (re_s, im_s) = body.split_at(pos);
            let re: f64 = re_s.parse().map_err(|_| format!("bad real part in '{t}'"))?;
            let im = parse_signed_magnitude(im_s)?;
            return Ok(Complex64::new(re, im));
        }
        let im = match body {
            "" | "+" => 1.0,
            "-" => -1.0,
            _ => body.parse().map_err(|_| format!("bad imaginary part in '{t}'"))?,
        };
        return Ok(Complex64::new(0.0, im));
    }
    let re: f64 = t.parse().map_err(|_| format!("bad real literal '{t}'"))?;
    Ok(Complex64::new(re, 0.0))
}

/// Index of the sign that separates real and imaginary parts, if any.
fn split_point(body: &str) -> Option<usize> {
    let bytes = body.as_bytes();
    for i in (1..bytes.len()).rev() {
        let b = bytes[i];
        if (b == b'+' || b == b'-') && bytes[i - 1] != b'e' && bytes[i - 1] != b'E' {
            return Some(i);
        }
    }
    None
}

fn parse_signed_magnitude(s: &str) -> std::result::Result<f64, String> {
    match s {
        "+" => Ok(1.0),
        "-" => Ok(-1.0),
        _ => s.parse().map_err(|_| format!("bad imaginary magnitude '{s}'")),
    }
}

/// Strips comments and blank lines, keeping 1-based line numbers.
fn content_lines(text: &str) -> Vec<(usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
        .filter(|(_, l)| !l.is_empty())
        .collect()
}

pub fn parse_matrix(text: &str) -> Result<ComplexMatrix> {
    let lines = content_lines(text);
    parse_matrix_lines(&lines, &mut 0)
}

fn parse_matrix_lines(lines: &[(usize, &str)], pos: &mut usize) -> Result<ComplexMatrix> {
    let (lno, header) = *lines.get(*pos).ok_or(Error::Parse {
        line: lines.last().map_or(0, |l| l.0),
        msg: "missing matrix header".into(),
    })?;
    *pos += 1;
    let mut it = header.split_whitespace();
    let rows: usize = it
        .next()
        .and_then(|s| s.parse().ok())
        .ok_or(Error::Parse { line: lno, msg: "expected `rows cols` header".into() })?;
    let cols: usize = it
        .next()
        .and_then(|s| s.parse().ok())
        .ok_or(Error::Parse { line: lno, msg: "expected `rows cols` header".into() })?;
    if it.next().is_some() {
        return Err(Error::Parse { line: lno, msg: "trailing tokens after `rows cols`".into() });
    }
    let mut entries = Vec::with_capacity(rows * cols);
    for _ in 0..rows {
        let (lno, line) = *lines.get(*pos).ok_or(Error::Parse {
            line: lno,
            msg: format!("expected {rows} matrix rows"),
        })?;
        *pos += 1;
        let tokens: Vec<&str> = line.split_whitespace().collect();
        if tokens.len() != cols {
            return Err(Error::Parse {
                line: lno,
                msg: format!("expected {cols} entries, found {}", tokens.len()),
            });
        }
        for tok in tokens {
            entries.push(
                parse_complex(tok).map_err(|msg| Error::Parse { line: lno, msg })?,
            );
        }
    }
    ComplexMatrix::new(rows, cols, entries)
}

pub fn emit_matrix(m: &ComplexMatrix) -> String {
    let mut out = format!("{} {}\n", m.rows(), m.cols());
    for r in 0..m.rows() {
        let row: Vec<String> = (0..m.cols()).map(|c| format_complex(m.get(r, c))).collect();
        out.push_str(&row.join(" "));
        out.push('\n');
    }
    out
}

pub fn parse_sparse(text: &str) -> Result<SparseOperator> {
    let lines = content_lines(text);
    let (lno, header) = *lines.first().ok_or(Error::Parse { line: 0, msg: "empty sparse file".into() })?;
    let mut it = header.split_whitespace();
    let dim: usize = it
        .next()
        .and_then(|s| s.parse().ok())
        .ok_or(Error::Parse { line: lno, msg: "expected `dim nnz hermitian:{0|1}`".into() })?;
    let nnz: usize = it
        .next()
        .and_then(|s| s.parse().ok())
        .ok_or(Error::Parse { line: lno, msg: "expected `dim nnz hermitian:{0|1}`".into() })?;
    let herm = match it.next() {
        Some("hermitian:0") => false,
        Some("hermitian:1") => true,
        _ => {
            return Err(Error::Parse { line: lno, msg: "expected hermitian:{0|1}".into() });
        }
    };
    let mut triplets = Vec::with_capacity(nnz);
    for &(lno, line) in lines.iter().skip(1) {
        let toks: Vec<&str> = line.split_whitespace().collect();
        if toks.len() != 3 {
            return Err(Error::Parse { line: lno, msg: "expected `row col value`".into() });
        }
        let r: usize = toks[0]
            .parse()
            .map_err(|_| Error::Parse { line: lno, msg: format!("bad row index '{}'", toks[0]) })?;
        let c: usize = toks[1]
            .parse()
            .map_err(|_| Error::Parse { line: lno, msg: format!("bad col index '{}'", toks[1]) })?;
        let v = parse_complex(toks[2]).map_err(|msg| Error::Parse { line: lno, msg })?;
        triplets.push((r, c, v));
    }
    if triplets.len() != nnz {
        return Err(Error::Parse {
            line: lno,
            msg: format!("header promises {nnz} triplets, found {}", triplets.len()),
        });
    }
    SparseOperator::new(dim, triplets, herm)
}

pub fn emit_sparse(s: &SparseOperator) -> String {
    let trips = s.triplets();
    let mut out = format!("{} {} hermitian:{}\n", s.dim(), trips.len(), if s.is_hermitian() { 1 } else { 0 });
    for (r, c, v) in trips {
        out.push_str(&format!("{} {} {}\n", r, c, format_complex(v)));
    }
    out
}

/// Tuple file: header `d p`, then d matrices in the shared matrix format.
pub fn parse_tuple(text: &str) -> Result<OperatorTuple> {
    let lines = content_lines(text);
    let (lno, header) = *lines.first().ok_or(Error::Parse { line: 0, msg: "empty tuple file".into() })?;
    let mut it = header.split_whitespace();
    let d: usize = it
        .next()
        .and_then(|s| s.parse().ok())
        .ok_or(Error::Parse { line: lno, msg: "expected `d p` header".into() })?;
    let p: usize = it
        .next()
        .and_then(|s| s.parse().ok())
        .ok_or(Error::Parse { line: lno, msg: "expected `d p` header".into() })?;
    let mut pos = 1usize;
    let mut matrices = Vec::with_capacity(d);
    for j in 0..d {
        let m = parse_matrix_lines(&lines, &mut pos)?;
        if m.rows() != p || m.cols() != p {
            return Err(Error::Parse {
                line: lno,
                msg: format!("tuple entry {j} is {}x{}, header says {p}x{p}", m.rows(), m.cols()),
            });
        }
        matrices.push(m);
    }
    if pos != lines.len() {
        return Err(Error::Parse { line: lines[pos].0, msg: "trailing content after tuple".into() });
    }
    OperatorTuple::new(matrices)
}

pub fn emit_tuple(t: &OperatorTuple) -> String {
    let mut out = format!("{} {}\n", t.len(), t.dim());
    for m in t.matrices() {
        out.push('\n');
        out.push_str(&emit_matrix(m));
    }
    out
}

/// Element file: header `n p`, then the coefficient of the identity
/// followed by the n generator coefficients.
pub fn parse_un_element(text: &str) -> Result<UnElement> {
    let lines = content_lines(text);
    let (lno, header) = *lines.first().ok_or(Error::Parse { line: 0, msg: "empty element file".into() })?;
    let mut it = header.split_whitespace();
    let n: usize = it
        .next()
        .and_then(|s| s.parse().ok())
        .ok_or(Error::Parse { line: lno, msg: "expected `n p` header".into() })?;
    let p: usize = it
        .next()
        .and_then(|s| s.parse().ok())
        .ok_or(Error::Parse { line: lno, msg: "expected `n p` header".into() })?;
    let mut pos = 1usize;
    let a0m = parse_matrix_lines(&lines, &mut pos)?;
    let a0 = HermitianMatrix::new(&a0m)?;
    if a0.dim() != p {
        return Err(Error::Parse { line: lno, msg: format!("identity coefficient is {}x{}, header says {p}", a0m.rows(), a0m.cols()) });
    }
    let mut coeffs = Vec::with_capacity(n);
    for j in 0..n {
        let m = parse_matrix_lines(&lines, &mut pos)?;
        if m.rows() != p || m.cols() != p {
            return Err(Error::Parse {
                line: lno,
                msg: format!("coefficient {} is {}x{}, header says {p}x{p}", j + 1, m.rows(), m.cols()),
            });
        }
        coeffs.push(m);
    }
    UnElement::new(a0, coeffs)
}

pub fn emit_un_element(e: &UnElement) -> String {
    let mut out = format!("{} {}\n", e.n(), e.dim());
    out.push('\n');
    out.push_str(&emit_matrix(&e.identity_coeff().to_matrix()));
    for m in e.generator_coeffs() {
        out.push('\n');
        out.push_str(&emit_matrix(m));
    }
    out
}

/// Comma-separated complex literals, e.g. `1,1` or `2,3i,-0.5+0.5i`.
pub fn parse_coeff_list(s: &str) -> Result<Vec<Complex64>> {
    s.split(',')
        .map(|tok| parse_complex(tok).map_err(|msg| Error::Parse { line: 1, msg }))
        .collect()
}
