//! Canonical report emission.
//!
//! Reports are ordered `key = value` lines with embedded matrices in the
//! shared text format. Floats are printed with 17 significant digits and
//! lowercase exponents, so identical invocations produce identical bytes.

use num_complex::Complex64;
use opradius_core::io::{emit_matrix, format_f64};
use opradius_core::linalg::ComplexMatrix;
use opradius_core::numrad::RadiusEstimate;

pub const SCHEMA: &str = "opradius-report/1";

pub struct Report {
    lines: Vec<String>,
}

impl Report {
    pub fn new(command: &str) -> Self {
        let mut r = Report { lines: Vec::new() };
        r.kv("schema", SCHEMA);
        r.kv("command", command);
        r
    }

    pub fn kv(&mut self, key: &str, value: impl std::fmt::Display) {
        self.lines.push(format!("{key} = {value}"));
    }

    pub fn kv_f64(&mut self, key: &str, value: f64) {
        self.lines.push(format!("{key} = {}", format_f64(value)));
    }

    pub fn kv_bool(&mut self, key: &str, value: bool) {
        self.kv(key, if value { "true" } else { "false" });
    }

    /// Records an estimate with its producing operation and tolerance, so
    /// every quantitative claim is attributable.
    pub fn estimate(&mut self, prefix: &str, op: &str, tol: f64, est: &RadiusEstimate) {
        self.kv(&format!("{prefix}.op"), op);
        self.kv_f64(&format!("{prefix}.tol"), tol);
        self.kv_f64(&format!("{prefix}.lower"), est.lower);
        match est.upper {
            Some(u) => self.kv_f64(&format!("{prefix}.upper"), u),
            None => self.kv(&format!("{prefix}.upper"), "inf"),
        }
        self.kv(&format!("{prefix}.lower_method"), est.lower_method.as_str());
        if let Some(m) = est.upper_method {
            self.kv(&format!("{prefix}.upper_method"), m.as_str());
        }
        self.kv(&format!("{prefix}.iterations"), est.iterations);
    }

    pub fn matrix(&mut self, name: &str, m: &ComplexMatrix) {
        self.lines.push(format!("begin matrix {name}"));
        for line in emit_matrix(m).lines() {
            self.lines.push(line.to_string());
        }
        self.lines.push("end matrix".to_string());
    }

    pub fn vector(&mut self, name: &str, v: &[Complex64]) {
        let m = ComplexMatrix::new(v.len(), 1, v.to_vec()).expect("column vector");
        self.matrix(name, &m);
    }

    pub fn emit(&self) -> String {
        let mut out = String::new();
        for line in &self.lines {
            out.push_str(line);
            out.push('\n');
        }
        out
    }
}
