//! Finitely generated group machinery: reduced words, Cayley-ball
//! enumeration, and sparse truncations of group-algebra elements on the
//! span of a ball.

mod ball;
mod rep;

pub use ball::{ball_enumerate, projected_ball_size, BallIndex};
pub use rep::{
    amenability_gap, radial_compression, re_norm_lower, real_rep_operator, rep_operator,
    rep_operator_on_ball, w1_group_check, AmenabilityHint, AmenabilityReport, W1GroupReport,
};

use crate::error::{Error, Result};

/// Supported group families. The generator count is derived from the kind:
/// `Free(n)` and `FreeAbelian(d)` have `n` and `d` generators, `Cyclic(m)`
/// has one.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GroupSpec {
    Free(usize),
    FreeAbelian(usize),
    Cyclic(u64),
}

impl GroupSpec {
    pub fn validate(&self) -> Result<()> {
        match self {
            GroupSpec::Free(n) if *n >= 1 => Ok(()),
            GroupSpec::FreeAbelian(d) if *d >= 1 => Ok(()),
            GroupSpec::Cyclic(m) if *m >= 2 => Ok(()),
            GroupSpec::Free(_) => Err(Error::InvalidArgument("free rank must be >= 1".into())),
            GroupSpec::FreeAbelian(_) => Err(Error::InvalidArgument("abelian rank must be >= 1".into())),
            GroupSpec::Cyclic(_) => Err(Error::InvalidArgument("cyclic order must be >= 2".into())),
        }
    }

    pub fn generator_count(&self) -> usize {
        match self {
            GroupSpec::Free(n) => *n,
            GroupSpec::FreeAbelian(d) => *d,
            GroupSpec::Cyclic(_) => 1,
        }
    }

    /// Grammar: `free:n`, `abelian:d`, `cyclic:m`.
    pub fn parse(s: &str) -> Result<Self> {
        let (kind, arg) = s
            .split_once(':')
            .ok_or_else(|| Error::InvalidArgument(format!("group spec '{s}' (expected kind:arg)")))?;
        let spec = match kind {
            "free" => GroupSpec::Free(arg.parse().map_err(|_| {
                Error::InvalidArgument(format!("bad free rank '{arg}'"))
            })?),
            "abelian" => GroupSpec::FreeAbelian(arg.parse().map_err(|_| {
                Error::InvalidArgument(format!("bad abelian rank '{arg}'"))
            })?),
            "cyclic" => GroupSpec::Cyclic(arg.parse().map_err(|_| {
                Error::InvalidArgument(format!("bad cyclic order '{arg}'"))
            })?),
            other => return Err(Error::InvalidArgument(format!("unknown group kind '{other}'"))),
        };
        spec.validate()?;
        Ok(spec)
    }
}

impl std::fmt::Display for GroupSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            GroupSpec::Free(n) => write!(f, "free:{n}"),
            GroupSpec::FreeAbelian(d) => write!(f, "abelian:{d}"),
            GroupSpec::Cyclic(m) => write!(f, "cyclic:{m}"),
        }
    }
}

/// A group element in reduced normal form.
///
/// Letters are signed one-based generator indices (`+i` for the i-th
/// generator, `-i` for its inverse). Normal forms: free groups keep the
/// reduced word as written; free abelian groups sort letters by generator
/// index; cyclic groups store the exponent in `[0, m)` as repeated `+1`s.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Word {
    letters: Vec<i32>,
}

impl Word {
    pub fn identity() -> Self {
        Word { letters: Vec::new() }
    }

    pub fn letters(&self) -> &[i32] {
        &self.letters
    }

    pub fn is_identity(&self) -> bool {
        self.letters.is_empty()
    }
}

fn check_letters(spec: &GroupSpec, letters: &[i32]) -> Result<()> {
    let n = spec.generator_count() as i32;
    for &l in letters {
        if l == 0 || l.abs() > n {
            return Err(Error::InvalidArgument(format!(
                "letter {l} out of range for {spec} ({n} generators)"
            )));
        }
    }
    Ok(())
}

/// Reduces a raw letter string to the normal form for `spec`.
pub fn reduce(spec: &GroupSpec, letters: &[i32]) -> Result<Word> {
    spec.validate()?;
    check_letters(spec, letters)?;
    match spec {
        GroupSpec::Free(_) => {
            let mut stack: Vec<i32> = Vec::with_capacity(letters.len());
            for &l in letters {
                if stack.last() == Some(&-l) {
                    stack.pop();
                } else {
                    stack.push(l);
                }
            }
            Ok(Word { letters: stack })
        }
        GroupSpec::FreeAbelian(d) => {
            let mut exps = vec![0i64; *d];
            for &l in letters {
                let idx = (l.abs() - 1) as usize;
                exps[idx] += l.signum() as i64;
            }
            Ok(abelian_word(&exps))
        }
        GroupSpec::Cyclic(m) => {
            let total: i64 = letters.iter().map(|&l| l.signum() as i64).sum();
            Ok(cyclic_word(total, *m))
        }
    }
}

fn abelian_word(exps: &[i64]) -> Word {
    let mut letters = Vec::new();
    for (i, &e) in exps.iter().enumerate() {
        let l = (i + 1) as i32;
        for _ in 0..e.unsigned_abs() {
            letters.push(if e > 0 { l } else { -l });
        }
    }
    Word { letters }
}

fn cyclic_word(total: i64, m: u64) -> Word {
    let k = total.rem_euclid(m as i64) as usize;
    Word { letters: vec![1; k] }
}

/// Left multiplication by a single signed generator, staying in normal
/// form. Used by the ball walker and the representation builder
/// (left translation sends the basis vector at `g` to the one at `s.g`).
pub(crate) fn mul_gen_left(spec: &GroupSpec, w: &Word, s: i32) -> Word {
    match spec {
        GroupSpec::Free(_) => {
            if w.letters.first() == Some(&-s) {
                Word { letters: w.letters[1..].to_vec() }
            } else {
                let mut letters = Vec::with_capacity(w.letters.len() + 1);
                letters.push(s);
                letters.extend_from_slice(&w.letters);
                Word { letters }
            }
        }
        GroupSpec::FreeAbelian(d) => {
            let mut exps = vec![0i64; *d];
            for &l in &w.letters {
                exps[(l.abs() - 1) as usize] += l.signum() as i64;
            }
            exps[(s.abs() - 1) as usize] += s.signum() as i64;
            abelian_word(&exps)
        }
        GroupSpec::Cyclic(m) => {
            let total = w.letters.len() as i64 + s.signum() as i64;
            cyclic_word(total, *m)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_specs() {
        assert_eq!(GroupSpec::parse("free:2").unwrap(), GroupSpec::Free(2));
        assert_eq!(GroupSpec::parse("abelian:3").unwrap(), GroupSpec::FreeAbelian(3));
        assert_eq!(GroupSpec::parse("cyclic:5").unwrap(), GroupSpec::Cyclic(5));
        assert!(GroupSpec::parse("free:0").is_err());
        assert!(GroupSpec::parse("cyclic:1").is_err());
        assert!(GroupSpec::parse("dihedral:3").is_err());
    }

    #[test]
    fn free_reduction_cancels_adjacent() {
        let spec = GroupSpec::Free(2);
        // a b b^-1 a -> a a
        let w = reduce(&spec, &[1, 2, -2, 1]).unwrap();
        assert_eq!(w.letters(), &[1, 1]);
        // reduce is idempotent
        let again = reduce(&spec, w.letters()).unwrap();
        assert_eq!(w, again);
    }

    #[test]
    fn abelian_normal_form() {
        let spec = GroupSpec::FreeAbelian(2);
        // x y x^-1 -> y
        let w = reduce(&spec, &[1, 2, -1]).unwrap();
        assert_eq!(w.letters(), &[2]);
    }

    #[test]
    fn cyclic_exponent_mod_m() {
        let spec = GroupSpec::Cyclic(3);
        let w = reduce(&spec, &[1, 1, 1, 1]).unwrap();
        assert_eq!(w.letters(), &[1]);
        let w = reduce(&spec, &[-1]).unwrap();
        assert_eq!(w.letters(), &[1, 1]);
    }

    #[test]
    fn rejects_bad_letters() {
        assert!(reduce(&GroupSpec::Free(2), &[3]).is_err());
        assert!(reduce(&GroupSpec::Free(2), &[0]).is_err());
    }

    #[test]
    fn left_multiplication_consistent_with_reduce() {
        let spec = GroupSpec::Free(2);
        let w = reduce(&spec, &[1, 2]).unwrap();
        let got = mul_gen_left(&spec, &w, -1);
        let expect = reduce(&spec, &[-1, 1, 2]).unwrap();
        assert_eq!(got, expect);
    }
}
