use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::groups::{mul_gen_left, GroupSpec, Word};

/// Ball of a given radius in the word metric, enumerated breadth-first
/// with generators in index order and inverses after positives, so the
/// element indices are deterministic. Element 0 is the identity and
/// elements are grouped by increasing distance.
#[derive(Debug, Clone)]
pub struct BallIndex {
    pub radius: usize,
    elements: Vec<Word>,
    depths: Vec<usize>,
    lookup: HashMap<Word, usize>,
}

impl BallIndex {
    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn word(&self, i: usize) -> &Word {
        &self.elements[i]
    }

    pub fn depth(&self, i: usize) -> usize {
        self.depths[i]
    }

    pub fn index_of(&self, w: &Word) -> Option<usize> {
        self.lookup.get(w).copied()
    }

    pub fn elements(&self) -> &[Word] {
        &self.elements
    }
}

/// Exact ball cardinality, saturating at `u128::MAX / 4` so callers can
/// compare against any practical cap without overflow.
pub fn projected_ball_size(spec: &GroupSpec, radius: usize) -> u128 {
    const SAT: u128 = u128::MAX / 4;
    match spec {
        GroupSpec::Free(1) => (2 * radius as u128 + 1).min(SAT),
        GroupSpec::Free(n) => {
            // 1 + 2n * ((2n-1)^R - 1) / (2n-2)
            let n = *n as u128;
            let q = 2 * n - 1;
            let mut power: u128 = 1; // q^R
            for _ in 0..radius {
                power = power.saturating_mul(q).min(SAT);
            }
            let spheres = (2 * n).saturating_mul((power - 1) / (2 * n - 2));
            (1 + spheres).min(SAT)
        }
        GroupSpec::FreeAbelian(d) => {
            // lattice points with l1-norm <= R: sum_k 2^k C(d,k) C(R,k)
            let d = *d as u128;
            let r = radius as u128;
            let mut total: u128 = 0;
            for k in 0..=d.min(r) {
                let mut term: u128 = 1;
                for j in 0..k {
                    term = term.saturating_mul(d - j) / (j + 1);
                }
                let mut binom_r: u128 = 1;
                for j in 0..k {
                    binom_r = binom_r.saturating_mul(r - j) / (j + 1);
                }
                let pow2 = 1u128 << k.min(120);
                total = total.saturating_add(term.saturating_mul(binom_r).saturating_mul(pow2));
                if total >= SAT {
                    return SAT;
                }
            }
            total
        }
        GroupSpec::Cyclic(m) => (*m as u128).min(2 * radius as u128 + 1),
    }
}

pub fn ball_enumerate(spec: &GroupSpec, radius: usize, cap: usize) -> Result<BallIndex> {
    spec.validate()?;
    let projected = projected_ball_size(spec, radius);
    if projected > cap as u128 {
        return Err(Error::BallCap { projected, cap });
    }

    let gens: Vec<i32> = {
        let n = spec.generator_count() as i32;
        let mut g: Vec<i32> = (1..=n).collect();
        g.extend((1..=n).map(|i| -i));
        g
    };

    let mut elements = vec![Word::identity()];
    let mut depths = vec![0usize];
    let mut lookup = HashMap::new();
    lookup.insert(Word::identity(), 0usize);

    let mut frontier_start = 0usize;
    for depth in 0..radius {
        let frontier_end = elements.len();
        if frontier_start == frontier_end {
            break; // whole group reached
        }
        for idx in frontier_start..frontier_end {
            let base = elements[idx].clone();
            for &s in &gens {
                let w = mul_gen_left(spec, &base, s);
                if !lookup.contains_key(&w) {
                    lookup.insert(w.clone(), elements.len());
                    elements.push(w);
                    depths.push(depth + 1);
                }
            }
        }
        frontier_start = frontier_end;
    }

    Ok(BallIndex { radius, elements, depths, lookup })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn free_two_small_balls() {
        let spec = GroupSpec::Free(2);
        assert_eq!(ball_enumerate(&spec, 1, 1000).unwrap().len(), 5);
        // 1 + 2n((2n-1)^R - 1)/(2n-2) = 17 at n=2, R=2
        assert_eq!(ball_enumerate(&spec, 2, 1000).unwrap().len(), 17);
        assert_eq!(projected_ball_size(&spec, 2), 17);
    }

    #[test]
    fn cyclic_ball_saturates_at_group() {
        let spec = GroupSpec::Cyclic(5);
        let ball = ball_enumerate(&spec, 10, 1000).unwrap();
        assert_eq!(ball.len(), 5);
    }

    #[test]
    fn free_abelian_counts() {
        let spec = GroupSpec::FreeAbelian(2);
        // 2R^2 + 2R + 1 lattice points in the l1 ball
        for r in [1usize, 3, 7] {
            let expect = (2 * r * r + 2 * r + 1) as u128;
            assert_eq!(projected_ball_size(&spec, r), expect);
            assert_eq!(ball_enumerate(&spec, r, 10_000).unwrap().len() as u128, expect);
        }
    }

    #[test]
    fn cap_violation_names_projected_count() {
        let spec = GroupSpec::Free(2);
        match ball_enumerate(&spec, 20, 5_000_000) {
            Err(Error::BallCap { projected, cap }) => {
                assert_eq!(cap, 5_000_000);
                // 2 * 3^20 - 1
                assert_eq!(projected, 2 * 3u128.pow(20) - 1);
            }
            other => panic!("expected BallCap, got {other:?}"),
        }
    }

    #[test]
    fn identity_first_and_depths_bounded() {
        let spec = GroupSpec::Free(2);
        let ball = ball_enumerate(&spec, 3, 10_000).unwrap();
        assert!(ball.word(0).is_identity());
        for i in 0..ball.len() {
            assert!(ball.depth(i) <= 3);
            assert_eq!(ball.index_of(ball.word(i)), Some(i));
        }
        // BFS order: depths nondecreasing
        for i in 1..ball.len() {
            assert!(ball.depth(i - 1) <= ball.depth(i));
        }
    }
}
