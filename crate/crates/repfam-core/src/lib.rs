//! Weighted q-representative families over uniform, graphic, and general
//! linear matroids, together with the accelerated constructions for product
//! families and the solvers built on top of them: multilinear monomial
//! detection in arithmetic circuits, Steiner Tree and Feedback Vertex Set
//! parameterized by treewidth, and k-Path.
//!
//! Everything is exact: matrices live over prime fields, all randomized
//! constructions are deterministically verified before use, and every solver
//! ships with an independent brute-force oracle (see [`oracle`]).

pub mod error;
pub mod ffmat;
pub mod kpath;
pub mod matroid;
pub mod mld;
pub mod oracle;
pub mod product;
pub mod repset;
pub mod rng;
pub mod sepcol;
pub mod set;
pub mod twdp;

pub use error::{Error, Result};
pub use ffmat::{FieldElement, FieldMatrix};
pub use matroid::{GraphSpec, LinearMatroid};
pub use repset::{Mode, RepresentativeResult, WeightedFamily};
pub use sepcol::{HashFamily, Ratio, SeparatingCollection};
pub use set::ElemSet;

/// Binomial coefficient as a u64, saturating is never needed at the scales
/// this crate targets; panics on overflow instead of silently wrapping.
pub fn binom(n: usize, k: usize) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u64 = 1;
    for i in 0..k {
        acc = acc
            .checked_mul((n - i) as u64)
            .expect("binomial overflow")
            / (i as u64 + 1);
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::binom;

    #[test]
    fn binom_small_values() {
        assert_eq!(binom(0, 0), 1);
        assert_eq!(binom(5, 2), 10);
        assert_eq!(binom(6, 3), 20);
        assert_eq!(binom(4, 5), 0);
        assert_eq!(binom(12, 6), 924);
    }
}
