//! Weighted q-representative families for linear matroids.
//!
//! The core computation maps every p-set of the family to the wedge vector
//! of its columns (all p x p minors in colex row order), sorts the family by
//! weight with a deterministic mask tie-break, and greedily keeps the sets
//! whose wedge vectors are linearly independent of those kept before. A kept
//! family of size at most C(p+q, p) results, and it is min- (or max-)
//! q-representative for the input.
//!
//! When the matroid rank exceeds p + q it is first truncated to p + q by
//! random row combinations; the truncation is verified against the original
//! independence structure and redrawn on failure, so the output is exact.

use crate::error::{Error, Result};
use crate::ffmat::{EliminationWorkspace, FieldMatrix};
use crate::matroid::{relift_graphic, LinearMatroid};
use crate::rng::{Prng, Stream};
use crate::set::ElemSet;

/// Optimization sense for weighted representative families.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    Min,
    Max,
}

impl Mode {
    /// True when `a` is at least as good as `b` in this mode.
    pub fn no_worse(&self, a: u64, b: u64) -> bool {
        match self {
            Mode::Min => a <= b,
            Mode::Max => a >= b,
        }
    }
}

/// A weighted family of subsets of a ground set `{0, .., ground_size-1}`.
#[derive(Clone, Debug, Default)]
pub struct WeightedFamily {
    pub ground_size: usize,
    pub sets: Vec<ElemSet>,
    pub weights: Vec<u64>,
}

impl WeightedFamily {
    pub fn new(ground_size: usize) -> Self {
        WeightedFamily { ground_size, sets: Vec::new(), weights: Vec::new() }
    }

    pub fn from_pairs(ground_size: usize, pairs: Vec<(ElemSet, u64)>) -> Self {
        let mut f = WeightedFamily::new(ground_size);
        for (s, w) in pairs {
            f.push(s, w);
        }
        f
    }

    pub fn push(&mut self, set: ElemSet, weight: u64) {
        debug_assert!(set.is_subset_of(ElemSet::full(self.ground_size)));
        self.sets.push(set);
        self.weights.push(weight);
    }

    pub fn len(&self) -> usize {
        self.sets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sets.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (ElemSet, u64)> + '_ {
        self.sets.iter().copied().zip(self.weights.iter().copied())
    }

    /// The common cardinality `p` when every member has it (None for the
    /// mixed case; Some for empty families never fires since there is no
    /// first element).
    pub fn uniform_size(&self) -> Option<usize> {
        let mut sizes = self.sets.iter().map(|s| s.len());
        let first = sizes.next()?;
        sizes.all(|s| s == first).then_some(first)
    }

    /// Partition into cardinality classes; class `p` holds all p-sets.
    pub fn size_classes(&self, max_size: usize) -> Vec<WeightedFamily> {
        let mut classes = vec![WeightedFamily::new(self.ground_size); max_size + 1];
        for (s, w) in self.iter() {
            if s.len() <= max_size {
                classes[s.len()].push(s, w);
            }
        }
        classes
    }

    /// Collapse duplicate sets, keeping the better weight for `mode`.
    pub fn dedup(&self, mode: Mode) -> WeightedFamily {
        let mut best: std::collections::BTreeMap<ElemSet, u64> = Default::default();
        for (s, w) in self.iter() {
            best.entry(s)
                .and_modify(|cur| {
                    if mode.no_worse(w, *cur) {
                        *cur = w;
                    }
                })
                .or_insert(w);
        }
        WeightedFamily::from_pairs(self.ground_size, best.into_iter().collect())
    }

    /// Restrict to the subfamily at the given indices.
    pub fn subfamily(&self, indices: &[usize]) -> WeightedFamily {
        WeightedFamily::from_pairs(
            self.ground_size,
            indices.iter().map(|&i| (self.sets[i], self.weights[i])).collect(),
        )
    }
}

/// Indices into the input family that were kept.
#[derive(Clone, Debug)]
pub struct RepresentativeResult {
    pub kept: Vec<usize>,
    pub mode: Mode,
    pub q: usize,
}

impl RepresentativeResult {
    pub fn family(&self, input: &WeightedFamily) -> WeightedFamily {
        input.subfamily(&self.kept)
    }
}

/// Order family indices by weight (ascending for Min, descending for Max),
/// breaking ties by the numeric set mask. Duplicate sets collapse through
/// the greedy independence test, so the output is input-order independent.
fn selection_order(fam: &WeightedFamily, mode: Mode) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..fam.len()).collect();
    idx.sort_by_key(|&i| {
        let w = fam.weights[i];
        let key_w = match mode {
            Mode::Min => w,
            Mode::Max => u64::MAX - w,
        };
        (key_w, fam.sets[i].as_mask())
    });
    idx
}

/// Compute a min/max q-representative subfamily of a p-family of independent
/// sets in a linear matroid. Output size is at most C(p+q, p).
pub fn compute_repset_linear(
    m: &LinearMatroid,
    fam: &WeightedFamily,
    q: usize,
    mode: Mode,
    seed: u64,
) -> Result<RepresentativeResult> {
    if fam.is_empty() {
        return Ok(RepresentativeResult { kept: Vec::new(), mode, q });
    }
    let p = fam.uniform_size().expect("compute_repset_linear needs a p-family");
    if p + q > m.rank() {
        return Err(Error::RankTooSmall { rank: m.rank(), needed: p + q });
    }
    for &s in &fam.sets {
        if !m.is_independent(s) {
            return Err(Error::SetNotIndependent(s));
        }
    }
    let work = if m.rank() > p + q { truncate(m, p + q, seed)? } else { m.clone() };

    let mut ws = EliminationWorkspace::new(crate::binom(p + q, p) as usize, work.modulus());
    let mut kept = Vec::new();
    for i in selection_order(fam, mode) {
        let cols = work.columns_of(fam.sets[i]).expect("ground element missing");
        let wedge = work.matrix().wedge_vector(&cols);
        if ws.insert(&wedge)? {
            kept.push(i);
        }
    }
    Ok(RepresentativeResult { kept, mode, q })
}

/// How many verification samples `truncate` draws when exhaustive checking
/// is out of budget.
const TRUNCATION_SAMPLES: usize = 200;
const TRUNCATION_RETRIES: usize = 64;

/// Truncate a matroid to the given rank: the result is independent exactly
/// on the sets of size <= new_rank that were independent before. Random row
/// combinations are drawn and verified (exhaustively when feasible, by
/// sampling otherwise); failed draws are retried with fresh randomness.
///
/// Tiny fields make random projections fail persistently, so matroids that
/// carry a graphic incidence pattern are first re-represented over a large
/// prime, which the pattern makes exact.
pub fn truncate(m: &LinearMatroid, new_rank: usize, seed: u64) -> Result<LinearMatroid> {
    assert!(new_rank <= m.rank());
    if new_rank == m.rank() {
        return Ok(m.clone());
    }
    const LIFT_PRIME: u64 = 1_000_003;
    let base = if m.modulus() < 101 {
        match relift_graphic(m, LIFT_PRIME) {
            Some(lifted) => lifted,
            None => m.clone(),
        }
    } else {
        m.clone()
    };

    let rows = base.matrix().rows;
    let cols = base.matrix().cols;
    let modulus = base.modulus();
    for attempt in 0..TRUNCATION_RETRIES {
        let mut rng = Prng::derived(seed, Stream::Truncation, attempt as u64);
        let mut proj = FieldMatrix::zero(new_rank, cols, modulus);
        for r in 0..new_rank {
            let coeffs: Vec<u64> = (0..rows).map(|_| rng.below(modulus)).collect();
            for c in 0..cols {
                let mut acc = 0u128;
                for (i, &co) in coeffs.iter().enumerate() {
                    acc = (acc + co as u128 * base.matrix().get(i, c) as u128) % modulus as u128;
                }
                proj.set(r, c, acc as u64);
            }
        }
        let cand = LinearMatroid::from_matrix(base.ground().to_vec(), proj);
        if cand.rank() == new_rank && truncation_valid(m, &cand, new_rank, seed, attempt) {
            return Ok(cand);
        }
    }
    Err(Error::VerificationBudgetExceeded { attempts: TRUNCATION_RETRIES })
}

/// Check that `cand` behaves as the rank-`r` truncation of `orig`. A random
/// projection can only lose independence, never create it, so it suffices to
/// confirm that independent sets of size <= r stay independent.
fn truncation_valid(
    orig: &LinearMatroid,
    cand: &LinearMatroid,
    r: usize,
    seed: u64,
    attempt: usize,
) -> bool {
    let ground: Vec<usize> = orig.ground().to_vec();
    let n = ground.len();
    let universe = ElemSet::from_elems(ground.iter().copied());
    let mut count: u64 = 0;
    for s in 0..=r.min(n) {
        count = count.saturating_add(crate::binom(n, s));
    }
    if count <= 5_000 {
        for size in 0..=r.min(n) {
            for s in ElemSet::subsets_of_size(universe, size) {
                if orig.is_independent(s) && !cand.is_independent(s) {
                    return false;
                }
            }
        }
        true
    } else {
        let mut rng = Prng::derived(seed, Stream::Sampling, attempt as u64);
        for _ in 0..TRUNCATION_SAMPLES {
            let size = (rng.below(r as u64) + 1) as usize;
            let mut s = ElemSet::EMPTY;
            while s.len() < size {
                s.insert(ground[rng.below(n as u64) as usize]);
            }
            if orig.is_independent(s) && !cand.is_independent(s) {
                return false;
            }
        }
        true
    }
}

/// Union of families over a shared ground set; duplicate sets collapse to
/// the better weight for `mode`.
pub fn union_families(parts: &[WeightedFamily], mode: Mode) -> Result<WeightedFamily> {
    let Some(first) = parts.first() else {
        return Ok(WeightedFamily::new(0));
    };
    let mut merged = WeightedFamily::new(first.ground_size);
    for part in parts {
        if part.ground_size != first.ground_size {
            return Err(Error::GroundMismatch(first.ground_size, part.ground_size));
        }
        for (s, w) in part.iter() {
            merged.push(s, w);
        }
    }
    Ok(merged.dedup(mode))
}
