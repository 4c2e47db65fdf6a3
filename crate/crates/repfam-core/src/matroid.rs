//! Matroid representations: linear matroids over prime fields, graphic
//! matroids through the signed vertex-edge incidence matrix, uniform
//! matroids through Vandermonde columns, and contraction by an independent
//! set via block row reduction.

use crate::error::{Error, Result};
use crate::ffmat::FieldMatrix;
use crate::set::ElemSet;

/// An undirected graph with edge weights, optional terminals, and optional
/// vertex weights. Vertices are 0-based.
#[derive(Clone, Debug, Default)]
pub struct GraphSpec {
    pub n: usize,
    pub edges: Vec<(usize, usize, u64)>,
    pub terminals: Vec<usize>,
    pub vertex_weights: Vec<u64>,
}

impl GraphSpec {
    pub fn new(n: usize, edges: Vec<(usize, usize, u64)>) -> Self {
        GraphSpec { n, edges, terminals: Vec::new(), vertex_weights: vec![0; n] }
    }

    pub fn neighbors(&self, v: usize) -> Vec<usize> {
        let mut out = Vec::new();
        for &(a, b, _) in &self.edges {
            if a == v {
                out.push(b);
            } else if b == v {
                out.push(a);
            }
        }
        out.sort_unstable();
        out.dedup();
        out
    }

    pub fn component_count(&self) -> usize {
        let mut parent: Vec<usize> = (0..self.n).collect();
        fn find(p: &mut Vec<usize>, x: usize) -> usize {
            if p[x] != x {
                let r = find(p, p[x]);
                p[x] = r;
            }
            p[x]
        }
        let mut comps = self.n;
        for &(u, v, _) in &self.edges {
            let (ru, rv) = (find(&mut parent, u), find(&mut parent, v));
            if ru != rv {
                parent[ru] = rv;
                comps -= 1;
            }
        }
        comps
    }
}

/// The ±1 incidence pattern of a graphic matroid, kept alongside the reduced
/// matrix so the same matroid can be re-represented over any prime field
/// (graphic matroids are regular). Needed when a GF(2) matroid has to be
/// truncated: random projections over tiny fields fail almost surely, so
/// truncation lifts through this pattern to a large field first.
#[derive(Clone, Debug)]
pub struct IncidencePattern {
    pub n_vertices: usize,
    /// (plus-row, minus-row) per column, aligned with `ground`.
    pub arcs: Vec<(usize, usize)>,
}

/// A linear matroid: ground elements are labels into some ambient universe,
/// one matrix column per element, independence = linear independence.
#[derive(Clone, Debug)]
pub struct LinearMatroid {
    /// Universe label of each column.
    ground: Vec<usize>,
    /// label -> column index (dense map; usize::MAX = absent)
    col_of: Vec<usize>,
    matrix: FieldMatrix,
    rank: usize,
    pub incidence: Option<IncidencePattern>,
}

impl LinearMatroid {
    /// Wrap an explicit representation; rows are reduced to a row basis so
    /// `matrix.rows == rank` afterwards.
    pub fn from_matrix(ground: Vec<usize>, matrix: FieldMatrix) -> Self {
        assert_eq!(ground.len(), matrix.cols, "one column per element");
        let reduced = row_basis(&matrix);
        let rank = reduced.rows;
        let mut col_of = vec![usize::MAX; ground.iter().copied().max().map_or(0, |m| m + 1)];
        for (i, &g) in ground.iter().enumerate() {
            col_of[g] = i;
        }
        LinearMatroid { ground, col_of, matrix: reduced, rank, incidence: None }
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn ground(&self) -> &[usize] {
        &self.ground
    }

    pub fn ground_set(&self) -> ElemSet {
        ElemSet::from_elems(self.ground.iter().copied())
    }

    pub fn matrix(&self) -> &FieldMatrix {
        &self.matrix
    }

    pub fn modulus(&self) -> u64 {
        self.matrix.modulus
    }

    pub fn column_of(&self, label: usize) -> Option<usize> {
        match self.col_of.get(label) {
            Some(&c) if c != usize::MAX => Some(c),
            _ => None,
        }
    }

    /// Columns backing the labels in `set`, in increasing label order.
    /// Returns None when some label is not a ground element.
    pub fn columns_of(&self, set: ElemSet) -> Option<Vec<usize>> {
        set.iter().map(|e| self.column_of(e)).collect()
    }

    pub fn is_independent(&self, set: ElemSet) -> bool {
        if set.len() > self.rank {
            return false;
        }
        let Some(cols) = self.columns_of(set) else {
            return false;
        };
        if cols.is_empty() {
            return true;
        }
        let rows: Vec<usize> = (0..self.matrix.rows).collect();
        let sub = self.matrix.submatrix(&rows, &cols);
        sub.rank() == cols.len()
    }

    /// Contraction M/S: pivot the columns of `s` to an identity block, then
    /// drop those rows and columns. For X ⊆ E∖S it holds that X is
    /// independent in M/S iff X ∪ S is independent in M.
    pub fn contract(&self, s: ElemSet) -> Result<LinearMatroid> {
        if s.is_empty() {
            return Ok(self.clone());
        }
        if !self.is_independent(s) {
            return Err(Error::DependentContractionSet);
        }
        let pivot_cols = self.columns_of(s).expect("independent set has columns");
        let reduced = self
            .matrix
            .row_reduce_with_pivots(&pivot_cols)
            .map_err(|_| Error::DependentContractionSet)?;
        let p2 = pivot_cols.len();
        let keep_rows: Vec<usize> = (p2..reduced.rows).collect();
        let keep_cols: Vec<usize> =
            (0..self.matrix.cols).filter(|c| !pivot_cols.contains(c)).collect();
        let sub = reduced.submatrix(&keep_rows, &keep_cols);
        let new_ground: Vec<usize> = keep_cols.iter().map(|&c| self.ground[c]).collect();
        let mut out = LinearMatroid::from_matrix(new_ground, sub);
        debug_assert_eq!(out.rank, self.rank - p2);
        out.incidence = None;
        Ok(out)
    }
}

/// Reduce to a row basis: returns a matrix with the same column-independence
/// structure and full row rank.
fn row_basis(m: &FieldMatrix) -> FieldMatrix {
    let mut work = m.clone();
    let md = m.modulus;
    let mut rank = 0;
    for col in 0..work.cols {
        if rank == work.rows {
            break;
        }
        let Some(pivot) = (rank..work.rows).find(|&r| work.get(r, col) != 0) else {
            continue;
        };
        // swap and eliminate below
        if pivot != rank {
            for c in 0..work.cols {
                let a = work.get(rank, c);
                let b = work.get(pivot, c);
                work.set(rank, c, b);
                work.set(pivot, c, a);
            }
        }
        let lead = work.get(rank, col);
        let inv = mod_inv(lead, md);
        for r in rank + 1..work.rows {
            let factor = (work.get(r, col) as u128 * inv as u128 % md as u128) as u64;
            if factor != 0 {
                for c in 0..work.cols {
                    let sub = (factor as u128 * work.get(rank, c) as u128 % md as u128) as u64;
                    let v = (work.get(r, c) + md - sub) % md;
                    work.set(r, c, v);
                }
            }
        }
        rank += 1;
    }
    let rows: Vec<usize> = (0..rank).collect();
    let cols: Vec<usize> = (0..work.cols).collect();
    work.submatrix(&rows, &cols)
}

fn mod_inv(a: u64, m: u64) -> u64 {
    // Fermat, m prime
    let mut acc = 1u64;
    let mut b = a % m;
    let mut e = m - 2;
    while e > 0 {
        if e & 1 == 1 {
            acc = (acc as u128 * b as u128 % m as u128) as u64;
        }
        b = (b as u128 * b as u128 % m as u128) as u64;
        e >>= 1;
    }
    acc
}

/// Graphic matroid of `g` over GF(modulus): one column per edge with the
/// ±1 incidence pattern (over GF(2) both entries collapse to 1). Edge i of
/// `g.edges` becomes ground element i. Independent sets are exactly the
/// forests; the rank is n minus the number of connected components.
pub fn graphic_matroid(g: &GraphSpec, field_modulus: u64) -> Result<LinearMatroid> {
    assert!(field_modulus >= 2);
    let mut m = FieldMatrix::zero(g.n, g.edges.len(), field_modulus);
    let mut arcs = Vec::with_capacity(g.edges.len());
    for (j, &(u, v, _)) in g.edges.iter().enumerate() {
        if u == v {
            return Err(Error::SelfLoop(u));
        }
        m.set(u, j, 1);
        m.set(v, j, field_modulus - 1); // -1; equals 1 over GF(2)
        arcs.push((u, v));
    }
    let mut out = LinearMatroid::from_matrix((0..g.edges.len()).collect(), m);
    debug_assert_eq!(out.rank(), g.n - g.component_count());
    out.incidence = Some(IncidencePattern { n_vertices: g.n, arcs });
    Ok(out)
}

/// Re-represent a graphic matroid over another prime field using its stored
/// incidence pattern.
pub fn relift_graphic(m: &LinearMatroid, field_modulus: u64) -> Option<LinearMatroid> {
    let inc = m.incidence.as_ref()?;
    let mut mat = FieldMatrix::zero(inc.n_vertices, inc.arcs.len(), field_modulus);
    for (j, &(u, v)) in inc.arcs.iter().enumerate() {
        mat.set(u, j, 1);
        mat.set(v, j, field_modulus - 1);
    }
    let mut out = LinearMatroid::from_matrix(m.ground().to_vec(), mat);
    out.incidence = Some(inc.clone());
    Some(out)
}

/// Uniform matroid U_{n,k} over GF(modulus) via a k x n Vandermonde matrix;
/// needs modulus > n for distinct evaluation points.
pub fn uniform_matroid(n: usize, k: usize, field_modulus: u64) -> Result<LinearMatroid> {
    if field_modulus <= n as u64 {
        return Err(Error::ModulusTooSmall { modulus: field_modulus, needed: n });
    }
    assert!(k <= n, "U_{{n,k}} needs k <= n");
    let mut m = FieldMatrix::zero(k, n, field_modulus);
    for j in 0..n {
        let mut pw = 1u64;
        for i in 0..k {
            m.set(i, j, pw);
            pw = (pw as u128 * j as u128 % field_modulus as u128) as u64;
        }
    }
    Ok(LinearMatroid::from_matrix((0..n).collect(), m))
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Union-find forest oracle, independent of the linear algebra.
    fn is_forest(n: usize, edges: &[(usize, usize)]) -> bool {
        let mut parent: Vec<usize> = (0..n).collect();
        fn find(p: &mut Vec<usize>, x: usize) -> usize {
            if p[x] == x {
                x
            } else {
                let r = find(p, p[x]);
                p[x] = r;
                r
            }
        }
        for &(u, v) in edges {
            let (ru, rv) = (find(&mut parent, u), find(&mut parent, v));
            if ru == rv {
                return false;
            }
            parent[ru] = rv;
        }
        true
    }

    fn petersen() -> GraphSpec {
        // outer 5-cycle, inner pentagram, spokes
        let mut edges = Vec::new();
        for i in 0..5 {
            edges.push((i, (i + 1) % 5, 1));
            edges.push((5 + i, 5 + (i + 2) % 5, 1));
            edges.push((i, 5 + i, 1));
        }
        GraphSpec::new(10, edges)
    }

    #[test]
    fn triangle_graphic_matroid() {
        let g = GraphSpec::new(3, vec![(0, 1, 1), (1, 2, 1), (0, 2, 1)]);
        let m = graphic_matroid(&g, 2).unwrap();
        assert_eq!(m.rank(), 2);
        for pair in ElemSet::subsets_of_size(ElemSet::full(3), 2) {
            assert!(m.is_independent(pair));
        }
        assert!(!m.is_independent(ElemSet::full(3)));
    }

    #[test]
    fn single_edge_rank_one() {
        let g = GraphSpec::new(2, vec![(0, 1, 1)]);
        let m = graphic_matroid(&g, 2).unwrap();
        assert_eq!(m.rank(), 1);
    }

    #[test]
    fn self_loop_rejected() {
        let g = GraphSpec::new(2, vec![(1, 1, 1)]);
        assert!(matches!(graphic_matroid(&g, 2), Err(Error::SelfLoop(1))));
    }

    #[test]
    fn petersen_matches_union_find_oracle() {
        let g = petersen();
        let m = graphic_matroid(&g, 2).unwrap();
        assert_eq!(m.rank(), 9);
        let mut state = 42u64;
        for _ in 0..500 {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            let mask = (state >> 20) as u128 & ((1 << 15) - 1);
            let set = ElemSet(mask);
            let edges: Vec<(usize, usize)> =
                set.iter().map(|i| (g.edges[i].0, g.edges[i].1)).collect();
            assert_eq!(m.is_independent(set), is_forest(10, &edges), "set {set:?}");
        }
    }

    #[test]
    fn petersen_over_big_prime_agrees_with_gf2() {
        let g = petersen();
        let m2 = graphic_matroid(&g, 2).unwrap();
        let mp = relift_graphic(&m2, 1_000_003).unwrap();
        let mut state = 7u64;
        for _ in 0..200 {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            let set = ElemSet((state >> 18) as u128 & ((1 << 15) - 1));
            assert_eq!(m2.is_independent(set), mp.is_independent(set));
        }
    }

    #[test]
    fn uniform_matroid_defining_property() {
        let m = uniform_matroid(4, 2, 5).unwrap();
        for pair in ElemSet::subsets_of_size(ElemSet::full(4), 2) {
            assert!(m.is_independent(pair));
        }
        for triple in ElemSet::subsets_of_size(ElemSet::full(4), 3) {
            assert!(!m.is_independent(triple));
        }
    }

    #[test]
    fn uniform_full_rank_everything_independent() {
        let m = uniform_matroid(4, 4, 7).unwrap();
        for size in 0..=4 {
            for s in ElemSet::subsets_of_size(ElemSet::full(4), size) {
                assert!(m.is_independent(s));
            }
        }
    }

    #[test]
    fn uniform_6_3_exhaustive() {
        let m = uniform_matroid(6, 3, 7).unwrap();
        for mask in 0u128..64 {
            let s = ElemSet(mask);
            assert_eq!(m.is_independent(s), s.len() <= 3, "{s:?}");
        }
    }

    #[test]
    fn uniform_modulus_too_small() {
        assert!(matches!(
            uniform_matroid(7, 3, 7),
            Err(Error::ModulusTooSmall { modulus: 7, needed: 7 })
        ));
    }

    #[test]
    fn contract_by_empty_is_identity() {
        let g = GraphSpec::new(3, vec![(0, 1, 1), (1, 2, 1), (0, 2, 1)]);
        let m = graphic_matroid(&g, 2).unwrap();
        let c = m.contract(ElemSet::EMPTY).unwrap();
        assert_eq!(c.rank(), m.rank());
        for mask in 0u128..8 {
            assert_eq!(c.is_independent(ElemSet(mask)), m.is_independent(ElemSet(mask)));
        }
    }

    #[test]
    fn contract_dependent_set_rejected() {
        let g = GraphSpec::new(3, vec![(0, 1, 1), (1, 2, 1), (0, 2, 1)]);
        let m = graphic_matroid(&g, 2).unwrap();
        assert!(matches!(m.contract(ElemSet::full(3)), Err(Error::DependentContractionSet)));
    }

    /// K4 with one edge contracted (graph minor) must give the same matroid
    /// as matroid contraction of that edge.
    #[test]
    fn contract_k4_matches_graph_minor() {
        let k4_edges =
            vec![(0, 1, 1), (0, 2, 1), (0, 3, 1), (1, 2, 1), (1, 3, 1), (2, 3, 1)];
        let g = GraphSpec::new(4, k4_edges.clone());
        let m = graphic_matroid(&g, 2).unwrap();
        // contract edge 0 = (0,1): in the minor, vertex 1 merges into 0
        let contracted = m.contract(ElemSet::singleton(0)).unwrap();
        // minor: relabel vertex 1 -> 0; remaining edges keep their ids
        let minor_edges: Vec<(usize, usize)> = k4_edges[1..]
            .iter()
            .map(|&(u, v, _)| (if u == 1 { 0 } else { u }, if v == 1 { 0 } else { v }))
            .collect();
        for mask in 0u128..(1 << 5) {
            // subsets over ground {1..5}; shift into edge ids 1..=5
            let set = ElemSet(mask << 1);
            let edges: Vec<(usize, usize)> =
                set.iter().map(|i| minor_edges[i - 1]).collect();
            // self-loops in a minor are never independent
            let expected = edges.iter().all(|&(u, v)| u != v) && is_forest(4, &edges);
            assert_eq!(contracted.is_independent(set), expected, "set {set:?}");
        }
    }

    #[test]
    fn hereditary_and_exchange_on_small_matroids() {
        let g = GraphSpec::new(4, vec![(0, 1, 1), (1, 2, 1), (2, 3, 1), (0, 3, 1), (0, 2, 1)]);
        for m in [graphic_matroid(&g, 2).unwrap(), uniform_matroid(6, 3, 7).unwrap()] {
            let n = m.ground().len();
            let all: Vec<ElemSet> = (0u128..(1 << n)).map(ElemSet).collect();
            let indep: Vec<ElemSet> = all.iter().copied().filter(|&s| m.is_independent(s)).collect();
            // (I2) hereditary
            for &s in &indep {
                for e in s.iter() {
                    let mut t = s;
                    t.remove(e);
                    assert!(m.is_independent(t));
                }
            }
            // (I3) exchange
            for &a in &indep {
                for &b in &indep {
                    if a.len() < b.len() {
                        let ok = b.minus(a).iter().any(|e| {
                            let mut t = a;
                            t.insert(e);
                            m.is_independent(t)
                        });
                        assert!(ok, "exchange fails for {a:?} {b:?}");
                    }
                }
            }
        }
    }
}
