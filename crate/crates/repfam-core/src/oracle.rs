//! Brute-force oracles.
//!
//! Each oracle is a direct enumeration of the defining property it checks,
//! deliberately sharing no code path with the algorithms it verifies: the
//! representativity check walks every extension set, the separating-
//! collection check walks every (A, B) pair, and the problem solvers
//! enumerate vertex subsets, edge subsets, simple paths, or monomial
//! supports. Budgets are explicit; exceeding one is an error, never a
//! silent skip.

use crate::error::{Error, Result};
use crate::matroid::{GraphSpec, LinearMatroid};
use crate::repset::{Mode, WeightedFamily};
use crate::sepcol::SeparatingCollection;
use crate::set::ElemSet;

/// Independence semantics for representativity checks.
#[derive(Clone, Copy)]
pub enum IndependenceModel<'a> {
    /// Linear-matroid independence.
    Linear(&'a LinearMatroid),
    /// Uniform-matroid (disjointness-only) semantics: any union that fits
    /// the ground set is independent.
    Uniform,
}

impl IndependenceModel<'_> {
    fn independent(&self, s: ElemSet) -> bool {
        match self {
            IndependenceModel::Linear(m) => m.is_independent(s),
            IndependenceModel::Uniform => true,
        }
    }

    fn ground(&self, fallback_n: usize) -> ElemSet {
        match self {
            IndependenceModel::Linear(m) => m.ground_set(),
            IndependenceModel::Uniform => ElemSet::full(fallback_n),
        }
    }
}

/// A violation found by an oracle, re-checkable by hand.
#[derive(Clone, Debug)]
pub struct Violation {
    pub y: ElemSet,
    pub x: ElemSet,
    pub explanation: String,
}

/// Outcome of an oracle run.
#[derive(Clone, Debug)]
pub struct OracleReport {
    pub checked_count: u64,
    pub first_violation: Option<Violation>,
}

impl OracleReport {
    pub fn ok(&self) -> bool {
        self.first_violation.is_none()
    }
}

/// Direct enumeration of the min/max q-representative definition: for every
/// Y with |Y| <= q and every X in `original` disjoint from Y with X ∪ Y
/// independent, some member of `candidate` must be disjoint from Y,
/// independent with Y, and of no worse weight.
pub fn verify_representative(
    model: IndependenceModel<'_>,
    original: &WeightedFamily,
    candidate: &WeightedFamily,
    q: usize,
    mode: Mode,
    budget: u64,
) -> Result<OracleReport> {
    let ground = model.ground(original.ground_size);
    let n = ground.len();
    let mut y_count: u64 = 0;
    for s in 0..=q.min(n) {
        y_count += crate::binom(n, s);
    }
    let needed = y_count.saturating_mul(original.len() as u64);
    if needed > budget {
        return Err(Error::BudgetExceeded { needed, budget });
    }
    let mut checked = 0u64;
    for y in ElemSet::subsets_up_to_size(ground, q) {
        // best candidate weight for this Y, if any candidate fits
        let mut best_cand: Option<u64> = None;
        for (cs, cw) in candidate.iter() {
            if cs.is_disjoint(y) && model.independent(cs.union(y)) {
                best_cand = Some(match (best_cand, mode) {
                    (None, _) => cw,
                    (Some(b), Mode::Min) => b.min(cw),
                    (Some(b), Mode::Max) => b.max(cw),
                });
            }
        }
        for (xs, xw) in original.iter() {
            checked += 1;
            if !xs.is_disjoint(y) || !model.independent(xs.union(y)) {
                continue;
            }
            let ok = match best_cand {
                None => false,
                Some(b) => mode.no_worse(b, xw),
            };
            if !ok {
                return Ok(OracleReport {
                    checked_count: checked,
                    first_violation: Some(Violation {
                        y,
                        x: xs,
                        explanation: format!(
                            "X={xs:?} (weight {xw}) extends by Y={y:?} but no candidate \
                             matches it (best candidate: {best_cand:?})"
                        ),
                    }),
                });
            }
        }
    }
    Ok(OracleReport { checked_count: checked, first_violation: None })
}

/// Check all three separating-collection conditions: containment for chi,
/// avoidance for chi', the witness condition at (|A| = p, |B| = q), and the
/// refinement chi(A1 ∪ A2) ⊆ chi(A1) ∩ chi(A2) which lifts the witness
/// condition to arbitrary partitions of A.
pub fn verify_separating(c: &SeparatingCollection, budget: u64) -> Result<OracleReport> {
    let universe = ElemSet::full(c.n);
    let mut a_count = 0u64;
    for s in 0..=c.p {
        a_count += crate::binom(c.n, s);
    }
    let mut b_count = 0u64;
    for s in 0..=c.q {
        b_count += crate::binom(c.n, s);
    }
    let pairs = crate::binom(c.n, c.p)
        .saturating_mul(crate::binom(c.n.saturating_sub(c.p), c.q));
    let needed = a_count.saturating_add(b_count).saturating_add(pairs);
    if needed > budget {
        return Err(Error::BudgetExceeded { needed, budget });
    }
    let mut checked = 0u64;
    // condition 1: A ⊆ F for every F in chi(A)
    for a in ElemSet::subsets_up_to_size(universe, c.p) {
        checked += 1;
        for i in c.chi(a) {
            if !a.is_subset_of(c.sets()[i]) {
                return Ok(OracleReport {
                    checked_count: checked,
                    first_violation: Some(Violation {
                        y: a,
                        x: c.sets()[i],
                        explanation: format!("chi({a:?}) returned a set not containing it"),
                    }),
                });
            }
        }
    }
    // condition 2: F ∩ B = ∅ for every F in chi'(B)
    for b in ElemSet::subsets_up_to_size(universe, c.q) {
        checked += 1;
        for i in c.chi_prime(b) {
            if !c.sets()[i].is_disjoint(b) {
                return Ok(OracleReport {
                    checked_count: checked,
                    first_violation: Some(Violation {
                        y: b,
                        x: c.sets()[i],
                        explanation: format!("chi'({b:?}) returned a set meeting it"),
                    }),
                });
            }
        }
    }
    // condition 3 at r = 1, plus the union refinement for r = 2
    for a in ElemSet::subsets_of_size(universe, c.p) {
        let chi_a: std::collections::HashSet<usize> = c.chi(a).into_iter().collect();
        if c.p >= 2 {
            let elems: Vec<usize> = a.iter().collect();
            let first = ElemSet::singleton(elems[0]);
            let rest = a.minus(first);
            let c1: std::collections::HashSet<usize> = c.chi(first).into_iter().collect();
            let c2: std::collections::HashSet<usize> = c.chi(rest).into_iter().collect();
            if !chi_a.iter().all(|i| c1.contains(i) && c2.contains(i)) {
                return Ok(OracleReport {
                    checked_count: checked,
                    first_violation: Some(Violation {
                        y: a,
                        x: ElemSet::EMPTY,
                        explanation: format!(
                            "chi({a:?}) is not refined by chi of its parts"
                        ),
                    }),
                });
            }
        }
        for b in ElemSet::subsets_of_size(universe.minus(a), c.q) {
            checked += 1;
            if !c.chi_prime(b).iter().any(|i| chi_a.contains(i)) {
                return Ok(OracleReport {
                    checked_count: checked,
                    first_violation: Some(Violation {
                        y: b,
                        x: a,
                        explanation: format!("no common witness for A={a:?}, B={b:?}"),
                    }),
                });
            }
        }
    }
    Ok(OracleReport { checked_count: checked, first_violation: None })
}

/// Acyclicity of an edge list by DFS (kept independent of the union-find
/// structures the solvers use).
pub fn edges_acyclic(n: usize, edges: &[(usize, usize)]) -> bool {
    let mut adj = vec![Vec::new(); n];
    for (i, &(u, v)) in edges.iter().enumerate() {
        if u == v {
            return false;
        }
        adj[u].push((v, i));
        adj[v].push((u, i));
    }
    let mut seen = vec![false; n];
    for start in 0..n {
        if seen[start] {
            continue;
        }
        // iterative DFS remembering the edge used to enter each vertex
        let mut stack = vec![(start, usize::MAX)];
        seen[start] = true;
        while let Some((v, in_edge)) = stack.pop() {
            for &(w, e) in &adj[v] {
                if e == in_edge {
                    continue;
                }
                if seen[w] {
                    return false;
                }
                seen[w] = true;
                stack.push((w, e));
            }
        }
    }
    true
}

/// Connectivity of the subgraph induced by an edge set over the vertices it
/// touches; the empty edge set counts as connected.
pub fn edges_connected(edges: &[(usize, usize)]) -> bool {
    let Some(&(start, _)) = edges.first() else {
        return true;
    };
    let verts: std::collections::HashSet<usize> =
        edges.iter().flat_map(|&(u, v)| [u, v]).collect();
    let mut seen = std::collections::HashSet::new();
    seen.insert(start);
    let mut stack = vec![start];
    while let Some(v) = stack.pop() {
        for &(a, b) in edges {
            let w = if a == v {
                b
            } else if b == v {
                a
            } else {
                continue;
            };
            if seen.insert(w) {
                stack.push(w);
            }
        }
    }
    seen.len() == verts.len()
}

/// Exhaustive Steiner tree: minimize over vertex sets S ⊇ T with G[S]
/// connected the weight of a minimum spanning tree of G[S]. Returns the
/// optimal weight and one witness edge set (indices into g.edges).
pub fn steiner_brute(g: &GraphSpec, budget: u64) -> Result<Option<(u64, ElemSet)>> {
    let terminals = ElemSet::from_elems(g.terminals.iter().copied());
    if terminals.len() <= 1 {
        return Ok(Some((0, ElemSet::EMPTY)));
    }
    let free: Vec<usize> =
        (0..g.n).filter(|v| !terminals.contains(*v)).collect();
    let needed = 1u64 << free.len();
    if needed > budget {
        return Err(Error::BudgetExceeded { needed, budget });
    }
    let mut best: Option<(u64, ElemSet)> = None;
    for mask in 0u64..(1 << free.len()) {
        let mut verts = terminals;
        for (i, &v) in free.iter().enumerate() {
            if mask >> i & 1 == 1 {
                verts.insert(v);
            }
        }
        if let Some((w, edges)) = spanning_tree_weight(g, verts) {
            let better = match &best {
                None => true,
                Some((bw, bset)) => w < *bw || (w == *bw && edges < *bset),
            };
            if better {
                best = Some((w, edges));
            }
        }
    }
    Ok(best)
}

/// Kruskal on G[verts]; None when G[verts] is disconnected.
fn spanning_tree_weight(g: &GraphSpec, verts: ElemSet) -> Option<(u64, ElemSet)> {
    let mut order: Vec<usize> = (0..g.edges.len())
        .filter(|&i| verts.contains(g.edges[i].0) && verts.contains(g.edges[i].1))
        .collect();
    order.sort_by_key(|&i| (g.edges[i].2, i));
    let mut parent: Vec<usize> = (0..g.n).collect();
    fn find(p: &mut Vec<usize>, x: usize) -> usize {
        if p[x] == x {
            x
        } else {
            let r = find(p, p[x]);
            p[x] = r;
            r
        }
    }
    let mut weight = 0u64;
    let mut chosen = ElemSet::EMPTY;
    let mut joined = 0usize;
    for i in order {
        let (u, v, w) = g.edges[i];
        let (ru, rv) = (find(&mut parent, u), find(&mut parent, v));
        if ru != rv {
            parent[ru] = rv;
            weight += w;
            chosen.insert(i);
            joined += 1;
        }
    }
    (joined + 1 == verts.len()).then_some((weight, chosen))
}

/// Exhaustive feedback vertex set: minimize vertex weight over all Y whose
/// removal leaves a forest.
pub fn fvs_brute(g: &GraphSpec, budget: u64) -> Result<(u64, ElemSet)> {
    let needed = 1u64 << g.n;
    if needed > budget {
        return Err(Error::BudgetExceeded { needed, budget });
    }
    let mut best: Option<(u64, ElemSet)> = None;
    for mask in 0u64..(1 << g.n) {
        let y = ElemSet(mask as u128);
        let kept: Vec<(usize, usize)> = g
            .edges
            .iter()
            .filter(|&&(u, v, _)| !y.contains(u) && !y.contains(v))
            .map(|&(u, v, _)| (u, v))
            .collect();
        if !edges_acyclic(g.n, &kept) {
            continue;
        }
        let w: u64 = y.iter().map(|v| g.vertex_weights[v]).sum();
        let better = match &best {
            None => true,
            Some((bw, bset)) => w < *bw || (w == *bw && y < *bset),
        };
        if better {
            best = Some((w, y));
        }
    }
    Ok(best.expect("removing everything always leaves a forest"))
}

/// Exhaustive k-path by DFS over simple paths: returns the minimum total
/// vertex weight of a simple path on exactly k vertices, if one exists.
pub fn kpath_brute(g: &GraphSpec, k: usize, budget: u64) -> Result<Option<u64>> {
    if k == 0 || k > g.n {
        return Ok(None);
    }
    let mut adj = vec![Vec::new(); g.n];
    for &(u, v, _) in &g.edges {
        adj[u].push(v);
        adj[v].push(u);
    }
    let mut best: Option<u64> = None;
    let mut steps = 0u64;
    let mut stack: Vec<(usize, ElemSet, u64)> = Vec::new();
    for v in 0..g.n {
        stack.push((v, ElemSet::singleton(v), g.vertex_weights[v]));
    }
    while let Some((v, visited, w)) = stack.pop() {
        steps += 1;
        if steps > budget {
            return Err(Error::BudgetExceeded { needed: steps, budget });
        }
        if visited.len() == k {
            best = Some(best.map_or(w, |b| b.min(w)));
            continue;
        }
        for &u in &adj[v] {
            if !visited.contains(u) {
                let mut nv = visited;
                nv.insert(u);
                stack.push((u, nv, w + g.vertex_weights[u]));
            }
        }
    }
    Ok(best)
}

/// All multilinear monomial supports of the polynomial computed by a
/// circuit, by full bottom-up expansion with non-multilinear products
/// dropped. Over positive coefficients a dropped product can never return
/// to multilinearity and no cancellation can erase a support, so this is
/// exact. Supports are sets of variable indices.
pub fn mld_expand(c: &crate::mld::Circuit, budget: u64) -> Result<Vec<std::collections::BTreeSet<ElemSet>>> {
    use crate::mld::Gate;
    let mut tables: Vec<std::collections::BTreeSet<ElemSet>> = Vec::with_capacity(c.gates.len());
    let mut work = 0u64;
    for gate in &c.gates {
        let table = match gate {
            Gate::Var(i) => {
                let mut t = std::collections::BTreeSet::new();
                t.insert(ElemSet::singleton(*i));
                t
            }
            Gate::Const(_) => {
                let mut t = std::collections::BTreeSet::new();
                t.insert(ElemSet::EMPTY);
                t
            }
            Gate::Add(a, b) => {
                let mut t = tables[*a].clone();
                t.extend(tables[*b].iter().copied());
                t
            }
            Gate::Mul(a, b) => {
                let mut t = std::collections::BTreeSet::new();
                for &x in &tables[*a] {
                    for &y in &tables[*b] {
                        work += 1;
                        if work > budget {
                            return Err(Error::BudgetExceeded { needed: work, budget });
                        }
                        if x.is_disjoint(y) {
                            t.insert(x.union(y));
                        }
                    }
                }
                t
            }
        };
        work += table.len() as u64;
        if work > budget {
            return Err(Error::BudgetExceeded { needed: work, budget });
        }
        tables.push(table);
    }
    Ok(tables)
}
