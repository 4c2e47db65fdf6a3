//! Weighted multilinear monomial detection in arithmetic circuits, plain
//! (disjointness semantics) and matroidal (independence semantics).
//!
//! Both solvers run the same dynamic program over a topological order: every
//! gate stores, per cardinality j <= k, a weighted family of variable sets
//! realizable as multilinear monomials at that gate, trimmed to a
//! (k-j)-representative family. Addition gates union the children's classes;
//! multiplication gates combine them through product representatives. Over
//! positive constants no cancellation can erase a monomial, so membership in
//! the untrimmed family equals monomial presence, which is what the
//! expansion oracle checks at desk scale.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::matroid::LinearMatroid;
use crate::product::{
    choose_product_xs, product_repset_all_sizes, trim_product_uniform, ProductSpec,
};
use crate::repset::{compute_repset_linear, truncate, Mode, WeightedFamily};
use crate::sepcol::{compute_repset_uniform, CollectionProvider, Ratio, SepcolConfig};
use crate::set::ElemSet;

/// A gate of a normalized (fan-in two) circuit; operands index earlier
/// gates.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Gate {
    Var(usize),
    Const(u64),
    Add(usize, usize),
    Mul(usize, usize),
}

/// A normalized arithmetic circuit over non-negative integer constants.
#[derive(Clone, Debug)]
pub struct Circuit {
    /// gates in topological order (operands precede users)
    pub gates: Vec<Gate>,
    pub output: usize,
    pub var_names: Vec<String>,
    pub var_weights: Vec<u64>,
}

impl Circuit {
    pub fn num_vars(&self) -> usize {
        self.var_names.len()
    }

    /// Evaluate modulo a prime at the given variable assignment.
    pub fn evaluate(&self, assignment: &[u64], modulus: u64) -> u64 {
        let mut vals = Vec::with_capacity(self.gates.len());
        for gate in &self.gates {
            let v = match gate {
                Gate::Var(i) => assignment[*i] % modulus,
                Gate::Const(c) => c % modulus,
                Gate::Add(a, b) => (vals[*a] + vals[*b]) % modulus,
                Gate::Mul(a, b) => {
                    (vals[*a] as u128 * vals[*b] as u128 % modulus as u128) as u64
                }
            };
            vals.push(v);
        }
        vals[self.output]
    }

    /// Total weight of a set of variables.
    pub fn weight_of(&self, set: ElemSet) -> u64 {
        set.iter().map(|v| self.var_weights[v]).sum()
    }
}

/// A gate with arbitrary fan-in, as parsed or built programmatically.
#[derive(Clone, Debug)]
pub enum RawGate {
    Var(usize),
    Const(u64),
    Add(Vec<usize>),
    Mul(Vec<usize>),
}

/// An unnormalized circuit.
#[derive(Clone, Debug, Default)]
pub struct RawCircuit {
    pub gates: Vec<RawGate>,
    pub output: Option<usize>,
    pub var_names: Vec<String>,
    pub var_weights: Vec<u64>,
}

impl RawCircuit {
    pub fn evaluate(&self, assignment: &[u64], modulus: u64) -> Result<u64> {
        let order = topo_order(&self.gates)?;
        let mut vals = vec![0u64; self.gates.len()];
        for g in order {
            vals[g] = match &self.gates[g] {
                RawGate::Var(i) => assignment[*i] % modulus,
                RawGate::Const(c) => c % modulus,
                RawGate::Add(ins) => {
                    ins.iter().fold(0u64, |acc, &i| (acc + vals[i]) % modulus)
                }
                RawGate::Mul(ins) => ins.iter().fold(1u64, |acc, &i| {
                    (acc as u128 * vals[i] as u128 % modulus as u128) as u64
                }),
            };
        }
        Ok(vals[self.output.ok_or(Error::NoOutput)?])
    }
}

fn gate_inputs(g: &RawGate) -> &[usize] {
    match g {
        RawGate::Var(_) | RawGate::Const(_) => &[],
        RawGate::Add(ins) | RawGate::Mul(ins) => ins,
    }
}

/// Topological order of the raw gates; CyclicCircuit when none exists.
fn topo_order(gates: &[RawGate]) -> Result<Vec<usize>> {
    let n = gates.len();
    let mut indeg = vec![0usize; n];
    let mut users: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (g, gate) in gates.iter().enumerate() {
        for &i in gate_inputs(gate) {
            if i >= n {
                return Err(Error::Parse(format!("gate {g} references missing input {i}")));
            }
            indeg[g] += 1;
            users[i].push(g);
        }
    }
    let mut queue: Vec<usize> = (0..n).filter(|&g| indeg[g] == 0).collect();
    let mut order = Vec::with_capacity(n);
    while let Some(g) = queue.pop() {
        order.push(g);
        for &u in &users[g] {
            indeg[u] -= 1;
            if indeg[u] == 0 {
                queue.push(u);
            }
        }
    }
    if order.len() != n {
        return Err(Error::CyclicCircuit);
    }
    Ok(order)
}

/// Convert to fan-in two, preserving the computed polynomial: n-ary gates
/// become left-leaning binary trees. The output gate must exist and the
/// gate graph must be acyclic.
pub fn normalize_circuit(raw: &RawCircuit) -> Result<Circuit> {
    let output = raw.output.ok_or(Error::NoOutput)?;
    if raw.gates.is_empty() {
        return Err(Error::NoOutput);
    }
    let order = topo_order(&raw.gates)?;
    let mut gates: Vec<Gate> = Vec::new();
    let mut mapped = vec![usize::MAX; raw.gates.len()];
    for g in order {
        let id = match &raw.gates[g] {
            RawGate::Var(i) => {
                gates.push(Gate::Var(*i));
                gates.len() - 1
            }
            RawGate::Const(c) => {
                if *c == 0 {
                    return Err(Error::NonPositiveConstant);
                }
                gates.push(Gate::Const(*c));
                gates.len() - 1
            }
            RawGate::Add(ins) | RawGate::Mul(ins) => {
                if ins.is_empty() {
                    return Err(Error::Parse(format!("gate {g} has no inputs")));
                }
                let is_add = matches!(&raw.gates[g], RawGate::Add(_));
                let mut acc = mapped[ins[0]];
                for &next in &ins[1..] {
                    let rhs = mapped[next];
                    gates.push(if is_add { Gate::Add(acc, rhs) } else { Gate::Mul(acc, rhs) });
                    acc = gates.len() - 1;
                }
                acc
            }
        };
        mapped[g] = id;
    }
    Ok(Circuit {
        gates,
        output: mapped[output],
        var_names: raw.var_names.clone(),
        var_weights: raw.var_weights.clone(),
    })
}

/// Parse the line-oriented circuit format:
///
/// ```text
/// var <name> weight=<int>
/// const <gate> <positive-int>
/// add <gate> <in1> <in2> [...]
/// mul <gate> <in1> <in2> [...]
/// output <gate>
/// ```
///
/// `#` starts a comment. n-ary add/mul lines are accepted and normalized
/// away.
pub fn parse_circuit(text: &str) -> Result<RawCircuit> {
    let mut raw = RawCircuit::default();
    let mut names: HashMap<String, usize> = HashMap::new();
    let lookup = |names: &HashMap<String, usize>, tok: &str| -> Result<usize> {
        names
            .get(tok)
            .copied()
            .ok_or_else(|| Error::Parse(format!("unknown gate {tok:?}")))
    };
    for (lineno, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let toks: Vec<&str> = line.split_whitespace().collect();
        let err = |m: String| Error::Parse(format!("line {}: {m}", lineno + 1));
        match toks[0] {
            "var" => {
                if toks.len() != 3 || !toks[2].starts_with("weight=") {
                    return Err(err("expected: var <name> weight=<int>".into()));
                }
                let w: u64 = toks[2]["weight=".len()..]
                    .parse()
                    .map_err(|_| err("bad weight".into()))?;
                let name = toks[1].to_string();
                if names.contains_key(&name) {
                    return Err(err(format!("duplicate gate {name:?}")));
                }
                let var_ix = raw.var_names.len();
                raw.var_names.push(name.clone());
                raw.var_weights.push(w);
                raw.gates.push(RawGate::Var(var_ix));
                names.insert(name, raw.gates.len() - 1);
            }
            "const" => {
                if toks.len() != 3 {
                    return Err(err("expected: const <gate> <positive-int>".into()));
                }
                let c: i64 = toks[2].parse().map_err(|_| err("bad constant".into()))?;
                if c <= 0 {
                    return Err(Error::NonPositiveConstant);
                }
                let name = toks[1].to_string();
                if names.contains_key(&name) {
                    return Err(err(format!("duplicate gate {name:?}")));
                }
                raw.gates.push(RawGate::Const(c as u64));
                names.insert(name, raw.gates.len() - 1);
            }
            "add" | "mul" => {
                if toks.len() < 4 {
                    return Err(err(format!("expected: {} <gate> <in1> <in2> [...]", toks[0])));
                }
                let name = toks[1].to_string();
                if names.contains_key(&name) {
                    return Err(err(format!("duplicate gate {name:?}")));
                }
                let ins = toks[2..]
                    .iter()
                    .map(|t| lookup(&names, t))
                    .collect::<Result<Vec<_>>>()?;
                raw.gates.push(if toks[0] == "add" {
                    RawGate::Add(ins)
                } else {
                    RawGate::Mul(ins)
                });
                names.insert(name, raw.gates.len() - 1);
            }
            "output" => {
                if toks.len() != 2 {
                    return Err(err("expected: output <gate>".into()));
                }
                raw.output = Some(lookup(&names, toks[1])?);
            }
            other => return Err(err(format!("unknown directive {other:?}"))),
        }
    }
    Ok(raw)
}

/// Solver configuration.
#[derive(Clone, Debug)]
pub struct MldConfig {
    /// k above this is refused; exhaustively verified runs stay below it
    pub k_ceiling: usize,
    pub sepcol: SepcolConfig,
    /// trim parameter for addition-gate representative passes
    pub x: Ratio,
}

impl Default for MldConfig {
    fn default() -> Self {
        MldConfig { k_ceiling: 6, sepcol: SepcolConfig::default(), x: Ratio::half() }
    }
}

/// A detected monomial: the variable set is its own witness.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MldSolution {
    pub witness: ElemSet,
    pub weight: u64,
}

/// Per-run statistics: family sizes at the output gate per cardinality.
#[derive(Clone, Debug, Default)]
pub struct MldStats {
    pub root_class_sizes: Vec<usize>,
    pub chosen_xs: Vec<((usize, usize), (Ratio, Ratio))>,
}

/// Plain weighted multilinear monomial detection: does the polynomial have
/// a degree-k multilinear monomial, and what is the lightest one?
pub fn solve_kwmld(
    c: &Circuit,
    k: usize,
    seed: u64,
    cfg: &MldConfig,
) -> Result<(Option<MldSolution>, MldStats)> {
    if k > cfg.k_ceiling {
        return Err(Error::KTooLarge { k, ceiling: cfg.k_ceiling });
    }
    let n = c.num_vars();
    let provider = CollectionProvider::new(seed, cfg.sepcol.clone());
    let mut stats = MldStats::default();
    // tables[g][j]: (k-j)-representative family of the j-multilinear
    // supports realizable at gate g
    let mut tables: Vec<Vec<WeightedFamily>> = Vec::with_capacity(c.gates.len());
    for gate in &c.gates {
        let mut classes = vec![WeightedFamily::new(n); k + 1];
        match gate {
            Gate::Var(i) => {
                if k >= 1 {
                    classes[1].push(ElemSet::singleton(*i), c.var_weights[*i]);
                }
            }
            Gate::Const(_) => {
                classes[0].push(ElemSet::EMPTY, 0);
            }
            Gate::Add(a, b) => {
                for j in 0..=k {
                    let merged = crate::repset::union_families(
                        &[tables[*a][j].clone(), tables[*b][j].clone()],
                        Mode::Min,
                    )?;
                    classes[j] = trim_uniform_class(&merged, j, k, cfg.x, &provider)?;
                }
            }
            Gate::Mul(a, b) => {
                // products per (p1, p2), then per-cardinality re-trim
                let mut merged = vec![WeightedFamily::new(n); k + 1];
                for p1 in 0..=k {
                    for p2 in 0..=(k - p1) {
                        let (l1, l2) = (&tables[*a][p1], &tables[*b][p2]);
                        if l1.is_empty() || l2.is_empty() {
                            continue;
                        }
                        let (x1, x2) =
                            choose_product_xs(n, p1, p2, k, l1.len(), l2.len());
                        if !stats.chosen_xs.iter().any(|(pp, _)| *pp == (p1, p2)) {
                            stats.chosen_xs.push(((p1, p2), (x1, x2)));
                        }
                        let spec = ProductSpec {
                            left: l1.clone(),
                            right: l2.clone(),
                            k,
                            mode: Mode::Min,
                        };
                        let pf = trim_product_uniform(&spec, x1, x2, &provider)?;
                        for (s, w) in pf.family.iter() {
                            merged[p1 + p2].push(s, w);
                        }
                    }
                }
                for j in 0..=k {
                    let dedup = merged[j].dedup(Mode::Min);
                    classes[j] = trim_uniform_class(&dedup, j, k, cfg.x, &provider)?;
                }
            }
        }
        tables.push(classes);
    }
    let root = &tables[c.output][k];
    stats.root_class_sizes = tables[c.output].iter().map(|f| f.len()).collect();
    Ok((best_of(root), stats))
}

fn trim_uniform_class(
    fam: &WeightedFamily,
    j: usize,
    k: usize,
    x: Ratio,
    provider: &CollectionProvider,
) -> Result<WeightedFamily> {
    if fam.is_empty() {
        return Ok(fam.clone());
    }
    let res = compute_repset_uniform(fam, k - j, Mode::Min, x, provider)?;
    Ok(res.family(fam))
}

fn best_of(fam: &WeightedFamily) -> Option<MldSolution> {
    fam.iter()
        .min_by_key(|(s, w)| (*w, s.as_mask()))
        .map(|(s, w)| MldSolution { witness: s, weight: w })
}

/// Matroidal variant: stored sets must additionally be independent in the
/// given matroid; addition gates trim with the linear-matroid computation
/// and multiplication gates use the per-pair product table.
pub fn solve_kwmmld(
    c: &Circuit,
    m: &LinearMatroid,
    k: usize,
    seed: u64,
    cfg: &MldConfig,
) -> Result<(Option<MldSolution>, MldStats)> {
    if k > cfg.k_ceiling {
        return Err(Error::KTooLarge { k, ceiling: cfg.k_ceiling });
    }
    if m.rank() < k {
        return Err(Error::RankTooSmall { rank: m.rank(), needed: k });
    }
    let n = c.num_vars();
    assert_eq!(m.ground().len(), n, "matroid ground set must be the variable set");
    // one truncation up front so every class sees rank exactly k
    let mk = truncate(m, k, seed)?;
    let mut stats = MldStats::default();
    let mut tables: Vec<Vec<WeightedFamily>> = Vec::with_capacity(c.gates.len());
    for gate in &c.gates {
        let mut classes = vec![WeightedFamily::new(n); k + 1];
        match gate {
            Gate::Var(i) => {
                if k >= 1 && mk.is_independent(ElemSet::singleton(*i)) {
                    classes[1].push(ElemSet::singleton(*i), c.var_weights[*i]);
                }
            }
            Gate::Const(_) => {
                classes[0].push(ElemSet::EMPTY, 0);
            }
            Gate::Add(a, b) => {
                for j in 0..=k {
                    let merged = crate::repset::union_families(
                        &[tables[*a][j].clone(), tables[*b][j].clone()],
                        Mode::Min,
                    )?;
                    classes[j] = trim_linear_class(&mk, &merged, j, k, seed)?;
                }
            }
            Gate::Mul(a, b) => {
                let mut left = WeightedFamily::new(n);
                for class in &tables[*a] {
                    for (s, w) in class.iter() {
                        left.push(s, w);
                    }
                }
                let mut right = WeightedFamily::new(n);
                for class in &tables[*b] {
                    for (s, w) in class.iter() {
                        right.push(s, w);
                    }
                }
                if !left.is_empty() && !right.is_empty() {
                    let table = product_repset_all_sizes(&mk, &left, &right, k, 1, Mode::Min, seed)?;
                    let mut merged = vec![WeightedFamily::new(n); k + 1];
                    for i in 0..=k {
                        for j in 0..=(k - i) {
                            if let Some(e) = table.entry(i, j) {
                                for (s, w) in e.family.iter() {
                                    merged[i + j].push(s, w);
                                }
                            }
                        }
                    }
                    for j in 0..=k {
                        let dedup = merged[j].dedup(Mode::Min);
                        classes[j] = trim_linear_class(&mk, &dedup, j, k, seed)?;
                    }
                }
            }
        }
        tables.push(classes);
    }
    let root = &tables[c.output][k];
    stats.root_class_sizes = tables[c.output].iter().map(|f| f.len()).collect();
    // every class is capped by the exact matroidal bound
    for (j, class) in tables[c.output].iter().enumerate() {
        debug_assert!(class.len() as u64 <= crate::binom(k, j.min(k)));
    }
    Ok((best_of(root), stats))
}

fn trim_linear_class(
    m: &LinearMatroid,
    fam: &WeightedFamily,
    j: usize,
    k: usize,
    seed: u64,
) -> Result<WeightedFamily> {
    if fam.is_empty() {
        return Ok(fam.clone());
    }
    let res = compute_repset_linear(m, fam, k - j, Mode::Min, seed)?;
    Ok(res.family(fam))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matroid::{graphic_matroid, uniform_matroid, GraphSpec};
    use crate::oracle::mld_expand;

    fn circuit(text: &str) -> Circuit {
        normalize_circuit(&parse_circuit(text).unwrap()).unwrap()
    }

    /// (x1 + x2) * (x1 + x3) with weights 5, 1, 1
    fn regression_circuit() -> Circuit {
        circuit(
            "var x1 weight=5\n\
             var x2 weight=1\n\
             var x3 weight=1\n\
             add s1 x1 x2\n\
             add s2 x1 x3\n\
             mul out s1 s2\n\
             output out\n",
        )
    }

    #[test]
    fn parse_and_normalize_binary_unchanged() {
        let c = regression_circuit();
        assert_eq!(c.gates.len(), 6);
        assert_eq!(c.num_vars(), 3);
    }

    #[test]
    fn normalize_nary_add_preserves_polynomial() {
        let raw = parse_circuit(
            "var a weight=1\nvar b weight=1\nvar c weight=1\nvar d weight=1\n\
             add s a b c d\n\
             output s\n",
        )
        .unwrap();
        let norm = normalize_circuit(&raw).unwrap();
        // 4-ary addition becomes three binary additions
        assert_eq!(
            norm.gates.iter().filter(|g| matches!(g, Gate::Add(..))).count(),
            3
        );
        let modulus = 1_000_003;
        let mut state = 11u64;
        for _ in 0..50 {
            let mut assignment = Vec::new();
            for _ in 0..4 {
                state = state.wrapping_mul(6364136223846793005).wrapping_add(1);
                assignment.push((state >> 33) % modulus);
            }
            assert_eq!(
                raw.evaluate(&assignment, modulus).unwrap(),
                norm.evaluate(&assignment, modulus)
            );
        }
    }

    #[test]
    fn empty_circuit_is_no_output() {
        assert!(matches!(
            normalize_circuit(&RawCircuit::default()),
            Err(Error::NoOutput)
        ));
    }

    #[test]
    fn nonpositive_constant_rejected() {
        assert!(matches!(
            parse_circuit("const c0 -3\noutput c0\n"),
            Err(Error::NonPositiveConstant)
        ));
        assert!(matches!(
            parse_circuit("const c0 0\noutput c0\n"),
            Err(Error::NonPositiveConstant)
        ));
    }

    #[test]
    fn square_is_not_multilinear() {
        let c = circuit("var x1 weight=1\nmul out x1 x1\noutput out\n");
        let (sol, _) = solve_kwmld(&c, 2, 1, &MldConfig::default()).unwrap();
        assert!(sol.is_none());
    }

    #[test]
    fn regression_min_weight_two() {
        let c = regression_circuit();
        let (sol, _) = solve_kwmld(&c, 2, 1, &MldConfig::default()).unwrap();
        let sol = sol.expect("x2*x3 exists");
        assert_eq!(sol.weight, 2);
        assert_eq!(sol.witness, ElemSet::from_elems([1, 2]));
    }

    #[test]
    fn degree_too_small_absent() {
        let c = circuit("var x1 weight=1\nvar x2 weight=1\nadd out x1 x2\noutput out\n");
        let (sol, _) = solve_kwmld(&c, 2, 3, &MldConfig::default()).unwrap();
        assert!(sol.is_none());
    }

    #[test]
    fn k_zero_constant_reachable() {
        let c = circuit("var x1 weight=1\nconst c1 2\nadd out x1 c1\noutput out\n");
        let (sol, _) = solve_kwmld(&c, 0, 3, &MldConfig::default()).unwrap();
        let sol = sol.unwrap();
        assert_eq!(sol.witness, ElemSet::EMPTY);
        assert_eq!(sol.weight, 0);
    }

    #[test]
    fn k_too_large_rejected() {
        let c = regression_circuit();
        assert!(matches!(
            solve_kwmld(&c, 9, 0, &MldConfig::default()),
            Err(Error::KTooLarge { k: 9, ceiling: 6 })
        ));
    }

    #[test]
    fn agrees_with_expansion_oracle() {
        let c = regression_circuit();
        let tables = mld_expand(&c, 1 << 20).unwrap();
        let root = &tables[c.output];
        // oracle: min weight over degree-2 supports
        let oracle_best = root
            .iter()
            .filter(|s| s.len() == 2)
            .map(|s| c.weight_of(*s))
            .min();
        let (sol, _) = solve_kwmld(&c, 2, 5, &MldConfig::default()).unwrap();
        assert_eq!(sol.map(|s| s.weight), oracle_best);
    }

    #[test]
    fn matroidal_with_uniform_matroid_matches_plain() {
        let c = regression_circuit();
        let m = uniform_matroid(3, 2, 101).unwrap();
        let (plain, _) = solve_kwmld(&c, 2, 7, &MldConfig::default()).unwrap();
        let (matroidal, _) = solve_kwmmld(&c, &m, 2, 7, &MldConfig::default()).unwrap();
        assert_eq!(plain.map(|s| s.weight), matroidal.map(|s| s.weight));
    }

    #[test]
    fn matroidal_cycle_monomial_excluded() {
        // polynomial = e0*e1 + e1*e2 over three variables; the matroid is
        // graphic on a multigraph where e0 and e1 are parallel edges, so
        // {e0, e1} is a cycle (dependent) while {e1, e2} is a forest
        let c = circuit(
            "var e0 weight=1\nvar e1 weight=2\nvar e2 weight=4\n\
             mul m1 e0 e1\nmul m2 e1 e2\nadd out m1 m2\noutput out\n",
        );
        let multi = GraphSpec::new(3, vec![(0, 1, 1), (0, 1, 1), (1, 2, 1)]);
        let m = graphic_matroid(&multi, 2).unwrap();
        let (sol, _) = solve_kwmmld(&c, &m, 2, 3, &MldConfig::default()).unwrap();
        let sol = sol.expect("e1*e2 is independent");
        assert_eq!(sol.witness, ElemSet::from_elems([1, 2]));
        assert_eq!(sol.weight, 6);
        // with only the cycle monomial available, nothing survives
        let c2 = circuit(
            "var e0 weight=1\nvar e1 weight=2\nvar e2 weight=4\n\
             mul out e0 e1\noutput out\n",
        );
        let (excluded, _) = solve_kwmmld(&c2, &m, 2, 3, &MldConfig::default()).unwrap();
        assert!(excluded.is_none(), "parallel edges are dependent");
    }

    #[test]
    fn k_zero_matroidal() {
        let c = circuit("var x1 weight=1\nconst c1 2\nadd out x1 c1\noutput out\n");
        let m = uniform_matroid(1, 1, 101).unwrap();
        let (sol, _) = solve_kwmmld(&c, &m, 0, 3, &MldConfig::default()).unwrap();
        assert_eq!(sol.unwrap().witness, ElemSet::EMPTY);
    }
}
