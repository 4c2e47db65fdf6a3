//! repfam: representative families over matroids and the solvers built on
//! them, exposed as a command line tool.
//!
//! Exit codes: 0 solved/decided, 1 valid-but-infeasible instance, 2 input
//! error, 3 enumeration budget exceeded.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use repfam_core::error::Error;
use repfam_core::kpath::{k_path, KpathConfig};
use repfam_core::matroid::{graphic_matroid, uniform_matroid, GraphSpec, LinearMatroid};
use repfam_core::mld::{normalize_circuit, parse_circuit, solve_kwmld, solve_kwmmld, MldConfig};
use repfam_core::oracle;
use repfam_core::product::{product_repset_linear, ProductSpec};
use repfam_core::repset::{compute_repset_linear, Mode, WeightedFamily};
use repfam_core::sepcol::{
    build_pipeline, compute_repset_uniform, CollectionProvider, Ratio, SepcolConfig,
    SeparatingCollection,
};
use repfam_core::set::ElemSet;
use repfam_core::twdp::{
    feedback_vertex_set, greedy_decomposition, make_nice, parse_graph,
    parse_tree_decomposition, steiner_tree,
};

#[derive(Parser)]
#[command(name = "repfam", version, about = "weighted representative families and their applications")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
    /// Seed for every randomized construction (verified, so this only
    /// affects which valid object is found)
    #[arg(long, global = true, default_value_t = 1)]
    seed: u64,
    /// Emit a JSON document instead of prose
    #[arg(long, global = true)]
    json: bool,
    /// Include wall-clock timing in the JSON stats (off keeps outputs
    /// byte-identical across runs)
    #[arg(long, global = true)]
    timing: bool,
}

#[derive(Subcommand)]
enum Cmd {
    /// Representative-family computations
    #[command(subcommand)]
    Repset(RepsetCmd),
    /// Separating-collection construction and inspection
    #[command(subcommand)]
    Sepcol(SepcolCmd),
    /// Multilinear monomial detection in an arithmetic circuit
    Mld(MldArgs),
    /// Steiner tree over a tree decomposition
    Steiner(GraphArgs),
    /// Feedback vertex set over a tree decomposition
    Fvs(GraphArgs),
    /// Simple path on exactly k vertices
    Kpath(KpathArgs),
    /// Brute-force oracles, for fixtures and cross-checking
    #[command(subcommand)]
    Verify(VerifyCmd),
}

#[derive(Subcommand)]
enum RepsetCmd {
    /// q-representative family in a linear matroid
    Linear(RepsetLinearArgs),
    /// q-representative family in the uniform (disjointness) sense
    Uniform(RepsetUniformArgs),
    /// representative of the product of two families in a linear matroid
    Product(RepsetProductArgs),
}

#[derive(Args)]
struct RepsetLinearArgs {
    #[arg(long)]
    matroid: PathBuf,
    #[arg(long)]
    family: PathBuf,
    #[arg(long)]
    q: usize,
    #[arg(long, default_value = "min")]
    mode: String,
}

#[derive(Args)]
struct RepsetUniformArgs {
    #[arg(long)]
    family: PathBuf,
    #[arg(long)]
    q: usize,
    #[arg(long, default_value = "min")]
    mode: String,
    #[arg(long, default_value = "1/2")]
    x: String,
    #[arg(long, default_value_t = 1)]
    depth: usize,
}

#[derive(Args)]
struct RepsetProductArgs {
    #[arg(long)]
    matroid: PathBuf,
    #[arg(long)]
    left: PathBuf,
    #[arg(long)]
    right: PathBuf,
    #[arg(long)]
    k: usize,
    #[arg(long, default_value = "min")]
    mode: String,
}

#[derive(Subcommand)]
enum SepcolCmd {
    /// Build a collection and print (or save) its JSON dump
    Build(SepcolBuildArgs),
    /// Check a dumped collection against the defining conditions
    Verify(SepcolVerifyArgs),
}

#[derive(Args)]
struct SepcolBuildArgs {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    p: usize,
    #[arg(long)]
    q: usize,
    #[arg(long, default_value = "1/2")]
    x: String,
    #[arg(long, default_value_t = 1)]
    depth: usize,
    /// override the splitting block size s
    #[arg(long)]
    split_s: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SepcolVerifyArgs {
    #[arg(long)]
    file: PathBuf,
}

#[derive(Args)]
struct MldArgs {
    #[arg(long)]
    circuit: PathBuf,
    #[arg(long)]
    k: usize,
    /// optional matroid over the variables (matroidal variant)
    #[arg(long)]
    matroid: Option<PathBuf>,
}

#[derive(Args)]
struct GraphArgs {
    #[arg(long)]
    graph: PathBuf,
    /// tree decomposition file; a greedy heuristic is used when absent
    #[arg(long)]
    td: Option<PathBuf>,
}

#[derive(Args)]
struct KpathArgs {
    #[arg(long)]
    graph: PathBuf,
    #[arg(long)]
    k: usize,
    /// replace the per-level x schedule by a fixed value
    #[arg(long)]
    x: Option<String>,
}

#[derive(Subcommand)]
enum VerifyCmd {
    /// representativity of a candidate subfamily against an original
    Repset(VerifyRepsetArgs),
    /// conditions 1-3 of a dumped separating collection
    Sepcol(SepcolVerifyArgs),
    /// brute-force Steiner optimum
    Steiner(GraphArgs),
    /// brute-force FVS optimum
    Fvs(GraphArgs),
    /// brute-force k-path decision
    Kpath(KpathArgs),
    /// full expansion of a circuit's multilinear supports
    Mld(MldArgs),
}

#[derive(Args)]
struct VerifyRepsetArgs {
    #[arg(long)]
    matroid: Option<PathBuf>,
    #[arg(long)]
    original: PathBuf,
    #[arg(long)]
    candidate: PathBuf,
    #[arg(long)]
    q: usize,
    #[arg(long, default_value = "min")]
    mode: String,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let started = std::time::Instant::now();
    match run(&cli) {
        Ok(Outcome { document, feasible }) => {
            let mut document = document;
            if cli.timing {
                if let Some(stats) = document.get_mut("stats").and_then(|s| s.as_object_mut()) {
                    stats.insert(
                        "elapsed_ms".into(),
                        json!(started.elapsed().as_millis() as u64),
                    );
                }
            }
            if cli.json {
                println!("{}", serde_json::to_string_pretty(&document).expect("serializable"));
            } else {
                print_prose(&document);
            }
            if feasible {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            let code = match e {
                Error::BudgetExceeded { .. } | Error::VerificationBudgetExceeded { .. } => 3,
                _ => 2,
            };
            ExitCode::from(code)
        }
    }
}

struct Outcome {
    document: serde_json::Value,
    feasible: bool,
}

fn ok(document: serde_json::Value) -> Result<Outcome, Error> {
    Ok(Outcome { document, feasible: true })
}

fn infeasible(document: serde_json::Value) -> Result<Outcome, Error> {
    Ok(Outcome { document, feasible: false })
}

fn print_prose(doc: &serde_json::Value) {
    if let Some(obj) = doc.as_object() {
        for (k, v) in obj {
            if k == "stats" {
                continue;
            }
            println!("{k}: {v}");
        }
    }
}

fn oracle_budget() -> u64 {
    std::env::var("REPFAM_BUDGET")
        .ok()
        .and_then(|s| s.parse().ok())
        .unwrap_or(1 << 26)
}

fn parse_mode(s: &str) -> Result<Mode, Error> {
    match s {
        "min" => Ok(Mode::Min),
        "max" => Ok(Mode::Max),
        other => Err(Error::Parse(format!("mode must be min or max, got {other:?}"))),
    }
}

/// Matroid file: `uniform <n> <k> [modulus]` or `graphic <n> [modulus]`
/// followed by `e <u> <v>` lines (1-indexed).
fn load_matroid(path: &PathBuf) -> Result<LinearMatroid, Error> {
    let text = std::fs::read_to_string(path)?;
    let mut header: Option<(bool, usize, usize, Option<u64>)> = None;
    let mut edges: Vec<(usize, usize, u64)> = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let toks: Vec<&str> = line.split_whitespace().collect();
        let err = |m: String| Error::Parse(format!("matroid line {}: {m}", lineno + 1));
        match toks[0] {
            "uniform" => {
                if toks.len() < 3 {
                    return Err(err("expected: uniform <n> <k> [modulus]".into()));
                }
                let n = toks[1].parse().map_err(|_| err("bad n".into()))?;
                let k = toks[2].parse().map_err(|_| err("bad k".into()))?;
                let m = toks
                    .get(3)
                    .map(|t| t.parse())
                    .transpose()
                    .map_err(|_| err("bad modulus".into()))?;
                header = Some((true, n, k, m));
            }
            "graphic" => {
                if toks.len() < 2 {
                    return Err(err("expected: graphic <n> [modulus]".into()));
                }
                let n = toks[1].parse().map_err(|_| err("bad n".into()))?;
                let m = toks
                    .get(2)
                    .map(|t| t.parse())
                    .transpose()
                    .map_err(|_| err("bad modulus".into()))?;
                header = Some((false, n, 0, m));
            }
            "e" => {
                if toks.len() < 3 {
                    return Err(err("expected: e <u> <v>".into()));
                }
                let u: usize = toks[1].parse().map_err(|_| err("bad u".into()))?;
                let v: usize = toks[2].parse().map_err(|_| err("bad v".into()))?;
                if u == 0 || v == 0 {
                    return Err(err("vertices are 1-indexed".into()));
                }
                edges.push((u - 1, v - 1, 1));
            }
            other => return Err(err(format!("unknown directive {other:?}"))),
        }
    }
    match header {
        Some((true, n, rank, modulus)) => {
            let modulus = modulus.unwrap_or_else(|| next_prime(n as u64 + 1));
            uniform_matroid(n, rank, modulus)
        }
        Some((false, n, _, modulus)) => {
            let g = GraphSpec::new(n, edges);
            graphic_matroid(&g, modulus.unwrap_or(2))
        }
        None => Err(Error::Parse("matroid file has no header line".into())),
    }
}

fn next_prime(mut candidate: u64) -> u64 {
    let is_prime = |x: u64| {
        if x < 2 {
            return false;
        }
        let mut d = 2;
        while d * d <= x {
            if x % d == 0 {
                return false;
            }
            d += 1;
        }
        true
    };
    while !is_prime(candidate) {
        candidate += 1;
    }
    candidate
}

/// Family file: `n <N>` then `s <weight> <e1> <e2> ...` (1-indexed
/// elements; a lone `s <weight>` line is the empty set).
fn load_family(path: &PathBuf) -> Result<WeightedFamily, Error> {
    let text = std::fs::read_to_string(path)?;
    let mut fam: Option<WeightedFamily> = None;
    for (lineno, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let toks: Vec<&str> = line.split_whitespace().collect();
        let err = |m: String| Error::Parse(format!("family line {}: {m}", lineno + 1));
        match toks[0] {
            "n" => {
                let n = toks
                    .get(1)
                    .and_then(|t| t.parse().ok())
                    .ok_or_else(|| err("expected: n <N>".into()))?;
                fam = Some(WeightedFamily::new(n));
            }
            "s" => {
                let fam = fam.as_mut().ok_or_else(|| err("s before n".into()))?;
                let w: u64 = toks
                    .get(1)
                    .and_then(|t| t.parse().ok())
                    .ok_or_else(|| err("expected: s <weight> <elements...>".into()))?;
                let mut set = ElemSet::EMPTY;
                for t in &toks[2..] {
                    let e: usize = t.parse().map_err(|_| err("bad element".into()))?;
                    if e == 0 || e > fam.ground_size {
                        return Err(err(format!("element {e} out of range")));
                    }
                    set.insert(e - 1);
                }
                fam.push(set, w);
            }
            other => return Err(err(format!("unknown directive {other:?}"))),
        }
    }
    fam.ok_or_else(|| Error::Parse("family file has no n line".into()))
}

fn family_json(fam: &WeightedFamily) -> serde_json::Value {
    json!(fam
        .iter()
        .map(|(s, w)| json!({
            "elements": s.iter().map(|e| e + 1).collect::<Vec<_>>(),
            "weight": w,
        }))
        .collect::<Vec<_>>())
}

fn load_graph(path: &PathBuf) -> Result<GraphSpec, Error> {
    parse_graph(&std::fs::read_to_string(path)?)
}

fn nice_from_args(
    args: &GraphArgs,
    g: &GraphSpec,
) -> Result<repfam_core::twdp::NiceTreeDecomposition, Error> {
    let raw = match &args.td {
        Some(path) => parse_tree_decomposition(&std::fs::read_to_string(path)?)?,
        None => greedy_decomposition(g),
    };
    make_nice(&raw, g)
}

fn run(cli: &Cli) -> Result<Outcome, Error> {
    match &cli.cmd {
        Cmd::Repset(RepsetCmd::Linear(a)) => {
            let m = load_matroid(&a.matroid)?;
            let fam = load_family(&a.family)?;
            let mode = parse_mode(&a.mode)?;
            let res = compute_repset_linear(&m, &fam, a.q, mode, cli.seed)?;
            let out = res.family(&fam);
            ok(json!({
                "problem": "repset-linear",
                "kept": family_json(&out),
                "stats": {
                    "input_size": fam.len(),
                    "kept_size": out.len(),
                    "q": a.q,
                    "seed": cli.seed,
                },
            }))
        }
        Cmd::Repset(RepsetCmd::Uniform(a)) => {
            let fam = load_family(&a.family)?;
            let mode = parse_mode(&a.mode)?;
            let x = Ratio::parse(&a.x)?;
            let cfg = SepcolConfig { depth: a.depth, ..Default::default() };
            let provider = CollectionProvider::new(cli.seed, cfg);
            let res = compute_repset_uniform(&fam, a.q, mode, x, &provider)?;
            let out = res.family(&fam);
            ok(json!({
                "problem": "repset-uniform",
                "kept": family_json(&out),
                "stats": {
                    "input_size": fam.len(),
                    "kept_size": out.len(),
                    "q": a.q,
                    "seed": cli.seed,
                    "x_values": [x.to_string()],
                },
            }))
        }
        Cmd::Repset(RepsetCmd::Product(a)) => {
            let m = load_matroid(&a.matroid)?;
            let left = load_family(&a.left)?;
            let right = load_family(&a.right)?;
            let mode = parse_mode(&a.mode)?;
            let spec = ProductSpec { left, right, k: a.k, mode };
            let out = product_repset_linear(&m, &spec, cli.seed)?;
            ok(json!({
                "problem": "repset-product",
                "kept": family_json(&out.family),
                "stats": {
                    "dropped_overlapping": out.dropped,
                    "kept_size": out.family.len(),
                    "k": a.k,
                    "seed": cli.seed,
                },
            }))
        }
        Cmd::Sepcol(SepcolCmd::Build(a)) => {
            let x = Ratio::parse(&a.x)?;
            let cfg =
                SepcolConfig { depth: a.depth, s_override: a.split_s, ..Default::default() };
            let c = build_pipeline(a.n, a.p, a.q, x, cli.seed, &cfg)?;
            let dump = c.to_json();
            if let Some(path) = &a.out {
                let pretty = serde_json::to_string_pretty(&dump).expect("serializable");
                std::fs::write(path, pretty.as_bytes())?;
            }
            ok(json!({
                "problem": "sepcol-build",
                "collection": dump,
                "stats": {
                    "size": c.len(),
                    "q_effective": c.meta.q_effective,
                    "stages": c.meta.stages,
                    "max_chi_degree": c.meta.max_chi_degree,
                    "max_chi_prime_degree": c.meta.max_chi_prime_degree,
                    "seed": cli.seed,
                    "x_values": [x.to_string()],
                },
            }))
        }
        Cmd::Sepcol(SepcolCmd::Verify(a)) | Cmd::Verify(VerifyCmd::Sepcol(a)) => {
            let dump: serde_json::Value =
                serde_json::from_str(&std::fs::read_to_string(&a.file)?)
                    .map_err(|e| Error::Parse(format!("collection json: {e}")))?;
            let c = SeparatingCollection::from_json(&dump)?;
            let report = oracle::verify_separating(&c, oracle_budget())?;
            let valid = report.ok();
            let doc = json!({
                "problem": "sepcol-verify",
                "valid": valid,
                "violation": report.first_violation.as_ref().map(|v| v.explanation.clone()),
                "stats": { "checked": report.checked_count, "seed": cli.seed },
            });
            if valid {
                ok(doc)
            } else {
                infeasible(doc)
            }
        }
        Cmd::Mld(a) => {
            let raw = parse_circuit(&std::fs::read_to_string(&a.circuit)?)?;
            let circuit = normalize_circuit(&raw)?;
            let cfg = MldConfig::default();
            let (sol, stats) = match &a.matroid {
                Some(mpath) => {
                    let m = load_matroid(mpath)?;
                    solve_kwmmld(&circuit, &m, a.k, cli.seed, &cfg)?
                }
                None => solve_kwmld(&circuit, a.k, cli.seed, &cfg)?,
            };
            let doc = json!({
                "problem": "mld",
                "found": sol.is_some(),
                "weight": sol.as_ref().map(|s| s.weight),
                "witness": sol.as_ref().map(|s| {
                    s.witness.iter().map(|v| circuit.var_names[v].clone()).collect::<Vec<_>>()
                }),
                "stats": {
                    "family_sizes": stats.root_class_sizes,
                    "k": a.k,
                    "seed": cli.seed,
                    "x_values": stats
                        .chosen_xs
                        .iter()
                        .map(|(pp, (x1, x2))| format!("p{}x{}: {x1},{x2}", pp.0, pp.1))
                        .collect::<Vec<_>>(),
                },
            });
            if sol.is_some() {
                ok(doc)
            } else {
                infeasible(doc)
            }
        }
        Cmd::Steiner(a) => {
            let g = load_graph(&a.graph)?;
            let ntd = nice_from_args(a, &g)?;
            match steiner_tree(&g, &ntd, cli.seed) {
                Ok((w, edges, stats)) => ok(json!({
                    "problem": "steiner",
                    "found": true,
                    "weight": w,
                    "witness": edges
                        .iter()
                        .map(|ei| json!([g.edges[ei].0 + 1, g.edges[ei].1 + 1]))
                        .collect::<Vec<_>>(),
                    "stats": {
                        "nodes": stats.nodes,
                        "size_invariant_violations": stats.size_invariant_violations,
                        "max_class_entries": stats.max_class_entries,
                        "width": ntd.width,
                        "seed": cli.seed,
                    },
                })),
                Err(Error::NoSolution(m)) => infeasible(json!({
                    "problem": "steiner",
                    "found": false,
                    "weight": null,
                    "witness": null,
                    "reason": m,
                    "stats": { "width": ntd.width, "seed": cli.seed },
                })),
                Err(e) => Err(e),
            }
        }
        Cmd::Fvs(a) => {
            let g = load_graph(&a.graph)?;
            let ntd = nice_from_args(a, &g)?;
            let (w, fvs, stats) = feedback_vertex_set(&g, &ntd, cli.seed)?;
            ok(json!({
                "problem": "fvs",
                "found": true,
                "weight": w,
                "witness": fvs.iter().map(|v| v + 1).collect::<Vec<_>>(),
                "stats": {
                    "nodes": stats.nodes,
                    "size_invariant_violations": stats.size_invariant_violations,
                    "max_class_entries": stats.max_class_entries,
                    "width": ntd.width,
                    "seed": cli.seed,
                },
            }))
        }
        Cmd::Kpath(a) => {
            let g = load_graph(&a.graph)?;
            let cfg = KpathConfig {
                x_override: a.x.as_deref().map(Ratio::parse).transpose()?,
                ..Default::default()
            };
            let (sol, stats) = k_path(&g, a.k, cli.seed, &cfg)?;
            let doc = json!({
                "problem": "kpath",
                "found": sol.is_some(),
                "weight": sol.as_ref().map(|s| s.weight),
                "witness": sol.as_ref().map(|s| {
                    s.path.iter().map(|v| v + 1).collect::<Vec<_>>()
                }),
                "stats": {
                    "family_sizes": stats.level_family_sizes,
                    "k": a.k,
                    "seed": cli.seed,
                    "x_values": stats.x_values.iter().map(|x| x.to_string()).collect::<Vec<_>>(),
                },
            });
            if sol.is_some() {
                ok(doc)
            } else {
                infeasible(doc)
            }
        }
        Cmd::Verify(VerifyCmd::Repset(a)) => {
            let original = load_family(&a.original)?;
            let candidate = load_family(&a.candidate)?;
            let mode = parse_mode(&a.mode)?;
            let matroid = a.matroid.as_ref().map(load_matroid).transpose()?;
            let model = match &matroid {
                Some(m) => oracle::IndependenceModel::Linear(m),
                None => oracle::IndependenceModel::Uniform,
            };
            let report = oracle::verify_representative(
                model,
                &original,
                &candidate,
                a.q,
                mode,
                oracle_budget(),
            )?;
            let valid = report.ok();
            let doc = json!({
                "problem": "verify-repset",
                "valid": valid,
                "violation": report.first_violation.as_ref().map(|v| v.explanation.clone()),
                "stats": { "checked": report.checked_count, "seed": cli.seed },
            });
            if valid {
                ok(doc)
            } else {
                infeasible(doc)
            }
        }
        Cmd::Verify(VerifyCmd::Steiner(a)) => {
            let g = load_graph(&a.graph)?;
            let best = oracle::steiner_brute(&g, oracle_budget())?;
            let doc = json!({
                "problem": "verify-steiner",
                "found": best.is_some(),
                "weight": best.as_ref().map(|(w, _)| w),
                "witness": best.as_ref().map(|(_, edges)| {
                    edges
                        .iter()
                        .map(|ei| json!([g.edges[ei].0 + 1, g.edges[ei].1 + 1]))
                        .collect::<Vec<_>>()
                }),
                "stats": { "seed": cli.seed },
            });
            if best.is_some() {
                ok(doc)
            } else {
                infeasible(doc)
            }
        }
        Cmd::Verify(VerifyCmd::Fvs(a)) => {
            let g = load_graph(&a.graph)?;
            let (w, set) = oracle::fvs_brute(&g, oracle_budget())?;
            ok(json!({
                "problem": "verify-fvs",
                "found": true,
                "weight": w,
                "witness": set.iter().map(|v| v + 1).collect::<Vec<_>>(),
                "stats": { "seed": cli.seed },
            }))
        }
        Cmd::Verify(VerifyCmd::Kpath(a)) => {
            let g = load_graph(&a.graph)?;
            let best = oracle::kpath_brute(&g, a.k, oracle_budget())?;
            let doc = json!({
                "problem": "verify-kpath",
                "found": best.is_some(),
                "weight": best,
                "stats": { "k": a.k, "seed": cli.seed },
            });
            if best.is_some() {
                ok(doc)
            } else {
                infeasible(doc)
            }
        }
        Cmd::Verify(VerifyCmd::Mld(a)) => {
            let raw = parse_circuit(&std::fs::read_to_string(&a.circuit)?)?;
            let circuit = normalize_circuit(&raw)?;
            let tables = oracle::mld_expand(&circuit, oracle_budget())?;
            let root = &tables[circuit.output];
            let best = root
                .iter()
                .filter(|s| s.len() == a.k)
                .map(|s| (circuit.weight_of(*s), *s))
                .min();
            let doc = json!({
                "problem": "verify-mld",
                "found": best.is_some(),
                "weight": best.as_ref().map(|(w, _)| w),
                "witness": best.as_ref().map(|(_, s)| {
                    s.iter().map(|v| circuit.var_names[v].clone()).collect::<Vec<_>>()
                }),
                "stats": { "k": a.k, "seed": cli.seed },
            });
            if best.is_some() {
                ok(doc)
            } else {
                infeasible(doc)
            }
        }
    }
}
