//! Command-line front end: parse tree documents, run computations, and emit
//! a deterministic machine-readable report (stdout) plus human notes
//! (stderr). Exit codes: 0 = ran (verdicts may be Unknown), 1 = invalid
//! input, 2 = budget misconfiguration.

use clap::{Args, Parser, Subcommand};
use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::process::ExitCode;
use std::time::Instant;
use treeshift::constants::{branch_expansion, continued_fraction, resistance, BoundEstimate, Budget};
use treeshift::capacity::{boundary_capacity, capacity_with_basepoint};
use treeshift::document::parse_document;
use treeshift::dynamics::{
    apply_shift, classify_chaos, hypercyclicity_mixing_test, operator_defined_check, OperatorForm,
    Space,
};
use treeshift::exponent::Exponent;
use treeshift::flows::{is_backward_invariant, minimal_unit_flow, unrooted_unit_flow};
use treeshift::tree::{Tree, VertexId};
use treeshift::weights::WeightMap;

#[derive(Parser)]
#[command(name = "treeshift", about = "Weighted backward shifts on directed trees", version)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
    /// Write the machine-readable report here instead of stdout.
    #[arg(long, global = true)]
    out: Option<std::path::PathBuf>,
    /// Worker threads for module-internal parallelism (output-identical).
    #[arg(long, global = true, default_value_t = 1)]
    threads: usize,
}

#[derive(Args)]
struct BudgetArgs {
    /// Truncation depth budget.
    #[arg(long = "depth-budget", default_value_t = 24)]
    depth_budget: u64,
    /// Materialized children per infinite child list.
    #[arg(long, default_value_t = 64)]
    fan: usize,
    /// Absolute tolerance on the constants.
    #[arg(long, default_value_t = 1e-9)]
    tol: f64,
}

impl BudgetArgs {
    fn budget(&self) -> Result<Budget, String> {
        if self.depth_budget == 0 || self.fan == 0 {
            return Err("budgets must be positive".into());
        }
        if !(self.tol > 0.0) {
            return Err("tolerance must be positive".into());
        }
        Ok(Budget { depth: self.depth_budget, fan: self.fan, vertices: 400_000 })
    }
}

#[derive(Subcommand)]
enum Cmd {
    /// Parse and validate a tree document; print a structure summary.
    Validate { file: std::path::PathBuf },
    /// Continued fraction c_p and resistance r_p with evidence.
    Constants {
        file: std::path::PathBuf,
        #[arg(long, default_value_t = 2.0)]
        p: f64,
        /// Base vertex (defaults to the root).
        #[arg(long)]
        vertex: Option<String>,
        /// Also print the branch expansion convergents along the leftmost branch.
        #[arg(long, default_value_t = 0)]
        convergents: usize,
        #[command(flatten)]
        budget: BudgetArgs,
    },
    /// Chaos classification with certificates.
    Classify {
        file: std::path::PathBuf,
        #[arg(long, default_value = "lp")]
        space: String,
        #[arg(long, default_value_t = 2.0)]
        p: f64,
        /// Which weight drives the operator: the stored λ (weighted shift on
        /// the unweighted space) or the stored μ (unweighted shift on the
        /// weighted space).
        #[arg(long = "operator-weight", default_value = "lambda")]
        operator_weight: String,
        #[arg(long = "sample-depth", default_value_t = 6)]
        sample_depth: u64,
        /// Also run the hypercyclicity/mixing witness test.
        #[arg(long, default_value_t = false)]
        witnesses: bool,
        #[command(flatten)]
        budget: BudgetArgs,
    },
    /// Minimal-energy backward-invariant unit flow at a vertex.
    Flow {
        file: std::path::PathBuf,
        #[arg(long, default_value_t = 2.0)]
        p: f64,
        #[arg(long)]
        vertex: Option<String>,
        /// Depth of the printed value table.
        #[arg(long, default_value_t = 4)]
        table_depth: u64,
        #[command(flatten)]
        budget: BudgetArgs,
    },
    /// Boundary capacity and equilibrium flow.
    Capacity {
        file: std::path::PathBuf,
        #[arg(long, default_value_t = 2.0)]
        q: f64,
        #[arg(long)]
        vertex: Option<String>,
        #[command(flatten)]
        budget: BudgetArgs,
    },
    /// Iterate the weighted backward shift on a finitely supported vector.
    Orbit {
        file: std::path::PathBuf,
        /// Sparse start vector, e.g. "a=1,b=-0.5".
        #[arg(long)]
        vector: String,
        #[arg(long, default_value_t = 5)]
        steps: u64,
        #[command(flatten)]
        budget: BudgetArgs,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let started = Instant::now();
    let mut report = String::new();
    let code = run(&cli, &mut report);
    match &cli.out {
        Some(path) => {
            if std::fs::write(path, &report).is_err() {
                eprintln!("error: cannot write {}", path.display());
                return ExitCode::from(1);
            }
        }
        None => print!("{report}"),
    }
    eprintln!("wall_time_ms: {}", started.elapsed().as_millis());
    code
}

fn run(cli: &Cli, out: &mut String) -> ExitCode {
    match &cli.command {
        Cmd::Validate { file } => {
            let (text, digest) = match read_input(file, out) {
                Ok(x) => x,
                Err(code) => return code,
            };
            header(out, "validate", &digest, None);
            match parse_document(&text) {
                Ok((tree, summary)) => {
                    let _ = writeln!(out, "kind: {}", summary.kind);
                    let _ = writeln!(out, "rooted: {}", summary.rooted);
                    let _ = writeln!(out, "explicit_vertices: {}", summary.explicit_vertices);
                    let _ = writeln!(out, "rule_parts: {}", summary.rule_parts);
                    let lv = tree.descendants_to_depth(tree.anchor(), 3, 8);
                    let sizes: Vec<String> = lv.iter().map(|l| l.len().to_string()).collect();
                    let _ = writeln!(out, "generation_sizes_to_depth_3: {}", sizes.join(" "));
                    if let Some(sym) = &tree.model().symmetric {
                        let _ = writeln!(out, "gamma: {}", sym.gamma);
                        let _ = writeln!(out, "lambda: {}", sym.lambda.right);
                    }
                    for w in &summary.warnings {
                        let _ = writeln!(out, "warning: {w}");
                    }
                    ExitCode::SUCCESS
                }
                Err(e) => {
                    let _ = writeln!(out, "error: {e}");
                    ExitCode::from(1)
                }
            }
        }
        Cmd::Constants { file, p, vertex, convergents, budget } => {
            let (text, digest) = match read_input(file, out) {
                Ok(x) => x,
                Err(code) => return code,
            };
            let budget_args = budget;
            let budget = match budget_args.budget() {
                Ok(b) => b,
                Err(e) => return budget_error(out, &e),
            };
            let p = match Exponent::new(*p) {
                Ok(p) => p,
                Err(e) => return budget_error(out, &e.to_string()),
            };
            let (tree, _) = match parse_document(&text) {
                Ok(t) => t,
                Err(e) => return input_error(out, "constants", &digest, &e.to_string()),
            };
            header(out, "constants", &digest, Some((budget, budget_args.tol)));
            let v = match resolve_vertex(&tree, vertex.as_deref(), out) {
                Ok(v) => v,
                Err(code) => return code,
            };
            let _ = writeln!(out, "p: {p}");
            let c = continued_fraction(&tree, v, &WeightMap::Mu, p, budget, budget_args.tol);
            let r = resistance(&tree, v, &WeightMap::Mu, p, budget, budget_args.tol);
            emit_estimate(out, "c_p", &c);
            emit_estimate(out, "r_p", &r);
            if *convergents > 0 && !matches!(p, Exponent::One) {
                let mut branch = vec![v];
                for _ in 0..*convergents {
                    let kids = tree.children(*branch.last().unwrap(), budget.fan);
                    match kids.as_slice().first() {
                        Some(&u) => branch.push(u),
                        None => break,
                    }
                }
                for (m, d, status) in
                    branch_expansion(&tree, &WeightMap::Mu, p, &branch, *convergents, budget, budget_args.tol)
                {
                    let _ = writeln!(out, "convergent: m={m} d={d:.17e} status={status}");
                }
            }
            ExitCode::SUCCESS
        }
        Cmd::Classify { file, space, p, operator_weight, sample_depth, witnesses, budget } => {
            let (text, digest) = match read_input(file, out) {
                Ok(x) => x,
                Err(code) => return code,
            };
            let budget_args = budget;
            let budget = match budget_args.budget() {
                Ok(b) => b,
                Err(e) => return budget_error(out, &e),
            };
            let space = match space.as_str() {
                "lp" => Space::Lp(*p),
                "c0" => Space::C0,
                other => return budget_error(out, &format!("unknown space {other:?}")),
            };
            if let Space::Lp(pv) = space {
                if !(pv >= 1.0 && pv.is_finite()) {
                    return budget_error(out, "lp space needs 1 <= p < inf");
                }
            }
            let form = match operator_weight.as_str() {
                "lambda" => OperatorForm::shift(WeightMap::Lambda),
                "mu" => OperatorForm::space(WeightMap::Mu),
                other => return budget_error(out, &format!("unknown operator weight {other:?}")),
            };
            let (tree, _) = match parse_document(&text) {
                Ok(t) => t,
                Err(e) => return input_error(out, "classify", &digest, &e.to_string()),
            };
            header(out, "classify", &digest, Some((budget, budget_args.tol)));
            let _ = writeln!(out, "space: {space}");
            let _ = writeln!(out, "operator_weight: {operator_weight}");
            let op = operator_defined_check(&tree, &form, space, budget);
            let _ = writeln!(out, "defined: {} ({})", op.defined.answer, op.defined.certificate);
            let _ = writeln!(out, "operator: {} ({})", op.operator.answer, op.operator.certificate);
            if let Some(b) = op.bound {
                let _ = writeln!(out, "operator_bound: {b:.17e}");
            }
            let verdict = classify_chaos(&tree, &form, space, budget, budget_args.tol, *sample_depth);
            let _ = writeln!(out, "chaotic: {}", verdict.answer);
            let _ = writeln!(out, "theorem: {}", verdict.theorem);
            let _ = writeln!(out, "certificate: {}", verdict.certificate);
            for (k, v) in &verdict.quantities {
                let _ = writeln!(out, "quantity: {k}={v}");
            }
            if *witnesses {
                let hm = hypercyclicity_mixing_test(&tree, &form, space, budget);
                let _ = writeln!(out, "hypercyclic: {} ({})", hm.hypercyclic.answer, hm.hypercyclic.certificate);
                let _ = writeln!(out, "mixing: {} ({})", hm.mixing.answer, hm.mixing.certificate);
                for (n, w) in hm.witness.iter().take(12) {
                    let _ = writeln!(out, "witness: n={n} w={w:.17e}");
                }
            }
            ExitCode::SUCCESS
        }
        Cmd::Flow { file, p, vertex, table_depth, budget } => {
            let (text, digest) = match read_input(file, out) {
                Ok(x) => x,
                Err(code) => return code,
            };
            let budget_args = budget;
            let budget = match budget_args.budget() {
                Ok(b) => b,
                Err(e) => return budget_error(out, &e),
            };
            let p = match Exponent::new(*p) {
                Ok(p) => p,
                Err(e) => return budget_error(out, &e.to_string()),
            };
            let (tree, _) = match parse_document(&text) {
                Ok(t) => t,
                Err(e) => return input_error(out, "flow", &digest, &e.to_string()),
            };
            header(out, "flow", &digest, Some((budget, budget_args.tol)));
            let v = match resolve_vertex(&tree, vertex.as_deref(), out) {
                Ok(v) => v,
                Err(code) => return code,
            };
            let _ = writeln!(out, "p: {p}");
            if tree.is_rooted() || !matches!(p, Exponent::Finite(_)) {
                let mf = minimal_unit_flow(&tree, v, &WeightMap::Mu, p, budget, budget_args.tol);
                emit_estimate(out, "norm", &mf.energy);
                if mf.flow.epsilon() > 0.0 {
                    let _ = writeln!(out, "epsilon_minimizer: {:.17e}", mf.flow.epsilon());
                }
                mf.flow.extend_to_depth(*table_depth, budget.fan.min(16));
                emit_flow_table(out, &tree, &mf.flow.materialized());
                let res = is_backward_invariant(&mf.flow, &WeightMap::Lambda, budget.fan);
                let _ = writeln!(out, "residual: {:.17e} checked={}", res.max_residual, res.checked);
            } else {
                let uf = unrooted_unit_flow(&tree, v, &WeightMap::Mu, p, budget, budget_args.tol);
                emit_estimate(out, "energy_pow_p", &uf.energy_pow_p);
                emit_estimate(out, "r_forward", &uf.r_plus);
                emit_estimate(out, "r_backward", &uf.r_minus);
                let _ = writeln!(out, "limit_left: {:.17e} status={}", uf.limit_left.0, uf.limit_left.1);
                uf.flow.extend_to_depth(*table_depth, budget.fan.min(16));
                emit_flow_table(out, &tree, &uf.flow.materialized());
                let res = is_backward_invariant(&uf.flow, &WeightMap::Lambda, budget.fan);
                let _ = writeln!(out, "residual: {:.17e} checked={}", res.max_residual, res.checked);
            }
            ExitCode::SUCCESS
        }
        Cmd::Capacity { file, q, vertex, budget } => {
            let (text, digest) = match read_input(file, out) {
                Ok(x) => x,
                Err(code) => return code,
            };
            let budget_args = budget;
            let budget = match budget_args.budget() {
                Ok(b) => b,
                Err(e) => return budget_error(out, &e),
            };
            let q = match Exponent::new(*q) {
                Ok(Exponent::Finite(qv)) => Exponent::Finite(qv),
                _ => return budget_error(out, "capacity needs 1 < q < inf"),
            };
            let (tree, _) = match parse_document(&text) {
                Ok(t) => t,
                Err(e) => return input_error(out, "capacity", &digest, &e.to_string()),
            };
            header(out, "capacity", &digest, Some((budget, budget_args.tol)));
            let v = match resolve_vertex(&tree, vertex.as_deref(), out) {
                Ok(v) => v,
                Err(code) => return code,
            };
            let _ = writeln!(out, "q: {q}");
            let _ = writeln!(out, "q_star: {}", q.conjugate());
            let rep = if tree.is_rooted() && v == tree.anchor() {
                boundary_capacity(&tree, &WeightMap::Mu, q, budget, budget_args.tol)
            } else {
                capacity_with_basepoint(&tree, v, &WeightMap::Mu, q, budget, budget_args.tol)
            };
            let _ = writeln!(out, "basepoint: {}", tree.label(rep.basepoint));
            emit_estimate(out, "capacity", &rep.value);
            emit_estimate(out, "r_forward", &rep.r_forward);
            if let Some(rb) = &rep.r_backward {
                emit_estimate(out, "r_backward", rb);
            }
            if let Some((ll, st)) = rep.limit_left {
                let _ = writeln!(out, "limit_left: {ll:.17e} status={st}");
            }
            rep.equilibrium.extend_to_depth(3, budget.fan.min(8));
            emit_flow_table(out, &tree, &rep.equilibrium.materialized());
            ExitCode::SUCCESS
        }
        Cmd::Orbit { file, vector, steps, budget } => {
            let (text, digest) = match read_input(file, out) {
                Ok(x) => x,
                Err(code) => return code,
            };
            let budget_args = budget;
            let budget = match budget_args.budget() {
                Ok(b) => b,
                Err(e) => return budget_error(out, &e),
            };
            let (tree, _) = match parse_document(&text) {
                Ok(t) => t,
                Err(e) => return input_error(out, "orbit", &digest, &e.to_string()),
            };
            header(out, "orbit", &digest, Some((budget, budget_args.tol)));
            let mut f: BTreeMap<VertexId, f64> = BTreeMap::new();
            for part in vector.split(',') {
                let part = part.trim();
                if part.is_empty() {
                    continue;
                }
                let Some((id, val)) = part.split_once('=') else {
                    let _ = writeln!(out, "error: bad vector entry {part:?}");
                    return ExitCode::from(1);
                };
                let Some(v) = lookup_deep(&tree, id.trim(), budget) else {
                    let _ = writeln!(out, "error: unknown vertex {id:?}");
                    return ExitCode::from(1);
                };
                let Ok(x) = val.trim().parse::<f64>() else {
                    let _ = writeln!(out, "error: bad value {val:?}");
                    return ExitCode::from(1);
                };
                f.insert(v, x);
            }
            emit_sparse(out, &tree, 0, &f);
            let mut cur = f;
            for step in 1..=*steps {
                cur = apply_shift(&tree, &WeightMap::Lambda, &cur, 1);
                emit_sparse(out, &tree, step, &cur);
            }
            ExitCode::SUCCESS
        }
    }
}

fn read_input(path: &std::path::Path, out: &mut String) -> Result<(String, String), ExitCode> {
    match std::fs::read_to_string(path) {
        Ok(text) => {
            let digest = fnv1a(&text);
            Ok((text, digest))
        }
        Err(e) => {
            let _ = writeln!(out, "error: cannot read {}: {e}", path.display());
            Err(ExitCode::from(1))
        }
    }
}

fn header(out: &mut String, command: &str, digest: &str, budget: Option<(Budget, f64)>) {
    let _ = writeln!(out, "report_version: 1");
    let _ = writeln!(out, "command: {command}");
    let _ = writeln!(out, "input_digest: {digest}");
    if let Some((b, tol)) = budget {
        let _ = writeln!(out, "budget: depth={} fan={} vertices={} tol={tol:e}", b.depth, b.fan, b.vertices);
    }
}

fn budget_error(out: &mut String, msg: &str) -> ExitCode {
    let _ = writeln!(out, "error: {msg}");
    ExitCode::from(2)
}

fn input_error(out: &mut String, command: &str, digest: &str, msg: &str) -> ExitCode {
    header(out, command, digest, None);
    let _ = writeln!(out, "error: {msg}");
    ExitCode::from(1)
}

fn resolve_vertex(tree: &Tree, label: Option<&str>, out: &mut String) -> Result<VertexId, ExitCode> {
    match label {
        None | Some("root") | Some("anchor") => Ok(tree.anchor()),
        Some(l) => match lookup_deep(tree, l, Budget::default()) {
            Some(v) => Ok(v),
            None => {
                let _ = writeln!(out, "error: unknown vertex {l:?}");
                Err(ExitCode::from(1))
            }
        },
    }
}

/// Resolves labels of materialized or rule-generated vertices: explicit ids
/// first, then path labels like "v0.1.0" or ancestors "a3".
fn lookup_deep(tree: &Tree, label: &str, budget: Budget) -> Option<VertexId> {
    if let Some(v) = tree.lookup(label) {
        return Some(v);
    }
    if let Some(num) = label.strip_prefix('a') {
        if let Ok(n) = num.parse::<u64>() {
            if !tree.is_rooted() {
                return tree.ancestor(tree.anchor(), n);
            }
        }
    }
    // path label: expand along the dots
    let mut parts = label.split('.');
    let first = parts.next()?;
    let mut cur = tree.lookup(first)?;
    for idx in parts {
        let i: usize = idx.parse().ok()?;
        let kids = tree.children(cur, budget.fan.max(i + 1));
        cur = *kids.as_slice().get(i)?;
    }
    Some(cur)
}

fn emit_estimate(out: &mut String, name: &str, e: &BoundEstimate) {
    let _ = writeln!(out, "{name}: value={:.17e} status={}", e.value, e.status);
    for (m, v) in &e.evidence {
        let _ = writeln!(out, "{name}_evidence: m={m} v={v:.17e}");
    }
}

fn emit_flow_table(out: &mut String, tree: &Tree, values: &[(VertexId, f64)]) {
    let mut rows: Vec<(String, i64, f64)> =
        values.iter().map(|&(v, x)| (tree.label(v), tree.gen(v), x)).collect();
    rows.sort_by(|a, b| (a.1, &a.0).cmp(&(b.1, &b.0)));
    for (label, gen, x) in rows {
        let _ = writeln!(out, "flow: id={label} gen={gen} f={x:.17e}");
    }
}

fn emit_sparse(out: &mut String, tree: &Tree, step: u64, f: &BTreeMap<VertexId, f64>) {
    let mut rows: Vec<(String, f64)> = f
        .iter()
        .filter(|(_, x)| **x != 0.0)
        .map(|(&v, &x)| (tree.label(v), x))
        .collect();
    rows.sort_by(|a, b| a.0.cmp(&b.0));
    let body: Vec<String> = rows.iter().map(|(l, x)| format!("{l}={x:.17e}")).collect();
    let _ = writeln!(out, "orbit: step={step} {}", body.join(" "));
}

/// FNV-1a 64-bit digest of the input document.
fn fnv1a(s: &str) -> String {
    let mut h: u64 = 0xcbf29ce484222325;
    for b in s.as_bytes() {
        h ^= *b as u64;
        h = h.wrapping_mul(0x100000001b3);
    }
    format!("fnv1a:{h:016x}")
}
