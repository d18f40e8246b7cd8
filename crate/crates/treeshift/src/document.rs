//! The tree document format: a line-based structured text format for
//! finite, symmetric, and hybrid tree descriptions.
//!
//! ```text
//! format_version: 1
//! kind: symmetric
//! rooted: true
//! free_left_end: false
//! gamma: constant 2
//! lambda: constant 1
//! ```
//!
//! Finite documents list `vertex:` entries with `id`, optional `parent`,
//! `mu`, `lambda`. Hybrid documents add `attach:` lines (rule
//! continuations below named vertices) and an optional `spine:` line for
//! the upward continuation of an unrooted tree. Rules are written
//! `constant c`, `geometric a r`, `polynomial c k`, `table [v ...] then
//! RULE`, or `powers m v`; scalars are decimal strings parsed to binary64.

use crate::rules::{CountRule, ScalarRule, ScalarRule2};
use crate::tree::{Model, PrefixVertex, Shape, SpineSpec, SymmetricInfo, Tree, TreeError, WExpr};
use std::collections::BTreeMap;
use std::sync::Arc;

#[derive(Debug, thiserror::Error)]
pub enum DocError {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error(transparent)]
    Tree(#[from] TreeError),
}

fn perr<T>(line: usize, msg: impl Into<String>) -> Result<T, DocError> {
    Err(DocError::Parse { line, msg: msg.into() })
}

/// Validation summary printed by `validate`.
#[derive(Debug)]
pub struct DocSummary {
    pub kind: String,
    pub rooted: bool,
    pub explicit_vertices: usize,
    pub rule_parts: usize,
    /// Hybrid parts without a declared tail rule are Unknown-prone.
    pub warnings: Vec<String>,
}

pub fn parse_document(text: &str) -> Result<(Tree, DocSummary), DocError> {
    let mut kind: Option<String> = None;
    let mut version: Option<i64> = None;
    let mut rooted = true;
    let mut free_left_end = false;
    let mut gamma: Option<CountRule> = None;
    let mut gamma_left: Option<CountRule> = None;
    let mut lambda_rule: Option<ScalarRule> = None;
    let mut lambda_left: Option<ScalarRule> = None;
    let mut mu_rule: Option<ScalarRule> = None;
    let mut mu_left: Option<ScalarRule> = None;
    let mut vertices: Vec<(usize, BTreeMap<String, String>)> = Vec::new();
    let mut attaches: Vec<(usize, BTreeMap<String, String>)> = Vec::new();
    let mut spine: Option<(usize, BTreeMap<String, String>)> = None;

    for (ln, raw) in text.lines().enumerate() {
        let line = ln + 1;
        let t = raw.trim();
        if t.is_empty() || t.starts_with('#') {
            continue;
        }
        let (key, rest) = match t.split_once(':') {
            Some((k, r)) => (k.trim(), r.trim()),
            None => return perr(line, format!("expected 'key: value', got {t:?}")),
        };
        match key {
            "format_version" => {
                version = Some(rest.parse().map_err(|_| DocError::Parse {
                    line,
                    msg: format!("bad format_version {rest:?}"),
                })?)
            }
            "kind" => kind = Some(rest.to_string()),
            "rooted" => rooted = parse_bool(line, rest)?,
            "free_left_end" => free_left_end = parse_bool(line, rest)?,
            "gamma" => gamma = Some(parse_count_rule(line, rest)?),
            "gamma_left" => gamma_left = Some(parse_count_rule(line, rest)?),
            "lambda" => lambda_rule = Some(parse_scalar_rule(line, rest)?),
            "lambda_left" => lambda_left = Some(parse_scalar_rule(line, rest)?),
            "mu" => mu_rule = Some(parse_scalar_rule(line, rest)?),
            "mu_left" => mu_left = Some(parse_scalar_rule(line, rest)?),
            "vertex" => vertices.push((line, parse_kv(line, rest)?)),
            "attach" => attaches.push((line, parse_kv(line, rest)?)),
            "spine" => spine = Some((line, parse_kv(line, rest)?)),
            other => return perr(line, format!("unknown key {other:?}")),
        }
    }
    match version {
        Some(1) => {}
        Some(v) => return perr(0, format!("unsupported format_version {v}")),
        None => return perr(0, "missing format_version"),
    }
    let kind = kind.ok_or(DocError::Parse { line: 0, msg: "missing kind".into() })?;
    match kind.as_str() {
        "symmetric" => {
            let gamma = gamma.ok_or(DocError::Parse { line: 0, msg: "symmetric document needs gamma".into() })?;
            let lambda = lambda_rule.unwrap_or(ScalarRule::Constant(1.0));
            let mu = mu_rule.unwrap_or(ScalarRule::Constant(1.0));
            let tree = build_symmetric(
                gamma.clone(),
                gamma_left.clone(),
                lambda.clone(),
                lambda_left.clone(),
                mu.clone(),
                mu_left.clone(),
                rooted,
                free_left_end,
            )?;
            let summary = DocSummary {
                kind,
                rooted,
                explicit_vertices: 1,
                rule_parts: 1,
                warnings: vec![],
            };
            Ok((tree, summary))
        }
        "finite" | "hybrid" => {
            let (tree, warnings, rule_parts) =
                build_prefix_tree(&vertices, &attaches, spine.as_ref(), kind == "finite")?;
            let rooted = tree.is_rooted();
            let summary = DocSummary {
                kind,
                rooted,
                explicit_vertices: vertices.len(),
                rule_parts,
                warnings,
            };
            Ok((tree, summary))
        }
        other => perr(0, format!("unknown kind {other:?}")),
    }
}

fn parse_bool(line: usize, s: &str) -> Result<bool, DocError> {
    match s {
        "true" => Ok(true),
        "false" => Ok(false),
        _ => perr(line, format!("expected true/false, got {s:?}")),
    }
}

/// `id=a parent=b mu=0.5 lambda=2` style attribute lists.
fn parse_kv(line: usize, s: &str) -> Result<BTreeMap<String, String>, DocError> {
    let mut out = BTreeMap::new();
    for tok in s.split_whitespace() {
        match tok.split_once('=') {
            Some((k, v)) => {
                if out.insert(k.to_string(), v.to_string()).is_some() {
                    return perr(line, format!("duplicate attribute {k:?}"));
                }
            }
            None => return perr(line, format!("expected key=value, got {tok:?}")),
        }
    }
    Ok(out)
}

fn parse_f64(line: usize, s: &str) -> Result<f64, DocError> {
    s.parse::<f64>().map_err(|_| DocError::Parse { line, msg: format!("bad number {s:?}") })
}

pub fn parse_scalar_rule(line: usize, s: &str) -> Result<ScalarRule, DocError> {
    let toks: Vec<&str> = s.split_whitespace().collect();
    parse_scalar_rule_toks(line, &toks).map(|(r, used)| {
        debug_assert_eq!(used, toks.len());
        r
    })
}

fn parse_scalar_rule_toks(line: usize, toks: &[&str]) -> Result<(ScalarRule, usize), DocError> {
    match toks.first().copied() {
        Some("constant") => {
            let c = parse_f64(line, toks.get(1).copied().unwrap_or(""))?;
            Ok((ScalarRule::Constant(c), 2))
        }
        Some("geometric") => {
            let a = parse_f64(line, toks.get(1).copied().unwrap_or(""))?;
            let r = parse_f64(line, toks.get(2).copied().unwrap_or(""))?;
            Ok((ScalarRule::Geometric { a, r }, 3))
        }
        Some("polynomial") => {
            let c = parse_f64(line, toks.get(1).copied().unwrap_or(""))?;
            let k: i32 = toks
                .get(2)
                .and_then(|t| t.parse().ok())
                .ok_or(DocError::Parse { line, msg: "polynomial needs integer exponent".into() })?;
            Ok((ScalarRule::Polynomial { c, k, x0: 1.0 }, 3))
        }
        Some("table") => {
            let (head, next) = parse_table_head(line, toks, |t| parse_f64(line, t))?;
            if toks.get(next).copied() != Some("then") {
                return perr(line, "table needs 'then RULE'");
            }
            let (tail, used) = parse_scalar_rule_toks(line, &toks[next + 1..])?;
            Ok((ScalarRule::Table { head, tail: Box::new(tail) }, next + 1 + used))
        }
        other => perr(line, format!("unknown scalar rule {other:?}")),
    }
}

pub fn parse_count_rule(line: usize, s: &str) -> Result<CountRule, DocError> {
    let toks: Vec<&str> = s.split_whitespace().collect();
    parse_count_rule_toks(line, &toks).map(|(r, _)| r)
}

fn parse_u64(line: usize, s: &str) -> Result<u64, DocError> {
    s.parse::<u64>().map_err(|_| DocError::Parse { line, msg: format!("bad count {s:?}") })
}

fn parse_count_rule_toks(line: usize, toks: &[&str]) -> Result<(CountRule, usize), DocError> {
    match toks.first().copied() {
        Some("constant") => Ok((CountRule::Constant(parse_u64(line, toks.get(1).copied().unwrap_or(""))?), 2)),
        Some("geometric") => {
            let a = parse_u64(line, toks.get(1).copied().unwrap_or(""))?;
            let r = parse_u64(line, toks.get(2).copied().unwrap_or(""))?;
            Ok((CountRule::Geometric { a, r }, 3))
        }
        Some("polynomial") => {
            let c = parse_u64(line, toks.get(1).copied().unwrap_or(""))?;
            let k: u32 = toks
                .get(2)
                .and_then(|t| t.parse().ok())
                .ok_or(DocError::Parse { line, msg: "polynomial needs exponent".into() })?;
            Ok((CountRule::Polynomial { c, k, n0: 0 }, 3))
        }
        Some("powers") => {
            let base = parse_u64(line, toks.get(1).copied().unwrap_or(""))?;
            let reps = parse_u64(line, toks.get(2).copied().unwrap_or(""))?;
            if base < 2 {
                return perr(line, "powers rule needs base ≥ 2");
            }
            Ok((CountRule::Powers { base, reps, shift: 0 }, 3))
        }
        Some("table") => {
            let (head, next) = parse_table_head(line, toks, |t| parse_u64(line, t))?;
            if toks.get(next).copied() != Some("then") {
                return perr(line, "table needs 'then RULE'");
            }
            let (tail, used) = parse_count_rule_toks(line, &toks[next + 1..])?;
            Ok((CountRule::Table { head, tail: Box::new(tail) }, next + 1 + used))
        }
        other => perr(line, format!("unknown count rule {other:?}")),
    }
}

fn parse_table_head<T>(
    line: usize,
    toks: &[&str],
    mut f: impl FnMut(&str) -> Result<T, DocError>,
) -> Result<(Vec<T>, usize), DocError> {
    if toks.get(1).copied() != Some("[") && !toks.get(1).is_some_and(|t| t.starts_with('[')) {
        return perr(line, "table needs '[ ... ]'");
    }
    let mut head = Vec::new();
    let mut first = toks[1];
    if first != "[" {
        first = &first[1..];
        if !first.is_empty() {
            if let Some(stripped) = first.strip_suffix(']') {
                head.push(f(stripped)?);
                return Ok((head, 2));
            }
            head.push(f(first)?);
        }
    }
    let mut i = 2;
    while let Some(tok) = toks.get(i) {
        if *tok == "]" {
            return Ok((head, i + 1));
        }
        if let Some(stripped) = tok.strip_suffix(']') {
            head.push(f(stripped)?);
            return Ok((head, i + 1));
        }
        head.push(f(tok)?);
        i += 1;
    }
    perr(line, "unterminated table")
}

#[allow(clippy::too_many_arguments)]
fn build_symmetric(
    gamma: CountRule,
    gamma_left: Option<CountRule>,
    lambda: ScalarRule,
    lambda_left: Option<ScalarRule>,
    mu: ScalarRule,
    mu_left: Option<ScalarRule>,
    rooted: bool,
    free_left_end: bool,
) -> Result<Tree, DocError> {
    let lam2 = ScalarRule2 { right: lambda.clone(), left: lambda_left.unwrap_or_else(|| lambda.clone()) };
    let mu2 = ScalarRule2 { right: mu.clone(), left: mu_left.unwrap_or_else(|| mu.clone()) };
    let gleft = if rooted {
        None
    } else if free_left_end {
        Some(CountRule::Constant(1))
    } else {
        Some(gamma_left.unwrap_or_else(|| gamma.clone()))
    };
    let shape = Arc::new(Shape::Sym {
        gamma: gamma.clone(),
        gamma_left: gleft.clone(),
        gamma_by_gen: !rooted,
        mu: WExpr::ByGen(mu2.clone()),
        lambda: WExpr::ByGen(lam2.clone()),
    });
    let root_mu = mu2.value(0);
    let root_lambda = lam2.value(0);
    if root_mu == 0.0 || root_lambda == 0.0 || !mu.all_nonzero() || !lambda.all_nonzero() {
        return Err(TreeError::ZeroWeight("v0".into()).into());
    }
    let mut model = Model::single_root("v0", root_mu, root_lambda, Some(shape.clone()));
    model.symmetric = Some(SymmetricInfo {
        gamma: gamma.clone(),
        gamma_left: gleft.clone(),
        lambda: lam2.clone(),
        mu: mu2.clone(),
    });
    model.mu_by_gen = Some(mu2.clone());
    model.lambda_by_gen = Some(lam2.clone());
    if !rooted {
        let extra = match &gleft {
            Some(CountRule::Constant(c)) => CountRule::Constant(c.saturating_sub(1)),
            Some(CountRule::Table { head, tail }) => {
                let head = head.iter().map(|c| c.saturating_sub(1)).collect();
                match &**tail {
                    CountRule::Constant(c) => CountRule::Table {
                        head,
                        tail: Box::new(CountRule::Constant(c.saturating_sub(1))),
                    },
                    _ => return perr(0, "unrooted symmetric gamma_left must have a constant tail"),
                }
            }
            _ => return perr(0, "unrooted symmetric gamma_left must be constant or table-then-constant"),
        };
        model.spine = Some(SpineSpec { mu: mu2, lambda: lam2, extra, attach: Some(shape) });
    }
    Ok(Tree::new(model, rooted)?)
}

fn build_prefix_tree(
    vertices: &[(usize, BTreeMap<String, String>)],
    attaches: &[(usize, BTreeMap<String, String>)],
    spine: Option<&(usize, BTreeMap<String, String>)>,
    finite_only: bool,
) -> Result<(Tree, Vec<String>, usize), DocError> {
    if vertices.is_empty() {
        return perr(0, "no vertices");
    }
    let mut warnings = Vec::new();
    // resolve ids; the single parentless vertex must come first
    let mut ids: BTreeMap<&str, usize> = BTreeMap::new();
    for (line, attrs) in vertices {
        let id = attrs.get("id").ok_or(DocError::Parse { line: *line, msg: "vertex needs id=".into() })?;
        if ids.contains_key(id.as_str()) {
            return perr(*line, format!("duplicate vertex id {id:?}"));
        }
        ids.insert(id, ids.len());
    }
    let mut prefix: Vec<PrefixVertex> = Vec::new();
    let mut roots = Vec::new();
    for (line, attrs) in vertices {
        let id = attrs["id"].clone();
        let parent = match attrs.get("parent") {
            None => {
                roots.push(id.clone());
                None
            }
            Some(p) => {
                if p == &id {
                    return Err(TreeError::Cycle(id.clone()).into());
                }
                match ids.get(p.as_str()) {
                    Some(&idx) => Some(idx),
                    None => {
                        return Err(TreeError::DanglingParent { vertex: id.clone(), reference: p.clone() }.into())
                    }
                }
            }
        };
        let mu = match attrs.get("mu") {
            Some(s) => parse_f64(*line, s)?,
            None => 1.0,
        };
        let lambda = match attrs.get("lambda") {
            Some(s) => parse_f64(*line, s)?,
            None => 1.0,
        };
        if mu == 0.0 || lambda == 0.0 {
            return Err(TreeError::ZeroWeight(id.clone()).into());
        }
        prefix.push(PrefixVertex { label: id, parent, children: vec![], mu, lambda, attach: None });
    }
    if roots.len() > 1 {
        return Err(TreeError::MultipleRoots(roots[0].clone(), roots[1].clone()).into());
    }
    if roots.is_empty() {
        return Err(TreeError::Cycle(prefix[0].label.clone()).into());
    }
    // parent indices must point backward for Tree::new; re-sort topologically
    let order = topo_order(&prefix).ok_or_else(|| TreeError::Cycle(prefix[0].label.clone()))?;
    let mut remap = vec![0usize; prefix.len()];
    for (new_idx, &old_idx) in order.iter().enumerate() {
        remap[old_idx] = new_idx;
    }
    let mut sorted: Vec<PrefixVertex> = order
        .iter()
        .map(|&old| {
            let mut pv = prefix[old].clone();
            pv.parent = pv.parent.map(|p| remap[p]);
            pv
        })
        .collect();
    for i in 0..sorted.len() {
        if let Some(p) = sorted[i].parent {
            sorted[p].children.push(i);
        }
    }
    // attachments
    let mut rule_parts = 0usize;
    for (line, attrs) in attaches {
        if finite_only {
            return perr(*line, "finite documents cannot carry attach: lines (use kind: hybrid)");
        }
        let at = attrs.get("at").ok_or(DocError::Parse { line: *line, msg: "attach needs at=".into() })?;
        let idx = match ids.get(at.as_str()) {
            Some(&old) => remap[old],
            None => return perr(*line, format!("attach at unknown vertex {at:?}")),
        };
        let shape = parse_shape(*line, attrs, &mut warnings)?;
        if sorted[idx].attach.is_some() {
            return perr(*line, format!("vertex {at:?} already has an attachment"));
        }
        sorted[idx].attach = Some(shape);
        rule_parts += 1;
    }
    let mut model = Model { prefix: sorted, ..Default::default() };
    let mut rooted = true;
    if let Some((line, attrs)) = spine {
        if finite_only {
            return perr(*line, "finite documents cannot carry a spine: line (use kind: hybrid)");
        }
        rooted = false;
        let at = attrs.get("at").map(String::as_str).unwrap_or_else(|| model.prefix[0].label.as_str());
        if ids.get(at).map(|&old| remap[old]) != Some(0) {
            return perr(*line, "the spine must continue above the parentless vertex");
        }
        let mu = match attrs.get("mu") {
            Some(s) => parse_scalar_rule(*line, s.replace('_', " ").as_str())?,
            None => ScalarRule::Constant(1.0),
        };
        let lambda = match attrs.get("lambda") {
            Some(s) => parse_scalar_rule(*line, s.replace('_', " ").as_str())?,
            None => ScalarRule::Constant(1.0),
        };
        let extra = match attrs.get("attachments") {
            Some(s) => parse_count_rule(*line, s.replace('_', " ").as_str())?,
            None => CountRule::Constant(0),
        };
        let attach = match attrs.get("shape") {
            Some(_) => Some(parse_shape(*line, attrs, &mut warnings)?),
            None => None,
        };
        if !matches!(extra, CountRule::Constant(0)) && attach.is_none() {
            return perr(*line, "spine attachments need a shape");
        }
        rule_parts += 1;
        model.spine = Some(SpineSpec {
            mu: ScalarRule2 { right: mu.clone(), left: mu },
            lambda: ScalarRule2 { right: lambda.clone(), left: lambda },
            extra,
            attach,
        });
    }
    if finite_only {
        // leaves allowed; nothing rule-generated
        let tree = Tree::new(model, true)?;
        return Ok((tree, warnings, 0));
    }
    let tree = Tree::new(model, rooted)?;
    Ok((tree, warnings, rule_parts))
}

fn topo_order(prefix: &[PrefixVertex]) -> Option<Vec<usize>> {
    // parents before children; detect cycles
    let n = prefix.len();
    let mut order = Vec::with_capacity(n);
    let mut state = vec![0u8; n]; // 0 new, 1 visiting, 2 done
    fn visit(i: usize, prefix: &[PrefixVertex], state: &mut [u8], order: &mut Vec<usize>) -> bool {
        match state[i] {
            2 => return true,
            1 => return false,
            _ => {}
        }
        state[i] = 1;
        if let Some(p) = prefix[i].parent {
            if !visit(p, prefix, state, order) {
                return false;
            }
        }
        state[i] = 2;
        order.push(i);
        true
    }
    for i in 0..n {
        if !visit(i, prefix, &mut state, &mut order) {
            return None;
        }
    }
    Some(order)
}

/// `shape=branch|sym|decorated|fan|stop` with rule attributes; underscores
/// stand in for spaces inside attribute values.
fn parse_shape(
    line: usize,
    attrs: &BTreeMap<String, String>,
    warnings: &mut Vec<String>,
) -> Result<Arc<Shape>, DocError> {
    let kind = attrs.get("shape").ok_or(DocError::Parse { line, msg: "attachment needs shape=".into() })?;
    let rule_of = |key: &str, default: f64| -> Result<WExpr, DocError> {
        match attrs.get(key) {
            None => Ok(WExpr::Const(default)),
            Some(s) => {
                let s = s.replace('_', " ");
                if let Some(rest) = s.strip_prefix("gen ") {
                    let r = parse_scalar_rule(line, rest)?;
                    let l = match attrs.get(&format!("{key}-left")) {
                        Some(ls) => parse_scalar_rule(line, ls.replace('_', " ").as_str())?,
                        None => r.clone(),
                    };
                    Ok(WExpr::ByGen(ScalarRule2 { right: r, left: l }))
                } else {
                    Ok(WExpr::ByDepth(parse_scalar_rule(line, &s)?))
                }
            }
        }
    };
    match kind.as_str() {
        "stop" => Ok(Arc::new(Shape::Stop)),
        "branch" => Ok(Arc::new(Shape::Branch { mu: rule_of("mu", 1.0)?, lambda: rule_of("lambda", 1.0)? })),
        "sym" => {
            let gamma = match attrs.get("gamma") {
                Some(s) => parse_count_rule(line, s.replace('_', " ").as_str())?,
                None => return perr(line, "sym shape needs gamma="),
            };
            if !gamma.all_positive() {
                warnings.push(format!("line {line}: rule admits leaves (Unknown-prone for dynamics)"));
            }
            Ok(Arc::new(Shape::Sym {
                gamma,
                gamma_left: None,
                gamma_by_gen: attrs.get("by").map(String::as_str) == Some("gen"),
                mu: rule_of("mu", 1.0)?,
                lambda: rule_of("lambda", 1.0)?,
            }))
        }
        "decorated" => {
            let teeth = match attrs.get("teeth") {
                Some(s) => parse_u64(line, s)?,
                None => 1,
            };
            let tooth = Arc::new(Shape::Branch {
                mu: rule_of("tooth-mu", 1.0)?,
                lambda: rule_of("tooth-lambda", 1.0)?,
            });
            Ok(Arc::new(Shape::Decorated {
                spine_mu: rule_of("mu", 1.0)?,
                spine_lambda: rule_of("lambda", 1.0)?,
                teeth,
                tooth,
            }))
        }
        "fan" => {
            let mu_index = match attrs.get("mu") {
                Some(s) => parse_scalar_rule(line, s.replace('_', " ").as_str())?,
                None => ScalarRule::Constant(1.0),
            };
            let lambda_index = match attrs.get("lambda") {
                Some(s) => parse_scalar_rule(line, s.replace('_', " ").as_str())?,
                None => ScalarRule::Constant(1.0),
            };
            let child = match attrs.get("child").map(String::as_str) {
                None | Some("stop") => Arc::new(Shape::Stop),
                Some("branch") => Arc::new(Shape::Branch {
                    mu: rule_of("child-mu", 1.0)?,
                    lambda: rule_of("child-lambda", 1.0)?,
                }),
                Some(other) => return perr(line, format!("unsupported fan child {other:?}")),
            };
            warnings.push(format!("line {line}: infinite fan attachment (Unknown-prone without tail rules)"));
            Ok(Arc::new(Shape::Fan { mu_index, lambda_index, child }))
        }
        other => perr(line, format!("unknown shape {other:?}")),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constants::{continued_fraction, Budget, Status};
    use crate::exponent::Exponent;
    use crate::weights::WeightMap;

    #[test]
    fn minimal_path_document() {
        let doc = "format_version: 1\nkind: finite\nvertex: id=a\nvertex: id=b parent=a\nvertex: id=c parent=b\n";
        let (tree, summary) = parse_document(doc).unwrap();
        assert!(summary.rooted);
        assert_eq!(summary.explicit_vertices, 3);
        assert_eq!(tree.gen(tree.lookup("c").unwrap()), 2);
    }

    #[test]
    fn symmetric_binary_document() {
        let doc = "format_version: 1\nkind: symmetric\nrooted: true\nfree_left_end: false\ngamma: constant 2\nlambda: constant 1\n";
        let (tree, _) = parse_document(doc).unwrap();
        let c = continued_fraction(&tree, tree.anchor(), &WeightMap::Mu, Exponent::Finite(2.0), Budget::default(), 1e-10);
        assert_eq!(c.status, Status::Exact);
        assert!((c.value - 1.0).abs() < 1e-12);
    }

    #[test]
    fn self_parent_is_cycle() {
        let doc = "format_version: 1\nkind: finite\nvertex: id=a parent=a\n";
        match parse_document(doc) {
            Err(DocError::Tree(TreeError::Cycle(v))) => assert_eq!(v, "a"),
            other => panic!("expected cycle error, got {:?}", other.err().map(|e| e.to_string())),
        }
    }

    #[test]
    fn dangling_parent_reported() {
        let doc = "format_version: 1\nkind: finite\nvertex: id=a\nvertex: id=b parent=zz\n";
        match parse_document(doc) {
            Err(DocError::Tree(TreeError::DanglingParent { vertex, reference })) => {
                assert_eq!(vertex, "b");
                assert_eq!(reference, "zz");
            }
            other => panic!("expected dangling parent, got {:?}", other.err().map(|e| e.to_string())),
        }
    }

    #[test]
    fn zero_weight_rejected() {
        let doc = "format_version: 1\nkind: finite\nvertex: id=a mu=0\n";
        assert!(matches!(parse_document(doc), Err(DocError::Tree(TreeError::ZeroWeight(_)))));
    }

    #[test]
    fn multiple_roots_rejected() {
        let doc = "format_version: 1\nkind: finite\nvertex: id=a\nvertex: id=b\n";
        assert!(matches!(parse_document(doc), Err(DocError::Tree(TreeError::MultipleRoots(_, _)))));
    }

    #[test]
    fn hybrid_with_branch_attachment() {
        let doc = "format_version: 1\nkind: hybrid\nvertex: id=r\nvertex: id=u parent=r mu=0.70710678118654752\nattach: at=u shape=branch mu=geometric_0.70710678118654752_0.70710678118654752\n";
        let (tree, summary) = parse_document(doc).unwrap();
        assert_eq!(summary.rule_parts, 1);
        let c = continued_fraction(&tree, tree.anchor(), &WeightMap::Mu, Exponent::Finite(2.0), Budget::default(), 1e-10);
        // single branch with μ_n = 2^{-n/2}: c_2² = Σ 2^{-n} = 1
        assert_eq!(c.status, Status::Exact);
        assert!((c.value - 1.0).abs() < 1e-10, "{}", c.value);
    }

    #[test]
    fn powers_rule_in_document() {
        let doc = "format_version: 1\nkind: symmetric\nrooted: true\ngamma: powers 4 2\nlambda: constant 1\n";
        let (tree, _) = parse_document(doc).unwrap();
        let lv = tree.descendants_to_depth(tree.anchor(), 5, 8);
        assert_eq!(lv.iter().map(Vec::len).collect::<Vec<_>>(), vec![1, 1, 1, 1, 1, 2]);
    }

    #[test]
    fn table_rule_roundtrip() {
        let doc = "format_version: 1\nkind: symmetric\nrooted: true\ngamma: table [ 3 1 ] then constant 2\nlambda: geometric 1 0.5\n";
        let (tree, _) = parse_document(doc).unwrap();
        let lv = tree.descendants_to_depth(tree.anchor(), 3, 8);
        assert_eq!(lv.iter().map(Vec::len).collect::<Vec<_>>(), vec![1, 3, 3, 6]);
    }

    #[test]
    fn unrooted_symmetric_spine() {
        let doc = "format_version: 1\nkind: symmetric\nrooted: false\nfree_left_end: false\ngamma: constant 2\nlambda: constant 1\n";
        let (tree, _) = parse_document(doc).unwrap();
        assert!(!tree.is_rooted());
        let a1 = tree.ancestor(tree.anchor(), 1).unwrap();
        assert_eq!(tree.children(a1, 8).as_slice().len(), 2);
        assert!(!tree.has_free_left_end());
    }
}
