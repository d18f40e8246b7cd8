//! Directed trees: rooted or unrooted, finite or rule-generated.
//!
//! A [`Tree`] is an arena of vertices expanded lazily from a [`Model`]:
//! an explicit finite prefix (at least the anchor vertex), per-vertex rule
//! attachments describing infinite continuations, and, for unrooted trees,
//! a spine of ancestors above the anchor. Expansion is deterministic, so
//! vertex ids, children orders and labels are reproducible run to run.

use crate::rules::{CountRule, ScalarRule, ScalarRule2};
use std::collections::BTreeMap;
use std::fmt;
use std::sync::{Arc, RwLock};

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct VertexId(pub u32);

impl fmt::Display for VertexId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}

/// Weight expression attached to rule-generated vertices.
#[derive(Clone, Debug)]
pub enum WExpr {
    Const(f64),
    /// Evaluated at the vertex's absolute generation.
    ByGen(ScalarRule2),
    /// Evaluated at the vertex's local depth within its shape instance
    /// (the attach point is depth 0).
    ByDepth(ScalarRule),
}

impl WExpr {
    pub fn eval(&self, gen: i64, depth: u64) -> f64 {
        match self {
            WExpr::Const(c) => *c,
            WExpr::ByGen(r) => r.value(gen),
            WExpr::ByDepth(r) => r.value(depth),
        }
    }
}

/// Rule-generated continuation below an attach point.
#[derive(Debug)]
pub enum Shape {
    /// No continuation: attach point stays a leaf.
    Stop,
    /// A single infinite branch.
    Branch { mu: WExpr, lambda: WExpr },
    /// Children counts per level: `gamma` evaluated at the local depth of
    /// the parent, or at its absolute generation when `gamma_by_gen`.
    Sym {
        gamma: CountRule,
        /// Children counts for negative generations (unrooted symmetric trees).
        gamma_left: Option<CountRule>,
        gamma_by_gen: bool,
        mu: WExpr,
        lambda: WExpr,
    },
    /// An infinite spine each vertex of which also sprouts `teeth` copies
    /// of `tooth`.
    Decorated {
        spine_mu: WExpr,
        spine_lambda: WExpr,
        teeth: u64,
        tooth: Arc<Shape>,
    },
    /// Infinitely many children; the i-th child (i ≥ 1) has weights from
    /// the index rules and continues as `child`.
    Fan {
        mu_index: ScalarRule,
        lambda_index: ScalarRule,
        child: Arc<Shape>,
    },
}

impl Shape {
    /// Number of children the shape generates for a host vertex, or `None`
    /// for infinitely many.
    pub fn arity(&self, host_depth: u64, host_gen: i64) -> Option<u64> {
        match self {
            Shape::Stop => Some(0),
            Shape::Branch { .. } => Some(1),
            Shape::Sym { gamma, gamma_left, gamma_by_gen, .. } => {
                let count = if *gamma_by_gen {
                    if host_gen >= 0 {
                        gamma.value(host_gen as u64)
                    } else {
                        gamma_left.as_ref().unwrap_or(gamma).value((-host_gen) as u64)
                    }
                } else {
                    gamma.value(host_depth)
                };
                Some(count)
            }
            Shape::Decorated { teeth, .. } => Some(1 + teeth),
            Shape::Fan { .. } => None,
        }
    }
}

/// How a vertex generates its children.
#[derive(Clone, Debug)]
pub enum Cont {
    /// Vertex of the explicit prefix.
    Explicit { idx: usize },
    /// Ancestor `prt^n(anchor)` of an unrooted tree, `n ≥ 1`.
    Spine { n: u64 },
    /// Rule-generated vertex at `depth ≥ 1` inside a shape instance.
    InShape { shape: Arc<Shape>, depth: u64 },
}

/// Explicit prefix vertex description.
#[derive(Clone, Debug)]
pub struct PrefixVertex {
    pub label: String,
    pub parent: Option<usize>,
    pub children: Vec<usize>,
    pub mu: f64,
    pub lambda: f64,
    /// Rule continuation below this vertex (besides explicit children).
    pub attach: Option<Arc<Shape>>,
}

/// Ancestor spine of an unrooted tree.
#[derive(Clone, Debug)]
pub struct SpineSpec {
    pub mu: ScalarRule2,
    pub lambda: ScalarRule2,
    /// Off-spine attachments per ancestor: count at ancestor n (n ≥ 1).
    pub extra: CountRule,
    pub attach: Option<Arc<Shape>>,
}

impl SpineSpec {
    /// True when all off-spine attachment counts vanish from some point on,
    /// i.e. the tree has a free left end.
    pub fn eventually_bare(&self) -> bool {
        fn bare(rule: &CountRule) -> bool {
            match rule {
                CountRule::Constant(c) => *c == 0,
                CountRule::Table { tail, .. } => bare(tail),
                _ => false,
            }
        }
        bare(&self.extra)
    }
}

/// Declares a tree symmetric: children counts and weights constant on
/// generations, given by rules.
#[derive(Clone, Debug)]
pub struct SymmetricInfo {
    /// `γ_n = |Χ(v)|` for `v ∈ gen_n`, `n ≥ 0`.
    pub gamma: CountRule,
    /// `|Χ(v)|` at generation `−n`, `n ≥ 1` (unrooted trees).
    pub gamma_left: Option<CountRule>,
    pub lambda: ScalarRule2,
    pub mu: ScalarRule2,
}

/// Immutable tree description.
#[derive(Debug, Default)]
pub struct Model {
    pub prefix: Vec<PrefixVertex>,
    pub spine: Option<SpineSpec>,
    /// Present when the tree and both weights are symmetric by rule.
    pub symmetric: Option<SymmetricInfo>,
    /// Present when μ is constant on generations, given by this rule.
    pub mu_by_gen: Option<ScalarRule2>,
    /// Present when λ is constant on generations.
    pub lambda_by_gen: Option<ScalarRule2>,
}

impl Model {
    pub fn single_root(label: &str, mu: f64, lambda: f64, attach: Option<Arc<Shape>>) -> Model {
        Model {
            prefix: vec![PrefixVertex {
                label: label.to_string(),
                parent: None,
                children: vec![],
                mu,
                lambda,
                attach,
            }],
            ..Default::default()
        }
    }
}

#[derive(Clone, Debug)]
enum ChildList {
    Finite(Vec<VertexId>),
    /// Infinite fan: only a materialized prefix is held.
    Fan(Vec<VertexId>),
}

#[derive(Debug)]
struct Node {
    parent: Option<VertexId>,
    children: Option<ChildList>,
    gen: i64,
    mu: f64,
    lambda: f64,
    cont: Cont,
    label: Label,
}

#[derive(Clone, Debug)]
enum Label {
    Named(Arc<str>),
    Child { parent: VertexId, index: u32 },
    Spine { n: u64 },
}

struct Arena {
    nodes: Vec<Node>,
    /// spine[0] = anchor; spine[n] = prt^n(anchor) for unrooted trees.
    spine: Vec<VertexId>,
    by_label: BTreeMap<String, VertexId>,
}

/// Children of a vertex as seen through a budget.
#[derive(Clone, Debug)]
pub enum Children {
    Finite(Vec<VertexId>),
    /// Materialized prefix of an infinite child list.
    Infinite(Vec<VertexId>),
}

impl Children {
    pub fn as_slice(&self) -> &[VertexId] {
        match self {
            Children::Finite(v) | Children::Infinite(v) => v,
        }
    }

    pub fn is_infinite(&self) -> bool {
        matches!(self, Children::Infinite(_))
    }
}

pub struct Tree {
    model: Model,
    arena: RwLock<Arena>,
    rooted: bool,
}

#[derive(Debug, Clone, thiserror::Error)]
pub enum TreeError {
    #[error("cycle detected at vertex {0}")]
    Cycle(String),
    #[error("multiple roots: {0} and {1}")]
    MultipleRoots(String, String),
    #[error("zero weight at vertex {0}")]
    ZeroWeight(String),
    #[error("dangling parent reference {reference} at vertex {vertex}")]
    DanglingParent { vertex: String, reference: String },
    #[error("unknown vertex {0}")]
    UnknownVertex(String),
    #[error("{0}")]
    Invalid(String),
}

impl Tree {
    /// Builds a tree from a model. `rooted` declares whether the prefix head
    /// is a root (no spine) or the anchor of an unrooted tree.
    pub fn new(model: Model, rooted: bool) -> Result<Tree, TreeError> {
        if model.prefix.is_empty() {
            return Err(TreeError::Invalid("empty vertex set".into()));
        }
        if !rooted && model.spine.is_none() {
            return Err(TreeError::Invalid("unrooted tree needs a spine specification".into()));
        }
        if rooted && model.spine.is_some() {
            return Err(TreeError::Invalid("rooted tree cannot have a spine".into()));
        }
        // prefix[0] must be the head; parents must point upward (no cycles by construction)
        for (i, pv) in model.prefix.iter().enumerate() {
            match pv.parent {
                None if i != 0 => {
                    return Err(TreeError::MultipleRoots(
                        model.prefix[0].label.clone(),
                        pv.label.clone(),
                    ))
                }
                Some(p) if p >= i => {
                    return Err(TreeError::Cycle(pv.label.clone()));
                }
                _ => {}
            }
            if pv.mu == 0.0 || pv.lambda == 0.0 {
                return Err(TreeError::ZeroWeight(pv.label.clone()));
            }
        }
        {
            let mut seen = std::collections::BTreeSet::new();
            for pv in &model.prefix {
                if !seen.insert(pv.label.as_str()) {
                    return Err(TreeError::Invalid(format!("duplicate vertex id {}", pv.label)));
                }
            }
        }
        let tree = Tree {
            arena: RwLock::new(Arena { nodes: Vec::new(), spine: Vec::new(), by_label: BTreeMap::new() }),
            model,
            rooted,
        };
        tree.materialize_prefix();
        Ok(tree)
    }

    fn materialize_prefix(&self) {
        let mut arena = self.arena.write().unwrap();
        for (i, pv) in self.model.prefix.iter().enumerate() {
            let id = VertexId(arena.nodes.len() as u32);
            let (parent, gen) = match pv.parent {
                None => (None, 0),
                Some(p) => {
                    let pid = VertexId(p as u32);
                    (Some(pid), arena.nodes[p].gen + 1)
                }
            };
            arena.nodes.push(Node {
                parent,
                children: None,
                gen,
                mu: pv.mu,
                lambda: pv.lambda,
                cont: Cont::Explicit { idx: i },
                label: Label::Named(Arc::from(pv.label.as_str())),
            });
            arena.by_label.insert(pv.label.clone(), id);
        }
        arena.spine.push(VertexId(0));
    }

    pub fn is_rooted(&self) -> bool {
        self.rooted
    }

    /// The root for rooted trees; the generation base vertex otherwise.
    pub fn anchor(&self) -> VertexId {
        VertexId(0)
    }

    pub fn root(&self) -> Option<VertexId> {
        self.rooted.then_some(VertexId(0))
    }

    pub fn model(&self) -> &Model {
        &self.model
    }

    pub fn vertex_count(&self) -> usize {
        self.arena.read().unwrap().nodes.len()
    }

    pub fn lookup(&self, label: &str) -> Option<VertexId> {
        self.arena.read().unwrap().by_label.get(label).copied()
    }

    pub fn parent(&self, v: VertexId) -> Option<VertexId> {
        if let Some(p) = self.arena.read().unwrap().nodes[v.0 as usize].parent {
            return Some(p);
        }
        if self.rooted {
            return None;
        }
        // unrooted: only spine tops lack a materialized parent
        let is_spine_top = {
            let a = self.arena.read().unwrap();
            *a.spine.last().unwrap() == v
        };
        if is_spine_top {
            self.extend_spine();
            self.arena.read().unwrap().nodes[v.0 as usize].parent
        } else {
            None
        }
    }

    /// `prt^k(v)`, extending the spine as needed.
    pub fn ancestor(&self, v: VertexId, k: u64) -> Option<VertexId> {
        let mut cur = v;
        for _ in 0..k {
            cur = self.parent(cur)?;
        }
        Some(cur)
    }

    fn extend_spine(&self) {
        let spec = self.model.spine.as_ref().expect("spine spec");
        let mut arena = self.arena.write().unwrap();
        let n = arena.spine.len() as u64; // new ancestor index
        let child = *arena.spine.last().unwrap();
        let id = VertexId(arena.nodes.len() as u32);
        arena.nodes.push(Node {
            parent: None,
            children: None,
            gen: -(n as i64),
            mu: spec.mu.value(-(n as i64)),
            lambda: spec.lambda.value(-(n as i64)),
            cont: Cont::Spine { n },
            label: Label::Spine { n },
        });
        arena.nodes[child.0 as usize].parent = Some(id);
        arena.spine.push(id);
    }

    pub fn gen(&self, v: VertexId) -> i64 {
        self.arena.read().unwrap().nodes[v.0 as usize].gen
    }

    pub fn mu(&self, v: VertexId) -> f64 {
        self.arena.read().unwrap().nodes[v.0 as usize].mu
    }

    pub fn lambda(&self, v: VertexId) -> f64 {
        self.arena.read().unwrap().nodes[v.0 as usize].lambda
    }

    pub fn cont(&self, v: VertexId) -> Cont {
        self.arena.read().unwrap().nodes[v.0 as usize].cont.clone()
    }

    pub fn label(&self, v: VertexId) -> String {
        let arena = self.arena.read().unwrap();
        let mut parts: Vec<String> = Vec::new();
        let mut cur = v;
        loop {
            match &arena.nodes[cur.0 as usize].label {
                Label::Named(s) => {
                    parts.push(s.to_string());
                    break;
                }
                Label::Spine { n } => {
                    parts.push(format!("a{n}"));
                    break;
                }
                Label::Child { parent, index } => {
                    parts.push(index.to_string());
                    cur = *parent;
                }
            }
        }
        parts.reverse();
        parts.join(".")
    }

    pub fn is_leaf(&self, v: VertexId) -> bool {
        match self.cont(v) {
            Cont::Explicit { idx } => {
                let pv = &self.model.prefix[idx];
                pv.children.is_empty()
                    && pv.attach.as_ref().map_or(true, |s| matches!(**s, Shape::Stop))
            }
            Cont::Spine { .. } => false,
            Cont::InShape { shape, depth } => {
                let gen = self.gen(v);
                shape.arity(depth, gen) == Some(0)
            }
        }
    }

    pub fn has_infinite_children(&self, v: VertexId) -> bool {
        match self.cont(v) {
            Cont::Explicit { idx } => {
                matches!(self.model.prefix[idx].attach.as_deref(), Some(Shape::Fan { .. }))
            }
            Cont::Spine { .. } => false,
            Cont::InShape { shape, .. } => matches!(&*shape, Shape::Fan { .. }),
        }
    }

    /// Children of `v`, materializing them on demand. For infinite child
    /// lists at most `fan_budget` children are materialized.
    pub fn children(&self, v: VertexId, fan_budget: usize) -> Children {
        {
            let arena = self.arena.read().unwrap();
            match &arena.nodes[v.0 as usize].children {
                Some(ChildList::Finite(c)) => return Children::Finite(c.clone()),
                Some(ChildList::Fan(c)) if c.len() >= fan_budget => {
                    return Children::Infinite(c[..fan_budget].to_vec())
                }
                _ => {}
            }
        }
        self.expand_children(v, fan_budget)
    }

    fn expand_children(&self, v: VertexId, fan_budget: usize) -> Children {
        let (cont, gen) = {
            let arena = self.arena.read().unwrap();
            let node = &arena.nodes[v.0 as usize];
            (node.cont.clone(), node.gen)
        };
        // descriptors of children still to be materialized, in order
        let mut descr: Vec<ChildDescr> = Vec::new();
        let mut infinite = false;
        let mut spine_child: Option<VertexId> = None;
        match &cont {
            Cont::Explicit { idx } => {
                let pv = &self.model.prefix[*idx];
                for &c in &pv.children {
                    descr.push(ChildDescr::Prefix(c));
                }
                if let Some(shape) = &pv.attach {
                    infinite = shape_continuation(shape, 0, gen, fan_budget, &mut descr);
                }
            }
            Cont::Spine { n } => {
                // children of prt^n(anchor): prt^(n-1)(anchor) first, then
                // one instance per off-spine attachment
                let spec = self.model.spine.as_ref().unwrap();
                spine_child = Some(self.arena.read().unwrap().spine[(*n - 1) as usize]);
                let extra = spec.extra.value(*n);
                for _ in 0..extra {
                    if let Some(shape) = &spec.attach {
                        if let Some(d) = instance_child(shape, gen) {
                            descr.push(d);
                        }
                    }
                }
            }
            Cont::InShape { shape, depth } => {
                infinite = shape_continuation(shape, *depth, gen, fan_budget, &mut descr);
            }
        }
        self.commit_children(v, descr, infinite, spine_child, fan_budget)
    }

    fn commit_children(
        &self,
        v: VertexId,
        descr: Vec<ChildDescr>,
        infinite: bool,
        spine_child: Option<VertexId>,
        fan_budget: usize,
    ) -> Children {
        let mut arena = self.arena.write().unwrap();
        // a concurrent expansion may have won the race
        if let Some(existing) = &arena.nodes[v.0 as usize].children {
            match existing {
                ChildList::Finite(c) => return Children::Finite(c.clone()),
                ChildList::Fan(c) if c.len() >= fan_budget => {
                    return Children::Infinite(c[..fan_budget].to_vec());
                }
                ChildList::Fan(_) => {} // regrow below
            }
        }
        let mut ids: Vec<VertexId> = match &arena.nodes[v.0 as usize].children {
            Some(ChildList::Fan(c)) => c.clone(),
            _ => spine_child.into_iter().collect(),
        };
        let base = ids.len();
        let gen = arena.nodes[v.0 as usize].gen;
        // the full ordered child list is [already materialized..] ++ descr[skip..]
        let skip = base.saturating_sub(spine_child.is_some() as usize);
        for (j, d) in descr.into_iter().enumerate().skip(skip) {
            let index_in_parent = (j + spine_child.is_some() as usize) as u32;
            match d {
                ChildDescr::Prefix(idx) => {
                    let id = arena.by_label[&self.model.prefix[idx].label];
                    ids.push(id);
                }
                ChildDescr::Rule { mu, lambda, cont } => {
                    let id = VertexId(arena.nodes.len() as u32);
                    arena.nodes.push(Node {
                        parent: Some(v),
                        children: None,
                        gen: gen + 1,
                        mu,
                        lambda,
                        cont,
                        label: Label::Child { parent: v, index: index_in_parent },
                    });
                    ids.push(id);
                }
            }
        }
        if infinite {
            arena.nodes[v.0 as usize].children = Some(ChildList::Fan(ids.clone()));
            Children::Infinite(ids)
        } else {
            arena.nodes[v.0 as usize].children = Some(ChildList::Finite(ids.clone()));
            Children::Finite(ids)
        }
    }

    /// Deepest materialized ancestor index (unrooted trees).
    pub fn spine_len(&self) -> u64 {
        self.arena.read().unwrap().spine.len() as u64 - 1
    }

    /// Unrooted trees with a free left end: some vertex all of whose
    /// ancestors have exactly one child.
    pub fn has_free_left_end(&self) -> bool {
        !self.rooted && self.model.spine.as_ref().is_some_and(|s| s.eventually_bare())
    }

    /// Breadth-first vertices of `V(v)` up to `depth`, materializing them.
    pub fn descendants_to_depth(&self, v: VertexId, depth: u64, fan_budget: usize) -> Vec<Vec<VertexId>> {
        let mut levels = vec![vec![v]];
        for _ in 0..depth {
            let mut next = Vec::new();
            for &u in levels.last().unwrap() {
                next.extend_from_slice(self.children(u, fan_budget).as_slice());
            }
            if next.is_empty() {
                break;
            }
            levels.push(next);
        }
        levels
    }
}

enum ChildDescr {
    /// Pre-materialized explicit prefix vertex.
    Prefix(usize),
    Rule { mu: f64, lambda: f64, cont: Cont },
}

/// Children a shape generates below a host at `host_depth` within the
/// instance (attach point = 0). Returns true when the list is infinite.
fn shape_continuation(
    shape: &Arc<Shape>,
    host_depth: u64,
    host_gen: i64,
    fan_budget: usize,
    descr: &mut Vec<ChildDescr>,
) -> bool {
    let cg = host_gen + 1;
    let cd = host_depth + 1;
    match &**shape {
        Shape::Stop => false,
        Shape::Branch { mu, lambda } => {
            descr.push(ChildDescr::Rule {
                mu: mu.eval(cg, cd),
                lambda: lambda.eval(cg, cd),
                cont: Cont::InShape { shape: shape.clone(), depth: cd },
            });
            false
        }
        Shape::Sym { mu, lambda, .. } => {
            let count = shape.arity(host_depth, host_gen).unwrap();
            let m = mu.eval(cg, cd);
            let l = lambda.eval(cg, cd);
            for _ in 0..count {
                descr.push(ChildDescr::Rule {
                    mu: m,
                    lambda: l,
                    cont: Cont::InShape { shape: shape.clone(), depth: cd },
                });
            }
            false
        }
        Shape::Decorated { spine_mu, spine_lambda, teeth, tooth } => {
            descr.push(ChildDescr::Rule {
                mu: spine_mu.eval(cg, cd),
                lambda: spine_lambda.eval(cg, cd),
                cont: Cont::InShape { shape: shape.clone(), depth: cd },
            });
            for _ in 0..*teeth {
                if let Some(d) = instance_child(tooth, host_gen) {
                    descr.push(d);
                }
            }
            false
        }
        Shape::Fan { mu_index, lambda_index, child } => {
            for i in 1..=(fan_budget as u64) {
                descr.push(ChildDescr::Rule {
                    mu: mu_index.value(i),
                    lambda: lambda_index.value(i),
                    cont: Cont::InShape { shape: child.clone(), depth: 0 },
                });
            }
            true
        }
    }
}

/// One child starting a fresh instance of `shape` below a host at
/// `host_gen` (spine attachments, decorated-branch teeth). Symmetric
/// instances evaluate their child counts by generation.
fn instance_child(shape: &Arc<Shape>, host_gen: i64) -> Option<ChildDescr> {
    let cg = host_gen + 1;
    match &**shape {
        Shape::Stop | Shape::Fan { .. } => None,
        Shape::Branch { mu, lambda } | Shape::Sym { mu, lambda, .. } => Some(ChildDescr::Rule {
            mu: mu.eval(cg, 1),
            lambda: lambda.eval(cg, 1),
            cont: Cont::InShape { shape: shape.clone(), depth: 1 },
        }),
        Shape::Decorated { spine_mu, spine_lambda, .. } => Some(ChildDescr::Rule {
            mu: spine_mu.eval(cg, 1),
            lambda: spine_lambda.eval(cg, 1),
            cont: Cont::InShape { shape: shape.clone(), depth: 1 },
        }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rules::{CountRule, ScalarRule};

    fn binary_rooted() -> Tree {
        let shape = Arc::new(Shape::Sym {
            gamma: CountRule::constant(2),
            gamma_left: None,
            gamma_by_gen: false,
            mu: WExpr::Const(1.0),
            lambda: WExpr::Const(1.0),
        });
        Tree::new(Model::single_root("v0", 1.0, 1.0, Some(shape)), true).unwrap()
    }

    #[test]
    fn binary_generations() {
        let t = binary_rooted();
        let lv = t.descendants_to_depth(t.anchor(), 3, 64);
        assert_eq!(lv.iter().map(Vec::len).collect::<Vec<_>>(), vec![1, 2, 4, 8]);
        for (d, level) in lv.iter().enumerate() {
            for &v in level {
                assert_eq!(t.gen(v), d as i64);
            }
        }
    }

    #[test]
    fn expansion_is_deterministic() {
        let t1 = binary_rooted();
        let t2 = binary_rooted();
        let l1 = t1.descendants_to_depth(t1.anchor(), 4, 64);
        let l2 = t2.descendants_to_depth(t2.anchor(), 4, 64);
        let lab = |t: &Tree, ls: &Vec<Vec<VertexId>>| {
            ls.iter().flatten().map(|&v| t.label(v)).collect::<Vec<_>>()
        };
        assert_eq!(lab(&t1, &l1), lab(&t2, &l2));
    }

    #[test]
    fn unrooted_path_tree() {
        // tree ℤ: anchor with single-branch continuation, bare spine
        let shape = Arc::new(Shape::Branch { mu: WExpr::Const(1.0), lambda: WExpr::Const(1.0) });
        let model = Model {
            prefix: vec![PrefixVertex {
                label: "0".into(),
                parent: None,
                children: vec![],
                mu: 1.0,
                lambda: 1.0,
                attach: Some(shape),
            }],
            spine: Some(SpineSpec {
                mu: ScalarRule2::one_sided(ScalarRule::constant(1.0)),
                lambda: ScalarRule2::one_sided(ScalarRule::constant(1.0)),
                extra: CountRule::constant(0),
                attach: None,
            }),
            ..Default::default()
        };
        let t = Tree::new(model, false).unwrap();
        let a = t.anchor();
        let p2 = t.ancestor(a, 2).unwrap();
        assert_eq!(t.gen(p2), -2);
        let cs = t.children(p2, 8);
        assert_eq!(cs.as_slice().len(), 1);
        assert_eq!(cs.as_slice()[0], t.ancestor(a, 1).unwrap());
        let down = t.children(a, 8);
        assert_eq!(down.as_slice().len(), 1);
        assert_eq!(t.gen(down.as_slice()[0]), 1);
    }

    #[test]
    fn rejects_cycles_and_double_roots() {
        let bad = Model {
            prefix: vec![
                PrefixVertex { label: "a".into(), parent: None, children: vec![1], mu: 1.0, lambda: 1.0, attach: None },
                PrefixVertex { label: "b".into(), parent: Some(1), children: vec![], mu: 1.0, lambda: 1.0, attach: None },
            ],
            ..Default::default()
        };
        assert!(matches!(Tree::new(bad, true), Err(TreeError::Cycle(_))));
    }
}
