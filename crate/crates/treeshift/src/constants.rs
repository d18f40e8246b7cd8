//! The constants `c_p(V,μ)` and `r_p(V,μ)` of a weighted rooted tree,
//! computed by the backward-forward truncation recurrence with certified
//! monotone lower bounds, structural tail certificates, and the branch
//! continued-fraction expansion.

use crate::exponent::Exponent;
use crate::rules::{
    scalar_inf, scalar_pow_sum, scalar_sup, sym_cinf_sup, sym_cp_pow_series, Amplitude, CountRule,
    ScalarRule, ScalarRule2, SeriesVerdict,
};
use crate::tree::{Children, Cont, Shape, Tree, VertexId, WExpr};
use crate::weights::WeightMap;
use std::collections::BTreeMap;
use std::sync::Arc;

/// Expansion and work limits. Every query takes a budget and returns a
/// partial result with explicit status instead of blocking.
#[derive(Clone, Copy, Debug)]
pub struct Budget {
    /// Maximum truncation depth.
    pub depth: u64,
    /// Materialized children per infinite child list.
    pub fan: usize,
    /// Maximum vertices visited per evaluation pass.
    pub vertices: usize,
}

impl Default for Budget {
    fn default() -> Self {
        Budget { depth: 24, fan: 64, vertices: 400_000 }
    }
}

impl Budget {
    pub fn with_depth(depth: u64) -> Self {
        Budget { depth, ..Default::default() }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Status {
    Exact,
    LowerBound,
    CertifiedInfinite,
    Unknown,
}

impl std::fmt::Display for Status {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Status::Exact => "Exact",
            Status::LowerBound => "LowerBound",
            Status::CertifiedInfinite => "CertifiedInfinite",
            Status::Unknown => "Unknown",
        };
        f.write_str(s)
    }
}

/// An extended-nonnegative-real result with the truncation evidence that
/// produced it. Evidence values are nondecreasing in the depth.
#[derive(Clone, Debug)]
pub struct BoundEstimate {
    pub value: f64,
    pub status: Status,
    /// (truncation depth m, value at that truncation)
    pub evidence: Vec<(u64, f64)>,
    pub tolerance: f64,
}

impl BoundEstimate {
    pub fn exact(value: f64, tolerance: f64) -> Self {
        let status = if value.is_infinite() { Status::CertifiedInfinite } else { Status::Exact };
        BoundEstimate { value, status, evidence: vec![(0, value)], tolerance }
    }

    /// Certified finite: Exact, or a numerically converged lower bound.
    pub fn is_finite_certified(&self) -> bool {
        matches!(self.status, Status::Exact | Status::LowerBound) && self.value.is_finite()
    }
}

/// Which rooted tree the engine runs on.
#[derive(Clone, Debug)]
pub enum ViewMode {
    /// `V(root)` inside the ambient tree.
    Subtree,
    /// `V_-^N(base)`: generations ≡ 0 mod N without the strict descendants
    /// of `base`, children rewired along the ancestor spine.
    Derived { base: VertexId, stride: u64 },
    /// `W = V(root) ∖ V(skip)`: the side tree of a branch step.
    Pruned { skip: VertexId },
}

/// A rooted tree view plus the space weight the constants are taken in.
pub struct CpProblem<'t> {
    pub tree: &'t Tree,
    pub weight: &'t WeightMap,
    pub root: VertexId,
    pub mode: ViewMode,
}

pub(crate) enum Kids {
    Leaf,
    Finite(Vec<VertexId>),
    /// Infinitely many children by rule.
    Fan { mu_index: ScalarRule, child: Arc<Shape>, gen: i64 },
    /// Infinite children without a usable rule under this weight map.
    Unresolved,
}

struct PassStats {
    cut: bool,
    unresolved: bool,
    visited: usize,
}

impl<'t> CpProblem<'t> {
    pub fn subtree(tree: &'t Tree, root: VertexId, weight: &'t WeightMap) -> Self {
        CpProblem { tree, weight, root, mode: ViewMode::Subtree }
    }

    pub fn derived(tree: &'t Tree, base: VertexId, stride: u64, weight: &'t WeightMap) -> Self {
        CpProblem { tree, weight, root: base, mode: ViewMode::Derived { base, stride } }
    }

    fn w(&self, v: VertexId) -> f64 {
        self.weight.value(self.tree, v).abs()
    }

    /// Is `v` the k-th derived-spine vertex (ambient `prt^{kN}(base)`)?
    pub(crate) fn derived_spine_index(&self, v: VertexId) -> Option<u64> {
        if let ViewMode::Derived { base, stride } = self.mode {
            let g = self.tree.gen(v);
            let gb = self.tree.gen(base);
            if g <= gb && (gb - g) % stride as i64 == 0 {
                let k = ((gb - g) / stride as i64) as u64;
                if self.tree.ancestor(base, k * stride) == Some(v) {
                    return Some(k);
                }
            }
        }
        None
    }

    pub(crate) fn kids(&self, v: VertexId, fan: usize) -> Kids {
        match &self.mode {
            ViewMode::Subtree | ViewMode::Pruned { .. } => {
                let ch = self.tree.children(v, fan);
                let mut list = match ch {
                    Children::Finite(c) => {
                        if c.is_empty() {
                            return Kids::Leaf;
                        }
                        c
                    }
                    Children::Infinite(_) => {
                        return match self.fan_rule(v) {
                            Some((mu_index, child)) => {
                                Kids::Fan { mu_index, child, gen: self.tree.gen(v) }
                            }
                            None => Kids::Unresolved,
                        }
                    }
                };
                if let ViewMode::Pruned { skip } = self.mode {
                    if v == self.root {
                        list.retain(|&u| u != skip);
                        if list.is_empty() {
                            return Kids::Leaf;
                        }
                    }
                }
                Kids::Finite(list)
            }
            ViewMode::Derived { base, stride } => {
                let n = *stride;
                if let Some(k) = self.derived_spine_index(v) {
                    // children: next spine vertex plus its N-descendants minus v
                    match self.tree.ancestor(*base, (k + 1) * n) {
                        None => Kids::Leaf, // rooted ambient: the spine ends at the root
                        Some(next) => {
                            let mut out = vec![next];
                            match self.n_descendants(next, n, fan) {
                                Some(desc) => {
                                    out.extend(desc.into_iter().filter(|&u| u != v));
                                    Kids::Finite(out)
                                }
                                None => Kids::Unresolved,
                            }
                        }
                    }
                } else {
                    match self.n_descendants(v, n, fan) {
                        Some(desc) => {
                            if desc.is_empty() {
                                Kids::Leaf
                            } else {
                                Kids::Finite(desc)
                            }
                        }
                        None => Kids::Unresolved,
                    }
                }
            }
        }
    }

    /// `Χ_V^N(v)` in breadth-first order; None when a fan intervenes.
    fn n_descendants(&self, v: VertexId, n: u64, fan: usize) -> Option<Vec<VertexId>> {
        let mut level = vec![v];
        for _ in 0..n {
            let mut next = Vec::new();
            for &u in &level {
                match self.tree.children(u, fan) {
                    Children::Finite(c) => next.extend(c),
                    Children::Infinite(_) => return None,
                }
            }
            level = next;
        }
        Some(level)
    }

    fn fan_rule(&self, v: VertexId) -> Option<(ScalarRule, Arc<Shape>)> {
        let shape = match self.tree.cont(v) {
            Cont::Explicit { idx } => self.tree.model().prefix[idx].attach.clone()?,
            Cont::InShape { shape, .. } => shape,
            Cont::Spine { .. } => return None,
        };
        if let Shape::Fan { mu_index, child, .. } = &*shape {
            let rule = self.index_weight_rule(mu_index)?;
            Some((rule, child.clone()))
        } else {
            None
        }
    }

    /// Fan index weights under the active weight map.
    fn index_weight_rule(&self, slot_rule: &ScalarRule) -> Option<ScalarRule> {
        match self.weight {
            WeightMap::Mu => Some(slot_rule.clone()),
            WeightMap::Unit => Some(ScalarRule::constant(1.0)),
            WeightMap::Scaled { inner, t } => match &**inner {
                WeightMap::Mu => Some(slot_rule.scaled(*t)),
                WeightMap::Unit => Some(ScalarRule::constant(*t)),
                _ => None,
            },
            _ => None,
        }
    }

    /// Certified `c_p` of the full subtree below `v` in this view, when the
    /// continuation and weight map admit a closed form.
    fn tail_c(&self, v: VertexId, p: Exponent) -> Option<f64> {
        let stride = match self.mode {
            ViewMode::Derived { stride, .. } => stride,
            _ => 1,
        };
        if let ViewMode::Pruned { skip } = self.mode {
            // pruning only alters the root's child list
            if v == self.root || skip == v {
                return None;
            }
        }
        if let Some(k) = self.derived_spine_index(v) {
            return self.derived_spine_tail(k, p);
        }
        match self.tree.cont(v) {
            Cont::Explicit { .. } | Cont::Spine { .. } => None,
            Cont::InShape { shape, depth } => {
                self.shape_tail(&shape, depth, self.tree.gen(v), Some(v), stride, p)
            }
        }
    }

    fn shape_tail(
        &self,
        shape: &Arc<Shape>,
        depth: u64,
        gen: i64,
        v: Option<VertexId>,
        stride: u64,
        p: Exponent,
    ) -> Option<f64> {
        match &**shape {
            Shape::Stop => Some(0.0),
            Shape::Branch { mu, lambda } => {
                let rule = self.weight_rule_below(mu, lambda, v, depth, gen, stride)?;
                Some(series_to_c(&rule, p)?)
            }
            Shape::Sym { gamma, gamma_left, gamma_by_gen, mu, lambda } => {
                let rule = self.weight_rule_below(mu, lambda, v, depth, gen, stride)?;
                let g = if *gamma_by_gen {
                    count_rule_from_gen(gamma, gamma_left.as_ref(), gen)?
                } else {
                    gamma.skip(depth)
                };
                let g = if stride == 1 {
                    g
                } else {
                    match g {
                        CountRule::Constant(c) => CountRule::Constant(c.checked_pow(stride.min(64) as u32)?),
                        _ => return None,
                    }
                };
                match p {
                    Exponent::Infinity => {
                        let amp = Amplitude::Value { rule, from: 0 };
                        match sym_cinf_sup(&g, 0, &amp) {
                            SeriesVerdict::Convergent(s) => Some(s),
                            SeriesVerdict::Divergent => Some(f64::INFINITY),
                            SeriesVerdict::Unknown(_) => None,
                        }
                    }
                    Exponent::One => {
                        // all branches of a symmetric leafless subtree carry
                        // the same sums
                        if !g.all_positive() {
                            return None;
                        }
                        series_to_c(&rule, Exponent::One)
                    }
                    Exponent::Finite(pv) => {
                        let amp = Amplitude::Value { rule, from: 0 };
                        match sym_cp_pow_series(&g, 0, &amp, pv) {
                            SeriesVerdict::Convergent(s) => Some(s.powf(1.0 / pv)),
                            SeriesVerdict::Divergent => Some(f64::INFINITY),
                            SeriesVerdict::Unknown(_) => None,
                        }
                    }
                }
            }
            Shape::Decorated { .. } | Shape::Fan { .. } => None,
        }
    }

    /// Weight values along the levels below a vertex (one value per level,
    /// level m ≥ 1 meaning m·stride steps down), when they follow a rule.
    fn weight_rule_below(
        &self,
        mu_expr: &WExpr,
        lambda_expr: &WExpr,
        v: Option<VertexId>,
        depth: u64,
        gen: i64,
        stride: u64,
    ) -> Option<ScalarRule> {
        match self.weight {
            WeightMap::Mu => wexpr_rule(mu_expr, depth, gen, stride),
            WeightMap::Lambda => wexpr_rule(lambda_expr, depth, gen, stride),
            WeightMap::Unit => Some(ScalarRule::constant(1.0)),
            WeightMap::Scaled { inner, t } => {
                let sub = CpProblem { tree: self.tree, weight: inner, root: self.root, mode: self.mode.clone() };
                Some(sub.weight_rule_below(mu_expr, lambda_expr, v, depth, gen, stride)?.scaled(*t))
            }
            WeightMap::Conjugate { .. } | WeightMap::InvPath { .. } => {
                // per-step factor 1/λ: closed form when λ is constant below v
                let lam = match lambda_expr {
                    WExpr::Const(c) => *c,
                    WExpr::ByGen(r2) => match (&r2.right, &r2.left) {
                        (ScalarRule::Constant(a), ScalarRule::Constant(b)) if a == b => *a,
                        _ => return None,
                    },
                    WExpr::ByDepth(ScalarRule::Constant(c)) => *c,
                    _ => return None,
                };
                let here = self.weight.value(self.tree, v?).abs();
                let step = lam.abs().powi(stride as i32).recip();
                Some(ScalarRule::Geometric { a: here, r: step })
            }
            WeightMap::Bergman { .. } => None,
        }
    }

    /// Tail below the k-th derived-spine vertex: the rest of the spine.
    fn derived_spine_tail(&self, k: u64, p: Exponent) -> Option<f64> {
        let (base, stride) = match self.mode {
            ViewMode::Derived { base, stride } => (base, stride),
            _ => unreachable!(),
        };
        if self.tree.is_rooted() {
            return None; // finite spine, plain expansion terminates
        }
        let spec = self.tree.model().spine.as_ref()?;
        if !matches!(spec.extra, CountRule::Constant(0)) {
            // homogeneous symmetric trees: every derived subtree is symmetric
            return self.homogeneous_tail(p, stride);
        }
        // pure branch up the ancestors: weights at generations
        // gen(base) − (k+m)·stride, m ≥ 1
        let rule2 = self.weight.gen_rule(self.tree)?;
        let g0 = self.tree.gen(base) - (k * stride) as i64;
        let rule = gen_rule_downward(&rule2, g0, stride);
        series_to_c(&rule, p)
    }

    /// For homogeneous symmetric unrooted trees every derived subtree is a
    /// symmetric tree with child count γ^N and the same constant weight.
    fn homogeneous_tail(&self, p: Exponent, stride: u64) -> Option<f64> {
        let sym = self.tree.model().symmetric.as_ref()?;
        let gamma = match (&sym.gamma, &sym.gamma_left) {
            (CountRule::Constant(c), Some(CountRule::Constant(d))) if c == d => *c,
            _ => return None,
        };
        let w = match self.weight.gen_rule(self.tree)? {
            ScalarRule2 { right: ScalarRule::Constant(a), left: ScalarRule::Constant(b) } if a == b => a.abs(),
            _ => return None,
        };
        let g = gamma.checked_pow(stride.min(64) as u32)? as f64;
        Some(match p {
            Exponent::One => {
                if w == 0.0 {
                    0.0
                } else {
                    f64::INFINITY
                }
            }
            Exponent::Finite(pv) => {
                // c^p = Σ_{n≥1} w^p / g^{n(p−1)}
                let q = g.powf(-(pv - 1.0));
                if q < 1.0 {
                    (w.powf(pv) * q / (1.0 - q)).powf(1.0 / pv)
                } else {
                    f64::INFINITY
                }
            }
            Exponent::Infinity => w / g,
        })
    }
}

/// `(Σ_{m≥1} |rule(m)|^p)^{1/p}` (or the sup for p = ∞) as a c-value.
fn series_to_c(rule: &ScalarRule, p: Exponent) -> Option<f64> {
    match p {
        Exponent::Infinity => match scalar_sup(rule, 1) {
            SeriesVerdict::Convergent(s) => Some(s),
            SeriesVerdict::Divergent => Some(f64::INFINITY),
            SeriesVerdict::Unknown(_) => None,
        },
        _ => match scalar_pow_sum(rule, p.value(), 1) {
            SeriesVerdict::Convergent(s) => Some(s.powf(1.0 / p.value())),
            SeriesVerdict::Divergent => Some(f64::INFINITY),
            SeriesVerdict::Unknown(_) => None,
        },
    }
}

fn wexpr_rule(expr: &WExpr, depth: u64, gen: i64, stride: u64) -> Option<ScalarRule> {
    match expr {
        WExpr::Const(c) => Some(ScalarRule::constant(*c)),
        WExpr::ByDepth(r) => Some(r.subsample(depth, stride)),
        WExpr::ByGen(r2) => Some(gen_rule_upward(r2, gen, stride)),
    }
}

/// Values of a two-sided rule at generations `g + m·stride`, `m ≥ 0`.
fn gen_rule_upward(r2: &ScalarRule2, g: i64, stride: u64) -> ScalarRule {
    if g >= 0 {
        return r2.right.subsample(g as u64, stride);
    }
    // explicit head until the generation crosses zero
    let mut head = Vec::new();
    let mut cur = g;
    while cur < 0 {
        head.push(r2.value(cur));
        cur += stride as i64;
    }
    ScalarRule::Table { head, tail: Box::new(r2.right.subsample(cur as u64, stride)) }
}

/// Values of a two-sided rule at generations `g − m·stride`, `m ≥ 0`.
fn gen_rule_downward(r2: &ScalarRule2, g: i64, stride: u64) -> ScalarRule {
    if g <= 0 {
        return r2.left.subsample((-g) as u64, stride);
    }
    let mut head = Vec::new();
    let mut cur = g;
    while cur > 0 {
        head.push(r2.value(cur));
        cur -= stride as i64;
    }
    ScalarRule::Table { head, tail: Box::new(r2.left.subsample((-cur) as u64, stride)) }
}

/// Children counts by generation from `g` on, as a one-sided rule.
fn count_rule_from_gen(gamma: &CountRule, gamma_left: Option<&CountRule>, g: i64) -> Option<CountRule> {
    if g >= 0 {
        return Some(gamma.skip(g as u64));
    }
    let left = gamma_left?;
    let mut head = Vec::new();
    let mut cur = g;
    while cur < 0 {
        head.push(left.value((-cur) as u64));
        cur += 1;
    }
    Some(CountRule::Table { head, tail: Box::new(gamma.clone()) })
}

/// Geometric truncation schedule 1, 2, 4, …, capped at `depth`.
fn schedule(depth: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut m = 1;
    while m < depth {
        out.push(m);
        m *= 2;
    }
    out.push(depth.max(1));
    out
}

/// `c_p(V, μ)` on a rooted view, any `1 ≤ p ≤ ∞`.
pub fn continued_fraction_on(problem: &CpProblem, p: Exponent, budget: Budget, tol: f64) -> BoundEstimate {
    match p {
        Exponent::One => c1_with_witness(problem, budget).estimate,
        _ => cp_backward(problem, p, budget, tol),
    }
}

/// `c_p(V(root), μ)` in the ambient tree.
pub fn continued_fraction(
    tree: &Tree,
    root: VertexId,
    mu: &WeightMap,
    p: Exponent,
    budget: Budget,
    tol: f64,
) -> BoundEstimate {
    continued_fraction_on(&CpProblem::subtree(tree, root, mu), p, budget, tol)
}

/// `r_p(V(root), μ)`: `r_p^p = |μ_root|^p + c_p^p`, `r_∞ = max(|μ_root|, c_∞)`.
pub fn resistance(
    tree: &Tree,
    root: VertexId,
    mu: &WeightMap,
    p: Exponent,
    budget: Budget,
    tol: f64,
) -> BoundEstimate {
    resistance_on(&CpProblem::subtree(tree, root, mu), p, budget, tol)
}

pub fn resistance_on(problem: &CpProblem, p: Exponent, budget: Budget, tol: f64) -> BoundEstimate {
    let c = continued_fraction_on(problem, p, budget, tol);
    combine_resistance(problem.w(problem.root), c, p)
}

pub fn combine_resistance(w_root: f64, c: BoundEstimate, p: Exponent) -> BoundEstimate {
    let combine = |cv: f64| -> f64 {
        match p {
            Exponent::Infinity => w_root.max(cv),
            Exponent::One => w_root + cv,
            Exponent::Finite(pv) => (w_root.powf(pv) + cv.powf(pv)).powf(1.0 / pv),
        }
    };
    BoundEstimate {
        value: combine(c.value),
        status: c.status,
        evidence: c.evidence.iter().map(|&(m, v)| (m, combine(v))).collect(),
        tolerance: c.tolerance,
    }
}

/// Backward pass for `1 < p ≤ ∞`.
fn cp_backward(problem: &CpProblem, p: Exponent, budget: Budget, tol: f64) -> BoundEstimate {
    let mut evidence: Vec<(u64, f64)> = Vec::new();
    let mut prev: Option<f64> = None;
    let mut last_unresolved = false;
    for m in schedule(budget.depth) {
        let mut stats = PassStats { cut: false, unresolved: false, visited: 0 };
        let c = eval_c(problem, problem.root, m, p, budget, &mut stats);
        evidence.push((m, c));
        last_unresolved = stats.unresolved;
        if c.is_infinite() {
            // truncations are lower bounds, so an infinite one certifies ∞
            return BoundEstimate { value: c, status: Status::CertifiedInfinite, evidence, tolerance: tol };
        }
        if !stats.cut && !stats.unresolved {
            return BoundEstimate { value: c, status: Status::Exact, evidence, tolerance: tol };
        }
        if let Some(pv) = prev {
            if !stats.unresolved && (c - pv).abs() <= tol {
                return BoundEstimate { value: c, status: Status::LowerBound, evidence, tolerance: tol };
            }
        }
        prev = Some(c);
    }
    let status = if last_unresolved { Status::Unknown } else { Status::LowerBound };
    let value = evidence.last().map(|e| e.1).unwrap_or(0.0);
    BoundEstimate { value, status, evidence, tolerance: tol }
}

/// `c_p` of the view truncated at depth `m`, with exact tail certificates at
/// the frontier where available.
fn eval_c(problem: &CpProblem, root: VertexId, m: u64, p: Exponent, budget: Budget, stats: &mut PassStats) -> f64 {
    match problem.kids(root, budget.fan) {
        Kids::Leaf => 0.0,
        Kids::Unresolved => {
            stats.unresolved = true;
            0.0
        }
        Kids::Finite(kids) => {
            let s: f64 = kids
                .iter()
                .map(|&u| inv_pow(eval_r(problem, u, m.saturating_sub(1), p, budget, stats), p))
                .sum();
            finish_c(s, p)
        }
        Kids::Fan { mu_index, child, gen } => fan_c(problem, &mu_index, &child, gen, p, stats),
    }
}

/// `R(v) = r_p(V_view(v))^p` for finite p, `r_∞(V_view(v))` for p = ∞.
fn eval_r(problem: &CpProblem, v: VertexId, depth_left: u64, p: Exponent, budget: Budget, stats: &mut PassStats) -> f64 {
    stats.visited += 1;
    let w = problem.w(v);
    let wp = match p {
        Exponent::Infinity => w,
        _ => w.powf(p.value()),
    };
    if let Some(tc) = problem.tail_c(v, p) {
        return match p {
            Exponent::Infinity => w.max(tc),
            _ => wp + tc.powf(p.value()),
        };
    }
    if depth_left == 0 || stats.visited > budget.vertices {
        match problem.kids(v, budget.fan) {
            Kids::Leaf => {}
            _ => stats.cut = true,
        }
        return wp;
    }
    let inner = match problem.kids(v, budget.fan) {
        Kids::Leaf => 0.0,
        Kids::Unresolved => {
            stats.unresolved = true;
            0.0
        }
        Kids::Finite(kids) => {
            let s: f64 = kids
                .iter()
                .map(|&u| inv_pow(eval_r(problem, u, depth_left - 1, p, budget, stats), p))
                .sum();
            finish_c(s, p)
        }
        Kids::Fan { mu_index, child, gen } => fan_c(problem, &mu_index, &child, gen, p, stats),
    };
    match p {
        Exponent::Infinity => w.max(inner),
        _ => wp + inner.powf(p.value()),
    }
}

/// Summand `R ↦ R^{-p*/p}` (finite p) or `R ↦ 1/R` (p = ∞).
fn inv_pow(r: f64, p: Exponent) -> f64 {
    if r == 0.0 {
        return f64::INFINITY;
    }
    match p {
        Exponent::Infinity => 1.0 / r,
        Exponent::Finite(pv) => r.powf(-1.0 / (pv - 1.0)),
        Exponent::One => unreachable!("p = 1 uses the branch search"),
    }
}

/// The child sum `s` turned into the inner c-value `s^{-1/p*}`, with the
/// extended conventions `0^{-1} = ∞` and `∞^{-1} = 0`.
fn finish_c(s: f64, p: Exponent) -> f64 {
    if s == 0.0 {
        return f64::INFINITY;
    }
    if s.is_infinite() {
        return 0.0;
    }
    match p {
        Exponent::Infinity => 1.0 / s,
        Exponent::Finite(pv) => s.powf(-(pv - 1.0) / pv),
        Exponent::One => unreachable!(),
    }
}

/// Inner expression at a vertex with infinitely many children. A divergent
/// child series forces the quotient to 0 at every truncation; when the
/// series converges, dominated convergence justifies exact subtree tails.
fn fan_c(
    problem: &CpProblem,
    mu_index: &ScalarRule,
    child: &Arc<Shape>,
    gen: i64,
    p: Exponent,
    stats: &mut PassStats,
) -> f64 {
    let pstar = p.conjugate().value();
    let cont = scalar_pow_sum(mu_index, -pstar, 1);
    match cont {
        SeriesVerdict::Divergent => 0.0,
        SeriesVerdict::Unknown(_) => {
            stats.unresolved = true;
            0.0
        }
        SeriesVerdict::Convergent(s0) => {
            // the subtree below each fan child is index-independent
            let c_sub = match problem.shape_tail(child, 0, gen + 1, None, 1, p) {
                Some(c) => c,
                None => {
                    stats.unresolved = true;
                    return 0.0;
                }
            };
            if c_sub == 0.0 {
                return finish_c(s0, p);
            }
            if c_sub.is_infinite() {
                // each truncated child still has finite resistance, and the
                // index sums keep diverging, so the expression stays 0
                return 0.0;
            }
            // Σ_i (|μ_i|^p + c_sub^p)^{-p*/p}, bracketed by the continuity series
            let mut s = 0.0;
            let mut tail_bound = s0;
            let mut i = 1u64;
            loop {
                let wi = mu_index.value(i).abs();
                let term = match p {
                    Exponent::Infinity => 1.0 / wi.max(c_sub),
                    _ => (wi.powf(p.value()) + c_sub.powf(p.value())).powf(-pstar / p.value()),
                };
                s += term;
                tail_bound -= wi.powf(-pstar);
                if tail_bound.max(0.0) <= 1e-14 * s.max(1e-300) || i > 100_000 {
                    break;
                }
                i += 1;
            }
            finish_c(s + tail_bound.max(0.0) * 0.5, p)
        }
    }
}

/// Result of the p = 1 best-first branch search.
pub struct C1Result {
    pub estimate: BoundEstimate,
    pub witness: Option<C1Witness>,
}

/// Cheapest known branch: explicit path from the root (exclusive) up to the
/// vertex where a closed-form tail (or a leaf) completed it.
#[derive(Clone, Debug)]
pub struct C1Witness {
    pub path: Vec<VertexId>,
    pub total: f64,
    /// Sum carried by the closed-form tail after the last path vertex.
    pub tail_sum: f64,
    /// True when a branch attains the value (leaf end or exact branch tail);
    /// false for an ε-minimizer (infimum possibly unattained).
    pub attained: bool,
}

struct HeapItem {
    key: f64,
    seq: u64,
    v: VertexId,
    path: Vec<VertexId>,
}

impl PartialEq for HeapItem {
    fn eq(&self, other: &Self) -> bool {
        self.key == other.key && self.seq == other.seq
    }
}
impl Eq for HeapItem {}
impl PartialOrd for HeapItem {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for HeapItem {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        // min-heap via reversal; deterministic tiebreak on insertion order
        other.key.total_cmp(&self.key).then_with(|| other.seq.cmp(&self.seq))
    }
}

/// `c_1(V, μ) = inf over branches of Σ_{n≥1} |μ_{v_n}|` by best-first search
/// with monotone lower bounds and closed-form branch tails.
pub fn c1_with_witness(problem: &CpProblem, budget: Budget) -> C1Result {
    let mut heap = std::collections::BinaryHeap::new();
    let mut seq = 0u64;
    heap.push(HeapItem { key: 0.0, seq, v: problem.root, path: vec![] });
    let mut best: Option<C1Witness> = None;
    let mut evidence: Vec<(u64, f64)> = Vec::new();
    let mut pops = 0usize;
    let mut deepest = 0u64;
    let mut any_unresolved = false;

    while let Some(item) = heap.pop() {
        pops += 1;
        deepest = deepest.max(item.path.len() as u64);
        if let Some(b) = &best {
            if item.key >= b.total {
                // every remaining branch is at least as expensive
                let est = BoundEstimate {
                    value: b.total,
                    status: Status::Exact,
                    evidence: push_ev(evidence, deepest, b.total),
                    tolerance: 0.0,
                };
                return C1Result { estimate: est, witness: best };
            }
        }
        if pops > budget.vertices {
            heap.push(item);
            break;
        }
        if let Some(tail) = problem.tail_min_branch(item.v) {
            match tail {
                Some((tsum, attained)) => {
                    let total = item.key + tsum;
                    if best.as_ref().map_or(true, |b| total < b.total) {
                        best = Some(C1Witness { path: item.path.clone(), total, tail_sum: tsum, attained });
                    }
                }
                None => {} // certified infinite below: dead end
            }
            continue;
        }
        match problem.kids(item.v, budget.fan) {
            Kids::Leaf => {
                let total = item.key;
                if best.as_ref().map_or(true, |b| total < b.total) {
                    best = Some(C1Witness { path: item.path.clone(), total, tail_sum: 0.0, attained: true });
                }
            }
            Kids::Unresolved => {
                any_unresolved = true;
            }
            Kids::Fan { mu_index, child, gen } => {
                // the infimum over fan children, possibly unattained
                let inf_idx = scalar_inf(&mu_index, 1);
                match problem.tail_min_branch_shape(&child, 0, gen + 1, None) {
                    Some(Some((tsum, _))) => {
                        let total = item.key + inf_idx + tsum;
                        if best.as_ref().map_or(true, |b| total < b.total) {
                            best = Some(C1Witness {
                                path: item.path.clone(),
                                total,
                                tail_sum: inf_idx + tsum,
                                attained: false,
                            });
                        }
                    }
                    Some(None) => {}
                    None => any_unresolved = true,
                }
            }
            Kids::Finite(kids) => {
                for u in kids {
                    seq += 1;
                    let mut path = item.path.clone();
                    path.push(u);
                    heap.push(HeapItem { key: item.key + problem.w(u), seq, v: u, path });
                }
            }
        }
        if pops % 64 == 0 {
            evidence.push((deepest, frontier_lower(&heap, &best)));
        }
    }

    if heap.is_empty() && !any_unresolved {
        return match best {
            Some(b) => {
                let est = BoundEstimate {
                    value: b.total,
                    status: Status::Exact,
                    evidence: push_ev(evidence, deepest, b.total),
                    tolerance: 0.0,
                };
                C1Result { estimate: est, witness: Some(b) }
            }
            None => {
                let est = BoundEstimate {
                    value: f64::INFINITY,
                    status: Status::CertifiedInfinite,
                    evidence,
                    tolerance: 0.0,
                };
                C1Result { estimate: est, witness: None }
            }
        };
    }
    let lower = frontier_lower(&heap, &best);
    let status = if any_unresolved { Status::Unknown } else { Status::LowerBound };
    let est = BoundEstimate { value: lower, status, evidence: push_ev(evidence, deepest, lower), tolerance: 0.0 };
    C1Result { estimate: est, witness: best }
}

/// Greedily walks the cheapest branch below `from` for up to `steps`
/// vertices, scoring each child by its weight plus its closed-form
/// minimal-branch tail. Stops when no child is resolvable.
pub(crate) fn extend_best_branch(problem: &CpProblem, from: VertexId, steps: u64, fan: usize) -> Vec<VertexId> {
    let mut out = Vec::new();
    let mut cur = from;
    for _ in 0..steps {
        let kids = match problem.kids(cur, fan) {
            Kids::Finite(k) => k,
            _ => break,
        };
        let mut best: Option<(f64, VertexId)> = None;
        for u in kids {
            let tail = match problem.tail_min_branch(u) {
                Some(Some((t, _))) => t,
                Some(None) => f64::INFINITY,
                None => {
                    // unresolvable child: only safe if it is a leaf
                    if matches!(problem.kids(u, fan), Kids::Leaf) {
                        0.0
                    } else {
                        continue;
                    }
                }
            };
            let score = problem.w(u) + tail;
            if best.map_or(true, |(b, _)| score < b) {
                best = Some((score, u));
            }
        }
        match best {
            Some((_, u)) => {
                out.push(u);
                cur = u;
            }
            None => break,
        }
    }
    out
}

fn frontier_lower(heap: &std::collections::BinaryHeap<HeapItem>, best: &Option<C1Witness>) -> f64 {
    let fmin = heap.iter().map(|i| i.key).fold(f64::INFINITY, f64::min);
    match best {
        Some(b) => b.total.min(fmin),
        None => fmin,
    }
}

fn push_ev(mut ev: Vec<(u64, f64)>, depth: u64, value: f64) -> Vec<(u64, f64)> {
    if ev.last().map_or(true, |l| l.1 <= value) {
        ev.push((depth, value));
    }
    ev
}

impl<'t> CpProblem<'t> {
    /// Cheapest-branch sum below `v` in closed form: `Some(Some((sum,
    /// attained)))` for a finite value, `Some(None)` when certified infinite,
    /// `None` when no closed form applies and the search must expand.
    #[allow(clippy::option_option)]
    fn tail_min_branch(&self, v: VertexId) -> Option<Option<(f64, bool)>> {
        if let ViewMode::Pruned { skip } = self.mode {
            if v == self.root || v == skip {
                return None;
            }
        }
        if self.derived_spine_index(v).is_some() {
            return None; // walk the spine explicitly
        }
        let stride = match self.mode {
            ViewMode::Derived { stride, .. } => stride,
            _ => 1,
        };
        match self.tree.cont(v) {
            Cont::Explicit { .. } | Cont::Spine { .. } => None,
            Cont::InShape { shape, depth } => {
                self.tail_min_branch_shape_strided(&shape, depth, self.tree.gen(v), Some(v), stride)
            }
        }
    }

    #[allow(clippy::option_option)]
    pub(crate) fn tail_min_branch_shape(
        &self,
        shape: &Arc<Shape>,
        depth: u64,
        gen: i64,
        v: Option<VertexId>,
    ) -> Option<Option<(f64, bool)>> {
        self.tail_min_branch_shape_strided(shape, depth, gen, v, 1)
    }

    #[allow(clippy::option_option)]
    fn tail_min_branch_shape_strided(
        &self,
        shape: &Arc<Shape>,
        depth: u64,
        gen: i64,
        v: Option<VertexId>,
        stride: u64,
    ) -> Option<Option<(f64, bool)>> {
        match &**shape {
            Shape::Stop => Some(Some((0.0, true))),
            Shape::Branch { mu, lambda } => {
                let rule = self.weight_rule_below(mu, lambda, v, depth, gen, stride)?;
                Some(sum_or_infinite(&rule)?)
            }
            Shape::Sym { gamma, gamma_left, gamma_by_gen, mu, lambda } => {
                // leafless symmetric continuation: all branches carry equal sums
                let g = if *gamma_by_gen {
                    count_rule_from_gen(gamma, gamma_left.as_ref(), gen)?
                } else {
                    gamma.skip(depth)
                };
                if !g.all_positive() {
                    return None; // irregular leaf pattern: expand instead
                }
                let rule = self.weight_rule_below(mu, lambda, v, depth, gen, stride)?;
                Some(sum_or_infinite(&rule)?)
            }
            Shape::Decorated { spine_mu, spine_lambda, tooth, .. } => {
                if stride != 1 {
                    return None;
                }
                // best branch: follow the decorated spine k ≥ 0 steps, then
                // commit to a tooth (tooth sums include the first tooth vertex)
                let spine_rule = self.weight_rule_below(spine_mu, spine_lambda, v, depth, gen, 1)?;
                let gen_independent = tooth_gen_independent(self.weight, tooth);
                let mut prefix = 0.0;
                let mut best: Option<(f64, bool)> = None;
                for k in 0..512u64 {
                    match self.tail_min_branch_shape(tooth, 0, gen + k as i64, None)? {
                        Some((ts, att)) => {
                            let cand = prefix + ts;
                            if best.map_or(true, |b| cand < b.0) {
                                best = Some((cand, att));
                            }
                        }
                        None => {
                            if gen_independent && k == 0 {
                                // all teeth diverge: only the spine remains
                                return Some(sum_or_infinite(&spine_rule)?);
                            }
                        }
                    }
                    prefix += spine_rule.value(k + 1).abs();
                    if let Some(b) = best {
                        if prefix >= b.0 {
                            return Some(Some(b));
                        }
                    }
                }
                match (best, sum_or_infinite(&spine_rule)?) {
                    (Some(b), Some((s, att))) => Some(Some(if s < b.0 { (s, att) } else { b })),
                    (Some(b), None) => Some(Some(b)),
                    (None, spine) => {
                        if gen_independent {
                            Some(spine)
                        } else {
                            None
                        }
                    }
                }
            }
            Shape::Fan { .. } => None,
        }
    }
}

/// Branch sum `Σ_{m≥1}|rule(m)|` or certified divergence.
#[allow(clippy::option_option)]
fn sum_or_infinite(rule: &ScalarRule) -> Option<Option<(f64, bool)>> {
    match scalar_pow_sum(rule, 1.0, 1) {
        SeriesVerdict::Convergent(s) => Some(Some((s, true))),
        SeriesVerdict::Divergent => Some(None),
        SeriesVerdict::Unknown(_) => None,
    }
}

/// Tooth branch sums do not depend on the host generation when the weights
/// are depth-indexed under the active map.
fn tooth_gen_independent(weight: &WeightMap, tooth: &Arc<Shape>) -> bool {
    let expr = match (&**tooth, weight) {
        (_, WeightMap::Unit) => return true,
        (Shape::Branch { mu, .. } | Shape::Sym { mu, .. }, WeightMap::Mu) => mu,
        (Shape::Branch { lambda, .. } | Shape::Sym { lambda, .. }, WeightMap::Lambda) => lambda,
        (_, WeightMap::Scaled { inner, .. }) => return tooth_gen_independent(inner, tooth),
        _ => return false,
    };
    matches!(expr, WExpr::Const(_) | WExpr::ByDepth(_))
}

/// Even-numbered convergents `d_m` of the branch continued-fraction
/// expansion along `branch` (starting at the root), for `1 < p ≤ ∞`.
///
/// Side trees `W_n = V(v_n) ∖ V(v_{n+1})` enter through `c_p'`, where
/// `1/c_p'(W) = 0` for singleton `W`.
pub fn branch_expansion(
    tree: &Tree,
    mu: &WeightMap,
    p: Exponent,
    branch: &[VertexId],
    m_max: usize,
    budget: Budget,
    tol: f64,
) -> Vec<(usize, f64, Status)> {
    assert!(branch.len() >= 2, "need the root and at least one branch vertex");
    assert!(!matches!(p, Exponent::One), "branch expansion needs p > 1");
    let m_max = m_max.min(branch.len() - 1);
    // c_p'(W_n) for n < m_max; None encodes a singleton W_n
    let mut cprime: Vec<Option<(f64, Status)>> = Vec::new();
    for n in 0..m_max {
        let v = branch[n];
        let next = branch[n + 1];
        let kids = tree.children(v, budget.fan);
        let singleton = matches!(&kids, Children::Finite(c) if c.len() == 1 && c[0] == next);
        if singleton {
            cprime.push(None);
        } else {
            let prob = CpProblem { tree, weight: mu, root: v, mode: ViewMode::Pruned { skip: next } };
            let est = continued_fraction_on(&prob, p, budget, tol);
            cprime.push(Some((est.value, est.status)));
        }
    }
    let pv = p.value();
    let pstar = p.conjugate().value();
    let is_inf = matches!(p, Exponent::Infinity);
    let mut out = Vec::new();
    for m in 1..=m_max {
        let mut status = Status::Exact;
        let inv_cprime = |n: usize, status: &mut Status| -> f64 {
            match &cprime[n] {
                None => 0.0,
                Some((c, st)) => {
                    if !matches!(st, Status::Exact | Status::CertifiedInfinite) {
                        *status = Status::LowerBound;
                    }
                    if *c == 0.0 {
                        f64::INFINITY
                    } else if c.is_infinite() {
                        0.0
                    } else if is_inf {
                        1.0 / c
                    } else {
                        c.powf(-pstar)
                    }
                }
            }
        };
        // innermost: A_{m-1} = 1/c'(W_{m-1})^{p*} + 1/|μ_{v_m}|^{p*}
        let wm = mu.value(tree, branch[m]).abs();
        let mut a = inv_cprime(m - 1, &mut status) + if is_inf { 1.0 / wm } else { wm.powf(-pstar) };
        for j in (0..m.saturating_sub(1)).rev() {
            // Y_{j+1} = |μ_{v_{j+1}}|^p + A_{j+1}^{-p/p*}
            let wj = mu.value(tree, branch[j + 1]).abs();
            let y = if is_inf {
                wj.max(if a == 0.0 { f64::INFINITY } else { 1.0 / a })
            } else {
                wj.powf(pv) + if a == 0.0 { f64::INFINITY } else { a.powf(-(pv - 1.0)) }
            };
            // A_j = 1/c'(W_j)^{p*} + 1/Y_{j+1}^{p*/p}
            let inv_y = if y.is_infinite() {
                0.0
            } else if is_inf {
                1.0 / y
            } else {
                y.powf(-pstar / pv)
            };
            a = inv_cprime(j, &mut status) + inv_y;
        }
        let d = if a == 0.0 {
            f64::INFINITY
        } else if is_inf {
            1.0 / a
        } else {
            a.powf(-1.0 / pstar)
        };
        out.push((m, d, status));
    }
    out
}

/// Shared per-vertex resistance oracle used by the flow formulas.
pub struct ResistanceOracle<'t> {
    pub tree: &'t Tree,
    pub weight: &'t WeightMap,
    pub p: Exponent,
    pub budget: Budget,
    pub tol: f64,
    mode: ViewMode,
    cache: std::cell::RefCell<BTreeMap<VertexId, BoundEstimate>>,
}

impl<'t> ResistanceOracle<'t> {
    pub fn new(tree: &'t Tree, weight: &'t WeightMap, p: Exponent, budget: Budget, tol: f64) -> Self {
        ResistanceOracle { tree, weight, p, budget, tol, mode: ViewMode::Subtree, cache: Default::default() }
    }

    pub fn derived(
        tree: &'t Tree,
        base: VertexId,
        stride: u64,
        weight: &'t WeightMap,
        p: Exponent,
        budget: Budget,
        tol: f64,
    ) -> Self {
        ResistanceOracle {
            tree,
            weight,
            p,
            budget,
            tol,
            mode: ViewMode::Derived { base, stride },
            cache: Default::default(),
        }
    }

    pub fn r(&self, v: VertexId) -> BoundEstimate {
        if let Some(hit) = self.cache.borrow().get(&v) {
            return hit.clone();
        }
        let prob = CpProblem { tree: self.tree, weight: self.weight, root: v, mode: self.mode.clone() };
        let est = resistance_on(&prob, self.p, self.budget, self.tol);
        self.cache.borrow_mut().insert(v, est.clone());
        est
    }

    pub fn view_mode(&self) -> ViewMode {
        self.mode.clone()
    }

    pub(crate) fn kids(&self, v: VertexId) -> Kids {
        let prob = CpProblem { tree: self.tree, weight: self.weight, root: v, mode: self.mode.clone() };
        prob.kids(v, self.budget.fan)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tree::{Model, Shape};
    use std::sync::Arc;

    fn sym_tree(gamma: u64) -> Tree {
        let shape = Arc::new(Shape::Sym {
            gamma: CountRule::constant(gamma),
            gamma_left: None,
            gamma_by_gen: false,
            mu: WExpr::Const(1.0),
            lambda: WExpr::Const(1.0),
        });
        Tree::new(Model::single_root("v0", 1.0, 1.0, Some(shape)), true).unwrap()
    }

    #[test]
    fn binary_tree_c2_is_one() {
        // c_2 = 1: fixed point of x² = (1 + x²)/2
        let t = sym_tree(2);
        let est = continued_fraction(&t, t.anchor(), &WeightMap::Mu, Exponent::Finite(2.0), Budget::default(), 1e-9);
        assert_eq!(est.status, Status::Exact);
        assert!((est.value - 1.0).abs() < 1e-12, "{}", est.value);
        let r = resistance(&t, t.anchor(), &WeightMap::Mu, Exponent::Finite(2.0), Budget::default(), 1e-9);
        assert!((r.value - 2f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn single_branch_geometric() {
        // ℕ₀ with μ_n = 2^{-n}: c_2 = (Σ 4^{-n})^{1/2} = 3^{-1/2}
        let shape = Arc::new(Shape::Branch {
            mu: WExpr::ByDepth(ScalarRule::geometric(1.0, 0.5)),
            lambda: WExpr::Const(1.0),
        });
        let t = Tree::new(Model::single_root("0", 1.0, 1.0, Some(shape)), true).unwrap();
        let est = continued_fraction(&t, t.anchor(), &WeightMap::Mu, Exponent::Finite(2.0), Budget::default(), 1e-9);
        assert_eq!(est.status, Status::Exact);
        assert!((est.value - (1.0f64 / 3.0).sqrt()).abs() < 1e-14);
    }

    #[test]
    fn unit_branch_certified_infinite() {
        let shape = Arc::new(Shape::Branch { mu: WExpr::Const(1.0), lambda: WExpr::Const(1.0) });
        let t = Tree::new(Model::single_root("0", 1.0, 1.0, Some(shape)), true).unwrap();
        let est = continued_fraction(&t, t.anchor(), &WeightMap::Mu, Exponent::Finite(2.0), Budget::default(), 1e-9);
        assert_eq!(est.status, Status::CertifiedInfinite);
        assert!(est.value.is_infinite());
        // and for p = 1 via the branch search
        let est1 = continued_fraction(&t, t.anchor(), &WeightMap::Mu, Exponent::One, Budget::default(), 1e-9);
        assert_eq!(est1.status, Status::CertifiedInfinite);
    }

    #[test]
    fn golden_ratio_half_comb() {
        // half-comb with μ_{(n,k)} = 2^{-k/2}: spine subtrees satisfy
        // R = 1 + R/(1+R), so R = φ and r_2 = √φ, c_2 = √(φ−1)
        let s = 0.5f64.sqrt();
        let tooth = Arc::new(Shape::Branch {
            mu: WExpr::ByDepth(ScalarRule::geometric(1.0, s)),
            lambda: WExpr::Const(1.0),
        });
        let shape = Arc::new(Shape::Decorated {
            spine_mu: WExpr::Const(1.0),
            spine_lambda: WExpr::Const(1.0),
            teeth: 1,
            tooth,
        });
        let t = Tree::new(Model::single_root("v0", 1.0, 1.0, Some(shape)), true).unwrap();
        let phi = (1.0 + 5f64.sqrt()) / 2.0;
        let budget = Budget::with_depth(64);
        let c = continued_fraction(&t, t.anchor(), &WeightMap::Mu, Exponent::Finite(2.0), budget, 1e-12);
        let r = resistance(&t, t.anchor(), &WeightMap::Mu, Exponent::Finite(2.0), budget, 1e-12);
        assert!((r.value - phi.sqrt()).abs() < 1e-9, "r = {}", r.value);
        assert!((c.value - (phi - 1.0).sqrt()).abs() < 1e-9, "c = {}", c.value);
    }

    #[test]
    fn golden_comb_branch_expansion_fibonacci() {
        // d_m² are every other convergent of 1/φ: F_{2m}/F_{2m+1}
        let s = 0.5f64.sqrt();
        let tooth = Arc::new(Shape::Branch {
            mu: WExpr::ByDepth(ScalarRule::geometric(1.0, s)),
            lambda: WExpr::Const(1.0),
        });
        let shape = Arc::new(Shape::Decorated {
            spine_mu: WExpr::Const(1.0),
            spine_lambda: WExpr::Const(1.0),
            teeth: 1,
            tooth,
        });
        let t = Tree::new(Model::single_root("v0", 1.0, 1.0, Some(shape)), true).unwrap();
        // spine vertices: repeatedly take the first child
        let mut branch = vec![t.anchor()];
        for _ in 0..12 {
            let kids = t.children(*branch.last().unwrap(), 4);
            branch.push(kids.as_slice()[0]);
        }
        let out = branch_expansion(&t, &WeightMap::Mu, Exponent::Finite(2.0), &branch, 12, Budget::default(), 1e-10);
        let mut fib = vec![1u64, 1];
        for i in 2..32 {
            let v = fib[i - 1] + fib[i - 2];
            fib.push(v);
        }
        // F_1 = 1, F_2 = 1, F_3 = 2, …; d_m² = F_{2m}/F_{2m+1} (1/2, 3/5, 8/13, …)
        for &(m, d, status) in &out {
            let expect = fib[2 * m - 1] as f64 / fib[2 * m] as f64;
            assert!((d * d - expect).abs() < 1e-12, "m={m} d²={} expect={expect}", d * d);
            assert_eq!(status, Status::Exact);
        }
        // increasing toward c_2² = 1/φ
        for w in out.windows(2) {
            assert!(w[1].1 > w[0].1);
        }
    }

    #[test]
    fn evidence_monotone() {
        let t = sym_tree(3);
        let mu = WeightMap::Unit;
        let est = continued_fraction(&t, t.anchor(), &mu, Exponent::Finite(1.5), Budget::default(), 1e-12);
        for w in est.evidence.windows(2) {
            assert!(w[1].1 >= w[0].1 - 1e-12);
        }
    }
}
