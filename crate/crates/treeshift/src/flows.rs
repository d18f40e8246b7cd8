//! Backward-invariant sequences (flows) on rooted and unrooted trees:
//! minimal-energy unit flows by the explicit product formula, invariance
//! residuals, the flow-measure bridge, and unrooted assembly with the
//! sign decomposition.

use crate::constants::{
    c1_with_witness, combine_resistance, BoundEstimate, Budget, C1Witness, CpProblem,
    ResistanceOracle, Status, ViewMode,
};
use crate::exponent::Exponent;
use crate::tree::{Children, Tree, VertexId};
use crate::weights::WeightMap;
use std::cell::RefCell;
use std::collections::BTreeMap;

/// A sparse vertex→scalar map with backward-invariance semantics, lazily
/// extendable along its defining formula.
pub struct Flow<'t> {
    pub tree: &'t Tree,
    pub base: VertexId,
    pub base_value: f64,
    pub p: Exponent,
    pub status: Status,
    kind: FlowKind<'t>,
    values: RefCell<BTreeMap<VertexId, f64>>,
    /// Explicit flows: vertices outside the value map are zero (sparse
    /// vectors) or unknown (partial evaluations).
    outside_zero: bool,
    /// Certified total energy at a given exponent, when the construction
    /// provides one (assembled unrooted flows).
    energy_hint: Option<(f64, BoundEstimate)>,
    /// Declared lower bound c·n on generation-n ℓ¹ mass, for flows known
    /// to violate the measure condition by rule.
    pub declared_gen_growth: Option<f64>,
}

enum FlowKind<'t> {
    /// Values fixed up front.
    Explicit,
    /// Product formula driven by subtree resistances (1 < p ≤ ∞).
    Minimal { oracle: ResistanceOracle<'t> },
    /// Indicator of a branch (p = 1); extends greedily along its view.
    BranchIndicator { frontier: RefCell<VertexId>, epsilon: f64, weight: WeightMap, mode: ViewMode },
    /// Unrooted sign assembly: `plus` on V(base), `minus` on V_-(base).
    Assembled { plus: Box<Flow<'t>>, minus: Box<Flow<'t>> },
}

impl<'t> Flow<'t> {
    /// A finitely supported vector: zero outside the given values.
    pub fn explicit(tree: &'t Tree, base: VertexId, values: BTreeMap<VertexId, f64>, p: Exponent) -> Flow<'t> {
        let base_value = values.get(&base).copied().unwrap_or(0.0);
        Flow {
            tree,
            base,
            base_value,
            p,
            status: Status::Exact,
            kind: FlowKind::Explicit,
            values: RefCell::new(values),
            outside_zero: true,
            energy_hint: None,
            declared_gen_growth: None,
        }
    }

    /// A partial evaluation: values outside the map are unknown, so
    /// residual checks skip vertices that depend on them.
    pub fn explicit_partial(
        tree: &'t Tree,
        base: VertexId,
        values: BTreeMap<VertexId, f64>,
        p: Exponent,
    ) -> Flow<'t> {
        let mut f = Flow::explicit(tree, base, values, p);
        f.outside_zero = false;
        f
    }

    pub fn with_declared_growth(mut self, slope: f64) -> Self {
        self.declared_gen_growth = Some(slope);
        self
    }

    /// ε by which a p = 1 branch indicator may exceed the infimum.
    pub fn epsilon(&self) -> f64 {
        match &self.kind {
            FlowKind::BranchIndicator { epsilon, .. } => *epsilon,
            _ => 0.0,
        }
    }

    pub fn is_minimal_product(&self) -> bool {
        matches!(self.kind, FlowKind::Minimal { .. })
    }

    /// The flow value at `v`, evaluating the defining formula on demand.
    /// `None` when the value cannot be certified (Unknown resistances).
    pub fn value(&self, v: VertexId) -> Option<f64> {
        if let Some(&x) = self.values.borrow().get(&v) {
            return Some(x);
        }
        let computed = match &self.kind {
            FlowKind::Explicit => {
                if self.outside_zero {
                    Some(0.0)
                } else {
                    return None;
                }
            }
            FlowKind::Minimal { oracle } => self.minimal_value(oracle, v),
            FlowKind::BranchIndicator { .. } => Some(0.0), // extended eagerly
            FlowKind::Assembled { plus, minus } => {
                if self.in_forward_part(v) {
                    plus.value(v)
                } else {
                    let raw = minus.value(v)?;
                    // spine ancestors keep their sign, side subtrees flip
                    let d = self.tree.gen(self.base) - self.tree.gen(v);
                    let on_spine = d >= 0 && self.tree.ancestor(self.base, d as u64) == Some(v);
                    Some(if on_spine { raw } else { -raw })
                }
            }
        };
        if let Some(x) = computed {
            self.values.borrow_mut().insert(v, x);
        }
        computed
    }

    fn in_forward_part(&self, v: VertexId) -> bool {
        let d = self.tree.gen(v) - self.tree.gen(self.base);
        d >= 0 && self.tree.ancestor(v, d as u64) == Some(self.base)
    }

    fn minimal_value(&self, oracle: &ResistanceOracle<'t>, v: VertexId) -> Option<f64> {
        // f(v) = f(prt(v)) · r(V(v))^{-p*} / Σ_{u ∈ Χ(prt(v))} r(V(u))^{-p*}
        let parent = self.flow_parent(v)?;
        let fp = self.value(parent)?;
        if fp == 0.0 {
            return Some(0.0);
        }
        let rv = oracle.r(v);
        match rv.status {
            Status::CertifiedInfinite => return Some(0.0),
            Status::Unknown => return None,
            _ => {}
        }
        let pstar = self.p.conjugate().value();
        let num = rv.value.powf(-pstar);
        let mut den = 0.0;
        match oracle.kids(parent) {
            crate::constants::Kids::Finite(kids) => {
                for u in kids {
                    let ru = oracle.r(u);
                    match ru.status {
                        Status::CertifiedInfinite => {}
                        Status::Unknown => return None,
                        _ => den += ru.value.powf(-pstar),
                    }
                }
            }
            _ => return None,
        }
        if den == 0.0 {
            return Some(0.0);
        }
        Some(fp * num / den)
    }

    /// Parent within the flow's own tree view (derived views rewire the
    /// spine).
    fn flow_parent(&self, v: VertexId) -> Option<VertexId> {
        if v == self.base {
            return None;
        }
        match &self.kind {
            FlowKind::Minimal { oracle } => match oracle.view_mode() {
                ViewMode::Derived { base, stride } => {
                    let prob = CpProblem {
                        tree: self.tree,
                        weight: &WeightMap::Unit,
                        root: base,
                        mode: ViewMode::Derived { base, stride },
                    };
                    if let Some(k) = prob.derived_spine_index(v) {
                        debug_assert!(k >= 1);
                        return self.tree.ancestor(base, (k - 1) * stride);
                    }
                    // a non-spine vertex whose ambient N-ancestor sits on the
                    // spine hangs off the spine vertex one step down
                    let pn = self.tree.ancestor(v, stride)?;
                    match prob.derived_spine_index(pn) {
                        Some(k) if k >= 1 => self.tree.ancestor(base, (k - 1) * stride),
                        _ => Some(pn),
                    }
                }
                _ => self.tree.parent(v),
            },
            _ => self.tree.parent(v),
        }
    }

    fn view_mode(&self) -> ViewMode {
        match &self.kind {
            FlowKind::Minimal { oracle } => oracle.view_mode(),
            _ => ViewMode::Subtree,
        }
    }

    /// Materializes values on the flow's view down to `depth` below the base.
    pub fn extend_to_depth(&self, depth: u64, fan: usize) {
        match &self.kind {
            FlowKind::Assembled { plus, minus } => {
                plus.extend_to_depth(depth, fan);
                minus.extend_to_depth(depth, fan);
                let vs: Vec<VertexId> = plus
                    .materialized()
                    .into_iter()
                    .chain(minus.materialized())
                    .map(|(v, _)| v)
                    .collect();
                for v in vs {
                    self.value(v);
                }
            }
            FlowKind::BranchIndicator { frontier, weight, mode, .. } => {
                // continue the greedy minimal branch within the flow's view
                let cur = *frontier.borrow();
                let prob = CpProblem { tree: self.tree, weight, root: self.base, mode: mode.clone() };
                for u in crate::constants::extend_best_branch(&prob, cur, depth, fan) {
                    self.values.borrow_mut().insert(u, self.base_value);
                    *frontier.borrow_mut() = u;
                }
            }
            _ => {
                let mode = self.view_mode();
                let mut level = vec![self.base];
                self.value(self.base);
                for _ in 0..depth {
                    let mut next = Vec::new();
                    for &v in &level {
                        let prob = CpProblem {
                            tree: self.tree,
                            weight: &WeightMap::Unit,
                            root: self.base,
                            mode: mode.clone(),
                        };
                        if let crate::constants::Kids::Finite(kids) = prob.kids(v, fan) {
                            for u in kids {
                                self.value(u);
                                next.push(u);
                            }
                        }
                    }
                    if next.is_empty() {
                        break;
                    }
                    level = next;
                }
            }
        }
    }

    pub fn materialized(&self) -> Vec<(VertexId, f64)> {
        self.values.borrow().iter().map(|(&v, &x)| (v, x)).collect()
    }

    /// Serializes to the flow document format: one `value:` line per vertex.
    pub fn to_document(&self) -> String {
        let mut out = String::new();
        out.push_str("format_version: 1\n");
        out.push_str("kind: flow\n");
        out.push_str(&format!("p: {}\n", self.p));
        out.push_str(&format!("base: {}\n", self.tree.label(self.base)));
        out.push_str(&format!("status: {}\n", self.status));
        let mut entries: Vec<(String, f64)> = self
            .values
            .borrow()
            .iter()
            .map(|(&v, &x)| (self.tree.label(v), x))
            .collect();
        entries.sort_by(|a, b| a.0.cmp(&b.0));
        for (label, x) in entries {
            out.push_str(&format!("value: id={label} f={x:.17e}\n"));
        }
        out
    }
}

/// Energy report of a minimal flow construction.
pub struct MinimalFlow<'t> {
    pub flow: Flow<'t>,
    /// `(Σ_v |f(v)μ_v|^p)^{1/p} = r_p(V, μ)`.
    pub energy: BoundEstimate,
}

/// The unique (for 1 < p < ∞) backward-invariant unit sequence of minimal
/// norm on `V(root)`, by the explicit resistance product formula; for p = 1
/// a minimizing branch indicator (possibly an ε-minimizer); for p = ∞ one
/// canonical minimizer by the same product formula.
pub fn minimal_unit_flow<'t>(
    tree: &'t Tree,
    root: VertexId,
    mu: &'t WeightMap,
    p: Exponent,
    budget: Budget,
    tol: f64,
) -> MinimalFlow<'t> {
    minimal_flow_with_mode(tree, root, mu, p, budget, tol, ViewMode::Subtree)
}

/// Minimal flow on the derived tree `V_-^N(base)` (unweighted shift,
/// space weight μ).
pub fn minimal_unit_flow_derived<'t>(
    tree: &'t Tree,
    base: VertexId,
    stride: u64,
    mu: &'t WeightMap,
    p: Exponent,
    budget: Budget,
    tol: f64,
) -> MinimalFlow<'t> {
    minimal_flow_with_mode(tree, base, mu, p, budget, tol, ViewMode::Derived { base, stride })
}

fn minimal_flow_with_mode<'t>(
    tree: &'t Tree,
    root: VertexId,
    mu: &'t WeightMap,
    p: Exponent,
    budget: Budget,
    tol: f64,
    mode: ViewMode,
) -> MinimalFlow<'t> {
    match p {
        Exponent::One => {
            let prob = CpProblem { tree, weight: mu, root, mode };
            let res = c1_with_witness(&prob, budget);
            let energy = combine_resistance(mu.value(tree, root).abs(), res.estimate.clone(), p);
            let (mut values, mut frontier, eps, status) = match &res.witness {
                Some(w) => branch_indicator_values(root, w, res.estimate.value),
                None => (
                    BTreeMap::from([(root, 1.0)]),
                    root,
                    0.0,
                    if res.estimate.status == Status::CertifiedInfinite {
                        Status::CertifiedInfinite
                    } else {
                        Status::Unknown
                    },
                ),
            };
            // materialize the optimal branch through rule regions so that
            // residual checks and restrictions see the real indicator
            if status != Status::Unknown {
                for u in crate::constants::extend_best_branch(&prob, frontier, budget.depth.max(24) + 40, budget.fan) {
                    values.insert(u, 1.0);
                    frontier = u;
                }
            }
            let mode = prob.mode.clone();
            let flow = Flow {
                tree,
                base: root,
                base_value: 1.0,
                p,
                status,
                kind: FlowKind::BranchIndicator {
                    frontier: RefCell::new(frontier),
                    epsilon: eps,
                    weight: mu.clone(),
                    mode,
                },
                values: RefCell::new(values),
                outside_zero: true,
                energy_hint: None,
                declared_gen_growth: None,
            };
            MinimalFlow { flow, energy }
        }
        _ => {
            let oracle = match mode {
                ViewMode::Derived { base, stride } => {
                    ResistanceOracle::derived(tree, base, stride, mu, p, budget, tol)
                }
                _ => ResistanceOracle::new(tree, mu, p, budget, tol),
            };
            let energy = oracle.r(root);
            let status = match energy.status {
                Status::CertifiedInfinite => Status::CertifiedInfinite,
                Status::Unknown => Status::Unknown,
                s => s,
            };
            let flow = Flow {
                tree,
                base: root,
                base_value: 1.0,
                p,
                status,
                kind: FlowKind::Minimal { oracle },
                values: RefCell::new(BTreeMap::from([(root, 1.0)])),
                outside_zero: true,
                energy_hint: None,
                declared_gen_growth: None,
            };
            MinimalFlow { flow, energy }
        }
    }
}

fn branch_indicator_values(
    root: VertexId,
    w: &C1Witness,
    inf_value: f64,
) -> (BTreeMap<VertexId, f64>, VertexId, f64, Status) {
    let mut values = BTreeMap::from([(root, 1.0)]);
    let mut frontier = root;
    for &v in &w.path {
        values.insert(v, 1.0);
        frontier = v;
    }
    let eps = if w.attained { 0.0 } else { (w.total - inf_value).max(0.0) };
    (values, frontier, eps, Status::Exact)
}

/// Backward-invariance residual report.
#[derive(Debug, Clone)]
pub struct ResidualReport {
    pub max_residual: f64,
    pub checked: usize,
    /// Vertices skipped because their child series could not be resolved.
    pub skipped: usize,
}

/// `max_v |f(v) − Σ_{u∈Χ(v)} λ_u f(u)|` over evaluated non-leaf vertices of
/// the ambient tree; leaves are exempt by definition.
pub fn is_backward_invariant(flow: &Flow, lambda: &WeightMap, fan: usize) -> ResidualReport {
    let tree = flow.tree;
    let mut max_residual: f64 = 0.0;
    let mut checked = 0;
    let mut skipped = 0;
    for (v, fv) in flow.materialized() {
        if tree.is_leaf(v) {
            continue;
        }
        match tree.children(v, fan) {
            Children::Finite(kids) => {
                let mut s = 0.0;
                let mut ok = true;
                for u in kids {
                    match flow.value(u) {
                        Some(fu) => s += lambda.value(tree, u) * fu,
                        None => {
                            ok = false;
                            break;
                        }
                    }
                }
                if ok {
                    max_residual = max_residual.max((fv - s).abs());
                    checked += 1;
                } else {
                    skipped += 1;
                }
            }
            Children::Infinite(_) => skipped += 1,
        }
    }
    ResidualReport { max_residual, checked, skipped }
}

/// Residuals of a derived-view flow against the rewired children relation
/// of `V_-^N(base)` with a reweighting (`λ_-^N` or unit).
pub fn is_backward_invariant_derived(
    flow: &Flow,
    base: VertexId,
    stride: u64,
    lambda_minus: &dyn Fn(VertexId) -> f64,
    fan: usize,
) -> ResidualReport {
    let tree = flow.tree;
    let prob = CpProblem { tree, weight: &WeightMap::Unit, root: base, mode: ViewMode::Derived { base, stride } };
    let mut max_residual: f64 = 0.0;
    let mut checked = 0;
    let mut skipped = 0;
    for (v, fv) in flow.materialized() {
        match prob.kids(v, fan) {
            crate::constants::Kids::Leaf => {}
            crate::constants::Kids::Finite(kids) => {
                let mut s = 0.0;
                let mut ok = true;
                for u in kids {
                    match flow.value(u) {
                        Some(fu) => s += lambda_minus(u) * fu,
                        None => {
                            ok = false;
                            break;
                        }
                    }
                }
                if ok {
                    max_residual = max_residual.max((fv - s).abs());
                    checked += 1;
                } else {
                    skipped += 1;
                }
            }
            _ => skipped += 1,
        }
    }
    ResidualReport { max_residual, checked, skipped }
}

/// `Σ_v (|f(v)| w_v)^q` with monotone partial sums; exact via the flow's
/// construction when available, otherwise a lower bound from the
/// materialized region.
pub fn flow_energy(flow: &Flow, w: &WeightMap, q: Exponent, budget: Budget) -> BoundEstimate {
    flow.extend_to_depth(budget.depth, budget.fan);
    let tree = flow.tree;
    let mut partial = 0.0;
    for (v, fv) in flow.materialized() {
        partial += (fv.abs() * w.value(tree, v).abs()).powf(q.value());
    }
    if let Some((qe, hint)) = &flow.energy_hint {
        if (qe - q.value()).abs() < 1e-15 {
            return BoundEstimate {
                value: hint.value,
                status: hint.status,
                evidence: vec![(budget.depth, partial.min(hint.value)), (budget.depth, hint.value)],
                tolerance: hint.tolerance,
            };
        }
    }
    // minimal flows certify their own energy through the resistance
    match &flow.kind {
        FlowKind::Minimal { oracle } => {
            let r = oracle.r(flow.base);
            let total = r.value.powf(q.value());
            BoundEstimate {
                value: total,
                status: r.status,
                evidence: vec![(budget.depth, partial.min(total)), (budget.depth, total)],
                tolerance: r.tolerance,
            }
        }
        _ => BoundEstimate {
            value: partial,
            status: Status::LowerBound,
            evidence: vec![(budget.depth, partial)],
            tolerance: 0.0,
        },
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MeasureVerdict {
    MeasureInduced,
    NotMeasureInduced,
    Unknown,
}

/// Flow-measure bridge evidence.
#[derive(Debug, Clone)]
pub struct FlowMeasureReport {
    pub leaf_mass: f64,
    /// (generation, Σ_{v ∈ gen} |f(v)| over the evaluated part)
    pub generation_sums: Vec<(i64, f64)>,
    pub verdict: MeasureVerdict,
    pub certificate: String,
}

/// Is the flow induced by a Borel measure on the boundary? Requires finite
/// leaf ℓ¹ mass and bounded generation ℓ¹ sums; certificates come from the
/// flow's construction, numeric boundedness alone stays Unknown.
pub fn measure_induced_check(flow: &Flow, budget: Budget) -> FlowMeasureReport {
    flow.extend_to_depth(budget.depth, budget.fan);
    let tree = flow.tree;
    let mut by_gen: BTreeMap<i64, f64> = BTreeMap::new();
    let mut leaf_mass = 0.0;
    for (v, fv) in flow.materialized() {
        *by_gen.entry(tree.gen(v)).or_insert(0.0) += fv.abs();
        if tree.is_leaf(v) {
            leaf_mass += fv.abs();
        }
    }
    let generation_sums: Vec<(i64, f64)> = by_gen.into_iter().collect();
    if let Some(slope) = flow.declared_gen_growth {
        return FlowMeasureReport {
            leaf_mass,
            generation_sums,
            verdict: MeasureVerdict::NotMeasureInduced,
            certificate: format!("declared growth rule: generation l1 mass >= {slope}*n exceeds any bound"),
        };
    }
    let positive = flow.materialized().iter().all(|&(_, x)| x >= 0.0);
    match &flow.kind {
        FlowKind::Minimal { .. } | FlowKind::BranchIndicator { .. }
            if positive && tree.is_rooted() && flow.status != Status::Unknown =>
        {
            FlowMeasureReport {
                leaf_mass,
                generation_sums,
                verdict: MeasureVerdict::MeasureInduced,
                certificate: "positive unit flow on a rooted tree: generation sums equal the base value".into(),
            }
        }
        FlowKind::Assembled { plus, minus }
            if plus.status != Status::Unknown && minus.status != Status::Unknown =>
        {
            FlowMeasureReport {
                leaf_mass,
                generation_sums,
                verdict: MeasureVerdict::MeasureInduced,
                certificate: "difference of two positive measure-induced flows (sign decomposition)".into(),
            }
        }
        _ => FlowMeasureReport {
            leaf_mass,
            generation_sums,
            verdict: MeasureVerdict::Unknown,
            certificate: "numeric boundedness alone is inconclusive".into(),
        },
    }
}

/// Unrooted minimal-energy unit flow report.
pub struct UnrootedFlow<'t> {
    pub flow: Flow<'t>,
    /// `r_p(V(v0))^p + r_p(V_-(v0))^p − |μ_{v0}|^p`: the p-th power of the
    /// minimal energy.
    pub energy_pow_p: BoundEstimate,
    pub r_plus: BoundEstimate,
    pub r_minus: BoundEstimate,
    /// Flow value toward −∞ along the spine (= 1 + μ((∂T_{v0})^c)).
    pub limit_left: (f64, Status),
}

/// Assembles the minimal measure-induced unit flow on an unrooted tree (or
/// a rooted tree with a non-root basepoint) from the minimal flows on
/// `V(v0)` and `V_-(v0)`, un-flipping signs off the spine.
pub fn unrooted_unit_flow<'t>(
    tree: &'t Tree,
    v0: VertexId,
    mu: &'t WeightMap,
    p: Exponent,
    budget: Budget,
    tol: f64,
) -> UnrootedFlow<'t> {
    assert!(matches!(p, Exponent::Finite(_)), "unrooted minimal flows need 1 < p < infinity");
    let plus = minimal_unit_flow(tree, v0, mu, p, budget, tol);
    let minus = minimal_unit_flow_derived(tree, v0, 1, mu, p, budget, tol);
    let pv = p.value();
    let wp = mu.value(tree, v0).abs().powf(pv);
    let e_value = plus.energy.value.powf(pv) + minus.energy.value.powf(pv) - wp;
    let status = match (plus.energy.status, minus.energy.status) {
        (Status::Unknown, _) | (_, Status::Unknown) => Status::Unknown,
        (Status::CertifiedInfinite, _) | (_, Status::CertifiedInfinite) => Status::CertifiedInfinite,
        (Status::Exact, Status::Exact) => Status::Exact,
        _ => Status::LowerBound,
    };
    let energy_pow_p = BoundEstimate {
        value: e_value,
        status,
        evidence: vec![(budget.depth, e_value)],
        tolerance: tol,
    };
    // limit toward −∞: minimal flow values along the derived spine decrease
    let mut limit = (0.0, Status::Unknown);
    {
        let mut vals = Vec::new();
        for k in 0..budget.depth.min(48) {
            match tree.ancestor(v0, k) {
                Some(a) => match minus.flow.value(a) {
                    Some(x) => vals.push(x),
                    None => break,
                },
                None => {
                    // rooted ambient: the spine ends at the root
                    if let Some(&last) = vals.last() {
                        limit = (last, Status::Exact);
                    }
                    break;
                }
            }
        }
        if limit.1 == Status::Unknown && vals.len() >= 3 {
            let n = vals.len();
            let spread = (vals[n - 1] - vals[n - 3]).abs();
            limit = (vals[n - 1], if spread < tol { Status::Exact } else { Status::LowerBound });
        }
    }
    let flow = Flow {
        tree,
        base: v0,
        base_value: 1.0,
        p,
        status,
        kind: FlowKind::Assembled { plus: Box::new(plus.flow), minus: Box::new(minus.flow) },
        values: RefCell::new(BTreeMap::from([(v0, 1.0)])),
        outside_zero: true,
        energy_hint: Some((pv, energy_pow_p.clone())),
        declared_gen_growth: None,
    };
    UnrootedFlow { flow, energy_pow_p, r_plus: plus.energy, r_minus: minus.energy, limit_left: limit }
}

/// Cylinder mass of the boundary set `∂T_v`: the flow value at `v`.
pub fn boundary_mass(flow: &Flow, v: VertexId) -> Option<f64> {
    flow.value(v)
}

/// Monotone limit of the flow along a materialized branch.
pub fn branch_limit(flow: &Flow, branch: &[VertexId], tol: f64) -> (f64, Status) {
    let vals: Vec<f64> = branch.iter().filter_map(|&v| flow.value(v)).collect();
    if vals.len() < 3 {
        return (vals.last().copied().unwrap_or(0.0), Status::Unknown);
    }
    let n = vals.len();
    let spread = (vals[n - 1] - vals[n - 3]).abs();
    let last = vals[n - 1];
    if spread == 0.0 {
        (last, Status::Exact)
    } else if last.abs() < tol {
        (0.0, Status::Exact)
    } else if spread < tol {
        (last, Status::LowerBound)
    } else {
        (last, Status::Unknown)
    }
}

/// Off-base p-norm of the flow over the materialized region:
/// `(Σ_{v≠base} |f(v)μ_v|^p)^{1/p}`.
pub fn off_root_norm(flow: &Flow, mu: &WeightMap, p: Exponent, depth: u64, fan: usize) -> f64 {
    flow.extend_to_depth(depth, fan);
    let tree = flow.tree;
    match p {
        Exponent::Infinity => flow
            .materialized()
            .iter()
            .filter(|(v, _)| *v != flow.base)
            .map(|(v, x)| (x * mu.value(tree, *v)).abs())
            .fold(0.0, f64::max),
        _ => flow
            .materialized()
            .iter()
            .filter(|(v, _)| *v != flow.base)
            .map(|(v, x)| (x * mu.value(tree, *v)).abs().powf(p.value()))
            .sum::<f64>()
            .powf(1.0 / p.value()),
    }
}
