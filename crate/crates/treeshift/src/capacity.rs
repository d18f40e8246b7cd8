//! Boundary capacities and equilibrium flows: rooted trees, rooted trees
//! with a non-root basepoint, and unrooted trees with a basepoint.
//!
//! Capacity of order q pairs with resistance of order q*:
//! `cap_q(∂T, w) = r_{q*}(V, w)^{-q}` at the root, and with a basepoint
//! `cap_q(∂T, v0, w) = (r_{q*}(V(v0))^{q*} + r_{q*}(V_-(v0))^{q*} −
//! w_{v0}^{q*})^{-q/q*}`.

use crate::constants::{resistance, BoundEstimate, Budget, Status};
use crate::exponent::Exponent;
use crate::flows::{minimal_unit_flow, unrooted_unit_flow, Flow, MinimalFlow, UnrootedFlow};
use crate::tree::{Tree, VertexId};
use crate::weights::WeightMap;

pub struct CapacityReport<'t> {
    pub value: BoundEstimate,
    pub basepoint: VertexId,
    /// Capacity order q and the paired resistance order q*.
    pub q: f64,
    pub q_star: f64,
    pub r_forward: BoundEstimate,
    /// Resistance of the derived tree (equal to `r_forward` at the root).
    pub r_backward: Option<BoundEstimate>,
    pub equilibrium: Flow<'t>,
    /// Flow value toward −∞ (basepoint variants): `1 + μ((∂T_{v0})^c)`.
    pub limit_left: Option<(f64, Status)>,
}

fn cap_status(r: &BoundEstimate) -> Status {
    match r.status {
        Status::CertifiedInfinite => Status::Exact, // capacity exactly 0
        s => s,
    }
}

/// `cap_q(∂T, w) = r_{q*}(V, w)^{-q}` with the equilibrium flow given by
/// the minimal unit flow at the conjugate exponent.
pub fn boundary_capacity<'t>(
    tree: &'t Tree,
    w: &'t WeightMap,
    q: Exponent,
    budget: Budget,
    tol: f64,
) -> CapacityReport<'t> {
    let qv = q.value();
    assert!(qv > 1.0 && qv.is_finite(), "capacity needs 1 < q < ∞");
    let p = q.conjugate(); // resistance order q*
    let root = tree.root().expect("boundary_capacity needs a rooted tree");
    let r = resistance(tree, root, w, p, budget, tol);
    let value = BoundEstimate {
        value: r.value.powf(-qv),
        status: cap_status(&r),
        evidence: r.evidence.iter().map(|&(m, v)| (m, v.powf(-qv))).collect(),
        tolerance: tol,
    };
    let MinimalFlow { flow, .. } = minimal_unit_flow(tree, root, w, p, budget, tol);
    CapacityReport {
        value,
        basepoint: root,
        q: qv,
        q_star: p.value(),
        r_forward: r,
        r_backward: None,
        equilibrium: flow,
        limit_left: None,
    }
}

/// Capacity with respect to a basepoint `v0` (unrooted trees, or rooted
/// trees with `v0` anywhere): the spine of `V_-(v0)` ends at the root when
/// there is one, which makes its resistance automatically finite.
pub fn capacity_with_basepoint<'t>(
    tree: &'t Tree,
    v0: VertexId,
    w: &'t WeightMap,
    q: Exponent,
    budget: Budget,
    tol: f64,
) -> CapacityReport<'t> {
    let qv = q.value();
    assert!(qv > 1.0 && qv.is_finite(), "capacity needs 1 < q < ∞");
    let p = q.conjugate();
    let pv = p.value();
    let UnrootedFlow { flow, energy_pow_p, r_plus, r_minus, limit_left } =
        unrooted_unit_flow(tree, v0, w, p, budget, tol);
    // energy_pow_p = r_+^{q*} + r_-^{q*} − w_{v0}^{q*}; cap = energy^{-q/q*}
    let value = BoundEstimate {
        value: energy_pow_p.value.powf(-qv / pv),
        status: cap_status(&energy_pow_p),
        evidence: energy_pow_p.evidence.iter().map(|&(m, v)| (m, v.powf(-qv / pv))).collect(),
        tolerance: tol,
    };
    CapacityReport {
        value,
        basepoint: v0,
        q: qv,
        q_star: pv,
        r_forward: r_plus,
        r_backward: Some(r_minus),
        equilibrium: flow,
        limit_left: Some(limit_left),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::document::parse_document;
    use crate::flows::flow_energy;

    fn binary_rooted() -> Tree {
        parse_document("format_version: 1\nkind: symmetric\nrooted: true\ngamma: constant 2\nlambda: constant 1\n")
            .unwrap()
            .0
    }

    fn binary_unrooted() -> Tree {
        parse_document(
            "format_version: 1\nkind: symmetric\nrooted: false\nfree_left_end: false\ngamma: constant 2\nlambda: constant 1\n",
        )
        .unwrap()
        .0
    }

    #[test]
    fn binary_boundary_capacity_half() {
        let t = binary_rooted();
        let rep = boundary_capacity(&t, &WeightMap::Mu, Exponent::Finite(2.0), Budget::default(), 1e-10);
        assert!((rep.value.value - 0.5).abs() < 1e-12, "{}", rep.value.value);
        assert!((rep.r_forward.value - 2f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn single_branch_capacity_zero() {
        let t = parse_document("format_version: 1\nkind: symmetric\nrooted: true\ngamma: constant 1\nlambda: constant 1\n")
            .unwrap()
            .0;
        let rep = boundary_capacity(&t, &WeightMap::Mu, Exponent::Finite(2.0), Budget::default(), 1e-10);
        assert_eq!(rep.value.value, 0.0);
        assert_eq!(rep.value.status, Status::Exact);
    }

    #[test]
    fn unrooted_binary_capacity_third() {
        let t = binary_unrooted();
        let rep = capacity_with_basepoint(&t, t.anchor(), &WeightMap::Mu, Exponent::Finite(2.0), Budget::default(), 1e-10);
        assert!((rep.value.value - 1.0 / 3.0).abs() < 1e-9, "{}", rep.value.value);
        assert!((rep.r_forward.value.powi(2) - 2.0).abs() < 1e-9);
        assert!((rep.r_backward.as_ref().unwrap().value.powi(2) - 2.0).abs() < 1e-9);
        // energy duality: Σ (|f| w)^{q*} = cap^{-q*/q} = 3
        let e = flow_energy(&rep.equilibrium, &WeightMap::Mu, Exponent::Finite(2.0), Budget { depth: 12, ..Default::default() });
        assert!((e.value - 3.0).abs() < 1e-9, "energy {}", e.value);
    }

    #[test]
    fn bilateral_geometric_capacity() {
        // tree ℤ with w_n = 2^{-|n|}: r² = 4/3 both ways, cap = 3/5
        let doc = "format_version: 1\nkind: symmetric\nrooted: false\nfree_left_end: true\ngamma: constant 1\nlambda: constant 1\nmu: geometric 1 0.5\nmu_left: geometric 1 0.5\n";
        let t = parse_document(doc).unwrap().0;
        let rep = capacity_with_basepoint(&t, t.anchor(), &WeightMap::Mu, Exponent::Finite(2.0), Budget::default(), 1e-10);
        assert!((rep.value.value - 0.6).abs() < 1e-9, "{}", rep.value.value);
        // flow ≡ 1 along the single branch in both directions
        let a3 = t.ancestor(t.anchor(), 3).unwrap();
        assert!((rep.equilibrium.value(a3).unwrap() - 1.0).abs() < 1e-12);
        assert_eq!(rep.limit_left.unwrap().1, Status::Exact);
        assert!((rep.limit_left.unwrap().0 - 1.0).abs() < 1e-9);
    }

    #[test]
    fn rooted_basepoint_at_root_reduces() {
        let t = binary_rooted();
        let a = boundary_capacity(&t, &WeightMap::Mu, Exponent::Finite(2.0), Budget::default(), 1e-10);
        let b = capacity_with_basepoint(&t, t.anchor(), &WeightMap::Mu, Exponent::Finite(2.0), Budget::default(), 1e-10);
        assert!((a.value.value - b.value.value).abs() <= 1e-12 * a.value.value);
    }

    #[test]
    fn capacity_scaling_homogeneity() {
        // scaling w by t scales cap_q by t^{-q}
        let t = binary_rooted();
        let base = boundary_capacity(&t, &WeightMap::Mu, Exponent::Finite(2.0), Budget::default(), 1e-10).value.value;
        let w3 = WeightMap::Mu.scaled(3.0);
        let scaled = boundary_capacity(&t, &w3, Exponent::Finite(2.0), Budget::default(), 1e-10).value.value;
        assert!((scaled - base * 3f64.powi(-2)).abs() < 1e-12);
    }
}
