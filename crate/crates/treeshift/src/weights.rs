//! Vertex weights: stored slots, derived weights (conjugation, inverse
//! path products, Bergman), and path-product helpers.

use crate::rules::ScalarRule2;
use crate::tree::{Tree, TreeError, VertexId};

/// Per-vertex nonzero scalar weight, evaluated lazily against a tree.
#[derive(Clone, Debug)]
pub enum WeightMap {
    /// The tree's stored space weight μ.
    Mu,
    /// The tree's stored operator weight λ.
    Lambda,
    Unit,
    Scaled { inner: Box<WeightMap>, t: f64 },
    /// Space weight conjugate to an operator weight: eq of §-conjugacy,
    /// `μ_v = λ(w→base)/λ(w→v) · base_value` with `w` a common ancestor.
    Conjugate { lambda: Box<WeightMap>, base: VertexId, base_value: f64 },
    /// `u ↦ 1/λ(origin→u)` on the descendants of `origin`.
    InvPath { lambda: Box<WeightMap>, origin: VertexId },
    /// Bergman shift weight of parameter `q` on a locally finite rooted tree.
    Bergman { q: f64 },
}

impl WeightMap {
    pub fn scaled(self, t: f64) -> WeightMap {
        WeightMap::Scaled { inner: Box::new(self), t }
    }

    pub fn value(&self, tree: &Tree, v: VertexId) -> f64 {
        match self {
            WeightMap::Mu => tree.mu(v),
            WeightMap::Lambda => tree.lambda(v),
            WeightMap::Unit => 1.0,
            WeightMap::Scaled { inner, t } => t * inner.value(tree, v),
            WeightMap::Conjugate { lambda, base, base_value } => {
                let w = common_ancestor(tree, *base, v).expect("connected tree");
                let to_base = path_weight(tree, lambda, w, *base).expect("path");
                let to_v = path_weight(tree, lambda, w, v).expect("path");
                to_base / to_v * base_value
            }
            WeightMap::InvPath { lambda, origin } => {
                1.0 / path_weight(tree, lambda, *origin, v).expect("descendant of origin")
            }
            WeightMap::Bergman { q } => {
                let n = tree.gen(v);
                assert!(n >= 1, "Bergman weight needs a non-root vertex");
                let parent = tree.parent(v).expect("non-root");
                let deg = tree.children(parent, usize::MAX).as_slice().len() as f64;
                ((n as f64 + q - 1.0) / n as f64).sqrt() / deg.sqrt()
            }
        }
    }

    /// Per-generation rule when this weight is constant on generations.
    pub fn gen_rule(&self, tree: &Tree) -> Option<ScalarRule2> {
        use crate::rules::ScalarRule;
        match self {
            WeightMap::Mu => tree.model().mu_by_gen.clone(),
            WeightMap::Lambda => tree.model().lambda_by_gen.clone(),
            WeightMap::Unit => Some(ScalarRule2::one_sided(ScalarRule::constant(1.0))),
            WeightMap::Scaled { inner, t } => {
                let r = inner.gen_rule(tree)?;
                Some(ScalarRule2 { right: r.right.scaled(*t), left: r.left.scaled(*t) })
            }
            WeightMap::Conjugate { lambda, base, base_value } => {
                // constant λ = c: μ(g) = base_value · c^{gen(base) − g}, a
                // two-sided geometric rule
                let c = lambda.constant_value(tree)?;
                if c == 0.0 {
                    return None;
                }
                let gb = tree.gen(*base);
                let a0 = base_value * c.powi(gb as i32);
                Some(ScalarRule2 {
                    right: ScalarRule::Geometric { a: a0, r: 1.0 / c },
                    left: ScalarRule::Geometric { a: a0, r: c },
                })
            }
            _ => None,
        }
    }

    /// Constant operator value when λ is a constant weight (Rolewicz).
    pub fn constant_value(&self, tree: &Tree) -> Option<f64> {
        match self {
            WeightMap::Unit => Some(1.0),
            WeightMap::Scaled { inner, t } => inner.constant_value(tree).map(|c| c * t),
            WeightMap::Mu | WeightMap::Lambda => {
                let r = self.gen_rule(tree)?;
                match (&r.right, &r.left) {
                    (crate::rules::ScalarRule::Constant(a), crate::rules::ScalarRule::Constant(b)) if a == b => {
                        Some(*a)
                    }
                    _ => None,
                }
            }
            _ => None,
        }
    }
}

/// `λ(v → u)`: the product of weights along the path from `v` down to `u`,
/// excluding the start vertex. `path_weight(λ, v, v) = 1`.
///
/// Products run in log space once magnitudes leave `[1e-300, 1e300]`.
pub fn path_weight(tree: &Tree, w: &WeightMap, v: VertexId, u: VertexId) -> Result<f64, TreeError> {
    let steps = path_down(tree, v, u)?;
    let mut prod = 1.0f64;
    let mut log_abs = 0.0f64;
    let mut negative = false;
    let mut overflowed = false;
    for x in steps.iter().map(|&s| w.value(tree, s)) {
        prod *= x;
        log_abs += x.abs().ln();
        if x < 0.0 {
            negative = !negative;
        }
        if !(1e-300..=1e300).contains(&prod.abs()) {
            overflowed = true;
        }
    }
    if overflowed {
        let mag = log_abs.exp();
        Ok(if negative { -mag } else { mag })
    } else {
        Ok(prod)
    }
}

/// Vertices on the path from `v` (exclusive) down to `u` (inclusive).
pub fn path_down(tree: &Tree, v: VertexId, u: VertexId) -> Result<Vec<VertexId>, TreeError> {
    let mut rev = Vec::new();
    let mut cur = u;
    while cur != v {
        rev.push(cur);
        let dv = tree.gen(cur) - tree.gen(v);
        if dv <= 0 {
            return Err(TreeError::Invalid(format!(
                "{} is not a descendant of {}",
                tree.label(u),
                tree.label(v)
            )));
        }
        cur = tree
            .parent(cur)
            .ok_or_else(|| TreeError::Invalid(format!("{} is not a descendant of {}", tree.label(u), tree.label(v))))?;
    }
    rev.reverse();
    Ok(rev)
}

/// Minimal common ancestor of `a` and `b`.
pub fn common_ancestor(tree: &Tree, a: VertexId, b: VertexId) -> Option<VertexId> {
    let mut x = a;
    let mut y = b;
    let (gx, gy) = (tree.gen(x), tree.gen(y));
    if gx > gy {
        x = tree.ancestor(x, (gx - gy) as u64)?;
    } else if gy > gx {
        y = tree.ancestor(y, (gy - gx) as u64)?;
    }
    loop {
        if x == y {
            return Some(x);
        }
        x = tree.parent(x)?;
        y = tree.parent(y)?;
    }
}

/// The conjugate space weight μ from an operator weight λ (fixing
/// `μ(base) = base_value`); satisfies `λ_v = μ_prt(v)/μ_v` off the root.
pub fn conjugate_weight(lambda: WeightMap, base: VertexId, base_value: f64) -> WeightMap {
    WeightMap::Conjugate { lambda: Box::new(lambda), base, base_value }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rules::{CountRule, ScalarRule};
    use crate::tree::{Model, PrefixVertex, Shape, SpineSpec, WExpr};
    use std::sync::Arc;

    fn path_n0(lambda: f64) -> Tree {
        let shape = Arc::new(Shape::Branch { mu: WExpr::Const(1.0), lambda: WExpr::Const(lambda) });
        Tree::new(Model::single_root("0", 1.0, lambda, Some(shape)), true).unwrap()
    }

    fn bi_infinite_path(lambda: f64) -> Tree {
        let shape = Arc::new(Shape::Branch { mu: WExpr::Const(1.0), lambda: WExpr::Const(lambda) });
        let model = Model {
            prefix: vec![PrefixVertex {
                label: "0".into(),
                parent: None,
                children: vec![],
                mu: 1.0,
                lambda,
                attach: Some(shape),
            }],
            spine: Some(SpineSpec {
                mu: ScalarRule2::one_sided(ScalarRule::constant(1.0)),
                lambda: ScalarRule2::one_sided(ScalarRule::constant(lambda)),
                extra: CountRule::constant(0),
                attach: None,
            }),
            ..Default::default()
        };
        Tree::new(model, false).unwrap()
    }

    #[test]
    fn empty_product_is_one() {
        let t = path_n0(2.0);
        let v = t.anchor();
        assert_eq!(path_weight(&t, &WeightMap::Lambda, v, v).unwrap(), 1.0);
    }

    #[test]
    fn constant_weight_product() {
        let t = path_n0(2.0);
        let v0 = t.anchor();
        let lv = t.descendants_to_depth(v0, 3, 4);
        let u = lv[3][0];
        assert_eq!(path_weight(&t, &WeightMap::Lambda, v0, u).unwrap(), 8.0);
    }

    #[test]
    fn path_weight_composes() {
        let t = path_n0(1.7);
        let v0 = t.anchor();
        let lv = t.descendants_to_depth(v0, 5, 4);
        let w = lv[2][0];
        let u = lv[5][0];
        let full = path_weight(&t, &WeightMap::Lambda, v0, u).unwrap();
        let a = path_weight(&t, &WeightMap::Lambda, v0, w).unwrap();
        let b = path_weight(&t, &WeightMap::Lambda, w, u).unwrap();
        assert!((full - a * b).abs() < 1e-12 * full.abs());
    }

    #[test]
    fn non_descendant_is_error() {
        let t = bi_infinite_path(2.0);
        let v0 = t.anchor();
        let a1 = t.ancestor(v0, 1).unwrap();
        assert!(path_weight(&t, &WeightMap::Lambda, v0, a1).is_err());
    }

    #[test]
    fn conjugate_on_bilateral_path() {
        // ℤ with λ ≡ 2, μ_0 = 1 → μ_n = 2^{-n} for all n ∈ ℤ
        let t = bi_infinite_path(2.0);
        let v0 = t.anchor();
        let mu = conjugate_weight(WeightMap::Lambda, v0, 1.0);
        let lv = t.descendants_to_depth(v0, 3, 4);
        assert!((mu.value(&t, lv[3][0]) - 0.125).abs() < 1e-15);
        let a2 = t.ancestor(v0, 2).unwrap();
        assert!((mu.value(&t, a2) - 4.0).abs() < 1e-15);
        // commuting relation λ_v = μ_prt(v)/μ_v at a few vertices
        for &v in &[lv[1][0], lv[2][0]] {
            let p = t.parent(v).unwrap();
            let ratio = mu.value(&t, p) / mu.value(&t, v);
            assert!((ratio - 2.0).abs() < 1e-12);
        }
    }

    #[test]
    fn conjugate_identity_weight() {
        let t = path_n0(1.0);
        let mu = conjugate_weight(WeightMap::Lambda, t.anchor(), 3.5);
        let lv = t.descendants_to_depth(t.anchor(), 2, 4);
        assert_eq!(mu.value(&t, lv[2][0]), 3.5);
    }
}
