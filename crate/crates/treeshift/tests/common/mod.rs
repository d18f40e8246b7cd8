//! Shared test helpers: the brute-force convex oracle for minimal
//! backward-invariant sequences, a reverse-Hölder simplex oracle, and
//! builders for the recurring test trees. The oracles deliberately avoid
//! the resistance product formula they are checking.

#![allow(dead_code)]

use std::collections::BTreeMap;
use std::sync::Arc;
use treeshift::rules::{CountRule, ScalarRule, ScalarRule2};
use treeshift::tree::{Children, Model, PrefixVertex, Shape, SpineSpec, SymmetricInfo, Tree, VertexId, WExpr};

/// Explicit finite tree snapshot for the oracle.
pub struct FiniteSnapshot {
    pub vertices: Vec<VertexId>,
    pub index: BTreeMap<VertexId, usize>,
    pub children: Vec<Vec<usize>>,
    pub mu: Vec<f64>,
    pub root: usize,
}

pub fn snapshot(tree: &Tree, root: VertexId, mu: &treeshift::WeightMap) -> FiniteSnapshot {
    let mut vertices = Vec::new();
    for level in tree.descendants_to_depth(root, 64, 64) {
        vertices.extend(level);
    }
    let index: BTreeMap<VertexId, usize> = vertices.iter().enumerate().map(|(i, &v)| (v, i)).collect();
    let children: Vec<Vec<usize>> = vertices
        .iter()
        .map(|&v| match tree.children(v, 64) {
            Children::Finite(kids) => kids.iter().map(|u| index[u]).collect(),
            Children::Infinite(_) => panic!("oracle needs finite trees"),
        })
        .collect();
    let muv = vertices.iter().map(|&v| mu.value(tree, v)).collect();
    FiniteSnapshot { index, children, mu: muv, root: 0, vertices }
}

/// Minimizes `Σ_{v≠root} |f(v) μ_v|^p` over backward-invariant sequences
/// with `f(root) = 1`, independently of the resistance formula: the
/// minimizer is strictly positive, so a log-barrier interior-point Newton
/// method on the affine parameterization `f = b + A·x` (all-but-last
/// child per internal vertex free) converges without touching the |·|^p
/// kinks at zero.
pub fn min_backward_invariant(snap: &FiniteSnapshot, p: f64) -> (f64, Vec<f64>) {
    let n = snap.children.len();
    let mut s = 0usize;
    for kids in &snap.children {
        s += kids.len().saturating_sub(1);
    }
    let forward = |x: &[f64]| -> Vec<f64> {
        let mut f = vec![0.0f64; n];
        f[snap.root] = 1.0;
        let mut si = 0usize;
        for (v, kids) in snap.children.iter().enumerate() {
            let mut rest = f[v];
            for j in 0..kids.len().saturating_sub(1) {
                f[kids[j]] = x[si];
                rest -= x[si];
                si += 1;
            }
            if let Some(&last) = kids.last() {
                f[last] = rest;
            }
        }
        f
    };
    // f = b + A x exactly (the forward map is affine)
    let b = forward(&vec![0.0; s]);
    let mut a = vec![vec![0.0f64; n]; s];
    for j in 0..s {
        let mut e = vec![0.0; s];
        e[j] = 1.0;
        let fj = forward(&e);
        for v in 0..n {
            a[j][v] = fj[v] - b[v];
        }
    }
    let phi = |f: &[f64]| -> f64 {
        (0..n).filter(|&v| v != snap.root).map(|v| (f[v] * snap.mu[v]).abs().powf(p)).sum()
    };
    // even-split start: strictly interior
    let mut x = vec![0.0f64; s];
    {
        let mut f = vec![0.0f64; n];
        f[snap.root] = 1.0;
        let mut si = 0usize;
        for (v, kids) in snap.children.iter().enumerate() {
            let share = if kids.is_empty() { 0.0 } else { f[v] / kids.len() as f64 };
            for &k in kids {
                f[k] = share;
            }
            for _ in 0..kids.len().saturating_sub(1) {
                x[si] = share;
                si += 1;
            }
        }
    }
    if s == 0 {
        let f = forward(&x);
        return (phi(&f).powf(1.0 / p), f);
    }
    let mut f = forward(&x);
    let barrier_obj = |f: &[f64], tau: f64| -> f64 {
        let mut acc = phi(f);
        for v in 0..n {
            if v == snap.root {
                continue;
            }
            if f[v] <= 0.0 {
                return f64::INFINITY;
            }
            acc -= tau * f[v].ln();
        }
        acc
    };
    let mut tau = 1e-1f64;
    while tau > 1e-24 {
        // damped Newton on Φ + τ·barrier
        let mut cur = barrier_obj(&f, tau);
        for _ in 0..60 {
            let mut w1 = vec![0.0f64; n];
            let mut w2 = vec![0.0f64; n];
            for v in 0..n {
                if v == snap.root {
                    continue;
                }
                let m = snap.mu[v];
                let t = f[v] * m;
                let at = t.abs().max(1e-300);
                w1[v] = p * at.powf(p - 1.0) * t.signum() * m - tau / f[v];
                w2[v] = p * (p - 1.0) * at.powf(p - 2.0).min(1e200) * m * m + tau / (f[v] * f[v]);
            }
            let mut g = vec![0.0f64; s];
            for j in 0..s {
                g[j] = (0..n).map(|v| a[j][v] * w1[v]).sum();
            }
            let gn = g.iter().map(|t| t.abs()).fold(0.0, f64::max);
            if gn <= 1e-12 * (1.0 + cur.abs()) {
                break;
            }
            let mut h = vec![vec![0.0f64; s]; s];
            for i in 0..s {
                for j in i..s {
                    let acc: f64 = (0..n).map(|v| a[i][v] * w2[v] * a[j][v]).sum();
                    h[i][j] = acc;
                    h[j][i] = acc;
                }
            }
            let maxdiag = (0..s).map(|i| h[i][i].abs()).fold(0.0f64, f64::max).max(1e-30);
            let mut ridge = 1e-13 * maxdiag;
            let d = loop {
                match cholesky_solve(&h, &g, ridge) {
                    Some(d) => break d,
                    None => {
                        ridge *= 1e3;
                        if ridge > maxdiag * 1e30 {
                            break g.clone();
                        }
                    }
                }
            };
            let mut t = 1.0f64;
            let mut accepted = false;
            for _ in 0..80 {
                let trial: Vec<f64> = x.iter().zip(&d).map(|(xi, di)| xi - t * di).collect();
                let tf = forward(&trial);
                let tobj = barrier_obj(&tf, tau);
                if tobj.is_finite() && tobj < cur {
                    x = trial;
                    f = tf;
                    cur = tobj;
                    accepted = true;
                    break;
                }
                t *= 0.5;
            }
            if !accepted {
                break;
            }
        }
        tau *= 0.1;
    }
    // polish: flat valleys leave objective differences below f64 resolution
    // while the stationarity gradient still carries signal, so finish with
    // Newton steps accepted on gradient-norm decrease (f kept positive)
    {
        let grad_at = |f: &[f64]| -> (Vec<f64>, Vec<f64>) {
            let mut w1 = vec![0.0f64; n];
            let mut w2 = vec![0.0f64; n];
            for v in 0..n {
                if v == snap.root {
                    continue;
                }
                let m = snap.mu[v];
                let t = f[v] * m;
                let at = t.abs().max(1e-300);
                w1[v] = p * at.powf(p - 1.0) * t.signum() * m;
                w2[v] = p * (p - 1.0) * at.powf(p - 2.0).min(1e200) * m * m;
            }
            (w1, w2)
        };
        for _ in 0..60 {
            let (w1, w2) = grad_at(&f);
            let mut g = vec![0.0f64; s];
            for j in 0..s {
                g[j] = (0..n).map(|v| a[j][v] * w1[v]).sum();
            }
            let gn: f64 = g.iter().map(|t| t * t).sum::<f64>().sqrt();
            if gn <= 1e-250 {
                break;
            }
            let mut h = vec![vec![0.0f64; s]; s];
            for i in 0..s {
                for j in i..s {
                    let acc: f64 = (0..n).map(|v| a[i][v] * w2[v] * a[j][v]).sum();
                    h[i][j] = acc;
                    h[j][i] = acc;
                }
            }
            let maxdiag = (0..s).map(|i| h[i][i].abs()).fold(0.0f64, f64::max).max(1e-300);
            let mut ridge = 1e-16 * maxdiag;
            let d = loop {
                match cholesky_solve(&h, &g, ridge) {
                    Some(d) => break d,
                    None => {
                        ridge *= 1e2;
                        if ridge > maxdiag {
                            break g.clone();
                        }
                    }
                }
            };
            let mut t = 1.0f64;
            let mut moved = false;
            for _ in 0..60 {
                let trial: Vec<f64> = x.iter().zip(&d).map(|(xi, di)| xi - t * di).collect();
                let tf = forward(&trial);
                if tf.iter().enumerate().any(|(v, &fv)| v != snap.root && fv <= 0.0) {
                    t *= 0.5;
                    continue;
                }
                let (tw1, _) = grad_at(&tf);
                let mut tg = vec![0.0f64; s];
                for j in 0..s {
                    tg[j] = (0..n).map(|v| a[j][v] * tw1[v]).sum();
                }
                let tgn: f64 = tg.iter().map(|t| t * t).sum::<f64>().sqrt();
                if tgn < gn * 0.9999 {
                    x = trial;
                    f = tf;
                    moved = true;
                    break;
                }
                t *= 0.5;
            }
            if !moved {
                break;
            }
        }
    }
    (phi(&f).powf(1.0 / p), f)
}

/// Dense Cholesky solve of `(H + ridge·I) d = g`; None when not positive
/// definite at this ridge.
fn cholesky_solve(h: &[Vec<f64>], g: &[f64], ridge: f64) -> Option<Vec<f64>> {
    let s = g.len();
    let mut l = vec![vec![0.0f64; s]; s];
    for i in 0..s {
        for j in 0..=i {
            let mut acc = h[i][j] + if i == j { ridge } else { 0.0 };
            for k in 0..j {
                acc -= l[i][k] * l[j][k];
            }
            if i == j {
                if acc <= 0.0 || !acc.is_finite() {
                    return None;
                }
                l[i][j] = acc.sqrt();
            } else {
                l[i][j] = acc / l[j][j];
            }
        }
    }
    let mut y = vec![0.0f64; s];
    for i in 0..s {
        let mut acc = g[i];
        for k in 0..i {
            acc -= l[i][k] * y[k];
        }
        y[i] = acc / l[i][i];
    }
    let mut d = vec![0.0f64; s];
    for i in (0..s).rev() {
        let mut acc = y[i];
        for k in i + 1..s {
            acc -= l[k][i] * d[k];
        }
        d[i] = acc / l[i][i];
    }
    Some(d)
}

/// Minimizes `(Σ_i |x_i w_i|^p)^{1/p}` (or `sup`, or plain sum) over the
/// simplex-like constraint `Σ_i x_i = 1` by projected gradient descent:
/// the reverse Hölder optimum.
pub fn min_mass_one_norm(weights: &[f64], p: f64) -> f64 {
    let n = weights.len();
    let mut x = vec![1.0 / n as f64; n];
    let eval = |x: &[f64]| -> (f64, Vec<f64>) {
        let mut obj = 0.0;
        let mut grad = vec![0.0; n];
        for i in 0..n {
            let t = x[i] * weights[i];
            obj += t.abs().powf(p);
            grad[i] = p * t.abs().powf(p - 1.0) * t.signum() * weights[i];
        }
        (obj, grad)
    };
    let (mut obj, mut grad) = eval(&x);
    let mut eta = 1e-3;
    for _ in 0..40_000 {
        let mean = grad.iter().sum::<f64>() / n as f64;
        let proj: Vec<f64> = grad.iter().map(|g| g - mean).collect();
        let gn: f64 = proj.iter().map(|g| g * g).sum::<f64>().sqrt();
        if gn < 1e-15 * (1.0 + obj) {
            break;
        }
        let mut trial: Vec<f64> = x.iter().zip(&proj).map(|(xi, gi)| xi - eta * gi).collect();
        let (mut tobj, tgrad) = eval(&trial);
        let mut k = 0;
        while tobj > obj && k < 60 {
            eta *= 0.5;
            trial = x.iter().zip(&proj).map(|(xi, gi)| xi - eta * gi).collect();
            let r = eval(&trial);
            tobj = r.0;
            let _ = &r.1;
            k += 1;
        }
        if tobj > obj {
            break;
        }
        x = trial;
        obj = tobj;
        grad = tgrad;
        eta = (eta * 1.6).min(10.0);
    }
    obj.powf(1.0 / p)
}

/// Random explicit rooted tree with 2..=max_vertices vertices and log-uniform
/// weights. Deterministic under the given RNG.
pub fn random_tree(rng: &mut impl rand::Rng, max_vertices: usize) -> Tree {
    let n = rng.gen_range(2..=max_vertices);
    let mut prefix = Vec::with_capacity(n);
    let logw = |rng: &mut dyn rand::RngCore| -> f64 {
        let u: f64 = rand::Rng::gen_range(rng, -1.0f64..=1.0);
        (u * (100f64).ln()).exp()
    };
    for i in 0..n {
        let parent = if i == 0 { None } else { Some(rand::Rng::gen_range(rng, 0..i)) };
        prefix.push(PrefixVertex {
            label: format!("n{i}"),
            parent,
            children: vec![],
            mu: logw(rng),
            lambda: 1.0,
            attach: None,
        });
    }
    for i in 0..n {
        if let Some(p) = prefix[i].parent {
            prefix[p].children.push(i);
        }
    }
    Tree::new(Model { prefix, ..Default::default() }, true).unwrap()
}

pub fn binary_rooted_doc() -> &'static str {
    "format_version: 1\nkind: symmetric\nrooted: true\nfree_left_end: false\ngamma: constant 2\nlambda: constant 1\n"
}

pub fn binary_unrooted_doc() -> &'static str {
    "format_version: 1\nkind: symmetric\nrooted: false\nfree_left_end: false\ngamma: constant 2\nlambda: constant 1\n"
}

pub fn path_rooted_doc() -> &'static str {
    "format_version: 1\nkind: symmetric\nrooted: true\nfree_left_end: false\ngamma: constant 1\nlambda: constant 1\n"
}

/// Half-comb with μ_{(n,k)} = 2^{-k/2} (the golden-ratio comb), as a
/// hybrid document.
pub fn golden_comb_doc() -> String {
    let s = 0.5f64.sqrt();
    format!(
        "format_version: 1\nkind: hybrid\nvertex: id=v0 mu=1\n\
         attach: at=v0 shape=decorated mu=constant_1 tooth-mu=geometric_1_{s:.17}\n"
    )
}

/// Comb tree ℤ×ℕ₀ with generation-indexed weights (1 on generations ≤ 0,
/// 2^{-n} above): the chaos counterexample with fixed points everywhere.
pub fn comb_gen_weighted() -> Tree {
    let w = ScalarRule2 { right: ScalarRule::geometric(1.0, 0.5), left: ScalarRule::constant(1.0) };
    let tooth = Arc::new(Shape::Branch { mu: WExpr::ByGen(w.clone()), lambda: WExpr::Const(1.0) });
    let spine_shape = Arc::new(Shape::Decorated {
        spine_mu: WExpr::ByGen(w.clone()),
        spine_lambda: WExpr::Const(1.0),
        teeth: 1,
        tooth: tooth.clone(),
    });
    let model = Model {
        prefix: vec![PrefixVertex {
            label: "o".into(),
            parent: None,
            children: vec![],
            mu: 1.0,
            lambda: 1.0,
            attach: Some(spine_shape),
        }],
        spine: Some(SpineSpec {
            mu: w.clone(),
            lambda: ScalarRule2::one_sided(ScalarRule::constant(1.0)),
            extra: CountRule::constant(1),
            attach: Some(tooth),
        }),
        symmetric: None,
        mu_by_gen: Some(w),
        lambda_by_gen: Some(ScalarRule2::one_sided(ScalarRule::constant(1.0))),
    };
    Tree::new(model, false).unwrap()
}

/// Comb tree with tooth-depth weights μ_{(n,k)} = 2^{-k}: chaotic on ℓ¹.
pub fn comb_depth_weighted() -> Tree {
    let tooth = Arc::new(Shape::Branch {
        mu: WExpr::ByDepth(ScalarRule::geometric(1.0, 0.5)),
        lambda: WExpr::Const(1.0),
    });
    let spine_shape = Arc::new(Shape::Decorated {
        spine_mu: WExpr::Const(1.0),
        spine_lambda: WExpr::Const(1.0),
        teeth: 1,
        tooth: tooth.clone(),
    });
    let model = Model {
        prefix: vec![PrefixVertex {
            label: "o".into(),
            parent: None,
            children: vec![],
            mu: 1.0,
            lambda: 1.0,
            attach: Some(spine_shape),
        }],
        spine: Some(SpineSpec {
            mu: ScalarRule2::one_sided(ScalarRule::constant(1.0)),
            lambda: ScalarRule2::one_sided(ScalarRule::constant(1.0)),
            extra: CountRule::constant(1),
            attach: Some(tooth),
        }),
        symmetric: None,
        mu_by_gen: None,
        lambda_by_gen: Some(ScalarRule2::one_sided(ScalarRule::constant(1.0))),
    };
    Tree::new(model, false).unwrap()
}

/// Symmetric rule tree builder for the invariance suites.
pub fn sym_tree(gamma: CountRule, lambda: f64, rooted: bool) -> Tree {
    let gleft = if rooted { None } else { Some(gamma.clone()) };
    let shape = Arc::new(Shape::Sym {
        gamma: gamma.clone(),
        gamma_left: gleft.clone(),
        gamma_by_gen: !rooted,
        mu: WExpr::Const(1.0),
        lambda: WExpr::Const(lambda),
    });
    let mut model = Model::single_root("v0", 1.0, lambda, Some(shape.clone()));
    model.symmetric = Some(SymmetricInfo {
        gamma: gamma.clone(),
        gamma_left: gleft.clone(),
        lambda: ScalarRule2::one_sided(ScalarRule::constant(lambda)),
        mu: ScalarRule2::one_sided(ScalarRule::constant(1.0)),
    });
    model.mu_by_gen = Some(ScalarRule2::one_sided(ScalarRule::constant(1.0)));
    model.lambda_by_gen = Some(ScalarRule2::one_sided(ScalarRule::constant(lambda)));
    if !rooted {
        let extra = match &gamma {
            CountRule::Constant(c) => CountRule::Constant(c.saturating_sub(1)),
            _ => panic!("unrooted sym builder needs constant gamma"),
        };
        model.spine = Some(SpineSpec {
            mu: ScalarRule2::one_sided(ScalarRule::constant(1.0)),
            lambda: ScalarRule2::one_sided(ScalarRule::constant(lambda)),
            extra,
            attach: Some(shape),
        });
    }
    Tree::new(model, rooted).unwrap()
}
