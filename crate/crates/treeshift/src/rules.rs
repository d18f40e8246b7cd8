//! Deterministic sequence rules backing rule-generated trees and weights,
//! and the closed-form series analysis used for tail certificates.
//!
//! A rule is evaluated at indices `n = 0, 1, 2, …`. Two-sided sequences
//! (unrooted trees) pair a right rule with a left rule evaluated at `|n|`.

use std::fmt;

/// Scalar sequence rule. `Polynomial` evaluates to `c·(n + x0)^k` with
/// `x0 ≥ 1` (offset keeps values finite and nonzero at `n = 0`).
#[derive(Clone, Debug, PartialEq)]
pub enum ScalarRule {
    Constant(f64),
    /// `a · r^n`
    Geometric { a: f64, r: f64 },
    /// `c · (n + x0)^k`
    Polynomial { c: f64, k: i32, x0: f64 },
    Table { head: Vec<f64>, tail: Box<ScalarRule> },
}

impl ScalarRule {
    pub fn constant(c: f64) -> Self {
        ScalarRule::Constant(c)
    }

    pub fn geometric(a: f64, r: f64) -> Self {
        ScalarRule::Geometric { a, r }
    }

    pub fn value(&self, n: u64) -> f64 {
        match self {
            ScalarRule::Constant(c) => *c,
            ScalarRule::Geometric { a, r } => a * r.powi(n as i32),
            ScalarRule::Polynomial { c, k, x0 } => c * (n as f64 + x0).powi(*k),
            ScalarRule::Table { head, tail } => {
                if (n as usize) < head.len() {
                    head[n as usize]
                } else {
                    tail.value(n - head.len() as u64)
                }
            }
        }
    }

    /// Rule for the shifted sequence `m ↦ value(n + m)`.
    pub fn skip(&self, n: u64) -> ScalarRule {
        match self {
            ScalarRule::Constant(c) => ScalarRule::Constant(*c),
            ScalarRule::Geometric { a, r } => ScalarRule::Geometric { a: a * r.powi(n as i32), r: *r },
            ScalarRule::Polynomial { c, k, x0 } => ScalarRule::Polynomial { c: *c, k: *k, x0: x0 + n as f64 },
            ScalarRule::Table { head, tail } => {
                if (n as usize) < head.len() {
                    ScalarRule::Table { head: head[n as usize..].to_vec(), tail: tail.clone() }
                } else {
                    tail.skip(n - head.len() as u64)
                }
            }
        }
    }

    /// Rule for the subsampled sequence `m ↦ value(start + m·stride)`.
    pub fn subsample(&self, start: u64, stride: u64) -> ScalarRule {
        debug_assert!(stride >= 1);
        let shifted = self.skip(start);
        if stride == 1 {
            return shifted;
        }
        match shifted {
            ScalarRule::Constant(c) => ScalarRule::Constant(c),
            ScalarRule::Geometric { a, r } => ScalarRule::Geometric { a, r: r.powi(stride as i32) },
            ScalarRule::Polynomial { c, k, x0 } => {
                // c·(m·stride + x0)^k = c·stride^k·(m + x0/stride)^k
                ScalarRule::Polynomial {
                    c: c * (stride as f64).powi(k),
                    k,
                    x0: x0 / stride as f64,
                }
            }
            ScalarRule::Table { head, tail } => {
                let keep: Vec<f64> = head.iter().copied().step_by(stride as usize).collect();
                let consumed = keep.len() as u64 * stride;
                let overhang = consumed - head.len() as u64; // first tail index to sample
                ScalarRule::Table { head: keep, tail: Box::new(tail.subsample(overhang, stride)) }
            }
        }
    }

    /// Scales every value by `t`.
    pub fn scaled(&self, t: f64) -> ScalarRule {
        match self {
            ScalarRule::Constant(c) => ScalarRule::Constant(c * t),
            ScalarRule::Geometric { a, r } => ScalarRule::Geometric { a: a * t, r: *r },
            ScalarRule::Polynomial { c, k, x0 } => ScalarRule::Polynomial { c: c * t, k: *k, x0: *x0 },
            ScalarRule::Table { head, tail } => ScalarRule::Table {
                head: head.iter().map(|x| x * t).collect(),
                tail: Box::new(tail.scaled(t)),
            },
        }
    }

    fn pure_tail(&self) -> (&ScalarRule, u64) {
        match self {
            ScalarRule::Table { head, tail } => {
                let (t, off) = tail.pure_tail();
                (t, off + head.len() as u64)
            }
            other => (other, 0),
        }
    }

    pub fn all_nonzero(&self) -> bool {
        match self {
            ScalarRule::Constant(c) => *c != 0.0,
            ScalarRule::Geometric { a, r } => *a != 0.0 && *r != 0.0,
            ScalarRule::Polynomial { c, .. } => *c != 0.0,
            ScalarRule::Table { head, tail } => head.iter().all(|x| *x != 0.0) && tail.all_nonzero(),
        }
    }
}

impl fmt::Display for ScalarRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ScalarRule::Constant(c) => write!(f, "constant {c}"),
            ScalarRule::Geometric { a, r } => write!(f, "geometric {a} {r}"),
            ScalarRule::Polynomial { c, k, x0 } if *x0 == 1.0 => write!(f, "polynomial {c} {k}"),
            ScalarRule::Polynomial { c, k, x0 } => write!(f, "polynomial {c} {k} @{x0}"),
            ScalarRule::Table { head, tail } => {
                write!(f, "table [")?;
                for (i, v) in head.iter().enumerate() {
                    if i > 0 {
                        write!(f, " ")?;
                    }
                    write!(f, "{v}")?;
                }
                write!(f, "] then {tail}")
            }
        }
    }
}

/// Nonnegative-integer sequence rule (children counts per generation).
#[derive(Clone, Debug, PartialEq)]
pub enum CountRule {
    Constant(u64),
    /// `a · r^n`
    Geometric { a: u64, r: u64 },
    /// `c · (n + n0 + 1)^k`
    Polynomial { c: u64, k: u32, n0: u64 },
    /// `reps` at indices `n` with `n + shift = base^j` for some `j ≥ 1`, else 1.
    Powers { base: u64, reps: u64, shift: u64 },
    Table { head: Vec<u64>, tail: Box<CountRule> },
}

impl CountRule {
    pub fn constant(c: u64) -> Self {
        CountRule::Constant(c)
    }

    pub fn value(&self, n: u64) -> u64 {
        match self {
            CountRule::Constant(c) => *c,
            CountRule::Geometric { a, r } => a.saturating_mul(r.saturating_pow(n.min(63) as u32)),
            CountRule::Polynomial { c, k, n0 } => c.saturating_mul((n + n0 + 1).saturating_pow(*k)),
            CountRule::Powers { base, reps, shift } => {
                let m = n + shift;
                let mut p = *base;
                while p < m {
                    p = p.saturating_mul(*base);
                }
                if p == m && m >= *base {
                    *reps
                } else {
                    1
                }
            }
            CountRule::Table { head, tail } => {
                if (n as usize) < head.len() {
                    head[n as usize]
                } else {
                    tail.value(n - head.len() as u64)
                }
            }
        }
    }

    pub fn skip(&self, n: u64) -> CountRule {
        match self {
            CountRule::Constant(c) => CountRule::Constant(*c),
            CountRule::Geometric { a, r } => CountRule::Geometric {
                a: a.saturating_mul(r.saturating_pow(n.min(63) as u32)),
                r: *r,
            },
            CountRule::Polynomial { c, k, n0 } => CountRule::Polynomial { c: *c, k: *k, n0: n0 + n },
            CountRule::Powers { base, reps, shift } => CountRule::Powers { base: *base, reps: *reps, shift: shift + n },
            CountRule::Table { head, tail } => {
                if (n as usize) < head.len() {
                    CountRule::Table { head: head[n as usize..].to_vec(), tail: tail.clone() }
                } else {
                    tail.skip(n - head.len() as u64)
                }
            }
        }
    }

    fn pure_tail(&self) -> (&CountRule, u64) {
        match self {
            CountRule::Table { head, tail } => {
                let (t, off) = tail.pure_tail();
                (t, off + head.len() as u64)
            }
            other => (other, 0),
        }
    }

    /// True when every value is ≥ 1 (leafless continuation).
    pub fn all_positive(&self) -> bool {
        match self {
            CountRule::Constant(c) => *c >= 1,
            CountRule::Geometric { a, r } => *a >= 1 && *r >= 1,
            CountRule::Polynomial { c, .. } => *c >= 1,
            CountRule::Powers { reps, .. } => *reps >= 1,
            CountRule::Table { head, tail } => head.iter().all(|c| *c >= 1) && tail.all_positive(),
        }
    }
}

impl fmt::Display for CountRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CountRule::Constant(c) => write!(f, "constant {c}"),
            CountRule::Geometric { a, r } => write!(f, "geometric {a} {r}"),
            CountRule::Polynomial { c, k, n0 } if *n0 == 0 => write!(f, "polynomial {c} {k}"),
            CountRule::Polynomial { c, k, n0 } => write!(f, "polynomial {c} {k} +{n0}"),
            CountRule::Powers { base, reps, shift } if *shift == 0 => write!(f, "powers {base} {reps}"),
            CountRule::Powers { base, reps, shift } => write!(f, "powers {base} {reps} +{shift}"),
            CountRule::Table { head, tail } => {
                write!(f, "table [")?;
                for (i, v) in head.iter().enumerate() {
                    if i > 0 {
                        write!(f, " ")?;
                    }
                    write!(f, "{v}")?;
                }
                write!(f, "] then {tail}")
            }
        }
    }
}

/// Two-sided scalar rule: `right` at generations `n ≥ 0`, `left` at `|n|`
/// for `n < 0`.
#[derive(Clone, Debug, PartialEq)]
pub struct ScalarRule2 {
    pub right: ScalarRule,
    pub left: ScalarRule,
}

impl ScalarRule2 {
    pub fn one_sided(rule: ScalarRule) -> Self {
        let left = rule.clone();
        ScalarRule2 { right: rule, left }
    }

    pub fn value(&self, g: i64) -> f64 {
        if g >= 0 {
            self.right.value(g as u64)
        } else {
            self.left.value((-g) as u64)
        }
    }
}

/// Outcome of a series (or sup) evaluation with a certificate.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum SeriesVerdict {
    /// Certified finite value (error below roughly 1e-14 relative).
    Convergent(f64),
    Divergent,
    /// No certificate; carries the last partial sum.
    Unknown(f64),
}

impl SeriesVerdict {
    pub fn is_convergent(&self) -> bool {
        matches!(self, SeriesVerdict::Convergent(_))
    }
}

const MAX_NUMERIC_TERMS: u64 = 200_000;
const REL_EPS: f64 = 1e-15;

/// `Σ_{n ≥ from} |rule(n)|^p` with closed-form tails.
pub fn scalar_pow_sum(rule: &ScalarRule, p: f64, from: u64) -> SeriesVerdict {
    let rule = rule.skip(from);
    let mut partial = 0.0;
    let (tail, off) = rule.pure_tail();
    for n in 0..off {
        partial += rule.value(n).abs().powf(p);
    }
    match tail {
        ScalarRule::Constant(c) => {
            if *c == 0.0 {
                SeriesVerdict::Convergent(partial)
            } else {
                SeriesVerdict::Divergent
            }
        }
        ScalarRule::Geometric { a, r } => {
            let q = r.abs().powf(p);
            if *a == 0.0 {
                SeriesVerdict::Convergent(partial)
            } else if q < 1.0 {
                SeriesVerdict::Convergent(partial + a.abs().powf(p) / (1.0 - q))
            } else {
                SeriesVerdict::Divergent
            }
        }
        ScalarRule::Polynomial { c, k, x0 } => {
            if *c == 0.0 {
                return SeriesVerdict::Convergent(partial);
            }
            let s = *k as f64 * p;
            if s >= -1.0 {
                return SeriesVerdict::Divergent;
            }
            // p-series: numeric sum with integral tail bracket.
            let cp = c.abs().powf(p);
            let mut n = 0u64;
            loop {
                let x = n as f64 + x0;
                partial += cp * x.powf(s);
                // tail over m > n is within [∫_{x+1}, ∫_x] of cp·t^s dt
                let hi = cp * (x).powf(s + 1.0) / -(s + 1.0);
                if hi <= REL_EPS * partial.max(1e-300) || n > MAX_NUMERIC_TERMS {
                    let lo = cp * (x + 1.0).powf(s + 1.0) / -(s + 1.0);
                    return SeriesVerdict::Convergent(partial + 0.5 * (lo + hi));
                }
                n += 1;
            }
        }
        ScalarRule::Table { .. } => unreachable!("pure_tail strips tables"),
    }
}

/// `sup_{n ≥ from} |rule(n)|`, `Divergent` when unbounded.
pub fn scalar_sup(rule: &ScalarRule, from: u64) -> SeriesVerdict {
    let rule = rule.skip(from);
    let (tail, off) = rule.pure_tail();
    let mut sup: f64 = 0.0;
    for n in 0..off {
        sup = sup.max(rule.value(n).abs());
    }
    match tail {
        ScalarRule::Constant(c) => SeriesVerdict::Convergent(sup.max(c.abs())),
        ScalarRule::Geometric { a, r } => {
            if a.abs() == 0.0 || r.abs() <= 1.0 {
                SeriesVerdict::Convergent(sup.max(a.abs()))
            } else {
                SeriesVerdict::Divergent
            }
        }
        ScalarRule::Polynomial { c, k, x0 } => {
            if *k <= 0 || c.abs() == 0.0 {
                SeriesVerdict::Convergent(sup.max(c.abs() * x0.powi(*k)))
            } else {
                SeriesVerdict::Divergent
            }
        }
        ScalarRule::Table { .. } => unreachable!(),
    }
}

/// `inf_{n ≥ from} |rule(n)|` for certificate lower bounds.
pub fn scalar_inf(rule: &ScalarRule, from: u64) -> f64 {
    let rule = rule.skip(from);
    let (tail, off) = rule.pure_tail();
    let mut inf = f64::INFINITY;
    for n in 0..off {
        inf = inf.min(rule.value(n).abs());
    }
    let tail_inf = match tail {
        ScalarRule::Constant(c) => c.abs(),
        ScalarRule::Geometric { a, r } => {
            if a.abs() == 0.0 {
                0.0
            } else if r.abs() < 1.0 {
                0.0
            } else {
                a.abs()
            }
        }
        ScalarRule::Polynomial { c, k, x0 } => {
            if *k < 0 || c.abs() == 0.0 {
                0.0
            } else {
                c.abs() * x0.powi(*k)
            }
        }
        ScalarRule::Table { .. } => unreachable!(),
    };
    inf.min(tail_inf)
}

/// Does `|rule(n)| → 0`? `None` when the rule family cannot certify it.
pub fn scalar_tends_to_zero(rule: &ScalarRule) -> Option<bool> {
    let (tail, _) = rule.pure_tail();
    match tail {
        ScalarRule::Constant(c) => Some(*c == 0.0),
        ScalarRule::Geometric { a, r } => Some(*a == 0.0 || r.abs() < 1.0),
        ScalarRule::Polynomial { c, k, .. } => Some(*c == 0.0 || *k < 0),
        ScalarRule::Table { .. } => unreachable!(),
    }
}

/// Amplitude of the n-th term in a symmetric series, `n ≥ 1`.
#[derive(Clone, Debug)]
pub enum Amplitude {
    /// `|rule(from + n)|`
    Value { rule: ScalarRule, from: u64 },
    /// `1 / Π_{j=1..n} |rule(from + j)|`
    InvProduct { rule: ScalarRule, from: u64 },
    /// `Π_{j=0..n-1} |rule(from + j)|`
    Product { rule: ScalarRule, from: u64 },
}

impl Amplitude {
    fn log_at(&self, n: u64, memo: &mut f64) -> f64 {
        // callers iterate n = 1, 2, …; memo accumulates log-products
        match self {
            Amplitude::Value { rule, from } => rule.value(from + n).abs().ln(),
            Amplitude::InvProduct { rule, from } => {
                *memo -= rule.value(from + n).abs().ln();
                *memo
            }
            Amplitude::Product { rule, from } => {
                *memo += rule.value(from + n - 1).abs().ln();
                *memo
            }
        }
    }

    /// Per-step ratio `amp(n+1)/amp(n)` classification on the pure tail.
    fn ratio_class(&self) -> AmpRatio {
        match self {
            Amplitude::Value { rule, .. } => match rule.pure_tail().0 {
                ScalarRule::Constant(_) => AmpRatio::Const(1.0),
                ScalarRule::Geometric { r, .. } => AmpRatio::Const(r.abs()),
                ScalarRule::Polynomial { k, .. } => AmpRatio::PolyToOne(*k),
                ScalarRule::Table { .. } => unreachable!(),
            },
            Amplitude::InvProduct { rule, .. } => match rule.pure_tail().0 {
                ScalarRule::Constant(c) => AmpRatio::Const(1.0 / c.abs()),
                ScalarRule::Geometric { r, .. } => {
                    if r.abs() > 1.0 {
                        AmpRatio::ToZero
                    } else if r.abs() < 1.0 {
                        AmpRatio::ToInfinity
                    } else {
                        AmpRatio::VarConst
                    }
                }
                ScalarRule::Polynomial { k, .. } => {
                    if *k > 0 {
                        AmpRatio::ToZero
                    } else if *k < 0 {
                        AmpRatio::ToInfinity
                    } else {
                        AmpRatio::VarConst
                    }
                }
                ScalarRule::Table { .. } => unreachable!(),
            },
            Amplitude::Product { rule, .. } => match rule.pure_tail().0 {
                ScalarRule::Constant(c) => AmpRatio::Const(c.abs()),
                ScalarRule::Geometric { r, .. } => {
                    if r.abs() < 1.0 {
                        AmpRatio::ToZero
                    } else if r.abs() > 1.0 {
                        AmpRatio::ToInfinity
                    } else {
                        AmpRatio::VarConst
                    }
                }
                ScalarRule::Polynomial { k, .. } => {
                    if *k < 0 {
                        AmpRatio::ToZero
                    } else if *k > 0 {
                        AmpRatio::ToInfinity
                    } else {
                        AmpRatio::VarConst
                    }
                }
                ScalarRule::Table { .. } => unreachable!(),
            },
        }
    }

    fn irregular_horizon(&self) -> u64 {
        match self {
            Amplitude::Value { rule, .. }
            | Amplitude::InvProduct { rule, .. }
            | Amplitude::Product { rule, .. } => rule.pure_tail().1,
        }
    }
}

enum AmpRatio {
    Const(f64),
    /// Ratio `((n+a+1)/(n+a))^k → 1`, monotone.
    PolyToOne(i32),
    ToZero,
    ToInfinity,
    /// Ratio varies but rule gives the value at the vertex directly.
    VarConst,
}

/// `Σ_{n ≥ 1} amp(n)^p / G(n)^(p−1)` with `G(n) = Π_{j=0}^{n−1} γ(g_from + j)`.
///
/// This is the symmetric-tree closed form for `c_p(V(v), ·)^p` at a vertex
/// of generation `g_from`, and the series of Thm-style chaos criteria.
pub fn sym_cp_pow_series(gamma: &CountRule, g_from: u64, amp: &Amplitude, p: f64) -> SeriesVerdict {
    debug_assert!(p >= 1.0 && p.is_finite());
    let gamma = gamma.skip(g_from);
    let pm1 = p - 1.0;
    let (gtail, goff) = gamma.pure_tail();
    let horizon = goff.max(amp.irregular_horizon()) + 2;

    let mut sum = 0.0f64;
    let mut log_g = 0.0f64; // log G(n)
    let mut memo = 0.0f64;
    let mut last_term = 0.0f64;
    let mut n = 1u64;
    // explicit prefix
    while n <= horizon {
        log_g += (gamma.value(n - 1).max(1) as f64).ln();
        let la = amp.log_at(n, &mut memo);
        last_term = (p * la - pm1 * log_g).exp();
        sum += last_term;
        n += 1;
    }

    let amp_ratio = amp.ratio_class();
    match (gtail, amp_ratio) {
        // constant gamma, (eventually) constant amplitude ratio
        (CountRule::Constant(c), AmpRatio::Const(rho)) => {
            let q = rho.powf(p) / (*c.max(&1) as f64).powf(pm1);
            geometric_tail(sum, last_term, q)
        }
        (CountRule::Constant(c), AmpRatio::PolyToOne(k)) => {
            // term(n) = C·(n+x)^{kp} / c^{(p-1)n}: dominated once c > 1
            if (*c) > 1 {
                let limit = 1.0 / (*c as f64).powf(pm1);
                // ratio is monotone toward `limit`; bound it after the horizon
                let x = (horizon + 2) as f64;
                let rb = ((x + 1.0) / x).powi(k).powf(p) / (*c as f64).powf(pm1);
                let q = rb.max(limit);
                if q < 1.0 {
                    return sum_with_ratio_bound(gamma.clone(), amp.clone(), p, n, sum, log_g, memo, q);
                }
                SeriesVerdict::Unknown(sum)
            } else {
                // gamma ≡ 1: plain p-series in the amplitude
                let s = k as f64 * p;
                if s < -1.0 {
                    sum_p_series(amp, p, n, sum, memo)
                } else {
                    SeriesVerdict::Divergent
                }
            }
        }
        (_, AmpRatio::ToZero) => {
            // amplitude ratio → 0 and γ ≥ 1: certified once observed ratio < 1/2
            sum_with_shrinking_ratio(gamma.clone(), amp.clone(), p, n, sum, log_g, memo)
        }
        (_, AmpRatio::ToInfinity) => SeriesVerdict::Divergent,
        (CountRule::Powers { base, reps, .. }, AmpRatio::Const(rho)) => {
            if rho > 1.0 {
                return SeriesVerdict::Divergent;
            }
            if rho < 1.0 {
                // γ ≥ 1 so terms ≤ last·rho^{p·k}: geometric bound
                return sum_with_ratio_bound(gamma.clone(), amp.clone(), p, n, sum, log_g, memo, rho.powf(p));
            }
            // rho == 1: block criterion m vs reps^{p-1}
            let beta = *base as f64 / (*reps as f64).powf(pm1);
            if beta >= 1.0 {
                SeriesVerdict::Divergent
            } else {
                // sum blocks until the closed-form remainder is negligible
                sum_powers_blocks(&gamma, amp, p, n, sum, log_g, memo, *base, *reps)
            }
        }
        (CountRule::Geometric { r, .. }, AmpRatio::Const(rho)) if *r >= 2 => {
            // G grows superexponentially: ratio = rho^p/γ(n)^{p-1} → 0
            let _ = rho;
            sum_with_shrinking_gamma(gamma.clone(), amp.clone(), p, n, sum, log_g, memo)
        }
        (CountRule::Polynomial { .. }, AmpRatio::Const(rho)) if rho <= 1.0 => {
            sum_with_shrinking_gamma(gamma.clone(), amp.clone(), p, n, sum, log_g, memo)
        }
        _ => SeriesVerdict::Unknown(sum),
    }
}

fn geometric_tail(sum: f64, last_term: f64, q: f64) -> SeriesVerdict {
    if last_term == 0.0 {
        return SeriesVerdict::Convergent(sum);
    }
    if q < 1.0 {
        SeriesVerdict::Convergent(sum + last_term * q / (1.0 - q))
    } else {
        SeriesVerdict::Divergent
    }
}

#[allow(clippy::too_many_arguments)]
fn sum_with_ratio_bound(
    gamma: CountRule,
    amp: Amplitude,
    p: f64,
    mut n: u64,
    mut sum: f64,
    mut log_g: f64,
    mut memo: f64,
    q: f64,
) -> SeriesVerdict {
    let pm1 = p - 1.0;
    let mut term;
    loop {
        log_g += (gamma.value(n - 1).max(1) as f64).ln();
        let la = amp.log_at(n, &mut memo);
        term = (p * la - pm1 * log_g).exp();
        sum += term;
        let tail = term * q / (1.0 - q);
        if tail <= REL_EPS * sum.max(1e-300) {
            return SeriesVerdict::Convergent(sum + tail);
        }
        if n > MAX_NUMERIC_TERMS {
            return SeriesVerdict::Convergent(sum + tail);
        }
        n += 1;
    }
}

fn sum_p_series(amp: &Amplitude, p: f64, mut n: u64, mut sum: f64, mut memo: f64) -> SeriesVerdict {
    // amplitude polynomial (n+x)^k with kp < -1, gamma ≡ 1
    let (rule, from) = match amp {
        Amplitude::Value { rule, from } => (rule, *from),
        _ => return SeriesVerdict::Unknown(sum),
    };
    let (tail, _) = rule.pure_tail();
    let (c, k, x0) = match tail {
        ScalarRule::Polynomial { c, k, x0 } => (c.abs(), *k, *x0),
        _ => return SeriesVerdict::Unknown(sum),
    };
    let s = k as f64 * p;
    let cp = c.powf(p);
    loop {
        let la = amp.log_at(n, &mut memo);
        sum += (p * la).exp();
        let x = (from + n) as f64 + x0;
        let hi = cp * x.powf(s + 1.0) / -(s + 1.0);
        if hi <= REL_EPS * sum.max(1e-300) || n > MAX_NUMERIC_TERMS {
            return SeriesVerdict::Convergent(sum + hi * 0.5);
        }
        n += 1;
    }
}

fn sum_with_shrinking_ratio(
    gamma: CountRule,
    amp: Amplitude,
    p: f64,
    mut n: u64,
    mut sum: f64,
    mut log_g: f64,
    mut memo: f64,
) -> SeriesVerdict {
    // amplitude per-step ratio → 0 monotonically on the pure tail
    let pm1 = p - 1.0;
    let mut prev = f64::INFINITY;
    loop {
        log_g += (gamma.value(n - 1).max(1) as f64).ln();
        let la = amp.log_at(n, &mut memo);
        let term = (p * la - pm1 * log_g).exp();
        sum += term;
        if prev.is_finite() && term < prev {
            let q = term / prev;
            if q < 0.5 {
                let tail = term * q / (1.0 - q);
                if tail <= REL_EPS * sum.max(1e-300) {
                    return SeriesVerdict::Convergent(sum + tail);
                }
            }
        }
        if n > MAX_NUMERIC_TERMS {
            return SeriesVerdict::Unknown(sum);
        }
        prev = term;
        n += 1;
    }
}

fn sum_with_shrinking_gamma(
    gamma: CountRule,
    amp: Amplitude,
    p: f64,
    mut n: u64,
    mut sum: f64,
    mut log_g: f64,
    mut memo: f64,
) -> SeriesVerdict {
    // γ(n) → ∞ on the pure tail with bounded amplitude ratio
    let pm1 = p - 1.0;
    loop {
        let g = gamma.value(n - 1).max(1) as f64;
        log_g += g.ln();
        let la = amp.log_at(n, &mut memo);
        let term = (p * la - pm1 * log_g).exp();
        sum += term;
        let q = 2.0 / g.powf(pm1); // ratio bound once γ ≥ 2^(1/(p−1))·ρ
        if q < 0.5 {
            let tail = term * q / (1.0 - q);
            if tail <= REL_EPS * sum.max(1e-300) {
                return SeriesVerdict::Convergent(sum + tail);
            }
        }
        if n > MAX_NUMERIC_TERMS {
            return SeriesVerdict::Unknown(sum);
        }
        n += 1;
    }
}

#[allow(clippy::too_many_arguments)]
fn sum_powers_blocks(
    gamma: &CountRule,
    amp: &Amplitude,
    p: f64,
    mut n: u64,
    mut sum: f64,
    mut log_g: f64,
    mut memo: f64,
    base: u64,
    reps: u64,
) -> SeriesVerdict {
    // constant-amplitude terms with powers-gamma: blocks between consecutive
    // doubling generations form a geometric series with ratio base/reps^(p-1)
    let pm1 = p - 1.0;
    let beta = base as f64 / (reps as f64).powf(pm1);
    let mut block_sum = 0.0f64;
    let mut last_block = f64::INFINITY;
    loop {
        let g = gamma.value(n - 1).max(1);
        log_g += (g as f64).ln();
        let la = amp.log_at(n, &mut memo);
        let term = (p * la - pm1 * log_g).exp();
        sum += term;
        block_sum += term;
        if g > 1 {
            // block boundary
            if last_block.is_finite() && block_sum > 0.0 {
                let tail = block_sum * beta / (1.0 - beta);
                if tail <= 1e-12 * sum.max(1e-300) {
                    return SeriesVerdict::Convergent(sum + tail);
                }
            }
            last_block = block_sum;
            block_sum = 0.0;
        }
        if n > MAX_NUMERIC_TERMS {
            let tail = (block_sum + last_block.min(1e300)) * beta / (1.0 - beta);
            return SeriesVerdict::Convergent(sum + tail);
        }
        n += 1;
    }
}

/// `sup_{n ≥ 1} amp(n) / G(n)`: the symmetric closed form for `c_∞`.
pub fn sym_cinf_sup(gamma: &CountRule, g_from: u64, amp: &Amplitude) -> SeriesVerdict {
    let gamma = gamma.skip(g_from);
    let (gtail, goff) = gamma.pure_tail();
    let horizon = goff.max(amp.irregular_horizon()) + 2;
    let mut sup = 0.0f64;
    let mut log_g = 0.0;
    let mut memo = 0.0;
    let mut last = 0.0;
    let mut n = 1u64;
    while n <= horizon {
        log_g += (gamma.value(n - 1).max(1) as f64).ln();
        last = (amp.log_at(n, &mut memo) - log_g).exp();
        sup = sup.max(last);
        n += 1;
    }
    match (gtail, amp.ratio_class()) {
        (CountRule::Constant(c), AmpRatio::Const(rho)) => {
            let q = rho / (*c.max(&1) as f64);
            if q <= 1.0 {
                SeriesVerdict::Convergent(sup)
            } else {
                SeriesVerdict::Divergent
            }
        }
        (_, AmpRatio::ToZero) => {
            // values eventually decrease; scan until certified
            let mut prev = f64::INFINITY;
            loop {
                log_g += (gamma.value(n - 1).max(1) as f64).ln();
                let v = (amp.log_at(n, &mut memo) - log_g).exp();
                sup = sup.max(v);
                if v < prev && v / prev < 0.5 && v < 1e-3 * sup.max(1e-300) {
                    return SeriesVerdict::Convergent(sup);
                }
                if n > MAX_NUMERIC_TERMS {
                    return SeriesVerdict::Unknown(sup);
                }
                prev = v;
                n += 1;
            }
        }
        (_, AmpRatio::ToInfinity) => SeriesVerdict::Divergent,
        (CountRule::Powers { .. }, AmpRatio::Const(rho)) => {
            if rho > 1.0 {
                SeriesVerdict::Divergent
            } else {
                // values never exceed amp(n)·1 ≤ sup of the scanned prefix ∪ ratio ≤ 1 region
                SeriesVerdict::Convergent(sup.max(last))
            }
        }
        (CountRule::Geometric { .. } | CountRule::Polynomial { .. }, AmpRatio::Const(rho)) if rho <= 1.0 => {
            SeriesVerdict::Convergent(sup)
        }
        _ => SeriesVerdict::Unknown(sup),
    }
}

/// Does `G(n)·Π_{j=1..n}|λ(from+j)| → ∞`? (c₀ chaos closed form.)
pub fn product_tends_to_infinity(gamma: &CountRule, g_from: u64, lam: &ScalarRule, l_from: u64) -> Option<bool> {
    let gamma = gamma.skip(g_from);
    let (gtail, _) = gamma.pure_tail();
    let lam = lam.skip(l_from);
    let (ltail, _) = lam.pure_tail();
    let lam_ratio = match ltail {
        ScalarRule::Constant(c) => c.abs(),
        ScalarRule::Geometric { r, .. } => {
            if r.abs() > 1.0 {
                return Some(true);
            } else if r.abs() < 1.0 {
                return Some(false);
            } else {
                1.0
            }
        }
        ScalarRule::Polynomial { k, .. } => {
            if *k > 0 {
                return Some(true);
            } else if *k < 0 {
                return Some(false);
            } else {
                1.0
            }
        }
        ScalarRule::Table { .. } => unreachable!(),
    };
    match gtail {
        CountRule::Constant(c) => {
            let q = lam_ratio * *c.max(&1) as f64;
            if q > 1.0 {
                Some(true)
            } else if q < 1.0 {
                Some(false)
            } else {
                // product eventually constant: → ∞ iff it already diverged, it did not
                Some(false)
            }
        }
        CountRule::Powers { reps, .. } => {
            if lam_ratio > 1.0 {
                Some(true)
            } else if lam_ratio < 1.0 {
                // G(n) ~ n^(log_base reps) polynomial, λ-product geometric → 0
                Some(false)
            } else {
                Some(*reps >= 2) // infinitely many doubling generations
            }
        }
        CountRule::Geometric { r, .. } if *r >= 2 => Some(lam_ratio > 0.0),
        CountRule::Polynomial { k, .. } if *k >= 1 => Some(lam_ratio >= 1.0),
        _ => None,
    }
}
