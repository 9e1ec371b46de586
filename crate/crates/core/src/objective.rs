//! Local cost families, the global objective, optimal-set projections,
//! and numerical verification of the restricted secant inequality.
//!
//! A problem instance is a family of n local costs `f_i: R^p -> R` with
//! analytic gradients. The global cost is `f(x) = sum_i f_i(x)`; the
//! separable stacked cost `sum_i f_i(x_i)` acts on n independent blocks.
//! Alongside values and gradients, each [`Objective`] carries the
//! smoothness constants `L_{f_i}`, the secant constant `nu` of the global
//! cost, and a closed-form description of the optimal set `X*`.
//!
//! The built-in `secvi` family is a seeded piecewise-polynomial/circular
//! family that is nonconvex yet satisfies the restricted secant
//! inequality globally; its optimal set is the interval `[-1, 0]`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{dot, norm, sub};

/// Slack below the declared `nu` tolerated before a sampled secant ratio
/// counts as a violation.
const RSI_SLACK: f64 = 1e-9;
/// Gradient norm below which a point is accepted as a minimizer.
const MINIMIZER_TOL: f64 = 1e-8;

// ---------------------------------------------------------------------------
// Stacked vectors
// ---------------------------------------------------------------------------

/// A point of the stacked space `R^{n p}`: n agent blocks of dimension p,
/// stored contiguously.
#[derive(Debug, Clone, PartialEq)]
pub struct StackedPoint {
    pub n: usize,
    pub p: usize,
    pub data: Vec<f64>,
}

impl StackedPoint {
    pub fn new(n: usize, p: usize, data: Vec<f64>) -> Self {
        assert_eq!(data.len(), n * p, "stacked length must be n*p");
        Self { n, p, data }
    }

    pub fn zeros(n: usize, p: usize) -> Self {
        Self { n, p, data: vec![0.0; n * p] }
    }

    pub fn block(&self, i: usize) -> &[f64] {
        &self.data[i * self.p..(i + 1) * self.p]
    }

    pub fn block_mean(&self) -> Vec<f64> {
        block_mean(&self.data, self.n, self.p)
    }
}

/// Mean of the n blocks of a stacked vector.
pub fn block_mean(x: &[f64], n: usize, p: usize) -> Vec<f64> {
    assert_eq!(x.len(), n * p);
    let mut m = vec![0.0; p];
    for i in 0..n {
        for k in 0..p {
            m[k] += x[i * p + k];
        }
    }
    for v in &mut m {
        *v /= n as f64;
    }
    m
}

/// Blockwise centering `(K_n (x) I_p) x`: subtract the block mean from
/// every block.
pub fn center_blocks(x: &[f64], n: usize, p: usize) -> Vec<f64> {
    let m = block_mean(x, n, p);
    let mut y = x.to_vec();
    for i in 0..n {
        for k in 0..p {
            y[i * p + k] -= m[k];
        }
    }
    y
}

// ---------------------------------------------------------------------------
// Piecewise base curve shared by `example1` and `secvi`
// ---------------------------------------------------------------------------

/// Branch boundaries: 0, sqrt(2)/2, 1 (and -1 for the seeded family).
mod curve {
    pub const SQRT2: f64 = std::f64::consts::SQRT_2;
    pub const HALF_SQRT2: f64 = std::f64::consts::FRAC_1_SQRT_2;

    /// sqrt((sqrt(2)-1)/2): gradient of the curve at x = 1, also the
    /// smallest secant ratio the curve attains on x > 0.
    pub fn corner_slope() -> f64 {
        ((SQRT2 - 1.0) / 2.0).sqrt()
    }

    /// Additive constant making the quadratic tail continuous at x = 1.
    pub fn tail_offset() -> f64 {
        (2.0 * SQRT2 - 2.0).sqrt() + (5.0 - 5.0 * SQRT2) / 4.0
    }

    /// Base curve on x >= 0 (zero on x < 0): two circular arcs glued to a
    /// quadratic tail.
    pub fn value(x: f64) -> f64 {
        if x < 0.0 {
            0.0
        } else if x < HALF_SQRT2 {
            1.0 - (1.0 - x * x).sqrt()
        } else if x < 1.0 {
            (1.0 - (x - SQRT2) * (x - SQRT2)).sqrt() - SQRT2 + 1.0
        } else {
            let d = x - 1.0 + corner_slope();
            0.5 * d * d + tail_offset()
        }
    }

    pub fn grad(x: f64) -> f64 {
        if x < 0.0 {
            0.0
        } else if x < HALF_SQRT2 {
            x / (1.0 - x * x).sqrt()
        } else if x < 1.0 {
            (SQRT2 - x) / (1.0 - (x - SQRT2) * (x - SQRT2)).sqrt()
        } else {
            x - 1.0 + corner_slope()
        }
    }
}

// ---------------------------------------------------------------------------
// Local cost families
// ---------------------------------------------------------------------------

/// One agent's differentiable cost with analytic gradient.
#[derive(Debug, Clone, PartialEq)]
pub enum LocalCost {
    /// Identically zero (consensus-only runs).
    Zero,
    /// `0.5 ||x - c||^2`.
    Quadratic { center: Vec<f64> },
    /// `0.5 ||diag(s) x||^2`, gradient `diag(s^2) x`.
    DiagQuadratic { scale: Vec<f64> },
    /// The nonconvex base curve: zero on x <= 0, circular arcs and a
    /// quadratic tail on x > 0. Scalar only.
    Example1,
    /// `x^4`. Scalar only; the canonical counterexample whose secant
    /// ratio `4 x^2` vanishes at the minimizer, so no positive secant
    /// constant is valid.
    Quartic,
    /// Seeded modification of the base curve with per-agent coefficients
    /// (b1, b2, b3). Scalar only. Individually nonconvex, and
    /// discontinuous at x = -1 when b2 != 0; the coefficient constraints
    /// sum(b2) = sum(b3) = 0 make only the *sum* of the family smooth
    /// there.
    SecVi { b1: f64, b2: f64, b3: f64 },
}

impl LocalCost {
    pub fn value(&self, x: &[f64]) -> f64 {
        match self {
            LocalCost::Zero => 0.0,
            LocalCost::Quadratic { center } => {
                0.5 * x.iter().zip(center).map(|(a, c)| (a - c) * (a - c)).sum::<f64>()
            }
            LocalCost::DiagQuadratic { scale } => {
                0.5 * x.iter().zip(scale).map(|(a, s)| (s * a) * (s * a)).sum::<f64>()
            }
            LocalCost::Example1 => curve::value(x[0]),
            LocalCost::Quartic => x[0] * x[0] * x[0] * x[0],
            LocalCost::SecVi { b1, b2, b3 } => {
                let t = x[0];
                if t <= -1.0 {
                    b1 * (t + 1.0) * (t + 1.0)
                } else if t < 0.0 {
                    b2 * t * t * t * t
                } else {
                    curve::value(t) + b3 * t * t
                }
            }
        }
    }

    pub fn grad(&self, x: &[f64]) -> Vec<f64> {
        match self {
            LocalCost::Zero => vec![0.0; x.len()],
            LocalCost::Quadratic { center } => {
                x.iter().zip(center).map(|(a, c)| a - c).collect()
            }
            LocalCost::DiagQuadratic { scale } => {
                x.iter().zip(scale).map(|(a, s)| s * s * a).collect()
            }
            LocalCost::Example1 => vec![curve::grad(x[0])],
            LocalCost::Quartic => vec![4.0 * x[0] * x[0] * x[0]],
            LocalCost::SecVi { b1, b2, b3 } => {
                let t = x[0];
                let g = if t <= -1.0 {
                    2.0 * b1 * (t + 1.0)
                } else if t < 0.0 {
                    4.0 * b2 * t * t * t
                } else if t < 1.0 {
                    curve::grad(t) + 2.0 * b3 * t
                } else {
                    (2.0 * b3 + 1.0) * t - 1.0 + curve::corner_slope()
                };
                vec![g]
            }
        }
    }
}

/// Per-agent coefficients of the seeded piecewise family.
///
/// Invariants: `sum(b1) > 0`, `|sum(b2)| <= 1e-12`, `|sum(b3)| <= 1e-12`.
#[derive(Debug, Clone, PartialEq)]
pub struct SecViCoefficients {
    pub b1: Vec<f64>,
    pub b2: Vec<f64>,
    pub b3: Vec<f64>,
}

// ---------------------------------------------------------------------------
// Optimal set
// ---------------------------------------------------------------------------

/// Closed-form description of the optimal set `X*`.
#[derive(Debug, Clone, PartialEq)]
pub enum OptSet {
    Singleton(Vec<f64>),
    /// Axis-aligned box; entries may be infinite (half-lines).
    Box { lo: Vec<f64>, hi: Vec<f64> },
    /// Sample list only: projection unsupported.
    Samples(Vec<Vec<f64>>),
}

// ---------------------------------------------------------------------------
// Objective
// ---------------------------------------------------------------------------

/// A family of n local costs plus the constants the rate calculus needs.
#[derive(Debug, Clone)]
pub struct Objective {
    n: usize,
    p: usize,
    locals: Vec<LocalCost>,
    /// Per-agent gradient Lipschitz constants `L_{f_i}`.
    lipschitz: Vec<f64>,
    /// Secant constant of the global cost.
    nu: f64,
    /// True when `nu` came from sampling rather than a closed form.
    nu_estimated: bool,
    opt_set: OptSet,
}

impl Objective {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn opt_set(&self) -> &OptSet {
        &self.opt_set
    }

    pub fn nu(&self) -> f64 {
        self.nu
    }

    pub fn nu_is_estimated(&self) -> bool {
        self.nu_estimated
    }

    /// Per-agent smoothness constants.
    pub fn lipschitz(&self) -> &[f64] {
        &self.lipschitz
    }

    /// `L_f = max_i L_{f_i}`.
    pub fn lipschitz_global(&self) -> f64 {
        self.lipschitz.iter().cloned().fold(0.0, f64::max)
    }

    pub fn local(&self, i: usize) -> &LocalCost {
        &self.locals[i]
    }

    /// Replace the declared secant constant by a sampled estimate scaled
    /// by a 0.9 safety factor.
    pub fn set_estimated_nu(&mut self, sampled_min_ratio: f64) {
        self.nu = 0.9 * sampled_min_ratio;
        self.nu_estimated = true;
    }

    // -- constructors -------------------------------------------------------

    /// `f_i(x) = 0.5 ||x - c_i||^2`; optimal set is the singleton mean of
    /// the centers and the global secant constant is exactly n.
    pub fn quadratic(centers: Vec<Vec<f64>>) -> Result<Self> {
        let n = centers.len();
        if n == 0 {
            return Err(Error::DimensionMismatch("quadratic family needs >= 1 center".into()));
        }
        let p = centers[0].len();
        if p == 0 || centers.iter().any(|c| c.len() != p) {
            return Err(Error::DimensionMismatch("centers must share a positive dimension".into()));
        }
        let mut mean = vec![0.0; p];
        for c in &centers {
            for k in 0..p {
                mean[k] += c[k];
            }
        }
        for v in &mut mean {
            *v /= n as f64;
        }
        Ok(Self {
            n,
            p,
            locals: centers.into_iter().map(|center| LocalCost::Quadratic { center }).collect(),
            lipschitz: vec![1.0; n],
            nu: n as f64,
            nu_estimated: false,
            opt_set: OptSet::Singleton(mean),
        })
    }

    /// `f_i(x) = 0.5 ||diag(s) x||^2` for every agent (test family).
    pub fn diag_quadratic(n: usize, scale: Vec<f64>) -> Result<Self> {
        let p = scale.len();
        if n == 0 || p == 0 || scale.iter().any(|s| *s <= 0.0) {
            return Err(Error::DimensionMismatch("diag quadratic needs positive scales".into()));
        }
        let lmax = scale.iter().map(|s| s * s).fold(0.0, f64::max);
        let lmin = scale.iter().map(|s| s * s).fold(f64::INFINITY, f64::min);
        Ok(Self {
            n,
            p,
            locals: vec![LocalCost::DiagQuadratic { scale }; n],
            lipschitz: vec![lmax; n],
            nu: n as f64 * lmin,
            nu_estimated: false,
            opt_set: OptSet::Singleton(vec![0.0; p]),
        })
    }

    /// Every agent carries the nonconvex base curve; the optimal set is
    /// the half-line x <= 0.
    pub fn example1(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::DimensionMismatch("need at least one agent".into()));
        }
        Ok(Self {
            n,
            p: 1,
            locals: vec![LocalCost::Example1; n],
            lipschitz: vec![2.0 * curve::SQRT2; n],
            nu: curve::corner_slope(),
            nu_estimated: false,
            opt_set: OptSet::Box { lo: vec![f64::NEG_INFINITY], hi: vec![0.0] },
        })
    }

    /// Identically-zero costs: the flow reduces to pure consensus. Every
    /// point is optimal, so the declared secant constant is zero and the
    /// rate calculus rejects this family.
    pub fn zero(n: usize, p: usize) -> Result<Self> {
        if n == 0 || p == 0 {
            return Err(Error::DimensionMismatch("need n >= 1 and p >= 1".into()));
        }
        Ok(Self {
            n,
            p,
            locals: vec![LocalCost::Zero; n],
            lipschitz: vec![0.0; n],
            nu: 0.0,
            nu_estimated: false,
            opt_set: OptSet::Box {
                lo: vec![f64::NEG_INFINITY; p],
                hi: vec![f64::INFINITY; p],
            },
        })
    }

    /// Override the optimal-set description (test scaffolding for
    /// degenerate families).
    pub fn with_opt_set(mut self, opt_set: OptSet) -> Self {
        self.opt_set = opt_set;
        self
    }

    /// `f_i(x) = x^4` for every agent (counterexample family; the
    /// declared `nu` is whatever the caller wants to test against).
    pub fn quartic(n: usize, nu: f64) -> Result<Self> {
        if n == 0 {
            return Err(Error::DimensionMismatch("need at least one agent".into()));
        }
        Ok(Self {
            n,
            p: 1,
            locals: vec![LocalCost::Quartic; n],
            // Valid on the reference sampling box [-3, 3] only.
            lipschitz: vec![108.0; n],
            nu,
            nu_estimated: false,
            opt_set: OptSet::Singleton(vec![0.0]),
        })
    }

    /// Seeded family of n modified base curves.
    ///
    /// Coefficients: `b1 ~ U(0.05, 1)`, `b2, b3 ~ U(-1, 1)` mean-subtracted
    /// so their sums vanish. The global cost then satisfies the restricted
    /// secant inequality with `nu = min(sqrt((sqrt2-1)/2), 2 sum(b1))` and
    /// its optimal set is the interval [-1, 0].
    pub fn make_secvi(n: usize, seed: u64) -> Result<Self> {
        if n == 0 {
            return Err(Error::DimensionMismatch("need at least one agent".into()));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let b1: Vec<f64> = (0..n).map(|_| rng.gen_range(0.05..1.0)).collect();
        let mut b2: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let mut b3: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        for b in [&mut b2, &mut b3] {
            let m = b.iter().sum::<f64>() / n as f64;
            for v in b.iter_mut() {
                *v -= m;
            }
        }
        Ok(Self::from_secvi_coefficients(SecViCoefficients { b1, b2, b3 }))
    }

    /// Build the seeded family from explicit coefficients (callers are
    /// expected to honor the sum constraints).
    pub fn from_secvi_coefficients(c: SecViCoefficients) -> Self {
        let n = c.b1.len();
        let sum_b1: f64 = c.b1.iter().sum();
        let nu = curve::corner_slope().min(2.0 * sum_b1);
        let locals: Vec<LocalCost> = (0..n)
            .map(|i| LocalCost::SecVi { b1: c.b1[i], b2: c.b2[i], b3: c.b3[i] })
            .collect();
        // Branch-wise bound on |f_i''|; the jump at x = -1 (for b2 != 0)
        // is excluded, only the sum of the family is smooth there.
        let lipschitz: Vec<f64> = (0..n)
            .map(|i| {
                (2.0 * c.b1[i])
                    .max(12.0 * c.b2[i].abs())
                    .max(2.0 * curve::SQRT2 + 2.0 * c.b3[i].abs())
            })
            .collect();
        Self {
            n,
            p: 1,
            locals,
            lipschitz,
            nu,
            nu_estimated: false,
            opt_set: OptSet::Box { lo: vec![-1.0], hi: vec![0.0] },
        }
    }

    /// Extract the seeded-family coefficients, if this objective is one.
    pub fn secvi_coefficients(&self) -> Option<SecViCoefficients> {
        let mut c = SecViCoefficients { b1: Vec::new(), b2: Vec::new(), b3: Vec::new() };
        for l in &self.locals {
            match l {
                LocalCost::SecVi { b1, b2, b3 } => {
                    c.b1.push(*b1);
                    c.b2.push(*b2);
                    c.b3.push(*b3);
                }
                _ => return None,
            }
        }
        Some(c)
    }

    // -- evaluation ---------------------------------------------------------

    /// `f_i(x)` for a point of the decision space.
    pub fn value_local(&self, i: usize, x: &[f64]) -> f64 {
        self.locals[i].value(x)
    }

    /// Analytic `grad f_i(x)`.
    pub fn grad_local(&self, i: usize, x: &[f64]) -> Vec<f64> {
        self.locals[i].grad(x)
    }

    /// Global cost `f(x) = sum_i f_i(x)`.
    pub fn value_global(&self, x: &[f64]) -> f64 {
        (0..self.n).map(|i| self.locals[i].value(x)).sum()
    }

    /// Gradient of the global cost.
    pub fn grad_global(&self, x: &[f64]) -> Vec<f64> {
        let mut g = vec![0.0; self.p];
        for i in 0..self.n {
            let gi = self.locals[i].grad(x);
            for k in 0..self.p {
                g[k] += gi[k];
            }
        }
        g
    }

    /// Gradient of the separable stacked cost: block i is
    /// `grad f_i(x_i)`.
    pub fn grad_stacked(&self, bx: &[f64]) -> Vec<f64> {
        assert_eq!(bx.len(), self.n * self.p, "stacked point length mismatch");
        let mut g = vec![0.0; self.n * self.p];
        for i in 0..self.n {
            let gi = self.locals[i].grad(&bx[i * self.p..(i + 1) * self.p]);
            g[i * self.p..(i + 1) * self.p].copy_from_slice(&gi);
        }
        g
    }

    // -- projections --------------------------------------------------------

    /// Euclidean projection onto `X*` (singleton or box form).
    pub fn project_opt(&self, x: &[f64]) -> Result<Vec<f64>> {
        match &self.opt_set {
            OptSet::Singleton(s) => Ok(s.clone()),
            OptSet::Box { lo, hi } => {
                Ok(x.iter().zip(lo.iter().zip(hi)).map(|(v, (l, h))| v.max(*l).min(*h)).collect())
            }
            OptSet::Samples(_) => Err(Error::UnsupportedOptSet),
        }
    }

    /// Projection of a stacked point onto the consensus optimal set
    /// `{1_n (x) y : y in X*}`: project the block mean and replicate it.
    pub fn project_consensus_opt(&self, bx: &[f64]) -> Result<Vec<f64>> {
        let a = block_mean(bx, self.n, self.p);
        let y = self.project_opt(&a)?;
        let mut out = vec![0.0; self.n * self.p];
        for i in 0..self.n {
            out[i * self.p..(i + 1) * self.p].copy_from_slice(&y);
        }
        Ok(out)
    }

    // -- verification -------------------------------------------------------

    /// Sample the secant ratio
    /// `(grad f(x) - grad f(P(x)))^T (x - P(x)) / ||x - P(x)||^2`
    /// at seeded uniform points and report the minimum against the
    /// declared `nu`.
    pub fn verify_rsi(&self, sampler: &SampleSpec) -> Result<RsiReport> {
        let mut rng = ChaCha8Rng::seed_from_u64(sampler.seed);
        let mut min_ratio = f64::INFINITY;
        let mut worst_point = None;
        let mut violating_points = Vec::new();
        let mut violation_count = 0usize;
        let mut used = 0usize;
        for _ in 0..sampler.count {
            let x: Vec<f64> =
                (0..self.p).map(|_| rng.gen_range(-sampler.radius..sampler.radius)).collect();
            let px = self.project_opt(&x)?;
            let d = sub(&x, &px);
            let dist2 = dot(&d, &d);
            if dist2 <= 1e-24 {
                continue;
            }
            used += 1;
            let gd = sub(&self.grad_global(&x), &self.grad_global(&px));
            let ratio = dot(&gd, &d) / dist2;
            if ratio < min_ratio {
                min_ratio = ratio;
                worst_point = Some(x.clone());
            }
            if ratio < self.nu - RSI_SLACK {
                violation_count += 1;
                if violating_points.len() < 32 {
                    violating_points.push(RsiViolation { point: x, ratio });
                }
            }
        }
        let pass = violation_count == 0 && used > 0;
        Ok(RsiReport {
            nu: self.nu,
            min_ratio,
            worst_point,
            violating_points,
            violation_count,
            samples_used: used,
            pass,
        })
    }

    /// True when the stacked gradient is constant over the given
    /// minimizers (max pairwise distance <= 1e-8). Errors with
    /// `NotAMinimizer` if a sample has a non-vanishing global gradient.
    pub fn check_gradient_singleton(&self, samples: &[Vec<f64>]) -> Result<bool> {
        let mut stacked = Vec::with_capacity(samples.len());
        for s in samples {
            let gn = norm(&self.grad_global(s));
            if gn > MINIMIZER_TOL {
                return Err(Error::NotAMinimizer { grad_norm: gn });
            }
            let mut tiled = vec![0.0; self.n * self.p];
            for i in 0..self.n {
                tiled[i * self.p..(i + 1) * self.p].copy_from_slice(s);
            }
            stacked.push(self.grad_stacked(&tiled));
        }
        for a in 0..stacked.len() {
            for b in (a + 1)..stacked.len() {
                if norm(&sub(&stacked[a], &stacked[b])) > MINIMIZER_TOL {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    }

    /// Sampled per-agent gradient Lipschitz estimates
    /// `max ||grad f_i(a) - grad f_i(b)|| / ||a - b||` over seeded pairs.
    pub fn estimate_lipschitz(&self, sampler: &SampleSpec) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(sampler.seed);
        let mut out = vec![0.0; self.n];
        for (i, est) in out.iter_mut().enumerate() {
            for _ in 0..sampler.count {
                let a: Vec<f64> =
                    (0..self.p).map(|_| rng.gen_range(-sampler.radius..sampler.radius)).collect();
                let b: Vec<f64> =
                    (0..self.p).map(|_| rng.gen_range(-sampler.radius..sampler.radius)).collect();
                let d = sub(&a, &b);
                let dn = norm(&d);
                if dn <= 1e-12 {
                    continue;
                }
                let gd = sub(&self.grad_local(i, &a), &self.grad_local(i, &b));
                *est = f64::max(*est, norm(&gd) / dn);
            }
        }
        out
    }
}

/// Seeded uniform sampling plan on `[-radius, radius]^p`.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct SampleSpec {
    pub count: usize,
    pub radius: f64,
    pub seed: u64,
}

#[derive(Debug, Clone)]
pub struct RsiViolation {
    pub point: Vec<f64>,
    pub ratio: f64,
}

/// Outcome of [`Objective::verify_rsi`].
#[derive(Debug, Clone)]
pub struct RsiReport {
    /// The declared constant the samples were tested against.
    pub nu: f64,
    pub min_ratio: f64,
    pub worst_point: Option<Vec<f64>>,
    /// First violations encountered (capped at 32).
    pub violating_points: Vec<RsiViolation>,
    pub violation_count: usize,
    pub samples_used: usize,
    pub pass: bool,
}

/// Objective section of the experiment config.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "lowercase", deny_unknown_fields)]
pub enum ObjectiveSpec {
    Secvi { n: usize, seed: u64 },
    Quadratic { centers: Vec<Vec<f64>> },
    Example1,
    Zero,
}

impl ObjectiveSpec {
    /// Instantiate; `graph_n` supplies the agent count for families that
    /// do not carry their own.
    pub fn build(&self, graph_n: usize) -> Result<Objective> {
        match self {
            ObjectiveSpec::Secvi { n, seed } => Objective::make_secvi(*n, *seed),
            ObjectiveSpec::Quadratic { centers } => Objective::quadratic(centers.clone()),
            ObjectiveSpec::Example1 => Objective::example1(graph_n),
            ObjectiveSpec::Zero => Objective::zero(graph_n, 1),
        }
    }
}

/// Central finite difference of a scalar field (test oracle).
pub fn central_difference<F: Fn(&[f64]) -> f64>(f: F, x: &[f64], step: f64) -> Vec<f64> {
    let mut g = vec![0.0; x.len()];
    let mut xp = x.to_vec();
    for k in 0..x.len() {
        let orig = xp[k];
        xp[k] = orig + step;
        let fp = f(&xp);
        xp[k] = orig - step;
        let fm = f(&xp);
        xp[k] = orig;
        g[k] = (fp - fm) / (2.0 * step);
    }
    g
}

/// Draw a seeded uniform stacked point from `[lo, hi]^{n p}` (used by
/// tests and the harness initializer).
pub fn uniform_stacked(n: usize, p: usize, lo: f64, hi: f64, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n * p).map(|_| rng.gen_range(lo..hi)).collect()
}
