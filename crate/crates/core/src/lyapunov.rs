//! Lyapunov evaluation and runtime decay certificates.
//!
//! The certified function is assembled from three pieces, all measured
//! against the moving reference pair `x_ref = P(x)` (projection onto the
//! consensus optimal set) and `v_ref = -(1/beta) grad f~(x_ref)`:
//!
//! ```text
//! V1 = 1/2 ||x - x_ref||^2 + 1/2 ||v - v_ref||^2_{Lpinv (x) I}
//! V2 = 2 eps1 V1 + (alpha / 2 beta) ||v - v_ref||^2
//! V3 = x^T (K_n (x) I) (v - v_ref)
//! V  = V2 + V3
//! ```
//!
//! `V` is sandwiched between `eps4` and `eps3` times the squared
//! reference distance, decays along the flow at exponent `eps2/eps3`
//! when `alpha` clears its threshold, and contracts per iteration of the
//! discrete method when the step also stays below `h_max`. The checkers
//! report `precondition-unmet` instead of failing when those thresholds
//! are not satisfied.
//!
//! The reference pair is recomputed at every evaluated state: with an
//! interval optimal set the projection moves, and freezing it would
//! break the decay inequality.

use crate::dynamics::{FlowParams, NetworkState, Trajectory};
use crate::error::Result;
use crate::graph::SpectralData;
use crate::linalg::{dot, norm, sub};
use crate::objective::{center_blocks, Objective};
use crate::rates::{alpha_threshold, ProblemConstants, RateConstants};

/// Multiplicative slack for the continuous-decay bound.
const CT_REL_TOL: f64 = 1e-6;
/// Multiplicative slack for the per-iteration contraction bound.
const DT_REL_TOL: f64 = 1e-9;
/// Absolute floor so exact-equilibrium trajectories (V identically 0 up
/// to roundoff) compare cleanly against a zero bound.
const ABS_FLOOR: f64 = 1e-24;

/// Everything needed to evaluate `V` along one run.
#[derive(Debug, Clone)]
pub struct LyapunovContext<'a> {
    pub spectral: &'a SpectralData,
    pub obj: &'a Objective,
    pub params: FlowParams,
    pub eps1: f64,
}

impl<'a> LyapunovContext<'a> {
    pub fn new(spectral: &'a SpectralData, obj: &'a Objective, params: FlowParams, eps1: f64) -> Self {
        assert!(eps1 > 0.0, "eps1 must be positive");
        Self { spectral, obj, params, eps1 }
    }
}

/// `V` and its pieces at one state.
#[derive(Debug, Clone)]
pub struct LyapunovSample {
    pub t_or_k: f64,
    pub v1: f64,
    pub v2: f64,
    pub v3: f64,
    pub v: f64,
    /// Projection point the sample was measured against.
    pub x_ref: Vec<f64>,
    pub v_ref: Vec<f64>,
}

/// The moving reference pair: the projection of `x` onto the consensus
/// optimal set and the dual that balances the stacked gradient there.
pub fn reference_pair(ctx: &LyapunovContext, s: &NetworkState) -> Result<(Vec<f64>, Vec<f64>)> {
    let x_ref = ctx.obj.project_consensus_opt(&s.x)?;
    let grad = ctx.obj.grad_stacked(&x_ref);
    let v_ref = grad.iter().map(|g| -g / ctx.params.beta).collect();
    Ok((x_ref, v_ref))
}

/// Evaluate `V1, V2, V3, V` at a state.
pub fn eval_v(ctx: &LyapunovContext, s: &NetworkState, t_or_k: f64) -> Result<LyapunovSample> {
    let p = ctx.obj.p();
    let n = ctx.obj.n();
    let (x_ref, v_ref) = reference_pair(ctx, s)?;
    let dx = sub(&s.x, &x_ref);
    let dv = sub(&s.v, &v_ref);

    let weighted = ctx.spectral.apply_laplacian_pinv(&dv, p);
    let v1 = 0.5 * dot(&dx, &dx) + 0.5 * dot(&dv, &weighted);
    let v2 = 2.0 * ctx.eps1 * v1 + ctx.params.alpha / (2.0 * ctx.params.beta) * dot(&dv, &dv);
    let centered = center_blocks(&dv, n, p);
    let v3 = dot(&s.x, &centered);
    Ok(LyapunovSample { t_or_k, v1, v2, v3, v: v2 + v3, x_ref, v_ref })
}

/// Evaluate the Lyapunov pieces at every recorded point of a trajectory.
pub fn eval_series(ctx: &LyapunovContext, traj: &Trajectory) -> Result<Vec<LyapunovSample>> {
    traj.points.iter().map(|pt| eval_v(ctx, &pt.state, pt.t)).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CheckStatus {
    Passed,
    Failed,
    /// The certificate does not apply (gain or step outside thresholds);
    /// the check is skipped, not failed.
    PreconditionUnmet,
}

impl std::fmt::Display for CheckStatus {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CheckStatus::Passed => write!(f, "passed"),
            CheckStatus::Failed => write!(f, "failed"),
            CheckStatus::PreconditionUnmet => write!(f, "precondition-unmet"),
        }
    }
}

/// One row of a decay report: the Lyapunov pieces plus the bound the
/// value was compared against.
#[derive(Debug, Clone)]
pub struct DecayRow {
    pub t_or_k: f64,
    pub v1: f64,
    pub v2: f64,
    pub v3: f64,
    pub v: f64,
    pub bound: f64,
}

#[derive(Debug, Clone)]
pub struct DecayReport {
    pub status: CheckStatus,
    pub note: Option<String>,
    /// Largest value/bound ratio observed; at most 1 on a pass.
    pub worst_ratio: f64,
    pub failures: usize,
    /// Failures of the derived residual bound (discrete check only).
    pub residual_failures: usize,
    pub rows: Vec<DecayRow>,
}

impl DecayReport {
    fn unmet(note: String) -> Self {
        Self {
            status: CheckStatus::PreconditionUnmet,
            note: Some(note),
            worst_ratio: 0.0,
            failures: 0,
            residual_failures: 0,
            rows: Vec::new(),
        }
    }
}

fn track(worst: &mut f64, failures: &mut usize, value: f64, bound: f64) {
    if bound > 0.0 {
        *worst = worst.max(value / bound);
    }
    if value > bound {
        *failures += 1;
    }
}

/// Certify `V(t) <= V(0) exp(-rate t)` along a main-flow trajectory.
///
/// `rate` is the Lyapunov decay exponent `eps2 / eps3`. Reports
/// `precondition-unmet` when the gain does not clear its threshold.
pub fn check_ct_decay(ctx: &LyapunovContext, traj: &Trajectory, rate: f64) -> Result<DecayReport> {
    if let Some(note) = precondition_note(ctx, None) {
        return Ok(DecayReport::unmet(note));
    }
    let samples = eval_series(ctx, traj)?;
    let v0 = samples[0].v;
    let t0 = samples[0].t_or_k;
    let mut worst = 0.0;
    let mut failures = 0;
    let rows = samples
        .iter()
        .map(|s| {
            let bound =
                v0 * (-rate * (s.t_or_k - t0)).exp() * (1.0 + CT_REL_TOL) + ABS_FLOOR * (1.0 + v0);
            track(&mut worst, &mut failures, s.v, bound);
            DecayRow { t_or_k: s.t_or_k, v1: s.v1, v2: s.v2, v3: s.v3, v: s.v, bound }
        })
        .collect();
    Ok(DecayReport {
        status: if failures == 0 { CheckStatus::Passed } else { CheckStatus::Failed },
        note: None,
        worst_ratio: worst,
        failures,
        residual_failures: 0,
        rows,
    })
}

/// Certify the per-iteration contraction
/// `V(k+1) <= (1 - h (2 eps2 eps4 - h eta eps3 eps5) / (2 eps3 eps4)) V(k)`
/// along a discrete trajectory, plus the derived residual bound
/// `||x(k) - P(x(k))|| <= dt_rate(h)^k sqrt(V(0)/eps4)`.
///
/// Consecutive recorded points further than one step apart are compared
/// against the contraction raised to the step gap.
pub fn check_dt_decay(
    ctx: &LyapunovContext,
    traj: &Trajectory,
    rc: &RateConstants,
    h: f64,
) -> Result<DecayReport> {
    if let Some(note) = precondition_note(ctx, Some((rc, h))) {
        return Ok(DecayReport::unmet(note));
    }
    let contraction = rc.dt_v_contraction(h);
    let samples = eval_series(ctx, traj)?;
    let v0 = samples[0].v;
    let mut worst = 0.0;
    let mut failures = 0;
    let mut rows = Vec::with_capacity(samples.len());
    rows.push(DecayRow {
        t_or_k: samples[0].t_or_k,
        v1: samples[0].v1,
        v2: samples[0].v2,
        v3: samples[0].v3,
        v: v0,
        bound: v0,
    });
    for w in samples.windows(2) {
        let (prev, cur) = (&w[0], &w[1]);
        let gap = (cur.t_or_k - prev.t_or_k).round() as i32;
        let bound =
            contraction.powi(gap) * prev.v * (1.0 + DT_REL_TOL) + ABS_FLOOR * (1.0 + v0);
        track(&mut worst, &mut failures, cur.v, bound);
        rows.push(DecayRow { t_or_k: cur.t_or_k, v1: cur.v1, v2: cur.v2, v3: cur.v3, v: cur.v, bound });
    }

    // Derived distance bound from the sandwich lower constant.
    let mut residual_failures = 0;
    let dist_scale = (v0.max(0.0) / rc.eps4).sqrt();
    for (pt, s) in traj.points.iter().zip(&samples) {
        let dist = norm(&sub(&pt.state.x, &s.x_ref));
        let bound = rc.dt_rate(h).powi(pt.step as i32) * dist_scale * (1.0 + DT_REL_TOL)
            + ABS_FLOOR * (1.0 + dist_scale);
        if dist > bound {
            residual_failures += 1;
        }
    }

    let ok = failures == 0 && residual_failures == 0;
    Ok(DecayReport {
        status: if ok { CheckStatus::Passed } else { CheckStatus::Failed },
        note: None,
        worst_ratio: worst,
        failures,
        residual_failures,
        rows,
    })
}

/// `Some(reason)` when the certificate thresholds are not met.
fn precondition_note(ctx: &LyapunovContext, dt: Option<(&RateConstants, f64)>) -> Option<String> {
    let pc = match ProblemConstants::from_parts(ctx.obj, ctx.spectral, &ctx.params) {
        Ok(pc) => pc,
        Err(e) => return Some(format!("rate constants unavailable: {e}")),
    };
    let threshold = alpha_threshold(&pc);
    if pc.alpha <= threshold {
        return Some(format!("alpha {} at or below threshold {threshold}", pc.alpha));
    }
    if let Some((rc, h)) = dt {
        if h >= rc.h_max {
            return Some(format!("step {h} at or above ceiling {}", rc.h_max));
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::discrete::run_dt;
    use crate::dynamics::{equilibrium_state, integrate, Flow, IntegrationMethod};
    use crate::graph::{build_graph, spectral, TopologySpec};
    use crate::objective::{uniform_stacked, OptSet};
    use crate::rates::rate_constants;
    use approx::assert_abs_diff_eq;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    #[test]
    fn hand_computed_value_on_two_nodes() {
        // Unit edge, zero cost declared optimal at the origin, unit gains
        // and unit eps1: V1 = 1.5, V2 = 4, V3 = 2, V = 6.
        let g = build_graph(&TopologySpec::complete(2)).unwrap();
        let sp = spectral(&g).unwrap();
        let obj = Objective::zero(2, 1).unwrap().with_opt_set(OptSet::Singleton(vec![0.0]));
        let params = FlowParams::new(1.0, 1.0).unwrap();
        let ctx = LyapunovContext::new(&sp, &obj, params, 1.0);
        let s = NetworkState::new(vec![1.0, -1.0], vec![1.0, -1.0]);
        let sample = eval_v(&ctx, &s, 0.0).unwrap();
        assert_abs_diff_eq!(sample.v1, 1.5, epsilon = 1e-12);
        assert_abs_diff_eq!(sample.v2, 4.0, epsilon = 1e-12);
        assert_abs_diff_eq!(sample.v3, 2.0, epsilon = 1e-12);
        assert_abs_diff_eq!(sample.v, 6.0, epsilon = 1e-12);
    }

    #[test]
    fn reference_pair_examples() {
        let g = build_graph(&TopologySpec::complete(2)).unwrap();
        let sp = spectral(&g).unwrap();
        let params = FlowParams::new(1.0, 2.0).unwrap();

        // Quadratic: singleton at the center mean; dual balances each
        // agent's pull toward its own center.
        let obj = Objective::quadratic(vec![vec![1.0], vec![-1.0]]).unwrap();
        let ctx = LyapunovContext::new(&sp, &obj, params, 1.0);
        let s = NetworkState::new(vec![3.0, 5.0], vec![0.0, 0.0]);
        let (x_ref, v_ref) = reference_pair(&ctx, &s).unwrap();
        assert_eq!(x_ref, vec![0.0, 0.0]);
        // v_ref_i = -(1/beta) (mean - c_i).
        assert_eq!(v_ref, vec![0.5, -0.5]);

        // A state already on the optimal set projects to itself.
        let secvi = Objective::make_secvi(2, 8).unwrap();
        let ctx2 = LyapunovContext::new(&sp, &secvi, params, 1.0);
        let s2 = NetworkState::new(vec![-0.25, -0.25], vec![0.0, 0.0]);
        let (x_ref2, _) = reference_pair(&ctx2, &s2).unwrap();
        assert_eq!(x_ref2, s2.x);

        // Seeded family at the origin: all per-agent gradients vanish.
        let s3 = NetworkState::new(vec![0.4, -0.4], vec![0.0, 0.0]);
        let (x_ref3, v_ref3) = reference_pair(&ctx2, &s3).unwrap();
        assert_eq!(x_ref3, vec![0.0, 0.0]);
        assert_eq!(v_ref3, vec![0.0, 0.0]);
    }

    #[test]
    fn v3_is_invariant_under_consensus_dual_shifts() {
        // Dyadic data keeps every mean exact, so the invariance holds
        // bit for bit.
        let g = build_graph(&TopologySpec::ring(4)).unwrap();
        let sp = spectral(&g).unwrap();
        let obj = Objective::zero(4, 1).unwrap().with_opt_set(OptSet::Singleton(vec![0.0]));
        let params = FlowParams::new(1.0, 1.0).unwrap();
        let ctx = LyapunovContext::new(&sp, &obj, params, 1.0);
        let x = vec![1.0, -0.5, 0.25, -0.75];
        let v = vec![0.5, -0.25, 0.75, -1.0];
        let sample = eval_v(&ctx, &NetworkState::new(x.clone(), v.clone()), 0.0).unwrap();
        for c in [0.5, -2.0, 8.0] {
            let shifted: Vec<f64> = v.iter().map(|vi| vi + c).collect();
            let s2 = eval_v(&ctx, &NetworkState::new(x.clone(), shifted), 0.0).unwrap();
            assert_eq!(sample.v3.to_bits(), s2.v3.to_bits());
        }
    }

    #[test]
    fn weighted_seminorm_matches_dense_assembly() {
        let mut rng = StdRng::seed_from_u64(13);
        for n in 2..=6usize {
            let g = build_graph(&TopologySpec::ring(n)).unwrap();
            let sp = spectral(&g).unwrap();
            let dense = sp.laplacian_pinv_dense();
            for _ in 0..20 {
                let x: Vec<f64> = (0..n).map(|_| rng.gen_range(-2.0..2.0)).collect();
                let via_blocks = sp.apply_laplacian_pinv(&x, 1);
                let via_dense = dense.matvec(&x);
                for (a, b) in via_blocks.iter().zip(&via_dense) {
                    assert_abs_diff_eq!(a, b, epsilon = 1e-10);
                }
            }
        }
    }

    #[test]
    fn sandwich_holds_at_random_states() {
        // Five seeded graph/objective pairs with alpha above threshold.
        for seed in 0..5u64 {
            let n = 3 + (seed as usize % 4);
            let g = build_graph(&TopologySpec::ring(n)).unwrap();
            let sp = spectral(&g).unwrap();
            let mut rng = StdRng::seed_from_u64(seed);
            let centers: Vec<Vec<f64>> =
                (0..n).map(|_| vec![rng.gen_range(-2.0..2.0)]).collect();
            let obj = Objective::quadratic(centers).unwrap();
            let pc0 = ProblemConstants::new(
                n,
                obj.lipschitz_global(),
                obj.nu(),
                sp.rho2,
                sp.rho,
                1.0,
                1.0,
            )
            .unwrap();
            let alpha = 1.2 * alpha_threshold(&pc0);
            let beta = rng.gen_range(0.5..2.0);
            let params = FlowParams::new(alpha, beta).unwrap();
            let pc = ProblemConstants::from_parts(&obj, &sp, &params).unwrap();
            let rc = rate_constants(&pc).unwrap();
            let ctx = LyapunovContext::new(&sp, &obj, params, rc.eps1);

            for _ in 0..200 {
                let x: Vec<f64> = (0..n).map(|_| rng.gen_range(-4.0..4.0)).collect();
                let mut v: Vec<f64> = (0..n).map(|_| rng.gen_range(-4.0..4.0)).collect();
                let vm = v.iter().sum::<f64>() / n as f64;
                v.iter_mut().for_each(|vi| *vi -= vm);
                let s = NetworkState::new(x, v);
                let sample = eval_v(&ctx, &s, 0.0).unwrap();
                let dx = sub(&s.x, &sample.x_ref);
                let dv = sub(&s.v, &sample.v_ref);
                let sq = dot(&dx, &dx) + dot(&dv, &dv);
                assert!(sample.v >= rc.eps4 * sq - 1e-9, "lower sandwich");
                assert!(sample.v <= rc.eps3 * sq + 1e-9, "upper sandwich");
            }
        }
    }

    #[test]
    fn equilibrium_reports_zero_and_passes() {
        let g = build_graph(&TopologySpec::ring(4)).unwrap();
        let sp = spectral(&g).unwrap();
        let obj = Objective::quadratic(vec![vec![0.0]; 4]).unwrap();
        let pc0 =
            ProblemConstants::new(4, 1.0, 4.0, sp.rho2, sp.rho, 1.0, 1.0).unwrap();
        let alpha = 1.5 * alpha_threshold(&pc0);
        let params = FlowParams::new(alpha, 1.0).unwrap();
        let pc = ProblemConstants::from_parts(&obj, &sp, &params).unwrap();
        let rc = rate_constants(&pc).unwrap();
        let ctx = LyapunovContext::new(&sp, &obj, params, rc.eps1);

        let s0 = equilibrium_state(&obj, &params, &[0.0]);
        let traj = integrate(
            Flow::Main,
            &s0,
            &params,
            &g,
            &obj,
            1e-2,
            0.5,
            IntegrationMethod::Rk4,
            10,
        )
        .unwrap();
        let report = check_ct_decay(&ctx, &traj, rc.v_decay_rate()).unwrap();
        assert_eq!(report.status, CheckStatus::Passed);
        assert!(report.rows.iter().all(|r| r.v.abs() <= 1e-20));
    }

    #[test]
    fn ct_decay_certified_on_compliant_quadratic() {
        let n = 6;
        let g = build_graph(&TopologySpec::ring(n)).unwrap();
        let sp = spectral(&g).unwrap();
        let mut rng = StdRng::seed_from_u64(2);
        let centers: Vec<Vec<f64>> = (0..n).map(|_| vec![rng.gen_range(-2.0..2.0)]).collect();
        let obj = Objective::quadratic(centers).unwrap();
        let pc0 = ProblemConstants::new(n, 1.0, n as f64, sp.rho2, sp.rho, 1.0, 1.0).unwrap();
        let alpha = 1.1 * alpha_threshold(&pc0);
        let params = FlowParams::new(alpha, 1.0).unwrap();
        let pc = ProblemConstants::from_parts(&obj, &sp, &params).unwrap();
        let rc = rate_constants(&pc).unwrap();
        let ctx = LyapunovContext::new(&sp, &obj, params, rc.eps1);

        let s0 = NetworkState::with_zero_dual(uniform_stacked(n, 1, -3.0, 3.0, 4));
        let traj = integrate(
            Flow::Main,
            &s0,
            &params,
            &g,
            &obj,
            1e-3,
            5.0,
            IntegrationMethod::Rk4,
            50,
        )
        .unwrap();
        let report = check_ct_decay(&ctx, &traj, rc.v_decay_rate()).unwrap();
        assert_eq!(report.status, CheckStatus::Passed, "worst ratio {}", report.worst_ratio);
    }

    #[test]
    fn below_threshold_is_unmet_not_failed() {
        let g = build_graph(&TopologySpec::ring(5)).unwrap();
        let sp = spectral(&g).unwrap();
        let obj = Objective::make_secvi(5, 1).unwrap();
        let params = FlowParams::new(10.0, 10.0).unwrap();
        let ctx = LyapunovContext::new(&sp, &obj, params, 1.0);
        let s0 = NetworkState::with_zero_dual(uniform_stacked(5, 1, -1.0, 1.0, 1));
        let traj = run_dt(&s0, &params, 0.02, &g, &obj, 50, 1).unwrap();
        let report = check_ct_decay(&ctx, &traj, 0.01).unwrap();
        assert_eq!(report.status, CheckStatus::PreconditionUnmet);
    }

    #[test]
    fn dt_contraction_certified_below_step_ceiling() {
        let n = 5;
        let g = build_graph(&TopologySpec::ring(n)).unwrap();
        let sp = spectral(&g).unwrap();
        let mut rng = StdRng::seed_from_u64(6);
        let centers: Vec<Vec<f64>> = (0..n).map(|_| vec![rng.gen_range(-2.0..2.0)]).collect();
        let obj = Objective::quadratic(centers).unwrap();
        let pc0 = ProblemConstants::new(n, 1.0, n as f64, sp.rho2, sp.rho, 1.0, 1.0).unwrap();
        let alpha = 1.1 * alpha_threshold(&pc0);
        let params = FlowParams::new(alpha, 1.0).unwrap();
        let pc = ProblemConstants::from_parts(&obj, &sp, &params).unwrap();
        let rc = rate_constants(&pc).unwrap();
        let ctx = LyapunovContext::new(&sp, &obj, params, rc.eps1);

        let h = 0.5 * rc.h_max;
        let s0 = NetworkState::with_zero_dual(uniform_stacked(n, 1, -3.0, 3.0, 12));
        let traj = run_dt(&s0, &params, h, &g, &obj, 500, 1).unwrap();
        let report = check_dt_decay(&ctx, &traj, &rc, h).unwrap();
        assert_eq!(report.status, CheckStatus::Passed, "worst ratio {}", report.worst_ratio);

        // Step at the ceiling: certificate withheld.
        let report2 = check_dt_decay(&ctx, &traj, &rc, rc.h_max).unwrap();
        assert_eq!(report2.status, CheckStatus::PreconditionUnmet);
    }

    #[test]
    fn finite_difference_slope_respects_decay_rate() {
        let n = 4;
        let g = build_graph(&TopologySpec::ring(n)).unwrap();
        let sp = spectral(&g).unwrap();
        let obj =
            Objective::quadratic(vec![vec![1.0], vec![-0.5], vec![0.25], vec![-0.75]]).unwrap();
        let pc0 = ProblemConstants::new(n, 1.0, n as f64, sp.rho2, sp.rho, 1.0, 1.0).unwrap();
        let alpha = 1.2 * alpha_threshold(&pc0);
        let params = FlowParams::new(alpha, 1.0).unwrap();
        let pc = ProblemConstants::from_parts(&obj, &sp, &params).unwrap();
        let rc = rate_constants(&pc).unwrap();
        let ctx = LyapunovContext::new(&sp, &obj, params, rc.eps1);

        let dt = 1e-3;
        let s0 = NetworkState::with_zero_dual(uniform_stacked(n, 1, -2.0, 2.0, 9));
        let traj =
            integrate(Flow::Main, &s0, &params, &g, &obj, dt, 1.0, IntegrationMethod::Rk4, 1)
                .unwrap();
        let samples = eval_series(&ctx, &traj).unwrap();
        let v0 = samples[0].v;
        let rate = rc.v_decay_rate();
        for w in samples.windows(2) {
            let slope = (w[1].v - w[0].v) / dt;
            assert!(
                slope <= -rate * w[0].v + 10.0 * dt * v0,
                "slope {slope} vs bound at t={}",
                w[0].t_or_k
            );
        }
    }
}
