//! Continuous-time primal-dual consensus flows and fixed-step integrators.
//!
//! The main flow couples a gradient descent on the stacked cost with a
//! dual ascent on the consensus constraint:
//!
//! ```text
//! x' = -alpha (L(x)I) x - beta v - grad f~(x)
//! v' =  beta (L(x)I) x,          v(0) = 0
//! ```
//!
//! Starting the dual at zero matters: `1^T L = 0` makes `sum_i v_i`
//! a conserved quantity, so it stays zero for all time.
//!
//! The alternative flow replaces `beta v` by `beta (L(x)I) v`; it
//! tolerates arbitrary `v(0)` (the Laplacian annihilates any consensus
//! component of the dual) at the price of one more neighbor exchange.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::objective::Objective;

/// Divergence guard: abort when the primal norm passes this.
const DIVERGENCE_GUARD: f64 = 1e12;

/// Stacked primal/dual pair.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkState {
    pub x: Vec<f64>,
    pub v: Vec<f64>,
}

impl NetworkState {
    pub fn new(x: Vec<f64>, v: Vec<f64>) -> Self {
        assert_eq!(x.len(), v.len(), "primal and dual must have equal length");
        Self { x, v }
    }

    /// Primal at `x0` with the dual at zero.
    pub fn with_zero_dual(x: Vec<f64>) -> Self {
        let v = vec![0.0; x.len()];
        Self { x, v }
    }

    pub fn is_finite(&self) -> bool {
        self.x.iter().chain(&self.v).all(|c| c.is_finite())
    }

    /// Sum of the dual blocks (conserved along the main flow).
    pub fn dual_block_sum(&self, p: usize) -> Vec<f64> {
        let mut s = vec![0.0; p];
        for (i, v) in self.v.iter().enumerate() {
            s[i % p] += v;
        }
        s
    }
}

/// Consensus gain `alpha` and dual gain `beta`, both positive.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FlowParams {
    pub alpha: f64,
    pub beta: f64,
}

impl FlowParams {
    pub fn new(alpha: f64, beta: f64) -> Result<Self> {
        if !(alpha > 0.0) || !(beta > 0.0) {
            return Err(Error::ValidationError {
                field: "algorithm.alpha/beta".into(),
                reason: format!("gains must be positive, got alpha={alpha}, beta={beta}"),
            });
        }
        Ok(Self { alpha, beta })
    }
}

/// Which right-hand side drives the integration.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Flow {
    /// Dual enters directly; requires `v(0) = 0`.
    Main,
    /// Dual enters through the Laplacian; `v(0)` arbitrary.
    Alt,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum IntegrationMethod {
    Euler,
    Rk4,
}

/// Main-flow right-hand side. Also the shared kernel of the discrete
/// step, so a forward-Euler pass reproduces it bit for bit.
pub fn ct_rhs(
    s: &NetworkState,
    params: &FlowParams,
    g: &Graph,
    obj: &Objective,
) -> (Vec<f64>, Vec<f64>) {
    let p = obj.p();
    let lx = g.apply_laplacian(&s.x, p);
    let grad = obj.grad_stacked(&s.x);
    let mut xdot = vec![0.0; s.x.len()];
    let mut vdot = vec![0.0; s.v.len()];
    for i in 0..s.x.len() {
        xdot[i] = -(params.alpha * lx[i] + params.beta * s.v[i] + grad[i]);
        vdot[i] = params.beta * lx[i];
    }
    (xdot, vdot)
}

/// Alternative right-hand side with the Laplacian-filtered dual.
pub fn alt_ct_rhs(
    s: &NetworkState,
    params: &FlowParams,
    g: &Graph,
    obj: &Objective,
) -> (Vec<f64>, Vec<f64>) {
    let p = obj.p();
    let lx = g.apply_laplacian(&s.x, p);
    let lv = g.apply_laplacian(&s.v, p);
    let grad = obj.grad_stacked(&s.x);
    let mut xdot = vec![0.0; s.x.len()];
    let mut vdot = vec![0.0; s.v.len()];
    for i in 0..s.x.len() {
        xdot[i] = -(params.alpha * lx[i] + params.beta * lv[i] + grad[i]);
        vdot[i] = params.beta * lx[i];
    }
    (xdot, vdot)
}

fn rhs_of(flow: Flow, s: &NetworkState, params: &FlowParams, g: &Graph, obj: &Objective) -> (Vec<f64>, Vec<f64>) {
    match flow {
        Flow::Main => ct_rhs(s, params, g, obj),
        Flow::Alt => alt_ct_rhs(s, params, g, obj),
    }
}

/// One recorded state of a run.
#[derive(Debug, Clone)]
pub struct TrajectoryPoint {
    /// Step count since the start (integration steps or iterations).
    pub step: usize,
    /// Continuous time for flows, iteration index for discrete runs.
    pub t: f64,
    pub state: NetworkState,
}

/// Recorded samples of a run, with the residual series when the optimal
/// set supports projection.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub points: Vec<TrajectoryPoint>,
    /// `||x(k) - P(x(k))|| / ||x(0) - P(x(0))||` per recorded point.
    /// Row 0 is 1 by definition; a zero initial distance makes later
    /// rows 0 (or infinite if the state actually leaves the set).
    pub residuals: Option<Vec<f64>>,
}

impl Trajectory {
    pub fn last_state(&self) -> &NetworkState {
        &self.points.last().expect("trajectory has at least the initial point").state
    }
}

/// Distance of each recorded state to the consensus optimal set,
/// normalized by the initial distance.
pub(crate) fn residual_series(points: &[TrajectoryPoint], obj: &Objective) -> Result<Vec<f64>> {
    let mut dists = Vec::with_capacity(points.len());
    for pt in points {
        let proj = obj.project_consensus_opt(&pt.state.x)?;
        let d: f64 = pt
            .state
            .x
            .iter()
            .zip(&proj)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt();
        dists.push(d);
    }
    let denom = dists[0];
    let series = dists
        .iter()
        .enumerate()
        .map(|(k, d)| {
            if denom > 0.0 {
                d / denom
            } else if k == 0 {
                1.0
            } else if *d == 0.0 {
                0.0
            } else {
                f64::INFINITY
            }
        })
        .collect();
    Ok(series)
}

/// Fixed-step integration of the selected flow.
///
/// Records every `record_every`-th step plus the initial and final
/// states. The horizon is rounded to a whole number of steps.
/// Deterministic for fixed inputs.
#[allow(clippy::too_many_arguments)]
pub fn integrate(
    flow: Flow,
    s0: &NetworkState,
    params: &FlowParams,
    g: &Graph,
    obj: &Objective,
    dt: f64,
    t_end: f64,
    method: IntegrationMethod,
    record_every: usize,
) -> Result<Trajectory> {
    if !(dt > 0.0) {
        return Err(Error::ValidationError {
            field: "algorithm.dt".into(),
            reason: format!("step must be positive, got {dt}"),
        });
    }
    if t_end < dt {
        return Err(Error::ValidationError {
            field: "algorithm.T".into(),
            reason: format!("horizon {t_end} shorter than one step {dt}"),
        });
    }
    if flow == Flow::Main && s0.v.iter().any(|v| *v != 0.0) {
        return Err(Error::NonZeroDualInit);
    }
    let stride = record_every.max(1);
    let steps = (t_end / dt).round().max(1.0) as usize;

    let mut state = s0.clone();
    let mut points = vec![TrajectoryPoint { step: 0, t: 0.0, state: state.clone() }];
    for k in 0..steps {
        state = match method {
            IntegrationMethod::Euler => euler_step(flow, &state, params, g, obj, dt),
            IntegrationMethod::Rk4 => rk4_step(flow, &state, params, g, obj, dt),
        };
        let t = (k + 1) as f64 * dt;
        check_state(&state, t)?;
        if (k + 1) % stride == 0 || k + 1 == steps {
            points.push(TrajectoryPoint { step: k + 1, t, state: state.clone() });
        }
    }
    let residuals = residual_series(&points, obj).ok();
    Ok(Trajectory { points, residuals })
}

pub(crate) fn check_state(state: &NetworkState, at: f64) -> Result<()> {
    if !state.is_finite() {
        return Err(Error::NonFiniteState { at });
    }
    let xnorm: f64 = state.x.iter().map(|v| v * v).sum::<f64>().sqrt();
    if xnorm > DIVERGENCE_GUARD {
        return Err(Error::NonFiniteState { at });
    }
    Ok(())
}

/// Forward Euler: `s + dt * rhs(s)`. Shared with the discrete step.
pub(crate) fn euler_step(
    flow: Flow,
    s: &NetworkState,
    params: &FlowParams,
    g: &Graph,
    obj: &Objective,
    dt: f64,
) -> NetworkState {
    let (xdot, vdot) = rhs_of(flow, s, params, g, obj);
    let mut out = s.clone();
    for i in 0..out.x.len() {
        out.x[i] += dt * xdot[i];
        out.v[i] += dt * vdot[i];
    }
    out
}

fn rk4_step(
    flow: Flow,
    s: &NetworkState,
    params: &FlowParams,
    g: &Graph,
    obj: &Objective,
    dt: f64,
) -> NetworkState {
    let shifted = |base: &NetworkState, scale: f64, kx: &[f64], kv: &[f64]| {
        let mut out = base.clone();
        for i in 0..out.x.len() {
            out.x[i] += scale * kx[i];
            out.v[i] += scale * kv[i];
        }
        out
    };
    let (k1x, k1v) = rhs_of(flow, s, params, g, obj);
    let s2 = shifted(s, dt / 2.0, &k1x, &k1v);
    let (k2x, k2v) = rhs_of(flow, &s2, params, g, obj);
    let s3 = shifted(s, dt / 2.0, &k2x, &k2v);
    let (k3x, k3v) = rhs_of(flow, &s3, params, g, obj);
    let s4 = shifted(s, dt, &k3x, &k3v);
    let (k4x, k4v) = rhs_of(flow, &s4, params, g, obj);

    let mut out = s.clone();
    let w = dt / 6.0;
    for i in 0..out.x.len() {
        out.x[i] += w * (k1x[i] + 2.0 * k2x[i] + 2.0 * k3x[i] + k4x[i]);
        out.v[i] += w * (k1v[i] + 2.0 * k2v[i] + 2.0 * k3v[i] + k4v[i]);
    }
    out
}

/// Stationary state over a consensus minimizer: `x = 1 (x) y` and
/// `v = -(1/beta) grad f~(x)`, which zeroes both right-hand sides.
pub fn equilibrium_state(obj: &Objective, params: &FlowParams, y: &[f64]) -> NetworkState {
    let n = obj.n();
    let p = obj.p();
    let mut x = vec![0.0; n * p];
    for i in 0..n {
        x[i * p..(i + 1) * p].copy_from_slice(y);
    }
    let grad = obj.grad_stacked(&x);
    let v = grad.iter().map(|gi| -gi / params.beta).collect();
    NetworkState { x, v }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{build_graph, TopologySpec};
    use crate::linalg::norm;
    use approx::assert_abs_diff_eq;

    fn two_node() -> Graph {
        build_graph(&TopologySpec::complete(2)).unwrap()
    }

    #[test]
    fn rhs_hand_evaluation_two_nodes() {
        // Unit edge, zero costs: x' = -L x, v' = L x.
        let g = two_node();
        let obj = Objective::zero(2, 1).unwrap();
        let params = FlowParams::new(1.0, 1.0).unwrap();
        let s = NetworkState::new(vec![1.0, -1.0], vec![0.0, 0.0]);
        let (xdot, vdot) = ct_rhs(&s, &params, &g, &obj);
        assert_eq!(xdot, vec![-2.0, 2.0]);
        assert_eq!(vdot, vec![2.0, -2.0]);
    }

    #[test]
    fn rhs_single_agent_plain_gradient_flow() {
        // With one agent the Laplacian vanishes and the flow is x' = -grad f.
        let g = build_graph(&TopologySpec::ring(1)).unwrap();
        let obj = Objective::quadratic(vec![vec![0.0]]).unwrap();
        let params = FlowParams::new(3.7, 0.9).unwrap();
        let s = NetworkState::new(vec![1.0], vec![0.0]);
        let (xdot, vdot) = ct_rhs(&s, &params, &g, &obj);
        assert_eq!(xdot, vec![-1.0]);
        assert_eq!(vdot, vec![0.0]);
    }

    #[test]
    fn alt_rhs_hand_evaluation_and_consensus_shift() {
        let g = two_node();
        let obj = Objective::zero(2, 1).unwrap();
        let params = FlowParams::new(1.0, 1.0).unwrap();
        let s = NetworkState::new(vec![1.0, -1.0], vec![1.0, -1.0]);
        let (xdot, vdot) = alt_ct_rhs(&s, &params, &g, &obj);
        assert_eq!(xdot, vec![-4.0, 4.0]);
        assert_eq!(vdot, vec![2.0, -2.0]);

        // Shifting the dual along the consensus direction leaves x' alone.
        let shifted = NetworkState::new(s.x.clone(), vec![1.0 + 5.5, -1.0 + 5.5]);
        let (xdot2, _) = alt_ct_rhs(&shifted, &params, &g, &obj);
        assert_eq!(xdot, xdot2);
    }

    #[test]
    fn equilibrium_zeroes_both_rhs() {
        let g = build_graph(&TopologySpec::ring(4)).unwrap();
        let obj = Objective::quadratic(vec![vec![1.0], vec![-1.0], vec![0.5], vec![-0.5]]).unwrap();
        let params = FlowParams::new(2.0, 1.5).unwrap();
        let s = equilibrium_state(&obj, &params, &[0.0]);
        let (xdot, vdot) = ct_rhs(&s, &params, &g, &obj);
        assert!(norm(&xdot) < 1e-12);
        assert!(norm(&vdot) < 1e-12);

        // And a perturbed state does not.
        let mut s2 = s.clone();
        s2.x[0] += 0.1;
        let (xdot2, _) = ct_rhs(&s2, &params, &g, &obj);
        assert!(norm(&xdot2) > 1e-8);
    }

    #[test]
    fn pure_consensus_equilibrium_is_exact() {
        let g = build_graph(&TopologySpec::ring(6)).unwrap();
        let obj = Objective::zero(6, 1).unwrap();
        let params = FlowParams::new(2.0, 3.0).unwrap();
        let s0 = NetworkState::with_zero_dual(vec![0.75; 6]);
        for method in [IntegrationMethod::Euler, IntegrationMethod::Rk4] {
            let traj =
                integrate(Flow::Main, &s0, &params, &g, &obj, 0.01, 1.0, method, 10).unwrap();
            for pt in &traj.points {
                assert_eq!(pt.state.x, s0.x, "consensus state must stay put exactly");
                assert_eq!(pt.state.v, s0.v);
            }
        }
    }

    #[test]
    fn scalar_exponential_matches_closed_form() {
        // Single agent, f = x^2/2: x(t) = e^{-t} regardless of the gains.
        let g = build_graph(&TopologySpec::ring(1)).unwrap();
        let obj = Objective::quadratic(vec![vec![0.0]]).unwrap();
        let params = FlowParams::new(5.0, 2.0).unwrap();
        let s0 = NetworkState::with_zero_dual(vec![1.0]);
        let traj = integrate(
            Flow::Main,
            &s0,
            &params,
            &g,
            &obj,
            1e-2,
            1.0,
            IntegrationMethod::Rk4,
            100,
        )
        .unwrap();
        let exact = (-1.0f64).exp();
        assert_abs_diff_eq!(traj.last_state().x[0], exact, epsilon = 1e-8);
    }

    #[test]
    fn rk4_is_fourth_order_on_the_scalar_test() {
        let g = build_graph(&TopologySpec::ring(1)).unwrap();
        let obj = Objective::quadratic(vec![vec![0.0]]).unwrap();
        let params = FlowParams::new(1.0, 1.0).unwrap();
        let s0 = NetworkState::with_zero_dual(vec![1.0]);
        let run = |dt: f64| {
            let traj = integrate(
                Flow::Main,
                &s0,
                &params,
                &g,
                &obj,
                dt,
                1.0,
                IntegrationMethod::Rk4,
                usize::MAX,
            )
            .unwrap();
            (traj.last_state().x[0] - (-1.0f64).exp()).abs()
        };
        let ratio = run(0.02) / run(0.01);
        assert!((12.0..=20.0).contains(&ratio), "error ratio {ratio}");
    }

    #[test]
    fn main_flow_rejects_nonzero_dual_start() {
        let g = two_node();
        let obj = Objective::zero(2, 1).unwrap();
        let params = FlowParams::new(1.0, 1.0).unwrap();
        let s0 = NetworkState::new(vec![0.0, 0.0], vec![0.1, -0.1]);
        let err = integrate(
            Flow::Main,
            &s0,
            &params,
            &g,
            &obj,
            0.01,
            1.0,
            IntegrationMethod::Rk4,
            1,
        )
        .unwrap_err();
        assert!(matches!(err, Error::NonZeroDualInit));

        // The alternative flow accepts it.
        assert!(integrate(
            Flow::Alt,
            &s0,
            &params,
            &g,
            &obj,
            0.01,
            1.0,
            IntegrationMethod::Rk4,
            1
        )
        .is_ok());
    }

    #[test]
    fn dual_block_sum_is_conserved() {
        let g = build_graph(&TopologySpec::ring(5)).unwrap();
        let obj = Objective::make_secvi(5, 4).unwrap();
        let params = FlowParams::new(4.0, 2.0).unwrap();
        let s0 = NetworkState::with_zero_dual(vec![2.0, -1.0, 0.3, 1.4, -2.2]);
        let traj = integrate(
            Flow::Main,
            &s0,
            &params,
            &g,
            &obj,
            1e-3,
            2.0,
            IntegrationMethod::Rk4,
            200,
        )
        .unwrap();
        for pt in &traj.points {
            let s = pt.state.dual_block_sum(1);
            assert!(norm(&s) <= 1e-9, "dual sum {s:?} at t={}", pt.t);
        }
    }

    #[test]
    fn divergence_guard_reports_blowup() {
        // Unstable step size on a stiff consensus problem.
        let g = build_graph(&TopologySpec::complete(8)).unwrap();
        let obj = Objective::zero(8, 1).unwrap();
        let params = FlowParams::new(1e6, 1.0).unwrap();
        let s0 = NetworkState::with_zero_dual(vec![1.0, -1.0, 0.5, -0.5, 2.0, -2.0, 0.1, -0.1]);
        let err = integrate(
            Flow::Main,
            &s0,
            &params,
            &g,
            &obj,
            0.1,
            100.0,
            IntegrationMethod::Euler,
            1,
        )
        .unwrap_err();
        assert!(matches!(err, Error::NonFiniteState { .. }));
    }

    #[test]
    fn records_initial_final_and_stride_points() {
        let g = two_node();
        let obj = Objective::zero(2, 1).unwrap();
        let params = FlowParams::new(1.0, 1.0).unwrap();
        let s0 = NetworkState::with_zero_dual(vec![1.0, -1.0]);
        let traj = integrate(
            Flow::Main,
            &s0,
            &params,
            &g,
            &obj,
            0.1,
            0.7,
            IntegrationMethod::Euler,
            3,
        )
        .unwrap();
        let steps: Vec<usize> = traj.points.iter().map(|p| p.step).collect();
        assert_eq!(steps, vec![0, 3, 6, 7]);
        assert_abs_diff_eq!(traj.points.last().unwrap().t, 0.7, epsilon = 1e-12);
    }
}
