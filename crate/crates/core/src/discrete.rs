//! Forward-Euler discretization of the primal-dual flow and its
//! equivalence with the two-matrix EXTRA recursion.
//!
//! One iteration, with both updates reading the pre-step primal:
//!
//! ```text
//! x(k+1) = x(k) - h (alpha (L(x)I) x(k) + beta v(k) + grad f~(x(k)))
//! v(k+1) = v(k) + h beta (L(x)I) x(k),           v(0) = 0
//! ```
//!
//! Eliminating the dual turns this into EXTRA with mixing matrices
//! `W = I - h alpha L` and `W~ = W + h^2 beta^2 L`;
//! [`verify_extra_equivalence`] runs both forms side by side and reports
//! the largest trajectory deviation.

use crate::dynamics::{
    check_state, euler_step, residual_series, Flow, FlowParams, NetworkState, Trajectory,
    TrajectoryPoint,
};
use crate::error::{Error, Result};
use crate::graph::{apply_blockwise, Graph};
use crate::linalg::Mat;
use crate::objective::Objective;

/// The EXTRA mixing matrices induced by one discrete primal-dual step.
///
/// Both are symmetric, share the all-ones eigenvector with eigenvalue 1,
/// and differ by the positive-semidefinite `h^2 beta^2 L`.
#[derive(Debug, Clone)]
pub struct MixingPair {
    pub w: Mat,
    pub wtilde: Mat,
}

pub fn mixing_pair(g: &Graph, params: &FlowParams, h: f64) -> MixingPair {
    let n = g.n();
    let l = g.laplacian();
    let mut w = Mat::zeros(n, n);
    let mut wtilde = Mat::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            let id = if i == j { 1.0 } else { 0.0 };
            w[(i, j)] = id - h * params.alpha * l[(i, j)];
            wtilde[(i, j)] = w[(i, j)] + h * h * params.beta * params.beta * l[(i, j)];
        }
    }
    MixingPair { w, wtilde }
}

/// One simultaneous primal/dual update. Implemented as a forward-Euler
/// pass over the continuous right-hand side so that a discrete run and
/// an Euler-integrated flow agree bit for bit.
pub fn dt_step(
    s: &NetworkState,
    params: &FlowParams,
    h: f64,
    g: &Graph,
    obj: &Objective,
) -> NetworkState {
    euler_step(Flow::Main, s, params, g, obj, h)
}

/// Run `iters` discrete steps from a zero-dual start, recording every
/// `record_every`-th state plus the endpoints.
pub fn run_dt(
    s0: &NetworkState,
    params: &FlowParams,
    h: f64,
    g: &Graph,
    obj: &Objective,
    iters: usize,
    record_every: usize,
) -> Result<Trajectory> {
    if !(h > 0.0) {
        return Err(Error::ValidationError {
            field: "algorithm.h".into(),
            reason: format!("step must be positive, got {h}"),
        });
    }
    if iters == 0 {
        return Err(Error::ValidationError {
            field: "algorithm.iters".into(),
            reason: "need at least one iteration".into(),
        });
    }
    if s0.v.iter().any(|v| *v != 0.0) {
        return Err(Error::NonZeroDualInit);
    }
    let stride = record_every.max(1);

    let mut state = s0.clone();
    let mut points = vec![TrajectoryPoint { step: 0, t: 0.0, state: state.clone() }];
    for k in 0..iters {
        state = dt_step(&state, params, h, g, obj);
        check_state(&state, (k + 1) as f64)?;
        if (k + 1) % stride == 0 || k + 1 == iters {
            points.push(TrajectoryPoint { step: k + 1, t: (k + 1) as f64, state: state.clone() });
        }
    }
    let residuals = residual_series(&points, obj).ok();
    Ok(Trajectory { points, residuals })
}

/// Run the primal-dual recursion and the EXTRA recursion side by side
/// and return the largest `||x_pd(k) - x_extra(k)||` over `0..=iters`.
///
/// EXTRA:
/// ```text
/// x(1)   = W x(0) - h grad f~(x(0))
/// x(k+2) = (I + W) x(k+1) - W~ x(k) - h (grad f~(x(k+1)) - grad f~(x(k)))
/// ```
pub fn verify_extra_equivalence(
    s0: &NetworkState,
    params: &FlowParams,
    h: f64,
    g: &Graph,
    obj: &Objective,
    iters: usize,
) -> Result<f64> {
    let traj = run_dt(s0, params, h, g, obj, iters, 1)?;
    let p = obj.p();
    let pair = mixing_pair(g, params, h);

    let apply_w = |x: &[f64]| apply_blockwise(&pair.w, x, p);
    let apply_wtilde = |x: &[f64]| apply_blockwise(&pair.wtilde, x, p);

    let mut max_dev = 0.0f64;
    let mut dev_at = |k: usize, x_extra: &[f64]| {
        let x_pd = &traj.points[k].state.x;
        let d: f64 =
            x_pd.iter().zip(x_extra).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
        max_dev = max_dev.max(d);
    };

    let x0 = s0.x.clone();
    dev_at(0, &x0);
    if iters == 0 {
        return Ok(max_dev);
    }

    let g0 = obj.grad_stacked(&x0);
    let mut prev = x0.clone();
    let mut prev_grad = g0;
    let mut cur: Vec<f64> = apply_w(&x0)
        .iter()
        .zip(&prev_grad)
        .map(|(wx, gr)| wx - h * gr)
        .collect();
    dev_at(1, &cur);

    for k in 2..=iters {
        let cur_grad = obj.grad_stacked(&cur);
        let wcur = apply_w(&cur);
        let wtprev = apply_wtilde(&prev);
        let next: Vec<f64> = (0..cur.len())
            .map(|i| cur[i] + wcur[i] - wtprev[i] - h * (cur_grad[i] - prev_grad[i]))
            .collect();
        prev = std::mem::replace(&mut cur, next);
        prev_grad = cur_grad;
        dev_at(k, &cur);
    }
    Ok(max_dev)
}
