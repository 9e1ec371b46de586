//! Distributed primal-dual gradient dynamics over connected graphs:
//! continuous flows, their forward-Euler discretization, the
//! convergence-rate constant calculus, and Lyapunov-based runtime
//! certificates of the guaranteed exponential/linear rates.
//!
//! The pieces fit together like this:
//!
//! * [`graph`] builds weighted undirected topologies and the Laplacian
//!   spectral data every rate formula consumes.
//! * [`objective`] holds the local cost families (including the seeded
//!   nonconvex piecewise family whose global cost satisfies the
//!   restricted secant inequality on the interval `[-1, 0]`), optimal-set
//!   projections, and samplers that verify the declared constants.
//! * [`dynamics`] integrates the primal-dual flow; [`discrete`] runs its
//!   forward-Euler counterpart and checks the EXTRA equivalence.
//! * [`rates`] turns problem constants into thresholds, Lyapunov weights,
//!   step-size ceilings, and guaranteed rates.
//! * [`lyapunov`] evaluates the certified function along trajectories and
//!   asserts the decay/contraction bounds at runtime.
//! * [`harness`] runs seeded experiments from JSON configs and persists
//!   deterministic CSV series.

pub mod discrete;
pub mod dynamics;
pub mod error;
pub mod graph;
pub mod harness;
pub mod linalg;
pub mod lyapunov;
pub mod objective;
pub mod rates;

pub use discrete::{dt_step, mixing_pair, run_dt, verify_extra_equivalence, MixingPair};
pub use dynamics::{
    alt_ct_rhs, ct_rhs, equilibrium_state, integrate, Flow, FlowParams, IntegrationMethod,
    NetworkState, Trajectory, TrajectoryPoint,
};
pub use error::{Error, Result};
pub use graph::{build_graph, check_connected, spectral, Graph, SpectralData, TopologyKind, TopologySpec};
pub use harness::{
    config_hash, fit_rate, fit_rate_indexed, load_config, parse_config, run_experiment, run_sweep,
    run_verify, write_csv, write_csv_to, AlgorithmConfig, ExperimentConfig, RateFit, RunRecord,
    RunRow, VerifyOutcome, VerifySuite,
};
pub use lyapunov::{
    check_ct_decay, check_dt_decay, eval_series, eval_v, reference_pair, CheckStatus, DecayReport,
    DecayRow, LyapunovContext, LyapunovSample,
};
pub use objective::{
    block_mean, center_blocks, LocalCost, Objective, ObjectiveSpec, OptSet, RsiReport, SampleSpec,
    SecViCoefficients, StackedPoint,
};
pub use rates::{
    alpha_threshold, ct_constants, dt_constants, nu1, nu1_convex, rate_constants, CtConstants,
    DtConstants, ProblemConstants, RateConstants,
};
