//! Closed-form convergence-rate constants.
//!
//! Given the problem data (agent count, smoothness constant `L_f`,
//! secant constant `nu`, Laplacian eigenvalue bounds, and the gains),
//! this module computes
//!
//! * the consensus-gain threshold `(2 n L_f^2 + nu L_f) / (nu rho2)`,
//! * the penalized secant constant `nu1`,
//! * the Lyapunov weights `eps1..eps5` and the gradient-smoothness
//!   surrogate `eta`,
//! * the guaranteed continuous decay exponent `eps2 / (2 eps3)`,
//! * the step-size ceiling `h_max = 2 eps2 eps4 / (eta eps3 eps5)` and
//!   the guaranteed per-iteration factor of the discrete method.
//!
//! All quantities are deliberately conservative; runs are free to use
//! larger steps, but the decay certificates only apply inside the
//! thresholds.

use serde::Serialize;

use crate::dynamics::FlowParams;
use crate::error::{Error, Result};
use crate::graph::SpectralData;
use crate::objective::Objective;

/// Scalars the rate formulas consume. All must be positive.
#[derive(Debug, Clone, Copy)]
pub struct ProblemConstants {
    pub n: usize,
    /// Largest per-agent gradient Lipschitz constant.
    pub lf: f64,
    /// Secant constant of the global cost.
    pub nu: f64,
    /// Smallest positive Laplacian eigenvalue.
    pub rho2: f64,
    /// Largest Laplacian eigenvalue.
    pub rho: f64,
    pub alpha: f64,
    pub beta: f64,
    /// True when `nu` came from sampling; propagated into reports.
    pub nu_estimated: bool,
}

impl ProblemConstants {
    #[allow(clippy::too_many_arguments)]
    pub fn new(n: usize, lf: f64, nu: f64, rho2: f64, rho: f64, alpha: f64, beta: f64) -> Result<Self> {
        for (name, v) in [
            ("lf", lf),
            ("nu", nu),
            ("rho2", rho2),
            ("rho", rho),
            ("alpha", alpha),
            ("beta", beta),
        ] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::ValidationError {
                    field: format!("constants.{name}"),
                    reason: format!("must be positive and finite, got {v}"),
                });
            }
        }
        if n == 0 {
            return Err(Error::ValidationError {
                field: "constants.n".into(),
                reason: "need at least one agent".into(),
            });
        }
        Ok(Self { n, lf, nu, rho2, rho, alpha, beta, nu_estimated: false })
    }

    /// Assemble from an objective, a spectral decomposition, and gains.
    pub fn from_parts(obj: &Objective, spectral: &SpectralData, params: &FlowParams) -> Result<Self> {
        let mut pc = Self::new(
            obj.n(),
            obj.lipschitz_global(),
            obj.nu(),
            spectral.rho2,
            spectral.rho,
            params.alpha,
            params.beta,
        )?;
        pc.nu_estimated = obj.nu_is_estimated();
        Ok(pc)
    }
}

/// Consensus-gain threshold `(2 n L_f^2 + nu L_f) / (nu rho2)` above
/// which the penalized stacked cost inherits the secant inequality.
pub fn alpha_threshold(pc: &ProblemConstants) -> f64 {
    (2.0 * pc.n as f64 * pc.lf * pc.lf + pc.nu * pc.lf) / (pc.nu * pc.rho2)
}

/// Secant constant of the penalized stacked cost:
/// `nu1 = min(nu / 2n, alpha rho2 - (2 n L_f^2 + nu L_f) / nu)`.
/// Positive exactly when `alpha` clears the threshold.
pub fn nu1(pc: &ProblemConstants) -> Result<f64> {
    let threshold = alpha_threshold(pc);
    if pc.alpha <= threshold {
        return Err(Error::ThresholdViolation { alpha: pc.alpha, threshold });
    }
    let first = pc.nu / (2.0 * pc.n as f64);
    let second = pc.alpha * pc.rho2 - (2.0 * pc.n as f64 * pc.lf * pc.lf + pc.nu * pc.lf) / pc.nu;
    Ok(first.min(second))
}

/// Convex-case variant: any `alpha > 0` works, with
/// `nu1 = min(nu/n - 2 L_f iota, alpha rho2 iota^2 / (1 + iota^2))` for
/// an interpolation parameter `iota in (0, nu / (2 n L_f))`.
pub fn nu1_convex(pc: &ProblemConstants, iota: f64) -> Result<f64> {
    let upper = pc.nu / (2.0 * pc.n as f64 * pc.lf);
    if !(iota > 0.0) || iota >= upper {
        return Err(Error::IotaOutOfRange { iota, upper });
    }
    let first = pc.nu / pc.n as f64 - 2.0 * pc.lf * iota;
    let second = pc.alpha * pc.rho2 * iota * iota / (1.0 + iota * iota);
    Ok(first.min(second))
}

/// Weights of the continuous-time decay certificate.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct CtConstants {
    pub eps1: f64,
    pub eps2: f64,
    pub eps3: f64,
    /// Guaranteed exponential decay exponent of the distance to the
    /// optimal set: `eps2 / (2 eps3)`.
    pub ct_rate: f64,
}

pub fn ct_constants(pc: &ProblemConstants) -> Result<CtConstants> {
    let nu1 = nu1(pc)?;
    let eps1 = ((pc.lf * pc.lf / (2.0 * pc.beta) + pc.rho * pc.beta) / nu1).max(pc.beta / pc.alpha);
    let eps2 = (pc.beta / 2.0).min(eps1 * nu1);
    let eps3 = (eps1 / pc.rho2 + pc.alpha / (2.0 * pc.beta) + 0.5).max(eps1 + 0.5);
    Ok(CtConstants { eps1, eps2, eps3, ct_rate: eps2 / (2.0 * eps3) })
}

/// Weights of the discrete-time decay certificate.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct DtConstants {
    pub eps4: f64,
    pub eps5: f64,
    pub eta: f64,
    /// Step sizes below this carry the linear-rate guarantee.
    pub h_max: f64,
}

pub fn dt_constants(pc: &ProblemConstants) -> Result<DtConstants> {
    let ct = ct_constants(pc)?;
    Ok(dt_constants_from(pc, &ct))
}

fn dt_constants_from(pc: &ProblemConstants, ct: &CtConstants) -> DtConstants {
    let eps4 = ct.eps1 * (1.0 / pc.rho).min(0.5);
    let rho_sq = pc.rho * pc.rho;
    let eps5 = (pc.beta * pc.beta * rho_sq
        + 3.0 * pc.alpha * pc.alpha * rho_sq
        + 3.0 * pc.lf * pc.lf)
        .max(3.0 * pc.beta * pc.beta);
    let eta = std::f64::consts::SQRT_2
        * (2.0 * ct.eps1 / pc.rho2 + pc.alpha + 1.0).max(4.0 * ct.eps1 + 1.0);
    let h_max = 2.0 * ct.eps2 * eps4 / (eta * ct.eps3 * eps5);
    DtConstants { eps4, eps5, eta, h_max }
}

/// The full constant set both certificates consume.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct RateConstants {
    pub alpha_min: f64,
    pub nu1: f64,
    pub eps1: f64,
    pub eps2: f64,
    pub eps3: f64,
    pub eps4: f64,
    pub eps5: f64,
    pub eta: f64,
    /// Distance decay exponent `eps2 / (2 eps3)` of the flow.
    pub ct_rate: f64,
    pub h_max: f64,
    pub nu_estimated: bool,
}

impl RateConstants {
    /// Decay exponent of the Lyapunov value itself, `eps2 / eps3`.
    pub fn v_decay_rate(&self) -> f64 {
        self.eps2 / self.eps3
    }

    /// Guaranteed per-iteration factor on the distance to the optimal
    /// set: `1 - h (2 eps2 eps4 - h eta eps3 eps5) / (4 eps3 eps4)`.
    pub fn dt_rate(&self, h: f64) -> f64 {
        1.0 - h * (2.0 * self.eps2 * self.eps4 - h * self.eta * self.eps3 * self.eps5)
            / (4.0 * self.eps3 * self.eps4)
    }

    /// Guaranteed per-iteration contraction of the Lyapunov value:
    /// `1 - h (2 eps2 eps4 - h eta eps3 eps5) / (2 eps3 eps4)`.
    pub fn dt_v_contraction(&self, h: f64) -> f64 {
        1.0 - h * (2.0 * self.eps2 * self.eps4 - h * self.eta * self.eps3 * self.eps5)
            / (2.0 * self.eps3 * self.eps4)
    }
}

pub fn rate_constants(pc: &ProblemConstants) -> Result<RateConstants> {
    let nu1 = nu1(pc)?;
    let ct = ct_constants(pc)?;
    let dt = dt_constants_from(pc, &ct);
    Ok(RateConstants {
        alpha_min: alpha_threshold(pc),
        nu1,
        eps1: ct.eps1,
        eps2: ct.eps2,
        eps3: ct.eps3,
        eps4: dt.eps4,
        eps5: dt.eps5,
        eta: dt.eta,
        ct_rate: ct.ct_rate,
        h_max: dt.h_max,
        nu_estimated: pc.nu_estimated,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn worked_example() -> ProblemConstants {
        // n=2, L_f=1, nu=1, rho2=rho=2, alpha=3, beta=1.
        ProblemConstants::new(2, 1.0, 1.0, 2.0, 2.0, 3.0, 1.0).unwrap()
    }

    #[test]
    fn threshold_formula() {
        let pc = worked_example();
        assert_abs_diff_eq!(alpha_threshold(&pc), 2.5, epsilon = 1e-15);
        let pc1 = ProblemConstants::new(1, 1.0, 1.0, 1.0, 1.0, 4.0, 1.0).unwrap();
        assert_abs_diff_eq!(alpha_threshold(&pc1), 3.0, epsilon = 1e-15);
    }

    #[test]
    fn threshold_monotone_in_smoothness() {
        let mut prev = 0.0;
        for c in [1.0, 1.5, 2.0, 3.0] {
            let pc = ProblemConstants::new(2, c, 1.0, 2.0, 2.0, 100.0, 1.0).unwrap();
            let t = alpha_threshold(&pc);
            assert!(t > prev);
            prev = t;
        }
    }

    #[test]
    fn nu1_worked_example_and_regimes() {
        let pc = worked_example();
        assert_abs_diff_eq!(nu1(&pc).unwrap(), 0.25, epsilon = 1e-15);

        // Just above the threshold the second term is active and scales
        // like rho2 * (alpha - threshold).
        let eps = 1e-6;
        let near = ProblemConstants::new(2, 1.0, 1.0, 2.0, 2.0, 2.5 + eps, 1.0).unwrap();
        assert_abs_diff_eq!(nu1(&near).unwrap(), 2.0 * eps, epsilon = 1e-12);

        // Far above it the cap nu / 2n takes over.
        let far = ProblemConstants::new(2, 1.0, 1.0, 2.0, 2.0, 1e6, 1.0).unwrap();
        assert_abs_diff_eq!(nu1(&far).unwrap(), 0.25, epsilon = 1e-15);
    }

    #[test]
    fn nu1_rejects_alpha_at_or_below_threshold() {
        let pc = ProblemConstants::new(2, 1.0, 1.0, 2.0, 2.0, 2.5, 1.0).unwrap();
        assert!(matches!(nu1(&pc), Err(Error::ThresholdViolation { .. })));
    }

    #[test]
    fn nu1_convex_worked_example_and_range() {
        let pc = ProblemConstants::new(2, 1.0, 1.0, 2.0, 2.0, 1.0, 1.0).unwrap();
        let got = nu1_convex(&pc, 0.2).unwrap();
        let want = (0.5f64 - 0.4).min(2.0 * 0.04 / 1.04);
        assert_abs_diff_eq!(got, want, epsilon = 1e-15);
        assert_abs_diff_eq!(got, 0.04 * 2.0 / 1.04, epsilon = 1e-15);

        // The interval is open at nu / (2 n L_f) = 0.25.
        assert!(matches!(nu1_convex(&pc, 0.25), Err(Error::IotaOutOfRange { .. })));
        assert!(matches!(nu1_convex(&pc, 0.0), Err(Error::IotaOutOfRange { .. })));
    }

    #[test]
    fn ct_constants_worked_example() {
        let ct = ct_constants(&worked_example()).unwrap();
        assert_abs_diff_eq!(ct.eps1, 10.0, epsilon = 1e-12);
        assert_abs_diff_eq!(ct.eps2, 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(ct.eps3, 10.5, epsilon = 1e-12);
        assert_abs_diff_eq!(ct.ct_rate, 0.5 / 21.0, epsilon = 1e-12);
    }

    #[test]
    fn eps2_is_capped_by_half_beta() {
        for beta in [0.5, 1.0, 2.0, 8.0] {
            let pc = ProblemConstants::new(2, 1.0, 1.0, 2.0, 2.0, 3.0, beta).unwrap();
            let ct = ct_constants(&pc).unwrap();
            assert!(ct.eps2 <= beta / 2.0 + 1e-15);
            assert!(ct.ct_rate > 0.0);
        }
    }

    #[test]
    fn dt_constants_worked_example() {
        let rc = rate_constants(&worked_example()).unwrap();
        assert_abs_diff_eq!(rc.eps4, 5.0, epsilon = 1e-12);
        assert_abs_diff_eq!(rc.eps5, 115.0, epsilon = 1e-12);
        assert_abs_diff_eq!(rc.eta, 41.0 * std::f64::consts::SQRT_2, epsilon = 1e-12);
        let want_hmax = 2.0 * 0.5 * 5.0 / (41.0 * std::f64::consts::SQRT_2 * 10.5 * 115.0);
        assert_abs_diff_eq!(rc.h_max, want_hmax, epsilon = 1e-18);
        assert!((rc.h_max - 7.141e-5).abs() < 1e-7);
    }

    #[test]
    fn dt_rate_boundary_values() {
        let rc = rate_constants(&worked_example()).unwrap();
        assert_eq!(rc.dt_rate(0.0), 1.0);
        for f in [0.1, 0.25, 0.5, 0.9, 0.999] {
            let h = f * rc.h_max;
            let r = rc.dt_rate(h);
            assert!(r > 0.0 && r < 1.0, "rate {r} at h={h}");
            let c = rc.dt_v_contraction(h);
            assert!(c > 0.0 && c < 1.0);
        }
    }

    #[test]
    fn dt_rate_minimized_at_half_hmax() {
        // The per-iteration factor is a quadratic in h with vertex at
        // eps2 eps4 / (eta eps3 eps5) = h_max / 2; confirm by grid scan.
        let rc = rate_constants(&worked_example()).unwrap();
        let vertex = rc.eps2 * rc.eps4 / (rc.eta * rc.eps3 * rc.eps5);
        assert_abs_diff_eq!(vertex, rc.h_max / 2.0, epsilon = 1e-20);
        let mut best_h = 0.0;
        let mut best = f64::INFINITY;
        for k in 0..=10_000 {
            let h = rc.h_max * k as f64 / 10_000.0;
            let r = rc.dt_rate(h);
            if r < best {
                best = r;
                best_h = h;
            }
        }
        assert!((best_h - vertex).abs() <= rc.h_max / 10_000.0 + 1e-9);
    }

    #[test]
    fn constants_all_positive_above_threshold() {
        for seed_alpha in [1.01, 1.1, 2.0, 10.0] {
            let pc0 = worked_example();
            let alpha = seed_alpha * alpha_threshold(&pc0);
            let pc = ProblemConstants::new(2, 1.0, 1.0, 2.0, 2.0, alpha, 1.0).unwrap();
            let rc = rate_constants(&pc).unwrap();
            for v in [rc.nu1, rc.eps1, rc.eps2, rc.eps3, rc.eps4, rc.eps5, rc.eta, rc.ct_rate, rc.h_max] {
                assert!(v > 0.0);
            }
        }
    }
}
