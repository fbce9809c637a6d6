//! Time dependence of the model parameters.
//!
//! A schedule supplies the antisymmetric coupling strength `τ(t)`, the real
//! diagonal shift `σ(t)`, and their first time derivatives.  The derivative
//! channel feeds the metric velocity `Θ̇` and through it the Coriolis
//! operator, so schedules provide it analytically rather than by
//! differencing.

use crate::error::{Error, Result};

/// Parameter schedule `t ↦ (τ, σ)` with analytic first derivatives.
///
/// All variants are plain data: cloneable, shareable across threads, and
/// cheap to evaluate.
#[derive(Debug, Clone, PartialEq)]
pub enum Schedule {
    /// The canonical Big-Bang schedule of the `n`-level family:
    /// `τ(t) = 1 − t` hits the exceptional point at `t = 0`, and the shift
    /// `σ(t) = 2n·√(1 − τ²)` keeps all eigenvalue curves positive for
    /// `t ∈ (0, 1)`.  Where `1 − τ² < 0` (before the Big Bang, `t < 0`)
    /// the square root is clamped to zero so that `σ` stays real; the
    /// spectrum is complex there anyway.
    Standard { n: usize },
    /// Polynomial `τ` and `σ` with coefficients in ascending powers of `t`.
    /// An empty coefficient list means identically zero.
    Polynomial { tau: Vec<f64>, sigma: Vec<f64> },
    /// Time-independent parameters — handy for stationary cross-checks.
    Frozen { tau: f64, sigma: f64 },
}

fn horner(coeffs: &[f64], t: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, &c| acc * t + c)
}

fn horner_derivative(coeffs: &[f64], t: f64) -> f64 {
    coeffs
        .iter()
        .enumerate()
        .skip(1)
        .rev()
        .fold(0.0, |acc, (k, &c)| acc * t + k as f64 * c)
}

impl Schedule {
    /// Coupling strength `τ(t)`.
    pub fn tau(&self, t: f64) -> f64 {
        match self {
            Schedule::Standard { .. } => 1.0 - t,
            Schedule::Polynomial { tau, .. } => horner(tau, t),
            Schedule::Frozen { tau, .. } => *tau,
        }
    }

    /// `dτ/dt`.
    pub fn tau_dot(&self, t: f64) -> f64 {
        match self {
            Schedule::Standard { .. } => -1.0,
            Schedule::Polynomial { tau, .. } => horner_derivative(tau, t),
            Schedule::Frozen { .. } => 0.0,
        }
    }

    /// Diagonal shift `σ(t)`.
    pub fn sigma(&self, t: f64) -> f64 {
        match self {
            Schedule::Standard { n } => {
                let tau = 1.0 - t;
                2.0 * (*n as f64) * (1.0 - tau * tau).max(0.0).sqrt()
            }
            Schedule::Polynomial { sigma, .. } => horner(sigma, t),
            Schedule::Frozen { sigma, .. } => *sigma,
        }
    }

    /// `dσ/dt`.
    ///
    /// For the standard schedule this diverges as `t → 0⁺` (the EP); the
    /// returned value is `±inf` exactly at the clamp boundary, which
    /// downstream consumers convert into [`Error::NonFiniteSchedule`].
    pub fn sigma_dot(&self, t: f64) -> f64 {
        match self {
            Schedule::Standard { n } => {
                let tau = 1.0 - t;
                let u = 1.0 - tau * tau;
                if u <= 0.0 {
                    0.0
                } else {
                    2.0 * (*n as f64) * tau / u.sqrt()
                }
            }
            Schedule::Polynomial { sigma, .. } => horner_derivative(sigma, t),
            Schedule::Frozen { .. } => 0.0,
        }
    }

    /// Both parameters at once, rejecting non-finite values.
    pub fn sample(&self, t: f64) -> Result<(f64, f64)> {
        let tau = self.tau(t);
        let sigma = self.sigma(t);
        if !tau.is_finite() {
            return Err(Error::NonFiniteSchedule { quantity: "tau", t });
        }
        if !sigma.is_finite() {
            return Err(Error::NonFiniteSchedule {
                quantity: "sigma",
                t,
            });
        }
        Ok((tau, sigma))
    }

    /// Both derivatives at once, rejecting non-finite values.
    pub fn sample_dot(&self, t: f64) -> Result<(f64, f64)> {
        let tau_dot = self.tau_dot(t);
        let sigma_dot = self.sigma_dot(t);
        if !tau_dot.is_finite() {
            return Err(Error::NonFiniteSchedule {
                quantity: "tau_dot",
                t,
            });
        }
        if !sigma_dot.is_finite() {
            return Err(Error::NonFiniteSchedule {
                quantity: "sigma_dot",
                t,
            });
        }
        Ok((tau_dot, sigma_dot))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn standard_schedule_hits_ep_at_origin() {
        let s = Schedule::Standard { n: 4 };
        assert_abs_diff_eq!(s.tau(0.0), 1.0);
        assert_abs_diff_eq!(s.sigma(0.0), 0.0);
        assert_abs_diff_eq!(s.tau(1.0), 0.0);
        assert_abs_diff_eq!(s.sigma(1.0), 8.0);
    }

    #[test]
    fn standard_shift_clamps_before_big_bang() {
        let s = Schedule::Standard { n: 3 };
        assert_eq!(s.sigma(-0.25), 0.0);
        assert_eq!(s.sigma_dot(-0.25), 0.0);
        assert!(s.sample(-0.25).is_ok());
    }

    #[test]
    fn derivatives_match_central_differences() {
        let schedules = [
            Schedule::Standard { n: 5 },
            Schedule::Polynomial {
                tau: vec![0.3, -1.2, 0.5],
                sigma: vec![1.0, 2.0, 0.0, -0.75],
            },
            Schedule::Frozen {
                tau: 0.4,
                sigma: 1.5,
            },
        ];
        let h = 1e-5;
        for s in &schedules {
            for &t in &[0.2, 0.5, 0.8, 1.3] {
                let fd_tau = (s.tau(t + h) - s.tau(t - h)) / (2.0 * h);
                let fd_sigma = (s.sigma(t + h) - s.sigma(t - h)) / (2.0 * h);
                assert_abs_diff_eq!(s.tau_dot(t), fd_tau, epsilon = 1e-7);
                assert_abs_diff_eq!(s.sigma_dot(t), fd_sigma, epsilon = 1e-6);
            }
        }
    }

    #[test]
    fn polynomial_horner_matches_naive_evaluation() {
        let s = Schedule::Polynomial {
            tau: vec![2.0, -1.0, 0.25],
            sigma: vec![],
        };
        let t = 1.7;
        assert_abs_diff_eq!(s.tau(t), 2.0 - t + 0.25 * t * t, epsilon = 1e-14);
        assert_eq!(s.sigma(t), 0.0);
    }
}
